//! Closed polygonal loops in parameter space and their discretization.
//!
//! A loop with `k` vertices is traversed basepoint → v₁ → … → v_k → basepoint
//! along straight segments, giving `k + 1` edges.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{FormatError, LoopError};
use crate::model::System;

/// Default subdivision of each edge.
pub const DEFAULT_STEPS_PER_EDGE: usize = 200;

/// Version string written to and required from loop files.
pub const LOOP_FORMAT_VERSION: &str = "hqc-loop/1";

#[derive(Clone, Debug, PartialEq)]
pub struct PolygonalLoop {
    system: System,
    basepoint: Vec<f64>,
    vertices: Vec<Vec<f64>>,
}

fn check_point(system: System, p: &[f64], context: impl Fn() -> String) -> Result<(), LoopError> {
    if p.len() != system.coords() {
        return Err(LoopError::DimensionMismatch {
            context: context(),
            system: system.tag(),
            expected: system.coords(),
            found: p.len(),
        });
    }
    if let Some(index) = p.iter().position(|x| !x.is_finite()) {
        return Err(LoopError::NonFinite {
            context: context(),
            index,
        });
    }
    Ok(())
}

/// Builds a loop after validating every coordinate.
pub fn make_loop(
    system: System,
    basepoint: Vec<f64>,
    vertices: Vec<Vec<f64>>,
) -> Result<PolygonalLoop, LoopError> {
    check_point(system, &basepoint, || "basepoint".to_string())?;
    for (i, v) in vertices.iter().enumerate() {
        check_point(system, v, || format!("vertices[{i}]"))?;
    }
    Ok(PolygonalLoop {
        system,
        basepoint,
        vertices,
    })
}

impl PolygonalLoop {
    /// Loop based at the origin.
    pub fn at_origin(system: System, vertices: Vec<Vec<f64>>) -> Result<Self, LoopError> {
        make_loop(system, vec![0.0; system.coords()], vertices)
    }

    /// Loop based at the origin from a flat vector of `k · coords` entries.
    pub fn from_flat(system: System, x: &[f64]) -> Result<Self, LoopError> {
        let n = system.coords();
        if !x.len().is_multiple_of(n) {
            return Err(LoopError::DimensionMismatch {
                context: "flattened vertices".into(),
                system: system.tag(),
                expected: n * x.len().div_ceil(n),
                found: x.len(),
            });
        }
        Self::at_origin(system, x.chunks(n).map(<[f64]>::to_vec).collect())
    }

    pub fn system(&self) -> System {
        self.system
    }

    pub fn basepoint(&self) -> &[f64] {
        &self.basepoint
    }

    pub fn vertices(&self) -> &[Vec<f64>] {
        &self.vertices
    }

    /// Number of free vertices `k`.
    pub fn k(&self) -> usize {
        self.vertices.len()
    }

    pub fn edge_count(&self) -> usize {
        self.vertices.len() + 1
    }

    /// Vertex coordinates concatenated, the optimizer's parameter vector.
    pub fn flatten(&self) -> Vec<f64> {
        self.vertices.iter().flatten().copied().collect()
    }

    /// Corner sequence of the closed polygon, basepoint at both ends.
    pub fn corners(&self) -> impl Iterator<Item = &[f64]> {
        std::iter::once(self.basepoint.as_slice())
            .chain(self.vertices.iter().map(Vec::as_slice))
            .chain(std::iter::once(self.basepoint.as_slice()))
    }

    /// Same polygon traversed backwards.
    pub fn reverse(&self) -> Self {
        let mut vertices = self.vertices.clone();
        vertices.reverse();
        Self {
            system: self.system,
            basepoint: self.basepoint.clone(),
            vertices,
        }
    }

    pub fn discretize(&self, steps_per_edge: usize, rule: EvaluationRule) -> DiscretizedPath {
        discretize(self, steps_per_edge, rule)
    }

    /// Copy with `point` inserted after vertex `after` (0 = right after the basepoint).
    pub fn with_vertex_inserted(&self, after: usize, point: Vec<f64>) -> Result<Self, LoopError> {
        check_point(self.system, &point, || "inserted vertex".into())?;
        let mut vertices = self.vertices.clone();
        vertices.insert(after, point);
        Ok(Self {
            vertices,
            ..self.clone()
        })
    }
}

/// Reverse traversal; free-function form of [`PolygonalLoop::reverse`].
pub fn reverse(l: &PolygonalLoop) -> PolygonalLoop {
    l.reverse()
}

/// Where the connection is sampled inside each sub-segment.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum EvaluationRule {
    /// Sub-segment midpoint; second order in the step.
    #[default]
    Midpoint,
    /// Sub-segment start; first order.
    LeftEndpoint,
}

impl EvaluationRule {
    pub fn name(self) -> &'static str {
        match self {
            EvaluationRule::Midpoint => "midpoint",
            EvaluationRule::LeftEndpoint => "left",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        match s {
            "midpoint" | "mid" => Some(Self::Midpoint),
            "left" | "left-endpoint" => Some(Self::LeftEndpoint),
            _ => None,
        }
    }
}

/// Ordered steps of a discretized loop, stored flat: step `j` occupies
/// `[j·dim, (j+1)·dim)` of each buffer.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscretizedPath {
    dim: usize,
    points: Vec<f64>,
    increments: Vec<f64>,
    nodes: Vec<f64>,
}

impl DiscretizedPath {
    pub fn len(&self) -> usize {
        self.points.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `(evaluation point, increment)` per step, in traversal order.
    pub fn steps(&self) -> impl Iterator<Item = (&[f64], &[f64])> {
        self.points
            .chunks_exact(self.dim)
            .zip(self.increments.chunks_exact(self.dim))
    }

    /// Start of every sub-segment, in traversal order.
    pub fn nodes(&self) -> impl Iterator<Item = &[f64]> {
        self.nodes.chunks_exact(self.dim)
    }

    /// Sum of all increments; zero for a closed loop up to rounding.
    pub fn total_increment(&self) -> Vec<f64> {
        let mut acc = vec![0.0; self.dim];
        for (_, d) in self.steps() {
            for (a, x) in acc.iter_mut().zip(d) {
                *a += x;
            }
        }
        acc
    }
}

/// Splits every edge into `steps_per_edge` equal sub-segments.
///
/// Sub-segment nodes are computed as `start + edge · (j / n)` so a refinement
/// by an integer factor reproduces the coarse nodes bit for bit.
pub fn discretize(
    l: &PolygonalLoop,
    steps_per_edge: usize,
    rule: EvaluationRule,
) -> DiscretizedPath {
    let n = steps_per_edge.max(1);
    let dim = l.system.coords();
    let total = n * l.edge_count();
    let mut points = Vec::with_capacity(total * dim);
    let mut increments = Vec::with_capacity(total * dim);
    let mut nodes = Vec::with_capacity(total * dim);
    let corners: Vec<&[f64]> = l.corners().collect();
    let offset = match rule {
        EvaluationRule::Midpoint => 0.5,
        EvaluationRule::LeftEndpoint => 0.0,
    };
    for pair in corners.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        for j in 0..n {
            let s_node = j as f64 / n as f64;
            let s_eval = (j as f64 + offset) / n as f64;
            for c in 0..dim {
                let edge = b[c] - a[c];
                nodes.push(a[c] + edge * s_node);
                points.push(a[c] + edge * s_eval);
                increments.push(edge / n as f64);
            }
        }
    }
    DiscretizedPath {
        dim,
        points,
        increments,
        nodes,
    }
}

/// Optional provenance stored alongside a loop.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LoopMetadata {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gate: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f_final: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f_refined: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub steps_per_edge: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rule: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub restarts_used: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub iterations: Option<u64>,
}

impl LoopMetadata {
    fn is_empty(&self) -> bool {
        *self == Self::default()
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct LoopFile {
    format: String,
    system: String,
    basepoint: Vec<f64>,
    vertices: Vec<Vec<f64>>,
    #[serde(default)]
    metadata: LoopMetadata,
}

fn json_number(x: f64) -> String {
    // serde_json prints the shortest representation that parses back to the same f64.
    serde_json::to_string(&x).expect("finite coordinates")
}

fn json_array(xs: &[f64]) -> String {
    let items: Vec<String> = xs.iter().map(|&x| json_number(x)).collect();
    format!("[{}]", items.join(", "))
}

/// Renders the loop file text: one vertex per line, numbers at full precision.
pub fn loop_to_string(l: &PolygonalLoop, meta: &LoopMetadata) -> String {
    let mut s = String::new();
    s.push_str("{\n");
    let _ = writeln!(s, "  \"format\": \"{LOOP_FORMAT_VERSION}\",");
    let _ = writeln!(s, "  \"system\": \"{}\",", l.system.tag());
    let _ = writeln!(s, "  \"basepoint\": {},", json_array(&l.basepoint));
    if l.vertices.is_empty() {
        s.push_str("  \"vertices\": []");
    } else {
        s.push_str("  \"vertices\": [\n");
        let rows: Vec<String> = l
            .vertices
            .iter()
            .map(|v| format!("    {}", json_array(v)))
            .collect();
        s.push_str(&rows.join(",\n"));
        s.push_str("\n  ]");
    }
    if !meta.is_empty() {
        let body = serde_json::to_string_pretty(meta).expect("metadata serializes");
        let body = body.replace('\n', "\n  ");
        let _ = write!(s, ",\n  \"metadata\": {body}");
    }
    s.push_str("\n}\n");
    s
}

/// Parses loop file text, reporting the offending line or field.
pub fn loop_from_str(text: &str) -> Result<(PolygonalLoop, LoopMetadata), FormatError> {
    let file: LoopFile =
        serde_json::from_str(text).map_err(|e| FormatError::Parse(e.to_string()))?;
    if file.format != LOOP_FORMAT_VERSION {
        return Err(FormatError::Version {
            found: file.format,
            expected: LOOP_FORMAT_VERSION,
        });
    }
    let system = System::from_tag(&file.system).ok_or(FormatError::SystemTag(file.system))?;
    let l = make_loop(system, file.basepoint, file.vertices)?;
    Ok((l, file.metadata))
}

/// Writes the loop atomically: a sibling temporary file is renamed into place.
pub fn save_loop(l: &PolygonalLoop, meta: &LoopMetadata, dest: &Path) -> Result<(), FormatError> {
    write_atomic(dest, loop_to_string(l, meta).as_bytes())
}

pub fn load_loop(src: &Path) -> Result<(PolygonalLoop, LoopMetadata), FormatError> {
    let text = fs::read_to_string(src).map_err(|source| FormatError::Io {
        path: src.to_path_buf(),
        source,
    })?;
    loop_from_str(&text)
}

/// Temp-then-rename write shared by every file the crate produces.
pub fn write_atomic(dest: &Path, bytes: &[u8]) -> Result<(), FormatError> {
    let io = |source| FormatError::Io {
        path: dest.to_path_buf(),
        source,
    };
    let name = dest
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| "out".into());
    let tmp = dest.with_file_name(format!(".{name}.tmp{}", std::process::id()));
    {
        let mut f = fs::File::create(&tmp).map_err(io)?;
        f.write_all(bytes).map_err(io)?;
        f.sync_all().map_err(io)?;
    }
    fs::rename(&tmp, dest).map_err(io)
}

/// Tab-separated coordinate trace, one row per sub-segment node, with a header.
pub fn path_to_tsv(system: System, path: &DiscretizedPath) -> String {
    let mut s = system.coordinate_names().join("\t");
    s.push('\n');
    for node in path.nodes() {
        let row: Vec<String> = node.iter().map(|x| format!("{x:.17e}")).collect();
        s.push_str(&row.join("\t"));
        s.push('\n');
    }
    s
}
