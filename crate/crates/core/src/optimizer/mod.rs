//! Loop synthesis: minimize `f(γ) = ‖Û − U_γ‖_F` over loops with `k` free
//! vertices, based at the origin, by multi-start Nelder-Mead.

mod nelder_mead;

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

pub use nelder_mead::{
    nelder_mead, NelderMeadConfig, NelderMeadResult, NmCoefficients, Termination,
};

use crate::connection::AnalyticConnection;
use crate::error::OptimError;
use crate::holonomy::{HolonomyConfig, HolonomyWorkspace};
use crate::loops::{EvaluationRule, PolygonalLoop, DEFAULT_STEPS_PER_EDGE};
use crate::matcore::{frob_dist, GateMatrix};
use crate::model::System;

/// Parameter-space dimension at or above which the adaptive coefficients are used by default.
pub const ADAPTIVE_DIMENSION: usize = 20;

/// Factor applied to `steps_per_edge` for the validation value `f_refined`.
pub const REFINEMENT_FACTOR: usize = 4;

/// Largest accepted `|f_final − f_refined|`. Optima that only exist at the
/// working resolution are rejected.
pub const VALIDATION_GAP: f64 = 1e-4;

#[derive(Clone, Debug, PartialEq)]
pub struct SynthesisConfig {
    pub k: usize,
    pub system: System,
    pub steps_per_edge: usize,
    pub rule: EvaluationRule,
    pub target_f: f64,
    pub max_restarts: usize,
    pub max_iterations_per_start: u64,
    pub seed: u64,
    pub init_range: f64,
    /// `None` picks standard coefficients below [`ADAPTIVE_DIMENSION`], adaptive ones above.
    pub nm_coefficients: Option<NmCoefficients>,
    /// Restarts run in batches of this size; synthesis stops after the first batch
    /// that reaches `target_f`. Results do not depend on the thread count.
    pub batch: usize,
    /// Optional starting point for restart 0 instead of a random one.
    pub warm_start: Option<Vec<f64>>,
}

impl SynthesisConfig {
    pub fn new(system: System, k: usize) -> Self {
        let (max_restarts, max_iterations_per_start) = match system {
            System::OneQubit => (100, 20_000),
            System::TwoQubit => (400, 60_000),
        };
        Self {
            k,
            system,
            steps_per_edge: DEFAULT_STEPS_PER_EDGE,
            rule: EvaluationRule::Midpoint,
            target_f: 1e-8,
            max_restarts,
            max_iterations_per_start,
            seed: 0,
            init_range: std::f64::consts::PI,
            nm_coefficients: None,
            batch: 4,
            warm_start: None,
        }
    }

    /// Number of free parameters, `k · coords`.
    pub fn dimension(&self) -> usize {
        self.k * self.system.coords()
    }

    pub fn holonomy_config(&self) -> HolonomyConfig {
        HolonomyConfig {
            steps_per_edge: self.steps_per_edge,
            rule: self.rule,
        }
    }

    pub fn coefficients(&self) -> NmCoefficients {
        self.nm_coefficients.unwrap_or_else(|| {
            let n = self.dimension();
            if n >= ADAPTIVE_DIMENSION {
                NmCoefficients::adaptive(n)
            } else {
                NmCoefficients::STANDARD
            }
        })
    }

    pub fn validate(&self) -> Result<(), OptimError> {
        let bad = |m: &str| Err(OptimError::Config(m.to_string()));
        if self.k == 0 {
            return bad("k must be at least 1");
        }
        if self.target_f.is_nan() || self.target_f <= 0.0 {
            return bad("target_f must be positive");
        }
        if self.steps_per_edge == 0 {
            return bad("steps_per_edge must be positive");
        }
        if self.max_restarts == 0 {
            return bad("max_restarts must be positive");
        }
        if self.batch == 0 {
            return bad("batch must be positive");
        }
        if !(self.init_range.is_finite() && self.init_range > 0.0) {
            return bad("init_range must be positive and finite");
        }
        if let Some(w) = &self.warm_start {
            if w.len() != self.dimension() {
                return Err(OptimError::DimensionMismatch {
                    expected: self.dimension(),
                    found: w.len(),
                });
            }
        }
        Ok(())
    }
}

/// Reusable objective evaluator; one per thread.
pub struct Objective<'a> {
    target: &'a GateMatrix,
    system: System,
    cfg: HolonomyConfig,
    field: AnalyticConnection,
    ws: HolonomyWorkspace,
}

impl<'a> Objective<'a> {
    pub fn new(
        target: &'a GateMatrix,
        system: System,
        cfg: HolonomyConfig,
    ) -> Result<Self, OptimError> {
        if target.dim() != system.gate_dim() {
            return Err(OptimError::DimensionMismatch {
                expected: system.gate_dim(),
                found: target.dim(),
            });
        }
        Ok(Self {
            target,
            system,
            cfg,
            field: AnalyticConnection::new(system),
            ws: HolonomyWorkspace::new(system.gate_dim()),
        })
    }

    pub fn eval_loop(&mut self, l: &PolygonalLoop) -> Result<f64, OptimError> {
        let u = self.ws.evaluate(l, &self.field, self.cfg)?;
        Ok(frob_dist(self.target.matrix(), u.matrix())?)
    }

    pub fn eval(&mut self, x: &[f64]) -> Result<f64, OptimError> {
        let n = self.system.coords();
        if x.is_empty() || !x.len().is_multiple_of(n) {
            return Err(OptimError::DimensionMismatch {
                expected: n * x.len().div_ceil(n).max(1),
                found: x.len(),
            });
        }
        let l = PolygonalLoop::from_flat(self.system, x)?;
        self.eval_loop(&l)
    }
}

/// `‖target − U_γ‖_F` for the loop whose flattened vertices are `x`.
pub fn objective(x: &[f64], target: &GateMatrix, cfg: &SynthesisConfig) -> Result<f64, OptimError> {
    if x.len() != cfg.dimension() {
        return Err(OptimError::DimensionMismatch {
            expected: cfg.dimension(),
            found: x.len(),
        });
    }
    Objective::new(target, cfg.system, cfg.holonomy_config())?.eval(x)
}

/// Outcome of one seeded start.
#[derive(Clone, Debug, PartialEq)]
pub struct RestartOutcome {
    pub index: usize,
    pub x: Vec<f64>,
    pub f: f64,
    pub iterations: u64,
    pub evaluations: u64,
    /// Objective at the refined resolution; computed only when `f` reaches the target.
    pub f_refined: Option<f64>,
}

impl RestartOutcome {
    /// Reached the target and survived refinement.
    pub fn accepted(&self, target_f: f64) -> bool {
        self.f <= target_f
            && self
                .f_refined
                .is_some_and(|r| (r - self.f).abs() <= VALIDATION_GAP)
    }
}

#[derive(Clone, Debug)]
pub struct SynthesisResult {
    pub best_loop: PolygonalLoop,
    pub f_final: f64,
    /// Objective of the same loop at `REFINEMENT_FACTOR` times the resolution.
    pub f_refined: f64,
    /// `f_final ≤ target_f` and `|f_final − f_refined| ≤ VALIDATION_GAP`.
    pub converged: bool,
    pub restarts_used: usize,
    pub best_restart: usize,
    /// Best value reached by each restart, in index order.
    pub restart_f: Vec<f64>,
    /// Nelder-Mead iterations summed over all restarts.
    pub iterations: u64,
    pub evaluations: u64,
    pub seed: u64,
    pub wall_time: Duration,
}

impl SynthesisResult {
    /// Running minimum of `restart_f`.
    pub fn best_so_far(&self) -> Vec<f64> {
        self.restart_f
            .iter()
            .scan(f64::INFINITY, |m, &f| {
                *m = m.min(f);
                Some(*m)
            })
            .collect()
    }
}

/// Initial point of restart `index`: uniform in `[−init_range, init_range]` per coordinate.
pub fn initial_point(cfg: &SynthesisConfig, index: usize) -> Vec<f64> {
    if index == 0 {
        if let Some(w) = &cfg.warm_start {
            return w.clone();
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(index as u64);
    let r = cfg.init_range;
    (0..cfg.dimension())
        .map(|_| rng.random_range(-r..=r))
        .collect()
}

/// Runs one start. The simplex is rebuilt around the best point as long as
/// successive runs keep improving by at least a tenth of a percent.
pub fn run_restart(
    target: &GateMatrix,
    cfg: &SynthesisConfig,
    index: usize,
) -> Result<RestartOutcome, OptimError> {
    let mut obj = Objective::new(target, cfg.system, cfg.holonomy_config())?;
    let mut x = initial_point(cfg, index);
    let mut f = f64::INFINITY;
    let mut iterations = 0u64;
    let mut evaluations = 0u64;
    let mut nm = NelderMeadConfig {
        coefficients: cfg.coefficients(),
        target: cfg.target_f,
        ..NelderMeadConfig::default()
    };
    while iterations < cfg.max_iterations_per_start {
        nm.max_iterations = cfg.max_iterations_per_start - iterations;
        let r = nelder_mead(|v| obj.eval(v).unwrap_or(f64::INFINITY), &x, &nm);
        iterations += r.iterations;
        evaluations += r.evaluations;
        let improved = r.f < f * (1.0 - 1e-3);
        if r.f <= f {
            x = r.x;
            f = r.f;
        }
        if f <= cfg.target_f || !improved || r.termination == Termination::IterationLimit {
            break;
        }
    }
    let f_refined = if f <= cfg.target_f {
        let l = PolygonalLoop::from_flat(cfg.system, &x)?;
        Some(
            Objective::new(
                target,
                cfg.system,
                cfg.holonomy_config().refined(REFINEMENT_FACTOR),
            )?
            .eval_loop(&l)?,
        )
    } else {
        None
    };
    Ok(RestartOutcome {
        index,
        x,
        f,
        iterations,
        evaluations,
        f_refined,
    })
}

/// Multi-start synthesis of a loop with holonomy `target`.
///
/// Restarts run until one reaches `target_f` and passes the refinement check
/// or the budget is spent. Non-convergence is not an error: check `converged`.
pub fn synthesize(
    target: &GateMatrix,
    cfg: &SynthesisConfig,
) -> Result<SynthesisResult, OptimError> {
    cfg.validate()?;
    if target.dim() != cfg.system.gate_dim() {
        return Err(OptimError::DimensionMismatch {
            expected: cfg.system.gate_dim(),
            found: target.dim(),
        });
    }
    let started = Instant::now();
    let mut outcomes: Vec<RestartOutcome> = Vec::new();
    let mut next = 0;
    while next < cfg.max_restarts {
        let end = (next + cfg.batch).min(cfg.max_restarts);
        let batch: Vec<RestartOutcome> = (next..end)
            .into_par_iter()
            .map(|i| run_restart(target, cfg, i))
            .collect::<Result<_, _>>()?;
        let hit = batch.iter().any(|o| o.accepted(cfg.target_f));
        outcomes.extend(batch);
        next = end;
        if hit {
            break;
        }
    }

    // Accepted restarts first, then smallest f, then lowest index.
    let best = outcomes
        .iter()
        .min_by(|a, b| {
            b.accepted(cfg.target_f)
                .cmp(&a.accepted(cfg.target_f))
                .then(a.f.total_cmp(&b.f))
                .then(a.index.cmp(&b.index))
        })
        .expect("at least one restart");
    let best_loop = PolygonalLoop::from_flat(cfg.system, &best.x)?;
    let f_final =
        Objective::new(target, cfg.system, cfg.holonomy_config())?.eval_loop(&best_loop)?;
    let f_refined = Objective::new(
        target,
        cfg.system,
        cfg.holonomy_config().refined(REFINEMENT_FACTOR),
    )?
    .eval_loop(&best_loop)?;

    Ok(SynthesisResult {
        best_loop,
        f_final,
        f_refined,
        converged: f_final <= cfg.target_f && (f_final - f_refined).abs() <= VALIDATION_GAP,
        restarts_used: outcomes.len(),
        best_restart: best.index,
        restart_f: outcomes.iter().map(|o| o.f).collect(),
        iterations: outcomes.iter().map(|o| o.iterations).sum(),
        evaluations: outcomes.iter().map(|o| o.evaluations).sum(),
        seed: cfg.seed,
        wall_time: started.elapsed(),
    })
}

/// Objective values on the plane `origin + s·axis1 + t·axis2`.
#[derive(Clone, Debug, PartialEq)]
pub struct LandscapeSection {
    pub s: Vec<f64>,
    pub t: Vec<f64>,
    /// `values[i][j]` is the objective at `(s[i], t[j])`.
    pub values: Vec<Vec<f64>>,
}

impl LandscapeSection {
    /// Tab-separated `s t f`, one grid point per row.
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("s\tt\tf\n");
        for (i, s) in self.s.iter().enumerate() {
            for (j, t) in self.t.iter().enumerate() {
                out.push_str(&format!("{s:.17e}\t{t:.17e}\t{:.17e}\n", self.values[i][j]));
            }
        }
        out
    }
}

fn linspace(range: (f64, f64), n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| range.0 + (range.1 - range.0) * (i as f64 / (n - 1) as f64))
        .collect()
}

/// Tabulates the objective over a `grid × grid` lattice of a 2-D affine section.
#[allow(clippy::too_many_arguments)]
pub fn landscape_section(
    target: &GateMatrix,
    cfg: &SynthesisConfig,
    origin: &[f64],
    axis1: &[f64],
    axis2: &[f64],
    range1: (f64, f64),
    range2: (f64, f64),
    grid: usize,
) -> Result<LandscapeSection, OptimError> {
    let dim = cfg.dimension();
    for v in [origin, axis1, axis2] {
        if v.len() != dim {
            return Err(OptimError::DimensionMismatch {
                expected: dim,
                found: v.len(),
            });
        }
    }
    if grid < 2 {
        return Err(OptimError::Config("grid must be at least 2".into()));
    }
    let s = linspace(range1, grid);
    let t = linspace(range2, grid);
    let mut obj = Objective::new(target, cfg.system, cfg.holonomy_config())?;
    let mut x = vec![0.0; dim];
    let mut values = Vec::with_capacity(grid);
    for &si in &s {
        let mut row = Vec::with_capacity(grid);
        for &tj in &t {
            for (d, xd) in x.iter_mut().enumerate() {
                *xd = origin[d] + si * axis1[d] + tj * axis2[d];
            }
            row.push(obj.eval(&x)?);
        }
        values.push(row);
    }
    Ok(LandscapeSection { s, t, values })
}

/// Unit direction from `seed`, orthogonal to `avoid` unless that is zero,
/// scaled to the length of `avoid` (or 1).
pub fn random_direction(dim: usize, seed: u64, avoid: &[f64]) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let a_norm = norm(avoid);
    loop {
        let mut v: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..=1.0)).collect();
        if a_norm > 0.0 {
            let proj = v.iter().zip(avoid).map(|(x, y)| x * y).sum::<f64>() / (a_norm * a_norm);
            for (x, y) in v.iter_mut().zip(avoid) {
                *x -= proj * y;
            }
        }
        let n = norm(&v);
        if n > 1e-8 {
            let scale = if a_norm > 0.0 { a_norm } else { 1.0 } / n;
            return v.into_iter().map(|x| x * scale).collect();
        }
    }
}

/// Section through two minima: `s ∈ [−0.5, 1.5]` interpolates from `min1`
/// (s = 0) to `min2` (s = 1); `t ∈ [−0.5, 0.5]` follows a seeded random
/// direction. `grid ≡ 1 (mod 4)` puts both minima on lattice points.
pub fn landscape_between_minima(
    target: &GateMatrix,
    cfg: &SynthesisConfig,
    min1: &[f64],
    min2: &[f64],
    grid: usize,
    seed: u64,
) -> Result<LandscapeSection, OptimError> {
    if grid < 5 || grid % 4 != 1 {
        return Err(OptimError::Config(format!(
            "grid must be 1 more than a multiple of 4 (got {grid})"
        )));
    }
    if min1.len() != min2.len() {
        return Err(OptimError::DimensionMismatch {
            expected: min1.len(),
            found: min2.len(),
        });
    }
    let axis1: Vec<f64> = min2.iter().zip(min1).map(|(b, a)| b - a).collect();
    let axis2 = random_direction(axis1.len(), seed, &axis1);
    landscape_section(
        target,
        cfg,
        min1,
        &axis1,
        &axis2,
        (-0.5, 1.5),
        (-0.5, 0.5),
        grid,
    )
}
