//! Derivative-free polytope (Nelder-Mead) minimization.

/// Simplex update coefficients.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NmCoefficients {
    pub reflection: f64,
    pub expansion: f64,
    pub contraction: f64,
    pub shrink: f64,
}

impl NmCoefficients {
    /// (1, 2, 0.5, 0.5).
    pub const STANDARD: Self = Self {
        reflection: 1.0,
        expansion: 2.0,
        contraction: 0.5,
        shrink: 0.5,
    };

    /// Dimension-dependent coefficients of Gao and Han (2012); they keep the
    /// simplex from degenerating in high dimension.
    pub fn adaptive(n: usize) -> Self {
        let n = n.max(2) as f64;
        Self {
            reflection: 1.0,
            expansion: 1.0 + 2.0 / n,
            contraction: 0.75 - 1.0 / (2.0 * n),
            shrink: 1.0 - 1.0 / n,
        }
    }
}

impl Default for NmCoefficients {
    fn default() -> Self {
        Self::STANDARD
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NelderMeadConfig {
    pub coefficients: NmCoefficients,
    /// Absolute displacement along each axis for the initial simplex.
    pub initial_step: f64,
    pub max_iterations: u64,
    /// Stop once the best value is at or below this.
    pub target: f64,
    /// Converged once every vertex is within this (max-norm) of the best one
    /// and the value spread is below `spread_tol`.
    pub diameter_tol: f64,
    pub spread_tol: f64,
}

impl Default for NelderMeadConfig {
    fn default() -> Self {
        Self {
            coefficients: NmCoefficients::STANDARD,
            initial_step: 0.1,
            max_iterations: 100_000,
            target: f64::NEG_INFINITY,
            diameter_tol: 1e-12,
            spread_tol: 1e-15,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Termination {
    TargetReached,
    Converged,
    IterationLimit,
}

#[derive(Clone, Debug, PartialEq)]
pub struct NelderMeadResult {
    pub x: Vec<f64>,
    pub f: f64,
    pub iterations: u64,
    pub evaluations: u64,
    pub termination: Termination,
}

struct Simplex {
    points: Vec<Vec<f64>>,
    values: Vec<f64>,
}

impl Simplex {
    /// Stable sort so equal values keep their previous order.
    fn order(&mut self) {
        let mut idx: Vec<usize> = (0..self.values.len()).collect();
        idx.sort_by(|&a, &b| self.values[a].total_cmp(&self.values[b]));
        self.points = idx
            .iter()
            .map(|&i| std::mem::take(&mut self.points[i]))
            .collect();
        self.values = idx.iter().map(|&i| self.values[i]).collect();
    }

    fn diameter(&self) -> f64 {
        let best = &self.points[0];
        self.points[1..]
            .iter()
            .flat_map(|p| p.iter().zip(best).map(|(a, b)| (a - b).abs()))
            .fold(0.0, f64::max)
    }
}

/// Minimizes `f` from `x0`. NaN values are treated as +∞.
pub fn nelder_mead<F>(mut f: F, x0: &[f64], cfg: &NelderMeadConfig) -> NelderMeadResult
where
    F: FnMut(&[f64]) -> f64,
{
    let n = x0.len();
    let mut evaluations = 0u64;
    let mut eval = |x: &[f64]| {
        evaluations += 1;
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };

    let mut points = Vec::with_capacity(n + 1);
    points.push(x0.to_vec());
    for i in 0..n {
        let mut p = x0.to_vec();
        p[i] += cfg.initial_step;
        points.push(p);
    }
    let values: Vec<f64> = points.iter().map(|p| eval(p)).collect();
    let mut s = Simplex { points, values };
    s.order();

    let NmCoefficients {
        reflection,
        expansion,
        contraction,
        shrink,
    } = cfg.coefficients;

    let mut centroid = vec![0.0; n];
    let along = |c: &[f64], worst: &[f64], t: f64| -> Vec<f64> {
        c.iter()
            .zip(worst)
            .map(|(ci, wi)| ci + t * (ci - wi))
            .collect()
    };

    let mut iterations = 0u64;
    let termination = loop {
        if s.values[0] <= cfg.target {
            break Termination::TargetReached;
        }
        if n == 0 || (s.diameter() < cfg.diameter_tol && s.values[n] - s.values[0] < cfg.spread_tol)
        {
            break Termination::Converged;
        }
        if iterations >= cfg.max_iterations {
            break Termination::IterationLimit;
        }
        iterations += 1;

        centroid.fill(0.0);
        for p in &s.points[..n] {
            for (c, x) in centroid.iter_mut().zip(p) {
                *c += x;
            }
        }
        for c in centroid.iter_mut() {
            *c /= n as f64;
        }

        let worst = s.points[n].clone();
        let (f_best, f_second_worst, f_worst) = (s.values[0], s.values[n - 1], s.values[n]);

        let xr = along(&centroid, &worst, reflection);
        let fr = eval(&xr);

        if fr < f_best {
            let xe = along(&centroid, &worst, reflection * expansion);
            let fe = eval(&xe);
            if fe < fr {
                s.points[n] = xe;
                s.values[n] = fe;
            } else {
                s.points[n] = xr;
                s.values[n] = fr;
            }
        } else if fr < f_second_worst {
            s.points[n] = xr;
            s.values[n] = fr;
        } else {
            let (xc, fc, accept) = if fr < f_worst {
                let xc = along(&centroid, &worst, reflection * contraction);
                let fc = eval(&xc);
                (xc, fc, fc <= fr)
            } else {
                let xc = along(&centroid, &worst, -contraction);
                let fc = eval(&xc);
                (xc, fc, fc < f_worst)
            };
            if accept {
                s.points[n] = xc;
                s.values[n] = fc;
            } else {
                let best = s.points[0].clone();
                for i in 1..=n {
                    for (x, b) in s.points[i].iter_mut().zip(&best) {
                        *x = b + shrink * (*x - b);
                    }
                    s.values[i] = eval(&s.points[i]);
                }
            }
        }
        s.order();
    };

    NelderMeadResult {
        x: s.points.swap_remove(0),
        f: s.values[0],
        iterations,
        evaluations,
        termination,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rosenbrock(x: &[f64]) -> f64 {
        (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2)
    }

    #[test]
    fn convex_bowl_12d() {
        let x0: Vec<f64> = (0..12)
            .map(|i| ((i * 7919) % 13) as f64 / 13.0 * 4.0 - 2.0)
            .collect();
        let cfg = NelderMeadConfig {
            max_iterations: 200_000,
            ..Default::default()
        };
        let best = nelder_mead(|x| x.iter().map(|v| v * v).sum(), &x0, &cfg);
        assert!(best.f <= 1e-16, "{best:?}");
    }

    #[test]
    fn rosenbrock_from_standard_start() {
        let r = nelder_mead(rosenbrock, &[-1.2, 1.0], &NelderMeadConfig::default());
        assert!(r.f <= 1e-10, "{r:?}");
        assert!((r.x[0] - 1.0).abs() < 1e-4 && (r.x[1] - 1.0).abs() < 1e-4);
    }

    #[test]
    fn rosenbrock_minimum_confirmed_by_grid() {
        // Dense grid around the reported optimum: nothing on it beats (1, 1).
        let mut best = (f64::INFINITY, 0.0, 0.0);
        for i in -200..=200 {
            for j in -200..=200 {
                let (x, y) = (1.0 + i as f64 * 1e-3, 1.0 + j as f64 * 1e-3);
                let v = rosenbrock(&[x, y]);
                if v < best.0 {
                    best = (v, x, y);
                }
            }
        }
        assert_eq!(best.0, 0.0);
        assert!((best.1 - 1.0).abs() < 1e-12 && (best.2 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn never_worse_than_start() {
        let x0 = [3.0, -2.0, 0.5];
        let f = |x: &[f64]| x[0].sin() + x[1].cos() * x[2] + 0.1 * x[2] * x[2];
        let r = nelder_mead(
            f,
            &x0,
            &NelderMeadConfig {
                max_iterations: 50,
                ..Default::default()
            },
        );
        assert!(r.f <= f(&x0));
        assert_eq!(r.termination, Termination::IterationLimit);
    }

    #[test]
    fn target_stops_early() {
        let cfg = NelderMeadConfig {
            target: 0.5,
            ..Default::default()
        };
        let r = nelder_mead(|x| x[0] * x[0], &[2.0], &cfg);
        assert_eq!(r.termination, Termination::TargetReached);
        assert!(r.f <= 0.5);
    }

    #[test]
    fn adaptive_coefficients() {
        let c = NmCoefficients::adaptive(24);
        assert!((c.expansion - (1.0 + 2.0 / 24.0)).abs() < 1e-15);
        assert!((c.contraction - (0.75 - 1.0 / 48.0)).abs() < 1e-15);
        assert!((c.shrink - (1.0 - 1.0 / 24.0)).abs() < 1e-15);
        let x0 = vec![0.5; 24];
        let cfg = NelderMeadConfig {
            coefficients: c,
            max_iterations: 100_000,
            ..Default::default()
        };
        let r = nelder_mead(|x| x.iter().map(|v| v * v).sum(), &x0, &cfg);
        assert!(r.f < 1e-12, "{}", r.f);
    }

    #[test]
    fn nan_is_treated_as_infinite() {
        let r = nelder_mead(
            |x| {
                if x[0] < 0.0 {
                    f64::NAN
                } else {
                    (x[0] - 1.0).powi(2)
                }
            },
            &[0.5],
            &NelderMeadConfig::default(),
        );
        assert!(r.f < 1e-12);
    }
}
