//! Deterministic one-dimensional kernels: bisection on monotone functions and
//! grid-plus-golden-section minimization.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Target bracket width for bisection.
    pub root_tol: f64,
    pub max_iter: usize,
    /// Number of grid intervals for the coarse scan of `grid_refine_min`.
    pub grid_n: usize,
    /// Golden-section iterations after the coarse scan.
    pub refine_rounds: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            root_tol: 1e-12,
            max_iter: 200,
            grid_n: 4096,
            refine_rounds: 60,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.root_tol > 0.0) {
            return Err(Error::Config(format!(
                "root_tol must be positive, got {}",
                self.root_tol
            )));
        }
        if self.grid_n < 8 {
            return Err(Error::Config(format!(
                "grid_n must be at least 8, got {}",
                self.grid_n
            )));
        }
        if self.max_iter < 1 {
            return Err(Error::Config("max_iter must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Root {
    pub root: f64,
    /// |f(root)|
    pub residual: f64,
    pub iterations: usize,
}

/// Bisection for a continuous function with a sign change on `[lo, hi]`.
pub fn bisect_root<F>(f: F, lo: f64, hi: f64, cfg: &SolverConfig) -> Result<Root>
where
    F: Fn(f64) -> f64,
{
    cfg.validate()?;
    if !(lo < hi) {
        return Err(Error::Config(format!("empty bracket [{lo}, {hi}]")));
    }
    let (mut a, mut b) = (lo, hi);
    let (fa, fb) = (f(a), f(b));
    if !fa.is_finite() {
        return Err(Error::Numerics { at: a });
    }
    if !fb.is_finite() {
        return Err(Error::Numerics { at: b });
    }
    if fa == 0.0 {
        return Ok(Root {
            root: a,
            residual: 0.0,
            iterations: 0,
        });
    }
    if fb == 0.0 {
        return Ok(Root {
            root: b,
            residual: 0.0,
            iterations: 0,
        });
    }
    if fa.signum() == fb.signum() {
        return Err(Error::Bracket {
            lo,
            hi,
            f_lo: fa,
            f_hi: fb,
        });
    }
    let a_negative = fa < 0.0;
    let mut iterations = 0;
    while b - a > cfg.root_tol {
        if iterations == cfg.max_iter {
            return Err(Error::Convergence {
                iterations,
                width: b - a,
            });
        }
        iterations += 1;
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            // bracket is down to adjacent floats
            break;
        }
        let fm = f(mid);
        if !fm.is_finite() {
            return Err(Error::Numerics { at: mid });
        }
        if fm == 0.0 {
            return Ok(Root {
                root: mid,
                residual: 0.0,
                iterations,
            });
        }
        if (fm < 0.0) == a_negative {
            a = mid;
        } else {
            b = mid;
        }
    }
    let root = 0.5 * (a + b);
    Ok(Root {
        root,
        residual: f(root).abs(),
        iterations,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Minimum {
    pub argmin: f64,
    pub min: f64,
}

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Global minimum of `f` on `[lo, hi]`: a uniform scan of `grid_n + 1` points,
/// then golden-section refinement inside the two cells around the best sample.
///
/// No unimodality is assumed globally; the returned minimum is never above the
/// best grid sample.
pub fn grid_refine_min<F>(f: F, lo: f64, hi: f64, cfg: &SolverConfig) -> Result<Minimum>
where
    F: Fn(f64) -> f64,
{
    cfg.validate()?;
    if !(lo <= hi) {
        return Err(Error::Config(format!("empty interval [{lo}, {hi}]")));
    }
    let eval = |t: f64| -> Result<f64> {
        let v = f(t);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::Numerics { at: t })
        }
    };
    if lo == hi {
        return Ok(Minimum {
            argmin: lo,
            min: eval(lo)?,
        });
    }

    let n = cfg.grid_n;
    let step = (hi - lo) / n as f64;
    let at = |i: usize| if i == n { hi } else { lo + step * i as f64 };
    let mut best = Minimum {
        argmin: lo,
        min: eval(lo)?,
    };
    let mut best_i = 0;
    for i in 1..=n {
        let t = at(i);
        let v = eval(t)?;
        if v < best.min {
            best = Minimum { argmin: t, min: v };
            best_i = i;
        }
    }

    let mut a = at(best_i.saturating_sub(1));
    let mut b = at((best_i + 1).min(n));
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = eval(c)?;
    let mut fd = eval(d)?;
    for _ in 0..cfg.refine_rounds {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = eval(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = eval(d)?;
        }
    }
    for (t, v) in [(c, fc), (d, fd)] {
        if v < best.min {
            best = Minimum { argmin: t, min: v };
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn cfg() -> SolverConfig {
        SolverConfig::default()
    }

    /// Sign change located by a uniform scan with `n` intervals; independent of bisection.
    fn scan_sign_change(f: impl Fn(f64) -> f64, lo: f64, hi: f64, n: usize) -> (f64, f64) {
        let h = (hi - lo) / n as f64;
        let mut prev = f(lo);
        for i in 1..=n {
            let t = lo + h * i as f64;
            let v = f(t);
            if prev.signum() != v.signum() {
                return (t - h, t);
            }
            prev = v;
        }
        panic!("no sign change");
    }

    #[test]
    fn linear_root() {
        let r = bisect_root(|k| k - 1.0, 0.0, 2.0, &cfg()).unwrap();
        assert_eq!(r.root, 1.0);
        assert_eq!(r.residual, 0.0);
    }

    #[test]
    fn cosine_root() {
        let r = bisect_root(f64::cos, 0.0, PI, &cfg()).unwrap();
        assert!((r.root - PI / 2.0).abs() <= 1e-12);
    }

    #[test]
    fn equidistant_type_root_agrees_with_dense_scan() {
        let g = |k: f64| 0.6 * k.cos() - 0.3 * (2.0 - k).cos() - 0.135;
        let (a, b) = scan_sign_change(g, 0.0, 2.0, 1_000_000);
        // frozen from the scan: the sign change sits in [1.035598, 1.035600]
        assert!(a > 1.0355 && b < 1.0357);
        let r = bisect_root(g, 0.0, 2.0, &cfg()).unwrap();
        assert!(
            r.root >= a - 1e-12 && r.root <= b + 1e-12,
            "{} not in [{a}, {b}]",
            r.root
        );
        assert!(r.residual < 1e-11);
        assert!(r.iterations <= 60);
    }

    #[test]
    fn missing_sign_change_is_bracket_error() {
        let err = bisect_root(|k| k * k + 1.0, -1.0, 1.0, &cfg()).unwrap_err();
        assert!(matches!(err, Error::Bracket { .. }));
    }

    #[test]
    fn iteration_cap_is_convergence_error() {
        let tight = SolverConfig {
            max_iter: 5,
            ..cfg()
        };
        let err = bisect_root(|k| k - 0.3, 0.0, 1.0, &tight).unwrap_err();
        assert!(matches!(err, Error::Convergence { iterations: 5, .. }));
    }

    #[test]
    fn invalid_config_rejected() {
        let bad = SolverConfig { grid_n: 4, ..cfg() };
        assert!(matches!(
            grid_refine_min(|k| k, 0.0, 1.0, &bad),
            Err(Error::Config(_))
        ));
        let bad = SolverConfig {
            root_tol: 0.0,
            ..cfg()
        };
        assert!(matches!(
            bisect_root(|k| k, -1.0, 1.0, &bad),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn parabola_minimum() {
        let m = grid_refine_min(|k| (k - 0.25) * (k - 0.25), 0.0, 1.0, &cfg()).unwrap();
        assert!((m.argmin - 0.25).abs() < 1e-10);
    }

    #[test]
    fn monotone_minimum_at_endpoint() {
        let m = grid_refine_min(|k| k, 0.0, 1.0, &cfg()).unwrap();
        assert_eq!(m.argmin, 0.0);
        assert_eq!(m.min, 0.0);
    }

    #[test]
    fn equidistant_point_on_segment() {
        // x = (0,1), y = (1,1), z(k) = (k, 0)
        let f = |k: f64| {
            let dx = k.hypot(1.0);
            let dy = (1.0 - k).hypot(1.0);
            dx.max(dy)
        };
        let m = grid_refine_min(f, 0.0, 1.0, &cfg()).unwrap();
        assert!((m.argmin - 0.5).abs() < 1e-9);
        assert!((m.min - (0.25f64 + 1.0).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn non_finite_objective_is_numerics_error() {
        let err = grid_refine_min(|k| 1.0 / (k - 0.5), 0.0, 1.0, &cfg()).unwrap_err();
        assert!(matches!(err, Error::Numerics { .. }));
    }

    #[test]
    fn multimodal_objective_finds_global_minimum() {
        let f = |k: f64| (8.0 * k).sin() + 0.1 * k;
        let m = grid_refine_min(f, 0.0, 3.0, &cfg()).unwrap();
        let brute = (0..=3_000_000)
            .map(|i| f(3.0 * i as f64 / 3_000_000.0))
            .fold(f64::INFINITY, f64::min);
        assert!(m.min <= brute + 1e-12);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn refinement_never_loses_to_grid(c in -1.0..2.0f64, w in 0.5..20.0f64) {
                let f = |k: f64| (w * (k - c)).cos() + (k - c).abs();
                let m = grid_refine_min(f, 0.0, 1.0, &cfg()).unwrap();
                let grid_best = (0..=4096).map(|i| f(i as f64 / 4096.0)).fold(f64::INFINITY, f64::min);
                prop_assert!(m.min <= grid_best);
                let fine = grid_refine_min(f, 0.0, 1.0, &SolverConfig { grid_n: 8192, ..cfg() }).unwrap();
                prop_assert!(fine.min <= m.min + 1e-12);
            }

            #[test]
            fn bisection_root_inside_scan_bracket(c in 0.05..0.95f64, s in 0.2..5.0f64) {
                let f = |k: f64| (s * (k - c)).tanh();
                let r = bisect_root(f, 0.0, 1.0, &cfg()).unwrap();
                prop_assert!((r.root - c).abs() <= 1e-12);
                prop_assert!(r.residual <= 1e-11);
            }
        }
    }
}
