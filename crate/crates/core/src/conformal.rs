//! Maps between the canonical domains: the Möbius involution swapping the
//! unit ball and the upper half-space, similarities of the half-space,
//! rotations of the ball, and the planar radial stretch.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{Domain, DomainKind, Point};
use crate::metrics::{self, MetricKind};
use crate::par;
use crate::solvers::SolverConfig;
use crate::verify::Violation;

/// Slack added to the right-hand side of every distortion inequality.
pub const DISTORTION_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum MapSpec {
    /// `x -> 2 (x + e_n) / |x + e_n|^2 - e_n`, an involution of R^n exchanging
    /// the unit ball and the upper half-space. `source` picks the direction.
    BallHalfSwap { dim: usize, source: DomainKind },
    /// `x -> scale * x + shift` on the half-space, with `shift_n = 0`.
    HalfSimilarity { scale: f64, shift: Vec<f64> },
    /// An orthogonal matrix acting on the ball, row-major.
    BallRotation { matrix: Vec<Vec<f64>> },
    /// `x -> |x|^(a-1) x` on the unit ball, `0 < a <= 1`.
    RadialStretch { dim: usize, exponent: f64 },
}

impl MapSpec {
    pub fn ball_to_half(dim: usize) -> Self {
        MapSpec::BallHalfSwap {
            dim,
            source: DomainKind::UnitBall,
        }
    }

    pub fn half_to_ball(dim: usize) -> Self {
        MapSpec::BallHalfSwap {
            dim,
            source: DomainKind::HalfSpace,
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            MapSpec::BallHalfSwap { dim, .. } | MapSpec::RadialStretch { dim, .. } => *dim,
            MapSpec::HalfSimilarity { shift, .. } => shift.len(),
            MapSpec::BallRotation { matrix } => matrix.len(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim() < 2 {
            return Err(Error::Config("maps act on R^n with n >= 2".into()));
        }
        match self {
            MapSpec::BallHalfSwap { source, .. } => {
                if !matches!(source, DomainKind::UnitBall | DomainKind::HalfSpace) {
                    return Err(Error::Config(format!(
                        "the swap cannot start from the {}",
                        source.name()
                    )));
                }
            }
            MapSpec::HalfSimilarity { scale, shift } => {
                if !(*scale > 0.0 && scale.is_finite()) {
                    return Err(Error::Config(format!(
                        "similarity scale must be positive, got {scale}"
                    )));
                }
                if shift.last() != Some(&0.0) || shift.iter().any(|v| !v.is_finite()) {
                    return Err(Error::Config(
                        "similarity shift must be finite and horizontal".into(),
                    ));
                }
            }
            MapSpec::BallRotation { matrix } => {
                let n = matrix.len();
                if matrix.iter().any(|row| row.len() != n) {
                    return Err(Error::Config("rotation matrix must be square".into()));
                }
                for i in 0..n {
                    for j in 0..n {
                        let g: f64 = (0..n).map(|k| matrix[k][i] * matrix[k][j]).sum();
                        let target = if i == j { 1.0 } else { 0.0 };
                        if (g - target).abs() > 1e-12 {
                            return Err(Error::Config("rotation matrix is not orthogonal".into()));
                        }
                    }
                }
            }
            MapSpec::RadialStretch { exponent, .. } => {
                if !(*exponent > 0.0 && *exponent <= 1.0) {
                    return Err(Error::Config(format!(
                        "stretch exponent must lie in (0, 1], got {exponent}"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn source(&self) -> Domain {
        let n = self.dim();
        match self {
            MapSpec::BallHalfSwap {
                source: DomainKind::HalfSpace,
                ..
            }
            | MapSpec::HalfSimilarity { .. } => Domain::half_space(n),
            _ => Domain::unit_ball(n),
        }
    }

    pub fn target(&self) -> Domain {
        let n = self.dim();
        match self {
            MapSpec::BallHalfSwap {
                source: DomainKind::UnitBall,
                ..
            }
            | MapSpec::HalfSimilarity { .. } => Domain::half_space(n),
            _ => Domain::unit_ball(n),
        }
    }

    pub fn is_conformal(&self) -> bool {
        !matches!(self, MapSpec::RadialStretch { exponent, .. } if *exponent != 1.0)
    }

    /// Images of points in the source domain.
    pub fn apply(&self, x: &Point) -> Result<Point> {
        self.validate()?;
        let source = self.source();
        source.check_dim(x)?;
        if !source.contains(x)? {
            return Err(source.outside(x));
        }
        let c = x.coords();
        let n = c.len();
        let image = match self {
            MapSpec::BallHalfSwap { .. } => {
                let mut shifted = c.to_vec();
                shifted[n - 1] += 1.0;
                let q: f64 = shifted.iter().map(|v| v * v).sum();
                if q == 0.0 {
                    return Err(Error::Pole { point: c.to_vec() });
                }
                let mut out: Vec<f64> = shifted.iter().map(|v| 2.0 * v / q).collect();
                out[n - 1] -= 1.0;
                out
            }
            MapSpec::HalfSimilarity { scale, shift } => {
                c.iter().zip(shift).map(|(v, s)| scale * v + s).collect()
            }
            MapSpec::BallRotation { matrix } => matrix
                .iter()
                .map(|row| row.iter().zip(c).map(|(a, b)| a * b).sum())
                .collect(),
            MapSpec::RadialStretch { exponent, .. } => {
                let r = x.norm();
                if r == 0.0 {
                    c.to_vec()
                } else {
                    let f = r.powf(exponent - 1.0);
                    c.iter().map(|v| v * f).collect()
                }
            }
        };
        Point::new(image)
    }
}

/// Worst case of a pointwise comparison over a set of pairs.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DistortionSummary {
    pub pairs_checked: usize,
    /// max of lhs - rhs (invariance: max |lhs - rhs|)
    pub max_excess: f64,
    pub worst: Option<(Point, Point)>,
    pub violations: Vec<Violation>,
}

impl DistortionSummary {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

fn summarize<F>(pairs: &[(Point, Point)], tol: f64, eval: F) -> Result<DistortionSummary>
where
    F: Fn(&Point, &Point) -> Result<(f64, f64)> + Sync + Send,
{
    let evals = par::map_slice(pairs, |(x, y)| eval(x, y));
    let mut out = DistortionSummary {
        pairs_checked: 0,
        max_excess: f64::NEG_INFINITY,
        worst: None,
        violations: Vec::new(),
    };
    for ((x, y), e) in pairs.iter().zip(evals) {
        let (lhs, rhs) = e?;
        out.pairs_checked += 1;
        if lhs - rhs > out.max_excess {
            out.max_excess = lhs - rhs;
            out.worst = Some((x.clone(), y.clone()));
        }
        if lhs > rhs + tol {
            out.violations.push(Violation {
                x: x.clone(),
                y: y.clone(),
                z: None,
                lhs,
                rhs,
            });
        }
    }
    Ok(out)
}

/// max |th(rho_G(x,y)/2) - th(rho_f(G)(f x, f y)/2)| over the pairs; a
/// violation is recorded above `1e-10`.
pub fn check_hyperbolic_invariance(
    map: &MapSpec,
    pairs: &[(Point, Point)],
) -> Result<DistortionSummary> {
    if !map.is_conformal() {
        return Err(Error::Config(
            "hyperbolic invariance only holds for conformal maps".into(),
        ));
    }
    let (g, fg) = (map.source(), map.target());
    summarize(pairs, 1e-10, |x, y| {
        let before = metrics::th_rho_half(&g, x, y)?;
        let after = metrics::th_rho_half(&fg, &map.apply(x)?, &map.apply(y)?)?;
        Ok(((after - before).abs(), 0.0))
    })
}

/// Checks `c_f(G)(f x, f y) <= 2 c_G(x, y)` for a conformal map.
pub fn check_conformal_distortion(
    map: &MapSpec,
    pairs: &[(Point, Point)],
    cfg: &SolverConfig,
) -> Result<DistortionSummary> {
    if !map.is_conformal() {
        return Err(Error::Config(
            "the factor-2 distortion bound is for conformal maps".into(),
        ));
    }
    let (g, fg) = (map.source(), map.target());
    summarize(pairs, DISTORTION_TOL, |x, y| {
        let before = metrics::value(MetricKind::CTilde, &g, x, y, cfg)?;
        let after = metrics::value(MetricKind::CTilde, &fg, &map.apply(x)?, &map.apply(y)?, cfg)?;
        Ok((after, 2.0 * before))
    })
}

/// Grötzsch-type constant of the plane.
pub const LAMBDA_2: f64 = 4.0;

/// Checks `c(f x, f y) <= 2 * 4^(1-a) * c(x, y)^a` for the planar radial
/// stretch with exponent `a`, which has inner dilatation `1/a`.
pub fn check_quasiregular(
    exponent: f64,
    pairs: &[(Point, Point)],
    cfg: &SolverConfig,
) -> Result<DistortionSummary> {
    let map = MapSpec::RadialStretch { dim: 2, exponent };
    map.validate()?;
    let disk = Domain::unit_ball(2);
    let alpha = exponent;
    let factor = 2.0 * LAMBDA_2.powf(1.0 - alpha);
    summarize(pairs, DISTORTION_TOL, |x, y| {
        let before = metrics::value(MetricKind::CTilde, &disk, x, y, cfg)?;
        let after = metrics::value(
            MetricKind::CTilde,
            &disk,
            &map.apply(x)?,
            &map.apply(y)?,
            cfg,
        )?;
        Ok((after, factor * before.powf(alpha)))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn p(c: &[f64]) -> Point {
        Point::new(c.to_vec()).unwrap()
    }

    #[test]
    fn swap_fixed_values() {
        let m = MapSpec::ball_to_half(3);
        assert_eq!(m.apply(&Point::origin(3)).unwrap(), Point::unit(3, 2));
        let back = MapSpec::half_to_ball(3);
        let z = back.apply(&Point::unit(3, 2)).unwrap();
        assert!(z.norm() < 1e-15);
    }

    #[test]
    fn swap_is_involution() {
        let there = MapSpec::ball_to_half(2);
        let back = MapSpec::half_to_ball(2);
        for x in [p(&[0.3, -0.2]), p(&[-0.9, 0.1]), p(&[0.0, 0.99])] {
            let y = back.apply(&there.apply(&x).unwrap()).unwrap();
            assert!(x.dist(&y) < 1e-12);
        }
    }

    #[test]
    fn swap_height_formula() {
        let x = p(&[0.2, 0.4, -0.3]);
        let fx = MapSpec::ball_to_half(3).apply(&x).unwrap();
        let mut shifted = x.coords().to_vec();
        shifted[2] += 1.0;
        let q: f64 = shifted.iter().map(|v| v * v).sum();
        assert_abs_diff_eq!(fx.last(), (1.0 - x.norm().powi(2)) / q, epsilon = 1e-15);
    }

    #[test]
    fn radial_stretch() {
        let m = MapSpec::RadialStretch {
            dim: 2,
            exponent: 0.5,
        };
        assert_abs_diff_eq!(
            m.apply(&p(&[0.25, 0.0])).unwrap().coords()[0],
            0.5,
            epsilon = 1e-15
        );
        assert_eq!(m.apply(&Point::origin(2)).unwrap(), Point::origin(2));
        assert!(!m.is_conformal());
    }

    #[test]
    fn source_domain_enforced() {
        let m = MapSpec::ball_to_half(2);
        assert!(matches!(
            m.apply(&p(&[0.0, 2.0])),
            Err(Error::Domain { .. })
        ));
        let bad = MapSpec::HalfSimilarity {
            scale: 2.0,
            shift: vec![1.0, 1.0],
        };
        assert!(bad.apply(&p(&[0.0, 1.0])).is_err());
        let skew = MapSpec::BallRotation {
            matrix: vec![vec![1.0, 0.1], vec![0.0, 1.0]],
        };
        assert!(skew.validate().is_err());
    }

    #[test]
    fn invariance_examples() {
        let pair = vec![(Point::origin(2), p(&[0.5, 0.0]))];
        let s = check_hyperbolic_invariance(&MapSpec::ball_to_half(2), &pair).unwrap();
        assert!(s.passed() && s.max_excess < 1e-12);

        let identity = MapSpec::BallRotation {
            matrix: vec![vec![1.0, 0.0], vec![0.0, 1.0]],
        };
        let s = check_hyperbolic_invariance(&identity, &pair).unwrap();
        assert_eq!(s.max_excess, 0.0);

        let sim = MapSpec::HalfSimilarity {
            scale: 2.0,
            shift: vec![0.0, 0.0],
        };
        let pairs = vec![
            (p(&[0.1, 0.3]), p(&[-1.2, 2.0])),
            (p(&[4.0, 0.01]), p(&[4.5, 0.7])),
        ];
        let s = check_hyperbolic_invariance(&sim, &pairs).unwrap();
        assert!(s.max_excess <= 1e-15);
    }

    #[test]
    fn distortion_examples() {
        let cfg = SolverConfig::default();
        let pairs = vec![
            (p(&[0.1, 0.3]), p(&[-0.5, -0.2])),
            (p(&[0.9, 0.0]), p(&[0.0, 0.9])),
        ];
        assert!(
            check_conformal_distortion(&MapSpec::ball_to_half(2), &pairs, &cfg)
                .unwrap()
                .passed()
        );
        assert!(check_quasiregular(0.5, &pairs, &cfg).unwrap().passed());
        assert!(check_quasiregular(1.5, &pairs, &cfg).is_err());
    }
}
