//! Closed-form evaluators for the c-tilde metric and its comparison metrics
//! (triangular ratio s, distance ratio j and j*, hyperbolic rho) in the
//! half-space, the unit ball and the punctured space.
//!
//! Every two-point evaluator orders its arguments lexicographically before
//! doing any arithmetic, so `m(x, y)` and `m(y, x)` are bit-identical.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{self, angle_at_origin, Domain, DomainKind, Point};
use crate::solvers::{bisect_root, grid_refine_min, SolverConfig};

/// Angles below this are treated as "same ray" in the unit ball.
pub const SAME_RAY_ANGLE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MetricKind {
    CTilde,
    S,
    J,
    JStar,
    /// th(rho/2), the hyperbolic metric on the [0, 1) scale.
    ThRhoHalf,
    Rho,
}

impl MetricKind {
    pub const ALL: [MetricKind; 6] = [
        MetricKind::CTilde,
        MetricKind::S,
        MetricKind::J,
        MetricKind::JStar,
        MetricKind::ThRhoHalf,
        MetricKind::Rho,
    ];

    /// Whether a closed-form (or reduced numeric) evaluator exists for this domain.
    pub fn supports(self, kind: DomainKind) -> bool {
        match kind {
            DomainKind::DiscretizedBoundary => false,
            DomainKind::PuncturedSpace => !matches!(self, MetricKind::ThRhoHalf | MetricKind::Rho),
            DomainKind::HalfSpace | DomainKind::UnitBall => true,
        }
    }

    /// Closed upper end of the metric's range, or infinity when unbounded.
    pub fn upper_bound(self) -> f64 {
        match self {
            MetricKind::CTilde => 2.0,
            MetricKind::S | MetricKind::JStar | MetricKind::ThRhoHalf => 1.0,
            MetricKind::J | MetricKind::Rho => f64::INFINITY,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            MetricKind::CTilde => "ctilde",
            MetricKind::S => "s",
            MetricKind::J => "j",
            MetricKind::JStar => "jstar",
            MetricKind::ThRhoHalf => "thrho",
            MetricKind::Rho => "rho",
        }
    }
}

impl fmt::Display for MetricKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Which case of a piecewise formula produced a value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BranchTag {
    /// Half-space: the infimum sits at the foot of the higher point.
    ProjectionFoot,
    /// Half-space: the infimum sits at the equidistant point of `[x', y']`.
    EquidistantSegment,
    /// Unit ball: the infimum is `1 - min{|x|, |y|}`.
    SameRay,
    /// Unit ball: one of the points is the origin.
    CenterPoint,
    /// Unit ball: the infimum sits at the equidistant point of the arc.
    EquidistantArc,
    PuncturedDirect,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub value: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub branch: Option<BranchTag>,
    /// Boundary point realizing the infimum, when one exists.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub minimizer: Option<Point>,
    /// Position of the minimizer on its segment (fraction) or arc (angle from
    /// the lexicographically smaller point).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub parameter: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub residual: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub iterations: Option<usize>,
}

impl EvalReport {
    fn plain(value: f64) -> Self {
        Self {
            value,
            branch: None,
            minimizer: None,
            parameter: None,
            residual: None,
            iterations: None,
        }
    }

    fn branch(value: f64, branch: BranchTag) -> Self {
        Self {
            branch: Some(branch),
            ..Self::plain(value)
        }
    }
}

fn ordered<'a>(x: &'a Point, y: &'a Point) -> (&'a Point, &'a Point) {
    if x.lex_cmp(y).is_le() {
        (x, y)
    } else {
        (y, x)
    }
}

fn interior_pair(domain: &Domain, x: &Point, y: &Point) -> Result<()> {
    domain.require_interior(x)?;
    domain.require_interior(y)
}

fn canonical_only(domain: &Domain) -> Result<()> {
    if domain.kind() == DomainKind::DiscretizedBoundary {
        return Err(Error::Config(
            "discretized boundaries have no closed forms; use oracle::discretized_eval".into(),
        ));
    }
    Ok(())
}

/// c-tilde in the upper half-space.
pub fn ctilde_halfspace(x: &Point, y: &Point) -> Result<EvalReport> {
    let h = Domain::half_space(x.dim());
    interior_pair(&h, x, y)?;
    let (x, y) = ordered(x, y);
    if x == y {
        return Ok(EvalReport::plain(0.0));
    }
    let (xn, yn) = (x.last(), y.last());
    let d2 = dist2(x, y);
    let d = d2.sqrt();
    let horizontal2 = dist2(&x.foot(), &y.foot());
    let threshold2 = (xn - yn) * (xn - yn) + (xn * xn - yn * yn).abs();
    if d2 <= threshold2 {
        let (higher, t) = if xn >= yn { (x, 0.0) } else { (y, 1.0) };
        return Ok(EvalReport {
            minimizer: Some(higher.foot()),
            parameter: (horizontal2 > 0.0).then_some(t),
            ..EvalReport::branch(d / xn.max(yn), BranchTag::ProjectionFoot)
        });
    }
    // |x - y|^2 - (x_n - y_n)^2 is the squared horizontal distance.
    let value = 2.0 * (horizontal2 / (d2 + 4.0 * xn * yn)).sqrt();
    let k = (horizontal2 - xn * xn + yn * yn) / (2.0 * horizontal2);
    Ok(EvalReport {
        minimizer: Some(x.foot().lerp(&y.foot(), k)),
        parameter: Some(k),
        ..EvalReport::branch(value, BranchTag::EquidistantSegment)
    })
}

/// Orthonormal pair (e, f) spanning the plane of `x` and `y` with `e = x/|x|`
/// and `y` in the closed upper half-plane. Requires a positive angle.
pub(crate) fn arc_frame(x: &Point, y: &Point) -> (Vec<f64>, Vec<f64>) {
    let nx = x.norm();
    let e: Vec<f64> = x.coords().iter().map(|c| c / nx).collect();
    let along = geom::dot(y.coords(), &e);
    let mut f: Vec<f64> = y
        .coords()
        .iter()
        .zip(&e)
        .map(|(c, ei)| c - along * ei)
        .collect();
    let mut nf = geom::norm(&f);
    if nf <= 1e-12 * y.norm() {
        // antipodal rays: every great circle through e is a minimizing arc,
        // take the one through the coordinate axis least aligned with e
        let i = (0..e.len())
            .min_by(|&a, &b| e[a].abs().total_cmp(&e[b].abs()))
            .expect("points have at least two coordinates");
        f = e.iter().map(|ej| -e[i] * ej).collect();
        f[i] += 1.0;
        nf = geom::norm(&f);
    }
    f.iter_mut().for_each(|c| *c /= nf);
    (e, f)
}

fn arc_point(e: &[f64], f: &[f64], k: f64) -> Point {
    let (s, c) = k.sin_cos();
    Point::from_vec(e.iter().zip(f).map(|(a, b)| c * a + s * b).collect())
}

/// c-tilde in the unit ball.
pub fn ctilde_ball(x: &Point, y: &Point, cfg: &SolverConfig) -> Result<EvalReport> {
    let b = Domain::unit_ball(x.dim());
    interior_pair(&b, x, y)?;
    let (x, y) = ordered(x, y);
    if x == y {
        return Ok(EvalReport::plain(0.0));
    }
    let d = x.dist(y);
    let (nx, ny) = (x.norm(), y.norm());
    let (lo, hi) = (nx.min(ny), nx.max(ny));
    if lo == 0.0 {
        let outer = if nx == 0.0 { y } else { x };
        return Ok(EvalReport {
            minimizer: Some(outer.scaled(1.0 / hi)),
            ..EvalReport::branch(d, BranchTag::CenterPoint)
        });
    }
    let mu = angle_at_origin(x, y)?;
    let inner = if nx <= ny { x } else { y };
    let same_ray = || EvalReport {
        minimizer: Some(inner.scaled(1.0 / lo)),
        ..EvalReport::branch(d / (1.0 - lo), BranchTag::SameRay)
    };
    if mu < SAME_RAY_ANGLE {
        return Ok(same_ray());
    }
    let cos_mu = mu.cos();
    if cos_mu >= ((nx * nx - ny * ny).abs() + 2.0 * lo) / (2.0 * hi) {
        return Ok(same_ray());
    }

    // Equidistant point on the arc from x/|x| to y/|y|: g decreases on [0, mu].
    let half_gap = 0.5 * (nx * nx - ny * ny);
    let g = |k: f64| nx * k.cos() - ny * (mu - k).cos() - half_gap;
    let (g0, gmu) = (g(0.0), g(mu));
    let (k, residual, iterations) = if g0 <= 0.0 {
        // only reachable through rounding at the branch boundary
        (0.0, g0.abs(), 0)
    } else if gmu >= 0.0 {
        (mu, gmu.abs(), 0)
    } else {
        let r = bisect_root(g, 0.0, mu, cfg)?;
        (r.root, r.residual, r.iterations)
    };
    let denom = (1.0 + nx * nx - 2.0 * nx * k.cos()).sqrt();
    let (e, f) = arc_frame(x, y);
    Ok(EvalReport {
        minimizer: Some(arc_point(&e, &f, k)),
        parameter: Some(k),
        residual: Some(residual),
        iterations: Some(iterations),
        ..EvalReport::branch(d / denom, BranchTag::EquidistantArc)
    })
}

/// c-tilde in R^n minus the origin.
pub fn ctilde_punctured(x: &Point, y: &Point) -> Result<EvalReport> {
    let p = Domain::punctured(x.dim());
    interior_pair(&p, x, y)?;
    let (x, y) = ordered(x, y);
    if x == y {
        return Ok(EvalReport::plain(0.0));
    }
    let value = x.dist(y) / x.norm().max(y.norm());
    Ok(EvalReport {
        minimizer: Some(Point::origin(x.dim())),
        ..EvalReport::branch(value, BranchTag::PuncturedDirect)
    })
}

/// c-tilde in any canonical domain.
pub fn ctilde(domain: &Domain, x: &Point, y: &Point, cfg: &SolverConfig) -> Result<EvalReport> {
    canonical_only(domain)?;
    domain.check_dim(x)?;
    domain.check_dim(y)?;
    match domain.kind() {
        DomainKind::HalfSpace => ctilde_halfspace(x, y),
        DomainKind::UnitBall => ctilde_ball(x, y, cfg),
        DomainKind::PuncturedSpace => ctilde_punctured(x, y),
        DomainKind::DiscretizedBoundary => unreachable!(),
    }
}

fn dist2(x: &Point, y: &Point) -> f64 {
    x.coords()
        .iter()
        .zip(y.coords())
        .map(|(a, b)| (a - b) * (a - b))
        .sum()
}

/// th(rho/2) in the half-space or the unit ball.
pub fn th_rho_half(domain: &Domain, x: &Point, y: &Point) -> Result<f64> {
    domain.check_dim(x)?;
    domain.check_dim(y)?;
    interior_pair(domain, x, y)?;
    let (x, y) = ordered(x, y);
    let d2 = dist2(x, y);
    let weight = match domain.kind() {
        DomainKind::HalfSpace => 4.0 * x.last() * y.last(),
        DomainKind::UnitBall => {
            let (nx, ny) = (x.norm(), y.norm());
            (1.0 - nx) * (1.0 + nx) * ((1.0 - ny) * (1.0 + ny))
        }
        _ => {
            return Err(Error::Config(format!(
                "the hyperbolic metric is only available in the half-space and the unit ball, not the {}",
                domain.kind().name()
            )))
        }
    };
    if d2 == 0.0 {
        return Ok(0.0);
    }
    Ok(d2.sqrt() / (d2 + weight).sqrt())
}

/// The hyperbolic distance rho in the half-space or the unit ball.
pub fn rho(domain: &Domain, x: &Point, y: &Point) -> Result<f64> {
    Ok(2.0 * th_rho_half(domain, x, y)?.atanh())
}

fn min_boundary_distance(domain: &Domain, x: &Point, y: &Point) -> Result<(f64, f64)> {
    canonical_only(domain)?;
    domain.check_dim(x)?;
    domain.check_dim(y)?;
    interior_pair(domain, x, y)?;
    let (x, y) = ordered(x, y);
    let m = domain
        .boundary_distance_unchecked(x)
        .min(domain.boundary_distance_unchecked(y));
    Ok((x.dist(y), m))
}

/// The distance ratio metric j.
pub fn j_metric(domain: &Domain, x: &Point, y: &Point) -> Result<f64> {
    let (d, m) = min_boundary_distance(domain, x, y)?;
    Ok((d / m).ln_1p())
}

/// The j* metric, th(j/2).
pub fn jstar(domain: &Domain, x: &Point, y: &Point) -> Result<f64> {
    let (d, m) = min_boundary_distance(domain, x, y)?;
    if d == 0.0 {
        return Ok(0.0);
    }
    Ok(d / (d + 2.0 * m))
}

/// The triangular ratio metric. Closed form in the half-space and the punctured
/// space; in the unit ball the boundary infimum is minimized numerically over
/// the arc between `x/|x|` and `y/|y|`.
pub fn s_metric(domain: &Domain, x: &Point, y: &Point, cfg: &SolverConfig) -> Result<EvalReport> {
    canonical_only(domain)?;
    domain.check_dim(x)?;
    domain.check_dim(y)?;
    interior_pair(domain, x, y)?;
    let (x, y) = ordered(x, y);
    if x == y {
        return Ok(EvalReport::plain(0.0));
    }
    let d = x.dist(y);
    match domain.kind() {
        DomainKind::HalfSpace => {
            let value = th_rho_half(domain, x, y)?;
            // The optimal boundary point is where [x, y*] meets the hyperplane,
            // y* being the reflection of y.
            let t = x.last() / (x.last() + y.last());
            Ok(EvalReport {
                minimizer: Some(x.foot().lerp(&y.foot(), t)),
                parameter: Some(t),
                ..EvalReport::plain(value)
            })
        }
        DomainKind::PuncturedSpace => Ok(EvalReport {
            minimizer: Some(Point::origin(x.dim())),
            ..EvalReport::plain(d / (x.norm() + y.norm()))
        }),
        DomainKind::UnitBall => s_ball(x, y, d, cfg),
        DomainKind::DiscretizedBoundary => unreachable!(),
    }
}

fn s_ball(x: &Point, y: &Point, d: f64, cfg: &SolverConfig) -> Result<EvalReport> {
    let (nx, ny) = (x.norm(), y.norm());
    let ray_point = |p: &Point, np: f64| EvalReport {
        minimizer: Some(p.scaled(1.0 / np)),
        ..EvalReport::plain(d / ((1.0 - nx) + (1.0 - ny)).max(f64::MIN_POSITIVE))
    };
    if nx == 0.0 || ny == 0.0 {
        let (outer, n_outer) = if nx == 0.0 { (y, ny) } else { (x, nx) };
        // |x - z| = 1 for the origin, |y - z| = 1 - |y| at z = y/|y|
        return Ok(EvalReport {
            value: d / (2.0 - n_outer),
            ..ray_point(outer, n_outer)
        });
    }
    let mu = angle_at_origin(x, y)?;
    if mu < SAME_RAY_ANGLE {
        return Ok(ray_point(y, ny));
    }
    let objective = |k: f64| {
        (1.0 + nx * nx - 2.0 * nx * k.cos()).sqrt()
            + (1.0 + ny * ny - 2.0 * ny * (mu - k).cos()).sqrt()
    };
    let m = grid_refine_min(objective, 0.0, mu, cfg)?;
    let (e, f) = arc_frame(x, y);
    Ok(EvalReport {
        minimizer: Some(arc_point(&e, &f, m.argmin)),
        parameter: Some(m.argmin),
        ..EvalReport::plain(d / m.min)
    })
}

/// Evaluates any supported metric, returning a report.
pub fn evaluate(
    kind: MetricKind,
    domain: &Domain,
    x: &Point,
    y: &Point,
    cfg: &SolverConfig,
) -> Result<EvalReport> {
    if !kind.supports(domain.kind()) {
        return Err(Error::Config(format!(
            "metric {kind} is not available in the {}",
            domain.kind().name()
        )));
    }
    match kind {
        MetricKind::CTilde => ctilde(domain, x, y, cfg),
        MetricKind::S => s_metric(domain, x, y, cfg),
        MetricKind::J => j_metric(domain, x, y).map(EvalReport::plain),
        MetricKind::JStar => jstar(domain, x, y).map(EvalReport::plain),
        MetricKind::ThRhoHalf => th_rho_half(domain, x, y).map(EvalReport::plain),
        MetricKind::Rho => rho(domain, x, y).map(EvalReport::plain),
    }
}

/// Value-only shorthand for [`evaluate`].
pub fn value(
    kind: MetricKind,
    domain: &Domain,
    x: &Point,
    y: &Point,
    cfg: &SolverConfig,
) -> Result<f64> {
    evaluate(kind, domain, x, y, cfg).map(|r| r.value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{E, FRAC_PI_4};

    fn p(c: &[f64]) -> Point {
        Point::new(c.to_vec()).unwrap()
    }

    fn cfg() -> SolverConfig {
        SolverConfig::default()
    }

    #[test]
    fn antipodal_rays_in_ball() {
        use crate::oracle::{ctilde_oracle_naive2d, ctilde_oracle_reduced, s_oracle, OracleConfig};
        let o = OracleConfig::default();
        for (x, y) in [
            (p(&[-0.6, 0.0]), p(&[0.7, 0.0])),
            (p(&[0.0, 0.0, 0.5]), p(&[0.0, 0.0, -0.2])),
        ] {
            let b = Domain::unit_ball(x.dim());
            let c = ctilde(&b, &x, &y, &cfg()).unwrap().value;
            assert!((c - ctilde_oracle_reduced(&b, &x, &y, &o).unwrap()).abs() < 1e-8);
            if x.dim() == 2 {
                assert!((c - ctilde_oracle_naive2d(&b, &x, &y, &o).unwrap()).abs() < 1e-8);
            }
            let sv = s_metric(&b, &x, &y, &cfg()).unwrap().value;
            assert!((sv - s_oracle(&b, &x, &y, &o).unwrap()).abs() < 1e-8);
        }
    }

    /// Dense scan of max{|x-z|, |y-z|} over z = (t, 0), independent of the closed form.
    fn halfspace_scan_2d(x: &Point, y: &Point) -> f64 {
        let n = 2_000_000;
        let (a, b) = (
            x.coords()[0].min(y.coords()[0]) - 1.0,
            x.coords()[0].max(y.coords()[0]) + 1.0,
        );
        let d = x.dist(y);
        let inf = (0..=n)
            .map(|i| p(&[a + (b - a) * i as f64 / n as f64, 0.0]))
            .map(|z| x.dist(&z).max(y.dist(&z)))
            .fold(f64::INFINITY, f64::min);
        d / inf
    }

    /// Dense scan over the whole unit circle.
    fn circle_scan(x: &Point, y: &Point, sum: bool) -> f64 {
        let n = 2_000_000;
        let inf = (0..n)
            .map(|i| {
                let t = std::f64::consts::TAU * i as f64 / n as f64;
                p(&[t.cos(), t.sin()])
            })
            .map(|z| {
                if sum {
                    x.dist(&z) + y.dist(&z)
                } else {
                    x.dist(&z).max(y.dist(&z))
                }
            })
            .fold(f64::INFINITY, f64::min);
        x.dist(y) / inf
    }

    #[test]
    fn halfspace_vertical_pair() {
        let r = ctilde_halfspace(&p(&[0.0, 1.0]), &p(&[0.0, 0.5])).unwrap();
        assert_abs_diff_eq!(r.value, 0.5, epsilon = 1e-15);
        assert_eq!(r.branch, Some(BranchTag::ProjectionFoot));
        assert_eq!(r.minimizer, Some(p(&[0.0, 0.0])));
    }

    #[test]
    fn halfspace_equal_height_pair() {
        let (x, y) = (p(&[0.0, 1.0]), p(&[1.0, 1.0]));
        let r = ctilde_halfspace(&x, &y).unwrap();
        assert_abs_diff_eq!(r.value, 2.0 / 5f64.sqrt(), epsilon = 1e-15);
        assert_eq!(r.branch, Some(BranchTag::EquidistantSegment));
        assert_eq!(r.minimizer, Some(p(&[0.5, 0.0])));
        assert!((halfspace_scan_2d(&x, &y) - r.value).abs() < 1e-9);
    }

    #[test]
    fn halfspace_unequal_heights() {
        let (x, y) = (p(&[0.0, 2.0]), p(&[3.0, 1.0]));
        let r = ctilde_halfspace(&x, &y).unwrap();
        assert_abs_diff_eq!(r.value, 2f64.sqrt(), epsilon = 1e-14);
        assert_eq!(r.branch, Some(BranchTag::EquidistantSegment));
        assert_abs_diff_eq!(r.parameter.unwrap(), 1.0 / 3.0, epsilon = 1e-15);
        let z = r.minimizer.unwrap();
        assert_abs_diff_eq!(z.coords()[0], 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(x.dist(&z), 5f64.sqrt(), epsilon = 1e-14);
        assert!((halfspace_scan_2d(&x, &y) - r.value).abs() < 1e-9);
    }

    #[test]
    fn halfspace_rejects_boundary_points() {
        assert!(matches!(
            ctilde_halfspace(&p(&[0.0, 0.0]), &p(&[0.0, 1.0])),
            Err(Error::Domain { .. })
        ));
    }

    #[test]
    fn ball_collinear_pair() {
        let r = ctilde_ball(&p(&[0.3, 0.0]), &p(&[0.5, 0.0]), &cfg()).unwrap();
        assert_abs_diff_eq!(r.value, 0.2 / 0.7, epsilon = 1e-15);
        assert_eq!(r.branch, Some(BranchTag::SameRay));
    }

    #[test]
    fn ball_orthogonal_pair() {
        let (x, y) = (p(&[0.5, 0.0]), p(&[0.0, 0.5]));
        let r = ctilde_ball(&x, &y, &cfg()).unwrap();
        let expected = 0.5f64.sqrt() / (1.25 - 0.5f64.sqrt()).sqrt();
        assert_abs_diff_eq!(r.value, expected, epsilon = 1e-12);
        assert_abs_diff_eq!(r.value, 0.959683, epsilon = 1e-6);
        assert_eq!(r.branch, Some(BranchTag::EquidistantArc));
        assert_abs_diff_eq!(r.parameter.unwrap(), FRAC_PI_4, epsilon = 1e-12);
        assert!(r.residual.unwrap() <= 1e-12);
        assert!((circle_scan(&x, &y, false) - r.value).abs() < 1e-9);
    }

    #[test]
    fn ball_center_point() {
        let r = ctilde_ball(&Point::origin(2), &p(&[0.5, 0.0]), &cfg()).unwrap();
        assert_eq!(r.value, 0.5);
        assert_eq!(r.branch, Some(BranchTag::CenterPoint));
    }

    #[test]
    fn ball_wide_angle_same_ray_branch() {
        // cos(mu) >= (||x|^2 - |y|^2| + 2 min) / (2 max) with a nonzero angle
        let x = p(&[0.05, 0.0]);
        let y = p(&[0.9 * 0.1f64.cos(), 0.9 * 0.1f64.sin()]);
        let r = ctilde_ball(&x, &y, &cfg()).unwrap();
        assert_eq!(r.branch, Some(BranchTag::SameRay));
        assert_abs_diff_eq!(r.value, x.dist(&y) / 0.95, epsilon = 1e-15);
        assert!((circle_scan(&x, &y, false) - r.value).abs() < 1e-8);
    }

    #[test]
    fn punctured_values() {
        let e1 = Point::unit(2, 0);
        assert_eq!(ctilde_punctured(&e1, &e1.scaled(-1.0)).unwrap().value, 2.0);
        assert_eq!(ctilde_punctured(&e1, &e1).unwrap().value, 0.0);
        let r = ctilde_punctured(&p(&[2.0, 0.0]), &Point::unit(2, 1)).unwrap();
        assert_abs_diff_eq!(r.value, 5f64.sqrt() / 2.0, epsilon = 1e-15);
        assert!(ctilde_punctured(&Point::origin(2), &e1).is_err());
    }

    #[test]
    fn hyperbolic_values() {
        let h = Domain::half_space(2);
        let b = Domain::unit_ball(2);
        assert_abs_diff_eq!(
            th_rho_half(&h, &p(&[0.0, 1.0]), &p(&[1.0, 1.0])).unwrap(),
            1.0 / 5f64.sqrt(),
            epsilon = 1e-15
        );
        let (u, v) = (0.2, 0.7);
        assert_abs_diff_eq!(
            th_rho_half(&b, &p(&[u, 0.0]), &p(&[v, 0.0])).unwrap(),
            (v - u) / (1.0 - u * v),
            epsilon = 1e-15
        );
        assert_eq!(th_rho_half(&b, &p(&[u, 0.0]), &p(&[u, 0.0])).unwrap(), 0.0);

        let r = rho(&h, &p(&[0.0, 1.0]), &p(&[0.0, E])).unwrap();
        assert_abs_diff_eq!(r, 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(
            r.cosh(),
            1.0 + (E - 1.0).powi(2) / (2.0 * E),
            epsilon = 1e-13
        );
        assert_abs_diff_eq!(
            rho(&b, &Point::origin(2), &p(&[0.5, 0.0])).unwrap(),
            2.0 * 0.5f64.atanh(),
            epsilon = 1e-15
        );
        assert!(th_rho_half(&Domain::punctured(2), &p(&[1.0, 0.0]), &p(&[0.0, 1.0])).is_err());
    }

    #[test]
    fn ball_rho_matches_sinh_form() {
        let b = Domain::unit_ball(3);
        let (x, y) = (p(&[0.1, -0.4, 0.3]), p(&[-0.6, 0.2, 0.5]));
        let r = rho(&b, &x, &y).unwrap();
        let (nx, ny) = (x.norm(), y.norm());
        let sh2 = x.dist(&y).powi(2) / ((1.0 - nx * nx) * (1.0 - ny * ny));
        assert_abs_diff_eq!((r / 2.0).sinh().powi(2), sh2, epsilon = 1e-10);
    }

    #[test]
    fn distance_ratio_values() {
        let b = Domain::unit_ball(2);
        assert_abs_diff_eq!(
            jstar(&b, &Point::origin(2), &p(&[0.5, 0.0])).unwrap(),
            1.0 / 3.0,
            epsilon = 1e-15
        );
        let g = Domain::punctured(2);
        let e1 = Point::unit(2, 0);
        assert_eq!(jstar(&g, &e1, &e1.scaled(-1.0)).unwrap(), 0.5);
        assert_eq!(jstar(&g, &e1, &e1).unwrap(), 0.0);
        assert_eq!(j_metric(&g, &e1, &e1).unwrap(), 0.0);
    }

    #[test]
    fn triangular_ratio_values() {
        let h = Domain::half_space(2);
        let r = s_metric(&h, &p(&[0.0, 1.0]), &p(&[1.0, 1.0]), &cfg()).unwrap();
        assert_abs_diff_eq!(r.value, 1.0 / 5f64.sqrt(), epsilon = 1e-15);
        let g = Domain::punctured(2);
        let e1 = Point::unit(2, 0);
        assert_eq!(
            s_metric(&g, &e1, &e1.scaled(-1.0), &cfg()).unwrap().value,
            1.0
        );

        let b = Domain::unit_ball(2);
        let (x, y) = (p(&[0.5, 0.0]), p(&[0.0, 0.5]));
        let s = s_metric(&b, &x, &y, &cfg()).unwrap();
        assert_abs_diff_eq!(s.value, 0.479841, epsilon = 1e-6);
        assert_abs_diff_eq!(s.parameter.unwrap(), FRAC_PI_4, epsilon = 1e-7);
        let c = ctilde_ball(&x, &y, &cfg()).unwrap().value;
        assert_abs_diff_eq!(s.value, c / 2.0, epsilon = 1e-13);
        assert!((circle_scan(&x, &y, true) - s.value).abs() < 1e-9);
    }

    #[test]
    fn ball_s_degenerate_cases() {
        let b = Domain::unit_ball(2);
        let y = p(&[0.5, 0.0]);
        let s0 = s_metric(&b, &Point::origin(2), &y, &cfg()).unwrap().value;
        assert_abs_diff_eq!(s0, 0.5 / 1.5, epsilon = 1e-15);
        assert!((circle_scan(&Point::origin(2), &y, true) - s0).abs() < 1e-9);
        let x = p(&[0.2, 0.0]);
        let s1 = s_metric(&b, &x, &y, &cfg()).unwrap().value;
        assert_abs_diff_eq!(s1, 0.3 / 1.3, epsilon = 1e-15);
    }

    #[test]
    fn discretized_domains_have_no_closed_forms() {
        let g = Domain::discretized(vec![Point::origin(2)], false).unwrap();
        let e1 = Point::unit(2, 0);
        assert!(matches!(
            evaluate(MetricKind::CTilde, &g, &e1, &e1.scaled(2.0), &cfg()),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn halfspace_branch_boundary_is_continuous() {
        // y = (w, h) with |x - y|^2 = (1 - h)^2 + (1 - h^2) exactly for x = (0, 1), h < 1
        for &h in &[0.1f64, 0.35, 0.6, 0.9] {
            let w = (1.0 - h * h).sqrt();
            let x = p(&[0.0, 1.0]);
            for &eps in &[-1e-10, 1e-10] {
                let y = p(&[w + eps, h]);
                let d2 = x.dist(&y).powi(2);
                let foot = x.dist(&y) / 1.0;
                let equi = 2.0 * ((d2 - (1.0 - h) * (1.0 - h)) / (d2 + 4.0 * h)).sqrt();
                assert!((foot - equi).abs() < 1e-9, "h={h}: {foot} vs {equi}");
                let r = ctilde_halfspace(&x, &y).unwrap();
                assert!((r.value - foot).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn ball_collinear_quotient() {
        let b = Domain::unit_ball(3);
        for &(u, v) in &[(0.1, 0.2), (0.4, 0.95), (0.8, 0.81)] {
            let (x, y) = (p(&[u, 0.0, 0.0]), p(&[v, 0.0, 0.0]));
            let c = ctilde_ball(&x, &y, &cfg()).unwrap().value;
            let t = th_rho_half(&b, &x, &y).unwrap();
            assert_abs_diff_eq!(c / t, (1.0 - u * v) / (1.0 - u), epsilon = 1e-12);
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn half_pt() -> impl Strategy<Value = Point> {
            (-3.0..3.0f64, -3.0..3.0f64, 1e-3..3.0f64).prop_map(|(a, b, c)| p(&[a, b, c]))
        }

        fn ball_pt() -> impl Strategy<Value = Point> {
            (-1.0..1.0f64, -1.0..1.0f64, 0.0..0.999f64).prop_filter_map("inside", |(a, b, r)| {
                let n = a.hypot(b);
                (n > 1e-6).then(|| p(&[r * a / n, r * b / n]))
            })
        }

        proptest! {
            #[test]
            fn halfspace_symmetry_and_range(x in half_pt(), y in half_pt()) {
                let h = Domain::half_space(3);
                for kind in MetricKind::ALL {
                    let a = value(kind, &h, &x, &y, &cfg()).unwrap();
                    let b = value(kind, &h, &y, &x, &cfg()).unwrap();
                    prop_assert_eq!(a, b);
                    prop_assert!(a >= 0.0 && a <= kind.upper_bound());
                    prop_assert_eq!(a == 0.0, x == y);
                }
                let j = j_metric(&h, &x, &y).unwrap();
                prop_assert!((jstar(&h, &x, &y).unwrap() - (j / 2.0).tanh()).abs() < 1e-12);
            }

            #[test]
            fn ball_symmetry_and_range(x in ball_pt(), y in ball_pt()) {
                let b = Domain::unit_ball(2);
                for kind in MetricKind::ALL {
                    let a = value(kind, &b, &x, &y, &cfg()).unwrap();
                    prop_assert_eq!(a, value(kind, &b, &y, &x, &cfg()).unwrap());
                    prop_assert!(a >= 0.0 && a <= kind.upper_bound());
                }
            }

            #[test]
            fn equal_heights_give_twice_th(a in -3.0..3.0f64, b in -3.0..3.0f64, h in 1e-3..3.0f64) {
                prop_assume!(a != b);
                let h2 = Domain::half_space(2);
                let (x, y) = (p(&[a, h]), p(&[b, h]));
                let c = ctilde_halfspace(&x, &y).unwrap().value;
                prop_assert!((c - 2.0 * th_rho_half(&h2, &x, &y).unwrap()).abs() <= 1e-12);
            }
        }
    }
}
