//! Brute-force boundary infima. These evaluators scan boundary points
//! explicitly and share no formulas with [`crate::metrics`]; they serve as
//! referees for the closed forms.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{dist, dot, norm, Domain, DomainKind, Point};
use crate::metrics::MetricKind;
use crate::solvers::{grid_refine_min, SolverConfig};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleConfig {
    /// Number of coarse samples along the boundary parameterization.
    pub coarse_n: usize,
    /// Golden-section refinement around the best coarse sample.
    pub refine: bool,
    /// Half-width of the scanned part of an unbounded boundary. `None` means
    /// `10 * max(|x|, |y|, 1)`.
    pub window: Option<f64>,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self {
            coarse_n: 20001,
            refine: true,
            window: None,
        }
    }
}

impl OracleConfig {
    pub fn validate(&self) -> Result<()> {
        if self.coarse_n < 101 {
            return Err(Error::Config(format!(
                "coarse_n must be at least 101, got {}",
                self.coarse_n
            )));
        }
        if let Some(w) = self.window {
            if !(w > 0.0) {
                return Err(Error::Config(format!("window must be positive, got {w}")));
            }
        }
        Ok(())
    }

    fn solver(&self) -> SolverConfig {
        SolverConfig {
            grid_n: self.coarse_n - 1,
            refine_rounds: if self.refine { 80 } else { 0 },
            ..SolverConfig::default()
        }
    }

    fn window_for(&self, x: &Point, y: &Point) -> f64 {
        self.window
            .unwrap_or_else(|| 10.0 * x.norm().max(y.norm()).max(1.0))
    }
}

#[derive(Clone, Copy)]
enum Objective {
    Max,
    Sum,
}

impl Objective {
    fn combine(self, a: f64, b: f64) -> f64 {
        match self {
            Objective::Max => a.max(b),
            Objective::Sum => a + b,
        }
    }
}

fn check_pair(domain: &Domain, x: &Point, y: &Point) -> Result<()> {
    domain.require_interior(x)?;
    domain.require_interior(y)
}

/// Distances from `x` and `y` to `start + t * (end - start)`.
fn segment_objective<'a>(
    x: &'a [f64],
    y: &'a [f64],
    start: &'a [f64],
    end: &'a [f64],
    obj: Objective,
) -> impl Fn(f64) -> f64 + 'a {
    move |t| {
        let (mut dx, mut dy) = (0.0, 0.0);
        for i in 0..x.len() {
            let z = start[i] + t * (end[i] - start[i]);
            dx += (x[i] - z) * (x[i] - z);
            dy += (y[i] - z) * (y[i] - z);
        }
        obj.combine(dx.sqrt(), dy.sqrt())
    }
}

/// Distances from `x` and `y` to `cos t * e + sin t * f`.
fn circle_objective<'a>(
    x: &'a [f64],
    y: &'a [f64],
    e: &'a [f64],
    f: &'a [f64],
    obj: Objective,
) -> impl Fn(f64) -> f64 + 'a {
    move |t| {
        let (s, c) = t.sin_cos();
        let (mut dx, mut dy) = (0.0, 0.0);
        for i in 0..x.len() {
            let z = c * e[i] + s * f[i];
            dx += (x[i] - z) * (x[i] - z);
            dy += (y[i] - z) * (y[i] - z);
        }
        obj.combine(dx.sqrt(), dy.sqrt())
    }
}

/// Orthonormal frame of a plane through the origin containing `x` and `y`:
/// `e` along the first nonzero of them, `f` towards the other (or any
/// orthogonal direction when they are collinear).
fn plane_frame(x: &[f64], y: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let (base, other) = if norm(x) > 0.0 { (x, y) } else { (y, x) };
    let nb = norm(base);
    let e: Vec<f64> = base.iter().map(|c| c / nb).collect();
    let proj = dot(other, &e);
    let mut f: Vec<f64> = other.iter().zip(&e).map(|(o, ei)| o - proj * ei).collect();
    let nf = norm(&f);
    if nf > 1e-12 * norm(other).max(1e-300) && nf > 0.0 {
        f.iter_mut().for_each(|c| *c /= nf);
    } else {
        // collinear: any unit vector orthogonal to e
        let i = (0..e.len())
            .min_by(|&a, &b| e[a].abs().total_cmp(&e[b].abs()))
            .unwrap();
        f = vec![0.0; e.len()];
        f[i] = 1.0;
        let p = dot(&f, &e);
        f.iter_mut().zip(&e).for_each(|(c, ei)| *c -= p * ei);
        let nf = norm(&f);
        f.iter_mut().for_each(|c| *c /= nf);
    }
    (e, f)
}

fn min_over_single(x: &[f64], y: &[f64], z: &[f64], obj: Objective) -> f64 {
    obj.combine(dist(x, z), dist(y, z))
}

/// Infimum of the objective using the segment / arc reduction of the boundary.
fn reduced_infimum(
    domain: &Domain,
    x: &Point,
    y: &Point,
    cfg: &OracleConfig,
    obj: Objective,
) -> Result<f64> {
    let solver = cfg.solver();
    let (xc, yc) = (x.coords(), y.coords());
    match domain.kind() {
        DomainKind::HalfSpace => {
            let (xf, yf) = (x.foot(), y.foot());
            if xf == yf {
                return Ok(min_over_single(xc, yc, xf.coords(), obj));
            }
            let f = segment_objective(xc, yc, xf.coords(), yf.coords(), obj);
            Ok(grid_refine_min(f, 0.0, 1.0, &solver)?.min)
        }
        DomainKind::UnitBall => {
            let (nx, ny) = (x.norm(), y.norm());
            if nx == 0.0 || ny == 0.0 {
                let outer = if nx == 0.0 { yc } else { xc };
                let no = nx.max(ny);
                let z: Vec<f64> = outer.iter().map(|c| c / no).collect();
                return Ok(min_over_single(xc, yc, &z, obj));
            }
            let (e, f) = plane_frame(xc, yc);
            // end of the arc: the direction of y in the (e, f) frame
            let end = dot(yc, &f).atan2(dot(yc, &e));
            if end <= 1e-12 {
                return Ok(min_over_single(xc, yc, &e, obj));
            }
            let g = circle_objective(xc, yc, &e, &f, obj);
            Ok(grid_refine_min(g, 0.0, end, &solver)?.min)
        }
        DomainKind::PuncturedSpace => Ok(min_over_single(xc, yc, &vec![0.0; xc.len()], obj)),
        DomainKind::DiscretizedBoundary => {
            Ok(discrete_infimum(domain.boundary_points(), xc, yc, obj))
        }
    }
}

/// Infimum of the objective over the full boundary of a planar domain.
fn naive_infimum_2d(
    domain: &Domain,
    x: &Point,
    y: &Point,
    cfg: &OracleConfig,
    obj: Objective,
) -> Result<f64> {
    if domain.dim() != 2 {
        return Err(Error::Config(
            "the full-boundary oracle is planar only".into(),
        ));
    }
    let solver = cfg.solver();
    let (xc, yc) = (x.coords(), y.coords());
    match domain.kind() {
        DomainKind::HalfSpace => {
            let w = cfg.window_for(x, y);
            let (a, b) = ([-w, 0.0], [w, 0.0]);
            let f = segment_objective(xc, yc, &a, &b, obj);
            Ok(grid_refine_min(f, 0.0, 1.0, &solver)?.min)
        }
        DomainKind::UnitBall => {
            let g = circle_objective(xc, yc, &[1.0, 0.0], &[0.0, 1.0], obj);
            Ok(grid_refine_min(g, 0.0, TAU, &solver)?.min)
        }
        _ => reduced_infimum(domain, x, y, cfg, obj),
    }
}

fn ratio(x: &Point, y: &Point, infimum: f64) -> f64 {
    if x == y {
        0.0
    } else {
        x.dist(y) / infimum
    }
}

/// c-tilde from the reduced boundary: the segment `[x', y']` in the half-space,
/// the arc between `x/|x|` and `y/|y|` in the ball, the origin in the punctured space.
pub fn ctilde_oracle_reduced(
    domain: &Domain,
    x: &Point,
    y: &Point,
    cfg: &OracleConfig,
) -> Result<f64> {
    cfg.validate()?;
    check_pair(domain, x, y)?;
    Ok(ratio(
        x,
        y,
        reduced_infimum(domain, x, y, cfg, Objective::Max)?,
    ))
}

/// c-tilde from a scan of the whole planar boundary (a window of the real
/// line, or the full unit circle).
pub fn ctilde_oracle_naive2d(
    domain: &Domain,
    x: &Point,
    y: &Point,
    cfg: &OracleConfig,
) -> Result<f64> {
    cfg.validate()?;
    check_pair(domain, x, y)?;
    Ok(ratio(
        x,
        y,
        naive_infimum_2d(domain, x, y, cfg, Objective::Max)?,
    ))
}

/// The triangular ratio metric by brute force. In the ball the whole great
/// circle through `x` and `y` is scanned, not just the arc between them.
pub fn s_oracle(domain: &Domain, x: &Point, y: &Point, cfg: &OracleConfig) -> Result<f64> {
    cfg.validate()?;
    check_pair(domain, x, y)?;
    let inf = match domain.kind() {
        DomainKind::UnitBall => {
            let (xc, yc) = (x.coords(), y.coords());
            let (e, f) = plane_frame(xc, yc);
            let g = circle_objective(xc, yc, &e, &f, Objective::Sum);
            grid_refine_min(g, 0.0, TAU, &cfg.solver())?.min
        }
        _ => reduced_infimum(domain, x, y, cfg, Objective::Sum)?,
    };
    Ok(ratio(x, y, inf))
}

/// The triangular ratio metric from a scan of the whole planar boundary.
pub fn s_oracle_naive2d(domain: &Domain, x: &Point, y: &Point, cfg: &OracleConfig) -> Result<f64> {
    cfg.validate()?;
    check_pair(domain, x, y)?;
    Ok(ratio(
        x,
        y,
        naive_infimum_2d(domain, x, y, cfg, Objective::Sum)?,
    ))
}

fn discrete_infimum(boundary: &[Point], x: &[f64], y: &[f64], obj: Objective) -> f64 {
    boundary
        .iter()
        .map(|z| min_over_single(x, y, z.coords(), obj))
        .fold(f64::INFINITY, f64::min)
}

/// Exact evaluation with the boundary replaced by a finite point set.
pub fn discretized_eval(
    metric: MetricKind,
    boundary: &[Point],
    x: &Point,
    y: &Point,
) -> Result<f64> {
    let domain = Domain::discretized(boundary.to_vec(), false)?;
    domain.check_dim(x)?;
    domain.check_dim(y)?;
    for p in [x, y] {
        if !domain.contains(p)? {
            return Err(domain.outside(p));
        }
    }
    if x == y {
        return Ok(0.0);
    }
    let (xc, yc) = (x.coords(), y.coords());
    let d = x.dist(y);
    let min_d = || {
        let dx = discrete_infimum(boundary, xc, xc, Objective::Max);
        let dy = discrete_infimum(boundary, yc, yc, Objective::Max);
        dx.min(dy)
    };
    match metric {
        MetricKind::CTilde => Ok(d / discrete_infimum(boundary, xc, yc, Objective::Max)),
        MetricKind::S => Ok(d / discrete_infimum(boundary, xc, yc, Objective::Sum)),
        MetricKind::J => Ok((d / min_d()).ln_1p()),
        MetricKind::JStar => Ok(d / (d + 2.0 * min_d())),
        MetricKind::ThRhoHalf | MetricKind::Rho => Err(Error::Config(format!(
            "metric {metric} has no discretized form"
        ))),
    }
}
