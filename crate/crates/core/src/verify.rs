//! Property-suite engine: seeded inequality sweeps between metrics, extremal
//! families for the sharp constants, triangle inequality and ball inclusions.

use std::f64::consts::{PI, SQRT_2};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{Domain, DomainKind, Point};
use crate::metrics::{self, MetricKind};
use crate::par;
use crate::sampling::{self, Region};
use crate::solvers::SolverConfig;

/// Both metrics must exceed this for a pair to enter the ratio statistics.
pub const RATIO_FLOOR: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct SampleConfig {
    pub domain: Domain,
    pub pair_count: usize,
    pub seed: u64,
    /// Minimum boundary clearance of sampled points.
    pub margin: f64,
    /// Absolute slack granted on the passing side of every inequality.
    pub tol: f64,
    /// Sampling box; `None` uses [`Region::default_for`].
    pub region: Option<Region>,
    /// Mix in pairs on segments from a nearest boundary point.
    pub extremal: bool,
    pub solver: SolverConfig,
}

impl SampleConfig {
    pub fn new(domain: Domain, pair_count: usize, seed: u64) -> Self {
        Self {
            domain,
            pair_count,
            seed,
            margin: 1e-9,
            tol: 1e-12,
            region: None,
            extremal: true,
            solver: SolverConfig::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.pair_count < 1 {
            return Err(Error::Config("pair_count must be at least 1".into()));
        }
        if !(self.margin > 0.0) {
            return Err(Error::Config(format!(
                "margin must be positive, got {}",
                self.margin
            )));
        }
        if !(self.tol >= 0.0) {
            return Err(Error::Config(format!(
                "tol must be non-negative, got {}",
                self.tol
            )));
        }
        self.solver.validate()
    }

    fn region(&self) -> Region {
        self.region
            .clone()
            .unwrap_or_else(|| Region::default_for(&self.domain))
    }

    pub fn pairs(&self) -> Vec<(Point, Point)> {
        sampling::pairs(
            &self.domain,
            &self.region(),
            self.pair_count,
            self.seed,
            self.margin,
            self.extremal,
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub x: Point,
    pub y: Point,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub z: Option<Point>,
    pub lhs: f64,
    pub rhs: f64,
}

/// `lower * den <= num <= upper * den`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Bound {
    pub lower: f64,
    pub upper: f64,
}

/// The comparison bounds between metrics that hold in `domain`.
pub fn known_bound(
    numerator: MetricKind,
    denominator: MetricKind,
    domain: &Domain,
) -> Option<Bound> {
    use MetricKind::*;
    let convex = domain.is_convex();
    let hyperbolic = matches!(domain.kind(), DomainKind::HalfSpace | DomainKind::UnitBall);
    let b = |lower, upper| Some(Bound { lower, upper });
    match (numerator, denominator) {
        (CTilde, S) => b(1.0, 2.0),
        (CTilde, JStar) if convex => b(1.0, 2.0 * SQRT_2),
        (CTilde, JStar) => b(1.0, 4.0),
        (S, JStar) if convex => b(1.0, SQRT_2),
        (S, JStar) => b(1.0, 2.0),
        (CTilde, ThRhoHalf) if hyperbolic => b(1.0, 2.0),
        _ => None,
    }
}

/// The ratio pairs checked by the inequality suite in a domain.
pub fn inequality_suite(domain: &Domain) -> Vec<(MetricKind, MetricKind)> {
    use MetricKind::*;
    let mut v = vec![(CTilde, S), (CTilde, JStar), (S, JStar)];
    if matches!(domain.kind(), DomainKind::HalfSpace | DomainKind::UnitBall) {
        v.push((CTilde, ThRhoHalf));
    }
    v
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RatioSummary {
    pub numerator: MetricKind,
    pub denominator: MetricKind,
    pub bound: Bound,
    pub pairs_checked: usize,
    /// Pairs with both values above [`RATIO_FLOOR`].
    pub pairs_in_ratio: usize,
    pub ratio_min: f64,
    pub ratio_max: f64,
    pub argmin: Option<(Point, Point)>,
    pub argmax: Option<(Point, Point)>,
    pub violations: Vec<Violation>,
}

impl RatioSummary {
    fn new(numerator: MetricKind, denominator: MetricKind, bound: Bound) -> Self {
        Self {
            numerator,
            denominator,
            bound,
            pairs_checked: 0,
            pairs_in_ratio: 0,
            ratio_min: f64::INFINITY,
            ratio_max: f64::NEG_INFINITY,
            argmin: None,
            argmax: None,
            violations: Vec::new(),
        }
    }

    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Sweeps the ratio `numerator / denominator` over seeded random pairs and
/// checks it against the known bound for the domain.
pub fn sweep_ratio(
    numerator: MetricKind,
    denominator: MetricKind,
    cfg: &SampleConfig,
) -> Result<RatioSummary> {
    Ok(sweep_ratios(&[(numerator, denominator)], cfg)?.remove(0))
}

/// Several ratio sweeps over one shared sample; every metric is evaluated once per pair.
pub fn sweep_ratios(
    ratios: &[(MetricKind, MetricKind)],
    cfg: &SampleConfig,
) -> Result<Vec<RatioSummary>> {
    cfg.validate()?;
    let bounds = ratios
        .iter()
        .map(|&(n, d)| {
            known_bound(n, d, &cfg.domain).ok_or_else(|| {
                Error::Config(format!(
                    "no known bound for {n}/{d} in the {}",
                    cfg.domain.kind().name()
                ))
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut kinds: Vec<MetricKind> = ratios.iter().flat_map(|&(n, d)| [n, d]).collect();
    kinds.sort_by_key(|k| *k as usize);
    kinds.dedup();
    let slot = |k: MetricKind| kinds.iter().position(|&m| m == k).unwrap();

    let pairs = cfg.pairs();
    let values = par::map_slice(&pairs, |(x, y)| {
        kinds
            .iter()
            .map(|&k| metrics::value(k, &cfg.domain, x, y, &cfg.solver))
            .collect::<Result<Vec<f64>>>()
    });

    let mut out: Vec<RatioSummary> = ratios
        .iter()
        .zip(&bounds)
        .map(|(&(n, d), &b)| RatioSummary::new(n, d, b))
        .collect();
    for ((x, y), vals) in pairs.iter().zip(values) {
        let vals = vals?;
        for (summary, &(n, d)) in out.iter_mut().zip(ratios) {
            let (num, den) = (vals[slot(n)], vals[slot(d)]);
            summary.pairs_checked += 1;
            let b = summary.bound;
            if num < b.lower * den - cfg.tol {
                summary.violations.push(Violation {
                    x: x.clone(),
                    y: y.clone(),
                    z: None,
                    lhs: b.lower * den,
                    rhs: num,
                });
            }
            if num > b.upper * den + cfg.tol {
                summary.violations.push(Violation {
                    x: x.clone(),
                    y: y.clone(),
                    z: None,
                    lhs: num,
                    rhs: b.upper * den,
                });
            }
            if num > RATIO_FLOOR && den > RATIO_FLOOR {
                let r = num / den;
                summary.pairs_in_ratio += 1;
                if r < summary.ratio_min {
                    summary.ratio_min = r;
                    summary.argmin = Some((x.clone(), y.clone()));
                }
                if r > summary.ratio_max {
                    summary.ratio_max = r;
                    summary.argmax = Some((x.clone(), y.clone()));
                }
            }
        }
    }
    Ok(out)
}

/// Extremal point configurations whose ratios approach the sharp constants.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Family {
    /// Half-plane, x = (0,1), y = k x: c-tilde / s = 1 + k.
    CsHalfSpace,
    /// Punctured plane, x = e1, y on the unit circle up to -e1: c-tilde / j* = 2 + |x - y| -> 4.
    CjPunctured,
    /// Unit disk, x = u e1, y = v e1 with v -> u+: c-tilde / th(rho/2) -> 1 + u.
    CthBallCollinear,
    /// Half-plane, x = (0,1), y = (0,t): c-tilde / th(rho/2) = 1 + t.
    CthHalfVertical,
}

impl Family {
    pub const ALL: [Family; 4] = [
        Family::CsHalfSpace,
        Family::CjPunctured,
        Family::CthBallCollinear,
        Family::CthHalfVertical,
    ];

    pub fn id(self) -> &'static str {
        match self {
            Family::CsHalfSpace => "cs-half",
            Family::CjPunctured => "cj-punctured",
            Family::CthBallCollinear => "cth-ball-collinear",
            Family::CthHalfVertical => "cth-half-vertical",
        }
    }

    /// Infimum and supremum of the ratio along the family.
    pub fn limits(self) -> (f64, f64) {
        match self {
            Family::CjPunctured => (2.0, 4.0),
            _ => (1.0, 2.0),
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.to_ascii_lowercase().replace('_', "-");
        Family::ALL
            .into_iter()
            .find(|f| {
                f.id() == norm || format!("{f:?}").to_ascii_lowercase() == norm.replace('-', "")
            })
            .ok_or_else(|| Error::Config(format!("unknown family {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FamilyPoint {
    pub parameter: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SharpnessTrace {
    pub family: Family,
    pub points: Vec<FamilyPoint>,
    pub lower_limit: f64,
    pub upper_limit: f64,
    /// Distance of the first ratio from the lower limit.
    pub lower_gap: f64,
    /// Distance of the last ratio from the upper limit.
    pub upper_gap: f64,
}

fn p2(a: f64, b: f64) -> Point {
    Point::from_vec(vec![a, b])
}

/// c-tilde / s for x = (0,1), y = u + k (x - u) with u the origin, in the half-plane.
pub fn cs_halfspace_ratio(k: f64) -> Result<f64> {
    let h = Domain::half_space(2);
    let (x, y) = (p2(0.0, 1.0), p2(0.0, k));
    let cfg = SolverConfig::default();
    Ok(metrics::value(MetricKind::CTilde, &h, &x, &y, &cfg)?
        / metrics::value(MetricKind::S, &h, &x, &y, &cfg)?)
}

/// c-tilde / th(rho/2) for x = u e1, y = v e1 in the unit disk.
pub fn ball_collinear_ratio(u: f64, v: f64) -> Result<f64> {
    let b = Domain::unit_ball(2);
    let (x, y) = (p2(u, 0.0), p2(v, 0.0));
    Ok(
        metrics::ctilde_ball(&x, &y, &SolverConfig::default())?.value
            / metrics::th_rho_half(&b, &x, &y)?,
    )
}

/// c-tilde / j* for x = e1 and y = (cos t, sin t) in the punctured plane;
/// `t = pi` uses y = -e1 exactly.
pub fn cj_punctured_ratio(t: f64) -> Result<f64> {
    let g = Domain::punctured(2);
    let x = p2(1.0, 0.0);
    let y = if t == PI {
        p2(-1.0, 0.0)
    } else {
        p2(t.cos(), t.sin())
    };
    Ok(metrics::ctilde_punctured(&x, &y)?.value / metrics::jstar(&g, &x, &y)?)
}

/// c-tilde / th(rho/2) for x = (0,1), y = (0,t) in the half-plane.
pub fn half_vertical_ratio(t: f64) -> Result<f64> {
    let h = Domain::half_space(2);
    let (x, y) = (p2(0.0, 1.0), p2(0.0, t));
    Ok(metrics::ctilde_halfspace(&x, &y)?.value / metrics::th_rho_half(&h, &x, &y)?)
}

/// Parameters in (0, 1) spaced logistically between 1e-6 and 1 - 1e-6, so both ends are approached.
fn two_sided_params(steps: usize) -> Vec<f64> {
    let span = (1e6f64).ln();
    (0..steps)
        .map(|i| {
            let t = -span + 2.0 * span * i as f64 / (steps - 1) as f64;
            1.0 / (1.0 + (-t).exp())
        })
        .collect()
}

/// Traces a family towards its sharp constants.
pub fn sharpness_family(family: Family, steps: usize) -> Result<SharpnessTrace> {
    if steps < 2 {
        return Err(Error::Config(
            "a family trace needs at least 2 steps".into(),
        ));
    }
    let points = match family {
        Family::CsHalfSpace => two_sided_params(steps)
            .into_iter()
            .map(|k| {
                Ok(FamilyPoint {
                    parameter: k,
                    ratio: cs_halfspace_ratio(k)?,
                })
            })
            .collect::<Result<Vec<_>>>()?,
        Family::CthHalfVertical => two_sided_params(steps)
            .into_iter()
            .map(|t| {
                Ok(FamilyPoint {
                    parameter: t,
                    ratio: half_vertical_ratio(t)?,
                })
            })
            .collect::<Result<Vec<_>>>()?,
        Family::CthBallCollinear => two_sided_params(steps)
            .into_iter()
            .map(|u| {
                // v - u shrinks with 1 - u so the ratio stays monotone in u
                let v = u + 1e-6 * (1.0 - u);
                Ok(FamilyPoint {
                    parameter: u,
                    ratio: ball_collinear_ratio(u, v)?,
                })
            })
            .collect::<Result<Vec<_>>>()?,
        Family::CjPunctured => (1..=steps)
            .map(|i| {
                let t = if i == steps {
                    PI
                } else {
                    PI * i as f64 / steps as f64
                };
                Ok(FamilyPoint {
                    parameter: t,
                    ratio: cj_punctured_ratio(t)?,
                })
            })
            .collect::<Result<Vec<_>>>()?,
    };
    let (lower_limit, upper_limit) = family.limits();
    let lower_gap = (points[0].ratio - lower_limit).abs();
    let upper_gap = (upper_limit - points[points.len() - 1].ratio).abs();
    Ok(SharpnessTrace {
        family,
        points,
        lower_limit,
        upper_limit,
        lower_gap,
        upper_gap,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TriangleSummary {
    pub metric: MetricKind,
    pub triples_checked: usize,
    /// min over triples of m(x,z) + m(z,y) - m(x,y)
    pub min_slack: f64,
    pub violations: Vec<Violation>,
}

/// Checks `m(x, y) <= m(x, z) + m(z, y) + tol` on seeded random triples.
pub fn check_triangle(metric: MetricKind, cfg: &SampleConfig) -> Result<TriangleSummary> {
    cfg.validate()?;
    let triples = sampling::triples(
        &cfg.domain,
        &cfg.region(),
        cfg.pair_count,
        cfg.seed,
        cfg.margin,
    );
    let evals = par::map_slice(&triples, |[x, y, z]| -> Result<(f64, f64)> {
        let v = |a: &Point, b: &Point| metrics::value(metric, &cfg.domain, a, b, &cfg.solver);
        let direct = v(x, y)?;
        Ok((direct, v(x, z)? + v(z, y)?))
    });
    let mut summary = TriangleSummary {
        metric,
        triples_checked: 0,
        min_slack: f64::INFINITY,
        violations: Vec::new(),
    };
    for ([x, y, z], e) in triples.iter().zip(evals) {
        let (lhs, rhs) = e?;
        summary.triples_checked += 1;
        summary.min_slack = summary.min_slack.min(rhs - lhs);
        if lhs > rhs + cfg.tol {
            summary.violations.push(Violation {
                x: x.clone(),
                y: y.clone(),
                z: Some(z.clone()),
                lhs,
                rhs,
            });
        }
    }
    Ok(summary)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InclusionViolation {
    pub implication: &'static str,
    pub y: Point,
    pub ctilde: f64,
    pub other: f64,
}

/// Outcome of the ball-inclusion checks around one center.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InclusionReport {
    pub center: Point,
    pub r: f64,
    pub samples: usize,
    /// Radii of the s-balls: r/2 inside, r outside.
    pub s_radii: (f64, f64),
    /// Radii of the rho-balls, when rho exists in the domain.
    pub rho_radii: Option<(f64, f64)>,
    pub inside_count: usize,
    /// sup of s over sampled points with c-tilde < r (at most r).
    pub s_sup_inside: f64,
    /// inf of s over sampled points with c-tilde >= r (at least r/2).
    pub s_inf_outside: f64,
    pub violations: Vec<InclusionViolation>,
}

/// The Euclidean bounding box of the hyperbolic ball B(center, radius), clipped to `[-1,1]^n` in the ball.
fn hyperbolic_ball_box(domain: &Domain, center: &Point, radius: f64) -> Region {
    let n = domain.dim();
    let c = center.coords();
    match domain.kind() {
        DomainKind::HalfSpace => {
            let h = center.last();
            let (ctr, rad) = (h * radius.cosh(), h * radius.sinh());
            let mut lo: Vec<f64> = c.iter().map(|v| v - rad).collect();
            let mut hi: Vec<f64> = c.iter().map(|v| v + rad).collect();
            lo[n - 1] = 0.0;
            hi[n - 1] = ctr + rad;
            Region::new(lo, hi)
        }
        DomainKind::UnitBall => {
            let t = (radius / 2.0).tanh();
            let m2 = center.norm().powi(2);
            let scale = (1.0 - t * t) / (1.0 - t * t * m2);
            let rad = t * (1.0 - m2) / (1.0 - t * t * m2);
            let lo = c.iter().map(|v| (v * scale - rad).max(-1.0)).collect();
            let hi = c.iter().map(|v| (v * scale + rad).min(1.0)).collect();
            Region::new(lo, hi)
        }
        _ => {
            let w = 4.0 * center.norm() + 1.0;
            Region::new(vec![-w; n], vec![w; n])
        }
    }
}

/// Samples points around `center` and checks
/// `B_s(r/2) ⊆ B_c(r) ⊆ B_s(r)` and, in the half-space and the ball,
/// `B_rho(log((2+r)/(2-r))) ⊆ B_c(r) ⊆ B_rho(log((1+r)/(1-r)))`.
pub fn check_ball_inclusions(
    center: &Point,
    r: f64,
    cfg: &SampleConfig,
) -> Result<InclusionReport> {
    cfg.validate()?;
    if !(r > 0.0 && r < 1.0) {
        return Err(Error::Config(format!("radius must lie in (0, 1), got {r}")));
    }
    let domain = &cfg.domain;
    domain.require_interior(center)?;
    let has_rho = matches!(domain.kind(), DomainKind::HalfSpace | DomainKind::UnitBall);
    let rho_radii = has_rho.then(|| (((2.0 + r) / (2.0 - r)).ln(), ((1.0 + r) / (1.0 - r)).ln()));
    let region = cfg
        .region
        .clone()
        .unwrap_or_else(|| hyperbolic_ball_box(domain, center, ((1.0 + r) / (1.0 - r)).ln() + 1.0));
    let ys = sampling::points(domain, &region, cfg.pair_count, cfg.seed, cfg.margin);
    let evals = par::map_slice(&ys, |y| -> Result<(f64, f64, Option<f64>)> {
        let c = metrics::value(MetricKind::CTilde, domain, center, y, &cfg.solver)?;
        let s = metrics::value(MetricKind::S, domain, center, y, &cfg.solver)?;
        let rho = if has_rho {
            Some(metrics::rho(domain, center, y)?)
        } else {
            None
        };
        Ok((c, s, rho))
    });

    let mut report = InclusionReport {
        center: center.clone(),
        r,
        samples: ys.len(),
        s_radii: (r / 2.0, r),
        rho_radii,
        inside_count: 0,
        s_sup_inside: 0.0,
        s_inf_outside: f64::INFINITY,
        violations: Vec::new(),
    };
    let tol = cfg.tol;
    for (y, e) in ys.iter().zip(evals) {
        let (c, s, rho) = e?;
        let mut fail = |implication, other| {
            report.violations.push(InclusionViolation {
                implication,
                y: y.clone(),
                ctilde: c,
                other,
            })
        };
        if s < r / 2.0 && c >= r + tol {
            fail("s < r/2 => c < r", s);
        }
        if c < r && s >= r + tol {
            fail("c < r => s < r", s);
        }
        if let (Some(rho), Some((inner, outer))) = (rho, rho_radii) {
            if rho < inner && c >= r + tol {
                fail("rho < log((2+r)/(2-r)) => c < r", rho);
            }
            if c < r && rho >= outer + tol {
                fail("c < r => rho < log((1+r)/(1-r))", rho);
            }
        }
        if c < r {
            report.inside_count += 1;
            report.s_sup_inside = report.s_sup_inside.max(s);
        } else {
            report.s_inf_outside = report.s_inf_outside.min(s);
        }
    }
    Ok(report)
}
