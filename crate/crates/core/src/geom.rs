//! Points, canonical domains, membership and boundary distance.

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Points closer than this to the boundary are treated as boundary points.
pub const BOUNDARY_EPS: f64 = 1e-14;

/// A point of R^n, n >= 2, with finite coordinates.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Point(Vec<f64>);

impl Point {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.len() < 2 {
            return Err(Error::Config(format!(
                "points need at least two coordinates, got {}",
                coords.len()
            )));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::Config(format!(
                "non-finite coordinate in {coords:?}"
            )));
        }
        Ok(Self(coords))
    }

    /// Builds a point without validation. Callers guarantee finiteness.
    pub(crate) fn from_vec(coords: Vec<f64>) -> Self {
        debug_assert!(coords.len() >= 2 && coords.iter().all(|c| c.is_finite()));
        Self(coords)
    }

    pub fn origin(dim: usize) -> Self {
        Self(vec![0.0; dim])
    }

    /// The i-th standard basis vector, zero-based.
    pub fn unit(dim: usize, i: usize) -> Self {
        let mut c = vec![0.0; dim];
        c[i] = 1.0;
        Self(c)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn into_coords(self) -> Vec<f64> {
        self.0
    }

    /// The last coordinate, i.e. the height above the boundary hyperplane.
    pub fn last(&self) -> f64 {
        self.0[self.0.len() - 1]
    }

    pub fn norm(&self) -> f64 {
        norm(&self.0)
    }

    pub fn dist(&self, other: &Point) -> f64 {
        dist(&self.0, &other.0)
    }

    pub fn dot(&self, other: &Point) -> f64 {
        dot(&self.0, &other.0)
    }

    pub fn scaled(&self, t: f64) -> Point {
        Point(self.0.iter().map(|c| c * t).collect())
    }

    /// Projection onto the hyperplane x_n = 0.
    pub fn foot(&self) -> Point {
        let mut c = self.0.clone();
        let n = c.len();
        c[n - 1] = 0.0;
        Point(c)
    }

    /// `self + t (other - self)`.
    pub fn lerp(&self, other: &Point, t: f64) -> Point {
        Point(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(a, b)| a + t * (b - a))
                .collect(),
        )
    }

    pub fn is_origin(&self) -> bool {
        self.0.iter().all(|&c| c == 0.0)
    }

    /// Lexicographic total order on coordinates, used to canonicalize argument order.
    pub fn lex_cmp(&self, other: &Point) -> std::cmp::Ordering {
        for (a, b) in self.0.iter().zip(&other.0) {
            match a.total_cmp(b) {
                std::cmp::Ordering::Equal => continue,
                ord => return ord,
            }
        }
        self.0.len().cmp(&other.0.len())
    }
}

impl fmt::Debug for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(&self.0).finish()
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|c| c.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub(crate) fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DomainKind {
    HalfSpace,
    UnitBall,
    PuncturedSpace,
    DiscretizedBoundary,
}

impl DomainKind {
    pub fn name(self) -> &'static str {
        match self {
            DomainKind::HalfSpace => "half-space",
            DomainKind::UnitBall => "unit ball",
            DomainKind::PuncturedSpace => "punctured space",
            DomainKind::DiscretizedBoundary => "discretized boundary",
        }
    }
}

/// A proper subdomain G of R^n together with what is needed to reach its boundary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Domain {
    kind: DomainKind,
    dim: usize,
    convex: bool,
    boundary: Vec<Point>,
}

impl Domain {
    fn canonical(kind: DomainKind, dim: usize) -> Self {
        assert!(dim >= 2, "domains live in R^n with n >= 2");
        Self {
            kind,
            dim,
            convex: matches!(kind, DomainKind::HalfSpace | DomainKind::UnitBall),
            boundary: Vec::new(),
        }
    }

    /// The upper half-space { x : x_n > 0 }.
    pub fn half_space(dim: usize) -> Self {
        Self::canonical(DomainKind::HalfSpace, dim)
    }

    pub fn unit_ball(dim: usize) -> Self {
        Self::canonical(DomainKind::UnitBall, dim)
    }

    /// R^n minus the origin.
    pub fn punctured(dim: usize) -> Self {
        Self::canonical(DomainKind::PuncturedSpace, dim)
    }

    /// R^n minus a finite point set. Only the oracle evaluators accept these.
    pub fn discretized(boundary: Vec<Point>, convex: bool) -> Result<Self> {
        let first = boundary
            .first()
            .ok_or_else(|| Error::Config("discretized boundary needs at least one point".into()))?;
        let dim = first.dim();
        if let Some(p) = boundary.iter().find(|p| p.dim() != dim) {
            return Err(Error::Dimension {
                expected: dim,
                found: p.dim(),
            });
        }
        Ok(Self {
            kind: DomainKind::DiscretizedBoundary,
            dim,
            convex,
            boundary,
        })
    }

    pub fn kind(&self) -> DomainKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_convex(&self) -> bool {
        self.convex
    }

    pub fn boundary_points(&self) -> &[Point] {
        &self.boundary
    }

    pub fn check_dim(&self, x: &Point) -> Result<()> {
        if x.dim() != self.dim {
            return Err(Error::Dimension {
                expected: self.dim,
                found: x.dim(),
            });
        }
        Ok(())
    }

    /// True iff `x` is an interior point of the domain.
    pub fn contains(&self, x: &Point) -> Result<bool> {
        self.check_dim(x)?;
        Ok(match self.kind {
            DomainKind::HalfSpace => x.last() > 0.0,
            DomainKind::UnitBall => x.norm() < 1.0,
            DomainKind::PuncturedSpace => !x.is_origin(),
            DomainKind::DiscretizedBoundary => !self.boundary.iter().any(|b| b == x),
        })
    }

    /// Euclidean distance d_G(x) from `x` to the boundary.
    pub fn boundary_distance(&self, x: &Point) -> Result<f64> {
        if !self.contains(x)? {
            return Err(self.outside(x));
        }
        Ok(self.boundary_distance_unchecked(x))
    }

    pub(crate) fn boundary_distance_unchecked(&self, x: &Point) -> f64 {
        match self.kind {
            DomainKind::HalfSpace => x.last(),
            DomainKind::UnitBall => 1.0 - x.norm(),
            DomainKind::PuncturedSpace => x.norm(),
            DomainKind::DiscretizedBoundary => self
                .boundary
                .iter()
                .map(|b| x.dist(b))
                .fold(f64::INFINITY, f64::min),
        }
    }

    /// Rejects points outside the domain or within [`BOUNDARY_EPS`] of its boundary.
    pub fn require_interior(&self, x: &Point) -> Result<()> {
        if !self.contains(x)? || self.boundary_distance_unchecked(x) < BOUNDARY_EPS {
            return Err(self.outside(x));
        }
        Ok(())
    }

    pub(crate) fn outside(&self, x: &Point) -> Error {
        Error::Domain {
            domain: self.kind.name(),
            point: x.coords().to_vec(),
        }
    }
}

/// The angle XOY in [0, pi] between the rays from the origin through `x` and `y`.
pub fn angle_at_origin(x: &Point, y: &Point) -> Result<f64> {
    if x.dim() != y.dim() {
        return Err(Error::Dimension {
            expected: x.dim(),
            found: y.dim(),
        });
    }
    let (nx, ny) = (x.norm(), y.norm());
    if nx == 0.0 || ny == 0.0 {
        return Err(Error::UndefinedAngle);
    }
    // 2 atan2(|u - v|, |u + v|) for unit vectors u, v stays accurate near 0 and pi,
    // where arccos of the dot product loses half the digits.
    let (mut diff, mut sum) = (0.0, 0.0);
    for (a, b) in x.coords().iter().zip(y.coords()) {
        let (u, v) = (a / nx, b / ny);
        diff += (u - v) * (u - v);
        sum += (u + v) * (u + v);
    }
    Ok((2.0 * diff.sqrt().atan2(sum.sqrt())).clamp(0.0, PI))
}
