//! Seeded rejection sampling of interior points.
//!
//! Work is split into fixed-size batches; batch `b` draws from its own
//! ChaCha stream seeded with `seed + b`, so the generated points do not depend
//! on how batches are scheduled across threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::geom::{Domain, DomainKind, Point};
use crate::par;

pub const BATCH_SIZE: usize = 1024;

pub fn batch_rng(seed: u64, batch: usize) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed.wrapping_add(batch as u64))
}

/// Axis-aligned box that rejection sampling draws from.
#[derive(Debug, Clone, PartialEq)]
pub struct Region {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl Region {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Self {
        assert_eq!(lo.len(), hi.len());
        assert!(
            lo.iter().zip(&hi).all(|(a, b)| a < b),
            "degenerate sampling box"
        );
        Self { lo, hi }
    }

    /// The default box for a domain: `[-1,1]^(n-1) x (0,1]` for the half-space,
    /// `[-1,1]^n` otherwise (the discretized case pads the boundary's bounding box by 1).
    pub fn default_for(domain: &Domain) -> Self {
        let n = domain.dim();
        match domain.kind() {
            DomainKind::HalfSpace => {
                let mut lo = vec![-1.0; n];
                lo[n - 1] = 0.0;
                Self::new(lo, vec![1.0; n])
            }
            DomainKind::UnitBall | DomainKind::PuncturedSpace => {
                Self::new(vec![-1.0; n], vec![1.0; n])
            }
            DomainKind::DiscretizedBoundary => {
                let mut lo = vec![f64::INFINITY; n];
                let mut hi = vec![f64::NEG_INFINITY; n];
                for b in domain.boundary_points() {
                    for (i, &c) in b.coords().iter().enumerate() {
                        lo[i] = lo[i].min(c - 1.0);
                        hi[i] = hi[i].max(c + 1.0);
                    }
                }
                Self::new(lo, hi)
            }
        }
    }
}

/// Draws a point of `region` lying in `domain` with boundary clearance at least `margin`.
pub fn sample_in<R: Rng>(domain: &Domain, region: &Region, margin: f64, rng: &mut R) -> Point {
    loop {
        let coords: Vec<f64> = region
            .lo
            .iter()
            .zip(&region.hi)
            .map(|(&a, &b)| rng.gen_range(a..b))
            .collect();
        let p = Point::from_vec(coords);
        if domain.contains(&p).unwrap_or(false) && domain.boundary_distance_unchecked(&p) >= margin
        {
            return p;
        }
    }
}

/// A boundary point nearest to `x`.
pub fn nearest_boundary_point(domain: &Domain, x: &Point) -> Point {
    match domain.kind() {
        DomainKind::HalfSpace => x.foot(),
        DomainKind::UnitBall => x.scaled(1.0 / x.norm()),
        DomainKind::PuncturedSpace => Point::origin(x.dim()),
        DomainKind::DiscretizedBoundary => domain
            .boundary_points()
            .iter()
            .min_by(|a, b| x.dist(a).total_cmp(&x.dist(b)))
            .cloned()
            .expect("discretized domains have boundary points"),
    }
}

/// Every `EXTREMAL_EVERY`-th generated pair lies on a segment from a nearest
/// boundary point, where several of the comparison inequalities are tight.
pub const EXTREMAL_EVERY: usize = 8;

fn extremal_pair<R: Rng>(
    domain: &Domain,
    region: &Region,
    margin: f64,
    rng: &mut R,
) -> (Point, Point) {
    loop {
        let x = sample_in(domain, region, margin, rng);
        if domain.kind() == DomainKind::UnitBall && x.norm() < 1e-6 {
            continue;
        }
        let u = nearest_boundary_point(domain, &x);
        let k = rng.gen_range(0.0..1.0);
        let y = u.lerp(&x, k);
        if domain.contains(&y).unwrap_or(false) && domain.boundary_distance_unchecked(&y) >= margin
        {
            return (x, y);
        }
    }
}

/// `count` seeded pairs of interior points, with extremal pairs mixed in when
/// `extremal` is set. Deterministic for a given seed.
pub fn pairs(
    domain: &Domain,
    region: &Region,
    count: usize,
    seed: u64,
    margin: f64,
    extremal: bool,
) -> Vec<(Point, Point)> {
    let batches = count.div_ceil(BATCH_SIZE);
    par::map_indexed(batches, |b| {
        let mut rng = batch_rng(seed, b);
        let len = BATCH_SIZE.min(count - b * BATCH_SIZE);
        (0..len)
            .map(|i| {
                if extremal && (b * BATCH_SIZE + i) % EXTREMAL_EVERY == EXTREMAL_EVERY - 1 {
                    extremal_pair(domain, region, margin, &mut rng)
                } else {
                    let x = sample_in(domain, region, margin, &mut rng);
                    let y = sample_in(domain, region, margin, &mut rng);
                    (x, y)
                }
            })
            .collect::<Vec<_>>()
    })
    .into_iter()
    .flatten()
    .collect()
}

/// `count` seeded triples of interior points.
pub fn triples(
    domain: &Domain,
    region: &Region,
    count: usize,
    seed: u64,
    margin: f64,
) -> Vec<[Point; 3]> {
    let batches = count.div_ceil(BATCH_SIZE);
    par::map_indexed(batches, |b| {
        let mut rng = batch_rng(seed, b);
        let len = BATCH_SIZE.min(count - b * BATCH_SIZE);
        (0..len)
            .map(|_| {
                [
                    sample_in(domain, region, margin, &mut rng),
                    sample_in(domain, region, margin, &mut rng),
                    sample_in(domain, region, margin, &mut rng),
                ]
            })
            .collect::<Vec<_>>()
    })
    .into_iter()
    .flatten()
    .collect()
}

/// `count` seeded single points.
pub fn points(
    domain: &Domain,
    region: &Region,
    count: usize,
    seed: u64,
    margin: f64,
) -> Vec<Point> {
    let batches = count.div_ceil(BATCH_SIZE);
    par::map_indexed(batches, |b| {
        let mut rng = batch_rng(seed, b);
        let len = BATCH_SIZE.min(count - b * BATCH_SIZE);
        (0..len)
            .map(|_| sample_in(domain, region, margin, &mut rng))
            .collect::<Vec<_>>()
    })
    .into_iter()
    .flatten()
    .collect()
}
