//! Level sets of `y -> m(center, y)` in planar domains, extracted by marching
//! squares over a lattice, plus circle fitting and CSV/SVG writers.
//!
//! Level sets are traced on a grid rather than by bisecting along rays from
//! the center: nothing guarantees the metrics are monotone along such rays,
//! and a ray search could silently miss parts of a ball.

use std::collections::HashMap;
use std::fmt::Write as _;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geom::{Domain, DomainKind, Point, BOUNDARY_EPS};
use crate::metrics::{self, MetricKind};
use crate::par;
use crate::solvers::SolverConfig;

/// One closed loop of a metric-ball boundary. The last vertex repeats the first.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContourPolyline {
    pub level: f64,
    pub metric: MetricKind,
    pub center: Point,
    pub vertices: Vec<[f64; 2]>,
}

impl ContourPolyline {
    pub fn is_closed(&self) -> bool {
        match (self.vertices.first(), self.vertices.last()) {
            (Some(a), Some(b)) => (a[0] - b[0]).hypot(a[1] - b[1]) <= 1e-9,
            _ => false,
        }
    }
}

/// The loops found together with the lattice they were traced on.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Contour {
    pub polylines: Vec<ContourPolyline>,
    pub lo: [f64; 2],
    pub hi: [f64; 2],
    pub grid_n: usize,
}

impl Contour {
    /// Largest lattice step.
    pub fn spacing(&self) -> f64 {
        let steps = (self.grid_n - 1) as f64;
        ((self.hi[0] - self.lo[0]) / steps).max((self.hi[1] - self.lo[1]) / steps)
    }
}

/// `t` with `m(center, y) < level  =>  th(rho(center, y)/2) < t`, following from
/// the comparison inequalities between the metrics.
fn th_bound(domain: &Domain, metric: MetricKind, level: f64) -> f64 {
    let half = domain.kind() == DomainKind::HalfSpace;
    let convex = domain.is_convex();
    let jstar_factor = if convex { 2.0 * 2f64.sqrt() } else { 4.0 };
    match metric {
        MetricKind::ThRhoHalf => level,
        MetricKind::Rho => (level / 2.0).tanh(),
        MetricKind::CTilde => level,
        MetricKind::S if half => level,
        MetricKind::S => 2.0 * level,
        MetricKind::JStar => jstar_factor * level,
        // j* = tanh(j/2)
        MetricKind::J => jstar_factor * (level / 2.0).tanh(),
    }
}

/// `T` with `m(center, y) < level  =>  c(center, y) < T` on the punctured plane.
fn ctilde_bound(domain: &Domain, metric: MetricKind, level: f64) -> f64 {
    match metric {
        MetricKind::CTilde => level,
        _ => th_bound(domain, metric, level),
    }
}

/// Bounding box of the lattice: a padded box around a region known to contain the ball.
fn window(
    domain: &Domain,
    metric: MetricKind,
    center: &Point,
    level: f64,
) -> Result<([f64; 2], [f64; 2])> {
    let c = center.coords();
    let (mid, radius) = match domain.kind() {
        DomainKind::HalfSpace => {
            let t = th_bound(domain, metric, level);
            if t >= 1.0 {
                return Err(Error::Config(format!(
                    "{metric} balls of radius {level} are not known to be bounded in the half-plane"
                )));
            }
            let q = 1.0 - t * t;
            ([c[0], c[1] * (1.0 + t * t) / q], c[1] * 2.0 * t / q)
        }
        DomainKind::UnitBall => {
            let t = th_bound(domain, metric, level);
            if t >= 1.0 {
                return Ok(([-1.0, -1.0], [1.0, 1.0]));
            }
            let r2 = center.norm().powi(2);
            let q = 1.0 - r2 * t * t;
            let shrink = (1.0 - t * t) / q;
            ([c[0] * shrink, c[1] * shrink], t * (1.0 - r2) / q)
        }
        DomainKind::PuncturedSpace => {
            let t = ctilde_bound(domain, metric, level);
            if t >= 1.0 {
                return Err(Error::Config(format!(
                    "{metric} balls of radius {level} are not known to be bounded in the punctured plane"
                )));
            }
            ([c[0], c[1]], center.norm() * t / (1.0 - t))
        }
        DomainKind::DiscretizedBoundary => {
            return Err(Error::Config("contours need a closed-form domain".into()));
        }
    };
    let pad = 1.1 * radius;
    let mut lo = [mid[0] - pad, mid[1] - pad];
    let mut hi = [mid[0] + pad, mid[1] + pad];
    match domain.kind() {
        DomainKind::HalfSpace => lo[1] = lo[1].max(0.0),
        DomainKind::UnitBall => {
            for i in 0..2 {
                lo[i] = lo[i].max(-1.0);
                hi[i] = hi[i].min(1.0);
            }
        }
        _ => {}
    }
    Ok((lo, hi))
}

/// Traces `{y : m(center, y) = level}` in a planar domain on a
/// `grid_n x grid_n` lattice. Lattice rows are evaluated in parallel; the
/// output order depends only on the inputs.
pub fn metric_ball_contour(
    domain: &Domain,
    metric: MetricKind,
    center: &Point,
    level: f64,
    grid_n: usize,
    cfg: &SolverConfig,
) -> Result<Contour> {
    if domain.dim() != 2 {
        return Err(Error::Config("contours are planar only".into()));
    }
    if !metric.supports(domain.kind()) {
        return Err(Error::Config(format!(
            "{metric} is not available in the {}",
            domain.kind().name()
        )));
    }
    if !(level > 0.0 && level < metric.upper_bound()) {
        return Err(Error::Config(format!(
            "level {level} outside the range (0, {}) of {metric}",
            metric.upper_bound()
        )));
    }
    if grid_n < 8 {
        return Err(Error::Config(format!(
            "grid must have at least 8 nodes per side, got {grid_n}"
        )));
    }
    domain.require_interior(center)?;
    let (lo, hi) = window(domain, metric, center, level)?;
    let node = |i: usize, j: usize| {
        let fx = i as f64 / (grid_n - 1) as f64;
        let fy = j as f64 / (grid_n - 1) as f64;
        [lo[0] + fx * (hi[0] - lo[0]), lo[1] + fy * (hi[1] - lo[1])]
    };

    // Nodes outside the domain get +inf, i.e. they count as outside the ball.
    let rows = par::map_indexed(grid_n, |j| -> Result<Vec<f64>> {
        (0..grid_n)
            .map(|i| {
                let p = Point::from_vec(node(i, j).to_vec());
                let interior =
                    domain.contains(&p)? && domain.boundary_distance(&p)? >= BOUNDARY_EPS;
                if interior {
                    metrics::value(metric, domain, center, &p, cfg)
                } else {
                    Ok(f64::INFINITY)
                }
            })
            .collect()
    });
    let values: Vec<Vec<f64>> = rows.into_iter().collect::<Result<_>>()?;
    let f = |i: usize, j: usize| values[j][i] - level;

    // Edge ids: 2*(j*grid_n + i) is the edge from node (i,j) to (i+1,j),
    // 2*(j*grid_n + i) + 1 the edge from (i,j) to (i,j+1).
    let h_edge = |i: usize, j: usize| 2 * (j * grid_n + i);
    let v_edge = |i: usize, j: usize| 2 * (j * grid_n + i) + 1;
    let crossing = |a: [f64; 2], fa: f64, b: [f64; 2], fb: f64| -> [f64; 2] {
        let t = if !fa.is_finite() {
            1.0
        } else if !fb.is_finite() {
            0.0
        } else {
            fa / (fa - fb)
        };
        [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])]
    };

    let mut position: HashMap<usize, [f64; 2]> = HashMap::new();
    let mut segments: Vec<(usize, usize)> = Vec::new();
    for j in 0..grid_n - 1 {
        for i in 0..grid_n - 1 {
            // corners counter-clockwise from the lower left
            let vals = [f(i, j), f(i + 1, j), f(i + 1, j + 1), f(i, j + 1)];
            let inside = vals.map(|v| v < 0.0);
            let case = inside
                .iter()
                .enumerate()
                .fold(0, |acc, (k, &b)| acc | (usize::from(b) << k));
            if case == 0 || case == 15 {
                continue;
            }
            // edges: bottom, right, top, left
            let edges = [
                h_edge(i, j),
                v_edge(i + 1, j),
                h_edge(i, j + 1),
                v_edge(i, j),
            ];
            let ends = [
                (node(i, j), vals[0], node(i + 1, j), vals[1]),
                (node(i + 1, j), vals[1], node(i + 1, j + 1), vals[2]),
                (node(i, j + 1), vals[3], node(i + 1, j + 1), vals[2]),
                (node(i, j), vals[0], node(i, j + 1), vals[3]),
            ];
            let cut: Vec<usize> = (0..4)
                .filter(|&k| inside[k] != inside[(k + 1) % 4])
                .collect();
            for &k in &cut {
                position.entry(edges[k]).or_insert_with(|| {
                    let (a, fa, b, fb) = ends[k];
                    crossing(a, fa, b, fb)
                });
            }
            if cut.len() == 2 {
                segments.push((edges[cut[0]], edges[cut[1]]));
            } else {
                // saddle: decide by the cell-center average which diagonal pair is joined
                let finite: Vec<f64> = vals.iter().copied().filter(|v| v.is_finite()).collect();
                let mean = finite.iter().sum::<f64>() / finite.len() as f64;
                let center_inside = finite.len() == 4 && mean < 0.0;
                // corner 0 inside (case 5) vs corner 1 inside (case 10)
                let joined_around_0 = (case == 5) != center_inside;
                if joined_around_0 {
                    segments.push((edges[3], edges[0]));
                    segments.push((edges[1], edges[2]));
                } else {
                    segments.push((edges[0], edges[1]));
                    segments.push((edges[2], edges[3]));
                }
            }
        }
    }

    let mut at_edge: HashMap<usize, Vec<usize>> = HashMap::new();
    for (s, &(a, b)) in segments.iter().enumerate() {
        at_edge.entry(a).or_default().push(s);
        at_edge.entry(b).or_default().push(s);
    }
    let mut used = vec![false; segments.len()];
    let mut polylines = Vec::new();
    for start in 0..segments.len() {
        if used[start] {
            continue;
        }
        used[start] = true;
        let (first, mut current) = segments[start];
        let mut ids = vec![first, current];
        while current != first {
            let next = at_edge[&current]
                .iter()
                .copied()
                .find(|&s| !used[s])
                .ok_or_else(|| {
                    Error::Config("the level set reaches the edge of the lattice window".into())
                })?;
            used[next] = true;
            let (a, b) = segments[next];
            current = if a == current { b } else { a };
            ids.push(current);
        }
        polylines.push(ContourPolyline {
            level,
            metric,
            center: center.clone(),
            vertices: ids.iter().map(|e| position[e]).collect(),
        });
    }
    Ok(Contour {
        polylines,
        lo,
        hi,
        grid_n,
    })
}

/// Algebraic least-squares circle fit `x^2 + y^2 + D x + E y + F = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CircleFit {
    pub center: [f64; 2],
    pub radius: f64,
    /// max over the vertices of `| |v - center| - radius |`
    pub max_residual: f64,
}

pub fn fit_circle(vertices: &[[f64; 2]]) -> Result<CircleFit> {
    if vertices.len() < 3 {
        return Err(Error::Config(
            "a circle fit needs at least three vertices".into(),
        ));
    }
    // normal equations for (D, E, F)
    let mut a = [[0.0f64; 3]; 3];
    let mut rhs = [0.0f64; 3];
    for v in vertices {
        let row = [v[0], v[1], 1.0];
        let target = -(v[0] * v[0] + v[1] * v[1]);
        for r in 0..3 {
            for c in 0..3 {
                a[r][c] += row[r] * row[c];
            }
            rhs[r] += row[r] * target;
        }
    }
    let sol = solve3(a, rhs)
        .ok_or_else(|| Error::Config("vertices are degenerate for a circle fit".into()))?;
    let center = [-sol[0] / 2.0, -sol[1] / 2.0];
    let r2 = center[0] * center[0] + center[1] * center[1] - sol[2];
    if !(r2 > 0.0) {
        return Err(Error::Config(
            "vertices are degenerate for a circle fit".into(),
        ));
    }
    let radius = r2.sqrt();
    let max_residual = vertices
        .iter()
        .map(|v| ((v[0] - center[0]).hypot(v[1] - center[1]) - radius).abs())
        .fold(0.0, f64::max);
    Ok(CircleFit {
        center,
        radius,
        max_residual,
    })
}

/// Gaussian elimination with partial pivoting.
fn solve3(mut a: [[f64; 3]; 3], mut b: [f64; 3]) -> Option<[f64; 3]> {
    for col in 0..3 {
        let pivot = (col..3).max_by(|&r, &s| a[r][col].abs().total_cmp(&a[s][col].abs()))?;
        if a[pivot][col].abs() < 1e-300 {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for r in col + 1..3 {
            let m = a[r][col] / a[col][col];
            let pivot_row = a[col];
            for (dst, src) in a[r].iter_mut().zip(pivot_row).skip(col) {
                *dst -= m * src;
            }
            b[r] -= m * b[col];
        }
    }
    let mut x = [0.0; 3];
    for r in (0..3).rev() {
        let tail: f64 = (r + 1..3).map(|c| a[r][c] * x[c]).sum();
        x[r] = (b[r] - tail) / a[r][r];
    }
    Some(x)
}

/// `loop_id,vertex_id,x,y` rows with a header line.
pub fn to_csv(polylines: &[ContourPolyline]) -> String {
    let mut out = String::from("loop_id,vertex_id,x,y\n");
    for (l, poly) in polylines.iter().enumerate() {
        for (v, p) in poly.vertices.iter().enumerate() {
            let _ = writeln!(out, "{l},{v},{},{}", p[0], p[1]);
        }
    }
    out
}

/// Standalone SVG drawing each loop as a closed path, with the unit circle or
/// the boundary line (or the puncture) for context.
pub fn to_svg(domain: &Domain, contour: &Contour) -> String {
    const SIZE: f64 = 512.0;
    let (mut lo, mut hi) = (contour.lo, contour.hi);
    if domain.kind() == DomainKind::UnitBall {
        (lo, hi) = ([-1.05, -1.05], [1.05, 1.05]);
    }
    let span = (hi[0] - lo[0]).max(hi[1] - lo[1]);
    let scale = SIZE / span;
    let sx = |x: f64| (x - lo[0]) * scale;
    let sy = |y: f64| SIZE - (y - lo[1]) * scale;
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    match domain.kind() {
        DomainKind::UnitBall => {
            let _ = writeln!(
                out,
                r#"<circle cx="{:.3}" cy="{:.3}" r="{:.3}" fill="none" stroke="gray"/>"#,
                sx(0.0),
                sy(0.0),
                scale
            );
        }
        DomainKind::HalfSpace => {
            let _ = writeln!(
                out,
                r#"<line x1="0" y1="{y:.3}" x2="{SIZE}" y2="{y:.3}" stroke="gray"/>"#,
                y = sy(0.0)
            );
        }
        _ => {
            let _ = writeln!(
                out,
                r#"<circle cx="{:.3}" cy="{:.3}" r="3" fill="gray"/>"#,
                sx(0.0),
                sy(0.0)
            );
        }
    }
    for poly in &contour.polylines {
        let mut d = String::new();
        for (k, v) in poly.vertices.iter().enumerate() {
            let _ = write!(
                d,
                "{}{:.3},{:.3} ",
                if k == 0 { "M" } else { "L" },
                sx(v[0]),
                sy(v[1])
            );
        }
        d.push('Z');
        let _ = writeln!(out, r#"<path d="{d}" fill="none" stroke="steelblue"/>"#);
    }
    if let Some(poly) = contour.polylines.first() {
        let c = poly.center.coords();
        let _ = writeln!(
            out,
            r#"<circle cx="{:.3}" cy="{:.3}" r="2.5" fill="crimson"/>"#,
            sx(c[0]),
            sy(c[1])
        );
    }
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(c: &[f64]) -> Point {
        Point::new(c.to_vec()).unwrap()
    }

    fn single_loop(c: &Contour) -> &ContourPolyline {
        assert_eq!(c.polylines.len(), 1);
        let l = &c.polylines[0];
        assert!(l.is_closed());
        l
    }

    #[test]
    fn hyperbolic_disk_ball_at_origin_is_round() {
        let d = Domain::unit_ball(2);
        let c = metric_ball_contour(
            &d,
            MetricKind::ThRhoHalf,
            &Point::origin(2),
            0.4,
            101,
            &SolverConfig::default(),
        )
        .unwrap();
        let l = single_loop(&c);
        for v in &l.vertices {
            assert!((v[0].hypot(v[1]) - 0.4).abs() < c.spacing() * 0.05);
        }
    }

    #[test]
    fn rho_ball_in_half_plane_is_euclidean_circle() {
        let d = Domain::half_space(2);
        let big_r = 1.0f64;
        let c = metric_ball_contour(
            &d,
            MetricKind::Rho,
            &p(&[0.3, 0.8]),
            big_r,
            121,
            &SolverConfig::default(),
        )
        .unwrap();
        let fit = fit_circle(&single_loop(&c).vertices).unwrap();
        assert!((fit.center[0] - 0.3).abs() < c.spacing());
        assert!((fit.center[1] - 0.8 * big_r.cosh()).abs() < c.spacing());
        assert!((fit.radius - 0.8 * big_r.sinh()).abs() < c.spacing());
        assert!(fit.max_residual < 2.0 * c.spacing());
    }

    #[test]
    fn level_validation() {
        let cfg = SolverConfig::default();
        let d = Domain::half_space(2);
        let c = p(&[0.0, 1.0]);
        assert!(metric_ball_contour(&d, MetricKind::CTilde, &c, 2.5, 50, &cfg).is_err());
        assert!(metric_ball_contour(&d, MetricKind::CTilde, &c, 0.0, 50, &cfg).is_err());
        assert!(metric_ball_contour(&d, MetricKind::JStar, &c, 0.9, 50, &cfg).is_err());
        assert!(metric_ball_contour(
            &Domain::half_space(3),
            MetricKind::CTilde,
            &p(&[0.0, 0.0, 1.0]),
            0.5,
            50,
            &cfg
        )
        .is_err());
        assert!(metric_ball_contour(&d, MetricKind::CTilde, &c, 0.5, 3, &cfg).is_err());
    }

    #[test]
    fn punctured_ctilde_ball() {
        let d = Domain::punctured(2);
        let c = metric_ball_contour(
            &d,
            MetricKind::CTilde,
            &p(&[1.0, 0.0]),
            0.5,
            101,
            &SolverConfig::default(),
        )
        .unwrap();
        let l = single_loop(&c);
        for v in &l.vertices {
            let m = metrics::value(
                MetricKind::CTilde,
                &d,
                &p(&[1.0, 0.0]),
                &p(v),
                &SolverConfig::default(),
            )
            .unwrap();
            assert!((m - 0.5).abs() < 0.02);
        }
    }

    #[test]
    fn circle_fit_exact() {
        let pts: Vec<[f64; 2]> = (0..12)
            .map(|k| {
                let a = k as f64 * 0.5;
                [1.0 + 2.0 * a.cos(), -3.0 + 2.0 * a.sin()]
            })
            .collect();
        let fit = fit_circle(&pts).unwrap();
        assert!((fit.center[0] - 1.0).abs() < 1e-10 && (fit.center[1] + 3.0).abs() < 1e-10);
        assert!((fit.radius - 2.0).abs() < 1e-10 && fit.max_residual < 1e-10);
        assert!(fit_circle(&pts[..2]).is_err());
    }

    #[test]
    fn writers() {
        let d = Domain::unit_ball(2);
        let c = metric_ball_contour(
            &d,
            MetricKind::ThRhoHalf,
            &p(&[0.2, 0.1]),
            0.3,
            40,
            &SolverConfig::default(),
        )
        .unwrap();
        let csv = to_csv(&c.polylines);
        assert!(csv.starts_with("loop_id,vertex_id,x,y\n"));
        assert_eq!(csv.lines().count(), 1 + c.polylines[0].vertices.len());
        let svg = to_svg(&d, &c);
        assert!(
            svg.contains("<path") && svg.contains("<circle") && svg.trim_end().ends_with("</svg>")
        );
    }
}
