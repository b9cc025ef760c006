//! Unit-edge paths and odd cycles on 2-spheres, and pentagon frames.
//!
//! On a 2-sphere of radius `r > √½`, a point `u` can be joined to any
//! point within `γ(ε) = sin(ε/2)·sin(ε/4)` by a path of four unit edges
//! whose odd vertices stay near a unit-distance partner of `u`. Walking
//! such paths along a curve from `u` to a point at distance 1 and closing
//! with the edge back to `u` gives an odd cycle.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coloring::{find_odd_cycle, is_odd_cycle};
use crate::geom::SphereDescriptor;
use crate::linalg;
use crate::point::{FloatPoint, Point};
use crate::udg::{build_udg, Predicate, UdgError, UnitDistanceGraph};

/// Tolerance on unit edges and sphere membership.
pub const PATH_TOL: f64 = 1e-9;
/// Default number of polyline samples for curves.
pub const DEFAULT_CURVE_SAMPLES: usize = 10_000;
/// Fraction of the reach radius used per step along a curve.
pub const STEP_FRACTION: f64 = 0.9;

const COMPASS_ITERS: usize = 400;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ConstructionError {
    #[error("sphere radius {r} must exceed sqrt(1/2)")]
    RadiusTooSmall { r: f64 },
    #[error("eps = {0} must lie in (0, 1)")]
    Eps(f64),
    #[error("target is {dist:e} from u, beyond the reach radius {gamma:e}")]
    OutOfReach { dist: f64, gamma: f64 },
    #[error("expected a 2-sphere, got dimension {0}")]
    NotTwoSphere(usize),
    #[error("no convergence: residual {residual:e}")]
    NoConvergence { residual: f64 },
    #[error("curve diameter {diameter} does not exceed the threshold sqrt(4r^2-1)/r = {threshold}")]
    DiameterTooSmall { diameter: f64, threshold: f64 },
    #[error("no curve point at distance 1 from the start")]
    NoPartner,
    #[error("point leaves the eps-neighbourhood of the curve (distance {0})")]
    LeftNeighbourhood(f64),
    #[error("nu = {0} must lie in [0, 1)")]
    Nu(f64),
    #[error("point must have at least 3 coordinates, all zero beyond the third")]
    PentagonBase,
    #[error(transparent)]
    Udg(#[from] UdgError),
}

/// Reach radius `γ(ε) = sin(ε/2)·sin(ε/4)`.
pub fn reach_radius(eps: f64) -> f64 {
    (eps / 2.0).sin() * (eps / 4.0).sin()
}

type V3 = [f64; 3];

fn dot3(a: &V3, b: &V3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn cross(a: &V3, b: &V3) -> V3 {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

fn add(a: &V3, b: &V3, s: f64) -> V3 {
    [a[0] + s * b[0], a[1] + s * b[1], a[2] + s * b[2]]
}

fn norm3(a: &V3) -> f64 {
    dot3(a, a).sqrt()
}

fn dist3(a: &V3, b: &V3) -> f64 {
    norm3(&add(a, b, -1.0))
}

fn scale(a: &V3, s: f64) -> V3 {
    [a[0] * s, a[1] * s, a[2] * s]
}

/// A 2-sphere with local coordinates: global `center + Σ xᵢ·basisᵢ`.
#[derive(Debug, Clone)]
struct Frame<'a> {
    sph: &'a SphereDescriptor,
}

impl Frame<'_> {
    fn local(&self, p: &[f64]) -> V3 {
        let rel = linalg::sub(p, &self.sph.center);
        let mut out = [0.0; 3];
        for (o, b) in out.iter_mut().zip(&self.sph.basis) {
            *o = linalg::dot(&rel, b);
        }
        out
    }

    fn global(&self, x: &V3) -> Vec<f64> {
        let mut p = self.sph.center.clone();
        for (xi, b) in x.iter().zip(&self.sph.basis) {
            linalg::axpy(*xi, b, &mut p);
        }
        p
    }
}

/// Orthonormal tangent pair at `u`.
fn tangent_basis(u: &V3) -> (V3, V3) {
    let axis = if u[0].abs() <= u[1].abs() && u[0].abs() <= u[2].abs() {
        [1.0, 0.0, 0.0]
    } else if u[1].abs() <= u[2].abs() {
        [0.0, 1.0, 0.0]
    } else {
        [0.0, 0.0, 1.0]
    };
    let t1 = cross(u, &axis);
    let t1 = scale(&t1, 1.0 / norm3(&t1));
    let t2 = cross(u, &t1);
    let t2 = scale(&t2, 1.0 / norm3(&t2));
    (t1, t2)
}

/// The two points of `S²_r` at distance 1 from both `p` and `q`, or `None`
/// when they do not exist or `p ≈ q`.
fn common_unit_neighbors(r: f64, p: &V3, q: &V3) -> Option<(V3, V3)> {
    let c = r * r - 0.5;
    let pp = dot3(p, p);
    let qq = dot3(q, q);
    let pq = dot3(p, q);
    let det = pp * qq - pq * pq;
    if det <= 1e-18 * pp * qq {
        return None;
    }
    let alpha = c * (qq - pq) / det;
    let beta = c * (pp - pq) / det;
    let base = add(&scale(p, alpha), q, beta);
    let h2 = r * r - dot3(&base, &base);
    if h2 < 0.0 {
        return None;
    }
    let n = cross(p, q);
    let n = scale(&n, h2.sqrt() / norm3(&n));
    Some((add(&base, &n, 1.0), add(&base, &n, -1.0)))
}

fn closest(pair: (V3, V3), to: &V3) -> V3 {
    if dist3(&pair.0, to) <= dist3(&pair.1, to) {
        pair.0
    } else {
        pair.1
    }
}

/// Point of the unit-neighbour circle of `u` in tangent direction `phi`.
fn unit_neighbor(r: f64, u: &V3, phi: f64) -> V3 {
    let c = r * r - 0.5;
    let along = c / (r * r);
    let rho = (r * r - c * c / (r * r)).sqrt();
    let (t1, t2) = tangent_basis(u);
    let dir = add(&scale(&t1, phi.cos()), &t2, phi.sin());
    add(&scale(u, along), &dir, rho)
}

/// Geodesic point at arc length `l` from `u` in tangent direction `psi`.
fn exp_map(r: f64, u: &V3, l: f64, psi: f64) -> V3 {
    let (t1, t2) = tangent_basis(u);
    let dir = add(&scale(&t1, psi.cos()), &t2, psi.sin());
    let theta = l / r;
    add(&scale(u, theta.cos()), &dir, r * theta.sin())
}

/// `u, v1, v2, v3, v4` with unit edges and `v4 = target`; `v1`, `v3` kept
/// near `anchor` and `v2` near `u`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FourStepPath {
    pub vertices: [Vec<f64>; 5],
    /// Largest of `|v1 − anchor|`, `|v2 − u|`, `|v3 − anchor|`.
    pub spread: f64,
    /// Largest edge-length or sphere-membership error.
    pub residual: f64,
}

fn check_sphere(sph: &SphereDescriptor) -> Result<(), ConstructionError> {
    if sph.sphere_dim() != 2 {
        return Err(ConstructionError::NotTwoSphere(sph.sphere_dim()));
    }
    if sph.radius <= std::f64::consts::FRAC_1_SQRT_2 {
        return Err(ConstructionError::RadiusTooSmall { r: sph.radius });
    }
    Ok(())
}

/// Four unit edges from `u` to `target` on a 2-sphere of radius `r > √½`,
/// for `|target − u| ≤ γ(eps)`. `anchor` defaults to a unit neighbour of
/// `u`.
pub fn four_step_path(
    sph: &SphereDescriptor,
    u: &[f64],
    target: &[f64],
    eps: f64,
    anchor: Option<&[f64]>,
) -> Result<FourStepPath, ConstructionError> {
    check_sphere(sph)?;
    if !(eps > 0.0 && eps < 1.0) {
        return Err(ConstructionError::Eps(eps));
    }
    let gamma = reach_radius(eps);
    let dist = linalg::dist(u, target);
    if dist > gamma * (1.0 + 1e-12) {
        return Err(ConstructionError::OutOfReach { dist, gamma });
    }
    let f = Frame { sph };
    let r = sph.radius;
    let ul = f.local(u);
    let tl = f.local(target);
    let al = anchor.map(|a| f.local(a)).unwrap_or_else(|| unit_neighbor(r, &ul, 0.0));

    let build = |l: f64, psi: f64| -> Option<(f64, [V3; 3])> {
        let v2 = exp_map(r, &ul, l, psi);
        let v1 = closest(common_unit_neighbors(r, &ul, &v2)?, &al);
        let v3 = closest(common_unit_neighbors(r, &v2, &tl)?, &al);
        let spread = dist3(&v1, &al).max(dist3(&v2, &ul)).max(dist3(&v3, &al));
        Some((spread, [v1, v2, v3]))
    };

    let inner = if dist <= 1e-14 {
        // zero displacement: out to the anchor's side and straight back twice
        let (t1, t2) = tangent_basis(&ul);
        let v1 = unit_neighbor(r, &ul, dot3(&al, &t2).atan2(dot3(&al, &t1)));
        [v1, ul, v1]
    } else {
        let reach = 4.0 * dist.max(1e-9);
        let mut best: Option<(f64, f64, f64)> = None;
        for i in 1..=24 {
            let l = reach * i as f64 / 24.0;
            for j in 0..48 {
                let psi = std::f64::consts::TAU * j as f64 / 48.0;
                if let Some((s, _)) = build(l, psi) {
                    if best.is_none_or(|b| s < b.0) {
                        best = Some((s, l, psi));
                    }
                }
            }
        }
        let (mut s, mut l, mut psi) = best.ok_or(ConstructionError::NoConvergence { residual: f64::INFINITY })?;
        // compass search
        let (mut dl, mut dpsi) = (reach / 24.0, std::f64::consts::TAU / 48.0);
        let mut iters = 0;
        while dl > 1e-10 * reach && iters < COMPASS_ITERS {
            iters += 1;
            let mut moved = false;
            for (a, b) in [(dl, 0.0), (-dl, 0.0), (0.0, dpsi), (0.0, -dpsi)] {
                if let Some((t, _)) = build((l + a).abs(), psi + b) {
                    if t < s {
                        (s, l, psi) = (t, (l + a).abs(), psi + b);
                        moved = true;
                    }
                }
            }
            if !moved {
                dl /= 2.0;
                dpsi /= 2.0;
            }
        }
        build(l, psi).expect("evaluated before").1
    };

    let chain = [ul, inner[0], inner[1], inner[2], tl];
    let mut residual: f64 = 0.0;
    for w in chain.windows(2) {
        residual = residual.max((dist3(&w[0], &w[1]) - 1.0).abs());
    }
    let vertices = chain.map(|x| f.global(&x));
    for v in &vertices {
        residual = residual.max(sph.residual(v));
    }
    let spread = dist3(&inner[0], &al).max(dist3(&inner[1], &ul)).max(dist3(&inner[2], &al));
    if residual > PATH_TOL {
        return Err(ConstructionError::NoConvergence { residual });
    }
    Ok(FourStepPath {
        vertices,
        spread,
        residual,
    })
}

/// Polyline stand-in for a curve on a 2-sphere.
#[derive(Debug, Clone, PartialEq)]
pub struct SphereCurve {
    pub sphere: SphereDescriptor,
    pub samples: Vec<Vec<f64>>,
    pub diameter: f64,
}

impl SphereCurve {
    pub fn from_samples(sphere: SphereDescriptor, samples: Vec<Vec<f64>>) -> Self {
        let diameter = (0..samples.len())
            .into_par_iter()
            .map(|i| {
                samples[i + 1..]
                    .iter()
                    .map(|q| linalg::dist(&samples[i], q))
                    .fold(0.0, f64::max)
            })
            .reduce(|| 0.0, f64::max);
        SphereCurve {
            sphere,
            samples,
            diameter,
        }
    }

    /// Arc of the great circle through the first two basis directions,
    /// from angle `start` to `end`, with `count` samples.
    pub fn great_circle_arc(sphere: SphereDescriptor, start: f64, end: f64, count: usize) -> Self {
        let samples = (0..count)
            .map(|i| {
                let t = start + (end - start) * i as f64 / (count - 1) as f64;
                let mut p = sphere.center.clone();
                linalg::axpy(sphere.radius * t.cos(), &sphere.basis[0], &mut p);
                linalg::axpy(sphere.radius * t.sin(), &sphere.basis[1], &mut p);
                p
            })
            .collect();
        Self::from_samples(sphere, samples)
    }

    pub fn great_circle(sphere: SphereDescriptor, count: usize) -> Self {
        Self::great_circle_arc(sphere, 0.0, std::f64::consts::TAU * (1.0 - 1.0 / count as f64), count)
    }

    /// Distance from `p` to the polyline.
    pub fn distance_to(&self, p: &[f64]) -> f64 {
        self.samples
            .windows(2)
            .map(|w| segment_distance(p, &w[0], &w[1]))
            .fold(f64::INFINITY, f64::min)
    }

    /// Point at fractional polyline parameter `s ∈ [0, len−1]`, pushed
    /// back onto the sphere.
    fn at(&self, s: f64) -> Vec<f64> {
        let i = (s.floor() as usize).min(self.samples.len() - 2);
        let t = s - i as f64;
        let a = &self.samples[i];
        let b = &self.samples[i + 1];
        let lin: Vec<f64> = a.iter().zip(b).map(|(x, y)| x + t * (y - x)).collect();
        let rel = linalg::sub(&lin, &self.sphere.center);
        let n = linalg::norm(&rel);
        let mut p = self.sphere.center.clone();
        linalg::axpy(self.sphere.radius / n, &rel, &mut p);
        p
    }

    /// Smallest parameter `s ≥ from` where the distance to `p` crosses 1.
    fn unit_crossing(&self, p: &[f64], from: f64) -> Option<f64> {
        let start = from.floor() as usize;
        let g = |s: f64| linalg::dist(&self.at(s), p) - 1.0;
        let mut prev = from;
        let mut gp = g(prev);
        for i in start + 1..self.samples.len() {
            let s = i as f64;
            let gs = g(s);
            if gp == 0.0 {
                return Some(prev);
            }
            if gp.signum() != gs.signum() {
                let (mut lo, mut hi) = (prev, s);
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if g(mid).signum() == gp.signum() {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                    if hi - lo < 1e-15 {
                        break;
                    }
                }
                return Some(0.5 * (lo + hi));
            }
            prev = s;
            gp = gs;
        }
        None
    }
}

fn segment_distance(p: &[f64], a: &[f64], b: &[f64]) -> f64 {
    let ab = linalg::sub(b, a);
    let ap = linalg::sub(p, a);
    let len2 = linalg::dot(&ab, &ab);
    let t = if len2 > 0.0 { (linalg::dot(&ap, &ab) / len2).clamp(0.0, 1.0) } else { 0.0 };
    let mut q = a.to_vec();
    linalg::axpy(t, &ab, &mut q);
    linalg::dist(p, &q)
}

#[derive(Debug, Clone, PartialEq)]
pub struct OddCycleConstruction {
    pub graph: UnitDistanceGraph<f64>,
    /// Cycle through graph vertex indices, closing back to the first.
    pub cycle: Vec<usize>,
    pub steps: usize,
    pub gamma: f64,
    pub max_edge_residual: f64,
    /// Largest distance from an emitted point to the curve.
    pub max_curve_distance: f64,
}

/// Odd cycle of unit edges inside the `eps`-neighbourhood of `curve`.
pub fn odd_cycle_on_curve(curve: &SphereCurve, eps: f64) -> Result<OddCycleConstruction, ConstructionError> {
    let sph = &curve.sphere;
    check_sphere(sph)?;
    if !(eps > 0.0 && eps < 1.0) {
        return Err(ConstructionError::Eps(eps));
    }
    let r = sph.radius;
    let threshold = (4.0 * r * r - 1.0).sqrt() / r;
    if curve.diameter <= threshold {
        return Err(ConstructionError::DiameterTooSmall {
            diameter: curve.diameter,
            threshold,
        });
    }
    let gamma = reach_radius(eps);
    let step = STEP_FRACTION * gamma;
    let u = curve.samples[0].clone();
    let s_v = curve.unit_crossing(&u, 0.0).ok_or(ConstructionError::NoPartner)?;
    let v = curve.at(s_v);

    // stations along the curve from u to v, consecutive ones ≤ step apart
    let mut stations = vec![(0.0, u.clone())];
    let mut s = 0.0;
    loop {
        let last = stations.last().expect("station").1.clone();
        if linalg::dist(&last, &v) <= step {
            stations.push((s_v, v.clone()));
            break;
        }
        let (mut lo, mut hi) = (s, s_v);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if linalg::dist(&curve.at(mid), &last) <= step {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo < 1e-13 {
                break;
            }
        }
        s = lo;
        stations.push((s, curve.at(s)));
    }

    let mut points: Vec<Vec<f64>> = vec![u.clone()];
    let mut partner_s = s_v;
    for pair in stations.windows(2) {
        let from = &pair[0].1;
        let to = &pair[1].1;
        // partner: the unit crossing nearest the previous one
        let back = (partner_s - 2.0).max(0.0);
        partner_s = curve.unit_crossing(from, back).ok_or(ConstructionError::NoPartner)?;
        let anchor = curve.at(partner_s);
        let path = four_step_path(sph, from, to, eps, Some(&anchor))?;
        points.extend(path.vertices[1..].iter().cloned());
    }
    // the last station is v itself; the closing edge v–u completes the cycle
    let cycle_len = points.len();
    let mut max_edge_residual: f64 = 0.0;
    for i in 0..cycle_len {
        let d = linalg::dist(&points[i], &points[(i + 1) % cycle_len]);
        max_edge_residual = max_edge_residual.max((d - 1.0).abs());
    }
    if max_edge_residual > PATH_TOL {
        return Err(ConstructionError::NoConvergence {
            residual: max_edge_residual,
        });
    }
    let max_curve_distance = points
        .par_iter()
        .map(|p| curve.distance_to(p))
        .reduce(|| 0.0, f64::max);
    if max_curve_distance >= eps {
        return Err(ConstructionError::LeftNeighbourhood(max_curve_distance));
    }
    let fps: Vec<FloatPoint> = points.iter().map(|p| Point::plain(p.clone())).collect();
    let graph = build_udg(fps, Predicate::Tolerance(PATH_TOL), None)?;
    let index_of = |p: &Vec<f64>| {
        graph
            .points
            .iter()
            .position(|q| linalg::dist(q.coords(), p) < crate::scalar::TAU_GEOM)
            .expect("deduplicated point")
    };
    let mut cycle: Vec<usize> = points.iter().map(index_of).collect();
    if cycle.first() == cycle.last() && cycle.len() > 1 {
        cycle.pop();
    }
    let g = graph.graph();
    if !is_odd_cycle(&g, &cycle) && find_odd_cycle(&g).is_none() {
        return Err(ConstructionError::NoConvergence { residual: f64::NAN });
    }
    Ok(OddCycleConstruction {
        graph,
        cycle,
        steps: stations.len() - 1,
        gamma,
        max_edge_residual,
        max_curve_distance,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PentagonFrame {
    pub u: Vec<f64>,
    pub nu: f64,
    pub w: Vec<Vec<f64>>,
}

/// `w_k = (u₁, u₂, u₃, ν cos(2πk/5), ν sin(2πk/5), 0, …)` for `k = 0..5`;
/// the output has at least six coordinates.
pub fn pentagon_points(u: &[f64], nu: f64) -> Result<PentagonFrame, ConstructionError> {
    if !(0.0..1.0).contains(&nu) {
        return Err(ConstructionError::Nu(nu));
    }
    if u.len() < 3 || u[3..].iter().any(|&x| x != 0.0) {
        return Err(ConstructionError::PentagonBase);
    }
    let dim = u.len().max(6);
    let w = (0..5)
        .map(|k| {
            let angle = std::f64::consts::TAU * k as f64 / 5.0;
            let mut p = vec![0.0; dim];
            p[..3].copy_from_slice(&u[..3]);
            p[3] = nu * angle.cos();
            p[4] = nu * angle.sin();
            p
        })
        .collect();
    Ok(PentagonFrame { u: u.to_vec(), nu, w })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sphere(r: f64) -> SphereDescriptor {
        SphereDescriptor {
            center: vec![0.0; 3],
            radius: r,
            basis: vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]],
        }
    }

    #[test]
    fn reach_radius_values() {
        assert!((reach_radius(0.2) - 0.1f64.sin() * 0.05f64.sin()).abs() < 1e-15);
        assert!((reach_radius(0.2) - 0.004_989_59).abs() < 1e-8);
        let mut prev = 0.0;
        for i in 1..100 {
            let e = i as f64 / 100.0;
            let g = reach_radius(e);
            assert!(g > prev && g < e);
            prev = g;
        }
    }

    #[test]
    fn degenerate_path() {
        let s = sphere(0.9);
        let u = vec![0.9, 0.0, 0.0];
        let p = four_step_path(&s, &u, &u, 0.2, None).unwrap();
        assert_eq!(p.vertices[2], u);
        assert_eq!(p.vertices[4], u);
        assert!(p.residual < 1e-12);
    }

    #[test]
    fn path_at_reach_radius() {
        let s = sphere(0.9);
        let u = vec![0.9, 0.0, 0.0];
        let gamma = reach_radius(0.2);
        let theta = 2.0 * (gamma / (2.0 * 0.9)).asin();
        let target = vec![0.9 * theta.cos(), 0.9 * theta.sin() * 0.6, 0.9 * theta.sin() * 0.8];
        assert!((linalg::dist(&u, &target) - gamma).abs() < 1e-15);
        let p = four_step_path(&s, &u, &target, 0.2, None).unwrap();
        assert!(p.residual < 1e-9, "residual {}", p.residual);
        assert!(linalg::dist(&p.vertices[4], &target) < 1e-9);
        assert!(p.spread < 0.2);
    }

    #[test]
    fn preconditions() {
        let u = vec![0.6, 0.0, 0.0];
        assert!(matches!(
            four_step_path(&sphere(0.6), &u, &u, 0.2, None),
            Err(ConstructionError::RadiusTooSmall { .. })
        ));
        let u = vec![0.9, 0.0, 0.0];
        let far = vec![0.0, 0.9, 0.0];
        assert!(matches!(
            four_step_path(&sphere(0.9), &u, &far, 0.2, None),
            Err(ConstructionError::OutOfReach { .. })
        ));
        let c = SphereCurve::great_circle(sphere(0.75), 500);
        assert!(matches!(odd_cycle_on_curve(&c, 1.0), Err(ConstructionError::Eps(_))));
        let short = SphereCurve::great_circle_arc(sphere(0.75), 0.0, 0.5, 100);
        assert!(matches!(
            odd_cycle_on_curve(&short, 0.2),
            Err(ConstructionError::DiameterTooSmall { .. })
        ));
    }

    #[test]
    fn pentagon_shape() {
        let f = pentagon_points(&[0.1, 0.2, 0.3], 0.25).unwrap();
        let side = 2.0 * 0.25 * (std::f64::consts::PI / 5.0).sin();
        for k in 0..5 {
            assert!((linalg::dist(&f.w[k], &f.w[(k + 1) % 5]) - side).abs() < 1e-15);
        }
        let z = pentagon_points(&[0.1, 0.2, 0.3], 0.0).unwrap();
        assert!(z.w.iter().all(|p| p[..3] == [0.1, 0.2, 0.3] && p[3..].iter().all(|&x| x == 0.0)));
        assert!(pentagon_points(&[0.1, 0.2, 0.3, 0.4], 0.1).is_err());
    }
}
