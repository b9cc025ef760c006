//! Numeric replay of the ten-point skeleton in `ℝ³ × [0,ε]⁶`: a small
//! simplex `v₁..v₄` whose attached sphere has a 2-equator inside the slice,
//! three pentagon points `v₅..v₇` on that sphere, and the radius of the
//! sphere attached to all seven.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::geom::{attached_sphere_of_points, circumsphere_of_points, equator_toward, regular_simplex, GeomError, SphereDescriptor};
use crate::linalg;
use crate::point::{ExactPoint, FloatPoint, Point};
use crate::scalar::rational_from_f64;

pub const MAIN_DIM: usize = 3;
pub const SLAB_DIM: usize = 6;
pub const AMBIENT_DIM: usize = MAIN_DIM + SLAB_DIM;
/// Edge of the regular tetrahedron hosting the main blocks.
pub const TETRAHEDRON_EDGE: f64 = 4.898_979_485_566_356; // 2√6
/// Sampled candidates when maximizing the distance of `v₄` from a plane.
pub const V4_CANDIDATES: usize = 4096;
/// Sampled points of the 2-equator checked against the slice.
pub const EQUATOR_SAMPLES: usize = 4096;
/// Pentagon radius as a fraction of `eps`.
pub const NU_FRACTION: f64 = 0.05;
pub const UNIT_TOL: f64 = 1e-9;
pub const RADIUS_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ReplayError {
    #[error("need 0 < eps < 1, 0 < eps1 < eps/2 and 0 < delta < 1 (eps = {eps}, eps1 = {eps1}, delta = {delta})")]
    Precondition { eps: f64, eps1: f64, delta: f64 },
    #[error("no delta-separated triple on the slab sphere")]
    Separation,
    #[error(transparent)]
    Geom(#[from] GeomError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub value: f64,
    pub tol: f64,
    pub ok: bool,
}

impl Check {
    fn at_most(value: f64, tol: f64) -> Self {
        Check {
            value,
            tol,
            ok: value <= tol,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstructionReport {
    pub eps: f64,
    pub eps1: f64,
    pub delta: f64,
    pub seed: u64,
    /// Side of the mesh cell holding the main blocks of `v₁..v₄`.
    pub cell_side: f64,
    pub nu: f64,
    pub v: Vec<Vec<f64>>,
    pub circumradius_4: f64,
    pub r_attached_4: f64,
    /// Distance of the slab block of `v₄` from the plane of the other three.
    pub v4_plane_distance: f64,
    /// Angle between the 2-equator's subspace and the main axes.
    pub equator_tilt: f64,
    pub equator_in_slice: bool,
    pub r_attached_7: f64,
    /// `|r_attached_7 − √3/2|`.
    pub limit_gap: f64,
    pub residuals: BTreeMap<String, Check>,
    pub pass: bool,
}

fn slab_violation(p: &[f64], eps: f64) -> f64 {
    p[MAIN_DIM..].iter().map(|&y| (-y).max(y - eps).max(0.0)).fold(0.0, f64::max)
}

fn unit_violation(p: &[f64], others: &[Vec<f64>]) -> f64 {
    others.iter().map(|q| (linalg::dist(p, q) - 1.0).abs()).fold(0.0, f64::max)
}

fn point_on_sphere<R: Rng>(rng: &mut R, center: &[f64], radius: f64) -> Vec<f64> {
    let sph = SphereDescriptor {
        center: center.to_vec(),
        radius,
        basis: (0..center.len())
            .map(|i| {
                let mut e = vec![0.0; center.len()];
                e[i] = 1.0;
                e
            })
            .collect(),
    };
    sph.sample(rng)
}

fn plane_distance(p: &[f64], base: &[Vec<f64>]) -> f64 {
    let dirs: Vec<Vec<f64>> = base[1..].iter().map(|b| linalg::sub(b, &base[0])).collect();
    let basis = linalg::orthonormal_basis(&dirs, 1e-14).unwrap_or_default();
    let mut rel = linalg::sub(p, &base[0]);
    for b in &basis {
        let c = linalg::dot(&rel, b);
        linalg::axpy(-c, b, &mut rel);
    }
    linalg::norm(&rel)
}

fn join(main: &[f64], slab: &[f64]) -> Vec<f64> {
    main.iter().chain(slab).copied().collect()
}

/// Indices of the three points maximizing the minimum pairwise distance,
/// lexicographically first among ties.
pub fn max_min_triple(points: &[Vec<f64>]) -> [usize; 3] {
    let n = points.len();
    let mut best = ([0, 1, 2], f64::NEG_INFINITY);
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                let m = linalg::dist(&points[i], &points[j])
                    .min(linalg::dist(&points[i], &points[k]))
                    .min(linalg::dist(&points[j], &points[k]));
                if m > best.1 * (1.0 + 1e-12) {
                    best = ([i, j, k], m);
                }
            }
        }
    }
    best.0
}

fn exact(points: &[Vec<f64>]) -> Vec<ExactPoint> {
    points
        .iter()
        .map(|p| Point::plain(p.iter().map(|&c| rational_from_f64(c)).collect()))
        .collect()
}

pub fn replay_construction(eps: f64, eps1: f64, delta: f64, seed: u64) -> Result<ConstructionReport, ReplayError> {
    if !(eps > 0.0 && eps < 1.0 && eps1 > 0.0 && eps1 < eps / 2.0 && delta > 0.0 && delta < 1.0) {
        return Err(ReplayError::Precondition { eps, eps1, delta });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut residuals = BTreeMap::new();
    let center: Vec<f64> = vec![eps / 2.0; SLAB_DIM];

    // slab blocks: three delta-separated points of S⁵_{eps1}, then the
    // sampled point farthest from their plane
    let separation = delta * eps1;
    let mut us: Vec<Vec<f64>> = Vec::new();
    for _ in 0..10_000 {
        let u = point_on_sphere(&mut rng, &center, eps1);
        if us.iter().all(|w| linalg::dist(w, &u) >= separation) {
            us.push(u);
            if us.len() == 3 {
                break;
            }
        }
    }
    if us.len() < 3 {
        return Err(ReplayError::Separation);
    }
    let (u4, v4_plane_distance) = (0..V4_CANDIDATES)
        .map(|_| {
            let u = point_on_sphere(&mut rng, &center, eps1);
            let d = plane_distance(&u, &us);
            (u, d)
        })
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .expect("candidates");
    us.push(u4);

    // main blocks inside one mesh cell of the tetrahedron
    let cell_side = delta.powf(1.5) * eps * eps1;
    let tetra = regular_simplex(MAIN_DIM, TETRAHEDRON_EDGE)?;
    let cell_reach = cell_side * 3f64.sqrt();
    residuals.insert(
        "cell_in_tetrahedron".to_string(),
        Check::at_most(cell_reach - tetra.inradius()?, 0.0),
    );
    let mains: Vec<Vec<f64>> = (0..3)
        .map(|_| (0..MAIN_DIM).map(|_| cell_side * rng.random::<f64>()).collect())
        .chain(std::iter::once(vec![cell_side / 2.0; MAIN_DIM]))
        .collect();
    let v14: Vec<Vec<f64>> = mains.iter().zip(&us).map(|(m, u)| join(m, u)).collect();
    let slab_14 = v14.iter().map(|p| slab_violation(p, eps)).fold(0.0, f64::max);
    residuals.insert("slab_v1_v4".to_string(), Check::at_most(slab_14, 0.0));

    let float_pts: Vec<FloatPoint> = v14.iter().map(|p| Point::plain(p.clone())).collect();
    let cs4 = circumsphere_of_points(&float_pts)?;
    let circumradius_4 = cs4.radius();
    residuals.insert("circumradius_4_below_1".to_string(), Check::at_most(circumradius_4 - 1.0, 0.0));
    let a4 = attached_sphere_of_points(&float_pts, AMBIENT_DIM)?;
    let exact_r4_sq = circumsphere_of_points(&exact(&v14))?.radius_sq;
    let formula = (1.0 - crate::scalar::Backing::to_f64_lossy(&exact_r4_sq)).sqrt();
    residuals.insert(
        "attached_radius_4".to_string(),
        Check::at_most((a4.radius - formula).abs(), RADIUS_TOL),
    );

    // 2-equator closest to the main axes
    let axes: Vec<Vec<f64>> = (0..MAIN_DIM)
        .map(|i| {
            let mut e = vec![0.0; AMBIENT_DIM];
            e[i] = 1.0;
            e
        })
        .collect();
    let eq = equator_toward(&a4, &axes)?;
    let equator_tilt = crate::geom::subspace_angle(&eq.basis, &axes)?;
    let (mut eq_slab, mut eq_unit): (f64, f64) = (0.0, 0.0);
    for _ in 0..EQUATOR_SAMPLES {
        let p = eq.sample(&mut rng);
        eq_slab = eq_slab.max(slab_violation(&p, eps));
        eq_unit = eq_unit.max(unit_violation(&p, &v14));
    }
    residuals.insert("slab_equator".to_string(), Check::at_most(eq_slab, 0.0));
    residuals.insert("unit_equator_to_v1_v4".to_string(), Check::at_most(eq_unit, UNIT_TOL));

    // radially corrected pentagon around a point of the equator, in two
    // directions of the attached sphere orthogonal to the equator
    let nu = NU_FRACTION * eps;
    let u_star = eq.sample(&mut rng);
    let mut normal: Vec<Vec<f64>> = eq.basis.clone();
    let mut extra = Vec::new();
    for b in &a4.basis {
        if extra.len() == 2 {
            break;
        }
        if let Some(f) = linalg::orthonormalize_against(b, &normal, 1e-8) {
            normal.push(f.clone());
            extra.push(f);
        }
    }
    let radial = linalg::sub(&u_star, &a4.center);
    let shrink = (1.0 - (nu / a4.radius).powi(2)).sqrt();
    let pentagon: Vec<Vec<f64>> = (0..5)
        .map(|k| {
            let angle = std::f64::consts::TAU * k as f64 / 5.0;
            let mut p = a4.center.clone();
            linalg::axpy(shrink, &radial, &mut p);
            linalg::axpy(nu * angle.cos(), &extra[0], &mut p);
            linalg::axpy(nu * angle.sin(), &extra[1], &mut p);
            p
        })
        .collect();
    let triple = max_min_triple(&pentagon);
    let v57: Vec<Vec<f64>> = triple.iter().map(|&i| pentagon[i].clone()).collect();
    let unit_cross = v57.iter().map(|p| unit_violation(p, &v14)).fold(0.0, f64::max);
    residuals.insert("unit_v1_v4_to_v5_v7".to_string(), Check::at_most(unit_cross, UNIT_TOL));
    let slab_57 = v57.iter().map(|p| slab_violation(p, eps)).fold(0.0, f64::max);
    residuals.insert("slab_v5_v7".to_string(), Check::at_most(slab_57, 0.0));
    let min_side = max_min_side(&v57);
    residuals.insert(
        "triangle_sides_at_least_nu".to_string(),
        Check::at_most(nu * shrink - min_side, 1e-12),
    );

    let mut v = v14.clone();
    v.extend(v57);
    let r7_sq = crate::scalar::Backing::to_f64_lossy(&circumsphere_of_points(&exact(&v))?.radius_sq);
    let r_attached_7 = (1.0 - r7_sq).max(0.0).sqrt();
    let limit_gap = (r_attached_7 - 3f64.sqrt() / 2.0).abs();

    let pass = residuals.values().all(|c| c.ok) && r7_sq < 1.0;
    Ok(ConstructionReport {
        eps,
        eps1,
        delta,
        seed,
        cell_side,
        nu,
        v,
        circumradius_4,
        r_attached_4: a4.radius,
        v4_plane_distance,
        equator_tilt,
        equator_in_slice: eq_slab == 0.0,
        r_attached_7,
        limit_gap,
        residuals,
        pass,
    })
}

fn max_min_side(points: &[Vec<f64>]) -> f64 {
    let mut m = f64::INFINITY;
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            m = m.min(linalg::dist(&points[i], &points[j]));
        }
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tetrahedron_edge_constant() {
        assert!((TETRAHEDRON_EDGE - 2.0 * 6f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn precondition() {
        assert!(matches!(
            replay_construction(1e-3, 5e-4, 1e-2, 0),
            Err(ReplayError::Precondition { .. })
        ));
    }

    #[test]
    fn pentagon_triple() {
        let pts: Vec<Vec<f64>> = (0..5)
            .map(|k| {
                let a = std::f64::consts::TAU * k as f64 / 5.0;
                vec![a.cos(), a.sin()]
            })
            .collect();
        assert_eq!(max_min_triple(&pts), [0, 1, 2]);
    }

    #[test]
    fn replay_small_eps() {
        let r = replay_construction(1e-3, 4e-4, 1e-2, 0).unwrap();
        assert!(r.pass, "{:#?}", r.residuals);
        assert_eq!(r.v.len(), 7);
        assert!(r.limit_gap < 0.05);
    }
}
