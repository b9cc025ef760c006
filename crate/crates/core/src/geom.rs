//! Simplex and sphere primitives over both backings.
//!
//! Intrinsic quantities (volume, circumradius, inradius) are computed from
//! the matrix of squared pairwise distances through Cayley–Menger
//! determinants, so an exact distance matrix gives exact answers even when
//! the coordinates realizing it are irrational. Constructions that need an
//! orthonormal frame (attached spheres, equators, subspace angles) are
//! float-only and return a [`SphereDescriptor`].

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::linalg::{self, Matrix};
use crate::point::{FloatPoint, Point};
use crate::scalar::{Backing, BackingKind, Rational};

/// Relative agreement required between the direct and inverse-matrix
/// circumradius routes on float backing.
pub const Q11_CROSS_CHECK_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GeomError {
    #[error("points have mismatched dimensions ({0} vs {1})")]
    DimensionMismatch(usize, usize),
    #[error("operation needs {expected} vertices, got {got}")]
    VertexCount { expected: &'static str, got: usize },
    #[error("degenerate simplex (Cayley–Menger determinant {det:e})")]
    Degenerate { det: f64 },
    #[error("empty attached sphere: circumradius {circumradius} >= 1")]
    EmptyAttachedSphere { circumradius: f64 },
    #[error("ambient dimension {ambient} too small for {needed}")]
    AmbientTooSmall { ambient: usize, needed: usize },
    #[error("circumradius routes disagree: direct r^2 = {direct:e}, inverse-matrix r^2 = {q11:e}")]
    CrossCheck { direct: f64, q11: f64 },
    #[error("equator dimension {t} must be below sphere dimension {sphere_dim}")]
    EquatorDimension { t: usize, sphere_dim: usize },
    #[error("value is not representable exactly in this backing")]
    NotRepresentable,
    #[error("degenerate basis")]
    DegenerateBasis,
    #[error("invalid argument: {0}")]
    Invalid(String),
}

/// Symmetric matrix of squared pairwise distances of `m + 1` vertices.
#[derive(Debug, Clone, PartialEq)]
pub struct CayleyMenger<T> {
    d2: Matrix<T>,
}

impl<T: Backing> CayleyMenger<T> {
    pub fn from_points(points: &[Point<T>]) -> Self {
        let n = points.len();
        let mut d2 = vec![vec![T::zero(); n]; n];
        for i in 0..n {
            for j in i + 1..n {
                let d = points[i].dist_sq(&points[j]);
                d2[i][j] = d.clone();
                d2[j][i] = d;
            }
        }
        CayleyMenger { d2 }
    }

    /// Builds from a squared-distance matrix; it must be square, symmetric
    /// and zero on the diagonal.
    pub fn from_squared_distances(d2: Matrix<T>) -> Result<Self, GeomError> {
        let n = d2.len();
        for (i, row) in d2.iter().enumerate() {
            if row.len() != n {
                return Err(GeomError::DimensionMismatch(row.len(), n));
            }
            if !row[i].is_zero() {
                return Err(GeomError::Invalid("nonzero diagonal".into()));
            }
            for j in 0..i {
                if row[j] != d2[j][i] || row[j].is_negative() {
                    return Err(GeomError::Invalid("distance matrix not symmetric/nonnegative".into()));
                }
            }
        }
        Ok(CayleyMenger { d2 })
    }

    pub fn vertex_count(&self) -> usize {
        self.d2.len()
    }

    pub fn squared_distance(&self, i: usize, j: usize) -> &T {
        &self.d2[i][j]
    }

    /// The bordered `(m+2)×(m+2)` matrix, border row/column first.
    pub fn matrix(&self) -> Matrix<T> {
        let n = self.d2.len();
        let mut c = vec![vec![T::one(); n + 1]; n + 1];
        c[0][0] = T::zero();
        for i in 0..n {
            for j in 0..n {
                c[i + 1][j + 1] = self.d2[i][j].clone();
            }
        }
        c
    }

    pub fn det(&self) -> T {
        linalg::determinant(&self.matrix())
    }

    /// Squared `m`-volume: `det · (-1)^{m+1} / (2^m (m!)²)`.
    pub fn volume_sq(&self) -> T {
        let m = self.d2.len() - 1;
        let mut denom = T::from_int(1 << m);
        let fact = (1..=m as i64).product::<i64>();
        denom = denom * T::from_int(fact) * T::from_int(fact);
        let det = self.det();
        let signed = if m % 2 == 0 { -det } else { det };
        signed / denom
    }

    fn degenerate(&self, det: &T) -> bool {
        let m = self.d2.len().saturating_sub(1) as i32;
        let max = self.d2.iter().flatten().map(|v| v.to_f64_lossy()).fold(0.0, f64::max);
        T::det_is_degenerate(det, max.powi(m))
    }

    pub fn is_degenerate(&self) -> bool {
        self.degenerate(&self.det())
    }

    /// Top-left entry of the inverse bordered matrix; equals `-2r²`.
    pub fn inverse_corner(&self) -> Result<T, GeomError> {
        let det = self.det();
        if self.degenerate(&det) {
            return Err(GeomError::Degenerate {
                det: det.to_f64_lossy(),
            });
        }
        let inv = linalg::inverse(&self.matrix()).ok_or(GeomError::Degenerate {
            det: det.to_f64_lossy(),
        })?;
        Ok(inv[0][0].clone())
    }

    /// `2r²` read off the inverse Cayley–Menger matrix.
    pub fn two_circumradius_sq_q11(&self) -> Result<T, GeomError> {
        Ok(-self.inverse_corner()?)
    }

    /// Distance data of the facet opposite vertex `skip`.
    pub fn facet(&self, skip: usize) -> Self {
        let d2 = self
            .d2
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != skip)
            .map(|(_, row)| {
                row.iter()
                    .enumerate()
                    .filter(|(j, _)| *j != skip)
                    .map(|(_, v)| v.clone())
                    .collect()
            })
            .collect();
        CayleyMenger { d2 }
    }

    /// Squared inradius `(m·V / ΣAᵢ)²`. On exact backing this succeeds when
    /// all facets have equal area or every facet area is rational.
    pub fn inradius_sq(&self) -> Result<T, GeomError> {
        let n = self.d2.len();
        if n < 2 {
            return Err(GeomError::VertexCount {
                expected: ">= 2",
                got: n,
            });
        }
        let det = self.det();
        if self.degenerate(&det) {
            return Err(GeomError::Degenerate {
                det: det.to_f64_lossy(),
            });
        }
        let m = T::from_int((n - 1) as i64);
        let v2 = self.volume_sq();
        let facets: Vec<T> = (0..n).map(|i| self.facet(i).volume_sq()).collect();
        let surface_sq = if facets.iter().all(|a| *a == facets[0]) {
            let k = T::from_int(n as i64);
            k.clone() * k * facets[0].clone()
        } else {
            let mut sum = T::zero();
            for a in &facets {
                sum += &a.sqrt_exact().ok_or(GeomError::NotRepresentable)?;
            }
            sum.clone() * sum
        };
        Ok(m.clone() * m * v2 / surface_sq)
    }
}

/// Sphere embedded in an affine subspace: `center + radius · S(basis)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SphereDescriptor {
    pub center: Vec<f64>,
    pub radius: f64,
    /// Orthonormal directions spanning the supporting subspace.
    pub basis: Vec<Vec<f64>>,
}

impl SphereDescriptor {
    pub fn sphere_dim(&self) -> usize {
        self.basis.len().saturating_sub(1)
    }

    pub fn ambient_dim(&self) -> usize {
        self.center.len()
    }

    /// Point at `center + radius · Σ cᵢ bᵢ / |c|`.
    pub fn point_from_coeffs(&self, coeffs: &[f64]) -> Vec<f64> {
        let n = linalg::norm(coeffs);
        let mut p = self.center.clone();
        for (c, b) in coeffs.iter().zip(&self.basis) {
            linalg::axpy(self.radius * c / n, b, &mut p);
        }
        p
    }

    pub fn sample<R: rand::Rng>(&self, rng: &mut R) -> Vec<f64> {
        loop {
            let coeffs: Vec<f64> = (0..self.basis.len())
                .map(|_| StandardNormal.sample(rng))
                .collect();
            if linalg::norm(&coeffs) > 1e-12 {
                return self.point_from_coeffs(&coeffs);
            }
        }
    }

    /// Residual of `p` against the sphere: distance error plus the component
    /// of `p - center` outside the supporting subspace.
    pub fn residual(&self, p: &[f64]) -> f64 {
        let rel = linalg::sub(p, &self.center);
        let mut inside = vec![0.0; rel.len()];
        for b in &self.basis {
            linalg::axpy(linalg::dot(&rel, b), b, &mut inside);
        }
        let off = linalg::dist(&rel, &inside);
        (linalg::norm(&rel) - self.radius).abs() + off
    }
}

/// Center and squared radius of the sphere through a set of affinely
/// independent points, within their affine hull.
#[derive(Debug, Clone, PartialEq)]
pub struct Circumsphere<T> {
    pub center: Vec<T>,
    pub radius_sq: T,
    /// `2r²` from the inverse Cayley–Menger matrix, kept for inspection.
    pub two_radius_sq_q11: T,
}

impl<T: Backing> Circumsphere<T> {
    pub fn radius(&self) -> f64 {
        self.radius_sq.to_f64_lossy().sqrt()
    }
}

/// Circumsphere of any number (≥ 2) of affinely independent points. The
/// center solves the equidistance system inside the affine hull; the radius
/// is cross-checked against the inverse Cayley–Menger route.
pub fn circumsphere_of_points<T: Backing>(points: &[Point<T>]) -> Result<Circumsphere<T>, GeomError> {
    check_dims(points)?;
    if points.len() < 2 {
        return Err(GeomError::VertexCount {
            expected: ">= 2",
            got: points.len(),
        });
    }
    let cm = CayleyMenger::from_points(points);
    let det = cm.det();
    if cm.degenerate(&det) {
        return Err(GeomError::Degenerate {
            det: det.to_f64_lossy(),
        });
    }
    let p0 = points[0].coords();
    let edges: Vec<Vec<T>> = points[1..]
        .iter()
        .map(|p| linalg::sub(p.coords(), p0))
        .collect();
    let gram: Matrix<T> = edges
        .iter()
        .map(|a| edges.iter().map(|b| linalg::dot(a, b)).collect())
        .collect();
    let two = T::from_int(2);
    let rhs: Vec<T> = edges
        .iter()
        .map(|e| linalg::norm_sq(e) / two.clone())
        .collect();
    let lambda = linalg::solve(&gram, &rhs).ok_or(GeomError::Degenerate {
        det: det.to_f64_lossy(),
    })?;
    let mut center = p0.to_vec();
    for (l, e) in lambda.iter().zip(&edges) {
        for (c, x) in center.iter_mut().zip(e) {
            *c = c.clone() + l.clone() * x.clone();
        }
    }
    let radius_sq = linalg::norm_sq(&linalg::sub(&center, p0));
    let two_radius_sq_q11 = cm.two_circumradius_sq_q11()?;
    let direct2 = two.clone() * radius_sq.clone();
    let agree = match T::KIND {
        BackingKind::Exact => direct2 == two_radius_sq_q11,
        BackingKind::Float => {
            let a = direct2.to_f64_lossy();
            let b = two_radius_sq_q11.to_f64_lossy();
            (a - b).abs() <= Q11_CROSS_CHECK_TOL * a.abs().max(b.abs()).max(1e-300)
        }
    };
    if !agree {
        return Err(GeomError::CrossCheck {
            direct: radius_sq.to_f64_lossy(),
            q11: two_radius_sq_q11.to_f64_lossy() / 2.0,
        });
    }
    Ok(Circumsphere {
        center,
        radius_sq,
        two_radius_sq_q11,
    })
}

fn check_dims<T>(points: &[Point<T>]) -> Result<(), GeomError>
where
    T: Backing,
{
    if let Some(first) = points.first() {
        for p in points {
            if p.dim() != first.dim() {
                return Err(GeomError::DimensionMismatch(first.dim(), p.dim()));
            }
        }
    }
    Ok(())
}

/// Orthonormal basis of the direction space of the affine hull.
pub fn hull_basis<T: Backing>(points: &[Point<T>]) -> Result<Vec<Vec<f64>>, GeomError> {
    let p0 = points[0].to_float();
    let edges: Vec<Vec<f64>> = points[1..]
        .iter()
        .map(|p| linalg::sub(p.to_float().coords(), p0.coords()))
        .collect();
    linalg::orthonormal_basis(&edges, 1e-13).ok_or(GeomError::DegenerateBasis)
}

/// An ordered list of at least two points of equal dimension, with cached
/// squared distances.
#[derive(Debug, Clone, PartialEq)]
pub struct Simplex<T> {
    vertices: Vec<Point<T>>,
    cm: CayleyMenger<T>,
}

pub type ExactSimplex = Simplex<Rational>;
pub type FloatSimplex = Simplex<f64>;

impl<T: Backing> Simplex<T> {
    pub fn new(vertices: Vec<Point<T>>) -> Result<Self, GeomError> {
        if vertices.len() < 2 {
            return Err(GeomError::VertexCount {
                expected: ">= 2",
                got: vertices.len(),
            });
        }
        check_dims(&vertices)?;
        let cm = CayleyMenger::from_points(&vertices);
        Ok(Simplex { vertices, cm })
    }

    pub fn vertices(&self) -> &[Point<T>] {
        &self.vertices
    }

    pub fn cayley_menger(&self) -> &CayleyMenger<T> {
        &self.cm
    }

    pub fn cayley_menger_det(&self) -> T {
        self.cm.det()
    }

    pub fn volume_sq(&self) -> T {
        self.cm.volume_sq()
    }

    /// Nonnegative `m`-volume as a float (zero for degenerate simplices).
    pub fn volume(&self) -> f64 {
        if self.cm.is_degenerate() {
            return 0.0;
        }
        self.volume_sq().to_f64_lossy().max(0.0).sqrt()
    }

    pub fn circumsphere(&self) -> Result<Circumsphere<T>, GeomError> {
        circumsphere_of_points(&self.vertices)
    }

    /// Float descriptor of the circumsphere inside the affine hull.
    pub fn circumsphere_descriptor(&self) -> Result<SphereDescriptor, GeomError> {
        let cs = self.circumsphere()?;
        Ok(SphereDescriptor {
            center: cs.center.iter().map(|c| c.to_f64_lossy()).collect(),
            radius: cs.radius(),
            basis: hull_basis(&self.vertices)?,
        })
    }

    pub fn inradius_sq(&self) -> Result<T, GeomError> {
        self.cm.inradius_sq()
    }

    pub fn inradius(&self) -> Result<f64, GeomError> {
        match self.cm.inradius_sq() {
            Ok(r2) => Ok(r2.to_f64_lossy().sqrt()),
            Err(GeomError::NotRepresentable) => {
                let float = CayleyMenger {
                    d2: self
                        .cm
                        .d2
                        .iter()
                        .map(|r| r.iter().map(|v| v.to_f64_lossy()).collect())
                        .collect(),
                };
                Ok(float.inradius_sq()?.sqrt())
            }
            Err(e) => Err(e),
        }
    }
}

/// The sphere of points at distance 1 from every vertex, for 3 or 4
/// vertices, inside `ℝ^ambient_dim`.
pub fn attached_sphere<T: Backing>(
    simplex: &Simplex<T>,
    ambient_dim: usize,
) -> Result<SphereDescriptor, GeomError> {
    let count = simplex.vertices.len();
    if !(3..=4).contains(&count) {
        return Err(GeomError::VertexCount {
            expected: "3 or 4",
            got: count,
        });
    }
    attached_sphere_of_points(&simplex.vertices, ambient_dim)
}

/// Attached sphere for any affinely independent point set: centered at the
/// circumcenter with radius `√(1 − r²)`, supported on the orthogonal
/// complement of the affine hull.
pub fn attached_sphere_of_points<T: Backing>(
    points: &[Point<T>],
    ambient_dim: usize,
) -> Result<SphereDescriptor, GeomError> {
    let count = points.len();
    let dim = points.first().map(|p| p.dim()).unwrap_or(0);
    if ambient_dim < dim || ambient_dim < count {
        return Err(GeomError::AmbientTooSmall {
            ambient: ambient_dim,
            needed: dim.max(count),
        });
    }
    let cs = circumsphere_of_points(points)?;
    let gap = T::one() - cs.radius_sq.clone();
    let empty = match T::KIND {
        BackingKind::Exact => !gap.is_positive(),
        BackingKind::Float => gap.to_f64_lossy() <= crate::scalar::TAU_GEOM,
    };
    if empty {
        return Err(GeomError::EmptyAttachedSphere {
            circumradius: cs.radius(),
        });
    }
    let radius = gap.to_f64_lossy().sqrt();
    let mut center: Vec<f64> = cs.center.iter().map(|c| c.to_f64_lossy()).collect();
    center.resize(ambient_dim, 0.0);
    let mut hull = hull_basis(points)?;
    for b in &mut hull {
        b.resize(ambient_dim, 0.0);
    }
    let basis = linalg::orthogonal_complement(&hull, ambient_dim);
    Ok(SphereDescriptor {
        center,
        radius,
        basis,
    })
}

/// Regular `n`-simplex in `ℝⁿ` with the given edge, centroid at the origin.
pub fn regular_simplex(n: usize, edge: f64) -> Result<FloatSimplex, GeomError> {
    if n == 0 || !(edge > 0.0) {
        return Err(GeomError::Invalid(format!("n = {n}, edge = {edge}")));
    }
    // eᵢ and c·(1,…,1) have pairwise distance √2 when c = (1 − √(n+1))/n
    let c = (1.0 - ((n + 1) as f64).sqrt()) / n as f64;
    let mut raw: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            let mut v = vec![0.0; n];
            v[i] = 1.0;
            v
        })
        .collect();
    raw.push(vec![c; n]);
    let centroid: Vec<f64> = (0..n)
        .map(|j| raw.iter().map(|v| v[j]).sum::<f64>() / (n + 1) as f64)
        .collect();
    let scale = edge / std::f64::consts::SQRT_2;
    let vertices = raw
        .into_iter()
        .map(|v| {
            Point::plain(
                v.iter()
                    .zip(&centroid)
                    .map(|(x, m)| (x - m) * scale)
                    .collect(),
            )
        })
        .collect();
    Simplex::new(vertices)
}

/// Exact distance data of a regular `n`-simplex with rational squared edge.
pub fn regular_simplex_distances(n: usize, edge_sq: Rational) -> CayleyMenger<Rational> {
    use num::traits::Zero;
    let d2 = (0..=n)
        .map(|i| {
            (0..=n)
                .map(|j| if i == j { Rational::zero() } else { edge_sq.clone() })
                .collect()
        })
        .collect();
    CayleyMenger { d2 }
}

/// Angle between the span of `basis_p` and its orthogonal projection onto
/// the span of `basis_p2`: `arccos(vol(projected) / vol(original))`.
pub fn subspace_angle(basis_p: &[Vec<f64>], basis_p2: &[Vec<f64>]) -> Result<f64, GeomError> {
    if basis_p.is_empty() || basis_p2.is_empty() {
        return Err(GeomError::DegenerateBasis);
    }
    let d = basis_p[0].len();
    if basis_p.iter().chain(basis_p2).any(|v| v.len() != d) {
        return Err(GeomError::DimensionMismatch(d, d));
    }
    let target = linalg::orthonormal_basis(basis_p2, 1e-12).ok_or(GeomError::DegenerateBasis)?;
    let original = linalg::gram_det(basis_p);
    let scale: f64 = basis_p.iter().map(|v| linalg::dot(v, v)).product();
    if !(original > 1e-24 * scale.max(1e-300)) {
        return Err(GeomError::DegenerateBasis);
    }
    let projected: Vec<Vec<f64>> = basis_p
        .iter()
        .map(|e| {
            let mut p = vec![0.0; d];
            for q in &target {
                linalg::axpy(linalg::dot(e, q), q, &mut p);
            }
            p
        })
        .collect();
    let ratio = (linalg::gram_det(&projected).max(0.0) / original).sqrt();
    Ok(ratio.clamp(0.0, 1.0).acos())
}

/// Seeded `t`-equator: same center and radius, supported on a
/// `(t+1)`-dimensional subspace of the input's.
pub fn equator(sph: &SphereDescriptor, t: usize, orientation_seed: u64) -> Result<SphereDescriptor, GeomError> {
    let sphere_dim = sph.sphere_dim();
    if t >= sphere_dim {
        return Err(GeomError::EquatorDimension { t, sphere_dim });
    }
    let dim = sph.basis.len();
    let mut rng = ChaCha8Rng::seed_from_u64(orientation_seed);
    let mut coeffs: Vec<Vec<f64>> = Vec::with_capacity(t + 1);
    while coeffs.len() < t + 1 {
        let v: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(&mut rng)).collect();
        if let Some(u) = linalg::orthonormalize_against(&v, &coeffs, 1e-8) {
            coeffs.push(u);
        }
    }
    let basis = coeffs
        .iter()
        .map(|c| {
            let mut v = vec![0.0; sph.ambient_dim()];
            for (ci, b) in c.iter().zip(&sph.basis) {
                linalg::axpy(*ci, b, &mut v);
            }
            v
        })
        .collect();
    Ok(SphereDescriptor {
        center: sph.center.clone(),
        radius: sph.radius,
        basis,
    })
}

/// Equator whose subspace is spanned by the projections of `directions`
/// onto the sphere's subspace; the closest great subsphere to those axes.
pub fn equator_toward(sph: &SphereDescriptor, directions: &[Vec<f64>]) -> Result<SphereDescriptor, GeomError> {
    let t = directions.len().saturating_sub(1);
    if directions.is_empty() || t >= sph.sphere_dim() {
        return Err(GeomError::EquatorDimension {
            t,
            sphere_dim: sph.sphere_dim(),
        });
    }
    let projected: Vec<Vec<f64>> = directions
        .iter()
        .map(|d| {
            let mut p = vec![0.0; sph.ambient_dim()];
            for b in &sph.basis {
                linalg::axpy(linalg::dot(d, b), b, &mut p);
            }
            p
        })
        .collect();
    let basis = linalg::orthonormal_basis(&projected, 1e-12).ok_or(GeomError::DegenerateBasis)?;
    Ok(SphereDescriptor {
        center: sph.center.clone(),
        radius: sph.radius,
        basis,
    })
}

pub fn float_point(coords: Vec<f64>) -> FloatPoint {
    Point::plain(coords)
}
