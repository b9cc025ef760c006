//! Small dense linear algebra: generic elimination over any [`Backing`]
//! and a handful of float vector helpers.

use crate::scalar::Backing;

/// Row-major square or rectangular matrix.
pub type Matrix<T> = Vec<Vec<T>>;

/// Determinant by forward elimination. Float pivots are chosen by largest
/// magnitude; exact pivots by first nonzero entry.
pub fn determinant<T: Backing>(m: &Matrix<T>) -> T {
    let n = m.len();
    let mut a = m.clone();
    let mut det = T::one();
    for col in 0..n {
        let pivot = match pivot_row(&a, col, col) {
            Some(p) => p,
            None => return T::zero(),
        };
        if pivot != col {
            a.swap(pivot, col);
            det = -det;
        }
        let p = a[col][col].clone();
        det = det * p.clone();
        for row in col + 1..n {
            if a[row][col].is_zero() {
                continue;
            }
            let factor = a[row][col].clone() / p.clone();
            for k in col..n {
                let delta = factor.clone() * a[col][k].clone();
                a[row][k] = a[row][k].clone() - delta;
            }
        }
    }
    det
}

/// Gauss–Jordan inverse; `None` when singular.
pub fn inverse<T: Backing>(m: &Matrix<T>) -> Option<Matrix<T>> {
    let n = m.len();
    let mut a: Matrix<T> = m
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| if i == j { T::one() } else { T::zero() }));
            r
        })
        .collect();
    for col in 0..n {
        let pivot = pivot_row(&a, col, col)?;
        a.swap(pivot, col);
        let p = a[col][col].clone();
        for k in 0..2 * n {
            a[col][k] = a[col][k].clone() / p.clone();
        }
        for row in 0..n {
            if row == col || a[row][col].is_zero() {
                continue;
            }
            let factor = a[row][col].clone();
            for k in 0..2 * n {
                let delta = factor.clone() * a[col][k].clone();
                a[row][k] = a[row][k].clone() - delta;
            }
        }
    }
    Some(a.into_iter().map(|row| row[n..].to_vec()).collect())
}

/// Solves `m x = b`; `None` when singular.
pub fn solve<T: Backing>(m: &Matrix<T>, b: &[T]) -> Option<Vec<T>> {
    let n = m.len();
    let mut a: Matrix<T> = m
        .iter()
        .zip(b)
        .map(|(row, bi)| {
            let mut r = row.clone();
            r.push(bi.clone());
            r
        })
        .collect();
    for col in 0..n {
        let pivot = pivot_row(&a, col, col)?;
        a.swap(pivot, col);
        let p = a[col][col].clone();
        for row in col + 1..n {
            if a[row][col].is_zero() {
                continue;
            }
            let factor = a[row][col].clone() / p.clone();
            for k in col..=n {
                let delta = factor.clone() * a[col][k].clone();
                a[row][k] = a[row][k].clone() - delta;
            }
        }
    }
    let mut x = vec![T::zero(); n];
    for row in (0..n).rev() {
        let mut acc = a[row][n].clone();
        for k in row + 1..n {
            acc = acc - a[row][k].clone() * x[k].clone();
        }
        x[row] = acc / a[row][row].clone();
    }
    Some(x)
}

fn pivot_row<T: Backing>(a: &Matrix<T>, col: usize, from: usize) -> Option<usize> {
    let mut best: Option<(usize, T)> = None;
    for (row, r) in a.iter().enumerate().skip(from) {
        let v = r[col].abs();
        if v.is_zero() {
            continue;
        }
        if T::KIND == crate::scalar::BackingKind::Exact {
            // any nonzero pivot is exact; avoid comparing huge fractions
            return Some(row);
        }
        match &best {
            Some((_, b)) if *b >= v => {}
            _ => best = Some((row, v)),
        }
    }
    best.map(|(r, _)| r)
}

pub fn dot<T: Backing>(a: &[T], b: &[T]) -> T {
    a.iter()
        .zip(b)
        .fold(T::zero(), |acc, (x, y)| acc + x.clone() * y.clone())
}

pub fn sub<T: Backing>(a: &[T], b: &[T]) -> Vec<T> {
    a.iter().zip(b).map(|(x, y)| x.clone() - y.clone()).collect()
}

pub fn norm_sq<T: Backing>(a: &[T]) -> T {
    dot(a, a)
}

pub fn norm(a: &[f64]) -> f64 {
    a.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

pub fn scaled(alpha: f64, x: &[f64]) -> Vec<f64> {
    x.iter().map(|v| alpha * v).collect()
}

/// Modified Gram–Schmidt against an existing orthonormal set. Returns the
/// normalized residual, or `None` if it is shorter than `tol`.
pub fn orthonormalize_against(v: &[f64], basis: &[Vec<f64>], tol: f64) -> Option<Vec<f64>> {
    let mut r = v.to_vec();
    // two passes keep the result orthogonal to working precision
    for _ in 0..2 {
        for b in basis {
            let c: f64 = r.iter().zip(b).map(|(x, y)| x * y).sum();
            axpy(-c, b, &mut r);
        }
    }
    let n = norm(&r);
    if n < tol {
        None
    } else {
        Some(scaled(1.0 / n, &r))
    }
}

/// Orthonormal basis of the span of `vectors`; fails if they are dependent.
pub fn orthonormal_basis(vectors: &[Vec<f64>], tol: f64) -> Option<Vec<Vec<f64>>> {
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(vectors.len());
    for v in vectors {
        let scale = norm(v).max(1.0);
        basis.push(orthonormalize_against(v, &basis, tol * scale)?);
    }
    Some(basis)
}

/// Extends an orthonormal set with standard basis vectors until it spans
/// `dim` dimensions; returns only the added vectors.
pub fn orthogonal_complement(basis: &[Vec<f64>], dim: usize) -> Vec<Vec<f64>> {
    let mut all = basis.to_vec();
    let mut added = Vec::new();
    // pick the axes with the largest residual first for conditioning
    let mut candidates: Vec<(usize, f64)> = (0..dim)
        .map(|i| {
            let proj: f64 = all.iter().map(|b| b[i] * b[i]).sum();
            (i, 1.0 - proj)
        })
        .collect();
    candidates.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    for (axis, _) in candidates {
        if all.len() == dim {
            break;
        }
        let mut e = vec![0.0; dim];
        e[axis] = 1.0;
        if let Some(v) = orthonormalize_against(&e, &all, 1e-8) {
            all.push(v.clone());
            added.push(v);
        }
    }
    added
}

/// Gram determinant `det(V Vᵀ)` of a family of float vectors.
pub fn gram_det(vectors: &[Vec<f64>]) -> f64 {
    let g: Matrix<f64> = vectors
        .iter()
        .map(|a| vectors.iter().map(|b| dot(a, b)).collect())
        .collect();
    determinant(&g)
}
