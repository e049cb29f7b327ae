//! Naive reference linear algebra for cross-checking the production code.
//!
//! Everything here is plain Gaussian elimination over `Vec<Vec<Complex64>>`
//! with partial pivoting, written against num-complex alone so that rank
//! and nullity claims are confirmed by an implementation that shares no
//! code with the nalgebra-backed production path.

// Each integration test binary compiles this module on its own and uses a
// different subset of the helpers, so per-binary dead-code lints are noise.
#![allow(dead_code)]

use num_complex::Complex64;

pub type Rows = Vec<Vec<Complex64>>;

/// Row-reduce in place, returning the pivot column indices.
pub fn rref(m: &mut Rows, tol: f64) -> Vec<usize> {
    let rows = m.len();
    let cols = if rows == 0 { 0 } else { m[0].len() };
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r >= rows {
            break;
        }
        let (best, mag) = (r..rows)
            .map(|i| (i, m[i][c].norm()))
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap();
        if mag <= tol {
            continue;
        }
        m.swap(r, best);
        let inv = Complex64::new(1.0, 0.0) / m[r][c];
        for j in c..cols {
            m[r][j] *= inv;
        }
        for i in 0..rows {
            if i != r {
                let factor = m[i][c];
                if factor.norm() > 0.0 {
                    for j in c..cols {
                        let sub = factor * m[r][j];
                        m[i][j] -= sub;
                    }
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

pub fn rank(mut m: Rows, tol: f64) -> usize {
    rref(&mut m, tol).len()
}

pub fn nullity(m: Rows, tol: f64) -> usize {
    let cols = if m.is_empty() { 0 } else { m[0].len() };
    cols - rank(m, tol)
}

/// Solution space dimension of the homogeneous system `m x = 0` after
/// appending extra constraint rows.
pub fn nullity_with(mut m: Rows, extra: Rows, tol: f64) -> usize {
    m.extend(extra);
    nullity(m, tol)
}

pub fn zeros(rows: usize, cols: usize) -> Rows {
    vec![vec![Complex64::new(0.0, 0.0); cols]; rows]
}

pub fn eye(n: usize) -> Rows {
    let mut m = zeros(n, n);
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = Complex64::new(1.0, 0.0);
    }
    m
}

/// Copy a production matrix into naive storage.
pub fn from_cmat(m: &nalgebra::DMatrix<Complex64>) -> Rows {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
        .collect()
}

/// Naive matrix product.
pub fn matmul(a: &Rows, b: &Rows) -> Rows {
    let (ra, ca) = (a.len(), if a.is_empty() { 0 } else { a[0].len() });
    let cb = if b.is_empty() { 0 } else { b[0].len() };
    assert_eq!(ca, b.len());
    let mut out = zeros(ra, cb);
    for i in 0..ra {
        for k in 0..ca {
            let v = a[i][k];
            if v.norm() == 0.0 {
                continue;
            }
            for j in 0..cb {
                let add = v * b[k][j];
                out[i][j] += add;
            }
        }
    }
    out
}

/// Largest entry modulus.
pub fn max_abs(m: &Rows) -> f64 {
    m.iter()
        .flat_map(|r| r.iter())
        .map(|z| z.norm())
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod self_tests {
    use super::*;

    #[test]
    fn rank_of_a_projection_matrix() {
        let mut m = zeros(2, 2);
        m[0][0] = Complex64::new(1.0, 0.0);
        assert_eq!(rank(m, 1e-12), 1);
    }

    #[test]
    fn nullity_counts_free_columns() {
        // One constraint row over three unknowns.
        let mut m = zeros(1, 3);
        m[0][0] = Complex64::new(1.0, 0.0);
        m[0][2] = Complex64::new(-1.0, 0.0);
        assert_eq!(nullity(m, 1e-12), 2);
    }
}
