//! Dense complex linear algebra helpers shared by the discretizer and the
//! checkers: rank decisions, null spaces, orthonormal spans, least squares.
//!
//! Rank decisions are made on singular values with a relative threshold, so
//! every caller that promises an "exact integer rank" goes through here.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub type CMat = DMatrix<Complex64>;
pub type CVec = DVector<Complex64>;

pub fn czero() -> Complex64 {
    Complex64::new(0.0, 0.0)
}

pub fn cone() -> Complex64 {
    Complex64::new(1.0, 0.0)
}

/// Singular values of `m`, descending. Empty matrices have none.
fn singular_values(m: &CMat) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    m.clone().svd(false, false).singular_values.iter().copied().collect()
}

/// Rank with a relative singular-value threshold.
pub fn rank(m: &CMat, rel_tol: f64) -> usize {
    let sv = singular_values(m);
    let max = sv.first().copied().unwrap_or(0.0);
    if max <= f64::EPSILON * 16.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > rel_tol * max).count()
}

/// Orthonormal basis of the null space of `m` (columns). The zero-column
/// matrix has the full space as null space.
///
/// nalgebra only offers the thin SVD, so the null space is read off the
/// square Gram matrix `m^H m`, whose SVD is full. Thresholding on the Gram
/// singular values with the squared tolerance decides the same ranks.
pub fn nullspace(m: &CMat, rel_tol: f64) -> CMat {
    let ncols = m.ncols();
    if ncols == 0 {
        return CMat::zeros(0, 0);
    }
    if m.nrows() == 0 {
        return CMat::identity(ncols, ncols);
    }
    let gram = m.adjoint() * m;
    let svd = gram.svd(true, false);
    let u = svd.u.expect("svd with u requested");
    let sv = &svd.singular_values;
    let max = sv.iter().cloned().fold(0.0_f64, f64::max);
    let r = if max <= f64::EPSILON * 256.0 {
        0
    } else {
        sv.iter().filter(|&&s| s > rel_tol * rel_tol * max).count()
    };
    u.columns(r, ncols - r).into_owned()
}

/// Orthonormal basis of the column span of `m`.
pub fn column_space(m: &CMat, rel_tol: f64) -> CMat {
    if m.nrows() == 0 || m.ncols() == 0 {
        return CMat::zeros(m.nrows(), 0);
    }
    let svd = m.clone().svd(true, false);
    let u = svd.u.expect("svd with u requested");
    let sv = &svd.singular_values;
    let max = sv.iter().cloned().fold(0.0_f64, f64::max);
    let r = if max <= f64::EPSILON * 16.0 {
        0
    } else {
        sv.iter().filter(|&&s| s > rel_tol * max).count()
    };
    u.columns(0, r).into_owned()
}

/// Minimum-norm least-squares solution of `a x = b`.
pub fn lstsq(a: &CMat, b: &CMat, rel_tol: f64) -> CMat {
    if a.ncols() == 0 {
        return CMat::zeros(0, b.ncols());
    }
    if a.nrows() == 0 {
        return CMat::zeros(a.ncols(), b.ncols());
    }
    let svd = a.clone().svd(true, true);
    svd.solve(b, rel_tol * svd.singular_values.max())
        .unwrap_or_else(|_| CMat::zeros(a.ncols(), b.ncols()))
}

/// Largest absolute entry; 0.0 for empty matrices.
pub fn max_abs(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Operator norm (largest singular value); 0.0 for empty matrices.
pub fn op_norm(m: &CMat) -> f64 {
    singular_values(m).first().copied().unwrap_or(0.0)
}

/// Residual of `v` against the span of the orthonormal columns `basis`:
/// the norm of `v - B B^H v`.
pub fn span_residual(basis: &CMat, v: &CVec) -> f64 {
    let coeff = basis.adjoint() * v;
    let proj = basis * coeff;
    (v - proj).norm()
}

/// Dimension of the intersection of two orthonormally-spanned subspaces.
pub fn intersection_dim(b1: &CMat, b2: &CMat, rel_tol: f64) -> usize {
    if b1.ncols() == 0 || b2.ncols() == 0 {
        return 0;
    }
    let mut stacked = CMat::zeros(b1.nrows(), b1.ncols() + b2.ncols());
    stacked.columns_mut(0, b1.ncols()).copy_from(b1);
    let mut right = b2.clone();
    right.neg_mut();
    stacked.columns_mut(b1.ncols(), b2.ncols()).copy_from(&right);
    // Null-space pairs (x, y) with B1 x = B2 y correspond to intersection
    // vectors; their count equals the intersection dimension because both
    // bases are injective.
    nullspace(&stacked, rel_tol).ncols()
}

/// Whether span(inner) is contained in span(outer), via rank comparison.
pub fn span_contained(inner: &CMat, outer: &CMat, rel_tol: f64) -> bool {
    if inner.ncols() == 0 {
        return true;
    }
    let r_outer = rank(outer, rel_tol);
    let mut joined = CMat::zeros(outer.nrows(), outer.ncols() + inner.ncols());
    joined.columns_mut(0, outer.ncols()).copy_from(outer);
    joined.columns_mut(outer.ncols(), inner.ncols()).copy_from(inner);
    rank(&joined, rel_tol) == r_outer
}

/// Whether two orthonormal bases span the same subspace.
pub fn span_equal(b1: &CMat, b2: &CMat, rel_tol: f64) -> bool {
    rank(b1, rel_tol) == rank(b2, rel_tol) && span_contained(b1, b2, rel_tol)
}

/// Unitary `exp(iH)` for hermitian `H`, via a scaled Taylor series with
/// repeated squaring. Deterministic and accurate to machine precision at
/// the norms used here.
pub fn exp_i_hermitian(h: &CMat) -> CMat {
    let n = h.nrows();
    assert_eq!(n, h.ncols(), "exp_i_hermitian needs a square matrix");
    if n == 0 {
        return CMat::zeros(0, 0);
    }
    let norm = max_abs(h) * n as f64;
    let mut squarings = 0u32;
    let mut scale = 1.0;
    while norm * scale > 0.5 {
        scale *= 0.5;
        squarings += 1;
    }
    let a = h.map(|z| Complex64::new(0.0, 1.0) * z * Complex64::new(scale, 0.0));
    let mut result = CMat::identity(n, n);
    let mut term = CMat::identity(n, n);
    for k in 1..=16u32 {
        term = (&term * &a).map(|z| z / Complex64::new(k as f64, 0.0));
        result += &term;
    }
    for _ in 0..squarings {
        result = &result * &result;
    }
    result
}

/// How far `u` is from unitary: max entry of `u^H u - I`.
pub fn unitary_residual(u: &CMat) -> f64 {
    let n = u.ncols();
    let gram = u.adjoint() * u;
    max_abs(&(gram - CMat::identity(n, n)))
}

/// Kronecker product a ⊗ b.
pub fn kron(a: &CMat, b: &CMat) -> CMat {
    let (ar, ac) = a.shape();
    let (br, bc) = b.shape();
    let mut out = CMat::zeros(ar * br, ac * bc);
    for i in 0..ar {
        for j in 0..ac {
            let s = a[(i, j)];
            for p in 0..br {
                for q in 0..bc {
                    out[(i * br + p, j * bc + q)] = s * b[(p, q)];
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn nullspace_of_projection_has_dim_one() {
        // Row [1, -1] over C^2: null space spanned by (1, 1)/sqrt(2).
        let m = CMat::from_row_slice(1, 2, &[c(1.0, 0.0), c(-1.0, 0.0)]);
        let ns = nullspace(&m, 1e-7);
        assert_eq!(ns.ncols(), 1);
        assert!((ns[(0, 0)] - ns[(1, 0)]).norm() < 1e-12);
    }

    #[test]
    fn exp_of_hermitian_is_unitary() {
        let h = CMat::from_row_slice(
            2,
            2,
            &[c(0.4, 0.0), c(0.1, 0.3), c(0.1, -0.3), c(-0.2, 0.0)],
        );
        let u = exp_i_hermitian(&h);
        assert!(unitary_residual(&u) < 1e-12);
    }

    #[test]
    fn intersection_of_transverse_planes_is_a_line() {
        // span{e1, e2} and span{e2, e3} inside C^3 intersect in span{e2}.
        let mut b1 = CMat::zeros(3, 2);
        b1[(0, 0)] = cone();
        b1[(1, 1)] = cone();
        let mut b2 = CMat::zeros(3, 2);
        b2[(1, 0)] = cone();
        b2[(2, 1)] = cone();
        assert_eq!(intersection_dim(&b1, &b2, 1e-7), 1);
    }
}
