//! Dimension and rank facts checked two ways: the production discretizer
//! against constraint systems assembled by hand and row-reduced by the
//! naive reference code in `support`.

mod support;

use nccw_core::discretize::{
    discretize_algebra, linear_dim, Discretizer, Tolerances, Warnings,
};
use nccw_core::expr::{
    self, AlgebraExpr, BlockMapData, MappingKind, MorphismExpr,
};
use nccw_core::fdalg::{
    generated_subalgebra, quotient_by_blocks, BlockShape, MultiplicityMorphism,
};
use num_complex::Complex64;

const TOL: f64 = 1e-9;

fn one() -> Complex64 {
    Complex64::new(1.0, 0.0)
}

fn m(n: u32) -> AlgebraExpr {
    expr::finite_dim(&[n]).unwrap()
}

fn id_on(a: AlgebraExpr) -> MorphismExpr {
    MorphismExpr::Identity { on: Box::new(a) }
}

#[test]
fn cylinder_of_the_identity_has_the_predicted_dimension() {
    // Pairs (a, g) with g a path of 2x2 matrices on {0, 1/2, 1} and g(1) = a.
    // Ambient: 4 coordinates for a, then 4 per path point.
    let n = 2usize;
    let amb = 4 + (n + 1) * 4;
    let mut rows = support::zeros(4, amb);
    for i in 0..4 {
        rows[i][4 + n * 4 + i] = one();
        rows[i][i] = -one();
    }
    assert_eq!(support::nullity(rows, TOL), 12);

    let cyl = expr::mapping_construction(MappingKind::Cylinder, id_on(m(2))).unwrap();
    let (c, _) = discretize_algebra(&cyl, n as u32, &Tolerances::default()).unwrap();
    assert_eq!(c.dim(), 12);
    assert_eq!(linear_dim(&cyl, n as u32).unwrap(), 12);
}

#[test]
fn block_and_tensor_dimensions_are_sums_and_products() {
    let tols = Tolerances::default();
    let m23 = expr::finite_dim(&[2, 3]).unwrap();
    assert_eq!(linear_dim(&m23, 1).unwrap(), 13);

    let i_m2 = AlgebraExpr::IntervalTensor { n: 1, base: Box::new(m(2)) };
    assert_eq!(linear_dim(&i_m2, 4).unwrap(), 20);
    let (c, _) = discretize_algebra(&i_m2, 4, &tols).unwrap();
    assert_eq!(c.dim(), 20);

    let pair = AlgebraExpr::DirectSum { left: Box::new(m(1)), right: Box::new(m(2)) };
    let s0 = AlgebraExpr::SphereTensor { n: 0, base: Box::new(pair) };
    assert_eq!(linear_dim(&s0, 3).unwrap(), 10);
    let (c, _) = discretize_algebra(&s0, 3, &tols).unwrap();
    assert_eq!(c.dim(), 10);
}

#[test]
fn cone_of_scalars_loses_exactly_the_pinned_endpoint() {
    // Paths on the half-open grid {1/4, ..., 1} with g(1) = a: five ambient
    // coordinates, one constraint.
    let n = 4usize;
    let amb = 1 + n;
    let mut rows = support::zeros(1, amb);
    rows[0][1 + (n - 1)] = one();
    rows[0][0] = -one();
    assert_eq!(support::nullity(rows, TOL), 4);

    let cone = expr::mapping_construction(MappingKind::Cone, id_on(m(1))).unwrap();
    let (c, _) = discretize_algebra(&cone, n as u32, &Tolerances::default()).unwrap();
    assert_eq!(c.dim(), 4);
    assert_eq!(linear_dim(&cone, n as u32).unwrap(), 4);
}

#[test]
fn fiber_products_match_hand_rolled_constraint_systems() {
    let tols = Tolerances::default();

    // Same identity on both legs: the diagonal in M2 + M2.
    let mut rows = support::zeros(4, 8);
    for i in 0..4 {
        rows[i][i] = one();
        rows[i][4 + i] = -one();
    }
    assert_eq!(support::nullity(rows, TOL), 4);
    let diag = expr::pullback_expr(id_on(m(2)), id_on(m(2))).unwrap();
    let (c, _) = discretize_algebra(&diag, 2, &tols).unwrap();
    assert_eq!(c.dim(), 4);

    // First projection of C^2 against the identity of C.
    let mut rows = support::zeros(1, 3);
    rows[0][0] = one();
    rows[0][2] = -one();
    assert_eq!(support::nullity(rows, TOL), 2);
    let first = MorphismExpr::BlockMap {
        domain: Box::new(expr::finite_dim(&[1, 1]).unwrap()),
        codomain: Box::new(m(1)),
        data: BlockMapData { multiplicities: vec![vec![1, 0]], unital: true },
    };
    let pb = expr::pullback_expr(first, id_on(m(1))).unwrap();
    let (c, _) = discretize_algebra(&pb, 2, &tols).unwrap();
    assert_eq!(c.dim(), 2);

    // Legs into the zero algebra constrain nothing.
    let pb = expr::pullback_expr(
        MorphismExpr::Zero { domain: Box::new(m(2)), codomain: Box::new(AlgebraExpr::Zero) },
        MorphismExpr::Zero { domain: Box::new(m(3)), codomain: Box::new(AlgebraExpr::Zero) },
    )
    .unwrap();
    let (c, _) = discretize_algebra(&pb, 2, &tols).unwrap();
    assert_eq!(c.dim(), 13);
}

#[test]
fn circle_skeleton_identifies_both_interval_endpoints() {
    let n = 4usize;
    // Ambient: n + 1 interval values, then the vertex value.
    let amb = n + 2;
    let mut rows = support::zeros(2, amb);
    rows[0][0] = one();
    rows[0][n + 1] = -one();
    rows[1][n] = one();
    rows[1][n + 1] = -one();
    assert_eq!(support::nullity(rows, TOL), 4);

    let cx = nccw_core::corpus::circle_complex().unwrap();
    assert_eq!(linear_dim(cx.skeleton(), n as u32).unwrap(), 4);
    // One open cell per interior grid point plus the vertex.
    assert_eq!((n - 1) + 1, 4);
}

#[test]
fn disc_skeleton_pins_the_square_boundary_to_constants() {
    for n in [2usize, 4] {
        let pts = (n + 1) * (n + 1);
        let amb = pts * 4 + 1;
        // Row-major flattening of diag(a, a) hits entries 0 and 3.
        let embed = [one(), Complex64::default(), Complex64::default(), one()];
        let mut rows = Vec::new();
        for c0 in 0..=n {
            for c1 in 0..=n {
                if c0 != 0 && c0 != n && c1 != 0 && c1 != n {
                    continue;
                }
                let p = c0 * (n + 1) + c1;
                for e in 0..4 {
                    let mut row = vec![Complex64::default(); amb];
                    row[p * 4 + e] = one();
                    row[pts * 4] = -embed[e];
                    rows.push(row);
                }
            }
        }
        assert_eq!(support::nullity(rows, TOL), (n - 1) * (n - 1) * 4 + 1);

        let cx = nccw_core::corpus::two_cell_complex().unwrap();
        assert_eq!(
            linear_dim(cx.skeleton(), n as u32).unwrap(),
            (n - 1) * (n - 1) * 4 + 1
        );
    }
}

#[test]
fn restriction_onto_the_coarse_grid_is_surjective() {
    let tols = Tolerances::default();
    let i_c = AlgebraExpr::IntervalTensor { n: 1, base: Box::new(m(1)) };
    let mut w = Warnings::default();
    let mut d = Discretizer { res: 4, tols, warnings: &mut w };
    let r = d.restriction(&i_c, 2).unwrap();
    assert_eq!(r.dom.dim(), 5);
    assert_eq!(r.cod.dim(), 3);
    assert_eq!(support::rank(support::from_cmat(&r.mat), TOL), 3);
}

#[test]
fn generated_subalgebras_match_known_spans() {
    let m2 = BlockShape::new(vec![2]).unwrap();
    let e12 = {
        let mut e = m2.zero();
        e.blocks[0][(0, 1)] = one();
        e
    };
    let basis = generated_subalgebra(&m2, &[e12], 1e-9).unwrap();
    assert_eq!(basis.ncols(), 4);
    assert_eq!(support::rank(support::from_cmat(&basis), TOL), 4);

    let unit = m2.identity();
    let basis = generated_subalgebra(&m2, &[unit], 1e-9).unwrap();
    assert_eq!(basis.ncols(), 1);

    let c2 = BlockShape::new(vec![1, 1]).unwrap();
    let p = {
        let mut e = c2.zero();
        e.blocks[0][(0, 0)] = one();
        e
    };
    let basis = generated_subalgebra(&c2, &[p], 1e-9).unwrap();
    assert_eq!(basis.ncols(), 1);
}

#[test]
fn block_quotients_and_multiplicity_composition() {
    let m23 = BlockShape::new(vec![2, 3]).unwrap();
    let q = quotient_by_blocks(&m23, &[0]).unwrap();
    let qm = q.linear_matrix();
    assert_eq!(support::rank(support::from_cmat(&qm), TOL), 9);
    assert_eq!(support::nullity(support::from_cmat(&qm), TOL), 4);

    let s1 = BlockShape::new(vec![1]).unwrap();
    let s3 = BlockShape::new(vec![3]).unwrap();
    let s6 = BlockShape::new(vec![6]).unwrap();
    let triple = MultiplicityMorphism::standard(s1.clone(), s3.clone(), vec![vec![3]]).unwrap();
    let double = MultiplicityMorphism::standard(s3, s6.clone(), vec![vec![2]]).unwrap();
    let six = MultiplicityMorphism::standard(s1, s6, vec![vec![6]]).unwrap();
    let composed = double.compose(&triple).unwrap();
    let lhs = support::from_cmat(&composed.linear_matrix());
    let rhs = support::from_cmat(&six.linear_matrix());
    let prod = support::matmul(
        &support::from_cmat(&double.linear_matrix()),
        &support::from_cmat(&triple.linear_matrix()),
    );
    let mut diff = lhs.clone();
    for (i, row) in diff.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            *v -= rhs[i][j];
        }
    }
    assert!(support::max_abs(&diff) < 1e-12);
    let mut diff = prod;
    for (i, row) in diff.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            *v -= rhs[i][j];
        }
    }
    assert!(support::max_abs(&diff) < 1e-12);
}

#[test]
fn operator_norm_of_a_diagonal_is_its_largest_modulus() {
    let shape = BlockShape::new(vec![2]).unwrap();
    let mut e = shape.zero();
    e.blocks[0][(0, 0)] = Complex64::new(3.0, 0.0);
    e.blocks[0][(1, 1)] = Complex64::new(-4.0, 0.0);
    assert!((e.norm() - 4.0).abs() < 1e-12);
}

#[test]
fn multiplicity_images_computed_by_hand() {
    let s1 = BlockShape::new(vec![1]).unwrap();
    let s2 = BlockShape::new(vec![2]).unwrap();
    let doubled = MultiplicityMorphism::standard(s1.clone(), s2.clone(), vec![vec![2]]).unwrap();
    let mut x = s1.zero();
    x.blocks[0][(0, 0)] = Complex64::new(3.0, 0.0);
    let y = doubled.apply(&x).unwrap();
    let mut want = s2.zero();
    want.blocks[0][(0, 0)] = Complex64::new(3.0, 0.0);
    want.blocks[0][(1, 1)] = Complex64::new(3.0, 0.0);
    assert!((y.add(&want.scale(Complex64::new(-1.0, 0.0)))).norm() < 1e-12);

    let c2 = BlockShape::new(vec![1, 1]).unwrap();
    let interleave = MultiplicityMorphism::standard(c2.clone(), s2.clone(), vec![vec![1, 1]]).unwrap();
    let mut x = c2.zero();
    x.blocks[0][(0, 0)] = Complex64::new(2.0, 0.0);
    x.blocks[1][(0, 0)] = Complex64::new(5.0, 0.0);
    let y = interleave.apply(&x).unwrap();
    assert!((y.blocks[0][(0, 0)] - Complex64::new(2.0, 0.0)).norm() < 1e-12);
    assert!((y.blocks[0][(1, 1)] - Complex64::new(5.0, 0.0)).norm() < 1e-12);
    assert!(y.blocks[0][(0, 1)].norm() < 1e-12);
}

#[test]
fn cone_splitting_dimension_budget_holds() {
    let tols = Tolerances::default();
    let m23 = expr::finite_dim(&[2, 3]).unwrap();
    let iota = MorphismExpr::BlockMap {
        domain: Box::new(m(2)),
        codomain: Box::new(m23.clone()),
        data: BlockMapData { multiplicities: vec![vec![1], vec![0]], unital: false },
    };
    let cone = expr::mapping_construction(MappingKind::Cone, iota).unwrap();
    for n in [2usize, 4] {
        // One constraint per ambient entry of M2 + M3 at the pinned end.
        let amb = 4 + n * 13;
        let iota_cols: [Option<usize>; 13] = {
            let mut v = [None; 13];
            for (i, slot) in v.iter_mut().enumerate().take(4) {
                *slot = Some(i);
            }
            v
        };
        let mut rows = support::zeros(13, amb);
        for (e, row) in rows.iter_mut().enumerate() {
            row[4 + (n - 1) * 13 + e] = one();
            if let Some(src) = iota_cols[e] {
                row[src] = -one();
            }
        }
        assert_eq!(support::nullity(rows, TOL), 13 * n - 9);

        let (c, _) = discretize_algebra(&cone, n as u32, &tols).unwrap();
        assert_eq!(c.dim(), 13 * n - 9);
        let half = AlgebraExpr::HalfOpenTensor { base: Box::new(m(2)) };
        let susp = AlgebraExpr::OpenCubeTensor { n: 1, base: Box::new(m(3)) };
        assert_eq!(
            linear_dim(&half, n as u32).unwrap() + linear_dim(&susp, n as u32).unwrap(),
            13 * n - 9
        );
    }
}
