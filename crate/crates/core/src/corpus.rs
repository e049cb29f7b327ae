//! Shared fixtures: small complexes, canonical squares, deformation-retract
//! data, composable morphism pairs, and deliberately broken inputs used to
//! confirm that the checkers catch real defects.

use num_complex::Complex64;
use thiserror::Error;

use crate::check::{CheckError, Homotopy, NdrPair, PullbackSquare, PushoutSquare};
use crate::complex::{ComplexError, NccwComplex};
use crate::discretize::{
    discretize_algebra, discretize_morphism, ConcreteMorphism, DiscretizeError, Tolerances,
};
use crate::expr::{
    self, AlgebraExpr, BlockMapData, ExprError, GridFraction, Limits, MappingKind, MatrixLit,
    MorphismExpr, TensorFunctor,
};
use crate::linalg::{cone, CMat, CVec};

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error(transparent)]
    Complex(#[from] ComplexError),
    #[error(transparent)]
    Discretize(#[from] DiscretizeError),
    #[error(transparent)]
    Check(#[from] CheckError),
}

pub fn scalars() -> AlgebraExpr {
    expr::finite_dim(&[1]).unwrap()
}

pub fn matrices(n: u32) -> AlgebraExpr {
    expr::finite_dim(&[n]).unwrap()
}

/// Zero-dimensional complex on the given block sizes.
pub fn point_complex(name: &str, sizes: &[u32]) -> Result<NccwComplex, CorpusError> {
    Ok(NccwComplex::point(name, expr::finite_dim(sizes)?)?)
}

/// One vertex and one 1-cell glued along both endpoints.
pub fn circle_complex() -> Result<NccwComplex, CorpusError> {
    let limits = Limits::default();
    let point = scalars();
    let cell = scalars();
    let sphere = expr::apply_functor(TensorFunctor::Sphere(0), cell.clone(), &limits)?;
    let sigma = MorphismExpr::BlockMap {
        domain: Box::new(point.clone()),
        codomain: Box::new(sphere),
        data: BlockMapData { multiplicities: vec![vec![1], vec![1]], unital: true },
    };
    let mut cx = NccwComplex::point("circle", point)?;
    cx.attach(cell, Some(sigma), &limits)?;
    Ok(cx)
}

/// One vertex, no 1-cells, and a single matrix-valued 2-cell whose boundary
/// is sent to constants.
pub fn two_cell_complex() -> Result<NccwComplex, CorpusError> {
    let limits = Limits::default();
    let point = scalars();
    let cell = matrices(2);
    let sphere = expr::apply_functor(TensorFunctor::Sphere(1), cell.clone(), &limits)?;
    let embed = MorphismExpr::BlockMap {
        domain: Box::new(point.clone()),
        codomain: Box::new(cell.clone()),
        data: BlockMapData { multiplicities: vec![vec![2]], unital: true },
    };
    let sigma = MorphismExpr::compose(
        MorphismExpr::ConstantEmbed { target: Box::new(sphere) },
        embed,
    )?;
    let mut cx = NccwComplex::point("disc", point)?;
    cx.attach(AlgebraExpr::Zero, None, &limits)?;
    cx.attach(cell, Some(sigma), &limits)?;
    Ok(cx)
}

/// Rotation of the circle skeleton by a rational angle.
pub fn circle_rotation(num: u64, den: u64) -> Result<MorphismExpr, CorpusError> {
    let cx = circle_complex()?;
    Ok(MorphismExpr::Rotation {
        on: Box::new(cx.skeleton().clone()),
        shift: GridFraction::new(num, den)?,
    })
}

/// Maps used to seed cylinders, cones, retractions, and chains.
pub fn sample_phis() -> Vec<MorphismExpr> {
    vec![
        MorphismExpr::Identity { on: Box::new(matrices(2)) },
        MorphismExpr::Zero { domain: Box::new(matrices(2)), codomain: Box::new(matrices(3)) },
        MorphismExpr::BlockMap {
            domain: Box::new(scalars()),
            codomain: Box::new(matrices(2)),
            data: BlockMapData { multiplicities: vec![vec![2]], unital: true },
        },
    ]
}

/// The defining square of a mapping cylinder or cone of `phi`, returned as
/// the node plus (delta, gamma, alpha, beta) with delta onto the domain of
/// `alpha` and gamma onto the path algebra.
pub fn mapping_square(
    kind: MappingKind,
    phi: MorphismExpr,
) -> Result<(AlgebraExpr, MorphismExpr, MorphismExpr, MorphismExpr, MorphismExpr), CorpusError> {
    let x = expr::mapping_construction(kind, phi)?;
    let (gamma, delta, alpha, beta) = x.canonical_square()?;
    Ok((x, delta, gamma, alpha, beta))
}

/// Discretize a symbolic square at the given resolution.
pub fn concrete_square(
    x: &AlgebraExpr,
    delta: &MorphismExpr,
    gamma: &MorphismExpr,
    alpha: &MorphismExpr,
    beta: &MorphismExpr,
    res: u32,
    tols: &Tolerances,
) -> Result<PullbackSquare, CorpusError> {
    Ok(PullbackSquare {
        x: discretize_algebra(x, res, tols)?.0,
        delta: discretize_morphism(delta, res, tols)?.0,
        gamma: discretize_morphism(gamma, res, tols)?.0,
        alpha: discretize_morphism(alpha, res, tols)?.0,
        beta: discretize_morphism(beta, res, tols)?.0,
    })
}

// ---------------------------------------------------------------------------
// Composable pairs and refinement suite
// ---------------------------------------------------------------------------

/// Twenty composable pairs `(after, before)` covering every morphism
/// constructor; discretization must carry composition to matrix product.
pub fn functoriality_pairs() -> Result<Vec<(MorphismExpr, MorphismExpr)>, CorpusError> {
    let c1 = scalars();
    let m2 = matrices(2);
    let m3 = matrices(3);
    let m23 = expr::finite_dim(&[2, 3])?;
    let m22 = expr::finite_dim(&[2, 2])?;
    let i_c = AlgebraExpr::IntervalTensor { n: 1, base: Box::new(c1.clone()) };
    let i_m2 = AlgebraExpr::IntervalTensor { n: 1, base: Box::new(m2.clone()) };
    let i_m23 = AlgebraExpr::IntervalTensor { n: 1, base: Box::new(m23.clone()) };
    let sq_c = AlgebraExpr::IntervalTensor { n: 2, base: Box::new(c1.clone()) };
    let s_c = AlgebraExpr::OpenCubeTensor { n: 1, base: Box::new(c1.clone()) };
    let hd_c = AlgebraExpr::HalfOpenTensor { base: Box::new(c1.clone()) };
    let id_m2 = MorphismExpr::Identity { on: Box::new(m2.clone()) };
    let cyl_id = expr::mapping_construction(MappingKind::Cylinder, id_m2.clone())?;
    let double = MorphismExpr::BlockMap {
        domain: Box::new(c1.clone()),
        codomain: Box::new(m2.clone()),
        data: BlockMapData { multiplicities: vec![vec![2]], unital: true },
    };
    let section = MorphismExpr::IntoPullback {
        target: Box::new(cyl_id.clone()),
        left: Box::new(id_m2.clone()),
        right: Box::new(MorphismExpr::ConstantEmbed { target: Box::new(i_m2.clone()) }),
    };
    let circle = circle_complex()?;
    let rho = circle.stages[1].rho.clone();
    let pi = circle.stages[1].pi.clone();
    let diag = expr::pullback_expr(id_m2.clone(), id_m2.clone())?;
    let into_diag = MorphismExpr::IntoPullback {
        target: Box::new(diag.clone()),
        left: Box::new(id_m2.clone()),
        right: Box::new(id_m2.clone()),
    };
    let swap = MorphismExpr::BlockMap {
        domain: Box::new(m22.clone()),
        codomain: Box::new(m22.clone()),
        data: BlockMapData { multiplicities: vec![vec![0, 1], vec![1, 0]], unital: true },
    };
    let winding = MorphismExpr::WindingEmbed {
        domain: Box::new(c1.clone()),
        target: Box::new(AlgebraExpr::SphereTensor { n: 1, base: Box::new(m2.clone()) }),
        data: BlockMapData { multiplicities: vec![vec![2]], unital: true },
        k: MatrixLit {
            rows: vec![vec![(1.0, 0.0), (0.0, 0.0)], vec![(0.0, 0.0), (0.0, 0.0)]],
        },
        winds: 1,
    };

    let half = GridFraction::new(1, 2)?;
    let pairs = vec![
        (
            MorphismExpr::Evaluation { t: GridFraction::one(), on: Box::new(i_m2.clone()) },
            MorphismExpr::Identity { on: Box::new(i_m2.clone()) },
        ),
        (
            MorphismExpr::Evaluation { t: GridFraction::zero(), on: Box::new(i_m2.clone()) },
            MorphismExpr::ConstantEmbed { target: Box::new(i_m2.clone()) },
        ),
        (
            double.clone(),
            MorphismExpr::Evaluation { t: half, on: Box::new(i_c.clone()) },
        ),
        (id_m2.clone(), double.clone()),
        (MorphismExpr::ProjectionFirst { of: Box::new(cyl_id.clone()) }, section.clone()),
        (MorphismExpr::ProjectionSecond { of: Box::new(cyl_id.clone()) }, section.clone()),
        (
            MorphismExpr::compose(
                MorphismExpr::Evaluation { t: GridFraction::one(), on: Box::new(i_m2.clone()) },
                MorphismExpr::ProjectionSecond { of: Box::new(cyl_id.clone()) },
            )?,
            section.clone(),
        ),
        (
            MorphismExpr::Zero { domain: Box::new(m2.clone()), codomain: Box::new(m3.clone()) },
            MorphismExpr::ProjectionFirst { of: Box::new(cyl_id.clone()) },
        ),
        (
            MorphismExpr::SuspendedMorphism { f: Box::new(double.clone()) },
            MorphismExpr::SuspendedMorphism {
                f: Box::new(MorphismExpr::Identity { on: Box::new(c1.clone()) }),
            },
        ),
        (circle_rotation(1, 2)?, circle_rotation(1, 4)?),
        (
            winding,
            MorphismExpr::BlockMap {
                domain: Box::new(c1.clone()),
                codomain: Box::new(c1.clone()),
                data: BlockMapData { multiplicities: vec![vec![1]], unital: true },
            },
        ),
        (
            MorphismExpr::BoundaryRestrict { on: Box::new(sq_c.clone()) },
            MorphismExpr::ConstantEmbed { target: Box::new(sq_c.clone()) },
        ),
        (
            MorphismExpr::Evaluation { t: GridFraction::one(), on: Box::new(i_c.clone()) },
            MorphismExpr::ZeroExtend { from: Box::new(hd_c.clone()), to: Box::new(i_c.clone()) },
        ),
        (
            MorphismExpr::DirectPair {
                left: Box::new(MorphismExpr::Evaluation {
                    t: GridFraction::zero(),
                    on: Box::new(i_c.clone()),
                }),
                right: Box::new(MorphismExpr::Evaluation {
                    t: GridFraction::one(),
                    on: Box::new(i_c.clone()),
                }),
            },
            MorphismExpr::ConstantEmbed { target: Box::new(i_c.clone()) },
        ),
        (
            MorphismExpr::BlockMap {
                domain: Box::new(AlgebraExpr::DirectSum {
                    left: Box::new(c1.clone()),
                    right: Box::new(c1.clone()),
                }),
                codomain: Box::new(m2.clone()),
                data: BlockMapData { multiplicities: vec![vec![1, 1]], unital: true },
            },
            MorphismExpr::DirectPair {
                left: Box::new(MorphismExpr::Identity { on: Box::new(c1.clone()) }),
                right: Box::new(MorphismExpr::Identity { on: Box::new(c1.clone()) }),
            },
        ),
        (MorphismExpr::ProjectionSecond { of: Box::new(diag.clone()) }, into_diag.clone()),
        (pi, rho),
        (
            MorphismExpr::Evaluation { t: half, on: Box::new(i_m23.clone()) },
            MorphismExpr::ConstantEmbed { target: Box::new(i_m23.clone()) },
        ),
        (
            MorphismExpr::SuspendedMorphism {
                f: Box::new(MorphismExpr::Zero {
                    domain: Box::new(c1.clone()),
                    codomain: Box::new(m2.clone()),
                }),
            },
            MorphismExpr::Identity { on: Box::new(s_c.clone()) },
        ),
        (swap.clone(), swap),
    ];
    Ok(pairs)
}

/// One morphism per constructor, for checking that restriction to a coarser
/// grid commutes with discretization.
pub fn restriction_suite() -> Result<Vec<MorphismExpr>, CorpusError> {
    let c1 = scalars();
    let m2 = matrices(2);
    let m23 = expr::finite_dim(&[2, 3])?;
    let i_c = AlgebraExpr::IntervalTensor { n: 1, base: Box::new(c1.clone()) };
    let i_m2 = AlgebraExpr::IntervalTensor { n: 1, base: Box::new(m2.clone()) };
    let sq_c = AlgebraExpr::IntervalTensor { n: 2, base: Box::new(c1.clone()) };
    let hd_c = AlgebraExpr::HalfOpenTensor { base: Box::new(c1.clone()) };
    let id_m2 = MorphismExpr::Identity { on: Box::new(m2.clone()) };
    let cyl_id = expr::mapping_construction(MappingKind::Cylinder, id_m2.clone())?;
    let section = MorphismExpr::IntoPullback {
        target: Box::new(cyl_id.clone()),
        left: Box::new(id_m2.clone()),
        right: Box::new(MorphismExpr::ConstantEmbed { target: Box::new(i_m2.clone()) }),
    };
    let double = MorphismExpr::BlockMap {
        domain: Box::new(c1.clone()),
        codomain: Box::new(m2.clone()),
        data: BlockMapData { multiplicities: vec![vec![2]], unital: true },
    };
    Ok(vec![
        MorphismExpr::Identity { on: Box::new(i_m2.clone()) },
        MorphismExpr::Evaluation { t: GridFraction::new(1, 2)?, on: Box::new(i_m2.clone()) },
        MorphismExpr::ConstantEmbed { target: Box::new(i_m2.clone()) },
        MorphismExpr::BoundaryRestrict { on: Box::new(sq_c.clone()) },
        MorphismExpr::ProjectionFirst { of: Box::new(cyl_id.clone()) },
        MorphismExpr::ProjectionSecond { of: Box::new(cyl_id.clone()) },
        MorphismExpr::SuspendedMorphism { f: Box::new(double.clone()) },
        MorphismExpr::BlockMap {
            domain: Box::new(m23.clone()),
            codomain: Box::new(m23.clone()),
            data: BlockMapData { multiplicities: vec![vec![1, 0], vec![0, 1]], unital: true },
        },
        circle_rotation(1, 2)?,
        section,
        MorphismExpr::DirectPair {
            left: Box::new(MorphismExpr::Evaluation {
                t: GridFraction::zero(),
                on: Box::new(i_c.clone()),
            }),
            right: Box::new(MorphismExpr::Evaluation {
                t: GridFraction::one(),
                on: Box::new(i_c.clone()),
            }),
        },
        MorphismExpr::ZeroExtend { from: Box::new(hd_c.clone()), to: Box::new(i_c.clone()) },
        MorphismExpr::Zero { domain: Box::new(i_c.clone()), codomain: Box::new(m2.clone()) },
        MorphismExpr::WindingEmbed {
            domain: Box::new(c1.clone()),
            target: Box::new(AlgebraExpr::SphereTensor { n: 1, base: Box::new(m2.clone()) }),
            data: BlockMapData { multiplicities: vec![vec![2]], unital: true },
            k: MatrixLit {
                rows: vec![vec![(1.0, 0.0), (0.0, 0.0)], vec![(0.0, 0.0), (0.0, 0.0)]],
            },
            winds: 1,
        },
    ])
}

// ---------------------------------------------------------------------------
// Deformation-retract fixtures
// ---------------------------------------------------------------------------

/// Functions on two points with the second coordinate as ideal, detected by
/// reading the grid endpoints in swapped order; the deformation is constant.
pub fn two_point_pair(res: u32) -> Result<NdrPair, CorpusError> {
    let n = res as usize;
    let tols = Tolerances::default();
    let (b, _) = discretize_algebra(&expr::finite_dim(&[1, 1])?, res, &tols)?;
    let mut ideal = CMat::zeros(2, 1);
    ideal[(1, 0)] = cone();
    let grid = AlgebraExpr::IntervalTensor { n: 1, base: Box::new(scalars()) };
    let (grid_c, _) = discretize_algebra(&grid, res, &tols)?;
    let mut u_mat = CMat::zeros(2, n + 1);
    u_mat[(0, n)] = cone();
    u_mat[(1, 0)] = cone();
    let u = ConcreteMorphism {
        label: "swap reader".to_string(),
        dom: grid_c,
        cod: b.clone(),
        mat: u_mat,
    };
    let slices = vec![CMat::identity(2, 2); n + 1];
    let phi = Homotopy::from_slices(&b, &b, &slices, res)?;
    Ok(NdrPair { algebra: b, ideal_basis: ideal, u, phi })
}

/// The circle with the vertex coordinate as ideal: the detecting function
/// is the doubled distance from the vertex and the deformation multiplies
/// by the indicator of a collar shrinking onto the vertex.
pub fn circle_collar_pair(res: u32) -> Result<NdrPair, CorpusError> {
    let n = res as usize;
    let tols = Tolerances::default();
    let cx = circle_complex()?;
    let (d, _) = discretize_algebra(cx.skeleton(), res, &tols)?;
    let amb = d.ambient_dim();
    debug_assert_eq!(amb, n + 2);

    let s = Complex64::new(1.0 / 3f64.sqrt(), 0.0);
    let mut c = CVec::zeros(amb);
    c[0] = s;
    c[n] = s;
    c[n + 1] = s;
    let ideal = CMat::from_columns(&[c]);

    let grid = AlgebraExpr::IntervalTensor { n: 1, base: Box::new(scalars()) };
    let (grid_c, _) = discretize_algebra(&grid, res, &tols)?;
    let mut u_mat = CMat::zeros(amb, n + 1);
    for i in 0..=n {
        u_mat[(i, 2 * i.min(n - i))] = cone();
    }
    u_mat[(n + 1, 0)] = cone();
    let u = ConcreteMorphism {
        label: "vertex distance".to_string(),
        dom: grid_c,
        cod: d.clone(),
        mat: u_mat,
    };

    let mut slices = Vec::with_capacity(n + 1);
    for j in 0..=n {
        let mut m = CMat::zeros(amb, amb);
        for i in 0..=n {
            if 2 * i.min(n - i) <= n - j {
                m[(i, i)] = cone();
            }
        }
        m[(n + 1, n + 1)] = cone();
        slices.push(m);
    }
    let phi = Homotopy::from_slices(&d, &d, &slices, res)?;
    Ok(NdrPair { algebra: d, ideal_basis: ideal, u, phi })
}

/// Collar data whose deformation does not start at the identity; the pair
/// check must fail on exactly that condition.
pub fn broken_collar_pair(res: u32) -> Result<NdrPair, CorpusError> {
    let pair = circle_collar_pair(res)?;
    let n = res as usize;
    let amb = pair.algebra.ambient_dim();
    let mut slices: Vec<CMat> = (0..=res)
        .map(|j| pair.phi.slice(j).mat)
        .collect();
    slices[0] = slices[n].clone();
    let phi = Homotopy::from_slices(&pair.algebra, &pair.algebra, &slices, res)?;
    debug_assert_eq!(phi.map.mat.ncols(), amb);
    Ok(NdrPair { phi, ..pair })
}

// ---------------------------------------------------------------------------
// Negative controls
// ---------------------------------------------------------------------------

/// A commuting square that is not a fiber product: both legs read the first
/// coordinate of C^2, so they share a kernel line.
pub fn overlapping_pullback(res: u32) -> Result<PullbackSquare, CorpusError> {
    let tols = Tolerances::default();
    let b2 = expr::finite_dim(&[1, 1])?;
    let c1 = scalars();
    let first = MorphismExpr::BlockMap {
        domain: Box::new(b2.clone()),
        codomain: Box::new(c1.clone()),
        data: BlockMapData { multiplicities: vec![vec![1, 0]], unital: true },
    };
    let ident = MorphismExpr::Identity { on: Box::new(c1.clone()) };
    Ok(PullbackSquare {
        x: discretize_algebra(&b2, res, &tols)?.0,
        delta: discretize_morphism(&first, res, &tols)?.0,
        gamma: discretize_morphism(&first, res, &tols)?.0,
        alpha: discretize_morphism(&ident, res, &tols)?.0,
        beta: discretize_morphism(&ident, res, &tols)?.0,
    })
}

/// A commuting square that is not a pushout: both legs land in the scalar
/// multiples of the identity of M2, which generate a 1-dimensional algebra.
pub fn non_generating_pushout(res: u32) -> Result<PushoutSquare, CorpusError> {
    let tols = Tolerances::default();
    let c1 = scalars();
    let m2 = matrices(2);
    let diag = MorphismExpr::BlockMap {
        domain: Box::new(c1.clone()),
        codomain: Box::new(m2.clone()),
        data: BlockMapData { multiplicities: vec![vec![2]], unital: true },
    };
    let ident = MorphismExpr::Identity { on: Box::new(c1.clone()) };
    Ok(PushoutSquare {
        x: discretize_algebra(&m2, res, &tols)?.0,
        delta: discretize_morphism(&diag, res, &tols)?.0,
        gamma: discretize_morphism(&diag, res, &tols)?.0,
        f: discretize_morphism(&ident, res, &tols)?.0,
        g: discretize_morphism(&ident, res, &tols)?.0,
    })
}

/// The identity on a block algebra with one off-diagonal ambient entry
/// nudged, breaking multiplicativity at a detectable size.
pub fn corrupted_identity(sizes: &[u32], eps: f64) -> Result<ConcreteMorphism, CorpusError> {
    let tols = Tolerances::default();
    let (a, _) = discretize_algebra(&expr::finite_dim(sizes)?, 1, &tols)?;
    let amb = a.ambient_dim();
    let mut mat = CMat::identity(amb, amb);
    mat[(0, amb.min(2) - 1)] += Complex64::new(eps, 0.0);
    Ok(ConcreteMorphism {
        label: format!("corrupted id on {}", a.label),
        dom: a.clone(),
        cod: a,
        mat,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::check::{
        check_ndr_pair, check_pullback_universal, check_pushout_universal, check_star_hom,
        CheckConfig, Status,
    };
    use crate::discretize::linear_dim;
    use crate::linalg;

    #[test]
    fn the_two_point_model_satisfies_the_retract_conditions() {
        let pair = two_point_pair(4).unwrap();
        let cfg = CheckConfig::default();
        let report = check_ndr_pair("twopoint", &pair, &cfg).unwrap();
        assert!(report.passed(), "{:?}", report.witness);
    }

    #[test]
    fn the_circle_collar_satisfies_the_retract_conditions() {
        let cfg = CheckConfig::default();
        for n in [2, 4, 8] {
            let pair = circle_collar_pair(n).unwrap();
            let report = check_ndr_pair("collar", &pair, &cfg).unwrap();
            assert!(report.passed(), "n={n}: {:?}", report.witness);
        }
    }

    #[test]
    fn the_broken_collar_fails_on_the_identity_condition() {
        let pair = broken_collar_pair(4).unwrap();
        let cfg = CheckConfig::default();
        let report = check_ndr_pair("broken", &pair, &cfg).unwrap();
        assert_eq!(report.status, Status::Fail);
        let witness = report.witness.unwrap();
        let failed = witness["failed_conditions"].as_array().unwrap();
        assert!(failed
            .iter()
            .any(|f| f["condition"].as_str().unwrap().contains("identity")));
    }

    #[test]
    fn the_overlapping_square_is_rejected_with_a_kernel_witness() {
        let sq = overlapping_pullback(2).unwrap();
        let cfg = CheckConfig::default();
        let report = check_pullback_universal("overlap", &sq, &[], &cfg);
        assert_eq!(report.status, Status::Fail);
        assert!(report.witness.unwrap()["kernel_vector"].is_array());
    }

    #[test]
    fn the_scalar_legs_do_not_generate_the_matrix_algebra() {
        let sq = non_generating_pushout(2).unwrap();
        let cfg = CheckConfig::default();
        let report = check_pushout_universal("diag", &sq, &cfg);
        assert_eq!(report.status, Status::Fail);
        assert_eq!(report.witness.unwrap()["kind"], "legs_do_not_generate");
    }

    #[test]
    fn every_functoriality_pair_composes_and_factors() {
        let cfg = CheckConfig::default();
        let pairs = functoriality_pairs().unwrap();
        assert_eq!(pairs.len(), 20);
        for (idx, (after, before)) in pairs.iter().enumerate() {
            let composite = MorphismExpr::compose(after.clone(), before.clone()).unwrap();
            let (c, _) = discretize_morphism(&composite, 4, &cfg.tols).unwrap();
            let (a, _) = discretize_morphism(after, 4, &cfg.tols).unwrap();
            let (b, _) = discretize_morphism(before, 4, &cfg.tols).unwrap();
            let defect = linalg::max_abs(&(&c.mat - &a.mat * &b.mat));
            assert!(defect < 1e-12, "pair {idx}: composite differs by {defect}");
            let report = check_star_hom(&format!("pair{idx}"), &c, &cfg);
            assert!(report.passed(), "pair {idx} composite is not a *-hom");
        }
    }

    #[test]
    fn the_disc_complex_has_one_cell_per_interior_grid_point() {
        let cx = two_cell_complex().unwrap();
        for n in [2u32, 4] {
            let m = n as usize;
            let dim = linear_dim(cx.skeleton(), n).unwrap();
            assert_eq!(dim, (m - 1) * (m - 1) * 4 + 1);
        }
    }

    #[test]
    fn the_corrupted_identity_is_caught() {
        let cfg = CheckConfig::default();
        let bad = corrupted_identity(&[2], 1e-3).unwrap();
        let report = check_star_hom("bad", &bad, &cfg);
        assert_eq!(report.status, Status::Fail);
        assert!(report.max_residual > 1e-4);
    }
}
