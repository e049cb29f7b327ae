//! Straightening maps to cellular form and extending deformations along
//! retract data.
//!
//! Two constructions live here. `extend_relative` takes a map into a
//! discretized mapping cylinder together with deformation-retract data on
//! its domain and fills a square of maps whose bottom edge is the extended
//! deformation; every face of the square is certified numerically.
//! `cellular_approximate` deforms a grid rotation on a complex into a map
//! that respects the stage filtration, one time segment per stage.

use serde_json::json;
use std::collections::HashMap;

use crate::check::{
    check_homotopy, check_star_hom, CheckConfig, CheckError, CheckReport, Homotopy, NdrPair,
    Status,
};
use crate::complex::NccwComplex;
use crate::discretize::{
    discretize_algebra, discretize_morphism, interval_tensor_concrete, ConcreteMorphism,
    DiscretizeError, Tolerances,
};
use crate::expr::{ExprError, GridFraction, MorphismExpr};
use crate::linalg::{self, CMat, CVec};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ApproxError {
    #[error("map is neither cellular nor a grid rotation; straightening covers only rotations (got {found})")]
    NotStraightenable { found: String },
    #[error("rotation shift {num}/{den} does not lie on the grid of resolution {res}")]
    ShiftOffGrid { num: u64, den: u64, res: u32 },
    #[error("shape mismatch in {context}: {left} vs {right}")]
    Shape { context: String, left: usize, right: usize },
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error(transparent)]
    Discretize(#[from] DiscretizeError),
    #[error(transparent)]
    Check(#[from] CheckError),
}

// ---------------------------------------------------------------------------
// Relative extension along deformation-retract data
// ---------------------------------------------------------------------------

/// Round `i * (n - j) / n` to the nearest integer, half away from zero.
fn snap(i: usize, j: usize, n: usize) -> usize {
    (2 * i * (n - j) + n) / (2 * n)
}

/// Largest entry modulus in `v[start .. start + len]`.
fn block_inf(v: &CVec, start: usize, len: usize) -> f64 {
    v.rows(start, len).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Extends a deformation along retract data on the domain.
///
/// `f` maps `pair.algebra` into a discretized mapping cylinder of `iota`,
/// laid out as one `iota.dom` block followed by `res + 1` path points valued
/// in `iota.cod`. The distinguished ideal of `pair` must be carried by `f`
/// into the closed end of the cylinder, with values in the image of `iota`.
///
/// The construction fills a square: writing `f1` for the path part of `f`
/// and `phi` for the deformation of the pair, the point `(i, j)` of the
/// square holds `f1(phi_{w/n}(d))` evaluated at `(j + w)/n` where
/// `w = round(i (n - j) / n)`. The four faces are then the original path
/// part (`i = 0`), the constant end value (`j = n`), the end values of the
/// deformed argument (`i = n`), and the extended deformation itself
/// (`j = 0`), which is returned as a homotopy.
///
/// When `ndr_status` is not `Pass` the extension is not attempted and a
/// single skip report is returned.
pub fn extend_relative(
    prefix: &str,
    pair: &NdrPair,
    f: &ConcreteMorphism,
    iota: &ConcreteMorphism,
    ndr_status: Status,
    cfg: &CheckConfig,
) -> Result<(Option<Homotopy>, Vec<CheckReport>), ApproxError> {
    let n = pair.phi.res as usize;
    let amb_a = iota.dom.ambient_dim();
    let amb_b = iota.cod.ambient_dim();
    let amb_d = pair.algebra.ambient_dim();

    if ndr_status != Status::Pass {
        let report = CheckReport {
            id: format!("{prefix}.extend"),
            kind: "relative_extension".to_string(),
            status: Status::Skip,
            max_residual: 0.0,
            tolerance: cfg.tols.residual,
            seed: cfg.master_seed,
            witness: None,
            notes: vec!["retract data failed its check; extension not attempted".to_string()],
        };
        return Ok((None, vec![report]));
    }

    if f.dom.ambient_dim() != amb_d {
        return Err(ApproxError::Shape {
            context: "extension domain".into(),
            left: f.dom.ambient_dim(),
            right: amb_d,
        });
    }
    let cyl_amb = amb_a + (n + 1) * amb_b;
    if f.cod.ambient_dim() != cyl_amb {
        return Err(ApproxError::Shape {
            context: "extension cylinder".into(),
            left: f.cod.ambient_dim(),
            right: cyl_amb,
        });
    }

    let dom_basis = pair.algebra.basis_matrix();
    let pr1 = f.mat.rows(0, amb_a).clone_owned();
    let f1 = f.mat.rows(amb_a, (n + 1) * amb_b).clone_owned();
    let end = &iota.mat * &pr1;

    let mut reports = Vec::new();
    reports.push(check_star_hom(&format!("{prefix}.map"), f, cfg));

    // The path must end on the iota-image of the first coordinate.
    let end_defect =
        linalg::max_abs(&((f1.rows(n * amb_b, amb_b).clone_owned() - &end) * &dom_basis));
    reports.push(residual_report(
        &format!("{prefix}.end"),
        "cylinder_end",
        end_defect,
        cfg,
        || json!({"map": f.label, "residual": end_defect}),
    ));

    // The ideal must land at the closed end, with values in the iota-image.
    let image_span = linalg::column_space(&iota.mat, cfg.tols.rank_rel);
    let mut rel_worst = 0.0_f64;
    let mut rel_witness = json!(null);
    for c in 0..pair.ideal_basis.ncols() {
        let v = &f1 * pair.ideal_basis.column(c);
        for s in 0..n {
            let r = block_inf(&v, s * amb_b, amb_b);
            if r > rel_worst {
                rel_worst = r;
                rel_witness = json!({"ideal_column": c, "path_point": s, "residual": r});
            }
        }
        let tail = CVec::from(v.rows(n * amb_b, amb_b));
        let r = linalg::span_residual(&image_span, &tail);
        if r > rel_worst {
            rel_worst = r;
            rel_witness = json!({"ideal_column": c, "path_point": n, "outside_image": r});
        }
    }
    reports.push(residual_report(
        &format!("{prefix}.relative"),
        "relative_position",
        rel_worst,
        cfg,
        || rel_witness.clone(),
    ));

    // Fill the square, outer index i (deformation time) slowest.
    let mut square = CMat::zeros((n + 1) * (n + 1) * amb_b, amb_d);
    for i in 0..=n {
        for j in 0..=n {
            let w = snap(i, j, n);
            let kappa = j + w;
            let slice = f1.rows(kappa * amb_b, amb_b) * &pair.phi.slice(w as u32).mat;
            square
                .rows_mut((i * (n + 1) + j) * amb_b, amb_b)
                .copy_from(&slice);
        }
    }
    let inner = interval_tensor_concrete(&iota.cod, n as u32);
    let square_cod = interval_tensor_concrete(&inner, n as u32);
    let f4 = ConcreteMorphism {
        label: format!("square fill of {}", f.label),
        dom: pair.algebra.clone(),
        cod: square_cod,
        mat: square.clone(),
    };
    reports.push(check_star_hom(&format!("{prefix}.fill"), &f4, cfg));

    // Faces: i = 0 recovers the path part, j = n the constant end value,
    // i = n the end values of the deformed argument.
    let mut face_worst = 0.0_f64;
    let mut face_witness = json!(null);
    let mut face = |name: &str, got: CMat, want: CMat| {
        let r = linalg::max_abs(&((got - want) * &dom_basis));
        if r > face_worst {
            face_worst = r;
            face_witness = json!({"face": name, "residual": r});
        }
    };
    for j in 0..=n {
        face(
            "start",
            square.rows(j * amb_b, amb_b).clone_owned(),
            f1.rows(j * amb_b, amb_b).clone_owned(),
        );
    }
    for i in 0..=n {
        face(
            "pinned_end",
            square.rows((i * (n + 1) + n) * amb_b, amb_b).clone_owned(),
            end.clone(),
        );
    }
    for j in 0..=n {
        let w = snap(n, j, n);
        face(
            "deformed_end",
            square.rows((n * (n + 1) + j) * amb_b, amb_b).clone_owned(),
            &end * &pair.phi.slice(w as u32).mat,
        );
    }
    reports.push(residual_report(
        &format!("{prefix}.faces"),
        "square_faces",
        face_worst,
        cfg,
        || face_witness.clone(),
    ));

    // Bottom edge j = 0: the extended deformation.
    let mut bottom = Vec::with_capacity(n + 1);
    for i in 0..=n {
        bottom.push(square.rows(i * (n + 1) * amb_b, amb_b).clone_owned());
    }
    let extended = Homotopy::from_slices(&pair.algebra, &iota.cod, &bottom, n as u32)?;
    let start = ConcreteMorphism {
        label: format!("path start of {}", f.label),
        dom: pair.algebra.clone(),
        cod: iota.cod.clone(),
        mat: f1.rows(0, amb_b).clone_owned(),
    };
    let finish = extended.at_one();
    reports.push(
        check_homotopy(&format!("{prefix}.deform"), &extended, &start, &finish, cfg)?
            .note("bottom edge of the filled square, starting at the path part of the map"),
    );

    // The ideal stays pinned at the closed end throughout the deformation.
    let mut kept_worst = 0.0_f64;
    let mut kept_witness = json!(null);
    for c in 0..pair.ideal_basis.ncols() {
        for i in 0..n {
            let v = &bottom[i] * pair.ideal_basis.column(c);
            let r = block_inf(&v, 0, amb_b);
            if r > kept_worst {
                kept_worst = r;
                kept_witness = json!({"ideal_column": c, "time": i, "residual": r});
            }
        }
        let v = &bottom[n] * pair.ideal_basis.column(c);
        let r = linalg::span_residual(&image_span, &CVec::from(v));
        if r > kept_worst {
            kept_worst = r;
            kept_witness = json!({"ideal_column": c, "time": n, "outside_image": r});
        }
    }
    reports.push(
        residual_report(
            &format!("{prefix}.kept"),
            "end_support",
            kept_worst,
            cfg,
            || kept_witness.clone(),
        )
        .note("the distinguished ideal rides at the closed end for the whole deformation"),
    );

    Ok((Some(extended), reports))
}

fn residual_report(
    id: &str,
    kind: &str,
    worst: f64,
    cfg: &CheckConfig,
    witness: impl Fn() -> serde_json::Value,
) -> CheckReport {
    let ok = worst <= cfg.tols.residual;
    CheckReport {
        id: id.to_string(),
        kind: kind.to_string(),
        status: if ok { Status::Pass } else { Status::Fail },
        max_residual: worst,
        tolerance: cfg.tols.residual,
        seed: cfg.master_seed,
        witness: if ok { None } else { Some(witness()) },
        notes: Vec::new(),
    }
}

// ---------------------------------------------------------------------------
// Cellular straightening
// ---------------------------------------------------------------------------

/// A map deformed to respect the stage filtration, with its certificates.
pub struct StraightenedMap {
    /// Deformation from the original map to the straightened one.
    pub homotopy: Homotopy,
    /// The time-one slice of the deformation.
    pub cellular: ConcreteMorphism,
    pub reports: Vec<CheckReport>,
}

/// Quotient maps from the top skeleton down to each lower stage.
/// Entry `p` is the composite onto stage `p`, for `p = 0 .. dim`.
fn stage_chains(
    cx: &NccwComplex,
    res: u32,
    tols: &Tolerances,
) -> Result<Vec<ConcreteMorphism>, ApproxError> {
    let n = cx.dim() as usize;
    let mut out: Vec<ConcreteMorphism> = Vec::with_capacity(n);
    let mut comp: Option<ConcreteMorphism> = None;
    for k in (1..=n).rev() {
        let (pi, _) = discretize_morphism(&cx.stages[k].pi, res, tols)?;
        let next = match comp {
            None => pi,
            Some(ref c) => pi.compose(c)?,
        };
        out.push(next.clone());
        comp = Some(next);
    }
    out.reverse();
    Ok(out)
}

/// Ambient bases for the kernels of the stage chains.
fn chain_kernels(chains: &[ConcreteMorphism], rank_rel: f64) -> Vec<CMat> {
    chains
        .iter()
        .map(|c| {
            let coords = linalg::nullspace(&c.coord_matrix(), rank_rel);
            c.dom.basis_matrix() * coords
        })
        .collect()
}

/// Rank of the composite `chain . map . kernel`; zero means the map carries
/// the kernel into the kernel on the other side.
fn leak_rank(chain: &ConcreteMorphism, map: &CMat, kernel: &CMat, rank_rel: f64) -> usize {
    if kernel.ncols() == 0 {
        return 0;
    }
    linalg::rank(&(&chain.mat * map * kernel), rank_rel)
}

/// Deforms `f_expr` between the top skeletons of `dom` and `cod` into a map
/// that carries each stage kernel into the matching stage kernel.
///
/// A map already of that form gets the constant deformation. Otherwise the
/// map must be a grid rotation: the deformation runs one time segment per
/// stage at grid pitch `res`, shrinking the rotation shift to zero during
/// the first segment and holding still afterwards, so that after segment
/// `p` every slice respects the kernels of stages up to `p`.
pub fn cellular_approximate(
    prefix: &str,
    f_expr: &MorphismExpr,
    dom: &NccwComplex,
    cod: &NccwComplex,
    res: u32,
    cfg: &CheckConfig,
) -> Result<StraightenedMap, ApproxError> {
    if dom.dim() != cod.dim() {
        return Err(ApproxError::Shape {
            context: "complex dimensions".into(),
            left: dom.dim() as usize,
            right: cod.dim() as usize,
        });
    }
    let tols = cfg.tols;
    let (f_c, _) = discretize_morphism(f_expr, res, &tols)?;
    let (dom_top, _) = discretize_algebra(dom.skeleton(), res, &tols)?;
    let (cod_top, _) = discretize_algebra(cod.skeleton(), res, &tols)?;
    if f_c.dom.ambient_dim() != dom_top.ambient_dim()
        || f_c.cod.ambient_dim() != cod_top.ambient_dim()
    {
        return Err(ApproxError::Shape {
            context: "map against skeletons".into(),
            left: f_c.dom.ambient_dim(),
            right: dom_top.ambient_dim(),
        });
    }

    let dom_chains = stage_chains(dom, res, &tols)?;
    let cod_chains = stage_chains(cod, res, &tols)?;
    let kernels = chain_kernels(&dom_chains, tols.rank_rel);
    let levels = dom_chains.len();

    let leak = |mat: &CMat| -> Vec<usize> {
        (0..levels)
            .map(|p| leak_rank(&cod_chains[p], mat, &kernels[p], tols.rank_rel))
            .collect()
    };
    let start_leaks = leak(&f_c.mat);
    let already_cellular = start_leaks.iter().all(|&r| r == 0);

    // Shift index of each slice, or a constant path for a cellular map.
    let n = res as usize;
    let segments = dom.dim() as usize + 1;
    let total = if already_cellular { n } else { segments * n };
    let slices: Vec<CMat> = if already_cellular {
        vec![f_c.mat.clone(); total + 1]
    } else {
        let (on, shift) = match f_expr {
            MorphismExpr::Rotation { on, shift } => ((**on).clone(), *shift),
            other => {
                return Err(ApproxError::NotStraightenable { found: other.to_string() })
            }
        };
        let j0 = shift.on_grid(res).ok_or(ApproxError::ShiftOffGrid {
            num: shift.num(),
            den: shift.den(),
            res,
        })?;
        let mut cache: HashMap<usize, CMat> = HashMap::new();
        let mut out = Vec::with_capacity(total + 1);
        for t in 0..=total {
            let j = if t >= n { 0 } else { snap(j0, t, n) };
            let mat = match cache.get(&j) {
                Some(m) => m.clone(),
                None => {
                    let expr = MorphismExpr::Rotation {
                        on: Box::new(on.clone()),
                        shift: GridFraction::new(j as u64, res as u64)?,
                    };
                    let (m, _) = discretize_morphism(&expr, res, &tols)?;
                    cache.insert(j, m.mat.clone());
                    m.mat
                }
            };
            out.push(mat);
        }
        out
    };

    let homotopy = Homotopy::from_slices(&f_c.dom, &f_c.cod, &slices, total as u32)?;
    let mut cellular = homotopy.at_one();
    cellular.label = format!("straightened {}", f_c.label);

    let mut reports = Vec::new();

    let start_defect =
        linalg::max_abs(&((&slices[0] - &f_c.mat) * f_c.dom.basis_matrix()));
    reports.push(residual_report(
        &format!("{prefix}.start"),
        "deformation_start",
        start_defect,
        cfg,
        || json!({"map": f_c.label, "residual": start_defect}),
    ));

    reports.push(check_homotopy(&format!("{prefix}.deform"), &homotopy, &f_c, &cellular, cfg)?);

    // After segment p, slices must respect the kernels of stages up to p.
    let mut seg_worst = 0usize;
    let mut seg_table = Vec::new();
    for p in 0..segments.min(levels + 1) {
        if p == 0 && !already_cellular {
            continue;
        }
        let from = if already_cellular { 0 } else { p * n };
        for t in from..=total {
            for q in 0..levels.min(p.max(1)) {
                let r = leak_rank(&cod_chains[q], &slices[t], &kernels[q], tols.rank_rel);
                if r > 0 {
                    seg_table.push(json!({"slice": t, "level": q, "rank": r}));
                }
                seg_worst = seg_worst.max(r);
            }
        }
    }
    reports.push(
        CheckReport {
            id: format!("{prefix}.segments"),
            kind: "segment_cellularity".to_string(),
            status: if seg_worst == 0 { Status::Pass } else { Status::Fail },
            max_residual: seg_worst as f64,
            tolerance: 0.0,
            seed: cfg.master_seed,
            witness: if seg_worst == 0 { None } else { Some(json!(seg_table)) },
            notes: vec![
                "after segment p, every slice carries the stage-q kernel into the stage-q kernel for q <= p".to_string(),
            ],
        },
    );

    let end_leaks = leak(&cellular.mat);
    let end_worst = *end_leaks.iter().max().unwrap_or(&0);
    reports.push(CheckReport {
        id: format!("{prefix}.cellular"),
        kind: "cellular_image".to_string(),
        status: if end_worst == 0 { Status::Pass } else { Status::Fail },
        max_residual: end_worst as f64,
        tolerance: 0.0,
        seed: cfg.master_seed,
        witness: Some(json!({"initial_leak_ranks": start_leaks, "final_leak_ranks": end_leaks})),
        notes: Vec::new(),
    });

    let end_defect = linalg::max_abs(&(&cellular.mat - &homotopy.at_one().mat));
    reports.push(residual_report(
        &format!("{prefix}.end"),
        "endpoint_identity",
        end_defect,
        cfg,
        || json!({"residual": end_defect}),
    ));

    Ok(StraightenedMap { homotopy, cellular, reports })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::check::{check_ndr_pair, CheckConfig};
    use crate::complex::NccwComplex;
    use crate::discretize::ConcreteAlgebra;
    use crate::expr::{
        finite_dim, AlgebraExpr, BlockMapData, Limits, MappingKind, MorphismExpr, TensorFunctor,
    };
    use crate::linalg::cone;
    use num_complex::Complex64;

    fn circle() -> NccwComplex {
        let point = finite_dim(&[1]).unwrap();
        let cell = finite_dim(&[1]).unwrap();
        let limits = Limits::default();
        let sphere =
            crate::expr::apply_functor(TensorFunctor::Sphere(0), cell.clone(), &limits).unwrap();
        let sigma = MorphismExpr::BlockMap {
            domain: Box::new(point.clone()),
            codomain: Box::new(sphere),
            data: BlockMapData { multiplicities: vec![vec![1], vec![1]], unital: true },
        };
        let mut cx = NccwComplex::point("circle", point).unwrap();
        cx.attach(cell, Some(sigma), &limits).unwrap();
        cx
    }

    #[test]
    fn rotation_straightens_to_a_cellular_map() {
        let cx = circle();
        let rot = MorphismExpr::Rotation {
            on: Box::new(cx.skeleton().clone()),
            shift: GridFraction::new(1, 4).unwrap(),
        };
        let cfg = CheckConfig::default();
        let out = cellular_approximate("rot", &rot, &cx, &cx, 4, &cfg).unwrap();
        for r in &out.reports {
            assert!(r.passed(), "{} failed: {:?}", r.id, r.witness);
        }
        assert_eq!(out.homotopy.res, 8);
        // The straightened map is the rotation by zero, the identity.
        let id = CMat::identity(out.cellular.mat.nrows(), out.cellular.mat.ncols());
        assert!(linalg::max_abs(&(&out.cellular.mat - id)) < 1e-12);
        // The original rotation was not cellular to begin with.
        let witness = out
            .reports
            .iter()
            .find(|r| r.kind == "cellular_image")
            .and_then(|r| r.witness.as_ref())
            .unwrap();
        assert!(witness["initial_leak_ranks"][0].as_u64().unwrap() > 0);
    }

    #[test]
    fn cellular_maps_get_the_constant_deformation() {
        let cx = circle();
        let id = MorphismExpr::Identity { on: Box::new(cx.skeleton().clone()) };
        let cfg = CheckConfig::default();
        let out = cellular_approximate("id", &id, &cx, &cx, 4, &cfg).unwrap();
        for r in &out.reports {
            assert!(r.passed(), "{} failed: {:?}", r.id, r.witness);
        }
        assert_eq!(out.homotopy.res, 4);
    }

    #[test]
    fn composite_rotations_are_not_straightened() {
        let cx = circle();
        let rot = MorphismExpr::Rotation {
            on: Box::new(cx.skeleton().clone()),
            shift: GridFraction::new(1, 4).unwrap(),
        };
        let twice = MorphismExpr::compose(rot.clone(), rot).unwrap();
        let cfg = CheckConfig::default();
        let out = cellular_approximate("twice", &twice, &cx, &cx, 4, &cfg);
        assert!(matches!(out, Err(ApproxError::NotStraightenable { .. })));
    }

    /// Retract data on the cylinder of the corner embedding of C into C^2:
    /// the ideal of paths pinned at the closed end, the detecting map that
    /// reads the free path coordinates, and the deformation that multiplies
    /// by the indicator of a shrinking tail of the path.
    fn cylinder_pair(n: usize) -> (NdrPair, ConcreteMorphism, ConcreteMorphism) {
        let tols = Tolerances::default();
        let iota_expr = MorphismExpr::BlockMap {
            domain: Box::new(finite_dim(&[1]).unwrap()),
            codomain: Box::new(finite_dim(&[1, 1]).unwrap()),
            data: BlockMapData { multiplicities: vec![vec![1], vec![0]], unital: false },
        };
        let (iota, _) = discretize_morphism(&iota_expr, n as u32, &tols).unwrap();
        let cyl = crate::expr::mapping_construction(MappingKind::Cylinder, iota_expr).unwrap();
        let (d, _) = discretize_algebra(&cyl, n as u32, &tols).unwrap();
        let amb = d.ambient_dim();
        assert_eq!(amb, 1 + (n + 1) * 2);

        // Ideal: a paired with the path concentrated at the closed end.
        let mut c = CVec::zeros(amb);
        let s = Complex64::new(1.0 / 2f64.sqrt(), 0.0);
        c[0] = s;
        c[1 + 2 * n] = s;
        let ideal = CMat::from_columns(&[c]);
        assert!(d.membership_residual(&c_col(&ideal, 0)) < 1e-12);

        // Detecting map: scalar grid functions read into the free path slots.
        let grid = AlgebraExpr::IntervalTensor {
            n: 1,
            base: Box::new(finite_dim(&[1]).unwrap()),
        };
        let (grid_c, _) = discretize_algebra(&grid, n as u32, &tols).unwrap();
        let mut u_mat = CMat::zeros(amb, n + 1);
        u_mat[(0, 0)] = cone();
        u_mat[(1 + 2 * n, 0)] = cone();
        for s in 0..n {
            u_mat[(2 + 2 * s, s)] = cone();
        }
        let u = ConcreteMorphism {
            label: "tail detector".to_string(),
            dom: grid_c,
            cod: d.clone(),
            mat: u_mat,
        };
        assert!(u.subspace_residual() < 1e-12);

        // Deformation: slice j keeps the first coordinate and the path
        // points at or after j.
        let mut slices = Vec::with_capacity(n + 1);
        for j in 0..=n {
            let mut m = CMat::zeros(amb, amb);
            m[(0, 0)] = cone();
            for s in 0..=n {
                if s >= j {
                    m[(1 + 2 * s, 1 + 2 * s)] = cone();
                    m[(2 + 2 * s, 2 + 2 * s)] = cone();
                }
            }
            slices.push(m);
        }
        let phi = Homotopy::from_slices(&d, &d, &slices, n as u32).unwrap();

        let f = identity_on(&d);
        (NdrPair { algebra: d, ideal_basis: ideal, u, phi }, f, iota)
    }

    fn identity_on(a: &ConcreteAlgebra) -> ConcreteMorphism {
        ConcreteMorphism {
            label: format!("id on {}", a.label),
            dom: a.clone(),
            cod: a.clone(),
            mat: CMat::identity(a.ambient_dim(), a.ambient_dim()),
        }
    }

    fn c_col(m: &CMat, i: usize) -> CVec {
        CVec::from(m.column(i))
    }

    #[test]
    fn the_cylinder_pair_is_valid_retract_data() {
        let (pair, _, _) = cylinder_pair(4);
        let cfg = CheckConfig::default();
        let report = check_ndr_pair("cylpair", &pair, &cfg).unwrap();
        assert!(report.passed(), "{:?}", report.witness);
    }

    #[test]
    fn the_identity_extends_across_the_square() {
        let (pair, f, iota) = cylinder_pair(4);
        let cfg = CheckConfig::default();
        let (extended, reports) =
            extend_relative("ext", &pair, &f, &iota, Status::Pass, &cfg).unwrap();
        let extended = extended.unwrap();
        for r in &reports {
            assert!(r.passed(), "{} failed: {:?}", r.id, r.witness);
        }
        assert_eq!(extended.res, 4);
        // Time zero of the extension is evaluation at the open end of the path.
        let start = extended.at_zero();
        let basis = pair.algebra.basis_matrix();
        let expected = f.mat.rows(1, 2).clone_owned();
        assert!(linalg::max_abs(&((&start.mat - expected) * basis)) < 1e-12);
    }

    #[test]
    fn failed_retract_data_skips_the_extension() {
        let (pair, f, iota) = cylinder_pair(2);
        let cfg = CheckConfig::default();
        let (extended, reports) =
            extend_relative("ext", &pair, &f, &iota, Status::Fail, &cfg).unwrap();
        assert!(extended.is_none());
        assert_eq!(reports.len(), 1);
        assert_eq!(reports[0].status, Status::Skip);
    }
}
