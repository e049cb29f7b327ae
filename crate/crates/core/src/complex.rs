//! Cell-by-cell assembly of algebras: each stage glues a cube of cells onto
//! the previous skeleton along an attaching map of its boundary sphere, and
//! every stage carries the short exact row that makes the fresh cells an
//! ideal with the old skeleton as quotient.

use crate::check::{check_exact_row, check_star_hom, CheckConfig, CheckReport, Status};
use crate::discretize::{
    self, closed_cube_index, discretize_algebra, discretize_morphism, linear_dim, ConcreteAlgebra,
    ConcreteMorphism, Discretizer, Tolerances, Warnings,
};
use crate::expr::{self, AlgebraExpr, BlockMapData, ExprError, Limits, MorphismExpr, TensorFunctor};
use crate::fdalg::{BlockShape, MultiplicityMorphism};
use crate::linalg::{self, CMat};
use serde_json::json;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ComplexError {
    #[error("attaching map required for nonzero cells at dimension {dim}")]
    MissingAttachment { dim: u32 },
    #[error("attaching map domain does not match the previous skeleton: found {found}, expected {expected}")]
    AttachDomain { found: String, expected: String },
    #[error("attaching map must land in the boundary sphere of the new cells: found {found}, expected {expected}")]
    AttachCodomain { found: String, expected: String },
    #[error("cell algebras must be plain matrix sums or zero: found {found}")]
    BadCells { found: String },
    #[error("cylinder inheritance needs a one-dimensional complex attached by a block map")]
    NotCylinderReady,
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error(transparent)]
    Discretize(#[from] discretize::DiscretizeError),
    #[error(transparent)]
    Check(#[from] crate::check::CheckError),
    #[error(transparent)]
    Fd(#[from] crate::fdalg::FdError),
}

/// One attachment: `algebra` is the skeleton after gluing `cells` along
/// `sigma`, and the pair (`rho`, `pi`) is its defining short exact row
/// 0 → open cells → algebra → previous skeleton → 0.
#[derive(Debug, Clone)]
pub struct AttachStage {
    pub dim: u32,
    pub cells: AlgebraExpr,
    pub sigma: Option<MorphismExpr>,
    pub algebra: AlgebraExpr,
    pub rho: MorphismExpr,
    pub pi: MorphismExpr,
}

#[derive(Debug, Clone)]
pub struct NccwComplex {
    pub name: String,
    pub stages: Vec<AttachStage>,
}

fn require_cells(cells: &AlgebraExpr) -> Result<(), ComplexError> {
    match cells {
        AlgebraExpr::Zero | AlgebraExpr::FiniteDim { .. } => Ok(()),
        other => Err(ComplexError::BadCells { found: other.to_string() }),
    }
}

impl NccwComplex {
    /// Dimension-zero complex: the skeleton is the cell algebra itself.
    pub fn point(name: impl Into<String>, cells: AlgebraExpr) -> Result<Self, ComplexError> {
        require_cells(&cells)?;
        let algebra = cells.clone();
        let stage = AttachStage {
            dim: 0,
            cells,
            sigma: None,
            algebra: algebra.clone(),
            rho: MorphismExpr::Identity { on: Box::new(algebra.clone()) },
            pi: MorphismExpr::Zero {
                domain: Box::new(algebra),
                codomain: Box::new(AlgebraExpr::Zero),
            },
        };
        Ok(NccwComplex { name: name.into(), stages: vec![stage] })
    }

    pub fn dim(&self) -> u32 {
        self.stages.last().map(|s| s.dim).unwrap_or(0)
    }

    /// The algebra of the full complex (top skeleton).
    pub fn skeleton(&self) -> &AlgebraExpr {
        &self.stages.last().expect("a complex has at least stage zero").algebra
    }

    /// Glue `cells` along `sigma` one dimension up. Zero cells clone the
    /// skeleton and need no attaching map.
    pub fn attach(
        &mut self,
        cells: AlgebraExpr,
        sigma: Option<MorphismExpr>,
        limits: &Limits,
    ) -> Result<&AttachStage, ComplexError> {
        require_cells(&cells)?;
        let k = self.dim() + 1;
        let prev = self.skeleton().clone();

        let stage = if cells.is_zero() {
            AttachStage {
                dim: k,
                cells,
                sigma: None,
                algebra: prev.clone(),
                rho: MorphismExpr::Zero {
                    domain: Box::new(AlgebraExpr::Zero),
                    codomain: Box::new(prev.clone()),
                },
                pi: MorphismExpr::Identity { on: Box::new(prev) },
            }
        } else {
            let sigma = sigma.ok_or(ComplexError::MissingAttachment { dim: k })?;
            let dom = sigma.domain()?;
            if dom != prev {
                return Err(ComplexError::AttachDomain {
                    found: dom.to_string(),
                    expected: prev.to_string(),
                });
            }
            let sphere = expr::apply_functor(TensorFunctor::Sphere(k - 1), cells.clone(), limits)?;
            let cod = sigma.codomain()?;
            if cod != sphere {
                return Err(ComplexError::AttachCodomain {
                    found: cod.to_string(),
                    expected: sphere.to_string(),
                });
            }
            let cube = expr::apply_functor(TensorFunctor::Interval(k), cells.clone(), limits)?;
            let open = expr::apply_functor(TensorFunctor::OpenCube(k), cells.clone(), limits)?;
            let alpha = MorphismExpr::BoundaryRestrict { on: Box::new(cube.clone()) };
            let algebra = expr::pullback_expr(alpha, sigma.clone())?;
            algebra.validate(limits)?;
            let rho = MorphismExpr::IntoPullback {
                target: Box::new(algebra.clone()),
                left: Box::new(MorphismExpr::ZeroExtend {
                    from: Box::new(open.clone()),
                    to: Box::new(cube),
                }),
                right: Box::new(MorphismExpr::Zero {
                    domain: Box::new(open),
                    codomain: Box::new(prev),
                }),
            };
            let pi = MorphismExpr::ProjectionSecond { of: Box::new(algebra.clone()) };
            rho.validate(limits)?;
            pi.validate(limits)?;
            AttachStage { dim: k, cells, sigma: Some(sigma), algebra, rho, pi }
        };
        self.stages.push(stage);
        Ok(self.stages.last().unwrap())
    }

    /// The open-cell ideal of stage `k` as an expression.
    pub fn open_cells(&self, k: usize, limits: &Limits) -> Result<AlgebraExpr, ComplexError> {
        let stage = &self.stages[k];
        if stage.cells.is_zero() {
            return Ok(AlgebraExpr::Zero);
        }
        if stage.dim == 0 {
            return Ok(stage.cells.clone());
        }
        Ok(expr::apply_functor(TensorFunctor::OpenCube(stage.dim), stage.cells.clone(), limits)?)
    }
}

/// Integer bookkeeping report: passes when every listed quantity is equal.
fn dimension_report(id: &str, quantities: &[(&str, usize)], cfg: &CheckConfig) -> CheckReport {
    let all_equal = quantities.windows(2).all(|w| w[0].1 == w[1].1);
    let mut witness = serde_json::Map::new();
    for (k, v) in quantities {
        witness.insert((*k).to_string(), json!(v));
    }
    CheckReport {
        id: id.to_string(),
        kind: "dimension_count".to_string(),
        status: if all_equal { Status::Pass } else { Status::Fail },
        max_residual: 0.0,
        tolerance: 0.0,
        seed: cfg.master_seed,
        witness: Some(serde_json::Value::Object(witness)),
        notes: Vec::new(),
    }
}

/// Runs the stagewise health checks of a complex at each resolution: the
/// attaching maps are *-homomorphisms, the defining rows are exact, the
/// dimension of every skeleton is the sum over stages of its open cell
/// counts, and restriction to a coarser grid dividing a finer one commutes
/// with the quotient onto the previous skeleton.
pub fn validate_complex(
    complex: &NccwComplex,
    resolutions: &[u32],
    cfg: &CheckConfig,
) -> Result<Vec<CheckReport>, ComplexError> {
    let limits = Limits { max_cube_dim: complex.dim().max(2) };
    let mut reports = Vec::new();
    let name = &complex.name;

    for (k, stage) in complex.stages.iter().enumerate() {
        for &n in resolutions {
            let base = format!("{name}.stage{k}.N{n}");
            if let Some(sigma) = &stage.sigma {
                let (sc, _) = discretize_morphism(sigma, n, &cfg.tols)?;
                reports.push(check_star_hom(&format!("{base}.attach"), &sc, cfg));
            }
            if k > 0 {
                let (rho_c, _) = discretize_morphism(&stage.rho, n, &cfg.tols)?;
                let (pi_c, _) = discretize_morphism(&stage.pi, n, &cfg.tols)?;
                reports.push(check_exact_row(&format!("{base}.row"), &rho_c, &pi_c, cfg)?);

                let open = complex.open_cells(k, &limits)?;
                let prev = &complex.stages[k - 1].algebra;
                reports.push(dimension_report(
                    &format!("{base}.dims"),
                    &[
                        ("skeleton", linear_dim(&stage.algebra, n)?),
                        ("open_cells_plus_previous", linear_dim(&open, n)? + linear_dim(prev, n)?),
                        ("solved", rho_c.cod.dim()),
                    ],
                    cfg,
                ));
            }
        }

        // Restriction to a coarser grid must intertwine the projections.
        if k > 0 {
            for &fine in resolutions {
                for &coarse in resolutions {
                    if coarse == 0 || fine <= coarse || fine % coarse != 0 {
                        continue;
                    }
                    let mut w = Warnings::default();
                    let mut d = Discretizer { res: fine, tols: cfg.tols, warnings: &mut w };
                    let r_top = d.restriction(&stage.algebra, coarse)?;
                    let r_prev = d.restriction(&complex.stages[k - 1].algebra, coarse)?;
                    let (pi_fine, _) = discretize_morphism(&stage.pi, fine, &cfg.tols)?;
                    let (pi_coarse, _) = discretize_morphism(&stage.pi, coarse, &cfg.tols)?;
                    let bx = r_top.dom.basis_matrix();
                    let resid = linalg::max_abs(
                        &((&r_prev.mat * &pi_fine.mat - &pi_coarse.mat * &r_top.mat) * &bx),
                    );
                    let id = format!("{name}.stage{k}.N{fine}to{coarse}.refine");
                    reports.push(CheckReport {
                        id,
                        kind: "refinement".to_string(),
                        status: if resid <= cfg.tols.residual { Status::Pass } else { Status::Fail },
                        max_residual: resid,
                        tolerance: cfg.tols.residual,
                        seed: cfg.master_seed,
                        witness: if resid <= cfg.tols.residual {
                            None
                        } else {
                            Some(json!({"kind": "restriction_does_not_intertwine", "residual": resid}))
                        },
                        notes: Vec::new(),
                    });
                }
            }
        }
    }
    Ok(reports)
}

// ---------------------------------------------------------------------------
// the cylinder of a complex is a complex

/// Symbolic part of the cylinder construction over a one-dimensional complex
/// whose attaching map is a block map: two copies of every original cell plus
/// one segment cell per vertex block, with the induced attachments.
#[derive(Debug, Clone)]
pub struct CylinderComplex {
    pub complex: NccwComplex,
    pub vertex_sizes: Vec<u32>,
    pub edge_sizes: Vec<u32>,
    pub edge_mult: Vec<Vec<u32>>,
    pub edge_unital: bool,
}

/// Concrete top stage of a cylinder complex at one resolution: the square
/// cells cannot be attached inside the expression grammar (their attaching
/// map reads different faces from different parts of the skeleton), so the
/// stage is assembled directly on grid data.
pub struct ConcreteStage {
    pub algebra: ConcreteAlgebra,
    pub sigma: ConcreteMorphism,
    pub rho: ConcreteMorphism,
    pub pi: ConcreteMorphism,
}

pub fn cylinder_complex(base: &NccwComplex) -> Result<CylinderComplex, ComplexError> {
    if base.stages.len() != 2 {
        return Err(ComplexError::NotCylinderReady);
    }
    let a0 = match &base.stages[0].cells {
        AlgebraExpr::FiniteDim { sizes } => sizes.clone(),
        _ => return Err(ComplexError::NotCylinderReady),
    };
    let f1 = match &base.stages[1].cells {
        AlgebraExpr::FiniteDim { sizes } => sizes.clone(),
        _ => return Err(ComplexError::NotCylinderReady),
    };
    let data = match &base.stages[1].sigma {
        Some(MorphismExpr::BlockMap { data, .. }) => data.clone(),
        _ => return Err(ComplexError::NotCylinderReady),
    };

    let ne = f1.len();
    let nv = a0.len();
    let orig_row = |p: usize, e: usize| -> &Vec<u32> { &data.multiplicities[p * ne + e] };

    let mut a0p = a0.clone();
    a0p.extend_from_slice(&a0);
    let mut f1p = f1.clone();
    f1p.extend_from_slice(&f1);
    f1p.extend_from_slice(&a0);

    // Target blocks of the zero-sphere over the doubled cells: endpoint 0
    // blocks first, endpoint 1 blocks second; within an endpoint the two
    // edge copies and then the segments.
    let mut rows: Vec<Vec<u32>> = Vec::with_capacity(2 * f1p.len());
    for p in 0..2 {
        for copy in 0..2 {
            for e in 0..ne {
                let mut row = vec![0u32; 2 * nv];
                let src = orig_row(p, e);
                for v in 0..nv {
                    row[copy * nv + v] = src[v];
                }
                rows.push(row);
            }
        }
        for v in 0..nv {
            let mut row = vec![0u32; 2 * nv];
            row[p * nv + v] = 1;
            rows.push(row);
        }
    }

    let vertices = expr::finite_dim(&a0p)?;
    let edges = expr::finite_dim(&f1p)?;
    let limits = Limits::default();
    let sphere = expr::apply_functor(TensorFunctor::Sphere(0), edges.clone(), &limits)?;
    let sigma = MorphismExpr::BlockMap {
        domain: Box::new(vertices.clone()),
        codomain: Box::new(sphere),
        data: BlockMapData { multiplicities: rows, unital: data.unital },
    };

    let mut complex = NccwComplex::point(format!("{}.cyl", base.name), vertices)?;
    complex.attach(edges, Some(sigma), &limits)?;
    Ok(CylinderComplex {
        complex,
        vertex_sizes: a0,
        edge_sizes: f1,
        edge_mult: data.multiplicities,
        edge_unital: data.unital,
    })
}

fn block_offsets(sizes: &[u32]) -> (Vec<usize>, usize) {
    let mut offs = Vec::with_capacity(sizes.len());
    let mut at = 0usize;
    for &s in sizes {
        offs.push(at);
        at += (s * s) as usize;
    }
    (offs, at)
}

/// Builds the square stage of the cylinder complex at resolution `res`: the
/// attachment reads the two horizontal faces from the edge copies and the
/// two vertical faces from the original attachment applied to the segment
/// cells at the matching height.
pub fn cylinder_square_stage(
    cyl: &CylinderComplex,
    res: u32,
    tols: &Tolerances,
) -> Result<(ConcreteStage, Warnings), ComplexError> {
    let n = res;
    let mut warnings = Warnings::default();
    let a1p = discretize_algebra(cyl.complex.skeleton(), n, tols)?.0;

    let ne = cyl.edge_sizes.len();
    let nv = cyl.vertex_sizes.len();
    let mut f1p = cyl.edge_sizes.clone();
    f1p.extend_from_slice(&cyl.edge_sizes);
    f1p.extend_from_slice(&cyl.vertex_sizes);
    let (off1, stride1) = block_offsets(&f1p);
    let (offe, stride_e) = block_offsets(&cyl.edge_sizes);
    let (offv, stride_v) = block_offsets(&cyl.vertex_sizes);

    // Original attachment as a plain multiplicity embedding into the
    // zero-sphere over the edges; its target-block row ranges drive the
    // vertical faces.
    let orig = MultiplicityMorphism::standard(
        BlockShape::new(cyl.vertex_sizes.clone())?,
        BlockShape::new([cyl.edge_sizes.clone(), cyl.edge_sizes.clone()].concat())?,
        cyl.edge_mult.clone(),
    )?;
    let orig_mat = orig.linear_matrix();

    // Reader of the interval part of the one-skeleton: block b at grid i.
    let amb1 = a1p.ambient_dim();
    let interval_block = |i: u32, b: usize| -> (usize, usize) {
        (i as usize * stride1 + off1[b], (f1p[b] * f1p[b]) as usize)
    };
    // Segment values at height u, assembled as a vertex-shaped vector.
    let seg_reader = |u: u32| -> CMat {
        let mut m = CMat::zeros(stride_v, amb1);
        for v in 0..nv {
            let (src, len) = interval_block(u, 2 * ne + v);
            for d in 0..len {
                m[(offv[v] + d, src + d)] = linalg::cone();
            }
        }
        m
    };

    let edges_expr = expr::finite_dim(&cyl.edge_sizes)?;
    let limits = Limits::default();
    let sphere_expr = expr::apply_functor(TensorFunctor::Sphere(1), edges_expr.clone(), &limits)?;
    let sphere_alg = discretize_algebra(&sphere_expr, n, tols)?.0;

    let pts = discretize::sphere_points(2, n);
    let mut sigma_mat = CMat::zeros(sphere_alg.ambient_dim(), amb1);
    for (pi_idx, pt) in pts.iter().enumerate() {
        let (s, u) = (pt[0], pt[1]);
        for e in 0..ne {
            let out_off = pi_idx * stride_e + offe[e];
            let len = (cyl.edge_sizes[e] * cyl.edge_sizes[e]) as usize;
            if u == 0 || u == n {
                let copy = if u == 0 { 0 } else { 1 };
                let (src, _) = interval_block(s, copy * ne + e);
                for d in 0..len {
                    sigma_mat[(out_off + d, src + d)] = linalg::cone();
                }
            } else {
                let p = if s == 0 { 0 } else { 1 };
                let rows = orig_mat.rows(p * stride_e + offe[e], len);
                let face = rows * seg_reader(u);
                sigma_mat.view_mut((out_off, 0), (len, amb1)).copy_from(&face);
            }
        }
    }
    let sigma = ConcreteMorphism {
        label: "square attachment of the cylinder".to_string(),
        dom: a1p.clone(),
        cod: sphere_alg,
        mat: sigma_mat,
    };

    let boundary = discretize_morphism(
        &MorphismExpr::BoundaryRestrict {
            on: Box::new(expr::apply_functor(TensorFunctor::Interval(2), edges_expr.clone(), &limits)?),
        },
        n,
        tols,
    )?
    .0;

    let mut d = Discretizer { res: n, tols: *tols, warnings: &mut warnings };
    let algebra = d.fiber_product(&boundary, &sigma, format!("{}.square", cyl.complex.name))?;

    // Open squares include as extension by zero on the cube part.
    let open_expr = expr::apply_functor(TensorFunctor::OpenCube(2), edges_expr, &limits)?;
    let open_alg = discretize_algebra(&open_expr, n, tols)?.0;
    let cube_amb = boundary.dom.ambient_dim();
    let total_amb = algebra.ambient_dim();
    let mut rho_mat = CMat::zeros(total_amb, open_alg.ambient_dim());
    let interior = discretize::product_points(&vec![discretize::axis_open(n); 2]);
    for (oi, pt) in interior.iter().enumerate() {
        let ci = closed_cube_index(pt, n);
        for d in 0..stride_e {
            rho_mat[(ci * stride_e + d, oi * stride_e + d)] = linalg::cone();
        }
    }
    let rho = ConcreteMorphism {
        label: "open squares into the cylinder skeleton".to_string(),
        dom: open_alg,
        cod: algebra.clone(),
        mat: rho_mat,
    };

    let mut pi_mat = CMat::zeros(amb1, total_amb);
    for d in 0..amb1 {
        pi_mat[(d, cube_amb + d)] = linalg::cone();
    }
    let pi = ConcreteMorphism {
        label: "cylinder skeleton onto its one-skeleton".to_string(),
        dom: algebra.clone(),
        cod: a1p,
        mat: pi_mat,
    };

    Ok((ConcreteStage { algebra, sigma, rho, pi }, warnings))
}

/// Full inheritance check: the cylinder complex of a one-dimensional complex
/// validates stage by stage, its square stage is attached by a
/// *-homomorphism with an exact row, and its total dimension agrees with the
/// mapping cylinder of the identity on the original skeleton.
pub fn check_cylinder_inheritance(
    base: &NccwComplex,
    resolutions: &[u32],
    cfg: &CheckConfig,
) -> Result<Vec<CheckReport>, ComplexError> {
    let cyl = cylinder_complex(base)?;
    let mut reports = validate_complex(&cyl.complex, resolutions, cfg)?;
    let name = &cyl.complex.name;

    for &n in resolutions {
        let (stage, _) = cylinder_square_stage(&cyl, n, &cfg.tols)?;
        let basename = format!("{name}.stage2.N{n}");
        reports.push(check_star_hom(&format!("{basename}.attach"), &stage.sigma, cfg));
        reports.push(check_exact_row(&format!("{basename}.row"), &stage.rho, &stage.pi, cfg)?);

        let ident_cyl = expr::mapping_construction(
            expr::MappingKind::Cylinder,
            MorphismExpr::Identity { on: Box::new(base.skeleton().clone()) },
        )?;
        reports.push(
            dimension_report(
                &format!("{basename}.dims"),
                &[
                    ("square_stage", stage.algebra.dim()),
                    ("open_squares_plus_one_skeleton", stage.rho.dom.dim() + stage.pi.cod.dim()),
                    ("mapping_cylinder_of_identity", linear_dim(&ident_cyl, n)?),
                ],
                cfg,
            )
            .note("gluing squares onto the doubled complex fills the same number of dimensions as the mapping cylinder of the identity map"),
        );
    }
    Ok(reports)
}
