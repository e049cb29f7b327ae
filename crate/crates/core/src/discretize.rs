//! Discretization: replace every copy of the unit interval by the grid
//! `{0, 1/N, ..., 1}` and every function space by the algebra of functions
//! on the resulting finite point set.
//!
//! Grid conventions, fixed once and used by every constructor:
//! * closed axes keep all `N + 1` points;
//! * open axes drop both endpoints (`N - 1` points; at `N = 1` the grid is
//!   empty and the algebra degenerates to zero, with a warning);
//! * half-open axes drop the point 0 (`N` points, 1 included);
//! * cubes take the lexicographic product with the first axis slowest;
//! * the n-sphere is the boundary point set of the (n+1)-cube, in the same
//!   (filtered) lexicographic order, so the 0-sphere is always two points.
//!
//! A discretized algebra is a block algebra (one block per grid point and
//! base block) together with an optional orthonormal basis of a linear
//! subspace when the algebra is cut out by constraints (fiber products).
//! Morphisms are ambient linear maps that carry the subspace into the
//! subspace; this is verified where it is not structural.

use crate::expr::{AlgebraExpr, GridFraction, MorphismExpr, ZeroExtendShape, zero_extend_shape};
use crate::fdalg::{BlockShape, Element, MultiplicityMorphism};
use crate::linalg::{self, CMat, CVec};
use crate::seeds;
use rand::Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum DiscretizeError {
    #[error(transparent)]
    Expr(#[from] crate::expr::ExprError),
    #[error(transparent)]
    Fd(#[from] crate::fdalg::FdError),
    #[error("resolution must be at least 1")]
    ZeroResolution,
    #[error("evaluation point {t} is not on the grid of resolution {res}")]
    OffGrid { t: GridFraction, res: u32 },
    #[error("rotation shift {shift} is not on the grid of resolution {res}")]
    ShiftOffGrid { shift: GridFraction, res: u32 },
    #[error("morphism name {0} was not resolved before discretization")]
    Unresolved(String),
    #[error("fiber product {label} is not closed under products (residual {residual:.3e})")]
    NotClosed { label: String, residual: f64 },
    #[error("{context}: image leaves the target subspace (residual {residual:.3e})")]
    SubspaceViolation { context: String, residual: f64 },
    #[error("internal dimension mismatch in {context}: {left} vs {right}")]
    Internal { context: String, left: usize, right: usize },
    #[error("refinement needs the fine resolution {fine} to be a multiple of {coarse}")]
    BadRefinement { fine: u32, coarse: u32 },
}

/// Numerical thresholds, configurable per check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Residual bound for identities that must hold up to rounding.
    pub residual: f64,
    /// Relative singular-value threshold for rank decisions.
    pub rank_rel: f64,
    /// Deviation bound for matrices that must be unitary.
    pub unitary: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { residual: 1e-9, rank_rel: 1e-7, unitary: 1e-12 }
    }
}

/// Non-fatal notes produced during discretization (degenerate grids and the
/// like), surfaced to reports.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Warnings {
    pub messages: Vec<String>,
}

impl Warnings {
    pub fn push(&mut self, msg: impl Into<String>) {
        let msg = msg.into();
        if !self.messages.contains(&msg) {
            self.messages.push(msg);
        }
    }
}

/// A finite-dimensional *-algebra presented as a linear subspace of a block
/// algebra: the subspace of `shape` spanned by the orthonormal columns of
/// `basis` (all of it when `basis` is `None`).
#[derive(Debug, Clone)]
pub struct ConcreteAlgebra {
    pub label: String,
    pub shape: BlockShape,
    pub block_labels: Vec<String>,
    pub basis: Option<CMat>,
}

impl ConcreteAlgebra {
    pub fn full(label: String, shape: BlockShape, block_labels: Vec<String>) -> Self {
        ConcreteAlgebra { label, shape, block_labels, basis: None }
    }

    pub fn ambient_dim(&self) -> usize {
        self.shape.ambient_dim()
    }

    /// Linear dimension of the algebra itself.
    pub fn dim(&self) -> usize {
        match &self.basis {
            Some(b) => b.ncols(),
            None => self.ambient_dim(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.dim() == 0
    }

    /// Orthonormal basis as a matrix, materialized to the identity when the
    /// algebra fills its ambient space.
    pub fn basis_matrix(&self) -> CMat {
        match &self.basis {
            Some(b) => b.clone(),
            None => CMat::identity(self.ambient_dim(), self.ambient_dim()),
        }
    }

    /// Distance of an ambient vector from the subspace.
    pub fn membership_residual(&self, v: &CVec) -> f64 {
        match &self.basis {
            Some(b) => linalg::span_residual(b, v),
            None => 0.0,
        }
    }

    pub fn element(&self, ambient: &CVec) -> Element {
        Element::unflatten(&self.shape, ambient).expect("ambient vector fits shape")
    }
}

/// A linear map between discretized algebras, stored on ambient coordinates.
/// The defining property, checked where construction does not force it, is
/// that the subspace of the domain lands in the subspace of the codomain.
#[derive(Debug, Clone)]
pub struct ConcreteMorphism {
    pub label: String,
    pub dom: ConcreteAlgebra,
    pub cod: ConcreteAlgebra,
    pub mat: CMat,
}

impl ConcreteMorphism {
    /// Matrix of the map on subspace coordinates.
    pub fn coord_matrix(&self) -> CMat {
        self.cod.basis_matrix().adjoint() * &self.mat * self.dom.basis_matrix()
    }

    /// Largest distance of the image of a domain basis vector from the
    /// codomain subspace.
    pub fn subspace_residual(&self) -> f64 {
        let b = self.dom.basis_matrix();
        let images = &self.mat * b;
        let mut worst = 0.0_f64;
        for c in 0..images.ncols() {
            worst = worst.max(self.cod.membership_residual(&CVec::from(images.column(c))));
        }
        worst
    }

    pub fn compose(&self, inner: &ConcreteMorphism) -> Result<ConcreteMorphism, DiscretizeError> {
        if inner.cod.ambient_dim() != self.dom.ambient_dim() {
            return Err(DiscretizeError::Internal {
                context: format!("compose {} after {}", self.label, inner.label),
                left: self.dom.ambient_dim(),
                right: inner.cod.ambient_dim(),
            });
        }
        Ok(ConcreteMorphism {
            label: format!("({} * {})", self.label, inner.label),
            dom: inner.dom.clone(),
            cod: self.cod.clone(),
            mat: &self.mat * &inner.mat,
        })
    }
}

// ---------------------------------------------------------------------------
// grids

fn axis_closed(n: u32) -> Vec<u32> {
    (0..=n).collect()
}

pub(crate) fn axis_open(n: u32) -> Vec<u32> {
    (1..n).collect()
}

fn axis_halfopen(n: u32) -> Vec<u32> {
    (1..=n).collect()
}

/// Lexicographic product, first axis slowest.
pub(crate) fn product_points(axes: &[Vec<u32>]) -> Vec<Vec<u32>> {
    let mut pts: Vec<Vec<u32>> = vec![Vec::new()];
    for axis in axes {
        let mut next = Vec::with_capacity(pts.len() * axis.len());
        for p in &pts {
            for &v in axis {
                let mut q = p.clone();
                q.push(v);
                next.push(q);
            }
        }
        pts = next;
    }
    pts
}

/// Boundary points of the closed `axes`-cube, in filtered lexicographic order.
pub(crate) fn sphere_points(axes: usize, n: u32) -> Vec<Vec<u32>> {
    product_points(&vec![axis_closed(n); axes])
        .into_iter()
        .filter(|p| p.iter().any(|&c| c == 0 || c == n))
        .collect()
}

/// Index of a point in the full closed cube, positional arithmetic.
pub(crate) fn closed_cube_index(coords: &[u32], n: u32) -> usize {
    let mut idx = 0usize;
    for &c in coords {
        idx = idx * (n as usize + 1) + c as usize;
    }
    idx
}

fn point_label(coords: &[u32], n: u32) -> String {
    let parts: Vec<String> = coords.iter().map(|c| format!("{c}/{n}")).collect();
    if parts.len() == 1 {
        parts.into_iter().next().unwrap()
    } else {
        format!("({})", parts.join(","))
    }
}

/// Position of a boundary point of the square on the counterclockwise
/// perimeter walk starting at (0,0); the walk has length 4n.
fn perimeter_position(coords: &[u32], n: u32) -> usize {
    let (i, j) = (coords[0], coords[1]);
    let n_ = n as usize;
    if j == 0 {
        i as usize
    } else if i == n {
        n_ + j as usize
    } else if j == n {
        2 * n_ + (n_ - i as usize)
    } else {
        // i == 0, 0 < j < n
        3 * n_ + (n_ - j as usize)
    }
}

/// Selection of the block of one point out of `point_count` consecutive
/// point blocks of ambient size `block_ambient`.
pub fn select_point_block(point_count: usize, block_ambient: usize, idx: usize) -> CMat {
    let mut m = CMat::zeros(block_ambient, point_count * block_ambient);
    for d in 0..block_ambient {
        m[(d, idx * block_ambient + d)] = linalg::cone();
    }
    m
}

/// Concrete algebra of functions on the closed `res`-grid valued in `base`:
/// one copy of `base` per grid point, point index slowest. Used when a
/// homotopy target is assembled directly rather than through an expression.
pub fn interval_tensor_concrete(base: &ConcreteAlgebra, res: u32) -> ConcreteAlgebra {
    let pts = res as usize + 1;
    let mut sizes = Vec::with_capacity(pts * base.shape.sizes.len());
    let mut labels = Vec::with_capacity(pts * base.block_labels.len());
    for p in 0..pts {
        sizes.extend_from_slice(&base.shape.sizes);
        for bl in &base.block_labels {
            labels.push(format!("{p}/{res}:{bl}"));
        }
    }
    let basis = base.basis.as_ref().map(|b| blockdiag(&vec![b.clone(); pts]));
    ConcreteAlgebra {
        label: format!("interval({})", base.label),
        shape: BlockShape { sizes },
        block_labels: labels,
        basis,
    }
}

fn blockdiag(mats: &[CMat]) -> CMat {
    let rows: usize = mats.iter().map(|m| m.nrows()).sum();
    let cols: usize = mats.iter().map(|m| m.ncols()).sum();
    let mut out = CMat::zeros(rows, cols);
    let (mut r, mut c) = (0, 0);
    for m in mats {
        out.view_mut((r, c), (m.nrows(), m.ncols())).copy_from(m);
        r += m.nrows();
        c += m.ncols();
    }
    out
}

// ---------------------------------------------------------------------------
// the discretizer

pub struct Discretizer<'w> {
    pub res: u32,
    pub tols: Tolerances,
    pub warnings: &'w mut Warnings,
}

pub fn discretize_algebra(
    expr: &AlgebraExpr,
    res: u32,
    tols: &Tolerances,
) -> Result<(ConcreteAlgebra, Warnings), DiscretizeError> {
    let mut w = Warnings::default();
    let a = Discretizer { res, tols: *tols, warnings: &mut w }.algebra(expr)?;
    Ok((a, w))
}

pub fn discretize_morphism(
    expr: &MorphismExpr,
    res: u32,
    tols: &Tolerances,
) -> Result<(ConcreteMorphism, Warnings), DiscretizeError> {
    let mut w = Warnings::default();
    let m = Discretizer { res, tols: *tols, warnings: &mut w }.morphism(expr)?;
    Ok((m, w))
}

impl Discretizer<'_> {
    pub fn algebra(&mut self, expr: &AlgebraExpr) -> Result<ConcreteAlgebra, DiscretizeError> {
        if self.res == 0 {
            return Err(DiscretizeError::ZeroResolution);
        }
        let n = self.res;
        match expr {
            AlgebraExpr::Zero => Ok(ConcreteAlgebra::full(
                expr.to_string(),
                BlockShape::new(Vec::new())?,
                Vec::new(),
            )),
            AlgebraExpr::FiniteDim { sizes } => {
                let shape = BlockShape::new(sizes.clone())?;
                let labels = sizes.iter().enumerate().map(|(i, s)| format!("b{i}:M{s}")).collect();
                Ok(ConcreteAlgebra::full(expr.to_string(), shape, labels))
            }
            AlgebraExpr::IntervalTensor { n: axes, base } => {
                let pts = product_points(&vec![axis_closed(n); *axes as usize]);
                self.tensor_over_points(expr, base, &pts)
            }
            AlgebraExpr::OpenCubeTensor { n: axes, base } => {
                let pts = product_points(&vec![axis_open(n); *axes as usize]);
                if pts.is_empty() {
                    self.warnings.push(format!(
                        "open cube grid of {expr} is empty at resolution {n}; using the zero algebra"
                    ));
                }
                self.tensor_over_points(expr, base, &pts)
            }
            AlgebraExpr::HalfOpenTensor { base } => {
                let pts: Vec<Vec<u32>> = axis_halfopen(n).into_iter().map(|v| vec![v]).collect();
                self.tensor_over_points(expr, base, &pts)
            }
            AlgebraExpr::SphereTensor { n: dim, base } => {
                let pts = sphere_points(*dim as usize + 1, n);
                self.tensor_over_points(expr, base, &pts)
            }
            AlgebraExpr::DirectSum { left, right } => {
                let a = self.algebra(left)?;
                let b = self.algebra(right)?;
                let mut sizes = a.shape.sizes.clone();
                sizes.extend(b.shape.sizes.iter().copied());
                let mut labels: Vec<String> =
                    a.block_labels.iter().map(|l| format!("L.{l}")).collect();
                labels.extend(b.block_labels.iter().map(|l| format!("R.{l}")));
                let basis = if a.basis.is_none() && b.basis.is_none() {
                    None
                } else {
                    Some(blockdiag(&[a.basis_matrix(), b.basis_matrix()]))
                };
                Ok(ConcreteAlgebra {
                    label: expr.to_string(),
                    shape: BlockShape::new(sizes)?,
                    block_labels: labels,
                    basis,
                })
            }
            AlgebraExpr::Pullback { .. }
            | AlgebraExpr::Cylinder { .. }
            | AlgebraExpr::MappingCone { .. } => {
                let (alpha, beta) = expr.pullback_legs()?;
                let da = self.morphism(&alpha)?;
                let db = self.morphism(&beta)?;
                self.fiber_product(&da, &db, expr.to_string())
            }
        }
    }

    fn tensor_over_points(
        &mut self,
        expr: &AlgebraExpr,
        base: &AlgebraExpr,
        pts: &[Vec<u32>],
    ) -> Result<ConcreteAlgebra, DiscretizeError> {
        let b = self.algebra(base)?;
        let mut sizes = Vec::with_capacity(pts.len() * b.shape.sizes.len());
        let mut labels = Vec::with_capacity(sizes.capacity());
        for p in pts {
            let pl = point_label(p, self.res);
            for (s, bl) in b.shape.sizes.iter().zip(&b.block_labels) {
                sizes.push(*s);
                labels.push(format!("{pl}:{bl}"));
            }
        }
        let basis = b.basis.as_ref().map(|bb| blockdiag(&vec![bb.clone(); pts.len()]));
        Ok(ConcreteAlgebra {
            label: expr.to_string(),
            shape: BlockShape::new(sizes)?,
            block_labels: labels,
            basis,
        })
    }

    /// Fiber product of the domains of two discretized legs over their shared
    /// codomain: the subspace of pairs (x, y) with alpha(x) = beta(y),
    /// verified to be closed under adjoints and products.
    pub fn fiber_product(
        &mut self,
        alpha: &ConcreteMorphism,
        beta: &ConcreteMorphism,
        label: String,
    ) -> Result<ConcreteAlgebra, DiscretizeError> {
        if alpha.cod.ambient_dim() != beta.cod.ambient_dim() {
            return Err(DiscretizeError::Internal {
                context: format!("fiber product {label}"),
                left: alpha.cod.ambient_dim(),
                right: beta.cod.ambient_dim(),
            });
        }
        let ba = alpha.dom.basis_matrix();
        let bb = beta.dom.basis_matrix();
        let (da, db) = (ba.ncols(), bb.ncols());
        let left = &alpha.mat * &ba;
        let right = &beta.mat * &bb;
        let mut stacked = CMat::zeros(alpha.cod.ambient_dim(), da + db);
        stacked.columns_mut(0, da).copy_from(&left);
        let mut neg = right;
        neg.neg_mut();
        stacked.columns_mut(da, db).copy_from(&neg);
        let ns = linalg::nullspace(&stacked, self.tols.rank_rel);

        // Lift subspace-coordinate solutions to ambient pair coordinates.
        // Columns stay orthonormal because the blocks are orthonormal.
        let amb_a = alpha.dom.ambient_dim();
        let amb_b = beta.dom.ambient_dim();
        let mut basis = CMat::zeros(amb_a + amb_b, ns.ncols());
        if ns.ncols() > 0 {
            let top = &ba * ns.rows(0, da);
            let bot = &bb * ns.rows(da, db);
            basis.view_mut((0, 0), (amb_a, ns.ncols())).copy_from(&top);
            basis.view_mut((amb_a, 0), (amb_b, ns.ncols())).copy_from(&bot);
        }

        let mut sizes = alpha.dom.shape.sizes.clone();
        sizes.extend(beta.dom.shape.sizes.iter().copied());
        let mut labels: Vec<String> =
            alpha.dom.block_labels.iter().map(|l| format!("1.{l}")).collect();
        labels.extend(beta.dom.block_labels.iter().map(|l| format!("2.{l}")));
        let out = ConcreteAlgebra {
            label,
            shape: BlockShape::new(sizes)?,
            block_labels: labels,
            basis: Some(basis),
        };
        self.verify_star_closure(&out)?;
        Ok(out)
    }

    /// The fiber of two *-homomorphisms is a *-subalgebra; verify adjoint and
    /// product closure numerically to catch legs that are not actually
    /// multiplicative.
    fn verify_star_closure(&mut self, a: &ConcreteAlgebra) -> Result<(), DiscretizeError> {
        let basis = match &a.basis {
            Some(b) => b,
            None => return Ok(()),
        };
        let d = basis.ncols();
        if d == 0 {
            return Ok(());
        }
        let elems: Vec<Element> =
            (0..d).map(|c| a.element(&CVec::from(basis.column(c)))).collect();
        let mut worst = 0.0_f64;
        for e in &elems {
            worst = worst.max(linalg::span_residual(basis, &e.adjoint().flatten()));
        }
        let pairs: Vec<(usize, usize)> = if d <= 100 {
            (0..d).flat_map(|i| (0..d).map(move |j| (i, j))).collect()
        } else {
            let mut rng = seeds::rng_for(0, &format!("closure:{}", a.label));
            (0..2048).map(|_| (rng.gen_range(0..d), rng.gen_range(0..d))).collect()
        };
        for (i, j) in pairs {
            let prod = elems[i].mul(&elems[j]).flatten();
            worst = worst.max(linalg::span_residual(basis, &prod));
        }
        if worst > self.tols.residual {
            return Err(DiscretizeError::NotClosed { label: a.label.clone(), residual: worst });
        }
        Ok(())
    }

    pub fn morphism(&mut self, expr: &MorphismExpr) -> Result<ConcreteMorphism, DiscretizeError> {
        if self.res == 0 {
            return Err(DiscretizeError::ZeroResolution);
        }
        let n = self.res;
        let label = expr.to_string();
        match expr {
            MorphismExpr::Identity { on } => {
                let a = self.algebra(on)?;
                let mat = CMat::identity(a.ambient_dim(), a.ambient_dim());
                Ok(ConcreteMorphism { label, dom: a.clone(), cod: a, mat })
            }
            MorphismExpr::Zero { domain, codomain } => {
                let d = self.algebra(domain)?;
                let c = self.algebra(codomain)?;
                let mat = CMat::zeros(c.ambient_dim(), d.ambient_dim());
                Ok(ConcreteMorphism { label, dom: d, cod: c, mat })
            }
            MorphismExpr::Compose { after, before } => {
                let f = self.morphism(before)?;
                let g = self.morphism(after)?;
                let mut out = g.compose(&f)?;
                out.label = label;
                Ok(out)
            }
            MorphismExpr::Evaluation { t, on } => {
                let dom = self.algebra(on)?;
                let (base, idx, points) = match &**on {
                    AlgebraExpr::IntervalTensor { n: 1, base } => {
                        let idx = t
                            .on_grid(n)
                            .ok_or(DiscretizeError::OffGrid { t: *t, res: n })?;
                        (base, idx, n as usize + 1)
                    }
                    AlgebraExpr::HalfOpenTensor { base } => {
                        let v = t
                            .on_grid(n)
                            .ok_or(DiscretizeError::OffGrid { t: *t, res: n })?;
                        if v == 0 {
                            return Err(DiscretizeError::OffGrid { t: *t, res: n });
                        }
                        (base, v - 1, n as usize)
                    }
                    other => {
                        return Err(crate::expr::ExprError::EvaluationTarget {
                            found: other.to_string(),
                        }
                        .into())
                    }
                };
                let cod = self.algebra(base)?;
                let mat = select_point_block(points, cod.ambient_dim(), idx);
                Ok(ConcreteMorphism { label, dom, cod, mat })
            }
            MorphismExpr::BoundaryRestrict { on } => {
                let (axes, base) = match &**on {
                    AlgebraExpr::IntervalTensor { n: axes, base } => (*axes as usize, base),
                    other => {
                        return Err(crate::expr::ExprError::BoundaryTarget {
                            found: other.to_string(),
                        }
                        .into())
                    }
                };
                let dom = self.algebra(on)?;
                let cod_expr = expr.codomain()?;
                let cod = self.algebra(&cod_expr)?;
                let base_dim = self.algebra(base)?.ambient_dim();
                let pts = sphere_points(axes, n);
                let mut mat = CMat::zeros(cod.ambient_dim(), dom.ambient_dim());
                for (s_idx, p) in pts.iter().enumerate() {
                    let c_idx = closed_cube_index(p, n);
                    for d in 0..base_dim {
                        mat[(s_idx * base_dim + d, c_idx * base_dim + d)] = linalg::cone();
                    }
                }
                Ok(ConcreteMorphism { label, dom, cod, mat })
            }
            MorphismExpr::ProjectionFirst { of } | MorphismExpr::ProjectionSecond { of } => {
                let dom = self.algebra(of)?;
                let (first_expr, second_expr) = of.pullback_factors()?;
                let first = self.algebra(&first_expr)?;
                let second = self.algebra(&second_expr)?;
                let (da, db) = (first.ambient_dim(), second.ambient_dim());
                if da + db != dom.ambient_dim() {
                    return Err(DiscretizeError::Internal {
                        context: format!("projection from {}", dom.label),
                        left: da + db,
                        right: dom.ambient_dim(),
                    });
                }
                let take_first = matches!(expr, MorphismExpr::ProjectionFirst { .. });
                let (cod, mat) = if take_first {
                    let mut m = CMat::zeros(da, da + db);
                    m.view_mut((0, 0), (da, da)).copy_from(&CMat::identity(da, da));
                    (first, m)
                } else {
                    let mut m = CMat::zeros(db, da + db);
                    m.view_mut((0, da), (db, db)).copy_from(&CMat::identity(db, db));
                    (second, m)
                };
                Ok(ConcreteMorphism { label, dom, cod, mat })
            }
            MorphismExpr::ConstantEmbed { target } => {
                let cod = self.algebra(target)?;
                let dom_expr = expr.domain()?;
                let dom = self.algebra(&dom_expr)?;
                let d = dom.ambient_dim();
                if d == 0 {
                    let mat = CMat::zeros(cod.ambient_dim(), 0);
                    return Ok(ConcreteMorphism { label, dom, cod, mat });
                }
                let points = cod.ambient_dim() / d;
                let mut mat = CMat::zeros(cod.ambient_dim(), d);
                for p in 0..points {
                    mat.view_mut((p * d, 0), (d, d)).copy_from(&CMat::identity(d, d));
                }
                Ok(ConcreteMorphism { label, dom, cod, mat })
            }
            MorphismExpr::SuspendedMorphism { f } => {
                let df = self.morphism(f)?;
                let dom_expr = expr.domain()?;
                let cod_expr = expr.codomain()?;
                let dom = self.algebra(&dom_expr)?;
                let cod = self.algebra(&cod_expr)?;
                let interior = n.saturating_sub(1) as usize;
                let mat = blockdiag(&vec![df.mat.clone(); interior]);
                if mat.nrows() != cod.ambient_dim() || mat.ncols() != dom.ambient_dim() {
                    return Err(DiscretizeError::Internal {
                        context: format!("suspension of {}", df.label),
                        left: mat.nrows(),
                        right: cod.ambient_dim(),
                    });
                }
                Ok(ConcreteMorphism { label, dom, cod, mat })
            }
            MorphismExpr::BlockMap { domain, codomain, data } => {
                let dom = self.algebra(domain)?;
                let cod = self.algebra(codomain)?;
                let mm = MultiplicityMorphism::standard(
                    dom.shape.clone(),
                    cod.shape.clone(),
                    data.multiplicities.iter().map(|r| r.clone()).collect(),
                )?;
                Ok(ConcreteMorphism { label, dom, cod, mat: mm.linear_matrix() })
            }
            MorphismExpr::WindingEmbed { domain, target, data, k, winds } => {
                self.winding(expr, domain, target, data, k, *winds, label)
            }
            MorphismExpr::Rotation { on, shift } => self.rotation(on, *shift, label),
            MorphismExpr::IntoPullback { target, left, right } => {
                let cod = self.algebra(target)?;
                let l = self.morphism(left)?;
                let r = self.morphism(right)?;
                let rows = l.cod.ambient_dim() + r.cod.ambient_dim();
                if rows != cod.ambient_dim() {
                    return Err(DiscretizeError::Internal {
                        context: format!("pair into {}", cod.label),
                        left: rows,
                        right: cod.ambient_dim(),
                    });
                }
                let mut mat = CMat::zeros(rows, l.dom.ambient_dim());
                mat.view_mut((0, 0), (l.cod.ambient_dim(), l.mat.ncols())).copy_from(&l.mat);
                mat.view_mut((l.cod.ambient_dim(), 0), (r.cod.ambient_dim(), r.mat.ncols()))
                    .copy_from(&r.mat);
                let out = ConcreteMorphism { label, dom: l.dom.clone(), cod, mat };
                let res = out.subspace_residual();
                if res > self.tols.residual {
                    return Err(DiscretizeError::SubspaceViolation {
                        context: format!("pair {}", out.label),
                        residual: res,
                    });
                }
                Ok(out)
            }
            MorphismExpr::DirectPair { left, right } => {
                let l = self.morphism(left)?;
                let r = self.morphism(right)?;
                let cod_expr = expr.codomain()?;
                let cod = self.algebra(&cod_expr)?;
                let rows = l.cod.ambient_dim() + r.cod.ambient_dim();
                let mut mat = CMat::zeros(rows, l.dom.ambient_dim());
                mat.view_mut((0, 0), (l.cod.ambient_dim(), l.mat.ncols())).copy_from(&l.mat);
                mat.view_mut((l.cod.ambient_dim(), 0), (r.cod.ambient_dim(), r.mat.ncols()))
                    .copy_from(&r.mat);
                Ok(ConcreteMorphism { label, dom: l.dom.clone(), cod, mat })
            }
            MorphismExpr::ZeroExtend { from, to } => {
                let shape = zero_extend_shape(from, to).ok_or_else(|| {
                    crate::expr::ExprError::ZeroExtendPair {
                        from: from.to_string(),
                        to: to.to_string(),
                    }
                })?;
                let dom = self.algebra(from)?;
                let cod = self.algebra(to)?;
                let base_expr = match &**from {
                    AlgebraExpr::OpenCubeTensor { base, .. }
                    | AlgebraExpr::HalfOpenTensor { base } => base,
                    _ => unreachable!("legal zero extensions start from open or half-open"),
                };
                let d = self.algebra(base_expr)?.ambient_dim();
                let mut mat = CMat::zeros(cod.ambient_dim(), dom.ambient_dim());
                let src_pts: Vec<Vec<u32>> = match shape {
                    ZeroExtendShape::OpenIntoClosed(axes) => {
                        product_points(&vec![axis_open(n); axes as usize])
                    }
                    ZeroExtendShape::OpenIntoHalfOpen => {
                        axis_open(n).into_iter().map(|v| vec![v]).collect()
                    }
                    ZeroExtendShape::HalfOpenIntoClosed => {
                        axis_halfopen(n).into_iter().map(|v| vec![v]).collect()
                    }
                };
                for (s_idx, p) in src_pts.iter().enumerate() {
                    let t_idx = match shape {
                        ZeroExtendShape::OpenIntoClosed(_) | ZeroExtendShape::HalfOpenIntoClosed => {
                            closed_cube_index(p, n)
                        }
                        ZeroExtendShape::OpenIntoHalfOpen => p[0] as usize - 1,
                    };
                    for off in 0..d {
                        mat[(t_idx * d + off, s_idx * d + off)] = linalg::cone();
                    }
                }
                Ok(ConcreteMorphism { label, dom, cod, mat })
            }
            MorphismExpr::UserNamed { name, .. } => {
                Err(DiscretizeError::Unresolved(name.clone()))
            }
        }
    }

    fn winding(
        &mut self,
        expr: &MorphismExpr,
        domain: &AlgebraExpr,
        target: &AlgebraExpr,
        data: &crate::expr::BlockMapData,
        k: &crate::expr::MatrixLit,
        winds: i64,
        label: String,
    ) -> Result<ConcreteMorphism, DiscretizeError> {
        expr.validate(&crate::expr::Limits::default())?;
        let n = self.res;
        let dom = self.algebra(domain)?;
        let cod = self.algebra(target)?;
        let (base, pts): (&AlgebraExpr, Vec<Vec<u32>>) = match target {
            AlgebraExpr::SphereTensor { n: 1, base } => (base, sphere_points(2, n)),
            AlgebraExpr::IntervalTensor { n: 1, base } => {
                (base, axis_closed(n).into_iter().map(|v| vec![v]).collect())
            }
            other => {
                return Err(crate::expr::ExprError::WindingTarget { found: other.to_string() }
                    .into())
            }
        };
        let fshape = self.algebra(base)?.shape;
        let m = fshape.sizes[0] as usize;
        let kmat = {
            let mut km = CMat::zeros(m, m);
            for (r, row) in k.rows.iter().enumerate() {
                for (c, &(re, im)) in row.iter().enumerate() {
                    km[(r, c)] = num_complex::Complex64::new(re, im);
                }
            }
            km
        };
        let base_dim = m * m;
        let mut mat = CMat::zeros(cod.ambient_dim(), dom.ambient_dim());
        for (p_idx, p) in pts.iter().enumerate() {
            let c = match target {
                AlgebraExpr::SphereTensor { .. } => {
                    perimeter_position(p, n) as f64 / (4.0 * n as f64)
                }
                _ => p[0] as f64 / n as f64,
            };
            let angle = 2.0 * std::f64::consts::PI * winds as f64 * c;
            let u = linalg::exp_i_hermitian(&(&kmat * num_complex::Complex64::new(angle, 0.0)));
            let mm = MultiplicityMorphism::new(
                dom.shape.clone(),
                fshape.clone(),
                data.multiplicities.clone(),
                Some(vec![u]),
            )?;
            let block = mm.linear_matrix();
            mat.view_mut((p_idx * base_dim, 0), (base_dim, dom.ambient_dim()))
                .copy_from(&block);
        }
        Ok(ConcreteMorphism { label, dom, cod, mat })
    }

    /// Rotation of a circle-type pullback: shift the interval coordinate
    /// cyclically (the two glued endpoints act as one seam point) and solve
    /// for the new base coordinate through the gluing morphism.
    fn rotation(
        &mut self,
        on: &AlgebraExpr,
        shift: GridFraction,
        label: String,
    ) -> Result<ConcreteMorphism, DiscretizeError> {
        let n = self.res;
        let j = shift
            .on_grid(n)
            .ok_or(DiscretizeError::ShiftOffGrid { shift, res: n })?;
        let alg = self.algebra(on)?;
        let (alpha, beta) = on.pullback_legs()?;
        let cube = match &alpha {
            MorphismExpr::BoundaryRestrict { on: cube } => cube,
            other => {
                return Err(crate::expr::ExprError::RotationTarget { found: other.to_string() }
                    .into())
            }
        };
        let base = match &**cube {
            AlgebraExpr::IntervalTensor { n: 1, base } => base,
            other => {
                return Err(crate::expr::ExprError::RotationTarget { found: other.to_string() }
                    .into())
            }
        };
        let d_f = self.algebra(base)?.ambient_dim();
        let d_i = (n as usize + 1) * d_f;
        let sigma = self.morphism(&beta)?;
        let d_a = sigma.dom.ambient_dim();
        if d_i + d_a != alg.ambient_dim() {
            return Err(DiscretizeError::Internal {
                context: format!("rotation of {}", alg.label),
                left: d_i + d_a,
                right: alg.ambient_dim(),
            });
        }
        let mut mat = CMat::zeros(alg.ambient_dim(), alg.ambient_dim());
        if j == 0 {
            mat.fill_with_identity();
        } else {
            // Interval part: the value at point i comes from point i + j,
            // wrapping past the seam (points 0 and N are glued).
            for i in 0..=n as usize {
                let mut w = i + j;
                if w > n as usize {
                    w -= n as usize;
                }
                for d in 0..d_f {
                    mat[(i * d_f + d, w * d_f + d)] = linalg::cone();
                }
            }
            // Base part: solve sigma(a') = (g(j), g(j)) in least squares; the
            // subspace check below certifies the solve is exact on members.
            let t = linalg::lstsq(
                &sigma.mat,
                &CMat::identity(2 * d_f, 2 * d_f),
                self.tols.rank_rel,
            );
            for col in 0..d_f {
                for row in 0..d_a {
                    let v = t[(row, col)] + t[(row, d_f + col)];
                    mat[(d_i + row, j * d_f + col)] = v;
                }
            }
        }
        let out = ConcreteMorphism { label, dom: alg.clone(), cod: alg, mat };
        let res = out.subspace_residual();
        if res > self.tols.residual {
            return Err(DiscretizeError::SubspaceViolation {
                context: format!("rotation {}", out.label),
                residual: res,
            });
        }
        Ok(out)
    }

    /// Restriction from this discretizer's (fine) grid onto the grid of a
    /// coarser resolution dividing it: select the values at the coarse
    /// points. Returns a morphism from the fine to the coarse discretization.
    pub fn restriction(
        &mut self,
        expr: &AlgebraExpr,
        coarse: u32,
    ) -> Result<ConcreteMorphism, DiscretizeError> {
        let fine = self.res;
        if coarse == 0 || fine % coarse != 0 {
            return Err(DiscretizeError::BadRefinement { fine, coarse });
        }
        let k = fine / coarse;
        let dom = self.algebra(expr)?;
        let mut coarse_disc =
            Discretizer { res: coarse, tols: self.tols, warnings: self.warnings };
        let cod = coarse_disc.algebra(expr)?;
        let label = format!("restrict[{fine}->{coarse}]({expr})");
        let mat = self.restriction_matrix(expr, coarse, k)?;
        if mat.nrows() != cod.ambient_dim() || mat.ncols() != dom.ambient_dim() {
            return Err(DiscretizeError::Internal {
                context: label,
                left: mat.nrows(),
                right: cod.ambient_dim(),
            });
        }
        let out = ConcreteMorphism { label, dom, cod, mat };
        let res = out.subspace_residual();
        if res > self.tols.residual {
            return Err(DiscretizeError::SubspaceViolation {
                context: format!("restriction {}", out.label),
                residual: res,
            });
        }
        Ok(out)
    }

    fn restriction_matrix(
        &mut self,
        expr: &AlgebraExpr,
        coarse: u32,
        k: u32,
    ) -> Result<CMat, DiscretizeError> {
        let fine = self.res;
        match expr {
            AlgebraExpr::Zero => Ok(CMat::zeros(0, 0)),
            AlgebraExpr::FiniteDim { .. } => {
                let d = self.algebra(expr)?.ambient_dim();
                Ok(CMat::identity(d, d))
            }
            AlgebraExpr::IntervalTensor { n: axes, base }
            | AlgebraExpr::OpenCubeTensor { n: axes, base }
            | AlgebraExpr::SphereTensor { n: axes, base } => {
                let (fine_pts, coarse_pts) = match expr {
                    AlgebraExpr::IntervalTensor { .. } => (
                        product_points(&vec![axis_closed(fine); *axes as usize]),
                        product_points(&vec![axis_closed(coarse); *axes as usize]),
                    ),
                    AlgebraExpr::OpenCubeTensor { .. } => (
                        product_points(&vec![axis_open(fine); *axes as usize]),
                        product_points(&vec![axis_open(coarse); *axes as usize]),
                    ),
                    _ => (
                        sphere_points(*axes as usize + 1, fine),
                        sphere_points(*axes as usize + 1, coarse),
                    ),
                };
                self.point_restriction(base, coarse, k, &fine_pts, &coarse_pts)
            }
            AlgebraExpr::HalfOpenTensor { base } => {
                let fine_pts: Vec<Vec<u32>> =
                    axis_halfopen(fine).into_iter().map(|v| vec![v]).collect();
                let coarse_pts: Vec<Vec<u32>> =
                    axis_halfopen(coarse).into_iter().map(|v| vec![v]).collect();
                self.point_restriction(base, coarse, k, &fine_pts, &coarse_pts)
            }
            AlgebraExpr::DirectSum { left, right } => {
                let l = self.restriction_matrix(left, coarse, k)?;
                let r = self.restriction_matrix(right, coarse, k)?;
                Ok(blockdiag(&[l, r]))
            }
            AlgebraExpr::Pullback { .. }
            | AlgebraExpr::Cylinder { .. }
            | AlgebraExpr::MappingCone { .. } => {
                let (first, second) = expr.pullback_factors()?;
                let l = self.restriction_matrix(&first, coarse, k)?;
                let r = self.restriction_matrix(&second, coarse, k)?;
                Ok(blockdiag(&[l, r]))
            }
        }
    }

    fn point_restriction(
        &mut self,
        base: &AlgebraExpr,
        coarse: u32,
        k: u32,
        fine_pts: &[Vec<u32>],
        coarse_pts: &[Vec<u32>],
    ) -> Result<CMat, DiscretizeError> {
        let base_rest = self.restriction_matrix(base, coarse, k)?;
        let d_fine = base_rest.ncols();
        let d_coarse = base_rest.nrows();
        let mut mat = CMat::zeros(coarse_pts.len() * d_coarse, fine_pts.len() * d_fine);
        for (c_idx, cp) in coarse_pts.iter().enumerate() {
            let fp: Vec<u32> = cp.iter().map(|&v| v * k).collect();
            let f_idx = fine_pts
                .iter()
                .position(|p| *p == fp)
                .expect("scaled coarse point lies on the fine grid");
            mat.view_mut((c_idx * d_coarse, f_idx * d_fine), (d_coarse, d_fine))
                .copy_from(&base_rest);
        }
        Ok(mat)
    }
}

// ---------------------------------------------------------------------------
// dimension prediction

fn pow(base: usize, exp: u32) -> usize {
    base.pow(exp)
}

fn leg_is_onto(m: &MorphismExpr) -> bool {
    matches!(
        m,
        MorphismExpr::Evaluation { .. }
            | MorphismExpr::BoundaryRestrict { .. }
            | MorphismExpr::Identity { .. }
    )
}

/// Predicted linear dimension of the discretized algebra, computed from the
/// grid combinatorics without building basis matrices. Pullbacks whose legs
/// include a surjective structural map (evaluation, boundary restriction,
/// identity) use the codimension formula; other pullbacks fall back to a
/// numerical rank of the stacked constraint.
pub fn linear_dim(expr: &AlgebraExpr, res: u32) -> Result<usize, DiscretizeError> {
    if res == 0 {
        return Err(DiscretizeError::ZeroResolution);
    }
    let n = res as usize;
    Ok(match expr {
        AlgebraExpr::Zero => 0,
        AlgebraExpr::FiniteDim { sizes } => {
            sizes.iter().map(|&s| (s as usize) * (s as usize)).sum()
        }
        AlgebraExpr::IntervalTensor { n: axes, base } => {
            pow(n + 1, *axes) * linear_dim(base, res)?
        }
        AlgebraExpr::OpenCubeTensor { n: axes, base } => {
            pow(n - 1, *axes) * linear_dim(base, res)?
        }
        AlgebraExpr::HalfOpenTensor { base } => n * linear_dim(base, res)?,
        AlgebraExpr::SphereTensor { n: dim, base } => {
            (pow(n + 1, *dim + 1) - pow(n - 1, *dim + 1)) * linear_dim(base, res)?
        }
        AlgebraExpr::DirectSum { left, right } => {
            linear_dim(left, res)? + linear_dim(right, res)?
        }
        AlgebraExpr::Pullback { .. }
        | AlgebraExpr::Cylinder { .. }
        | AlgebraExpr::MappingCone { .. } => {
            let (alpha, beta) = expr.pullback_legs()?;
            let d1 = linear_dim(&alpha.domain()?, res)?;
            let d2 = linear_dim(&beta.domain()?, res)?;
            let r = if leg_is_onto(&alpha) || leg_is_onto(&beta) {
                linear_dim(&alpha.codomain()?, res)?
            } else {
                let tols = Tolerances::default();
                let mut w = Warnings::default();
                let mut disc = Discretizer { res, tols, warnings: &mut w };
                let da = disc.morphism(&alpha)?;
                let db = disc.morphism(&beta)?;
                let left = &da.mat * da.dom.basis_matrix();
                let right = &db.mat * db.dom.basis_matrix();
                let mut stacked =
                    CMat::zeros(da.cod.ambient_dim(), left.ncols() + right.ncols());
                stacked.columns_mut(0, left.ncols()).copy_from(&left);
                let mut neg = right;
                neg.neg_mut();
                stacked.columns_mut(left.ncols(), neg.ncols()).copy_from(&neg);
                linalg::rank(&stacked, tols.rank_rel)
            };
            d1 + d2 - r
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::finite_dim;

    fn m(k: u32) -> AlgebraExpr {
        finite_dim(&[k]).unwrap()
    }

    #[test]
    fn zero_sphere_has_two_points_at_every_resolution() {
        for n in [1, 2, 5] {
            assert_eq!(sphere_points(1, n).len(), 2, "resolution {n}");
        }
    }

    #[test]
    fn open_grid_at_resolution_one_degenerates_with_a_warning() {
        let e = AlgebraExpr::OpenCubeTensor { n: 1, base: m(2).boxed() };
        let (a, w) = discretize_algebra(&e, 1, &Tolerances::default()).unwrap();
        assert_eq!(a.dim(), 0);
        assert_eq!(w.messages.len(), 1);
    }

    #[test]
    fn evaluation_selects_the_right_point_block() {
        let paths = AlgebraExpr::IntervalTensor { n: 1, base: m(1).boxed() };
        let ev = MorphismExpr::Evaluation {
            t: GridFraction::new(1, 2).unwrap(),
            on: paths.boxed(),
        };
        let (d, _) = discretize_morphism(&ev, 4, &Tolerances::default()).unwrap();
        assert_eq!(d.mat.nrows(), 1);
        assert_eq!(d.mat.ncols(), 5);
        assert_eq!(d.mat[(0, 2)], linalg::cone());
    }

    #[test]
    fn perimeter_walk_covers_the_square_boundary_once() {
        let n = 3;
        let pts = sphere_points(2, n);
        let mut seen: Vec<usize> = pts.iter().map(|p| perimeter_position(p, n)).collect();
        seen.sort_unstable();
        assert_eq!(seen, (0..4 * n as usize).collect::<Vec<_>>());
    }

    #[test]
    fn predicted_dims_match_solved_dims_for_a_cylinder() {
        let f = MorphismExpr::Identity { on: m(2).boxed() };
        let cyl = AlgebraExpr::Cylinder { f: f.boxed() };
        for n in [1, 2, 4] {
            let (a, _) = discretize_algebra(&cyl, n, &Tolerances::default()).unwrap();
            assert_eq!(a.dim(), linear_dim(&cyl, n).unwrap(), "resolution {n}");
        }
    }
}
