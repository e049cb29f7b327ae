//! Symbolic expressions for algebras and morphisms.
//!
//! An `AlgebraExpr` is a finite tree: matrix-block sums at the leaves,
//! tensor-with-function-space constructors (closed/open cubes, spheres,
//! half-open intervals), direct sums, and fiber-product nodes (pullbacks,
//! mapping cylinders, mapping cones). A `MorphismExpr` names a structural
//! map between two such expressions; every morphism has a computable domain
//! and codomain expression.
//!
//! Trees are immutable values: cloning is deep, equality is structural, and
//! the serde form is a nested JSON tree that round-trips losslessly.
//!
//! Conventions fixed here and used everywhere downstream:
//! * `Suspension(A)` is the same node as `OpenCubeTensor(1, A)`.
//! * `Cylinder(f: A -> B)` means pairs `(a, g)` with `g: [0,1] -> B` and
//!   `g(1) = f(a)`; `MappingCone(f)` is the same with `g` vanishing at 0.
//!   Both are fiber products over the evaluation `g(1)` in the codomain.
//! * A sphere of dimension `n` is the boundary of the `(n+1)`-cube, so
//!   `SphereTensor(0, A)` is two copies of `A` at every resolution.

use serde::{Deserialize, Serialize};
use std::fmt;

/// Exact rational grid coordinate in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridFraction {
    num: u64,
    den: u64,
}

impl GridFraction {
    pub fn new(num: u64, den: u64) -> Result<Self, ExprError> {
        if den == 0 || num > den {
            return Err(ExprError::BadFraction { num, den });
        }
        let g = gcd(num.max(1), den);
        Ok(GridFraction { num: num / g, den: den / g })
    }

    pub fn zero() -> Self {
        GridFraction { num: 0, den: 1 }
    }

    pub fn one() -> Self {
        GridFraction { num: 1, den: 1 }
    }

    pub fn num(&self) -> u64 {
        self.num
    }

    pub fn den(&self) -> u64 {
        self.den
    }

    pub fn value(&self) -> f64 {
        self.num as f64 / self.den as f64
    }

    /// Index of this fraction on the grid `{0, 1/n, ..., 1}`, if it lies on it.
    pub fn on_grid(&self, n: u32) -> Option<usize> {
        let n = n as u64;
        if (self.num * n) % self.den == 0 {
            Some(((self.num * n) / self.den) as usize)
        } else {
            None
        }
    }
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

impl fmt::Display for GridFraction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den == 1 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

/// Bounds on symbolic constructions; cube and sphere dimensions above
/// `max_cube_dim` are rejected.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Limits {
    pub max_cube_dim: u32,
}

impl Default for Limits {
    fn default() -> Self {
        Limits { max_cube_dim: 2 }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ExprError {
    #[error("block sizes must be at least 1")]
    ZeroBlockSize,
    #[error("fraction {num}/{den} is not a grid coordinate in [0,1]")]
    BadFraction { num: u64, den: u64 },
    #[error("dimension {n} exceeds the configured bound {max}")]
    DimensionBound { n: u32, max: u32 },
    #[error("pullback legs have different codomains: {left} vs {right}")]
    CodomainMismatch { left: String, right: String },
    #[error("cannot compose: left domain {after_domain} differs from right codomain {before_codomain}")]
    NotComposable { after_domain: String, before_codomain: String },
    #[error("evaluation needs a 1-dimensional interval or half-open tensor, got {found}")]
    EvaluationTarget { found: String },
    #[error("evaluation point {t} does not lie in the grid of {found}")]
    EvaluationPoint { t: GridFraction, found: String },
    #[error("boundary restriction needs an interval tensor, got {found}")]
    BoundaryTarget { found: String },
    #[error("projection needs a pullback, cylinder, or cone node, got {found}")]
    NotAPullbackNode { found: String },
    #[error("constant embedding targets an interval or sphere tensor, got {found}")]
    ConstantEmbedTarget { found: String },
    #[error("{expr} does not have a resolution-independent block structure")]
    NotResolutionIndependent { expr: String },
    #[error("multiplicity matrix is {rows}x{cols}, expected {expected_rows}x{expected_cols}")]
    BadMultiplicityShape { rows: usize, cols: usize, expected_rows: usize, expected_cols: usize },
    #[error("multiplicities need {needed} rows of the target block of size {have} ({context})")]
    MultiplicityOverflow { needed: u32, have: u32, context: String },
    #[error("unital flag requires exact size match in target block {block}: used {used} of {have}")]
    UnitalSizeMismatch { block: usize, used: u32, have: u32 },
    #[error("zero extension from {from} to {to} is not a grid inclusion")]
    ZeroExtendPair { from: String, to: String },
    #[error("rotation is defined on circle-type pullbacks over a 1-cell, got {found}")]
    RotationTarget { found: String },
    #[error("winding matrix must be hermitian (residual {residual:.3e})")]
    WindingNotHermitian { residual: f64 },
    #[error("winding targets a 1-sphere or 1-interval over a single block, got {found}")]
    WindingTarget { found: String },
    #[error("winding matrix is {k}x{k} but the target block has size {block}")]
    WindingSize { k: usize, block: u32 },
    #[error("pair morphism legs must share a domain: {left} vs {right}")]
    PairDomainMismatch { left: String, right: String },
    #[error("pair morphism leg {which} maps to {found}, expected factor {expected}")]
    PairLegMismatch { which: &'static str, found: String, expected: String },
    #[error("morphism name {0} is unresolved")]
    UnresolvedName(String),
}

/// Multiplicity data for a block map: `multiplicities[j][i]` copies of source
/// block `i` inside target block `j`, padded with zeros; `unital` requires the
/// copies to fill each target block exactly.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockMapData {
    pub multiplicities: Vec<Vec<u32>>,
    pub unital: bool,
}

/// Complex matrix literal used by winding morphisms; entries are (re, im).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixLit {
    pub rows: Vec<Vec<(f64, f64)>>,
}

impl MatrixLit {
    pub fn size(&self) -> usize {
        self.rows.len()
    }

    pub fn is_square(&self) -> bool {
        self.rows.iter().all(|r| r.len() == self.rows.len())
    }

    pub fn hermitian_residual(&self) -> f64 {
        let n = self.size();
        let mut worst = 0.0_f64;
        for i in 0..n {
            for j in 0..n {
                let (ar, ai) = self.rows[i][j];
                let (br, bi) = self.rows[j][i];
                let d = ((ar - br).powi(2) + (ai + bi).powi(2)).sqrt();
                worst = worst.max(d);
            }
        }
        worst
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum AlgebraExpr {
    /// The zero algebra.
    Zero,
    /// Direct sum of full matrix blocks of the given sizes.
    FiniteDim { sizes: Vec<u32> },
    /// Functions on the closed n-cube with values in `base`.
    IntervalTensor { n: u32, base: Box<AlgebraExpr> },
    /// Functions on the open n-cube (vanishing on the boundary).
    OpenCubeTensor { n: u32, base: Box<AlgebraExpr> },
    /// Functions on the n-sphere, realized as the boundary of the (n+1)-cube.
    SphereTensor { n: u32, base: Box<AlgebraExpr> },
    /// Functions on (0,1] (vanishing at 0): the cone over `base`.
    HalfOpenTensor { base: Box<AlgebraExpr> },
    DirectSum { left: Box<AlgebraExpr>, right: Box<AlgebraExpr> },
    /// Fiber product of the domains of `alpha` and `beta` over their shared
    /// codomain.
    Pullback { alpha: Box<MorphismExpr>, beta: Box<MorphismExpr> },
    /// Pairs (a, g) with g a path in the codomain of `f` and g(1) = f(a).
    Cylinder { f: Box<MorphismExpr> },
    /// Pairs (a, g) with g vanishing at 0 and g(1) = f(a).
    MappingCone { f: Box<MorphismExpr> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum MorphismExpr {
    Identity { on: Box<AlgebraExpr> },
    Zero { domain: Box<AlgebraExpr>, codomain: Box<AlgebraExpr> },
    Compose { after: Box<MorphismExpr>, before: Box<MorphismExpr> },
    /// Evaluate a 1-dimensional interval or half-open tensor at a grid point.
    Evaluation { t: GridFraction, on: Box<AlgebraExpr> },
    /// Restrict functions on the n-cube to the boundary sphere.
    BoundaryRestrict { on: Box<AlgebraExpr> },
    ProjectionFirst { of: Box<AlgebraExpr> },
    ProjectionSecond { of: Box<AlgebraExpr> },
    /// Embed the base algebra as constant functions on a cube or sphere.
    ConstantEmbed { target: Box<AlgebraExpr> },
    /// Apply a morphism pointwise over the open interval.
    SuspendedMorphism { f: Box<MorphismExpr> },
    /// Multiplicity map between resolution-independent block structures.
    BlockMap { domain: Box<AlgebraExpr>, codomain: Box<AlgebraExpr>, data: BlockMapData },
    /// Constant multiplicity embedding conjugated pointwise by the winding
    /// unitaries exp(2*pi*i * winds * s * K) along the grid parameter s.
    WindingEmbed {
        domain: Box<AlgebraExpr>,
        target: Box<AlgebraExpr>,
        data: BlockMapData,
        k: MatrixLit,
        winds: i64,
    },
    /// Rotate a circle-type pullback (1-cell glued along both endpoints).
    Rotation { on: Box<AlgebraExpr>, shift: GridFraction },
    /// The mediating morphism into a pullback-type node from a pair of legs.
    IntoPullback { target: Box<AlgebraExpr>, left: Box<MorphismExpr>, right: Box<MorphismExpr> },
    /// Tuple into a direct sum.
    DirectPair { left: Box<MorphismExpr>, right: Box<MorphismExpr> },
    /// Extend functions by zero from a smaller grid to a containing grid.
    ZeroExtend { from: Box<AlgebraExpr>, to: Box<AlgebraExpr> },
    /// Reference to a script-declared morphism, carried with its type.
    UserNamed { name: String, domain: Box<AlgebraExpr>, codomain: Box<AlgebraExpr> },
}

/// Tensor-type functors applied to an algebra expression.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TensorFunctor {
    Cone,
    Suspension,
    Interval(u32),
    OpenCube(u32),
    Sphere(u32),
}

pub fn finite_dim(sizes: &[u32]) -> Result<AlgebraExpr, ExprError> {
    if sizes.iter().any(|&s| s == 0) {
        return Err(ExprError::ZeroBlockSize);
    }
    if sizes.is_empty() {
        return Ok(AlgebraExpr::Zero);
    }
    Ok(AlgebraExpr::FiniteDim { sizes: sizes.to_vec() })
}

/// Apply a tensor functor. `Suspension` produces the same node as
/// `OpenCube(1)`, so the two are structurally interchangeable.
pub fn apply_functor(
    functor: TensorFunctor,
    a: AlgebraExpr,
    limits: &Limits,
) -> Result<AlgebraExpr, ExprError> {
    let check = |n: u32| {
        if n == 0 || n > limits.max_cube_dim {
            Err(ExprError::DimensionBound { n, max: limits.max_cube_dim })
        } else {
            Ok(())
        }
    };
    Ok(match functor {
        TensorFunctor::Cone => AlgebraExpr::HalfOpenTensor { base: Box::new(a) },
        TensorFunctor::Suspension => AlgebraExpr::OpenCubeTensor { n: 1, base: Box::new(a) },
        TensorFunctor::Interval(n) => {
            check(n)?;
            AlgebraExpr::IntervalTensor { n, base: Box::new(a) }
        }
        TensorFunctor::OpenCube(n) => {
            check(n)?;
            AlgebraExpr::OpenCubeTensor { n, base: Box::new(a) }
        }
        TensorFunctor::Sphere(n) => {
            if n > limits.max_cube_dim {
                return Err(ExprError::DimensionBound { n, max: limits.max_cube_dim });
            }
            AlgebraExpr::SphereTensor { n, base: Box::new(a) }
        }
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MappingKind {
    Cylinder,
    Cone,
}

/// Build the mapping cylinder or cone of `f`.
pub fn mapping_construction(kind: MappingKind, f: MorphismExpr) -> Result<AlgebraExpr, ExprError> {
    f.domain()?;
    f.codomain()?;
    Ok(match kind {
        MappingKind::Cylinder => AlgebraExpr::Cylinder { f: Box::new(f) },
        MappingKind::Cone => AlgebraExpr::MappingCone { f: Box::new(f) },
    })
}

/// Build a pullback node, requiring the legs to share a codomain.
pub fn pullback_expr(alpha: MorphismExpr, beta: MorphismExpr) -> Result<AlgebraExpr, ExprError> {
    let ca = alpha.codomain()?;
    let cb = beta.codomain()?;
    if ca != cb {
        return Err(ExprError::CodomainMismatch { left: ca.to_string(), right: cb.to_string() });
    }
    Ok(AlgebraExpr::Pullback { alpha: Box::new(alpha), beta: Box::new(beta) })
}

impl AlgebraExpr {
    pub fn boxed(self) -> Box<Self> {
        Box::new(self)
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, AlgebraExpr::Zero)
            || matches!(self, AlgebraExpr::FiniteDim { sizes } if sizes.is_empty())
    }

    /// Block sizes when they do not depend on the resolution: finite-dim
    /// leaves, direct sums of such, and 0-spheres (always two points).
    pub fn resolution_free_blocks(&self) -> Option<Vec<u32>> {
        match self {
            AlgebraExpr::Zero => Some(Vec::new()),
            AlgebraExpr::FiniteDim { sizes } => Some(sizes.clone()),
            AlgebraExpr::DirectSum { left, right } => {
                let mut l = left.resolution_free_blocks()?;
                l.extend(right.resolution_free_blocks()?);
                Some(l)
            }
            AlgebraExpr::SphereTensor { n: 0, base } => {
                let inner = base.resolution_free_blocks()?;
                let mut out = inner.clone();
                out.extend(inner);
                Some(out)
            }
            _ => None,
        }
    }

    /// First and second factor of a pullback-type node.
    pub fn pullback_factors(&self) -> Result<(AlgebraExpr, AlgebraExpr), ExprError> {
        match self {
            AlgebraExpr::Pullback { alpha, beta } => Ok((alpha.domain()?, beta.domain()?)),
            AlgebraExpr::Cylinder { f } => Ok((
                f.domain()?,
                AlgebraExpr::IntervalTensor { n: 1, base: Box::new(f.codomain()?) },
            )),
            AlgebraExpr::MappingCone { f } => Ok((
                f.domain()?,
                AlgebraExpr::HalfOpenTensor { base: Box::new(f.codomain()?) },
            )),
            other => Err(ExprError::NotAPullbackNode { found: other.to_string() }),
        }
    }

    /// Constraint legs of a pullback-type node: the pair (alpha, beta) with
    /// alpha from the first factor and beta from the second, sharing a
    /// codomain. Cylinders and cones desugar to (f, evaluation at 1).
    pub fn pullback_legs(&self) -> Result<(MorphismExpr, MorphismExpr), ExprError> {
        match self {
            AlgebraExpr::Pullback { alpha, beta } => Ok((*alpha.clone(), *beta.clone())),
            AlgebraExpr::Cylinder { f } => {
                let cod = f.codomain()?;
                let paths = AlgebraExpr::IntervalTensor { n: 1, base: Box::new(cod) };
                Ok((
                    *f.clone(),
                    MorphismExpr::Evaluation { t: GridFraction::one(), on: Box::new(paths) },
                ))
            }
            AlgebraExpr::MappingCone { f } => {
                let cod = f.codomain()?;
                let paths = AlgebraExpr::HalfOpenTensor { base: Box::new(cod) };
                Ok((
                    *f.clone(),
                    MorphismExpr::Evaluation { t: GridFraction::one(), on: Box::new(paths) },
                ))
            }
            other => Err(ExprError::NotAPullbackNode { found: other.to_string() }),
        }
    }

    /// The commuting square certified by a pullback-type node, as
    /// (gamma, delta, alpha, beta): gamma and delta are the projections to
    /// the second and first factor, alpha and beta the constraint legs.
    pub fn canonical_square(
        &self,
    ) -> Result<(MorphismExpr, MorphismExpr, MorphismExpr, MorphismExpr), ExprError> {
        let (alpha, beta) = self.pullback_legs()?;
        Ok((
            MorphismExpr::ProjectionSecond { of: Box::new(self.clone()) },
            MorphismExpr::ProjectionFirst { of: Box::new(self.clone()) },
            alpha,
            beta,
        ))
    }

    /// Recursively validate shapes and bounds.
    pub fn validate(&self, limits: &Limits) -> Result<(), ExprError> {
        match self {
            AlgebraExpr::Zero => Ok(()),
            AlgebraExpr::FiniteDim { sizes } => {
                if sizes.iter().any(|&s| s == 0) {
                    Err(ExprError::ZeroBlockSize)
                } else {
                    Ok(())
                }
            }
            AlgebraExpr::IntervalTensor { n, base } | AlgebraExpr::OpenCubeTensor { n, base } => {
                if *n == 0 || *n > limits.max_cube_dim {
                    return Err(ExprError::DimensionBound { n: *n, max: limits.max_cube_dim });
                }
                base.validate(limits)
            }
            AlgebraExpr::SphereTensor { n, base } => {
                if *n > limits.max_cube_dim {
                    return Err(ExprError::DimensionBound { n: *n, max: limits.max_cube_dim });
                }
                base.validate(limits)
            }
            AlgebraExpr::HalfOpenTensor { base } => base.validate(limits),
            AlgebraExpr::DirectSum { left, right } => {
                left.validate(limits)?;
                right.validate(limits)
            }
            AlgebraExpr::Pullback { alpha, beta } => {
                alpha.validate(limits)?;
                beta.validate(limits)?;
                let ca = alpha.codomain()?;
                let cb = beta.codomain()?;
                if ca != cb {
                    return Err(ExprError::CodomainMismatch {
                        left: ca.to_string(),
                        right: cb.to_string(),
                    });
                }
                Ok(())
            }
            AlgebraExpr::Cylinder { f } | AlgebraExpr::MappingCone { f } => f.validate(limits),
        }
    }
}

impl MorphismExpr {
    pub fn boxed(self) -> Box<Self> {
        Box::new(self)
    }

    pub fn compose(after: MorphismExpr, before: MorphismExpr) -> Result<MorphismExpr, ExprError> {
        let ad = after.domain()?;
        let bc = before.codomain()?;
        if ad != bc {
            return Err(ExprError::NotComposable {
                after_domain: ad.to_string(),
                before_codomain: bc.to_string(),
            });
        }
        Ok(MorphismExpr::Compose { after: Box::new(after), before: Box::new(before) })
    }

    pub fn domain(&self) -> Result<AlgebraExpr, ExprError> {
        Ok(match self {
            MorphismExpr::Identity { on } => (**on).clone(),
            MorphismExpr::Zero { domain, .. } => (**domain).clone(),
            MorphismExpr::Compose { before, .. } => before.domain()?,
            MorphismExpr::Evaluation { on, .. } => (**on).clone(),
            MorphismExpr::BoundaryRestrict { on } => (**on).clone(),
            MorphismExpr::ProjectionFirst { of } | MorphismExpr::ProjectionSecond { of } => {
                (**of).clone()
            }
            MorphismExpr::ConstantEmbed { target } => match &**target {
                AlgebraExpr::IntervalTensor { base, .. }
                | AlgebraExpr::SphereTensor { base, .. } => (**base).clone(),
                other => {
                    return Err(ExprError::ConstantEmbedTarget { found: other.to_string() })
                }
            },
            MorphismExpr::SuspendedMorphism { f } => {
                AlgebraExpr::OpenCubeTensor { n: 1, base: Box::new(f.domain()?) }
            }
            MorphismExpr::BlockMap { domain, .. } => (**domain).clone(),
            MorphismExpr::WindingEmbed { domain, .. } => (**domain).clone(),
            MorphismExpr::Rotation { on, .. } => (**on).clone(),
            MorphismExpr::IntoPullback { left, .. } => left.domain()?,
            MorphismExpr::DirectPair { left, .. } => left.domain()?,
            MorphismExpr::ZeroExtend { from, .. } => (**from).clone(),
            MorphismExpr::UserNamed { domain, .. } => (**domain).clone(),
        })
    }

    pub fn codomain(&self) -> Result<AlgebraExpr, ExprError> {
        Ok(match self {
            MorphismExpr::Identity { on } => (**on).clone(),
            MorphismExpr::Zero { codomain, .. } => (**codomain).clone(),
            MorphismExpr::Compose { after, .. } => after.codomain()?,
            MorphismExpr::Evaluation { on, .. } => match &**on {
                AlgebraExpr::IntervalTensor { n: 1, base } => (**base).clone(),
                AlgebraExpr::HalfOpenTensor { base } => (**base).clone(),
                other => return Err(ExprError::EvaluationTarget { found: other.to_string() }),
            },
            MorphismExpr::BoundaryRestrict { on } => match &**on {
                AlgebraExpr::IntervalTensor { n, base } => {
                    AlgebraExpr::SphereTensor { n: n - 1, base: base.clone() }
                }
                other => return Err(ExprError::BoundaryTarget { found: other.to_string() }),
            },
            MorphismExpr::ProjectionFirst { of } => of.pullback_factors()?.0,
            MorphismExpr::ProjectionSecond { of } => of.pullback_factors()?.1,
            MorphismExpr::ConstantEmbed { target } => (**target).clone(),
            MorphismExpr::SuspendedMorphism { f } => {
                AlgebraExpr::OpenCubeTensor { n: 1, base: Box::new(f.codomain()?) }
            }
            MorphismExpr::BlockMap { codomain, .. } => (**codomain).clone(),
            MorphismExpr::WindingEmbed { target, .. } => (**target).clone(),
            MorphismExpr::Rotation { on, .. } => (**on).clone(),
            MorphismExpr::IntoPullback { target, .. } => (**target).clone(),
            MorphismExpr::DirectPair { left, right } => AlgebraExpr::DirectSum {
                left: Box::new(left.codomain()?),
                right: Box::new(right.codomain()?),
            },
            MorphismExpr::ZeroExtend { to, .. } => (**to).clone(),
            MorphismExpr::UserNamed { codomain, .. } => (**codomain).clone(),
        })
    }

    /// Recursively validate the morphism: composability, evaluation targets,
    /// multiplicity shapes, winding hermiticity, leg compatibility.
    pub fn validate(&self, limits: &Limits) -> Result<(), ExprError> {
        match self {
            MorphismExpr::Identity { on } => on.validate(limits),
            MorphismExpr::Zero { domain, codomain } => {
                domain.validate(limits)?;
                codomain.validate(limits)
            }
            MorphismExpr::Compose { after, before } => {
                after.validate(limits)?;
                before.validate(limits)?;
                let ad = after.domain()?;
                let bc = before.codomain()?;
                if ad != bc {
                    return Err(ExprError::NotComposable {
                        after_domain: ad.to_string(),
                        before_codomain: bc.to_string(),
                    });
                }
                Ok(())
            }
            MorphismExpr::Evaluation { t, on } => {
                on.validate(limits)?;
                match &**on {
                    AlgebraExpr::IntervalTensor { n: 1, .. } => Ok(()),
                    AlgebraExpr::HalfOpenTensor { .. } => {
                        if t.num == 0 {
                            Err(ExprError::EvaluationPoint { t: *t, found: on.to_string() })
                        } else {
                            Ok(())
                        }
                    }
                    other => Err(ExprError::EvaluationTarget { found: other.to_string() }),
                }
            }
            MorphismExpr::BoundaryRestrict { on } => {
                on.validate(limits)?;
                match &**on {
                    AlgebraExpr::IntervalTensor { .. } => Ok(()),
                    other => Err(ExprError::BoundaryTarget { found: other.to_string() }),
                }
            }
            MorphismExpr::ProjectionFirst { of } | MorphismExpr::ProjectionSecond { of } => {
                of.validate(limits)?;
                of.pullback_factors().map(|_| ())
            }
            MorphismExpr::ConstantEmbed { target } => {
                target.validate(limits)?;
                match &**target {
                    AlgebraExpr::IntervalTensor { .. } | AlgebraExpr::SphereTensor { .. } => Ok(()),
                    other => Err(ExprError::ConstantEmbedTarget { found: other.to_string() }),
                }
            }
            MorphismExpr::SuspendedMorphism { f } => f.validate(limits),
            MorphismExpr::BlockMap { domain, codomain, data } => {
                domain.validate(limits)?;
                codomain.validate(limits)?;
                let src = domain.resolution_free_blocks().ok_or_else(|| {
                    ExprError::NotResolutionIndependent { expr: domain.to_string() }
                })?;
                let dst = codomain.resolution_free_blocks().ok_or_else(|| {
                    ExprError::NotResolutionIndependent { expr: codomain.to_string() }
                })?;
                validate_multiplicities(data, &src, &dst, "block map")
            }
            MorphismExpr::WindingEmbed { domain, target, data, k, winds: _ } => {
                domain.validate(limits)?;
                target.validate(limits)?;
                let src = domain.resolution_free_blocks().ok_or_else(|| {
                    ExprError::NotResolutionIndependent { expr: domain.to_string() }
                })?;
                let base = match &**target {
                    AlgebraExpr::SphereTensor { n: 1, base } => base,
                    AlgebraExpr::IntervalTensor { n: 1, base } => base,
                    other => return Err(ExprError::WindingTarget { found: other.to_string() }),
                };
                let dst = base.resolution_free_blocks().ok_or_else(|| {
                    ExprError::NotResolutionIndependent { expr: base.to_string() }
                })?;
                if dst.len() != 1 {
                    return Err(ExprError::WindingTarget { found: target.to_string() });
                }
                if !k.is_square() || k.size() != dst[0] as usize {
                    return Err(ExprError::WindingSize { k: k.size(), block: dst[0] });
                }
                let res = k.hermitian_residual();
                if res > 1e-12 {
                    return Err(ExprError::WindingNotHermitian { residual: res });
                }
                validate_multiplicities(data, &src, &dst, "winding embed")
            }
            MorphismExpr::Rotation { on, shift: _ } => {
                on.validate(limits)?;
                match &**on {
                    AlgebraExpr::Pullback { alpha, .. } => match &**alpha {
                        MorphismExpr::BoundaryRestrict { on: cube } => match &**cube {
                            AlgebraExpr::IntervalTensor { n: 1, .. } => Ok(()),
                            other => {
                                Err(ExprError::RotationTarget { found: other.to_string() })
                            }
                        },
                        other => Err(ExprError::RotationTarget { found: other.to_string() }),
                    },
                    other => Err(ExprError::RotationTarget { found: other.to_string() }),
                }
            }
            MorphismExpr::IntoPullback { target, left, right } => {
                target.validate(limits)?;
                left.validate(limits)?;
                right.validate(limits)?;
                let ld = left.domain()?;
                let rd = right.domain()?;
                if ld != rd {
                    return Err(ExprError::PairDomainMismatch {
                        left: ld.to_string(),
                        right: rd.to_string(),
                    });
                }
                let (first, second) = target.pullback_factors()?;
                let lc = left.codomain()?;
                if lc != first {
                    return Err(ExprError::PairLegMismatch {
                        which: "left",
                        found: lc.to_string(),
                        expected: first.to_string(),
                    });
                }
                let rc = right.codomain()?;
                if rc != second {
                    return Err(ExprError::PairLegMismatch {
                        which: "right",
                        found: rc.to_string(),
                        expected: second.to_string(),
                    });
                }
                Ok(())
            }
            MorphismExpr::DirectPair { left, right } => {
                left.validate(limits)?;
                right.validate(limits)?;
                let ld = left.domain()?;
                let rd = right.domain()?;
                if ld != rd {
                    return Err(ExprError::PairDomainMismatch {
                        left: ld.to_string(),
                        right: rd.to_string(),
                    });
                }
                Ok(())
            }
            MorphismExpr::ZeroExtend { from, to } => {
                from.validate(limits)?;
                to.validate(limits)?;
                if zero_extend_shape(from, to).is_none() {
                    return Err(ExprError::ZeroExtendPair {
                        from: from.to_string(),
                        to: to.to_string(),
                    });
                }
                Ok(())
            }
            MorphismExpr::UserNamed { .. } => Ok(()),
        }
    }
}

/// Which grid inclusion a zero-extension uses. `Some` iff the pair is legal.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ZeroExtendShape {
    OpenIntoClosed(u32),
    OpenIntoHalfOpen,
    HalfOpenIntoClosed,
}

pub fn zero_extend_shape(from: &AlgebraExpr, to: &AlgebraExpr) -> Option<ZeroExtendShape> {
    match (from, to) {
        (
            AlgebraExpr::OpenCubeTensor { n: nf, base: bf },
            AlgebraExpr::IntervalTensor { n: nt, base: bt },
        ) if nf == nt && bf == bt => Some(ZeroExtendShape::OpenIntoClosed(*nf)),
        (
            AlgebraExpr::OpenCubeTensor { n: 1, base: bf },
            AlgebraExpr::HalfOpenTensor { base: bt },
        ) if bf == bt => Some(ZeroExtendShape::OpenIntoHalfOpen),
        (
            AlgebraExpr::HalfOpenTensor { base: bf },
            AlgebraExpr::IntervalTensor { n: 1, base: bt },
        ) if bf == bt => Some(ZeroExtendShape::HalfOpenIntoClosed),
        _ => None,
    }
}

fn validate_multiplicities(
    data: &BlockMapData,
    src: &[u32],
    dst: &[u32],
    context: &str,
) -> Result<(), ExprError> {
    if data.multiplicities.len() != dst.len()
        || data.multiplicities.iter().any(|row| row.len() != src.len())
    {
        return Err(ExprError::BadMultiplicityShape {
            rows: data.multiplicities.len(),
            cols: data.multiplicities.first().map_or(0, |r| r.len()),
            expected_rows: dst.len(),
            expected_cols: src.len(),
        });
    }
    for (j, row) in data.multiplicities.iter().enumerate() {
        let used: u32 = row.iter().zip(src).map(|(m, n)| m * n).sum();
        if used > dst[j] {
            return Err(ExprError::MultiplicityOverflow {
                needed: used,
                have: dst[j],
                context: format!("{context}, target block {j}"),
            });
        }
        if data.unital && used != dst[j] {
            return Err(ExprError::UnitalSizeMismatch { block: j, used, have: dst[j] });
        }
    }
    Ok(())
}

impl fmt::Display for AlgebraExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AlgebraExpr::Zero => write!(f, "zero"),
            AlgebraExpr::FiniteDim { sizes } => {
                let parts: Vec<String> = sizes.iter().map(|s| format!("M{s}")).collect();
                write!(f, "{}", parts.join(" + "))
            }
            AlgebraExpr::IntervalTensor { n, base } => write!(f, "interval({n}, {base})"),
            AlgebraExpr::OpenCubeTensor { n, base } => write!(f, "opencube({n}, {base})"),
            AlgebraExpr::SphereTensor { n, base } => write!(f, "sphere({n}, {base})"),
            AlgebraExpr::HalfOpenTensor { base } => write!(f, "cone({base})"),
            AlgebraExpr::DirectSum { left, right } => write!(f, "oplus({left}, {right})"),
            AlgebraExpr::Pullback { alpha, beta } => write!(f, "pullback({alpha}, {beta})"),
            AlgebraExpr::Cylinder { f: m } => write!(f, "cyl({m})"),
            AlgebraExpr::MappingCone { f: m } => write!(f, "mcone({m})"),
        }
    }
}

fn fmt_mult(rows: &[Vec<u32>]) -> String {
    let inner: Vec<String> = rows
        .iter()
        .map(|row| {
            let cells: Vec<String> = row.iter().map(|m| m.to_string()).collect();
            format!("[{}]", cells.join(", "))
        })
        .collect();
    format!("[{}]", inner.join(", "))
}

fn fmt_complex(re: f64, im: f64) -> String {
    if im == 0.0 {
        format!("{re}")
    } else if re == 0.0 {
        format!("{im}i")
    } else if im < 0.0 {
        format!("{re}-{}i", -im)
    } else {
        format!("{re}+{im}i")
    }
}

impl fmt::Display for MorphismExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MorphismExpr::Identity { on } => write!(f, "id({on})"),
            MorphismExpr::Zero { domain, codomain } => write!(f, "zero({domain}, {codomain})"),
            MorphismExpr::Compose { after, before } => write!(f, "({after} * {before})"),
            MorphismExpr::Evaluation { t, on } => write!(f, "ev({t}, {on})"),
            MorphismExpr::BoundaryRestrict { on } => write!(f, "bdry({on})"),
            MorphismExpr::ProjectionFirst { of } => write!(f, "pr1({of})"),
            MorphismExpr::ProjectionSecond { of } => write!(f, "pr2({of})"),
            MorphismExpr::ConstantEmbed { target } => write!(f, "const({target})"),
            MorphismExpr::SuspendedMorphism { f: m } => write!(f, "susp({m})"),
            MorphismExpr::BlockMap { domain, codomain, data } => {
                write!(f, "blockmap({domain}, {codomain}, {}", fmt_mult(&data.multiplicities))?;
                if data.unital {
                    write!(f, ", unital")?;
                }
                write!(f, ")")
            }
            MorphismExpr::WindingEmbed { domain, target, data, k, winds } => {
                let krows: Vec<String> = k
                    .rows
                    .iter()
                    .map(|row| {
                        let cells: Vec<String> =
                            row.iter().map(|(re, im)| fmt_complex(*re, *im)).collect();
                        format!("[{}]", cells.join(", "))
                    })
                    .collect();
                write!(
                    f,
                    "windmap({domain}, {target}, {}, [{}], {winds}",
                    fmt_mult(&data.multiplicities),
                    krows.join(", ")
                )?;
                if data.unital {
                    write!(f, ", unital")?;
                }
                write!(f, ")")
            }
            MorphismExpr::Rotation { on, shift } => write!(f, "rotate({on}, {shift})"),
            MorphismExpr::IntoPullback { target, left, right } => {
                write!(f, "pair({target}, {left}, {right})")
            }
            MorphismExpr::DirectPair { left, right } => write!(f, "dpair({left}, {right})"),
            MorphismExpr::ZeroExtend { from, to } => write!(f, "zeroext({from}, {to})"),
            MorphismExpr::UserNamed { name, .. } => write!(f, "{name}"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m2() -> AlgebraExpr {
        finite_dim(&[2]).unwrap()
    }

    #[test]
    fn suspension_is_the_open_unit_cube_tensor() {
        let limits = Limits::default();
        let s = apply_functor(TensorFunctor::Suspension, m2(), &limits).unwrap();
        let o = apply_functor(TensorFunctor::OpenCube(1), m2(), &limits).unwrap();
        assert_eq!(s, o);
    }

    #[test]
    fn dimension_bound_is_enforced_with_the_offending_n() {
        let limits = Limits::default();
        let err = apply_functor(TensorFunctor::Interval(3), m2(), &limits).unwrap_err();
        assert_eq!(err, ExprError::DimensionBound { n: 3, max: 2 });
    }

    #[test]
    fn pullback_rejects_mismatched_codomains() {
        let f = MorphismExpr::Identity { on: m2().boxed() };
        let g = MorphismExpr::Identity { on: finite_dim(&[3]).unwrap().boxed() };
        let err = pullback_expr(f, g).unwrap_err();
        assert!(matches!(err, ExprError::CodomainMismatch { .. }));
    }

    #[test]
    fn cylinder_projections_have_expected_types() {
        let f = MorphismExpr::Identity { on: m2().boxed() };
        let cyl = mapping_construction(MappingKind::Cylinder, f).unwrap();
        let pr1 = MorphismExpr::ProjectionFirst { of: cyl.clone().boxed() };
        let pr2 = MorphismExpr::ProjectionSecond { of: cyl.boxed() };
        assert_eq!(pr1.codomain().unwrap(), m2());
        assert_eq!(
            pr2.codomain().unwrap(),
            AlgebraExpr::IntervalTensor { n: 1, base: m2().boxed() }
        );
    }

    #[test]
    fn serde_round_trip_is_structural_identity() {
        let f = MorphismExpr::BlockMap {
            domain: finite_dim(&[1]).unwrap().boxed(),
            codomain: m2().boxed(),
            data: BlockMapData { multiplicities: vec![vec![2]], unital: true },
        };
        let cone = mapping_construction(MappingKind::Cone, f).unwrap();
        let json = serde_json::to_string(&cone).unwrap();
        let back: AlgebraExpr = serde_json::from_str(&json).unwrap();
        assert_eq!(cone, back);
    }

    #[test]
    fn unital_block_map_must_fill_target_blocks() {
        let data = BlockMapData { multiplicities: vec![vec![1]], unital: true };
        let bm = MorphismExpr::BlockMap {
            domain: finite_dim(&[1]).unwrap().boxed(),
            codomain: m2().boxed(),
            data,
        };
        let err = bm.validate(&Limits::default()).unwrap_err();
        assert!(matches!(err, ExprError::UnitalSizeMismatch { .. }));
    }
}
