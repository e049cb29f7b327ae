//! Executes a parsed script in statement order. Declarations extend the
//! environment; commands produce check reports, one per configured
//! resolution where that makes sense. Runtime problems never abort the run:
//! they become failing reports that carry the error text, so a script always
//! yields a complete report list and a meaningful exit status.

use std::collections::{HashMap, HashSet};

use serde_json::json;
use thiserror::Error;

use nccw_core::approx::{cellular_approximate, ApproxError};
use nccw_core::check::{
    check_ndr_pair, check_pullback_universal, check_pushout_universal, check_star_hom,
    CheckConfig, CheckError, CheckReport, PushoutSquare, Status,
};
use nccw_core::complex::{validate_complex, ComplexError, NccwComplex};
use nccw_core::corpus::{self, CorpusError};
use nccw_core::discretize::{
    discretize_algebra, discretize_morphism, linear_dim, DiscretizeError, Tolerances,
};
use nccw_core::expr::{
    apply_functor, finite_dim, mapping_construction, pullback_expr, AlgebraExpr, BlockMapData,
    ExprError, GridFraction, Limits, MappingKind, MatrixLit, MorphismExpr, TensorFunctor,
};
use nccw_core::puppe::{
    check_cone_split, check_cyl_retraction, check_puppe_chain, PuppeChain, PuppeError,
};

use crate::dsl::ast::*;

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub resolutions: Vec<u32>,
    pub seed: u64,
    /// Overrides the residual tolerance when set.
    pub tol: Option<f64>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig { resolutions: vec![2, 4], seed: 0, tol: None }
    }
}

#[derive(Debug, Default)]
pub struct RunOutcome {
    pub reports: Vec<CheckReport>,
    /// Chains produced by `puppe` statements, labeled by statement id.
    pub chains: Vec<(String, PuppeChain)>,
    /// Complexes that are not the base of a later stage, in declaration order.
    pub complexes: Vec<NccwComplex>,
    pub emit_json: bool,
    pub emit_dot: bool,
}

impl RunOutcome {
    pub fn any_failed(&self) -> bool {
        self.reports.iter().any(|r| r.status == Status::Fail)
    }
}

#[derive(Debug, Error)]
enum RunError {
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error(transparent)]
    Complex(#[from] ComplexError),
    #[error(transparent)]
    Discretize(#[from] DiscretizeError),
    #[error(transparent)]
    Check(#[from] CheckError),
    #[error(transparent)]
    Puppe(#[from] PuppeError),
    #[error(transparent)]
    Approx(#[from] ApproxError),
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error("{0}")]
    Other(String),
}

pub fn run(script: &Script, cfg: &RunConfig) -> RunOutcome {
    let mut tols = Tolerances::default();
    if let Some(t) = cfg.tol {
        tols.residual = t;
    }
    let check_cfg = CheckConfig { master_seed: cfg.seed, tols, trials: 20 };
    let mut exec = Exec {
        cfg: check_cfg,
        resolutions: if cfg.resolutions.is_empty() { vec![2, 4] } else { cfg.resolutions.clone() },
        limits: Limits::default(),
        algebras: HashMap::new(),
        morphisms: HashMap::new(),
        complexes: HashMap::new(),
        complex_order: Vec::new(),
        bases: HashSet::new(),
        out: RunOutcome::default(),
    };

    for (idx, stmt) in script.stmts.iter().enumerate() {
        let prefix = format!("s{:02}", idx + 1);
        if let Err(err) = exec.stmt(&prefix, stmt) {
            exec.out.reports.push(error_report(
                &format!("{prefix}.error"),
                err,
                stmt,
                exec.cfg.master_seed,
            ));
        }
    }

    for name in &exec.complex_order {
        if !exec.bases.contains(name) {
            if let Some(cx) = exec.complexes.get(name) {
                exec.out.complexes.push(cx.clone());
            }
        }
    }
    exec.out
}

fn error_report(id: &str, err: RunError, stmt: &Stmt, seed: u64) -> CheckReport {
    CheckReport {
        id: id.to_string(),
        kind: "runtime_error".to_string(),
        status: Status::Fail,
        max_residual: 0.0,
        tolerance: 0.0,
        seed,
        witness: Some(json!({
            "error": err.to_string(),
            "line": stmt.line,
            "col": stmt.col,
        })),
        notes: vec!["statement could not be executed".to_string()],
    }
}

struct Exec {
    cfg: CheckConfig,
    resolutions: Vec<u32>,
    limits: Limits,
    algebras: HashMap<String, AlgebraExpr>,
    morphisms: HashMap<String, MorphismExpr>,
    complexes: HashMap<String, NccwComplex>,
    complex_order: Vec<String>,
    bases: HashSet<String>,
    out: RunOutcome,
}

impl Exec {
    fn stmt(&mut self, prefix: &str, stmt: &Stmt) -> Result<(), RunError> {
        match &stmt.kind {
            StmtKind::Algebra { name, expr } => {
                let e = self.alg(expr)?;
                e.validate(&self.limits)?;
                self.algebras.insert(name.clone(), e);
                Ok(())
            }
            StmtKind::Cell { name, expr } => {
                let e = self.alg(expr)?;
                if !matches!(e, AlgebraExpr::FiniteDim { .. } | AlgebraExpr::Zero) {
                    return Err(RunError::Other(format!(
                        "cell `{name}` must be a finite direct sum of matrix blocks, got {e}"
                    )));
                }
                self.algebras.insert(name.clone(), e);
                Ok(())
            }
            StmtKind::Morphism { name, dom, cod, body, .. } => {
                let dom = self.alg(dom)?;
                let cod = self.alg(cod)?;
                let f = self.mor(body)?;
                let found_dom = f.domain()?;
                let found_cod = f.codomain()?;
                if found_dom != dom {
                    return Err(RunError::Other(format!(
                        "morphism `{name}`: declared domain {dom} but the body starts at {found_dom}"
                    )));
                }
                if found_cod != cod {
                    return Err(RunError::Other(format!(
                        "morphism `{name}`: declared codomain {cod} but the body ends at {found_cod}"
                    )));
                }
                f.validate(&self.limits)?;
                self.morphisms.insert(name.clone(), f);
                Ok(())
            }
            StmtKind::Stage { name, base, cell_name, cell, dim, via } => {
                let cells = self.alg(cell)?;
                let via = via.as_ref().map(|f| self.mor(f)).transpose()?;
                let mut cx = match self.complexes.get(base) {
                    Some(cx) => cx.clone(),
                    None => {
                        let alg = self.algebras.get(base).cloned().ok_or_else(|| {
                            RunError::Other(format!("base `{base}` failed to build earlier"))
                        })?;
                        NccwComplex::point(base.clone(), alg)?
                    }
                };
                let expected = cx.dim() + 1;
                if *dim != expected {
                    return Err(RunError::Other(format!(
                        "stage `{name}` declares dim = {dim}, but the base has dimension {}",
                        expected - 1
                    )));
                }
                cx.attach(cells.clone(), via, &self.limits)?;
                cx.name = name.clone();
                self.algebras.insert(name.clone(), cx.skeleton().clone());
                self.algebras.insert(cell_name.clone(), cells);
                self.bases.insert(base.clone());
                self.complexes.insert(name.clone(), cx);
                self.complex_order.push(name.clone());
                Ok(())
            }
            StmtKind::Check(cmd) => self.check(prefix, cmd),
            StmtKind::Puppe { phi, len } => {
                let phi = self.mor(phi)?;
                let mut stored = false;
                for &n in &self.resolutions.clone() {
                    match check_puppe_chain(&format!("{prefix}.puppe"), &phi, *len as usize, n, &self.cfg)
                    {
                        Ok((chain, reports)) => {
                            self.out.reports.extend(reports);
                            if !stored {
                                self.out.chains.push((format!("{prefix}.puppe"), chain));
                                stored = true;
                            }
                        }
                        Err(err) => self.push_error(&format!("{prefix}.puppe.N{n}"), err.into()),
                    }
                }
                Ok(())
            }
            StmtKind::Approx { phi, complex } => {
                let phi = self.mor(phi)?;
                let cx = self
                    .complexes
                    .get(complex)
                    .cloned()
                    .ok_or_else(|| RunError::Other(format!("complex `{complex}` failed to build earlier")))?;
                for &n in &self.resolutions.clone() {
                    let id = format!("{prefix}.approx.N{n}");
                    match cellular_approximate(&id, &phi, &cx, &cx, n, &self.cfg) {
                        Ok(sm) => self.out.reports.extend(sm.reports),
                        Err(err) => self.push_error(&id, err.into()),
                    }
                }
                Ok(())
            }
            StmtKind::Discretize(a) => {
                let e = self.alg(a)?;
                for &n in &self.resolutions.clone() {
                    let id = format!("{prefix}.dims.N{n}");
                    match self.dims_report(&id, &e, n) {
                        Ok(report) => self.out.reports.push(report),
                        Err(err) => self.push_error(&id, err),
                    }
                }
                Ok(())
            }
            StmtKind::Emit(EmitKind::Json) => {
                self.out.emit_json = true;
                Ok(())
            }
            StmtKind::Emit(EmitKind::Dot) => {
                self.out.emit_dot = true;
                Ok(())
            }
        }
    }

    fn push_error(&mut self, id: &str, err: RunError) {
        self.out.reports.push(CheckReport {
            id: id.to_string(),
            kind: "runtime_error".to_string(),
            status: Status::Fail,
            max_residual: 0.0,
            tolerance: 0.0,
            seed: self.cfg.master_seed,
            witness: Some(json!({ "error": err.to_string() })),
            notes: vec!["command could not be executed".to_string()],
        });
    }

    fn dims_report(&self, id: &str, e: &AlgebraExpr, n: u32) -> Result<CheckReport, RunError> {
        let (alg, warnings) = discretize_algebra(e, n, &self.cfg.tols)?;
        let dim = linear_dim(e, n)?;
        let mut report = CheckReport {
            id: id.to_string(),
            kind: "discretization".to_string(),
            status: Status::Pass,
            max_residual: 0.0,
            tolerance: 0.0,
            seed: self.cfg.master_seed,
            witness: Some(json!({
                "ambient_dim": alg.ambient_dim(),
                "linear_dim": dim,
                "label": alg.label,
            })),
            notes: vec![format!("{e}")],
        };
        for w in &warnings.messages {
            report = report.note(w.clone());
        }
        Ok(report)
    }

    fn check(&mut self, prefix: &str, cmd: &CheckCmd) -> Result<(), RunError> {
        match cmd {
            CheckCmd::Star(f) => {
                let f = self.mor(f)?;
                for &n in &self.resolutions.clone() {
                    let id = format!("{prefix}.star.N{n}");
                    match discretize_morphism(&f, n, &self.cfg.tols) {
                        Ok((fc, _)) => {
                            self.out.reports.push(check_star_hom(&id, &fc, &self.cfg))
                        }
                        Err(err) => self.push_error(&id, err.into()),
                    }
                }
                Ok(())
            }
            CheckCmd::Square { node, legs } => {
                let x = self.alg(node)?;
                let (delta, gamma, alpha, beta) = match legs {
                    Some(legs) => (
                        self.mor(&legs[0])?,
                        self.mor(&legs[1])?,
                        self.mor(&legs[2])?,
                        self.mor(&legs[3])?,
                    ),
                    None => {
                        let (gamma, delta, alpha, beta) = x.canonical_square()?;
                        (delta, gamma, alpha, beta)
                    }
                };
                for &n in &self.resolutions.clone() {
                    let id = format!("{prefix}.square.N{n}");
                    match corpus::concrete_square(&x, &delta, &gamma, &alpha, &beta, n, &self.cfg.tols)
                    {
                        Ok(sq) => self
                            .out
                            .reports
                            .push(check_pullback_universal(&id, &sq, &[], &self.cfg)),
                        Err(err) => self.push_error(&id, err.into()),
                    }
                }
                Ok(())
            }
            CheckCmd::Pushout { x, legs } => {
                let x = self.alg(x)?;
                let delta = self.mor(&legs[0])?;
                let gamma = self.mor(&legs[1])?;
                let f = self.mor(&legs[2])?;
                let g = self.mor(&legs[3])?;
                for &n in &self.resolutions.clone() {
                    let id = format!("{prefix}.pushout.N{n}");
                    match self.pushout_square(&x, &delta, &gamma, &f, &g, n) {
                        Ok(sq) => {
                            self.out.reports.push(check_pushout_universal(&id, &sq, &self.cfg))
                        }
                        Err(err) => self.push_error(&id, err),
                    }
                }
                Ok(())
            }
            CheckCmd::Complex(name) => {
                let cx = self
                    .complexes
                    .get(name)
                    .cloned()
                    .ok_or_else(|| RunError::Other(format!("complex `{name}` failed to build earlier")))?;
                let reports = validate_complex(&cx, &self.resolutions, &self.cfg)?;
                self.out.reports.extend(reports);
                Ok(())
            }
            CheckCmd::Retract(f) => {
                let f = self.mor(f)?;
                let reports =
                    check_cyl_retraction(&format!("{prefix}.retract"), &f, &self.resolutions, &self.cfg)?;
                self.out.reports.extend(reports);
                Ok(())
            }
            CheckCmd::Split { sizes, ideal } => {
                let reports = check_cone_split(
                    &format!("{prefix}.split"),
                    sizes,
                    ideal,
                    &self.resolutions,
                    &self.cfg,
                )?;
                self.out.reports.extend(reports);
                Ok(())
            }
            CheckCmd::Ndr(which) => {
                for &n in &self.resolutions.clone() {
                    let id = format!("{prefix}.ndr_{which}.N{n}");
                    let pair = match which.as_str() {
                        "twopoint" => corpus::two_point_pair(n),
                        "collar" => corpus::circle_collar_pair(n),
                        "broken" => corpus::broken_collar_pair(n),
                        other => {
                            return Err(RunError::Other(format!("unknown fixture `{other}`")))
                        }
                    };
                    match pair {
                        Ok(pair) => match check_ndr_pair(&id, &pair, &self.cfg) {
                            Ok(report) => self.out.reports.push(report),
                            Err(err) => self.push_error(&id, err.into()),
                        },
                        Err(err) => self.push_error(&id, err.into()),
                    }
                }
                Ok(())
            }
        }
    }

    fn pushout_square(
        &self,
        x: &AlgebraExpr,
        delta: &MorphismExpr,
        gamma: &MorphismExpr,
        f: &MorphismExpr,
        g: &MorphismExpr,
        n: u32,
    ) -> Result<PushoutSquare, RunError> {
        Ok(PushoutSquare {
            x: discretize_algebra(x, n, &self.cfg.tols)?.0,
            delta: discretize_morphism(delta, n, &self.cfg.tols)?.0,
            gamma: discretize_morphism(gamma, n, &self.cfg.tols)?.0,
            f: discretize_morphism(f, n, &self.cfg.tols)?.0,
            g: discretize_morphism(g, n, &self.cfg.tols)?.0,
        })
    }

    fn alg(&self, node: &AlgNode) -> Result<AlgebraExpr, RunError> {
        Ok(match node {
            AlgNode::Ref(name) => self
                .algebras
                .get(name)
                .cloned()
                .ok_or_else(|| RunError::Other(format!("algebra `{name}` failed to build earlier")))?,
            AlgNode::Finite(sizes) => finite_dim(sizes)?,
            AlgNode::Zero => AlgebraExpr::Zero,
            AlgNode::Sum(a, b) => AlgebraExpr::DirectSum {
                left: Box::new(self.alg(a)?),
                right: Box::new(self.alg(b)?),
            },
            AlgNode::Interval(n, a) => {
                apply_functor(TensorFunctor::Interval(*n), self.alg(a)?, &self.limits)?
            }
            AlgNode::Open(n, a) => {
                apply_functor(TensorFunctor::OpenCube(*n), self.alg(a)?, &self.limits)?
            }
            AlgNode::Sphere(n, a) => {
                apply_functor(TensorFunctor::Sphere(*n), self.alg(a)?, &self.limits)?
            }
            AlgNode::HalfOpen(a) => {
                apply_functor(TensorFunctor::Cone, self.alg(a)?, &self.limits)?
            }
            AlgNode::Susp(a) => {
                apply_functor(TensorFunctor::Suspension, self.alg(a)?, &self.limits)?
            }
            AlgNode::Cyl(f) => mapping_construction(MappingKind::Cylinder, self.mor(f)?)?,
            AlgNode::Cone(f) => mapping_construction(MappingKind::Cone, self.mor(f)?)?,
            AlgNode::Pullback(a, b) => pullback_expr(self.mor(a)?, self.mor(b)?)?,
        })
    }

    fn frac(&self, f: &Frac) -> Result<GridFraction, RunError> {
        Ok(GridFraction::new(f.num, f.den)?)
    }

    fn mor(&self, node: &MorNode) -> Result<MorphismExpr, RunError> {
        Ok(match node {
            MorNode::Ref(name) => self
                .morphisms
                .get(name)
                .cloned()
                .ok_or_else(|| RunError::Other(format!("morphism `{name}` failed to build earlier")))?,
            MorNode::Compose(after, before) => {
                MorphismExpr::compose(self.mor(after)?, self.mor(before)?)?
            }
            MorNode::Id(a) => MorphismExpr::Identity { on: Box::new(self.alg(a)?) },
            MorNode::Zero(a, b) => MorphismExpr::Zero {
                domain: Box::new(self.alg(a)?),
                codomain: Box::new(self.alg(b)?),
            },
            MorNode::Ev(t, a) => MorphismExpr::Evaluation {
                t: self.frac(t)?,
                on: Box::new(self.alg(a)?),
            },
            MorNode::Embed(a) => MorphismExpr::ConstantEmbed { target: Box::new(self.alg(a)?) },
            MorNode::Restrict(a) => {
                MorphismExpr::BoundaryRestrict { on: Box::new(self.alg(a)?) }
            }
            MorNode::P1(a) => MorphismExpr::ProjectionFirst { of: Box::new(self.alg(a)?) },
            MorNode::P2(a) => MorphismExpr::ProjectionSecond { of: Box::new(self.alg(a)?) },
            MorNode::Blocks { dom, cod, mult, unital } => MorphismExpr::BlockMap {
                domain: Box::new(self.alg(dom)?),
                codomain: Box::new(self.alg(cod)?),
                data: BlockMapData { multiplicities: mult.clone(), unital: *unital },
            },
            MorNode::Susp(f) => MorphismExpr::SuspendedMorphism { f: Box::new(self.mor(f)?) },
            MorNode::Pair(f, g) => MorphismExpr::DirectPair {
                left: Box::new(self.mor(f)?),
                right: Box::new(self.mor(g)?),
            },
            MorNode::Into { target, left, right } => MorphismExpr::IntoPullback {
                target: Box::new(self.alg(target)?),
                left: Box::new(self.mor(left)?),
                right: Box::new(self.mor(right)?),
            },
            MorNode::Extend(a, b) => MorphismExpr::ZeroExtend {
                from: Box::new(self.alg(a)?),
                to: Box::new(self.alg(b)?),
            },
            MorNode::Rotate(a, t) => MorphismExpr::Rotation {
                on: Box::new(self.alg(a)?),
                shift: self.frac(t)?,
            },
            MorNode::Wind { dom, cod, mult, unital, k, m } => MorphismExpr::WindingEmbed {
                domain: Box::new(self.alg(dom)?),
                target: Box::new(self.alg(cod)?),
                data: BlockMapData { multiplicities: mult.clone(), unital: *unital },
                k: MatrixLit { rows: k.clone() },
                winds: *m,
            },
        })
    }
}
