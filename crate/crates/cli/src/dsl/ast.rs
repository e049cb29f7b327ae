//! Surface syntax tree for `.nccw` scripts. Nodes keep names unresolved so
//! that printing reproduces the source shape; the runner resolves them in
//! declaration order.

#[derive(Debug, Clone, PartialEq)]
pub struct Script {
    pub stmts: Vec<Stmt>,
}

#[derive(Debug, Clone)]
pub struct Stmt {
    pub line: usize,
    pub col: usize,
    pub kind: StmtKind,
}

/// Source positions are diagnostics, not content: two statements are equal
/// when they say the same thing, wherever they sit in the file.
impl PartialEq for Stmt {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum StmtKind {
    Algebra { name: String, expr: AlgNode },
    /// Finite-dimensional cell algebra; same namespace as `Algebra`.
    Cell { name: String, expr: AlgNode },
    Morphism { as_map: bool, name: String, dom: AlgNode, cod: AlgNode, body: MorNode },
    Stage {
        name: String,
        base: String,
        cell_name: String,
        cell: AlgNode,
        dim: u32,
        via: Option<MorNode>,
    },
    Check(CheckCmd),
    Puppe { phi: MorNode, len: u64 },
    Approx { phi: MorNode, complex: String },
    Discretize(AlgNode),
    Emit(EmitKind),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EmitKind {
    Json,
    Dot,
}

#[derive(Debug, Clone, PartialEq)]
pub enum CheckCmd {
    Star(MorNode),
    /// Canonical square of a cylinder, cone, or pullback node; explicit legs
    /// override the canonical ones (delta, gamma, alpha, beta).
    Square { node: AlgNode, legs: Option<Box<[MorNode; 4]>> },
    /// Pushout candidate: x with legs (delta, gamma, f, g).
    Pushout { x: AlgNode, legs: Box<[MorNode; 4]> },
    Complex(String),
    Retract(MorNode),
    Split { sizes: Vec<u32>, ideal: Vec<usize> },
    /// Bundled deformation-retract fixture by name.
    Ndr(String),
}

#[derive(Debug, Clone, PartialEq)]
pub enum AlgNode {
    Ref(String),
    Finite(Vec<u32>),
    Zero,
    Sum(Box<AlgNode>, Box<AlgNode>),
    Interval(u32, Box<AlgNode>),
    Open(u32, Box<AlgNode>),
    Sphere(u32, Box<AlgNode>),
    HalfOpen(Box<AlgNode>),
    Susp(Box<AlgNode>),
    Cyl(Box<MorNode>),
    Cone(Box<MorNode>),
    Pullback(Box<MorNode>, Box<MorNode>),
}

#[derive(Debug, Clone, PartialEq)]
pub enum MorNode {
    Ref(String),
    /// `g * f`: apply `f` first.
    Compose(Box<MorNode>, Box<MorNode>),
    Id(AlgNode),
    Zero(AlgNode, AlgNode),
    Ev(Frac, AlgNode),
    Embed(AlgNode),
    Restrict(AlgNode),
    P1(AlgNode),
    P2(AlgNode),
    Blocks { dom: AlgNode, cod: AlgNode, mult: Vec<Vec<u32>>, unital: bool },
    Susp(Box<MorNode>),
    Pair(Box<MorNode>, Box<MorNode>),
    Into { target: AlgNode, left: Box<MorNode>, right: Box<MorNode> },
    Extend(AlgNode, AlgNode),
    Rotate(AlgNode, Frac),
    Wind {
        dom: AlgNode,
        cod: AlgNode,
        mult: Vec<Vec<u32>>,
        unital: bool,
        k: Vec<Vec<(f64, f64)>>,
        m: i64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Frac {
    pub num: u64,
    pub den: u64,
}
