//! Recursive-descent parser for `.nccw` scripts. Every statement ends with a
//! semicolon. Names must be declared before use and cannot be redefined; both
//! rules are enforced here so errors carry source positions. Recursion depth
//! is capped, and every production consumes at least one token, so parsing
//! always terminates.

use std::collections::HashMap;

use crate::dsl::ast::*;
use crate::dsl::lexer::{lex, Spanned, Tok};
use crate::dsl::ParseError;

const MAX_DEPTH: usize = 128;

const NDR_FIXTURES: &[&str] = &["twopoint", "collar", "broken"];

const RESERVED: &[&str] = &[
    "algebra", "cell", "morphism", "map", "stage", "check", "puppe", "approx", "discretize",
    "emit", "attach", "dim", "via", "none", "zero", "id", "ev", "embed", "restrict", "p1", "p2",
    "blocks", "susp", "pair", "into", "extend", "rotate", "wind", "unital", "interval", "open",
    "sphere", "halfopen", "cyl", "cone", "pullback", "star", "square", "pushout", "complex",
    "retract", "split", "ndr", "json", "dot",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum NameKind {
    Algebra,
    Morphism,
    Complex,
}

/// `M2`, `M13`, ... denote matrix algebra literals and cannot be declared.
fn matrix_literal(name: &str) -> Option<u32> {
    let digits = name.strip_prefix('M')?;
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    digits.parse().ok()
}

pub fn parse(src: &str) -> Result<Script, ParseError> {
    let toks = lex(src)?;
    let mut p = Parser { toks, pos: 0, depth: 0, names: HashMap::new() };
    p.script()
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
    depth: usize,
    names: HashMap<String, NameKind>,
}

impl Parser {
    fn peek(&self) -> &Spanned {
        &self.toks[self.pos.min(self.toks.len() - 1)]
    }

    fn bump(&mut self) -> Spanned {
        let t = self.peek().clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn err_expected(&self, expected: &[&str]) -> ParseError {
        let at = self.peek();
        ParseError::Expected {
            line: at.line,
            col: at.col,
            expected: expected.iter().map(|s| s.to_string()).collect(),
            found: at.tok.to_string(),
        }
    }

    fn expect(&mut self, want: Tok, label: &str) -> Result<Spanned, ParseError> {
        if self.peek().tok == want {
            Ok(self.bump())
        } else {
            Err(self.err_expected(&[label]))
        }
    }

    fn expect_ident(&mut self) -> Result<(String, usize, usize), ParseError> {
        match &self.peek().tok {
            Tok::Ident(s) => {
                let s = s.clone();
                let t = self.bump();
                Ok((s, t.line, t.col))
            }
            _ => Err(self.err_expected(&["identifier"])),
        }
    }

    fn expect_int(&mut self) -> Result<u64, ParseError> {
        match self.peek().tok {
            Tok::Int(n) => {
                self.bump();
                Ok(n)
            }
            _ => Err(self.err_expected(&["integer"])),
        }
    }

    fn at_kw(&self, kw: &str) -> bool {
        matches!(&self.peek().tok, Tok::Ident(s) if s == kw)
    }

    fn eat_kw(&mut self, kw: &str) -> bool {
        if self.at_kw(kw) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect_kw(&mut self, kw: &str) -> Result<(), ParseError> {
        if self.eat_kw(kw) {
            Ok(())
        } else {
            Err(self.err_expected(&[&format!("`{kw}`")]))
        }
    }

    fn enter(&mut self) -> Result<(), ParseError> {
        self.depth += 1;
        if self.depth > MAX_DEPTH {
            let at = self.peek();
            return Err(ParseError::TooDeep { line: at.line, col: at.col });
        }
        Ok(())
    }

    fn leave(&mut self) {
        self.depth -= 1;
    }

    fn declare(&mut self, name: &str, kind: NameKind, line: usize, col: usize) -> Result<(), ParseError> {
        if RESERVED.contains(&name) || matrix_literal(name).is_some() {
            return Err(ParseError::Reserved { line, col, name: name.to_string() });
        }
        if self.names.insert(name.to_string(), kind).is_some() {
            return Err(ParseError::Redeclared { line, col, name: name.to_string() });
        }
        Ok(())
    }

    fn lookup(&self, name: &str, want: &[NameKind], line: usize, col: usize) -> Result<(), ParseError> {
        match self.names.get(name) {
            Some(k) if want.contains(k) => Ok(()),
            _ => Err(ParseError::Undeclared { line, col, name: name.to_string() }),
        }
    }

    fn script(&mut self) -> Result<Script, ParseError> {
        let mut stmts = Vec::new();
        while self.peek().tok != Tok::Eof {
            stmts.push(self.stmt()?);
        }
        Ok(Script { stmts })
    }

    fn stmt(&mut self) -> Result<Stmt, ParseError> {
        let at = self.peek().clone();
        let (line, col) = (at.line, at.col);
        let kind = if self.eat_kw("algebra") {
            let (name, nl, nc) = self.expect_ident()?;
            self.expect(Tok::Eq, "`=`")?;
            let expr = self.alg_expr()?;
            self.declare(&name, NameKind::Algebra, nl, nc)?;
            StmtKind::Algebra { name, expr }
        } else if self.eat_kw("cell") {
            let (name, nl, nc) = self.expect_ident()?;
            self.expect(Tok::Eq, "`=`")?;
            let expr = self.alg_expr()?;
            self.declare(&name, NameKind::Algebra, nl, nc)?;
            StmtKind::Cell { name, expr }
        } else if self.at_kw("morphism") || self.at_kw("map") {
            let as_map = self.at_kw("map");
            self.bump();
            let (name, nl, nc) = self.expect_ident()?;
            self.expect(Tok::Colon, "`:`")?;
            let dom = self.alg_expr()?;
            self.expect(Tok::Arrow, "`->`")?;
            let cod = self.alg_expr()?;
            self.expect(Tok::Eq, "`=`")?;
            let body = self.mor_expr()?;
            self.declare(&name, NameKind::Morphism, nl, nc)?;
            StmtKind::Morphism { as_map, name, dom, cod, body }
        } else if self.eat_kw("stage") {
            let (name, nl, nc) = self.expect_ident()?;
            self.expect(Tok::Eq, "`=`")?;
            self.expect_kw("attach")?;
            self.expect(Tok::LParen, "`(`")?;
            let (base, bl, bc) = self.expect_ident()?;
            self.lookup(&base, &[NameKind::Algebra, NameKind::Complex], bl, bc)?;
            self.expect(Tok::Comma, "`,`")?;
            self.expect_kw("cell")?;
            let (cell_name, cl, cc) = self.expect_ident()?;
            self.expect(Tok::Eq, "`=`")?;
            let cell = self.alg_expr()?;
            self.expect(Tok::Comma, "`,`")?;
            self.expect_kw("dim")?;
            self.expect(Tok::Eq, "`=`")?;
            let dim = self.expect_int()? as u32;
            self.expect(Tok::Comma, "`,`")?;
            self.expect_kw("via")?;
            self.expect(Tok::Eq, "`=`")?;
            let via = if self.eat_kw("none") { None } else { Some(self.mor_expr()?) };
            self.expect(Tok::RParen, "`)`")?;
            self.declare(&cell_name, NameKind::Algebra, cl, cc)?;
            self.declare(&name, NameKind::Complex, nl, nc)?;
            StmtKind::Stage { name, base, cell_name, cell, dim, via }
        } else if self.eat_kw("check") {
            StmtKind::Check(self.check_cmd()?)
        } else if self.eat_kw("puppe") {
            self.expect(Tok::LParen, "`(`")?;
            let phi = self.mor_expr()?;
            self.expect(Tok::Comma, "`,`")?;
            let len = self.expect_int()?;
            self.expect(Tok::RParen, "`)`")?;
            StmtKind::Puppe { phi, len }
        } else if self.eat_kw("approx") {
            self.expect(Tok::LParen, "`(`")?;
            let phi = self.mor_expr()?;
            self.expect(Tok::Comma, "`,`")?;
            let (complex, cl, cc) = self.expect_ident()?;
            self.lookup(&complex, &[NameKind::Complex], cl, cc)?;
            self.expect(Tok::RParen, "`)`")?;
            StmtKind::Approx { phi, complex }
        } else if self.eat_kw("discretize") {
            StmtKind::Discretize(self.alg_expr()?)
        } else if self.eat_kw("emit") {
            if self.eat_kw("json") {
                StmtKind::Emit(EmitKind::Json)
            } else if self.eat_kw("dot") {
                StmtKind::Emit(EmitKind::Dot)
            } else {
                return Err(self.err_expected(&["`json`", "`dot`"]));
            }
        } else {
            return Err(self.err_expected(&[
                "`algebra`",
                "`cell`",
                "`morphism`",
                "`map`",
                "`stage`",
                "`check`",
                "`puppe`",
                "`approx`",
                "`discretize`",
                "`emit`",
            ]));
        };
        self.expect(Tok::Semi, "`;`")?;
        Ok(Stmt { line, col, kind })
    }

    fn check_cmd(&mut self) -> Result<CheckCmd, ParseError> {
        if self.eat_kw("star") {
            self.expect(Tok::LParen, "`(`")?;
            let f = self.mor_expr()?;
            self.expect(Tok::RParen, "`)`")?;
            Ok(CheckCmd::Star(f))
        } else if self.eat_kw("square") {
            self.expect(Tok::LParen, "`(`")?;
            let node = self.alg_expr()?;
            let legs = if self.peek().tok == Tok::Comma {
                self.bump();
                let d = self.mor_expr()?;
                self.expect(Tok::Comma, "`,`")?;
                let g = self.mor_expr()?;
                self.expect(Tok::Comma, "`,`")?;
                let a = self.mor_expr()?;
                self.expect(Tok::Comma, "`,`")?;
                let b = self.mor_expr()?;
                Some(Box::new([d, g, a, b]))
            } else {
                None
            };
            self.expect(Tok::RParen, "`)`")?;
            Ok(CheckCmd::Square { node, legs })
        } else if self.eat_kw("pushout") {
            self.expect(Tok::LParen, "`(`")?;
            let x = self.alg_expr()?;
            self.expect(Tok::Comma, "`,`")?;
            let d = self.mor_expr()?;
            self.expect(Tok::Comma, "`,`")?;
            let g = self.mor_expr()?;
            self.expect(Tok::Comma, "`,`")?;
            let f = self.mor_expr()?;
            self.expect(Tok::Comma, "`,`")?;
            let h = self.mor_expr()?;
            self.expect(Tok::RParen, "`)`")?;
            Ok(CheckCmd::Pushout { x, legs: Box::new([d, g, f, h]) })
        } else if self.eat_kw("complex") {
            self.expect(Tok::LParen, "`(`")?;
            let (name, nl, nc) = self.expect_ident()?;
            self.lookup(&name, &[NameKind::Complex], nl, nc)?;
            self.expect(Tok::RParen, "`)`")?;
            Ok(CheckCmd::Complex(name))
        } else if self.eat_kw("retract") {
            self.expect(Tok::LParen, "`(`")?;
            let f = self.mor_expr()?;
            self.expect(Tok::RParen, "`)`")?;
            Ok(CheckCmd::Retract(f))
        } else if self.eat_kw("split") {
            self.expect(Tok::LParen, "`(`")?;
            let sizes = self.int_list()?.into_iter().map(|n| n as u32).collect();
            self.expect(Tok::Comma, "`,`")?;
            let ideal = self.int_list()?.into_iter().map(|n| n as usize).collect();
            self.expect(Tok::RParen, "`)`")?;
            Ok(CheckCmd::Split { sizes, ideal })
        } else if self.eat_kw("ndr") {
            let at = self.peek().clone();
            let (name, _, _) = self.expect_ident()?;
            if !NDR_FIXTURES.contains(&name.as_str()) {
                return Err(ParseError::Expected {
                    line: at.line,
                    col: at.col,
                    expected: NDR_FIXTURES.iter().map(|s| format!("`{s}`")).collect(),
                    found: at.tok.to_string(),
                });
            }
            Ok(CheckCmd::Ndr(name))
        } else {
            Err(self.err_expected(&[
                "`star`",
                "`square`",
                "`pushout`",
                "`complex`",
                "`retract`",
                "`split`",
                "`ndr`",
            ]))
        }
    }

    fn int_list(&mut self) -> Result<Vec<u64>, ParseError> {
        self.expect(Tok::LBracket, "`[`")?;
        let mut out = Vec::new();
        if self.peek().tok != Tok::RBracket {
            out.push(self.expect_int()?);
            while self.peek().tok == Tok::Comma {
                self.bump();
                out.push(self.expect_int()?);
            }
        }
        self.expect(Tok::RBracket, "`]`")?;
        Ok(out)
    }

    fn mult_lit(&mut self) -> Result<Vec<Vec<u32>>, ParseError> {
        self.expect(Tok::LBracket, "`[`")?;
        let mut rows = Vec::new();
        rows.push(self.int_list()?.into_iter().map(|n| n as u32).collect());
        while self.peek().tok == Tok::Comma {
            self.bump();
            rows.push(self.int_list()?.into_iter().map(|n| n as u32).collect());
        }
        self.expect(Tok::RBracket, "`]`")?;
        Ok(rows)
    }

    fn signed_float(&mut self) -> Result<f64, ParseError> {
        let neg = if self.peek().tok == Tok::Minus {
            self.bump();
            true
        } else {
            false
        };
        let v = match self.peek().tok {
            Tok::Float(x) => {
                self.bump();
                x
            }
            Tok::Int(n) => {
                self.bump();
                n as f64
            }
            _ => return Err(self.err_expected(&["number"])),
        };
        Ok(if neg { -v } else { v })
    }

    /// Complex entries are written `(re, im)`.
    fn complex_row(&mut self) -> Result<Vec<(f64, f64)>, ParseError> {
        self.expect(Tok::LBracket, "`[`")?;
        let mut row = Vec::new();
        loop {
            self.expect(Tok::LParen, "`(`")?;
            let re = self.signed_float()?;
            self.expect(Tok::Comma, "`,`")?;
            let im = self.signed_float()?;
            self.expect(Tok::RParen, "`)`")?;
            row.push((re, im));
            if self.peek().tok == Tok::Comma {
                self.bump();
            } else {
                break;
            }
        }
        self.expect(Tok::RBracket, "`]`")?;
        Ok(row)
    }

    fn matrix_lit(&mut self) -> Result<Vec<Vec<(f64, f64)>>, ParseError> {
        self.expect(Tok::LBracket, "`[`")?;
        let mut rows = Vec::new();
        rows.push(self.complex_row()?);
        while self.peek().tok == Tok::Comma {
            self.bump();
            rows.push(self.complex_row()?);
        }
        self.expect(Tok::RBracket, "`]`")?;
        Ok(rows)
    }

    fn frac(&mut self) -> Result<Frac, ParseError> {
        let num = self.expect_int()?;
        let den = if self.peek().tok == Tok::Slash {
            self.bump();
            self.expect_int()?
        } else {
            1
        };
        if den == 0 {
            let at = self.peek();
            return Err(ParseError::Expected {
                line: at.line,
                col: at.col,
                expected: vec!["nonzero denominator".into()],
                found: "0".into(),
            });
        }
        Ok(Frac { num, den })
    }

    fn alg_expr(&mut self) -> Result<AlgNode, ParseError> {
        self.enter()?;
        let mut acc = self.alg_term()?;
        while self.peek().tok == Tok::Plus {
            self.bump();
            let rhs = self.alg_term()?;
            // `M2 + M3` folds into one finite-dimensional literal.
            acc = match (acc, rhs) {
                (AlgNode::Finite(mut a), AlgNode::Finite(b)) => {
                    a.extend(b);
                    AlgNode::Finite(a)
                }
                (a, b) => AlgNode::Sum(Box::new(a), Box::new(b)),
            };
        }
        self.leave();
        Ok(acc)
    }

    fn alg_term(&mut self) -> Result<AlgNode, ParseError> {
        self.enter()?;
        let out = if self.peek().tok == Tok::LParen {
            self.bump();
            let e = self.alg_expr()?;
            self.expect(Tok::RParen, "`)`")?;
            e
        } else if self.eat_kw("zero") {
            AlgNode::Zero
        } else if self.eat_kw("interval") {
            self.expect(Tok::LParen, "`(`")?;
            let n = self.expect_int()? as u32;
            self.expect(Tok::Comma, "`,`")?;
            let a = self.alg_expr()?;
            self.expect(Tok::RParen, "`)`")?;
            AlgNode::Interval(n, Box::new(a))
        } else if self.eat_kw("open") {
            self.expect(Tok::LParen, "`(`")?;
            let n = self.expect_int()? as u32;
            self.expect(Tok::Comma, "`,`")?;
            let a = self.alg_expr()?;
            self.expect(Tok::RParen, "`)`")?;
            AlgNode::Open(n, Box::new(a))
        } else if self.eat_kw("sphere") {
            self.expect(Tok::LParen, "`(`")?;
            let n = self.expect_int()? as u32;
            self.expect(Tok::Comma, "`,`")?;
            let a = self.alg_expr()?;
            self.expect(Tok::RParen, "`)`")?;
            AlgNode::Sphere(n, Box::new(a))
        } else if self.eat_kw("halfopen") {
            self.expect(Tok::LParen, "`(`")?;
            let a = self.alg_expr()?;
            self.expect(Tok::RParen, "`)`")?;
            AlgNode::HalfOpen(Box::new(a))
        } else if self.eat_kw("susp") {
            self.expect(Tok::LParen, "`(`")?;
            let a = self.alg_expr()?;
            self.expect(Tok::RParen, "`)`")?;
            AlgNode::Susp(Box::new(a))
        } else if self.eat_kw("cyl") {
            self.expect(Tok::LParen, "`(`")?;
            let f = self.mor_expr()?;
            self.expect(Tok::RParen, "`)`")?;
            AlgNode::Cyl(Box::new(f))
        } else if self.eat_kw("cone") {
            self.expect(Tok::LParen, "`(`")?;
            let f = self.mor_expr()?;
            self.expect(Tok::RParen, "`)`")?;
            AlgNode::Cone(Box::new(f))
        } else if self.eat_kw("pullback") {
            self.expect(Tok::LParen, "`(`")?;
            let a = self.mor_expr()?;
            self.expect(Tok::Comma, "`,`")?;
            let b = self.mor_expr()?;
            self.expect(Tok::RParen, "`)`")?;
            AlgNode::Pullback(Box::new(a), Box::new(b))
        } else if let Tok::Ident(name) = &self.peek().tok {
            let name = name.clone();
            if let Some(k) = matrix_literal(&name) {
                self.bump();
                AlgNode::Finite(vec![k])
            } else {
                let (name, nl, nc) = self.expect_ident()?;
                self.lookup(&name, &[NameKind::Algebra, NameKind::Complex], nl, nc)?;
                AlgNode::Ref(name)
            }
        } else {
            return Err(self.err_expected(&["algebra expression"]));
        };
        self.leave();
        Ok(out)
    }

    fn mor_expr(&mut self) -> Result<MorNode, ParseError> {
        self.enter()?;
        let mut acc = self.mor_atom()?;
        while self.peek().tok == Tok::Star {
            self.bump();
            let rhs = self.mor_atom()?;
            acc = MorNode::Compose(Box::new(acc), Box::new(rhs));
        }
        self.leave();
        Ok(acc)
    }

    fn mor_atom(&mut self) -> Result<MorNode, ParseError> {
        self.enter()?;
        let out = if self.peek().tok == Tok::LParen {
            self.bump();
            let f = self.mor_expr()?;
            self.expect(Tok::RParen, "`)`")?;
            f
        } else if self.eat_kw("id") {
            self.expect(Tok::LParen, "`(`")?;
            let a = self.alg_expr()?;
            self.expect(Tok::RParen, "`)`")?;
            MorNode::Id(a)
        } else if self.eat_kw("zero") {
            self.expect(Tok::LParen, "`(`")?;
            let a = self.alg_expr()?;
            self.expect(Tok::Arrow, "`->`")?;
            let b = self.alg_expr()?;
            self.expect(Tok::RParen, "`)`")?;
            MorNode::Zero(a, b)
        } else if self.eat_kw("ev") {
            self.expect(Tok::LParen, "`(`")?;
            let t = self.frac()?;
            self.expect(Tok::Comma, "`,`")?;
            let a = self.alg_expr()?;
            self.expect(Tok::RParen, "`)`")?;
            MorNode::Ev(t, a)
        } else if self.eat_kw("embed") {
            self.expect(Tok::LParen, "`(`")?;
            let a = self.alg_expr()?;
            self.expect(Tok::RParen, "`)`")?;
            MorNode::Embed(a)
        } else if self.eat_kw("restrict") {
            self.expect(Tok::LParen, "`(`")?;
            let a = self.alg_expr()?;
            self.expect(Tok::RParen, "`)`")?;
            MorNode::Restrict(a)
        } else if self.eat_kw("p1") {
            self.expect(Tok::LParen, "`(`")?;
            let a = self.alg_expr()?;
            self.expect(Tok::RParen, "`)`")?;
            MorNode::P1(a)
        } else if self.eat_kw("p2") {
            self.expect(Tok::LParen, "`(`")?;
            let a = self.alg_expr()?;
            self.expect(Tok::RParen, "`)`")?;
            MorNode::P2(a)
        } else if self.eat_kw("blocks") {
            self.expect(Tok::LParen, "`(`")?;
            let dom = self.alg_expr()?;
            self.expect(Tok::Arrow, "`->`")?;
            let cod = self.alg_expr()?;
            self.expect(Tok::Comma, "`,`")?;
            let mult = self.mult_lit()?;
            let unital = if self.peek().tok == Tok::Comma {
                self.bump();
                self.expect_kw("unital")?;
                true
            } else {
                false
            };
            self.expect(Tok::RParen, "`)`")?;
            MorNode::Blocks { dom, cod, mult, unital }
        } else if self.eat_kw("susp") {
            self.expect(Tok::LParen, "`(`")?;
            let f = self.mor_expr()?;
            self.expect(Tok::RParen, "`)`")?;
            MorNode::Susp(Box::new(f))
        } else if self.eat_kw("pair") {
            self.expect(Tok::LParen, "`(`")?;
            let f = self.mor_expr()?;
            self.expect(Tok::Comma, "`,`")?;
            let g = self.mor_expr()?;
            self.expect(Tok::RParen, "`)`")?;
            MorNode::Pair(Box::new(f), Box::new(g))
        } else if self.eat_kw("into") {
            self.expect(Tok::LParen, "`(`")?;
            let target = self.alg_expr()?;
            self.expect(Tok::Comma, "`,`")?;
            let f = self.mor_expr()?;
            self.expect(Tok::Comma, "`,`")?;
            let g = self.mor_expr()?;
            self.expect(Tok::RParen, "`)`")?;
            MorNode::Into { target, left: Box::new(f), right: Box::new(g) }
        } else if self.eat_kw("extend") {
            self.expect(Tok::LParen, "`(`")?;
            let a = self.alg_expr()?;
            self.expect(Tok::Arrow, "`->`")?;
            let b = self.alg_expr()?;
            self.expect(Tok::RParen, "`)`")?;
            MorNode::Extend(a, b)
        } else if self.eat_kw("rotate") {
            self.expect(Tok::LParen, "`(`")?;
            let a = self.alg_expr()?;
            self.expect(Tok::Comma, "`,`")?;
            let t = self.frac()?;
            self.expect(Tok::RParen, "`)`")?;
            MorNode::Rotate(a, t)
        } else if self.eat_kw("wind") {
            self.expect(Tok::LParen, "`(`")?;
            let dom = self.alg_expr()?;
            self.expect(Tok::Arrow, "`->`")?;
            let cod = self.alg_expr()?;
            self.expect(Tok::Comma, "`,`")?;
            let mult = self.mult_lit()?;
            self.expect(Tok::Comma, "`,`")?;
            let k = self.matrix_lit()?;
            self.expect(Tok::Comma, "`,`")?;
            let neg = if self.peek().tok == Tok::Minus {
                self.bump();
                true
            } else {
                false
            };
            let m = self.expect_int()? as i64;
            let m = if neg { -m } else { m };
            let unital = if self.peek().tok == Tok::Comma {
                self.bump();
                self.expect_kw("unital")?;
                true
            } else {
                false
            };
            self.expect(Tok::RParen, "`)`")?;
            MorNode::Wind { dom, cod, mult, unital, k, m }
        } else if let Tok::Ident(_) = &self.peek().tok {
            let (name, nl, nc) = self.expect_ident()?;
            self.lookup(&name, &[NameKind::Morphism], nl, nc)?;
            MorNode::Ref(name)
        } else {
            return Err(self.err_expected(&["morphism expression"]));
        };
        self.leave();
        Ok(out)
    }
}
