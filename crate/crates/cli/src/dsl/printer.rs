//! Canonical text form for scripts. Printing a parsed script and parsing the
//! result yields the same tree, which the round-trip tests pin down.

use crate::dsl::ast::*;

pub fn print_script(script: &Script) -> String {
    let mut out = String::new();
    for stmt in &script.stmts {
        out.push_str(&print_stmt(stmt));
        out.push('\n');
    }
    out
}

fn print_stmt(stmt: &Stmt) -> String {
    match &stmt.kind {
        StmtKind::Algebra { name, expr } => format!("algebra {name} = {};", alg(expr)),
        StmtKind::Cell { name, expr } => format!("cell {name} = {};", alg(expr)),
        StmtKind::Morphism { as_map, name, dom, cod, body } => {
            let kw = if *as_map { "map" } else { "morphism" };
            format!("{kw} {name} : {} -> {} = {};", alg(dom), alg(cod), mor(body))
        }
        StmtKind::Stage { name, base, cell_name, cell, dim, via } => {
            let via = match via {
                Some(f) => mor(f),
                None => "none".into(),
            };
            format!(
                "stage {name} = attach({base}, cell {cell_name} = {}, dim = {dim}, via = {via});",
                alg(cell)
            )
        }
        StmtKind::Check(cmd) => format!("check {};", check(cmd)),
        StmtKind::Puppe { phi, len } => format!("puppe({}, {len});", mor(phi)),
        StmtKind::Approx { phi, complex } => format!("approx({}, {complex});", mor(phi)),
        StmtKind::Discretize(a) => format!("discretize {};", alg(a)),
        StmtKind::Emit(EmitKind::Json) => "emit json;".into(),
        StmtKind::Emit(EmitKind::Dot) => "emit dot;".into(),
    }
}

fn check(cmd: &CheckCmd) -> String {
    match cmd {
        CheckCmd::Star(f) => format!("star({})", mor(f)),
        CheckCmd::Square { node, legs: None } => format!("square({})", alg(node)),
        CheckCmd::Square { node, legs: Some(legs) } => format!(
            "square({}, {}, {}, {}, {})",
            alg(node),
            mor(&legs[0]),
            mor(&legs[1]),
            mor(&legs[2]),
            mor(&legs[3])
        ),
        CheckCmd::Pushout { x, legs } => format!(
            "pushout({}, {}, {}, {}, {})",
            alg(x),
            mor(&legs[0]),
            mor(&legs[1]),
            mor(&legs[2]),
            mor(&legs[3])
        ),
        CheckCmd::Complex(name) => format!("complex({name})"),
        CheckCmd::Retract(f) => format!("retract({})", mor(f)),
        CheckCmd::Split { sizes, ideal } => {
            format!("split({}, {})", int_list(sizes), int_list(ideal))
        }
        CheckCmd::Ndr(name) => format!("ndr {name}"),
    }
}

fn int_list<T: std::fmt::Display>(xs: &[T]) -> String {
    let inner: Vec<String> = xs.iter().map(|x| x.to_string()).collect();
    format!("[{}]", inner.join(", "))
}

fn frac(f: &Frac) -> String {
    if f.den == 1 {
        f.num.to_string()
    } else {
        format!("{}/{}", f.num, f.den)
    }
}

fn alg(node: &AlgNode) -> String {
    match node {
        AlgNode::Ref(name) => name.clone(),
        AlgNode::Finite(sizes) => {
            let parts: Vec<String> = sizes.iter().map(|k| format!("M{k}")).collect();
            parts.join(" + ")
        }
        AlgNode::Zero => "zero".into(),
        AlgNode::Sum(a, b) => {
            // A right-hand sum or multi-block literal would reassociate or
            // fold on reparse without the parentheses.
            let rhs = match **b {
                AlgNode::Sum(..) | AlgNode::Finite(..) => format!("({})", alg(b)),
                _ => alg(b),
            };
            format!("{} + {rhs}", alg(a))
        }
        AlgNode::Interval(n, a) => format!("interval({n}, {})", alg(a)),
        AlgNode::Open(n, a) => format!("open({n}, {})", alg(a)),
        AlgNode::Sphere(n, a) => format!("sphere({n}, {})", alg(a)),
        AlgNode::HalfOpen(a) => format!("halfopen({})", alg(a)),
        AlgNode::Susp(a) => format!("susp({})", alg(a)),
        AlgNode::Cyl(f) => format!("cyl({})", mor(f)),
        AlgNode::Cone(f) => format!("cone({})", mor(f)),
        AlgNode::Pullback(a, b) => format!("pullback({}, {})", mor(a), mor(b)),
    }
}

fn mor(node: &MorNode) -> String {
    match node {
        MorNode::Ref(name) => name.clone(),
        MorNode::Compose(f, g) => {
            let rhs = match **g {
                MorNode::Compose(..) => format!("({})", mor(g)),
                _ => mor(g),
            };
            format!("{} * {rhs}", mor(f))
        }
        MorNode::Id(a) => format!("id({})", alg(a)),
        MorNode::Zero(a, b) => format!("zero({} -> {})", alg(a), alg(b)),
        MorNode::Ev(t, a) => format!("ev({}, {})", frac(t), alg(a)),
        MorNode::Embed(a) => format!("embed({})", alg(a)),
        MorNode::Restrict(a) => format!("restrict({})", alg(a)),
        MorNode::P1(a) => format!("p1({})", alg(a)),
        MorNode::P2(a) => format!("p2({})", alg(a)),
        MorNode::Blocks { dom, cod, mult, unital } => {
            let tail = if *unital { ", unital" } else { "" };
            format!("blocks({} -> {}, {}{tail})", alg(dom), alg(cod), mult_lit(mult))
        }
        MorNode::Susp(f) => format!("susp({})", mor(f)),
        MorNode::Pair(f, g) => format!("pair({}, {})", mor(f), mor(g)),
        MorNode::Into { target, left, right } => {
            format!("into({}, {}, {})", alg(target), mor(left), mor(right))
        }
        MorNode::Extend(a, b) => format!("extend({} -> {})", alg(a), alg(b)),
        MorNode::Rotate(a, t) => format!("rotate({}, {})", alg(a), frac(t)),
        MorNode::Wind { dom, cod, mult, unital, k, m } => {
            let tail = if *unital { ", unital" } else { "" };
            format!(
                "wind({} -> {}, {}, {}, {m}{tail})",
                alg(dom),
                alg(cod),
                mult_lit(mult),
                matrix_lit(k)
            )
        }
    }
}

fn mult_lit(rows: &[Vec<u32>]) -> String {
    let inner: Vec<String> = rows.iter().map(|r| int_list(r)).collect();
    format!("[{}]", inner.join(", "))
}

fn matrix_lit(rows: &[Vec<(f64, f64)>]) -> String {
    let row = |r: &Vec<(f64, f64)>| {
        let cells: Vec<String> = r.iter().map(|(re, im)| format!("({re:?}, {im:?})")).collect();
        format!("[{}]", cells.join(", "))
    };
    let inner: Vec<String> = rows.iter().map(row).collect();
    format!("[{}]", inner.join(", "))
}
