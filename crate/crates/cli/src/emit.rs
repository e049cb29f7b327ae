//! Report serialization. JSON output is versioned and fully deterministic:
//! struct fields serialize in a fixed order and every ad-hoc map goes
//! through serde_json's sorted map type, so identical runs produce identical
//! bytes. DOT output draws each chain as a labeled path and each complex as
//! its tower of skeleta.

use nccw_core::check::CheckReport;
use nccw_core::complex::NccwComplex;
use nccw_core::puppe::PuppeChain;
use serde_json::json;

use crate::runner::RunOutcome;

pub const REPORT_VERSION: &str = "nccw-report/1";

pub fn render_json(reports: &[CheckReport]) -> String {
    let doc = json!({
        "version": REPORT_VERSION,
        "reports": reports,
    });
    let mut text = serde_json::to_string_pretty(&doc).expect("reports always serialize");
    text.push('\n');
    text
}

pub fn render_dot(outcome: &RunOutcome) -> String {
    let mut out = String::new();
    out.push_str("digraph nccw {\n  rankdir=LR;\n  node [shape=box, fontsize=10];\n");
    for (ci, (label, chain)) in outcome.chains.iter().enumerate() {
        out.push_str(&chain_cluster(ci, label, chain));
    }
    for (ki, cx) in outcome.complexes.iter().enumerate() {
        out.push_str(&complex_cluster(ki, cx));
    }
    out.push_str("}\n");
    out
}

fn chain_cluster(ci: usize, label: &str, chain: &PuppeChain) -> String {
    let mut out = String::new();
    out.push_str(&format!("  subgraph cluster_chain{ci} {{\n"));
    out.push_str(&format!("    label=\"{}\";\n", escape(label)));
    for (i, term) in chain.terms.iter().enumerate() {
        out.push_str(&format!("    c{ci}_t{i} [label=\"{}\"];\n", escape(&term.to_string())));
    }
    // maps[i] runs from terms[i + 1] to terms[i]
    for i in 0..chain.maps.len() {
        out.push_str(&format!(
            "    c{ci}_t{} -> c{ci}_t{i} [label=\"{}\"];\n",
            i + 1,
            escape(&edge_label(i))
        ));
    }
    out.push_str("  }\n");
    out
}

fn edge_label(i: usize) -> String {
    match i {
        0 => "phi".to_string(),
        1 => "collapse".to_string(),
        2 => "include".to_string(),
        3 => "connect".to_string(),
        _ => format!("S({})", edge_label(i - 3)),
    }
}

fn complex_cluster(ki: usize, cx: &NccwComplex) -> String {
    let mut out = String::new();
    out.push_str(&format!("  subgraph cluster_complex{ki} {{\n"));
    out.push_str(&format!("    label=\"{}\";\n", escape(&cx.name)));
    for (k, stage) in cx.stages.iter().enumerate() {
        out.push_str(&format!(
            "    x{ki}_s{k} [label=\"stage {k}: cells {}\"];\n",
            escape(&stage.cells.to_string())
        ));
        if k > 0 {
            out.push_str(&format!(
                "    x{ki}_s{k} -> x{ki}_s{} [label=\"restrict\"];\n",
                k - 1
            ));
            if stage.sigma.is_some() {
                out.push_str(&format!(
                    "    x{ki}_s{k} -> x{ki}_s{} [label=\"attach\", style=dashed];\n",
                    k - 1
                ));
            }
        }
    }
    out.push_str("  }\n");
    out
}

fn escape(text: &str) -> String {
    text.replace('\\', "\\\\").replace('"', "\\\"")
}
