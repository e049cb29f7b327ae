//! Interpreter behavior: environments build in order, commands produce one
//! report per resolution, and every runtime problem lands in a failing
//! report instead of an abort.

use nccw_cli::dsl::parse;
use nccw_cli::runner::{run, RunConfig};
use nccw_core::check::Status;

fn run_src(src: &str, resolutions: &[u32]) -> nccw_cli::runner::RunOutcome {
    let script = parse(src).expect("test script parses");
    let cfg = RunConfig { resolutions: resolutions.to_vec(), seed: 0, tol: None };
    run(&script, &cfg)
}

#[test]
fn empty_scripts_succeed_with_no_reports() {
    let out = run_src("", &[2]);
    assert!(out.reports.is_empty());
    assert!(!out.any_failed());
}

#[test]
fn star_checks_report_once_per_resolution() {
    let out = run_src(
        "morphism d : M1 -> M2 = blocks(M1 -> M2, [[2]], unital);\ncheck star(d);",
        &[2, 4, 8],
    );
    assert_eq!(out.reports.len(), 3);
    assert!(out.reports.iter().all(|r| r.status == Status::Pass));
    assert_eq!(out.reports[0].id, "s02.star.N2");
    assert_eq!(out.reports[2].id, "s02.star.N8");
}

#[test]
fn declared_types_must_match_the_body() {
    let out = run_src("morphism d : M2 -> M2 = blocks(M1 -> M2, [[2]], unital);", &[2]);
    assert_eq!(out.reports.len(), 1);
    let r = &out.reports[0];
    assert_eq!(r.status, Status::Fail);
    assert_eq!(r.kind, "runtime_error");
    let text = r.witness.as_ref().unwrap()["error"].as_str().unwrap();
    assert!(text.contains("declared domain"), "{text}");
}

#[test]
fn failed_declarations_poison_later_uses_without_crashing() {
    let out = run_src(
        "morphism d : M2 -> M2 = blocks(M1 -> M2, [[2]], unital);\ncheck star(d);",
        &[2],
    );
    assert_eq!(out.reports.len(), 2);
    assert!(out.reports.iter().all(|r| r.status == Status::Fail));
    let text = out.reports[1].witness.as_ref().unwrap()["error"].as_str().unwrap();
    assert!(text.contains("failed to build earlier"), "{text}");
}

#[test]
fn canonical_squares_need_a_pullback_shaped_node() {
    let out = run_src("check square(M2);", &[2]);
    assert_eq!(out.reports.len(), 1);
    assert_eq!(out.reports[0].status, Status::Fail);
    assert_eq!(out.reports[0].kind, "runtime_error");
}

#[test]
fn off_grid_rotations_fail_per_resolution() {
    let src = "algebra v = M1;\n\
        stage c = attach(v, cell e = M1, dim = 1, via = blocks(M1 -> sphere(0, M1), [[1], [1]], unital));\n\
        approx(rotate(c, 1/4), c);";
    let out = run_src(src, &[2, 4]);
    // resolution 2 cannot represent a quarter turn; resolution 4 can
    let bad: Vec<_> = out.reports.iter().filter(|r| r.status == Status::Fail).collect();
    assert_eq!(bad.len(), 1);
    assert_eq!(bad[0].id, "s03.approx.N2");
    assert!(out.reports.iter().any(|r| r.id.starts_with("s03.approx.N4") && r.status == Status::Pass));
}

#[test]
fn stage_dimensions_must_climb_one_at_a_time() {
    let src = "algebra v = M1;\n\
        stage c = attach(v, cell e = M1, dim = 2, via = blocks(M1 -> sphere(0, M1), [[1], [1]], unital));";
    let out = run_src(src, &[2]);
    assert_eq!(out.reports.len(), 1);
    let text = out.reports[0].witness.as_ref().unwrap()["error"].as_str().unwrap();
    assert!(text.contains("declares dim = 2"), "{text}");
}

#[test]
fn cells_must_be_finite_dimensional() {
    let out = run_src("cell f = interval(1, M2);", &[2]);
    assert_eq!(out.reports.len(), 1);
    assert_eq!(out.reports[0].status, Status::Fail);
}

#[test]
fn emit_statements_raise_flags() {
    let out = run_src("emit json;\nemit dot;", &[2]);
    assert!(out.emit_json);
    assert!(out.emit_dot);
    assert!(out.reports.is_empty());
}

#[test]
fn puppe_statements_store_one_chain_for_rendering() {
    let out = run_src(
        "morphism d : M1 -> M2 = blocks(M1 -> M2, [[2]], unital);\npuppe(d, 4);",
        &[2, 4],
    );
    assert!(!out.any_failed());
    assert_eq!(out.chains.len(), 1);
    assert_eq!(out.chains[0].1.terms.len(), 4);
}

#[test]
fn complexes_render_only_their_final_form() {
    let src = "algebra v = M1;\n\
        stage c1 = attach(v, cell e1 = M1, dim = 1, via = blocks(M1 -> sphere(0, M1), [[1], [1]], unital));\n\
        stage c2 = attach(c1, cell e2 = zero, dim = 2, via = none);";
    let out = run_src(src, &[2]);
    assert!(!out.any_failed());
    assert_eq!(out.complexes.len(), 1);
    assert_eq!(out.complexes[0].name, "c2");
    assert_eq!(out.complexes[0].stages.len(), 3);
}

#[test]
fn runtime_error_witnesses_point_at_the_statement() {
    let out = run_src("algebra bad = pullback(id(M1), id(M2));", &[2]);
    assert_eq!(out.reports.len(), 1);
    let w = out.reports[0].witness.as_ref().unwrap();
    assert_eq!(w["line"], 1);
    assert!(w["error"].as_str().unwrap().contains("codomain"));
}

#[test]
fn tolerance_overrides_apply_to_reports() {
    let script = parse("morphism d : M1 -> M2 = blocks(M1 -> M2, [[2]], unital);\ncheck star(d);")
        .expect("parses");
    let cfg = RunConfig { resolutions: vec![2], seed: 0, tol: Some(1e-3) };
    let out = run(&script, &cfg);
    assert_eq!(out.reports[0].tolerance, 1e-3);
}

#[test]
fn seeds_flow_into_reports() {
    let script = parse("morphism d : M1 -> M2 = blocks(M1 -> M2, [[2]], unital);\ncheck star(d);")
        .expect("parses");
    let cfg = RunConfig { resolutions: vec![2], seed: 99, tol: None };
    let out = run(&script, &cfg);
    assert_eq!(out.reports[0].seed, 99);
}
