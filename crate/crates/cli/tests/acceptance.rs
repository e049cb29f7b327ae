//! Acceptance gate: one test per criterion, each printing a single
//! pass/fail line (run with `--nocapture` to see the lines on success).
//! Tolerances and resolutions here are pinned on purpose; loosening them is
//! not an option when something regresses.

use std::time::Instant;

use nccw_core::approx::cellular_approximate;
use nccw_core::check::{
    check_ndr_pair, check_pullback_universal, check_pushout_universal, CheckConfig, Status,
};
use nccw_core::complex::validate_complex;
use nccw_core::corpus;
use nccw_core::discretize::{discretize_morphism, linear_dim, Discretizer, Tolerances, Warnings};
use nccw_core::expr::{AlgebraExpr, Limits, MappingKind};
use nccw_core::linalg;
use nccw_core::puppe::{check_cyl_retraction, check_puppe_chain};

const RESIDUAL: f64 = 1e-9;

fn verdict(n: usize, ok: bool, detail: String) {
    println!("criterion {n}: {} ({detail})", if ok { "pass" } else { "FAIL" });
    assert!(ok, "criterion {n}: {detail}");
}

#[test]
fn c1_cylinder_and_cone_squares_are_universal() {
    let start = Instant::now();
    let cfg = CheckConfig::default();
    assert_eq!(cfg.trials, 20, "twenty random cones per square");

    let mut squares = 0usize;
    let mut worst = 0.0f64;
    let mut all_pass = true;
    for phi in corpus::sample_phis() {
        for kind in [MappingKind::Cylinder, MappingKind::Cone] {
            let (x, delta, gamma, alpha, beta) =
                corpus::mapping_square(kind, phi.clone()).expect("square builds");
            for n in [2u32, 4, 8] {
                let sq = corpus::concrete_square(&x, &delta, &gamma, &alpha, &beta, n, &cfg.tols)
                    .expect("square discretizes");
                let r = check_pullback_universal(&format!("c1.{kind:?}.N{n}"), &sq, &[], &cfg);
                all_pass &= r.status == Status::Pass;
                worst = worst.max(r.max_residual);
                squares += 1;
            }
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    let ok = all_pass && worst <= RESIDUAL && elapsed < 5.0;
    verdict(
        1,
        ok,
        format!("{squares} squares at N in {{2,4,8}}, worst residual {worst:.2e}, {elapsed:.2}s"),
    );
}

#[test]
fn c2_stage_rows_are_exact_with_integer_dimension_counts() {
    let start = Instant::now();
    let cfg = CheckConfig::default();
    let resolutions = [2u32, 4, 8];

    let complexes = vec![
        corpus::point_complex("pt1", &[1]).unwrap(),
        corpus::point_complex("pt23", &[2, 3]).unwrap(),
        corpus::circle_complex().unwrap(),
        corpus::two_cell_complex().unwrap(),
    ];

    let mut all_pass = true;
    let mut rows = 0usize;
    for cx in &complexes {
        // one resolution at a time: the cross-resolution refinement checks
        // belong to the functoriality criterion, not this one
        for &n in &resolutions {
            let reports = validate_complex(cx, &[n], &cfg).expect("complex validates");
            all_pass &= reports.iter().all(|r| r.status == Status::Pass);
        }

        let limits = Limits { max_cube_dim: cx.dim().max(2) };
        for k in 1..cx.stages.len() {
            let cells_k = cx.open_cells(k, &limits).expect("open cells");
            for &n in &resolutions {
                let total = linear_dim(&cx.stages[k].algebra, n).unwrap();
                let cells = linear_dim(&cells_k, n).unwrap();
                let below = linear_dim(&cx.stages[k - 1].algebra, n).unwrap();
                all_pass &= total == cells + below;
                rows += 1;
            }
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    let ok = all_pass && elapsed < 5.0;
    verdict(2, ok, format!("{rows} stage rows, exact integer splits, {elapsed:.2}s"));
}

#[test]
fn c3_cylinder_retractions_hold_for_the_sample_maps() {
    let start = Instant::now();
    let cfg = CheckConfig::default();

    let mut all_pass = true;
    let mut count = 0usize;
    let mut worst = 0.0f64;
    for (i, phi) in corpus::sample_phis().iter().enumerate() {
        let reports = check_cyl_retraction(&format!("c3.phi{i}"), phi, &[2, 4], &cfg)
            .expect("retraction data builds");
        for r in &reports {
            all_pass &= r.status == Status::Pass;
            worst = worst.max(r.max_residual);
            count += 1;
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    let ok = all_pass && worst <= RESIDUAL && elapsed < 2.0;
    verdict(
        3,
        ok,
        format!("{count} checks over three maps, worst residual {worst:.2e}, {elapsed:.2}s"),
    );
}

#[test]
fn c4_eight_term_chain_has_the_expected_terms_and_certificates() {
    let start = Instant::now();
    let cfg = CheckConfig::default();
    let phi = corpus::sample_phis()[2].clone();

    let susp = |x: &AlgebraExpr| AlgebraExpr::OpenCubeTensor { n: 1, base: Box::new(x.clone()) };
    let a = AlgebraExpr::FiniteDim { sizes: vec![1] };
    let b = AlgebraExpr::FiniteDim { sizes: vec![2] };
    let cyl = AlgebraExpr::Cylinder { f: Box::new(phi.clone()) };
    let cone = AlgebraExpr::MappingCone { f: Box::new(phi.clone()) };
    let expected = vec![
        b,
        a.clone(),
        cyl.clone(),
        cone.clone(),
        susp(&a),
        susp(&cyl),
        susp(&cone),
        susp(&susp(&a)),
    ];

    let (chain, reports) = check_puppe_chain("c4", &phi, 8, 4, &cfg).expect("chain builds");
    let terms_match = chain.terms == expected;
    let all_pass = reports.iter().all(|r| r.status == Status::Pass);

    let find = |suffix: &str| {
        reports
            .iter()
            .find(|r| r.id.ends_with(suffix))
            .unwrap_or_else(|| panic!("report {suffix} missing"))
    };
    let contract = find(".contract");
    let row = find(".row");
    let corner = find(".corner");

    // the row splits the cone dimension as kernel 12 plus quotient 1 at N=4
    let w = row.witness.as_ref().expect("row reports carry dimensions");
    let integer_ranks =
        w["dim_subalgebra"] == 12 && w["dim_quotient"] == 1 && w["dim_total"] == 13;

    let elapsed = start.elapsed().as_secs_f64();
    let ok = terms_match
        && all_pass
        && contract.status == Status::Pass
        && corner.max_residual == 0.0
        && integer_ranks
        && elapsed < 5.0;
    verdict(
        4,
        ok,
        format!(
            "terms match: {terms_match}, contraction {:.2e}, corner {:.2e}, row 12+1=13, {elapsed:.2}s",
            contract.max_residual, corner.max_residual
        ),
    );
}

#[test]
fn c5_circle_rotation_straightens_at_resolution_eight() {
    let start = Instant::now();
    let cfg = CheckConfig::default();
    let cx = corpus::circle_complex().unwrap();
    let f = corpus::circle_rotation(1, 4).unwrap();

    let sm = cellular_approximate("c5", &f, &cx, &cx, 8, &cfg).expect("straightening runs");
    let all_pass = sm.reports.iter().all(|r| r.status == Status::Pass);
    let worst = sm.reports.iter().map(|r| r.max_residual).fold(0.0f64, f64::max);

    // the cellular map is exactly the endpoint of the deformation
    let end_is_slice = linalg::max_abs(&(&sm.cellular.mat - &sm.homotopy.at_one().mat)) == 0.0;

    // the deformation starts at the rotation itself
    let (fc, _) = discretize_morphism(&f, 8, &cfg.tols).unwrap();
    let start_residual = linalg::max_abs(
        &((&sm.homotopy.at_zero().mat - &fc.mat) * fc.dom.basis_matrix()),
    );

    let elapsed = start.elapsed().as_secs_f64();
    let ok = all_pass
        && worst <= RESIDUAL
        && end_is_slice
        && start_residual <= RESIDUAL
        && sm.homotopy.res == 16
        && elapsed < 30.0;
    verdict(
        5,
        ok,
        format!(
            "{} certificates, worst residual {worst:.2e}, start defect {start_residual:.2e}, {elapsed:.2}s",
            sm.reports.len()
        ),
    );
}

#[test]
fn c6_discretization_is_functorial_and_commutes_with_refinement() {
    let start = Instant::now();
    let tols = Tolerances::default();

    let pairs = corpus::functoriality_pairs().expect("pairs build");
    let pair_count = pairs.len();
    let mut worst_pair = 0.0f64;
    for (f, g) in &pairs {
        let composite = nccw_core::expr::MorphismExpr::compose(f.clone(), g.clone()).unwrap();
        let (fc, _) = discretize_morphism(f, 4, &tols).unwrap();
        let (gc, _) = discretize_morphism(g, 4, &tols).unwrap();
        let (cc, _) = discretize_morphism(&composite, 4, &tols).unwrap();
        worst_pair = worst_pair.max(linalg::max_abs(&(&fc.mat * &gc.mat - &cc.mat)));
    }

    let suite = corpus::restriction_suite().expect("suite builds");
    let suite_count = suite.len();
    let mut worst_restrict = 0.0f64;
    for f in &suite {
        let dom = f.domain().unwrap();
        let cod = f.codomain().unwrap();
        let (coarse, fine) = (2u32, 4u32);
        let mut w = Warnings::default();
        let r_dom =
            Discretizer { res: fine, tols, warnings: &mut w }.restriction(&dom, coarse).unwrap();
        let r_cod =
            Discretizer { res: fine, tols, warnings: &mut w }.restriction(&cod, coarse).unwrap();
        let (f_fine, _) = discretize_morphism(f, fine, &tols).unwrap();
        let (f_coarse, _) = discretize_morphism(f, coarse, &tols).unwrap();
        let defect = linalg::max_abs(
            &((&f_coarse.mat * &r_dom.mat - &r_cod.mat * &f_fine.mat)
                * f_fine.dom.basis_matrix()),
        );
        worst_restrict = worst_restrict.max(defect);
    }

    let elapsed = start.elapsed().as_secs_f64();
    let ok = pair_count == 20
        && worst_pair < 1e-12
        && worst_restrict < 1e-12
        && elapsed < 5.0;
    verdict(
        6,
        ok,
        format!(
            "{pair_count} composable pairs (defect {worst_pair:.2e}), {suite_count} refinement squares (defect {worst_restrict:.2e}), {elapsed:.2}s"
        ),
    );
}

#[test]
fn c7_identical_runs_produce_identical_json_bytes() {
    let dir = tempfile::tempdir().expect("tempdir");
    let script =
        std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scripts/circle.nccw");
    let mut outputs = Vec::new();
    for name in ["a.json", "b.json"] {
        let path = dir.path().join(name);
        let status = std::process::Command::new(env!("CARGO_BIN_EXE_nccw"))
            .arg("run")
            .arg(&script)
            .args(["--resolution", "2", "--resolution", "4", "--seed", "11"])
            .arg("--json")
            .arg(&path)
            .status()
            .expect("binary runs");
        assert_eq!(status.code(), Some(0));
        outputs.push(std::fs::read(&path).unwrap());
    }
    let ok = !outputs[0].is_empty() && outputs[0] == outputs[1];
    verdict(7, ok, format!("two seeded runs, {} bytes each", outputs[0].len()));
}

#[test]
fn c8_negative_controls_fail_with_serialized_witnesses() {
    let cfg = CheckConfig::default();

    let sq = corpus::overlapping_pullback(4).unwrap();
    let r1 = check_pullback_universal("c8.overlap", &sq, &[], &cfg);
    let w1 = r1.witness.clone().unwrap_or_default();
    let pullback_bad = r1.status == Status::Fail
        && w1["kernel_vector"].is_array()
        && serde_json::to_string(&r1).is_ok();

    let po = corpus::non_generating_pushout(4).unwrap();
    let r2 = check_pushout_universal("c8.pushout", &po, &cfg);
    let w2 = r2.witness.clone().unwrap_or_default();
    let pushout_bad = r2.status == Status::Fail && w2["kind"] == "legs_do_not_generate";

    let pair = corpus::broken_collar_pair(4).unwrap();
    let r3 = check_ndr_pair("c8.ndr", &pair, &cfg).unwrap();
    let w3 = r3.witness.clone().unwrap_or_default();
    let ndr_bad = r3.status == Status::Fail
        && w3["failed_conditions"]
            .as_array()
            .is_some_and(|cs| cs.iter().any(|c| c.to_string().contains("identity")));

    // the same controls drive the script front end to a nonzero exit
    let script =
        std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scripts/controls.nccw");
    let status = std::process::Command::new(env!("CARGO_BIN_EXE_nccw"))
        .arg("run")
        .arg(&script)
        .args(["--resolution", "4"])
        .stdout(std::process::Stdio::null())
        .status()
        .expect("binary runs");
    let exit_one = status.code() == Some(1);

    let ok = pullback_bad && pushout_bad && ndr_bad && exit_one;
    verdict(
        8,
        ok,
        format!(
            "pullback witness: {pullback_bad}, pushout witness: {pushout_bad}, retract witness: {ndr_bad}, exit 1: {exit_one}"
        ),
    );
}
