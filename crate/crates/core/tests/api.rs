//! Integration checks of the public API: the exact and numeric pipelines
//! driven end to end the way an external caller would.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use delpezzo::hlog::RankMethod;
use delpezzo::report::{HlogReport, IdentityReport, Render};
use delpezzo::verify::{
    evaluate_identity, identity_setup_x4, run_identity, verify_hlog, VerifyError,
};
use delpezzo::curves::SurfaceData;
use delpezzo::hlog::TauFamily;

#[test]
fn exact_pipeline_from_surface_to_report() {
    let summary = verify_hlog(6, RankMethod::ExactRational, None).unwrap();
    assert_eq!(summary.r, 6);
    assert_eq!(summary.line_count, 27);
    assert_eq!(summary.conic_count, 27);
    assert_eq!(summary.support_keys, 1080);
    assert!(summary.pair_structure);
    assert!(summary.graph_connected);
    assert_eq!(summary.relation_space_dim, 1);

    let report = HlogReport::from(&summary);
    assert!(report.verified);
    let json: serde_json::Value = serde_json::from_str(&report.to_json()).unwrap();
    assert_eq!(json["relation_space_dim"], 1);
    assert_eq!(json["verified"], true);
}

#[test]
fn numeric_pipeline_from_setup_to_report() {
    let data = SurfaceData::build(4).unwrap();
    let family = TauFamily::build(&data).unwrap();
    let setup = identity_setup_x4(&data, &family).unwrap();

    // A fixed target close to the default base.
    let target = (Complex64::new(0.32, 0.01), Complex64::new(0.57, -0.01));
    let eval = evaluate_identity(&setup, target, 1e-13).unwrap();
    assert!(eval.residual < 1e-12, "residual {}", eval.residual);

    let mut rng = ChaCha12Rng::seed_from_u64(5);
    let evals = run_identity(&setup, 3, 1e-13, &mut rng).unwrap();
    let report = IdentityReport::new(&setup, &evals, 1e-9);
    assert!(report.verified);
    assert_eq!(report.model_count, 5);
    let json: serde_json::Value = serde_json::from_str(&report.to_json()).unwrap();
    assert_eq!(json["evaluations"].as_array().unwrap().len(), 3);
}

#[test]
fn injected_fault_surfaces_as_an_error() {
    match verify_hlog(4, RankMethod::GraphConnectivity, Some(0)) {
        Err(VerifyError::Hlog(_)) => {}
        other => panic!("expected the flipped tau to be rejected, got {other:?}"),
    }
}
