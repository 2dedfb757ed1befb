use std::path::{Path, PathBuf};

use blamescope::blame::{discounted_blame, DiscountSpec};
use blamescope::caselog::read_cases_path;
use blamescope::hitl::{build_hitl_scm, empirical_joint, hitl_blame, Binning, FlagPolicy, HitlBlameInput};
use blamescope::model_file::ModelFile;
use blamescope::scm::{abduct, event_probability};
use blamescope::{Assignment, Domain, Scm};

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name)
}

#[test]
fn blame_scenario_file() {
    let m = ModelFile::from_path(&data("blame_scenario.json")).unwrap();
    let r = discounted_blame(
        &m.scm,
        m.action("ai_policy").unwrap(),
        m.action("human_policy").unwrap(),
        m.outcome("harm").unwrap(),
        m.cost("ops").unwrap(),
        &m.discount.unwrap(),
    )
    .unwrap();
    assert!((r.delta - 0.2).abs() < 1e-12);
    assert_eq!((r.cost_a, r.cost_aprime, r.gamma), (2.0, 8.0, 0.25));
    assert!((r.db - 0.05).abs() < 1e-12);
}

#[test]
fn scm_json_round_trip() {
    let m = ModelFile::from_path(&data("xor.json")).unwrap();
    let json = serde_json::to_string(&m.scm).unwrap();
    let back: Scm = serde_json::from_str(&json).unwrap();
    let phi = m.outcome("x1_or_y1").unwrap();
    assert_eq!(event_probability(&back, phi).unwrap(), event_probability(&m.scm, phi).unwrap());
}

#[test]
fn xor_posterior() {
    let m = ModelFile::from_path(&data("xor.json")).unwrap();
    let obs: Assignment = [("Y".to_string(), "1".to_string())].into_iter().collect();
    let post = abduct(&m.scm, &obs).unwrap();
    // Y=1 iff E1 != E2: (0,1) weight 0.15 and (1,0) weight 0.35.
    assert_eq!(post.len(), 2);
    assert!((post.total() - 1.0).abs() < 1e-12);
    let p01 = post.support.iter().find(|(a, _)| a.get("E1") == Some("0")).unwrap().1;
    assert!((p01 - 0.3).abs() < 1e-12);
}

#[test]
fn bundled_log_two_paths_agree() {
    let cases = read_cases_path(&data("synthetic_200.csv")).unwrap();
    let policy = FlagPolicy::new(0.3, 0.7).unwrap();
    let counted = hitl_blame(&HitlBlameInput {
        cases: cases.clone(),
        policy,
        ai_cost: 1.0,
        human_cost: 4.0,
        discount: DiscountSpec::cost_ratio(),
    })
    .unwrap();
    let joint = empirical_joint(&cases, Binning::PolicyAligned, &policy).unwrap();
    let exact = build_hitl_scm(&Domain::binary(), Binning::PolicyAligned, &joint, &policy)
        .unwrap()
        .blame(1.0, 4.0, &DiscountSpec::cost_ratio())
        .unwrap();
    assert!((exact.p_a - counted.blame.p_a).abs() < 1e-12);
    assert!((exact.p_aprime - counted.blame.p_aprime).abs() < 1e-12);
    assert!((exact.cost_a - counted.blame.cost_a).abs() < 1e-12);
    assert!((exact.db - counted.blame.db).abs() < 1e-12);
}
