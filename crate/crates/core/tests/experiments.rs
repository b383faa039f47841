use flattori::experiments::*;
use flattori::tori::{class_census, CensusOptions};

fn small() -> Config {
    Config { mc_samples: 20_000, haar_samples: 1 << 15, torus_samples: 1 << 15, ..Config::default() }
}

#[test]
fn volume_report_passes_and_matches_its_table() {
    let (table, rep) = volume_check(2, &[10.0, 20.0, 30.0, 40.0], &[0.1], &small()).unwrap();
    assert_eq!(rep.status, Status::Pass, "{}", rep.summary());
    assert_eq!(rep.rows.len(), table.rows.len());
    for (r, t) in rep.rows.iter().zip(&table.rows) {
        assert_eq!(r[2], t.vol);
        assert_eq!(r[3], t.vol_strip[0]);
    }
    assert!(volume_check(2, &[], &[0.1], &small()).is_err());
    assert!(volume_check(2, &[5.0], &[1.5], &small()).is_err());
}

#[test]
fn count_check_small_census() {
    let cfg = small();
    let recs = run_census(2, 6.0, &cfg, false).unwrap();
    let rep = count_check(&recs, 6.0, 2, &[4.0, 5.0, 6.0], &cfg).unwrap();
    assert_eq!(rep.check("rank-one-identity").unwrap().status, Status::Pass);
    assert_eq!(rep.check("ratio-positive").unwrap().status, Status::Pass);
    assert_eq!(rep.rows.len(), 3);
    assert!(rep.rows[0][4].is_nan());
    // The grid may not reach beyond the census.
    assert!(count_check(&recs, 6.0, 2, &[7.0], &cfg).is_err());
    assert!(count_check(&recs, 6.0, 3, &[5.0], &cfg).is_err());
}

#[test]
fn census_budget_is_enforced() {
    let cfg = small();
    assert!(census_cost_estimate(3, 4.0).unwrap() > census_cost_estimate(3, 3.0).unwrap());
    let err = run_census(3, 6.0, &cfg, false).unwrap_err();
    assert!(err.to_string().contains("census_budget"), "{err}");
    assert!(census_cost_estimate(4, 2.0).is_err());
}

#[test]
fn census_reruns_are_identical() {
    let opts = CensusOptions::default();
    let mut a = Vec::new();
    let mut b = Vec::new();
    flattori::tori::write_jsonl(&class_census(2, 5.0, &opts).unwrap(), &mut a).unwrap();
    flattori::tori::write_jsonl(&class_census(2, 5.0, &opts).unwrap(), &mut b).unwrap();
    assert_eq!(a, b);
}

#[test]
fn equidist_is_deterministic_and_normalized() {
    let cfg = small();
    let recs = run_census(2, 6.0, &cfg, false).unwrap();
    let (e1, n1) = equidist_check(&recs, 6.0, &[5.0, 6.0], &cfg).unwrap();
    let (e2, n2) = equidist_check(&recs, 6.0, &[5.0, 6.0], &cfg).unwrap();
    assert_eq!(e1.check("constant-ratio").unwrap().status, Status::Pass);
    let bits = |r: &ExperimentReport| r.rows.iter().flatten().map(|x| x.to_bits()).collect::<Vec<_>>();
    assert_eq!(bits(&e1), bits(&e2));
    assert_eq!(bits(&n1), bits(&n2));
    let other = Config { seed: 2, ..cfg.clone() };
    let (e3, _) = equidist_check(&recs, 6.0, &[6.0], &other).unwrap();
    assert_ne!(bits(&e1), bits(&e3));
    let cubic = class_census(3, 2.0, &CensusOptions::default()).unwrap();
    assert!(equidist_check(&cubic, 2.0, &[2.0], &cfg).is_err());
}

#[test]
fn angular_rows_follow_the_schema() {
    let cfg = small();
    let hs = standard_harmonics();
    let rep = angular_check(2, &[3.0, 4.0], &hs, &cfg).unwrap();
    assert_eq!(rep.rows.len(), 2 * hs.len());
    assert!(rep.rows.iter().all(|r| r.len() == rep.columns.len()));
    assert_eq!(rep.check("constant-bounded").unwrap().status, Status::Pass);
    assert!(angular_check(3, &[2.0], &hs, &cfg).is_err());
}
