mod common;

use common::brute;
use flattori::lattice::{count, count_strip, enumerate, EnumConfig, IntegerGroupElement};
use flattori::lie::{cartan_at, GroupElement};
use flattori::random::{random_kak_element, seeded};

#[test]
fn matches_brute_force_in_dimension_two() {
    for t in [0.5, 1.0, 2.0, 2.5, 3.0] {
        // Entries are bounded by the largest singular value exp(t / sqrt 2).
        let m = (t / 2f64.sqrt()).exp().floor() as i64;
        let want = brute(2, m, t);
        let got: Vec<Vec<i64>> = enumerate(&EnumConfig::new(2, t)).unwrap().iter().map(|g| g.entries().to_vec()).collect();
        assert_eq!(got, want, "t = {t}");
    }
}

#[test]
fn matches_brute_force_in_dimension_three() {
    for t in [0.8, 1.2, 1.5] {
        let m = (t * (2.0f64 / 3.0).sqrt()).exp().floor() as i64;
        let want = brute(3, m, t);
        let got: Vec<Vec<i64>> = enumerate(&EnumConfig::new(3, t)).unwrap().iter().map(|g| g.entries().to_vec()).collect();
        assert_eq!(got.len(), want.len(), "t = {t}");
        assert_eq!(got, want, "t = {t}");
    }
}

#[test]
fn output_is_closed_under_inverse() {
    for (d, t) in [(2, 4.0), (3, 2.5)] {
        let all = enumerate(&EnumConfig::new(d, t)).unwrap();
        for g in &all {
            assert!(all.binary_search(&g.inverse()).is_ok());
        }
    }
}

#[test]
fn basepoint_filter_is_exact() {
    let mut rng = seeded(21);
    for d in [2, 3] {
        let h = random_kak_element(d, 0.3, &mut rng);
        let t = if d == 2 { 3.0 } else { 1.6 };
        let got = enumerate(&EnumConfig::new(d, t).with_basepoint(h.clone())).unwrap();
        let wide = enumerate(&EnumConfig::new(d, t + 0.6)).unwrap();
        let want: Vec<IntegerGroupElement> = wide
            .into_iter()
            .filter(|g| cartan_at(&g.to_group_element(), &h).unwrap().norm() <= t)
            .collect();
        assert_eq!(got, want);
    }
}

#[test]
fn shifted_counts_are_sandwiched() {
    // ||a_x(g) - a(g)|| <= 2 d(o, x) gives count_{t-2r}(o) <= count_t(x) <= count_{t+2r}(o).
    let mut rng = seeded(5);
    let h = random_kak_element(2, 0.25, &mut rng);
    let r = flattori::lie::symmetric_distance(&GroupElement::identity(2), &h).unwrap();
    let t = 6.0;
    let cx = count(&EnumConfig::new(2, t).with_basepoint(h)).unwrap();
    assert!(count(&EnumConfig::new(2, t - 2.0 * r)).unwrap() <= cx);
    assert!(cx <= count(&EnumConfig::new(2, t + 2.0 * r)).unwrap());
}

#[test]
fn strip_fraction_decreases() {
    let mut prev = f64::INFINITY;
    for t in [6.0, 8.0, 10.0] {
        let c = count_strip(&EnumConfig::new(2, t).with_strip(0.1 * t)).unwrap();
        assert_eq!(c.total, count(&EnumConfig::new(2, t)).unwrap());
        assert!(c.regular <= c.total);
        let frac = c.strip as f64 / c.total as f64;
        assert!(frac < prev, "t = {t}: {frac} >= {prev}");
        prev = frac;
    }
}

#[test]
fn congruence_filter() {
    let mut cfg = EnumConfig::new(2, 4.0);
    cfg.congruence = Some(3);
    let sub = enumerate(&cfg).unwrap();
    assert!(sub.iter().all(|g| g.is_congruent_identity(3)));
    let all = enumerate(&EnumConfig::new(2, 4.0)).unwrap();
    assert_eq!(sub.len(), all.iter().filter(|g| g.is_congruent_identity(3)).count());
}
