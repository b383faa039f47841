//! Randomized invariants of the Lie-theoretic and lattice machinery.
//!
//! Each case draws a seed and a dimension; the group elements are built from
//! a seeded generator so that failures shrink to a reproducible seed.

use flattori::boundary::{flag_delta, gromov_product, iwasawa_cocycle, mu_o_sample};
use flattori::lie::{cartan_at, cartan_kak, cartan_projection, symmetric_distance, GroupElement, WeylGeometry};
use flattori::random::{gaussian_group_element, random_kak_element, seeded};
use flattori::systole::{siegel_reduce, systole};
use proptest::prelude::*;

fn max_abs(m: &nalgebra::DMatrix<f64>) -> f64 {
    m.iter().fold(0.0, |a, x| a.max(x.abs()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn kak_reconstructs(seed in any::<u64>(), d in 2usize..=4) {
        let g = gaussian_group_element(d, &mut seeded(seed));
        let kak = cartan_kak(&g).unwrap();
        let scale = max_abs(g.matrix()).max(1.0);
        prop_assert!(max_abs(&(kak.reconstruct() - g.matrix())) / scale < 1e-10);
        prop_assert!(kak.a.in_closed_chamber(1e-12));
        let eye = nalgebra::DMatrix::<f64>::identity(d, d);
        prop_assert!(max_abs(&(kak.k.transpose() * &kak.k - &eye)) < 1e-10);
        prop_assert!(max_abs(&(kak.l.transpose() * &kak.l - &eye)) < 1e-10);
    }

    #[test]
    fn cartan_projection_of_inverse_is_opposite(seed in any::<u64>(), d in 2usize..=4) {
        let g = gaussian_group_element(d, &mut seeded(seed));
        let w = WeylGeometry::new(d).unwrap();
        let a = cartan_projection(&g).unwrap();
        let b = cartan_projection(&g.inverse()).unwrap();
        prop_assert!(w.opposition(&a).max_abs_diff(&b) < 1e-8);
    }

    #[test]
    fn cocycle_identity(seed in any::<u64>(), d in 2usize..=4) {
        let mut rng = seeded(seed);
        let g = random_kak_element(d, 2.0, &mut rng);
        let h = random_kak_element(d, 2.0, &mut rng);
        let xi = mu_o_sample(d, &mut rng);
        let lhs = iwasawa_cocycle(&g.mul(&h), &xi);
        let rhs = iwasawa_cocycle(&g, &xi.act(&h)).add(&iwasawa_cocycle(&h, &xi));
        prop_assert!(lhs.max_abs_diff(&rhs) < 1e-9, "{lhs:?} vs {rhs:?}");
    }

    #[test]
    fn cartan_projection_is_one_lipschitz(seed in any::<u64>(), d in 2usize..=4) {
        let mut rng = seeded(seed);
        let g = random_kak_element(d, 3.0, &mut rng);
        let h = random_kak_element(d, 3.0, &mut rng);
        let gap = cartan_projection(&g.mul(&h)).unwrap().sub(&cartan_projection(&g).unwrap()).norm();
        prop_assert!(gap <= cartan_projection(&h).unwrap().norm() + 1e-9);
    }

    #[test]
    fn base_point_shift_bound(seed in any::<u64>(), d in 2usize..=3) {
        let mut rng = seeded(seed);
        let g = gaussian_group_element(d, &mut rng);
        let x = random_kak_element(d, 2.0, &mut rng);
        let y = random_kak_element(d, 2.0, &mut rng);
        let gap = cartan_at(&g, &x).unwrap().sub(&cartan_at(&g, &y).unwrap()).norm();
        prop_assert!(gap <= 2.0 * symmetric_distance(&x, &y).unwrap() + 1e-8);
    }

    #[test]
    fn systole_moves_at_most_exponentially(seed in any::<u64>(), d in 2usize..=3) {
        let mut rng = seeded(seed);
        let x = gaussian_group_element(d, &mut rng);
        let b = random_kak_element(d, 1.5, &mut rng);
        let len = cartan_projection(&b).unwrap().norm();
        let ratio = systole(&x.mul(&b)).length / systole(&x).length;
        prop_assert!(ratio <= len.exp() * (1.0 + 1e-9) && ratio >= (-len).exp() * (1.0 - 1e-9), "ratio {ratio}, |b| {len}");
    }

    #[test]
    fn siegel_reduction_is_in_the_domain(seed in any::<u64>(), d in 2usize..=3) {
        let g = gaussian_group_element(d, &mut seeded(seed));
        let f = siegel_reduce(&g).unwrap();
        prop_assert!(f.in_domain(1e-9));
        let s = systole(&g).length;
        let ad = f.a_last();
        prop_assert!(s <= ad * (1.0 + 1e-9));
        prop_assert!(s >= ad * f.u0.powi(d as i32 - 1) * (1.0 - 1e-9));
    }

    #[test]
    fn delta_is_symmetric_and_bounded(seed in any::<u64>(), d in 2usize..=4) {
        let mut rng = seeded(seed);
        let xi = mu_o_sample(d, &mut rng);
        let eta = mu_o_sample(d, &mut rng);
        let a = flag_delta(&xi, &eta);
        prop_assert!((a - flag_delta(&eta, &xi)).abs() < 1e-12);
        prop_assert!((0.0..=1.0 + 1e-12).contains(&a));
    }

    #[test]
    fn gromov_product_is_invariant(seed in any::<u64>(), d in 2usize..=3) {
        let mut rng = seeded(seed);
        let xi = mu_o_sample(d, &mut rng);
        let eta = mu_o_sample(d, &mut rng);
        let hx = random_kak_element(d, 1.0, &mut rng);
        let g = random_kak_element(d, 1.0, &mut rng);
        let before = gromov_product(&xi, &eta, &hx).unwrap();
        let after = gromov_product(&xi.act(&g), &eta.act(&g), &g.mul(&hx)).unwrap();
        prop_assert!(before.max_abs_diff(&after) < 1e-8, "{before:?} vs {after:?}");
    }
}

#[test]
fn identity_has_zero_cartan_projection() {
    for d in 2..=4 {
        assert!(cartan_projection(&GroupElement::identity(d)).unwrap().norm() < 1e-12);
    }
}
