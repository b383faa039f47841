//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use std::collections::BTreeSet;

use flattori::lie::{cartan_projection, GroupElement};
use nalgebra::DMatrix;
use rayon::prelude::*;

/// Gauss-reduced indefinite forms: `|√D - 2|a|| < b < √D`.
fn gauss_reduced(a: i64, b: i64, dd: i64) -> bool {
    let s = (dd as f64).sqrt();
    b > 0 && (b as f64) < s && (s - 2.0 * a.abs() as f64).abs() < b as f64
}

/// Gauss's reduction step `(a, b, c) -> (c, b', a')` with `b' ≡ -b (mod 2c)` in the reduced window.
fn rho(f: (i64, i64, i64), dd: i64) -> (i64, i64, i64) {
    let (_, b, c) = f;
    let s = (dd as f64).sqrt();
    let m = 2 * c.abs();
    let mut nb = (-b).rem_euclid(m);
    // Largest representative below √D, then check the window.
    while (nb as f64) < s {
        nb += m;
    }
    nb -= m;
    if nb as f64 <= s - m as f64 {
        nb += m;
    }
    let na = (nb * nb - dd) / (4 * c);
    (c, nb, na)
}

/// Number of proper classes of forms of discriminant `dd`: the number of `rho`-cycles.
pub fn gauss_class_number(dd: i64) -> usize {
    let mut reduced = BTreeSet::new();
    let s = (dd as f64).sqrt() as i64 + 1;
    for a in -s..=s {
        if a == 0 {
            continue;
        }
        for b in 1..=s {
            if (b * b - dd) % (4 * a) == 0 && gauss_reduced(a, b, dd) {
                reduced.insert((a, b, (b * b - dd) / (4 * a)));
            }
        }
    }
    let mut seen = BTreeSet::new();
    let mut cycles = 0;
    for &f in &reduced {
        if seen.contains(&f) {
            continue;
        }
        cycles += 1;
        let mut g = f;
        while seen.insert(g) {
            g = rho(g, dd);
            assert!(reduced.contains(&g), "rho left the reduced set at {g:?}");
        }
    }
    cycles
}

fn det2(e: &[i64]) -> i64 {
    e[0] * e[3] - e[1] * e[2]
}

fn det3(e: &[i64]) -> i64 {
    e[0] * (e[4] * e[8] - e[5] * e[7]) - e[1] * (e[3] * e[8] - e[5] * e[6]) + e[2] * (e[3] * e[7] - e[4] * e[6])
}

fn in_ball(d: usize, e: &[i64], t: f64) -> bool {
    let g = GroupElement::from_matrix_unchecked(DMatrix::from_fn(d, d, |i, j| e[i * d + j] as f64));
    cartan_projection(&g).unwrap().norm() <= t
}

/// Every matrix with entries in `[-m, m]`, filtered by determinant and Cartan norm.
pub fn brute(d: usize, m: i64, t: f64) -> Vec<Vec<i64>> {
    let side = (2 * m + 1) as u64;
    let total = side.pow((d * d) as u32);
    let mut out: Vec<Vec<i64>> = (0..total)
        .into_par_iter()
        .filter_map(|mut code| {
            let mut e = vec![0i64; d * d];
            for x in e.iter_mut() {
                *x = (code % side) as i64 - m;
                code /= side;
            }
            let det = if d == 2 { det2(&e) } else { det3(&e) };
            (det == 1 && in_ball(d, &e, t)).then_some(e)
        })
        .collect();
    out.sort();
    out
}
