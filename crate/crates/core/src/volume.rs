//! Volumes of the Cartan-polar balls `D_t = K exp(B(0, t) ∩ a+) K` and of
//! their boundary strips, through the Harish-Chandra density
//! `prod_{i<j} sinh(v_i - v_j)`.
//!
//! The overall normalization of Haar measure is fixed to 1; consumers only use
//! ratios.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_6, SQRT_2};
use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lie::{CartanVector, WeylGeometry};
use crate::quadrature::integrate;
use crate::random::{random_direction, seeded};

const REL_TOL: f64 = 1e-10;

pub fn hc_density(v: &CartanVector) -> Result<f64> {
    if !v.in_closed_chamber(1e-12) {
        return Err(Error::Domain(format!("{:?} is outside the closed positive chamber", v.entries())));
    }
    let w = WeylGeometry { d: v.dim() };
    let e = v.entries();
    Ok(w.positive_roots().map(|(i, j)| (e[i] - e[j]).max(0.0).sinh()).product())
}

/// `2 ||rho||`, the exponential growth rate of `vol(D_t)`.
pub fn delta0(d: usize) -> f64 {
    let n = d as f64;
    2.0 * (n * (n * n - 1.0) / 12.0).sqrt()
}

/// `int_0^R e^{L r} r^k dr` for `k` in {0, 1}.
fn radial_exp_moment(l: f64, r: f64, k: u32) -> f64 {
    let x = l * r;
    if x.abs() < 1e-3 {
        // Taylor series in x.
        let mut term = 1.0;
        let mut sum = 0.0;
        for n in 0..12 {
            sum += term / (n + k + 1) as f64;
            term *= x / (n + 1) as f64;
        }
        return sum * r.powi(k as i32 + 1);
    }
    match k {
        0 => x.exp_m1() / l,
        1 => (x.exp() * (x - 1.0) + 1.0) / (l * l),
        _ => unreachable!(),
    }
}

/// Exponential expansion of `prod sinh(r a_ij)` along a unit direction:
/// pairs `(coefficient, rate)` with `prod sinh(r a) = sum c e^{rate r}`.
fn sinh_product_expansion(alphas: &[f64]) -> Vec<(f64, f64)> {
    let mut terms = vec![(1.0, 0.0)];
    for &a in alphas {
        let mut next = Vec::with_capacity(terms.len() * 2);
        for &(c, l) in &terms {
            next.push((0.5 * c, l + a));
            next.push((-0.5 * c, l - a));
        }
        terms = next;
    }
    terms
}

/// `int_0^R prod sinh(r a_ij(u)) r^{d-2} dr` along the unit direction `u`.
fn radial_integral(u: &[f64], r_max: f64) -> f64 {
    let d = u.len();
    if r_max <= 0.0 {
        return 0.0;
    }
    let alphas: Vec<f64> = (0..d).flat_map(|i| (i + 1..d).map(move |j| (i, j))).map(|(i, j)| u[i] - u[j]).collect();
    let k = (d - 2) as u32;
    let top: f64 = alphas.iter().sum();
    if top * r_max > 3.0 && k <= 1 {
        sinh_product_expansion(&alphas)
            .iter()
            .map(|&(c, l)| c * radial_exp_moment(l, r_max, k))
            .sum()
    } else {
        integrate(
            |r| alphas.iter().map(|a| (r * a).sinh()).product::<f64>() * r.powi(k as i32),
            0.0,
            r_max,
            1e-12,
            0.0,
        )
    }
}

/// Unit vector of the positive chamber for `d = 3` at polar angle `phi`
/// in the basis `(1,-1,0)/sqrt 2`, `(1,1,-2)/sqrt 6`; the chamber is `phi ∈ [pi/6, pi/2]`.
fn polar_direction_3(phi: f64) -> [f64; 3] {
    let (s, c) = phi.sin_cos();
    let s6 = 6f64.sqrt();
    [c / SQRT_2 + s / s6, -c / SQRT_2 + s / s6, -2.0 * s / s6]
}

/// Distance to the chamber walls of the unit direction at angle `phi`.
fn wall_factor_3(phi: f64) -> f64 {
    phi.cos().min((phi - FRAC_PI_6).sin()).max(0.0)
}

/// `vol(D_t)`.
pub fn vol_dt(d: usize, t: f64) -> f64 {
    match d {
        2 => {
            let x = SQRT_2 * t;
            0.5 * (x.exp_m1() + (-x).exp_m1()) / SQRT_2
        }
        3 => integrate(|phi| radial_integral(&polar_direction_3(phi), t), FRAC_PI_6, FRAC_PI_2, REL_TOL, 0.0),
        _ => monte_carlo_volume(d, t, None, 200_000, 0x5eed),
    }
}

/// `vol(D_t)` for `d = 2` by the same quadrature path as higher rank; used to
/// validate the closed form.
pub fn vol_dt_quadrature_2(t: f64) -> f64 {
    integrate(|r| (SQRT_2 * r).sinh(), 0.0, t, REL_TOL, 0.0)
}

/// Volume of `D_t^s`: the part of `D_t` whose Cartan projection lies within
/// distance `s` of the chamber walls.
pub fn vol_dt_s(d: usize, t: f64, s: f64) -> f64 {
    match d {
        2 => vol_dt(2, t.min(s)),
        3 => {
            let f = |phi: f64| {
                let m = wall_factor_3(phi);
                let r = if m * t <= s { t } else { s / m };
                radial_integral(&polar_direction_3(phi), r)
            };
            // The integrand has kinks where s / m(phi) = t and where the two walls tie.
            let mut breaks = vec![FRAC_PI_6, FRAC_PI_2];
            let ratio = s / t;
            if ratio < 1.0 {
                breaks.push(ratio.acos());
                breaks.push(FRAC_PI_6 + ratio.asin());
            }
            breaks.push(FRAC_PI_6 + FRAC_PI_6);
            breaks.retain(|b| (FRAC_PI_6..=FRAC_PI_2).contains(b));
            breaks.sort_by(f64::total_cmp);
            breaks.windows(2).map(|w| integrate(f, w[0], w[1], REL_TOL, 0.0)).sum()
        }
        _ => monte_carlo_volume(d, t, Some(s), 200_000, 0x5eed),
    }
}

/// Surface area of the unit sphere in `R^k`.
fn sphere_area(k: usize) -> f64 {
    // 2 pi^{k/2} / Gamma(k/2), via the recursion A_k = 2 pi / (k - 2) A_{k-2}.
    let mut area = if k % 2 == 0 { 2.0 * std::f64::consts::PI } else { 2.0 };
    let mut j = if k % 2 == 0 { 2 } else { 1 };
    while j < k {
        area *= 2.0 * std::f64::consts::PI / j as f64;
        j += 2;
    }
    area
}

/// Direction sampling for `d >= 4`: uniform directions folded into the chamber
/// by sorting, with a numeric radial integral per direction.
fn monte_carlo_volume(d: usize, t: f64, strip: Option<f64>, n: usize, seed: u64) -> f64 {
    let mut rng = seeded(seed);
    let k = d - 1;
    let dirs: Vec<CartanVector> = (0..n).map(|_| random_direction(d, &mut rng).sorted_descending()).collect();
    let mean = dirs
        .par_iter()
        .map(|u| {
            let r = match strip {
                Some(s) => {
                    let m = u.wall_distance();
                    if m * t <= s { t } else { s / m }
                }
                None => t,
            };
            radial_integral_general(u.entries(), r)
        })
        .sum::<f64>()
        / n as f64;
    let factorial: f64 = (1..=d).map(|x| x as f64).product();
    mean * sphere_area(k) / factorial
}

fn radial_integral_general(u: &[f64], r_max: f64) -> f64 {
    let d = u.len();
    if d <= 3 {
        return radial_integral(u, r_max);
    }
    let k = (d - 2) as i32;
    integrate(
        |r| {
            let mut p = r.powi(k);
            for i in 0..d {
                for j in i + 1..d {
                    p *= (r * (u[i] - u[j])).sinh();
                }
            }
            p
        },
        0.0,
        r_max,
        1e-9,
        0.0,
    )
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VolumeRow {
    pub t: f64,
    pub vol: f64,
    /// `vol(D_t^s)` for each configured `s`, in the order of [`VolumeTable::strips`].
    pub vol_strip: Vec<f64>,
    /// Local slope `d log vol / dt`.
    pub logslope: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VolumeTable {
    pub d: usize,
    pub strips: Vec<f64>,
    pub rows: Vec<VolumeRow>,
}

impl VolumeTable {
    /// Rows for every `t`; strip widths are absolute unless `relative`, in which case
    /// the width at `t` is `s t`.
    pub fn build(d: usize, ts: &[f64], strips: &[f64], relative: bool) -> VolumeTable {
        let rows = ts
            .par_iter()
            .map(|&t| {
                let h = 1e-3 * t.max(1.0);
                let logslope = (vol_dt(d, t + h).ln() - vol_dt(d, (t - h).max(1e-9)).ln()) / (t + h - (t - h).max(1e-9));
                VolumeRow {
                    t,
                    vol: vol_dt(d, t),
                    vol_strip: strips.iter().map(|&s| vol_dt_s(d, t, if relative { s * t } else { s })).collect(),
                    logslope,
                }
            })
            .collect();
        VolumeTable { d, strips: strips.to_vec(), rows }
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        let mut header = vec!["t".to_string(), "vol".to_string()];
        header.extend(self.strips.iter().map(|s| format!("vol_strip_{s}")));
        header.push("logslope".into());
        out.write_record(&header)?;
        for r in &self.rows {
            let mut rec = vec![r.t.to_string(), r.vol.to_string()];
            rec.extend(r.vol_strip.iter().map(|x| x.to_string()));
            rec.push(r.logslope.to_string());
            out.write_record(&rec)?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn save_csv(&self, path: &Path) -> Result<()> {
        self.write_csv(std::fs::File::create(path)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn density_examples() {
        assert_eq!(hc_density(&CartanVector::zero(3)).unwrap(), 0.0);
        let v = CartanVector::new(vec![0.7, -0.7]).unwrap();
        assert!((hc_density(&v).unwrap() - 1.4f64.sinh()).abs() < 1e-15);
        let v = CartanVector::new(vec![1.0, 0.0, -1.0]).unwrap();
        let want = 1f64.sinh().powi(2) * 2f64.sinh();
        assert!((hc_density(&v).unwrap() - want).abs() < 1e-14);
        assert!(hc_density(&CartanVector::new(vec![-1.0, 1.0]).unwrap()).is_err());
    }

    #[test]
    fn delta0_values() {
        assert!((delta0(2) - SQRT_2).abs() < 1e-15);
        assert!((delta0(3) - 2.0 * SQRT_2).abs() < 1e-15);
    }

    #[test]
    fn closed_form_matches_quadrature() {
        for t in [0.1, 1.0, 5.0, 20.0] {
            let a = vol_dt(2, t);
            let b = vol_dt_quadrature_2(t);
            assert!((a / b - 1.0).abs() < 1e-9, "{t}: {a} vs {b}");
        }
        assert!(vol_dt(2, 1e-8) < 1e-15);
        assert!(vol_dt(3, 1e-3) < 1e-12);
    }

    #[test]
    fn three_dim_volume_against_brute_cartesian_grid() {
        // Midpoint rule over the chamber in the orthonormal plane coordinates.
        let t = 2.0;
        let n = 1200;
        let h = 2.0 * t / n as f64;
        let mut sum = 0.0;
        let s6 = 6f64.sqrt();
        for i in 0..n {
            for j in 0..n {
                let x = -t + (i as f64 + 0.5) * h;
                let y = -t + (j as f64 + 0.5) * h;
                if x * x + y * y > t * t {
                    continue;
                }
                let v = [x / SQRT_2 + y / s6, -x / SQRT_2 + y / s6, -2.0 * y / s6];
                if v[0] >= v[1] && v[1] >= v[2] {
                    sum += (v[0] - v[1]).sinh() * (v[1] - v[2]).sinh() * (v[0] - v[2]).sinh();
                }
            }
        }
        let brute = sum * h * h;
        let q = vol_dt(3, t);
        assert!((q / brute - 1.0).abs() < 2e-3, "{q} vs {brute}");
    }

    #[test]
    fn strip_is_bounded_by_total() {
        for t in [5.0, 10.0] {
            let v = vol_dt(3, t);
            let s = vol_dt_s(3, t, 0.1 * t);
            assert!(s > 0.0 && s < v);
            assert!((vol_dt_s(3, t, 2.0 * t) / v - 1.0).abs() < 1e-8);
        }
    }
}
