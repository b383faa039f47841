//! Joint distribution of the attracting and repelling flags of lattice points.

use rand::SeedableRng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::boundary::{gamma_x_flags, Flag};
use crate::error::{Error, Result};
use crate::lattice::enumerate::{par_fold, EnumConfig};
use crate::lie::{GroupElement, CHAMBER_MARGIN};
use crate::random::{haar_rotation, Rand};
use crate::volume::vol_dt;

/// `1 / vol(SL(2, Z) \ SL(2, R))` with the Haar measure whose ball volume is `vol_dt(2, t)`.
pub const INV_COVOLUME_SL2: f64 = 12.0 * std::f64::consts::SQRT_2;

/// Test function on pairs of flags.
pub type FlagFunction = dyn Fn(&Flag, &Flag) -> f64 + Sync;

#[derive(Clone, Debug)]
pub struct AngularOptions {
    /// Samples of `mu_x ⊗ mu_x` for the reference integral.
    pub mc_samples: usize,
    pub seed: u64,
    /// `1 / vol(Γ \ G)`; without it no reference value is produced.
    pub inv_covolume: Option<f64>,
}

impl AngularOptions {
    pub fn new(d: usize, seed: u64) -> Self {
        Self { mc_samples: 1 << 23, seed, inv_covolume: (d == 2).then_some(INV_COVOLUME_SL2) }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AngularResult {
    pub t: f64,
    /// `(1 / vol D_t) Σ ψ(γ_x^+, γ_x^-)` over Cartan-regular `γ`.
    pub empirical: f64,
    pub reference: Option<f64>,
    /// Monte Carlo standard error of `reference`.
    pub reference_se: Option<f64>,
    pub regular_count: u64,
    pub vol: f64,
}

impl AngularResult {
    pub fn error(&self) -> Option<f64> {
        self.reference.map(|r| (self.empirical - r).abs())
    }
}

/// Angle in `[0, π)` of the line of a flag in the plane.
pub fn flag_angle(f: &Flag) -> f64 {
    let m = f.frame();
    m[(1, 0)].atan2(m[(0, 0)]).rem_euclid(std::f64::consts::PI)
}

/// A `mu_x` sample: the orbit of the standard flag under a Haar rotation of the point `x = h_x o`.
pub fn mu_x_sample(hx: &GroupElement, rng: &mut Rand) -> Flag {
    let k = haar_rotation(hx.dim(), rng);
    Flag::from_frame(&(hx.matrix() * k))
}

/// Mean and standard error of `ψ` under `mu_x ⊗ mu_x`.
pub fn reference_mean(hx: &GroupElement, psi: &FlagFunction, samples: usize, seed: u64) -> (f64, f64) {
    reference_means(hx, &[psi], samples, seed)[0]
}

/// Means and standard errors of several test functions on one shared sample.
pub fn reference_means(hx: &GroupElement, psis: &[&FlagFunction], samples: usize, seed: u64) -> Vec<(f64, f64)> {
    const CHUNK: usize = 1 << 14;
    let k = psis.len();
    let chunks = samples.div_ceil(CHUNK);
    let (s, s2) = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = Rand::seed_from_u64(seed);
            rng.set_stream(c as u64);
            let (mut s, mut s2) = (vec![0.0; k], vec![0.0; k]);
            for _ in 0..CHUNK.min(samples - c * CHUNK) {
                let (x, y) = (mu_x_sample(hx, &mut rng), mu_x_sample(hx, &mut rng));
                for (j, psi) in psis.iter().enumerate() {
                    let v = psi(&x, &y);
                    s[j] += v;
                    s2[j] += v * v;
                }
            }
            (s, s2)
        })
        .reduce(|| (vec![0.0; k], vec![0.0; k]), |mut a, b| {
            for j in 0..k {
                a.0[j] += b.0[j];
                a.1[j] += b.1[j];
            }
            a
        });
    let n = samples.max(1) as f64;
    (0..k)
        .map(|j| {
            let mean = s[j] / n;
            let var = (s2[j] / n - mean * mean).max(0.0);
            (mean, (var / n).sqrt())
        })
        .collect()
}

/// Empirical angular average over `Γ ∩ D_t(x)` against its equidistribution limit.
pub fn angular_statistic(cfg: &EnumConfig, psi: &FlagFunction, opts: &AngularOptions) -> Result<AngularResult> {
    Ok(angular_statistics(cfg, &[psi], opts)?.remove(0))
}

/// Several test functions in one pass over the lattice points.
pub fn angular_statistics(cfg: &EnumConfig, psis: &[&FlagFunction], opts: &AngularOptions) -> Result<Vec<AngularResult>> {
    Ok(angular_grid(cfg, &[cfg.t], psis, opts)?.remove(0))
}

/// Rows of results for each radius in `ts`; the reference integral is sampled once.
pub fn angular_grid(
    cfg: &EnumConfig,
    ts: &[f64],
    psis: &[&FlagFunction],
    opts: &AngularOptions,
) -> Result<Vec<Vec<AngularResult>>> {
    let hx = cfg.basepoint.clone().unwrap_or_else(|| GroupElement::identity(cfg.d));
    let refs: Vec<(Option<f64>, Option<f64>)> = match opts.inv_covolume {
        Some(c) => reference_means(&hx, psis, opts.mc_samples, opts.seed)
            .into_iter()
            .map(|(m, se)| (Some(c * m), Some(c * se)))
            .collect(),
        None => vec![(None, None); psis.len()],
    };
    ts.iter()
        .map(|&t| {
            let cfg = EnumConfig { t, ..cfg.clone() };
            let (sums, regular_count) = regular_sums(&cfg, &hx, psis)?;
            let vol = vol_dt(cfg.d, t);
            Ok(sums
                .into_iter()
                .zip(&refs)
                .map(|(sum, &(reference, reference_se))| AngularResult {
                    t,
                    empirical: sum / vol,
                    reference,
                    reference_se,
                    regular_count,
                    vol,
                })
                .collect())
        })
        .collect()
}

fn regular_sums(cfg: &EnumConfig, hx: &GroupElement, psis: &[&FlagFunction]) -> Result<(Vec<f64>, u64)> {
    let k = psis.len();
    let (sums, regular_count, failures) = par_fold(
        cfg,
        || (vec![0.0f64; k], 0u64, 0u64),
        |acc, g, a| {
            if !a.in_open_chamber(CHAMBER_MARGIN) {
                return;
            }
            match gamma_x_flags(&g.to_group_element(), hx) {
                Ok((plus, minus)) => {
                    for (s, psi) in acc.0.iter_mut().zip(psis) {
                        *s += psi(&plus, &minus);
                    }
                    acc.1 += 1;
                }
                Err(_) => acc.2 += 1,
            }
        },
        |mut a, b| {
            for (x, y) in a.0.iter_mut().zip(&b.0) {
                *x += y;
            }
            (a.0, a.1 + b.1, a.2 + b.2)
        },
    )?;
    if failures > 0 {
        return Err(Error::Degenerate(format!("{failures} regular elements had no Cartan flags")));
    }
    Ok((sums, regular_count))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::count_strip;

    #[test]
    fn zero_and_constant_test_functions() {
        let cfg = EnumConfig::new(2, 4.0);
        let opts = AngularOptions { mc_samples: 1000, ..AngularOptions::new(2, 1) };
        let zero = angular_statistic(&cfg, &|_, _| 0.0, &opts).unwrap();
        assert_eq!(zero.empirical, 0.0);
        assert_eq!(zero.reference, Some(0.0));
        let one = angular_statistic(&cfg, &|_, _| 1.0, &opts).unwrap();
        let c = count_strip(&cfg.clone().with_strip(0.0)).unwrap();
        assert_eq!(one.regular_count, c.regular);
        assert!((one.empirical - c.regular as f64 / one.vol).abs() < 1e-12);
        assert!((one.reference.unwrap() - INV_COVOLUME_SL2).abs() < 1e-12);
        assert_eq!(one.reference_se, Some(0.0));
    }

    #[test]
    fn haar_angles_are_uniform() {
        let psi = |x: &Flag, _: &Flag| (2.0 * flag_angle(x)).cos();
        let (m, se) = reference_mean(&GroupElement::identity(2), &psi, 200_000, 4);
        assert!(m.abs() < 4.0 * se, "{m} ± {se}");
        let sq = |x: &Flag, y: &Flag| (flag_angle(x) - flag_angle(y)).cos().powi(2);
        let (m, se) = reference_mean(&GroupElement::identity(2), &sq, 200_000, 5);
        assert!((m - 0.5).abs() < 4.0 * se);
    }

    #[test]
    fn flag_angle_range() {
        for deg in [0.0f64, 30.0, 90.0, 135.0, 179.0, 200.0, -45.0] {
            let th = deg.to_radians();
            let f = Flag::from_frame(&nalgebra::DMatrix::from_row_slice(2, 2, &[th.cos(), -th.sin(), th.sin(), th.cos()]));
            let want = th.rem_euclid(std::f64::consts::PI);
            let got = flag_angle(&f);
            assert!((0.0..std::f64::consts::PI).contains(&got));
            let diff = (got - want).abs();
            assert!(diff < 1e-12 || (diff - std::f64::consts::PI).abs() < 1e-12, "{deg}: {got} vs {want}");
        }
    }
}
