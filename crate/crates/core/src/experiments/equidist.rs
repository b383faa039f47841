use std::collections::BTreeMap;
use std::time::Instant;

use rand::SeedableRng;
use rand_distr::weighted::WeightedAliasIndex;
use rand_distr::Distribution;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::experiments::config::Config;
use crate::experiments::report::{Check, ExperimentReport, Status};
use crate::lie::GroupElement;
use crate::random::Rand;
use crate::systole::{haar_sample_quotient, systole};
use crate::tori::{TorusFrame, TorusRecord};
use crate::volume::vol_dt;

/// Bounded `Γ`- and `M`-invariant functions on `SL(2, Z)\SL(2, R)`, built
/// from the height `1/s` and the direction of a shortest lattice vector.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Observable {
    One,
    /// Piecewise-linear indicator of `lo <= height <= hi` with ramps of width `soft`.
    Band { lo: f64, hi: f64, soft: f64 },
    /// `min(height, cap)`.
    Cap(f64),
    /// `(1 + cos 2θ) / 2` for the angle `θ` of a shortest vector.
    Direction,
}

impl Observable {
    pub fn name(&self) -> String {
        match self {
            Observable::One => "one".into(),
            Observable::Band { lo, hi, .. } => format!("band[{lo},{hi}]"),
            Observable::Cap(c) => format!("cap{c}"),
            Observable::Direction => "direction".into(),
        }
    }

    fn eval(&self, height: f64, angle: f64) -> f64 {
        match *self {
            Observable::One => 1.0,
            Observable::Band { lo, hi, soft } => {
                if height < lo {
                    (1.0 - (lo - height) / soft).max(0.0)
                } else if height > hi {
                    (1.0 - (height - hi) / soft).max(0.0)
                } else {
                    1.0
                }
            }
            Observable::Cap(c) => height.min(c),
            Observable::Direction => 0.5 * (1.0 + (2.0 * angle).cos()),
        }
    }
}

/// Height and shortest-vector angle of `Z^2 g`.
fn height_angle(g: &GroupElement) -> (f64, f64) {
    let s = systole(g);
    let m = g.matrix();
    let v: Vec<f64> = (0..2).map(|j| (0..2).map(|i| s.witness[i] as f64 * m[(i, j)]).sum()).collect();
    (1.0 / s.length, v[1].atan2(v[0]))
}

const CHUNK: usize = 1 << 14;

/// Sums and sums of squares of each statistic over `n` draws, deterministic in `seed`.
fn sample_sums<F>(n: usize, seed: u64, k: usize, draw: F) -> Result<(Vec<f64>, Vec<f64>)>
where
    F: Fn(&mut Rand) -> Result<Vec<f64>> + Sync,
{
    let chunks = n.div_ceil(CHUNK);
    let parts: Vec<(Vec<f64>, Vec<f64>)> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = Rand::seed_from_u64(seed);
            rng.set_stream(c as u64);
            let (mut s, mut s2) = (vec![0.0; k], vec![0.0; k]);
            for _ in 0..CHUNK.min(n - c * CHUNK) {
                for (j, v) in draw(&mut rng)?.into_iter().enumerate() {
                    s[j] += v;
                    s2[j] += v * v;
                }
            }
            Ok((s, s2))
        })
        .collect::<Result<_>>()?;
    let mut s = vec![0.0; k];
    let mut s2 = vec![0.0; k];
    for (a, b) in parts {
        for j in 0..k {
            s[j] += a[j];
            s2[j] += b[j];
        }
    }
    Ok((s, s2))
}

fn mean_se(s: f64, s2: f64, n: usize) -> (f64, f64) {
    let n = n.max(1) as f64;
    let m = s / n;
    (m, ((s2 / n - m * m).max(0.0) / n).sqrt())
}

/// Draws points of the tori weighted by `vol_a`, i.e. from `M^T` normalized.
struct TorusMixture<'a> {
    records: Vec<&'a TorusRecord>,
    index: WeightedAliasIndex<f64>,
}

impl<'a> TorusMixture<'a> {
    fn new(records: &'a [TorusRecord], t: f64, primitive_only: bool) -> Result<Self> {
        let records: Vec<&TorusRecord> = records
            .iter()
            .filter(|r| r.lambda_norm() <= t)
            .filter(|r| !primitive_only || {
                let p: f64 = r.periods[0].iter().map(|x| x * x).sum::<f64>().sqrt();
                (r.lambda_norm() - p).abs() <= 1e-9 * p
            })
            .collect();
        if records.is_empty() {
            return Err(Error::InvalidArgument(format!("no tori with ||λ|| <= {t}")));
        }
        let index = WeightedAliasIndex::new(records.iter().map(|r| r.vol_a).collect())
            .map_err(|e| Error::InvalidArgument(e.to_string()))?;
        Ok(Self { records, index })
    }

    fn draw(&self, rng: &mut Rand) -> Result<GroupElement> {
        let r = self.records[self.index.sample(rng)];
        TorusFrame::new(r)?.sample_element(rng)
    }

    fn total_weight(&self) -> f64 {
        self.records.iter().map(|r| r.vol_a).sum()
    }
}

/// Equidistribution of the tori with `||λ|| <= t` against the Haar measure,
/// plus the non-escape profile over `grid`.
///
/// For each observable `f` the ratio `M^T(f) / M^T(1)` is compared with
/// `m(f) / m(1)`; the unknown normalizing constant cancels.
pub fn equidist_check(
    records: &[TorusRecord],
    t: f64,
    grid: &[f64],
    cfg: &Config,
) -> Result<(ExperimentReport, ExperimentReport)> {
    let started = Instant::now();
    if records.iter().any(|r| r.d != 2) {
        return Err(Error::Unsupported("equidistribution check needs d = 2".into()));
    }
    let obs = [
        Observable::One,
        Observable::Band { lo: cfg.band_lo, hi: cfg.band_hi, soft: cfg.band_soft },
        Observable::Cap(cfg.height_cap),
        Observable::Direction,
    ];
    let mut params = BTreeMap::new();
    params.insert("T".into(), t.to_string());
    params.insert("observables".into(), obs.iter().map(|o| o.name()).collect::<Vec<_>>().join(";"));
    params.insert("torus_samples".into(), cfg.torus_samples.to_string());
    params.insert("haar_samples".into(), cfg.haar_samples.to_string());
    params.insert("equidist_tol".into(), cfg.equidist_tol.to_string());
    params.insert("primitive_only".into(), cfg.primitive_only.to_string());
    let mut report = ExperimentReport::new("equidist-check", cfg.seed, params.clone())?;
    if cfg.primitive_only {
        report.notes.push("primitive classes only: a conjectural variant, not covered by the theorem".into());
    }

    let mixture = TorusMixture::new(records, t, cfg.primitive_only)?;
    let eval_all = |g: &GroupElement| {
        let (h, a) = height_angle(g);
        obs.iter().map(|o| o.eval(h, a)).collect::<Vec<f64>>()
    };
    let k = obs.len();
    let (ts, ts2) = sample_sums(cfg.torus_samples, cfg.seed, k, |rng| Ok(eval_all(&mixture.draw(rng)?)))?;
    let (hs, hs2) =
        sample_sums(cfg.haar_samples, cfg.seed ^ 0x9e37_79b9, k, |rng| Ok(eval_all(&haar_sample_quotient(2, rng)?)))?;
    for (j, o) in obs.iter().enumerate() {
        let (tm, tse) = mean_se(ts[j], ts2[j], cfg.torus_samples);
        let (hm, hse) = mean_se(hs[j], hs2[j], cfg.haar_samples);
        let ratio = tm / hm;
        let rel = (ratio - 1.0).abs();
        report.push_row(vec![t, j as f64, tm, tse, hm, hse, ratio, rel]);
        if *o == Observable::One {
            report.checks.push(Check::new("constant-ratio", ratio == 1.0, format!("{ratio}")));
            continue;
        }
        // Two standard errors of the ratio, relative.
        let noise = 2.0 * ((tse / tm).powi(2) + (hse / hm).powi(2)).sqrt();
        let mut c = Check::new(&format!("ratio-{}", o.name()), rel <= cfg.equidist_tol, format!(
            "M^T ratio {tm:.5} ± {tse:.5}, Haar {hm:.5} ± {hse:.5}, relative error {rel:.4} (noise {noise:.4})"
        ));
        if noise > cfg.equidist_tol {
            c.status = Status::Inconclusive;
        }
        report.checks.push(c);
    }
    report.fitted.insert("M_T_total_over_vol".into(), mixture.total_weight() / vol_dt(2, t));
    report.finish(started);

    // Mass above heights: fixed levels and the schedule R_T = exp(theta T).
    let started = Instant::now();
    let mut params = params;
    params.insert("grid".into(), format!("{grid:?}"));
    params.insert("theta".into(), cfg.theta.to_string());
    let mut esc = ExperimentReport::new("non-escape", cfg.seed, params)?;
    let levels = [1.5, 2.0, 3.0, 5.0, 8.0];
    let n = (cfg.torus_samples / 4).max(1);
    let haar_n = cfg.haar_samples;
    let mut schedule = Vec::new();
    let mut monotone_in_r = true;
    let mut key_ratio: f64 = 0.0;
    for &tt in grid {
        let mix = TorusMixture::new(records, tt, cfg.primitive_only)?;
        let rt = (cfg.theta * tt).exp();
        let band_lo = (cfg.theta * tt / 8.0).exp();
        let mut thresholds: Vec<f64> = levels.to_vec();
        thresholds.push(rt);
        let nt = thresholds.len();
        let ind = |h: f64| {
            let mut v: Vec<f64> = thresholds.iter().map(|&r| f64::from(h > r)).collect();
            v.push(f64::from(h > band_lo && h <= rt));
            v
        };
        let (s, _) = sample_sums(n, cfg.seed.wrapping_add(tt.to_bits()), nt + 1, |rng| Ok(ind(height_angle(&mix.draw(rng)?).0)))?;
        let (hsum, _) = sample_sums(haar_n, cfg.seed ^ 0x9e37_79b9, nt, |rng| {
            let h = height_angle(&haar_sample_quotient(2, rng)?).0;
            Ok(thresholds.iter().map(|&r| f64::from(h > r)).collect())
        })?;
        for i in 0..nt {
            esc.push_row(vec![tt, thresholds[i], s[i] / n as f64, hsum[i] / haar_n as f64]);
        }
        let above: Vec<f64> = s[..levels.len()].iter().map(|x| x / n as f64).collect();
        monotone_in_r &= above.windows(2).all(|w| w[1] <= w[0]);
        let mass_rt = s[nt - 1] / n as f64;
        let band = s[nt] / n as f64;
        if band > 0.0 {
            key_ratio = key_ratio.max(mass_rt / band);
        }
        schedule.push(mass_rt);
    }
    let decreasing = schedule.windows(2).all(|w| w[1] < w[0]);
    esc.checks.push(Check::new("mass-decreasing-in-R", monotone_in_r, format!("levels {levels:?}")));
    esc.checks.push(Check::new(
        "mass-above-schedule-decreasing-in-T",
        decreasing,
        format!("mass above exp(theta T): {schedule:?}"),
    ));
    esc.fitted.insert("key_constant".into(), key_ratio);
    esc.checks.push(
        Check::new("mass-above-vs-band", key_ratio.is_finite(), format!(
            "largest mass(> e^(theta T)) / mass(e^(theta T/8), e^(theta T)] = {key_ratio:.4}"
        ))
        .info(),
    );
    esc.finish(started);
    Ok((report, esc))
}
