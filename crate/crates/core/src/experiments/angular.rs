use std::collections::BTreeMap;
use std::time::Instant;

use crate::boundary::Flag;
use crate::error::{Error, Result};
use crate::experiments::config::Config;
use crate::experiments::report::{Check, ExperimentReport};
use crate::lattice::angular::FlagFunction;
use crate::lattice::enumerate::EnumConfig;
use crate::lattice::{angular_grid, flag_angle, AngularOptions};

/// Test functions of the attracting and repelling flag angles in the plane.
///
/// `cos 2θ` alone is useless here: conjugating by the quarter turn in
/// `SL(2, Z)` shifts every angle by `π/2`, so its lattice sum vanishes
/// identically. The fourth harmonics are invariant under that symmetry.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Harmonic {
    One,
    /// `cos 4θ⁺`, mean zero.
    Cos4Plus,
    /// `cos 4θ⁺ · cos 4θ⁻`, mean zero.
    Cos4Product,
    /// `cos² 2θ⁺`, mean one half.
    Cos2PlusSquared,
}

impl Harmonic {
    pub fn name(&self) -> &'static str {
        match self {
            Harmonic::One => "one",
            Harmonic::Cos4Plus => "cos4_plus",
            Harmonic::Cos4Product => "cos4_plus_cos4_minus",
            Harmonic::Cos2PlusSquared => "cos2_plus_squared",
        }
    }

    pub fn mean_zero(&self) -> bool {
        matches!(self, Harmonic::Cos4Plus | Harmonic::Cos4Product)
    }

    pub fn eval(&self, plus: &Flag, minus: &Flag) -> f64 {
        let (p, m) = (flag_angle(plus), flag_angle(minus));
        match self {
            Harmonic::One => 1.0,
            Harmonic::Cos4Plus => (4.0 * p).cos(),
            Harmonic::Cos4Product => (4.0 * p).cos() * (4.0 * m).cos(),
            Harmonic::Cos2PlusSquared => (2.0 * p).cos().powi(2),
        }
    }
}

/// The three non-constant harmonics followed by the constant.
pub fn standard_harmonics() -> Vec<Harmonic> {
    vec![Harmonic::Cos4Plus, Harmonic::Cos4Product, Harmonic::Cos2PlusSquared, Harmonic::One]
}

/// Angular averages over `Γ ∩ D_t` for each `t` in `grid` against their limits.
pub fn angular_check(d: usize, grid: &[f64], harmonics: &[Harmonic], cfg: &Config) -> Result<ExperimentReport> {
    let started = Instant::now();
    if d != 2 {
        return Err(Error::Unsupported("angular check needs d = 2".into()));
    }
    if grid.is_empty() || harmonics.is_empty() {
        return Err(Error::InvalidArgument("empty grid or harmonic set".into()));
    }
    let mut params = BTreeMap::new();
    params.insert("d".into(), d.to_string());
    params.insert("grid".into(), format!("{grid:?}"));
    params.insert("harmonics".into(), harmonics.iter().map(|h| h.name()).collect::<Vec<_>>().join(";"));
    params.insert("mc_samples".into(), cfg.mc_samples.to_string());
    params.insert("angular_tol".into(), cfg.angular_tol.to_string());
    let mut report = ExperimentReport::new("angular", cfg.seed, params)?;

    let closures: Vec<Box<FlagFunction>> =
        harmonics.iter().map(|&h| Box::new(move |x: &Flag, y: &Flag| h.eval(x, y)) as Box<FlagFunction>).collect();
    let psis: Vec<&FlagFunction> = closures.iter().map(|b| b.as_ref()).collect();
    let opts = AngularOptions { mc_samples: cfg.mc_samples, ..AngularOptions::new(d, cfg.seed) };
    let top = grid.iter().cloned().fold(f64::MIN, f64::max);
    let base = EnumConfig::new(d, top);
    let results = angular_grid(&base, grid, &psis, &opts)?;

    let (lo_i, hi_i) = {
        let mut idx: Vec<usize> = (0..grid.len()).collect();
        idx.sort_by(|&a, &b| grid[a].total_cmp(&grid[b]));
        (idx[0], idx[idx.len() - 1])
    };
    for (row_t, row) in grid.iter().zip(&results) {
        for (j, r) in row.iter().enumerate() {
            report.push_row(vec![
                *row_t,
                j as f64,
                r.empirical,
                r.reference.unwrap_or(f64::NAN),
                r.reference_se.unwrap_or(f64::NAN),
                r.error().unwrap_or(f64::NAN),
                r.regular_count as f64,
                r.vol,
            ]);
        }
    }
    for (j, h) in harmonics.iter().enumerate() {
        let e_lo = results[lo_i][j].error().unwrap_or(f64::NAN);
        let e_hi = results[hi_i][j].error().unwrap_or(f64::NAN);
        if *h == Harmonic::One {
            let ratios: Vec<f64> = results.iter().map(|row| row[j].empirical).collect();
            let limit = results[0][j].reference.unwrap_or(f64::INFINITY);
            let bounded = ratios.iter().all(|r| r.is_finite() && *r > 0.0 && *r < 2.0 * limit);
            report.checks.push(Check::new("constant-bounded", bounded, format!("count / vol = {ratios:?}")));
            continue;
        }
        report.checks.push(Check::new(
            &format!("error-decays-{}", h.name()),
            e_hi < e_lo,
            format!("error {e_lo:.4e} at t = {} and {e_hi:.4e} at t = {top}", grid[lo_i]),
        ));
        if h.mean_zero() {
            report.checks.push(Check::new(
                &format!("small-at-top-{}", h.name()),
                e_hi <= cfg.angular_tol,
                format!("|empirical| = {e_hi:.4e} vs {}", cfg.angular_tol),
            ));
        }
        // Log-linear decay rate of the error across the grid.
        let pts: Vec<(f64, f64)> = grid
            .iter()
            .zip(&results)
            .filter_map(|(&t, row)| row[j].error().filter(|e| *e > 0.0).map(|e| (t, e.ln())))
            .collect();
        if pts.len() >= 2 {
            let n = pts.len() as f64;
            let mt = pts.iter().map(|p| p.0).sum::<f64>() / n;
            let me = pts.iter().map(|p| p.1).sum::<f64>() / n;
            let cov: f64 = pts.iter().map(|p| (p.0 - mt) * (p.1 - me)).sum();
            let var: f64 = pts.iter().map(|p| (p.0 - mt).powi(2)).sum();
            if var > 0.0 {
                report.fitted.insert(format!("decay_slope_{}", h.name()), cov / var);
            }
        }
    }
    report.finish(started);
    Ok(report)
}
