use std::collections::BTreeMap;
use std::time::Instant;

use crate::error::{Error, Result};
use crate::experiments::config::Config;
use crate::experiments::report::{Check, ExperimentReport};
use crate::volume::{delta0, VolumeTable};

/// Volume growth of `D_t` and the relative size of its boundary strips.
///
/// `strips` are relative widths: the strip at `t` has width `s t`.
pub fn volume_check(d: usize, grid: &[f64], strips: &[f64], cfg: &Config) -> Result<(VolumeTable, ExperimentReport)> {
    let started = Instant::now();
    if grid.is_empty() || grid.iter().any(|&t| !(t > 0.0)) {
        return Err(Error::InvalidArgument("grid must be nonempty and positive".into()));
    }
    if strips.iter().any(|&s| !(s > 0.0 && s < 1.0)) {
        return Err(Error::InvalidArgument("relative strip widths must lie in (0, 1)".into()));
    }
    let mut params = BTreeMap::new();
    params.insert("d".into(), d.to_string());
    params.insert("grid".into(), format!("{grid:?}"));
    params.insert("strips".into(), format!("{strips:?}"));
    params.insert("delta0_tol".into(), cfg.delta0_tol.to_string());
    let mut report = ExperimentReport::new("volume", cfg.seed, params)?;
    let table = VolumeTable::build(d, grid, strips, true);
    for row in &table.rows {
        let lv = row.vol.ln() / row.t;
        if strips.is_empty() {
            report.push_row(vec![row.t, f64::NAN, row.vol, f64::NAN, f64::NAN, lv, row.logslope]);
        }
        for (s, vs) in strips.iter().zip(&row.vol_strip) {
            report.push_row(vec![row.t, *s, row.vol, *vs, vs / row.vol, lv, row.logslope]);
        }
    }
    let d0 = delta0(d);
    let top = table.rows.iter().max_by(|a, b| a.t.total_cmp(&b.t)).unwrap();
    let rel = (top.vol.ln() / top.t - d0).abs() / d0;
    report.checks.push(Check::new(
        "delta0-slope",
        rel <= cfg.delta0_tol,
        format!("log vol / t = {:.5} at t = {} against {d0:.5}: relative gap {rel:.4}", top.vol.ln() / top.t, top.t),
    ));
    report.checks.push(
        Check::new(
            "local-slope",
            (top.logslope / d0 - 1.0).abs() <= cfg.delta0_tol,
            format!("d log vol / dt = {:.5} at t = {}", top.logslope, top.t),
        )
        .info(),
    );
    let mut rows = table.rows.clone();
    rows.sort_by(|a, b| a.t.total_cmp(&b.t));
    for (k, s) in strips.iter().enumerate() {
        let ratios: Vec<f64> = rows.iter().map(|r| r.vol_strip[k] / r.vol).collect();
        report.checks.push(Check::new(
            &format!("strip-ratio-decreasing-{s}"),
            ratios.windows(2).all(|w| w[1] < w[0]),
            format!("{ratios:?}"),
        ));
        // Measured decay exponent log(strip ratio) / log vol.
        let exps: Vec<f64> = rows.iter().filter(|r| r.t >= 20.0).map(|r| (r.vol_strip[k] / r.vol).ln() / r.vol.ln()).collect();
        if let Some(e) = exps.last() {
            report.fitted.insert(format!("strip_exponent_{s}"), *e);
            report.checks.push(Check::new(&format!("strip-exponent-negative-{s}"), exps.iter().all(|e| *e < 0.0), format!("{exps:?}")).info());
        }
    }
    report.fitted.insert("delta0".into(), d0);
    report.fitted.insert("logvol_over_t_top".into(), top.vol.ln() / top.t);
    report.finish(started);
    Ok((table, report))
}
