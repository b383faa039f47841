//! `flattori`: census of flat periodic tori and the desk-scale experiments.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use flattori::experiments::{
    angular_check, count_check, equidist_check, run_census, standard_harmonics, volume_check, Config, ExperimentReport, Status,
};
use flattori::tori::{read_jsonl, write_jsonl, TorusRecord};

#[derive(Parser)]
#[command(name = "flattori", version, about = "Periodic flat tori in SL(d,Z)\\SL(d,R) and lattice-point experiments")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct Common {
    /// Plain `key = value` configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Override one configuration key, e.g. `--set count_tol=0.1`. Repeatable.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for the parallel stages.
    #[arg(long, global = true)]
    shards: Option<usize>,
    /// Output path. Reports are written as JSON with the table as CSV beside it.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Enumerate conjugacy classes with ||λ|| <= T and write one JSON record per line.
    Census {
        #[arg(long)]
        d: usize,
        #[arg(long = "T")]
        t: f64,
        /// Run even when the cost estimate exceeds `census_budget`.
        #[arg(long)]
        force: bool,
    },
    /// Stabilization of Σ vol_a / vol(D_T) over a grid of T.
    CountCheck {
        #[arg(long)]
        d: usize,
        #[arg(long = "t-grid", value_delimiter = ',', required = true)]
        t_grid: Vec<f64>,
        /// Census file; computed on the fly (within budget) when absent.
        #[arg(long)]
        census: Option<PathBuf>,
        /// Radius of the census file; defaults to the top of the grid.
        #[arg(long = "T")]
        t: Option<f64>,
    },
    /// Torus averages of height and direction observables against Haar, and non-escape of mass.
    EquidistCheck {
        #[arg(long, default_value_t = 2)]
        d: usize,
        #[arg(long = "T")]
        t: f64,
        /// Grid of the non-escape profile; defaults to the single value T.
        #[arg(long = "t-grid", value_delimiter = ',')]
        t_grid: Vec<f64>,
        #[arg(long)]
        census: Option<PathBuf>,
        /// Primitive classes only (a conjectural variant).
        #[arg(long)]
        primitive_only: bool,
    },
    /// Angular harmonics of attracting and repelling flags over Γ ∩ D_t.
    Angular {
        #[arg(long, default_value_t = 2)]
        d: usize,
        #[arg(long = "t-grid", value_delimiter = ',', required = true)]
        t_grid: Vec<f64>,
    },
    /// Volumes of D_t and of its boundary strips.
    Volume {
        #[arg(long)]
        d: usize,
        #[arg(long = "t-grid", value_delimiter = ',', required = true)]
        t_grid: Vec<f64>,
        /// Relative strip widths s (the strip at t has width s t).
        #[arg(long, value_delimiter = ',', default_values_t = vec![0.05, 0.1])]
        strips: Vec<f64>,
    },
    /// Flatten a JSON report to CSV.
    ///
    /// Columns by experiment:
    ///   count-check:    T, weighted_sum, vol_dt, ratio, rel_change, classes, identity_sum
    ///   equidist-check: T, observable, torus_mean, torus_se, haar_mean, haar_se, ratio, rel_error
    ///   non-escape:     T, R, torus_mass_above, haar_mass_above
    ///   angular:        t, psi, empirical, reference, reference_se, error, regular_count, vol
    ///   volume:         t, s, vol, vol_strip, strip_ratio, logvol_over_t, logslope
    #[command(verbatim_doc_comment)]
    PlotData { report: PathBuf },
}

fn load_config(c: &Common) -> Result<Config> {
    let mut cfg = match &c.config {
        Some(p) => Config::load(p).with_context(|| format!("reading {}", p.display()))?,
        None => Config::default(),
    };
    for kv in &c.overrides {
        let (k, v) = kv.split_once('=').with_context(|| format!("expected KEY=VALUE, got {kv:?}"))?;
        cfg.set(k, v)?;
    }
    if let Some(s) = c.seed {
        cfg.seed = s;
    }
    if let Some(s) = c.shards {
        cfg.shards = s;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn load_census(path: &Path) -> Result<Vec<TorusRecord>> {
    let f = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    Ok(read_jsonl(BufReader::new(f))?)
}

fn records(census: &Option<PathBuf>, d: usize, t: f64, cfg: &Config) -> Result<Vec<TorusRecord>> {
    match census {
        Some(p) => load_census(p),
        None => Ok(run_census(d, t, cfg, false)?),
    }
}

fn emit(report: &ExperimentReport, out: &Option<PathBuf>) -> Result<()> {
    print!("{}", report.summary());
    if let Some(p) = out {
        std::fs::write(p, report.to_json()?)?;
        report.write_csv(File::create(p.with_extension("csv"))?)?;
        eprintln!("wrote {} and {}", p.display(), p.with_extension("csv").display());
    }
    Ok(())
}

fn worst(reports: &[&ExperimentReport]) -> Status {
    if reports.iter().any(|r| r.status == Status::Fail) {
        Status::Fail
    } else if reports.iter().any(|r| r.status == Status::Inconclusive) {
        Status::Inconclusive
    } else {
        Status::Pass
    }
}

fn run(cli: Cli) -> Result<Status> {
    let mut cfg = load_config(&cli.common)?;
    rayon::ThreadPoolBuilder::new().num_threads(if cli.common.shards.is_some() { cfg.shards } else { 0 }).build_global()?;
    let out = &cli.common.out;
    match cli.cmd {
        Cmd::Census { d, t, force } => {
            let recs = run_census(d, t, &cfg, force)?;
            match out {
                Some(p) => {
                    let mut w = BufWriter::new(File::create(p)?);
                    write_jsonl(&recs, &mut w)?;
                    w.flush()?;
                    eprintln!("wrote {} records to {}", recs.len(), p.display());
                }
                None => write_jsonl(&recs, std::io::stdout().lock())?,
            }
            Ok(Status::Pass)
        }
        Cmd::CountCheck { d, t_grid, census, t } => {
            let top = t_grid.iter().cloned().fold(f64::MIN, f64::max);
            let census_t = t.unwrap_or(top);
            let recs = records(&census, d, census_t, &cfg)?;
            let rep = count_check(&recs, census_t, d, &t_grid, &cfg)?;
            emit(&rep, out)?;
            Ok(rep.status)
        }
        Cmd::EquidistCheck { d, t, t_grid, census, primitive_only } => {
            if d != 2 {
                bail!("equidistribution check is implemented for d = 2");
            }
            cfg.primitive_only |= primitive_only;
            let grid = if t_grid.is_empty() { vec![t] } else { t_grid };
            let recs = records(&census, d, t, &cfg)?;
            let (eq, esc) = equidist_check(&recs, t, &grid, &cfg)?;
            emit(&eq, out)?;
            let esc_out = out.as_ref().map(|p| p.with_file_name(format!("{}-non-escape.json", stem(p))));
            emit(&esc, &esc_out)?;
            Ok(worst(&[&eq, &esc]))
        }
        Cmd::Angular { d, t_grid } => {
            let rep = angular_check(d, &t_grid, &standard_harmonics(), &cfg)?;
            emit(&rep, out)?;
            Ok(rep.status)
        }
        Cmd::Volume { d, t_grid, strips } => {
            let (table, rep) = volume_check(d, &t_grid, &strips, &cfg)?;
            emit(&rep, out)?;
            if let Some(p) = out {
                let path = p.with_file_name(format!("{}-table.csv", stem(p)));
                table.save_csv(&path)?;
                eprintln!("wrote {}", path.display());
            } else {
                table.write_csv(std::io::stdout().lock())?;
            }
            Ok(rep.status)
        }
        Cmd::PlotData { report } => {
            let text = std::fs::read_to_string(&report).with_context(|| format!("reading {}", report.display()))?;
            let rep = ExperimentReport::from_json(&text)?;
            match out {
                Some(p) => rep.write_csv(File::create(p)?)?,
                None => rep.write_csv(std::io::stdout().lock())?,
            }
            Ok(Status::Pass)
        }
    }
}

fn stem(p: &Path) -> String {
    p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "report".into())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(Status::Pass) => ExitCode::SUCCESS,
        Ok(Status::Fail) => ExitCode::from(1),
        Ok(Status::Inconclusive) => ExitCode::from(3),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
