use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Every tunable bound, tolerance and seed of the experiments.
///
/// Read from a plain `key = value` file (`#` starts a comment); command-line
/// flags override individual keys afterwards.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Config {
    pub seed: u64,
    /// Box bound of the unit search in the centralizer.
    pub coeff_bound: i64,
    /// Point budget of each conjugacy decision in dimension three.
    pub conjugacy_cap: usize,
    /// Largest estimated census cost accepted without `--force`.
    pub census_budget: f64,
    pub shards: usize,
    pub count_tol: f64,
    pub equidist_tol: f64,
    pub delta0_tol: f64,
    pub angular_tol: f64,
    /// Monte-Carlo samples of the angular reference integral.
    pub mc_samples: usize,
    /// Haar samples on the quotient for equidistribution.
    pub haar_samples: usize,
    /// Torus points for equidistribution (tori drawn with weight `vol_a`).
    pub torus_samples: usize,
    /// Height band of the smoothed indicator observable.
    pub band_lo: f64,
    pub band_hi: f64,
    /// Smoothing width of the band indicator.
    pub band_soft: f64,
    /// Cap of the capped-height observable.
    pub height_cap: f64,
    /// Non-escape threshold exponent: heights above `exp(theta T)`.
    pub theta: f64,
    pub zeta: f64,
    /// Equidistribution over primitive classes only (a conjectural variant).
    pub primitive_only: bool,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            seed: 1,
            coeff_bound: 12,
            conjugacy_cap: 1_000_000,
            census_budget: 5e7,
            shards: 1,
            count_tol: 0.2,
            equidist_tol: 0.15,
            delta0_tol: 0.05,
            angular_tol: 0.05,
            mc_samples: 1 << 23,
            haar_samples: 1 << 20,
            torus_samples: 1 << 20,
            band_lo: 1.1,
            band_hi: 1.6,
            band_soft: 0.05,
            height_cap: 3.0,
            theta: 0.05,
            zeta: 0.1,
            primitive_only: false,
        }
    }
}

fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value.parse().map_err(|_| Error::Config(format!("bad value for {key}: {value:?}")))
}

impl Config {
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let v = value.trim();
        match key.trim() {
            "seed" => self.seed = parse(key, v)?,
            "coeff_bound" => self.coeff_bound = parse(key, v)?,
            "conjugacy_cap" => self.conjugacy_cap = parse::<f64>(key, v)? as usize,
            "census_budget" => self.census_budget = parse(key, v)?,
            "shards" => self.shards = parse(key, v)?,
            "count_tol" => self.count_tol = parse(key, v)?,
            "equidist_tol" => self.equidist_tol = parse(key, v)?,
            "delta0_tol" => self.delta0_tol = parse(key, v)?,
            "angular_tol" => self.angular_tol = parse(key, v)?,
            "mc_samples" => self.mc_samples = parse::<f64>(key, v)? as usize,
            "haar_samples" => self.haar_samples = parse::<f64>(key, v)? as usize,
            "torus_samples" => self.torus_samples = parse::<f64>(key, v)? as usize,
            "band_lo" => self.band_lo = parse(key, v)?,
            "band_hi" => self.band_hi = parse(key, v)?,
            "band_soft" => self.band_soft = parse(key, v)?,
            "height_cap" => self.height_cap = parse(key, v)?,
            "theta" => self.theta = parse(key, v)?,
            "zeta" => self.zeta = parse(key, v)?,
            "primitive_only" => self.primitive_only = parse(key, v)?,
            other => return Err(Error::Config(format!("unknown key {other:?}"))),
        }
        Ok(())
    }

    pub fn parse_str(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        for (n, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value", n + 1)))?;
            cfg.set(k, v)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse_str(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("census_budget", self.census_budget),
            ("count_tol", self.count_tol),
            ("equidist_tol", self.equidist_tol),
            ("delta0_tol", self.delta0_tol),
            ("angular_tol", self.angular_tol),
            ("band_soft", self.band_soft),
            ("height_cap", self.height_cap),
            ("theta", self.theta),
            ("zeta", self.zeta),
        ];
        if let Some((k, _)) = positive.iter().find(|(_, v)| !(*v > 0.0)) {
            return Err(Error::Config(format!("{k} must be positive")));
        }
        if self.coeff_bound < 1 || self.shards < 1 {
            return Err(Error::Config("coeff_bound and shards must be at least 1".into()));
        }
        if !(self.band_lo < self.band_hi) {
            return Err(Error::Config("band_lo must be below band_hi".into()));
        }
        Ok(())
    }

    /// All keys with their values, in the file format.
    pub fn to_map(&self) -> BTreeMap<String, String> {
        let v = serde_json::to_value(self).expect("config serializes");
        v.as_object()
            .unwrap()
            .iter()
            .map(|(k, v)| (k.clone(), v.to_string().trim_matches('"').to_string()))
            .collect()
    }

    pub fn to_file_string(&self) -> String {
        self.to_map().into_iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }
}
