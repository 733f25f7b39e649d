//! Experiment runner: repetitions, parameter sweeps and CSV output.

use std::fmt;
use std::io::{Read, Write};
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::framing::DEFAULT_PACKET_SYMBOLS;
use crate::gf256::POLY;
use crate::rxbuffer::Policy;
use crate::simnet::{run_simulation, PathConfig, RunMetrics, SimConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    NetworkCoded,
    MultipathReorder,
    Both,
}

impl Mode {
    pub fn policies(self) -> &'static [Policy] {
        match self {
            Mode::NetworkCoded => &[Policy::NetworkCoded],
            Mode::MultipathReorder => &[Policy::MultipathReorder],
            Mode::Both => &[Policy::NetworkCoded, Policy::MultipathReorder],
        }
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "nc" | "coded" | "network-coded" => Ok(Mode::NetworkCoded),
            "multipath" | "reorder" | "baseline" => Ok(Mode::MultipathReorder),
            "both" => Ok(Mode::Both),
            other => Err(Error::config("mode", format!("unknown mode {other:?}; use nc, multipath or both"))),
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::NetworkCoded => "nc",
            Mode::MultipathReorder => "multipath",
            Mode::Both => "both",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub mode: Mode,
    pub h: usize,
    pub packet_symbols: usize,
    pub field_poly: u16,
    pub buffer_m: usize,
    pub path_delays_ms: Vec<f64>,
    /// Aggregate rate, split evenly over the `h` paths.
    pub sending_rate_bps: u64,
    pub packet_count: usize,
    pub repetitions: usize,
    pub seed: u64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            mode: Mode::Both,
            h: 4,
            packet_symbols: DEFAULT_PACKET_SYMBOLS,
            field_poly: POLY,
            buffer_m: 2000,
            path_delays_ms: vec![300.0, 400.0, 500.0, 600.0],
            sending_rate_bps: 4_000_000,
            packet_count: 20_000,
            repetitions: 100,
            seed: 0,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.field_poly != POLY {
            return Err(Error::config(
                "field_poly",
                format!("{:#x} unsupported; only {POLY:#x} is implemented", self.field_poly),
            ));
        }
        if self.repetitions == 0 {
            return Err(Error::config("repetitions", "must be at least 1"));
        }
        if self.path_delays_ms.len() != self.h {
            return Err(Error::config(
                "path_delays",
                format!("{} delays given for h={}", self.path_delays_ms.len(), self.h),
            ));
        }
        if self.sending_rate_bps < self.h as u64 {
            return Err(Error::config("sending_rate", "rate must give every path a positive line rate"));
        }
        self.sim(Policy::NetworkCoded, 0).validate()
    }

    /// Per-path line rate.
    pub fn line_rate_bps(&self) -> u64 {
        self.sending_rate_bps / self.h.max(1) as u64
    }

    /// Config of repetition `rep` under `policy`. Repetition `r` uses seed
    /// `seed + r` for both coding and traffic.
    pub fn sim(&self, policy: Policy, rep: usize) -> SimConfig {
        let seed = self.seed.wrapping_add(rep as u64);
        SimConfig {
            policy,
            h: self.h,
            packet_symbols: self.packet_symbols,
            buffer_m: self.buffer_m,
            paths: self
                .path_delays_ms
                .iter()
                .map(|&delay_ms| PathConfig {
                    delay_ms,
                    line_rate_bps: self.line_rate_bps(),
                })
                .collect(),
            packet_count: self.packet_count,
            seed,
            payload_seed: seed,
            reorder_latency_ns: 0,
            record_series: false,
            keep_output: false,
        }
    }

    pub fn delays_label(&self) -> String {
        self.path_delays_ms.iter().map(|d| d.to_string()).collect::<Vec<_>>().join(",")
    }

    /// Applies one `key = value` setting.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        fn num<T: FromStr>(field: &'static str, v: &str) -> Result<T> {
            v.trim()
                .replace('_', "")
                .parse()
                .map_err(|_| Error::config(field, format!("cannot parse {v:?}")))
        }
        match key.trim() {
            "mode" => self.mode = value.parse()?,
            "h" => self.h = num("h", value)?,
            "packet_symbols" => self.packet_symbols = num("packet_symbols", value)?,
            "field_poly" => {
                let v = value.trim();
                self.field_poly = match v.strip_prefix("0x").or_else(|| v.strip_prefix("0X")) {
                    Some(hex) => u16::from_str_radix(hex, 16)
                        .map_err(|_| Error::config("field_poly", format!("cannot parse {v:?}")))?,
                    None => num("field_poly", v)?,
                };
            }
            "buffer_m" => self.buffer_m = num("buffer_m", value)?,
            "path_delays" => self.path_delays_ms = parse_list("path_delays", value)?,
            "sending_rate" => self.sending_rate_bps = num("sending_rate", value)?,
            "packet_count" => self.packet_count = num("packet_count", value)?,
            "repetitions" => self.repetitions = num("repetitions", value)?,
            "seed" => self.seed = num("seed", value)?,
            other => return Err(Error::config("config", format!("unknown key {other:?}"))),
        }
        Ok(())
    }

    /// Reads flat `key = value` lines; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = ExperimentConfig::default();
        for (no, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::config("config", format!("line {}: expected key = value", no + 1)))?;
            cfg.set(k, v)?;
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }
}

/// Parses a comma separated list.
pub fn parse_list<T: FromStr>(field: &'static str, s: &str) -> Result<Vec<T>> {
    s.split(',')
        .map(|x| {
            x.trim()
                .replace('_', "")
                .parse()
                .map_err(|_| Error::config(field, format!("cannot parse {x:?}")))
        })
        .collect()
}

/// Per-repetition values plus aggregates for one (config, policy).
#[derive(Debug, Clone, PartialEq)]
pub struct Aggregate {
    pub policy: Policy,
    pub coded_loss: Vec<f64>,
    pub native_loss: Vec<f64>,
    pub occupancy_mean: Vec<f64>,
    pub occupancy_max: Vec<usize>,
    /// Milliseconds.
    pub latency_mean: Vec<f64>,
}

fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        0.0
    } else {
        xs.iter().sum::<f64>() / xs.len() as f64
    }
}

/// Sample standard deviation; zero for fewer than two values.
fn std_dev(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    (xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() - 1) as f64).sqrt()
}

impl Aggregate {
    fn from_runs(policy: Policy, runs: &[RunMetrics]) -> Self {
        Aggregate {
            policy,
            coded_loss: runs.iter().map(|r| r.coded_loss_ratio).collect(),
            native_loss: runs.iter().map(|r| r.native_loss_ratio).collect(),
            occupancy_mean: runs.iter().map(|r| r.occupancy_mean).collect(),
            occupancy_max: runs.iter().map(|r| r.occupancy_max).collect(),
            latency_mean: runs.iter().map(|r| r.latency_mean / 1e6).collect(),
        }
    }

    pub fn coded_loss_mean(&self) -> f64 {
        mean(&self.coded_loss)
    }

    pub fn coded_loss_std(&self) -> f64 {
        std_dev(&self.coded_loss)
    }

    pub fn native_loss_mean(&self) -> f64 {
        mean(&self.native_loss)
    }

    pub fn row(&self, cfg: &ExperimentConfig) -> CsvRow {
        CsvRow {
            mode: self.policy.name().to_string(),
            h: cfg.h,
            n: cfg.packet_symbols,
            m: cfg.buffer_m,
            rate_bps: cfg.sending_rate_bps,
            delays: cfg.delays_label(),
            seed: cfg.seed,
            reps: cfg.repetitions,
            coded_loss: self.coded_loss_mean(),
            native_loss: self.native_loss_mean(),
            occ_mean: mean(&self.occupancy_mean),
            occ_max: self.occupancy_max.iter().copied().max().unwrap_or(0),
            latency_mean: mean(&self.latency_mean),
            std: self.coded_loss_std(),
        }
    }
}

/// One CSV line. `std` is the standard deviation of `coded_loss` across
/// repetitions; `latency_mean` is in milliseconds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CsvRow {
    pub mode: String,
    pub h: usize,
    #[serde(rename = "N")]
    pub n: usize,
    pub m: usize,
    pub rate_bps: u64,
    pub delays: String,
    pub seed: u64,
    pub reps: usize,
    pub coded_loss: f64,
    pub native_loss: f64,
    pub occ_mean: f64,
    pub occ_max: usize,
    pub latency_mean: f64,
    pub std: f64,
}

pub const CSV_HEADER: &str =
    "mode,h,N,m,rate_bps,delays,seed,reps,coded_loss,native_loss,occ_mean,occ_max,latency_mean,std";

/// Runs every repetition of `cfg` for each policy of its mode.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<Aggregate>> {
    cfg.validate()?;
    cfg.mode
        .policies()
        .iter()
        .map(|&policy| {
            let runs = (0..cfg.repetitions)
                .into_par_iter()
                .map(|rep| run_simulation(&cfg.sim(policy, rep)))
                .collect::<Result<Vec<_>>>()?;
            Ok(Aggregate::from_runs(policy, &runs))
        })
        .collect()
}

/// Cartesian grid over buffer size, sending rate and packet size.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SweepGrid {
    pub buffer_m: Vec<usize>,
    pub sending_rate_bps: Vec<u64>,
    pub packet_symbols: Vec<usize>,
}

impl SweepGrid {
    /// Grid points in row-major order (buffer size outermost).
    pub fn points(&self, base: &ExperimentConfig) -> Vec<ExperimentConfig> {
        let mut out = Vec::new();
        for &m in &self.buffer_m {
            for &rate in &self.sending_rate_bps {
                for &n in &self.packet_symbols {
                    out.push(ExperimentConfig {
                        buffer_m: m,
                        sending_rate_bps: rate,
                        packet_symbols: n,
                        ..base.clone()
                    });
                }
            }
        }
        out
    }

    /// A single point at the base config.
    pub fn single(base: &ExperimentConfig) -> Self {
        SweepGrid {
            buffer_m: vec![base.buffer_m],
            sending_rate_bps: vec![base.sending_rate_bps],
            packet_symbols: vec![base.packet_symbols],
        }
    }
}

/// One row per (grid point, policy), grid order first. Repetitions and grid
/// points run in parallel; the row order does not depend on scheduling.
pub fn run_sweep(base: &ExperimentConfig, grid: &SweepGrid) -> Result<Vec<CsvRow>> {
    let points = grid.points(base);
    if points.is_empty() {
        return Err(Error::config("grid", "sweep grid is empty"));
    }
    for p in &points {
        p.validate()?;
    }
    let jobs: Vec<(usize, Policy, usize)> = points
        .iter()
        .enumerate()
        .flat_map(|(i, p)| {
            p.mode
                .policies()
                .iter()
                .flat_map(move |&pol| (0..p.repetitions).map(move |rep| (i, pol, rep)))
        })
        .collect();
    let runs = jobs
        .par_iter()
        .map(|&(i, pol, rep)| run_simulation(&points[i].sim(pol, rep)))
        .collect::<Result<Vec<_>>>()?;

    let mut rows = Vec::new();
    let mut cursor = 0;
    for p in &points {
        for &pol in p.mode.policies() {
            let chunk = &runs[cursor..cursor + p.repetitions];
            cursor += p.repetitions;
            rows.push(Aggregate::from_runs(pol, chunk).row(p));
        }
    }
    Ok(rows)
}

/// Writes the header and one line per row.
pub fn write_csv<W: Write>(rows: &[CsvRow], out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(CSV_HEADER.split(','))?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn emit_csv(rows: &[CsvRow], path: &Path) -> Result<()> {
    write_csv(rows, std::fs::File::create(path)?)
}

pub fn read_csv<R: Read>(input: R) -> Result<Vec<CsvRow>> {
    let mut r = csv::Reader::from_reader(input);
    r.deserialize().map(|row| row.map_err(Error::from)).collect()
}
