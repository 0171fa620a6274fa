//! Seeded parameter-recovery study over window size, noise level and frequency.
//!
//! Each replicate synthesizes `A cos(2 pi F t / N + phi)` on `[S, S+L-1]` plus
//! Gaussian noise, transforms it with window `n`, and runs the estimator.
//! Replicate seeds are a pure function of `(master seed, n, sigma, F, r)`, so
//! any cell can be re-run on its own and the report does not depend on the
//! thread schedule.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize};

use crate::error::{Result, SwdftError};
use crate::estimation::{estimate_local_signal, EstimateOptions, EstimateResult};
use crate::signals::{circular_diff, cycles_per_window, synth_composite, CompositeSpec, LocalSignalSpec};
use crate::transform::swdft_sliding;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyConfig {
    pub n_list: Vec<usize>,
    pub sigma_list: Vec<f64>,
    pub f_list: Vec<f64>,
    pub amplitude: f64,
    pub len: usize,
    pub start: usize,
    pub length: usize,
    pub phase: f64,
    pub reps: usize,
    pub master_seed: u64,
    pub estimate: EstimateOptions,
}

impl Default for StudyConfig {
    fn default() -> Self {
        Self {
            n_list: vec![8, 16, 32],
            sigma_list: vec![0.0, 0.5, 1.0, 1.5, 2.0],
            f_list: vec![8.0, 11.0],
            amplitude: 1.0,
            len: 64,
            start: 17,
            length: 31,
            phase: 1.0,
            reps: 25,
            master_seed: 20_190_101,
            estimate: EstimateOptions {
                parallel: false,
                ..EstimateOptions::default()
            },
        }
    }
}

impl StudyConfig {
    pub fn validate(&self) -> Result<()> {
        if self.reps == 0 {
            return Err(SwdftError::InvalidInput("reps must be >= 1".into()));
        }
        if self.n_list.is_empty() || self.sigma_list.is_empty() || self.f_list.is_empty() {
            return Err(SwdftError::InvalidInput(
                "n, sigma and F lists must be non-empty".into(),
            ));
        }
        if let Some(s) = self.sigma_list.iter().find(|s| !(s.is_finite() && **s >= 0.0)) {
            return Err(SwdftError::InvalidInput(format!("bad sigma {s}")));
        }
        for &f in &self.f_list {
            self.truth(f)?.validate(self.len)?;
        }
        for &n in &self.n_list {
            if n == 0 || n > self.len {
                return Err(SwdftError::InvalidWindow { n, len: self.len });
            }
        }
        Ok(())
    }

    fn truth(&self, frequency: f64) -> Result<LocalSignalSpec> {
        LocalSignalSpec::new(self.start, self.length, self.amplitude, frequency, self.phase)
    }

    /// Number of `(n, sigma, F)` cells.
    pub fn cell_count(&self) -> usize {
        self.n_list.len() * self.sigma_list.len() * self.f_list.len()
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Stable seed for replicate `r` of cell `(n, sigma, F)`.
pub fn replicate_seed(master: u64, n: usize, sigma: f64, frequency: f64, r: usize) -> u64 {
    [n as u64, sigma.to_bits(), frequency.to_bits(), r as u64]
        .into_iter()
        .fold(splitmix64(master), |h, v| splitmix64(h ^ v))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Replicate {
    pub index: usize,
    pub seed: u64,
    pub estimate: Option<EstimateResult>,
    pub error: Option<String>,
}

// JSON has no NaN; serde_json writes it as null.
fn nan_from_null<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
    Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::NAN))
}

/// Aggregates over the successful replicates of one cell. NaN when none succeeded.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CellSummary {
    #[serde(deserialize_with = "nan_from_null")]
    pub mse_amplitude: f64,
    #[serde(deserialize_with = "nan_from_null")]
    pub mse_start: f64,
    #[serde(deserialize_with = "nan_from_null")]
    pub mse_length: f64,
    /// In cycles per window.
    #[serde(deserialize_with = "nan_from_null")]
    pub mse_f: f64,
    /// Circular error, radians.
    #[serde(deserialize_with = "nan_from_null")]
    pub mse_phase: f64,
    /// Plain difference of phases in `[0, 2 pi)`.
    #[serde(deserialize_with = "nan_from_null")]
    pub mse_phase_unwrapped: f64,
    #[serde(deserialize_with = "nan_from_null")]
    pub correct_k_fraction: f64,
    #[serde(deserialize_with = "nan_from_null")]
    pub mean_amplitude: f64,
    pub succeeded: usize,
    pub failed: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellResult {
    pub n: usize,
    pub sigma: f64,
    pub frequency: f64,
    pub replicates: Vec<Replicate>,
    pub summary: CellSummary,
}

/// `k*` counts as correct when it is a nearest Fourier frequency to the true
/// cycles per window (both neighbours qualify at a half-integer).
pub fn is_correct_k(k_star: usize, true_cycles: f64) -> bool {
    (k_star as f64 - true_cycles).abs() <= 0.5 + 1e-12
}

fn summarize(cfg: &StudyConfig, n: usize, frequency: f64, reps: &[Replicate]) -> CellSummary {
    let f_true = cycles_per_window(frequency, cfg.len, n);
    let phase_true = cfg.truth(frequency).map(|s| s.phase()).unwrap_or(cfg.phase);
    let ok: Vec<&EstimateResult> = reps.iter().filter_map(|r| r.estimate.as_ref()).collect();
    let m = ok.len() as f64;
    let mean = |f: &dyn Fn(&EstimateResult) -> f64| -> f64 {
        if ok.is_empty() {
            f64::NAN
        } else {
            ok.iter().map(|e| f(e)).sum::<f64>() / m
        }
    };
    CellSummary {
        mse_amplitude: mean(&|e| (e.amplitude - cfg.amplitude).powi(2)),
        mse_start: mean(&|e| (e.start as f64 - cfg.start as f64).powi(2)),
        mse_length: mean(&|e| (e.length as f64 - cfg.length as f64).powi(2)),
        mse_f: mean(&|e| (e.cycles_per_window - f_true).powi(2)),
        mse_phase: mean(&|e| circular_diff(e.phase, phase_true).powi(2)),
        mse_phase_unwrapped: mean(&|e| (e.phase - phase_true).powi(2)),
        correct_k_fraction: mean(&|e| if is_correct_k(e.k_star, f_true) { 1.0 } else { 0.0 }),
        mean_amplitude: mean(&|e| e.amplitude),
        succeeded: ok.len(),
        failed: reps.len() - ok.len(),
    }
}

fn run_replicate(cfg: &StudyConfig, n: usize, sigma: f64, frequency: f64, index: usize) -> Replicate {
    let seed = replicate_seed(cfg.master_seed, n, sigma, frequency, index);
    let outcome = (|| {
        let spec = CompositeSpec {
            components: vec![cfg.truth(frequency)?],
            len: cfg.len,
            sigma,
            seed,
        };
        let grid = swdft_sliding(&synth_composite(&spec)?, n)?;
        estimate_local_signal(&grid, &cfg.estimate)
    })();
    match outcome {
        Ok(e) => Replicate {
            index,
            seed,
            estimate: Some(e),
            error: None,
        },
        Err(e) => Replicate {
            index,
            seed,
            estimate: None,
            error: Some(e.to_string()),
        },
    }
}

fn assemble(cfg: &StudyConfig, n: usize, sigma: f64, frequency: f64, replicates: Vec<Replicate>) -> CellResult {
    let summary = summarize(cfg, n, frequency, &replicates);
    CellResult {
        n,
        sigma,
        frequency,
        replicates,
        summary,
    }
}

pub fn run_cell(cfg: &StudyConfig, n: usize, sigma: f64, frequency: f64) -> Result<CellResult> {
    cfg.validate()?;
    let reps: Vec<Replicate> = (0..cfg.reps)
        .into_par_iter()
        .map(|r| run_replicate(cfg, n, sigma, frequency, r))
        .collect();
    Ok(assemble(cfg, n, sigma, frequency, reps))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportMetadata {
    pub master_seed: u64,
    pub runtime_secs: f64,
    pub library_version: String,
    pub failed_replicates: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationReport {
    pub config: StudyConfig,
    /// Ordered by `n`, then `F`, then `sigma`, following the config lists.
    pub cells: Vec<CellResult>,
    pub metadata: ReportMetadata,
}

impl SimulationReport {
    pub fn cell(&self, n: usize, sigma: f64, frequency: f64) -> Option<&CellResult> {
        self.cells
            .iter()
            .find(|c| c.n == n && c.sigma == sigma && c.frequency == frequency)
    }

    /// True when both reports hold the same configuration and per-replicate results.
    pub fn same_results(&self, other: &SimulationReport) -> bool {
        self.config == other.config && self.cells == other.cells
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| SwdftError::InvalidInput(e.to_string()))
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| SwdftError::Parse {
            line: e.line(),
            msg: e.to_string(),
        })
    }
}

/// Runs every `(n, sigma, F)` cell. Replicates run in parallel on the current
/// rayon pool, each writing to a pre-assigned slot.
pub fn run_study(cfg: &StudyConfig) -> Result<SimulationReport> {
    cfg.validate()?;
    let started = Instant::now();
    let mut keys = Vec::with_capacity(cfg.cell_count());
    for &n in &cfg.n_list {
        for &f in &cfg.f_list {
            for &s in &cfg.sigma_list {
                keys.push((n, s, f));
            }
        }
    }
    let tasks: Vec<(usize, usize)> = (0..keys.len())
        .flat_map(|c| (0..cfg.reps).map(move |r| (c, r)))
        .collect();
    let outcomes: Vec<Replicate> = tasks
        .par_iter()
        .map(|&(c, r)| {
            let (n, s, f) = keys[c];
            run_replicate(cfg, n, s, f, r)
        })
        .collect();

    let mut chunks = outcomes.chunks(cfg.reps);
    let cells: Vec<CellResult> = keys
        .iter()
        .map(|&(n, s, f)| assemble(cfg, n, s, f, chunks.next().expect("one chunk per cell").to_vec()))
        .collect();
    let failed = cells.iter().map(|c| c.summary.failed).sum();
    Ok(SimulationReport {
        config: cfg.clone(),
        cells,
        metadata: ReportMetadata {
            master_seed: cfg.master_seed,
            runtime_secs: started.elapsed().as_secs_f64(),
            library_version: env!("CARGO_PKG_VERSION").to_string(),
            failed_replicates: failed,
        },
    })
}

/// The six per-`n` tables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TableKind {
    Amplitude,
    Start,
    Length,
    Frequency,
    Phase,
    CorrectK,
}

impl TableKind {
    pub const ALL: [TableKind; 6] = [
        TableKind::Amplitude,
        TableKind::Start,
        TableKind::Length,
        TableKind::Frequency,
        TableKind::Phase,
        TableKind::CorrectK,
    ];

    pub fn key(self) -> &'static str {
        match self {
            TableKind::Amplitude => "A",
            TableKind::Start => "S",
            TableKind::Length => "L",
            TableKind::Frequency => "f",
            TableKind::Phase => "phi",
            TableKind::CorrectK => "k",
        }
    }

    pub fn from_key(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|t| t.key() == s)
    }

    pub fn value(self, s: &CellSummary) -> f64 {
        match self {
            TableKind::Amplitude => s.mse_amplitude,
            TableKind::Start => s.mse_start,
            TableKind::Length => s.mse_length,
            TableKind::Frequency => s.mse_f,
            TableKind::Phase => s.mse_phase,
            TableKind::CorrectK => s.correct_k_fraction,
        }
    }
}

pub fn frequency_label(frequency: f64, len: usize) -> String {
    format!("{frequency} Cycles/Length {len} Signal")
}

/// Per-`n` table values: `(table, F) -> one value per sigma`.
pub type TableValues = BTreeMap<(TableKind, u64), Vec<f64>>;

/// CSV and aligned-text renderings for one window size.
#[derive(Debug, Clone, PartialEq)]
pub struct RenderedTables {
    pub n: usize,
    pub csv: String,
    pub text: String,
}

impl RenderedTables {
    pub fn csv_file_name(&self) -> String {
        format!("tables_n{}.csv", self.n)
    }

    pub fn text_file_name(&self) -> String {
        format!("tables_n{}.txt", self.n)
    }
}

/// Collects table values for window `n`, failing when any cell is missing.
pub fn table_values(rep: &SimulationReport, n: usize) -> Result<TableValues> {
    let cfg = &rep.config;
    let mut out = TableValues::new();
    for kind in TableKind::ALL {
        for &f in &cfg.f_list {
            let mut row = Vec::with_capacity(cfg.sigma_list.len());
            for &s in &cfg.sigma_list {
                let cell = rep
                    .cell(n, s, f)
                    .ok_or_else(|| SwdftError::IncompleteReport(format!("missing cell n={n} sigma={s} F={f}")))?;
                row.push(kind.value(&cell.summary));
            }
            out.insert((kind, f.to_bits()), row);
        }
    }
    Ok(out)
}

pub fn render_tables(rep: &SimulationReport) -> Result<Vec<RenderedTables>> {
    let cfg = &rep.config;
    if rep.cells.len() != cfg.cell_count() {
        return Err(SwdftError::IncompleteReport(format!(
            "{} cells present, {} expected",
            rep.cells.len(),
            cfg.cell_count()
        )));
    }
    cfg.n_list
        .iter()
        .map(|&n| {
            let values = table_values(rep, n)?;
            Ok(RenderedTables {
                n,
                csv: render_csv(cfg, n, &values),
                text: render_text(cfg, n, &values),
            })
        })
        .collect()
}

fn render_csv(cfg: &StudyConfig, n: usize, values: &TableValues) -> String {
    let mut s = String::from("# format=1\n");
    let _ = write!(s, "n,table,F,label");
    for sigma in &cfg.sigma_list {
        let _ = write!(s, ",sigma={sigma}");
    }
    s.push('\n');
    for kind in TableKind::ALL {
        for &f in &cfg.f_list {
            let _ = write!(s, "{n},{},{f},{}", kind.key(), frequency_label(f, cfg.len));
            for v in &values[&(kind, f.to_bits())] {
                let _ = write!(s, ",{v:?}");
            }
            s.push('\n');
        }
    }
    s
}

fn render_text(cfg: &StudyConfig, n: usize, values: &TableValues) -> String {
    let label_width = cfg
        .f_list
        .iter()
        .map(|&f| frequency_label(f, cfg.len).len())
        .max()
        .unwrap_or(0)
        .max("Frequency".len());
    let mut s = String::new();
    for kind in TableKind::ALL {
        let title = match kind {
            TableKind::CorrectK => format!("Fraction of correct k, n = {n}"),
            _ => format!("MSE of {}, n = {n}", kind.key()),
        };
        let _ = writeln!(s, "{title}  (columns: standard deviation sigma)");
        let _ = write!(s, "{:<label_width$}", "Frequency");
        for sigma in &cfg.sigma_list {
            let _ = write!(s, " {:>8}", sigma);
        }
        s.push('\n');
        for &f in &cfg.f_list {
            let _ = write!(s, "{:<label_width$}", frequency_label(f, cfg.len));
            for v in &values[&(kind, f.to_bits())] {
                let _ = write!(s, " {:>8.2}", v);
            }
            s.push('\n');
        }
        s.push('\n');
    }
    s
}

/// Parses a table CSV produced by [`render_tables`].
///
/// Returns the window size, sigma columns and values.
pub fn parse_tables_csv(text: &str) -> Result<(usize, Vec<f64>, TableValues)> {
    let mut lines = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.starts_with('#') && !l.trim().is_empty());
    let (hline, header) = lines.next().ok_or(SwdftError::Parse {
        line: 1,
        msg: "missing header".into(),
    })?;
    let perr = |line: usize, msg: String| SwdftError::Parse { line: line + 1, msg };
    let sigmas: Vec<f64> = header
        .split(',')
        .skip(4)
        .map(|h| {
            h.strip_prefix("sigma=")
                .and_then(|v| v.parse().ok())
                .ok_or_else(|| perr(hline, format!("bad sigma column '{h}'")))
        })
        .collect::<Result<_>>()?;
    let mut n_seen = None;
    let mut values = TableValues::new();
    for (i, line) in lines {
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 4 + sigmas.len() {
            return Err(perr(
                i,
                format!("expected {} fields, got {}", 4 + sigmas.len(), fields.len()),
            ));
        }
        let n: usize = fields[0].parse().map_err(|_| perr(i, "bad n".into()))?;
        if *n_seen.get_or_insert(n) != n {
            return Err(perr(i, "mixed window sizes".into()));
        }
        let kind = TableKind::from_key(fields[1]).ok_or_else(|| perr(i, format!("unknown table '{}'", fields[1])))?;
        let f: f64 = fields[2].parse().map_err(|_| perr(i, "bad F".into()))?;
        let row = fields[4..]
            .iter()
            .map(|v| v.parse::<f64>().map_err(|_| perr(i, format!("bad value '{v}'"))))
            .collect::<Result<Vec<_>>>()?;
        values.insert((kind, f.to_bits()), row);
    }
    let n = n_seen.ok_or(SwdftError::Parse {
        line: hline + 1,
        msg: "no rows".into(),
    })?;
    Ok((n, sigmas, values))
}
