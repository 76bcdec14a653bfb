//! Monte Carlo comparison harness.
//!
//! A sweep draws `samples` random instances for every `tau`, runs each
//! selected algorithm, and reports per-sample totals plus per-`tau` means with
//! normal-approximation 95% confidence half-widths.
//!
//! Rows CSV header, for algorithms `a1..an` in the order requested:
//!
//! ```text
//! K,tau,sample,seed,a1_bits,...,an_bits[,a1_us,...,an_us]
//! ```
//!
//! Summary CSV header:
//!
//! ```text
//! K,tau,samples,a1_mean,a1_ci95,...,an_mean,an_ci95[,sacm_reduction_pct]
//! ```
//!
//! Timing columns appear only when timing is enabled; without them the output
//! is byte-identical across runs and thread counts. An exact cell is empty
//! when the oracle hit its clique cap or node budget.

use std::fmt;
use std::io::Write;
use std::str::FromStr;
use std::time::Instant;

use crate::baselines::{gccm_canonical, gcm, uncoded};
use crate::clique_space::{algorithm1_with, chvatal_cover_with, DEFAULT_CLIQUE_CAP};
use crate::error::{Error, Result};
use crate::exact::{build_cover_problem_with, solve_exact_with, DEFAULT_NODE_BUDGET};
use crate::exec::Exec;
use crate::generators::{random_instance_sample, ExperimentConfig};
use crate::model::{Instance, Schedule};
use crate::sacm::sacm;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Algorithm {
    Uncoded,
    Gcm,
    Gccm,
    Sacm,
    Algorithm1,
    Chvatal,
    Exact,
}

impl Algorithm {
    pub const ALL: [Algorithm; 7] = [
        Algorithm::Uncoded,
        Algorithm::Gcm,
        Algorithm::Gccm,
        Algorithm::Sacm,
        Algorithm::Algorithm1,
        Algorithm::Chvatal,
        Algorithm::Exact,
    ];

    /// Algorithms compared by default.
    pub const DEFAULT: [Algorithm; 4] = [Algorithm::Uncoded, Algorithm::Gcm, Algorithm::Gccm, Algorithm::Sacm];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Uncoded => "uncoded",
            Algorithm::Gcm => "gcm",
            Algorithm::Gccm => "gccm",
            Algorithm::Sacm => "sacm",
            Algorithm::Algorithm1 => "algorithm1",
            Algorithm::Chvatal => "chvatal",
            Algorithm::Exact => "exact",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown algorithm {s:?}")))
    }
}

/// Resource limits for the enumeration-based algorithms.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Limits {
    pub clique_cap: u64,
    pub node_budget: u64,
}

impl Default for Limits {
    fn default() -> Self {
        Limits { clique_cap: DEFAULT_CLIQUE_CAP, node_budget: DEFAULT_NODE_BUDGET }
    }
}

/// Runs one algorithm. `Ok(None)` means a resource limit was hit.
pub fn run_algorithm(algorithm: Algorithm, instance: &Instance, limits: Limits) -> Result<Option<Schedule>> {
    let capped = |r: Result<Schedule>| match r {
        Ok(s) => Ok(Some(s)),
        Err(Error::CapExceeded { .. }) => Ok(None),
        Err(e) => Err(e),
    };
    match algorithm {
        Algorithm::Uncoded => Ok(Some(uncoded(instance))),
        Algorithm::Gcm => Ok(Some(gcm(instance))),
        Algorithm::Gccm => Ok(Some(gccm_canonical(instance))),
        Algorithm::Sacm => Ok(Some(sacm(instance))),
        Algorithm::Algorithm1 => capped(algorithm1_with(instance, limits.clique_cap, Exec::Sequential)),
        Algorithm::Chvatal => capped(chvatal_cover_with(instance, limits.clique_cap, Exec::Sequential)),
        Algorithm::Exact => {
            if instance.is_empty() {
                return Ok(Some(Schedule::default()));
            }
            let problem = match build_cover_problem_with(instance, limits.clique_cap, Exec::Sequential) {
                Ok(p) => p,
                Err(Error::CapExceeded { .. }) => return Ok(None),
                Err(e) => return Err(e),
            };
            let out = solve_exact_with(&problem, limits.node_budget)?;
            Ok(out.optimal.then_some(out.schedule))
        }
    }
}

/// Parameters of a sweep over several `tau` values.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepConfig {
    pub num_users: usize,
    pub taus: Vec<u64>,
    pub size_min: u64,
    pub size_max: u64,
    pub samples: u32,
    pub seed: u64,
    pub algorithms: Vec<Algorithm>,
    pub timing: bool,
    pub limits: Limits,
}

impl SweepConfig {
    /// Sizes 1..=1000, 100 samples, default algorithms.
    pub fn new(num_users: usize, taus: Vec<u64>, seed: u64) -> Self {
        SweepConfig {
            num_users,
            taus,
            size_min: 1,
            size_max: 1000,
            samples: 100,
            seed,
            algorithms: Algorithm::DEFAULT.to_vec(),
            timing: false,
            limits: Limits::default(),
        }
    }

    pub fn point(&self, tau: u64) -> ExperimentConfig {
        ExperimentConfig {
            num_users: self.num_users,
            tau,
            size_min: self.size_min,
            size_max: self.size_max,
            samples: self.samples,
            seed: self.seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.taus.is_empty() {
            return Err(Error::InvalidConfig("no tau values".into()));
        }
        if self.algorithms.is_empty() {
            return Err(Error::InvalidConfig("no algorithms selected".into()));
        }
        if self.samples == 0 {
            return Err(Error::InvalidConfig("samples must be positive".into()));
        }
        for (i, a) in self.algorithms.iter().enumerate() {
            if self.algorithms[..i].contains(a) {
                return Err(Error::InvalidConfig(format!("algorithm {a} listed twice")));
            }
        }
        self.taus.iter().try_for_each(|&t| self.point(t).validate())
    }
}

/// One sample of one sweep point. `bits` and `micros` follow the sweep's
/// algorithm order.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentRow {
    pub num_users: usize,
    pub tau: u64,
    pub sample: u32,
    pub seed: u64,
    pub bits: Vec<Option<u64>>,
    pub micros: Vec<Option<f64>>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentResult {
    pub algorithms: Vec<Algorithm>,
    pub timing: bool,
    pub rows: Vec<ExperimentRow>,
}

/// Per-algorithm results on one instance, in the order requested.
#[derive(Clone, Debug, PartialEq)]
pub struct InstanceRun {
    pub bits: Vec<Option<u64>>,
    pub micros: Vec<Option<f64>>,
}

/// Runs every algorithm on one instance.
pub fn run_instance(instance: &Instance, algorithms: &[Algorithm], limits: Limits) -> Result<InstanceRun> {
    let mut bits = Vec::with_capacity(algorithms.len());
    let mut micros = Vec::with_capacity(algorithms.len());
    for &a in algorithms {
        let start = Instant::now();
        let schedule = run_algorithm(a, instance, limits)?;
        let elapsed = start.elapsed().as_secs_f64() * 1e6;
        micros.push(schedule.as_ref().map(|_| elapsed));
        bits.push(schedule.map(|s| s.total_bits));
    }
    Ok(InstanceRun { bits, micros })
}

/// Rows come back ordered by `tau` position, then sample index, whatever the
/// execution mode.
pub fn run_experiment(sweep: &SweepConfig, exec: Exec) -> Result<ExperimentResult> {
    sweep.validate()?;
    let per = sweep.samples as usize;
    let rows = exec.try_map_indexed(sweep.taus.len() * per, |job| {
        let tau = sweep.taus[job / per];
        let sample = (job % per) as u32;
        let instance = random_instance_sample(&sweep.point(tau), sample)?;
        let InstanceRun { bits, micros } = run_instance(&instance, &sweep.algorithms, sweep.limits)?;
        Ok::<_, Error>(ExperimentRow { num_users: sweep.num_users, tau, sample, seed: sweep.seed, bits, micros })
    })?;
    Ok(ExperimentResult { algorithms: sweep.algorithms.clone(), timing: sweep.timing, rows })
}

/// Mean and 95% half-width of one algorithm at one sweep point, over the
/// samples where it produced a value.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Estimate {
    pub count: usize,
    pub mean: f64,
    pub ci95: f64,
}

impl Estimate {
    pub fn of(values: &[f64]) -> Option<Self> {
        let n = values.len();
        if n == 0 {
            return None;
        }
        let mean = values.iter().sum::<f64>() / n as f64;
        let ci95 = if n > 1 {
            let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
            1.96 * (var / n as f64).sqrt()
        } else {
            0.0
        };
        Some(Estimate { count: n, mean, ci95 })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SummaryRow {
    pub num_users: usize,
    pub tau: u64,
    pub samples: usize,
    pub estimates: Vec<Option<Estimate>>,
    pub sacm_reduction_pct: Option<f64>,
}

/// Points in first-appearance order.
fn points(rows: &[ExperimentRow]) -> Vec<(usize, u64)> {
    let mut out: Vec<(usize, u64)> = Vec::new();
    for r in rows {
        if !out.contains(&(r.num_users, r.tau)) {
            out.push((r.num_users, r.tau));
        }
    }
    out
}

fn column(rows: &[&ExperimentRow], idx: usize) -> Vec<f64> {
    rows.iter().filter_map(|r| r.bits[idx]).map(|b| b as f64).collect()
}

pub fn summarize(result: &ExperimentResult) -> Vec<SummaryRow> {
    let reduction = bandwidth_reduction(result).ok();
    points(&result.rows)
        .into_iter()
        .map(|(k, tau)| {
            let rows: Vec<&ExperimentRow> = result.rows.iter().filter(|r| r.num_users == k && r.tau == tau).collect();
            let estimates = (0..result.algorithms.len()).map(|i| Estimate::of(&column(&rows, i))).collect();
            let sacm_reduction_pct = reduction
                .as_ref()
                .and_then(|red| red.iter().find(|r| r.num_users == k && r.tau == tau).map(|r| r.percent));
            SummaryRow { num_users: k, tau, samples: rows.len(), estimates, sacm_reduction_pct }
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Reduction {
    pub num_users: usize,
    pub tau: u64,
    pub percent: f64,
}

/// `100 * (1 - mean(sacm) / mean(uncoded))` per `(K, tau)`.
pub fn bandwidth_reduction(result: &ExperimentResult) -> Result<Vec<Reduction>> {
    let find = |a: Algorithm| {
        result
            .algorithms
            .iter()
            .position(|&x| x == a)
            .ok_or_else(|| Error::InvalidConfig(format!("bandwidth reduction needs the {a} column")))
    };
    let (u, s) = (find(Algorithm::Uncoded)?, find(Algorithm::Sacm)?);
    if result.rows.is_empty() {
        return Err(Error::EmptyInput);
    }
    points(&result.rows)
        .into_iter()
        .map(|(k, tau)| {
            let rows: Vec<&ExperimentRow> = result.rows.iter().filter(|r| r.num_users == k && r.tau == tau).collect();
            let (unc, sac) = (column(&rows, u), column(&rows, s));
            let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
            if unc.is_empty() || sac.is_empty() || mean(&unc) == 0.0 {
                return Err(Error::InvalidConfig(format!("no uncoded traffic at K={k}, tau={tau}")));
            }
            Ok(Reduction { num_users: k, tau, percent: 100.0 * (1.0 - mean(&sac) / mean(&unc)) })
        })
        .collect()
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn write_rows_csv<W: Write>(result: &ExperimentResult, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<String> = ["K", "tau", "sample", "seed"].map(String::from).to_vec();
    header.extend(result.algorithms.iter().map(|a| format!("{a}_bits")));
    if result.timing {
        header.extend(result.algorithms.iter().map(|a| format!("{a}_us")));
    }
    w.write_record(&header)?;
    for r in &result.rows {
        let mut rec = vec![r.num_users.to_string(), r.tau.to_string(), r.sample.to_string(), r.seed.to_string()];
        rec.extend(r.bits.iter().map(|b| opt(*b)));
        if result.timing {
            rec.extend(r.micros.iter().map(|m| opt(m.map(|x| format!("{x:.1}")))));
        }
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_summary_csv<W: Write>(result: &ExperimentResult, out: W) -> Result<()> {
    let summary = summarize(result);
    let with_reduction = bandwidth_reduction(result).is_ok();
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<String> = ["K", "tau", "samples"].map(String::from).to_vec();
    for a in &result.algorithms {
        header.push(format!("{a}_mean"));
        header.push(format!("{a}_ci95"));
    }
    if with_reduction {
        header.push("sacm_reduction_pct".into());
    }
    w.write_record(&header)?;
    for s in summary {
        let mut rec = vec![s.num_users.to_string(), s.tau.to_string(), s.samples.to_string()];
        for e in &s.estimates {
            rec.push(opt(e.map(|e| format!("{:.4}", e.mean))));
            rec.push(opt(e.map(|e| format!("{:.4}", e.ci95))));
        }
        if with_reduction {
            rec.push(opt(s.sacm_reduction_pct.map(|p| format!("{p:.4}"))));
        }
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}
