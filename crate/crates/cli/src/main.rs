//! `sacm`: build instances, compute delivery schedules, check them bit by bit
//! and run Monte Carlo comparisons.
//!
//! Exit status: 0 on success, 2 when an input or schedule fails validation,
//! 3 when a resource cap is hit, 1 on I/O and other errors.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use sacm::clique_space::{enumerate_all_cliques_with, DEFAULT_CLIQUE_CAP};
use sacm::decode::verify_decode;
use sacm::exact::{build_cover_problem_with, solve_exact_with, DEFAULT_NODE_BUDGET};
use sacm::experiment::{
    run_algorithm, run_instance, write_rows_csv, write_summary_csv, Algorithm, ExperimentResult, ExperimentRow,
    InstanceRun, Limits, SweepConfig,
};
use sacm::generators::{
    adversarial_gccm, adversarial_gcm, adversarial_uncoded, from_graph, random_instance_sample, ExperimentConfig, Graph,
};
use sacm::io::{order_from_json, order_to_json};
use sacm::{validate_schedule, Error, Exec, Instance, Schedule};

#[derive(Parser)]
#[command(name = "sacm", version, about = "Clique cover delivery schedules for coded caching")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write an instance as JSON.
    Gen(GenArgs),
    /// Compute a delivery schedule.
    Solve(SolveArgs),
    /// Compute a minimum-bit schedule by branch and bound.
    Oracle(OracleArgs),
    /// Run several algorithms on one instance and print one CSV row.
    Compare(CompareArgs),
    /// Validate a schedule and decode every packet at the bit level.
    Verify(VerifyArgs),
    /// Monte Carlo sweep over tau, written as CSV.
    Experiment(ExperimentArgs),
    /// Count the cliques of an instance per user group.
    Enumerate(EnumerateArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Family {
    Random,
    AdvUncoded,
    AdvGcm,
    AdvGccm,
    Graph,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, value_enum, default_value = "random")]
    family: Family,
    /// Number of users K.
    #[arg(long, short = 'k')]
    users: Option<usize>,
    /// Number of subfiles (random family).
    #[arg(long)]
    tau: Option<u64>,
    #[arg(long, default_value_t = 1)]
    size_min: u64,
    #[arg(long, default_value_t = 1000)]
    size_max: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Sample index within the seed's stream family.
    #[arg(long, default_value_t = 0)]
    sample: u32,
    /// Large subfile size B (adversarial families).
    #[arg(long, default_value_t = 1_000_000)]
    big: u64,
    /// Small subfile size (adv-gcm, adv-gccm).
    #[arg(long, default_value_t = 1)]
    eps: u64,
    /// Graph JSON `{"vertices": n, "edges": [[u, v], ...]}` (graph family).
    #[arg(long)]
    graph_file: Option<PathBuf>,
    /// Where to write the vertex order (adv-gccm).
    #[arg(long)]
    order_out: Option<PathBuf>,
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum SolveAlgo {
    Uncoded,
    Gcm,
    Gccm,
    Sacm,
    Algorithm1,
    Chvatal,
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long, short)]
    instance: PathBuf,
    #[arg(long, value_enum, default_value = "sacm")]
    algo: SolveAlgo,
    /// Vertex order for gccm, as a JSON list of subfile references.
    #[arg(long)]
    order_file: Option<PathBuf>,
    /// Clique cap for algorithm1 and chvatal.
    #[arg(long, default_value_t = DEFAULT_CLIQUE_CAP)]
    cap: u64,
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct OracleArgs {
    #[arg(long, short)]
    instance: PathBuf,
    #[arg(long, default_value_t = DEFAULT_CLIQUE_CAP)]
    cap: u64,
    #[arg(long, default_value_t = DEFAULT_NODE_BUDGET)]
    node_budget: u64,
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CompareArgs {
    #[arg(long, short)]
    instance: PathBuf,
    /// Comma-separated algorithm names.
    #[arg(long, default_value = "uncoded,gcm,gccm,sacm")]
    algos: String,
    #[arg(long)]
    timing: bool,
    #[arg(long, default_value_t = DEFAULT_CLIQUE_CAP)]
    cap: u64,
    #[arg(long, default_value_t = DEFAULT_NODE_BUDGET)]
    node_budget: u64,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, short)]
    instance: PathBuf,
    #[arg(long, short)]
    schedule: PathBuf,
    /// Seed for the subfile contents.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct ExperimentArgs {
    #[arg(long, short = 'k')]
    users: usize,
    /// `a:b`, `a:b:step` or a comma-separated list.
    #[arg(long)]
    tau: String,
    #[arg(long, default_value_t = 100)]
    samples: u32,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "uncoded,gcm,gccm,sacm")]
    algos: String,
    #[arg(long, default_value_t = 1)]
    size_min: u64,
    #[arg(long, default_value_t = 1000)]
    size_max: u64,
    /// Add per-algorithm wall-time columns in microseconds.
    #[arg(long)]
    timing: bool,
    #[arg(long, default_value_t = DEFAULT_CLIQUE_CAP)]
    cap: u64,
    #[arg(long, default_value_t = DEFAULT_NODE_BUDGET)]
    node_budget: u64,
    /// Run samples on one thread.
    #[arg(long)]
    sequential: bool,
    /// Per-sample rows; stdout when absent.
    #[arg(long, short)]
    out: Option<PathBuf>,
    /// Per-tau means and 95% half-widths.
    #[arg(long)]
    summary: Option<PathBuf>,
}

#[derive(Args)]
struct EnumerateArgs {
    #[arg(long, short)]
    instance: PathBuf,
    #[arg(long, default_value_t = DEFAULT_CLIQUE_CAP)]
    cap: u64,
}

/// Failure of a check the user asked for, as opposed to malformed input.
#[derive(Debug)]
struct Rejected(String);

impl std::fmt::Display for Rejected {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Rejected {}

/// The exact search ran out of nodes before proving optimality.
#[derive(Debug)]
struct BudgetExhausted(u64);

impl std::fmt::Display for BudgetExhausted {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "node budget of {} exhausted; the schedule written is the best found", self.0)
    }
}

impl std::error::Error for BudgetExhausted {}

fn exit_code(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<Rejected>().is_some() {
        return 2;
    }
    if err.downcast_ref::<BudgetExhausted>().is_some() {
        return 3;
    }
    match err.downcast_ref::<Error>() {
        Some(Error::CapExceeded { .. }) => 3,
        Some(Error::Io(_)) | None => 1,
        Some(_) => 2,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}

fn run(command: Command) -> anyhow::Result<()> {
    match command {
        Command::Gen(a) => gen(a),
        Command::Solve(a) => solve(a),
        Command::Oracle(a) => oracle(a),
        Command::Compare(a) => compare(a),
        Command::Verify(a) => verify(a),
        Command::Experiment(a) => experiment(a),
        Command::Enumerate(a) => enumerate(a),
    }
}

fn read(path: &Path) -> anyhow::Result<String> {
    fs::read_to_string(path).map_err(Error::from).with_context(|| format!("reading {}", path.display()))
}

fn load_instance(path: &Path) -> anyhow::Result<Instance> {
    Instance::from_json(&read(path)?).with_context(|| format!("parsing instance {}", path.display()))
}

fn emit(out: Option<&Path>, text: &str) -> anyhow::Result<()> {
    match out {
        Some(p) => fs::write(p, text).map_err(Error::from).with_context(|| format!("writing {}", p.display())),
        None => {
            let mut stdout = io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn with_newline(mut s: String) -> String {
    if !s.ends_with('\n') {
        s.push('\n');
    }
    s
}

fn need<T>(value: Option<T>, flag: &str) -> anyhow::Result<T> {
    value.ok_or_else(|| anyhow!(Error::InvalidConfig(format!("--{flag} is required for this family"))))
}

fn gen(a: GenArgs) -> anyhow::Result<()> {
    let instance = match a.family {
        Family::Random => {
            let config = ExperimentConfig {
                num_users: need(a.users, "users")?,
                tau: need(a.tau, "tau")?,
                size_min: a.size_min,
                size_max: a.size_max,
                samples: a.sample.saturating_add(1),
                seed: a.seed,
            };
            random_instance_sample(&config, a.sample)?
        }
        Family::AdvUncoded => adversarial_uncoded(need(a.users, "users")?, a.big)?,
        Family::AdvGcm => adversarial_gcm(need(a.users, "users")?, a.big, a.eps)?,
        Family::AdvGccm => {
            let (instance, order) = adversarial_gccm(need(a.users, "users")?, a.big, a.eps)?;
            if let Some(p) = &a.order_out {
                emit(Some(p), &with_newline(order_to_json(&order, &instance)))?;
            }
            instance
        }
        Family::Graph => {
            let path = need(a.graph_file.as_deref(), "graph-file")?;
            from_graph(&Graph::from_json(&read(path)?)?)
        }
    };
    emit(a.out.as_deref(), &with_newline(instance.to_json()))
}

fn solve(a: SolveArgs) -> anyhow::Result<()> {
    let instance = load_instance(&a.instance)?;
    let limits = Limits { clique_cap: a.cap, ..Limits::default() };
    let schedule = match (a.algo, &a.order_file) {
        (SolveAlgo::Gccm, Some(p)) => sacm::baselines::gccm(&instance, &order_from_json(&read(p)?, &instance)?)?,
        (_, Some(_)) => return Err(anyhow!(Error::InvalidConfig("--order-file only applies to gccm".into()))),
        (algo, None) => {
            let algorithm = match algo {
                SolveAlgo::Uncoded => Algorithm::Uncoded,
                SolveAlgo::Gcm => Algorithm::Gcm,
                SolveAlgo::Gccm => Algorithm::Gccm,
                SolveAlgo::Sacm => Algorithm::Sacm,
                SolveAlgo::Algorithm1 => Algorithm::Algorithm1,
                SolveAlgo::Chvatal => Algorithm::Chvatal,
            };
            match algorithm {
                Algorithm::Algorithm1 => {
                    sacm::clique_space::algorithm1_with(&instance, limits.clique_cap, Exec::default())?
                }
                Algorithm::Chvatal => {
                    sacm::clique_space::chvatal_cover_with(&instance, limits.clique_cap, Exec::default())?
                }
                other => run_algorithm(other, &instance, limits)?.expect("uncapped algorithm"),
            }
        }
    };
    emit(a.out.as_deref(), &with_newline(schedule.to_json()))
}

fn oracle(a: OracleArgs) -> anyhow::Result<()> {
    let instance = load_instance(&a.instance)?;
    if instance.is_empty() {
        return Err(anyhow!(Error::EmptyInput));
    }
    let problem = build_cover_problem_with(&instance, a.cap, Exec::default())?;
    let outcome = solve_exact_with(&problem, a.node_budget)?;
    let schedule: serde_json::Value = serde_json::from_str(&outcome.schedule.to_json())?;
    let report = serde_json::json!({
        "optimal": outcome.optimal,
        "total_bits": outcome.schedule.total_bits,
        "nodes": outcome.nodes,
        "columns": problem.enumerated_columns(),
        "columns_after_pruning": problem.columns().len(),
        "schedule": schedule,
    });
    emit(a.out.as_deref(), &with_newline(serde_json::to_string_pretty(&report)?))?;
    if outcome.optimal {
        Ok(())
    } else {
        Err(anyhow!(BudgetExhausted(a.node_budget)))
    }
}

fn parse_algos(list: &str) -> anyhow::Result<Vec<Algorithm>> {
    list.split(',').map(|s| s.trim().parse::<Algorithm>().map_err(anyhow::Error::from)).collect()
}

fn compare(a: CompareArgs) -> anyhow::Result<()> {
    let instance = load_instance(&a.instance)?;
    let algorithms = parse_algos(&a.algos)?;
    let limits = Limits { clique_cap: a.cap, node_budget: a.node_budget };
    let InstanceRun { bits, micros } = run_instance(&instance, &algorithms, limits)?;
    let row =
        ExperimentRow { num_users: instance.num_users(), tau: instance.len() as u64, sample: 0, seed: 0, bits, micros };
    let result = ExperimentResult { algorithms, timing: a.timing, rows: vec![row] };
    write_rows_csv(&result, io::stdout().lock())?;
    Ok(())
}

fn verify(a: VerifyArgs) -> anyhow::Result<()> {
    let instance = load_instance(&a.instance)?;
    let schedule = Schedule::from_json(&read(&a.schedule)?, &instance)
        .with_context(|| format!("parsing schedule {}", a.schedule.display()))?;
    if let Err(v) = validate_schedule(&instance, &schedule) {
        return Err(anyhow!(Rejected(format!("schedule invalid: {v}"))));
    }
    let report = verify_decode(&instance, &schedule, a.seed);
    match &report.failure {
        None => {
            println!(
                "PASS: {} packets, {} subfiles decoded, {} bits",
                report.packets, report.decoded, schedule.total_bits
            );
            Ok(())
        }
        Some(f) => Err(anyhow!(Rejected(format!("decode failed: {f}")))),
    }
}

fn parse_taus(text: &str) -> anyhow::Result<Vec<u64>> {
    let bad = || anyhow!(Error::InvalidConfig(format!("cannot parse tau range {text:?}")));
    if text.contains(':') {
        let parts: Vec<u64> =
            text.split(':').map(|p| p.trim().parse::<u64>()).collect::<Result<_, _>>().map_err(|_| bad())?;
        let (from, to, step) = match parts[..] {
            [a, b] => (a, b, 1),
            [a, b, s] if s > 0 => (a, b, s),
            _ => return Err(bad()),
        };
        if from > to {
            return Err(bad());
        }
        Ok((from..=to).step_by(step as usize).collect())
    } else {
        text.split(',').map(|p| p.trim().parse::<u64>().map_err(|_| bad())).collect()
    }
}

fn experiment(a: ExperimentArgs) -> anyhow::Result<()> {
    let sweep = SweepConfig {
        num_users: a.users,
        taus: parse_taus(&a.tau)?,
        size_min: a.size_min,
        size_max: a.size_max,
        samples: a.samples,
        seed: a.seed,
        algorithms: parse_algos(&a.algos)?,
        timing: a.timing,
        limits: Limits { clique_cap: a.cap, node_budget: a.node_budget },
    };
    let exec = if a.sequential { Exec::Sequential } else { Exec::default() };
    let result = sacm::experiment::run_experiment(&sweep, exec)?;

    let mut rows = Vec::new();
    write_rows_csv(&result, &mut rows)?;
    emit(a.out.as_deref(), std::str::from_utf8(&rows)?)?;
    if let Some(p) = &a.summary {
        let mut summary = Vec::new();
        write_summary_csv(&result, &mut summary)?;
        emit(Some(p), std::str::from_utf8(&summary)?)?;
    }
    Ok(())
}

fn enumerate(a: EnumerateArgs) -> anyhow::Result<()> {
    let instance = load_instance(&a.instance)?;
    let family = enumerate_all_cliques_with(instance.subfiles(), a.cap, Exec::default())?;
    let mut out = String::new();
    for g in family.groups() {
        let users: Vec<String> = g.users.to_one_based().iter().map(usize::to_string).collect();
        out.push_str(&format!("{{{}}}\t{}\n", users.join(","), g.cliques.len()));
    }
    out.push_str(&format!("total\t{}\n", family.len()));
    emit(None, &out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tau_specs() {
        assert_eq!(parse_taus("3:6").unwrap(), vec![3, 4, 5, 6]);
        assert_eq!(parse_taus("3:12:3").unwrap(), vec![3, 6, 9, 12]);
        assert_eq!(parse_taus("4, 8,16").unwrap(), vec![4, 8, 16]);
        for bad in ["6:3", "1:5:0", "a:b", "", "1:2:3:4"] {
            assert!(parse_taus(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn exit_codes() {
        assert_eq!(exit_code(&anyhow!(Error::CapExceeded { projected: 5, cap: 4 })), 3);
        assert_eq!(exit_code(&anyhow!(Error::EmptyPacket)), 2);
        assert_eq!(exit_code(&anyhow!(Rejected("x".into()))), 2);
        assert_eq!(exit_code(&anyhow!("other")), 1);
        assert_eq!(exit_code(&anyhow!(BudgetExhausted(10))), 3);
        let wrapped = anyhow!(Error::CapExceeded { projected: 5, cap: 4 }).context("while solving");
        assert_eq!(exit_code(&wrapped), 3);
    }
}
