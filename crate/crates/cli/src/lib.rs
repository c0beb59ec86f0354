//! The `fondgen` command line.
//!
//! Exit codes: 0 on success, 1 when a policy fails a check or training
//! fails, 2 on usage, input or format errors.

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use fondgen::deadend::label_model;
use fondgen::features::{generate_pool, PoolConfig, Sample, DEFAULT_POOL_CAP};
use fondgen::learner::{build_theory, Mode, TrainingInstance, Variant};
use fondgen::pddl::{load_task, GroundTask};
use fondgen::policy::{parse_policy, ConcretePolicy, GeneralPolicy};
use fondgen::state_space::{expand_model, Label, DEFAULT_STATE_LIMIT};
use fondgen::trainer::{emit_report, incremental_train, InstanceStatus, ReportFormat, RunConfig};
use fondgen::verifier::{certificate_failure, parse_certificate, simulate_check, verify_policy, CertificateFailure, Reason, DEFAULT_MAX_STEPS};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

#[derive(Debug, Parser)]
#[command(name = "fondgen", version, about = "Learn and verify general policies for FOND planning")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train a policy incrementally over a suite of problems.
    Learn(LearnArgs),
    /// Check a policy on problems, exactly, by simulation or with a certificate.
    Verify(VerifyArgs),
    /// Count alive, goal, dead and critical states.
    Deadends(DeadendsArgs),
    /// Print the feature pool generated from problems.
    Features(FeaturesArgs),
    /// Run a policy on problems with random outcomes.
    Simulate(SimulateArgs),
}

#[derive(Debug, Args)]
pub struct Inputs {
    #[arg(long)]
    pub domain: PathBuf,
    #[arg(long = "problems", alias = "problem", num_args = 1.., required = true)]
    pub problems: Vec<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Format {
    Table,
    Json,
}

#[derive(Debug, Args)]
pub struct LearnArgs {
    /// TOML run configuration; flags given here override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub domain: Option<PathBuf>,
    #[arg(long = "problems", num_args = 1..)]
    pub problems: Vec<PathBuf>,
    #[arg(long)]
    pub cmax: Option<usize>,
    #[arg(long)]
    pub variant: Option<Variant>,
    #[arg(long)]
    pub mode: Option<Mode>,
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_name = "SECS")]
    pub time_limit: Option<f64>,
    #[arg(long, value_name = "MB")]
    pub memory_limit: Option<u64>,
    #[arg(long)]
    pub state_limit: Option<usize>,
    #[arg(long)]
    pub max_literals: Option<usize>,
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "table")]
    pub format: Format,
}

#[derive(Debug, Args)]
#[group(id = "check", multiple = false)]
pub struct CheckKind {
    /// Exact strong-cyclic verification on the expanded model (default).
    #[arg(long, group = "check")]
    pub exact: bool,
    /// Random simulation only.
    #[arg(long, group = "check")]
    pub simulate: bool,
    /// Check that the policy descends over the certificate in this file.
    #[arg(long, group = "check", value_name = "FILE")]
    pub certificate: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub inputs: Inputs,
    #[arg(long)]
    pub policy: PathBuf,
    #[command(flatten)]
    pub kind: CheckKind,
    /// Print the counterexample trajectory of a failed exact check.
    #[arg(long)]
    pub witness: bool,
    #[arg(long, default_value_t = 10)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = DEFAULT_MAX_STEPS)]
    pub max_steps: usize,
    #[arg(long, default_value_t = DEFAULT_STATE_LIMIT)]
    pub state_limit: usize,
}

#[derive(Debug, Args)]
pub struct DeadendsArgs {
    #[command(flatten)]
    pub inputs: Inputs,
    /// Also print every dead state.
    #[arg(long)]
    pub list: bool,
    #[arg(long, default_value_t = DEFAULT_STATE_LIMIT)]
    pub state_limit: usize,
}

#[derive(Debug, Args)]
pub struct FeaturesArgs {
    #[command(flatten)]
    pub inputs: Inputs,
    #[arg(long, default_value_t = 4)]
    pub cmax: usize,
    #[arg(long, default_value_t = DEFAULT_POOL_CAP)]
    pub cap: usize,
    #[arg(long, default_value_t = DEFAULT_STATE_LIMIT)]
    pub state_limit: usize,
    /// Write the learning theory over these problems and the pool as WCNF.
    #[arg(long, value_name = "FILE")]
    pub dump_wcnf: Option<PathBuf>,
    #[arg(long, default_value = "safe-labeled")]
    pub variant: Variant,
    #[arg(long, default_value = "state")]
    pub mode: Mode,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub inputs: Inputs,
    #[arg(long)]
    pub policy: PathBuf,
    #[arg(long, default_value_t = 10)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = DEFAULT_MAX_STEPS)]
    pub max_steps: usize,
}

/// Parses `args` (program name first) and runs the command, writing results
/// to `out` and diagnostics to standard error. Returns the exit code.
pub fn run_cli<I, T>(args: I, out: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(cli, out) {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(e) => {
            eprintln!("error: {e:#}");
            2
        }
    }
}

/// Runs a parsed command; `Ok(false)` means a check or training failed.
pub fn run(cli: Cli, out: &mut dyn Write) -> Result<bool> {
    match cli.command {
        Command::Learn(a) => learn(a, out),
        Command::Verify(a) => verify(a, out),
        Command::Deadends(a) => deadends(a, out),
        Command::Features(a) => features(a, out),
        Command::Simulate(a) => simulate(a, out),
    }
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn tasks(inputs: &Inputs) -> Result<Vec<(String, Arc<GroundTask>)>> {
    let domain = read(&inputs.domain)?;
    inputs
        .problems
        .iter()
        .map(|p| {
            let task = load_task(&domain, &read(p)?).with_context(|| format!("in {}", p.display()))?;
            Ok((p.display().to_string(), Arc::new(task)))
        })
        .collect()
}

fn load_policy(path: &Path) -> Result<GeneralPolicy> {
    parse_policy(&read(path)?).with_context(|| format!("in {}", path.display()))
}

fn learn(a: LearnArgs, out: &mut dyn Write) -> Result<bool> {
    let mut config = match &a.config {
        Some(path) => RunConfig::load(path)?,
        None => {
            let domain = a.domain.clone().context("--domain or --config is required")?;
            RunConfig::new(domain, a.problems.clone())
        }
    };
    if let Some(d) = a.domain {
        config.domain = d;
    }
    if !a.problems.is_empty() {
        config.problems = a.problems;
    }
    macro_rules! set {
        ($($flag:ident => $field:ident),*) => { $(if let Some(v) = a.$flag { config.$field = v; })* };
    }
    set!(cmax => c_max, variant => variant, mode => mode, trials => trials, seed => seed, state_limit => state_limit);
    if a.time_limit.is_some() {
        config.time_limit_secs = a.time_limit;
    }
    if a.memory_limit.is_some() {
        config.memory_limit_mb = a.memory_limit;
    }
    if a.max_literals.is_some() {
        config.max_literals = a.max_literals;
    }
    if a.output.is_some() {
        config.output_dir = a.output;
    }
    let (policy, report) = incremental_train(&config)?;
    write!(out, "{policy}")?;
    let format = match a.format {
        Format::Table => ReportFormat::Table,
        Format::Json => ReportFormat::Json,
    };
    write!(out, "{}", emit_report(&report, format))?;
    let failed = report.instances.iter().any(|i| matches!(i.status, InstanceStatus::Failed | InstanceStatus::SimFailed));
    Ok(report.failure.is_none() && !failed)
}

fn verify(a: VerifyArgs, out: &mut dyn Write) -> Result<bool> {
    let policy = load_policy(&a.policy)?;
    let certificate = match &a.kind.certificate {
        Some(path) => Some(parse_certificate(&read(path)?).with_context(|| format!("in {}", path.display()))?),
        None => None,
    };
    let mut all = true;
    for (name, task) in tasks(&a.inputs)? {
        if a.kind.simulate {
            let ok = simulate_check(&policy, &task, a.trials, a.seed, a.max_steps)?;
            writeln!(out, "{name}: {}", if ok { "sim-pass" } else { "sim-fail" })?;
            all &= ok;
            continue;
        }
        let model = label_model(&expand_model(task, a.state_limit)?).model;
        if let Some(cert) = &certificate {
            let concrete = ConcretePolicy::project(&policy, &model)?;
            match certificate_failure(&concrete, &model, cert)? {
                None => writeln!(out, "{name}: certificate holds")?,
                Some(f) => {
                    all = false;
                    match f {
                        CertificateFailure::DeadEnd(t) => writeln!(out, "{name}: reaches a dead-end\n{}", t.render(&model))?,
                        CertificateFailure::Incomplete(s) => writeln!(out, "{name}: no action selected in {}", model.state_string(s))?,
                        CertificateFailure::NotDescending { state, action } => {
                            writeln!(out, "{name}: {} does not descend in {}", model.task.action_name(action), model.state_string(state))?
                        }
                    }
                }
            }
            continue;
        }
        let verdict = verify_policy(&policy, &model)?;
        all &= verdict.solved;
        writeln!(out, "{name}: {}", if verdict.solved { "solved".to_string() } else { format!("failed ({})", verdict.reason) })?;
        if a.witness {
            match &verdict.reason {
                Reason::ReachesDeadEnd(t) | Reason::Stuck(t) => writeln!(out, "{}", t.render(&model))?,
                Reason::UnfairLivelock(states) => {
                    for &s in states {
                        writeln!(out, "  {}", model.state_string(s))?;
                    }
                }
                Reason::Ok | Reason::Limit => {}
            }
        }
    }
    Ok(all)
}

fn deadends(a: DeadendsArgs, out: &mut dyn Write) -> Result<bool> {
    for (name, task) in tasks(&a.inputs)? {
        let p = label_model(&expand_model(task, a.state_limit)?);
        let init = p.model.label(p.model.init).expect("labeled");
        writeln!(
            out,
            "{name}: states={} alive={} goal={} dead={} critical={} init={}",
            p.model.len(),
            p.alive.len(),
            p.goal.len(),
            p.dead.len(),
            p.critical.len(),
            match init {
                Label::Alive => "alive",
                Label::Goal => "goal",
                Label::Dead => "dead",
            }
        )?;
        if a.list {
            for &s in &p.dead {
                writeln!(out, "  {}", p.model.state_string(s))?;
            }
        }
    }
    Ok(true)
}

fn features(a: FeaturesArgs, out: &mut dyn Write) -> Result<bool> {
    let tasks = tasks(&a.inputs)?;
    let config = PoolConfig { cap: a.cap, ..PoolConfig::new(a.cmax) };
    let training: Vec<TrainingInstance> = match &a.dump_wcnf {
        Some(_) => tasks.iter().map(|(n, t)| TrainingInstance::new(n.clone(), t.clone(), a.state_limit)).collect::<Result<_, _>>()?,
        None => Vec::new(),
    };
    let models = tasks.iter().map(|(_, t)| expand_model(t.clone(), a.state_limit)).collect::<Result<Vec<_>, _>>()?;
    let samples: Vec<Sample<'_>> = models.iter().map(|m| (&*m.task, m.states.as_slice())).collect();
    let pool = generate_pool(&samples, &config)?;
    for f in &pool {
        writeln!(out, "{}\t{f}", f.weight())?;
    }
    if let Some(path) = &a.dump_wcnf {
        let parts: Vec<_> = training.into_iter().map(|t| t.partition).collect();
        let theory = build_theory(&parts, &pool, a.variant, a.mode)?;
        std::fs::write(path, theory.to_wcnf()).with_context(|| format!("cannot write {}", path.display()))?;
    }
    Ok(true)
}

fn simulate(a: SimulateArgs, out: &mut dyn Write) -> Result<bool> {
    let policy = load_policy(&a.policy)?;
    let mut all = true;
    for (name, task) in tasks(&a.inputs)? {
        let ok = simulate_check(&policy, &task, a.trials, a.seed, a.max_steps)?;
        writeln!(out, "{name}: {}", if ok { "pass" } else { "fail" })?;
        all &= ok;
    }
    Ok(all)
}
