//! The `ifp-syncnet` command-line front end.
//!
//! Exit codes: 0 success, 1 input error, 2 agent not certifiable,
//! 3 certificate (or self-test) failure, 4 divergence.

mod selftest;
mod svg;

use std::ffi::OsString;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

pub use selftest::{random_outputs, random_strongly_connected, random_weak_alphas, run_selftest, SelftestReport};
pub use svg::plot_outputs;

use crate::certify::{check_theorem1, check_theorem2, CaccGainSet};
use crate::graphnet::Digraph;
use crate::netsim::{simulate_agents, AgentSpec, Protocol, SimConfig, SimError, SimResult, SyncMetrics};
use crate::passivity::{ifp_index, prl_conditions, PassivityError, RationalTF};
use crate::scenarios::{build_platoon, PlatoonSpec, RunOptions, ScenarioError, ScenarioSpec};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_NOT_CERTIFIABLE: i32 = 2;
pub const EXIT_CERTIFICATE_FAILED: i32 = 3;
pub const EXIT_DIVERGED: i32 = 4;

pub const CSV_FILE: &str = "result.csv";
pub const METRICS_FILE: &str = "metrics.json";
pub const REPORT_FILE: &str = "report.json";
pub const PLOT_FILE: &str = "plot.svg";

#[derive(Debug, Parser)]
#[command(name = "ifp-syncnet", version, about = "Certify and simulate synchronization of IFP agent networks")]
pub struct Cli {
    /// Directory for result.csv, metrics.json and plot.svg.
    #[arg(long, global = true, env = "IFPSYNC_OUTPUT_DIR", default_value = "ifpsync-out")]
    pub output_dir: PathBuf,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args, Clone, Copy)]
pub struct SimOverrides {
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long)]
    pub t_final: Option<f64>,
    /// Synchronization tolerance on the tail pairwise gap.
    #[arg(long)]
    pub tol: Option<f64>,
}

impl SimOverrides {
    fn run_options(self) -> RunOptions {
        RunOptions { dt: self.dt, t_final: self.t_final, tol: self.tol, record_stride: None }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// IFP index and positive-real report of a transfer function `{"num": [...], "den": [...]}`.
    Ifp { input: PathBuf },
    /// Weak-coupling certificate of a network.
    Certify {
        input: PathBuf,
        /// Reference-tracking form with pinning gains `b`.
        #[arg(long)]
        reference: bool,
    },
    /// Simulate a network and write CSV and metrics.
    Simulate {
        input: PathBuf,
        #[arg(long)]
        plot: bool,
        #[command(flatten)]
        overrides: SimOverrides,
        /// Overwrite existing output files.
        #[arg(long)]
        force: bool,
    },
    /// Run a traffic, platoon, remark1 or harmonic scenario.
    Scenario {
        input: PathBuf,
        #[arg(long)]
        plot: bool,
        /// Input is an array of scenarios, run concurrently into run_NNN/ subdirectories.
        #[arg(long)]
        sweep: bool,
        #[command(flatten)]
        overrides: SimOverrides,
        #[arg(long)]
        force: bool,
    },
    /// Randomized identity checks.
    #[command(hide = true)]
    Selftest {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 200)]
        cases: usize,
    },
}

/// Network file for `simulate`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkSpec {
    pub agents: Vec<AgentSpec>,
    pub protocol: Protocol,
    #[serde(default)]
    pub config: Option<SimConfig>,
}

/// Network file for `certify`: indices given directly or derived from agents.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CertifyInput {
    #[serde(default)]
    pub adjacency: Option<Vec<Vec<f64>>>,
    #[serde(default)]
    pub alphas: Option<Vec<f64>>,
    #[serde(default)]
    pub agents: Option<Vec<AgentSpec>>,
    #[serde(default)]
    pub transfer_functions: Option<Vec<RationalTF>>,
    #[serde(default)]
    pub b: Option<Vec<f64>>,
    /// Platoon gains; certifies the transformed platoon network instead.
    #[serde(default)]
    pub cacc: Option<CaccGainSet>,
}

/// Contents of `metrics.json`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MetricsFile {
    #[serde(flatten)]
    pub metrics: SyncMetrics,
    pub diverged: bool,
    pub blowup_time: Option<f64>,
    pub samples: usize,
    pub t_end: f64,
}

#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn input(message: impl Into<String>) -> Self {
        Self { code: EXIT_INPUT, message: message.into() }
    }
}

impl From<PassivityError> for Failure {
    fn from(e: PassivityError) -> Self {
        let code = match e {
            PassivityError::NotCertifiable(_) | PassivityError::MuTauViolation { .. } => EXIT_NOT_CERTIFIABLE,
            _ => EXIT_INPUT,
        };
        Self { code, message: e.to_string() }
    }
}

impl From<ScenarioError> for Failure {
    fn from(e: ScenarioError) -> Self {
        match e {
            ScenarioError::Passivity(p) => p.into(),
            other => Failure::input(other.to_string()),
        }
    }
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

fn print_json(v: &impl Serialize) {
    // a closed pipe is not an error worth reporting
    let _ = writeln!(io::stdout().lock(), "{}", serde_json::to_string_pretty(v).expect("serializable"));
}

/// Output directory that refuses to clobber files unless forced.
struct Output {
    dir: PathBuf,
    force: bool,
}

impl Output {
    fn prepare(&self, files: &[&str]) -> Result<(), Failure> {
        fs::create_dir_all(&self.dir).map_err(|e| Failure::input(format!("{}: {e}", self.dir.display())))?;
        if !self.force {
            if let Some(f) = files.iter().map(|f| self.dir.join(f)).find(|p| p.exists()) {
                return Err(Failure::input(format!("{} exists; pass --force to overwrite", f.display())));
            }
        }
        Ok(())
    }

    fn write(&self, file: &str, contents: &[u8]) -> Result<(), Failure> {
        let p = self.dir.join(file);
        fs::write(&p, contents).map_err(|e| Failure::input(format!("{}: {e}", p.display())))
    }

    fn files(plot: bool, report: bool) -> Vec<&'static str> {
        let mut f = vec![CSV_FILE, METRICS_FILE];
        if report {
            f.push(REPORT_FILE);
        }
        if plot {
            f.push(PLOT_FILE);
        }
        f
    }

    /// Writes CSV, metrics and optionally the plot of `sim`.
    fn write_run(&self, sim: &SimResult, blowup_time: Option<f64>, plot: Option<&str>) -> Result<MetricsFile, Failure> {
        let mut csv = Vec::new();
        sim.write_csv(&mut csv).map_err(|e| Failure::input(e.to_string()))?;
        self.write(CSV_FILE, &csv)?;
        let metrics = MetricsFile {
            metrics: sim.metrics.clone(),
            diverged: blowup_time.is_some(),
            blowup_time,
            samples: sim.times.len(),
            t_end: sim.times.last().copied().unwrap_or(0.0),
        };
        self.write(METRICS_FILE, serde_json::to_string_pretty(&metrics).expect("serializable").as_bytes())?;
        if let Some(title) = plot {
            self.write(PLOT_FILE, plot_outputs(sim, title).as_bytes())?;
        }
        Ok(metrics)
    }
}

fn cmd_ifp(input: &Path) -> Result<i32, Failure> {
    let tf: RationalTF = read_json(input)?;
    match ifp_index(&tf) {
        Ok(cert) => {
            let prl = prl_conditions(&tf, cert.alpha);
            print_json(&json!({ "certificate": cert, "prl": prl }));
            Ok(EXIT_OK)
        }
        Err(PassivityError::NotCertifiable(reason)) => {
            print_json(&json!({ "certifiable": false, "reason": reason }));
            Ok(EXIT_NOT_CERTIFIABLE)
        }
        Err(e) => Err(e.into()),
    }
}

fn derive_alphas(input: &CertifyInput) -> Result<Vec<f64>, Failure> {
    match (&input.alphas, &input.agents, &input.transfer_functions) {
        (Some(a), None, None) => Ok(a.clone()),
        (None, Some(agents), None) => agents.iter().map(|a| Ok(a.ifp_certificate()?.alpha)).collect(),
        (None, None, Some(tfs)) => tfs.iter().map(|tf| Ok(ifp_index(tf)?.alpha)).collect(),
        _ => Err(Failure::input("give exactly one of alphas, agents, transfer_functions")),
    }
}

fn cmd_certify(input: &Path, reference: bool) -> Result<i32, Failure> {
    let input: CertifyInput = read_json(input)?;
    if let Some(gains) = &input.cacc {
        let n = gains.n();
        let spec = PlatoonSpec {
            gains: gains.clone(),
            s: vec![1.0; n],
            v0: 0.0,
            q0_init: 0.0,
            q_init: None,
            v_init: None,
            a_init: None,
        };
        let build = build_platoon(&spec)?;
        let passes = build.certified();
        print_json(&json!({
            "mode": "cacc",
            "passes": passes,
            "alphas": build.alphas,
            "adjacency": build.protocol.graph().to_rows(),
            "theorem2": build.theorem2,
            "theorem4": build.theorem4,
        }));
        return Ok(if passes { EXIT_OK } else { EXIT_CERTIFICATE_FAILED });
    }
    let rows = input.adjacency.as_ref().ok_or_else(|| Failure::input("missing adjacency"))?;
    let g = Digraph::new(rows).map_err(|e| Failure::input(e.to_string()))?;
    let alphas = derive_alphas(&input)?;
    let reference = reference || input.b.is_some();
    let verdict = if reference {
        let b = input.b.clone().unwrap_or_else(|| vec![0.0; g.n()]);
        check_theorem2(&g, &alphas, &b)
    } else {
        check_theorem1(&g, &alphas)
    }
    .map_err(|e| Failure::input(e.to_string()))?;
    let passes = verdict.passes;
    print_json(&json!({
        "mode": if reference { "reference" } else { "plain" },
        "alphas": alphas,
        "verdict": verdict,
    }));
    Ok(if passes { EXIT_OK } else { EXIT_CERTIFICATE_FAILED })
}

fn cmd_simulate(input: &Path, plot: bool, overrides: SimOverrides, out: &Output) -> Result<i32, Failure> {
    let spec: NetworkSpec = read_json(input)?;
    let mut config = spec.config.clone().unwrap_or_else(|| SimConfig::new(1e-3, 100.0));
    if let Some(dt) = overrides.dt {
        config.dt = dt;
    }
    if let Some(t) = overrides.t_final {
        config.t_final = t;
    }
    if let Some(tol) = overrides.tol {
        config.sync_tol = tol;
    }
    let agents = spec
        .agents
        .iter()
        .map(AgentSpec::build)
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| Failure::input(e.to_string()))?;
    out.prepare(&Output::files(plot, false))?;
    let title = plot.then_some("agent outputs");
    match simulate_agents(agents, spec.protocol, &config) {
        Ok(sim) => {
            print_json(&out.write_run(&sim, None, title)?);
            Ok(EXIT_OK)
        }
        Err(SimError::NumericalBlowup { time, partial }) => {
            print_json(&out.write_run(&partial, Some(time), title)?);
            eprintln!("diverged at t = {time}");
            Ok(EXIT_DIVERGED)
        }
        Err(e) => Err(Failure::input(e.to_string())),
    }
}

fn scenario_title(spec: &ScenarioSpec) -> &'static str {
    match spec {
        ScenarioSpec::Traffic(_) => "vehicle velocities",
        ScenarioSpec::Platoon(_) => "platoon outputs q_i + s_1 + ... + s_i",
        ScenarioSpec::Remark1(_) => "all-to-all third-order agents",
        ScenarioSpec::Harmonic(_) => "harmonic oscillator outputs",
    }
}

fn run_one_scenario(spec: &ScenarioSpec, plot: bool, overrides: SimOverrides, out: &Output) -> Result<(i32, Value), Failure> {
    out.prepare(&Output::files(plot, true))?;
    let outcome = spec.run(overrides.run_options())?;
    let diverged = outcome.report.failed_by_divergence();
    out.write_run(&outcome.sim, diverged.then(|| *outcome.sim.times.last().unwrap_or(&0.0)), plot.then(|| scenario_title(spec)))?;
    let report = serde_json::to_value(&outcome.report).expect("serializable");
    out.write(REPORT_FILE, serde_json::to_string_pretty(&report).expect("serializable").as_bytes())?;
    Ok((if diverged { EXIT_DIVERGED } else { EXIT_OK }, report))
}

fn cmd_scenario(input: &Path, plot: bool, sweep: bool, overrides: SimOverrides, out: &Output) -> Result<i32, Failure> {
    if !sweep {
        let spec: ScenarioSpec = read_json(input)?;
        let (code, report) = run_one_scenario(&spec, plot, overrides, out)?;
        print_json(&report);
        return Ok(code);
    }
    let specs: Vec<ScenarioSpec> = read_json(input)?;
    let results: Vec<Result<(i32, Value), Failure>> = std::thread::scope(|s| {
        let handles: Vec<_> = specs
            .iter()
            .enumerate()
            .map(|(k, spec)| {
                let out = Output { dir: out.dir.join(format!("run_{k:03}")), force: out.force };
                s.spawn(move || run_one_scenario(spec, plot, overrides, &out))
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("scenario thread panicked")).collect()
    });
    let mut code = EXIT_OK;
    let mut reports = Vec::new();
    for r in results {
        match r {
            Ok((c, report)) => {
                code = code.max(c);
                reports.push(report);
            }
            Err(f) => {
                eprintln!("error: {}", f.message);
                code = code.max(f.code);
                reports.push(json!({ "error": f.message }));
            }
        }
    }
    print_json(&reports);
    Ok(code)
}

fn cmd_selftest(seed: u64, cases: usize) -> i32 {
    let report = run_selftest(seed, cases, cases / 2);
    print_json(&report);
    if report.passed {
        EXIT_OK
    } else {
        EXIT_CERTIFICATE_FAILED
    }
}

/// Parses `args` (including the program name), runs the command and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
        }
    };
    let out = |force| Output { dir: cli.output_dir.clone(), force };
    let result = match &cli.command {
        Command::Ifp { input } => cmd_ifp(input),
        Command::Certify { input, reference } => cmd_certify(input, *reference),
        Command::Simulate { input, plot, overrides, force } => cmd_simulate(input, *plot, *overrides, &out(*force)),
        Command::Scenario { input, plot, sweep, overrides, force } => {
            cmd_scenario(input, *plot, *sweep, *overrides, &out(*force))
        }
        Command::Selftest { seed, cases } => Ok(cmd_selftest(*seed, *cases)),
    };
    match result {
        Ok(code) => code,
        Err(f) => {
            eprintln!("error: {}", f.message);
            f.code
        }
    }
}
