mod config;

use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Parser, Subcommand, ValueEnum};
use dpo_vqe::baselines::{
    exhaustive_search, point_report, sae_run, simulated_annealing, SaConfig, SaeConfig,
};
use dpo_vqe::circuit::{logical_depth, route_and_depth, tailored_grid_layout, CouplingMap, GateKind};
use dpo_vqe::market::{generate_synthetic_prices, write_prices_csv};
use dpo_vqe::market::MarketModel;
use dpo_vqe::problem::{build_qubo, qubo_to_ising, DpoConfig, IsingHamiltonian, QuboProblem};
use dpo_vqe::vqe::{
    default_sampler_shots, random_baseline, run_vqe, AnsatzSpec, ProblemContext, RunReport,
};
use serde::Serialize;

use config::ExperimentConfig;

#[derive(Parser)]
#[command(name = "dpo", version, about = "Dynamic portfolio optimization with VQE and classical baselines")]
struct Cli {
    /// Worker threads for parallel sections (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a seeded synthetic price series as CSV.
    GenData {
        #[arg(long)]
        assets: usize,
        #[arg(long)]
        days: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Build the QUBO and Ising problem and write it as JSON.
    Build {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Solve the configured problem and write a run report.
    Solve {
        #[arg(long)]
        config: PathBuf,
        /// Overrides `[run] method`.
        #[arg(long, value_enum)]
        method: Option<Method>,
        /// Defaults to `report.json` in the output directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Summarize a run report and optionally export its cost histogram.
    Report {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        hist: Option<PathBuf>,
    },
    /// Print parameter count, gate counts and depth of an ansatz.
    Depth {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        ansatz: String,
        /// Edge-list coupling map; routes the circuit when given.
        #[arg(long)]
        coupling: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Method {
    Vqe,
    Exhaustive,
    Sa,
    Sae,
    Random,
}

impl Method {
    fn parse(name: &str) -> anyhow::Result<Self> {
        <Self as ValueEnum>::from_str(name, true).map_err(|_| {
            anyhow!("unknown method {name:?}; expected vqe, exhaustive, sa, sae or random")
        })
    }
}

/// Usage errors exit 1, runtime errors exit 2.
enum Failure {
    Usage(anyhow::Error),
    Runtime(anyhow::Error),
}

fn usage<E: Into<anyhow::Error>>(e: E) -> Failure {
    Failure::Usage(e.into())
}

fn runtime<E: Into<anyhow::Error>>(e: E) -> Failure {
    Failure::Runtime(e.into())
}

type CliResult<T> = Result<T, Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("error: --threads must be at least 1");
            return ExitCode::from(1);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: cannot size thread pool: {e}");
            return ExitCode::from(2);
        }
    }
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn dispatch(command: Command) -> CliResult<()> {
    match command {
        Command::GenData {
            assets,
            days,
            seed,
            out,
        } => gen_data(assets, days, seed, &out),
        Command::Build { config, out } => build(&config, &out),
        Command::Solve {
            config,
            method,
            out,
        } => solve(&config, method, out),
        Command::Report { input, hist } => report(&input, hist.as_deref()),
        Command::Depth {
            config,
            ansatz,
            coupling,
        } => depth(&config, &ansatz, coupling.as_deref()),
    }
}

fn create(path: &Path) -> CliResult<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)
            .with_context(|| format!("cannot create {}", dir.display()))
            .map_err(runtime)?;
    }
    File::create(path)
        .map(BufWriter::new)
        .with_context(|| format!("cannot write {}", path.display()))
        .map_err(runtime)
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult<()> {
    let mut out = create(path)?;
    serde_json::to_writer_pretty(&mut out, value).map_err(runtime)?;
    use std::io::Write;
    writeln!(out).map_err(runtime)
}

fn gen_data(assets: usize, days: usize, seed: u64, out: &Path) -> CliResult<()> {
    let series = generate_synthetic_prices(assets, days, seed).map_err(usage)?;
    write_prices_csv(&series, create(out)?).map_err(runtime)?;
    eprintln!("wrote {assets} assets x {days} days to {}", out.display());
    Ok(())
}

/// Config, market model and Ising problem.
struct Loaded {
    config: ExperimentConfig,
    dpo: DpoConfig,
    model: MarketModel,
    qubo: QuboProblem,
    ising: IsingHamiltonian,
}

fn load_config(path: &Path) -> CliResult<(ExperimentConfig, DpoConfig)> {
    let config = ExperimentConfig::load(path).map_err(usage)?;
    let dpo = config.dpo_config().map_err(usage)?;
    Ok((config, dpo))
}

fn load_problem(config: ExperimentConfig, dpo: DpoConfig) -> CliResult<Loaded> {
    let grid = config.validate_data(&dpo).map_err(usage)?;
    let model = config.market_model(&dpo, &grid).map_err(runtime)?;
    let qubo = build_qubo(&dpo, &model).map_err(runtime)?;
    let ising = qubo_to_ising(&qubo);
    Ok(Loaded {
        config,
        dpo,
        model,
        qubo,
        ising,
    })
}

#[derive(Serialize)]
struct ProblemFile<'a> {
    config: &'a DpoConfig,
    market: &'a MarketModel,
    qubo: &'a QuboProblem,
    ising: &'a IsingHamiltonian,
    offset: f64,
}

fn build(config: &Path, out: &Path) -> CliResult<()> {
    let (config, dpo) = load_config(config)?;
    let p = load_problem(config, dpo)?;
    write_json(
        out,
        &ProblemFile {
            config: &p.dpo,
            market: &p.model,
            qubo: &p.qubo,
            ising: &p.ising,
            offset: p.ising.offset(),
        },
    )?;
    eprintln!(
        "{} qubits, {} Ising terms, offset {}; wrote {}",
        p.ising.n_qubits(),
        p.ising.n_terms(),
        p.ising.offset(),
        out.display()
    );
    Ok(())
}

fn solve(config_path: &Path, method: Option<Method>, out: Option<PathBuf>) -> CliResult<()> {
    let (config, dpo) = load_config(config_path)?;
    let method = match method {
        Some(m) => m,
        None => Method::parse(config.run.method.as_deref().unwrap_or("vqe")).map_err(usage)?,
    };
    let out = match (out, config.output_dir()) {
        (Some(out), _) => out,
        (None, Some(dir)) => dir.join("report.json"),
        (None, None) => {
            return Err(usage(anyhow!(
                "no report destination; pass --out or set [output] directory"
            )))
        }
    };
    // validate every run setting before touching data
    let vqe_run = match method {
        Method::Vqe => Some(config.vqe_run().map_err(usage)?),
        _ => None,
    };
    let seed = config.seed();
    let sae_config = match method {
        Method::Sae => {
            let time = config
                .run
                .evolution_time
                .or(config.preset().map_err(usage)?.map(|p| p.adiabatic_time()))
                .unwrap_or(10.0);
            let mut sae = SaeConfig::new(time, seed);
            if let Some(steps) = config.run.trotter_steps {
                sae.trotter_steps = steps;
            }
            if let Some(c) = config.run.checkpoints {
                sae.checkpoints = c;
            }
            sae.shots = config.run.shots;
            sae.qubit_cap = config.qubit_cap();
            Some(sae)
        }
        _ => None,
    };

    let p = load_problem(config, dpo)?;
    let ctx = ProblemContext::portfolio(&p.ising, &p.dpo, &p.model);
    let started = std::time::Instant::now();
    let mut trace = None;
    let mut report: RunReport = match method {
        Method::Vqe => run_vqe(&ctx, vqe_run.as_ref().expect("built above")).map_err(runtime)?,
        Method::Exhaustive => {
            let r = exhaustive_search(&p.ising).map_err(runtime)?;
            point_report("exhaustive", seed, &ctx, &r.argmin).map_err(runtime)?
        }
        Method::Sa => {
            let cfg = SaConfig::new(
                p.config.run.sweeps.unwrap_or(1000),
                p.config.run.restarts.unwrap_or(16),
                seed,
            );
            let r = simulated_annealing(&p.ising, &cfg).map_err(runtime)?;
            point_report("sa", seed, &ctx, &r.argmin).map_err(runtime)?
        }
        Method::Sae => {
            let t = sae_run(&p.ising, sae_config.as_ref().expect("built above")).map_err(runtime)?;
            let r = t.to_report(seed, &ctx).map_err(runtime)?;
            trace = Some(t);
            r
        }
        Method::Random => {
            let shots = p
                .config
                .run
                .shots
                .unwrap_or(default_sampler_shots(p.ising.n_qubits()));
            random_baseline(&ctx, shots, seed).map_err(runtime)?
        }
    };
    if report.metadata.wall_time_s == 0.0 {
        report.metadata.wall_time_s = started.elapsed().as_secs_f64();
    }
    write_json(&out, &report)?;

    if let Some(dir) = p.config.output_dir() {
        report
            .distribution
            .write_csv(create(&dir.join("histogram.csv"))?)
            .map_err(runtime)?;
        if let Some(log) = &report.convergence {
            log.write_csv(create(&dir.join("convergence.csv"))?)
                .map_err(runtime)?;
        }
        if let Some(t) = &trace {
            t.write_csv(create(&dir.join("sae_trace.csv"))?)
                .map_err(runtime)?;
        }
    }
    eprintln!(
        "{}: min_cost {} at {} ({:.2}% below offset {}); wrote {}",
        report.method,
        report.min_cost,
        report.best_bitstring,
        report.pct_below_offset,
        report.offset,
        out.display()
    );
    Ok(())
}

fn report(input: &Path, hist: Option<&Path>) -> CliResult<()> {
    let text = fs::read_to_string(input)
        .with_context(|| format!("cannot read {}", input.display()))
        .map_err(runtime)?;
    let report: RunReport = serde_json::from_str(&text)
        .with_context(|| format!("{} is not a run report", input.display()))
        .map_err(usage)?;
    eprintln!("method = {}", report.method);
    eprintln!("n_qubits = {}", report.n_qubits);
    eprintln!("seed = {}", report.seed);
    eprintln!("min_cost = {}", report.min_cost);
    eprintln!("best_bitstring = {}", report.best_bitstring);
    match report.sharpe {
        Some(s) => eprintln!("sharpe = {s}"),
        None => eprintln!("sharpe = undefined"),
    }
    eprintln!("offset = {}", report.offset);
    eprintln!("pct_below_offset = {}", report.pct_below_offset);
    if let Some(e) = report.expectation {
        eprintln!("expectation = {e}");
    }
    if let Some(path) = hist {
        report
            .distribution
            .write_csv(create(path)?)
            .map_err(runtime)?;
        eprintln!("wrote histogram to {}", path.display());
    }
    Ok(())
}

fn depth(config: &Path, ansatz: &str, coupling: Option<&Path>) -> CliResult<()> {
    let (config, dpo) = load_config(config)?;
    let spec: AnsatzSpec = if ansatz == config.run.ansatz.as_deref().unwrap_or("") {
        config.ansatz()
    } else {
        ExperimentConfig::ansatz_named(ansatz, None, None)
    }
    .map_err(usage)?;
    let map = coupling
        .map(|path| CouplingMap::load(path).map_err(runtime))
        .transpose()?;
    let circuit = spec.build(dpo.n_qubits(), Some(&dpo)).map_err(usage)?;
    eprintln!("ansatz = {}", spec.name());
    eprintln!("n_qubits = {}", circuit.n_qubits());
    eprintln!("n_params = {}", circuit.n_params());
    eprintln!("cnot_count = {}", circuit.count(GateKind::Cnot));
    eprintln!("logical_depth = {}", logical_depth(&circuit));
    if let Some(map) = map {
        if map.n_physical() < circuit.n_qubits() {
            return Err(usage(anyhow!(
                "coupling map has {} qubits, circuit needs {}",
                map.n_physical(),
                circuit.n_qubits()
            )));
        }
        let layout: Vec<usize> = match spec {
            AnsatzSpec::Tailored => tailored_grid_layout(&dpo),
            _ => (0..circuit.n_qubits()).collect(),
        };
        let routed = route_and_depth(&circuit, &map, &layout).map_err(runtime)?;
        eprintln!("swap_count = {}", routed.swap_count);
        eprintln!("routed_depth = {}", routed.depth);
    }
    Ok(())
}
