use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use ppslab::connection::{classify, connection_state, norm_bound_check, retrodictive_state, weak_value, CLASSIFY_TOL};
use ppslab::dynamics::{connection_state_at, HamiltonianSchedule};
use ppslab::measurement::{abl_probabilities, born_probability, strong_pps_via_connection};
use ppslab::qmcore::{ComplexMatrix, DensityMatrix, Observable, PovmElement};
use ppslab::scenario::{run_scenario, OutputFormat, ScenarioConfig, ScenarioName};
use ppslab::tomography::{read_weak_value_csv, reconstruct_connection, OperatorBasis};
use ppslab::Error;

#[derive(Parser)]
#[command(name = "ppslab", version, about = "Connection states and weak values of pre- and post-selected ensembles")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args)]
struct RunArgs {
    /// Scenario parameters as a JSON object.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output file (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct PairArgs {
    /// Density matrix JSON file.
    #[arg(long)]
    rho: PathBuf,
    /// Effect JSON file.
    #[arg(long)]
    effect: PathBuf,
}

#[derive(Args)]
struct TripleArgs {
    #[command(flatten)]
    pair: PairArgs,
    /// Observable JSON file.
    #[arg(long)]
    observable: PathBuf,
}

#[derive(Subcommand)]
enum Cmd {
    UncertaintyScan(RunArgs),
    AmplificationScan(RunArgs),
    DynamicsTrace(RunArgs),
    TomographyRoundtrip(RunArgs),
    DetectorTomography(RunArgs),
    MeterSweep(RunArgs),
    /// Complex weak value Tr(A w).
    WeakValue(TripleArgs),
    /// Connection state w = ρE/Tr(ρE) with its Hermitian and anti-Hermitian parts.
    Connection(PairArgs),
    /// Usual/unusual classification of w.
    Classify(PairArgs),
    /// Operator norms of w, w' and w''.
    NormBound(PairArgs),
    /// Post-selection probability Tr(ρE).
    Born(PairArgs),
    /// ABL probabilities of a strong intermediate measurement.
    Abl(TripleArgs),
    /// Strong PPS probabilities Tr(Π_i w'), valid only for commuting cases.
    StrongPps(TripleArgs),
    /// Retrodictive state E / Tr E.
    Retrodictive {
        #[arg(long)]
        effect: PathBuf,
    },
    /// Connection state at time t under a Hamiltonian schedule.
    Evolve {
        #[command(flatten)]
        pair: PairArgs,
        #[arg(long)]
        schedule: PathBuf,
        #[arg(long)]
        t: f64,
    },
    /// Reconstruct w from a weak-value CSV measured with the standard probes.
    Reconstruct {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        dim: usize,
    },
}

enum Failure {
    Usage(String),
    Domain(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Domain(e)
    }
}

fn read_json<T: for<'de> serde::Deserialize<'de>>(path: &Path) -> Result<T, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn load_pair(p: &PairArgs) -> Result<(DensityMatrix, PovmElement), Failure> {
    let rho = DensityMatrix::new(read_json::<ComplexMatrix>(&p.rho)?)?;
    let e = PovmElement::new(read_json::<ComplexMatrix>(&p.effect)?)?;
    Ok((rho, e))
}

fn load_observable(path: &Path) -> Result<Observable, Failure> {
    Ok(Observable::new(read_json::<ComplexMatrix>(path)?)?)
}

fn print(value: serde_json::Value) -> Result<(), Failure> {
    let mut out = io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, &value).map_err(Error::from)?;
    writeln!(out).map_err(Error::from)?;
    Ok(())
}

fn run_named(name: ScenarioName, args: &RunArgs) -> Result<(), Failure> {
    let params = match &args.config {
        Some(path) => read_json::<serde_json::Value>(path)?,
        None => json!({}),
    };
    let cfg = ScenarioConfig::new(name).with_params(params).with_seed(args.seed);
    let table = run_scenario(&cfg).map_err(|e| match e {
        Error::Parse(msg) => Failure::Usage(format!("{} config: {msg}", name.as_str())),
        other => Failure::Domain(other),
    })?;
    let format = match args.format {
        Format::Csv => OutputFormat::Csv,
        Format::Json => OutputFormat::Json,
    };
    match &args.out {
        Some(path) => {
            let file = File::create(path).map_err(Error::from)?;
            table.write(BufWriter::new(file), format)?;
        }
        None => table.write(io::stdout().lock(), format)?,
    }
    Ok(())
}

fn run(cmd: Cmd) -> Result<(), Failure> {
    match cmd {
        Cmd::UncertaintyScan(a) => run_named(ScenarioName::UncertaintyScan, &a),
        Cmd::AmplificationScan(a) => run_named(ScenarioName::AmplificationScan, &a),
        Cmd::DynamicsTrace(a) => run_named(ScenarioName::DynamicsTrace, &a),
        Cmd::TomographyRoundtrip(a) => run_named(ScenarioName::TomographyRoundtrip, &a),
        Cmd::DetectorTomography(a) => run_named(ScenarioName::DetectorTomography, &a),
        Cmd::MeterSweep(a) => run_named(ScenarioName::MeterSweep, &a),
        Cmd::WeakValue(a) => {
            let (rho, e) = load_pair(&a.pair)?;
            let aw = weak_value(&load_observable(&a.observable)?, &connection_state(&rho, &e)?)?;
            print(json!({"re": aw.re, "im": aw.im}))
        }
        Cmd::Connection(p) => {
            let (rho, e) = load_pair(&p)?;
            print(serde_json::to_value(connection_state(&rho, &e)?).map_err(Error::from)?)
        }
        Cmd::Classify(p) => {
            let (rho, e) = load_pair(&p)?;
            let c = classify(&connection_state(&rho, &e)?, CLASSIFY_TOL);
            print(json!({
                "kind": if c.is_usual() { "usual" } else { "unusual" },
                "antiherm_norm": c.antiherm_norm,
                "herm_min_eigenvalue": c.herm_min_eigenvalue,
            }))
        }
        Cmd::NormBound(p) => {
            let (rho, e) = load_pair(&p)?;
            let nb = norm_bound_check(&connection_state(&rho, &e)?);
            print(json!({"norm": nb.norm, "c_herm": nb.c_herm, "c_antiherm": nb.c_antiherm, "holds": nb.holds}))
        }
        Cmd::Born(p) => {
            let (rho, e) = load_pair(&p)?;
            print(json!({"probability": born_probability(&rho, &e)?}))
        }
        Cmd::Abl(a) => {
            let (rho, e) = load_pair(&a.pair)?;
            let obs = load_observable(&a.observable)?;
            print(json!({"eigenvalues": obs.eigenvalues(), "probabilities": abl_probabilities(&rho, &obs, &e)?}))
        }
        Cmd::StrongPps(a) => {
            let (rho, e) = load_pair(&a.pair)?;
            let obs = load_observable(&a.observable)?;
            let probs = strong_pps_via_connection(&obs, &connection_state(&rho, &e)?)?;
            print(json!({"eigenvalues": obs.eigenvalues(), "probabilities": probs}))
        }
        Cmd::Retrodictive { effect } => {
            let e = PovmElement::new(read_json::<ComplexMatrix>(&effect)?)?;
            print(serde_json::to_value(retrodictive_state(&e)?).map_err(Error::from)?)
        }
        Cmd::Evolve { pair, schedule, t } => {
            let (rho, e) = load_pair(&pair)?;
            let sched: HamiltonianSchedule = read_json(&schedule)?;
            let w = connection_state_at(&rho, &e, &sched, sched.start(), t, sched.end())?;
            print(serde_json::to_value(w).map_err(Error::from)?)
        }
        Cmd::Reconstruct { data, dim } => {
            let file = File::open(&data).map_err(|e| Failure::Usage(format!("{}: {e}", data.display())))?;
            let values = read_weak_value_csv(file)?;
            let basis = OperatorBasis::standard(dim)?;
            let rec = reconstruct_connection(&values, &basis.as_probes()?, &basis)?;
            print(serde_json::to_value(rec).map_err(Error::from)?)
        }
    }
}

fn fail(code: u8, kind: &str, message: &str) -> ExitCode {
    eprintln!("{}", json!({"error": kind, "message": message}));
    ExitCode::from(code)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => return fail(2, "Usage", e.to_string().trim()),
    };
    match run(cli.cmd) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => fail(2, "Usage", &msg),
        Err(Failure::Domain(e)) => fail(1, e.kind(), &e.to_string()),
    }
}
