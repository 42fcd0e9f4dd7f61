//! `elpin`: classify EL+ ontologies and explain entailed subsumptions.

mod report;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use clap::{Args, Parser, Subcommand, ValueEnum};
use elpin::encode::PinpointInstance;
use elpin::pinpoint::{extract_one_mina_with, EnumerationStats};
use elpin::{
    build_instance, build_pinpoint_formula, classify, coi_reduce, emit_wcnf, enumerate_minas,
    normalize, parse_ontology, parse_query, Budget, EnumerationReport, Error, Mina, Ontology,
};

use report::{Granularity, Outcome};

#[derive(Parser)]
#[command(
    name = "elpin",
    version,
    about = "Axiom pinpointing for EL+ ontologies"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print every derived subsumption.
    Classify {
        ontology: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Print ENTAILED or NOT-ENTAILED; exits 0 or 1 accordingly.
    Check {
        ontology: PathBuf,
        #[arg(long)]
        query: String,
    },
    /// Compute minimal axiom sets explaining the query.
    Pinpoint(PinpointArgs),
    /// Write the partial MaxSAT instance for the query as WCNF.
    Encode {
        ontology: PathBuf,
        #[arg(long)]
        query: String,
        #[command(flatten)]
        coi: CoiFlags,
        /// Output file; stdout if absent.
        #[arg(long, value_name = "PATH")]
        emit_wcnf: Option<PathBuf>,
    },
}

#[derive(Args)]
struct PinpointArgs {
    ontology: PathBuf,
    #[arg(long)]
    query: String,
    /// Enumerate every MinA (default).
    #[arg(long, conflicts_with_all = ["one", "limit"])]
    all: bool,
    /// Extract a single MinA.
    #[arg(long, conflicts_with = "limit")]
    one: bool,
    /// Report at most N MinAs.
    #[arg(long, value_name = "N", value_parser = clap::value_parser!(u64).range(1..))]
    limit: Option<u64>,
    #[command(flatten)]
    coi: CoiFlags,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    #[arg(long, value_name = "PATH")]
    emit_wcnf: Option<PathBuf>,
    /// Wall-clock budget in seconds, checked between solver calls; 0 means none.
    #[arg(long, value_name = "SECS", default_value_t = 0.0)]
    timeout: f64,
    #[arg(long, value_enum, default_value_t = Granularity::Normalized)]
    report: Granularity,
}

#[derive(Args)]
struct CoiFlags {
    /// Apply cone-of-influence reduction (default).
    #[arg(long, overrides_with = "no_coi")]
    coi: bool,
    #[arg(long, overrides_with = "coi")]
    no_coi: bool,
}

impl CoiFlags {
    fn enabled(&self) -> bool {
        !self.no_coi
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

/// Exit statuses.
const NOT_ENTAILED: u8 = 1;
const USAGE: u8 = 2;
const EXHAUSTED: u8 = 3;

struct Failure(u8, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(USAGE, e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { USAGE } else { 0 });
        }
    };
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(Failure(code, msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(code)
        }
    }
}

fn load(path: &Path) -> Result<Ontology, Failure> {
    let text =
        fs::read_to_string(path).map_err(|e| Failure(USAGE, format!("{}: {e}", path.display())))?;
    parse_ontology(&text).map_err(|e| Failure(USAGE, format!("{}: {e}", path.display())))
}

fn write_file(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| Failure(USAGE, format!("{}: {e}", path.display())))
}

fn run(command: Command) -> Result<u8, Failure> {
    match command {
        Command::Classify { ontology, format } => {
            let o = load(&ontology)?;
            let t = normalize(&o);
            let c = classify(&t);
            print!("{}", report::closure(&c, format == Format::Json));
            Ok(0)
        }
        Command::Check { ontology, query } => {
            let o = load(&ontology)?;
            let (sub, sup) = parse_query(&query, &o.symbols).map_err(Error::from)?;
            let t = normalize(&o);
            if classify(&t).holds(sub, sup) {
                println!("ENTAILED");
                Ok(0)
            } else {
                println!("NOT-ENTAILED");
                Ok(NOT_ENTAILED)
            }
        }
        Command::Encode {
            ontology,
            query,
            coi,
            emit_wcnf: path,
        } => {
            let o = load(&ontology)?;
            let q = parse_query(&query, &o.symbols).map_err(Error::from)?;
            let t = normalize(&o);
            let c = classify(&t);
            let f = build_pinpoint_formula(&c);
            let i = match build_instance(&f, q) {
                Ok(i) => i,
                Err(Error::QueryNotEntailed) => {
                    return Err(Failure(NOT_ENTAILED, Error::QueryNotEntailed.to_string()));
                }
                Err(e) => return Err(e.into()),
            };
            let i = if coi.enabled() { coi_reduce(&i) } else { i };
            let text = emit_wcnf(&i);
            match path {
                Some(p) => write_file(&p, &text)?,
                None => print!("{text}"),
            }
            Ok(0)
        }
        Command::Pinpoint(args) => pinpoint(args),
    }
}

fn pinpoint(args: PinpointArgs) -> Result<u8, Failure> {
    if !(args.timeout >= 0.0 && args.timeout.is_finite()) {
        return Err(Failure(USAGE, format!("invalid timeout {}", args.timeout)));
    }
    let start = Instant::now();
    let o = load(&args.ontology)?;
    let q = parse_query(&args.query, &o.symbols).map_err(Error::from)?;
    let t = normalize(&o);
    let c = classify(&t);
    let f = build_pinpoint_formula(&c);

    let instance: Option<PinpointInstance> = match build_instance(&f, q) {
        Ok(i) => Some(if args.coi.enabled() {
            coi_reduce(&i)
        } else {
            i
        }),
        Err(Error::QueryNotEntailed) => None,
        Err(e) => return Err(e.into()),
    };
    if let Some(path) = &args.emit_wcnf {
        let i = instance
            .as_ref()
            .ok_or_else(|| Failure(NOT_ENTAILED, Error::QueryNotEntailed.to_string()))?;
        write_file(path, &emit_wcnf(i))?;
    }

    let budget = Budget {
        timeout: (args.timeout > 0.0).then(|| Duration::from_secs_f64(args.timeout)),
        ..Budget::default()
    };
    let trivial = q.0 == q.1 || q.1.is_top();
    let mut exhausted = false;
    let mut result = match &instance {
        // Trivially true: the empty set explains it.
        _ if trivial => EnumerationReport {
            minas: vec![Mina::default()],
            complete: true,
            ..EnumerationReport::default()
        },
        None => EnumerationReport {
            complete: true,
            ..EnumerationReport::default()
        },
        Some(i) if args.one => match extract_one_mina_with(i, &budget) {
            Ok((m, stats)) => EnumerationReport {
                minas: vec![m],
                complete: true,
                stats,
                ..EnumerationReport::default()
            },
            Err(Error::BudgetExhausted) => {
                exhausted = true;
                EnumerationReport::default()
            }
            Err(e) => return Err(e.into()),
        },
        Some(i) => {
            let r = enumerate_minas(i, &budget);
            exhausted = !r.complete;
            r
        }
    };
    if let Some(n) = args.limit {
        let n = n as usize;
        if result.minas.len() > n {
            result.minas.truncate(n);
            result.complete = false;
        }
    }
    result.stats = EnumerationStats {
        wall_time: start.elapsed(),
        ..result.stats
    };

    let outcome = Outcome {
        query: &args.query,
        ontology: &o,
        tbox: &t,
        report: &result,
    };
    match args.format {
        Format::Text => print!("{}", outcome.text(args.report)),
        Format::Json => println!("{}", outcome.json(args.report)),
    }
    Ok(if exhausted { EXHAUSTED } else { 0 })
}
