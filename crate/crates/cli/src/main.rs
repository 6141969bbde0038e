use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use novistoke::certified::{set_max_precision_bits, PRECISION_ENV};
use novistoke::corpus::{oracle_cases, oracle_suite};
use novistoke::error::Error;
use novistoke::par::Execution;
use novistoke::rh::{hom_comparison_table, standard_catalog, Locus};
use novistoke::scenario::{
    run_scenario, Family, Scenario, REPORT_SCHEMA_VERSION, TOOL_NAME, TOOL_VERSION,
};

#[derive(Parser, Debug)]
#[command(name = "novistoke", version, about = "Exact sheaf calculus on the punctured disk")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,

    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,

    /// Cap for certified interval refinement.
    #[arg(long, global = true, env = PRECISION_ENV)]
    max_precision_bits: Option<u32>,

    /// Seed for generated corpora.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Run every command of a scenario.
    Run(ScenarioArg),
    /// Hom computations of a scenario.
    Hom(ScenarioArg),
    /// Tensor products and internal homs of a scenario.
    Tensor(ScenarioArg),
    /// Dualities of a scenario.
    Dual(ScenarioArg),
    /// Perversity, truncations and recollements of a scenario.
    Perverse(ScenarioArg),
    /// Stokes diagrams and dominance verdicts of a scenario.
    Stokes(ScenarioArg),
    /// Connection-side against sheaf-side hom tables; the standard catalog without a scenario.
    RhTable(OptionalScenario),
    /// Sampling oracle: scenario checks, or a seeded random agreement suite.
    Oracle {
        #[command(flatten)]
        scenario: OptionalScenario,
        /// Number of random cases when no scenario is given.
        #[arg(long, default_value_t = 200)]
        count: usize,
    },
}

#[derive(clap::Args, Debug)]
struct ScenarioArg {
    #[arg(long)]
    scenario: PathBuf,
}

#[derive(clap::Args, Debug)]
struct OptionalScenario {
    #[arg(long)]
    scenario: Option<PathBuf>,
}

struct Rendered {
    json: String,
    text: String,
    code: i32,
}

fn load(path: &Path) -> Result<Scenario, Error> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    Scenario::parse(&text)
}

fn scenario_report(path: &Path, family: Option<Family>) -> Result<Rendered, Error> {
    let sc = load(path)?;
    let report = run_scenario(&sc, family, Execution::default());
    Ok(Rendered {
        json: report.to_json(),
        text: report.to_text(),
        code: report.exit_code(),
    })
}

fn header() -> serde_json::Value {
    json!({"tool": TOOL_NAME, "version": TOOL_VERSION, "report_schema": REPORT_SCHEMA_VERSION})
}

fn pretty(v: &serde_json::Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("value serializes");
    s.push('\n');
    s
}

fn catalog_report() -> Result<Rendered, Error> {
    let cat = standard_catalog();
    let mut doc = header();
    let mut text = format!("{TOOL_NAME} {TOOL_VERSION}\n");
    let mut tables = Vec::new();
    let mut code = 0;
    for locus in [Locus::FullDisk, Locus::PositiveRay] {
        let t = hom_comparison_table(&cat, locus, Execution::default())?;
        if t.entries.iter().any(|e| !e.agrees()) {
            code = 1;
        }
        text.push_str(&format!("locus {}\n", locus.as_str()));
        let n = t.len();
        for i in 0..n {
            let row: Vec<String> = (0..n).map(|j| t.sheaf(i, j).to_string()).collect();
            text.push_str(&format!("  {:<10} {}\n", t.labels[i], row.join(" ")));
        }
        tables.push(serde_json::to_value(&t).expect("table serializes"));
    }
    doc["tables"] = json!(tables);
    Ok(Rendered {
        json: pretty(&doc),
        text,
        code,
    })
}

fn oracle_report(seed: u64, count: usize) -> Result<Rendered, Error> {
    let cases = oracle_cases(seed, count);
    let suite = oracle_suite(&cases, Execution::default())?;
    let mut doc = header();
    doc["seed"] = json!(seed);
    doc["suite"] = serde_json::to_value(&suite).expect("suite serializes");
    let text = format!(
        "{TOOL_NAME} {TOOL_VERSION}\nseed {seed}\ncases {}\nagree {}\nambiguous {}\ndisagree {}\n",
        suite.total,
        suite.agreements,
        suite.ambiguous,
        suite.disagreements.len()
    );
    let code = i32::from(!suite.disagreements.is_empty());
    Ok(Rendered {
        json: pretty(&doc),
        text,
        code,
    })
}

fn dispatch(cli: &Cli) -> Result<Rendered, Error> {
    match &cli.command {
        Cmd::Run(a) => scenario_report(&a.scenario, None),
        Cmd::Hom(a) => scenario_report(&a.scenario, Some(Family::Hom)),
        Cmd::Tensor(a) => scenario_report(&a.scenario, Some(Family::Tensor)),
        Cmd::Dual(a) => scenario_report(&a.scenario, Some(Family::Dual)),
        Cmd::Perverse(a) => scenario_report(&a.scenario, Some(Family::Perverse)),
        Cmd::Stokes(a) => scenario_report(&a.scenario, Some(Family::Stokes)),
        Cmd::RhTable(OptionalScenario { scenario: Some(p) }) => {
            scenario_report(p, Some(Family::RhTable))
        }
        Cmd::RhTable(OptionalScenario { scenario: None }) => catalog_report(),
        Cmd::Oracle {
            scenario: OptionalScenario { scenario: Some(p) },
            ..
        } => scenario_report(p, Some(Family::Oracle)),
        Cmd::Oracle {
            scenario: OptionalScenario { scenario: None },
            count,
        } => oracle_report(cli.seed, *count),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(bits) = cli.max_precision_bits {
        set_max_precision_bits(bits);
    }
    let rendered = match dispatch(&cli) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error [{}]: {e}", e.code());
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    let body = match cli.format {
        Format::Json => rendered.json,
        Format::Text => rendered.text,
    };
    match &cli.out {
        Some(path) => {
            if let Err(e) = std::fs::write(path, body) {
                eprintln!("error [IO_ERROR]: {}: {e}", path.display());
                return ExitCode::from(2);
            }
        }
        None => print!("{body}"),
    }
    ExitCode::from(rendered.code as u8)
}
