mod commands;
mod report;

use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use commands::{parse_extended, CliError, Report, SpaceArgs, TheoremCArgs, ThresholdArgs};
use einlab::{Extended, POSITIVITY_TOL};

/// Curvature laboratory for the modified Einstein tensors Ein_k = Scal*g - k*Ric.
#[derive(Parser, Debug)]
#[command(name = "einlab", version)]
struct Cli {
    /// Report format; JSON is the stable one.
    #[arg(long, value_enum, global = true, default_value_t = Format::Json)]
    format: Format,

    /// Write the report to this file instead of standard output.
    #[arg(long, global = true)]
    output: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Table,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// List the catalog of model spaces and their parameter constraints.
    SpacesList,
    /// Ein/ein profile, Schouten spectrum, sigma invariants and (n = 4) Q-curvature.
    Compute(SpaceArgs),
    /// Spectra of the Weitzenbock curvature term on p-forms.
    Weitzenbock {
        #[command(flatten)]
        space: SpaceArgs,
        /// Form degree, 2 <= p <= n-1.
        #[arg(long)]
        p: usize,
    },
    /// Thresholds k1, k2 and the Betti vanishing report.
    Thresholds {
        #[arg(long)]
        n: usize,
        /// Restrict the table to one degree.
        #[arg(long)]
        p: Option<usize>,
        /// Lower bound for the constant Ein.
        #[arg(long = "Ein", allow_hyphen_values = true)]
        ein_up: Option<f64>,
        /// Upper bound for the constant ein (a number or -inf).
        #[arg(long = "ein", allow_hyphen_values = true, value_parser = parse_extended)]
        ein_low: Option<Extended<f64>>,
        /// Declared Betti numbers b_0,...,b_n.
        #[arg(long, value_delimiter = ',')]
        betti: Option<Vec<u64>>,
    },
    /// Four-dimensional bounds from the Yamabe constant and the total sigma_2.
    TheoremC {
        #[arg(long, allow_hyphen_values = true)]
        yamabe: f64,
        #[arg(long, allow_hyphen_values = true, conflicts_with = "space")]
        sigma2_integral: Option<f64>,
        /// Homogeneous four-dimensional catalog space supplying sigma_2(A).
        #[arg(long)]
        space: Option<String>,
        /// Volume multiplying sigma_2(A) when --space is given.
        #[arg(long)]
        volume: Option<f64>,
        /// Cross-check against an alpha scan with this log-grid step.
        #[arg(long)]
        oracle: Option<f64>,
    },
    /// Compare finite-difference curvature of a chart with a catalog space.
    ValidateChart {
        #[arg(long)]
        file: PathBuf,
        /// Catalog spec, e.g. `space-form(3,1)`.
        #[arg(long)]
        against: String,
        /// Largest accepted deviation of Ricci eigenvalues and Scal.
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::SpacesList => "spaces-list",
            Command::Compute(_) => "compute",
            Command::Weitzenbock { .. } => "weitzenbock",
            Command::Thresholds { .. } => "thresholds",
            Command::TheoremC { .. } => "theorem-c",
            Command::ValidateChart { .. } => "validate-chart",
        }
    }
}

fn positivity_tol() -> Result<f64, CliError> {
    match std::env::var("EINLAB_TOL") {
        Ok(s) => s
            .trim()
            .parse::<f64>()
            .ok()
            .filter(|t| *t >= 0.0 && t.is_finite())
            .ok_or_else(|| CliError::Usage(format!("EINLAB_TOL must be a non-negative number, got '{s}'"))),
        Err(_) => Ok(POSITIVITY_TOL),
    }
}

fn run(command: &Command, tol: f64) -> Result<Report, CliError> {
    match command {
        Command::SpacesList => commands::spaces_list(),
        Command::Compute(space) => commands::compute(space, tol),
        Command::Weitzenbock { space, p } => commands::weitzenbock(space, *p, tol),
        Command::Thresholds {
            n,
            p,
            ein_up,
            ein_low,
            betti,
        } => commands::thresholds(&ThresholdArgs {
            n: *n,
            p: *p,
            ein_up: *ein_up,
            ein_low: *ein_low,
            betti: betti.clone(),
        }),
        Command::TheoremC {
            yamabe,
            sigma2_integral,
            space,
            volume,
            oracle,
        } => commands::theorem_c(&TheoremCArgs {
            yamabe: *yamabe,
            sigma2_integral: *sigma2_integral,
            space: space.clone(),
            volume: *volume,
            oracle: *oracle,
        }),
        Command::ValidateChart { file, against, tol } => commands::validate_chart(file, against, *tol),
    }
}

fn error_value(e: &CliError) -> Value {
    json!({ "kind": e.kind(), "message": e.message() })
}

fn emit(text: &str, output: Option<&PathBuf>) -> Result<(), String> {
    match output {
        Some(path) => fs::write(path, text).map_err(|e| format!("{}: {e}", path.display())),
        None => match std::io::stdout().lock().write_all(text.as_bytes()) {
            Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(format!("stdout: {e}")),
            _ => Ok(()),
        },
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let v = json!({ "error": { "kind": "usage", "message": e.to_string().trim_end() } });
            print!("{}", report::render_json(&v));
            return ExitCode::from(2);
        }
    };

    let tol = positivity_tol();
    let outcome = tol.and_then(|tol| run(&cli.command, tol).map(|r| (tol, r)));
    let (doc, code) = match outcome {
        Ok((tol, r)) => {
            let header = report::header(cli.command.name(), r.config, tol);
            (json!({ "header": header, "result": r.body }), r.exit_code)
        }
        Err(e) => {
            let header = report::header(cli.command.name(), Value::Null, POSITIVITY_TOL);
            (json!({ "header": header, "error": error_value(&e) }), 2)
        }
    };
    let doc = report::normalize(doc);
    let text = match cli.format {
        Format::Json => report::render_json(&doc),
        Format::Table => report::render_table(&doc),
    };
    if let Err(msg) = emit(&text, cli.output.as_ref()) {
        eprintln!("einlab: {msg}");
        return ExitCode::from(2);
    }
    ExitCode::from(code)
}
