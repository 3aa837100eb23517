use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use tripop::report::{
    conditions_report, kick_report, leakage_report, table_report, trace_report, verify_report,
    Format, Report,
};
use tripop::{IntegratorConfig, OddPair};

#[derive(Parser)]
#[command(
    name = "tripop",
    version,
    about = "Population transfer in a degenerate three-level atom"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(Args)]
struct Output {
    #[arg(long, value_enum, default_value = "csv")]
    format: FormatArg,
    /// Output file; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct Steps {
    /// RK4 steps per drive period.
    #[arg(long, env = "TRIPOP_STEPS", default_value_t = 20_000)]
    steps_per_period: usize,
}

impl Steps {
    fn config(&self) -> IntegratorConfig {
        IntegratorConfig::with_steps_per_period(self.steps_per_period)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Transfer conditions with n1·n2 up to a bound.
    Table {
        #[arg(long, default_value_t = 35)]
        max_product: i64,
        #[command(flatten)]
        output: Output,
    },
    /// Analytic and RK4 populations under a harmonic drive (ω = 1, t in periods).
    Trace {
        #[arg(long, allow_hyphen_values = true)]
        alpha: f64,
        #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
        beta: f64,
        /// A(t0) = V0/ω at t0 = T/4.
        #[arg(long, allow_hyphen_values = true)]
        area: f64,
        #[arg(long, default_value_t = 1.0)]
        periods: f64,
        #[command(flatten)]
        steps: Steps,
        #[command(flatten)]
        output: Output,
    },
    /// Check every condition analytically and against RK4; nonzero exit on failure.
    Verify {
        #[arg(long, default_value_t = 35)]
        max_product: i64,
        /// Shift every α by this amount (negative control).
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        perturb_alpha: f64,
        #[command(flatten)]
        steps: Steps,
        #[command(flatten)]
        output: Output,
    },
    /// Measured deficit 1 − P2(t0) over a grid of level splittings.
    Leakage {
        #[arg(long, allow_hyphen_values = true)]
        n_o: i64,
        #[arg(long, allow_hyphen_values = true)]
        n_op: i64,
        /// e.g. `omega12:0:0.1:5,omega13:0` (name:value or name:start:stop:count).
        #[arg(long)]
        grid: String,
        /// Drive frequency; grid values are absolute splittings.
        #[arg(long, default_value_t = 1.0)]
        omega: f64,
        #[command(flatten)]
        steps: Steps,
        #[command(flatten)]
        output: Output,
    },
    /// Look up the family member matching (α, β, A(t0)).
    Conditions {
        #[arg(long, allow_hyphen_values = true)]
        alpha: f64,
        #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
        beta: f64,
        #[arg(long, allow_hyphen_values = true)]
        area: f64,
        #[arg(long, default_value_t = 1e-3)]
        tol: f64,
        #[command(flatten)]
        output: Output,
    },
    /// Ideal kick next to Gaussian kicks of shrinking width.
    Kick {
        #[arg(long, allow_hyphen_values = true)]
        alpha: f64,
        #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
        beta: f64,
        #[arg(long, allow_hyphen_values = true)]
        area: f64,
        #[arg(long, value_delimiter = ',', default_value = "0.1,0.05,0.025")]
        widths: Vec<f64>,
        #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
        omega12: f64,
        #[arg(long, default_value_t = 0.5, allow_hyphen_values = true)]
        omega13: f64,
        #[command(flatten)]
        steps: Steps,
        #[command(flatten)]
        output: Output,
    },
}

fn emit(report: &Report, output: &Output) -> Result<()> {
    let format = match output.format {
        FormatArg::Csv => Format::Csv,
        FormatArg::Json => Format::Json,
    };
    match &output.out {
        Some(path) => {
            let file =
                File::create(path).with_context(|| format!("creating {}", path.display()))?;
            let mut w = BufWriter::new(file);
            report.write(format, &mut w)?;
            w.flush()?;
        }
        None => {
            let stdout = io::stdout();
            report.write(format, stdout.lock())?;
        }
    }
    Ok(())
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Table {
            max_product,
            output,
        } => emit(&table_report(max_product), &output)?,
        Command::Trace {
            alpha,
            beta,
            area,
            periods,
            steps,
            output,
        } => emit(
            &trace_report(alpha, beta, area, periods, &steps.config())?,
            &output,
        )?,
        Command::Verify {
            max_product,
            perturb_alpha,
            steps,
            output,
        } => {
            let (report, pass) = verify_report(max_product, perturb_alpha, &steps.config())?;
            emit(&report, &output)?;
            let failed = report
                .rows
                .iter()
                .filter(|r| r.last().map(|c| c.to_string()) == Some("false".into()))
                .count();
            eprintln!(
                "verify: {} of {} conditions passed",
                report.rows.len() - failed,
                report.rows.len()
            );
            return Ok(pass);
        }
        Command::Leakage {
            n_o,
            n_op,
            grid,
            omega,
            steps,
            output,
        } => {
            let pair = OddPair::new(n_o, n_op)?;
            emit(
                &leakage_report(pair, &grid, omega, &steps.config())?,
                &output,
            )?
        }
        Command::Conditions {
            alpha,
            beta,
            area,
            tol,
            output,
        } => emit(&conditions_report(alpha, beta, area, tol), &output)?,
        Command::Kick {
            alpha,
            beta,
            area,
            widths,
            omega12,
            omega13,
            steps,
            output,
        } => {
            if widths.windows(2).any(|w| w[1] >= w[0]) {
                bail!("widths must be strictly decreasing");
            }
            let report = kick_report(
                alpha,
                beta,
                area,
                &widths,
                (omega12, omega13),
                &steps.config(),
            )?;
            emit(&report, &output)?
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
