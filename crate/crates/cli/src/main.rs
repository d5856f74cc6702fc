//! `mildbank verify <suite>` and `mildbank demo <name>`.

mod demo;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};
use mildbank::verify::{run_verify, Report, RunConfig};
use mildbank::Error;

use demo::{run_demo, Cell, GridArgs};

#[derive(Parser)]
#[command(name = "mildbank", version, about = "Verification suites and demos for harmonic analysis on grids")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a verification suite: wiener, measures, fourier, poisson,
    /// feichtinger, mild, sampling, systems or all.
    Verify {
        suite: String,
        #[command(flatten)]
        common: Common,
        /// Tolerance for every residual check.
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Write a demo series: shannon, dirac_approx, chirp or kernel_identity.
    Demo {
        name: String,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args)]
struct Common {
    /// Grid spacing.
    #[arg(long)]
    h: Option<f64>,
    /// Samples per axis (a power of two).
    #[arg(long)]
    n: Option<usize>,
    /// Left end of the window; centred when omitted.
    #[arg(long)]
    window: Option<f64>,
    #[arg(long, default_value_t = mildbank::corpus::DEFAULT_SEED)]
    seed: u64,
    /// Output directory; MILDBANK_OUT takes precedence.
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

impl Common {
    fn out_dir(&self) -> PathBuf {
        std::env::var_os("MILDBANK_OUT")
            .map(PathBuf::from)
            .unwrap_or_else(|| self.out.clone())
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

/// 17 significant digits, enough to round-trip any f64.
fn num(v: f64) -> String {
    format!("{v:.16e}")
}

fn write_report_csv(report: &Report, path: &Path) -> anyhow::Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["suite", "check", "kind", "measured", "tolerance", "pass", "anchor", "error"])?;
    for (suite, c) in report.checks() {
        let kind = serde_json::to_value(c.kind)?.as_str().unwrap_or_default().to_string();
        w.write_record([
            suite.to_string(),
            c.name.clone(),
            kind,
            c.measured.map(num).unwrap_or_default(),
            num(c.tolerance),
            c.pass.to_string(),
            c.anchor.clone(),
            c.error.clone().unwrap_or_default(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn usage(e: &Error) -> bool {
    matches!(
        e,
        Error::UnknownSuite(_)
            | Error::UnknownDemo(_)
            | Error::BadParams(_)
            | Error::BadCount(_)
            | Error::BadGrid(_)
            | Error::NonCommensurateSpacing { .. }
    )
}

fn fail(e: &Error) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(if usage(e) { 2 } else { 1 })
}

fn verify(suite: &str, common: &Common, tol: Option<f64>, format: Format) -> anyhow::Result<ExitCode> {
    let defaults = RunConfig::default();
    let config = RunConfig {
        h: common.h.unwrap_or(defaults.h),
        n: common.n.unwrap_or(defaults.n),
        t0: common.window,
        tol,
        seed: common.seed,
    };
    let report = match run_verify(suite, &config) {
        Ok(r) => r,
        Err(e) => return Ok(fail(&e)),
    };
    let dir = common.out_dir();
    fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    let path = match format {
        Format::Json => {
            let p = dir.join(format!("verify-{suite}.json"));
            fs::write(&p, report.to_json() + "\n")?;
            p
        }
        Format::Csv => {
            let p = dir.join(format!("verify-{suite}.csv"));
            write_report_csv(&report, &p)?;
            p
        }
    };
    for (s, c) in report.checks() {
        let measured = c.measured.map(|v| format!("{v:.3e}")).unwrap_or_else(|| "error".into());
        println!(
            "{} {s}/{} {measured} <= {:.1e}",
            if c.pass { "PASS" } else { "FAIL" },
            c.name,
            c.tolerance
        );
    }
    println!("{} {suite}: report written to {}", if report.pass { "PASS" } else { "FAIL" }, path.display());
    Ok(ExitCode::from(if report.pass { 0 } else { 1 }))
}

fn demo(name: &str, common: &Common) -> anyhow::Result<ExitCode> {
    let args = GridArgs {
        h: common.h,
        n: common.n,
        t0: common.window,
    };
    let out = match run_demo(name, args, common.seed) {
        Ok(o) => o,
        Err(e) => return Ok(fail(&e)),
    };
    let dir = common.out_dir();
    fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    let csv_path = dir.join(format!("{name}.csv"));
    let mut w = csv::Writer::from_path(&csv_path)?;
    w.write_record(&out.header)?;
    for row in &out.rows {
        w.write_record(row.iter().map(|c| match c {
            Cell::Num(v) => num(*v),
            Cell::Text(s) => s.clone(),
        }))?;
    }
    w.flush()?;
    let json_path = dir.join(format!("{name}.json"));
    let summary = serde_json::json!({ "demo": name, "seed": common.seed, "summary": out.summary });
    fs::write(&json_path, serde_json::to_string_pretty(&summary)? + "\n")?;
    println!("{name}: wrote {} and {}", csv_path.display(), json_path.display());
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Verify {
            suite,
            common,
            tol,
            format,
        } => verify(suite, common, *tol, *format),
        Command::Demo { name, common } => demo(name, common),
    };
    result.unwrap_or_else(|e| {
        eprintln!("error: {e:#}");
        ExitCode::from(1)
    })
}
