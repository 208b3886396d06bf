//! `o2d`: simulate the Oldroyd-B system, run the estimate checks, and
//! tabulate norms of saved fields.

mod config;
mod error;
mod norms;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use oldroyd_core::integrator::{write_run, RunConfig, CHECKPOINT_PREFIX};
use oldroyd_core::spectral::io::read_fields;
use oldroyd_core::verifier::{run_estimate, Ensemble, EstimateId, SuiteParams};
use oldroyd_core::Error;
use toml::{Table, Value};

use crate::error::{code, CliError, CliResult};
use crate::norms::{Derivative, NormSpec};

#[derive(Parser)]
#[command(
    name = "o2d",
    version,
    about = "Generalized Oldroyd-B solver and estimate checks on the 2D torus"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate a configuration and write diagnostics, metadata and checkpoints.
    Simulate {
        /// TOML file with [run], [params] and [initial_condition] sections.
        config: PathBuf,
        /// Override a config entry, e.g. `--set run.dt=5e-4`.
        #[arg(long = "set", value_name = "SECTION.KEY=VALUE")]
        overrides: Vec<String>,
        /// Run directory.
        #[arg(long, default_value = "o2d_run")]
        out: PathBuf,
        /// Replace the outputs of an earlier run in the same directory.
        #[arg(long)]
        force: bool,
    },
    /// Run estimate checks and write one JSON report per estimate.
    Verify {
        /// TOML file with [verify], [ensemble] and [params] sections; defaults apply without one.
        config: Option<PathBuf>,
        #[arg(long = "set", value_name = "SECTION.KEY=VALUE")]
        overrides: Vec<String>,
        /// Restrict to these estimate ids (repeatable); overrides [verify] estimates.
        #[arg(long = "estimate", value_name = "ID")]
        estimates: Vec<String>,
        /// Report directory.
        #[arg(long, default_value = "o2d_reports")]
        out: PathBuf,
        #[arg(long)]
        force: bool,
    },
    /// Print a CSV table of norms for the records of an .o2df file.
    Norms {
        file: PathBuf,
        /// Norm to evaluate (repeatable): L<p>, H<s>, Hdot<s>, B<s>,<p>,<q>, Bdot<s>,<p>,<q>, BMO.
        #[arg(
            long = "norm",
            value_name = "SPEC",
            required = true,
            allow_hyphen_values = true
        )]
        norms: Vec<String>,
        /// Derivative applied before norming.
        #[arg(long, value_enum, default_value = "none")]
        derivative: Derivative,
        /// Only this record (0-based); all records by default.
        #[arg(long)]
        record: Option<usize>,
        /// Write the table here instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        force: bool,
    },
    /// Show version, exit codes and estimate ids, or print a config template.
    Info {
        #[arg(long, value_enum)]
        template: Option<Template>,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Template {
    Simulate,
    Verify,
}

fn configure_threads() -> CliResult<()> {
    let Ok(raw) = std::env::var("O2D_THREADS") else {
        return Ok(());
    };
    let threads: usize = raw
        .trim()
        .parse()
        .map_err(|_| CliError::invalid(format!("O2D_THREADS = `{raw}` is not a thread count")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::invalid(format!("cannot size the thread pool: {e}")))
}

fn is_run_artifact(name: &str) -> bool {
    name == "diagnostics.csv"
        || name == "metadata.json"
        || (name.starts_with(CHECKPOINT_PREFIX) && name.ends_with(".o2df"))
}

fn run_artifacts(dir: &Path) -> CliResult<Vec<PathBuf>> {
    if !dir.exists() {
        return Ok(vec![]);
    }
    let mut found = Vec::new();
    for entry in std::fs::read_dir(dir)? {
        let entry = entry?;
        if entry.file_name().to_str().is_some_and(is_run_artifact) {
            found.push(entry.path());
        }
    }
    found.sort();
    Ok(found)
}

fn refuse_existing(what: &Path) -> CliError {
    CliError::io(format!(
        "{} already holds output; pass --force to replace it",
        what.display()
    ))
}

fn simulate(config: &Path, overrides: &[String], out: &Path, force: bool) -> CliResult<u8> {
    let loaded = config::load(Some(config), overrides)?;
    let run = config::run_config(&loaded.table)?;
    let stale = run_artifacts(out)?;
    if !stale.is_empty() {
        if !force {
            return Err(refuse_existing(out));
        }
        for path in stale {
            std::fs::remove_file(path)?;
        }
    }
    match write_run(&run, Some(&loaded.text), out) {
        Ok(result) => {
            println!(
                "completed {} steps to t = {}; regime: {}; output in {}",
                result.steps_taken,
                result.final_state.time,
                result.regime,
                out.display()
            );
            Ok(code::OK)
        }
        Err(failure) => {
            if matches!(failure.error, Error::BlowUp { .. }) && failure.partial.is_some() {
                eprintln!("error: {}", failure.error);
                eprintln!("partial trajectory written to {}", out.display());
                Ok(code::BLOW_UP)
            } else {
                Err(failure.error.into())
            }
        }
    }
}

fn verify(
    config: Option<&Path>,
    overrides: &[String],
    estimates: &[String],
    out: &Path,
    force: bool,
) -> CliResult<u8> {
    let loaded = config::load(config, overrides)?;
    let mut cfg = config::verify_config(&loaded.table)?;
    if !estimates.is_empty() {
        cfg.estimates = oldroyd_core::verifier::parse_ids(estimates)?;
    }
    let paths: Vec<(EstimateId, PathBuf)> = cfg
        .estimates
        .iter()
        .map(|&id| (id, out.join(format!("{id}.json"))))
        .collect();
    if !force {
        if let Some((_, p)) = paths.iter().find(|(_, p)| p.exists()) {
            return Err(refuse_existing(p));
        }
    }
    std::fs::create_dir_all(out)?;
    let mut all_pass = true;
    for (id, path) in paths {
        let report = run_estimate(id, &cfg.ensemble, &cfg.params)?;
        report.write(&path)?;
        all_pass &= report.pass;
        println!(
            "{:<14} {}  max_ratio = {:.4e}  min_ratio = {:.4e}  {}",
            id.as_str(),
            if report.pass { "pass" } else { "FAIL" },
            report.max_ratio,
            report.min_ratio,
            path.display()
        );
        for w in &report.warnings {
            println!("{:<14} warning: {w}", "");
        }
    }
    Ok(if all_pass {
        code::OK
    } else {
        code::CHECK_FAILED
    })
}

fn norms_cmd(
    file: &Path,
    specs: &[String],
    derivative: Derivative,
    record: Option<usize>,
    out: Option<&Path>,
    force: bool,
) -> CliResult<u8> {
    let specs: Vec<NormSpec> = specs.iter().map(|s| s.parse()).collect::<CliResult<_>>()?;
    let records = read_fields(file).map_err(|e| match e {
        Error::Io(io) => CliError::io(format!("cannot read {}: {io}", file.display())),
        other => other.into(),
    })?;
    let csv = norms::table(&records, record, derivative, &specs)?;
    match out {
        Some(path) => {
            if path.exists() && !force {
                return Err(refuse_existing(path));
            }
            std::fs::write(path, csv)?;
        }
        None => print!("{csv}"),
    }
    Ok(code::OK)
}

fn simulate_template() -> CliResult<String> {
    let defaults =
        Table::try_from(RunConfig::default()).map_err(|e| CliError::invalid(e.to_string()))?;
    let mut run = Table::new();
    let mut doc = Table::new();
    for (k, v) in defaults {
        match v {
            Value::Table(_) => {
                doc.insert(k, v);
            }
            v => {
                run.insert(k, v);
            }
        }
    }
    doc.insert("run".into(), Value::Table(run));
    toml::to_string(&doc).map_err(|e| CliError::invalid(e.to_string()))
}

fn verify_template() -> CliResult<String> {
    let mut doc = Table::new();
    let mut verify = Table::new();
    verify.insert(
        "estimates".into(),
        Value::Array(
            EstimateId::ALL
                .iter()
                .map(|id| Value::String(id.to_string()))
                .collect(),
        ),
    );
    doc.insert("verify".into(), Value::Table(verify));
    let section = |v: Result<Table, toml::ser::Error>| {
        v.map(Value::Table)
            .map_err(|e| CliError::invalid(e.to_string()))
    };
    doc.insert(
        "ensemble".into(),
        section(Table::try_from(Ensemble::default()))?,
    );
    doc.insert(
        "params".into(),
        section(Table::try_from(SuiteParams::default()))?,
    );
    toml::to_string(&doc).map_err(|e| CliError::invalid(e.to_string()))
}

fn info(template: Option<Template>) -> CliResult<u8> {
    match template {
        Some(Template::Simulate) => print!("{}", simulate_template()?),
        Some(Template::Verify) => print!("{}", verify_template()?),
        None => {
            println!("o2d {}", env!("CARGO_PKG_VERSION"));
            println!("estimate ids: {}", EstimateId::known_ids());
            println!("exit codes:");
            println!("  0  success");
            println!("  1  an estimate check did not pass");
            println!("  2  invalid configuration, arguments or input file");
            println!("  3  blow-up detected (partial trajectory written)");
            println!("  4  I/O failure, or output exists without --force");
            println!("environment: O2D_THREADS caps worker threads (0 = automatic)");
        }
    }
    Ok(code::OK)
}

fn dispatch(cli: Cli) -> CliResult<u8> {
    configure_threads()?;
    match cli.command {
        Command::Simulate {
            config,
            overrides,
            out,
            force,
        } => simulate(&config, &overrides, &out, force),
        Command::Verify {
            config,
            overrides,
            estimates,
            out,
            force,
        } => verify(config.as_deref(), &overrides, &estimates, &out, force),
        Command::Norms {
            file,
            norms,
            derivative,
            record,
            out,
            force,
        } => norms_cmd(&file, &norms, derivative, record, out.as_deref(), force),
        Command::Info { template } => info(template),
    }
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(c) => ExitCode::from(c),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code)
        }
    }
}
