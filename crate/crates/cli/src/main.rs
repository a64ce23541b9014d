use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};
use fockwit_cli::config::{Format, RunConfig};
use fockwit_cli::formula::{self, Params};
use fockwit_cli::reproduce::{self, Section};
use fockwit_cli::run;
use fockwit_cli::table::{Sink, Table};

#[derive(Parser)]
#[command(name = "fockwit", version, about = "Moment-based entanglement witnesses on truncated Fock states")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Output file (a directory for `reproduce`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[arg(long, global = true, value_enum)]
    format: Option<Format>,

    /// One cutoff for every mode, or one per mode.
    #[arg(long, global = true, value_delimiter = ',')]
    cutoff: Option<Vec<usize>>,

    /// Margin tolerance for verdicts.
    #[arg(long, global = true)]
    tolerance: Option<f64>,

    /// Default directory for outputs when `--out` is not given.
    #[arg(long, global = true, env = "FOCKWIT_OUT_DIR")]
    out_dir: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate the configured witnesses once.
    Witness {
        #[arg(long)]
        config: PathBuf,
    },
    /// Evaluate the witnesses over one or two scan axes.
    Scan {
        #[arg(long)]
        config: PathBuf,
    },
    /// Two-mode moments after the amplifier at the configured times.
    Evolve {
        #[arg(long)]
        config: PathBuf,
    },
    /// Evaluate one closed form by id.
    Formula {
        id: String,
        /// `key=value` pairs, comma separated.
        #[arg(long, value_delimiter = ',')]
        params: Vec<String>,
    },
    /// Run the curated checks for one section and write a manifest.
    Reproduce {
        #[arg(value_enum)]
        section: Section,
    },
}

impl Cli {
    fn load(&self, path: &Path) -> anyhow::Result<RunConfig> {
        let mut cfg = RunConfig::load(path)?;
        if let Some(c) = &self.cutoff {
            cfg.truncation.cutoffs = c.clone();
        }
        if let Some(t) = self.tolerance {
            cfg.truncation.tolerance = Some(t);
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn emit(&self, cfg: &RunConfig, table: &Table, name: &str) -> anyhow::Result<()> {
        let format = self.format.or(cfg.output.format).unwrap_or(Format::Csv);
        let explicit = self.out.as_deref().or(cfg.output.path.as_deref());
        let file = format!("{name}.{}", ext(format));
        Sink::resolve(explicit, self.out_dir.as_deref(), &file).write(&table.render(format))
    }
}

fn ext(format: Format) -> &'static str {
    match format {
        Format::Csv => "csv",
        Format::Json => "json",
    }
}

fn formula_table(r: &fockwit::closed_form::FormulaResult) -> Table {
    let mut t = Table::new(["id", "kind", "name", "value"]);
    for (k, v) in &r.inputs {
        t.push(vec![r.id.clone().into(), "input".into(), k.clone().into(), (*v).into()]);
    }
    for (k, v) in &r.values {
        t.push(vec![r.id.clone().into(), "value".into(), k.clone().into(), (*v).into()]);
    }
    for (k, v) in &r.flags {
        t.push(vec![r.id.clone().into(), "flag".into(), k.clone().into(), (*v).into()]);
    }
    t
}

fn execute(cli: &Cli) -> anyhow::Result<bool> {
    match &cli.command {
        Command::Witness { config } => {
            let cfg = cli.load(config)?;
            cli.emit(&cfg, &run::witness_table(&cfg)?, "witness")?;
        }
        Command::Scan { config } => {
            let cfg = cli.load(config)?;
            cli.emit(&cfg, &run::scan_table(&cfg)?, "scan")?;
        }
        Command::Evolve { config } => {
            let cfg = cli.load(config)?;
            cli.emit(&cfg, &run::evolve_table(&cfg)?, "evolve")?;
        }
        Command::Formula { id, params } => {
            let result = formula::evaluate(id, &Params::parse(params)?)?;
            let format = cli.format.unwrap_or(Format::Json);
            let text = match format {
                Format::Json => serde_json::to_string_pretty(&result)? + "\n",
                Format::Csv => formula_table(&result).to_csv(),
            };
            let file = format!("formula_{id}.{}", ext(format));
            Sink::resolve(cli.out.as_deref(), cli.out_dir.as_deref(), &file).write(&text)?;
        }
        Command::Reproduce { section } => {
            let bundle = reproduce::run(*section)?;
            let dir = match (&cli.out, &cli.out_dir) {
                (Some(p), _) => p.clone(),
                (None, Some(d)) => d.join(format!("section_{}", section.label())),
                (None, None) => PathBuf::from(format!("reproduce_{}", section.label())),
            };
            bundle.write(&dir, cli.format.unwrap_or(Format::Csv)).context("writing the reproduction bundle")?;
            for c in &bundle.checks {
                eprintln!("{} {}: expected {}, observed {}", if c.pass { "pass" } else { "FAIL" }, c.id, c.expected, c.observed);
            }
            eprintln!("manifest written to {}", dir.display());
            return Ok(bundle.passed());
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(fockwit_cli::exit_code(&e))
        }
    }
}
