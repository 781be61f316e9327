//! Command-line frontend: exact soliton and identity checks, transformation
//! pairs, Lax residuals, lattice runs and refinement studies.

mod commands;
mod config;
mod output;

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use commands::Failure;
use config::{Command, Config, Format};

/// Environment variable naming the default output directory.
const OUT_DIR_VAR: &str = "HIROTA_OUT_DIR";

#[derive(Parser, Debug)]
#[command(name = "hirota-cli", version, about = "Checks and simulations for semi-discrete soliton systems")]
struct Cli {
    #[arg(value_enum)]
    command: Command,
    /// Flat `key = value` file; flags override its entries.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Print the resolved configuration and exit.
    #[arg(long)]
    print_config: bool,
    /// kdv, kp, boussinesq, sk, ito or all.
    #[arg(long)]
    equation: Option<String>,
    /// Lattice spacing, a decimal or n/d.
    #[arg(long)]
    h: Option<String>,
    /// Soliton wavenumber.
    #[arg(long)]
    k: Option<String>,
    /// KP y-wavenumber.
    #[arg(long)]
    l: Option<String>,
    #[arg(long)]
    dt: Option<String>,
    /// Number of lattice sites.
    #[arg(long)]
    sites: Option<String>,
    #[arg(long)]
    t_end: Option<String>,
    /// Comma-separated, strictly decreasing h or dt values.
    #[arg(long)]
    levels: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    /// Random pairs per identity.
    #[arg(long)]
    pairs: Option<String>,
    /// Sample points for float residuals.
    #[arg(long)]
    points: Option<String>,
    /// h or dt.
    #[arg(long)]
    sweep: Option<String>,
    /// exact-tau or zero-background.
    #[arg(long)]
    boundary: Option<String>,
    /// Steps between trajectory snapshots (0: first and last only).
    #[arg(long)]
    stride: Option<String>,
    /// semidiscrete-exact, continuum-self or lattice-run.
    #[arg(long)]
    protocol: Option<String>,
    /// Error tolerance for simulate.
    #[arg(long)]
    tol: Option<String>,
    /// Order a study must match to within 0.3.
    #[arg(long)]
    expect_order: Option<String>,
    /// Output file; defaults to $HIROTA_OUT_DIR/<command>.<format>, else stdout.
    #[arg(long)]
    output: Option<String>,
    /// json or csv.
    #[arg(long)]
    format: Option<String>,
}

impl Cli {
    fn flags(&self) -> BTreeMap<String, String> {
        let pairs = [
            ("equation", &self.equation),
            ("h", &self.h),
            ("k", &self.k),
            ("l", &self.l),
            ("dt", &self.dt),
            ("sites", &self.sites),
            ("t_end", &self.t_end),
            ("levels", &self.levels),
            ("seed", &self.seed),
            ("pairs", &self.pairs),
            ("points", &self.points),
            ("sweep", &self.sweep),
            ("boundary", &self.boundary),
            ("stride", &self.stride),
            ("protocol", &self.protocol),
            ("tol", &self.tol),
            ("expect_order", &self.expect_order),
            ("output", &self.output),
            ("format", &self.format),
        ];
        pairs.into_iter().filter_map(|(k, v)| v.clone().map(|v| (k.to_string(), v))).collect()
    }
}

fn load(cli: &Cli) -> Result<Config, String> {
    let mut kv = match &cli.config {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| format!("config: cannot read {}: {e}", p.display()))?;
            config::parse_file(&text).map_err(|e| format!("config file: {e}"))?
        }
        None => BTreeMap::new(),
    };
    kv.extend(cli.flags());
    config::resolve(cli.command, &kv).map_err(|e| e.to_string())
}

fn destination(c: &Config) -> Option<PathBuf> {
    if let Some(p) = &c.output {
        return Some(PathBuf::from(p));
    }
    let dir = std::env::var_os(OUT_DIR_VAR)?;
    let ext = if c.format == Format::Csv { "csv" } else { "json" };
    Some(PathBuf::from(dir).join(format!("{}.{ext}", c.command.name())))
}

fn emit(c: &Config, text: &str) -> Result<(), String> {
    match destination(c) {
        Some(p) => std::fs::write(&p, text).map_err(|e| format!("cannot write {}: {e}", p.display())),
        None => {
            use std::io::Write;
            std::io::stdout().write_all(text.as_bytes()).map_err(|e| e.to_string())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = match load(&cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    if cli.print_config {
        print!("{}", cfg.to_file());
        return ExitCode::SUCCESS;
    }
    let outcome = match commands::run(&cfg) {
        Ok(o) => o,
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            return ExitCode::from(2);
        }
        Err(Failure::Numerical(m)) => {
            eprintln!("numerical abort: {m}");
            return ExitCode::from(3);
        }
    };
    let pass = outcome.reports.iter().all(|r| r.get("pass").and_then(|p| p.as_bool()).unwrap_or(true));
    let text = match &outcome.csv {
        Some(csv) => csv.clone(),
        None => output::document(cfg.command.name(), output::to_value(&cfg), outcome.reports),
    };
    if let Err(e) = emit(&cfg, &text) {
        eprintln!("error: {e}");
        return ExitCode::from(3);
    }
    if let Some(m) = outcome.aborted {
        eprintln!("numerical abort: {m}");
        return ExitCode::from(3);
    }
    if pass {
        ExitCode::SUCCESS
    } else {
        eprintln!("one or more checks failed");
        ExitCode::from(1)
    }
}
