use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use frac_cli::shapes::ShapeSpec;
use frac_cli::suites::{run_suite, RunOptions, SUITES};
use frac_cli::sweep::{parse_grid, sweep, SweepBase};
use frac_cli::{commands, Config, Error, Result};

#[derive(Parser)]
#[command(name = "frac", version, about = "Fractional capacities, frequencies and capacitary inradius on lattices")]
struct Cli {
    /// Write the output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Near-field band width (cells) for the kernel quadrature.
    #[arg(long, global = true, default_value_t = 2)]
    near_band: usize,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Cmd {
    /// Principal frequency λ^s_{p,q}.
    Lambda {
        #[arg(long)]
        shape: String,
        #[arg(long)]
        s: f64,
        #[arg(long)]
        p: f64,
        #[arg(long)]
        q: f64,
        #[arg(long)]
        h: Option<f64>,
    },
    /// Capacity of the closed set `sigma` relative to `env`.
    Cap {
        #[arg(long)]
        sigma: String,
        #[arg(long)]
        env: String,
        #[arg(long)]
        s: f64,
        #[arg(long)]
        p: f64,
        #[arg(long)]
        h: Option<f64>,
    },
    /// Fractional perimeter.
    Perimeter {
        #[arg(long)]
        shape: String,
        #[arg(long)]
        s: f64,
        #[arg(long)]
        h: Option<f64>,
    },
    /// Relative Cheeger constant of `e` inside `omega`.
    Cheeger {
        #[arg(long)]
        e: String,
        #[arg(long)]
        omega: String,
        #[arg(long)]
        s: f64,
        #[arg(long)]
        h: Option<f64>,
    },
    /// Torsion function of B_r inside B_R.
    Torsion {
        #[arg(long)]
        r: f64,
        #[arg(long = "R")]
        big_r: f64,
        #[arg(long)]
        s: f64,
        #[arg(long)]
        p: f64,
        #[arg(long)]
        h: f64,
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u8).range(1..=2))]
        dim: u8,
    },
    /// Capacitary inradius bracket.
    Inradius {
        #[arg(long)]
        shape: String,
        #[arg(long)]
        s: f64,
        #[arg(long)]
        p: f64,
        #[arg(long)]
        gamma: f64,
        #[arg(long)]
        h: Option<f64>,
    },
    /// Evaluate a named constant.
    Const {
        #[arg(long)]
        name: String,
        /// Comma-separated k=v; N, s, p, q set the parameters.
        #[arg(long)]
        args: Option<String>,
    },
    /// Run a verification suite; exits 0 iff every check passes.
    Verify {
        #[arg(long)]
        suite: String,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Record per-check runtimes (the report is then not reproducible).
        #[arg(long)]
        timings: bool,
        /// Run only the checks whose id starts with this prefix.
        #[arg(long)]
        only: Option<String>,
    },
    /// Tabulate a target over a one-parameter grid.
    Sweep {
        #[arg(long)]
        param: String,
        #[arg(long)]
        grid: String,
        #[arg(long)]
        target: String,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value = "interval:0,1")]
        shape: String,
        #[arg(long, default_value_t = 0.5)]
        s: f64,
        #[arg(long, default_value_t = 2.0)]
        p: f64,
        #[arg(long, default_value_t = 2.0)]
        q: f64,
        #[arg(long, default_value_t = 0.5)]
        gamma: f64,
        #[arg(long, default_value_t = 2.0)]
        ratio: f64,
        #[arg(long)]
        h: Option<f64>,
    },
}

fn config(path: Option<&PathBuf>) -> Result<Config> {
    match path {
        Some(p) => Config::load(p),
        None => Ok(Config::default()),
    }
}

fn value_out(v: serde_json::Value, format: Format) -> Result<String> {
    match format {
        Format::Json => Ok(serde_json::to_string_pretty(&v).map_err(|e| Error::Report(e.to_string()))? + "\n"),
        Format::Csv => commands::json_to_csv(&v),
    }
}

/// Rendered output and whether the command succeeded.
fn run(cli: &Cli) -> Result<(String, bool)> {
    let nb = cli.near_band;
    let v = match &cli.cmd {
        Cmd::Lambda { shape, s, p, q, h } => commands::lambda(shape, *s, *p, *q, *h, nb)?,
        Cmd::Cap { sigma, env, s, p, h } => commands::cap(sigma, env, *s, *p, *h, nb)?,
        Cmd::Perimeter { shape, s, h } => commands::perimeter(shape, *s, *h, nb)?,
        Cmd::Cheeger { e, omega, s, h } => commands::cheeger(e, omega, *s, *h, nb)?,
        Cmd::Torsion { r, big_r, s, p, h, dim } => commands::torsion(*r, *big_r, *s, *p, *h, *dim as usize, nb)?,
        Cmd::Inradius { shape, s, p, gamma, h } => commands::inradius(shape, *s, *p, *gamma, *h, nb)?,
        Cmd::Const { name, args } => commands::constant_cmd(name, args.as_deref(), nb)?,
        Cmd::Verify { suite, config: path, seed, timings, only } => {
            if suite != "all" && !SUITES.contains(&suite.as_str()) {
                return Err(Error::Usage(format!(
                    "unknown suite `{suite}`; expected all or one of {}",
                    SUITES.join(", ")
                )));
            }
            let report = run_suite(
                suite,
                &config(path.as_ref())?,
                RunOptions { seed: *seed, timings: *timings, only: only.clone() },
            )?;
            let text = match cli.format {
                Format::Json => report.to_json(),
                Format::Csv => report.to_csv()?,
            };
            return Ok((text, report.pass));
        }
        Cmd::Sweep { param, grid, target, config: path, shape, s, p, q, gamma, ratio, h } => {
            let base =
                SweepBase { shape: ShapeSpec::parse(shape)?, s: *s, p: *p, q: *q, gamma: *gamma, ratio: *ratio, h: *h };
            let table = sweep(param, &parse_grid(grid)?, target, &base, &config(path.as_ref())?)?;
            let text = match cli.format {
                Format::Json => serde_json::to_string_pretty(&table).map_err(|e| Error::Report(e.to_string()))? + "\n",
                Format::Csv => table.to_csv()?,
            };
            return Ok((text, true));
        }
    };
    Ok((value_out(v, cli.format)?, true))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = run(&cli).and_then(|(text, ok)| {
        match &cli.out {
            Some(path) => std::fs::write(path, text)?,
            None => print!("{text}"),
        }
        Ok(ok)
    });
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("frac: {e}");
            ExitCode::from(2)
        }
    }
}
