use std::path::PathBuf;
use std::process::ExitCode;

use billiard_cli::commands::{
    cmd_solve_cavity, cmd_spectrum, cmd_sweep, cmd_two_body, cmd_validate_1d, shift_self_test,
};
use billiard_cli::validate::{cmd_validate, Faults};
use billiard_cli::{Result, RunConfig};
use clap::{Parser, Subcommand};

/// R-matrix scattering through two-lead billiards.
#[derive(Parser)]
#[command(name = "billiard", version)]
struct Cli {
    /// TOML run configuration; defaults apply when omitted.
    #[arg(short, long, global = true)]
    config: Option<PathBuf>,
    /// Override a config key, e.g. `--set basis.k_keep=500`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    overrides: Vec<String>,
    #[arg(short, long, global = true)]
    output_dir: Option<PathBuf>,
    /// Ignore and do not write the cache.
    #[arg(long, global = true)]
    no_cache: bool,
    /// Print the effective configuration and exit.
    #[arg(long, global = true)]
    print_config: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Diagonalise the cavity and write energies.csv.
    SolveCavity,
    /// Conductance sweep: sweep.csv and tstore.bin.
    Sweep {
        #[arg(long)]
        k_min: Option<f64>,
        #[arg(long)]
        k_max: Option<f64>,
        #[arg(long)]
        points: Option<usize>,
    },
    /// Length and power spectra per configured window.
    Spectrum {
        /// Transform a pure phase e^{ikL0} instead and report its peak.
        #[arg(long, value_name = "L0")]
        shift_test: Option<f64>,
    },
    /// Square barrier: exact against R-matrix transmission.
    #[command(name = "validate-1d")]
    Validate1d,
    /// Run the oracle suite and write validate.json.
    Validate {
        /// Negate the R-matrix in the barrier checks (negative control).
        #[arg(long)]
        inject_sign_error: bool,
    },
    /// Interacting pair energies in the cavity.
    TwoBody,
}

fn load(cli: &Cli) -> Result<RunConfig> {
    let text = match &cli.config {
        Some(p) => std::fs::read_to_string(p)?,
        None => String::new(),
    };
    let mut overrides = Vec::new();
    if let Some(d) = &cli.output_dir {
        overrides.push(format!(
            "output_dir={}",
            toml_string(&d.display().to_string())
        ));
    }
    if cli.no_cache {
        overrides.push("cache=false".into());
    }
    if let Command::Sweep {
        k_min,
        k_max,
        points,
    } = &cli.command
    {
        for (key, v) in [
            ("k_min", k_min.map(|v| format!("{v:?}"))),
            ("k_max", k_max.map(|v| format!("{v:?}"))),
            ("points", points.map(|v| v.to_string())),
        ] {
            if let Some(v) = v {
                overrides.push(format!("sweep.{key}={v}"));
            }
        }
    }
    overrides.extend(cli.overrides.iter().cloned());
    RunConfig::from_toml_with(&text, &overrides)
}

fn toml_string(s: &str) -> String {
    toml::Value::String(s.to_string()).to_string()
}

fn run(cli: Cli) -> Result<bool> {
    let cfg = load(&cli)?;
    if cli.print_config {
        print!("{}", cfg.to_toml());
        return Ok(true);
    }
    match cli.command {
        Command::SolveCavity => {
            let s = cmd_solve_cavity(&cfg)?;
            println!(
                "{} states, E_0 = {:.10}, E_max = {:.6}{}",
                s.solution.len(),
                s.solution.energies()[0],
                s.solution.energies().last().unwrap(),
                if s.cache_hit { " (cached)" } else { "" }
            );
            println!("{}", s.energies_csv.display());
        }
        Command::Sweep { .. } => {
            let s = cmd_sweep(&cfg)?;
            println!(
                "{} points, {} skipped, max unitarity defect {:.2e}",
                s.points, s.skipped, s.max_unitarity_defect
            );
            match s.onset {
                Some(k) => println!("first rise at k = {k:.4}"),
                None => println!("no conductance rise"),
            }
            println!("{} plateaus", s.plateaus.len());
            println!("{}\n{}", s.csv.display(), s.t_store.display());
        }
        Command::Spectrum {
            shift_test: Some(l0),
        } => {
            cfg.validate()?;
            println!("peak at L = {:.6} (input {l0})", shift_self_test(&cfg, l0)?);
        }
        Command::Spectrum { shift_test: None } => {
            for w in cmd_spectrum(&cfg)? {
                let peaks: Vec<String> =
                    w.peaks.iter().map(|p| format!("{:.3}", p.length)).collect();
                println!(
                    "window [{}, {}], {} modes, resolution {:.3}: peaks {}",
                    w.k_min,
                    w.k_max,
                    w.modes,
                    w.resolution,
                    peaks.join(" ")
                );
                if let Some(l) = w.t11_onset {
                    println!("  t11 onset at L = {l:.3}");
                }
            }
        }
        Command::Validate1d => {
            let s = cmd_validate_1d(&cfg)?;
            println!(
                "max |T_r - T_exact| = {:.3e}, {} poles skipped",
                s.max_error, s.skipped
            );
            println!("{}", s.csv.display());
        }
        Command::Validate { inject_sign_error } => {
            let faults = Faults {
                flip_r_sign: inject_sign_error,
            };
            let report = cmd_validate(&cfg, faults)?;
            println!(
                "{}",
                serde_json::to_string_pretty(&report).expect("report serialises")
            );
            return Ok(report.passed());
        }
        Command::TwoBody => {
            let (e, path) = cmd_two_body(&cfg)?;
            println!("lowest pair energy {:.10}", e[0]);
            println!("{}", path.display());
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
