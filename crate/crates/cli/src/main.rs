use clap::{Parser, Subcommand};
use conewarp::{ModelTag, Signature};
use conewarp_cli::commands::{self, DensityArgs, GeodesicArgs};
use conewarp_cli::{thread_count, CliError};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "cone",
    version,
    about = "Curvature experiments on warped cones"
)]
struct Cli {
    /// Worker threads (overrides CONEWARP_THREADS).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the twelve model cones.
    Catalog {
        /// lorentz or riemann
        #[arg(long)]
        signature: Option<String>,
        #[arg(long)]
        json: bool,
    },
    /// Run the verifiers of an experiment config.
    Verify {
        config: PathBuf,
        /// Report directory (defaults to the config's output.dir).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Geodesic node table of a sheet between (t, r) endpoints.
    Geodesic {
        /// Catalog row or path to a warper JSON document.
        #[arg(long)]
        warper: String,
        /// t,r
        #[arg(long, value_parser = parse_pair, allow_hyphen_values = true)]
        from: (f64, f64),
        #[arg(long, value_parser = parse_pair, allow_hyphen_values = true)]
        to: (f64, f64),
        #[arg(long, default_value_t = 33)]
        nodes: usize,
        #[arg(long, default_value_t = 400)]
        lattice: usize,
        /// Write the CSV here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Optimal transport between two discrete measures on a cone.
    Transport {
        instance: PathBuf,
        /// Plan CSV (i, j, mass).
        #[arg(long)]
        plan: Option<PathBuf>,
    },
    /// Curvature test of a fiber density.
    DensityCheck {
        #[arg(long)]
        model: Option<String>,
        /// Density profile JSON document.
        #[arg(long)]
        profile: Option<PathBuf>,
        #[arg(long, value_parser = parse_pair, default_value = "0,1", allow_hyphen_values = true)]
        domain: (f64, f64),
        #[arg(long, default_value_t = 1.0)]
        scale: f64,
        #[arg(long = "n")]
        n: f64,
        #[arg(long, allow_hyphen_values = true)]
        eta: f64,
        #[arg(long, default_value_t = 1e-6)]
        tolerance: f64,
    },
    /// Compare two reports or report directories, ignoring timings.
    ReportDiff {
        left: PathBuf,
        right: PathBuf,
        /// Relative tolerance for numbers.
        #[arg(long, default_value_t = 0.0)]
        tolerance: f64,
    },
}

fn parse_pair(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s
        .split_once(',')
        .ok_or_else(|| format!("expected `x,y`, got `{s}`"))?;
    let p = |v: &str| v.trim().parse::<f64>().map_err(|e| format!("`{v}`: {e}"));
    Ok((p(a)?, p(b)?))
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(n) = thread_count(cli.threads) {
        // a second initialization only happens in tests; the first pool wins
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
    }
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    let config = |e: conewarp::Error| CliError::Config(e.to_string());
    match cli.command {
        Command::Catalog { signature, json } => {
            let sig = signature
                .map(|s| s.parse::<Signature>())
                .transpose()
                .map_err(config)?;
            commands::catalog(sig, json, &mut out)
        }
        Command::Verify { config, out: dir } => commands::verify(&config, dir.as_deref(), &mut out),
        Command::Geodesic {
            warper,
            from,
            to,
            nodes,
            lattice,
            out: csv,
        } => commands::geodesic(
            &GeodesicArgs {
                warper: &warper,
                from,
                to,
                nodes,
                lattice,
                csv: csv.as_deref(),
            },
            &mut out,
        ),
        Command::Transport { instance, plan } => {
            commands::transport(&instance, plan.as_deref(), &mut out)
        }
        Command::DensityCheck {
            model,
            profile,
            domain,
            scale,
            n,
            eta,
            tolerance,
        } => {
            let model = model
                .map(|m| m.parse::<ModelTag>())
                .transpose()
                .map_err(config)?;
            commands::density_check(
                &DensityArgs {
                    model,
                    profile: profile.as_deref(),
                    domain: [domain.0, domain.1],
                    scale,
                    n,
                    eta,
                    tolerance,
                },
                &mut out,
            )
        }
        Command::ReportDiff {
            left,
            right,
            tolerance,
        } => commands::report_diff(&left, &right, tolerance, &mut out),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("cone: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
