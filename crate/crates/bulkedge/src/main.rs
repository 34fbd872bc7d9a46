use bulkedge::error::CliError;
use bulkedge::{output, pipeline, Command, RunConfig};
use clap::{Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

/// Bulk, edge and kernel-bundle indices of 2D tight-binding Hamiltonians.
#[derive(Parser)]
#[command(name = "bulkedge", version)]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(clap::Args)]
struct Common {
    /// Run configuration (TOML).
    #[arg(long, short)]
    config: PathBuf,
    /// Output directory; overrides `out` from the config (default `out`).
    #[arg(long, short)]
    out: Option<PathBuf>,
    /// Worker threads for grid sweeps (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
    /// `key=value` on top of the config, e.g. `edge.L=128`. Repeatable.
    #[arg(long = "override", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

#[derive(Subcommand)]
enum Sub {
    /// Chern number of the Fermi projection.
    Bulk(Common),
    /// Spectral flow of left edge states.
    Edge(Common),
    /// Chern number of the kernel bundle of the truncated operator.
    Gp(Common),
    /// All three indices and their agreement.
    Verify(Common),
    /// Band envelope over t.
    Spectrum(Common),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (cmd, common) = match cli.command {
        Sub::Bulk(c) => (Command::Bulk, c),
        Sub::Edge(c) => (Command::Edge, c),
        Sub::Gp(c) => (Command::Gp, c),
        Sub::Verify(c) => (Command::Verify, c),
        Sub::Spectrum(c) => (Command::Spectrum, c),
    };
    match execute(cmd, &common) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn execute(cmd: Command, common: &Common) -> Result<i32, CliError> {
    if common.threads == Some(0) {
        return Err(CliError::Config("--threads must be at least 1".into()));
    }
    set_threads(common.threads)?;
    let cfg = RunConfig::load(&common.config, &common.overrides)?;
    let out = common.out.clone().or_else(|| cfg.out.clone()).unwrap_or_else(|| PathBuf::from("out"));
    let result = pipeline::run(cmd, &cfg)?;
    for path in output::write_all(&out, &result.artifacts)? {
        eprintln!("wrote {}", path.display());
    }
    if let Some(r) = &result.report {
        let s = &r.summary;
        let show = |v: Option<i64>| v.map_or("-".to_string(), |v| v.to_string());
        println!("bulk {}  edge {}  gp {}  status {:?}", show(s.i_bulk), show(s.i_edge), show(s.i_gp), s.status);
        for e in &s.errors {
            eprintln!("{}: {}", e.stage, e.message);
        }
        if matches!(s.status, bulkedge::report::Status::Unequal) {
            eprintln!("error: all indices converged but they differ; this is a bug or a violated hypothesis");
        }
    }
    Ok(result.exit_code())
}

#[cfg(feature = "parallel")]
fn set_threads(n: Option<usize>) -> Result<(), CliError> {
    if let Some(n) = n {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(format!("--threads {n}: {e}")))?;
    }
    Ok(())
}

/// Sweeps are sequential without the `parallel` feature.
#[cfg(not(feature = "parallel"))]
fn set_threads(_: Option<usize>) -> Result<(), CliError> {
    Ok(())
}
