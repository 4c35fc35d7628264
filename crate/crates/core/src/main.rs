use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use hpinterp::cli::{
    check_mesh, export_form, run_decomp_verify, run_equivalence_sweep, run_inverse_sweep, run_lift_verify, run_norm,
    CliError, FormKind, MeshSource, Outcome, SweepConfig,
};

#[derive(Parser)]
#[command(name = "hpinterp", version, about = "hp interpolation norms, liftings and equivalence sweeps")]
struct Args {
    #[command(subcommand)]
    command: Command,
    /// TOML experiment config.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output file; stdout when absent and the config names none.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Overrides the config seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads; all cores when absent.
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Admissibility, shape regularity and degree compatibility.
    CheckMesh {
        /// Mesh JSON file, instead of the config meshes.
        #[arg(long)]
        mesh: Option<PathBuf>,
    },
    /// Coordinate-list export of a form on the first configured mesh.
    Assemble {
        #[arg(long)]
        mesh: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Form::Mass)]
        form: Form,
        /// Index of the weighted stiffness.
        #[arg(long, default_value_t = 0.5)]
        theta: f64,
    },
    /// Interpolation norms of fixed or random functions.
    Norm,
    SweepEquivalence,
    SweepInverse,
    LiftVerify,
    DecompVerify,
}

#[derive(Clone, Copy, ValueEnum)]
enum Form {
    Mass,
    Stiffness,
    Weighted,
}

fn load(args: &Args, mesh: Option<&PathBuf>) -> Result<(SweepConfig, PathBuf), CliError> {
    let (mut cfg, root) = match &args.config {
        Some(path) => {
            let root = path.parent().map(Path::to_path_buf).unwrap_or_default();
            (SweepConfig::load(path)?, root)
        }
        None => (SweepConfig::parse("")?, PathBuf::new()),
    };
    if let Some(m) = mesh {
        cfg.meshes = vec![MeshSource::File { path: std::env::current_dir().unwrap_or_default().join(m), refinements: 0 }];
    }
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    Ok((cfg, root))
}

fn write(text: &str, out: Option<&PathBuf>) -> Result<(), CliError> {
    match out {
        Some(p) => std::fs::write(p, text).map_err(|e| CliError::Io(p.display().to_string(), e)),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn execute(args: &Args) -> Result<bool, CliError> {
    let mesh = match &args.command {
        Command::CheckMesh { mesh } | Command::Assemble { mesh, .. } => mesh.as_ref(),
        _ => None,
    };
    let (cfg, root) = load(args, mesh)?;
    let out = args.out.clone().or_else(|| cfg.out.as_ref().map(|p| root.join(p)));
    let outcome: Outcome = match &args.command {
        Command::Assemble { form, theta, .. } => {
            let kind = match form {
                Form::Mass => FormKind::Mass,
                Form::Stiffness => FormKind::Stiffness,
                Form::Weighted => FormKind::Weighted(*theta),
            };
            write(&export_form(&cfg, &root, kind)?, out.as_ref())?;
            return Ok(true);
        }
        Command::CheckMesh { .. } => check_mesh(&cfg, &root)?,
        Command::Norm => run_norm(&cfg, &root)?,
        Command::SweepEquivalence => run_equivalence_sweep(&cfg, &root)?,
        Command::SweepInverse => run_inverse_sweep(&cfg, &root)?,
        Command::LiftVerify => run_lift_verify(&cfg)?,
        Command::DecompVerify => run_decomp_verify(&cfg, &root)?,
    };
    write(&outcome.table.to_csv()?, out.as_ref())?;
    for c in &outcome.checks {
        eprintln!("{}", c.line());
    }
    Ok(outcome.passed())
}

fn main() -> ExitCode {
    let args = Args::parse();
    if let Some(n) = args.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    match execute(&args) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
