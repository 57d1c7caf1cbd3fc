use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use lps_hho::cases::{CaseKind, ManufacturedCase};
use lps_hho::forms::StabilisationConstants;
use lps_hho::mesh::{load_mesh, Family, MacroMode};
use lps_hho::study::{run_convergence_study, MeshSource, StudyConfig, PATCH_TOLERANCE};

/// Convergence studies for the locally stabilised hybrid high-order Oseen solver.
#[derive(Debug, Parser)]
#[command(name = "lps-hho", version)]
struct Args {
    /// Manufactured solution: smooth, layer or patch.
    #[arg(long, default_value = "smooth")]
    case: CaseKind,

    /// Mesh family: triangular, cartesian or hexagonal.
    #[arg(long, default_value = "cartesian")]
    family: Family,

    /// Polynomial degrees, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "1")]
    k: Vec<usize>,

    /// Number of refinement levels.
    #[arg(long, default_value_t = 4)]
    levels: usize,

    /// Coarsest refinement level.
    #[arg(long, default_value_t = 0)]
    first_level: usize,

    /// Viscosity. Defaults to 1e-8, or 1e-2 for the layer case.
    #[arg(long)]
    epsilon: Option<f64>,

    /// Reaction coefficient.
    #[arg(long, default_value_t = 1.0)]
    sigma: f64,

    /// Scale of the convective stabilisation parameter
    #[arg(long, default_value_t = 1.0)]
    ctau: f64,

    /// Scale of the pressure-gradient stabilisation parameter
    #[arg(long, default_value_t = 1.0)]
    crho: f64,

    /// Macro decomposition for the local projections: trivial or vertex.
    #[arg(long = "macro", default_value = "trivial")]
    macro_mode: MacroMode,

    /// Eliminate cell unknowns before the sparse solve.
    #[arg(long)]
    condense: bool,

    /// Output directory for CSV files.
    #[arg(long, default_value = "results")]
    out: PathBuf,

    /// Use a JSON mesh instead of a generated family (single level).
    #[arg(long)]
    mesh_file: Option<PathBuf>,

    /// Write each assembled matrix (coordinate text) and right-hand side.
    #[arg(long)]
    dump_system: bool,

    /// Write (h, err) series files for log-log plots.
    #[arg(long)]
    plot_data: bool,
}

fn run(args: Args) -> lps_hho::Result<()> {
    let epsilon = args.epsilon.unwrap_or(match args.case {
        CaseKind::BoundaryLayer => 1e-2,
        _ => 1e-8,
    });
    let case = ManufacturedCase::new(args.case, epsilon).with_sigma(args.sigma);
    let mut config = StudyConfig::new(case, args.family);
    if let Some(path) = &args.mesh_file {
        let name = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "mesh".into());
        config.meshes = MeshSource::Fixed {
            name,
            mesh: load_mesh(path)?,
        };
    }
    config.degrees = args.k;
    config.levels = args.levels;
    config.first_level = args.first_level;
    config.macro_mode = args.macro_mode;
    config.constants = StabilisationConstants {
        c_tau: args.ctau,
        c_rho: args.crho,
        ..StabilisationConstants::default()
    };
    config.condense = args.condense;
    config.out_dir = Some(args.out);
    config.plot_data = args.plot_data;
    config.dump_system = args.dump_system;

    let series = run_convergence_study(&config)?;
    let rate = |r: Option<f64>| r.map_or("-".to_string(), |v| format!("{v:.3}"));
    for s in &series {
        println!(
            "case {}, mesh {}, k = {}, eps = {:e}",
            case.kind,
            config.meshes.name(),
            s.degree,
            epsilon
        );
        println!(
            "{:>5} {:>11} {:>8} {:>11} {:>7} {:>11} {:>7}",
            "level", "h", "ndof", "err_LP", "rate", "err_supg", "rate"
        );
        for r in &s.reports {
            println!(
                "{:>5} {:>11.4e} {:>8} {:>11.4e} {:>7} {:>11.4e} {:>7}",
                r.level,
                r.h,
                r.ndof,
                r.err_lp,
                rate(r.rate_lp),
                r.err_supg,
                rate(r.rate_supg)
            );
        }
        if case.kind == CaseKind::Patch {
            let max = s.max_err_lp();
            if max <= PATCH_TOLERANCE {
                println!("exact to tolerance (max err_LP = {max:.3e} <= {PATCH_TOLERANCE:e})");
            } else {
                println!("NOT exact: max err_LP = {max:.3e} > {PATCH_TOLERANCE:e}");
            }
        }
        if let Some(p) = &s.csv_path {
            println!("wrote {}", p.display());
        }
        println!();
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Args::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
