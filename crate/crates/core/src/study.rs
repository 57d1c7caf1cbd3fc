//! Convergence studies over mesh levels and polynomial degrees.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::analysis::{compute_errors, fill_rates, ErrorReport};
use crate::cases::{CaseKind, ManufacturedCase};
use crate::discretization::{Discretization, DiscretizationOptions};
use crate::error::{Error, Result};
use crate::forms::StabilisationConstants;
use crate::mesh::{generate_mesh, Family, MacroMode, Mesh};
use crate::system::{assemble, solve_condensed, GlobalSystem, Solution};

pub const CSV_HEADER: &str = "level,h,ndof,err_LP,rate_LP,err_supg,rate_supg";

/// Bound on `err_LP` below which the patch case counts as reproduced exactly.
pub const PATCH_TOLERANCE: f64 = 1e-7;

/// Where the meshes of a study come from.
#[derive(Debug, Clone)]
pub enum MeshSource {
    Family(Family),
    /// A single user-supplied mesh, reported as level 0.
    Fixed {
        name: String,
        mesh: Mesh,
    },
}

impl MeshSource {
    pub fn name(&self) -> &str {
        match self {
            MeshSource::Family(f) => f.name(),
            MeshSource::Fixed { name, .. } => name,
        }
    }
}

#[derive(Debug, Clone)]
pub struct StudyConfig {
    pub case: ManufacturedCase,
    pub meshes: MeshSource,
    pub degrees: Vec<usize>,
    pub first_level: usize,
    pub levels: usize,
    pub macro_mode: MacroMode,
    pub constants: StabilisationConstants,
    pub condense: bool,
    /// Directory for CSV, plot and dump files; nothing is written when `None`.
    pub out_dir: Option<PathBuf>,
    pub plot_data: bool,
    pub dump_system: bool,
}

impl StudyConfig {
    pub fn new(case: ManufacturedCase, family: Family) -> Self {
        Self {
            case,
            meshes: MeshSource::Family(family),
            degrees: vec![1],
            first_level: 0,
            levels: 4,
            macro_mode: MacroMode::Trivial,
            constants: StabilisationConstants::default(),
            condense: false,
            out_dir: None,
            plot_data: false,
            dump_system: false,
        }
    }

    fn level_range(&self) -> Vec<usize> {
        match self.meshes {
            MeshSource::Family(_) => (self.first_level..self.first_level + self.levels).collect(),
            MeshSource::Fixed { .. } => vec![0],
        }
    }

    fn mesh(&self, level: usize) -> Mesh {
        match &self.meshes {
            MeshSource::Family(f) => generate_mesh(*f, level),
            MeshSource::Fixed { mesh, .. } => mesh.clone(),
        }
    }

    fn stem(&self, k: usize) -> String {
        format!("{}_{}_k{}", self.case.kind, self.meshes.name(), k)
    }
}

/// Results of one degree over all levels.
#[derive(Debug, Clone)]
pub struct Series {
    pub degree: usize,
    pub reports: Vec<ErrorReport>,
    pub csv_path: Option<PathBuf>,
}

impl Series {
    pub fn max_err_lp(&self) -> f64 {
        self.reports.iter().map(|r| r.err_lp).fold(0.0, f64::max)
    }

    /// Rates between the two finest levels.
    pub fn final_rates(&self) -> (Option<f64>, Option<f64>) {
        self.reports
            .last()
            .map_or((None, None), |r| (r.rate_lp, r.rate_supg))
    }
}

/// Output of a single discretise-assemble-solve run.
#[derive(Debug)]
pub struct Run {
    pub disc: Discretization,
    pub system: GlobalSystem,
    pub solution: Solution,
    pub report: ErrorReport,
}

/// Discretises `case` on `mesh`, solves, and measures the error.
pub fn run_case(
    case: &ManufacturedCase,
    mesh: Mesh,
    options: DiscretizationOptions,
    condense: bool,
    level: usize,
) -> Result<Run> {
    let disc = Discretization::new(mesh, case.coefficients(), options)?;
    let system = assemble(&disc, &case.boundary_condition())?;
    let solution = if condense {
        solve_condensed(&disc, &system)?
    } else {
        system.solve(&disc)?
    };
    let c = *case;
    let report = compute_errors(
        &disc,
        &solution,
        move |x| c.velocity(x),
        move |x| c.pressure(x),
        level,
        system.n_unknowns(),
    )?;
    Ok(Run {
        disc,
        system,
        solution,
        report,
    })
}

pub fn csv_string(reports: &[ErrorReport]) -> String {
    let rate = |r: Option<f64>| r.map(|v| format!("{v:.6}")).unwrap_or_default();
    let mut s = String::from(CSV_HEADER);
    s.push('\n');
    for r in reports {
        let _ = writeln!(
            s,
            "{},{:.10e},{},{:.10e},{},{:.10e},{}",
            r.level,
            r.h,
            r.ndof,
            r.err_lp,
            rate(r.rate_lp),
            r.err_supg,
            rate(r.rate_supg)
        );
    }
    s
}

fn write_plot_data(dir: &Path, stem: &str, reports: &[ErrorReport]) -> Result<()> {
    for (name, pick) in [
        (
            "err_LP",
            (|r: &ErrorReport| r.err_lp) as fn(&ErrorReport) -> f64,
        ),
        ("err_supg", |r: &ErrorReport| r.err_supg),
    ] {
        let mut s = String::from("h,err\n");
        for r in reports {
            let _ = writeln!(s, "{:.10e},{:.10e}", r.h, pick(r));
        }
        fs::write(dir.join(format!("{stem}_{name}.dat")), s)?;
    }
    Ok(())
}

/// Runs every `(k, level)` pair of `config` and writes one CSV per degree.
pub fn run_convergence_study(config: &StudyConfig) -> Result<Vec<Series>> {
    if config.condense && config.macro_mode != MacroMode::Trivial {
        return Err(Error::InconsistentOptions(
            "static condensation requires the trivial macro decomposition".into(),
        ));
    }
    if let Some(dir) = &config.out_dir {
        fs::create_dir_all(dir)?;
    }
    let mut out = Vec::with_capacity(config.degrees.len());
    for &k in &config.degrees {
        let options = DiscretizationOptions::new(k)
            .with_macro(config.macro_mode)
            .with_constants(config.constants);
        let mut reports = Vec::new();
        for level in config.level_range() {
            let wrap = |e: Error| Error::Study {
                degree: k,
                level,
                source: Box::new(e),
            };
            let run = run_case(
                &config.case,
                config.mesh(level),
                options,
                config.condense,
                level,
            )
            .map_err(wrap)?;
            log::info!(
                "k = {k}, level {level}: h = {:.4e}, ndof = {}, err_LP = {:.4e}, residual = {:.2e}",
                run.report.h,
                run.report.ndof,
                run.report.err_lp,
                run.solution.residual
            );
            if let (true, Some(dir)) = (config.dump_system, &config.out_dir) {
                let stem = format!("{}_l{level}", config.stem(k));
                fs::write(
                    dir.join(format!("{stem}_matrix.txt")),
                    run.system.matrix.to_coordinate_text(),
                )?;
                fs::write(dir.join(format!("{stem}_rhs.txt")), run.system.rhs_text())?;
            }
            log::debug!(
                "components: b = {:.4e}, eps = {:.4e}, st = {:.4e}, supg = {:.4e}, p = {:.4e}, u_T = {:.4e}",
                run.report.err_b,
                run.report.err_eps,
                run.report.err_st,
                run.report.err_supg,
                run.report.err_pressure,
                run.report.err_velocity_exact
            );
            reports.push(run.report);
        }
        if config.case.kind == CaseKind::Patch {
            // the error is rounding noise, rates carry no information
            reports.iter_mut().for_each(|r| {
                r.rate_lp = None;
                r.rate_supg = None;
            });
        } else {
            fill_rates(&mut reports);
        }
        let csv_path = match &config.out_dir {
            Some(dir) => {
                let path = dir.join(format!("{}.csv", config.stem(k)));
                fs::write(&path, csv_string(&reports))?;
                if config.plot_data {
                    write_plot_data(dir, &config.stem(k), &reports)?;
                }
                Some(path)
            }
            None => None,
        };
        out.push(Series {
            degree: k,
            reports,
            csv_path,
        });
    }
    Ok(out)
}
