//! Batch driver: convergence studies, CSV tables and VTK field dumps.

use std::fs;
use std::io::Write;
use std::path::PathBuf;

use anyhow::{bail, ensure, Context, Result};
use clap::{Parser, ValueEnum};

use pdmix_core::analysis::{self, levels_up_to};
use pdmix_core::assembly::assemble_system;
use pdmix_core::io::{matrix_market, vtk};
use pdmix_core::manufactured::{InterfaceMode, ManufacturedCase};
use pdmix_core::mesh::build_cartesian_mesh;
use pdmix_core::solver::{check_wellposedness, DENSE_DIMENSION_LIMIT};
use pdmix_core::spaces::build_dof_layout;

pub const MAX_LEVEL_CHOICES: [usize; 7] = [1, 2, 4, 8, 16, 32, 64];

/// Largest level at which `--diagnostics` runs the dense eigensolves.
pub const DIAGNOSTIC_MAX_LEVEL: usize = 4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    #[value(name = "derived")]
    Derived,
    #[value(name = "paper_literal")]
    PaperLiteral,
    #[value(name = "constant_projection")]
    ConstantProjection,
}

impl From<ModeArg> for InterfaceMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Derived => InterfaceMode::Derived,
            ModeArg::PaperLiteral => InterfaceMode::PaperLiteral,
            ModeArg::ConstantProjection => InterfaceMode::ConstantProjection,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "pdmix", version, about = "Primal-dual mixed finite element convergence studies")]
pub struct Cli {
    /// Manufactured example (1-4).
    #[arg(long, default_value_t = 1)]
    pub example: usize,
    /// Interface data.
    #[arg(long, value_enum, default_value_t = ModeArg::Derived)]
    pub interface_mode: ModeArg,
    /// Finest level h⁻¹; levels 1, 2, 4, ... up to this value are run.
    #[arg(long, default_value_t = 32)]
    pub max_level: usize,
    /// Override the interface storage coefficient β.
    #[arg(long, allow_negative_numbers = true)]
    pub beta: Option<f64>,
    /// Write the convergence table as CSV.
    #[arg(long)]
    pub csv: Option<PathBuf>,
    /// Write region1_<h>.vtk and region2_<h>.vtk for every level into this directory.
    #[arg(long)]
    pub fields: Option<PathBuf>,
    /// Print inf-sup and coercivity diagnostics for the small levels.
    #[arg(long)]
    pub diagnostics: bool,
    /// Write the global matrix and right-hand side of the finest level (Matrix Market).
    #[arg(long)]
    pub dump_matrix: Option<PathBuf>,
    /// Write the finest mesh as VTK.
    #[arg(long)]
    pub dump_mesh: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub example: usize,
    pub interface_mode: InterfaceMode,
    pub max_level_inv: usize,
    pub beta_override: Option<f64>,
    pub csv: Option<PathBuf>,
    pub fields: Option<PathBuf>,
    pub diagnostics: bool,
    pub dump_matrix: Option<PathBuf>,
    pub dump_mesh: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            example: 1,
            interface_mode: InterfaceMode::Derived,
            max_level_inv: 32,
            beta_override: None,
            csv: None,
            fields: None,
            diagnostics: false,
            dump_matrix: None,
            dump_mesh: None,
        }
    }
}

impl From<Cli> for RunConfig {
    fn from(c: Cli) -> Self {
        Self {
            example: c.example,
            interface_mode: c.interface_mode.into(),
            max_level_inv: c.max_level,
            beta_override: c.beta,
            csv: c.csv,
            fields: c.fields,
            diagnostics: c.diagnostics,
            dump_matrix: c.dump_matrix,
            dump_mesh: c.dump_mesh,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        ensure!((1..=4).contains(&self.example), "example must be 1, 2, 3 or 4, got {}", self.example);
        match self.interface_mode {
            InterfaceMode::ConstantProjection if self.example != 4 => {
                bail!("interface mode constant_projection is only valid with example 4")
            }
            InterfaceMode::PaperLiteral if !(2..=3).contains(&self.example) => {
                bail!("interface mode paper_literal is only valid with examples 2 and 3")
            }
            _ => {}
        }
        ensure!(
            MAX_LEVEL_CHOICES.contains(&self.max_level_inv),
            "max level must be one of {MAX_LEVEL_CHOICES:?}, got {}",
            self.max_level_inv
        );
        if let Some(beta) = self.beta_override {
            ensure!(beta.is_finite() && beta > 0.0, "beta must be positive and finite, got {beta}");
        }
        Ok(())
    }

    pub fn case(&self) -> Result<ManufacturedCase> {
        let case = ManufacturedCase::example(self.example, self.interface_mode)?;
        Ok(match self.beta_override {
            Some(beta) => case.with_beta(beta),
            None => case,
        })
    }
}

/// Runs the study described by `config`, printing tables to `out`.
pub fn run(config: &RunConfig, out: &mut impl Write) -> Result<()> {
    config.validate()?;
    let case = config.case()?;
    let levels = levels_up_to(config.max_level_inv);

    writeln!(out, "interface mode {}, beta {}", case.interface_mode.name(), case.beta)?;
    let report = analysis::convergence_study(&case, &levels)?;
    write!(out, "{}", report.to_table())?;

    if let Some(path) = &config.csv {
        fs::write(path, report.to_csv()).with_context(|| format!("writing {}", path.display()))?;
    }

    if let Some(dir) = &config.fields {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        for &level in &levels {
            let (mesh, sol, _) = analysis::run_level(&case, level)?;
            vtk::write_fields(dir, &mesh, &sol)?;
        }
    }

    if config.diagnostics {
        writeln!(out, "\nwell-posedness diagnostics")?;
        writeln!(out, "{:>6} {:>12} {:>12} {:>12}", "h_inv", "inf_sup", "coercivity", "c_min_eig")?;
        for &level in levels.iter().filter(|&&l| l <= DIAGNOSTIC_MAX_LEVEL) {
            let mesh = build_cartesian_mesh(level)?;
            let sys = assemble_system(&mesh, &build_dof_layout(&mesh), &case)?;
            if sys.dimension() > DENSE_DIMENSION_LIMIT {
                break;
            }
            let d = check_wellposedness(&mesh, &sys).with_context(|| format!("diagnostics at level {level}"))?;
            writeln!(
                out,
                "{level:>6} {:>12.6e} {:>12.6e} {:>12.6e}",
                d.inf_sup, d.kernel_coercivity, d.c_min_eigenvalue
            )?;
        }
    }

    let finest = config.max_level_inv;
    if let Some(path) = &config.dump_mesh {
        let mesh = build_cartesian_mesh(finest)?;
        let mut f = fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
        vtk::write_mesh(&mesh, &mut f)?;
    }
    if let Some(dir) = &config.dump_matrix {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        let mesh = build_cartesian_mesh(finest)?;
        let sys = assemble_system(&mesh, &build_dof_layout(&mesh), &case)?;
        let mut k = fs::File::create(dir.join(format!("matrix_{finest}.mtx")))?;
        matrix_market::write_matrix(&sys.global_matrix(), &mut k)?;
        let mut b = fs::File::create(dir.join(format!("rhs_{finest}.mtx")))?;
        matrix_market::write_vector(&sys.rhs(), &mut b)?;
    }
    Ok(())
}
