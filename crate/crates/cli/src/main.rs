//! Convergence-study driver for the mixed DG elasticity solver.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use elastodg::forms::StabilizationParams;
use elastodg::study::{run_h_sweep, run_p_sweep, Format, Levels, MeshSpec, RunConfig};
use elastodg::Error;

#[derive(Parser)]
#[command(name = "elastodg", version, about = "h- and p-convergence studies for mixed DG linear elasticity")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fixed degrees, one solve per mesh level.
    HSweep {
        #[command(flatten)]
        common: Common,
        /// Mesh levels: a count (n = 2, 4, 8, ... cells per axis; refinements for file meshes) or a list of n.
        #[arg(long, default_value = "4")]
        levels: Levels,
        /// Displacement degree.
        #[arg(long, default_value_t = 1)]
        k: usize,
        /// Stress degree (defaults to k).
        #[arg(long)]
        l: Option<usize>,
    },
    /// One mesh, k = l over a list of degrees; errors scaled by powers of p = k + 1.
    PSweep {
        #[command(flatten)]
        common: Common,
        /// The mesh: cells per axis, or refinements for file meshes.
        #[arg(long, default_value_t = 16)]
        levels: usize,
        /// Degrees to sweep, comma separated.
        #[arg(long, value_delimiter = ',', default_value = "1,2,3,4")]
        degrees: Vec<usize>,
    },
}

#[derive(Args)]
struct Common {
    /// elas2d_poly or elas3d_sine.
    #[arg(long, default_value = "elas2d_poly")]
    problem: String,
    /// tri-uniform, quad-uniform, tet-uniform or file:<path>.
    #[arg(long, default_value = "tri-uniform")]
    mesh: MeshSpec,
    /// Named coefficient family, e.g. c11=hinv,c22=h. Explicit exponents override it.
    #[arg(long)]
    flux: Option<String>,
    #[arg(long)]
    zeta: Option<f64>,
    #[arg(long)]
    eta: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    alpha1: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    alpha2: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    beta1: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    beta2: Option<f64>,
    /// Accept exponents outside the analysed ranges.
    #[arg(long)]
    allow_out_of_theory: bool,
    /// csv or md.
    #[arg(long, default_value = "csv")]
    format: Format,
    /// Write the table here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Finest 3D level index allowed (level i has 2^(i+1) cells per axis).
    #[arg(long, default_value_t = 2)]
    max_level_3d: u32,
}

impl Common {
    fn stabilization(&self) -> Result<StabilizationParams, Error> {
        let mut s = match &self.flux {
            Some(alias) => StabilizationParams::from_alias(alias)?,
            None => StabilizationParams::default(),
        };
        let set = |slot: &mut f64, v: Option<f64>| {
            if let Some(v) = v {
                *slot = v;
            }
        };
        set(&mut s.zeta, self.zeta);
        set(&mut s.eta, self.eta);
        set(&mut s.alpha1, self.alpha1);
        set(&mut s.alpha2, self.alpha2);
        set(&mut s.beta1, self.beta1);
        set(&mut s.beta2, self.beta2);
        if let Some(eta) = self.eta {
            s.c22_zero = eta == 0.0;
        }
        s.allow_out_of_theory = self.allow_out_of_theory;
        s.validate()?;
        Ok(s)
    }

    fn config(&self, levels: Levels, k: usize, l: usize) -> Result<RunConfig, Error> {
        let max_n_3d = 2usize
            .checked_shl(self.max_level_3d)
            .ok_or_else(|| Error::InvalidInput(format!("--max-level-3d {} is too large", self.max_level_3d)))?;
        Ok(RunConfig {
            problem: self.problem.clone(),
            mesh: self.mesh.clone(),
            levels,
            k,
            l,
            stab: self.stabilization()?,
            format: self.format,
            max_n_3d,
        })
    }

    fn emit(&self, table: &str) -> Result<(), Error> {
        match &self.out {
            Some(path) => Ok(std::fs::write(path, table)?),
            None => {
                print!("{table}");
                Ok(())
            }
        }
    }
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::HSweep { common, levels, k, l } => {
            let config = common.config(levels, k, l.unwrap_or(k))?;
            let report = run_h_sweep(&config)?;
            common.emit(&report.render(config.format))
        }
        Command::PSweep { common, levels, degrees } => {
            let first = degrees.first().copied().unwrap_or(1);
            let config = common.config(Levels::List(vec![levels]), first, first)?;
            let report = run_p_sweep(&config, &degrees)?;
            common.emit(&report.render(config.format))
        }
    }
}

fn exit_code(err: &Error) -> u8 {
    match err.root() {
        Error::Residual { .. } | Error::Singular(_) => 3,
        Error::InvalidInput(_)
        | Error::DegreeMismatch { .. }
        | Error::MeshParse { .. }
        | Error::InvalidMesh(_)
        | Error::QuadratureUnavailable(_) => 2,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
