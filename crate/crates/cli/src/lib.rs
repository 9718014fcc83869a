//! Batch commands over the `hmdf` library: compute h-functions of domain
//! files, invert step functions, run the construction and render SVGs.
//!
//! Every command returns the text meant for standard output and writes its
//! files under [`RunConfig::out`] when one is given. Failures carry the
//! process exit code: 2 for bad input, 3 for engine errors and 4 when an
//! inversion does not converge.

use std::fmt;
use std::path::PathBuf;

use clap::{Args, ValueEnum};
use hmdf::construct::Engine;
use hmdf::potential::{FdConfig, WosConfig};

mod commands;
pub mod io;
pub mod svg;

pub use commands::{cmd_check, cmd_compute, cmd_construct, cmd_invert, cmd_render, parse_radii};

pub const EXIT_INPUT: i32 = 2;
pub const EXIT_ENGINE: i32 = 3;
pub const EXIT_NOT_CONVERGED: i32 = 4;

#[derive(Debug, Clone)]
pub struct CliError {
    pub code: i32,
    pub message: String,
    /// Partial output still worth printing, e.g. unconverged angles.
    pub output: Option<String>,
}

impl CliError {
    pub fn input(message: impl Into<String>) -> Self {
        CliError { code: EXIT_INPUT, message: message.into(), output: None }
    }

    pub fn engine(message: impl Into<String>) -> Self {
        CliError { code: EXIT_ENGINE, message: message.into(), output: None }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for CliError {}

impl From<hmdf::Error> for CliError {
    fn from(e: hmdf::Error) -> Self {
        use hmdf::Error::*;
        let code = match e {
            Engine(_) | NotInterior => EXIT_ENGINE,
            NotConverged { .. } => EXIT_NOT_CONVERGED,
            _ => EXIT_INPUT,
        };
        CliError { code, message: e.to_string(), output: None }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::input(e.to_string())
    }
}

/// Text for standard output and progress notes for standard error.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Output {
    pub stdout: String,
    pub notes: Vec<String>,
}

pub type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EngineKind {
    Wos,
    Fd,
}

/// Options shared by all subcommands.
#[derive(Debug, Clone, PartialEq, Args)]
pub struct RunConfig {
    /// Harmonic measure engine [default: wos for compute, fd for invert;
    /// construct always inverts with fd and measures with this engine]
    #[arg(long, env = "HMDF_ENGINE", global = true)]
    pub engine: Option<EngineKind>,
    /// Walks per walk-on-spheres estimate
    #[arg(long, env = "HMDF_SAMPLES", global = true, default_value_t = 200_000)]
    pub samples: usize,
    /// Walk-on-spheres shell thickness relative to the outer radius
    #[arg(long, env = "HMDF_EPS", global = true, default_value_t = 1e-5)]
    pub eps: f64,
    #[arg(long, env = "HMDF_SEED", global = true, default_value_t = 0)]
    pub seed: u64,
    /// Angular nodes of the finite volume grid (even, at least 8)
    #[arg(long, env = "HMDF_RESOLUTION", global = true, default_value_t = 512)]
    pub resolution: usize,
    /// Inversion tolerance on each cumulative target
    #[arg(long, env = "HMDF_TOL", global = true, default_value_t = 1e-3)]
    pub tol: f64,
    /// Step indices for construct
    #[arg(long, env = "HMDF_N", global = true, value_delimiter = ',', default_values_t = [2usize, 4, 8, 16])]
    pub n: Vec<usize>,
    /// Output directory; without it results go to standard output
    #[arg(long, env = "HMDF_OUT", global = true)]
    pub out: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            engine: None,
            samples: 200_000,
            eps: 1e-5,
            seed: 0,
            resolution: 512,
            tol: 1e-3,
            n: vec![2, 4, 8, 16],
            out: None,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> CliResult<()> {
        if self.samples == 0 {
            return Err(CliError::input("--samples must be positive"));
        }
        if !(self.eps > 0.0 && self.eps < 1.0) {
            return Err(CliError::input("--eps must lie in (0, 1)"));
        }
        if self.resolution < 8 || self.resolution % 2 != 0 {
            return Err(CliError::input("--resolution must be even and at least 8"));
        }
        if self.tol.is_nan() || self.tol <= 0.0 {
            return Err(CliError::input("--tol must be positive"));
        }
        if self.n.is_empty() || self.n.contains(&0) {
            return Err(CliError::input("--n must list positive integers"));
        }
        Ok(())
    }

    pub fn fd(&self) -> FdConfig {
        FdConfig { angular_nodes: self.resolution, ..FdConfig::default() }
    }

    pub fn wos(&self) -> WosConfig {
        WosConfig { samples: self.samples, eps_rel: self.eps, seed: self.seed, ..WosConfig::default() }
    }

    pub fn engine_or(&self, default: EngineKind) -> Engine {
        match self.engine.unwrap_or(default) {
            EngineKind::Fd => Engine::Fd(self.fd()),
            EngineKind::Wos => Engine::Wos(self.wos()),
        }
    }
}
