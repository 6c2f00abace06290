//! Argument parsing and dispatch.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use magicint::models::FamilyId;

use crate::commands;
use crate::config::{parse_config_text, parse_param, RunConfig};
use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(
    name = "magicint",
    version,
    about = "Parametric integration by magic point interpolation"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train a model and write it with its residual curve.
    Train(CommonArgs),
    /// Integrate one parameter with a trained model.
    Eval {
        #[command(flatten)]
        common: CommonArgs,
        /// Also compute the integral by direct quadrature.
        #[arg(long)]
        oracle: bool,
    },
    /// Out-of-sample error study against direct quadrature.
    Study(CommonArgs),
    /// A priori error bounds, compared with a model's residuals if given.
    Bounds(CommonArgs),
    /// Print the resolved configuration and model summary.
    Info(CommonArgs),
}

#[derive(Debug, Args, Default)]
pub struct CommonArgs {
    /// cgmy, stft-gauss or exp-test
    #[arg(long)]
    pub family: Option<String>,
    /// File of `key = value` settings
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub cloud_size: Option<String>,
    #[arg(long)]
    pub grid_size: Option<String>,
    /// uniform or chebyshev
    #[arg(long)]
    pub grid: Option<String>,
    /// Integration domain `lo,hi`
    #[arg(long, allow_hyphen_values = true)]
    pub omega: Option<String>,
    /// Greedy stopping tolerance, or `none`
    #[arg(long)]
    pub tol: Option<String>,
    #[arg(long)]
    pub max_m: Option<String>,
    #[arg(long)]
    pub seed: Option<String>,
    #[arg(long)]
    pub test_seed: Option<String>,
    #[arg(long)]
    pub n_test: Option<String>,
    /// Tolerance of the weight integrals
    #[arg(long)]
    pub quad_tol: Option<String>,
    /// Tolerance of the reference quadrature
    #[arg(long)]
    pub oracle_tol: Option<String>,
    #[arg(long)]
    pub model: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Parameter vector `p1,p2,...`
    #[arg(long, allow_hyphen_values = true)]
    pub param: Option<String>,
    /// Parameter box, coordinates `lo:hi` or a fixed value, comma separated
    #[arg(long = "box", allow_hyphen_values = true)]
    pub bounds: Option<String>,
    #[arg(long)]
    pub rho: Option<String>,
    #[arg(long)]
    pub eta: Option<String>,
    #[arg(long)]
    pub bound_c: Option<String>,
    /// Signal of the stft-gauss family: unit or lorentz
    #[arg(long)]
    pub signal: Option<String>,
}

impl CommonArgs {
    fn flag_pairs(&self) -> Vec<(String, String)> {
        let mut out = Vec::new();
        let mut push = |k: &str, v: &Option<String>| {
            if let Some(v) = v {
                out.push((k.to_string(), v.clone()));
            }
        };
        push("family", &self.family);
        push("box", &self.bounds);
        push("omega", &self.omega);
        push("signal", &self.signal);
        push("cloud_size", &self.cloud_size);
        push("grid_size", &self.grid_size);
        push("grid", &self.grid);
        push("tol", &self.tol);
        push("max_m", &self.max_m);
        push("seed", &self.seed);
        push("test_seed", &self.test_seed);
        push("n_test", &self.n_test);
        push("quad_tol", &self.quad_tol);
        push("oracle_tol", &self.oracle_tol);
        push("rho", &self.rho);
        push("eta", &self.eta);
        push("bound_c", &self.bound_c);
        let path = |p: &Option<PathBuf>| p.as_ref().map(|p| p.display().to_string());
        push("out", &path(&self.out));
        out
    }

    /// Config file settings followed by flags; later entries win.
    fn override_pairs(&self) -> Result<Vec<(String, String)>, CliError> {
        let mut pairs = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| CliError::Io(format!("cannot read {}: {e}", path.display())))?;
                parse_config_text(&text)?
            }
            None => Vec::new(),
        };
        pairs.extend(self.flag_pairs());
        Ok(pairs)
    }

    /// Defaults of the chosen family, then the config file, then flags.
    fn resolve(&self) -> Result<RunConfig, CliError> {
        let pairs = self.override_pairs()?;
        let family = pairs
            .iter()
            .rev()
            .find(|(k, _)| k.trim() == "family")
            .map(|(_, v)| v.trim().to_string())
            .ok_or_else(|| CliError::Usage("--family is required".into()))?;
        let id: FamilyId = family.parse().map_err(CliError::Usage)?;
        let mut cfg = RunConfig::defaults(id);
        cfg.apply(&pairs)?;
        if let Some(m) = &self.model {
            cfg.model = Some(m.clone());
        }
        Ok(cfg)
    }

    fn param(&self) -> Result<Vec<f64>, CliError> {
        let p = self
            .param
            .as_deref()
            .ok_or_else(|| CliError::Usage("--param is required".into()))?;
        parse_param(p)
    }
}

pub fn dispatch(command: Command, log: &mut dyn Write) -> Result<(), CliError> {
    match command {
        Command::Train(a) => {
            let cfg = a.resolve()?;
            commands::cmd_train(&cfg, log)?;
        }
        Command::Eval { common, oracle } => {
            let path = common
                .model
                .clone()
                .ok_or_else(|| CliError::Usage("eval needs --model".into()))?;
            let p = common.param()?;
            let (cfg, family, file) = commands::load_model(&path, &common.override_pairs()?)?;
            commands::cmd_eval(&cfg, family.as_ref(), &file, &p, oracle, log)?;
        }
        Command::Study(a) => match a.model.clone() {
            Some(path) => {
                let (cfg, family, file) = commands::load_model(&path, &a.override_pairs()?)?;
                commands::cmd_study(&cfg, family.as_ref(), &file, log)?;
            }
            None => {
                let cfg = a.resolve()?;
                let file = commands::cmd_train(&cfg, log)?;
                let family = crate::family::build_family(&cfg)?;
                commands::cmd_study(&cfg, family.as_ref(), &file, log)?;
            }
        },
        Command::Bounds(a) => match a.model.clone() {
            Some(path) => {
                let (cfg, _, file) = commands::load_model(&path, &a.override_pairs()?)?;
                commands::cmd_bounds(&cfg, file.model.history(), log)?;
            }
            None => {
                let cfg = a.resolve()?;
                commands::cmd_bounds(&cfg, &[], log)?;
            }
        },
        Command::Info(a) => match a.model.clone() {
            Some(path) => {
                let (cfg, _, file) = commands::load_model(&path, &a.override_pairs()?)?;
                commands::cmd_info(&cfg, Some(&file), log)?;
            }
            None => {
                let cfg = a.resolve()?;
                cfg.validate()?;
                commands::cmd_info(&cfg, None, log)?;
            }
        },
    }
    Ok(())
}

/// Parses `args`, runs the command, and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    let stdout = std::io::stdout();
    let mut log = stdout.lock();
    match dispatch(cli.command, &mut log) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
