use std::path::{Path, PathBuf};

use clap::Args;
use serde::{Deserialize, Serialize};

use crate::LabError;

/// Every tunable of every command. The config file is a flat TOML document
/// with the same keys as the long flags (underscores for dashes); a flag given
/// on the command line wins over the file.
#[derive(Debug, Clone, Default, PartialEq, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Params {
    /// Flat TOML file of parameters.
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    /// Output directory; falls back to $LPLAB_OUT_DIR, then ./lplab-out.
    #[arg(long)]
    #[serde(skip_serializing)]
    pub out_dir: Option<PathBuf>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub s: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t: Option<f64>,
    /// Exponent of the intermediate space in factorization checks.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rho: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_max: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trials: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub restarts: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_iters: Option<usize>,
    /// Verification tolerance.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub min_dim: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_dim: Option<usize>,
    /// Operator file `{rows, cols, data, domain, codomain}`.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub matrix: Option<PathBuf>,
    /// Operator to build: u, s, t, tpq, hadamard or identity.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    /// Record elapsed time in the manifest (breaks byte-identical reruns).
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_clock: Option<bool>,
}

macro_rules! overlay {
    ($flags:expr, $file:expr, $($f:ident),*) => {
        Params { $($f: $flags.$f.or($file.$f),)* }
    };
}

impl Params {
    /// Reads the config file named by `--config`, if any, and lays the flags
    /// over it.
    pub fn resolve(self) -> Result<Params, LabError> {
        let Some(path) = self.config.clone() else { return Ok(self) };
        let file = Params::from_file(&path)?;
        Ok(overlay!(
            self, file, config, out_dir, p, q, s, t, r, rho, n, m, n_max, seed, samples, trials, restarts, max_iters,
            tol, min_dim, max_dim, matrix, name, wall_clock
        ))
    }

    pub fn from_file(path: &Path) -> Result<Params, LabError> {
        let text = std::fs::read_to_string(path).map_err(|e| LabError::io(path, e))?;
        toml::from_str(&text).map_err(|e| LabError::Config(format!("{}: {e}", path.display())))
    }

    pub fn out_dir(&self) -> PathBuf {
        self.out_dir
            .clone()
            .or_else(|| std::env::var_os("LPLAB_OUT_DIR").map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from("lplab-out"))
    }
}

/// The value in `slot`, storing `default` first when it is empty, so that the
/// manifest records every effective parameter.
pub fn fill<T: Clone>(slot: &mut Option<T>, default: T) -> T {
    slot.get_or_insert(default).clone()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.toml");
        std::fs::write(&path, "p = 1.2\nq = 4.0\nseed = 9\nn_max = 3\n").unwrap();
        let flags = Params { config: Some(path.clone()), q: Some(3.0), ..Params::default() };
        let got = flags.resolve().unwrap();
        assert_eq!((got.p, got.q, got.seed, got.n_max), (Some(1.2), Some(3.0), Some(9), Some(3)));
        std::fs::write(&path, "bogus = 1\n").unwrap();
        let flags = Params { config: Some(path), ..Params::default() };
        assert!(matches!(flags.resolve(), Err(LabError::Config(_))));
    }

    #[test]
    fn fill_records_default() {
        let mut slot = None;
        assert_eq!(fill(&mut slot, 3), 3);
        assert_eq!(slot, Some(3));
        assert_eq!(fill(&mut slot, 5), 3);
    }
}
