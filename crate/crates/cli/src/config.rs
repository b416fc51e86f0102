//! Run configuration: an optional JSON file, overridden field by field by
//! command-line flags.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::Failure;

pub const SCHEMA_VERSION: &str = "1";

/// Every key is optional; absent keys fall back to flags, then defaults.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: Option<String>,
    pub n: Option<usize>,
    pub q: Option<f64>,
    pub eps: Option<f64>,
    pub eps_tilde: Option<f64>,
    pub eps_tilde_from: Option<f64>,
    pub eps_tilde_to: Option<f64>,
    pub points: Option<usize>,
    pub profile_points: Option<usize>,
    pub tol: Option<f64>,
    pub n_grid: Option<usize>,
    pub ell_max: Option<usize>,
    pub spectrum_tol: Option<f64>,
    pub quad_order: Option<usize>,
    pub green_fault: Option<f64>,
    pub jobs: Option<usize>,
    pub csv: Option<PathBuf>,
    pub json: Option<PathBuf>,
}

impl RunConfig {
    pub fn load(path: Option<&Path>) -> Result<Self, Failure> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure::Config(format!("cannot read {}: {e}", path.display())))?;
        let cfg: Self = serde_json::from_str(&text)
            .map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
        match cfg.schema_version.as_deref() {
            None | Some(SCHEMA_VERSION) => Ok(cfg),
            Some(v) => Err(Failure::Config(format!(
                "unsupported schema_version {v:?}, expected {SCHEMA_VERSION:?}"
            ))),
        }
    }

    /// Applies the flags on top of the file.
    pub fn overlay(mut self, flags: RunConfig) -> Self {
        macro_rules! take {
            ($($f:ident),*) => {$(
                if flags.$f.is_some() {
                    self.$f = flags.$f;
                }
            )*};
        }
        take!(
            n, q, eps, eps_tilde, eps_tilde_from, eps_tilde_to, points, profile_points, tol,
            n_grid, ell_max, spectrum_tol, quad_order, green_fault, jobs, csv, json
        );
        self
    }
}
