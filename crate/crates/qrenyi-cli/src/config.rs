//! Optional JSON config file; explicit flags override file values.

use std::path::Path;

use serde::Deserialize;

use qrenyi::MinimizationConfig;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub seed: Option<u64>,
    pub out: Option<String>,
    pub kraus: Option<usize>,
    pub dim: Option<usize>,
    pub p: Option<f64>,
    pub trials: Option<usize>,
    pub channels: Option<usize>,
    pub y0: Option<f64>,
    pub dims: Option<Vec<usize>>,
    pub grid: Option<usize>,
    pub p_min: Option<f64>,
    pub p_max: Option<f64>,
    pub p_steps: Option<usize>,
    // Optimizer knobs.
    pub starts: Option<usize>,
    pub max_iters: Option<usize>,
    pub grad_tol: Option<f64>,
    pub value_tol: Option<f64>,
    pub fd_step: Option<f64>,
    pub include_special_starts: Option<bool>,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> anyhow::Result<Self> {
        match path {
            None => Ok(Self::default()),
            Some(p) => {
                let text = std::fs::read_to_string(p)?;
                Ok(serde_json::from_str(&text)?)
            }
        }
    }

    /// Minimization config with file values applied under flag overrides.
    pub fn minimization(&self, starts_flag: Option<usize>) -> MinimizationConfig {
        let mut cfg = MinimizationConfig::default();
        if let Some(s) = starts_flag.or(self.starts) {
            cfg.starts = s;
        }
        if let Some(m) = self.max_iters {
            cfg.max_iters = m;
        }
        if let Some(g) = self.grad_tol {
            cfg.grad_tol = g;
        }
        if let Some(v) = self.value_tol {
            cfg.value_tol = v;
        }
        if let Some(f) = self.fd_step {
            cfg.fd_step = f;
        }
        if let Some(i) = self.include_special_starts {
            cfg.include_special_starts = i;
        }
        cfg
    }
}

/// Flag value, then config-file value, then default.
pub fn resolve<T: Copy>(flag: Option<T>, file: Option<T>, default: T) -> T {
    flag.or(file).unwrap_or(default)
}

pub fn resolve_required<T: Copy>(
    flag: Option<T>,
    file: Option<T>,
    name: &str,
) -> Result<T, String> {
    flag.or(file)
        .ok_or_else(|| format!("missing required flag --{name} (not in config file either)"))
}
