use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use quasimode_core::exponents::resolve_plan;
use quasimode_core::sweep::{geometric_grid, DEFAULT_FIT_TOL};
use quasimode_core::{ExponentPlan, HomogeneousPotential, QuadratureConfig};
use serde::{Deserialize, Serialize};

/// Radii `base^k` for `k = min_exp..=max_exp`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSpec {
    pub base: f64,
    pub min_exp: i32,
    pub max_exp: i32,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self { base: 2.0, min_exp: 4, max_exp: 14 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EigenSpec {
    pub fd_step: f64,
    /// Largest of the three steps used to measure the convergence order.
    pub order_step: f64,
    pub samples: usize,
    pub tolerance: f64,
}

impl Default for EigenSpec {
    fn default() -> Self {
        Self { fd_step: 1e-4, order_step: 1e-2, samples: 64, tolerance: 1e-5 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ResidualSpec {
    pub radius: f64,
    pub fd_steps: Vec<f64>,
    pub samples: usize,
    pub tolerance: f64,
}

impl Default for ResidualSpec {
    fn default() -> Self {
        Self { radius: 32.0, fd_steps: vec![1e-3, 5e-4], samples: 200, tolerance: 1e-3 }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputPaths {
    pub csv: Option<PathBuf>,
    pub report: Option<PathBuf>,
}

/// Everything a run depends on. Missing fields take their defaults;
/// `gamma` and `alpha` are chosen automatically when absent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub n: usize,
    pub sigma: f64,
    pub p: f64,
    pub profile: String,
    pub gamma: Option<f64>,
    pub alpha: Option<f64>,
    pub grid: GridSpec,
    pub quadrature: QuadratureConfig,
    pub eigen: EigenSpec,
    pub residual: ResidualSpec,
    pub fit_tol: f64,
    /// Level the Strichartz quotient has to exceed.
    pub target: f64,
    pub output: OutputPaths,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            n: 2,
            sigma: 0.0,
            p: 4.0,
            profile: "sin2".into(),
            gamma: None,
            alpha: None,
            grid: GridSpec::default(),
            quadrature: QuadratureConfig::default(),
            eigen: EigenSpec::default(),
            residual: ResidualSpec::default(),
            fit_tol: DEFAULT_FIT_TOL,
            target: 10.0,
            output: OutputPaths::default(),
        }
    }
}

impl RunConfig {
    /// Reads a config file. A report written by another command is accepted
    /// too: its embedded `config` object is used with the output paths
    /// cleared, so a rerun never overwrites the report it came from.
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let mut value: serde_json::Value = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        let embedded = value.get("config").is_some();
        if let Some(inner) = value.get_mut("config") {
            value = inner.take();
        }
        let mut cfg: Self = serde_json::from_value(value).with_context(|| format!("invalid config in {}", path.display()))?;
        if embedded {
            cfg.output = OutputPaths::default();
        }
        Ok(cfg)
    }

    pub fn potential(&self) -> quasimode_core::Result<HomogeneousPotential> {
        HomogeneousPotential::builtin(&self.profile, self.n, self.sigma)
    }

    pub fn plan(&self) -> quasimode_core::Result<ExponentPlan> {
        resolve_plan(self.n, self.sigma, self.p, self.gamma, self.alpha)
    }

    pub fn radii(&self) -> quasimode_core::Result<Vec<f64>> {
        geometric_grid(self.grid.base, self.grid.min_exp, self.grid.max_exp)
    }

    /// Checks everything that can be checked without numerics and returns
    /// the config with `gamma` and `alpha` filled in.
    pub fn resolve(&self) -> quasimode_core::Result<(Self, ExponentPlan)> {
        use quasimode_core::LabError::InvalidParameter;
        let plan = self.plan()?;
        self.potential()?;
        self.quadrature.validate()?;
        self.radii()?;
        if !(self.fit_tol > 0.0) || !(self.target > 0.0) {
            return Err(InvalidParameter("fit_tol and target must be positive".into()));
        }
        if !(self.residual.radius > 2.0) {
            return Err(InvalidParameter(format!("radius R = {} must exceed 2", self.residual.radius)));
        }
        if self.residual.fd_steps.len() < 2 || self.residual.fd_steps.iter().any(|h| !(*h > 0.0)) {
            return Err(InvalidParameter("need at least two positive finite-difference steps".into()));
        }
        if !(self.eigen.fd_step > 0.0 && self.eigen.order_step > 0.0) || self.eigen.samples == 0 || self.residual.samples == 0 {
            return Err(InvalidParameter("steps and sample counts must be positive".into()));
        }
        let mut resolved = self.clone();
        resolved.gamma = Some(plan.gamma);
        resolved.alpha = Some(plan.alpha);
        Ok((resolved, plan))
    }
}
