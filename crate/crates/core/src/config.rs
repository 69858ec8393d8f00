//! Strict JSON study configuration.

use std::f64::consts::LN_2;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::chaos::Metric;
use crate::error::{Error, Result};
use crate::kernel::KernelSpec;
use crate::kinetic::PhaseGrid;
use crate::sim::{Geometry, InitialLaw};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum KernelConfig {
    Name(String),
    Full(KernelTable),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelTable {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coefficients: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub truncation: Option<usize>,
}

impl KernelConfig {
    pub fn resolve(&self) -> Result<KernelSpec> {
        match self {
            KernelConfig::Name(name) => KernelSpec::from_name(name, None, None),
            KernelConfig::Full(t) => {
                KernelSpec::from_name(&t.name, t.coefficients.clone(), t.truncation)
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    #[serde(default = "default_solver_nx")]
    pub nx: usize,
    /// Velocity cells; ignored (forced to 2) for two-point initial laws.
    #[serde(default = "default_solver_nv")]
    pub nv: usize,
    #[serde(default = "default_dt")]
    pub dt: f64,
}

fn default_solver_nx() -> usize {
    64
}

fn default_solver_nv() -> usize {
    64
}

fn default_dt() -> f64 {
    1e-2
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            nx: default_solver_nx(),
            nv: default_solver_nv(),
            dt: default_dt(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HistogramConfig {
    #[serde(default = "default_hist_bins")]
    pub nx: usize,
    /// Velocity bins; ignored for two-point laws, which use the exact atoms.
    #[serde(default = "default_hist_bins")]
    pub nv: usize,
}

fn default_hist_bins() -> usize {
    32
}

impl Default for HistogramConfig {
    fn default() -> Self {
        HistogramConfig {
            nx: default_hist_bins(),
            nv: default_hist_bins(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StudyConfig {
    pub kernel: KernelConfig,
    #[serde(default)]
    pub geometry: Geometry,
    #[serde(default = "default_law")]
    pub initial_law: InitialLaw,
    #[serde(alias = "N")]
    pub n_values: Vec<usize>,
    #[serde(alias = "R")]
    pub runs: usize,
    pub seed: u64,
    pub t_end: f64,
    /// Defaults to `[t_end]`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub snapshot_times: Option<Vec<f64>>,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub histogram: HistogramConfig,
    #[serde(default = "default_metrics")]
    pub metrics: Vec<Metric>,
    #[serde(default = "default_alpha")]
    pub alpha: Vec<f64>,
    /// Marginal orders `j` tabulated by the `bounds` command.
    #[serde(default = "default_bound_orders")]
    pub bound_orders: Vec<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
}

fn default_law() -> InitialLaw {
    InitialLaw::UniformXTwoPointV
}

fn default_metrics() -> Vec<Metric> {
    vec![Metric::L1, Metric::W1v]
}

fn default_alpha() -> Vec<f64> {
    vec![1.0]
}

fn default_bound_orders() -> Vec<u32> {
    vec![1, 2, 3]
}

impl StudyConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let mut de = serde_json::Deserializer::from_str(text);
        let cfg: StudyConfig = serde_path_to_error::deserialize(&mut de).map_err(|e| {
            let path = e.path().to_string();
            Error::Config(format!("at `{path}`: {}", e.into_inner()))
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Config(msg));
        self.kernel
            .resolve()
            .map_err(|e| Error::Config(format!("kernel: {e}")))?;
        if self.n_values.is_empty() {
            return fail("n_values must be nonempty".into());
        }
        if let Some(n) = self.n_values.iter().find(|&&n| n < 2) {
            return fail(format!("n_values: N = {n} must be at least 2"));
        }
        if self.runs == 0 {
            return fail("runs must be positive".into());
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return fail(format!(
                "t_end = {} must be finite and nonnegative",
                self.t_end
            ));
        }
        let times = self.snapshot_times();
        if times.windows(2).any(|w| !(w[0] <= w[1]))
            || times.iter().any(|&t| !(t >= 0.0 && t <= self.t_end))
        {
            return fail("snapshot_times must be sorted within [0, t_end]".into());
        }
        if !(1..=3).contains(&self.geometry.dim) {
            return fail(format!(
                "geometry.dim = {} must be 1, 2 or 3",
                self.geometry.dim
            ));
        }
        if !(self.geometry.side > 0.0) {
            return fail("geometry.side must be positive".into());
        }
        if let Some(a) = self.alpha.iter().find(|&&a| !(a > LN_2)) {
            return fail(format!("alpha must exceed log 2 (got {a})"));
        }
        if self.alpha.is_empty() {
            return fail("alpha list must be nonempty".into());
        }
        if !(self.solver.dt > 0.0) {
            return fail("solver.dt must be positive".into());
        }
        let solver = self.solver_grid()?;
        let hist = self.histogram_grid()?;
        if solver.nx() % hist.nx() != 0 || solver.nv() % hist.nv() != 0 {
            return fail(format!(
                "histogram bins {}x{} must divide solver grid {}x{}",
                hist.nx(),
                hist.nv(),
                solver.nx(),
                solver.nv()
            ));
        }
        Ok(())
    }

    pub fn kernel_spec(&self) -> Result<KernelSpec> {
        self.kernel.resolve()
    }

    pub fn snapshot_times(&self) -> Vec<f64> {
        self.snapshot_times
            .clone()
            .unwrap_or_else(|| vec![self.t_end])
    }

    pub fn solver_grid(&self) -> Result<PhaseGrid> {
        PhaseGrid::for_law(
            self.initial_law,
            self.solver.nx,
            self.solver.nv,
            self.geometry.side,
        )
        .map_err(|e| Error::Config(format!("solver: {e}")))
    }

    pub fn histogram_grid(&self) -> Result<PhaseGrid> {
        let solver = PhaseGrid::for_law(
            self.initial_law,
            self.solver.nx,
            self.solver.nv,
            self.geometry.side,
        )
        .map_err(|e| Error::Config(format!("solver: {e}")))?;
        let nv = if self.initial_law.has_two_point_velocities() {
            solver.nv()
        } else {
            self.histogram.nv
        };
        let (v_min, v_max) = solver.v_range();
        PhaseGrid::new(self.histogram.nx, nv, self.geometry.side, v_min, v_max)
            .map_err(|e| Error::Config(format!("histogram: {e}")))
    }
}

pub fn parse_config(path: &Path) -> Result<StudyConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    StudyConfig::from_json(&text)
}
