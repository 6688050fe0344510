//! Experiment configuration: JSON files with strict key checking, merged
//! with command-line overrides.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::RunError;

/// Fully resolved configuration for one experiment run.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    /// Polynomial degrees N to evaluate.
    pub orders: Vec<usize>,
    /// Number of propagator-series terms K.
    pub series_terms: usize,
    pub t_max: f64,
    pub steps: usize,
    pub seed: u64,
    pub output_dir: PathBuf,
    #[serde(default)]
    pub params: ExperimentParams,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    LinearTestbed,
    SpinBoson,
    CentralSpin,
    IsingChain,
    Reduce,
}

impl ExperimentKind {
    pub fn name(&self) -> &'static str {
        match self {
            Self::LinearTestbed => "linear-testbed",
            Self::SpinBoson => "spin-boson",
            Self::CentralSpin => "central-spin",
            Self::IsingChain => "ising-chain",
            Self::Reduce => "reduce",
        }
    }
}

/// Experiment-specific parameter records. Exactly one section may be
/// present and it must match the experiment.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentParams {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub linear_testbed: Option<LinearTestbedParams>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spin_boson: Option<SpinBosonSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub central_spin: Option<CentralSpinSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ising_chain: Option<IsingSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reduce: Option<ReduceSection>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinearTestbedParams {
    #[serde(default = "default_testbed_n")]
    pub n: usize,
    #[serde(default = "default_testbed_m")]
    pub m: usize,
}

fn default_testbed_n() -> usize {
    20
}
fn default_testbed_m() -> usize {
    4
}

impl Default for LinearTestbedParams {
    fn default() -> Self {
        Self { n: 20, m: 4 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SpinBosonSection {
    pub qubit_splitting: f64,
    pub cutoff_frequency: f64,
    pub spectral_amplitude: f64,
    /// Ohmicity exponents to sweep (one output file per value).
    pub ohmicities: Vec<f64>,
    pub inverse_temperature: f64,
    pub n_modes: usize,
    pub coarse_grain_time: f64,
}

impl Default for SpinBosonSection {
    fn default() -> Self {
        Self {
            qubit_splitting: 1.8,
            cutoff_frequency: 0.2,
            spectral_amplitude: 0.5,
            ohmicities: vec![0.5, 1.0, 1.5],
            inverse_temperature: 10.0,
            n_modes: 100,
            coarse_grain_time: 32.0 / 0.2,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CentralSpinSection {
    pub n_bath: usize,
    pub system_splitting: f64,
    pub coupling: f64,
    pub bath_coupling: f64,
    pub anisotropy: [f64; 3],
    pub inverse_temperature: f64,
    /// Dissipation strengths to sweep (one output set per value).
    pub dissipations: Vec<f64>,
}

impl Default for CentralSpinSection {
    fn default() -> Self {
        Self {
            n_bath: 3,
            system_splitting: 0.3,
            coupling: 0.1,
            bath_coupling: 1.0,
            anisotropy: [1.2, 1.5, 1.3],
            inverse_temperature: 50.0,
            dissipations: vec![0.0, 0.8],
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IsingSection {
    pub n_spins: usize,
    pub field: f64,
    pub coupling: f64,
}

impl Default for IsingSection {
    fn default() -> Self {
        Self {
            n_spins: 4,
            field: 0.36,
            coupling: 0.3,
        }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReduceSection {
    /// Path to the model-interchange JSON file.
    pub model: Option<PathBuf>,
}

/// Command-line overrides applied on top of the config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub orders: Vec<usize>,
    pub series_terms: Option<usize>,
    pub t_max: Option<f64>,
    pub steps: Option<usize>,
    pub seed: Option<u64>,
    pub output_dir: Option<PathBuf>,
    pub model: Option<PathBuf>,
}

impl ExperimentConfig {
    /// Per-experiment defaults (paper parameter values).
    pub fn defaults(kind: ExperimentKind) -> Self {
        let (orders, t_max, steps) = match kind {
            ExperimentKind::LinearTestbed => (vec![1, 2, 5, 10, 20], 2.0, 800),
            ExperimentKind::SpinBoson => (vec![2], 1.5, 1500),
            ExperimentKind::CentralSpin => (vec![1, 2, 3, 4, 10, 20], 6.0, 1200),
            ExperimentKind::IsingChain => (vec![2, 4, 10, 20], 12.0, 2400),
            ExperimentKind::Reduce => (vec![2], 1.0, 100),
        };
        Self {
            experiment: kind,
            orders,
            series_terms: 100,
            t_max,
            steps,
            seed: 7,
            output_dir: PathBuf::from(format!("out/{}", kind.name())),
            params: ExperimentParams::default(),
        }
    }

    pub fn load(
        kind: ExperimentKind,
        path: Option<&Path>,
        ov: &Overrides,
    ) -> Result<Self, RunError> {
        let mut cfg = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| {
                    RunError::Config(format!("cannot read config {}: {e}", p.display()))
                })?;
                let parsed: ExperimentConfig = serde_json::from_str(&text)
                    .map_err(|e| RunError::Config(format!("config {}: {e}", p.display())))?;
                if parsed.experiment != kind {
                    return Err(RunError::Config(format!(
                        "config is for experiment '{}', invoked as '{}'",
                        parsed.experiment.name(),
                        kind.name()
                    )));
                }
                parsed
            }
            None => Self::defaults(kind),
        };
        if !ov.orders.is_empty() {
            cfg.orders = ov.orders.clone();
        }
        if let Some(k) = ov.series_terms {
            cfg.series_terms = k;
        }
        if let Some(t) = ov.t_max {
            cfg.t_max = t;
        }
        if let Some(s) = ov.steps {
            cfg.steps = s;
        }
        if let Some(s) = ov.seed {
            cfg.seed = s;
        }
        if let Some(o) = &ov.output_dir {
            cfg.output_dir = o.clone();
        }
        if let Some(m) = &ov.model {
            cfg.params.reduce.get_or_insert_with(Default::default).model = Some(m.clone());
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), RunError> {
        if self.orders.is_empty() {
            return Err(RunError::Config("orders: must not be empty".into()));
        }
        if self.t_max <= 0.0 {
            return Err(RunError::Config(format!(
                "t_max: must be positive, got {}",
                self.t_max
            )));
        }
        if self.steps == 0 {
            return Err(RunError::Config("steps: must be at least 1".into()));
        }
        if self.series_terms == 0 {
            return Err(RunError::Config("series_terms: must be at least 1".into()));
        }
        let sections = [
            self.params.linear_testbed.is_some(),
            self.params.spin_boson.is_some(),
            self.params.central_spin.is_some(),
            self.params.ising_chain.is_some(),
            self.params.reduce.is_some(),
        ];
        let expected = match self.experiment {
            ExperimentKind::LinearTestbed => 0,
            ExperimentKind::SpinBoson => 1,
            ExperimentKind::CentralSpin => 2,
            ExperimentKind::IsingChain => 3,
            ExperimentKind::Reduce => 4,
        };
        for (idx, present) in sections.iter().enumerate() {
            if *present && idx != expected {
                return Err(RunError::Config(format!(
                    "params: section does not match experiment '{}'",
                    self.experiment.name()
                )));
            }
        }
        Ok(())
    }
}
