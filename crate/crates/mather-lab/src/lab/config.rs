//! TOML-backed experiment configuration.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot parse config: {0}")]
    Parse(String),
    #[error("invalid config: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ExperimentKind {
    #[serde(rename = "upper-bound")]
    UpperBound,
    #[serde(rename = "lower-bound-2d")]
    LowerBound2d,
    #[serde(rename = "highdim-lower")]
    HighdimLower,
    #[serde(rename = "birkhoff")]
    Birkhoff,
    #[serde(rename = "linear-response")]
    LinearResponse,
}

impl ExperimentKind {
    pub fn parse(name: &str) -> Option<Self> {
        match name {
            "upper-bound" => Some(Self::UpperBound),
            "lower-bound-2d" => Some(Self::LowerBound2d),
            "highdim-lower" => Some(Self::HighdimLower),
            "birkhoff" => Some(Self::Birkhoff),
            "linear-response" => Some(Self::LinearResponse),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::UpperBound => "upper-bound",
            Self::LowerBound2d => "lower-bound-2d",
            Self::HighdimLower => "highdim-lower",
            Self::Birkhoff => "birkhoff",
            Self::LinearResponse => "linear-response",
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FrequencyConfig {
    pub components: Vec<f64>,
    #[serde(default = "default_check_band")]
    pub check_band: usize,
    #[serde(default)]
    pub sigma: Option<f64>,
    #[serde(default)]
    pub tau: Option<f64>,
}

fn default_check_band() -> usize {
    64
}

impl Default for FrequencyConfig {
    fn default() -> Self {
        // ω = (1, φ−1).
        FrequencyConfig {
            components: vec![1.0, 0.6180339887498949],
            check_band: default_check_band(),
            sigma: None,
            tau: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PerturbationConfig {
    /// Strictly decreasing positive amplitudes for the upper-bound sweep.
    #[serde(default = "default_delta_grid")]
    pub delta_grid: Vec<f64>,
    /// Convergent index range (standard continued-fraction indices).
    #[serde(default = "default_convergent_min")]
    pub convergent_min: usize,
    #[serde(default = "default_convergent_max")]
    pub convergent_max: usize,
    /// Approximation-quality parameter r in the lower-bound predictions.
    #[serde(default = "default_r")]
    pub r: f64,
    /// Attractor strength for empirical lower-bound rows.
    #[serde(default = "default_attractor_delta")]
    pub attractor_delta: f64,
    /// Include simulated attractor rows in the 2-D lower-bound report.
    #[serde(default)]
    pub empirical_rows: bool,
}

fn default_delta_grid() -> Vec<f64> {
    vec![0.02, 0.01, 0.005, 0.0025]
}

fn default_convergent_min() -> usize {
    3
}

fn default_convergent_max() -> usize {
    8
}

fn default_r() -> f64 {
    1.0
}

fn default_attractor_delta() -> f64 {
    0.05
}

impl Default for PerturbationConfig {
    fn default() -> Self {
        PerturbationConfig {
            delta_grid: default_delta_grid(),
            convergent_min: default_convergent_min(),
            convergent_max: default_convergent_max(),
            r: default_r(),
            attractor_delta: default_attractor_delta(),
            empirical_rows: false,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TransportConfig {
    /// Lebesgue grid resolution per axis.
    #[serde(default = "default_grid")]
    pub grid: usize,
    #[serde(default = "default_reg")]
    pub reg: f64,
    #[serde(default = "default_max_iter")]
    pub max_iter: u64,
    #[serde(default = "default_samples_per_line")]
    pub samples_per_line: usize,
    /// Empirical cloud size for entropic solves.
    #[serde(default = "default_cloud_size")]
    pub cloud_size: usize,
    /// Support cap per side for exact cross-checks.
    #[serde(default = "default_exact_subsample")]
    pub exact_subsample: usize,
}

fn default_grid() -> usize {
    32
}

fn default_reg() -> f64 {
    5e-3
}

fn default_max_iter() -> u64 {
    20_000
}

fn default_samples_per_line() -> usize {
    64
}

fn default_cloud_size() -> usize {
    600
}

fn default_exact_subsample() -> usize {
    192
}

impl Default for TransportConfig {
    fn default() -> Self {
        TransportConfig {
            grid: default_grid(),
            reg: default_reg(),
            max_iter: default_max_iter(),
            samples_per_line: default_samples_per_line(),
            cloud_size: default_cloud_size(),
            exact_subsample: default_exact_subsample(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SimulationConfig {
    #[serde(default = "default_t_final")]
    pub t_final: f64,
    #[serde(default = "default_dt")]
    pub dt: f64,
    #[serde(default = "default_burn_in")]
    pub burn_in: f64,
    #[serde(default = "default_starts")]
    pub starts: usize,
}

fn default_t_final() -> f64 {
    2000.0
}

fn default_dt() -> f64 {
    1e-2
}

fn default_burn_in() -> f64 {
    500.0
}

fn default_starts() -> usize {
    20
}

impl Default for SimulationConfig {
    fn default() -> Self {
        SimulationConfig {
            t_final: default_t_final(),
            dt: default_dt(),
            burn_in: default_burn_in(),
            starts: default_starts(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BirkhoffConfig {
    #[serde(default = "default_horizon_min")]
    pub horizon_min: f64,
    #[serde(default = "default_horizon_max")]
    pub horizon_max: f64,
    #[serde(default = "default_horizon_count")]
    pub horizon_count: usize,
}

fn default_horizon_min() -> f64 {
    10.0
}

fn default_horizon_max() -> f64 {
    1e4
}

fn default_horizon_count() -> usize {
    12
}

impl Default for BirkhoffConfig {
    fn default() -> Self {
        BirkhoffConfig {
            horizon_min: default_horizon_min(),
            horizon_max: default_horizon_max(),
            horizon_count: default_horizon_count(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ResponseConfig {
    #[serde(default = "default_eps_ladder")]
    pub eps_ladder: Vec<f64>,
}

fn default_eps_ladder() -> Vec<f64> {
    vec![1e-2, 5e-3, 2.5e-3]
}

impl Default for ResponseConfig {
    fn default() -> Self {
        ResponseConfig { eps_ladder: default_eps_ladder() }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default)]
    pub out_dir: Option<String>,
    #[serde(default)]
    pub frequency: FrequencyConfig,
    #[serde(default)]
    pub perturbation: PerturbationConfig,
    #[serde(default)]
    pub transport: TransportConfig,
    #[serde(default)]
    pub simulation: SimulationConfig,
    #[serde(default)]
    pub birkhoff: BirkhoffConfig,
    #[serde(default)]
    pub response: ResponseConfig,
}

fn default_seed() -> u64 {
    42
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn defaults_for(kind: ExperimentKind) -> Self {
        let frequency = match kind {
            // The schedule construction wants ω = (ω₁,…,ω_{n−1}, 1).
            ExperimentKind::HighdimLower => FrequencyConfig {
                components: vec![2f64.sqrt(), 3f64.sqrt(), 1.0],
                check_band: 24,
                sigma: None,
                tau: None,
            },
            _ => FrequencyConfig::default(),
        };
        ExperimentConfig {
            experiment: kind,
            seed: default_seed(),
            out_dir: None,
            frequency,
            perturbation: PerturbationConfig::default(),
            transport: TransportConfig::default(),
            simulation: SimulationConfig::default(),
            birkhoff: BirkhoffConfig::default(),
            response: ResponseConfig::default(),
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let inv = |m: String| Err(ConfigError::Invalid(m));
        if self.frequency.components.is_empty() {
            return inv("frequency.components must be nonempty".into());
        }
        let dg = &self.perturbation.delta_grid;
        if dg.iter().any(|&d| !(d > 0.0)) || dg.windows(2).any(|w| w[0] <= w[1]) {
            return inv("perturbation.delta_grid must be positive and strictly decreasing".into());
        }
        if self.perturbation.convergent_min > self.perturbation.convergent_max {
            return inv("perturbation convergent range is empty".into());
        }
        if self.transport.grid < 2 || self.transport.grid > 512 {
            return inv(format!("transport.grid {} out of range", self.transport.grid));
        }
        if !(self.transport.reg > 0.0) {
            return inv("transport.reg must be positive".into());
        }
        if self.transport.cloud_size == 0 || self.transport.cloud_size > 20_000 {
            return inv("transport.cloud_size out of range".into());
        }
        if !(self.simulation.dt > 0.0 && self.simulation.dt <= 1e-2) {
            return inv("simulation.dt must be in (0, 1e-2]".into());
        }
        if !(self.simulation.t_final > self.simulation.burn_in) {
            return inv("simulation.t_final must exceed burn_in".into());
        }
        if self.birkhoff.horizon_count < 5 {
            return inv("birkhoff.horizon_count must be at least 5".into());
        }
        if !(self.birkhoff.horizon_max > self.birkhoff.horizon_min && self.birkhoff.horizon_min > 0.0) {
            return inv("birkhoff horizons must be positive and increasing".into());
        }
        if self.response.eps_ladder.is_empty()
            || self.response.eps_ladder.iter().any(|&e| !(e > 0.0))
            || self.response.eps_ladder.windows(2).any(|w| w[0] <= w[1])
        {
            return inv("response.eps_ladder must be positive and strictly decreasing".into());
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_toml_round_trip() {
        let cfg = ExperimentConfig::from_toml("experiment = \"birkhoff\"").unwrap();
        assert_eq!(cfg.experiment, ExperimentKind::Birkhoff);
        assert_eq!(cfg.seed, 42);
        assert_eq!(cfg.transport.grid, 32);
    }

    #[test]
    fn full_toml_parses() {
        let text = r#"
experiment = "lower-bound-2d"
seed = 7

[frequency]
components = [1.0, 0.6180339887498949]

[perturbation]
convergent_min = 3
convergent_max = 8

[transport]
grid = 64
reg = 1e-3
"#;
        let cfg = ExperimentConfig::from_toml(text).unwrap();
        assert_eq!(cfg.seed, 7);
        assert_eq!(cfg.transport.grid, 64);
        assert_eq!(cfg.perturbation.convergent_max, 8);
    }

    #[test]
    fn bad_delta_grid_is_rejected() {
        let text = r#"
experiment = "upper-bound"
[perturbation]
delta_grid = [0.01, 0.02]
"#;
        assert!(matches!(ExperimentConfig::from_toml(text), Err(ConfigError::Invalid(_))));
    }
}
