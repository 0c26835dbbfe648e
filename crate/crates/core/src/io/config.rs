//! Experiment configuration: a flat TOML table, validated as a whole so that
//! every problem is reported at once.

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flow::{Adaptive, FlowConfig, RunOptions, Scheme};
use crate::harness::DiagnosticOptions;
use crate::spectral::basis::{GraphField, SpectralBasis};
use std::sync::Arc;

/// Post-run checks; the exit status of a run reflects the enabled ones.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Check {
    Stationarity,
    EnergyIdentity,
    Uniqueness,
    DiscreteInequality,
    ScaleCompatibility,
}

impl Check {
    pub fn name(self) -> &'static str {
        match self {
            Check::Stationarity => "stationarity",
            Check::EnergyIdentity => "energy-identity",
            Check::Uniqueness => "uniqueness",
            Check::DiscreteInequality => "discrete-inequality",
            Check::ScaleCompatibility => "scale-compatibility",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub name: String,
    pub k: usize,
    pub n: usize,
    pub n_theta: usize,
    /// Hermite modes `M` along the axis.
    pub hermite: usize,
    /// Truncation `L` of the axis.
    pub truncation: f64,
    pub dt: f64,
    /// The run covers `s ∈ [0, steps·dt]`.
    pub steps: usize,
    pub scheme: Scheme,
    pub stabilize: bool,
    /// Error-controlled steps between samples, starting from `dt`.
    pub adaptive: bool,
    /// Initial graph as `(j, m, amplitude)` triples of monic modes
    /// `cos(jθ) y^m + …` (`j < 0` selects `sin(|j|θ)`).
    pub modes: Vec<(i64, usize, f64)>,
    /// Amplitude of a seeded random perturbation on `|j| ≤ 2`, `m ≤ 4`.
    pub noise: f64,
    pub seed: u64,
    /// A diagnostics row every `sample_every` steps of size `dt`.
    pub sample_every: usize,
    /// A snapshot every `snapshot_every` rows (0: final state only).
    pub snapshot_every: usize,
    pub fit_every: usize,
    pub scale_every: usize,
    /// Radius `R` of ball norms and cylinder fits.
    pub radius: f64,
    /// Output directory below the output root; defaults to `name`.
    pub output: Option<String>,
    pub checks: Vec<Check>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            name: "experiment".into(),
            k: 1,
            n: 2,
            n_theta: 64,
            hermite: 64,
            truncation: 12.0,
            dt: 0.01,
            steps: 1000,
            scheme: Scheme::ImexSpectral,
            stabilize: true,
            adaptive: false,
            modes: Vec::new(),
            noise: 0.0,
            seed: 0,
            sample_every: 10,
            snapshot_every: 0,
            fit_every: 1,
            scale_every: 10,
            radius: 10.0,
            output: None,
            checks: Vec::new(),
        }
    }
}

const PRESETS: [(&str, &str); 3] = [
    ("cylinder", include_str!("../../presets/cylinder.toml")),
    ("kernel-quadratic", include_str!("../../presets/kernel-quadratic.toml")),
    ("kernel-tilt", include_str!("../../presets/kernel-tilt.toml")),
];

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(vec![e.message().to_string()]))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads a config file, or a shipped preset when `source` names one.
    pub fn load(source: &str) -> Result<Self> {
        if let Some(text) = Self::preset_text(source) {
            return Self::from_toml(text);
        }
        let path = Path::new(source);
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn preset_names() -> impl Iterator<Item = &'static str> {
        PRESETS.iter().map(|p| p.0)
    }

    pub fn preset_text(name: &str) -> Option<&'static str> {
        PRESETS.iter().find(|p| p.0 == name).map(|p| p.1)
    }

    pub fn preset(name: &str) -> Result<Self> {
        let text = Self::preset_text(name).ok_or_else(|| Error::Input(format!("unknown preset '{name}'")))?;
        Self::from_toml(text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Collects every violated constraint.
    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        if (self.k, self.n) != (1, 2) {
            problems.push(format!("k = {}, n = {}: flows run over S¹ × R only (k = 1, n = 2)", self.k, self.n));
        }
        if self.n_theta < 4 || self.n_theta % 2 != 0 {
            problems.push(format!("n_theta = {} must be even and at least 4", self.n_theta));
        }
        if !(2..=200).contains(&self.hermite) {
            problems.push(format!("hermite = {} outside 2..=200", self.hermite));
        }
        if !(self.truncation > 0.0) {
            problems.push("truncation must be positive".into());
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            problems.push(format!("dt = {} must be positive", self.dt));
        }
        if self.steps == 0 {
            problems.push("steps must be positive".into());
        }
        if self.sample_every == 0 {
            problems.push("sample_every must be positive".into());
        }
        if !(self.radius > 0.0) || self.radius > self.truncation {
            problems.push(format!("radius = {} must lie in (0, truncation]", self.radius));
        }
        if !(self.noise >= 0.0 && self.noise.is_finite()) {
            problems.push("noise must be a non-negative number".into());
        }
        for &(j, m, a) in &self.modes {
            if j.unsigned_abs() as usize >= self.n_theta / 2 || m >= self.hermite {
                problems.push(format!("mode ({j}, {m}) exceeds n_theta/2 = {} or hermite = {}", self.n_theta / 2, self.hermite));
            }
            if !a.is_finite() {
                problems.push(format!("mode ({j}, {m}) has a non-finite amplitude"));
            }
        }
        if problems.is_empty() {
            if let Err(e) = SpectralBasis::new(self.n_theta, self.hermite, self.truncation) {
                problems.push(format!("grid and truncation are inconsistent: {e}"));
            }
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(problems))
        }
    }

    pub fn s_end(&self) -> f64 {
        self.steps as f64 * self.dt
    }

    pub fn basis(&self) -> Result<Arc<SpectralBasis>> {
        SpectralBasis::new(self.n_theta, self.hermite, self.truncation)
    }

    /// Initial graph: the listed modes plus the seeded noise.
    pub fn initial_field(&self, basis: &Arc<SpectralBasis>) -> Result<GraphField> {
        let mut modes = self.modes.clone();
        if self.noise > 0.0 {
            let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
            for j in -2i64..=2 {
                for m in 0..=4usize.min(self.hermite - 1) {
                    modes.push((j, m, self.noise * rng.random_range(-1.0..1.0)));
                }
            }
        }
        GraphField::from_modes(basis, &modes)
    }

    pub fn flow_config(&self) -> FlowConfig {
        FlowConfig { scheme: self.scheme, dt: self.dt, stabilize: self.stabilize, adaptive: self.adaptive.then(Adaptive::default) }
    }

    pub fn run_options(&self) -> RunOptions {
        RunOptions {
            s_end: self.s_end(),
            sample_interval: self.sample_every as f64 * self.dt,
            radius: self.radius,
            checkpoint_every: 0,
            keep_samples: self.snapshot_every > 0,
        }
    }

    pub fn diagnostic_options(&self) -> DiagnosticOptions {
        DiagnosticOptions { fit_every: self.fit_every, scale_every: self.scale_every, ..Default::default() }
    }

    pub fn output_dir(&self) -> String {
        self.output.clone().unwrap_or_else(|| self.name.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_validate() {
        for name in ExperimentConfig::preset_names() {
            let cfg = ExperimentConfig::preset(name).unwrap();
            assert_eq!(cfg.name, name);
            assert_eq!(ExperimentConfig::from_toml(&cfg.to_toml()).unwrap(), cfg);
        }
    }

    #[test]
    fn validation_lists_every_problem() {
        let err = ExperimentConfig::from_toml("dt = -1.0\nsteps = 0\nn_theta = 7\nmodes = [[40, 0, 0.1]]").unwrap_err();
        let Error::Config(list) = err else { panic!("expected a config error") };
        assert_eq!(list.len(), 4, "{list:?}");
        assert!(ExperimentConfig::from_toml("bogus = 1").is_err());
    }

    #[test]
    fn noise_is_seeded() {
        let cfg = ExperimentConfig { noise: 1e-3, seed: 9, ..Default::default() };
        let b = SpectralBasis::new(16, 16, 12.0).unwrap();
        let (u, v) = (cfg.initial_field(&b).unwrap(), cfg.initial_field(&b).unwrap());
        assert_eq!(u.coeffs(), v.coeffs());
        assert!(u.l2_norm() > 0.0);
    }
}
