//! JSON snapshots of a flow state: the grid, the time and the spectral
//! coefficients.

use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flow::FlowState;
use crate::spectral::basis::{GraphField, SpectralBasis};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub k: usize,
    pub n: usize,
    #[serde(rename = "N_theta")]
    pub n_theta: usize,
    #[serde(rename = "M")]
    pub hermite: usize,
    #[serde(rename = "L")]
    pub truncation: f64,
    pub s: f64,
    pub step: usize,
    /// Shortest decimal forms that round-trip exactly.
    pub coefficients: Vec<f64>,
}

impl Snapshot {
    pub fn from_state(state: &FlowState) -> Self {
        let b = state.u.basis();
        Self { k: 1, n: 2, n_theta: b.n_theta(), hermite: b.hermite(), truncation: b.truncation(), s: state.s, step: state.steps, coefficients: state.u.coeffs().to_vec() }
    }

    pub fn basis(&self) -> Result<Arc<SpectralBasis>> {
        if (self.k, self.n) != (1, 2) {
            return Err(Error::Unsupported(format!("snapshot for k = {}, n = {}", self.k, self.n)));
        }
        SpectralBasis::new(self.n_theta, self.hermite, self.truncation)
    }

    pub fn to_state(&self) -> Result<FlowState> {
        let u = GraphField::from_coeffs(&self.basis()?, self.coefficients.clone())?;
        Ok(FlowState { s: self.s, u, steps: self.step })
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self)?;
        std::fs::write(path, text + "\n").map_err(|e| Error::Io(format!("{}: {e}", path.display())))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        let snap: Self = serde_json::from_str(&text)?;
        Ok(snap)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_exact() {
        let b = SpectralBasis::new(8, 6, 12.0).unwrap();
        let u = GraphField::from_modes(&b, &[(0, 2, 0.1 / 3.0), (1, 1, -1e-17)]).unwrap();
        let snap = Snapshot::from_state(&FlowState { s: 2.0 / 3.0, u, steps: 7 });
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("snap.json");
        snap.write(&path).unwrap();
        let back = Snapshot::read(&path).unwrap();
        assert_eq!(back, snap);
        assert_eq!(back.to_state().unwrap().u.coeffs(), snap.coefficients.as_slice());
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.contains("\"N_theta\"") && text.contains("\"M\"") && text.contains("\"L\""));
    }
}
