use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::build::{Diagnostics, PoissonStructure, SecantForms};
use super::matrix::PoissonMatrix;
use crate::curve::gaussian_vector;
use crate::elliptic::{CurveSpec, THETA_CONVENTION};
use crate::error::{Error, Result};
use crate::linalg::{CVector, C64};

/// Probes stored with every cache.
pub const PROBE_COUNT: usize = 20;

/// Relative reproduction tolerance for probes on reload.
pub const PROBE_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Probe {
    pub point: Vec<C64>,
    /// Upper triangle of `Ω(p)`, row-major.
    pub bracket: Vec<C64>,
    pub forms: Vec<C64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PoissonCache {
    pub spec: CurveSpec,
    pub theta_convention: String,
    pub secant_forms: SecantForms,
    pub omega_matrix: PoissonMatrix,
    pub diagnostics: Diagnostics,
    pub probes: Vec<Probe>,
}

fn probe(ps: &PoissonStructure, p: &CVector) -> Probe {
    let m = ps.omega.bracket_eval(p);
    let n = p.len();
    let mut bracket = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in i + 1..n {
            bracket.push(m[(i, j)]);
        }
    }
    Probe {
        point: p.iter().copied().collect(),
        bracket,
        forms: ps.forms.forms().iter().map(|f| f.eval(p.as_slice())).collect(),
    }
}

fn max_rel(a: &[C64], b: &[C64]) -> f64 {
    let scale = a.iter().map(|z| z.norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max) / scale
}

impl PoissonCache {
    pub fn new<R: Rng + ?Sized>(spec: &CurveSpec, ps: &PoissonStructure, rng: &mut R) -> Self {
        let probes = (0..PROBE_COUNT)
            .map(|_| probe(ps, &gaussian_vector(spec.n, rng).normalize()))
            .collect();
        Self {
            spec: spec.clone(),
            theta_convention: THETA_CONVENTION.to_string(),
            secant_forms: ps.forms.clone(),
            omega_matrix: ps.omega.clone(),
            diagnostics: ps.diagnostics.clone(),
            probes,
        }
    }

    pub fn structure(&self) -> PoissonStructure {
        PoissonStructure {
            forms: self.secant_forms.clone(),
            omega: self.omega_matrix.clone(),
            diagnostics: self.diagnostics.clone(),
        }
    }

    /// Worst relative deviation of the stored probes from re-evaluation.
    pub fn probe_deviation(&self) -> f64 {
        let ps = self.structure();
        self.probes
            .iter()
            .map(|pr| {
                let again = probe(&ps, &CVector::from_column_slice(&pr.point));
                max_rel(&pr.bracket, &again.bracket).max(max_rel(&pr.forms, &again.forms))
            })
            .fold(0.0, f64::max)
    }

    /// Convention tag, shape and probe checks.
    pub fn validate(&self) -> Result<()> {
        if self.theta_convention != THETA_CONVENTION {
            return Err(Error::Cache(format!("theta convention mismatch: {}", self.theta_convention)));
        }
        if self.omega_matrix.n() != self.spec.n {
            return Err(Error::Cache("bracket size differs from the curve degree".into()));
        }
        if self.probes.len() != PROBE_COUNT {
            return Err(Error::Cache(format!("expected {PROBE_COUNT} probes, found {}", self.probes.len())));
        }
        let dev = self.probe_deviation();
        if !(dev <= PROBE_TOL) {
            return Err(Error::Cache(format!("probe deviation {dev:.3e} exceeds {PROBE_TOL:.0e}")));
        }
        Ok(())
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(self)?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let cache: Self = serde_json::from_str(&text).map_err(|e| Error::Cache(e.to_string()))?;
        cache.validate()?;
        Ok(cache)
    }
}
