use num_complex::Complex;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::lattice::{Lattice, TorusPoint};
use super::theta::THETA_CONVENTION;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ToleranceConfig {
    /// Point equality on the torus, per real and imaginary part.
    pub lattice_tol: f64,
    /// Relative singular-value threshold for rank decisions.
    pub rank_tol: f64,
    /// Theta series window per residue class.
    pub theta_terms: usize,
    /// Convergence and comparison tolerance for numerically recovered points.
    pub root_tol: f64,
    pub seed: u64,
}

impl Default for ToleranceConfig {
    fn default() -> Self {
        Self {
            lattice_tol: 1e-10,
            rank_tol: 1e-8,
            theta_terms: 40,
            root_tol: 1e-8,
            seed: 20_240_917,
        }
    }
}

impl ToleranceConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [self.lattice_tol, self.rank_tol, self.root_tol]
            .iter()
            .all(|v| *v > 0.0 && v.is_finite());
        if !positive {
            return Err(Error::InvalidInput("tolerances must be positive".into()));
        }
        if self.theta_terms < 10 {
            return Err(Error::InvalidInput(format!(
                "theta_terms must be at least 10, got {}",
                self.theta_terms
            )));
        }
        Ok(())
    }
}

/// An elliptic normal curve of degree `n` in `P^{n-1}`: the torus
/// `C/(Z + Z·tau)` embedded by the complete linear system of a line bundle
/// whose divisors sum to `l_sum`.
#[derive(Clone, Debug, PartialEq)]
pub struct CurveSpec {
    pub tau: Complex<f64>,
    pub n: usize,
    pub l_sum: TorusPoint<f64>,
    pub tolerances: ToleranceConfig,
}

impl CurveSpec {
    pub fn new(tau: Complex<f64>, n: usize, l_sum: Complex<f64>) -> Result<Self> {
        Self::with_tolerances(tau, n, l_sum, ToleranceConfig::default())
    }

    pub fn with_tolerances(
        tau: Complex<f64>,
        n: usize,
        l_sum: Complex<f64>,
        tolerances: ToleranceConfig,
    ) -> Result<Self> {
        let lattice = Lattice::new(tau)?;
        if n < 3 {
            return Err(Error::InvalidCurve(format!("n must be at least 3, got {n}")));
        }
        tolerances.validate()?;
        Ok(Self { tau, n, l_sum: lattice.reduce(l_sum), tolerances })
    }

    pub fn lattice(&self) -> Lattice<f64> {
        Lattice::new(self.tau).expect("validated at construction")
    }

    /// `Ω = {ω : 2ω = l_sum}`.
    pub fn omega_coset(&self) -> [TorusPoint<f64>; 4] {
        self.lattice().halves(&self.l_sum)
    }

    pub fn is_even(&self) -> bool {
        self.n % 2 == 0
    }

    /// `⌊n/2⌋`.
    pub fn half(&self) -> usize {
        self.n / 2
    }

    pub fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.tolerances.seed)
    }

    pub fn rng_stream(&self, stream: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.tolerances.seed);
        rng.set_stream(stream);
        rng
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(SpecFile::from(self)).expect("spec serializes")
    }

    pub fn from_json(value: serde_json::Value) -> Result<Self> {
        let raw: SpecFile = serde_json::from_value(value)?;
        raw.try_into()
    }
}

#[derive(Serialize, Deserialize)]
struct SpecFile {
    tau: [f64; 2],
    n: usize,
    #[serde(default)]
    l_sum: [f64; 2],
    #[serde(default)]
    tolerances: ToleranceConfig,
    #[serde(default = "default_convention")]
    theta_convention: String,
}

fn default_convention() -> String {
    THETA_CONVENTION.to_string()
}

impl From<&CurveSpec> for SpecFile {
    fn from(s: &CurveSpec) -> Self {
        Self {
            tau: [s.tau.re, s.tau.im],
            n: s.n,
            l_sum: s.l_sum.into(),
            tolerances: s.tolerances.clone(),
            theta_convention: default_convention(),
        }
    }
}

impl TryFrom<SpecFile> for CurveSpec {
    type Error = Error;

    fn try_from(raw: SpecFile) -> Result<Self> {
        if raw.theta_convention != THETA_CONVENTION {
            return Err(Error::InvalidInput(format!(
                "unsupported theta convention tag: {}",
                raw.theta_convention
            )));
        }
        CurveSpec::with_tolerances(
            Complex::new(raw.tau[0], raw.tau[1]),
            raw.n,
            Complex::new(raw.l_sum[0], raw.l_sum[1]),
            raw.tolerances,
        )
    }
}

impl Serialize for CurveSpec {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        SpecFile::from(self).serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for CurveSpec {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let raw = SpecFile::deserialize(deserializer)?;
        raw.try_into().map_err(serde::de::Error::custom)
    }
}
