//! Point-to-leaf classification.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::bundles::{BundleDescriptor, LeafLabel};
use crate::curve::{gaussian_vector, Curve};
use crate::error::{Error, Result};
use crate::linalg::{normalized, CVector, RankDecision};
use crate::poisson::PoissonMatrix;
use crate::secant::{verdict, LevelCandidate, SecantCount, SecantLevel, Verdict, REJECTION_BUDGET};
use crate::EPoint;

/// A point near a stratum boundary where the gap rule could not decide.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AmbiguousClassification {
    pub reason: String,
    pub candidates: Vec<LevelCandidate>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Classification {
    Leaf(LeafLabel),
    Ambiguous(AmbiguousClassification),
}

impl Classification {
    pub fn label(&self) -> Option<&LeafLabel> {
        match self {
            Self::Leaf(l) => Some(l),
            Self::Ambiguous(_) => None,
        }
    }

    pub fn bundle(&self) -> Option<&BundleDescriptor> {
        self.label().map(|l| &l.bundle)
    }

    fn ambiguous(reason: impl Into<String>, candidates: Vec<LevelCandidate>) -> Self {
        Self::Ambiguous(AmbiguousClassification { reason: reason.into(), candidates })
    }
}

impl Curve {
    pub fn classify(&self, p: &CVector) -> Result<Classification> {
        if p.len() != self.n() || p.norm() == 0.0 || p.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidInput(format!("need a nonzero finite point with {} coordinates", self.n())));
        }
        let p = normalized(p);
        let cand = match self.minimal_secant_level(&p) {
            SecantLevel::TopStratum => {
                return Ok(Classification::Leaf(LeafLabel {
                    bundle: BundleDescriptor::IndecomposableOdd,
                    witness: None,
                    secant_count: None,
                }))
            }
            SecantLevel::Ambiguous(c) => return Ok(Classification::ambiguous("secant level undecided", c)),
            SecantLevel::Level(c) => c,
        };
        let r = self.n() / 2;
        if self.spec().is_even() && cand.d == r {
            return self.classify_middle(&p, cand);
        }
        let witness = self.find_secant_divisor(&p, cand.d, &cand.x)?;
        Ok(Classification::Leaf(LeafLabel {
            bundle: BundleDescriptor::DecomposableSum { d: cand.d, x: cand.x },
            witness: Some(witness),
            secant_count: None,
        }))
    }

    /// `p ∈ Sec_r - Sec_{r-1}` for `n = 2r`: split off the four `ω` hypersurfaces,
    /// then count `r`-secants.
    fn classify_middle(&self, p: &CVector, cand: LevelCandidate) -> Result<Classification> {
        let r = self.n() / 2;
        let tol = self.tol().rank_tol;
        let mut on = Vec::new();
        for omega in self.spec().omega_coset() {
            let ind = self.partial_secant_indicator(p, r, &omega);
            match verdict(ind, tol) {
                Verdict::Zero => on.push(omega),
                Verdict::Nonzero => {}
                Verdict::Ambiguous => {
                    return Ok(Classification::ambiguous(
                        "membership in an ω hypersurface undecided",
                        vec![cand, LevelCandidate { d: r, x: omega, indicator: ind }],
                    ))
                }
            }
        }
        let omega = match on.as_slice() {
            [] => {
                let witness = self.find_secant_divisor(p, r, &cand.x)?;
                return Ok(Classification::Leaf(LeafLabel {
                    bundle: BundleDescriptor::DecomposableSum { d: r, x: cand.x },
                    witness: Some(witness),
                    secant_count: None,
                }));
            }
            [w] => *w,
            _ => return Ok(Classification::ambiguous("on several ω hypersurfaces", vec![cand])),
        };
        let count = match self.r_secant_kernel(p, &omega)? {
            RankDecision::Exact(1) => SecantCount::Unique,
            RankDecision::Exact(2) => SecantCount::Pencil,
            other => {
                return Ok(Classification::ambiguous(format!("r-secant kernel {other:?}"), vec![cand]));
            }
        };
        let witness = self.find_secant_divisor(p, r, &omega)?;
        let bundle = match count {
            SecantCount::Unique => BundleDescriptor::IndecomposableOmega { omega },
            SecantCount::Pencil => BundleDescriptor::DecomposableSum { d: r, x: omega },
        };
        Ok(Classification::Leaf(LeafLabel { bundle, witness: Some(witness), secant_count: Some(count) }))
    }

    /// A random point of the leaf of `b`.
    pub fn sample_leaf<R: Rng + ?Sized>(&self, b: &BundleDescriptor, rng: &mut R) -> Result<CVector> {
        let spec = self.spec();
        if !b.leaf_nonempty(spec) {
            return Err(Error::InvalidInput(format!("empty leaf: {b:?}")));
        }
        let r = self.n() / 2;
        match b {
            _ if b.is_split_omega(spec) => {
                let BundleDescriptor::DecomposableSum { x, .. } = b else { unreachable!() };
                self.sample_pencil_point(x, rng)
            }
            BundleDescriptor::DecomposableSum { d, x } => {
                for _ in 0..REJECTION_BUDGET {
                    let p = self.sample_partial_secant(*d, x, true, rng)?;
                    // At the middle level stay off the ω hypersurfaces.
                    if 2 * d != self.n() || self.off_omega_hypersurfaces(&p) {
                        return Ok(p);
                    }
                }
                Err(Error::RejectionBudget(REJECTION_BUDGET))
            }
            BundleDescriptor::IndecomposableOdd => {
                for _ in 0..REJECTION_BUDGET {
                    let p = self.random_projective_point(rng);
                    if self.clear_of_level(&p, r) {
                        return Ok(p);
                    }
                }
                Err(Error::RejectionBudget(REJECTION_BUDGET))
            }
            BundleDescriptor::IndecomposableOmega { omega } => {
                for _ in 0..REJECTION_BUDGET {
                    let p = self.sample_partial_secant(r, omega, true, rng)?;
                    if self.r_secant_kernel(&p, omega)? == RankDecision::Exact(1) {
                        return Ok(p);
                    }
                }
                Err(Error::RejectionBudget(REJECTION_BUDGET))
            }
        }
    }

    fn off_omega_hypersurfaces(&self, p: &CVector) -> bool {
        let r = self.n() / 2;
        let tol = self.tol().rank_tol;
        self.spec()
            .omega_coset()
            .iter()
            .all(|w| verdict(self.partial_secant_indicator(p, r, w), tol) == Verdict::Nonzero)
    }

    /// The point common to the spans of the zero divisors of two random
    /// sections of `O(D)`, `D ∈ E^[r]_ω`.
    fn sample_pencil_point<R: Rng + ?Sized>(&self, omega: &EPoint, rng: &mut R) -> Result<CVector> {
        let r = self.n() / 2;
        let basis = self.basis_of_sections(r, omega);
        let lat = self.lattice();
        let mut last = None;
        for _ in 0..REJECTION_BUDGET {
            let s1: Vec<_> = gaussian_vector(r, rng).iter().copied().collect();
            let s2: Vec<_> = gaussian_vector(r, rng).iter().copied().collect();
            let (d1, d2) = match (self.section_zeros(&basis, &s1), self.section_zeros(&basis, &s2)) {
                (Ok(a), Ok(b)) => (a, b),
                (Err(e), _) | (_, Err(e)) => {
                    last = Some(e);
                    continue;
                }
            };
            let separated = d1.points().all(|y| d2.points().all(|z| lat.distance(&y, &z) > 0.05));
            if !separated {
                continue;
            }
            match self.span_intersection_point(&d1, &d2) {
                Ok(p) => return Ok(p),
                Err(e) => last = Some(e),
            }
        }
        Err(last.unwrap_or(Error::RejectionBudget(REJECTION_BUDGET)))
    }
}


/// Bracket rank against the leaf dimension of the classified bundle.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConsistencyRecord {
    pub classification: Classification,
    pub poisson_rank: RankDecision,
    /// `n - dim End(ℰ)`, absent for ambiguous points.
    pub leaf_dim: Option<usize>,
    pub agree: bool,
}

impl Curve {
    pub fn consistency_check(&self, omega: &PoissonMatrix, p: &CVector) -> Result<ConsistencyRecord> {
        let classification = self.classify(p)?;
        let poisson_rank = omega.poisson_rank(&normalized(p), self.tol().rank_tol);
        let leaf_dim = classification.bundle().map(|b| self.n() - b.end_dim(self.spec()));
        let agree = matches!((poisson_rank, leaf_dim), (RankDecision::Exact(k), Some(d)) if k == d);
        Ok(ConsistencyRecord { classification, poisson_rank, leaf_dim, agree })
    }
}
