//! Property battery over one curve, with machine-readable records.

use std::time::Instant;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bundles::{enumerate_leaf_families, BundleDescriptor, LeafFamily};
use crate::classify::Classification;
use crate::curve::Curve;
use crate::elliptic::{random_divisor_with_sum, random_point, CurveSpec};
use crate::error::Result;
use crate::linalg::{normalized, CVector, RankDecision};
use crate::poisson::{leaf_flow, singular_quadrics, PoissonStructure, SecantForms, NULL_GAP};
use crate::secant::SecantCount;
use crate::{Divisor, EPoint};

/// Budget for building the bracket of one curve.
pub const BUILD_SECONDS: f64 = 60.0;
pub const JACOBI_TOL: f64 = 1e-6;
pub const JACOBI_CONTROL_MIN: f64 = 1e-4;
pub const CASIMIR_TOL: f64 = 1e-8;
pub const VANISHING_TOL: f64 = 1e-8;
pub const SUBSPACE_TOL: f64 = 1e-7;
pub const PENCIL_VALUE_TOL: f64 = 1e-6;
pub const RANK_AGREEMENT: f64 = 0.98;
pub const AMBIGUOUS_SHARE: f64 = 0.02;
pub const FLOW_DT: f64 = 0.01;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Level {
    Quick,
    Full,
}

impl Level {
    /// Sample count at this level for a full-level count of `full`.
    pub fn count(self, full: usize) -> usize {
        match self {
            Self::Full => full,
            Self::Quick => full.div_ceil(5).max(2),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckStatus {
    Pass,
    Fail,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub name: String,
    pub status: CheckStatus,
    pub residual: f64,
    pub tolerance: f64,
    pub samples: usize,
    pub ambiguous: usize,
    pub seconds: f64,
    pub detail: String,
}

impl CheckRecord {
    pub fn passed(&self) -> bool {
        self.status == CheckStatus::Pass
    }

    fn failed(name: &str, err: impl std::fmt::Display, start: Instant) -> Self {
        Self {
            name: name.into(),
            status: CheckStatus::Fail,
            residual: f64::INFINITY,
            tolerance: 0.0,
            samples: 0,
            ambiguous: 0,
            seconds: start.elapsed().as_secs_f64(),
            detail: format!("error: {err}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub spec: CurveSpec,
    pub level: Level,
    pub checks: Vec<CheckRecord>,
    pub ambiguous: usize,
    pub passed: bool,
}

impl VerificationReport {
    pub fn new(spec: &CurveSpec, level: Level, checks: Vec<CheckRecord>) -> Self {
        let ambiguous = checks.iter().map(|c| c.ambiguous).sum();
        let passed = checks.iter().all(CheckRecord::passed);
        Self { spec: spec.clone(), level, checks, ambiguous, passed }
    }
}

fn record(
    name: &str,
    pass: bool,
    residual: f64,
    tolerance: f64,
    samples: usize,
    ambiguous: usize,
    start: Instant,
    detail: String,
) -> CheckRecord {
    CheckRecord {
        name: name.into(),
        status: if pass { CheckStatus::Pass } else { CheckStatus::Fail },
        residual,
        tolerance,
        samples,
        ambiguous,
        seconds: start.elapsed().as_secs_f64(),
        detail,
    }
}

fn finish(name: &str, start: Instant, r: Result<CheckRecord>) -> CheckRecord {
    r.unwrap_or_else(|e| CheckRecord::failed(name, e, start))
}

/// Independent stream per sample index, so parallel batches stay deterministic.
fn stream(curve: &Curve, check: u64, i: usize) -> ChaCha8Rng {
    curve.spec().rng_stream((check << 32) + i as u64)
}

/// An admissible parameter for `family`.
fn family_parameter<R: Rng + ?Sized>(curve: &Curve, family: &LeafFamily, rng: &mut R) -> EPoint {
    let spec = curve.spec();
    let lat = curve.lattice();
    loop {
        let x = random_point(lat, rng);
        let clear = spec.omega_coset().iter().all(|w| lat.distance(&x, w) > 0.05);
        if family.admits(spec, &x) && clear {
            return x;
        }
    }
}

pub fn same_bundle(curve: &Curve, a: &BundleDescriptor, b: &BundleDescriptor) -> bool {
    a.same_leaf(b, curve.spec(), curve.sum_tol())
}

/// Criterion: the syzygy null space is one-dimensional with a wide gap, within the time budget.
pub fn check_syzygy(ps: &PoissonStructure) -> CheckRecord {
    let start = Instant::now();
    let gap = ps.diagnostics.syzygy.gap;
    let secs = ps.diagnostics.seconds;
    let pass = gap >= NULL_GAP && secs <= BUILD_SECONDS;
    record(
        "syzygy_uniqueness",
        pass,
        1.0 / gap,
        1.0 / NULL_GAP,
        1,
        0,
        start,
        format!("null dimension 1, gap {gap:.3e}, build {secs:.2}s (budget {BUILD_SECONDS}s)"),
    )
}

/// Criterion: Jacobi identity at random points, with a perturbed control.
pub fn check_jacobi(curve: &Curve, ps: &PoissonStructure, level: Level) -> CheckRecord {
    let start = Instant::now();
    let count = level.count(100);
    let mut rng = stream(curve, 2, 0);
    let control = ps.omega.perturbed(1e-2, &mut rng);
    let (worst, weakest) = (0..count)
        .into_par_iter()
        .map(|i| {
            let p = curve.random_projective_point(&mut stream(curve, 2, i + 1));
            (ps.omega.jacobi_residual(&p), control.jacobi_residual(&p))
        })
        .reduce(|| (0.0, f64::INFINITY), |a, b| (a.0.max(b.0), a.1.min(b.1)));
    record(
        "jacobi",
        worst < JACOBI_TOL && weakest > JACOBI_CONTROL_MIN,
        worst,
        JACOBI_TOL,
        count,
        0,
        start,
        format!("max residual {worst:.3e}; perturbed control min {weakest:.3e} (> {JACOBI_CONTROL_MIN:.0e})"),
    )
}

/// Defining syzygy relation at random points.
pub fn check_casimir(curve: &Curve, ps: &PoissonStructure, level: Level) -> CheckRecord {
    let start = Instant::now();
    let count = level.count(100);
    let forms = ps.forms.forms();
    let worst = (0..count)
        .into_par_iter()
        .map(|i| ps.omega.casimir_residual(&forms, &curve.random_projective_point(&mut stream(curve, 11, i))))
        .reduce(|| 0.0, f64::max);
    record("casimir", worst < CASIMIR_TOL, worst, CASIMIR_TOL, count, 0, start, format!("max residual {worst:.3e}"))
}

enum Outcome {
    Agree,
    Ambiguous,
    Mismatch(String),
}

/// Criterion: bracket rank equals `n - dim End` of the classified bundle.
pub fn check_rank_identity(curve: &Curve, ps: &PoissonStructure, level: Level) -> CheckRecord {
    let start = Instant::now();
    let families = enumerate_leaf_families(curve.spec());
    let count = level.count(200).max(families.len());
    let outcomes: Vec<Result<Outcome>> = (0..count)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream(curve, 3, i);
            let family = &families[i % families.len()];
            let x = family_parameter(curve, family, &mut rng);
            let p = curve.sample_leaf(&family.descriptor(curve.spec(), &x), &mut rng)?;
            let rec = curve.consistency_check(&ps.omega, &p)?;
            Ok(match (&rec.classification, rec.poisson_rank) {
                (Classification::Ambiguous(_), _) | (_, RankDecision::Ambiguous { .. }) => Outcome::Ambiguous,
                _ if rec.agree => Outcome::Agree,
                _ => Outcome::Mismatch(format!(
                    "{}: rank {:?} vs leaf dimension {:?}",
                    family.name(),
                    rec.poisson_rank,
                    rec.leaf_dim
                )),
            })
        })
        .collect();
    tally("rank_identity", outcomes, RANK_AGREEMENT, start)
}

fn tally(name: &str, outcomes: Vec<Result<Outcome>>, agreement: f64, start: Instant) -> CheckRecord {
    let total = outcomes.len();
    let (mut agree, mut ambiguous) = (0, 0);
    let mut problems = Vec::new();
    for o in outcomes {
        match o {
            Ok(Outcome::Agree) => agree += 1,
            Ok(Outcome::Ambiguous) => ambiguous += 1,
            Ok(Outcome::Mismatch(m)) => problems.push(m),
            Err(e) => problems.push(format!("error: {e}")),
        }
    }
    let share = agree as f64 / total.max(1) as f64;
    let pass = problems.is_empty() && share >= agreement;
    problems.truncate(5);
    record(
        name,
        pass,
        1.0 - share,
        1.0 - agreement,
        total,
        ambiguous,
        start,
        format!("{agree}/{total} agree, {ambiguous} ambiguous; {}", problems.join("; ")),
    )
}

/// Criterion: finite-difference dimensions of `Sec_{d,x}` and `Sec_d`.
pub fn check_dimension_table(curve: &Curve, level: Level) -> CheckRecord {
    let start = Instant::now();
    let n = curve.n();
    let count = level.count(20);
    let mut jobs = Vec::new();
    for d in 1..=n / 2 {
        jobs.push((d, true, 2 * d - 2));
        if 2 * d < n {
            jobs.push((d, false, (2 * d - 1).min(n - 1)));
        }
    }
    let misses: Vec<String> = jobs
        .par_iter()
        .enumerate()
        .flat_map_iter(|(j, (d, fixed, want))| {
            (0..count).filter_map(move |i| {
                let mut rng = stream(curve, 4, j * 1000 + i);
                let x = random_point(curve.lattice(), &mut rng);
                let got = curve.secant_dimension_probe(*d, fixed.then_some(&x), &mut rng);
                (got != RankDecision::Exact(*want)).then(|| format!("d={d} fixed={fixed}: {got:?} != {want}"))
            })
        })
        .collect();
    let samples = jobs.len() * count;
    record(
        "dimension_table",
        misses.is_empty(),
        misses.len() as f64,
        0.0,
        samples,
        0,
        start,
        if misses.is_empty() { "all exact".into() } else { misses[..misses.len().min(5)].join("; ") },
    )
}

/// Criterion (n = 4): four singular quadrics whose vertices are split-ω
/// points of rank 0, and whose nearby cone points are `ℰ_ω` points.
pub fn check_quadric_pencil(curve: &Curve, ps: &PoissonStructure, level: Level) -> CheckRecord {
    let start = Instant::now();
    let name = "quadric_pencil";
    finish(name, start, (|| {
        let SecantForms::Even { pencil } = &ps.forms else {
            return Ok(record(name, false, f64::INFINITY, 0.0, 0, 0, start, "needs the even pencil".into()));
        };
        if curve.n() != 4 {
            return Ok(record(name, false, f64::INFINITY, 0.0, 0, 0, start, "defined for n = 4".into()));
        }
        let tol = curve.tol().rank_tol;
        let members = singular_quadrics(&pencil.f1, &pencil.f2, tol);
        let mut problems = Vec::new();
        let mut ambiguous = 0;
        let singular = members.iter().filter(|m| m.rank == RankDecision::Exact(3)).count();
        if singular != 4 || members.len() != 4 {
            problems.push(format!("{} singular members, ranks {:?}", members.len(), members.iter().map(|m| m.rank).collect::<Vec<_>>()));
        }
        let perturbations = level.count(5);
        let mut samples = 0;
        for (k, m) in members.iter().enumerate() {
            let vertex = normalized(&m.vertex);
            let label = curve.classify(&vertex)?;
            let omega = match label.label() {
                Some(l) if l.bundle.is_split_omega(curve.spec()) && l.secant_count == Some(SecantCount::Pencil) => {
                    let BundleDescriptor::DecomposableSum { x, .. } = l.bundle else { unreachable!() };
                    x
                }
                other => {
                    problems.push(format!("vertex {k} classified as {other:?}"));
                    continue;
                }
            };
            let rank = ps.omega.poisson_rank(&vertex, tol);
            if rank != RankDecision::Exact(0) {
                problems.push(format!("vertex {k} bracket rank {rank:?}"));
            }
            for i in 0..perturbations {
                let mut rng = stream(curve, 5, k * 100 + i);
                let q = curve.sample_partial_secant(2, &omega, false, &mut rng)?;
                let p = normalized(&(&vertex + normalized(&q) * crate::C64::new(1e-3, 0.0)));
                samples += 1;
                match curve.classify(&p)? {
                    Classification::Ambiguous(_) => ambiguous += 1,
                    Classification::Leaf(l) => {
                        let want = BundleDescriptor::IndecomposableOmega { omega };
                        if !same_bundle(curve, &l.bundle, &want) {
                            problems.push(format!("perturbed vertex {k} classified as {:?}", l.bundle));
                        }
                    }
                }
            }
        }
        Ok(record(
            name,
            problems.is_empty() && ambiguous * 50 <= samples,
            problems.len() as f64,
            0.0,
            members.len() + samples,
            ambiguous,
            start,
            if problems.is_empty() { format!("{singular} singular members, vertices rank 0") } else { problems.join("; ") },
        ))
    })())
}

/// Criterion (odd n): the interpolated form has degree n, vanishes on fresh
/// secant samples, and random points are top-stratum points of full rank.
pub fn check_top_equation(curve: &Curve, ps: &PoissonStructure, level: Level) -> CheckRecord {
    let start = Instant::now();
    let name = "top_secant_equation";
    let SecantForms::Odd { f } = &ps.forms else {
        return record(name, false, f64::INFINITY, 0.0, 0, 0, start, "needs odd n".into());
    };
    let n = curve.n();
    let r = n / 2;
    let count = level.count(200);
    let worst = (0..count)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream(curve, 6, i);
            let x = random_point(curve.lattice(), &mut rng);
            let p = curve.sample_partial_secant(r, &x, false, &mut rng)?;
            Ok(f.eval(p.as_slice()).norm() / f.abs_eval(p.as_slice()))
        })
        .collect::<Result<Vec<f64>>>();
    let worst = match worst {
        Ok(v) => v.into_iter().fold(0.0, f64::max),
        Err(e) => return CheckRecord::failed(name, e, start),
    };
    let randoms = level.count(20);
    let outcomes: Vec<Result<Outcome>> = (0..randoms)
        .into_par_iter()
        .map(|i| {
            let p = curve.random_projective_point(&mut stream(curve, 6, 100_000 + i));
            let rec = curve.consistency_check(&ps.omega, &p)?;
            Ok(match (rec.classification.bundle(), rec.poisson_rank) {
                (None, _) | (_, RankDecision::Ambiguous { .. }) => Outcome::Ambiguous,
                (Some(BundleDescriptor::IndecomposableOdd), RankDecision::Exact(k)) if k == n - 1 => Outcome::Agree,
                (b, k) => Outcome::Mismatch(format!("random point: {b:?} rank {k:?}")),
            })
        })
        .collect();
    let mut rec = tally(name, outcomes, 1.0 - AMBIGUOUS_SHARE, start);
    let degree_ok = f.degree() as usize == n && !f.is_zero();
    if worst >= VANISHING_TOL || !degree_ok {
        rec.status = CheckStatus::Fail;
    }
    rec.detail = format!(
        "degree {}, max relative value on {count} secant samples {worst:.3e}; random points: {}",
        f.degree(),
        rec.detail
    );
    rec.residual = worst;
    rec.tolerance = VANISHING_TOL;
    rec.samples += count;
    rec
}

/// Criterion (even n): `ℰ_ω` samples lie on one `r`-secant, span-intersection
/// points on a pencil.
pub fn check_unique_vs_pencil(curve: &Curve, level: Level) -> CheckRecord {
    let start = Instant::now();
    let trials = level.count(50);
    let omegas = curve.spec().omega_coset();
    let outcomes: Vec<Result<Outcome>> = (0..2 * trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream(curve, 7, i);
            let omega = omegas[rng.random_range(0..4)];
            let r = curve.n() / 2;
            let (b, want) = if i < trials {
                (BundleDescriptor::IndecomposableOmega { omega }, SecantCount::Unique)
            } else {
                (BundleDescriptor::DecomposableSum { d: r, x: omega }, SecantCount::Pencil)
            };
            let p = curve.sample_leaf(&b, &mut rng)?;
            let got = curve.count_r_secants(&p, &omega)?;
            Ok(if got == want { Outcome::Agree } else { Outcome::Mismatch(format!("{want:?} expected, got {got:?}")) })
        })
        .collect();
    tally("unique_vs_pencil", outcomes, 1.0, start)
}

/// Random divisor pair with shared points, `deg lcm ≤ n`, `lcm ≁ H`.
fn divisor_pair<R: Rng + ?Sized>(curve: &Curve, rng: &mut R) -> (Divisor, Divisor) {
    let n = curve.n();
    let lat = curve.lattice();
    let tol = curve.tol().lattice_tol;
    loop {
        let k = rng.random_range(1..=n.min(4));
        let pts: Vec<EPoint> = (0..k).map(|_| random_point(lat, rng)).collect();
        let separated = pts.iter().enumerate().all(|(i, p)| pts[..i].iter().all(|q| lat.distance(p, q) > 0.05));
        if !separated {
            continue;
        }
        let m1: Vec<u32> = (0..k).map(|_| rng.random_range(0..=2)).collect();
        let m2: Vec<u32> = (0..k).map(|_| rng.random_range(0..=2)).collect();
        let d1 = Divisor::new(pts.iter().copied().zip(m1.iter().copied()), lat, tol);
        let d2 = Divisor::new(pts.iter().copied().zip(m2.iter().copied()), lat, tol);
        if d1.is_zero() || d2.is_zero() {
            continue;
        }
        let lcm = d1.lcm(&d2, lat, tol);
        if lcm.degree() > n {
            continue;
        }
        if lcm.degree() == n && lat.distance(&lcm.sum(lat), &curve.spec().l_sum) < 1e-3 {
            continue;
        }
        return (d1, d2);
    }
}

/// Expected projective dimension of `span(D)`.
fn span_dim(curve: &Curve, d: &Divisor) -> isize {
    let n = curve.n();
    let deg = d.degree();
    let lat = curve.lattice();
    if deg < n {
        deg as isize - 1
    } else if lat.distance(&d.sum(lat), &curve.spec().l_sum) < 1e-9 {
        n as isize - 2
    } else {
        n as isize - 1
    }
}

/// Criterion: span dimensions, and span of lcm / gcd as join / intersection.
pub fn check_span_lattice(curve: &Curve, level: Level) -> CheckRecord {
    let start = Instant::now();
    let count = level.count(100);
    let lat = curve.lattice();
    let tol = curve.tol().lattice_tol;
    let results: Vec<(f64, Vec<String>)> = (0..count)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream(curve, 8, i);
            let mut problems = Vec::new();
            let (d1, d2) = divisor_pair(curve, &mut rng);
            let (s1, s2) = (curve.span(&d1), curve.span(&d2));
            for (d, s) in [(&d1, &s1), (&d2, &s2)] {
                if s.projective_dim() != span_dim(curve, d) {
                    problems.push(format!("span of degree {} has dimension {}", d.degree(), s.projective_dim()));
                }
            }
            let n = curve.n();
            let full = [
                random_divisor_with_sum(n, &curve.spec().l_sum, lat, 0.05, &mut rng),
                random_divisor_with_sum(n, &random_point(lat, &mut rng), lat, 0.05, &mut rng),
            ];
            for d in &full {
                if curve.span(d).projective_dim() != span_dim(curve, d) {
                    problems.push(format!("degree-n span dimension {}", curve.span(d).projective_dim()));
                }
            }
            let join = s1.join(&s2, curve.tol().rank_tol);
            let lcm = curve.span(&d1.lcm(&d2, lat, tol));
            let meet = curve.intersect_spans(&d1, &d2);
            let gcd = curve.span(&d1.gcd(&d2, lat, tol));
            let dist = join.distance(&lcm).max(if meet.dim() == gcd.dim() { meet.distance(&gcd) } else { f64::INFINITY });
            if !(dist < SUBSPACE_TOL) {
                problems.push(format!("lattice identity off by {dist:.3e}"));
            }
            (dist, problems)
        })
        .collect();
    let worst = results.iter().map(|r| r.0).fold(0.0, f64::max);
    let problems: Vec<String> = results.into_iter().flat_map(|r| r.1).collect();
    record(
        "span_lattice",
        problems.is_empty(),
        worst,
        SUBSPACE_TOL,
        count,
        0,
        start,
        if problems.is_empty() { format!("max subspace distance {worst:.3e}") } else { problems[..problems.len().min(5)].join("; ") },
    )
}

/// Relative value at `p` of the pencil member through `p0`.
fn pencil_value(ps: &PoissonStructure, p0: &CVector, p: &CVector) -> f64 {
    let SecantForms::Even { pencil } = &ps.forms else { return 0.0 };
    let (a0, b0) = (pencil.f1.eval(p0.as_slice()), pencil.f2.eval(p0.as_slice()));
    let g = b0 * pencil.f1.eval(p.as_slice()) - a0 * pencil.f2.eval(p.as_slice());
    let scale = b0.norm() * pencil.f1.abs_eval(p.as_slice()) + a0.norm() * pencil.f2.abs_eval(p.as_slice());
    if scale == 0.0 {
        0.0
    } else {
        g.norm() / scale
    }
}

/// Criterion: classification and pencil member are constant along leaf flows.
pub fn check_flow(curve: &Curve, ps: &PoissonStructure, level: Level) -> CheckRecord {
    const STEPS: usize = 50;
    let start = Instant::now();
    let families = enumerate_leaf_families(curve.spec());
    let count = level.count(20);
    let results: Vec<Result<(Outcome, f64)>> = (0..count)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream(curve, 9, i);
            let family = &families[i % families.len()];
            let b = family.descriptor(curve.spec(), &family_parameter(curve, family, &mut rng));
            let p0 = curve.sample_leaf(&b, &mut rng)?;
            let traj = leaf_flow(&ps.omega, &p0, STEPS, FLOW_DT, &mut rng)?;
            let drift = traj.iter().map(|p| pencil_value(ps, &p0, p)).fold(0.0, f64::max);
            for p in traj.iter().step_by(10) {
                match curve.classify(p)? {
                    Classification::Ambiguous(_) => return Ok((Outcome::Ambiguous, drift)),
                    Classification::Leaf(l) if !same_bundle(curve, &l.bundle, &b) => {
                        return Ok((Outcome::Mismatch(format!("{} drifted to {:?}", family.name(), l.bundle)), drift))
                    }
                    Classification::Leaf(_) => {}
                }
            }
            Ok((Outcome::Agree, drift))
        })
        .collect();
    let drift = results.iter().filter_map(|r| r.as_ref().ok().map(|x| x.1)).fold(0.0, f64::max);
    let mut rec = tally("flow_invariance", results.into_iter().map(|r| r.map(|x| x.0)).collect(), 1.0, start);
    if curve.spec().is_even() {
        if drift >= PENCIL_VALUE_TOL {
            rec.status = CheckStatus::Fail;
        }
        rec.detail = format!("{}; max pencil-member value {drift:.3e}", rec.detail);
        rec.residual = drift;
        rec.tolerance = PENCIL_VALUE_TOL;
    }
    rec
}

/// Criterion: `classify(sample_leaf(b)) = b` for every family, resampling
/// ambiguous points.
pub fn check_round_trip(curve: &Curve, level: Level) -> CheckRecord {
    let start = Instant::now();
    let families = enumerate_leaf_families(curve.spec());
    let per_family = level.count(30);
    let outcomes: Vec<(usize, Result<Outcome>)> = (0..families.len() * per_family)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream(curve, 10, i);
            let family = &families[i / per_family];
            let mut ambiguous = 0;
            loop {
                let b = family.descriptor(curve.spec(), &family_parameter(curve, family, &mut rng));
                let p = match curve.sample_leaf(&b, &mut rng) {
                    Ok(p) => p,
                    Err(e) => return (ambiguous, Err(e)),
                };
                match curve.classify(&p) {
                    Err(e) => return (ambiguous, Err(e)),
                    Ok(Classification::Ambiguous(_)) if ambiguous < 3 => ambiguous += 1,
                    Ok(Classification::Ambiguous(_)) => return (ambiguous, Ok(Outcome::Ambiguous)),
                    Ok(Classification::Leaf(l)) => {
                        let o = if same_bundle(curve, &l.bundle, &b) {
                            Outcome::Agree
                        } else {
                            Outcome::Mismatch(format!("{} classified as {:?}", family.name(), l.bundle))
                        };
                        return (ambiguous, Ok(o));
                    }
                }
            }
        })
        .collect();
    let resampled: usize = outcomes.iter().map(|o| o.0).sum();
    let total = outcomes.len();
    let mut rec = tally("round_trip", outcomes.into_iter().map(|o| o.1).collect(), 1.0, start);
    rec.ambiguous += resampled;
    if rec.ambiguous as f64 > AMBIGUOUS_SHARE * total as f64 {
        rec.status = CheckStatus::Fail;
    }
    rec.detail = format!("{}; {resampled} ambiguous draws resampled", rec.detail);
    rec
}

/// Every check that applies to this curve.
pub fn run_battery(curve: &Curve, ps: &PoissonStructure, level: Level) -> VerificationReport {
    let mut checks = vec![
        check_syzygy(ps),
        check_jacobi(curve, ps, level),
        check_casimir(curve, ps, level),
        check_rank_identity(curve, ps, level),
        check_dimension_table(curve, level),
    ];
    if curve.n() == 4 {
        checks.push(check_quadric_pencil(curve, ps, level));
    }
    if curve.spec().is_even() {
        checks.push(check_unique_vs_pencil(curve, level));
    } else {
        checks.push(check_top_equation(curve, ps, level));
    }
    checks.push(check_span_lattice(curve, level));
    checks.push(check_flow(curve, ps, level));
    checks.push(check_round_trip(curve, level));
    VerificationReport::new(curve.spec(), level, checks)
}
