//! Partial secant varieties `Sec_{d,x}` as rank-drop loci of Room matrices.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::curve::Curve;
use crate::elliptic::random_divisor_with_sum;
use crate::error::{Error, Result};
use crate::linalg::{
    chordal_distance, gap_rank, normalized, singular_values, svd, CMatrix, CVector, RankDecision, Subspace,
    C64, GAP_RATIO,
};
use crate::linear_systems::SectionBasis;
use crate::poly::{determinant, Polynomial};
use crate::{Divisor, EPoint};

/// Chordal distance below which a point is taken to lie on the curve.
pub const CURVE_DISTANCE_TOL: f64 = 1e-7;

/// Resampling budget for rejection sampling.
pub const REJECTION_BUDGET: usize = 200;

/// Minimum pairwise separation of sampled divisor points.
const SAMPLE_SEPARATION: f64 = 0.05;

/// Grid minima refined per level scan.
const REFINED_SEEDS: usize = 4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SecantCount {
    Unique,
    Pencil,
}

/// A refined minimum of the rank-defect indicator at level `d`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelCandidate {
    pub d: usize,
    pub x: EPoint,
    /// Chordal distance to the curve for `d = 1`, `σ_d/σ_1` of the Room matrix otherwise.
    pub indicator: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum SecantLevel {
    Level(LevelCandidate),
    /// Outside `Sec_r` for odd `n = 2r + 1`.
    TopStratum,
    Ambiguous(Vec<LevelCandidate>),
}

/// Three-way outcome of thresholding an indicator with the gap rule.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Verdict {
    Zero,
    Nonzero,
    Ambiguous,
}

pub(crate) fn verdict(value: f64, tol: f64) -> Verdict {
    if value <= tol {
        Verdict::Zero
    } else if value >= GAP_RATIO * tol {
        Verdict::Nonzero
    } else {
        Verdict::Ambiguous
    }
}

/// The two determinantal hypersurfaces of a pencil `det Φ(D1, D2) = 0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SecantPencil {
    pub x1: EPoint,
    pub x2: EPoint,
    pub f1: Polynomial<f64>,
    pub f2: Polynomial<f64>,
}

/// `σ_d/σ_1`, reading a vanishing matrix as rank 0.
fn defect(m: &CMatrix, d: usize, scale: f64) -> f64 {
    let s = singular_values(m);
    if s[0] <= 1e-13 * scale {
        return 0.0;
    }
    s[d - 1] / s[0]
}

/// `Σ_m |a_m| ‖E_m‖ ‖F_m‖`, the size of the terms summed into `Φ`.
fn term_scale(left: &CMatrix, right: &CMatrix, coords: &CVector) -> f64 {
    coords
        .iter()
        .enumerate()
        .map(|(m, a)| a.norm() * left.column(m).norm() * right.column(m).norm())
        .sum()
}

fn column_matrix(cols: &[CVector]) -> CMatrix {
    let n = cols.first().map_or(0, |c| c.len());
    let mut m = CMatrix::zeros(n, cols.len());
    for (j, c) in cols.iter().enumerate() {
        m.set_column(j, c);
    }
    m
}

impl Curve {
    fn level_basis_pair(&self, d: usize, x: &EPoint) -> (SectionBasis, SectionBasis) {
        self.pair_bases(d, x.z())
    }

    /// `σ_d/σ_1` of `Φ(D1, D2)_p` with `deg D1 = d`, `σ(D1) = x`.
    pub fn partial_secant_indicator(&self, p: &CVector, d: usize, x: &EPoint) -> f64 {
        if d == 1 {
            return chordal_distance(p, &self.embed(x));
        }
        if 2 * d > self.n() {
            return 0.0;
        }
        let (b1, b2) = self.level_basis_pair(d, x);
        let coords = self.frame_coords(p);
        let left = self.frame_values(&b1);
        let right = self.weighted_frame_values(&b2);
        let m = crate::linear_systems::room_product(&left, &right, &coords);
        defect(&m, d, term_scale(&left, &right, &coords))
    }

    /// Membership in `Sec_{d,x}`; always true above the middle level.
    pub fn in_partial_secant(&self, p: &CVector, d: usize, x: &EPoint) -> bool {
        if d == 1 {
            return self.partial_secant_indicator(p, 1, x) < CURVE_DISTANCE_TOL;
        }
        self.partial_secant_indicator(p, d, x) < self.tol().rank_tol
    }

    /// Nearest point of the curve to `[p]` and its chordal distance.
    pub fn distance_to_curve(&self, p: &CVector) -> (EPoint, f64) {
        let p = normalized(p);
        let seeds = {
            let grid = self.curve_grid();
            let mut scored: Vec<(f64, C64)> = grid
                .par_iter()
                .map(|(z, e)| (1.0 - e.dotc(&p).norm(), *z))
                .collect();
            scored.sort_by(|a, b| a.0.total_cmp(&b.0));
            scored.into_iter().take(REFINED_SEEDS).map(|(_, z)| z).collect::<Vec<_>>()
        };
        seeds
            .into_iter()
            .map(|z0| {
                let z = self.refine_on_curve(&p, z0);
                (self.lattice().reduce(z), chordal_distance(&p, &self.embed_raw(z)))
            })
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .expect("nonempty grid")
    }

    /// Gauss-Newton on `p - λ·ev(y)` in the unknowns `(y, λ)`.
    fn refine_on_curve(&self, p: &CVector, mut z: C64) -> C64 {
        let ev = self.embed_raw(z);
        let mut lambda = ev.dotc(p) / ev.dotc(&ev);
        for _ in 0..30 {
            let d = self.embed_derivatives(z, 1);
            let r = p - &d[0] * lambda;
            let j = column_matrix(&[&d[1] * -lambda, -&d[0]]);
            let Some(step) = least_squares(&j, &r) else { break };
            let dz = clamp_step(step[0], 0.1);
            z += dz;
            lambda += step[1];
            if dz.norm() < 1e-15 {
                break;
            }
        }
        z
    }

    /// Refined minima of the level-`d` indicator over the x-grid, best first.
    pub fn scan_level(&self, p: &CVector, d: usize) -> Vec<LevelCandidate> {
        assert!(d >= 2 && 2 * d <= self.n(), "scan levels run over 2..=n/2");
        let table = self.level_table(d);
        let coords = self.frame_coords(p);
        let values: Vec<f64> = table
            .left
            .par_iter()
            .zip(table.right.par_iter())
            .map(|(l, r)| defect(&crate::linear_systems::room_product(l, r, &coords), d, term_scale(l, r, &coords)))
            .collect();
        let g = self.x_grid();
        let at = |i: usize, j: usize| values[(i % g) * g + (j % g)];
        let mut minima: Vec<(f64, usize)> = Vec::new();
        for i in 0..g {
            for j in 0..g {
                let v = at(i, j);
                let local = (0..3).all(|di| {
                    (0..3).all(|dj| (di == 1 && dj == 1) || v <= at(i + g - 1 + di, j + g - 1 + dj))
                });
                if local {
                    minima.push((v, i * g + j));
                }
            }
        }
        minima.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut out: Vec<LevelCandidate> = Vec::new();
        for (_, idx) in minima.into_iter().take(REFINED_SEEDS) {
            let lift = self.refine_level(&coords, d, table.lifts[idx]);
            let x = self.lattice().reduce(lift);
            let indicator = self.partial_secant_indicator(p, d, &x);
            let dup = out.iter().any(|c| self.lattice().distance(&c.x, &x) < 1e-6);
            if !dup {
                out.push(LevelCandidate { d, x, indicator });
            }
        }
        out.sort_by(|a, b| a.indicator.total_cmp(&b.indicator));
        out
    }

    /// Gauss-Newton on `vᵀ Φ(ζ)_p = 0` in `(ζ, v)`, one entry of `v` pinned to 1.
    fn refine_level(&self, coords: &CVector, d: usize, mut lift: C64) -> C64 {
        let n = self.n();
        let room = |lift: C64| {
            let (b1, b2) = self.pair_bases(d, lift);
            let (e, de) = self.frame_values_with_derivative(&b1);
            let (mut f, mut df) = self.frame_values_with_derivative(&b2);
            for (k, w) in self.frame_weights().iter().enumerate() {
                f.column_mut(k).scale_mut(*w);
                df.column_mut(k).scale_mut(*w);
            }
            let phi = crate::linear_systems::room_product(&e, &f, coords);
            let dphi = crate::linear_systems::room_product(&de, &f, coords) * C64::new(-1.0 / d as f64, 0.0)
                + crate::linear_systems::room_product(&e, &df, coords) * C64::new(1.0 / (n - d) as f64, 0.0);
            (phi, dphi)
        };
        let (phi, _) = room(lift);
        let scale = phi.norm().max(f64::MIN_POSITIVE);
        let u = svd(&phi).u;
        let mut v: CVector = u.column(d - 1).map(|z| z.conj());
        let pin = (0..d).max_by(|a, b| v[*a].norm().total_cmp(&v[*b].norm())).unwrap_or(0);
        v /= v[pin];
        for _ in 0..40 {
            let (phi, dphi) = room(lift);
            let r = phi.transpose() * &v / C64::new(scale, 0.0);
            let mut cols = vec![dphi.transpose() * &v / C64::new(scale, 0.0)];
            for j in (0..d).filter(|j| *j != pin) {
                cols.push(phi.row(j).transpose() / C64::new(scale, 0.0));
            }
            let Some(step) = least_squares(&column_matrix(&cols), &r) else { break };
            let dz = clamp_step(step[0], 0.05);
            lift += dz;
            for (k, j) in (0..d).filter(|j| *j != pin).enumerate() {
                v[j] += step[k + 1];
            }
            if dz.norm() < 1e-15 {
                break;
            }
        }
        lift
    }

    /// Smallest `d` with `p ∈ Sec_d`, and the sum `x` of the secant divisor.
    pub fn minimal_secant_level(&self, p: &CVector) -> SecantLevel {
        let (x, dist) = self.distance_to_curve(p);
        let on_curve = LevelCandidate { d: 1, x, indicator: dist };
        match verdict(dist, CURVE_DISTANCE_TOL) {
            Verdict::Zero => return SecantLevel::Level(on_curve),
            Verdict::Ambiguous => return SecantLevel::Ambiguous(vec![on_curve]),
            Verdict::Nonzero => {}
        }
        let tol = self.tol().rank_tol;
        for d in 2..=self.n() / 2 {
            let cands = self.scan_level(p, d);
            let Some(best) = cands.first().copied() else { continue };
            match verdict(best.indicator, tol) {
                Verdict::Nonzero => continue,
                Verdict::Ambiguous => return SecantLevel::Ambiguous(cands),
                Verdict::Zero => {}
            }
            let hits: Vec<LevelCandidate> = cands.iter().filter(|c| c.indicator <= tol).copied().collect();
            let spurious = hits.iter().any(|c| !self.same_level_sum(d, &c.x, &best.x));
            let unsure = cands.iter().any(|c| verdict(c.indicator, tol) == Verdict::Ambiguous
                && !self.same_level_sum(d, &c.x, &best.x));
            if spurious || unsure {
                return SecantLevel::Ambiguous(cands);
            }
            return SecantLevel::Level(best);
        }
        if self.spec().is_even() {
            // The middle level covers projective space; reaching here means
            // the scan failed to converge.
            return SecantLevel::Ambiguous(Vec::new());
        }
        SecantLevel::TopStratum
    }

    /// Equality of sums, modulo the mirror `x ↔ σ(H) - x` at the middle level.
    pub fn same_level_sum(&self, d: usize, x: &EPoint, y: &EPoint) -> bool {
        let tol = self.sum_tol();
        let lat = self.lattice();
        lat.distance(x, y) < tol || (2 * d == self.n() && lat.distance(&lat.sub(&self.spec().l_sum, x), y) < tol)
    }

    /// Comparison tolerance for recovered sums.
    pub(crate) fn sum_tol(&self) -> f64 {
        self.tol().root_tol * 1e2
    }

    /// The secant divisor `D ∈ E^[d]_x` whose span contains `p`.
    pub fn find_secant_divisor(&self, p: &CVector, d: usize, x: &EPoint) -> Result<Divisor> {
        if d == 1 {
            let dist = chordal_distance(p, &self.embed(x));
            if dist >= CURVE_DISTANCE_TOL * GAP_RATIO {
                return Err(Error::NotOnSecant(format!("chordal distance {dist:.3e} to the curve point")));
            }
            return Ok(Divisor::single(*x));
        }
        let (b1, b2) = self.level_basis_pair(d, x);
        let (m, scale) = self.scaled_room(&b1, &b2, p);
        let crate::linalg::Svd { u, s, .. } = svd(&m);
        let ratio = s[d - 1] / scale;
        if ratio >= GAP_RATIO * self.tol().rank_tol {
            return Err(Error::NotOnSecant(format!("left kernel is empty: σ_d = {ratio:.3e} relative")));
        }
        let v: Vec<C64> = u.column(d - 1).iter().map(|z| z.conj()).collect();
        let divisor = self.section_zeros(&b1, &v)?;
        let residual = self.span(&divisor).residual(p);
        if residual > GAP_RATIO * self.tol().rank_tol {
            return Err(Error::NotOnSecant(format!("recovered divisor span misses p by {residual:.3e}")));
        }
        Ok(divisor)
    }

    /// `Φ(D1, D2)_p` in the frame, with the size of the terms summed into it.
    fn scaled_room(&self, b1: &SectionBasis, b2: &SectionBasis, p: &CVector) -> (CMatrix, f64) {
        let coords = self.frame_coords(p);
        let left = self.frame_values(b1);
        let right = self.weighted_frame_values(b2);
        let m = crate::linear_systems::room_product(&left, &right, &coords);
        let scale = term_scale(&left, &right, &coords);
        (m, scale)
    }

    /// Kernel rank decision for `Φ(D1, D2)_p` with `deg D1 = deg D2 = r`,
    /// `σ(D1) = ω`, on the cancellation-aware scale (the matrix can vanish).
    pub fn r_secant_kernel(&self, p: &CVector, omega: &EPoint) -> Result<RankDecision> {
        if self.spec().is_even() {
            let r = self.n() / 2;
            let (b1, b2) = self.level_basis_pair(r, omega);
            let (m, scale) = self.scaled_room(&b1, &b2, p);
            return Ok(match gap_rank(&singular_values(&m), scale, self.tol().rank_tol) {
                RankDecision::Exact(k) => RankDecision::Exact(r - k),
                RankDecision::Ambiguous { lo, hi } => RankDecision::Ambiguous { lo: r - hi, hi: r - lo },
            });
        }
        Err(Error::InvalidInput("r-secant counting needs even n".into()))
    }

    /// Whether `p` lies on one or on a pencil of `r`-secants with sum `ω`.
    pub fn count_r_secants(&self, p: &CVector, omega: &EPoint) -> Result<SecantCount> {
        match self.r_secant_kernel(p, omega)? {
            RankDecision::Exact(0) => Err(Error::NotOnSecant("no r-secant with this sum".into())),
            RankDecision::Exact(1) => Ok(SecantCount::Unique),
            RankDecision::Exact(2) => Ok(SecantCount::Pencil),
            RankDecision::Exact(k) => Err(Error::Numeric(format!("kernel dimension {k} exceeds 2"))),
            RankDecision::Ambiguous { lo, hi } => {
                Err(Error::Numeric(format!("kernel dimension ambiguous between {lo} and {hi}")))
            }
        }
    }

    /// A random point of `Sec_{d,x}`; with `reject_lower`, resampled until it
    /// is clearly outside `Sec_{d-1}`.
    pub fn sample_partial_secant<R: Rng + ?Sized>(
        &self,
        d: usize,
        x: &EPoint,
        reject_lower: bool,
        rng: &mut R,
    ) -> Result<CVector> {
        if d == 1 {
            return Ok(self.embed(x));
        }
        for _ in 0..REJECTION_BUDGET {
            let divisor = random_divisor_with_sum(d, x, self.lattice(), SAMPLE_SEPARATION, rng);
            let p = self.point_on_span(&divisor, rng);
            if !reject_lower || self.clear_of_level(&p, d - 1) {
                return Ok(p);
            }
        }
        Err(Error::RejectionBudget(REJECTION_BUDGET))
    }

    /// A random combination of the (normalized) curve points of a reduced divisor.
    pub fn point_on_span<R: Rng + ?Sized>(&self, divisor: &Divisor, rng: &mut R) -> CVector {
        let t = crate::curve::gaussian_vector(divisor.degree(), rng);
        let p = divisor
            .points()
            .zip(t.iter())
            .fold(CVector::zeros(self.n()), |acc, (y, c)| acc + self.embed(&y) * *c);
        normalized(&p)
    }

    /// True when `p` is unambiguously outside `Sec_d`.
    pub fn clear_of_level(&self, p: &CVector, d: usize) -> bool {
        if d == 1 {
            return verdict(self.distance_to_curve(p).1, CURVE_DISTANCE_TOL) == Verdict::Nonzero;
        }
        self.scan_level(p, d)
            .first()
            .is_none_or(|c| verdict(c.indicator, self.tol().rank_tol) == Verdict::Nonzero)
    }

    /// The two determinantal forms `det Φ` for inequivalent middle-level pairs.
    pub fn secant_pencil<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<SecantPencil> {
        if !self.spec().is_even() {
            return Err(Error::InvalidInput("the secant pencil exists for even n only".into()));
        }
        let r = self.n() / 2;
        let lat = self.lattice();
        let away_from_omega = |x: &EPoint| self.spec().omega_coset().iter().all(|w| lat.distance(x, w) > 0.1);
        let x1 = loop {
            let x = crate::elliptic::random_point(lat, rng);
            if away_from_omega(&x) {
                break x;
            }
        };
        let x2 = loop {
            let x = crate::elliptic::random_point(lat, rng);
            if away_from_omega(&x) && !self.same_level_sum(r, &x, &x1) && !self.mirror_close(r, &x, &x1, 0.1) {
                break x;
            }
        };
        Ok(SecantPencil { x1, x2, f1: self.room_determinant(r, &x1)?, f2: self.room_determinant(r, &x2)? })
    }

    fn mirror_close(&self, _r: usize, x: &EPoint, y: &EPoint, sep: f64) -> bool {
        let lat = self.lattice();
        lat.distance(x, y) < sep || lat.distance(&lat.sub(&self.spec().l_sum, x), y) < sep
    }

    /// `det Φ(D1, D2)` as a polynomial of degree `r`.
    pub fn room_determinant(&self, r: usize, x: &EPoint) -> Result<Polynomial<f64>> {
        let (b1, b2) = self.level_basis_pair(r, x);
        let room = self.multiplication_matrix(&b1, &b2)?;
        let entries: Vec<Vec<Polynomial<f64>>> = room
            .entries
            .iter()
            .map(|row| row.iter().map(|f| Polynomial::linear(&f.coeffs)).collect())
            .collect();
        Ok(determinant(&entries))
    }

    /// The sums `{x, σ(H) - x}` of the middle-level hypersurfaces through `p`.
    pub fn pencil_parameter_for_point(&self, p: &CVector) -> Result<(EPoint, EPoint)> {
        if !self.spec().is_even() {
            return Err(Error::InvalidInput("pencil parameter needs even n".into()));
        }
        let r = self.n() / 2;
        if r >= 2 && !self.clear_of_level(p, r - 1) {
            return Err(Error::NotOnSecant("degenerate: p lies on every middle-level hypersurface".into()));
        }
        let best = self
            .scan_level(p, r)
            .first()
            .copied()
            .ok_or_else(|| Error::Numeric("empty x-grid".into()))?;
        if best.indicator > self.tol().rank_tol {
            return Err(Error::NotOnSecant(format!("best indicator {:.3e}", best.indicator)));
        }
        Ok((best.x, self.lattice().sub(&self.spec().l_sum, &best.x)))
    }

    /// Projective dimension of the image of `(D, t) ↦ Σ t_i ev(y_i)`, from a
    /// finite-difference Jacobian at a random sample. With `sum` fixed the
    /// domain is `E^[d]_x × C^d`, otherwise `E^[d] × C^d`.
    pub fn secant_dimension_probe<R: Rng + ?Sized>(&self, d: usize, sum: Option<&EPoint>, rng: &mut R) -> RankDecision {
        const H: f64 = 1e-5;
        let lat = self.lattice();
        let x = sum.copied().unwrap_or_else(|| crate::elliptic::random_point(lat, rng));
        let divisor = random_divisor_with_sum(d, &x, lat, SAMPLE_SEPARATION, rng);
        let ys: Vec<C64> = divisor.points().map(|p| p.z()).collect();
        let ts = crate::curve::gaussian_vector(d, rng);
        // Constant rescaling of each point reparametrizes t and balances the columns.
        let scales: Vec<C64> = ys.iter().map(|y| C64::new(1.0 / self.embed_raw(*y).norm(), 0.0)).collect();
        let dev = |i: usize| (self.embed_raw(ys[i] + H) - self.embed_raw(ys[i] - H)) * (scales[i] / (2.0 * H));
        let mut cols: Vec<CVector> = ys.iter().zip(&scales).map(|(y, s)| self.embed_raw(*y) * *s).collect();
        let moving = if sum.is_some() { d - 1 } else { d };
        for i in 0..moving {
            let mut col = dev(i) * ts[i];
            if sum.is_some() {
                // the last point moves to keep the sum fixed
                col -= dev(d - 1) * ts[d - 1];
            }
            cols.push(col);
        }
        let m = column_matrix(&cols.iter().map(normalized).collect::<Vec<_>>());
        match gap_rank(&singular_values(&m), 1.0, 1e-7) {
            RankDecision::Exact(k) => RankDecision::Exact(k - 1),
            RankDecision::Ambiguous { lo, hi } => RankDecision::Ambiguous { lo: lo.saturating_sub(1), hi: hi - 1 },
        }
    }

    /// A point of `span(D1) ∩ span(D2)` where that intersection is one point.
    pub fn span_intersection_point(&self, d1: &Divisor, d2: &Divisor) -> Result<CVector> {
        let s: Subspace = self.intersect_spans(d1, d2);
        if s.dim() != 1 {
            return Err(Error::Numeric(format!("span intersection has dimension {}", s.dim())));
        }
        Ok(normalized(&s.basis().column(0).into_owned()))
    }
}

fn clamp_step(z: C64, max: f64) -> C64 {
    if z.norm() > max {
        z * (max / z.norm())
    } else {
        z
    }
}

/// Minimum-norm solution of `J δ = -r`, with the columns of `J` equilibrated first.
fn least_squares(j: &CMatrix, r: &CVector) -> Option<CVector> {
    let norms: Vec<f64> = j.column_iter().map(|c| c.norm()).collect();
    let mut scaled = j.clone();
    for (k, n) in norms.iter().enumerate() {
        if *n > 0.0 {
            scaled.column_mut(k).unscale_mut(*n);
        }
    }
    let mut step = crate::linalg::least_squares(&scaled, &(-r), 1e-13);
    for (k, n) in norms.iter().enumerate() {
        if *n > 0.0 {
            step[k] /= *n;
        }
    }
    step.iter().all(|z| z.re.is_finite() && z.im.is_finite()).then_some(step)
}
