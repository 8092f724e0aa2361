use std::sync::OnceLock;

use leafscope::elliptic::{random_divisor_with_sum, random_point};
use leafscope::linalg::{chordal_distance, normalized, RankDecision, C64};
use leafscope::poisson::{
    leaf_flow, quadric_matrix, syzygy_poisson_matrix, SecantForms, DEFAULT_OVERSAMPLING, NULL_GAP,
};
use leafscope::{BundleDescriptor, Curve, CurveSpec, Error, PoissonCache, PoissonStructure, Polynomial};
use num_complex::Complex;
use rand::SeedableRng;

fn curve(n: usize) -> Curve {
    Curve::new(CurveSpec::new(Complex::new(0.1, 1.0), n, Complex::new(0.2, 0.3)).unwrap()).unwrap()
}

fn built(n: usize) -> &'static (Curve, PoissonStructure) {
    static CELLS: [OnceLock<(Curve, PoissonStructure)>; 4] =
        [OnceLock::new(), OnceLock::new(), OnceLock::new(), OnceLock::new()];
    CELLS[n - 3].get_or_init(|| {
        let c = curve(n);
        let ps = c.poisson_structure(DEFAULT_OVERSAMPLING, &mut c.spec().rng()).unwrap();
        (c, ps)
    })
}

fn temp_path(name: &str) -> std::path::PathBuf {
    std::env::temp_dir().join(format!("leafscope-{}-{name}.json", std::process::id()))
}

#[test]
fn bracket_is_unique_up_to_scale() {
    for n in 3..=5 {
        let (_, ps) = built(n);
        assert!(ps.diagnostics.syzygy.gap >= NULL_GAP, "n = {n}: gap {:.3e}", ps.diagnostics.syzygy.gap);
        if let Some(interp) = &ps.diagnostics.interpolation {
            assert!(interp.gap >= NULL_GAP);
        }
    }
}

#[test]
fn independent_builds_agree_projectively() {
    for n in [4, 5] {
        let (c, ps) = built(n);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(991);
        let again = c.poisson_structure(DEFAULT_OVERSAMPLING, &mut rng).unwrap();
        assert!(ps.omega.projective_distance(&again.omega) < 1e-6, "n = {n}");
    }
}

#[test]
fn cubic_bracket_ranks() {
    let (c, ps) = built(3);
    let tol = c.tol().rank_tol;
    let mut rng = c.spec().rng_stream(1);
    for _ in 0..10 {
        let p = c.random_projective_point(&mut rng);
        assert_eq!(ps.omega.poisson_rank(&p, tol), RankDecision::Exact(2));
        let e = c.embed(&random_point(c.lattice(), &mut rng));
        assert_eq!(ps.omega.poisson_rank(&e, tol), RankDecision::Exact(0));
    }
    let SecantForms::Odd { f } = &ps.forms else { panic!("odd forms expected") };
    assert_eq!(f.degree(), 3);
}

#[test]
fn skew_and_quadratic() {
    let (c, ps) = built(4);
    let mut rng = c.spec().rng_stream(2);
    let p = c.random_projective_point(&mut rng);
    let m = ps.omega.bracket_eval(&p);
    assert!((&m + m.transpose()).norm() < 1e-14 * m.norm());
    let k = C64::new(-0.7, 1.9);
    let scaled = ps.omega.bracket_eval(&(&p * k));
    assert!((scaled - &m * (k * k)).norm() < 1e-12 * m.norm());
    for q in ps.omega.upper() {
        assert_eq!(q.degree(), 2);
    }
}

#[test]
fn casimirs_and_jacobi() {
    for n in [3, 4, 5, 6] {
        let (c, ps) = built(n);
        let forms = ps.forms.forms();
        let mut rng = c.spec().rng_stream(3);
        let control = ps.omega.perturbed(1e-2, &mut rng);
        for _ in 0..10 {
            let p = c.random_projective_point(&mut rng);
            assert!(ps.omega.casimir_residual(&forms, &p) < 1e-8, "n = {n}");
            assert!(ps.omega.jacobi_residual(&p) < 1e-6, "n = {n}");
            assert!(control.jacobi_residual(&p) > 1e-4, "n = {n}");
        }
    }
}

#[test]
fn quintic_vanishes_on_chords_only() {
    let (c, ps) = built(5);
    let SecantForms::Odd { f } = &ps.forms else { panic!("odd forms expected") };
    assert_eq!(f.degree(), 5);
    let mut rng = c.spec().rng_stream(4);
    for _ in 0..20 {
        let x = random_point(c.lattice(), &mut rng);
        let p = c.sample_partial_secant(2, &x, false, &mut rng).unwrap();
        assert!(f.eval(p.as_slice()).norm() < 1e-8 * f.abs_eval(p.as_slice()));
        let q = c.random_projective_point(&mut rng);
        assert!(f.eval(q.as_slice()).norm() > 1e-6 * f.abs_eval(q.as_slice()));
    }
}

#[test]
fn leaf_dimension_matches_rank() {
    let (c5, ps5) = built(5);
    let mut rng = c5.spec().rng_stream(5);
    let e = c5.embed(&random_point(c5.lattice(), &mut rng));
    let rec = c5.consistency_check(&ps5.omega, &e).unwrap();
    assert!(rec.agree && rec.leaf_dim == Some(0));
    let chord = c5.sample_leaf(&BundleDescriptor::DecomposableSum { d: 2, x: random_point(c5.lattice(), &mut rng) }, &mut rng);
    let rec = c5.consistency_check(&ps5.omega, &chord.unwrap()).unwrap();
    assert!(rec.agree && rec.poisson_rank == RankDecision::Exact(2));

    let (c4, ps4) = built(4);
    let w = c4.spec().omega_coset()[1];
    let lat = c4.lattice();
    let d1 = random_divisor_with_sum(2, &w, lat, 0.05, &mut rng);
    let d2 = random_divisor_with_sum(2, &w, lat, 0.05, &mut rng);
    let vertex = c4.span_intersection_point(&d1, &d2).unwrap();
    let rec = c4.consistency_check(&ps4.omega, &vertex).unwrap();
    assert!(rec.agree && rec.poisson_rank == RankDecision::Exact(0));
}

#[test]
fn flows_stay_on_the_leaf() {
    let (c, ps) = built(4);
    let mut rng = c.spec().rng_stream(6);
    let w = c.spec().omega_coset()[0];
    for b in [
        BundleDescriptor::IndecomposableOmega { omega: w },
        BundleDescriptor::DecomposableSum { d: 2, x: c.lattice().reduce(Complex::new(0.4, 0.1)) },
    ] {
        let p0 = c.sample_leaf(&b, &mut rng).unwrap();
        let traj = leaf_flow(&ps.omega, &p0, 30, 0.01, &mut rng).unwrap();
        assert_eq!(traj.len(), 31);
        let moved = (&traj[30] - &traj[0]).norm();
        assert!(moved > 1e-6, "flow did not move");
        let end = c.classify(&traj[30]).unwrap();
        assert!(end.bundle().unwrap().same_leaf(&b, c.spec(), 1e-6));
    }
}

#[test]
fn curve_points_are_fixed_by_the_flow() {
    let (c, ps) = built(5);
    let mut rng = c.spec().rng_stream(7);
    let e = normalized(&c.embed(&random_point(c.lattice(), &mut rng)));
    let traj = leaf_flow(&ps.omega, &e, 10, 0.01, &mut rng).unwrap();
    assert!(chordal_distance(traj.last().unwrap(), &e) < 1e-10);
}

#[test]
fn cache_round_trip() {
    let (c, ps) = built(4);
    let cache = PoissonCache::new(c.spec(), ps, &mut c.spec().rng_stream(8));
    let path = temp_path("round-trip");
    cache.save(&path).unwrap();
    let back = PoissonCache::load(&path).unwrap();
    std::fs::remove_file(&path).ok();
    assert_eq!(back.omega_matrix.projective_distance(&ps.omega), 0.0);
    assert_eq!(back.spec, *c.spec());
    assert!(back.probe_deviation() <= 1e-10);
}

#[test]
fn corrupted_caches_are_refused() {
    let (c, ps) = built(4);
    let cache = PoissonCache::new(c.spec(), ps, &mut c.spec().rng_stream(9));

    let mut tampered = cache.clone();
    tampered.probes[3].bracket[0] += C64::new(1e-3, 0.0);
    let path = temp_path("tampered");
    tampered.save(&path).unwrap();
    assert!(matches!(PoissonCache::load(&path), Err(Error::Cache(_))));

    let mut convention = cache.clone();
    convention.theta_convention = "other".into();
    convention.save(&path).unwrap();
    assert!(matches!(PoissonCache::load(&path), Err(Error::Cache(_))));

    std::fs::write(&path, "{\"spec\": 1}").unwrap();
    assert!(matches!(PoissonCache::load(&path), Err(Error::Cache(_))));
    std::fs::remove_file(&path).ok();
}

#[test]
fn quadric_matrix_reproduces_the_form() {
    let q = Polynomial::from_terms(
        3,
        2,
        [
            (vec![2, 0, 0], C64::new(1.0, 0.0)),
            (vec![1, 1, 0], C64::new(0.0, 2.0)),
            (vec![0, 1, 1], C64::new(-3.0, 0.5)),
        ],
    );
    let a = quadric_matrix(&q);
    assert_eq!(a, a.transpose());
    let p = leafscope::CVector::from_vec(vec![C64::new(0.3, -1.0), C64::new(2.0, 0.1), C64::new(-0.4, 0.7)]);
    let direct = q.eval(p.as_slice());
    let via = (p.transpose() * &a * &p)[(0, 0)];
    assert!((direct - via).norm() < 1e-13);
}

#[test]
fn syzygy_inputs_are_checked() {
    assert!(syzygy_poisson_matrix(4, &[], 1e-8).is_err());
    let wrong = Polynomial::linear(&[C64::new(1.0, 0.0); 3]);
    assert!(syzygy_poisson_matrix(4, &[wrong], 1e-8).is_err());
}
