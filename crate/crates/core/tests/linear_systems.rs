use leafscope::elliptic::{random_divisor_with_sum, random_point};
use leafscope::linalg::{singular_values, CMatrix, CVector, Subspace, C64};
use leafscope::{Curve, CurveSpec, Divisor, EPoint};
use num_complex::Complex;
use rand::Rng;

fn curve(n: usize, tau: C64, l_sum: C64) -> Curve {
    Curve::new(CurveSpec::new(tau, n, l_sum).unwrap()).unwrap()
}

fn gaussian(len: usize, rng: &mut impl Rng) -> Vec<C64> {
    leafscope::gaussian_vector(len, rng).iter().copied().collect()
}

fn rank(m: &CMatrix, tol: f64) -> usize {
    let s = singular_values(m);
    let top = s.first().copied().unwrap_or(0.0);
    s.iter().filter(|v| **v > tol * top).count()
}

#[test]
fn section_bases_are_independent() {
    let c = curve(5, Complex::new(0.1, 1.1), Complex::new(0.2, 0.3));
    let mut rng = c.spec().rng();
    for d in 1..=5 {
        let x = random_point(c.lattice(), &mut rng);
        let b = c.basis_of_sections(d, &x);
        let mut m = CMatrix::zeros(d, 3 * d);
        for k in 0..3 * d {
            let y = random_point(c.lattice(), &mut rng);
            let w = b.weight(y.z());
            for (i, v) in b.eval(y.z()).into_iter().enumerate() {
                m[(i, k)] = v * w;
            }
        }
        assert_eq!(rank(&m, 1e-10), d, "degree {d}");
    }
    assert_eq!(c.line_basis().degree(), 5);
}

#[test]
fn degree_one_section_vanishes_at_its_sum() {
    let c = curve(4, Complex::new(0.0, 1.0), Complex::new(0.0, 0.0));
    let x = c.lattice().reduce(Complex::new(0.37, 0.61));
    let b = c.basis_of_sections(1, &x);
    assert!(b.eval(x.z())[0].norm() < 1e-12);
    let zeros = c.section_zeros(&b, &[Complex::new(1.0, 0.0)]).unwrap();
    assert!(zeros.same_as(&Divisor::single(x), c.lattice(), 1e-12));
}

#[test]
fn plane_cubic_relation() {
    // Monomials of degree 3 in 3 variables: fitting 30 curve points leaves one relation.
    let c = curve(3, Complex::new(0.15, 0.95), Complex::new(0.0, 0.0));
    let mut rng = c.spec().rng();
    let mut exps = Vec::new();
    for a in 0..=3u32 {
        for b in 0..=3 - a {
            exps.push([a, b, 3 - a - b]);
        }
    }
    let mut m = CMatrix::zeros(30, exps.len());
    for r in 0..30 {
        let p = c.embed(&random_point(c.lattice(), &mut rng));
        for (k, e) in exps.iter().enumerate() {
            m[(r, k)] = p[0].powu(e[0]) * p[1].powu(e[1]) * p[2].powu(e[2]);
        }
    }
    let s = singular_values(&m);
    assert_eq!(s.len(), 10);
    assert!(s[9] < 1e-12 * s[0], "{s:?}");
    assert!(s[8] > 1e-6 * s[0], "{s:?}");
}

#[test]
fn abel_sweep_for_hyperplane_sections() {
    let l_sum = Complex::new(0.3, 0.45);
    for n in [3usize, 4, 5, 6] {
        let c = curve(n, Complex::new(-0.2, 1.05), l_sum);
        let mut rng = c.spec().rng_stream(n as u64);
        for _ in 0..50 {
            let coeffs = gaussian(n, &mut rng);
            let d = c.section_zeros(c.line_basis(), &coeffs).unwrap();
            assert_eq!(d.degree(), n);
            assert!(c.lattice().eq(&d.sum(c.lattice()), &c.spec().l_sum, 1e-8));
            for z in d.points() {
                let s = c.line_basis().section(&coeffs, z.z()).norm() * c.line_basis().weight(z.z());
                assert!(s < 1e-8);
            }
        }
    }
}

#[test]
fn abel_sweep_for_partial_systems() {
    let c = curve(6, Complex::new(0.0, 1.0), Complex::new(0.0, 0.0));
    let mut rng = c.spec().rng_stream(7);
    for d in 2..=4 {
        let x = random_point(c.lattice(), &mut rng);
        let b = c.basis_of_sections(d, &x);
        for _ in 0..20 {
            let zeros = c.section_zeros(&b, &gaussian(d, &mut rng)).unwrap();
            assert_eq!(zeros.degree(), d);
            assert!(c.lattice().eq(&zeros.sum(c.lattice()), &x, 1e-8));
        }
    }
}

#[test]
fn product_section_zeros_are_the_factor_zeros() {
    // e·f for sections of degree 2 and 3 has zero divisor (e)₀ + (f)₀.
    let c = curve(5, Complex::new(0.1, 1.0), Complex::new(0.0, 0.0));
    let mut rng = c.spec().rng_stream(3);
    let x = random_point(c.lattice(), &mut rng);
    let (b1, b2) = c.pair_bases(2, x.z());
    let (s1, s2) = (gaussian(2, &mut rng), gaussian(3, &mut rng));
    let d1 = c.section_zeros(&b1, &s1).unwrap();
    let d2 = c.section_zeros(&b2, &s2).unwrap();
    let room = c.multiplication_matrix(&b1, &b2).unwrap();
    let mut form = vec![Complex::new(0.0, 0.0); 5];
    for i in 0..2 {
        for j in 0..3 {
            for (k, coef) in room.entries[i][j].coeffs.iter().enumerate() {
                form[k] += s1[i] * s2[j] * coef;
            }
        }
    }
    let product = c.section_zeros(c.line_basis(), &form).unwrap();
    assert!(product.same_as(&d1.plus(&d2, c.lattice(), 1e-9), c.lattice(), 1e-7));
}

#[test]
fn room_matrix_routes_agree() {
    let c = curve(6, Complex::new(0.2, 0.9), Complex::new(0.1, 0.2));
    let mut rng = c.spec().rng_stream(11);
    for d in 1..=3 {
        let x = random_point(c.lattice(), &mut rng);
        let b1 = c.basis_of_sections(d, &x);
        let b2 = c.basis_of_sections(6 - d, &c.lattice().sub(&c.spec().l_sum, &x));
        let room = c.multiplication_matrix(&b1, &b2).unwrap();
        assert!(room.fit_residual < 1e-8);
        for _ in 0..5 {
            let p = c.random_projective_point(&mut rng);
            let a = room.eval(&p);
            let b = c.room_at(&b1, &b2, &p).unwrap();
            assert!((&a - &b).norm() < 1e-9 * a.norm());
        }
    }
}

#[test]
fn room_matrix_rejects_non_pairs() {
    let c = curve(4, Complex::new(0.0, 1.0), Complex::new(0.0, 0.0));
    let b1 = c.basis_of_sections(2, &c.lattice().reduce(Complex::new(0.1, 0.1)));
    let b2 = c.basis_of_sections(2, &c.lattice().reduce(Complex::new(0.3, 0.1)));
    assert!(matches!(
        c.multiplication_matrix(&b1, &b2),
        Err(leafscope::Error::NotDivisorPair { .. })
    ));
}

#[test]
fn room_rank_drops_on_the_curve() {
    let c = curve(5, Complex::new(0.0, 1.1), Complex::new(0.0, 0.0));
    let mut rng = c.spec().rng_stream(5);
    for d in 1..=2 {
        let x = random_point(c.lattice(), &mut rng);
        let dv = random_divisor_with_sum(d, &x, c.lattice(), 0.05, &mut rng);
        let (b1, b2) = c.pair_bases(d, x.z());
        for y in dv.points() {
            let m = c.room_at(&b1, &b2, &c.embed(&y)).unwrap();
            let s = singular_values(&m);
            assert!(s[d - 1] < 1e-9 * c.room_at(&b1, &b2, &c.random_projective_point(&mut rng)).unwrap().norm());
        }
    }
}

#[test]
fn degree_one_room_cuts_out_its_point() {
    let c = curve(4, Complex::new(0.1, 1.0), Complex::new(0.0, 0.0));
    let x = c.lattice().reduce(Complex::new(0.4, 0.3));
    let (b1, b2) = c.pair_bases(1, x.z());
    let at = |y: &EPoint| c.room_at(&b1, &b2, &c.embed(y)).unwrap().norm();
    assert!(at(&x) < 1e-10);
    let mut rng = c.spec().rng();
    for _ in 0..20 {
        let y = random_point(c.lattice(), &mut rng);
        if c.lattice().distance(&y, &x) > 0.05 {
            assert!(at(&y) > 1e-4);
        }
    }
}

#[test]
fn scaling_a_basis_element_scales_a_row() {
    let c = curve(5, Complex::new(0.0, 1.0), Complex::new(0.0, 0.0));
    let x = c.lattice().reduce(Complex::new(0.2, 0.7));
    let (b1, b2) = c.pair_bases(2, x.z());
    let k = Complex::new(0.5, -1.5);
    let scaled = b1.clone().with_scaled(0, k);
    let p = c.random_projective_point(&mut c.spec().rng());
    let a = c.room_at(&b1, &b2, &p).unwrap();
    let b = c.room_at(&scaled, &b2, &p).unwrap();
    assert!((b.row(0) - a.row(0) * k).norm() < 1e-12);
    assert!((b.row(1) - a.row(1)).norm() < 1e-12);
}

#[test]
fn n4_room_determinant_contains_the_curve() {
    let c = curve(4, Complex::new(0.05, 1.0), Complex::new(0.0, 0.0));
    let x = c.lattice().reduce(Complex::new(0.31, 0.12));
    let (b1, b2) = c.pair_bases(2, x.z());
    let mut rng = c.spec().rng();
    let generic = c.room_at(&b1, &b2, &c.random_projective_point(&mut rng)).unwrap().determinant().norm();
    for _ in 0..20 {
        let y = random_point(c.lattice(), &mut rng);
        let det = c.room_at(&b1, &b2, &c.embed(&y)).unwrap().determinant();
        assert!(det.norm() < 1e-10 * generic);
    }
}

fn span_dims(n: usize, l_sum: C64) {
    let c = curve(n, Complex::new(0.1, 1.05), l_sum);
    let lat = c.lattice();
    let mut rng = c.spec().rng_stream(n as u64 + 100);
    for d in 1..n {
        let x = random_point(lat, &mut rng);
        let dv = random_divisor_with_sum(d, &x, lat, 0.05, &mut rng);
        assert_eq!(c.span(&dv).projective_dim(), d as isize - 1, "n {n} d {d}");
    }
    let h = random_divisor_with_sum(n, &c.spec().l_sum, lat, 0.05, &mut rng);
    assert_eq!(c.span(&h).projective_dim(), n as isize - 2);
    let other = lat.add(&c.spec().l_sum, &lat.reduce(Complex::new(0.3, 0.2)));
    let full = random_divisor_with_sum(n, &other, lat, 0.05, &mut rng);
    assert_eq!(c.span(&full).projective_dim(), n as isize - 1);
}

#[test]
fn span_dimensions() {
    span_dims(4, Complex::new(0.0, 0.0));
    span_dims(5, Complex::new(0.2, 0.1));
    span_dims(6, Complex::new(0.0, 0.0));
}

#[test]
fn span_with_multiplicity_uses_derivatives() {
    let c = curve(5, Complex::new(0.0, 1.0), Complex::new(0.0, 0.0));
    let lat = c.lattice();
    let x = lat.reduce(Complex::new(0.2, 0.3));
    let y = lat.reduce(Complex::new(0.6, 0.1));
    let fat = Divisor::new([(x, 2), (y, 1)], lat, 1e-10);
    assert_eq!(c.span(&fat).projective_dim(), 2);
    // Limit of chords (x)+(x+h): the tangent line.
    let h = 1e-5;
    let chord = Divisor::from_points([x, lat.reduce(x.z() + h)], lat, 1e-10);
    let tangent = c.span(&Divisor::new([(x, 2)], lat, 1e-10));
    assert!(c.span(&chord).distance(&tangent) < 1e-4);
}

#[test]
fn point_lies_on_its_chords() {
    let c = curve(5, Complex::new(0.0, 1.0), Complex::new(0.0, 0.0));
    let mut rng = c.spec().rng();
    for _ in 0..10 {
        let x = random_point(c.lattice(), &mut rng);
        let y = random_point(c.lattice(), &mut rng);
        let chord = Divisor::from_points([x, y], c.lattice(), 1e-10);
        assert!(c.span(&chord).contains(&c.embed(&x), 1e-10));
    }
}

fn point_on(s: &Subspace, rng: &mut impl Rng) -> CVector {
    s.basis() * leafscope::gaussian_vector(s.dim(), rng)
}

#[test]
fn xi_perp_membership_matches_span_containment() {
    let c = curve(5, Complex::new(-0.1, 1.0), Complex::new(0.1, 0.0));
    let lat = c.lattice();
    let mut rng = c.spec().rng_stream(42);
    for trial in 0..50 {
        let d = 1 + trial % 3;
        let dv = random_divisor_with_sum(d, &random_point(lat, &mut rng), lat, 0.05, &mut rng);
        let span = c.span(&dv);
        let p = if trial % 2 == 0 { point_on(&span, &mut rng) } else { c.random_projective_point(&mut rng) };
        let perp = c.xi_perp(&p);
        assert_eq!(perp.dim(), 4);
        let forms = c.forms_vanishing_on(&dv);
        let via_perp = perp.contains_subspace(&forms, 1e-8);
        let via_span = span.contains(&p, 1e-8);
        assert_eq!(via_perp, via_span, "trial {trial}");
        assert_eq!(via_span, trial % 2 == 0);
    }
}

#[test]
fn xi_perp_of_curve_point_contains_forms_through_it() {
    let c = curve(4, Complex::new(0.0, 1.0), Complex::new(0.0, 0.0));
    let lat = c.lattice();
    let mut rng = c.spec().rng();
    let x = random_point(lat, &mut rng);
    let y = random_point(lat, &mut rng);
    let dv = Divisor::from_points([x, y], lat, 1e-10);
    assert!(c.xi_perp(&c.embed(&x)).contains_subspace(&c.forms_vanishing_on(&dv), 1e-9));
}
