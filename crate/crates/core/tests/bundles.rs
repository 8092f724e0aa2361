use leafscope::bundles::LeafFamily;
use leafscope::elliptic::random_point;
use leafscope::{enumerate_leaf_families, BundleDescriptor, CurveSpec, EPoint};
use num_complex::Complex;
use proptest::prelude::*;
use rand::SeedableRng;

use BundleDescriptor::{DecomposableSum, IndecomposableOdd, IndecomposableOmega};

fn spec(n: usize) -> CurveSpec {
    CurveSpec::new(Complex::new(0.1, 1.0), n, Complex::new(0.2, 0.3)).unwrap()
}

fn generic(spec: &CurveSpec) -> EPoint {
    spec.lattice().reduce(Complex::new(0.31, 0.17))
}

/// Every descriptor with a nonempty leaf, generic parameters only.
fn descriptors(spec: &CurveSpec) -> Vec<BundleDescriptor> {
    enumerate_leaf_families(spec).iter().map(|f| f.descriptor(spec, &generic(spec))).collect()
}

#[test]
fn end_dimensions() {
    let s5 = spec(5);
    let x = generic(&s5);
    assert_eq!(IndecomposableOdd.end_dim(&s5), 1);
    assert_eq!(DecomposableSum { d: 1, x }.end_dim(&s5), 5);
    assert_eq!(DecomposableSum { d: 2, x }.end_dim(&s5), 3);
    let s4 = spec(4);
    let w = s4.omega_coset()[2];
    assert_eq!(DecomposableSum { d: 2, x: w }.end_dim(&s4), 4);
    assert_eq!(IndecomposableOmega { omega: w }.end_dim(&s4), 2);
    assert_eq!(DecomposableSum { d: 2, x: generic(&s4) }.end_dim(&s4), 2);
}

#[test]
fn leaf_dimensions() {
    for n in 3..=8 {
        let s = spec(n);
        let x = generic(&s);
        for d in 1..=n / 2 {
            if 2 * d < n {
                assert_eq!(DecomposableSum { d, x }.leaf_dim(&s), 2 * d - 2);
            }
        }
        if s.is_even() {
            let w = s.omega_coset()[0];
            assert_eq!(IndecomposableOmega { omega: w }.leaf_dim(&s), n - 2);
            assert_eq!(DecomposableSum { d: n / 2, x: w }.leaf_dim(&s), n - 4);
            // middle level off Ω: a hypersurface minus its singular part
            assert_eq!(DecomposableSum { d: n / 2, x }.leaf_dim(&s), n - 2);
        } else {
            assert_eq!(IndecomposableOdd.leaf_dim(&s), n - 1);
        }
    }
}

#[test]
fn aut_equals_end_and_leaves_are_even() {
    for n in 3..=9 {
        let s = spec(n);
        for b in descriptors(&s) {
            assert!(b.validate(&s) && b.leaf_nonempty(&s));
            assert_eq!(b.aut_dim(&s), b.end_dim(&s), "{b:?}");
            assert_eq!(b.leaf_dim(&s), n - b.end_dim(&s));
            assert_eq!(b.leaf_dim(&s) % 2, 0, "{b:?} at n = {n}");
        }
    }
}

#[test]
fn leaf_plus_parameter_fills_the_secant_level() {
    for n in 3..=9 {
        let s = spec(n);
        let x = generic(&s);
        for d in 1..=(n - 1) / 2 {
            if 2 * d < n {
                let family = LeafFamily::Split { d };
                let b = family.descriptor(&s, &x);
                assert_eq!(b.leaf_dim(&s) + family.parameter_dim(), (2 * d - 1).min(n - 1));
            }
        }
    }
}

#[test]
fn hyperplane_section_degrees() {
    let s4 = spec(4);
    assert_eq!(DecomposableSum { d: 1, x: generic(&s4) }.pz_degree(&s4), 2);
    assert_eq!(DecomposableSum { d: 2, x: s4.omega_coset()[1] }.pz_degree(&s4), 2);
    assert_eq!(IndecomposableOmega { omega: s4.omega_coset()[1] }.pz_degree(&s4), 4);
    let s5 = spec(5);
    assert_eq!(IndecomposableOdd.pz_degree(&s5), 5);
    assert_eq!(DecomposableSum { d: 2, x: generic(&s5) }.pz_degree(&s5), 5);
    let s6 = spec(6);
    assert_eq!(DecomposableSum { d: 3, x: s6.omega_coset()[0] }.pz_degree(&s6), 6);
}

#[test]
fn sections_vanishing_at_points() {
    let s5 = spec(5);
    let lat = s5.lattice();
    let x = generic(&s5);
    let y = lat.reduce(Complex::new(0.7, 0.4));
    assert_eq!(DecomposableSum { d: 1, x }.h0_e_minus_x(&s5, &x), 4);
    assert_eq!(DecomposableSum { d: 1, x }.h0_e_minus_x(&s5, &y), 3);
    assert_eq!(IndecomposableOdd.h0_e_minus_x(&s5, &y), 3);

    let s4 = spec(4);
    let w = s4.omega_coset()[3];
    let a = s4.lattice().reduce(Complex::new(0.13, 0.59));
    let b = s4.lattice().sub(&w, &a);
    let e_w = IndecomposableOmega { omega: w };
    assert_eq!(e_w.h0_e_minus_xy(&s4, &a, &b), 1);
    assert_eq!(e_w.h0_e_minus_xy(&s4, &a, &a), 0);
}

#[test]
fn family_lists() {
    let names = |n: usize| enumerate_leaf_families(&spec(n));
    assert_eq!(names(5), vec![LeafFamily::Split { d: 1 }, LeafFamily::Split { d: 2 }, LeafFamily::Odd]);
    let f4 = names(4);
    assert_eq!(f4.len(), 2 + 4 + 4);
    assert_eq!(f4.iter().filter(|f| matches!(f, LeafFamily::SplitOmega { .. })).count(), 4);
    assert_eq!(f4.iter().filter(|f| matches!(f, LeafFamily::Omega { .. })).count(), 4);
    assert_eq!(names(3).len(), 2);
    // Zero-dimensional leaves other than curve points exist only at n = 4.
    for n in 3..=9 {
        let s = spec(n);
        let extra = enumerate_leaf_families(&s)
            .iter()
            .filter(|f| **f != LeafFamily::Split { d: 1 } && f.leaf_dim(&s) == 0)
            .count();
        assert_eq!(extra, if n == 4 { 4 } else { 0 }, "n = {n}");
    }
}

#[test]
fn closure_examples() {
    let s = spec(6);
    let lat = s.lattice();
    let x = generic(&s);
    let y = lat.reduce(Complex::new(0.6, 0.8));
    let point = DecomposableSum { d: 1, x };
    let chord = DecomposableSum { d: 2, x: y };
    let other_chord = DecomposableSum { d: 2, x };
    assert!(chord.closure_contains(&point, &s));
    assert!(!point.closure_contains(&chord, &s));
    assert!(!chord.closure_contains(&other_chord, &s));
    assert!(!other_chord.closure_contains(&chord, &s));

    let w = s.omega_coset()[0];
    let vertex = DecomposableSum { d: 3, x: w };
    let omega_leaf = IndecomposableOmega { omega: w };
    assert!(omega_leaf.closure_contains(&vertex, &s));
    assert!(omega_leaf.closure_contains(&chord, &s));
    assert!(!omega_leaf.closure_contains(&DecomposableSum { d: 3, x: s.omega_coset()[1] }, &s));
    assert!(!vertex.closure_contains(&omega_leaf, &s));

    let s5 = spec(5);
    assert!(IndecomposableOdd.closure_contains(&DecomposableSum { d: 2, x: generic(&s5) }, &s5));
}

#[test]
fn mirror_sums_name_the_same_middle_leaf() {
    let s = spec(4);
    let lat = s.lattice();
    let x = generic(&s);
    let mirror = lat.sub(&s.l_sum, &x);
    let a = DecomposableSum { d: 2, x };
    assert!(a.same_leaf(&DecomposableSum { d: 2, x: mirror }, &s, 1e-9));
    assert!(!a.same_leaf(&DecomposableSum { d: 2, x: lat.reduce(Complex::new(0.5, 0.1)) }, &s, 1e-9));
    let s5 = spec(5);
    let x5 = generic(&s5);
    let m5 = s5.lattice().sub(&s5.l_sum, &x5);
    assert!(!DecomposableSum { d: 2, x: x5 }.same_leaf(&DecomposableSum { d: 2, x: m5 }, &s5, 1e-9));
}

#[test]
fn descriptors_serialize_with_variant_tags() {
    let s = spec(4);
    let x = s.lattice().reduce(Complex::new(0.25, 0.5));
    let v = serde_json::to_value(DecomposableSum { d: 2, x }).unwrap();
    assert_eq!(v["variant"], "DecomposableSum");
    assert_eq!(v["d"], 2);
    assert_eq!(serde_json::to_value(IndecomposableOdd).unwrap()["variant"], "IndecomposableOdd");
    let w = IndecomposableOmega { omega: s.omega_coset()[0] };
    let back: BundleDescriptor = serde_json::from_value(serde_json::to_value(w).unwrap()).unwrap();
    assert_eq!(back, w);
}

#[test]
fn invalid_descriptors() {
    let s = spec(4);
    assert!(!IndecomposableOdd.validate(&s));
    assert!(!DecomposableSum { d: 3, x: generic(&s) }.validate(&s));
    assert!(!IndecomposableOmega { omega: generic(&s) }.validate(&s));
    assert!(!IndecomposableOmega { omega: s.omega_coset()[0] }.validate(&spec(5)));
}

proptest! {
    #[test]
    fn closure_is_a_partial_order(n in 3usize..9, seed in any::<u64>()) {
        let s = spec(n);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let bs: Vec<BundleDescriptor> = enumerate_leaf_families(&s)
            .iter()
            .map(|f| loop {
                let x = random_point(&s.lattice(), &mut rng);
                if f.admits(&s, &x) {
                    break f.descriptor(&s, &x);
                }
            })
            .collect();
        for a in &bs {
            prop_assert!(a.closure_contains(a, &s));
            for b in &bs {
                if a.closure_contains(b, &s) && b.closure_contains(a, &s) {
                    prop_assert!(a.same_leaf(b, &s, 1e-9));
                }
                if a.closure_contains(b, &s) {
                    prop_assert!(b.leaf_dim(&s) <= a.leaf_dim(&s));
                    for c in &bs {
                        if b.closure_contains(c, &s) {
                            prop_assert!(a.closure_contains(c, &s));
                        }
                    }
                }
            }
        }
    }
}
