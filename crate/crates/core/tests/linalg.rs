use measurement_core::linalg::*;
use measurement_core::seed;
use proptest::prelude::*;

fn space(id: &str, d: usize) -> SpaceLabel {
    SpaceLabel::new(id, d).unwrap()
}

fn arb_state(d: usize) -> impl Strategy<Value = StateVector> {
    proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), d).prop_map(move |v| {
        let amps: Vec<C64> = v.into_iter().map(|(re, im)| C64::new(re, im)).collect();
        StateVector::from_slice(SpaceLabel::new(format!("v{d}"), d).unwrap(), &amps).unwrap()
    })
}

#[test]
fn tensor_matches_nested_loops() {
    let u = random_state(&space("u", 3), 1);
    let v = random_state(&space("v", 5), 2);
    let t = tensor_product(&u, &v);
    let mut oracle = Vec::new();
    for i in 0..3 {
        for j in 0..5 {
            oracle.push(u.amplitudes()[i] * v.amplitudes()[j]);
        }
    }
    assert_eq!(t.dim(), 15);
    for (a, b) in t.amplitudes().iter().zip(&oracle) {
        assert_eq!(a, b);
    }
    let e = tensor_product(&StateVector::basis(space("a", 2), 0).unwrap(), &StateVector::basis(space("b", 2), 1).unwrap());
    assert_eq!(e.amplitudes()[1], C64::new(1.0, 0.0));
    assert!((t.norm() - u.norm() * v.norm()).abs() < 1e-12);
}

#[test]
fn random_pairs_overlap_mean_in_dim_16() {
    let s = space("x", 16);
    let n = 10_000;
    let samples: Vec<f64> = (0..n)
        .map(|i| {
            let base = seed::derive_index(99, i);
            let u = random_state(&s, seed::derive(base, "u"));
            let v = random_state(&s, seed::derive(base, "v"));
            inner_product(&u, &v).unwrap().norm_sqr()
        })
        .collect();
    let mean = samples.iter().sum::<f64>() / n as f64;
    let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n as f64 - 1.0);
    let se = (var / n as f64).sqrt();
    assert!((mean - 1.0 / 16.0).abs() < 3.0 * se, "mean {mean} se {se}");
}

#[test]
fn random_state_edge_cases() {
    let s = random_state(&space("x", 1), 42);
    assert!((s.amplitudes()[0].norm() - 1.0).abs() < 1e-15);
    let a = random_state(&space("x", 7), 42);
    let b = random_state(&space("x", 7), 42);
    assert_eq!(a, b);
}

#[test]
fn isometries_differ_across_seeds() {
    let amb = space("a", 12);
    let from = Subspace::block(amb.clone(), 0, 4).unwrap();
    let to = Subspace::block(amb, 4, 4).unwrap();
    let m1 = random_isometry(&from, &to, 1).unwrap();
    let m2 = random_isometry(&from, &to, 2).unwrap();
    assert!(operator_norm(&(m1.matrix() - m2.matrix())) > 1e-6);
    let single = random_isometry(
        &Subspace::block(space("b", 4), 0, 1).unwrap(),
        &Subspace::block(space("b", 4), 2, 1).unwrap(),
        3,
    )
    .unwrap();
    assert!((single.matrix()[(0, 0)].norm() - 1.0).abs() < 1e-12);
}

#[test]
fn direct_sum_of_rotated_blocks() {
    let amb = space("a", 12);
    let u = random_unitary(12, 8);
    let a = Subspace::block(amb.clone(), 0, 4).unwrap().rotated(&u).unwrap();
    let b = Subspace::block(amb.clone(), 4, 4).unwrap().rotated(&u).unwrap();
    let r = direct_sum_frames(&[&a, &b], 1e-10).unwrap();
    assert!(r.pass && r.max_overlap <= 1e-10);
    let r = direct_sum_frames(&[&a, &a], 1e-10).unwrap();
    assert!(!r.pass && (r.max_overlap - 1.0).abs() < 1e-10);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn tensor_is_associative(u in arb_state(2), v in arb_state(3), w in arb_state(2)) {
        let left = tensor_product(&tensor_product(&u, &v), &w);
        let right = tensor_product(&u, &tensor_product(&v, &w));
        for (a, b) in left.amplitudes().iter().zip(right.amplitudes().iter()) {
            prop_assert!((a - b).norm() < 1e-15);
        }
    }

    #[test]
    fn inner_product_is_hermitian(u in arb_state(4), v in arb_state(4)) {
        let a = inner_product(&u, &v).unwrap();
        let b = inner_product(&v, &u).unwrap();
        prop_assert!((a - b.conj()).norm() < 1e-14);
    }

    #[test]
    fn isometries_preserve_norms(seed in any::<u64>(), x in arb_state(3)) {
        let amb = space("a", 9);
        let from = Subspace::block(amb.clone(), 0, 3).unwrap();
        let to = Subspace::block(amb.clone(), 6, 3).unwrap();
        let m = random_isometry(&from, &to, seed).unwrap();
        let v = from.embed(x.amplitudes()).unwrap();
        let out = m.apply(&v).unwrap();
        prop_assert!((out.norm() - x.norm()).abs() < 1e-10);
        prop_assert!(unitarity_defect(m.matrix()) < 1e-10);
    }

    #[test]
    fn projector_fixes_frame_columns(seed in any::<u64>(), k in 1usize..5) {
        let s = Subspace::random(space("a", 6), k, seed).unwrap();
        let p = projector_from_subspace(&s);
        for c in 0..k {
            let col = StateVector::new(space("a", 6), s.frame().column(c).into_owned()).unwrap();
            let out = p.apply(&col).unwrap();
            prop_assert!((out.amplitudes() - col.amplitudes()).norm() < 1e-12);
        }
    }
}
