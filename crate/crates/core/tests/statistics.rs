//! Wilcoxon signed-rank test against independent enumeration and a
//! dynamic-programming null distribution.

mod oracles;

use ganlab_core::eval::{comparison_matrix, wilcoxon_signed_rank, DistanceMatrix};
use ganlab_core::seed;
use oracles::*;
use proptest::prelude::*;
use rand::Rng;

#[test]
fn exact_p_matches_enumeration_with_ties_and_zeros() {
    let mut rng = seed::rng(0x51a7);
    for case in 0..1000 {
        let n = rng.random_range(1..=12);
        // small integer support forces ties and zero differences
        let spread = rng.random_range(2..=8);
        let a: Vec<f64> = (0..n).map(|_| rng.random_range(0..spread) as f64).collect();
        let b: Vec<f64> = (0..n).map(|_| rng.random_range(0..spread) as f64).collect();
        let r = wilcoxon_signed_rank(&a, &b, 0.05).unwrap();
        assert!(r.exact);
        assert_eq!(r.p_value, enumerated_p(&a, &b), "case {case}: a={a:?} b={b:?}");
    }
}

#[test]
fn exact_p_matches_enumeration_without_ties() {
    let mut rng = seed::rng(0x51a8);
    for _ in 0..200 {
        let n = rng.random_range(1..=12);
        let a: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
        let b: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
        let r = wilcoxon_signed_rank(&a, &b, 0.05).unwrap();
        assert_eq!(r.p_value, enumerated_p(&a, &b));
    }
}

#[test]
fn dp_oracle_agrees_with_enumeration() {
    let mut rng = seed::rng(0x0dd);
    for _ in 0..50 {
        let n = rng.random_range(1..=12);
        let a: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
        let b: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
        let w = wilcoxon_signed_rank(&a, &b, 0.05).unwrap().w_plus;
        assert_eq!(dp_p(n, w), enumerated_p(&a, &b));
    }
}

#[test]
fn normal_approximation_is_close_at_fifty() {
    let mut rng = seed::rng(0x50);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let shift = rng.random_range(-0.4..0.4);
        let a: Vec<f64> = (0..50).map(|_| rng.random::<f64>() + shift).collect();
        let b: Vec<f64> = (0..50).map(|_| rng.random::<f64>()).collect();
        let r = wilcoxon_signed_rank(&a, &b, 0.05).unwrap();
        assert!(!r.exact);
        assert_eq!(r.n_effective, 50);
        worst = worst.max((r.p_value - dp_p(50, r.w_plus)).abs());
    }
    assert!(worst <= 0.01, "worst deviation {worst}");
}

#[test]
fn exact_limit_boundary() {
    let a: Vec<f64> = (1..=20).map(|i| i as f64).collect();
    let b = vec![0.0; 20];
    let r = wilcoxon_signed_rank(&a, &b, 0.05).unwrap();
    assert!(r.exact);
    assert_eq!(r.p_value, 2.0 / (1u64 << 20) as f64);
    assert_eq!(r.code, -1);
    let a21: Vec<f64> = (1..=21).map(|i| i as f64).collect();
    assert!(!wilcoxon_signed_rank(&a21, &[0.0; 21], 0.05).unwrap().exact);
}

fn distances(label: &str, rows: &[f64]) -> DistanceMatrix {
    DistanceMatrix::new(label, rows.len(), 1, rows.to_vec()).unwrap()
}

proptest! {
    #[test]
    fn codes_are_invariant_under_positive_scaling(
        a in prop::collection::vec(0.01f64..10.0, 25..60),
        shift in -1.0f64..1.0,
        c in 0.01f64..100.0,
    ) {
        let b: Vec<f64> = a.iter().enumerate().map(|(i, v)| (v + shift * ((i % 7) as f64 / 7.0)).abs() + 0.001).collect();
        let m = [distances("a", &a), distances("b", &b)];
        let scaled: Vec<DistanceMatrix> = [&a, &b]
            .iter()
            .zip(["a", "b"])
            .map(|(v, l)| distances(l, &v.iter().map(|x| x * c).collect::<Vec<_>>()))
            .collect();
        let base = comparison_matrix(&[&m[0], &m[1]], 0.05).unwrap();
        let after = comparison_matrix(&[&scaled[0], &scaled[1]], 0.05).unwrap();
        prop_assert_eq!(base.codes, after.codes);
    }

    #[test]
    fn swapping_arguments_flips_the_code(
        a in prop::collection::vec(0.0f64..5.0, 1..40),
        b in prop::collection::vec(0.0f64..5.0, 1..40),
    ) {
        let n = a.len().min(b.len());
        let fwd = wilcoxon_signed_rank(&a[..n], &b[..n], 0.05).unwrap();
        let rev = wilcoxon_signed_rank(&b[..n], &a[..n], 0.05).unwrap();
        prop_assert_eq!(fwd.code, -rev.code);
        prop_assert_eq!(fwd.p_value, rev.p_value);
    }
}
