use looptheta::linalg::{inverse, q, Q};
use looptheta::quaternion::{
    brandt_matrix, construct_maximal_order, count_norm, enumerate_ideal_classes, evaluate_theta_point, theta_series_pair, IdealClassData,
    OrderLattice, QuaternionAlgebra, SiegelPoint,
};
use num_traits::{ToPrimitive, Zero};
use proptest::prelude::*;

fn classes(p: u64) -> IdealClassData {
    let (alg, r) = construct_maximal_order(p).unwrap();
    enumerate_ideal_classes(&alg, &r).unwrap()
}

/// Norms of all lattice vectors in a coefficient box large enough to hold every vector of scaled norm <= n.
fn box_norms(alg: &QuaternionAlgebra, l: &OrderLattice, n: i64) -> Vec<Q> {
    let ginv = inverse(&l.gram).unwrap();
    let bounds: Vec<i64> = (0..4).map(|i| ((n as f64) * ginv[i][i].to_f64().unwrap()).sqrt().floor() as i64).collect();
    let mut out = Vec::new();
    let mut c = [0i64; 4];
    fn rec(i: usize, c: &mut [i64; 4], bounds: &[i64], alg: &QuaternionAlgebra, l: &OrderLattice, n: i64, out: &mut Vec<Q>) {
        if i == 4 {
            let mut x: [Q; 4] = Default::default();
            for (k, b) in l.basis.iter().enumerate() {
                for t in 0..4 {
                    x[t] += &b[t] * q(c[k]);
                }
            }
            let v = alg.norm(&x) / &l.scale;
            if v <= q(n) {
                out.push(v);
            }
            return;
        }
        for v in -bounds[i]..=bounds[i] {
            c[i] = v;
            rec(i + 1, c, bounds, alg, l, n, out);
        }
    }
    rec(0, &mut c, &bounds, alg, l, n, &mut out);
    out
}

#[test]
fn counts_match_box_enumeration() {
    for p in [3u64, 11, 23] {
        let c = classes(p);
        for i in 0..c.class_number() {
            for j in 0..c.class_number() {
                let l = c.lattice(i, j);
                let norms = box_norms(&c.algebra, l, 4);
                for n in 0..=4 {
                    let expect = norms.iter().filter(|v| **v == q(n)).count() as u64;
                    assert_eq!(count_norm(l, n).unwrap(), expect, "p={} L{}{} n={}", p, i, j, n);
                }
            }
        }
    }
}

#[test]
fn brandt_entries_match_lattice_counts() {
    let c = classes(11);
    for l in [2u64, 3, 5] {
        let b = brandt_matrix(l, &c).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                let n = box_norms(&c.algebra, c.lattice(i, j), l as i64).iter().filter(|v| **v == q(l as i64)).count() as i64;
                assert_eq!(n, c.weights[j] as i64 * b.entries[i][j]);
            }
        }
        assert!(b.is_weighted_symmetric(&c.weights));
    }
}

#[test]
fn mass_formula() {
    for p in [3u64, 7, 11, 19, 23] {
        assert_eq!(classes(p).mass(), Q::new(((p - 1) as i64).into(), 24.into()));
    }
}

#[test]
fn theta_counts_are_even_and_swap_symmetric() {
    let c = classes(11);
    for i in 0..2 {
        for j in 0..2 {
            let t = theta_series_pair(c.lattice(i, j), 8).unwrap();
            assert!(t.is_swap_symmetric());
            assert!(t.counts.iter().all(|(&k, &n)| k == (0, 0, 0) || n % 2 == 0));
            assert_eq!(t.count((0, 0, 0)), 1);
        }
    }
}

#[test]
fn theta_at_imaginary_identity_is_real_positive() {
    let c = classes(7);
    let t = theta_series_pair(c.lattice(0, 0), 10).unwrap();
    let v = evaluate_theta_point(&t, &SiegelPoint::i_identity()).unwrap();
    assert!(v.value.im.abs() < 1e-15 && v.value.re > 1.0);
    // At i I the phase of a triple is exp(-2 pi (A + C)).
    let direct: f64 = t
        .counts
        .iter()
        .map(|(&(a, _, cc), &n)| n as f64 * (-2.0 * std::f64::consts::PI * (a + cc) as f64).exp())
        .sum();
    assert!((v.value.re - direct).abs() < 1e-14 + v.tail_bound);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn brandt_family_commutes(i in 0usize..5, j in 0usize..5) {
        let ls = [2u64, 3, 5, 7, 13];
        let c = classes(11);
        let a = brandt_matrix(ls[i], &c).unwrap();
        let b = brandt_matrix(ls[j], &c).unwrap();
        prop_assert!(a.commutes_with(&b));
        prop_assert!(a.row_sums().iter().all(|&s| s == ls[i] as i64 + 1));
    }

    #[test]
    fn larger_bounds_stay_within_tail(bound in 2i64..=6, s in 0.6f64..1.5) {
        let c = classes(11);
        let z = SiegelPoint::i_identity().scale(s);
        let small = evaluate_theta_point(&theta_series_pair(c.lattice(0, 1), bound).unwrap(), &z).unwrap();
        let large = evaluate_theta_point(&theta_series_pair(c.lattice(0, 1), bound + 3).unwrap(), &z).unwrap();
        prop_assert!((small.value - large.value).norm() <= small.tail_bound);
        prop_assert!(!small.excess.is_zero());
    }
}
