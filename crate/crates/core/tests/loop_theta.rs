use looptheta::loop_theta::{direct_two_depth_sum, loop_theta_ij, vartheta_growth, log_grid, DepthPolicy, LoopSiegelPoint};
use looptheta::quaternion::{construct_maximal_order, enumerate_ideal_classes, IdealClassData};
use looptheta::sampling::random_siegel_point;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::sync::OnceLock;

fn classes() -> &'static [IdealClassData] {
    static C: OnceLock<Vec<IdealClassData>> = OnceLock::new();
    C.get_or_init(|| {
        [3u64, 7, 11, 23]
            .iter()
            .map(|&p| {
                let (alg, r) = construct_maximal_order(p).unwrap();
                enumerate_ideal_classes(&alg, &r).unwrap()
            })
            .collect()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn extra_depths_stay_within_tail(seed in any::<u64>(), which in 0usize..4, depth in 1usize..=3, bound in 3i64..=6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c = &classes()[which];
        let (i, j) = (rng.gen_range(0..c.class_number()), rng.gen_range(0..c.class_number()));
        let scale = rng.gen_range(0.4..1.0);
        let z = random_siegel_point(&mut rng, scale);
        let qv = rng.gen_range(1.3..3.0);
        let a = loop_theta_ij(c.lattice(i, j), &LoopSiegelPoint::new(z, qv, DepthPolicy::Fixed(depth)).unwrap(), bound).unwrap();
        let b = loop_theta_ij(c.lattice(i, j), &LoopSiegelPoint::new(z, qv, DepthPolicy::Fixed(depth + 4)).unwrap(), bound).unwrap();
        prop_assert!((a.value - b.value).norm() <= a.tail_bound + 1e-12 * a.value.norm(), "{} vs {}, tail {}", a.value, b.value, a.tail_bound);
    }

    #[test]
    fn product_matches_direct_enumeration(seed in any::<u64>(), which in 0usize..3, bound in 1i64..=2) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c = &classes()[which];
        let (i, j) = (rng.gen_range(0..c.class_number()), rng.gen_range(0..c.class_number()));
        let z = random_siegel_point(&mut rng, 0.5);
        let qv = rng.gen_range(1.5..4.0);
        let v = loop_theta_ij(c.lattice(i, j), &LoopSiegelPoint::new(z, qv, DepthPolicy::Fixed(2)).unwrap(), bound).unwrap();
        let d = direct_two_depth_sum(c.lattice(i, j), &z, qv, bound).unwrap();
        prop_assert!((v.value - d).norm() <= v.tail_bound + 1e-12 * d.norm().max(1.0));
    }

    #[test]
    fn growth_slope_tracks_log1p_rate(beta in 0.2f64..2.0, rho in 1.5f64..5.0) {
        let fit = vartheta_growth(beta, rho, &log_grid(1e-8, 1e-2, 25)).unwrap();
        let rate = beta.ln_1p() / rho.ln();
        prop_assert!((fit.slope - rate).abs() <= 0.05 * rate, "{:?} vs {}", fit, rate);
        prop_assert!(fit.slope >= 0.5 * fit.stated_rate);
        prop_assert!(fit.slope <= fit.stated_rate);
    }
}

#[test]
fn tail_target_controls_depth() {
    let c = &classes()[2];
    let z = looptheta::quaternion::SiegelPoint::i_identity();
    let loose = loop_theta_ij(c.lattice(0, 0), &LoopSiegelPoint::new(z, 2.0, DepthPolicy::TailTarget(1e-3)).unwrap(), 4).unwrap();
    let tight = loop_theta_ij(c.lattice(0, 0), &LoopSiegelPoint::new(z, 2.0, DepthPolicy::TailTarget(1e-200)).unwrap(), 4).unwrap();
    assert!(loose.depth_used < tight.depth_used);
    assert!(tight.omitted_bound <= 1e-200);
}
