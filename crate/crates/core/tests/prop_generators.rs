use proptest::prelude::*;

use qrw_core::generators::{adjoint_gen, repeated_interaction, scale, scale_slots, walk_power, Budget};
use qrw_core::linops::{compress, Operator};
use qrw_core::random::{random_generator, random_gksl, random_operator, rng, WMode};

fn rel(x: &Operator, y: &Operator) -> f64 {
    x.max_abs_diff(y) / y.max_abs().max(1.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn rightmost_slot_recursion(seed in any::<u64>(), d_h in 1usize..3, d_k in 1usize..3, n in 1usize..5) {
        let mut g = rng(seed);
        let phi = random_generator(&mut g, d_h, d_k, 1.0);
        let a = random_operator(&mut g, &[d_h], &[d_h], 1.0);
        let kb = phi.khat();
        let big = walk_power(&phi, n, &a, Budget::default()).unwrap();
        let first = phi.apply(&a).unwrap();
        for s in 0..kb.d_khat() {
            for t in 0..kb.d_khat() {
                let (x, y) = (kb.basis(s), kb.basis(t));
                let lhs = compress(&big, &x, &y).unwrap();
                let rhs = walk_power(&phi, n - 1, &compress(&first, &x, &y).unwrap(), Budget::default()).unwrap();
                prop_assert!(rel(&lhs, &rhs) <= 1e-12);
            }
        }
    }

    #[test]
    fn walk_powers_within_khat_norm(seed in any::<u64>(), d_h in 1usize..3, d_k in 1usize..3, m in 0usize..4) {
        let mut g = rng(seed);
        let phi = random_generator(&mut g, d_h, d_k, 1.0);
        let a = random_operator(&mut g, &[d_h], &[d_h], 1.0);
        let x = walk_power(&phi, m, &a, Budget::default()).unwrap();
        let surrogate = phi.d_khat() as f64 * phi.action_norm();
        prop_assert!(x.op_norm() <= surrogate.powi(m as i32) * a.op_norm() * (1.0 + 1e-8));
        prop_assert!(x.op_norm() <= phi.khat_norm().powi(m as i32) * a.op_norm() * (1.0 + 1e-8));
    }

    #[test]
    fn adjoint_commutes_with_walk_powers(seed in any::<u64>(), d_h in 1usize..3, d_k in 1usize..3, m in 0usize..4) {
        let mut g = rng(seed);
        let phi = random_generator(&mut g, d_h, d_k, 1.0);
        let a = random_operator(&mut g, &[d_h], &[d_h], 1.0);
        let lhs = walk_power(&adjoint_gen(&phi), m, &a, Budget::default()).unwrap();
        let rhs = walk_power(&phi, m, &a.adjoint(), Budget::default()).unwrap().adjoint();
        prop_assert!(rel(&lhs, &rhs) <= 1e-12);
    }

    #[test]
    fn repeated_interaction_powers_are_homomorphisms(seed in any::<u64>(), hi in 0usize..3, m in 0usize..4) {
        let h = [0.5, 0.1, 0.01][hi];
        let mut g = rng(seed);
        let data = random_gksl(&mut g, 2, 1, 0.7, WMode::Random);
        let phi = repeated_interaction(&data, h).unwrap();
        let a = random_operator(&mut g, &[2], &[2], 1.0);
        let b = random_operator(&mut g, &[2], &[2], 1.0);
        let pa = walk_power(&phi, m, &a, Budget::default()).unwrap();
        let pb = walk_power(&phi, m, &b, Budget::default()).unwrap();
        let pab = walk_power(&phi, m, &(&a * &b), Budget::default()).unwrap();
        prop_assert!(rel(&pab, &(&pa * &pb)) <= 1e-10);
        let pas = walk_power(&phi, m, &a.adjoint(), Budget::default()).unwrap();
        prop_assert!(rel(&pas, &pa.adjoint()) <= 1e-10);
    }

    #[test]
    fn scaling_conjugates_walk_powers(seed in any::<u64>(), d_k in 1usize..3, m in 0usize..4, h in 0.01f64..1.0) {
        let mut g = rng(seed);
        let phi = random_generator(&mut g, 2, d_k, 1.0);
        let a = random_operator(&mut g, &[2], &[2], 1.0);
        let lhs = walk_power(&scale(&phi, h), m, &a, Budget::default()).unwrap();
        let rhs = scale_slots(&walk_power(&phi, m, &a, Budget::default()).unwrap(), h).unwrap();
        prop_assert!(rel(&lhs, &rhs) <= 1e-13);
    }

    #[test]
    fn walk_powers_depend_continuously_on_generator(seed in any::<u64>(), m in 1usize..4) {
        let mut g = rng(seed);
        let phi = random_generator(&mut g, 2, 1, 1.0);
        let pert = random_generator(&mut g, 2, 1, 1.0);
        let a = random_operator(&mut g, &[2], &[2], 1.0);
        let base = walk_power(&phi, m, &a, Budget::default()).unwrap();
        let mut last = f64::INFINITY;
        for n in [1.0, 10.0, 100.0, 1000.0, 10000.0] {
            let phi_n = phi.try_add(&pert.scale_by((1.0 / n).into())).unwrap();
            let gap = walk_power(&phi_n, m, &a, Budget::default()).unwrap().try_sub(&base).unwrap().op_norm();
            prop_assert!(gap < last);
            last = gap;
        }
        prop_assert!(last <= 1e-2 * base.op_norm().max(1.0) * (phi.khat_norm() + pert.khat_norm()).powi(m as i32));
    }
}
