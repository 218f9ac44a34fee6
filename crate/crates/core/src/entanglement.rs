//! Linear entropy between the node subsystems and the mechanical modes.

use crate::dynamics::BranchState;
use crate::probe::NetworkConfig;
use crate::C64;

/// Closed-form `S_L(τ)`; depends on `τ` only through `cos τ` and on the
/// network only through the couplings and the eigenvalue gap.
pub fn linear_entropy_closed(config: &NetworkConfig, tau: f64) -> f64 {
    let n = config.n_nodes();
    let gap = config.lambda() - config.lambda_prime();
    let k = config.couplings();
    // 1 - cos τ written as 2 sin²(τ/2) keeps full precision near τ = 2πq.
    let half = (0.5 * tau).sin();
    let one_minus_cos = 2.0 * half * half;
    let mut acc = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            let rate = 2.0 * (k[i] * k[i] + k[j] * k[j]) * gap * gap;
            acc -= (-rate * one_minus_cos).exp_m1();
        }
    }
    2.0 * acc / (n * n) as f64
}

/// `1 - Tr ρ²` of the node subsystem, from the Gram matrix of the branch
/// coherent-state products.
pub fn linear_entropy_from_state(state: &BranchState) -> f64 {
    let n = state.n_nodes();
    let weights: Vec<f64> = state.coefficients().iter().map(|c| c.norm_sqr()).collect();
    let total: f64 = weights.iter().sum();
    let mut acc = 0.0;
    for j in 0..n {
        for jp in j + 1..n {
            // |Π_m ⟨A_j'm|A_jm⟩|² = exp(-Σ_m |A_jm - A_j'm|²), summed in log space.
            let log_overlap: f64 = (0..n)
                .map(|m| -(state.amplitude(j, m) - state.amplitude(jp, m)).norm_sqr())
                .sum();
            acc -= 2.0 * weights[j] * weights[jp] * log_overlap.exp_m1();
        }
    }
    // Off-diagonal terms carry the deficit; rescaling handles norms slightly off 1.
    acc / (total * total)
}

/// Overlap `⟨b|a⟩` of two coherent states.
pub fn coherent_overlap(a: C64, b: C64) -> C64 {
    (-0.5 * a.norm_sqr() - 0.5 * b.norm_sqr() + b.conj() * a).exp()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::evolve;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use std::f64::consts::{PI, TAU};

    fn cfg(k: Vec<f64>, e: Vec<f64>, alpha: C64) -> NetworkConfig {
        NetworkConfig::new(k.len(), 1.0, 0.0, k, e, alpha).unwrap()
    }

    #[test]
    fn vanishes_stroboscopically() {
        let c = cfg(vec![0.4, 0.9, 1.3], vec![0.0; 3], C64::new(0.5, 0.1));
        for q in 0..4 {
            assert!(linear_entropy_closed(&c, TAU * f64::from(q)).abs() < 1e-15);
        }
    }

    #[test]
    fn two_node_value_at_pi() {
        let c = cfg(vec![0.1, 0.1], vec![0.0; 2], C64::new(0.0, 0.0));
        let expected = 0.5 * (1.0 - (-0.08f64).exp());
        assert_relative_eq!(linear_entropy_closed(&c, PI), expected, max_relative = 1e-14);
        assert_relative_eq!(expected, 0.038_441_8, max_relative = 1e-6);
    }

    #[test]
    fn gram_path_matches_closed_form() {
        let c = cfg(vec![0.1, 0.25, 0.4], vec![0.3, -0.1, 0.05], C64::new(0.7, -0.4));
        for &tau in &[0.0, 0.4, PI / 2.0, PI, 4.2, TAU] {
            let from_state = linear_entropy_from_state(&evolve(&c, tau));
            assert!((from_state - linear_entropy_closed(&c, tau)).abs() < 1e-10);
        }
    }

    #[test]
    fn large_couplings_saturate() {
        let c = cfg(vec![30.0, 40.0, 50.0, 60.0], vec![0.0; 4], C64::new(0.0, 0.0));
        let s = linear_entropy_closed(&c, PI);
        assert_relative_eq!(s, 0.75, max_relative = 1e-14);
        assert_relative_eq!(linear_entropy_from_state(&evolve(&c, PI)), 0.75, max_relative = 1e-12);
    }

    #[test]
    fn coherent_overlap_basics() {
        let a = C64::new(0.3, -0.8);
        assert_relative_eq!(coherent_overlap(a, a).re, 1.0, epsilon = 1e-15);
        let b = C64::new(-1.0, 0.2);
        assert_relative_eq!(coherent_overlap(a, b).norm_sqr(), (-(a - b).norm_sqr()).exp(), max_relative = 1e-14);
    }

    proptest! {
        #[test]
        fn bounded_and_symmetric(
            k in prop::collection::vec(-3.0f64..3.0, 2..7),
            gap in 0.01f64..3.0,
            tau in 0.0f64..TAU,
        ) {
            let n = k.len();
            let c = NetworkConfig::new(n, gap, 0.0, k, vec![0.0; n], C64::new(0.0, 0.0)).unwrap();
            let s = linear_entropy_closed(&c, tau);
            prop_assert!(s >= 0.0);
            prop_assert!(s <= 1.0 - 1.0 / n as f64 + 1e-15);
            prop_assert!((s - linear_entropy_closed(&c, TAU - tau)).abs() < 1e-12);
            prop_assert!(s <= linear_entropy_closed(&c, PI) + 1e-15);
        }

        #[test]
        fn independent_of_alpha_and_driving(
            k in prop::collection::vec(-1.0f64..1.0, 3),
            e in prop::collection::vec(-2.0f64..2.0, 3),
            are in -2.0f64..2.0, aim in -2.0f64..2.0,
            tau in 0.0f64..TAU,
        ) {
            let base = cfg(k.clone(), vec![0.0; 3], C64::new(0.0, 0.0));
            let moved = cfg(k, e, C64::new(are, aim));
            let s0 = linear_entropy_from_state(&evolve(&base, tau));
            let s1 = linear_entropy_from_state(&evolve(&moved, tau));
            prop_assert!((s0 - s1).abs() < 1e-12);
        }
    }
}
