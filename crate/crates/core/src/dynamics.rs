//! Exact closed-form evolution of the network in branch form.
//!
//! Because every node Hamiltonian conserves its local eigenvalue, the state at
//! any time is a superposition of `N` branches, each a product of coherent
//! states. A branch is fully described by one complex coefficient and `N`
//! coherent amplitudes, so the representation is exact for any `τ` and `α`.

use std::f64::consts::TAU;

use crate::error::{Error, Result};
use crate::probe::{case_phases, Case, NetworkConfig, PhaseSet};
use crate::C64;

/// Network state `Σ_j c_j |j⟩ ⊗_m |A[j][m]⟩` at dimensionless time `tau`.
#[derive(Clone, Debug, PartialEq)]
pub struct BranchState {
    n_nodes: usize,
    coefficients: Vec<C64>,
    amplitudes: Vec<C64>,
    tau: f64,
}

impl BranchState {
    /// `amplitudes` is row-major: entry `j * N + m` is mode `m` on branch `j`.
    pub(crate) fn from_parts(coefficients: Vec<C64>, amplitudes: Vec<C64>, tau: f64) -> Self {
        let n_nodes = coefficients.len();
        debug_assert_eq!(amplitudes.len(), n_nodes * n_nodes);
        Self { n_nodes, coefficients, amplitudes, tau }
    }

    /// Build a state from explicit branch data.
    pub fn new(coefficients: Vec<C64>, amplitudes: Vec<C64>, tau: f64) -> Result<Self> {
        let n = coefficients.len();
        if amplitudes.len() != n * n {
            return Err(Error::DimensionMismatch { expected: n * n, found: amplitudes.len() });
        }
        let state = Self::from_parts(coefficients, amplitudes, tau);
        if (state.norm_sqr() - 1.0).abs() > 1e-12 {
            return Err(Error::ConfigInvalid(format!(
                "branch coefficients are not normalised (norm² = {})",
                state.norm_sqr()
            )));
        }
        Ok(state)
    }

    pub fn n_nodes(&self) -> usize {
        self.n_nodes
    }

    pub fn coefficients(&self) -> &[C64] {
        &self.coefficients
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    /// Coherent amplitude of mode `mode` on branch `branch`.
    pub fn amplitude(&self, branch: usize, mode: usize) -> C64 {
        self.amplitudes[branch * self.n_nodes + mode]
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    /// `Σ_j |c_j|²`.
    pub fn norm_sqr(&self) -> f64 {
        self.coefficients.iter().map(|c| c.norm_sqr()).sum()
    }

    /// Same branch data with every coefficient multiplied by `e^{iγ}`.
    pub fn with_global_phase(&self, gamma: f64) -> Self {
        let rot = C64::from_polar(1.0, gamma);
        Self {
            coefficients: self.coefficients.iter().map(|c| c * rot).collect(),
            ..self.clone()
        }
    }
}

/// `η(τ) = 1 - e^{-iτ}`.
pub fn eta(tau: f64) -> C64 {
    C64::new(1.0 - tau.cos(), tau.sin())
}

/// Relative branch exponent `ξ_j(τ)` of node `node` against the reference
/// node 0.
///
/// The result is purely imaginary. For real `α` it coincides with the familiar
/// `½e^{-iτ}(λ-λ')[α(1-e^{2iτ})(k_1-k_j) - 2B(τ - sin τ)(sin τ - i cos τ)]`;
/// the imaginary part of `α` adds `(λ-λ')(k_j-k_1) Im α (1 - cos τ)`, which is
/// the displacement phase that the real-`α` expression drops.
pub fn xi_phase(config: &NetworkConfig, node: usize, tau: f64) -> Result<C64> {
    config.check_node(node)?;
    if node == 0 {
        return Err(Error::IndexOutOfRange { index: 0, valid: format!("1..{}", config.n_nodes()) });
    }
    Ok(C64::new(0.0, relative_phase(config, node, tau)))
}

/// `Im ξ_j(τ)`; node 0 returns 0.
fn relative_phase(config: &NetworkConfig, node: usize, tau: f64) -> f64 {
    if node == 0 {
        return 0.0;
    }
    let k = config.couplings();
    let e = config.drivings();
    let (lam, lamp) = (config.lambda(), config.lambda_prime());
    let alpha = config.alpha();
    let b = 2.0 * e[0] * k[0] - 2.0 * e[node] * k[node]
        + (k[node] - k[0]) * (k[node] + k[0]) * (lam + lamp);
    let (s, c) = tau.sin_cos();
    let displacement = alpha.re * s + alpha.im * (1.0 - c);
    (lam - lamp) * (b * (tau - s) + (k[node] - k[0]) * displacement)
}

/// Coherent amplitude of mode `mode` on branch `branch`:
/// `α e^{-iτ} + (k_m Ξ - E_m) η(τ)` with `Ξ = λ` on the excited node.
pub fn coherent_amplitude(
    config: &NetworkConfig,
    branch: usize,
    mode: usize,
    tau: f64,
) -> Result<C64> {
    config.check_node(branch)?;
    config.check_node(mode)?;
    Ok(amplitude_unchecked(config, branch, mode, tau))
}

fn amplitude_unchecked(config: &NetworkConfig, branch: usize, mode: usize, tau: f64) -> C64 {
    config.alpha() * C64::from_polar(1.0, -tau) + config.drive(branch, mode) * eta(tau)
}

/// Closed-form state at time `tau`, gauge-fixed so that `c_0 = 1/√N`.
pub fn evolve(config: &NetworkConfig, tau: f64) -> BranchState {
    let n = config.n_nodes();
    let norm = 1.0 / (n as f64).sqrt();
    let coefficients = (0..n)
        .map(|j| C64::from_polar(norm, relative_phase(config, j, tau)))
        .collect();
    let amplitudes = (0..n)
        .flat_map(|j| (0..n).map(move |m| (j, m)))
        .map(|(j, m)| amplitude_unchecked(config, j, m, tau))
        .collect();
    BranchState::from_parts(coefficients, amplitudes, tau)
}

/// Phase reduction and factorised state at `τ = 2π`.
///
/// All mechanical amplitudes are exactly `α` and branch `j` carries
/// `e^{iβ_jΦ_j}/√N`.
pub fn stroboscopic_state(config: &NetworkConfig, case: Case) -> Result<(PhaseSet, BranchState)> {
    let phases = case_phases(config, case)?;
    let n = config.n_nodes();
    let state = BranchState::from_parts(phases.state(), vec![config.alpha(); n * n], TAU);
    Ok((phases, state))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::probe::build_initial_state;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    /// Real-α reduction of the phase written out term by term, kept apart
    /// from the production formula.
    fn xi_literal(cfg: &NetworkConfig, j: usize, tau: f64) -> C64 {
        let k = cfg.couplings();
        let e = cfg.drivings();
        let (lam, lamp) = (cfg.lambda(), cfg.lambda_prime());
        let alpha = cfg.alpha().re;
        let i = C64::i();
        let b = 2.0 * e[0] * k[0] - 2.0 * e[j] * k[j] - (k[0] - k[j]) * (k[0] + k[j]) * (lam + lamp);
        let bracket = alpha * (1.0 - (2.0 * i * tau).exp()) * (k[0] - k[j])
            - 2.0 * b * (tau - tau.sin()) * (tau.sin() - i * tau.cos());
        0.5 * (-i * tau).exp() * (lam - lamp) * bracket
    }

    fn sample_config() -> NetworkConfig {
        NetworkConfig::new(3, 1.0, 0.0, vec![0.1, 0.2, 0.15], vec![0.05, 0.0, -0.02], c(1.0, 0.0))
            .unwrap()
    }

    #[test]
    fn matches_real_alpha_reduction() {
        let cfg = sample_config();
        for &tau in &[0.0, 0.3, PI / 2.0, PI, 4.0, TAU, 9.5] {
            for j in 1..3 {
                let ours = xi_phase(&cfg, j, tau).unwrap();
                let lit = xi_literal(&cfg, j, tau);
                assert!((ours - lit).norm() < 1e-13, "tau={tau} j={j}: {ours} vs {lit}");
            }
        }
    }

    #[test]
    fn identical_nodes_carry_no_phase() {
        let cfg = NetworkConfig::new(3, 2.0, 0.5, vec![0.3; 3], vec![0.1; 3], c(0.7, -0.2)).unwrap();
        for &tau in &[0.4, PI, 5.0] {
            assert_eq!(xi_phase(&cfg, 2, tau).unwrap(), c(0.0, 0.0));
        }
    }

    #[test]
    fn xi_vanishes_with_eigenvalue_gap() {
        let gap = 1e-12;
        let cfg = NetworkConfig::new(2, 1.0, 1.0 - gap, vec![0.3, 0.5], vec![0.1, 0.4], c(0.7, 0.3)).unwrap();
        assert!(xi_phase(&cfg, 1, 2.3).unwrap().norm() < 1e-10);
    }

    #[test]
    fn stroboscopic_case1_phase() {
        let cfg = NetworkConfig::uniform_coupling(1.0, 0.0, 1.0, vec![0.5, 0.2, 0.1], c(0.3, 0.0)).unwrap();
        let xi = xi_phase(&cfg, 1, TAU).unwrap();
        assert_relative_eq!(xi.im, 4.0 * PI * 0.3, epsilon = 1e-12);
        let xi = xi_phase(&cfg, 2, TAU).unwrap();
        assert_relative_eq!(xi.im, 4.0 * PI * 0.4, epsilon = 1e-12);
    }

    #[test]
    fn index_errors() {
        let cfg = sample_config();
        assert!(matches!(xi_phase(&cfg, 0, 1.0), Err(Error::IndexOutOfRange { .. })));
        assert!(matches!(xi_phase(&cfg, 3, 1.0), Err(Error::IndexOutOfRange { .. })));
        assert!(matches!(coherent_amplitude(&cfg, 0, 3, 1.0), Err(Error::IndexOutOfRange { .. })));
    }

    #[test]
    fn coherent_amplitude_examples() {
        let cfg = NetworkConfig::new(2, 1.0, 0.0, vec![1.0, 0.3], vec![0.0, 0.2], c(0.0, 0.0)).unwrap();
        let a = coherent_amplitude(&cfg, 0, 0, PI).unwrap();
        assert!((a - c(2.0, 0.0)).norm() < 1e-15);

        let cfg = sample_config().with_alpha(c(0.4, -1.1)).unwrap();
        for j in 0..3 {
            for m in 0..3 {
                let a0 = coherent_amplitude(&cfg, j, m, 0.0).unwrap();
                assert_eq!(a0, cfg.alpha());
                let a2 = coherent_amplitude(&cfg, j, m, TAU).unwrap();
                assert!((a2 - cfg.alpha()).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn evolve_at_zero_is_initial_state() {
        let cfg = sample_config();
        let s0 = evolve(&cfg, 0.0);
        let init = build_initial_state(&cfg);
        for (a, b) in s0.coefficients().iter().zip(init.coefficients()) {
            assert!((a - b).norm() < 1e-15);
        }
        for (a, b) in s0.amplitudes().iter().zip(init.amplitudes()) {
            assert!((a - b).norm() < 1e-15);
        }
    }

    #[test]
    fn stroboscopic_state_matches_evolution() {
        let cfg = NetworkConfig::uniform_coupling(1.0, 0.0, 1.0, vec![0.5, 0.2, 0.1], c(1.0, 0.0)).unwrap();
        let (ph, st) = stroboscopic_state(&cfg, Case::Case1).unwrap();
        let ev = evolve(&cfg, TAU);
        for (a, b) in st.coefficients().iter().zip(ev.coefficients()) {
            assert!((a - b).norm() < 1e-12);
        }
        assert!((st.coefficients()[1] - C64::from_polar(1.0 / 3f64.sqrt(), 4.0 * PI * 0.3)).norm() < 1e-12);
        assert_eq!(ph.dim(), 2);

        let cfg = NetworkConfig::undriven(1.0, 0.0, vec![1.0, 0.8, 0.6], c(0.5, 0.0)).unwrap();
        let (ph, st) = stroboscopic_state(&cfg, Case::Case2).unwrap();
        let ev = evolve(&cfg, TAU);
        for (a, b) in st.coefficients().iter().zip(ev.coefficients()) {
            assert!((a - b).norm() < 1e-12);
        }
        assert_relative_eq!(ph.betas()[0] * ph.phis()[0], -3.6 * PI * 0.2, epsilon = 1e-12);
    }

    #[test]
    fn identical_nodes_give_plain_w_state() {
        let cfg = NetworkConfig::uniform_coupling(1.0, 0.0, 0.4, vec![0.3; 4], c(0.2, 0.0)).unwrap();
        let (_, st) = stroboscopic_state(&cfg, Case::Case1).unwrap();
        for cj in st.coefficients() {
            assert!((cj - c(0.5, 0.0)).norm() < 1e-15);
        }
    }

    proptest! {
        #[test]
        fn branch_weights_stay_uniform(
            k in prop::collection::vec(-2.0f64..2.0, 3),
            e in prop::collection::vec(-2.0f64..2.0, 3),
            lam in -3.0f64..3.0, lamp in -3.0f64..3.0,
            are in -2.0f64..2.0, aim in -2.0f64..2.0,
            tau in 0.0f64..20.0,
        ) {
            prop_assume!((lam - lamp).abs() > 1e-6);
            let cfg = NetworkConfig::new(3, lam, lamp, k, e, c(are, aim)).unwrap();
            let st = evolve(&cfg, tau);
            for cj in st.coefficients() {
                prop_assert!((cj.norm_sqr() - 1.0 / 3.0).abs() < 1e-14);
            }
            for j in 1..3 {
                prop_assert_eq!(xi_phase(&cfg, j, tau).unwrap().re, 0.0);
            }
        }

        #[test]
        fn amplitudes_return_every_period(
            k in prop::collection::vec(-2.0f64..2.0, 2),
            e in prop::collection::vec(-2.0f64..2.0, 2),
            are in -2.0f64..2.0, aim in -2.0f64..2.0,
            q in 1u32..6,
        ) {
            let cfg = NetworkConfig::new(2, 1.0, -0.5, k, e, c(are, aim)).unwrap();
            let st = evolve(&cfg, TAU * f64::from(q));
            for a in st.amplitudes() {
                prop_assert!((a - cfg.alpha()).norm() < 1e-13);
            }
        }
    }
}
