//! Shared fixtures for the benchmark targets.

use netsense_core::{Case, NetworkConfig, PhaseSet, C64};

/// Gravimetry network: equal couplings, drivings spread over `[0, 0.5]`.
pub fn gravimetry(n: usize) -> NetworkConfig {
    let drivings = (0..n).map(|j| 0.5 * j as f64 / n as f64).collect();
    NetworkConfig::uniform_coupling(1.0, 0.0, 1.0, drivings, C64::new(1.0, 0.0)).expect("valid fixture")
}

/// Small-coupling network the truncated-Fock oracle resolves at cutoff 30.
pub fn oracle_network(n: usize) -> NetworkConfig {
    let drivings = (0..n).map(|j| 0.05 * j as f64).collect();
    NetworkConfig::uniform_coupling(1.0, 0.0, 0.2, drivings, C64::new(1.0, 0.0)).expect("valid fixture")
}

/// Coupling-estimation phases with alternating-sign prefactors.
pub fn phases(n: usize) -> PhaseSet {
    let betas = (1..n).map(|j| if j % 2 == 0 { 1.0 + 0.1 * j as f64 } else { -0.7 - 0.05 * j as f64 }).collect();
    let phis = (1..n).map(|j| 0.3 * (j as f64).sin()).collect();
    PhaseSet::new(Case::Case2, betas, phis).expect("valid fixture")
}
