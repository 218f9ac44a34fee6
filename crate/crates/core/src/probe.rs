//! Network configuration, the initial W-state probe, and the reduction of the
//! stroboscopic state to relative phases for the two sensing cases.

use std::f64::consts::PI;
use std::fmt;

use crate::dynamics::BranchState;
use crate::error::{Error, Result};
use crate::C64;

/// Full description of an `N`-node network in dimensionless units.
///
/// Couplings and drivings are scaled by the mechanical frequency
/// (`k_j = k̃_j / Ω`, `E_j = Ẽ_j / Ω`), and `lambda`/`lambda_prime` are the two
/// eigenvalues of the local operator that the W state superposes.
#[derive(Clone, Debug, PartialEq)]
pub struct NetworkConfig {
    n_nodes: usize,
    lambda: f64,
    lambda_prime: f64,
    couplings: Vec<f64>,
    drivings: Vec<f64>,
    alpha: C64,
}

impl NetworkConfig {
    pub fn new(
        n_nodes: usize,
        lambda: f64,
        lambda_prime: f64,
        couplings: Vec<f64>,
        drivings: Vec<f64>,
        alpha: C64,
    ) -> Result<Self> {
        if n_nodes < 2 {
            return Err(Error::ConfigInvalid(format!(
                "n_nodes must be at least 2, got {n_nodes}"
            )));
        }
        if couplings.len() != n_nodes {
            return Err(Error::ConfigInvalid(format!(
                "expected {n_nodes} couplings, got {}",
                couplings.len()
            )));
        }
        if drivings.len() != n_nodes {
            return Err(Error::ConfigInvalid(format!(
                "expected {n_nodes} drivings, got {}",
                drivings.len()
            )));
        }
        let all_finite = [lambda, lambda_prime, alpha.re, alpha.im]
            .iter()
            .chain(couplings.iter())
            .chain(drivings.iter())
            .all(|x| x.is_finite());
        if !all_finite {
            return Err(Error::ConfigInvalid("all parameters must be finite".into()));
        }
        if lambda == lambda_prime {
            return Err(Error::ConfigInvalid(
                "lambda must differ from lambda_prime".into(),
            ));
        }
        Ok(Self { n_nodes, lambda, lambda_prime, couplings, drivings, alpha })
    }

    /// Network with identical coupling `k` at every node (the Case 1 setting).
    pub fn uniform_coupling(
        lambda: f64,
        lambda_prime: f64,
        k: f64,
        drivings: Vec<f64>,
        alpha: C64,
    ) -> Result<Self> {
        let n = drivings.len();
        Self::new(n, lambda, lambda_prime, vec![k; n], drivings, alpha)
    }

    /// Undriven network with per-node couplings (the Case 2 setting).
    pub fn undriven(
        lambda: f64,
        lambda_prime: f64,
        couplings: Vec<f64>,
        alpha: C64,
    ) -> Result<Self> {
        let n = couplings.len();
        Self::new(n, lambda, lambda_prime, couplings, vec![0.0; n], alpha)
    }

    pub fn n_nodes(&self) -> usize {
        self.n_nodes
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn lambda_prime(&self) -> f64 {
        self.lambda_prime
    }

    pub fn couplings(&self) -> &[f64] {
        &self.couplings
    }

    pub fn drivings(&self) -> &[f64] {
        &self.drivings
    }

    pub fn alpha(&self) -> C64 {
        self.alpha
    }

    /// Copy of this configuration with a different driving vector.
    pub fn with_drivings(&self, drivings: Vec<f64>) -> Result<Self> {
        Self::new(
            self.n_nodes,
            self.lambda,
            self.lambda_prime,
            self.couplings.clone(),
            drivings,
            self.alpha,
        )
    }

    /// Copy of this configuration with a different initial coherent amplitude.
    pub fn with_alpha(&self, alpha: C64) -> Result<Self> {
        Self::new(
            self.n_nodes,
            self.lambda,
            self.lambda_prime,
            self.couplings.clone(),
            self.drivings.clone(),
            alpha,
        )
    }

    /// Eigenvalue seen by mode `mode` on the branch where node `branch`
    /// carries `lambda`.
    pub(crate) fn eigenvalue(&self, branch: usize, mode: usize) -> f64 {
        if branch == mode {
            self.lambda
        } else {
            self.lambda_prime
        }
    }

    /// Net drive `k_m Ξ - E_m` on mode `mode` in branch `branch`.
    pub(crate) fn drive(&self, branch: usize, mode: usize) -> f64 {
        self.couplings[mode] * self.eigenvalue(branch, mode) - self.drivings[mode]
    }

    pub(crate) fn check_node(&self, node: usize) -> Result<()> {
        if node >= self.n_nodes {
            return Err(Error::IndexOutOfRange {
                index: node,
                valid: format!("0..{}", self.n_nodes),
            });
        }
        Ok(())
    }
}

/// Which relative parameters the network estimates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Case {
    /// Equal couplings, unknown drivings: `Φ_j = E_1 - E_j`.
    Case1,
    /// Zero drivings, unknown couplings: `Φ_j = k_1 - k_j`.
    Case2,
}

impl fmt::Display for Case {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Case::Case1 => write!(f, "1"),
            Case::Case2 => write!(f, "2"),
        }
    }
}

/// Relative-phase reduction `{β_j, Φ_j}` of a stroboscopic state.
///
/// Entry `p` of `betas` and `phis` belongs to node `p + 1`; the reference node
/// carries no parameter.
#[derive(Clone, Debug, PartialEq)]
pub struct PhaseSet {
    case: Case,
    betas: Vec<f64>,
    phis: Vec<f64>,
    k_plus: Option<Vec<f64>>,
}

impl PhaseSet {
    pub fn new(case: Case, betas: Vec<f64>, phis: Vec<f64>) -> Result<Self> {
        if betas.is_empty() {
            return Err(Error::ConfigInvalid(
                "a phase set needs at least one parameter".into(),
            ));
        }
        if betas.len() != phis.len() {
            return Err(Error::DimensionMismatch {
                expected: betas.len(),
                found: phis.len(),
            });
        }
        if let Some(index) = betas.iter().position(|b| *b == 0.0 || !b.is_finite()) {
            return Err(Error::SingularBeta { index });
        }
        if case == Case::Case1 {
            let b0 = betas[0];
            if betas.iter().any(|b| (b - b0).abs() > 1e-12 * b0.abs()) {
                return Err(Error::CaseConditionViolated(
                    "Case 1 requires the same phase prefactor at every node".into(),
                ));
            }
        }
        Ok(Self { case, betas, phis, k_plus: None })
    }

    pub fn case(&self) -> Case {
        self.case
    }

    pub fn betas(&self) -> &[f64] {
        &self.betas
    }

    pub fn phis(&self) -> &[f64] {
        &self.phis
    }

    /// `k_1 + k_j` for every parameter node; only set for Case 2.
    pub fn k_plus(&self) -> Option<&[f64]> {
        self.k_plus.as_deref()
    }

    /// Number of parameters, `N - 1`.
    pub fn dim(&self) -> usize {
        self.betas.len()
    }

    pub fn n_nodes(&self) -> usize {
        self.betas.len() + 1
    }

    /// Same prefactors with the parameters replaced.
    pub fn with_phis(&self, phis: Vec<f64>) -> Result<Self> {
        let mut out = Self::new(self.case, self.betas.clone(), phis)?;
        out.k_plus = self.k_plus.clone();
        Ok(out)
    }

    /// Normalised branch coefficients `(1, e^{iβ_2Φ_2}, …)/√N`.
    pub fn state(&self) -> Vec<C64> {
        phase_state(&self.betas, &self.phis)
    }

    pub(crate) fn check_param(&self, p: usize) -> Result<()> {
        if p >= self.dim() {
            return Err(Error::IndexOutOfRange {
                index: p,
                valid: format!("0..{}", self.dim()),
            });
        }
        Ok(())
    }
}

/// Branch coefficients `(1, e^{iβ_2Φ_2}, …, e^{iβ_NΦ_N})/√N`.
pub fn phase_state(betas: &[f64], phis: &[f64]) -> Vec<C64> {
    let norm = 1.0 / ((betas.len() + 1) as f64).sqrt();
    std::iter::once(C64::new(norm, 0.0))
        .chain(
            betas
                .iter()
                .zip(phis)
                .map(|(b, p)| C64::from_polar(norm, b * p)),
        )
        .collect()
}

/// `|W_N⟩ ⊗ |α⟩^{⊗N}` in branch form.
pub fn build_initial_state(config: &NetworkConfig) -> BranchState {
    let n = config.n_nodes();
    let c = C64::new(1.0 / (n as f64).sqrt(), 0.0);
    BranchState::from_parts(vec![c; n], vec![config.alpha(); n * n], 0.0)
}

/// Prefactors and parameters of the stroboscopic state for the chosen case.
pub fn case_phases(config: &NetworkConfig, case: Case) -> Result<PhaseSet> {
    let k = config.couplings();
    let e = config.drivings();
    let (lam, lamp) = (config.lambda(), config.lambda_prime());
    let n = config.n_nodes();
    match case {
        Case::Case1 => {
            let k0 = k[0];
            if k.iter().any(|kj| (kj - k0).abs() > 1e-12 * k0.abs().max(f64::MIN_POSITIVE)) {
                return Err(Error::CaseConditionViolated(
                    "Case 1 requires equal couplings at every node".into(),
                ));
            }
            if k0 == 0.0 {
                return Err(Error::SingularBeta { index: 0 });
            }
            let beta = 4.0 * PI * k0 * (lam - lamp);
            let betas = vec![beta; n - 1];
            let phis = (1..n).map(|j| e[0] - e[j]).collect();
            PhaseSet::new(Case::Case1, betas, phis)
        }
        Case::Case2 => {
            if e.iter().any(|ej| *ej != 0.0) {
                return Err(Error::CaseConditionViolated(
                    "Case 2 requires zero driving at every node".into(),
                ));
            }
            let sum = lam + lamp;
            if sum.abs() <= 4.0 * f64::EPSILON * (lam.abs() + lamp.abs()) {
                return Err(Error::SingularBeta { index: 0 });
            }
            let mut betas = Vec::with_capacity(n - 1);
            let mut k_plus = Vec::with_capacity(n - 1);
            for j in 1..n {
                let kp = k[0] + k[j];
                if kp.abs() <= 4.0 * f64::EPSILON * (k[0].abs() + k[j].abs()) {
                    return Err(Error::SingularBeta { index: j - 1 });
                }
                k_plus.push(kp);
                betas.push(2.0 * PI * kp * (lamp - lam) * sum);
            }
            let phis = (1..n).map(|j| k[0] - k[j]).collect();
            let mut set = PhaseSet::new(Case::Case2, betas, phis)?;
            set.k_plus = Some(k_plus);
            Ok(set)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn initial_state_is_uniform_w_state() {
        let cfg = NetworkConfig::new(2, 1.0, 0.0, vec![0.1, 0.2], vec![0.0, 0.0], c(0.0)).unwrap();
        let s = build_initial_state(&cfg);
        for cj in s.coefficients() {
            assert_eq!(*cj, c(1.0 / 2f64.sqrt()));
        }
        assert!(s.amplitudes().iter().all(|a| *a == c(0.0)));

        let cfg = NetworkConfig::uniform_coupling(1.0, 0.0, 1.0, vec![0.0; 3], c(1.0)).unwrap();
        let s = build_initial_state(&cfg);
        assert!(s.coefficients().iter().all(|cj| *cj == c(1.0 / 3f64.sqrt())));
        assert!(s.amplitudes().iter().all(|a| *a == c(1.0)));
        assert_relative_eq!(s.norm_sqr(), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn config_validation() {
        let bad_n = NetworkConfig::new(1, 1.0, 0.0, vec![1.0], vec![0.0], c(0.0));
        assert!(matches!(bad_n, Err(Error::ConfigInvalid(_))));
        let bad_len = NetworkConfig::new(3, 1.0, 0.0, vec![1.0; 2], vec![0.0; 3], c(0.0));
        assert!(matches!(bad_len, Err(Error::ConfigInvalid(_))));
        let equal = NetworkConfig::new(2, 0.5, 0.5, vec![1.0; 2], vec![0.0; 2], c(0.0));
        assert!(matches!(equal, Err(Error::ConfigInvalid(_))));
    }

    #[test]
    fn case1_phases() {
        let cfg =
            NetworkConfig::uniform_coupling(1.0, 0.0, 1.0, vec![0.5, 0.2, 0.1], c(0.0)).unwrap();
        let ph = case_phases(&cfg, Case::Case1).unwrap();
        assert_eq!(ph.betas(), &[4.0 * PI, 4.0 * PI]);
        assert_relative_eq!(ph.phis()[0], 0.3, epsilon = 1e-15);
        assert_relative_eq!(ph.phis()[1], 0.4, epsilon = 1e-15);
        assert!(ph.k_plus().is_none());
    }

    #[test]
    fn case2_phases() {
        let cfg = NetworkConfig::undriven(1.0, 0.0, vec![1.0, 0.8, 0.6], c(0.0)).unwrap();
        let ph = case_phases(&cfg, Case::Case2).unwrap();
        assert_relative_eq!(ph.betas()[0], -3.6 * PI, epsilon = 1e-13);
        assert_relative_eq!(ph.betas()[1], -3.2 * PI, epsilon = 1e-13);
        assert_relative_eq!(ph.phis()[0], 0.2, epsilon = 1e-15);
        assert_relative_eq!(ph.k_plus().unwrap()[0], 1.8, epsilon = 1e-15);
    }

    #[test]
    fn spin_half_case2_is_singular() {
        let cfg = NetworkConfig::undriven(0.5, -0.5, vec![1.0, 0.8], c(0.0)).unwrap();
        assert!(matches!(
            case_phases(&cfg, Case::Case2),
            Err(Error::SingularBeta { .. })
        ));
    }

    #[test]
    fn case_preconditions() {
        let mixed = NetworkConfig::new(2, 1.0, 0.0, vec![1.0, 0.9], vec![0.1, 0.0], c(0.0)).unwrap();
        assert!(matches!(
            case_phases(&mixed, Case::Case1),
            Err(Error::CaseConditionViolated(_))
        ));
        assert!(matches!(
            case_phases(&mixed, Case::Case2),
            Err(Error::CaseConditionViolated(_))
        ));
    }

    #[test]
    fn case1_beta_scales_with_eigenvalue_gap() {
        let a = NetworkConfig::uniform_coupling(1.0, 0.0, 0.7, vec![0.1, 0.3], c(0.0)).unwrap();
        let b = NetworkConfig::uniform_coupling(2.0, 0.0, 0.7, vec![0.1, 0.3], c(0.0)).unwrap();
        let pa = case_phases(&a, Case::Case1).unwrap();
        let pb = case_phases(&b, Case::Case1).unwrap();
        assert_relative_eq!(pb.betas()[0], 2.0 * pa.betas()[0], epsilon = 1e-14);
    }

    #[test]
    fn case2_beta_sign() {
        for &(lam, lamp) in &[(1.0, 0.0), (-1.0, 0.0), (2.0, 1.0), (0.5, -1.5)] {
            let cfg = NetworkConfig::undriven(lam, lamp, vec![0.4, -0.9, 0.3], c(0.0)).unwrap();
            let ph = case_phases(&cfg, Case::Case2).unwrap();
            let kp = ph.k_plus().unwrap();
            for (b, kpj) in ph.betas().iter().zip(kp) {
                let expected = ((lamp - lam) * (lam + lamp) * kpj).signum();
                assert_eq!(b.signum(), expected);
            }
        }
    }

    #[test]
    fn phase_set_rejects_zero_beta() {
        assert!(matches!(
            PhaseSet::new(Case::Case2, vec![1.0, 0.0], vec![0.0, 0.0]),
            Err(Error::SingularBeta { index: 1 })
        ));
    }
}
