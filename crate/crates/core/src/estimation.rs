//! Quantum Fisher information of the stroboscopic probe.
//!
//! The analytic matrix, its Sherman–Morrison inverse and the scalar trace bound
//! are the production path. [`qfim_numeric`] rebuilds the same matrix from
//! finite differences of an independently constructed state.

use std::fmt;

use nalgebra::{DMatrix, SymmetricEigen};

use crate::dynamics::evolve;
use crate::error::{Error, Result};
use crate::probe::{phase_state, Case, NetworkConfig, PhaseSet};
use crate::C64;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FisherKind {
    Quantum,
    Classical,
}

impl fmt::Display for FisherKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FisherKind::Quantum => write!(f, "quantum"),
            FisherKind::Classical => write!(f, "classical"),
        }
    }
}

/// Real symmetric positive semidefinite information matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct FisherMatrix {
    kind: FisherKind,
    entries: DMatrix<f64>,
}

impl FisherMatrix {
    /// Validates symmetry and positive semidefiniteness. Both tolerances are
    /// relative to the largest entry (floored at 1) so that platforms with
    /// prefactors of order 10⁶ are judged on the same footing as unit ones.
    pub fn new(kind: FisherKind, entries: DMatrix<f64>) -> Result<Self> {
        if !entries.is_square() {
            return Err(Error::DimensionMismatch { expected: entries.nrows(), found: entries.ncols() });
        }
        if entries.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidFisherMatrix("non-finite entry".into()));
        }
        let scale = entries.amax().max(1.0);
        let n = entries.nrows();
        for i in 0..n {
            for j in i + 1..n {
                if (entries[(i, j)] - entries[(j, i)]).abs() > 1e-12 * scale {
                    return Err(Error::InvalidFisherMatrix(format!("asymmetric at ({i}, {j})")));
                }
            }
        }
        let out = Self { kind, entries };
        let min = out.eigenvalues().into_iter().fold(f64::INFINITY, f64::min);
        if min < -1e-10 * scale {
            return Err(Error::InvalidFisherMatrix(format!("negative eigenvalue {min:e}")));
        }
        Ok(out)
    }

    /// Averages the matrix with its transpose before validating; used for
    /// numerically assembled matrices.
    pub(crate) fn symmetrized(kind: FisherKind, entries: DMatrix<f64>) -> Result<Self> {
        let sym = (&entries + entries.transpose()) * 0.5;
        Self::new(kind, sym)
    }

    pub fn kind(&self) -> FisherKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[(i, j)]
    }

    pub fn trace(&self) -> f64 {
        self.entries.trace()
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = SymmetricEigen::new(self.entries.clone()).eigenvalues.iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    /// Inverse through a Cholesky factorisation.
    pub fn inverse(&self) -> Result<DMatrix<f64>> {
        let chol = self
            .entries
            .clone()
            .cholesky()
            .ok_or_else(|| Error::InvalidFisherMatrix("matrix is singular".into()))?;
        Ok(chol.inverse())
    }

    pub fn trace_inverse(&self) -> Result<f64> {
        Ok(self.inverse()?.trace())
    }

    /// Smallest eigenvalue of `other - self`; non-negative when `self ≼ other`.
    pub fn loewner_gap(&self, other: &FisherMatrix) -> Result<f64> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: other.dim() });
        }
        let diff = other.entries() - self.entries();
        Ok(SymmetricEigen::new(diff).eigenvalues.iter().copied().fold(f64::INFINITY, f64::min))
    }

    /// Largest elementwise difference relative to the largest entry of `reference`.
    pub fn relative_error(&self, reference: &FisherMatrix) -> f64 {
        (self.entries() - reference.entries()).amax() / reference.entries().amax()
    }
}

/// `Q = (4/N) diag(β²) - (4/N²) ββᵀ`.
pub fn qfim_analytic(phases: &PhaseSet) -> Result<FisherMatrix> {
    let b = phases.betas();
    let n = phases.n_nodes() as f64;
    let d = phases.dim();
    let m = DMatrix::from_fn(d, d, |i, j| {
        let diag = if i == j { 4.0 * b[i] * b[i] / n } else { 0.0 };
        diag - 4.0 * b[i] * b[j] / (n * n)
    });
    FisherMatrix::new(FisherKind::Quantum, m)
}

/// `[Q⁻¹]_ij = (N/4)(δ_ij/β_i² + 1/(β_iβ_j))`.
pub fn qfim_inverse(phases: &PhaseSet) -> Result<FisherMatrix> {
    let b = phases.betas();
    let n = phases.n_nodes() as f64;
    let d = phases.dim();
    let m = DMatrix::from_fn(d, d, |i, j| {
        let diag = if i == j { 1.0 / (b[i] * b[i]) } else { 0.0 };
        0.25 * n * (diag + 1.0 / (b[i] * b[j]))
    });
    FisherMatrix::new(FisherKind::Quantum, m)
}

/// `Tr Q⁻¹ = (N/2) Σ_j β_j⁻²`.
pub fn trace_inverse_qfim(phases: &PhaseSet) -> f64 {
    0.5 * phases.n_nodes() as f64 * phases.betas().iter().map(|b| 1.0 / (b * b)).sum::<f64>()
}

/// `[Q]_jj = 4β_j²(N-1)/N²`.
pub fn single_param_qfi(phases: &PhaseSet, param: usize) -> Result<f64> {
    phases.check_param(param)?;
    let n = phases.n_nodes() as f64;
    let b = phases.betas()[param];
    Ok(4.0 * b * b * (n - 1.0) / (n * n))
}

/// `Var[Φ_j] ≥ N / (2 β_j² μ)` when every other parameter is unknown.
pub fn nuisance_variance_bound(phases: &PhaseSet, param: usize, mu: u64) -> Result<f64> {
    phases.check_param(param)?;
    if mu == 0 {
        return Err(Error::NonPositiveInput("repetitions"));
    }
    let b = phases.betas()[param];
    Ok(phases.n_nodes() as f64 / (2.0 * b * b * mu as f64))
}

/// Pure-state QFIM `4 Re(⟨∂_iψ|∂_jψ⟩ - ⟨∂_iψ|ψ⟩⟨ψ|∂_jψ⟩)` with derivatives
/// taken by central differences of `state` around `params`.
///
/// `steps[i]` is the step for parameter `i`. With `richardson` set, the
/// estimate is extrapolated from steps `h` and `h/2`.
pub fn pure_state_qfim<F>(state: F, params: &[f64], steps: &[f64], richardson: bool) -> Result<FisherMatrix>
where
    F: Fn(&[f64]) -> Vec<C64>,
{
    if params.len() != steps.len() {
        return Err(Error::DimensionMismatch { expected: params.len(), found: steps.len() });
    }
    let coarse = central_qfim(&state, params, steps);
    let entries = if richardson {
        let half: Vec<f64> = steps.iter().map(|h| 0.5 * h).collect();
        let fine = central_qfim(&state, params, &half);
        (fine * 4.0 - coarse) / 3.0
    } else {
        coarse
    };
    FisherMatrix::symmetrized(FisherKind::Quantum, entries)
}

fn central_qfim<F>(state: &F, params: &[f64], steps: &[f64]) -> DMatrix<f64>
where
    F: Fn(&[f64]) -> Vec<C64>,
{
    let psi = state(params);
    let d = params.len();
    let derivs: Vec<Vec<C64>> = (0..d)
        .map(|i| {
            let mut p = params.to_vec();
            p[i] = params[i] + steps[i];
            let plus = state(&p);
            p[i] = params[i] - steps[i];
            let minus = state(&p);
            plus.iter().zip(&minus).map(|(a, b)| (a - b) / (2.0 * steps[i])).collect()
        })
        .collect();
    let overlaps: Vec<C64> = derivs.iter().map(|d| inner(d, &psi)).collect();
    DMatrix::from_fn(d, d, |i, j| {
        4.0 * (inner(&derivs[i], &derivs[j]) - overlaps[i] * overlaps[j].conj()).re
    })
}

/// `⟨a|b⟩`.
pub(crate) fn inner(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// Finite-difference QFIM of the stroboscopic state with step
/// `epsilon / max|β_j|`.
///
/// Case 1 varies the drivings (`E_j = E_1 - Φ_j`) and propagates them through
/// the full closed-form evolution to `τ = 2π`, so it does not share code with
/// [`qfim_analytic`]. Case 2 differentiates the phase-tagged W state with the
/// prefactors held fixed.
pub fn qfim_numeric(config: &NetworkConfig, case: Case, epsilon: f64) -> Result<FisherMatrix> {
    qfim_numeric_with(config, case, epsilon, false)
}

pub fn qfim_numeric_with(config: &NetworkConfig, case: Case, epsilon: f64, richardson: bool) -> Result<FisherMatrix> {
    if !(epsilon >= 1e-9) {
        return Err(Error::StepTooSmall(epsilon));
    }
    let phases = crate::probe::case_phases(config, case)?;
    let scale = phases.betas().iter().fold(0.0f64, |m, b| m.max(b.abs()));
    let steps = vec![epsilon / scale; phases.dim()];
    match case {
        Case::Case1 => {
            let e0 = config.drivings()[0];
            let alpha = config.alpha();
            let state = |phis: &[f64]| {
                let drivings = std::iter::once(e0).chain(phis.iter().map(|p| e0 - p)).collect();
                let cfg = config.with_drivings(drivings).expect("finite drivings");
                let st = evolve(&cfg, std::f64::consts::TAU);
                debug_assert!(st.amplitudes().iter().all(|a| (a - alpha).norm() < 1e-9));
                st.coefficients().to_vec()
            };
            pure_state_qfim(state, phases.phis(), &steps, richardson)
        }
        Case::Case2 => {
            let betas = phases.betas().to_vec();
            let state = |phis: &[f64]| phase_state(&betas, phis);
            pure_state_qfim(state, phases.phis(), &steps, richardson)
        }
    }
}
