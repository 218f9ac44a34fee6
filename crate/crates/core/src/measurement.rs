//! Measurements on the node subsystems after the stroboscopic return.
//!
//! The multiparameter measurement is a projective basis made of the
//! phase-tagged uniform superposition and its Gram–Schmidt complement. The
//! single-parameter measurement is the eigenbasis of the symmetric logarithmic
//! derivative.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::estimation::{inner, FisherKind, FisherMatrix};
use crate::probe::{phase_state, PhaseSet};
use crate::C64;

/// Rank-one projective measurement on the `N`-dimensional branch space.
///
/// Vector `0` is the tagged superposition `|Σ⟩`; vector `m ≥ 1` is supported on
/// nodes `0..=m`.
#[derive(Clone, Debug, PartialEq)]
pub struct ProjectorSet {
    vectors: Vec<Vec<C64>>,
    reference_phases: Vec<f64>,
}

impl ProjectorSet {
    /// Checks orthonormality and completeness to 1e-12.
    pub fn new(vectors: Vec<Vec<C64>>, reference_phases: Vec<f64>) -> Result<Self> {
        let n = vectors.len();
        if let Some(bad) = vectors.iter().find(|v| v.len() != n) {
            return Err(Error::DimensionMismatch { expected: n, found: bad.len() });
        }
        let set = Self { vectors, reference_phases };
        let err = set.orthonormality_error().max(set.completeness_error());
        if err > 1e-12 {
            return Err(Error::Inconsistent(format!("projectors deviate from an orthonormal basis by {err:e}")));
        }
        Ok(set)
    }

    pub fn dim(&self) -> usize {
        self.vectors.len()
    }

    pub fn vectors(&self) -> &[Vec<C64>] {
        &self.vectors
    }

    pub fn vector(&self, outcome: usize) -> &[C64] {
        &self.vectors[outcome]
    }

    pub fn reference_phases(&self) -> &[f64] {
        &self.reference_phases
    }

    /// `max_ab |⟨u_a|u_b⟩ - δ_ab|`.
    pub fn orthonormality_error(&self) -> f64 {
        let n = self.dim();
        let mut worst = 0.0f64;
        for a in 0..n {
            for b in 0..n {
                let target = if a == b { 1.0 } else { 0.0 };
                worst = worst.max((inner(&self.vectors[a], &self.vectors[b]) - target).norm());
            }
        }
        worst
    }

    /// `max |Σ_a |u_a⟩⟨u_a| - I|` elementwise.
    pub fn completeness_error(&self) -> f64 {
        let n = self.dim();
        let mut worst = 0.0f64;
        for r in 0..n {
            for c in 0..n {
                let s: C64 = self.vectors.iter().map(|v| v[r] * v[c].conj()).sum();
                let target = if r == c { 1.0 } else { 0.0 };
                worst = worst.max((s - target).norm());
            }
        }
        worst
    }

    /// Outcome amplitudes `⟨u_a|ψ⟩`.
    pub fn amplitudes(&self, state: &[C64]) -> Result<Vec<C64>> {
        if state.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: state.len() });
        }
        Ok(self.vectors.iter().map(|u| inner(u, state)).collect())
    }
}

/// Tagged superposition plus its Gram–Schmidt complement.
///
/// The complement is obtained by orthogonalising the tagged node vectors
/// `e^{iβ_jϑ_j}|j⟩` against `|Σ⟩` starting from the last node, which yields
/// `u_m ∝ m·t_m|m⟩ - Σ_{j<m} t_j|j⟩` and reproduces the three-node basis
/// `(−1,1,0)/√2`, `(−1,−1,2)/√6`.
pub fn gram_schmidt_basis(n_nodes: usize, betas: &[f64], reference_phases: &[f64]) -> Result<ProjectorSet> {
    if n_nodes < 2 {
        return Err(Error::ConfigInvalid("a basis needs at least two nodes".into()));
    }
    for len in [betas.len(), reference_phases.len()] {
        if len != n_nodes - 1 {
            return Err(Error::DimensionMismatch { expected: n_nodes - 1, found: len });
        }
    }
    let n = n_nodes;
    let sigma = phase_state(betas, reference_phases);
    let tags: Vec<C64> = sigma.iter().map(|c| c * (n as f64).sqrt()).collect();

    let mut done: Vec<Vec<C64>> = vec![sigma];
    let mut complement: Vec<Vec<C64>> = Vec::with_capacity(n - 1);
    for node in (1..n).rev() {
        let mut v = vec![C64::new(0.0, 0.0); n];
        v[node] = tags[node];
        // Two passes of modified Gram–Schmidt keep the basis orthonormal to
        // machine precision.
        for _ in 0..2 {
            for u in &done {
                let proj = inner(u, &v);
                for (vi, ui) in v.iter_mut().zip(u) {
                    *vi -= proj * ui;
                }
            }
        }
        let norm = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        v.iter_mut().for_each(|x| *x /= norm);
        done.push(v.clone());
        complement.push(v);
    }
    complement.reverse();
    let mut vectors = Vec::with_capacity(n);
    vectors.push(done.swap_remove(0));
    vectors.extend(complement);
    ProjectorSet::new(vectors, reference_phases.to_vec())
}

/// `p_a = |⟨u_a|ψ⟩|²`; the state must be normalised.
pub fn outcome_probabilities(basis: &ProjectorSet, state: &[C64]) -> Result<Vec<f64>> {
    let probs: Vec<f64> = basis.amplitudes(state)?.iter().map(|f| f.norm_sqr()).collect();
    let total: f64 = probs.iter().sum();
    if (total - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidDistribution(format!("probabilities sum to {total}")));
    }
    Ok(probs)
}

/// Classical Fisher information matrix of `basis` at the parameters of
/// `phases`, with amplitude derivatives taken by central differences of step
/// `epsilon / max|β_j|`.
///
/// Writing `f_x = ⟨u_x|ψ⟩`, each outcome contributes
/// `4 Re(f̂_x* ∂_i f_x) Re(f̂_x* ∂_j f_x)` with `f̂_x = f_x/|f_x|`. When `f_x`
/// vanishes the contribution is the limit along any direction, which exists
/// only if the components of `∂f_x` share a common phase.
pub fn cfim(basis: &ProjectorSet, phases: &PhaseSet, epsilon: f64) -> Result<FisherMatrix> {
    if !(epsilon >= 1e-9) {
        return Err(Error::StepTooSmall(epsilon));
    }
    if basis.dim() != phases.n_nodes() {
        return Err(Error::DimensionMismatch { expected: phases.n_nodes(), found: basis.dim() });
    }
    let betas = phases.betas();
    let phis = phases.phis();
    let d = phases.dim();
    let h = epsilon / betas.iter().fold(0.0f64, |m, b| m.max(b.abs()));

    let f0 = basis.amplitudes(&phase_state(betas, phis))?;
    let mut grads = vec![vec![C64::new(0.0, 0.0); d]; basis.dim()];
    for i in 0..d {
        let mut p = phis.to_vec();
        p[i] = phis[i] + h;
        let plus = basis.amplitudes(&phase_state(betas, &p))?;
        p[i] = phis[i] - h;
        let minus = basis.amplitudes(&phase_state(betas, &p))?;
        for x in 0..basis.dim() {
            grads[x][i] = (plus[x] - minus[x]) / (2.0 * h);
        }
    }
    fisher_from_amplitudes(&f0, &grads)
}

fn fisher_from_amplitudes(f: &[C64], grads: &[Vec<C64>]) -> Result<FisherMatrix> {
    let d = grads.first().map_or(0, Vec::len);
    let mut acc = DMatrix::<f64>::zeros(d, d);
    for (x, (fx, g)) in f.iter().zip(grads).enumerate() {
        let gscale = g.iter().fold(0.0f64, |m, z| m.max(z.norm()));
        let r: Vec<f64> = if fx.norm() > 1e-10 {
            let unit = fx / fx.norm();
            g.iter().map(|gi| (unit.conj() * gi).re).collect()
        } else if gscale == 0.0 {
            continue;
        } else {
            let lead = g.iter().copied().max_by(|a, b| a.norm().total_cmp(&b.norm())).unwrap();
            let unit = lead / lead.norm();
            let rotated: Vec<C64> = g.iter().map(|gi| unit.conj() * gi).collect();
            if rotated.iter().any(|z| z.im.abs() > 1e-6 * gscale) {
                return Err(Error::DegenerateProbability { outcome: x });
            }
            rotated.iter().map(|z| z.re).collect()
        };
        for i in 0..d {
            for j in 0..d {
                acc[(i, j)] += 4.0 * r[i] * r[j];
            }
        }
    }
    FisherMatrix::symmetrized(FisherKind::Classical, acc)
}

/// Limit of the classical Fisher information as the reference phases approach
/// the true parameters, by Richardson extrapolation along
/// `ϑ_j = Φ_j + δ·direction_j/β_j` for `δ ∈ {1e-2, 1e-3, 1e-4}`.
pub fn cfim_saturation_limit(phases: &PhaseSet, direction: &[f64], epsilon: f64) -> Result<FisherMatrix> {
    if direction.len() != phases.dim() {
        return Err(Error::DimensionMismatch { expected: phases.dim(), found: direction.len() });
    }
    let at = |delta: f64| -> Result<DMatrix<f64>> {
        let refs: Vec<f64> = phases
            .phis()
            .iter()
            .zip(phases.betas())
            .zip(direction)
            .map(|((p, b), s)| p + delta * s / b)
            .collect();
        let basis = gram_schmidt_basis(phases.n_nodes(), phases.betas(), &refs)?;
        Ok(cfim(&basis, phases, epsilon)?.entries().clone())
    };
    let (f1, f2, f3) = (at(1e-2)?, at(1e-3)?, at(1e-4)?);
    // The error is even in δ; eliminate the δ² term, then the δ⁴ term.
    let r12 = (&f2 * 100.0 - &f1) / 99.0;
    let r23 = (&f3 * 100.0 - &f2) / 99.0;
    let limit = (r23 * 1e4 - r12) / (1e4 - 1.0);
    FisherMatrix::symmetrized(FisherKind::Classical, limit)
}

/// Explicit SLD `L_k = 2(|∂_kψ⟩⟨ψ| + |ψ⟩⟨∂_kψ|)` for parameter `param`,
/// as an `N×N` matrix over the branch basis.
pub fn sld_matrix(phases: &PhaseSet, param: usize) -> Result<DMatrix<C64>> {
    phases.check_param(param)?;
    let n = phases.n_nodes();
    let node = param + 1;
    let psi = phases.state();
    let mut dpsi = vec![C64::new(0.0, 0.0); n];
    dpsi[node] = C64::new(0.0, phases.betas()[param]) * psi[node];
    Ok(DMatrix::from_fn(n, n, |r, c| 2.0 * (dpsi[r] * psi[c].conj() + psi[r] * dpsi[c].conj())))
}

/// `⟨ψ|[L_k, L_k']|ψ⟩`.
pub fn weak_commutativity(phases: &PhaseSet, k: usize, k_prime: usize) -> Result<C64> {
    let a = sld_matrix(phases, k)?;
    let b = sld_matrix(phases, k_prime)?;
    let comm = &a * &b - &b * &a;
    let psi = nalgebra::DVector::from_vec(phases.state());
    Ok((psi.adjoint() * comm * &psi)[(0, 0)])
}

/// Eigenvectors of the SLD with non-zero eigenvalues.
#[derive(Clone, Debug, PartialEq)]
pub struct SldBasis {
    pub plus: Vec<C64>,
    pub minus: Vec<C64>,
    /// `(λ₊, λ₋) = (±2β_k√(N-1)/N)`.
    pub eigenvalues: (f64, f64),
}

impl SldBasis {
    /// `(p₊, p₋)` for a normalised state; both outcomes together with the
    /// null space exhaust the probability.
    pub fn probabilities(&self, state: &[C64]) -> Result<(f64, f64)> {
        if state.len() != self.plus.len() {
            return Err(Error::DimensionMismatch { expected: self.plus.len(), found: state.len() });
        }
        Ok((inner(&self.plus, state).norm_sqr(), inner(&self.minus, state).norm_sqr()))
    }
}

/// SLD eigenbasis of parameter `param`, built at the phases of `phases` and
/// verified against the explicit SLD matrix.
pub fn sld_eigenbasis(phases: &PhaseSet, param: usize) -> Result<SldBasis> {
    let l = sld_matrix(phases, param)?;
    let n = phases.n_nodes();
    let nf = n as f64;
    let node = param + 1;
    let psi = phases.state();
    let tag = C64::from_polar(1.0, phases.betas()[param] * phases.phis()[param]);
    let scale = (nf / (nf - 1.0)).sqrt();
    let e2: Vec<C64> = (0..n)
        .map(|j| {
            let spike = if j == node { tag } else { C64::new(0.0, 0.0) };
            scale * (spike - psi[j] / nf.sqrt())
        })
        .collect();
    let i = C64::i();
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let plus: Vec<C64> = psi.iter().zip(&e2).map(|(a, b)| s * (a + i * b)).collect();
    let minus: Vec<C64> = psi.iter().zip(&e2).map(|(a, b)| s * (a - i * b)).collect();
    let lambda = 2.0 * phases.betas()[param] * (nf - 1.0).sqrt() / nf;

    for (v, ev) in [(&plus, lambda), (&minus, -lambda)] {
        let vv = nalgebra::DVector::from_vec(v.clone());
        let resid = (&l * &vv - vv * C64::new(ev, 0.0)).camax();
        if resid > 1e-10 * lambda.abs().max(1.0) {
            return Err(Error::Inconsistent(format!("SLD eigenvector residual {resid:e}")));
        }
    }
    if inner(&plus, &minus).norm() > 1e-12 {
        return Err(Error::Inconsistent("SLD eigenvectors are not orthogonal".into()));
    }
    Ok(SldBasis { plus, minus, eigenvalues: (lambda, -lambda) })
}

/// `p₊ = ½ + (√(N-1)/N) sin(β_k(Φ_k - Φ̃_k))` for the SLD basis tuned to
/// `phi_ref`.
pub fn sld_plus_probability(phases: &PhaseSet, param: usize, phi_ref: f64, phi_true: f64) -> Result<f64> {
    phases.check_param(param)?;
    let n = phases.n_nodes() as f64;
    let x = phases.betas()[param] * (phi_true - phi_ref);
    Ok(0.5 + (n - 1.0).sqrt() / n * x.sin())
}

/// `4β_k²(N-1)cos²x / (N² - 4(N-1)sin²x)` with `x = β_k(Φ̃_k - Φ_k)`.
pub fn single_param_cfi(phases: &PhaseSet, param: usize, phi_ref: f64, phi_true: f64) -> Result<f64> {
    phases.check_param(param)?;
    let n = phases.n_nodes() as f64;
    let b = phases.betas()[param];
    let x = b * (phi_ref - phi_true);
    let (s, c) = x.sin_cos();
    Ok(4.0 * b * b * (n - 1.0) * c * c / (n * n - 4.0 * (n - 1.0) * s * s))
}
