//! Truncated-Fock reference implementation.
//!
//! The Hamiltonian never couples different W-state branches, and inside branch
//! `j` it is a sum of commuting single-mode terms `b†b - c_jm (b + b†)` with
//! `c_jm = k_m Ξ - E_m`. [`evolve_numeric`] exponentiates each truncated
//! single-mode matrix by eigendecomposition and assembles the branch vectors by
//! Kronecker products, which is exactly `exp(-iHτ)` on the truncated space.
//! [`evolve_numeric_dense`] instead diagonalises every full branch block and is
//! kept as a cross-check for small truncations.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::dynamics::BranchState;
use crate::error::{Error, Result};
use crate::probe::NetworkConfig;
use crate::C64;

/// Largest `N·D^N` accepted by the constructors in this module.
pub const DEFAULT_DIMENSION_CAP: usize = 2_000_000;

/// Largest branch block diagonalised by [`evolve_numeric_dense`].
pub const DENSE_BLOCK_CAP: usize = 4096;

const TAIL_LIMIT: f64 = 1e-8;

/// Single-mode matrix `b†b - drive (b + b†)` on Fock levels `0..fock_dim`.
pub fn mode_hamiltonian(drive: f64, fock_dim: usize) -> DMatrix<f64> {
    let mut h = DMatrix::zeros(fock_dim, fock_dim);
    for n in 0..fock_dim {
        h[(n, n)] = n as f64;
        if n + 1 < fock_dim {
            let off = -drive * ((n + 1) as f64).sqrt();
            h[(n, n + 1)] = off;
            h[(n + 1, n)] = off;
        }
    }
    h
}

fn total_dimension(n_nodes: usize, fock_dim: usize, cap: usize) -> Result<usize> {
    let too_large = || Error::DimensionTooLarge { dim: usize::MAX, cap };
    let block = u32::try_from(n_nodes).ok().and_then(|n| fock_dim.checked_pow(n)).ok_or_else(too_large)?;
    let dim = block.checked_mul(n_nodes).ok_or_else(too_large)?;
    if dim > cap {
        return Err(Error::DimensionTooLarge { dim, cap });
    }
    Ok(dim)
}

fn check_fock_dim(fock_dim: usize) -> Result<()> {
    if fock_dim < 4 {
        return Err(Error::ConfigInvalid(format!("Fock truncation {fock_dim} is below the minimum of 4")));
    }
    Ok(())
}

/// Real symmetric Hamiltonian in compressed-row form over the
/// branch ⊗ Fock basis.
///
/// Index layout: `branch · D^N + Σ_m n_m · D^(N-1-m)`.
#[derive(Clone, Debug)]
pub struct SparseHamiltonian {
    dim: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    values: Vec<f64>,
}

impl SparseHamiltonian {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        let range = self.row_ptr[row]..self.row_ptr[row + 1];
        match self.cols[range.clone()].binary_search(&col) {
            Ok(pos) => self.values[range.start + pos],
            Err(_) => 0.0,
        }
    }

    pub fn apply(&self, v: &[C64]) -> Result<Vec<C64>> {
        if v.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: v.len() });
        }
        Ok((0..self.dim)
            .map(|r| (self.row_ptr[r]..self.row_ptr[r + 1]).map(|p| v[self.cols[p]] * self.values[p]).sum())
            .collect())
    }

    /// `max |H_rc - H_cr|`.
    pub fn hermiticity_error(&self) -> f64 {
        let mut worst = 0.0f64;
        for r in 0..self.dim {
            for p in self.row_ptr[r]..self.row_ptr[r + 1] {
                worst = worst.max((self.values[p] - self.get(self.cols[p], r)).abs());
            }
        }
        worst
    }

    pub fn to_dense(&self) -> Result<DMatrix<f64>> {
        if self.dim > DENSE_BLOCK_CAP {
            return Err(Error::DimensionTooLarge { dim: self.dim, cap: DENSE_BLOCK_CAP });
        }
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for r in 0..self.dim {
            for p in self.row_ptr[r]..self.row_ptr[r + 1] {
                m[(r, self.cols[p])] = self.values[p];
            }
        }
        Ok(m)
    }
}

/// `Σ_j H_j / (Ωħ)` restricted to the W-state branches, truncated at
/// `fock_dim` levels per mode.
pub fn hamiltonian_matrix(config: &NetworkConfig, fock_dim: usize) -> Result<SparseHamiltonian> {
    hamiltonian_matrix_capped(config, fock_dim, DEFAULT_DIMENSION_CAP)
}

pub fn hamiltonian_matrix_capped(config: &NetworkConfig, fock_dim: usize, cap: usize) -> Result<SparseHamiltonian> {
    check_fock_dim(fock_dim)?;
    let n = config.n_nodes();
    let dim = total_dimension(n, fock_dim, cap)?;
    let block = dim / n;
    let strides: Vec<usize> = (0..n).map(|m| fock_dim.pow((n - 1 - m) as u32)).collect();

    let mut row_ptr = Vec::with_capacity(dim + 1);
    let mut cols = Vec::with_capacity(dim * (2 * n + 1));
    let mut values = Vec::with_capacity(dim * (2 * n + 1));
    row_ptr.push(0);
    let mut levels = vec![0usize; n];
    for row in 0..dim {
        let branch = row / block;
        let local = row % block;
        for (m, s) in strides.iter().enumerate() {
            levels[m] = (local / s) % fock_dim;
        }
        let mut entries: Vec<(usize, f64)> = Vec::with_capacity(2 * n + 1);
        entries.push((row, levels.iter().sum::<usize>() as f64));
        for m in 0..n {
            let drive = config.drive(branch, m);
            if drive == 0.0 {
                continue;
            }
            let l = levels[m];
            if l > 0 {
                entries.push((row - strides[m], -drive * (l as f64).sqrt()));
            }
            if l + 1 < fock_dim {
                entries.push((row + strides[m], -drive * ((l + 1) as f64).sqrt()));
            }
        }
        entries.sort_by_key(|e| e.0);
        for (c, v) in entries {
            cols.push(c);
            values.push(v);
        }
        row_ptr.push(cols.len());
    }
    Ok(SparseHamiltonian { dim, row_ptr, cols, values })
}

/// Truncated coherent state `e^{-|a|²/2} Σ_n aⁿ/√n! |n⟩`, coefficients built
/// from log-factorials.
pub fn coherent_vector(a: C64, fock_dim: usize) -> Vec<C64> {
    let mut out = vec![C64::new(0.0, 0.0); fock_dim];
    if fock_dim == 0 {
        return out;
    }
    let r = a.norm();
    if r == 0.0 {
        out[0] = C64::new(1.0, 0.0);
        return out;
    }
    let (ln_r, arg) = (r.ln(), a.arg());
    let mut ln_fact = 0.0;
    for (n, slot) in out.iter_mut().enumerate() {
        if n > 0 {
            ln_fact += (n as f64).ln();
        }
        let nf = n as f64;
        *slot = C64::from_polar((-0.5 * r * r + nf * ln_r - 0.5 * ln_fact).exp(), nf * arg);
    }
    out
}

/// Network state on the truncated branch ⊗ Fock space.
#[derive(Clone, Debug, PartialEq)]
pub struct FockState {
    n_nodes: usize,
    fock_dim: usize,
    vector: Vec<C64>,
    tail_mass: f64,
}

impl FockState {
    pub fn n_nodes(&self) -> usize {
        self.n_nodes
    }

    pub fn fock_dim(&self) -> usize {
        self.fock_dim
    }

    pub fn vector(&self) -> &[C64] {
        &self.vector
    }

    /// Largest weight found in the top two Fock levels of any mode.
    pub fn tail_mass(&self) -> f64 {
        self.tail_mass
    }

    pub fn norm(&self) -> f64 {
        self.vector.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    fn block(&self) -> usize {
        self.vector.len() / self.n_nodes
    }

    fn branch(&self, j: usize) -> &[C64] {
        let b = self.block();
        &self.vector[j * b..(j + 1) * b]
    }
}

fn kron_all(factors: &[Vec<C64>]) -> Vec<C64> {
    factors.iter().fold(vec![C64::new(1.0, 0.0)], |acc, f| {
        let mut out = Vec::with_capacity(acc.len() * f.len());
        for a in &acc {
            out.extend(f.iter().map(|x| a * x));
        }
        out
    })
}

fn normalized(mut v: Vec<C64>) -> Vec<C64> {
    let norm = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    v.iter_mut().for_each(|c| *c /= norm);
    v
}

fn top_two(v: &[C64]) -> f64 {
    v.iter().rev().take(2).map(|c| c.norm_sqr()).sum()
}

/// Propagate a single mode under `b†b - drive (b + b†)` for time `tau`.
fn evolve_mode(drive: f64, v: &[C64], tau: f64) -> Vec<C64> {
    let eig = SymmetricEigen::new(mode_hamiltonian(drive, v.len()));
    let vecs = eig.eigenvectors.map(|x| C64::new(x, 0.0));
    let vin = DVector::from_column_slice(v);
    let mut coeffs = vecs.adjoint() * vin;
    for (c, e) in coeffs.iter_mut().zip(eig.eigenvalues.iter()) {
        *c *= C64::from_polar(1.0, -e * tau);
    }
    (vecs * coeffs).iter().copied().collect()
}

/// `exp(-iHτ)` applied to the truncated `|W_N⟩|α⟩^{⊗N}`.
pub fn evolve_numeric(config: &NetworkConfig, fock_dim: usize, tau: f64) -> Result<FockState> {
    check_fock_dim(fock_dim)?;
    let n = config.n_nodes();
    let dim = total_dimension(n, fock_dim, DEFAULT_DIMENSION_CAP)?;
    let start = normalized(coherent_vector(config.alpha(), fock_dim));
    let weight = C64::new(1.0 / (n as f64).sqrt(), 0.0);

    let mut vector = Vec::with_capacity(dim);
    let mut tail = top_two(&start);
    for j in 0..n {
        let modes: Vec<Vec<C64>> = (0..n).map(|m| evolve_mode(config.drive(j, m), &start, tau)).collect();
        tail = modes.iter().map(|v| top_two(v)).fold(tail, f64::max);
        vector.extend(kron_all(&modes).into_iter().map(|x| x * weight));
    }
    finish(n, fock_dim, vector, tail)
}

/// Same evolution, obtained by diagonalising each full branch block.
pub fn evolve_numeric_dense(config: &NetworkConfig, fock_dim: usize, tau: f64) -> Result<FockState> {
    check_fock_dim(fock_dim)?;
    let n = config.n_nodes();
    total_dimension(n, fock_dim, DEFAULT_DIMENSION_CAP)?;
    let block = fock_dim.pow(n as u32);
    if block > DENSE_BLOCK_CAP {
        return Err(Error::DimensionTooLarge { dim: block, cap: DENSE_BLOCK_CAP });
    }
    let start = normalized(coherent_vector(config.alpha(), fock_dim));
    let initial = kron_all(&vec![start.clone(); n]);
    let weight = 1.0 / (n as f64).sqrt();

    let mut vector = Vec::with_capacity(n * block);
    for j in 0..n {
        let mut h = DMatrix::<f64>::zeros(block, block);
        for m in 0..n {
            let left = DMatrix::<f64>::identity(fock_dim.pow(m as u32), fock_dim.pow(m as u32));
            let right = DMatrix::<f64>::identity(block / fock_dim.pow(m as u32 + 1), block / fock_dim.pow(m as u32 + 1));
            let local = mode_hamiltonian(config.drive(j, m), fock_dim);
            h += left.kronecker(&local).kronecker(&right);
        }
        let eig = SymmetricEigen::new(h);
        let vecs = eig.eigenvectors.map(|x| C64::new(x, 0.0));
        let mut coeffs = vecs.adjoint() * DVector::from_column_slice(&initial);
        for (c, e) in coeffs.iter_mut().zip(eig.eigenvalues.iter()) {
            *c *= C64::from_polar(weight, -e * tau);
        }
        vector.extend((vecs * coeffs).iter().copied());
    }
    let provisional = FockState { n_nodes: n, fock_dim, vector, tail_mass: 0.0 };
    let tail = (0..n).map(|m| mode_tail(&provisional, m)).fold(top_two(&start), f64::max);
    finish(n, fock_dim, provisional.vector, tail)
}

fn finish(n_nodes: usize, fock_dim: usize, vector: Vec<C64>, tail_mass: f64) -> Result<FockState> {
    if tail_mass >= TAIL_LIMIT {
        return Err(Error::TruncationInsufficient { tail_mass });
    }
    Ok(FockState { n_nodes, fock_dim, vector, tail_mass })
}

/// Largest, over branches, of the conditional weight of mode `mode` in its two
/// highest Fock levels.
fn mode_tail(state: &FockState, mode: usize) -> f64 {
    let d = state.fock_dim;
    let n = state.n_nodes;
    let stride = d.pow((n - 1 - mode) as u32);
    (0..n)
        .map(|j| {
            let b = state.branch(j);
            let total: f64 = b.iter().map(|c| c.norm_sqr()).sum();
            let top: f64 = b
                .iter()
                .enumerate()
                .filter(|(i, _)| (i / stride) % d >= d - 2)
                .map(|(_, c)| c.norm_sqr())
                .sum();
            top / total
        })
        .fold(0.0, f64::max)
}

/// Branch-form state expanded in the truncated Fock basis; not renormalised.
pub fn project_branch_state(state: &BranchState, fock_dim: usize) -> Result<Vec<C64>> {
    let n = state.n_nodes();
    let dim = total_dimension(n, fock_dim, DEFAULT_DIMENSION_CAP)?;
    let mut out = Vec::with_capacity(dim);
    for j in 0..n {
        let modes: Vec<Vec<C64>> = (0..n).map(|m| coherent_vector(state.amplitude(j, m), fock_dim)).collect();
        let c = state.coefficients()[j];
        out.extend(kron_all(&modes).into_iter().map(|x| x * c));
    }
    Ok(out)
}

/// `|⟨ψ_num|ψ_branch⟩|²`.
pub fn fidelity(numeric: &FockState, analytic: &BranchState) -> Result<f64> {
    if numeric.n_nodes != analytic.n_nodes() {
        return Err(Error::DimensionMismatch { expected: numeric.n_nodes, found: analytic.n_nodes() });
    }
    let proj = project_branch_state(analytic, numeric.fock_dim)?;
    let overlap: C64 = numeric.vector.iter().zip(&proj).map(|(a, b)| a.conj() * b).sum();
    Ok(overlap.norm_sqr())
}

/// `Tr ρ²` of the node subsystem after tracing out every mechanical mode.
pub fn purity_numeric(state: &FockState) -> f64 {
    let n = state.n_nodes;
    let mut purity = 0.0;
    for j in 0..n {
        for jp in 0..n {
            let rho: C64 = state.branch(j).iter().zip(state.branch(jp)).map(|(a, b)| a * b.conj()).sum();
            purity += rho.norm_sqr();
        }
    }
    purity / state.norm().powi(4)
}

/// `⟨α|ρ_m|α⟩` for every mechanical mode `m`.
pub fn mechanical_return_overlap(state: &FockState, alpha: C64) -> Vec<f64> {
    let d = state.fock_dim;
    let n = state.n_nodes;
    let coh = normalized(coherent_vector(alpha, d));
    (0..n)
        .map(|mode| {
            let stride = d.pow((n - 1 - mode) as u32);
            let outer = state.block() / (stride * d);
            let mut acc = 0.0;
            for j in 0..n {
                let b = state.branch(j);
                for hi in 0..outer {
                    for lo in 0..stride {
                        let amp: C64 = (0..d).map(|l| coh[l].conj() * b[hi * stride * d + l * stride + lo]).sum();
                        acc += amp.norm_sqr();
                    }
                }
            }
            acc
        })
        .collect()
}

/// `⟨ψ|H|ψ⟩`.
pub fn energy_expectation(h: &SparseHamiltonian, state: &FockState) -> Result<f64> {
    let hv = h.apply(&state.vector)?;
    Ok(state.vector.iter().zip(&hv).map(|(a, b)| (a.conj() * b).re).sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::evolve;
    use crate::entanglement::linear_entropy_closed;
    use approx::assert_relative_eq;
    use std::f64::consts::{PI, TAU};

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn validation_config() -> NetworkConfig {
        NetworkConfig::new(2, 1.0, 0.0, vec![0.1, 0.2], vec![0.05, 0.0], c(1.0, 0.0)).unwrap()
    }

    #[test]
    fn single_mode_matrix_elements() {
        let h = mode_hamiltonian(-0.1, 2);
        assert_eq!(h, DMatrix::from_row_slice(2, 2, &[0.0, 0.1, 0.1, 1.0]));
        let h = mode_hamiltonian(0.5, 4);
        assert_relative_eq!(h[(2, 3)], -0.5 * 3f64.sqrt());
    }

    #[test]
    fn uncoupled_hamiltonian_counts_quanta() {
        let cfg = NetworkConfig::new(2, 1.0, 0.0, vec![0.0; 2], vec![0.0; 2], c(0.0, 0.0)).unwrap();
        let h = hamiltonian_matrix(&cfg, 5).unwrap();
        assert_eq!(h.nnz(), h.dim());
        for r in 0..h.dim() {
            let local = r % 25;
            assert_eq!(h.get(r, r), (local / 5 + local % 5) as f64);
        }
    }

    #[test]
    fn hamiltonian_is_symmetric() {
        let cfg = NetworkConfig::new(3, 1.3, -0.4, vec![0.2, -0.5, 0.3], vec![0.1, 0.0, -0.7], c(0.0, 0.0)).unwrap();
        let h = hamiltonian_matrix(&cfg, 6).unwrap();
        assert!(h.hermiticity_error() < 1e-14);
        let dense = h.to_dense().unwrap();
        assert_eq!(dense.transpose(), dense);
    }

    #[test]
    fn size_guards() {
        let cfg = validation_config();
        assert!(matches!(hamiltonian_matrix(&cfg, 3), Err(Error::ConfigInvalid(_))));
        let big = NetworkConfig::new(4, 1.0, 0.0, vec![0.1; 4], vec![0.0; 4], c(0.0, 0.0)).unwrap();
        assert!(matches!(hamiltonian_matrix(&big, 30), Err(Error::DimensionTooLarge { .. })));
        assert!(matches!(evolve_numeric(&big, 30, 1.0), Err(Error::DimensionTooLarge { .. })));
    }

    #[test]
    fn coherent_vector_norm_and_phase() {
        let v = coherent_vector(c(1.2, -0.5), 40);
        let norm: f64 = v.iter().map(|x| x.norm_sqr()).sum();
        assert_relative_eq!(norm, 1.0, epsilon = 1e-14);
        assert_relative_eq!(v[0].re, (-0.5 * 1.69f64).exp(), max_relative = 1e-14);
        let big = coherent_vector(c(12.0, 0.0), 400);
        assert!(big.iter().all(|x| x.re.is_finite()));
    }

    #[test]
    fn initial_state_is_reproduced() {
        let cfg = validation_config();
        let st = evolve_numeric(&cfg, 30, 0.0).unwrap();
        assert_relative_eq!(fidelity(&st, &evolve(&cfg, 0.0)).unwrap(), 1.0, epsilon = 1e-12);
        assert_relative_eq!(purity_numeric(&st), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn numeric_matches_branch_form() {
        let cfg = validation_config();
        for tau in [PI / 4.0, PI / 2.0, PI, 1.5 * PI, TAU] {
            let st = evolve_numeric(&cfg, 30, tau).unwrap();
            assert!((st.norm() - 1.0).abs() < 1e-10);
            let f = fidelity(&st, &evolve(&cfg, tau)).unwrap();
            assert!(f >= 1.0 - 1e-8, "tau={tau}: {f}");
        }
    }

    #[test]
    fn dense_blocks_agree_with_factorised_evolution() {
        let cfg = NetworkConfig::new(2, 1.0, 0.2, vec![0.3, -0.2], vec![0.1, 0.25], c(0.4, 0.3)).unwrap();
        let a = evolve_numeric(&cfg, 22, 2.1).unwrap();
        let b = evolve_numeric_dense(&cfg, 22, 2.1).unwrap();
        let diff = a.vector().iter().zip(b.vector()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
        assert!(diff < 1e-11);
    }

    #[test]
    fn flipped_branch_phase_is_detected() {
        let cfg = validation_config();
        let st = evolve_numeric(&cfg, 30, 1.0).unwrap();
        let br = evolve(&cfg, 1.0);
        let mut coeffs = br.coefficients().to_vec();
        coeffs[1] = -coeffs[1];
        let flipped = BranchState::new(coeffs, br.amplitudes().to_vec(), 1.0).unwrap();
        assert!(fidelity(&st, &flipped).unwrap() < 0.5);
    }

    #[test]
    fn purity_matches_closed_entropy() {
        let cfg = NetworkConfig::new(2, 1.0, 0.0, vec![0.1, 0.1], vec![0.0; 2], c(1.0, 0.0)).unwrap();
        let st = evolve_numeric(&cfg, 30, PI).unwrap();
        assert!((1.0 - purity_numeric(&st) - linear_entropy_closed(&cfg, PI)).abs() < 1e-7);
        let st = evolve_numeric(&cfg, 30, TAU).unwrap();
        assert!((purity_numeric(&st) - 1.0).abs() < 1e-7);
    }

    #[test]
    fn oscillators_return_at_full_period() {
        let cfg = validation_config();
        let st = evolve_numeric(&cfg, 30, TAU).unwrap();
        for o in mechanical_return_overlap(&st, cfg.alpha()) {
            assert!(o >= 1.0 - 1e-8);
        }
        let st = evolve_numeric(&cfg, 30, PI).unwrap();
        assert!(mechanical_return_overlap(&st, cfg.alpha())[1] < 1.0 - 1e-3);
    }

    #[test]
    fn energy_is_conserved() {
        let cfg = NetworkConfig::new(2, 1.0, 0.0, vec![0.3, 0.2], vec![0.05, -0.1], c(0.8, 0.2)).unwrap();
        let h = hamiltonian_matrix(&cfg, 30).unwrap();
        let e0 = energy_expectation(&h, &evolve_numeric(&cfg, 30, 0.0).unwrap()).unwrap();
        for tau in [0.7, 2.0, 4.4] {
            let e = energy_expectation(&h, &evolve_numeric(&cfg, 30, tau).unwrap()).unwrap();
            assert!((e - e0).abs() <= 1e-8 * e0.abs());
        }
    }

    #[test]
    fn truncation_is_flagged() {
        let cfg = NetworkConfig::new(2, 1.0, 0.0, vec![0.1, 0.1], vec![0.0; 2], c(4.0, 0.0)).unwrap();
        assert!(matches!(evolve_numeric(&cfg, 10, 1.0), Err(Error::TruncationInsufficient { .. })));
    }
}
