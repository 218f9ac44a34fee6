//! Monte Carlo measurement records and maximum-likelihood estimation.
//!
//! Counts are drawn with ChaCha20 (`rand_chacha::ChaCha20Rng`) seeded through
//! `seed_from_u64`, as a sequence of conditional binomial draws, so a record is
//! a pure function of its seed.
//!
//! The projective measurement tuned exactly at a point `ϑ` gives a likelihood
//! that is even in `Φ - ϑ`, and for three nodes it has a second reflection
//! `(x, y) ↦ (x, x - y)` in the scaled offsets `β_j(Φ_j - ϑ_j)`. The adaptive
//! experiment therefore places every reference on a known side of the
//! parameters, along the staggered direction `(1, 2, …, N-1)`, and searches
//! each fit in the window where the scaled offsets from the latest references
//! lie in `(-π/2, 0)`.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::estimation::{single_param_qfi, trace_inverse_qfim};
use crate::measurement::{gram_schmidt_basis, sld_eigenbasis, ProjectorSet, SldBasis};
use crate::probe::{case_phases, phase_state, Case, NetworkConfig, PhaseSet};

/// Multinomial counts for `shots` draws from `probabilities`.
pub fn sample_outcomes(probabilities: &[f64], shots: u64, seed: u64) -> Result<Vec<u64>> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    multinomial(&mut rng, probabilities, shots)
}

fn validate_distribution(p: &[f64]) -> Result<()> {
    if p.is_empty() {
        return Err(Error::InvalidDistribution("empty probability vector".into()));
    }
    if let Some(x) = p.iter().find(|x| !x.is_finite() || **x < -1e-12) {
        return Err(Error::InvalidDistribution(format!("entry {x} is not a probability")));
    }
    let total: f64 = p.iter().sum();
    if (total - 1.0).abs() > 1e-10 {
        return Err(Error::InvalidDistribution(format!("probabilities sum to {total}")));
    }
    Ok(())
}

fn multinomial(rng: &mut ChaCha20Rng, p: &[f64], shots: u64) -> Result<Vec<u64>> {
    validate_distribution(p)?;
    if shots == 0 {
        return Err(Error::InvalidResourceCount("at least one shot is required".into()));
    }
    let mut counts = vec![0u64; p.len()];
    let mut left = shots;
    let mut mass = 1.0;
    for (i, pi) in p.iter().enumerate() {
        if left == 0 {
            break;
        }
        if i + 1 == p.len() {
            counts[i] = left;
            break;
        }
        let q = (pi.max(0.0) / mass).clamp(0.0, 1.0);
        let draw = Binomial::new(left, q).expect("probability clamped to [0, 1]").sample(rng);
        counts[i] = draw;
        left -= draw;
        mass -= pi.max(0.0);
        if mass <= 0.0 {
            break;
        }
    }
    Ok(counts)
}

/// Outcome distribution as a function of the unknown parameters.
pub trait OutcomeModel: Sync {
    fn n_params(&self) -> usize;
    fn probabilities(&self, params: &[f64]) -> Vec<f64>;
}

/// Gram–Schmidt projective measurement on the phase-tagged W state.
#[derive(Clone, Debug)]
pub struct ProjectiveModel {
    pub basis: ProjectorSet,
    pub betas: Vec<f64>,
}

impl OutcomeModel for ProjectiveModel {
    fn n_params(&self) -> usize {
        self.betas.len()
    }

    fn probabilities(&self, params: &[f64]) -> Vec<f64> {
        let psi = phase_state(&self.betas, params);
        self.basis.amplitudes(&psi).expect("matching dimension").iter().map(|f| f.norm_sqr()).collect()
    }
}

/// Two-outcome SLD measurement for one parameter, the others held at their
/// known values.
#[derive(Clone, Debug)]
pub struct SldModel {
    pub basis: SldBasis,
    pub phases: PhaseSet,
    pub param: usize,
}

impl OutcomeModel for SldModel {
    fn n_params(&self) -> usize {
        1
    }

    fn probabilities(&self, params: &[f64]) -> Vec<f64> {
        let mut phis = self.phases.phis().to_vec();
        phis[self.param] = params[0];
        let psi = phase_state(self.phases.betas(), &phis);
        let (p, m) = self.basis.probabilities(&psi).expect("matching dimension");
        vec![p, m]
    }
}

/// Counts recorded with one measurement setting.
pub struct Record<'a> {
    pub model: &'a dyn OutcomeModel,
    pub counts: Vec<u64>,
}

/// Open box `lo < Φ < hi` searched by the likelihood maximiser.
#[derive(Clone, Debug, PartialEq)]
pub struct Window {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl Window {
    pub fn contains(&self, x: &[f64]) -> bool {
        x.iter().zip(&self.lo).zip(&self.hi).all(|((v, l), h)| v > l && v < h)
    }

    /// Window of parameters whose scaled offsets `β_j(Φ_j - ϑ_j)` lie in
    /// `(-π/2, 0)`.
    pub fn below_references(betas: &[f64], refs: &[f64]) -> Self {
        let (lo, hi) = betas
            .iter()
            .zip(refs)
            .map(|(b, r)| {
                let edge = r - std::f64::consts::FRAC_PI_2 / b;
                if *b > 0.0 {
                    (edge, *r)
                } else {
                    (*r, edge)
                }
            })
            .unzip();
        Self { lo, hi }
    }

    /// Point at fraction `t` of the way from the upper reference corner
    /// toward the opposite edge, per coordinate.
    fn interpolate(&self, betas: &[f64], t: &[f64]) -> Vec<f64> {
        betas
            .iter()
            .zip(self.lo.iter().zip(&self.hi))
            .zip(t)
            .map(|((b, (l, h)), s)| if *b > 0.0 { h - s * (h - l) } else { l + s * (h - l) })
            .collect()
    }
}

/// `-Σ n_x ln(p_x/q_x)` with `q` the empirical frequencies, written with
/// `ln_1p` so that it stays accurate near the optimum. Zero-count outcomes
/// contribute nothing.
pub fn negative_log_likelihood(records: &[Record<'_>], params: &[f64]) -> f64 {
    let mut total = 0.0;
    for rec in records {
        let shots: u64 = rec.counts.iter().sum();
        let p = rec.model.probabilities(params);
        for (n, px) in rec.counts.iter().zip(&p) {
            if *n == 0 {
                continue;
            }
            if *px <= 0.0 {
                return f64::INFINITY;
            }
            let q = *n as f64 / shots as f64;
            total -= *n as f64 * ((px - q) / q).ln_1p();
        }
    }
    total
}

#[derive(Clone, Debug, PartialEq)]
pub struct Optimum {
    pub point: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
}

const NM_MAX_ITER: usize = 20_000;

/// Nelder–Mead minimisation restricted to `window` (points outside score
/// `+∞`). Converges once the spread of objective values over the simplex
/// falls below `ftol` and its diameter below `xtol`, or once the diameter
/// alone falls below `xtol/1000`, where rounding dominates the objective.
pub fn nelder_mead<F>(f: F, start: &[f64], scale: &[f64], window: &Window, ftol: f64, xtol: f64) -> Result<Optimum>
where
    F: Fn(&[f64]) -> f64,
{
    let d = start.len();
    let eval = |x: &[f64]| if window.contains(x) { f(x) } else { f64::INFINITY };
    let mut simplex: Vec<Vec<f64>> = vec![start.to_vec()];
    for i in 0..d {
        let mut v = start.to_vec();
        v[i] += scale[i];
        if !window.contains(&v) {
            v[i] = start[i] - scale[i];
        }
        simplex.push(v);
    }
    let mut values: Vec<f64> = simplex.iter().map(|x| eval(x)).collect();
    if !values[0].is_finite() {
        return Err(Error::Inconsistent("likelihood search started outside its window".into()));
    }

    for iter in 0..NM_MAX_ITER {
        let mut order: Vec<usize> = (0..=d).collect();
        order.sort_by(|a, b| values[*a].total_cmp(&values[*b]));
        simplex = order.iter().map(|i| simplex[*i].clone()).collect();
        values = order.iter().map(|i| values[*i]).collect();

        let spread = values[d] - values[0];
        let diameter = simplex[1..]
            .iter()
            .flat_map(|v| v.iter().zip(&simplex[0]).zip(scale).map(|((a, b), s)| (a - b).abs() / s))
            .fold(0.0f64, f64::max);
        let collapsed = diameter < 1e-3 * xtol;
        if spread.is_finite() && ((spread < ftol && diameter < xtol) || collapsed) {
            return Ok(Optimum { point: simplex[0].clone(), value: values[0], iterations: iter });
        }

        let centroid: Vec<f64> =
            (0..d).map(|k| simplex[..d].iter().map(|v| v[k]).sum::<f64>() / d as f64).collect();
        let along = |t: f64| -> Vec<f64> {
            centroid.iter().zip(&simplex[d]).map(|(c, w)| c + t * (w - c)).collect()
        };
        let reflected = along(-1.0);
        let fr = eval(&reflected);
        if fr < values[0] {
            let expanded = along(-2.0);
            let fe = eval(&expanded);
            if fe < fr {
                simplex[d] = expanded;
                values[d] = fe;
            } else {
                simplex[d] = reflected;
                values[d] = fr;
            }
        } else if fr < values[d - 1] {
            simplex[d] = reflected;
            values[d] = fr;
        } else {
            let (contracted, fc) = if fr < values[d] {
                let p = along(-0.5);
                let v = eval(&p);
                (p, v)
            } else {
                let p = along(0.5);
                let v = eval(&p);
                (p, v)
            };
            if fc < values[d].min(fr) {
                simplex[d] = contracted;
                values[d] = fc;
            } else {
                let best = simplex[0].clone();
                for i in 1..=d {
                    simplex[i] = best.iter().zip(&simplex[i]).map(|(b, x)| b + 0.5 * (x - b)).collect();
                    values[i] = eval(&simplex[i]);
                }
            }
        }
    }
    Err(Error::NotConverged { iterations: NM_MAX_ITER })
}

/// Maximum-likelihood estimate inside `window`, searched from every point of
/// `starts`. Two optima separated by a likelihood barrier whose values differ
/// by less than 1e-9 make the estimate ambiguous.
pub fn mle_estimate(records: &[Record<'_>], starts: &[Vec<f64>], scale: &[f64], window: &Window) -> Result<Vec<f64>> {
    let f = |x: &[f64]| negative_log_likelihood(records, x);
    let mut optima: Vec<Optimum> = Vec::with_capacity(starts.len());
    for s in starts.iter().filter(|s| window.contains(s)) {
        optima.push(nelder_mead(f, s, scale, window, 1e-12, 1e-6)?);
    }
    if optima.is_empty() {
        return Err(Error::Inconsistent("no likelihood start point lies inside the window".into()));
    }
    optima.sort_by(|a, b| a.value.total_cmp(&b.value));
    let best = &optima[0];
    for other in &optima[1..] {
        let gap = other.value - best.value;
        let apart = best.point.iter().zip(&other.point).zip(scale).any(|((a, b), s)| (a - b).abs() > 1e-4 * s);
        let mid: Vec<f64> = best.point.iter().zip(&other.point).map(|(a, b)| 0.5 * (a + b)).collect();
        if apart && gap < 1e-9 && f(&mid) > other.value + 1e-9 {
            return Err(Error::AmbiguousLikelihood { gap });
        }
    }
    Ok(best.point.clone())
}

/// Tunable parts of the adaptive experiment.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SaturationOptions {
    /// Fraction of the `μ` shots spent in the detuned first stage.
    pub stage1_fraction: f64,
    /// Scaled detuning `δ` of the first-stage references, divided by `max|β|`.
    pub stage1_detuning: f64,
    /// Distance of the second-stage references from the first-stage estimate,
    /// in units of the first-stage standard error `√(N / (2μ₁))`.
    pub stage2_margin: f64,
}

impl Default for SaturationOptions {
    fn default() -> Self {
        Self { stage1_fraction: 0.5, stage1_detuning: 0.05, stage2_margin: 3.0 }
    }
}

/// Outcome of a repeated estimation experiment.
#[derive(Clone, Debug, PartialEq)]
pub struct SaturationReport {
    pub mu: u64,
    pub trials: usize,
    pub truth: Vec<f64>,
    pub mean: Vec<f64>,
    /// Per-parameter standard error of the mean.
    pub std_error: Vec<f64>,
    /// Trace of the unbiased empirical covariance.
    pub empirical_trace: f64,
    /// `Tr[Q⁻¹] / μ`, or `1/(μ Q_jj)` for the single-parameter experiment.
    pub bound: f64,
    pub ratio: f64,
}

impl SaturationReport {
    fn from_estimates(mu: u64, truth: Vec<f64>, estimates: &[Vec<f64>], bound: f64) -> Self {
        let t = estimates.len() as f64;
        let d = truth.len();
        let mean: Vec<f64> = (0..d).map(|j| estimates.iter().map(|e| e[j]).sum::<f64>() / t).collect();
        let var: Vec<f64> = (0..d)
            .map(|j| estimates.iter().map(|e| (e[j] - mean[j]).powi(2)).sum::<f64>() / (t - 1.0))
            .collect();
        let empirical_trace: f64 = var.iter().sum();
        Self {
            mu,
            trials: estimates.len(),
            truth,
            std_error: var.iter().map(|v| (v / t).sqrt()).collect(),
            mean,
            empirical_trace,
            bound,
            ratio: empirical_trace / bound,
        }
    }

    /// `(mean - truth) / std_error` per parameter.
    pub fn bias_in_std_errors(&self) -> Vec<f64> {
        self.mean.iter().zip(&self.truth).zip(&self.std_error).map(|((m, t), s)| (m - t) / s).collect()
    }
}

fn check_experiment(mu: u64, trials: usize) -> Result<()> {
    if mu < 1000 {
        return Err(Error::InvalidResourceCount(format!("mu = {mu} is below the asymptotic regime (>= 1000)")));
    }
    if trials < 100 {
        return Err(Error::InvalidResourceCount(format!("{trials} trials are too few (>= 100)")));
    }
    Ok(())
}

/// Two-stage adaptive estimation of every relative phase, repeated `trials`
/// times with per-trial seeds `seed + t`.
///
/// Stage one measures `μ₁` shots in the Gram–Schmidt basis with references
/// `ϑ_j = Φ_j + δ·j·sign(β_j)/max|β|`. Stage two measures the remaining shots
/// in the basis tuned to the stage-one estimate, shifted by the margin along
/// the same staggered direction. The reported estimate maximises the joint
/// likelihood of both records.
pub fn saturation_experiment(
    config: &NetworkConfig,
    case: Case,
    mu: u64,
    trials: usize,
    seed: u64,
    options: SaturationOptions,
) -> Result<SaturationReport> {
    check_experiment(mu, trials)?;
    if !(options.stage1_fraction > 0.0 && options.stage1_fraction < 1.0) {
        return Err(Error::ConfigInvalid("stage-one fraction must lie in (0, 1)".into()));
    }
    let phases = case_phases(config, case)?;
    let estimates: Vec<Vec<f64>> = (0..trials)
        .into_par_iter()
        .map(|t| adaptive_trial(&phases, mu, seed.wrapping_add(t as u64), &options))
        .collect::<Result<_>>()?;
    let bound = trace_inverse_qfim(&phases) / mu as f64;
    Ok(SaturationReport::from_estimates(mu, phases.phis().to_vec(), &estimates, bound))
}

fn adaptive_trial(phases: &PhaseSet, mu: u64, seed: u64, options: &SaturationOptions) -> Result<Vec<f64>> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let betas = phases.betas();
    let n = phases.n_nodes();
    let truth = phases.phis();
    let max_beta = betas.iter().fold(0.0f64, |m, b| m.max(b.abs()));
    let stagger: Vec<f64> = (1..n).map(|j| j as f64).collect();
    let scale: Vec<f64> = betas.iter().map(|b| 0.02 / b.abs()).collect();

    let mu1 = ((mu as f64 * options.stage1_fraction).round() as u64).clamp(1, mu - 1);
    let refs1: Vec<f64> = truth
        .iter()
        .zip(betas)
        .zip(&stagger)
        .map(|((p, b), s)| p + options.stage1_detuning * s * b.signum() / max_beta)
        .collect();
    let model1 = ProjectiveModel { basis: gram_schmidt_basis(n, betas, &refs1)?, betas: betas.to_vec() };
    let counts1 = multinomial(&mut rng, &model1.probabilities(truth), mu1)?;
    let window = Window::below_references(betas, &refs1);
    let max_s = stagger[stagger.len() - 1];
    let starts: Vec<Vec<f64>> = [0.01, 0.05, 0.2, 0.6]
        .iter()
        .map(|c| window.interpolate(betas, &stagger.iter().map(|s| c * s / max_s).collect::<Vec<_>>()))
        .collect();
    let stage1 = [Record { model: &model1, counts: counts1.clone() }];
    let est1 = mle_estimate(&stage1, &starts, &scale, &window)?;

    let sigma = (n as f64 / (2.0 * mu1 as f64)).sqrt();
    let refs2: Vec<f64> = est1
        .iter()
        .zip(betas)
        .zip(&stagger)
        .map(|((e, b), s)| e + options.stage2_margin * sigma * s / b)
        .collect();
    let model2 = ProjectiveModel { basis: gram_schmidt_basis(n, betas, &refs2)?, betas: betas.to_vec() };
    let counts2 = multinomial(&mut rng, &model2.probabilities(truth), mu - mu1)?;
    let joint = [Record { model: &model1, counts: counts1 }, Record { model: &model2, counts: counts2 }];
    let behind: Vec<f64> = est1
        .iter()
        .zip(betas)
        .zip(&stagger)
        .map(|((e, b), s)| e - options.stage2_margin * sigma * s / b)
        .collect();
    let window2 = Window::below_references(betas, &refs2);
    let starts2 = vec![est1.clone(), behind, refs2.iter().zip(&est1).map(|(r, e)| 0.5 * (r + e)).collect()];
    let fine: Vec<f64> = scale.iter().map(|s| s * sigma.min(1.0)).collect();
    mle_estimate(&joint, &starts2, &fine, &window2)
}

/// Single-parameter estimation of parameter `param` with the SLD basis built at
/// `Φ̃ = Φ + offset/β`, the other phases known.
pub fn single_param_experiment(
    phases: &PhaseSet,
    param: usize,
    offset: f64,
    mu: u64,
    trials: usize,
    seed: u64,
) -> Result<SaturationReport> {
    check_experiment(mu, trials)?;
    phases.check_param(param)?;
    let beta = phases.betas()[param];
    let truth = phases.phis()[param];
    let mut tuned = phases.phis().to_vec();
    tuned[param] = truth + offset / beta;
    let reference = phases.with_phis(tuned.clone())?;
    let model = SldModel { basis: sld_eigenbasis(&reference, param)?, phases: phases.clone(), param };
    let half = std::f64::consts::FRAC_PI_2 / beta.abs();
    let window = Window { lo: vec![tuned[param] - half], hi: vec![tuned[param] + half] };
    let scale = [0.02 / beta.abs()];

    let estimates: Vec<Vec<f64>> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = ChaCha20Rng::seed_from_u64(seed.wrapping_add(t as u64));
            let counts = multinomial(&mut rng, &model.probabilities(&[truth]), mu)?;
            let rec = [Record { model: &model, counts }];
            mle_estimate(&rec, &[vec![tuned[param]]], &scale, &window)
        })
        .collect::<Result<_>>()?;
    let bound = 1.0 / (mu as f64 * single_param_qfi(phases, param)?);
    Ok(SaturationReport::from_estimates(mu, vec![truth], &estimates, bound))
}
