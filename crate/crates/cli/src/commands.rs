use std::f64::consts::{PI, TAU};
use std::path::Path;

use netsense_core::dynamics::evolve;
use netsense_core::entanglement::{linear_entropy_closed, linear_entropy_from_state};
use netsense_core::estimation::{qfim_analytic, qfim_inverse, qfim_numeric, FisherMatrix};
use netsense_core::measurement::{cfim, gram_schmidt_basis, outcome_probabilities};
use netsense_core::oracle::{evolve_numeric, fidelity, mechanical_return_overlap, purity_numeric};
use netsense_core::platforms::{case2_coupling_bound_exact, figure2_rows, figure3_rows, PlatformPreset};
use netsense_core::probe::case_phases;
use netsense_core::sampler::{saturation_experiment, SaturationOptions};
use netsense_core::{Case, NetworkConfig, C64};

use crate::config::{self, LoadedConfig};
use crate::table::{num, Table};
use crate::CliError;

/// Parses a real number with an optional `pi` suffix: `2pi`, `0.5pi`, `pi`.
pub fn parse_angle(s: &str) -> Result<f64, String> {
    let t = s.trim();
    let (body, factor) = match t.strip_suffix("pi") {
        Some(b) => (b.trim_end_matches('*'), PI),
        None => (t, 1.0),
    };
    let value = match body {
        "" => 1.0,
        "-" => -1.0,
        b => b.parse::<f64>().map_err(|_| format!("'{s}' is not a number"))?,
    };
    let x = value * factor;
    if x.is_finite() {
        Ok(x)
    } else {
        Err(format!("'{s}' is not finite"))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Grid {
    pub start: f64,
    pub step: f64,
    pub count: usize,
}

impl Grid {
    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.count).map(|i| self.start + i as f64 * self.step)
    }
}

/// `START:STOP:STEP`, inclusive of `STOP` when it lies on the grid.
pub fn parse_grid(s: &str) -> Result<Grid, String> {
    let parts: Vec<&str> = s.split(':').collect();
    let [a, b, c] = parts.as_slice() else {
        return Err(format!("'{s}' is not of the form START:STOP:STEP"));
    };
    let (start, stop, step) = (parse_angle(a)?, parse_angle(b)?, parse_angle(c)?);
    if !(step > 0.0) {
        return Err("grid step must be positive".into());
    }
    if stop < start {
        return Err("grid stop lies before its start".into());
    }
    let intervals = ((stop - start) / step * (1.0 + 1e-12)).floor();
    if intervals > 1e7 {
        return Err("grid has more than 10^7 points".into());
    }
    Ok(Grid { start, step, count: intervals as usize + 1 })
}

fn load(path: &Path) -> Result<LoadedConfig, CliError> {
    config::load(path)
}

pub fn state(path: &Path, tau: f64) -> Result<Table, CliError> {
    let cfg = load(path)?;
    let st = evolve(&cfg.network, tau);
    let mut t = Table::new(&["entry", "branch", "mode", "re", "im"]).with_config_hash(&cfg.hash);
    for (j, c) in st.coefficients().iter().enumerate() {
        t.push(["coefficient".into(), j.to_string(), String::new(), num(c.re), num(c.im)]);
    }
    for j in 0..st.n_nodes() {
        for m in 0..st.n_nodes() {
            let a = st.amplitude(j, m);
            t.push(["amplitude".into(), j.to_string(), m.to_string(), num(a.re), num(a.im)]);
        }
    }
    Ok(t)
}

pub fn entropy(path: &Path, grid: &Grid) -> Result<Table, CliError> {
    let cfg = load(path)?;
    let mut t = Table::new(&["tau", "s_l_closed", "s_l_gram"]).with_config_hash(&cfg.hash);
    for tau in grid.points() {
        let closed = linear_entropy_closed(&cfg.network, tau);
        let gram = linear_entropy_from_state(&evolve(&cfg.network, tau));
        t.push([num(tau), num(closed), num(gram)]);
    }
    Ok(t)
}

fn push_matrix(t: &mut Table, name: &str, m: &FisherMatrix) {
    for i in 0..m.dim() {
        for j in 0..m.dim() {
            t.push([name.to_owned(), i.to_string(), j.to_string(), num(m.get(i, j))]);
        }
    }
}

pub fn qfim(path: &Path, case: Case, numeric: bool, epsilon: f64, mu: u64) -> Result<Table, CliError> {
    if mu == 0 {
        return Err(CliError::Config("--mu must be at least 1".into()));
    }
    let cfg = load(path)?;
    let phases = case_phases(&cfg.network, case)?;
    let q = if numeric { qfim_numeric(&cfg.network, case, epsilon)? } else { qfim_analytic(&phases)? };
    let inverse = if numeric { q.inverse()? } else { qfim_inverse(&phases)?.entries().clone() };
    let mut t = Table::new(&["quantity", "i", "j", "value"]).with_config_hash(&cfg.hash);
    push_matrix(&mut t, "Q", &q);
    for i in 0..q.dim() {
        for j in 0..q.dim() {
            t.push(["Q_inverse".into(), i.to_string(), j.to_string(), num(inverse[(i, j)])]);
        }
    }
    t.push(["trace_inverse".into(), String::new(), String::new(), num(inverse.trace())]);
    for i in 0..q.dim() {
        t.push(["variance_bound".into(), i.to_string(), String::new(), num(inverse[(i, i)] / mu as f64)]);
    }
    Ok(t)
}

pub fn crb(
    platform: &str,
    case: Case,
    n_nodes: u32,
    n_exc: u32,
    mu: u64,
    couplings: Option<&[f64]>,
) -> Result<Table, CliError> {
    let preset = PlatformPreset::by_name(platform)?;
    let approximate = preset.bound(case, n_nodes, n_exc, mu)?;
    let (form, bound) = match (case, couplings) {
        (Case::Case1, None) => ("closed", approximate),
        (Case::Case1, Some(_)) => {
            return Err(CliError::Config("--couplings applies to case 2 only".into()));
        }
        (Case::Case2, None) => ("approximate", approximate),
        (Case::Case2, Some(k)) => {
            if k.len() != n_nodes as usize {
                return Err(CliError::Config(format!("--couplings has {} values for {n_nodes} nodes", k.len())));
            }
            let k_plus: Vec<f64> = k[1..].iter().map(|kj| k[0] + kj).collect();
            ("exact", case2_coupling_bound_exact(preset.omega, &k_plus, n_exc, mu)?)
        }
    };
    let (vu, ru) = match case {
        Case::Case1 => ("m^2/s^4", "m/s^2"),
        Case::Case2 => ("Hz^2", "Hz"),
    };
    let mut t = Table::new(&[
        "platform", "case", "n_nodes", "n_exc", "mu", "form", "variance", "rms", "variance_unit", "rms_unit",
    ]);
    t.push([
        preset.name.clone(),
        case_label(case).into(),
        n_nodes.to_string(),
        n_exc.to_string(),
        mu.to_string(),
        form.into(),
        num(bound.variance),
        num(bound.rms),
        vu.into(),
        ru.into(),
    ]);
    Ok(t)
}

fn case_label(case: Case) -> &'static str {
    match case {
        Case::Case1 => "1",
        Case::Case2 => "2",
    }
}

pub fn measure(path: &Path, case: Case, refs: &[f64], epsilon: f64) -> Result<Table, CliError> {
    let cfg = load(path)?;
    let phases = case_phases(&cfg.network, case)?;
    if refs.len() != phases.dim() {
        return Err(CliError::Config(format!("--refs needs {} values, got {}", phases.dim(), refs.len())));
    }
    let basis = gram_schmidt_basis(phases.n_nodes(), phases.betas(), refs)?;
    let probs = outcome_probabilities(&basis, &phases.state())?;
    let f = cfim(&basis, &phases, epsilon)?;
    let q = qfim_analytic(&phases)?;
    let mut gaps: Vec<f64> = (q.entries() - f.entries()).symmetric_eigenvalues().iter().copied().collect();
    gaps.sort_by(f64::total_cmp);

    let mut t = Table::new(&["quantity", "i", "j", "value"]).with_config_hash(&cfg.hash);
    for (x, p) in probs.iter().enumerate() {
        t.push(["probability".into(), x.to_string(), String::new(), num(*p)]);
    }
    push_matrix(&mut t, "cfim", &f);
    push_matrix(&mut t, "qfim", &q);
    for (i, g) in gaps.iter().enumerate() {
        t.push(["gap_eigenvalue".into(), i.to_string(), String::new(), num(*g)]);
    }
    Ok(t)
}

pub fn sample(
    path: &Path,
    case: Case,
    mu: u64,
    trials: usize,
    seed: u64,
    options: SaturationOptions,
) -> Result<Table, CliError> {
    let cfg = load(path)?;
    let r = saturation_experiment(&cfg.network, case, mu, trials, seed, options)?;
    let mut t = Table::new(&["quantity", "index", "value"]).with_config_hash(&cfg.hash);
    t.push(["mu".into(), String::new(), mu.to_string()]);
    t.push(["trials".into(), String::new(), trials.to_string()]);
    t.push(["seed".into(), String::new(), seed.to_string()]);
    let bias = r.bias_in_std_errors();
    for (name, values) in [("truth", &r.truth), ("mean", &r.mean), ("std_error", &r.std_error), ("bias_sigma", &bias)] {
        for (i, v) in values.iter().enumerate() {
            t.push([name.to_owned(), i.to_string(), num(*v)]);
        }
    }
    t.push(["empirical_trace".into(), String::new(), num(r.empirical_trace)]);
    t.push(["bound".into(), String::new(), num(r.bound)]);
    t.push(["ratio".into(), String::new(), num(r.ratio)]);
    Ok(t)
}

pub fn figure(case: Case, mu: u64) -> Result<Table, CliError> {
    let rows = match case {
        Case::Case1 => figure2_rows(mu)?,
        Case::Case2 => figure3_rows(mu)?,
    };
    let unit = match case {
        Case::Case1 => "m^2/s^4",
        Case::Case2 => "Hz^2",
    };
    let mut t = Table::new(&["panel", "platform", "n_nodes", "n_exc", "value", "rms", "unit"]);
    for r in rows {
        t.push([
            r.panel.to_string(),
            r.platform.unwrap_or_default(),
            r.n_nodes.to_string(),
            r.n_exc.to_string(),
            num(r.value),
            r.rms.map(num).unwrap_or_default(),
            if r.panel == 'a' { "1".into() } else { unit.to_owned() },
        ]);
    }
    Ok(t)
}

struct Check {
    name: &'static str,
    n_nodes: usize,
    value: f64,
    threshold: f64,
    /// `true` when the value must stay at or above the threshold.
    at_least: bool,
}

impl Check {
    fn passed(&self) -> bool {
        if self.at_least {
            self.value >= self.threshold
        } else {
            self.value <= self.threshold
        }
    }
}

/// Validation matrix for `N ∈ {2, 3}`: truncated-Fock evolution against the
/// closed form, disentanglement at `τ = 2π`, and the finite-difference QFIM.
pub fn oracle_check(fock_dim: usize) -> Result<(Table, Option<String>), CliError> {
    let mut checks = Vec::new();
    for n in [2usize, 3] {
        let drivings = [0.1, 0.05, 0.0][..n].to_vec();
        let cfg = NetworkConfig::uniform_coupling(1.0, 0.0, 0.2, drivings, C64::new(1.0, 0.0))?;

        let mut worst_fidelity = 1.0f64;
        let mut entropy_gap = 0.0f64;
        for i in 0..16 {
            let tau = TAU * i as f64 / 15.0;
            let analytic = evolve(&cfg, tau);
            worst_fidelity = worst_fidelity.min(fidelity(&evolve_numeric(&cfg, fock_dim, tau)?, &analytic)?);
            entropy_gap = entropy_gap.max((linear_entropy_closed(&cfg, tau) - linear_entropy_from_state(&analytic)).abs());
        }
        let returned = evolve_numeric(&cfg, fock_dim, TAU)?;
        let overlap = mechanical_return_overlap(&returned, cfg.alpha()).into_iter().fold(1.0, f64::min);
        let q_analytic = qfim_analytic(&case_phases(&cfg, Case::Case1)?)?;
        let q_numeric = qfim_numeric(&cfg, Case::Case1, 1e-5)?;

        checks.extend([
            Check { name: "fidelity_min", n_nodes: n, value: worst_fidelity, threshold: 1.0 - 1e-8, at_least: true },
            Check { name: "entropy_closed_vs_gram", n_nodes: n, value: entropy_gap, threshold: 1e-12, at_least: false },
            Check {
                name: "entropy_at_2pi",
                n_nodes: n,
                value: linear_entropy_closed(&cfg, TAU).abs(),
                threshold: 1e-10,
                at_least: false,
            },
            Check {
                name: "fock_impurity_at_2pi",
                n_nodes: n,
                value: (1.0 - purity_numeric(&returned)).abs(),
                threshold: 1e-7,
                at_least: false,
            },
            Check { name: "return_overlap_min", n_nodes: n, value: overlap, threshold: 1.0 - 1e-8, at_least: true },
            Check {
                name: "qfim_numeric_vs_analytic",
                n_nodes: n,
                value: q_numeric.relative_error(&q_analytic),
                threshold: 1e-6,
                at_least: false,
            },
        ]);
    }

    let mut t = Table::new(&["check", "n_nodes", "value", "threshold", "status"]);
    let mut failed = Vec::new();
    for c in &checks {
        let pass = c.passed();
        if !pass {
            failed.push(format!("{} (N = {})", c.name, c.n_nodes));
        }
        t.push([
            c.name.to_owned(),
            c.n_nodes.to_string(),
            num(c.value),
            num(c.threshold),
            if pass { "pass" } else { "fail" }.into(),
        ]);
    }
    let failure = (!failed.is_empty()).then(|| format!("oracle checks failed: {}", failed.join(", ")));
    Ok((t, failure))
}
