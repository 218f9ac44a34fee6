//! SI-unit bounds for concrete platforms and the figure sweeps.
//!
//! Frequencies are read as angular frequencies in rad/s. Case 1 converts the
//! driving bound into gravimetry through `g = Ωħ E / (x_0 M)`; Case 2 converts
//! the coupling bound through `k̃ = kΩ`.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::probe::Case;

/// Reduced Planck constant in J·s.
pub const HBAR: f64 = 1.054_571_817e-34;

/// Repetition count used by both figure sweeps.
pub const FIGURE_MU: u64 = 10_000;

/// Upper end of the `N` and `N_exc` grids in the figure sweeps.
pub const FIGURE_GRID_MAX: u32 = 30;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PlatformKind {
    /// Photon-number probe: `λ = N_exc`, `λ' = 0`.
    Optomechanical,
    /// Collective spin probe: `λ = N_exc/2`, `λ' = 0`, needs `N_exc ≥ 2`.
    SpinMechanical,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PlatformPreset {
    pub name: String,
    pub kind: PlatformKind,
    /// Mechanical angular frequency in rad/s.
    pub omega: f64,
    /// Mechanical mass in kg.
    pub mass: f64,
    /// Dimensionless coupling `k`.
    pub coupling: f64,
}

pub const PRESET_NAMES: [&str; 4] = ["fabry-perot", "levitated", "cold-atoms", "spin-mechanical"];

impl PlatformPreset {
    pub fn new(name: &str, kind: PlatformKind, omega: f64, mass: f64, coupling: f64) -> Result<Self> {
        for (value, what) in [(omega, "omega"), (mass, "mass"), (coupling, "coupling")] {
            if !(value > 0.0) || !value.is_finite() {
                return Err(Error::NonPositiveInput(what));
            }
        }
        Ok(Self { name: name.to_owned(), kind, omega, mass, coupling })
    }

    pub fn by_name(name: &str) -> Result<Self> {
        use PlatformKind::*;
        let (kind, omega, mass, coupling) = match name {
            "fabry-perot" => (Optomechanical, 1e3, 1e-6, 2.3),
            "levitated" => (Optomechanical, 1e2, 1e-14, 1963.0),
            "cold-atoms" => (Optomechanical, 1e2, 1e-25, 2.3e6),
            "spin-mechanical" => (SpinMechanical, 1e3, 1e-15, 1.0),
            other => {
                return Err(Error::ConfigInvalid(format!(
                    "unknown platform '{other}' (expected one of {})",
                    PRESET_NAMES.join(", ")
                )))
            }
        };
        Self::new(name, kind, omega, mass, coupling)
    }

    pub fn all() -> Vec<Self> {
        PRESET_NAMES.iter().map(|n| Self::by_name(n).expect("built-in preset")).collect()
    }

    /// `Ωħ / (x_0 M)` in m/s², which squares to `2Ω³ħ/M`.
    pub fn acceleration_scale(&self) -> f64 {
        self.omega * HBAR / (zero_point_unchecked(self.mass, self.omega) * self.mass)
    }

    /// Bound for the given case with the resource checks of this platform.
    pub fn bound(&self, case: Case, n_nodes: u32, n_exc: u32, mu: u64) -> Result<Bound> {
        match (case, self.kind) {
            (Case::Case1, PlatformKind::SpinMechanical) => Err(Error::CaseConditionViolated(
                "the spin-mechanical platform senses couplings (Case 2) only".into(),
            )),
            (Case::Case1, _) => case1_gravimetry_bound(self, n_nodes, n_exc, mu),
            (Case::Case2, PlatformKind::SpinMechanical) if n_exc < 2 => Err(Error::InvalidResourceCount(
                "spin probes need N_exc >= 2; spin-1/2 makes every phase prefactor vanish".into(),
            )),
            (Case::Case2, _) => case2_coupling_bound(self.omega, self.coupling, n_nodes, n_exc, mu),
        }
    }
}

/// Scalar bound on the summed variances with its square root.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Bound {
    pub variance: f64,
    pub rms: f64,
}

impl Bound {
    fn new(variance: f64) -> Self {
        Self { variance, rms: variance.sqrt() }
    }
}

fn zero_point_unchecked(mass: f64, omega: f64) -> f64 {
    (HBAR / (2.0 * mass * omega)).sqrt()
}

/// `x_0 = √(ħ / (2MΩ))` in metres.
pub fn zero_point(mass: f64, omega: f64) -> Result<f64> {
    if !(mass > 0.0) {
        return Err(Error::NonPositiveInput("mass"));
    }
    if !(omega > 0.0) {
        return Err(Error::NonPositiveInput("omega"));
    }
    Ok(zero_point_unchecked(mass, omega))
}

fn check_resources(n_nodes: u32, n_exc: u32, mu: u64) -> Result<()> {
    if n_nodes < 2 {
        return Err(Error::InvalidResourceCount(format!("network needs at least 2 nodes, got {n_nodes}")));
    }
    if n_exc < 1 {
        return Err(Error::InvalidResourceCount("N_exc must be at least 1".into()));
    }
    if mu < 1 {
        return Err(Error::InvalidResourceCount("mu must be at least 1".into()));
    }
    Ok(())
}

/// `Σ Var[g_j⁻] ≥ N(N-1) / (32π² k² N_exc² μ) · (Ωħ/(x_0 M))²` in m²/s⁴.
pub fn case1_gravimetry_bound(preset: &PlatformPreset, n_nodes: u32, n_exc: u32, mu: u64) -> Result<Bound> {
    check_resources(n_nodes, n_exc, mu)?;
    let n = f64::from(n_nodes);
    let k = preset.coupling;
    let nexc = f64::from(n_exc);
    let scale = preset.acceleration_scale();
    Ok(Bound::new(n * (n - 1.0) / (32.0 * PI * PI * k * k * nexc * nexc) * scale * scale / mu as f64))
}

/// `Σ Var[k̃_j⁻] ≳ Ω² N(N-1) / (2π² k² N_exc⁴ μ)` in Hz², the form with every
/// `k_j⁺` replaced by `2k`.
pub fn case2_coupling_bound(omega: f64, coupling: f64, n_nodes: u32, n_exc: u32, mu: u64) -> Result<Bound> {
    check_resources(n_nodes, n_exc, mu)?;
    if !(omega > 0.0) {
        return Err(Error::NonPositiveInput("omega"));
    }
    if !(coupling > 0.0) {
        return Err(Error::NonPositiveInput("coupling"));
    }
    let n = f64::from(n_nodes);
    let nexc = f64::from(n_exc);
    Ok(Bound::new(
        omega * omega * n * (n - 1.0) / (2.0 * PI * PI * coupling * coupling * nexc.powi(4) * mu as f64),
    ))
}

/// `Σ Var[k̃_j⁻] ≥ 2Ω²N / (π² N_exc⁴ μ) · Σ_j (k_j⁺)⁻²`, with `N = len(k_plus) + 1`.
pub fn case2_coupling_bound_exact(omega: f64, k_plus: &[f64], n_exc: u32, mu: u64) -> Result<Bound> {
    let n_nodes = u32::try_from(k_plus.len() + 1).map_err(|_| Error::InvalidResourceCount("too many nodes".into()))?;
    check_resources(n_nodes, n_exc, mu)?;
    if !(omega > 0.0) {
        return Err(Error::NonPositiveInput("omega"));
    }
    if let Some(index) = k_plus.iter().position(|k| *k == 0.0 || !k.is_finite()) {
        return Err(Error::SingularBeta { index });
    }
    let n = f64::from(n_nodes);
    let nexc = f64::from(n_exc);
    let sum: f64 = k_plus.iter().map(|k| 1.0 / (k * k)).sum();
    Ok(Bound::new(2.0 * omega * omega * n / (PI * PI * nexc.powi(4) * mu as f64) * sum))
}

fn resource_exponent(case: Case) -> i32 {
    match case {
        Case::Case1 => 2,
        Case::Case2 => 4,
    }
}

/// `N(N-1) / N_exc^r` with `r = 2` for Case 1 and `r = 4` for Case 2.
pub fn dimensionless_factor(case: Case, n_nodes: u32, n_exc: u32) -> f64 {
    let n = f64::from(n_nodes);
    n * (n - 1.0) / f64::from(n_exc).powi(resource_exponent(case))
}

/// Smallest `N_exc` for which the dimensionless factor is at most 1.
pub fn resource_tradeoff(case: Case, n_nodes: u32) -> u32 {
    let pairs = u64::from(n_nodes) * u64::from(n_nodes.saturating_sub(1));
    let r = resource_exponent(case) as u32;
    (1u32..).find(|x| u64::from(*x).pow(r) >= pairs).expect("grows without bound")
}

/// One point of a figure sweep.
#[derive(Clone, Debug, PartialEq)]
pub struct FigureRow {
    /// `a`: dimensionless factor map; `b`: sweep in `N`; `c`: sweep in `N_exc`.
    pub panel: char,
    /// `None` for the dimensionless panel.
    pub platform: Option<String>,
    pub n_nodes: u32,
    pub n_exc: u32,
    /// Dimensionless factor in panel `a`, summed-variance bound otherwise.
    pub value: f64,
    pub rms: Option<f64>,
}

fn sweep(case: Case, platforms: &[PlatformPreset], fixed_exc: u32, fixed_n: u32, mu: u64) -> Result<Vec<FigureRow>> {
    let mut rows = Vec::new();
    for n in 2..=FIGURE_GRID_MAX {
        for x in 1..=FIGURE_GRID_MAX {
            rows.push(FigureRow {
                panel: 'a',
                platform: None,
                n_nodes: n,
                n_exc: x,
                value: dimensionless_factor(case, n, x),
                rms: None,
            });
        }
    }
    let mut platform_rows = |panel: char, points: Vec<(u32, u32)>| -> Result<()> {
        for p in platforms {
            for &(n, x) in &points {
                match p.bound(case, n, x, mu) {
                    Ok(b) => rows.push(FigureRow {
                        panel,
                        platform: Some(p.name.clone()),
                        n_nodes: n,
                        n_exc: x,
                        value: b.variance,
                        rms: Some(b.rms),
                    }),
                    Err(Error::InvalidResourceCount(_)) => {}
                    Err(e) => return Err(e),
                }
            }
        }
        Ok(())
    };
    platform_rows('b', (2..=FIGURE_GRID_MAX).map(|n| (n, fixed_exc)).collect())?;
    platform_rows('c', (1..=FIGURE_GRID_MAX).map(|x| (fixed_n, x)).collect())?;
    Ok(rows)
}

/// Case 1 sweeps: factor map, `N` sweep at `N_exc = 1`, `N_exc` sweep at
/// `N = 10`, for the three optomechanical presets.
pub fn figure2_rows(mu: u64) -> Result<Vec<FigureRow>> {
    let platforms: Vec<PlatformPreset> =
        PlatformPreset::all().into_iter().filter(|p| p.kind == PlatformKind::Optomechanical).collect();
    sweep(Case::Case1, &platforms, 1, 10, mu)
}

/// Case 2 sweeps: factor map, `N` sweep at `N_exc = 2`, `N_exc` sweep at
/// `N = 10`, for all presets. Spin rows start at `N_exc = 2`.
pub fn figure3_rows(mu: u64) -> Result<Vec<FigureRow>> {
    sweep(Case::Case2, &PlatformPreset::all(), 2, 10, mu)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimation::trace_inverse_qfim;
    use crate::probe::{case_phases, NetworkConfig};
    use crate::C64;
    use approx::assert_relative_eq;

    #[test]
    fn zero_point_values() {
        let lev = PlatformPreset::by_name("levitated").unwrap();
        let x0 = zero_point(lev.mass, lev.omega).unwrap();
        assert_relative_eq!(x0, 7.26e-12, max_relative = 1e-3);
        let fp = PlatformPreset::by_name("fabry-perot").unwrap();
        assert_relative_eq!(zero_point(fp.mass, fp.omega).unwrap(), (1.054571817e-34f64 / 2e-3).sqrt(), max_relative = 1e-14);
        assert_relative_eq!(zero_point(4.0, 3.0).unwrap(), 0.5 * zero_point(1.0, 3.0).unwrap(), max_relative = 1e-15);
        assert_eq!(zero_point(0.0, 1.0), Err(Error::NonPositiveInput("mass")));
    }

    #[test]
    fn acceleration_scale_identity() {
        for p in PlatformPreset::all() {
            let s = p.acceleration_scale();
            assert_relative_eq!(s * s, 2.0 * p.omega.powi(3) * HBAR / p.mass, max_relative = 1e-14);
        }
    }

    /// Exponents of (kg, m, s) carried alongside a value.
    #[derive(Clone, Copy, Debug, PartialEq)]
    struct Dim(i32, i32, i32);

    impl std::ops::Mul for Dim {
        type Output = Dim;
        fn mul(self, o: Dim) -> Dim {
            Dim(self.0 + o.0, self.1 + o.1, self.2 + o.2)
        }
    }

    impl std::ops::Div for Dim {
        type Output = Dim;
        fn div(self, o: Dim) -> Dim {
            Dim(self.0 - o.0, self.1 - o.1, self.2 - o.2)
        }
    }

    #[test]
    fn acceleration_scale_has_acceleration_units() {
        let per_second = Dim(0, 0, -1);
        let joule_second = Dim(1, 2, -1);
        let kg = Dim(1, 0, 0);
        let x0_sq = joule_second / (kg * per_second);
        assert_eq!(x0_sq, Dim(0, 2, 0));
        let x0 = Dim(0, 1, 0);
        assert_eq!(per_second * joule_second / (x0 * kg), Dim(0, 1, -2));
    }

    #[test]
    fn levitated_case1_point() {
        let lev = PlatformPreset::by_name("levitated").unwrap();
        let b = case1_gravimetry_bound(&lev, 2, 1, 10_000).unwrap();
        assert_relative_eq!(b.variance, 3.47e-27, max_relative = 2e-3);
        assert_relative_eq!(b.rms, 5.9e-14, max_relative = 2e-3);
    }

    #[test]
    fn case1_matches_dimensionless_trace_chain() {
        // Tr Q⁻¹ at λ = N_exc, λ' = 0, scaled by the squared acceleration unit.
        let p = PlatformPreset::by_name("fabry-perot").unwrap();
        for (n, x) in [(2u32, 1u32), (5, 3), (11, 7)] {
            let cfg = NetworkConfig::uniform_coupling(
                f64::from(x),
                0.0,
                p.coupling,
                (0..n).map(|j| 0.01 * f64::from(j)).collect(),
                C64::new(0.0, 0.0),
            )
            .unwrap();
            let tr = trace_inverse_qfim(&case_phases(&cfg, Case::Case1).unwrap());
            let expected = tr * p.acceleration_scale().powi(2) / 1e4;
            assert_relative_eq!(case1_gravimetry_bound(&p, n, x, 10_000).unwrap().variance, expected, max_relative = 1e-12);
        }
    }

    #[test]
    fn case2_exact_reduces_to_approximation() {
        let k = 0.37;
        let exact = case2_coupling_bound_exact(5.0, &[2.0 * k; 6], 4, 100).unwrap();
        let approx = case2_coupling_bound(5.0, k, 7, 4, 100).unwrap();
        assert_relative_eq!(exact.variance, approx.variance, max_relative = 1e-14);
    }

    #[test]
    fn case2_exact_matches_dimensionless_trace_chain() {
        let omega = 3.0;
        let x = 4u32;
        let k = vec![1.0, 0.8, 0.6, 0.3];
        let cfg = NetworkConfig::undriven(f64::from(x) / 2.0, 0.0, k.clone(), C64::new(0.0, 0.0)).unwrap();
        let ph = case_phases(&cfg, Case::Case2).unwrap();
        let expected = trace_inverse_qfim(&ph) * omega * omega / 50.0;
        let got = case2_coupling_bound_exact(omega, ph.k_plus().unwrap(), x, 50).unwrap();
        assert_relative_eq!(got.variance, expected, max_relative = 1e-12);
    }

    #[test]
    fn resource_scalings() {
        let p = PlatformPreset::by_name("cold-atoms").unwrap();
        let b1 = case1_gravimetry_bound(&p, 4, 3, 100).unwrap().variance;
        let b2 = case1_gravimetry_bound(&p, 4, 6, 100).unwrap().variance;
        assert_relative_eq!(b1 / b2, 4.0, max_relative = 1e-14);
        let c1 = case2_coupling_bound(p.omega, p.coupling, 4, 3, 100).unwrap().variance;
        let c2 = case2_coupling_bound(p.omega, p.coupling, 4, 6, 100).unwrap().variance;
        assert_relative_eq!(c1 / c2, 16.0, max_relative = 1e-14);
        for n in 2..20u32 {
            let r = case1_gravimetry_bound(&p, n, 2, 10).unwrap().variance / case1_gravimetry_bound(&p, 2, 2, 10).unwrap().variance;
            assert_relative_eq!(r, f64::from(n * (n - 1)) / 2.0, max_relative = 1e-13);
        }
    }

    #[test]
    fn tradeoff_examples() {
        assert_eq!(resource_tradeoff(Case::Case1, 10), 10);
        assert_eq!(resource_tradeoff(Case::Case2, 10), 4);
        assert_eq!(resource_tradeoff(Case::Case1, 2), 2);
    }

    #[test]
    fn platform_hierarchies() {
        let names = ["fabry-perot", "levitated", "cold-atoms"];
        let presets: Vec<PlatformPreset> = names.iter().map(|n| PlatformPreset::by_name(n).unwrap()).collect();
        for (n, x) in [(2, 1), (10, 1), (10, 10), (30, 30)] {
            let c1: Vec<f64> = presets.iter().map(|p| p.bound(Case::Case1, n, x, FIGURE_MU).unwrap().variance).collect();
            assert!(c1[1] < c1[0] && c1[1] < c1[2]);
            let c2: Vec<f64> = PlatformPreset::all()
                .iter()
                .map(|p| p.bound(Case::Case2, n, x.max(2), FIGURE_MU).unwrap().variance)
                .collect();
            assert!(c2[2] < c2[0] && c2[2] < c2[1] && c2[2] < c2[3]);
        }
    }

    #[test]
    fn resource_validation() {
        let spin = PlatformPreset::by_name("spin-mechanical").unwrap();
        assert!(matches!(spin.bound(Case::Case2, 3, 1, 10), Err(Error::InvalidResourceCount(_))));
        assert!(matches!(spin.bound(Case::Case1, 3, 2, 10), Err(Error::CaseConditionViolated(_))));
        let lev = PlatformPreset::by_name("levitated").unwrap();
        assert!(matches!(lev.bound(Case::Case1, 1, 1, 10), Err(Error::InvalidResourceCount(_))));
        assert!(matches!(lev.bound(Case::Case1, 2, 0, 10), Err(Error::InvalidResourceCount(_))));
        assert!(matches!(lev.bound(Case::Case1, 2, 1, 0), Err(Error::InvalidResourceCount(_))));
        assert!(PlatformPreset::by_name("nope").is_err());
        assert!(PlatformPreset::new("x", PlatformKind::Optomechanical, 1.0, -1.0, 1.0).is_err());
    }

    #[test]
    fn figure_row_counts() {
        let f2 = figure2_rows(FIGURE_MU).unwrap();
        assert_eq!(f2.iter().filter(|r| r.panel == 'a').count(), 29 * 30);
        assert_eq!(f2.iter().filter(|r| r.panel == 'b').count(), 3 * 29);
        assert_eq!(f2.iter().filter(|r| r.panel == 'c').count(), 3 * 30);
        let f3 = figure3_rows(FIGURE_MU).unwrap();
        assert_eq!(f3.iter().filter(|r| r.panel == 'b').count(), 4 * 29);
        assert_eq!(f3.iter().filter(|r| r.panel == 'c').count(), 4 * 30 - 1);
    }
}
