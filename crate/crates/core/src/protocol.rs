//! JC ↔ anti-JC switching for single-spin detection, dressed frequency
//! shifts and the detection estimates for realistic resonators.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::evolve::{evolve_piecewise, Observable, TimeSeries};
use crate::hamiltonian::{full_hamiltonian, LARGE_DETUNING_LIMIT};
use crate::hilbert::{build_operators, QuantumState};
use crate::model::{paper_coupling, quantum_regime_temperature, ModelParams};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CouplingModel {
    /// φ = 0
    Jc,
    /// φ = π
    AntiJc,
}

impl CouplingModel {
    pub fn phase(self) -> f64 {
        match self {
            CouplingModel::Jc => 0.0,
            CouplingModel::AntiJc => PI,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            CouplingModel::Jc => "jc",
            CouplingModel::AntiJc => "anti_jc",
        }
    }

    fn sign(self) -> f64 {
        match self {
            CouplingModel::Jc => 1.0,
            CouplingModel::AntiJc => -1.0,
        }
    }
}

/// Dressed resonator frequency shift `±2g²⟨S⟩/Δ` (`+` for JC).
pub fn dressed_shift(params: &ModelParams, spin_expect: f64, model: CouplingModel) -> Result<f64> {
    shift_with_detuning(params.g, params.delta(), spin_expect, model)
}

fn shift_with_detuning(g: f64, delta: f64, spin_expect: f64, model: CouplingModel) -> Result<f64> {
    if delta == 0.0 {
        return Err(Error::SingularDetuning);
    }
    if g / delta > LARGE_DETUNING_LIMIT {
        log::warn!("g/delta = {:.3} is outside the large-detuning regime", g / delta);
    }
    Ok(model.sign() * 2.0 * g * g * spin_expect / delta)
}

/// `δf / ω_c`.
pub fn estimate_resolving_power(delta_f: f64, omega_c: f64) -> Result<f64> {
    if !(delta_f >= 0.0) || !(omega_c > 0.0) {
        return Err(Error::InvalidArgument("resolving power needs delta_f >= 0 and omega_c > 0".into()));
    }
    Ok(delta_f / omega_c)
}

/// A resonator for the detection estimate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Scenario {
    pub name: &'static str,
    /// Field gradient (T/m).
    pub gradient: f64,
    /// Spring constant (N/m).
    pub k_eff: f64,
    /// Angular frequency (rad/s).
    pub omega_c: f64,
}

const OSCAR_GRADIENT: f64 = 1e5;
const OSCAR_K: f64 = 1.1e-4;
const OSCAR_OMEGA: f64 = 5.5e3;
const GHZ_OMEGA: f64 = 1.5e9;

/// Cantilever of the OSCAR experiment, the same structure scaled to GHz
/// (`k_eff ∝ ω_c²`), and the GHz antenna resonator.
pub fn scenarios() -> [Scenario; 3] {
    let scale = GHZ_OMEGA / OSCAR_OMEGA;
    [
        Scenario { name: "oscar", gradient: OSCAR_GRADIENT, k_eff: OSCAR_K, omega_c: OSCAR_OMEGA },
        Scenario { name: "simple_ghz", gradient: OSCAR_GRADIENT, k_eff: OSCAR_K * scale * scale, omega_c: GHZ_OMEGA },
        Scenario { name: "antenna_ghz", gradient: OSCAR_GRADIENT, k_eff: 300.0, omega_c: GHZ_OMEGA },
    ]
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScenarioRow {
    pub scenario: Scenario,
    /// Coupling from the rounded prefactor (rad/s).
    pub g: f64,
    /// `g²/Δ` (rad/s, quoted as Hz in the estimates).
    pub delta_f: f64,
    /// `delta_f / 2π`.
    pub delta_f_cyclic: f64,
    /// `ħω_c / k_B` (K).
    pub t_quantum: f64,
    pub resolving_power: f64,
}

/// Estimates at `g/Δ = 0.1`.
pub fn scenario_table() -> Vec<ScenarioRow> {
    scenario_table_at(0.1)
}

pub fn scenario_table_at(g_over_delta: f64) -> Vec<ScenarioRow> {
    scenarios()
        .into_iter()
        .map(|scenario| {
            let g = paper_coupling(scenario.gradient, scenario.omega_c, scenario.k_eff);
            let delta = g / g_over_delta;
            let delta_f = shift_with_detuning(g, delta, 0.5, CouplingModel::Jc).unwrap_or(0.0);
            ScenarioRow {
                scenario,
                g,
                delta_f,
                delta_f_cyclic: delta_f / (2.0 * PI),
                t_quantum: quantum_regime_temperature(scenario.omega_c),
                resolving_power: delta_f / scenario.omega_c,
            }
        })
        .collect()
}

/// Alternating φ = 0, π segments, starting with JC.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SwitchSchedule {
    half_period: f64,
    n_cycles: usize,
}

impl SwitchSchedule {
    pub fn new(half_period: f64, n_cycles: usize) -> Result<Self> {
        if !(half_period.is_finite() && half_period > 0.0) {
            return Err(Error::InvalidArgument(format!("half_period must be positive, got {half_period}")));
        }
        if n_cycles == 0 {
            return Err(Error::InvalidArgument("n_cycles must be at least 1".into()));
        }
        Ok(Self { half_period, n_cycles })
    }

    pub fn half_period(&self) -> f64 {
        self.half_period
    }

    pub fn n_cycles(&self) -> usize {
        self.n_cycles
    }

    pub fn models(&self) -> impl Iterator<Item = CouplingModel> {
        (0..2 * self.n_cycles).map(|i| if i % 2 == 0 { CouplingModel::Jc } else { CouplingModel::AntiJc })
    }

    pub fn phase_sequence(&self) -> Vec<f64> {
        self.models().map(CouplingModel::phase).collect()
    }
}

/// Piecewise evolution under the full Hamiltonian with φ switched between 0
/// and π. Columns: `segment`, `model` (0 = JC, 1 = anti-JC), `sz`, `n`, `x`
/// and `shift`, the analytic dressed shift `±2g²⟨S_z⟩/Δ` using `⟨S_z⟩` at the
/// start of each segment.
///
/// `Δ = ||ω_s| − ω_c|` is the detuning of whichever coupling is co-rotating,
/// so it is the same for both phases.
pub fn simulate_switching(
    params: &ModelParams,
    schedule: &SwitchSchedule,
    initial: &QuantumState,
    samples_per_segment: usize,
) -> Result<TimeSeries> {
    let space = initial.space();
    let base = ModelParams::new(params.omega_c, params.rabi_frequency(), params.g, 0.0)?;
    let delta = base.delta();
    let h_jc = full_hamiltonian(&base, space);
    let h_ajc = full_hamiltonian(&base.with_phase(PI)?, space);
    let models: Vec<CouplingModel> = schedule.models().collect();
    let segments: Vec<_> = models
        .iter()
        .map(|m| match m {
            CouplingModel::Jc => (&h_jc, schedule.half_period),
            CouplingModel::AntiJc => (&h_ajc, schedule.half_period),
        })
        .collect();

    let ops = build_operators(space);
    let observables = [
        Observable::expect("sz", ops.sz),
        Observable::expect("n", ops.n),
        Observable::expect("x", ops.x),
    ];
    let evolution = evolve_piecewise(initial, &segments, samples_per_segment, &observables)?;
    let src = evolution.series;

    let seg = src.column("segment").unwrap();
    let sz = src.column("sz").unwrap();
    let mut model_col = Vec::with_capacity(src.len());
    let mut shift_col = Vec::with_capacity(src.len());
    let mut start_sz = sz[0];
    let mut current = 0usize;
    for (i, &s) in seg.iter().enumerate() {
        let s = s as usize;
        if s != current {
            // sample i−1 closed the previous segment
            start_sz = sz[i - 1];
            current = s;
        }
        let model = models[s];
        model_col.push(if model == CouplingModel::Jc { 0.0 } else { 1.0 });
        shift_col.push(shift_with_detuning(params.g, delta, start_sz, model)?);
    }

    let mut out = TimeSeries::new(src.times().to_vec())?;
    out.push_column("segment", seg.to_vec())?;
    out.push_column("model", model_col)?;
    for label in ["sz", "n", "x"] {
        out.push_column(label, src.column(label).unwrap().to_vec())?;
    }
    out.push_column("shift", shift_col)?;
    for w in src.warnings() {
        out.warn(w.clone());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evolve::{evolve, linspace, Spectral};
    use crate::hamiltonian::jc_hamiltonian;
    use crate::hilbert::{coherent_state, SpaceSpec, Spin};
    use crate::C64;

    #[test]
    fn shift_symmetries() {
        let p = ModelParams::new(1.0, 1.5, 0.05, 0.0).unwrap();
        for s in [-0.5, -0.2, 0.0, 0.3, 0.5] {
            let jc = dressed_shift(&p, s, CouplingModel::Jc).unwrap();
            let ajc = dressed_shift(&p, s, CouplingModel::AntiJc).unwrap();
            assert_eq!(jc, -ajc);
            assert_eq!(jc, -dressed_shift(&p, -s, CouplingModel::Jc).unwrap());
        }
        assert_eq!(dressed_shift(&p, 0.0, CouplingModel::Jc).unwrap(), 0.0);
        let resonant = ModelParams::new(1.0, 1.0, 0.05, 0.0).unwrap();
        assert!(matches!(dressed_shift(&resonant, 0.5, CouplingModel::Jc), Err(Error::SingularDetuning)));
    }

    #[test]
    fn headline_shift() {
        let g = 70.710_678_118_654_76;
        let p = ModelParams::new(5.5e3, 5.5e3 + 10.0 * g, g, 0.0).unwrap();
        let shift = dressed_shift(&p, 0.5, CouplingModel::Jc).unwrap();
        assert!((shift - 7.0710678118654755).abs() < 1e-9);
    }

    #[test]
    fn scenarios_reproduce_estimates() {
        let rows = scenario_table();
        assert!((rows[0].delta_f - 7.0).abs() < 0.15 * 7.0);
        assert!(rows[1].delta_f > 0.01 / 3.0 && rows[1].delta_f < 0.03);
        assert!(rows[2].delta_f > 1.5 && rows[2].delta_f < 6.0);
        assert!((rows[0].t_quantum - 42e-9).abs() < 0.05 * 42e-9);
        assert!((rows[2].delta_f / rows[1].delta_f) > 100.0);
    }

    #[test]
    fn resolving_power() {
        assert_eq!(estimate_resolving_power(0.0, 1e6).unwrap(), 0.0);
        let r = estimate_resolving_power(20.0, 1e6 * 2.0 * PI).unwrap();
        assert!(r > 1e-6 && r < 1e-5);
        assert!((estimate_resolving_power(1e-3, 1e3).unwrap() - 1e-6).abs() < 1e-18);
        assert!(estimate_resolving_power(1.0, 0.0).is_err());
    }

    #[test]
    fn schedule_phases() {
        let s = SwitchSchedule::new(2.0, 3).unwrap();
        assert_eq!(s.phase_sequence(), vec![0.0, PI, 0.0, PI, 0.0, PI]);
        assert!(SwitchSchedule::new(0.0, 3).is_err());
        assert!(SwitchSchedule::new(1.0, 0).is_err());
    }

    #[test]
    fn no_coupling_freezes_spin() {
        let space = SpaceSpec::new(40).unwrap();
        let p = ModelParams::new(1.0, 1.1, 0.0, 0.0).unwrap();
        let spin = [C64::new(0.6, 0.0), C64::new(0.8, 0.0)];
        let psi = coherent_state(space, C64::new(1.0, 0.0), spin).unwrap();
        let s = simulate_switching(&p, &SwitchSchedule::new(5.0, 2).unwrap(), &psi, 10).unwrap();
        let sz = s.column("sz").unwrap();
        assert!(sz.iter().all(|v| (v - sz[0]).abs() < 1e-12));
    }

    #[test]
    fn dressed_spacing_matches_shift() {
        // level spacing of the dressed |↑,n⟩ ladder vs ω_c + 2g²⟨S⟩/Δ
        let (wc, delta) = (1.0, 0.2);
        for &ratio in &[0.02, 0.05, 0.1] {
            let g = ratio * delta;
            let p = ModelParams::new(wc, wc + delta, g, 0.0).unwrap();
            let space = SpaceSpec::new(8).unwrap();
            let spectral = Spectral::new(&jc_hamiltonian(&p, space)).unwrap();
            let dressed = |n: usize, spin: Spin| {
                let basis = QuantumState::basis(space, n, spin).unwrap();
                let coords = spectral.project(&basis).unwrap();
                let (best, _) = coords.iter().enumerate().max_by(|a, b| a.1.norm().total_cmp(&b.1.norm())).unwrap();
                spectral.energies()[best]
            };
            for (spin, s) in [(Spin::Up, 0.5), (Spin::Down, -0.5)] {
                let lo = if spin == Spin::Up { 0 } else { 1 };
                let spacing = dressed(lo + 1, spin) - dressed(lo, spin);
                let shift = dressed_shift(&p, s, CouplingModel::Jc).unwrap();
                let rel = ((spacing - wc) - shift).abs() / shift.abs();
                assert!(rel < 3.0 * ratio * ratio, "ratio={ratio} spin={spin:?}: rel {rel}");
            }
        }
    }

    #[test]
    fn fast_switching_approaches_average_hamiltonian() {
        let space = SpaceSpec::new(30).unwrap();
        let p = ModelParams::new(1.0, 1.1, 0.005, 0.0).unwrap();
        let psi = coherent_state(space, C64::new(1.0, 0.0), [C64::new(0.0, 0.0), C64::new(1.0, 0.0)]).unwrap();
        let total = 40.0;
        let ops = build_operators(space);
        let h_avg = &(&(&ops.n + &(&ops.identity * 0.5)) * 1.0) + &(&(&ops.x * &(&ops.s_plus + &ops.s_minus)) * p.g);
        let target = evolve(&psi, &h_avg, &[total], &[]).unwrap().final_state;

        let infidelity = |half: f64| {
            let cycles = (total / (2.0 * half)).round() as usize;
            let schedule = SwitchSchedule::new(half, cycles).unwrap();
            let base = p;
            let h0 = full_hamiltonian(&base, space);
            let h1 = full_hamiltonian(&base.with_phase(PI).unwrap(), space);
            let segs: Vec<_> = schedule.models().map(|m| if m == CouplingModel::Jc { (&h0, half) } else { (&h1, half) }).collect();
            let out = evolve_piecewise(&psi, &segs, 1, &[]).unwrap().final_state;
            1.0 - out.fidelity(&target).unwrap()
        };
        let errs: Vec<f64> = [2.0, 1.0, 0.5].iter().map(|&h| infidelity(h)).collect();
        assert!(errs[1] < errs[0] && errs[2] < errs[1], "{errs:?}");
        // second order in the switching period for the infidelity
        assert!(errs[0] / errs[2] > 8.0, "{errs:?}");
        let _ = linspace(0.0, 1.0, 2);
    }
}
