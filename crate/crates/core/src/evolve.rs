//! Exact time evolution on the truncated space via spectral propagators.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::hamiltonian::{full_hamiltonian, jc_hamiltonian};
use crate::hilbert::{
    expectation, quadrature_extrema, Operator, QuantumState, SpaceSpec, LEAK_TOL,
};
use crate::model::ModelParams;
use crate::C64;

/// Relative Hermiticity tolerance accepted by the propagator.
pub const HERMITIAN_TOL: f64 = 1e-10;

/// Sampled observables on a strictly increasing time grid.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct TimeSeries {
    times: Vec<f64>,
    columns: Vec<(String, Vec<f64>)>,
    warnings: Vec<String>,
}

impl TimeSeries {
    pub fn new(times: Vec<f64>) -> Result<Self> {
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidArgument("time grid must be strictly increasing".into()));
        }
        if times.iter().any(|t| !t.is_finite()) {
            return Err(Error::InvalidArgument("time grid must be finite".into()));
        }
        Ok(Self { times, columns: Vec::new(), warnings: Vec::new() })
    }

    pub fn push_column(&mut self, label: impl Into<String>, values: Vec<f64>) -> Result<()> {
        let label = label.into();
        if values.len() != self.times.len() {
            return Err(Error::DimensionMismatch { left: self.times.len(), right: values.len() });
        }
        if self.column(&label).is_some() {
            return Err(Error::InvalidArgument(format!("duplicate column `{label}`")));
        }
        self.columns.push((label, values));
        Ok(())
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn column(&self, label: &str) -> Option<&[f64]> {
        self.columns.iter().find(|(l, _)| l == label).map(|(_, v)| v.as_slice())
    }

    pub fn columns(&self) -> impl Iterator<Item = (&str, &[f64])> {
        self.columns.iter().map(|(l, v)| (l.as_str(), v.as_slice()))
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    pub fn warn(&mut self, message: String) {
        log::warn!("{message}");
        self.warnings.push(message);
    }

    /// Rescale the time axis, e.g. to dimensionless `g·t`.
    pub fn scale_times(&mut self, factor: f64) {
        assert!(factor > 0.0);
        for t in &mut self.times {
            *t *= factor;
        }
    }
}

/// `n` evenly spaced points from `start` to `end` inclusive.
pub fn linspace(start: f64, end: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![start],
        _ => (0..n).map(|i| start + (end - start) * i as f64 / (n - 1) as f64).collect(),
    }
}

/// Quantity sampled along a trajectory.
#[derive(Clone, Debug)]
pub enum Observable {
    /// Real part of `⟨ψ|O|ψ⟩`.
    Expect { label: String, op: Operator },
    /// `min_θ Var(X_θ)`.
    MinQuadratureVariance,
    MaxQuadratureVariance,
    SpinUpProbability,
    Norm,
}

impl Observable {
    pub fn expect(label: impl Into<String>, op: Operator) -> Self {
        Observable::Expect { label: label.into(), op }
    }

    pub fn label(&self) -> &str {
        match self {
            Observable::Expect { label, .. } => label,
            Observable::MinQuadratureVariance => "var_min",
            Observable::MaxQuadratureVariance => "var_max",
            Observable::SpinUpProbability => "p_up",
            Observable::Norm => "norm",
        }
    }

    pub fn eval(&self, state: &QuantumState) -> Result<f64> {
        Ok(match self {
            Observable::Expect { op, .. } => expectation(state, op)?.re,
            Observable::MinQuadratureVariance => quadrature_extrema(state).min,
            Observable::MaxQuadratureVariance => quadrature_extrema(state).max,
            Observable::SpinUpProbability => state.spin_up_probability(),
            Observable::Norm => state.norm(),
        })
    }
}

/// Eigendecomposition `H = V diag(E) V†` of a Hermitian operator.
#[derive(Clone, Debug)]
pub struct Spectral {
    space: SpaceSpec,
    energies: Vec<f64>,
    vectors: DMatrix<C64>,
}

impl Spectral {
    pub fn new(h: &Operator) -> Result<Self> {
        let dev = h.hermitian_deviation();
        if dev > HERMITIAN_TOL {
            return Err(Error::NotHermitian(dev));
        }
        // symmetrize away round-off before the Hermitian solver
        let m = h.matrix();
        let sym = (m + m.adjoint()).map(|z| z * 0.5);
        let eig = SymmetricEigen::new(sym);
        Ok(Self { space: h.space(), energies: eig.eigenvalues.iter().copied().collect(), vectors: eig.eigenvectors })
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    pub fn space(&self) -> SpaceSpec {
        self.space
    }

    /// `e^{−iHt}` as an operator.
    pub fn propagator(&self, t: f64) -> Operator {
        let phases = DVector::from_iterator(self.energies.len(), self.energies.iter().map(|&e| C64::from_polar(1.0, -e * t)));
        let scaled = DMatrix::from_fn(self.vectors.nrows(), self.vectors.ncols(), |i, j| self.vectors[(i, j)] * phases[j]);
        Operator::new(self.space, scaled * self.vectors.adjoint()).expect("propagator dimension")
    }

    /// Coordinates of `state` in the eigenbasis.
    pub fn project(&self, state: &QuantumState) -> Result<DVector<C64>> {
        if state.space() != self.space {
            return Err(Error::DimensionMismatch { left: self.space.dim(), right: state.space().dim() });
        }
        Ok(self.vectors.adjoint() * state.amplitudes())
    }

    /// State at time `t` from eigenbasis coordinates at time 0.
    pub fn advance(&self, coords: &DVector<C64>, t: f64) -> QuantumState {
        let rotated = DVector::from_iterator(
            coords.len(),
            coords.iter().zip(&self.energies).map(|(&c, &e)| c * C64::from_polar(1.0, -e * t)),
        );
        QuantumState::from_raw(self.space, &self.vectors * rotated)
    }
}

/// `e^{−iH dt}` via the spectral decomposition of `h`.
pub fn propagator(h: &Operator, dt: f64) -> Result<Operator> {
    Ok(Spectral::new(h)?.propagator(dt))
}

/// Trajectory samples together with the state at the last grid time.
#[derive(Clone, Debug)]
pub struct Evolution {
    pub series: TimeSeries,
    pub final_state: QuantumState,
}

struct Sampler<'a> {
    observables: &'a [Observable],
    values: Vec<Vec<f64>>,
    max_leak: f64,
}

impl<'a> Sampler<'a> {
    fn new(observables: &'a [Observable]) -> Self {
        Self { observables, values: vec![Vec::new(); observables.len()], max_leak: 0.0 }
    }

    fn sample(&mut self, state: &QuantumState) -> Result<()> {
        for (obs, col) in self.observables.iter().zip(&mut self.values) {
            col.push(obs.eval(state)?);
        }
        self.max_leak = self.max_leak.max(state.truncation_leak());
        Ok(())
    }

    fn finish(self, series: &mut TimeSeries) -> Result<()> {
        for (obs, col) in self.observables.iter().zip(self.values) {
            series.push_column(obs.label(), col)?;
        }
        if self.max_leak > LEAK_TOL {
            series.warn(format!(
                "truncation: population in top two Fock levels reached {:.3e} (> {LEAK_TOL:e}); raise n_cut",
                self.max_leak
            ));
        }
        Ok(())
    }
}

/// Evolve under a time-independent `h`, sampling at each (absolute) time of
/// `t_grid`; the initial state is taken at `t = 0`.
pub fn evolve(state: &QuantumState, h: &Operator, t_grid: &[f64], observables: &[Observable]) -> Result<Evolution> {
    if t_grid.is_empty() {
        return Err(Error::InvalidArgument("empty time grid".into()));
    }
    let mut series = TimeSeries::new(t_grid.to_vec())?;
    let spectral = Spectral::new(h)?;
    let coords = spectral.project(state)?;
    let mut sampler = Sampler::new(observables);
    let mut current = state.clone();
    for &t in t_grid {
        current = spectral.advance(&coords, t);
        sampler.sample(&current)?;
    }
    sampler.finish(&mut series)?;
    Ok(Evolution { series, final_state: current })
}

/// Time-independent segments applied back to back. Samples are taken at
/// `t = 0` and `samples_per_segment` evenly spaced times inside each segment
/// (segment end included); a `segment` column records the segment index.
pub fn evolve_piecewise(
    state: &QuantumState,
    schedule: &[(&Operator, f64)],
    samples_per_segment: usize,
    observables: &[Observable],
) -> Result<Evolution> {
    if schedule.is_empty() {
        return Err(Error::InvalidArgument("empty schedule".into()));
    }
    if samples_per_segment == 0 {
        return Err(Error::InvalidArgument("samples_per_segment must be positive".into()));
    }
    for (h, duration) in schedule {
        if !(duration.is_finite() && *duration > 0.0) {
            return Err(Error::InvalidArgument(format!("segment duration must be positive, got {duration}")));
        }
        if h.space() != state.space() {
            return Err(Error::DimensionMismatch { left: state.space().dim(), right: h.space().dim() });
        }
    }

    // decompose each distinct Hamiltonian once
    let mut cache: Vec<(*const Operator, Spectral)> = Vec::new();
    let mut times = vec![0.0];
    let mut segments = vec![0.0];
    let mut sampler = Sampler::new(observables);
    sampler.sample(state)?;
    let mut current = state.clone();
    let mut t0 = 0.0;
    for (index, (h, duration)) in schedule.iter().enumerate() {
        let key = *h as *const Operator;
        let pos = match cache.iter().position(|(k, _)| *k == key) {
            Some(p) => p,
            None => {
                cache.push((key, Spectral::new(h)?));
                cache.len() - 1
            }
        };
        let spectral = &cache[pos].1;
        let coords = spectral.project(&current)?;
        let mut last = current.clone();
        for i in 1..=samples_per_segment {
            let local = duration * i as f64 / samples_per_segment as f64;
            last = spectral.advance(&coords, local);
            sampler.sample(&last)?;
            times.push(t0 + local);
            segments.push(index as f64);
        }
        current = last;
        t0 += duration;
    }
    let mut series = TimeSeries::new(times)?;
    series.push_column("segment", segments)?;
    sampler.finish(&mut series)?;
    Ok(Evolution { series, final_state: current })
}

/// `P_↑(t)` under the full Hamiltonian and under its JC (rotating-wave) part,
/// sampled at `samples` points on `[0, t_max]`.
pub fn rwa_comparison(params: &ModelParams, state: &QuantumState, t_max: f64, samples: usize) -> Result<TimeSeries> {
    if !(t_max > 0.0) || samples < 2 {
        return Err(Error::InvalidArgument("rwa comparison needs t_max > 0 and at least 2 samples".into()));
    }
    let space = state.space();
    let grid = linspace(0.0, t_max, samples);
    let obs = [Observable::SpinUpProbability];
    let full = evolve(state, &full_hamiltonian(params, space), &grid, &obs)?;
    let jc = evolve(state, &jc_hamiltonian(params, space), &grid, &obs)?;
    let mut series = TimeSeries::new(grid)?;
    series.push_column("p_up_full", full.series.column("p_up").unwrap().to_vec())?;
    series.push_column("p_up_jc", jc.series.column("p_up").unwrap().to_vec())?;
    for w in full.series.warnings().iter().chain(jc.series.warnings()) {
        series.warn(w.clone());
    }
    Ok(series)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::{anti_jc_hamiltonian, branch_hamiltonian};
    use crate::hilbert::{build_operators, coherent_state, Spin};
    use proptest::prelude::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn max_dev(a: &DMatrix<C64>, b: &DMatrix<C64>) -> f64 {
        (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    #[test]
    fn propagator_basics() {
        let space = SpaceSpec::new(6).unwrap();
        let p = ModelParams::new(1.0, 1.4, 0.3, 0.0).unwrap();
        let h = full_hamiltonian(&p, space);
        let id = DMatrix::<C64>::identity(space.dim(), space.dim());
        assert!(max_dev(propagator(&h, 0.0).unwrap().matrix(), &id) < 1e-12);

        let u = propagator(&h, 0.37).unwrap();
        assert!(max_dev(&(u.matrix().adjoint() * u.matrix()), &id) < 1e-10);
        let u2 = propagator(&h, 0.74).unwrap();
        assert!(max_dev(&(u.matrix() * u.matrix()), u2.matrix()) < 1e-10);
    }

    #[test]
    fn diagonal_propagator_phases() {
        let space = SpaceSpec::new(3).unwrap();
        let h = full_hamiltonian(&ModelParams::new(1.0, 2.5, 0.0, 0.0).unwrap(), space);
        let u = propagator(&h, 0.9).unwrap();
        for i in 0..space.dim() {
            let e = h.matrix()[(i, i)].re;
            assert!((u.matrix()[(i, i)] - C64::from_polar(1.0, -e * 0.9)).norm() < 1e-12);
            for j in 0..space.dim() {
                if i != j {
                    assert!(u.matrix()[(i, j)].norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn rejects_non_hermitian() {
        let space = SpaceSpec::new(2).unwrap();
        let ops = build_operators(space);
        assert!(matches!(propagator(&ops.a, 1.0), Err(Error::NotHermitian(_))));
    }

    #[test]
    fn jc_vacuum_rabi() {
        // resonance, |↑,0⟩: P_↑ = cos²(g t)
        let g = 0.05;
        let space = SpaceSpec::new(4).unwrap();
        let p = ModelParams::new(1.0, 1.0, g, 0.0).unwrap();
        let psi = QuantumState::basis(space, 0, Spin::Up).unwrap();
        let grid = linspace(0.0, 2.0 * std::f64::consts::PI / g, 400);
        let ev = evolve(&psi, &jc_hamiltonian(&p, space), &grid, &[Observable::SpinUpProbability]).unwrap();
        for (t, p_up) in grid.iter().zip(ev.series.column("p_up").unwrap()) {
            assert!((p_up - (g * t).cos().powi(2)).abs() < 1e-10);
        }
    }

    #[test]
    fn eigenstate_is_stationary() {
        let space = SpaceSpec::new(5).unwrap();
        let p = ModelParams::new(1.0, 1.3, 0.2, 0.0).unwrap();
        let h = full_hamiltonian(&p, space);
        let spectral = Spectral::new(&h).unwrap();
        let col = spectral.vectors.column(3).into_owned();
        let psi = QuantumState::normalized(space, col).unwrap();
        let ops = build_operators(space);
        let obs = [Observable::expect("sz", ops.sz.clone()), Observable::expect("n", ops.n.clone())];
        let ev = evolve(&psi, &h, &linspace(0.0, 50.0, 200), &obs).unwrap();
        for label in ["sz", "n"] {
            let col = ev.series.column(label).unwrap();
            assert!(col.iter().all(|v| (v - col[0]).abs() < 1e-9));
        }
    }

    #[test]
    fn coherent_state_rotation() {
        let space = SpaceSpec::new(40).unwrap();
        let ops = build_operators(space);
        let wc = 1.3;
        let h = &ops.n * wc;
        let alpha = C64::from_polar(0.9, 0.6);
        let psi = coherent_state(space, alpha, [c(1.0), c(0.0)]).unwrap();
        let grid = linspace(0.0, 12.0, 120);
        let ev = evolve(&psi, &h, &grid, &[Observable::expect("x", ops.x.clone())]).unwrap();
        for (t, x) in grid.iter().zip(ev.series.column("x").unwrap()) {
            assert!((x - 2.0 * 0.9 * (wc * t - 0.6).cos()).abs() < 1e-8);
        }
    }

    #[test]
    fn piecewise_consistency() {
        let space = SpaceSpec::new(30).unwrap();
        let ops = build_operators(space);
        let p = ModelParams::new(1.0, 1.2, 0.1, 0.0).unwrap();
        let h = jc_hamiltonian(&p, space);
        let psi = coherent_state(space, c(1.0), [c(0.0), c(1.0)]).unwrap();
        let obs = [Observable::expect("sz", ops.sz.clone()), Observable::expect("x", ops.x.clone())];

        let single = evolve_piecewise(&psi, &[(&h, 5.0)], 25, &obs).unwrap();
        let grid = linspace(0.0, 5.0, 26);
        let plain = evolve(&psi, &h, &grid, &obs).unwrap();
        for label in ["sz", "x"] {
            for (a, b) in single.series.column(label).unwrap().iter().zip(plain.series.column(label).unwrap()) {
                assert!((a - b).abs() < 1e-12);
            }
        }

        let h2 = h.clone();
        let split = evolve_piecewise(&psi, &[(&h, 5.0), (&h2, 5.0)], 25, &obs).unwrap();
        let whole = evolve_piecewise(&psi, &[(&h, 10.0)], 50, &obs).unwrap();
        for (a, b) in split.series.times().iter().zip(whole.series.times()) {
            assert!((a - b).abs() < 1e-12);
        }
        for label in ["sz", "x"] {
            for (a, b) in split.series.column(label).unwrap().iter().zip(whole.series.column(label).unwrap()) {
                assert!((a - b).abs() < 1e-9);
            }
        }
        let seg = split.series.column("segment").unwrap();
        assert_eq!(seg[0], 0.0);
        assert_eq!(seg[25], 0.0);
        assert_eq!(seg[26], 1.0);
    }

    #[test]
    fn piecewise_dimension_mismatch() {
        let s1 = SpaceSpec::new(3).unwrap();
        let s2 = SpaceSpec::new(4).unwrap();
        let p = ModelParams::new(1.0, 1.2, 0.1, 0.0).unwrap();
        let h = jc_hamiltonian(&p, s2);
        let psi = QuantumState::basis(s1, 0, Spin::Up).unwrap();
        assert!(matches!(evolve_piecewise(&psi, &[(&h, 1.0)], 3, &[]), Err(Error::DimensionMismatch { .. })));
        assert!(evolve_piecewise(&psi, &[], 3, &[]).is_err());
    }

    #[test]
    fn truncation_warning() {
        let space = SpaceSpec::new(4).unwrap();
        let ops = build_operators(space);
        let psi = QuantumState::basis(space, 1, Spin::Up).unwrap();
        // pure displacement drive pushes population to the top levels
        let h = &ops.x * 1.0;
        let ev = evolve(&psi, &h, &linspace(0.0, 3.0, 10), &[]).unwrap();
        assert!(!ev.series.warnings().is_empty());
    }

    #[test]
    fn rwa_validity() {
        let space = SpaceSpec::new(6).unwrap();
        let psi = QuantumState::basis(space, 0, Spin::Up).unwrap();
        let deviation = |g: f64| {
            let p = ModelParams::new(1.0, 1.0, g, 0.0).unwrap();
            let s = rwa_comparison(&p, &psi, std::f64::consts::PI / g, 400).unwrap();
            let full = s.column("p_up_full").unwrap();
            let jc = s.column("p_up_jc").unwrap();
            full.iter().zip(jc).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
        };
        assert!(deviation(0.01) < 0.02);
        assert!(deviation(0.5) > 0.02);
        let p = ModelParams::new(1.0, 1.0, 0.0, 0.0).unwrap();
        let s = rwa_comparison(&p, &psi, 10.0, 50).unwrap();
        assert_eq!(s.column("p_up_full").unwrap(), s.column("p_up_jc").unwrap());
    }

    #[test]
    fn time_series_validation() {
        assert!(TimeSeries::new(vec![0.0, 1.0, 1.0]).is_err());
        let mut s = TimeSeries::new(vec![0.0, 1.0]).unwrap();
        assert!(s.push_column("a", vec![1.0]).is_err());
        s.push_column("a", vec![1.0, 2.0]).unwrap();
        assert!(s.push_column("a", vec![1.0, 2.0]).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn conservation_laws(g in 0.0f64..0.4, ws in 0.5f64..1.8, re in -0.8f64..0.8, im in -0.8f64..0.8, up in 0.0f64..1.0) {
            let space = SpaceSpec::new(30).unwrap();
            let ops = build_operators(space);
            let spin = [c(up.sqrt()), c((1.0 - up).sqrt())];
            let psi = coherent_state(space, C64::new(re, im), spin).unwrap();
            let grid = linspace(0.0, 40.0, 60);

            let p = ModelParams::new(1.0, ws, g, 0.0).unwrap();
            let h = jc_hamiltonian(&p, space);
            let obs = [
                Observable::Norm,
                Observable::expect("energy", h.clone()),
                Observable::expect("nexc", &ops.n + &ops.sz),
                Observable::expect("x", ops.x.clone()),
                Observable::MinQuadratureVariance,
                Observable::MaxQuadratureVariance,
            ];
            let ev = evolve(&psi, &h, &grid, &obs).unwrap();
            let s = &ev.series;
            let e0 = s.column("energy").unwrap()[0];
            let n0 = s.column("nexc").unwrap()[0];
            for i in 0..s.len() {
                prop_assert!((s.column("norm").unwrap()[i] - 1.0).abs() < 1e-9);
                prop_assert!((s.column("energy").unwrap()[i] - e0).abs() < 1e-9 * e0.abs().max(1.0));
                prop_assert!((s.column("nexc").unwrap()[i] - n0).abs() < 1e-9);
                let (lo, hi) = (s.column("var_min").unwrap()[i], s.column("var_max").unwrap()[i]);
                prop_assert!(lo * hi >= 1.0 / 16.0 - 1e-9);
            }
            // ⟨x̂⟩ is real
            for &t in &grid[..5] {
                let st = Spectral::new(&h).unwrap();
                let coords = st.project(&psi).unwrap();
                let z = expectation(&st.advance(&coords, t), &ops.x).unwrap();
                prop_assert!(z.im.abs() < 1e-10);
            }

            let pa = ModelParams::new(1.0, -ws, g, std::f64::consts::PI).unwrap();
            let ha = anti_jc_hamiltonian(&pa, space);
            let ev = evolve(&psi, &ha, &grid, &[Observable::expect("nexc", &ops.n - &ops.sz)]).unwrap();
            let col = ev.series.column("nexc").unwrap();
            prop_assert!(col.iter().all(|v| (v - col[0]).abs() < 1e-9));
        }
    }

    #[test]
    fn long_evolution_norm() {
        let space = SpaceSpec::new(20).unwrap();
        let p = ModelParams::new(1.0, 1.1, 0.05, 0.0).unwrap();
        let h = branch_hamiltonian(&p, 0, space).unwrap();
        let psi = coherent_state(space, c(0.5), [c(1.0), c(0.0)]).unwrap();
        let ev = evolve(&psi, &h, &linspace(0.0, 1e3, 10_000), &[Observable::Norm]).unwrap();
        assert!(ev.series.column("norm").unwrap().iter().all(|n| (n - 1.0).abs() < 1e-9));
    }
}
