//! Truncated Fock ⊗ spin-½ space.
//!
//! Basis ordering is boson-major: `index = 2·n + s`, where `s = 0` is the
//! `S_z = +½` (spin up, branch `|0⟩`) state and `s = 1` is spin down
//! (branch `|1⟩`).

use std::ops::{Add, Mul, Sub};

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::C64;

/// Normalization tolerance for states.
pub const NORM_TOL: f64 = 1e-10;
/// Fock-space tail weight a coherent state may leave outside the cutoff.
pub const TAIL_TOL: f64 = 1e-10;
/// Population in the top two Fock levels that triggers a truncation warning.
pub const LEAK_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct SpaceSpec {
    n_cut: usize,
}

impl SpaceSpec {
    pub fn new(n_cut: usize) -> Result<Self> {
        if n_cut < 1 {
            return Err(Error::InvalidArgument("Fock cutoff must be at least 1".into()));
        }
        Ok(Self { n_cut })
    }

    /// Highest retained boson number.
    pub fn n_cut(&self) -> usize {
        self.n_cut
    }

    pub fn dim(&self) -> usize {
        2 * (self.n_cut + 1)
    }

    pub fn index(&self, n: usize, spin: Spin) -> usize {
        debug_assert!(n <= self.n_cut);
        2 * n + spin.index()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Spin {
    Up,
    Down,
}

impl Spin {
    pub fn index(self) -> usize {
        match self {
            Spin::Up => 0,
            Spin::Down => 1,
        }
    }

    /// Branch `k` of the dispersive Hamiltonian: `|0⟩ = ↑`, `|1⟩ = ↓`.
    pub fn from_branch(k: usize) -> Self {
        if k == 0 {
            Spin::Up
        } else {
            Spin::Down
        }
    }
}

/// Dense operator on a [`SpaceSpec`].
#[derive(Clone, Debug, PartialEq)]
pub struct Operator {
    space: SpaceSpec,
    matrix: DMatrix<C64>,
}

impl Operator {
    pub fn new(space: SpaceSpec, matrix: DMatrix<C64>) -> Result<Self> {
        if matrix.nrows() != space.dim() || matrix.ncols() != space.dim() {
            return Err(Error::DimensionMismatch { left: space.dim(), right: matrix.nrows().max(matrix.ncols()) });
        }
        Ok(Self { space, matrix })
    }

    pub fn zeros(space: SpaceSpec) -> Self {
        Self { space, matrix: DMatrix::zeros(space.dim(), space.dim()) }
    }

    pub fn identity(space: SpaceSpec) -> Self {
        Self { space, matrix: DMatrix::identity(space.dim(), space.dim()) }
    }

    /// Acts as `boson ⊗ 1` where `boson[(m, n)] = ⟨m|B|n⟩` for `m, n ≤ n_cut`.
    pub fn from_boson(space: SpaceSpec, boson: impl Fn(usize, usize) -> C64) -> Self {
        let mut matrix = DMatrix::zeros(space.dim(), space.dim());
        for m in 0..=space.n_cut {
            for n in 0..=space.n_cut {
                let v = boson(m, n);
                if v != C64::new(0.0, 0.0) {
                    for s in 0..2 {
                        matrix[(2 * m + s, 2 * n + s)] = v;
                    }
                }
            }
        }
        Self { space, matrix }
    }

    /// Acts as `1 ⊗ spin` for a 2×2 spin matrix in the (↑, ↓) basis.
    pub fn from_spin(space: SpaceSpec, spin: [[C64; 2]; 2]) -> Self {
        let mut matrix = DMatrix::zeros(space.dim(), space.dim());
        for n in 0..=space.n_cut {
            for (r, row) in spin.iter().enumerate() {
                for (c, &v) in row.iter().enumerate() {
                    matrix[(2 * n + r, 2 * n + c)] = v;
                }
            }
        }
        Self { space, matrix }
    }

    pub fn space(&self) -> SpaceSpec {
        self.space
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.matrix
    }

    pub fn adjoint(&self) -> Self {
        Self { space: self.space, matrix: self.matrix.adjoint() }
    }

    /// `max |M − M†| / max(1, max |M|)`.
    pub fn hermitian_deviation(&self) -> f64 {
        let scale = self.matrix.iter().map(|z| z.norm()).fold(0.0, f64::max).max(1.0);
        let dev = (&self.matrix - self.matrix.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
        dev / scale
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermitian_deviation() < tol
    }

    pub fn commutator(&self, other: &Operator) -> Result<Operator> {
        self.check_space(other.space)?;
        Ok(Self { space: self.space, matrix: &self.matrix * &other.matrix - &other.matrix * &self.matrix })
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.matrix.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn apply(&self, state: &QuantumState) -> Result<DVector<C64>> {
        self.check_space(state.space)?;
        Ok(&self.matrix * &state.amplitudes)
    }

    fn check_space(&self, other: SpaceSpec) -> Result<()> {
        if self.space != other {
            return Err(Error::DimensionMismatch { left: self.space.dim(), right: other.dim() });
        }
        Ok(())
    }
}

impl Add for &Operator {
    type Output = Operator;
    fn add(self, rhs: &Operator) -> Operator {
        assert_eq!(self.space, rhs.space, "operator spaces differ");
        Operator { space: self.space, matrix: &self.matrix + &rhs.matrix }
    }
}

impl Sub for &Operator {
    type Output = Operator;
    fn sub(self, rhs: &Operator) -> Operator {
        assert_eq!(self.space, rhs.space, "operator spaces differ");
        Operator { space: self.space, matrix: &self.matrix - &rhs.matrix }
    }
}

impl Mul for &Operator {
    type Output = Operator;
    fn mul(self, rhs: &Operator) -> Operator {
        assert_eq!(self.space, rhs.space, "operator spaces differ");
        Operator { space: self.space, matrix: &self.matrix * &rhs.matrix }
    }
}

impl Mul<f64> for &Operator {
    type Output = Operator;
    fn mul(self, rhs: f64) -> Operator {
        Operator { space: self.space, matrix: self.matrix.map(|z| z * rhs) }
    }
}

impl Mul<C64> for &Operator {
    type Output = Operator;
    fn mul(self, rhs: C64) -> Operator {
        Operator { space: self.space, matrix: self.matrix.map(|z| z * rhs) }
    }
}

/// The standard operator set on one space.
#[derive(Clone, Debug)]
pub struct Operators {
    pub identity: Operator,
    pub a: Operator,
    pub a_dag: Operator,
    pub n: Operator,
    pub sx: Operator,
    pub sy: Operator,
    pub sz: Operator,
    pub s_plus: Operator,
    pub s_minus: Operator,
    /// `a + a†`.
    pub x: Operator,
}

pub fn build_operators(space: SpaceSpec) -> Operators {
    let zero = C64::new(0.0, 0.0);
    let one = C64::new(1.0, 0.0);
    let half = C64::new(0.5, 0.0);
    let a = Operator::from_boson(space, |m, n| if n == m + 1 { C64::new((n as f64).sqrt(), 0.0) } else { zero });
    let a_dag = a.adjoint();
    let n = Operator::from_boson(space, |m, n| if m == n { C64::new(n as f64, 0.0) } else { zero });
    // S+ |↓⟩ = |↑⟩: row ↑ (0), column ↓ (1)
    let s_plus = Operator::from_spin(space, [[zero, one], [zero, zero]]);
    let s_minus = s_plus.adjoint();
    let sz = Operator::from_spin(space, [[half, zero], [zero, -half]]);
    let sx = Operator::from_spin(space, [[zero, half], [half, zero]]);
    let sy = Operator::from_spin(space, [[zero, C64::new(0.0, -0.5)], [C64::new(0.0, 0.5), zero]]);
    let x = &a + &a_dag;
    Operators { identity: Operator::identity(space), a, a_dag, n, sx, sy, sz, s_plus, s_minus, x }
}

/// Normalized pure state.
#[derive(Clone, Debug, PartialEq)]
pub struct QuantumState {
    space: SpaceSpec,
    amplitudes: DVector<C64>,
}

impl QuantumState {
    /// Wrap amplitudes that are already normalized.
    pub fn new(space: SpaceSpec, amplitudes: DVector<C64>) -> Result<Self> {
        if amplitudes.len() != space.dim() {
            return Err(Error::DimensionMismatch { left: space.dim(), right: amplitudes.len() });
        }
        let norm = amplitudes.norm();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::InvalidArgument(format!("state norm {norm} differs from 1")));
        }
        Ok(Self { space, amplitudes })
    }

    pub fn normalized(space: SpaceSpec, amplitudes: DVector<C64>) -> Result<Self> {
        let norm = amplitudes.norm();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::InvalidArgument("cannot normalize a zero state".into()));
        }
        Self::new(space, amplitudes.unscale(norm))
    }

    /// `|n⟩ ⊗ |spin⟩`.
    pub fn basis(space: SpaceSpec, n: usize, spin: Spin) -> Result<Self> {
        if n > space.n_cut() {
            return Err(Error::InvalidArgument(format!("Fock level {n} above cutoff {}", space.n_cut())));
        }
        let mut v = DVector::zeros(space.dim());
        v[space.index(n, spin)] = C64::new(1.0, 0.0);
        Ok(Self { space, amplitudes: v })
    }

    /// Product of boson amplitudes (indexed by Fock number) and spin
    /// amplitudes `[c_up, c_down]`, renormalized.
    pub fn product(space: SpaceSpec, boson: &[C64], spin: [C64; 2]) -> Result<Self> {
        if boson.len() > space.n_cut() + 1 {
            return Err(Error::DimensionMismatch { left: space.n_cut() + 1, right: boson.len() });
        }
        let mut v = DVector::zeros(space.dim());
        for (n, &b) in boson.iter().enumerate() {
            v[2 * n] = b * spin[0];
            v[2 * n + 1] = b * spin[1];
        }
        Self::normalized(space, v)
    }

    pub fn space(&self) -> SpaceSpec {
        self.space
    }

    pub fn amplitudes(&self) -> &DVector<C64> {
        &self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }

    /// `|⟨self|other⟩|²`.
    pub fn fidelity(&self, other: &QuantumState) -> Result<f64> {
        if self.space != other.space {
            return Err(Error::DimensionMismatch { left: self.space.dim(), right: other.space.dim() });
        }
        Ok(self.amplitudes.dotc(&other.amplitudes).norm_sqr())
    }

    /// Probability of spin up, traced over the boson.
    pub fn spin_up_probability(&self) -> f64 {
        self.amplitudes.iter().step_by(2).map(|z| z.norm_sqr()).sum()
    }

    /// Population in the top two Fock levels.
    pub fn truncation_leak(&self) -> f64 {
        let n_cut = self.space.n_cut();
        let lo = 2 * n_cut.saturating_sub(1);
        self.amplitudes.iter().skip(lo).map(|z| z.norm_sqr()).sum()
    }

    /// Used by the propagator; the caller guarantees unitarity.
    pub(crate) fn from_raw(space: SpaceSpec, amplitudes: DVector<C64>) -> Self {
        Self { space, amplitudes }
    }
}

/// `Σ_{n > n_cut} e^{−|α|²} |α|^{2n} / n!`, summed directly so that tiny
/// tails are not lost to cancellation.
pub fn coherent_tail(alpha_abs: f64, n_cut: usize) -> f64 {
    let mean = alpha_abs * alpha_abs;
    if mean == 0.0 {
        return 0.0;
    }
    let ln_mean = mean.ln();
    let mut ln_term = -mean;
    for n in 1..=n_cut + 1 {
        ln_term += ln_mean - (n as f64).ln();
    }
    let mut tail = 0.0;
    let mut n = n_cut + 1;
    loop {
        let term = ln_term.exp();
        tail += term;
        // terms decrease geometrically once n > mean
        if (n as f64) > mean && term < 1e-17 * tail.max(1e-300) {
            break;
        }
        if n > n_cut + 100_000 {
            break;
        }
        n += 1;
        ln_term += ln_mean - (n as f64).ln();
    }
    tail
}

/// Smallest cutoff whose coherent-state tail is below [`TAIL_TOL`].
pub fn required_cutoff(alpha_abs: f64) -> usize {
    let mut n_cut = 1;
    while coherent_tail(alpha_abs, n_cut) >= TAIL_TOL {
        n_cut += 1;
    }
    n_cut
}

/// Default cutoff `max(4⌈|α|²⌉ + 20, 40)`, raised if the tail test needs it.
pub fn default_cutoff(alpha_abs: f64) -> usize {
    let base = (4.0 * (alpha_abs * alpha_abs).ceil()) as usize + 20;
    base.max(40).max(required_cutoff(alpha_abs))
}

/// Fock amplitudes `e^{−|α|²/2} αⁿ / √(n!)` for `n ≤ n_cut`.
pub fn coherent_amplitudes(alpha: C64, n_cut: usize) -> Vec<C64> {
    let mut out = Vec::with_capacity(n_cut + 1);
    let mut amp = C64::new((-0.5 * alpha.norm_sqr()).exp(), 0.0);
    out.push(amp);
    for n in 1..=n_cut {
        amp = amp * alpha / (n as f64).sqrt();
        out.push(amp);
    }
    out
}

/// `|α⟩ ⊗ (spin[0]|↑⟩ + spin[1]|↓⟩)`, renormalized after truncation.
pub fn coherent_state(space: SpaceSpec, alpha: C64, spin: [C64; 2]) -> Result<QuantumState> {
    let tail = coherent_tail(alpha.norm(), space.n_cut());
    if tail >= TAIL_TOL {
        return Err(Error::CutoffTooSmall {
            n_cut: space.n_cut(),
            alpha_abs: alpha.norm(),
            required: required_cutoff(alpha.norm()),
        });
    }
    QuantumState::product(space, &coherent_amplitudes(alpha, space.n_cut()), spin)
}

pub fn expectation(state: &QuantumState, op: &Operator) -> Result<C64> {
    let v = op.apply(state)?;
    Ok(state.amplitudes.dotc(&v))
}

/// Truncated `a ψ`.
fn lower(space: SpaceSpec, psi: &DVector<C64>) -> DVector<C64> {
    let mut out = DVector::zeros(psi.len());
    for n in 1..=space.n_cut() {
        let f = (n as f64).sqrt();
        for s in 0..2 {
            out[2 * (n - 1) + s] = psi[2 * n + s] * f;
        }
    }
    out
}

/// Truncated `a† ψ` (the top level is dropped).
fn raise(space: SpaceSpec, psi: &DVector<C64>) -> DVector<C64> {
    let mut out = DVector::zeros(psi.len());
    for n in 0..space.n_cut() {
        let f = ((n + 1) as f64).sqrt();
        for s in 0..2 {
            out[2 * (n + 1) + s] = psi[2 * n + s] * f;
        }
    }
    out
}

/// Second moments of the boson mode needed for quadrature statistics.
#[derive(Clone, Copy, Debug)]
struct BosonMoments {
    a: C64,
    a2: C64,
    /// ⟨a†a⟩ + ⟨a a†⟩
    sym: f64,
}

fn boson_moments(state: &QuantumState) -> BosonMoments {
    let psi = &state.amplitudes;
    let a_psi = lower(state.space, psi);
    let a2_psi = lower(state.space, &a_psi);
    let ad_psi = raise(state.space, psi);
    BosonMoments {
        a: psi.dotc(&a_psi),
        a2: psi.dotc(&a2_psi),
        sym: a_psi.norm_squared() + ad_psi.norm_squared(),
    }
}

/// `Var(X_θ)` with `X_θ = (a e^{−iθ} + a† e^{iθ}) / 2`; equals ¼ for any
/// coherent state.
pub fn quadrature_variance(state: &QuantumState, theta: f64) -> f64 {
    let m = boson_moments(state);
    let phase = C64::from_polar(1.0, -2.0 * theta);
    let mean = (m.a * C64::from_polar(1.0, -theta)).re;
    let second = 0.25 * (2.0 * (m.a2 * phase).re + m.sym);
    second - mean * mean
}

/// Extremal quadrature variances over θ.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadratureStats {
    pub min: f64,
    pub max: f64,
    /// Angle of the least-noisy quadrature, in (−π/2, π/2].
    pub theta_min: f64,
}

pub fn quadrature_extrema(state: &QuantumState) -> QuadratureStats {
    let m = boson_moments(state);
    // Var(θ) = ¼[S + 2 Re(e^{−2iθ} M)] with M = ⟨Δa²⟩, S = ⟨{Δa, Δa†}⟩
    let cov = m.a2 - m.a * m.a;
    let s = m.sym - 2.0 * m.a.norm_sqr();
    let r = cov.norm();
    let mut theta_min = 0.5 * (cov.arg() - std::f64::consts::PI);
    if theta_min <= -std::f64::consts::FRAC_PI_2 {
        theta_min += std::f64::consts::PI;
    }
    QuadratureStats { min: 0.25 * (s - 2.0 * r), max: 0.25 * (s + 2.0 * r), theta_min }
}
