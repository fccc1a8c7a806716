//! Physical setup → spin-boson model parameters, plus the order-of-magnitude
//! estimates for realistic resonators.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Reduced Planck constant (J·s).
pub const HBAR: f64 = 1.054_571_817e-34;
/// Boltzmann constant (J/K).
pub const K_B: f64 = 1.380_649e-23;
/// Vacuum permeability (T·m/A).
pub const MU0: f64 = 1.256_637_062_12e-6;
/// Electron gyromagnetic ratio magnitude (rad·s⁻¹·T⁻¹).
pub const GAMMA_E: f64 = 1.760_859_630e11;

/// Rounded prefactor standing in for γ√(ħ/8) in the quick estimate
/// `g ≈ 1e-7 · G · √(ω_c / k_eff)`.
pub const PAPER_PREFACTOR: f64 = 1e-7;

/// Relative tolerance for `k_eff` against `m_eff · ω_c²` when both are given.
const SPRING_CONSISTENCY: f64 = 1e-6;

/// Tip, fields and resonator of the experiment, in SI units.
#[derive(Clone, Debug, PartialEq)]
pub struct PhysicalSetup {
    /// Static field along z (T).
    pub b0: f64,
    /// RF field amplitude (T).
    pub b1: f64,
    /// RF phase (rad).
    pub phi: f64,
    /// Gyromagnetic ratio magnitude (rad·s⁻¹·T⁻¹).
    pub gamma: f64,
    /// Tip magnetic moment (A·m²).
    pub m_tip: f64,
    /// Tip–spin distance (m).
    pub d: f64,
    /// Effective resonator mass (kg).
    pub m_eff: f64,
    /// Resonator angular frequency (rad/s).
    pub omega_c: f64,
    /// Effective spring constant (N/m); `None` means `m_eff · ω_c²`.
    pub k_eff: Option<f64>,
}

impl PhysicalSetup {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("b1", self.b1),
            ("gamma", self.gamma),
            ("d", self.d),
            ("m_eff", self.m_eff),
            ("omega_c", self.omega_c),
        ];
        for (key, value) in positive {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::InvalidSetup {
                    key,
                    reason: format!("must be strictly positive, got {value}"),
                });
            }
        }
        for (key, value) in [("b0", self.b0), ("phi", self.phi), ("m_tip", self.m_tip)] {
            if !value.is_finite() {
                return Err(Error::InvalidSetup { key, reason: format!("must be finite, got {value}") });
            }
        }
        if let Some(k) = self.k_eff {
            if !(k.is_finite() && k > 0.0) {
                return Err(Error::InvalidSetup {
                    key: "k_eff",
                    reason: format!("must be strictly positive, got {k}"),
                });
            }
            let implied = self.m_eff * self.omega_c * self.omega_c;
            let rel = (k - implied).abs() / k;
            if rel >= SPRING_CONSISTENCY {
                return Err(Error::InvalidSetup {
                    key: "k_eff",
                    reason: format!(
                        "inconsistent with m_eff * omega_c^2 = {implied:e} (relative mismatch {rel:e})"
                    ),
                });
            }
        }
        Ok(())
    }

    /// Effective spring constant, explicit or `m_eff · ω_c²`.
    pub fn k_eff(&self) -> f64 {
        self.k_eff.unwrap_or(self.m_eff * self.omega_c * self.omega_c)
    }
}

/// Tip field expanded to first order around the spin position.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FieldParams {
    /// Field offset at the spin (T).
    pub a: f64,
    /// Field gradient (T/m).
    pub gradient: f64,
    /// Zero-point length √(ħ / (2 m_eff ω_c)) (m).
    pub lambda: f64,
}

/// How to evaluate the coupling constant.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum PrefactorMode {
    /// `γ G √(ħ / (8 m_eff ω_c))`.
    #[default]
    Exact,
    /// `1e-7 · G · √(ω_c / k_eff)`, the rounded quick estimate.
    Paper,
}

/// Abstract spin-boson parameters, all in rad/s.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModelParams {
    pub omega_c: f64,
    pub omega_s: f64,
    pub g: f64,
    pub phi: f64,
    delta: f64,
}

impl ModelParams {
    /// Build from raw frequencies; `Δ = |ω_s − ω_c|` is computed here.
    pub fn new(omega_c: f64, omega_s: f64, g: f64, phi: f64) -> Result<Self> {
        if !(omega_c.is_finite() && omega_c > 0.0) {
            return Err(Error::InvalidArgument(format!("omega_c must be positive, got {omega_c}")));
        }
        if !(g.is_finite() && g >= 0.0) {
            return Err(Error::InvalidArgument(format!("g must be non-negative, got {g}")));
        }
        if !omega_s.is_finite() || !phi.is_finite() {
            return Err(Error::InvalidArgument("omega_s and phi must be finite".into()));
        }
        Ok(Self { omega_c, omega_s, g, phi, delta: (omega_s - omega_c).abs() })
    }

    /// Dimensionless construction: fix g
    /// and place the spin above the resonator, `ω_s = ω_c + Δ`.
    pub fn from_ratios(g: f64, g_over_delta: f64, g_over_omega: f64) -> Result<Self> {
        if !(g_over_delta > 0.0 && g_over_omega > 0.0) {
            return Err(Error::InvalidArgument("coupling ratios must be positive".into()));
        }
        let omega_c = g / g_over_omega;
        let delta = g / g_over_delta;
        Self::new(omega_c, omega_c + delta, g, 0.0)
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// `Δ = 0`: the large-detuning formulas are singular.
    pub fn is_resonant(&self) -> bool {
        self.delta == 0.0
    }

    /// RF amplitude in frequency units, γB₁ = |ω_s|.
    pub fn rabi_frequency(&self) -> f64 {
        self.omega_s.abs()
    }

    pub fn with_coupling(self, g: f64) -> Result<Self> {
        Self::new(self.omega_c, self.omega_s, g, self.phi)
    }

    pub fn with_phase(self, phi: f64) -> Result<Self> {
        Self::new(self.omega_c, self.omega_s, self.g, phi)
    }
}

pub fn derive_field_params(setup: &PhysicalSetup) -> Result<FieldParams> {
    if !(setup.d > 0.0) {
        return Err(Error::InvalidSetup { key: "d", reason: format!("must be strictly positive, got {}", setup.d) });
    }
    if !(setup.m_eff > 0.0) {
        return Err(Error::InvalidSetup {
            key: "m_eff",
            reason: format!("must be strictly positive, got {}", setup.m_eff),
        });
    }
    if !(setup.omega_c > 0.0) {
        return Err(Error::InvalidSetup {
            key: "omega_c",
            reason: format!("must be strictly positive, got {}", setup.omega_c),
        });
    }
    let d3 = setup.d.powi(3);
    let a = MU0 * setup.m_tip / (2.0 * PI * d3);
    let gradient = 3.0 * MU0 * setup.m_tip / (2.0 * PI * d3 * setup.d);
    let lambda = (HBAR / (2.0 * setup.m_eff * setup.omega_c)).sqrt();
    Ok(FieldParams { a, gradient, lambda })
}

/// RF frequency that cancels the residual z field in the rotating frame:
/// `B₀ + A + ω_r/γ = 0`.
pub fn resonant_rf_frequency(setup: &PhysicalSetup, fp: &FieldParams) -> f64 {
    -setup.gamma * (setup.b0 + fp.a)
}

pub fn coupling_constant(setup: &PhysicalSetup, fp: &FieldParams, mode: PrefactorMode) -> f64 {
    match mode {
        PrefactorMode::Exact => {
            setup.gamma * fp.gradient * (HBAR / (8.0 * setup.m_eff * setup.omega_c)).sqrt()
        }
        PrefactorMode::Paper => paper_coupling(fp.gradient, setup.omega_c, setup.k_eff()),
    }
}

/// Quick estimate `1e-7 · G · √(ω_c / k_eff)`.
pub fn paper_coupling(gradient: f64, omega_c: f64, k_eff: f64) -> f64 {
    PAPER_PREFACTOR * gradient * (omega_c / k_eff).sqrt()
}

/// Temperature `ħω_c / k_B` below which the resonator is in the quantum regime.
pub fn quantum_regime_temperature(omega_c: f64) -> f64 {
    HBAR * omega_c / K_B
}

/// Assemble [`ModelParams`]. With φ = 0 the spin frequency is `+γB₁` (JC),
/// with φ = π it is `−γB₁` (anti-JC); any other phase records `γB₁` unsigned.
pub fn model_params(setup: &PhysicalSetup, fp: &FieldParams, mode: PrefactorMode) -> Result<ModelParams> {
    let rabi = setup.gamma * setup.b1;
    let phase = setup.phi.rem_euclid(2.0 * PI);
    let omega_s = if (phase - PI).abs() < 1e-12 { -rabi } else { rabi };
    let params = ModelParams::new(setup.omega_c, omega_s, coupling_constant(setup, fp, mode), setup.phi)?;
    if params.is_resonant() {
        log::warn!("exact resonance (delta = 0): large-detuning formulas are singular");
    }
    Ok(params)
}
