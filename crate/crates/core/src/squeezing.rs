//! Closed-form predictions of the dispersive branches: Bogoliubov parameters,
//! the dynamical squeeze factor and the collapse-revival of `⟨a + a†⟩`.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::C64;

/// Per-branch analytic quantities.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SqueezeParams {
    pub k: usize,
    /// `N_k = √(ω_cΔ / (ω_cΔ − (−1)^k g²))`.
    pub n_k: f64,
    pub mu: f64,
    pub nu: f64,
    /// `Ω_k ≈ ω_c(1 − (−1)^k g²/(2ω_cΔ))`.
    pub omega: f64,
    /// Branch energy offset `(−1)^k(ω_s/2 − g²/(4Δ))`.
    pub energy: f64,
}

impl SqueezeParams {
    /// `2μν`, the amplitude of `sinh r_k(t)`.
    pub fn coupling_amplitude(&self) -> f64 {
        2.0 * self.mu * self.nu
    }
}

fn sign(k: usize) -> f64 {
    if k == 0 {
        1.0
    } else {
        -1.0
    }
}

/// AC Stark shift `δ = g² / (2ω_cΔ)`.
pub fn ac_stark_shift(params: &ModelParams) -> Result<f64> {
    if params.delta() == 0.0 {
        return Err(Error::SingularDetuning);
    }
    Ok(params.g * params.g / (2.0 * params.omega_c * params.delta()))
}

pub fn squeeze_params(params: &ModelParams, k: usize) -> Result<SqueezeParams> {
    if k > 1 {
        return Err(Error::InvalidArgument(format!("branch index must be 0 or 1, got {k}")));
    }
    let delta = params.delta();
    if delta == 0.0 {
        return Err(Error::SingularDetuning);
    }
    let s = sign(k);
    let product = params.omega_c * delta;
    let g_sq = params.g * params.g;
    let denom = product - s * g_sq;
    if denom <= 0.0 {
        return Err(Error::Unstable { product, g_sq });
    }
    let n_k = (product / denom).sqrt();
    let root = n_k.sqrt();
    let mu = 0.5 * (root + 1.0 / root);
    let nu = 0.5 * (root - 1.0 / root);
    let omega = params.omega_c * (1.0 - s * g_sq / (2.0 * product));
    let energy = s * (params.omega_s / 2.0 - g_sq / (4.0 * delta));
    Ok(SqueezeParams { k, n_k, mu, nu, omega, energy })
}

/// `r_k(t) = ln(2μν sin Ω t + √(1 + 4μ²ν² sin² Ω t))`, sign included: the
/// value dips below zero where `2μν sin Ω t < 0`.
pub fn squeeze_factor(sp: &SqueezeParams, t: f64) -> f64 {
    let y = sp.coupling_amplitude() * (sp.omega * t).sin();
    // ln(y + √(1 + y²)), evaluated stably for either sign
    y.asinh()
}

/// Largest value the printed `r_k(t)` reaches, `|ln N_k|`.
pub fn max_squeeze_factor(sp: &SqueezeParams) -> f64 {
    sp.coupling_amplitude().abs().asinh()
}

/// `(u₁, u₂)` with `B_k(t) = u₁ a + u₂ a†`.
pub fn bogoliubov_coeffs(sp: &SqueezeParams, t: f64) -> (C64, C64) {
    let (sin, cos) = (sp.omega * t).sin_cos();
    let u1 = C64::new(cos, (sp.mu * sp.mu + sp.nu * sp.nu) * sin);
    let u2 = C64::new(0.0, 2.0 * sp.mu * sp.nu * sin);
    (u1, u2)
}

/// `⟨x⟩_t = Σ_k |c_k|² (α[cos Ω_k t / N_k − i sin Ω_k t] + α*[cos Ω_k t / N_k + i sin Ω_k t])`.
pub fn mean_position(params: &ModelParams, alpha: C64, c0: C64, c1: C64, t: f64) -> Result<f64> {
    let branches = [squeeze_params(params, 0)?, squeeze_params(params, 1)?];
    mean_position_with(&branches, alpha, c0, c1, t)
}

/// [`mean_position`] with precomputed branch parameters.
pub fn mean_position_with(branches: &[SqueezeParams; 2], alpha: C64, c0: C64, c1: C64, t: f64) -> Result<f64> {
    let weight = c0.norm_sqr() + c1.norm_sqr();
    if (weight - 1.0).abs() > 1e-10 {
        return Err(Error::Unnormalized(weight));
    }
    let i = C64::new(0.0, 1.0);
    let mut x = C64::new(0.0, 0.0);
    for (sp, c) in branches.iter().zip([c0, c1]) {
        let (sin, cos) = (sp.omega * t).sin_cos();
        let term = alpha * (cos / sp.n_k - i * sin) + alpha.conj() * (cos / sp.n_k + i * sin);
        x += term * c.norm_sqr();
    }
    Ok(x.re)
}

/// `2π / |Ω₁ − Ω₀| = 2πΔ / g²`.
pub fn revival_period(params: &ModelParams) -> Result<f64> {
    if params.g == 0.0 {
        return Err(Error::InfinitePeriod);
    }
    if params.delta() == 0.0 {
        return Err(Error::SingularDetuning);
    }
    let w0 = params.omega_c * (1.0 - params.g * params.g / (2.0 * params.omega_c * params.delta()));
    let w1 = params.omega_c * (1.0 + params.g * params.g / (2.0 * params.omega_c * params.delta()));
    Ok(2.0 * PI / (w1 - w0).abs())
}
