//! Closed moment equations for the resonator coupled to a thermal bath.
//!
//! The four moments `⟨a†a⟩`, `⟨S_z⟩`, `X = i⟨S⁺a + S⁻a†⟩` and `⟨a†S_z a⟩`
//! obey an affine system with a constant Jacobian, integrated here with an
//! embedded Dormand–Prince 5(4) pair.

use crate::error::{Error, Result};
use crate::evolve::TimeSeries;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DampingParams {
    /// Damping rate κ (rad/s).
    pub kappa: f64,
    /// Coupling g (rad/s).
    pub g: f64,
    /// Mean thermal occupation of the bath.
    pub n_th: f64,
    /// Quality factor; kept for reference, the closed system does not use it.
    pub q: f64,
}

impl DampingParams {
    pub fn new(kappa: f64, g: f64, n_th: f64, q: f64) -> Result<Self> {
        for (name, v) in [("kappa", kappa), ("g", g), ("n_th", n_th)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::InvalidArgument(format!("{name} must be non-negative, got {v}")));
            }
        }
        Ok(Self { kappa, g, n_th, q })
    }
}

/// Moment vector `(⟨a†a⟩, ⟨S_z⟩, X, ⟨a†S_z a⟩)`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct LangevinState {
    pub n: f64,
    pub sz: f64,
    pub x: f64,
    pub nsz: f64,
}

impl LangevinState {
    pub fn new(n: f64, sz: f64, x: f64, nsz: f64) -> Self {
        Self { n, sz, x, nsz }
    }

    /// Spin excited, `⟨a†a⟩ + ⟨S_z⟩ = n_th + 1`.
    pub fn spin_excited(n_th: f64) -> Self {
        Self::new(n_th + 0.5, 0.5, 0.0, 0.0)
    }

    /// Resonator excited by one quantum, spin down, same total `n_th + 1`.
    pub fn resonator_excited(n_th: f64) -> Self {
        Self::new(n_th + 1.5, -0.5, 0.0, 0.0)
    }

    pub fn to_array(self) -> [f64; 4] {
        [self.n, self.sz, self.x, self.nsz]
    }

    pub fn from_array(v: [f64; 4]) -> Self {
        Self::new(v[0], v[1], v[2], v[3])
    }

    pub fn max_abs_diff(&self, other: &LangevinState) -> f64 {
        self.to_array().iter().zip(other.to_array()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }
}

/// Time derivative of the moments.
pub fn langevin_rhs(s: &LangevinState, p: &DampingParams) -> LangevinState {
    let DampingParams { kappa, g, n_th, .. } = *p;
    LangevinState {
        n: -kappa * s.n + g * s.x + kappa * n_th,
        sz: -2.0 * g * s.x,
        x: g * s.sz - 0.5 * kappa * s.x + 2.0 * g * s.nsz + g,
        nsz: -g * s.x - kappa * s.nsz,
    }
}

/// Constant Jacobian of [`langevin_rhs`] in `(n, sz, x, nsz)` order.
pub fn jacobian(p: &DampingParams) -> [[f64; 4]; 4] {
    let DampingParams { kappa, g, .. } = *p;
    [
        [-kappa, 0.0, g, 0.0],
        [0.0, 0.0, -2.0 * g, 0.0],
        [0.0, g, -0.5 * kappa, 2.0 * g],
        [0.0, 0.0, -g, -kappa],
    ]
}

/// Unique fixed point `(n_th, −1, 0, 0)` for κ > 0.
pub fn steady_state(p: &DampingParams) -> Result<LangevinState> {
    if !(p.kappa > 0.0) {
        return Err(Error::NoFixedPoint);
    }
    Ok(LangevinState::new(p.n_th, -1.0, 0.0, 0.0))
}

// Dormand–Prince 5(4) tableau
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
// fifth-order weights minus embedded fourth-order weights
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

const SAFETY: f64 = 0.9;
const MIN_FACTOR: f64 = 0.2;
const MAX_FACTOR: f64 = 5.0;

fn rhs(y: &[f64; 4], p: &DampingParams) -> [f64; 4] {
    langevin_rhs(&LangevinState::from_array(*y), p).to_array()
}

/// Integrate from `t = 0` and report the state at every time in `t_grid`
/// (non-negative, strictly increasing). Steps are shortened to land exactly on
/// grid times. `tol` is used as both absolute and relative local tolerance.
pub fn integrate(initial: &LangevinState, p: &DampingParams, t_grid: &[f64], tol: f64) -> Result<TimeSeries> {
    if !(1e-12..=1e-4).contains(&tol) {
        return Err(Error::InvalidArgument(format!("tolerance {tol:e} outside [1e-12, 1e-4]")));
    }
    if t_grid.first().is_some_and(|&t| t < 0.0) {
        return Err(Error::InvalidArgument("time grid must start at t >= 0".into()));
    }
    let mut series = TimeSeries::new(t_grid.to_vec())?;
    let mut cols: [Vec<f64>; 4] = Default::default();

    let mut t = 0.0;
    let mut y = initial.to_array();
    let mut k1 = rhs(&y, p);
    let span = t_grid.last().copied().unwrap_or(0.0);
    let mut h = initial_step(&y, &k1, span);

    for &target in t_grid {
        while t < target {
            let remaining = target - t;
            let clipped = h >= remaining;
            let step = if clipped { remaining } else { h };
            if step < 1e-14 * t.abs().max(1.0) && !clipped {
                return Err(Error::StepUnderflow { t, h: step });
            }
            let (y_new, k7, err) = dopri_step(&y, &k1, step, p, tol);
            if err <= 1.0 {
                t = if clipped { target } else { t + step };
                y = y_new;
                k1 = k7;
            }
            let factor = if err == 0.0 { MAX_FACTOR } else { (SAFETY * err.powf(-0.2)).clamp(MIN_FACTOR, MAX_FACTOR) };
            let proposed = step * if err <= 1.0 { factor } else { factor.min(1.0) };
            // keep the controller's memory when a step was only shortened to hit the grid
            h = if clipped && err <= 1.0 { proposed.max(h) } else { proposed };
            if h < 1e-14 * t.abs().max(1.0) {
                return Err(Error::StepUnderflow { t, h });
            }
        }
        for (col, v) in cols.iter_mut().zip(y) {
            col.push(v);
        }
    }
    let [n, sz, x, nsz] = cols;
    series.push_column("n", n)?;
    series.push_column("sz", sz)?;
    series.push_column("x", x)?;
    series.push_column("nsz", nsz)?;
    Ok(series)
}

fn initial_step(y: &[f64; 4], f: &[f64; 4], span: f64) -> f64 {
    let d0 = y.iter().map(|v| v * v).sum::<f64>().sqrt();
    let d1 = f.iter().map(|v| v * v).sum::<f64>().sqrt();
    let h = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    if span > 0.0 {
        h.min(span)
    } else {
        h
    }
}

/// One Dormand–Prince step; returns the new state, the derivative there (FSAL)
/// and the scaled RMS error estimate.
fn dopri_step(y: &[f64; 4], k1: &[f64; 4], h: f64, p: &DampingParams, tol: f64) -> ([f64; 4], [f64; 4], f64) {
    let mut k = [[0.0; 4]; 7];
    k[0] = *k1;
    for s in 1..7 {
        let mut ys = *y;
        for (j, kj) in k.iter().enumerate().take(s) {
            let a = A[s][j];
            if a != 0.0 {
                for i in 0..4 {
                    ys[i] += h * a * kj[i];
                }
            }
        }
        debug_assert!(C[s] >= 0.0);
        k[s] = rhs(&ys, p);
    }
    // stage 7 is evaluated at the fifth-order solution
    let mut y_new = *y;
    for (j, kj) in k.iter().enumerate().take(6) {
        for i in 0..4 {
            y_new[i] += h * A[6][j] * kj[i];
        }
    }
    let mut err_sq = 0.0;
    for i in 0..4 {
        let e: f64 = (0..7).map(|j| E[j] * k[j][i]).sum::<f64>() * h;
        let scale = tol + tol * y[i].abs().max(y_new[i].abs());
        err_sq += (e / scale).powi(2);
    }
    (y_new, k[6], (err_sq / 4.0).sqrt())
}

/// First grid time at which `⟨S_z⟩` leaves the physical band `[−½, ½]`.
pub fn unphysical_spin_time(series: &TimeSeries) -> Option<f64> {
    let sz = series.column("sz")?;
    series.times().iter().zip(sz).find(|(_, s)| s.abs() > 0.5 + 1e-12).map(|(t, _)| *t)
}
