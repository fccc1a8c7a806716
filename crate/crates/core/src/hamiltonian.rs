//! The four Hamiltonians of the coupled system, with ħ = 1.

use crate::error::{Error, Result};
use crate::hilbert::{build_operators, Operator, Operators, SpaceSpec};
use crate::model::ModelParams;
use crate::C64;

/// Above this `g/Δ` the dispersive (large-detuning) picture is suspect.
pub const LARGE_DETUNING_LIMIT: f64 = 0.3;

fn free_resonator(ops: &Operators, omega_c: f64) -> Operator {
    &(&ops.n + &(&ops.identity * 0.5)) * omega_c
}

/// `ω_c(a†a + ½) + γB₁(cos φ S_z + sin φ S_y) + g(a†S₋ + aS₊ + aS₋ + a†S₊)`
/// with `γB₁ = |ω_s|`.
pub fn full_hamiltonian(params: &ModelParams, space: SpaceSpec) -> Operator {
    let ops = build_operators(space);
    let rabi = params.rabi_frequency();
    let spin = &(&ops.sz * (rabi * params.phi.cos())) + &(&ops.sy * (rabi * params.phi.sin()));
    let coupling = &(&ops.x * &(&ops.s_plus + &ops.s_minus)) * params.g;
    &(&free_resonator(&ops, params.omega_c) + &spin) + &coupling
}

/// `ω_c(a†a + ½) + ω_s S_z + g(a†S₋ + aS₊)`; conserves `a†a + S_z`.
pub fn jc_hamiltonian(params: &ModelParams, space: SpaceSpec) -> Operator {
    let ops = build_operators(space);
    let coupling = &(&(&ops.a_dag * &ops.s_minus) + &(&ops.a * &ops.s_plus)) * params.g;
    &(&free_resonator(&ops, params.omega_c) + &(&ops.sz * params.omega_s)) + &coupling
}

/// `ω_c(a†a + ½) + ω_s S_z + g(aS₋ + a†S₊)`; conserves `a†a − S_z`.
pub fn anti_jc_hamiltonian(params: &ModelParams, space: SpaceSpec) -> Operator {
    let ops = build_operators(space);
    let coupling = &(&(&ops.a * &ops.s_minus) + &(&ops.a_dag * &ops.s_plus)) * params.g;
    &(&free_resonator(&ops, params.omega_c) + &(&ops.sz * params.omega_s)) + &coupling
}

/// Dispersive branch `H_k ⊗ |k⟩⟨k|` on the full space, where
///
/// `H_k = ω_c a†a + (−1)^k ω_s/2 − (−1)^k g²/(4Δ) (a†a† + 2a†a + aa + 1)`.
///
/// The other spin block is zero.
pub fn branch_hamiltonian(params: &ModelParams, k: usize, space: SpaceSpec) -> Result<Operator> {
    if k > 1 {
        return Err(Error::InvalidArgument(format!("branch index must be 0 or 1, got {k}")));
    }
    let delta = params.delta();
    if delta == 0.0 {
        return Err(Error::SingularDetuning);
    }
    if params.g / delta > LARGE_DETUNING_LIMIT {
        log::warn!("g/delta = {:.3} exceeds {LARGE_DETUNING_LIMIT}: dispersive branch is a poor approximation", params.g / delta);
    }
    let sign = if k == 0 { 1.0 } else { -1.0 };
    let eps = sign * params.g * params.g / (4.0 * delta);
    let omega_c = params.omega_c;
    let offset = sign * params.omega_s / 2.0 - eps;
    let boson = move |m: usize, n: usize| -> C64 {
        let v = if m == n {
            omega_c * n as f64 - 2.0 * eps * n as f64 + offset
        } else if m == n + 2 {
            // a†a†
            -eps * ((n + 1) as f64 * (n + 2) as f64).sqrt()
        } else if n == m + 2 {
            -eps * ((m + 1) as f64 * (m + 2) as f64).sqrt()
        } else {
            0.0
        };
        C64::new(v, 0.0)
    };
    let mut matrix = nalgebra::DMatrix::zeros(space.dim(), space.dim());
    let s = k;
    for m in 0..=space.n_cut() {
        for n in 0..=space.n_cut() {
            matrix[(2 * m + s, 2 * n + s)] = boson(m, n);
        }
    }
    Operator::new(space, matrix)
}

/// `Σ_k H_k ⊗ |k⟩⟨k|`.
pub fn dispersive_hamiltonian(params: &ModelParams, space: SpaceSpec) -> Result<Operator> {
    Ok(&branch_hamiltonian(params, 0, space)? + &branch_hamiltonian(params, 1, space)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::Spin;
    use nalgebra::SymmetricEigen;

    fn params(omega_c: f64, omega_s: f64, g: f64, phi: f64) -> ModelParams {
        ModelParams::new(omega_c, omega_s, g, phi).unwrap()
    }

    fn eigenvalues(op: &Operator) -> Vec<f64> {
        let mut ev: Vec<f64> = SymmetricEigen::new(op.matrix().clone()).eigenvalues.iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    #[test]
    fn all_builders_hermitian() {
        let space = SpaceSpec::new(10).unwrap();
        let p = params(1.0, 1.3, 0.07, 0.4);
        assert!(full_hamiltonian(&p, space).is_hermitian(1e-12));
        assert!(jc_hamiltonian(&p, space).is_hermitian(1e-12));
        assert!(anti_jc_hamiltonian(&p, space).is_hermitian(1e-12));
        assert!(branch_hamiltonian(&p, 0, space).unwrap().is_hermitian(1e-12));
        assert!(branch_hamiltonian(&p, 1, space).unwrap().is_hermitian(1e-12));
    }

    #[test]
    fn decoupled_full_hamiltonian_is_diagonal() {
        let space = SpaceSpec::new(6).unwrap();
        let p = params(1.0, 1.7, 0.0, 0.0);
        let h = full_hamiltonian(&p, space);
        for i in 0..space.dim() {
            for j in 0..space.dim() {
                let v = h.matrix()[(i, j)];
                if i == j {
                    let n = (i / 2) as f64;
                    let sz = if i % 2 == 0 { 0.5 } else { -0.5 };
                    assert!((v.re - ((n + 0.5) + 1.7 * sz)).abs() < 1e-14);
                } else {
                    assert_eq!(v.norm(), 0.0);
                }
            }
        }
    }

    #[test]
    fn interaction_element() {
        let space = SpaceSpec::new(5).unwrap();
        for &(g, phi) in &[(0.3, 0.0), (1.2, 2.0), (0.01, std::f64::consts::PI)] {
            let h = full_hamiltonian(&params(1.0, 2.0, g, phi), space);
            let el = h.matrix()[(space.index(1, Spin::Down), space.index(0, Spin::Up))];
            assert!((el - C64::new(g, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn full_minus_jc_is_counter_rotating() {
        let space = SpaceSpec::new(8).unwrap();
        let p = params(1.0, 1.25, 0.2, 0.0);
        let ops = build_operators(space);
        let diff = &full_hamiltonian(&p, space) - &jc_hamiltonian(&p, space);
        let crt = &(&(&ops.a * &ops.s_minus) + &(&ops.a_dag * &ops.s_plus)) * p.g;
        assert!((diff.matrix() - crt.matrix()).norm() < 1e-14);
    }

    #[test]
    fn jc_conserves_excitations() {
        let space = SpaceSpec::new(12).unwrap();
        let ops = build_operators(space);
        let h = jc_hamiltonian(&params(1.0, 1.1, 0.3, 0.0), space);
        let nexc = &ops.n + &ops.sz;
        assert!(h.commutator(&nexc).unwrap().max_abs() < 1e-12);
        let h = anti_jc_hamiltonian(&params(1.0, -1.1, 0.3, std::f64::consts::PI), space);
        let nexc = &ops.n - &ops.sz;
        assert!(h.commutator(&nexc).unwrap().max_abs() < 1e-12);
    }

    #[test]
    fn ladder_elements() {
        let space = SpaceSpec::new(7).unwrap();
        let g = 0.4;
        let jc = jc_hamiltonian(&params(1.0, 1.0, g, 0.0), space);
        let ajc = anti_jc_hamiltonian(&params(1.0, -1.0, g, std::f64::consts::PI), space);
        for n in 0..space.n_cut() {
            let expect = g * ((n + 1) as f64).sqrt();
            let el = jc.matrix()[(space.index(n, Spin::Up), space.index(n + 1, Spin::Down))];
            assert!((el.re - expect).abs() < 1e-14 && el.im == 0.0);
            let el = ajc.matrix()[(space.index(n, Spin::Down), space.index(n + 1, Spin::Up))];
            assert!((el.re - expect).abs() < 1e-14 && el.im == 0.0);
        }
    }

    #[test]
    fn jc_without_coupling_is_diagonal() {
        let space = SpaceSpec::new(4).unwrap();
        let h = jc_hamiltonian(&params(1.0, 1.5, 0.0, 0.0), space);
        for i in 0..space.dim() {
            for j in 0..space.dim() {
                if i != j {
                    assert_eq!(h.matrix()[(i, j)].norm(), 0.0);
                }
            }
        }
    }

    #[test]
    fn anti_jc_spectrum_equals_flipped_jc() {
        // σ_x conjugation maps H_AJC(ω_s) to H_JC(−ω_s); truncation keeps the
        // boson factor untouched so the spectra agree exactly
        let space = SpaceSpec::new(9).unwrap();
        let ws = -1.4;
        let ajc = anti_jc_hamiltonian(&params(1.0, ws, 0.25, std::f64::consts::PI), space);
        let jc = jc_hamiltonian(&params(1.0, -ws, 0.25, 0.0), space);
        let (ea, ej) = (eigenvalues(&ajc), eigenvalues(&jc));
        for (a, b) in ea.iter().zip(&ej) {
            assert!((a - b).abs() < 1e-10, "{a} vs {b}");
        }
    }

    #[test]
    fn jc_block_eigenvalues() {
        // 2×2 block {|↑,n⟩, |↓,n+1⟩}: ω_c(n+1) ± ½√(Δ² + 4g²(n+1))
        let (wc, ws, g) = (1.0, 1.35, 0.12);
        let space = SpaceSpec::new(8).unwrap();
        let h = jc_hamiltonian(&params(wc, ws, g, 0.0), space);
        let ev = eigenvalues(&h);
        let delta = ws - wc;
        for n in 0..=5usize {
            let root = 0.5 * (delta * delta + 4.0 * g * g * (n + 1) as f64).sqrt();
            for e in [wc * (n + 1) as f64 + root, wc * (n + 1) as f64 - root] {
                let closest = ev.iter().map(|x| (x - e).abs()).fold(f64::INFINITY, f64::min);
                assert!(closest < 1e-10, "n={n}, expected {e}");
            }
        }
    }

    #[test]
    fn branch_decoupled_and_number_coefficient() {
        let space = SpaceSpec::new(6).unwrap();
        let base = params(2.0, 3.0, 0.0, 0.0);
        for k in 0..2 {
            let h = branch_hamiltonian(&base, k, space).unwrap();
            let sign = if k == 0 { 1.0 } else { -1.0 };
            let spin = Spin::from_branch(k);
            for n in 0..=space.n_cut() {
                let i = space.index(n, spin);
                assert!((h.matrix()[(i, i)].re - (2.0 * n as f64 + sign * 1.5)).abs() < 1e-14);
            }
        }
        let p = params(2.0, 3.0, 0.2, 0.0);
        for k in 0..2 {
            let sign = if k == 0 { 1.0 } else { -1.0 };
            let h = branch_hamiltonian(&p, k, space).unwrap();
            let spin = Spin::from_branch(k);
            let d1 = h.matrix()[(space.index(1, spin), space.index(1, spin))].re;
            let d0 = h.matrix()[(space.index(0, spin), space.index(0, spin))].re;
            let coeff = 2.0 - sign * 0.04 / (2.0 * 1.0);
            assert!((d1 - d0 - coeff).abs() < 1e-14);
        }
    }

    #[test]
    fn branch_spacing_near_analytic_frequency() {
        // numerical level spacing of H_k vs Ω_k ≈ ω_c(1 ∓ g²/(2ω_cΔ))
        let (wc, g, delta) = (1.0, 0.2, 2.0);
        let p = params(wc, wc + delta, g, 0.0);
        let space = SpaceSpec::new(60).unwrap();
        for k in 0..2 {
            let h = branch_hamiltonian(&p, k, space).unwrap();
            let spin = Spin::from_branch(k);
            // restrict to the active block
            let idx: Vec<usize> = (0..=space.n_cut()).map(|n| space.index(n, spin)).collect();
            let block = nalgebra::DMatrix::from_fn(idx.len(), idx.len(), |i, j| h.matrix()[(idx[i], idx[j])]);
            let mut ev: Vec<f64> = SymmetricEigen::new(block).eigenvalues.iter().copied().collect();
            ev.sort_by(f64::total_cmp);
            let spacing = ev[1] - ev[0];
            let sign = if k == 0 { 1.0 } else { -1.0 };
            let ratio = g * g / (wc * delta);
            let analytic = wc * (1.0 - sign * ratio / 2.0);
            assert!((spacing - analytic).abs() < 2.0 * ratio * ratio * wc, "k={k}: {spacing} vs {analytic}");
        }
    }

    #[test]
    fn branch_errors() {
        let space = SpaceSpec::new(3).unwrap();
        assert!(matches!(branch_hamiltonian(&params(1.0, 1.0, 0.1, 0.0), 0, space), Err(Error::SingularDetuning)));
        assert!(branch_hamiltonian(&params(1.0, 2.0, 0.1, 0.0), 2, space).is_err());
    }
}
