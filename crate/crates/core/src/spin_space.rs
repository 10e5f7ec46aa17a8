//! The full `2^m` spin space of a short periodic chain.
//!
//! Basis states are bit masks: bit `k-1` set means site `k` carries a down
//! spin. The Pauli Hamiltonian `-(χ/2) Σ_k σ_k·σ_{k+1}` is applied sparsely
//! through the exchange operators, using `σ·σ = 2p - 1`.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{C64, I};
use crate::spectral::{propagator_column, spin_wave_energies, ChainConfig};

/// Largest chain the tiny oracle accepts.
pub const MAX_SITES: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpinChain {
    pub m: usize,
    pub chi: f64,
}

impl SpinChain {
    pub fn new(m: usize, chi: f64, cap: usize) -> Result<Self> {
        if m < 2 {
            return Err(Error::InvalidConfig(format!("m = {m} < 2")));
        }
        if m > cap {
            return Err(Error::CapExceeded { size: m, cap });
        }
        if !chi.is_finite() {
            return Err(Error::InvalidConfig("chi must be finite".into()));
        }
        Ok(SpinChain { m, chi })
    }

    pub fn dim(&self) -> usize {
        1 << self.m
    }

    /// Bond `(k, k+1)` with periodic closure, sites 1-based.
    pub fn bond(&self, k: usize) -> (usize, usize) {
        (k, k % self.m + 1)
    }

    /// `p^{k,k+1}`: swap the spins on bond `k`.
    pub fn swap(&self, state: usize, k: usize) -> usize {
        let (a, b) = self.bond(k);
        let (ba, bb) = (1 << (a - 1), 1 << (b - 1));
        let sa = state & ba != 0;
        let sb = state & bb != 0;
        if sa == sb {
            state
        } else {
            state ^ ba ^ bb
        }
    }

    /// Constant `χ m / 2` that separates the Pauli form from `-χ Σ p`.
    pub fn pauli_constant(&self) -> f64 {
        self.chi * self.m as f64 / 2.0
    }

    /// `H ψ` for the Pauli Hamiltonian.
    pub fn apply(&self, psi: &[C64]) -> Vec<C64> {
        let c = self.pauli_constant();
        let mut out: Vec<C64> = psi.iter().map(|&z| z * c).collect();
        for (s, &amp) in psi.iter().enumerate() {
            if amp == C64::new(0.0, 0.0) {
                continue;
            }
            for k in 1..=self.m {
                out[self.swap(s, k)] -= amp * self.chi;
            }
        }
        out
    }

    /// Dense real matrix of the Pauli Hamiltonian.
    pub fn hamiltonian(&self) -> DMatrix<f64> {
        let dim = self.dim();
        let mut h = DMatrix::<f64>::identity(dim, dim) * self.pauli_constant();
        for s in 0..dim {
            for k in 1..=self.m {
                h[(self.swap(s, k), s)] -= self.chi;
            }
        }
        h
    }

    /// Number of down spins among `sites`.
    pub fn count_down(state: usize, sites: &[usize]) -> usize {
        sites
            .iter()
            .filter(|&&k| state & (1 << (k - 1)) != 0)
            .count()
    }

    /// `2 S_z` in units where each up spin counts +1.
    pub fn total_sz2(&self, state: usize) -> i64 {
        self.m as i64 - 2 * state.count_ones() as i64
    }

    /// `exp(-i H t) ψ` by Taylor steps with `‖H‖ dt ≤ 1/2`.
    pub fn evolve(&self, psi: &[C64], t: f64) -> Vec<C64> {
        // ‖H‖ ≤ χ m + χ m / 2
        let bound = 1.5 * self.chi.abs() * self.m as f64;
        let steps = ((bound * t.abs()) / 0.5).ceil().max(1.0) as usize;
        let dt = t / steps as f64;
        let mut state = psi.to_vec();
        for _ in 0..steps {
            let mut term = state.clone();
            let mut acc = state.clone();
            for n in 1..=40 {
                let h_term = self.apply(&term);
                let f = -I * dt / n as f64;
                term = h_term.into_iter().map(|z| z * f).collect();
                let size: f64 = term.iter().map(|z| z.norm()).fold(0.0, f64::max);
                for (a, z) in acc.iter_mut().zip(&term) {
                    *a += z;
                }
                if size < 1e-18 {
                    break;
                }
            }
            state = acc;
        }
        state
    }
}

/// One-down-spin basis vector `|φ_n⟩` in the full space.
pub fn one_down(m: usize, n: usize) -> Vec<C64> {
    let mut v = vec![C64::new(0.0, 0.0); 1 << m];
    v[1 << (n - 1)] = C64::new(1.0, 0.0);
    v
}

/// Spin wave `|ψ_ℓ⟩ = M^{-1/2} Σ_n e^{2πi ℓ n / M} |φ_n⟩` in the full space.
pub fn spin_wave(m: usize, l: usize) -> Vec<C64> {
    let mut v = vec![C64::new(0.0, 0.0); 1 << m];
    let norm = 1.0 / (m as f64).sqrt();
    for n in 1..=m {
        let phase = 2.0 * PI * ((l * n) % m) as f64 / m as f64;
        v[1 << (n - 1)] = (I * phase).exp() * norm;
    }
    v
}

fn dist(a: &[C64], b: &[C64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).norm_sqr())
        .sum::<f64>()
        .sqrt()
}

#[derive(Debug, Clone, Serialize)]
pub struct TinyOracleReport {
    pub m: usize,
    /// Offset between Pauli eigenvalues and `E_ℓ` on one-down-spin states.
    pub offset: f64,
    /// `p^{k,k+1}` exchanges `φ_k` and `φ_{k+1}`.
    pub swap_residual: f64,
    /// `(p^{k,k+1} - 1)|φ_n⟩ = 0` away from the bond.
    pub untouched_residual: f64,
    /// `H|φ_n⟩` equals hopping plus a constant on one-down-spin states.
    pub hopping_residual: f64,
    /// Largest `‖H ψ_ℓ - (E_ℓ + offset) ψ_ℓ‖`.
    pub eigen_residual: f64,
    /// Largest entry of `[H, S_z]`.
    pub commutator_residual: f64,
    /// Largest gap between full-space evolution of `|φ_1⟩` and the propagator.
    pub propagation_residual: f64,
}

impl TinyOracleReport {
    pub fn max_residual(&self) -> f64 {
        [
            self.swap_residual,
            self.untouched_residual,
            self.hopping_residual,
            self.eigen_residual,
            self.commutator_residual,
            self.propagation_residual,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

/// Checks the exchange form, spin-wave eigenvectors, `S_z` conservation and
/// the one-particle propagator against the full `2^m` space.
pub fn tiny_hilbert_oracle(m: usize, chi: f64, t: f64) -> Result<TinyOracleReport> {
    let chain = SpinChain::new(m, chi, MAX_SITES)?;
    let dim = chain.dim();
    let offset = chi * (2.0 - m as f64 / 2.0);

    let mut swap_residual = 0.0_f64;
    let mut untouched_residual = 0.0_f64;
    let mut hopping_residual = 0.0_f64;
    for k in 1..=m {
        let (a, b) = chain.bond(k);
        let phi_a = 1usize << (a - 1);
        let phi_b = 1usize << (b - 1);
        if chain.swap(phi_a, k) != phi_b || chain.swap(phi_b, k) != phi_a {
            swap_residual = 1.0;
        }
        for n in 1..=m {
            if n != a && n != b {
                let phi_n = 1usize << (n - 1);
                if chain.swap(phi_n, k) != phi_n {
                    untouched_residual = 1.0;
                }
            }
        }
    }
    for n in 1..=m {
        // H φ_n = -χ(φ_{n-1} + φ_{n+1}) + (χ m/2 - χ(m-2)) φ_n
        let h = chain.apply(&one_down(m, n));
        let mut want = one_down(m, n);
        for z in want.iter_mut() {
            *z *= chi * (m as f64 / 2.0 - (m as f64 - 2.0));
        }
        let prev = if n == 1 { m } else { n - 1 };
        let next = n % m + 1;
        want[1 << (prev - 1)] -= chi;
        want[1 << (next - 1)] -= chi;
        hopping_residual = hopping_residual.max(dist(&h, &want));
    }

    let cfg = ChainConfig::new(m, 1, chi, t)?;
    let energies = spin_wave_energies(&cfg).energies;
    let mut eigen_residual = 0.0_f64;
    for (l, e) in energies.iter().enumerate() {
        let psi = spin_wave(m, l);
        let h = chain.apply(&psi);
        let want: Vec<C64> = psi.iter().map(|z| z * (e + offset)).collect();
        eigen_residual = eigen_residual.max(dist(&h, &want));
    }

    // S_z is diagonal, so [H, S_z]_{ab} = H_ab (s_b - s_a).
    let mut commutator_residual = 0.0_f64;
    for s in 0..dim {
        for k in 1..=m {
            let s2 = chain.swap(s, k);
            let diff = (chain.total_sz2(s) - chain.total_sz2(s2)) as f64 / 2.0;
            commutator_residual = commutator_residual.max((chi * diff).abs());
        }
    }

    let kernel = propagator_column(&cfg);
    let evolved = chain.evolve(&one_down(m, 1), t);
    let phase = (-I * offset * t).exp();
    let mut propagation_residual = 0.0_f64;
    for d in 0..m {
        let got = evolved[1 << d];
        propagation_residual = propagation_residual.max((got - phase * kernel.g[d]).norm());
    }
    // everything outside the one-down-spin sector must stay empty
    for (s, z) in evolved.iter().enumerate() {
        if s.count_ones() != 1 {
            propagation_residual = propagation_residual.max(z.norm());
        }
    }

    Ok(TinyOracleReport {
        m,
        offset,
        swap_residual,
        untouched_residual,
        hopping_residual,
        eigen_residual,
        commutator_residual,
        propagation_residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exchange_swaps_first_bond() {
        let chain = SpinChain::new(5, 1.0, MAX_SITES).unwrap();
        // |↑↓↑↑↑⟩ -> |↓↑↑↑↑⟩
        assert_eq!(chain.swap(0b00010, 1), 0b00001);
        // periodic bond (5, 1)
        assert_eq!(chain.swap(0b10000, 5), 0b00001);
        assert_eq!(chain.swap(0b00011, 1), 0b00011);
    }

    #[test]
    fn dense_and_sparse_hamiltonians_agree() {
        let chain = SpinChain::new(5, 0.7, MAX_SITES).unwrap();
        let h = chain.hamiltonian();
        assert!((h.clone() - h.transpose()).abs().max() < 1e-15);
        let psi: Vec<C64> = (0..32)
            .map(|i| C64::new(i as f64 * 0.1, 1.0 - i as f64 * 0.05))
            .collect();
        let sparse = chain.apply(&psi);
        for r in 0..32 {
            let dense: C64 = (0..32).map(|c| psi[c] * h[(r, c)]).sum();
            assert!((dense - sparse[r]).norm() < 1e-12);
        }
    }

    #[test]
    fn fully_aligned_state_energy() {
        // all bonds aligned: σ·σ = 1 on every bond, E = -χ m / 2
        let chain = SpinChain::new(6, 1.0, MAX_SITES).unwrap();
        let mut up = vec![C64::new(0.0, 0.0); 64];
        up[0] = C64::new(1.0, 0.0);
        let h = chain.apply(&up);
        assert!((h[0] - C64::new(-3.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn oracle_m6() {
        let r = tiny_hilbert_oracle(6, 1.0, 0.8).unwrap();
        assert_eq!(r.offset, -1.0);
        assert!(r.max_residual() < 1e-10, "{r:?}");
    }

    #[test]
    fn oracle_rejects_large_chains() {
        assert!(matches!(
            tiny_hilbert_oracle(13, 1.0, 0.1),
            Err(Error::CapExceeded { .. })
        ));
    }
}
