//! Spin waves, the one-particle propagator and the time-evolved regional
//! projector on the periodic chain.
//!
//! Sites are numbered `1..=M` as in `|φ_k⟩` (down spin at site `k`); modes
//! run `0..M`. With `U = exp(-i H₁ t)` the propagator column is
//! `g(Δ) = ⟨φ_{k+Δ}|U|φ_k⟩`, independent of `k` by translation invariance,
//! and the Heisenberg projector is `P(t) = U† P U`.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{real_to_complex, spectral_apply, CMatrix, C64, I};

/// Largest chain handled by the dense oracle unless a caller raises it.
pub const DEFAULT_ORACLE_CAP: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChainConfig {
    /// Number of sites.
    pub m: usize,
    /// Size of region 1 (sites `1..=m1`).
    pub m1: usize,
    /// Exchange coupling.
    pub chi: f64,
    /// Evolution time.
    pub t: f64,
}

impl ChainConfig {
    pub fn new(m: usize, m1: usize, chi: f64, t: f64) -> Result<Self> {
        let cfg = ChainConfig { m, m1, chi, t };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.m < 2 {
            return Err(Error::InvalidConfig(format!("M = {} < 2", self.m)));
        }
        if self.m1 < 1 || self.m1 > self.m {
            return Err(Error::InvalidConfig(format!(
                "M1 = {} outside 1..={}",
                self.m1, self.m
            )));
        }
        if !self.chi.is_finite() || !self.t.is_finite() {
            return Err(Error::InvalidConfig("chi and t must be finite".into()));
        }
        Ok(())
    }

    pub fn m2(&self) -> usize {
        self.m - self.m1
    }

    pub fn with_m1(&self, m1: usize) -> Result<Self> {
        ChainConfig::new(self.m, m1, self.chi, self.t)
    }

    fn check_site(&self, n: usize) -> Result<()> {
        if n < 1 || n > self.m {
            Err(Error::SiteOutOfRange {
                index: n,
                m: self.m,
            })
        } else {
            Ok(())
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpinWaveSpectrum {
    pub energies: Vec<f64>,
}

/// `E_ℓ = -2χ cos(2πℓ/M)`, `ℓ = 0..M`.
pub fn spin_wave_energies(cfg: &ChainConfig) -> SpinWaveSpectrum {
    let m = cfg.m as f64;
    let energies = (0..cfg.m)
        .map(|l| -2.0 * cfg.chi * (2.0 * PI * l as f64 / m).cos())
        .collect();
    SpinWaveSpectrum { energies }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PropagatorKernel {
    pub g: Vec<C64>,
}

impl PropagatorKernel {
    /// `g(Δ)` for any integer offset (taken mod M).
    #[inline]
    pub fn amplitude(&self, delta: isize) -> C64 {
        let m = self.g.len() as isize;
        self.g[delta.rem_euclid(m) as usize]
    }

    pub fn norm_sqr_sum(&self) -> f64 {
        self.g.iter().map(|z| z.norm_sqr()).sum()
    }
}

/// `g(Δ) = (1/M) Σ_ℓ exp(-i t E_ℓ) exp(2πi ℓΔ/M)` by one inverse FFT.
pub fn propagator_column(cfg: &ChainConfig) -> PropagatorKernel {
    let spectrum = spin_wave_energies(cfg);
    let mut buf: Vec<C64> = spectrum
        .energies
        .iter()
        .map(|&e| (-I * cfg.t * e).exp())
        .collect();
    let mut planner = FftPlanner::<f64>::new();
    planner.plan_fft_inverse(cfg.m).process(&mut buf);
    let scale = 1.0 / cfg.m as f64;
    for z in buf.iter_mut() {
        *z *= scale;
    }
    PropagatorKernel { g: buf }
}

/// A chain together with its propagator, for repeated matrix-element queries.
#[derive(Debug, Clone)]
pub struct ChainPropagator {
    cfg: ChainConfig,
    kernel: PropagatorKernel,
}

impl ChainPropagator {
    pub fn new(cfg: ChainConfig) -> Result<Self> {
        cfg.validate()?;
        let kernel = propagator_column(&cfg);
        Ok(ChainPropagator { cfg, kernel })
    }

    pub fn config(&self) -> &ChainConfig {
        &self.cfg
    }

    pub fn kernel(&self) -> &PropagatorKernel {
        &self.kernel
    }

    /// `⟨φ_n|P(t)|φ_n'⟩ = Σ_{k=1}^{M1} conj(g(k-n)) g(k-n')`.
    pub fn projector_element(&self, n: usize, n_prime: usize) -> Result<C64> {
        self.cfg.check_site(n)?;
        self.cfg.check_site(n_prime)?;
        Ok(self.projector_element_unchecked(n, n_prime))
    }

    pub(crate) fn projector_element_unchecked(&self, n: usize, n_prime: usize) -> C64 {
        let (n, np) = (n as isize, n_prime as isize);
        (1..=self.cfg.m1 as isize)
            .map(|k| self.kernel.amplitude(k - n).conj() * self.kernel.amplitude(k - np))
            .sum()
    }

    /// Full `M × M` matrix of `P(t)` from the propagator.
    pub fn projector_matrix(&self) -> CMatrix {
        let m = self.cfg.m;
        CMatrix::from_fn(m, m, |r, c| self.projector_element_unchecked(r + 1, c + 1))
    }
}

/// One-shot `⟨φ_n|P(t)|φ_n'⟩`; use [`ChainPropagator`] for many queries.
pub fn projector_matrix_element(cfg: &ChainConfig, n: usize, n_prime: usize) -> Result<C64> {
    ChainPropagator::new(*cfg)?.projector_element(n, n_prime)
}

/// `d(ℓ,ℓ') = Σ_{k=1}^{M1} exp(-2πi k(ℓ-ℓ')/M)`.
pub fn d_kernel(cfg: &ChainConfig, l: usize, l_prime: usize) -> C64 {
    let m = cfg.m as isize;
    let diff = (l as isize - l_prime as isize).rem_euclid(m);
    if diff == 0 {
        return C64::new(cfg.m1 as f64, 0.0);
    }
    let x = 2.0 * PI * diff as f64 / cfg.m as f64;
    let num = (-I * (cfg.m1 as f64 * x)).exp() - 1.0;
    let den = C64::new(1.0, 0.0) - (I * x).exp();
    num / den
}

/// `⟨φ_n|P(t)|φ_n'⟩` from the double mode sum
/// `(1/M²) Σ_{ℓ,ℓ'} e^{it(E_ℓ-E_ℓ')} e^{2πi(nℓ-n'ℓ')/M} d(ℓ,ℓ')`. O(M²).
pub fn projector_element_spectral(cfg: &ChainConfig, n: usize, n_prime: usize) -> Result<C64> {
    cfg.validate()?;
    cfg.check_site(n)?;
    cfg.check_site(n_prime)?;
    let energies = spin_wave_energies(cfg).energies;
    let m = cfg.m;
    let phase = |k: usize, l: usize| 2.0 * PI * ((k * l) % m) as f64 / m as f64;
    let mut sum = C64::new(0.0, 0.0);
    for (l, &el) in energies.iter().enumerate() {
        let left = (I * (cfg.t * el + phase(n, l))).exp();
        for (lp, &elp) in energies.iter().enumerate() {
            let right = (-I * (cfg.t * elp + phase(n_prime, lp))).exp();
            sum += left * right * d_kernel(cfg, l, lp);
        }
    }
    Ok(sum / (m * m) as f64)
}

/// `⟨ψ_ℓ|ψ_ℓ'⟩ = (1/M) Σ_k exp(2πi k(ℓ'-ℓ)/M)`.
pub fn spin_wave_overlap(m: usize, l: usize, l_prime: usize) -> C64 {
    (1..=m)
        .map(|k| {
            let diff = (l_prime as isize - l as isize).rem_euclid(m as isize) as usize;
            (I * (2.0 * PI * ((k * diff) % m) as f64 / m as f64)).exp()
        })
        .sum::<C64>()
        / m as f64
}

/// `H₁ = -χ Σ_k (|φ_k⟩⟨φ_{k-1}| + h.c.)` with periodic closure.
pub fn hopping_matrix(cfg: &ChainConfig) -> DMatrix<f64> {
    let m = cfg.m;
    let mut h = DMatrix::<f64>::zeros(m, m);
    for k in 0..m {
        let prev = (k + m - 1) % m;
        h[(k, prev)] -= cfg.chi;
        h[(prev, k)] -= cfg.chi;
    }
    h
}

/// `exp(-i H₁ t)` by full diagonalization of the hopping matrix.
pub fn dense_propagator(cfg: &ChainConfig, cap: usize) -> Result<CMatrix> {
    cfg.validate()?;
    if cfg.m > cap {
        return Err(Error::CapExceeded { size: cfg.m, cap });
    }
    let eig = hopping_matrix(cfg).symmetric_eigen();
    let values: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    let vectors = real_to_complex(&eig.eigenvectors);
    Ok(spectral_apply(&values, &vectors, |e| {
        (-I * e * cfg.t).exp()
    }))
}

/// `P(t) = U† P U` built densely; independent of the FFT path.
pub fn dense_oracle(cfg: &ChainConfig, cap: usize) -> Result<CMatrix> {
    let u = dense_propagator(cfg, cap)?;
    let m = cfg.m;
    let p = CMatrix::from_fn(m, m, |r, c| {
        if r == c && r < cfg.m1 {
            C64::new(1.0, 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    });
    Ok(u.adjoint() * p * u)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{hermiticity_residual, max_abs};

    fn cfg(m: usize, m1: usize, chi: f64, t: f64) -> ChainConfig {
        ChainConfig::new(m, m1, chi, t).unwrap()
    }

    #[test]
    fn config_rejects_bad_regions() {
        assert!(ChainConfig::new(1, 1, 1.0, 0.0).is_err());
        assert!(ChainConfig::new(8, 0, 1.0, 0.0).is_err());
        assert!(ChainConfig::new(8, 9, 1.0, 0.0).is_err());
        assert!(ChainConfig::new(8, 3, f64::NAN, 0.0).is_err());
        assert_eq!(cfg(8, 3, 1.0, 0.0).m2(), 5);
    }

    #[test]
    fn energies_m4() {
        let e = spin_wave_energies(&cfg(4, 1, 1.0, 0.0)).energies;
        let expect = [-2.0, 0.0, 2.0, 0.0];
        for (a, b) in e.iter().zip(expect) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn energies_sum_to_zero_and_span_band() {
        for m in [2, 3, 7, 64, 1000] {
            let e = spin_wave_energies(&cfg(m, 1, 1.3, 0.0)).energies;
            assert!(e.iter().sum::<f64>().abs() < 1e-11 * m as f64);
        }
        let e = spin_wave_energies(&cfg(1000, 1, 1.0, 0.0)).energies;
        let min = e.iter().copied().fold(f64::INFINITY, f64::min);
        let max = e.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        assert!((min + 2.0).abs() < 1e-12 && (max - 2.0).abs() < 1e-12);
    }

    #[test]
    fn propagator_is_identity_at_t0() {
        let k = propagator_column(&cfg(16, 4, 1.0, 0.0));
        for (d, z) in k.g.iter().enumerate() {
            let want = if d == 0 { 1.0 } else { 0.0 };
            assert!((z - C64::new(want, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn propagator_unitarity() {
        for (m, t) in [(8, 0.7), (1000, 1000.0), (33, -4.2)] {
            let k = propagator_column(&cfg(m, 1, 1.0, t));
            assert!((k.norm_sqr_sum() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn propagator_matches_dense_column() {
        let c = cfg(8, 3, 1.0, 0.7);
        let k = propagator_column(&c);
        let u = dense_propagator(&c, DEFAULT_ORACLE_CAP).unwrap();
        for d in 0..8 {
            assert!((k.g[d] - u[(d, 0)]).norm() < 1e-10);
        }
    }

    #[test]
    fn projector_element_edge_cases() {
        let p0 = ChainPropagator::new(cfg(10, 4, 1.0, 0.0)).unwrap();
        for n in 1..=4 {
            assert!((p0.projector_element(n, n).unwrap() - 1.0).norm() < 1e-14);
        }
        assert!(p0.projector_element(6, 6).unwrap().norm() < 1e-14);

        let full = ChainPropagator::new(cfg(10, 10, 1.0, 3.1)).unwrap();
        for n in 1..=10 {
            for np in 1..=10 {
                let want = if n == np { 1.0 } else { 0.0 };
                assert!((full.projector_element(n, np).unwrap() - want).norm() < 1e-12);
            }
        }
        assert!(matches!(
            p0.projector_element(0, 1),
            Err(Error::SiteOutOfRange { .. })
        ));
        assert!(p0.projector_element(1, 11).is_err());
    }

    #[test]
    fn projector_element_matches_dense_oracle() {
        let c = cfg(8, 3, 1.0, 1.3);
        let dense = dense_oracle(&c, DEFAULT_ORACLE_CAP).unwrap();
        let v = projector_matrix_element(&c, 2, 6).unwrap();
        assert!((v - dense[(1, 5)]).norm() < 1e-10);
    }

    #[test]
    fn d_kernel_cases() {
        let c = cfg(12, 5, 1.0, 0.0);
        assert_eq!(d_kernel(&c, 3, 3), C64::new(5.0, 0.0));
        let full = cfg(12, 12, 1.0, 0.0);
        for l in 0..12 {
            for lp in 0..12 {
                if l != lp {
                    assert!(d_kernel(&full, l, lp).norm() < 1e-13);
                }
            }
        }
        // M=6, M1=2, ℓ-ℓ'=1 against the explicit two-term sum
        let c = cfg(6, 2, 1.0, 0.0);
        let x = 2.0 * PI / 6.0;
        let direct = (-I * x).exp() + (-I * 2.0 * x).exp();
        assert!((d_kernel(&c, 4, 3) - direct).norm() < 1e-14);
    }

    #[test]
    fn dense_oracle_properties() {
        let c0 = cfg(9, 4, 1.0, 0.0);
        let p = dense_oracle(&c0, DEFAULT_ORACLE_CAP).unwrap();
        for r in 0..9 {
            for col in 0..9 {
                let want = if r == col && r < 4 { 1.0 } else { 0.0 };
                assert!((p[(r, col)] - want).norm() < 1e-12);
            }
        }
        let c = cfg(12, 5, 0.8, 2.4);
        let p = dense_oracle(&c, DEFAULT_ORACLE_CAP).unwrap();
        assert!(hermiticity_residual(&p) < 1e-12);
        assert!(max_abs(&(&p * &p - &p)) < 1e-10);
        assert!(matches!(
            dense_oracle(&cfg(300, 3, 1.0, 1.0), DEFAULT_ORACLE_CAP),
            Err(Error::CapExceeded { .. })
        ));
    }

    #[test]
    fn spectral_double_sum_matches_positional() {
        let c = cfg(12, 5, 1.1, 0.9);
        let prop = ChainPropagator::new(c).unwrap();
        for (n, np) in [(1, 1), (2, 9), (12, 3), (5, 6)] {
            let a = prop.projector_element(n, np).unwrap();
            let b = projector_element_spectral(&c, n, np).unwrap();
            assert!((a - b).norm() < 1e-12, "{n},{np}: {a} vs {b}");
        }
    }

    #[test]
    fn spin_waves_are_orthonormal() {
        for m in [2, 5, 16] {
            for l in 0..m {
                for lp in 0..m {
                    let want = if l == lp { 1.0 } else { 0.0 };
                    assert!((spin_wave_overlap(m, l, lp) - want).norm() < 1e-13);
                }
            }
        }
    }
}
