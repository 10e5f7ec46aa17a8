//! Local conservation and decoherence on short full spin chains.
//!
//! `Q` counts down spins in a region `V`. Its current `J = i[H, Q]` lives on
//! the bonds crossing the boundary of `V`, `Q_t - Q = ∫ J(t') dt'`, and
//! amplitudes between different eigenvalues of `Q` are fixed by the
//! boundary current alone. Everything is computed in the eigenbasis of the
//! Pauli Hamiltonian, where time dependence is a phase per matrix element.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{hermitian_norm, real_to_complex, CMatrix, C64, I};
use crate::spin_space::SpinChain;

/// Largest chain used for dense conservation checks.
pub const MAX_CONSERVATION_SITES: usize = 10;

/// Default number of midpoint-rule steps.
pub const DEFAULT_QUAD_STEPS: usize = 2000;

#[derive(Debug, Clone, PartialEq)]
pub struct RegionalCharge {
    pub m: usize,
    /// Sites of `V`, 1-based.
    pub region: Vec<usize>,
    /// Down-spin count in `V` for each basis state.
    pub counts: Vec<usize>,
}

impl RegionalCharge {
    pub fn new(m: usize, region: &[usize]) -> Result<Self> {
        if m > MAX_CONSERVATION_SITES {
            return Err(Error::CapExceeded {
                size: m,
                cap: MAX_CONSERVATION_SITES,
            });
        }
        let mut sites = region.to_vec();
        sites.sort_unstable();
        sites.dedup();
        if sites.is_empty() || sites.len() != region.len() || sites.iter().any(|&k| k < 1 || k > m)
        {
            return Err(Error::InvalidArgument(format!(
                "bad region {region:?} on {m} sites"
            )));
        }
        let counts = (0..1usize << m)
            .map(|s| SpinChain::count_down(s, &sites))
            .collect();
        Ok(RegionalCharge {
            m,
            region: sites,
            counts,
        })
    }

    /// Contiguous block `start..start+len` (periodic), 1-based.
    pub fn block(m: usize, start: usize, len: usize) -> Result<Self> {
        let region: Vec<usize> = (0..len).map(|i| (start - 1 + i) % m + 1).collect();
        Self::new(m, &region)
    }

    pub fn contains(&self, k: usize) -> bool {
        self.region.binary_search(&k).is_ok()
    }

    pub fn matrix(&self) -> CMatrix {
        CMatrix::from_diagonal(&DVector::from_iterator(
            self.counts.len(),
            self.counts.iter().map(|&c| C64::new(c as f64, 0.0)),
        ))
    }

    /// Spectral projector onto `Q = alpha`, as a 0/1 mask.
    pub fn projector_mask(&self, alpha: usize) -> Vec<bool> {
        self.counts.iter().map(|&c| c == alpha).collect()
    }

    /// Bonds `(k, k+1)` with exactly one end in `V`.
    pub fn boundary_bonds(&self) -> Vec<usize> {
        (1..=self.m)
            .filter(|&k| self.contains(k) != self.contains(k % self.m + 1))
            .collect()
    }
}

/// `H` together with its eigendecomposition.
pub struct Dynamics {
    pub chain: SpinChain,
    pub h: DMatrix<f64>,
    pub energies: Vec<f64>,
    pub vectors: DMatrix<f64>,
}

impl Dynamics {
    pub fn new(m: usize, chi: f64) -> Result<Self> {
        let chain = SpinChain::new(m, chi, MAX_CONSERVATION_SITES)?;
        let h = chain.hamiltonian();
        let eig = h.clone().symmetric_eigen();
        Ok(Dynamics {
            chain,
            h,
            energies: eig.eigenvalues.iter().copied().collect(),
            vectors: eig.eigenvectors,
        })
    }

    fn to_eigen(&self, op: &CMatrix) -> CMatrix {
        let v = real_to_complex(&self.vectors);
        v.transpose() * op * v
    }

    fn vec_to_eigen(&self, psi: &DVector<C64>) -> DVector<C64> {
        real_to_complex(&self.vectors).transpose() * psi
    }

    /// `J = i[H, Q]` in the spin basis.
    pub fn current(&self, q: &RegionalCharge) -> CMatrix {
        let h = real_to_complex(&self.h);
        let qm = q.matrix();
        (&h * &qm - &qm * &h) * I
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct FluxReport {
    pub steps: usize,
    /// `‖Q_t - Q - Σ h J(t_k)‖` at `steps`.
    pub residual: f64,
    /// Same at `steps / 2`.
    pub residual_half: f64,
    /// `log2(residual_half / residual)`.
    pub order: f64,
}

/// Midpoint quadrature of the Heisenberg current against `Q_t - Q`.
pub fn flux_balance_check(
    dyn_: &Dynamics,
    q: &RegionalCharge,
    t: f64,
    steps: usize,
) -> Result<FluxReport> {
    if steps < 2 {
        return Err(Error::InvalidArgument(
            "need at least 2 quadrature steps".into(),
        ));
    }
    if q.m != dyn_.chain.m {
        return Err(Error::DimensionMismatch(
            "charge and chain sizes differ".into(),
        ));
    }
    let qe = dyn_.to_eigen(&q.matrix());
    let je = dyn_.to_eigen(&dyn_.current(q));
    let residual_at = |n: usize| {
        let h = t / n as f64;
        let dim = qe.nrows();
        let r = CMatrix::from_fn(dim, dim, |a, b| {
            let w = dyn_.energies[a] - dyn_.energies[b];
            let exact = qe[(a, b)] * ((I * w * t).exp() - 1.0);
            let quad: C64 = (0..n)
                .map(|k| (I * w * (h * (k as f64 + 0.5))).exp())
                .sum::<C64>()
                * h;
            exact - je[(a, b)] * quad
        });
        hermitian_norm(&r)
    };
    let residual = residual_at(steps);
    let residual_half = residual_at(steps / 2);
    Ok(FluxReport {
        steps,
        residual,
        residual_half,
        order: (residual_half / residual).log2(),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct LocalityReport {
    pub boundary_bonds: Vec<usize>,
    /// Largest `|J_ab|` not produced by an exchange on a boundary bond.
    pub off_support: f64,
    /// Largest `‖[p^{k,k+1}, Q]‖` over bonds not on the boundary.
    pub interior_commutator: f64,
}

/// `J` connects only states related by an exchange across the boundary.
pub fn boundary_locality(dyn_: &Dynamics, q: &RegionalCharge) -> LocalityReport {
    let j = dyn_.current(q);
    let bonds = q.boundary_bonds();
    let chain = &dyn_.chain;
    let mut off_support = 0.0_f64;
    for b in 0..j.ncols() {
        for a in 0..j.nrows() {
            let reachable = bonds.iter().any(|&k| a != b && chain.swap(b, k) == a);
            if !reachable {
                off_support = off_support.max(j[(a, b)].norm());
            }
        }
    }
    let mut interior_commutator = 0.0_f64;
    for k in (1..=q.m).filter(|k| !bonds.contains(k)) {
        for s in 0..j.ncols() {
            let diff = q.counts[chain.swap(s, k)] as f64 - q.counts[s] as f64;
            interior_commutator = interior_commutator.max(diff.abs());
        }
    }
    LocalityReport {
        boundary_bonds: bonds,
        off_support,
        interior_commutator,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct AmplitudeReport {
    pub alpha1: usize,
    pub alpha2: usize,
    pub direct: C64,
    /// `-1/(α2-α1) ∫ ⟨m|P2 e^{iHt} e^{-iHt'} J e^{iHt'} P1|n⟩ dt'`.
    pub flux_form: C64,
    /// The same with the forward-picture current `e^{iHt'} J e^{-iHt'}`.
    pub forward_variant: C64,
}

impl AmplitudeReport {
    pub fn gap(&self) -> f64 {
        (self.direct - self.flux_form).norm()
    }
}

/// `⟨m|P_{α2} e^{iHt} P_{α1}|n⟩` directly and through the boundary current.
#[allow(clippy::too_many_arguments)]
pub fn amplitude_suppression_check(
    dyn_: &Dynamics,
    q: &RegionalCharge,
    t: f64,
    bra: &DVector<C64>,
    ket: &DVector<C64>,
    alpha1: usize,
    alpha2: usize,
    steps: usize,
) -> Result<AmplitudeReport> {
    if alpha1 == alpha2 {
        return Err(Error::InvalidArgument(
            "alpha1 and alpha2 must differ".into(),
        ));
    }
    let dim = q.counts.len();
    if bra.len() != dim || ket.len() != dim {
        return Err(Error::DimensionMismatch(format!(
            "states must have length {dim}"
        )));
    }
    if steps == 0 {
        return Err(Error::InvalidArgument(
            "need at least 1 quadrature step".into(),
        ));
    }
    let mask = |alpha: usize, v: &DVector<C64>| {
        DVector::from_iterator(
            dim,
            v.iter()
                .zip(&q.counts)
                .map(|(z, &c)| if c == alpha { *z } else { C64::new(0.0, 0.0) }),
        )
    };
    // ⟨m|P2 in the eigenbasis (as a column to be conjugated) and P1|n⟩
    let left = dyn_.vec_to_eigen(&mask(alpha2, bra));
    let right = dyn_.vec_to_eigen(&mask(alpha1, ket));
    let je = dyn_.to_eigen(&dyn_.current(q));
    let e = &dyn_.energies;

    let direct: C64 = (0..dim)
        .map(|a| left[a].conj() * (I * e[a] * t).exp() * right[a])
        .sum();

    let h = t / steps as f64;
    let mut backward = C64::new(0.0, 0.0);
    let mut forward = C64::new(0.0, 0.0);
    // ⟨L| e^{iHt} X |R⟩ with X = Σ_k h X(t_k); both pictures are phases on J_ab
    for a in 0..dim {
        let la = left[a].conj() * (I * e[a] * t).exp();
        if la == C64::new(0.0, 0.0) {
            continue;
        }
        for b in 0..dim {
            let term = la * je[(a, b)] * right[b];
            if term == C64::new(0.0, 0.0) {
                continue;
            }
            let w = e[a] - e[b];
            let mut sb = C64::new(0.0, 0.0);
            let mut sf = C64::new(0.0, 0.0);
            for k in 0..steps {
                let s = h * (k as f64 + 0.5);
                sb += (-I * w * s).exp();
                sf += (I * w * s).exp();
            }
            backward += term * sb * h;
            forward += term * sf * h;
        }
    }
    let scale = -1.0 / (alpha2 as f64 - alpha1 as f64);
    Ok(AmplitudeReport {
        alpha1,
        alpha2,
        direct,
        flux_form: backward * scale,
        forward_variant: forward * scale,
    })
}

/// Largest `|⟨m|P_{α2} e^{iHt} P_{α1}|n⟩|` over basis states and `α1 ≠ α2`.
pub fn max_cross_amplitude(dyn_: &Dynamics, q: &RegionalCharge, t: f64) -> f64 {
    let v = real_to_complex(&dyn_.vectors);
    let u = dyn_.phased_evolution(&v, t);
    let mut best = 0.0_f64;
    for b in 0..u.ncols() {
        for a in 0..u.nrows() {
            if q.counts[a] != q.counts[b] {
                best = best.max(u[(a, b)].norm());
            }
        }
    }
    best
}

impl Dynamics {
    /// `e^{iHt}` in the spin basis.
    fn phased_evolution(&self, v: &CMatrix, t: f64) -> CMatrix {
        let mut scaled = v.clone();
        for (j, &e) in self.energies.iter().enumerate() {
            let w = (I * e * t).exp();
            for x in scaled.column_mut(j).iter_mut() {
                *x *= w;
            }
        }
        scaled * v.transpose()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct TrendRow {
    pub region_size: usize,
    pub max_amplitude: f64,
}

/// Cross-eigenvalue amplitude as `V` shrinks from `sizes[0]` sites.
pub fn shrinking_region_trend(dyn_: &Dynamics, t: f64, sizes: &[usize]) -> Result<Vec<TrendRow>> {
    sizes
        .iter()
        .map(|&len| {
            let q = RegionalCharge::block(dyn_.chain.m, 1, len)?;
            Ok(TrendRow {
                region_size: len,
                max_amplitude: max_cross_amplitude(dyn_, &q, t),
            })
        })
        .collect()
}

/// Largest off-diagonal entry of the two-time functional of a global charge
/// for a random initial state.
pub fn global_charge_diagonality(m: usize, chi: f64, t: f64, seed: u64) -> Result<f64> {
    let dyn_ = Dynamics::new(m, chi)?;
    let q = RegionalCharge::new(m, &(1..=m).collect::<Vec<_>>())?;
    let dim = q.counts.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut psi = DVector::from_fn(dim, |_, _| {
        C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
    });
    psi /= C64::new(psi.norm(), 0.0);

    let v = real_to_complex(&dyn_.vectors);
    let u = dyn_.phased_evolution(&v, -t); // e^{-iHt}
    let project = |alpha: usize, x: &DVector<C64>| {
        DVector::from_iterator(
            dim,
            x.iter()
                .zip(&q.counts)
                .map(|(z, &c)| if c == alpha { *z } else { C64::new(0.0, 0.0) }),
        )
    };
    // branch states P_{α2} e^{-iHt} P_{α1} ψ
    let mut worst = 0.0_f64;
    for a2 in 0..=m {
        let branches: Vec<DVector<C64>> = (0..=m)
            .map(|a1| project(a2, &(&u * project(a1, &psi))))
            .collect();
        for a1 in 0..=m {
            for b1 in 0..=m {
                if a1 != b1 {
                    worst = worst.max(branches[b1].dotc(&branches[a1]).norm());
                }
            }
        }
    }
    Ok(worst)
}
