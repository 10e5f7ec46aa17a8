//! Occupation-number projectors and the brute-force tensor-product oracle.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    hermiticity_residual, identity, kron, projector_residual, require_square, trace,
    unitary_evolution, CMatrix, C64,
};

/// Largest total tensor dimension built densely by default.
pub const DEFAULT_TENSOR_CAP: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct OccupationHistory {
    pub n: usize,
    /// Components in `y` at time 0, ket side.
    pub n1: usize,
    /// Components in `y` at time `t`.
    pub n2: usize,
    /// Components in `y` at time 0, bra side.
    pub n1p: usize,
}

impl OccupationHistory {
    pub fn new(n: usize, n1: usize, n2: usize, n1p: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("N must be at least 1".into()));
        }
        for value in [n1, n2, n1p] {
            if value > n {
                return Err(Error::OccupationOutOfRange { value, n });
            }
        }
        Ok(OccupationHistory { n, n1, n2, n1p })
    }

    pub fn is_diagonal(&self) -> bool {
        self.n1 == self.n1p
    }
}

fn tensor_dim(dim: usize, n: usize, cap: usize) -> Result<usize> {
    let mut total = 1usize;
    for _ in 0..n {
        total = total.saturating_mul(dim);
        if total > cap {
            return Err(Error::CapExceeded { size: total, cap });
        }
    }
    Ok(total)
}

/// `P_n`: sum over every placement of `n` factors `P` among `N - n` factors `P̄`.
pub fn occupation_projector_oracle(
    p: &CMatrix,
    n_components: usize,
    n: usize,
    cap: usize,
) -> Result<CMatrix> {
    let dim = p.nrows();
    require_square("P", p, dim)?;
    if n > n_components {
        return Err(Error::OccupationOutOfRange {
            value: n,
            n: n_components,
        });
    }
    let total = tensor_dim(dim, n_components, cap)?;
    let pbar = identity(dim) - p;
    let mut out = CMatrix::zeros(total, total);
    for mask in 0u64..(1u64 << n_components) {
        if mask.count_ones() as usize != n {
            continue;
        }
        let mut term = identity(1);
        for slot in 0..n_components {
            let factor = if mask & (1 << slot) != 0 { p } else { &pbar };
            term = kron(&term, factor);
        }
        out += term;
    }
    Ok(out)
}

/// Dense `N`-component system: `ρ^{⊗N}`, `H_T = Σ_i H_i`, and every `P_n`.
pub struct TensorOracle {
    n: usize,
    rho_t: CMatrix,
    u: CMatrix,
    projectors: Vec<CMatrix>,
}

impl TensorOracle {
    pub fn new(
        rho: &CMatrix,
        h: &CMatrix,
        p: &CMatrix,
        t: f64,
        n: usize,
        cap: usize,
    ) -> Result<Self> {
        let dim = rho.nrows();
        require_square("rho", rho, dim)?;
        require_square("H", h, dim)?;
        require_square("P", p, dim)?;
        if n == 0 {
            return Err(Error::InvalidArgument("N must be at least 1".into()));
        }
        let residual = projector_residual(p);
        if residual > 1e-8 {
            return Err(Error::NotProjector { residual });
        }
        if hermiticity_residual(h) > 1e-10 {
            return Err(Error::InvalidArgument("H is not Hermitian".into()));
        }
        let total = tensor_dim(dim, n, cap)?;

        let mut rho_t = identity(1);
        for _ in 0..n {
            rho_t = kron(&rho_t, rho);
        }
        let mut h_t = CMatrix::zeros(total, total);
        for slot in 0..n {
            let mut term = identity(1);
            for other in 0..n {
                let factor = if other == slot {
                    h.clone()
                } else {
                    identity(dim)
                };
                term = kron(&term, &factor);
            }
            h_t += term;
        }
        let u = unitary_evolution(&h_t, t);
        let projectors = (0..=n)
            .map(|k| occupation_projector_oracle(p, n, k, cap))
            .collect::<Result<Vec<_>>>()?;
        Ok(TensorOracle {
            n,
            rho_t,
            u,
            projectors,
        })
    }

    /// `Tr(P_{n2} e^{-iHt} P_{n1} ρ P_{n1p} e^{iHt})`.
    pub fn value(&self, history: OccupationHistory) -> Result<C64> {
        if history.n != self.n {
            return Err(Error::InvalidArgument(format!(
                "history has N = {}, oracle has N = {}",
                history.n, self.n
            )));
        }
        let p = &self.projectors;
        let inner = &p[history.n1] * &self.rho_t * &p[history.n1p];
        let evolved = &self.u * inner * self.u.adjoint();
        Ok(trace(&(&p[history.n2] * evolved)))
    }
}

pub fn collective_df_tensor_oracle(
    rho: &CMatrix,
    h: &CMatrix,
    p: &CMatrix,
    t: f64,
    history: OccupationHistory,
    cap: usize,
) -> Result<C64> {
    TensorOracle::new(rho, h, p, t, history.n, cap)?.value(history)
}
