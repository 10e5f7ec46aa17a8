//! Two-time, two-alternative decoherence functional of a single component.
//!
//! Alternatives are `y` (projector `P`) and `n` (`P̄ = 1 - P`). In every
//! label the first letter is the alternative at time 0 and the second the
//! alternative at time `t`; `D(a0,at|b0,at) = Tr(P_at(t) P_a0 ρ P_b0)` with
//! `P(t) = U† P U`, `U = exp(-iHt)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    hermiticity_residual, identity, projector_residual, require_square, trace, unitary_evolution,
    CMatrix, C64,
};
use crate::spectral::{ChainConfig, ChainPropagator};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComponentDF {
    pub p_yy: f64,
    pub p_ny: f64,
    pub p_yn: f64,
    pub p_nn: f64,
    /// `D(y,y|n,y)`
    pub d_yy_ny: C64,
    /// `D(n,y|y,y)`
    pub d_ny_yy: C64,
    /// `D(y,n|n,n)`
    pub d_yn_nn: C64,
    /// `D(n,n|y,n)`
    pub d_nn_yn: C64,
}

impl ComponentDF {
    /// Probability of `y` at time 0.
    pub fn p0(&self) -> f64 {
        self.p_yy + self.p_yn
    }

    /// Probability of `y` at time `t`: `Tr(P(t) ρ)`, interference included.
    pub fn pt(&self) -> f64 {
        self.p_yy + self.p_ny + 2.0 * self.d_yy_ny.re
    }

    pub fn re_d(&self) -> f64 {
        self.d_yy_ny.re
    }

    pub fn im_d(&self) -> f64 {
        self.d_yy_ny.im
    }

    pub fn probability_sum(&self) -> f64 {
        self.p_yy + self.p_ny + self.p_yn + self.p_nn
    }

    /// Largest violation of the two-time sum rules and conjugacy.
    pub fn sum_rule_residual(&self) -> f64 {
        [
            (self.probability_sum() - 1.0).abs(),
            (self.d_yy_ny + self.d_yn_nn).norm(),
            (self.d_ny_yy + self.d_nn_yn).norm(),
            (self.d_ny_yy - self.d_yy_ny.conj()).norm(),
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }

    /// `|d| / sqrt(p_yy p_ny)`, the normalized interference.
    pub fn off_diagonal_ratio(&self) -> f64 {
        self.d_yy_ny.norm() / (self.p_yy * self.p_ny).sqrt()
    }

    /// Largest entrywise difference between two functionals.
    pub fn max_diff(&self, other: &ComponentDF) -> f64 {
        [
            (self.p_yy - other.p_yy).abs(),
            (self.p_ny - other.p_ny).abs(),
            (self.p_yn - other.p_yn).abs(),
            (self.p_nn - other.p_nn).abs(),
            (self.d_yy_ny - other.d_yy_ny).norm(),
            (self.d_ny_yy - other.d_ny_yy).norm(),
            (self.d_yn_nn - other.d_yn_nn).norm(),
            (self.d_nn_yn - other.d_nn_yn).norm(),
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }

    /// Assemble from the three independent chain quantities:
    /// `a = ⟨k1|P(t)|k1⟩`, `b = ⟨k2|P(t)|k2⟩`, `x = ⟨k2|P(t)|k1⟩`.
    pub(crate) fn from_pair_elements(a: f64, b: f64, x: C64) -> Self {
        let half = 0.5;
        ComponentDF {
            p_yy: half * a,
            p_ny: half * b,
            p_yn: half * (1.0 - a),
            p_nn: half * (1.0 - b),
            d_yy_ny: x * half,
            d_ny_yy: x.conj() * half,
            d_yn_nn: -x * half,
            d_nn_yn: -x.conj() * half,
        }
    }
}

/// `Γ = pt p̄t - (p_yy - p0 pt + Re d)² / (p0 p̄0)`.
pub fn gamma_factor(df: &ComponentDF) -> Result<f64> {
    let p0 = df.p0();
    let q0 = 1.0 - p0;
    if p0 * q0 <= 0.0 {
        return Err(Error::DegenerateMarginal(format!("p0 = {p0}")));
    }
    let pt = df.pt();
    let c = df.p_yy - p0 * pt + df.re_d();
    Ok(pt * (1.0 - pt) - c * c / (p0 * q0))
}

/// The eight traces by dense evolution of a general component.
pub fn component_df_generic(
    rho: &CMatrix,
    h: &CMatrix,
    p: &CMatrix,
    t: f64,
) -> Result<ComponentDF> {
    let dim = rho.nrows();
    require_square("rho", rho, dim)?;
    require_square("H", h, dim)?;
    require_square("P", p, dim)?;
    let residual = projector_residual(p);
    if residual > 1e-8 {
        return Err(Error::NotProjector { residual });
    }
    let tr = trace(rho);
    if (tr - 1.0).norm() > 1e-10 {
        return Err(Error::BadTrace { trace: tr.re });
    }
    if hermiticity_residual(h) > 1e-10 {
        return Err(Error::InvalidArgument("H is not Hermitian".into()));
    }
    if !t.is_finite() {
        return Err(Error::InvalidArgument("t must be finite".into()));
    }

    let u = unitary_evolution(h, t);
    let pbar = identity(dim) - p;
    let p_t = u.adjoint() * p * &u;
    let pbar_t = u.adjoint() * &pbar * &u;
    let d = |at: &CMatrix, a0: &CMatrix, b0: &CMatrix| -> C64 { trace(&(at * a0 * rho * b0)) };

    Ok(ComponentDF {
        p_yy: d(&p_t, p, p).re,
        p_ny: d(&p_t, &pbar, &pbar).re,
        p_yn: d(&pbar_t, p, p).re,
        p_nn: d(&pbar_t, &pbar, &pbar).re,
        d_yy_ny: d(&p_t, p, &pbar),
        d_ny_yy: d(&p_t, &pbar, p),
        d_yn_nn: d(&pbar_t, p, &pbar),
        d_nn_yn: d(&pbar_t, &pbar, p),
    })
}

/// Initial state `(|φ_k1⟩ + |φ_k2⟩)/√2` with `k1` in region 1, `k2` in region 2.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct InitialPair {
    pub k1: usize,
    pub k2: usize,
}

impl InitialPair {
    pub fn new(cfg: &ChainConfig, k1: usize, k2: usize) -> Result<Self> {
        let pair = InitialPair { k1, k2 };
        pair.validate(cfg)?;
        Ok(pair)
    }

    pub fn validate(&self, cfg: &ChainConfig) -> Result<()> {
        let ok = self.k1 >= 1 && self.k1 <= cfg.m1 && self.k2 > cfg.m1 && self.k2 <= cfg.m;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidPair {
                k1: self.k1,
                k2: self.k2,
                m: cfg.m,
                m1: cfg.m1,
            })
        }
    }

    /// Density matrix on the one-down-spin space.
    pub fn density_matrix(&self, m: usize) -> CMatrix {
        let mut psi = nalgebra::DVector::<C64>::zeros(m);
        let amp = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        psi[self.k1 - 1] = amp;
        psi[self.k2 - 1] = amp;
        &psi * psi.adjoint()
    }
}

impl ChainPropagator {
    pub fn component_df(&self, pair: InitialPair) -> Result<ComponentDF> {
        pair.validate(self.config())?;
        let a = self.projector_element_unchecked(pair.k1, pair.k1).re;
        let b = self.projector_element_unchecked(pair.k2, pair.k2).re;
        let x = self.projector_element_unchecked(pair.k2, pair.k1);
        Ok(ComponentDF::from_pair_elements(a, b, x))
    }
}

/// Spin-chain functional built from the regional projector matrix elements.
pub fn component_df_spin_chain(cfg: &ChainConfig, pair: InitialPair) -> Result<ComponentDF> {
    ChainPropagator::new(*cfg)?.component_df(pair)
}
