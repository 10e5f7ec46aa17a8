//! Sweep of the region size `M1` at fixed chain and time.
//!
//! With the propagator column fixed, every matrix element needed for one
//! row is a window sum over `k = 1..=M1`. Writing `j = k - k1` turns the
//! window sums into differences of prefix sums over `j ∈ [1-M, M-1]`, one
//! table for `|g(j)|²` and one per distinct separation `k2 - k1`.

use std::collections::HashMap;
use std::ops::RangeInclusive;

use serde::{Deserialize, Serialize};

use crate::component::{gamma_factor, ComponentDF, InitialPair};
use crate::error::{Error, Result};
use crate::linalg::C64;
use crate::spectral::{propagator_column, ChainConfig, ChainPropagator, PropagatorKernel};

/// How the initial pair is placed for each `M1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum PairRule {
    /// `k1 = 1`, `k2 = M`: the same initial state for every `M1`.
    #[default]
    EndPoints,
    /// `k1 = ⌈M1/2⌉`, `k2 = M1 + ⌈(M-M1)/2⌉`.
    Centered,
    Fixed {
        k1: usize,
        k2: usize,
    },
}

impl PairRule {
    pub fn pair(&self, cfg: &ChainConfig) -> Result<InitialPair> {
        let (m, m1) = (cfg.m, cfg.m1);
        let (k1, k2) = match *self {
            PairRule::EndPoints => (1, m),
            PairRule::Centered => (m1.div_ceil(2), m1 + (m - m1).div_ceil(2)),
            PairRule::Fixed { k1, k2 } => (k1, k2),
        };
        InitialPair::new(cfg, k1, k2)
    }

    /// Region sizes for which this rule yields a valid pair.
    pub fn valid_m1(&self, m: usize) -> RangeInclusive<usize> {
        match *self {
            PairRule::Fixed { k1, k2 } => k1.max(1)..=k2.saturating_sub(1).min(m - 1),
            _ => 1..=m - 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepRow {
    pub m1: usize,
    pub pair: InitialPair,
    pub df: ComponentDF,
    /// `|d| / sqrt(p_yy p_ny)`.
    pub ratio: f64,
    /// `|Im d|² / Γ`; NaN when Γ is undefined.
    pub fig3: f64,
}

impl SweepRow {
    pub fn from_df(m1: usize, pair: InitialPair, df: ComponentDF) -> Self {
        let fig3 = match gamma_factor(&df) {
            Ok(g) => df.im_d().powi(2) / g,
            Err(_) => f64::NAN,
        };
        SweepRow {
            m1,
            pair,
            df,
            ratio: df.off_diagonal_ratio(),
            fig3,
        }
    }
}

/// Prefix sums of `f(j)` over `j ∈ [1-M, M-1]`; `at(j)` is `Σ_{i ≤ j} f(i)`.
struct Prefix {
    m: isize,
    sums: Vec<C64>,
}

impl Prefix {
    fn new(m: usize, f: impl Fn(isize) -> C64) -> Self {
        let m = m as isize;
        let mut sums = Vec::with_capacity((2 * m) as usize);
        let mut acc = C64::new(0.0, 0.0);
        sums.push(acc);
        for j in (1 - m)..m {
            acc += f(j);
            sums.push(acc);
        }
        Prefix { m, sums }
    }

    /// `Σ_{j=lo}^{hi} f(j)`.
    fn window(&self, lo: isize, hi: isize) -> C64 {
        let idx = |j: isize| (j + self.m) as usize;
        self.sums[idx(hi)] - self.sums[idx(lo - 1)]
    }
}

struct SweepKernel<'a> {
    m: usize,
    kernel: &'a PropagatorKernel,
    diag: Prefix,
    cross: HashMap<isize, Prefix>,
}

impl<'a> SweepKernel<'a> {
    fn new(m: usize, kernel: &'a PropagatorKernel) -> Self {
        let diag = Prefix::new(m, |j| C64::new(kernel.amplitude(j).norm_sqr(), 0.0));
        SweepKernel {
            m,
            kernel,
            diag,
            cross: HashMap::new(),
        }
    }

    fn row(&mut self, m1: usize, pair: InitialPair) -> ComponentDF {
        let (k1, k2, m1) = (pair.k1 as isize, pair.k2 as isize, m1 as isize);
        let a = self.diag.window(1 - k1, m1 - k1).re;
        let b = self.diag.window(1 - k2, m1 - k2).re;
        let delta = k2 - k1;
        let (m, kernel) = (self.m, self.kernel);
        let cross = self.cross.entry(delta).or_insert_with(|| {
            Prefix::new(m, |j| {
                kernel.amplitude(j - delta).conj() * kernel.amplitude(j)
            })
        });
        let x = cross.window(1 - k1, m1 - k1);
        ComponentDF::from_pair_elements(a, b, x)
    }
}

/// Rows for `M1 = 1..M-1`.
pub fn m1_sweep(m: usize, chi: f64, t: f64, rule: PairRule) -> Result<Vec<SweepRow>> {
    if m < 2 {
        return Err(Error::InvalidConfig(format!("M = {m} < 2")));
    }
    m1_sweep_range(m, chi, t, rule, 1..=m - 1)
}

/// Rows for the given `M1` values, all sharing one propagator column.
pub fn m1_sweep_range(
    m: usize,
    chi: f64,
    t: f64,
    rule: PairRule,
    m1s: RangeInclusive<usize>,
) -> Result<Vec<SweepRow>> {
    let base = ChainConfig::new(m, 1, chi, t)?;
    let kernel = propagator_column(&base);
    let mut sk = SweepKernel::new(m, &kernel);
    let mut rows = Vec::with_capacity(m1s.clone().count());
    for m1 in m1s {
        let cfg = base.with_m1(m1)?;
        let pair = rule.pair(&cfg)?;
        rows.push(SweepRow::from_df(m1, pair, sk.row(m1, pair)));
    }
    Ok(rows)
}

/// One row computed from scratch, without prefix sums.
pub fn sweep_row_direct(cfg: &ChainConfig, rule: PairRule) -> Result<SweepRow> {
    let pair = rule.pair(cfg)?;
    let df = ChainPropagator::new(*cfg)?.component_df(pair)?;
    Ok(SweepRow::from_df(cfg.m1, pair, df))
}
