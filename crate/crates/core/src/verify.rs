//! Oracle and invariant suites, runnable from the command line.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::collective::{
    appendix_a_exact, degree_of_decoherence, fourier_slice, ExactDFTable, OccupationHistory,
    TensorOracle,
};
use crate::component::{component_df_generic, ComponentDF, InitialPair};
use crate::conservation::{
    amplitude_suppression_check, boundary_locality, flux_balance_check, global_charge_diagonality,
    Dynamics, RegionalCharge,
};
use crate::error::Result;
use crate::linalg::{max_abs, real_to_complex, CMatrix, C64};
use crate::spectral::{
    dense_oracle, hopping_matrix, projector_element_spectral, ChainConfig, ChainPropagator,
};
use crate::spin_space::tiny_hilbert_oracle;
use crate::sweep::{m1_sweep, sweep_row_direct, PairRule};

#[derive(Debug, Clone, Serialize)]
pub struct SuiteResult {
    pub name: &'static str,
    pub passed: bool,
    /// Worst measured residual.
    pub worst: f64,
    pub tolerance: f64,
    pub detail: String,
}

impl SuiteResult {
    fn from_residual(name: &'static str, worst: f64, tolerance: f64, detail: String) -> Self {
        SuiteResult {
            name,
            passed: worst.is_finite() && worst <= tolerance,
            worst,
            tolerance,
            detail,
        }
    }

    fn from_error(name: &'static str, err: crate::Error) -> Self {
        SuiteResult {
            name,
            passed: false,
            worst: f64::NAN,
            tolerance: 0.0,
            detail: err.to_string(),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct VerifyOptions {
    pub oracle_cap: usize,
    pub quad_steps: usize,
    pub seed: u64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            oracle_cap: crate::spectral::DEFAULT_ORACLE_CAP,
            quad_steps: 2000,
            seed: 2024,
        }
    }
}

/// Random chain with `m ≤ max_m` and a valid pair.
pub fn random_chain(rng: &mut impl Rng, max_m: usize) -> (ChainConfig, InitialPair) {
    let m = rng.gen_range(2..=max_m.max(2));
    let m1 = rng.gen_range(1..m);
    let chi = rng.gen_range(0.1..2.0);
    let t = rng.gen_range(0.0..50.0);
    let cfg = ChainConfig { m, m1, chi, t };
    let pair = InitialPair {
        k1: rng.gen_range(1..=m1),
        k2: rng.gen_range(m1 + 1..=m),
    };
    (cfg, pair)
}

fn random_matrix(rng: &mut impl Rng, dim: usize) -> CMatrix {
    CMatrix::from_fn(dim, dim, |_, _| {
        C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
    })
}

/// Random density matrix, Hermitian Hamiltonian and projector of rank
/// `1..dim`.
pub fn random_component(rng: &mut impl Rng, dim: usize) -> (CMatrix, CMatrix, CMatrix) {
    let a = random_matrix(rng, dim);
    let h = (&a + a.adjoint()) * C64::new(0.5, 0.0);
    let b = random_matrix(rng, dim);
    let mut rho = &b * b.adjoint();
    let tr: C64 = rho.diagonal().iter().sum();
    rho /= tr;
    let rank = rng.gen_range(1..dim.max(2));
    let q = random_matrix(rng, dim).qr().q();
    let cols = q.columns(0, rank);
    let p = cols * cols.adjoint();
    (rho, h, p)
}

fn sum_rules(rng: &mut ChaCha8Rng) -> SuiteResult {
    let mut worst = 0.0_f64;
    for _ in 0..100 {
        let (cfg, pair) = random_chain(rng, 64);
        match ChainPropagator::new(cfg).and_then(|p| p.component_df(pair)) {
            Ok(df) => worst = worst.max(df.sum_rule_residual()),
            Err(e) => return SuiteResult::from_error("sum_rules", e),
        }
    }
    SuiteResult::from_residual("sum_rules", worst, 1e-12, "100 random chains".into())
}

fn spectral_vs_dense(rng: &mut ChaCha8Rng, cap: usize) -> SuiteResult {
    let mut worst = 0.0_f64;
    let sizes: Vec<usize> = [4, 8, 16, 64].into_iter().filter(|&m| m <= cap).collect();
    for &m in &sizes {
        for _ in 0..5 {
            let cfg = ChainConfig {
                m,
                m1: rng.gen_range(1..=m),
                chi: rng.gen_range(0.1..2.0),
                t: rng.gen_range(0.0..20.0),
            };
            let run = || -> Result<f64> {
                let dense = dense_oracle(&cfg, cap)?;
                let fast = ChainPropagator::new(cfg)?.projector_matrix();
                Ok(max_abs(&(dense - fast)))
            };
            match run() {
                Ok(r) => worst = worst.max(r),
                Err(e) => return SuiteResult::from_error("spectral_vs_dense", e),
            }
        }
    }
    SuiteResult::from_residual("spectral_vs_dense", worst, 1e-10, format!("M in {sizes:?}"))
}

fn spectral_double_sum(rng: &mut ChaCha8Rng) -> SuiteResult {
    let mut worst = 0.0_f64;
    for _ in 0..10 {
        let (cfg, _) = random_chain(rng, 24);
        let prop = ChainPropagator::new(cfg).expect("valid random chain");
        for _ in 0..5 {
            let (n, np) = (rng.gen_range(1..=cfg.m), rng.gen_range(1..=cfg.m));
            let a = prop.projector_element(n, np).expect("sites in range");
            let b = projector_element_spectral(&cfg, n, np).expect("sites in range");
            worst = worst.max((a - b).norm());
        }
    }
    SuiteResult::from_residual(
        "spectral_double_sum",
        worst,
        1e-10,
        "50 random elements".into(),
    )
}

fn tiny_hilbert() -> SuiteResult {
    let mut worst = 0.0_f64;
    for m in [4, 6, 8] {
        match tiny_hilbert_oracle(m, 1.0, 0.7) {
            Ok(r) => worst = worst.max(r.max_residual()),
            Err(e) => return SuiteResult::from_error("tiny_hilbert", e),
        }
    }
    SuiteResult::from_residual("tiny_hilbert", worst, 1e-10, "m in [4, 6, 8]".into())
}

fn generic_vs_chain(rng: &mut ChaCha8Rng, cap: usize) -> SuiteResult {
    let mut worst = 0.0_f64;
    for _ in 0..10 {
        let (cfg, pair) = random_chain(rng, cap.min(32));
        let run = || -> Result<f64> {
            let chain = ChainPropagator::new(cfg)?.component_df(pair)?;
            let h = real_to_complex(&hopping_matrix(&cfg));
            let p = CMatrix::from_fn(cfg.m, cfg.m, |r, c| {
                if r == c && r < cfg.m1 {
                    C64::new(1.0, 0.0)
                } else {
                    C64::new(0.0, 0.0)
                }
            });
            let generic = component_df_generic(&pair.density_matrix(cfg.m), &h, &p, cfg.t)?;
            Ok(chain.max_diff(&generic))
        };
        match run() {
            Ok(r) => worst = worst.max(r),
            Err(e) => return SuiteResult::from_error("generic_vs_chain", e),
        }
    }
    SuiteResult::from_residual("generic_vs_chain", worst, 1e-10, "10 random chains".into())
}

/// Worst gap between the tensor oracle and the exact sum over every history.
pub fn tensor_vs_exact(rng: &mut impl Rng, n: usize, dim: usize, cap: usize) -> Result<f64> {
    let (rho, h, p) = random_component(rng, dim);
    let t = rng.gen_range(0.1..3.0);
    let df = component_df_generic(&rho, &h, &p, t)?;
    let oracle = TensorOracle::new(&rho, &h, &p, t, n, cap)?;
    let mut worst = 0.0_f64;
    for n1 in 0..=n {
        for n2 in 0..=n {
            for n1p in 0..=n {
                let hist = OccupationHistory::new(n, n1, n2, n1p)?;
                worst = worst.max((oracle.value(hist)? - appendix_a_exact(&df, hist)?).norm());
            }
        }
    }
    Ok(worst)
}

fn tensor_chain(rng: &mut ChaCha8Rng, cap: usize) -> SuiteResult {
    let mut worst = 0.0_f64;
    for n in 1..=3 {
        for dim in [2, 4] {
            for _ in 0..3 {
                match tensor_vs_exact(rng, n, dim, cap.max(64)) {
                    Ok(r) => worst = worst.max(r),
                    Err(e) => return SuiteResult::from_error("tensor_chain", e),
                }
            }
        }
    }
    SuiteResult::from_residual(
        "tensor_chain",
        worst,
        1e-10,
        "N in 1..=3, dims 2 and 4".into(),
    )
}

fn spin_chain_df(m: usize, m1: usize, t: f64, pair: PairRule) -> Result<ComponentDF> {
    let cfg = ChainConfig::new(m, m1, 1.0, t)?;
    ChainPropagator::new(cfg)?.component_df(pair.pair(&cfg)?)
}

fn exact_routes() -> SuiteResult {
    let run = || -> Result<f64> {
        let df = spin_chain_df(40, 17, 9.0, PairRule::EndPoints)?;
        let n = 14;
        let table = ExactDFTable::from_fourier(&df, n)?;
        let mut worst = (table.diagonal_sum() - 1.0).norm();
        let slice = fourier_slice(&df, n, 6)?;
        for n1 in 0..=n {
            for n1p in [0, 5, 9] {
                let a = appendix_a_exact(&df, OccupationHistory::new(n, n1, 6, n1p)?)?;
                worst = worst.max((a - slice[n1 * (n + 1) + n1p]).norm());
            }
        }
        Ok(worst)
    };
    match run() {
        Ok(r) => SuiteResult::from_residual(
            "exact_routes",
            r,
            1e-10,
            "Fourier vs multi-binomial, N = 14".into(),
        ),
        Err(e) => SuiteResult::from_error("exact_routes", e),
    }
}

fn sweep_consistency() -> SuiteResult {
    let run = || -> Result<f64> {
        let mut worst = 0.0_f64;
        for rule in [PairRule::EndPoints, PairRule::Centered] {
            let rows = m1_sweep(200, 1.0, 150.0, rule)?;
            for row in rows.iter().step_by(13) {
                let cfg = ChainConfig::new(200, row.m1, 1.0, 150.0)?;
                worst = worst.max(sweep_row_direct(&cfg, rule)?.df.max_diff(&row.df));
            }
        }
        Ok(worst)
    };
    match run() {
        Ok(r) => SuiteResult::from_residual(
            "sweep_consistency",
            r,
            1e-10,
            "prefix sums vs direct, M = 200".into(),
        ),
        Err(e) => SuiteResult::from_error("sweep_consistency", e),
    }
}

fn epsilon_scaling() -> SuiteResult {
    let run = || -> Result<f64> {
        let df = spin_chain_df(200, 100, 200.0, PairRule::EndPoints)?;
        let e = |n, f| degree_of_decoherence(&df, n, f).map(|d| d.ln_epsilon);
        let a = (e(2000, 0.01)? - 2.0 * e(1000, 0.01)?).abs() / e(2000, 0.01)?.abs();
        let b = (e(1000, 0.02)? - 4.0 * e(1000, 0.01)?).abs() / e(1000, 0.02)?.abs();
        Ok(a.max(b))
    };
    match run() {
        Ok(r) => SuiteResult::from_residual(
            "epsilon_scaling",
            r,
            1e-10,
            "log-space N and f scaling".into(),
        ),
        Err(e) => SuiteResult::from_error("epsilon_scaling", e),
    }
}

fn conservation(steps: usize) -> SuiteResult {
    let run = || -> Result<(f64, String)> {
        let d = Dynamics::new(6, 1.0)?;
        let q = RegionalCharge::new(6, &[1, 2, 3])?;
        let flux = flux_balance_check(&d, &q, 0.5, steps)?;
        let local = boundary_locality(&d, &q);
        let diag = global_charge_diagonality(6, 1.0, 0.9, 11)?;
        let mut bra = nalgebra::DVector::from_element(64, C64::new(0.0, 0.0));
        let mut ket = bra.clone();
        bra[1 << 1] = C64::new(1.0, 0.0);
        ket[1 << 4] = C64::new(1.0, 0.0);
        let amp = amplitude_suppression_check(&d, &q, 0.5, &bra, &ket, 0, 1, steps)?;
        // residuals normalised to their tolerances
        let worst = (flux.residual / 1e-6)
            .max(local.off_support / 1e-12)
            .max(diag / 1e-12)
            .max(amp.gap() / 1e-6)
            .max(if flux.order >= 1.9 { 0.0 } else { 2.0 });
        let detail =
            format!(
            "flux {:.2e} (order {:.2}), off-support {:.1e}, global {:.1e}, amplitude gap {:.1e}",
            flux.residual, flux.order, local.off_support, diag, amp.gap()
        );
        Ok((worst, detail))
    };
    match run() {
        Ok((w, detail)) => SuiteResult::from_residual("conservation", w, 1.0, detail),
        Err(e) => SuiteResult::from_error("conservation", e),
    }
}

/// Every suite, in a fixed order.
pub fn run_all(opts: VerifyOptions) -> Vec<SuiteResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    vec![
        sum_rules(&mut rng),
        spectral_vs_dense(&mut rng, opts.oracle_cap),
        spectral_double_sum(&mut rng),
        tiny_hilbert(),
        generic_vs_chain(&mut rng, opts.oracle_cap),
        tensor_chain(&mut rng, 4096),
        exact_routes(),
        sweep_consistency(),
        epsilon_scaling(),
        conservation(opts.quad_steps),
    ]
}
