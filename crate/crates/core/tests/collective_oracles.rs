use decoherence_core::collective::{appendix_a_column, fourier_slice};
use decoherence_core::linalg::{unitary_evolution, CMatrix};
use decoherence_core::verify::random_component;
use decoherence_core::{
    appendix_a_exact, collective_df_gaussian, collective_probabilities, component_df_generic,
    decoherence_ratio, degree_of_decoherence, gaussian_coefficients, smeared_coefficients,
    ChainConfig, ChainPropagator, ComponentDF, ExactDFTable, GaussianCoefficients,
    OccupationHistory, PairRule, C64,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn figure_df() -> ComponentDF {
    let cfg = ChainConfig::new(1000, 500, 1.0, 1000.0).unwrap();
    let pair = PairRule::EndPoints.pair(&cfg).unwrap();
    ChainPropagator::new(cfg)
        .unwrap()
        .component_df(pair)
        .unwrap()
}

fn sample_gc() -> GaussianCoefficients {
    GaussianCoefficients {
        n: 100,
        p0: 0.5,
        pt: 0.4,
        a02_im: 0.0,
        a11: 0.0,
        a12: 0.0,
        a22: 0.0,
        alpha: 0.03,
        beta: 0.002,
        gamma: 0.4,
        nu: 0.05,
    }
}

/// Unsmeared Gaussian functional at exact occupations.
fn unsmeared(gc: &GaussianCoefficients, n1: f64, n2: f64, n1p: f64) -> C64 {
    let nf = gc.n as f64;
    let d = n1 - n1p;
    let s = n1 + n1p - 2.0 * nf * gc.p0;
    let t = n2 - nf * gc.pt;
    C64::new(
        -gc.alpha * d * d - gc.beta * s * s,
        -gc.gamma * d * t - gc.nu * d * s,
    )
    .exp()
}

/// Gaussian smearing of the unsmeared form by brute-force 3D quadrature.
fn smeared_by_quadrature(gc: &GaussianCoefficients, sigma: f64, c1: f64, c2: f64, c1p: f64) -> C64 {
    let h = 0.5;
    let half = (8.0 * sigma / h) as i64;
    let w = |x: f64| (-x * x / (2.0 * sigma * sigma)).exp();
    let mut total = C64::new(0.0, 0.0);
    for i in -half..=half {
        let n1 = c1 + i as f64 * h;
        for j in -half..=half {
            let n1p = c1p + j as f64 * h;
            let outer = w(n1 - c1) * w(n1p - c1p);
            for k in -half..=half {
                let n2 = c2 + k as f64 * h;
                total += unsmeared(gc, n1, n2, n1p) * (outer * w(n2 - c2));
            }
        }
    }
    total
}

#[test]
fn smeared_coefficients_match_quadrature() {
    let gc = sample_gc();
    let sigma = 3.0;
    let sc = smeared_coefficients(&gc, sigma).unwrap();
    let peak = smeared_by_quadrature(&gc, sigma, 50.0, 40.0, 50.0);
    for (c1, c2, c1p) in [
        (52.0, 43.0, 49.0),
        (47.0, 38.5, 51.0),
        (50.0, 44.0, 50.0),
        (55.0, 40.0, 50.0),
    ] {
        let quad = smeared_by_quadrature(&gc, sigma, c1, c2, c1p) / peak;
        let formula = collective_df_gaussian(&sc, 100, 0.5, 0.4, c1, c2, c1p);
        assert!(
            (quad - formula).norm() < 1e-9 * formula.norm().max(1e-3),
            "{quad} vs {formula}"
        );
    }
}

#[test]
fn gaussian_coefficients_double_entry() {
    let df = figure_df();
    let n = 10_000.0;
    let gc = gaussian_coefficients(&df, 10_000).unwrap();
    // complex arithmetic straight from the printed definitions
    let a02 = C64::new(0.0, n * df.d_yy_ny.im);
    let p0 = df.p_yy + df.p_yn;
    let pt = df.p_yy + df.p_ny + df.d_yy_ny.re + df.d_ny_yy.re;
    let a11 = 2.0 * n * p0 * (1.0 - p0);
    let a12 = 2.0 * n * (df.p_yy - p0 * pt + df.d_yy_ny.re);
    let a22 = 2.0 * n * pt * (1.0 - pt);
    let ia02 = C64::new(0.0, 1.0) * a02;
    let alpha = (a11 * a22 - a12 * a12) / (4.0 * a11 * ia02 * ia02);
    let gamma = C64::new(1.0, 0.0) / ia02;
    let nu = a12 / (2.0 * a11 * ia02);
    let rel = |a: f64, b: C64| (C64::new(a, 0.0) - b).norm() / b.norm();
    assert!(rel(gc.alpha, alpha) < 1e-12);
    assert!(rel(gc.beta, C64::new(1.0 / (4.0 * a11), 0.0)) < 1e-12);
    assert!(rel(gc.gamma, gamma) < 1e-12);
    assert!(rel(gc.nu, nu) < 1e-12);
    assert!((gc.a02() - a02).norm() < 1e-9);
}

#[test]
fn smeared_double_entry_and_identities() {
    let df = figure_df();
    let gc = gaussian_coefficients(&df, 10_000).unwrap();
    let sigma = 0.01 * 10_000.0;
    let sc = smeared_coefficients(&gc, sigma).unwrap();
    let s2 = sigma * sigma;
    let u = 1.0 / (1.0 + 4.0 * s2 * gc.beta);
    let b = gc.alpha + 0.5 * s2 * gc.gamma.powi(2) + s2 * gc.nu.powi(2) * u;
    let v = 1.0 / (1.0 + 4.0 * s2 * b);
    let close = |x: f64, y: f64| (x - y).abs() <= 1e-12 * y.abs().max(1e-300);
    assert!(close(sc.b, b));
    assert!(close(sc.ta, b * v));
    assert!(close(sc.tb, gc.beta * u + s2 * gc.nu.powi(2) * v * u * u));
    assert!(close(sc.te, gc.gamma.powi(2) * s2 * v));
    assert!(close(sc.tph, 2.0 * s2 * gc.nu * gc.gamma * v * u));
    assert!(close(sc.tg, gc.gamma * v));
    assert!(close(sc.tn, gc.nu * v * u));
    assert!(close(sc.tg / gc.gamma, 1.0 / (1.0 + 4.0 * s2 * sc.b)));
}

#[test]
fn decoherence_ratio_matches_epsilon() {
    let df = figure_df();
    let (n, f) = (10_000, 0.01);
    let deg = degree_of_decoherence(&df, n, f).unwrap();
    let sc = smeared_coefficients(&gaussian_coefficients(&df, n).unwrap(), deg.sigma).unwrap();
    let eps = deg.epsilon_coefficients.unwrap();
    let one = decoherence_ratio(&sc, 5000.0 + deg.sigma, 5000.0).unwrap();
    assert!((one - eps).abs() < 1e-12);
    let two = decoherence_ratio(&sc, 5000.0 + 2.0 * deg.sigma, 5000.0).unwrap();
    assert!((two.ln() - 4.0 * eps.ln()).abs() < 1e-10 * two.ln().abs());
}

#[test]
fn many_spin_epsilon_is_small() {
    let deg = degree_of_decoherence(&figure_df(), 1_000_000, 1e-3).unwrap();
    assert!(!deg.degenerate);
    assert!(deg.gamma_factor > 0.01 && deg.gamma_factor < 1.0);
    assert!(deg.epsilon < 1e-10, "{deg:?}");
}

#[test]
fn probabilities_peak_at_expected_occupations() {
    let df = figure_df();
    let n = 1000;
    let gc = gaussian_coefficients(&df, n).unwrap();
    let sc = smeared_coefficients(&gc, 5.0).unwrap();
    let n2 = n as f64 * gc.pt;
    let best = (0..=n)
        .max_by(|&a, &b| {
            let pa = collective_probabilities(&sc, n, gc.p0, gc.pt, a as f64, n2);
            let pb = collective_probabilities(&sc, n, gc.p0, gc.pt, b as f64, n2);
            pa.total_cmp(&pb)
        })
        .unwrap();
    assert_eq!(best as f64, (n as f64 * gc.p0).round());
    let peak = collective_probabilities(&sc, n, gc.p0, gc.pt, n as f64 * gc.p0, n2);
    assert!((peak - 1.0).abs() < 1e-15);
}

/// Exact `Σ_{n2} D(n1, n2 | n1)` by Fourier slices.
fn exact_n1_marginal(df: &ComponentDF, n: usize) -> Vec<f64> {
    let mut marginal = vec![0.0; n + 1];
    for n2 in 0..=n {
        let slice = fourier_slice(df, n, n2).unwrap();
        for (n1, m) in marginal.iter_mut().enumerate() {
            *m += slice[n1 * (n + 1) + n1].re;
        }
    }
    marginal
}

#[test]
fn exact_marginal_is_unimodal_and_centred() {
    let df = figure_df();
    for n in [100, 200] {
        let marginal = exact_n1_marginal(&df, n);
        let total: f64 = marginal.iter().sum();
        assert!((total - 1.0).abs() < 1e-10);
        let argmax = (0..=n)
            .max_by(|&a, &b| marginal[a].total_cmp(&marginal[b]))
            .unwrap();
        assert!((argmax as f64 - n as f64 * df.p0()).abs() <= 2.0);
        let rising = marginal[..=argmax].windows(2).all(|w| w[1] >= w[0] - 1e-14);
        let falling = marginal[argmax..].windows(2).all(|w| w[1] <= w[0] + 1e-14);
        assert!(rising && falling, "not unimodal at N = {n}");
    }
}

#[test]
fn exact_diagonal_real_nonnegative() {
    let df = figure_df();
    let table = ExactDFTable::from_fourier(&df, 40).unwrap();
    assert!((table.diagonal_sum() - 1.0).norm() < 1e-10);
    for (n1, _, n1p, z) in table.entries() {
        if n1 == n1p {
            assert!(z.im.abs() < 1e-10 && z.re > -1e-10);
        }
    }
}

#[test]
fn exact_consistency_does_not_survive_collectively() {
    let df = figure_df();
    assert!(df.re_d().abs() < 1e-12 && df.im_d().abs() > 0.05);
    let n = 3;
    let mut largest_real = 0.0_f64;
    for n1 in 0..=n {
        for n2 in 0..=n {
            for n1p in 0..=n {
                if n1 != n1p {
                    let z = appendix_a_exact(&df, OccupationHistory::new(n, n1, n2, n1p).unwrap())
                        .unwrap();
                    largest_real = largest_real.max(z.re.abs());
                }
            }
        }
    }
    assert!(largest_real > 1e-3, "{largest_real}");
}

#[test]
fn column_agrees_with_fourier_at_n200() {
    let df = figure_df();
    let n = 200;
    let slice = fourier_slice(&df, n, 100).unwrap();
    let col = appendix_a_column(&df, n, 100, 99, 500).unwrap();
    for (n1, v) in col
        .iter()
        .enumerate()
        .filter(|(n1, _)| (80..=120).contains(n1))
    {
        let f = slice[n1 * (n + 1) + 99];
        assert!((v.value - f).norm() < 1e-12, "{n1}: {} vs {f}", v.value);
        assert!(v.error_estimate < 1e-9, "{n1}: {}", v.error_estimate);
    }
}

/// `F(λ) = e^{iλ} P + P̄` is unitary, and the trace built from it is the
/// generating function of the component functional, bounded by one.
#[test]
fn generating_function_is_bounded() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..10 {
        let dim = rng.gen_range(2..=4);
        let (rho, h, p) = random_component(&mut rng, dim);
        let t = rng.gen_range(0.1..3.0);
        let df = component_df_generic(&rho, &h, &p, t).unwrap();
        let u = unitary_evolution(&h, t);
        let id = CMatrix::identity(dim, dim);
        let f = |lam: f64| &p * (C64::new(0.0, lam)).exp() + (&id - &p);
        for _ in 0..10 {
            let (a, b, c) = (
                rng.gen_range(-3.2..3.2),
                rng.gen_range(-3.2..3.2),
                rng.gen_range(-3.2..3.2),
            );
            let fa = f(a);
            assert!((&fa * fa.adjoint() - &id).norm() < 1e-12);
            let ft = u.adjoint() * f(c) * &u;
            let direct: C64 = (ft * &fa * &rho * f(b).adjoint()).trace();
            let (ea, eb, ec) = (
                C64::new(0.0, a).exp(),
                C64::new(0.0, -b).exp(),
                C64::new(0.0, c).exp(),
            );
            let expanded = ea * eb * ec * df.p_yy
                + ec * df.p_ny
                + ea * eb * df.p_yn
                + df.p_nn
                + ea * ec * df.d_yy_ny
                + eb * ec * df.d_ny_yy
                + ea * df.d_yn_nn
                + eb * df.d_nn_yn;
            assert!((direct - expanded).norm() < 1e-12);
            assert!(direct.norm() <= 1.0 + 1e-12);
        }
    }
}
