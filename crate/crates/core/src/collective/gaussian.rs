//! Large-`N` Gaussian form of the collective functional, its smeared
//! (coarse-grained) version and the resulting degree of decoherence.

use serde::Serialize;

use crate::component::{gamma_factor, ComponentDF};
use crate::error::{Error, Result};
use crate::linalg::{C64, I};

/// Below this `|Im d|` the Gaussian channel is treated as degenerate.
const IM_D_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GaussianCoefficients {
    pub n: usize,
    pub p0: f64,
    pub pt: f64,
    /// Imaginary part of the purely imaginary `A02`.
    pub a02_im: f64,
    pub a11: f64,
    pub a12: f64,
    pub a22: f64,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub nu: f64,
}

impl GaussianCoefficients {
    pub fn a02(&self) -> C64 {
        I * self.a02_im
    }
}

pub fn gaussian_coefficients(df: &ComponentDF, n: usize) -> Result<GaussianCoefficients> {
    if n == 0 {
        return Err(Error::InvalidArgument("N must be at least 1".into()));
    }
    let nf = n as f64;
    let p0 = df.p0();
    let pt = df.pt();
    if p0 * (1.0 - p0) <= 0.0 {
        return Err(Error::DegenerateMarginal(format!("p0 = {p0}")));
    }
    if pt * (1.0 - pt) <= 0.0 {
        return Err(Error::DegenerateMarginal(format!("pt = {pt}")));
    }
    if df.im_d().abs() < IM_D_FLOOR {
        return Err(Error::GaussianDegenerate);
    }
    let a02_im = nf * df.im_d();
    let a11 = 2.0 * nf * p0 * (1.0 - p0);
    let a12 = 2.0 * nf * (df.p_yy - p0 * pt + df.re_d());
    let a22 = 2.0 * nf * pt * (1.0 - pt);
    // i·A02 = -a02_im is real
    let i_a02 = -a02_im;
    Ok(GaussianCoefficients {
        n,
        p0,
        pt,
        a02_im,
        a11,
        a12,
        a22,
        alpha: (a11 * a22 - a12 * a12) / (4.0 * a11 * i_a02 * i_a02),
        beta: 1.0 / (4.0 * a11),
        gamma: 1.0 / i_a02,
        nu: a12 / (2.0 * a11 * i_a02),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SmearedCoefficients {
    pub sigma: f64,
    pub b: f64,
    pub ta: f64,
    pub tb: f64,
    pub te: f64,
    pub tph: f64,
    pub tg: f64,
    pub tn: f64,
}

pub fn smeared_coefficients(gc: &GaussianCoefficients, sigma: f64) -> Result<SmearedCoefficients> {
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "sigma = {sigma} must be positive"
        )));
    }
    let s2 = sigma * sigma;
    let GaussianCoefficients {
        alpha,
        beta,
        gamma,
        nu,
        ..
    } = *gc;
    let db = 1.0 + 4.0 * s2 * beta;
    let b = alpha + gamma * gamma * s2 / 2.0 + nu * nu * s2 / db;
    let dbb = 1.0 + 4.0 * s2 * b;
    Ok(SmearedCoefficients {
        sigma,
        b,
        ta: b / dbb,
        tb: beta / db + s2 * nu * nu / (dbb * db * db),
        te: gamma * gamma * s2 / dbb,
        tph: 2.0 * s2 * nu * gamma / (dbb * db),
        tg: gamma / dbb,
        tn: nu / (dbb * db),
    })
}

/// Smeared functional relative to its peak; arguments are coarse
/// occupations.
pub fn collective_df_gaussian(
    sc: &SmearedCoefficients,
    n: usize,
    p0: f64,
    pt: f64,
    n1: f64,
    n2: f64,
    n1p: f64,
) -> C64 {
    let nf = n as f64;
    let d = n1 - n1p;
    let s = n1 + n1p - 2.0 * nf * p0;
    let t = n2 - nf * pt;
    let re = -sc.ta * d * d - sc.tb * s * s - sc.te * t * t - sc.tph * t * s;
    let im = -sc.tg * d * t - sc.tn * d * s;
    C64::new(re, im).exp()
}

/// `|D| / sqrt(p p')` at separation `n1 - n1p`.
pub fn decoherence_ratio(sc: &SmearedCoefficients, n1: f64, n1p: f64) -> Result<f64> {
    let gap = sc.ta - sc.tb;
    if gap <= 0.0 {
        return Err(Error::NoSuppression(gap));
    }
    Ok((-gap * (n1 - n1p).powi(2)).exp())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecoherenceDegree {
    pub n: usize,
    pub f: f64,
    pub sigma: f64,
    pub gamma_factor: f64,
    /// `exp(-N Γ f² / (Im d)²)`.
    pub epsilon: f64,
    /// Exponent of `epsilon`, still informative once `epsilon` underflows.
    pub ln_epsilon: f64,
    /// `exp(-(α̃ - β̃) σ²)` from the full smeared coefficients, when defined.
    pub epsilon_coefficients: Option<f64>,
    /// `Im d = 0`: reported as perfect decoherence.
    pub degenerate: bool,
}

pub fn degree_of_decoherence(df: &ComponentDF, n: usize, f: f64) -> Result<DecoherenceDegree> {
    if n == 0 || !(f > 0.0 && f.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "need N ≥ 1 and f > 0, got N = {n}, f = {f}"
        )));
    }
    let gamma = gamma_factor(df)?;
    let sigma = f * n as f64;
    let im = df.im_d();
    if im.abs() < IM_D_FLOOR {
        return Ok(DecoherenceDegree {
            n,
            f,
            sigma,
            gamma_factor: gamma,
            epsilon: 0.0,
            ln_epsilon: f64::NEG_INFINITY,
            epsilon_coefficients: None,
            degenerate: true,
        });
    }
    let ln_epsilon = -(n as f64) * gamma * f * f / (im * im);
    let epsilon_coefficients = gaussian_coefficients(df, n)
        .and_then(|gc| smeared_coefficients(&gc, sigma))
        .ok()
        .map(|sc| (-(sc.ta - sc.tb) * sigma * sigma).exp());
    Ok(DecoherenceDegree {
        n,
        f,
        sigma,
        gamma_factor: gamma,
        epsilon: ln_epsilon.exp(),
        ln_epsilon,
        epsilon_coefficients,
        degenerate: false,
    })
}

/// Diagonal of the smeared functional relative to its peak.
pub fn collective_probabilities(
    sc: &SmearedCoefficients,
    n: usize,
    p0: f64,
    pt: f64,
    n1: f64,
    n2: f64,
) -> f64 {
    let nf = n as f64;
    let x = n1 - nf * p0;
    let y = n2 - nf * pt;
    (-4.0 * sc.tb * x * x - sc.te * y * y - 2.0 * sc.tph * y * x).exp()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn df() -> ComponentDF {
        ComponentDF::from_pair_elements(0.55, 0.48, C64::new(0.02, 0.09))
    }

    #[test]
    fn coefficients_scale_with_n() {
        let a = gaussian_coefficients(&df(), 100).unwrap();
        let b = gaussian_coefficients(&df(), 200).unwrap();
        for (x, y) in [
            (a.a02_im, b.a02_im),
            (a.a11, b.a11),
            (a.a12, b.a12),
            (a.a22, b.a22),
        ] {
            assert!((2.0 * x - y).abs() < 1e-12 * y.abs());
        }
    }

    #[test]
    fn zero_a12_gives_zero_nu() {
        // p_yy = p0 pt and Re d = 0: a = 0.5, b = 0.5, so p_yy = 0.25, p0 = pt = 0.5
        let d = ComponentDF::from_pair_elements(0.5, 0.5, C64::new(0.0, 0.1));
        let gc = gaussian_coefficients(&d, 50).unwrap();
        assert_eq!(gc.a12, 0.0);
        assert_eq!(gc.nu, 0.0);
    }

    #[test]
    fn degenerate_inputs() {
        let flat = ComponentDF::from_pair_elements(0.5, 0.5, C64::new(0.1, 0.0));
        assert_eq!(
            gaussian_coefficients(&flat, 10),
            Err(Error::GaussianDegenerate)
        );
        let deg = degree_of_decoherence(&flat, 10, 0.1).unwrap();
        assert!(deg.degenerate && deg.epsilon == 0.0);
    }

    #[test]
    fn small_sigma_limits() {
        let gc = gaussian_coefficients(&df(), 1000).unwrap();
        let sc = smeared_coefficients(&gc, 1e-8).unwrap();
        assert!((sc.ta / gc.alpha - 1.0).abs() < 1e-6);
        assert!((sc.tb / gc.beta - 1.0).abs() < 1e-6);
        assert!(sc.te.abs() < 1e-6);
        assert!((sc.tg / gc.gamma - 1.0).abs() < 1e-6);
        assert!(smeared_coefficients(&gc, 0.0).is_err());
    }

    #[test]
    fn peak_values() {
        let gc = gaussian_coefficients(&df(), 400).unwrap();
        let sc = smeared_coefficients(&gc, 4.0).unwrap();
        let (p0, pt) = (gc.p0, gc.pt);
        let peak = collective_df_gaussian(&sc, 400, p0, pt, 400.0 * p0, 400.0 * pt, 400.0 * p0);
        assert!((peak - 1.0).norm() < 1e-15);
        let diag = collective_df_gaussian(&sc, 400, p0, pt, 190.0, 170.0, 190.0);
        assert!(diag.im == 0.0 && diag.re > 0.0);
        assert!(
            (collective_probabilities(&sc, 400, p0, pt, 400.0 * p0, 400.0 * pt) - 1.0).abs()
                < 1e-15
        );
        assert_eq!(decoherence_ratio(&sc, 7.0, 7.0).unwrap(), 1.0);
    }
}
