//! Exact `N`-component functional from the component functional.
//!
//! Each component independently takes one of eight labelled paths
//! `(a0, at, b0)`; the functional counts paths with `n1` ket-side `y` at 0,
//! `n2` `y` at `t` and `n1p` bra-side `y` at 0. Grouping by `at` and `b0`
//! gives the multi-binomial sum
//!
//! ```text
//! C(N,n2) Σ_k C(N-n2,k) C(n2,j) Σ_{ℓ+m+r+s=n1}
//!     C(k,ℓ) yn^ℓ c4^{k-ℓ} · C(K,m) c3^m nn^{K-m}
//!   · C(j,r) yy^r c2^{j-r} · C(J,s) c1^s ny^{J-s}
//! ```
//!
//! with `j = n1p - k`, `K = N - n2 - k`, `J = n2 - j` and
//! `c1..c4 = D(yy|ny), D(ny|yy), D(yn|nn), D(nn|yn)`.
//!
//! The terms alternate in phase and their absolute sum exceeds the result
//! by roughly `(1 + 4|d|)^N`, so the sum is carried in double-double
//! arithmetic. [`fourier_slice`] evaluates the same quantity as an exact
//! discrete Fourier inversion of `(A + B)^N`-type generating functions in
//! which no cancellation beyond unit scale occurs.

use std::f64::consts::PI;

use rustfft::FftPlanner;
use serde::Serialize;

use crate::collective::occupation::OccupationHistory;
use crate::component::ComponentDF;
use crate::dd::{power_table, BinomialTable, CDd};
use crate::error::{Error, Result};
use crate::linalg::{C64, I};

/// Default largest `N` for the multi-binomial sum.
pub const DEFAULT_EXACT_CAP: usize = 500;

/// Relative precision of a double-double accumulation.
const DD_EPS: f64 = 1e-30;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct A13Value {
    pub value: C64,
    /// Sum of term magnitudes.
    pub abs_sum: f64,
    /// Bound on the accumulated rounding error.
    pub error_estimate: f64,
}

/// Coefficient rows of the four binomial factors, in double-double and in
/// magnitude.
struct Factors {
    n: usize,
    bin: BinomialTable,
    // powers of the eight entries, index = exponent
    pow: [Vec<CDd>; 8],
    abs_pow: [Vec<f64>; 8],
}

const YY: usize = 0;
const NY: usize = 1;
const YN: usize = 2;
const NN: usize = 3;
const C1: usize = 4;
const C2: usize = 5;
const C3: usize = 6;
const C4: usize = 7;

impl Factors {
    fn new(df: &ComponentDF, n: usize) -> Self {
        let bases = [
            C64::new(df.p_yy, 0.0),
            C64::new(df.p_ny, 0.0),
            C64::new(df.p_yn, 0.0),
            C64::new(df.p_nn, 0.0),
            df.d_yy_ny,
            df.d_ny_yy,
            df.d_yn_nn,
            df.d_nn_yn,
        ];
        let pow = bases.map(|b| power_table(b, n));
        let abs_pow = bases.map(|b| {
            let a = b.norm();
            (0..=n)
                .map(|e| if e == 0 { 1.0 } else { a.powi(e as i32) })
                .collect()
        });
        Factors {
            n,
            bin: BinomialTable::new(n),
            pow,
            abs_pow,
        }
    }

    /// `C(deg, i) x^i z^{deg-i}` for `i = 0..=deg`.
    fn binomial_row(&self, deg: usize, x: usize, z: usize) -> (Vec<CDd>, Vec<f64>) {
        let row = self.bin.row(deg);
        let exact = (0..=deg)
            .map(|i| (self.pow[x][i] * self.pow[z][deg - i]).scale(row[i]))
            .collect();
        let abs = (0..=deg)
            .map(|i| row[i].to_f64() * self.abs_pow[x][i] * self.abs_pow[z][deg - i])
            .collect();
        (exact, abs)
    }
}

fn convolve(a: &[CDd], b: &[CDd]) -> Vec<CDd> {
    let mut out = vec![CDd::ZERO; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

fn convolve_abs(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

fn check(df: &ComponentDF, n: usize, n2: usize, n1p: usize, cap: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidArgument("N must be at least 1".into()));
    }
    if n > cap {
        return Err(Error::CapExceeded { size: n, cap });
    }
    for value in [n2, n1p] {
        if value > n {
            return Err(Error::OccupationOutOfRange { value, n });
        }
    }
    let finite = [df.p_yy, df.p_ny, df.p_yn, df.p_nn]
        .iter()
        .all(|x| x.is_finite())
        && [df.d_yy_ny, df.d_ny_yy, df.d_yn_nn, df.d_nn_yn]
            .iter()
            .all(|z| z.is_finite());
    if !finite {
        return Err(Error::InvalidArgument(
            "component functional is not finite".into(),
        ));
    }
    Ok(())
}

/// Left and right polynomials in the `n1` counting variable for one `k`,
/// already weighted by `C(N-n2,k) C(n2,j)`.
struct KTerm {
    left: Vec<CDd>,
    left_abs: Vec<f64>,
    right: Vec<CDd>,
    right_abs: Vec<f64>,
}

fn k_terms(f: &Factors, n2: usize, n1p: usize) -> Vec<KTerm> {
    let n = f.n;
    let k_lo = n1p.saturating_sub(n2);
    let k_hi = n1p.min(n - n2);
    let mut out = Vec::new();
    for k in k_lo..=k_hi {
        let j = n1p - k;
        let big_k = n - n2 - k;
        let big_j = n2 - j;
        let (a, a_abs) = f.binomial_row(k, YN, C4);
        let (b, b_abs) = f.binomial_row(big_k, C3, NN);
        let (c, c_abs) = f.binomial_row(j, YY, C2);
        let (e, e_abs) = f.binomial_row(big_j, C1, NY);
        let weight = f.bin.get(n - n2, k) * f.bin.get(n2, j);
        let w_abs = weight.to_f64();
        let left: Vec<CDd> = convolve(&a, &b)
            .into_iter()
            .map(|z| z.scale(weight))
            .collect();
        let left_abs = convolve_abs(&a_abs, &b_abs)
            .into_iter()
            .map(|x| x * w_abs)
            .collect();
        out.push(KTerm {
            left,
            left_abs,
            right: convolve(&c, &e),
            right_abs: convolve_abs(&c_abs, &e_abs),
        });
    }
    out
}

fn finish(f: &Factors, n2: usize, value: CDd, abs_sum: f64) -> A13Value {
    let lead = f.bin.get(f.n, n2);
    let value = value.scale(lead).to_c64();
    let abs_sum = abs_sum * lead.to_f64();
    A13Value {
        value,
        abs_sum,
        error_estimate: abs_sum * DD_EPS + value.norm() * f64::EPSILON,
    }
}

/// One entry of the exact functional, with its rounding budget.
pub fn appendix_a_detailed(
    df: &ComponentDF,
    history: OccupationHistory,
    cap: usize,
) -> Result<A13Value> {
    let OccupationHistory { n, n1, n2, n1p } = history;
    check(df, n, n2, n1p, cap)?;
    if n1 > n {
        return Err(Error::OccupationOutOfRange { value: n1, n });
    }
    let f = Factors::new(df, n);
    let mut acc = CDd::ZERO;
    let mut abs_sum = 0.0;
    for term in k_terms(&f, n2, n1p) {
        // u + v = n1 with u indexing left, v indexing right
        for (u, (&l, &la)) in term.left.iter().zip(&term.left_abs).enumerate() {
            if u > n1 {
                break;
            }
            let v = n1 - u;
            if v < term.right.len() {
                acc += l * term.right[v];
                abs_sum += la * term.right_abs[v];
            }
        }
    }
    Ok(finish(&f, n2, acc, abs_sum))
}

/// `D(n1, n2 | n1p)` by the multi-binomial sum, `N ≤ 500`.
pub fn appendix_a_exact(df: &ComponentDF, history: OccupationHistory) -> Result<C64> {
    Ok(appendix_a_detailed(df, history, DEFAULT_EXACT_CAP)?.value)
}

/// `D(n1, n2 | n1p)` for every `n1 = 0..=N` at once.
pub fn appendix_a_column(
    df: &ComponentDF,
    n: usize,
    n2: usize,
    n1p: usize,
    cap: usize,
) -> Result<Vec<A13Value>> {
    check(df, n, n2, n1p, cap)?;
    let f = Factors::new(df, n);
    let mut acc = vec![CDd::ZERO; n + 1];
    let mut abs_acc = vec![0.0; n + 1];
    for term in k_terms(&f, n2, n1p) {
        for (u, (&l, &la)) in term.left.iter().zip(&term.left_abs).enumerate() {
            for (v, (&r, &ra)) in term.right.iter().zip(&term.right_abs).enumerate() {
                acc[u + v] += l * r;
                abs_acc[u + v] += la * ra;
            }
        }
    }
    Ok(acc
        .into_iter()
        .zip(abs_acc)
        .map(|(v, a)| finish(&f, n2, v, a))
        .collect())
}

fn ln_factorials(n: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(n + 1);
    let mut acc = 0.0;
    out.push(acc);
    for i in 1..=n {
        acc += (i as f64).ln();
        out.push(acc);
    }
    out
}

/// The `(N+1) × (N+1)` slice `D(n1, n2 | n1p)` at fixed `n2`, row-major in
/// `(n1, n1p)`, by exact discrete Fourier inversion.
///
/// The generating function `C(N,n2) A^{N-n2} B^{n2}` with
/// `A = yn e^{i(a-b)} + nn + c3 e^{ia} + c4 e^{-ib}` and
/// `B = yy e^{i(a-b)} + ny + c1 e^{ia} + c2 e^{-ib}` is a trigonometric
/// polynomial of degree `N` in each angle, so an `(N+1)`-point grid
/// recovers its coefficients without aliasing.
pub fn fourier_slice(df: &ComponentDF, n: usize, n2: usize) -> Result<Vec<C64>> {
    check(df, n, n2, 0, usize::MAX)?;
    let l = n + 1;
    let lf = ln_factorials(n);
    let ln_binom = lf[n] - lf[n2] - lf[n - n2];
    let angle = |p: usize| 2.0 * PI * p as f64 / l as f64;

    let mut grid = vec![C64::new(0.0, 0.0); l * l];
    for p in 0..l {
        let ea = (I * angle(p)).exp();
        for q in 0..l {
            let eb = (-I * angle(q)).exp();
            let eab = ea * eb;
            let a = eab * df.p_yn + df.p_nn + df.d_yn_nn * ea + df.d_nn_yn * eb;
            let b = eab * df.p_yy + df.p_ny + df.d_yy_ny * ea + df.d_ny_yy * eb;
            grid[p * l + q] = power_product(ln_binom, a, n - n2, b, n2);
        }
    }

    // coefficient of e^{i a n1 - i b n1p}: forward transform over a,
    // inverse over b
    let mut planner = FftPlanner::<f64>::new();
    let fwd = planner.plan_fft_forward(l);
    let inv = planner.plan_fft_inverse(l);
    let mut column = vec![C64::new(0.0, 0.0); l];
    for q in 0..l {
        for p in 0..l {
            column[p] = grid[p * l + q];
        }
        fwd.process(&mut column);
        for p in 0..l {
            grid[p * l + q] = column[p];
        }
    }
    for row in grid.chunks_mut(l) {
        inv.process(row);
    }
    let scale = 1.0 / (l * l) as f64;
    for z in grid.iter_mut() {
        *z *= scale;
    }
    Ok(grid)
}

/// `exp(ln_c) a^ea b^eb`, safe against intermediate overflow/underflow.
fn power_product(ln_c: f64, a: C64, ea: usize, b: C64, eb: usize) -> C64 {
    let zero = C64::new(0.0, 0.0);
    if (ea > 0 && a == zero) || (eb > 0 && b == zero) {
        return zero;
    }
    let mut log = C64::new(ln_c, 0.0);
    if ea > 0 {
        log += a.ln() * ea as f64;
    }
    if eb > 0 {
        log += b.ln() * eb as f64;
    }
    log.exp()
}

/// Exact functional on a set of `n2` slices, each `(N+1)²` entries.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExactDFTable {
    pub n: usize,
    pub n2_values: Vec<usize>,
    data: Vec<C64>,
}

impl ExactDFTable {
    /// All `n2`, by Fourier inversion.
    pub fn from_fourier(df: &ComponentDF, n: usize) -> Result<Self> {
        Self::from_fourier_slices(df, n, &(0..=n).collect::<Vec<_>>())
    }

    pub fn from_fourier_slices(df: &ComponentDF, n: usize, n2_values: &[usize]) -> Result<Self> {
        let mut data = Vec::with_capacity(n2_values.len() * (n + 1) * (n + 1));
        for &n2 in n2_values {
            data.extend(fourier_slice(df, n, n2)?);
        }
        Ok(ExactDFTable {
            n,
            n2_values: n2_values.to_vec(),
            data,
        })
    }

    /// Given `n2` slices by the multi-binomial sum.
    pub fn from_appendix_a(
        df: &ComponentDF,
        n: usize,
        n2_values: &[usize],
        cap: usize,
    ) -> Result<Self> {
        let l = n + 1;
        let mut data = Vec::with_capacity(n2_values.len() * l * l);
        for &n2 in n2_values {
            let mut slice = vec![C64::new(0.0, 0.0); l * l];
            for n1p in 0..=n {
                for (n1, v) in appendix_a_column(df, n, n2, n1p, cap)?
                    .into_iter()
                    .enumerate()
                {
                    slice[n1 * l + n1p] = v.value;
                }
            }
            data.extend(slice);
        }
        Ok(ExactDFTable {
            n,
            n2_values: n2_values.to_vec(),
            data,
        })
    }

    pub fn get(&self, n1: usize, n2: usize, n1p: usize) -> Option<C64> {
        let l = self.n + 1;
        if n1 > self.n || n1p > self.n {
            return None;
        }
        let slot = self.n2_values.iter().position(|&v| v == n2)?;
        Some(self.data[slot * l * l + n1 * l + n1p])
    }

    /// `(n1, n2, n1p, value)` in slice, then row-major order.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, usize, C64)> + '_ {
        let l = self.n + 1;
        self.n2_values
            .iter()
            .enumerate()
            .flat_map(move |(slot, &n2)| {
                (0..l).flat_map(move |n1| {
                    (0..l).map(move |n1p| (n1, n2, n1p, self.data[slot * l * l + n1 * l + n1p]))
                })
            })
    }

    /// Sum of the diagonal (`n1 = n1p`) entries over the stored slices.
    pub fn diagonal_sum(&self) -> C64 {
        self.entries().filter(|e| e.0 == e.2).map(|e| e.3).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_df() -> ComponentDF {
        ComponentDF::from_pair_elements(0.62, 0.27, C64::new(0.05, 0.21))
    }

    /// Direct enumeration of all 8^N path assignments.
    fn brute_force(df: &ComponentDF, h: OccupationHistory) -> C64 {
        // (value, a0 is y, at is y, b0 is y)
        let paths = [
            (C64::new(df.p_yy, 0.0), 1, 1, 1),
            (C64::new(df.p_ny, 0.0), 0, 1, 0),
            (C64::new(df.p_yn, 0.0), 1, 0, 1),
            (C64::new(df.p_nn, 0.0), 0, 0, 0),
            (df.d_yy_ny, 1, 1, 0),
            (df.d_ny_yy, 0, 1, 1),
            (df.d_yn_nn, 1, 0, 0),
            (df.d_nn_yn, 0, 0, 1),
        ];
        let mut total = C64::new(0.0, 0.0);
        for code in 0..8usize.pow(h.n as u32) {
            let (mut c, mut v, mut a, mut t, mut b) = (code, C64::new(1.0, 0.0), 0, 0, 0);
            for _ in 0..h.n {
                let (val, x, y, z) = paths[c % 8];
                c /= 8;
                v *= val;
                a += x;
                t += y;
                b += z;
            }
            if a == h.n1 && t == h.n2 && b == h.n1p {
                total += v;
            }
        }
        total
    }

    #[test]
    fn single_component_reduces_to_df() {
        let df = sample_df();
        let h = |n1, n2, n1p| OccupationHistory::new(1, n1, n2, n1p).unwrap();
        assert!((appendix_a_exact(&df, h(1, 1, 0)).unwrap() - df.d_yy_ny).norm() < 1e-15);
        assert!((appendix_a_exact(&df, h(0, 1, 1)).unwrap() - df.d_ny_yy).norm() < 1e-15);
        assert!((appendix_a_exact(&df, h(1, 0, 0)).unwrap() - df.d_yn_nn).norm() < 1e-15);
        assert!((appendix_a_exact(&df, h(0, 0, 1)).unwrap() - df.d_nn_yn).norm() < 1e-15);
        assert!((appendix_a_exact(&df, h(1, 1, 1)).unwrap().re - df.p_yy).abs() < 1e-15);
    }

    #[test]
    fn matches_path_enumeration() {
        let df = sample_df();
        for n in 1..=4 {
            for n1 in 0..=n {
                for n2 in 0..=n {
                    for n1p in 0..=n {
                        let h = OccupationHistory::new(n, n1, n2, n1p).unwrap();
                        let want = brute_force(&df, h);
                        let got = appendix_a_exact(&df, h).unwrap();
                        assert!((got - want).norm() < 1e-14, "{h:?}: {got} vs {want}");
                    }
                }
            }
        }
    }

    #[test]
    fn column_and_fourier_agree_with_entries() {
        let df = sample_df();
        let n = 9;
        let slice = fourier_slice(&df, n, 4).unwrap();
        let col = appendix_a_column(&df, n, 4, 6, DEFAULT_EXACT_CAP).unwrap();
        for n1 in 0..=n {
            let h = OccupationHistory::new(n, n1, 4, 6).unwrap();
            let single = appendix_a_exact(&df, h).unwrap();
            assert!((col[n1].value - single).norm() < 1e-14);
            assert!((slice[n1 * (n + 1) + 6] - single).norm() < 1e-13);
        }
    }

    #[test]
    fn diagonal_is_normalized() {
        let df = sample_df();
        let table = ExactDFTable::from_fourier(&df, 12).unwrap();
        assert!((table.diagonal_sum() - 1.0).norm() < 1e-12);
        let a13 = ExactDFTable::from_appendix_a(&df, 6, &(0..=6).collect::<Vec<_>>(), 50).unwrap();
        assert!((a13.diagonal_sum() - 1.0).norm() < 1e-13);
        assert_eq!(table.get(3, 13, 3), None);
    }

    #[test]
    fn rejects_out_of_range() {
        let df = sample_df();
        let h = OccupationHistory {
            n: 3,
            n1: 0,
            n2: 4,
            n1p: 0,
        };
        assert!(matches!(
            appendix_a_exact(&df, h),
            Err(Error::OccupationOutOfRange { .. })
        ));
        let big = OccupationHistory::new(600, 1, 1, 1).unwrap();
        assert!(matches!(
            appendix_a_exact(&df, big),
            Err(Error::CapExceeded { .. })
        ));
    }
}
