//! Entry formulas, dense truncations and structural decompositions of the
//! three families.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ntheory::{factorize, gcd, gcd_lcm};
use crate::par;
use crate::report::{IdentityReport, Tolerance};

/// Entries whose natural log exceeds this are rejected instead of
/// overflowing to infinity.
pub const MAX_LOG_ENTRY: f64 = 700.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Family {
    A,
    B,
    C,
}

impl Family {
    pub const ALL: [Family; 3] = [Family::A, Family::B, Family::C];

    /// First index: `A` lives on `{0, 1, ...}`, `B` and `C` on `{1, 2, ...}`.
    pub fn origin(self) -> u64 {
        match self {
            Family::A => 0,
            Family::B | Family::C => 1,
        }
    }

    pub fn letter(self) -> char {
        match self {
            Family::A => 'A',
            Family::B => 'B',
            Family::C => 'C',
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.letter())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "A" | "a" => Ok(Family::A),
            "B" | "b" => Ok(Family::B),
            "C" | "c" => Ok(Family::C),
            other => Err(Error::invalid(format!("unknown family {other:?}"))),
        }
    }
}

/// Family tag with its real parameters; `q` is present exactly for `A`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FamilyParams {
    family: Family,
    tau: f64,
    rho: f64,
    q: Option<f64>,
}

impl FamilyParams {
    pub fn new(family: Family, tau: f64, rho: f64, q: Option<f64>) -> Result<Self> {
        if !tau.is_finite() || !rho.is_finite() {
            return Err(Error::invalid(format!("tau and rho must be finite, got ({tau}, {rho})")));
        }
        match (family, q) {
            (Family::A, Some(q)) if q > 0.0 && q < 1.0 => {}
            (Family::A, Some(q)) => {
                return Err(Error::invalid(format!("family A needs 0 < q < 1, got {q}")))
            }
            (Family::A, None) => return Err(Error::invalid("family A needs a base q")),
            (_, Some(_)) => {
                return Err(Error::invalid(format!("q applies to family A only, not {family}")))
            }
            (_, None) => {}
        }
        Ok(FamilyParams {
            family,
            tau,
            rho,
            q,
        })
    }

    pub fn a(tau: f64, rho: f64, q: f64) -> Result<Self> {
        Self::new(Family::A, tau, rho, Some(q))
    }

    pub fn b(tau: f64, rho: f64) -> Result<Self> {
        Self::new(Family::B, tau, rho, None)
    }

    pub fn c(tau: f64, rho: f64) -> Result<Self> {
        Self::new(Family::C, tau, rho, None)
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn q(&self) -> Option<f64> {
        self.q
    }

    pub fn origin(&self) -> u64 {
        self.family.origin()
    }

    /// Same family and base with a different `(tau, rho)`.
    pub fn with_tau_rho(&self, tau: f64, rho: f64) -> Result<Self> {
        Self::new(self.family, tau, rho, self.q)
    }

    fn base(&self) -> f64 {
        self.q.expect("family A carries q")
    }

    /// Natural log of the `(n, m)` entry, no range check.
    pub(crate) fn log_entry(&self, n: u64, m: u64) -> f64 {
        let (lo, hi) = if n <= m { (n, m) } else { (m, n) };
        match self.family {
            Family::A => {
                self.base().ln() * a_exponent(self.tau, self.rho, lo, hi)
            }
            Family::B => {
                let (ll, lh) = ((lo as f64).ln(), (hi as f64).ln());
                0.5 * (self.tau - self.rho) * (ll + lh) - self.tau * lh
            }
            Family::C => {
                let g = gcd(lo, hi) as f64;
                let (ll, lh) = ((lo as f64).ln(), (hi as f64).ln());
                self.tau * g.ln() - 0.5 * (self.tau + self.rho) * (ll + lh)
            }
        }
    }

    fn check_index(&self, n: u64, m: u64) -> Result<()> {
        let origin = self.origin();
        if n < origin || m < origin {
            return Err(Error::IndexOrigin {
                family: self.family.letter(),
                origin,
                n,
                m,
            });
        }
        Ok(())
    }
}

impl fmt::Display for FamilyParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.q {
            Some(q) => write!(f, "{}({}, {}; q={})", self.family, self.tau, self.rho, q),
            None => write!(f, "{}({}, {})", self.family, self.tau, self.rho),
        }
    }
}

/// Exponent of `q` in `A_{lo,hi}`, `lo <= hi`.
fn a_exponent(tau: f64, rho: f64, lo: u64, hi: u64) -> f64 {
    0.5 * (tau * (hi - lo) as f64 + rho * (lo + hi) as f64)
}

/// Matrix entry at absolute indices `(n, m)`.
///
/// * `A`: `q^{tau |n-m| / 2} q^{rho (n+m) / 2}`
/// * `B`: `(nm)^{tau/2} max(n,m)^{-tau} (nm)^{-rho/2}`
/// * `C`: `gcd(n,m)^tau (nm)^{-(tau+rho)/2}`
pub fn entry(p: &FamilyParams, n: u64, m: u64) -> Result<f64> {
    p.check_index(n, m)?;
    let log_value = p.log_entry(n, m);
    if log_value > MAX_LOG_ENTRY || log_value.is_nan() {
        return Err(Error::EntryRange { n, m, log_value });
    }
    Ok(match p.family {
        Family::A => {
            let (lo, hi) = if n <= m { (n, m) } else { (m, n) };
            p.base().powf(a_exponent(p.tau, p.rho, lo, hi))
        }
        Family::B | Family::C => {
            // direct powers are exact on rational cases such as 2^2 * 8^{-1};
            // the log form covers factors that leave the f64 range on their own
            let (lo, hi) = if n <= m { (n, m) } else { (m, n) };
            let prod = lo as f64 * hi as f64;
            let (left, right) = match p.family {
                Family::B => ((lo as f64 / hi as f64).powf(0.5 * p.tau), prod.powf(-0.5 * p.rho)),
                _ => ((gcd(lo, hi) as f64).powf(p.tau), prod.powf(-0.5 * (p.tau + p.rho))),
            };
            let direct = left * right;
            if direct.is_finite() && left.is_normal() && right.is_normal() {
                direct
            } else {
                log_value.exp()
            }
        }
    })
}

/// `A` entry evaluated in its max-form `q^{tau max(n,m)} q^{-tau (n+m)/2} q^{rho (n+m)/2}`.
pub fn a_entry_max_form(tau: f64, rho: f64, q: f64, n: u64, m: u64) -> f64 {
    let s = (n + m) as f64;
    q.powf(tau * n.max(m) as f64) * q.powf(-0.5 * tau * s) * q.powf(0.5 * rho * s)
}

/// `C` entry evaluated through the lcm: `(nm)^{tau/2} lcm^{-tau} (nm)^{-rho/2}`.
pub fn c_entry_lcm_form(tau: f64, rho: f64, n: u64, m: u64) -> Result<f64> {
    let (_, l) = gcd_lcm(n, m)?;
    let lnm = (n as f64).ln() + (m as f64).ln();
    Ok((0.5 * (tau - rho) * lnm - tau * (l as f64).ln()).exp())
}

/// Row-major `N x N` symmetric truncation. Row/column `i` carries the
/// absolute index `origin + i`.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseSymMatrix {
    size: usize,
    origin: u64,
    data: Vec<f64>,
}

impl DenseSymMatrix {
    /// Builds from a symmetric generator evaluated on the upper triangle.
    pub fn from_upper<F>(size: usize, origin: u64, f: F) -> Result<Self>
    where
        F: Fn(usize, usize) -> Result<f64> + Sync + Send,
    {
        if size == 0 {
            return Err(Error::invalid("matrix size must be positive"));
        }
        let rows: Vec<Result<Vec<f64>>> =
            par::map(size, |i| (i..size).map(|j| f(i, j)).collect());
        let mut data = vec![0.0; size * size];
        for (i, row) in rows.into_iter().enumerate() {
            let row = row?;
            for (k, v) in row.into_iter().enumerate() {
                let j = i + k;
                if !v.is_finite() {
                    return Err(Error::invalid(format!("non-finite entry at ({i}, {j})")));
                }
                data[i * size + j] = v;
                data[j * size + i] = v;
            }
        }
        Ok(DenseSymMatrix { size, origin, data })
    }

    /// Validates symmetry and finiteness of a row-major buffer.
    pub fn from_row_major(size: usize, origin: u64, data: Vec<f64>) -> Result<Self> {
        if size == 0 || data.len() != size * size {
            return Err(Error::SizeMismatch {
                expected: size * size,
                actual: data.len(),
            });
        }
        for i in 0..size {
            for j in 0..size {
                let v = data[i * size + j];
                if !v.is_finite() || v != data[j * size + i] {
                    return Err(Error::invalid(format!("entry ({i}, {j}) not finite/symmetric")));
                }
            }
        }
        Ok(DenseSymMatrix { size, origin, data })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn origin(&self) -> u64 {
        self.origin
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.size + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.size..(i + 1) * self.size]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.size).map(|i| self.get(i, i)).collect()
    }

    pub fn trace(&self) -> f64 {
        (0..self.size).map(|i| self.get(i, i)).sum()
    }

    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Leading `k x k` principal block.
    pub fn leading(&self, k: usize) -> Result<DenseSymMatrix> {
        if k == 0 || k > self.size {
            return Err(Error::invalid(format!("leading block {k} of a {}-matrix", self.size)));
        }
        let mut data = Vec::with_capacity(k * k);
        for i in 0..k {
            data.extend_from_slice(&self.row(i)[..k]);
        }
        Ok(DenseSymMatrix {
            size: k,
            origin: self.origin,
            data,
        })
    }

    pub fn matvec(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.size];
        self.matvec_into(x, &mut out)?;
        Ok(out)
    }

    pub fn matvec_into(&self, x: &[f64], out: &mut [f64]) -> Result<()> {
        if x.len() != self.size || out.len() != self.size {
            return Err(Error::SizeMismatch {
                expected: self.size,
                actual: if x.len() != self.size { x.len() } else { out.len() },
            });
        }
        par::for_each_mut(out, |i, o| {
            *o = self.row(i).iter().zip(x).map(|(a, b)| a * b).sum();
        });
        Ok(())
    }
}

/// `N x N` truncation of the family, rows filled in parallel.
pub fn dense_truncation(p: &FamilyParams, size: usize) -> Result<DenseSymMatrix> {
    let origin = p.origin();
    DenseSymMatrix::from_upper(size, origin, |i, j| {
        entry(p, origin + i as u64, origin + j as u64)
    })
}

/// Checks the shift relation `A_{n+k,m+k} = q^{rho k} A_{n,m}` or, for `B`
/// and `C`, the homogeneity `M_{kn,km} = k^{-rho} M_{n,m}`.
///
/// The `A` factor is `q^{+rho k}`: shifting both indices by `k` adds `rho k`
/// to the exponent of `q` (compare the diagonal `A_{n,n} = q^{rho n}`).
pub fn scaling_check(p: &FamilyParams, k: u64, n: u64, m: u64) -> Result<IdentityReport> {
    if k == 0 {
        return Err(Error::invalid("scaling factor must be positive"));
    }
    let (lhs, rhs) = match p.family {
        Family::A => {
            let shifted = entry(p, n + k, m + k)?;
            (shifted, p.base().powf(p.rho * k as f64) * entry(p, n, m)?)
        }
        Family::B | Family::C => {
            let scaled = entry(p, k * n, k * m)?;
            (scaled, (k as f64).powf(-p.rho) * entry(p, n, m)?)
        }
    };
    Ok(
        IdentityReport::new("scaling", lhs, rhs, Tolerance::Relative(1e-12))
            .with_detail(format!("{p}, k={k}, (n,m)=({n},{m})")),
    )
}

/// `alpha`, `beta` of the rank-two reduction
/// `M(tau) + M(-tau) = alpha beta^T + beta alpha^T`.
#[derive(Debug, Clone, PartialEq)]
pub struct RankTwoDecomposition {
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
}

pub fn rank_two(p: &FamilyParams, size: usize) -> Result<RankTwoDecomposition> {
    let (tau, rho) = (p.tau, p.rho);
    let (alpha, beta) = match p.family {
        Family::A => {
            let q = p.base();
            (0..size as u64)
                .map(|n| {
                    let n = n as f64;
                    (q.powf(0.5 * (rho + tau) * n), q.powf(0.5 * (rho - tau) * n))
                })
                .unzip()
        }
        Family::B => (1..=size as u64)
            .map(|n| {
                let n = n as f64;
                (n.powf(-0.5 * (rho + tau)), n.powf(-0.5 * (rho - tau)))
            })
            .unzip(),
        Family::C => {
            return Err(Error::Unsupported(
                "family C has no rank-two reduction".into(),
            ))
        }
    };
    Ok(RankTwoDecomposition { alpha, beta })
}

/// Largest entrywise residual of the rank-two reduction over the leading
/// `N x N` block, relative to the largest of the four terms at that pair.
pub fn rank_two_residual(p: &FamilyParams, size: usize) -> Result<IdentityReport> {
    let decomposition = rank_two(p, size)?;
    let flipped = p.with_tau_rho(-p.tau, p.rho)?;
    let origin = p.origin();
    let mut worst: Option<IdentityReport> = None;
    for i in 0..size {
        for j in 0..size {
            let (n, m) = (origin + i as u64, origin + j as u64);
            let e_pos = entry(p, n, m)?;
            let e_neg = entry(&flipped, n, m)?;
            let ab = decomposition.alpha[i] * decomposition.beta[j];
            let ba = decomposition.beta[i] * decomposition.alpha[j];
            let scale = e_pos.abs().max(e_neg.abs()).max(ab.abs()).max(ba.abs());
            let r = IdentityReport::new("rank-two", e_pos + e_neg, ab + ba, Tolerance::Relative(1e-12))
                .with_scale(scale)
                .with_detail(format!("{p}, N={size}, worst at (n,m)=({n},{m})"));
            worst = Some(match worst {
                None => r,
                Some(w) => w.worse(r),
            });
        }
    }
    Ok(worst.expect("size >= 1"))
}

/// `C` entry as the product over primes `p | nm` of `A(tau, rho; 1/p)`
/// entries at the exponent pair `(k_p, j_p)`.
pub fn tensor_factor_entry(p: &FamilyParams, n: u64, m: u64) -> Result<f64> {
    if p.family != Family::C {
        return Err(Error::Unsupported("tensor factorization is defined for family C".into()));
    }
    p.check_index(n, m)?;
    let (fn_, fm) = (factorize(n)?, factorize(m)?);
    let mut primes: Vec<u64> = fn_.primes().chain(fm.primes()).collect();
    primes.sort_unstable();
    primes.dedup();
    let mut product = 1.0;
    for prime in primes {
        let local = FamilyParams::a(p.tau, p.rho, 1.0 / prime as f64)?;
        product *= entry(
            &local,
            u64::from(fn_.exponent_of(prime)),
            u64::from(fm.exponent_of(prime)),
        )?;
    }
    Ok(product)
}

/// Non-symmetric multiplicative Toeplitz block `T_{m,n} = (m/n)^{-tau/2}`
/// when `n | m`, else 0; rows `m = 1..=rows`, columns `n = 1..=cols`.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiplicativeToeplitz {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl MultiplicativeToeplitz {
    pub fn new(tau: f64, rows: usize, cols: usize) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::invalid("multiplicative Toeplitz block must be non-empty"));
        }
        let mut data = vec![0.0; rows * cols];
        for n in 1..=cols {
            for m in (n..=rows).step_by(n) {
                data[(m - 1) * cols + (n - 1)] = ((m / n) as f64).powf(-0.5 * tau);
            }
        }
        Ok(MultiplicativeToeplitz { rows, cols, data })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// 1-based `(m, n)`.
    pub fn get(&self, m: usize, n: usize) -> f64 {
        self.data[(m - 1) * self.cols + (n - 1)]
    }

    /// `T^T T`, a `cols x cols` row-major block.
    pub fn gram(&self) -> Vec<f64> {
        let c = self.cols;
        let mut out = vec![0.0; c * c];
        for m in 0..self.rows {
            let row = &self.data[m * c..(m + 1) * c];
            for i in 0..c {
                if row[i] == 0.0 {
                    continue;
                }
                for j in 0..c {
                    out[i * c + j] += row[i] * row[j];
                }
            }
        }
        out
    }
}

/// Square `N x N` multiplicative Toeplitz matrix.
pub fn multiplicative_toeplitz(tau: f64, size: usize) -> Result<MultiplicativeToeplitz> {
    MultiplicativeToeplitz::new(tau, size, size)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn params_validation() {
        assert!(FamilyParams::a(1.0, 1.0, 0.0).is_err());
        assert!(FamilyParams::a(1.0, 1.0, 1.0).is_err());
        assert!(FamilyParams::new(Family::A, 1.0, 1.0, None).is_err());
        assert!(FamilyParams::new(Family::B, 1.0, 1.0, Some(0.5)).is_err());
        assert!(FamilyParams::c(f64::NAN, 1.0).is_err());
        assert!(FamilyParams::c(1.0, f64::INFINITY).is_err());
    }

    #[test]
    fn entry_examples() {
        let a = FamilyParams::a(1.0, 1.0, 0.25).unwrap();
        assert_relative_eq!(entry(&a, 2, 2).unwrap(), 0.0625, max_relative = 1e-15);
        let c = FamilyParams::c(2.0, 0.0).unwrap();
        assert_relative_eq!(entry(&c, 2, 4).unwrap(), 0.5, max_relative = 1e-15);
        let b = FamilyParams::b(2.0, 0.0).unwrap();
        assert_relative_eq!(entry(&b, 2, 3).unwrap(), 2.0 / 3.0, max_relative = 1e-15);
    }

    #[test]
    fn origin_violations() {
        let b = FamilyParams::b(1.0, 1.0).unwrap();
        assert!(matches!(entry(&b, 0, 1), Err(Error::IndexOrigin { .. })));
        let a = FamilyParams::a(1.0, 1.0, 0.5).unwrap();
        assert!(entry(&a, 0, 0).is_ok());
    }

    #[test]
    fn overflowing_entry_is_an_error() {
        let a = FamilyParams::a(1.0, -2.0, 0.5).unwrap();
        assert!(matches!(entry(&a, 600, 600), Err(Error::EntryRange { .. })));
        assert!(dense_truncation(&a, 600).is_err());
        // underflow flushes towards zero instead
        let tiny = FamilyParams::a(1.0, 4.0, 0.5).unwrap();
        assert_eq!(entry(&tiny, 400, 400).unwrap(), 0.0);
    }

    #[test]
    fn dense_examples() {
        let c = FamilyParams::c(0.7, -0.3).unwrap();
        assert_eq!(dense_truncation(&c, 1).unwrap().as_slice(), &[1.0]);
        let a = FamilyParams::a(2.0, 0.0, 0.25).unwrap();
        let m = dense_truncation(&a, 2).unwrap();
        assert_eq!(m.origin(), 0);
        for (got, want) in m.as_slice().iter().zip([1.0, 0.25, 0.25, 1.0]) {
            assert_relative_eq!(*got, want, max_relative = 1e-15);
        }
        assert!(dense_truncation(&a, 0).is_err());
    }

    #[test]
    fn diagonal_of_c_is_power() {
        let c = FamilyParams::c(1.3, 0.8).unwrap();
        let m = dense_truncation(&c, 64).unwrap();
        assert_eq!(m.origin(), 1);
        for (i, d) in m.diagonal().iter().enumerate() {
            assert_relative_eq!(*d, ((i + 1) as f64).powf(-0.8), max_relative = 1e-13);
        }
    }

    #[test]
    fn entries_exactly_symmetric() {
        for p in [
            FamilyParams::a(-0.7, 1.3, 0.4).unwrap(),
            FamilyParams::b(1.7, -0.2).unwrap(),
            FamilyParams::c(-0.5, 2.0).unwrap(),
        ] {
            let o = p.origin();
            for n in o..o + 128 {
                for m in o..o + 128 {
                    assert_eq!(entry(&p, n, m).unwrap(), entry(&p, m, n).unwrap());
                }
            }
        }
    }

    #[test]
    fn gcd_form_equals_lcm_form() {
        for (tau, rho) in [(2.0, 0.0), (1.0, 1.0), (-0.5, 2.0), (3.0, -1.0)] {
            let p = FamilyParams::c(tau, rho).unwrap();
            for n in 1..=128 {
                for m in 1..=128 {
                    let g = entry(&p, n, m).unwrap();
                    let l = c_entry_lcm_form(tau, rho, n, m).unwrap();
                    assert_relative_eq!(g, l, max_relative = 1e-12);
                }
            }
        }
    }

    #[test]
    fn a_concise_form_equals_max_form() {
        for (tau, rho, q) in [(1.0, 1.0, 0.5), (-0.5, 2.0, 0.7), (2.0, -0.3, 0.9)] {
            let p = FamilyParams::a(tau, rho, q).unwrap();
            for n in 0..128 {
                for m in 0..128 {
                    assert_relative_eq!(
                        entry(&p, n, m).unwrap(),
                        a_entry_max_form(tau, rho, q, n, m),
                        max_relative = 1e-12
                    );
                }
            }
        }
    }

    #[test]
    fn scaling_examples() {
        let c = FamilyParams::c(2.0, 1.0).unwrap();
        let r = scaling_check(&c, 2, 1, 1).unwrap();
        assert_relative_eq!(r.lhs, 0.5, max_relative = 1e-15);
        assert!(r.passed());
        let b = FamilyParams::b(1.0, 2.0).unwrap();
        let r = scaling_check(&b, 5, 2, 3).unwrap();
        assert_relative_eq!(r.lhs / entry(&b, 2, 3).unwrap(), 1.0 / 25.0, max_relative = 1e-13);
        let a = FamilyParams::a(1.5, -0.5, 0.3).unwrap();
        let r = scaling_check(&a, 1, 4, 9).unwrap();
        assert!(r.passed(), "{r:?}");
        assert!(scaling_check(&a, 0, 1, 1).is_err());
    }

    #[test]
    fn rank_two_examples() {
        let a = FamilyParams::a(-1.0, 2.0, 0.5).unwrap();
        let d = rank_two(&a, 4).unwrap();
        let lhs = entry(&a, 1, 3).unwrap()
            + entry(&a.with_tau_rho(1.0, 2.0).unwrap(), 1, 3).unwrap();
        let rhs = d.alpha[1] * d.beta[3] + d.beta[1] * d.alpha[3];
        assert!((lhs - rhs).abs() < 1e-15);
        // diagonal: alpha_n beta_n = q^{rho n}
        for n in 0..4 {
            assert_relative_eq!(d.alpha[n] * d.beta[n], 0.5f64.powf(2.0 * n as f64), max_relative = 1e-14);
        }
        let b = FamilyParams::b(-0.5, 2.0).unwrap();
        let r = rank_two_residual(&b, 64).unwrap();
        assert!(r.rel_discrepancy < 1e-12, "{r:?}");
        let c = FamilyParams::c(1.0, 1.0).unwrap();
        assert!(matches!(rank_two_residual(&c, 4), Err(Error::Unsupported(_))));
    }

    #[test]
    fn tensor_examples() {
        let c = FamilyParams::c(2.0, 0.0).unwrap();
        assert_eq!(tensor_factor_entry(&c, 1, 1).unwrap(), 1.0);
        assert_relative_eq!(tensor_factor_entry(&c, 2, 4).unwrap(), 0.5, max_relative = 1e-15);
        let c = FamilyParams::c(1.0, 1.0).unwrap();
        assert_relative_eq!(
            tensor_factor_entry(&c, 6, 10).unwrap(),
            entry(&c, 6, 10).unwrap(),
            max_relative = 1e-13
        );
        let b = FamilyParams::b(1.0, 1.0).unwrap();
        assert!(tensor_factor_entry(&b, 2, 2).is_err());
    }

    #[test]
    fn multiplicative_toeplitz_examples() {
        let t = multiplicative_toeplitz(2.0, 12).unwrap();
        for n in 1..=12 {
            assert_eq!(t.get(n, n), 1.0);
        }
        assert_relative_eq!(t.get(6, 2), 1.0 / 3.0, max_relative = 1e-15);
        assert_eq!(t.get(2, 6), 0.0);
        assert_eq!(t.get(7, 2), 0.0);
    }
}
