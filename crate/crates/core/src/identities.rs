//! Two-sided numerical verification of the integral, series and algebraic
//! identities behind the three families.
//!
//! Every verifier computes both sides independently (quadrature or series
//! on one side, matrix entries on the other) and returns an
//! [`IdentityReport`]; truncated series and integrals record their tail
//! bound in the report notes.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::families::{
    a_entry_max_form, c_entry_lcm_form, dense_truncation, entry, scaling_check,
    tensor_factor_entry, Family, FamilyParams, MultiplicativeToeplitz,
};
use crate::ntheory::{euler_phi, gcd, zeta, KahanSum};
use crate::par;
use crate::report::{IdentityReport, Tolerance};

pub const DEFAULT_CIRCLE_POINTS: usize = 1024;
pub const HALFPLANE_TOLERANCE: f64 = 1e-4;
pub const SMITH_MAX_SIZE: usize = 24;

/// Finitely supported coefficient sequence `f_n`, indexed from the family's
/// origin (0 for `A`, 1 for `B` and `C`).
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientVector {
    coeffs: Vec<Complex64>,
}

impl CoefficientVector {
    pub fn new(coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::invalid("coefficient vector must be non-empty"));
        }
        if coeffs.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::invalid("coefficients must be finite"));
        }
        Ok(CoefficientVector { coeffs })
    }

    pub fn real(coeffs: &[f64]) -> Result<Self> {
        Self::new(coeffs.iter().map(|&c| Complex64::new(c, 0.0)).collect())
    }

    /// `e_index` (0-based slot) in a vector of length `len`.
    pub fn basis(len: usize, index: usize) -> Result<Self> {
        if index >= len {
            return Err(Error::invalid("basis index out of range"));
        }
        let mut c = vec![Complex64::new(0.0, 0.0); len];
        c[index] = Complex64::new(1.0, 0.0);
        Self::new(c)
    }

    /// Complex coefficients with independent uniform real and imaginary
    /// parts in `[-1, 1)`.
    pub fn random<R: Rng>(len: usize, rng: &mut R) -> Result<Self> {
        Self::new(
            (0..len)
                .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                .collect(),
        )
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn norm_sq(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }

    /// `sum f_n z^n` with the first slot as `z^0` (Horner).
    pub fn eval_polynomial(&self, z: Complex64) -> Complex64 {
        self.coeffs
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
    }

    /// `sum_{n,m} M_{nm} f_n conj(f_m)` over the leading block.
    pub fn hermitian_form(&self, p: &FamilyParams) -> Result<f64> {
        let m = dense_truncation(p, self.len())?;
        let mut acc = Complex64::new(0.0, 0.0);
        for (i, fi) in self.coeffs.iter().enumerate() {
            for (j, fj) in self.coeffs.iter().enumerate() {
                acc += m.get(i, j) * fi * fj.conj();
            }
        }
        Ok(acc.re)
    }
}

fn check_q(q: f64) -> Result<()> {
    if q > 0.0 && q < 1.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("q must lie in (0, 1), got {q}")))
    }
}

fn check_positive_tau(tau: f64, what: &str) -> Result<()> {
    if tau > 0.0 && tau.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("{what} requires tau > 0, got {tau}")))
    }
}

/// Uniform trapezoid rule for `(1/2pi) int_{-pi}^{pi} g(theta) d theta`.
fn circle_average<F: Fn(f64) -> Complex64>(points: usize, g: F) -> Complex64 {
    let step = 2.0 * PI / points as f64;
    let sum = (0..points).fold(Complex64::new(0.0, 0.0), |acc, k| {
        acc + g(-PI + step * k as f64)
    });
    sum / points as f64
}

/// Poisson kernel `(1 - r^2) / |1 - r e^{i theta}|^2`.
fn poisson_kernel(r: f64, theta: f64) -> f64 {
    (1.0 - r * r) / (1.0 - 2.0 * r * theta.cos() + r * r)
}

/// Fourier coefficient of the disc Poisson kernel at radius `q^{tau/2}`
/// against `q^{tau |n| / 2}`.
pub fn verify_poisson_circle(q: f64, tau: f64, n: i64, points: usize) -> Result<IdentityReport> {
    check_q(q)?;
    check_positive_tau(tau, "the circle Poisson identity")?;
    if points < 8 {
        return Err(Error::invalid(format!("need at least 8 quadrature points, got {points}")));
    }
    let r = q.powf(0.5 * tau);
    let lhs = circle_average(points, |theta| {
        poisson_kernel(r, theta) * Complex64::from_polar(1.0, n as f64 * theta)
    });
    let rhs = r.powi(n.unsigned_abs() as i32);
    Ok(
        IdentityReport::new("poisson-circle", lhs.re, rhs, Tolerance::Absolute(1e-10))
            .with_quadrature_points(points)
            .with_detail(format!("q={q}, tau={tau}, n={n}, imag={:.3e}", lhs.im)),
    )
}

/// Quadratic form of `A` as a Poisson-weighted circle integral of
/// `|f(q^{rho/2} e^{i theta})|^2`, against the dense Hermitian form.
pub fn verify_quadform_a(
    p: &FamilyParams,
    f: &CoefficientVector,
    points: usize,
) -> Result<IdentityReport> {
    let (lhs, rhs) = quadform_a_sides(p, f, points)?;
    Ok(
        IdentityReport::new("quadform-a", lhs, rhs, Tolerance::Relative(1e-8))
            .with_scale(f.norm_sq().max(lhs.abs()).max(rhs.abs()))
            .with_quadrature_points(points)
            .with_detail(format!("{p}, degree={}", f.len() - 1)),
    )
}

fn quadform_a_sides(p: &FamilyParams, f: &CoefficientVector, points: usize) -> Result<(f64, f64)> {
    if p.family() != Family::A {
        return Err(Error::Unsupported("the circle quadratic form is for family A".into()));
    }
    check_positive_tau(p.tau(), "the circle quadratic form")?;
    if points < 8 {
        return Err(Error::invalid(format!("need at least 8 quadrature points, got {points}")));
    }
    let q = p.q().expect("family A carries q");
    let r = q.powf(0.5 * p.tau());
    let radius = q.powf(0.5 * p.rho());
    let lhs = circle_average(points, |theta| {
        let value = f.eval_polynomial(Complex64::from_polar(radius, theta));
        Complex64::new(poisson_kernel(r, theta) * value.norm_sqr(), 0.0)
    })
    .re;
    Ok((lhs, f.hermitian_form(p)?))
}

/// Recovers `A_{nm}` from circle quadratures of `e_n + e_m`,
/// `e_n + i e_m`, `e_n` and `e_m` (polarization) and compares it with the
/// entry; the recovered imaginary part must vanish.
pub fn verify_polarization_a(p: &FamilyParams, n: usize, m: usize, points: usize) -> Result<IdentityReport> {
    let len = n.max(m) + 1;
    let form = |f: &CoefficientVector| quadform_a_sides(p, f, points).map(|(lhs, _)| lhs);
    let one = Complex64::new(1.0, 0.0);
    let mut plus = vec![Complex64::new(0.0, 0.0); len];
    plus[n] += one;
    plus[m] += one;
    let mut twisted = vec![Complex64::new(0.0, 0.0); len];
    twisted[n] += one;
    twisted[m] += Complex64::new(0.0, 1.0);
    let qn = form(&CoefficientVector::basis(len, n)?)?;
    let qm = form(&CoefficientVector::basis(len, m)?)?;
    let (re, im) = if n == m {
        (qn, 0.0)
    } else {
        let q_plus = form(&CoefficientVector::new(plus)?)?;
        let q_twisted = form(&CoefficientVector::new(twisted)?)?;
        (0.5 * (q_plus - qn - qm), 0.5 * (q_twisted - qn - qm))
    };
    let rhs = entry(p, n as u64, m as u64)?;
    let mut report = IdentityReport::new("polarization-a", re, rhs, Tolerance::Absolute(1e-8))
        .with_quadrature_points(points)
        .with_detail(format!("{p}, (n,m)=({n},{m}), recovered imaginary part {im:.3e}"));
    report.abs_discrepancy = report.abs_discrepancy.max(im.abs());
    Ok(report)
}

/// Simpson step and truncation used by [`verify_halfplane_poisson`].
fn halfplane_grid(tau: f64, log_ratio: f64, truncation: Option<f64>, min_intervals: usize) -> (f64, usize) {
    let t_max = truncation.unwrap_or_else(|| 1e4f64.max(1e4 * tau));
    let mut h = 0.1f64.min(tau / 8.0);
    if log_ratio != 0.0 {
        h = h.min(1.0 / (4.0 * log_ratio.abs()));
    }
    let mut intervals = ((t_max / h).ceil() as usize).max(min_intervals).max(2);
    intervals += intervals % 2;
    (t_max, intervals)
}

/// Half-plane Poisson kernel at `i tau / 2` integrated against
/// `cos(t log(n/m))`, against `e^{-|log(n/m)| tau / 2}`.
pub fn verify_halfplane_poisson(
    tau: f64,
    n: u64,
    m: u64,
    truncation: Option<f64>,
    min_intervals: usize,
) -> Result<IdentityReport> {
    check_positive_tau(tau, "the half-plane Poisson identity")?;
    if n == 0 || m == 0 {
        return Err(Error::invalid("indices start at 1"));
    }
    if let Some(t) = truncation {
        if !(t > 0.0 && t.is_finite()) {
            return Err(Error::invalid(format!("truncation must be positive, got {t}")));
        }
    }
    let log_ratio = (n as f64 / m as f64).ln();
    let (t_max, intervals) = halfplane_grid(tau, log_ratio, truncation, min_intervals);
    let lhs = halfplane_integral(tau, log_ratio, t_max, intervals);
    let rhs = (-0.5 * tau * log_ratio.abs()).exp();
    Ok(
        IdentityReport::new("halfplane", lhs, rhs, Tolerance::Absolute(HALFPLANE_TOLERANCE))
            .with_tail_bound(tau / (PI * t_max))
            .with_quadrature_points(intervals + 1)
            .with_detail(format!("tau={tau}, (n,m)=({n},{m}), T={t_max}")),
    )
}

/// `(tau / pi) int_0^T cos(L t) / (t^2 + tau^2/4) dt` by composite Simpson
/// (the integrand is even, so this equals the symmetric integral).
fn halfplane_integral(tau: f64, log_ratio: f64, t_max: f64, intervals: usize) -> f64 {
    let c2 = 0.25 * tau * tau;
    let h = t_max / intervals as f64;
    let g = |t: f64| (log_ratio * t).cos() / (t * t + c2);
    let mut sum = KahanSum::new();
    sum.add(g(0.0));
    sum.add(g(t_max));
    for k in 1..intervals {
        let w = if k % 2 == 1 { 4.0 } else { 2.0 };
        sum.add(w * g(h * k as f64));
    }
    tau / PI * sum.value() * h / 3.0
}

/// Quadratic form of `B` assembled from per-pair half-plane integrals and
/// the bilinear expansion, against the dense Hermitian form.
pub fn verify_quadform_b(p: &FamilyParams, f: &CoefficientVector) -> Result<IdentityReport> {
    if p.family() != Family::B {
        return Err(Error::Unsupported("the half-plane quadratic form is for family B".into()));
    }
    check_positive_tau(p.tau(), "the half-plane quadratic form")?;
    let len = f.len();
    let pairs: Vec<(usize, usize)> = (0..len).flat_map(|i| (i..len).map(move |j| (i, j))).collect();
    let kernel: Vec<(f64, f64)> = par::map_slice(&pairs, |&(i, j)| {
        let (n, m) = ((i + 1) as f64, (j + 1) as f64);
        let l = (n / m).ln();
        let (t_max, intervals) = halfplane_grid(p.tau(), l, None, 0);
        (halfplane_integral(p.tau(), l, t_max, intervals), p.tau() / (PI * t_max))
    });
    let mut lhs = Complex64::new(0.0, 0.0);
    let mut tail = 0.0;
    for (&(i, j), &(k, t)) in pairs.iter().zip(&kernel) {
        let weight = (((i + 1) * (j + 1)) as f64).powf(-0.5 * p.rho());
        let term = f.coeffs[i] * f.coeffs[j].conj();
        let both = if i == j { term } else { term + term.conj() };
        lhs += weight * k * both;
        let pair_mass = if i == j { term.norm() } else { 2.0 * term.norm() };
        tail += weight * (t + HALFPLANE_TOLERANCE) * pair_mass;
    }
    let rhs = f.hermitian_form(p)?;
    Ok(IdentityReport::new("quadform-b", lhs.re, rhs, Tolerance::Absolute(0.0))
        .with_tail_bound(tail)
        .with_detail(format!("{p}, length={len}; bound sums per-pair quadrature tolerance and tail")))
}

/// Divisor-parametrized zeta series `sum_{j<=K} (j^2 a b)^{-tau/2}` with
/// `a = n/(n,m)`, `b = m/(n,m)` against `zeta(tau) (nm)^{tau/2} / [n,m]^tau`.
pub fn verify_divisor_sum_zeta(tau: f64, n: u64, m: u64, terms: u64) -> Result<IdentityReport> {
    if !(tau > 2.0) {
        return Err(Error::Domain(format!("the divisor zeta series diverges for tau <= 2, got {tau}")));
    }
    if n == 0 || m == 0 || terms == 0 {
        return Err(Error::invalid("n, m and K must be positive"));
    }
    let g = gcd(n, m);
    let (a, b) = (n / g, m / g);
    let ab = a as f64 * b as f64;
    let lhs: KahanSum = (1..=terms)
        .map(|j| ((j as f64).powi(2) * ab).powf(-0.5 * tau))
        .collect();
    let tail = ab.powf(-0.5 * tau) * (terms as f64).powf(1.0 - tau) / (tau - 1.0);
    let lcm = (n / g) as f64 * m as f64;
    let rhs = zeta(tau)? * ((n as f64 * m as f64).powf(0.5 * tau) / lcm.powf(tau));
    Ok(
        IdentityReport::new("zeta-divisor", lhs.value(), rhs, Tolerance::Absolute(1e-12))
            .with_tail_bound(tail)
            .with_truncation(terms)
            .with_detail(format!("tau={tau}, (n,m)=({n},{m}), (a,b)=({a},{b})")),
    )
}

/// `(T^T T) / zeta(tau)` over the leading `N x N` block, with `T` the
/// multiplicative Toeplitz block on rows `<= K`, against `C(tau, 0)`.
pub fn verify_multiplier_gram(tau: f64, size: usize, rows: usize) -> Result<IdentityReport> {
    if !(tau > 2.0) {
        return Err(Error::Domain(format!("the multiplier is unbounded for tau <= 2, got {tau}")));
    }
    if size == 0 || rows < size {
        return Err(Error::invalid(format!("need 1 <= N <= K, got N={size}, K={rows}")));
    }
    let t = MultiplicativeToeplitz::new(tau, rows, size)?;
    let gram = t.gram();
    let z = zeta(tau)?;
    let c = FamilyParams::c(tau, 0.0)?;
    let mut worst: Option<(f64, f64, usize, usize)> = None;
    let mut tail = 0.0f64;
    for n in 1..=size {
        for m in 1..=size {
            let lhs = gram[(n - 1) * size + (m - 1)] / z;
            let rhs = entry(&c, n as u64, m as u64)?;
            let g = gcd(n as u64, m as u64) as usize;
            let multiples = rows / (n / g * m);
            let pair_tail = if multiples == 0 {
                rhs
            } else {
                rhs * (multiples as f64).powf(1.0 - tau) / ((tau - 1.0) * z)
            };
            tail = tail.max(pair_tail);
            if worst.is_none_or(|(l, r, _, _)| (lhs - rhs).abs() > (l - r).abs()) {
                worst = Some((lhs, rhs, n, m));
            }
        }
    }
    let (lhs, rhs, n, m) = worst.expect("size >= 1");
    Ok(IdentityReport::new("multiplier-gram", lhs, rhs, Tolerance::Absolute(1e-12))
        .with_tail_bound(tail)
        .with_truncation(rows as u64)
        .with_detail(format!("tau={tau}, N={size}, K={rows}, worst at (n,m)=({n},{m})")))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SmithDeterminant {
    pub size: usize,
    pub det: i128,
    pub phi_product: i128,
}

impl SmithDeterminant {
    pub fn equal(&self) -> bool {
        self.det == self.phi_product
    }
}

/// Exact determinant of the `N x N` gcd matrix (fraction-free Bareiss
/// elimination with checked 128-bit arithmetic) and `prod_{k<=N} phi(k)`.
pub fn smith_determinant(size: usize) -> Result<SmithDeterminant> {
    if size == 0 || size > SMITH_MAX_SIZE {
        return Err(Error::invalid(format!(
            "exact gcd determinant limited to 1 <= N <= {SMITH_MAX_SIZE}, got {size}"
        )));
    }
    let mut a: Vec<Vec<i128>> = (1..=size as u64)
        .map(|n| (1..=size as u64).map(|m| i128::from(gcd(n, m))).collect())
        .collect();
    let det = bareiss(&mut a)?;
    let mut phi_product: i128 = 1;
    for k in 1..=size as u64 {
        phi_product = phi_product
            .checked_mul(i128::from(euler_phi(k)?))
            .ok_or_else(|| Error::Overflow("phi product exceeds 128 bits".into()))?;
    }
    Ok(SmithDeterminant { size, det, phi_product })
}

fn bareiss(a: &mut [Vec<i128>]) -> Result<i128> {
    let n = a.len();
    let overflow = || Error::Overflow("exact elimination exceeds 128 bits".into());
    let mut sign = 1i128;
    let mut prev = 1i128;
    for k in 0..n {
        if a[k][k] == 0 {
            match (k + 1..n).find(|&r| a[r][k] != 0) {
                Some(r) => {
                    a.swap(k, r);
                    sign = -sign;
                }
                None => return Ok(0),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let num = a[i][j]
                    .checked_mul(a[k][k])
                    .and_then(|x| a[i][k].checked_mul(a[k][j]).and_then(|y| x.checked_sub(y)))
                    .ok_or_else(overflow)?;
                a[i][j] = num / prev;
            }
        }
        prev = a[k][k];
    }
    Ok(sign * a[n - 1][n - 1])
}

/// Range `[(1-r)/(1+r), (1+r)/(1-r)]`, `r = q^{tau/2}`, of the Poisson
/// symbol of `A(tau, 0; q)`.
pub fn toeplitz_symbol_range(tau: f64, q: f64) -> Result<(f64, f64)> {
    check_q(q)?;
    check_positive_tau(tau, "the Toeplitz symbol range")?;
    let r = q.powf(0.5 * tau);
    Ok(((1.0 - r) / (1.0 + r), (1.0 + r) / (1.0 - r)))
}

fn exhaustive<F>(name: &str, size: usize, check: F) -> Result<IdentityReport>
where
    F: Fn(u64, u64) -> Result<IdentityReport> + Sync,
{
    if size == 0 {
        return Err(Error::invalid("size must be positive"));
    }
    let rows: Vec<Result<IdentityReport>> = par::map(size, |i| {
        let mut worst: Option<IdentityReport> = None;
        for j in 0..size {
            let r = check(i as u64, j as u64)?;
            worst = Some(match worst {
                None => r,
                Some(w) => w.worse(r),
            });
        }
        Ok(worst.expect("size >= 1"))
    });
    let mut worst: Option<IdentityReport> = None;
    for r in rows {
        let r = r?;
        worst = Some(match worst {
            None => r,
            Some(w) => w.worse(r),
        });
    }
    let mut report = worst.expect("size >= 1");
    report.notes.identity = name.to_string();
    Ok(report)
}

/// Worst scaling relation over all `n, m` in the leading `N x N` block.
pub fn verify_scaling(p: &FamilyParams, size: usize, k: u64) -> Result<IdentityReport> {
    let origin = p.origin();
    exhaustive("scaling", size, |i, j| scaling_check(p, k, origin + i, origin + j))
}

/// Worst prime-by-prime product of `A(tau, rho; 1/p)` entries against the
/// `C` entry, over the leading `N x N` block.
pub fn verify_tensor(p: &FamilyParams, size: usize) -> Result<IdentityReport> {
    exhaustive("tensor", size, |i, j| {
        let (n, m) = (i + 1, j + 1);
        let lhs = tensor_factor_entry(p, n, m)?;
        let rhs = entry(p, n, m)?;
        Ok(IdentityReport::new("tensor", lhs, rhs, Tolerance::Relative(1e-12))
            .with_detail(format!("{p}, worst at (n,m)=({n},{m})")))
    })
}

/// Worst disagreement between the defining entry formula and the
/// alternative closed form (`max` form for `A`, `lcm` form for `C`, the
/// ratio form `(n/m)^{tau/2}` with `n <= m` for `B`).
pub fn verify_alternative_form(p: &FamilyParams, size: usize) -> Result<IdentityReport> {
    let origin = p.origin();
    exhaustive("alternative-form", size, |i, j| {
        let (n, m) = (origin + i, origin + j);
        let lhs = match p.family() {
            Family::A => a_entry_max_form(p.tau(), p.rho(), p.q().expect("q"), n, m),
            Family::B => {
                let (lo, hi) = (n.min(m) as f64, n.max(m) as f64);
                (lo / hi).powf(0.5 * p.tau()) * (n as f64 * m as f64).powf(-0.5 * p.rho())
            }
            Family::C => c_entry_lcm_form(p.tau(), p.rho(), n, m)?,
        };
        let rhs = entry(p, n, m)?;
        Ok(IdentityReport::new("alternative-form", lhs, rhs, Tolerance::Relative(1e-12))
            .with_detail(format!("{p}, worst at (n,m)=({n},{m})")))
    })
}
