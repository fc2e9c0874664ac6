//! Integer and multiplicative-function kernel: gcd/lcm, factorization,
//! Möbius, Euler and Jordan totients, and the Riemann zeta function for
//! real arguments above one.

use crate::error::{Error, Result};

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let r = a % b;
        a = b;
        b = r;
    }
    a
}

/// Returns `(gcd(n, m), lcm(n, m))`. Fails instead of wrapping when the lcm
/// does not fit in 64 bits.
pub fn gcd_lcm(n: u64, m: u64) -> Result<(u64, u64)> {
    if n == 0 || m == 0 {
        return Err(Error::invalid(format!("gcd_lcm needs positive arguments, got ({n}, {m})")));
    }
    let g = gcd(n, m);
    let l = (n / g)
        .checked_mul(m)
        .ok_or_else(|| Error::Overflow(format!("lcm({n}, {m}) exceeds u64")))?;
    Ok((g, l))
}

/// Prime factorization `n = prod p^k`, primes strictly increasing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Factorization {
    n: u64,
    factors: Vec<(u64, u32)>,
}

impl Factorization {
    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn factors(&self) -> &[(u64, u32)] {
        &self.factors
    }

    pub fn primes(&self) -> impl Iterator<Item = u64> + '_ {
        self.factors.iter().map(|&(p, _)| p)
    }

    /// Exponent of `p` in `n` (zero when `p` does not divide `n`).
    pub fn exponent_of(&self, p: u64) -> u32 {
        self.factors
            .iter()
            .find(|&&(q, _)| q == p)
            .map_or(0, |&(_, k)| k)
    }

    pub fn is_squarefree(&self) -> bool {
        self.factors.iter().all(|&(_, k)| k == 1)
    }

    /// All divisors of `n`, ascending.
    pub fn divisors(&self) -> Vec<u64> {
        let mut divs = vec![1u64];
        for &(p, k) in &self.factors {
            let current = divs.len();
            let mut pk = 1u64;
            for _ in 0..k {
                pk *= p;
                for i in 0..current {
                    divs.push(divs[i] * pk);
                }
            }
        }
        divs.sort_unstable();
        divs
    }
}

/// Trial-division factorization.
pub fn factorize(n: u64) -> Result<Factorization> {
    if n == 0 {
        return Err(Error::invalid("factorize(0)"));
    }
    let mut factors = Vec::new();
    let mut rest = n;
    let mut p = 2u64;
    while p.saturating_mul(p) <= rest {
        if rest.is_multiple_of(p) {
            let mut k = 0;
            while rest.is_multiple_of(p) {
                rest /= p;
                k += 1;
            }
            factors.push((p, k));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if rest > 1 {
        factors.push((rest, 1));
    }
    Ok(Factorization { n, factors })
}

/// Smallest-prime-factor sieve for fast factorization of every `n <= limit`.
#[derive(Debug, Clone)]
pub struct SpfSieve {
    spf: Vec<u32>,
}

impl SpfSieve {
    pub fn new(limit: usize) -> Self {
        let mut spf = vec![0u32; limit + 1];
        for i in 2..=limit {
            if spf[i] == 0 {
                let mut j = i;
                while j <= limit {
                    if spf[j] == 0 {
                        spf[j] = i as u32;
                    }
                    j += i;
                }
            }
        }
        SpfSieve { spf }
    }

    pub fn limit(&self) -> usize {
        self.spf.len() - 1
    }

    pub fn factorize(&self, n: usize) -> Result<Factorization> {
        if n == 0 || n > self.limit() {
            return Err(Error::invalid(format!("{n} outside sieve range 1..={}", self.limit())));
        }
        let mut factors: Vec<(u64, u32)> = Vec::new();
        let mut rest = n;
        while rest > 1 {
            let p = self.spf[rest] as usize;
            let mut k = 0;
            while rest.is_multiple_of(p) {
                rest /= p;
                k += 1;
            }
            factors.push((p as u64, k));
        }
        Ok(Factorization { n: n as u64, factors })
    }
}

pub fn mobius(n: u64) -> Result<i8> {
    let f = factorize(n)?;
    Ok(if !f.is_squarefree() {
        0
    } else if f.factors().len() % 2 == 0 {
        1
    } else {
        -1
    })
}

pub fn euler_phi(n: u64) -> Result<u64> {
    let f = factorize(n)?;
    Ok(f.factors()
        .iter()
        .map(|&(p, k)| (p - 1) * p.pow(k - 1))
        .product())
}

/// Jordan totient `J_t(d) = d^t prod_{p | d} (1 - p^{-t})`, the Möbius
/// inversion of `n -> n^t`: `sum_{d | n} J_t(d) = n^t`.
pub fn jordan_totient(d: u64, t: f64) -> Result<f64> {
    let f = factorize(d)?;
    Ok(jordan_from_factorization(&f, t))
}

fn jordan_from_factorization(f: &Factorization, t: f64) -> f64 {
    // per prime power: p^{kt} - p^{(k-1)t}
    f.factors()
        .iter()
        .map(|&(p, k)| {
            let p = p as f64;
            let hi = p.powf(k as f64 * t);
            let lo = p.powf((k - 1) as f64 * t);
            hi - lo
        })
        .product()
}

/// `J_t(d)` by the defining divisor sum `sum_{e | d} mu(d/e) e^t`.
pub fn jordan_totient_divisor_sum(d: u64, t: f64) -> Result<f64> {
    let f = factorize(d)?;
    let mut acc = KahanSum::new();
    for e in f.divisors() {
        let mu = mobius(d / e)?;
        if mu != 0 {
            acc.add(mu as f64 * (e as f64).powf(t));
        }
    }
    Ok(acc.value())
}

/// `J_t(d)` for every `d <= n`; slot 0 is unused and holds 0.
pub fn jordan_totient_table(t: f64, n: usize) -> Vec<f64> {
    let sieve = SpfSieve::new(n);
    let mut table = vec![0.0; n + 1];
    for (d, slot) in table.iter_mut().enumerate().skip(1) {
        let f = sieve.factorize(d).expect("d within sieve range");
        *slot = jordan_from_factorization(&f, t);
    }
    table
}

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct KahanSum {
    sum: f64,
    comp: f64,
}

impl KahanSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl std::iter::FromIterator<f64> for KahanSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = KahanSum::new();
        for x in iter {
            acc.add(x);
        }
        acc
    }
}

const ZETA_DOMAIN_MARGIN: f64 = 1e-9;

/// `B_{2k}` for `k = 1..=12`.
const BERNOULLI_EVEN: [f64; 12] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
    43867.0 / 798.0,
    -174611.0 / 330.0,
    854513.0 / 138.0,
    -236364091.0 / 2730.0,
];

/// `sum_{k=1}^{n} k^{-t}`.
pub fn zeta_partial_sum(t: f64, n: u64) -> f64 {
    (1..=n).map(|k| (k as f64).powf(-t)).collect::<KahanSum>().value()
}

/// Integral bound on `sum_{k > n} k^{-t}`: `n^{1-t} / (t - 1)`.
pub fn zeta_tail_bound(t: f64, n: u64) -> f64 {
    (n as f64).powf(1.0 - t) / (t - 1.0)
}

/// Riemann zeta for real `t > 1` with an error estimate.
///
/// Partial sum up to `N - 1`, the integral tail `N^{1-t}/(t-1)`, and
/// Euler-Maclaurin corrections; `N` doubles until the first omitted
/// correction falls below `1e-15` of the value.
pub fn zeta_with_error(t: f64) -> Result<(f64, f64)> {
    if !t.is_finite() || t <= 1.0 + ZETA_DOMAIN_MARGIN {
        return Err(Error::Domain(format!("zeta({t}) requires t > 1")));
    }
    const CORRECTIONS: usize = 10;
    let mut cutoff: u64 = 8;
    loop {
        let nf = cutoff as f64;
        let mut acc: KahanSum = (1..cutoff).map(|k| (k as f64).powf(-t)).collect();
        acc.add(nf.powf(1.0 - t) / (t - 1.0));
        acc.add(0.5 * nf.powf(-t));

        // term_k = B_{2k}/(2k)! * t (t+1) ... (t+2k-2) * N^{-t-2k+1}
        let mut rising = t;
        let mut factorial = 2.0;
        let mut power = nf.powf(-t - 1.0);
        let mut omitted = 0.0;
        for (k, b) in BERNOULLI_EVEN.iter().enumerate().take(CORRECTIONS + 1) {
            if k > 0 {
                let j = 2.0 * k as f64;
                rising *= (t + j - 1.0) * (t + j);
                factorial *= (j + 1.0) * (j + 2.0);
                power /= nf * nf;
            }
            let term = b / factorial * rising * power;
            if k < CORRECTIONS {
                acc.add(term);
            } else {
                omitted = term.abs();
            }
        }
        let value = acc.value();
        if omitted <= 1e-15 * value || cutoff > (1 << 24) {
            return Ok((value, omitted + 4.0 * f64::EPSILON * value));
        }
        cutoff *= 2;
    }
}

pub fn zeta(t: f64) -> Result<f64> {
    zeta_with_error(t).map(|(v, _)| v)
}
