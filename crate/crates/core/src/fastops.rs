//! Structure-exploiting matrix-vector products.
//!
//! * `A` is an exponential L-kernel: with `f = q^{(tau+rho)/2}` and
//!   `d_n = q^{rho n}`, `A_{n,m} = f^{|n-m|} d_{min(n,m)}`, applied by one
//!   forward and one backward first-order recurrence in O(N).
//! * `B = D_w L D_w` with `w_n = n^{(tau-rho)/2}` and the L-matrix
//!   `L_{n,m} = max(n,m)^{-tau}`, applied with a prefix and a suffix sum in O(N).
//! * `C = D_v G D_v` with `v_n = n^{-(tau+rho)/2}` and `G_{n,m} = gcd(n,m)^tau
//!   = sum_{d | n, d | m} J_tau(d)`, applied with two harmonic passes in
//!   O(N log N).

use crate::error::{Error, Result};
use crate::families::{DenseSymMatrix, Family, FamilyParams, MAX_LOG_ENTRY};
use crate::ntheory::{gcd, jordan_totient_table, KahanSum};
use crate::par;
use crate::report::{IdentityReport, Tolerance};

/// A real symmetric operator on `R^N`.
pub trait SymOperator: Sync {
    fn dim(&self) -> usize;

    fn apply_into(&self, x: &[f64], out: &mut [f64]) -> Result<()>;

    fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.dim()];
        self.apply_into(x, &mut out)?;
        Ok(out)
    }
}

impl SymOperator for DenseSymMatrix {
    fn dim(&self) -> usize {
        self.size()
    }

    fn apply_into(&self, x: &[f64], out: &mut [f64]) -> Result<()> {
        self.matvec_into(x, out)
    }
}

/// Diagonal operator, mostly useful as a solver test fixture.
#[derive(Debug, Clone)]
pub struct Diagonal(pub Vec<f64>);

impl SymOperator for Diagonal {
    fn dim(&self) -> usize {
        self.0.len()
    }

    fn apply_into(&self, x: &[f64], out: &mut [f64]) -> Result<()> {
        check_sizes(self.0.len(), x, out)?;
        for ((o, d), v) in out.iter_mut().zip(&self.0).zip(x) {
            *o = d * v;
        }
        Ok(())
    }
}

fn check_sizes(n: usize, x: &[f64], out: &[f64]) -> Result<()> {
    if x.len() != n {
        return Err(Error::SizeMismatch {
            expected: n,
            actual: x.len(),
        });
    }
    if out.len() != n {
        return Err(Error::SizeMismatch {
            expected: n,
            actual: out.len(),
        });
    }
    Ok(())
}

#[derive(Debug, Clone)]
enum Kernel {
    Exponential {
        decay: f64,
        diag: Vec<f64>,
    },
    LMatrix {
        weight: Vec<f64>,
        corner: Vec<f64>,
    },
    Gcd {
        weight: Vec<f64>,
        jordan: Vec<f64>,
        offsets: Vec<usize>,
        divisors: Vec<u32>,
    },
}

/// Precomputed weights (and, for `C`, divisor lists and Jordan totients)
/// for fast products with an `N x N` truncation.
#[derive(Debug, Clone)]
pub struct LinearOperatorHandle {
    params: FamilyParams,
    size: usize,
    kernel: Kernel,
    underflowed: usize,
}

impl LinearOperatorHandle {
    pub fn new(params: &FamilyParams, size: usize) -> Result<Self> {
        if size == 0 {
            return Err(Error::invalid("operator size must be positive"));
        }
        if size > u32::MAX as usize {
            return Err(Error::invalid(format!("operator size {size} too large")));
        }
        check_corners(params, size)?;
        let (tau, rho) = (params.tau(), params.rho());
        let mut underflowed = 0;
        let mut flush = |v: f64| {
            if v.abs() < f64::MIN_POSITIVE {
                underflowed += 1;
                0.0
            } else {
                v
            }
        };
        let kernel = match params.family() {
            Family::A => {
                let q = params.q().expect("family A carries q");
                let diag = (0..size).map(|n| flush(q.powf(rho * n as f64))).collect();
                Kernel::Exponential {
                    decay: q.powf(0.5 * (tau + rho)),
                    diag,
                }
            }
            Family::B => {
                let (weight, corner) = (1..=size)
                    .map(|n| {
                        let n = n as f64;
                        (flush(n.powf(0.5 * (tau - rho))), flush(n.powf(-0.5 * (tau + rho))))
                    })
                    .unzip();
                Kernel::LMatrix { weight, corner }
            }
            Family::C => {
                let weight = (1..=size)
                    .map(|n| flush((n as f64).powf(-0.5 * (tau + rho))))
                    .collect();
                let jordan = jordan_totient_table(tau, size);
                if let Some(d) = jordan.iter().position(|j| !j.is_finite()) {
                    return Err(Error::EntryRange {
                        n: d as u64,
                        m: d as u64,
                        log_value: tau * (d as f64).ln(),
                    });
                }
                let (offsets, divisors) = divisor_lists(size);
                Kernel::Gcd {
                    weight,
                    jordan,
                    offsets,
                    divisors,
                }
            }
        };
        Ok(LinearOperatorHandle {
            params: *params,
            size,
            kernel,
            underflowed,
        })
    }

    pub fn params(&self) -> &FamilyParams {
        &self.params
    }

    pub fn size(&self) -> usize {
        self.size
    }

    /// Number of weights that fell below the smallest normal double and
    /// were zeroed.
    pub fn underflowed(&self) -> usize {
        self.underflowed
    }

    /// `J_tau(d)` for `d = 1..=N` (family `C` only).
    pub fn jordan_values(&self) -> Option<&[f64]> {
        match &self.kernel {
            Kernel::Gcd { jordan, .. } => Some(&jordan[1..]),
            _ => None,
        }
    }

    /// Divisors of the absolute index `n` (family `C` only).
    pub fn divisors_of(&self, n: usize) -> Option<&[u32]> {
        match &self.kernel {
            Kernel::Gcd {
                offsets, divisors, ..
            } if n >= 1 && n <= self.size => Some(&divisors[offsets[n - 1]..offsets[n]]),
            _ => None,
        }
    }
}

impl SymOperator for LinearOperatorHandle {
    fn dim(&self) -> usize {
        self.size
    }

    fn apply_into(&self, x: &[f64], out: &mut [f64]) -> Result<()> {
        check_sizes(self.size, x, out)?;
        match &self.kernel {
            Kernel::Exponential { decay, diag } => exponential_apply(*decay, diag, x, out),
            Kernel::LMatrix { weight, corner } => l_matrix_apply(weight, corner, x, out),
            Kernel::Gcd {
                weight,
                jordan,
                offsets,
                divisors,
            } => gcd_apply(weight, jordan, offsets, divisors, x, out),
        }
        Ok(())
    }
}

/// The log-entry is affine on each triangle (in `n` for `A`, in `ln n` for
/// `B`), so its maximum sits on a corner. `C` is dominated by an affine bound
/// in `ln n`: `gcd^tau <= min^tau` for `tau >= 0` (the `B` entry) and
/// `gcd^tau <= 1` otherwise.
fn check_corners(p: &FamilyParams, size: usize) -> Result<()> {
    let o = p.origin();
    let last = o + size as u64 - 1;
    let b = FamilyParams::b(p.tau(), p.rho())?;
    for (n, m) in [(o, o), (o, last), (last, last)] {
        let log_value = match p.family() {
            Family::A | Family::B => p.log_entry(n, m),
            Family::C if p.tau() >= 0.0 => b.log_entry(n, m),
            Family::C => -0.5 * (p.tau() + p.rho()) * ((n as f64).ln() + (m as f64).ln()),
        };
        if log_value > MAX_LOG_ENTRY {
            return Err(Error::EntryRange { n, m, log_value });
        }
    }
    Ok(())
}

fn exponential_apply(decay: f64, diag: &[f64], x: &[f64], out: &mut [f64]) {
    let n = x.len();
    // forward: U_k = decay * U_{k-1} + d_k x_k
    let mut acc = 0.0;
    for k in 0..n {
        acc = decay * acc + diag[k] * x[k];
        out[k] = acc;
    }
    // backward: W_k = decay * (x_{k+1} + W_{k+1})
    let mut tail = 0.0;
    for k in (0..n).rev() {
        out[k] += diag[k] * tail;
        tail = decay * (x[k] + tail);
    }
}

fn l_matrix_apply(weight: &[f64], corner: &[f64], x: &[f64], out: &mut [f64]) {
    let n = x.len();
    let mut prefix = KahanSum::new();
    for k in 0..n {
        prefix.add(weight[k] * x[k]);
        out[k] = corner[k] * prefix.value();
    }
    let mut suffix = KahanSum::new();
    for k in (0..n).rev() {
        out[k] += weight[k] * suffix.value();
        suffix.add(corner[k] * x[k]);
    }
}

fn gcd_apply(
    weight: &[f64],
    jordan: &[f64],
    offsets: &[usize],
    divisors: &[u32],
    x: &[f64],
    out: &mut [f64],
) {
    let n = x.len();
    let y: Vec<f64> = weight.iter().zip(x).map(|(w, v)| w * v).collect();
    // S_d = sum over multiples of d
    let sums: Vec<f64> = par::map(n, |i| {
        let d = i + 1;
        (d..=n)
            .step_by(d)
            .map(|m| y[m - 1])
            .collect::<KahanSum>()
            .value()
    });
    par::for_each_mut(out, |i, o| {
        let divs = &divisors[offsets[i]..offsets[i + 1]];
        let g: KahanSum = divs
            .iter()
            .map(|&d| jordan[d as usize] * sums[d as usize - 1])
            .collect();
        *o = weight[i] * g.value();
    });
}

/// CSR divisor lists of `1..=n`, each ascending.
fn divisor_lists(n: usize) -> (Vec<usize>, Vec<u32>) {
    let mut counts = vec![0usize; n + 1];
    for d in 1..=n {
        for m in (d..=n).step_by(d) {
            counts[m] += 1;
        }
    }
    let mut offsets = Vec::with_capacity(n + 1);
    offsets.push(0);
    for m in 1..=n {
        offsets.push(offsets[m - 1] + counts[m]);
    }
    let mut cursor: Vec<usize> = offsets[..n].to_vec();
    let mut divisors = vec![0u32; offsets[n]];
    for d in 1..=n {
        for m in (d..=n).step_by(d) {
            divisors[cursor[m - 1]] = d as u32;
            cursor[m - 1] += 1;
        }
    }
    (offsets, divisors)
}

fn family_check(h: &LinearOperatorHandle, family: Family) -> Result<()> {
    if h.params.family() != family {
        return Err(Error::invalid(format!(
            "handle is for family {}, not {family}",
            h.params.family()
        )));
    }
    Ok(())
}

pub fn matvec_a(h: &LinearOperatorHandle, x: &[f64]) -> Result<Vec<f64>> {
    family_check(h, Family::A)?;
    h.apply(x)
}

pub fn matvec_b(h: &LinearOperatorHandle, x: &[f64]) -> Result<Vec<f64>> {
    family_check(h, Family::B)?;
    h.apply(x)
}

pub fn matvec_c(h: &LinearOperatorHandle, x: &[f64]) -> Result<Vec<f64>> {
    family_check(h, Family::C)?;
    h.apply(x)
}

/// Checks `gcd(n,m)^tau = sum_{d | gcd(n,m)} J_tau(d)` for all `n, m <= N`
/// (and `J_tau >= 0` when `tau > 0`).
pub fn gram_factor_check(tau: f64, size: usize) -> Result<IdentityReport> {
    if size == 0 {
        return Err(Error::invalid("size must be positive"));
    }
    let jordan = jordan_totient_table(tau, size);
    let (offsets, divisors) = divisor_lists(size);
    let mut worst: Option<IdentityReport> = None;
    for n in 1..=size {
        for m in 1..=size {
            let g = gcd(n as u64, m as u64) as usize;
            let lhs = (g as f64).powf(tau);
            let rhs: KahanSum = divisors[offsets[g - 1]..offsets[g]]
                .iter()
                .map(|&d| jordan[d as usize])
                .collect();
            let r = IdentityReport::new("jordan-gram", lhs, rhs.value(), Tolerance::Relative(1e-12))
                .with_detail(format!("tau={tau}, N={size}, worst at (n,m)=({n},{m})"));
            worst = Some(match worst {
                None => r,
                Some(w) => w.worse(r),
            });
        }
    }
    let mut report = worst.expect("size >= 1");
    if tau > 0.0 {
        if let Some(d) = jordan.iter().skip(1).position(|&j| j < 0.0) {
            report.abs_discrepancy = f64::INFINITY;
            report.rel_discrepancy = f64::INFINITY;
            report.notes.detail = Some(format!("negative J_tau({}) for tau > 0", d + 1));
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::dense_truncation;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn rel_max(a: &[f64], b: &[f64]) -> f64 {
        let scale = b.iter().fold(0.0f64, |s, v| s.max(v.abs()));
        let err = a.iter().zip(b).fold(0.0f64, |s, (x, y)| s.max((x - y).abs()));
        if err == 0.0 {
            0.0
        } else {
            err / scale
        }
    }

    fn random_vec(n: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
    }

    #[test]
    fn zero_maps_to_zero() {
        for p in [
            FamilyParams::a(1.0, 1.0, 0.5).unwrap(),
            FamilyParams::b(1.0, 1.0).unwrap(),
            FamilyParams::c(-0.5, 2.0).unwrap(),
        ] {
            let h = LinearOperatorHandle::new(&p, 32).unwrap();
            assert!(h.apply(&vec![0.0; 32]).unwrap().iter().all(|&v| v == 0.0));
        }
    }

    #[test]
    fn first_basis_vector_gives_first_column() {
        let a = FamilyParams::a(0.8, 0.6, 0.3).unwrap();
        let h = LinearOperatorHandle::new(&a, 16).unwrap();
        let mut e0 = vec![0.0; 16];
        e0[0] = 1.0;
        let col = matvec_a(&h, &e0).unwrap();
        let dense = dense_truncation(&a, 16).unwrap();
        for (i, v) in col.iter().enumerate() {
            assert!((v - dense.get(i, 0)).abs() <= 1e-14 * dense.get(0, 0));
        }
        let c = FamilyParams::c(1.5, 0.5).unwrap();
        let h = LinearOperatorHandle::new(&c, 40).unwrap();
        let mut e1 = vec![0.0; 40];
        e1[0] = 1.0;
        let col = matvec_c(&h, &e1).unwrap();
        for (i, v) in col.iter().enumerate() {
            let n = (i + 1) as f64;
            assert!((v - n.powf(-1.0)).abs() < 1e-14);
        }
    }

    #[test]
    fn b_of_size_one() {
        let b = FamilyParams::b(0.3, 1.7).unwrap();
        let h = LinearOperatorHandle::new(&b, 1).unwrap();
        assert_eq!(matvec_b(&h, &[2.5]).unwrap(), vec![2.5]);
    }

    #[test]
    fn random_vectors_match_dense() {
        for (p, seed) in [
            (FamilyParams::a(1.0, 1.0, 0.5).unwrap(), 1),
            (FamilyParams::a(-0.5, 2.0, 0.5).unwrap(), 2),
            (FamilyParams::b(1.0, 1.0).unwrap(), 3),
            (FamilyParams::b(-0.5, 2.0).unwrap(), 4),
            (FamilyParams::c(-0.5, 2.0).unwrap(), 5),
            (FamilyParams::c(3.0, 2.0).unwrap(), 6),
        ] {
            let x = random_vec(64, seed);
            let h = LinearOperatorHandle::new(&p, 64).unwrap();
            let fast = h.apply(&x).unwrap();
            let dense = dense_truncation(&p, 64).unwrap().matvec(&x).unwrap();
            assert!(rel_max(&fast, &dense) < 1e-12, "{p}");
        }
    }

    #[test]
    fn wrong_family_or_size_rejected() {
        let b = FamilyParams::b(1.0, 1.0).unwrap();
        let h = LinearOperatorHandle::new(&b, 8).unwrap();
        assert!(matvec_a(&h, &[0.0; 8]).is_err());
        assert!(matches!(
            matvec_b(&h, &[0.0; 7]),
            Err(Error::SizeMismatch { expected: 8, actual: 7 })
        ));
        assert!(LinearOperatorHandle::new(&b, 0).is_err());
    }

    #[test]
    fn overflowing_operator_rejected() {
        let a = FamilyParams::a(-3.0, 1.0, 0.5).unwrap();
        assert!(matches!(
            LinearOperatorHandle::new(&a, 2000),
            Err(Error::EntryRange { .. })
        ));
        assert!(LinearOperatorHandle::new(&a, 500).is_ok());
    }

    #[test]
    fn weight_underflow_is_flagged() {
        let a = FamilyParams::a(1.0, 3.0, 0.5).unwrap();
        let h = LinearOperatorHandle::new(&a, 2000).unwrap();
        assert!(h.underflowed() > 0);
        let y = h.apply(&vec![1.0; 2000]).unwrap();
        assert!(y.iter().all(|v| v.is_finite()));
        let fine = LinearOperatorHandle::new(&a, 64).unwrap();
        assert_eq!(fine.underflowed(), 0);
    }

    #[test]
    fn divisor_lists_are_complete() {
        let c = FamilyParams::c(1.0, 1.0).unwrap();
        let h = LinearOperatorHandle::new(&c, 120).unwrap();
        assert_eq!(h.divisors_of(12).unwrap(), &[1, 2, 3, 4, 6, 12]);
        assert_eq!(h.divisors_of(97).unwrap(), &[1, 97]);
        assert!(h.divisors_of(0).is_none());
        assert!(h.divisors_of(121).is_none());
    }

    #[test]
    fn gram_examples() {
        let r = gram_factor_check(1.0, 1).unwrap();
        assert_eq!((r.lhs, r.rhs), (1.0, 1.0));
        // gcd(4,6)^1 = 2 = J_1(1) + J_1(2)
        let j = jordan_totient_table(1.0, 2);
        assert_eq!(j[1] + j[2], 2.0);
        for tau in [-1.0, -0.5, 0.5, 1.0, 2.5] {
            let r = gram_factor_check(tau, 64).unwrap();
            assert!(r.passed(), "tau={tau}: {r:?}");
        }
    }
}
