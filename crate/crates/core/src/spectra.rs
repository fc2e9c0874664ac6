//! Dense and Krylov eigensolvers plus spectral diagnostics.
//!
//! The dense solver is two-sided Jacobi in round-robin order: each round
//! rotates `N/2` disjoint index pairs at once, so a round is one row pass
//! and one column pass over the matrix, both data-parallel.

use std::ops::RangeInclusive;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::families::DenseSymMatrix;
use crate::fastops::SymOperator;
use crate::par;

/// Relative threshold below which an eigenvalue counts as zero.
pub const DEFAULT_ZERO_TOL: f64 = 1e-10;
pub const MAX_DENSE_SIZE: usize = 2048;
pub const JACOBI_SWEEP_CAP: usize = 30;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Inertia {
    pub n_pos: usize,
    pub n_neg: usize,
    pub n_zero: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralSummary {
    /// Sorted descending.
    pub eigenvalues: Vec<f64>,
    pub n_pos: usize,
    pub n_neg: usize,
    pub n_zero: usize,
    /// Sum of the diagonal of the input matrix.
    pub trace: f64,
    /// Frobenius norm of the input matrix.
    pub frobenius: f64,
}

impl SpectralSummary {
    pub fn new(mut eigenvalues: Vec<f64>, trace: f64, frobenius: f64) -> Self {
        eigenvalues.sort_by(|a, b| b.total_cmp(a));
        let i = count_signs(&eigenvalues, DEFAULT_ZERO_TOL);
        SpectralSummary {
            eigenvalues,
            n_pos: i.n_pos,
            n_neg: i.n_neg,
            n_zero: i.n_zero,
            trace,
            frobenius,
        }
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn max(&self) -> f64 {
        self.eigenvalues.first().copied().unwrap_or(f64::NAN)
    }

    pub fn min(&self) -> f64 {
        self.eigenvalues.last().copied().unwrap_or(f64::NAN)
    }

    pub fn spectral_radius(&self) -> f64 {
        self.max().abs().max(self.min().abs())
    }
}

fn count_signs(values: &[f64], tol: f64) -> Inertia {
    let scale = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let cut = tol * scale;
    let mut i = Inertia {
        n_pos: 0,
        n_neg: 0,
        n_zero: 0,
    };
    for &v in values {
        if v.abs() <= cut {
            i.n_zero += 1;
        } else if v > 0.0 {
            i.n_pos += 1;
        } else {
            i.n_neg += 1;
        }
    }
    i
}

/// Sign counts with `|lambda| <= tol * max |lambda|` counted as zero.
pub fn inertia(s: &SpectralSummary, tol: f64) -> Result<Inertia> {
    if !(tol >= 0.0) {
        return Err(Error::invalid(format!("inertia tolerance must be >= 0, got {tol}")));
    }
    Ok(count_signs(&s.eigenvalues, tol))
}

/// Eigenvalues (descending) and orthonormal eigenvectors.
#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    pub values: Vec<f64>,
    /// Row-major `N x N`; column `k` is the eigenvector of `values[k]`.
    pub vectors: Vec<f64>,
    pub sweeps: usize,
    /// Off-diagonal Frobenius mass left at convergence.
    pub off_norm: f64,
}

impl EigenDecomposition {
    pub fn size(&self) -> usize {
        self.values.len()
    }

    pub fn vector(&self, k: usize) -> Vec<f64> {
        let n = self.size();
        (0..n).map(|i| self.vectors[i * n + k]).collect()
    }
}

pub fn eig_dense(m: &DenseSymMatrix) -> Result<SpectralSummary> {
    let (values, _, _, _) = jacobi(m, false)?;
    Ok(SpectralSummary::new(values, m.trace(), m.frobenius()))
}

pub fn eig_dense_full(m: &DenseSymMatrix) -> Result<EigenDecomposition> {
    let (values, vectors, sweeps, off_norm) = jacobi(m, true)?;
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]));
    let vectors = vectors.expect("vectors requested");
    let mut sorted = vec![0.0; n * n];
    for i in 0..n {
        for (k, &src) in order.iter().enumerate() {
            sorted[i * n + k] = vectors[i * n + src];
        }
    }
    Ok(EigenDecomposition {
        values: order.iter().map(|&k| values[k]).collect(),
        vectors: sorted,
        sweeps,
        off_norm,
    })
}

#[derive(Clone, Copy)]
struct Rotation {
    partner: usize,
    c: f64,
    s: f64,
    /// true when this index is the `p` (first) member of its pair
    first: bool,
}

type JacobiOutput = (Vec<f64>, Option<Vec<f64>>, usize, f64);

fn jacobi(m: &DenseSymMatrix, want_vectors: bool) -> Result<JacobiOutput> {
    let n = m.size();
    if n > MAX_DENSE_SIZE {
        return Err(Error::invalid(format!(
            "dense eigensolver limited to N <= {MAX_DENSE_SIZE}, got {n}"
        )));
    }
    let mut a = m.as_slice().to_vec();
    let mut scratch = vec![0.0; n * n];
    let mut v = want_vectors.then(|| {
        let mut id = vec![0.0; n * n];
        (0..n).for_each(|i| id[i * n + i] = 1.0);
        id
    });
    let players = n + n % 2;
    let mut ring: Vec<usize> = (0..players).collect();
    let mut plan: Vec<Option<Rotation>> = vec![None; n];

    for sweep in 0..=JACOBI_SWEEP_CAP {
        let mut rotated = false;
        for _round in 0..players.saturating_sub(1) {
            plan.iter_mut().for_each(|r| *r = None);
            let mut any = false;
            for i in 0..players / 2 {
                let (p, q) = (ring[i].min(ring[players - 1 - i]), ring[i].max(ring[players - 1 - i]));
                if q >= n {
                    continue;
                }
                if let Some((c, s)) = rotation_for(a[p * n + p], a[q * n + q], a[p * n + q]) {
                    plan[p] = Some(Rotation { partner: q, c, s, first: true });
                    plan[q] = Some(Rotation { partner: p, c, s, first: false });
                    any = true;
                }
            }
            ring[1..].rotate_right(1);
            if !any {
                continue;
            }
            if sweep == JACOBI_SWEEP_CAP {
                return Err(Error::NoConvergence {
                    solver: "jacobi",
                    iterations: sweep,
                });
            }
            rotated = true;
            // rows: scratch = J^T a
            {
                let a_ref = &a;
                let plan_ref = &plan;
                par::for_each_row(&mut scratch, n, |i, row| match plan_ref[i] {
                    None => row.copy_from_slice(&a_ref[i * n..(i + 1) * n]),
                    Some(r) => {
                        let own = &a_ref[i * n..(i + 1) * n];
                        let other = &a_ref[r.partner * n..(r.partner + 1) * n];
                        let s = if r.first { -r.s } else { r.s };
                        for ((x, &o), &t) in row.iter_mut().zip(own).zip(other) {
                            *x = r.c * o + s * t;
                        }
                    }
                });
            }
            // columns: scratch = scratch J, and v = v J
            rotate_columns(&mut scratch, n, &plan);
            if let Some(v) = v.as_mut() {
                rotate_columns(v, n, &plan);
            }
            for (i, r) in plan.iter().enumerate() {
                if let Some(r) = r {
                    if r.first {
                        scratch[i * n + r.partner] = 0.0;
                        scratch[r.partner * n + i] = 0.0;
                    }
                }
            }
            std::mem::swap(&mut a, &mut scratch);
        }
        if !rotated {
            let values: Vec<f64> = (0..n).map(|i| a[i * n + i]).collect();
            let off = off_diagonal_norm(&a, n);
            return Ok((values, v, sweep, off));
        }
    }
    Err(Error::NoConvergence {
        solver: "jacobi",
        iterations: JACOBI_SWEEP_CAP,
    })
}

/// `(c, s)` annihilating `a_pq`, or `None` when `a_pq` is negligible
/// against the diagonal (relative-accuracy criterion).
fn rotation_for(app: f64, aqq: f64, apq: f64) -> Option<(f64, f64)> {
    if apq == 0.0 || apq.abs() <= f64::EPSILON * (app.abs() * aqq.abs()).sqrt() {
        return None;
    }
    let theta = (aqq - app) / (2.0 * apq);
    let t = if theta.is_infinite() {
        0.5 / theta
    } else {
        theta.signum() / (theta.abs() + theta.hypot(1.0))
    };
    let c = 1.0 / t.hypot(1.0);
    Some((c, t * c))
}

fn rotate_columns(buf: &mut [f64], n: usize, plan: &[Option<Rotation>]) {
    par::for_each_row(buf, n, |_, row| {
        for (p, r) in plan.iter().enumerate() {
            if let Some(r) = r {
                if r.first {
                    let (bp, bq) = (row[p], row[r.partner]);
                    row[p] = r.c * bp - r.s * bq;
                    row[r.partner] = r.s * bp + r.c * bq;
                }
            }
        }
    });
}

fn off_diagonal_norm(a: &[f64], n: usize) -> f64 {
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += a[i * n + j] * a[i * n + j];
            }
        }
    }
    s.sqrt()
}

/// Which rows of the eigenvector matrix a tridiagonal solve accumulates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Track {
    None,
    LastRow,
    Full,
}

/// Eigenvalues (ascending) of a symmetric tridiagonal matrix and the
/// tracked rows of its eigenvector matrix (row `k`, column `j` is component
/// `k` of eigenvector `j`).
#[derive(Debug, Clone)]
pub struct TridiagonalEigen {
    pub values: Vec<f64>,
    pub rows: Vec<Vec<f64>>,
}

/// Implicit QL with Wilkinson-type shifts (after EISPACK `tql2`).
pub fn tridiagonal_eigen(diag: &[f64], off: &[f64], track: Track) -> Result<TridiagonalEigen> {
    let n = diag.len();
    if n == 0 || off.len() + 1 != n {
        return Err(Error::invalid("tridiagonal needs len(off) = len(diag) - 1 >= 0"));
    }
    if diag.iter().chain(off).any(|v| !v.is_finite()) {
        return Err(Error::invalid("tridiagonal entries must be finite"));
    }
    // work on the matrix scaled to unit max entry so products of two
    // entries cannot overflow
    let big = diag.iter().chain(off).fold(0.0f64, |m, v| m.max(v.abs()));
    let unit = if big > 0.0 { big } else { 1.0 };
    let mut d: Vec<f64> = diag.iter().map(|v| v / unit).collect();
    let mut e: Vec<f64> = off
        .iter()
        .map(|v| v / unit)
        .chain(std::iter::once(0.0))
        .collect();
    let tracked: Vec<usize> = match track {
        Track::None => Vec::new(),
        Track::LastRow => vec![n - 1],
        Track::Full => (0..n).collect(),
    };
    let mut z: Vec<Vec<f64>> = tracked
        .iter()
        .map(|&k| {
            let mut row = vec![0.0; n];
            row[k] = 1.0;
            row
        })
        .collect();

    let eps = f64::EPSILON;
    let mut f = 0.0;
    let mut tst1 = 0.0f64;
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n - 1 && e[m].abs() > eps * tst1 {
            m += 1;
        }
        if m > l {
            let mut iter = 0;
            loop {
                iter += 1;
                if iter > 100 {
                    return Err(Error::NoConvergence {
                        solver: "tridiagonal QL",
                        iterations: iter,
                    });
                }
                let mut g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = p.hypot(1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in d.iter_mut().skip(l + 2) {
                    *di -= h;
                }
                f += h;

                p = d[m];
                let (mut c, mut c2, mut c3) = (1.0, 1.0, 1.0);
                let el1 = e[l + 1];
                let (mut s, mut s2) = (0.0, 0.0);
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    for row in z.iter_mut() {
                        let hz = row[i + 1];
                        row[i + 1] = s * row[i] + c * hz;
                        row[i] = c * row[i] - s * hz;
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| d[a].total_cmp(&d[b]));
    Ok(TridiagonalEigen {
        values: order.iter().map(|&k| d[k] * unit).collect(),
        rows: z
            .into_iter()
            .map(|row| order.iter().map(|&k| row[k]).collect())
            .collect(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RitzValue {
    pub value: f64,
    /// `||A v - value v|| / ||v||`.
    pub residual: f64,
}

/// Spectrum ends whose Ritz residuals decide convergence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Which {
    #[default]
    Both,
    Largest,
    Smallest,
}

#[derive(Debug, Clone)]
pub struct LanczosOptions {
    /// Extremes requested at each end of the spectrum.
    pub k: usize,
    pub max_iter: usize,
    /// Residual target relative to the largest Ritz magnitude.
    pub tol: f64,
    pub seed: u64,
    pub start: Option<Vec<f64>>,
    pub want_vectors: bool,
    pub check_every: usize,
    pub which: Which,
}

impl Default for LanczosOptions {
    fn default() -> Self {
        LanczosOptions {
            k: 1,
            max_iter: 300,
            tol: 1e-10,
            seed: 0,
            start: None,
            want_vectors: false,
            check_every: 5,
            which: Which::Both,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LanczosResult {
    /// Largest Ritz values, descending.
    pub top: Vec<RitzValue>,
    /// Smallest Ritz values, ascending.
    pub bottom: Vec<RitzValue>,
    pub iterations: usize,
    pub converged: bool,
    /// An exactly invariant Krylov subspace was reached.
    pub breakdown: bool,
    #[serde(skip)]
    pub top_vector: Option<Vec<f64>>,
    #[serde(skip)]
    pub bottom_vector: Option<Vec<f64>>,
}

/// Top-`k` and bottom-`k` eigenvalue estimates with default options.
pub fn lanczos_extremes(op: &dyn SymOperator, k: usize, max_iter: usize) -> Result<LanczosResult> {
    lanczos(
        op,
        &LanczosOptions {
            k,
            max_iter,
            ..LanczosOptions::default()
        },
    )
}

/// Lanczos with full (twice-applied classical Gram-Schmidt)
/// reorthogonalization of the Krylov basis.
pub fn lanczos(op: &dyn SymOperator, opts: &LanczosOptions) -> Result<LanczosResult> {
    let n = op.dim();
    if n == 0 || opts.k == 0 || opts.max_iter == 0 {
        return Err(Error::invalid("lanczos needs N >= 1, k >= 1, max_iter >= 1"));
    }
    let mut q0 = match &opts.start {
        Some(s) if s.len() != n => {
            return Err(Error::SizeMismatch {
                expected: n,
                actual: s.len(),
            })
        }
        Some(s) if norm(s) > 0.0 => s.clone(),
        _ => {
            let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
            (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
        }
    };
    let q0_norm = norm(&q0);
    scale(&mut q0, 1.0 / q0_norm);

    let steps = opts.max_iter.min(n);
    let mut basis: Vec<Vec<f64>> = vec![q0];
    let mut alphas: Vec<f64> = Vec::new();
    let mut betas: Vec<f64> = Vec::new();
    let mut w = vec![0.0; n];
    let mut converged = false;
    let mut breakdown = false;
    let mut anorm = 0.0f64;
    let mut last_check: Option<TridiagonalEigen> = None;

    for j in 0..steps {
        op.apply_into(&basis[j], &mut w)?;
        if w.iter().any(|v| !v.is_finite()) {
            return Err(Error::Overflow(format!(
                "operator output left the f64 range at Lanczos step {j}"
            )));
        }
        let alpha = dot(&w, &basis[j]);
        axpy(&mut w, -alpha, &basis[j]);
        if j > 0 {
            axpy(&mut w, -betas[j - 1], &basis[j - 1]);
        }
        for _ in 0..2 {
            let coeffs: Vec<f64> = par::map_slice(&basis, |b| dot(b, &w));
            for (b, c) in basis.iter().zip(&coeffs) {
                axpy(&mut w, -c, b);
            }
        }
        alphas.push(alpha);
        let beta = norm(&w);
        anorm = anorm.max(alpha.abs() + beta + betas.last().copied().unwrap_or(0.0));

        let last = j + 1 == steps;
        let invariant = beta <= 1e-14 * anorm.max(f64::MIN_POSITIVE);
        if invariant || last || (j + 1) % opts.check_every.max(1) == 0 {
            let t = tridiagonal_eigen(&alphas, &betas, Track::LastRow)?;
            let done = ritz_converged(&t, beta, opts.k, opts.tol, opts.which);
            last_check = Some(t);
            if invariant {
                breakdown = j + 1 < n;
                converged = true;
                betas.push(beta);
                break;
            }
            if done {
                converged = true;
                betas.push(beta);
                break;
            }
        }
        betas.push(beta);
        if last {
            break;
        }
        scale(&mut w, 1.0 / beta);
        basis.push(w.clone());
    }

    let m = alphas.len();
    let beta_last = betas.get(m - 1).copied().unwrap_or(0.0);
    let offdiag = &betas[..m - 1];
    let track = if opts.want_vectors { Track::Full } else { Track::LastRow };
    let t = match (track, last_check) {
        (Track::LastRow, Some(t)) if t.values.len() == m => t,
        _ => tridiagonal_eigen(&alphas, offdiag, track)?,
    };
    let last_row = t.rows.last().expect("tracked rows");
    let kk = opts.k.min(m);
    let ritz = |idx: usize| RitzValue {
        value: t.values[idx],
        residual: (beta_last * last_row[idx]).abs(),
    };
    let top: Vec<RitzValue> = (0..kk).map(|i| ritz(m - 1 - i)).collect();
    let bottom: Vec<RitzValue> = (0..kk).map(ritz).collect();

    let (mut top_vector, mut bottom_vector) = (None, None);
    if opts.want_vectors {
        let combine = |col: usize| {
            let mut x = vec![0.0; n];
            for (i, b) in basis.iter().take(m).enumerate() {
                axpy(&mut x, t.rows[i][col], b);
            }
            x
        };
        top_vector = Some(combine(m - 1));
        bottom_vector = Some(combine(0));
    }
    Ok(LanczosResult {
        top,
        bottom,
        iterations: m,
        converged,
        breakdown,
        top_vector,
        bottom_vector,
    })
}

fn ritz_converged(t: &TridiagonalEigen, beta: f64, k: usize, tol: f64, which: Which) -> bool {
    let m = t.values.len();
    if m < k {
        return false;
    }
    let row = &t.rows[0];
    let scale = t.values[0].abs().max(t.values[m - 1].abs());
    let small = |idx: usize| (beta * row[idx]).abs() <= tol * scale;
    (0..k).all(|i| match which {
        Which::Both => small(m - 1 - i) && small(i),
        Which::Largest => small(m - 1 - i),
        Which::Smallest => small(i),
    })
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Euclidean norm, rescaled so that entries near the top of the `f64`
/// range do not overflow when squared.
fn norm(a: &[f64]) -> f64 {
    let big = a.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if big == 0.0 || !big.is_finite() {
        return big;
    }
    let inv = 1.0 / big;
    big * a.iter().map(|v| (v * inv) * (v * inv)).sum::<f64>().sqrt()
}

#[inline]
fn axpy(y: &mut [f64], a: f64, x: &[f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

#[inline]
fn scale(y: &mut [f64], a: f64) {
    y.iter_mut().for_each(|v| *v *= a);
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DecayModel {
    /// `ln lambda_n` linear in `n`.
    Exponential,
    /// `ln lambda_n` linear in `ln n`.
    Power,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub model: DecayModel,
    /// Slope of the regression line.
    pub rate: f64,
    pub intercept: f64,
    /// 1-based eigenvalue ranks, inclusive.
    pub fit_range: (usize, usize),
    /// RMS residual in the model's log coordinates.
    pub residual: f64,
}

/// Least-squares line through `(x(n), ln lambda_n)` for the ranks in `range`
/// (1-based, descending order).
pub fn decay_fit(
    s: &SpectralSummary,
    model: DecayModel,
    range: RangeInclusive<usize>,
) -> Result<DecayFit> {
    let (lo, hi) = (*range.start(), *range.end());
    if lo == 0 || lo > hi || hi > s.len() {
        return Err(Error::invalid(format!(
            "fit range {lo}..={hi} invalid for {} eigenvalues",
            s.len()
        )));
    }
    let mut xs = Vec::with_capacity(hi - lo + 1);
    let mut ys = Vec::with_capacity(hi - lo + 1);
    for rank in lo..=hi {
        let lambda = s.eigenvalues[rank - 1];
        if !(lambda > 0.0) {
            return Err(Error::Domain(format!("eigenvalue {rank} is {lambda}, not positive")));
        }
        xs.push(match model {
            DecayModel::Exponential => rank as f64,
            DecayModel::Power => (rank as f64).ln(),
        });
        ys.push(lambda.ln());
    }
    let count = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / count;
    let my = ys.iter().sum::<f64>() / count;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let rate = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let intercept = my - rate * mx;
    let sse: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - intercept - rate * x).powi(2))
        .sum();
    Ok(DecayFit {
        model,
        rate,
        intercept,
        fit_range: (lo, hi),
        residual: (sse / count).sqrt(),
    })
}
