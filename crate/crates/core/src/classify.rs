//! Analytic classification of `(tau, rho)` parameter points, an empirical
//! growth scan of truncated spectra, unboundedness witnesses and the
//! region diagram.

use std::fmt::{self, Write as _};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::families::{entry, Family, FamilyParams};
use crate::fastops::{LinearOperatorHandle, SymOperator};
use crate::par;
use crate::spectra::{lanczos, LanczosOptions, Which};

/// Half-width of the band around the analytic threshold lines whose grid
/// points are left out of the agreement metric.
pub const BOUNDARY_BAND: f64 = 0.1;
/// Relative spread of the last three sizes below which a point is
/// tagged bounded.
pub const SATURATION_SPREAD: f64 = 0.01;
/// `lambda(N_max) / lambda(N_max / 4)` above which growth counts.
pub const GROWTH_RATIO: f64 = 1.05;
/// Successive increments shrinking faster than this factor indicate
/// convergence rather than growth.
pub const SATURATION_DECAY: f64 = 0.8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TriState {
    Yes,
    No,
    Unknown,
}

impl From<bool> for TriState {
    fn from(b: bool) -> Self {
        if b {
            TriState::Yes
        } else {
            TriState::No
        }
    }
}

impl fmt::Display for TriState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TriState::Yes => "yes",
            TriState::No => "no",
            TriState::Unknown => "unknown",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassVerdict {
    pub psd: bool,
    pub bounded: bool,
    pub compact: bool,
    pub trace_class: TriState,
}

/// Operator-level verdict for the infinite matrix.
pub fn analytic_classification(p: &FamilyParams) -> ClassVerdict {
    let (tau, rho) = (p.tau(), p.rho());
    let psd = tau >= 0.0;
    let (bounded, compact, trace_class) = match p.family() {
        Family::A | Family::B => {
            let edge = if p.family() == Family::A { 0.0 } else { 1.0 };
            let bounded = (tau > 0.0 && rho >= edge)
                || (tau == 0.0 && rho > edge)
                || (tau < 0.0 && rho + tau > edge);
            let compact = bounded && !(tau > 0.0 && rho == edge);
            (bounded, compact, TriState::from(compact))
        }
        Family::C => {
            let bounded = (tau > 0.0 && rho > 0.0 && rho + tau > 1.0)
                || (tau > 0.0 && rho == 0.0 && tau > 2.0)
                || (tau == 0.0 && rho > 1.0)
                || (tau < 0.0 && rho + tau > 1.0);
            let compact = bounded && !(rho == 0.0 && tau > 2.0);
            let trace_class = if tau > 0.0 {
                TriState::from(rho > 1.0)
            } else {
                // tau < 0: exactly when bounded; tau = 0: bounded means rank one
                TriState::from(bounded)
            };
            (bounded, compact, trace_class)
        }
    };
    ClassVerdict {
        psd,
        bounded,
        compact,
        trace_class,
    }
}

/// The compact region is `{rho > a} ∩ {rho + tau > b}`; returns `(a, b)`.
pub fn compact_region(family: Family) -> (f64, f64) {
    match family {
        Family::A => (0.0, 0.0),
        Family::B => (1.0, 1.0),
        Family::C => (0.0, 1.0),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EmpiricalTag {
    Bounded,
    Unbounded,
    Inconclusive,
}

impl fmt::Display for EmpiricalTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EmpiricalTag::Bounded => "bounded",
            EmpiricalTag::Unbounded => "unbounded",
            EmpiricalTag::Inconclusive => "inconclusive",
        })
    }
}

/// Growth tag from spectral radii at increasing sizes (each size double
/// the previous one).
pub fn growth_tag(radii: &[f64]) -> EmpiricalTag {
    let k = radii.len();
    if k < 3 || radii.iter().any(|r| !r.is_finite()) {
        return EmpiricalTag::Inconclusive;
    }
    let last3 = &radii[k - 3..];
    let hi = last3.iter().fold(f64::MIN, |a, &b| a.max(b));
    let lo = last3.iter().fold(f64::MAX, |a, &b| a.min(b));
    if hi > 0.0 && (hi - lo) <= SATURATION_SPREAD * hi {
        return EmpiricalTag::Bounded;
    }
    let ratio = radii[k - 1] / radii[k - 3];
    let d_last = radii[k - 1] - radii[k - 2];
    let d_prev = radii[k - 2] - radii[k - 3];
    let saturating = d_prev > 0.0 && d_last < SATURATION_DECAY * d_prev;
    if ratio > GROWTH_RATIO && !saturating {
        EmpiricalTag::Unbounded
    } else {
        EmpiricalTag::Inconclusive
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionVerdict {
    pub family: Family,
    pub tau: f64,
    pub rho: f64,
    pub analytic: ClassVerdict,
    pub empirical: EmpiricalTag,
    /// `(N, lambda_max)` for every size reached before entries overflow.
    pub lambda_max_by_size: Vec<(usize, f64)>,
    pub lambda_min_by_size: Vec<(usize, f64)>,
    /// Within the boundary band of an analytic threshold line.
    pub excluded: bool,
}

impl RegionVerdict {
    /// Empirical tag agrees with the analytic bounded verdict; `None` when
    /// excluded or inconclusive.
    pub fn agrees(&self) -> Option<bool> {
        if self.excluded {
            return None;
        }
        match self.empirical {
            EmpiricalTag::Inconclusive => None,
            EmpiricalTag::Bounded => Some(self.analytic.bounded),
            EmpiricalTag::Unbounded => Some(!self.analytic.bounded),
        }
    }

    pub fn lambda_max_last(&self) -> f64 {
        self.lambda_max_by_size.last().map_or(f64::NAN, |v| v.1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub min: f64,
    pub max: f64,
    pub steps: usize,
}

impl Axis {
    pub fn new(min: f64, max: f64, steps: usize) -> Result<Self> {
        if !(min.is_finite() && max.is_finite()) || steps == 0 || (steps > 1 && min >= max) {
            return Err(Error::invalid(format!(
                "axis needs min < max and steps >= 1, got [{min}, {max}] x {steps}"
            )));
        }
        Ok(Axis { min, max, steps })
    }

    pub fn values(&self) -> Vec<f64> {
        if self.steps == 1 {
            return vec![self.min];
        }
        let last = (self.steps - 1) as f64;
        (0..self.steps)
            .map(|i| self.min + (self.max - self.min) * i as f64 / last)
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanConfig {
    pub family: Family,
    /// Base for family `A`.
    pub q: Option<f64>,
    pub tau: Axis,
    pub rho: Axis,
    pub sizes: Vec<usize>,
    pub band: f64,
    pub max_iter: usize,
    pub tol: f64,
    pub seed: u64,
}

impl ScanConfig {
    /// 15 x 15 grid over `[-2.5, 2.5]^2`, sizes `2^6 .. 2^12`, `q = 0.5`
    /// for family `A`.
    pub fn standard(family: Family) -> Self {
        let axis = Axis {
            min: -2.5,
            max: 2.5,
            steps: 15,
        };
        ScanConfig {
            family,
            q: (family == Family::A).then_some(0.5),
            tau: axis,
            rho: axis,
            sizes: (6..=12).map(|k| 1usize << k).collect(),
            band: BOUNDARY_BAND,
            max_iter: 200,
            tol: 1e-8,
            seed: 0,
        }
    }

    fn params(&self, tau: f64, rho: f64) -> Result<FamilyParams> {
        FamilyParams::new(self.family, tau, rho, self.q)
    }
}

/// Whether the analytic bounded verdict changes within `band` of the point
/// (sampled on the axes, the diagonals and eight further directions).
pub fn near_threshold(p: &FamilyParams, band: f64) -> Result<bool> {
    let here = analytic_classification(p).bounded;
    for k in 0..16 {
        let angle = std::f64::consts::PI * k as f64 / 8.0;
        for radius in [0.5 * band, band] {
            let probe = p.with_tau_rho(p.tau() + radius * angle.sin(), p.rho() + radius * angle.cos())?;
            if analytic_classification(&probe).bounded != here {
                return Ok(true);
            }
        }
    }
    Ok(false)
}

fn pad(v: &[f64], n: usize) -> Vec<f64> {
    let mut out = v.to_vec();
    out.resize(n, 0.0);
    out
}

fn overflowed(e: &Error) -> bool {
    matches!(e, Error::EntryRange { .. } | Error::Overflow(_))
}

/// `(N, value)` pairs in increasing `N`.
pub type SizeSeries = Vec<(usize, f64)>;

/// `(N, lambda_max)` and `(N, lambda_min)` across `sizes`, each Lanczos run
/// warm-started from the previous size's extreme Ritz vector so that the
/// estimates inherit the monotonicity of the truncated spectra.
pub fn extreme_eigenvalues_by_size(
    p: &FamilyParams,
    sizes: &[usize],
    max_iter: usize,
    tol: f64,
    seed: u64,
) -> Result<(SizeSeries, SizeSeries)> {
    let mut tops = Vec::new();
    let mut bottoms = Vec::new();
    let mut top_vec: Option<Vec<f64>> = None;
    let mut bottom_vec: Option<Vec<f64>> = None;
    for &n in sizes {
        let h = match LinearOperatorHandle::new(p, n) {
            Ok(h) => h,
            Err(e) if overflowed(&e) => break,
            Err(e) => return Err(e),
        };
        let opts = |start: &Option<Vec<f64>>, which: Which| LanczosOptions {
            k: 1,
            max_iter,
            tol,
            seed,
            start: start.as_ref().map(|v| pad(v, n)),
            want_vectors: true,
            check_every: 5,
            which,
        };
        let run = lanczos(&h, &opts(&top_vec, Which::Largest))?;
        tops.push((n, run.top[0].value));
        top_vec = run.top_vector;
        if p.tau() < 0.0 {
            let low = lanczos(&h, &opts(&bottom_vec, Which::Smallest))?;
            bottoms.push((n, low.bottom[0].value));
            bottom_vec = low.bottom_vector;
        } else {
            bottoms.push((n, run.bottom[0].value));
        }
    }
    Ok((tops, bottoms))
}

/// Classifies one grid point from the growth of its spectral radius.
pub fn scan_point(config: &ScanConfig, tau: f64, rho: f64) -> Result<RegionVerdict> {
    let p = config.params(tau, rho)?;
    let (tops, bottoms) =
        extreme_eigenvalues_by_size(&p, &config.sizes, config.max_iter, config.tol, config.seed)?;
    let radii: Vec<f64> = tops
        .iter()
        .zip(&bottoms)
        .map(|(t, b)| t.1.abs().max(b.1.abs()))
        .collect();
    Ok(RegionVerdict {
        family: config.family,
        tau,
        rho,
        analytic: analytic_classification(&p),
        empirical: growth_tag(&radii),
        lambda_max_by_size: tops,
        lambda_min_by_size: bottoms,
        excluded: near_threshold(&p, config.band)?,
    })
}

/// Parallel map over the grid (rho fastest), ordered by grid index.
pub fn empirical_scan(config: &ScanConfig) -> Result<Vec<RegionVerdict>> {
    if config.sizes.is_empty() || config.sizes.contains(&0) {
        return Err(Error::invalid("scan sizes must be positive"));
    }
    let points: Vec<(f64, f64)> = config
        .tau
        .values()
        .into_iter()
        .flat_map(|t| config.rho.values().into_iter().map(move |r| (t, r)))
        .collect();
    par::map_slice(&points, |&(t, r)| scan_point(config, t, r))
        .into_iter()
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Agreement {
    pub agreed: usize,
    pub compared: usize,
    pub inconclusive: usize,
    pub excluded: usize,
}

impl Agreement {
    pub fn of(verdicts: &[RegionVerdict]) -> Self {
        let mut a = Agreement {
            agreed: 0,
            compared: 0,
            inconclusive: 0,
            excluded: 0,
        };
        for v in verdicts {
            if v.excluded {
                a.excluded += 1;
            } else if let Some(ok) = v.agrees() {
                a.compared += 1;
                a.agreed += usize::from(ok);
            } else {
                a.inconclusive += 1;
            }
        }
        a
    }

    pub fn fraction(&self) -> f64 {
        if self.compared == 0 {
            f64::NAN
        } else {
            self.agreed as f64 / self.compared as f64
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WitnessKind {
    /// Rayleigh quotient of the last basis vector (the diagonal entry).
    Diagonal,
    /// Euclidean norm of the first column.
    Column,
    /// Rayleigh quotient of `x_n = n^{-sigma}`.
    Power,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WitnessReport {
    pub family: Family,
    pub tau: f64,
    pub rho: f64,
    pub kind: WitnessKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigma: Option<f64>,
    pub values: Vec<(usize, f64)>,
    /// Strictly increasing with a final increment that is not collapsing.
    pub growing: bool,
}

/// Picks the witness family that certifies unboundedness of `p`.
pub fn witness_kind(p: &FamilyParams) -> Result<(WitnessKind, Option<f64>)> {
    let (tau, rho) = (p.tau(), p.rho());
    if analytic_classification(p).bounded {
        return Err(Error::Domain(format!("{p} is bounded; no unboundedness witness exists")));
    }
    let column_diverges = match p.family() {
        Family::A => tau + rho <= 0.0,
        Family::B | Family::C => tau + rho <= 1.0,
    };
    if column_diverges {
        return Ok((WitnessKind::Column, None));
    }
    if p.family() == Family::B && tau > 0.0 && rho < 1.0 {
        return Ok((WitnessKind::Power, Some(0.5 * (0.5 + (1.0 - 0.5 * rho)))));
    }
    if rho < 0.0 {
        return Ok((WitnessKind::Diagonal, None));
    }
    Err(Error::Unsupported(format!(
        "no column, diagonal or power witness implemented for {p}"
    )))
}

/// Evaluates the witness of [`witness_kind`] (or the power witness with a
/// caller-chosen `sigma`, family `B` only) at each size.
pub fn unboundedness_witness(
    p: &FamilyParams,
    sizes: &[usize],
    sigma: Option<f64>,
) -> Result<WitnessReport> {
    let (mut kind, mut chosen_sigma) = witness_kind(p)?;
    if let Some(s) = sigma {
        if p.family() != Family::B {
            return Err(Error::invalid("the power witness applies to family B"));
        }
        if !(s > 0.5 && s < 1.0 - 0.5 * p.rho()) {
            return Err(Error::Domain(format!(
                "sigma must lie in (1/2, 1 - rho/2) = (0.5, {}), got {s}",
                1.0 - 0.5 * p.rho()
            )));
        }
        kind = WitnessKind::Power;
        chosen_sigma = Some(s);
    }
    if sizes.is_empty() || sizes.contains(&0) {
        return Err(Error::invalid("witness sizes must be positive"));
    }
    let origin = p.origin();
    let mut values = Vec::with_capacity(sizes.len());
    for &n in sizes {
        let value = match kind {
            WitnessKind::Diagonal => {
                let last = origin + n as u64 - 1;
                entry(p, last, last)?
            }
            WitnessKind::Column => {
                let column = par::map(n, |i| entry(p, origin + i as u64, origin));
                let mut s = 0.0;
                for c in column {
                    s += c?.powi(2);
                }
                s.sqrt()
            }
            WitnessKind::Power => {
                let s = chosen_sigma.expect("power witness has sigma");
                let h = LinearOperatorHandle::new(p, n)?;
                let x: Vec<f64> = (1..=n).map(|k| (k as f64).powf(-s)).collect();
                let y = h.apply(&x)?;
                let num: f64 = x.iter().zip(&y).map(|(a, b)| a * b).sum();
                let den: f64 = x.iter().map(|a| a * a).sum();
                num / den
            }
        };
        values.push((n, value));
    }
    let increasing = values.windows(2).all(|w| w[1].1 > w[0].1);
    let k = values.len();
    let collapsing = k >= 3 && {
        let d_last = values[k - 1].1 - values[k - 2].1;
        let d_prev = values[k - 2].1 - values[k - 3].1;
        d_last < 0.5 * SATURATION_DECAY * d_prev
    };
    Ok(WitnessReport {
        family: p.family(),
        tau: p.tau(),
        rho: p.rho(),
        kind,
        sigma: chosen_sigma,
        growing: k >= 2 && increasing && !collapsing,
        values,
    })
}

/// One CSV row of the region dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Figure1Row {
    pub family: Family,
    pub tau: f64,
    pub rho: f64,
    pub psd: bool,
    pub bounded: bool,
    pub compact: bool,
    pub trace_class: TriState,
    pub empirical: EmpiricalTag,
    pub lmax_last: f64,
}

impl From<&RegionVerdict> for Figure1Row {
    fn from(v: &RegionVerdict) -> Self {
        Figure1Row {
            family: v.family,
            tau: v.tau,
            rho: v.rho,
            psd: v.analytic.psd,
            bounded: v.analytic.bounded,
            compact: v.analytic.compact,
            trace_class: v.analytic.trace_class,
            empirical: v.empirical,
            lmax_last: v.lambda_max_last(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Figure1 {
    pub verdicts: Vec<RegionVerdict>,
    pub rows: Vec<Figure1Row>,
    pub svg: String,
}

/// Scans a `resolution x resolution` grid and draws the analytic region
/// with the empirical tags on top.
pub fn figure1_dataset(family: Family, resolution: usize, base: &ScanConfig) -> Result<Figure1> {
    if resolution < 5 {
        return Err(Error::invalid(format!("resolution must be >= 5, got {resolution}")));
    }
    let config = ScanConfig {
        family,
        q: if family == Family::A { base.q.or(Some(0.5)) } else { None },
        tau: Axis { steps: resolution, ..base.tau },
        rho: Axis { steps: resolution, ..base.rho },
        ..base.clone()
    };
    let verdicts = empirical_scan(&config)?;
    let rows = verdicts.iter().map(Figure1Row::from).collect();
    let svg = region_svg(family, &config, &verdicts);
    Ok(Figure1 { verdicts, rows, svg })
}

/// Clipped corners of `{rho > a} ∩ {rho + tau > b}` inside the plotting
/// box, in `(rho, tau)` coordinates, counter-clockwise.
pub fn region_polygon(family: Family, rho_axis: &Axis, tau_axis: &Axis) -> Vec<(f64, f64)> {
    let (a, b) = compact_region(family);
    let (r0, r1, t0, t1) = (rho_axis.min, rho_axis.max, tau_axis.min, tau_axis.max);
    // Sutherland-Hodgman clip of the box against the two half-planes.
    let mut poly = vec![(r0, t0), (r1, t0), (r1, t1), (r0, t1)];
    let planes: [(f64, f64, f64); 2] = [(1.0, 0.0, a), (1.0, 1.0, b)];
    for (cr, ct, bound) in planes {
        let inside = |p: &(f64, f64)| cr * p.0 + ct * p.1 >= bound;
        let mut out = Vec::new();
        for i in 0..poly.len() {
            let cur = poly[i];
            let next = poly[(i + 1) % poly.len()];
            if inside(&cur) {
                out.push(cur);
            }
            let fc = cr * cur.0 + ct * cur.1 - bound;
            let fnx = cr * next.0 + ct * next.1 - bound;
            if (fc < 0.0 && fnx > 0.0) || (fc > 0.0 && fnx < 0.0) {
                let s = fc / (fc - fnx);
                out.push((cur.0 + s * (next.0 - cur.0), cur.1 + s * (next.1 - cur.1)));
            }
        }
        poly = out;
        if poly.is_empty() {
            break;
        }
    }
    poly
}

fn region_svg(family: Family, config: &ScanConfig, verdicts: &[RegionVerdict]) -> String {
    const SIZE: f64 = 400.0;
    const MARGIN: f64 = 40.0;
    let (rx, tx) = (&config.rho, &config.tau);
    let x = |rho: f64| MARGIN + (rho - rx.min) / (rx.max - rx.min) * SIZE;
    let y = |tau: f64| MARGIN + (tx.max - tau) / (tx.max - tx.min) * SIZE;
    let total = SIZE + 2.0 * MARGIN;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{total}" height="{total}" viewBox="0 0 {total} {total}">"#
    );
    let _ = writeln!(s, r#"<rect x="0" y="0" width="{total}" height="{total}" fill="white"/>"#);
    let poly = region_polygon(family, rx, tx);
    if !poly.is_empty() {
        let pts: Vec<String> = poly.iter().map(|&(r, t)| format!("{:.3},{:.3}", x(r), y(t))).collect();
        let _ = writeln!(
            s,
            r##"<polygon id="compact-region" points="{}" fill="#cccccc" stroke="black" stroke-width="1.5"/>"##,
            pts.join(" ")
        );
    }
    let _ = writeln!(
        s,
        r#"<rect x="{MARGIN}" y="{MARGIN}" width="{SIZE}" height="{SIZE}" fill="none" stroke="black"/>"#
    );
    if rx.min < 0.0 && rx.max > 0.0 {
        let _ = writeln!(
            s,
            r#"<line x1="{0:.3}" y1="{1:.3}" x2="{0:.3}" y2="{2:.3}" stroke="gray"/>"#,
            x(0.0),
            y(tx.min),
            y(tx.max)
        );
    }
    if tx.min < 0.0 && tx.max > 0.0 {
        let _ = writeln!(
            s,
            r#"<line x1="{1:.3}" y1="{0:.3}" x2="{2:.3}" y2="{0:.3}" stroke="gray"/>"#,
            y(0.0),
            x(rx.min),
            x(rx.max)
        );
    }
    for v in verdicts {
        let (cx, cy) = (x(v.rho), y(v.tau));
        let colour = match v.empirical {
            EmpiricalTag::Bounded => "blue",
            EmpiricalTag::Unbounded => "orange",
            EmpiricalTag::Inconclusive => "gray",
        };
        let _ = writeln!(s, r#"<circle cx="{cx:.3}" cy="{cy:.3}" r="3" fill="{colour}"/>"#);
        if v.agrees() == Some(false) {
            let _ = writeln!(
                s,
                r#"<path class="disagreement" d="M{:.3},{:.3} L{:.3},{:.3} M{:.3},{:.3} L{:.3},{:.3}" stroke="red" stroke-width="2"/>"#,
                cx - 5.0, cy - 5.0, cx + 5.0, cy + 5.0, cx - 5.0, cy + 5.0, cx + 5.0, cy - 5.0
            );
        }
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="{:.1}" font-size="16" text-anchor="middle">rho</text>"#,
        MARGIN + SIZE / 2.0,
        total - 10.0
    );
    let _ = writeln!(
        s,
        r#"<text x="14" y="{:.1}" font-size="16" text-anchor="middle" transform="rotate(-90 14 {:.1})">tau</text>"#,
        MARGIN + SIZE / 2.0,
        MARGIN + SIZE / 2.0
    );
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="28" font-size="16" text-anchor="middle">{}(tau, rho)</text>"#,
        MARGIN + SIZE / 2.0,
        family
    );
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn classifies_reference_points() {
        let v = analytic_classification(&FamilyParams::a(1.0, 1.0, 0.5).unwrap());
        assert!(v.psd && v.bounded && v.compact && v.trace_class == TriState::Yes);
        let v = analytic_classification(&FamilyParams::c(1.0, 0.5).unwrap());
        assert!(v.bounded && v.compact && v.trace_class == TriState::No);
        let v = analytic_classification(&FamilyParams::b(-0.5, 1.2).unwrap());
        assert!(!v.bounded && !v.psd);
    }

    #[test]
    fn bounded_but_not_compact_lines() {
        let a = analytic_classification(&FamilyParams::a(1.0, 0.0, 0.5).unwrap());
        assert!(a.bounded && !a.compact);
        let b = analytic_classification(&FamilyParams::b(1.0, 1.0).unwrap());
        assert!(b.bounded && !b.compact);
        let c = analytic_classification(&FamilyParams::c(3.0, 0.0).unwrap());
        assert!(c.bounded && !c.compact);
        let c = analytic_classification(&FamilyParams::c(2.0, 0.0).unwrap());
        assert!(!c.bounded);
        let c = analytic_classification(&FamilyParams::c(0.0, 1.5).unwrap());
        assert!(c.bounded && c.trace_class == TriState::Yes);
    }

    #[test]
    fn growth_tags() {
        assert_eq!(growth_tag(&[1.0, 2.0]), EmpiricalTag::Inconclusive);
        assert_eq!(growth_tag(&[1.0, 1.5, 1.6, 1.605, 1.606]), EmpiricalTag::Bounded);
        assert_eq!(growth_tag(&[1.0, 2.0, 4.0, 8.0]), EmpiricalTag::Unbounded);
        // logarithmic growth: constant increments
        assert_eq!(growth_tag(&[1.0, 1.1, 1.2, 1.3]), EmpiricalTag::Unbounded);
        // converging geometrically but not yet within 1%
        assert_eq!(growth_tag(&[1.0, 1.4, 1.6, 1.7]), EmpiricalTag::Inconclusive);
    }

    #[test]
    fn band_detection() {
        let near = FamilyParams::a(1.0, 0.05, 0.5).unwrap();
        assert!(near_threshold(&near, BOUNDARY_BAND).unwrap());
        let far = FamilyParams::a(1.0, 1.0, 0.5).unwrap();
        assert!(!near_threshold(&far, BOUNDARY_BAND).unwrap());
    }

    #[test]
    fn scan_examples() {
        let cfg = ScanConfig {
            sizes: vec![64, 128, 256, 512],
            ..ScanConfig::standard(Family::A)
        };
        let v = scan_point(&cfg, 1.0, -0.5).unwrap();
        assert_eq!(v.empirical, EmpiricalTag::Unbounded);
        let cfg = ScanConfig {
            sizes: vec![64, 128, 256, 512],
            ..ScanConfig::standard(Family::C)
        };
        let v = scan_point(&cfg, 3.0, 2.0).unwrap();
        assert_eq!(v.empirical, EmpiricalTag::Bounded);
        for w in v.lambda_max_by_size.windows(2) {
            assert!(w[1].1 >= w[0].1 - 1e-9);
        }
    }

    #[test]
    fn witnesses() {
        let sizes = [64, 128, 256, 512, 1024];
        let b = FamilyParams::b(1.0, 0.5).unwrap();
        let w = unboundedness_witness(&b, &sizes, Some(0.7)).unwrap();
        assert_eq!(w.kind, WitnessKind::Power);
        assert!(w.growing, "{w:?}");
        let a = FamilyParams::a(-1.0, 0.5, 0.5).unwrap();
        let w = unboundedness_witness(&a, &sizes, None).unwrap();
        assert_eq!(w.kind, WitnessKind::Column);
        assert!(w.growing, "{w:?}");
        let c = FamilyParams::c(0.4, 0.3).unwrap();
        let w = unboundedness_witness(&c, &sizes, None).unwrap();
        assert_eq!(w.kind, WitnessKind::Column);
        assert!(w.growing);
        // partial l2 norm of n^{-0.35} grows like N^{0.15}, squared like N^{0.3}
        let ratio = (w.values[4].1 / w.values[3].1).powi(2);
        assert!((ratio - 2f64.powf(0.3)).abs() < 0.05, "{ratio}");
        let bounded = FamilyParams::c(3.0, 2.0).unwrap();
        assert!(unboundedness_witness(&bounded, &sizes, None).is_err());
        let gap = FamilyParams::c(1.5, 0.0).unwrap();
        assert!(matches!(witness_kind(&gap), Err(Error::Unsupported(_))));
    }

    #[test]
    fn polygon_corners() {
        let axis = Axis::new(-2.5, 2.5, 15).unwrap();
        let mut a = region_polygon(Family::A, &axis, &axis);
        a.sort_by(|x, y| x.partial_cmp(y).unwrap());
        assert_eq!(a, vec![(0.0, 0.0), (0.0, 2.5), (2.5, -2.5), (2.5, 2.5)]);
        let b = region_polygon(Family::B, &axis, &axis);
        assert!(b.contains(&(1.0, 0.0)) && b.contains(&(2.5, -1.5)));
        let c = region_polygon(Family::C, &axis, &axis);
        assert!(c.contains(&(0.0, 1.0)) && c.contains(&(2.5, -1.5)));
        assert_eq!(axis.values()[7], 0.0);
    }
}
