//! Two-sided identity reports shared by every verifier.

use serde::{Deserialize, Serialize};

/// Acceptance threshold attached to a report.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum Tolerance {
    Absolute(f64),
    Relative(f64),
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ReportNotes {
    pub identity: String,
    pub tolerance: Option<Tolerance>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tail_bound: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub quadrature_points: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub truncation: Option<u64>,
    /// Magnitude the relative discrepancy was measured against.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scale: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

/// The two independently computed sides of an identity.
///
/// Aggregate checks (a maximum over many index pairs) store the sides at the
/// worst pair and name that pair in `notes.detail`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityReport {
    pub lhs: f64,
    pub rhs: f64,
    pub abs_discrepancy: f64,
    pub rel_discrepancy: f64,
    pub notes: ReportNotes,
}

impl IdentityReport {
    pub fn new(identity: impl Into<String>, lhs: f64, rhs: f64, tolerance: Tolerance) -> Self {
        let abs = (lhs - rhs).abs();
        let scale = lhs.abs().max(rhs.abs());
        IdentityReport {
            lhs,
            rhs,
            abs_discrepancy: abs,
            rel_discrepancy: relative(abs, scale),
            notes: ReportNotes {
                identity: identity.into(),
                tolerance: Some(tolerance),
                ..ReportNotes::default()
            },
        }
    }

    /// Measures the relative discrepancy against `scale` instead of the
    /// larger side.
    pub fn with_scale(mut self, scale: f64) -> Self {
        self.rel_discrepancy = relative(self.abs_discrepancy, scale);
        self.notes.scale = Some(scale);
        self
    }

    pub fn with_tail_bound(mut self, tail: f64) -> Self {
        self.notes.tail_bound = Some(tail);
        self
    }

    pub fn with_quadrature_points(mut self, m: usize) -> Self {
        self.notes.quadrature_points = Some(m);
        self
    }

    pub fn with_truncation(mut self, k: u64) -> Self {
        self.notes.truncation = Some(k);
        self
    }

    pub fn with_detail(mut self, detail: impl Into<String>) -> Self {
        self.notes.detail = Some(detail.into());
        self
    }

    pub fn tail_bound(&self) -> f64 {
        self.notes.tail_bound.unwrap_or(0.0)
    }

    /// Discrepancy within tolerance plus any recorded truncation tail.
    pub fn passed(&self) -> bool {
        if !self.abs_discrepancy.is_finite() {
            return false;
        }
        let tail = self.tail_bound();
        match self.notes.tolerance {
            None => true,
            Some(Tolerance::Absolute(t)) => self.abs_discrepancy <= t + tail,
            Some(Tolerance::Relative(t)) => {
                let scale = self
                    .notes
                    .scale
                    .unwrap_or_else(|| self.lhs.abs().max(self.rhs.abs()));
                self.rel_discrepancy <= t || self.abs_discrepancy <= t * scale + tail
            }
        }
    }

    /// Keeps whichever of two reports has the larger relative discrepancy.
    pub fn worse(self, other: IdentityReport) -> IdentityReport {
        let key = |r: &IdentityReport| {
            if r.rel_discrepancy.is_nan() {
                f64::INFINITY
            } else {
                r.rel_discrepancy
            }
        };
        if key(&other) > key(&self) {
            other
        } else {
            self
        }
    }
}

fn relative(abs: f64, scale: f64) -> f64 {
    if abs == 0.0 {
        0.0
    } else if scale > 0.0 {
        abs / scale
    } else {
        f64::INFINITY
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn discrepancies_follow_sides() {
        let r = IdentityReport::new("x", 1.0, 1.0 + 1e-13, Tolerance::Relative(1e-12));
        assert!((r.abs_discrepancy - 1e-13).abs() < 1e-15);
        assert!(r.rel_discrepancy < 1e-12);
        assert!(r.passed());
    }

    #[test]
    fn tail_bound_widens_absolute_tolerance() {
        let r = IdentityReport::new("x", 1.0, 1.001, Tolerance::Absolute(1e-6));
        assert!(!r.passed());
        assert!(r.with_tail_bound(2e-3).passed());
    }

    #[test]
    fn nan_never_passes() {
        let r = IdentityReport::new("x", f64::NAN, 1.0, Tolerance::Absolute(1.0));
        assert!(!r.passed());
    }

    #[test]
    fn worse_keeps_larger_discrepancy() {
        let a = IdentityReport::new("a", 1.0, 1.0, Tolerance::Relative(0.1));
        let b = IdentityReport::new("b", 1.0, 2.0, Tolerance::Relative(0.1));
        assert_eq!(a.clone().worse(b.clone()).notes.identity, "b");
        assert_eq!(b.worse(a).notes.identity, "b");
    }
}
