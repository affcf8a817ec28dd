//! Linguistic variables: a bounded universe partitioned into labeled fuzzy terms.

use crate::error::{Error, Result};
use crate::membership::MembershipFunction;

/// One labeled fuzzy term of a variable.
#[derive(Debug, Clone, PartialEq)]
pub struct Term {
    pub label: String,
    pub mf: MembershipFunction,
}

/// A named quantity over a closed universe `[lo, hi]` with ordered fuzzy terms.
///
/// Construction enforces: a nonempty universe, unique labels, every term's
/// support inside the universe, and full coverage (every universe point has
/// positive membership in at least one term).
#[derive(Debug, Clone, PartialEq)]
pub struct LinguisticVariable {
    name: String,
    lo: f64,
    hi: f64,
    unit: Option<String>,
    terms: Vec<Term>,
}

/// Per-term membership degrees of one crisp value, ordered as the variable's terms.
#[derive(Debug, Clone, PartialEq)]
pub struct MembershipVector {
    pub variable: String,
    pub degrees: Vec<f64>,
}

impl LinguisticVariable {
    pub fn new(
        name: &str,
        universe: (f64, f64),
        unit: Option<&str>,
        terms: Vec<(&str, MembershipFunction)>,
    ) -> Result<Self> {
        let (lo, hi) = universe;
        let invalid = |reason: String| Error::InvalidVariable {
            name: name.to_string(),
            reason,
        };
        if name.is_empty() || name.contains(char::is_whitespace) {
            return Err(invalid("name must be a nonempty single token".into()));
        }
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(invalid(format!(
                "universe must satisfy lo < hi, got [{lo}, {hi}]"
            )));
        }
        if terms.is_empty() {
            return Err(invalid("at least one term required".into()));
        }
        for (label, mf) in &terms {
            if label.is_empty() || label.contains(char::is_whitespace) {
                return Err(invalid(format!(
                    "term label `{label}` must be a single token"
                )));
            }
            let (s_lo, s_hi) = mf.support();
            if s_lo < lo || s_hi > hi {
                return Err(invalid(format!(
                    "term `{label}` support [{s_lo}, {s_hi}] outside universe [{lo}, {hi}]"
                )));
            }
        }
        for (i, (label, _)) in terms.iter().enumerate() {
            if terms[..i].iter().any(|(l, _)| l == label) {
                return Err(invalid(format!("duplicate term label `{label}`")));
            }
        }

        let var = LinguisticVariable {
            name: name.to_string(),
            lo,
            hi,
            unit: unit.map(str::to_string),
            terms: terms
                .into_iter()
                .map(|(label, mf)| Term {
                    label: label.to_string(),
                    mf,
                })
                .collect(),
        };
        if let Some(x) = var.coverage_gap() {
            return Err(Error::InvalidVariable {
                name: var.name,
                reason: format!("no term covers universe point {x}"),
            });
        }
        Ok(var)
    }

    /// A universe point with zero membership in every term, if one exists.
    ///
    /// Terms are linear between breakpoints and nonnegative, so the pointwise
    /// maximum can only touch zero at a breakpoint; checking breakpoints plus
    /// the universe edges is exhaustive.
    fn coverage_gap(&self) -> Option<f64> {
        let mut probes = vec![self.lo, self.hi];
        for t in &self.terms {
            probes.extend(t.mf.breakpoints());
        }
        probes
            .into_iter()
            .find(|&x| self.terms.iter().all(|t| t.mf.eval(x) == 0.0))
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn universe(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }

    pub fn unit(&self) -> Option<&str> {
        self.unit.as_deref()
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn term_index(&self, label: &str) -> Option<usize> {
        self.terms.iter().position(|t| t.label == label)
    }

    /// Clamp a crisp value to the universe bounds.
    pub fn clamp(&self, x: f64) -> f64 {
        x.clamp(self.lo, self.hi)
    }

    /// Membership degrees of `x` across all terms; out-of-universe values are
    /// clamped to the nearest bound first.
    pub fn fuzzify(&self, x: f64) -> MembershipVector {
        let x = self.clamp(x);
        MembershipVector {
            variable: self.name.clone(),
            degrees: self.terms.iter().map(|t| t.mf.eval(x)).collect(),
        }
    }
}
