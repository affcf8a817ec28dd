//! Rules and the rule base: IF/THEN structure over linguistic variables.

use crate::error::{Error, Result};
use crate::variable::{LinguisticVariable, MembershipVector};

/// Conjunction operator combining antecedent degrees into a firing strength.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TNorm {
    #[default]
    Min,
    Product,
}

impl TNorm {
    pub fn name(self) -> &'static str {
        match self {
            TNorm::Min => "min",
            TNorm::Product => "product",
        }
    }
}

/// One inference rule: a term index per input variable, and an output term index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rule {
    pub antecedents: Vec<usize>,
    pub consequent: usize,
}

/// Number of uniform samples the output universe is discretized into for
/// implication, aggregation, and centroid defuzzification.
pub const OUTPUT_SAMPLES: usize = 1001;

/// A complete inference system: input variables, output variable, rules, and
/// the conjunction operator. Immutable after construction; disjunction is
/// always pointwise max.
#[derive(Debug, Clone, PartialEq)]
pub struct RuleBase {
    inputs: Vec<LinguisticVariable>,
    output: LinguisticVariable,
    rules: Vec<Rule>,
    tnorm: TNorm,
    /// Consequent memberships pre-sampled on the output grid, one row per term.
    term_samples: Vec<Vec<f64>>,
}

impl RuleBase {
    pub fn new(
        inputs: Vec<LinguisticVariable>,
        output: LinguisticVariable,
        rules: Vec<Rule>,
        tnorm: TNorm,
    ) -> Result<Self> {
        if inputs.is_empty() {
            return Err(Error::InvalidRule(
                "at least one input variable required".into(),
            ));
        }
        for rule in &rules {
            if rule.antecedents.len() != inputs.len() {
                return Err(Error::InvalidRule(format!(
                    "rule has {} antecedents but there are {} input variables",
                    rule.antecedents.len(),
                    inputs.len()
                )));
            }
            for (var, &idx) in inputs.iter().zip(&rule.antecedents) {
                if idx >= var.terms().len() {
                    return Err(Error::InvalidRule(format!(
                        "term index {idx} out of range for variable `{}`",
                        var.name()
                    )));
                }
            }
            if rule.consequent >= output.terms().len() {
                return Err(Error::InvalidRule(format!(
                    "consequent index {} out of range for output `{}`",
                    rule.consequent,
                    output.name()
                )));
            }
        }
        for (i, a) in rules.iter().enumerate() {
            for b in &rules[..i] {
                if a.antecedents == b.antecedents && a.consequent != b.consequent {
                    let labels: Vec<&str> = inputs
                        .iter()
                        .zip(&a.antecedents)
                        .map(|(v, &t)| v.terms()[t].label.as_str())
                        .collect();
                    return Err(Error::ConflictingRules {
                        antecedents: labels.join(", "),
                        first: output.terms()[b.consequent].label.clone(),
                        second: output.terms()[a.consequent].label.clone(),
                    });
                }
            }
        }

        let grid = sample_grid(output.universe(), OUTPUT_SAMPLES);
        let term_samples = output
            .terms()
            .iter()
            .map(|t| grid.iter().map(|&y| t.mf.eval(y)).collect())
            .collect();
        Ok(RuleBase {
            inputs,
            output,
            rules,
            tnorm,
            term_samples,
        })
    }

    pub fn inputs(&self) -> &[LinguisticVariable] {
        &self.inputs
    }

    pub fn output(&self) -> &LinguisticVariable {
        &self.output
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    pub fn tnorm(&self) -> TNorm {
        self.tnorm
    }

    pub(crate) fn term_samples(&self) -> &[Vec<f64>] {
        &self.term_samples
    }

    /// The consequent term index for a given antecedent combination, if any
    /// rule covers it.
    pub fn lookup(&self, antecedents: &[usize]) -> Option<usize> {
        self.rules
            .iter()
            .find(|r| r.antecedents == antecedents)
            .map(|r| r.consequent)
    }
}

/// `n` uniformly spaced samples spanning `[lo, hi]` inclusive.
pub fn sample_grid((lo, hi): (f64, f64), n: usize) -> Vec<f64> {
    debug_assert!(n >= 2);
    let span = hi - lo;
    (0..n)
        .map(|i| lo + span * i as f64 / (n - 1) as f64)
        .collect()
}

/// Combine the rule's selected antecedent degrees with the T-norm.
pub fn firing_strength(rule: &Rule, inputs: &[MembershipVector], tnorm: TNorm) -> Result<f64> {
    if rule.antecedents.len() != inputs.len() {
        return Err(Error::InvalidRule(format!(
            "rule expects {} membership vectors, got {}",
            rule.antecedents.len(),
            inputs.len()
        )));
    }
    let mut alpha = 1.0f64;
    for (&idx, vector) in rule.antecedents.iter().zip(inputs) {
        let degree = *vector.degrees.get(idx).ok_or_else(|| {
            Error::InvalidRule(format!(
                "term index {idx} out of range for fuzzified `{}`",
                vector.variable
            ))
        })?;
        alpha = match tnorm {
            TNorm::Min => alpha.min(degree),
            TNorm::Product => alpha * degree,
        };
    }
    Ok(alpha)
}
