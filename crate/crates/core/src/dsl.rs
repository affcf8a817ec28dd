//! Textual rule-document format: variables, terms, and IF/THEN rules.
//!
//! Line-oriented grammar, `#` starts a comment:
//!
//! ```text
//! tnorm min
//!
//! var GU range 0 100 unit % {
//!   term L trap 0 0 30 50
//!   term M tri 30 50 70
//!   term H trap 50 70 100 100
//! }
//!
//! rule: IF GU is L AND GT is H AND NT is M THEN Score is S
//! ```
//!
//! The variable named in `THEN` is the output; the remaining variables are
//! antecedent slots in declaration order. Serialization is canonical: parsing
//! its own output reproduces the same rule base, byte for byte.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::membership::MembershipFunction;
use crate::rules::{Rule, RuleBase, TNorm};
use crate::variable::LinguisticVariable;

/// Coverage/conflict report over a rule list (see `check_completeness`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompletenessReport {
    /// Antecedent combinations covered by at least one rule.
    pub covered: usize,
    /// Total combinations (product of input term counts).
    pub total: usize,
    /// Identical antecedents mapped to different consequents.
    pub conflicts: Vec<String>,
    /// Combinations no rule covers.
    pub gaps: Vec<String>,
}

impl CompletenessReport {
    pub fn is_complete(&self) -> bool {
        self.gaps.is_empty() && self.conflicts.is_empty()
    }
}

/// Parse a rule document into a validated rule base.
pub fn parse_rules(text: &str) -> Result<RuleBase> {
    let mut tnorm: Option<TNorm> = None;
    let mut vars: Vec<PendingVar> = Vec::new();
    let mut rules: Vec<PendingRule> = Vec::new();
    let mut open: Option<PendingVar> = None;

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let toks: Vec<&str> = content.split_whitespace().collect();

        if let Some(var) = open.as_mut() {
            match toks[0] {
                "}" => {
                    if toks.len() != 1 {
                        return Err(syntax(line, "`}` must stand alone"));
                    }
                    vars.push(open.take().unwrap());
                }
                "term" => var.terms.push(parse_term(line, &toks)?),
                other => {
                    return Err(syntax(
                        line,
                        &format!("expected `term ...` or `}}` inside var block, got `{other}`"),
                    ))
                }
            }
            continue;
        }

        match toks[0] {
            "tnorm" => {
                if tnorm.is_some() {
                    return Err(syntax(line, "duplicate tnorm directive"));
                }
                tnorm = Some(match toks.get(1) {
                    Some(&"min") if toks.len() == 2 => TNorm::Min,
                    Some(&"product") if toks.len() == 2 => TNorm::Product,
                    _ => return Err(syntax(line, "expected `tnorm min` or `tnorm product`")),
                });
            }
            "var" => {
                let var = parse_var_header(line, &toks)?;
                if vars.iter().any(|v| v.name == var.name) {
                    return Err(syntax(line, &format!("duplicate variable `{}`", var.name)));
                }
                open = Some(var);
            }
            "rule:" => rules.push(parse_rule_line(line, &toks)?),
            other => {
                return Err(syntax(
                    line,
                    &format!("expected `var`, `rule:`, or `tnorm`, got `{other}`"),
                ))
            }
        }
    }

    if let Some(var) = open {
        return Err(syntax(
            var.line,
            &format!("var `{}` block never closed", var.name),
        ));
    }
    if rules.is_empty() {
        return Err(syntax(text.lines().count().max(1), "no rules"));
    }

    assemble(vars, rules, tnorm.unwrap_or_default())
}

/// Canonical text for a rule base; `parse_rules` on the result reproduces it.
pub fn serialize_rules(rb: &RuleBase) -> String {
    let mut out = String::new();
    out.push_str(&format!("tnorm {}\n", rb.tnorm().name()));
    for var in rb.inputs().iter().chain(std::iter::once(rb.output())) {
        let (lo, hi) = var.universe();
        out.push('\n');
        out.push_str(&format!("var {} range {} {}", var.name(), lo, hi));
        if let Some(unit) = var.unit() {
            out.push_str(&format!(" unit {unit}"));
        }
        out.push_str(" {\n");
        for term in var.terms() {
            out.push_str("  ");
            out.push_str(&match term.mf {
                MembershipFunction::Triangle { a, b, c } => {
                    format!("term {} tri {} {} {}\n", term.label, a, b, c)
                }
                MembershipFunction::Trapezoid { a, b, c, d } => {
                    format!("term {} trap {} {} {} {}\n", term.label, a, b, c, d)
                }
            });
        }
        out.push_str("}\n");
    }
    out.push('\n');
    for rule in rb.rules() {
        out.push_str(&format_rule(rb, rule));
        out.push('\n');
    }
    out
}

/// One rule rendered as its document line (without trailing newline).
pub fn format_rule(rb: &RuleBase, rule: &Rule) -> String {
    let mut s = String::from("rule: IF ");
    for (i, (var, &term)) in rb.inputs().iter().zip(&rule.antecedents).enumerate() {
        if i > 0 {
            s.push_str(" AND ");
        }
        s.push_str(&format!("{} is {}", var.name(), var.terms()[term].label));
    }
    s.push_str(&format!(
        " THEN {} is {}",
        rb.output().name(),
        rb.output().terms()[rule.consequent].label
    ));
    s
}

/// Coverage and conflict report for a rule base.
pub fn check_completeness(rb: &RuleBase) -> CompletenessReport {
    check_rule_list(rb.inputs(), rb.output(), rb.rules())
}

/// Coverage and conflict report over a raw rule list (usable before a
/// `RuleBase` exists, e.g. on lists a constructor would reject).
pub fn check_rule_list(
    inputs: &[LinguisticVariable],
    output: &LinguisticVariable,
    rules: &[Rule],
) -> CompletenessReport {
    let label_combo = |antecedents: &[usize]| {
        let labels: Vec<&str> = inputs
            .iter()
            .zip(antecedents)
            .map(|(v, &t)| v.terms()[t].label.as_str())
            .collect();
        format!("({})", labels.join(", "))
    };

    let mut seen: HashMap<&[usize], usize> = HashMap::new();
    let mut conflicts = Vec::new();
    for rule in rules {
        match seen.get(rule.antecedents.as_slice()) {
            Some(&prev) if prev != rule.consequent => conflicts.push(format!(
                "{} -> {} vs {}",
                label_combo(&rule.antecedents),
                output.terms()[prev].label,
                output.terms()[rule.consequent].label
            )),
            Some(_) => {}
            None => {
                seen.insert(rule.antecedents.as_slice(), rule.consequent);
            }
        }
    }

    let total = inputs.iter().map(|v| v.terms().len()).product();
    let mut gaps = Vec::new();
    let mut combo = vec![0usize; inputs.len()];
    for _ in 0..total {
        if !seen.contains_key(combo.as_slice()) {
            gaps.push(label_combo(&combo));
        }
        // mixed-radix increment, last slot fastest
        for slot in (0..combo.len()).rev() {
            combo[slot] += 1;
            if combo[slot] < inputs[slot].terms().len() {
                break;
            }
            combo[slot] = 0;
        }
    }

    CompletenessReport {
        covered: total - gaps.len(),
        total,
        conflicts,
        gaps,
    }
}

/// The default controller definition: utilization, temperature, and target
/// count each split into L/M/H, scoring into S/M/L, with the full 27-rule
/// decision table.
pub fn builtin_rulebase() -> RuleBase {
    parse_rules(BUILTIN_RULES).expect("built-in rule document is valid")
}

/// Source text of `builtin_rulebase`, in canonical serialized form.
/// Compiled in from `assets/default.frb`, so the shipped file and the
/// built-in rule base cannot drift apart.
pub const BUILTIN_RULES: &str = include_str!("../../../assets/default.frb");

struct PendingVar {
    name: String,
    lo: f64,
    hi: f64,
    unit: Option<String>,
    terms: Vec<(String, MembershipFunction)>,
    line: usize,
}

struct PendingRule {
    clauses: Vec<(String, String)>,
    then_var: String,
    then_term: String,
    line: usize,
}

fn syntax(line: usize, message: &str) -> Error {
    Error::Parse {
        line,
        message: message.to_string(),
    }
}

fn parse_number(line: usize, tok: &str) -> Result<f64> {
    tok.parse::<f64>()
        .map_err(|_| syntax(line, &format!("expected a number, got `{tok}`")))
}

/// `var NAME range LO HI [unit U] {`
fn parse_var_header(line: usize, toks: &[&str]) -> Result<PendingVar> {
    if toks.last() != Some(&"{") {
        return Err(syntax(line, "var header must end with `{`"));
    }
    let body = &toks[..toks.len() - 1];
    if body.len() != 5 && body.len() != 7 {
        return Err(syntax(line, "expected `var NAME range LO HI [unit U] {`"));
    }
    if body[2] != "range" {
        return Err(syntax(
            line,
            &format!("expected `range`, got `{}`", body[2]),
        ));
    }
    let unit = if body.len() == 7 {
        if body[5] != "unit" {
            return Err(syntax(line, &format!("expected `unit`, got `{}`", body[5])));
        }
        Some(body[6].to_string())
    } else {
        None
    };
    Ok(PendingVar {
        name: body[1].to_string(),
        lo: parse_number(line, body[3])?,
        hi: parse_number(line, body[4])?,
        unit,
        terms: Vec::new(),
        line,
    })
}

/// `term LABEL tri A B C` or `term LABEL trap A B C D`
fn parse_term(line: usize, toks: &[&str]) -> Result<(String, MembershipFunction)> {
    let wrap = |res: Result<MembershipFunction>| res.map_err(|e| syntax(line, &e.to_string()));
    let nums = |count: usize| -> Result<Vec<f64>> {
        toks[3..]
            .iter()
            .map(|t| parse_number(line, t))
            .collect::<Result<Vec<f64>>>()
            .and_then(|v| {
                if v.len() == count {
                    Ok(v)
                } else {
                    Err(syntax(
                        line,
                        &format!("expected {count} abscissae, got {}", v.len()),
                    ))
                }
            })
    };
    if toks.len() < 3 {
        return Err(syntax(line, "expected `term LABEL tri|trap ...`"));
    }
    let label = toks[1].to_string();
    let mf = match toks[2] {
        "tri" => {
            let p = nums(3)?;
            wrap(MembershipFunction::triangle(p[0], p[1], p[2]))?
        }
        "trap" => {
            let p = nums(4)?;
            wrap(MembershipFunction::trapezoid(p[0], p[1], p[2], p[3]))?
        }
        other => {
            return Err(syntax(
                line,
                &format!("expected `tri` or `trap`, got `{other}`"),
            ))
        }
    };
    Ok((label, mf))
}

/// `rule: IF V is T AND V is T ... THEN V is T`
fn parse_rule_line(line: usize, toks: &[&str]) -> Result<PendingRule> {
    let mut pos = 1;
    let expect = |want: &str, pos: &mut usize| -> Result<()> {
        match toks.get(*pos) {
            Some(&t) if t == want => {
                *pos += 1;
                Ok(())
            }
            got => Err(syntax(
                line,
                &format!("expected `{want}`, got `{}`", got.unwrap_or(&"end of line")),
            )),
        }
    };
    let clause = |pos: &mut usize| -> Result<(String, String)> {
        let var = toks
            .get(*pos)
            .ok_or_else(|| syntax(line, "expected a variable name"))?
            .to_string();
        *pos += 1;
        match toks.get(*pos) {
            Some(&"is") => *pos += 1,
            got => {
                return Err(syntax(
                    line,
                    &format!("expected `is`, got `{}`", got.unwrap_or(&"end of line")),
                ))
            }
        }
        let term = toks
            .get(*pos)
            .ok_or_else(|| syntax(line, "expected a term label"))?
            .to_string();
        *pos += 1;
        Ok((var, term))
    };

    expect("IF", &mut pos)?;
    let mut clauses = vec![clause(&mut pos)?];
    loop {
        match toks.get(pos) {
            Some(&"AND") => {
                pos += 1;
                clauses.push(clause(&mut pos)?);
            }
            Some(&"THEN") => {
                pos += 1;
                break;
            }
            got => {
                return Err(syntax(
                    line,
                    &format!(
                        "expected `AND` or `THEN`, got `{}`",
                        got.unwrap_or(&"end of line")
                    ),
                ))
            }
        }
    }
    let (then_var, then_term) = clause(&mut pos)?;
    if pos != toks.len() {
        return Err(syntax(
            line,
            &format!("unexpected `{}` after THEN clause", toks[pos]),
        ));
    }
    Ok(PendingRule {
        clauses,
        then_var,
        then_term,
        line,
    })
}

fn assemble(vars: Vec<PendingVar>, pending: Vec<PendingRule>, tnorm: TNorm) -> Result<RuleBase> {
    let output_name = pending[0].then_var.clone();
    for rule in &pending {
        if rule.then_var != output_name {
            return Err(syntax(
                rule.line,
                &format!(
                    "rules must share one output variable: `{}` vs `{}`",
                    rule.then_var, output_name
                ),
            ));
        }
    }

    let mut built: Vec<(LinguisticVariable, usize)> = Vec::new();
    for var in vars {
        let terms = var
            .terms
            .iter()
            .map(|(label, mf)| (label.as_str(), *mf))
            .collect();
        let lv = LinguisticVariable::new(&var.name, (var.lo, var.hi), var.unit.as_deref(), terms)
            .map_err(|e| syntax(var.line, &e.to_string()))?;
        built.push((lv, var.line));
    }
    let output_pos = built
        .iter()
        .position(|(v, _)| v.name() == output_name)
        .ok_or_else(|| {
            syntax(
                pending[0].line,
                &format!("unknown output variable `{output_name}`"),
            )
        })?;
    let (output, _) = built.remove(output_pos);
    let inputs: Vec<LinguisticVariable> = built.into_iter().map(|(v, _)| v).collect();
    if inputs.is_empty() {
        return Err(syntax(pending[0].line, "no input variables declared"));
    }

    let mut rules: Vec<Rule> = Vec::with_capacity(pending.len());
    let mut first_line: HashMap<Vec<usize>, (usize, usize)> = HashMap::new();
    for rule in &pending {
        let mut antecedents: Vec<Option<usize>> = vec![None; inputs.len()];
        for (var_name, term_label) in &rule.clauses {
            let slot = inputs.iter().position(|v| v.name() == *var_name);
            let slot = match slot {
                Some(s) => s,
                None if *var_name == output_name => {
                    return Err(syntax(
                        rule.line,
                        &format!("output variable `{var_name}` cannot appear in IF"),
                    ))
                }
                None => return Err(syntax(rule.line, &format!("unknown variable `{var_name}`"))),
            };
            if antecedents[slot].is_some() {
                return Err(syntax(
                    rule.line,
                    &format!("variable `{var_name}` constrained twice"),
                ));
            }
            let term = inputs[slot].term_index(term_label).ok_or_else(|| {
                syntax(
                    rule.line,
                    &format!("unknown term `{term_label}` on variable `{var_name}`"),
                )
            })?;
            antecedents[slot] = Some(term);
        }
        let antecedents: Vec<usize> = antecedents
            .into_iter()
            .enumerate()
            .map(|(slot, t)| {
                t.ok_or_else(|| {
                    syntax(
                        rule.line,
                        &format!("rule does not constrain variable `{}`", inputs[slot].name()),
                    )
                })
            })
            .collect::<Result<_>>()?;
        let consequent = output.term_index(&rule.then_term).ok_or_else(|| {
            syntax(
                rule.line,
                &format!(
                    "unknown term `{}` on variable `{output_name}`",
                    rule.then_term
                ),
            )
        })?;

        match first_line.get(&antecedents) {
            Some(&(prev_consequent, prev_line)) if prev_consequent != consequent => {
                return Err(syntax(
                    rule.line,
                    &format!(
                        "conflicts with rule at line {prev_line}: same antecedents, `{}` vs `{}`",
                        output.terms()[prev_consequent].label,
                        output.terms()[consequent].label
                    ),
                ));
            }
            _ => {
                first_line
                    .entry(antecedents.clone())
                    .or_insert((consequent, rule.line));
            }
        }
        rules.push(Rule {
            antecedents,
            consequent,
        });
    }

    RuleBase::new(inputs, output, rules, tnorm)
}
