//! The Mamdani pipeline: fuzzify, fire, clip, aggregate, defuzzify.

use crate::error::{Error, Result};
use crate::membership::MembershipFunction;
use crate::rules::{firing_strength, RuleBase, OUTPUT_SAMPLES};

/// One frame's crisp controller inputs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Telemetry {
    /// Device utilization, percent.
    pub gu: f64,
    /// Device temperature, degrees Celsius.
    pub gt: f64,
    /// Targets in the frame.
    pub nt: u32,
}

impl Telemetry {
    pub fn new(gu: f64, gt: f64, nt: u32) -> Self {
        Telemetry { gu, gt, nt }
    }

    /// Crisp values in input-variable order.
    pub fn values(&self) -> [f64; 3] {
        [self.gu, self.gt, f64::from(self.nt)]
    }
}

/// An input that fell outside its variable's universe and was clamped.
#[derive(Debug, Clone, PartialEq)]
pub struct ClampEvent {
    pub variable: String,
    pub raw: f64,
    pub clamped: f64,
}

/// The aggregated output fuzzy set, sampled uniformly over the output universe,
/// plus the per-rule firing strengths that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct AggregatedOutput {
    pub lo: f64,
    pub hi: f64,
    pub memberships: Vec<f64>,
    pub strengths: Vec<f64>,
}

/// Result of one full inference pass.
#[derive(Debug, Clone, PartialEq)]
pub struct InferenceResult {
    /// Crisp defuzzified score, inside the output universe.
    pub score: f64,
    /// Firing strength of every rule, in rule order.
    pub per_rule_strengths: Vec<f64>,
    /// Number of rules with positive firing strength.
    pub fired_count: usize,
    /// Inputs that had to be clamped to their universe.
    pub clamp_events: Vec<ClampEvent>,
}

/// Clip a consequent's membership at `alpha` over the given sample grid
/// (min implication).
pub fn implicate(alpha: f64, consequent: &MembershipFunction, grid: &[f64]) -> Vec<f64> {
    debug_assert!((0.0..=1.0).contains(&alpha));
    grid.iter()
        .map(|&y| alpha.min(consequent.eval(y)))
        .collect()
}

/// Pointwise max across clipped curves sharing one sample grid.
pub fn aggregate(
    universe: (f64, f64),
    clipped: &[Vec<f64>],
    strengths: &[f64],
) -> Result<AggregatedOutput> {
    let n = match clipped.first() {
        Some(c) => c.len(),
        None => return Err(Error::InvalidRule("nothing to aggregate".into())),
    };
    if n < 2 || clipped.iter().any(|c| c.len() != n) {
        return Err(Error::InvalidRule(
            "clipped curves must share one sample grid of at least 2 points".into(),
        ));
    }
    let mut memberships = vec![0.0f64; n];
    for curve in clipped {
        for (m, &v) in memberships.iter_mut().zip(curve) {
            *m = (*m).max(v);
        }
    }
    Ok(AggregatedOutput {
        lo: universe.0,
        hi: universe.1,
        memberships,
        strengths: strengths.to_vec(),
    })
}

/// Centroid of the aggregated set, integrating its piecewise-linear
/// interpolant exactly (per-interval trapezoid areas and first moments).
pub fn defuzzify_centroid(agg: &AggregatedOutput) -> Result<f64> {
    centroid_of(agg.lo, agg.hi, &agg.memberships)
}

fn centroid_of(lo: f64, hi: f64, memberships: &[f64]) -> Result<f64> {
    let n = memberships.len();
    debug_assert!(n >= 2);
    let h = (hi - lo) / (n - 1) as f64;
    // Per interval: area = h(m0+m1)/2, moment = h/6 * (y0(2m0+m1) + y1(m0+2m1)).
    // The common h cancels in the ratio, leaving moment_sum / (3 * area_sum).
    let mut area = 0.0;
    let mut moment = 0.0;
    for i in 0..n - 1 {
        let (m0, m1) = (memberships[i], memberships[i + 1]);
        let y0 = lo + h * i as f64;
        let y1 = y0 + h;
        area += m0 + m1;
        moment += y0 * (2.0 * m0 + m1) + y1 * (m0 + 2.0 * m1);
    }
    if area <= 0.0 {
        return Err(Error::NoRuleFired);
    }
    Ok(moment / (3.0 * area))
}

impl RuleBase {
    /// Run the full pipeline on one telemetry sample.
    ///
    /// Pure: identical inputs produce bit-identical scores. Out-of-universe
    /// inputs are clamped and reported, never rejected. Errors only when the
    /// aggregated output is identically zero (`NoRuleFired`).
    pub fn infer(&self, t: &Telemetry) -> Result<InferenceResult> {
        let mut clamp_events = Vec::new();
        let mut vectors = Vec::with_capacity(self.inputs().len());
        for (var, raw) in self.inputs().iter().zip(t.values()) {
            let clamped = var.clamp(raw);
            if clamped != raw {
                clamp_events.push(ClampEvent {
                    variable: var.name().to_string(),
                    raw,
                    clamped,
                });
            }
            vectors.push(var.fuzzify(clamped));
        }

        let mut strengths = Vec::with_capacity(self.rules().len());
        for rule in self.rules() {
            strengths.push(firing_strength(rule, &vectors, self.tnorm())?);
        }
        let fired_count = strengths.iter().filter(|&&a| a > 0.0).count();

        // Rules sharing a consequent collapse to one clip at their max
        // strength: max_r min(a_r, mu) == min(max_r a_r, mu). This keeps the
        // aggregate identical to clipping every rule separately while touching
        // each grid point once per output term.
        let term_count = self.output().terms().len();
        let mut clip = vec![0.0_f64; term_count];
        for (rule, &alpha) in self.rules().iter().zip(&strengths) {
            clip[rule.consequent] = clip[rule.consequent].max(alpha);
        }
        let mut memberships = vec![0.0_f64; OUTPUT_SAMPLES];
        for (level, samples) in clip.iter().zip(self.term_samples()) {
            if *level > 0.0 {
                for (m, &s) in memberships.iter_mut().zip(samples) {
                    *m = m.max(level.min(s));
                }
            }
        }

        let (lo, hi) = self.output().universe();
        let score = centroid_of(lo, hi, &memberships)?;
        Ok(InferenceResult {
            score,
            per_rule_strengths: strengths,
            fired_count,
            clamp_events,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::builtin_rulebase;
    use crate::rules::{sample_grid, TNorm};
    use crate::variable::LinguisticVariable;
    use approx::assert_relative_eq;

    fn score_var() -> LinguisticVariable {
        builtin_rulebase().output().clone()
    }

    fn grid() -> Vec<f64> {
        sample_grid((0.0, 100.0), OUTPUT_SAMPLES)
    }

    /// Trapezoid-rule centroid of the true (not resampled) aggregate at 10^5+1
    /// points; the independent check for the engine's exact-polyline result.
    fn dense_centroid(var: &LinguisticVariable, levels: &[f64]) -> f64 {
        let (lo, hi) = var.universe();
        let n = 100_001;
        let h = (hi - lo) / (n - 1) as f64;
        let mu = |y: f64| {
            var.terms()
                .iter()
                .zip(levels)
                .map(|(t, &a)| a.min(t.mf.eval(y)))
                .fold(0.0_f64, f64::max)
        };
        let mut area = 0.0;
        let mut moment = 0.0;
        for i in 0..n - 1 {
            let y0 = lo + h * i as f64;
            let y1 = y0 + h;
            let (m0, m1) = (mu(y0), mu(y1));
            area += (m0 + m1) * h / 2.0;
            moment += (y0 * m0 + y1 * m1) * h / 2.0;
        }
        moment / area
    }

    #[test]
    fn implicate_zero_alpha_zeroes_curve() {
        let tri = MembershipFunction::triangle(30.0, 50.0, 70.0).unwrap();
        assert!(implicate(0.0, &tri, &grid()).iter().all(|&v| v == 0.0));
    }

    #[test]
    fn implicate_full_alpha_is_identity() {
        let tri = MembershipFunction::triangle(30.0, 50.0, 70.0).unwrap();
        let clipped = implicate(1.0, &tri, &grid());
        let direct: Vec<f64> = grid().iter().map(|&y| tri.eval(y)).collect();
        assert_eq!(clipped, direct);
    }

    #[test]
    fn implicate_clips_apex() {
        let tri = MembershipFunction::triangle(30.0, 50.0, 70.0).unwrap();
        let clipped = implicate(0.5, &tri, &grid());
        assert_eq!(clipped[500], 0.5); // y = 50.0
    }

    #[test]
    fn aggregate_is_pointwise_max() {
        let a = vec![0.3; 11];
        let b = vec![0.7; 11];
        let agg = aggregate((0.0, 1.0), &[a, b], &[0.3, 0.7]).unwrap();
        assert!(agg.memberships.iter().all(|&v| v == 0.7));
    }

    #[test]
    fn aggregate_single_curve_is_identity() {
        let c = vec![0.0, 0.5, 1.0, 0.5, 0.0];
        let agg = aggregate((0.0, 1.0), std::slice::from_ref(&c), &[1.0]).unwrap();
        assert_eq!(agg.memberships, c);
    }

    #[test]
    fn centroid_of_symmetric_triangle_is_apex() {
        let tri = MembershipFunction::triangle(30.0, 50.0, 70.0).unwrap();
        let agg = aggregate((0.0, 100.0), &[implicate(1.0, &tri, &grid())], &[1.0]).unwrap();
        assert_relative_eq!(defuzzify_centroid(&agg).unwrap(), 50.0, epsilon = 1e-9);
    }

    #[test]
    fn centroid_of_left_shoulder_matches_dense_oracle() {
        let var = score_var();
        let trap = var.terms()[0].mf;
        let agg = aggregate((0.0, 100.0), &[implicate(1.0, &trap, &grid())], &[1.0]).unwrap();
        let got = defuzzify_centroid(&agg).unwrap();
        assert!(got > 0.0 && got < 45.0);
        assert_relative_eq!(got, dense_centroid(&var, &[1.0, 0.0, 0.0]), epsilon = 1e-6);
        // analytic value for trap(0,0,25,45): (312.5 + 316.6?) / 35
        assert_relative_eq!(got, 17.976190476190474, epsilon = 1e-9);
    }

    #[test]
    fn all_zero_aggregate_is_no_rule_fired() {
        let agg = AggregatedOutput {
            lo: 0.0,
            hi: 100.0,
            memberships: vec![0.0; OUTPUT_SAMPLES],
            strengths: vec![],
        };
        assert!(matches!(
            defuzzify_centroid(&agg).unwrap_err(),
            Error::NoRuleFired
        ));
    }

    #[test]
    fn prototype_input_fires_exactly_one_rule() {
        let rb = builtin_rulebase();
        // full membership in (H, H, H) under the default shapes
        let res = rb.infer(&Telemetry::new(90.0, 90.0, 150)).unwrap();
        assert_eq!(res.fired_count, 1);
        let fired: Vec<usize> = res
            .per_rule_strengths
            .iter()
            .enumerate()
            .filter(|(_, &a)| a > 0.0)
            .map(|(i, _)| i)
            .collect();
        assert_eq!(rb.rules()[fired[0]].antecedents, vec![2, 2, 2]);
        assert_eq!(res.per_rule_strengths[fired[0]], 1.0);
        // consequent S: score lands in the small region
        assert!(res.score < 37.5, "score {} not in S region", res.score);
    }

    #[test]
    fn grouped_aggregation_matches_per_rule_clipping() {
        let rb = builtin_rulebase();
        let g = sample_grid(rb.output().universe(), OUTPUT_SAMPLES);
        let cases = [
            Telemetry::new(42.0, 55.0, 33),
            Telemetry::new(61.3, 48.7, 72),
            Telemetry::new(10.0, 83.0, 7),
            Telemetry::new(97.2, 26.0, 140),
        ];
        for t in cases {
            let res = rb.infer(&t).unwrap();
            let clipped: Vec<Vec<f64>> = rb
                .rules()
                .iter()
                .zip(&res.per_rule_strengths)
                .map(|(r, &a)| implicate(a, &rb.output().terms()[r.consequent].mf, &g))
                .collect();
            let agg = aggregate(rb.output().universe(), &clipped, &res.per_rule_strengths).unwrap();
            // bit-identical: grouping only reorders min/max, which are exact
            assert_eq!(defuzzify_centroid(&agg).unwrap(), res.score);
        }
    }

    #[test]
    fn infer_is_deterministic() {
        let rb = builtin_rulebase();
        let t = Telemetry::new(58.4, 47.1, 66);
        let a = rb.infer(&t).unwrap();
        let b = rb.infer(&t).unwrap();
        assert_eq!(a.score.to_bits(), b.score.to_bits());
        assert_eq!(a.per_rule_strengths, b.per_rule_strengths);
    }

    #[test]
    fn out_of_universe_inputs_clamp_and_report() {
        let rb = builtin_rulebase();
        let res = rb.infer(&Telemetry::new(500.0, 90.0, 150)).unwrap();
        assert_eq!(res.clamp_events.len(), 1);
        assert_eq!(res.clamp_events[0].variable, "GU");
        assert_eq!(res.clamp_events[0].clamped, 100.0);
        let same = rb.infer(&Telemetry::new(100.0, 90.0, 150)).unwrap();
        assert_eq!(res.score, same.score);
    }

    #[test]
    fn score_stays_inside_output_universe() {
        let rb = builtin_rulebase();
        let (lo, hi) = rb.output().universe();
        for gu in [0.0, 25.0, 50.0, 75.0, 100.0] {
            for gt in [20.0, 45.0, 60.0, 75.0, 100.0] {
                for nt in [0u32, 20, 50, 80, 200] {
                    let score = rb.infer(&Telemetry::new(gu, gt, nt)).unwrap().score;
                    assert!(score >= lo && score <= hi);
                }
            }
        }
    }

    #[test]
    fn product_tnorm_still_defuzzifies_inside_universe() {
        let rb = RuleBase::new(
            builtin_rulebase().inputs().to_vec(),
            builtin_rulebase().output().clone(),
            builtin_rulebase().rules().to_vec(),
            TNorm::Product,
        )
        .unwrap();
        let res = rb.infer(&Telemetry::new(42.0, 58.0, 61)).unwrap();
        assert!(res.score > 0.0 && res.score < 100.0);
    }
}
