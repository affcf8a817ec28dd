//! Closed-loop device simulation: a model profile runs a frame trace,
//! producing the utilization/temperature/target telemetry that feeds the
//! controller, which in turn picks the model for the next frame.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::engine::Telemetry;
use crate::error::{Error, Result};
use crate::rules::RuleBase;
use crate::switcher::{CounterMode, ModelId, SwitcherState};

/// Piecewise-linear map from true target count to detection recall in [0,1].
/// Constant-extends beyond its first and last knots.
#[derive(Debug, Clone, PartialEq)]
pub struct RecallCurve {
    knots: Vec<(f64, f64)>,
}

impl RecallCurve {
    /// `knots` are `(nt, recall)` pairs with strictly increasing `nt`.
    pub fn new(knots: Vec<(f64, f64)>) -> Result<Self> {
        if knots.is_empty() {
            return Err(Error::InvalidScenario(
                "recall curve needs at least one knot".into(),
            ));
        }
        for &(x, r) in &knots {
            if !x.is_finite() || !(0.0..=1.0).contains(&r) {
                return Err(Error::InvalidScenario(format!(
                    "recall knot ({x}, {r}) outside [0,1] or not finite"
                )));
            }
        }
        if knots.windows(2).any(|w| w[0].0 >= w[1].0) {
            return Err(Error::InvalidScenario(
                "recall knots must have strictly increasing target counts".into(),
            ));
        }
        Ok(RecallCurve { knots })
    }

    pub fn constant(r: f64) -> Result<Self> {
        RecallCurve::new(vec![(0.0, r)])
    }

    pub fn knots(&self) -> &[(f64, f64)] {
        &self.knots
    }

    pub fn eval(&self, nt: f64) -> f64 {
        let first = self.knots[0];
        let last = self.knots[self.knots.len() - 1];
        if nt <= first.0 {
            return first.1;
        }
        if nt >= last.0 {
            return last.1;
        }
        let i = self.knots.partition_point(|&(x, _)| x <= nt) - 1;
        let (x0, r0) = self.knots[i];
        let (x1, r1) = self.knots[i + 1];
        r0 + (r1 - r0) * (nt - x0) / (x1 - x0)
    }
}

/// Parametric stand-in for one inference model.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelProfile {
    pub id: ModelId,
    pub label: String,
    /// Utilization contribution when active, percent.
    pub base_load: f64,
    /// Additional utilization per observed target, percent.
    pub per_target_load: f64,
    pub recall: RecallCurve,
    /// Nominal per-frame latency, for reporting only.
    pub latency_ms: f64,
}

/// First-order thermal response: temperature relaxes toward
/// `ambient + heat_gain * gu` at rate `alpha` per frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThermalModel {
    pub ambient_c: f64,
    pub heat_gain_c_per_gu: f64,
    pub alpha: f64,
    #[serde(default)]
    pub noise_sigma_c: f64,
}

/// Segment of a synthetic trace: a linear ramp with a sinusoidal overlay.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TraceSegment {
    pub frames: u32,
    pub base_nt: f64,
    #[serde(default)]
    pub slope: f64,
    #[serde(default)]
    pub osc_amplitude: f64,
    #[serde(default)]
    pub osc_period: f64,
}

/// Which target count the controller sees each frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NtSource {
    /// The running model's detection count (what a deployed controller observes).
    #[default]
    Observed,
    /// The trace's ground-truth count.
    True,
}

/// A fully materialized simulation setup.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub models: Vec<ModelProfile>,
    pub thermal: ThermalModel,
    /// Per-frame true target counts.
    pub trace: Vec<u32>,
    pub threshold_k: u32,
    pub counter_mode: CounterMode,
    /// Enables stochastic mode (binomial detection plus any configured noise).
    pub rng_seed: Option<u64>,
    pub gu_noise_sigma: f64,
    pub controller_nt: NtSource,
}

/// One frame of a simulation run.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameRecord {
    pub frame: u32,
    /// Label of the model that ran this frame.
    pub model: String,
    pub gu: f64,
    pub gt: f64,
    pub nt_true: u32,
    pub nt_obs: u32,
    /// Controller score; absent when no rule fired.
    pub score: Option<f64>,
    pub switched: bool,
}

/// A complete run: per-frame records plus the scenario echo.
#[derive(Debug, Clone, PartialEq)]
pub struct RunLog {
    pub records: Vec<FrameRecord>,
    pub scenario_name: Option<String>,
    pub seed: Option<u64>,
}

/// Which comparison arm to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Arm {
    /// Controller-driven switching over the full roster.
    Adaptive,
    /// One roster model pinned for the whole run; the switcher is bypassed.
    Pinned(usize),
}

/// Observed target count for one frame: `floor(nt * recall)` in deterministic
/// mode, a binomial draw with `p = recall` in stochastic mode.
pub fn observe_targets(profile: &ModelProfile, nt_true: u32, rng: Option<&mut ChaCha8Rng>) -> u32 {
    let p = profile.recall.eval(f64::from(nt_true));
    match rng {
        None => (f64::from(nt_true) * p).floor() as u32,
        Some(rng) => {
            let b = Binomial::new(u64::from(nt_true), p).expect("recall validated to [0,1]");
            b.sample(rng) as u32
        }
    }
}

/// Utilization for one frame: affine in observed targets, optionally noisy,
/// clamped to [0, 100].
pub fn update_utilization(
    profile: &ModelProfile,
    nt_observed: u32,
    gu_noise_sigma: f64,
    rng: Option<&mut ChaCha8Rng>,
) -> f64 {
    let mut gu = profile.base_load + profile.per_target_load * f64::from(nt_observed);
    if let Some(rng) = rng {
        if gu_noise_sigma > 0.0 {
            gu += Normal::new(0.0, gu_noise_sigma)
                .expect("sigma validated")
                .sample(rng);
        }
    }
    gu.clamp(0.0, 100.0)
}

/// Next temperature: first-order relaxation toward the steady state for the
/// given utilization, optionally noisy.
pub fn update_temperature(
    tm: &ThermalModel,
    prev_t: f64,
    gu: f64,
    rng: Option<&mut ChaCha8Rng>,
) -> f64 {
    let target = tm.ambient_c + tm.heat_gain_c_per_gu * gu;
    let mut t = prev_t + tm.alpha * (target - prev_t);
    if let Some(rng) = rng {
        if tm.noise_sigma_c > 0.0 {
            t += Normal::new(0.0, tm.noise_sigma_c)
                .expect("sigma validated")
                .sample(rng);
        }
    }
    t
}

/// Materialize a synthetic trace. Seed-free: the same segments always produce
/// the same counts.
pub fn generate_trace(segments: &[TraceSegment]) -> Result<Vec<u32>> {
    let mut trace = Vec::new();
    for (i, seg) in segments.iter().enumerate() {
        let bad = |reason: &str| {
            Err(Error::InvalidScenario(format!(
                "trace segment {i}: {reason}"
            )))
        };
        if seg.frames == 0 {
            return bad("length must be at least 1 frame");
        }
        if ![seg.base_nt, seg.slope, seg.osc_amplitude, seg.osc_period]
            .iter()
            .all(|v| v.is_finite())
        {
            return bad("parameters must be finite");
        }
        if seg.osc_amplitude < 0.0 {
            return bad("oscillation amplitude must be nonnegative");
        }
        if seg.osc_amplitude > 0.0 && seg.osc_period <= 0.0 {
            return bad("oscillation period must be positive");
        }
        for f in 0..seg.frames {
            let x = f64::from(f);
            let osc = if seg.osc_amplitude > 0.0 {
                seg.osc_amplitude * (std::f64::consts::TAU * x / seg.osc_period).sin()
            } else {
                0.0
            };
            let nt = (seg.base_nt + seg.slope * x + osc).round().max(0.0);
            trace.push(nt as u32);
        }
    }
    if trace.is_empty() {
        return Err(Error::InvalidScenario("trace is empty".into()));
    }
    Ok(trace)
}

impl Scenario {
    /// Check every stated invariant; simulation refuses invalid scenarios.
    pub fn validate(&self) -> Result<()> {
        let bad = |reason: String| Err(Error::InvalidScenario(reason));
        if self.models.is_empty() {
            return bad("model roster is empty".into());
        }
        for (i, m) in self.models.iter().enumerate() {
            if m.id != ModelId(i) {
                return bad(format!(
                    "model `{}` has id {} but sits at position {i}",
                    m.label, m.id.0
                ));
            }
            if m.label.is_empty() || m.label.contains([',', '\n', '"']) {
                return bad(format!(
                    "model label `{}` must be nonempty without commas or quotes",
                    m.label
                ));
            }
            if self.models[..i].iter().any(|o| o.label == m.label) {
                return bad(format!("duplicate model label `{}`", m.label));
            }
            if !(m.base_load.is_finite() && m.base_load >= 0.0) {
                return bad(format!(
                    "model `{}`: base_load must be finite and nonnegative",
                    m.label
                ));
            }
            if !(m.per_target_load.is_finite() && m.per_target_load >= 0.0) {
                return bad(format!(
                    "model `{}`: per_target_load must be finite and nonnegative",
                    m.label
                ));
            }
            if !(m.latency_ms.is_finite() && m.latency_ms >= 0.0) {
                return bad(format!(
                    "model `{}`: latency_ms must be finite and nonnegative",
                    m.label
                ));
            }
        }
        // capacity ordering: each model's recall dominates the previous one's.
        // Both curves are linear between union knots, so knot checks suffice.
        for pair in self.models.windows(2) {
            let (small, large) = (&pair[0], &pair[1]);
            let mut xs: Vec<f64> = small
                .recall
                .knots()
                .iter()
                .chain(large.recall.knots())
                .map(|&(x, _)| x)
                .collect();
            xs.sort_by(f64::total_cmp);
            for &x in &xs {
                if large.recall.eval(x) < small.recall.eval(x) {
                    return bad(format!(
                        "recall of `{}` dips below `{}` at nt={x}; larger models must dominate",
                        large.label, small.label
                    ));
                }
            }
        }
        if !(self.thermal.alpha > 0.0 && self.thermal.alpha <= 1.0) {
            return bad(format!(
                "thermal alpha must be in (0, 1], got {}",
                self.thermal.alpha
            ));
        }
        if !self.thermal.noise_sigma_c.is_finite() || self.thermal.noise_sigma_c < 0.0 {
            return bad("thermal noise sigma must be finite and nonnegative".into());
        }
        if !(self.thermal.ambient_c.is_finite() && self.thermal.heat_gain_c_per_gu.is_finite()) {
            return bad("thermal parameters must be finite".into());
        }
        if self.thermal.heat_gain_c_per_gu < 0.0 {
            return bad("thermal heat gain must be nonnegative".into());
        }
        if self.trace.is_empty() {
            return bad("trace is empty".into());
        }
        if self.threshold_k == 0 {
            return bad("switch threshold must be at least 1".into());
        }
        if !self.gu_noise_sigma.is_finite() || self.gu_noise_sigma < 0.0 {
            return bad("utilization noise sigma must be finite and nonnegative".into());
        }
        let noisy = self.gu_noise_sigma > 0.0 || self.thermal.noise_sigma_c > 0.0;
        if noisy && self.rng_seed.is_none() {
            return bad("noise is configured but no rng seed is set; stochastic mode needs an explicit seed".into());
        }
        Ok(())
    }

    pub fn frames(&self) -> usize {
        self.trace.len()
    }
}

/// Run the adaptive arm (see `simulate_arm`).
pub fn simulate(sc: &Scenario, rb: &RuleBase) -> Result<RunLog> {
    simulate_arm(sc, rb, Arm::Adaptive)
}

/// Run one comparison arm over the scenario's trace.
///
/// Each frame: the current model observes targets, utilization and
/// temperature respond, and the controller steps on the resulting telemetry.
/// A committed switch takes effect on the NEXT frame. Temperature starts at
/// ambient. Fully deterministic given the scenario (and seed, if any).
pub fn simulate_arm(sc: &Scenario, rb: &RuleBase, arm: Arm) -> Result<RunLog> {
    sc.validate()?;
    let roster = sc.models.len();
    match arm {
        Arm::Pinned(i) if i >= roster => {
            return Err(Error::InvalidScenario(format!(
                "arm pins model {i} but the roster has {roster} models"
            )))
        }
        Arm::Adaptive if roster > 1 && roster != rb.output().terms().len() => {
            return Err(Error::RosterMismatch {
                roster,
                terms: rb.output().terms().len(),
            })
        }
        _ => {}
    }

    let mut rng = sc.rng_seed.map(ChaCha8Rng::seed_from_u64);
    let mut state = SwitcherState::new(sc.threshold_k, sc.counter_mode, roster)?;
    let mut temp = sc.thermal.ambient_c;
    let mut records = Vec::with_capacity(sc.trace.len());

    for (i, &nt_true) in sc.trace.iter().enumerate() {
        let frame = i as u32;
        let model_idx = match arm {
            Arm::Pinned(p) => p,
            Arm::Adaptive => state.prev_model().0,
        };
        let profile = &sc.models[model_idx];
        let nt_obs = observe_targets(profile, nt_true, rng.as_mut());
        let gu = update_utilization(profile, nt_obs, sc.gu_noise_sigma, rng.as_mut());
        temp = update_temperature(&sc.thermal, temp, gu, rng.as_mut());
        let nt_input = match sc.controller_nt {
            NtSource::Observed => nt_obs,
            NtSource::True => nt_true,
        };
        let telemetry = Telemetry::new(gu, temp, nt_input);

        let (score, switched) = if matches!(arm, Arm::Adaptive) && roster > 1 {
            let decision = state.step(frame, &telemetry, rb)?;
            (decision.score, decision.switched)
        } else {
            // pinned model (or nothing to switch to): record the score anyway
            match rb.infer(&telemetry) {
                Ok(res) => (Some(res.score), false),
                Err(Error::NoRuleFired) => (None, false),
                Err(e) => return Err(e),
            }
        };

        records.push(FrameRecord {
            frame,
            model: profile.label.clone(),
            gu,
            gt: temp,
            nt_true,
            nt_obs,
            score,
            switched,
        });
    }

    Ok(RunLog {
        records,
        scenario_name: Some(sc.name.clone()),
        seed: sc.rng_seed,
    })
}
