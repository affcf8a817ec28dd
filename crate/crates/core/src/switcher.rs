//! Adaptive model selection with a K-frame switching safety mechanism.

use serde::{Deserialize, Serialize};

use crate::engine::Telemetry;
use crate::error::{Error, Result};
use crate::rules::RuleBase;
use crate::variable::LinguisticVariable;

/// Index into a scenario's model roster (0 = smallest, ascending capacity).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ModelId(pub usize);

/// How the stability counter treats disagreeing frames.
///
/// `SameCandidate` counts only consecutive frames indicating one identical
/// non-current model; any change of candidate restarts the count.
/// `AnyDifference` counts every frame whose indication differs from the
/// current model, and a switch adopts the latest indication.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CounterMode {
    #[default]
    SameCandidate,
    AnyDifference,
}

/// The switcher's per-stream state: current model, pending candidate, and the
/// stability counter. `streak` is always below `threshold_k` between steps;
/// reaching it commits the switch and clears the counter within the same step.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SwitcherState {
    prev_model: ModelId,
    candidate: Option<ModelId>,
    streak: u32,
    threshold_k: u32,
    counter_mode: CounterMode,
    roster_size: usize,
}

/// Outcome of one controller step.
///
/// `model_used` is the model that ran THIS frame; a switch committed by this
/// step only affects the next frame. `score` is absent when no rule fired and
/// the controller held its current model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Decision {
    pub frame_index: u32,
    pub model_used: ModelId,
    pub candidate_model: ModelId,
    pub score: Option<f64>,
    pub switched: bool,
}

/// Map a crisp score to the roster position of the output term with maximal
/// membership; ties resolve toward the smaller model.
pub fn select_model(
    score: f64,
    output: &LinguisticVariable,
    roster_size: usize,
) -> Result<ModelId> {
    let terms = output.terms();
    if roster_size != terms.len() {
        return Err(Error::RosterMismatch {
            roster: roster_size,
            terms: terms.len(),
        });
    }
    let x = output.clamp(score);
    let mut best = 0;
    let mut best_mu = f64::NEG_INFINITY;
    for (i, term) in terms.iter().enumerate() {
        let mu = term.mf.eval(x);
        if mu > best_mu {
            best = i;
            best_mu = mu;
        }
    }
    Ok(ModelId(best))
}

impl SwitcherState {
    /// Fresh state: current model is the smallest in the roster, counter clear.
    pub fn new(threshold_k: u32, counter_mode: CounterMode, roster_size: usize) -> Result<Self> {
        if threshold_k == 0 {
            return Err(Error::InvalidScenario(
                "switch threshold must be at least 1".into(),
            ));
        }
        if roster_size == 0 {
            return Err(Error::InvalidScenario("model roster is empty".into()));
        }
        Ok(SwitcherState {
            prev_model: ModelId(0),
            candidate: None,
            streak: 0,
            threshold_k,
            counter_mode,
            roster_size,
        })
    }

    /// Initial state with the same configuration (threshold, mode, roster).
    pub fn reset(&self) -> Self {
        SwitcherState {
            prev_model: ModelId(0),
            candidate: None,
            streak: 0,
            ..*self
        }
    }

    /// The model the next frame should run.
    pub fn prev_model(&self) -> ModelId {
        self.prev_model
    }

    pub fn candidate(&self) -> Option<ModelId> {
        self.candidate
    }

    pub fn streak(&self) -> u32 {
        self.streak
    }

    pub fn threshold_k(&self) -> u32 {
        self.threshold_k
    }

    pub fn counter_mode(&self) -> CounterMode {
        self.counter_mode
    }

    /// Run inference on one frame's telemetry and advance the state machine.
    ///
    /// If no rule fires, the current model is held, the counter is left
    /// untouched, and the decision carries no score (fail-safe hold).
    pub fn step(&mut self, frame_index: u32, t: &Telemetry, rb: &RuleBase) -> Result<Decision> {
        let model_used = self.prev_model;
        let score = match rb.infer(t) {
            Ok(result) => result.score,
            Err(Error::NoRuleFired) => {
                return Ok(Decision {
                    frame_index,
                    model_used,
                    candidate_model: model_used,
                    score: None,
                    switched: false,
                })
            }
            Err(e) => return Err(e),
        };
        let m_opt = select_model(score, rb.output(), self.roster_size)?;

        if m_opt == self.prev_model {
            self.candidate = None;
            self.streak = 0;
        } else {
            match self.counter_mode {
                CounterMode::SameCandidate if self.candidate == Some(m_opt) => self.streak += 1,
                CounterMode::SameCandidate => {
                    self.candidate = Some(m_opt);
                    self.streak = 1;
                }
                CounterMode::AnyDifference => {
                    self.candidate = Some(m_opt);
                    self.streak += 1;
                }
            }
        }

        let mut switched = false;
        if self.streak >= self.threshold_k {
            self.prev_model = self
                .candidate
                .take()
                .expect("positive streak implies a candidate");
            self.streak = 0;
            switched = true;
        }

        Ok(Decision {
            frame_index,
            model_used,
            candidate_model: m_opt,
            score: Some(score),
            switched,
        })
    }
}
