//! Fuzzy-controlled model switching for frame-based inference workloads.
//!
//! A Mamdani controller reads three telemetry signals each frame — GPU
//! utilization, GPU temperature, and the number of detected targets — and
//! produces a score that picks one model out of a small/medium/large roster.
//! A hysteresis counter suppresses chattering: a switch commits only after
//! the controller has insisted on the same change for `K` consecutive
//! frames. The crate also ships a closed-loop device simulator so the
//! controller can be evaluated against fixed-model baselines on synthetic
//! or recorded traces.
//!
//! ```
//! use fuzzswitch::{builtin_rulebase, Telemetry};
//!
//! let rb = builtin_rulebase();
//! let cool_and_busy = Telemetry::new(20.0, 35.0, 120);
//! let score = rb.infer(&cool_and_busy).unwrap().score;
//! assert!(score > 62.5); // spare capacity plus many targets favors the large model
//! ```

pub mod dsl;
pub mod engine;
mod error;
pub mod io;
pub mod membership;
pub mod metrics;
pub mod rules;
pub mod sim;
pub mod switcher;
pub mod variable;

pub use dsl::{
    builtin_rulebase, check_completeness, check_rule_list, format_rule, parse_rules,
    serialize_rules, CompletenessReport, BUILTIN_RULES,
};
pub use engine::{
    aggregate, defuzzify_centroid, implicate, AggregatedOutput, ClampEvent, InferenceResult,
    Telemetry,
};
pub use error::{Error, Result};
pub use io::{
    load_rules, load_scenario, load_trace_csv, read_runlog_csv, write_runlog, write_runlog_csv,
    TraceSource,
};
pub use membership::MembershipFunction;
pub use metrics::{avtg, summarize, switch_histogram, HistogramBin, RunSummary, DEFAULT_BIN_WIDTH};
pub use rules::{firing_strength, sample_grid, Rule, RuleBase, TNorm, OUTPUT_SAMPLES};
pub use sim::{
    generate_trace, observe_targets, simulate, simulate_arm, update_temperature,
    update_utilization, Arm, FrameRecord, ModelProfile, NtSource, RecallCurve, RunLog, Scenario,
    ThermalModel, TraceSegment,
};
pub use switcher::{select_model, CounterMode, Decision, ModelId, SwitcherState};
pub use variable::{LinguisticVariable, MembershipVector, Term};
