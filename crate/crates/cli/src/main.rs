use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use fuzzswitch::{
    builtin_rulebase, check_completeness, format_rule, load_rules, load_scenario, read_runlog_csv,
    select_model, simulate_arm, summarize, write_runlog_csv, Arm, Error, Result, RuleBase,
    RunSummary, Scenario, Telemetry, DEFAULT_BIN_WIDTH,
};

#[derive(Parser)]
#[command(
    name = "fuzzswitch",
    version,
    about = "Fuzzy model-switching controller and trace-driven device simulator"
)]
struct Cli {
    /// Print human-readable tables instead of JSON
    #[arg(long, global = true)]
    pretty: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Score one telemetry sample and name the model it selects
    Eval(EvalArgs),
    /// Run a scenario trace through a comparison arm and write the frame log
    Simulate(SimulateArgs),
    /// Summarize a frame log: throughput, switches, temperature
    Report(ReportArgs),
    /// Parse a rule document and report antecedent coverage
    CheckRules(CheckRulesArgs),
}

#[derive(Args)]
struct EvalArgs {
    /// GPU utilization, percent
    #[arg(long)]
    gu: f64,
    /// GPU temperature, degrees Celsius
    #[arg(long)]
    gt: f64,
    /// Targets detected in the current frame
    #[arg(long)]
    nt: u32,
    /// Rule document; defaults to the built-in table
    #[arg(long)]
    rules: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    /// Scenario TOML file
    #[arg(long)]
    scenario: PathBuf,
    /// Where to write the frame log CSV
    #[arg(long)]
    out: PathBuf,
    /// Override the scenario's RNG seed (turns on stochastic detection)
    #[arg(long)]
    seed: Option<u64>,
    /// `adaptive` or one of the scenario's model labels
    #[arg(long, default_value = "adaptive", conflicts_with = "all_arms")]
    arm: String,
    /// Run every arm in parallel, suffixing each log file with the arm name
    #[arg(long)]
    all_arms: bool,
}

#[derive(Args)]
struct ReportArgs {
    /// Frame log CSV produced by `simulate`
    #[arg(long = "in", value_name = "PATH")]
    input: PathBuf,
    /// Histogram bin width, frames
    #[arg(long, default_value_t = DEFAULT_BIN_WIDTH, value_parser = clap::value_parser!(u32).range(1..))]
    bins: u32,
}

#[derive(Args)]
struct CheckRulesArgs {
    /// Rule document to validate
    #[arg(long)]
    rules: PathBuf,
}

fn main() -> ExitCode {
    // die quietly when stdout closes early (e.g. piped into `head`)
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let usage_error =
                !matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion);
            let _ = e.print();
            return ExitCode::from(if usage_error { 1 } else { 0 });
        }
    };
    let pretty = cli.pretty;
    let result = match cli.command {
        Command::Eval(args) => cmd_eval(args, pretty),
        Command::Simulate(args) => cmd_simulate(args, pretty),
        Command::Report(args) => cmd_report(args, pretty),
        Command::CheckRules(args) => cmd_check_rules(args, pretty),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

/// 2 for invalid inputs, 3 for failures that can hit well-formed runs.
fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Io { .. } | Error::NoRuleFired | Error::AvtgUndefined => 3,
        _ => 2,
    }
}

fn load_rulebase(path: Option<&Path>) -> Result<RuleBase> {
    match path {
        Some(p) => load_rules(p),
        None => Ok(builtin_rulebase()),
    }
}

/// Positional model names for a roster that mirrors the output terms.
fn model_label(index: usize, roster: usize) -> String {
    if roster == 3 {
        ["small", "medium", "large"][index].to_string()
    } else {
        format!("model_{index}")
    }
}

fn cmd_eval(args: EvalArgs, pretty: bool) -> Result<()> {
    let rb = load_rulebase(args.rules.as_deref())?;
    let telemetry = Telemetry::new(args.gu, args.gt, args.nt);
    let result = rb.infer(&telemetry)?;
    let roster = rb.output().terms().len();
    let model = select_model(result.score, rb.output(), roster)?;
    let label = model_label(model.0, roster);

    let fired: Vec<(f64, String)> = rb
        .rules()
        .iter()
        .zip(&result.per_rule_strengths)
        .filter(|(_, &s)| s > 0.0)
        .map(|(r, &s)| (s, format_rule(&rb, r)))
        .collect();

    if pretty {
        println!("score {:.6}", result.score);
        println!("model {label}");
        println!("fired rules");
        for (s, text) in &fired {
            println!("  {s:.6}  {text}");
        }
        for c in &result.clamp_events {
            println!("clamped {} {} -> {}", c.variable, c.raw, c.clamped);
        }
    } else {
        let doc = json!({
            "score": result.score,
            "model": label,
            "fired": fired
                .iter()
                .map(|(s, text)| json!({ "strength": s, "rule": text }))
                .collect::<Vec<_>>(),
            "clamped": result
                .clamp_events
                .iter()
                .map(|c| json!({ "variable": c.variable, "raw": c.raw, "clamped": c.clamped }))
                .collect::<Vec<_>>(),
        });
        println!("{doc}");
    }
    Ok(())
}

struct ArmReport {
    name: String,
    out: PathBuf,
    summary: RunSummary,
}

fn resolve_arm(sc: &Scenario, name: &str) -> Result<Arm> {
    if name == "adaptive" {
        return Ok(Arm::Adaptive);
    }
    match sc.models.iter().position(|m| m.label == name) {
        Some(i) => Ok(Arm::Pinned(i)),
        None => {
            let mut options: Vec<&str> = vec!["adaptive"];
            options.extend(sc.models.iter().map(|m| m.label.as_str()));
            Err(Error::InvalidScenario(format!(
                "unknown arm `{name}`; expected one of {}",
                options.join(", ")
            )))
        }
    }
}

fn arm_out_path(out: &Path, arm: &str) -> PathBuf {
    let stem = out.file_stem().and_then(|s| s.to_str()).unwrap_or("run");
    let ext = out.extension().and_then(|s| s.to_str()).unwrap_or("csv");
    out.with_file_name(format!("{stem}.{arm}.{ext}"))
}

fn run_arm(sc: &Scenario, rb: &RuleBase, name: &str, arm: Arm, out: PathBuf) -> Result<ArmReport> {
    let log = simulate_arm(sc, rb, arm)?;
    write_runlog_csv(&log, &out)?;
    let summary = summarize(&log, DEFAULT_BIN_WIDTH)?;
    Ok(ArmReport {
        name: name.to_string(),
        out,
        summary,
    })
}

fn cmd_simulate(args: SimulateArgs, pretty: bool) -> Result<()> {
    let mut sc = load_scenario(&args.scenario)?;
    if let Some(seed) = args.seed {
        sc.rng_seed = Some(seed);
    }
    let rb = builtin_rulebase();

    let reports: Vec<ArmReport> = if args.all_arms {
        let mut arms: Vec<(String, Arm)> = vec![("adaptive".into(), Arm::Adaptive)];
        arms.extend(
            sc.models
                .iter()
                .enumerate()
                .map(|(i, m)| (m.label.clone(), Arm::Pinned(i))),
        );
        // independent runs: one thread per arm
        let results: Vec<Result<ArmReport>> = std::thread::scope(|scope| {
            let handles: Vec<_> = arms
                .iter()
                .map(|(name, arm)| {
                    let (sc, rb) = (&sc, &rb);
                    let out = arm_out_path(&args.out, name);
                    scope.spawn(move || run_arm(sc, rb, name, *arm, out))
                })
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("simulation thread panicked"))
                .collect()
        });
        results.into_iter().collect::<Result<Vec<_>>>()?
    } else {
        let arm = resolve_arm(&sc, &args.arm)?;
        vec![run_arm(&sc, &rb, &args.arm, arm, args.out.clone())?]
    };

    if pretty {
        for r in &reports {
            print_summary(&format!("arm {}", r.name), Some(&r.out), &r.summary);
        }
    } else {
        let arms: Vec<_> = reports
            .iter()
            .map(|r| {
                json!({
                    "arm": r.name,
                    "out": r.out.display().to_string(),
                    "summary": r.summary,
                })
            })
            .collect();
        let doc = if args.all_arms {
            json!({ "scenario": sc.name, "arms": arms })
        } else {
            json!({ "scenario": sc.name, "arm": arms[0] })
        };
        println!("{doc}");
    }
    Ok(())
}

fn print_summary(heading: &str, out: Option<&Path>, s: &RunSummary) {
    println!("{heading}");
    if let Some(out) = out {
        println!("  log              {}", out.display());
    }
    println!("  avtg             {:.6}", s.avtg);
    println!("  observed targets {}", s.total_nt_observed);
    println!("  total gu         {:.6}", s.total_gu);
    println!("  switches         {}", s.switch_count);
    let hist = s
        .switch_histogram
        .iter()
        .map(|b| format!("[{},{}) {}", b.start_frame, b.end_frame, b.count))
        .collect::<Vec<_>>()
        .join("  ");
    println!("  switch histogram {hist}");
    println!("  peak temp        {:.3} C", s.peak_temp_c);
    println!("  mean temp        {:.3} C", s.mean_temp_c);
    let frames = s
        .per_model_frames
        .iter()
        .map(|(m, n)| format!("{m} {n}"))
        .collect::<Vec<_>>()
        .join(", ");
    println!("  frames per model {frames}");
}

fn cmd_report(args: ReportArgs, pretty: bool) -> Result<()> {
    let log = read_runlog_csv(&args.input)?;
    if log.records.is_empty() {
        return Err(Error::InvalidRunLog {
            row: 0,
            message: "empty log".into(),
        });
    }
    let summary = summarize(&log, args.bins)?;
    if pretty {
        print_summary("run", None, &summary);
        println!("frame,gt,model");
        for r in &log.records {
            println!("{},{:.6},{}", r.frame, r.gt, r.model);
        }
    } else {
        let doc = json!({
            "summary": summary,
            "series": {
                "frame": log.records.iter().map(|r| r.frame).collect::<Vec<_>>(),
                "gt": log.records.iter().map(|r| r.gt).collect::<Vec<_>>(),
                "model": log.records.iter().map(|r| r.model.as_str()).collect::<Vec<_>>(),
            },
        });
        println!("{doc}");
    }
    Ok(())
}

fn cmd_check_rules(args: CheckRulesArgs, pretty: bool) -> Result<()> {
    let rb = load_rules(&args.rules)?;
    let report = check_completeness(&rb);
    if pretty {
        println!(
            "{}/{} covered, {} conflicts",
            report.covered,
            report.total,
            report.conflicts.len()
        );
        for gap in &report.gaps {
            println!("warning: no rule for {gap}");
        }
    } else {
        let doc = json!({
            "covered": report.covered,
            "total": report.total,
            "conflicts": report.conflicts,
            "gaps": report.gaps,
            "complete": report.is_complete(),
        });
        println!("{doc}");
    }
    Ok(())
}
