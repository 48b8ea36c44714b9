mod config;

use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use duplex_core::reward::{clipped_objective, ClassScores};
use duplex_core::{
    analyze, compile, compute_metrics, generate_corpus, generate_corpus_parallel, group_advantages, parse_evaluation,
    parse_script_str, reward, validate_timeline, BuiltinTemplates, CorpusMix, DialogueDocument, ErrorType, EventEntry,
    Fixed6, RewardWeights,
};
use serde::Serialize;

use crate::config::ToolConfig;

#[derive(Debug, Parser)]
#[command(
    name = "duplex",
    version,
    about = "Full-duplex dialogue timing analysis and reward tools"
)]
struct Cli {
    /// JSON file overriding the built-in configuration.
    #[arg(long, global = true, env = "DUPLEX_CONFIG")]
    config: Option<PathBuf>,

    /// Write the result here instead of stdout.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Compile a marker-language script into a labelled timeline.
    Compile {
        /// Script JSON; stdin when omitted or "-".
        input: Option<PathBuf>,
    },
    /// Generate a seeded corpus of compiled scenarios.
    GenCorpus {
        /// Scenario counts as class=count, e.g. smooth=5 barge_in=2.
        #[arg(long, required = true, num_args = 1.., value_delimiter = ',')]
        mix: Vec<String>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Compile on one thread.
        #[arg(long)]
        serial: bool,
    },
    /// Decompose a timeline document, classify its events and report errors.
    Analyze { input: Option<PathBuf> },
    /// Reward an evaluator output, or a JSON array of K outputs.
    Score {
        input: Option<PathBuf>,
        #[arg(long, value_parser = parse_ground_truth)]
        ground_truth: i64,
        /// Format and accuracy weights as fmt,acc.
        #[arg(long, value_parser = parse_weights)]
        weights: Option<RewardWeights>,
        /// Required group size in group mode.
        #[arg(long)]
        k: Option<usize>,
    },
    /// Group-normalized advantages of a JSON array of rewards.
    Advantage {
        input: Option<PathBuf>,
        /// Policy ratios, comma separated; adds the clipped objective.
        #[arg(long, value_delimiter = ',')]
        ratios: Option<Vec<f64>>,
        #[arg(long)]
        epsilon: Option<f64>,
    },
    /// Accuracy, per-class F1, macro F1 and confusion matrix.
    Evaluate {
        /// {"predictions": [...], "labels": [...]} or [predictions, labels].
        input: Option<PathBuf>,
        #[arg(long, value_delimiter = ',', default_value = "CR,SE,QuickE,SlowE")]
        classes: Vec<String>,
    },
}

fn parse_ground_truth(s: &str) -> Result<i64, String> {
    match s.trim() {
        "0" => Ok(0),
        "1" => Ok(1),
        other => Err(format!("expected 0 or 1, got {other:?}")),
    }
}

fn parse_weights(s: &str) -> Result<RewardWeights, String> {
    let (f, a) = s.split_once(',').ok_or("expected fmt,acc")?;
    let parse = |v: &str| v.trim().parse::<f64>().map_err(|e| format!("{v:?}: {e}"));
    Ok(RewardWeights {
        lambda_fmt: parse(f)?,
        lambda_acc: parse(a)?,
    })
}

fn read_input(path: Option<&Path>) -> Result<String> {
    match path {
        Some(p) if p != Path::new("-") => {
            std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))
        }
        _ => {
            let mut text = String::new();
            std::io::stdin().read_to_string(&mut text).context("reading stdin")?;
            Ok(text)
        }
    }
}

fn fixed(values: &[f64]) -> Vec<Fixed6> {
    values.iter().copied().map(Fixed6).collect()
}

#[derive(Serialize)]
struct CompileOutput<'a> {
    ground_truth_error: Option<ErrorType>,
    ground_truth_events: Vec<EventEntry>,
    #[serde(flatten)]
    document: &'a DialogueDocument,
}

#[derive(Serialize)]
struct ScoreOutput {
    format_ok: bool,
    score: Option<u8>,
    reward: Fixed6,
}

#[derive(Serialize)]
struct GroupOutput {
    rewards: Vec<Fixed6>,
    mean: Fixed6,
    std: Fixed6,
    advantages: Vec<Fixed6>,
    #[serde(skip_serializing_if = "Option::is_none")]
    objective: Option<Fixed6>,
}

#[derive(Serialize)]
struct ClassOutput<'a> {
    class: &'a str,
    precision: Fixed6,
    recall: Fixed6,
    f1: Fixed6,
    support: u64,
}

#[derive(Serialize)]
struct MetricsOutput<'a> {
    classes: &'a [String],
    accuracy: Fixed6,
    macro_f1: Fixed6,
    per_class: Vec<ClassOutput<'a>>,
    confusion: &'a [Vec<u64>],
}

fn json_labels(value: &serde_json::Value, what: &str) -> Result<Vec<String>> {
    let items = value
        .as_array()
        .with_context(|| format!("{what} must be a JSON array"))?;
    items
        .iter()
        .map(|v| match v {
            serde_json::Value::String(s) => Ok(s.clone()),
            serde_json::Value::Number(n) => Ok(n.to_string()),
            other => bail!("{what}: unsupported label {other}"),
        })
        .collect()
}

fn run(cli: Cli) -> Result<String> {
    let mut cfg = ToolConfig::load(cli.config.as_deref())?;
    match cli.command {
        Command::Compile { input } => {
            cfg.validate()?;
            let script = parse_script_str(&read_input(input.as_deref())?)?;
            let compiled = compile(&script, &cfg.duration)?;
            let out = CompileOutput {
                ground_truth_error: compiled.ground_truth_error,
                ground_truth_events: compiled
                    .ground_truth_events
                    .iter()
                    .map(EventEntry::from_event)
                    .collect(),
                document: &compiled.transcript_meta,
            };
            Ok(serde_json::to_string_pretty(&out)?)
        }
        Command::GenCorpus { mix, seed, serial } => {
            cfg.validate()?;
            let mix = CorpusMix::parse(&mix.join(","), seed)?;
            let templates = BuiltinTemplates::default();
            let corpus = if serial {
                generate_corpus(&mix, &templates, &cfg.duration)?
            } else {
                generate_corpus_parallel(&mix, &templates, &cfg.duration)?
            };
            let records: Vec<_> = corpus.iter().map(|s| s.record()).collect();
            Ok(serde_json::to_string_pretty(&records)?)
        }
        Command::Analyze { input } => {
            cfg.validate()?;
            let value: serde_json::Value =
                serde_json::from_str(&read_input(input.as_deref())?).context("input is not JSON")?;
            let doc = duplex_core::parse_document(value)?;
            let timeline = validate_timeline(&doc)?;
            let report = analyze(&timeline, &cfg.analysis)?;
            Ok(serde_json::to_string_pretty(&report.to_document())?)
        }
        Command::Score {
            input,
            ground_truth,
            weights,
            k,
        } => {
            if let Some(w) = weights {
                cfg.weights = w;
            }
            if let Some(k) = k {
                cfg.k = k;
            }
            cfg.validate()?;
            let text = read_input(input.as_deref())?;
            let group = text
                .trim_start()
                .starts_with('[')
                .then(|| serde_json::from_str::<Vec<String>>(&text).ok())
                .flatten();
            match group {
                Some(candidates) => {
                    if candidates.len() != cfg.k {
                        bail!("expected a group of k = {} candidates, got {}", cfg.k, candidates.len());
                    }
                    let rewards = candidates
                        .iter()
                        .map(|c| reward(c, ground_truth, &cfg.weights))
                        .collect::<Result<Vec<_>, _>>()?;
                    let adv = group_advantages(&rewards)?;
                    let out = GroupOutput {
                        rewards: fixed(&adv.rewards),
                        mean: Fixed6(adv.mean),
                        std: Fixed6(adv.std),
                        advantages: fixed(&adv.advantages),
                        objective: None,
                    };
                    Ok(serde_json::to_string_pretty(&out)?)
                }
                None => {
                    let eval = parse_evaluation(&text);
                    let out = ScoreOutput {
                        format_ok: eval.format_ok,
                        score: eval.score,
                        reward: Fixed6(reward(&text, ground_truth, &cfg.weights)?),
                    };
                    Ok(serde_json::to_string_pretty(&out)?)
                }
            }
        }
        Command::Advantage { input, ratios, epsilon } => {
            if let Some(e) = epsilon {
                cfg.epsilon = e;
            }
            cfg.validate()?;
            let rewards: Vec<f64> =
                serde_json::from_str(&read_input(input.as_deref())?).context("expected a JSON array of rewards")?;
            let adv = group_advantages(&rewards)?;
            match ratios {
                None => Ok(serde_json::to_string(&fixed(&adv.advantages))?),
                Some(ratios) => {
                    let objective = clipped_objective(&rewards, &ratios, cfg.epsilon)?;
                    let out = GroupOutput {
                        rewards: fixed(&adv.rewards),
                        mean: Fixed6(adv.mean),
                        std: Fixed6(adv.std),
                        advantages: fixed(&adv.advantages),
                        objective: Some(Fixed6(objective)),
                    };
                    Ok(serde_json::to_string_pretty(&out)?)
                }
            }
        }
        Command::Evaluate { input, classes } => {
            cfg.validate()?;
            let value: serde_json::Value =
                serde_json::from_str(&read_input(input.as_deref())?).context("input is not JSON")?;
            let (preds, labels) = match &value {
                serde_json::Value::Array(pair) if pair.len() == 2 => (&pair[0], &pair[1]),
                serde_json::Value::Object(map) => (
                    map.get("predictions").context("missing \"predictions\"")?,
                    map.get("labels").context("missing \"labels\"")?,
                ),
                _ => bail!("expected {{\"predictions\": [...], \"labels\": [...]}} or [predictions, labels]"),
            };
            let preds = json_labels(preds, "predictions")?;
            let labels = json_labels(labels, "labels")?;
            let classes: Vec<String> = classes.into_iter().map(|c| c.trim().to_string()).collect();
            let m = compute_metrics(&preds, &labels, &classes)?;
            let per_class = m
                .classes
                .iter()
                .zip(&m.per_class)
                .map(|(c, s): (&String, &ClassScores)| ClassOutput {
                    class: c,
                    precision: Fixed6(s.precision),
                    recall: Fixed6(s.recall),
                    f1: Fixed6(s.f1),
                    support: s.support,
                })
                .collect();
            let out = MetricsOutput {
                classes: &m.classes,
                accuracy: Fixed6(m.accuracy),
                macro_f1: Fixed6(m.macro_f1),
                per_class,
                confusion: &m.confusion,
            };
            Ok(serde_json::to_string_pretty(&out)?)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => e.exit(),
    };
    let output = cli.output.clone();
    let result = run(cli).and_then(|mut text| {
        text.push('\n');
        match &output {
            Some(path) => std::fs::write(path, text).with_context(|| format!("writing {}", path.display())),
            None => std::io::stdout().write_all(text.as_bytes()).context("writing stdout"),
        }
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
