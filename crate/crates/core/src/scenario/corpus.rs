//! Seeded batch generation of compiled scenarios.

use rand::seq::SliceRandom;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::detector::ErrorType;
use crate::error::CorpusError;
use crate::scenario::compiler::{compile, CompiledScenario, DurationModel};
use crate::scenario::script::{parse_script, Marker, Piece, ScenarioScript, ScriptItem};
use crate::scenario::templates::{ScenarioClass, TemplateSet};
use crate::schema::{DialogueDocument, EventEntry};

const FILLERS: [&str; 5] = ["well", "so", "um", "now", "alright"];

/// Scenario counts per class plus the generator seed.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct CorpusMix {
    /// Indexed like `ScenarioClass::ALL`.
    pub counts: [usize; 8],
    pub seed: u64,
}

impl CorpusMix {
    pub fn new(seed: u64) -> Self {
        CorpusMix { counts: [0; 8], seed }
    }

    pub fn with(mut self, class: ScenarioClass, count: usize) -> Self {
        self.counts[class as usize] = count;
        self
    }

    /// Same count for every class.
    pub fn uniform(count: usize, seed: u64) -> Self {
        CorpusMix {
            counts: [count; 8],
            seed,
        }
    }

    /// Reads `class=count` entries separated by commas or whitespace.
    pub fn parse(entries: &str, seed: u64) -> Result<Self, CorpusError> {
        let mut mix = CorpusMix::new(seed);
        for entry in entries.split([',', ' ']).filter(|e| !e.trim().is_empty()) {
            let (class, count) = entry
                .split_once('=')
                .ok_or_else(|| CorpusError::BadMixEntry(entry.to_string()))?;
            let class: ScenarioClass = class.parse()?;
            let count = count
                .trim()
                .parse::<usize>()
                .map_err(|_| CorpusError::BadMixEntry(entry.to_string()))?;
            mix.counts[class as usize] = count;
        }
        Ok(mix)
    }

    pub fn count(&self, class: ScenarioClass) -> usize {
        self.counts[class as usize]
    }

    pub fn total(&self) -> usize {
        self.counts.iter().sum()
    }

    pub fn validate(&self) -> Result<(), CorpusError> {
        if self.total() == 0 {
            Err(CorpusError::EmptyMix)
        } else {
            Ok(())
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorpusScenario {
    pub id: String,
    pub class: ScenarioClass,
    pub scenario: CompiledScenario,
}

/// Serialized form of one corpus entry.
#[derive(Debug, Clone, Serialize)]
pub struct CorpusRecord<'a> {
    pub id: &'a str,
    pub class: ScenarioClass,
    pub ground_truth_error: Option<ErrorType>,
    pub ground_truth_events: Vec<EventEntry>,
    #[serde(flatten)]
    pub document: &'a DialogueDocument,
}

impl CorpusScenario {
    pub fn record(&self) -> CorpusRecord<'_> {
        CorpusRecord {
            id: &self.id,
            class: self.class,
            ground_truth_error: self.scenario.ground_truth_error,
            ground_truth_events: self
                .scenario
                .ground_truth_events
                .iter()
                .map(EventEntry::from_event)
                .collect(),
            document: &self.scenario.transcript_meta,
        }
    }
}

struct Job {
    index: usize,
    class: ScenarioClass,
    seed: u64,
}

fn plan(mix: &CorpusMix, templates: &dyn TemplateSet) -> Result<Vec<Job>, CorpusError> {
    mix.validate()?;
    for class in ScenarioClass::ALL {
        if mix.count(class) > 0 && templates.pool(class).is_empty() {
            return Err(CorpusError::EmptyPool(class.as_str()));
        }
    }
    let mut master = ChaCha8Rng::seed_from_u64(mix.seed);
    let mut jobs = Vec::with_capacity(mix.total());
    for class in ScenarioClass::ALL {
        for _ in 0..mix.count(class) {
            jobs.push(Job {
                index: jobs.len(),
                class,
                seed: master.next_u64(),
            });
        }
    }
    Ok(jobs)
}

/// Turns that can take extra leading words without changing any event:
/// plain, unmarked, and not a reply at a `[BC]` anchor.
fn jitter_words(script: &mut ScenarioScript, rng: &mut ChaCha8Rng) {
    let mut after_anchor = false;
    for item in &mut script.items {
        let ScriptItem::Turn(turn) = item else {
            after_anchor = false;
            continue;
        };
        let safe = turn.prefix.is_none() && turn.markers.is_empty() && !after_anchor;
        after_anchor = turn.has_mark(Marker::Backchannel);
        if !safe {
            continue;
        }
        let n = rng.gen_range(0..=2);
        for _ in 0..n {
            let filler = *FILLERS.choose(rng).expect("non-empty");
            turn.pieces.insert(0, Piece::Word(filler.to_string()));
            turn.text = format!("{filler} {}", turn.text);
        }
    }
}

/// Delayed gaps are redrawn from 3.5 s to 5.0 s in 100 ms steps.
fn jitter_pauses(script: &mut ScenarioScript, rng: &mut ChaCha8Rng) {
    for item in &mut script.items {
        if let ScriptItem::Pause(p) = item {
            p.ms = 3500 + 100 * rng.gen_range(0..=15u64);
        }
    }
}

fn build(job: &Job, templates: &dyn TemplateSet, model: &DurationModel) -> Result<CorpusScenario, CorpusError> {
    let mut rng = ChaCha8Rng::seed_from_u64(job.seed);
    let pool = templates.pool(job.class);
    let doc = &pool[rng.gen_range(0..pool.len())];
    let class = job.class.as_str();
    let mut script = parse_script(doc).map_err(|source| CorpusError::Script { class, source })?;
    jitter_words(&mut script, &mut rng);
    if job.class == ScenarioClass::Delayed {
        jitter_pauses(&mut script, &mut rng);
    }
    let scenario = compile(&script, model).map_err(|source| CorpusError::Compile { class, source })?;
    Ok(CorpusScenario {
        id: format!("{class}-{:05}", job.index),
        class: job.class,
        scenario,
    })
}

pub fn generate_corpus(
    mix: &CorpusMix,
    templates: &dyn TemplateSet,
    model: &DurationModel,
) -> Result<Vec<CorpusScenario>, CorpusError> {
    plan(mix, templates)?
        .iter()
        .map(|job| build(job, templates, model))
        .collect()
}

/// Same output as [`generate_corpus`], compiled on the rayon pool.
pub fn generate_corpus_parallel(
    mix: &CorpusMix,
    templates: &dyn TemplateSet,
    model: &DurationModel,
) -> Result<Vec<CorpusScenario>, CorpusError> {
    plan(mix, templates)?
        .par_iter()
        .map(|job| build(job, templates, model))
        .collect()
}
