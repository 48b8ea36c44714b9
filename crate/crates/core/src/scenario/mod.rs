//! Scripted scenarios: a marker language, a compiler onto timed tracks and
//! a seeded corpus generator.

pub mod compiler;
pub mod corpus;
pub mod script;
pub mod templates;

pub use compiler::{compile, CompiledScenario, DurationModel};
pub use corpus::{generate_corpus, generate_corpus_parallel, CorpusMix, CorpusRecord, CorpusScenario};
pub use script::{parse_script, parse_script_str, Marker, Piece, Prefix, ScenarioScript, ScriptItem, SpokenTurn};
pub use templates::{BuiltinTemplates, CustomTemplates, ScenarioClass, TemplateSet};
