//! Experiment harness: the XOR toy simulation and the desk-scale text study.

pub mod text;
pub mod toy;

pub use text::{
    desk_corpus, run_text_experiment, ArmKind, ArmResult, Classifier, DeskCorpusConfig, TextReport, TextStudyConfig,
};
pub use toy::{generate_toy, guessed_predictor, run_toy_experiment, GuessedModel, ToyConfig, ToyReport, ToyRow};
