//! Distractor generation for multiple-choice questions built from
//! question-answer pairs over annotated articles.
//!
//! Each answer is scanned for target words. Numbers and dates are perturbed,
//! named entities are swapped for peers, and other content words are replaced
//! by embedding neighbors ranked on similarity, taxonomy closeness and spelling
//! distance.

pub mod annotation;
pub mod assembly;
pub mod config;
pub mod entity;
pub mod eval;
pub mod lexres;
pub mod numeric;
pub mod semantic;

pub use assembly::{generate_mcq, qap_rng, AssemblyError, Mcq, Resources};
pub use config::{load_config, Config};
