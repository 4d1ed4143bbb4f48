//! Type-3 candidates: generation from the embedding band and hypernyms,
//! filtering, scoring and ranking.
//!
//! Each surviving candidate gets three component scores: embedding
//! similarity `s_v`, Wu-Palmer similarity `s_n`, and an edit-distance score
//! `s_d = 1 − 1/(1 + e^E)`. They are averaged into `r′` (antonyms count
//! `s_v` twice) and ranked by `r = −r′·ln r′`.

use std::cmp::Ordering;
use std::collections::HashSet;

use serde::Serialize;
use thiserror::Error;

use crate::annotation::TargetWord;
use crate::config::Config;
use crate::lexres::{
    hypernym_candidates, is_antonym, neighborhood, wup, LexicalGraph, VectorTable,
};

/// Minimum shared prefix, in characters, for the misspelling filter.
pub const MISSPELLING_PREFIX: usize = 3;
/// Candidates sharing the prefix and closer than this are dropped.
pub const MISSPELLING_DISTANCE: usize = 3;

#[derive(Debug, Error, PartialEq)]
pub enum ScoreError {
    #[error("ranking input for `{candidate}` is {r_prime}, outside (0, 1]")]
    OutOfRange { candidate: String, r_prime: f64 },
}

/// Levenshtein distance over Unicode scalar values.
pub fn levenshtein(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    if a.is_empty() {
        return b.len();
    }
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = vec![0; b.len() + 1];
    for (i, ca) in a.iter().enumerate() {
        cur[0] = i + 1;
        for (j, cb) in b.iter().enumerate() {
            let substitution = prev[j] + usize::from(ca != cb);
            cur[j + 1] = substitution.min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

/// `1 − 1/(1 + e^E)`, or `1/(1 + e^E)` when `inverted`.
pub fn edit_distance_score(distance: usize, inverted: bool) -> f64 {
    let logistic = 1.0 / (1.0 + (distance as f64).exp());
    if inverted {
        logistic
    } else {
        1.0 - logistic
    }
}

/// Averages the component scores; antonyms weight `s_v` twice.
pub fn combined_score(s_v: f64, s_n: f64, s_d: f64, antonym: bool) -> f64 {
    if antonym {
        (2.0 * s_v + s_n + s_d) / 4.0
    } else {
        (s_v + s_n + s_d) / 3.0
    }
}

/// `−r′·ln r′`, defined as 0 at `r′ = 1`.
pub fn entropy_rank(r_prime: f64) -> f64 {
    if r_prime == 1.0 {
        0.0
    } else {
        -r_prime * r_prime.ln()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CandidateSource {
    Embedding,
    Hypernym,
    Both,
}

/// A candidate before scoring.
#[derive(Debug, Clone, PartialEq)]
pub struct RawCandidate {
    pub text: String,
    pub s_v: f64,
    pub source: CandidateSource,
}

impl AsRef<str> for RawCandidate {
    fn as_ref(&self) -> &str {
        &self.text
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Candidate {
    pub text: String,
    pub s_v: f64,
    pub s_n: f64,
    pub s_d: f64,
    pub antonym: bool,
    pub r_prime: f64,
    pub r: f64,
}

/// Forms of the target to try against a resource: as written, lowercased,
/// then the lemma.
fn target_keys(target: &TargetWord) -> Vec<String> {
    let mut keys = vec![
        target.surface.clone(),
        target.surface.to_lowercase(),
        target.lemma.clone(),
    ];
    let mut seen = HashSet::new();
    keys.retain(|k| !k.is_empty() && seen.insert(k.clone()));
    keys
}

/// Embedding neighbors in `[lo, hi]` plus direct hypernyms, deduplicated
/// case-insensitively. Hypernym-only candidates get `s_v = lo`.
pub fn generate_candidates_in(
    target: &TargetWord,
    vectors: &VectorTable,
    graph: &LexicalGraph,
    lo: f64,
    hi: f64,
) -> Vec<RawCandidate> {
    let keys = target_keys(target);
    let mut out: Vec<RawCandidate> = Vec::new();
    let mut seen = HashSet::new();

    if let Some(key) = keys.iter().find(|k| vectors.contains(k)) {
        if let Ok(neighbors) = neighborhood(vectors, key, lo, hi) {
            for (word, sim) in neighbors {
                let text = word.replace('_', " ");
                if seen.insert(text.to_lowercase()) {
                    out.push(RawCandidate {
                        text,
                        s_v: sim,
                        source: CandidateSource::Embedding,
                    });
                }
            }
        }
    }
    if let Some(key) = keys.iter().find(|k| graph.contains(k)) {
        for text in hypernym_candidates(graph, key) {
            let lower = text.to_lowercase();
            if seen.insert(lower.clone()) {
                out.push(RawCandidate {
                    text,
                    s_v: lo,
                    source: CandidateSource::Hypernym,
                });
            } else if let Some(c) = out.iter_mut().find(|c| c.text.to_lowercase() == lower) {
                c.source = CandidateSource::Both;
            }
        }
    }
    out
}

/// Candidates for the configured similarity band.
pub fn generate_candidates(
    target: &TargetWord,
    vectors: &VectorTable,
    graph: &LexicalGraph,
    cfg: &Config,
) -> Vec<RawCandidate> {
    generate_candidates_in(target, vectors, graph, cfg.sim_lo, cfg.sim_hi)
}

fn common_prefix_len(a: &str, b: &str) -> usize {
    a.chars().zip(b.chars()).take_while(|(x, y)| x == y).count()
}

/// Whether a candidate survives both filters: it must not contain the
/// target, and must not look like a misspelling of it.
pub fn passes_filters(target: &str, candidate: &str) -> bool {
    let t = target.to_lowercase();
    let c = candidate.to_lowercase();
    if c.split_whitespace().any(|tok| tok == t) || c.contains(&t) {
        return false;
    }
    !(common_prefix_len(&c, &t) >= MISSPELLING_PREFIX && levenshtein(&c, &t) < MISSPELLING_DISTANCE)
}

/// Drops unsuitable candidates, keeping the order of the rest.
pub fn filter_candidates<C: AsRef<str>>(target: &str, candidates: Vec<C>) -> Vec<C> {
    candidates
        .into_iter()
        .filter(|c| passes_filters(target, c.as_ref()))
        .collect()
}

fn wup_score(graph: &LexicalGraph, target: &TargetWord, candidate: &str) -> Option<f64> {
    let mut forms = vec![candidate.to_string()];
    if let Some(head) = candidate.split_whitespace().last() {
        if head != candidate {
            forms.push(head.to_string());
        }
    }
    let keys = target_keys(target);
    forms
        .iter()
        .find_map(|c| keys.iter().find_map(|t| wup(graph, c, t)))
}

/// Computes every component score and the ranking value for one candidate.
pub fn score_candidate(
    target: &TargetWord,
    candidate: &str,
    s_v: f64,
    graph: &LexicalGraph,
    cfg: &Config,
) -> Result<Candidate, ScoreError> {
    let s_v = s_v.clamp(0.0, 1.0);
    let s_n = wup_score(graph, target, candidate).unwrap_or(cfg.wup_fallback);
    let distance = levenshtein(&candidate.to_lowercase(), &target.surface.to_lowercase());
    let s_d = edit_distance_score(distance, cfg.sd_inverted);
    let antonym = target_keys(target)
        .iter()
        .any(|t| is_antonym(graph, candidate, t));
    let r_prime = combined_score(s_v, s_n, s_d, antonym);
    if !(r_prime > 0.0 && r_prime <= 1.0) {
        return Err(ScoreError::OutOfRange {
            candidate: candidate.to_string(),
            r_prime,
        });
    }
    Ok(Candidate {
        text: candidate.to_string(),
        s_v,
        s_n,
        s_d,
        antonym,
        r_prime,
        r: entropy_rank(r_prime),
    })
}

/// Higher `r` first, then higher `s_v`, then text.
pub fn rank_order(a: &Candidate, b: &Candidate) -> Ordering {
    b.r.total_cmp(&a.r)
        .then_with(|| b.s_v.total_cmp(&a.s_v))
        .then_with(|| a.text.cmp(&b.text))
}

/// The `k` best candidates, or all of them when fewer exist.
pub fn rank_and_select(mut candidates: Vec<Candidate>, k: usize) -> Vec<Candidate> {
    candidates.sort_by(rank_order);
    candidates.truncate(k);
    candidates
}

/// Generation, filtering and scoring for one band, fully ranked.
pub fn ranked_candidates(
    target: &TargetWord,
    vectors: &VectorTable,
    graph: &LexicalGraph,
    cfg: &Config,
    lo: f64,
    hi: f64,
) -> Result<Vec<Candidate>, ScoreError> {
    let raw = generate_candidates_in(target, vectors, graph, lo, hi);
    let scored = filter_candidates(&target.surface, raw)
        .into_iter()
        .map(|c| score_candidate(target, &c.text, c.s_v, graph, cfg))
        .collect::<Result<Vec<_>, _>>()?;
    let k = scored.len();
    Ok(rank_and_select(scored, k))
}
