//! Per-QAP orchestration: walk the answer's targets in preference order,
//! route each to its generator, substitute replacements into the answer,
//! and widen the similarity band when fewer than three distractors come out.

use std::collections::HashSet;
use std::ops::Range;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::annotation::{
    classify_targets, AnnotatedArticle, AnnotationError, FallbackTagger, QaPair, TargetType,
    TargetWord,
};
use crate::config::Config;
use crate::entity::{sample_entity_replacements, EntitySource, KnowledgeBase};
use crate::lexres::{LexicalGraph, VectorTable};
use crate::numeric::sample_numeric_replacements;
use crate::semantic::{ranked_candidates, ScoreError};

/// Distractors per question.
pub const DISTRACTORS_PER_MCQ: usize = 3;

/// Everything the pipeline reads besides the article and QAP.
#[derive(Debug, Clone)]
pub struct Resources {
    pub vectors: VectorTable,
    pub graph: LexicalGraph,
    pub kb: KnowledgeBase,
    pub tagger: FallbackTagger,
}

impl Resources {
    /// Uses the knowledge base's gazetteer for the fallback tagger.
    pub fn new(vectors: VectorTable, graph: LexicalGraph, kb: KnowledgeBase) -> Self {
        let tagger = FallbackTagger::with_kb(&kb);
        Self {
            vectors,
            graph,
            kb,
            tagger,
        }
    }
}

#[derive(Debug, Error)]
pub enum AssemblyError {
    #[error(transparent)]
    Annotation(#[from] AnnotationError),
    #[error(transparent)]
    Score(#[from] ScoreError),
    #[error("only {} of {DISTRACTORS_PER_MCQ} distractors found for `{}`", .0.distractors.len(), .0.question)]
    Shortfall(Mcq),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum Method {
    Numeric {
        strategy: String,
    },
    Entity {
        source: EntitySource,
    },
    Semantic {
        s_v: f64,
        s_n: f64,
        s_d: f64,
        antonym: bool,
        r_prime: f64,
        r: f64,
    },
}

/// How one distractor was made.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Provenance {
    pub target: String,
    pub target_type: TargetType,
    /// Character offsets of the target in the answer.
    pub span: [usize; 2],
    pub replacement: String,
    /// Relaxation round that produced it; 0 for the configured band.
    pub round: u32,
    #[serde(flatten)]
    pub method: Method,
}

/// A question with its answer and generated distractors. Complete MCQs carry
/// exactly three; a shortfall carries however many were found.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Mcq {
    pub article_id: String,
    pub question: String,
    pub answer: String,
    pub distractors: Vec<String>,
    pub provenance: Vec<Provenance>,
}

impl Mcq {
    pub fn is_complete(&self) -> bool {
        self.distractors.len() == DISTRACTORS_PER_MCQ
    }
}

fn normalize(text: &str) -> String {
    text.split_whitespace()
        .map(str::to_lowercase)
        .collect::<Vec<_>>()
        .join(" ")
}

fn is_vowel_initial(text: &str) -> Option<bool> {
    let c = text.chars().find(|c| !c.is_whitespace())?;
    c.is_alphabetic()
        .then(|| matches!(c.to_ascii_lowercase(), 'a' | 'e' | 'i' | 'o' | 'u'))
}

fn match_case(original: &str, replacement: &str) -> String {
    let letters: Vec<char> = original.chars().filter(|c| c.is_alphabetic()).collect();
    let all_upper = letters.len() > 1 && letters.iter().all(|c| c.is_uppercase());
    if all_upper {
        return replacement.to_uppercase();
    }
    let starts_upper = original.chars().next().is_some_and(char::is_uppercase);
    let mut chars = replacement.chars();
    match chars.next() {
        Some(first) if starts_upper && first.is_lowercase() => {
            first.to_uppercase().chain(chars).collect()
        }
        _ => replacement.to_string(),
    }
}

/// Replaces the character range `span` of `answer`, carrying over initial
/// capitalization and re-agreeing a preceding "a"/"an".
pub fn substitute(answer: &str, span: Range<usize>, replacement: &str) -> String {
    let chars: Vec<char> = answer.chars().collect();
    let original: String = chars[span.clone()].iter().collect();
    if original == replacement {
        return answer.to_string();
    }
    let replacement = match_case(&original, replacement);
    let mut before: Vec<char> = chars[..span.start].to_vec();
    let after = &chars[span.end..];

    let mut word_end = before.len();
    while word_end > 0 && before[word_end - 1].is_whitespace() {
        word_end -= 1;
    }
    let mut word_start = word_end;
    while word_start > 0 && before[word_start - 1].is_alphabetic() {
        word_start -= 1;
    }
    let bounded = word_start == 0 || !before[word_start - 1].is_alphanumeric();
    let article: String = before[word_start..word_end].iter().collect();
    if bounded && word_end < before.len() && matches!(article.to_lowercase().as_str(), "a" | "an") {
        if let Some(vowel) = is_vowel_initial(&replacement) {
            let base = if vowel { "an" } else { "a" };
            let fixed = match_case(&article, base);
            if fixed != article {
                before.splice(word_start..word_end, fixed.chars());
            }
        }
    }
    before
        .into_iter()
        .chain(replacement.chars())
        .chain(after.iter().copied())
        .collect()
}

struct Collector {
    answer: String,
    seen: HashSet<String>,
    distractors: Vec<String>,
    provenance: Vec<Provenance>,
}

impl Collector {
    fn new(answer: &str) -> Self {
        Self {
            answer: answer.to_string(),
            seen: HashSet::from([normalize(answer)]),
            distractors: Vec::new(),
            provenance: Vec::new(),
        }
    }

    fn needed(&self) -> usize {
        DISTRACTORS_PER_MCQ.saturating_sub(self.distractors.len())
    }

    fn offer(
        &mut self,
        target: &TargetWord,
        replacement: &str,
        round: u32,
        method: Method,
    ) -> bool {
        if self.needed() == 0 {
            return false;
        }
        let text = substitute(&self.answer, target.char_span.clone(), replacement);
        if !self.seen.insert(normalize(&text)) {
            return false;
        }
        self.distractors.push(text);
        self.provenance.push(Provenance {
            target: target.surface.clone(),
            target_type: target.target_type,
            span: [target.char_span.start, target.char_span.end],
            replacement: replacement.to_string(),
            round,
            method,
        });
        true
    }
}

fn offer_semantic(
    collector: &mut Collector,
    target: &TargetWord,
    res: &Resources,
    cfg: &Config,
    round: u32,
) -> Result<(), ScoreError> {
    let (lo, hi) = cfg.interval_for_round(round);
    for c in ranked_candidates(target, &res.vectors, &res.graph, cfg, lo, hi)? {
        if collector.needed() == 0 {
            break;
        }
        let method = Method::Semantic {
            s_v: c.s_v,
            s_n: c.s_n,
            s_d: c.s_d,
            antonym: c.antonym,
            r_prime: c.r_prime,
            r: c.r,
        };
        collector.offer(target, &c.text, round, method);
    }
    Ok(())
}

/// Builds an MCQ for one QAP.
///
/// Targets are tried in preference order and each may supply several
/// distractors before the next is consulted. If all targets are exhausted
/// with fewer than three, type-3 targets are retried with the band widened
/// by `relax_step` per side for up to `relax_max_rounds` rounds. Running
/// short after that yields [`AssemblyError::Shortfall`] with the partial
/// result.
pub fn generate_mcq<R: Rng + ?Sized>(
    qap: &QaPair,
    article: &AnnotatedArticle,
    res: &Resources,
    cfg: &Config,
    rng: &mut R,
) -> Result<Mcq, AssemblyError> {
    let targets = classify_targets(qap, article, &res.tagger)?;
    let mut collector = Collector::new(&qap.answer_text);

    for target in &targets {
        let need = collector.needed();
        if need == 0 {
            break;
        }
        match target.target_type {
            TargetType::T1Temporal | TargetType::T1Numeric => {
                let found = sample_numeric_replacements(&target.surface, need, &cfg.numeric, rng)
                    .unwrap_or_default();
                for r in found {
                    let method = Method::Numeric {
                        strategy: r.strategy.to_string(),
                    };
                    collector.offer(target, &r.text, 0, method);
                }
            }
            TargetType::T2Person | TargetType::T2Location | TargetType::T2Organization => {
                let found = sample_entity_replacements(target, article, &res.kb, need, rng)
                    .unwrap_or_default();
                for r in found {
                    collector.offer(target, &r.text, 0, Method::Entity { source: r.source });
                }
            }
            _ => offer_semantic(&mut collector, target, res, cfg, 0)?,
        }
    }

    for round in 1..=cfg.relax_max_rounds {
        if collector.needed() == 0 {
            break;
        }
        for target in targets.iter().filter(|t| t.target_type.is_type3()) {
            if collector.needed() == 0 {
                break;
            }
            offer_semantic(&mut collector, target, res, cfg, round)?;
        }
    }

    let mcq = Mcq {
        article_id: qap.article_id.clone(),
        question: qap.question.clone(),
        answer: qap.answer_text.clone(),
        distractors: collector.distractors,
        provenance: collector.provenance,
    };
    if mcq.is_complete() {
        Ok(mcq)
    } else {
        Err(AssemblyError::Shortfall(mcq))
    }
}

/// Random source for the QAP at `index`, independent of processing order.
pub fn qap_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}
