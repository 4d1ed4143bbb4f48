//! Metrics over human judgments of generated distractors.
//!
//! A distractor is adequate when it is grammatical and relevant with
//! distraction. An MCQ is adequate when all three distractors are, and
//! acceptable when at least one is.

use std::collections::HashMap;
use std::fmt;
use std::io::BufRead;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::assembly::DISTRACTORS_PER_MCQ;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("{file} line {line}: {message}")]
    Parse {
        file: &'static str,
        line: usize,
        message: String,
    },
    #[error("question `{question}`: {message}")]
    Mismatch { question: String, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Judgments for a single distractor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DistractorLabel {
    pub grammatical: bool,
    pub relevant_with_distraction: bool,
    pub sufficient_distraction: bool,
}

impl DistractorLabel {
    pub fn is_adequate(&self) -> bool {
        self.grammatical && self.relevant_with_distraction
    }
}

/// The three judgments for one MCQ, keyed by question text.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvalLabels {
    pub question: String,
    pub labels: Vec<DistractorLabel>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalReport {
    pub mcqs: usize,
    pub distractors: usize,
    pub grammatical: usize,
    pub relevant: usize,
    pub sufficient: usize,
    pub adequate_mcqs: usize,
    pub acceptable_mcqs: usize,
    pub pct_grammatical: f64,
    pub pct_relevant: f64,
    pub pct_sufficient: f64,
    pub pct_adequate_mcq: f64,
    pub pct_acceptable_mcq: f64,
}

fn percent(part: usize, whole: usize) -> f64 {
    if whole == 0 {
        0.0
    } else {
        100.0 * part as f64 / whole as f64
    }
}

impl EvalReport {
    /// Builds the report from per-MCQ label triples.
    pub fn from_labels<'a, I>(mcqs: I) -> Self
    where
        I: IntoIterator<Item = &'a [DistractorLabel]>,
    {
        let (mut n_mcq, mut n_dis, mut gram, mut rel, mut suff, mut adequate, mut acceptable) =
            (0, 0, 0, 0, 0, 0, 0);
        for labels in mcqs {
            n_mcq += 1;
            n_dis += labels.len();
            gram += labels.iter().filter(|l| l.grammatical).count();
            rel += labels
                .iter()
                .filter(|l| l.relevant_with_distraction)
                .count();
            suff += labels.iter().filter(|l| l.sufficient_distraction).count();
            let good = labels.iter().filter(|l| l.is_adequate()).count();
            if good == labels.len() && !labels.is_empty() {
                adequate += 1;
            }
            if good >= 1 {
                acceptable += 1;
            }
        }
        Self {
            mcqs: n_mcq,
            distractors: n_dis,
            grammatical: gram,
            relevant: rel,
            sufficient: suff,
            adequate_mcqs: adequate,
            acceptable_mcqs: acceptable,
            pct_grammatical: percent(gram, n_dis),
            pct_relevant: percent(rel, n_dis),
            pct_sufficient: percent(suff, n_dis),
            pct_adequate_mcq: percent(adequate, n_mcq),
            pct_acceptable_mcq: percent(acceptable, n_mcq),
        }
    }
}

impl fmt::Display for EvalReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows = [
            (
                "grammatical distractors",
                self.grammatical,
                self.distractors,
                self.pct_grammatical,
            ),
            (
                "relevant with distraction",
                self.relevant,
                self.distractors,
                self.pct_relevant,
            ),
            (
                "sufficient distraction",
                self.sufficient,
                self.distractors,
                self.pct_sufficient,
            ),
            (
                "adequate MCQs",
                self.adequate_mcqs,
                self.mcqs,
                self.pct_adequate_mcq,
            ),
            (
                "acceptable MCQs",
                self.acceptable_mcqs,
                self.mcqs,
                self.pct_acceptable_mcq,
            ),
        ];
        writeln!(
            f,
            "{:<28} {:>7} {:>7} {:>7}",
            "metric", "count", "total", "pct"
        )?;
        for (name, count, total, pct) in rows {
            writeln!(f, "{name:<28} {count:>7} {total:>7} {pct:>6.1}%")?;
        }
        Ok(())
    }
}

#[derive(Deserialize)]
struct McqLine {
    question: String,
    distractors: Vec<String>,
}

/// Question texts and distractor counts from an MCQ file.
pub fn read_mcq_questions<R: BufRead>(reader: R) -> Result<Vec<(String, usize)>, EvalError> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let m: McqLine = serde_json::from_str(&line).map_err(|e| EvalError::Parse {
            file: "mcqs",
            line: i + 1,
            message: e.to_string(),
        })?;
        out.push((m.question, m.distractors.len()));
    }
    Ok(out)
}

/// Reads the labels file, checking three labels per record and that
/// sufficient distraction implies relevance.
pub fn read_labels<R: BufRead>(reader: R) -> Result<Vec<EvalLabels>, EvalError> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let bad = |message: String| EvalError::Parse {
            file: "labels",
            line: i + 1,
            message,
        };
        let rec: EvalLabels = serde_json::from_str(&line).map_err(|e| bad(e.to_string()))?;
        if rec.labels.len() != DISTRACTORS_PER_MCQ {
            return Err(bad(format!(
                "question `{}` has {} labels, expected {DISTRACTORS_PER_MCQ}",
                rec.question,
                rec.labels.len()
            )));
        }
        if let Some(k) = rec
            .labels
            .iter()
            .position(|l| l.sufficient_distraction && !l.relevant_with_distraction)
        {
            return Err(bad(format!(
                "question `{}` label {k}: sufficient distraction without relevance",
                rec.question
            )));
        }
        out.push(rec);
    }
    Ok(out)
}

/// Pairs every MCQ with its labels and computes the report.
pub fn evaluate(mcqs: &[(String, usize)], labels: &[EvalLabels]) -> Result<EvalReport, EvalError> {
    let mut by_question: HashMap<&str, &EvalLabels> = HashMap::new();
    for rec in labels {
        if by_question.insert(rec.question.as_str(), rec).is_some() {
            return Err(EvalError::Mismatch {
                question: rec.question.clone(),
                message: "labelled more than once".into(),
            });
        }
    }
    let mut matched = Vec::with_capacity(mcqs.len());
    for (question, n) in mcqs {
        let rec = by_question
            .remove(question.as_str())
            .ok_or_else(|| EvalError::Mismatch {
                question: question.clone(),
                message: "no label record".into(),
            })?;
        if *n != rec.labels.len() {
            return Err(EvalError::Mismatch {
                question: question.clone(),
                message: format!("MCQ has {n} distractors but {} labels", rec.labels.len()),
            });
        }
        matched.push(rec.labels.as_slice());
    }
    if let Some(question) = by_question.keys().min() {
        return Err(EvalError::Mismatch {
            question: question.to_string(),
            message: "labels given for a question that is not in the MCQ file".into(),
        });
    }
    Ok(EvalReport::from_labels(matched))
}
