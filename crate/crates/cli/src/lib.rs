//! Entry points behind the `distractors` binary.
//!
//! Exit codes: 0 success, 1 input error, 2 at least one QAP came up short
//! (partial MCQs are still written).

use std::collections::HashMap;
use std::fs::{self, File};
use std::io::{self, BufReader, Write};
use std::path::{Path, PathBuf};

use distractor_core::annotation::{parse_articles, parse_qaps, AnnotatedArticle, AnnotationError};
use distractor_core::entity::KnowledgeBase;
use distractor_core::eval::{evaluate, read_labels, read_mcq_questions};
use distractor_core::lexres::{LexicalGraph, VectorTable};
use distractor_core::{generate_mcq, load_config, qap_rng, AssemblyError, Mcq, Resources};
use rayon::prelude::*;
use thiserror::Error;

pub const EXIT_OK: u8 = 0;
pub const EXIT_INPUT: u8 = 1;
pub const EXIT_SHORTFALL: u8 = 2;

pub const SEED_ENV: &str = "DISTRACTOR_SEED";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {message}")]
    Input { path: String, message: String },
    #[error("QAP {index} refers to unknown article_id `{article_id}`")]
    UnknownArticle { index: usize, article_id: String },
    #[error("QAP {index} (`{question}`): {source}")]
    Qap {
        index: usize,
        question: String,
        source: Box<AssemblyError>,
    },
    #[error("{0}")]
    Config(#[from] distractor_core::config::ConfigError),
    #[error("{0}")]
    Eval(#[from] distractor_core::eval::EvalError),
    #[error("writing output: {0}")]
    Output(#[from] io::Error),
}

#[derive(Debug, Clone)]
pub struct GenerateArgs {
    pub articles: PathBuf,
    pub qaps: PathBuf,
    pub vectors: PathBuf,
    pub lexgraph: PathBuf,
    pub kb: PathBuf,
    pub config: Option<PathBuf>,
    /// Overrides the config seed when set.
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone)]
pub struct EvalArgs {
    pub mcqs: PathBuf,
    pub labels: PathBuf,
    pub out: Option<PathBuf>,
}

fn open(path: &Path) -> Result<BufReader<File>, CliError> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| input_err(path, e))
}

fn input_err(path: &Path, e: impl ToString) -> CliError {
    CliError::Input {
        path: path.display().to_string(),
        message: e.to_string(),
    }
}

fn write_out(out: Option<&Path>, bytes: &[u8], stdout: &mut dyn Write) -> Result<(), CliError> {
    match out {
        Some(path) => fs::write(path, bytes)?,
        None => {
            stdout.write_all(bytes)?;
            stdout.flush()?;
        }
    }
    Ok(())
}

/// Serializes each MCQ as one JSON line.
pub fn render_mcqs(mcqs: &[Mcq]) -> Vec<u8> {
    let mut buf = Vec::new();
    for mcq in mcqs {
        serde_json::to_writer(&mut buf, mcq).expect("MCQ serializes");
        buf.push(b'\n');
    }
    buf
}

/// Generates MCQs for every QAP. Returns the MCQs in input order, complete or
/// not, together with whether any fell short.
pub fn generate_all(args: &GenerateArgs) -> Result<(Vec<Mcq>, bool), CliError> {
    let mut cfg = load_config(args.config.as_deref())?;
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    let articles =
        parse_articles(open(&args.articles)?).map_err(|e| input_err(&args.articles, e))?;
    let qaps = parse_qaps(open(&args.qaps)?).map_err(|e| input_err(&args.qaps, e))?;
    let vectors =
        VectorTable::from_reader(open(&args.vectors)?).map_err(|e| input_err(&args.vectors, e))?;
    let graph = LexicalGraph::from_reader(open(&args.lexgraph)?)
        .map_err(|e| input_err(&args.lexgraph, e))?;
    let kb = KnowledgeBase::from_reader(open(&args.kb)?).map_err(|e| input_err(&args.kb, e))?;

    let mut by_id: HashMap<&str, &AnnotatedArticle> = HashMap::new();
    for a in &articles {
        if by_id.insert(a.article_id.as_str(), a).is_some() {
            return Err(input_err(
                &args.articles,
                format!("duplicate article_id `{}`", a.article_id),
            ));
        }
    }
    for (index, q) in qaps.iter().enumerate() {
        if !by_id.contains_key(q.article_id.as_str()) {
            return Err(CliError::UnknownArticle {
                index,
                article_id: q.article_id.clone(),
            });
        }
    }

    let res = Resources::new(vectors, graph, kb);
    let results: Vec<Result<Mcq, AssemblyError>> = qaps
        .par_iter()
        .enumerate()
        .map(|(i, q)| {
            let mut rng = qap_rng(cfg.seed, i);
            generate_mcq(q, by_id[q.article_id.as_str()], &res, &cfg, &mut rng)
        })
        .collect();

    let mut mcqs = Vec::with_capacity(results.len());
    let mut short = false;
    for (index, (result, q)) in results.into_iter().zip(&qaps).enumerate() {
        match result {
            Ok(m) => mcqs.push(m),
            Err(AssemblyError::Shortfall(m)) => {
                short = true;
                mcqs.push(m);
            }
            Err(AssemblyError::Annotation(AnnotationError::NoTarget(_))) => {
                short = true;
                mcqs.push(Mcq {
                    article_id: q.article_id.clone(),
                    question: q.question.clone(),
                    answer: q.answer_text.clone(),
                    distractors: Vec::new(),
                    provenance: Vec::new(),
                });
            }
            Err(source) => {
                return Err(CliError::Qap {
                    index,
                    question: q.question.clone(),
                    source: Box::new(source),
                })
            }
        }
    }
    Ok((mcqs, short))
}

/// `generate`: writes one MCQ per line and reports shortfalls on `stderr`.
pub fn cmd_generate(args: &GenerateArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> u8 {
    let (mcqs, short) = match generate_all(args) {
        Ok(r) => r,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            return EXIT_INPUT;
        }
    };
    for m in mcqs.iter().filter(|m| !m.is_complete()) {
        let _ = writeln!(
            stderr,
            "shortfall: {} of 3 distractors for `{}`",
            m.distractors.len(),
            m.question
        );
    }
    if let Err(e) = write_out(args.out.as_deref(), &render_mcqs(&mcqs), stdout) {
        let _ = writeln!(stderr, "error: {e}");
        return EXIT_INPUT;
    }
    if short {
        EXIT_SHORTFALL
    } else {
        EXIT_OK
    }
}

/// `eval`: writes the report as JSON to `--out` (or `stdout`) and the table
/// to `stderr`.
pub fn cmd_eval(args: &EvalArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> u8 {
    match run_eval(args, stdout, stderr) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            EXIT_INPUT
        }
    }
}

fn run_eval(
    args: &EvalArgs,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> Result<(), CliError> {
    let mcqs = read_mcq_questions(open(&args.mcqs)?)?;
    let labels = read_labels(open(&args.labels)?)?;
    let report = evaluate(&mcqs, &labels)?;
    write!(stderr, "{report}")?;
    let mut json = serde_json::to_vec_pretty(&report).expect("report serializes");
    json.push(b'\n');
    write_out(args.out.as_deref(), &json, stdout)
}
