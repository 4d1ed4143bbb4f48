//! Annotated articles, question-answer pairs, and target selection.
//!
//! Articles normally arrive pre-tagged (POS, named entities, semantic roles)
//! as JSON lines. [`FallbackTagger`] produces the same structures from plain
//! text with a lexicon, suffix rules, the numeric recognizers and the
//! knowledge-base gazetteer; it never emits role spans.

use std::collections::HashMap;
use std::fmt;
use std::io::BufRead;
use std::ops::Range;
use std::sync::OnceLock;

use regex::Regex;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::entity::{EntityCategory, Gazetteer, KnowledgeBase};
use crate::numeric::{recognize_numeric, NumericKind};

const BUNDLED_LEXICON: &str = include_str!("../data/lexicon.tsv");

/// Never substituted: replacing a pronoun changes who the answer is about,
/// not what it says.
const PRONOUNS: &[&str] = &[
    "i",
    "me",
    "my",
    "mine",
    "myself",
    "you",
    "your",
    "yours",
    "yourself",
    "yourselves",
    "we",
    "us",
    "our",
    "ours",
    "ourselves",
    "he",
    "him",
    "his",
    "himself",
    "she",
    "her",
    "hers",
    "herself",
    "it",
    "its",
    "itself",
    "they",
    "them",
    "their",
    "theirs",
    "themselves",
    "this",
    "that",
    "these",
    "those",
    "who",
    "whom",
    "whose",
    "which",
    "what",
    "someone",
    "somebody",
    "something",
    "anyone",
    "anybody",
    "anything",
    "everyone",
    "everybody",
    "everything",
    "nobody",
    "nothing",
];

const AUXILIARIES: &[&str] = &[
    "be", "is", "are", "was", "were", "been", "being", "am", "have", "has", "had", "having", "do",
    "does", "did", "can", "could", "will", "would", "shall", "should", "may", "might", "must",
];

const NON_TARGET_ADVERBS: &[&str] = &["not", "n't", "never"];

#[derive(Debug, Error)]
pub enum AnnotationError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("{context}: {message}")]
    Validation { context: String, message: String },
    #[error("input text is empty")]
    EmptyInput,
    #[error("answer `{0}` contains no substitutable word")]
    NoTarget(String),
    #[error("answer `{answer}` cannot be located in article `{article_id}`: {reason}")]
    UnresolvedAnswer {
        article_id: String,
        answer: String,
        reason: String,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Pos {
    Noun,
    PhrasalNoun,
    Verb,
    PhrasalVerb,
    Adjective,
    Adverb,
    Number,
    Determiner,
    Other,
}

impl Pos {
    fn parse(text: &str) -> Option<Self> {
        serde_json::from_value(Value::String(text.to_string())).ok()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum EntityTag {
    Person,
    Location,
    Organization,
    #[default]
    None,
}

impl EntityTag {
    pub fn category(self) -> Option<EntityCategory> {
        match self {
            EntityTag::Person => Some(EntityCategory::Person),
            EntityTag::Location => Some(EntityCategory::Location),
            EntityTag::Organization => Some(EntityCategory::Organization),
            EntityTag::None => None,
        }
    }
}

impl From<EntityCategory> for EntityTag {
    fn from(c: EntityCategory) -> Self {
        match c {
            EntityCategory::Person => EntityTag::Person,
            EntityCategory::Location => EntityTag::Location,
            EntityCategory::Organization => EntityTag::Organization,
        }
    }
}

/// A token with half-open character offsets `[start, end)` into its sentence.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Token {
    pub surface: String,
    pub lemma: String,
    pub pos: Pos,
    pub entity: EntityTag,
    pub start: usize,
    pub end: usize,
}

/// Semantic roles, listed in substitution preference order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Role {
    Subject,
    Object,
    AdjectiveOfSubject,
    AdjectiveOfObject,
    Predicate,
    Adverb,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoleSpan {
    pub role: Role,
    pub first_token: usize,
    pub last_token: usize,
}

impl RoleSpan {
    fn contains(&self, index: usize) -> bool {
        self.first_token <= index && index <= self.last_token
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AnnotatedSentence {
    pub text: String,
    pub tokens: Vec<Token>,
    pub roles: Vec<RoleSpan>,
}

impl AnnotatedSentence {
    /// Builds a sentence, checking token bounds, order, surfaces and role
    /// ranges.
    pub fn new(text: String, tokens: Vec<Token>, roles: Vec<RoleSpan>) -> Result<Self, String> {
        let chars: Vec<char> = text.chars().collect();
        let mut prev_end = 0;
        for (i, t) in tokens.iter().enumerate() {
            if t.start >= t.end {
                return Err(format!("token {i} `{}` has an empty span", t.surface));
            }
            if t.end > chars.len() {
                return Err(format!(
                    "token {i} `{}` ends at {} beyond sentence length {}",
                    t.surface,
                    t.end,
                    chars.len()
                ));
            }
            if t.start < prev_end {
                return Err(format!(
                    "token {i} `{}` overlaps the previous token",
                    t.surface
                ));
            }
            let slice: String = chars[t.start..t.end].iter().collect();
            if slice != t.surface {
                return Err(format!(
                    "token {i} surface `{}` does not match text `{slice}` at {}..{}",
                    t.surface, t.start, t.end
                ));
            }
            prev_end = t.end;
        }
        for r in &roles {
            if r.first_token > r.last_token || r.last_token >= tokens.len() {
                return Err(format!(
                    "role {:?} spans tokens {}..={} outside 0..{}",
                    r.role,
                    r.first_token,
                    r.last_token,
                    tokens.len()
                ));
            }
        }
        Ok(Self {
            text,
            tokens,
            roles,
        })
    }

    /// Text between two character offsets.
    pub fn slice(&self, start: usize, end: usize) -> String {
        self.text.chars().skip(start).take(end - start).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AnnotatedArticle {
    pub article_id: String,
    pub sentences: Vec<AnnotatedSentence>,
}

impl AnnotatedArticle {
    pub fn new(article_id: String, sentences: Vec<AnnotatedSentence>) -> Result<Self, String> {
        if article_id.trim().is_empty() {
            return Err("article_id is empty".into());
        }
        if sentences.is_empty() {
            return Err(format!("article `{article_id}` has no sentences"));
        }
        Ok(Self {
            article_id,
            sentences,
        })
    }
}

/// Where an answer sits in its article: a sentence and an inclusive token
/// range.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AnswerLocation {
    pub sentence: usize,
    pub first_token: usize,
    pub last_token: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QaPair {
    pub article_id: String,
    pub question: String,
    pub answer_text: String,
    pub answer_location: Option<AnswerLocation>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum TargetType {
    T1Temporal,
    T1Numeric,
    T2Person,
    T2Location,
    T2Organization,
    T3Noun,
    T3Adjective,
    T3Verb,
    T3Adverb,
}

impl TargetType {
    /// Position in the nine-way substitution preference, 0 first.
    pub fn preference_rank(self) -> usize {
        self as usize
    }

    pub fn entity_category(self) -> Option<EntityCategory> {
        match self {
            TargetType::T2Person => Some(EntityCategory::Person),
            TargetType::T2Location => Some(EntityCategory::Location),
            TargetType::T2Organization => Some(EntityCategory::Organization),
            _ => None,
        }
    }

    pub fn is_type1(self) -> bool {
        matches!(self, TargetType::T1Temporal | TargetType::T1Numeric)
    }

    pub fn is_type3(self) -> bool {
        matches!(
            self,
            TargetType::T3Noun
                | TargetType::T3Adjective
                | TargetType::T3Verb
                | TargetType::T3Adverb
        )
    }
}

impl fmt::Display for TargetType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// A substitutable span of an answer.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TargetWord {
    /// Indices into the answer's tokens.
    pub token_range: Range<usize>,
    /// Character offsets into the answer text.
    pub char_span: Range<usize>,
    pub surface: String,
    pub lemma: String,
    pub target_type: TargetType,
    pub role: Option<Role>,
}

impl TargetWord {
    /// Whether the target type agrees with the tags of the tokens it covers.
    pub fn is_consistent_with(&self, tokens: &[Token]) -> bool {
        let Some(covered) = tokens.get(self.token_range.clone()) else {
            return false;
        };
        if covered.is_empty() {
            return false;
        }
        let all = |f: &dyn Fn(&Token) -> bool| covered.iter().all(f);
        match self.target_type {
            TargetType::T1Temporal => {
                recognize_numeric(&self.surface).is_some_and(|v| v.is_temporal())
            }
            TargetType::T1Numeric => {
                recognize_numeric(&self.surface).is_some_and(|v| !v.is_temporal())
            }
            TargetType::T2Person => all(&|t| t.entity == EntityTag::Person),
            TargetType::T2Location => all(&|t| t.entity == EntityTag::Location),
            TargetType::T2Organization => all(&|t| t.entity == EntityTag::Organization),
            TargetType::T3Noun => all(&|t| matches!(t.pos, Pos::Noun | Pos::PhrasalNoun)),
            TargetType::T3Adjective => all(&|t| t.pos == Pos::Adjective),
            TargetType::T3Verb => all(&|t| matches!(t.pos, Pos::Verb | Pos::PhrasalVerb)),
            TargetType::T3Adverb => all(&|t| t.pos == Pos::Adverb),
        }
    }
}

#[derive(Deserialize)]
struct HeaderLine {
    article_id: String,
}

#[derive(Deserialize)]
struct SentenceLine {
    text: String,
    tokens: Vec<Token>,
    #[serde(default)]
    roles: Vec<RoleSpan>,
}

#[derive(Deserialize)]
struct QapLine {
    article_id: String,
    question: String,
    answer_text: String,
    answer_sentence: Option<usize>,
    answer_first_token: Option<usize>,
    answer_last_token: Option<usize>,
}

enum Line {
    Header(String),
    Sentence(AnnotatedSentence),
}

fn parse_line(line_no: usize, text: &str) -> Result<Line, AnnotationError> {
    let parse_err = |message: String| AnnotationError::Parse {
        line: line_no,
        message,
    };
    let value: Value = serde_json::from_str(text).map_err(|e| parse_err(e.to_string()))?;
    let Some(object) = value.as_object() else {
        return Err(parse_err("expected a JSON object".into()));
    };
    if object.contains_key("text") {
        let s: SentenceLine =
            serde_json::from_value(value).map_err(|e| parse_err(e.to_string()))?;
        let sentence = AnnotatedSentence::new(s.text, s.tokens, s.roles).map_err(|message| {
            AnnotationError::Validation {
                context: format!("line {line_no}"),
                message,
            }
        })?;
        Ok(Line::Sentence(sentence))
    } else if object.contains_key("article_id") {
        let h: HeaderLine = serde_json::from_value(value).map_err(|e| parse_err(e.to_string()))?;
        if h.article_id.trim().is_empty() {
            return Err(parse_err("field `article_id` is empty".into()));
        }
        Ok(Line::Header(h.article_id))
    } else {
        Err(parse_err(
            "expected an article header with `article_id` or a sentence with `text`".into(),
        ))
    }
}

/// Reads one or more articles; each header line starts a new article.
pub fn parse_articles<R: BufRead>(reader: R) -> Result<Vec<AnnotatedArticle>, AnnotationError> {
    let mut articles: Vec<(usize, String, Vec<AnnotatedSentence>)> = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        match parse_line(line_no, &line)? {
            Line::Header(id) => articles.push((line_no, id, Vec::new())),
            Line::Sentence(s) => match articles.last_mut() {
                Some((_, _, sentences)) => sentences.push(s),
                None => {
                    return Err(AnnotationError::Parse {
                        line: line_no,
                        message: "sentence appears before any article header".into(),
                    })
                }
            },
        }
    }
    articles
        .into_iter()
        .map(|(line, id, sentences)| {
            AnnotatedArticle::new(id, sentences).map_err(|message| AnnotationError::Validation {
                context: format!("line {line}"),
                message,
            })
        })
        .collect()
}

/// Reads a single annotated article.
pub fn parse_article<R: BufRead>(reader: R) -> Result<AnnotatedArticle, AnnotationError> {
    let mut articles = parse_articles(reader)?;
    match articles.len() {
        0 => Err(AnnotationError::Parse {
            line: 1,
            message: "missing article header".into(),
        }),
        1 => Ok(articles.remove(0)),
        n => Err(AnnotationError::Validation {
            context: "document".into(),
            message: format!("expected one article, found {n}"),
        }),
    }
}

/// Reads question-answer pairs, one JSON object per line.
pub fn parse_qaps<R: BufRead>(reader: R) -> Result<Vec<QaPair>, AnnotationError> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let q: QapLine = serde_json::from_str(&line).map_err(|e| AnnotationError::Parse {
            line: line_no,
            message: e.to_string(),
        })?;
        if q.answer_text.trim().is_empty() {
            return Err(AnnotationError::Parse {
                line: line_no,
                message: "field `answer_text` is empty".into(),
            });
        }
        let answer_location = match (q.answer_sentence, q.answer_first_token, q.answer_last_token) {
            (None, None, None) => None,
            (Some(sentence), Some(first_token), Some(last_token)) => Some(AnswerLocation {
                sentence,
                first_token,
                last_token,
            }),
            _ => {
                return Err(AnnotationError::Parse {
                    line: line_no,
                    message: "answer_sentence, answer_first_token and answer_last_token must be given together".into(),
                })
            }
        };
        out.push(QaPair {
            article_id: q.article_id,
            question: q.question,
            answer_text: q.answer_text,
            answer_location,
        });
    }
    Ok(out)
}

#[derive(Debug, Clone)]
struct LexEntry {
    pos: Pos,
    lemma: Option<String>,
}

/// Word list backing the fallback tagger.
#[derive(Debug, Clone, Default)]
pub struct Lexicon {
    words: HashMap<String, LexEntry>,
    phrases: HashMap<String, Pos>,
    max_phrase_tokens: usize,
}

impl Lexicon {
    /// Parses `word<TAB>pos[<TAB>lemma]` lines; `#` starts a comment.
    pub fn from_tsv(text: &str) -> Result<Self, AnnotationError> {
        let mut lex = Lexicon::default();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim_end();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            let bad = |message: String| AnnotationError::Parse {
                line: i + 1,
                message,
            };
            if fields.len() < 2 || fields.len() > 3 {
                return Err(bad(format!(
                    "expected 2 or 3 tab-separated fields, got {}",
                    fields.len()
                )));
            }
            let pos =
                Pos::parse(fields[1]).ok_or_else(|| bad(format!("unknown POS `{}`", fields[1])))?;
            let word = fields[0].to_lowercase();
            let n_tokens = word.split_whitespace().count();
            if n_tokens > 1 {
                lex.max_phrase_tokens = lex.max_phrase_tokens.max(n_tokens);
                lex.phrases.insert(word, pos);
            } else {
                let lemma = fields.get(2).map(|l| l.to_string());
                lex.words.insert(word, LexEntry { pos, lemma });
            }
        }
        Ok(lex)
    }

    pub fn bundled() -> Self {
        Self::from_tsv(BUNDLED_LEXICON).expect("bundled lexicon is valid")
    }
}

fn token_pattern() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| {
        Regex::new(concat!(
            r"[0-9]{1,2}:[0-9]{2}\b",
            r"|[0-9]+(?:st|nd|rd|th)\b",
            r"|[0-9]{1,3}(?:,[0-9]{3})+(?:\.[0-9]+)?",
            r"|[0-9]+(?:\.[0-9]+)?",
            r"|\p{L}+(?:['’-]\p{L}+)*",
            r"|\S",
        ))
        .unwrap()
    })
}

fn is_sentence_end(surface: &str) -> bool {
    matches!(surface, "." | "!" | "?")
}

fn guess_pos(lower: &str) -> Pos {
    if !lower.chars().any(char::is_alphabetic) {
        return Pos::Other;
    }
    let adjective_suffixes = [
        "ous", "ful", "ive", "able", "ible", "less", "ish", "ical", "al", "ic",
    ];
    if lower.ends_with("ly") {
        Pos::Adverb
    } else if lower.len() > 4 && (lower.ends_with("ing") || lower.ends_with("ed")) {
        Pos::Verb
    } else if lower.len() > 4 && adjective_suffixes.iter().any(|s| lower.ends_with(s)) {
        Pos::Adjective
    } else {
        Pos::Noun
    }
}

fn guess_noun_lemma(lower: &str) -> String {
    let keeps_s = ["ss", "us", "is"].iter().any(|s| lower.ends_with(s));
    if lower.len() > 3 && lower.ends_with('s') && !keeps_s {
        lower[..lower.len() - 1].to_string()
    } else {
        lower.to_string()
    }
}

fn starts_uppercase(s: &str) -> bool {
    s.chars().next().is_some_and(char::is_uppercase)
}

/// Deterministic rule-based tagger used when no external annotation is
/// available.
#[derive(Debug, Clone)]
pub struct FallbackTagger {
    lexicon: Lexicon,
    gazetteer: Gazetteer,
}

impl FallbackTagger {
    pub fn new(lexicon: Lexicon, gazetteer: Gazetteer) -> Self {
        Self { lexicon, gazetteer }
    }

    /// Bundled lexicon plus the gazetteer of `kb`.
    pub fn with_kb(kb: &KnowledgeBase) -> Self {
        Self::new(Lexicon::bundled(), kb.gazetteer().clone())
    }

    /// Tags plain text, splitting sentences on terminal punctuation.
    pub fn fallback_tag(&self, raw: &str) -> Result<AnnotatedArticle, AnnotationError> {
        if raw.trim().is_empty() {
            return Err(AnnotationError::EmptyInput);
        }
        let spans = char_token_spans(raw);
        let chars: Vec<char> = raw.chars().collect();
        let mut sentences = Vec::new();
        let mut begin = 0;
        for (i, (_, end)) in spans.iter().enumerate() {
            let surface: String = chars[spans[i].0..*end].iter().collect();
            if is_sentence_end(&surface) || i + 1 == spans.len() {
                let group = &spans[begin..=i];
                let offset = group[0].0;
                let text: String = chars[offset..group[group.len() - 1].1].iter().collect();
                let local: Vec<(usize, usize)> = group
                    .iter()
                    .map(|(s, e)| (s - offset, e - offset))
                    .collect();
                sentences.push(self.tag_spans(text, &local));
                begin = i + 1;
            }
        }
        Ok(AnnotatedArticle {
            article_id: "fallback".into(),
            sentences,
        })
    }

    /// Tags a text fragment as one sentence, without splitting.
    pub fn tag_segment(&self, text: &str) -> Result<AnnotatedSentence, AnnotationError> {
        if text.trim().is_empty() {
            return Err(AnnotationError::EmptyInput);
        }
        let spans = char_token_spans(text);
        Ok(self.tag_spans(text.to_string(), &spans))
    }

    fn tag_spans(&self, text: String, spans: &[(usize, usize)]) -> AnnotatedSentence {
        let chars: Vec<char> = text.chars().collect();
        let surfaces: Vec<String> = spans
            .iter()
            .map(|&(s, e)| chars[s..e].iter().collect())
            .collect();
        let lowers: Vec<String> = surfaces.iter().map(|s| s.to_lowercase()).collect();

        let mut tokens: Vec<Token> = surfaces
            .iter()
            .zip(&lowers)
            .zip(spans)
            .map(|((surface, lower), &(start, end))| {
                let (pos, lemma) = self.word_pos(surface, lower);
                Token {
                    surface: surface.clone(),
                    lemma,
                    pos,
                    entity: EntityTag::None,
                    start,
                    end,
                }
            })
            .collect();

        // Multiword lexicon entries, longest match first.
        let mut i = 0;
        while i < tokens.len() {
            let mut matched = 0;
            for len in (2..=self.lexicon.max_phrase_tokens.min(tokens.len() - i)).rev() {
                let key = lowers[i..i + len].join(" ");
                if let Some(&pos) = self.lexicon.phrases.get(&key) {
                    for t in &mut tokens[i..i + len] {
                        t.pos = pos;
                    }
                    matched = len;
                    break;
                }
            }
            i += matched.max(1);
        }

        // Gazetteer runs over capitalized tokens, longest match first.
        let mut i = 0;
        while i < tokens.len() {
            let mut matched = 0;
            if starts_uppercase(&surfaces[i]) {
                let max_len = self.gazetteer.max_tokens().min(tokens.len() - i);
                for len in (1..=max_len).rev() {
                    let run = &surfaces[i..i + len];
                    if !starts_uppercase(&run[len - 1]) {
                        continue;
                    }
                    if let Some(category) = self.gazetteer.lookup(&run.join(" ")) {
                        for t in &mut tokens[i..i + len] {
                            t.entity = category.into();
                            t.pos = Pos::Noun;
                            t.lemma = t.surface.clone();
                        }
                        matched = len;
                        break;
                    }
                }
            }
            i += matched.max(1);
        }

        AnnotatedSentence {
            text,
            tokens,
            roles: Vec::new(),
        }
    }

    fn word_pos(&self, surface: &str, lower: &str) -> (Pos, String) {
        if let Some(v) = recognize_numeric(surface) {
            if !matches!(v.kind, NumericKind::Weekday | NumericKind::Month) {
                return (Pos::Number, lower.to_string());
            }
            return (Pos::Noun, lower.to_string());
        }
        if let Some(entry) = self.lexicon.words.get(lower) {
            let lemma = entry.lemma.clone().unwrap_or_else(|| lower.to_string());
            return (entry.pos, lemma);
        }
        let pos = guess_pos(lower);
        let lemma = if pos == Pos::Noun {
            guess_noun_lemma(lower)
        } else {
            lower.to_string()
        };
        (pos, lemma)
    }
}

/// Token spans as character offsets.
fn char_token_spans(text: &str) -> Vec<(usize, usize)> {
    let mut byte_to_char = HashMap::new();
    for (ci, (bi, _)) in text.char_indices().enumerate() {
        byte_to_char.insert(bi, ci);
    }
    byte_to_char.insert(text.len(), text.chars().count());
    token_pattern()
        .find_iter(text)
        .map(|m| (byte_to_char[&m.start()], byte_to_char[&m.end()]))
        .collect()
}

/// The answer's own tokens, with offsets into the answer text.
#[derive(Debug, Clone)]
pub struct AnswerView {
    pub text: String,
    pub tokens: Vec<Token>,
    pub roles: Vec<RoleSpan>,
}

fn resolve_answer(
    qap: &QaPair,
    article: &AnnotatedArticle,
    tagger: &FallbackTagger,
) -> Result<AnswerView, AnnotationError> {
    let unresolved = |reason: String| AnnotationError::UnresolvedAnswer {
        article_id: article.article_id.clone(),
        answer: qap.answer_text.clone(),
        reason,
    };
    let Some(loc) = qap.answer_location else {
        let sentence = tagger.tag_segment(&qap.answer_text)?;
        return Ok(AnswerView {
            text: qap.answer_text.clone(),
            tokens: sentence.tokens,
            roles: Vec::new(),
        });
    };
    let sentence = article
        .sentences
        .get(loc.sentence)
        .ok_or_else(|| unresolved(format!("no sentence {}", loc.sentence)))?;
    if loc.first_token > loc.last_token || loc.last_token >= sentence.tokens.len() {
        return Err(unresolved(format!(
            "tokens {}..={} outside sentence {}",
            loc.first_token, loc.last_token, loc.sentence
        )));
    }
    let source = &sentence.tokens[loc.first_token..=loc.last_token];
    let joined: String = source
        .iter()
        .flat_map(|t| t.surface.chars())
        .filter(|c| !c.is_whitespace())
        .collect();
    let wanted: String = qap
        .answer_text
        .chars()
        .filter(|c| !c.is_whitespace())
        .collect();
    if joined != wanted {
        return Err(unresolved(format!("tokens spell `{joined}`")));
    }

    // Re-anchor token offsets on the answer text.
    let answer: Vec<char> = qap.answer_text.chars().collect();
    let mut cursor = 0;
    let mut tokens = Vec::with_capacity(source.len());
    for t in source {
        let mut start = None;
        let mut end = cursor;
        for c in t.surface.chars().filter(|c| !c.is_whitespace()) {
            while end < answer.len() && answer[end].is_whitespace() {
                end += 1;
            }
            debug_assert_eq!(answer.get(end), Some(&c));
            start.get_or_insert(end);
            end += 1;
        }
        let start = start.unwrap_or(cursor);
        tokens.push(Token {
            surface: answer[start..end].iter().collect(),
            start,
            end,
            ..t.clone()
        });
        cursor = end;
    }
    let roles = sentence
        .roles
        .iter()
        .filter(|r| r.last_token >= loc.first_token && r.first_token <= loc.last_token)
        .map(|r| RoleSpan {
            role: r.role,
            first_token: r.first_token.max(loc.first_token) - loc.first_token,
            last_token: r.last_token.min(loc.last_token) - loc.first_token,
        })
        .collect();
    Ok(AnswerView {
        text: qap.answer_text.clone(),
        tokens,
        roles,
    })
}

fn is_pronoun(t: &Token) -> bool {
    let lower = t.surface.to_lowercase();
    PRONOUNS.contains(&lower.as_str()) || PRONOUNS.contains(&t.lemma.to_lowercase().as_str())
}

fn type3_for(t: &Token) -> Option<TargetType> {
    if is_pronoun(t) || !t.surface.chars().any(char::is_alphabetic) {
        return None;
    }
    let lemma = t.lemma.to_lowercase();
    match t.pos {
        Pos::Noun | Pos::PhrasalNoun => Some(TargetType::T3Noun),
        Pos::Adjective => Some(TargetType::T3Adjective),
        Pos::Verb | Pos::PhrasalVerb if !AUXILIARIES.contains(&lemma.as_str()) => {
            Some(TargetType::T3Verb)
        }
        Pos::Adverb if !NON_TARGET_ADVERBS.contains(&lemma.as_str()) => Some(TargetType::T3Adverb),
        _ => None,
    }
}

fn span_text(view: &AnswerView, range: &Range<usize>) -> (Range<usize>, String) {
    let start = view.tokens[range.start].start;
    let end = view.tokens[range.end - 1].end;
    let text = view.text.chars().skip(start).take(end - start).collect();
    (start..end, text)
}

/// Narrowest role span covering the token; ties go to the preferred role.
fn role_of(roles: &[RoleSpan], index: usize) -> Option<Role> {
    roles
        .iter()
        .filter(|r| r.contains(index))
        .min_by_key(|r| (r.last_token - r.first_token, r.role))
        .map(|r| r.role)
}

fn find_targets(view: &AnswerView) -> Vec<TargetWord> {
    let tokens = &view.tokens;
    let mut out = Vec::new();
    let mut push = |range: Range<usize>, target_type: TargetType, lemma: String| {
        let (char_span, surface) = span_text(view, &range);
        out.push(TargetWord {
            role: role_of(&view.roles, range.start),
            token_range: range,
            char_span,
            surface,
            lemma,
            target_type,
        });
    };

    let mut i = 0;
    while i < tokens.len() {
        let t = &tokens[i];
        if is_pronoun(t) {
            i += 1;
            continue;
        }

        // Numbers and times, preferring three-token ranges ("1990 to 2000").
        let numeric = [3usize, 1].into_iter().find_map(|len| {
            if i + len > tokens.len() {
                return None;
            }
            let (_, text) = span_text(view, &(i..i + len));
            let value = recognize_numeric(&text)?;
            (len == 1 || value.kind == NumericKind::Range).then_some((len, value))
        });
        if let Some((len, value)) = numeric {
            let ty = if value.is_temporal() {
                TargetType::T1Temporal
            } else {
                TargetType::T1Numeric
            };
            push(i..i + len, ty, t.lemma.clone());
            i += len;
            continue;
        }

        if let Some(category) = t.entity.category() {
            let mut j = i + 1;
            while j < tokens.len() && tokens[j].entity == t.entity {
                j += 1;
            }
            let ty = match category {
                EntityCategory::Person => TargetType::T2Person,
                EntityCategory::Location => TargetType::T2Location,
                EntityCategory::Organization => TargetType::T2Organization,
            };
            let (_, surface) = span_text(view, &(i..j));
            push(i..j, ty, surface);
            i = j;
            continue;
        }

        if matches!(t.pos, Pos::PhrasalNoun | Pos::PhrasalVerb) {
            let mut j = i + 1;
            while j < tokens.len() && tokens[j].pos == t.pos {
                j += 1;
            }
            let ty = if t.pos == Pos::PhrasalNoun {
                TargetType::T3Noun
            } else {
                TargetType::T3Verb
            };
            let lemma = tokens[i..j]
                .iter()
                .map(|t| t.lemma.as_str())
                .collect::<Vec<_>>()
                .join(" ");
            push(i..j, ty, lemma);
            i = j;
            continue;
        }

        if let Some(ty) = type3_for(t) {
            push(i..i + 1, ty, t.lemma.clone());
        }
        i += 1;
    }
    out
}

/// Sorts targets by role preference, then type preference, then position.
/// Targets without a role sort after those with one.
pub fn sort_targets(targets: &mut [TargetWord]) {
    targets.sort_by_key(|t| {
        (
            t.role.map_or(usize::MAX, |r| r as usize),
            t.target_type.preference_rank(),
            t.token_range.start,
        )
    });
}

/// All substitutable spans of the answer in substitution order.
pub fn classify_targets(
    qap: &QaPair,
    article: &AnnotatedArticle,
    tagger: &FallbackTagger,
) -> Result<Vec<TargetWord>, AnnotationError> {
    let view = resolve_answer(qap, article, tagger)?;
    classify_view(&view)
}

/// Target selection over an already resolved answer.
pub fn classify_view(view: &AnswerView) -> Result<Vec<TargetWord>, AnnotationError> {
    let mut targets = find_targets(view);
    if targets.is_empty() {
        return Err(AnnotationError::NoTarget(view.text.clone()));
    }
    sort_targets(&mut targets);
    Ok(targets)
}

/// Resolves the answer span for a QAP; exposed for diagnostics and tests.
pub fn answer_view(
    qap: &QaPair,
    article: &AnnotatedArticle,
    tagger: &FallbackTagger,
) -> Result<AnswerView, AnnotationError> {
    resolve_answer(qap, article, tagger)
}
