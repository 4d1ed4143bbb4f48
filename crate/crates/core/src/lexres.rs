//! Word vectors and the lexical graph.
//!
//! The vector table answers "which words sit in a similarity band around
//! this one"; the graph supplies Wu-Palmer similarity, direct hypernyms and
//! antonym pairs.

use std::cmp::Ordering;
use std::collections::{HashMap, HashSet};
use std::io::{BufRead, Read};

use serde::Deserialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum LexError {
    #[error("vector dimensions differ: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("zero vector")]
    ZeroVector,
    #[error("`{0}` is not in the vector table")]
    OutOfVocabulary(String),
    #[error("invalid similarity interval [{lo}, {hi}]")]
    InvalidInterval { lo: f64, hi: f64 },
    #[error("vector file line {line}: {message}")]
    VectorFormat { line: usize, message: String },
    #[error("lexical graph: {0}")]
    GraphFormat(String),
    #[error("lexical graph has a hypernym cycle through synsets {0:?}")]
    Cycle(Vec<String>),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Cosine similarity `a·b / (‖a‖‖b‖)`, clamped to [−1, 1].
pub fn cosine(a: &[f64], b: &[f64]) -> Result<f64, LexError> {
    if a.len() != b.len() {
        return Err(LexError::DimensionMismatch(a.len(), b.len()));
    }
    let (na, nb) = (norm(a), norm(b));
    if na == 0.0 || nb == 0.0 {
        return Err(LexError::ZeroVector);
    }
    Ok(cosine_with_norms(a, na, b, nb))
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn cosine_with_norms(a: &[f64], na: f64, b: &[f64], nb: f64) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    (dot / (na * nb)).clamp(-1.0, 1.0)
}

/// Lookup key for words and multiword phrases: phrases are stored with
/// underscores in vector files and with spaces in lexical graphs.
fn phrase_key(word: &str) -> String {
    word.split_whitespace().collect::<Vec<_>>().join("_")
}

/// Dense word vectors of one shared dimension.
#[derive(Debug, Clone)]
pub struct VectorTable {
    dimension: usize,
    words: Vec<String>,
    data: Vec<f64>,
    norms: Vec<f64>,
    index: HashMap<String, usize>,
}

impl VectorTable {
    pub fn new(dimension: usize) -> Self {
        Self {
            dimension,
            words: Vec::new(),
            data: Vec::new(),
            norms: Vec::new(),
            index: HashMap::new(),
        }
    }

    /// Adds a word; duplicates, wrong dimensions and zero vectors are
    /// rejected.
    pub fn insert(&mut self, word: &str, vector: Vec<f64>) -> Result<(), String> {
        if vector.len() != self.dimension {
            return Err(format!(
                "`{word}` has {} components, expected {}",
                vector.len(),
                self.dimension
            ));
        }
        if vector.iter().any(|x| !x.is_finite()) {
            return Err(format!("`{word}` has a non-finite component"));
        }
        let n = norm(&vector);
        if n == 0.0 {
            return Err(format!("`{word}` is a zero vector"));
        }
        let key = phrase_key(word);
        if self.index.contains_key(&key) {
            return Err(format!("`{word}` appears twice"));
        }
        self.index.insert(key.clone(), self.words.len());
        self.words.push(key);
        self.data.extend(vector);
        self.norms.push(n);
        Ok(())
    }

    /// Reads the text format: an optional `<count> <dimension>` header, then
    /// `word x1 ... xd` per line.
    pub fn from_reader<R: BufRead>(reader: R) -> Result<Self, LexError> {
        let mut table: Option<VectorTable> = None;
        let mut expected_rows = None;
        for (i, line) in reader.lines().enumerate() {
            let line_no = i + 1;
            let line = line?;
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.is_empty() {
                continue;
            }
            let err = |message: String| LexError::VectorFormat {
                line: line_no,
                message,
            };
            if line_no == 1 && fields.len() == 2 {
                if let (Ok(count), Ok(dim)) =
                    (fields[0].parse::<usize>(), fields[1].parse::<usize>())
                {
                    if dim == 0 {
                        return Err(err("dimension must be positive".into()));
                    }
                    expected_rows = Some(count);
                    table = Some(VectorTable::new(dim));
                    continue;
                }
            }
            if fields.len() < 2 {
                return Err(err("expected a word followed by its components".into()));
            }
            let components = fields[1..]
                .iter()
                .map(|f| f.parse::<f64>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| err(format!("bad component: {e}")))?;
            let table = table.get_or_insert_with(|| VectorTable::new(components.len()));
            table.insert(fields[0], components).map_err(err)?;
        }
        let table = table.ok_or(LexError::VectorFormat {
            line: 1,
            message: "no vectors".into(),
        })?;
        if let Some(count) = expected_rows {
            if count != table.len() {
                return Err(LexError::VectorFormat {
                    line: 1,
                    message: format!("header announces {count} words, file has {}", table.len()),
                });
            }
        }
        Ok(table)
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn contains(&self, word: &str) -> bool {
        self.index.contains_key(&phrase_key(word))
    }

    pub fn get(&self, word: &str) -> Option<&[f64]> {
        self.index.get(&phrase_key(word)).map(|&i| self.row(i))
    }

    fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dimension..(i + 1) * self.dimension]
    }

    /// Stored words in insertion order.
    pub fn words(&self) -> impl Iterator<Item = &str> {
        self.words.iter().map(String::as_str)
    }

    /// Cosine similarity between two stored words.
    pub fn similarity(&self, a: &str, b: &str) -> Option<f64> {
        let ia = *self.index.get(&phrase_key(a))?;
        let ib = *self.index.get(&phrase_key(b))?;
        Some(cosine_with_norms(
            self.row(ia),
            self.norms[ia],
            self.row(ib),
            self.norms[ib],
        ))
    }
}

/// Orders `(word, similarity)` pairs by similarity descending, then word.
pub fn by_similarity_then_word(a: &(String, f64), b: &(String, f64)) -> Ordering {
    b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0))
}

/// Every other word whose similarity to `word` lies in `[lo, hi]`.
pub fn neighborhood(
    table: &VectorTable,
    word: &str,
    lo: f64,
    hi: f64,
) -> Result<Vec<(String, f64)>, LexError> {
    if !(0.0..=1.0).contains(&lo) || !(0.0..=1.0).contains(&hi) || lo >= hi {
        return Err(LexError::InvalidInterval { lo, hi });
    }
    let target = *table
        .index
        .get(&phrase_key(word))
        .ok_or_else(|| LexError::OutOfVocabulary(word.to_string()))?;
    let tv = table.row(target);
    let tn = table.norms[target];
    let mut out: Vec<(String, f64)> = (0..table.len())
        .filter(|&i| i != target)
        .filter_map(|i| {
            let sim = cosine_with_norms(table.row(i), table.norms[i], tv, tn);
            (lo <= sim && sim <= hi).then(|| (table.words[i].clone(), sim))
        })
        .collect();
    out.sort_by(by_similarity_then_word);
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Synset {
    pub id: String,
    pub pos: String,
    pub lemmas: Vec<String>,
}

#[derive(Deserialize)]
struct RawSynset {
    id: String,
    #[serde(default)]
    pos: String,
    lemmas: Vec<String>,
    #[serde(default)]
    hypernyms: Vec<String>,
}

#[derive(Deserialize)]
struct RawGraph {
    synsets: Vec<RawSynset>,
    #[serde(default)]
    antonyms: Vec<(String, String)>,
}

fn lemma_key(lemma: &str) -> String {
    lemma
        .split(|c: char| c.is_whitespace() || c == '_')
        .filter(|s| !s.is_empty())
        .map(str::to_lowercase)
        .collect::<Vec<_>>()
        .join(" ")
}

/// Synsets with hypernym edges and antonym pairs; depths count nodes from
/// a root, so roots have depth 1.
#[derive(Debug, Clone)]
pub struct LexicalGraph {
    synsets: Vec<Synset>,
    parents: Vec<Vec<usize>>,
    depth: Vec<u32>,
    by_lemma: HashMap<String, Vec<usize>>,
    antonyms: HashSet<(String, String)>,
}

impl LexicalGraph {
    pub fn from_json_str(text: &str) -> Result<Self, LexError> {
        let raw: RawGraph =
            serde_json::from_str(text).map_err(|e| LexError::GraphFormat(e.to_string()))?;
        let mut ids = HashMap::new();
        for (i, s) in raw.synsets.iter().enumerate() {
            if ids.insert(s.id.clone(), i).is_some() {
                return Err(LexError::GraphFormat(format!(
                    "duplicate synset id `{}`",
                    s.id
                )));
            }
            if s.lemmas.is_empty() {
                return Err(LexError::GraphFormat(format!(
                    "synset `{}` has no lemmas",
                    s.id
                )));
            }
        }
        let mut parents = Vec::with_capacity(raw.synsets.len());
        for s in &raw.synsets {
            let mut ps = Vec::new();
            for h in &s.hypernyms {
                let p = *ids.get(h).ok_or_else(|| {
                    LexError::GraphFormat(format!("synset `{}` names unknown hypernym `{h}`", s.id))
                })?;
                if !ps.contains(&p) {
                    ps.push(p);
                }
            }
            parents.push(ps);
        }
        let synsets: Vec<Synset> = raw
            .synsets
            .into_iter()
            .map(|s| Synset {
                id: s.id,
                pos: s.pos,
                lemmas: s.lemmas,
            })
            .collect();
        let antonyms = raw
            .antonyms
            .iter()
            .map(|(a, b)| (lemma_key(a), lemma_key(b)))
            .filter(|(a, b)| a != b)
            .collect();
        Self::build(synsets, parents, antonyms)
    }

    pub fn from_reader<R: Read>(mut reader: R) -> Result<Self, LexError> {
        let mut text = String::new();
        reader.read_to_string(&mut text)?;
        Self::from_json_str(&text)
    }

    fn build(
        synsets: Vec<Synset>,
        parents: Vec<Vec<usize>>,
        antonyms: HashSet<(String, String)>,
    ) -> Result<Self, LexError> {
        let n = synsets.len();
        // Kahn's algorithm from the roots down; anything left over is on a cycle.
        let mut children = vec![Vec::new(); n];
        let mut pending: Vec<usize> = parents.iter().map(Vec::len).collect();
        for (c, ps) in parents.iter().enumerate() {
            for &p in ps {
                children[p].push(c);
            }
        }
        let mut depth = vec![0u32; n];
        let mut queue: Vec<usize> = (0..n).filter(|&i| pending[i] == 0).collect();
        for &r in &queue {
            depth[r] = 1;
        }
        let mut head = 0;
        while head < queue.len() {
            let node = queue[head];
            head += 1;
            for &c in &children[node] {
                pending[c] -= 1;
                if pending[c] == 0 {
                    depth[c] = parents[c].iter().map(|&p| depth[p]).min().unwrap_or(0) + 1;
                    queue.push(c);
                }
            }
        }
        if queue.len() < n {
            let stuck = (0..n)
                .filter(|&i| pending[i] > 0)
                .map(|i| synsets[i].id.clone())
                .collect();
            return Err(LexError::Cycle(stuck));
        }
        let mut by_lemma: HashMap<String, Vec<usize>> = HashMap::new();
        for (i, s) in synsets.iter().enumerate() {
            for l in &s.lemmas {
                let entry = by_lemma.entry(lemma_key(l)).or_default();
                if !entry.contains(&i) {
                    entry.push(i);
                }
            }
        }
        Ok(Self {
            synsets,
            parents,
            depth,
            by_lemma,
            antonyms,
        })
    }

    pub fn synsets(&self) -> &[Synset] {
        &self.synsets
    }

    pub fn parents_of(&self, synset: usize) -> &[usize] {
        &self.parents[synset]
    }

    pub fn depth_of(&self, synset: usize) -> u32 {
        self.depth[synset]
    }

    /// Indices of the synsets containing `lemma`.
    pub fn synsets_of(&self, lemma: &str) -> &[usize] {
        self.by_lemma
            .get(&lemma_key(lemma))
            .map_or(&[], Vec::as_slice)
    }

    pub fn contains(&self, lemma: &str) -> bool {
        !self.synsets_of(lemma).is_empty()
    }

    /// The synset and all its hypernym ancestors.
    pub fn ancestors(&self, synset: usize) -> HashSet<usize> {
        let mut seen = HashSet::from([synset]);
        let mut stack = vec![synset];
        while let Some(s) = stack.pop() {
            for &p in &self.parents[s] {
                if seen.insert(p) {
                    stack.push(p);
                }
            }
        }
        seen
    }

    fn pair_score(&self, a: usize, b: usize) -> Option<f64> {
        let ours = self.ancestors(a);
        let lcs_depth = self
            .ancestors(b)
            .into_iter()
            .filter(|s| ours.contains(s))
            .map(|s| self.depth[s])
            .max()?;
        let score = 2.0 * f64::from(lcs_depth) / f64::from(self.depth[a] + self.depth[b]);
        // With several parents, the min-depth rule can place an ancestor
        // deeper than its descendant; cap so only identical synsets reach 1.
        Some(if a == b {
            1.0
        } else {
            score.min(1.0 - f64::EPSILON)
        })
    }
}

/// Wu-Palmer similarity, maximized over the synsets of both lemmas; `None`
/// when either lemma is missing or the two share no ancestor.
pub fn wup(graph: &LexicalGraph, a: &str, b: &str) -> Option<f64> {
    let sa = graph.synsets_of(a);
    let sb = graph.synsets_of(b);
    sa.iter()
        .flat_map(|&x| sb.iter().map(move |&y| (x, y)))
        .filter_map(|(x, y)| graph.pair_score(x, y))
        .max_by(f64::total_cmp)
}

pub fn is_antonym(graph: &LexicalGraph, a: &str, b: &str) -> bool {
    let (a, b) = (lemma_key(a), lemma_key(b));
    a != b && (graph.antonyms.contains(&(a.clone(), b.clone())) || graph.antonyms.contains(&(b, a)))
}

/// Lemmas of the direct hypernyms of every synset containing `word`.
pub fn hypernym_candidates(graph: &LexicalGraph, word: &str) -> Vec<String> {
    let own = lemma_key(word);
    let mut seen = HashSet::from([own]);
    let mut out = Vec::new();
    for &s in graph.synsets_of(word) {
        for &p in &graph.parents[s] {
            for lemma in &graph.synsets[p].lemmas {
                let display = lemma.replace('_', " ");
                if seen.insert(lemma_key(lemma)) {
                    out.push(display);
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table(rows: &[(&str, &[f64])]) -> VectorTable {
        let mut t = VectorTable::new(rows[0].1.len());
        for (w, v) in rows {
            t.insert(w, v.to_vec()).unwrap();
        }
        t
    }

    #[test]
    fn cosine_identities() {
        let v = [0.3, -1.2, 2.0];
        let neg: Vec<f64> = v.iter().map(|x| -x).collect();
        assert!((cosine(&v, &v).unwrap() - 1.0).abs() < 1e-12);
        assert!((cosine(&v, &neg).unwrap() + 1.0).abs() < 1e-12);
        assert_eq!(cosine(&[1.0, 0.0], &[0.0, 1.0]).unwrap(), 0.0);
    }

    #[test]
    fn cosine_errors() {
        assert!(matches!(
            cosine(&[1.0], &[1.0, 2.0]),
            Err(LexError::DimensionMismatch(1, 2))
        ));
        assert!(matches!(
            cosine(&[0.0, 0.0], &[1.0, 2.0]),
            Err(LexError::ZeroVector)
        ));
    }

    #[test]
    fn neighborhood_interval_excludes_too_close_and_too_far() {
        let t = table(&[("a", &[1.0, 0.0]), ("b", &[1.0, 0.0]), ("c", &[0.0, 1.0])]);
        assert!(neighborhood(&t, "a", 0.6, 0.85).unwrap().is_empty());
        assert_eq!(
            neighborhood(&t, "a", 0.0, 1.0).unwrap(),
            vec![("b".to_string(), 1.0), ("c".to_string(), 0.0)]
        );
    }

    #[test]
    fn neighborhood_unknown_word() {
        let t = table(&[("a", &[1.0, 0.0])]);
        assert!(matches!(
            neighborhood(&t, "zz", 0.6, 0.85),
            Err(LexError::OutOfVocabulary(_))
        ));
    }

    #[test]
    fn neighborhood_rejects_bad_interval() {
        let t = table(&[("a", &[1.0, 0.0])]);
        assert!(neighborhood(&t, "a", 0.9, 0.8).is_err());
        assert!(neighborhood(&t, "a", -0.1, 0.8).is_err());
    }

    #[test]
    fn vector_file_with_and_without_header() {
        let with = "2 2\nx 1 0\ny 0.5 0.5\n";
        let without = "x 1 0\ny 0.5 0.5\n";
        for text in [with, without] {
            let t = VectorTable::from_reader(text.as_bytes()).unwrap();
            assert_eq!(t.len(), 2);
            assert_eq!(t.dimension(), 2);
        }
    }

    #[test]
    fn vector_file_errors_name_the_line() {
        let bad_dim = "x 1 0\ny 0.5\n";
        let err = VectorTable::from_reader(bad_dim.as_bytes())
            .unwrap_err()
            .to_string();
        assert!(err.contains("line 2"), "{err}");
        let zero = "x 0 0\n";
        assert!(VectorTable::from_reader(zero.as_bytes()).is_err());
        let dup = "x 1 0\nx 0 1\n";
        assert!(VectorTable::from_reader(dup.as_bytes()).is_err());
        let count = "3 2\nx 1 0\n";
        assert!(VectorTable::from_reader(count.as_bytes()).is_err());
    }

    const CHAIN: &str = r#"{"synsets":[
        {"id":"r","pos":"n","lemmas":["root"],"hypernyms":[]},
        {"id":"A","pos":"n","lemmas":["x"],"hypernyms":["r"]},
        {"id":"B","pos":"n","lemmas":["y"],"hypernyms":["A"]},
        {"id":"dog","pos":"n","lemmas":["dog","domestic_dog"],"hypernyms":["canine"]},
        {"id":"canine","pos":"n","lemmas":["canine"],"hypernyms":["r"]}
    ],"antonyms":[["experienced","inexperienced"]]}"#;

    #[test]
    fn wup_on_chain() {
        let g = LexicalGraph::from_json_str(CHAIN).unwrap();
        assert_eq!(wup(&g, "x", "y"), Some(0.8));
        assert_eq!(wup(&g, "y", "x"), Some(0.8));
        assert_eq!(wup(&g, "x", "x"), Some(1.0));
        assert_eq!(wup(&g, "zqx", "x"), None);
        assert_eq!(wup(&g, "dog", "domestic dog"), Some(1.0));
    }

    #[test]
    fn hypernyms() {
        let g = LexicalGraph::from_json_str(CHAIN).unwrap();
        assert_eq!(hypernym_candidates(&g, "dog"), vec!["canine".to_string()]);
        assert!(hypernym_candidates(&g, "root").is_empty());
        assert!(hypernym_candidates(&g, "absent").is_empty());
    }

    #[test]
    fn antonyms_are_symmetric_and_irreflexive() {
        let g = LexicalGraph::from_json_str(CHAIN).unwrap();
        assert!(is_antonym(&g, "experienced", "inexperienced"));
        assert!(is_antonym(&g, "Inexperienced", "experienced"));
        assert!(!is_antonym(&g, "experienced", "experienced"));
    }

    #[test]
    fn cycles_are_rejected() {
        let cyclic = r#"{"synsets":[
            {"id":"a","lemmas":["a"],"hypernyms":["b"]},
            {"id":"b","lemmas":["b"],"hypernyms":["a"]},
            {"id":"c","lemmas":["c"],"hypernyms":[]}
        ]}"#;
        match LexicalGraph::from_json_str(cyclic) {
            Err(LexError::Cycle(ids)) => assert_eq!(ids, vec!["a".to_string(), "b".to_string()]),
            other => panic!("expected cycle error, got {other:?}"),
        }
    }

    #[test]
    fn unknown_hypernym_is_rejected() {
        let bad = r#"{"synsets":[{"id":"a","lemmas":["a"],"hypernyms":["nope"]}]}"#;
        assert!(LexicalGraph::from_json_str(bad).is_err());
    }
}
