//! Type-2 targets: people, locations and organizations.
//!
//! Replacements come from other same-category entities mentioned in the
//! article first, then from peer groups in a curated knowledge base.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::io::Read;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::annotation::{AnnotatedArticle, TargetWord};

const BUNDLED_KB: &str = include_str!("../data/kb.json");

#[derive(Debug, Error)]
pub enum EntityError {
    #[error("knowledge base: {0}")]
    Format(String),
    #[error("knowledge base: {0}")]
    Io(#[from] std::io::Error),
    #[error("target `{0}` is not a person, location or organization")]
    NotAnEntity(String),
    #[error("requested {needed} distinct replacements for `{target}` but only {} exist", found.len())]
    InsufficientCandidates {
        target: String,
        needed: usize,
        found: Vec<String>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EntityCategory {
    Person,
    Location,
    Organization,
}

impl EntityCategory {
    pub const ALL: [EntityCategory; 3] = [
        EntityCategory::Person,
        EntityCategory::Location,
        EntityCategory::Organization,
    ];
}

impl fmt::Display for EntityCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EntityCategory::Person => "person",
            EntityCategory::Location => "location",
            EntityCategory::Organization => "organization",
        })
    }
}

/// Lowercases and collapses internal whitespace.
pub(crate) fn normalize_name(name: &str) -> String {
    name.split_whitespace()
        .map(str::to_lowercase)
        .collect::<Vec<_>>()
        .join(" ")
}

/// Surface forms known to the knowledge base, for the fallback tagger.
#[derive(Debug, Clone, Default)]
pub struct Gazetteer {
    entries: HashMap<String, EntityCategory>,
    max_tokens: usize,
}

impl Gazetteer {
    pub fn lookup(&self, phrase: &str) -> Option<EntityCategory> {
        self.entries.get(&normalize_name(phrase)).copied()
    }

    /// Longest entry length in whitespace-separated words.
    pub fn max_tokens(&self) -> usize {
        self.max_tokens
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PeerGroup {
    pub category: EntityCategory,
    pub name: String,
    pub members: Vec<String>,
}

/// Curated peer groups ("cities in the same league") per category.
#[derive(Debug, Clone, Default)]
pub struct KnowledgeBase {
    groups: Vec<PeerGroup>,
    gazetteer: Gazetteer,
}

impl KnowledgeBase {
    /// Parses the JSON document `{category: {group_name: [surfaces...]}}`.
    pub fn from_json_str(text: &str) -> Result<Self, EntityError> {
        let raw: BTreeMap<EntityCategory, BTreeMap<String, Vec<String>>> =
            serde_json::from_str(text).map_err(|e| EntityError::Format(e.to_string()))?;
        let mut groups = Vec::new();
        for category in EntityCategory::ALL {
            let Some(named) = raw.get(&category) else {
                continue;
            };
            for (name, members) in named {
                if members.is_empty() {
                    return Err(EntityError::Format(format!(
                        "group `{name}` in category {category} is empty"
                    )));
                }
                if let Some(blank) = members.iter().find(|m| m.trim().is_empty()) {
                    return Err(EntityError::Format(format!(
                        "group `{name}` contains a blank surface {blank:?}"
                    )));
                }
                groups.push(PeerGroup {
                    category,
                    name: name.clone(),
                    members: members.iter().map(|m| m.trim().to_string()).collect(),
                });
            }
        }
        Ok(Self::from_groups(groups))
    }

    pub fn from_reader<R: Read>(mut reader: R) -> Result<Self, EntityError> {
        let mut text = String::new();
        reader.read_to_string(&mut text)?;
        Self::from_json_str(&text)
    }

    /// The knowledge base compiled into the library.
    pub fn bundled() -> Self {
        Self::from_json_str(BUNDLED_KB).expect("bundled knowledge base is valid")
    }

    pub fn from_groups(groups: Vec<PeerGroup>) -> Self {
        let mut entries = HashMap::new();
        let mut max_tokens = 0;
        for group in &groups {
            for member in &group.members {
                entries
                    .entry(normalize_name(member))
                    .or_insert(group.category);
                max_tokens = max_tokens.max(member.split_whitespace().count());
            }
        }
        Self {
            groups,
            gazetteer: Gazetteer {
                entries,
                max_tokens,
            },
        }
    }

    pub fn groups(&self) -> &[PeerGroup] {
        &self.groups
    }

    pub fn gazetteer(&self) -> &Gazetteer {
        &self.gazetteer
    }
}

fn push_unique(out: &mut Vec<String>, seen: &mut HashSet<String>, surface: &str) {
    if seen.insert(normalize_name(surface)) {
        out.push(surface.to_string());
    }
}

/// Maximal runs of `category` tokens across the article, in order of first
/// mention, deduplicated case-insensitively.
pub fn collect_article_entities(
    article: &AnnotatedArticle,
    category: EntityCategory,
) -> Vec<String> {
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    for sentence in &article.sentences {
        let tokens = &sentence.tokens;
        let mut i = 0;
        while i < tokens.len() {
            if tokens[i].entity.category() != Some(category) {
                i += 1;
                continue;
            }
            let mut j = i;
            while j + 1 < tokens.len() && tokens[j + 1].entity.category() == Some(category) {
                j += 1;
            }
            push_unique(
                &mut out,
                &mut seen,
                &sentence.slice(tokens[i].start, tokens[j].end),
            );
            i = j + 1;
        }
    }
    out
}

/// Every other member of every peer group that contains `name`.
pub fn kb_peers(kb: &KnowledgeBase, category: EntityCategory, name: &str) -> Vec<String> {
    let key = normalize_name(name);
    let mut out = Vec::new();
    let mut seen = HashSet::from([key.clone()]);
    for group in kb.groups.iter().filter(|g| g.category == category) {
        if group.members.iter().any(|m| normalize_name(m) == key) {
            for member in &group.members {
                push_unique(&mut out, &mut seen, member);
            }
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EntitySource {
    Article,
    KnowledgeBase,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EntityReplacement {
    pub text: String,
    pub source: EntitySource,
}

/// Up to `n` distinct replacements: article mentions first, in random
/// order, then knowledge-base peers.
pub fn sample_entity_replacements<R: Rng + ?Sized>(
    target: &TargetWord,
    article: &AnnotatedArticle,
    kb: &KnowledgeBase,
    n: usize,
    rng: &mut R,
) -> Result<Vec<EntityReplacement>, EntityError> {
    let category = target
        .target_type
        .entity_category()
        .ok_or_else(|| EntityError::NotAnEntity(target.surface.clone()))?;
    let mut seen = HashSet::from([normalize_name(&target.surface)]);
    let mut out = Vec::with_capacity(n);

    let mut article_pool: Vec<String> = collect_article_entities(article, category)
        .into_iter()
        .filter(|s| !seen.contains(&normalize_name(s)))
        .collect();
    article_pool.shuffle(rng);
    for text in article_pool.into_iter().take(n) {
        seen.insert(normalize_name(&text));
        out.push(EntityReplacement {
            text,
            source: EntitySource::Article,
        });
    }
    if out.len() < n {
        let mut peers: Vec<String> = kb_peers(kb, category, &target.surface)
            .into_iter()
            .filter(|s| !seen.contains(&normalize_name(s)))
            .collect();
        peers.shuffle(rng);
        let missing = n - out.len();
        out.extend(
            peers
                .into_iter()
                .take(missing)
                .map(|text| EntityReplacement {
                    text,
                    source: EntitySource::KnowledgeBase,
                }),
        );
    }
    Ok(out)
}

/// Exactly `n` distinct replacement names for a type-2 target.
pub fn generate_entity_distractors<R: Rng + ?Sized>(
    target: &TargetWord,
    article: &AnnotatedArticle,
    kb: &KnowledgeBase,
    n: usize,
    rng: &mut R,
) -> Result<Vec<String>, EntityError> {
    let found: Vec<String> = sample_entity_replacements(target, article, kb, n, rng)?
        .into_iter()
        .map(|r| r.text)
        .collect();
    if found.len() < n {
        return Err(EntityError::InsufficientCandidates {
            target: target.surface.clone(),
            needed: n,
            found,
        });
    }
    Ok(found)
}
