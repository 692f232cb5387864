//! Stop-word lists: a base list of English function words, domain terms
//! (game jargon, system-generated identifiers) and per-player terms flagged
//! as self-identifying because one player uses them far more than everyone
//! else.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::{tokenize, Corpus, Role};
use crate::error::{Error, Result};

const BUILTIN: &str = include_str!("../../data/stopwords_en.txt");

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(from = "StopWordParts", into = "StopWordParts")]
pub struct StopWordList {
    base: BTreeSet<String>,
    domain: BTreeSet<String>,
    self_id: BTreeMap<String, BTreeSet<String>>,
    combined: BTreeSet<String>,
}

#[derive(Serialize, Deserialize)]
struct StopWordParts {
    base: BTreeSet<String>,
    domain: BTreeSet<String>,
    self_id: BTreeMap<String, BTreeSet<String>>,
}

impl From<StopWordParts> for StopWordList {
    fn from(p: StopWordParts) -> Self {
        StopWordList::from_parts(p.base, p.domain, p.self_id)
    }
}

impl From<StopWordList> for StopWordParts {
    fn from(l: StopWordList) -> Self {
        StopWordParts {
            base: l.base,
            domain: l.domain,
            self_id: l.self_id,
        }
    }
}

impl PartialEq for StopWordList {
    fn eq(&self, other: &Self) -> bool {
        self.base == other.base && self.domain == other.domain && self.self_id == other.self_id
    }
}

impl StopWordList {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn from_parts(
        base: BTreeSet<String>,
        domain: BTreeSet<String>,
        self_id: BTreeMap<String, BTreeSet<String>>,
    ) -> Self {
        let mut combined: BTreeSet<String> = base.union(&domain).cloned().collect();
        for terms in self_id.values() {
            combined.extend(terms.iter().cloned());
        }
        Self {
            base,
            domain,
            self_id,
            combined,
        }
    }

    pub fn contains(&self, term: &str) -> bool {
        self.combined.contains(term)
    }

    pub fn base(&self) -> &BTreeSet<String> {
        &self.base
    }

    pub fn domain(&self) -> &BTreeSet<String> {
        &self.domain
    }

    pub fn self_id(&self) -> &BTreeMap<String, BTreeSet<String>> {
        &self.self_id
    }

    pub fn combined(&self) -> &BTreeSet<String> {
        &self.combined
    }

    /// Adds domain terms, e.g. a term the analyst wants suppressed.
    pub fn with_domain_terms(mut self, terms: impl IntoIterator<Item = String>) -> Self {
        self.domain.extend(terms);
        Self::from_parts(self.base, self.domain, self.self_id)
    }

    /// Text form: one `base<TAB>term`, `domain<TAB>term` or
    /// `self<TAB>player<TAB>term` row per entry, sorted.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for t in &self.base {
            let _ = writeln!(out, "base\t{t}");
        }
        for t in &self.domain {
            let _ = writeln!(out, "domain\t{t}");
        }
        for (player, terms) in &self.self_id {
            for t in terms {
                let _ = writeln!(out, "self\t{player}\t{t}");
            }
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut base = BTreeSet::new();
        let mut domain = BTreeSet::new();
        let mut self_id: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
        for (i, line) in text.lines().enumerate() {
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            match fields.as_slice() {
                ["base", t] => {
                    base.insert(t.to_string());
                }
                ["domain", t] => {
                    domain.insert(t.to_string());
                }
                ["self", p, t] => {
                    self_id.entry(p.to_string()).or_default().insert(t.to_string());
                }
                _ => {
                    return Err(Error::Serialization(format!(
                        "stop-word list line {}: unrecognized row",
                        i + 1
                    )))
                }
            }
        }
        Ok(Self::from_parts(base, domain, self_id))
    }
}

/// Parses a word-per-line list. `#` starts a comment; words are lowercased.
pub fn parse_word_list(text: &str) -> BTreeSet<String> {
    text.lines()
        .map(|l| l.split('#').next().unwrap_or("").trim().to_lowercase())
        .filter(|l| !l.is_empty())
        .collect()
}

/// The bundled English function-word list.
pub fn builtin_base() -> BTreeSet<String> {
    parse_word_list(BUILTIN)
}

pub fn load_base(path: impl AsRef<Path>) -> Result<BTreeSet<String>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(parse_word_list(&text))
}

/// A machine-generated token: at least 16 alphanumerics, 4 or more of them
/// digits (GUID fragments, hashes).
pub fn is_nonsense_token(token: &str) -> bool {
    token.len() >= 16
        && token.chars().all(|c| c.is_ascii_alphanumeric())
        && token.chars().filter(char::is_ascii_digit).count() >= 4
}

#[derive(Debug, Clone, PartialEq)]
pub struct InductionSettings {
    /// Minimum ratio of a player's relative frequency to the corpus's.
    pub ratio_threshold: f64,
    /// Minimum number of uses by the player.
    pub min_count: usize,
    pub include_dm: bool,
}

impl Default for InductionSettings {
    fn default() -> Self {
        Self {
            ratio_threshold: 5.0,
            min_count: 10,
            include_dm: false,
        }
    }
}

/// Builds the stop-word list for a corpus.
///
/// Term `t` is flagged for player `p` when `p` used it at least `min_count`
/// times and `p`'s relative frequency of `t` is at least `ratio_threshold`
/// times the corpus's.
pub fn induce_stopwords(
    corpus: &Corpus,
    base: BTreeSet<String>,
    extra: &[String],
    settings: &InductionSettings,
) -> Result<StopWordList> {
    if corpus.is_empty() {
        return Err(Error::Pipeline("cannot induce stop words from an empty corpus".into()));
    }
    let mut per_player: BTreeMap<&str, HashMap<String, usize>> = BTreeMap::new();
    let mut corpus_counts: HashMap<String, usize> = HashMap::new();
    let mut domain: BTreeSet<String> = extra.iter().map(|t| t.to_lowercase()).collect();
    let mut corpus_total = 0usize;
    for post in corpus.posts() {
        let tokens = tokenize(&post.text);
        domain.extend(tokens.iter().filter(|t| is_nonsense_token(t)).cloned());
        if post.role == Role::Dm && !settings.include_dm {
            continue;
        }
        let counts = per_player.entry(&post.player_id).or_default();
        for t in tokens {
            *counts.entry(t.clone()).or_insert(0) += 1;
            *corpus_counts.entry(t).or_insert(0) += 1;
            corpus_total += 1;
        }
    }

    let mut self_id: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
    for (player, counts) in per_player {
        let player_total: usize = counts.values().sum();
        if player_total == 0 {
            continue;
        }
        for (term, &count) in &counts {
            if count < settings.min_count {
                continue;
            }
            let player_rel = count as f64 / player_total as f64;
            let corpus_rel = corpus_counts[term] as f64 / corpus_total as f64;
            if player_rel / corpus_rel >= settings.ratio_threshold {
                self_id.entry(player.to_string()).or_default().insert(term.clone());
            }
        }
    }
    Ok(StopWordList::from_parts(base, domain, self_id))
}
