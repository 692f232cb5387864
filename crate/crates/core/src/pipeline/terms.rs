//! Ranked term lists and the three scoring modes.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use super::stopwords::StopWordList;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScoringMode {
    /// Raw counts.
    Bow,
    /// Sum over posts of raw count times `ln(N / df)`.
    Tfidf,
    /// Eigenvector centrality on the term co-occurrence graph.
    Centrality,
}

impl std::fmt::Display for ScoringMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ScoringMode::Bow => "bow",
            ScoringMode::Tfidf => "tfidf",
            ScoringMode::Centrality => "centrality",
        })
    }
}

/// Where a term list came from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum TermScope {
    Unscoped,
    Places { sequence: usize },
    Spaces { group: String, sequence: usize },
    Player { player: String },
    Preliminary { player: String, split: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TermEntry {
    pub term: String,
    pub score: f64,
}

/// At most `depth` entries, score descending, ties broken by term ascending.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TermList {
    pub scope: TermScope,
    pub mode: ScoringMode,
    pub depth: usize,
    pub entries: Vec<TermEntry>,
}

impl TermList {
    pub fn with_scope(mut self, scope: TermScope) -> Self {
        self.scope = scope;
        self
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn terms(&self) -> Vec<String> {
        self.entries.iter().map(|e| e.term.clone()).collect()
    }

    /// The first `k` terms.
    pub fn top(&self, k: usize) -> Vec<String> {
        self.entries.iter().take(k).map(|e| e.term.clone()).collect()
    }

    pub fn contains(&self, term: &str) -> bool {
        self.entries.iter().any(|e| e.term == term)
    }

    /// The top `k` terms joined with `-`, e.g. `goblin-orc-stairs`.
    pub fn label(&self, k: usize) -> String {
        self.top(k).join("-")
    }

    pub fn term_set(&self) -> BTreeSet<String> {
        self.entries.iter().map(|e| e.term.clone()).collect()
    }
}

/// Sorts by score descending then term ascending, drops non-positive scores
/// and keeps the first `depth`.
pub fn rank(scores: impl IntoIterator<Item = (String, f64)>, depth: usize) -> Vec<TermEntry> {
    let mut entries: Vec<TermEntry> = scores
        .into_iter()
        .filter(|(_, s)| *s > 0.0)
        .map(|(term, score)| TermEntry { term, score })
        .collect();
    entries.sort_by(|a, b| b.score.total_cmp(&a.score).then_with(|| a.term.cmp(&b.term)));
    entries.truncate(depth);
    entries
}

fn unscoped(mode: ScoringMode, depth: usize, entries: Vec<TermEntry>) -> TermList {
    TermList {
        scope: TermScope::Unscoped,
        mode,
        depth,
        entries,
    }
}

/// Ranks already-counted terms as a bag of words.
pub fn rank_counts(
    counts: &HashMap<String, usize>,
    stopwords: &StopWordList,
    excluded: &BTreeSet<String>,
    depth: usize,
) -> TermList {
    let scores = counts
        .iter()
        .filter(|(t, _)| !stopwords.contains(t) && !excluded.contains(*t))
        .map(|(t, &c)| (t.clone(), c as f64));
    unscoped(ScoringMode::Bow, depth, rank(scores, depth))
}

/// Scores the terms of `docs` (one token list per post).
pub fn score_terms<D: AsRef<[String]>>(
    docs: &[D],
    mode: ScoringMode,
    stopwords: &StopWordList,
    depth: usize,
) -> TermList {
    score_terms_excluding(docs, mode, stopwords, &BTreeSet::new(), depth)
}

/// [`score_terms`] with additional terms removed before scoring.
pub fn score_terms_excluding<D: AsRef<[String]>>(
    docs: &[D],
    mode: ScoringMode,
    stopwords: &StopWordList,
    excluded: &BTreeSet<String>,
    depth: usize,
) -> TermList {
    let keep = |t: &str| !stopwords.contains(t) && !excluded.contains(t);
    let docs: Vec<Vec<&str>> = docs
        .iter()
        .map(|d| d.as_ref().iter().map(String::as_str).filter(|t| keep(t)).collect())
        .collect();
    let scores = match mode {
        ScoringMode::Bow => bow_scores(&docs),
        ScoringMode::Tfidf => tfidf_scores(&docs),
        ScoringMode::Centrality => centrality_scores(&docs),
    };
    unscoped(mode, depth, rank(scores, depth))
}

pub(crate) fn bow_scores(docs: &[Vec<&str>]) -> Vec<(String, f64)> {
    let mut counts: HashMap<&str, usize> = HashMap::new();
    for d in docs {
        for t in d {
            *counts.entry(t).or_insert(0) += 1;
        }
    }
    counts.into_iter().map(|(t, c)| (t.to_string(), c as f64)).collect()
}

pub(crate) fn tfidf_scores(docs: &[Vec<&str>]) -> Vec<(String, f64)> {
    let n = docs.len() as f64;
    let mut df: HashMap<&str, usize> = HashMap::new();
    let mut tf_total: HashMap<&str, usize> = HashMap::new();
    for d in docs {
        let distinct: BTreeSet<&str> = d.iter().copied().collect();
        for t in distinct {
            *df.entry(t).or_insert(0) += 1;
        }
        for t in d {
            *tf_total.entry(t).or_insert(0) += 1;
        }
    }
    // idf does not vary across posts, so the per-post sum factors out
    tf_total
        .into_iter()
        .map(|(t, tf)| {
            let d = df[t];
            let score = if d == docs.len() {
                0.0
            } else {
                tf as f64 * (n / d as f64).ln()
            };
            (t.to_string(), score)
        })
        .collect()
}

const CENTRALITY_ITERATIONS: usize = 100;

/// Power iteration on the co-occurrence graph with self-loops added, which
/// keeps bipartite graphs (stars) from oscillating without changing the
/// leading eigenvector.
pub(crate) fn centrality_scores(docs: &[Vec<&str>]) -> Vec<(String, f64)> {
    let vocab: BTreeSet<&str> = docs.iter().flatten().copied().collect();
    if vocab.is_empty() {
        return Vec::new();
    }
    let index: HashMap<&str, usize> = vocab.iter().enumerate().map(|(i, t)| (*t, i)).collect();
    let n = vocab.len();
    let mut weights: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    for d in docs {
        let ids: BTreeSet<usize> = d.iter().map(|t| index[t]).collect();
        let ids: Vec<usize> = ids.into_iter().collect();
        for (a, &i) in ids.iter().enumerate() {
            for &j in &ids[a + 1..] {
                *weights.entry((i, j)).or_insert(0.0) += 1.0;
            }
        }
    }
    let mut adjacency: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    for (&(i, j), &w) in &weights {
        adjacency[i].push((j, w));
        adjacency[j].push((i, w));
    }
    let connected: Vec<bool> = adjacency.iter().map(|a| !a.is_empty()).collect();
    let mut x = vec![1.0 / n as f64; n];
    let mut next = vec![0.0; n];
    for _ in 0..CENTRALITY_ITERATIONS {
        for i in 0..n {
            next[i] = x[i] + adjacency[i].iter().map(|&(j, w)| w * x[j]).sum::<f64>();
        }
        let total: f64 = next.iter().sum();
        if total <= 0.0 {
            break;
        }
        for i in 0..n {
            x[i] = next[i] / total;
        }
    }
    vocab
        .into_iter()
        .enumerate()
        // a term that never co-occurs has no centrality
        .map(|(i, t)| (t.to_string(), if connected[i] { x[i] } else { 0.0 }))
        .collect()
}
