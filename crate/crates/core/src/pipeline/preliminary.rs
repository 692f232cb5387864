//! The even-split analysis of a single group: every player's posts are cut
//! into equal contiguous buckets, each bucket keeps its most distinctive
//! terms, and a co-occurrence centrality over all players' kept terms names
//! the headline terms of each split.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use super::slices::even_buckets;
use super::stopwords::StopWordList;
use super::terms::{centrality_scores, rank, tfidf_scores, ScoringMode, TermEntry, TermList, TermScope};
use crate::corpus::{tokenize, Corpus, Role};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PreliminarySettings {
    pub splits: usize,
    /// Fraction of each player-bucket's distinct terms to keep, rounded up.
    pub top_fraction: f64,
    pub headline_terms: usize,
    pub include_dm: bool,
}

impl Default for PreliminarySettings {
    fn default() -> Self {
        Self {
            splits: 5,
            top_fraction: 0.25,
            headline_terms: 2,
            include_dm: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitHeadline {
    pub split: usize,
    pub terms: Vec<String>,
}

impl SplitHeadline {
    /// `troll, chest`
    pub fn display(&self) -> String {
        self.terms.join(", ")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PreliminaryReport {
    pub group: String,
    /// One list per (player, split), players ascending.
    pub players: Vec<TermList>,
    pub headlines: Vec<SplitHeadline>,
    pub warnings: Vec<String>,
}

/// Number of terms kept out of `distinct`.
pub fn retained_count(distinct: usize, fraction: f64) -> usize {
    ((distinct as f64) * fraction).ceil() as usize
}

pub fn preliminary_even_split(
    corpus: &Corpus,
    group: &str,
    stopwords: &StopWordList,
    settings: &PreliminarySettings,
) -> Result<PreliminaryReport> {
    if settings.splits < 1 {
        return Err(Error::Pipeline("the even split needs at least one split".into()));
    }
    let mut by_player: BTreeMap<&str, Vec<Vec<String>>> = BTreeMap::new();
    for post in corpus.group_posts(group) {
        if post.role == Role::Dm && !settings.include_dm {
            continue;
        }
        let tokens = tokenize(&post.text)
            .into_iter()
            .filter(|t| !stopwords.contains(t))
            .collect();
        by_player.entry(&post.player_id).or_default().push(tokens);
    }
    if by_player.is_empty() {
        return Err(Error::Pipeline(format!("group {group} has no counted posts")));
    }

    let mut warnings = Vec::new();
    let mut players = Vec::new();
    // per split, the posts of every player and the union of kept terms
    let mut split_docs: Vec<Vec<&Vec<String>>> = vec![Vec::new(); settings.splits];
    let mut split_terms: Vec<BTreeSet<String>> = vec![BTreeSet::new(); settings.splits];
    for (player, posts) in &by_player {
        if posts.len() < settings.splits {
            warnings.push(format!(
                "player {player} in group {group} has {} posts for {} splits",
                posts.len(),
                settings.splits
            ));
        }
        for (split, range) in even_buckets(posts.len(), settings.splits).into_iter().enumerate() {
            let docs: Vec<Vec<&str>> = posts[range.clone()]
                .iter()
                .map(|d| d.iter().map(String::as_str).collect())
                .collect();
            let mut bow: HashMap<&str, usize> = HashMap::new();
            for t in docs.iter().flatten() {
                *bow.entry(t).or_insert(0) += 1;
            }
            let mut scored: Vec<(String, f64)> = tfidf_scores(&docs);
            scored.sort_by(|a, b| {
                b.1.total_cmp(&a.1)
                    .then_with(|| bow[b.0.as_str()].cmp(&bow[a.0.as_str()]))
                    .then_with(|| a.0.cmp(&b.0))
            });
            scored.truncate(retained_count(bow.len(), settings.top_fraction));
            split_terms[split].extend(scored.iter().map(|(t, _)| t.clone()));
            split_docs[split].extend(posts[range].iter());
            players.push(TermList {
                scope: TermScope::Preliminary {
                    player: player.to_string(),
                    split,
                },
                mode: ScoringMode::Tfidf,
                depth: scored.len(),
                entries: scored
                    .into_iter()
                    .map(|(term, score)| TermEntry { term, score })
                    .collect(),
            });
        }
    }

    let headlines = (0..settings.splits)
        .map(|split| {
            let kept = &split_terms[split];
            let docs: Vec<Vec<&str>> = split_docs[split]
                .iter()
                .map(|d| d.iter().map(String::as_str).filter(|t| kept.contains(*t)).collect())
                .collect();
            let terms = rank(centrality_scores(&docs), settings.headline_terms)
                .into_iter()
                .map(|e| e.term)
                .collect();
            SplitHeadline { split, terms }
        })
        .collect();
    Ok(PreliminaryReport {
        group: group.to_string(),
        players,
        headlines,
        warnings,
    })
}
