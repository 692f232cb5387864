//! The bag-of-words analysis: stop words, marker alignment, sequence slices,
//! places and spaces, snippets, and the convergence study.

pub mod convergence;
pub mod markers;
pub mod places;
pub mod preliminary;
pub mod slices;
pub mod stopwords;
pub mod terms;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::path::Path;

use serde::{Deserialize, Serialize};

pub use convergence::{convergence_study, ConvergenceReport, GroupCounts};
pub use markers::{detect_markers, MarkerAlignment, MarkerCluster};
pub use places::{extract_places, extract_spaces, GroupDocs};
pub use preliminary::{preliminary_even_split, PreliminaryReport, PreliminarySettings};
pub use slices::{even_buckets, slice_sequences, SequenceSlice, Slicing};
pub use stopwords::{builtin_base, induce_stopwords, InductionSettings, StopWordList};
pub use terms::{score_terms, ScoringMode, TermEntry, TermList, TermScope};

use crate::config::AnalysisConfig;
use crate::corpus::{tokenize, Corpus, Post, Role};
use crate::error::{Error, Result};
use crate::mapgen::{build_map, find_snippet, BeliefMap, Snippet, SNIPPET_MAX_CHARS};

/// Everything one analysis run produces.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisOutput {
    pub groups: Vec<String>,
    pub stopwords: StopWordList,
    pub alignment: MarkerAlignment,
    pub slicing: Slicing,
    /// One list per sequence.
    pub places: Vec<TermList>,
    /// Per group, one list per sequence.
    pub spaces: BTreeMap<String, Vec<TermList>>,
    pub map: BeliefMap,
    pub convergence: ConvergenceReport,
    pub diagnostics: Vec<String>,
}

impl AnalysisOutput {
    pub fn sequence_count(&self) -> usize {
        self.places.len()
    }
}

/// Loads the base stop-word list named by the configuration.
pub fn base_stopwords(config: &AnalysisConfig, base_dir: Option<&Path>) -> Result<BTreeSet<String>> {
    match config.base_stopwords_path(base_dir) {
        None => Ok(builtin_base()),
        Some(path) => stopwords::load_base(path),
    }
}

fn counted(post: &Post, include_dm: bool) -> bool {
    include_dm || post.role != Role::Dm
}

/// The posts of one (group, sequence) that enter term statistics, in corpus
/// order.
pub fn counted_sequence_posts<'a>(
    corpus: &'a Corpus,
    slicing: &Slicing,
    group: &str,
    sequence: usize,
    include_dm: bool,
) -> Vec<&'a Post> {
    let ids: BTreeSet<&str> = slicing.sequence_posts(group, sequence).into_iter().collect();
    corpus
        .posts()
        .iter()
        .filter(|p| p.group_id == group && ids.contains(p.post_id.as_str()) && counted(p, include_dm))
        .collect()
}

/// Restricts the corpus to `groups.include` (all groups when empty).
pub fn select_groups(corpus: &Corpus, config: &AnalysisConfig) -> Result<Corpus> {
    if config.groups.include.is_empty() {
        return Ok(corpus.clone());
    }
    let present = corpus.groups();
    let wanted: BTreeSet<String> = config.groups.include.iter().cloned().collect();
    if let Some(missing) = wanted.iter().find(|g| !present.contains(*g)) {
        return Err(Error::Pipeline(format!("group {missing} is not in the corpus")));
    }
    Ok(corpus.restrict_groups(&wanted))
}

/// Runs the whole analysis. `base_dir` resolves a relative stop-word path.
pub fn analyze(corpus: &Corpus, config: &AnalysisConfig, base_dir: Option<&Path>) -> Result<AnalysisOutput> {
    config.validate()?;
    let corpus = select_groups(corpus, config)?;
    if corpus.is_empty() {
        return Err(Error::Pipeline("the corpus has no posts".into()));
    }
    let without_dm = corpus.groups_without_dm();
    if !without_dm.is_empty() {
        return Err(Error::Alignment {
            message: format!("groups without a dm post: {}", without_dm.join(", ")),
            diagnostics: vec![],
        });
    }
    let include_dm = config.counts.include_dm;
    let stopwords = induce_stopwords(
        &corpus,
        base_stopwords(config, base_dir)?,
        &config.stopwords.extra,
        &InductionSettings {
            ratio_threshold: config.stopwords.ratio_threshold,
            min_count: config.stopwords.min_count,
            include_dm,
        },
    )?;
    let alignment = detect_markers(&corpus, config.markers.similarity_threshold, config.markers.min_tokens)?;
    let slicing = slice_sequences(&corpus, &alignment, config.slices.buckets_per_sequence)?;
    let mut diagnostics = alignment.diagnostics.clone();
    diagnostics.extend(slicing.diagnostics.iter().cloned());

    let groups: Vec<String> = alignment.groups.clone();
    let seqs = slicing.sequence_count;
    let mut posts: BTreeMap<(&str, usize), Vec<&Post>> = BTreeMap::new();
    for g in &groups {
        for s in 0..seqs {
            posts.insert(
                (g.as_str(), s),
                counted_sequence_posts(&corpus, &slicing, g, s, include_dm),
            );
        }
    }
    let docs_of =
        |g: &str, s: usize| -> Vec<Vec<String>> { posts[&(g, s)].iter().map(|p| tokenize(&p.text)).collect() };

    let mode = config.terms.mode;
    let depth = config.terms.depth;
    let label_depth = config.terms.label_depth;
    let mut places = Vec::with_capacity(seqs);
    let mut spaces: BTreeMap<String, Vec<TermList>> = BTreeMap::new();
    let mut snippets: BTreeMap<(String, usize), Snippet> = BTreeMap::new();
    let mut counts: GroupCounts = BTreeMap::new();
    for s in 0..seqs {
        let docs: GroupDocs = groups.iter().map(|g| (g.clone(), docs_of(g, s))).collect();
        let place = extract_places(s, &docs, mode, &stopwords, depth)?;
        for g in &groups {
            let space = extract_spaces(g, s, &docs[g], &place, mode, &stopwords, label_depth);
            let terms = if space.is_empty() {
                place.top(label_depth)
            } else {
                space.top(label_depth)
            };
            if let Some(snippet) = find_snippet(posts[&(g.as_str(), s)].iter().copied(), &terms, SNIPPET_MAX_CHARS) {
                snippets.insert((g.clone(), s), snippet);
            }
            spaces.entry(g.clone()).or_default().push(space);
            let mut bow: HashMap<String, usize> = HashMap::new();
            for t in docs[g].iter().flatten() {
                *bow.entry(t.clone()).or_insert(0) += 1;
            }
            counts.entry(g.clone()).or_default().push(bow);
        }
        places.push(place);
    }

    let convergence = match convergence_study(&counts, &stopwords, label_depth) {
        Ok(r) => r,
        Err(Error::Study(msg)) => {
            diagnostics.push(format!("convergence study skipped: {msg}"));
            ConvergenceReport::default()
        }
        Err(e) => return Err(e),
    };
    let map = build_map(&places, &spaces, &snippets, label_depth)?;
    Ok(AnalysisOutput {
        groups,
        stopwords,
        alignment,
        slicing,
        places,
        spaces,
        map,
        convergence,
        diagnostics,
    })
}
