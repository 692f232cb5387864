//! Places (terms shared by every group in a sequence) and spaces (what each
//! group talked about beyond them).

use std::collections::BTreeMap;

use super::stopwords::StopWordList;
use super::terms::{score_terms, score_terms_excluding, ScoringMode, TermList, TermScope};
use crate::error::{Error, Result};

/// Token lists of the counted posts of one sequence, keyed by group.
pub type GroupDocs = BTreeMap<String, Vec<Vec<String>>>;

/// Scores the pooled posts of every group in `sequence`.
pub fn extract_places(
    sequence: usize,
    docs: &GroupDocs,
    mode: ScoringMode,
    stopwords: &StopWordList,
    depth: usize,
) -> Result<TermList> {
    let pooled: Vec<&Vec<String>> = docs.values().flatten().collect();
    if pooled.iter().all(|d| d.is_empty()) {
        return Err(Error::Pipeline(format!(
            "sequence {sequence} has no counted posts in any group"
        )));
    }
    let pooled: Vec<&[String]> = pooled.into_iter().map(Vec::as_slice).collect();
    Ok(score_terms(&pooled, mode, stopwords, depth).with_scope(TermScope::Places { sequence }))
}

/// Top `label_depth` terms of one group's posts in `sequence` after removing
/// every term on the place list.
pub fn extract_spaces(
    group: &str,
    sequence: usize,
    docs: &[Vec<String>],
    places: &TermList,
    mode: ScoringMode,
    stopwords: &StopWordList,
    label_depth: usize,
) -> TermList {
    score_terms_excluding(docs, mode, stopwords, &places.term_set(), label_depth).with_scope(TermScope::Spaces {
        group: group.to_string(),
        sequence,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::tokenize;

    fn docs(groups: &[(&str, &[&str])]) -> GroupDocs {
        groups
            .iter()
            .map(|(g, posts)| (g.to_string(), posts.iter().map(|p| tokenize(p)).collect()))
            .collect()
    }

    #[test]
    fn single_post_places() {
        let d = docs(&[("g", &["goblin goblin orc"])]);
        let p = extract_places(0, &d, ScoringMode::Bow, &StopWordList::empty(), 20).unwrap();
        assert_eq!(p.top(2), vec!["goblin", "orc"]);
        assert_eq!(p.scope, TermScope::Places { sequence: 0 });
    }

    #[test]
    fn places_pool_groups() {
        let d = docs(&[("a", &["troll troll rope"]), ("b", &["rope rope oil"])]);
        let p = extract_places(1, &d, ScoringMode::Bow, &StopWordList::empty(), 2).unwrap();
        assert_eq!(p.terms(), vec!["rope", "troll"]);
    }

    #[test]
    fn empty_sequence_is_named() {
        let d = docs(&[("a", &[]), ("b", &[""])]);
        let err = extract_places(3, &d, ScoringMode::Bow, &StopWordList::empty(), 5).unwrap_err();
        assert!(err.to_string().contains("sequence 3"));
    }

    #[test]
    fn spaces_exclude_places() {
        let d = docs(&[("a", &["troll troll rope gate gate open"]), ("b", &["troll rope"])]);
        let sw = StopWordList::empty();
        let p = extract_places(0, &d, ScoringMode::Bow, &sw, 2).unwrap();
        assert_eq!(p.terms(), vec!["troll", "gate"]);
        let s = extract_spaces("a", 0, &d["a"], &p, ScoringMode::Bow, &sw, 3);
        assert_eq!(s.terms(), vec!["open", "rope"]);
        let s = extract_spaces(
            "b",
            0,
            &docs(&[("b", &["troll gate"])])["b"],
            &p,
            ScoringMode::Bow,
            &sw,
            3,
        );
        assert!(s.is_empty());
    }
}
