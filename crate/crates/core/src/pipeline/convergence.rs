//! How much the place labels depend on which groups are in the sample.
//!
//! For every subset size `k` the study compares the label triples computed
//! from each pair of distinct `k`-subsets of groups. The difference of a pair
//! is the number of label terms of subset A missing from subset B, summed
//! over sequences.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use super::stopwords::StopWordList;
use super::terms::rank_counts;
use crate::error::{Error, Result};

/// Per group, per sequence token counts.
pub type GroupCounts = BTreeMap<String, Vec<HashMap<String, usize>>>;

/// Largest group count for which all subset pairs are enumerated.
pub const MAX_STUDY_GROUPS: usize = 12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
}

impl Summary {
    /// Five-number summary using linear interpolation between order
    /// statistics. `None` for an empty sample.
    pub fn of(values: &[f64]) -> Option<Summary> {
        if values.is_empty() {
            return None;
        }
        let mut v = values.to_vec();
        v.sort_by(f64::total_cmp);
        let q = |p: f64| {
            let h = (v.len() - 1) as f64 * p;
            let lo = h.floor() as usize;
            let hi = h.ceil() as usize;
            v[lo] + (h - lo as f64) * (v[hi] - v[lo])
        };
        Some(Summary {
            min: v[0],
            q1: q(0.25),
            median: q(0.5),
            q3: q(0.75),
            max: v[v.len() - 1],
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubsetPair {
    pub a: Vec<String>,
    pub b: Vec<String>,
    pub diff: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceLevel {
    pub k: usize,
    pub summary: Summary,
    pub pairs: Vec<SubsetPair>,
    /// Differences of each `k`-subset against all groups together.
    pub versus_full: Summary,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub groups: Vec<String>,
    pub sequence_count: usize,
    pub label_depth: usize,
    pub levels: Vec<ConvergenceLevel>,
}

impl ConvergenceReport {
    /// Largest possible difference: every label term of every sequence.
    pub fn max_possible(&self) -> usize {
        self.sequence_count * self.label_depth
    }

    pub fn level(&self, k: usize) -> Option<&ConvergenceLevel> {
        self.levels.iter().find(|l| l.k == k)
    }
}

/// All `k`-subsets of `0..n` in lexicographic order.
pub fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if k > n {
        return out;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        out.push(idx.clone());
        // rightmost position that can still advance
        let mut i = k;
        while i > 0 && idx[i - 1] == i - 1 + n - k {
            i -= 1;
        }
        if i == 0 {
            return out;
        }
        idx[i - 1] += 1;
        for j in i..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Number of terms of `a` not in `b`, summed over sequences.
pub fn triple_difference(a: &[BTreeSet<String>], b: &[BTreeSet<String>]) -> usize {
    a.iter().zip(b).map(|(x, y)| x.difference(y).count()).sum()
}

fn labels(
    counts: &GroupCounts,
    groups: &[&String],
    sequence_count: usize,
    stopwords: &StopWordList,
    label_depth: usize,
) -> Vec<BTreeSet<String>> {
    let none = BTreeSet::new();
    (0..sequence_count)
        .map(|s| {
            let mut pooled: HashMap<String, usize> = HashMap::new();
            for g in groups {
                for (t, c) in &counts[*g][s] {
                    *pooled.entry(t.clone()).or_insert(0) += c;
                }
            }
            rank_counts(&pooled, stopwords, &none, label_depth).term_set()
        })
        .collect()
}

pub fn convergence_study(
    counts: &GroupCounts,
    stopwords: &StopWordList,
    label_depth: usize,
) -> Result<ConvergenceReport> {
    let g = counts.len();
    if g < 2 {
        return Err(Error::Study(format!(
            "the convergence study needs at least 2 groups, got {g}"
        )));
    }
    if g > MAX_STUDY_GROUPS {
        return Err(Error::Study(format!(
            "the convergence study enumerates all subset pairs and supports at most \
             {MAX_STUDY_GROUPS} groups, got {g}"
        )));
    }
    let names: Vec<&String> = counts.keys().collect();
    let sequence_count = counts.values().map(Vec::len).max().unwrap_or(0);
    if counts.values().any(|v| v.len() != sequence_count) {
        return Err(Error::Study("groups disagree on the number of sequences".into()));
    }
    let full = labels(counts, &names, sequence_count, stopwords, label_depth);
    let mut levels = Vec::new();
    for k in 1..g {
        let subsets = combinations(g, k);
        let subset_labels: Vec<Vec<BTreeSet<String>>> = subsets
            .iter()
            .map(|s| {
                let members: Vec<&String> = s.iter().map(|&i| names[i]).collect();
                labels(counts, &members, sequence_count, stopwords, label_depth)
            })
            .collect();
        let subset_names = |i: usize| -> Vec<String> { subsets[i].iter().map(|&j| names[j].clone()).collect() };
        let mut pairs = Vec::new();
        for i in 0..subsets.len() {
            for j in i + 1..subsets.len() {
                pairs.push(SubsetPair {
                    a: subset_names(i),
                    b: subset_names(j),
                    diff: triple_difference(&subset_labels[i], &subset_labels[j]),
                });
            }
        }
        let diffs: Vec<f64> = pairs.iter().map(|p| p.diff as f64).collect();
        let vs_full: Vec<f64> = subset_labels
            .iter()
            .map(|l| triple_difference(l, &full) as f64)
            .collect();
        // a single subset (k = g) has no pairs; k < g always has at least two
        levels.push(ConvergenceLevel {
            k,
            summary: Summary::of(&diffs).expect("k < g gives at least one pair"),
            pairs,
            versus_full: Summary::of(&vs_full).expect("at least one subset"),
        });
    }
    Ok(ConvergenceReport {
        groups: names.into_iter().cloned().collect(),
        sequence_count,
        label_depth,
        levels,
    })
}
