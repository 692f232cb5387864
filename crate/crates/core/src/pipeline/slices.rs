//! Cuts each group's stream into sequences at the marker posts and splits
//! each sequence into buckets.

use std::ops::Range;

use serde::{Deserialize, Serialize};

use super::markers::MarkerAlignment;
use crate::corpus::Corpus;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SequenceSlice {
    pub group_id: String,
    pub sequence: usize,
    pub bucket: usize,
    pub post_ids: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Slicing {
    pub sequence_count: usize,
    /// Ordered by group, sequence, bucket.
    pub slices: Vec<SequenceSlice>,
    pub diagnostics: Vec<String>,
}

impl Slicing {
    /// Post ids of (`group`, `sequence`) across all its buckets, in order.
    pub fn sequence_posts(&self, group: &str, sequence: usize) -> Vec<&str> {
        self.slices
            .iter()
            .filter(|s| s.group_id == group && s.sequence == sequence)
            .flat_map(|s| s.post_ids.iter().map(String::as_str))
            .collect()
    }
}

/// Splits `0..len` into `buckets` contiguous ranges whose sizes differ by at
/// most one, the earlier ranges taking the remainder.
pub fn even_buckets(len: usize, buckets: usize) -> Vec<Range<usize>> {
    if buckets == 0 {
        return Vec::new();
    }
    let (base, extra) = (len / buckets, len % buckets);
    let mut start = 0;
    (0..buckets)
        .map(|b| {
            let size = base + usize::from(b < extra);
            let r = start..start + size;
            start += size;
            r
        })
        .collect()
}

/// Sequence `s` of a group is the run of posts after its `s`-th marker and
/// before the next one; the last sequence runs to the end of the stream.
/// Posts before the first marker belong to no sequence.
pub fn slice_sequences(corpus: &Corpus, alignment: &MarkerAlignment, buckets_per_sequence: usize) -> Result<Slicing> {
    if buckets_per_sequence < 1 {
        return Err(Error::InvalidConfig(vec![crate::error::FieldError::new(
            "slices.buckets_per_sequence",
            "must be at least 1",
        )]));
    }
    let sequence_count = alignment.len();
    let mut slices = Vec::new();
    let mut diagnostics = Vec::new();
    for group in &alignment.groups {
        let posts: Vec<&str> = corpus.group_posts(group).map(|p| p.post_id.as_str()).collect();
        let mut bounds = Vec::with_capacity(sequence_count + 1);
        for marker in alignment.group_markers(group) {
            let at = posts
                .iter()
                .position(|p| *p == marker)
                .ok_or_else(|| Error::Alignment {
                    message: format!("marker {marker} is not a post of group {group}"),
                    diagnostics: vec![],
                })?;
            bounds.push(at);
        }
        if bounds.len() != sequence_count {
            return Err(Error::Alignment {
                message: format!("group {group} is missing from the alignment"),
                diagnostics: vec![],
            });
        }
        bounds.push(posts.len());
        for s in 0..sequence_count {
            let run = &posts[bounds[s] + 1..bounds[s + 1]];
            if run.is_empty() {
                diagnostics.push(format!("group {group} sequence {s} is empty"));
            }
            for (b, range) in even_buckets(run.len(), buckets_per_sequence).into_iter().enumerate() {
                slices.push(SequenceSlice {
                    group_id: group.clone(),
                    sequence: s,
                    bucket: b,
                    post_ids: run[range].iter().map(|p| p.to_string()).collect(),
                });
            }
        }
    }
    Ok(Slicing {
        sequence_count,
        slices,
        diagnostics,
    })
}
