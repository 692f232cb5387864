//! Marker alignment: finds the room descriptions the dm pasted into every
//! group's stream and uses them as shared sequence boundaries.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::corpus::{tokenize, Corpus, Role};
use crate::error::{Error, Result};

/// One marker post per group, all carrying (nearly) the same text.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MarkerCluster {
    /// group id → post id.
    pub posts: BTreeMap<String, String>,
    /// Text of the marker in the lexicographically first group.
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MarkerAlignment {
    pub groups: Vec<String>,
    /// In timestamp order.
    pub clusters: Vec<MarkerCluster>,
    pub diagnostics: Vec<String>,
}

impl MarkerAlignment {
    pub fn len(&self) -> usize {
        self.clusters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clusters.is_empty()
    }

    /// The marker post ids of `group`, in order.
    pub fn group_markers(&self, group: &str) -> Vec<&str> {
        self.clusters
            .iter()
            .filter_map(|c| c.posts.get(group).map(String::as_str))
            .collect()
    }
}

pub fn jaccard(a: &BTreeSet<String>, b: &BTreeSet<String>) -> f64 {
    if a.is_empty() && b.is_empty() {
        return 1.0;
    }
    let inter = a.intersection(b).count();
    inter as f64 / (a.len() + b.len() - inter) as f64
}

struct Candidate {
    group: usize,
    /// Index of the post within its group.
    position: usize,
    post_id: String,
    text: String,
    tokens: BTreeSet<String>,
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

/// Detects marker clusters across all groups of `corpus`.
///
/// Candidates are dm posts of at least `min_tokens` tokens. Candidates from
/// different groups are linked when their token-set Jaccard similarity is at
/// least `threshold`; a connected component is a cluster when it holds exactly
/// one post from every group. Clusters that cross (appear in different orders
/// in different groups) are pruned to the longest order-consistent chain.
pub fn detect_markers(corpus: &Corpus, threshold: f64, min_tokens: usize) -> Result<MarkerAlignment> {
    let groups: Vec<String> = corpus.groups().into_iter().collect();
    if groups.is_empty() {
        return Err(Error::Alignment {
            message: "the corpus has no groups".into(),
            diagnostics: vec![],
        });
    }
    let mut candidates = Vec::new();
    for (g, group) in groups.iter().enumerate() {
        let before = candidates.len();
        for (position, post) in corpus.group_posts(group).enumerate() {
            if post.role != Role::Dm {
                continue;
            }
            let tokens = tokenize(&post.text);
            if tokens.len() < min_tokens {
                continue;
            }
            candidates.push(Candidate {
                group: g,
                position,
                post_id: post.post_id.clone(),
                text: post.text.clone(),
                tokens: tokens.into_iter().collect(),
            });
        }
        if candidates.len() == before {
            return Err(Error::Alignment {
                message: format!("group {group} has no dm post with at least {min_tokens} tokens"),
                diagnostics: vec![],
            });
        }
    }

    let mut parent: Vec<usize> = (0..candidates.len()).collect();
    for i in 0..candidates.len() {
        for j in i + 1..candidates.len() {
            if candidates[i].group == candidates[j].group {
                continue;
            }
            if jaccard(&candidates[i].tokens, &candidates[j].tokens) >= threshold {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
    }
    let mut components: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for i in 0..candidates.len() {
        let root = find(&mut parent, i);
        components.entry(root).or_default().push(i);
    }

    let mut diagnostics = Vec::new();
    // full clusters as per-group positions, plus member indices
    let mut full: Vec<(Vec<usize>, Vec<usize>)> = Vec::new();
    let mut partial: Vec<(usize, Vec<usize>)> = Vec::new();
    for members in components.into_values() {
        if members.len() < 2 {
            continue;
        }
        let mut per_group: Vec<Vec<usize>> = vec![Vec::new(); groups.len()];
        for &m in &members {
            per_group[candidates[m].group].push(m);
        }
        let covered = per_group.iter().filter(|v| !v.is_empty()).count();
        if per_group.iter().all(|v| v.len() == 1) {
            let ordered: Vec<usize> = per_group.iter().map(|v| v[0]).collect();
            let positions = ordered.iter().map(|&m| candidates[m].position).collect();
            full.push((positions, ordered));
        } else {
            partial.push((covered, members));
        }
    }

    let describe = |members: &[usize]| -> String {
        members
            .iter()
            .map(|&m| format!("{}:{}", groups[candidates[m].group], candidates[m].post_id))
            .collect::<Vec<_>>()
            .join(", ")
    };

    if full.is_empty() {
        partial.sort_by(|a, b| b.0.cmp(&a.0).then_with(|| a.1.cmp(&b.1)));
        let details = partial
            .iter()
            .take(5)
            .map(|(covered, m)| format!("{covered}/{} groups: {}", groups.len(), describe(m)))
            .collect();
        return Err(Error::Alignment {
            message: format!(
                "no marker cluster covers all {} groups at similarity {threshold}",
                groups.len()
            ),
            diagnostics: details,
        });
    }
    for (covered, members) in &partial {
        diagnostics.push(format!(
            "discarded marker cluster covering {covered}/{} groups: {}",
            groups.len(),
            describe(members)
        ));
    }

    // longest chain that increases in every group
    full.sort();
    let n = full.len();
    let precedes = |a: &[usize], b: &[usize]| a.iter().zip(b).all(|(x, y)| x < y);
    let mut best = vec![1usize; n];
    let mut prev: Vec<Option<usize>> = vec![None; n];
    for i in 0..n {
        for j in 0..i {
            if precedes(&full[j].0, &full[i].0) && best[j] + 1 > best[i] {
                best[i] = best[j] + 1;
                prev[i] = Some(j);
            }
        }
    }
    let mut end = 0;
    for i in 1..n {
        if best[i] > best[end] {
            end = i;
        }
    }
    let mut chain = vec![end];
    while let Some(p) = prev[*chain.last().expect("non-empty")] {
        chain.push(p);
    }
    chain.reverse();
    let kept: BTreeSet<usize> = chain.iter().copied().collect();
    for (i, (_, members)) in full.iter().enumerate() {
        if !kept.contains(&i) {
            diagnostics.push(format!("discarded out-of-order marker cluster: {}", describe(members)));
        }
    }

    let clusters = chain
        .into_iter()
        .map(|i| {
            let members = &full[i].1;
            MarkerCluster {
                posts: members
                    .iter()
                    .map(|&m| (groups[candidates[m].group].clone(), candidates[m].post_id.clone()))
                    .collect(),
                text: candidates[members[0]].text.clone(),
            }
        })
        .collect();
    Ok(MarkerAlignment {
        groups,
        clusters,
        diagnostics,
    })
}
