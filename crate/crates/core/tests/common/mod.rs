//! Shared helpers: an in-process HTTP client and brute-force reference
//! implementations of the bag-of-words pipeline.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use beliefmap::config::AnalysisConfig;
use beliefmap::corpus::synth::{generate_synthetic_corpus, SyntheticSpec};
use beliefmap::corpus::{Corpus, Post, Role};
use beliefmap::pipeline::AnalysisOutput;
use http_body_util::BodyExt;
use tower::ServiceExt;

pub struct Reply {
    pub status: StatusCode,
    pub content_type: Option<String>,
    pub body: Vec<u8>,
}

impl Reply {
    pub fn json(&self) -> serde_json::Value {
        serde_json::from_slice(&self.body).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&self.body)))
    }
}

pub async fn call(
    router: &Router,
    method: &str,
    uri: &str,
    content_type: Option<&str>,
    body: impl Into<Body>,
) -> Reply {
    let mut req = Request::builder().method(method).uri(uri);
    if let Some(ct) = content_type {
        req = req.header("content-type", ct);
    }
    let resp = router.clone().oneshot(req.body(body.into()).unwrap()).await.unwrap();
    let status = resp.status();
    let content_type = resp
        .headers()
        .get("content-type")
        .map(|v| v.to_str().unwrap().to_string());
    let body = resp.into_body().collect().await.unwrap().to_bytes().to_vec();
    Reply {
        status,
        content_type,
        body,
    }
}

pub fn spec_subset(groups: usize, rooms: usize, posts_per_room: usize) -> SyntheticSpec {
    let mut spec = SyntheticSpec::four_rooms().with_posts_per_room(posts_per_room);
    spec.rooms.truncate(rooms);
    spec.groups.truncate(groups);
    for g in &mut spec.groups {
        g.spaces.truncate(rooms);
    }
    spec
}

/// Synthetic corpora of at most 1,000 posts: varied group and room counts,
/// post lengths long enough to force truncated snippets, and several
/// generator seeds.
pub fn small_corpora() -> Vec<(String, Corpus)> {
    let mut out = Vec::new();
    let shapes = [(5, 4, 8), (5, 4, 30), (3, 2, 20), (2, 3, 12), (4, 4, 4), (5, 1, 40)];
    for (g, r, n) in shapes {
        for seed in 0..4u64 {
            let spec = spec_subset(g, r, n);
            let corpus = generate_synthetic_corpus(&spec, seed).unwrap();
            assert!(corpus.len() <= 1000, "{} posts", corpus.len());
            out.push((format!("{g} groups {r} rooms {n} posts/room seed {seed}"), corpus));
        }
    }
    for seed in 0..4u64 {
        let mut spec = spec_subset(4, 3, 15);
        spec.min_post_tokens = 28;
        spec.max_post_tokens = 45;
        let corpus = generate_synthetic_corpus(&spec, seed).unwrap();
        assert!(corpus.len() <= 1000);
        out.push((format!("long posts seed {seed}"), corpus));
    }
    out
}

/// Configurations the oracle comparison runs under.
pub fn oracle_configs() -> Vec<AnalysisConfig> {
    let base = AnalysisConfig::default();
    let mut with_dm = base.clone();
    with_dm.counts.include_dm = true;
    let mut shallow = base.clone();
    shallow.terms.depth = 4;
    shallow.terms.label_depth = 2;
    shallow.slices.buckets_per_sequence = 3;
    vec![base, with_dm, shallow]
}

pub mod oracle {
    use super::*;

    /// Lower-cases, splits on anything other than ASCII letters, digits and
    /// apostrophes, and drops one-character pieces.
    pub fn tokens(text: &str) -> Vec<String> {
        let lower: String = text.chars().flat_map(char::to_lowercase).collect();
        lower
            .split(|c: char| !(c.is_ascii_lowercase() || c.is_ascii_digit() || c == '\''))
            .filter(|t| t.len() >= 2)
            .map(str::to_string)
            .collect()
    }

    fn similarity(a: &BTreeSet<String>, b: &BTreeSet<String>) -> f64 {
        let union = a.union(b).count();
        if union == 0 {
            return 1.0;
        }
        a.intersection(b).count() as f64 / union as f64
    }

    /// Marker clusters as group → post id maps, in stream order.
    pub fn markers(corpus: &Corpus, threshold: f64, min_tokens: usize) -> Vec<BTreeMap<String, String>> {
        let groups: Vec<String> = corpus.groups().into_iter().collect();
        // (group, position in group, post id, token set)
        let mut cands: Vec<(String, usize, String, BTreeSet<String>)> = Vec::new();
        for g in &groups {
            let stream: Vec<&Post> = corpus.posts().iter().filter(|p| &p.group_id == g).collect();
            for (i, p) in stream.iter().enumerate() {
                let t = tokens(&p.text);
                if p.role == Role::Dm && t.len() >= min_tokens {
                    cands.push((g.clone(), i, p.post_id.clone(), t.into_iter().collect()));
                }
            }
        }
        let n = cands.len();
        let linked = |i: usize, j: usize| cands[i].0 != cands[j].0 && similarity(&cands[i].3, &cands[j].3) >= threshold;
        let mut seen = vec![false; n];
        let mut full: Vec<Vec<usize>> = Vec::new();
        for start in 0..n {
            if seen[start] {
                continue;
            }
            let mut comp = vec![start];
            seen[start] = true;
            let mut k = 0;
            while k < comp.len() {
                let i = comp[k];
                let fresh: Vec<usize> = (0..n).filter(|&j| !seen[j] && linked(i, j)).collect();
                for j in fresh {
                    seen[j] = true;
                    comp.push(j);
                }
                k += 1;
            }
            let per_group: BTreeSet<&String> = comp.iter().map(|&i| &cands[i].0).collect();
            if comp.len() == groups.len() && per_group.len() == groups.len() {
                comp.sort_by_key(|&i| &cands[i].0);
                full.push(comp);
            }
        }
        assert!(full.len() <= 16, "too many clusters for exhaustive ordering");
        let positions: Vec<Vec<usize>> = full.iter().map(|c| c.iter().map(|&i| cands[i].1).collect()).collect();
        let before = |a: usize, b: usize| positions[a].iter().zip(&positions[b]).all(|(x, y)| x < y);
        let mut best: Vec<usize> = Vec::new();
        for mask in 0u32..(1 << full.len()) {
            let mut chosen: Vec<usize> = (0..full.len()).filter(|i| mask & (1 << i) != 0).collect();
            chosen.sort_by_key(|&i| positions[i][0]);
            let ordered = chosen.windows(2).all(|w| before(w[0], w[1]));
            if ordered && chosen.len() > best.len() {
                best = chosen;
            }
        }
        best.iter()
            .map(|&c| {
                full[c]
                    .iter()
                    .map(|&i| (cands[i].0.clone(), cands[i].2.clone()))
                    .collect()
            })
            .collect()
    }

    /// Counted posts of each (group, sequence).
    pub fn sequences<'a>(
        corpus: &'a Corpus,
        clusters: &[BTreeMap<String, String>],
        include_dm: bool,
    ) -> BTreeMap<(String, usize), Vec<&'a Post>> {
        let mut out = BTreeMap::new();
        for g in corpus.groups() {
            let stream: Vec<&Post> = corpus.posts().iter().filter(|p| p.group_id == g).collect();
            let mut at: Vec<usize> = clusters
                .iter()
                .map(|c| stream.iter().position(|p| p.post_id == c[&g]).unwrap())
                .collect();
            at.push(stream.len());
            for s in 0..clusters.len() {
                let posts = stream[at[s] + 1..at[s + 1]]
                    .iter()
                    .copied()
                    .filter(|p| include_dm || p.role != Role::Dm)
                    .collect();
                out.insert((g.clone(), s), posts);
            }
        }
        out
    }

    /// Ranked (term, count) pairs: counts descending, then term ascending.
    pub fn bow<'a>(
        posts: impl IntoIterator<Item = &'a Post>,
        skip: impl Fn(&str) -> bool,
        depth: usize,
    ) -> Vec<(String, f64)> {
        let mut counts: BTreeMap<String, usize> = BTreeMap::new();
        for p in posts {
            for t in tokens(&p.text) {
                if !skip(&t) {
                    *counts.entry(t).or_default() += 1;
                }
            }
        }
        let mut ranked: Vec<(String, usize)> = counts.into_iter().collect();
        ranked.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
        ranked.into_iter().take(depth).map(|(t, c)| (t, c as f64)).collect()
    }

    /// (post id, author, kept text, truncated) of the shortest post holding
    /// every term.
    pub fn snippet(posts: &[&Post], terms: &[String], max_chars: usize) -> Option<(String, String, String, bool)> {
        if terms.is_empty() {
            return None;
        }
        let mut best: Option<&Post> = None;
        for p in posts {
            let t: BTreeSet<String> = tokens(&p.text).into_iter().collect();
            if !terms.iter().all(|x| t.contains(x)) {
                continue;
            }
            let shorter = match best {
                None => true,
                Some(b) => {
                    let (pl, bl) = (p.text.chars().count(), b.text.chars().count());
                    pl < bl || (pl == bl && p.timestamp < b.timestamp)
                }
            };
            if shorter {
                best = Some(p);
            }
        }
        best.map(|p| {
            let kept: String = p.text.chars().take(max_chars).collect();
            let truncated = p.text.chars().count() > max_chars;
            (p.post_id.clone(), p.player_id.clone(), kept, truncated)
        })
    }

    /// Every discrepancy between `out` and the brute-force pipeline.
    pub fn discrepancies(corpus: &Corpus, config: &AnalysisConfig, out: &AnalysisOutput) -> Vec<String> {
        let mut errs = Vec::new();
        let clusters = markers(corpus, config.markers.similarity_threshold, config.markers.min_tokens);
        let got: Vec<BTreeMap<String, String>> = out.alignment.clusters.iter().map(|c| c.posts.clone()).collect();
        if got != clusters {
            errs.push(format!("markers: got {got:?}, expected {clusters:?}"));
            return errs;
        }
        let seqs = sequences(corpus, &clusters, config.counts.include_dm);
        let sw = &out.stopwords;
        let (depth, label_depth) = (config.terms.depth, config.terms.label_depth);
        for s in 0..clusters.len() {
            let pooled = seqs
                .iter()
                .filter(|((_, q), _)| *q == s)
                .flat_map(|(_, v)| v.iter().copied());
            let place = bow(pooled, |t| sw.contains(t), depth);
            let got: Vec<(String, f64)> = out.places[s]
                .entries
                .iter()
                .map(|e| (e.term.clone(), e.score))
                .collect();
            if got != place {
                errs.push(format!("places {s}: got {got:?}, expected {place:?}"));
            }
            let place_terms: BTreeSet<&String> = place.iter().map(|(t, _)| t).collect();
            for g in &out.groups {
                let posts = &seqs[&(g.clone(), s)];
                let space = bow(
                    posts.iter().copied(),
                    |t| sw.contains(t) || place_terms.contains(&t.to_string()),
                    label_depth,
                );
                let got: Vec<(String, f64)> = out.spaces[g][s]
                    .entries
                    .iter()
                    .map(|e| (e.term.clone(), e.score))
                    .collect();
                if got != space {
                    errs.push(format!("spaces {g} {s}: got {got:?}, expected {space:?}"));
                }
                let source = if space.is_empty() { &place } else { &space };
                let terms: Vec<String> = source.iter().take(label_depth).map(|(t, _)| t.clone()).collect();
                let expected = snippet(posts, &terms, 160);
                let got = out.map.places[s].spaces[g]
                    .snippet
                    .as_ref()
                    .map(|x| (x.post_id.clone(), x.author.clone(), x.text.clone(), x.truncated));
                if got != expected {
                    errs.push(format!("snippet {g} {s}: got {got:?}, expected {expected:?}"));
                }
            }
        }
        errs
    }
}
