//! Belief maps (a chain of places with each group's spaces attached),
//! snippet selection, and environment reconstruction from simulator posts.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::corpus::{tokenize, Post};
use crate::error::{Error, Result};
use crate::pipeline::{TermList, TermScope};
use crate::sim::{AgentPost, Cell, Environment};

pub const SNIPPET_MAX_CHARS: usize = 160;
pub const ELLIPSIS: char = '…';

/// The shortest post of a (group, sequence) that mentions every label term.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Snippet {
    pub post_id: String,
    pub author: String,
    pub terms: Vec<String>,
    /// At most [`SNIPPET_MAX_CHARS`] characters of the post.
    pub text: String,
    pub truncated: bool,
}

impl Snippet {
    /// The text with an ellipsis when it was cut.
    pub fn display(&self) -> String {
        if self.truncated {
            format!("{}{ELLIPSIS}", self.text)
        } else {
            self.text.clone()
        }
    }
}

/// Cuts `text` to `max_chars` characters. Returns the kept text and whether
/// anything was dropped.
pub fn truncate_chars(text: &str, max_chars: usize) -> (String, bool) {
    match text.char_indices().nth(max_chars) {
        Some((at, _)) => (text[..at].to_string(), true),
        None => (text.to_string(), false),
    }
}

/// The posts whose token sets hold every term, shortest first by character
/// count; ties go to the earlier timestamp, then the earlier post.
pub fn posts_containing<'a>(posts: impl IntoIterator<Item = &'a Post>, terms: &[String]) -> Vec<&'a Post> {
    let mut hits: Vec<(usize, &Post)> = posts
        .into_iter()
        .filter(|post| {
            let tokens: BTreeSet<String> = tokenize(&post.text).into_iter().collect();
            terms.iter().all(|t| tokens.contains(t))
        })
        .map(|post| (post.text.chars().count(), post))
        .collect();
    hits.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.timestamp.cmp(&b.1.timestamp)));
    hits.into_iter().map(|(_, p)| p).collect()
}

/// The first of [`posts_containing`], cut to `max_chars`.
pub fn find_snippet<'a>(
    posts: impl IntoIterator<Item = &'a Post>,
    terms: &[String],
    max_chars: usize,
) -> Option<Snippet> {
    if terms.is_empty() {
        return None;
    }
    posts_containing(posts, terms).first().map(|post| {
        let (text, truncated) = truncate_chars(&post.text, max_chars);
        Snippet {
            post_id: post.post_id.clone(),
            author: post.player_id.clone(),
            terms: terms.to_vec(),
            text,
            truncated,
        }
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupSpace {
    pub terms: Vec<String>,
    pub snippet: Option<Snippet>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlaceNode {
    pub sequence: usize,
    pub label: String,
    pub terms: TermList,
    pub spaces: BTreeMap<String, GroupSpace>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct BeliefMap {
    pub places: Vec<PlaceNode>,
}

impl BeliefMap {
    /// Directed chain edges as (from, to) sequence indices.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        self.places.windows(2).map(|w| (w[0].sequence, w[1].sequence)).collect()
    }

    pub fn labels(&self) -> Vec<&str> {
        self.places.iter().map(|p| p.label.as_str()).collect()
    }
}

/// Assembles the map. `places[s]` is the place list of sequence `s`,
/// `spaces[group][s]` that group's space list, `snippets` keyed by
/// (group, sequence).
pub fn build_map(
    places: &[TermList],
    spaces: &BTreeMap<String, Vec<TermList>>,
    snippets: &BTreeMap<(String, usize), Snippet>,
    label_depth: usize,
) -> Result<BeliefMap> {
    if places.is_empty() {
        return Err(Error::Mapgen("a map needs at least one sequence".into()));
    }
    let mut nodes = Vec::with_capacity(places.len());
    for (s, place) in places.iter().enumerate() {
        match &place.scope {
            TermScope::Places { sequence } if *sequence == s => {}
            other => {
                return Err(Error::Mapgen(format!(
                    "missing places for sequence {s} (found {other:?})"
                )))
            }
        }
        let mut group_spaces = BTreeMap::new();
        for (group, lists) in spaces {
            let list = lists
                .get(s)
                .ok_or_else(|| Error::Mapgen(format!("group {group} has no spaces for sequence {s}")))?;
            let terms = list.top(label_depth);
            if let Some(t) = terms.iter().find(|t| place.contains(t)) {
                return Err(Error::Mapgen(format!(
                    "space term {t} of group {group} is a place term of sequence {s}"
                )));
            }
            group_spaces.insert(
                group.clone(),
                GroupSpace {
                    terms,
                    snippet: snippets.get(&(group.clone(), s)).cloned(),
                },
            );
        }
        nodes.push(PlaceNode {
            sequence: s,
            label: place.label(label_depth),
            terms: place.clone(),
            spaces: group_spaces,
        });
    }
    Ok(BeliefMap { places: nodes })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExportFormat {
    Dot,
    /// Lossless JSON.
    Structured,
}

impl ExportFormat {
    pub fn extension(self) -> &'static str {
        match self {
            ExportFormat::Dot => "dot",
            ExportFormat::Structured => "json",
        }
    }

    pub fn content_type(self) -> &'static str {
        match self {
            ExportFormat::Dot => "text/vnd.graphviz",
            ExportFormat::Structured => "application/json",
        }
    }

    /// Chooses the format from a file extension.
    pub fn from_path(path: &Path) -> Result<Self> {
        match path.extension().and_then(|e| e.to_str()) {
            Some("dot") | Some("gv") => Ok(ExportFormat::Dot),
            Some("json") | Some("structured") => Ok(ExportFormat::Structured),
            _ => Err(Error::Usage(format!(
                "cannot infer a map format from {}; use .dot, .json or .structured, or pass --format",
                path.display()
            ))),
        }
    }
}

impl FromStr for ExportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dot" => Ok(ExportFormat::Dot),
            "structured" | "json" => Ok(ExportFormat::Structured),
            other => Err(Error::Usage(format!(
                "unknown map format {other:?}; expected dot or structured"
            ))),
        }
    }
}

fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => {}
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

/// Graphviz text: places are boxes chained left to right, each group's
/// space terms are ellipses hanging off their place, and a snippet becomes
/// the tooltip of its group's space nodes.
pub fn map_to_dot(map: &BeliefMap) -> String {
    let mut out = String::from("digraph belief_map {\n  rankdir=LR;\n");
    for p in &map.places {
        let _ = writeln!(
            out,
            "  {} [shape=box, label={}];",
            quote(&format!("place_{}", p.sequence)),
            quote(&p.label)
        );
    }
    for (a, b) in map.edges() {
        let _ = writeln!(
            out,
            "  {} -> {};",
            quote(&format!("place_{a}")),
            quote(&format!("place_{b}"))
        );
    }
    for p in &map.places {
        for (group, space) in &p.spaces {
            for (k, term) in space.terms.iter().enumerate() {
                let id = quote(&format!("space_{}_{group}_{k}", p.sequence));
                let mut attrs = format!("shape=ellipse, label={}, group={}", quote(term), quote(group));
                if let Some(snippet) = &space.snippet {
                    let _ = write!(
                        attrs,
                        ", tooltip={}",
                        quote(&format!("{}: {}", snippet.author, snippet.display()))
                    );
                }
                let _ = writeln!(out, "  {id} [{attrs}];");
                let _ = writeln!(out, "  {} -> {id} [dir=none];", quote(&format!("place_{}", p.sequence)));
            }
        }
    }
    out.push_str("}\n");
    out
}

pub fn export_map(map: &BeliefMap, format: ExportFormat) -> Vec<u8> {
    match format {
        ExportFormat::Dot => map_to_dot(map).into_bytes(),
        ExportFormat::Structured => {
            let mut s = serde_json::to_string_pretty(map).expect("maps always serialize");
            s.push('\n');
            s.into_bytes()
        }
    }
}

pub fn import_map(bytes: &[u8]) -> Result<BeliefMap> {
    serde_json::from_slice(bytes).map_err(|e| Error::Serialization(e.to_string()))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeVisits {
    pub statement: String,
    pub visits: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeCount {
    pub a: String,
    pub b: String,
    pub count: usize,
}

/// Statement graph rebuilt from what agents posted.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReconstructedGraph {
    /// Sorted by statement.
    pub nodes: Vec<NodeVisits>,
    /// Undirected, `a < b`, sorted.
    pub edges: Vec<EdgeCount>,
}

impl ReconstructedGraph {
    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// Every post visits its statement's node; every change of statement
/// between an agent's consecutive posts traverses an edge.
pub fn reconstruct_environment(posts: &[AgentPost]) -> ReconstructedGraph {
    let mut ordered: Vec<&AgentPost> = posts.iter().collect();
    ordered.sort_by_key(|p| (p.agent_id, p.tick));
    let mut nodes: BTreeMap<&str, usize> = BTreeMap::new();
    let mut edges: BTreeMap<(&str, &str), usize> = BTreeMap::new();
    for (i, post) in ordered.iter().enumerate() {
        *nodes.entry(&post.statement).or_insert(0) += 1;
        if i == 0 {
            continue;
        }
        let prev = ordered[i - 1];
        if prev.agent_id == post.agent_id && prev.statement != post.statement {
            let (a, b) = if prev.statement < post.statement {
                (prev.statement.as_str(), post.statement.as_str())
            } else {
                (post.statement.as_str(), prev.statement.as_str())
            };
            *edges.entry((a, b)).or_insert(0) += 1;
        }
    }
    ReconstructedGraph {
        nodes: nodes
            .into_iter()
            .map(|(s, v)| NodeVisits {
                statement: s.to_string(),
                visits: v,
            })
            .collect(),
        edges: edges
            .into_iter()
            .map(|((a, b), count)| EdgeCount {
                a: a.to_string(),
                b: b.to_string(),
                count,
            })
            .collect(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GraphComparison {
    pub node_jaccard: f64,
    pub edge_jaccard: f64,
}

fn axis_neighbors(a: &[u32], b: &[u32]) -> bool {
    let mut diff = 0;
    for (x, y) in a.iter().zip(b) {
        match x.abs_diff(*y) {
            0 => {}
            1 => diff += 1,
            _ => return false,
        }
    }
    diff == 1
}

fn ratio(inter: u128, union: u128) -> f64 {
    if union == 0 {
        0.0
    } else {
        inter as f64 / union as f64
    }
}

/// Node Jaccard against every cell of `env`; edge Jaccard against the
/// axis-neighbor pairs among visited cells.
pub fn compare_graphs(rec: &ReconstructedGraph, env: &Environment) -> GraphComparison {
    if rec.is_empty() {
        return GraphComparison {
            node_jaccard: 0.0,
            edge_jaccard: 0.0,
        };
    }
    let cells: BTreeMap<&str, Cell> = rec
        .nodes
        .iter()
        .filter_map(|n| env.cell_for_statement(&n.statement).map(|c| (n.statement.as_str(), c)))
        .collect();
    let visited: BTreeSet<&Cell> = cells.values().collect();
    let inter = visited.len() as u128;
    let union = env.cell_count().saturating_add(rec.nodes.len() as u128 - inter);
    let node_jaccard = ratio(inter, union);

    let mut truth: BTreeSet<(&Cell, &Cell)> = BTreeSet::new();
    let visited: Vec<&Cell> = visited.into_iter().collect();
    for (i, a) in visited.iter().enumerate() {
        for b in &visited[i + 1..] {
            if axis_neighbors(a, b) {
                truth.insert((a, b));
            }
        }
    }
    let mut matched = 0u128;
    let mut seen: BTreeSet<(&Cell, &Cell)> = BTreeSet::new();
    let mut unmatched = 0u128;
    for e in &rec.edges {
        match (cells.get(e.a.as_str()), cells.get(e.b.as_str())) {
            (Some(x), Some(y)) => {
                let key = if x < y { (x, y) } else { (y, x) };
                if !seen.insert(key) {
                    continue;
                }
                if truth.contains(&key) {
                    matched += 1;
                } else {
                    unmatched += 1;
                }
            }
            _ => unmatched += 1,
        }
    }
    let edge_jaccard = ratio(matched, truth.len() as u128 + unmatched);
    GraphComparison {
        node_jaccard,
        edge_jaccard,
    }
}

/// Graphviz text for a reconstruction: undirected, edge labels carry counts.
pub fn reconstruction_to_dot(rec: &ReconstructedGraph) -> String {
    let mut out = String::from("graph reconstruction {\n");
    for n in &rec.nodes {
        let _ = writeln!(out, "  {} [visits={}];", quote(&n.statement), n.visits);
    }
    for e in &rec.edges {
        let _ = writeln!(
            out,
            "  {} -- {} [weight={}, label={}];",
            quote(&e.a),
            quote(&e.b),
            e.count,
            e.count
        );
    }
    out.push_str("}\n");
    out
}

pub fn export_reconstruction(rec: &ReconstructedGraph, format: ExportFormat) -> Vec<u8> {
    match format {
        ExportFormat::Dot => reconstruction_to_dot(rec).into_bytes(),
        ExportFormat::Structured => {
            let mut s = serde_json::to_string_pretty(rec).expect("graphs always serialize");
            s.push('\n');
            s.into_bytes()
        }
    }
}
