//! Multi-group chat corpora: the post model, the line-delimited interchange
//! format, gameplay windowing and tokenization.
//!
//! One record per line, tab-separated, in this fixed field order:
//!
//! ```text
//! post_id  group_id  player_id  role  timestamp  text
//! ```
//!
//! `role` is `player` or `dm`, `timestamp` is ISO-8601 UTC with millisecond
//! precision (`2021-03-04T18:22:05.120Z`). Backslash, tab, carriage return
//! and newline inside `text` are written as `\\`, `\t`, `\r` and `\n`.

pub mod synth;

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use chrono::{DateTime, SecondsFormat, Utc};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Player,
    Dm,
}

impl Role {
    pub fn as_str(self) -> &'static str {
        match self {
            Role::Player => "player",
            Role::Dm => "dm",
        }
    }
}

impl std::str::FromStr for Role {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "player" => Ok(Role::Player),
            "dm" => Ok(Role::Dm),
            other => Err(format!("unknown role `{other}`")),
        }
    }
}

/// UTC instant with millisecond precision.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub struct Timestamp(i64);

impl Timestamp {
    pub fn from_millis(ms: i64) -> Self {
        Timestamp(ms)
    }

    pub fn millis(self) -> i64 {
        self.0
    }

    pub fn parse(s: &str) -> Result<Self, String> {
        let dt = DateTime::parse_from_rfc3339(s).map_err(|e| format!("bad timestamp `{s}`: {e}"))?;
        let dt = dt.with_timezone(&Utc);
        if dt.timestamp_subsec_nanos() % 1_000_000 != 0 {
            return Err(format!("timestamp `{s}` is finer than milliseconds"));
        }
        Ok(Timestamp(dt.timestamp_millis()))
    }
}

impl std::fmt::Display for Timestamp {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match DateTime::<Utc>::from_timestamp_millis(self.0) {
            Some(dt) => f.write_str(&dt.to_rfc3339_opts(SecondsFormat::Millis, true)),
            None => write!(f, "<out of range: {} ms>", self.0),
        }
    }
}

impl From<Timestamp> for String {
    fn from(t: Timestamp) -> String {
        t.to_string()
    }
}

impl TryFrom<String> for Timestamp {
    type Error = String;

    fn try_from(s: String) -> Result<Self, String> {
        Timestamp::parse(&s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Post {
    pub post_id: String,
    pub group_id: String,
    pub player_id: String,
    pub role: Role,
    pub timestamp: Timestamp,
    pub text: String,
}

/// An ordered, immutable collection of posts.
///
/// Posts are kept sorted by (group, timestamp, ingestion index).
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Corpus {
    posts: Vec<Post>,
}

impl Corpus {
    /// Builds a corpus, sorting stably by (group, timestamp).
    pub fn from_posts(mut posts: Vec<Post>) -> Self {
        posts.sort_by(|a, b| a.group_id.cmp(&b.group_id).then(a.timestamp.cmp(&b.timestamp)));
        Corpus { posts }
    }

    pub fn posts(&self) -> &[Post] {
        &self.posts
    }

    pub fn len(&self) -> usize {
        self.posts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.posts.is_empty()
    }

    pub fn groups(&self) -> BTreeSet<String> {
        self.posts.iter().map(|p| p.group_id.clone()).collect()
    }

    pub fn group_posts<'a>(&'a self, group: &'a str) -> impl Iterator<Item = &'a Post> + 'a {
        self.posts.iter().filter(move |p| p.group_id == group)
    }

    pub fn post_counts(&self) -> BTreeMap<String, usize> {
        let mut counts = BTreeMap::new();
        for p in &self.posts {
            *counts.entry(p.group_id.clone()).or_insert(0) += 1;
        }
        counts
    }

    pub fn find(&self, post_id: &str) -> Option<&Post> {
        self.posts.iter().find(|p| p.post_id == post_id)
    }

    /// Keeps only posts from the given groups.
    pub fn restrict_groups(&self, groups: &BTreeSet<String>) -> Corpus {
        Corpus {
            posts: self
                .posts
                .iter()
                .filter(|p| groups.contains(&p.group_id))
                .cloned()
                .collect(),
        }
    }

    /// Groups lacking any dm post; marker alignment needs at least one.
    pub fn groups_without_dm(&self) -> Vec<String> {
        let with_dm: HashSet<&str> = self
            .posts
            .iter()
            .filter(|p| p.role == Role::Dm)
            .map(|p| p.group_id.as_str())
            .collect();
        self.groups()
            .into_iter()
            .filter(|g| !with_dm.contains(g.as_str()))
            .collect()
    }

    /// Serializes to the interchange format.
    pub fn to_interchange(&self) -> Result<String> {
        let mut out = String::new();
        for p in &self.posts {
            for (name, field) in [
                ("post_id", &p.post_id),
                ("group_id", &p.group_id),
                ("player_id", &p.player_id),
            ] {
                if field.is_empty() || field.contains(['\t', '\n', '\r']) {
                    return Err(Error::Serialization(format!(
                        "post {:?}: {name} must be non-empty and free of tabs and newlines",
                        p.post_id
                    )));
                }
            }
            let _ = writeln!(
                out,
                "{}\t{}\t{}\t{}\t{}\t{}",
                p.post_id,
                p.group_id,
                p.player_id,
                p.role.as_str(),
                p.timestamp,
                escape_text(&p.text)
            );
        }
        Ok(out)
    }
}

fn escape_text(text: &str) -> String {
    let mut s = String::with_capacity(text.len());
    for c in text.chars() {
        match c {
            '\\' => s.push_str("\\\\"),
            '\t' => s.push_str("\\t"),
            '\n' => s.push_str("\\n"),
            '\r' => s.push_str("\\r"),
            c => s.push(c),
        }
    }
    s
}

fn unescape_text(text: &str) -> Result<String, String> {
    let mut s = String::with_capacity(text.len());
    let mut chars = text.chars();
    while let Some(c) = chars.next() {
        if c != '\\' {
            s.push(c);
            continue;
        }
        match chars.next() {
            Some('\\') => s.push('\\'),
            Some('t') => s.push('\t'),
            Some('n') => s.push('\n'),
            Some('r') => s.push('\r'),
            Some(other) => return Err(format!("unknown escape `\\{other}`")),
            None => return Err("dangling backslash".into()),
        }
    }
    Ok(s)
}

/// A line that could not be ingested.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Reject {
    /// 1-based line number.
    pub line: usize,
    pub reason: String,
    pub content: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LoadReport {
    pub corpus: Corpus,
    pub rejects: Vec<Reject>,
}

impl LoadReport {
    /// Renders the rejects report, one `line<TAB>reason<TAB>content` row each.
    pub fn rejects_report(&self) -> String {
        let mut out = String::new();
        for r in &self.rejects {
            let _ = writeln!(out, "{}\t{}\t{}", r.line, r.reason, escape_text(&r.content));
        }
        out
    }
}

/// Malformed lines beyond this fraction fail ingestion.
pub const MAX_MALFORMED_FRACTION: f64 = 0.10;

/// A file with at most this many malformed lines never fails ingestion.
pub const MALFORMED_ALLOWANCE: usize = 1;

fn parse_line(line: &str) -> Result<Post, String> {
    let fields: Vec<&str> = line.split('\t').collect();
    if fields.len() != 6 {
        return Err(format!("expected 6 tab-separated fields, found {}", fields.len()));
    }
    for (name, value) in [
        ("post_id", fields[0]),
        ("group_id", fields[1]),
        ("player_id", fields[2]),
    ] {
        if value.trim().is_empty() {
            return Err(format!("empty {name}"));
        }
    }
    let role = fields[3].parse::<Role>()?;
    let timestamp = Timestamp::parse(fields[4])?;
    let text = unescape_text(fields[5])?;
    if text.trim().is_empty() {
        return Err("empty text".into());
    }
    Ok(Post {
        post_id: fields[0].to_string(),
        group_id: fields[1].to_string(),
        player_id: fields[2].to_string(),
        role,
        timestamp,
        text,
    })
}

/// Parses interchange text. Blank lines are ignored; malformed lines are
/// collected as rejects unless there are more than [`MALFORMED_ALLOWANCE`] of
/// them and they exceed [`MAX_MALFORMED_FRACTION`] of the non-blank lines.
pub fn parse_corpus(input: &str) -> Result<LoadReport> {
    let mut posts = Vec::new();
    let mut rejects = Vec::new();
    let mut seen: HashMap<String, usize> = HashMap::new();
    let mut total = 0usize;
    for (idx, raw) in input.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.strip_suffix('\r').unwrap_or(raw);
        if line.trim().is_empty() {
            continue;
        }
        total += 1;
        let parsed = parse_line(line).and_then(|p| match seen.get(&p.post_id) {
            Some(first) => Err(format!("duplicate post_id (first seen on line {first})")),
            None => {
                seen.insert(p.post_id.clone(), line_no);
                Ok(p)
            }
        });
        match parsed {
            Ok(p) => posts.push(p),
            Err(reason) => rejects.push(Reject {
                line: line_no,
                reason,
                content: line.to_string(),
            }),
        }
    }
    if rejects.len() > MALFORMED_ALLOWANCE && rejects.len() as f64 > MAX_MALFORMED_FRACTION * total as f64 {
        return Err(Error::CorpusIntegrity {
            malformed: rejects.len(),
            total,
            first_line: rejects[0].line,
            lines: rejects.iter().map(|r| r.line).collect(),
        });
    }
    Ok(LoadReport {
        corpus: Corpus::from_posts(posts),
        rejects,
    })
}

/// The sibling path the rejects report is written to.
pub fn rejects_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".rejects");
    PathBuf::from(s)
}

/// Loads a corpus file. When lines were rejected the report is written next
/// to the input as `<path>.rejects`.
pub fn load_corpus(path: impl AsRef<Path>) -> Result<LoadReport> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let report = parse_corpus(&text)?;
    if !report.rejects.is_empty() {
        let rp = rejects_path(path);
        std::fs::write(&rp, report.rejects_report()).map_err(|e| Error::io(rp, e))?;
    }
    Ok(report)
}

pub fn save_corpus(corpus: &Corpus, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, corpus.to_interchange()?).map_err(|e| Error::io(path, e))
}

/// Inclusive gameplay window for one group, given by marker post ids.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Window {
    pub start: String,
    pub end: String,
}

/// Drops incidental chat outside each group's gameplay window. Groups without
/// a window pass through unchanged.
pub fn gameplay_window(corpus: &Corpus, windows: &BTreeMap<String, Window>) -> Result<Corpus> {
    let mut bounds: HashMap<&str, (Timestamp, Timestamp)> = HashMap::new();
    for (group, w) in windows {
        let lookup = |id: &str| {
            corpus
                .group_posts(group)
                .find(|p| p.post_id == id)
                .map(|p| p.timestamp)
                .ok_or_else(|| Error::Window {
                    group: group.clone(),
                    message: format!("marker post `{id}` not found in the group"),
                })
        };
        let (start, end) = (lookup(&w.start)?, lookup(&w.end)?);
        if end < start {
            return Err(Error::Window {
                group: group.clone(),
                message: format!("end marker `{}` precedes start marker `{}`", w.end, w.start),
            });
        }
        bounds.insert(group.as_str(), (start, end));
    }
    let posts = corpus
        .posts
        .iter()
        .filter(|p| match bounds.get(p.group_id.as_str()) {
            Some((s, e)) => p.timestamp >= *s && p.timestamp <= *e,
            None => true,
        })
        .cloned()
        .collect();
    Ok(Corpus { posts })
}

/// Lowercases and splits on every character outside `[a-z0-9']`, keeping
/// tokens of at least two characters. No stemming.
pub fn tokenize(text: &str) -> Vec<String> {
    let mut tokens = Vec::new();
    let mut current = String::new();
    for c in text.chars().flat_map(char::to_lowercase) {
        if c.is_ascii_lowercase() || c.is_ascii_digit() || c == '\'' {
            current.push(c);
        } else if !current.is_empty() {
            if current.len() >= 2 {
                tokens.push(std::mem::take(&mut current));
            } else {
                current.clear();
            }
        }
    }
    if current.len() >= 2 {
        tokens.push(current);
    }
    tokens
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn line(id: &str, group: &str, role: &str, ts: &str, text: &str) -> String {
        format!("{id}\t{group}\tp1\t{role}\t{ts}\t{text}\n")
    }

    #[test]
    fn tokenize_examples() {
        assert_eq!(
            tokenize("Goblin! Attacks the ORC."),
            vec!["goblin", "attacks", "the", "orc"]
        );
        assert_eq!(tokenize("I-I… can't"), vec!["can't"]);
        assert_eq!(tokenize("d20 roll: 17"), vec!["d20", "roll", "17"]);
        assert!(tokenize("").is_empty());
        assert_eq!(tokenize("Édouard"), vec!["douard"]);
    }

    proptest! {
        #[test]
        fn tokenize_is_idempotent(text in "\\PC{0,80}") {
            let once = tokenize(&text);
            prop_assert_eq!(tokenize(&once.join(" ")), once.clone());
            for t in &once {
                prop_assert!(t.len() >= 2);
                prop_assert!(t.chars().all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '\''));
            }
        }

        #[test]
        fn interchange_round_trips(texts in proptest::collection::vec("[^\\x00]{1,40}", 0..12)) {
            let posts: Vec<Post> = texts
                .iter()
                .enumerate()
                .filter(|(_, t)| !t.trim().is_empty())
                .map(|(i, t)| Post {
                    post_id: format!("p{i}"),
                    group_id: format!("g{}", i % 3),
                    player_id: "x".into(),
                    role: if i % 4 == 0 { Role::Dm } else { Role::Player },
                    timestamp: Timestamp::from_millis(1_600_000_000_000 + (i as i64 % 5) * 1000),
                    text: t.clone(),
                })
                .collect();
            let corpus = Corpus::from_posts(posts);
            let text = corpus.to_interchange().unwrap();
            let back = parse_corpus(&text).unwrap();
            prop_assert!(back.rejects.is_empty());
            prop_assert_eq!(back.corpus, corpus);
        }
    }

    #[test]
    fn empty_input_is_an_empty_corpus() {
        let r = parse_corpus("").unwrap();
        assert!(r.corpus.is_empty());
        assert!(r.corpus.groups().is_empty());
    }

    #[test]
    fn malformed_lines_become_rejects() {
        let mut input = String::new();
        input += &line("a", "g", "player", "2021-01-01T00:00:00.000Z", "hello there");
        input += "not a record\n";
        input += &line("b", "g", "dm", "2021-01-01T00:00:01.000Z", "welcome");
        let r = parse_corpus(&input).unwrap();
        assert_eq!(r.corpus.len(), 2);
        assert_eq!(r.rejects.len(), 1);
        assert_eq!(r.rejects[0].line, 2);
    }

    #[test]
    fn many_malformed_lines_fail_integrity() {
        let mut input = String::new();
        input += &line("a", "g", "player", "2021-01-01T00:00:00.000Z", "hello");
        input += "junk\n";
        input += "more junk\n";
        input += &line("b", "g", "dm", "2021-01-01T00:00:01.000Z", "hi");
        assert!(matches!(
            parse_corpus(&input),
            Err(Error::CorpusIntegrity {
                malformed: 2,
                total: 4,
                first_line: 2,
                ..
            })
        ));
    }

    #[test]
    fn integrity_threshold_is_ten_percent() {
        let build = |bad: usize, good: usize| {
            let mut s = String::new();
            for i in 0..good {
                s += &line(&format!("p{i}"), "g", "player", "2021-01-01T00:00:00.000Z", "fine");
            }
            for _ in 0..bad {
                s += "broken\n";
            }
            s
        };
        assert!(parse_corpus(&build(10, 90)).is_ok());
        assert!(parse_corpus(&build(11, 89)).is_err());
    }

    #[test]
    fn rejects_cover_each_failure_kind() {
        let mut input = String::new();
        for i in 0..40 {
            input += &line(&format!("ok{i}"), "g", "player", "2021-01-01T00:00:00.000Z", "fine");
        }
        input += &line("r1", "g", "wizard", "2021-01-01T00:00:00.000Z", "x");
        input += &line("r2", "g", "dm", "yesterday", "x");
        input += &line("r3", "g", "dm", "2021-01-01T00:00:00.000Z", "   ");
        input += &line("ok1", "g", "dm", "2021-01-01T00:00:00.000Z", "dup");
        let r = parse_corpus(&input).unwrap();
        let reasons: Vec<&str> = r.rejects.iter().map(|r| r.reason.as_str()).collect();
        assert!(reasons[0].contains("role"));
        assert!(reasons[1].contains("timestamp"));
        assert!(reasons[2].contains("empty text"));
        assert!(reasons[3].contains("duplicate"));
    }

    #[test]
    fn load_writes_rejects_sibling() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.tsv");
        let mut input = String::new();
        for i in 0..19 {
            input += &line(&format!("p{i}"), "g", "dm", "2021-01-01T00:00:00.000Z", "fine");
        }
        input += "garbage\n";
        std::fs::write(&path, input).unwrap();
        let r = load_corpus(&path).unwrap();
        assert_eq!(r.corpus.len(), 19);
        let rejects = std::fs::read_to_string(rejects_path(&path)).unwrap();
        assert!(rejects.starts_with("20\t"));
    }

    #[test]
    fn unreadable_file_is_io_error() {
        assert!(matches!(load_corpus("/nonexistent/corpus.tsv"), Err(Error::Io { .. })));
    }

    #[test]
    fn save_then_load_is_identity() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.tsv");
        let corpus = Corpus::from_posts(vec![
            Post {
                post_id: "2".into(),
                group_id: "b".into(),
                player_id: "dm".into(),
                role: Role::Dm,
                timestamp: Timestamp::parse("2021-05-01T10:00:00.250Z").unwrap(),
                text: "multi\nline\twith \\ slash".into(),
            },
            Post {
                post_id: "1".into(),
                group_id: "a".into(),
                player_id: "alice".into(),
                role: Role::Player,
                timestamp: Timestamp::parse("2021-05-01T09:00:00+02:00").unwrap(),
                text: "hi".into(),
            },
        ]);
        save_corpus(&corpus, &path).unwrap();
        assert_eq!(load_corpus(&path).unwrap().corpus, corpus);
    }

    #[test]
    fn ordering_is_group_then_time_then_ingestion() {
        let mut input = String::new();
        input += &line("c", "g2", "player", "2021-01-01T00:00:00.000Z", "x1");
        input += &line("b", "g1", "player", "2021-01-01T00:00:05.000Z", "x2");
        input += &line("a", "g1", "player", "2021-01-01T00:00:05.000Z", "x3");
        input += &line("d", "g1", "player", "2021-01-01T00:00:01.000Z", "x4");
        let r = parse_corpus(&input).unwrap();
        let ids: Vec<&str> = r.corpus.posts().iter().map(|p| p.post_id.as_str()).collect();
        assert_eq!(ids, vec!["d", "b", "a", "c"]);
    }

    fn synthetic_group(pre: usize, total: usize) -> Corpus {
        let posts = (0..total)
            .map(|i| Post {
                post_id: format!("p{i:03}"),
                group_id: "g".into(),
                player_id: "u".into(),
                role: if i == pre || i == total - 1 {
                    Role::Dm
                } else {
                    Role::Player
                },
                timestamp: Timestamp::from_millis(i as i64 * 60_000),
                text: format!("post number {i}"),
            })
            .collect();
        Corpus::from_posts(posts)
    }

    #[test]
    fn window_drops_pregame_posts() {
        let corpus = synthetic_group(10, 100);
        let windows = BTreeMap::from([(
            "g".to_string(),
            Window {
                start: "p010".into(),
                end: "p099".into(),
            },
        )]);
        let kept = gameplay_window(&corpus, &windows).unwrap();
        // direct filter oracle
        let expected = corpus.posts().iter().filter(|p| p.post_id.as_str() >= "p010").count();
        assert_eq!(kept.len(), expected);
        assert_eq!(kept.len(), 90);
    }

    #[test]
    fn window_identity_and_zero_width() {
        let corpus = synthetic_group(0, 20);
        let all = BTreeMap::from([(
            "g".to_string(),
            Window {
                start: "p000".into(),
                end: "p019".into(),
            },
        )]);
        assert_eq!(gameplay_window(&corpus, &all).unwrap(), corpus);
        let one = BTreeMap::from([(
            "g".to_string(),
            Window {
                start: "p007".into(),
                end: "p007".into(),
            },
        )]);
        let w = gameplay_window(&corpus, &one).unwrap();
        assert_eq!(w.len(), 1);
        assert_eq!(w.posts()[0].post_id, "p007");
    }

    #[test]
    fn window_missing_marker_names_group() {
        let corpus = synthetic_group(0, 5);
        let w = BTreeMap::from([(
            "g".to_string(),
            Window {
                start: "nope".into(),
                end: "p004".into(),
            },
        )]);
        match gameplay_window(&corpus, &w) {
            Err(Error::Window { group, .. }) => assert_eq!(group, "g"),
            other => panic!("unexpected {other:?}"),
        }
    }
}
