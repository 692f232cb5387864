//! Content-addressed directory store for corpora and analysis runs.
//!
//! Layout under the root:
//! `corpora/<corpus_id>.tsv` holds the interchange text, and
//! `runs/<run_id>/` holds `run.json` plus the rendered artifacts.
//! Entries are written to a temporary name and renamed into place, so
//! readers only ever see complete entries.

use std::path::{Path, PathBuf};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::artifacts::{render_artifacts, ARTIFACT_NAMES};
use crate::config::AnalysisConfig;
use crate::corpus::{parse_corpus, Corpus};
use crate::error::{Error, Result};
use crate::pipeline::{analyze, AnalysisOutput};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RunStatus {
    Pending,
    Done,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisRun {
    pub run_id: String,
    pub corpus_id: String,
    pub config: AnalysisConfig,
    pub status: RunStatus,
    pub error: Option<String>,
    pub diagnostics: Vec<String>,
    pub outputs: Option<AnalysisOutput>,
}

fn hex_digest(parts: &[&[u8]]) -> String {
    let mut h = Sha256::new();
    for p in parts {
        h.update(p);
    }
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

/// Identifier of a corpus: the hash of its interchange text.
pub fn corpus_id(corpus: &Corpus) -> Result<String> {
    Ok(hex_digest(&[corpus.to_interchange()?.as_bytes()]))
}

/// Identifier of a run: the hash of the corpus id and the canonical config.
pub fn run_id(corpus_id: &str, config: &AnalysisConfig) -> String {
    hex_digest(&[corpus_id.as_bytes(), b"\n", config.to_toml().as_bytes()])
}

/// Runs the analysis and packages the outcome. Domain failures become a
/// failed run rather than an error.
pub fn execute_run(corpus_id: &str, corpus: &Corpus, config: &AnalysisConfig, base_dir: Option<&Path>) -> AnalysisRun {
    let mut run = AnalysisRun {
        run_id: run_id(corpus_id, config),
        corpus_id: corpus_id.to_string(),
        config: config.clone(),
        status: RunStatus::Pending,
        error: None,
        diagnostics: Vec::new(),
        outputs: None,
    };
    match analyze(corpus, config, base_dir) {
        Ok(out) => {
            run.status = RunStatus::Done;
            run.diagnostics = out.diagnostics.clone();
            run.outputs = Some(out);
        }
        Err(e) => {
            run.status = RunStatus::Failed;
            if let Error::Alignment { diagnostics, .. } = &e {
                run.diagnostics = diagnostics.clone();
            }
            run.error = Some(e.to_string());
        }
    }
    run
}

fn valid_id(id: &str) -> bool {
    id.len() == 64 && id.bytes().all(|b| b.is_ascii_hexdigit() && !b.is_ascii_uppercase())
}

#[derive(Debug)]
pub struct Store {
    root: PathBuf,
    writer: Mutex<()>,
}

impl Store {
    pub fn open(root: impl Into<PathBuf>) -> Result<Store> {
        let root = root.into();
        for sub in ["corpora", "runs"] {
            let dir = root.join(sub);
            std::fs::create_dir_all(&dir).map_err(|e| Error::io(dir, e))?;
        }
        Ok(Store {
            root,
            writer: Mutex::new(()),
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    fn corpus_path(&self, id: &str) -> PathBuf {
        self.root.join("corpora").join(format!("{id}.tsv"))
    }

    fn run_dir(&self, id: &str) -> PathBuf {
        self.root.join("runs").join(id)
    }

    /// Stores `corpus` and returns its id. Storing the same corpus twice is a
    /// no-op.
    pub fn put_corpus(&self, corpus: &Corpus) -> Result<String> {
        let text = corpus.to_interchange()?;
        let id = hex_digest(&[text.as_bytes()]);
        let path = self.corpus_path(&id);
        let _guard = self.writer.lock().unwrap_or_else(|e| e.into_inner());
        if !path.exists() {
            let tmp = path.with_extension("tmp");
            std::fs::write(&tmp, text).map_err(|e| Error::io(&tmp, e))?;
            std::fs::rename(&tmp, &path).map_err(|e| Error::io(&path, e))?;
        }
        Ok(id)
    }

    pub fn corpus(&self, id: &str) -> Result<Option<Corpus>> {
        if !valid_id(id) {
            return Ok(None);
        }
        let path = self.corpus_path(id);
        match std::fs::read_to_string(&path) {
            Ok(text) => Ok(Some(parse_corpus(&text)?.corpus)),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(None),
            Err(e) => Err(Error::io(path, e)),
        }
    }

    pub fn run(&self, id: &str) -> Result<Option<AnalysisRun>> {
        if !valid_id(id) {
            return Ok(None);
        }
        let path = self.run_dir(id).join("run.json");
        match std::fs::read(&path) {
            Ok(bytes) => serde_json::from_slice(&bytes)
                .map(Some)
                .map_err(|e| Error::Serialization(format!("{}: {e}", path.display()))),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(None),
            Err(e) => Err(Error::io(path, e)),
        }
    }

    /// One rendered artifact of a finished run.
    pub fn artifact(&self, run_id: &str, name: &str) -> Result<Option<Vec<u8>>> {
        if !valid_id(run_id) || !ARTIFACT_NAMES.contains(&name) {
            return Ok(None);
        }
        let path = self.run_dir(run_id).join(name);
        match std::fs::read(&path) {
            Ok(bytes) => Ok(Some(bytes)),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(None),
            Err(e) => Err(Error::io(path, e)),
        }
    }

    /// Returns the run of `config` on corpus `corpus_id`, executing it first
    /// when it is not stored yet. `None` when the corpus is unknown. The flag
    /// tells whether the run was executed by this call.
    pub fn analyze(&self, corpus_id: &str, config: &AnalysisConfig) -> Result<Option<(AnalysisRun, bool)>> {
        let id = run_id(corpus_id, config);
        if let Some(run) = self.run(&id)? {
            return Ok(Some((run, false)));
        }
        let Some(corpus) = self.corpus(corpus_id)? else {
            return Ok(None);
        };
        let run = execute_run(corpus_id, &corpus, config, None);
        let _guard = self.writer.lock().unwrap_or_else(|e| e.into_inner());
        if let Some(existing) = self.run(&id)? {
            return Ok(Some((existing, false)));
        }
        let dir = self.run_dir(&id);
        let tmp = self.root.join("runs").join(format!("{id}.tmp"));
        if tmp.exists() {
            std::fs::remove_dir_all(&tmp).map_err(|e| Error::io(&tmp, e))?;
        }
        std::fs::create_dir_all(&tmp).map_err(|e| Error::io(&tmp, e))?;
        if let Some(out) = &run.outputs {
            for (name, bytes) in render_artifacts(out) {
                let path = tmp.join(name);
                std::fs::write(&path, bytes).map_err(|e| Error::io(path, e))?;
            }
        }
        let json = serde_json::to_vec(&run).map_err(|e| Error::Serialization(e.to_string()))?;
        let path = tmp.join("run.json");
        std::fs::write(&path, json).map_err(|e| Error::io(path, e))?;
        std::fs::rename(&tmp, &dir).map_err(|e| Error::io(&dir, e))?;
        Ok(Some((run, true)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::artifacts::MAP_DOT;
    use crate::corpus::{Post, Role, Timestamp};

    fn corpus() -> Corpus {
        Corpus::from_posts(vec![Post {
            post_id: "p1".into(),
            group_id: "g".into(),
            player_id: "a".into(),
            role: Role::Player,
            timestamp: Timestamp::from_millis(0),
            text: "hello there".into(),
        }])
    }

    #[test]
    fn ids_are_content_hashes() {
        let id = corpus_id(&corpus()).unwrap();
        assert!(valid_id(&id));
        assert_eq!(id, corpus_id(&corpus()).unwrap());
        assert_eq!(corpus_id(&Corpus::default()).unwrap(), hex_digest(&[b""]));
        let cfg = AnalysisConfig::default();
        assert_eq!(run_id(&id, &cfg), run_id(&id, &cfg.clone()));
        let mut other = cfg.clone();
        other.terms.depth = 5;
        assert_ne!(run_id(&id, &cfg), run_id(&id, &other));
    }

    #[test]
    fn corpora_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let store = Store::open(dir.path()).unwrap();
        let id = store.put_corpus(&corpus()).unwrap();
        assert_eq!(store.put_corpus(&corpus()).unwrap(), id);
        assert_eq!(store.corpus(&id).unwrap(), Some(corpus()));
        assert_eq!(store.corpus(&"0".repeat(64)).unwrap(), None);
        assert_eq!(store.corpus("../etc").unwrap(), None);
    }

    #[test]
    fn failed_runs_are_stored_and_reused() {
        let dir = tempfile::tempdir().unwrap();
        let store = Store::open(dir.path()).unwrap();
        let id = store.put_corpus(&corpus()).unwrap();
        let cfg = AnalysisConfig::default();
        let (run, fresh) = store.analyze(&id, &cfg).unwrap().unwrap();
        assert!(fresh);
        assert_eq!(run.status, RunStatus::Failed);
        assert!(run.error.as_deref().unwrap().contains("dm"));
        assert!(run.outputs.is_none());
        let (again, fresh) = store.analyze(&id, &cfg).unwrap().unwrap();
        assert!(!fresh);
        assert_eq!(again, run);
        assert_eq!(store.artifact(&run.run_id, MAP_DOT).unwrap(), None);
        assert!(store.analyze(&"f".repeat(64), &cfg).unwrap().is_none());
    }
}
