use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use beliefmap::artifacts::ARTIFACT_NAMES;
use beliefmap::config::AnalysisConfig;
use beliefmap::corpus::synth::{generate_synthetic_corpus, SyntheticSpec};
use beliefmap::corpus::{load_corpus, save_corpus};
use beliefmap::mapgen::import_map;

fn beliefmap(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_beliefmap"))
        .args(args)
        .output()
        .unwrap()
}

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

struct Fixture {
    dir: tempfile::TempDir,
    corpus: PathBuf,
    config: PathBuf,
}

fn fixture() -> Fixture {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("corpus.tsv");
    save_corpus(
        &generate_synthetic_corpus(&SyntheticSpec::four_rooms(), 0).unwrap(),
        &corpus,
    )
    .unwrap();
    let config = dir.path().join("analysis.toml");
    std::fs::write(&config, AnalysisConfig::default().to_toml()).unwrap();
    Fixture { dir, corpus, config }
}

#[test]
fn shipped_analysis_config_is_the_default() {
    let cfg = AnalysisConfig::load(configs().join("analysis.toml")).unwrap();
    assert_eq!(cfg, AnalysisConfig::default());
}

#[test]
fn analyze_writes_the_artifact_set_deterministically() {
    let f = fixture();
    let a = f.dir.path().join("a");
    let b = f.dir.path().join("b");
    for out in [&a, &b] {
        let o = beliefmap(&[
            "analyze",
            "--corpus",
            s(&f.corpus),
            "--config",
            s(&f.config),
            "--out",
            s(out),
        ]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        assert_eq!(
            String::from_utf8(o.stdout).unwrap().trim(),
            "goblin-orc-stairs -> rope-gate-orb -> troll-grogg-box -> coins-dragon-barrier"
        );
    }
    let mut names: Vec<String> = std::fs::read_dir(&a)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    names.sort();
    let mut expected: Vec<String> = ARTIFACT_NAMES.iter().map(|n| n.to_string()).collect();
    expected.sort();
    assert_eq!(names, expected);
    for name in ARTIFACT_NAMES {
        assert_eq!(
            std::fs::read(a.join(name)).unwrap(),
            std::fs::read(b.join(name)).unwrap(),
            "{name}"
        );
    }
}

#[test]
fn map_format_follows_flag_or_extension() {
    let f = fixture();
    let structured = f.dir.path().join("map.structured");
    let o = beliefmap(&[
        "map",
        "--corpus",
        s(&f.corpus),
        "--config",
        s(&f.config),
        "--out",
        s(&structured),
    ]);
    assert!(o.status.success());
    let map = import_map(&std::fs::read(&structured).unwrap()).unwrap();
    assert_eq!(map.places.len(), 4);
    let o = beliefmap(&[
        "map",
        "--corpus",
        s(&f.corpus),
        "--config",
        s(&f.config),
        "--format",
        "dot",
    ]);
    assert!(String::from_utf8(o.stdout).unwrap().starts_with("digraph"));
}

#[test]
fn converge_prints_one_row_per_subset_size() {
    let f = fixture();
    let o = beliefmap(&["converge", "--corpus", s(&f.corpus), "--config", s(&f.config)]);
    assert!(o.status.success());
    assert_eq!(String::from_utf8(o.stdout).unwrap().lines().count(), 5);
    let o = beliefmap(&[
        "converge",
        "--corpus",
        s(&f.corpus),
        "--config",
        s(&f.config),
        "--groups",
        "group1,group3,group5",
    ]);
    let text = String::from_utf8(o.stdout).unwrap();
    let ks: Vec<&str> = text.lines().skip(1).map(|l| l.split('\t').next().unwrap()).collect();
    assert_eq!(ks, ["1", "2"]);
    let o = beliefmap(&[
        "converge",
        "--corpus",
        s(&f.corpus),
        "--config",
        s(&f.config),
        "--groups",
        "group1",
    ]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn ingest_and_synth_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("synth.tsv");
    let o = beliefmap(&["synth", "--spec", "four-rooms", "--out", s(&out), "--seed", "3"]);
    assert!(o.status.success());
    let spec = dir.path().join("spec.json");
    std::fs::write(&spec, SyntheticSpec::four_rooms().to_json()).unwrap();
    let again = dir.path().join("again.tsv");
    assert!(
        beliefmap(&["synth", "--spec", s(&spec), "--out", s(&again), "--seed", "3"])
            .status
            .success()
    );
    assert_eq!(std::fs::read(&out).unwrap(), std::fs::read(&again).unwrap());

    let canon = dir.path().join("canon.tsv");
    let o = beliefmap(&["ingest", "--corpus", s(&out), "--out", s(&canon)]);
    assert!(o.status.success());
    assert!(String::from_utf8(o.stdout)
        .unwrap()
        .starts_with("1305 posts in 5 groups, 0 lines rejected"));
    assert_eq!(load_corpus(&canon).unwrap().corpus, load_corpus(&out).unwrap().corpus);
}

#[test]
fn simulate_shipped_configs_reach_their_regimes() {
    let dir = tempfile::tempdir().unwrap();
    for regime in ["nomad", "flock", "stampede"] {
        let out = dir.path().join(regime);
        let o = beliefmap(&[
            "simulate",
            "--config",
            s(&configs().join(format!("sim_{regime}.toml"))),
            "--out",
            s(&out),
        ]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        assert!(String::from_utf8(o.stdout).unwrap().starts_with(regime));
        let report: serde_json::Value =
            serde_json::from_slice(&std::fs::read(out.join("regime.json")).unwrap()).unwrap();
        assert_eq!(report["regime"], regime);
        for file in ["posts.tsv", "comparison.json", "reconstruction.dot"] {
            assert!(out.join(file).is_file(), "{file}");
        }
    }
}

#[test]
fn exit_codes_separate_usage_from_domain_errors() {
    let f = fixture();
    let partial = f.dir.path().join("partial.toml");
    let full = AnalysisConfig::default().to_toml();
    let cut: String = full
        .lines()
        .filter(|l| !l.starts_with("depth"))
        .map(|l| format!("{l}\n"))
        .collect();
    std::fs::write(&partial, cut).unwrap();
    let o = beliefmap(&[
        "analyze",
        "--corpus",
        s(&f.corpus),
        "--config",
        s(&partial),
        "--out",
        s(&f.dir.path().join("x")),
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8(o.stderr).unwrap().contains("depth"));

    let sim = f.dir.path().join("sim.toml");
    std::fs::write(&sim, "[sim]\nsih = 0.3\n").unwrap();
    assert_eq!(
        beliefmap(&["simulate", "--config", s(&sim), "--out", s(f.dir.path())])
            .status
            .code(),
        Some(2)
    );

    assert_eq!(beliefmap(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(beliefmap(&["analyze", "--corpus", s(&f.corpus)]).status.code(), Some(2));

    let missing = f.dir.path().join("nope.tsv");
    let o = beliefmap(&[
        "analyze",
        "--corpus",
        s(&missing),
        "--config",
        s(&f.config),
        "--out",
        s(&f.dir.path().join("y")),
    ]);
    assert_eq!(o.status.code(), Some(1));

    let no_dm = f.dir.path().join("no_dm.tsv");
    std::fs::write(&no_dm, "a\tg\tp\tplayer\t2018-01-06T18:00:00.000Z\thello there\n").unwrap();
    let o = beliefmap(&[
        "analyze",
        "--corpus",
        s(&no_dm),
        "--config",
        s(&f.config),
        "--out",
        s(&f.dir.path().join("z")),
    ]);
    assert_eq!(o.status.code(), Some(1));
}
