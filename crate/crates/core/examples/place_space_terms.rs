//! Pools every group's posts per sequence to find the shared places, then
//! each group's own spaces, under each scoring mode.

use beliefmap::config::AnalysisConfig;
use beliefmap::corpus::synth::{generate_synthetic_corpus, SyntheticSpec};
use beliefmap::pipeline::{analyze, ScoringMode};

fn main() -> beliefmap::Result<()> {
    let corpus = generate_synthetic_corpus(&SyntheticSpec::four_rooms(), 4)?;
    for mode in [ScoringMode::Bow, ScoringMode::Tfidf, ScoringMode::Centrality] {
        let mut cfg = AnalysisConfig::default();
        cfg.terms.mode = mode;
        let out = analyze(&corpus, &cfg, None)?;
        println!("{mode}");
        for (s, place) in out.places.iter().enumerate() {
            println!("  place {s}: {}", place.label(3));
            for (group, spaces) in &out.spaces {
                println!("    {group}: {}", spaces[s].terms().join(", "));
            }
        }
    }
    Ok(())
}
