//! Writes the fixed artifact set of one analysis run into a directory.

use beliefmap::artifacts::write_artifacts;
use beliefmap::config::AnalysisConfig;
use beliefmap::corpus::synth::{generate_synthetic_corpus, SyntheticSpec};
use beliefmap::pipeline::analyze;

fn main() -> beliefmap::Result<()> {
    let corpus = generate_synthetic_corpus(&SyntheticSpec::four_rooms(), 12)?;
    let out = analyze(&corpus, &AnalysisConfig::default(), None)?;
    let dir = std::env::temp_dir().join("beliefmap-artifacts");
    for path in write_artifacts(&dir, &out)? {
        let size = std::fs::metadata(&path).map(|m| m.len()).unwrap_or(0);
        println!("{:>8} {}", size, path.display());
    }
    Ok(())
}
