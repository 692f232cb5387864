//! The even-split view of one group: each player's posts cut into five
//! buckets and the two most central kept terms per bucket.

use beliefmap::corpus::synth::{generate_synthetic_corpus, SyntheticSpec};
use beliefmap::pipeline::{
    builtin_base, induce_stopwords, preliminary_even_split, InductionSettings, PreliminarySettings,
};

fn main() -> beliefmap::Result<()> {
    let corpus = generate_synthetic_corpus(&SyntheticSpec::four_rooms(), 6)?;
    let stopwords = induce_stopwords(&corpus, builtin_base(), &[], &InductionSettings::default())?;
    let report = preliminary_even_split(&corpus, "group2", &stopwords, &PreliminarySettings::default())?;
    for h in &report.headlines {
        println!("split {}: {}", h.split, h.display());
    }
    for w in &report.warnings {
        println!("warning: {w}");
    }
    Ok(())
}
