//! How much the place labels move when only k of the groups are sampled.

use beliefmap::config::AnalysisConfig;
use beliefmap::corpus::synth::{generate_synthetic_corpus, SyntheticSpec};
use beliefmap::pipeline::analyze;

fn main() -> beliefmap::Result<()> {
    let mut spec = SyntheticSpec::four_rooms().with_posts_per_room(8);
    spec.filler_rate = 0.1;
    spec.place_jitter = 0.3;
    let corpus = generate_synthetic_corpus(&spec, 1)?;
    let out = analyze(&corpus, &AnalysisConfig::default(), None)?;
    let report = &out.convergence;
    println!("out of {} label terms", report.max_possible());
    println!("k  pairs  min  q1  median  q3  max");
    for l in &report.levels {
        let s = &l.summary;
        println!(
            "{}  {:>5}  {}  {}  {}  {}  {}",
            l.k,
            l.pairs.len(),
            s.min,
            s.q1,
            s.median,
            s.q3,
            s.max
        );
    }
    Ok(())
}
