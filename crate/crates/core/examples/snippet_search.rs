//! Finds the shortest post of a group's sequence that mentions every label
//! term, the way map nodes are annotated.

use beliefmap::config::AnalysisConfig;
use beliefmap::corpus::synth::{generate_synthetic_corpus, SyntheticSpec};
use beliefmap::mapgen::{find_snippet, posts_containing, SNIPPET_MAX_CHARS};
use beliefmap::pipeline::{analyze, counted_sequence_posts};

fn main() -> beliefmap::Result<()> {
    let corpus = generate_synthetic_corpus(&SyntheticSpec::four_rooms(), 8)?;
    let cfg = AnalysisConfig::default();
    let out = analyze(&corpus, &cfg, None)?;
    for (s, place) in out.map.places.iter().enumerate() {
        for (group, space) in &place.spaces {
            match &space.snippet {
                Some(snip) => println!(
                    "{s} {group} [{}] {}: {}",
                    space.terms.join(" "),
                    snip.author,
                    snip.display()
                ),
                None => println!("{s} {group} [{}] no post has every term", space.terms.join(" ")),
            }
        }
    }

    let terms = out.places[2].top(3);
    let window = counted_sequence_posts(&corpus, &out.slicing, "group3", 2, false);
    let hits = posts_containing(window.iter().copied(), &terms);
    println!("{} posts of group3 sequence 2 mention {:?}", hits.len(), terms);
    if let Some(s) = find_snippet(window, &terms, SNIPPET_MAX_CHARS) {
        println!("shortest: {}", s.display());
    }
    Ok(())
}
