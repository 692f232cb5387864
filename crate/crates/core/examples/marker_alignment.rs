//! Aligns groups on the near-identical dm posts every group received, then
//! cuts each group's stream into sequences.

use beliefmap::corpus::synth::{generate_synthetic_corpus, SyntheticSpec};
use beliefmap::pipeline::{detect_markers, slice_sequences};

fn main() -> beliefmap::Result<()> {
    let corpus = generate_synthetic_corpus(&SyntheticSpec::four_rooms(), 5)?;
    let alignment = detect_markers(&corpus, 0.8, 50)?;
    for (s, cluster) in alignment.clusters.iter().enumerate() {
        let words: Vec<&str> = cluster.text.split_whitespace().take(6).collect();
        println!("marker {s}: {:?} in {} groups", words.join(" "), cluster.posts.len());
    }
    let slicing = slice_sequences(&corpus, &alignment, 2)?;
    for slice in slicing.slices.iter().filter(|s| s.group_id == "group1") {
        println!(
            "group1 sequence {} bucket {}: {} posts",
            slice.sequence,
            slice.bucket,
            slice.post_ids.len()
        );
    }
    Ok(())
}
