//! Generates a corpus with planted place and space vocabularies and writes
//! it in the interchange format.

use beliefmap::corpus::synth::{generate_synthetic_corpus, SyntheticSpec};
use beliefmap::corpus::{load_corpus, save_corpus, Role};

fn main() -> beliefmap::Result<()> {
    let spec = SyntheticSpec::four_rooms();
    let corpus = generate_synthetic_corpus(&spec, 11)?;
    println!("{} posts", corpus.len());
    for (group, n) in corpus.post_counts() {
        println!("  {group}: {n}");
    }
    for room in 0..spec.rooms.len() {
        println!("room {room}: places {:?}", spec.planted_places(room, 3));
    }
    println!("group1 room 0 spaces {:?}", spec.planted_spaces(0, 0, 3));

    let first_dm = corpus
        .posts()
        .iter()
        .find(|p| p.role == Role::Dm)
        .expect("every group has a dm");
    println!("first marker: {}...", &first_dm.text[..60]);

    let dir = std::env::temp_dir().join("beliefmap-synthetic");
    std::fs::create_dir_all(&dir).expect("temp dir");
    let path = dir.join("corpus.tsv");
    save_corpus(&corpus, &path)?;
    let back = load_corpus(&path)?;
    assert_eq!(back.corpus, corpus);
    println!("wrote {}", path.display());
    Ok(())
}
