//! Finds each player's self-identifying words (names they overuse relative
//! to everyone else) and the domain stop words.

use beliefmap::corpus::synth::{generate_synthetic_corpus, SyntheticSpec};
use beliefmap::pipeline::{builtin_base, induce_stopwords, InductionSettings};

fn main() -> beliefmap::Result<()> {
    let corpus = generate_synthetic_corpus(&SyntheticSpec::four_rooms(), 2)?;
    let list = induce_stopwords(
        &corpus,
        builtin_base(),
        &["d20".to_string()],
        &InductionSettings::default(),
    )?;
    println!("{} base words, domain {:?}", list.base().len(), list.domain());
    for (player, words) in list.self_id() {
        println!("  {player}: {words:?}");
    }
    print!(
        "{}",
        list.to_text().lines().rev().take(3).collect::<Vec<_>>().join("\n")
    );
    println!();
    Ok(())
}
