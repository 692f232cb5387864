//! Builds the belief map and prints it as dot, then round-trips the
//! structured export.

use beliefmap::config::AnalysisConfig;
use beliefmap::corpus::synth::{generate_synthetic_corpus, SyntheticSpec};
use beliefmap::mapgen::{export_map, import_map, ExportFormat};
use beliefmap::pipeline::analyze;

fn main() -> beliefmap::Result<()> {
    let corpus = generate_synthetic_corpus(&SyntheticSpec::four_rooms().with_posts_per_room(30), 9)?;
    let out = analyze(&corpus, &AnalysisConfig::default(), None)?;
    println!("{}", out.map.labels().join(" -> "));
    let dot = String::from_utf8(export_map(&out.map, ExportFormat::Dot)).expect("dot is utf-8");
    for line in dot.lines().take(14) {
        println!("{line}");
    }
    let structured = export_map(&out.map, ExportFormat::Structured);
    assert_eq!(import_map(&structured)?, out.map);
    println!("structured export: {} bytes, round-trips", structured.len());
    Ok(())
}
