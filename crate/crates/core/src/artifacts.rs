//! The fixed set of files an analysis run produces. The CLI writes them to a
//! directory and the server stores and serves the same bytes.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::mapgen::{export_map, ExportFormat};
use crate::pipeline::{AnalysisOutput, ConvergenceReport, TermList};

pub const MAP_DOT: &str = "map.dot";
pub const MAP_STRUCTURED: &str = "map.structured";
pub const PLACES_TSV: &str = "places.tsv";
pub const SPACES_TSV: &str = "spaces.tsv";
pub const CONVERGENCE_TSV: &str = "convergence.tsv";
pub const STOPWORDS_TXT: &str = "stopwords.txt";
pub const DIAGNOSTICS_TXT: &str = "diagnostics.txt";

/// Every artifact name, in the order they are rendered.
pub const ARTIFACT_NAMES: [&str; 7] = [
    MAP_DOT,
    MAP_STRUCTURED,
    PLACES_TSV,
    SPACES_TSV,
    CONVERGENCE_TSV,
    STOPWORDS_TXT,
    DIAGNOSTICS_TXT,
];

fn term_rows(out: &mut String, prefix: &str, list: &TermList) {
    for (rank, e) in list.entries.iter().enumerate() {
        let _ = writeln!(out, "{prefix}{}\t{}\t{}", rank + 1, e.term, e.score);
    }
}

pub fn places_tsv(places: &[TermList]) -> String {
    let mut out = String::from("sequence\trank\tterm\tscore\n");
    for (s, list) in places.iter().enumerate() {
        term_rows(&mut out, &format!("{s}\t"), list);
    }
    out
}

pub fn spaces_tsv(output: &AnalysisOutput) -> String {
    let mut out = String::from("group\tsequence\trank\tterm\tscore\n");
    for (group, lists) in &output.spaces {
        for (s, list) in lists.iter().enumerate() {
            term_rows(&mut out, &format!("{group}\t{s}\t"), list);
        }
    }
    out
}

/// One row per subset size: pairwise difference quartiles, then the
/// quartiles of each subset against all groups.
pub fn convergence_tsv(report: &ConvergenceReport) -> String {
    let mut out =
        String::from("k\tpairs\tmin\tq1\tmedian\tq3\tmax\tfull_min\tfull_q1\tfull_median\tfull_q3\tfull_max\n");
    for l in &report.levels {
        let (s, f) = (&l.summary, &l.versus_full);
        let _ = writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
            l.k,
            l.pairs.len(),
            s.min,
            s.q1,
            s.median,
            s.q3,
            s.max,
            f.min,
            f.q1,
            f.median,
            f.q3,
            f.max
        );
    }
    out
}

/// Marker posts per sequence and group, then the run's warnings.
pub fn diagnostics_txt(output: &AnalysisOutput) -> String {
    let mut out = String::new();
    for (s, cluster) in output.alignment.clusters.iter().enumerate() {
        for (group, post) in &cluster.posts {
            let _ = writeln!(out, "marker\t{s}\t{group}\t{post}");
        }
    }
    for d in &output.diagnostics {
        let _ = writeln!(out, "warning\t{}", d.replace(['\n', '\t'], " "));
    }
    out
}

/// Renders all artifacts as (file name, bytes), in [`ARTIFACT_NAMES`] order.
pub fn render_artifacts(output: &AnalysisOutput) -> Vec<(&'static str, Vec<u8>)> {
    vec![
        (MAP_DOT, export_map(&output.map, ExportFormat::Dot)),
        (MAP_STRUCTURED, export_map(&output.map, ExportFormat::Structured)),
        (PLACES_TSV, places_tsv(&output.places).into_bytes()),
        (SPACES_TSV, spaces_tsv(output).into_bytes()),
        (CONVERGENCE_TSV, convergence_tsv(&output.convergence).into_bytes()),
        (STOPWORDS_TXT, output.stopwords.to_text().into_bytes()),
        (DIAGNOSTICS_TXT, diagnostics_txt(output).into_bytes()),
    ]
}

/// Writes all artifacts into `dir`, creating it if needed.
pub fn write_artifacts(dir: &Path, output: &AnalysisOutput) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    render_artifacts(output)
        .into_iter()
        .map(|(name, bytes)| {
            let path = dir.join(name);
            std::fs::write(&path, bytes).map_err(|e| Error::io(&path, e))?;
            Ok(path)
        })
        .collect()
}
