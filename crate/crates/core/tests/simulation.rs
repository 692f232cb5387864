use std::collections::BTreeSet;

use beliefmap::mapgen::{compare_graphs, reconstruct_environment};
use beliefmap::sim::{posts_to_corpus, run_simulation, Environment, SimConfig, SimulationOutput};

fn run(sih: f64, seed: u64) -> (SimulationOutput, Environment) {
    let cfg = SimConfig {
        sih,
        seed,
        ..SimConfig::default()
    };
    let env = Environment::for_config(&cfg);
    (run_simulation(&cfg, &env).unwrap(), env)
}

fn node_jaccards(sih: f64, seeds: u64) -> Vec<f64> {
    (0..seeds)
        .map(|seed| {
            let (out, env) = run(sih, seed);
            compare_graphs(&reconstruct_environment(&out.posts), &env).node_jaccard
        })
        .collect()
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

#[test]
fn spread_shrinks_as_the_horizon_grows() {
    let spread = |sih| mean(&(0..20).map(|seed| run(sih, seed).0.report.spread).collect::<Vec<_>>());
    let (none, local, global) = (spread(0.0), spread(0.3), spread(2.0));
    assert!(none > local && local > global, "{none} {local} {global}");
}

#[test]
fn same_seed_gives_identical_post_logs() {
    let a = posts_to_corpus(&run(0.3, 9).0.posts).to_interchange().unwrap();
    let b = posts_to_corpus(&run(0.3, 9).0.posts).to_interchange().unwrap();
    assert_eq!(a, b);
    assert_ne!(a, posts_to_corpus(&run(0.3, 10).0.posts).to_interchange().unwrap());
}

#[test]
fn nomads_cover_the_grid() {
    for seed in 0..5 {
        let (out, env) = run(0.0, seed);
        let visited: BTreeSet<&str> = out.posts.iter().map(|p| p.statement.as_str()).collect();
        let expected = visited.len() as f64 / 100.0;
        let got = compare_graphs(&reconstruct_environment(&out.posts), &env).node_jaccard;
        assert_eq!(got, expected);
        assert!(got >= 0.9, "seed {seed}: {got}");
    }
}

#[test]
fn coverage_orders_nomad_flock_stampede() {
    let (n, f, s) = (
        mean(&node_jaccards(0.0, 10)),
        mean(&node_jaccards(0.3, 10)),
        mean(&node_jaccards(2.0, 10)),
    );
    assert!(n > f && f > s, "nomad {n:.3}, flock {f:.3}, stampede {s:.3}");
}

#[test]
fn stampede_covers_under_a_fifth_of_nomad_nodes() {
    let (n, s) = (mean(&node_jaccards(0.0, 10)), mean(&node_jaccards(2.0, 10)));
    assert!(s < 0.2 * n, "stampede covers {:.0}% of the nomad nodes", 100.0 * s / n);
}
