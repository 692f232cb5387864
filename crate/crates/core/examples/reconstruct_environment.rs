//! Rebuilds the grid from the statements agents posted and scores it
//! against the true grid, for each regime.

use beliefmap::mapgen::{compare_graphs, reconstruct_environment, reconstruction_to_dot};
use beliefmap::sim::{run_simulation, Environment, SimConfig};

fn main() -> beliefmap::Result<()> {
    for (name, sih) in [("nomad", 0.0), ("flock", 0.3), ("stampede", 2.0)] {
        let cfg = SimConfig {
            sih,
            seed: 3,
            ..SimConfig::default()
        };
        let env = Environment::for_config(&cfg);
        let out = run_simulation(&cfg, &env)?;
        let rec = reconstruct_environment(&out.posts);
        let cmp = compare_graphs(&rec, &env);
        println!(
            "{name:<8} {} nodes {} edges  node jaccard {:.3}  edge jaccard {:.3}",
            rec.nodes.len(),
            rec.edges.len(),
            cmp.node_jaccard,
            cmp.edge_jaccard
        );
    }

    let cfg = SimConfig {
        agent_count: 3,
        steps: 400,
        speed: 0.01,
        sih: 0.0,
        ..SimConfig::default()
    };
    let env = Environment::for_config(&cfg);
    let rec = reconstruct_environment(&run_simulation(&cfg, &env)?.posts);
    print!("{}", reconstruction_to_dot(&rec));
    Ok(())
}
