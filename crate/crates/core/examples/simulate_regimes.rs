//! Runs the same population at three influence horizons and prints the
//! regime each one settles into.

use beliefmap::sim::{run_simulation, Environment, SimConfig};

fn main() -> beliefmap::Result<()> {
    for sih in [0.0, 0.3, 2.0] {
        let cfg = SimConfig {
            sih,
            seed: 7,
            ..SimConfig::default()
        };
        let out = run_simulation(&cfg, &Environment::for_config(&cfg))?;
        let r = &out.report;
        println!(
            "sih {sih:>3}: {:<8} polarization {:.2}  spread {:.3}  clusters {}",
            r.regime.to_string(),
            r.polarization,
            r.spread,
            r.cluster_count
        );
    }
    Ok(())
}
