//! Runs every experiment at the default configuration and prints verdicts.

use std::time::Instant;

use chlab::experiments::{Experiment, ExperimentConfig, Lab};

fn main() -> chlab::Result<()> {
    let cfg = ExperimentConfig::default();
    let lab = Lab::new(&cfg)?;
    for e in Experiment::ALL {
        let start = Instant::now();
        let r = e.run(&lab)?;
        println!("== {e} ({:.1?})", start.elapsed());
        for (k, v) in &r.verdicts {
            println!("  {k}: {}", v.as_str());
        }
        for (k, v) in &r.constants {
            println!("  {k} = {v:e}");
        }
        for (k, f) in &r.fits {
            println!(
                "  fit {k}: slope {:.4} residual {:.2e}",
                f.slope, f.residual
            );
        }
    }
    Ok(())
}
