//! Simulates noiseless measurements for the two-constellation scenario and
//! recovers the receivers with Gauss-Newton from a perturbed start.

use pseudorange_rigidity::fixtures;
use pseudorange_rigidity::gnss::{estimate, simulate_measurements, EstimateOptions, Init};

fn main() -> pseudorange_rigidity::Result<()> {
    let s = fixtures::fig1b_scenario();
    let y = simulate_measurements(&s, 0)?;
    for perturb in [0.01, 0.1] {
        let mut hits = 0;
        for seed in 0..20 {
            let opts = EstimateOptions {
                init: Init::Perturb(perturb),
                seed,
                ..Default::default()
            };
            let r = estimate(&s, &y, &opts)?;
            if r.converged && r.max_position_error(&s) < 1e-6 {
                hits += 1;
            }
        }
        println!("perturbation {perturb}: {hits}/20 runs recover the true positions");
    }
    let r = estimate(&s, &y, &EstimateOptions::default())?;
    println!(
        "seed 0: {} iterations, residual {:.2e}, position errors {:?}",
        r.iterations,
        r.residual,
        r.position_errors(&s)
    );
    Ok(())
}
