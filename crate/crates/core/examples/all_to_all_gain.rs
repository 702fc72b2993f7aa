// Identical IFP agents lose synchronization when the all-to-all gain grows.

use ifp_syncnet::netsim::SimConfig;
use ifp_syncnet::scenarios::{remark1_counterexample, Remark1Params};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let config = SimConfig::new(0.01, 200.0).with_stride(10);
    for kappa in [0.2, 0.4, 0.6] {
        let params = Remark1Params { p: 1.0, q: 1.0, n_agents: 3, kappa };
        let out = remark1_counterexample(params, &config)?;
        println!(
            "κ = {kappa}: κ(N−1) < pq is {}, κN < pq is {}, simulation synchronized = {} (diverged = {})",
            out.predicted, out.exact, out.observed, out.diverged
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
