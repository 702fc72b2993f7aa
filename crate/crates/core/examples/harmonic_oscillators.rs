// Two passive oscillators on a spanning tree that is not strongly connected.

use ifp_syncnet::netsim::SimConfig;
use ifp_syncnet::scenarios::harmonic_counterexample;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let out = harmonic_counterexample(1.0, 2.0, 1.0, &SimConfig::new(0.01, 100.0).with_tol(0.1))?;
    println!("|W(iω₂)| = {:.6} (2/√13 = {:.6})", out.amplitude_ratio, 2.0 / 13f64.sqrt());
    println!("simulated amplitude ratio {:.6}", out.observed_ratio);
    println!("synchronized: {}", out.sim.metrics.synchronized);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
