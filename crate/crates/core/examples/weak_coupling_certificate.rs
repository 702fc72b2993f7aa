// Weak-coupling certificates on weighted digraphs, with per-node slack.

use ifp_syncnet::certify::{all_to_all_bound, all_to_all_laplacian_bound, check_theorem1, check_theorem2, check_theorem4, CaccGainSet};
use ifp_syncnet::graphnet::Digraph;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    // weighted 3-cycle 0 → 1 → 2 → 0
    let g = Digraph::new(&[vec![0.0, 0.0, 1.0], vec![2.0, 0.0, 0.0], vec![0.0, 3.0, 0.0]])?;
    println!("connectivity: {:?}", g.connectivity());
    let p = g.perron_weights()?;
    println!("perron weights {:?}, residual {:.1e}", p.p, p.residual(&g));

    let alphas = [0.4, 0.2, 0.1];
    let v = check_theorem1(&g, &alphas)?;
    println!("plain coupling: passes = {}, slack = {:?}", v.passes, v.slack);

    let v = check_theorem1(&g, &[0.6, 0.2, 0.1])?;
    println!("stronger deficit at node 0: passes = {}, failures = {:?}", v.passes, v.failures);

    // pin node 0 to a reference
    let v = check_theorem2(&g, &[0.2, 0.2, 0.1], &[0.5, 0.0, 0.0])?;
    println!("reference tracking: passes = {}, slack = {:?}", v.passes, v.slack);

    // a chain 0 → 1 is not strongly connected
    let chain = Digraph::new(&[vec![0.0, 0.0], vec![1.0, 0.0]])?;
    println!("chain: {:?}", check_theorem1(&chain, &[0.1, 0.1])?.failures);

    let gains = CaccGainSet { mu: vec![2.0; 3], eta: vec![0.4, 0.5, 1.0], nu: vec![0.5, 0.5], tau: vec![0.1; 3] };
    println!("platoon gains: {:?}", check_theorem4(&gains)?);

    // identical third-order agents, all-to-all weight 0.4 among three
    println!(
        "all-to-all κ = 0.4, N = 3: κ(N−1) test {}, disagreement-mode test {}",
        all_to_all_bound(1.0, 1.0, 3, 0.4),
        all_to_all_laplacian_bound(1.0, 1.0, 3, 0.4)
    );
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
