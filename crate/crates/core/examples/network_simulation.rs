// Heterogeneous LTI agents on a strongly connected digraph: certify, then simulate.

use ifp_syncnet::certify::check_theorem1;
use ifp_syncnet::graphnet::Digraph;
use ifp_syncnet::netsim::{simulate_agents, AgentModel, Protocol, SimConfig};
use ifp_syncnet::passivity::{ifp_index, RationalTF};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let tfs = [
        RationalTF::from_coeffs(&[1.0], &[0.0, 1.0])?,
        RationalTF::from_coeffs(&[1.0], &[0.0, 3.0, 2.0, 1.0])?,
        RationalTF::from_coeffs(&[1.0, 1.0], &[0.0, 2.0, 1.0])?,
        RationalTF::from_coeffs(&[2.0], &[0.0, 4.0, 3.0, 1.0])?,
    ];
    let alphas = tfs.iter().map(|tf| ifp_index(tf).map(|c| c.alpha)).collect::<Result<Vec<_>, _>>()?;
    println!("indices: {alphas:?}");

    let g = Digraph::directed_ring(4, 0.5)?;
    let verdict = check_theorem1(&g, &alphas)?;
    println!("certificate passes: {} (min slack {:.3})", verdict.passes, verdict.min_slack());

    let agents = tfs.into_iter().map(AgentModel::lti).collect::<Result<Vec<_>, _>>()?;
    let initial = agents
        .iter()
        .zip([1.0, -2.0, 0.5, 3.0])
        .map(|(a, y0)| a.rest_state_with_output(&[y0]).unwrap_or_default())
        .collect();
    let config = SimConfig::new(0.01, 150.0).with_initial_states(initial).with_stride(10);
    let sim = simulate_agents(agents, Protocol::plain(g), &config)?;
    println!(
        "synchronized: {}, tail gap {:.2e}, final outputs {:?}",
        sim.metrics.synchronized,
        sim.metrics.pairwise_sup_tail,
        (0..4).map(|i| sim.last_output(i)[0]).collect::<Vec<_>>()
    );

    let path = std::env::temp_dir().join("ifp_syncnet_network_simulation.csv");
    sim.write_csv(std::fs::File::create(&path)?)?;
    println!("trajectories written to {}", path.display());
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
