// Delayed car following on a straight road and on a circular road.

use ifp_syncnet::netsim::SimConfig;
use ifp_syncnet::scenarios::{run_traffic, Topology, TrafficSpec};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    for alpha in [0.4, 0.6] {
        let chain = TrafficSpec {
            n: 2,
            topology: Topology::ClassicChain { k: 1.0 },
            delays: vec![alpha; 2],
            v_init: vec![13.0, 16.0],
            v0: 15.0,
        };
        let (build, sim) = run_traffic(&chain, &SimConfig::new(1e-3, 100.0).with_stride(100))?;
        println!(
            "chain K = 1, delay {alpha}: 2αK < 1 is {}, synchronized = {}, tail gap {:.2e}",
            build.certified(),
            sim.metrics.synchronized,
            sim.metrics.pairwise_sup_tail
        );
    }

    let ring = TrafficSpec {
        n: 5,
        topology: Topology::BidirectionalRing { a: 0.3 },
        delays: vec![0.5, 0.4, 0.6, 0.5, 0.7],
        v_init: vec![10.0, 12.5, 15.0, 17.5, 20.0],
        v0: 0.0,
    };
    let (build, sim) = run_traffic(&ring, &SimConfig::new(0.01, 200.0).with_stride(10))?;
    println!(
        "ring: certified = {}, synchronized = {}, common velocity {:.3} m/s",
        build.certified(),
        sim.metrics.synchronized,
        sim.last_output(0)[0]
    );
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
