//! One line per acceptance criterion; exits non-zero if any criterion fails.

use std::time::{Duration, Instant};

use ifp_syncnet::certify::check_theorem1;
use ifp_syncnet::cli::run_selftest;
use ifp_syncnet::graphnet::Digraph;
use ifp_syncnet::netsim::{simulate_agents, AgentModel, Protocol, SimConfig};
use ifp_syncnet::ode::{rk4_step, Rk4Work};
use ifp_syncnet::passivity::{ifp_index, routh_hurwitz, Polynomial, RationalTF};
use ifp_syncnet::scenarios::{
    build_platoon, harmonic_counterexample, platoon_transform_gap, remark1_counterexample, run_platoon, run_traffic,
    PlatoonSpec, Remark1Params, Topology, TrafficSpec,
};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<(bool, String), Box<dyn std::error::Error>>;

// --- 1: straight-road chain threshold 2αK < 1 ---
const CHAIN_SYNC_TOL: f64 = 1e-3;
const CHAIN_DESYNC_TOL: f64 = 0.1;
const CHAIN_HORIZON: f64 = 100.0;
const CHAIN_DT: f64 = 1e-3;
const CHAIN_RUNTIME: Duration = Duration::from_secs(5);

fn chain_threshold() -> Outcome {
    let mut details = Vec::new();
    let mut pass = true;
    for (alpha, want_sync) in [(0.4, true), (0.6, false)] {
        let spec = TrafficSpec {
            n: 2,
            topology: Topology::ClassicChain { k: 1.0 },
            delays: vec![alpha; 2],
            v_init: vec![13.0, 16.0],
            v0: 15.0,
        };
        let start = Instant::now();
        let (gap, diverged) = match run_traffic(&spec, &SimConfig::new(CHAIN_DT, CHAIN_HORIZON)) {
            Ok((_, sim)) => (sim.metrics.pairwise_sup_tail, false),
            Err(ifp_syncnet::scenarios::ScenarioError::Sim(ifp_syncnet::netsim::SimError::NumericalBlowup { .. })) => {
                (f64::INFINITY, true)
            }
            Err(e) => return Err(e.into()),
        };
        let elapsed = start.elapsed();
        let ok = if want_sync { gap < CHAIN_SYNC_TOL } else { diverged || gap > CHAIN_DESYNC_TOL };
        pass &= ok && elapsed < CHAIN_RUNTIME;
        details.push(format!(
            "alpha={alpha}: tail gap {gap:.2e} (want {}), {:.2}s",
            if want_sync { "< 1e-3" } else { "> 0.1 or divergence" },
            elapsed.as_secs_f64()
        ));
    }
    Ok((pass, details.join("; ")))
}

// --- 2: cubic family against the closed form and a dense sweep ---
const CUBIC_REL_TOL: f64 = 1e-6;
const CUBIC_SWEEP_POINTS: usize = 1_000_000;

fn cubic_closed_form(p: f64, q: f64) -> f64 {
    if q > p * p / 2.0 {
        1.0 / (p * q - p.powi(3) / 4.0)
    } else {
        p / (q * q)
    }
}

fn dense_sweep(p: f64, q: f64) -> f64 {
    // −Re W(iω) = p / ((q − ω²)² + p²ω²) for W = 1/(λ(λ² + pλ + q))
    let (lo, hi) = (-6.0f64, 6.0f64);
    (0..CUBIC_SWEEP_POINTS)
        .map(|k| {
            let w = 10f64.powf(lo + (hi - lo) * k as f64 / (CUBIC_SWEEP_POINTS - 1) as f64);
            let a = q - w * w;
            p / (a * a + p * p * w * w)
        })
        .fold(0.0, f64::max)
}

fn cubic_family() -> Outcome {
    let vals = [0.5, 1.0, 2.0, 4.0];
    let mut worst: f64 = 0.0;
    let mut worst_sweep: f64 = 0.0;
    for &p in &vals {
        for &q in &vals {
            let w = RationalTF::from_coeffs(&[1.0], &[0.0, q, p, 1.0])?;
            let alpha = ifp_index(&w)?.alpha;
            let exact = cubic_closed_form(p, q);
            worst = worst.max((alpha - exact).abs() / exact);
            worst_sweep = worst_sweep.max((dense_sweep(p, q) - exact).abs() / exact);
        }
    }
    Ok((
        worst <= CUBIC_REL_TOL && worst_sweep <= CUBIC_REL_TOL,
        format!("max rel err vs closed form {worst:.2e}, closed form vs 1e6-point sweep {worst_sweep:.2e} (tol 1e-6)"),
    ))
}

// --- 3: vehicle index 1/μ² ---
const VEHICLE_TOL: f64 = 1e-8;
const VEHICLE_OMEGA_STAR_TOL: f64 = 1e-3;

fn vehicle_index() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut worst_omega: f64 = 0.0;
    for mu in [1.0, 2.0, 4.0] {
        for frac in [0.1, 0.5, 0.9] {
            let tau = frac / (2.0 * mu);
            let cert = ifp_index(&RationalTF::from_coeffs(&[1.0], &[0.0, mu, 1.0, tau])?)?;
            worst = worst.max((cert.alpha - 1.0 / (mu * mu)).abs());
            worst_omega = worst_omega.max(cert.omega_star);
        }
    }
    Ok((
        worst < VEHICLE_TOL && worst_omega < VEHICLE_OMEGA_STAR_TOL,
        format!("max |alpha − 1/mu^2| {worst:.2e} (tol 1e-8), max omega* {worst_omega:.1e}"),
    ))
}

// --- 4: all-to-all gain bound, predicted vs observed ---
const BAND: f64 = 0.05;

fn remark1_grid() -> Outcome {
    let config = SimConfig::new(0.01, 600.0).with_stride(10);
    let pq = [(1.0, 1.0), (2.0, 3.0), (0.5, 2.0), (3.0, 1.0), (1.5, 1.5)];
    let ratios = [0.4, 0.85, 1.2, 2.0];
    let mut points = Vec::new();
    for (i, &(p, q)) in pq.iter().enumerate() {
        for (j, n) in (2..=5usize).enumerate() {
            let r = ratios[(i + j) % ratios.len()];
            points.push(Remark1Params { p, q, n_agents: n, kappa: r * p * q / (n - 1) as f64 });
        }
    }
    let mut mismatches = Vec::new();
    let mut evaluated = 0;
    for params in &points {
        let boundary = params.kappa * (params.n_agents - 1) as f64;
        if (boundary - params.p * params.q).abs() <= BAND * params.p * params.q {
            continue;
        }
        evaluated += 1;
        let out = remark1_counterexample(*params, &config)?;
        if out.predicted != out.observed {
            mismatches.push(format!("({},{},{},{:.3})", params.p, params.q, params.n_agents, params.kappa));
        }
    }
    let mut named = Vec::new();
    let mut named_ok = true;
    for (kappa, want) in [(0.4, true), (0.6, false)] {
        let params = Remark1Params { p: 1.0, q: 1.0, n_agents: 3, kappa };
        let out = remark1_counterexample(params, &config)?;
        named_ok &= out.observed == want && out.predicted == want;
        named.push(format!("kappa={kappa}: predicted {} observed {}", out.predicted, out.observed));
    }
    let pass = mismatches.is_empty() && named_ok;
    Ok((
        pass,
        format!(
            "{}/{evaluated} grid points disagree {:?}; {}",
            mismatches.len(),
            mismatches,
            named.join(", ")
        ),
    ))
}

// --- 5: harmonic oscillators on a spanning tree ---
const HARMONIC_ANALYTIC_TOL: f64 = 1e-9;
const HARMONIC_SIM_REL_TOL: f64 = 0.02;

fn harmonic() -> Outcome {
    let out = harmonic_counterexample(1.0, 2.0, 1.0, &SimConfig::new(0.01, 100.0).with_tol(0.1))?;
    let exact = 2.0 / 13f64.sqrt();
    let analytic_err = (out.amplitude_ratio - exact).abs();
    let sim_err = (out.observed_ratio / out.amplitude_ratio - 1.0).abs();
    Ok((
        analytic_err < HARMONIC_ANALYTIC_TOL && sim_err < HARMONIC_SIM_REL_TOL && !out.sim.metrics.synchronized,
        format!(
            "|W(i2)| err {analytic_err:.1e}, simulated ratio {:.5} (rel err {sim_err:.1e}), synchronized {}",
            out.observed_ratio, out.sim.metrics.synchronized
        ),
    ))
}

// --- 6: dissipation identities on random instances ---
const IDENTITY_RUNTIME: Duration = Duration::from_secs(10);

fn identities() -> Outcome {
    let start = Instant::now();
    let report = run_selftest(2024, 200, 100);
    let elapsed = start.elapsed();
    Ok((
        report.passed && elapsed < IDENTITY_RUNTIME,
        format!(
            "identity residual {:.1e} (< 1e-10), inequality margin {:.1e} (>= −1e-10), shift residual {:.1e} (< 1e-12), {:.2}s",
            report.max_identity_residual,
            report.min_inequality_margin,
            report.max_shift_residual,
            elapsed.as_secs_f64()
        ),
    ))
}

// --- 7: certified heterogeneous LTI networks synchronize ---
const SUITE_TOL: f64 = 1e-3;

fn lti_suite() -> Outcome {
    let library: Vec<RationalTF> = [
        (vec![1.0], vec![0.0, 1.0]),
        (vec![1.0], vec![0.0, 3.0, 2.0, 1.0]),
        (vec![1.0], vec![0.0, 1.0, 1.0]),
        (vec![2.0], vec![0.0, 4.0, 3.0, 1.0]),
        (vec![1.0, 1.0], vec![0.0, 2.0, 1.0]),
        (vec![1.0], vec![0.0, 1.0, 1.0, 0.2]),
    ]
    .into_iter()
    .map(|(n, d)| RationalTF::from_coeffs(&n, &d))
    .collect::<Result<_, _>>()?;
    let alphas: Vec<f64> = library.iter().map(|tf| ifp_index(tf).map(|c| c.alpha)).collect::<Result<_, _>>()?;

    let graphs: Vec<(&str, Digraph)> = vec![
        ("ring3", Digraph::directed_ring(3, 1.0)?),
        ("ring4", Digraph::directed_ring(4, 1.0)?),
        ("biring5", Digraph::bidirectional_ring(5, 1.0)?),
        ("complete4", Digraph::complete(4, 1.0)?),
        ("pair", Digraph::new(&[vec![0.0, 1.0], vec![2.0, 0.0]])?),
        ("wheel", Digraph::new(&[
            vec![0.0, 1.0, 0.0, 0.0, 1.0],
            vec![0.0, 0.0, 2.0, 0.0, 0.0],
            vec![1.0, 0.0, 0.0, 1.0, 0.0],
            vec![0.5, 0.0, 0.0, 0.0, 1.0],
            vec![0.0, 1.0, 0.0, 0.0, 0.0],
        ])?),
    ];
    let mut results = Vec::new();
    let mut pass = true;
    let mut count = 0;
    for (gi, (name, g)) in graphs.iter().enumerate() {
        for shift in 0..2 {
            let n = g.n();
            let picks: Vec<usize> = (0..n).map(|i| (i + gi + 3 * shift) % library.len()).collect();
            let a: Vec<f64> = picks.iter().map(|&k| alphas[k]).collect();
            // scale weights to 80% of the weak-coupling limit
            let worst = g.d_plus().iter().zip(&a).map(|(d, a)| 2.0 * a * d).fold(0.0, f64::max);
            let scale = if worst > 0.0 { 0.8 / worst } else { 1.0 };
            let rows: Vec<Vec<f64>> = g.to_rows().iter().map(|r| r.iter().map(|w| w * scale).collect()).collect();
            let g = Digraph::new(&rows)?;
            if !check_theorem1(&g, &a)?.passes {
                return Ok((false, format!("{name}: suite network failed its own certificate")));
            }
            let agents = picks.iter().map(|&k| AgentModel::lti(library[k].clone())).collect::<Result<Vec<_>, _>>()?;
            let init = agents
                .iter()
                .enumerate()
                .map(|(i, ag)| ag.rest_state_with_output(&[2.0 * i as f64 - 3.0]).unwrap_or_default())
                .collect();
            let config = SimConfig::new(0.01, 600.0).with_stride(10).with_initial_states(init);
            let sim = simulate_agents(agents, Protocol::plain(g), &config)?;
            count += 1;
            let gap = sim.metrics.pairwise_sup_tail;
            pass &= gap < SUITE_TOL;
            results.push(format!("{name}/{shift}: {gap:.1e}"));
        }
    }
    Ok((pass && count >= 10, format!("{count} networks, tail gaps [{}] (tol 1e-3)", results.join(", "))))
}

// --- 8: certified platoon ---
const PLATOON_SPACING_TOL: f64 = 1e-3;
const PLATOON_SPEED_TOL: f64 = 1e-3;
const PLATOON_TRANSFORM_TOL: f64 = 1e-9;

fn platoon() -> Outcome {
    let spec = PlatoonSpec::three_vehicle_example().with_gap_perturbation(0, 2.0);
    let build = build_platoon(&spec)?;
    let config = SimConfig::new(0.01, 200.0);
    let run = run_platoon(&spec, &config)?;
    let spacing = run.terminal_spacing_errors().iter().fold(0.0f64, |m, e| m.max(e.abs()));
    let speed = run.terminal_velocity_errors().iter().fold(0.0f64, |m, e| m.max(e.abs()));
    let gap = platoon_transform_gap(&spec, &config)?;
    Ok((
        build.certified() && spacing < PLATOON_SPACING_TOL && speed < PLATOON_SPEED_TOL && gap <= PLATOON_TRANSFORM_TOL,
        format!(
            "certified {}, |spacing err| {spacing:.1e} m, |speed err| {speed:.1e} m/s at t=200, transform gap {gap:.1e}",
            build.certified()
        ),
    ))
}

// --- 9: delayed integrators on a bidirectional ring ---
fn delayed_ring() -> Outcome {
    let delays = [0.5, 0.8, 0.3, 0.7, 0.6];
    let g = Digraph::bidirectional_ring(5, 0.3)?;
    let certified = check_theorem1(&g, &delays)?.passes;
    let agents = delays.iter().map(|&h| AgentModel::delayed_integrator(h, 1)).collect::<Result<Vec<_>, _>>()?;
    let config = SimConfig::new(0.01, 200.0)
        .with_initial_states(vec![vec![10.0], vec![12.0], vec![15.0], vec![18.0], vec![20.0]]);
    let sim = simulate_agents(agents, Protocol::plain(g), &config)?;
    let gap = sim.metrics.pairwise_sup_tail;
    Ok((certified && gap < 1e-3, format!("certified {certified}, tail gap {gap:.1e} (tol 1e-3)")))
}

// --- 10: numerics ---
fn rk4_error(dt: f64) -> f64 {
    let steps = (2.0 / dt).round() as usize;
    let mut x = [1.0];
    let mut work = Rk4Work::new(1);
    for k in 0..steps {
        let t = k as f64 * dt;
        rk4_step(&mut x, dt, &mut work, |c, x, dx| {
            dx[0] = -x[0] + (t + c * dt).sin();
            Ok::<(), ()>(())
        })
        .expect("infallible");
    }
    (x[0] - (1.5 * (-2.0f64).exp() + (2.0f64.sin() - 2.0f64.cos()) / 2.0)).abs()
}

fn companion_max_re(coeffs: &[f64]) -> f64 {
    let n = coeffs.len() - 1;
    let mut c = DMatrix::<f64>::zeros(n, n);
    for k in 1..n {
        c[(k, k - 1)] = 1.0;
    }
    for k in 0..n {
        c[(k, n - 1)] = -coeffs[k] / coeffs[n];
    }
    c.complex_eigenvalues().iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max)
}

fn numerics() -> Outcome {
    let ratio = rk4_error(0.05) / rk4_error(0.025);
    let rk4_ok = (8.0..=32.0).contains(&ratio);

    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut worst_residual: f64 = 0.0;
    let mut positive = true;
    for _ in 0..100 {
        let n = rng.gen_range(2..=8);
        let density = rng.gen_range(0.0..0.7);
        let g = ifp_syncnet::cli::random_strongly_connected(&mut rng, n, density);
        let p = g.perron_weights()?;
        worst_residual = worst_residual.max(p.residual(&g));
        positive &= p.p.iter().all(|&x| x > 0.0);
    }

    let mut disagreements = 0;
    let mut tested = 0;
    while tested < 500 {
        let deg = rng.gen_range(1..=6);
        let mut coeffs: Vec<f64> = (0..=deg).map(|_| rng.gen_range(-1.0..3.0)).collect();
        coeffs[deg] = rng.gen_range(0.2..2.0);
        let max_re = companion_max_re(&coeffs);
        if max_re.abs() < 1e-6 {
            continue;
        }
        tested += 1;
        if routh_hurwitz(&Polynomial::new(coeffs))? != (max_re < 0.0) {
            disagreements += 1;
        }
    }
    Ok((
        rk4_ok && worst_residual < 1e-10 && positive && disagreements == 0,
        format!(
            "rk4 halving ratio {ratio:.2} (16 ± x2), perron residual {worst_residual:.1e} positive {positive}, routh disagreements {disagreements}/500"
        ),
    ))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("chain threshold 2αK < 1", chain_threshold),
        ("cubic IFP index oracle", cubic_family),
        ("vehicle IFP index 1/μ²", vehicle_index),
        ("all-to-all gain bound", remark1_grid),
        ("harmonic spanning-tree counterexample", harmonic),
        ("dissipation identities", identities),
        ("certified LTI networks synchronize", lti_suite),
        ("certified CACC platoon", platoon),
        ("delayed integrator ring", delayed_ring),
        ("numerics hygiene", numerics),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let (pass, detail) = match f() {
            Ok(r) => r,
            Err(e) => (false, format!("error: {e}")),
        };
        if !pass {
            failed += 1;
        }
        println!("criterion {:>2} {} {name}: {detail}", i + 1, if pass { "PASS" } else { "FAIL" });
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
