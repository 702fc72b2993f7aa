use ifp_syncnet::certify::{check_theorem1, tech_identity_check, tech_inequality_check};
use ifp_syncnet::graphnet::Digraph;
use ifp_syncnet::netsim::{couple_plain, simulate_agents, AgentModel, Protocol, Signal, SimConfig};
use ifp_syncnet::ode::{rk4_step, Rk4Work};
use ifp_syncnet::passivity::{ifp_index, ifp_shift_identity_check, routh_hurwitz, Polynomial, RationalTF};
use nalgebra::DMatrix;
use proptest::prelude::*;

fn adjacency(max_n: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    (1..=max_n).prop_flat_map(|n| {
        prop::collection::vec(prop::collection::vec(prop_oneof![3 => Just(0.0), 2 => 0.1f64..3.0], n), n).prop_map(
            |mut rows| {
                for (i, r) in rows.iter_mut().enumerate() {
                    r[i] = 0.0;
                }
                rows
            },
        )
    })
}

/// Reachability by Warshall's transitive closure.
fn closure(rows: &[Vec<f64>]) -> Vec<Vec<bool>> {
    let n = rows.len();
    // reach[a][b]: a walk a → b exists; arc k → j when rows[j][k] > 0
    let mut reach: Vec<Vec<bool>> = (0..n).map(|a| (0..n).map(|b| a == b || rows[b][a] > 0.0).collect()).collect();
    for k in 0..n {
        for a in 0..n {
            for b in 0..n {
                if reach[a][k] && reach[k][b] {
                    reach[a][b] = true;
                }
            }
        }
    }
    reach
}

fn strongly_connected(max_n: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    adjacency(max_n).prop_map(|mut rows| {
        // close a ring so every node is reachable
        let n = rows.len();
        if n > 1 {
            for j in 0..n {
                let k = (j + n - 1) % n;
                if rows[j][k] == 0.0 {
                    rows[j][k] = 0.5;
                }
            }
        }
        rows
    })
}

fn outputs(n: usize, m: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    prop::collection::vec(prop::collection::vec(-5.0f64..5.0, m), n)
}

fn hurwitz_by_companion(coeffs: &[f64]) -> f64 {
    let n = coeffs.len() - 1;
    let lead = coeffs[n];
    let mut c = DMatrix::<f64>::zeros(n, n);
    for k in 1..n {
        c[(k, k - 1)] = 1.0;
    }
    for k in 0..n {
        c[(k, n - 1)] = -coeffs[k] / lead;
    }
    c.complex_eigenvalues().iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn connectivity_matches_transitive_closure(rows in adjacency(7)) {
        let g = Digraph::new(&rows).unwrap();
        let reach = closure(&rows);
        let n = rows.len();
        let strong = (0..n).all(|a| (0..n).all(|b| reach[a][b]));
        let quasi = (0..n).any(|r| (0..n).all(|b| reach[r][b]));
        let report = g.connectivity();
        prop_assert_eq!(report.strongly_connected, strong);
        prop_assert_eq!(report.quasi_strongly_connected, quasi);
        prop_assert_eq!(g.is_strongly_connected(), strong);
        // components are classes of mutual reachability
        let mut seen = vec![false; n];
        let mut classes = 0;
        for a in 0..n {
            if !seen[a] {
                classes += 1;
                for b in 0..n {
                    if reach[a][b] && reach[b][a] {
                        seen[b] = true;
                    }
                }
            }
        }
        prop_assert_eq!(report.scc_count, classes);
        for r in 0..n {
            let from = g.reachable_from(r);
            for b in 0..n {
                prop_assert_eq!(from[b], reach[r][b]);
            }
        }
    }

    #[test]
    fn perron_weights_are_positive_left_null_vectors(rows in strongly_connected(8)) {
        let g = Digraph::new(&rows).unwrap();
        let p = g.perron_weights().unwrap();
        prop_assert!(p.p.iter().all(|&x| x > 0.0));
        prop_assert!((p.p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        prop_assert!(p.residual(&g) < 1e-10);
    }

    #[test]
    fn routh_agrees_with_companion_roots(coeffs in prop::collection::vec(-3.0f64..3.0, 2..=7)) {
        let lead = *coeffs.last().unwrap();
        prop_assume!(lead.abs() > 0.05);
        let max_re = hurwitz_by_companion(&coeffs);
        // skip polynomials with roots too close to the axis to classify robustly
        prop_assume!(max_re.abs() > 1e-6);
        prop_assert_eq!(routh_hurwitz(&Polynomial::new(coeffs)).unwrap(), max_re < 0.0);
    }

    #[test]
    fn routh_agrees_on_polynomials_with_known_roots(
        reals in prop::collection::vec(prop_oneof![-4.0f64..-0.01, 0.01f64..4.0], 0..3),
        pairs in prop::collection::vec((prop_oneof![-3.0f64..-0.01, 0.01f64..3.0], 0.1f64..3.0), 0..3),
        lead in prop_oneof![-3.0f64..-0.2, 0.2f64..3.0],
    ) {
        prop_assume!(!reals.is_empty() || !pairs.is_empty());
        let mut roots: Vec<num_complex::Complex64> = reals.iter().map(|&r| r.into()).collect();
        for &(re, im) in &pairs {
            roots.push(num_complex::Complex64::new(re, im));
            roots.push(num_complex::Complex64::new(re, -im));
        }
        let hurwitz = roots.iter().all(|z| z.re < 0.0);
        let p = Polynomial::from_roots(lead, &roots);
        prop_assert_eq!(routh_hurwitz(&p).unwrap(), hurwitz);
        prop_assert_eq!(hurwitz_by_companion(p.coeffs()) < 0.0, hurwitz);
    }

    #[test]
    fn cubic_index_matches_closed_form(p in 0.3f64..5.0, q in 0.3f64..5.0) {
        let w = RationalTF::from_coeffs(&[1.0], &[0.0, q, p, 1.0]).unwrap();
        let expect = if q > p * p / 2.0 { 1.0 / (p * q - p.powi(3) / 4.0) } else { p / (q * q) };
        let alpha = ifp_index(&w).unwrap().alpha;
        prop_assert!((alpha - expect).abs() <= 1e-6 * expect, "{} vs {}", alpha, expect);
    }

    #[test]
    fn shift_identity_holds(alpha in 0.01f64..3.0, frac in 0.001f64..0.999, y in prop::collection::vec(-10.0f64..10.0, 1..4)) {
        let b = frac / (2.0 * alpha);
        let u: Vec<f64> = y.iter().map(|v| 0.3 - 0.7 * v).collect();
        prop_assert!(ifp_shift_identity_check(alpha, b, &y, &u).unwrap() < 1e-10);
    }

    #[test]
    fn dissipation_identity_and_inequality(
        (rows, y) in strongly_connected(6).prop_flat_map(|rows| {
            let n = rows.len();
            (Just(rows), (1usize..=3).prop_flat_map(move |m| outputs(n, m)))
        }),
        frac in 0.0f64..0.999,
    ) {
        let g = Digraph::new(&rows).unwrap();
        prop_assert!(tech_identity_check(&g, &y).unwrap() < 1e-10 * (1.0 + y.iter().flatten().map(|v| v * v).sum::<f64>()));
        let alphas: Vec<f64> = g.d_plus().iter().map(|d| if *d > 0.0 { frac / (2.0 * d) } else { 0.0 }).collect();
        prop_assert!(tech_inequality_check(&g, &alphas, &y).unwrap() >= -1e-9);
    }

    #[test]
    fn coupling_is_translation_invariant(
        (rows, y) in adjacency(6).prop_flat_map(|rows| { let n = rows.len(); (Just(rows), outputs(n, 2)) }),
        shift in prop::collection::vec(-100.0f64..100.0, 2),
    ) {
        let g = Digraph::new(&rows).unwrap();
        let moved: Vec<Vec<f64>> = y.iter().map(|v| vec![v[0] + shift[0], v[1] + shift[1]]).collect();
        let a = couple_plain(&g, &y).unwrap();
        let b = couple_plain(&g, &moved).unwrap();
        for (ua, ub) in a.iter().zip(&b) {
            for (x, z) in ua.iter().zip(ub) {
                prop_assert!((x - z).abs() < 1e-9);
            }
        }
        let total: f64 = a.iter().map(|u| u[0]).sum();
        // column sums vanish only for balanced graphs; the row form always sums to Σ_jk a_jk (y_k − y_j)
        let direct: f64 = (0..g.n()).flat_map(|j| (0..g.n()).map(move |k| (j, k))).map(|(j, k)| g.weight(j, k) * (y[k][0] - y[j][0])).sum();
        prop_assert!((total - direct).abs() < 1e-9);
    }
}

fn rk4_error(dt: f64) -> f64 {
    // ẋ = −x + sin t, x(0) = 1; exact x = 1.5 e^{−t} + (sin t − cos t)/2
    let steps = (2.0 / dt).round() as usize;
    let mut x = [1.0];
    let mut work = Rk4Work::new(1);
    for k in 0..steps {
        let t = k as f64 * dt;
        rk4_step(&mut x, dt, &mut work, |c, x, dx| {
            dx[0] = -x[0] + (t + c * dt).sin();
            Ok::<(), ()>(())
        })
        .unwrap();
    }
    let t = 2.0f64;
    (x[0] - (1.5 * (-t).exp() + (t.sin() - t.cos()) / 2.0)).abs()
}

#[test]
fn rk4_is_fourth_order() {
    let ratio = rk4_error(0.1) / rk4_error(0.05);
    assert!((8.0..=32.0).contains(&ratio), "ratio {ratio}");
}

#[test]
fn delayed_integrator_follows_sine_oracle() {
    // ẏ = u(t − h), u(s) = sin s for all s (history included): y = cos h − cos(t − h)
    let h = 0.35;
    let run = |dt: f64| {
        let agent = AgentModel::delayed_integrator(h, 1).unwrap();
        let proto = Protocol::Reference {
            graph: Digraph::empty(1).unwrap(),
            b: vec![0.0],
            u_bar: vec![vec![Signal::Sine { amplitude: 1.0, omega: 1.0, phase: 0.0, offset: 0.0 }]],
            y_bar: vec![Signal::zero()],
        };
        let mut config = SimConfig::new(dt, 10.0);
        config.initial_histories = vec![Some(vec![Signal::Sine { amplitude: 1.0, omega: 1.0, phase: 0.0, offset: 0.0 }])];
        let sim = simulate_agents(vec![agent], proto, &config).unwrap();
        sim.times
            .iter()
            .enumerate()
            .map(|(k, t)| (sim.output(0, k)[0] - (h.cos() - (t - h).cos())).abs())
            .fold(0.0, f64::max)
    };
    let coarse = run(0.05);
    let fine = run(0.025);
    assert!(fine < 1e-7, "{fine}");
    let ratio = coarse / fine;
    assert!((8.0..=32.0).contains(&ratio), "{coarse} / {fine}");
}

#[test]
fn certified_random_networks_synchronize() {
    use ifp_syncnet::cli::random_strongly_connected;
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
    let library = [
        RationalTF::from_coeffs(&[1.0], &[0.0, 1.0]).unwrap(),
        RationalTF::from_coeffs(&[1.0], &[0.0, 3.0, 2.0, 1.0]).unwrap(),
        RationalTF::from_coeffs(&[1.0], &[0.0, 1.0, 1.0]).unwrap(),
        RationalTF::from_coeffs(&[1.0], &[0.0, 2.0, 1.0, 0.1]).unwrap(),
    ];
    let alphas: Vec<f64> = library.iter().map(|tf| ifp_index(tf).unwrap().alpha).collect();
    for case in 0..6 {
        let n = 3 + case % 3;
        let g = random_strongly_connected(&mut rng, n, 0.3);
        let picks: Vec<usize> = (0..n).map(|i| (i + case) % library.len()).collect();
        let a: Vec<f64> = picks.iter().map(|&k| alphas[k]).collect();
        // rescale the weights so the strongest node sits at 80% of its limit
        let worst = g.d_plus().iter().zip(&a).map(|(d, a)| 2.0 * a * d).fold(0.0, f64::max);
        let scale = if worst > 0.0 { 0.8 / worst } else { 1.0 };
        let g = Digraph::new(&g.to_rows().iter().map(|r| r.iter().map(|w| w * scale).collect()).collect::<Vec<_>>()).unwrap();
        assert!(check_theorem1(&g, &a).unwrap().passes);
        let agents: Vec<AgentModel> = picks.iter().map(|&k| AgentModel::lti(library[k].clone()).unwrap()).collect();
        let init = agents.iter().enumerate().map(|(i, ag)| ag.rest_state_with_output(&[i as f64 - 1.0]).unwrap()).collect();
        let sim = simulate_agents(agents, Protocol::plain(g), &SimConfig::new(0.01, 400.0).with_initial_states(init)).unwrap();
        assert!(sim.metrics.synchronized, "case {case}: tail gap {}", sim.metrics.pairwise_sup_tail);
    }
}
