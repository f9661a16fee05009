use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rsqs::optimizer::*;

/// RK4 on the closed moment system of a Gaussian packet in `V = kappa y^2 / 2`:
/// `(<y^2>, <(yp + py)/2>, <p^2>)`.
fn riccati_variance(kappa: f64, t: f64) -> f64 {
    let rhs = |m: [f64; 3]| [2.0 * m[1], m[2] - kappa * m[0], -2.0 * kappa * m[1]];
    let mut m = [1.0, 0.0, 0.25];
    let steps = 20_000;
    let h = t / steps as f64;
    for _ in 0..steps {
        let add = |a: [f64; 3], b: [f64; 3], s: f64| [a[0] + s * b[0], a[1] + s * b[1], a[2] + s * b[2]];
        let k1 = rhs(m);
        let k2 = rhs(add(m, k1, h / 2.0));
        let k3 = rhs(add(m, k2, h / 2.0));
        let k4 = rhs(add(m, k3, h));
        for i in 0..3 {
            m[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
    }
    m[0]
}

#[test]
fn quadratic_saddle_follows_moment_equations() {
    let obj = quadratic(&[1.0, -1.0]);
    let r0 = 0.2;
    for t in [0.5, 1.0, 1.5] {
        let sim = simulate_packet(&obj, &[0.0, 0.0], r0, t, &SimulationConfig::default()).unwrap();
        let var = sim.variances();
        for (axis, kappa) in [(0, 1.0), (1, -1.0)] {
            let want = r0 * r0 * riccati_variance(kappa, t);
            let rel = (var[axis] - want).abs() / want;
            assert!(rel < 0.01, "t={t} axis={axis}: {} vs {want}", var[axis]);
        }
        assert!(var[1] > var[0]);
    }
}

#[test]
fn free_packet_disperses() {
    let obj = quadratic(&[0.0, 0.0]);
    let r0 = 0.2;
    for t in [0.0, 1.0, 2.0, 3.0] {
        let sim = simulate_packet(&obj, &[0.3, -0.1], r0, t, &SimulationConfig::default()).unwrap();
        // In the packet frame the width is 1, so Var_y(t) = 1 + t^2 / 4.
        let want = r0 * r0 * (1.0 + t * t / 4.0);
        for v in sim.variances() {
            assert!((v - want).abs() < 0.03 * want, "t={t}: {v} vs {want}");
        }
    }
}

#[test]
fn separable_matches_full_grid() {
    let obj = double_well(2);
    let x_t = [0.05, -0.02];
    let sep = SimulationConfig { fixed_steps: Some(400), mode: SampleMode::Separable, ..Default::default() };
    let full = SimulationConfig { mode: SampleMode::FullGrid, ..sep };
    let a = simulate_packet(&obj, &x_t, 0.2, 2.0, &sep).unwrap();
    let b = simulate_packet(&obj, &x_t, 0.2, 2.0, &full).unwrap();
    assert_eq!(a.states.len(), 2);
    assert_eq!(b.states.len(), 1);
    for axis in 0..2 {
        let total_a: f64 = a.marginal(axis).iter().sum();
        let total_b: f64 = b.marginal(axis).iter().sum();
        for (p, q) in a.marginal(axis).iter().zip(b.marginal(axis)) {
            assert!((p / total_a - q / total_b).abs() < 1e-8);
        }
    }
}

#[test]
fn unevolved_samples_have_packet_covariance() {
    let obj = quadratic(&[0.0]);
    let r0 = 0.2;
    let sim = simulate_packet(&obj, &[0.0], r0, 0.0, &SimulationConfig::default()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let xs: Vec<f64> = (0..4000).map(|_| sim.sample(&mut rng).unwrap()[0]).collect();
    let mean = xs.iter().sum::<f64>() / xs.len() as f64;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / xs.len() as f64;
    assert!(mean.abs() < 4.0 * r0 / (xs.len() as f64).sqrt());
    assert!((var - r0 * r0).abs() < 0.08 * r0 * r0, "{var}");
}

#[test]
fn saddle_direction_dominates_samples() {
    let obj = quadratic(&[1.0, -1.0]);
    let cfg = SimulationConfig::default();
    let t_full = escape_time(1.0, 1.0, 0.1, 2, 1.0).unwrap();
    let t = 1.5f64.max(t_full / 2.0).min(3.0);
    let sim = simulate_packet(&obj, &[0.0, 0.0], 0.2, t, &cfg).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let (mut s0, mut s1) = (0.0, 0.0);
    let draws = 30;
    for _ in 0..draws {
        let xi = sim.sample(&mut rng).unwrap();
        s0 += xi[0] * xi[0];
        s1 += xi[1] * xi[1];
    }
    // Ratio of two chi-square(30) sample variances: F(30, 30) upper 97.5% point is about 2.07.
    let expected = riccati_variance(-1.0, t) / riccati_variance(1.0, t);
    assert!(expected > 2.07 * 2.07);
    assert!(s1 / s0 > 2.07, "{}", s1 / s0);
}

#[test]
fn double_well_escapes_saddle() {
    let obj = double_well(2);
    let cfg = EscapeConfig::new(1e-2, 7);
    let out = pgd_qs(&obj, &cfg).unwrap();
    assert!(out.certified, "{out:?}");
    assert!(!out.calls.is_empty());
    assert!(out.x[0].abs() < 1e-2 && (out.x[1].abs() - 1.0).abs() < 1e-2);
    for call in &out.calls {
        let norm = call.delta.iter().map(|d| d * d).sum::<f64>().sqrt();
        assert!((norm - PerturbationScale::SqrtEpsOverRho.length(obj.rho, 1e-2)).abs() < 1e-15);
        assert_eq!(call.chose_plus, call.candidates.0 <= call.candidates.1);
    }
    let last = out.trace.last().unwrap();
    assert_eq!(last.sim_calls, out.calls.len());
}

#[test]
fn general_objective_escapes_on_full_grid() {
    let dw = double_well(2);
    let obj = ObjectiveSpec::new("dw_full", move |x| dw.eval(x), 2, 44.0, 48.0, 1.0, 2.0, vec![0.0, 1e-6]);
    let out = pgd_qs(&obj, &EscapeConfig::new(1e-2, 5)).unwrap();
    assert!(out.certified, "{out:?}");
}

#[test]
fn inverse_length_perturbation_overshoots() {
    let obj = double_well(2);
    let mut cfg = EscapeConfig::new(1e-2, 7);
    cfg.perturbation = PerturbationScale::SqrtRhoOverEps;
    cfg.max_iters = 200;
    let out = pgd_qs(&obj, &cfg).unwrap();
    assert!(!out.certified);
    let jump = out.calls[0].delta.iter().map(|d| d * d).sum::<f64>().sqrt();
    assert!(jump > 10.0 * obj.domain_radius);
}

#[test]
fn iteration_cap_returns_flagged_best() {
    let obj = double_well(2);
    let mut cfg = EscapeConfig::new(1e-2, 1);
    cfg.max_iters = 1;
    let out = pgd_qs(&obj, &cfg).unwrap();
    assert!(out.hit_max_iters && !out.certified);
}

#[test]
fn seeds_reproduce() {
    let obj = double_well(2);
    let a = pgd_qs(&obj, &EscapeConfig::new(1e-2, 42)).unwrap();
    let b = pgd_qs(&obj, &EscapeConfig::new(1e-2, 42)).unwrap();
    assert_eq!(a, b);
}
