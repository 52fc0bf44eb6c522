use proptest::prelude::*;

use twisting_core::dynamics::{
    compensating_torque, double_integrator_rhs, lyapunov, pendulum_rhs, twisting_control,
};
use twisting_core::sim::{read_samples_csv, simulate, Plant, Sample, SimConfig, Trajectory};
use twisting_core::tuning::{
    mu1_lower_bound, mu2_lower_bound, settling_estimate, synthesize_gains, validate_gains,
};
use twisting_core::verify::sample_boundary;
use twisting_core::{DisturbanceProfile, Gains, PendulumParams, Sign, State, TuningParameters};

prop_compose! {
    fn valid_params()(
        level in 0.05..20.0_f64,
        beta in 1.01..30.0_f64,
        rho in 0.01..0.99_f64,
        delta_slack in 1e-6..3.0_f64,
        bound in 0.0..3.0_f64,
        ts in 0.05..10.0_f64,
    ) -> TuningParameters<f64> {
        let mut p = TuningParameters::new(level, beta, rho, 0.0, bound, ts);
        p.delta = p.delta_min() * (1.0 + delta_slack);
        p
    }
}

prop_compose! {
    fn valid_pair()(p in valid_params(), m1 in 1e-6..1.0_f64, m2 in 1e-6..1.0_f64)
        -> (TuningParameters<f64>, Gains<f64>)
    {
        let mu1 = mu1_lower_bound(&p).unwrap() * (1.0 + m1);
        let mu2 = mu2_lower_bound(&p, mu1).unwrap() * (1.0 + m2);
        (p, Gains::new(mu1, mu2))
    }
}

fn state() -> impl Strategy<Value = State<f64>> {
    (-10.0..10.0_f64, -10.0..10.0_f64).prop_map(|(a, b)| State::new(a, b))
}

fn gains() -> impl Strategy<Value = Gains<f64>> {
    (0.01..50.0_f64, 0.01..80.0_f64).prop_map(|(a, b)| Gains::new(a, b))
}

fn profile() -> impl Strategy<Value = DisturbanceProfile<f64>> {
    let sign = prop_oneof![Just(Sign::Plus), Just(Sign::Minus)];
    prop_oneof![
        Just(DisturbanceProfile::Zero),
        (0.0..2.0_f64, sign.clone())
            .prop_map(|(amplitude, sign)| DisturbanceProfile::Constant { amplitude, sign }),
        (0.0..2.0_f64, 0.0..50.0_f64).prop_map(|(amplitude, frequency)| {
            DisturbanceProfile::Sinusoid {
                amplitude,
                frequency,
            }
        }),
        (0.0..2.0_f64, sign)
            .prop_map(|(amplitude, sign)| DisturbanceProfile::AdversarialSign { amplitude, sign }),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn estimate_chain_holds((p, g) in valid_pair()) {
        prop_assert!(validate_gains(&p, &g).is_ok());
        let e = settling_estimate(&p, &g).unwrap();
        prop_assert!(e.eta > 0.0 && e.eta < 1.0 / p.beta, "{e:?}");
        prop_assert!(e.t2 <= e.t2_bound, "{e:?}");
        prop_assert!(e.t2_bound <= p.settling_time, "{e:?}");
        prop_assert!(e.r2 < p.level && e.r2 < e.r1, "{e:?}");
    }

    #[test]
    fn boundary_samples_are_contained((p, g) in valid_pair(), seed in any::<u64>()) {
        let e = settling_estimate(&p, &g).unwrap();
        for s in sample_boundary(&p, &g, 24, seed).unwrap() {
            let v = lyapunov(&s, &g);
            prop_assert!((v - p.level).abs() <= 1e-12, "V = {v}");
            let n = s.norm();
            prop_assert!(n >= e.r2 && n <= e.r1 * (1.0 + 1e-15), "{s:?} r1={} r2={}", e.r1, e.r2);
        }
    }

    #[test]
    fn synthesized_gains_validate(p in valid_params(), margin in 1e-6..2.0_f64) {
        let g = synthesize_gains(&p, margin).unwrap();
        prop_assert!(validate_gains(&p, &g).is_ok());
    }

    #[test]
    fn mu1_bound_monotonicity(p in valid_params(), factor in 1.01..4.0_f64) {
        let base = mu1_lower_bound(&p).unwrap();
        let later = TuningParameters { settling_time: p.settling_time * factor, ..p };
        prop_assert!(mu1_lower_bound(&later).unwrap() < base);
        let wider = TuningParameters { delta: p.delta * factor, ..p };
        prop_assert!(mu1_lower_bound(&wider).unwrap() > base);
    }

    #[test]
    fn t2_bound_decreases_in_mu1((p, g) in valid_pair(), factor in 1.01..3.0_f64) {
        let stronger = Gains::new(g.mu1 * factor, g.mu2 * factor * p.beta);
        let a = settling_estimate(&p, &g).unwrap().t2_bound;
        let b = settling_estimate(&p, &stronger).unwrap().t2_bound;
        prop_assert!(b < a);
    }

    #[test]
    fn lyapunov_positive_definite(s in state(), g in gains()) {
        let v = lyapunov(&s, &g);
        if s.x1 == 0.0 && s.x2 == 0.0 {
            prop_assert_eq!(v, 0.0);
        } else {
            prop_assert!(v > 0.0);
        }
    }

    #[test]
    fn twisting_range_and_symmetry(s in state(), g in gains()) {
        let u = twisting_control(&s, &g);
        prop_assert!(u.abs() <= g.mu1 + g.mu2);
        if s.x1 * s.x2 > 0.0 {
            prop_assert_eq!(u.abs(), g.mu1 + g.mu2);
        } else if s.x1 * s.x2 < 0.0 {
            prop_assert_eq!(u.abs(), (g.mu2 - g.mu1).abs());
        }
        prop_assert_eq!(twisting_control(&-s, &g), -u);
    }

    #[test]
    fn compensation_identity(
        s in state(),
        g in gains(),
        d in -1e-2..1e-2_f64,
        m in 0.01..1.0_f64,
        l in 0.01..1.0_f64,
        j in 1e-4..1e-1_f64,
        fv in 0.0..1e-2_f64,
        r in -3.2..3.2_f64,
    ) {
        let pp = PendulumParams::new(m, l, j, 9.81, fv, r);
        let u = twisting_control(&s, &g);
        let tau = compensating_torque(&s, &pp, u);
        let pend = pendulum_rhs(&s, &pp, tau, d);
        let di = double_integrator_rhs(&s, u, pp.b() * d);
        prop_assert_eq!(pend.x1, di.x1);
        prop_assert!((pend.x2 - di.x2).abs() <= 1e-12, "{} vs {}", pend.x2, di.x2);
    }

    #[test]
    fn disturbance_bounded(p in profile(), t in -1e3..1e3_f64, s in state()) {
        prop_assert!(p.evaluate(t, &s).abs() <= p.amplitude());
    }

    #[test]
    fn rhs_additive_in_disturbance(s in state(), u in -50.0..50.0_f64, w1 in -1.0..1.0_f64, w2 in -1.0..1.0_f64) {
        let a = double_integrator_rhs(&s, u, w1 + w2);
        let b = double_integrator_rhs(&s, u, w1);
        prop_assert_eq!(a.x1 - b.x1, 0.0);
        prop_assert!((a.x2 - b.x2 - w2).abs() <= 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn trajectory_csv_round_trip(x1 in -0.05..0.05_f64, x2 in -1.5..1.5_f64, p in profile()) {
        let p = match p {
            DisturbanceProfile::Zero => p,
            _ => DisturbanceProfile::Sinusoid { amplitude: p.amplitude().min(0.2), frequency: 3.0 },
        };
        let traj: Trajectory<f64> = simulate(
            &Plant::DoubleIntegrator,
            &Gains::new(6.63, 33.24),
            &p,
            State::new(x1, x2),
            &SimConfig::with_step(1e-4, 0.05),
        ).unwrap();
        let mut buf = Vec::new();
        traj.write_csv(&mut buf).unwrap();
        let back: Vec<Sample<f64>> = read_samples_csv(buf.as_slice()).unwrap();
        prop_assert_eq!(back, traj.samples);
    }
}
