use super::*;

fn decay() -> FnSystem<impl Fn(f64, &[f64], &mut [f64]), impl Fn(f64, &[f64]) -> Option<Jacobian>> {
    FnSystem::with_jacobian(
        1,
        |_t, y: &[f64], d: &mut [f64]| d[0] = -y[0],
        |_t, _y: &[f64]| Some(Jacobian::dense_from_rows(&[[-1.0]])),
    )
}

fn oscillator() -> FnSystem<impl Fn(f64, &[f64], &mut [f64])> {
    FnSystem::new(2, |_t, y: &[f64], d: &mut [f64]| {
        d[0] = y[1];
        d[1] = -y[0];
    })
}

#[test]
fn exponential_decay() {
    let sol = integrate(&decay(), 0.0, 1.0, &[1.0], &IntegratorConfig::with_tol(1e-10), &[]).unwrap();
    let u = sol.trajectory.last_state()[0];
    assert!((u - (-1f64).exp()).abs() < 1e-8, "{u}");
    assert_eq!(sol.trajectory.t_end(), 1.0);
}

#[test]
fn harmonic_oscillator_closes_orbit() {
    let period = 2.0 * std::f64::consts::PI;
    let sol = integrate(
        &oscillator(),
        0.0,
        period,
        &[1.0, 0.0],
        &IntegratorConfig::with_tol(1e-9),
        &[],
    )
    .unwrap();
    let y = sol.trajectory.last_state();
    assert!((y[0] - 1.0).abs() < 1e-7 && y[1].abs() < 1e-7, "{y:?}");
}

#[test]
fn diagonal_linear_system() {
    let sys = FnSystem::new(3, |_t, y: &[f64], d: &mut [f64]| {
        for i in 0..3 {
            d[i] = -((i + 1) as f64) * y[i];
        }
    });
    let sol = integrate(
        &sys,
        0.0,
        2.0,
        &[1.0, 1.0, 1.0],
        &IntegratorConfig::with_tol(1e-10),
        &[],
    )
    .unwrap();
    let y = sol.trajectory.last_state();
    for (i, v) in y.iter().enumerate() {
        let exact = (-2.0 * (i + 1) as f64).exp();
        assert!((v - exact).abs() < 1e-8, "component {i}: {v} vs {exact}");
    }
}

#[test]
fn implicit_method_solves_decay_and_oscillator() {
    // second order: global error grows with the step count
    let cfg = IntegratorConfig::with_tol(1e-10).implicit();
    let sol = integrate(&decay(), 0.0, 1.0, &[1.0], &cfg, &[]).unwrap();
    let v = sol.trajectory.last_state()[0];
    assert!((v - (-1f64).exp()).abs() < 1e-7, "{v}");
    // stiff scalar: y' = -1000 (y - cos t)
    let stiff = FnSystem::with_jacobian(
        1,
        |t, y: &[f64], d: &mut [f64]| d[0] = -1000.0 * (y[0] - t.cos()),
        |_t, _y: &[f64]| Some(Jacobian::dense_from_rows(&[[-1000.0]])),
    );
    let cfg = IntegratorConfig::with_tol(1e-4).implicit();
    let sol = integrate(&stiff, 0.0, 10.0, &[1.0], &cfg, &[]).unwrap();
    let y = sol.trajectory.last_state()[0];
    // slow manifold y ~ cos t + sin t / 1000
    let approx = 10f64.cos() + 10f64.sin() / 1000.0;
    assert!((y - approx).abs() < 1e-4, "{y} vs {approx}");
    let explicit = integrate(&stiff, 0.0, 10.0, &[1.0], &IntegratorConfig::with_tol(1e-4), &[]).unwrap();
    let (ne, ni) = (explicit.trajectory.stats.accepted, sol.trajectory.stats.accepted);
    assert!(ne > 5 * ni, "{ne} vs {ni}");
}

#[test]
fn implicit_requires_jacobian() {
    let cfg = IntegratorConfig::default().implicit();
    let err = integrate(&oscillator(), 0.0, 1.0, &[1.0, 0.0], &cfg, &[]).unwrap_err();
    assert_eq!(err, IntegrateError::MissingJacobian);
}

#[test]
fn dense_output_hits_knots_exactly() {
    let sol = integrate(
        &oscillator(),
        0.0,
        3.0,
        &[1.0, 0.0],
        &IntegratorConfig::with_tol(1e-8),
        &[],
    )
    .unwrap();
    let tr = &sol.trajectory;
    for (i, seg) in tr.segments().iter().enumerate() {
        let mut buf = [0.0; 2];
        seg.eval(seg.t_start, &mut buf);
        assert_eq!(&buf[..], tr.state(i));
        seg.eval(seg.t_end, &mut buf);
        for (a, b) in buf.iter().zip(tr.state(i + 1)) {
            assert!((a - b).abs() <= 4.0 * f64::EPSILON * b.abs().max(1.0));
        }
        assert_eq!(tr.eval(tr.times()[i + 1]).unwrap(), tr.state(i + 1));
    }
    // between knots the interpolant tracks the exact solution
    for k in 0..50 {
        let t = 3.0 * k as f64 / 49.0;
        let y = tr.eval(t).unwrap();
        assert!((y[0] - t.cos()).abs() < 1e-6);
    }
    assert!(tr.eval(3.5).is_none());
}

#[test]
fn event_located_at_ln2() {
    let ev = Event::new(|_t, y: &[f64]| y[0] - 0.5, Direction::Falling, true);
    let out = integrate_to_event(&decay(), 0.0, 5.0, &[1.0], &IntegratorConfig::with_tol(1e-10), ev).unwrap();
    match out {
        EventOutcome::Hit { t, state, trajectory } => {
            assert!((t - 2f64.ln()).abs() < 1e-8, "{t}");
            assert!((state[0] - 0.5).abs() <= EVENT_TOL);
            assert_eq!(trajectory.t_end(), t);
        }
        EventOutcome::NoEvent { .. } => panic!("event missed"),
    }
}

#[test]
fn event_direction_filters_crossings() {
    let ev = Event::new(|_t, y: &[f64]| y[0] - 0.5, Direction::Rising, true);
    let out = integrate_to_event(&decay(), 0.0, 5.0, &[1.0], &IntegratorConfig::default(), ev).unwrap();
    assert!(matches!(out, EventOutcome::NoEvent { .. }));
}

#[test]
fn missing_crossing_is_no_event() {
    let ev = Event::new(|_t, y: &[f64]| y[0] + 1.0, Direction::Any, true);
    let out = integrate_to_event(&decay(), 0.0, 5.0, &[1.0], &IntegratorConfig::default(), ev).unwrap();
    match out {
        EventOutcome::NoEvent { trajectory } => assert_eq!(trajectory.t_end(), 5.0),
        _ => panic!("no crossing expected"),
    }
}

#[test]
fn event_times_monotone_in_threshold() {
    let cfg = IntegratorConfig::with_tol(1e-10);
    let mut last = 0.0;
    for k in 1..10 {
        let level = 1.0 - k as f64 / 10.0;
        let ev = Event::new(move |_t, y: &[f64]| y[0] - level, Direction::Falling, true);
        let EventOutcome::Hit { t, .. } = integrate_to_event(&decay(), 0.0, 10.0, &[1.0], &cfg, ev).unwrap() else {
            panic!("missed");
        };
        assert!(t > last);
        assert!((t + level.ln()).abs() < 1e-8);
        last = t;
    }
}

#[test]
fn non_terminal_events_are_all_recorded() {
    let ev = Event::new(|_t, y: &[f64]| y[0], Direction::Any, false);
    let sol = integrate(
        &oscillator(),
        0.0,
        10.0,
        &[1.0, 0.0],
        &IntegratorConfig::with_tol(1e-10),
        &[ev],
    )
    .unwrap();
    // zeros of cos at pi/2 + n pi below 10
    let times: Vec<f64> = sol.events.iter().map(|e| e.t).collect();
    assert_eq!(times.len(), 3);
    for (n, t) in times.iter().enumerate() {
        let exact = std::f64::consts::FRAC_PI_2 + n as f64 * std::f64::consts::PI;
        assert!((t - exact).abs() < 1e-8);
    }
    assert!(sol.terminated_by.is_none());
}

#[test]
fn blow_up_reports_underflow() {
    let sys = FnSystem::new(1, |_t, y: &[f64], d: &mut [f64]| d[0] = y[0] * y[0]);
    let cfg = IntegratorConfig {
        h_min: 1e-10,
        ..IntegratorConfig::default()
    };
    let err = integrate(&sys, 0.0, 2.0, &[1.0], &cfg, &[]).unwrap_err();
    match err {
        IntegrateError::StepUnderflow { t, state, .. } => {
            assert!(t < 1.0 && t > 0.99);
            assert!(state[0] > 1e3);
        }
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn nan_rhs_is_domain_error() {
    let sys = FnSystem::new(1, |t, _y: &[f64], d: &mut [f64]| {
        d[0] = if t > 0.5 { f64::NAN } else { 1.0 }
    });
    let err = integrate(&sys, 0.0, 1.0, &[0.0], &IntegratorConfig::default(), &[]).unwrap_err();
    assert!(matches!(
        err,
        IntegrateError::StepUnderflow { .. } | IntegrateError::NonFinite { .. }
    ));
    let sys = FnSystem::new(1, |_t, _y: &[f64], d: &mut [f64]| d[0] = f64::NAN);
    let err = integrate(&sys, 0.0, 1.0, &[0.0], &IntegratorConfig::default(), &[]).unwrap_err();
    assert_eq!(err, IntegrateError::NonFinite { t: 0.0 });
}

#[test]
fn step_budget_enforced() {
    let cfg = IntegratorConfig {
        max_steps: 5,
        ..IntegratorConfig::with_tol(1e-12)
    };
    let err = integrate(&oscillator(), 0.0, 100.0, &[1.0, 0.0], &cfg, &[]).unwrap_err();
    assert!(matches!(err, IntegrateError::MaxSteps { steps: 5, .. }));
}

#[test]
fn config_and_interval_validation() {
    let bad = IntegratorConfig {
        h_min: 1.0,
        h_max: 0.5,
        ..Default::default()
    };
    assert!(matches!(
        integrate(&decay(), 0.0, 1.0, &[1.0], &bad, &[]),
        Err(IntegrateError::InvalidConfig(_))
    ));
    assert!(matches!(
        integrate(&decay(), 1.0, 1.0, &[1.0], &IntegratorConfig::default(), &[]),
        Err(IntegrateError::InvalidInterval { .. })
    ));
    assert!(matches!(
        integrate(&decay(), 0.0, 1.0, &[1.0, 2.0], &IntegratorConfig::default(), &[]),
        Err(IntegrateError::DimensionMismatch { .. })
    ));
}

#[test]
fn sampled_output_matches_dense_trajectory() {
    let times: Vec<f64> = (0..=20).map(|i| i as f64 * 0.25).collect();
    let cfg = IntegratorConfig::with_tol(1e-10);
    let (out, _) = integrate_sampled(&oscillator(), &times, &[1.0, 0.0], &cfg).unwrap();
    assert_eq!(out.len(), times.len());
    for (t, y) in times.iter().zip(&out) {
        assert!((y[0] - t.cos()).abs() < 1e-8);
        assert!((y[1] + t.sin()).abs() < 1e-8);
    }
}

#[test]
fn fixed_step_order_is_five() {
    let f = |_t: f64, y: &[f64], d: &mut [f64]| {
        d[0] = y[1];
        d[1] = -y[0];
    };
    let err_for = |n: usize| {
        let h = 1.0 / n as f64;
        let mut y = vec![1.0, 0.0];
        let mut t = 0.0;
        for _ in 0..n {
            y = Dopri5::fixed_step(&f, t, &y, h);
            t += h;
        }
        (y[0] - 1f64.cos()).abs()
    };
    let slope = (err_for(10) / err_for(40)).log2() / 2.0;
    assert!((slope - 5.0).abs() < 0.3, "{slope}");
}
