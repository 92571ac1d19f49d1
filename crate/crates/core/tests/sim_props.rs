use proptest::prelude::*;
use stlmon_core::sim::{builtin_presets, simulate_episode, simulate_fleet, Outcome};
use stlmon_core::trace::Series;

fn bools(series: &Series) -> &[bool] {
    match series {
        Series::Bool(v) => v,
        _ => panic!("not bool"),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn episodes_obey_kinematics_and_sensors(seed in any::<u64>(), pre in any::<bool>()) {
        let (cfg, pre_p, post_p) = builtin_presets();
        let params = if pre { pre_p } else { post_p };
        let ep = simulate_episode(&cfg, &params, seed).unwrap();
        let tr = &ep.trace;
        let (x, y, phi) = (tr.real("x").unwrap(), tr.real("y").unwrap(), tr.real("phi").unwrap());
        let (dist, speed) = (tr.real("dist_obst").unwrap(), tr.real("speed").unwrap());
        let reached = bools(tr.series("goal_reached").unwrap());

        prop_assert_eq!(tr.len(), ep.steps + 1);
        prop_assert!(ep.steps <= cfg.max_steps);
        let max_turn = cfg.angular_menu.iter().fold(0.0f64, |m, w| m.max(w.abs())) * cfg.dt;
        for i in 1..tr.len() {
            let step = (x[i] - x[i - 1]).hypot(y[i] - y[i - 1]);
            prop_assert!((step - cfg.linear_speed * cfg.dt).abs() < 1e-9);
            prop_assert!((phi[i] - phi[i - 1]).abs() <= max_turn + 1e-12);
            prop_assert!(reached[i] >= reached[i - 1]);
        }
        for i in 0..tr.len() {
            let mut brute = (cfg.map_half_extent - x[i]).min(cfg.map_half_extent + x[i]);
            brute = brute.min(cfg.map_half_extent - y[i]).min(cfg.map_half_extent + y[i]);
            for o in &cfg.obstacles {
                brute = brute.min(((x[i] - o.x).powi(2) + (y[i] - o.y).powi(2)).sqrt() - o.radius);
            }
            prop_assert!((dist[i] - brute).abs() < 1e-12);
            prop_assert_eq!(speed[i], cfg.linear_speed);
        }
        let last = tr.len() - 1;
        match ep.outcome {
            Outcome::GoalReached => prop_assert!(reached[last]),
            Outcome::Collision => prop_assert!(dist[last] <= 0.0),
            Outcome::Timeout => prop_assert_eq!(ep.steps, cfg.max_steps),
        }
    }
}

#[test]
fn fleets_are_identical_across_thread_pools() {
    let (cfg, pre, _) = builtin_presets();
    let serial = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let wide = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
    let a = serial.install(|| simulate_fleet(&cfg, &pre, 24, 7).unwrap());
    let b = wide.install(|| simulate_fleet(&cfg, &pre, 24, 7).unwrap());
    assert_eq!(a, b);
    for (i, ep) in a.iter().enumerate() {
        assert_eq!(ep.seed, 7 + i as u64);
    }
}

#[test]
fn hundred_episodes_get_distinct_goals() {
    let (cfg, _, post) = builtin_presets();
    let fleet = simulate_fleet(&cfg, &post, 100, 7).unwrap();
    assert_eq!(fleet.len(), 100);
    let mut goals: Vec<(u64, u64)> = fleet.iter().map(|e| (e.goal.0.to_bits(), e.goal.1.to_bits())).collect();
    goals.sort();
    goals.dedup();
    assert_eq!(goals.len(), 100);
}
