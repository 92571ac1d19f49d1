use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use stlmon_core::ast::SignalExpr;
use stlmon_core::trace::{eval_expr, load_trace_csv, load_trace_json, write_trace_csv, write_trace_json, Series, Trace};
use stlmon_testkit::{random_expr, random_trace, test_spec};

fn reals_mut(trace: &Trace, name: &str) -> Vec<f64> {
    trace.real(name).unwrap().to_vec()
}

proptest! {
    #[test]
    fn csv_and_json_round_trip(seed in any::<u64>(), len in 2usize..60) {
        let mut rng = StdRng::seed_from_u64(seed);
        let dt = [1.0, 0.5, 0.1][rng.random_range(0..3)];
        let tr = random_trace(&mut rng, len, dt);
        let csv = write_trace_csv(&tr);
        let back = load_trace_csv(csv.as_bytes(), &test_spec()).unwrap();
        prop_assert_eq!(write_trace_csv(&back), csv);
        for name in ["x", "y", "b", "e"] {
            prop_assert_eq!(back.series(name).unwrap(), tr.series(name).unwrap());
        }
        let json = write_trace_json(&tr);
        let back = load_trace_json(json.as_bytes(), &test_spec()).unwrap();
        for name in ["x", "y", "b", "e"] {
            prop_assert_eq!(back.series(name).unwrap(), tr.series(name).unwrap());
        }
    }

    #[test]
    fn deriv_is_local(seed in any::<u64>(), len in 3usize..40, bump in 0.5f64..5.0) {
        let mut rng = StdRng::seed_from_u64(seed);
        let tr = random_trace(&mut rng, len, 1.0);
        let j = rng.random_range(0..len);
        let mut x = reals_mut(&tr, "x");
        x[j] += bump;
        let channels = [("x", x), ("y", reals_mut(&tr, "y"))]
            .into_iter()
            .map(|(k, v)| (k.to_string(), Series::Real(v)))
            .collect();
        let moved = Trace::new("m", tr.times().to_vec(), channels).unwrap();
        let before = eval_expr(&SignalExpr::deriv("x"), &tr).unwrap();
        let after = eval_expr(&SignalExpr::deriv("x"), &moved).unwrap();
        for i in 0..len {
            let changed = before.values()[i] != after.values()[i];
            prop_assert_eq!(changed, (i == j && j > 0) || i == j + 1, "index {}", i);
        }
    }

    #[test]
    fn pointwise_expressions_are_local(seed in any::<u64>(), len in 2usize..30) {
        let mut rng = StdRng::seed_from_u64(seed);
        let tr = random_trace(&mut rng, len, 1.0);
        let expr = random_expr(&mut rng, 3);
        let full = eval_expr(&expr, &tr).unwrap();
        for (i, v) in full.values().iter().enumerate() {
            prop_assert_eq!(*v, stlmon_testkit::naive_expr(&expr, &tr, i));
        }
    }

    #[test]
    fn constants_fill_the_trace(c in -1e6f64..1e6, len in 2usize..100) {
        let tr = random_trace(&mut StdRng::seed_from_u64(len as u64), len, 1.0);
        let v = eval_expr(&SignalExpr::Constant(c), &tr).unwrap();
        prop_assert_eq!(v.into_values(), vec![c; len]);
    }
}
