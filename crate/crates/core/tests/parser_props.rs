use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::SeedableRng;
use stlmon_core::ast::{pretty_print, validate, Rule, Specification};
use stlmon_core::parser::{parse_formula, parse_spec};
use stlmon_testkit::{random_formula, test_decls};

fn embed(rule: &str) -> String {
    let mut src = String::from("signal x : real\nsignal y : real\nsignal b : bool\nsignal e : enum { p, q, r }\n");
    src.push_str(rule);
    src
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn print_then_parse_is_identity(seed in any::<u64>()) {
        let f = random_formula(&mut StdRng::seed_from_u64(seed), 4, 0.5);
        let printed = pretty_print(&f);
        prop_assert_eq!(&parse_formula(&printed, &test_decls()).unwrap(), &f, "{}", printed);
        let spec = parse_spec(&embed(&format!("rule r : {printed}\n"))).unwrap();
        prop_assert_eq!(&spec.rules[0].formula, &f);
    }

    #[test]
    fn node_count_is_one_plus_children(seed in any::<u64>()) {
        let f = random_formula(&mut StdRng::seed_from_u64(seed), 4, 1.0);
        let children: usize = f.children().iter().map(|c| c.node_count()).sum();
        prop_assert_eq!(f.node_count(), 1 + children);
    }

    #[test]
    fn random_bytes_never_crash(bytes in prop::collection::vec(any::<u8>(), 0..200)) {
        let text = String::from_utf8_lossy(&bytes);
        let _ = parse_spec(&text);
        let _ = parse_formula(&text, &test_decls());
    }

    #[test]
    fn error_spans_stay_inside_source(src in "[a-z0-9 :\\[\\],.()<>=!&|\\-{}#\n]{0,80}") {
        let src = embed(&src);
        if let Err(err) = parse_spec(&src) {
            let lines: Vec<&str> = src.split('\n').collect();
            prop_assert!(err.span.line >= 1 && err.span.line <= lines.len(), "{:?}", err.span);
            let width = lines[err.span.line - 1].chars().count();
            prop_assert!(err.span.column >= 1 && err.span.column <= width + 1, "{:?}", err.span);
            prop_assert!(!err.message.is_empty());
        }
    }

    #[test]
    fn validate_is_deterministic(seed in any::<u64>()) {
        let f = random_formula(&mut StdRng::seed_from_u64(seed), 3, 1.0);
        let spec = Specification {
            declarations: test_decls(),
            rules: vec![Rule { name: "a".into(), formula: f.clone() }, Rule { name: "a".into(), formula: f }],
        };
        let first = validate(&spec);
        prop_assert!(!first.is_empty());
        prop_assert_eq!(first, validate(&spec));
    }
}

#[test]
fn shipped_specs_parse() {
    for name in ["mario.stl", "turtlebot.stl"] {
        let path = format!("{}/../../specs/{name}", env!("CARGO_MANIFEST_DIR"));
        let spec = parse_spec(&std::fs::read_to_string(path).unwrap()).unwrap();
        assert_eq!(spec.rules.len(), 3, "{name}");
        for rule in &spec.rules {
            let again = parse_formula(&pretty_print(&rule.formula), &spec.declarations).unwrap();
            assert_eq!(again, rule.formula);
        }
    }
}
