use lysa::scenario::{corpus, run_scenario, Scenario, CASE1_BASE_2R, CASE1_FIXED_2R, CASE2_BASE_2R, CASE2_FIXED_2R};

fn find(name: &str) -> Scenario {
    corpus().into_iter().find(|s| s.name == name).unwrap()
}

#[test]
fn corpus_expectations_hold() {
    let all = corpus();
    assert!(all.len() >= 9);
    for s in all {
        let r = run_scenario(&s).unwrap();
        assert!(r.verdicts.expectations_met, "{}: {:?}", s.name, r.verdicts.mismatches);
        assert_eq!(r.exit_code(), 0, "{}", s.name);
    }
}

#[test]
fn example2_report() {
    let r = run_scenario(&find("example2")).unwrap();
    assert!(r.psi.contains(&["lA".to_string(), "l•".to_string()]));
    for k in ["KA", "K", "{K}:KA[at lA dest {lB}]"] {
        assert!(r.attacker_knowledge.iter().any(|x| x == k), "{k}");
    }
    assert_eq!(r.verdicts.confidential.get("K"), Some(&false));
    let r = run_scenario(&find("example2-no-attacker")).unwrap();
    assert!(r.psi.is_empty());
}

#[test]
fn two_round_flaws_and_fixes() {
    for name in ["case1-base-2r", "case2-base-2r"] {
        let r = run_scenario(&find(name)).unwrap();
        assert!(!r.psi.is_empty(), "{name}");
        assert!(r.verdicts.confidential.values().any(|&c| !c), "{name}");
    }
    for name in ["case1-fixed-2r", "case2-fixed-2r"] {
        let r = run_scenario(&find(name)).unwrap();
        assert!(r.psi.is_empty(), "{name}");
        assert!(r.verdicts.confidential.values().all(|&c| c), "{name}");
    }
}

#[test]
fn two_round_models_are_clean_without_the_attacker() {
    for (name, src) in [
        ("a", CASE1_BASE_2R),
        ("b", CASE1_FIXED_2R),
        ("c", CASE2_BASE_2R),
        ("d", CASE2_FIXED_2R),
    ] {
        let mut s = Scenario::new(name, name, src);
        s.attacker = false;
        s.rounds = 2;
        let r = run_scenario(&s).unwrap();
        assert!(r.psi.is_empty(), "{name}: {:?}", r.psi);
    }
}

#[test]
fn failed_expectations_change_the_exit_code() {
    let mut s = find("example2");
    s.expect.psi_empty = Some(true);
    let r = run_scenario(&s).unwrap();
    assert!(!r.verdicts.expectations_met);
    assert_ne!(r.exit_code(), 0);
}

#[test]
fn json_report_is_versioned() {
    let r = run_scenario(&find("example2")).unwrap();
    let v: serde_json::Value = serde_json::from_str(&r.to_json()).unwrap();
    for k in ["schema_version", "scenario", "psi", "attacker_knowledge", "verdicts", "timings_ms"] {
        assert!(v.get(k).is_some(), "{k}");
    }
    assert_eq!(r.fingerprint(), run_scenario(&find("example2")).unwrap().fingerprint());
}
