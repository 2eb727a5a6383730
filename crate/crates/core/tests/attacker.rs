use lysa::cfa::AnalysisOptions;
use lysa::model::CryptoPoint;
use lysa::scenario::EXAMPLE2;
use lysa::{analyze, authentic, confidential, parse_process, AbstractValue, AttackerConfig, Ident, Process};

fn with_attacker(p: &Process) -> lysa::AnalysisResult {
    let opts = AnalysisOptions {
        attacker: Some(AttackerConfig::for_process(p)),
        ..Default::default()
    };
    analyze(p, &opts).unwrap()
}

#[test]
fn example2_attacker_learns_the_key() {
    let p = parse_process(EXAMPLE2).unwrap();
    let r = with_attacker(&p);
    for v in ["KA", "K"] {
        assert!(r.attacker_knows(&AbstractValue::name(v)), "{v}");
    }
    assert!(r.render_set(r.attacker.as_ref().unwrap()).iter().any(|s| s == "{K}:KA[at lA dest {lB}]"));
    assert!(r.psi.contains(&(CryptoPoint::label("lA"), CryptoPoint::Attacker)));
    assert!(!confidential(&r, &Ident::new("K")));
    assert!(!confidential(&r, &Ident::new("B")));
    assert_eq!(authentic(&r), r.psi);
}

#[test]
fn idle_attacker_knows_only_its_own_name() {
    let r = with_attacker(&Process::Nil);
    let known = r.render_set(r.attacker.as_ref().unwrap());
    assert_eq!(known, vec!["n•".to_string()]);
    assert!(r.psi.is_empty());
    assert!(authentic(&r).is_empty());
}

#[test]
fn restricted_names_stay_secret_when_never_sent() {
    let p = parse_process("new(S) <A>.0 | (A; x).0").unwrap();
    let r = with_attacker(&p);
    assert!(confidential(&r, &Ident::new("S")));
    assert!(!confidential(&r, &Ident::new("A")));
}

#[test]
fn attacker_messages_reach_inputs() {
    let p = parse_process("(A; x).0").unwrap();
    let r = with_attacker(&p);
    assert!(r.rho_contains(&Ident::new("x"), &AbstractValue::name(lysa::CanonicalName::attacker().as_str())));
}

#[test]
fn seeds_are_known() {
    let p = parse_process("new(S) <A>.0").unwrap();
    let opts = AnalysisOptions {
        attacker: Some(AttackerConfig::for_process(&p).with_seeds([Ident::new("S")])),
        ..Default::default()
    };
    let r = analyze(&p, &opts).unwrap();
    assert!(!confidential(&r, &Ident::new("S")));
}

#[test]
fn fixed_case1_keeps_messages_secret() {
    let s = lysa::scenario::corpus().into_iter().find(|s| s.name == "case1-fixed").unwrap();
    let (_, r, _) = lysa::scenario::run_scenario_full(&s).unwrap();
    assert!(authentic(&r).is_empty());
    let msgs: Vec<_> = r.index.names.iter().filter(|c| c.as_str().starts_with("MSG")).collect();
    assert!(!msgs.is_empty());
    for m in msgs {
        assert!(!r.attacker_knows(&AbstractValue::name(m.as_str())), "{m}");
    }
}
