use lysa::cfa::{analyze, check, AbstractValue, AnalysisOptions};
use lysa::model::{Annotation, CryptoPoint, Ident, PointSet};
use lysa::{confidential, parse_process, AttackerConfig};

const EXAMPLE2: &str = "
new(K) <A, B, KA, {K}:KA[at lA dest {lB}]>.0
| (A, B; xKA, x). decrypt x as {; xK}:xKA[at lB orig {lA}] in 0
";

fn enc_k() -> AbstractValue {
    AbstractValue::enc(
        vec![AbstractValue::name("K")],
        AbstractValue::name("KA"),
        Some(Annotation::new(
            CryptoPoint::label("lA"),
            PointSet::only([CryptoPoint::label("lB")]),
        )),
    )
}

#[test]
fn without_attacker() {
    let p = parse_process(EXAMPLE2).unwrap();
    let r = analyze(&p, &AnalysisOptions::default()).unwrap();
    assert!(r.kappa_contains(&[
        AbstractValue::name("A"),
        AbstractValue::name("B"),
        AbstractValue::name("KA"),
        enc_k()
    ]));
    assert_eq!(r.kappa.len(), 1);
    assert_eq!(r.render_set(r.rho_of(&Ident::new("xKA"))), vec!["KA"]);
    assert_eq!(
        r.render_set(r.rho_of(&Ident::new("x"))),
        vec!["{K}:KA[at lA dest {lB}]"]
    );
    assert_eq!(r.render_set(r.rho_of(&Ident::new("xK"))), vec!["K"]);
    assert!(r.psi.is_empty());
    assert!(check(&p, &r));
    println!("{:?}", r.render_kappa());
}

#[test]
fn with_attacker() {
    let p = parse_process(EXAMPLE2).unwrap();
    let opts = AnalysisOptions {
        attacker: Some(AttackerConfig::for_process(&p)),
        ..Default::default()
    };
    let r = analyze(&p, &opts).unwrap();
    assert!(r.attacker_knows(&AbstractValue::name("KA")));
    assert!(r.attacker_knows(&AbstractValue::name("K")));
    assert!(r.attacker_knows(&enc_k()));
    assert!(r.psi.contains(&(CryptoPoint::label("lA"), CryptoPoint::Attacker)));
    assert!(!confidential(&r, &Ident::new("K")));
    assert!(check(&p, &r));
    println!("{:?}", r.psi);
    println!("{:?}", r.render_set(r.attacker.as_ref().unwrap()));
}

#[test]
fn oracle_covered() {
    use lysa::exec::{covered, explore, run, ExploreOptions, Scheduler};
    let p = parse_process(EXAMPLE2).unwrap();
    let t = run(&p, 4, Scheduler::First);
    for e in &t.events {
        println!("{e}");
    }
    let r = analyze(&p, &AnalysisOptions::default()).unwrap();
    assert!(covered(&t, &r));
    let x = explore(&p, &ExploreOptions { depth: 6, ..Default::default() });
    assert!(covered(&x.events, &r));
}
