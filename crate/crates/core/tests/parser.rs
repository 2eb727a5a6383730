mod common;

use lysa::model::{Annotation, CryptoPoint, Ident, PointSet, Process, Term};
use lysa::parser::{expand_with, parse, pretty, ExpandOptions, ParseErrorKind};
use lysa::scenario::corpus;
use lysa::parse_process;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn kind(src: &str) -> ParseErrorKind {
    match parse_process(src) {
        Ok(p) => panic!("parsed: {}", pretty(&p)),
        Err(e) => e.kind,
    }
}

fn count(p: &Process, f: &dyn Fn(&Process) -> bool) -> usize {
    let here = usize::from(f(p));
    here + match p {
        Process::Nil => 0,
        Process::Par(l, r) => count(l, f) + count(r, f),
        Process::Repl(q) | Process::New(_, q) | Process::Out(_, q) => count(q, f),
        Process::In { cont, .. } | Process::Decrypt { cont, .. } => count(cont, f),
    }
}

fn sites(p: &Process, out: &mut Vec<CryptoPoint>) {
    fn term(t: &Term, out: &mut Vec<CryptoPoint>) {
        if let Term::Enc { payload, key, ann } = t {
            if let Some(a) = ann {
                out.push(a.at.clone());
            }
            payload.iter().for_each(|t| term(t, out));
            term(key, out);
        }
    }
    match p {
        Process::Nil => {}
        Process::Par(l, r) => {
            sites(l, out);
            sites(r, out);
        }
        Process::Repl(q) | Process::New(_, q) => sites(q, out),
        Process::Out(ts, q) => {
            ts.iter().for_each(|t| term(t, out));
            sites(q, out);
        }
        Process::In { pattern, cont, .. } => {
            pattern.iter().for_each(|t| term(t, out));
            sites(cont, out);
        }
        Process::Decrypt {
            subject,
            pattern,
            key,
            ann,
            cont,
            ..
        } => {
            term(subject, out);
            pattern.iter().for_each(|t| term(t, out));
            term(key, out);
            if let Some(a) = ann {
                out.push(a.at.clone());
            }
            sites(cont, out);
        }
    }
}

#[test]
fn input_binds_the_last_positions() {
    let p = parse_process("(A, B; xKA, x).0").unwrap();
    assert_eq!(
        p,
        Process::In {
            pattern: vec![Term::name("A"), Term::name("B")],
            bind: vec![Ident::new("xKA"), Ident::new("x")],
            cont: Box::new(Process::Nil),
        }
    );
}

#[test]
fn nil() {
    assert_eq!(parse_process("0").unwrap(), Process::Nil);
    assert_eq!(pretty(&Process::Nil), "0");
}

#[test]
fn restricted_annotated_output() {
    let p = parse_process(
        "new(K) <A,B,KA,{K}:KA [at lA dest {lB}]>.0
         | (A, B; xKA, x). decrypt x as {; xK}:xKA [at lB orig {lA}] in 0",
    )
    .unwrap();
    let Process::Par(p, _) = p else { panic!("not a parallel composition") };
    let enc = Term::enc(
        vec![Term::name("K")],
        Term::name("KA"),
        Some(Annotation::new(
            CryptoPoint::label("lA"),
            PointSet::only([CryptoPoint::label("lB")]),
        )),
    );
    assert_eq!(
        *p,
        Process::New(
            Ident::new("K"),
            Box::new(Process::Out(
                vec![Term::name("A"), Term::name("B"), Term::name("KA"), enc],
                Box::new(Process::Nil)
            ))
        )
    );
}

#[test]
fn pretty_input() {
    let p = Process::In {
        pattern: vec![Term::name("A")],
        bind: vec![Ident::new("x")],
        cont: Box::new(Process::Nil),
    };
    assert_eq!(pretty(&p), "(A; x).0");
}

#[test]
fn comments_are_ignored() {
    let a = parse_process("/* a */ <A>.0").unwrap();
    let b = parse_process("<A>.0").unwrap();
    assert_eq!(a, b);
}

#[test]
fn indexed_parallel_expands_per_element() {
    let p = parse_process("let X = {1,2}\npar[i in X] <A[i]>.0").unwrap();
    let out = |n: u32| Process::Out(vec![Term::Name(Ident::indexed("A", [n]))], Box::new(Process::Nil));
    assert_eq!(p, Process::par(out(1), out(2)));
}

#[test]
fn empty_index_product_is_nil() {
    let p = parse_process("let X = {}\npar[i in X] <A[i]>.0").unwrap();
    assert_eq!(p, Process::Nil);
}

#[test]
fn case1_has_twelve_initiator_sessions() {
    let model = parse(lysa::scenario::CASE1_BASE).unwrap();
    let p = expand_with(&model, &ExpandOptions::default()).unwrap();
    let initiator = |p: &Process| match p {
        Process::Repl(body) => matches!(&**body, Process::Out(ts, _)
            if matches!(&ts[0], Term::Name(n) if n.base == "A")),
        _ => false,
    };
    assert_eq!(count(&p, &initiator), 3 * 4);
    assert_eq!(count(&p, &|p| matches!(p, Process::Repl(_))), 3 * 4 + 3 * 4 + 4 * 4);
}

#[test]
fn every_site_has_a_unique_point() {
    for s in corpus() {
        let (p, _) = s.process().unwrap();
        let mut pts = Vec::new();
        sites(&p, &mut pts);
        let n = pts.len();
        pts.sort();
        pts.dedup();
        assert_eq!(pts.len(), n, "{}", s.name);
    }
}

#[test]
fn corpus_round_trips() {
    for s in corpus() {
        let (p, _) = s.process().unwrap();
        let text = pretty(&p);
        let q = parse_process(&text).unwrap_or_else(|e| panic!("{}: {e}\n{text}", s.name));
        assert_eq!(p, q, "{}", s.name);
    }
}

#[test]
fn syntax_errors_carry_a_position() {
    let e = parse_process("<A, B>.\n  (A; x.0").unwrap_err();
    assert!(matches!(e.kind, ParseErrorKind::Syntax { .. }));
    assert_eq!(e.pos.line, 2);
}

#[test]
fn error_kinds() {
    assert!(matches!(
        kind("decrypt x as {; y}:K [at l1 orig {l9}] in 0"),
        ParseErrorKind::UnknownPoint(p) if p == "l9"
    ));
    assert!(matches!(
        kind("<{A}:K [at l1 dest {l1}]>.<{B}:K [at l1 dest {l1}]>.0"),
        ParseErrorKind::DuplicatePoint(_)
    ));
    assert!(matches!(
        kind("decrypt {A, B}:K as {; y}:K in 0"),
        ParseErrorKind::ArityMismatch { expected: 2, found: 1 }
    ));
    assert!(matches!(kind("(A; x, x).0"), ParseErrorKind::DuplicateBinder(_)));
    assert!(matches!(kind("<A[i]>.0"), ParseErrorKind::UnboundIndex(_)));
    assert!(matches!(kind("par[i in Z] <A[i]>.0"), ParseErrorKind::UnknownIndexSet(_)));
}

#[test]
fn empty_point_sets_are_flagged() {
    let m = parse("<{A}:K [at l1 dest {}]>.0").unwrap();
    assert_eq!(m.warnings.len(), 1);
    let m = parse("<{A}:K [at l1 dest {l1}]>.0").unwrap();
    assert!(m.warnings.is_empty());
}

#[test]
fn attacker_index_is_dropped_unless_legitimate() {
    let src = "let X = {1}\nlet Y = X + {0}\npar[i in Y] <A[i]>.0";
    let out = |n: u32| Process::Out(vec![Term::Name(Ident::indexed("A", [n]))], Box::new(Process::Nil));
    assert_eq!(parse_process(src).unwrap(), Process::par(out(0), out(1)));
    let dropped = expand_with(
        &parse(src).unwrap(),
        &ExpandOptions {
            drop_attacker_index: true,
            ..Default::default()
        },
    )
    .unwrap();
    assert_eq!(dropped, out(1));
}

proptest! {
    #[test]
    fn random_processes_round_trip(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = common::random_process(&mut rng, 24);
        let text = pretty(&p);
        match parse_process(&text) {
            Ok(q) => prop_assert_eq!(p, q),
            Err(e) if matches!(e.kind, ParseErrorKind::UnknownPoint(_)) => {}
            Err(e) => prop_assert!(false, "{}\n{}", e, text),
        }
    }
}
