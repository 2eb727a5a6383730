mod common;

use std::collections::BTreeSet;

use lysa::cfa::{analyze, AnalysisOptions, AbstractValue};
use lysa::exec::{
    capture_round, covered, explore, replay_round, replay_run, run, Event, ExploreOptions,
    RuntimeValue, Scheduler,
};
use lysa::model::{canonical, IndexPolicy};
use lysa::scenario::{CASE1_BASE, CASE1_FIXED};
use lysa::{parse_process, Ident, Process};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const EXAMPLE2: &str = "
new(K) <A, B, KA, {K}:KA[at lA dest {lB}]>.0
| (A, B; xKA, x). decrypt x as {; xK}:xKA[at lB orig {lA}] in 0
";

fn bound(t: &lysa::exec::Trace, var: &str) -> Vec<String> {
    t.bindings()
        .filter(|(x, _)| x.to_string() == var)
        .map(|(_, v)| v.to_string())
        .collect()
}

fn strip_serials(s: &str) -> String {
    let mut out = String::new();
    let mut skip = false;
    for c in s.chars() {
        if c == '#' {
            skip = true;
            out.push('#');
        } else if skip && (c.is_ascii_digit() || c == '.' || c.is_ascii_lowercase()) {
        } else {
            skip = false;
            out.push(c);
        }
    }
    out
}

fn single_instance(src: &str) -> Process {
    let mut s = lysa::scenario::Scenario::new("t", "t.lysa", src);
    s.index_sets = [("X".to_string(), [1].into())].into();
    s.process().unwrap().0
}

#[test]
fn example2_run_matches_the_analysis_lines() {
    let p = parse_process(EXAMPLE2).unwrap();
    let t = run(&p, 4, Scheduler::First);
    let sent: Vec<String> = t.sent().map(|m| format!("{m:?}")).collect();
    assert_eq!(sent.len(), 1);
    assert_eq!(bound(&t, "xKA"), vec!["KA"]);
    assert_eq!(bound(&t, "x").len(), 1);
    assert!(bound(&t, "x")[0].starts_with("{K#"));
    assert!(bound(&t, "xK")[0].starts_with("K#"));
    let r = analyze(&p, &AnalysisOptions::default()).unwrap();
    assert!(covered(&t, &r));
}

#[test]
fn nil_has_an_empty_trace() {
    for depth in [0, 3, 10] {
        assert!(run(&Process::Nil, depth, Scheduler::First).events.is_empty());
    }
}

#[test]
fn mismatched_input_is_stuck() {
    let p = parse_process(
        "new(K) <A, B, KA, {K}:KA[at lA dest {lB}]>.0
         | (A, C; xKA, x). decrypt x as {; xK}:xKA[at lB orig {lA}] in 0",
    )
    .unwrap();
    let t = run(&p, 4, Scheduler::First);
    assert_eq!(t.bindings().count(), 0);
    assert!(t
        .events
        .iter()
        .any(|e| matches!(e, Event::Stuck(why) if why == "no matching input")));
}

#[test]
fn failed_decryption_is_stuck() {
    let p = parse_process("<{A}:K>.0 | (; x). decrypt x as {; y}:K2 in 0").unwrap();
    let t = run(&p, 4, Scheduler::First);
    assert!(t
        .events
        .iter()
        .any(|e| matches!(e, Event::Stuck(why) if why == "decryption failed")));
    assert!(bound(&t, "y").is_empty());
}

#[test]
fn seeded_runs_are_reproducible() {
    let p = single_instance(CASE1_FIXED);
    for seed in 0..5 {
        let a = run(&p, 10, Scheduler::Seeded(seed));
        let b = run(&p, 10, Scheduler::Seeded(seed));
        assert_eq!(a, b);
    }
}

#[test]
fn replay_without_captures_is_a_plain_run() {
    let p = parse_process(EXAMPLE2).unwrap();
    let a: BTreeSet<Event> = replay_run(&p, &[], 6).events.into_iter().collect();
    let b: BTreeSet<Event> = run(&p, 6, Scheduler::First).events.into_iter().collect();
    assert_eq!(a, b);
}

#[test]
fn exhaustive_search_contains_every_random_schedule() {
    let p = single_instance(CASE1_FIXED);
    let depth = 7;
    let all: BTreeSet<String> = explore(
        &p,
        &ExploreOptions {
            depth,
            ..Default::default()
        },
    )
    .events
    .events
    .iter()
    .map(|e| strip_serials(&e.to_string()))
    .collect();
    for seed in 0..50 {
        for e in run(&p, depth, Scheduler::Seeded(seed)).events {
            if matches!(e, Event::Stuck(_)) {
                continue;
            }
            let e = strip_serials(&e.to_string());
            assert!(all.contains(&e), "seed {seed}: {e}");
        }
    }
}

#[test]
fn replicated_fresh_names_share_a_class() {
    let p = parse_process("!new(N) <N>.0").unwrap();
    let ex = explore(
        &p,
        &ExploreOptions {
            depth: 2,
            ..Default::default()
        },
    );
    let values: BTreeSet<RuntimeValue> = ex.events.sent().map(|t| t[0].clone()).collect();
    assert_eq!(values.len(), 2);
    let policy = IndexPolicy::default();
    let classes: BTreeSet<AbstractValue> = values.iter().map(|v| v.abstracted(&policy)).collect();
    assert_eq!(classes.len(), 1);
    assert_eq!(
        classes.into_iter().next().unwrap(),
        AbstractValue::Name(canonical(&Ident::new("N"), &policy))
    );
}

#[test]
fn replayed_key_transport_reuses_the_old_key_in_base_case1() {
    let p = single_instance(CASE1_BASE);
    let round = capture_round(&p, 12, "xLK");
    assert_eq!(round.bound.len(), 1);
    let ex = replay_round(&p, &round, 12, "xLK");
    let w = ex.witness.expect("round-2 reuse of the round-1 key");
    let last = w.events.last().unwrap();
    match last {
        Event::Bound { var, value, .. } => {
            assert_eq!(var.base, "xLK");
            assert_eq!(value, &round.bound[0]);
        }
        e => panic!("witness ends with {e}"),
    }
}

#[test]
fn replayed_messages_fail_the_nonce_checks_in_fixed_case1() {
    let p = single_instance(CASE1_FIXED);
    let round = capture_round(&p, 12, "xLK");
    let ex = replay_round(&p, &round, 12, "xLK");
    assert!(ex.witness.is_none());
    assert!(!ex.truncated);
    assert!(ex
        .events
        .events
        .iter()
        .any(|e| matches!(e, Event::Stuck(why) if why == "decryption failed")));
    for (x, v) in ex.events.bindings() {
        if x.base == "yLK" || x.base == "xLK" {
            assert!(!round.bound.contains(v), "{x} = {v}");
        }
    }
}

#[test]
fn forged_empty_result_does_not_cover() {
    let p = parse_process(EXAMPLE2).unwrap();
    let r = analyze(&p, &AnalysisOptions::default()).unwrap();
    let t = run(&p, 4, Scheduler::First);
    assert!(covered(&t, &r));
    assert!(!covered(&t, &r.empty_like()));
}

#[test]
fn random_processes_are_covered() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    for k in 0..200 {
        let p = common::random_process(&mut rng, 12);
        let missing = common::uncovered_events(&p, 6);
        assert!(missing.is_empty(), "process {k}: {}\n{missing:?}", lysa::pretty(&p));
    }
}

#[test]
fn larger_random_processes_are_covered() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xb16);
    let mut events = 0;
    for k in 0..100 {
        let p = common::random_process(&mut rng, 24);
        let missing = common::uncovered_events(&p, 6);
        assert!(missing.is_empty(), "process {k}: {}\n{missing:?}", lysa::pretty(&p));
        events += explore(
            &p,
            &ExploreOptions {
                depth: 6,
                ..Default::default()
            },
        )
        .events
        .events
        .len();
    }
    assert!(events > 300);
}
