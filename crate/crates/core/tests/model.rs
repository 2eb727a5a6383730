mod common;

use std::collections::BTreeSet;

use lysa::model::{arity_profile, canonical, free_names, Ident, IndexPolicy, Process};
use lysa::parse_process;
use lysa::scenario::CASE1_BASE;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn case1_arity_profile() {
    let p = parse_process(CASE1_BASE).unwrap();
    let prof = arity_profile(&p);
    assert_eq!(prof.max_tuple, 3);
    assert_eq!(prof.enc_arities, BTreeSet::from([1, 3, 5]));
}

#[test]
fn example2_free_names() {
    let p = parse_process(lysa::scenario::EXAMPLE2).unwrap();
    let names: BTreeSet<String> = free_names(&p).iter().map(|n| n.to_string()).collect();
    assert_eq!(names, BTreeSet::from(["A".into(), "B".into(), "KA".into()]));
}

fn process(seed: u64) -> Process {
    common::random_process(&mut ChaCha8Rng::seed_from_u64(seed), 24)
}

proptest! {
    #[test]
    fn canonical_is_idempotent(base in "[A-Z][a-z]{0,3}", idx in prop::collection::vec(0u32..6, 0..3)) {
        let policy = IndexPolicy::groups([1, 2, 3]);
        let n = Ident::indexed(base.clone(), idx.clone());
        let rep: Vec<u32> = idx.iter().map(|&i| if (1..=3).contains(&i) { i } else { 5 }).collect();
        let r = Ident::indexed(base, rep);
        prop_assert_eq!(canonical(&n, &policy), canonical(&r, &policy));
        prop_assert_eq!(canonical(&r, &policy), canonical(&r, &policy));
        let all = IndexPolicy::default();
        prop_assert_eq!(canonical(&n, &all).to_string(), n.to_string());
    }

    #[test]
    fn free_names_distribute_over_par(a in any::<u64>(), b in any::<u64>()) {
        let (p, q) = (process(a), process(b));
        let both = Process::par(p.clone(), q.clone());
        let mut expected = free_names(&p);
        expected.extend(free_names(&q));
        prop_assert_eq!(free_names(&both), expected);
    }

    #[test]
    fn replication_keeps_free_names(a in any::<u64>()) {
        let p = process(a);
        prop_assert_eq!(free_names(&Process::Repl(Box::new(p.clone()))), free_names(&p));
    }
}
