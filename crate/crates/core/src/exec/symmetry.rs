//! Canonical forms of states up to renumbering the copies of each replication.
//!
//! Copy `k` of a replicated thread at path `P` owns every thread whose path
//! starts with `P+[k]` and every name whose serial starts with `P+[k]` and is
//! longer than that prefix. Renumbering copies is a bijection on paths and
//! serials, so two states with the same canonical form have the same futures
//! up to renaming.

use std::collections::hash_map::DefaultHasher;
use std::collections::{BTreeMap, BTreeSet};
use std::hash::{Hash, Hasher};

use rustc_hash::{FxHashMap, FxHasher};

use super::engine::{State, Store, Thread, Val, Vid, EARLIER};

fn owned(serial: &[u32], prefix: &[u32]) -> bool {
    serial.len() > prefix.len() && serial.starts_with(prefix) && serial[0] != EARLIER
}

fn hash_of(x: impl Hash) -> u64 {
    let mut h = FxHasher::default();
    x.hash(&mut h);
    h.finish()
}

/// Hashes values with the names owned by one copy made relative to it and
/// the names of other copies erased.
struct Masker<'a> {
    st: &'a Store,
    copy: Vec<u32>,
    memo: FxHashMap<Vid, (u64, bool)>,
}

impl Masker<'_> {
    /// The masked hash of `v` and whether it mentions the copy.
    fn value(&mut self, v: Vid) -> (u64, bool) {
        if let Some(&r) = self.memo.get(&v) {
            return r;
        }
        let r = match self.st.get(v) {
            Val::Name { name, serial } if serial.is_empty() => (hash_of((0u8, name)), false),
            Val::Name { name, serial } if owned(serial, &self.copy) => {
                (hash_of((1u8, name, &serial[self.copy.len()..])), true)
            }
            Val::Name { name, serial } if serial[0] == EARLIER => (hash_of((0u8, name, serial)), false),
            Val::Name { name, .. } => (hash_of((2u8, name)), false),
            Val::Enc { payload, key, ann } => {
                let mut h = FxHasher::default();
                3u8.hash(&mut h);
                ann.hash(&mut h);
                let (k, mut m) = self.value(*key);
                k.hash(&mut h);
                for &p in payload.iter() {
                    let (x, mp) = self.value(p);
                    x.hash(&mut h);
                    m |= mp;
                }
                (h.finish(), m)
            }
        };
        self.memo.insert(v, r);
        r
    }
}

/// Copies of the replication at the prefix whose names occur in a value.
struct Mentions<'a> {
    st: &'a Store,
    prefix: &'a [u32],
    memo: FxHashMap<Vid, Vec<u32>>,
}

impl Mentions<'_> {
    fn value(&mut self, v: Vid, out: &mut BTreeSet<u32>) {
        if let Some(ks) = self.memo.get(&v) {
            out.extend(ks);
            return;
        }
        let mut ks = BTreeSet::new();
        match self.st.get(v) {
            Val::Name { serial, .. } => {
                if serial.len() > self.prefix.len() + 1 && owned(serial, self.prefix) {
                    ks.insert(serial[self.prefix.len()]);
                }
            }
            Val::Enc { payload, key, .. } => {
                self.value(*key, &mut ks);
                for &p in payload.iter() {
                    self.value(p, &mut ks);
                }
            }
        }
        out.extend(&ks);
        self.memo.insert(v, ks.into_iter().collect());
    }
}

fn child(path: &[u32], prefix: &[u32]) -> Option<u32> {
    (path.len() > prefix.len() && path.starts_with(prefix)).then(|| path[prefix.len()])
}

/// Per copy of the replication at `prefix`, a hash of everything it owns,
/// taken relative to the copy.
fn signatures(st: &Store, s: &State, prefix: &[u32]) -> BTreeMap<u32, u64> {
    let mut parts: BTreeMap<u32, Vec<u64>> = BTreeMap::new();
    let mut mentions = Mentions {
        st,
        prefix,
        memo: FxHashMap::default(),
    };
    let mut maskers: FxHashMap<u32, Masker<'_>> = FxHashMap::default();
    let mut masked = |k: u32, v: Vid| -> u64 {
        maskers
            .entry(k)
            .or_insert_with(|| {
                let mut copy = prefix.to_vec();
                copy.push(k);
                Masker {
                    st,
                    copy,
                    memo: FxHashMap::default(),
                }
            })
            .value(v)
            .0
    };
    let mut ks = BTreeSet::new();
    for t in &s.threads {
        for &(_, v) in &t.env {
            mentions.value(v, &mut ks);
        }
        if let Some(k) = child(&t.path, prefix) {
            let env: Vec<(u32, u64)> = t.env.iter().map(|&(x, v)| (x, masked(k, v))).collect();
            let h = hash_of((0u8, t.node, &t.path[prefix.len() + 1..], t.counter, env));
            parts.entry(k).or_default().push(h);
        }
    }
    for k in std::mem::take(&mut ks) {
        parts.entry(k).or_default();
    }
    for m in &s.ether {
        for &v in m.iter() {
            mentions.value(v, &mut ks);
        }
        for k in std::mem::take(&mut ks) {
            let vs: Vec<u64> = m.iter().map(|&v| masked(k, v)).collect();
            parts.entry(k).or_default().push(hash_of((1u8, vs)));
        }
    }
    for (v, sess) in &s.history {
        mentions.value(*v, &mut ks);
        let own = child(sess, prefix);
        ks.extend(own);
        for k in std::mem::take(&mut ks) {
            let rel = (own == Some(k)).then(|| &sess[prefix.len() + 1..]);
            let h = hash_of((2u8, masked(k, *v), rel));
            parts.entry(k).or_default().push(h);
        }
    }
    parts
        .into_iter()
        .map(|(k, mut hs)| {
            hs.sort_unstable();
            (k, hash_of(hs))
        })
        .collect()
}

fn remap_path(p: &mut [u32], prefix: &[u32], perm: &BTreeMap<u32, u32>) {
    if p.len() > prefix.len() && p.starts_with(prefix) {
        if let Some(&k) = perm.get(&p[prefix.len()]) {
            p[prefix.len()] = k;
        }
    }
}

struct Remapper<'p> {
    prefix: &'p [u32],
    perm: &'p BTreeMap<u32, u32>,
    memo: FxHashMap<Vid, Vid>,
}

impl Remapper<'_> {
    fn value(&mut self, st: &mut Store, v: Vid) -> Vid {
        if let Some(&w) = self.memo.get(&v) {
            return w;
        }
        let w = match st.get(v).clone() {
            Val::Name { name, mut serial } => {
                if serial.len() > self.prefix.len() + 1 && serial[0] != EARLIER {
                    remap_path(&mut serial, self.prefix, self.perm);
                }
                st.intern(Val::Name { name, serial })
            }
            Val::Enc { payload, key, ann } => {
                let payload = payload.iter().map(|&p| self.value(st, p)).collect();
                let key = self.value(st, key);
                st.intern(Val::Enc { payload, key, ann })
            }
        };
        self.memo.insert(v, w);
        w
    }
}

fn remap(st: &mut Store, s: &mut State, prefix: &[u32], perm: &BTreeMap<u32, u32>) {
    let mut r = Remapper {
        prefix,
        perm,
        memo: FxHashMap::default(),
    };
    for t in &mut s.threads {
        remap_path(&mut t.path, prefix, perm);
        for slot in &mut t.env {
            slot.1 = r.value(st, slot.1);
        }
    }
    for m in &mut s.ether {
        for v in m.iter_mut() {
            *v = r.value(st, *v);
        }
    }
    for (v, sess) in &mut s.history {
        *v = r.value(st, *v);
        remap_path(sess, prefix, perm);
    }
    s.history.sort();
}

/// Orders the copies of the replication at `prefix` by signature.
fn permutation(st: &Store, s: &State, prefix: &[u32]) -> Option<BTreeMap<u32, u32>> {
    let sigs = signatures(st, s, prefix);
    if sigs.len() < 2 {
        return None;
    }
    let mut keyed: Vec<(u64, u32)> = sigs.iter().map(|(&k, &h)| (h, k)).collect();
    keyed.sort_unstable();
    let perm: BTreeMap<u32, u32> = keyed
        .iter()
        .zip(sigs.keys())
        .map(|(&(_, old), &new)| (old, new))
        .collect();
    perm.iter().any(|(a, b)| a != b).then_some(perm)
}

/// `s` with the copies of every replication renumbered canonically.
pub(super) fn canonical(s: &State, st: &mut Store, is_repl: impl Fn(&Thread) -> bool) -> State {
    let mut s = s.clone();
    let mut level = 0;
    loop {
        let repls: Vec<Vec<u32>> = s
            .threads
            .iter()
            .filter(|t| t.path.len() == level && is_repl(t))
            .map(|t| t.path.clone())
            .collect();
        for p in repls {
            if let Some(perm) = permutation(st, &s, &p) {
                remap(st, &mut s, &p, &perm);
            }
        }
        if !s.threads.iter().any(|t| t.path.len() > level && is_repl(t)) {
            break;
        }
        level += 1;
    }
    s.threads.sort();
    s.ether.sort();
    s
}

/// A 128-bit digest of the state.
pub(super) fn digest(s: &State) -> u128 {
    let mut a = DefaultHasher::new();
    s.hash(&mut a);
    let mut b = DefaultHasher::new();
    0x9e37_79b9_7f4a_7c15_u64.hash(&mut b);
    s.hash(&mut b);
    (u128::from(a.finish()) << 64) | u128::from(b.finish())
}
