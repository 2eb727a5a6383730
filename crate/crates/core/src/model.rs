//! Abstract syntax of the symmetric fragment of LySa.
//!
//! Names and variables share the [`Ident`] shape: a base token plus a list of
//! concrete indices produced by template expansion. Indices equal to `0` are
//! reserved for principals affiliated with the attacker.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

/// A possibly indexed identifier such as `K`, `KA[1]` or `MSG[1,2]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Ident {
    pub base: String,
    pub indices: Vec<u32>,
}

/// Names are identifiers that are not bound by an input or a decryption.
pub type Name = Ident;

impl Ident {
    pub fn new(base: impl Into<String>) -> Self {
        Ident {
            base: base.into(),
            indices: Vec::new(),
        }
    }

    pub fn indexed(base: impl Into<String>, indices: impl Into<Vec<u32>>) -> Self {
        Ident {
            base: base.into(),
            indices: indices.into(),
        }
    }

    /// True when any index is the attacker index `0`.
    pub fn is_attacker_affiliated(&self) -> bool {
        self.indices.contains(&0)
    }
}

impl fmt::Display for Ident {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.base)?;
        if !self.indices.is_empty() {
            f.write_str("[")?;
            for (i, idx) in self.indices.iter().enumerate() {
                if i > 0 {
                    f.write_str(",")?;
                }
                write!(f, "{idx}")?;
            }
            f.write_str("]")?;
        }
        Ok(())
    }
}

/// Representative of an equivalence class of names.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CanonicalName(pub String);

impl CanonicalName {
    /// The attacker's canonical name `n•`.
    pub fn attacker() -> Self {
        CanonicalName("n•".to_string())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for CanonicalName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Decides which indices keep names apart.
///
/// With `instantiated = None` every concrete index is kept. Otherwise indices
/// outside the set collapse to a single `*` class.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct IndexPolicy {
    pub instantiated: Option<BTreeSet<u32>>,
}

impl IndexPolicy {
    pub fn groups(indices: impl IntoIterator<Item = u32>) -> Self {
        IndexPolicy {
            instantiated: Some(indices.into_iter().collect()),
        }
    }
}

/// Maps a name to its canonical class.
pub fn canonical(name: &Name, policy: &IndexPolicy) -> CanonicalName {
    if name.indices.is_empty() {
        return CanonicalName(name.base.clone());
    }
    let parts: Vec<String> = name
        .indices
        .iter()
        .map(|i| match &policy.instantiated {
            Some(set) if !set.contains(i) => "*".to_string(),
            _ => i.to_string(),
        })
        .collect();
    CanonicalName(format!("{}[{}]", name.base, parts.join(",")))
}

/// A crypto-point labels one encryption or decryption site.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum CryptoPoint {
    Site(Ident),
    /// The attacker's unique point `ℓ•`.
    Attacker,
}

impl CryptoPoint {
    pub fn site(label: Ident) -> Self {
        CryptoPoint::Site(label)
    }

    pub fn label(s: &str) -> Self {
        CryptoPoint::Site(Ident::new(s))
    }
}

impl fmt::Display for CryptoPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CryptoPoint::Site(id) => write!(f, "{id}"),
            CryptoPoint::Attacker => f.write_str("l•"),
        }
    }
}

/// A `dest` or `orig` assertion: either every point (`C`) or an explicit set.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PointSet {
    All,
    Only(BTreeSet<CryptoPoint>),
}

impl PointSet {
    pub fn only(points: impl IntoIterator<Item = CryptoPoint>) -> Self {
        PointSet::Only(points.into_iter().collect())
    }

    pub fn contains(&self, p: &CryptoPoint) -> bool {
        match self {
            PointSet::All => true,
            PointSet::Only(s) => s.contains(p),
        }
    }

    pub fn is_empty(&self) -> bool {
        matches!(self, PointSet::Only(s) if s.is_empty())
    }
}

impl fmt::Display for PointSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PointSet::All => f.write_str("C"),
            PointSet::Only(s) => {
                f.write_str("{")?;
                for (i, p) in s.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{p}")?;
                }
                f.write_str("}")
            }
        }
    }
}

/// `[at ℓ dest L]` on an encryption, `[at ℓ orig L]` on a decryption.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Annotation {
    pub at: CryptoPoint,
    pub points: PointSet,
}

impl Annotation {
    pub fn new(at: CryptoPoint, points: PointSet) -> Self {
        Annotation { at, points }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Term {
    Name(Name),
    Var(Ident),
    /// `{E1,...,Ek}:E0`, optionally annotated. Unannotated encryptions are
    /// plain values used to encode hashes and MACs.
    Enc {
        payload: Vec<Term>,
        key: Box<Term>,
        ann: Option<Annotation>,
    },
}

impl Term {
    pub fn name(base: &str) -> Self {
        Term::Name(Ident::new(base))
    }

    pub fn var(base: &str) -> Self {
        Term::Var(Ident::new(base))
    }

    pub fn enc(payload: Vec<Term>, key: Term, ann: Option<Annotation>) -> Self {
        Term::Enc {
            payload,
            key: Box::new(key),
            ann,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Process {
    Nil,
    Par(Box<Process>, Box<Process>),
    Repl(Box<Process>),
    New(Name, Box<Process>),
    Out(Vec<Term>, Box<Process>),
    /// `(E1,...,Ej; x_{j+1},...,x_k).P`
    In {
        pattern: Vec<Term>,
        bind: Vec<Ident>,
        cont: Box<Process>,
    },
    /// `decrypt E as {E1,...,Ej; x_{j+1},...,x_k}:E0 [at ℓ orig L] in P`
    Decrypt {
        subject: Term,
        pattern: Vec<Term>,
        bind: Vec<Ident>,
        key: Term,
        ann: Option<Annotation>,
        cont: Box<Process>,
    },
}

impl Process {
    pub fn par(left: Process, right: Process) -> Self {
        Process::Par(Box::new(left), Box::new(right))
    }

    /// Right-nested parallel composition; the empty list is `0`.
    pub fn par_all(procs: Vec<Process>) -> Self {
        let mut iter = procs.into_iter().rev();
        match iter.next() {
            None => Process::Nil,
            Some(last) => iter.fold(last, |acc, p| Process::par(p, acc)),
        }
    }

    /// Number of AST nodes, counting terms.
    pub fn size(&self) -> usize {
        fn term_size(t: &Term) -> usize {
            match t {
                Term::Name(_) | Term::Var(_) => 1,
                Term::Enc { payload, key, .. } => {
                    1 + term_size(key) + payload.iter().map(term_size).sum::<usize>()
                }
            }
        }
        match self {
            Process::Nil => 1,
            Process::Par(l, r) => 1 + l.size() + r.size(),
            Process::Repl(p) | Process::New(_, p) => 1 + p.size(),
            Process::Out(ts, p) => 1 + ts.iter().map(term_size).sum::<usize>() + p.size(),
            Process::In { pattern, bind, cont } => {
                1 + pattern.iter().map(term_size).sum::<usize>() + bind.len() + cont.size()
            }
            Process::Decrypt {
                subject,
                pattern,
                bind,
                key,
                cont,
                ..
            } => {
                1 + term_size(subject)
                    + term_size(key)
                    + pattern.iter().map(term_size).sum::<usize>()
                    + bind.len()
                    + cont.size()
            }
        }
    }
}

fn term_names(t: &Term, bound: &BTreeSet<Name>, out: &mut BTreeSet<Name>) {
    match t {
        Term::Name(n) => {
            if !bound.contains(n) {
                out.insert(n.clone());
            }
        }
        Term::Var(_) => {}
        Term::Enc { payload, key, .. } => {
            for p in payload {
                term_names(p, bound, out);
            }
            term_names(key, bound, out);
        }
    }
}

/// Names occurring in `p` outside the scope of a restriction.
pub fn free_names(p: &Process) -> BTreeSet<Name> {
    fn go(p: &Process, bound: &mut BTreeSet<Name>, out: &mut BTreeSet<Name>) {
        match p {
            Process::Nil => {}
            Process::Par(l, r) => {
                go(l, bound, out);
                go(r, bound, out);
            }
            Process::Repl(q) => go(q, bound, out),
            Process::New(n, q) => {
                let fresh = bound.insert(n.clone());
                go(q, bound, out);
                if fresh {
                    bound.remove(n);
                }
            }
            Process::Out(ts, q) => {
                ts.iter().for_each(|t| term_names(t, bound, out));
                go(q, bound, out);
            }
            Process::In { pattern, cont, .. } => {
                pattern.iter().for_each(|t| term_names(t, bound, out));
                go(cont, bound, out);
            }
            Process::Decrypt {
                subject,
                pattern,
                key,
                cont,
                ..
            } => {
                term_names(subject, bound, out);
                pattern.iter().for_each(|t| term_names(t, bound, out));
                term_names(key, bound, out);
                go(cont, bound, out);
            }
        }
    }
    let mut out = BTreeSet::new();
    go(p, &mut BTreeSet::new(), &mut out);
    out
}

/// Every name occurring in `p`, bound or free.
pub fn all_names(p: &Process) -> BTreeSet<Name> {
    fn term(t: &Term, out: &mut BTreeSet<Name>) {
        match t {
            Term::Name(n) => {
                out.insert(n.clone());
            }
            Term::Var(_) => {}
            Term::Enc { payload, key, .. } => {
                payload.iter().for_each(|t| term(t, out));
                term(key, out);
            }
        }
    }
    fn go(p: &Process, out: &mut BTreeSet<Name>) {
        match p {
            Process::Nil => {}
            Process::Par(l, r) => {
                go(l, out);
                go(r, out);
            }
            Process::Repl(q) => go(q, out),
            Process::New(n, q) => {
                out.insert(n.clone());
                go(q, out);
            }
            Process::Out(ts, q) => {
                ts.iter().for_each(|t| term(t, out));
                go(q, out);
            }
            Process::In { pattern, cont, .. } => {
                pattern.iter().for_each(|t| term(t, out));
                go(cont, out);
            }
            Process::Decrypt {
                subject,
                pattern,
                key,
                cont,
                ..
            } => {
                term(subject, out);
                pattern.iter().for_each(|t| term(t, out));
                term(key, out);
                go(cont, out);
            }
        }
    }
    let mut out = BTreeSet::new();
    go(p, &mut out);
    out
}

/// Names introduced by a restriction somewhere in `p`.
pub fn restricted_names(p: &Process) -> BTreeSet<Name> {
    fn go(p: &Process, out: &mut BTreeSet<Name>) {
        match p {
            Process::Nil => {}
            Process::Par(l, r) => {
                go(l, out);
                go(r, out);
            }
            Process::Repl(q) | Process::Out(_, q) => go(q, out),
            Process::New(n, q) => {
                out.insert(n.clone());
                go(q, out);
            }
            Process::In { cont, .. } | Process::Decrypt { cont, .. } => go(cont, out),
        }
    }
    let mut out = BTreeSet::new();
    go(p, &mut out);
    out
}

/// Tuple and encryption arities of a process; bounds what the attacker builds.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ArityProfile {
    pub max_tuple: usize,
    pub tuple_arities: BTreeSet<usize>,
    pub enc_arities: BTreeSet<usize>,
}

pub fn arity_profile(p: &Process) -> ArityProfile {
    fn term(t: &Term, prof: &mut ArityProfile) {
        if let Term::Enc { payload, key, .. } = t {
            prof.enc_arities.insert(payload.len());
            payload.iter().for_each(|t| term(t, prof));
            term(key, prof);
        }
    }
    fn tuple(k: usize, prof: &mut ArityProfile) {
        prof.tuple_arities.insert(k);
        prof.max_tuple = prof.max_tuple.max(k);
    }
    fn go(p: &Process, prof: &mut ArityProfile) {
        match p {
            Process::Nil => {}
            Process::Par(l, r) => {
                go(l, prof);
                go(r, prof);
            }
            Process::Repl(q) | Process::New(_, q) => go(q, prof),
            Process::Out(ts, q) => {
                tuple(ts.len(), prof);
                ts.iter().for_each(|t| term(t, prof));
                go(q, prof);
            }
            Process::In {
                pattern,
                bind,
                cont,
            } => {
                tuple(pattern.len() + bind.len(), prof);
                pattern.iter().for_each(|t| term(t, prof));
                go(cont, prof);
            }
            Process::Decrypt {
                subject,
                pattern,
                bind,
                key,
                cont,
                ..
            } => {
                prof.enc_arities.insert(pattern.len() + bind.len());
                term(subject, prof);
                pattern.iter().for_each(|t| term(t, prof));
                term(key, prof);
                go(cont, prof);
            }
        }
    }
    let mut prof = ArityProfile::default();
    go(p, &mut prof);
    prof
}
