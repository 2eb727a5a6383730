//! Concrete execution of closed processes.
//!
//! Threads communicate through one global ether. Everything except inputs and
//! replication unfolding runs eagerly, so a schedule is a sequence of input
//! and unfold steps. Fresh names get a serial built from the path of the
//! minting thread, which makes states reached by different interleavings of
//! independent steps identical and lets exhaustive search memoise them.

mod engine;
mod symmetry;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;


use crate::cfa::{AbstractValue, AnalysisResult};
use engine::Explorer;

use crate::model::{canonical, Annotation, CryptoPoint, Ident, IndexPolicy, Name, Process};

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RuntimeValue {
    /// `serial` is empty for free names.
    Name { name: Name, serial: Vec<u32> },
    Enc {
        payload: Vec<RuntimeValue>,
        key: Box<RuntimeValue>,
        ann: Option<Annotation>,
    },
}

impl RuntimeValue {
    pub fn free(name: Name) -> Self {
        RuntimeValue::Name {
            name,
            serial: Vec::new(),
        }
    }

    pub fn abstracted(&self, policy: &IndexPolicy) -> AbstractValue {
        match self {
            RuntimeValue::Name { name, .. } => AbstractValue::Name(canonical(name, policy)),
            RuntimeValue::Enc { payload, key, ann } => AbstractValue::Enc {
                payload: payload.iter().map(|v| v.abstracted(policy)).collect(),
                key: Box::new(key.abstracted(policy)),
                ann: ann.clone(),
            },
        }
    }

    /// True when the value is a name minted by a restriction.
    pub fn is_fresh(&self) -> bool {
        matches!(self, RuntimeValue::Name { serial, .. } if !serial.is_empty())
    }
}

impl fmt::Display for RuntimeValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RuntimeValue::Name { name, serial } if serial.is_empty() => write!(f, "{name}"),
            RuntimeValue::Name { name, serial } => {
                let s: Vec<String> = serial
                    .iter()
                    .map(|&x| match x {
                        engine::EARLIER => "prev".to_string(),
                        x => x.to_string(),
                    })
                    .collect();
                write!(f, "{name}#{}", s.join("."))
            }
            RuntimeValue::Enc { payload, key, ann } => {
                let p: Vec<String> = payload.iter().map(|v| v.to_string()).collect();
                write!(f, "{{{}}}:", p.join(", "))?;
                match **key {
                    RuntimeValue::Name { .. } => write!(f, "{key}")?,
                    _ => write!(f, "({key})")?,
                }
                if let Some(a) = ann {
                    write!(f, "[at {} dest {}]", a.at, a.points)?;
                }
                Ok(())
            }
        }
    }
}

pub type Tuple = Vec<RuntimeValue>;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Event {
    Sent(Tuple),
    /// `session` is the path of the binding thread.
    Bound {
        var: Ident,
        value: RuntimeValue,
        session: Vec<u32>,
    },
    /// A successful decryption at `at` of a value encrypted at `origin`.
    Decrypted {
        at: CryptoPoint,
        origin: CryptoPoint,
        authentic: bool,
    },
    Stuck(String),
}

impl fmt::Display for Event {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Event::Sent(t) => {
                let p: Vec<String> = t.iter().map(|v| v.to_string()).collect();
                write!(f, "sent <{}>", p.join(", "))
            }
            Event::Bound { var, value, .. } => write!(f, "bound {var} = {value}"),
            Event::Decrypted { at, origin, authentic } => {
                write!(f, "decrypted at {at} from {origin}")?;
                if !authentic {
                    f.write_str(" (annotation violated)")?;
                }
                Ok(())
            }
            Event::Stuck(why) => write!(f, "stuck: {why}"),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Trace {
    pub events: Vec<Event>,
}

impl Trace {
    pub fn bindings(&self) -> impl Iterator<Item = (&Ident, &RuntimeValue)> {
        self.events.iter().filter_map(|e| match e {
            Event::Bound { var, value, .. } => Some((var, value)),
            _ => None,
        })
    }

    pub fn sent(&self) -> impl Iterator<Item = &Tuple> {
        self.events.iter().filter_map(|e| match e {
            Event::Sent(t) => Some(t),
            _ => None,
        })
    }
}

/// Chooses among enabled steps in [`run`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheduler {
    First,
    Seeded(u64),
}

/// Does the analysis account for every message and binding of the trace?
pub fn covered(trace: &Trace, result: &AnalysisResult) -> bool {
    uncovered(trace, result).is_empty()
}

/// Events of the trace the analysis fails to account for.
pub fn uncovered<'t>(trace: &'t Trace, result: &AnalysisResult) -> Vec<&'t Event> {
    let policy = &result.index.policy;
    trace
        .events
        .iter()
        .filter(|e| match e {
            Event::Sent(t) => {
                let abs: Vec<AbstractValue> = t.iter().map(|v| v.abstracted(policy)).collect();
                !result.kappa_contains(&abs)
            }
            Event::Bound { var, value, .. } => !result.rho_contains(var, &value.abstracted(policy)),
            Event::Decrypted {
                at,
                origin,
                authentic,
            } => !authentic && !result.psi.contains(&(origin.clone(), at.clone())),
            Event::Stuck(_) => false,
        })
        .collect()
}

/// Exploration settings.
#[derive(Debug, Clone, Default)]
pub struct ExploreOptions {
    pub depth: usize,
    /// Tuples the attacker may inject at any step, any number of times.
    pub captured: Vec<Tuple>,
    /// Every sent tuple stays available for replay after being received.
    pub replay: bool,
    /// Base name of a variable whose fresh values are tracked across sessions.
    pub watch: Option<String>,
    /// Upper bound on distinct states visited.
    pub max_states: Option<usize>,
    /// Values from an earlier round. Binding the watched variable to one of
    /// them counts as a reuse.
    pub stale: Vec<RuntimeValue>,
    /// Leaves `Exploration::events` empty, which saves memory on deep searches.
    pub skip_events: bool,
}

#[derive(Debug, Clone, Default)]
pub struct Exploration {
    /// Every event of every schedule, each once.
    pub events: Trace,
    pub states: usize,
    /// A schedule in which two sessions bind the watched variable to the same
    /// fresh value.
    pub witness: Option<Trace>,
    pub truncated: bool,
}

/// Explores every schedule of at most `opts.depth` steps.
pub fn explore(p: &Process, opts: &ExploreOptions) -> Exploration {
    Explorer::new(p, opts.clone()).explore()
}

/// Runs one schedule of at most `depth` steps.
pub fn run(p: &Process, depth: usize, schedule: Scheduler) -> Trace {
    Explorer::new(p, ExploreOptions::default()).run(depth, schedule)
}

/// Every event reachable within `depth` steps when the captured tuples may be
/// injected at any point.
pub fn replay_run(p: &Process, captured: &[Tuple], depth: usize) -> Trace {
    explore(
        p,
        &ExploreOptions {
            depth,
            captured: captured.to_vec(),
            ..Default::default()
        },
    )
    .events
}

/// Names restricted under a replication, minted anew in every session.
fn session_names(p: &Process, under: bool, out: &mut BTreeSet<Name>) {
    match p {
        Process::Nil => {}
        Process::Par(l, r) => {
            session_names(l, under, out);
            session_names(r, under, out);
        }
        Process::Repl(q) => session_names(q, true, out),
        Process::New(n, q) => {
            if under {
                out.insert(n.clone());
            }
            session_names(q, under, out);
        }
        Process::Out(_, q) => session_names(q, under, out),
        Process::In { cont, .. } | Process::Decrypt { cont, .. } => session_names(cont, under, out),
    }
}

/// The value as seen from a later round: session names are marked as minted
/// in an earlier round, so they never clash with the later round's own.
fn from_earlier_round(v: &RuntimeValue, session: &BTreeSet<Name>) -> RuntimeValue {
    match v {
        RuntimeValue::Name { name, serial } if session.contains(name) => {
            let mut marked = vec![engine::EARLIER];
            marked.extend(serial);
            RuntimeValue::Name {
                name: name.clone(),
                serial: marked,
            }
        }
        RuntimeValue::Name { .. } => v.clone(),
        RuntimeValue::Enc { payload, key, ann } => RuntimeValue::Enc {
            payload: payload.iter().map(|x| from_earlier_round(x, session)).collect(),
            key: Box::new(from_earlier_round(key, session)),
            ann: ann.clone(),
        },
    }
}

/// `p` with every replication replaced by a single copy of its body, so
/// each role runs one session.
pub fn single_session(p: &Process) -> Process {
    match p {
        Process::Nil => Process::Nil,
        Process::Par(l, r) => Process::Par(Box::new(single_session(l)), Box::new(single_session(r))),
        Process::Repl(q) => single_session(q),
        Process::New(n, q) => Process::New(n.clone(), Box::new(single_session(q))),
        Process::Out(ts, q) => Process::Out(ts.clone(), Box::new(single_session(q))),
        Process::In {
            pattern,
            bind,
            cont,
        } => Process::In {
            pattern: pattern.clone(),
            bind: bind.clone(),
            cont: Box::new(single_session(cont)),
        },
        Process::Decrypt {
            subject,
            pattern,
            bind,
            key,
            ann,
            cont,
        } => Process::Decrypt {
            subject: subject.clone(),
            pattern: pattern.clone(),
            bind: bind.clone(),
            key: key.clone(),
            ann: ann.clone(),
            cont: Box::new(single_session(cont)),
        },
    }
}

/// What an eavesdropper keeps from a first round of a protocol.
#[derive(Debug, Clone, Default)]
pub struct Round {
    /// Every message sent, with session names marked as first-round names.
    pub captured: Vec<Tuple>,
    /// Session names bound to the watched variable, marked likewise.
    pub bound: Vec<RuntimeValue>,
}

/// Runs every schedule of at most `depth` steps of one session of each role
/// and keeps its messages and the values taken by variables with base name
/// `watch`. Names restricted outside any replication are long-term and shared
/// with later rounds.
pub fn capture_round(p: &Process, depth: usize, watch: &str) -> Round {
    let mut session = BTreeSet::new();
    session_names(p, false, &mut session);
    let ex = explore(
        &single_session(p),
        &ExploreOptions {
            depth,
            ..Default::default()
        },
    );
    let captured: BTreeSet<Tuple> = ex
        .events
        .sent()
        .map(|t| t.iter().map(|v| from_earlier_round(v, &session)).collect())
        .collect();
    let bound: BTreeSet<RuntimeValue> = ex
        .events
        .bindings()
        .filter(|(x, v)| {
            x.base == watch && matches!(v, RuntimeValue::Name { name, .. } if session.contains(name))
        })
        .map(|(_, v)| from_earlier_round(v, &session))
        .collect();
    Round {
        captured: captured.into_iter().collect(),
        bound: bound.into_iter().collect(),
    }
}

/// Explores a second round of one session of each role, at most `depth`
/// steps, in which the captured messages of `round` may be injected at any
/// point. The witness, if any, binds a variable with base name `watch` to a
/// first-round value.
pub fn replay_round(p: &Process, round: &Round, depth: usize, watch: &str) -> Exploration {
    explore(
        &single_session(p),
        &ExploreOptions {
            depth,
            captured: round.captured.clone(),
            watch: Some(watch.to_string()),
            stale: round.bound.clone(),
            ..Default::default()
        },
    )
}

/// Names of fresh values in the trace, grouped by the variable they were bound to.
pub fn fresh_bindings(trace: &Trace) -> BTreeMap<Ident, BTreeSet<RuntimeValue>> {
    let mut out: BTreeMap<Ident, BTreeSet<RuntimeValue>> = BTreeMap::new();
    for (x, v) in trace.bindings() {
        if v.is_fresh() {
            out.entry(x.clone()).or_default().insert(v.clone());
        }
    }
    out
}
