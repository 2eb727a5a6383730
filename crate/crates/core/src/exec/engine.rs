//! The executor proper. Values, names and annotations are interned, so states
//! are plain vectors of ids and cheap to clone, compare and hash.

use std::cell::RefCell;
use std::collections::{HashMap, HashSet};

use rustc_hash::{FxHashMap, FxHashSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::symmetry;
use super::{Event, Exploration, ExploreOptions, RuntimeValue, Scheduler, Trace, Tuple};
use crate::model::{Annotation, Ident, Name, Process, Term};

pub(super) type Vid = u32;

/// First serial component of names minted in an earlier round.
pub(super) const EARLIER: u32 = u32::MAX;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub(super) enum Val {
    Name { name: u32, serial: Box<[u32]> },
    Enc { payload: Box<[Vid]>, key: Vid, ann: Option<u32> },
}

#[derive(Default)]
pub(super) struct Store {
    vals: Vec<Val>,
    ids: FxHashMap<Val, Vid>,
    names: Vec<Name>,
    name_ids: HashMap<Name, u32>,
    anns: Vec<Annotation>,
    ann_ids: HashMap<Annotation, u32>,
}

impl Store {
    pub(super) fn intern(&mut self, v: Val) -> Vid {
        if let Some(&id) = self.ids.get(&v) {
            return id;
        }
        let id = self.vals.len() as Vid;
        self.vals.push(v.clone());
        self.ids.insert(v, id);
        id
    }

    pub(super) fn get(&self, v: Vid) -> &Val {
        &self.vals[v as usize]
    }

    fn name_id(&mut self, n: &Name) -> u32 {
        if let Some(&id) = self.name_ids.get(n) {
            return id;
        }
        let id = self.names.len() as u32;
        self.names.push(n.clone());
        self.name_ids.insert(n.clone(), id);
        id
    }

    fn ann_id(&mut self, a: &Annotation) -> u32 {
        if let Some(&id) = self.ann_ids.get(a) {
            return id;
        }
        let id = self.anns.len() as u32;
        self.anns.push(a.clone());
        self.ann_ids.insert(a.clone(), id);
        id
    }

    fn is_fresh(&self, v: Vid) -> bool {
        matches!(self.get(v), Val::Name { serial, .. } if !serial.is_empty())
    }

    fn runtime(&self, v: Vid) -> RuntimeValue {
        match self.get(v) {
            Val::Name { name, serial } => RuntimeValue::Name {
                name: self.names[*name as usize].clone(),
                serial: serial.to_vec(),
            },
            Val::Enc { payload, key, ann } => RuntimeValue::Enc {
                payload: payload.iter().map(|&p| self.runtime(p)).collect(),
                key: Box::new(self.runtime(*key)),
                ann: ann.map(|a| self.anns[a as usize].clone()),
            },
        }
    }

    fn from_runtime(&mut self, v: &RuntimeValue) -> Vid {
        let val = match v {
            RuntimeValue::Name { name, serial } => Val::Name {
                name: self.name_id(name),
                serial: serial.clone().into_boxed_slice(),
            },
            RuntimeValue::Enc { payload, key, ann } => Val::Enc {
                payload: payload.iter().map(|p| self.from_runtime(p)).collect(),
                key: self.from_runtime(key),
                ann: ann.as_ref().map(|a| self.ann_id(a)),
            },
        };
        self.intern(val)
    }

    fn tuple(&self, t: &[Vid]) -> Tuple {
        t.iter().map(|&v| self.runtime(v)).collect()
    }
}

#[derive(Debug, Clone)]
enum CTerm {
    /// An identifier: looked up in the environment, else the free name `free`.
    Ident { id: u32, free: Option<Vid> },
    Enc {
        payload: Vec<CTerm>,
        key: Box<CTerm>,
        ann: Option<u32>,
    },
}

#[derive(Debug, Clone)]
enum CNode {
    Nil,
    Par(u32, u32),
    Repl(u32),
    New(u32, u32),
    Out(Vec<CTerm>, u32),
    In {
        pattern: Vec<CTerm>,
        bind: Vec<u32>,
        cont: u32,
    },
    Decrypt {
        subject: CTerm,
        pattern: Vec<CTerm>,
        bind: Vec<u32>,
        key: CTerm,
        ann: Option<u32>,
        cont: u32,
    },
}

struct Program {
    nodes: Vec<CNode>,
    idents: Vec<Ident>,
    ident_ids: HashMap<Ident, u32>,
}

impl Program {
    fn new(p: &Process, store: &mut Store) -> Self {
        let mut prog = Program {
            nodes: Vec::new(),
            idents: Vec::new(),
            ident_ids: HashMap::new(),
        };
        prog.compile(p, store);
        prog
    }

    fn ident(&mut self, x: &Ident) -> u32 {
        if let Some(&id) = self.ident_ids.get(x) {
            return id;
        }
        let id = self.idents.len() as u32;
        self.idents.push(x.clone());
        self.ident_ids.insert(x.clone(), id);
        id
    }

    fn term(&mut self, t: &Term, store: &mut Store) -> CTerm {
        match t {
            Term::Name(n) => {
                let name = store.name_id(n);
                let free = store.intern(Val::Name {
                    name,
                    serial: Box::new([]),
                });
                CTerm::Ident {
                    id: self.ident(n),
                    free: Some(free),
                }
            }
            Term::Var(x) => CTerm::Ident {
                id: self.ident(x),
                free: None,
            },
            Term::Enc { payload, key, ann } => CTerm::Enc {
                payload: payload.iter().map(|p| self.term(p, store)).collect(),
                key: Box::new(self.term(key, store)),
                ann: ann.as_ref().map(|a| store.ann_id(a)),
            },
        }
    }

    fn terms(&mut self, ts: &[Term], store: &mut Store) -> Vec<CTerm> {
        ts.iter().map(|t| self.term(t, store)).collect()
    }

    fn compile(&mut self, p: &Process, store: &mut Store) -> u32 {
        let id = self.nodes.len() as u32;
        self.nodes.push(CNode::Nil);
        let node = match p {
            Process::Nil => CNode::Nil,
            Process::Par(l, r) => {
                let l = self.compile(l, store);
                let r = self.compile(r, store);
                CNode::Par(l, r)
            }
            Process::Repl(q) => CNode::Repl(self.compile(q, store)),
            Process::New(n, q) => {
                let n = self.ident(n);
                CNode::New(n, self.compile(q, store))
            }
            Process::Out(ts, q) => {
                let ts = self.terms(ts, store);
                CNode::Out(ts, self.compile(q, store))
            }
            Process::In {
                pattern,
                bind,
                cont,
            } => {
                let pattern = self.terms(pattern, store);
                let bind = bind.iter().map(|b| self.ident(b)).collect();
                CNode::In {
                    pattern,
                    bind,
                    cont: self.compile(cont, store),
                }
            }
            Process::Decrypt {
                subject,
                pattern,
                bind,
                key,
                ann,
                cont,
            } => {
                let subject = self.term(subject, store);
                let pattern = self.terms(pattern, store);
                let bind = bind.iter().map(|b| self.ident(b)).collect();
                let key = self.term(key, store);
                CNode::Decrypt {
                    subject,
                    pattern,
                    bind,
                    key,
                    ann: ann.as_ref().map(|a| store.ann_id(a)),
                    cont: self.compile(cont, store),
                }
            }
        };
        self.nodes[id as usize] = node;
        id
    }
}

type Env = Vec<(u32, Vid)>;

fn lookup(env: &Env, x: u32) -> Option<Vid> {
    env.iter().find(|(y, _)| *y == x).map(|&(_, v)| v)
}

fn bind(env: &mut Env, x: u32, v: Vid) {
    match env.iter_mut().find(|(y, _)| *y == x) {
        Some(slot) => slot.1 = v,
        None => {
            env.push((x, v));
            env.sort_unstable();
        }
    }
}

fn eval(t: &CTerm, env: &Env, store: &mut Store) -> Option<Vid> {
    match t {
        CTerm::Ident { id, free } => lookup(env, *id).or(*free),
        CTerm::Enc { payload, key, ann } => {
            let payload = payload
                .iter()
                .map(|p| eval(p, env, store))
                .collect::<Option<Box<[Vid]>>>()?;
            let key = eval(key, env, store)?;
            Some(store.intern(Val::Enc {
                payload,
                key,
                ann: *ann,
            }))
        }
    }
}

fn matches_prefix(pattern: &[CTerm], values: &[Vid], env: &Env, store: &mut Store) -> bool {
    pattern
        .iter()
        .zip(values)
        .all(|(t, &v)| eval(t, env, store) == Some(v))
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub(super) struct Thread {
    pub(super) node: u32,
    pub(super) path: Vec<u32>,
    /// Names minted so far, or copies made for a replication.
    pub(super) counter: u32,
    pub(super) env: Env,
}

pub(super) type ITuple = Box<[Vid]>;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub(super) struct State {
    pub(super) threads: Vec<Thread>,
    pub(super) ether: Vec<ITuple>,
    /// Fresh values of the watched variable bound so far, with their session;
    /// sorted by value.
    pub(super) history: Vec<(Vid, Vec<u32>)>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
enum IEvent {
    Sent(ITuple),
    Bound {
        var: u32,
        value: Vid,
        session: Vec<u32>,
    },
    Decrypted {
        at: u32,
        origin: u32,
        authentic: bool,
    },
    Stuck(&'static str),
}

/// Effects of running threads eagerly up to their next input or replication.
#[derive(Default)]
struct Settled {
    waiting: Vec<Thread>,
    events: Vec<IEvent>,
    sent: Vec<ITuple>,
}

enum Step {
    Consume { thread: usize, msg: Msg },
    Unfold { thread: usize },
    UnfoldConsume { thread: usize, waiting: usize, msg: Msg },
}

#[derive(Clone, Copy)]
enum Msg {
    Ether(usize),
    Captured(usize),
}

pub(super) struct Explorer {
    prog: Program,
    store: RefCell<Store>,
    opts: ExploreOptions,
    captured: Vec<ITuple>,
    stale: FxHashSet<Vid>,
    watched: HashSet<u32>,
    seen: FxHashSet<u128>,
    events: HashSet<IEvent>,
    order: Vec<Event>,
    witness: Option<Trace>,
    truncated: bool,
}

impl Explorer {
    pub(super) fn new(p: &Process, opts: ExploreOptions) -> Self {
        let mut store = Store::default();
        let prog = Program::new(p, &mut store);
        let captured = opts
            .captured
            .iter()
            .map(|t| t.iter().map(|v| store.from_runtime(v)).collect())
            .collect();
        let stale = opts.stale.iter().map(|v| store.from_runtime(v)).collect();
        let watched = match &opts.watch {
            Some(base) => prog
                .idents
                .iter()
                .enumerate()
                .filter(|(_, x)| &x.base == base)
                .map(|(i, _)| i as u32)
                .collect(),
            None => HashSet::new(),
        };
        Explorer {
            prog,
            store: RefCell::new(store),
            opts,
            captured,
            stale,
            watched,
            seen: FxHashSet::default(),
            events: HashSet::new(),
            order: Vec::new(),
            witness: None,
            truncated: false,
        }
    }

    fn node(&self, t: &Thread) -> &CNode {
        &self.prog.nodes[t.node as usize]
    }

    fn is_repl(&self, t: &Thread) -> bool {
        matches!(self.node(t), CNode::Repl(_))
    }

    fn event(&self, e: &IEvent) -> Event {
        let store = self.store.borrow();
        match e {
            IEvent::Sent(t) => Event::Sent(store.tuple(t)),
            IEvent::Bound {
                var,
                value,
                session,
            } => Event::Bound {
                var: self.prog.idents[*var as usize].clone(),
                value: store.runtime(*value),
                session: session.clone(),
            },
            IEvent::Decrypted {
                at,
                origin,
                authentic,
            } => Event::Decrypted {
                at: store.anns[*at as usize].at.clone(),
                origin: store.anns[*origin as usize].at.clone(),
                authentic: *authentic,
            },
            IEvent::Stuck(why) => Event::Stuck(why.to_string()),
        }
    }

    fn events(&self, evs: &[IEvent]) -> Vec<Event> {
        evs.iter().map(|e| self.event(e)).collect()
    }

    fn settle(&self, start: Vec<Thread>) -> Settled {
        let mut out = Settled::default();
        let mut work = start;
        let mut store = self.store.borrow_mut();
        while let Some(mut t) = work.pop() {
            match self.node(&t) {
                CNode::Nil => {}
                CNode::Par(l, r) => {
                    let mut pl = t.path.clone();
                    pl.push(0);
                    let mut pr = t.path;
                    pr.push(1);
                    work.push(Thread {
                        node: *r,
                        path: pr,
                        counter: 0,
                        env: t.env.clone(),
                    });
                    work.push(Thread {
                        node: *l,
                        path: pl,
                        counter: 0,
                        env: t.env,
                    });
                }
                CNode::New(n, q) => {
                    let mut serial = t.path.clone();
                    serial.push(t.counter);
                    t.counter += 1;
                    let name = store.name_id(&self.prog.idents[*n as usize]);
                    let v = store.intern(Val::Name {
                        name,
                        serial: serial.into_boxed_slice(),
                    });
                    bind(&mut t.env, *n, v);
                    t.node = *q;
                    work.push(t);
                }
                CNode::Out(ts, q) => {
                    let tuple = ts
                        .iter()
                        .map(|e| eval(e, &t.env, &mut store))
                        .collect::<Option<ITuple>>();
                    match tuple {
                        Some(tuple) => {
                            out.events.push(IEvent::Sent(tuple.clone()));
                            out.sent.push(tuple);
                            t.node = *q;
                            work.push(t);
                        }
                        None => out.events.push(IEvent::Stuck("unbound variable in output")),
                    }
                }
                CNode::Decrypt {
                    subject,
                    pattern,
                    bind: binders,
                    key,
                    ann,
                    cont,
                } => {
                    let (Some(v), Some(k)) = (
                        eval(subject, &t.env, &mut store),
                        eval(key, &t.env, &mut store),
                    ) else {
                        out.events.push(IEvent::Stuck("unbound variable in decryption"));
                        continue;
                    };
                    let opened = match store.get(v).clone() {
                        Val::Enc {
                            payload,
                            key: vk,
                            ann: enc_ann,
                        } if vk == k
                            && payload.len() == pattern.len() + binders.len()
                            && matches_prefix(pattern, &payload, &t.env, &mut store) =>
                        {
                            Some((payload, enc_ann))
                        }
                        _ => None,
                    };
                    let Some((payload, enc_ann)) = opened else {
                        out.events.push(IEvent::Stuck("decryption failed"));
                        continue;
                    };
                    if let (Some(e), Some(d)) = (enc_ann, ann) {
                        let (ea, da) = (&store.anns[e as usize], &store.anns[*d as usize]);
                        let authentic = da.points.contains(&ea.at) && ea.points.contains(&da.at);
                        out.events.push(IEvent::Decrypted {
                            at: *d,
                            origin: e,
                            authentic,
                        });
                    }
                    for (&x, &v) in binders.iter().zip(&payload[pattern.len()..]) {
                        out.events.push(IEvent::Bound {
                            var: x,
                            value: v,
                            session: t.path.clone(),
                        });
                        bind(&mut t.env, x, v);
                    }
                    t.node = *cont;
                    work.push(t);
                }
                CNode::In { .. } | CNode::Repl(_) => out.waiting.push(t),
            }
        }
        out
    }

    /// The next copy of a replicated thread, settled.
    fn copy(&self, t: &Thread) -> Settled {
        let CNode::Repl(body) = self.node(t) else {
            unreachable!("copy of a non-replicated thread")
        };
        let mut path = t.path.clone();
        path.push(t.counter);
        self.settle(vec![Thread {
            node: *body,
            path,
            counter: 0,
            env: t.env.clone(),
        }])
    }

    fn message<'s>(&'s self, s: &'s State, m: Msg) -> &'s ITuple {
        match m {
            Msg::Ether(i) => &s.ether[i],
            Msg::Captured(i) => &self.captured[i],
        }
    }

    fn messages(&self, s: &State) -> Vec<Msg> {
        let mut out = Vec::new();
        let mut seen: HashSet<&ITuple> = HashSet::new();
        for (i, m) in s.ether.iter().enumerate() {
            if seen.insert(m) {
                out.push(Msg::Ether(i));
            }
        }
        for (i, m) in self.captured.iter().enumerate() {
            if seen.insert(m) {
                out.push(Msg::Captured(i));
            }
        }
        out
    }

    fn accepts(&self, t: &Thread, m: &[Vid]) -> bool {
        match self.node(t) {
            CNode::In { pattern, bind, .. } => {
                m.len() == pattern.len() + bind.len()
                    && matches_prefix(pattern, m, &t.env, &mut self.store.borrow_mut())
            }
            _ => false,
        }
    }

    fn steps(&self, s: &State) -> Vec<Step> {
        let msgs = self.messages(s);
        let mut out = Vec::new();
        for (i, t) in s.threads.iter().enumerate() {
            match self.node(t) {
                CNode::In { .. } => {
                    for &m in &msgs {
                        if self.accepts(t, self.message(s, m)) {
                            out.push(Step::Consume { thread: i, msg: m });
                        }
                    }
                }
                CNode::Repl(_) => {
                    let c = self.copy(t);
                    let nested = c.waiting.iter().any(|w| self.is_repl(w));
                    if !c.events.is_empty() || nested {
                        out.push(Step::Unfold { thread: i });
                    }
                    for (w, wt) in c.waiting.iter().enumerate() {
                        for &m in &msgs {
                            if self.accepts(wt, self.message(s, m)) {
                                out.push(Step::UnfoldConsume {
                                    thread: i,
                                    waiting: w,
                                    msg: m,
                                });
                            }
                        }
                    }
                }
                _ => {}
            }
        }
        out
    }

    /// Receives `m` in thread `t`, which must accept it.
    fn receive(&self, mut t: Thread, m: &[Vid]) -> Settled {
        let CNode::In {
            pattern,
            bind: binders,
            cont,
        } = self.node(&t)
        else {
            unreachable!("receive on a non-input thread")
        };
        let mut events = Vec::new();
        for (&x, &v) in binders.iter().zip(&m[pattern.len()..]) {
            events.push(IEvent::Bound {
                var: x,
                value: v,
                session: t.path.clone(),
            });
            bind(&mut t.env, x, v);
        }
        t.node = *cont;
        let mut s = self.settle(vec![t]);
        events.append(&mut s.events);
        s.events = events;
        s
    }

    fn apply(&self, s: &State, step: &Step) -> (State, Vec<IEvent>) {
        let mut next = s.clone();
        let mut events = Vec::new();
        let replay = self.opts.replay;
        let consume = |next: &mut State, m: Msg| {
            if let (Msg::Ether(i), false) = (m, replay) {
                next.ether.remove(i);
            }
        };
        match *step {
            Step::Consume { thread, msg } => {
                let m = self.message(s, msg).clone();
                let t = next.threads.remove(thread);
                consume(&mut next, msg);
                let r = self.receive(t, &m);
                events.extend(r.events);
                next.threads.extend(r.waiting);
                next.ether.extend(r.sent);
            }
            Step::Unfold { thread } => {
                let c = self.copy(&s.threads[thread]);
                next.threads[thread].counter += 1;
                events.extend(c.events);
                next.threads.extend(c.waiting);
                next.ether.extend(c.sent);
            }
            Step::UnfoldConsume {
                thread,
                waiting,
                msg,
            } => {
                let m = self.message(s, msg).clone();
                let mut c = self.copy(&s.threads[thread]);
                next.threads[thread].counter += 1;
                consume(&mut next, msg);
                events.extend(c.events);
                next.ether.extend(c.sent);
                let w = c.waiting.remove(waiting);
                next.threads.extend(c.waiting);
                let r = self.receive(w, &m);
                events.extend(r.events);
                next.threads.extend(r.waiting);
                next.ether.extend(r.sent);
            }
        }
        next.threads.sort();
        next.ether.sort();
        if replay {
            next.ether.dedup();
        }
        (next, events)
    }

    fn initial(&self) -> (State, Vec<IEvent>) {
        let root = Thread {
            node: 0,
            path: Vec::new(),
            counter: 0,
            env: Env::new(),
        };
        let mut s = self.settle(vec![root]);
        s.waiting.sort();
        s.sent.sort();
        (
            State {
                threads: s.waiting,
                ether: s.sent,
                history: Vec::new(),
            },
            s.events,
        )
    }

    fn record(&mut self, evs: &[IEvent]) {
        if self.opts.skip_events {
            return;
        }
        for e in evs {
            if !self.events.contains(e) {
                let ev = self.event(e);
                self.events.insert(e.clone());
                self.order.push(ev);
            }
        }
    }

    /// Updates the watched history; true when a fresh value is reused.
    fn track(&self, s: &mut State, evs: &[IEvent]) -> bool {
        if self.watched.is_empty() {
            return false;
        }
        let store = self.store.borrow();
        let mut reused = false;
        for e in evs {
            if let IEvent::Bound {
                var,
                value,
                session,
            } = e
            {
                if self.watched.contains(var) && self.stale.contains(value) {
                    reused = true;
                } else if self.watched.contains(var) && store.is_fresh(*value) {
                    match s.history.binary_search_by_key(value, |(v, _)| *v) {
                        Ok(i) => reused |= &s.history[i].1 != session,
                        Err(i) => s.history.insert(i, (*value, session.clone())),
                    }
                }
            }
        }
        reused
    }

    fn visit(&mut self, s: &State) -> bool {
        let key = {
            let mut store = self.store.borrow_mut();
            symmetry::canonical(s, &mut store, |t| self.is_repl(t))
        };
        self.seen.insert(symmetry::digest(&key))
    }

    /// Replays the schedule that leads to state `id`.
    fn schedule(&self, parents: &[(u32, u32)], id: u32) -> Trace {
        let mut picks = Vec::new();
        let mut cur = id;
        while cur != 0 {
            let (parent, step) = parents[cur as usize];
            picks.push(step as usize);
            cur = parent;
        }
        let (mut s, mut events) = self.initial();
        for pick in picks.into_iter().rev() {
            let step = &self.steps(&s)[pick];
            let (next, evs) = self.apply(&s, step);
            events.extend(evs);
            s = next;
        }
        Trace {
            events: self.events(&events),
        }
    }

    /// Breadth-first search over states up to symmetry; each state is
    /// expanded once, at the least depth it is reached.
    fn bfs(&mut self, root: State, depth: usize) {
        let mut parents: Vec<(u32, u32)> = vec![(0, 0)];
        self.visit(&root);
        let mut layer = vec![(root, 0u32)];
        for _ in 0..depth {
            let mut next_layer = Vec::new();
            for (s, id) in &layer {
                for (pick, step) in self.steps(s).iter().enumerate() {
                    let (mut next, evs) = self.apply(s, step);
                    self.record(&evs);
                    let reused = self.track(&mut next, &evs);
                    if reused && self.witness.is_none() {
                        let mut w = self.schedule(&parents, *id);
                        w.events.extend(self.events(&evs));
                        self.witness = Some(w);
                    }
                    if let Some(cap) = self.opts.max_states {
                        if self.seen.len() >= cap {
                            self.truncated = true;
                            return;
                        }
                    }
                    if self.visit(&next) {
                        let nid = parents.len() as u32;
                        parents.push((*id, pick as u32));
                        next_layer.push((next, nid));
                    }
                }
            }
            if next_layer.is_empty() {
                break;
            }
            layer = next_layer;
        }
    }

    pub(super) fn explore(mut self) -> Exploration {
        let (mut s, evs) = self.initial();
        self.record(&evs);
        if self.track(&mut s, &evs) {
            self.witness = Some(Trace {
                events: self.events(&evs),
            });
        }
        let depth = self.opts.depth;
        self.bfs(s, depth);
        Exploration {
            events: Trace { events: self.order },
            states: self.seen.len(),
            witness: self.witness,
            truncated: self.truncated,
        }
    }

    /// Follows one schedule of at most `depth` steps.
    pub(super) fn run(&self, depth: usize, schedule: Scheduler) -> Trace {
        let mut rng = match schedule {
            Scheduler::Seeded(seed) => Some(ChaCha8Rng::seed_from_u64(seed)),
            Scheduler::First => None,
        };
        let (mut s, mut events) = self.initial();
        let mut steps = self.steps(&s);
        for _ in 0..depth {
            if steps.is_empty() {
                break;
            }
            let pick = match &mut rng {
                Some(r) => r.gen_range(0..steps.len()),
                None => 0,
            };
            let (next, evs) = self.apply(&s, &steps[pick]);
            events.extend(evs);
            s = next;
            steps = self.steps(&s);
        }
        if steps.is_empty() {
            for t in &s.threads {
                if matches!(self.node(t), CNode::In { .. }) {
                    events.push(IEvent::Stuck("no matching input"));
                }
            }
        }
        Trace {
            events: self.events(&events),
        }
    }
}
