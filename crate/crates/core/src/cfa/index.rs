use std::collections::{BTreeMap, BTreeSet};

use crate::attacker::AttackerConfig;
use crate::model::{
    arity_profile, canonical, free_names, Annotation, ArityProfile, CanonicalName, CryptoPoint,
    Ident, IndexPolicy, Name, Process, Term,
};

pub type OccId = usize;
pub type VarId = usize;
pub type SiteId = usize;
pub type TupleId = usize;
pub type NodeId = usize;

/// What a single term occurrence is, syntactically.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OccKind {
    Name(CanonicalName),
    Var(VarId),
    Enc(SiteId),
}

/// One syntactic encryption `{E1..Ek}:E0[at l dest L]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EncSite {
    pub occ: OccId,
    pub payload: Vec<OccId>,
    pub key: OccId,
    pub ann: Option<Annotation>,
}

/// A prefix of the process, flattened. The analysis is flow-insensitive so
/// the nesting of prefixes plays no further role once occurrences are numbered.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Action {
    /// Index into [`ProgramIndex::outputs`].
    Out(usize),
    In {
        pattern: Vec<OccId>,
        bind: Vec<VarId>,
    },
    Decrypt {
        subject: OccId,
        pattern: Vec<OccId>,
        bind: Vec<VarId>,
        key: OccId,
        ann: Option<Annotation>,
    },
}

/// Deterministic numbering of every term occurrence, encryption site and
/// variable of a process.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProgramIndex {
    pub policy: IndexPolicy,
    pub occs: Vec<OccKind>,
    pub sites: Vec<EncSite>,
    pub actions: Vec<Action>,
    pub outputs: Vec<Vec<OccId>>,
    pub vars: Vec<Ident>,
    pub var_ids: BTreeMap<Ident, VarId>,
    pub names: BTreeSet<CanonicalName>,
    pub free_names: BTreeSet<Name>,
    pub profile: ArityProfile,
}

impl ProgramIndex {
    pub fn build(p: &Process, policy: &IndexPolicy) -> Self {
        let mut ix = ProgramIndex {
            policy: policy.clone(),
            occs: Vec::new(),
            sites: Vec::new(),
            actions: Vec::new(),
            outputs: Vec::new(),
            vars: Vec::new(),
            var_ids: BTreeMap::new(),
            names: BTreeSet::new(),
            free_names: free_names(p),
            profile: arity_profile(p),
        };
        ix.process(p);
        ix
    }

    fn var(&mut self, x: &Ident) -> VarId {
        if let Some(&v) = self.var_ids.get(x) {
            return v;
        }
        let v = self.vars.len();
        self.vars.push(x.clone());
        self.var_ids.insert(x.clone(), v);
        v
    }

    fn term(&mut self, t: &Term) -> OccId {
        let occ = self.occs.len();
        match t {
            Term::Name(n) => {
                let c = canonical(n, &self.policy);
                self.names.insert(c.clone());
                self.occs.push(OccKind::Name(c));
            }
            Term::Var(x) => {
                let v = self.var(x);
                self.occs.push(OccKind::Var(v));
            }
            Term::Enc { payload, key, ann } => {
                let site = self.sites.len();
                self.occs.push(OccKind::Enc(site));
                self.sites.push(EncSite {
                    occ,
                    payload: Vec::new(),
                    key: 0,
                    ann: ann.clone(),
                });
                let payload: Vec<OccId> = payload.iter().map(|e| self.term(e)).collect();
                let key = self.term(key);
                self.sites[site].payload = payload;
                self.sites[site].key = key;
            }
        }
        occ
    }

    fn terms(&mut self, ts: &[Term]) -> Vec<OccId> {
        ts.iter().map(|t| self.term(t)).collect()
    }

    fn binders(&mut self, xs: &[Ident]) -> Vec<VarId> {
        xs.iter().map(|x| self.var(x)).collect()
    }

    fn process(&mut self, p: &Process) {
        match p {
            Process::Nil => {}
            Process::Par(l, r) => {
                self.process(l);
                self.process(r);
            }
            Process::Repl(q) | Process::New(_, q) => self.process(q),
            Process::Out(ts, q) => {
                let comps = self.terms(ts);
                self.actions.push(Action::Out(self.outputs.len()));
                self.outputs.push(comps);
                self.process(q);
            }
            Process::In {
                pattern,
                bind,
                cont,
            } => {
                let pattern = self.terms(pattern);
                let bind = self.binders(bind);
                self.actions.push(Action::In { pattern, bind });
                self.process(cont);
            }
            Process::Decrypt {
                subject,
                pattern,
                bind,
                key,
                ann,
                cont,
            } => {
                let subject = self.term(subject);
                let pattern = self.terms(pattern);
                let key = self.term(key);
                let bind = self.binders(bind);
                self.actions.push(Action::Decrypt {
                    subject,
                    pattern,
                    bind,
                    key,
                    ann: ann.clone(),
                });
                self.process(cont);
            }
        }
    }

    pub fn var_id(&self, x: &Ident) -> Option<VarId> {
        self.var_ids.get(x).copied()
    }
}

/// A set variable of the constraint system.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SetRef {
    /// ϑ of a term occurrence.
    Theta(OccId),
    /// ρ of a canonical variable.
    Rho(VarId),
    /// ρ(z•)
    Attacker,
    /// κ; its elements are tuple nodes rather than value nodes.
    Kappa,
}

/// A value node of the finite tree grammar the analysis ranges over.
///
/// `Enc(s)` stands for every encryption built at site `s` from the values of
/// its component occurrences. `AttackerEnc(k)` stands for every `k`-ary
/// encryption the attacker can build from its knowledge.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Node {
    Name(CanonicalName),
    Enc(SiteId),
    AttackerEnc(usize),
}

/// An element of κ.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TupleNode {
    /// Tuples sent by the `n`-th output of the process.
    Out(usize),
    /// Tuples of the given arity injected by the attacker.
    Wild(usize),
}

/// How a node takes part in matching.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeClass {
    Name,
    /// Annotated encryptions only ever equal themselves.
    Annotated,
    /// Unannotated encryptions compare structurally.
    Plain(usize),
    Attacker(usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Universe {
    pub nodes: Vec<Node>,
    pub name_ids: BTreeMap<CanonicalName, NodeId>,
    pub site_nodes: Vec<NodeId>,
    pub attacker_enc: BTreeMap<usize, NodeId>,
    pub tuples: Vec<TupleNode>,
    pub wild: BTreeMap<usize, TupleId>,
    pub attacker: bool,
    /// Names the attacker starts with.
    pub seeds: BTreeSet<NodeId>,
}

impl Universe {
    pub fn new(ix: &ProgramIndex, attacker: Option<&AttackerConfig>) -> Self {
        let mut names = ix.names.clone();
        let seed_classes = attacker.map(|cfg| cfg.seed_classes(ix)).unwrap_or_default();
        names.extend(seed_classes.iter().cloned());
        let mut nodes = Vec::new();
        let mut name_ids = BTreeMap::new();
        for n in names {
            name_ids.insert(n.clone(), nodes.len());
            nodes.push(Node::Name(n));
        }
        let mut site_nodes = Vec::new();
        for s in 0..ix.sites.len() {
            site_nodes.push(nodes.len());
            nodes.push(Node::Enc(s));
        }
        let mut attacker_enc = BTreeMap::new();
        let mut tuples: Vec<TupleNode> = (0..ix.outputs.len()).map(TupleNode::Out).collect();
        let mut wild = BTreeMap::new();
        if let Some(cfg) = attacker {
            for &k in &cfg.enc_arities {
                attacker_enc.insert(k, nodes.len());
                nodes.push(Node::AttackerEnc(k));
            }
            for &k in &cfg.tuple_arities {
                wild.insert(k, tuples.len());
                tuples.push(TupleNode::Wild(k));
            }
        }
        let seeds = seed_classes.iter().map(|c| name_ids[c]).collect();
        Universe {
            nodes,
            name_ids,
            site_nodes,
            attacker_enc,
            tuples,
            wild,
            attacker: attacker.is_some(),
            seeds,
        }
    }

    pub fn name(&self, c: &CanonicalName) -> Option<NodeId> {
        self.name_ids.get(c).copied()
    }

    pub fn class(&self, ix: &ProgramIndex, n: NodeId) -> NodeClass {
        match &self.nodes[n] {
            Node::Name(_) => NodeClass::Name,
            Node::Enc(s) => match ix.sites[*s].ann {
                Some(_) => NodeClass::Annotated,
                None => NodeClass::Plain(ix.sites[*s].payload.len()),
            },
            Node::AttackerEnc(k) => NodeClass::Attacker(*k),
        }
    }

    /// Payload arity of an encryption node.
    pub fn enc_arity(&self, ix: &ProgramIndex, n: NodeId) -> Option<usize> {
        match &self.nodes[n] {
            Node::Name(_) => None,
            Node::Enc(s) => Some(ix.sites[*s].payload.len()),
            Node::AttackerEnc(k) => Some(*k),
        }
    }

    /// Key set and payload sets of an encryption node.
    pub fn enc_parts(&self, ix: &ProgramIndex, n: NodeId) -> Option<(SetRef, Vec<SetRef>)> {
        match &self.nodes[n] {
            Node::Name(_) => None,
            Node::Enc(s) => {
                let site = &ix.sites[*s];
                Some((
                    SetRef::Theta(site.key),
                    site.payload.iter().map(|&o| SetRef::Theta(o)).collect(),
                ))
            }
            Node::AttackerEnc(k) => Some((SetRef::Attacker, vec![SetRef::Attacker; *k])),
        }
    }

    /// Crypto-point and destination set an encryption node was created with.
    pub fn origin<'a>(&self, ix: &'a ProgramIndex, n: NodeId) -> Option<Origin<'a>> {
        match &self.nodes[n] {
            Node::Name(_) => None,
            Node::Enc(s) => Some(match &ix.sites[*s].ann {
                Some(a) => Origin::Site(a),
                None => Origin::Plain,
            }),
            Node::AttackerEnc(_) => Some(Origin::Attacker),
        }
    }

    pub fn tuple_arity(&self, ix: &ProgramIndex, t: TupleId) -> usize {
        match self.tuples[t] {
            TupleNode::Out(o) => ix.outputs[o].len(),
            TupleNode::Wild(k) => k,
        }
    }

    pub fn tuple_comps(&self, ix: &ProgramIndex, t: TupleId) -> Vec<SetRef> {
        match self.tuples[t] {
            TupleNode::Out(o) => ix.outputs[o].iter().map(|&c| SetRef::Theta(c)).collect(),
            TupleNode::Wild(k) => vec![SetRef::Attacker; k],
        }
    }
}

/// Where an encryption value comes from, for the authentication clause.
#[derive(Debug, Clone, Copy)]
pub enum Origin<'a> {
    Site(&'a Annotation),
    Plain,
    Attacker,
}

impl Origin<'_> {
    pub fn point(&self) -> Option<CryptoPoint> {
        match self {
            Origin::Site(a) => Some(a.at.clone()),
            Origin::Plain => None,
            Origin::Attacker => Some(CryptoPoint::Attacker),
        }
    }
}
