use std::collections::BTreeSet;
use std::fmt;

use crate::model::{Annotation, CanonicalName, CryptoPoint, Ident, PointSet};

use super::index::{Node, NodeId, ProgramIndex, SetRef, TupleId, TupleNode, Universe};

/// A concrete element of the abstract domain, for membership queries.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum AbstractValue {
    Name(CanonicalName),
    Enc {
        payload: Vec<AbstractValue>,
        key: Box<AbstractValue>,
        ann: Option<Annotation>,
    },
    /// Stands for any `k`-ary encryption the attacker may build.
    AttackerEnc(usize),
}

impl AbstractValue {
    pub fn name(s: &str) -> Self {
        AbstractValue::Name(CanonicalName(s.to_string()))
    }

    pub fn enc(payload: Vec<AbstractValue>, key: AbstractValue, ann: Option<Annotation>) -> Self {
        AbstractValue::Enc {
            payload,
            key: Box::new(key),
            ann,
        }
    }
}

fn write_ann(f: &mut fmt::Formatter<'_>, a: &Annotation) -> fmt::Result {
    write!(f, "[at {} dest {}]", a.at, a.points)
}

impl fmt::Display for AbstractValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AbstractValue::Name(c) => write!(f, "{c}"),
            AbstractValue::Enc { payload, key, ann } => {
                f.write_str("{")?;
                for (i, p) in payload.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{p}")?;
                }
                f.write_str("}:")?;
                match **key {
                    AbstractValue::Name(_) => write!(f, "{key}")?,
                    _ => write!(f, "({key})")?,
                }
                match ann {
                    Some(a) => write_ann(f, a),
                    None => Ok(()),
                }
            }
            AbstractValue::AttackerEnc(k) => write!(f, "{}", attacker_enc_text(*k)),
        }
    }
}

fn attacker_enc_text(k: usize) -> String {
    format!("{{{}}}:z•[at l• dest C]", vec!["z•"; k].join(", "))
}

/// The triple (ρ, κ, ψ) together with ϑ of every occurrence and, when the
/// attacker is present, ρ(z•).
#[derive(Debug, Clone)]
pub struct AnalysisResult {
    pub index: ProgramIndex,
    pub universe: Universe,
    pub theta: Vec<BTreeSet<NodeId>>,
    pub rho: Vec<BTreeSet<NodeId>>,
    pub attacker: Option<BTreeSet<NodeId>>,
    pub kappa: BTreeSet<TupleId>,
    pub psi: BTreeSet<(CryptoPoint, CryptoPoint)>,
}

static EMPTY: BTreeSet<usize> = BTreeSet::new();

/// Component sets wider than this are summarised when rendered.
const INLINE_LIMIT: usize = 4;

impl AnalysisResult {
    pub fn set(&self, r: SetRef) -> &BTreeSet<usize> {
        match r {
            SetRef::Theta(o) => &self.theta[o],
            SetRef::Rho(v) => &self.rho[v],
            SetRef::Attacker => self.attacker.as_ref().unwrap_or(&EMPTY),
            SetRef::Kappa => &self.kappa,
        }
    }

    pub fn set_mut(&mut self, r: SetRef) -> Option<&mut BTreeSet<usize>> {
        Some(match r {
            SetRef::Theta(o) => &mut self.theta[o],
            SetRef::Rho(v) => &mut self.rho[v],
            SetRef::Attacker => self.attacker.as_mut()?,
            SetRef::Kappa => &mut self.kappa,
        })
    }

    pub fn rho_of(&self, x: &Ident) -> &BTreeSet<NodeId> {
        match self.index.var_id(x) {
            Some(v) => &self.rho[v],
            None => &EMPTY,
        }
    }

    /// An all-empty triple over the same program.
    pub fn empty_like(&self) -> Self {
        AnalysisResult {
            index: self.index.clone(),
            universe: self.universe.clone(),
            theta: vec![BTreeSet::new(); self.theta.len()],
            rho: vec![BTreeSet::new(); self.rho.len()],
            attacker: self.attacker.as_ref().map(|_| BTreeSet::new()),
            kappa: BTreeSet::new(),
            psi: BTreeSet::new(),
        }
    }

    fn ix(&self) -> &ProgramIndex {
        &self.index
    }

    fn u(&self) -> &Universe {
        &self.universe
    }

    pub fn node_denotes(&self, n: NodeId, v: &AbstractValue) -> bool {
        let ix = self.ix();
        match (v, &self.u().nodes[n]) {
            (AbstractValue::Name(c), Node::Name(d)) => c == d,
            (AbstractValue::AttackerEnc(k), Node::AttackerEnc(j)) => k == j,
            (AbstractValue::Enc { payload, key, ann }, Node::Enc(s)) => {
                let site = &ix.sites[*s];
                site.ann == *ann
                    && site.payload.len() == payload.len()
                    && self.contains(&self.theta[site.key], key)
                    && site
                        .payload
                        .iter()
                        .zip(payload)
                        .all(|(&o, p)| self.contains(&self.theta[o], p))
            }
            (AbstractValue::Enc { payload, key, ann }, Node::AttackerEnc(k)) => {
                let from_attacker = match ann {
                    None => true,
                    Some(a) => a.at == CryptoPoint::Attacker && a.points == PointSet::All,
                };
                let z = self.set(SetRef::Attacker);
                from_attacker
                    && payload.len() == *k
                    && self.contains(z, key)
                    && payload.iter().all(|p| self.contains(z, p))
            }
            _ => false,
        }
    }

    /// Whether the set of nodes describes the value.
    pub fn contains(&self, set: &BTreeSet<NodeId>, v: &AbstractValue) -> bool {
        set.iter().any(|&n| self.node_denotes(n, v))
    }

    pub fn rho_contains(&self, x: &Ident, v: &AbstractValue) -> bool {
        self.contains(self.rho_of(x), v)
    }

    pub fn attacker_knows(&self, v: &AbstractValue) -> bool {
        self.contains(self.set(SetRef::Attacker), v)
    }

    pub fn kappa_contains(&self, tuple: &[AbstractValue]) -> bool {
        self.kappa.iter().any(|&t| {
            let comps = self.u().tuple_comps(self.ix(), t);
            comps.len() == tuple.len()
                && comps
                    .iter()
                    .zip(tuple)
                    .all(|(&c, v)| self.contains(self.set(c), v))
        })
    }

    pub fn render_node(&self, n: NodeId, depth: usize) -> String {
        match &self.u().nodes[n] {
            Node::Name(c) => c.to_string(),
            Node::AttackerEnc(k) => attacker_enc_text(*k),
            Node::Enc(s) => {
                let site = &self.ix().sites[*s];
                let ann = match &site.ann {
                    Some(a) => format!("[at {} dest {}]", a.at, a.points),
                    None => String::new(),
                };
                if depth == 0 {
                    return format!("{{..}}:..{ann}");
                }
                let payload: Vec<String> = site
                    .payload
                    .iter()
                    .map(|&o| self.render_inline(&self.theta[o], depth - 1))
                    .collect();
                let key = self.render_inline(&self.theta[site.key], depth - 1);
                let key = if self.theta[site.key].len() == 1
                    && matches!(self.u().nodes[*self.theta[site.key].first().unwrap()], Node::Name(_))
                {
                    key
                } else {
                    format!("({key})")
                };
                format!("{{{}}}:{key}{ann}", payload.join(", "))
            }
        }
    }

    fn render_inline(&self, set: &BTreeSet<NodeId>, depth: usize) -> String {
        if let Some(z) = &self.attacker {
            if set == z && set.len() > 1 {
                return "z•".to_string();
            }
        }
        match set.len() {
            0 => "∅".to_string(),
            1 => self.render_node(*set.first().unwrap(), depth),
            n if n > INLINE_LIMIT => format!("<{n} values>"),
            _ => {
                let mut parts: Vec<String> = set.iter().map(|&x| self.render_node(x, depth)).collect();
                parts.sort();
                format!("({})", parts.join(" | "))
            }
        }
    }

    /// Renders every node of the set, sorted.
    pub fn render_set(&self, set: &BTreeSet<NodeId>) -> Vec<String> {
        let mut out: Vec<String> = set.iter().map(|&n| self.render_node(n, 3)).collect();
        out.sort();
        out.dedup();
        out
    }

    pub fn render_tuple(&self, t: TupleId) -> String {
        let comps = self.u().tuple_comps(self.ix(), t);
        let parts: Vec<String> = comps
            .iter()
            .map(|&c| match (self.u().tuples[t], c) {
                (TupleNode::Wild(_), _) => "z•".to_string(),
                _ => self.render_inline(self.set(c), 2),
            })
            .collect();
        format!("<{}>", parts.join(", "))
    }

    /// Every element of κ, sorted.
    pub fn render_kappa(&self) -> Vec<String> {
        let mut out: Vec<String> = self.kappa.iter().map(|&t| self.render_tuple(t)).collect();
        out.sort();
        out
    }

    /// ρ of every variable with a non-empty estimate, sorted by variable.
    pub fn rho_summary(&self) -> Vec<(String, Vec<String>)> {
        let mut out: Vec<(String, Vec<String>)> = self
            .index
            .vars
            .iter()
            .enumerate()
            .filter(|(v, _)| !self.rho[*v].is_empty())
            .map(|(v, x)| (x.to_string(), self.render_set(&self.rho[v])))
            .collect();
        out.sort();
        out
    }
}
