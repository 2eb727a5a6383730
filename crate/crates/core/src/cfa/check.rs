use std::collections::{BTreeSet, HashSet};

use crate::model::{CryptoPoint, PointSet, Process};

use super::index::{Action, Node, NodeId, OccKind, ProgramIndex, SetRef, TupleNode};
use super::result::AnalysisResult;

/// Validates `result` against every analysis rule for `p`, and against the
/// attacker conditions when `result` carries attacker knowledge.
///
/// Shares only the occurrence numbering with the solver.
pub fn check(p: &Process, result: &AnalysisResult) -> bool {
    let ix = ProgramIndex::build(p, &result.index.policy);
    if ix != result.index
        || result.theta.len() != ix.occs.len()
        || result.rho.len() != ix.vars.len()
        || result.universe.site_nodes.len() != ix.sites.len()
    {
        return false;
    }
    Checker::new(&ix, result).run()
}

struct Checker<'a> {
    ix: &'a ProgramIndex,
    r: &'a AnalysisResult,
    compat: HashSet<(NodeId, NodeId)>,
}

impl<'a> Checker<'a> {
    fn new(ix: &'a ProgramIndex, r: &'a AnalysisResult) -> Self {
        let mut c = Checker {
            ix,
            r,
            compat: HashSet::new(),
        };
        c.saturate_compat();
        c
    }

    fn set(&self, s: SetRef) -> &BTreeSet<NodeId> {
        self.r.set(s)
    }

    fn is_plain(&self, n: NodeId) -> bool {
        match self.r.universe.nodes[n] {
            Node::Enc(s) => self.ix.sites[s].ann.is_none(),
            Node::AttackerEnc(_) => true,
            Node::Name(_) => false,
        }
    }

    /// Key set first, then payload sets.
    fn parts(&self, n: NodeId) -> Option<Vec<SetRef>> {
        match self.r.universe.nodes[n] {
            Node::Name(_) => None,
            Node::Enc(s) => {
                let site = &self.ix.sites[s];
                let mut v = vec![SetRef::Theta(site.key)];
                v.extend(site.payload.iter().map(|&o| SetRef::Theta(o)));
                Some(v)
            }
            Node::AttackerEnc(k) => Some(vec![SetRef::Attacker; k + 1]),
        }
    }

    fn meets(&self, a: &BTreeSet<NodeId>, b: &BTreeSet<NodeId>) -> bool {
        a.intersection(b).next().is_some()
            || a.iter().any(|&x| {
                self.is_plain(x) && b.iter().any(|&y| self.compat.contains(&(x, y)))
            })
    }

    fn saturate_compat(&mut self) {
        let plain: Vec<NodeId> = (0..self.r.universe.nodes.len())
            .filter(|&n| self.is_plain(n))
            .collect();
        loop {
            let mut grown = Vec::new();
            for &a in &plain {
                for &b in &plain {
                    if a == b || self.compat.contains(&(a, b)) {
                        continue;
                    }
                    let (pa, pb) = (self.parts(a).unwrap(), self.parts(b).unwrap());
                    if pa.len() == pb.len()
                        && pa
                            .iter()
                            .zip(&pb)
                            .all(|(&x, &y)| self.meets(self.set(x), self.set(y)))
                    {
                        grown.push((a, b));
                    }
                }
            }
            if grown.is_empty() {
                return;
            }
            self.compat.extend(grown);
        }
    }

    fn subset(&self, a: SetRef, b: SetRef) -> bool {
        self.set(a).is_subset(self.set(b))
    }

    fn tuple_parts(&self, t: usize) -> Vec<SetRef> {
        match self.r.universe.tuples[t] {
            TupleNode::Out(o) => self.ix.outputs[o].iter().map(|&c| SetRef::Theta(c)).collect(),
            TupleNode::Wild(k) => vec![SetRef::Attacker; k],
        }
    }

    fn terms_ok(&self) -> bool {
        let u = &self.r.universe;
        self.ix.occs.iter().enumerate().all(|(o, kind)| {
            let theta = &self.r.theta[o];
            match kind {
                OccKind::Name(c) => u.name(c).is_some_and(|n| theta.contains(&n)),
                OccKind::Var(v) => self.r.rho[*v].is_subset(theta),
                OccKind::Enc(s) => {
                    let site = &self.ix.sites[*s];
                    let live = site
                        .payload
                        .iter()
                        .chain(std::iter::once(&site.key))
                        .all(|&c| !self.r.theta[c].is_empty());
                    !live || theta.contains(&u.site_nodes[*s])
                }
            }
        })
    }

    fn binds_ok(&self, comps: &[SetRef], pattern: &[usize], bind: &[usize]) -> bool {
        let matched = pattern
            .iter()
            .zip(comps)
            .all(|(&p, &c)| self.meets(&self.r.theta[p], self.set(c)));
        !matched
            || bind
                .iter()
                .zip(&comps[pattern.len()..])
                .all(|(&x, &c)| self.subset(c, SetRef::Rho(x)))
    }

    fn actions_ok(&self) -> bool {
        for action in &self.ix.actions {
            let ok = match action {
                Action::Out(t) => {
                    let live = self.ix.outputs[*t].iter().all(|&c| !self.r.theta[c].is_empty());
                    !live || self.r.kappa.iter().any(|&k| self.r.universe.tuples[k] == TupleNode::Out(*t))
                }
                Action::In { pattern, bind } => self.r.kappa.iter().all(|&t| {
                    let comps = self.tuple_parts(t);
                    comps.len() != pattern.len() + bind.len() || self.binds_ok(&comps, pattern, bind)
                }),
                Action::Decrypt {
                    subject,
                    pattern,
                    bind,
                    key,
                    ann,
                } => self.r.theta[*subject].iter().all(|&n| {
                    let Some(parts) = self.parts(n) else {
                        return true;
                    };
                    if parts.len() != pattern.len() + bind.len() + 1
                        || !self.meets(&self.r.theta[*key], self.set(parts[0]))
                    {
                        return true;
                    }
                    let comps = &parts[1..];
                    let matched = pattern
                        .iter()
                        .zip(comps)
                        .all(|(&p, &c)| self.meets(&self.r.theta[p], self.set(c)));
                    if !matched {
                        return true;
                    }
                    let bound = bind
                        .iter()
                        .zip(&comps[pattern.len()..])
                        .all(|(&x, &c)| self.subset(c, SetRef::Rho(x)));
                    bound && self.psi_ok(n, ann.as_ref())
                }),
            };
            if !ok {
                return false;
            }
        }
        true
    }

    fn psi_ok(&self, n: NodeId, dec: Option<&crate::model::Annotation>) -> bool {
        let Some(dec) = dec else { return true };
        let (at, dest) = match self.r.universe.nodes[n] {
            Node::Enc(s) => match &self.ix.sites[s].ann {
                Some(a) => (a.at.clone(), a.points.clone()),
                None => return true,
            },
            Node::AttackerEnc(_) => (CryptoPoint::Attacker, PointSet::All),
            Node::Name(_) => return true,
        };
        dec.points.contains(&at) && dest.contains(&dec.at)
            || self.r.psi.contains(&(at, dec.at.clone()))
    }

    fn attacker_ok(&self) -> bool {
        let Some(z) = &self.r.attacker else {
            return true;
        };
        let u = &self.r.universe;
        if !u.seeds.is_subset(z) {
            return false;
        }
        let eavesdrops = self
            .r
            .kappa
            .iter()
            .all(|&t| self.tuple_parts(t).iter().all(|&c| self.set(c).is_subset(z)));
        let decrypts = z.iter().all(|&n| {
            let Some(parts) = self.parts(n) else {
                return true;
            };
            if !self.meets(self.set(parts[0]), z) {
                return true;
            }
            let learned = parts[1..].iter().all(|&c| self.set(c).is_subset(z));
            let flagged = match self.r.universe.nodes[n] {
                Node::Enc(s) => match &self.ix.sites[s].ann {
                    Some(a) if !a.points.contains(&CryptoPoint::Attacker) => {
                        self.r.psi.contains(&(a.at.clone(), CryptoPoint::Attacker))
                    }
                    _ => true,
                },
                _ => true,
            };
            learned && flagged
        });
        let builds = u.attacker_enc.values().all(|n| z.contains(n));
        let injects = u.wild.values().all(|t| self.r.kappa.contains(t));
        eavesdrops && decrypts && builds && injects
    }

    fn run(&self) -> bool {
        self.terms_ok() && self.actions_ok() && self.attacker_ok()
    }
}
