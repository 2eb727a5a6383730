//! The Dolev-Yao attacker as a set of extra constraints.
//!
//! The attacker's knowledge is the set variable ρ(z•). It starts with `n•`,
//! the free names of the process and any scenario seeds, eavesdrops every
//! tuple in κ, decrypts with keys it knows, builds its own encryptions
//! (one `AttackerEnc(k)` node per arity) and injects wild tuples into κ.

use std::collections::{BTreeSet, HashSet};

use crate::cfa::{
    AnalysisResult, Conclusion, Constraint, Node, Premise, ProgramIndex, SetRef, Universe,
};
use crate::model::{arity_profile, canonical, CanonicalName, CryptoPoint, Name, Process};

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct AttackerConfig {
    pub tuple_arities: BTreeSet<usize>,
    pub enc_arities: BTreeSet<usize>,
    /// Names the attacker knows from the start besides `n•` and the free names.
    pub extra_seeds: BTreeSet<Name>,
}

impl AttackerConfig {
    /// The knowledge variable `z•`.
    pub const KNOWLEDGE: SetRef = SetRef::Attacker;
    pub const POINT: CryptoPoint = CryptoPoint::Attacker;

    pub fn seed_name() -> CanonicalName {
        CanonicalName::attacker()
    }

    pub fn for_process(p: &Process) -> Self {
        let profile = arity_profile(p);
        AttackerConfig {
            tuple_arities: profile.tuple_arities,
            enc_arities: profile.enc_arities,
            extra_seeds: BTreeSet::new(),
        }
    }

    pub fn with_seeds(mut self, seeds: impl IntoIterator<Item = Name>) -> Self {
        self.extra_seeds.extend(seeds);
        self
    }

    /// Canonical classes of `n•`, the free names and the extra seeds.
    pub fn seed_classes(&self, ix: &ProgramIndex) -> BTreeSet<CanonicalName> {
        let mut out: BTreeSet<CanonicalName> = ix
            .free_names
            .iter()
            .chain(&self.extra_seeds)
            .map(|n| canonical(n, &ix.policy))
            .collect();
        out.insert(CanonicalName::attacker());
        out
    }
}

pub fn attacker_constraints(cfg: &AttackerConfig, ix: &ProgramIndex, u: &Universe) -> Vec<Constraint> {
    let z = SetRef::Attacker;
    let mut out = Vec::new();
    for c in cfg.seed_classes(ix) {
        let n = u.name(&c).expect("seed classes are in the universe");
        out.push(Constraint::fact(Conclusion::Insert(n, z)));
    }
    for (t, comps) in ix.outputs.iter().enumerate() {
        out.push(Constraint::when(
            vec![Premise::Contains(SetRef::Kappa, t)],
            comps
                .iter()
                .map(|&c| Conclusion::Subset(SetRef::Theta(c), z))
                .collect(),
        ));
    }
    for (s, site) in ix.sites.iter().enumerate() {
        let mut conclusions: Vec<Conclusion> = site
            .payload
            .iter()
            .map(|&c| Conclusion::Subset(SetRef::Theta(c), z))
            .collect();
        if let Some(ann) = &site.ann {
            if !ann.points.contains(&CryptoPoint::Attacker) {
                conclusions.push(Conclusion::Psi(ann.at.clone(), CryptoPoint::Attacker));
            }
        }
        out.push(Constraint::when(
            vec![
                Premise::Contains(z, u.site_nodes[s]),
                Premise::Intersects(SetRef::Theta(site.key), z),
            ],
            conclusions,
        ));
    }
    for &n in u.attacker_enc.values() {
        out.push(Constraint::fact(Conclusion::Insert(n, z)));
    }
    for &t in u.wild.values() {
        out.push(Constraint::fact(Conclusion::Insert(t, SetRef::Kappa)));
    }
    out
}

/// True when the attacker never learns the class of `secret`.
pub fn confidential(result: &AnalysisResult, secret: &Name) -> bool {
    let c = canonical(secret, &result.index.policy);
    let Some(z) = &result.attacker else {
        return true;
    };
    !z.iter().any(|&n| result.universe.nodes[n] == Node::Name(c.clone()))
}

/// The error component; empty means origin and destination authentication hold.
pub fn authentic(result: &AnalysisResult) -> BTreeSet<(CryptoPoint, CryptoPoint)> {
    result.psi.clone()
}

/// Names in the attacker's knowledge, as canonical classes.
pub fn known_names(result: &AnalysisResult) -> HashSet<CanonicalName> {
    let Some(z) = &result.attacker else {
        return HashSet::new();
    };
    z.iter()
        .filter_map(|&n| match &result.universe.nodes[n] {
            Node::Name(c) => Some(c.clone()),
            _ => None,
        })
        .collect()
}
