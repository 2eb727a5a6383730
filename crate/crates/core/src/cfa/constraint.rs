use crate::model::{Annotation, CryptoPoint};

use super::index::{Action, NodeId, OccId, OccKind, Origin, ProgramIndex, SetRef, TupleId, Universe};

/// Element of a set variable: a [`NodeId`] for value sets, a [`TupleId`] for κ.
pub type Elem = usize;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Premise {
    Contains(SetRef, Elem),
    NonEmpty(SetRef),
    /// The two value sets share a value, up to structural equality of
    /// unannotated encryptions.
    Intersects(SetRef, SetRef),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Conclusion {
    Insert(Elem, SetRef),
    Subset(SetRef, SetRef),
    Psi(CryptoPoint, CryptoPoint),
}

/// `premises ⇒ conclusions`; unconditional when `premises` is empty.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Constraint {
    pub premises: Vec<Premise>,
    pub conclusions: Vec<Conclusion>,
}

impl Constraint {
    pub fn fact(c: Conclusion) -> Self {
        Constraint {
            premises: Vec::new(),
            conclusions: vec![c],
        }
    }

    pub fn when(premises: Vec<Premise>, conclusions: Vec<Conclusion>) -> Self {
        Constraint {
            premises,
            conclusions,
        }
    }
}

/// Constraints together with the numbering they refer to.
#[derive(Debug, Clone)]
pub struct ConstraintSystem {
    pub index: ProgramIndex,
    pub universe: Universe,
    pub constraints: Vec<Constraint>,
}

/// The authentication clause of decryption: `Some((l, l'))` when a value
/// encrypted with `origin` may not be decrypted at a site annotated `dec`.
pub fn violation(origin: Origin<'_>, dec: Option<&Annotation>) -> Option<(CryptoPoint, CryptoPoint)> {
    let dec = dec?;
    match origin {
        Origin::Plain => None,
        Origin::Site(enc) => (!dec.points.contains(&enc.at) || !enc.points.contains(&dec.at))
            .then(|| (enc.at.clone(), dec.at.clone())),
        Origin::Attacker => {
            (!dec.points.contains(&CryptoPoint::Attacker)).then(|| (CryptoPoint::Attacker, dec.at.clone()))
        }
    }
}

/// What is known about ϑ of an occurrence without solving.
enum Shape {
    Name(NodeId),
    Enc(NodeId, bool),
    Open,
}

fn shape(ix: &ProgramIndex, u: &Universe, occ: OccId) -> Shape {
    match &ix.occs[occ] {
        OccKind::Name(c) => Shape::Name(u.name(c).expect("every occurring name is in the universe")),
        OccKind::Enc(s) => Shape::Enc(u.site_nodes[*s], ix.sites[*s].ann.is_none()),
        OccKind::Var(_) => Shape::Open,
    }
}

/// False when the two sets can never intersect.
fn may_intersect(ix: &ProgramIndex, u: &Universe, a: SetRef, b: SetRef) -> bool {
    let (SetRef::Theta(a), SetRef::Theta(b)) = (a, b) else {
        return true;
    };
    match (shape(ix, u, a), shape(ix, u, b)) {
        (Shape::Name(x), Shape::Name(y)) => x == y,
        (Shape::Name(_), Shape::Enc(..)) | (Shape::Enc(..), Shape::Name(_)) => false,
        (Shape::Enc(x, px), Shape::Enc(y, py)) => x == y || (px && py),
        _ => true,
    }
}

/// Constraints of Table-3 style for one occurrence and its sub-occurrences.
pub fn gen_term(ix: &ProgramIndex, u: &Universe, occ: OccId, out: &mut Vec<Constraint>) -> SetRef {
    let theta = SetRef::Theta(occ);
    match &ix.occs[occ] {
        OccKind::Name(c) => {
            let n = u.name(c).expect("every occurring name is in the universe");
            out.push(Constraint::fact(Conclusion::Insert(n, theta)));
        }
        OccKind::Var(v) => out.push(Constraint::fact(Conclusion::Subset(SetRef::Rho(*v), theta))),
        OccKind::Enc(s) => {
            let site = &ix.sites[*s];
            let mut premises = Vec::new();
            for &p in site.payload.iter().chain(std::iter::once(&site.key)) {
                premises.push(Premise::NonEmpty(gen_term(ix, u, p, out)));
            }
            out.push(Constraint::when(premises, vec![Conclusion::Insert(u.site_nodes[*s], theta)]));
        }
    }
    theta
}

fn gen_terms(ix: &ProgramIndex, u: &Universe, occs: &[OccId], out: &mut Vec<Constraint>) {
    for &o in occs {
        gen_term(ix, u, o, out);
    }
}

/// Constraints for every prefix of the indexed process.
pub fn gen_process(ix: &ProgramIndex, u: &Universe) -> Vec<Constraint> {
    let mut out = Vec::new();
    for action in &ix.actions {
        match action {
            Action::Out(t) => {
                let comps = &ix.outputs[*t];
                gen_terms(ix, u, comps, &mut out);
                let premises = comps.iter().map(|&c| Premise::NonEmpty(SetRef::Theta(c))).collect();
                out.push(Constraint::when(premises, vec![Conclusion::Insert(*t, SetRef::Kappa)]));
            }
            Action::In { pattern, bind } => {
                gen_terms(ix, u, pattern, &mut out);
                if bind.is_empty() {
                    continue;
                }
                let k = pattern.len() + bind.len();
                for t in 0..u.tuples.len() {
                    if u.tuple_arity(ix, t) == k {
                        gen_input(ix, u, t, pattern, bind, &mut out);
                    }
                }
            }
            Action::Decrypt {
                subject,
                pattern,
                bind,
                key,
                ann,
            } => {
                gen_term(ix, u, *subject, &mut out);
                gen_terms(ix, u, pattern, &mut out);
                gen_term(ix, u, *key, &mut out);
                let k = pattern.len() + bind.len();
                let candidates: Vec<NodeId> = match shape(ix, u, *subject) {
                    Shape::Name(_) => Vec::new(),
                    Shape::Enc(n, _) => vec![n],
                    Shape::Open => (0..u.nodes.len()).collect(),
                };
                for n in candidates {
                    if u.enc_arity(ix, n) == Some(k) {
                        gen_decrypt(ix, u, n, *subject, pattern, bind, *key, ann.as_ref(), &mut out);
                    }
                }
            }
        }
    }
    out
}

fn gen_input(
    ix: &ProgramIndex,
    u: &Universe,
    t: TupleId,
    pattern: &[OccId],
    bind: &[usize],
    out: &mut Vec<Constraint>,
) {
    let comps = u.tuple_comps(ix, t);
    let mut premises = vec![Premise::Contains(SetRef::Kappa, t)];
    for (&p, &c) in pattern.iter().zip(&comps) {
        let p = SetRef::Theta(p);
        if !may_intersect(ix, u, p, c) {
            return;
        }
        premises.push(Premise::Intersects(p, c));
    }
    let conclusions = bind
        .iter()
        .zip(&comps[pattern.len()..])
        .map(|(&x, &c)| Conclusion::Subset(c, SetRef::Rho(x)))
        .collect();
    out.push(Constraint::when(premises, conclusions));
}

#[allow(clippy::too_many_arguments)]
fn gen_decrypt(
    ix: &ProgramIndex,
    u: &Universe,
    n: NodeId,
    subject: OccId,
    pattern: &[OccId],
    bind: &[usize],
    key: OccId,
    ann: Option<&Annotation>,
    out: &mut Vec<Constraint>,
) {
    let (enc_key, comps) = u.enc_parts(ix, n).expect("candidate is an encryption node");
    let key = SetRef::Theta(key);
    if !may_intersect(ix, u, key, enc_key) {
        return;
    }
    let mut premises = vec![
        Premise::Contains(SetRef::Theta(subject), n),
        Premise::Intersects(key, enc_key),
    ];
    for (&p, &c) in pattern.iter().zip(&comps) {
        let p = SetRef::Theta(p);
        if !may_intersect(ix, u, p, c) {
            return;
        }
        premises.push(Premise::Intersects(p, c));
    }
    let mut conclusions: Vec<Conclusion> = bind
        .iter()
        .zip(&comps[pattern.len()..])
        .map(|(&x, &c)| Conclusion::Subset(c, SetRef::Rho(x)))
        .collect();
    if let Some((l, l2)) = violation(u.origin(ix, n).expect("encryption node"), ann) {
        conclusions.push(Conclusion::Psi(l, l2));
    }
    if !conclusions.is_empty() {
        out.push(Constraint::when(premises, conclusions));
    }
}
