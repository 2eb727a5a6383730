use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};

use fixedbitset::FixedBitSet;
use rand::{Rng, SeedableRng};
use rand::seq::SliceRandom;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::model::CryptoPoint;

use super::constraint::{Conclusion, Constraint, ConstraintSystem, Premise};
use super::index::{NodeClass, NodeId, ProgramIndex, SetRef, Universe};
use super::result::AnalysisResult;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolverOptions {
    pub max_universe: usize,
    pub max_firings: usize,
    /// Randomises constraint and worklist order; the result does not change.
    pub shuffle_seed: Option<u64>,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            max_universe: 1_000_000,
            max_firings: 10_000_000,
            shuffle_seed: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SolveError {
    #[error("resource limit exceeded: {what} reached {value} (cap {cap})")]
    ResourceLimit {
        what: &'static str,
        value: usize,
        cap: usize,
    },
}

pub fn solve(cs: &ConstraintSystem) -> Result<AnalysisResult, SolveError> {
    solve_with(cs, &SolverOptions::default())
}

pub fn solve_with(cs: &ConstraintSystem, opts: &SolverOptions) -> Result<AnalysisResult, SolveError> {
    let u = &cs.universe;
    if u.nodes.len() > opts.max_universe {
        return Err(SolveError::ResourceLimit {
            what: "universe size",
            value: u.nodes.len(),
            cap: opts.max_universe,
        });
    }
    let mut s = Solver::new(&cs.index, u, &cs.constraints, opts);
    s.run()?;
    Ok(s.finish())
}

/// Compatibility of unannotated encryption nodes: two nodes are compatible when
/// they may denote the same concrete value.
pub(crate) struct Compat {
    plain: Vec<NodeId>,
    pos: Vec<Option<usize>>,
    mask: FixedBitSet,
    rel: FixedBitSet,
}

impl Compat {
    pub(crate) fn new(ix: &ProgramIndex, u: &Universe) -> Self {
        let mut plain = Vec::new();
        let mut pos = vec![None; u.nodes.len()];
        let mut mask = FixedBitSet::with_capacity(u.nodes.len());
        for n in 0..u.nodes.len() {
            if matches!(u.class(ix, n), NodeClass::Plain(_) | NodeClass::Attacker(_)) {
                pos[n] = Some(plain.len());
                plain.push(n);
                mask.insert(n);
            }
        }
        let p = plain.len();
        Compat {
            plain,
            pos,
            mask,
            rel: FixedBitSet::with_capacity(p * p),
        }
    }

    fn related(&self, a: NodeId, b: NodeId) -> bool {
        match (self.pos[a], self.pos[b]) {
            (Some(i), Some(j)) => self.rel.contains(i * self.plain.len() + j),
            _ => false,
        }
    }

    pub(crate) fn sets_meet(&self, a: &FixedBitSet, b: &FixedBitSet) -> bool {
        if !a.is_disjoint(b) {
            return true;
        }
        let mut pa = a.clone();
        pa.intersect_with(&self.mask);
        if pa.count_ones(..) == 0 {
            return false;
        }
        let mut pb = b.clone();
        pb.intersect_with(&self.mask);
        pa.ones().any(|x| pb.ones().any(|y| self.related(x, y)))
    }

    /// Grows the relation to its least fixpoint over the current sets. Returns
    /// true when it changed.
    pub(crate) fn update(
        &mut self,
        ix: &ProgramIndex,
        u: &Universe,
        sets: &[FixedBitSet],
        map: SlotMap,
    ) -> bool {
        let p = self.plain.len();
        let mut changed_any = false;
        loop {
            let mut changed = false;
            for i in 0..p {
                for j in (i + 1)..p {
                    if self.rel.contains(i * p + j) {
                        continue;
                    }
                    let (a, b) = (self.plain[i], self.plain[j]);
                    if u.enc_arity(ix, a) != u.enc_arity(ix, b) {
                        continue;
                    }
                    let (ka, ca) = u.enc_parts(ix, a).expect("plain nodes are encryptions");
                    let (kb, cb) = u.enc_parts(ix, b).expect("plain nodes are encryptions");
                    let ok = std::iter::once((ka, kb))
                        .chain(ca.into_iter().zip(cb))
                        .all(|(x, y)| self.sets_meet(&sets[map.slot(x)], &sets[map.slot(y)]));
                    if ok {
                        self.rel.insert(i * p + j);
                        self.rel.insert(j * p + i);
                        changed = true;
                    }
                }
            }
            if !changed {
                return changed_any;
            }
            changed_any = true;
        }
    }
}

/// Position of each set variable in a flat vector of sets.
#[derive(Debug, Clone, Copy)]
pub(crate) struct SlotMap {
    pub n_occ: usize,
    pub n_var: usize,
}

impl SlotMap {
    pub(crate) fn new(ix: &ProgramIndex) -> Self {
        SlotMap {
            n_occ: ix.occs.len(),
            n_var: ix.vars.len(),
        }
    }

    pub(crate) fn len(&self) -> usize {
        self.n_occ + self.n_var + 2
    }

    pub(crate) fn slot(&self, r: SetRef) -> usize {
        match r {
            SetRef::Theta(o) => o,
            SetRef::Rho(v) => self.n_occ + v,
            SetRef::Attacker => self.n_occ + self.n_var,
            SetRef::Kappa => self.n_occ + self.n_var + 1,
        }
    }
}

struct Solver<'a> {
    ix: &'a ProgramIndex,
    u: &'a Universe,
    cs: &'a [Constraint],
    map: SlotMap,
    sets: Vec<FixedBitSet>,
    pending: Vec<Vec<usize>>,
    queued: Vec<bool>,
    queue: VecDeque<usize>,
    edges: Vec<Vec<usize>>,
    edge_set: HashSet<(usize, usize)>,
    set_watch: Vec<Vec<usize>>,
    elem_watch: HashMap<(usize, usize), Vec<usize>>,
    with_intersects: Vec<usize>,
    fired: FixedBitSet,
    psi: BTreeSet<(CryptoPoint, CryptoPoint)>,
    compat: Compat,
    firings: usize,
    max_firings: usize,
    rng: Option<ChaCha8Rng>,
}

impl<'a> Solver<'a> {
    fn new(ix: &'a ProgramIndex, u: &'a Universe, cs: &'a [Constraint], opts: &SolverOptions) -> Self {
        let map = SlotMap::new(ix);
        let slots = map.len();
        let mut sets = vec![FixedBitSet::with_capacity(u.nodes.len()); slots];
        sets[slots - 1] = FixedBitSet::with_capacity(u.tuples.len());
        Solver {
            ix,
            u,
            cs,
            map,
            sets,
            pending: vec![Vec::new(); slots],
            queued: vec![false; slots],
            queue: VecDeque::new(),
            edges: vec![Vec::new(); slots],
            edge_set: HashSet::new(),
            set_watch: vec![Vec::new(); slots],
            elem_watch: HashMap::new(),
            with_intersects: Vec::new(),
            fired: FixedBitSet::with_capacity(cs.len()),
            psi: BTreeSet::new(),
            compat: Compat::new(ix, u),
            firings: 0,
            max_firings: opts.max_firings,
            rng: opts.shuffle_seed.map(ChaCha8Rng::seed_from_u64),
        }
    }

    fn slot(&self, r: SetRef) -> usize {
        self.map.slot(r)
    }

    fn tick(&mut self) -> Result<(), SolveError> {
        self.firings += 1;
        if self.firings > self.max_firings {
            return Err(SolveError::ResourceLimit {
                what: "constraint firings",
                value: self.firings,
                cap: self.max_firings,
            });
        }
        Ok(())
    }

    fn insert(&mut self, slot: usize, e: usize) -> Result<(), SolveError> {
        if !self.sets[slot].put(e) {
            self.tick()?;
            self.pending[slot].push(e);
            if !self.queued[slot] {
                self.queued[slot] = true;
                self.queue.push_back(slot);
            }
        }
        Ok(())
    }

    fn holds(&self, p: &Premise) -> bool {
        match *p {
            Premise::Contains(r, e) => self.sets[self.slot(r)].contains(e),
            Premise::NonEmpty(r) => self.sets[self.slot(r)].count_ones(..) > 0,
            Premise::Intersects(a, b) => self
                .compat
                .sets_meet(&self.sets[self.slot(a)], &self.sets[self.slot(b)]),
        }
    }

    fn try_fire(&mut self, cid: usize) -> Result<(), SolveError> {
        if self.fired.contains(cid) {
            return Ok(());
        }
        let c = &self.cs[cid];
        if !c.premises.iter().all(|p| self.holds(p)) {
            return Ok(());
        }
        self.fired.insert(cid);
        self.tick()?;
        for concl in &c.conclusions {
            match concl {
                Conclusion::Insert(e, r) => {
                    let slot = self.slot(*r);
                    self.insert(slot, *e)?;
                }
                Conclusion::Subset(a, b) => {
                    let (a, b) = (self.slot(*a), self.slot(*b));
                    if a != b && self.edge_set.insert((a, b)) {
                        self.edges[a].push(b);
                        let current: Vec<usize> = self.sets[a].ones().collect();
                        for e in current {
                            self.insert(b, e)?;
                        }
                    }
                }
                Conclusion::Psi(l, l2) => {
                    self.psi.insert((l.clone(), l2.clone()));
                }
            }
        }
        Ok(())
    }

    fn pop(&mut self) -> Option<usize> {
        let slot = match &mut self.rng {
            Some(rng) if !self.queue.is_empty() => {
                let i = rng.gen_range(0..self.queue.len());
                self.queue.swap_remove_back(i)
            }
            _ => self.queue.pop_front(),
        }?;
        self.queued[slot] = false;
        Some(slot)
    }

    fn run(&mut self) -> Result<(), SolveError> {
        let mut order: Vec<usize> = (0..self.cs.len()).collect();
        if let Some(rng) = &mut self.rng {
            order.shuffle(rng);
        }
        for &cid in &order {
            let mut has_intersects = false;
            for p in &self.cs[cid].premises {
                match *p {
                    Premise::Contains(r, e) => {
                        let slot = self.slot(r);
                        self.elem_watch.entry((slot, e)).or_default().push(cid);
                    }
                    Premise::NonEmpty(r) => {
                        let slot = self.slot(r);
                        self.set_watch[slot].push(cid);
                    }
                    Premise::Intersects(a, b) => {
                        has_intersects = true;
                        let (a, b) = (self.slot(a), self.slot(b));
                        self.set_watch[a].push(cid);
                        if b != a {
                            self.set_watch[b].push(cid);
                        }
                    }
                }
            }
            if has_intersects {
                self.with_intersects.push(cid);
            }
        }
        for &cid in &order {
            self.try_fire(cid)?;
        }
        loop {
            while let Some(slot) = self.pop() {
                let delta = std::mem::take(&mut self.pending[slot]);
                for i in 0..self.edges[slot].len() {
                    let succ = self.edges[slot][i];
                    for &e in &delta {
                        self.insert(succ, e)?;
                    }
                }
                for &e in &delta {
                    if let Some(ws) = self.elem_watch.get(&(slot, e)).cloned() {
                        for cid in ws {
                            self.try_fire(cid)?;
                        }
                    }
                }
                let ws = std::mem::take(&mut self.set_watch[slot]);
                let mut result = Ok(());
                for &cid in &ws {
                    result = self.try_fire(cid);
                    if result.is_err() {
                        break;
                    }
                }
                self.set_watch[slot] = ws;
                result?;
            }
            if !self.compat.update(self.ix, self.u, &self.sets, self.map) {
                return Ok(());
            }
            for i in 0..self.with_intersects.len() {
                let cid = self.with_intersects[i];
                self.try_fire(cid)?;
            }
            if self.queue.is_empty() {
                return Ok(());
            }
        }
    }

    fn finish(self) -> AnalysisResult {
        let to_set = |b: &FixedBitSet| b.ones().collect::<BTreeSet<usize>>();
        let m = self.map;
        let theta = (0..m.n_occ).map(|o| to_set(&self.sets[m.slot(SetRef::Theta(o))])).collect();
        let rho = (0..m.n_var).map(|v| to_set(&self.sets[m.slot(SetRef::Rho(v))])).collect();
        let attacker = self
            .u
            .attacker
            .then(|| to_set(&self.sets[m.slot(SetRef::Attacker)]));
        let kappa = to_set(&self.sets[m.slot(SetRef::Kappa)]);
        AnalysisResult {
            index: self.ix.clone(),
            universe: self.u.clone(),
            theta,
            rho,
            attacker,
            kappa,
            psi: self.psi,
        }
    }
}
