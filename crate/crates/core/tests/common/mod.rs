#![allow(dead_code)]

use std::collections::BTreeMap;

use lysa::cfa::AnalysisOptions;
use lysa::exec::{self, ExploreOptions};
use lysa::model::{Annotation, CryptoPoint, Ident, PointSet, Process, Term};
use lysa::scenario::{corpus, Scenario};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

const FREE: [&str; 3] = ["A", "B", "K"];
const LABELS: usize = 4;

/// Builds closed random processes over a few free names and labels.
pub struct Gen<'r> {
    rng: &'r mut ChaCha8Rng,
    next_var: usize,
    next_name: usize,
    next_site: usize,
}

impl<'r> Gen<'r> {
    pub fn new(rng: &'r mut ChaCha8Rng) -> Self {
        Gen {
            rng,
            next_var: 0,
            next_name: 0,
            next_site: 0,
        }
    }

    fn points(&mut self) -> PointSet {
        let pts: Vec<CryptoPoint> = (0..LABELS)
            .filter(|_| self.rng.gen_bool(0.5))
            .map(|k| CryptoPoint::label(&format!("l{k}")))
            .collect();
        PointSet::only(pts)
    }

    fn ann(&mut self) -> Option<Annotation> {
        if self.next_site >= LABELS || self.rng.gen_bool(0.3) {
            return None;
        }
        let at = CryptoPoint::label(&format!("l{}", self.next_site));
        self.next_site += 1;
        Some(Annotation::new(at, self.points()))
    }

    fn atom(&mut self, scope: &[Term]) -> Term {
        if !scope.is_empty() && self.rng.gen_bool(0.6) {
            scope.choose(self.rng).unwrap().clone()
        } else {
            Term::name(FREE.choose(self.rng).unwrap())
        }
    }

    fn term(&mut self, scope: &[Term]) -> Term {
        if self.rng.gen_bool(0.3) {
            let n = self.rng.gen_range(1..=2);
            let payload = (0..n).map(|_| self.atom(scope)).collect();
            let key = self.atom(scope);
            let ann = self.ann();
            Term::enc(payload, key, ann)
        } else {
            self.atom(scope)
        }
    }

    fn var(&mut self) -> Ident {
        self.next_var += 1;
        Ident::new(format!("x{}", self.next_var))
    }

    /// A tag followed by one term that fits in `room` nodes.
    fn pair(&mut self, scope: &[Term], room: usize) -> Vec<Term> {
        let tag = Term::name(FREE[self.rng.gen_range(0..2)]);
        let t = if room >= 3 { self.term(scope) } else { self.atom(scope) };
        vec![tag, t]
    }

    fn process(&mut self, scope: &mut Vec<Term>, budget: usize) -> Process {
        if budget < 4 {
            return Process::Nil;
        }
        let vars: Vec<Term> = scope.iter().filter(|t| matches!(t, Term::Var(_))).cloned().collect();
        let pick = self.rng.gen_range(1..12);
        match pick {
            1 | 2 if budget >= 7 => {
                let left = self.rng.gen_range(1..budget - 1);
                let l = self.process(&mut scope.clone(), left);
                let r = self.process(scope, budget - 1 - left);
                Process::par(l, r)
            }
            3 if budget >= 5 => Process::Repl(Box::new(self.process(scope, budget - 1))),
            4 if budget >= 5 => {
                self.next_name += 1;
                let n = Ident::new(format!("N{}", self.next_name));
                scope.push(Term::Name(n.clone()));
                Process::New(n, Box::new(self.process(scope, budget - 1)))
            }
            5..=7 => {
                let ts = self.pair(scope, budget - 3);
                let used: usize = ts.iter().map(term_size).sum();
                Process::Out(ts, Box::new(self.process(scope, budget.saturating_sub(1 + used))))
            }
            8 | 9 => {
                let pattern = vec![Term::name(FREE[self.rng.gen_range(0..2)])];
                let bind: Vec<Ident> = vec![self.var()];
                scope.extend(bind.iter().cloned().map(Term::Var));
                let cont = self.process(scope, budget.saturating_sub(2 + bind.len()));
                Process::In {
                    pattern,
                    bind,
                    cont: Box::new(cont),
                }
            }
            _ if !vars.is_empty() && budget >= 6 => {
                let subject = vars.choose(self.rng).unwrap().clone();
                let key = self.atom(scope);
                let j = self.rng.gen_range(0..=1);
                let pattern: Vec<Term> = (0..j).map(|_| self.atom(scope)).collect();
                let bind: Vec<Ident> = vec![self.var()];
                let ann = self.ann();
                scope.extend(bind.iter().cloned().map(Term::Var));
                let cont = self.process(scope, budget.saturating_sub(4 + j));
                Process::Decrypt {
                    subject,
                    pattern,
                    bind,
                    key,
                    ann,
                    cont: Box::new(cont),
                }
            }
            _ => {
                let ts = self.pair(scope, budget - 3);
                let used: usize = ts.iter().map(term_size).sum();
                Process::Out(ts, Box::new(self.process(scope, budget.saturating_sub(1 + used))))
            }
        }
    }
}

fn term_size(t: &Term) -> usize {
    match t {
        Term::Enc { payload, key, .. } => 1 + term_size(key) + payload.iter().map(term_size).sum::<usize>(),
        _ => 1,
    }
}

/// A closed random process of at most `max_size` AST nodes: a parallel
/// composition of components that talk over the tags `A` and `B`.
pub fn random_process(rng: &mut ChaCha8Rng, max_size: usize) -> Process {
    loop {
        let mut g = Gen::new(rng);
        let parts = if g.rng.gen_bool(0.8) { 2 } else { 3 };
        let share = max_size / parts;
        let procs: Vec<Process> = (0..parts).map(|_| g.process(&mut Vec::new(), share)).collect();
        let p = Process::par_all(procs);
        if p.size() <= max_size {
            return p;
        }
    }
}

/// Every corpus scenario with index sets cut down so exhaustive execution
/// stays small: X = {1}, plus {0} when the attacker is legitimate.
pub fn reduced(s: &Scenario) -> Scenario {
    let mut s = s.clone();
    s.attacker = false;
    s.index_sets = BTreeMap::from([("X".to_string(), [1].into())]);
    s
}

/// Events of every schedule up to `depth` that the analysis does not cover.
pub fn uncovered_events(p: &Process, depth: usize) -> Vec<String> {
    let r = lysa::analyze(p, &AnalysisOptions::default()).expect("analysis");
    let ex = exec::explore(
        p,
        &ExploreOptions {
            depth,
            ..Default::default()
        },
    );
    exec::uncovered(&ex.events, &r)
        .into_iter()
        .map(|e| e.to_string())
        .collect()
}

/// Distinct corpus model variants, by file and legitimacy.
pub fn corpus_models() -> Vec<Scenario> {
    let mut seen = std::collections::BTreeSet::new();
    corpus()
        .into_iter()
        .filter(|s| seen.insert((s.file.clone(), s.legitimate_attacker)))
        .collect()
}

/// One element of an analysis result.
#[derive(Debug, Clone)]
pub enum Element {
    Set(lysa::cfa::SetRef, usize),
    Psi(CryptoPoint, CryptoPoint),
}

/// Every element of every set of the result.
pub fn elements(r: &lysa::AnalysisResult) -> Vec<Element> {
    use lysa::cfa::SetRef;
    let mut refs: Vec<SetRef> = (0..r.theta.len()).map(SetRef::Theta).collect();
    refs.extend((0..r.rho.len()).map(SetRef::Rho));
    refs.push(SetRef::Kappa);
    if r.attacker.is_some() {
        refs.push(SetRef::Attacker);
    }
    let mut out: Vec<Element> = refs
        .into_iter()
        .flat_map(|s| r.set(s).iter().map(move |&e| Element::Set(s, e)))
        .collect();
    out.extend(r.psi.iter().map(|(a, b)| Element::Psi(a.clone(), b.clone())));
    out
}

/// The result without one element.
pub fn without(r: &lysa::AnalysisResult, e: &Element) -> lysa::AnalysisResult {
    let mut r = r.clone();
    match e {
        Element::Set(s, x) => {
            r.set_mut(*s).expect("set").remove(x);
        }
        Element::Psi(a, b) => {
            r.psi.remove(&(a.clone(), b.clone()));
        }
    }
    r
}
