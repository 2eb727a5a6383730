use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use super::{
    eval_set, IndexExpr, ParseError, ParseErrorKind, Pos, SetExpr, SourceModel, TAnnotation,
    TIdent, TPoint, TPointSet, TProcess, TTerm,
};
use crate::model::{Annotation, CryptoPoint, Ident, PointSet, Process, Term};

/// Controls template instantiation.
#[derive(Debug, Clone, Default)]
pub struct ExpandOptions {
    /// Replaces the value of a declared index set.
    pub overrides: BTreeMap<String, BTreeSet<u32>>,
    /// Removes the attacker index `0` from every index set.
    pub drop_attacker_index: bool,
}

/// Expands with the index sets exactly as declared.
pub fn expand(model: &SourceModel) -> Result<Process, ParseError> {
    expand_with(model, &ExpandOptions::default())
}

pub fn expand_with(model: &SourceModel, opts: &ExpandOptions) -> Result<Process, ParseError> {
    let mut sets = BTreeMap::new();
    for (name, expr) in &model.index_sets {
        let value = match opts.overrides.get(name) {
            Some(v) => v.clone(),
            None => eval_set(expr, &sets)?,
        };
        sets.insert(name.clone(), value);
    }
    let mut ex = Expander {
        sets,
        drop_zero: opts.drop_attacker_index,
        env: BTreeMap::new(),
        scope: Vec::new(),
        binder_counts: HashMap::new(),
        sites: HashSet::new(),
    };
    ex.process(&model.template)
}

struct Expander {
    sets: BTreeMap<String, BTreeSet<u32>>,
    drop_zero: bool,
    env: BTreeMap<String, u32>,
    /// Bound variables in scope: (as written, after renaming).
    scope: Vec<(Ident, Ident)>,
    binder_counts: HashMap<Ident, u32>,
    sites: HashSet<CryptoPoint>,
}

type EResult<T> = Result<T, ParseError>;

impl Expander {
    fn index(&self, e: &IndexExpr, pos: Pos) -> EResult<u32> {
        match e {
            IndexExpr::Lit(n) => Ok(*n),
            IndexExpr::Var(v) => self
                .env
                .get(v)
                .copied()
                .ok_or_else(|| ParseError::new(ParseErrorKind::UnboundIndex(v.clone()), pos)),
        }
    }

    fn ident(&self, t: &TIdent) -> EResult<Ident> {
        let indices = t
            .indices
            .iter()
            .map(|e| self.index(e, t.pos))
            .collect::<EResult<Vec<_>>>()?;
        Ok(Ident {
            base: t.base.clone(),
            indices,
        })
    }

    fn set(&self, expr: &SetExpr) -> EResult<BTreeSet<u32>> {
        let mut s = eval_set(expr, &self.sets)?;
        if self.drop_zero {
            s.remove(&0);
        }
        Ok(s)
    }

    fn term(&mut self, t: &TTerm) -> EResult<Term> {
        match t {
            TTerm::Ident(id) => {
                let concrete = self.ident(id)?;
                let bound = self
                    .scope
                    .iter()
                    .rev()
                    .find(|(written, _)| *written == concrete)
                    .map(|(_, renamed)| renamed.clone());
                Ok(match bound {
                    Some(v) => Term::Var(v),
                    None => Term::Name(concrete),
                })
            }
            TTerm::Enc {
                payload,
                key,
                ann,
                pos,
            } => {
                let payload = payload
                    .iter()
                    .map(|p| self.term(p))
                    .collect::<EResult<Vec<_>>>()?;
                let key = self.term(key)?;
                let ann = self.annotation(ann.as_ref(), *pos)?;
                Ok(Term::enc(payload, key, ann))
            }
        }
    }

    fn point(&self, p: &TPoint) -> EResult<Option<CryptoPoint>> {
        Ok(match p {
            TPoint::Site(id) => Some(CryptoPoint::Site(self.ident(id)?)),
            TPoint::Attacker => Some(CryptoPoint::Attacker),
            TPoint::AttackerIf(idx) => {
                let mut any_zero = false;
                for e in idx {
                    any_zero |= self.index(e, Pos::default())? == 0;
                }
                any_zero.then_some(CryptoPoint::Attacker)
            }
        })
    }

    fn annotation(&mut self, ann: Option<&TAnnotation>, pos: Pos) -> EResult<Option<Annotation>> {
        let Some(ann) = ann else { return Ok(None) };
        let at = self
            .point(&ann.at)?
            .expect("site labels are never conditional");
        if !self.sites.insert(at.clone()) {
            return Err(ParseError::new(
                ParseErrorKind::DuplicatePoint(at.to_string()),
                pos,
            ));
        }
        let points = match &ann.points {
            TPointSet::All => PointSet::All,
            TPointSet::Only(ps) => {
                let mut out = BTreeSet::new();
                for p in ps {
                    if let Some(cp) = self.point(p)? {
                        out.insert(cp);
                    }
                }
                PointSet::Only(out)
            }
        };
        Ok(Some(Annotation { at, points }))
    }

    /// Resolves binders, renaming any identifier already bound elsewhere.
    fn binders(&mut self, bind: &[TIdent]) -> EResult<Vec<(Ident, Ident)>> {
        let mut out = Vec::with_capacity(bind.len());
        for b in bind {
            let written = self.ident(b)?;
            let count = self.binder_counts.entry(written.clone()).or_insert(0);
            *count += 1;
            let renamed = if *count == 1 {
                written.clone()
            } else {
                Ident {
                    base: format!("{}'{}", written.base, count),
                    indices: written.indices.clone(),
                }
            };
            out.push((written, renamed));
        }
        Ok(out)
    }

    fn with_binders<T>(
        &mut self,
        bound: &[(Ident, Ident)],
        f: impl FnOnce(&mut Self) -> EResult<T>,
    ) -> EResult<T> {
        let depth = self.scope.len();
        self.scope.extend(bound.iter().cloned());
        let r = f(self);
        self.scope.truncate(depth);
        r
    }

    fn indexed<T>(
        &mut self,
        var: &str,
        set: &SetExpr,
        mut f: impl FnMut(&mut Self) -> EResult<T>,
    ) -> EResult<Vec<T>> {
        let values = self.set(set)?;
        let saved = self.env.get(var).copied();
        let mut out = Vec::with_capacity(values.len());
        for v in values {
            self.env.insert(var.to_string(), v);
            let r = f(self);
            if r.is_err() {
                self.restore(var, saved);
            }
            out.push(r?);
        }
        self.restore(var, saved);
        Ok(out)
    }

    fn restore(&mut self, var: &str, saved: Option<u32>) {
        match saved {
            Some(v) => self.env.insert(var.to_string(), v),
            None => self.env.remove(var),
        };
    }

    fn process(&mut self, p: &TProcess) -> EResult<Process> {
        Ok(match p {
            TProcess::Nil => Process::Nil,
            TProcess::Par(l, r) => Process::par(self.process(l)?, self.process(r)?),
            TProcess::Repl(q) => Process::Repl(Box::new(self.process(q)?)),
            TProcess::New(n, q) => Process::New(self.ident(n)?, Box::new(self.process(q)?)),
            TProcess::NewIndexed {
                var,
                set,
                name,
                body,
            } => {
                let names = self.indexed(var, set, |ex| ex.ident(name))?;
                let body = self.process(body)?;
                names
                    .into_iter()
                    .rev()
                    .fold(body, |acc, n| Process::New(n, Box::new(acc)))
            }
            TProcess::ParIndexed { var, set, body } => {
                let branches = self.indexed(var, set, |ex| ex.process(body))?;
                Process::par_all(branches)
            }
            TProcess::Out(ts, q) => {
                let ts = ts
                    .iter()
                    .map(|t| self.term(t))
                    .collect::<EResult<Vec<_>>>()?;
                Process::Out(ts, Box::new(self.process(q)?))
            }
            TProcess::In {
                pattern,
                bind,
                cont,
            } => {
                let pattern = pattern
                    .iter()
                    .map(|t| self.term(t))
                    .collect::<EResult<Vec<_>>>()?;
                let bound = self.binders(bind)?;
                let cont = self.with_binders(&bound, |ex| ex.process(cont))?;
                Process::In {
                    pattern,
                    bind: bound.into_iter().map(|(_, r)| r).collect(),
                    cont: Box::new(cont),
                }
            }
            TProcess::Decrypt {
                subject,
                pattern,
                bind,
                key,
                ann,
                cont,
            } => {
                let subject = self.term(subject)?;
                let pattern = pattern
                    .iter()
                    .map(|t| self.term(t))
                    .collect::<EResult<Vec<_>>>()?;
                let key = self.term(key)?;
                let pos = bind.first().map(|b| b.pos).unwrap_or_default();
                let ann = self.annotation(ann.as_ref(), pos)?;
                let bound = self.binders(bind)?;
                let cont = self.with_binders(&bound, |ex| ex.process(cont))?;
                Process::Decrypt {
                    subject,
                    pattern,
                    bind: bound.into_iter().map(|(_, r)| r).collect(),
                    key,
                    ann,
                    cont: Box::new(cont),
                }
            }
        })
    }
}
