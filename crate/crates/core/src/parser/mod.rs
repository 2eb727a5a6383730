//! Text front-end for `.lysa` models.
//!
//! A model file is a sequence of `let <Id> = <set>` headers followed by one
//! process. Indexed constructs (`par[i in X] P`, `new[i in X](n[i]) P`) are
//! kept in a template form until [`expand`] instantiates them over the declared
//! finite index sets. See `docs/grammar.md` for the full grammar.

mod expand;
mod grammar;
mod lexer;
mod pretty;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::model::Process;

pub use expand::{expand, expand_with, ExpandOptions};
pub use pretty::{pretty, pretty_term};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Default)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseErrorKind {
    #[error("expected {}, found {found}", expected.join(" or "))]
    Syntax { expected: Vec<String>, found: String },
    #[error("unknown crypto-point `{0}`")]
    UnknownPoint(String),
    #[error("crypto-point `{0}` labels more than one site")]
    DuplicatePoint(String),
    #[error("decryption pattern has {found} positions but the encryption has {expected}")]
    ArityMismatch { expected: usize, found: usize },
    #[error("variable `{0}` is bound twice by the same binder")]
    DuplicateBinder(String),
    #[error("index `{0}` is not bound")]
    UnboundIndex(String),
    #[error("index set `{0}` is not declared")]
    UnknownIndexSet(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{pos}: {kind}")]
pub struct ParseError {
    pub kind: ParseErrorKind,
    pub pos: Pos,
}

impl ParseError {
    pub fn new(kind: ParseErrorKind, pos: Pos) -> Self {
        ParseError { kind, pos }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum IndexExpr {
    Lit(u32),
    Var(String),
}

/// Identifier with symbolic indices, e.g. `KA[i]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TIdent {
    pub base: String,
    pub indices: Vec<IndexExpr>,
    pub pos: Pos,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TPoint {
    Site(TIdent),
    /// `l*`
    Attacker,
    /// `l*[i,j]`: the attacker point, present only when some index is `0`.
    AttackerIf(Vec<IndexExpr>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TPointSet {
    All,
    Only(Vec<TPoint>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TAnnotation {
    pub at: TPoint,
    pub points: TPointSet,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TTerm {
    Ident(TIdent),
    Enc {
        payload: Vec<TTerm>,
        key: Box<TTerm>,
        ann: Option<TAnnotation>,
        pos: Pos,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SetExpr {
    Lit(BTreeSet<u32>),
    Ref(String, Pos),
    Union(Vec<SetExpr>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TProcess {
    Nil,
    Par(Box<TProcess>, Box<TProcess>),
    Repl(Box<TProcess>),
    New(TIdent, Box<TProcess>),
    NewIndexed {
        var: String,
        set: SetExpr,
        name: TIdent,
        body: Box<TProcess>,
    },
    ParIndexed {
        var: String,
        set: SetExpr,
        body: Box<TProcess>,
    },
    Out(Vec<TTerm>, Box<TProcess>),
    In {
        pattern: Vec<TTerm>,
        bind: Vec<TIdent>,
        cont: Box<TProcess>,
    },
    Decrypt {
        subject: TTerm,
        pattern: Vec<TTerm>,
        bind: Vec<TIdent>,
        key: TTerm,
        ann: Option<TAnnotation>,
        cont: Box<TProcess>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Warning {
    pub pos: Pos,
    pub message: String,
}

impl fmt::Display for Warning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: warning: {}", self.pos, self.message)
    }
}

/// A parsed model file prior to index expansion.
#[derive(Debug, Clone)]
pub struct SourceModel {
    pub text: String,
    /// Declarations in file order; later ones may refer to earlier ones.
    pub index_sets: Vec<(String, SetExpr)>,
    pub template: TProcess,
    /// Site label base and arity mapped to where it is first declared.
    pub point_table: BTreeMap<(String, usize), Pos>,
    pub warnings: Vec<Warning>,
}

impl SourceModel {
    /// Evaluates the header declarations to concrete sets.
    pub fn declared_sets(&self) -> Result<BTreeMap<String, BTreeSet<u32>>, ParseError> {
        let mut env = BTreeMap::new();
        for (name, expr) in &self.index_sets {
            let value = eval_set(expr, &env)?;
            env.insert(name.clone(), value);
        }
        Ok(env)
    }
}

pub(crate) fn eval_set(
    expr: &SetExpr,
    env: &BTreeMap<String, BTreeSet<u32>>,
) -> Result<BTreeSet<u32>, ParseError> {
    match expr {
        SetExpr::Lit(s) => Ok(s.clone()),
        SetExpr::Ref(name, pos) => env.get(name).cloned().ok_or_else(|| {
            ParseError::new(ParseErrorKind::UnknownIndexSet(name.clone()), *pos)
        }),
        SetExpr::Union(parts) => {
            let mut out = BTreeSet::new();
            for p in parts {
                out.extend(eval_set(p, env)?);
            }
            Ok(out)
        }
    }
}

/// Parses a model file into its template form.
pub fn parse(text: &str) -> Result<SourceModel, ParseError> {
    grammar::parse_model(text)
}

/// Parses and expands with default options.
pub fn parse_process(text: &str) -> Result<Process, ParseError> {
    expand(&parse(text)?)
}
