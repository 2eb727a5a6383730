use std::fmt::Write;

use crate::model::{Annotation, CryptoPoint, Ident, PointSet, Process, Term};

/// Renders a process in the surface syntax accepted by [`super::parse`].
pub fn pretty(p: &Process) -> String {
    let mut out = String::new();
    process(p, &mut out);
    out
}

pub fn pretty_term(t: &Term) -> String {
    let mut out = String::new();
    term(t, &mut out);
    out
}

fn point(p: &CryptoPoint, out: &mut String) {
    match p {
        CryptoPoint::Site(id) => write!(out, "{id}").unwrap(),
        CryptoPoint::Attacker => out.push_str("l*"),
    }
}

fn annotation(ann: &Annotation, kind: &str, out: &mut String) {
    out.push_str("[at ");
    point(&ann.at, out);
    write!(out, " {kind} ").unwrap();
    match &ann.points {
        PointSet::All => out.push('C'),
        PointSet::Only(ps) => {
            out.push('{');
            for (i, p) in ps.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                point(p, out);
            }
            out.push('}');
        }
    }
    out.push(']');
}

fn term(t: &Term, out: &mut String) {
    match t {
        Term::Name(n) | Term::Var(n) => write!(out, "{n}").unwrap(),
        Term::Enc { payload, key, ann } => {
            out.push('{');
            terms(payload, out);
            out.push_str("}:");
            if matches!(**key, Term::Enc { .. }) {
                out.push('(');
                term(key, out);
                out.push(')');
            } else {
                term(key, out);
            }
            if let Some(a) = ann {
                annotation(a, "dest", out);
            }
        }
    }
}

fn terms(ts: &[Term], out: &mut String) {
    for (i, t) in ts.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        term(t, out);
    }
}

fn binders(pattern: &[Term], bind: &[Ident], out: &mut String) {
    terms(pattern, out);
    if !bind.is_empty() {
        out.push_str("; ");
        for (i, b) in bind.iter().enumerate() {
            if i > 0 {
                out.push_str(", ");
            }
            write!(out, "{b}").unwrap();
        }
    }
}

/// Prints `p` where a prefix is expected; parallel compositions need parentheses.
fn prefix(p: &Process, out: &mut String) {
    if matches!(p, Process::Par(..)) {
        out.push('(');
        process(p, out);
        out.push(')');
    } else {
        process(p, out);
    }
}

fn process(p: &Process, out: &mut String) {
    match p {
        Process::Nil => out.push('0'),
        Process::Par(l, r) => {
            prefix(l, out);
            out.push_str(" | ");
            process(r, out);
        }
        Process::Repl(q) => {
            out.push('!');
            prefix(q, out);
        }
        Process::New(n, q) => {
            write!(out, "new({n}) ").unwrap();
            prefix(q, out);
        }
        Process::Out(ts, q) => {
            out.push('<');
            terms(ts, out);
            out.push_str(">.");
            prefix(q, out);
        }
        Process::In {
            pattern,
            bind,
            cont,
        } => {
            out.push('(');
            binders(pattern, bind, out);
            out.push_str(").");
            prefix(cont, out);
        }
        Process::Decrypt {
            subject,
            pattern,
            bind,
            key,
            ann,
            cont,
        } => {
            out.push_str("decrypt ");
            term(subject, out);
            out.push_str(" as {");
            binders(pattern, bind, out);
            out.push_str("}:");
            if matches!(key, Term::Enc { .. }) {
                out.push('(');
                term(key, out);
                out.push(')');
            } else {
                term(key, out);
            }
            if let Some(a) = ann {
                annotation(a, "orig", out);
            }
            out.push_str(" in ");
            prefix(cont, out);
        }
    }
}
