use std::collections::{BTreeMap, BTreeSet};

use super::lexer::{tokenize, Tok, Token};
use super::{
    IndexExpr, ParseError, ParseErrorKind, Pos, SetExpr, SourceModel, TAnnotation, TIdent, TPoint,
    TPointSet, TProcess, TTerm, Warning,
};

const PROCESS_KEYWORDS: [&str; 3] = ["new", "decrypt", "par"];

struct Parser {
    toks: Vec<Token>,
    at: usize,
    declared: BTreeMap<(String, usize), Pos>,
    referenced: Vec<TIdent>,
    warnings: Vec<Warning>,
}

type PResult<T> = Result<T, ParseError>;

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].tok
    }

    fn peek2(&self) -> &Tok {
        &self.toks[(self.at + 1).min(self.toks.len() - 1)].tok
    }

    fn pos(&self) -> Pos {
        self.toks[self.at].pos
    }

    fn advance(&mut self) -> Token {
        let t = self.toks[self.at].clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn fail<T>(&self, expected: &[&str]) -> PResult<T> {
        Err(ParseError::new(
            ParseErrorKind::Syntax {
                expected: expected.iter().map(|s| s.to_string()).collect(),
                found: self.peek().describe(),
            },
            self.pos(),
        ))
    }

    fn is_sym(&self, c: char) -> bool {
        *self.peek() == Tok::Sym(c)
    }

    fn is_kw(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    fn eat_sym(&mut self, c: char) -> bool {
        if self.is_sym(c) {
            self.advance();
            true
        } else {
            false
        }
    }

    fn expect_sym(&mut self, c: char) -> PResult<()> {
        if self.eat_sym(c) {
            Ok(())
        } else {
            self.fail(&[&format!("`{c}`")])
        }
    }

    fn expect_kw(&mut self, kw: &str) -> PResult<()> {
        if self.is_kw(kw) {
            self.advance();
            Ok(())
        } else {
            self.fail(&[&format!("`{kw}`")])
        }
    }

    fn ident(&mut self) -> PResult<String> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.advance();
                Ok(s)
            }
            _ => self.fail(&["an identifier"]),
        }
    }

    fn model(&mut self) -> PResult<(Vec<(String, SetExpr)>, TProcess)> {
        let mut headers = Vec::new();
        while self.is_kw("let") {
            self.advance();
            let name = self.ident()?;
            self.expect_sym('=')?;
            let set = self.set_expr()?;
            headers.push((name, set));
        }
        let p = self.process()?;
        if *self.peek() != Tok::Eof {
            return self.fail(&["`|`", "end of input"]);
        }
        Ok((headers, p))
    }

    fn set_expr(&mut self) -> PResult<SetExpr> {
        let mut parts = vec![self.set_atom()?];
        while self.eat_sym('+') {
            parts.push(self.set_atom()?);
        }
        Ok(if parts.len() == 1 {
            parts.pop().unwrap()
        } else {
            SetExpr::Union(parts)
        })
    }

    fn set_atom(&mut self) -> PResult<SetExpr> {
        if self.eat_sym('{') {
            let mut set = BTreeSet::new();
            if !self.is_sym('}') {
                loop {
                    match *self.peek() {
                        Tok::Int(n) => {
                            self.advance();
                            set.insert(n);
                        }
                        _ => return self.fail(&["an integer"]),
                    }
                    if !self.eat_sym(',') {
                        break;
                    }
                }
            }
            self.expect_sym('}')?;
            Ok(SetExpr::Lit(set))
        } else {
            let pos = self.pos();
            let name = self.ident()?;
            Ok(SetExpr::Ref(name, pos))
        }
    }

    fn process(&mut self) -> PResult<TProcess> {
        let left = self.prefix()?;
        if self.eat_sym('|') {
            let right = self.process()?;
            Ok(TProcess::Par(Box::new(left), Box::new(right)))
        } else {
            Ok(left)
        }
    }

    fn index_binder(&mut self) -> PResult<(String, SetExpr)> {
        self.expect_sym('[')?;
        let var = self.ident()?;
        self.expect_kw("in")?;
        let set = self.set_expr()?;
        self.expect_sym(']')?;
        Ok((var, set))
    }

    fn prefix(&mut self) -> PResult<TProcess> {
        match self.peek().clone() {
            Tok::Int(0) => {
                self.advance();
                Ok(TProcess::Nil)
            }
            Tok::Sym('!') => {
                self.advance();
                Ok(TProcess::Repl(Box::new(self.prefix()?)))
            }
            Tok::Sym('<') => {
                self.advance();
                let terms = if self.is_sym('>') {
                    Vec::new()
                } else {
                    self.terms()?
                };
                self.expect_sym('>')?;
                self.expect_sym('.')?;
                Ok(TProcess::Out(terms, Box::new(self.prefix()?)))
            }
            Tok::Sym('(') => {
                let is_input = match self.peek2() {
                    Tok::Ident(s) => !PROCESS_KEYWORDS.contains(&s.as_str()),
                    Tok::Sym('{') | Tok::Sym(';') | Tok::Sym(')') => true,
                    _ => false,
                };
                self.advance();
                if is_input {
                    let (pattern, bind) = self.pattern_and_binders(')')?;
                    self.expect_sym(')')?;
                    self.expect_sym('.')?;
                    let cont = self.prefix()?;
                    Ok(TProcess::In {
                        pattern,
                        bind,
                        cont: Box::new(cont),
                    })
                } else {
                    let p = self.process()?;
                    self.expect_sym(')')?;
                    Ok(p)
                }
            }
            Tok::Ident(kw) if kw == "new" => {
                self.advance();
                if self.is_sym('[') {
                    let (var, set) = self.index_binder()?;
                    self.expect_sym('(')?;
                    let name = self.tident()?;
                    self.expect_sym(')')?;
                    self.eat_sym('.');
                    let body = self.prefix()?;
                    Ok(TProcess::NewIndexed {
                        var,
                        set,
                        name,
                        body: Box::new(body),
                    })
                } else {
                    self.expect_sym('(')?;
                    let name = self.tident()?;
                    self.expect_sym(')')?;
                    self.eat_sym('.');
                    Ok(TProcess::New(name, Box::new(self.prefix()?)))
                }
            }
            Tok::Ident(kw) if kw == "par" => {
                self.advance();
                let (var, set) = self.index_binder()?;
                let body = self.prefix()?;
                Ok(TProcess::ParIndexed {
                    var,
                    set,
                    body: Box::new(body),
                })
            }
            Tok::Ident(kw) if kw == "decrypt" => {
                self.advance();
                let subject = self.term()?;
                self.expect_kw("as")?;
                let brace = self.pos();
                self.expect_sym('{')?;
                let (pattern, bind) = self.pattern_and_binders('}')?;
                self.expect_sym('}')?;
                self.expect_sym(':')?;
                let key = self.key_term()?;
                let ann = self.annotation("orig")?;
                self.expect_kw("in")?;
                let cont = self.prefix()?;
                if let TTerm::Enc { payload, .. } = &subject {
                    let found = pattern.len() + bind.len();
                    if payload.len() != found {
                        return Err(ParseError::new(
                            ParseErrorKind::ArityMismatch {
                                expected: payload.len(),
                                found,
                            },
                            brace,
                        ));
                    }
                }
                Ok(TProcess::Decrypt {
                    subject,
                    pattern,
                    bind,
                    key,
                    ann,
                    cont: Box::new(cont),
                })
            }
            _ => self.fail(&[
                "`0`", "`!`", "`<`", "`(`", "`new`", "`par`", "`decrypt`",
            ]),
        }
    }

    fn pattern_and_binders(&mut self, close: char) -> PResult<(Vec<TTerm>, Vec<TIdent>)> {
        let pattern = if self.is_sym(';') || self.is_sym(close) {
            Vec::new()
        } else {
            self.terms()?
        };
        let mut bind: Vec<TIdent> = Vec::new();
        if self.eat_sym(';') && !self.is_sym(close) {
            loop {
                let b = self.tident()?;
                if bind
                    .iter()
                    .any(|o| o.base == b.base && o.indices == b.indices)
                {
                    return Err(ParseError::new(
                        ParseErrorKind::DuplicateBinder(b.base.clone()),
                        b.pos,
                    ));
                }
                bind.push(b);
                if !self.eat_sym(',') {
                    break;
                }
            }
        }
        Ok((pattern, bind))
    }

    fn terms(&mut self) -> PResult<Vec<TTerm>> {
        let mut out = vec![self.term()?];
        while self.eat_sym(',') {
            out.push(self.term()?);
        }
        Ok(out)
    }

    fn term(&mut self) -> PResult<TTerm> {
        if self.is_sym('{') {
            let pos = self.pos();
            self.advance();
            if self.is_sym('}') {
                return self.fail(&["a term (encrypted payloads are non-empty)"]);
            }
            let payload = self.terms()?;
            self.expect_sym('}')?;
            self.expect_sym(':')?;
            let key = self.key_term()?;
            let ann = self.annotation("dest")?;
            Ok(TTerm::Enc {
                payload,
                key: Box::new(key),
                ann,
                pos,
            })
        } else if matches!(self.peek(), Tok::Ident(_)) {
            Ok(TTerm::Ident(self.tident()?))
        } else {
            self.fail(&["a term"])
        }
    }

    fn key_term(&mut self) -> PResult<TTerm> {
        if self.eat_sym('(') {
            let t = self.term()?;
            self.expect_sym(')')?;
            Ok(t)
        } else {
            self.term()
        }
    }

    fn tident(&mut self) -> PResult<TIdent> {
        let pos = self.pos();
        let base = self.ident()?;
        let mut indices = Vec::new();
        if self.is_sym('[') && !matches!(self.peek2(), Tok::Ident(s) if s == "at") {
            self.advance();
            indices = self.index_list()?;
            self.expect_sym(']')?;
        }
        Ok(TIdent { base, indices, pos })
    }

    fn index_list(&mut self) -> PResult<Vec<IndexExpr>> {
        let mut out = Vec::new();
        loop {
            match self.peek().clone() {
                Tok::Int(n) => {
                    self.advance();
                    out.push(IndexExpr::Lit(n));
                }
                Tok::Ident(s) => {
                    self.advance();
                    out.push(IndexExpr::Var(s));
                }
                _ => return self.fail(&["an index"]),
            }
            if !self.eat_sym(',') {
                break;
            }
        }
        Ok(out)
    }

    fn annotation(&mut self, kind: &str) -> PResult<Option<TAnnotation>> {
        if !(self.is_sym('[') && matches!(self.peek2(), Tok::Ident(s) if s == "at")) {
            return Ok(None);
        }
        self.advance();
        self.advance();
        let at = self.point()?;
        let TPoint::Site(label) = &at else {
            return Err(ParseError::new(
                ParseErrorKind::Syntax {
                    expected: vec!["a site label".into()],
                    found: "`l*`".into(),
                },
                self.pos(),
            ));
        };
        self.declared
            .entry((label.base.clone(), label.indices.len()))
            .or_insert(label.pos);
        self.expect_kw(kind)?;
        let set_pos = self.pos();
        let points = if self.is_kw("C") {
            self.advance();
            TPointSet::All
        } else {
            self.expect_sym('{')?;
            let mut pts = Vec::new();
            if !self.is_sym('}') {
                loop {
                    let p = self.point()?;
                    if let TPoint::Site(id) = &p {
                        self.referenced.push(id.clone());
                    }
                    pts.push(p);
                    if !self.eat_sym(',') {
                        break;
                    }
                }
            }
            self.expect_sym('}')?;
            if pts.is_empty() {
                self.warnings.push(Warning {
                    pos: set_pos,
                    message: format!("empty {kind} set; every decryption here is a violation"),
                });
            }
            TPointSet::Only(pts)
        };
        self.expect_sym(']')?;
        Ok(Some(TAnnotation { at, points }))
    }

    fn point(&mut self) -> PResult<TPoint> {
        if self.is_kw("l") && *self.peek2() == Tok::Sym('*') {
            self.advance();
            self.advance();
            if self.eat_sym('[') {
                let idx = self.index_list()?;
                self.expect_sym(']')?;
                return Ok(TPoint::AttackerIf(idx));
            }
            return Ok(TPoint::Attacker);
        }
        Ok(TPoint::Site(self.tident()?))
    }
}

pub fn parse_model(text: &str) -> Result<SourceModel, ParseError> {
    let toks = tokenize(text)?;
    let mut p = Parser {
        toks,
        at: 0,
        declared: BTreeMap::new(),
        referenced: Vec::new(),
        warnings: Vec::new(),
    };
    let (index_sets, template) = p.model()?;
    for r in &p.referenced {
        if !p.declared.contains_key(&(r.base.clone(), r.indices.len())) {
            return Err(ParseError::new(
                ParseErrorKind::UnknownPoint(r.base.clone()),
                r.pos,
            ));
        }
    }
    Ok(SourceModel {
        text: text.to_string(),
        index_sets,
        template,
        point_table: p.declared,
        warnings: p.warnings,
    })
}
