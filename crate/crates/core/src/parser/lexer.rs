use super::{ParseError, ParseErrorKind, Pos};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    Int(u32),
    Sym(char),
    Eof,
}

impl Tok {
    pub fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Int(n) => format!("`{n}`"),
            Tok::Sym(c) => format!("`{c}`"),
            Tok::Eof => "end of input".to_string(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Token {
    pub tok: Tok,
    pub pos: Pos,
}

const SYMBOLS: &str = "<>(){}[],;:.|!*+=";

pub fn tokenize(text: &str) -> Result<Vec<Token>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);

    macro_rules! bump {
        () => {{
            if chars[i] == '\n' {
                line += 1;
                col = 1;
            } else {
                col += 1;
            }
            i += 1;
        }};
    }

    while i < chars.len() {
        let c = chars[i];
        let pos = Pos { line, col };
        if c.is_whitespace() {
            bump!();
        } else if c == '/' && chars.get(i + 1) == Some(&'*') {
            bump!();
            bump!();
            loop {
                if i >= chars.len() {
                    return Err(ParseError::new(
                        ParseErrorKind::Syntax {
                            expected: vec!["`*/`".into()],
                            found: "end of input".into(),
                        },
                        pos,
                    ));
                }
                if chars[i] == '*' && chars.get(i + 1) == Some(&'/') {
                    bump!();
                    bump!();
                    break;
                }
                bump!();
            }
        } else if c == '/' && chars.get(i + 1) == Some(&'/') {
            while i < chars.len() && chars[i] != '\n' {
                bump!();
            }
        } else if c.is_ascii_alphabetic() || c == '_' {
            let mut s = String::new();
            while i < chars.len()
                && (chars[i].is_ascii_alphanumeric() || chars[i] == '_' || chars[i] == '\'')
            {
                s.push(chars[i]);
                bump!();
            }
            out.push(Token {
                tok: Tok::Ident(s),
                pos,
            });
        } else if c.is_ascii_digit() {
            let mut s = String::new();
            while i < chars.len() && chars[i].is_ascii_digit() {
                s.push(chars[i]);
                bump!();
            }
            let n = s.parse::<u32>().map_err(|_| {
                ParseError::new(
                    ParseErrorKind::Syntax {
                        expected: vec!["an index below 2^32".into()],
                        found: s.clone(),
                    },
                    pos,
                )
            })?;
            out.push(Token {
                tok: Tok::Int(n),
                pos,
            });
        } else if SYMBOLS.contains(c) {
            out.push(Token {
                tok: Tok::Sym(c),
                pos,
            });
            bump!();
        } else if c == '•' {
            // `l•` is accepted as a spelling of `l*`
            out.push(Token {
                tok: Tok::Sym('*'),
                pos,
            });
            bump!();
        } else {
            return Err(ParseError::new(
                ParseErrorKind::Syntax {
                    expected: vec!["a token".into()],
                    found: format!("`{c}`"),
                },
                pos,
            ));
        }
    }
    out.push(Token {
        tok: Tok::Eof,
        pos: Pos { line, col },
    });
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn skips_comments() {
        let toks = tokenize("/* a */ 0 // tail\n").unwrap();
        assert_eq!(toks.len(), 2);
        assert_eq!(toks[0].tok, Tok::Int(0));
    }

    #[test]
    fn identifiers_may_carry_primes() {
        let toks = tokenize("x'2").unwrap();
        assert_eq!(toks[0].tok, Tok::Ident("x'2".into()));
    }

    #[test]
    fn unterminated_comment_is_an_error() {
        assert!(tokenize("/* open").is_err());
    }
}
