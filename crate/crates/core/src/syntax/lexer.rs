use std::fmt;

use crate::model::ast::Pos;

use super::ParseError;

pub const KEYWORDS: &[&str] = &[
    "model", "type", "enum", "variant", "record", "func", "component", "in", "out", "init",
    "causality", "weak", "strong", "automaton", "states", "var", "transition", "when", "with",
    "then", "table", "row", "sub", "channel", "delegate", "if", "else", "match", "true", "false",
    "and", "or", "not", "div", "mod", "Int", "Bool",
];

/// Multi-character symbols first so that the longest match wins.
const SYMBOLS: &[&str] = &[
    ":=", "!=", "<=", ">=", "->", "=>", "..", "{", "}", "(", ")", "[", "]", ",", ":", "=", "<",
    ">", "+", "-", "*", "?", "@", ".",
];

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    Kw(&'static str),
    Int(i64),
    Sym(&'static str),
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "identifier `{s}`"),
            Tok::Kw(k) => write!(f, "`{k}`"),
            Tok::Int(i) => write!(f, "integer {i}"),
            Tok::Sym(s) => write!(f, "`{s}`"),
            Tok::Eof => f.write_str("end of input"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Token {
    pub tok: Tok,
    pub pos: Pos,
}

pub fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_'
}

pub fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_'
}

/// Split model source into tokens. `#` starts a comment running to the end
/// of the line.
pub fn tokenize(src: &str) -> Result<Vec<Token>, ParseError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1u32, 1u32);
    while i < chars.len() {
        let c = chars[i];
        let pos = Pos::new(line, col);
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c == '#' {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        if is_ident_start(c) {
            let start = i;
            while i < chars.len() && is_ident_char(chars[i]) {
                i += 1;
            }
            let word: String = chars[start..i].iter().collect();
            col += (i - start) as u32;
            if word.contains("__") {
                return Err(ParseError::Syntax {
                    pos,
                    expected: vec!["identifier without `__`".into()],
                    found: format!("identifier `{word}`"),
                });
            }
            let tok = match KEYWORDS.iter().find(|k| **k == word) {
                Some(k) => Tok::Kw(k),
                None => Tok::Ident(word),
            };
            out.push(Token { tok, pos });
            continue;
        }
        if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let digits: String = chars[start..i].iter().collect();
            col += (i - start) as u32;
            let v = digits.parse::<i64>().map_err(|_| ParseError::Syntax {
                pos,
                expected: vec!["integer literal".into()],
                found: digits.clone(),
            })?;
            out.push(Token { tok: Tok::Int(v), pos });
            continue;
        }
        let rest: String = chars[i..chars.len().min(i + 2)].iter().collect();
        match SYMBOLS.iter().find(|s| rest.starts_with(**s)) {
            Some(s) => {
                i += s.len();
                col += s.len() as u32;
                out.push(Token { tok: Tok::Sym(s), pos });
            }
            None => {
                return Err(ParseError::Syntax {
                    pos,
                    expected: vec!["token".into()],
                    found: format!("character `{c}`"),
                })
            }
        }
    }
    out.push(Token {
        tok: Tok::Eof,
        pos: Pos::new(line, col),
    });
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tokens_and_positions() {
        let toks = tokenize("model M { # c\n  x := -3 }").unwrap();
        let kinds: Vec<Tok> = toks.iter().map(|t| t.tok.clone()).collect();
        assert_eq!(
            kinds,
            vec![
                Tok::Kw("model"),
                Tok::Ident("M".into()),
                Tok::Sym("{"),
                Tok::Ident("x".into()),
                Tok::Sym(":="),
                Tok::Sym("-"),
                Tok::Int(3),
                Tok::Sym("}"),
                Tok::Eof
            ]
        );
        assert_eq!((toks[3].pos.line, toks[3].pos.col), (2, 3));
    }

    #[test]
    fn reserved_separator_rejected() {
        assert!(tokenize("a__b").is_err());
    }
}
