//! Content-word glossaries: one `"<phrase>" := <boolean-expr>` per line.

use crate::model::ast::{Expr, Pos};

use super::{offset_pos, parse_expr, ParseError};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GlossaryEntry {
    /// Normalized phrase.
    pub phrase: String,
    pub expr: Expr,
    pub pos: Pos,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Glossary {
    pub entries: Vec<GlossaryEntry>,
}

impl Glossary {
    pub fn lookup(&self, phrase: &str) -> Option<&GlossaryEntry> {
        let key = normalize_phrase(phrase);
        self.entries.iter().find(|e| e.phrase == key)
    }
}

/// Lowercase and collapse runs of whitespace to one space.
pub fn normalize_phrase(s: &str) -> String {
    s.split_whitespace()
        .map(str::to_lowercase)
        .collect::<Vec<_>>()
        .join(" ")
}

pub fn parse_glossary(text: &str) -> Result<Glossary, ParseError> {
    let mut g = Glossary::default();
    for (ln, line) in text.lines().enumerate() {
        let ln = ln as u32 + 1;
        let trimmed = line.trim_start();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let indent = (line.len() - trimmed.len()) as u32;
        let pos = Pos::new(ln, indent + 1);
        let syntax = |col: u32, expected: &str, found: &str| ParseError::Syntax {
            pos: Pos::new(ln, col),
            expected: vec![expected.to_string()],
            found: found.to_string(),
        };
        let Some(body) = trimmed.strip_prefix('"') else {
            return Err(syntax(pos.col, "`\"`", "start of line"));
        };
        let Some(close) = body.find('"') else {
            return Err(syntax(pos.col, "closing `\"`", "end of line"));
        };
        let phrase = normalize_phrase(&body[..close]);
        if phrase.is_empty() {
            return Err(syntax(pos.col + 1, "phrase", "`\"`"));
        }
        let after = &body[close + 1..];
        let rest = after.trim_start();
        let assign_col = pos.col + 2 + close as u32 + (after.len() - rest.len()) as u32;
        let Some(expr_src) = rest.strip_prefix(":=") else {
            return Err(syntax(assign_col, "`:=`", rest.split_whitespace().next().unwrap_or("end of line")));
        };
        let expr_col = assign_col + 2;
        let expr = parse_expr(expr_src).map_err(|e| match e {
            ParseError::Syntax {
                pos,
                expected,
                found,
            } => ParseError::Syntax {
                pos: offset_pos(pos, ln, expr_col),
                expected,
                found,
            },
            other => other,
        })?;
        if g.entries.iter().any(|e| e.phrase == phrase) {
            return Err(ParseError::DuplicateDefinition { name: phrase, pos });
        }
        g.entries.push(GlossaryEntry { phrase, expr, pos });
    }
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ast::ExprKind;

    #[test]
    fn entries_and_lookup() {
        let g = parse_glossary(
            "# cruise control\n\"System is  on\" := @Controller.On\n\"x\" := a? and a = 3\n",
        )
        .unwrap();
        assert_eq!(g.entries.len(), 2);
        let e = g.lookup("system IS on").unwrap();
        assert_eq!(e.expr.kind, ExprKind::StateRef(vec!["Controller".into(), "On".into()]));
        assert!(g.lookup("system").is_none());
    }

    #[test]
    fn errors_have_positions() {
        let e = parse_glossary("\"a\" := 1 +\n").unwrap_err();
        let ParseError::Syntax { pos, .. } = e else {
            panic!()
        };
        assert_eq!((pos.line, pos.col), (1, 11));
        assert!(matches!(
            parse_glossary("\"a\" := x\n\"A\" := y"),
            Err(ParseError::DuplicateDefinition { .. })
        ));
        assert!(parse_glossary("a := x").is_err());
    }
}
