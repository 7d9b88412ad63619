//! Text formats: models (`.syn`), requirements (`.req`), glossaries
//! (`.gls`) and stimulus/trace files.

pub mod glossary;
pub mod lexer;
mod parser;
pub mod pretty;
pub mod requirements;
pub mod stimulus;

use crate::model::ast::{Expr, Model, Pos};

pub use glossary::{normalize_phrase, parse_glossary, Glossary, GlossaryEntry};
pub use pretty::{pretty_expr, pretty_model};
pub use requirements::{parse_requirements, Requirement, Timing};
pub use stimulus::{parse_stimulus, render_row, Stimulus, StimulusError};

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum ParseError {
    #[error("{pos}: syntax error: expected {}, found {found}", .expected.join(" or "))]
    Syntax {
        pos: Pos,
        expected: Vec<String>,
        found: String,
    },
    #[error("{pos}: `{name}` is defined more than once")]
    DuplicateDefinition { name: String, pos: Pos },
    #[error("{pos}: requirement `{req}` has no {clause} clause")]
    MissingClause {
        req: String,
        clause: &'static str,
        pos: Pos,
    },
}

impl ParseError {
    pub fn pos(&self) -> Pos {
        match self {
            ParseError::Syntax { pos, .. }
            | ParseError::DuplicateDefinition { pos, .. }
            | ParseError::MissingClause { pos, .. } => *pos,
        }
    }

    pub fn code(&self) -> &'static str {
        match self {
            ParseError::Syntax { .. } => "SyntaxError",
            ParseError::DuplicateDefinition { .. } => "DuplicateDefinition",
            ParseError::MissingClause { .. } => "MissingClause",
        }
    }
}

/// Parse a `.syn` model. Name resolution is left to the static checks.
pub fn parse_model(text: &str) -> Result<Model, Vec<ParseError>> {
    parser::Parser::new(text).map_err(|e| vec![e])?.model()
}

/// Parse a standalone expression, as used in glossary entries.
pub fn parse_expr(text: &str) -> Result<Expr, ParseError> {
    let mut p = parser::Parser::new(text)?;
    let e = p.expr()?;
    p.expect_eof()?;
    Ok(e)
}

/// Shift a position found inside a fragment to its place in the file.
pub(crate) fn offset_pos(p: Pos, line: u32, col: u32) -> Pos {
    if p.line == 1 {
        Pos::new(line, col + p.col - 1)
    } else {
        Pos::new(line + p.line - 1, p.col)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ast::{BehaviorDef, Causality};

    const MINIMAL: &str = "model M { component Root { in a: Bool init false out b: Bool init false causality strong automaton { states S init } } }";

    #[test]
    fn minimal_model() {
        let m = parse_model(MINIMAL).unwrap();
        assert_eq!(m.components.len(), 1);
        let c = &m.components[0];
        assert_eq!(c.causality, Causality::Strong);
        match &c.behavior {
            BehaviorDef::Automaton(a) => assert!(a.transitions.is_empty()),
            _ => panic!("expected automaton"),
        }
    }

    #[test]
    fn misspelled_keyword_is_located() {
        let src = MINIMAL.replace("causality strong", "causality strongg");
        let errs = parse_model(&src).unwrap_err();
        let col = src.find("strongg").unwrap() as u32 + 1;
        match &errs[0] {
            ParseError::Syntax { pos, found, .. } => {
                assert_eq!((pos.line, pos.col), (1, col));
                assert!(found.contains("strongg"));
            }
            e => panic!("unexpected {e:?}"),
        }
    }

    #[test]
    fn duplicates_reported() {
        let src = "model M { type T = Bool type T = Bool component C { causality weak table { } } }";
        let errs = parse_model(src).unwrap_err();
        assert!(matches!(&errs[0], ParseError::DuplicateDefinition { name, .. } if name == "T"));
    }

    #[test]
    fn expression_precedence() {
        let e = parse_expr("a + b * c = d and not e or f").unwrap();
        let shown = pretty::pretty_expr(&e);
        assert_eq!(shown, "a + b * c = d and not e or f");
        let e = parse_expr("(a + b) * c").unwrap();
        assert_eq!(pretty::pretty_expr(&e), "(a + b) * c");
    }
}
