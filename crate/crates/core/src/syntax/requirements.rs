//! Structured requirements:
//! `REQ <id> WHILE <phrase> IF <phrase> THEN [NEXT] <phrase> [ELSE [NEXT] <phrase>]`.
//!
//! A block may span several lines and ends where the next `REQ` starts.
//! Lines starting with `#` are comments.

use crate::model::ast::Pos;

use super::ParseError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Timing {
    SameTick,
    NextTick,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Requirement {
    pub id: String,
    pub while_cond: String,
    pub if_cond: String,
    pub then_resp: String,
    pub timing: Timing,
    pub else_resp: Option<String>,
    pub else_timing: Timing,
    pub pos: Pos,
}

const CLAUSES: [&str; 4] = ["WHILE", "IF", "THEN", "ELSE"];

struct Word<'a> {
    text: &'a str,
    pos: Pos,
}

fn words(text: &str) -> Vec<Word<'_>> {
    let mut out = Vec::new();
    for (ln, line) in text.lines().enumerate() {
        if line.trim_start().starts_with('#') {
            continue;
        }
        let mut rest = line;
        let mut offset = 0;
        while let Some(start) = rest.find(|c: char| !c.is_whitespace()) {
            let tail = &rest[start..];
            let len = tail.find(char::is_whitespace).unwrap_or(tail.len());
            let col = line[..offset + start].chars().count() as u32 + 1;
            out.push(Word {
                text: &tail[..len],
                pos: Pos::new(ln as u32 + 1, col),
            });
            offset += start + len;
            rest = &tail[len..];
        }
    }
    out
}

pub fn parse_requirements(text: &str) -> Result<Vec<Requirement>, ParseError> {
    let ws = words(text);
    let mut reqs: Vec<Requirement> = Vec::new();
    let mut i = 0;
    let end_pos = ws.last().map(|w| w.pos).unwrap_or(Pos::new(1, 1));
    while i < ws.len() {
        let pos = ws[i].pos;
        if ws[i].text != "REQ" {
            return Err(ParseError::Syntax {
                pos,
                expected: vec!["`REQ`".into()],
                found: format!("`{}`", ws[i].text),
            });
        }
        i += 1;
        let id = match ws.get(i) {
            Some(w) if !CLAUSES.contains(&w.text) && w.text != "REQ" && w.text != "NEXT" => {
                w.text.to_string()
            }
            other => {
                return Err(ParseError::Syntax {
                    pos: other.map(|w| w.pos).unwrap_or(end_pos),
                    expected: vec!["requirement id".into()],
                    found: other.map(|w| format!("`{}`", w.text)).unwrap_or("end of input".into()),
                })
            }
        };
        if reqs.iter().any(|r| r.id == id) {
            return Err(ParseError::DuplicateDefinition {
                name: id,
                pos: ws[i].pos,
            });
        }
        i += 1;
        let start = i;
        while i < ws.len() && ws[i].text != "REQ" {
            i += 1;
        }
        reqs.push(block(id, pos, &ws[start..i])?);
    }
    Ok(reqs)
}

fn block(id: String, pos: Pos, ws: &[Word<'_>]) -> Result<Requirement, ParseError> {
    // clause index -> (timing, phrase words)
    let mut clauses: [Option<(Timing, Vec<&str>)>; 4] = Default::default();
    let mut current: Option<usize> = None;
    for (k, w) in ws.iter().enumerate() {
        if let Some(c) = CLAUSES.iter().position(|c| *c == w.text) {
            if current.is_some_and(|cur| c <= cur) || clauses[c].is_some() {
                return Err(ParseError::Syntax {
                    pos: w.pos,
                    expected: vec!["clauses in WHILE, IF, THEN, ELSE order".into()],
                    found: format!("`{}`", w.text),
                });
            }
            if let Some(cur) = current {
                check_nonempty(&clauses[cur], ws, k)?;
            }
            clauses[c] = Some((Timing::SameTick, Vec::new()));
            current = Some(c);
            continue;
        }
        let Some(cur) = current else {
            return Err(ParseError::Syntax {
                pos: w.pos,
                expected: vec!["`WHILE`".into()],
                found: format!("`{}`", w.text),
            });
        };
        let (timing, phrase) = clauses[cur].as_mut().expect("current clause exists");
        if w.text == "NEXT" {
            if cur < 2 || !phrase.is_empty() || *timing == Timing::NextTick {
                return Err(ParseError::Syntax {
                    pos: w.pos,
                    expected: vec!["phrase".into()],
                    found: "`NEXT`".into(),
                });
            }
            *timing = Timing::NextTick;
        } else {
            phrase.push(w.text);
        }
    }
    if let Some(cur) = current {
        check_nonempty(&clauses[cur], ws, ws.len())?;
    }
    let [w, i, t, e] = clauses;
    let missing = |clause| ParseError::MissingClause {
        req: id.clone(),
        clause,
        pos,
    };
    let w = w.ok_or_else(|| missing("WHILE"))?;
    let i = i.ok_or_else(|| missing("IF"))?;
    let t = t.ok_or_else(|| missing("THEN"))?;
    Ok(Requirement {
        id: id.clone(),
        while_cond: w.1.join(" "),
        if_cond: i.1.join(" "),
        then_resp: t.1.join(" "),
        timing: t.0,
        else_timing: e.as_ref().map(|e| e.0).unwrap_or(Timing::SameTick),
        else_resp: e.map(|e| e.1.join(" ")),
        pos,
    })
}

fn check_nonempty(
    clause: &Option<(Timing, Vec<&str>)>,
    ws: &[Word<'_>],
    next: usize,
) -> Result<(), ParseError> {
    if clause.as_ref().is_some_and(|c| c.1.is_empty()) {
        let (pos, found) = match ws.get(next) {
            Some(w) => (w.pos, format!("`{}`", w.text)),
            None => (ws.last().map(|w| w.pos).unwrap_or_default(), "end of block".into()),
        };
        return Err(ParseError::Syntax {
            pos,
            expected: vec!["phrase".into()],
            found,
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sample_property() {
        let r = parse_requirements(
            "REQ r1 WHILE system is on IF accelerate button pressed AND no switch-off constraint THEN NEXT vehicle accelerates",
        )
        .unwrap();
        assert_eq!(r.len(), 1);
        assert_eq!(r[0].id, "r1");
        assert_eq!(r[0].timing, Timing::NextTick);
        assert_eq!(r[0].while_cond, "system is on");
        assert_eq!(
            r[0].if_cond,
            "accelerate button pressed AND no switch-off constraint"
        );
        assert_eq!(r[0].then_resp, "vehicle accelerates");
        assert_eq!(r[0].else_resp, None);
    }

    #[test]
    fn missing_then() {
        let e = parse_requirements("REQ r9 WHILE a IF b").unwrap_err();
        assert!(matches!(e, ParseError::MissingClause { clause: "THEN", .. }));
    }

    #[test]
    fn else_branch_and_multiline() {
        let r = parse_requirements(
            "# comment\nREQ a WHILE x\n  IF y THEN z ELSE NEXT w\nREQ b WHILE x IF y THEN z\n",
        )
        .unwrap();
        assert_eq!(r.len(), 2);
        assert_eq!(r[0].else_resp.as_deref(), Some("w"));
        assert_eq!(r[0].else_timing, Timing::NextTick);
        assert_eq!(r[0].timing, Timing::SameTick);
        assert_eq!((r[1].pos.line, r[1].pos.col), (4, 1));
    }

    #[test]
    fn empty_phrase_and_order() {
        assert!(parse_requirements("REQ a WHILE IF y THEN z").is_err());
        assert!(parse_requirements("REQ a IF y WHILE x THEN z").is_err());
        assert!(parse_requirements("REQ a WHILE x IF y THEN z REQ a WHILE x IF y THEN z").is_err());
    }
}
