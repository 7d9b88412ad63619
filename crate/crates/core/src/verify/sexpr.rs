//! Reader for SMT-LIB solver responses.

use std::fmt;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Sexpr {
    /// Symbol, numeral or keyword; quoted symbols lose their bars.
    Atom(String),
    Str(String),
    List(Vec<Sexpr>),
}

impl Sexpr {
    pub fn atom(&self) -> Option<&str> {
        match self {
            Sexpr::Atom(a) => Some(a),
            _ => None,
        }
    }

    pub fn list(&self) -> Option<&[Sexpr]> {
        match self {
            Sexpr::List(l) => Some(l),
            _ => None,
        }
    }
}

impl fmt::Display for Sexpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sexpr::Atom(a) => f.write_str(a),
            Sexpr::Str(s) => write!(f, "{s:?}"),
            Sexpr::List(l) => {
                f.write_str("(")?;
                for (i, x) in l.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" ")?;
                    }
                    write!(f, "{x}")?;
                }
                f.write_str(")")
            }
        }
    }
}

/// Parse every top-level expression of `text`.
pub fn parse_all(text: &str) -> Result<Vec<Sexpr>, String> {
    let chars: Vec<char> = text.chars().collect();
    let mut i = 0;
    let mut stack: Vec<Vec<Sexpr>> = vec![Vec::new()];
    while i < chars.len() {
        let c = chars[i];
        match c {
            ';' => {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                }
            }
            '(' => {
                stack.push(Vec::new());
                i += 1;
            }
            ')' => {
                if stack.len() == 1 {
                    return Err(format!("unbalanced `)` at offset {i}"));
                }
                let done = stack.pop().unwrap();
                stack.last_mut().unwrap().push(Sexpr::List(done));
                i += 1;
            }
            '|' => {
                let start = i + 1;
                i = start;
                while i < chars.len() && chars[i] != '|' {
                    i += 1;
                }
                if i == chars.len() {
                    return Err("unterminated quoted symbol".into());
                }
                stack.last_mut().unwrap().push(Sexpr::Atom(chars[start..i].iter().collect()));
                i += 1;
            }
            '"' => {
                let mut s = String::new();
                i += 1;
                loop {
                    match chars.get(i) {
                        None => return Err("unterminated string".into()),
                        // `""` is an escaped quote
                        Some('"') if chars.get(i + 1) == Some(&'"') => {
                            s.push('"');
                            i += 2;
                        }
                        Some('"') => {
                            i += 1;
                            break;
                        }
                        Some(ch) => {
                            s.push(*ch);
                            i += 1;
                        }
                    }
                }
                stack.last_mut().unwrap().push(Sexpr::Str(s));
            }
            c if c.is_whitespace() => i += 1,
            _ => {
                let start = i;
                while i < chars.len() && !chars[i].is_whitespace() && !"()|\";".contains(chars[i]) {
                    i += 1;
                }
                stack.last_mut().unwrap().push(Sexpr::Atom(chars[start..i].iter().collect()));
            }
        }
    }
    if stack.len() != 1 {
        return Err("unbalanced `(`".into());
    }
    Ok(stack.pop().unwrap())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reads_models() {
        let text = "sat\n(\n  (define-fun |in0_t1| () Msg.Int (present.Int (- 3)))\n  ; note\n  (define-fun s \"a\"\"b\")\n)";
        let xs = parse_all(text).unwrap();
        assert_eq!(xs[0], Sexpr::Atom("sat".into()));
        let defs = xs[1].list().unwrap();
        assert_eq!(defs.len(), 2);
        assert_eq!(defs[0].to_string(), "(define-fun in0_t1 () Msg.Int (present.Int (- 3)))");
        assert_eq!(defs[1].list().unwrap()[2], Sexpr::Str("a\"b".into()));
    }

    #[test]
    fn rejects_unbalanced() {
        assert!(parse_all("(a").is_err());
        assert!(parse_all("a)").is_err());
    }
}
