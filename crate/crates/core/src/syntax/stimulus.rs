//! Stimulus and trace lines: `<tick>;<port>=<value-or-dash>;...`.

use crate::model::ir::{Port, Program};
use crate::model::value::{value_from_lit, Message};
use crate::model::TypeTable;

use super::parser::Parser;

/// Per-tick messages for the root input ports, in port order.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Stimulus {
    pub rows: Vec<Vec<Message>>,
}

impl Stimulus {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn render(&self, program: &Program) -> String {
        let ports = &program.root().inputs;
        let mut out = String::new();
        for (t, row) in self.rows.iter().enumerate() {
            out.push_str(&render_row(t, &program.types, ports.iter().zip(row)));
            out.push('\n');
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum StimulusError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: unknown port `{port}`")]
    UnknownPort { line: usize, port: String },
    #[error("line {line}: port `{port}` given more than once")]
    DuplicatePort { line: usize, port: String },
    #[error("line {line}: no value for port `{port}`")]
    MissingPort { line: usize, port: String },
    #[error("line {line}: port `{port}`: {message}")]
    TypeMismatch {
        line: usize,
        port: String,
        message: String,
    },
    #[error("line {line}: expected tick {expected}, found {found}")]
    NonContiguousTicks {
        line: usize,
        expected: usize,
        found: usize,
    },
}

/// Render one line without the terminating newline.
pub fn render_row<'a>(
    tick: usize,
    types: &TypeTable,
    cells: impl IntoIterator<Item = (&'a Port, &'a Message)>,
) -> String {
    let mut s = tick.to_string();
    for (p, m) in cells {
        s.push(';');
        s.push_str(&p.name);
        s.push('=');
        s.push_str(&m.display(types).to_string());
    }
    s
}

pub fn parse_stimulus(text: &str, program: &Program) -> Result<Stimulus, StimulusError> {
    let ports = &program.root().inputs;
    let mut rows = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        if raw.trim().is_empty() {
            continue;
        }
        let mut parts = raw.split(';');
        let tick_text = parts.next().unwrap_or("");
        let tick: usize = tick_text.parse().map_err(|_| StimulusError::Syntax {
            line,
            message: format!("`{tick_text}` is not a tick number"),
        })?;
        if tick != rows.len() {
            return Err(StimulusError::NonContiguousTicks {
                line,
                expected: rows.len(),
                found: tick,
            });
        }
        let mut row: Vec<Option<Message>> = vec![None; ports.len()];
        for cell in parts {
            let (name, value) = cell.split_once('=').ok_or_else(|| StimulusError::Syntax {
                line,
                message: format!("`{cell}` is not of the form port=value"),
            })?;
            let i = ports
                .iter()
                .position(|p| p.name == name)
                .ok_or_else(|| StimulusError::UnknownPort {
                    line,
                    port: name.to_string(),
                })?;
            if row[i].is_some() {
                return Err(StimulusError::DuplicatePort {
                    line,
                    port: name.to_string(),
                });
            }
            row[i] = Some(parse_message(value, &ports[i], &program.types).map_err(|message| {
                StimulusError::TypeMismatch {
                    line,
                    port: name.to_string(),
                    message,
                }
            })?);
        }
        let row = row
            .into_iter()
            .zip(ports)
            .map(|(m, p)| {
                m.ok_or_else(|| StimulusError::MissingPort {
                    line,
                    port: p.name.clone(),
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        rows.push(row);
    }
    Ok(Stimulus { rows })
}

fn parse_message(text: &str, port: &Port, types: &TypeTable) -> Result<Message, String> {
    if text == "-" {
        return Ok(Message::Absent);
    }
    let mut p = Parser::new(text).map_err(|e| e.to_string())?;
    let lit = p.value_lit().map_err(|e| e.to_string())?;
    p.expect_eof().map_err(|e| e.to_string())?;
    value_from_lit(types, &lit, port.ty)
        .map(Message::Present)
        .map_err(|e| e.to_string())
}
