//! Static analysis: type checking, hierarchy checks, causality and
//! determinism warnings, and lowering to an executable [`Program`].

mod bind;
mod determinism;
mod graph;
mod lower;
mod network;
mod report;
mod typeck;

use thiserror::Error;

use crate::model::ast::{BehaviorDef, Model};
use crate::model::ir::{Component, Program};
use crate::syntax::{parse_model, ParseError};

pub use bind::{
    bind_glossary, Atom, AtomVar, BindError, Bindings, BoundRequirement, Prop, PropDisplay, RootPort, TickView,
};
pub use determinism::overlapping_transitions;
pub use network::{instantaneous_dependencies, instantaneous_edges, schedule};
pub use report::{Category, CheckReport, Finding, Severity};

use lower::Lowerer;
use network::{causality_findings, composite_findings, flatten};

/// Outcome of [`check_model`]: the findings, and the lowered program when
/// there is no error.
#[derive(Clone, Debug)]
pub struct Checked {
    pub report: CheckReport,
    pub program: Option<Program>,
}

fn analyze(model: &Model) -> Checked {
    let (mut report, low) = Lowerer::new(model).run();
    for (ci, comp) in low.components.iter().enumerate() {
        let Some(comp) = comp else { continue };
        let Some(a) = comp.automaton() else { continue };
        let def = &model.components[ci];
        let positions: Vec<_> = match &def.behavior {
            BehaviorDef::Automaton(a) => a.transitions.iter().map(|t| t.pos).collect(),
            BehaviorDef::Table(t) => t.rows.iter().map(|r| r.pos).collect(),
            BehaviorDef::Composite(_) => continue,
        };
        let what = if matches!(def.behavior, BehaviorDef::Table(_)) { "rows" } else { "transitions" };
        for (i, j) in overlapping_transitions(&low.env.types, &low.funcs, a, &comp.inputs) {
            report.findings.push(Finding {
                severity: Severity::Warning,
                code: "PossibleNondeterminism",
                path: comp.name.clone(),
                pos: positions[j],
                message: format!(
                    "{what} at lines {} and {} may both be enabled; the first listed one is taken by default",
                    positions[i].line, positions[j].line
                ),
                category: Category::Determinism,
            });
        }
    }
    if !report.passes() {
        return Checked { report, program: None };
    }
    let Some(root) = low.root else {
        return Checked { report, program: None };
    };
    let Some(components) = low.components.into_iter().collect::<Option<Vec<Component>>>() else {
        return Checked { report, program: None };
    };
    let flat = flatten(model, &components, root);
    report.findings.extend(causality_findings(&components, &flat));
    let program = Program {
        name: model.name.clone(),
        types: low.env.types,
        funcs: low.funcs,
        components,
        root,
        network: flat.network,
    };
    let order = program.components_bottom_up();
    report.findings.extend(composite_findings(model, &program.components, &order));
    if !report.passes() {
        return Checked { report, program: None };
    }
    Checked {
        report,
        program: Some(program),
    }
}

/// Run every check and lower the model.
pub fn check_model(model: &Model) -> Checked {
    analyze(model)
}

/// Expressions, patterns, initial values, channel types and match
/// exhaustiveness.
pub fn check_types(model: &Model) -> CheckReport {
    analyze(model).report.only(Category::Types)
}

/// Recursive types, functions and component instantiation.
pub fn check_nonrecursive(model: &Model) -> CheckReport {
    analyze(model).report.only(Category::Recursion)
}

/// Unknown instances and ports, invalid links, multiple drivers,
/// unconnected ports and the root component.
pub fn check_connectivity(model: &Model) -> CheckReport {
    analyze(model).report.only(Category::Connectivity)
}

/// Feedback loops through weakly causal components only.
pub fn check_causality(model: &Model) -> CheckReport {
    analyze(model).report.only(Category::Causality)
}

/// Declared causality of composites against their computed dependencies.
pub fn check_composite_causality(model: &Model) -> CheckReport {
    analyze(model).report.only(Category::CompositeCausality)
}

#[derive(Debug, Error)]
pub enum LoadError {
    #[error("{0}")]
    Parse(ParseErrors),
    #[error("model has errors:\n{}", .0.render())]
    Check(CheckReport),
}

#[derive(Debug)]
pub struct ParseErrors(pub Vec<ParseError>);

impl std::fmt::Display for ParseErrors {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{e}")?;
        }
        Ok(())
    }
}

/// Parse and check model text, failing on any syntax or check error.
pub fn load_model(text: &str) -> Result<Program, LoadError> {
    let model = parse_model(text).map_err(|e| LoadError::Parse(ParseErrors(e)))?;
    let checked = check_model(&model);
    checked.program.ok_or(LoadError::Check(checked.report))
}

#[cfg(test)]
mod tests {
    use super::*;

    const CRUISE: &str = include_str!("../../../../corpus/cruise.syn");

    #[test]
    fn corpus_is_clean() {
        let m = parse_model(CRUISE).unwrap();
        let c = check_model(&m);
        assert_eq!(c.report.render(), "");
        let p = c.program.unwrap();
        assert_eq!(p.network.instances.len(), 6);
    }
}
