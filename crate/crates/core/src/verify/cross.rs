//! Running both engines on the same formulas and comparing their verdicts.

use std::fmt::Write as _;

use crate::model::ir::Program;

use super::explicit::{bmc_explicit_with, DEFAULT_CONFIG_CAP};
use super::formula::TemporalFormula;
use super::smt::{bmc_smt, SmtEngine, SmtScript};
use super::Verdict;

#[derive(Clone, Debug)]
pub struct CrossRow {
    pub id: String,
    pub explicit: Verdict,
    pub smt: Verdict,
    pub agree: bool,
    /// Conjuncts whose antecedent never held in the explored space, when
    /// the explicit engine explored it completely.
    pub vacuous: Vec<usize>,
    pub script: SmtScript,
}

impl CrossRow {
    pub fn warnings(&self) -> Vec<String> {
        self.vacuous
            .iter()
            .map(|c| format!("warning: {}: Vacuity: antecedent of conjunct {} is never satisfied", self.id, c + 1))
            .collect()
    }
}

pub fn cross_check(program: &Program, formulas: &[TemporalFormula], bound: usize, engine: &SmtEngine) -> Vec<CrossRow> {
    formulas
        .iter()
        .map(|f| {
            let ex = bmc_explicit_with(program, f, bound, DEFAULT_CONFIG_CAP);
            let (script, smt) = bmc_smt(program, f, bound, engine);
            let vacuous = if ex.verdict.holds() {
                (0..f.conjuncts.len()).filter(|c| !ex.antecedent_seen[*c]).collect()
            } else {
                Vec::new()
            };
            CrossRow {
                id: f.id.clone(),
                agree: ex.verdict.agrees_with(&smt),
                explicit: ex.verdict,
                smt,
                vacuous,
                script,
            }
        })
        .collect()
}

/// `id<TAB>explicit<TAB>smt<TAB>AGREE|DISAGREE`, one line per row.
pub fn render_report(rows: &[CrossRow]) -> String {
    let mut s = String::new();
    for r in rows {
        let _ = writeln!(
            s,
            "{}\t{}\t{}\t{}",
            r.id,
            r.explicit,
            r.smt,
            if r.agree { "AGREE" } else { "DISAGREE" }
        );
    }
    s
}
