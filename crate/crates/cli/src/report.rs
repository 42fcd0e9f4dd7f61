use std::collections::BTreeSet;
use std::fmt::Write;

use clap::ValueEnum;
use elpin::classify::ClosureTrace;
use elpin::{AxiomId, EnumerationReport, NormalizedTBox, Ontology};
use serde_json::{json, Value};

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Granularity {
    /// Normalized axioms, annotated with their source statements.
    Normalized,
    /// Source statements, deduplicated.
    Source,
}

pub fn closure(c: &ClosureTrace<'_>, as_json: bool) -> String {
    let lines: Vec<String> = c
        .assertions
        .iter()
        .filter(|a| !a.kind.is_trivial())
        .map(|a| c.render_assertion(a.id))
        .collect();
    if as_json {
        let mut s = serde_json::to_string_pretty(&json!({ "assertions": lines })).unwrap();
        s.push('\n');
        s
    } else {
        lines.iter().map(|l| format!("{l}\n")).collect()
    }
}

pub struct Outcome<'a> {
    pub query: &'a str,
    pub ontology: &'a Ontology,
    pub tbox: &'a NormalizedTBox,
    pub report: &'a EnumerationReport,
}

impl Outcome<'_> {
    fn origins(&self, ids: impl IntoIterator<Item = elpin::NormId>) -> BTreeSet<AxiomId> {
        self.tbox
            .explain_origin(ids)
            .expect("MinAs only hold ids of the normalized TBox")
    }

    fn source_text(&self, id: AxiomId) -> String {
        self.ontology
            .render_axiom(id)
            .expect("origins point into the ontology")
    }

    /// One entry per MinA: the axiom strings, plus an annotation per axiom
    /// in normalized mode.
    fn minas(&self, granularity: Granularity) -> Vec<Vec<(String, Option<String>)>> {
        match granularity {
            Granularity::Normalized => self
                .report
                .minas
                .iter()
                .map(|m| {
                    m.axioms
                        .iter()
                        .map(|&a| {
                            let src: Vec<String> =
                                self.origins([a]).iter().map(|s| s.0.to_string()).collect();
                            (
                                self.tbox.render_axiom(a),
                                Some(format!("[src {}]", src.join(","))),
                            )
                        })
                        .collect()
                })
                .collect(),
            Granularity::Source => {
                let sets: BTreeSet<BTreeSet<AxiomId>> = self
                    .report
                    .minas
                    .iter()
                    .map(|m| self.origins(m.axioms.iter().copied()))
                    .collect();
                sets.into_iter()
                    .map(|s| {
                        s.into_iter()
                            .map(|id| (self.source_text(id), None))
                            .collect()
                    })
                    .collect()
            }
        }
    }

    pub fn text(&self, granularity: Granularity) -> String {
        let minas = self.minas(granularity);
        let mut out = String::new();
        for m in &minas {
            if m.is_empty() {
                out.push_str("(trivial)\n");
                continue;
            }
            let parts: Vec<String> = m
                .iter()
                .map(|(text, note)| match note {
                    Some(n) => format!("{text} {n}"),
                    None => text.clone(),
                })
                .collect();
            out.push_str(&parts.join("; "));
            out.push('\n');
        }
        let _ = writeln!(
            out,
            "minas={} mcses={} complete={} time={:.3}",
            minas.len(),
            self.report.mcses.len(),
            self.report.complete,
            self.report.stats.wall_time.as_secs_f64()
        );
        out
    }

    pub fn json(&self, granularity: Granularity) -> String {
        let minas: Vec<Vec<String>> = self
            .minas(granularity)
            .into_iter()
            .map(|m| m.into_iter().map(|(text, _)| text).collect())
            .collect();
        let mcses: Vec<Vec<String>> = self
            .report
            .mcses
            .iter()
            .map(|m| {
                m.axioms
                    .iter()
                    .map(|&a| self.tbox.render_axiom(a))
                    .collect()
            })
            .collect();
        let s = &self.report.stats;
        let doc: Value = json!({
            "query": self.query,
            "minas": minas,
            "mcses": mcses,
            "complete": self.report.complete,
            "stats": {
                "solver_calls": s.solver_calls,
                "propagations": s.propagations,
                "conflicts": s.conflicts,
                "branches": s.branches,
                "rejected": s.rejected,
                "wall_time_ms": s.wall_time.as_secs_f64() * 1000.0,
            },
        });
        serde_json::to_string_pretty(&doc).unwrap()
    }
}
