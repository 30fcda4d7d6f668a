//! Rendering of results as aligned text or line-oriented `key=value`.

use std::fmt::Write as _;

use crate::actions::{ActionInstance, Classification, CompatibilityReport, Flag};
use crate::associated::TheoremReport;
use crate::bornology::AxiomReport;
use crate::coarse::FiniteClosure;
use crate::oracle::CrossCheckReport;
use crate::Truth;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Text,
    Machine,
}

/// An ordered list of fields under a title.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Report {
    pub title: String,
    pub fields: Vec<(String, String)>,
}

pub fn truth_word(t: Truth) -> &'static str {
    match t {
        Truth::Yes => "yes",
        Truth::No => "no",
        Truth::Unknown => "unknown",
    }
}

impl Report {
    pub fn new(title: impl Into<String>) -> Self {
        Report { title: title.into(), fields: Vec::new() }
    }

    pub fn push(&mut self, key: impl Into<String>, value: impl ToString) -> &mut Self {
        self.fields.push((key.into(), value.to_string()));
        self
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.fields.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn render(&self, format: Format) -> String {
        let mut out = String::new();
        match format {
            Format::Text => {
                writeln!(out, "{}", self.title).unwrap();
                let width = self.fields.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
                for (k, v) in &self.fields {
                    writeln!(out, "  {k:<width$}  {v}").unwrap();
                }
            }
            Format::Machine => {
                writeln!(out, "report={}", self.title.replace(char::is_whitespace, "_")).unwrap();
                for (k, v) in &self.fields {
                    writeln!(out, "{}={}", k.replace(char::is_whitespace, "_"), v.replace('\n', " ")).unwrap();
                }
            }
        }
        out
    }
}

pub fn axioms_report(
    a: &ActionInstance,
    space: &AxiomReport,
    group: &AxiomReport,
    group_maps: &CompatibilityReport,
    action: &CompatibilityReport,
) -> Report {
    let mut r = Report::new(format!("axioms {}", a.name));
    for (prefix, rep) in [("space", space), ("group", group)] {
        for c in &rep.checks {
            let value = match &c.witness {
                Some(w) => format!("no ({w})"),
                None => "yes".into(),
            };
            r.push(format!("{prefix}.{}", c.axiom), value);
        }
    }
    for c in group_maps.checks.iter().chain(&action.checks) {
        let mut value = truth_word(c.passed).to_string();
        if let Some(e) = &c.witness {
            write!(value, " (escape {:?})", e.points.first().cloned().unwrap_or_default()).unwrap();
        }
        r.push(format!("map.{}", c.map), value);
    }
    r
}

fn flag_value(f: &Flag) -> String {
    let mut v = truth_word(f.holds).to_string();
    if let Some(w) = &f.witness {
        write!(v, " ({w})").unwrap();
    }
    v
}

pub fn classification_report(a: &ActionInstance, c: &Classification) -> Report {
    let mut r = Report::new(format!("classify {}", a.name));
    r.push("b_proper", flag_value(&c.b_proper));
    r.push("weakly", flag_value(&c.weakly_b_proper));
    r.push("bi", flag_value(&c.bounded_isotropy));
    r
}

pub fn theorem_report(t: &TheoremReport) -> Report {
    let mut r = Report::new(format!("theorem {} {}", t.theorem, t.instance));
    r.push("status", t.status);
    r.push("window", t.budget.window);
    r.push("max_index", t.budget.max_index);
    for (i, c) in t.conditions.iter().enumerate() {
        let mut v = format!("{} {}", truth_word(c.truth), c.name);
        if !c.certificate.is_empty() {
            write!(v, " [{}]", c.certificate).unwrap();
        }
        r.push(format!("condition.{i}"), v);
    }
    for (i, w) in t.witnesses.iter().enumerate() {
        r.push(format!("witness.{i}"), w);
    }
    r.push("note", "a violation signals an implementation bug");
    r
}

pub fn crosscheck_report(reports: &[CrossCheckReport]) -> Report {
    let mut r = Report::new("crosscheck");
    let failed = reports.iter().filter(|c| !c.passed()).count();
    r.push("checks", reports.len());
    r.push("failed", failed);
    for c in reports {
        let key = format!("{}.{}", c.instance, c.primitive);
        match c.mismatches.first() {
            None => r.push(key, format!("pass ({} skipped)", c.skipped.len())),
            Some(m) => r.push(key, format!("FAIL {} mismatches, first: {m}", c.mismatches.len())),
        };
    }
    r
}

/// One node per ground element and one edge per pair of each maximal
/// relation, in label order.
pub fn closure_dot(name: &str, c: &FiniteClosure) -> String {
    let mut out = String::new();
    writeln!(out, "digraph \"{name}\" {{").unwrap();
    for v in 0..c.size {
        writeln!(out, "  {v};").unwrap();
    }
    for (i, r) in c.maximal.iter().enumerate() {
        for (x, y) in r.pairs() {
            writeln!(out, "  {x} -> {y} [label=\"{i}\"];").unwrap();
        }
    }
    writeln!(out, "}}").unwrap();
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coarse::{close_finite_base, Relation};
    use crate::sets::GroundSpace;

    #[test]
    fn formats() {
        let mut r = Report::new("classify shift");
        r.push("b_proper", "yes").push("bi", "no (stabilizer of [0])");
        assert_eq!(r.render(Format::Machine), "report=classify_shift\nb_proper=yes\nbi=no (stabilizer of [0])\n");
        assert_eq!(r.render(Format::Text), "classify shift\n  b_proper  yes\n  bi        no (stabilizer of [0])\n");
    }

    #[test]
    fn dot_output() {
        let base = [Relation::from_pairs(2, &[(0, 1)]).unwrap()];
        let c = close_finite_base(&GroundSpace::finite(2), &base).unwrap();
        let dot = closure_dot("pair", &c);
        assert!(dot.starts_with("digraph \"pair\" {\n  0;\n  1;\n"));
        assert_eq!(dot.matches("->").count(), 4);
    }
}
