//! The text instance format.
//!
//! ```text
//! name = shift
//! expect = confirmed
//!
//! [space]
//! kind = lattice
//! dim = 1
//!
//! [group]
//! kind = lattice
//! rank = 1
//!
//! [action]
//! rule = translation
//! column = (1)
//!
//! [bornology.X]
//! kind = chain
//! lower = (-m)
//! upper = (m)
//!
//! [bornology.L]
//! kind = cubes
//!
//! [coarse.candidate.balls]
//! kind = metric-balls
//! ```
//!
//! Finite groups list their multiplication table with repeated `row` keys,
//! permutation actions list `perm` once per group element, and finite base
//! bornologies list `member` once per base set.

use std::fmt::Write as _;
use std::path::Path;

use crate::actions::{ActionInstance, ActionRule, FiniteGroup, GroupKind, GroupSpec};
use crate::bornology::{bornology_axiom_check, BornologySpec, ChainShape, IndexExpr};
use crate::coarse::{ChainKind, ChainStructure, CoarseStructureSpec};
use crate::error::{Error, Result};
use crate::lattice::IntMatrix;
use crate::sets::{End, GroundSpace};

/// The outcome a file declares for the `theorem` subcommand.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Expectation {
    Confirmed,
    Refuted,
    NotApplicable,
}

impl Expectation {
    pub fn name(self) -> &'static str {
        match self {
            Expectation::Confirmed => "confirmed",
            Expectation::Refuted => "refuted",
            Expectation::NotApplicable => "not-applicable",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InstanceFile {
    pub instance: ActionInstance,
    pub candidates: Vec<(String, CoarseStructureSpec)>,
    pub expect: Option<Expectation>,
}

#[derive(Debug, Clone)]
struct Entry {
    key: String,
    value: String,
    line: usize,
    /// Column of the value; `key_column` of the key.
    column: usize,
    key_column: usize,
}

#[derive(Debug, Clone)]
struct Section {
    name: String,
    line: usize,
    entries: Vec<Entry>,
}

fn parse_error(line: usize, column: usize, message: impl Into<String>) -> Error {
    Error::Parse { line, column, message: message.into() }
}

impl Section {
    fn keys(&self, allowed: &[&str], repeatable: &[&str]) -> Result<()> {
        let mut seen: Vec<&str> = Vec::new();
        for e in &self.entries {
            if !allowed.contains(&e.key.as_str()) {
                return Err(parse_error(e.line, e.key_column, format!("unknown key `{}` in [{}]", e.key, self.name)));
            }
            if seen.contains(&e.key.as_str()) && !repeatable.contains(&e.key.as_str()) {
                return Err(parse_error(e.line, e.key_column, format!("duplicate key `{}`", e.key)));
            }
            seen.push(&e.key);
        }
        Ok(())
    }

    fn get(&self, key: &str) -> Option<&Entry> {
        self.entries.iter().find(|e| e.key == key)
    }

    fn all(&self, key: &str) -> Vec<&Entry> {
        self.entries.iter().filter(|e| e.key == key).collect()
    }

    fn require(&self, key: &str) -> Result<&Entry> {
        self.get(key).ok_or_else(|| parse_error(self.line, 1, format!("[{}] needs `{key}`", self.name)))
    }
}

impl Entry {
    fn error(&self, message: impl Into<String>) -> Error {
        parse_error(self.line, self.column, message)
    }

    fn int(&self) -> Result<i64> {
        self.value.parse().map_err(|_| self.error(format!("expected an integer, found `{}`", self.value)))
    }

    fn tuple(&self) -> Result<Vec<String>> {
        let v = self.value.trim();
        let inner = v
            .strip_prefix('(')
            .and_then(|s| s.strip_suffix(')'))
            .ok_or_else(|| self.error(format!("expected a tuple `(..)`, found `{v}`")))?;
        if inner.trim().is_empty() {
            return Ok(Vec::new());
        }
        Ok(inner.split(',').map(|s| s.trim().to_string()).collect())
    }

    fn int_tuple(&self) -> Result<Vec<i64>> {
        self.tuple()?
            .iter()
            .map(|s| s.parse().map_err(|_| self.error(format!("expected an integer, found `{s}`"))))
            .collect()
    }

    fn index_tuple(&self) -> Result<Vec<IndexExpr>> {
        self.tuple()?.iter().map(|s| parse_index_expr(s).map_err(|m| self.error(m))).collect()
    }
}

/// Parses `inf`, `-inf` or an affine expression such as `2*m-1`, `-m`, `3`.
pub fn parse_index_expr(s: &str) -> std::result::Result<IndexExpr, String> {
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    match t.as_str() {
        "inf" | "+inf" => return Ok(IndexExpr::PosInf),
        "-inf" => return Ok(IndexExpr::NegInf),
        "" => return Err("empty index expression".into()),
        _ => {}
    }
    let (mut a, mut b) = (0i64, 0i64);
    let mut terms = Vec::new();
    let mut start = 0;
    for (i, c) in t.char_indices() {
        if (c == '+' || c == '-') && i > start {
            terms.push(&t[start..i]);
            start = i;
        }
    }
    terms.push(&t[start..]);
    for term in terms {
        let (sign, body) = match term.strip_prefix('-') {
            Some(rest) => (-1, rest),
            None => (1, term.strip_prefix('+').unwrap_or(term)),
        };
        let bad = || format!("bad index expression `{s}`");
        if let Some(coef) = body.strip_suffix('m') {
            let coef = coef.strip_suffix('*').unwrap_or(coef);
            let c: i64 = if coef.is_empty() { 1 } else { coef.parse().map_err(|_| bad())? };
            a += sign * c;
        } else {
            b += sign * body.parse::<i64>().map_err(|_| bad())?;
        }
    }
    Ok(IndexExpr::affine(a, b))
}

fn split_sections(text: &str) -> Result<(Vec<Entry>, Vec<Section>)> {
    let mut top = Vec::new();
    let mut sections: Vec<Section> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("");
        let trimmed = content.trim();
        if trimmed.is_empty() {
            continue;
        }
        let column = content.len() - content.trim_start().len() + 1;
        if let Some(rest) = trimmed.strip_prefix('[') {
            let name = rest
                .strip_suffix(']')
                .ok_or_else(|| parse_error(line, column, "unterminated section header"))?
                .trim()
                .to_string();
            if sections.iter().any(|s| s.name == name) {
                return Err(parse_error(line, column, format!("duplicate section [{name}]")));
            }
            sections.push(Section { name, line, entries: Vec::new() });
            continue;
        }
        let (key, value) = trimmed
            .split_once('=')
            .ok_or_else(|| parse_error(line, column, "expected `key = value`"))?;
        let key = key.trim();
        if key.is_empty() || !key.chars().all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_' || c == '-') {
            return Err(parse_error(line, column, format!("bad key `{key}`")));
        }
        let value_col = column + trimmed.find('=').expect("split") + 1;
        let value_col = value_col + (value.len() - value.trim_start().len());
        let entry =
            Entry { key: key.to_string(), value: value.trim().to_string(), line, column: value_col, key_column: column };
        match sections.last_mut() {
            Some(s) => s.entries.push(entry),
            None => top.push(entry),
        }
    }
    Ok((top, sections))
}

fn parse_space(s: &Section) -> Result<GroundSpace> {
    let kind = s.require("kind")?;
    match kind.value.as_str() {
        "lattice" => {
            s.keys(&["kind", "dim"], &[])?;
            let dim = s.require("dim")?;
            let d = dim.int()?;
            if !(1..=8).contains(&d) {
                return Err(dim.error(format!("dimension {d} outside 1..=8")));
            }
            Ok(GroundSpace::lattice(d as usize))
        }
        "finite" => {
            s.keys(&["kind", "size"], &[])?;
            let size = s.require("size")?;
            let n = size.int()?;
            if !(1..=16).contains(&n) {
                return Err(size.error(format!("size {n} outside 1..=16")));
            }
            Ok(GroundSpace::finite(n as usize))
        }
        other => Err(kind.error(format!("unknown space kind `{other}`"))),
    }
}

enum GroupShape {
    Lattice(usize),
    Finite(FiniteGroup),
}

fn parse_group(s: &Section) -> Result<GroupShape> {
    let kind = s.require("kind")?;
    match kind.value.as_str() {
        "lattice" => {
            s.keys(&["kind", "rank"], &[])?;
            let rank = s.require("rank")?;
            let k = rank.int()?;
            if !(1..=4).contains(&k) {
                return Err(rank.error(format!("rank {k} outside 1..=4")));
            }
            Ok(GroupShape::Lattice(k as usize))
        }
        "cyclic" => {
            s.keys(&["kind", "order"], &[])?;
            let order = s.require("order")?;
            let n = order.int()?;
            if !(1..=64).contains(&n) {
                return Err(order.error(format!("order {n} outside 1..=64")));
            }
            Ok(GroupShape::Finite(FiniteGroup::cyclic(n as usize)?))
        }
        "finite" => {
            s.keys(&["kind", "row"], &["row"])?;
            let rows = s.all("row");
            if rows.is_empty() {
                return Err(parse_error(s.line, 1, "[group] needs `row` entries"));
            }
            let mut table = Vec::new();
            for r in rows {
                let v = r.int_tuple()?;
                if v.iter().any(|&x| x < 0) {
                    return Err(r.error("negative element"));
                }
                table.push(v.into_iter().map(|x| x as usize).collect());
            }
            FiniteGroup::new(table).map(GroupShape::Finite).map_err(|e| parse_error(s.line, 1, e.to_string()))
        }
        other => Err(kind.error(format!("unknown group kind `{other}`"))),
    }
}

fn parse_rule(s: &Section, d: usize, shape: &GroupShape) -> Result<ActionRule> {
    let rule = s.require("rule")?;
    let columns = |s: &Section| -> Result<IntMatrix> {
        let cols = s.all("column");
        let data = cols.iter().map(|c| c.int_tuple()).collect::<Result<Vec<_>>>()?;
        if let Some((c, v)) = cols.iter().zip(&data).find(|(_, v)| v.len() != d) {
            return Err(c.error(format!("column of length {} in dimension {d}", v.len())));
        }
        IntMatrix::from_columns(d, &data)
    };
    match rule.value.as_str() {
        "translation" => {
            s.keys(&["rule", "column"], &["column"])?;
            Ok(ActionRule::Translation(columns(s)?))
        }
        "signed" => {
            s.keys(&["rule", "column", "perm", "signs"], &["column"])?;
            let perm = s.require("perm")?.int_tuple()?;
            if perm.iter().any(|&p| p < 0) {
                return Err(s.require("perm")?.error("negative coordinate"));
            }
            Ok(ActionRule::SignedTranslation {
                perm: perm.into_iter().map(|p| p as usize).collect(),
                signs: s.require("signs")?.int_tuple()?,
                matrix: columns(s)?,
            })
        }
        "permutation" => {
            s.keys(&["rule", "perm"], &["perm"])?;
            let mut perms = Vec::new();
            for p in s.all("perm") {
                let v = p.int_tuple()?;
                if v.iter().any(|&x| x < 0) {
                    return Err(p.error("negative label"));
                }
                perms.push(v.into_iter().map(|x| x as usize).collect());
            }
            if let GroupShape::Finite(g) = shape {
                if perms.len() != g.order() {
                    return Err(parse_error(s.line, 1, format!("{} perms for a group of order {}", perms.len(), g.order())));
                }
            }
            Ok(ActionRule::Permutation(perms))
        }
        other => Err(rule.error(format!("unknown rule `{other}`"))),
    }
}

fn parse_chain(s: &Section, d: usize) -> Result<ChainShape> {
    let lower = s.require("lower")?;
    let upper = s.require("upper")?;
    let (lo, hi) = (lower.index_tuple()?, upper.index_tuple()?);
    for (e, v) in [(lower, &lo), (upper, &hi)] {
        if v.len() != d {
            return Err(e.error(format!("{} ends in dimension {d}", v.len())));
        }
    }
    for i in 0..d {
        if let (End::Fin(a), End::Fin(b)) = (lo[i].eval(0), hi[i].eval(0)) {
            if b < a {
                return Err(upper.error(format!(
                    "chain level 0 is empty: upper end {} below lower end {} on coordinate {i}",
                    hi[i], lo[i]
                )));
            }
        }
    }
    ChainShape::new(lo, hi)
}

/// Parses the `kind` and chain keys shared by bornology and candidate
/// sections; `kind_key` names the key holding the bornology kind.
fn parse_bornology(s: &Section, kind_key: &str, space: &GroundSpace, d: usize) -> Result<BornologySpec> {
    let kind = s.require(kind_key)?;
    let b = match kind.value.as_str() {
        "maximal" => BornologySpec::Maximal,
        "cubes" => BornologySpec::cubes(d),
        "chain" => BornologySpec::Chain(parse_chain(s, d)?),
        "base" => {
            let Some(n) = space.size() else {
                return Err(kind.error("a finite base needs a finite space"));
            };
            let mut base = Vec::new();
            for m in s.all("member") {
                let mut mask = 0u64;
                for v in m.int_tuple()? {
                    if v < 0 || v as usize >= n {
                        return Err(m.error(format!("label {v} outside 0..{n}")));
                    }
                    mask |= 1 << v;
                }
                base.push(mask);
            }
            BornologySpec::FiniteBase { size: n, base }
        }
        other => return Err(kind.error(format!("unknown bornology kind `{other}`"))),
    };
    let report = bornology_axiom_check(&b);
    if let Some(c) = report.checks.iter().find(|c| !c.passed) {
        return Err(parse_error(
            s.line,
            1,
            format!("[{}] fails the {} axiom: {}", s.name, c.axiom, c.witness.clone().unwrap_or_default()),
        ));
    }
    Ok(b)
}

fn bornology_keys(s: &Section, extra: &[&str]) -> Result<()> {
    let kind = s.get("kind").map(|e| e.value.as_str());
    let mut allowed = vec!["kind"];
    allowed.extend_from_slice(extra);
    match kind {
        Some("chain") => allowed.extend(["lower", "upper"]),
        Some("base") => allowed.push("member"),
        _ => {}
    }
    s.keys(&allowed, &["member"])
}

fn parse_candidate(s: &Section, a: &ActionInstance) -> Result<CoarseStructureSpec> {
    let d = a.dim();
    let kind = s.require("kind")?;
    let chain_keys = |s: &Section| -> Result<()> {
        let mut allowed = vec!["kind", "bornology"];
        if s.get("bornology").is_some_and(|e| e.value == "chain") {
            allowed.extend(["lower", "upper"]);
        }
        s.keys(&allowed, &[])
    };
    let kind = match kind.value.as_str() {
        "metric-balls" => {
            s.keys(&["kind"], &[])?;
            ChainKind::MetricBalls
        }
        "connected" => {
            chain_keys(s)?;
            ChainKind::Connected(parse_bornology(s, "bornology", &a.space, d)?)
        }
        "group-right" => {
            chain_keys(s)?;
            ChainKind::GroupRight(parse_bornology(s, "bornology", &a.space, d)?)
        }
        "orbit-pairs" => {
            chain_keys(s)?;
            let Some(m) = a.matrix() else {
                return Err(kind.error("orbit-pair candidates need a translation rule"));
            };
            ChainKind::OrbitPairs { matrix: m.clone(), bornology: parse_bornology(s, "bornology", &a.space, d)? }
        }
        other => return Err(kind.error(format!("unknown candidate kind `{other}`"))),
    };
    if a.space.size().is_some() {
        return Err(parse_error(s.line, 1, "candidate structures need a lattice space"));
    }
    Ok(CoarseStructureSpec::Chain(ChainStructure { dim: d, kind }))
}

pub fn parse_instance(text: &str) -> Result<InstanceFile> {
    let (top, sections) = split_sections(text)?;
    let mut name = "instance".to_string();
    let mut expect = None;
    for e in &top {
        match e.key.as_str() {
            "name" => name = e.value.clone(),
            "expect" => {
                expect = Some(match e.value.as_str() {
                    "confirmed" => Expectation::Confirmed,
                    "refuted" => Expectation::Refuted,
                    "not-applicable" => Expectation::NotApplicable,
                    other => return Err(e.error(format!("unknown expectation `{other}`"))),
                })
            }
            other => return Err(parse_error(e.line, e.key_column, format!("unknown top-level key `{other}`"))),
        }
    }
    for s in &sections {
        let known = ["space", "group", "action", "bornology.X", "bornology.L"].contains(&s.name.as_str())
            || s.name.strip_prefix("coarse.candidate.").is_some_and(|n| !n.is_empty());
        if !known {
            return Err(parse_error(s.line, 1, format!("unknown section [{}]", s.name)));
        }
    }
    let section = |n: &str| -> Result<&Section> {
        sections
            .iter()
            .find(|s| s.name == n)
            .ok_or_else(|| parse_error(sections.last().map_or(1, |s| s.line), 1, format!("missing section [{n}]")))
    };
    let space = parse_space(section("space")?)?;
    let shape = parse_group(section("group")?)?;
    let action = section("action")?;
    let rule = parse_rule(action, space.dim(), &shape)?;
    let bx = section("bornology.X")?;
    bornology_keys(bx, &[])?;
    let space_b = parse_bornology(bx, "kind", &space, space.dim())?;
    let bl = section("bornology.L")?;
    bornology_keys(bl, &[])?;
    let group = match shape {
        GroupShape::Lattice(k) => {
            let b = parse_bornology(bl, "kind", &GroundSpace::lattice(k), k)?;
            GroupSpec::lattice(k, b)
        }
        GroupShape::Finite(g) => {
            let b = parse_bornology(bl, "kind", &GroundSpace::finite(g.order()), 1)?;
            GroupSpec::finite(g, b)
        }
    }
    .map_err(|e| parse_error(bl.line, 1, e.to_string()))?;
    let instance =
        ActionInstance::new(name, group, space, rule, space_b).map_err(|e| parse_error(action.line, 1, e.to_string()))?;
    let mut candidates = Vec::new();
    for s in &sections {
        if let Some(n) = s.name.strip_prefix("coarse.candidate.") {
            candidates.push((n.to_string(), parse_candidate(s, &instance)?));
        }
    }
    Ok(InstanceFile { instance, candidates, expect })
}

/// Reads an instance file; the name defaults to the file stem.
pub fn read_instance(path: &Path) -> Result<InstanceFile> {
    let text = std::fs::read_to_string(path)?;
    let mut f = parse_instance(&text)?;
    if !text.lines().any(|l| l.split('#').next().unwrap_or("").trim_start().starts_with("name")) {
        if let Some(stem) = path.file_stem() {
            f.instance.name = stem.to_string_lossy().into_owned();
        }
    }
    Ok(f)
}

fn tuple<T: ToString>(v: &[T]) -> String {
    format!("({})", v.iter().map(T::to_string).collect::<Vec<_>>().join(", "))
}

fn write_bornology(out: &mut String, kind_key: &str, b: &BornologySpec) {
    match b {
        BornologySpec::Maximal => writeln!(out, "{kind_key} = maximal").unwrap(),
        BornologySpec::Chain(c) => {
            writeln!(out, "{kind_key} = chain").unwrap();
            writeln!(out, "lower = {}", tuple(&c.lower)).unwrap();
            writeln!(out, "upper = {}", tuple(&c.upper)).unwrap();
        }
        BornologySpec::FiniteBase { base, .. } => {
            writeln!(out, "{kind_key} = base").unwrap();
            for &m in base {
                let labels: Vec<u32> = (0..64).filter(|i| m >> i & 1 == 1).collect();
                writeln!(out, "member = {}", tuple(&labels)).unwrap();
            }
        }
        other => writeln!(out, "# not expressible: {other}").unwrap(),
    }
}

/// Renders an instance in the format [`parse_instance`] reads.
pub fn serialize_instance(f: &InstanceFile) -> String {
    let a = &f.instance;
    let mut out = String::new();
    writeln!(out, "name = {}", a.name).unwrap();
    if let Some(e) = f.expect {
        writeln!(out, "expect = {}", e.name()).unwrap();
    }
    match &a.space {
        GroundSpace::Lattice { dim } => writeln!(out, "\n[space]\nkind = lattice\ndim = {dim}").unwrap(),
        GroundSpace::Finite { .. } => {
            writeln!(out, "\n[space]\nkind = finite\nsize = {}", a.space.size().expect("finite")).unwrap()
        }
    }
    match &a.group.kind {
        GroupKind::Lattice { rank } => writeln!(out, "\n[group]\nkind = lattice\nrank = {rank}").unwrap(),
        GroupKind::Finite(g) => {
            writeln!(out, "\n[group]\nkind = finite").unwrap();
            for row in &g.mul {
                writeln!(out, "row = {}", tuple(row)).unwrap();
            }
        }
    }
    writeln!(out, "\n[action]").unwrap();
    match &a.rule {
        ActionRule::Translation(m) => {
            writeln!(out, "rule = translation").unwrap();
            for c in m.columns() {
                writeln!(out, "column = {}", tuple(&c)).unwrap();
            }
        }
        ActionRule::SignedTranslation { perm, signs, matrix } => {
            writeln!(out, "rule = signed\nperm = {}\nsigns = {}", tuple(perm), tuple(signs)).unwrap();
            for c in matrix.columns() {
                writeln!(out, "column = {}", tuple(&c)).unwrap();
            }
        }
        ActionRule::Permutation(perms) => {
            writeln!(out, "rule = permutation").unwrap();
            for p in perms {
                writeln!(out, "perm = {}", tuple(p)).unwrap();
            }
        }
    }
    writeln!(out, "\n[bornology.X]").unwrap();
    write_bornology(&mut out, "kind", &a.bornology);
    writeln!(out, "\n[bornology.L]").unwrap();
    write_bornology(&mut out, "kind", &a.group.bornology);
    for (name, c) in &f.candidates {
        let CoarseStructureSpec::Chain(ch) = c else { continue };
        writeln!(out, "\n[coarse.candidate.{name}]").unwrap();
        match &ch.kind {
            ChainKind::MetricBalls => writeln!(out, "kind = metric-balls").unwrap(),
            ChainKind::Connected(b) => {
                writeln!(out, "kind = connected").unwrap();
                write_bornology(&mut out, "bornology", b);
            }
            ChainKind::GroupRight(b) => {
                writeln!(out, "kind = group-right").unwrap();
                write_bornology(&mut out, "bornology", b);
            }
            ChainKind::OrbitPairs { bornology, .. } => {
                writeln!(out, "kind = orbit-pairs").unwrap();
                write_bornology(&mut out, "bornology", bornology);
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const SHIFT: &str = "name = shift
expect = confirmed

[space]
kind = lattice
dim = 1

[group]
kind = lattice
rank = 1

[action]
rule = translation
column = (1)

[bornology.X]
kind = cubes

[bornology.L]
kind = cubes

[coarse.candidate.balls]
kind = metric-balls
";

    #[test]
    fn index_expressions() {
        assert_eq!(parse_index_expr("2*m+1"), Ok(IndexExpr::affine(2, 1)));
        assert_eq!(parse_index_expr("-m"), Ok(IndexExpr::affine(-1, 0)));
        assert_eq!(parse_index_expr("m - 1"), Ok(IndexExpr::affine(1, -1)));
        assert_eq!(parse_index_expr("-3"), Ok(IndexExpr::constant(-3)));
        assert_eq!(parse_index_expr("-inf"), Ok(IndexExpr::NegInf));
        assert!(parse_index_expr("m*2").is_err());
        for e in [IndexExpr::affine(-2, -1), IndexExpr::affine(3, 0), IndexExpr::constant(0), IndexExpr::PosInf] {
            assert_eq!(parse_index_expr(&e.to_string()), Ok(e));
        }
    }

    #[test]
    fn shift_round_trip() {
        let f = parse_instance(SHIFT).unwrap();
        assert_eq!(f.instance.name, "shift");
        assert_eq!(f.instance.bornology, BornologySpec::cubes(1));
        assert_eq!(f.expect, Some(Expectation::Confirmed));
        assert_eq!(f.candidates.len(), 1);
        let again = parse_instance(&serialize_instance(&f)).unwrap();
        assert_eq!(again.instance, f.instance);
        assert_eq!(again.candidates, f.candidates);
    }

    #[test]
    fn unknown_key_is_an_error() {
        let text = SHIFT.replace("dim = 1", "dim = 1\ncolour = 3");
        match parse_instance(&text) {
            Err(Error::Parse { line: 7, column: 1, .. }) => {}
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn empty_first_level_is_rejected() {
        let text = SHIFT.replace("[bornology.X]\nkind = cubes", "[bornology.X]\nkind = chain\nlower = (0)\nupper = (m-1)");
        match parse_instance(&text) {
            Err(Error::Parse { line, message, .. }) => {
                assert_eq!(line, 19);
                assert!(message.contains("level 0 is empty"), "{message}");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn finite_round_trip() {
        let text = "[space]
kind = finite
size = 3

[group]
kind = cyclic
order = 3

[action]
rule = permutation
perm = (0, 1, 2)
perm = (1, 2, 0)
perm = (2, 0, 1)

[bornology.X]
kind = base
member = (0)
member = (0, 1, 2)

[bornology.L]
kind = maximal
";
        let f = parse_instance(text).unwrap();
        assert_eq!(f.instance.bornology, BornologySpec::FiniteBase { size: 3, base: vec![1, 7] });
        assert_eq!(parse_instance(&serialize_instance(&f)).unwrap(), f);
    }

    #[test]
    fn missing_section() {
        let text = SHIFT.replace("[group]\nkind = lattice\nrank = 1\n", "");
        assert!(matches!(parse_instance(&text), Err(Error::Parse { .. })));
    }
}
