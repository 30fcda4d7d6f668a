//! Bornologies: finite bases on labelled sets, exhaustion chains of boxes on
//! lattices, and the maximal bornology.

use std::fmt;
use std::str::FromStr;

use num_integer::Integer;

use crate::error::{check_dim, Error, Result};
use crate::lattice::{IntMatrix, Region, DEFAULT_SEARCH_RADIUS};
use crate::sets::{End, GroundSpace, IntBox, Interval, Point, SetDescriptor, Sweep};
use crate::Budget;

/// `a·m + b` in the chain index `m`, or a constant infinity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum IndexExpr {
    NegInf,
    PosInf,
    Affine { a: i64, b: i64 },
}

impl IndexExpr {
    pub fn affine(a: i64, b: i64) -> Self {
        IndexExpr::Affine { a, b }
    }

    pub fn constant(b: i64) -> Self {
        IndexExpr::Affine { a: 0, b }
    }

    pub fn eval(self, m: u64) -> End {
        match self {
            IndexExpr::NegInf => End::NegInf,
            IndexExpr::PosInf => End::PosInf,
            IndexExpr::Affine { a, b } => End::Fin(a * m as i64 + b),
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, IndexExpr::Affine { .. })
    }

    pub fn neg(self) -> Self {
        match self {
            IndexExpr::NegInf => IndexExpr::PosInf,
            IndexExpr::PosInf => IndexExpr::NegInf,
            IndexExpr::Affine { a, b } => IndexExpr::Affine { a: -a, b: -b },
        }
    }

    pub fn shift(self, v: i64) -> Self {
        match self {
            IndexExpr::Affine { a, b } => IndexExpr::Affine { a, b: b + v },
            e => e,
        }
    }

    /// Least `m >= 0` with `eval(m) <= p`, assuming the expression does not
    /// increase with `m`.
    fn least_at_most(self, p: End) -> Option<u64> {
        match (self, p) {
            (_, End::PosInf) | (IndexExpr::NegInf, _) => Some(0),
            (IndexExpr::PosInf, _) | (_, End::NegInf) => None,
            (IndexExpr::Affine { a, b }, End::Fin(p)) => {
                if b <= p {
                    Some(0)
                } else if a < 0 {
                    Some(Integer::div_ceil(&(b - p), &(-a)) as u64)
                } else {
                    None
                }
            }
        }
    }

    /// Least `m >= 0` with `eval(m) >= q`, assuming the expression does not
    /// decrease with `m`.
    fn least_at_least(self, q: End) -> Option<u64> {
        self.neg().least_at_most(q.neg())
    }
}

impl fmt::Display for IndexExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            IndexExpr::NegInf => write!(f, "-inf"),
            IndexExpr::PosInf => write!(f, "inf"),
            IndexExpr::Affine { a: 0, b } => write!(f, "{b}"),
            IndexExpr::Affine { a, b } => {
                match a {
                    1 => write!(f, "m")?,
                    -1 => write!(f, "-m")?,
                    a => write!(f, "{a}*m")?,
                }
                match b.signum() {
                    1 => write!(f, "+{b}"),
                    -1 => write!(f, "{b}"),
                    _ => Ok(()),
                }
            }
        }
    }
}

impl FromStr for IndexExpr {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        match t.as_str() {
            "inf" | "+inf" => return Ok(IndexExpr::PosInf),
            "-inf" => return Ok(IndexExpr::NegInf),
            "" => return Err("empty index expression".into()),
            _ => {}
        }
        let (mut a, mut b) = (0i64, 0i64);
        let mut start = 0;
        let bytes = t.as_bytes();
        let mut terms = Vec::new();
        for i in 1..=bytes.len() {
            if i == bytes.len() || bytes[i] == b'+' || bytes[i] == b'-' {
                terms.push(&t[start..i]);
                start = i;
            }
        }
        for term in terms {
            let (sign, body) = match term.as_bytes()[0] {
                b'-' => (-1, &term[1..]),
                b'+' => (1, &term[1..]),
                _ => (1, term),
            };
            let bad = || format!("bad index expression `{s}`");
            if let Some(coef) = body.strip_suffix('m') {
                let coef = coef.strip_suffix('*').unwrap_or(coef);
                let c: i64 = if coef.is_empty() { 1 } else { coef.parse().map_err(|_| bad())? };
                a += sign * c;
            } else {
                let c: i64 = body.parse().map_err(|_| bad())?;
                b += sign * c;
            }
        }
        Ok(IndexExpr::Affine { a, b })
    }
}

/// Per-coordinate affine ends of an exhaustion chain `X_0 ⊆ X_1 ⊆ ...`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ChainShape {
    pub lower: Vec<IndexExpr>,
    pub upper: Vec<IndexExpr>,
}

/// Where a chain fails to contain a box: coordinate and side.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Blocked {
    pub coord: usize,
    pub upper: bool,
}

impl ChainShape {
    pub fn new(lower: Vec<IndexExpr>, upper: Vec<IndexExpr>) -> Result<Self> {
        check_dim(lower.len(), upper.len())?;
        Ok(ChainShape { lower, upper })
    }

    /// `[-m, m]^d`.
    pub fn cubes(d: usize) -> Self {
        ChainShape {
            lower: vec![IndexExpr::affine(-1, 0); d],
            upper: vec![IndexExpr::affine(1, 0); d],
        }
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn level(&self, m: u64) -> IntBox {
        IntBox::new(
            self.lower
                .iter()
                .zip(&self.upper)
                .map(|(l, u)| Interval::new(l.eval(m), u.eval(m)))
                .collect(),
        )
    }

    /// Least level containing `b`, or the first coordinate that no level
    /// reaches.
    pub fn least_index(&self, b: &IntBox) -> Result<std::result::Result<u64, Blocked>> {
        check_dim(self.dim(), b.dim())?;
        if b.is_empty() {
            return Ok(Ok(0));
        }
        let mut k = 0;
        for (i, iv) in b.dims().iter().enumerate() {
            match self.upper[i].least_at_least(iv.hi) {
                Some(m) => k = k.max(m),
                None => return Ok(Err(Blocked { coord: i, upper: true })),
            }
            match self.lower[i].least_at_most(iv.lo) {
                Some(m) => k = k.max(m),
                None => return Ok(Err(Blocked { coord: i, upper: false })),
            }
        }
        Ok(Ok(k))
    }

    fn product(&self, other: &ChainShape) -> ChainShape {
        ChainShape {
            lower: self.lower.iter().chain(&other.lower).copied().collect(),
            upper: self.upper.iter().chain(&other.upper).copied().collect(),
        }
    }
}

/// A finite map between labelled sets, `table[i]` is the image of `i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteMap {
    pub codomain: usize,
    pub table: Vec<usize>,
}

/// Maps supported by the inverse-image and image constructions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MapDescriptor {
    Identity,
    Finite(FiniteMap),
    /// `l ↦ offset + M·l` from the parameter lattice ℤ^k to ℤ^d.
    Orbit { offset: Point, matrix: IntMatrix },
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum BornologySpec {
    Maximal,
    /// A bornological base on `{0, .., size-1}`, members as bit masks.
    FiniteBase { size: usize, base: Vec<u64> },
    Chain(ChainShape),
    /// Level `m` is `{l : offset + M·l ∈ target(m)}`.
    Preimage { offset: Point, matrix: IntMatrix, target: ChainShape },
    /// Level `m` is `{offset + M·l : l ∈ source(m)}`.
    Image { offset: Point, matrix: IntMatrix, source: ChainShape },
}

/// Result of a boundedness query.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BoundVerdict {
    BoundedAt(u64),
    Unbounded(Escape),
    Inconclusive { window: i64, max_index: u32 },
}

impl BoundVerdict {
    pub fn is_bounded(&self) -> bool {
        matches!(self, BoundVerdict::BoundedAt(_))
    }

    pub fn is_unbounded(&self) -> bool {
        matches!(self, BoundVerdict::Unbounded(_))
    }

    pub fn index(&self) -> Option<u64> {
        match self {
            BoundVerdict::BoundedAt(k) => Some(*k),
            _ => None,
        }
    }
}

impl fmt::Display for BoundVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BoundVerdict::BoundedAt(k) => write!(f, "bounded at {k}"),
            BoundVerdict::Unbounded(e) => match &e.direction {
                Some(r) => write!(f, "unbounded, direction {r:?}"),
                None => write!(f, "unbounded"),
            },
            BoundVerdict::Inconclusive { window, max_index } => {
                write!(f, "inconclusive (window {window}, max index {max_index})")
            }
        }
    }
}

/// Points of the queried set outside levels `0..=max_index`, one per level.
/// When `direction` is set, `start + t·direction` stays in the set for all
/// `t >= 0`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Escape {
    pub points: Vec<Point>,
    pub start: Option<Point>,
    pub direction: Option<Point>,
}

/// One line of an axiom report.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AxiomCheck {
    pub axiom: &'static str,
    pub passed: bool,
    pub witness: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AxiomReport {
    pub checks: Vec<AxiomCheck>,
}

impl AxiomReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    fn push(&mut self, axiom: &'static str, witness: Option<String>) {
        self.checks.push(AxiomCheck { axiom, passed: witness.is_none(), witness });
    }
}

pub fn mask_of(size: usize, s: &SetDescriptor) -> Result<u64> {
    if size > 64 {
        return Err(Error::TooLarge(format!("finite ground set of size {size}")));
    }
    let pts = s
        .finite_points()?
        .ok_or_else(|| Error::Unsupported("infinite subset of a finite ground set".into()))?;
    let mut mask = 0u64;
    for p in pts {
        check_dim(1, p.len())?;
        match usize::try_from(p[0]) {
            Ok(i) if i < size => mask |= 1 << i,
            _ => return Err(Error::Invalid(format!("label index {} out of range", p[0]))),
        }
    }
    Ok(mask)
}

pub fn descriptor_of(mask: u64) -> SetDescriptor {
    SetDescriptor::points((0..64).filter(|i| mask >> i & 1 == 1).map(|i| vec![i as i64]).collect())
}

fn full_mask(size: usize) -> u64 {
    if size >= 64 {
        u64::MAX
    } else {
        (1u64 << size) - 1
    }
}

fn is_subset(a: u64, b: u64) -> bool {
    a & !b == 0
}

fn first_bit(mask: u64) -> usize {
    mask.trailing_zeros() as usize
}

impl BornologySpec {
    pub fn cubes(d: usize) -> Self {
        BornologySpec::Chain(ChainShape::cubes(d))
    }

    pub fn finite_base(space: &GroundSpace, base: &[SetDescriptor]) -> Result<Self> {
        let size = space
            .size()
            .ok_or_else(|| Error::Unsupported("finite base on a lattice".into()))?;
        let base = base.iter().map(|s| mask_of(size, s)).collect::<Result<Vec<_>>>()?;
        Ok(BornologySpec::FiniteBase { size, base })
    }

    /// Ambient dimension of the levels, when the spec fixes one.
    pub fn dim(&self) -> Option<usize> {
        match self {
            BornologySpec::Maximal => None,
            BornologySpec::FiniteBase { .. } => Some(1),
            BornologySpec::Chain(c) => Some(c.dim()),
            BornologySpec::Preimage { matrix, .. } => Some(matrix.cols()),
            BornologySpec::Image { matrix, .. } => Some(matrix.rows()),
        }
    }

    pub fn is_chain_like(&self) -> bool {
        matches!(
            self,
            BornologySpec::Chain(_) | BornologySpec::Preimage { .. } | BornologySpec::Image { .. }
        )
    }

    /// Level `m` of an exhaustion chain; `None` for the other variants.
    pub fn level(&self, m: u64) -> Result<Option<SetDescriptor>> {
        Ok(Some(match self {
            BornologySpec::Chain(c) => SetDescriptor::Box(c.level(m)),
            BornologySpec::Preimage { offset, matrix, target } => {
                let constraint = target.level(m).translate(&offset.iter().map(|v| -v).collect::<Vec<_>>())?;
                SetDescriptor::Sweep(Sweep {
                    base: IntBox::point(&vec![0; matrix.cols()]),
                    matrix: IntMatrix::identity(matrix.cols()),
                    domain: Region::new(matrix.clone(), constraint)?,
                })
            }
            BornologySpec::Image { offset, matrix, source } => SetDescriptor::Sweep(Sweep {
                base: IntBox::point(offset),
                matrix: matrix.clone(),
                domain: Region::from_box(source.level(m)),
            }),
            _ => return Ok(None),
        }))
    }
}

impl fmt::Display for BornologySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn shape(c: &ChainShape) -> String {
            let parts: Vec<String> = c.lower.iter().zip(&c.upper).map(|(l, u)| format!("[{l}, {u}]")).collect();
            parts.join("x")
        }
        match self {
            BornologySpec::Maximal => write!(f, "maximal"),
            BornologySpec::FiniteBase { size, base } => {
                let parts: Vec<String> = base.iter().map(|&b| descriptor_of(b).to_string()).collect();
                write!(f, "base on {size} labels: {}", parts.join(", "))
            }
            BornologySpec::Chain(c) => write!(f, "chain {}", shape(c)),
            BornologySpec::Preimage { offset, matrix, target } => {
                write!(f, "preimage under {offset:?}+{matrix:?}l of chain {}", shape(target))
            }
            BornologySpec::Image { offset, matrix, source } => {
                write!(f, "image under {offset:?}+{matrix:?}l of chain {}", shape(source))
            }
        }
    }
}

pub fn bornology_axiom_check(b: &BornologySpec) -> AxiomReport {
    let mut report = AxiomReport { checks: Vec::new() };
    match b {
        BornologySpec::Maximal => {
            report.push("covering", None);
            report.push("union-closed", None);
            report.push("downward-closed", None);
        }
        BornologySpec::FiniteBase { size, base } => {
            let union = base.iter().fold(0, |acc, s| acc | s);
            let missing = full_mask(*size) & !union;
            report.push("covering", (missing != 0).then(|| format!("label {} is not covered", first_bit(missing))));
            let mut pair = None;
            'outer: for (i, &s) in base.iter().enumerate() {
                for &t in &base[i..] {
                    if !base.iter().any(|&u| is_subset(s | t, u)) {
                        pair = Some(format!("{} ∪ {} lies in no base member", descriptor_of(s), descriptor_of(t)));
                        break 'outer;
                    }
                }
            }
            report.push("union-closed", pair);
            report.push("downward-closed", None);
        }
        BornologySpec::Chain(c)
        | BornologySpec::Preimage { target: c, .. }
        | BornologySpec::Image { source: c, .. } => chain_checks(c, &mut report),
    }
    report
}

fn chain_checks(c: &ChainShape, report: &mut AxiomReport) {
    let mut monotone = None;
    for i in 0..c.dim() {
        if let IndexExpr::Affine { a, .. } = c.lower[i] {
            if a > 0 {
                monotone = Some(format!("lower end of coordinate {i} increases with m"));
                break;
            }
        }
        if let IndexExpr::Affine { a, .. } = c.upper[i] {
            if a < 0 {
                monotone = Some(format!("upper end of coordinate {i} decreases with m"));
                break;
            }
        }
    }
    report.push("monotone", monotone);
    let mut covering = None;
    for i in 0..c.dim() {
        let mut x = vec![0i64; c.dim()];
        let lo_stuck = match c.lower[i] {
            IndexExpr::NegInf => None,
            IndexExpr::PosInf => Some(0),
            IndexExpr::Affine { a, b } => (a >= 0).then_some(b - 1),
        };
        let hi_stuck = match c.upper[i] {
            IndexExpr::PosInf => None,
            IndexExpr::NegInf => Some(0),
            IndexExpr::Affine { a, b } => (a <= 0).then_some(b + 1),
        };
        if let Some(v) = lo_stuck.or(hi_stuck) {
            x[i] = v;
            covering = Some(format!("x = {x:?} lies in no level"));
            break;
        }
    }
    report.push("covering", covering);
    report.push("union-closed", None);
    report.push("downward-closed", None);
}

/// Downward closure of a finite base, kept as its antichain of maximal
/// members.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Family {
    pub size: usize,
    pub maximal: Vec<u64>,
}

impl Family {
    pub fn contains(&self, s: u64) -> bool {
        self.maximal.iter().any(|&m| is_subset(s, m))
    }

    /// All members; ground sets up to 20 labels.
    pub fn members(&self) -> Result<Vec<u64>> {
        if self.size > 20 {
            return Err(Error::TooLarge(format!("enumerating subsets of {} labels", self.size)));
        }
        Ok((0..1u64 << self.size).filter(|&s| self.contains(s)).collect())
    }
}

pub fn generate_from_base(space: &GroundSpace, base: &[SetDescriptor]) -> Result<Family> {
    let size = space
        .size()
        .ok_or_else(|| Error::Unsupported("generated bornologies on lattices; use a chain".into()))?;
    let masks = base.iter().map(|s| mask_of(size, s)).collect::<Result<Vec<_>>>()?;
    Ok(family_of_masks(size, &masks))
}

pub fn family_of_masks(size: usize, base: &[u64]) -> Family {
    let mut maximal: Vec<u64> = Vec::new();
    for &s in base {
        if base.iter().any(|&t| t != s && is_subset(s, t)) || maximal.contains(&s) {
            continue;
        }
        maximal.push(s);
    }
    maximal.sort_unstable();
    Family { size, maximal }
}

/// Smallest family containing `base` that is closed under subsets and
/// pairwise unions, as a sorted member list.
pub fn bornology_closure(size: usize, base: &[u64]) -> Result<Vec<u64>> {
    if size > 16 {
        return Err(Error::TooLarge(format!("closing a family on {size} labels")));
    }
    let n = 1usize << size;
    let mut member = vec![false; n];
    member[0] = true;
    for &s in base {
        member[s as usize] = true;
    }
    loop {
        let mut changed = false;
        let current: Vec<usize> = (0..n).filter(|&s| member[s]).collect();
        for &s in &current {
            // every subset
            let mut sub = s;
            loop {
                if !member[sub] {
                    member[sub] = true;
                    changed = true;
                }
                if sub == 0 {
                    break;
                }
                sub = (sub - 1) & s;
            }
            for &t in &current {
                if !member[s | t] {
                    member[s | t] = true;
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    Ok((0..n).filter(|&s| member[s]).map(|s| s as u64).collect())
}

/// Exhaustive check of the three bornology axioms on an explicit family.
pub fn family_axioms(size: usize, members: &[u64]) -> AxiomReport {
    let mut report = AxiomReport { checks: Vec::new() };
    let set: std::collections::HashSet<u64> = members.iter().copied().collect();
    let union = members.iter().fold(0, |a, s| a | s);
    let missing = full_mask(size) & !union;
    report.push("covering", (missing != 0).then(|| format!("label {}", first_bit(missing))));
    let mut bad_union = None;
    'u: for &s in members {
        for &t in members {
            if !set.contains(&(s | t)) {
                bad_union = Some(format!("{} ∪ {}", descriptor_of(s), descriptor_of(t)));
                break 'u;
            }
        }
    }
    report.push("union-closed", bad_union);
    let mut bad_sub = None;
    'd: for &s in members {
        for i in 0..size {
            if s >> i & 1 == 1 && !set.contains(&(s & !(1 << i))) {
                bad_sub = Some(format!("{} minus label {i}", descriptor_of(s)));
                break 'd;
            }
        }
    }
    report.push("downward-closed", bad_sub);
    report
}

pub fn is_bounded(b: &BornologySpec, s: &SetDescriptor, budget: &Budget) -> Result<BoundVerdict> {
    if let (Some(d), Some(sd)) = (b.dim(), s.dim()) {
        check_dim(d, sd)?;
    }
    match b {
        BornologySpec::Maximal => Ok(BoundVerdict::BoundedAt(0)),
        BornologySpec::FiniteBase { size, base } => {
            let m = mask_of(*size, s)?;
            if base.iter().any(|&t| is_subset(m, t)) || m == 0 {
                Ok(BoundVerdict::BoundedAt(0))
            } else {
                Ok(BoundVerdict::Unbounded(Escape {
                    points: vec![vec![first_bit(m) as i64]],
                    start: None,
                    direction: None,
                }))
            }
        }
        BornologySpec::Chain(c) => chain_bounded(c, s, budget),
        BornologySpec::Preimage { offset, matrix, target } => preimage_bounded(offset, matrix, target, s, budget),
        BornologySpec::Image { offset, matrix, source } => image_bounded(offset, matrix, source, s, budget),
    }
}

/// Least `t >= 0` with `c0 + t·v` strictly beyond `end` on the given side.
fn escape_time(c0: i64, v: i64, end: End, upper: bool) -> Option<i64> {
    let e = end.finite()?;
    if upper {
        (v > 0).then(|| (Integer::div_floor(&(e - c0), &v) + 1).max(0))
    } else {
        (v < 0).then(|| (Integer::div_floor(&(c0 - e), &(-v)) + 1).max(0))
    }
}

fn ray_escape(c: &ChainShape, blocked: Blocked, start: Point, dir: Point, c0: i64, v: i64, budget: &Budget) -> Escape {
    let points = (0..=u64::from(budget.max_index))
        .filter_map(|m| {
            let end = if blocked.upper { c.upper[blocked.coord].eval(m) } else { c.lower[blocked.coord].eval(m) };
            let t = escape_time(c0, v, end, blocked.upper)?;
            Some(start.iter().zip(&dir).map(|(a, r)| a + t * r).collect())
        })
        .collect();
    Escape { points, start: Some(start), direction: Some(dir) }
}

fn fixed_escape(p: Point, budget: &Budget) -> Escape {
    Escape {
        points: vec![p; budget.max_index as usize + 1],
        start: None,
        direction: None,
    }
}

fn chain_bounded(c: &ChainShape, s: &SetDescriptor, budget: &Budget) -> Result<BoundVerdict> {
    match s {
        SetDescriptor::Union(members) => {
            let mut k = 0;
            for m in members {
                match chain_bounded(c, m, budget)? {
                    BoundVerdict::BoundedAt(j) => k = k.max(j),
                    other => return Ok(other),
                }
            }
            Ok(BoundVerdict::BoundedAt(k))
        }
        SetDescriptor::Sweep(sw) => sweep_bounded(c, sw, budget),
        _ => {
            let Some(h) = s.hull()? else { return Ok(BoundVerdict::BoundedAt(0)) };
            match c.least_index(&h)? {
                Ok(k) => Ok(BoundVerdict::BoundedAt(k)),
                Err(blocked) => Ok(BoundVerdict::Unbounded(box_escape(c, &h, blocked, budget))),
            }
        }
    }
}

fn box_escape(c: &ChainShape, h: &IntBox, blocked: Blocked, budget: &Budget) -> Escape {
    let iv = h.dims()[blocked.coord];
    let far = if blocked.upper { iv.hi } else { iv.lo };
    let mut start = h.anchor().expect("non-empty box");
    match far {
        End::Fin(v) => {
            start[blocked.coord] = v;
            fixed_escape(start, budget)
        }
        _ => {
            let mut dir = vec![0; h.dim()];
            let v = if blocked.upper { 1 } else { -1 };
            dir[blocked.coord] = v;
            let c0 = start[blocked.coord];
            ray_escape(c, blocked, start, dir, c0, v, budget)
        }
    }
}

fn sweep_bounded(c: &ChainShape, sw: &Sweep, budget: &Budget) -> Result<BoundVerdict> {
    let Some(l0) = (match sw.domain.feasible(DEFAULT_SEARCH_RADIUS)? {
        crate::lattice::Feasibility::Yes(l) => Some(l),
        crate::lattice::Feasibility::No => None,
        crate::lattice::Feasibility::Unknown => {
            return Ok(BoundVerdict::Inconclusive { window: budget.window, max_index: budget.max_index })
        }
    }) else {
        return Ok(BoundVerdict::BoundedAt(0));
    };
    if sw.base.is_empty() {
        return Ok(BoundVerdict::BoundedAt(0));
    }
    let h = sw.hull()?;
    match c.least_index(&h)? {
        Ok(k) => Ok(BoundVerdict::BoundedAt(k)),
        Err(blocked) => {
            let i = blocked.coord;
            let sign = if blocked.upper { 1 } else { -1 };
            let base_end = if blocked.upper { sw.base.dims()[i].hi } else { sw.base.dims()[i].lo };
            let mut start = sw.base.anchor().expect("non-empty");
            let moved = sw.matrix.apply(&l0)?;
            start.iter_mut().zip(&moved).for_each(|(a, b)| *a += b);
            if !base_end.is_finite() {
                let mut dir = vec![0; start.len()];
                dir[i] = sign;
                let c0 = start[i];
                return Ok(BoundVerdict::Unbounded(ray_escape(c, blocked, start, dir, c0, sign, budget)));
            }
            let obj: Vec<i64> = sw.matrix.row(i).iter().map(|v| v * sign).collect();
            match sw.domain.ray_towards(&obj) {
                Some(r) => {
                    let dir = sw.matrix.apply(&r)?;
                    let (c0, v) = (start[i], dir[i]);
                    Ok(BoundVerdict::Unbounded(ray_escape(c, blocked, start, dir, c0, v, budget)))
                }
                // the hull is finite on this side, so the chain itself never reaches it
                None => {
                    let target_end = if blocked.upper { h.dims()[i].hi } else { h.dims()[i].lo };
                    if let End::Fin(v) = target_end {
                        let probe = {
                            let mut p = start.clone();
                            p[i] = v;
                            p
                        };
                        if sw.contains(&probe, DEFAULT_SEARCH_RADIUS)?.is_yes() {
                            return Ok(BoundVerdict::Unbounded(fixed_escape(probe, budget)));
                        }
                    }
                    Ok(BoundVerdict::Inconclusive { window: budget.window, max_index: budget.max_index })
                }
            }
        }
    }
}

fn preimage_bounded(
    offset: &Point,
    matrix: &IntMatrix,
    target: &ChainShape,
    s: &SetDescriptor,
    budget: &Budget,
) -> Result<BoundVerdict> {
    let boxes = match s {
        SetDescriptor::Sweep(_) => {
            return Err(Error::Unsupported("swept sets against a preimage bornology".into()))
        }
        _ => s.boxes()?,
    };
    let mut k = 0;
    for b in boxes.iter().filter(|b| !b.is_empty()) {
        // offset + M·b is exactly boxed coordinatewise by its image hull
        let img = Region::from_box(b.clone())
            .image_hull(matrix)?
            .expect("non-empty box")
            .translate(offset)?;
        match target.least_index(&img)? {
            Ok(j) => k = k.max(j),
            Err(blocked) => {
                let i = blocked.coord;
                let sign = if blocked.upper { 1 } else { -1 };
                let start = b.anchor().expect("non-empty");
                let c0 = offset[i] + matrix.row(i).iter().zip(&start).map(|(a, x)| a * x).sum::<i64>();
                // a box direction along which row i moves the right way
                let dir = (0..b.dim()).find_map(|j| {
                    let a = matrix.get(i, j) * sign;
                    let iv = b.dims()[j];
                    let mut r = vec![0; b.dim()];
                    if a > 0 && iv.hi == End::PosInf {
                        r[j] = 1;
                        Some(r)
                    } else if a < 0 && iv.lo == End::NegInf {
                        r[j] = -1;
                        Some(r)
                    } else {
                        None
                    }
                });
                return Ok(BoundVerdict::Unbounded(match dir {
                    Some(r) => {
                        let v = matrix.row(i).iter().zip(&r).map(|(a, x)| a * x).sum();
                        ray_escape(target, blocked, start, r, c0, v, budget)
                    }
                    None => {
                        // finite box: the extreme corner on row i is never reached
                        let corner: Point = (0..b.dim())
                            .map(|j| {
                                let iv = b.dims()[j];
                                let pick_hi = matrix.get(i, j) * sign > 0;
                                let e = if pick_hi { iv.hi } else { iv.lo };
                                e.finite().unwrap_or(start[j])
                            })
                            .collect();
                        fixed_escape(corner, budget)
                    }
                }));
            }
        }
    }
    Ok(BoundVerdict::BoundedAt(k))
}

fn image_bounded(
    offset: &Point,
    matrix: &IntMatrix,
    source: &ChainShape,
    s: &SetDescriptor,
    budget: &Budget,
) -> Result<BoundVerdict> {
    let inconclusive = BoundVerdict::Inconclusive { window: budget.window, max_index: budget.max_index };
    let hnf = matrix.column_hnf();
    let shifted = |y: &[i64]| -> Point { y.iter().zip(offset).map(|(a, b)| a - b).collect() };
    if hnf.rank() == matrix.cols() {
        // injective parameterization: bounded iff the parameter set is
        let mut k = 0;
        for b in s.boxes()?.iter().filter(|b| !b.is_empty()) {
            let anchor = b.anchor().expect("non-empty");
            let on_orbit = |v: &[i64]| -> Result<bool> {
                let r = Region::new(matrix.clone(), IntBox::point(v))?;
                Ok(r.feasible(DEFAULT_SEARCH_RADIUS)?.witness().is_some())
            };
            if !on_orbit(&shifted(&anchor))? {
                return Ok(BoundVerdict::Unbounded(fixed_escape(anchor, budget)));
            }
            // a box with a free coordinate i stays on the orbit only if e_i is a period
            for (i, iv) in b.dims().iter().enumerate() {
                let mut e = vec![0; b.dim()];
                e[i] = 1;
                if iv.lo != iv.hi && !on_orbit(&e)? {
                    let mut p = anchor.clone();
                    p[i] += if iv.contains(anchor[i] + 1) { 1 } else { -1 };
                    return Ok(BoundVerdict::Unbounded(fixed_escape(p, budget)));
                }
            }
            let params = Region::new(matrix.clone(), b.translate(&offset.iter().map(|v| -v).collect::<Vec<_>>())?)?;
            let hull = params.hull()?;
            let Some(ph) = hull.hull else { continue };
            match source.least_index(&ph)? {
                Ok(j) => k = k.max(j),
                Err(blocked) => {
                    let j = blocked.coord;
                    let sign = if blocked.upper { 1 } else { -1 };
                    let Some(l0) = params.feasible(DEFAULT_SEARCH_RADIUS)?.witness().cloned() else {
                        return Ok(inconclusive);
                    };
                    match params.ray_along(j, sign) {
                        Some(r) => {
                            let dir = matrix.apply(&r)?;
                            let mut start = matrix.apply(&l0)?;
                            start.iter_mut().zip(offset).for_each(|(a, o)| *a += o);
                            let pts = ray_escape(source, blocked, l0.clone(), r.clone(), l0[j], r[j], budget);
                            let points = pts
                                .points
                                .iter()
                                .map(|l| {
                                    let mut y = matrix.apply(l).expect("dims");
                                    y.iter_mut().zip(offset).for_each(|(a, o)| *a += o);
                                    y
                                })
                                .collect();
                            return Ok(BoundVerdict::Unbounded(Escape {
                                points,
                                start: Some(start),
                                direction: Some(dir),
                            }));
                        }
                        None => return Ok(inconclusive),
                    }
                }
            }
        }
        return Ok(BoundVerdict::BoundedAt(k));
    }
    let Some(points) = s.finite_points()? else { return Ok(inconclusive) };
    let k_dim = matrix.cols();
    let stacked = matrix.stack(&IntMatrix::identity(k_dim))?;
    let mut k = 0;
    for y in points {
        let target = IntBox::point(&shifted(&y));
        let found = (0..=u64::from(budget.max_index)).find(|&m| {
            Region::new(stacked.clone(), crate::sets::concat_boxes(&target, &source.level(m)))
                .and_then(|r| r.feasible(DEFAULT_SEARCH_RADIUS))
                .map(|f| f.witness().is_some())
                .unwrap_or(false)
        });
        match found {
            Some(m) => k = k.max(m),
            None => return Ok(inconclusive),
        }
    }
    Ok(BoundVerdict::BoundedAt(k))
}

pub fn product_bornology(b1: &BornologySpec, b2: &BornologySpec) -> Result<BornologySpec> {
    match (b1, b2) {
        (BornologySpec::Maximal, BornologySpec::Maximal) => Ok(BornologySpec::Maximal),
        (BornologySpec::Chain(c1), BornologySpec::Chain(c2)) => Ok(BornologySpec::Chain(c1.product(c2))),
        (BornologySpec::FiniteBase { size: n1, base: s1 }, BornologySpec::FiniteBase { size: n2, base: s2 }) => {
            let size = n1 * n2;
            if size > 64 {
                return Err(Error::TooLarge(format!("product ground set of size {size}")));
            }
            // label (i, j) is i * n2 + j
            let mut base = Vec::new();
            for &a in s1 {
                for &b in s2 {
                    let mut m = 0u64;
                    for i in (0..*n1).filter(|i| a >> i & 1 == 1) {
                        for j in (0..*n2).filter(|j| b >> j & 1 == 1) {
                            m |= 1 << (i * n2 + j);
                        }
                    }
                    base.push(m);
                }
            }
            Ok(BornologySpec::FiniteBase { size, base })
        }
        _ => Err(Error::Unsupported(format!("product of `{b1}` and `{b2}`"))),
    }
}

pub fn inverse_image_bornology(f: &MapDescriptor, b: &BornologySpec) -> Result<BornologySpec> {
    match (f, b) {
        (MapDescriptor::Identity, _) => Ok(b.clone()),
        (MapDescriptor::Finite(map), BornologySpec::FiniteBase { size, base }) => {
            check_dim(*size, map.codomain)?;
            let base = base
                .iter()
                .map(|&t| {
                    map.table
                        .iter()
                        .enumerate()
                        .filter(|(_, &y)| t >> y & 1 == 1)
                        .fold(0u64, |m, (x, _)| m | 1 << x)
                })
                .collect();
            Ok(BornologySpec::FiniteBase { size: map.table.len(), base })
        }
        (MapDescriptor::Orbit { .. }, BornologySpec::Maximal) => Ok(BornologySpec::Maximal),
        (MapDescriptor::Orbit { offset, matrix }, BornologySpec::Chain(target)) => {
            check_dim(target.dim(), matrix.rows())?;
            check_dim(offset.len(), matrix.rows())?;
            Ok(simplify_preimage(offset, matrix, target).unwrap_or_else(|| BornologySpec::Preimage {
                offset: offset.clone(),
                matrix: matrix.clone(),
                target: target.clone(),
            }))
        }
        _ => Err(Error::Unsupported(format!("inverse image of `{b}` under {f:?}"))),
    }
}

/// Rewrites a one-parameter preimage as an affine chain when every row is
/// `0` or `±1` and each side has a dominating bound.
fn simplify_preimage(offset: &Point, matrix: &IntMatrix, target: &ChainShape) -> Option<BornologySpec> {
    if matrix.cols() != 1 {
        return None;
    }
    let mut lowers = Vec::new();
    let mut uppers = Vec::new();
    for i in 0..matrix.rows() {
        let (lo, hi) = (target.lower[i].shift(-offset[i]), target.upper[i].shift(-offset[i]));
        match matrix.get(i, 0) {
            0 => {
                // the orbit coordinate is constant and must sit in level 0
                if !Interval::new(lo.eval(0), hi.eval(0)).contains(0) {
                    return None;
                }
            }
            1 => {
                lowers.push(lo);
                uppers.push(hi);
            }
            -1 => {
                lowers.push(hi.neg());
                uppers.push(lo.neg());
            }
            _ => return None,
        }
    }
    let lower = dominant(&lowers, false)?;
    let upper = dominant(&uppers, true)?;
    Some(BornologySpec::Chain(ChainShape { lower: vec![lower], upper: vec![upper] }))
}

/// The bound that is tightest for every `m >= 0`, when one exists.
fn dominant(exprs: &[IndexExpr], upper: bool) -> Option<IndexExpr> {
    let key = |e: IndexExpr| if upper { e } else { e.neg() };
    let mut best = if upper { IndexExpr::PosInf } else { IndexExpr::NegInf };
    for &e in exprs {
        let (kb, ke) = (key(best), key(e));
        let e_tighter = match (kb, ke) {
            (_, IndexExpr::PosInf) => false,
            (IndexExpr::PosInf, _) => true,
            (_, IndexExpr::NegInf) => true,
            (IndexExpr::NegInf, _) => false,
            (IndexExpr::Affine { a: a1, b: b1 }, IndexExpr::Affine { a: a2, b: b2 }) => {
                if a2 <= a1 && b2 <= b1 {
                    true
                } else if a1 <= a2 && b1 <= b2 {
                    false
                } else {
                    return None;
                }
            }
        };
        if e_tighter {
            best = e;
        }
    }
    Some(best)
}

pub fn image_bornology(pi: &MapDescriptor, b: &BornologySpec) -> Result<BornologySpec> {
    match (pi, b) {
        (MapDescriptor::Identity, _) => Ok(b.clone()),
        (MapDescriptor::Finite(map), BornologySpec::FiniteBase { size, base }) => {
            check_dim(*size, map.table.len())?;
            let hit = map.table.iter().fold(0u64, |m, &y| m | 1 << y);
            let missing = full_mask(map.codomain) & !hit;
            if missing != 0 {
                return Err(Error::NotSurjective(format!("label {} has no preimage", first_bit(missing))));
            }
            let base = base
                .iter()
                .map(|&s| {
                    map.table
                        .iter()
                        .enumerate()
                        .filter(|(x, _)| s >> x & 1 == 1)
                        .fold(0u64, |m, (_, &y)| m | 1 << y)
                })
                .collect();
            Ok(BornologySpec::FiniteBase { size: map.codomain, base })
        }
        (MapDescriptor::Orbit { .. }, BornologySpec::Maximal) => Ok(BornologySpec::Maximal),
        (MapDescriptor::Orbit { offset, matrix }, BornologySpec::Chain(source)) => {
            check_dim(source.dim(), matrix.cols())?;
            check_dim(offset.len(), matrix.rows())?;
            Ok(BornologySpec::Image { offset: offset.clone(), matrix: matrix.clone(), source: source.clone() })
        }
        _ => Err(Error::Unsupported(format!("image of `{b}` under {pi:?}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn budget() -> Budget {
        Budget::new(32, 8)
    }

    fn quadrant_chain() -> ChainShape {
        ChainShape::new(vec![IndexExpr::NegInf; 2], vec![IndexExpr::affine(1, 0); 2]).unwrap()
    }

    #[test]
    fn index_expr_round_trip() {
        for s in ["m", "-m", "2*m+1", "-3*m-2", "5", "-inf", "inf", "0"] {
            let e: IndexExpr = s.parse().unwrap();
            assert_eq!(e.to_string(), s);
        }
        assert_eq!("2m - 1".parse::<IndexExpr>(), Ok(IndexExpr::affine(2, -1)));
        assert!("m*m".parse::<IndexExpr>().is_err());
    }

    #[test]
    fn chain_axioms() {
        assert!(bornology_axiom_check(&BornologySpec::cubes(1)).passed());
        let half = BornologySpec::Chain(
            ChainShape::new(vec![IndexExpr::constant(0)], vec![IndexExpr::affine(1, 0)]).unwrap(),
        );
        let report = bornology_axiom_check(&half);
        let cover = report.checks.iter().find(|c| c.axiom == "covering").unwrap();
        assert_eq!(cover.witness.as_deref(), Some("x = [-1] lies in no level"));
    }

    #[test]
    fn base_axioms() {
        let b = BornologySpec::FiniteBase { size: 3, base: vec![0b001, 0b010] };
        let report = bornology_axiom_check(&b);
        assert!(!report.passed());
        assert_eq!(report.checks[0].witness.as_deref(), Some("label 2 is not covered"));
    }

    #[test]
    fn generated_families() {
        let space = GroundSpace::finite(3);
        let fam = generate_from_base(&space, &[descriptor_of(0b001), descriptor_of(0b110)]).unwrap();
        // brute force: all subsets contained in some base member
        let expected: Vec<u64> = (0..8u64).filter(|&s| is_subset(s, 0b001) || is_subset(s, 0b110)).collect();
        assert_eq!(fam.members().unwrap(), expected);
        assert_eq!(expected, vec![0, 1, 2, 4, 6]);
        let two = generate_from_base(&GroundSpace::finite(2), &[descriptor_of(0b11)]).unwrap();
        assert_eq!(two.members().unwrap().len(), 4);
        assert!(generate_from_base(&GroundSpace::lattice(1), &[]).is_err());
    }

    #[test]
    fn covering_bases_close_to_power_set() {
        let closed = bornology_closure(3, &[0b001, 0b110]).unwrap();
        assert_eq!(closed.len(), 8);
        assert!(family_axioms(3, &closed).passed());
    }

    #[test]
    fn chain_boundedness_examples() {
        let cubes = BornologySpec::cubes(1);
        let s = SetDescriptor::Box(IntBox::from_bounds(&[(4, 6)]));
        assert_eq!(is_bounded(&cubes, &s, &budget()).unwrap(), BoundVerdict::BoundedAt(6));
        let ray = SetDescriptor::Box(IntBox::new(vec![Interval::new(End::NegInf, End::Fin(0))]));
        match is_bounded(&cubes, &ray, &budget()).unwrap() {
            BoundVerdict::Unbounded(e) => {
                assert_eq!(e.direction, Some(vec![-1]));
                for (m, p) in e.points.iter().enumerate() {
                    assert!(ray.contains(p).unwrap());
                    assert!(!cubes.level(m as u64).unwrap().unwrap().contains(p).unwrap());
                }
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn quadrant_chain_least_index() {
        let b = BornologySpec::Chain(quadrant_chain());
        let s = IntBox::new(vec![
            Interval::new(End::NegInf, End::Fin(3)),
            Interval::new(End::NegInf, End::Fin(-1)),
        ]);
        let v = is_bounded(&b, &SetDescriptor::Box(s.clone()), &budget()).unwrap();
        assert_eq!(v, BoundVerdict::BoundedAt(3));
        // window cross-check: level 2 misses a point of s, level 3 does not
        let window = IntBox::cube(2, 10);
        let fails = |m: u64| {
            let level = quadrant_chain().level(m);
            window
                .points()
                .unwrap()
                .into_iter()
                .filter(|p| s.contains(p).unwrap() && !level.contains(p).unwrap())
                .count()
        };
        assert!(fails(2) > 0);
        assert_eq!(fails(3), 0);
    }

    #[test]
    fn monotone_in_the_queried_set() {
        let cubes = BornologySpec::cubes(2);
        let small = SetDescriptor::Box(IntBox::from_bounds(&[(0, 2), (-1, 1)]));
        let big = SetDescriptor::Box(IntBox::from_bounds(&[(-3, 2), (-1, 4)]));
        let k1 = is_bounded(&cubes, &small, &budget()).unwrap().index().unwrap();
        let k2 = is_bounded(&cubes, &big, &budget()).unwrap().index().unwrap();
        assert!(k1 <= k2);
    }

    #[test]
    fn products() {
        let p = product_bornology(&BornologySpec::cubes(1), &BornologySpec::cubes(1)).unwrap();
        assert_eq!(p, BornologySpec::cubes(2));
        assert_eq!(
            product_bornology(&BornologySpec::Maximal, &BornologySpec::Maximal).unwrap(),
            BornologySpec::Maximal
        );
        let a = BornologySpec::FiniteBase { size: 1, base: vec![0b1] };
        let xy = BornologySpec::FiniteBase { size: 2, base: vec![0b11] };
        assert_eq!(
            product_bornology(&a, &xy).unwrap(),
            BornologySpec::FiniteBase { size: 2, base: vec![0b11] }
        );
        assert!(product_bornology(&a, &BornologySpec::Maximal).is_err());
    }

    #[test]
    fn orbit_preimage_is_interval_chain() {
        let orbit = MapDescriptor::Orbit {
            offset: vec![0, 0],
            matrix: IntMatrix::new(2, 1, vec![1, -1]).unwrap(),
        };
        let pre = inverse_image_bornology(&orbit, &BornologySpec::Chain(quadrant_chain())).unwrap();
        assert_eq!(pre, BornologySpec::cubes(1));
        // window cross-check of the closed form
        for m in 0..5u64 {
            let level = pre.level(m).unwrap().unwrap();
            for n in -12..=12i64 {
                let direct = quadrant_chain().level(m).contains(&[n, -n]).unwrap();
                assert_eq!(level.contains(&[n]).unwrap(), direct);
            }
        }
    }

    #[test]
    fn general_preimage_uses_regions() {
        let orbit = MapDescriptor::Orbit {
            offset: vec![1],
            matrix: IntMatrix::new(1, 1, vec![2]).unwrap(),
        };
        let pre = inverse_image_bornology(&orbit, &BornologySpec::cubes(1)).unwrap();
        assert!(matches!(pre, BornologySpec::Preimage { .. }));
        let level = pre.level(4).unwrap().unwrap();
        let inside: Vec<i64> = (-6..=6).filter(|&l| level.contains(&[l]).unwrap()).collect();
        assert_eq!(inside, vec![-2, -1, 0, 1]);
        let s = SetDescriptor::Box(IntBox::from_bounds(&[(0, 3)]));
        assert_eq!(is_bounded(&pre, &s, &budget()).unwrap(), BoundVerdict::BoundedAt(7));
    }

    #[test]
    fn finite_maps() {
        let f = MapDescriptor::Finite(FiniteMap { codomain: 1, table: vec![0, 0] });
        let x = BornologySpec::FiniteBase { size: 1, base: vec![0b1] };
        assert_eq!(
            inverse_image_bornology(&f, &x).unwrap(),
            BornologySpec::FiniteBase { size: 2, base: vec![0b11] }
        );
        let a = BornologySpec::FiniteBase { size: 2, base: vec![0b01] };
        assert_eq!(image_bornology(&f, &a).unwrap(), x);
        let g = MapDescriptor::Finite(FiniteMap { codomain: 2, table: vec![0, 0] });
        assert!(matches!(image_bornology(&g, &a), Err(Error::NotSurjective(_))));
    }

    #[test]
    fn orbit_image_segments() {
        let orbit = MapDescriptor::Orbit {
            offset: vec![0, 0],
            matrix: IntMatrix::new(2, 1, vec![1, -1]).unwrap(),
        };
        let img = image_bornology(&orbit, &BornologySpec::cubes(1)).unwrap();
        let level = img.level(2).unwrap().unwrap();
        assert!(level.contains(&[2, -2]).unwrap());
        assert!(!level.contains(&[3, -3]).unwrap());
        assert!(!level.contains(&[1, 1]).unwrap());
        let seg = SetDescriptor::points(vec![vec![3, -3], vec![-1, 1]]);
        assert_eq!(is_bounded(&img, &seg, &budget()).unwrap(), BoundVerdict::BoundedAt(3));
        let off = SetDescriptor::points(vec![vec![1, 1]]);
        assert!(is_bounded(&img, &off, &budget()).unwrap().is_unbounded());
    }
}
