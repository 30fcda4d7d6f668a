//! Bornological groups and actions, transporters `L_{B,B'}`, the properness
//! classification, equi-controlledness, coarse transitivity and the orbit
//! bornologies.

use std::fmt;

use rayon::prelude::*;

use crate::bornology::{
    descriptor_of, inverse_image_bornology, is_bounded, mask_of, BornologySpec, BoundVerdict, Escape, MapDescriptor,
};
use crate::coarse::{
    bornology_level, close_finite_base, entourage_leq, induced_levels, ChainKind, ChainStructure, CoarseStructureSpec,
    Entourage, OrbitRule, Relation,
};
use crate::error::{check_dim, Error, Result};
use crate::lattice::{covers, Coverage, Feasibility, IntMatrix, Polyhedron, Region, DEFAULT_SEARCH_RADIUS};
use crate::sets::{difference_box, GroundSpace, IntBox, Point, SetDescriptor, Sweep};
use crate::{Budget, Truth};

/// `L_{B1,B2} = {l : l·B1 ∩ B2 ≠ ∅} = {l : M l ∈ B2 - B1}`.
pub fn transporter_region(m: &IntMatrix, b1: &IntBox, b2: &IntBox) -> Result<Region> {
    Region::new(m.clone(), difference_box(b2, b1)?)
}

/// A finite group given by its multiplication table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteGroup {
    pub mul: Vec<Vec<usize>>,
    pub inv: Vec<usize>,
    pub identity: usize,
}

impl FiniteGroup {
    pub fn new(mul: Vec<Vec<usize>>) -> Result<Self> {
        let n = mul.len();
        if n == 0 || n > 64 {
            return Err(Error::Invalid(format!("group of order {n}")));
        }
        if mul.iter().any(|row| row.len() != n || row.iter().any(|&v| v >= n)) {
            return Err(Error::Invalid("multiplication table is not square over the elements".into()));
        }
        let identity = (0..n)
            .find(|&e| (0..n).all(|g| mul[e][g] == g && mul[g][e] == g))
            .ok_or_else(|| Error::Invalid("no identity element".into()))?;
        let inv = (0..n)
            .map(|g| {
                (0..n)
                    .find(|&h| mul[g][h] == identity && mul[h][g] == identity)
                    .ok_or_else(|| Error::Invalid(format!("element {g} has no inverse")))
            })
            .collect::<Result<Vec<_>>>()?;
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    if mul[mul[a][b]][c] != mul[a][mul[b][c]] {
                        return Err(Error::Invalid(format!("not associative at ({a}, {b}, {c})")));
                    }
                }
            }
        }
        Ok(FiniteGroup { mul, inv, identity })
    }

    pub fn cyclic(n: usize) -> Result<Self> {
        FiniteGroup::new((0..n).map(|a| (0..n).map(|b| (a + b) % n).collect()).collect())
    }

    pub fn order(&self) -> usize {
        self.mul.len()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GroupKind {
    Finite(FiniteGroup),
    /// ℤ^k under addition.
    Lattice { rank: usize },
}

/// A group with a bornology on its underlying set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupSpec {
    pub kind: GroupKind,
    pub bornology: BornologySpec,
}

impl GroupSpec {
    pub fn lattice(rank: usize, bornology: BornologySpec) -> Result<Self> {
        if let Some(d) = bornology.dim() {
            check_dim(rank, d)?;
        }
        if !matches!(bornology, BornologySpec::Maximal | BornologySpec::Chain(_)) {
            return Err(Error::Unsupported(format!("group bornology `{bornology}` on a lattice")));
        }
        Ok(GroupSpec { kind: GroupKind::Lattice { rank }, bornology })
    }

    pub fn finite(group: FiniteGroup, bornology: BornologySpec) -> Result<Self> {
        match &bornology {
            BornologySpec::Maximal => {}
            BornologySpec::FiniteBase { size, .. } => check_dim(group.order(), *size)?,
            other => return Err(Error::Unsupported(format!("group bornology `{other}` on a finite group"))),
        }
        Ok(GroupSpec { kind: GroupKind::Finite(group), bornology })
    }

    pub fn rank(&self) -> Option<usize> {
        match self.kind {
            GroupKind::Lattice { rank } => Some(rank),
            GroupKind::Finite(_) => None,
        }
    }

    pub fn order(&self) -> Option<usize> {
        match &self.kind {
            GroupKind::Finite(g) => Some(g.order()),
            GroupKind::Lattice { .. } => None,
        }
    }

    /// The bornology's levels: chain levels up to the budget, or the base
    /// members of a finite group.
    pub fn levels(&self, budget: &Budget) -> Result<Vec<SetDescriptor>> {
        match &self.kind {
            GroupKind::Lattice { rank } => (0..=u64::from(budget.max_index))
                .map(|i| bornology_level(&self.bornology, *rank, i))
                .collect(),
            GroupKind::Finite(g) => Ok(finite_levels(&self.bornology, g.order())),
        }
    }
}

fn finite_levels(b: &BornologySpec, size: usize) -> Vec<SetDescriptor> {
    match b {
        BornologySpec::FiniteBase { base, .. } => base.iter().map(|&m| descriptor_of(m)).collect(),
        _ => vec![SetDescriptor::points((0..size as i64).map(|v| vec![v]).collect())],
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ActionRule {
    /// `l·x = x + M l`.
    Translation(IntMatrix),
    /// `l·x = A x + M l` with `(A x)_i = signs[i]·x[perm[i]]`; only the
    /// window oracle evaluates these.
    SignedTranslation { perm: Vec<usize>, signs: Vec<i64>, matrix: IntMatrix },
    /// `perms[g][x]` is `g·x`.
    Permutation(Vec<Vec<usize>>),
}

/// A group acting on a space, each carrying a bornology.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActionInstance {
    pub name: String,
    pub group: GroupSpec,
    pub space: GroundSpace,
    pub rule: ActionRule,
    pub bornology: BornologySpec,
}

impl ActionInstance {
    pub fn new(
        name: impl Into<String>,
        group: GroupSpec,
        space: GroundSpace,
        rule: ActionRule,
        bornology: BornologySpec,
    ) -> Result<Self> {
        space.validate()?;
        match (&group.kind, &space, &rule) {
            (GroupKind::Lattice { rank }, GroundSpace::Lattice { dim }, ActionRule::Translation(m)) => {
                check_dim(*dim, m.rows())?;
                check_dim(*rank, m.cols())?;
            }
            (GroupKind::Lattice { rank }, GroundSpace::Lattice { dim }, ActionRule::SignedTranslation { perm, signs, matrix }) => {
                check_dim(*dim, matrix.rows())?;
                check_dim(*rank, matrix.cols())?;
                check_dim(*dim, perm.len())?;
                check_dim(*dim, signs.len())?;
                let mut seen = perm.clone();
                seen.sort_unstable();
                if seen != (0..*dim).collect::<Vec<_>>() || signs.iter().any(|s| s.abs() != 1) {
                    return Err(Error::Invalid("not a signed permutation".into()));
                }
            }
            (GroupKind::Finite(g), GroundSpace::Finite { .. }, ActionRule::Permutation(perms)) => {
                let n = space.size().expect("finite");
                check_dim(g.order(), perms.len())?;
                for (i, p) in perms.iter().enumerate() {
                    let mut seen = p.clone();
                    seen.sort_unstable();
                    if seen != (0..n).collect::<Vec<_>>() {
                        return Err(Error::Invalid(format!("element {i} does not permute the labels")));
                    }
                }
                for a in 0..g.order() {
                    for b in 0..g.order() {
                        if (0..n).any(|x| perms[g.mul[a][b]][x] != perms[a][perms[b][x]]) {
                            return Err(Error::Invalid(format!("not a homomorphism at ({a}, {b})")));
                        }
                    }
                }
            }
            _ => return Err(Error::Invalid("group, space and rule do not match".into())),
        }
        match (&space, &bornology) {
            (_, BornologySpec::Maximal) => {}
            (GroundSpace::Lattice { dim }, BornologySpec::Chain(c)) => check_dim(*dim, c.dim())?,
            (GroundSpace::Finite { .. }, BornologySpec::FiniteBase { size, .. }) => {
                check_dim(space.size().expect("finite"), *size)?
            }
            (_, other) => return Err(Error::Unsupported(format!("space bornology `{other}`"))),
        }
        Ok(ActionInstance { name: name.into(), group, space, rule, bornology })
    }

    pub fn dim(&self) -> usize {
        self.space.dim()
    }

    pub fn matrix(&self) -> Option<&IntMatrix> {
        match &self.rule {
            ActionRule::Translation(m) => Some(m),
            _ => None,
        }
    }

    /// Whether the exact box calculus applies.
    pub fn is_exact(&self) -> bool {
        !matches!(self.rule, ActionRule::SignedTranslation { .. })
    }

    fn exact_matrix(&self) -> Result<&IntMatrix> {
        match &self.rule {
            ActionRule::Translation(m) => Ok(m),
            ActionRule::SignedTranslation { .. } => {
                Err(Error::Unsupported("signed-permutation rules are evaluated by the window oracle only".into()))
            }
            ActionRule::Permutation(_) => Err(Error::Unsupported("expected a translation rule".into())),
        }
    }

    pub fn act(&self, l: &[i64], x: &[i64]) -> Result<Point> {
        match &self.rule {
            ActionRule::Translation(m) => {
                check_dim(m.rows(), x.len())?;
                Ok(x.iter().zip(m.apply(l)?).map(|(a, b)| a + b).collect())
            }
            ActionRule::SignedTranslation { perm, signs, matrix } => {
                check_dim(matrix.rows(), x.len())?;
                let moved = matrix.apply(l)?;
                Ok((0..x.len()).map(|i| signs[i] * x[perm[i]] + moved[i]).collect())
            }
            ActionRule::Permutation(perms) => {
                let (g, v) = (as_label(l, perms.len())?, as_label(x, perms[0].len())?);
                Ok(vec![perms[g][v] as i64])
            }
        }
    }

    pub fn orbit_rule(&self) -> Result<OrbitRule> {
        match &self.rule {
            ActionRule::Translation(m) => Ok(OrbitRule::Translation(m.clone())),
            ActionRule::Permutation(p) => Ok(OrbitRule::Permutation(p.clone())),
            ActionRule::SignedTranslation { .. } => self.exact_matrix().map(|m| OrbitRule::Translation(m.clone())),
        }
    }

    /// Space bornology levels: chain levels up to the budget, or the base
    /// members on a finite space.
    pub fn space_levels(&self, budget: &Budget) -> Result<Vec<SetDescriptor>> {
        match &self.space {
            GroundSpace::Lattice { dim } => (0..=u64::from(budget.max_index))
                .map(|j| bornology_level(&self.bornology, *dim, j))
                .collect(),
            GroundSpace::Finite { .. } => Ok(finite_levels(&self.bornology, self.space.size().expect("finite"))),
        }
    }
}

fn as_label(x: &[i64], n: usize) -> Result<usize> {
    check_dim(1, x.len())?;
    usize::try_from(x[0])
        .ok()
        .filter(|&v| v < n)
        .ok_or_else(|| Error::Invalid(format!("label {} outside {n}", x[0])))
}

/// One map of a compatibility report.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MapCheck {
    pub map: &'static str,
    pub passed: Truth,
    /// `(i, j, k)`: the image of the level pair `(i, j)` lies in level `k`.
    pub indices: Vec<(u64, u64, Option<u64>)>,
    pub witness: Option<Escape>,
    pub note: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompatibilityReport {
    pub checks: Vec<MapCheck>,
}

impl CompatibilityReport {
    pub fn passed(&self) -> Truth {
        self.checks.iter().fold(Truth::Yes, |acc, c| acc.and(c.passed))
    }
}

fn verdict_truth(v: &BoundVerdict) -> Truth {
    match v {
        BoundVerdict::BoundedAt(_) => Truth::Yes,
        BoundVerdict::Unbounded(_) => Truth::No,
        BoundVerdict::Inconclusive { .. } => Truth::Unknown,
    }
}

fn vacuous(map: &'static str, note: &str) -> MapCheck {
    MapCheck { map, passed: Truth::Yes, indices: Vec::new(), witness: None, note: note.into() }
}

/// Folds per-pair verdicts into one check, keeping the first escape.
fn collect_check(map: &'static str, results: Vec<(u64, u64, BoundVerdict)>) -> MapCheck {
    let mut passed = Truth::Yes;
    let mut witness = None;
    let mut indices = Vec::new();
    for (i, j, v) in results {
        passed = passed.and(verdict_truth(&v));
        if let (None, BoundVerdict::Unbounded(e)) = (&witness, &v) {
            witness = Some(e.clone());
        }
        indices.push((i, j, v.index()));
    }
    MapCheck { map, passed, indices, witness, note: String::new() }
}

/// Multiplication and inversion are bornological.
pub fn group_bornological_check(g: &GroupSpec, budget: &Budget) -> Result<CompatibilityReport> {
    let rank = match (&g.kind, &g.bornology) {
        (GroupKind::Finite(_), _) => {
            return Ok(CompatibilityReport {
                checks: vec![vacuous("multiplication", "finite group"), vacuous("inversion", "finite group")],
            })
        }
        (_, BornologySpec::Maximal) => {
            return Ok(CompatibilityReport {
                checks: vec![vacuous("multiplication", "maximal bornology"), vacuous("inversion", "maximal bornology")],
            })
        }
        (GroupKind::Lattice { rank }, _) => *rank,
    };
    let levels: Vec<IntBox> = g.levels(budget)?.iter().map(|s| s.hull().map(|h| h.unwrap_or(IntBox::empty(rank)))).collect::<Result<_>>()?;
    let n = levels.len() as u64;
    let mut sums = Vec::new();
    for i in 0..n {
        for j in 0..n {
            let s = SetDescriptor::Box(levels[i as usize].minkowski(&levels[j as usize]));
            sums.push((i, j, is_bounded(&g.bornology, &s, budget)?));
        }
    }
    let mut negs = Vec::new();
    for i in 0..n {
        let s = SetDescriptor::Box(levels[i as usize].neg());
        negs.push((i, i, is_bounded(&g.bornology, &s, budget)?));
    }
    Ok(CompatibilityReport { checks: vec![collect_check("multiplication", sums), collect_check("inversion", negs)] })
}

/// The action map `L × X → X` is bornological for the product bornology.
pub fn action_bornological_check(a: &ActionInstance, budget: &Budget) -> Result<CompatibilityReport> {
    let m = match &a.rule {
        ActionRule::Permutation(_) => {
            return Ok(CompatibilityReport { checks: vec![vacuous("action", "finite space")] })
        }
        _ => a.exact_matrix()?,
    };
    if a.bornology == BornologySpec::Maximal {
        return Ok(CompatibilityReport { checks: vec![vacuous("action", "maximal space bornology")] });
    }
    let groups = a.group.levels(budget)?;
    let spaces = a.space_levels(budget)?;
    let mut results = Vec::new();
    for (i, d) in groups.iter().enumerate() {
        let dh = d.hull()?.unwrap_or(IntBox::empty(m.cols()));
        let moved = Region::from_box(dh).image_hull(m)?;
        for (j, b) in spaces.iter().enumerate() {
            let image = match (&moved, b.hull()?) {
                (Some(mv), Some(bh)) => SetDescriptor::Box(bh.minkowski(mv)),
                _ => SetDescriptor::empty(),
            };
            results.push((i as u64, j as u64, is_bounded(&a.bornology, &image, budget)?));
        }
    }
    Ok(CompatibilityReport { checks: vec![collect_check("action", results)] })
}

/// A transporter set `L_{B,B'}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TransporterDescriptor {
    /// `{l : M l ∈ C}` for some constraint box `C` in the list.
    Lattice { matrix: IntMatrix, constraints: Vec<IntBox> },
    Explicit(Vec<usize>),
}

impl TransporterDescriptor {
    pub fn contains(&self, l: &[i64]) -> Result<bool> {
        match self {
            TransporterDescriptor::Lattice { matrix, constraints } => {
                let v = matrix.apply(l)?;
                for c in constraints {
                    if c.contains(&v)? {
                        return Ok(true);
                    }
                }
                Ok(false)
            }
            TransporterDescriptor::Explicit(e) => Ok(l.len() == 1 && e.iter().any(|&g| g as i64 == l[0])),
        }
    }

    pub fn regions(&self) -> Result<Vec<Region>> {
        match self {
            TransporterDescriptor::Lattice { matrix, constraints } => {
                constraints.iter().map(|c| Region::new(matrix.clone(), c.clone())).collect()
            }
            TransporterDescriptor::Explicit(_) => Ok(Vec::new()),
        }
    }

    pub fn is_empty(&self) -> Result<Truth> {
        match self {
            TransporterDescriptor::Explicit(e) => Ok(Truth::from_bool(e.is_empty())),
            TransporterDescriptor::Lattice { .. } => {
                let mut acc = Truth::Yes;
                for r in self.regions()? {
                    acc = acc.and(match r.feasible(DEFAULT_SEARCH_RADIUS)? {
                        Feasibility::Yes(_) => Truth::No,
                        Feasibility::No => Truth::Yes,
                        Feasibility::Unknown => Truth::Unknown,
                    });
                }
                Ok(acc)
            }
        }
    }
}

impl fmt::Display for TransporterDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TransporterDescriptor::Lattice { matrix, constraints } => {
                let parts: Vec<String> = constraints.iter().map(|c| c.to_string()).collect();
                write!(f, "{{l : {matrix:?} l in {}}}", if parts.is_empty() { "{}".into() } else { parts.join(" u ") })
            }
            TransporterDescriptor::Explicit(e) => write!(f, "{e:?}"),
        }
    }
}

/// `L_{B,B'} = {l : l·B ∩ B' ≠ ∅}`.
pub fn transporter(a: &ActionInstance, b: &SetDescriptor, b2: &SetDescriptor) -> Result<TransporterDescriptor> {
    match &a.rule {
        ActionRule::Permutation(perms) => {
            let n = a.space.size().expect("finite");
            let (m1, m2) = (mask_of(n, b)?, mask_of(n, b2)?);
            let hits = (0..perms.len())
                .filter(|&g| (0..n).any(|x| m1 >> x & 1 == 1 && m2 >> perms[g][x] & 1 == 1))
                .collect();
            Ok(TransporterDescriptor::Explicit(hits))
        }
        _ => {
            let m = a.exact_matrix()?;
            if b.is_empty()? || b2.is_empty()? {
                return Ok(TransporterDescriptor::Explicit(Vec::new()));
            }
            let mut constraints = Vec::new();
            for p in b.boxes()? {
                check_dim(m.rows(), p.dim())?;
                for q in b2.boxes()? {
                    let c = difference_box(&q, &p)?;
                    if !c.is_empty() && !constraints.contains(&c) {
                        constraints.push(c);
                    }
                }
            }
            Ok(TransporterDescriptor::Lattice { matrix: m.clone(), constraints })
        }
    }
}

/// The region `{l : M l ∈ C}` as a set on the group lattice.
pub fn region_set(r: &Region) -> SetDescriptor {
    let k = r.matrix.cols();
    SetDescriptor::Sweep(Sweep { base: IntBox::point(&vec![0; k]), matrix: IntMatrix::identity(k), domain: r.clone() })
}

/// Whether `t` is bounded in the group bornology.
pub fn transporter_bounded(a: &ActionInstance, t: &TransporterDescriptor, budget: &Budget) -> Result<BoundVerdict> {
    if a.group.bornology == BornologySpec::Maximal {
        return Ok(BoundVerdict::BoundedAt(0));
    }
    match t {
        TransporterDescriptor::Explicit(e) => {
            let s = SetDescriptor::points(e.iter().map(|&g| vec![g as i64]).collect());
            is_bounded(&a.group.bornology, &s, budget)
        }
        TransporterDescriptor::Lattice { .. } => {
            let mut k = 0;
            for r in t.regions()? {
                match is_bounded(&a.group.bornology, &region_set(&r), budget)? {
                    BoundVerdict::BoundedAt(j) => k = k.max(j),
                    other => return Ok(other),
                }
            }
            Ok(BoundVerdict::BoundedAt(k))
        }
    }
}

/// Where a negative classification flag came from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlagWitness {
    /// Source set: a space level index, or a sample point.
    pub source: WitnessSource,
    /// Target space level index.
    pub target: Option<u64>,
    pub escape: Escape,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum WitnessSource {
    Level(u64),
    Point(Point),
}

impl fmt::Display for FlagWitness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.source {
            WitnessSource::Level(i) => write!(f, "levels ({i}, {})", self.target.unwrap_or(*i))?,
            WitnessSource::Point(x) => match self.target {
                Some(j) => write!(f, "point {x:?} into level {j}")?,
                None => write!(f, "stabilizer of {x:?}")?,
            },
        }
        if let Some(d) = &self.escape.direction {
            write!(f, ", direction {d:?}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Flag {
    pub holds: Truth,
    /// The verdict covers every level and point, not just those sampled.
    pub universal: bool,
    pub witness: Option<FlagWitness>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Classification {
    pub b_proper: Flag,
    pub weakly_b_proper: Flag,
    pub bounded_isotropy: Flag,
}

/// Whether every `r` in the subspace `{r : M_F r = 0}` (for `constrained`
/// rows) or the cone `{r : M r ∈ rec}` vanishes on the coordinates where the
/// group levels have a finite end of the given kind.
fn cone_inside_group(cone: &Polyhedron, group: &BornologySpec, k: usize) -> Option<bool> {
    let BornologySpec::Chain(c) = group else { return Some(true) };
    for j in 0..k {
        let (lo, hi) = cone.coordinate_range(j)?;
        if c.upper[j].is_finite() && hi.is_none_or(|v| v > 0.into()) {
            return Some(false);
        }
        if c.lower[j].is_finite() && lo.is_none_or(|v| v < 0.into()) {
            return Some(false);
        }
    }
    Some(true)
}

/// Recession cone of `{l : M l ∈ C}` for `C` with the finiteness pattern of
/// `pattern`.
fn pattern_cone(m: &IntMatrix, pattern: &IntBox) -> Polyhedron {
    Region { matrix: m.clone(), constraint: pattern.clone() }.recession_cone()
}

/// Canonical weak-properness samples: the origin and one point per coset of
/// the orbit lattice met inside a small cube, at most 32.
pub fn sample_points(a: &ActionInstance, budget: &Budget) -> Result<Vec<Point>> {
    if let Some(n) = a.space.size() {
        return Ok((0..n as i64).map(|v| vec![v]).collect());
    }
    let m = a.exact_matrix()?;
    let d = a.dim();
    let r = budget.window.clamp(0, if d <= 2 { 3 } else { 1 });
    let mut grid = IntBox::cube(d, r).points()?;
    grid.sort_by_key(|p| (p.iter().map(|v| v.abs()).max().unwrap_or(0), p.clone()));
    let mut kept: Vec<Point> = Vec::new();
    for p in grid {
        if kept.len() == 32 {
            break;
        }
        let mut fresh = true;
        for q in &kept {
            let delta: Point = p.iter().zip(q).map(|(a, b)| a - b).collect();
            if !Region::new(m.clone(), IntBox::point(&delta))?.feasible(DEFAULT_SEARCH_RADIUS)?.truth().is_no() {
                fresh = false;
                break;
            }
        }
        if fresh {
            kept.push(p);
        }
    }
    Ok(kept)
}

fn fold_flag(results: Vec<(WitnessSource, Option<u64>, BoundVerdict)>, universal: Option<bool>) -> Flag {
    let mut holds = Truth::Yes;
    let mut witness = None;
    for (source, target, v) in results {
        holds = holds.and(verdict_truth(&v));
        if let (None, BoundVerdict::Unbounded(escape)) = (&witness, v) {
            witness = Some(FlagWitness { source, target, escape });
        }
    }
    match (holds, universal) {
        // the cone says some level escapes beyond the budget
        (Truth::Yes, Some(false)) => Flag { holds: Truth::Unknown, universal: false, witness },
        (Truth::Yes, u) => Flag { holds, universal: u.unwrap_or(false), witness },
        (Truth::No, _) => Flag { holds, universal: true, witness },
        (Truth::Unknown, _) => Flag { holds, universal: false, witness },
    }
}

/// B-properness, weak B-properness and bounded isotropy (BI), each with a
/// witness when it fails.
pub fn classify(a: &ActionInstance, budget: &Budget) -> Result<Classification> {
    let levels = a.space_levels(budget)?;
    let points = sample_points(a, budget)?;
    let idx: Vec<usize> = (0..levels.len()).collect();
    let pairs: Vec<(usize, usize)> = idx.iter().flat_map(|&i| idx.iter().map(move |&j| (i, j))).collect();
    let proper = pairs
        .par_iter()
        .map(|&(i, j)| {
            let t = transporter(a, &levels[i], &levels[j])?;
            Ok((WitnessSource::Level(i as u64), Some(j as u64), transporter_bounded(a, &t, budget)?))
        })
        .collect::<Result<Vec<_>>>()?;
    let point_level: Vec<(usize, usize)> =
        (0..points.len()).flat_map(|p| idx.iter().map(move |&j| (p, j))).collect();
    let weak = point_level
        .par_iter()
        .map(|&(p, j)| {
            let x = SetDescriptor::points(vec![points[p].clone()]);
            let t = transporter(a, &x, &levels[j])?;
            Ok((WitnessSource::Point(points[p].clone()), Some(j as u64), transporter_bounded(a, &t, budget)?))
        })
        .collect::<Result<Vec<_>>>()?;
    let isotropy = points
        .par_iter()
        .map(|p| {
            let x = SetDescriptor::points(vec![p.clone()]);
            let t = transporter(a, &x, &x)?;
            Ok((WitnessSource::Point(p.clone()), None, transporter_bounded(a, &t, budget)?))
        })
        .collect::<Result<Vec<_>>>()?;
    let (proper_cone, weak_cone, iso_cone) = match (&a.rule, &a.space) {
        (ActionRule::Translation(m), GroundSpace::Lattice { dim }) => {
            let k = m.cols();
            let shape = match bornology_level(&a.bornology, *dim, 0)? {
                SetDescriptor::Box(b) => b,
                _ => IntBox::full(*dim),
            };
            let both: Vec<_> = shape
                .dims()
                .iter()
                .map(|iv| {
                    if iv.is_bounded() {
                        crate::sets::Interval::point(0)
                    } else {
                        crate::sets::Interval::full()
                    }
                })
                .collect();
            let group = &a.group.bornology;
            (
                cone_inside_group(&pattern_cone(m, &IntBox::new(both)), group, k),
                cone_inside_group(&pattern_cone(m, &shape), group, k),
                cone_inside_group(&pattern_cone(m, &IntBox::point(&vec![0; *dim])), group, k),
            )
        }
        // every point and level is enumerated
        _ => (Some(true), Some(true), Some(true)),
    };
    Ok(Classification {
        b_proper: fold_flag(proper, proper_cone),
        weakly_b_proper: fold_flag(weak, weak_cone),
        bounded_isotropy: fold_flag(isotropy, iso_cone),
    })
}

/// Verdict of [`equi_controlled_check`]: for each level `n`, the least `m`
/// with `⋃_l (l × l)(E_n) ⊆ E_m`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EquiReport {
    pub holds: Truth,
    pub indices: Vec<(u64, u64)>,
    pub failing_level: Option<u64>,
    /// One pair of `E_L \ E_m` per `m <= max_index`.
    pub witnesses: Vec<(Point, Point)>,
}

/// `E_L = ⋃_l (l × l)(e)` for a level of a chain structure.
fn swept_level(a: &ActionInstance, chain: &ChainStructure, n: u64) -> Result<Entourage> {
    let m = a.exact_matrix()?;
    Ok(match &chain.kind {
        // translations preserve differences
        ChainKind::MetricBalls | ChainKind::GroupRight(_) => chain.level(n)?,
        ChainKind::Connected(b) => Entourage::orbit_pair(m.clone(), bornology_level(b, chain.dim, n)?),
        ChainKind::OrbitPairs { matrix, .. } if matrix == m => chain.level(n)?,
        _ => return Err(Error::Unsupported(format!("equi-control of {}", CoarseStructureSpec::Chain(chain.clone())))),
    })
}

pub fn equi_controlled_check(a: &ActionInstance, cs: &CoarseStructureSpec, budget: &Budget) -> Result<EquiReport> {
    match cs {
        CoarseStructureSpec::FiniteClosure(fc) => {
            let ActionRule::Permutation(perms) = &a.rule else {
                return Err(Error::Invalid("finite coarse structure on a lattice space".into()));
            };
            check_dim(a.space.size().expect("finite"), fc.size)?;
            let mut swept = Relation::empty(fc.size);
            for r in &fc.maximal {
                for p in perms {
                    for (x, y) in r.pairs() {
                        swept.insert(p[x], p[y]);
                    }
                }
            }
            let bad = swept.pairs().into_iter().find(|&(x, y)| !fc.maximal.iter().any(|m| m.contains(x, y)));
            Ok(EquiReport {
                holds: Truth::from_bool(bad.is_none()),
                indices: if bad.is_none() { vec![(0, 0)] } else { Vec::new() },
                failing_level: bad.map(|_| 0),
                witnesses: bad.map(|(x, y)| (vec![x as i64], vec![y as i64])).into_iter().collect(),
            })
        }
        CoarseStructureSpec::Chain(chain) => {
            check_dim(a.dim(), chain.dim)?;
            let d = chain.dim;
            let cap = crate::coarse::index_cap(budget);
            let mut indices = Vec::new();
            let mut unknown = false;
            for n in 0..=u64::from(budget.max_index) {
                let swept = swept_level(a, chain, n)?;
                let mut found = None;
                let mut witnesses = Vec::new();
                let mut undecided = false;
                for m in 0..=cap {
                    let c = entourage_leq(&swept, &chain.level(m)?, d, budget)?;
                    match c.truth {
                        Truth::Yes => {
                            found = Some(m);
                            break;
                        }
                        Truth::No if m <= u64::from(budget.max_index) => witnesses.extend(c.witness),
                        Truth::No => {}
                        Truth::Unknown => undecided = true,
                    }
                }
                match found {
                    Some(m) => indices.push((n, m)),
                    None if witnesses.len() == budget.max_index as usize + 1 && !undecided && !unknown => {
                        return Ok(EquiReport { holds: Truth::No, indices, failing_level: Some(n), witnesses });
                    }
                    None => unknown = true,
                }
            }
            Ok(EquiReport {
                holds: if unknown { Truth::Unknown } else { Truth::Yes },
                indices,
                failing_level: None,
                witnesses: Vec::new(),
            })
        }
    }
}

/// Verdict on coarse transitivity: some coarsely bounded `B` has `L·B = X`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransitiveReport {
    pub holds: Truth,
    /// Index `n` of the induced level `G_n` that covers.
    pub level: Option<u64>,
    /// A point missed by `L·G_n` at the largest level tried.
    pub uncovered: Option<Point>,
}

pub fn coarsely_transitive_check(a: &ActionInstance, cs: &CoarseStructureSpec, budget: &Budget) -> Result<TransitiveReport> {
    let chain = match cs {
        CoarseStructureSpec::FiniteClosure(_) => {
            return Ok(TransitiveReport { holds: Truth::Yes, level: Some(0), uncovered: None })
        }
        CoarseStructureSpec::Chain(c) => c,
    };
    check_dim(a.dim(), chain.dim)?;
    let m = a.exact_matrix()?;
    let levels = match induced_levels(chain, budget) {
        Ok(l) => l,
        Err(Error::Inconclusive(_)) => return Ok(TransitiveReport { holds: Truth::Unknown, level: None, uncovered: None }),
        Err(e) => return Err(e),
    };
    let mut uncovered = None;
    let mut unknown = false;
    for (n, g) in levels.iter().enumerate() {
        let Some(h) = g.hull()? else { continue };
        if g != &SetDescriptor::Box(h.clone()) {
            // only a box hull is available; covering by the hull is not enough
            if let Coverage::Uncovered(p) = covers(&h, m, DEFAULT_SEARCH_RADIUS)? {
                uncovered = Some(p);
            } else {
                unknown = true;
            }
            continue;
        }
        match covers(&h, m, DEFAULT_SEARCH_RADIUS)? {
            Coverage::Covers => return Ok(TransitiveReport { holds: Truth::Yes, level: Some(n as u64), uncovered: None }),
            Coverage::Uncovered(p) => uncovered = Some(p),
            Coverage::Unknown => unknown = true,
        }
    }
    Ok(TransitiveReport { holds: if unknown { Truth::Unknown } else { Truth::No }, level: None, uncovered })
}

/// Pullback `ι_x^* B_X` and pushforward `T^x_* B_L` on the orbit of `x`,
/// parameterized by ℤ^k (trivial kernel) or by the sorted orbit labels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrbitBornologies {
    pub orbit: Option<Vec<Point>>,
    pub pullback: BornologySpec,
    pub pushforward: BornologySpec,
}

pub fn orbit_bornologies(a: &ActionInstance, x: &[i64]) -> Result<OrbitBornologies> {
    a.space.check_point(x)?;
    match &a.rule {
        ActionRule::Permutation(perms) => {
            let x0 = x[0] as usize;
            let mut orbit: Vec<usize> = perms.iter().map(|p| p[x0]).collect();
            orbit.sort_unstable();
            orbit.dedup();
            let reindex = |mask: u64| {
                orbit.iter().enumerate().filter(|(_, &y)| mask >> y & 1 == 1).fold(0u64, |acc, (i, _)| acc | 1 << i)
            };
            let pullback = match &a.bornology {
                BornologySpec::FiniteBase { base, .. } => {
                    BornologySpec::FiniteBase { size: orbit.len(), base: base.iter().map(|&m| reindex(m)).collect() }
                }
                _ => BornologySpec::Maximal,
            };
            let pushforward = match &a.group.bornology {
                BornologySpec::FiniteBase { base, .. } => BornologySpec::FiniteBase {
                    size: orbit.len(),
                    base: base
                        .iter()
                        .map(|&d| reindex((0..perms.len()).filter(|g| d >> g & 1 == 1).fold(0u64, |acc, g| acc | 1 << perms[g][x0])))
                        .collect(),
                },
                _ => BornologySpec::Maximal,
            };
            Ok(OrbitBornologies { orbit: Some(orbit.iter().map(|&v| vec![v as i64]).collect()), pullback, pushforward })
        }
        _ => {
            let m = a.exact_matrix()?;
            if m.is_zero() {
                // The orbit is the single point x.
                let point = BornologySpec::Maximal;
                return Ok(OrbitBornologies { orbit: Some(vec![x.to_vec()]), pullback: point.clone(), pushforward: point });
            }
            if m.column_hnf().rank() < m.cols() {
                return Err(Error::Unsupported("orbit parameterization needs a trivial kernel".into()));
            }
            let pullback = inverse_image_bornology(&MapDescriptor::Orbit { offset: x.to_vec(), matrix: m.clone() }, &a.bornology)?;
            Ok(OrbitBornologies { orbit: None, pullback, pushforward: a.group.bornology.clone() })
        }
    }
}

/// Levels of a bornology on the orbit parameters.
fn parameter_levels(b: &BornologySpec, k: usize, budget: &Budget) -> Result<Vec<SetDescriptor>> {
    match b {
        BornologySpec::Maximal => Ok(vec![SetDescriptor::Box(IntBox::full(k))]),
        BornologySpec::FiniteBase { base, .. } => Ok(base.iter().map(|&m| descriptor_of(m)).collect()),
        other => (0..=u64::from(budget.max_index)).map(|i| bornology_level(other, k, i)).collect(),
    }
}

/// Whether every level of `b1` is bounded in `b2`, with the per-level
/// indices.
pub fn chain_refines(b1: &BornologySpec, b2: &BornologySpec, k: usize, budget: &Budget) -> Result<(Truth, Vec<Option<u64>>)> {
    let mut holds = Truth::Yes;
    let mut out = Vec::new();
    for level in parameter_levels(b1, k, budget)? {
        let v = is_bounded(b2, &level, budget)?;
        holds = holds.and(verdict_truth(&v));
        out.push(v.index());
    }
    Ok((holds, out))
}

/// Mutual cofinality of the two orbit bornologies.
pub fn orbit_bornologies_agree(o: &OrbitBornologies, k: usize, budget: &Budget) -> Result<Truth> {
    if let Some(orbit) = &o.orbit {
        let full = if orbit.len() >= 64 { u64::MAX } else { (1u64 << orbit.len()) - 1 };
        let members = |b: &BornologySpec| match b {
            BornologySpec::FiniteBase { base, .. } => base.clone(),
            _ => vec![full],
        };
        let (p, q) = (members(&o.pullback), members(&o.pushforward));
        let within = |xs: &[u64], ys: &[u64]| xs.iter().all(|&m| ys.iter().any(|&n| m & !n == 0));
        return Ok(Truth::from_bool(within(&p, &q) && within(&q, &p)));
    }
    let (forward, _) = chain_refines(&o.pushforward, &o.pullback, k, budget)?;
    let (backward, _) = chain_refines(&o.pullback, &o.pushforward, k, budget)?;
    Ok(forward.and(backward))
}

/// The coarse structure on the group with base `{(l, h) : l⁻¹h ∈ D}`.
pub fn group_right_structure(g: &GroupSpec) -> Result<CoarseStructureSpec> {
    match &g.kind {
        GroupKind::Lattice { rank } => Ok(CoarseStructureSpec::Chain(ChainStructure {
            dim: *rank,
            kind: ChainKind::GroupRight(g.bornology.clone()),
        })),
        GroupKind::Finite(fg) => {
            let n = fg.order();
            let members: Vec<u64> = match &g.bornology {
                BornologySpec::FiniteBase { base, .. } => base.clone(),
                _ => vec![if n == 64 { u64::MAX } else { (1u64 << n) - 1 }],
            };
            let base: Vec<Relation> = members
                .iter()
                .map(|&d| {
                    let mut r = Relation::empty(n);
                    for l in 0..n {
                        for h in 0..n {
                            if d >> fg.mul[fg.inv[l]][h] & 1 == 1 {
                                r.insert(l, h);
                            }
                        }
                    }
                    r
                })
                .collect();
            Ok(CoarseStructureSpec::FiniteClosure(close_finite_base(&GroundSpace::finite(n), &base)?))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bornology::{ChainShape, IndexExpr};
    use crate::sets::End;
    use crate::coarse::entourage_membership;

    fn budget() -> Budget {
        Budget::new(32, 8)
    }

    fn m(rows: usize, cols: usize, data: &[i64]) -> IntMatrix {
        IntMatrix::new(rows, cols, data.to_vec()).unwrap()
    }

    fn quadrants() -> BornologySpec {
        BornologySpec::Chain(ChainShape::new(vec![IndexExpr::NegInf; 2], vec![IndexExpr::affine(1, 0); 2]).unwrap())
    }

    fn shift() -> ActionInstance {
        let g = GroupSpec::lattice(1, BornologySpec::cubes(1)).unwrap();
        ActionInstance::new("shift", g, GroundSpace::lattice(1), ActionRule::Translation(m(1, 1, &[1])), BornologySpec::cubes(1))
            .unwrap()
    }

    fn hyperbola() -> ActionInstance {
        let g = GroupSpec::lattice(1, BornologySpec::cubes(1)).unwrap();
        ActionInstance::new("hyperbola", g, GroundSpace::lattice(2), ActionRule::Translation(m(2, 1, &[1, -1])), quadrants())
            .unwrap()
    }

    fn trivial() -> ActionInstance {
        let g = GroupSpec::lattice(1, BornologySpec::cubes(1)).unwrap();
        ActionInstance::new("trivial", g, GroundSpace::lattice(1), ActionRule::Translation(m(1, 1, &[0])), BornologySpec::cubes(1))
            .unwrap()
    }

    fn first_coordinate() -> ActionInstance {
        let g = GroupSpec::lattice(1, BornologySpec::cubes(1)).unwrap();
        ActionInstance::new("first", g, GroundSpace::lattice(2), ActionRule::Translation(m(2, 1, &[1, 0])), BornologySpec::cubes(2))
            .unwrap()
    }

    fn interval(lo: i64, hi: i64) -> SetDescriptor {
        SetDescriptor::Box(IntBox::from_bounds(&[(lo, hi)]))
    }

    #[test]
    fn group_checks() {
        let b = budget();
        let cubes = GroupSpec::lattice(1, BornologySpec::cubes(1)).unwrap();
        assert_eq!(group_bornological_check(&cubes, &b).unwrap().passed(), Truth::Yes);
        let max = GroupSpec::lattice(1, BornologySpec::Maximal).unwrap();
        assert_eq!(group_bornological_check(&max, &b).unwrap().passed(), Truth::Yes);
        let half = BornologySpec::Chain(
            ChainShape::new(vec![IndexExpr::NegInf, IndexExpr::affine(-1, 0)], vec![IndexExpr::affine(1, 0); 2]).unwrap(),
        );
        let r = group_bornological_check(&GroupSpec::lattice(2, half).unwrap(), &b).unwrap();
        assert_eq!(r.passed(), Truth::No);
        let inversion = &r.checks[1];
        assert_eq!(inversion.passed, Truth::No);
        assert_eq!(inversion.witness.as_ref().unwrap().direction, Some(vec![1, 0]));
        assert!(FiniteGroup::new(vec![vec![0, 1], vec![0, 1]]).is_err());
    }

    #[test]
    fn action_checks() {
        let b = budget();
        for a in [shift(), hyperbola(), trivial()] {
            assert_eq!(action_bornological_check(&a, &b).unwrap().passed(), Truth::Yes, "{}", a.name);
        }
        let r = action_bornological_check(&hyperbola(), &Budget::new(32, 3)).unwrap();
        assert!(r.checks[0].indices.iter().all(|&(i, j, k)| k == Some(i + j)));
    }

    #[test]
    fn transporter_examples() {
        let b = budget();
        let t = transporter(&shift(), &interval(0, 1), &interval(5, 6)).unwrap();
        // window oracle over n
        for n in -20..=20i64 {
            let oracle = (0..=1).any(|x| (5..=6).contains(&(x + n)));
            assert_eq!(t.contains(&[n]).unwrap(), oracle);
        }
        assert_eq!(transporter_bounded(&shift(), &t, &b).unwrap(), BoundVerdict::BoundedAt(6));
        let s0 = SetDescriptor::Box(IntBox::new(vec![crate::sets::Interval::new(End::NegInf, End::Fin(0)); 2]));
        let t = transporter(&hyperbola(), &s0, &s0).unwrap();
        assert!((-20..=20).all(|n| t.contains(&[n]).unwrap()));
        match transporter_bounded(&hyperbola(), &t, &b).unwrap() {
            BoundVerdict::Unbounded(e) => assert_eq!(e.direction, Some(vec![1])),
            other => panic!("{other:?}"),
        }
        let cube = SetDescriptor::Box(IntBox::cube(2, 1));
        let t = transporter(&first_coordinate(), &cube, &cube).unwrap();
        assert!((-20..=20).all(|n| t.contains(&[n]).unwrap() == (-2..=2).contains(&n)));
        assert_eq!(transporter_bounded(&first_coordinate(), &t, &b).unwrap(), BoundVerdict::BoundedAt(2));
        let p = SetDescriptor::points(vec![vec![3]]);
        let t = transporter(&trivial(), &p, &p).unwrap();
        assert!((-20..=20).all(|n| t.contains(&[n]).unwrap()));
        let none = transporter(&shift(), &SetDescriptor::empty(), &p).unwrap();
        assert_eq!(none, TransporterDescriptor::Explicit(Vec::new()));
    }

    #[test]
    fn transporter_symmetry() {
        let a = hyperbola();
        let b1 = SetDescriptor::Box(IntBox::from_bounds(&[(-2, 1), (0, 3)]));
        let b2 = SetDescriptor::Box(IntBox::from_bounds(&[(4, 6), (-5, -1)]));
        let t12 = transporter(&a, &b1, &b2).unwrap();
        let t21 = transporter(&a, &b2, &b1).unwrap();
        for n in -20..=20i64 {
            assert_eq!(t12.contains(&[n]).unwrap(), t21.contains(&[-n]).unwrap());
        }
    }

    #[test]
    fn classification_examples() {
        let b = Budget::new(32, 4);
        let c = classify(&shift(), &b).unwrap();
        assert_eq!(
            (c.b_proper.holds, c.weakly_b_proper.holds, c.bounded_isotropy.holds),
            (Truth::Yes, Truth::Yes, Truth::Yes)
        );
        assert!(c.b_proper.universal);
        let c = classify(&hyperbola(), &b).unwrap();
        assert_eq!(
            (c.b_proper.holds, c.weakly_b_proper.holds, c.bounded_isotropy.holds),
            (Truth::No, Truth::Yes, Truth::Yes)
        );
        let w = c.b_proper.witness.unwrap();
        assert_eq!(w.source, WitnessSource::Level(0));
        assert_eq!(w.target, Some(0));
        assert_eq!(w.escape.direction, Some(vec![1]));
        let c = classify(&trivial(), &b).unwrap();
        assert_eq!(
            (c.b_proper.holds, c.weakly_b_proper.holds, c.bounded_isotropy.holds),
            (Truth::No, Truth::No, Truth::No)
        );
    }

    #[test]
    fn equi_control() {
        let b = Budget::new(16, 3);
        let balls = CoarseStructureSpec::metric_balls(1);
        let r = equi_controlled_check(&shift(), &balls, &b).unwrap();
        assert_eq!(r.holds, Truth::Yes);
        assert!(r.indices.iter().all(|&(n, m)| n == m));
        let r = equi_controlled_check(&hyperbola(), &CoarseStructureSpec::metric_balls(2), &b).unwrap();
        assert_eq!(r.holds, Truth::Yes);
        assert!(r.indices.iter().all(|&(n, m)| n == m));
        let eb = crate::coarse::associated_connected_structure(&BornologySpec::cubes(2), &GroundSpace::lattice(2)).unwrap();
        let r = equi_controlled_check(&hyperbola(), &eb, &b).unwrap();
        assert_eq!(r.holds, Truth::No);
        assert_eq!(r.witnesses.len(), 4);
        let CoarseStructureSpec::Chain(chain) = &eb else { unreachable!() };
        let swept = swept_level(&hyperbola(), chain, r.failing_level.unwrap()).unwrap();
        for (mm, (x, y)) in r.witnesses.iter().enumerate() {
            assert!(entourage_membership(&swept, x, y, &b).unwrap().is_yes());
            assert!(entourage_membership(&chain.level(mm as u64).unwrap(), x, y, &b).unwrap().is_no());
        }
    }

    #[test]
    fn transitivity() {
        let b = Budget::new(16, 4);
        let r = coarsely_transitive_check(&shift(), &CoarseStructureSpec::metric_balls(1), &b).unwrap();
        assert_eq!((r.holds, r.level), (Truth::Yes, Some(0)));
        let r = coarsely_transitive_check(&hyperbola(), &CoarseStructureSpec::metric_balls(2), &b).unwrap();
        assert_eq!(r.holds, Truth::No);
        let p = r.uncovered.unwrap();
        assert!(p[0] + p[1] > 16, "{p:?}");
        let r = coarsely_transitive_check(&first_coordinate(), &CoarseStructureSpec::metric_balls(2), &b).unwrap();
        assert_eq!(r.holds, Truth::No);
        assert!(r.uncovered.unwrap()[1].abs() > 8);
    }

    #[test]
    fn orbit_bornology_examples() {
        let b = budget();
        let o = orbit_bornologies(&hyperbola(), &[0, 0]).unwrap();
        assert_eq!(o.pullback, BornologySpec::cubes(1));
        assert_eq!(o.pushforward, BornologySpec::cubes(1));
        assert_eq!(orbit_bornologies_agree(&o, 1, &b).unwrap(), Truth::Yes);
        let g = GroupSpec::lattice(1, BornologySpec::cubes(1)).unwrap();
        let maximal =
            ActionInstance::new("max", g, GroundSpace::lattice(1), ActionRule::Translation(m(1, 1, &[1])), BornologySpec::Maximal)
                .unwrap();
        let o = orbit_bornologies(&maximal, &[0]).unwrap();
        assert_eq!(o.pullback, BornologySpec::Maximal);
        assert_eq!(orbit_bornologies_agree(&o, 1, &b).unwrap(), Truth::No);
        let point = orbit_bornologies(&trivial(), &[0]).unwrap();
        assert_eq!(point.orbit, Some(vec![vec![0]]));
        assert_eq!(orbit_bornologies_agree(&point, 1, &b).unwrap(), Truth::Yes);
        let g2 = GroupSpec::lattice(2, BornologySpec::cubes(2)).unwrap();
        let doubled =
            ActionInstance::new("doubled", g2, GroundSpace::lattice(1), ActionRule::Translation(m(1, 2, &[1, 1])), BornologySpec::cubes(1))
                .unwrap();
        assert!(orbit_bornologies(&doubled, &[0]).is_err());
        // pushforward levels sit inside pullback levels
        for a in [shift(), hyperbola(), first_coordinate()] {
            let o = orbit_bornologies(&a, &vec![0; a.dim()]).unwrap();
            assert_eq!(chain_refines(&o.pushforward, &o.pullback, 1, &b).unwrap().0, Truth::Yes);
        }
    }

    #[test]
    fn group_right() {
        let b = Budget::new(16, 8);
        let g = GroupSpec::lattice(1, BornologySpec::cubes(1)).unwrap();
        let CoarseStructureSpec::Chain(c) = group_right_structure(&g).unwrap() else { panic!() };
        for k in 0..4 {
            let level = c.level(k).unwrap();
            for x in -16..=16i64 {
                for y in -16..=16i64 {
                    assert_eq!(
                        entourage_membership(&level, &[x], &[y], &b).unwrap(),
                        entourage_membership(&Entourage::MetricBall(k as i64), &[x], &[y], &b).unwrap()
                    );
                }
            }
        }
        let c3 = GroupSpec::finite(FiniteGroup::cyclic(3).unwrap(), BornologySpec::Maximal).unwrap();
        let CoarseStructureSpec::FiniteClosure(fc) = group_right_structure(&c3).unwrap() else { panic!() };
        assert_eq!(fc.maximal, vec![Relation::full(3)]);
    }

    #[test]
    fn finite_action() {
        let b = budget();
        let c3 = FiniteGroup::cyclic(3).unwrap();
        let g = GroupSpec::finite(c3, BornologySpec::Maximal).unwrap();
        let perms = vec![vec![0, 1, 2], vec![1, 2, 0], vec![2, 0, 1]];
        let a = ActionInstance::new("c3", g, GroundSpace::finite(3), ActionRule::Permutation(perms), BornologySpec::Maximal).unwrap();
        let t = transporter(&a, &SetDescriptor::points(vec![vec![0]]), &SetDescriptor::points(vec![vec![2]])).unwrap();
        assert_eq!(t, TransporterDescriptor::Explicit(vec![2]));
        let c = classify(&a, &b).unwrap();
        assert_eq!(c.b_proper.holds, Truth::Yes);
        let o = orbit_bornologies(&a, &[1]).unwrap();
        assert_eq!(o.orbit.unwrap().len(), 3);
    }
}
