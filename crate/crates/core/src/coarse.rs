//! Entourages, finite coarse structures and coarse structures given by
//! cofinal chains of entourages.

use std::fmt;

use crate::actions::transporter_region;
use crate::bornology::{is_bounded, BornologySpec, BoundVerdict, ChainShape, Escape, IndexExpr};
use crate::error::{check_dim, Error, Result};
use crate::lattice::{covers, Coverage, Feasibility, IntMatrix, Region, DEFAULT_SEARCH_RADIUS};
use crate::sets::{
    box_intersect, difference_box, self_difference_set, End, GroundSpace, IntBox, Interval, Point,
    SetDescriptor, Sweep,
};
use crate::{Budget, Truth};

/// Relations on at most this many labels.
pub const MAX_FINITE_GROUND: usize = 16;

/// A relation on `{0, .., n-1}`; bit `y` of `rows[x]` is the pair `(x, y)`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Relation {
    n: u8,
    rows: [u16; MAX_FINITE_GROUND],
}

impl fmt::Debug for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.pairs())
    }
}

impl Relation {
    pub fn empty(n: usize) -> Self {
        assert!(n <= MAX_FINITE_GROUND, "relation on {n} labels");
        Relation { n: n as u8, rows: [0; MAX_FINITE_GROUND] }
    }

    pub fn diag(n: usize) -> Self {
        let mut r = Relation::empty(n);
        for x in 0..n {
            r.insert(x, x);
        }
        r
    }

    pub fn full(n: usize) -> Self {
        let mut r = Relation::empty(n);
        for x in 0..n {
            r.rows[x] = ((1u32 << n) - 1) as u16;
        }
        r
    }

    pub fn from_pairs(n: usize, pairs: &[(usize, usize)]) -> Result<Self> {
        if n > MAX_FINITE_GROUND {
            return Err(Error::TooLarge(format!("relations on {n} labels")));
        }
        let mut r = Relation::empty(n);
        for &(x, y) in pairs {
            if x >= n || y >= n {
                return Err(Error::Invalid(format!("pair ({x}, {y}) outside {n} labels")));
            }
            r.insert(x, y);
        }
        Ok(r)
    }

    pub fn size(&self) -> usize {
        self.n as usize
    }

    pub fn insert(&mut self, x: usize, y: usize) {
        self.rows[x] |= 1 << y;
    }

    pub fn contains(&self, x: usize, y: usize) -> bool {
        self.rows[x] >> y & 1 == 1
    }

    pub fn pairs(&self) -> Vec<(usize, usize)> {
        let n = self.size();
        (0..n).flat_map(|x| (0..n).filter(move |&y| self.contains(x, y)).map(move |y| (x, y))).collect()
    }

    pub fn union(&self, other: &Relation) -> Relation {
        let mut r = *self;
        for x in 0..self.size() {
            r.rows[x] |= other.rows[x];
        }
        r
    }

    pub fn intersect(&self, other: &Relation) -> Relation {
        let mut r = *self;
        for x in 0..self.size() {
            r.rows[x] &= other.rows[x];
        }
        r
    }

    pub fn transpose(&self) -> Relation {
        let mut r = Relation::empty(self.size());
        for (x, y) in self.pairs() {
            r.insert(y, x);
        }
        r
    }

    /// `self ∘ other = {(x, z) : (x, y) ∈ self, (y, z) ∈ other}`.
    pub fn compose(&self, other: &Relation) -> Relation {
        let mut r = Relation::empty(self.size());
        for x in 0..self.size() {
            let mut row = 0u16;
            for y in 0..self.size() {
                if self.contains(x, y) {
                    row |= other.rows[y];
                }
            }
            r.rows[x] = row;
        }
        r
    }

    pub fn is_subset(&self, other: &Relation) -> bool {
        (0..self.size()).all(|x| self.rows[x] & !other.rows[x] == 0)
    }

    pub fn count(&self) -> u32 {
        self.rows.iter().map(|r| r.count_ones()).sum()
    }
}

/// A coarse structure on a finite set: all subsets of the maximal
/// relations.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FiniteClosure {
    pub size: usize,
    pub maximal: Vec<Relation>,
}

impl FiniteClosure {
    pub fn contains(&self, r: &Relation) -> bool {
        self.maximal.iter().any(|m| r.is_subset(m))
    }

    /// The five coarse-structure conditions; the family is subset-closed by
    /// construction, so each is checked on the maximal relations.
    pub fn axiom_failures(&self) -> Vec<&'static str> {
        let mut out = Vec::new();
        if !self.contains(&Relation::diag(self.size)) {
            out.push("diagonal");
        }
        if !self.maximal.iter().all(|m| self.contains(&m.transpose())) {
            out.push("transpose");
        }
        let pairs = || self.maximal.iter().flat_map(|a| self.maximal.iter().map(move |b| (a, b)));
        if !pairs().all(|(a, b)| self.contains(&a.union(b))) {
            out.push("union");
        }
        if !pairs().all(|(a, b)| self.contains(&a.compose(b))) {
            out.push("composition");
        }
        out
    }
}

fn finite_size(ground: &GroundSpace) -> Result<usize> {
    let n = ground
        .size()
        .ok_or_else(|| Error::Unsupported("finite closure over a lattice".into()))?;
    if n > 12 {
        return Err(Error::TooLarge(format!("closing relations on {n} labels (limit 12)")));
    }
    Ok(n)
}

/// Smallest coarse structure containing `base`. Finite coarse structures
/// are principal, so the antichain is the single relation obtained by
/// closing `diag ∪ ⋃ base` under transpose and composition.
pub fn close_finite_base(ground: &GroundSpace, base: &[Relation]) -> Result<FiniteClosure> {
    let n = finite_size(ground)?;
    let mut r = base.iter().fold(Relation::diag(n), |acc, b| acc.union(b));
    loop {
        let next = r.union(&r.transpose()).union(&r.compose(&r));
        if next == r {
            break;
        }
        r = next;
    }
    Ok(FiniteClosure { size: n, maximal: vec![r] })
}

/// Brute-force closure over at most four labels: enumerates every relation
/// containing `diag ∪ ⋃ base`, keeps those whose down-set is a coarse
/// structure, and intersects them.
pub fn naive_closure(ground: &GroundSpace, base: &[Relation]) -> Result<FiniteClosure> {
    let n = finite_size(ground)?;
    if n > 4 {
        return Err(Error::TooLarge(format!("naive closure on {n} labels (limit 4)")));
    }
    let cells: Vec<(usize, usize)> = (0..n).flat_map(|x| (0..n).map(move |y| (x, y))).collect();
    let seed = base.iter().fold(Relation::diag(n), |acc, b| acc.union(b));
    let mut meet = Relation::full(n);
    for bits in 0u32..1 << cells.len() {
        let pairs: Vec<(usize, usize)> = cells.iter().enumerate().filter(|(i, _)| bits >> i & 1 == 1).map(|(_, &c)| c).collect();
        let r = Relation::from_pairs(n, &pairs)?;
        if seed.is_subset(&r) && r.transpose() == r && r.compose(&r).is_subset(&r) {
            meet = meet.intersect(&r);
        }
    }
    Ok(FiniteClosure { size: n, maximal: vec![meet] })
}

/// How a group acts inside an orbit-pair entourage.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum OrbitRule {
    /// `l·x = x + M·l` on ℤ^d.
    Translation(IntMatrix),
    /// `perms[g][x]` is the image of label `x` under group element `g`.
    Permutation(Vec<Vec<usize>>),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Entourage {
    Diag,
    FiniteRel(Vec<(Point, Point)>),
    /// ℓ∞ ball of radius `r` around the diagonal.
    MetricBall(i64),
    /// `(B × B)_L ∪ diag`.
    OrbitPair { rule: OrbitRule, set: SetDescriptor },
    /// `{(l, h) : h - l ∈ D}` on a lattice group.
    GroupRight(SetDescriptor),
    Product(SetDescriptor, SetDescriptor),
    Transpose(Box<Entourage>),
    Union(Box<Entourage>, Box<Entourage>),
    /// `{(x, z) : (x, y) ∈ first, (y, z) ∈ second}`.
    Compose(Box<Entourage>, Box<Entourage>),
}

impl fmt::Display for Entourage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Entourage::Diag => write!(f, "diag"),
            Entourage::FiniteRel(p) => write!(f, "rel{p:?}"),
            Entourage::MetricBall(r) => write!(f, "ball({r})"),
            Entourage::OrbitPair { set, .. } => write!(f, "orbit({set})"),
            Entourage::GroupRight(d) => write!(f, "right({d})"),
            Entourage::Product(a, b) => write!(f, "{a} x {b}"),
            Entourage::Transpose(e) => write!(f, "({e})^T"),
            Entourage::Union(a, b) => write!(f, "({a} u {b})"),
            Entourage::Compose(a, b) => write!(f, "({a} o {b})"),
        }
    }
}

impl Entourage {
    pub fn orbit_pair(matrix: IntMatrix, set: SetDescriptor) -> Self {
        Entourage::OrbitPair { rule: OrbitRule::Translation(matrix), set }
    }

    pub fn connected(b: SetDescriptor) -> Self {
        Entourage::Union(Box::new(Entourage::Diag), Box::new(Entourage::Product(b.clone(), b)))
    }

    pub fn compose(a: Entourage, b: Entourage) -> Self {
        Entourage::Compose(Box::new(a), Box::new(b))
    }

    pub fn transpose(e: Entourage) -> Self {
        Entourage::Transpose(Box::new(e))
    }

    pub fn union(a: Entourage, b: Entourage) -> Self {
        Entourage::Union(Box::new(a), Box::new(b))
    }
}

fn diff(a: &[i64], b: &[i64]) -> Point {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

fn linf(v: &[i64]) -> i64 {
    v.iter().map(|c| c.abs()).max().unwrap_or(0)
}

/// Some `l` with `x - M·l ∈ B` and `y - M·l ∈ B`, or the group element index
/// for permutation rules.
pub fn orbit_pair_witness(rule: &OrbitRule, set: &SetDescriptor, x: &[i64], y: &[i64]) -> Result<Feasibility> {
    match rule {
        OrbitRule::Translation(m) => {
            check_dim(m.rows(), x.len())?;
            check_dim(m.rows(), y.len())?;
            let boxes = set.boxes()?;
            let mut unknown = false;
            for b1 in &boxes {
                let cx = difference_box(&IntBox::point(x), b1)?;
                for b2 in &boxes {
                    let c = box_intersect(&cx, &difference_box(&IntBox::point(y), b2)?)?;
                    if c.is_empty() {
                        continue;
                    }
                    match Region::new(m.clone(), c)?.feasible(DEFAULT_SEARCH_RADIUS)? {
                        Feasibility::Yes(l) => return Ok(Feasibility::Yes(l)),
                        Feasibility::Unknown => unknown = true,
                        Feasibility::No => {}
                    }
                }
            }
            Ok(if unknown { Feasibility::Unknown } else { Feasibility::No })
        }
        OrbitRule::Permutation(perms) => {
            let (x, y) = (label(x)?, label(y)?);
            for (g, p) in perms.iter().enumerate() {
                // g·b1 = x and g·b2 = y
                let b1 = p.iter().position(|&v| v == x);
                let b2 = p.iter().position(|&v| v == y);
                if let (Some(b1), Some(b2)) = (b1, b2) {
                    if set.contains(&[b1 as i64])? && set.contains(&[b2 as i64])? {
                        return Ok(Feasibility::Yes(vec![g as i64]));
                    }
                }
            }
            Ok(Feasibility::No)
        }
    }
}

fn label(x: &[i64]) -> Result<usize> {
    check_dim(1, x.len())?;
    usize::try_from(x[0]).map_err(|_| Error::Invalid(format!("label {}", x[0])))
}

pub fn entourage_membership(e: &Entourage, x: &[i64], y: &[i64], budget: &Budget) -> Result<Truth> {
    check_dim(x.len(), y.len())?;
    Ok(match e {
        Entourage::Diag => Truth::from_bool(x == y),
        Entourage::FiniteRel(pairs) => Truth::from_bool(pairs.iter().any(|(a, b)| a == x && b == y)),
        Entourage::MetricBall(r) => Truth::from_bool(linf(&diff(x, y)) <= *r),
        Entourage::OrbitPair { rule, set } => {
            if x == y {
                Truth::Yes
            } else {
                orbit_pair_witness(rule, set, x, y)?.truth()
            }
        }
        Entourage::GroupRight(d) => d.contains_truth(&diff(y, x))?,
        Entourage::Product(a, b) => a.contains_truth(x)?.and(b.contains_truth(y)?),
        Entourage::Transpose(inner) => entourage_membership(inner, y, x, budget)?,
        Entourage::Union(a, b) => {
            let first = entourage_membership(a, x, y, budget)?;
            if first.is_yes() {
                Truth::Yes
            } else {
                first.or(entourage_membership(b, x, y, budget)?)
            }
        }
        Entourage::Compose(a, b) => {
            let rewritten = entourage_rewrite(e);
            if !rewritten.approximate && !matches!(rewritten.entourage, Entourage::Compose(..)) {
                entourage_membership(&rewritten.entourage, x, y, budget)?
            } else {
                compose_search(a, b, x, y, budget)?.0
            }
        }
    })
}

const SEARCH_CAP: u128 = 200_000;

/// Looks for a middle point `y` with `(x, y) ∈ a` and `(y, z) ∈ b`. Exact
/// when the forward section of `a` at `x` has a finite hull.
pub fn compose_search(a: &Entourage, b: &Entourage, x: &[i64], z: &[i64], budget: &Budget) -> Result<(Truth, Option<Point>)> {
    let d = x.len();
    let fwd = section_hull(a, x, false)?;
    let back = section_hull(b, z, true)?;
    let (Some(fwd), Some(back)) = (fwd, back) else { return Ok((Truth::No, None)) };
    let both = box_intersect(&fwd, &back)?;
    if both.is_empty() {
        return Ok((Truth::No, None));
    }
    let exact = both.is_finite();
    let search = if exact { both } else { box_intersect(&both, &IntBox::cube(d, budget.window))? };
    match search.volume() {
        Some(v) if v <= SEARCH_CAP => {}
        _ => return Ok((Truth::Unknown, None)),
    }
    let mut unknown = !exact;
    for y in search.points()? {
        let first = entourage_membership(a, x, &y, budget)?;
        if first.is_no() {
            continue;
        }
        let second = entourage_membership(b, &y, z, budget)?;
        if first.is_yes() && second.is_yes() {
            return Ok((Truth::Yes, Some(y)));
        }
        if !second.is_no() {
            unknown = true;
        }
    }
    Ok((if unknown { Truth::Unknown } else { Truth::No }, None))
}

/// A box containing `{y : (x, y) ∈ e}` (or `{y : (y, x) ∈ e}` when
/// `reverse`), `None` when that set is empty. Unknown sections are full.
pub fn section_hull(e: &Entourage, x: &[i64], reverse: bool) -> Result<Option<IntBox>> {
    let d = x.len();
    let full = Some(IntBox::full(d));
    Ok(match e {
        Entourage::Diag => Some(IntBox::point(x)),
        Entourage::MetricBall(r) => Some(IntBox::point(x).inflate(*r)),
        Entourage::FiniteRel(pairs) => {
            let hits: Vec<Point> = pairs
                .iter()
                .filter(|(a, b)| if reverse { b == x } else { a == x })
                .map(|(a, b)| if reverse { a.clone() } else { b.clone() })
                .collect();
            SetDescriptor::points(hits).hull()?
        }
        Entourage::GroupRight(dset) => match dset.hull()? {
            None => None,
            Some(h) => Some(if reverse { h.neg().translate(x)? } else { h.translate(x)? }),
        },
        Entourage::Product(a, b) => {
            let (src, dst) = if reverse { (b, a) } else { (a, b) };
            match src.contains_truth(x)? {
                Truth::No => None,
                _ => dst.hull()?,
            }
        }
        Entourage::OrbitPair { rule: OrbitRule::Translation(_), .. } => {
            let n = neighborhood(e, &SetDescriptor::points(vec![x.to_vec()]), &Budget::default())?;
            n.set.hull()?.or(Some(IntBox::point(x)))
        }
        Entourage::OrbitPair { .. } => full,
        Entourage::Transpose(inner) => section_hull(inner, x, !reverse)?,
        Entourage::Union(a, b) => match (section_hull(a, x, reverse)?, section_hull(b, x, reverse)?) {
            (None, h) | (h, None) => h,
            (Some(p), Some(q)) => Some(p.hull(&q)),
        },
        Entourage::Compose(..) => full,
    })
}

/// Result of [`entourage_rewrite`]; `approximate` marks a sound upper bound
/// rather than an equality.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rewritten {
    pub entourage: Entourage,
    pub approximate: bool,
}

pub fn entourage_rewrite(e: &Entourage) -> Rewritten {
    let exact = |entourage| Rewritten { entourage, approximate: false };
    match e {
        Entourage::Transpose(inner) => {
            let r = entourage_rewrite(inner);
            let out = match r.entourage {
                Entourage::Transpose(twice) => *twice,
                s @ (Entourage::Diag | Entourage::MetricBall(_) | Entourage::OrbitPair { .. }) => s,
                Entourage::GroupRight(SetDescriptor::Box(d)) => Entourage::GroupRight(SetDescriptor::Box(d.neg())),
                Entourage::Product(a, b) => Entourage::Product(b, a),
                Entourage::FiniteRel(p) => {
                    let mut t: Vec<(Point, Point)> = p.into_iter().map(|(a, b)| (b, a)).collect();
                    t.sort();
                    Entourage::FiniteRel(t)
                }
                Entourage::Union(a, b) => Entourage::union(
                    entourage_rewrite(&Entourage::transpose(*a)).entourage,
                    entourage_rewrite(&Entourage::transpose(*b)).entourage,
                ),
                other => Entourage::transpose(other),
            };
            Rewritten { entourage: out, approximate: r.approximate }
        }
        Entourage::Union(a, b) => {
            let (ra, rb) = (entourage_rewrite(a), entourage_rewrite(b));
            Rewritten {
                entourage: Entourage::union(ra.entourage, rb.entourage),
                approximate: ra.approximate || rb.approximate,
            }
        }
        Entourage::Compose(a, b) => {
            let (ra, rb) = (entourage_rewrite(a), entourage_rewrite(b));
            let approximate = ra.approximate || rb.approximate;
            let tag = |entourage, extra: bool| Rewritten { entourage, approximate: approximate || extra };
            match (ra.entourage, rb.entourage) {
                (Entourage::Diag, other) | (other, Entourage::Diag) => tag(other, false),
                (Entourage::MetricBall(r1), Entourage::MetricBall(r2)) => tag(Entourage::MetricBall(r1 + r2), false),
                (Entourage::GroupRight(SetDescriptor::Box(d1)), Entourage::GroupRight(SetDescriptor::Box(d2)))
                    if d1.dim() == d2.dim() =>
                {
                    tag(Entourage::GroupRight(SetDescriptor::Box(d1.minkowski(&d2))), false)
                }
                (
                    Entourage::OrbitPair { rule: OrbitRule::Translation(m1), set: SetDescriptor::Box(b1) },
                    Entourage::OrbitPair { rule: OrbitRule::Translation(m2), set: SetDescriptor::Box(b2) },
                ) if m1 == m2 => match composition_bound(&m1, &b1, &b2) {
                    Some(bound) => tag(Entourage::orbit_pair(m1, SetDescriptor::Box(bound)), true),
                    None => tag(
                        Entourage::compose(
                            Entourage::orbit_pair(m1.clone(), SetDescriptor::Box(b1)),
                            Entourage::orbit_pair(m1, SetDescriptor::Box(b2)),
                        ),
                        false,
                    ),
                },
                (x, y) => tag(Entourage::compose(x, y), false),
            }
        }
        other => exact(other.clone()),
    }
}

/// Box hull of `(L_{B1,B2}·B1) ∪ B1 ∪ B2` when `M·L_{B1,B2}` is bounded.
pub fn composition_bound(m: &IntMatrix, b1: &IntBox, b2: &IntBox) -> Option<IntBox> {
    composition_hull_with(m, b1, b2, true)
}

/// Like [`composition_bound`] but keeps infinite ends, for chains whose
/// levels are unbounded along the moved coordinates.
pub fn composition_hull(m: &IntMatrix, b1: &IntBox, b2: &IntBox) -> Option<IntBox> {
    composition_hull_with(m, b1, b2, false)
}

fn composition_hull_with(m: &IntMatrix, b1: &IntBox, b2: &IntBox, finite_moves: bool) -> Option<IntBox> {
    if b1.is_empty() || b2.is_empty() {
        return Some(if b1.is_empty() { b2.clone() } else { b1.clone() });
    }
    let t = transporter_region(m, b1, b2).ok()?;
    let Some(moved) = t.image_hull(m).ok()? else { return Some(b1.hull(b2)) };
    if finite_moves && !moved.is_finite() {
        return None;
    }
    Some(b1.minkowski(&moved).hull(b1).hull(b2))
}

/// `e[a]` together with whether the descriptor is exact.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Neighborhood {
    pub set: SetDescriptor,
    pub exact: bool,
}

pub fn neighborhood(e: &Entourage, a: &SetDescriptor, budget: &Budget) -> Result<Neighborhood> {
    let exact = |set| Ok(Neighborhood { set, exact: true });
    match e {
        Entourage::Diag => exact(a.clone()),
        Entourage::MetricBall(r) => exact(map_boxes(a, |b| Ok(b.inflate(*r)), |sw| Ok(Sweep { base: sw.base.inflate(*r), ..sw.clone() }))?),
        Entourage::GroupRight(SetDescriptor::Box(d)) => {
            exact(map_boxes(a, |b| Ok(b.minkowski(d)), |sw| Ok(Sweep { base: sw.base.minkowski(d), ..sw.clone() }))?)
        }
        Entourage::Product(src, dst) => {
            let meets = match (a, src) {
                (SetDescriptor::Sweep(_), _) | (_, SetDescriptor::Sweep(_)) => None,
                _ => {
                    let mut hit = false;
                    for p in a.boxes()? {
                        for q in src.boxes()? {
                            hit |= !box_intersect(&p, &q)?.is_empty();
                        }
                    }
                    Some(hit)
                }
            };
            match meets {
                Some(true) => exact(dst.clone()),
                Some(false) => exact(SetDescriptor::empty()),
                None => window_neighborhood(e, a, budget),
            }
        }
        Entourage::Union(p, q) => {
            let (np, nq) = (neighborhood(p, a, budget)?, neighborhood(q, a, budget)?);
            Ok(Neighborhood {
                set: SetDescriptor::union(vec![np.set, nq.set])?,
                exact: np.exact && nq.exact,
            })
        }
        Entourage::OrbitPair { rule: OrbitRule::Translation(m), set } => {
            if matches!(a, SetDescriptor::Sweep(_)) || matches!(set, SetDescriptor::Sweep(_)) {
                return window_neighborhood(e, a, budget);
            }
            // y = b2 + M l with M l ∈ A - B1
            let mut members = vec![a.clone()];
            for ab in a.boxes()? {
                for b1 in set.boxes()? {
                    let domain = Region::new(m.clone(), difference_box(&ab, &b1)?)?;
                    for b2 in set.boxes()? {
                        members.push(SetDescriptor::Sweep(Sweep {
                            base: b2.clone(),
                            matrix: m.clone(),
                            domain: domain.clone(),
                        }));
                    }
                }
            }
            exact(SetDescriptor::union(members)?)
        }
        Entourage::OrbitPair { rule: rule @ OrbitRule::Permutation(perms), set } => {
            let labels: Vec<Point> = (0..perms.first().map_or(0, Vec::len) as i64).map(|v| vec![v]).collect();
            let mut sources = Vec::new();
            for x in &labels {
                if a.contains_truth(x)?.is_yes() {
                    sources.push(x.clone());
                }
            }
            let mut out = Vec::new();
            for y in &labels {
                for x in &sources {
                    if x == y || matches!(orbit_pair_witness(rule, set, x, y)?, Feasibility::Yes(_)) {
                        out.push(y.clone());
                        break;
                    }
                }
            }
            exact(SetDescriptor::points(out))
        }
        Entourage::FiniteRel(pairs) => {
            let mut out = Vec::new();
            for (x, y) in pairs {
                if a.contains_truth(x)?.is_yes() {
                    out.push(y.clone());
                }
            }
            exact(SetDescriptor::points(out))
        }
        Entourage::Transpose(_) => {
            let r = entourage_rewrite(e);
            match r.entourage {
                Entourage::Transpose(_) => window_neighborhood(e, a, budget),
                other => {
                    let n = neighborhood(&other, a, budget)?;
                    Ok(Neighborhood { exact: n.exact && !r.approximate, ..n })
                }
            }
        }
        Entourage::Compose(p, q) => {
            let first = neighborhood(p, a, budget)?;
            let second = neighborhood(q, &first.set, budget)?;
            Ok(Neighborhood { set: second.set, exact: first.exact && second.exact })
        }
        _ => window_neighborhood(e, a, budget),
    }
}

fn map_boxes(
    a: &SetDescriptor,
    on_box: impl Fn(&IntBox) -> Result<IntBox> + Copy,
    on_sweep: impl Fn(&Sweep) -> Result<Sweep> + Copy,
) -> Result<SetDescriptor> {
    Ok(match a {
        SetDescriptor::Points(p) => {
            SetDescriptor::union(p.iter().map(|q| on_box(&IntBox::point(q)).map(SetDescriptor::Box)).collect::<Result<_>>()?)?
        }
        SetDescriptor::Box(b) if b.is_empty() => a.clone(),
        SetDescriptor::Box(b) => SetDescriptor::Box(on_box(b)?),
        SetDescriptor::Union(m) => {
            SetDescriptor::union(m.iter().map(|s| map_boxes(s, on_box, on_sweep)).collect::<Result<_>>()?)?
        }
        SetDescriptor::Sweep(sw) => SetDescriptor::Sweep(on_sweep(sw)?),
    })
}

/// Enumerates `e[a]` inside the window; the result is marked inexact.
fn window_neighborhood(e: &Entourage, a: &SetDescriptor, budget: &Budget) -> Result<Neighborhood> {
    let d = a.dim().unwrap_or(1);
    let window = IntBox::cube(d, budget.window.min(24));
    let sources: Vec<Point> = match a.finite_points()? {
        Some(p) => p,
        None => window.points()?.into_iter().filter(|p| a.contains_truth(p).map(|t| t.is_yes()).unwrap_or(false)).collect(),
    };
    let mut out = Vec::new();
    for y in window.points()? {
        for x in &sources {
            if entourage_membership(e, x, &y, budget)?.is_yes() {
                out.push(y.clone());
                break;
            }
        }
    }
    Ok(Neighborhood { set: SetDescriptor::points(out), exact: false })
}

/// Normal forms used for containment between entourages.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Normal {
    Full,
    /// `{(x, y) : y - x ∈ D}`.
    Difference(IntBox),
    /// `diag ∪ B × B`.
    Connected(IntBox),
    /// `diag ∪ ⋃_l (B + M l) × (B + M l)` for a rank-deficient or
    /// non-unimodular `M`.
    Swept { base: IntBox, matrix: IntMatrix },
    Finite(Vec<(Point, Point)>),
}

fn single_box(s: &SetDescriptor, d: usize) -> Option<IntBox> {
    match s {
        SetDescriptor::Box(b) => Some(b.clone()),
        SetDescriptor::Points(p) if p.is_empty() => Some(IntBox::empty(d)),
        SetDescriptor::Points(p) if p.len() == 1 => Some(IntBox::point(&p[0])),
        _ => None,
    }
}

fn is_unimodular_onto(m: &IntMatrix) -> bool {
    m.column_hnf().determinant() == Some(1)
}

pub fn normalize(e: &Entourage, d: usize) -> Option<Normal> {
    let n = match e {
        Entourage::Diag => Normal::Difference(IntBox::point(&vec![0; d])),
        Entourage::MetricBall(r) => Normal::Difference(IntBox::cube(d, *r)),
        Entourage::GroupRight(s) => Normal::Difference(single_box(s, d)?),
        Entourage::FiniteRel(p) => Normal::Finite(p.clone()),
        Entourage::OrbitPair { rule: OrbitRule::Translation(m), set } => {
            let b = single_box(set, d)?;
            if b.is_empty() {
                Normal::Difference(IntBox::point(&vec![0; d]))
            } else if b.is_full() {
                Normal::Full
            } else if m.is_zero() {
                Normal::Connected(b)
            } else if is_unimodular_onto(m) {
                match self_difference_set(&SetDescriptor::Box(b)).ok()? {
                    SetDescriptor::Box(sd) => Normal::Difference(sd),
                    _ => return None,
                }
            } else {
                Normal::Swept { base: b, matrix: m.clone() }
            }
        }
        Entourage::Union(a, b) => match (a.as_ref(), b.as_ref()) {
            (Entourage::Diag, Entourage::Product(p, q)) | (Entourage::Product(p, q), Entourage::Diag) if p == q => {
                Normal::Connected(single_box(p, d)?)
            }
            _ => return None,
        },
        Entourage::Product(p, q) if single_box(p, d)?.is_full() && single_box(q, d)?.is_full() => Normal::Full,
        _ => return None,
    };
    Some(match n {
        Normal::Difference(b) | Normal::Connected(b) if b.is_full() => Normal::Full,
        other => other,
    })
}

/// Verdict on `e1 ⊆ e2`, with a pair in `e1 \ e2` on failure.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Containment {
    pub truth: Truth,
    pub witness: Option<(Point, Point)>,
}

impl Containment {
    fn yes() -> Self {
        Containment { truth: Truth::Yes, witness: None }
    }

    fn no(x: Point, y: Point) -> Self {
        Containment { truth: Truth::No, witness: Some((x, y)) }
    }

    fn unknown() -> Self {
        Containment { truth: Truth::Unknown, witness: None }
    }

    fn from_bool(b: bool, witness: impl FnOnce() -> Option<(Point, Point)>) -> Self {
        if b {
            Containment::yes()
        } else {
            match witness() {
                Some((x, y)) => Containment::no(x, y),
                None => Containment::unknown(),
            }
        }
    }
}

/// A point of `a` outside `b`, for `a ⊄ b`.
fn point_outside(a: &IntBox, b: &IntBox) -> Option<Point> {
    if a.is_empty() {
        return None;
    }
    let mut p = a.anchor()?;
    if b.is_empty() {
        return Some(p);
    }
    for (i, (ia, ib)) in a.dims().iter().zip(b.dims()).enumerate() {
        if ia.lo < ib.lo {
            p[i] = match (ia.lo, ib.lo) {
                (End::Fin(v), _) => v,
                (_, End::Fin(v)) => v - 1,
                _ => unreachable!(),
            };
            return Some(p);
        }
        if ia.hi > ib.hi {
            p[i] = match (ia.hi, ib.hi) {
                (End::Fin(v), _) => v,
                (_, End::Fin(v)) => v + 1,
                _ => unreachable!(),
            };
            return Some(p);
        }
    }
    None
}

/// A point of `a` different from `p`.
fn other_point(a: &IntBox, p: &[i64]) -> Option<Point> {
    for (i, iv) in a.dims().iter().enumerate() {
        for v in [p[i] + 1, p[i] - 1] {
            if iv.contains(v) {
                let mut q = p.to_vec();
                q[i] = v;
                return Some(q);
            }
        }
    }
    None
}

fn selfdiff(b: &IntBox) -> IntBox {
    match self_difference_set(&SetDescriptor::Box(b.clone())) {
        Ok(SetDescriptor::Box(s)) => s,
        _ => IntBox::empty(b.dim()),
    }
}

fn add(a: &[i64], b: &[i64]) -> Point {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

/// Decides `e1 ⊆ e2` on ℤ^d.
pub fn entourage_leq(e1: &Entourage, e2: &Entourage, d: usize, budget: &Budget) -> Result<Containment> {
    let (Some(n1), Some(n2)) = (normalize(e1, d), normalize(e2, d)) else {
        return window_leq(e1, e2, d, budget);
    };
    let zero = vec![0; d];
    Ok(match (&n1, &n2) {
        (_, Normal::Full) => Containment::yes(),
        (Normal::Finite(pairs), _) => {
            for (x, y) in pairs {
                match entourage_membership(e2, x, y, budget)? {
                    Truth::No => return Ok(Containment::no(x.clone(), y.clone())),
                    Truth::Unknown => return Ok(Containment::unknown()),
                    Truth::Yes => {}
                }
            }
            Containment::yes()
        }
        (Normal::Full, Normal::Difference(dd)) => {
            let v = point_outside(&IntBox::full(d), dd);
            Containment::from_bool(false, || v.map(|v| (zero.clone(), v)))
        }
        (Normal::Full, Normal::Connected(b)) => {
            let p = point_outside(&IntBox::full(d), b);
            Containment::from_bool(false, || p.map(|p| (p.clone(), add(&p, &unit(d, 0)))))
        }
        (Normal::Difference(d1), Normal::Difference(d2)) => {
            Containment::from_bool(d1.is_subset(d2), || point_outside(d1, d2).map(|v| (zero.clone(), v)))
        }
        (Normal::Difference(dd), Normal::Connected(b)) => {
            let nonzero = other_point(dd, &zero).filter(|_| dd.contains(&zero).unwrap_or(false))
                .or_else(|| dd.anchor().filter(|a| a != &zero));
            match nonzero {
                None => Containment::yes(),
                Some(v) => {
                    let x = point_outside(&IntBox::full(d), b);
                    Containment::from_bool(false, || x.map(|x| (x.clone(), add(&x, &v))))
                }
            }
        }
        (Normal::Difference(dd), Normal::Swept { base, matrix }) => difference_in_swept(dd, base, matrix)?,
        (Normal::Connected(b), Normal::Difference(dd)) => {
            if b.diameter() == Some(0) || b.is_empty() {
                Containment::from_bool(dd.contains(&zero)?, || Some((zero.clone(), zero.clone())))
            } else {
                connected_in_difference(b, dd)
            }
        }
        (Normal::Connected(b1), Normal::Connected(b2)) => {
            if b1.diameter() == Some(0) || b1.is_empty() || b1.is_subset(b2) {
                Containment::yes()
            } else {
                let p = point_outside(b1, b2).expect("not a subset");
                Containment::from_bool(false, || other_point(b1, &p).map(|q| (p, q)))
            }
        }
        (Normal::Connected(b1), Normal::Swept { base, matrix }) => {
            if b1.diameter() == Some(0) || b1.is_empty() || single_translate(b1, base, matrix)? {
                Containment::yes()
            } else {
                window_leq(e1, e2, d, budget)?
            }
        }
        (Normal::Swept { base, .. }, Normal::Difference(dd)) => connected_in_difference(base, dd),
        (Normal::Swept { base, matrix }, Normal::Connected(b2)) => {
            if base.diameter() == Some(0) {
                return Ok(Containment::yes());
            }
            let swept = Region::from_box(IntBox::full(matrix.cols())).image_hull(matrix)?.expect("non-empty");
            let hull = base.minkowski(&swept);
            if hull.is_subset(b2) {
                Containment::yes()
            } else {
                swept_escape(base, matrix, b2)?
            }
        }
        (Normal::Swept { base: b1, matrix: m1 }, Normal::Swept { base: b2, matrix: m2 }) if m1 == m2 => {
            if b1.diameter() == Some(0) || single_translate(b1, b2, m2)? {
                Containment::yes()
            } else {
                window_leq(e1, e2, d, budget)?
            }
        }
        _ => window_leq(e1, e2, d, budget)?,
    })
}

fn unit(d: usize, i: usize) -> Point {
    let mut e = vec![0; d];
    e[i] = 1;
    e
}

/// `diag ∪ B × B ⊆ {y - x ∈ D}`.
fn connected_in_difference(b: &IntBox, dd: &IntBox) -> Containment {
    let sd = selfdiff(b);
    let zero = vec![0; b.dim()];
    if !dd.contains(&zero).unwrap_or(false) {
        return Containment::no(zero.clone(), zero);
    }
    Containment::from_bool(sd.is_subset(dd), || {
        let v = point_outside(&sd, dd)?;
        // v = y - x with x, y in b
        let x: Point = b
            .dims()
            .iter()
            .zip(&v)
            .map(|(iv, &vi)| if vi >= 0 { iv.lo.finite().unwrap_or(0) } else { iv.hi.finite().unwrap_or(0) })
            .collect();
        let x: Point = x
            .iter()
            .zip(b.dims())
            .zip(&v)
            .map(|((&xi, iv), &vi)| if iv.contains(xi) && iv.contains(xi + vi) { xi } else { iv.nearest_to_zero().unwrap_or(0).min(iv.hi.finite().map_or(i64::MAX, |h| h - vi.max(0))) })
            .collect();
        Some((x.clone(), add(&x, &v)))
    })
}

/// Whether `b1 ⊆ b2 + M l` for a single `l`.
fn single_translate(b1: &IntBox, b2: &IntBox, m: &IntMatrix) -> Result<bool> {
    if b1.is_empty() {
        return Ok(true);
    }
    if b2.is_empty() {
        return Ok(false);
    }
    // M l ∈ [hi1 - hi2, lo1 - lo2] coordinatewise
    let mut dims = Vec::with_capacity(b1.dim());
    for (i1, i2) in b1.dims().iter().zip(b2.dims()) {
        let lo = match (i1.hi, i2.hi) {
            (_, End::PosInf) => End::NegInf,
            (End::PosInf, _) => return Ok(false),
            (End::Fin(a), End::Fin(c)) => End::Fin(a - c),
            _ => End::NegInf,
        };
        let hi = match (i1.lo, i2.lo) {
            (_, End::NegInf) => End::PosInf,
            (End::NegInf, _) => return Ok(false),
            (End::Fin(a), End::Fin(c)) => End::Fin(a - c),
            _ => End::PosInf,
        };
        dims.push(Interval::new(lo, hi));
    }
    let c = IntBox::new(dims);
    if c.is_empty() {
        return Ok(false);
    }
    Ok(Region::new(m.clone(), c)?.feasible(DEFAULT_SEARCH_RADIUS)?.truth().is_yes())
}

/// `{y - x ∈ D} ⊆ E(L, B)` holds exactly when `D ⊆ B - B` and, for every
/// non-zero `v ∈ D`, the box `B ∩ (B - v)` plus the orbit lattice covers ℤ^d.
fn difference_in_swept(dd: &IntBox, base: &IntBox, m: &IntMatrix) -> Result<Containment> {
    let d = base.dim();
    let zero = vec![0; d];
    let sd = selfdiff(base);
    if !dd.is_subset(&sd) {
        let v = point_outside(dd, &sd).expect("not a subset");
        if v != zero {
            return Ok(Containment::no(zero, v));
        }
    }
    let Some(vs) = SetDescriptor::Box(dd.clone()).finite_points()? else {
        return Ok(Containment::unknown());
    };
    if vs.len() > 10_000 {
        return Ok(Containment::unknown());
    }
    for v in vs.iter().filter(|v| **v != zero) {
        let shifted = base.translate(&v.iter().map(|c| -c).collect::<Vec<_>>())?;
        let core = box_intersect(base, &shifted)?;
        match covers(&core, m, DEFAULT_SEARCH_RADIUS)? {
            Coverage::Covers => {}
            Coverage::Uncovered(x) => return Ok(Containment::no(x.clone(), add(&x, v))),
            Coverage::Unknown => return Ok(Containment::unknown()),
        }
    }
    Ok(Containment::yes())
}

/// A pair of `(B + M l)²` leaving `B2 × B2` for `E(L,B) ⊄ diag ∪ B2²`.
fn swept_escape(base: &IntBox, m: &IntMatrix, b2: &IntBox) -> Result<Containment> {
    let p = base.anchor().expect("non-empty");
    let q = other_point(base, &p).expect("two points");
    if !base.is_subset(b2) {
        let out = point_outside(base, b2).expect("outside");
        let partner = other_point(base, &out).expect("two points");
        return Ok(Containment::no(out, partner));
    }
    for j in 0..m.cols() {
        let c = m.column(j);
        for (i, &ci) in c.iter().enumerate() {
            if ci == 0 {
                continue;
            }
            let end = if ci > 0 { b2.dims()[i].hi } else { b2.dims()[i].lo };
            if let End::Fin(e) = end {
                let t = (e - p[i]).abs() / ci.abs() + 1;
                let shift: Point = c.iter().map(|v| v * t).collect();
                return Ok(Containment::no(add(&p, &shift), add(&q, &shift)));
            }
        }
    }
    Ok(Containment::unknown())
}

/// Counterexample search over pairs near the origin.
fn window_leq(e1: &Entourage, e2: &Entourage, d: usize, budget: &Budget) -> Result<Containment> {
    let radius = if d <= 2 { budget.window.min(12) } else { 3 };
    let grid = IntBox::cube(d, radius);
    for x in grid.points()? {
        let Some(sec) = section_hull(e1, &x, false)? else { continue };
        let sec = box_intersect(&sec, &IntBox::cube(d, budget.window))?;
        match sec.volume() {
            Some(v) if v <= 4_096 => {}
            _ => continue,
        }
        for y in sec.points()? {
            if entourage_membership(e1, &x, &y, budget)?.is_yes()
                && entourage_membership(e2, &x, &y, budget)?.is_no()
            {
                return Ok(Containment::no(x, y));
            }
        }
    }
    Ok(Containment::unknown())
}

/// Coarse structures: a finite principal family, or a cofinal chain
/// `level(0) ⊆ level(1) ⊆ ...` on ℤ^d.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum CoarseStructureSpec {
    FiniteClosure(FiniteClosure),
    Chain(ChainStructure),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ChainStructure {
    pub dim: usize,
    pub kind: ChainKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum ChainKind {
    /// `E_n = ball(n)`.
    MetricBalls,
    /// `E_n = diag ∪ B_n × B_n`.
    Connected(BornologySpec),
    /// `E_n = E(L, B_n)` for the translation action of `matrix`.
    OrbitPairs { matrix: IntMatrix, bornology: BornologySpec },
    /// `E_n = {(l, h) : h - l ∈ D_n}`.
    GroupRight(BornologySpec),
}

impl fmt::Display for CoarseStructureSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CoarseStructureSpec::FiniteClosure(c) => {
                write!(f, "finite closure on {} labels ({} maximal)", c.size, c.maximal.len())
            }
            CoarseStructureSpec::Chain(c) => match &c.kind {
                ChainKind::MetricBalls => write!(f, "metric balls on Z^{}", c.dim),
                ChainKind::Connected(b) => write!(f, "connected structure of {b}"),
                ChainKind::OrbitPairs { bornology, .. } => write!(f, "orbit pairs over {bornology}"),
                ChainKind::GroupRight(b) => write!(f, "group right structure of {b}"),
            },
        }
    }
}

/// Level `m` of a bornology on ℤ^d, the maximal bornology being constant.
pub fn bornology_level(b: &BornologySpec, d: usize, m: u64) -> Result<SetDescriptor> {
    match b {
        BornologySpec::Maximal => Ok(SetDescriptor::Box(IntBox::full(d))),
        other => other
            .level(m)?
            .ok_or_else(|| Error::Unsupported(format!("levels of `{other}`"))),
    }
}

impl ChainStructure {
    pub fn level(&self, n: u64) -> Result<Entourage> {
        Ok(match &self.kind {
            ChainKind::MetricBalls => Entourage::MetricBall(n as i64),
            ChainKind::Connected(b) => Entourage::connected(bornology_level(b, self.dim, n)?),
            ChainKind::OrbitPairs { matrix, bornology } => {
                Entourage::orbit_pair(matrix.clone(), bornology_level(bornology, self.dim, n)?)
            }
            ChainKind::GroupRight(b) => Entourage::GroupRight(bornology_level(b, self.dim, n)?),
        })
    }
}

impl CoarseStructureSpec {
    pub fn metric_balls(d: usize) -> Self {
        CoarseStructureSpec::Chain(ChainStructure { dim: d, kind: ChainKind::MetricBalls })
    }

    pub fn dim(&self) -> usize {
        match self {
            CoarseStructureSpec::FiniteClosure(_) => 1,
            CoarseStructureSpec::Chain(c) => c.dim,
        }
    }
}

pub fn associated_connected_structure(b: &BornologySpec, space: &GroundSpace) -> Result<CoarseStructureSpec> {
    match space {
        GroundSpace::Finite { .. } => {
            let n = space.size().expect("finite");
            let rel = match b {
                BornologySpec::Maximal => Relation::full(n),
                BornologySpec::FiniteBase { base, .. } => {
                    let mut r = Relation::diag(n);
                    for &s in base {
                        for x in (0..n).filter(|x| s >> x & 1 == 1) {
                            for y in (0..n).filter(|y| s >> y & 1 == 1) {
                                r.insert(x, y);
                            }
                        }
                    }
                    r
                }
                other => return Err(Error::Unsupported(format!("`{other}` on a finite space"))),
            };
            Ok(CoarseStructureSpec::FiniteClosure(close_finite_base(space, &[rel])?))
        }
        GroundSpace::Lattice { dim } => Ok(CoarseStructureSpec::Chain(ChainStructure {
            dim: *dim,
            kind: ChainKind::Connected(b.clone()),
        })),
    }
}

/// Verdict of [`coarsely_bounded`]. A bound at `n` certifies
/// `s × s ⊆ level(n)`, so `s ⊆ level(n)[A]` for the anchor set `A ⊆ s`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoarseBound {
    pub verdict: BoundVerdict,
    pub anchors: Vec<Point>,
}

fn center(s: &SetDescriptor) -> Result<Option<Point>> {
    Ok(match s {
        SetDescriptor::Box(b) if b.is_finite() && !b.is_empty() => Some(
            b.dims()
                .iter()
                .map(|iv| {
                    let (lo, hi) = (iv.lo.finite().unwrap(), iv.hi.finite().unwrap());
                    lo + (hi - lo) / 2
                })
                .collect(),
        ),
        SetDescriptor::Box(b) => b.anchor(),
        SetDescriptor::Points(p) => p.first().cloned(),
        SetDescriptor::Union(m) => m.iter().find_map(|x| center(x).ok().flatten()),
        SetDescriptor::Sweep(sw) => match sw.domain.feasible(DEFAULT_SEARCH_RADIUS)? {
            Feasibility::Yes(l) => Some(add(&sw.base.anchor().unwrap_or_default(), &sw.matrix.apply(&l)?)),
            _ => None,
        },
    })
}

/// `s × s ⊆ e`.
pub fn square_leq(s: &SetDescriptor, e: &Entourage, d: usize, budget: &Budget) -> Result<Truth> {
    if s.at_most_one_point()? {
        return Ok(Truth::Yes);
    }
    let Some(h) = s.hull()? else { return Ok(Truth::Yes) };
    let hull_exact = matches!(s, SetDescriptor::Box(_));
    let inconclusive_no = |b: bool| if b { Truth::Yes } else if hull_exact { Truth::No } else { Truth::Unknown };
    match normalize(e, d) {
        Some(Normal::Full) => Ok(Truth::Yes),
        Some(Normal::Difference(dd)) => Ok(inconclusive_no(selfdiff(&h).is_subset(&dd))),
        Some(Normal::Connected(b)) => Ok(inconclusive_no(h.is_subset(&b))),
        Some(Normal::Swept { base, matrix }) => {
            if single_translate(&h, &base, &matrix)? {
                return Ok(Truth::Yes);
            }
            if let Some(points) = s.finite_points()? {
                if points.len() <= 48 {
                    let mut acc = Truth::Yes;
                    for x in &points {
                        for y in &points {
                            acc = acc.and(entourage_membership(e, x, y, budget)?);
                            if acc.is_no() {
                                return Ok(acc);
                            }
                        }
                    }
                    return Ok(acc);
                }
            }
            Ok(Truth::Unknown)
        }
        Some(Normal::Finite(_)) | None => {
            let Some(points) = s.finite_points()? else { return Ok(Truth::Unknown) };
            if points.len() > 48 {
                return Ok(Truth::Unknown);
            }
            let mut acc = Truth::Yes;
            for x in &points {
                for y in &points {
                    acc = acc.and(entourage_membership(e, x, y, budget)?);
                }
            }
            Ok(acc)
        }
    }
}

/// Search cap on chain indices for bound and containment searches.
pub fn index_cap(budget: &Budget) -> u64 {
    8 * (u64::from(budget.max_index) + 1)
}

/// Least `n <= cap` with `pred(n)` true, assuming monotonicity; `Err` carries
/// whether any probe came back unknown.
fn least_index(cap: u64, mut pred: impl FnMut(u64) -> Result<Truth>) -> Result<std::result::Result<u64, bool>> {
    let mut unknown = false;
    let mut lo = 0;
    let mut probe = 0;
    loop {
        match pred(probe)? {
            Truth::Yes => break,
            Truth::Unknown => unknown = true,
            Truth::No => {}
        }
        lo = probe + 1;
        if probe >= cap {
            return Ok(Err(unknown));
        }
        probe = (probe * 2 + 1).min(cap);
    }
    let mut hi = probe;
    while lo < hi {
        let mid = (lo + hi) / 2;
        if pred(mid)?.is_yes() {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    Ok(Ok(hi))
}

pub fn coarsely_bounded(cs: &CoarseStructureSpec, s: &SetDescriptor, budget: &Budget) -> Result<CoarseBound> {
    let chain = match cs {
        CoarseStructureSpec::FiniteClosure(c) => {
            return Ok(CoarseBound {
                verdict: BoundVerdict::BoundedAt(0),
                anchors: (0..c.size as i64).map(|i| vec![i]).collect(),
            })
        }
        CoarseStructureSpec::Chain(c) => c,
    };
    if let Some(sd) = s.dim() {
        check_dim(chain.dim, sd)?;
    }
    let anchors: Vec<Point> = center(s)?.into_iter().collect();
    if s.at_most_one_point()? {
        return Ok(CoarseBound { verdict: BoundVerdict::BoundedAt(0), anchors });
    }
    let h = s.hull()?.expect("non-empty");
    if chain.kind == ChainKind::MetricBalls {
        if let Some(diam) = h.diameter() {
            return Ok(CoarseBound { verdict: BoundVerdict::BoundedAt(diam as u64), anchors });
        }
    }
    let d = chain.dim;
    let found = least_index(index_cap(budget), |n| square_leq(s, &chain.level(n)?, d, budget))?;
    match found {
        Ok(n) => Ok(CoarseBound { verdict: BoundVerdict::BoundedAt(n), anchors }),
        Err(_) => {
            let verdict = match coarse_escape(chain, s, &h, budget)? {
                Some(e) => BoundVerdict::Unbounded(e),
                None => BoundVerdict::Inconclusive { window: budget.window, max_index: budget.max_index },
            };
            Ok(CoarseBound { verdict, anchors })
        }
    }
}

/// Points `p_m ∈ s` with `(x0, p_m) ∉ level(m)` for every `m <= max_index`,
/// moving along an unbounded direction of `s`.
fn coarse_escape(chain: &ChainStructure, s: &SetDescriptor, h: &IntBox, budget: &Budget) -> Result<Option<Escape>> {
    let d = chain.dim;
    let (x0, dir) = match s {
        SetDescriptor::Box(b) => {
            let Some(i) = (0..d).find(|&i| !b.dims()[i].is_bounded()) else { return Ok(None) };
            let sign = if b.dims()[i].hi == End::PosInf { 1 } else { -1 };
            let mut r = vec![0; d];
            r[i] = sign;
            (b.anchor().expect("non-empty"), r)
        }
        SetDescriptor::Sweep(sw) => {
            let Some(i) = (0..d).find(|&i| !h.dims()[i].is_bounded()) else { return Ok(None) };
            let sign = if h.dims()[i].hi == End::PosInf { 1 } else { -1 };
            let obj: Vec<i64> = sw.matrix.row(i).iter().map(|v| v * sign).collect();
            let Some(r) = sw.domain.ray_towards(&obj) else { return Ok(None) };
            let Some(x0) = center(s)? else { return Ok(None) };
            (x0, sw.matrix.apply(&r)?)
        }
        _ => return Ok(None),
    };
    let mut points = Vec::new();
    let mut t = 1i64;
    for m in 0..=u64::from(budget.max_index) {
        let level = chain.level(m)?;
        loop {
            let p = add(&x0, &dir.iter().map(|v| v * t).collect::<Vec<_>>());
            if entourage_membership(&level, &x0, &p, budget)?.is_no() {
                points.push(p);
                break;
            }
            t += 1;
            if t > 16 * budget.window {
                return Ok(None);
            }
        }
    }
    Ok(Some(Escape { points, start: Some(x0), direction: Some(dir) }))
}

/// Result of [`structure_leq`]: for every `n <= max_index` the least `m`
/// with `level1(n) ⊆ level2(m)`, or a failing level with one witness pair
/// per `m <= max_index`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LeqReport {
    pub holds: Truth,
    pub indices: Vec<(u64, u64)>,
    pub failing_level: Option<u64>,
    pub witnesses: Vec<(Point, Point)>,
}

pub fn structure_leq(cs1: &CoarseStructureSpec, cs2: &CoarseStructureSpec, budget: &Budget) -> Result<LeqReport> {
    match (cs1, cs2) {
        (CoarseStructureSpec::FiniteClosure(a), CoarseStructureSpec::FiniteClosure(b)) => {
            check_dim(a.size, b.size)?;
            let bad = a.maximal.iter().find(|r| !b.contains(r));
            let witness = bad.and_then(|r| {
                r.pairs()
                    .into_iter()
                    .find(|&(x, y)| !b.maximal.iter().any(|m| m.contains(x, y)))
                    .map(|(x, y)| (vec![x as i64], vec![y as i64]))
            });
            Ok(LeqReport {
                holds: Truth::from_bool(bad.is_none()),
                indices: if bad.is_none() { vec![(0, 0)] } else { Vec::new() },
                failing_level: bad.map(|_| 0),
                witnesses: witness.into_iter().collect(),
            })
        }
        (CoarseStructureSpec::Chain(c1), CoarseStructureSpec::Chain(c2)) => {
            check_dim(c1.dim, c2.dim)?;
            let d = c1.dim;
            let cap = index_cap(budget);
            let mut indices = Vec::new();
            let mut unknown = false;
            for n in 0..=u64::from(budget.max_index) {
                let e1 = c1.level(n)?;
                match least_index(cap, |m| Ok(entourage_leq(&e1, &c2.level(m)?, d, budget)?.truth))? {
                    Ok(m) => indices.push((n, m)),
                    Err(saw_unknown) => {
                        let mut witnesses = Vec::new();
                        for m in 0..=u64::from(budget.max_index) {
                            let c = entourage_leq(&e1, &c2.level(m)?, d, budget)?;
                            match c.witness {
                                Some(w) if c.truth.is_no() => witnesses.push(w),
                                _ => break,
                            }
                        }
                        if !saw_unknown && witnesses.len() == budget.max_index as usize + 1 {
                            return Ok(LeqReport { holds: Truth::No, indices, failing_level: Some(n), witnesses });
                        }
                        unknown = true;
                    }
                }
            }
            Ok(LeqReport {
                holds: if unknown { Truth::Unknown } else { Truth::Yes },
                indices,
                failing_level: None,
                witnesses: Vec::new(),
            })
        }
        _ => Err(Error::Invalid("comparing coarse structures on different ground spaces".into())),
    }
}

/// Levels `G_n = level(n)[[-n, n]^d]` of the bornology induced by a chain
/// structure, cofinal among its coarsely bounded sets.
pub fn induced_levels(chain: &ChainStructure, budget: &Budget) -> Result<Vec<SetDescriptor>> {
    (0..=u64::from(budget.max_index))
        .map(|n| {
            let a = SetDescriptor::Box(IntBox::cube(chain.dim, n as i64));
            let nb = neighborhood(&chain.level(n)?, &a, budget)?;
            if !nb.exact {
                return Err(Error::Inconclusive(format!("neighborhood at level {n} only window-exact")));
            }
            Ok(nb.set)
        })
        .collect()
}

/// The induced bornology as an affine chain, when every `G_n` is a box whose
/// ends are affine in `n`.
pub fn induced_bornology(cs: &CoarseStructureSpec, budget: &Budget) -> Result<BornologySpec> {
    let chain = match cs {
        CoarseStructureSpec::FiniteClosure(_) => return Ok(BornologySpec::Maximal),
        CoarseStructureSpec::Chain(c) => c,
    };
    let levels = induced_levels(chain, budget)?;
    let boxes: Vec<IntBox> = levels
        .iter()
        .map(|s| match s.hull()? {
            Some(h) if SetDescriptor::Box(h.clone()) == *s || boxes_fill(s, &h)? => Ok(h),
            _ => Err(Error::Unsupported(format!("induced level {s} is not a box"))),
        })
        .collect::<Result<_>>()?;
    if boxes.iter().all(|b| b.is_full()) {
        return Ok(BornologySpec::Maximal);
    }
    let fit = |pick: &dyn Fn(&IntBox, usize) -> End, i: usize, upper: bool| -> Result<IndexExpr> {
        let e0 = pick(&boxes[0], i);
        let e1 = pick(boxes.get(1).unwrap_or(&boxes[0]), i);
        let expr = match (e0, e1) {
            (End::Fin(a), End::Fin(b)) => IndexExpr::affine(b - a, a),
            (End::NegInf, End::NegInf) => IndexExpr::NegInf,
            (End::PosInf, End::PosInf) => IndexExpr::PosInf,
            _ => return Err(Error::Unsupported("induced chain ends are not affine".into())),
        };
        for (n, b) in boxes.iter().enumerate() {
            if expr.eval(n as u64) != pick(b, i) {
                return Err(Error::Unsupported(format!(
                    "induced chain {} end of coordinate {i} is not affine",
                    if upper { "upper" } else { "lower" }
                )));
            }
        }
        Ok(expr)
    };
    let d = chain.dim;
    let lower = (0..d).map(|i| fit(&|b: &IntBox, i| b.dims()[i].lo, i, false)).collect::<Result<_>>()?;
    let upper = (0..d).map(|i| fit(&|b: &IntBox, i| b.dims()[i].hi, i, true)).collect::<Result<_>>()?;
    Ok(BornologySpec::Chain(ChainShape::new(lower, upper)?))
}

/// Whether a union of boxes and sweeps fills its hull, checked through
/// one-dimensional merging or exact sweep hulls.
fn boxes_fill(s: &SetDescriptor, h: &IntBox) -> Result<bool> {
    match s {
        SetDescriptor::Union(members) => {
            // a member equal to the hull settles it
            for m in members {
                if let Some(mh) = m.hull()? {
                    if &mh == h && matches!(m, SetDescriptor::Box(_)) {
                        return Ok(true);
                    }
                }
            }
            Ok(false)
        }
        _ => Ok(false),
    }
}

/// Mutual cofinality of the induced bornology of `cs` with `b`: every `G_n`
/// is bounded in `b`, and every level of `b` is coarsely bounded.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Recovery {
    pub holds: Truth,
    /// `(n, k)`: `G_n` lies in level `k` of `b`.
    pub forward: Vec<(u64, Option<u64>)>,
    /// `(j, n)`: level `j` of `b` squared lies in `level(n)`.
    pub backward: Vec<(u64, Option<u64>)>,
}

pub fn recovers_bornology(cs: &CoarseStructureSpec, b: &BornologySpec, budget: &Budget) -> Result<Recovery> {
    let chain = match cs {
        CoarseStructureSpec::FiniteClosure(_) => {
            return Ok(Recovery { holds: Truth::Yes, forward: vec![(0, Some(0))], backward: vec![(0, Some(0))] })
        }
        CoarseStructureSpec::Chain(c) => c,
    };
    let mut holds = Truth::Yes;
    let mut forward = Vec::new();
    let levels = match induced_levels(chain, budget) {
        Ok(l) => l,
        Err(Error::Inconclusive(_)) => {
            return Ok(Recovery { holds: Truth::Unknown, forward, backward: Vec::new() });
        }
        Err(e) => return Err(e),
    };
    for (n, g) in levels.iter().enumerate() {
        let v = is_bounded(b, g, budget)?;
        holds = holds.and(match v {
            BoundVerdict::BoundedAt(_) => Truth::Yes,
            BoundVerdict::Unbounded(_) => Truth::No,
            BoundVerdict::Inconclusive { .. } => Truth::Unknown,
        });
        forward.push((n as u64, v.index()));
    }
    let mut backward = Vec::new();
    for j in 0..=u64::from(budget.max_index) {
        let level = bornology_level(b, chain.dim, j)?;
        let v = coarsely_bounded(cs, &level, budget)?.verdict;
        holds = holds.and(match v {
            BoundVerdict::BoundedAt(_) => Truth::Yes,
            BoundVerdict::Unbounded(_) => Truth::No,
            BoundVerdict::Inconclusive { .. } => Truth::Unknown,
        });
        backward.push((j, v.index()));
    }
    Ok(Recovery { holds, forward, backward })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn budget() -> Budget {
        Budget::new(16, 8)
    }

    fn m(rows: usize, cols: usize, data: &[i64]) -> IntMatrix {
        IntMatrix::new(rows, cols, data.to_vec()).unwrap()
    }

    fn quadrant(r: i64) -> SetDescriptor {
        SetDescriptor::Box(IntBox::new(vec![Interval::new(End::NegInf, End::Fin(r)); 2]))
    }

    #[test]
    fn closure_examples() {
        let two = GroundSpace::finite(2);
        assert_eq!(close_finite_base(&two, &[]).unwrap().maximal, vec![Relation::diag(2)]);
        let full = Relation::full(2);
        assert_eq!(close_finite_base(&two, &[full]).unwrap().maximal, vec![full]);
        let three = GroundSpace::finite(3);
        let ab = Relation::from_pairs(3, &[(0, 1)]).unwrap();
        let closed = close_finite_base(&three, &[ab]).unwrap();
        let expected = Relation::from_pairs(3, &[(0, 0), (1, 1), (2, 2), (0, 1), (1, 0)]).unwrap();
        assert_eq!(closed.maximal, vec![expected]);
        assert_eq!(naive_closure(&three, &[ab]).unwrap(), closed);
        assert!(closed.axiom_failures().is_empty());
        assert!(close_finite_base(&GroundSpace::finite(13), &[]).is_err());
    }

    #[test]
    fn membership_examples() {
        let b = budget();
        assert!(entourage_membership(&Entourage::MetricBall(3), &[0], &[3], &b).unwrap().is_yes());
        let hyper = m(2, 1, &[1, -1]);
        let e = Entourage::orbit_pair(hyper.clone(), quadrant(0));
        let w = orbit_pair_witness(&OrbitRule::Translation(hyper.clone()), &quadrant(0), &[5, -5], &[0, -10]).unwrap();
        assert_eq!(w, Feasibility::Yes(vec![5]));
        assert!(entourage_membership(&e, &[5, -5], &[0, -10], &b).unwrap().is_yes());
        // window oracle over l
        let oracle = (-20..=20i64).any(|l| 5 - l <= 0 && -5 + l <= 0 && -l <= 0 && -10 + l <= 0);
        assert!(oracle);
        let right = Entourage::GroupRight(SetDescriptor::Box(IntBox::from_bounds(&[(-2, 2)])));
        assert!(entourage_membership(&right, &[10], &[13], &b).unwrap().is_no());
    }

    #[test]
    fn ball_zero_is_diagonal() {
        let b = budget();
        for x in -3..=3i64 {
            for y in -3..=3i64 {
                assert_eq!(
                    entourage_membership(&Entourage::MetricBall(0), &[x, 1], &[y, 1], &b).unwrap(),
                    entourage_membership(&Entourage::Diag, &[x, 1], &[y, 1], &b).unwrap()
                );
            }
        }
    }

    #[test]
    fn rewrite_examples() {
        let r = entourage_rewrite(&Entourage::compose(Entourage::MetricBall(2), Entourage::MetricBall(3)));
        assert_eq!(r, Rewritten { entourage: Entourage::MetricBall(5), approximate: false });
        let b = budget();
        let composed = Entourage::compose(Entourage::MetricBall(2), Entourage::MetricBall(3));
        for x in -16..=16i64 {
            for y in [-16i64, -6, -5, 0, 4, 5, 6, 16] {
                let direct = compose_search(&Entourage::MetricBall(2), &Entourage::MetricBall(3), &[x], &[y], &b)
                    .unwrap()
                    .0;
                assert_eq!(direct, entourage_membership(&composed, &[x], &[y], &b).unwrap());
            }
        }
        let orbit = Entourage::orbit_pair(m(1, 1, &[1]), SetDescriptor::Box(IntBox::from_bounds(&[(0, 1)])));
        assert_eq!(entourage_rewrite(&Entourage::transpose(orbit.clone())).entourage, orbit);
        let later = Entourage::orbit_pair(m(1, 1, &[1]), SetDescriptor::Box(IntBox::from_bounds(&[(5, 6)])));
        let r = entourage_rewrite(&Entourage::compose(orbit, later));
        assert!(r.approximate);
        assert_eq!(
            r.entourage,
            Entourage::orbit_pair(m(1, 1, &[1]), SetDescriptor::Box(IntBox::from_bounds(&[(0, 7)])))
        );
    }

    #[test]
    fn neighborhood_examples() {
        let b = budget();
        let n = neighborhood(&Entourage::MetricBall(2), &SetDescriptor::points(vec![vec![0]]), &b).unwrap();
        assert_eq!(n.set, SetDescriptor::Box(IntBox::from_bounds(&[(-2, 2)])));
        let p = SetDescriptor::points(vec![vec![1, 1]]);
        assert_eq!(neighborhood(&Entourage::Diag, &p, &b).unwrap().set, p);
        let e = Entourage::orbit_pair(m(2, 1, &[1, -1]), quadrant(0));
        let n = neighborhood(&e, &SetDescriptor::points(vec![vec![0, 0]]), &b).unwrap();
        assert!(n.exact);
        // union of the translates l·S_0 that contain the origin
        let shifted = |l: i64, x: i64, y: i64| x - l <= 0 && y + l <= 0;
        for x in -8..=8i64 {
            for y in -8..=8i64 {
                let oracle = (x, y) == (0, 0) || (-16..=16).any(|l| shifted(l, 0, 0) && shifted(l, x, y));
                assert_eq!(n.set.contains(&[x, y]).unwrap(), oracle, "({x}, {y})");
            }
        }
        assert!(!n.set.contains(&[-8, 1]).unwrap());
        // C3 on three labels with B = {0, 1}: every translate of B meets 0
        let perms = vec![vec![0, 1, 2], vec![1, 2, 0], vec![2, 0, 1]];
        let e = Entourage::OrbitPair { rule: OrbitRule::Permutation(perms), set: SetDescriptor::points(vec![vec![0], vec![1]]) };
        let n = neighborhood(&e, &SetDescriptor::points(vec![vec![0]]), &b).unwrap();
        assert!(n.exact);
        assert_eq!(n.set, SetDescriptor::points(vec![vec![0], vec![1], vec![2]]));
    }

    #[test]
    fn coarse_boundedness_examples() {
        let b = budget();
        let balls = CoarseStructureSpec::metric_balls(1);
        let s = SetDescriptor::Box(IntBox::from_bounds(&[(4, 6)]));
        let v = coarsely_bounded(&balls, &s, &b).unwrap();
        assert_eq!(v.verdict, BoundVerdict::BoundedAt(2));
        assert_eq!(v.anchors, vec![vec![5]]);
        let ray = SetDescriptor::Box(IntBox::new(vec![Interval::new(End::NegInf, End::Fin(0))]));
        match coarsely_bounded(&balls, &ray, &b).unwrap().verdict {
            BoundVerdict::Unbounded(e) => assert_eq!(e.direction, Some(vec![-1])),
            other => panic!("{other:?}"),
        }
        let fin = CoarseStructureSpec::FiniteClosure(close_finite_base(&GroundSpace::finite(3), &[]).unwrap());
        let all = SetDescriptor::points(vec![vec![0], vec![1], vec![2]]);
        let v = coarsely_bounded(&fin, &all, &b).unwrap();
        assert_eq!(v.verdict, BoundVerdict::BoundedAt(0));
        assert_eq!(v.anchors.len(), 3);
    }

    #[test]
    fn connected_structure_levels() {
        let b = budget();
        let cs = associated_connected_structure(&BornologySpec::cubes(1), &GroundSpace::lattice(1)).unwrap();
        let CoarseStructureSpec::Chain(c) = &cs else { panic!() };
        assert_eq!(c.level(2).unwrap(), Entourage::connected(SetDescriptor::Box(IntBox::from_bounds(&[(-2, 2)]))));
        let fin = associated_connected_structure(&BornologySpec::Maximal, &GroundSpace::finite(2)).unwrap();
        assert_eq!(fin, CoarseStructureSpec::FiniteClosure(FiniteClosure { size: 2, maximal: vec![Relation::full(2)] }));
        let hyper = BornologySpec::Chain(
            ChainShape::new(vec![IndexExpr::NegInf; 2], vec![IndexExpr::affine(1, 0); 2]).unwrap(),
        );
        let hs = associated_connected_structure(&hyper, &GroundSpace::lattice(2)).unwrap();
        let CoarseStructureSpec::Chain(hc) = &hs else { panic!() };
        assert!(entourage_membership(&hc.level(5).unwrap(), &[5, -5], &[0, 0], &b).unwrap().is_yes());
        assert!(entourage_membership(&hc.level(4).unwrap(), &[5, -5], &[0, 0], &b).unwrap().is_no());
    }

    #[test]
    fn structure_comparisons() {
        let b = budget();
        let balls = CoarseStructureSpec::metric_balls(1);
        let r = structure_leq(&balls, &balls, &b).unwrap();
        assert_eq!(r.holds, Truth::Yes);
        assert!(r.indices.iter().all(|&(n, m)| n == m));
        let eb = associated_connected_structure(&BornologySpec::cubes(1), &GroundSpace::lattice(1)).unwrap();
        let r = structure_leq(&eb, &balls, &b).unwrap();
        assert_eq!(r.holds, Truth::Yes);
        assert!(r.indices.iter().all(|&(n, m)| m == 2 * n));
        let r = structure_leq(&balls, &eb, &b).unwrap();
        assert_eq!(r.holds, Truth::No);
        assert_eq!(r.failing_level, Some(1));
        for (mm, (x, y)) in r.witnesses.iter().enumerate() {
            assert_eq!(y[0] - x[0], 1);
            let level = match &eb {
                CoarseStructureSpec::Chain(c) => c.level(mm as u64).unwrap(),
                _ => unreachable!(),
            };
            assert!(entourage_membership(&level, x, y, &b).unwrap().is_no());
        }
    }

    #[test]
    fn swept_containments() {
        let b = budget();
        let first = m(2, 1, &[1, 0]);
        let swept = Entourage::orbit_pair(first.clone(), SetDescriptor::Box(IntBox::cube(2, 2)));
        let c = entourage_leq(&swept, &Entourage::MetricBall(4), 2, &b).unwrap();
        assert_eq!(c.truth, Truth::Yes);
        let c = entourage_leq(&Entourage::MetricBall(1), &swept, 2, &b).unwrap();
        assert_eq!(c.truth, Truth::No);
        let (x, y) = c.witness.unwrap();
        assert!(entourage_membership(&swept, &x, &y, &b).unwrap().is_no());
        assert!(entourage_membership(&Entourage::MetricBall(1), &x, &y, &b).unwrap().is_yes());
        let wide = Entourage::orbit_pair(
            first,
            SetDescriptor::Box(IntBox::new(vec![Interval::closed(-1, 1), Interval::full()])),
        );
        assert_eq!(entourage_leq(&Entourage::MetricBall(1), &wide, 2, &b).unwrap().truth, Truth::Yes);
    }

    #[test]
    fn induced_bornology_of_balls() {
        let b = budget();
        let induced = induced_bornology(&CoarseStructureSpec::metric_balls(1), &b).unwrap();
        assert_eq!(
            induced,
            BornologySpec::Chain(ChainShape::new(vec![IndexExpr::affine(-2, 0)], vec![IndexExpr::affine(2, 0)]).unwrap())
        );
        let rec = recovers_bornology(&CoarseStructureSpec::metric_balls(1), &BornologySpec::cubes(1), &b).unwrap();
        assert_eq!(rec.holds, Truth::Yes);
    }
}
