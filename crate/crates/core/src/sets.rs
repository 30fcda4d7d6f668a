//! Finitely describable subsets of finite label sets and of ℤ^d.
//!
//! Boxes are products of integer intervals whose ends may be infinite. The
//! class is closed under intersection, translation and difference, which is
//! all the transporter calculus needs.

use std::cmp::{max, min};
use std::fmt;

use crate::error::{check_dim, Error, Result};
use crate::lattice::{IntMatrix, Region, DEFAULT_SEARCH_RADIUS};
use crate::Truth;

/// Coordinates of a lattice point, or `[label index]` on a finite space.
pub type Point = Vec<i64>;

/// Largest number of members kept in a `Union` descriptor.
pub const MAX_UNION: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum GroundSpace {
    Finite { labels: Vec<String> },
    Lattice { dim: usize },
}

impl GroundSpace {
    pub fn finite(size: usize) -> Self {
        GroundSpace::Finite {
            labels: (0..size).map(|i| format!("p{i}")).collect(),
        }
    }

    pub fn lattice(dim: usize) -> Self {
        GroundSpace::Lattice { dim }
    }

    /// Length of a point of this space.
    pub fn dim(&self) -> usize {
        match self {
            GroundSpace::Finite { .. } => 1,
            GroundSpace::Lattice { dim } => *dim,
        }
    }

    pub fn size(&self) -> Option<usize> {
        match self {
            GroundSpace::Finite { labels } => Some(labels.len()),
            GroundSpace::Lattice { .. } => None,
        }
    }

    pub fn is_lattice(&self) -> bool {
        matches!(self, GroundSpace::Lattice { .. })
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            GroundSpace::Finite { labels } => {
                let mut sorted = labels.clone();
                sorted.sort();
                sorted.dedup();
                if sorted.len() != labels.len() {
                    return Err(Error::Invalid("finite labels are not distinct".into()));
                }
                Ok(())
            }
            GroundSpace::Lattice { dim } if *dim == 0 => {
                Err(Error::Invalid("lattice dimension must be at least 1".into()))
            }
            GroundSpace::Lattice { .. } => Ok(()),
        }
    }

    pub fn check_point(&self, x: &[i64]) -> Result<()> {
        check_dim(self.dim(), x.len())?;
        if let GroundSpace::Finite { labels } = self {
            if x[0] < 0 || x[0] as usize >= labels.len() {
                return Err(Error::Invalid(format!("label index {} out of range", x[0])));
            }
        }
        Ok(())
    }
}

/// One end of an integer interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum End {
    NegInf,
    Fin(i64),
    PosInf,
}

impl End {
    pub fn finite(self) -> Option<i64> {
        match self {
            End::Fin(v) => Some(v),
            _ => None,
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, End::Fin(_))
    }

    pub fn shift(self, v: i64) -> End {
        match self {
            End::Fin(a) => End::Fin(a + v),
            e => e,
        }
    }

    pub fn neg(self) -> End {
        match self {
            End::NegInf => End::PosInf,
            End::PosInf => End::NegInf,
            End::Fin(a) => End::Fin(-a),
        }
    }

    /// `self - other` for a lower end minus an upper end. Any infinity makes
    /// the result unbounded below.
    pub fn lower_minus(self, upper: End) -> End {
        match (self, upper) {
            (End::Fin(a), End::Fin(b)) => End::Fin(a - b),
            _ => End::NegInf,
        }
    }

    /// `self - other` for an upper end minus a lower end.
    pub fn upper_minus(self, lower: End) -> End {
        match (self, lower) {
            (End::Fin(a), End::Fin(b)) => End::Fin(a - b),
            _ => End::PosInf,
        }
    }

    /// Sum of two lower ends (or two upper ends); an infinity absorbs.
    pub fn plus(self, other: End) -> End {
        match (self, other) {
            (End::Fin(a), End::Fin(b)) => End::Fin(a + b),
            (End::NegInf, _) | (_, End::NegInf) => End::NegInf,
            _ => End::PosInf,
        }
    }

    fn flip_low_bit(self) -> End {
        match self {
            End::Fin(a) => End::Fin(a ^ 1),
            e => e,
        }
    }
}

impl fmt::Display for End {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            End::NegInf => write!(f, "-inf"),
            End::PosInf => write!(f, "inf"),
            End::Fin(v) => write!(f, "{v}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Interval {
    pub lo: End,
    pub hi: End,
}

impl Interval {
    pub fn new(lo: End, hi: End) -> Self {
        Interval { lo, hi }
    }

    pub fn closed(lo: i64, hi: i64) -> Self {
        Interval::new(End::Fin(lo), End::Fin(hi))
    }

    pub fn point(v: i64) -> Self {
        Interval::closed(v, v)
    }

    pub fn full() -> Self {
        Interval::new(End::NegInf, End::PosInf)
    }

    pub fn is_empty(&self) -> bool {
        self.lo == End::PosInf || self.hi == End::NegInf || self.lo > self.hi
    }

    pub fn contains(&self, v: i64) -> bool {
        self.lo <= End::Fin(v) && End::Fin(v) <= self.hi
    }

    pub fn is_bounded(&self) -> bool {
        self.lo.is_finite() && self.hi.is_finite()
    }

    pub fn intersect(&self, other: &Interval) -> Interval {
        Interval::new(max(self.lo, other.lo), min(self.hi, other.hi))
    }

    pub fn hull(&self, other: &Interval) -> Interval {
        Interval::new(min(self.lo, other.lo), max(self.hi, other.hi))
    }

    pub fn is_subset(&self, other: &Interval) -> bool {
        self.is_empty() || (other.lo <= self.lo && self.hi <= other.hi)
    }

    /// An integer inside a non-empty interval, as close to zero as possible.
    pub fn nearest_to_zero(&self) -> Option<i64> {
        if self.is_empty() {
            return None;
        }
        let lo = self.lo.finite();
        let hi = self.hi.finite();
        Some(match (lo, hi) {
            (Some(a), _) if a > 0 => a,
            (_, Some(b)) if b < 0 => b,
            _ => 0,
        })
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let open = if self.lo == End::NegInf { '(' } else { '[' };
        let close = if self.hi == End::PosInf { ')' } else { ']' };
        write!(f, "{open}{},{}{close}", self.lo, self.hi)
    }
}

/// A product of integer intervals. The empty box is stored canonically, so
/// two empty boxes of the same dimension compare equal.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct IntBox {
    dims: Vec<Interval>,
    empty: bool,
}

impl IntBox {
    pub fn new(dims: Vec<Interval>) -> Self {
        if dims.iter().any(Interval::is_empty) {
            IntBox::empty(dims.len())
        } else {
            IntBox { dims, empty: false }
        }
    }

    pub fn empty(dim: usize) -> Self {
        IntBox {
            dims: vec![Interval::new(End::PosInf, End::NegInf); dim],
            empty: true,
        }
    }

    pub fn full(dim: usize) -> Self {
        IntBox::new(vec![Interval::full(); dim])
    }

    /// The ℓ∞ cube `[-r, r]^d`.
    pub fn cube(dim: usize, r: i64) -> Self {
        IntBox::new(vec![Interval::closed(-r, r); dim])
    }

    pub fn point(p: &[i64]) -> Self {
        IntBox::new(p.iter().map(|&v| Interval::point(v)).collect())
    }

    pub fn from_bounds(bounds: &[(i64, i64)]) -> Self {
        IntBox::new(bounds.iter().map(|&(a, b)| Interval::closed(a, b)).collect())
    }

    pub fn dim(&self) -> usize {
        self.dims.len()
    }

    pub fn dims(&self) -> &[Interval] {
        &self.dims
    }

    pub fn is_empty(&self) -> bool {
        self.empty
    }

    pub fn is_finite(&self) -> bool {
        self.empty || self.dims.iter().all(Interval::is_bounded)
    }

    pub fn is_full(&self) -> bool {
        !self.empty && self.dims.iter().all(|iv| *iv == Interval::full())
    }

    pub fn contains(&self, x: &[i64]) -> Result<bool> {
        check_dim(self.dim(), x.len())?;
        Ok(!self.empty && self.dims.iter().zip(x).all(|(iv, &v)| iv.contains(v)))
    }

    pub fn is_subset(&self, other: &IntBox) -> bool {
        self.empty
            || (!other.empty && self.dims.iter().zip(&other.dims).all(|(a, b)| a.is_subset(b)))
    }

    pub fn hull(&self, other: &IntBox) -> IntBox {
        if self.empty {
            return other.clone();
        }
        if other.empty {
            return self.clone();
        }
        IntBox::new(self.dims.iter().zip(&other.dims).map(|(a, b)| a.hull(b)).collect())
    }

    /// Minkowski sum `{a + b}` of two boxes.
    pub fn minkowski(&self, other: &IntBox) -> IntBox {
        if self.empty || other.empty {
            return IntBox::empty(self.dim());
        }
        IntBox::new(
            self.dims
                .iter()
                .zip(&other.dims)
                .map(|(a, b)| Interval::new(a.lo.plus(b.lo), a.hi.plus(b.hi)))
                .collect(),
        )
    }

    /// `{-x : x in self}`.
    pub fn neg(&self) -> IntBox {
        if self.empty {
            return self.clone();
        }
        IntBox::new(self.dims.iter().map(|iv| Interval::new(iv.hi.neg(), iv.lo.neg())).collect())
    }

    pub fn inflate(&self, r: i64) -> IntBox {
        self.minkowski(&IntBox::cube(self.dim(), r))
    }

    /// Largest coordinate width, `None` when some end is infinite.
    pub fn diameter(&self) -> Option<i64> {
        if self.empty {
            return Some(0);
        }
        self.dims
            .iter()
            .map(|iv| Some(iv.hi.finite()? - iv.lo.finite()?))
            .try_fold(0, |acc, w| w.map(|w| acc.max(w)))
    }

    /// Number of integer points, `None` when infinite or overflowing.
    pub fn volume(&self) -> Option<u128> {
        if self.empty {
            return Some(0);
        }
        self.dims.iter().try_fold(1u128, |acc, iv| {
            let w = (iv.hi.finite()? - iv.lo.finite()? + 1) as u128;
            acc.checked_mul(w)
        })
    }

    /// A member of the box close to the origin.
    pub fn anchor(&self) -> Option<Point> {
        if self.empty {
            return None;
        }
        self.dims.iter().map(Interval::nearest_to_zero).collect()
    }

    /// The integer points of a finite box in lexicographic order.
    pub fn points(&self) -> Result<Vec<Point>> {
        let vol = self
            .volume()
            .ok_or_else(|| Error::Unsupported("enumerating an infinite box".into()))?;
        if vol > 5_000_000 {
            return Err(Error::TooLarge(format!("box with {vol} points")));
        }
        let mut out = Vec::with_capacity(vol as usize);
        if self.empty {
            return Ok(out);
        }
        let bounds: Vec<(i64, i64)> = self
            .dims
            .iter()
            .map(|iv| (iv.lo.finite().unwrap(), iv.hi.finite().unwrap()))
            .collect();
        let mut cur: Point = bounds.iter().map(|b| b.0).collect();
        loop {
            out.push(cur.clone());
            let mut i = cur.len();
            loop {
                if i == 0 {
                    return Ok(out);
                }
                i -= 1;
                if cur[i] < bounds[i].1 {
                    cur[i] += 1;
                    break;
                }
                cur[i] = bounds[i].0;
            }
        }
    }

    /// Translation by `v`; used by set_translate and by the lattice search.
    pub fn translate(&self, v: &[i64]) -> Result<IntBox> {
        check_dim(self.dim(), v.len())?;
        if self.empty {
            return Ok(self.clone());
        }
        let mut dims: Vec<Interval> = self
            .dims
            .iter()
            .zip(v)
            .map(|(iv, &s)| Interval::new(iv.lo.shift(s), iv.hi.shift(s)))
            .collect();
        if fault::active() == Some(fault::Fault::TranslateLow) {
            dims[0].lo = dims[0].lo.flip_low_bit();
        }
        Ok(IntBox::new(dims))
    }
}

impl fmt::Display for IntBox {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.empty {
            return write!(f, "empty");
        }
        let parts: Vec<String> = self.dims.iter().map(Interval::to_string).collect();
        write!(f, "{}", parts.join("x"))
    }
}

/// `{b + M l : b in base, l in domain}` for a lattice region `domain`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Sweep {
    pub base: IntBox,
    pub matrix: IntMatrix,
    pub domain: Region,
}

impl Sweep {
    pub fn contains(&self, y: &[i64], radius: i64) -> Result<Truth> {
        check_dim(self.base.dim(), y.len())?;
        if self.base.is_empty() {
            return Ok(Truth::No);
        }
        // M l in y - base and N l in C
        let target = self.base.neg().translate(y)?;
        let stacked = Region::new(
            self.matrix.stack(&self.domain.matrix)?,
            concat_boxes(&target, &self.domain.constraint),
        )?;
        Ok(stacked.feasible(radius)?.truth())
    }

    /// Box hull of the swept set.
    pub fn hull(&self) -> Result<IntBox> {
        if self.base.is_empty() {
            return Ok(IntBox::empty(self.base.dim()));
        }
        match self.domain.image_hull(&self.matrix)? {
            None => Ok(IntBox::empty(self.base.dim())),
            Some(h) => Ok(self.base.minkowski(&h)),
        }
    }
}

/// Cartesian product of two boxes.
pub fn concat_boxes(a: &IntBox, b: &IntBox) -> IntBox {
    if a.is_empty() || b.is_empty() {
        return IntBox::empty(a.dim() + b.dim());
    }
    IntBox::new(a.dims().iter().chain(b.dims()).copied().collect())
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum SetDescriptor {
    Points(Vec<Point>),
    Box(IntBox),
    /// Flat union of at most [`MAX_UNION`] non-union members.
    Union(Vec<SetDescriptor>),
    Sweep(Sweep),
}

impl SetDescriptor {
    pub fn points(mut pts: Vec<Point>) -> Self {
        pts.sort();
        pts.dedup();
        SetDescriptor::Points(pts)
    }

    pub fn empty() -> Self {
        SetDescriptor::Points(Vec::new())
    }

    pub fn union(members: Vec<SetDescriptor>) -> Result<Self> {
        let mut flat = Vec::new();
        for m in members {
            match m {
                SetDescriptor::Union(inner) => flat.extend(inner),
                other if other.is_trivially_empty() => {}
                other => flat.push(other),
            }
        }
        if flat.len() > MAX_UNION {
            return Err(Error::TooLarge(format!("union of {} members", flat.len())));
        }
        if flat.len() > 1 && flat.iter().all(|m| m.dim() == Some(1)) {
            flat = merge_one_dimensional(flat);
        }
        Ok(match flat.len() {
            0 => SetDescriptor::empty(),
            1 => flat.pop().unwrap(),
            _ => SetDescriptor::Union(flat),
        })
    }

    fn is_trivially_empty(&self) -> bool {
        match self {
            SetDescriptor::Points(p) => p.is_empty(),
            SetDescriptor::Box(b) => b.is_empty(),
            SetDescriptor::Union(m) => m.is_empty(),
            SetDescriptor::Sweep(s) => s.base.is_empty(),
        }
    }

    /// Point length, `None` for the empty point list.
    pub fn dim(&self) -> Option<usize> {
        match self {
            SetDescriptor::Points(p) => p.first().map(Vec::len),
            SetDescriptor::Box(b) => Some(b.dim()),
            SetDescriptor::Union(m) => m.iter().find_map(SetDescriptor::dim),
            SetDescriptor::Sweep(s) => Some(s.base.dim()),
        }
    }

    pub fn contains_truth(&self, x: &[i64]) -> Result<Truth> {
        if let Some(d) = self.dim() {
            check_dim(d, x.len())?;
        }
        match self {
            SetDescriptor::Points(p) => Ok(Truth::from_bool(p.binary_search(&x.to_vec()).is_ok())),
            SetDescriptor::Box(b) => Ok(Truth::from_bool(b.contains(x)?)),
            SetDescriptor::Union(m) => {
                let mut acc = Truth::No;
                for s in m {
                    acc = acc.or(s.contains_truth(x)?);
                    if acc.is_yes() {
                        break;
                    }
                }
                Ok(acc)
            }
            SetDescriptor::Sweep(s) => s.contains(x, DEFAULT_SEARCH_RADIUS),
        }
    }

    /// Exact membership; a sweep whose lattice search runs out of budget
    /// reports [`Error::Inconclusive`].
    pub fn contains(&self, x: &[i64]) -> Result<bool> {
        match self.contains_truth(x)? {
            Truth::Yes => Ok(true),
            Truth::No => Ok(false),
            Truth::Unknown => Err(Error::Inconclusive(format!("membership of {x:?}"))),
        }
    }

    /// Smallest box containing the set, `None` when empty.
    pub fn hull(&self) -> Result<Option<IntBox>> {
        let h = match self {
            SetDescriptor::Points(p) => {
                let mut it = p.iter();
                let Some(first) = it.next() else { return Ok(None) };
                it.fold(IntBox::point(first), |acc, q| acc.hull(&IntBox::point(q)))
            }
            SetDescriptor::Box(b) => b.clone(),
            SetDescriptor::Union(m) => {
                let mut acc: Option<IntBox> = None;
                for s in m {
                    if let Some(h) = s.hull()? {
                        acc = Some(match acc {
                            None => h,
                            Some(a) => a.hull(&h),
                        });
                    }
                }
                return Ok(acc);
            }
            SetDescriptor::Sweep(s) => s.hull()?,
        };
        Ok(if h.is_empty() { None } else { Some(h) })
    }

    pub fn is_empty(&self) -> Result<bool> {
        Ok(self.hull()?.is_none())
    }

    /// Decomposition into boxes (points become degenerate boxes).
    pub fn boxes(&self) -> Result<Vec<IntBox>> {
        match self {
            SetDescriptor::Points(p) => Ok(p.iter().map(|q| IntBox::point(q)).collect()),
            SetDescriptor::Box(b) if b.is_empty() => Ok(Vec::new()),
            SetDescriptor::Box(b) => Ok(vec![b.clone()]),
            SetDescriptor::Union(m) => {
                let mut out = Vec::new();
                for s in m {
                    out.extend(s.boxes()?);
                }
                Ok(out)
            }
            SetDescriptor::Sweep(_) => Err(Error::Unsupported("box decomposition of a sweep".into())),
        }
    }

    /// Explicit points when the set is finite and small.
    pub fn finite_points(&self) -> Result<Option<Vec<Point>>> {
        match self {
            SetDescriptor::Points(p) => Ok(Some(p.clone())),
            SetDescriptor::Sweep(_) => Ok(None),
            _ => {
                let mut out = Vec::new();
                for b in self.boxes()? {
                    if !b.is_finite() {
                        return Ok(None);
                    }
                    out.extend(b.points()?);
                }
                out.sort();
                out.dedup();
                Ok(Some(out))
            }
        }
    }

    /// True when the set has at most one point.
    pub fn at_most_one_point(&self) -> Result<bool> {
        Ok(match self.hull()? {
            None => true,
            Some(h) => h.diameter() == Some(0),
        })
    }
}

impl fmt::Display for SetDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SetDescriptor::Points(p) => {
                let parts: Vec<String> = p.iter().map(|q| format!("{q:?}")).collect();
                write!(f, "{{{}}}", parts.join(","))
            }
            SetDescriptor::Box(b) => write!(f, "{b}"),
            SetDescriptor::Union(m) => {
                let parts: Vec<String> = m.iter().map(|s| s.to_string()).collect();
                write!(f, "{}", parts.join(" u "))
            }
            SetDescriptor::Sweep(s) => write!(f, "sweep({} by {:?})", s.base, s.matrix),
        }
    }
}

fn merge_one_dimensional(members: Vec<SetDescriptor>) -> Vec<SetDescriptor> {
    let mut intervals = Vec::new();
    let mut rest = Vec::new();
    for m in members {
        match m {
            SetDescriptor::Box(b) if !b.is_empty() => intervals.push(b.dims()[0]),
            SetDescriptor::Points(p) => intervals.extend(p.iter().map(|q| Interval::point(q[0]))),
            other => rest.push(other),
        }
    }
    intervals.sort_by(|a, b| a.lo.cmp(&b.lo));
    let mut merged: Vec<Interval> = Vec::new();
    for iv in intervals {
        if let Some(last) = merged.last_mut() {
            // integer intervals that overlap or touch merge
            if iv.lo <= last.hi.shift(1) || last.hi == End::PosInf {
                last.hi = max(last.hi, iv.hi);
                continue;
            }
        }
        merged.push(iv);
    }
    let mut out: Vec<SetDescriptor> = merged
        .into_iter()
        .map(|iv| SetDescriptor::Box(IntBox::new(vec![iv])))
        .collect();
    out.extend(rest);
    out
}

pub fn set_membership(s: &SetDescriptor, x: &[i64]) -> Result<bool> {
    s.contains(x)
}

pub fn box_intersect(b1: &IntBox, b2: &IntBox) -> Result<IntBox> {
    check_dim(b1.dim(), b2.dim())?;
    if b1.is_empty() || b2.is_empty() {
        return Ok(IntBox::empty(b1.dim()));
    }
    let mut dims: Vec<Interval> = b1.dims().iter().zip(b2.dims()).map(|(a, b)| a.intersect(b)).collect();
    if fault::active() == Some(fault::Fault::IntersectHigh) {
        dims[0].hi = dims[0].hi.flip_low_bit();
    }
    Ok(IntBox::new(dims))
}

/// `{v : (v + source) meets target}`, computed coordinatewise as
/// `[lo_t - hi_s, hi_t - lo_s]`.
pub fn difference_box(target: &IntBox, source: &IntBox) -> Result<IntBox> {
    check_dim(target.dim(), source.dim())?;
    if target.is_empty() || source.is_empty() {
        return Err(Error::EmptyBox);
    }
    let mut dims: Vec<Interval> = target
        .dims()
        .iter()
        .zip(source.dims())
        .map(|(t, s)| Interval::new(t.lo.lower_minus(s.hi), t.hi.upper_minus(s.lo)))
        .collect();
    if fault::active() == Some(fault::Fault::DifferenceLow) {
        dims[0].lo = dims[0].lo.flip_low_bit();
    }
    Ok(IntBox::new(dims))
}

pub fn set_translate(s: &SetDescriptor, v: &[i64]) -> Result<SetDescriptor> {
    if let Some(d) = s.dim() {
        check_dim(d, v.len())?;
    }
    Ok(match s {
        SetDescriptor::Points(p) => {
            let mut out: Vec<Point> = p.iter().map(|q| q.iter().zip(v).map(|(a, b)| a + b).collect()).collect();
            if fault::active() == Some(fault::Fault::TranslateLow) {
                for q in &mut out {
                    q[0] ^= 1;
                }
            }
            SetDescriptor::points(out)
        }
        SetDescriptor::Box(b) => SetDescriptor::Box(b.translate(v)?),
        SetDescriptor::Union(m) => {
            SetDescriptor::union(m.iter().map(|x| set_translate(x, v)).collect::<Result<_>>()?)?
        }
        SetDescriptor::Sweep(sw) => SetDescriptor::Sweep(Sweep {
            base: sw.base.translate(v)?,
            ..sw.clone()
        }),
    })
}

/// `{y - x : x, y in s}`.
pub fn self_difference_set(s: &SetDescriptor) -> Result<SetDescriptor> {
    match s {
        SetDescriptor::Points(p) => {
            let mut out = Vec::with_capacity(p.len() * p.len());
            for x in p {
                for y in p {
                    out.push(y.iter().zip(x).map(|(a, b)| a - b).collect());
                }
            }
            Ok(SetDescriptor::points(out))
        }
        SetDescriptor::Box(b) => {
            if b.is_empty() {
                return Ok(SetDescriptor::Box(b.clone()));
            }
            Ok(SetDescriptor::Box(IntBox::new(
                b.dims()
                    .iter()
                    .map(|iv| Interval::new(iv.lo.lower_minus(iv.hi), iv.hi.upper_minus(iv.lo)))
                    .collect(),
            )))
        }
        SetDescriptor::Union(_) => Err(Error::Unsupported(
            "difference set of a union; decompose into members first".into(),
        )),
        SetDescriptor::Sweep(_) => Err(Error::Unsupported("difference set of a sweep".into())),
    }
}

/// Fault injection into the box arithmetic, used to show that the oracle
/// cross-check notices single-bit corruption. Faults are per thread.
#[doc(hidden)]
pub mod fault {
    use std::cell::Cell;

    #[derive(Debug, Clone, Copy, PartialEq, Eq)]
    pub enum Fault {
        /// Flip the low bit of the first lower end produced by `difference_box`.
        DifferenceLow,
        /// Flip the low bit of the first upper end produced by `box_intersect`.
        IntersectHigh,
        /// Flip the low bit of the first coordinate after a translation.
        TranslateLow,
    }

    thread_local! {
        static ACTIVE: Cell<Option<Fault>> = const { Cell::new(None) };
    }

    pub fn active() -> Option<Fault> {
        ACTIVE.with(Cell::get)
    }

    /// Runs `body` with `fault` active on the current thread.
    pub fn with_fault<R>(fault: Option<Fault>, body: impl FnOnce() -> R) -> R {
        let prev = ACTIVE.with(|c| c.replace(fault));
        let out = body();
        ACTIVE.with(|c| c.set(prev));
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn b1(lo: i64, hi: i64) -> IntBox {
        IntBox::from_bounds(&[(lo, hi)])
    }

    #[test]
    fn membership_examples() {
        let sq = SetDescriptor::Box(IntBox::cube(2, 1));
        assert!(sq.contains(&[0, 0]).unwrap());
        let quad = SetDescriptor::Box(IntBox::new(vec![
            Interval::new(End::NegInf, End::Fin(0)),
            Interval::new(End::NegInf, End::Fin(0)),
        ]));
        assert!(!quad.contains(&[1, 0]).unwrap());
        let u = SetDescriptor::union(vec![
            SetDescriptor::points(vec![vec![5]]),
            SetDescriptor::Box(b1(0, 2)),
        ])
        .unwrap();
        assert!(u.contains(&[5]).unwrap());
        assert!(matches!(
            sq.contains(&[0]),
            Err(Error::DimensionMismatch { expected: 2, found: 1 })
        ));
    }

    #[test]
    fn intersect_examples() {
        assert_eq!(box_intersect(&b1(0, 3), &b1(2, 5)).unwrap(), b1(2, 3));
        assert!(box_intersect(&b1(0, 1), &b1(3, 4)).unwrap().is_empty());
        let a = IntBox::new(vec![Interval::new(End::NegInf, End::Fin(0))]);
        let b = IntBox::new(vec![Interval::new(End::Fin(-2), End::PosInf)]);
        assert_eq!(box_intersect(&a, &b).unwrap(), b1(-2, 0));
    }

    #[test]
    fn difference_examples() {
        // enumeration over [-20, 20]: v with (v + [0,1]) meeting [5,6]
        let brute: Vec<i64> = (-20..=20)
            .filter(|v| (0..=1).any(|s| (5..=6).contains(&(v + s))))
            .collect();
        assert_eq!(brute, vec![4, 5, 6]);
        assert_eq!(difference_box(&b1(5, 6), &b1(0, 1)).unwrap(), b1(4, 6));
        assert_eq!(difference_box(&b1(0, 0), &b1(0, 0)).unwrap(), b1(0, 0));
        let down = IntBox::new(vec![Interval::new(End::NegInf, End::Fin(0))]);
        assert_eq!(difference_box(&down, &down).unwrap(), IntBox::full(1));
        assert!(matches!(
            difference_box(&IntBox::empty(1), &b1(0, 0)),
            Err(Error::EmptyBox)
        ));
    }

    #[test]
    fn translate_examples() {
        let t = set_translate(&SetDescriptor::Box(b1(0, 1)), &[3]).unwrap();
        assert_eq!(t, SetDescriptor::Box(b1(3, 4)));
        let p = set_translate(&SetDescriptor::points(vec![vec![0, 0], vec![1, 1]]), &[1, -1]).unwrap();
        assert_eq!(p, SetDescriptor::points(vec![vec![1, -1], vec![2, 0]]));
        let m = 2;
        let quad = IntBox::new(vec![
            Interval::new(End::NegInf, End::Fin(0)),
            Interval::new(End::NegInf, End::Fin(0)),
        ]);
        let moved = set_translate(&SetDescriptor::Box(quad), &[m + 1, -m - 1]).unwrap();
        let expect = IntBox::new(vec![
            Interval::new(End::NegInf, End::Fin(3)),
            Interval::new(End::NegInf, End::Fin(-3)),
        ]);
        assert_eq!(moved, SetDescriptor::Box(expect));
    }

    #[test]
    fn self_difference_examples() {
        // brute force over the three points of [-1, 1]
        let mut diffs: Vec<i64> = Vec::new();
        for x in -1..=1 {
            for y in -1..=1 {
                diffs.push(y - x);
            }
        }
        diffs.sort();
        diffs.dedup();
        assert_eq!(diffs, vec![-2, -1, 0, 1, 2]);
        assert_eq!(
            self_difference_set(&SetDescriptor::Box(IntBox::cube(1, 1))).unwrap(),
            SetDescriptor::Box(b1(-2, 2))
        );
        assert_eq!(
            self_difference_set(&SetDescriptor::points(vec![vec![0], vec![5]])).unwrap(),
            SetDescriptor::points(vec![vec![-5], vec![0], vec![5]])
        );
        assert_eq!(
            self_difference_set(&SetDescriptor::Box(b1(0, 0))).unwrap(),
            SetDescriptor::Box(b1(0, 0))
        );
        let u = SetDescriptor::Union(vec![SetDescriptor::Box(b1(0, 0)), SetDescriptor::Box(b1(3, 3))]);
        assert!(matches!(self_difference_set(&u), Err(Error::Unsupported(_))));
    }

    #[test]
    fn union_merges_in_one_dimension() {
        let u = SetDescriptor::union(vec![
            SetDescriptor::Box(b1(0, 2)),
            SetDescriptor::Box(b1(3, 5)),
            SetDescriptor::points(vec![vec![9]]),
        ])
        .unwrap();
        assert_eq!(
            u,
            SetDescriptor::Union(vec![SetDescriptor::Box(b1(0, 5)), SetDescriptor::Box(b1(9, 9))])
        );
        let too_many: Vec<SetDescriptor> = (0..65)
            .map(|i| SetDescriptor::Box(IntBox::point(&[i * 3, 0])))
            .collect();
        assert!(matches!(SetDescriptor::union(too_many), Err(Error::TooLarge(_))));
    }

    #[test]
    fn canonical_emptiness() {
        assert_eq!(IntBox::from_bounds(&[(3, 1), (0, 0)]), IntBox::empty(2));
        assert_eq!(SetDescriptor::union(vec![]).unwrap(), SetDescriptor::empty());
    }
}
