//! Integer matrices, column Hermite normal form, rational polyhedra by
//! Fourier–Motzkin elimination, and lattice regions `{l ∈ ℤ^k : M·l ∈ C}`.

use std::fmt;

use num_integer::Integer;
use num_rational::Ratio;

use crate::error::{check_dim, Error, Result};
use crate::sets::{End, IntBox, Interval, Point};
use crate::Truth;

pub type Q = Ratio<i128>;

/// Search radius used when a lattice feasibility question is not settled by
/// the exact paths.
pub const DEFAULT_SEARCH_RADIUS: i64 = 64;

const ENUMERATION_CAP: u128 = 2_000_000;

/// Row-major integer matrix.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    data: Vec<i64>,
}

impl fmt::Debug for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<Vec<i64>> = (0..self.rows).map(|i| self.row(i).to_vec()).collect();
        write!(f, "{rows:?}")
    }
}

impl IntMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<i64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Invalid(format!(
                "matrix data has {} entries, expected {rows}x{cols}",
                data.len()
            )));
        }
        Ok(IntMatrix { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        IntMatrix { rows, cols, data: vec![0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = IntMatrix::zeros(n, n);
        for i in 0..n {
            m.set(i, i, 1);
        }
        m
    }

    /// Builds a `rows x columns.len()` matrix from its columns.
    pub fn from_columns(rows: usize, columns: &[Vec<i64>]) -> Result<Self> {
        let mut m = IntMatrix::zeros(rows, columns.len());
        for (j, c) in columns.iter().enumerate() {
            check_dim(rows, c.len())?;
            for (i, &v) in c.iter().enumerate() {
                m.set(i, j, v);
            }
        }
        Ok(m)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> i64 {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: i64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[i64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<i64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn columns(&self) -> Vec<Vec<i64>> {
        (0..self.cols).map(|j| self.column(j)).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&v| v == 0)
    }

    pub fn apply(&self, l: &[i64]) -> Result<Point> {
        check_dim(self.cols, l.len())?;
        Ok((0..self.rows)
            .map(|i| self.row(i).iter().zip(l).map(|(a, b)| a * b).sum())
            .collect())
    }

    pub fn neg(&self) -> IntMatrix {
        IntMatrix {
            data: self.data.iter().map(|v| -v).collect(),
            ..self.clone()
        }
    }

    /// Vertical concatenation `[self; other]`.
    pub fn stack(&self, other: &IntMatrix) -> Result<IntMatrix> {
        check_dim(self.cols, other.cols)?;
        let mut data = self.data.clone();
        data.extend_from_slice(&other.data);
        Ok(IntMatrix {
            rows: self.rows + other.rows,
            cols: self.cols,
            data,
        })
    }

    pub fn mul(&self, other: &IntMatrix) -> Result<IntMatrix> {
        check_dim(self.cols, other.rows)?;
        let mut out = IntMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for j in 0..other.cols {
                let v = (0..self.cols).map(|t| self.get(i, t) * other.get(t, j)).sum();
                out.set(i, j, v);
            }
        }
        Ok(out)
    }

    /// Largest absolute row sum, the ℓ∞ operator norm.
    pub fn norm_inf(&self) -> i64 {
        (0..self.rows)
            .map(|i| self.row(i).iter().map(|v| v.abs()).sum())
            .max()
            .unwrap_or(0)
    }

    pub fn column_hnf(&self) -> ColumnHnf {
        ColumnHnf::compute(self)
    }
}

/// `M·U = [H | 0]` with `U` unimodular and `H` in lower column echelon form:
/// column `j` of `H` vanishes above its pivot row, pivots strictly increase
/// and pivot entries are positive.
#[derive(Debug, Clone)]
pub struct ColumnHnf {
    pub basis: IntMatrix,
    pub transform: IntMatrix,
    pub pivots: Vec<usize>,
}

impl ColumnHnf {
    fn compute(m: &IntMatrix) -> ColumnHnf {
        let (d, k) = (m.rows, m.cols);
        let mut a: Vec<Vec<i128>> = (0..k).map(|j| m.column(j).into_iter().map(i128::from).collect()).collect();
        let mut u: Vec<Vec<i128>> = (0..k)
            .map(|j| (0..k).map(|i| i128::from(i == j)).collect())
            .collect();
        let mut c = 0;
        let mut pivots = Vec::new();
        for i in 0..d {
            if c == k {
                break;
            }
            for j in c + 1..k {
                if a[j][i] == 0 {
                    continue;
                }
                let (x, y) = (a[c][i], a[j][i]);
                let eg = x.extended_gcd(&y);
                let (g, s, t) = (eg.gcd, eg.x, eg.y);
                let (p, q) = (x / g, y / g);
                // [col_c, col_j] <- [s col_c + t col_j, -q col_c + p col_j]
                for cols in [&mut a, &mut u] {
                    let cc = cols[c].clone();
                    let cj = cols[j].clone();
                    cols[c] = cc.iter().zip(&cj).map(|(u, v)| s * u + t * v).collect();
                    cols[j] = cc.iter().zip(&cj).map(|(u, v)| -q * u + p * v).collect();
                }
            }
            if a[c][i] != 0 {
                if a[c][i] < 0 {
                    a[c].iter_mut().for_each(|v| *v = -*v);
                    u[c].iter_mut().for_each(|v| *v = -*v);
                }
                pivots.push(i);
                c += 1;
            }
        }
        let basis = IntMatrix::from_columns(d, &a[..c].iter().map(|col| col.iter().map(|&v| v as i64).collect()).collect::<Vec<_>>())
            .expect("column lengths match");
        let transform = IntMatrix::from_columns(k, &u.iter().map(|col| col.iter().map(|&v| v as i64).collect()).collect::<Vec<_>>())
            .expect("column lengths match");
        ColumnHnf { basis, transform, pivots }
    }

    pub fn rank(&self) -> usize {
        self.pivots.len()
    }

    /// Lifts lattice coordinates `c` (length `rank`) back to a group element.
    pub fn lift(&self, c: &[i64]) -> Point {
        let mut full = c.to_vec();
        full.resize(self.transform.cols(), 0);
        self.transform.apply(&full).expect("lengths match")
    }

    /// Canonical representative of `y` modulo the column lattice when the
    /// lattice has full rank: coordinate `p_j` is reduced into `[0, h_j)`.
    pub fn reduce(&self, y: &[i64]) -> Option<Point> {
        if self.rank() != self.basis.rows() {
            return None;
        }
        let mut v = y.to_vec();
        for (j, &p) in self.pivots.iter().enumerate() {
            let h = self.basis.get(p, j);
            let q = Integer::div_floor(&v[p], &h);
            for i in 0..v.len() {
                v[i] -= q * self.basis.get(i, j);
            }
        }
        Some(v)
    }

    /// Index of the column lattice in ℤ^d, `None` when not of full rank.
    pub fn determinant(&self) -> Option<i64> {
        if self.rank() != self.basis.rows() {
            return None;
        }
        Some(self.pivots.iter().enumerate().map(|(j, &p)| self.basis.get(p, j)).product())
    }
}

/// `a·x <= b` with integer coefficients.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
struct Ineq {
    a: Vec<i128>,
    b: i128,
}

impl Ineq {
    fn normalized(mut self) -> Ineq {
        let g = self.a.iter().fold(0i128, |g, v| g.gcd(v));
        if g > 1 {
            // rational projection: scale only, no integer rounding
            let g2 = g.gcd(&self.b);
            if g2 > 1 {
                self.a.iter_mut().for_each(|v| *v /= g2);
                self.b /= g2;
            }
        }
        self
    }

    fn is_trivial(&self) -> bool {
        self.a.iter().all(|&v| v == 0)
    }
}

/// Rational polyhedron `{x : A x <= b}`.
#[derive(Debug, Clone)]
pub struct Polyhedron {
    n: usize,
    cons: Vec<Ineq>,
}

impl Polyhedron {
    pub fn new(n: usize) -> Self {
        Polyhedron { n, cons: Vec::new() }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn push_le(&mut self, a: Vec<i128>, b: i128) {
        debug_assert_eq!(a.len(), self.n);
        self.cons.push(Ineq { a, b }.normalized());
    }

    pub fn push_ge(&mut self, a: Vec<i128>, b: i128) {
        self.push_le(a.into_iter().map(|v| -v).collect(), -b);
    }

    fn eliminate(cons: &[Ineq], j: usize) -> Option<Vec<Ineq>> {
        let mut pos = Vec::new();
        let mut neg = Vec::new();
        let mut out = Vec::new();
        for c in cons {
            match c.a[j].signum() {
                1 => pos.push(c),
                -1 => neg.push(c),
                _ => out.push(c.clone()),
            }
        }
        for p in &pos {
            for q in &neg {
                let (sp, sq) = (-q.a[j], p.a[j]);
                let a: Vec<i128> = p.a.iter().zip(&q.a).map(|(x, y)| sp * x + sq * y).collect();
                let b = sp * p.b + sq * q.b;
                out.push(Ineq { a, b }.normalized());
            }
        }
        let mut kept = Vec::with_capacity(out.len());
        for c in out {
            if c.is_trivial() {
                if c.b < 0 {
                    return None;
                }
            } else {
                kept.push(c);
            }
        }
        kept.sort_by(|x, y| (&x.a, x.b).cmp(&(&y.a, y.b)));
        kept.dedup();
        // drop constraints dominated by a tighter one with the same normal
        kept.dedup_by(|later, earlier| later.a == earlier.a);
        Some(kept)
    }

    fn initial(&self) -> Option<Vec<Ineq>> {
        let mut kept = Vec::new();
        for c in &self.cons {
            if c.is_trivial() {
                if c.b < 0 {
                    return None;
                }
            } else {
                kept.push(c.clone());
            }
        }
        Some(kept)
    }

    fn bounds_from(cons: &[Ineq], j: usize, fixed: &[Option<Q>]) -> Option<(Option<Q>, Option<Q>)> {
        let mut lo: Option<Q> = None;
        let mut hi: Option<Q> = None;
        for c in cons {
            let mut rest = Q::from_integer(c.b);
            let mut coef = 0i128;
            let mut free_other = false;
            for (i, &a) in c.a.iter().enumerate() {
                if a == 0 {
                    continue;
                }
                if i == j {
                    coef = a;
                } else if let Some(v) = fixed[i] {
                    rest -= v * a;
                } else {
                    free_other = true;
                }
            }
            if free_other {
                continue;
            }
            if coef == 0 {
                if rest < Q::from_integer(0) {
                    return None;
                }
                continue;
            }
            let bound = rest / coef;
            if coef > 0 {
                hi = Some(hi.map_or(bound, |h: Q| h.min(bound)));
            } else {
                lo = Some(lo.map_or(bound, |l: Q| l.max(bound)));
            }
        }
        if let (Some(l), Some(h)) = (lo, hi) {
            if l > h {
                return None;
            }
        }
        Some((lo, hi))
    }

    /// Exact rational range of coordinate `j`; `None` when empty.
    pub fn coordinate_range(&self, j: usize) -> Option<(Option<Q>, Option<Q>)> {
        let mut cons = self.initial()?;
        for i in 0..self.n {
            if i != j {
                cons = Self::eliminate(&cons, i)?;
            }
        }
        Self::bounds_from(&cons, j, &vec![None; self.n])
    }

    /// Range of the linear functional `obj·x`.
    pub fn objective_range(&self, obj: &[i128]) -> Option<(Option<Q>, Option<Q>)> {
        let mut ext = Polyhedron::new(self.n + 1);
        for c in &self.cons {
            let mut a = c.a.clone();
            a.push(0);
            ext.push_le(a, c.b);
        }
        let mut a: Vec<i128> = obj.to_vec();
        a.push(-1);
        ext.push_le(a.clone(), 0);
        ext.push_le(a.into_iter().map(|v| -v).collect(), 0);
        ext.coordinate_range(self.n)
    }

    /// A rational point of the polyhedron, preferring small integers.
    pub fn feasible_point(&self) -> Option<Vec<Q>> {
        if self.n == 0 {
            return self.initial().map(|_| Vec::new());
        }
        let mut stages = vec![self.initial()?];
        for j in (1..self.n).rev() {
            let next = Self::eliminate(stages.last().unwrap(), j)?;
            stages.push(next);
        }
        let mut fixed: Vec<Option<Q>> = vec![None; self.n];
        for j in 0..self.n {
            let cons = &stages[self.n - 1 - j];
            let (lo, hi) = Self::bounds_from(cons, j, &fixed)?;
            fixed[j] = Some(pick(lo, hi));
        }
        fixed.into_iter().collect()
    }

    pub fn is_empty(&self) -> bool {
        self.feasible_point().is_none()
    }
}

/// A finite box that holds an integer point of the planar polyhedron `p`
/// whenever it has one. Writing `p = conv(V) + K`, every integer point moves
/// by integer generators of `K` into `conv(V) + Σ [0, 1)·g`; a line in `K`
/// is first cut down to one period of the lattice along it.
fn plane_search_box(p: &Polyhedron) -> Option<IntBox> {
    let mut cons: Vec<([i128; 2], i128)> = p.cons.iter().filter(|c| !c.is_trivial()).map(|c| ([c.a[0], c.a[1]], c.b)).collect();
    for _ in 0..2 {
        let rays = cone_rays(&cons);
        let Some(u) = rays.iter().find(|u| rays.contains(&[-u[0], -u[1]])) else {
            return Some(vertex_box(&cons, &rays));
        };
        let w = if u[0] != 0 { [1, 0] } else { [0, 1] };
        let period = (w[0] * u[0] + w[1] * u[1]).abs();
        cons.push(([-w[0], -w[1]], 0));
        cons.push((w, period - 1));
    }
    let rays = cone_rays(&cons);
    Some(vertex_box(&cons, &rays))
}

/// Primitive integer vectors generating the recession cone of `cons`.
fn cone_rays(cons: &[([i128; 2], i128)]) -> Vec<[i128; 2]> {
    let mut cands: Vec<[i128; 2]> = vec![[1, 0], [-1, 0], [0, 1], [0, -1]];
    for (a, _) in cons {
        cands.extend([[-a[1], a[0]], [a[1], -a[0]], [-a[0], -a[1]]]);
    }
    let mut out: Vec<[i128; 2]> = Vec::new();
    for v in cands {
        let g = v[0].gcd(&v[1]);
        if g == 0 {
            continue;
        }
        let v = [v[0] / g, v[1] / g];
        if cons.iter().all(|(a, _)| a[0] * v[0] + a[1] * v[1] <= 0) && !out.contains(&v) {
            out.push(v);
        }
    }
    out
}

fn vertex_box(cons: &[([i128; 2], i128)], rays: &[[i128; 2]]) -> IntBox {
    let mut verts: Vec<[Q; 2]> = Vec::new();
    for (i, (a, b)) in cons.iter().enumerate() {
        for (c, d) in &cons[i + 1..] {
            let det = a[0] * c[1] - a[1] * c[0];
            if det == 0 {
                continue;
            }
            let x = Q::new(b * c[1] - a[1] * d, det);
            let y = Q::new(a[0] * d - b * c[0], det);
            let inside = cons.iter().all(|(e, f)| Q::from_integer(e[0]) * x + Q::from_integer(e[1]) * y <= Q::from_integer(*f));
            if inside {
                verts.push([x, y]);
            }
        }
    }
    if verts.is_empty() {
        return IntBox::empty(2);
    }
    let dims = (0..2)
        .map(|j| {
            let lo = verts.iter().map(|v| v[j]).min().expect("non-empty");
            let hi = verts.iter().map(|v| v[j]).max().expect("non-empty");
            let down: i128 = rays.iter().map(|r| r[j].min(0)).sum();
            let up: i128 = rays.iter().map(|r| r[j].max(0)).sum();
            Interval::closed(floor_q(lo) + down as i64, ceil_q(hi) + up as i64)
        })
        .collect();
    IntBox::new(dims)
}

fn pick(lo: Option<Q>, hi: Option<Q>) -> Q {
    let zero = Q::from_integer(0);
    match (lo, hi) {
        (Some(l), _) if l > zero => {
            let c = l.ceil();
            match hi {
                Some(h) if c > h => l,
                _ => c,
            }
        }
        (_, Some(h)) if h < zero => {
            let f = h.floor();
            match lo {
                Some(l) if f < l => h,
                _ => f,
            }
        }
        _ => zero,
    }
}

fn ceil_q(q: Q) -> i64 {
    q.ceil().to_integer() as i64
}

fn floor_q(q: Q) -> i64 {
    q.floor().to_integer() as i64
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Feasibility {
    Yes(Point),
    No,
    Unknown,
}

impl Feasibility {
    pub fn truth(&self) -> Truth {
        match self {
            Feasibility::Yes(_) => Truth::Yes,
            Feasibility::No => Truth::No,
            Feasibility::Unknown => Truth::Unknown,
        }
    }

    pub fn witness(&self) -> Option<&Point> {
        match self {
            Feasibility::Yes(p) => Some(p),
            _ => None,
        }
    }
}

/// `{l ∈ ℤ^k : M·l ∈ C}` for an integer matrix `M` and a box `C`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Region {
    pub matrix: IntMatrix,
    pub constraint: IntBox,
}

/// Integer bounding box of a region.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RegionHull {
    /// `None` when the region has no integer point (or, if `exact` is false,
    /// no rational point).
    pub hull: Option<IntBox>,
    pub exact: bool,
}

impl Region {
    pub fn new(matrix: IntMatrix, constraint: IntBox) -> Result<Self> {
        check_dim(matrix.rows(), constraint.dim())?;
        Ok(Region { matrix, constraint })
    }

    /// The box `b` itself, as a region of ℤ^k.
    pub fn from_box(b: IntBox) -> Self {
        Region {
            matrix: IntMatrix::identity(b.dim()),
            constraint: b,
        }
    }

    pub fn rank(&self) -> usize {
        self.matrix.cols()
    }

    pub fn contains(&self, l: &[i64]) -> Result<bool> {
        self.constraint.contains(&self.matrix.apply(l)?)
    }

    fn polyhedron_of(matrix: &IntMatrix, constraint: &IntBox) -> Option<Polyhedron> {
        if constraint.is_empty() {
            return None;
        }
        let mut p = Polyhedron::new(matrix.cols());
        for (i, iv) in constraint.dims().iter().enumerate() {
            let row: Vec<i128> = matrix.row(i).iter().map(|&v| v as i128).collect();
            if let End::Fin(lo) = iv.lo {
                p.push_ge(row.clone(), lo as i128);
            }
            if let End::Fin(hi) = iv.hi {
                p.push_le(row, hi as i128);
            }
        }
        Some(p)
    }

    pub fn polyhedron(&self) -> Option<Polyhedron> {
        Self::polyhedron_of(&self.matrix, &self.constraint)
    }

    /// The recession cone `{r : M r ∈ rec(C)}` as a polyhedron.
    pub fn recession_cone(&self) -> Polyhedron {
        let mut p = Polyhedron::new(self.matrix.cols());
        for (i, iv) in self.constraint.dims().iter().enumerate() {
            let row: Vec<i128> = self.matrix.row(i).iter().map(|&v| v as i128).collect();
            if iv.lo.is_finite() {
                p.push_ge(row.clone(), 0);
            }
            if iv.hi.is_finite() {
                p.push_le(row, 0);
            }
        }
        p
    }

    /// An integer recession ray with `sign * r_j >= 1`, if one exists.
    pub fn ray_along(&self, j: usize, sign: i64) -> Option<Point> {
        let mut obj = vec![0; self.rank()];
        obj[j] = sign;
        self.ray_towards(&obj)
    }

    /// An integer recession ray `r` with `obj·r >= 1`, if one exists.
    pub fn ray_towards(&self, obj: &[i64]) -> Option<Point> {
        let mut cone = self.recession_cone();
        cone.push_ge(obj.iter().map(|&v| v as i128).collect(), 1);
        let q = cone.feasible_point()?;
        let den = q.iter().fold(1i128, |acc, v| acc.lcm(v.denom()));
        let mut ray: Vec<i64> = q.iter().map(|v| (v.numer() * (den / v.denom())) as i64).collect();
        let g = ray.iter().fold(0i64, |g, v| g.gcd(v));
        if g > 1 {
            ray.iter_mut().for_each(|v| *v /= g);
        }
        Some(ray)
    }

    /// Any non-zero integer recession ray, searching coordinates in order
    /// and the positive sign first.
    pub fn any_ray(&self) -> Option<Point> {
        (0..self.rank()).find_map(|j| self.ray_along(j, 1).or_else(|| self.ray_along(j, -1)))
    }

    /// Decides whether the region has an integer point. Exact when the
    /// column lattice has rank at most one or the rational region is
    /// bounded; otherwise searches lattice coordinates up to `radius`.
    pub fn feasible(&self, radius: i64) -> Result<Feasibility> {
        if self.constraint.is_empty() {
            return Ok(Feasibility::No);
        }
        let k = self.matrix.cols();
        let hnf = self.matrix.column_hnf();
        let h = &hnf.basis;
        let found = match hnf.rank() {
            0 => {
                if self.constraint.contains(&vec![0; self.matrix.rows()])? {
                    Some(vec![])
                } else {
                    None
                }
            }
            1 => {
                let col = h.column(0);
                let mut iv = Interval::full();
                for (i, range) in self.constraint.dims().iter().enumerate() {
                    iv = iv.intersect(&scaled_preimage(range, col[i]));
                    if iv.is_empty() {
                        break;
                    }
                }
                iv.nearest_to_zero().map(|c| vec![c])
            }
            _ => {
                let reduced = Region::new(h.clone(), self.constraint.clone())?;
                match reduced.search(radius)? {
                    Feasibility::Yes(c) => Some(c),
                    Feasibility::No => None,
                    Feasibility::Unknown => return Ok(Feasibility::Unknown),
                }
            }
        };
        Ok(match found {
            None => Feasibility::No,
            Some(c) => {
                let l = if k == 0 { vec![] } else { hnf.lift(&c) };
                debug_assert!(self.contains(&l).unwrap_or(false));
                Feasibility::Yes(l)
            }
        })
    }

    /// Enumeration inside the rational bounding box; exact when the box is
    /// finite and small.
    fn search(&self, radius: i64) -> Result<Feasibility> {
        let Some(p) = self.polyhedron() else { return Ok(Feasibility::No) };
        if self.rank() == 2 {
            if let Some(bbox) = plane_search_box(&p) {
                return self.enumerate(&bbox);
            }
        }
        let mut dims = Vec::with_capacity(self.rank());
        let mut clipped = false;
        for j in 0..self.rank() {
            let Some((lo, hi)) = p.coordinate_range(j) else { return Ok(Feasibility::No) };
            let lo = match lo {
                Some(q) => ceil_q(q),
                None => {
                    clipped = true;
                    -radius
                }
            };
            let hi = match hi {
                Some(q) => floor_q(q),
                None => {
                    clipped = true;
                    radius
                }
            };
            dims.push(Interval::closed(lo, hi));
        }
        let bbox = IntBox::new(dims);
        if bbox.is_empty() {
            return Ok(if clipped { Feasibility::Unknown } else { Feasibility::No });
        }
        match bbox.volume() {
            Some(v) if v <= ENUMERATION_CAP => {}
            _ => return Ok(Feasibility::Unknown),
        }
        let mut pts = bbox.points()?;
        pts.sort_by_key(|q| q.iter().map(|v| v.abs()).max().unwrap_or(0));
        for c in pts {
            if self.contains(&c)? {
                return Ok(Feasibility::Yes(c));
            }
        }
        Ok(if clipped { Feasibility::Unknown } else { Feasibility::No })
    }

    /// Exhaustive search of a finite box.
    fn enumerate(&self, bbox: &IntBox) -> Result<Feasibility> {
        if bbox.is_empty() {
            return Ok(Feasibility::No);
        }
        match bbox.volume() {
            Some(v) if v <= ENUMERATION_CAP => {}
            _ => return Ok(Feasibility::Unknown),
        }
        let mut pts = bbox.points()?;
        pts.sort_by_key(|q| q.iter().map(|v| v.abs()).max().unwrap_or(0));
        for c in pts {
            if self.contains(&c)? {
                return Ok(Feasibility::Yes(c));
            }
        }
        Ok(Feasibility::No)
    }

    /// Integer bounding box. Infinite ends mark rationally unbounded
    /// coordinates.
    pub fn hull(&self) -> Result<RegionHull> {
        let Some(p) = self.polyhedron() else {
            return Ok(RegionHull { hull: None, exact: true });
        };
        let k = self.rank();
        if k == 0 {
            let inside = self.constraint.contains(&vec![0; self.matrix.rows()])?;
            return Ok(RegionHull {
                hull: inside.then(|| IntBox::new(vec![])),
                exact: true,
            });
        }
        let mut dims = Vec::with_capacity(k);
        for j in 0..k {
            let Some((lo, hi)) = p.coordinate_range(j) else {
                return Ok(RegionHull { hull: None, exact: true });
            };
            dims.push(Interval::new(
                lo.map_or(End::NegInf, |q| End::Fin(ceil_q(q))),
                hi.map_or(End::PosInf, |q| End::Fin(floor_q(q))),
            ));
        }
        let rough = IntBox::new(dims);
        if rough.is_empty() {
            return Ok(RegionHull { hull: None, exact: true });
        }
        if k == 1 {
            return Ok(RegionHull { hull: Some(rough), exact: true });
        }
        match rough.volume() {
            Some(v) if v <= ENUMERATION_CAP => {
                let mut acc: Option<IntBox> = None;
                for l in rough.points()? {
                    if self.contains(&l)? {
                        let b = IntBox::point(&l);
                        acc = Some(acc.map_or(b.clone(), |a| a.hull(&b)));
                    }
                }
                Ok(RegionHull { hull: acc, exact: true })
            }
            _ => Ok(RegionHull { hull: Some(rough), exact: false }),
        }
    }

    /// Box hull of `{N·l : l in self}`, rounded outward to integers.
    pub fn image_hull(&self, n: &IntMatrix) -> Result<Option<IntBox>> {
        check_dim(self.rank(), n.cols())?;
        let Some(p) = self.polyhedron() else { return Ok(None) };
        if self.rank() == 0 {
            return Ok(if self.constraint.contains(&vec![0; self.matrix.rows()])? {
                Some(IntBox::point(&vec![0; n.rows()]))
            } else {
                None
            });
        }
        let mut dims = Vec::with_capacity(n.rows());
        for i in 0..n.rows() {
            let obj: Vec<i128> = n.row(i).iter().map(|&v| v as i128).collect();
            let Some((lo, hi)) = p.objective_range(&obj) else { return Ok(None) };
            dims.push(Interval::new(
                lo.map_or(End::NegInf, |q| End::Fin(ceil_q(q))),
                hi.map_or(End::PosInf, |q| End::Fin(floor_q(q))),
            ));
        }
        let b = IntBox::new(dims);
        Ok(if b.is_empty() { None } else { Some(b) })
    }
}

/// `{c ∈ ℤ : h·c ∈ range}`.
fn scaled_preimage(range: &Interval, h: i64) -> Interval {
    if h == 0 {
        return if range.lo <= End::Fin(0) && End::Fin(0) <= range.hi {
            Interval::full()
        } else {
            Interval::new(End::PosInf, End::NegInf)
        };
    }
    let div_lo = |v: i64| End::Fin(Integer::div_ceil(&v, &h));
    let div_hi = |v: i64| End::Fin(Integer::div_floor(&v, &h));
    if h > 0 {
        Interval::new(
            range.lo.finite().map_or(End::NegInf, div_lo),
            range.hi.finite().map_or(End::PosInf, div_hi),
        )
    } else {
        // h < 0 reverses the order: c >= hi / h and c <= lo / h
        Interval::new(
            range.hi.finite().map_or(End::NegInf, div_lo),
            range.lo.finite().map_or(End::PosInf, div_hi),
        )
    }
}

/// Outcome of asking whether `B + M·ℤ^k` is all of ℤ^d.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Coverage {
    Covers,
    Uncovered(Point),
    Unknown,
}

/// Decides whether the box `b` plus the column lattice of `m` covers ℤ^d.
/// Exact unless the box is half-infinite and the lattice is rank deficient
/// on the constrained coordinates, where points within `radius` are probed.
pub fn covers(b: &IntBox, m: &IntMatrix, radius: i64) -> Result<Coverage> {
    check_dim(b.dim(), m.rows())?;
    let d = b.dim();
    if b.is_empty() {
        return Ok(Coverage::Uncovered(vec![0; d]));
    }
    // coordinates with both ends infinite impose nothing
    let rows: Vec<usize> = (0..d).filter(|&i| b.dims()[i] != Interval::full()).collect();
    if rows.is_empty() {
        return Ok(Coverage::Covers);
    }
    let sub = IntMatrix::from_columns(
        rows.len(),
        &m.columns().iter().map(|c| rows.iter().map(|&i| c[i]).collect()).collect::<Vec<_>>(),
    )?;
    let sub_box = IntBox::new(rows.iter().map(|&i| b.dims()[i]).collect());
    let embed = |v: &[i64]| -> Point {
        let mut x = vec![0; d];
        for (t, &i) in rows.iter().enumerate() {
            x[i] = v[t];
        }
        x
    };
    let hnf = sub.column_hnf();
    if hnf.rank() == rows.len() {
        let h: Vec<i64> = (0..rows.len()).map(|j| hnf.basis.get(hnf.pivots[j], j)).collect();
        // a box spanning h_i consecutive values in coordinate i meets every coset
        let mut clipped = Vec::with_capacity(rows.len());
        let mut wide = true;
        for (iv, &hi) in sub_box.dims().iter().zip(&h) {
            let (lo, up) = match (iv.lo, iv.hi) {
                (End::Fin(a), End::Fin(c)) => (a, c),
                (End::Fin(a), _) => (a, a + hi - 1),
                (_, End::Fin(c)) => (c - hi + 1, c),
                _ => (0, hi - 1),
            };
            wide &= up - lo + 1 >= hi;
            clipped.push(Interval::closed(lo, up));
        }
        if wide {
            return Ok(Coverage::Covers);
        }
        let clipped = IntBox::new(clipped);
        match clipped.volume() {
            Some(v) if v <= ENUMERATION_CAP => {}
            _ => return Ok(Coverage::Unknown),
        }
        let mut seen = std::collections::HashSet::new();
        for p in clipped.points()? {
            seen.insert(hnf.reduce(&p).expect("full rank"));
        }
        let reps = IntBox::new(h.iter().map(|&hi| Interval::closed(0, hi - 1)).collect());
        for v in reps.points()? {
            if !seen.contains(&v) {
                return Ok(Coverage::Uncovered(embed(&v)));
            }
        }
        return Ok(Coverage::Covers);
    }
    if sub_box.is_finite() {
        // a non-zero integer vector orthogonal to every column escapes the box
        let t_hnf = transpose(&sub).column_hnf();
        let u = t_hnf.transform.column(t_hnf.rank());
        let (mut lo, mut hi) = (0i64, 0i64);
        for (iv, &ui) in sub_box.dims().iter().zip(&u) {
            let (a, c) = (iv.lo.finite().unwrap(), iv.hi.finite().unwrap());
            lo += (ui * a).min(ui * c);
            hi += (ui * a).max(ui * c);
        }
        let norm: i64 = u.iter().map(|v| v * v).sum();
        let t = Integer::div_floor(&hi, &norm) + 1;
        debug_assert!(t * norm > hi && lo <= hi);
        return Ok(Coverage::Uncovered(embed(&u.iter().map(|v| v * t).collect::<Vec<_>>())));
    }
    let probe = IntBox::cube(rows.len(), radius.min(16));
    for p in probe.points()? {
        let target = sub_box.neg().translate(&p)?;
        match Region::new(sub.clone(), target)?.feasible(radius)? {
            Feasibility::No => return Ok(Coverage::Uncovered(embed(&p))),
            Feasibility::Unknown => return Ok(Coverage::Unknown),
            Feasibility::Yes(_) => {}
        }
    }
    Ok(Coverage::Unknown)
}

pub fn transpose(m: &IntMatrix) -> IntMatrix {
    let mut t = IntMatrix::zeros(m.cols(), m.rows());
    for i in 0..m.rows() {
        for j in 0..m.cols() {
            t.set(j, i, m.get(i, j));
        }
    }
    t
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: usize, cols: usize, data: &[i64]) -> IntMatrix {
        IntMatrix::new(rows, cols, data.to_vec()).unwrap()
    }

    #[test]
    fn hnf_reproduces_lattice() {
        let a = m(2, 3, &[2, 4, 6, 1, 3, 5]);
        let h = a.column_hnf();
        assert_eq!(h.rank(), 2);
        // M U = [H | 0]
        for j in 0..3 {
            let col = a.apply(&h.transform.column(j)).unwrap();
            if j < 2 {
                assert_eq!(col, h.basis.column(j));
            } else {
                assert_eq!(col, vec![0, 0]);
            }
        }
        assert_eq!(h.basis.get(0, 1), 0);
        assert_eq!(h.determinant(), Some(2));
    }

    #[test]
    fn rank_one_feasibility_is_exact() {
        // hyperbola column (1,-1): l in [2,5] and -l in [-4, inf)
        let r = Region::new(
            m(2, 1, &[1, -1]),
            IntBox::new(vec![Interval::closed(2, 5), Interval::new(End::Fin(-4), End::PosInf)]),
        )
        .unwrap();
        assert_eq!(r.feasible(0).unwrap(), Feasibility::Yes(vec![2]));
        let none = Region::new(m(1, 1, &[2]), IntBox::from_bounds(&[(1, 1)])).unwrap();
        assert_eq!(none.feasible(10).unwrap(), Feasibility::No);
    }

    #[test]
    fn kernel_directions_are_factored_out() {
        // l1 - l2 = 1/2 has no integer point even though it is unbounded
        let r = Region::new(m(1, 2, &[2, -2]), IntBox::from_bounds(&[(1, 1)])).unwrap();
        assert_eq!(r.feasible(5).unwrap(), Feasibility::No);
        let z = Region::new(IntMatrix::zeros(1, 2), IntBox::from_bounds(&[(0, 3)])).unwrap();
        assert_eq!(z.feasible(5).unwrap(), Feasibility::Yes(vec![0, 0]));
    }

    #[test]
    fn recession_rays() {
        let quad = IntBox::new(vec![Interval::new(End::NegInf, End::Fin(0)); 2]);
        let hyper = Region::new(m(2, 1, &[1, -1]), quad.clone()).unwrap();
        assert_eq!(hyper.any_ray(), None);
        let full = Region::new(m(2, 1, &[1, -1]), IntBox::full(2)).unwrap();
        assert_eq!(full.any_ray(), Some(vec![1]));
    }

    #[test]
    fn hull_and_image() {
        let r = Region::new(m(2, 2, &[1, 1, 1, -1]), IntBox::from_bounds(&[(0, 2), (0, 0)])).unwrap();
        let h = r.hull().unwrap();
        assert!(h.exact);
        assert_eq!(h.hull, Some(IntBox::from_bounds(&[(0, 1), (0, 1)])));
        let img = Region::from_box(IntBox::from_bounds(&[(-2, 3)]))
            .image_hull(&m(2, 1, &[1, -1]))
            .unwrap();
        assert_eq!(img, Some(IntBox::from_bounds(&[(-2, 3), (-3, 2)])));
    }

    #[test]
    fn coverage_by_box_plus_lattice() {
        let shift = m(1, 1, &[1]);
        assert_eq!(covers(&IntBox::point(&[0]), &shift, 8).unwrap(), Coverage::Covers);
        let even = m(1, 1, &[2]);
        assert_eq!(covers(&IntBox::point(&[0]), &even, 8).unwrap(), Coverage::Uncovered(vec![1]));
        assert_eq!(covers(&IntBox::from_bounds(&[(3, 4)]), &even, 8).unwrap(), Coverage::Covers);
        // first-coordinate shift on Z^2 never covers with a finite box
        let first = m(2, 1, &[1, 0]);
        match covers(&IntBox::cube(2, 2), &first, 8).unwrap() {
            Coverage::Uncovered(x) => assert!(x[1].abs() > 2),
            other => panic!("{other:?}"),
        }
        let strip = IntBox::new(vec![Interval::closed(0, 0), Interval::full()]);
        assert_eq!(covers(&strip, &first, 8).unwrap(), Coverage::Covers);
        // the anti-diagonal line plus a finite box misses far diagonal points
        let hyper = m(2, 1, &[1, -1]);
        match covers(&IntBox::cube(2, 1), &hyper, 8).unwrap() {
            Coverage::Uncovered(x) => {
                let r = Region::new(hyper.clone(), IntBox::cube(2, 1).neg().translate(&x).unwrap()).unwrap();
                assert_eq!(r.feasible(64).unwrap(), Feasibility::No);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn fourier_motzkin_ranges() {
        let mut p = Polyhedron::new(2);
        p.push_le(vec![1, 1], 4);
        p.push_ge(vec![1, 0], 0);
        p.push_ge(vec![0, 1], 1);
        let (lo, hi) = p.coordinate_range(0).unwrap();
        assert_eq!(lo, Some(Q::from_integer(0)));
        assert_eq!(hi, Some(Q::from_integer(3)));
        let pt = p.feasible_point().unwrap();
        assert!(pt[0] + pt[1] <= Q::from_integer(4));
    }
}
