//! Brute-force recomputation over finite windows, random instances and the
//! symbolic-versus-oracle cross-check.
//!
//! Nothing here calls the box calculus, the lattice solver or the entourage
//! engine; only the instance model is shared.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::actions::{transporter, transporter_bounded, ActionInstance, ActionRule, FiniteGroup, GroupSpec};
use crate::associated::{base_property_check, orbit_pair_entourage, TheoremStatus};
use crate::bornology::{BornologySpec, BoundVerdict, ChainShape, IndexExpr};
use crate::coarse::{
    close_finite_base, coarsely_bounded, entourage_membership, neighborhood, CoarseStructureSpec, Relation,
};
use crate::error::{Error, Result};
use crate::lattice::IntMatrix;
use crate::sets::{fault, End, GroundSpace, IntBox, Interval, Point, SetDescriptor};
use crate::{Budget, Truth};

/// All lattice points of ℓ∞ norm at most `radius`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Window {
    pub radius: i64,
}

impl Window {
    pub fn new(radius: i64) -> Result<Self> {
        if radius <= 0 {
            return Err(Error::Invalid(format!("window radius {radius}")));
        }
        Ok(Window { radius })
    }

    pub fn point_count(&self, d: usize) -> u128 {
        (2 * self.radius as u128 + 1).pow(d as u32)
    }

    pub fn points(&self, d: usize) -> Vec<Point> {
        let mut out = vec![Vec::new()];
        for _ in 0..d {
            out = out
                .into_iter()
                .flat_map(|p| {
                    (-self.radius..=self.radius).map(move |v| {
                        let mut q = p.clone();
                        q.push(v);
                        q
                    })
                })
                .collect();
        }
        out
    }
}

fn in_interval(iv: &Interval, v: i64) -> bool {
    let above = match iv.lo {
        End::NegInf => true,
        End::Fin(a) => a <= v,
        End::PosInf => false,
    };
    let below = match iv.hi {
        End::PosInf => true,
        End::Fin(b) => v <= b,
        End::NegInf => false,
    };
    above && below
}

fn in_box(b: &IntBox, x: &[i64]) -> bool {
    !b.is_empty() && b.dims().iter().zip(x).all(|(iv, &v)| in_interval(iv, v))
}

fn mat_vec(m: &IntMatrix, l: &[i64]) -> Point {
    (0..m.rows()).map(|i| (0..m.cols()).map(|j| m.get(i, j) * l[j]).sum()).collect()
}

/// Membership by inspection; sweeps enumerate their parameters over
/// `[-sweep_radius, sweep_radius]`.
pub fn oracle_contains(s: &SetDescriptor, x: &[i64], sweep_radius: i64) -> bool {
    match s {
        SetDescriptor::Points(p) => p.iter().any(|q| q.as_slice() == x),
        SetDescriptor::Box(b) => in_box(b, x),
        SetDescriptor::Union(m) => m.iter().any(|u| oracle_contains(u, x, sweep_radius)),
        SetDescriptor::Sweep(sw) => Window { radius: sweep_radius }.points(sw.matrix.cols()).iter().any(|l| {
            let v = mat_vec(&sw.matrix, l);
            let base: Point = x.iter().zip(&v).map(|(a, b)| a - b).collect();
            in_box(&sw.base, &base) && in_box(&sw.domain.constraint, &mat_vec(&sw.domain.matrix, l))
        }),
    }
}

/// `l·x`.
pub fn oracle_act(a: &ActionInstance, l: &[i64], x: &[i64]) -> Point {
    match &a.rule {
        ActionRule::Translation(m) => x.iter().zip(mat_vec(m, l)).map(|(u, v)| u + v).collect(),
        ActionRule::SignedTranslation { perm, signs, matrix } => {
            let v = mat_vec(matrix, l);
            (0..x.len()).map(|i| signs[i] * x[perm[i]] + v[i]).collect()
        }
        ActionRule::Permutation(perms) => vec![perms[l[0] as usize][x[0] as usize] as i64],
    }
}

/// `l⁻¹·x`.
pub fn oracle_act_inverse(a: &ActionInstance, l: &[i64], x: &[i64]) -> Point {
    match &a.rule {
        ActionRule::Translation(m) => x.iter().zip(mat_vec(m, l)).map(|(u, v)| u - v).collect(),
        ActionRule::SignedTranslation { perm, signs, matrix } => {
            let v = mat_vec(matrix, l);
            let mut out = vec![0; x.len()];
            for i in 0..x.len() {
                out[perm[i]] = signs[i] * (x[i] - v[i]);
            }
            out
        }
        ActionRule::Permutation(perms) => {
            let p = &perms[l[0] as usize];
            vec![p.iter().position(|&t| t as i64 == x[0]).expect("permutation") as i64]
        }
    }
}

/// Group elements in the window: the cube of radius `gw` in ℤ^k, or the
/// whole finite group.
pub fn group_window(a: &ActionInstance, gw: i64) -> Vec<Point> {
    match (a.group.rank(), a.group.order()) {
        (Some(k), _) => Window { radius: gw }.points(k),
        (None, Some(n)) => (0..n as i64).map(|g| vec![g]).collect(),
        _ => unreachable!("a group is a lattice or finite"),
    }
}

fn set_boxes(s: &SetDescriptor) -> Option<Vec<IntBox>> {
    match s {
        SetDescriptor::Box(b) => Some(vec![b.clone()]),
        SetDescriptor::Points(p) => Some(p.iter().map(|q| IntBox::point(q)).collect()),
        SetDescriptor::Union(m) => m.iter().map(set_boxes).collect::<Option<Vec<_>>>().map(|v| v.concat()),
        SetDescriptor::Sweep(_) => None,
    }
}

fn max_finite_end(s: &SetDescriptor) -> Option<i64> {
    let boxes = set_boxes(s)?;
    Some(
        boxes
            .iter()
            .flat_map(|b| b.dims().iter().flat_map(|iv| [iv.lo, iv.hi]))
            .filter_map(End::finite)
            .map(i64::abs)
            .max()
            .unwrap_or(0),
    )
}

/// Whether some `x ∈ b1` with `|x|∞ <= xw` has `l·x ∈ b2`, scanning each
/// coordinate of `x` separately; translations and signed permutations move
/// every coordinate of `x` into exactly one coordinate of the image.
fn meets(a: &ActionInstance, b1: &IntBox, b2: &IntBox, l: &[i64], xw: i64) -> bool {
    if b1.is_empty() || b2.is_empty() {
        return false;
    }
    let d = b1.dim();
    let (perm, signs, v): (Vec<usize>, Vec<i64>, Point) = match &a.rule {
        ActionRule::Translation(m) => ((0..d).collect(), vec![1; d], mat_vec(m, l)),
        ActionRule::SignedTranslation { perm, signs, matrix } => (perm.clone(), signs.clone(), mat_vec(matrix, l)),
        ActionRule::Permutation(_) => unreachable!("finite actions enumerate labels"),
    };
    // output coordinate i reads input coordinate perm[i]
    (0..d).all(|i| {
        let j = perm[i];
        (-xw..=xw).any(|xj| in_interval(&b1.dims()[j], xj) && in_interval(&b2.dims()[i], signs[i] * xj + v[i]))
    })
}

/// The transporter restricted to a group window.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleTransporter {
    pub elements: Vec<Point>,
    /// Space radius beyond which no new witnesses `x` appear, when the
    /// query geometry gives one.
    pub sufficiency: Option<i64>,
    pub certified: bool,
}

/// `{l ∈ gw : ∃x ∈ b ∩ xw, l·x ∈ b2}` by enumeration.
pub fn oracle_transporter(a: &ActionInstance, b: &SetDescriptor, b2: &SetDescriptor, gw: i64, xw: i64) -> OracleTransporter {
    let elements: Vec<Point> = match &a.rule {
        ActionRule::Permutation(perms) => {
            let n = perms[0].len() as i64;
            group_window(a, gw)
                .into_iter()
                .filter(|g| {
                    (0..n).any(|x| oracle_contains(b, &[x], gw) && oracle_contains(b2, &oracle_act(a, g, &[x]), gw))
                })
                .collect()
        }
        _ => match (set_boxes(b), set_boxes(b2)) {
            (Some(p), Some(q)) => group_window(a, gw)
                .into_par_iter()
                .filter(|l| p.iter().any(|u| q.iter().any(|v| meets(a, u, v, l, xw))))
                .collect(),
            _ => {
                let pts = Window { radius: xw }.points(a.dim());
                group_window(a, gw)
                    .into_iter()
                    .filter(|l| {
                        pts.iter()
                            .any(|x| oracle_contains(b, x, gw) && oracle_contains(b2, &oracle_act(a, l, x), gw))
                    })
                    .collect()
            }
        },
    };
    let sufficiency = match &a.rule {
        ActionRule::Permutation(_) => Some(0),
        ActionRule::Translation(m) | ActionRule::SignedTranslation { matrix: m, .. } => {
            // a bounded b lies inside its ends; otherwise the nearest
            // witness has |x_i| <= max end + |(M l)_i|
            let bounded = set_boxes(b).is_some_and(|v| v.iter().all(IntBox::is_finite));
            let e = max_finite_end(b).zip(max_finite_end(b2)).map(|(u, v)| u.max(v));
            if bounded { max_finite_end(b) } else { e.map(|e| e + m.norm_inf() * gw) }
        }
    };
    OracleTransporter { elements, certified: sufficiency.is_some_and(|s| s <= xw), sufficiency }
}

/// `(x, y) ∈ E(L,B)`: `x = y`, or both lie in `l·B` for some `l ∈ gw`.
pub fn oracle_member(a: &ActionInstance, b: &SetDescriptor, x: &[i64], y: &[i64], gw: i64) -> bool {
    x == y
        || group_window(a, gw).iter().any(|l| {
            oracle_contains(b, &oracle_act_inverse(a, l, x), gw) && oracle_contains(b, &oracle_act_inverse(a, l, y), gw)
        })
}

/// `E(L,B)[x]` within the space window.
pub fn oracle_neighborhood(a: &ActionInstance, b: &SetDescriptor, x: &[i64], gw: i64, xw: i64) -> Vec<Point> {
    let pts = match a.space.size() {
        Some(n) => (0..n as i64).map(|v| vec![v]).collect(),
        None => Window { radius: xw }.points(a.dim()),
    };
    pts.into_iter().filter(|y| oracle_member(a, b, x, y, gw)).collect()
}

/// The largest relation in the coarse structure generated by `base`: grow
/// the union with the diagonal under transposes and squares.
pub fn oracle_closure(n: usize, base: &[Vec<(usize, usize)>]) -> Vec<Vec<bool>> {
    let mut r = vec![vec![false; n]; n];
    for (i, row) in r.iter_mut().enumerate() {
        row[i] = true;
    }
    for rel in base {
        for &(x, y) in rel {
            r[x][y] = true;
        }
    }
    loop {
        let mut next = r.clone();
        for x in 0..n {
            for y in 0..n {
                next[x][y] |= r[y][x] || (0..n).any(|z| r[x][z] && r[z][y]);
            }
        }
        if next == r {
            return r;
        }
        r = next;
    }
}

fn group_level_contains(g: &GroupSpec, n: u64, l: &[i64]) -> bool {
    match &g.bornology {
        BornologySpec::Chain(c) => (0..c.dim()).all(|i| in_interval(&Interval::new(c.lower[i].eval(n), c.upper[i].eval(n)), l[i])),
        BornologySpec::Maximal => true,
        BornologySpec::FiniteBase { base, .. } => base.get(n as usize).is_some_and(|m| m >> l[0] & 1 == 1),
        _ => false,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Primitive {
    Transporter,
    Membership,
    Neighborhood,
    Composition,
    Boundedness,
    Closure,
}

impl Primitive {
    pub const ALL: [Primitive; 6] = [
        Primitive::Transporter,
        Primitive::Membership,
        Primitive::Neighborhood,
        Primitive::Composition,
        Primitive::Boundedness,
        Primitive::Closure,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Primitive::Transporter => "transporter",
            Primitive::Membership => "membership",
            Primitive::Neighborhood => "neighborhood",
            Primitive::Composition => "composition",
            Primitive::Boundedness => "boundedness",
            Primitive::Closure => "closure",
        }
    }
}

impl fmt::Display for Primitive {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Primitive {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Primitive::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::Invalid(format!("unknown primitive `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CrossCheckReport {
    pub primitive: Primitive,
    pub instance: String,
    pub window: i64,
    /// Reproducing inputs of every disagreement; empty on a pass.
    pub mismatches: Vec<String>,
    /// Comparisons skipped because one side cannot decide them.
    pub skipped: Vec<String>,
}

impl CrossCheckReport {
    pub fn passed(&self) -> bool {
        self.mismatches.is_empty()
    }
}

/// Levels compared by the cross-check.
const CHECK_LEVELS: u32 = 2;

/// Runs each selected primitive on each instance through the symbolic engine
/// and the oracle. An active fault is carried into the worker threads.
pub fn cross_check(instances: &[ActionInstance], primitives: &[Primitive], window: i64) -> Result<Vec<CrossCheckReport>> {
    Window::new(window)?;
    let active = fault::active();
    let tasks: Vec<(&ActionInstance, Primitive)> =
        instances.iter().flat_map(|a| primitives.iter().map(move |&p| (a, p))).collect();
    Ok(tasks
        .par_iter()
        .map(|&(a, p)| fault::with_fault(active, || check_one(a, p, window)))
        .collect())
}

struct Log {
    mismatches: Vec<String>,
    skipped: Vec<String>,
}

impl Log {
    fn symbolic<T>(&mut self, what: &str, r: Result<T>) -> Option<T> {
        match r {
            Ok(v) => Some(v),
            Err(e @ (Error::Unsupported(_) | Error::Inconclusive(_))) => {
                self.skipped.push(format!("{what}: {e}"));
                None
            }
            Err(e) => {
                self.mismatches.push(format!("{what}: symbolic error {e}"));
                None
            }
        }
    }
}

fn sample_grid(a: &ActionInstance, window: i64) -> Vec<Point> {
    match a.space.size() {
        Some(n) => (0..n as i64).map(|v| vec![v]).collect(),
        None => Window { radius: window.min(match a.dim() { 1 => 12, 2 => 3, _ => 1 }) }.points(a.dim()),
    }
}

fn group_radius(a: &ActionInstance, window: i64) -> i64 {
    match a.group.rank() {
        Some(1) | None => window,
        _ => window.min(10),
    }
}

fn check_one(a: &ActionInstance, p: Primitive, window: i64) -> CrossCheckReport {
    let mut log = Log { mismatches: Vec::new(), skipped: Vec::new() };
    let budget = Budget::new(window, CHECK_LEVELS);
    let gw = group_radius(a, window);
    let levels = a.space_levels(&budget).unwrap_or_default();
    match p {
        Primitive::Transporter => check_transporters(a, &levels, gw, window, &mut log),
        Primitive::Membership => check_membership(a, &levels, gw, &budget, &mut log),
        Primitive::Neighborhood => check_neighborhoods(a, &levels, gw, &budget, &mut log),
        Primitive::Composition => check_composition(a, &levels, gw, &budget, &mut log),
        Primitive::Boundedness => check_boundedness(a, &levels, gw, window, &budget, &mut log),
        Primitive::Closure => check_closure(a, &levels, &mut log),
    }
    CrossCheckReport { primitive: p, instance: a.name.clone(), window, mismatches: log.mismatches, skipped: log.skipped }
}

fn check_transporters(a: &ActionInstance, levels: &[SetDescriptor], gw: i64, window: i64, log: &mut Log) {
    for (i, bi) in levels.iter().enumerate() {
        for (j, bj) in levels.iter().enumerate() {
            let what = format!("levels ({i}, {j})");
            let Some(sym) = log.symbolic(&what, transporter(a, bi, bj)) else { continue };
            let first = oracle_transporter(a, bi, bj, gw, window);
            let o = match first.sufficiency {
                Some(s) if !first.certified => oracle_transporter(a, bi, bj, gw, s),
                _ => first,
            };
            if !o.certified {
                log.skipped.push(format!("{what}: window truncation not certified"));
            }
            for l in group_window(a, gw) {
                let s = match sym.contains(&l) {
                    Ok(s) => s,
                    Err(e) => {
                        log.mismatches.push(format!("{what}: symbolic error {e}"));
                        break;
                    }
                };
                let oc = o.elements.contains(&l);
                if s != oc && (o.certified || oc) {
                    log.mismatches.push(format!("{what}, l = {l:?}: symbolic {s}, oracle {oc}"));
                    break;
                }
            }
        }
    }
}

fn check_membership(a: &ActionInstance, levels: &[SetDescriptor], gw: i64, budget: &Budget, log: &mut Log) {
    let grid = sample_grid(a, budget.window);
    for (i, b) in levels.iter().enumerate() {
        let Some(e) = log.symbolic("entourage", orbit_pair_entourage(a, b)) else { return };
        'pairs: for x in &grid {
            for y in &grid {
                let what = format!("level {i}, ({x:?}, {y:?})");
                let Some(s) = log.symbolic(&what, entourage_membership(&e, x, y, budget)) else { break 'pairs };
                let o = oracle_member(a, b, x, y, gw);
                if s == Truth::Unknown {
                    continue;
                }
                if s.is_yes() != o {
                    log.mismatches.push(format!("{what}: symbolic {s:?}, oracle {o}"));
                    break 'pairs;
                }
            }
        }
    }
}

fn check_neighborhoods(a: &ActionInstance, levels: &[SetDescriptor], gw: i64, budget: &Budget, log: &mut Log) {
    let grid = sample_grid(a, budget.window);
    let centers: Vec<Point> = match a.space.size() {
        Some(_) => grid.clone(),
        None => {
            let d = a.dim();
            let mut c = vec![vec![0; d], vec![1; d]];
            c.push((0..d as i64).map(|i| if i % 2 == 0 { -2 } else { 3 }).collect());
            c
        }
    };
    for (i, b) in levels.iter().enumerate() {
        let Some(e) = log.symbolic("entourage", orbit_pair_entourage(a, b)) else { return };
        for x in &centers {
            let what = format!("level {i}, center {x:?}");
            let Some(n) = log.symbolic(&what, neighborhood(&e, &SetDescriptor::points(vec![x.clone()]), budget)) else {
                continue;
            };
            for y in &grid {
                let s = match n.set.contains_truth(y) {
                    Ok(Truth::Unknown) => continue,
                    Ok(t) => t.is_yes(),
                    Err(err) => {
                        log.mismatches.push(format!("{what}: symbolic error {err}"));
                        break;
                    }
                };
                let o = oracle_member(a, b, x, y, gw);
                if s != o && (n.exact || s) {
                    log.mismatches.push(format!("{what}, y = {y:?}: symbolic {s}, oracle {o}"));
                    break;
                }
            }
        }
    }
}

fn check_composition(a: &ActionInstance, levels: &[SetDescriptor], gw: i64, budget: &Budget, log: &mut Log) {
    let Some(report) = log.symbolic("base property", base_property_check(a, budget)) else { return };
    match report.status {
        TheoremStatus::Confirmed => {
            let grid = sample_grid(a, budget.window.min(6));
            let middle = match a.space.size() {
                Some(_) => grid.clone(),
                None => sample_grid(a, budget.window.min(12)),
            };
            for &(i, j, k) in report.indices.iter().filter(|t| t.0 <= 1 && t.1 <= 1) {
                let (Some(bi), Some(bj)) = (levels.get(i as usize), levels.get(j as usize)) else { continue };
                let bk = match levels.get(k as usize) {
                    Some(b) => b.clone(),
                    None => match crate::coarse::bornology_level(&a.bornology, a.dim(), k) {
                        Ok(b) => b,
                        Err(e) => {
                            log.skipped.push(format!("level {k}: {e}"));
                            continue;
                        }
                    },
                };
                let into: Vec<Vec<bool>> =
                    grid.iter().map(|x| middle.iter().map(|y| oracle_member(a, bi, x, y, gw)).collect()).collect();
                let out_of: Vec<Vec<bool>> =
                    middle.iter().map(|y| grid.iter().map(|z| oracle_member(a, bj, y, z, gw)).collect()).collect();
                'pairs: for (xi, x) in grid.iter().enumerate() {
                    for (zi, z) in grid.iter().enumerate() {
                        let composed = (0..middle.len()).any(|yi| into[xi][yi] && out_of[yi][zi]);
                        if composed && !oracle_member(a, &bk, x, z, gw) {
                            log.mismatches.push(format!("E({i}) o E({j}) at ({x:?}, {z:?}) not in E({k})"));
                            break 'pairs;
                        }
                    }
                }
            }
        }
        TheoremStatus::RefutedWithWitness => {
            for w in &report.witnesses {
                if !replay_with_oracle(a, w, gw) {
                    log.mismatches.push(format!("witness does not replay: {w}"));
                }
            }
        }
        _ => log.skipped.push(format!("base property: {}", report.note)),
    }
}

/// Replays a composition witness with oracle memberships.
pub fn replay_with_oracle(a: &ActionInstance, w: &crate::error::CompositionWitness, gw: i64) -> bool {
    let level = |i: u32| -> Option<SetDescriptor> {
        match &a.space {
            GroundSpace::Lattice { dim } => crate::coarse::bornology_level(&a.bornology, *dim, u64::from(i)).ok(),
            GroundSpace::Finite { .. } => {
                a.space_levels(&Budget::default()).ok().and_then(|v| v.get(i as usize).cloned())
            }
        }
    };
    let (Some(bx), Some(by), Some(bz)) = (level(w.levels.0), level(w.levels.1), level(w.escapes)) else {
        return false;
    };
    oracle_member(a, &bx, &w.x, &w.y, gw) && oracle_member(a, &by, &w.y, &w.z, gw) && !oracle_member(a, &bz, &w.x, &w.z, gw)
}

fn check_boundedness(a: &ActionInstance, levels: &[SetDescriptor], gw: i64, window: i64, budget: &Budget, log: &mut Log) {
    for (i, bi) in levels.iter().enumerate() {
        for (j, bj) in levels.iter().enumerate() {
            let what = format!("levels ({i}, {j})");
            let Some(t) = log.symbolic(&what, transporter(a, bi, bj)) else { continue };
            let Some(v) = log.symbolic(&what, transporter_bounded(a, &t, budget)) else { continue };
            match v {
                BoundVerdict::BoundedAt(n) => {
                    let o = oracle_transporter(a, bi, bj, gw, window);
                    if let Some(l) = o.elements.iter().find(|l| !group_level_contains(&a.group, n, l)) {
                        log.mismatches.push(format!("{what}: bounded at {n} but l = {l:?} transports"));
                    }
                }
                BoundVerdict::Unbounded(e) => {
                    for (m, l) in e.points.iter().enumerate() {
                        let hits = oracle_transporter(a, bi, bj, l.iter().map(|v| v.abs()).max().unwrap_or(0).max(1), window);
                        let transports = hits.elements.contains(l) || !hits.certified;
                        if !transports || group_level_contains(&a.group, m as u64, l) {
                            log.mismatches.push(format!("{what}: escape point {l:?} for level {m} does not escape"));
                        }
                    }
                }
                BoundVerdict::Inconclusive { .. } => log.skipped.push(format!("{what}: inconclusive")),
            }
        }
    }
    // coarse boundedness of the levels in the associated structure
    let Ok(cs) = crate::associated::associated_structure(a, budget) else { return };
    if matches!(cs, CoarseStructureSpec::FiniteClosure(_)) {
        return;
    }
    let grid = sample_grid(a, window.min(8));
    for (i, bi) in levels.iter().enumerate() {
        let what = format!("level {i} in the associated structure");
        let Some(cb) = log.symbolic(&what, coarsely_bounded(&cs, bi, budget)) else { continue };
        let BoundVerdict::BoundedAt(n) = cb.verdict else { continue };
        let Ok(bn) = crate::coarse::bornology_level(&a.bornology, a.dim(), n) else { continue };
        let inside: Vec<&Point> = grid.iter().filter(|x| oracle_contains(bi, x, gw)).take(24).collect();
        'pairs: for x in &inside {
            for y in &inside {
                if !oracle_member(a, &bn, x, y, gw) {
                    log.mismatches.push(format!("{what}: bounded at {n} but ({x:?}, {y:?}) escapes"));
                    break 'pairs;
                }
            }
        }
    }
}

fn check_closure(a: &ActionInstance, levels: &[SetDescriptor], log: &mut Log) {
    let Some(n) = a.space.size() else { return };
    if n > 12 {
        log.skipped.push("ground set too large".into());
        return;
    }
    let base: Vec<Vec<(usize, usize)>> = levels
        .iter()
        .map(|b| {
            let pts: Vec<usize> = (0..n).filter(|&v| oracle_contains(b, &[v as i64], 0)).collect();
            let mut pairs = Vec::new();
            for g in 0..a.group.order().unwrap_or(0) {
                let moved: Vec<usize> = pts.iter().map(|&v| oracle_act(a, &[g as i64], &[v as i64])[0] as usize).collect();
                for &x in &moved {
                    for &y in &moved {
                        pairs.push((x, y));
                    }
                }
            }
            pairs
        })
        .collect();
    let rels: Vec<Relation> = match base.iter().map(|p| Relation::from_pairs(n, p)).collect::<Result<Vec<_>>>() {
        Ok(r) => r,
        Err(e) => {
            log.mismatches.push(format!("relations: {e}"));
            return;
        }
    };
    let Some(fc) = log.symbolic("closure", close_finite_base(&a.space, &rels)) else { return };
    let top = oracle_closure(n, &base);
    for x in 0..n {
        for y in 0..n {
            let mut single = Relation::empty(n);
            single.insert(x, y);
            if fc.contains(&single) != top[x][y] {
                log.mismatches.push(format!("pair ({x}, {y}): symbolic {}, oracle {}", fc.contains(&single), top[x][y]));
                return;
            }
        }
    }
    let mut all = Relation::empty(n);
    for (x, row) in top.iter().enumerate() {
        for (y, &v) in row.iter().enumerate() {
            if v {
                all.insert(x, y);
            }
        }
    }
    if !fc.contains(&all) {
        log.mismatches.push("the oracle's largest relation is not controlled".into());
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Profile {
    Finite,
    LatticeK1,
    LatticeK2,
}

impl Profile {
    pub fn name(self) -> &'static str {
        match self {
            Profile::Finite => "finite",
            Profile::LatticeK1 => "lattice-k1",
            Profile::LatticeK2 => "lattice-k2",
        }
    }
}

impl fmt::Display for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Profile {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [Profile::Finite, Profile::LatticeK1, Profile::LatticeK2]
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::Invalid(format!("unknown profile `{s}`")))
    }
}

/// A reproducible instance drawn from `seed`.
pub fn random_instance(seed: u64, profile: Profile) -> Result<ActionInstance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let name = format!("random-{profile}-{seed}");
    match profile {
        Profile::Finite => random_finite(&mut rng, name),
        Profile::LatticeK1 => random_lattice(&mut rng, name, 1),
        Profile::LatticeK2 => random_lattice(&mut rng, name, 2),
    }
}

fn random_chain(rng: &mut ChaCha8Rng, d: usize) -> ChainShape {
    let mut lower = Vec::with_capacity(d);
    let mut upper = Vec::with_capacity(d);
    for _ in 0..d {
        lower.push(if rng.gen_ratio(1, 5) {
            IndexExpr::NegInf
        } else {
            IndexExpr::affine(-rng.gen_range(1..=2), -rng.gen_range(0..=2))
        });
        upper.push(if rng.gen_ratio(1, 5) {
            IndexExpr::PosInf
        } else {
            IndexExpr::affine(rng.gen_range(1..=2), rng.gen_range(0..=2))
        });
    }
    ChainShape { lower, upper }
}

fn random_lattice(rng: &mut ChaCha8Rng, name: String, k: usize) -> Result<ActionInstance> {
    let d = rng.gen_range(1..=3);
    let data: Vec<i64> = (0..d * k).map(|_| rng.gen_range(-2..=2)).collect();
    let m = IntMatrix::new(d, k, data)?;
    let mut chain = random_chain(rng, d);
    let group = if rng.gen_ratio(1, 10) { BornologySpec::Maximal } else { BornologySpec::cubes(k) };
    if group == BornologySpec::Maximal {
        // keep the action bornological: whole orbits must be bounded
        for r in (0..d).filter(|&r| m.row(r).iter().any(|&v| v != 0)) {
            chain.lower[r] = IndexExpr::NegInf;
            chain.upper[r] = IndexExpr::PosInf;
        }
    }
    let space = BornologySpec::Chain(chain);
    ActionInstance::new(name, GroupSpec::lattice(k, group)?, GroundSpace::lattice(d), ActionRule::Translation(m), space)
}

fn compose(p: &[usize], q: &[usize]) -> Vec<usize> {
    q.iter().map(|&v| p[v]).collect()
}

fn random_finite(rng: &mut ChaCha8Rng, name: String) -> Result<ActionInstance> {
    let (elements, labels): (Vec<Vec<usize>>, usize) = if rng.gen_ratio(1, 4) {
        // S3 on three of the labels, the rest fixed
        let s = rng.gen_range(3..=5);
        let mut slots: Vec<usize> = (0..s).collect();
        slots.shuffle(rng);
        let small = [[0, 1, 2], [1, 2, 0], [2, 0, 1], [1, 0, 2], [0, 2, 1], [2, 1, 0]];
        let perms = small
            .iter()
            .map(|p| {
                let mut full: Vec<usize> = (0..s).collect();
                for i in 0..3 {
                    full[slots[i]] = slots[p[i]];
                }
                full
            })
            .collect();
        (perms, s)
    } else {
        // a cyclic group through a permutation whose cycle lengths divide n
        let n = rng.gen_range(1..=6);
        let s = rng.gen_range(1..=5);
        let mut order: Vec<usize> = (0..s).collect();
        order.shuffle(rng);
        let mut sigma: Vec<usize> = (0..s).collect();
        let mut rest = &order[..];
        while !rest.is_empty() {
            let lens: Vec<usize> = (1..=rest.len()).filter(|c| n % c == 0).collect();
            let c = *lens.choose(rng).expect("1 divides n");
            for i in 0..c {
                sigma[rest[i]] = rest[(i + 1) % c];
            }
            rest = &rest[c..];
        }
        let mut perms = vec![(0..s).collect::<Vec<usize>>()];
        for g in 1..n {
            perms.push(compose(&sigma, &perms[g - 1]));
        }
        (perms, s)
    };
    let order = elements.len();
    let mul: Vec<Vec<usize>> = (0..order)
        .map(|a| {
            (0..order)
                .map(|b| {
                    let c = compose(&elements[a], &elements[b]);
                    elements.iter().position(|p| *p == c).expect("closed under composition")
                })
                .collect()
        })
        .collect();
    // cyclic groups with a non-faithful action repeat permutations
    let group = if elements.iter().enumerate().all(|(i, p)| elements.iter().position(|q| q == p) == Some(i)) {
        FiniteGroup::new(mul)?
    } else {
        FiniteGroup::cyclic(order)?
    };
    let full = (1u64 << labels) - 1;
    let mut base: Vec<u64> = (0..rng.gen_range(1..=3)).map(|_| rng.gen_range(1..=full)).collect();
    let covered = base.iter().fold(0, |acc, m| acc | m);
    base[0] |= full & !covered;
    // a base must absorb pairwise unions
    loop {
        let joins: Vec<u64> = base
            .iter()
            .flat_map(|&s| base.iter().map(move |&t| s | t))
            .filter(|u| !base.iter().any(|&m| u & !m == 0))
            .collect();
        if joins.is_empty() {
            break;
        }
        base.extend(joins.into_iter().take(1));
    }
    ActionInstance::new(
        name,
        GroupSpec::finite(group, BornologySpec::Maximal)?,
        GroundSpace::finite(labels),
        ActionRule::Permutation(elements),
        BornologySpec::FiniteBase { size: labels, base },
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bornology::bornology_axiom_check;
    use crate::sets::fault::Fault;

    fn shift() -> ActionInstance {
        let g = GroupSpec::lattice(1, BornologySpec::cubes(1)).unwrap();
        let m = IntMatrix::new(1, 1, vec![1]).unwrap();
        ActionInstance::new("shift", g, GroundSpace::lattice(1), ActionRule::Translation(m), BornologySpec::cubes(1)).unwrap()
    }

    fn hyperbola() -> ActionInstance {
        let g = GroupSpec::lattice(1, BornologySpec::cubes(1)).unwrap();
        let m = IntMatrix::new(2, 1, vec![1, -1]).unwrap();
        let chain = ChainShape::new(vec![IndexExpr::NegInf; 2], vec![IndexExpr::affine(1, 0); 2]).unwrap();
        ActionInstance::new("hyperbola", g, GroundSpace::lattice(2), ActionRule::Translation(m), BornologySpec::Chain(chain))
            .unwrap()
    }

    fn interval(lo: i64, hi: i64) -> SetDescriptor {
        SetDescriptor::Box(IntBox::from_bounds(&[(lo, hi)]))
    }

    #[test]
    fn window_counts() {
        let w = Window::new(2).unwrap();
        assert_eq!(w.points(2).len() as u128, w.point_count(2));
        assert_eq!(w.point_count(3), 125);
        assert!(Window::new(0).is_err());
    }

    #[test]
    fn transporter_examples() {
        let o = oracle_transporter(&shift(), &interval(0, 1), &interval(5, 6), 20, 20);
        assert_eq!(o.elements, vec![vec![4], vec![5], vec![6]]);
        assert!(o.certified);
        let g = GroupSpec::lattice(1, BornologySpec::cubes(1)).unwrap();
        let m = IntMatrix::new(1, 1, vec![0]).unwrap();
        let trivial =
            ActionInstance::new("trivial", g, GroundSpace::lattice(1), ActionRule::Translation(m), BornologySpec::cubes(1))
                .unwrap();
        let zero = SetDescriptor::points(vec![vec![0]]);
        assert_eq!(oracle_transporter(&trivial, &zero, &zero, 5, 5).elements.len(), 11);
        let s0 = crate::coarse::bornology_level(&hyperbola().bornology, 2, 0).unwrap();
        let o = oracle_transporter(&hyperbola(), &s0, &s0, 20, 64);
        assert_eq!(o.elements.len(), 41);
        assert_eq!(o.sufficiency, Some(20));
        assert!(o.certified);
    }

    #[test]
    fn window_monotone() {
        let a = hyperbola();
        let b = SetDescriptor::Box(IntBox::from_bounds(&[(-3, 1), (0, 2)]));
        let small = oracle_transporter(&a, &b, &b, 5, 4).elements;
        let large = oracle_transporter(&a, &b, &b, 9, 12).elements;
        assert!(small.iter().all(|l| large.contains(l)));
    }

    #[test]
    fn membership_and_neighborhood() {
        let a = shift();
        assert!(oracle_member(&a, &interval(0, 1), &[3], &[4], 8));
        assert!(!oracle_member(&a, &interval(0, 1), &[0], &[2], 8));
        assert_eq!(oracle_neighborhood(&a, &interval(0, 2), &[0], 8, 8).len(), 5);
    }

    #[test]
    fn closure_of_a_path() {
        let top = oracle_closure(3, &[vec![(0, 1)], vec![(1, 2)]]);
        assert!(top.iter().flatten().all(|&v| v));
        let top = oracle_closure(3, &[vec![(0, 1)]]);
        assert!(!top[0][2] && top[1][0]);
    }

    #[test]
    fn random_instances_are_reproducible() {
        for p in [Profile::Finite, Profile::LatticeK1, Profile::LatticeK2] {
            assert_eq!(random_instance(0, p).unwrap(), random_instance(0, p).unwrap());
        }
        for seed in 1..=100 {
            let a = random_instance(seed, Profile::LatticeK1).unwrap();
            assert!(bornology_axiom_check(&a.bornology).passed(), "{a:?}");
        }
        for seed in 0..50 {
            let a = random_instance(seed, Profile::Finite).unwrap();
            assert!(bornology_axiom_check(&a.bornology).passed(), "{a:?}");
        }
    }

    #[test]
    fn flagships_agree() {
        let reports = cross_check(&[shift(), hyperbola()], &Primitive::ALL, 16).unwrap();
        for r in &reports {
            assert!(r.passed(), "{r:?}");
        }
    }

    #[test]
    fn faults_are_detected() {
        for f in [Fault::DifferenceLow, Fault::IntersectHigh, Fault::TranslateLow] {
            let reports = fault::with_fault(Some(f), || cross_check(&[shift(), hyperbola()], &Primitive::ALL, 16).unwrap());
            assert!(reports.iter().any(|r| !r.passed()), "{f:?} went unnoticed");
        }
    }
}
