//! Eilenberg-MacLane spaces `K(A,n)` as normalized cocycles on simplices,
//! group cocycles as maps `W̄G -> K(A,n)`, cocycle spans over hypercovers of
//! `W̄G`, and the twisted universal bundle.

use std::collections::HashMap;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{check_budget, Error, Result};
use crate::group::FinGroup;
use crate::kan::{classify, Kind, Nat, Verdict};
use crate::simp_group::{
    equivariant_quotient_map, w_bar, w_total, GroupAction, HomotopyQuotient, ProductLevels, Side, SimplicialGroup,
    TwistedProduct,
};
use crate::sset::{pullback, SMap, SSet};
use crate::strictify::{strictify, Strictification};

/// The `m`-element subsets of `0..=k` in lexicographic order.
pub fn subsets(k: usize, m: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, k: usize, m: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == m {
            out.push(cur.clone());
            return;
        }
        for v in start..=k {
            if k + 1 - v < m - cur.len() {
                break;
            }
            cur.push(v);
            rec(v + 1, k, m, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if m <= k + 1 {
        rec(0, k, m, &mut Vec::with_capacity(m), &mut out);
    }
    out
}

/// `Σ (-1)^i x_i` in the abelian group `a`.
fn alternating_sum(a: &FinGroup, xs: impl Iterator<Item = usize>) -> usize {
    xs.enumerate()
        .fold(a.e, |acc, (i, x)| a.m(acc, if i % 2 == 0 { x } else { a.inv[x] }))
}

/// `c·x` for an integer `c`.
fn scale(a: &FinGroup, x: usize, c: i64) -> usize {
    let c = c.rem_euclid(a.order as i64);
    (0..c).fold(a.e, |acc, _| a.m(acc, x))
}

/// `K(A,n)` truncated at `D`: level `k` is the group of normalized
/// `A`-valued `n`-cocycles on `Δ^k`, i.e. functions on the `(n+1)`-subsets
/// of `[k]` with vanishing coboundary. Ids are lexicographic in the value
/// vector.
#[derive(Clone, Debug)]
pub struct EMSpace {
    pub a: FinGroup,
    pub n: usize,
    pub group: SimplicialGroup,
    /// `subsets[k]`: the `(n+1)`-subsets of `[k]`.
    pub subsets: Vec<Vec<Vec<usize>>>,
    /// `cochains[k][x]`: the values of `x` on `subsets[k]`.
    pub cochains: Vec<Vec<Vec<usize>>>,
    index: Vec<HashMap<Vec<usize>, usize>>,
}

impl EMSpace {
    pub fn sset(&self) -> &Arc<SSet> {
        &self.group.sset
    }

    pub fn dim(&self) -> usize {
        self.group.dim()
    }

    /// The id of the cocycle with the given values, if it is one.
    pub fn lookup(&self, k: usize, values: &[usize]) -> Option<usize> {
        self.index[k].get(values).copied()
    }

    /// The value of `x ∈ K_k` on the subset `sigma`.
    pub fn value(&self, k: usize, x: usize, sigma: &[usize]) -> usize {
        let pos = self.subsets[k].binary_search_by(|s| s.as_slice().cmp(sigma)).expect("subset of the right size");
        self.cochains[k][x][pos]
    }

    pub fn truncate(&self, d: usize) -> Result<EMSpace> {
        Ok(EMSpace {
            a: self.a.clone(),
            n: self.n,
            group: self.group.truncate(d)?,
            subsets: self.subsets[..=d].to_vec(),
            cochains: self.cochains[..=d].to_vec(),
            index: self.index[..=d].to_vec(),
        })
    }
}

fn cocycles_on_simplex(a: &FinGroup, k: usize, n: usize, subs: &[Vec<usize>]) -> Result<Vec<Vec<usize>>> {
    let pos: HashMap<&[usize], usize> = subs.iter().enumerate().map(|(i, s)| (s.as_slice(), i)).collect();
    // Each coboundary condition is checked once its lexicographically last
    // face, the one missing the first vertex, has been assigned.
    let mut checks: Vec<Vec<Vec<usize>>> = vec![Vec::new(); subs.len()];
    for tau in subsets(k, n + 2) {
        let faces: Vec<usize> = (0..tau.len())
            .map(|i| {
                let mut f = tau.clone();
                f.remove(i);
                pos[f.as_slice()]
            })
            .collect();
        checks[faces[0]].push(faces);
    }
    let mut out = Vec::new();
    let mut vals = vec![a.e; subs.len()];
    fn rec(
        p: usize,
        a: &FinGroup,
        k: usize,
        checks: &[Vec<Vec<usize>>],
        vals: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
    ) -> Result<()> {
        if p == vals.len() {
            out.push(vals.clone());
            return check_budget(k, out.len());
        }
        for v in 0..a.order {
            vals[p] = v;
            if checks[p].iter().all(|fs| alternating_sum(a, fs.iter().map(|&f| vals[f])) == a.e) {
                rec(p + 1, a, k, checks, vals, out)?;
            }
        }
        Ok(())
    }
    rec(0, a, k, &checks, &mut vals, &mut out)?;
    Ok(out)
}

/// `K(A,n)` truncated at `d`, enumerated by backtracking on the cocycle
/// condition.
pub fn em_space(a: &FinGroup, n: usize, d: usize) -> Result<EMSpace> {
    if !a.abelian {
        return Err(Error::Invalid("K(A,n) needs an abelian group".into()));
    }
    let subs: Vec<Vec<Vec<usize>>> = (0..=d).map(|k| subsets(k, n + 1)).collect();
    let levels: Vec<Vec<Vec<usize>>> = (0..=d)
        .map(|k| cocycles_on_simplex(a, k, n, &subs[k]))
        .collect::<Result<_>>()?;
    let sub_index: Vec<HashMap<&[usize], usize>> = subs
        .iter()
        .map(|l| l.iter().enumerate().map(|(i, s)| (s.as_slice(), i)).collect())
        .collect();
    let zero = a.e;
    let x = SSet::from_model(
        levels.clone(),
        |k, i, c: &Vec<usize>| {
            subs[k - 1]
                .iter()
                .map(|s| {
                    let img: Vec<usize> = s.iter().map(|&v| if v < i { v } else { v + 1 }).collect();
                    c[sub_index[k][img.as_slice()]]
                })
                .collect()
        },
        |k, i, c: &Vec<usize>| {
            subs[k + 1]
                .iter()
                .map(|s| {
                    let img: Vec<usize> = s.iter().map(|&v| if v <= i { v } else { v - 1 }).collect();
                    if img.windows(2).any(|w| w[0] == w[1]) {
                        zero
                    } else {
                        c[sub_index[k][img.as_slice()]]
                    }
                })
                .collect()
        },
    )?
    .with_coskeletal_above(Some(n + 1));
    let index: Vec<HashMap<Vec<usize>, usize>> = levels
        .iter()
        .map(|l| l.iter().enumerate().map(|(i, c)| (c.clone(), i)).collect())
        .collect();
    let mut groups = Vec::with_capacity(d + 1);
    for (k, l) in levels.iter().enumerate() {
        let find = |c: Vec<usize>| -> Result<usize> {
            index[k]
                .get(&c)
                .copied()
                .ok_or_else(|| Error::Invariant(format!("cocycles on Δ^{k} are not closed under addition")))
        };
        let mul = l
            .iter()
            .map(|x| l.iter().map(|y| find(x.iter().zip(y).map(|(&p, &q)| a.m(p, q)).collect())).collect())
            .collect::<Result<Vec<Vec<usize>>>>()?;
        let inv = l
            .iter()
            .map(|x| find(x.iter().map(|&p| a.inv[p]).collect()))
            .collect::<Result<Vec<usize>>>()?;
        groups.push(FinGroup {
            order: l.len(),
            mul,
            inv,
            e: find(vec![a.e; subs[k].len()])?,
            abelian: true,
        });
    }
    Ok(EMSpace {
        a: a.clone(),
        n,
        group: SimplicialGroup::new(Arc::new(x), groups)?,
        subsets: subs,
        cochains: levels,
        index,
    })
}

/// The levelwise map `W̄K(A,n) -> K(A,n+1)` sending `w` to the cochain whose
/// value on an `(n+1)`-simplex is the last coordinate of the restriction of
/// `w` to it.
#[derive(Clone, Debug)]
pub struct WbarEmIso {
    pub source: EMSpace,
    pub wbar: ProductLevels,
    pub target: EMSpace,
    pub map: SMap,
}

impl WbarEmIso {
    pub fn is_bijective(&self) -> bool {
        self.map.is_levelwise_bijective()
    }

    /// First `(level, w, w')` with `Φ(w + w') != Φ(w) + Φ(w')`.
    pub fn homomorphism_failure(&self) -> Option<(usize, usize, usize)> {
        let g = &self.source.group;
        for k in 0..=self.map.dim() {
            let sz = self.wbar.sset.size(k);
            let tuples: Vec<Vec<usize>> = (0..sz).map(|w| self.wbar.decode(k, w)).collect();
            for (p, tp) in tuples.iter().enumerate() {
                for (q, tq) in tuples.iter().enumerate() {
                    let sum: Vec<usize> = (0..k).map(|j| g.mul(j, tp[j], tq[j])).collect();
                    let lhs = self.map.apply(k, self.wbar.encode(k, &sum));
                    let rhs = self.target.group.mul(k, self.map.apply(k, p), self.map.apply(k, q));
                    if lhs != rhs {
                        return Some((k, p, q));
                    }
                }
            }
        }
        None
    }
}

/// Builds and checks `W̄K(A,n) -> K(A,n+1)` up to level `d`.
pub fn wbar_em_iso(k: &EMSpace, d: usize) -> Result<WbarEmIso> {
    let n = k.n;
    let wb = w_bar(&k.group, d)?;
    let target = em_space(&k.a, n + 1, d)?;
    let mut comps = Vec::with_capacity(d + 1);
    for lv in 0..=d {
        let row: Result<Vec<usize>> = (0..wb.sset.size(lv))
            .map(|w| {
                let vals: Vec<usize> = target.subsets[lv]
                    .iter()
                    .map(|s| {
                        let r = wb.sset.restrict(lv, w, s);
                        let last = wb.decode(n + 1, r)[n];
                        k.cochains[n][last][0]
                    })
                    .collect();
                target
                    .lookup(lv, &vals)
                    .ok_or_else(|| Error::Invariant(format!("image of {w} at level {lv} is not a cocycle")))
            })
            .collect();
        comps.push(row?);
    }
    let map = SMap::new(wb.sset.clone(), target.sset().clone(), comps)?;
    map.ensure_simplicial()?;
    Ok(WbarEmIso {
        source: k.clone(),
        wbar: wb,
        target,
        map,
    })
}

/// `W̄` of the constant simplicial group on `g`, truncated at `d`; level `k`
/// is `G^k` with tuple ids, first coordinate most significant.
pub fn classifying_space(g: &FinGroup, d: usize) -> Result<Arc<SSet>> {
    Ok(w_bar(&SimplicialGroup::constant(g, d.saturating_sub(1)), d)?.sset)
}

/// A normalized `A`-valued group `n`-cochain on `G`, stored on `G^n` in
/// tuple order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GroupCocycle {
    pub g: FinGroup,
    pub a: FinGroup,
    pub n: usize,
    pub values: Vec<usize>,
}

/// Result of a search for a normalized cochain with prescribed coboundary.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CoboundarySearch {
    /// Values of a witness `b` on the level below, zero on degenerate simplices.
    Found(Vec<usize>),
    NotCoboundary,
    /// The node limit was reached first.
    Inconclusive,
}

impl GroupCocycle {
    /// Checks shape, normalization and the cocycle condition, reporting the
    /// first violating tuple.
    pub fn new(g: FinGroup, a: FinGroup, n: usize, values: Vec<usize>) -> Result<GroupCocycle> {
        if !a.abelian {
            return Err(Error::Invalid("coefficients must be abelian".into()));
        }
        if values.len() != g.order.pow(n as u32) || values.iter().any(|&v| v >= a.order) {
            return Err(Error::Shape(format!("a {n}-cochain has {} values in A", g.order.pow(n as u32))));
        }
        let c = GroupCocycle { g, a, n, values };
        if let Some(t) = c.normalization_failure() {
            return Err(Error::Invalid(format!("not normalized at {t:?}")));
        }
        if let Some(t) = c.cocycle_failure() {
            return Err(Error::Invalid(format!("not a cocycle: δc is nonzero at {t:?}")));
        }
        Ok(c)
    }

    pub fn from_fn(g: &FinGroup, a: &FinGroup, n: usize, f: impl Fn(&[usize]) -> usize) -> Result<GroupCocycle> {
        let values = (0..g.order.pow(n as u32)).map(|id| f(&decode_tuple(g.order, n, id))).collect();
        GroupCocycle::new(g.clone(), a.clone(), n, values)
    }

    pub fn zero(g: &FinGroup, a: &FinGroup, n: usize) -> GroupCocycle {
        GroupCocycle {
            g: g.clone(),
            a: a.clone(),
            n,
            values: vec![a.e; g.order.pow(n as u32)],
        }
    }

    pub fn at(&self, t: &[usize]) -> usize {
        self.values[encode_tuple(self.g.order, t)]
    }

    pub fn normalization_failure(&self) -> Option<Vec<usize>> {
        (0..self.values.len())
            .map(|id| decode_tuple(self.g.order, self.n, id))
            .find(|t| t.contains(&self.g.e) && self.at(t) != self.a.e)
    }

    pub fn cocycle_failure(&self) -> Option<Vec<usize>> {
        let d = coboundary(&self.g, &self.a, self.n, &self.values);
        d.iter()
            .position(|&v| v != self.a.e)
            .map(|id| decode_tuple(self.g.order, self.n + 1, id))
    }

    /// Pointwise sum; both must live on the same groups and degree.
    pub fn add(&self, other: &GroupCocycle) -> Result<GroupCocycle> {
        if self.g != other.g || self.a != other.a || self.n != other.n {
            return Err(Error::Shape("cocycles of different type".into()));
        }
        let values = self.values.iter().zip(&other.values).map(|(&p, &q)| self.a.m(p, q)).collect();
        Ok(GroupCocycle { values, ..self.clone() })
    }

    pub fn neg(&self) -> GroupCocycle {
        GroupCocycle {
            values: self.values.iter().map(|&v| self.a.inv[v]).collect(),
            ..self.clone()
        }
    }

    /// Whether `c = δb` for a normalized `(n-1)`-cochain `b`, by search with
    /// unit propagation.
    pub fn is_coboundary(&self, node_limit: u64) -> Result<CoboundarySearch> {
        if self.n == 0 {
            return Ok(if self.values.iter().all(|&v| v == self.a.e) {
                CoboundarySearch::Found(Vec::new())
            } else {
                CoboundarySearch::NotCoboundary
            });
        }
        let wb = classifying_space(&self.g, self.n)?;
        solve_coboundary(&wb, &self.a, self.n, &self.values, node_limit)
    }
}

fn decode_tuple(order: usize, n: usize, mut id: usize) -> Vec<usize> {
    let mut t = vec![0; n];
    for slot in t.iter_mut().rev() {
        *slot = id % order;
        id /= order;
    }
    t
}

fn encode_tuple(order: usize, t: &[usize]) -> usize {
    t.iter().fold(0, |acc, &v| acc * order + v)
}

/// The bar coboundary of an `m`-cochain `b` on `G^m`:
/// `(δb)(g_1..g_{m+1}) = b(g_2..) + Σ (-1)^i b(..g_i g_{i+1}..) + (-1)^{m+1} b(g_1..g_m)`.
pub fn coboundary(g: &FinGroup, a: &FinGroup, m: usize, b: &[usize]) -> Vec<usize> {
    (0..g.order.pow(m as u32 + 1))
        .map(|id| {
            let t = decode_tuple(g.order, m + 1, id);
            let faces = (0..=m + 1).map(|i| {
                let f: Vec<usize> = if i == 0 {
                    t[1..].to_vec()
                } else if i == m + 1 {
                    t[..m].to_vec()
                } else {
                    let mut f = t[..i - 1].to_vec();
                    f.push(g.m(t[i - 1], t[i]));
                    f.extend_from_slice(&t[i + 1..]);
                    f
                };
                b[encode_tuple(g.order, &f)]
            });
            alternating_sum(a, faces)
        })
        .collect()
}

/// Searches for a normalized `A`-valued `(m-1)`-cochain `b` on `s` with
/// `δb = target` on `s_m`.
pub fn solve_coboundary(s: &SSet, a: &FinGroup, m: usize, target: &[usize], node_limit: u64) -> Result<CoboundarySearch> {
    if m == 0 || s.dim() < m || target.len() != s.size(m) {
        return Err(Error::Shape(format!("need a cochain on level {m} of a space reaching level {m}")));
    }
    let lo = m - 1;
    let mut var = vec![usize::MAX; s.size(lo)];
    let mut nv = 0;
    for (x, slot) in var.iter_mut().enumerate() {
        if !s.is_degenerate(lo, x) {
            *slot = nv;
            nv += 1;
        }
    }
    let mut cons: Vec<(Vec<(usize, i64)>, usize)> = Vec::new();
    for (x, &rhs) in target.iter().enumerate() {
        if s.is_degenerate(m, x) {
            if rhs != a.e {
                return Ok(CoboundarySearch::NotCoboundary);
            }
            continue;
        }
        let mut coef: HashMap<usize, i64> = HashMap::new();
        for i in 0..=m {
            let v = var[s.face(m, i, x)];
            if v != usize::MAX {
                *coef.entry(v).or_default() += if i % 2 == 0 { 1 } else { -1 };
            }
        }
        let mut terms: Vec<(usize, i64)> = coef.into_iter().filter(|&(_, c)| c != 0).collect();
        terms.sort_unstable();
        cons.push((terms, rhs));
    }
    let mut solver = Solver::new(a, nv, cons, node_limit);
    Ok(match solver.run() {
        Some(true) => CoboundarySearch::Found(
            var.iter()
                .map(|&v| if v == usize::MAX { a.e } else { solver.vals[v].expect("assigned") })
                .collect(),
        ),
        Some(false) => CoboundarySearch::NotCoboundary,
        None => CoboundarySearch::Inconclusive,
    })
}

/// Depth-first search over assignments of linear equations in `A`, forcing
/// any variable that is alone with a unit coefficient.
struct Solver<'a> {
    a: &'a FinGroup,
    cons: Vec<(Vec<(usize, i64)>, usize)>,
    by_var: Vec<Vec<usize>>,
    vals: Vec<Option<usize>>,
    nodes: u64,
    limit: u64,
}

impl<'a> Solver<'a> {
    fn new(a: &'a FinGroup, nv: usize, cons: Vec<(Vec<(usize, i64)>, usize)>, limit: u64) -> Self {
        let mut by_var = vec![Vec::new(); nv];
        for (c, (terms, _)) in cons.iter().enumerate() {
            for &(v, _) in terms {
                by_var[v].push(c);
            }
        }
        Solver {
            a,
            cons,
            by_var,
            vals: vec![None; nv],
            nodes: 0,
            limit,
        }
    }

    fn run(&mut self) -> Option<bool> {
        let mut trail = Vec::new();
        let all: Vec<usize> = (0..self.cons.len()).collect();
        if !self.propagate(all, &mut trail) {
            return Some(false);
        }
        self.search()
    }

    fn propagate(&mut self, mut queue: Vec<usize>, trail: &mut Vec<usize>) -> bool {
        let a = self.a;
        let unit = |c: i64| c.rem_euclid(a.order as i64);
        while let Some(c) = queue.pop() {
            let (terms, rhs) = &self.cons[c];
            let mut sum = a.e;
            let mut open = None;
            let mut n_open = 0;
            for &(v, k) in terms {
                match self.vals[v] {
                    Some(x) => sum = a.m(sum, scale(a, x, k)),
                    None => {
                        n_open += 1;
                        open = Some((v, k));
                    }
                }
            }
            match (n_open, open) {
                (0, _) if sum != *rhs => return false,
                (1, Some((v, k))) if unit(k) == 1 || unit(k) == unit(-1) => {
                    let rest = a.m(*rhs, a.inv[sum]);
                    let x = if unit(k) == 1 { rest } else { a.inv[rest] };
                    self.vals[v] = Some(x);
                    trail.push(v);
                    queue.extend(self.by_var[v].iter().copied());
                }
                _ => {}
            }
        }
        true
    }

    fn search(&mut self) -> Option<bool> {
        let Some(v) = self.vals.iter().position(|x| x.is_none()) else {
            return Some(true);
        };
        for x in 0..self.a.order {
            self.nodes += 1;
            if self.nodes > self.limit {
                return None;
            }
            let mut trail = vec![v];
            self.vals[v] = Some(x);
            if self.propagate(self.by_var[v].clone(), &mut trail) {
                match self.search() {
                    Some(false) => {}
                    other => return other,
                }
            }
            for t in trail {
                self.vals[t] = None;
            }
        }
        Some(false)
    }
}

/// A cocycle on a hypercover of `W̄G`: `W̄G <- U -> K(A,n)`.
#[derive(Clone, Debug)]
pub struct CocycleSpan {
    pub g: FinGroup,
    pub a: FinGroup,
    pub n: usize,
    /// `f : U -> W̄G`.
    pub cover: SMap,
    /// `φ : U -> K(A,n)`.
    pub phi: SMap,
}

impl CocycleSpan {
    pub fn source(&self) -> &Arc<SSet> {
        self.cover.source()
    }

    pub fn dim(&self) -> usize {
        self.cover.dim()
    }

    /// Checks the shape of the span and classifies the cover as a
    /// hypercover, rejecting it on a failure.
    pub fn check(&self) -> Result<Verdict> {
        let d = self.dim();
        if self.phi.source() != self.cover.source() {
            return Err(Error::Shape("cover and cocycle have different sources".into()));
        }
        if **self.cover.target() != *classifying_space(&self.g, d)? {
            return Err(Error::Shape("cover does not land in W̄G".into()));
        }
        if **self.phi.target() != **em_space(&self.a, self.n, d)?.sset() {
            return Err(Error::Shape("cocycle does not land in K(A,n)".into()));
        }
        match classify(&self.cover, Nat::Inf, Kind::Hypercover)? {
            Verdict::Fail(w) => Err(Error::Rejected {
                reason: "cover is not a hypercover".into(),
                witness: Box::new(w),
            }),
            v => Ok(v),
        }
    }

    /// The `A`-valued cochain on `U_n` read off from `φ`; level `n` of
    /// `K(A,n)` is `A` with matching ids.
    pub fn values(&self) -> Vec<usize> {
        self.phi.component(self.n).to_vec()
    }

    /// The span precomposed with a refinement `r : U' -> U`.
    pub fn refine(&self, r: &SMap) -> Result<CocycleSpan> {
        Ok(CocycleSpan {
            cover: r.then(&self.cover)?,
            phi: r.then(&self.phi)?,
            ..self.clone()
        })
    }

    pub fn truncate(&self, d: usize) -> Result<CocycleSpan> {
        Ok(CocycleSpan {
            cover: self.cover.truncate(d)?,
            phi: self.phi.truncate(d)?,
            ..self.clone()
        })
    }
}

/// `φ_c : W̄G -> K(A,n)` for a group cocycle, as a span over `id_{W̄G}`.
pub fn group_cocycle_as_span(c: &GroupCocycle, d: usize) -> Result<CocycleSpan> {
    if let Some(t) = c.normalization_failure().or_else(|| c.cocycle_failure()) {
        return Err(Error::Invalid(format!("not a normalized cocycle at {t:?}")));
    }
    let wb = classifying_space(&c.g, d)?;
    let k = em_space(&c.a, c.n, d)?;
    let comps = (0..=d)
        .map(|lv| {
            (0..wb.size(lv))
                .map(|w| {
                    let vals: Vec<usize> = k.subsets[lv].iter().map(|s| c.values[wb.restrict(lv, w, s)]).collect();
                    k.lookup(lv, &vals)
                        .ok_or_else(|| Error::Invariant(format!("image of {w} at level {lv} is not a cocycle")))
                })
                .collect::<Result<Vec<usize>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let phi = SMap::new(wb.clone(), k.sset().clone(), comps)?;
    phi.ensure_simplicial()?;
    Ok(CocycleSpan {
        g: c.g.clone(),
        a: c.a.clone(),
        n: c.n,
        cover: SMap::identity(wb),
        phi,
    })
}

/// Outcome of comparing two cocycle spans.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Equivalence {
    /// `φ_1 p_1 - φ_2 p_2 = δb` on the common refinement; `b` is recorded.
    Equivalent(Vec<usize>),
    NotEquivalent,
    Inconclusive(String),
}

#[derive(Clone, Debug)]
pub struct EquivalenceReport {
    pub verdict: Equivalence,
    /// `V = U^1 ×_{W̄G} U^2` with its two legs, truncated at `n`, when built.
    pub refinement: Option<(SMap, SMap)>,
    /// Whether the legs classify as hypercovers.
    pub legs: Vec<Verdict>,
}

/// Default bound on the common refinement, as a multiple of `|W̄_k G|`.
pub const REFINEMENT_FACTOR: usize = 3;

/// Compares two spans on the fiber product of their covers. The legs of the
/// fiber product are hypercovers, hence weak equivalences, so the spans are
/// equivalent exactly when the difference of the pulled back cocycles is a
/// normalized coboundary there. Fiber products larger than
/// [`REFINEMENT_FACTOR`] times `W̄G` on some level are not built.
pub fn equivalence_of_cocycles(s1: &CocycleSpan, s2: &CocycleSpan, node_limit: u64) -> Result<EquivalenceReport> {
    equivalence_within(s1, s2, REFINEMENT_FACTOR, node_limit)
}

/// [`equivalence_of_cocycles`] with the refinement bound `factor·|W̄_k G|`.
pub fn equivalence_within(s1: &CocycleSpan, s2: &CocycleSpan, factor: usize, node_limit: u64) -> Result<EquivalenceReport> {
    if s1.g != s2.g || s1.a != s2.a || s1.n != s2.n {
        return Err(Error::Shape("spans of different type".into()));
    }
    let n = s1.n;
    let (c1, c2) = (s1.cover.truncate(n)?, s2.cover.truncate(n)?);
    let base = c1.target().clone();
    for k in 0..=n {
        let mut over = vec![(0usize, 0usize); base.size(k)];
        for &y in c1.component(k) {
            over[y].0 += 1;
        }
        for &y in c2.component(k) {
            over[y].1 += 1;
        }
        let size: usize = over.iter().map(|&(p, q)| p * q).sum();
        if size > factor * base.size(k) {
            return Ok(EquivalenceReport {
                verdict: Equivalence::Inconclusive(format!(
                    "refinement has {size} simplices at level {k}, over {factor} times the base"
                )),
                refinement: None,
                legs: Vec::new(),
            });
        }
    }
    let (v, p1, p2) = pullback(&c1, &c2)?;
    let legs = vec![
        classify(&p1, Nat::Inf, Kind::Hypercover)?,
        classify(&p2, Nat::Inf, Kind::Hypercover)?,
    ];
    let a = &s1.a;
    let diff: Vec<usize> = (0..v.size(n))
        .map(|x| a.m(s1.phi.apply(n, p1.apply(n, x)), a.inv[s2.phi.apply(n, p2.apply(n, x))]))
        .collect();
    let verdict = match solve_coboundary(&v, a, n, &diff, node_limit)? {
        CoboundarySearch::Found(b) => Equivalence::Equivalent(b),
        CoboundarySearch::NotCoboundary => Equivalence::NotEquivalent,
        CoboundarySearch::Inconclusive => Equivalence::Inconclusive("node limit reached".into()),
    };
    Ok(EquivalenceReport {
        verdict,
        refinement: Some((p1, p2)),
        legs,
    })
}

/// A span factored through the n-strictification of its cover.
#[derive(Clone, Debug)]
pub struct StrictCocycle {
    pub strict: Strictification,
    /// `W̄G <- τ_n(U,f) -> K(A,n)`.
    pub span: CocycleSpan,
    /// Whether `U -> τ_n(U,f)` classifies as a hypercover.
    pub comparison_hypercover: Verdict,
}

/// Factors `φ` through `U -> τ_n(U,f)`, failing if the factorization
/// depends on the chosen lifts.
pub fn strictify_cocycle(s: &CocycleSpan) -> Result<StrictCocycle> {
    let n = s.n;
    let st = strictify(&s.cover, n)?;
    let t = st.strict().clone();
    let phi = s.phi.truncate(n + 2)?;
    let mut comps = Vec::with_capacity(n + 3);
    for k in 0..=n + 2 {
        let mut table = vec![usize::MAX; t.size(k)];
        for x in 0..phi.source().size(k) {
            let slot = &mut table[st.comparison.apply(k, x)];
            let v = phi.apply(k, x);
            if *slot != usize::MAX && *slot != v {
                return Err(Error::Invariant(format!("cocycle does not factor at level {k}: simplex {x}")));
            }
            *slot = v;
        }
        if let Some(y) = table.iter().position(|&v| v == usize::MAX) {
            return Err(Error::Invariant(format!("simplex {y} of τ_{n} at level {k} has no lift")));
        }
        comps.push(table);
    }
    let phi_t = SMap::new(t, phi.target().clone(), comps)?;
    phi_t.ensure_simplicial()?;
    let comparison_hypercover = classify(&st.comparison, Nat::Inf, Kind::Hypercover)?;
    Ok(StrictCocycle {
        span: CocycleSpan {
            g: s.g.clone(),
            a: s.a.clone(),
            n,
            cover: st.assembled.clone(),
            phi: phi_t,
        },
        strict: st,
        comparison_hypercover,
    })
}

/// The first element of `G` whose row in `act` is not an automorphism of
/// `A`, or a pair violating `act(gh) = act(g) act(h)`.
pub fn automorphism_failure(g: &FinGroup, a: &FinGroup, act: &[Vec<usize>]) -> Option<String> {
    if act.len() != g.order || act.iter().any(|r| r.len() != a.order || r.iter().any(|&v| v >= a.order)) {
        return Some("action table has the wrong shape".into());
    }
    for (x, row) in act.iter().enumerate() {
        let mut seen = vec![false; a.order];
        for &v in row {
            seen[v] = true;
        }
        if seen.contains(&false) {
            return Some(format!("element {x} does not act bijectively"));
        }
        for p in 0..a.order {
            for q in 0..a.order {
                if row[a.m(p, q)] != a.m(row[p], row[q]) {
                    return Some(format!("element {x} does not act additively"));
                }
            }
        }
    }
    for x in 0..g.order {
        for y in 0..g.order {
            if (0..a.order).any(|p| act[g.m(x, y)][p] != act[x][act[y][p]]) {
                return Some(format!("act({x}·{y}) differs from act({x})∘act({y})"));
            }
        }
    }
    if (0..a.order).any(|p| act[g.e][p] != p) {
        return Some("identity acts nontrivially".into());
    }
    None
}

fn pointwise_action(em: &EMSpace, g: &Arc<SimplicialGroup>, act: &[Vec<usize>]) -> Result<GroupAction> {
    let table = (0..=em.dim())
        .map(|k| {
            let nk = em.sset().size(k);
            (0..g.sset.size(k) * nk)
                .map(|c| {
                    let vals: Vec<usize> = em.cochains[k][c % nk].iter().map(|&v| act[c / nk][v]).collect();
                    em.lookup(k, &vals).ok_or_else(|| Error::Invariant("action leaves the cocycles".into()))
                })
                .collect::<Result<Vec<usize>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    GroupAction::new(g.clone(), em.sset().clone(), table, Side::Left)
}

/// The twisted universal bundle: the homotopy quotient of
/// `W K(A,n-1) -> K(A,n)` by `G` acting on `A`.
#[derive(Clone, Debug)]
pub struct TwistedBundle {
    pub total: HomotopyQuotient,
    /// `K^G(A,n) = W̄G ×_G K(A,n)`.
    pub base: HomotopyQuotient,
    pub map: SMap,
    /// The bundle as a twisted product with fiber `K(A,n-1)`.
    pub presentation: TwistedProduct,
}

pub fn twisted_universal_bundle(g: &FinGroup, a: &FinGroup, n: usize, act: &[Vec<usize>], d: usize) -> Result<TwistedBundle> {
    if n == 0 {
        return Err(Error::Invalid("the universal bundle needs n ≥ 1".into()));
    }
    if let Some(msg) = automorphism_failure(g, a, act) {
        return Err(Error::Invalid(msg));
    }
    let k1 = em_space(a, n - 1, d)?;
    let w = w_total(&k1.group, d)?;
    let iso = wbar_em_iso(&k1, d)?;
    let kn = &iso.target;
    let gc = Arc::new(SimplicialGroup::constant(g, d));

    let on_kn = pointwise_action(kn, &gc, act)?;
    let on_k1 = pointwise_action(&k1, &gc, act)?;
    let w_act = (0..=d)
        .map(|k| {
            let nw = w.sset.size(k);
            (0..g.order * nw)
                .map(|c| {
                    let t: Vec<usize> = w
                        .decode(k, c % nw)
                        .iter()
                        .enumerate()
                        .map(|(j, &x)| on_k1.apply(j, c / nw, x))
                        .collect();
                    w.encode(k, &t)
                })
                .collect()
        })
        .collect();
    let on_w = GroupAction::new(gc.clone(), w.sset.clone(), w_act, Side::Left)?;
    let proj = (0..=d)
        .map(|k| {
            (0..w.sset.size(k))
                .map(|x| {
                    let t = w.decode(k, x);
                    iso.map.apply(k, iso.wbar.encode(k, &t[..k]))
                })
                .collect()
        })
        .collect();
    let f = SMap::new(w.sset.clone(), kn.sset().clone(), proj)?;
    let (total, base, map) = equivariant_quotient_map(&on_w, &on_kn, &f, d)?;
    let phi = (0..=d)
        .map(|k| {
            (0..total.sset.size(k))
                .map(|id| {
                    let (_, x) = total.decode(k, id);
                    (map.apply(k, id), w.decode(k, x)[k])
                })
                .collect()
        })
        .collect();
    let presentation = TwistedProduct::from_identification(map.clone(), k1.sset().clone(), phi)?;
    Ok(TwistedBundle {
        total,
        base,
        map,
        presentation,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{level_one_hypercover, relative_cech};
    use crate::kan::classify_object;
    use crate::sset::product;

    fn z(n: usize) -> FinGroup {
        FinGroup::cyclic(n)
    }

    fn abc() -> GroupCocycle {
        GroupCocycle::from_fn(&z(2), &z(2), 3, |t| t[0] * t[1] * t[2]).unwrap()
    }

    /// Independent count: all functions on the `(n+1)`-subsets of `[k]`
    /// with vanishing alternating face sums, by full enumeration.
    fn brute_cocycle_count(m: usize, n: usize, k: usize) -> usize {
        let subs = subsets(k, n + 1);
        let tops = subsets(k, n + 2);
        let a = z(m);
        (0..m.pow(subs.len() as u32))
            .filter(|&code| {
                let vals = decode_tuple(m, subs.len(), code);
                tops.iter().all(|t| {
                    let faces = (0..t.len()).map(|i| {
                        let mut f = t.clone();
                        f.remove(i);
                        vals[subs.iter().position(|s| *s == f).unwrap()]
                    });
                    alternating_sum(&a, faces) == a.e
                })
            })
            .count()
    }

    #[test]
    fn em_space_sizes_match_enumeration() {
        assert_eq!(em_space(&z(2), 1, 4).unwrap().sset().sizes(), &[1, 2, 4, 8, 16]);
        assert_eq!(em_space(&z(2), 2, 4).unwrap().sset().sizes(), &[1, 1, 2, 8, 64]);
        assert_eq!(em_space(&z(2), 3, 4).unwrap().sset().sizes(), &[1, 1, 1, 2, 16]);
        for (m, n) in [(2, 1), (2, 2), (3, 1), (3, 2), (2, 3)] {
            let k = em_space(&z(m), n, 4).unwrap();
            let brute: Vec<usize> = (0..=4).map(|lv| brute_cocycle_count(m, n, lv)).collect();
            assert_eq!(k.sset().sizes(), brute.as_slice(), "K(Z/{m},{n})");
            assert!(k.sset().validate().is_empty());
            assert!((0..n.min(5)).all(|lv| k.sset().size(lv) == 1));
        }
    }

    #[test]
    fn k_a_1_is_the_nerve() {
        for m in [2, 3] {
            let k = em_space(&z(m), 1, 4).unwrap();
            let nv = SimplicialGroup::nerve_of_abelian(&z(m), 4).unwrap();
            let comps = (0..=4)
                .map(|lv| {
                    (0..k.sset().size(lv))
                        .map(|x| {
                            let spine: Vec<usize> = (0..lv).map(|i| k.value(lv, x, &[i, i + 1])).collect();
                            encode_tuple(m, &spine)
                        })
                        .collect()
                })
                .collect();
            let f = SMap::new(k.sset().clone(), nv.sset.clone(), comps).unwrap();
            assert!(f.check().is_empty());
            assert!(f.is_levelwise_bijective());
        }
    }

    #[test]
    fn em_space_is_an_n_plus_one_groupoid() {
        let k = em_space(&z(2), 2, 4).unwrap();
        assert!(classify_object(k.sset(), Nat::Fin(3)).unwrap().is_pass());
        let k = em_space(&z(3), 1, 3).unwrap();
        assert!(classify_object(k.sset(), Nat::Fin(2)).unwrap().is_pass());
    }

    #[test]
    fn wbar_of_em_space_is_the_next_one() {
        for (m, d) in [(2, 4), (3, 3)] {
            let k = em_space(&z(m), 1, d).unwrap();
            let iso = wbar_em_iso(&k, d).unwrap();
            assert_eq!(iso.wbar.sset.sizes(), em_space(&z(m), 2, d).unwrap().sset().sizes());
            assert!(iso.is_bijective());
            assert_eq!(iso.homomorphism_failure(), None);
        }
        let k0 = em_space(&z(3), 0, 3).unwrap();
        let iso = wbar_em_iso(&k0, 3).unwrap();
        assert!(iso.is_bijective());
        assert_eq!(iso.target.sset().sizes(), &[1, 3, 9, 27]);
    }

    #[test]
    fn bit_product_is_a_nontrivial_cocycle() {
        let c = abc();
        // A normalized coboundary vanishes on (1,1,1): the faces of that
        // simplex are (1,1), (0,1), (1,0), (1,1) with signs +,-,+,-.
        assert_eq!(c.at(&[1, 1, 1]), 1);
        assert_eq!(c.is_coboundary(1 << 16).unwrap(), CoboundarySearch::NotCoboundary);
        assert!(matches!(GroupCocycle::zero(&z(2), &z(2), 3).is_coboundary(10).unwrap(), CoboundarySearch::Found(_)));
    }

    #[test]
    fn cocycle_validation_reports_the_tuple() {
        let bad = GroupCocycle::from_fn(&z(2), &z(2), 2, |t| t[0]);
        assert!(bad.is_err());
        let e = GroupCocycle::from_fn(&z(2), &z(2), 3, |t| t[0] * t[1] * (1 - t[2]));
        assert!(format!("{}", e.unwrap_err()).contains('['));
    }

    #[test]
    fn coboundaries_are_found() {
        let g = z(4);
        let a = z(2);
        let b: Vec<usize> = (0..16)
            .map(|id| {
                let t = decode_tuple(4, 2, id);
                usize::from(t[0] != 0 && t[1] != 0 && (t[0] + t[1]) % 2 == 1)
            })
            .collect();
        let db = GroupCocycle::new(g.clone(), a.clone(), 3, coboundary(&g, &a, 2, &b)).unwrap();
        match db.is_coboundary(1 << 20).unwrap() {
            CoboundarySearch::Found(w) => assert_eq!(coboundary(&g, &a, 2, &w), db.values),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn span_of_group_cocycle_is_valid() {
        let s = group_cocycle_as_span(&abc(), 4).unwrap();
        assert!(s.check().unwrap().is_pass());
        assert_eq!(s.values(), abc().values);
        let zero = group_cocycle_as_span(&GroupCocycle::zero(&z(2), &z(2), 3), 4).unwrap();
        let k = em_space(&z(2), 3, 4).unwrap();
        for lv in 0..=4 {
            assert!(zero.phi.component(lv).iter().all(|&x| x == k.group.e(lv)));
        }
    }

    #[test]
    fn refined_span_is_valid() {
        let s = group_cocycle_as_span(&abc(), 4).unwrap();
        let r = relative_cech(s.cover.target(), &[0, 0]).unwrap();
        let sr = s.refine(&r).unwrap();
        assert!(!sr.check().unwrap().is_fail());
        assert!(classify(&sr.cover, Nat::Inf, Kind::Hypercover).unwrap().is_pass());
    }

    #[test]
    fn equivalence_of_spans() {
        let c = abc();
        let s = group_cocycle_as_span(&c, 4).unwrap();
        let same = equivalence_of_cocycles(&s, &s, 1 << 16).unwrap();
        assert!(matches!(same.verdict, Equivalence::Equivalent(_)));

        let (g, a) = (z(2), z(2));
        let b: Vec<usize> = vec![0, 0, 0, 1];
        let db = GroupCocycle::new(g.clone(), a.clone(), 3, coboundary(&g, &a, 2, &b)).unwrap();
        let shifted = group_cocycle_as_span(&c.add(&db).unwrap(), 4).unwrap();
        assert!(matches!(equivalence_of_cocycles(&s, &shifted, 1 << 16).unwrap().verdict, Equivalence::Equivalent(_)));

        let zero = group_cocycle_as_span(&GroupCocycle::zero(&g, &a, 3), 4).unwrap();
        let rep = equivalence_of_cocycles(&s, &zero, 1 << 16).unwrap();
        assert_eq!(rep.verdict, Equivalence::NotEquivalent);
        assert!(rep.legs.iter().all(|v| !v.is_fail()));

        let r = level_one_hypercover(s.cover.target(), 1, 1, 1).unwrap();
        let refined = s.refine(&r).unwrap();
        let rep = equivalence_of_cocycles(&refined, &s, 1 << 16).unwrap();
        assert!(matches!(rep.verdict, Equivalence::Inconclusive(_)));
        let rep = equivalence_within(&refined, &s, 16, 1 << 16).unwrap();
        assert!(matches!(rep.verdict, Equivalence::Equivalent(_)), "{:?}", rep.verdict);
        let rep = equivalence_within(&refined, &zero, 16, 1 << 16).unwrap();
        assert_eq!(rep.verdict, Equivalence::NotEquivalent);
    }

    #[test]
    fn strictifying_an_identity_span_changes_nothing() {
        let s = group_cocycle_as_span(&abc(), 5).unwrap();
        let st = strictify_cocycle(&s).unwrap();
        assert!(st.strict.comparison.is_levelwise_bijective());
        assert_eq!(st.span.values(), s.values());
        assert!(st.comparison_hypercover.is_pass());
    }

    #[test]
    fn strictifying_a_refined_span_returns_to_the_base() {
        let s = group_cocycle_as_span(&abc(), 5).unwrap();
        let r = relative_cech(s.cover.target(), &[0, 0]).unwrap();
        let st = strictify_cocycle(&s.refine(&r).unwrap()).unwrap();
        assert!(st.comparison_hypercover.is_pass());
        assert!(classify(&st.span.cover, Nat::Fin(3), Kind::Hypercover).unwrap().is_pass());
        let again = strictify_cocycle(&st.span).unwrap();
        assert!(again.strict.comparison.is_levelwise_bijective());
    }

    #[test]
    fn trivial_action_gives_the_product_base() {
        let g = z(2);
        let a = z(2);
        let act = vec![vec![0, 1], vec![0, 1]];
        let tb = twisted_universal_bundle(&g, &a, 2, &act, 3).unwrap();
        assert!(tb.presentation.check().is_empty());
        let wb = classifying_space(&g, 3).unwrap();
        let k2 = em_space(&a, 2, 3).unwrap();
        let (prod, _, _) = product(&wb, k2.sset()).unwrap();
        assert_eq!(tb.base.sset.sizes(), prod.sizes());
        for k in 1..=3 {
            for i in 0..=k {
                assert_eq!(tb.base.sset.face_table(k, i), prod.face_table(k, i));
            }
        }
    }

    #[test]
    fn inversion_twisted_bundle() {
        let g = z(2);
        let a = z(3);
        let act = vec![vec![0, 1, 2], vec![0, 2, 1]];
        let tb = twisted_universal_bundle(&g, &a, 2, &act, 3).unwrap();
        assert!(tb.presentation.check().is_empty());
        assert_eq!(tb.presentation.fiber.sizes(), em_space(&a, 1, 3).unwrap().sset().sizes());
        assert!(tb.map.check().is_empty());
        let bad = vec![vec![0, 1, 2], vec![0, 0, 0]];
        assert!(twisted_universal_bundle(&g, &a, 2, &bad, 3).is_err());
    }
}
