//! Simplicial groups: Moore's horn filling, strict n-groups, the universal
//! bundle `W G -> W̄ G`, group actions and homotopy quotients.

use std::collections::HashSet;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{check_budget, Error, Result};
use crate::group::{nerve, FinGroup, Groupoid};
use crate::kan::{abs_horn, classify_object, Nat, RelHorn, Verdict};
use crate::sset::{pullback, SMap, SSet};

/// A simplicial set with a group structure on every level for which all
/// faces and degeneracies are homomorphisms.
#[derive(Clone, Debug)]
pub struct SimplicialGroup {
    pub sset: Arc<SSet>,
    pub groups: Vec<FinGroup>,
}

impl SimplicialGroup {
    /// Checks sizes and the homomorphism property exhaustively.
    pub fn new(sset: Arc<SSet>, groups: Vec<FinGroup>) -> Result<SimplicialGroup> {
        if groups.len() != sset.dim() + 1 || groups.iter().enumerate().any(|(k, g)| g.order != sset.size(k)) {
            return Err(Error::Shape("one group per level, of the level's size".into()));
        }
        let g = SimplicialGroup { sset, groups };
        if let Some(msg) = g.homomorphism_failures().into_iter().next() {
            return Err(Error::Invalid(msg));
        }
        Ok(g)
    }

    /// The constant simplicial group on `g`.
    pub fn constant(g: &FinGroup, d: usize) -> SimplicialGroup {
        SimplicialGroup {
            sset: Arc::new(SSet::constant(g.order, d)),
            groups: vec![g.clone(); d + 1],
        }
    }

    /// The nerve of an abelian group with levelwise multiplication, `K(A,1)`.
    pub fn nerve_of_abelian(a: &FinGroup, d: usize) -> Result<SimplicialGroup> {
        if !a.abelian {
            return Err(Error::Invalid("the nerve is a simplicial group only for abelian groups".into()));
        }
        let x = nerve(&Groupoid::from_group(a), d)?;
        let groups = (0..=d).map(|k| FinGroup::power(a, k)).collect();
        SimplicialGroup::new(Arc::new(x), groups)
    }

    pub fn dim(&self) -> usize {
        self.sset.dim()
    }

    #[inline]
    pub fn mul(&self, k: usize, a: usize, b: usize) -> usize {
        self.groups[k].mul[a][b]
    }

    #[inline]
    pub fn inv(&self, k: usize, a: usize) -> usize {
        self.groups[k].inv[a]
    }

    #[inline]
    pub fn e(&self, k: usize) -> usize {
        self.groups[k].e
    }

    pub fn truncate(&self, d: usize) -> Result<SimplicialGroup> {
        Ok(SimplicialGroup {
            sset: Arc::new(self.sset.truncate(d)?),
            groups: self.groups[..=d].to_vec(),
        })
    }

    /// Every face or degeneracy that fails to be a homomorphism.
    pub fn homomorphism_failures(&self) -> Vec<String> {
        let x = &self.sset;
        let mut out = Vec::new();
        for k in 0..=self.dim() {
            let n = x.size(k);
            if k > 0 {
                for i in 0..=k {
                    if let Some((a, b)) = first_pair(n, |a, b| {
                        x.face(k, i, self.mul(k, a, b)) != self.mul(k - 1, x.face(k, i, a), x.face(k, i, b))
                    }) {
                        out.push(format!("d_{i} on level {k} fails at ({a},{b})"));
                    }
                }
            }
            if k < self.dim() {
                for i in 0..=k {
                    if let Some((a, b)) = first_pair(n, |a, b| {
                        x.degen(k, i, self.mul(k, a, b)) != self.mul(k + 1, x.degen(k, i, a), x.degen(k, i, b))
                    }) {
                        out.push(format!("s_{i} on level {k} fails at ({a},{b})"));
                    }
                }
            }
        }
        out
    }
}

fn first_pair(n: usize, bad: impl Fn(usize, usize) -> bool) -> Option<(usize, usize)> {
    (0..n).flat_map(|a| (0..n).map(move |b| (a, b))).find(|&(a, b)| bad(a, b))
}

/// Fills the horn `faces` (with `None` at position `i`) of `G_k` by Moore's
/// induction from `seed` (the identity by default).
pub fn moore_fill(g: &SimplicialGroup, k: usize, i: usize, faces: &[Option<usize>], seed: Option<usize>) -> Result<usize> {
    let x = &g.sset;
    if k == 0 || i > k || faces.len() != k + 1 || k > g.dim() {
        return Err(Error::Invalid(format!("no horn Λ^{k}_{i} here")));
    }
    if faces[i].is_some() || faces.iter().enumerate().any(|(j, f)| j != i && f.is_none()) {
        return Err(Error::Invalid("exactly the face at the horn index must be absent".into()));
    }
    let h = |j: usize| faces[j].expect("present face");
    if faces.iter().enumerate().any(|(j, f)| j != i && f.is_some_and(|v| v >= x.size(k - 1))) {
        return Err(Error::Invalid("face out of range".into()));
    }
    for m in 0..=k {
        for j in 0..m {
            if j != i && m != i && k >= 2 && x.face(k - 1, m - 1, h(j)) != x.face(k - 1, j, h(m)) {
                return Err(Error::Invalid(format!("incompatible horn at faces {j} and {m}")));
            }
        }
    }
    let mut cur = seed.unwrap_or(g.e(k));
    let correct = |cur: usize, l: usize, s: usize| -> usize {
        let a = g.mul(k - 1, h(l), g.inv(k - 1, x.face(k, l, cur)));
        g.mul(k, x.degen(k - 1, s, a), cur)
    };
    for l in 0..i {
        cur = correct(cur, l, l);
    }
    for l in (i + 1..=k).rev() {
        cur = correct(cur, l, l - 1);
    }
    if let Some(j) = (0..=k).find(|&j| j != i && x.face(k, j, cur) != h(j)) {
        return Err(Error::Invariant(format!("Moore filler misses face {j}")));
    }
    Ok(cur)
}

/// Strict n-group test: `λ^k_i(G)` bijective for `k ≥ n`. A pass also
/// requires the underlying object to classify as an (n-1)-groupoid.
pub fn classify_strict(g: &SimplicialGroup, n: usize) -> Result<Verdict> {
    if n == 0 {
        return Err(Error::Invalid("strict n-groups need n ≥ 1".into()));
    }
    let d = g.dim();
    for k in n..=d {
        for i in 0..=k {
            if let Some(w) = abs_horn(&g.sset, k, i)?.witness(true) {
                return Ok(Verdict::Fail(w));
            }
        }
    }
    let v = match g.sset.coskeletal_above() {
        Some(c) if c < d => Verdict::Pass,
        _ => Verdict::Inconclusive(format!("levels above {d} are not determined")),
    };
    if v.is_pass() {
        if let Verdict::Fail(w) = classify_object(&g.sset, Nat::Fin(n - 1))? {
            return Err(Error::Invariant(format!(
                "strict {n}-group whose underlying object fails as an {}-groupoid at Λ^{}",
                n - 1,
                w.k
            )));
        }
    }
    Ok(v)
}

/// A simplicial set whose level `k` is a product of finite sets, with ids
/// in mixed radix, first coordinate most significant.
#[derive(Clone, Debug)]
pub struct ProductLevels {
    pub sset: Arc<SSet>,
    radices: Vec<Vec<usize>>,
}

impl ProductLevels {
    pub fn decode(&self, k: usize, mut id: usize) -> Vec<usize> {
        let r = &self.radices[k];
        let mut out = vec![0; r.len()];
        for p in (0..r.len()).rev() {
            out[p] = id % r[p];
            id /= r[p];
        }
        out
    }

    pub fn encode(&self, k: usize, t: &[usize]) -> usize {
        encode(&self.radices[k], t)
    }
}

fn encode(r: &[usize], t: &[usize]) -> usize {
    r.iter().zip(t).fold(0, |acc, (&m, &v)| acc * m + v)
}

fn build_product(
    radices: Vec<Vec<usize>>,
    face: impl Fn(usize, usize, &[usize]) -> Vec<usize>,
    degen: impl Fn(usize, usize, &[usize]) -> Vec<usize>,
    flag: Option<usize>,
) -> Result<ProductLevels> {
    let d = radices.len() - 1;
    let sizes: Vec<usize> = radices.iter().map(|r| r.iter().product()).collect();
    for (k, &s) in sizes.iter().enumerate() {
        check_budget(k, s)?;
    }
    let pl = ProductLevels {
        sset: Arc::new(SSet::terminal(0)),
        radices,
    };
    let tuples: Vec<Vec<Vec<usize>>> = (0..=d).map(|k| (0..sizes[k]).map(|id| pl.decode(k, id)).collect()).collect();
    let faces = (0..=d)
        .map(|k| {
            if k == 0 {
                return Vec::new();
            }
            (0..=k)
                .map(|i| tuples[k].iter().map(|t| pl.encode(k - 1, &face(k, i, t))).collect())
                .collect()
        })
        .collect();
    let degens = (0..=d)
        .map(|k| {
            if k == d {
                return Vec::new();
            }
            (0..=k)
                .map(|i| tuples[k].iter().map(|t| pl.encode(k + 1, &degen(k, i, t))).collect())
                .collect()
        })
        .collect();
    let x = SSet::from_tables(sizes, faces, degens, None)?.with_coskeletal_above(flag.filter(|&c| c <= d));
    Ok(ProductLevels {
        sset: Arc::new(x),
        radices: pl.radices,
    })
}

/// `d_i` on `(g_0, ..., g_{m-1})` with `g_j ∈ G_j`; for `i = m` the last
/// coordinate is dropped.
fn bar_face(g: &SimplicialGroup, i: usize, t: &[usize]) -> Vec<usize> {
    let x = &g.sset;
    let m = t.len();
    if i == 0 {
        return (1..m).map(|j| x.face(j, 0, t[j])).collect();
    }
    let mut out = t[..i - 1].to_vec();
    if i < m {
        out.push(g.mul(i - 1, t[i - 1], x.face(i, i, t[i])));
        out.extend((i + 1..m).map(|j| x.face(j, i, t[j])));
    }
    out
}

/// `s_i` on `(g_0, ..., g_{m-1})`: insert the identity at `i`.
fn bar_degen(g: &SimplicialGroup, i: usize, t: &[usize]) -> Vec<usize> {
    let mut out = t[..i].to_vec();
    out.push(g.e(i));
    out.extend((i..t.len()).map(|j| g.sset.degen(j, i, t[j])));
    out
}

/// `W̄G` truncated at `d`: `W̄_0 = ∗`, `W̄_n = G_0 × ... × G_{n-1}`.
pub fn w_bar(g: &SimplicialGroup, d: usize) -> Result<ProductLevels> {
    if d > 0 && g.dim() < d - 1 {
        return Err(Error::Truncation(format!("W̄ to level {d} needs the group to level {}", d - 1)));
    }
    let radices = (0..=d).map(|n| (0..n).map(|j| g.groups[j].order).collect()).collect();
    let flag = g.sset.coskeletal_above().map(|c| c + 1);
    build_product(radices, |_, i, t| bar_face(g, i, t), |_, i, t| bar_degen(g, i, t), flag)
}

/// `WG` truncated at `d`: `W_n = G_0 × ... × G_n`.
pub fn w_total(g: &SimplicialGroup, d: usize) -> Result<ProductLevels> {
    if g.dim() < d {
        return Err(Error::Truncation(format!("W to level {d} needs the group to level {d}")));
    }
    let radices = (0..=d).map(|n| (0..=n).map(|j| g.groups[j].order).collect()).collect();
    let flag = g.sset.coskeletal_above().map(|c| c + 1);
    build_product(radices, |_, i, t| bar_face(g, i, t), |_, i, t| bar_degen(g, i, t), flag)
}

/// A map `p : E -> X` with levelwise identifications `E_k ≅ X_k × Y_k` that
/// respect every face below the top and every degeneracy.
#[derive(Clone, Debug)]
pub struct TwistedProduct {
    pub base: Arc<SSet>,
    pub fiber: Arc<SSet>,
    pub projection: SMap,
    /// `phi[k][e] = (x, y)`.
    pub phi: Vec<Vec<(usize, usize)>>,
    /// `top_face[k][x * |Y_k| + y]` is the fiber part of `d_k`.
    pub top_face: Vec<Vec<usize>>,
}

impl TwistedProduct {
    pub fn total(&self) -> &Arc<SSet> {
        self.projection.source()
    }

    /// Reads the top-face table off the total space through `phi`.
    pub fn from_identification(projection: SMap, fiber: Arc<SSet>, phi: Vec<Vec<(usize, usize)>>) -> Result<TwistedProduct> {
        let e = projection.source().clone();
        if phi.len() != e.dim() + 1 || fiber.dim() < e.dim() {
            return Err(Error::Shape("identification does not cover every level".into()));
        }
        let mut top_face = vec![Vec::new()];
        for k in 1..=e.dim() {
            let ny = fiber.size(k);
            let mut t = vec![usize::MAX; projection.target().size(k) * ny];
            for s in 0..e.size(k) {
                let (a, b) = phi[k][s];
                let v = phi[k - 1][e.face(k, k, s)].1;
                let slot = &mut t[a * ny + b];
                if *slot != usize::MAX && *slot != v {
                    return Err(Error::Invalid(format!("identification at level {k} is not injective")));
                }
                *slot = v;
            }
            if t.contains(&usize::MAX) {
                return Err(Error::Invalid(format!("identification at level {k} is not onto")));
            }
            top_face.push(t);
        }
        Ok(TwistedProduct {
            base: projection.target().clone(),
            fiber,
            projection,
            phi,
            top_face,
        })
    }

    /// Every violated condition, as text.
    pub fn check(&self) -> Vec<String> {
        let (e, x, y) = (self.total(), &self.base, &self.fiber);
        let mut out = Vec::new();
        for k in 0..=e.dim() {
            let ph = &self.phi[k];
            let distinct: HashSet<&(usize, usize)> = ph.iter().collect();
            if distinct.len() != ph.len() || ph.len() != x.size(k) * y.size(k) {
                out.push(format!("phi_{k} is not a bijection"));
            }
            for s in 0..e.size(k) {
                let (a, b) = ph[s];
                if self.projection.apply(k, s) != a {
                    out.push(format!("projection disagrees with phi at level {k}"));
                }
                if k > 0 {
                    for i in 0..k {
                        if self.phi[k - 1][e.face(k, i, s)] != (x.face(k, i, a), y.face(k, i, b)) {
                            out.push(format!("d_{i} not a product face at level {k}"));
                        }
                    }
                    let top = self.phi[k - 1][e.face(k, k, s)];
                    if top != (x.face(k, k, a), self.top_face[k][a * y.size(k) + b]) {
                        out.push(format!("top face table wrong at level {k}"));
                    }
                }
                if k < e.dim() {
                    for i in 0..=k {
                        if self.phi[k + 1][e.degen(k, i, s)] != (x.degen(k, i, a), y.degen(k, i, b)) {
                            out.push(format!("s_{i} not a product degeneracy at level {k}"));
                        }
                    }
                }
            }
        }
        out.dedup();
        out
    }

    /// Pullback along `f : A -> X`, again a twisted product with fiber `Y`.
    pub fn pullback(&self, f: &SMap) -> Result<TwistedProduct> {
        let (pb, p1, p2) = pullback(f, &self.projection)?;
        let y = &self.fiber;
        let phi: Vec<Vec<(usize, usize)>> = (0..=pb.dim())
            .map(|k| (0..pb.size(k)).map(|z| (p1.apply(k, z), self.phi[k][p2.apply(k, z)].1)).collect())
            .collect();
        let mut top_face = vec![Vec::new()];
        for k in 1..=pb.dim() {
            let mut t = vec![usize::MAX; f.source().size(k) * y.size(k)];
            for z in 0..pb.size(k) {
                let (a, b) = phi[k][z];
                t[a * y.size(k) + b] = phi[k - 1][pb.face(k, k, z)].1;
            }
            if t.contains(&usize::MAX) {
                return Err(Error::Invariant("pulled back identification is not onto".into()));
            }
            top_face.push(t);
        }
        Ok(TwistedProduct {
            base: f.source().clone(),
            fiber: y.clone(),
            projection: p1,
            phi,
            top_face,
        })
    }
}

/// `WG -> W̄G` with fiber `G`, truncated at `d`.
pub fn universal_bundle(g: &SimplicialGroup, d: usize) -> Result<(ProductLevels, ProductLevels, TwistedProduct)> {
    let w = w_total(g, d)?;
    let wb = w_bar(g, d)?;
    let fiber = Arc::new(g.sset.truncate(d)?);
    let mut comps = Vec::new();
    let mut phi = Vec::new();
    let mut top_face = vec![Vec::new()];
    for k in 0..=d {
        let rows: Vec<(usize, usize)> = (0..w.sset.size(k))
            .map(|id| {
                let t = w.decode(k, id);
                (wb.encode(k, &t[..k]), t[k])
            })
            .collect();
        comps.push(rows.iter().map(|p| p.0).collect());
        phi.push(rows);
        if k > 0 {
            let n = fiber.size(k);
            top_face.push(
                (0..wb.sset.size(k) * n)
                    .map(|c| {
                        let mut t = wb.decode(k, c / n);
                        t.push(c % n);
                        *bar_face(g, k, &t).last().expect("nonempty")
                    })
                    .collect(),
            );
        }
    }
    let projection = SMap::new(w.sset.clone(), wb.sset.clone(), comps)?;
    let tp = TwistedProduct {
        base: wb.sset.clone(),
        fiber,
        projection,
        phi,
        top_face,
    };
    Ok((w, wb, tp))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
}

/// A levelwise action of a simplicial group on a simplicial set.
#[derive(Clone, Debug)]
pub struct GroupAction {
    pub group: Arc<SimplicialGroup>,
    pub space: Arc<SSet>,
    /// `act[k][g * |X_k| + x]`.
    pub act: Vec<Vec<usize>>,
    pub side: Side,
}

impl GroupAction {
    pub fn new(group: Arc<SimplicialGroup>, space: Arc<SSet>, act: Vec<Vec<usize>>, side: Side) -> Result<GroupAction> {
        if group.dim() < space.dim() || act.len() != space.dim() + 1 {
            return Err(Error::Shape("action needs the group on every level of the space".into()));
        }
        let a = GroupAction { group, space, act, side };
        if let Some(msg) = a.law_failures().into_iter().next() {
            return Err(Error::Invalid(msg));
        }
        Ok(a)
    }

    pub fn trivial(group: Arc<SimplicialGroup>, space: Arc<SSet>) -> Result<GroupAction> {
        let act = (0..=space.dim())
            .map(|k| (0..group.sset.size(k) * space.size(k)).map(|c| c % space.size(k)).collect())
            .collect();
        GroupAction::new(group, space, act, Side::Left)
    }

    /// `G` acting on itself by left multiplication.
    pub fn left_translation(group: Arc<SimplicialGroup>) -> Result<GroupAction> {
        let space = group.sset.clone();
        let act = (0..=space.dim())
            .map(|k| {
                let n = space.size(k);
                (0..n * n).map(|c| group.mul(k, c / n, c % n)).collect()
            })
            .collect();
        GroupAction::new(group, space, act, Side::Left)
    }

    #[inline]
    pub fn apply(&self, k: usize, g: usize, x: usize) -> usize {
        self.act[k][g * self.space.size(k) + x]
    }

    /// Violations of the action laws and of equivariance of faces and
    /// degeneracies.
    pub fn law_failures(&self) -> Vec<String> {
        let (g, x) = (&self.group, &self.space);
        let mut out = Vec::new();
        for k in 0..=x.dim() {
            let (ng, nx) = (g.sset.size(k), x.size(k));
            if self.act[k].len() != ng * nx || self.act[k].iter().any(|&v| v >= nx) {
                out.push(format!("action table at level {k} has the wrong shape"));
                continue;
            }
            for a in 0..ng {
                for b in 0..ng {
                    for p in 0..nx {
                        let lhs = self.apply(k, a, self.apply(k, b, p));
                        let ab = match self.side {
                            Side::Left => g.mul(k, a, b),
                            Side::Right => g.mul(k, b, a),
                        };
                        if lhs != self.apply(k, ab, p) {
                            out.push(format!("composition law fails at level {k}"));
                        }
                    }
                }
            }
            if (0..nx).any(|p| self.apply(k, g.e(k), p) != p) {
                out.push(format!("identity acts nontrivially at level {k}"));
            }
            for a in 0..ng {
                for p in 0..nx {
                    let gp = self.apply(k, a, p);
                    if k > 0 {
                        for i in 0..=k {
                            if x.face(k, i, gp) != self.apply(k - 1, g.sset.face(k, i, a), x.face(k, i, p)) {
                                out.push(format!("d_{i} not equivariant at level {k}"));
                            }
                        }
                    }
                    if k < x.dim() {
                        for i in 0..=k {
                            if x.degen(k, i, gp) != self.apply(k + 1, g.sset.degen(k, i, a), x.degen(k, i, p)) {
                                out.push(format!("s_{i} not equivariant at level {k}"));
                            }
                        }
                    }
                }
            }
        }
        out.dedup();
        out
    }

    /// A right action as the left action `g·x = x·g^{-1}`.
    pub fn as_left(&self) -> GroupAction {
        if self.side == Side::Left {
            return self.clone();
        }
        let act = (0..=self.space.dim())
            .map(|k| {
                let nx = self.space.size(k);
                (0..self.group.sset.size(k) * nx)
                    .map(|c| self.apply(k, self.group.inv(k, c / nx), c % nx))
                    .collect()
            })
            .collect();
        GroupAction {
            group: self.group.clone(),
            space: self.space.clone(),
            act,
            side: Side::Left,
        }
    }
}

/// `W̄G ×_G X`: level `n` is `W̄_n G × X_n`, with id `w·|X_n| + x`.
#[derive(Clone, Debug)]
pub struct HomotopyQuotient {
    pub sset: Arc<SSet>,
    pub wbar: ProductLevels,
    pub space: Arc<SSet>,
}

impl HomotopyQuotient {
    pub fn encode(&self, k: usize, w: usize, x: usize) -> usize {
        w * self.space.size(k) + x
    }

    pub fn decode(&self, k: usize, id: usize) -> (usize, usize) {
        (id / self.space.size(k), id % self.space.size(k))
    }

    /// The projection to `W̄G`.
    pub fn projection(&self) -> Result<SMap> {
        let comps = (0..=self.sset.dim())
            .map(|k| (0..self.sset.size(k)).map(|id| self.decode(k, id).0).collect())
            .collect();
        SMap::new(self.sset.clone(), self.wbar.sset.clone(), comps)
    }
}

/// The homotopy quotient of a left action, truncated at `d`. The last face
/// acts by the last group coordinate: `d_n(g, x) = (d_n g, g_{n-1}·d_n x)`.
pub fn homotopy_quotient(a: &GroupAction, d: usize) -> Result<HomotopyQuotient> {
    let a = a.as_left();
    if a.space.dim() < d {
        return Err(Error::Truncation(format!("homotopy quotient to {d} needs the space to level {d}")));
    }
    let g = &a.group;
    let wb = w_bar(g, d)?;
    let x = a.space.clone();
    let sizes: Vec<usize> = (0..=d).map(|k| wb.sset.size(k) * x.size(k)).collect();
    for (k, &s) in sizes.iter().enumerate() {
        check_budget(k, s)?;
    }
    let dec = |k: usize, id: usize| (id / x.size(k), id % x.size(k));
    let faces = (0..=d)
        .map(|k| {
            if k == 0 {
                return Vec::new();
            }
            (0..=k)
                .map(|i| {
                    (0..sizes[k])
                        .map(|id| {
                            let (w, p) = dec(k, id);
                            let wf = wb.sset.face(k, i, w);
                            let pf = if i < k {
                                x.face(k, i, p)
                            } else {
                                let last = wb.decode(k, w)[k - 1];
                                a.apply(k - 1, last, x.face(k, k, p))
                            };
                            wf * x.size(k - 1) + pf
                        })
                        .collect()
                })
                .collect()
        })
        .collect();
    let degens = (0..=d)
        .map(|k| {
            if k == d {
                return Vec::new();
            }
            (0..=k)
                .map(|i| {
                    (0..sizes[k])
                        .map(|id| {
                            let (w, p) = dec(k, id);
                            wb.sset.degen(k, i, w) * x.size(k + 1) + x.degen(k, i, p)
                        })
                        .collect()
                })
                .collect()
        })
        .collect();
    let flag = match (wb.sset.coskeletal_above(), x.coskeletal_above()) {
        (Some(a), Some(b)) => Some(a.max(b)).filter(|&c| c <= d),
        _ => None,
    };
    let q = SSet::from_tables(sizes, faces, degens, None)?.with_coskeletal_above(flag);
    Ok(HomotopyQuotient {
        sset: Arc::new(q),
        wbar: wb,
        space: x,
    })
}

/// `1 ×_G f : W̄G ×_G X -> W̄G ×_G Y` for an equivariant `f`.
pub fn equivariant_quotient_map(a: &GroupAction, b: &GroupAction, f: &SMap, d: usize) -> Result<(HomotopyQuotient, HomotopyQuotient, SMap)> {
    let (a, b) = (a.as_left(), b.as_left());
    if **f.source() != *a.space || **f.target() != *b.space {
        return Err(Error::Shape("map does not go between the acted-on spaces".into()));
    }
    for k in 0..=f.dim() {
        for g in 0..a.group.sset.size(k) {
            for p in 0..a.space.size(k) {
                if f.apply(k, a.apply(k, g, p)) != b.apply(k, g, f.apply(k, p)) {
                    return Err(Error::Invalid(format!("map is not equivariant at level {k}")));
                }
            }
        }
    }
    let qa = homotopy_quotient(&a, d)?;
    let qb = homotopy_quotient(&b, d)?;
    let comps = (0..=d)
        .map(|k| {
            (0..qa.sset.size(k))
                .map(|id| {
                    let (w, p) = qa.decode(k, id);
                    qb.encode(k, w, f.apply(k, p))
                })
                .collect()
        })
        .collect();
    let m = SMap::new(qa.sset.clone(), qb.sset.clone(), comps)?;
    Ok((qa, qb, m))
}

/// The bijection `Λ^k_i(W̄G) -> W̄_{k-1}G × Λ^{k-1}_{i'}(G)`, `i' = min(i, k-1)`.
#[derive(Clone, Debug)]
pub struct WbarHornIso {
    pub k: usize,
    pub i: usize,
    pub horn: RelHorn,
    /// `None` for `k = 1`, where the second factor is a point.
    pub lower: Option<RelHorn>,
    /// Image of each element of `horn` as `(W̄_{k-1} id, lower carrier id)`.
    pub table: Vec<(usize, usize)>,
}

impl WbarHornIso {
    pub fn is_bijective(&self, wbar_prev: usize) -> bool {
        let second = self.lower.as_ref().map_or(1, |l| l.len());
        let distinct: HashSet<&(usize, usize)> = self.table.iter().collect();
        distinct.len() == self.table.len() && self.table.len() == wbar_prev * second
    }
}

pub fn wbar_horn_iso(g: &SimplicialGroup, wb: &ProductLevels, k: usize, i: usize) -> Result<WbarHornIso> {
    if k == 0 || i > k || wb.sset.dim() < k {
        return Err(Error::Invalid(format!("no horn Λ^{k}_{i} in W̄")));
    }
    let h = abs_horn(&wb.sset, k, i)?;
    if k == 1 {
        return Ok(WbarHornIso {
            k,
            i,
            table: vec![(0, 0); h.len()],
            horn: h,
            lower: None,
        });
    }
    let ip = i.min(k - 1);
    let lower = abs_horn(&g.sset, k - 1, ip)?;
    let js: Vec<usize> = (0..=k).filter(|&j| j != i).collect();
    let mut table = Vec::with_capacity(h.len());
    for id in 0..h.len() {
        let t = h.carrier.get(id);
        let face = |j: usize| t[js.iter().position(|&v| v == j).expect("face present")];
        let last = |j: usize| *wb.decode(k - 1, face(j)).last().expect("k ≥ 2");
        let first = if i < k { face(k) } else { face(k - 1) };
        let mut key: Vec<usize> = (0..=k - 2).filter(|&j| j != i).map(last).collect();
        if i < k - 1 {
            key.push(g.mul(k - 2, g.inv(k - 2, last(k)), last(k - 1)));
        }
        key.push(0);
        let second = lower
            .carrier
            .lookup(&key)
            .ok_or_else(|| Error::Invariant(format!("horn {id} of W̄ does not land in a horn of G")))?;
        table.push((first, second));
    }
    Ok(WbarHornIso {
        k,
        i,
        horn: h,
        lower: Some(lower),
        table,
    })
}

/// The square `W̄_k -> Λ^k_i(W̄G) -> W̄_{k-1} × Λ^{k-1}_{i'}(G)` against
/// `w ↦ (d_k w or d_{k-1} w, λ(last coordinate of w))`.
pub fn wbar_square_commutes(wb: &ProductLevels, iso: &WbarHornIso) -> bool {
    let (k, i) = (iso.k, iso.i);
    (0..wb.sset.size(k)).all(|w| {
        let got = iso.table[iso.horn.comparison[w]];
        let Some(lower) = &iso.lower else {
            return got == (0, 0);
        };
        let t = wb.decode(k, w);
        let first = wb.sset.face(k, if i < k { k } else { k - 1 }, w);
        got == (first, lower.comparison[t[k - 1]])
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kan::{classify, Kind};
    use crate::sset::pi0;

    fn kz(n: usize, d: usize) -> SimplicialGroup {
        SimplicialGroup::nerve_of_abelian(&FinGroup::cyclic(n), d).unwrap()
    }

    /// All fillers of a horn by exhaustive search.
    fn brute_fillers(g: &SimplicialGroup, k: usize, i: usize, faces: &[Option<usize>]) -> Vec<usize> {
        (0..g.sset.size(k))
            .filter(|&s| (0..=k).all(|j| j == i || Some(g.sset.face(k, j, s)) == faces[j]))
            .collect()
    }

    #[test]
    fn k_z2_horn_example() {
        let g = kz(2, 3);
        let f = moore_fill(&g, 2, 1, &[Some(1), None, Some(1)], None).unwrap();
        assert_eq!(g.sset.face(2, 1, f), 0);
        assert_eq!(brute_fillers(&g, 2, 1, &[Some(1), None, Some(1)]), vec![f]);
    }

    #[test]
    fn moore_matches_brute_force_on_k_z3() {
        let g = kz(3, 3);
        for k in 1..=3 {
            for i in 0..=k {
                let h = abs_horn(&g.sset, k, i).unwrap();
                for id in 0..h.len() {
                    let t = h.carrier.get(id);
                    let mut faces: Vec<Option<usize>> = t[..k].iter().map(|&v| Some(v)).collect();
                    faces.insert(i, None);
                    let f = moore_fill(&g, k, i, &faces, None).unwrap();
                    let all = brute_fillers(&g, k, i, &faces);
                    assert!(all.contains(&f));
                    if k >= 2 {
                        assert_eq!(all, vec![f]);
                    }
                }
            }
        }
    }

    #[test]
    fn incompatible_horn_rejected() {
        let g = kz(2, 3);
        // d_2 of the 0th face differs from d_0 of the 3rd.
        let bad = [Some(0), None, Some(0), Some(3)];
        assert!(matches!(moore_fill(&g, 3, 1, &bad, None), Err(Error::Invalid(_))));
    }

    #[test]
    fn strict_groups() {
        let c = SimplicialGroup::constant(&FinGroup::symmetric3(), 3);
        assert!(classify_strict(&c, 1).unwrap().is_pass());
        let k = kz(2, 4);
        assert!(classify_strict(&k, 2).unwrap().is_pass());
        assert!(classify_strict(&k, 1).unwrap().is_fail());
    }

    #[test]
    fn wbar_of_constant_is_the_nerve() {
        let g = SimplicialGroup::constant(&FinGroup::cyclic(2), 4);
        let wb = w_bar(&g, 4).unwrap();
        let n = nerve(&Groupoid::from_group(&FinGroup::cyclic(2)), 4).unwrap();
        assert_eq!(wb.sset.sizes(), &[1, 2, 4, 8, 16]);
        assert_eq!(wb.sset.truncate(4).unwrap().with_coskeletal_above(None), n.with_coskeletal_above(None));
    }

    #[test]
    fn universal_bundle_of_k_z2() {
        let g = kz(2, 4);
        let (w, wb, tp) = universal_bundle(&g, 4).unwrap();
        assert_eq!(wb.sset.sizes(), &[1, 1, 2, 8, 64]);
        assert!(w.sset.validate().is_empty());
        assert!(wb.sset.validate().is_empty());
        assert!(tp.check().is_empty());
        assert_eq!(pi0(&w.sset).unwrap().classes, 1);
        let back = tp.pullback(&SMap::identity(wb.sset.clone())).unwrap();
        assert!(back.check().is_empty());
    }

    #[test]
    fn wbar_is_a_two_group_nerve() {
        let g = kz(2, 4);
        let wb = w_bar(&g, 4).unwrap();
        assert!(classify(&SMap::to_terminal(wb.sset.clone()), Nat::Fin(2), Kind::Groupoid).unwrap().is_pass());
    }

    #[test]
    fn horn_isos() {
        for g in [SimplicialGroup::constant(&FinGroup::cyclic(2), 3), kz(2, 3)] {
            let wb = w_bar(&g, 4).unwrap();
            for k in 1..=4 {
                for i in 0..=k {
                    let iso = wbar_horn_iso(&g, &wb, k, i).unwrap();
                    assert!(iso.is_bijective(wb.sset.size(k - 1)), "k={k} i={i}");
                    assert!(wbar_square_commutes(&wb, &iso), "k={k} i={i}");
                }
            }
        }
    }

    #[test]
    fn homotopy_quotients() {
        let g = Arc::new(kz(2, 4));
        let point = Arc::new(SSet::terminal(4));
        let triv = GroupAction::trivial(g.clone(), point.clone()).unwrap();
        let q = homotopy_quotient(&triv, 4).unwrap();
        assert!(q.sset.validate().is_empty());
        assert_eq!(q.sset.sizes(), w_bar(&g, 4).unwrap().sset.sizes());
        let left = GroupAction::left_translation(g.clone()).unwrap();
        let ql = homotopy_quotient(&left, 4).unwrap();
        assert!(ql.sset.validate().is_empty());
        assert_eq!(pi0(&ql.sset).unwrap().classes, 1);
        let f = SMap::to_terminal(g.sset.clone());
        let f = SMap::new(f.source().clone(), point, f.components().to_vec()).unwrap();
        let (_, _, m) = equivariant_quotient_map(&left, &triv, &f, 4).unwrap();
        assert!(m.check().is_empty());
        assert!(classify(&m, Nat::Fin(2), Kind::Stack).unwrap().is_pass());
    }
}
