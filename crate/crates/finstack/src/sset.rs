//! Finite truncated simplicial sets and simplicial maps.
//!
//! Simplices are opaque ids `0..size(k)` per level. Degenerate simplices are
//! stored explicitly, so every structure map is a plain lookup table.

use std::collections::HashMap;
use std::hash::Hash;
use std::sync::Arc;

use petgraph::unionfind::UnionFind;
use serde::Serialize;

use crate::error::{check_budget, Error, Result};

/// A simplicial set known in dimensions `0..=dim()`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SSet {
    sizes: Vec<usize>,
    /// `faces[k][i]` is `d_i : X_k -> X_{k-1}`; `faces[0]` is empty.
    faces: Vec<Vec<Vec<usize>>>,
    /// `degens[k][i]` is `s_i : X_k -> X_{k+1}`; `degens[dim]` is empty.
    degens: Vec<Vec<Vec<usize>>>,
    coskeletal_above: Option<usize>,
}

/// One failed instance of a simplicial identity or map condition.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub identity: String,
    pub level: usize,
    pub indices: Vec<usize>,
    pub simplex: usize,
}

impl Violation {
    fn new(identity: &str, level: usize, indices: Vec<usize>, simplex: usize) -> Self {
        Violation {
            identity: identity.to_string(),
            level,
            indices,
            simplex,
        }
    }
}

impl SSet {
    /// Builds a simplicial set from raw tables, checking only their shapes.
    pub fn from_tables(
        sizes: Vec<usize>,
        faces: Vec<Vec<Vec<usize>>>,
        degens: Vec<Vec<Vec<usize>>>,
        coskeletal_above: Option<usize>,
    ) -> Result<SSet> {
        if sizes.is_empty() {
            return Err(Error::Invalid("no levels".into()));
        }
        let d = sizes.len() - 1;
        if faces.len() != d + 1 || degens.len() != d + 1 {
            return Err(Error::Invalid("table count does not match levels".into()));
        }
        for (k, &size) in sizes.iter().enumerate() {
            check_budget(k, size)?;
            let nf = if k == 0 { 0 } else { k + 1 };
            if faces[k].len() != nf {
                return Err(Error::Invalid(format!("level {k} needs {nf} face maps")));
            }
            for (i, t) in faces[k].iter().enumerate() {
                if t.len() != size || t.iter().any(|&v| v >= sizes[k - 1]) {
                    return Err(Error::Invalid(format!("face table {k},{i} out of range")));
                }
            }
            let nd = if k == d { 0 } else { k + 1 };
            if degens[k].len() != nd {
                return Err(Error::Invalid(format!(
                    "level {k} needs {nd} degeneracy maps"
                )));
            }
            for (i, t) in degens[k].iter().enumerate() {
                if t.len() != size || t.iter().any(|&v| v >= sizes[k + 1]) {
                    return Err(Error::Invalid(format!(
                        "degeneracy table {k},{i} out of range"
                    )));
                }
            }
        }
        if let Some(c) = coskeletal_above {
            if c > d {
                return Err(Error::Invalid(format!(
                    "coskeletal_above {c} exceeds truncation {d}"
                )));
            }
        }
        Ok(SSet {
            sizes,
            faces,
            degens,
            coskeletal_above,
        })
    }

    /// Builds a simplicial set from explicit element lists and structure
    /// functions. Ids follow the order of `levels`.
    pub fn from_model<T, F, S>(levels: Vec<Vec<T>>, face: F, degen: S) -> Result<SSet>
    where
        T: Clone + Eq + Hash + std::fmt::Debug,
        F: Fn(usize, usize, &T) -> T,
        S: Fn(usize, usize, &T) -> T,
    {
        let d = levels.len().checked_sub(1).ok_or(Error::Invalid("no levels".into()))?;
        let mut index: Vec<HashMap<&T, usize>> = Vec::with_capacity(d + 1);
        for (k, lv) in levels.iter().enumerate() {
            check_budget(k, lv.len())?;
            let mut m = HashMap::with_capacity(lv.len());
            for (id, t) in lv.iter().enumerate() {
                if m.insert(t, id).is_some() {
                    return Err(Error::Invalid(format!("duplicate element {t:?} in level {k}")));
                }
            }
            index.push(m);
        }
        let lookup = |k: usize, t: &T| -> Result<usize> {
            index[k]
                .get(t)
                .copied()
                .ok_or_else(|| Error::Invalid(format!("{t:?} is not in level {k}")))
        };
        let mut faces = vec![Vec::new()];
        for k in 1..=d {
            let mut fk = Vec::with_capacity(k + 1);
            for i in 0..=k {
                let t: Result<Vec<usize>> =
                    levels[k].iter().map(|x| lookup(k - 1, &face(k, i, x))).collect();
                fk.push(t?);
            }
            faces.push(fk);
        }
        let mut degens = Vec::with_capacity(d + 1);
        for k in 0..d {
            let mut sk = Vec::with_capacity(k + 1);
            for i in 0..=k {
                let t: Result<Vec<usize>> =
                    levels[k].iter().map(|x| lookup(k + 1, &degen(k, i, x))).collect();
                sk.push(t?);
            }
            degens.push(sk);
        }
        degens.push(Vec::new());
        let sizes = levels.iter().map(|l| l.len()).collect();
        SSet::from_tables(sizes, faces, degens, None)
    }

    /// The terminal simplicial set: one simplex in each level.
    pub fn terminal(d: usize) -> SSet {
        SSet::constant(1, d)
    }

    /// The constant simplicial set on `n` points.
    pub fn constant(n: usize, d: usize) -> SSet {
        let id: Vec<usize> = (0..n).collect();
        let faces = (0..=d)
            .map(|k| if k == 0 { Vec::new() } else { vec![id.clone(); k + 1] })
            .collect();
        let degens = (0..=d)
            .map(|k| if k == d { Vec::new() } else { vec![id.clone(); k + 1] })
            .collect();
        let cosk = if n <= 1 { 0 } else { 1 };
        SSet {
            sizes: vec![n; d + 1],
            faces,
            degens,
            coskeletal_above: Some(cosk.min(d)),
        }
    }

    /// Truncation degree.
    pub fn dim(&self) -> usize {
        self.sizes.len() - 1
    }

    pub fn size(&self, k: usize) -> usize {
        self.sizes[k]
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn coskeletal_above(&self) -> Option<usize> {
        self.coskeletal_above
    }

    /// Replaces the coskeletality flag; the flag is checked by `validate`.
    /// A flag above the stored degree cannot be checked and is dropped.
    pub fn with_coskeletal_above(mut self, c: Option<usize>) -> SSet {
        self.coskeletal_above = c.filter(|&c| c <= self.dim());
        self
    }

    /// `d_i` applied to the `k`-simplex `x`.
    #[inline]
    pub fn face(&self, k: usize, i: usize, x: usize) -> usize {
        self.faces[k][i][x]
    }

    /// `s_i` applied to the `k`-simplex `x`.
    #[inline]
    pub fn degen(&self, k: usize, i: usize, x: usize) -> usize {
        self.degens[k][i][x]
    }

    pub fn face_table(&self, k: usize, i: usize) -> &[usize] {
        &self.faces[k][i]
    }

    pub fn degen_table(&self, k: usize, i: usize) -> &[usize] {
        &self.degens[k][i]
    }

    /// Restriction of the `k`-simplex `x` to the sorted vertex list `verts`.
    pub fn restrict(&self, k: usize, x: usize, verts: &[usize]) -> usize {
        let mut cur = k;
        let mut y = x;
        for v in (0..=k).rev() {
            if !verts.contains(&v) {
                y = self.face(cur, v, y);
                cur -= 1;
            }
        }
        y
    }

    /// Image of the `k`-simplex `x` under the simplicial operator given by a
    /// nondecreasing vertex sequence in `[k]`.
    pub fn apply_seq(&self, k: usize, x: usize, seq: &[usize]) -> usize {
        let mut distinct: Vec<usize> = seq.to_vec();
        distinct.dedup();
        let mut y = self.restrict(k, x, &distinct);
        let mut cur = distinct.len() - 1;
        for p in 1..seq.len() {
            if seq[p] == seq[p - 1] {
                y = self.degen(cur, p - 1, y);
                cur += 1;
            }
        }
        y
    }

    /// The simplicial set restricted to levels `0..=d`.
    pub fn truncate(&self, d: usize) -> Result<SSet> {
        if d > self.dim() {
            return Err(Error::Truncation(format!(
                "cannot truncate degree {} to {d}",
                self.dim()
            )));
        }
        let mut degens = self.degens[..=d].to_vec();
        degens[d] = Vec::new();
        Ok(SSet {
            sizes: self.sizes[..=d].to_vec(),
            faces: self.faces[..=d].to_vec(),
            degens,
            coskeletal_above: self.coskeletal_above.filter(|&c| c <= d),
        })
    }

    /// Whether the `k`-simplex `x` lies in the image of some degeneracy.
    pub fn is_degenerate(&self, k: usize, x: usize) -> bool {
        k > 0 && (0..k).any(|i| self.degen(k - 1, i, self.face(k, i, x)) == x)
    }

    /// Exhaustive check of all simplicial identities and the coskeletality flag.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let d = self.dim();
        for k in 2..=d {
            for j in 1..=k {
                for i in 0..j {
                    for x in 0..self.size(k) {
                        let a = self.face(k - 1, i, self.face(k, j, x));
                        let b = self.face(k - 1, j - 1, self.face(k, i, x));
                        if a != b {
                            out.push(Violation::new("d_i d_j = d_{j-1} d_i", k, vec![i, j], x));
                        }
                    }
                }
            }
        }
        for k in 0..d.saturating_sub(1) {
            for j in 0..=k {
                for i in 0..=j {
                    for x in 0..self.size(k) {
                        let a = self.degen(k + 1, i, self.degen(k, j, x));
                        let b = self.degen(k + 1, j + 1, self.degen(k, i, x));
                        if a != b {
                            out.push(Violation::new("s_i s_j = s_{j+1} s_i", k, vec![i, j], x));
                        }
                    }
                }
            }
        }
        for k in 0..d {
            for j in 0..=k {
                for i in 0..=k + 1 {
                    for x in 0..self.size(k) {
                        let lhs = self.face(k + 1, i, self.degen(k, j, x));
                        let rhs = if i < j {
                            self.degen(k - 1, j - 1, self.face(k, i, x))
                        } else if i == j || i == j + 1 {
                            x
                        } else {
                            self.degen(k - 1, j, self.face(k, i - 1, x))
                        };
                        if lhs != rhs {
                            out.push(Violation::new("d_i s_j", k, vec![i, j], x));
                        }
                    }
                }
            }
        }
        if let Some(c) = self.coskeletal_above {
            let t = SMap::to_terminal(Arc::new(self.clone()));
            for k in c + 1..=d {
                match crate::kan::matching(&t, k) {
                    Ok(m) => {
                        if let Some(w) = m.first_failure(true) {
                            out.push(Violation::new("coskeletal boundary bijection", k, vec![], w));
                        }
                    }
                    Err(_) => out.push(Violation::new("coskeletal boundary bijection", k, vec![], 0)),
                }
            }
        }
        out
    }

    /// Errors out with the first violation, if any.
    pub fn ensure_valid(&self) -> Result<()> {
        match self.validate().first() {
            None => Ok(()),
            Some(v) => Err(Error::Invalid(format!(
                "identity {} fails at level {} indices {:?} simplex {}",
                v.identity, v.level, v.indices, v.simplex
            ))),
        }
    }
}

/// A levelwise map between simplicial sets.
#[derive(Clone, Debug)]
pub struct SMap {
    source: Arc<SSet>,
    target: Arc<SSet>,
    comps: Vec<Vec<usize>>,
    /// Known degree above which `mu_k` is a bijection, beyond stored data.
    coskeletal_above: Option<usize>,
}

impl SMap {
    /// Builds a map from components on levels `0..=source.dim()`.
    pub fn new(source: Arc<SSet>, target: Arc<SSet>, comps: Vec<Vec<usize>>) -> Result<SMap> {
        if target.dim() < source.dim() {
            return Err(Error::Shape(format!(
                "target truncation {} below source truncation {}",
                target.dim(),
                source.dim()
            )));
        }
        if comps.len() != source.dim() + 1 {
            return Err(Error::Shape("one component per source level required".into()));
        }
        for (k, c) in comps.iter().enumerate() {
            if c.len() != source.size(k) || c.iter().any(|&v| v >= target.size(k)) {
                return Err(Error::Shape(format!("component {k} out of range")));
            }
        }
        Ok(SMap {
            source,
            target,
            comps,
            coskeletal_above: None,
        })
    }

    pub fn identity(x: Arc<SSet>) -> SMap {
        let comps = (0..=x.dim()).map(|k| (0..x.size(k)).collect()).collect();
        SMap {
            source: x.clone(),
            target: x,
            comps,
            coskeletal_above: Some(0),
        }
    }

    /// The unique map to the terminal simplicial set of the same degree.
    pub fn to_terminal(x: Arc<SSet>) -> SMap {
        let comps = (0..=x.dim()).map(|k| vec![0; x.size(k)]).collect();
        SMap {
            target: Arc::new(SSet::terminal(x.dim())),
            source: x,
            comps,
            coskeletal_above: None,
        }
    }

    pub fn source(&self) -> &Arc<SSet> {
        &self.source
    }

    pub fn target(&self) -> &Arc<SSet> {
        &self.target
    }

    pub fn dim(&self) -> usize {
        self.source.dim()
    }

    #[inline]
    pub fn apply(&self, k: usize, x: usize) -> usize {
        self.comps[k][x]
    }

    pub fn component(&self, k: usize) -> &[usize] {
        &self.comps[k]
    }

    pub fn components(&self) -> &[Vec<usize>] {
        &self.comps
    }

    /// Declares that `mu_k` of this map is bijective for every `k > c`.
    pub fn with_coskeletal_above(mut self, c: Option<usize>) -> SMap {
        self.coskeletal_above = c;
        self
    }

    /// The declared degree alone, ignoring the endpoints.
    pub fn own_coskeletal_above(&self) -> Option<usize> {
        self.coskeletal_above
    }

    /// Degree above which `mu_k` is known bijective for all `k`, if any.
    pub fn effective_coskeletal_above(&self) -> Option<usize> {
        let from_objects = match (self.source.coskeletal_above(), self.target.coskeletal_above()) {
            (Some(a), Some(b)) => Some(a.max(b)),
            _ => None,
        };
        match (self.coskeletal_above, from_objects) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        }
    }

    /// The map restricted to levels `0..=d` of source and target.
    pub fn truncate(&self, d: usize) -> Result<SMap> {
        let m = SMap::new(
            Arc::new(self.source.truncate(d)?),
            Arc::new(self.target.truncate(d)?),
            self.comps[..=d].to_vec(),
        )?;
        Ok(m.with_coskeletal_above(self.coskeletal_above.filter(|&c| c <= d)))
    }

    /// `g ∘ self`.
    pub fn then(&self, g: &SMap) -> Result<SMap> {
        if *self.target != *g.source {
            return Err(Error::Shape("maps are not composable".into()));
        }
        let comps = self
            .comps
            .iter()
            .enumerate()
            .map(|(k, c)| c.iter().map(|&x| g.apply(k, x)).collect())
            .collect();
        let flag = match (self.effective_coskeletal_above(), g.effective_coskeletal_above()) {
            (Some(a), Some(b)) => Some(a.max(b)),
            _ => None,
        };
        Ok(SMap::new(self.source.clone(), g.target.clone(), comps)?.with_coskeletal_above(flag))
    }

    /// Exhaustive check that the map commutes with faces and degeneracies.
    pub fn check(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let (x, y) = (&self.source, &self.target);
        for k in 0..=x.dim() {
            for a in 0..x.size(k) {
                if k > 0 {
                    for i in 0..=k {
                        if self.apply(k - 1, x.face(k, i, a)) != y.face(k, i, self.apply(k, a)) {
                            out.push(Violation::new("f d_i = d_i f", k, vec![i], a));
                        }
                    }
                }
                if k < x.dim() {
                    for i in 0..=k {
                        if self.apply(k + 1, x.degen(k, i, a)) != y.degen(k, i, self.apply(k, a)) {
                            out.push(Violation::new("f s_i = s_i f", k, vec![i], a));
                        }
                    }
                }
            }
        }
        out
    }

    pub fn ensure_simplicial(&self) -> Result<()> {
        match self.check().first() {
            None => Ok(()),
            Some(v) => Err(Error::Invalid(format!(
                "map fails {} at level {} index {:?} simplex {}",
                v.identity, v.level, v.indices, v.simplex
            ))),
        }
    }

    /// Whether every component is surjective.
    pub fn is_levelwise_surjective(&self) -> bool {
        (0..=self.dim()).all(|k| {
            let mut hit = vec![false; self.target.size(k)];
            self.comps[k].iter().for_each(|&v| hit[v] = true);
            hit.into_iter().all(|h| h)
        })
    }

    /// Whether every component is a bijection.
    pub fn is_levelwise_bijective(&self) -> bool {
        (0..=self.dim()).all(|k| self.target.size(k) == self.source.size(k))
            && self.is_levelwise_surjective()
    }
}

/// The coequalizer of `d_0, d_1 : X_1 => X_0`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Pi0 {
    pub classes: usize,
    /// Class of each vertex; classes are numbered by first occurrence.
    pub map: Vec<usize>,
}

/// Connected components, computed by union-find over the edge table.
pub fn pi0(x: &SSet) -> Result<Pi0> {
    if x.dim() < 1 {
        return Err(Error::Truncation("pi0 needs level 1".into()));
    }
    Ok(quotient_by_pairs(
        x.size(0),
        (0..x.size(1)).map(|e| (x.face(1, 0, e), x.face(1, 1, e))),
    ))
}

/// Partition of `0..n` generated by the given pairs.
pub fn quotient_by_pairs(n: usize, pairs: impl Iterator<Item = (usize, usize)>) -> Pi0 {
    let mut uf = UnionFind::<usize>::new(n);
    for (a, b) in pairs {
        uf.union(a, b);
    }
    let mut label = HashMap::new();
    let map = (0..n)
        .map(|v| {
            let r = uf.find(v);
            let next = label.len();
            *label.entry(r).or_insert(next)
        })
        .collect();
    Pi0 {
        classes: label.len(),
        map,
    }
}

fn max_flag(a: Option<usize>, b: Option<usize>) -> Option<usize> {
    match (a, b) {
        (Some(a), Some(b)) => Some(a.max(b)),
        _ => None,
    }
}

/// Levelwise product with its two projections.
pub fn product(x: &Arc<SSet>, y: &Arc<SSet>) -> Result<(Arc<SSet>, SMap, SMap)> {
    if x.dim() != y.dim() {
        return Err(Error::Shape("product needs equal truncation degrees".into()));
    }
    let d = x.dim();
    let sizes: Vec<usize> = (0..=d)
        .map(|k| x.size(k).checked_mul(y.size(k)).unwrap_or(usize::MAX))
        .collect();
    for (k, &s) in sizes.iter().enumerate() {
        check_budget(k, s)?;
    }
    let pair = |k: usize, id: usize| (id / y.size(k), id % y.size(k));
    let faces = (0..=d)
        .map(|k| {
            if k == 0 {
                return Vec::new();
            }
            (0..=k)
                .map(|i| {
                    (0..sizes[k])
                        .map(|id| {
                            let (a, b) = pair(k, id);
                            x.face(k, i, a) * y.size(k - 1) + y.face(k, i, b)
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
                            let (a, b) = pair(k, id);
                            x.degen(k, i, a) * y.size(k + 1) + y.degen(k, i, b)
                        })
                        .collect()
                })
                .collect()
        })
        .collect();
    let p = Arc::new(SSet::from_tables(
        sizes.clone(),
        faces,
        degens,
        max_flag(x.coskeletal_above(), y.coskeletal_above()),
    )?);
    let p1 = (0..=d).map(|k| (0..sizes[k]).map(|id| pair(k, id).0).collect()).collect();
    let p2 = (0..=d).map(|k| (0..sizes[k]).map(|id| pair(k, id).1).collect()).collect();
    Ok((
        p.clone(),
        SMap::new(p.clone(), x.clone(), p1)?,
        SMap::new(p, y.clone(), p2)?,
    ))
}

/// Fibered product `X ×_Z Y` of `f : X -> Z` and `g : Y -> Z`, with projections.
pub fn pullback(f: &SMap, g: &SMap) -> Result<(Arc<SSet>, SMap, SMap)> {
    if *f.target != *g.target {
        return Err(Error::Shape("pullback needs a common target".into()));
    }
    if f.dim() != g.dim() {
        return Err(Error::Shape("pullback needs equal truncation degrees".into()));
    }
    let (x, y) = (&f.source, &g.source);
    let d = f.dim();
    let mut levels: Vec<Vec<(usize, usize)>> = Vec::with_capacity(d + 1);
    for k in 0..=d {
        let mut by_z: HashMap<usize, Vec<usize>> = HashMap::new();
        for b in 0..y.size(k) {
            by_z.entry(g.apply(k, b)).or_default().push(b);
        }
        let mut lv = Vec::new();
        for a in 0..x.size(k) {
            if let Some(bs) = by_z.get(&f.apply(k, a)) {
                for &b in bs {
                    lv.push((a, b));
                }
            }
            check_budget(k, lv.len())?;
        }
        levels.push(lv);
    }
    let p1: Vec<Vec<usize>> = levels.iter().map(|l| l.iter().map(|p| p.0).collect()).collect();
    let p2: Vec<Vec<usize>> = levels.iter().map(|l| l.iter().map(|p| p.1).collect()).collect();
    let flag = max_flag(
        max_flag(x.coskeletal_above(), y.coskeletal_above()),
        f.target.coskeletal_above(),
    );
    let pb = Arc::new(
        SSet::from_model(
            levels,
            |k, i, &(a, b)| (x.face(k, i, a), y.face(k, i, b)),
            |k, i, &(a, b)| (x.degen(k, i, a), y.degen(k, i, b)),
        )?
        .with_coskeletal_above(flag),
    );
    // Base change keeps the relative coskeletal degree of the other leg.
    Ok((
        pb.clone(),
        SMap::new(pb.clone(), x.clone(), p1)?.with_coskeletal_above(g.effective_coskeletal_above()),
        SMap::new(pb, y.clone(), p2)?.with_coskeletal_above(f.effective_coskeletal_above()),
    ))
}

/// Boundary data needed to enumerate compatible face tuples in level `k`.
pub(crate) struct LowerData<'a> {
    /// `|X_{k-1}|`.
    pub xsize: usize,
    /// `d_m : X_{k-1} -> X_{k-2}` for `m in 0..k`; empty when `k == 1`.
    pub xfaces: Vec<&'a [usize]>,
    /// `f_{k-1} : X_{k-1} -> Y_{k-1}`; ignored when `k == 0`.
    pub fmap: &'a [usize],
    /// `|Y_k|`.
    pub ysize: usize,
    /// `d_j : Y_k -> Y_{k-1}` for `j in 0..=k`.
    pub yfaces: Vec<&'a [usize]>,
}

impl<'a> LowerData<'a> {
    /// Data for level `k` of the map `f` (requires `k <= f.target.dim()`).
    pub fn of_map(f: &'a SMap, k: usize) -> LowerData<'a> {
        let x = &f.source;
        let y = &f.target;
        LowerData {
            xsize: if k == 0 { 0 } else { x.size(k - 1) },
            xfaces: if k >= 2 {
                (0..k).map(|m| x.face_table(k - 1, m)).collect()
            } else {
                Vec::new()
            },
            fmap: if k == 0 { &[] } else { f.component(k - 1) },
            ysize: y.size(k),
            yfaces: if k == 0 {
                Vec::new()
            } else {
                (0..=k).map(|j| y.face_table(k, j)).collect()
            },
        }
    }
}

/// Compatible tuples `((x_j)_{j in J}, y)` in level `k`: `d_{m-1} x_j = d_j x_m`
/// for `j < m` in `J`, and `f(x_j) = d_j y`. Stored flat with stride `|J| + 1`.
#[derive(Clone, Debug)]
pub struct TupleSpace {
    pub k: usize,
    pub js: Vec<usize>,
    data: Vec<usize>,
    index: HashMap<Vec<usize>, usize>,
}

impl TupleSpace {
    pub fn len(&self) -> usize {
        self.index.len()
    }

    pub fn is_empty(&self) -> bool {
        self.index.is_empty()
    }

    fn stride(&self) -> usize {
        self.js.len() + 1
    }

    /// Faces followed by the lower simplex `y`.
    pub fn get(&self, id: usize) -> &[usize] {
        let s = self.stride();
        &self.data[id * s..(id + 1) * s]
    }

    pub fn lookup(&self, t: &[usize]) -> Option<usize> {
        self.index.get(t).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = &[usize]> {
        self.data.chunks(self.stride())
    }
}

pub(crate) fn enumerate_tuples(ld: &LowerData, k: usize, js: &[usize]) -> Result<TupleSpace> {
    let stride = js.len() + 1;
    let mut data = Vec::new();
    let mut count = 0usize;
    if js.is_empty() {
        for y in 0..ld.ysize {
            data.push(y);
        }
        count = ld.ysize;
    } else {
        let mut fiber: HashMap<usize, Vec<usize>> = HashMap::new();
        for x in 0..ld.xsize {
            fiber.entry(ld.fmap[x]).or_default().push(x);
        }
        // by_face[m][(f x, d_m x)] lists x.
        let by_face: Vec<HashMap<(usize, usize), Vec<usize>>> = ld
            .xfaces
            .iter()
            .map(|t| {
                let mut m: HashMap<(usize, usize), Vec<usize>> = HashMap::new();
                for x in 0..ld.xsize {
                    m.entry((ld.fmap[x], t[x])).or_default().push(x);
                }
                m
            })
            .collect();
        let empty: Vec<usize> = Vec::new();
        let mut cur = vec![0usize; js.len()];
        for y in 0..ld.ysize {
            let targets: Vec<usize> = js.iter().map(|&j| ld.yfaces[j][y]).collect();
            // Iterative DFS over positions of `js`.
            let mut choice = vec![0usize; js.len()];
            let mut cands: Vec<&Vec<usize>> = vec![&empty; js.len()];
            let mut pos = 0usize;
            let candidates = |pos: usize, cur: &[usize]| -> &Vec<usize> {
                let j = js[pos];
                if pos == 0 || ld.xfaces.is_empty() {
                    fiber.get(&targets[pos]).unwrap_or(&empty)
                } else {
                    let jp = js[0];
                    let want = ld.xfaces[j - 1][cur[0]];
                    by_face[jp].get(&(targets[pos], want)).unwrap_or(&empty)
                }
            };
            cands[0] = candidates(0, &cur);
            loop {
                if choice[pos] >= cands[pos].len() {
                    if pos == 0 {
                        break;
                    }
                    pos -= 1;
                    choice[pos] += 1;
                    continue;
                }
                let x = cands[pos][choice[pos]];
                let j = js[pos];
                let ok = ld.xfaces.is_empty() || (1..pos).all(|q| {
                    let jq = js[q];
                    ld.xfaces[jq][x] == ld.xfaces[j - 1][cur[q]]
                });
                if !ok {
                    choice[pos] += 1;
                    continue;
                }
                cur[pos] = x;
                if pos + 1 == js.len() {
                    data.extend_from_slice(&cur);
                    data.push(y);
                    count += 1;
                    if count % 4096 == 0 {
                        check_budget(k, count)?;
                    }
                    choice[pos] += 1;
                } else {
                    pos += 1;
                    choice[pos] = 0;
                    cands[pos] = candidates(pos, &cur);
                }
            }
        }
    }
    check_budget(k, count)?;
    let mut index = HashMap::with_capacity(count);
    for (id, t) in data.chunks(stride).enumerate() {
        index.insert(t.to_vec(), id);
    }
    Ok(TupleSpace {
        k,
        js: js.to_vec(),
        data,
        index,
    })
}

/// Boundary of `s_j σ` for a `k`-simplex `σ` given by its boundary `b` and its
/// own id `me`, using level `k-1` degeneracies `sdeg(i, v)`.
pub(crate) fn degen_boundary(
    k: usize,
    j: usize,
    me: usize,
    b: &[usize],
    sdeg: impl Fn(usize, usize) -> usize,
) -> Vec<usize> {
    (0..=k + 1)
        .map(|i| {
            if i < j {
                sdeg(j - 1, b[i])
            } else if i == j || i == j + 1 {
                me
            } else {
                sdeg(j, b[i - 1])
            }
        })
        .collect()
}

/// The relative coskeleton: levels `0..=n` from `f.source`, and above that
/// compatible boundary tuples lying over simplices of `f.target`.
/// Returns the map to `f.target` truncated at `d`.
pub fn relative_coskeleton(f: &SMap, n: usize, d: usize) -> Result<SMap> {
    let x = &f.source;
    let y = f.target.clone();
    if x.dim() < n {
        return Err(Error::Truncation(format!(
            "coskeleton at {n} needs source data to level {n}"
        )));
    }
    if y.dim() < d {
        return Err(Error::Truncation(format!(
            "coskeleton to {d} needs target data to level {d}"
        )));
    }
    if d <= n {
        let xs = Arc::new(x.truncate(d)?);
        let yt = Arc::new(y.truncate(d)?);
        return SMap::new(xs, yt, f.comps[..=d].to_vec());
    }
    let mut sizes: Vec<usize> = (0..=n).map(|k| x.size(k)).collect();
    let mut faces: Vec<Vec<Vec<usize>>> = (0..=n)
        .map(|k| (0..if k == 0 { 0 } else { k + 1 }).map(|i| x.face_table(k, i).to_vec()).collect())
        .collect();
    let mut degens: Vec<Vec<Vec<usize>>> = (0..n)
        .map(|k| (0..=k).map(|i| x.degen_table(k, i).to_vec()).collect())
        .collect();
    let mut comps: Vec<Vec<usize>> = f.comps[..=n].to_vec();
    for k in n + 1..=d {
        let ld = LowerData {
            xsize: sizes[k - 1],
            xfaces: if k >= 2 {
                faces[k - 1].iter().map(|t| t.as_slice()).collect()
            } else {
                Vec::new()
            },
            fmap: &comps[k - 1],
            ysize: y.size(k),
            yfaces: (0..=k).map(|j| y.face_table(k, j)).collect(),
        };
        let all: Vec<usize> = (0..=k).collect();
        let ts = enumerate_tuples(&ld, k, &all)?;
        let size = ts.len();
        let fk: Vec<Vec<usize>> = (0..=k)
            .map(|i| (0..size).map(|id| ts.get(id)[i]).collect())
            .collect();
        let comp: Vec<usize> = (0..size).map(|id| ts.get(id)[k + 1]).collect();
        // Degeneracies from level k-1 into the new level.
        let prev = k - 1;
        let mut dk: Vec<Vec<usize>> = Vec::with_capacity(prev + 1);
        for j in 0..=prev {
            let mut t = Vec::with_capacity(sizes[prev]);
            for s in 0..sizes[prev] {
                let b: Vec<usize> = if prev == 0 {
                    Vec::new()
                } else {
                    (0..=prev).map(|i| faces[prev][i][s]).collect()
                };
                let mut key = if prev == 0 {
                    vec![s, s]
                } else {
                    degen_boundary(prev, j, s, &b, |i, v| degens[prev - 1][i][v])
                };
                key.push(y.degen(prev, j, comps[prev][s]));
                let id = ts.lookup(&key).ok_or_else(|| {
                    Error::Invariant(format!("degenerate boundary missing at level {k}"))
                })?;
                t.push(id);
            }
            dk.push(t);
        }
        degens.push(dk);
        sizes.push(size);
        faces.push(fk);
        comps.push(comp);
    }
    degens.push(Vec::new());
    let yflag = y.coskeletal_above();
    let t = Arc::new(SSet::from_tables(
        sizes,
        faces,
        degens,
        yflag.map(|c| c.max(n)).filter(|&c| c <= d),
    )?);
    let yt = Arc::new(y.truncate(d)?);
    Ok(SMap::new(t, yt, comps)?.with_coskeletal_above(Some(n)))
}

/// The absolute `n`-coskeleton of `x`, truncated at `d`.
pub fn coskeleton(x: &SSet, n: usize, d: usize) -> Result<SSet> {
    let xn = Arc::new(x.truncate(n.min(x.dim()))?);
    if x.dim() < n {
        return Err(Error::Truncation(format!(
            "coskeleton at {n} needs data to level {n}"
        )));
    }
    let t = SMap::to_terminal(xn);
    let term = Arc::new(SSet::terminal(d.max(n)));
    let t = SMap::new(t.source.clone(), term, t.comps.clone())?;
    let c = relative_coskeleton(&t, n, d)?;
    let out = (*c.source).clone();
    Ok(out.with_coskeletal_above(Some(n)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shapes::Complex;

    fn delta(n: usize, d: usize) -> SSet {
        Complex::simplex(n).to_sset(d).unwrap()
    }

    #[test]
    fn standard_simplex_is_valid() {
        assert!(delta(2, 3).validate().is_empty());
    }

    #[test]
    fn swapped_faces_are_reported() {
        let x = delta(2, 2);
        let mut faces = x.faces.clone();
        let top = (0..x.size(2)).find(|&s| x.face(2, 0, s) != x.face(2, 1, s)).unwrap();
        let a = faces[2][0][top];
        faces[2][0][top] = faces[2][1][top];
        faces[2][1][top] = a;
        let bad = SSet::from_tables(x.sizes.clone(), faces, x.degens.clone(), None).unwrap();
        assert!(!bad.validate().is_empty());
    }

    #[test]
    fn coskeleton_of_two_points() {
        let two = SSet::constant(2, 0);
        let c = coskeleton(&two, 0, 2).unwrap();
        assert_eq!(c.sizes(), &[2, 4, 8]);
        assert!(c.validate().is_empty());
    }

    #[test]
    fn coskeleton_of_point() {
        let c = coskeleton(&SSet::terminal(0), 0, 3).unwrap();
        assert_eq!(c.sizes(), &[1, 1, 1, 1]);
    }

    #[test]
    fn product_with_point_is_identity_up_to_ids() {
        let x = Arc::new(delta(1, 2));
        let (p, _, p2) = product(&Arc::new(SSet::terminal(2)), &x).unwrap();
        assert_eq!(p.sizes(), x.sizes());
        assert!(p2.is_levelwise_bijective());
    }

    #[test]
    fn pi0_of_constant() {
        let p = pi0(&SSet::constant(2, 2)).unwrap();
        assert_eq!(p.classes, 2);
    }

    #[test]
    fn apply_seq_matches_faces_and_degeneracies() {
        let x = delta(3, 4);
        for s in 0..x.size(3) {
            assert_eq!(x.apply_seq(3, s, &[0, 1, 2]), x.face(3, 3, s));
            assert_eq!(x.apply_seq(3, s, &[0, 1, 1, 2, 3]), x.degen(3, 1, s));
        }
    }
}
