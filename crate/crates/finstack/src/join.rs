//! Joins, the cotensors `X^{S⋆}` and `Dec_n`, the boundary-relative object
//! used for higher morphism spaces, and expansion certificates.

use std::collections::HashSet;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{check_budget, Error, Result};
use crate::kan::{horn, RelHorn};
use crate::shapes::{mask_from_vertices, mask_vertices, Complex};
use crate::sset::{SMap, SSet};

/// Join of two simplicial sets truncated at `d`. A `k`-simplex is a simplex
/// of `s`, a simplex of `t`, or a pair `(σ, τ)` with `dim σ + dim τ + 1 = k`.
pub fn join(s: &SSet, t: &SSet, d: usize) -> Result<SSet> {
    if s.dim() < d.min(s.dim()) || s.dim() < d || t.dim() < d {
        return Err(Error::Truncation(format!("join up to {d} needs both factors to {d}")));
    }
    // (tag, p, a, b): tag 0 pure left, 1 pure right, 2 pair with dim σ = p.
    type El = (u8, usize, usize, usize);
    let mut levels: Vec<Vec<El>> = Vec::with_capacity(d + 1);
    for k in 0..=d {
        let mut lv: Vec<El> = Vec::new();
        lv.extend((0..s.size(k)).map(|a| (0, k, a, 0)));
        lv.extend((0..t.size(k)).map(|b| (1, k, 0, b)));
        for p in 0..k {
            let q = k - p - 1;
            for a in 0..s.size(p) {
                for b in 0..t.size(q) {
                    lv.push((2, p, a, b));
                }
            }
        }
        check_budget(k, lv.len())?;
        levels.push(lv);
    }
    let face = |k: usize, i: usize, e: &El| -> El {
        let &(tag, p, a, b) = e;
        match tag {
            0 => (0, k - 1, s.face(k, i, a), 0),
            1 => (1, k - 1, 0, t.face(k, i, b)),
            _ => {
                let q = k - p - 1;
                if i <= p {
                    if p == 0 {
                        (1, q, 0, b)
                    } else {
                        (2, p - 1, s.face(p, i, a), b)
                    }
                } else if q == 0 {
                    (0, p, a, 0)
                } else {
                    (2, p, a, t.face(q, i - p - 1, b))
                }
            }
        }
    };
    let degen = |k: usize, i: usize, e: &El| -> El {
        let &(tag, p, a, b) = e;
        match tag {
            0 => (0, k + 1, s.degen(k, i, a), 0),
            1 => (1, k + 1, 0, t.degen(k, i, b)),
            _ => {
                let q = k - p - 1;
                if i <= p {
                    (2, p + 1, s.degen(p, i, a), b)
                } else {
                    (2, p, a, t.degen(q, i - p - 1, b))
                }
            }
        }
    };
    SSet::from_model(levels, face, degen)
}

/// Vertex map of `1 ⋆ δ_i : S⋆Δ^{k-1} -> S⋆Δ^k`.
fn coface_theta(ns: usize, k: usize, i: usize) -> Vec<usize> {
    (0..ns + k).map(|v| if v < ns + i { v } else { v + 1 }).collect()
}

/// Vertex map of `1 ⋆ σ_i : S⋆Δ^{k+1} -> S⋆Δ^k`.
fn codegen_theta(ns: usize, k: usize, i: usize) -> Vec<usize> {
    (0..ns + k + 2).map(|v| if v <= ns + i { v } else { v - 1 }).collect()
}

/// `X^{S⋆}` truncated at `d`, for a shape `S`: level `k` is
/// `hom(S⋆Δ^k, X)`, elements listed as images of the simplices of the join.
pub fn cotensor_join(x: &SSet, shape: &Complex, d: usize) -> Result<SSet> {
    let ns = shape.nverts();
    let shapes: Vec<Complex> = (0..=d + 1).map(|k| shape.join(&Complex::simplex(k))).collect();
    let levels: Result<Vec<Vec<Vec<usize>>>> = (0..=d).map(|k| shapes[k].maps_into(x)).collect();
    let levels = levels?;
    let face = |k: usize, i: usize, m: &Vec<usize>| -> Vec<usize> {
        shapes[k].pull_back_map(&shapes[k - 1], &coface_theta(ns, k, i), x, m)
    };
    let degen = |k: usize, i: usize, m: &Vec<usize>| -> Vec<usize> {
        shapes[k].pull_back_map(&shapes[k + 1], &codegen_theta(ns, k, i), x, m)
    };
    SSet::from_model(levels, face, degen)
}

/// `Dec_n X = X^{Δ^{n-1}⋆}`; `n = 0` gives `X` back.
pub fn dec(x: &SSet, n: usize, d: usize) -> Result<SSet> {
    let shape = if n == 0 { Complex::empty(0) } else { Complex::simplex(n - 1) };
    cotensor_join(x, &shape, d)
}

/// `X^{∂Δ^{k-1}⋆} ×_{Y^{∂Δ^{k-1}⋆}} Y^{Δ^{k-1}⋆}` truncated at `d`, together
/// with the induced map `f^{∂Δ^{k-1}⋆}` from `X^{Δ^{k-1}⋆}`, whose level `ℓ`
/// is identified with `X_{k+ℓ}`.
#[derive(Clone, Debug)]
pub struct BoundaryStar {
    pub k: usize,
    /// `X^{Δ^{k-1}⋆}`, level `ℓ` indexed by `X_{k+ℓ}`.
    pub upper: Arc<SSet>,
    /// The relative object; elements are (boundary map, simplex of `Y`).
    pub lower: Arc<SSet>,
    pub elements: Vec<Vec<(Vec<usize>, usize)>>,
    pub map: SMap,
    /// `∂Δ^{k-1}⋆Δ^ℓ` for each level.
    pub shapes: Vec<Complex>,
}

/// The shifted simplicial set `ℓ ↦ X_{k+ℓ}` with `d_i, s_i` acting as
/// `d_{k+i}, s_{k+i}`; this is `X^{Δ^{k-1}⋆}` up to the Yoneda identification.
pub fn shifted(x: &SSet, k: usize, d: usize) -> Result<SSet> {
    if x.dim() < k + d {
        return Err(Error::Truncation(format!("shift by {k} to {d} needs data to {}", k + d)));
    }
    let sizes = (0..=d).map(|l| x.size(k + l)).collect();
    let faces = (0..=d)
        .map(|l| {
            if l == 0 {
                Vec::new()
            } else {
                (0..=l).map(|i| x.face_table(k + l, k + i).to_vec()).collect()
            }
        })
        .collect();
    let degens = (0..=d)
        .map(|l| {
            if l == d {
                Vec::new()
            } else {
                (0..=l).map(|i| x.degen_table(k + l, k + i).to_vec()).collect()
            }
        })
        .collect();
    SSet::from_tables(sizes, faces, degens, None)
}

pub fn boundary_star(f: &SMap, k: usize, d: usize) -> Result<BoundaryStar> {
    if k == 0 {
        return Err(Error::Invalid("boundary star needs k > 0".into()));
    }
    let (x, y) = (f.source(), f.target());
    if x.dim() < k + d {
        return Err(Error::Truncation(format!("needs source data to level {}", k + d)));
    }
    let ns = k;
    let bd = Complex::boundary_of_simplex_on(k);
    let shapes: Vec<Complex> = (0..=d + 1).map(|l| bd.join(&Complex::simplex(l))).collect();
    let mut elements = Vec::with_capacity(d + 1);
    for l in 0..=d {
        let n = k + l;
        let maps = shapes[l].maps_into(x)?;
        let verts: Vec<Vec<usize>> = shapes[l].simplices().iter().map(|&m| mask_vertices(m)).collect();
        let mut lv = Vec::new();
        for m in maps {
            for yy in 0..y.size(n) {
                let ok = verts.iter().enumerate().all(|(p, vs)| {
                    f.apply(vs.len() - 1, m[p]) == y.restrict(n, yy, vs)
                });
                if ok {
                    lv.push((m.clone(), yy));
                }
            }
        }
        check_budget(l, lv.len())?;
        elements.push(lv);
    }
    let face = |l: usize, i: usize, e: &(Vec<usize>, usize)| -> (Vec<usize>, usize) {
        (
            shapes[l].pull_back_map(&shapes[l - 1], &coface_theta(ns, l, i), x, &e.0),
            y.face(k + l, k + i, e.1),
        )
    };
    let degen = |l: usize, i: usize, e: &(Vec<usize>, usize)| -> (Vec<usize>, usize) {
        (
            shapes[l].pull_back_map(&shapes[l + 1], &codegen_theta(ns, l, i), x, &e.0),
            y.degen(k + l, k + i, e.1),
        )
    };
    let lower = Arc::new(SSet::from_model(elements.clone(), face, degen)?);
    let upper = Arc::new(shifted(x, k, d)?);
    let index: Vec<std::collections::HashMap<&(Vec<usize>, usize), usize>> = elements
        .iter()
        .map(|lv| lv.iter().enumerate().map(|(i, e)| (e, i)).collect())
        .collect();
    let mut comps = Vec::with_capacity(d + 1);
    for l in 0..=d {
        let n = k + l;
        let verts: Vec<Vec<usize>> = shapes[l].simplices().iter().map(|&m| mask_vertices(m)).collect();
        let mut c = Vec::with_capacity(x.size(n));
        for s in 0..x.size(n) {
            let m: Vec<usize> = verts.iter().map(|vs| x.restrict(n, s, vs)).collect();
            let e = (m, f.apply(n, s));
            c.push(*index[l].get(&e).ok_or_else(|| {
                Error::Invariant("restriction of a simplex is not in the boundary star".into())
            })?);
        }
        comps.push(c);
    }
    let map = SMap::new(upper.clone(), lower.clone(), comps)?;
    Ok(BoundaryStar {
        k,
        upper,
        lower,
        elements,
        map,
        shapes,
    })
}

impl Complex {
    /// `∂Δ^{k-1}` on `k` vertices; empty for `k = 1`.
    pub fn boundary_of_simplex_on(k: usize) -> Complex {
        if k == 1 {
            Complex::empty(1)
        } else {
            Complex::boundary(k - 1)
        }
    }
}

/// Outcome of comparing `Λ^ℓ_i(f^{∂Δ^{k-1}⋆})` with `Λ^{k+ℓ}_{k+i}(f)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct StarLReport {
    pub k: usize,
    pub l: usize,
    pub i: usize,
    pub left_size: usize,
    pub right_size: usize,
    pub bijective: bool,
    pub commutes: bool,
}

impl StarLReport {
    pub fn ok(&self) -> bool {
        self.bijective && self.commutes
    }
}

/// Checks the canonical map between the two horn objects elementwise: it
/// must be a bijection and intertwine the comparison maps from `X_{k+ℓ}`.
pub fn check_star_l(f: &SMap, k: usize, l: usize, i: usize) -> Result<StarLReport> {
    if l == 0 || i > l {
        return Err(Error::Invalid(format!("no horn Λ^{l}_{i}")));
    }
    let bs = boundary_star(f, k, l)?;
    let left: RelHorn = horn(&bs.map, l, i)?;
    let right: RelHorn = horn(f, k + l, k + i)?;
    let n = k + l;
    // Position of the face ∂_j Δ^n inside the shape ∂Δ^{k-1}⋆Δ^ℓ, for j < k.
    let full = (1u32 << (n + 1)) - 1;
    let pos: Vec<usize> = (0..k)
        .map(|j| bs.shapes[l].position(full & !(1 << j)).expect("face in join"))
        .collect();
    let mut image = vec![usize::MAX; left.len()];
    let mut bijective = true;
    let mut hit = vec![false; right.len()];
    for (id, t) in left.carrier.iter().enumerate() {
        // t = (a_j for j != i in 0..=l, b)
        let b = &bs.elements[l][t[l]];
        let mut key = Vec::with_capacity(n + 1);
        for j in 0..=n {
            if j == k + i {
                continue;
            }
            if j < k {
                key.push(b.0[pos[j]]);
            } else {
                let jj = j - k;
                let slot = if jj < i { jj } else { jj - 1 };
                key.push(t[slot]);
            }
        }
        key.push(b.1);
        match right.carrier.lookup(&key) {
            Some(r) => {
                if hit[r] {
                    bijective = false;
                }
                hit[r] = true;
                image[id] = r;
            }
            None => bijective = false,
        }
    }
    bijective &= hit.iter().all(|&h| h);
    let commutes = (0..f.source().size(n)).all(|s| {
        let a = left.comparison[s];
        image[a] == right.comparison[s]
    });
    Ok(StarLReport {
        k,
        l,
        i,
        left_size: left.len(),
        right_size: right.len(),
        bijective,
        commutes,
    })
}

/// One elementary expansion: attach the simplex with the given vertices
/// along its horn `Λ^n_i`, adding the simplex and its `i`-th face.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExpansionStep {
    pub n: usize,
    pub i: usize,
    pub attach: Vec<usize>,
}

pub type ExpansionCertificate = Vec<ExpansionStep>;

fn step_valid(cur: &HashSet<u32>, sigma: u32, i: usize) -> bool {
    let vs = mask_vertices(sigma);
    if vs.len() < 2 || cur.contains(&sigma) {
        return false;
    }
    let missing = sigma & !(1 << vs[i]);
    if cur.contains(&missing) {
        return false;
    }
    vs.iter()
        .enumerate()
        .filter(|&(j, _)| j != i)
        .all(|(_, &v)| cur.contains(&(sigma & !(1 << v))))
}

/// Searches for a sequence of elementary expansions from `s` to `t`, with
/// depth-first search and memoized dead ends. `None` means none exists.
pub fn find_expansion(s: &Complex, t: &Complex) -> Result<Option<ExpansionCertificate>> {
    if s.simplices().iter().any(|&m| !t.contains(m)) {
        return Err(Error::Invalid("source is not a subcomplex of the target".into()));
    }
    let extra: Vec<u32> = t.simplices().iter().copied().filter(|&m| !s.contains(m)).collect();
    let mut cur: HashSet<u32> = s.simplices().iter().copied().collect();
    let mut dead: HashSet<Vec<u32>> = HashSet::new();
    let mut steps = Vec::new();
    if expand_rec(&extra, &mut cur, &mut dead, &mut steps) {
        Ok(Some(steps))
    } else {
        Ok(None)
    }
}

fn expand_rec(
    extra: &[u32],
    cur: &mut HashSet<u32>,
    dead: &mut HashSet<Vec<u32>>,
    steps: &mut ExpansionCertificate,
) -> bool {
    let remaining: Vec<u32> = extra.iter().copied().filter(|m| !cur.contains(m)).collect();
    if remaining.is_empty() {
        return true;
    }
    if dead.contains(&remaining) {
        return false;
    }
    for &sigma in &remaining {
        let n = sigma.count_ones() as usize - 1;
        for i in 0..=n {
            if step_valid(cur, sigma, i) {
                let face = sigma & !(1 << mask_vertices(sigma)[i]);
                if !remaining.contains(&face) {
                    continue;
                }
                cur.insert(sigma);
                cur.insert(face);
                steps.push(ExpansionStep {
                    n,
                    i,
                    attach: mask_vertices(sigma),
                });
                if expand_rec(extra, cur, dead, steps) {
                    return true;
                }
                steps.pop();
                cur.remove(&sigma);
                cur.remove(&face);
            }
        }
    }
    dead.insert(remaining);
    false
}

/// Replays a certificate from `s`; returns the resulting complex's simplices
/// or an error naming the first invalid step.
pub fn replay(s: &Complex, cert: &[ExpansionStep]) -> Result<Vec<u32>> {
    let mut cur: HashSet<u32> = s.simplices().iter().copied().collect();
    for (idx, st) in cert.iter().enumerate() {
        let sigma = mask_from_vertices(&st.attach);
        if st.attach.len() != st.n + 1 || st.i > st.n || !step_valid(&cur, sigma, st.i) {
            return Err(Error::Invalid(format!("expansion step {idx} is not a horn filling")));
        }
        cur.insert(sigma);
        cur.insert(sigma & !(1 << st.attach[st.i]));
    }
    let mut out: Vec<u32> = cur.into_iter().collect();
    out.sort_by_key(|&m| (m.count_ones(), m));
    Ok(out)
}

/// A collapse certificate from the lowest vertex, if the complex is collapsible.
pub fn is_collapsible(t: &Complex) -> Result<Option<ExpansionCertificate>> {
    let Some(&v) = t.simplices().first() else {
        return Ok(None);
    };
    let start = Complex::generated(t.nverts(), &[v]);
    find_expansion(&start, t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{nerve, FinGroup, Groupoid};
    use crate::iso::find_iso;

    fn simplex_set(n: usize, d: usize) -> SSet {
        Complex::simplex(n).to_sset(d).unwrap()
    }

    #[test]
    fn edge_join_point_is_triangle() {
        let j = join(&simplex_set(1, 3), &simplex_set(0, 3), 3).unwrap();
        assert!(j.validate().is_empty());
        assert!(find_iso(&Arc::new(j), &Arc::new(simplex_set(2, 3))).unwrap().found());
    }

    #[test]
    fn join_is_associative_on_simplices() {
        let a = join(&join(&simplex_set(0, 3), &simplex_set(0, 3), 3).unwrap(), &simplex_set(0, 3), 3).unwrap();
        assert!(find_iso(&Arc::new(a), &Arc::new(simplex_set(2, 3))).unwrap().found());
    }

    #[test]
    fn join_of_shapes_gives_generalized_horns() {
        for k in 1..=3usize {
            for l in 1..=(4 - k) {
                for i in 0..=l {
                    let lhs = Complex::simplex(k - 1).join(&Complex::horn(l, i));
                    let js: Vec<usize> = (k..=k + l).filter(|&j| j != k + i).collect();
                    assert_eq!(lhs, Complex::horn_j(k + l, &js));
                }
                let lhs = Complex::boundary_of_simplex_on(k).join(&Complex::simplex(l));
                let js: Vec<usize> = (0..k).collect();
                assert_eq!(lhs, Complex::horn_j(k + l, &js));
            }
        }
    }

    #[test]
    fn cotensor_with_empty_shape_is_identity() {
        let x = nerve(&Groupoid::from_group(&FinGroup::cyclic(2)), 3).unwrap();
        let c = cotensor_join(&x, &Complex::empty(0), 3).unwrap();
        assert_eq!(c.sizes(), x.sizes());
        assert!(find_iso(&Arc::new(c), &Arc::new(x)).unwrap().found());
    }

    #[test]
    fn dec_shifts_levels() {
        let x = nerve(&Groupoid::from_group(&FinGroup::cyclic(2)), 4).unwrap();
        let d1 = dec(&x, 1, 3).unwrap();
        assert_eq!(d1.sizes(), &[2, 4, 8, 16]);
        assert!(d1.validate().is_empty());
        let d2 = dec(&x, 2, 2).unwrap();
        assert_eq!(d2.size(0), 4);
        let pt = dec(&SSet::terminal(4), 2, 2).unwrap();
        assert_eq!(pt.sizes(), &[1, 1, 1]);
    }

    #[test]
    fn horn_in_triangle_expands_in_one_step() {
        let c = find_expansion(&Complex::horn(2, 1), &Complex::simplex(2)).unwrap().unwrap();
        assert_eq!(c.len(), 1);
        assert_eq!(replay(&Complex::horn(2, 1), &c).unwrap(), Complex::simplex(2).simplices());
    }

    #[test]
    fn simplices_are_collapsible() {
        for k in 0..=4 {
            let t = Complex::simplex(k);
            let c = is_collapsible(&t).unwrap().unwrap();
            let start = Complex::generated(t.nverts(), &[1]);
            assert_eq!(replay(&start, &c).unwrap(), t.simplices());
        }
    }

    #[test]
    fn boundary_is_not_collapsible() {
        assert!(is_collapsible(&Complex::boundary(2)).unwrap().is_none());
    }
}
