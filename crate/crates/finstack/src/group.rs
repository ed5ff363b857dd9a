//! Finite groups and groupoids given by tables, their nerves, and recovery of
//! a groupoid from a simplicial set satisfying the horn conditions.

use std::collections::HashMap;
use std::hash::Hash;
use std::sync::Arc;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{check_budget, Error, Result};
use crate::sset::{SMap, SSet};

/// A finite group on `0..order` given by its multiplication table.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FinGroup {
    pub order: usize,
    pub mul: Vec<Vec<usize>>,
    pub inv: Vec<usize>,
    pub e: usize,
    pub abelian: bool,
}

impl FinGroup {
    /// Builds a group from a list of elements and a multiplication, checking
    /// the axioms exhaustively.
    pub fn from_elements<T: Clone + Eq + Hash + std::fmt::Debug>(
        elems: &[T],
        mul: impl Fn(&T, &T) -> T,
    ) -> Result<FinGroup> {
        let index: HashMap<&T, usize> = elems.iter().enumerate().map(|(i, t)| (t, i)).collect();
        let n = elems.len();
        let mut table = vec![vec![0; n]; n];
        for (a, x) in elems.iter().enumerate() {
            for (b, y) in elems.iter().enumerate() {
                let p = mul(x, y);
                table[a][b] = *index
                    .get(&p)
                    .ok_or_else(|| Error::Invalid(format!("product {p:?} not closed")))?;
            }
        }
        FinGroup::from_table(table)
    }

    /// Builds a group from a multiplication table; identity and inverses are
    /// derived and all axioms are checked.
    pub fn from_table(mul: Vec<Vec<usize>>) -> Result<FinGroup> {
        let n = mul.len();
        if n == 0 || mul.iter().any(|r| r.len() != n || r.iter().any(|&v| v >= n)) {
            return Err(Error::Invalid("multiplication table is not square".into()));
        }
        let e = (0..n)
            .find(|&e| (0..n).all(|a| mul[e][a] == a && mul[a][e] == a))
            .ok_or_else(|| Error::Invalid("no identity".into()))?;
        let mut inv = vec![0; n];
        for (a, slot) in inv.iter_mut().enumerate() {
            *slot = (0..n)
                .find(|&b| mul[a][b] == e && mul[b][a] == e)
                .ok_or_else(|| Error::Invalid(format!("{a} has no inverse")))?;
        }
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    if mul[mul[a][b]][c] != mul[a][mul[b][c]] {
                        return Err(Error::Invalid(format!("associativity fails at {a},{b},{c}")));
                    }
                }
            }
        }
        let abelian = (0..n).all(|a| (0..n).all(|b| mul[a][b] == mul[b][a]));
        Ok(FinGroup {
            order: n,
            mul,
            inv,
            e,
            abelian,
        })
    }

    /// Checks a deserialized group, including the declared abelian flag.
    pub fn validated(self) -> Result<FinGroup> {
        let g = FinGroup::from_table(self.mul.clone())?;
        if g.e != self.e || g.inv != self.inv || g.abelian != self.abelian {
            return Err(Error::Invalid(
                "identity, inverse table or abelian flag disagrees with the table".into(),
            ));
        }
        Ok(g)
    }

    #[inline]
    pub fn m(&self, a: usize, b: usize) -> usize {
        self.mul[a][b]
    }

    /// `ℤ/n` with addition.
    pub fn cyclic(n: usize) -> FinGroup {
        let elems: Vec<usize> = (0..n).collect();
        FinGroup::from_elements(&elems, |a, b| (a + b) % n).expect("cyclic group")
    }

    pub fn direct_product(a: &FinGroup, b: &FinGroup) -> FinGroup {
        let elems: Vec<(usize, usize)> = (0..a.order)
            .flat_map(|x| (0..b.order).map(move |y| (x, y)))
            .collect();
        FinGroup::from_elements(&elems, |p, q| (a.m(p.0, q.0), b.m(p.1, q.1))).expect("product")
    }

    /// `a^k` with coordinatewise multiplication; ids are base-`|a|` numerals
    /// with the first coordinate most significant.
    pub fn power(a: &FinGroup, k: usize) -> FinGroup {
        let n = a.order.pow(k as u32);
        let digits = |mut x: usize| -> Vec<usize> {
            let mut d = vec![0; k];
            for slot in d.iter_mut().rev() {
                *slot = x % a.order;
                x /= a.order;
            }
            d
        };
        let code = |d: &[usize]| d.iter().fold(0, |acc, &v| acc * a.order + v);
        let all: Vec<Vec<usize>> = (0..n).map(digits).collect();
        let mul = (0..n)
            .map(|x| {
                (0..n)
                    .map(|y| {
                        let z: Vec<usize> = all[x].iter().zip(&all[y]).map(|(&p, &q)| a.m(p, q)).collect();
                        code(&z)
                    })
                    .collect()
            })
            .collect();
        let inv = (0..n)
            .map(|x| code(&all[x].iter().map(|&p| a.inv[p]).collect::<Vec<_>>()))
            .collect();
        FinGroup {
            order: n,
            mul,
            inv,
            e: code(&vec![a.e; k]),
            abelian: a.abelian,
        }
    }

    /// The dihedral group of order `2n`.
    pub fn dihedral(n: usize) -> FinGroup {
        let elems: Vec<(usize, usize)> = (0..n).flat_map(|r| (0..2).map(move |s| (r, s))).collect();
        FinGroup::from_elements(&elems, |&(a, s), &(b, t)| {
            let b2 = if s == 0 { b } else { (n - b) % n };
            ((a + b2) % n, (s + t) % 2)
        })
        .expect("dihedral group")
    }

    /// The dicyclic group of order `4m` (quaternion group for `m = 2`).
    pub fn dicyclic(m: usize) -> FinGroup {
        let n = 2 * m;
        let elems: Vec<(usize, usize)> = (0..n).flat_map(|a| (0..2).map(move |x| (a, x))).collect();
        FinGroup::from_elements(&elems, |&(a, x), &(b, y)| match (x, y) {
            (0, _) => ((a + b) % n, y),
            (1, 0) => ((a + n - b) % n, 1),
            _ => ((a + n - b + m) % n, 0),
        })
        .expect("dicyclic group")
    }

    /// The group generated by permutations of `0..n`.
    pub fn permutations(generators: &[Vec<usize>]) -> FinGroup {
        let n = generators[0].len();
        let id: Vec<usize> = (0..n).collect();
        let compose = |p: &Vec<usize>, q: &Vec<usize>| -> Vec<usize> { (0..n).map(|i| p[q[i]]).collect() };
        let mut elems = vec![id];
        let mut seen: std::collections::HashSet<Vec<usize>> = elems.iter().cloned().collect();
        let mut i = 0;
        while i < elems.len() {
            for g in generators {
                let p = compose(&elems[i], g);
                if seen.insert(p.clone()) {
                    elems.push(p);
                }
            }
            i += 1;
        }
        FinGroup::from_elements(&elems, compose).expect("permutation group")
    }

    pub fn symmetric3() -> FinGroup {
        FinGroup::permutations(&[vec![1, 0, 2], vec![1, 2, 0]])
    }

    pub fn alternating4() -> FinGroup {
        FinGroup::permutations(&[vec![1, 2, 0, 3], vec![1, 0, 3, 2]])
    }

    /// Orders of elements, sorted; an isomorphism invariant.
    pub fn order_profile(&self) -> Vec<usize> {
        let mut v: Vec<usize> = (0..self.order)
            .map(|g| {
                let mut x = g;
                let mut k = 1;
                while x != self.e {
                    x = self.m(x, g);
                    k += 1;
                }
                k
            })
            .collect();
        v.sort_unstable();
        v
    }
}

/// One representative of every isomorphism class of groups of order at most 12.
pub fn groups_up_to_12() -> Vec<(String, FinGroup)> {
    let c = FinGroup::cyclic;
    let p = |a: FinGroup, b: FinGroup| FinGroup::direct_product(&a, &b);
    vec![
        ("C1".into(), c(1)),
        ("C2".into(), c(2)),
        ("C3".into(), c(3)),
        ("C4".into(), c(4)),
        ("C2xC2".into(), p(c(2), c(2))),
        ("C5".into(), c(5)),
        ("C6".into(), c(6)),
        ("S3".into(), FinGroup::symmetric3()),
        ("C7".into(), c(7)),
        ("C8".into(), c(8)),
        ("C4xC2".into(), p(c(4), c(2))),
        ("C2xC2xC2".into(), p(p(c(2), c(2)), c(2))),
        ("D4".into(), FinGroup::dihedral(4)),
        ("Q8".into(), FinGroup::dicyclic(2)),
        ("C9".into(), c(9)),
        ("C3xC3".into(), p(c(3), c(3))),
        ("C10".into(), c(10)),
        ("D5".into(), FinGroup::dihedral(5)),
        ("C11".into(), c(11)),
        ("C12".into(), c(12)),
        ("C6xC2".into(), p(c(6), c(2))),
        ("D6".into(), FinGroup::dihedral(6)),
        ("A4".into(), FinGroup::alternating4()),
        ("Dic3".into(), FinGroup::dicyclic(3)),
    ]
}

/// A finite groupoid: objects `0..objects`, morphisms `0..src.len()`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Groupoid {
    pub objects: usize,
    pub src: Vec<usize>,
    pub tgt: Vec<usize>,
    /// Identity morphism of each object.
    pub unit: Vec<usize>,
    /// `comp[g][h]` is "g then h" when `tgt g = src h`.
    pub comp: Vec<Vec<Option<usize>>>,
    pub inv: Vec<usize>,
}

impl Groupoid {
    /// A group as a one-object groupoid; morphism ids are group elements.
    pub fn from_group(g: &FinGroup) -> Groupoid {
        let n = g.order;
        Groupoid {
            objects: 1,
            src: vec![0; n],
            tgt: vec![0; n],
            unit: vec![g.e],
            comp: (0..n).map(|a| (0..n).map(|b| Some(g.m(a, b))).collect()).collect(),
            inv: g.inv.clone(),
        }
    }

    /// Connected groupoid on `m` objects with vertex group `h`; the morphism
    /// `(a, b, x)` goes from `a` to `b`.
    pub fn transitive(m: usize, h: &FinGroup) -> Groupoid {
        let mut mors = Vec::new();
        for a in 0..m {
            for b in 0..m {
                for x in 0..h.order {
                    mors.push((a, b, x));
                }
            }
        }
        let id_of = |a: usize, b: usize, x: usize| (a * m + b) * h.order + x;
        let n = mors.len();
        let mut comp = vec![vec![None; n]; n];
        for (g, &(a, b, x)) in mors.iter().enumerate() {
            for (k, &(b2, c, y)) in mors.iter().enumerate() {
                if b == b2 {
                    comp[g][k] = Some(id_of(a, c, h.m(x, y)));
                }
            }
        }
        Groupoid {
            objects: m,
            src: mors.iter().map(|t| t.0).collect(),
            tgt: mors.iter().map(|t| t.1).collect(),
            unit: (0..m).map(|a| id_of(a, a, h.e)).collect(),
            comp,
            inv: mors.iter().map(|&(a, b, x)| id_of(b, a, h.inv[x])).collect(),
        }
    }

    /// Disjoint union.
    pub fn disjoint_union(parts: &[Groupoid]) -> Groupoid {
        let mut out = Groupoid {
            objects: 0,
            src: Vec::new(),
            tgt: Vec::new(),
            unit: Vec::new(),
            comp: Vec::new(),
            inv: Vec::new(),
        };
        let total: usize = parts.iter().map(|p| p.src.len()).sum();
        let (mut ob, mut mo) = (0, 0);
        for p in parts {
            out.src.extend(p.src.iter().map(|&s| s + ob));
            out.tgt.extend(p.tgt.iter().map(|&s| s + ob));
            out.unit.extend(p.unit.iter().map(|&u| u + mo));
            out.inv.extend(p.inv.iter().map(|&u| u + mo));
            for row in &p.comp {
                let mut r = vec![None; total];
                for (h, c) in row.iter().enumerate() {
                    r[h + mo] = c.map(|c| c + mo);
                }
                out.comp.push(r);
            }
            ob += p.objects;
            mo += p.src.len();
        }
        out.objects = ob;
        out
    }

    pub fn morphisms(&self) -> usize {
        self.src.len()
    }

    /// Exhaustive check of the groupoid axioms.
    pub fn check(&self) -> Result<()> {
        let n = self.morphisms();
        let bad = |m: &str| Err(Error::Invalid(m.to_string()));
        if self.tgt.len() != n || self.comp.len() != n || self.inv.len() != n {
            return bad("table lengths differ");
        }
        if self.unit.len() != self.objects {
            return bad("one unit per object required");
        }
        for g in 0..n {
            for h in 0..n {
                let defined = self.tgt[g] == self.src[h];
                match self.comp[g][h] {
                    Some(c) if defined => {
                        if self.src[c] != self.src[g] || self.tgt[c] != self.tgt[h] {
                            return bad("composite has wrong endpoints");
                        }
                    }
                    None if !defined => {}
                    _ => return bad("composition defined exactly on composable pairs"),
                }
            }
            let (s, t) = (self.src[g], self.tgt[g]);
            if self.comp[self.unit[s]][g] != Some(g) || self.comp[g][self.unit[t]] != Some(g) {
                return bad("unit law fails");
            }
            if self.comp[g][self.inv[g]] != Some(self.unit[s])
                || self.comp[self.inv[g]][g] != Some(self.unit[t])
            {
                return bad("inverse law fails");
            }
        }
        for g in 0..n {
            for h in 0..n {
                if let Some(gh) = self.comp[g][h] {
                    for k in 0..n {
                        if let Some(hk) = self.comp[h][k] {
                            if self.comp[gh][k] != self.comp[g][hk] {
                                return bad("associativity fails");
                            }
                        }
                    }
                }
            }
        }
        Ok(())
    }
}

/// A seeded random groupoid: a disjoint union of transitive groupoids with
/// small vertex groups.
pub fn random_groupoid(seed: u64) -> Groupoid {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let small: Vec<FinGroup> = vec![
        FinGroup::cyclic(1),
        FinGroup::cyclic(2),
        FinGroup::cyclic(3),
        FinGroup::direct_product(&FinGroup::cyclic(2), &FinGroup::cyclic(2)),
        FinGroup::symmetric3(),
    ];
    let comps = rng.gen_range(1..=3);
    let parts: Vec<Groupoid> = (0..comps)
        .map(|_| {
            let m = rng.gen_range(1..=3);
            let h = &small[rng.gen_range(0..if m == 1 { small.len() } else { 3 })];
            Groupoid::transitive(m, h)
        })
        .collect();
    Groupoid::disjoint_union(&parts)
}

/// The nerve truncated at `d`. `k`-simplices are composable strings
/// `(g_1, ..., g_k)`; `d_0` drops the first arrow, `d_k` the last, and inner
/// faces compose neighbours.
pub fn nerve(g: &Groupoid, d: usize) -> Result<SSet> {
    let n = g.morphisms();
    let mut levels: Vec<Vec<Vec<usize>>> = vec![(0..g.objects).map(|o| vec![o]).collect()];
    if d >= 1 {
        levels.push((0..n).map(|m| vec![m]).collect());
    }
    for k in 2..=d {
        let mut lv = Vec::new();
        for s in &levels[k - 1] {
            let last = *s.last().expect("nonempty string");
            for h in 0..n {
                if g.tgt[last] == g.src[h] {
                    let mut t = s.clone();
                    t.push(h);
                    lv.push(t);
                }
            }
        }
        check_budget(k, lv.len())?;
        levels.push(lv);
    }
    let face = |k: usize, i: usize, s: &Vec<usize>| -> Vec<usize> {
        if k == 1 {
            return vec![if i == 0 { g.tgt[s[0]] } else { g.src[s[0]] }];
        }
        let mut t = s.clone();
        if i == 0 {
            t.remove(0);
        } else if i == k {
            t.pop();
        } else {
            let c = g.comp[s[i - 1]][s[i]].expect("composable");
            t[i - 1] = c;
            t.remove(i);
        }
        t
    };
    let degen = |k: usize, i: usize, s: &Vec<usize>| -> Vec<usize> {
        if k == 0 {
            return vec![g.unit[s[0]]];
        }
        let v = if i < k { g.src[s[i]] } else { g.tgt[s[k - 1]] };
        let mut t = s.clone();
        t.insert(i, g.unit[v]);
        t
    };
    Ok(SSet::from_model(levels, face, degen)?.with_coskeletal_above(Some(2)))
}

/// Reads a groupoid off a simplicial set whose `λ^2_1` is bijective:
/// objects are vertices, morphisms are edges, `d_1` is the source, `d_0` the
/// target, and composites are `d_1` of the unique `Λ^2_1` fillers.
pub fn extract_groupoid(x: &SSet) -> Result<Groupoid> {
    if x.dim() < 2 {
        return Err(Error::Truncation("extraction needs level 2".into()));
    }
    let n = x.size(1);
    let mut filler: HashMap<(usize, usize), usize> = HashMap::new();
    for s in 0..x.size(2) {
        let key = (x.face(2, 2, s), x.face(2, 0, s));
        if filler.insert(key, s).is_some() {
            return Err(Error::Invalid("two fillers for one Λ^2_1 horn".into()));
        }
    }
    let src: Vec<usize> = (0..n).map(|e| x.face(1, 1, e)).collect();
    let tgt: Vec<usize> = (0..n).map(|e| x.face(1, 0, e)).collect();
    let unit: Vec<usize> = (0..x.size(0)).map(|v| x.degen(0, 0, v)).collect();
    let mut comp = vec![vec![None; n]; n];
    for g in 0..n {
        for h in 0..n {
            if tgt[g] == src[h] {
                let s = filler
                    .get(&(g, h))
                    .ok_or_else(|| Error::Invalid("Λ^2_1 horn without filler".into()))?;
                comp[g][h] = Some(x.face(2, 1, *s));
            }
        }
    }
    let mut inv = vec![0; n];
    for g in 0..n {
        inv[g] = (0..n)
            .find(|&h| comp[g][h] == Some(unit[src[g]]))
            .ok_or_else(|| Error::Invalid("edge without inverse".into()))?;
    }
    let out = Groupoid {
        objects: x.size(0),
        src,
        tgt,
        unit,
        comp,
        inv,
    };
    out.check()?;
    Ok(out)
}

/// The spine map `X -> N(extract X)`: each simplex goes to its string of
/// consecutive edges.
pub fn spine_map(x: &Arc<SSet>, g: &Groupoid) -> Result<SMap> {
    let nv = Arc::new(nerve(g, x.dim())?);
    let index: Vec<HashMap<Vec<usize>, usize>> = (0..=x.dim())
        .map(|k| {
            let mut m = HashMap::new();
            for s in 0..nv.size(k) {
                m.insert(spine(&nv, k, s), s);
            }
            m
        })
        .collect();
    let comps: Result<Vec<Vec<usize>>> = (0..=x.dim())
        .map(|k| {
            (0..x.size(k))
                .map(|s| {
                    index[k]
                        .get(&spine(x, k, s))
                        .copied()
                        .ok_or_else(|| Error::Invalid("spine is not a simplex of the nerve".into()))
                })
                .collect()
        })
        .collect();
    SMap::new(x.clone(), nv, comps?)
}

/// The map of nerves induced by a functor, given on objects and morphisms.
pub fn functor_map(
    src: &Arc<SSet>,
    tgt: &Arc<SSet>,
    on_objects: &[usize],
    on_morphisms: &[usize],
) -> Result<SMap> {
    let d = src.dim();
    let index: Vec<HashMap<Vec<usize>, usize>> = (0..=d)
        .map(|k| (0..tgt.size(k)).map(|s| (spine(tgt, k, s), s)).collect())
        .collect();
    let mut comps = Vec::with_capacity(d + 1);
    for (k, idx) in index.iter().enumerate() {
        let mut c = Vec::with_capacity(src.size(k));
        for s in 0..src.size(k) {
            let sp = spine(src, k, s);
            let img: Vec<usize> = if k == 0 {
                vec![on_objects[sp[0]]]
            } else {
                sp.iter().map(|&e| on_morphisms[e]).collect()
            };
            c.push(
                *idx.get(&img)
                    .ok_or_else(|| Error::Invalid("assignment is not a functor".into()))?,
            );
        }
        comps.push(c);
    }
    let m = SMap::new(src.clone(), tgt.clone(), comps)?;
    m.ensure_simplicial()?;
    Ok(m)
}

/// The nerve map of a group homomorphism.
pub fn hom_map(g: &FinGroup, h: &FinGroup, phi: &[usize], d: usize) -> Result<SMap> {
    let a = Arc::new(nerve(&Groupoid::from_group(g), d)?);
    let b = Arc::new(nerve(&Groupoid::from_group(h), d)?);
    functor_map(&a, &b, &[0], phi)
}

fn spine(x: &SSet, k: usize, s: usize) -> Vec<usize> {
    if k == 0 {
        return vec![s];
    }
    (1..=k).map(|j| x.restrict(k, s, &[j - 1, j])).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalog_has_distinct_groups() {
        let cat = groups_up_to_12();
        assert_eq!(cat.len(), 24);
        let mut seen = std::collections::HashSet::new();
        for (_, g) in &cat {
            assert!(g.order <= 12);
            seen.insert((g.order, g.abelian, g.order_profile()));
        }
        // C4xC2 and D4-like profiles are still distinguished by the abelian flag.
        assert_eq!(seen.len(), 24);
    }

    #[test]
    fn nerve_of_z2_has_powers_of_two() {
        let n = nerve(&Groupoid::from_group(&FinGroup::cyclic(2)), 4).unwrap();
        assert_eq!(n.sizes(), &[1, 2, 4, 8, 16]);
        assert!(n.validate().is_empty());
    }

    #[test]
    fn trivial_group_nerve_is_point() {
        let n = nerve(&Groupoid::from_group(&FinGroup::cyclic(1)), 3).unwrap();
        assert_eq!(n.sizes(), &[1, 1, 1, 1]);
    }

    #[test]
    fn random_groupoids_satisfy_axioms() {
        for s in 0..10 {
            random_groupoid(s).check().unwrap();
        }
    }

    #[test]
    fn extraction_recovers_z3() {
        let g = Groupoid::from_group(&FinGroup::cyclic(3));
        let x = nerve(&g, 3).unwrap();
        assert_eq!(extract_groupoid(&x).unwrap(), g);
    }
}
