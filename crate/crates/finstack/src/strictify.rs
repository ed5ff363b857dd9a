//! The n-strictification `τ_n(f)` of an ∞-stack: level `n` is divided by
//! `π₀` of `P^{≥n}(f)`, level `n+1` is the horn object `Λ^{n+1}_1`, and the
//! remaining levels are coskeletal relative to the base.

use std::collections::HashMap;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::iso::{find_iso_over, IsoSearch, DEFAULT_NODE_LIMIT};
use crate::kan::{classify, horn, Kind, Nat, RelHorn, Verdict};
use crate::path_space::path_space;
use crate::sset::{enumerate_tuples, pi0, relative_coskeleton, LowerData, Pi0, SMap, SSet};

/// `τ_n(f) : τ_n(X,f) -> Y` together with the data it was built from.
#[derive(Clone, Debug)]
pub struct Strictification {
    pub n: usize,
    /// The input truncated at `n+2`.
    pub input: SMap,
    /// Components of `P^{≥n}(f)`; `quotient.map` is indexed by `X_n`.
    pub quotient: Pi0,
    /// `τ_n(f)`, truncated at `n+2` and coskeletal above `n+1`.
    pub assembled: SMap,
    /// The canonical map `X -> τ_n(X,f)` over `Y`.
    pub comparison: SMap,
}

impl Strictification {
    /// `q : X_n -> τ_n(X,f)_n`.
    pub fn quotient_map(&self) -> &[usize] {
        &self.quotient.map
    }

    pub fn strict(&self) -> &Arc<SSet> {
        self.assembled.source()
    }
}

/// Builds a table on `len` elements from `(key, value)` pairs, failing if a
/// key receives two values or no value at all.
fn lift_table(len: usize, pairs: impl Iterator<Item = (usize, usize, usize)>, what: &str) -> Result<(Vec<usize>, usize)> {
    let mut table = vec![usize::MAX; len];
    let mut first = vec![usize::MAX; len];
    let mut lifts = 0;
    for (x, key, val) in pairs {
        lifts += 1;
        if table[key] == usize::MAX {
            table[key] = val;
            first[key] = x;
        } else if table[key] != val {
            return Err(Error::Invariant(format!(
                "{what} depends on the lift: simplices {} and {x} disagree",
                first[key]
            )));
        }
    }
    if let Some(h) = table.iter().position(|&v| v == usize::MAX) {
        return Err(Error::Invariant(format!("{what}: element {h} has no lift")));
    }
    Ok((table, lifts))
}

/// Computes `τ_n(f)`. Needs `f` to be an ∞-stack with data to level `n+2`.
pub fn strictify(f: &SMap, n: usize) -> Result<Strictification> {
    let top = n + 2;
    if f.source().dim() < top || f.target().dim() < top {
        return Err(Error::Truncation(format!("strictification at {n} needs data to level {top}")));
    }
    let f = f.truncate(top)?;
    if let Verdict::Fail(w) = classify(&f, Nat::Inf, Kind::Stack)? {
        return Err(Error::Rejected {
            reason: "not an ∞-stack".into(),
            witness: Box::new(w),
        });
    }
    let x = f.source();
    let y = f.target();

    let p = path_space(&f, n, 1)?;
    let comps = pi0(&p.carrier)?;
    let mut q = vec![usize::MAX; x.size(n)];
    for (pos, &s) in p.embed[0].iter().enumerate() {
        q[s] = comps.map[pos];
    }
    if q.contains(&usize::MAX) {
        return Err(Error::Invariant("vertex of P^{≥n} missing".into()));
    }
    let quotient = Pi0 {
        classes: comps.classes,
        map: q.clone(),
    };
    let tn = quotient.classes;
    let mut rep = vec![usize::MAX; tn];
    for (s, &c) in q.iter().enumerate().rev() {
        rep[c] = s;
    }

    // Levels below n and the quotient level.
    let mut sizes: Vec<usize> = (0..n).map(|k| x.size(k)).collect();
    sizes.push(tn);
    let mut faces: Vec<Vec<Vec<usize>>> = (0..n)
        .map(|k| (0..if k == 0 { 0 } else { k + 1 }).map(|i| x.face_table(k, i).to_vec()).collect())
        .collect();
    let mut degens: Vec<Vec<Vec<usize>>> = (0..n.saturating_sub(1))
        .map(|k| (0..=k).map(|i| x.degen_table(k, i).to_vec()).collect())
        .collect();
    let mut fcomps: Vec<Vec<usize>> = (0..n).map(|k| f.component(k).to_vec()).collect();
    let descend = |table: &[usize], what: &str| -> Result<Vec<usize>> {
        let out: Vec<usize> = rep.iter().map(|&r| table[r]).collect();
        match (0..x.size(n)).find(|&s| out[q[s]] != table[s]) {
            Some(s) => Err(Error::Invariant(format!("{what} not constant on the class of {s}"))),
            None => Ok(out),
        }
    };
    let fn_ = descend(f.component(n), "base map")?;
    if n > 0 {
        let fl: Result<Vec<Vec<usize>>> = (0..=n).map(|i| descend(x.face_table(n, i), "face")).collect();
        faces.push(fl?);
        degens.push((0..n).map(|i| x.degen_table(n - 1, i).iter().map(|&s| q[s]).collect()).collect());
    } else {
        faces.push(Vec::new());
    }
    fcomps.push(fn_);

    // Level n+1: the horn object Λ^{n+1}_1 of the truncated map.
    let k1 = n + 1;
    let js: Vec<usize> = (0..=k1).filter(|&j| j != 1).collect();
    let ts = {
        let ld = LowerData {
            xsize: tn,
            xfaces: if k1 >= 2 { faces[n].iter().map(|t| t.as_slice()).collect() } else { Vec::new() },
            fmap: &fcomps[n],
            ysize: y.size(k1),
            yfaces: (0..=k1).map(|j| y.face_table(k1, j)).collect(),
        };
        enumerate_tuples(&ld, k1, &js)?
    };
    let mut key = Vec::with_capacity(js.len() + 1);
    let c1: Result<Vec<usize>> = (0..x.size(k1))
        .map(|s| {
            key.clear();
            key.extend(js.iter().map(|&j| q[x.face(k1, j, s)]));
            key.push(f.apply(k1, s));
            ts.lookup(&key)
                .ok_or_else(|| Error::Invariant(format!("simplex {s} has no horn image")))
        })
        .collect();
    let c1 = c1?;
    let (d1, _) = lift_table(
        ts.len(),
        (0..x.size(k1)).map(|s| (s, c1[s], q[x.face(k1, 1, s)])),
        "missing face d_1",
    )?;
    let level_faces: Vec<Vec<usize>> = (0..=k1)
        .map(|j| {
            if j == 1 {
                d1.clone()
            } else {
                let p = if j == 0 { 0 } else { j - 1 };
                (0..ts.len()).map(|t| ts.get(t)[p]).collect()
            }
        })
        .collect();
    let mut sdeg = Vec::with_capacity(k1);
    for j in 0..=n {
        let table: Vec<usize> = rep.iter().map(|&r| c1[x.degen(n, j, r)]).collect();
        if let Some(s) = (0..x.size(n)).find(|&s| table[q[s]] != c1[x.degen(n, j, s)]) {
            return Err(Error::Invariant(format!("degeneracy s_{j} not constant on the class of {s}")));
        }
        sdeg.push(table);
    }
    degens.push(sdeg);
    degens.push(Vec::new());
    faces.push(level_faces);
    sizes.push(ts.len());
    fcomps.push((0..ts.len()).map(|t| ts.get(t)[js.len()]).collect());

    let low = SSet::from_tables(sizes, faces, degens, None)?;
    if let Some(v) = low.validate().first() {
        return Err(Error::Invariant(format!("strictified levels fail {v:?}")));
    }
    let low_map = SMap::new(Arc::new(low), y.clone(), fcomps)?;
    let assembled = relative_coskeleton(&low_map, k1, top)?;
    let t = assembled.source().clone();

    // The comparison X -> τ_n(X,f).
    let mut cc: Vec<Vec<usize>> = (0..n).map(|k| (0..x.size(k)).collect()).collect();
    cc.push(q);
    cc.push(c1);
    let index: HashMap<Vec<usize>, usize> = (0..t.size(top))
        .map(|s| {
            let mut b: Vec<usize> = (0..=top).map(|i| t.face(top, i, s)).collect();
            b.push(assembled.apply(top, s));
            (b, s)
        })
        .collect();
    let c2: Result<Vec<usize>> = (0..x.size(top))
        .map(|s| {
            let mut b: Vec<usize> = (0..=top).map(|i| cc[k1][x.face(top, i, s)]).collect();
            b.push(f.apply(top, s));
            index
                .get(&b)
                .copied()
                .ok_or_else(|| Error::Invariant(format!("simplex {s} has no image in τ_n")))
        })
        .collect();
    cc.push(c2?);
    let comparison = SMap::new(x.clone(), t, cc)?;
    comparison.ensure_simplicial()?;
    Ok(Strictification {
        n,
        input: f,
        quotient,
        assembled,
        comparison,
    })
}

/// The missing face `d_i : Λ^{n+1}_i(τ_n(f)) -> τ_n(X,f)_n`.
#[derive(Clone, Debug)]
pub struct MissingFace {
    pub i: usize,
    pub horn: RelHorn,
    /// Value on each carrier element of `horn`.
    pub table: Vec<usize>,
    /// Number of `(n+1)`-simplices of `X` whose `q∘d_i` was compared.
    pub lifts_checked: usize,
}

/// Lifts every horn element through `X_{n+1}` and applies `q∘d_i`, checking
/// that the value does not depend on the lift.
pub fn missing_face(s: &Strictification, i: usize) -> Result<MissingFace> {
    let k1 = s.n + 1;
    if i > k1 {
        return Err(Error::Invalid(format!("no face d_{i} in degree {k1}")));
    }
    let h = horn(&s.assembled, k1, i)?;
    let x = s.input.source();
    let q = s.quotient_map();
    let (table, lifts_checked) = lift_table(
        h.len(),
        (0..x.size(k1)).map(|e| (e, h.comparison[s.comparison.apply(k1, e)], q[x.face(k1, i, e)])),
        "missing face",
    )?;
    Ok(MissingFace {
        i,
        horn: h,
        table,
        lifts_checked,
    })
}

/// Elementwise check of the identities relating the sections `(1,d_1)` and
/// `(1,d_i)` of the face-dropping maps out of `M_{n+1}(τ_n(f))`.
pub fn check_inverse_laws(s: &Strictification, i: usize) -> Result<bool> {
    let k1 = s.n + 1;
    let mf = missing_face(s, i)?;
    let t = s.strict();
    let drop = |full: &[usize], j: usize| -> Vec<usize> {
        full.iter()
            .enumerate()
            .filter(|&(p, _)| p != j)
            .map(|(_, &v)| v)
            .collect()
    };
    let fill = |h: &[usize], val: usize| -> Vec<usize> {
        let mut full = h.to_vec();
        full.insert(i, val);
        full
    };
    let boundary = |e: usize| -> Vec<usize> {
        let mut b: Vec<usize> = (0..=k1).map(|j| t.face(k1, j, e)).collect();
        b.push(s.assembled.apply(k1, e));
        b
    };
    let one = horn(&s.assembled, k1, 1)?;
    let mut by_horn1 = vec![usize::MAX; one.len()];
    for (e, &c) in one.comparison.iter().enumerate() {
        by_horn1[c] = e;
    }
    // (1,d_1) ∘ d_1̂ ∘ (1,d_i) = (1,d_i)
    for h in 0..mf.horn.len() {
        let full = fill(mf.horn.carrier.get(h), mf.table[h]);
        let Some(c) = one.carrier.lookup(&drop(&full, 1)) else {
            return Ok(false);
        };
        let e = by_horn1[c];
        if e == usize::MAX || boundary(e) != full {
            return Ok(false);
        }
    }
    // (1,d_i) ∘ d_î ∘ (1,d_1) = (1,d_1), and d_1̂ ∘ (1,d_1) = id
    for e in 0..t.size(k1) {
        let full = boundary(e);
        if one.carrier.lookup(&drop(&full, 1)) != Some(one.comparison[e]) {
            return Ok(false);
        }
        match mf.horn.carrier.lookup(&drop(&full, i)) {
            Some(h) if fill(mf.horn.carrier.get(h), mf.table[h]) == full => {}
            _ => return Ok(false),
        }
    }
    Ok(true)
}

/// Comparison of `f` with `τ_n(f)`: they are isomorphic exactly when `f` is
/// an n-stack.
#[derive(Clone, Debug)]
pub struct StackComparison {
    pub is_stack: Verdict,
    /// Whether the canonical map `X -> τ_n(X,f)` is a levelwise bijection.
    pub canonical_bijective: bool,
    pub iso: IsoSearch,
}

impl StackComparison {
    pub fn consistent(&self) -> bool {
        match (&self.is_stack, &self.iso) {
            (Verdict::Pass, IsoSearch::Found(_)) => self.canonical_bijective,
            (Verdict::Fail(_), IsoSearch::NoIso) => !self.canonical_bijective,
            _ => false,
        }
    }
}

pub fn compare_with_input(s: &Strictification) -> Result<StackComparison> {
    Ok(StackComparison {
        is_stack: classify(&s.input, Nat::Fin(s.n), Kind::Stack)?,
        canonical_bijective: s.comparison.is_levelwise_bijective(),
        iso: find_iso_over(&s.input, &s.assembled, DEFAULT_NODE_LIMIT)?,
    })
}

/// Consequences of strictifying a hypercover.
#[derive(Clone, Debug)]
pub struct HypercoverReport {
    /// `τ_n(f)` is an n-hypercover.
    pub strict_is_hypercover: Verdict,
    /// `X -> τ_n(X,f)` is a hypercover.
    pub comparison_is_hypercover: Verdict,
    /// `τ_n(X,f)` against the relative coskeleton of `f` below level `n`.
    pub coskeleton_iso: IsoSearch,
}

impl HypercoverReport {
    pub fn all_pass(&self) -> bool {
        self.strict_is_hypercover.is_pass() && self.comparison_is_hypercover.is_pass() && self.coskeleton_iso.found()
    }
}

/// The relative coskeleton `Csk_{n-1}(X) ×_{Csk_{n-1}(Y)} Y`, with `Y` itself
/// for `n = 0`.
fn coskeleton_below(f: &SMap, n: usize, d: usize) -> Result<SMap> {
    if n == 0 {
        Ok(SMap::identity(Arc::new(f.target().truncate(d)?)))
    } else {
        relative_coskeleton(f, n - 1, d)
    }
}

pub fn strictify_hypercover_check(f: &SMap, n: usize) -> Result<(Strictification, HypercoverReport)> {
    if let Verdict::Fail(w) = classify(f, Nat::Inf, Kind::Hypercover)? {
        return Err(Error::Rejected {
            reason: "not a hypercover".into(),
            witness: Box::new(w),
        });
    }
    let s = strictify(f, n)?;
    let reference = coskeleton_below(&s.input, n, n + 2)?;
    let report = HypercoverReport {
        strict_is_hypercover: classify(&s.assembled, Nat::Fin(n), Kind::Hypercover)?,
        comparison_is_hypercover: classify(&s.comparison, Nat::Inf, Kind::Hypercover)?,
        coskeleton_iso: find_iso_over(&s.assembled, &reference, DEFAULT_NODE_LIMIT)?,
    };
    Ok((s, report))
}

/// `τ_n(τ_n(f)) ≅ τ_n(f)` through the canonical map.
pub fn check_idempotent(s: &Strictification) -> Result<bool> {
    let again = strictify(&s.assembled, s.n)?;
    Ok(again.comparison.is_levelwise_bijective()
        && find_iso_over(&s.assembled, &again.assembled, DEFAULT_NODE_LIMIT)?.found())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::cech_nerve;
    use crate::group::{nerve, FinGroup, Groupoid};

    fn nerve_map(g: &Groupoid, d: usize) -> SMap {
        SMap::to_terminal(Arc::new(nerve(g, d).unwrap()))
    }

    #[test]
    fn cech_nerve_strictifies_to_point() {
        let f = cech_nerve(&[0, 0, 0], 1, 2).unwrap();
        let s = strictify(&f, 0).unwrap();
        assert_eq!(s.strict().sizes(), &[1, 1, 1]);
        let (_, r) = strictify_hypercover_check(&f, 0).unwrap();
        assert!(r.all_pass());
    }

    #[test]
    fn groupoid_nerve_is_its_own_one_strictification() {
        let g = Groupoid::transitive(2, &FinGroup::cyclic(3));
        let f = nerve_map(&g, 3);
        let s = strictify(&f, 1).unwrap();
        let c = compare_with_input(&s).unwrap();
        assert!(c.consistent());
        assert!(c.is_stack.is_pass());
    }

    #[test]
    fn zero_strictification_of_a_group_nerve_is_a_point() {
        let f = nerve_map(&Groupoid::from_group(&FinGroup::cyclic(3)), 2);
        let s = strictify(&f, 0).unwrap();
        assert_eq!(s.strict().sizes(), &[1, 1, 1]);
        let c = compare_with_input(&s).unwrap();
        assert!(c.is_stack.is_fail());
        assert!(c.consistent());
    }

    #[test]
    fn missing_face_composes_in_the_groupoid() {
        let g = Groupoid::transitive(2, &FinGroup::cyclic(2));
        let s = strictify(&nerve_map(&g, 3), 1).unwrap();
        let mf = missing_face(&s, 0).unwrap();
        for h in 0..mf.horn.len() {
            let t = mf.horn.carrier.get(h);
            let (d1, d2) = (t[0], t[1]);
            assert_eq!(g.comp[d2][mf.table[h]], Some(d1));
        }
        for i in 0..=2 {
            assert!(check_inverse_laws(&s, i).unwrap());
        }
    }

    #[test]
    fn non_stack_rejected() {
        // Two points mapped identically into the pair with all edges: no
        // edge between distinct points lifts.
        let y = Arc::new(crate::sset::coskeleton(&SSet::constant(2, 0), 0, 2).unwrap());
        let x = Arc::new(SSet::constant(2, 2));
        let comps = (0..=2)
            .map(|k| (0..2).map(|v| y.apply_seq(0, v, &vec![0; k + 1])).collect())
            .collect();
        let f = SMap::new(x, y, comps).unwrap();
        assert!(f.check().is_empty());
        assert!(matches!(strictify(&f, 0), Err(Error::Rejected { .. })));
    }

    #[test]
    fn idempotent_on_cech_nerves() {
        let f = cech_nerve(&[0, 0, 1, 1, 1], 2, 3).unwrap();
        let s = strictify(&f, 1).unwrap();
        assert!(check_idempotent(&s).unwrap());
    }
}
