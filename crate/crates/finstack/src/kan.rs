//! Hom sets out of finite shapes, relative horn and matching objects, and the
//! classification of maps as n-groupoids, n-stacks and n-hypercovers.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{check_budget, Error, Result};
use crate::sset::{enumerate_tuples, pullback, LowerData, SMap, SSet, TupleSpace};

/// A natural number or infinity.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Nat {
    Fin(usize),
    Inf,
}

impl Nat {
    /// `k > self`; always false for infinity.
    pub fn below(self, k: usize) -> bool {
        matches!(self, Nat::Fin(n) if k > n)
    }

    /// `k >= self`; always false for infinity.
    pub fn at_most(self, k: usize) -> bool {
        matches!(self, Nat::Fin(n) if k >= n)
    }
}

impl fmt::Display for Nat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Nat::Fin(n) => write!(f, "{n}"),
            Nat::Inf => write!(f, "inf"),
        }
    }
}

impl std::str::FromStr for Nat {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Nat, String> {
        match s {
            "inf" | "∞" | "infinity" => Ok(Nat::Inf),
            _ => s.parse().map(Nat::Fin).map_err(|e| format!("{e}")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Groupoid,
    Stack,
    Hypercover,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Failure {
    NotSurjective,
    NotInjective,
}

/// A concrete reason a comparison map is not a cover or not a bijection.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Witness {
    pub k: usize,
    /// Horn index, or `None` for the matching map.
    pub i: Option<usize>,
    pub failure: Failure,
    /// Carrier element: faces in index order followed by the lower simplex.
    pub element: Vec<usize>,
    /// For non-injectivity, two simplices with the same image.
    pub simplices: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum Verdict {
    Pass,
    Fail(Witness),
    Inconclusive(String),
}

impl Verdict {
    pub fn is_pass(&self) -> bool {
        matches!(self, Verdict::Pass)
    }

    pub fn is_fail(&self) -> bool {
        matches!(self, Verdict::Fail(_))
    }

    pub fn label(&self) -> &'static str {
        match self {
            Verdict::Pass => "pass",
            Verdict::Fail(_) => "fail",
            Verdict::Inconclusive(_) => "inconclusive",
        }
    }
}

/// The relative horn object `Λ^k_i(f)` (or matching object `M_k(f)` when
/// `missing` is `None`) with the comparison map from `X_k`.
#[derive(Clone, Debug)]
pub struct RelHorn {
    pub k: usize,
    pub missing: Option<usize>,
    pub carrier: TupleSpace,
    /// Carrier id of each `k`-simplex of the source.
    pub comparison: Vec<usize>,
}

impl RelHorn {
    pub fn len(&self) -> usize {
        self.carrier.len()
    }

    pub fn is_empty(&self) -> bool {
        self.carrier.is_empty()
    }

    /// First carrier element without a preimage.
    pub fn surjectivity_failure(&self) -> Option<usize> {
        let mut hit = vec![false; self.carrier.len()];
        for &c in &self.comparison {
            hit[c] = true;
        }
        hit.iter().position(|h| !h)
    }

    /// First pair of simplices with a common image.
    pub fn injectivity_failure(&self) -> Option<(usize, usize)> {
        let mut seen = vec![usize::MAX; self.carrier.len()];
        for (x, &c) in self.comparison.iter().enumerate() {
            if seen[c] != usize::MAX {
                return Some((seen[c], x));
            }
            seen[c] = x;
        }
        None
    }

    /// The first failure to be a cover (or a bijection when `injective`),
    /// as a carrier id for missing preimages or a simplex id for collisions.
    pub fn first_failure(&self, injective: bool) -> Option<usize> {
        if let Some(c) = self.surjectivity_failure() {
            return Some(c);
        }
        if injective {
            return self.injectivity_failure().map(|p| p.1);
        }
        None
    }

    pub fn is_bijective(&self) -> bool {
        self.surjectivity_failure().is_none() && self.injectivity_failure().is_none()
    }

    /// Witness for the first failure, if any.
    pub fn witness(&self, injective: bool) -> Option<Witness> {
        if let Some(c) = self.surjectivity_failure() {
            return Some(Witness {
                k: self.k,
                i: self.missing,
                failure: Failure::NotSurjective,
                element: self.carrier.get(c).to_vec(),
                simplices: Vec::new(),
            });
        }
        if injective {
            if let Some((a, b)) = self.injectivity_failure() {
                return Some(Witness {
                    k: self.k,
                    i: self.missing,
                    failure: Failure::NotInjective,
                    element: self.carrier.get(self.comparison[a]).to_vec(),
                    simplices: vec![a, b],
                });
            }
        }
        None
    }
}

fn relative(f: &SMap, k: usize, js: &[usize], missing: Option<usize>) -> Result<RelHorn> {
    if k > f.source().dim() {
        return Err(Error::Truncation(format!(
            "level {k} is above the stored degree {}",
            f.source().dim()
        )));
    }
    let x = f.source();
    let ld = LowerData::of_map(f, k);
    let carrier = enumerate_tuples(&ld, k, js)?;
    let mut key = Vec::with_capacity(js.len() + 1);
    let comparison: Result<Vec<usize>> = (0..x.size(k))
        .map(|s| {
            key.clear();
            if k > 0 {
                key.extend(js.iter().map(|&j| x.face(k, j, s)));
            }
            key.push(f.apply(k, s));
            carrier
                .lookup(&key)
                .ok_or_else(|| Error::Invariant(format!("simplex {s} has no boundary tuple")))
        })
        .collect();
    Ok(RelHorn {
        k,
        missing,
        carrier,
        comparison: comparison?,
    })
}

/// `M_k(f)` with `μ_k(f)`. For `k = 0` the carrier is `Y_0`.
pub fn matching(f: &SMap, k: usize) -> Result<RelHorn> {
    let js: Vec<usize> = if k == 0 { Vec::new() } else { (0..=k).collect() };
    relative(f, k, &js, None)
}

/// `Λ^k_i(f)` with `λ^k_i(f)`.
pub fn horn(f: &SMap, k: usize, i: usize) -> Result<RelHorn> {
    if k == 0 || i > k {
        return Err(Error::Invalid(format!("no horn Λ^{k}_{i}")));
    }
    let js: Vec<usize> = (0..=k).filter(|&j| j != i).collect();
    relative(f, k, &js, Some(i))
}

/// Generalized relative horn `Λ^k_J(f)` for sorted nonempty `js`.
pub fn horn_j(f: &SMap, k: usize, js: &[usize]) -> Result<RelHorn> {
    if k == 0 || js.is_empty() || js.iter().any(|&j| j > k) || js.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Invalid("J must be a sorted nonempty subset of [k]".into()));
    }
    relative(f, k, js, None)
}

/// Absolute versions, relative to the terminal object.
pub fn abs_horn(x: &Arc<SSet>, k: usize, i: usize) -> Result<RelHorn> {
    horn(&SMap::to_terminal(x.clone()), k, i)
}

pub fn abs_matching(x: &Arc<SSet>, k: usize) -> Result<RelHorn> {
    matching(&SMap::to_terminal(x.clone()), k)
}

/// All simplicial maps `S -> X`, each given by its components.
#[derive(Clone, Debug)]
pub struct HomSet {
    pub elements: Vec<Vec<Vec<usize>>>,
}

impl HomSet {
    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }
}

/// Exhaustive `hom(S, X)`: nondegenerate simplices of `S` are assigned in
/// dimension order, degenerate ones are forced.
pub fn hom(s: &SSet, x: &SSet) -> Result<HomSet> {
    if s.dim() > x.dim() {
        return Err(Error::Truncation(format!(
            "shape of degree {} needs target data to that level",
            s.dim()
        )));
    }
    // Flat list of (level, id) in order.
    let order: Vec<(usize, usize)> = (0..=s.dim())
        .flat_map(|k| (0..s.size(k)).map(move |a| (k, a)))
        .collect();
    let degen_of: Vec<Option<usize>> = order
        .iter()
        .map(|&(k, a)| {
            if k == 0 {
                None
            } else {
                (0..k).find(|&i| s.degen(k - 1, i, s.face(k, i, a)) == a)
            }
        })
        .collect();
    let bindex: Vec<HashMap<Vec<usize>, Vec<usize>>> = (0..=s.dim())
        .map(|k| {
            let mut m: HashMap<Vec<usize>, Vec<usize>> = HashMap::new();
            if k > 0 {
                for b in 0..x.size(k) {
                    m.entry((0..=k).map(|i| x.face(k, i, b)).collect()).or_default().push(b);
                }
            }
            m
        })
        .collect();
    let mut img: Vec<Vec<usize>> = (0..=s.dim()).map(|k| vec![0; s.size(k)]).collect();
    let mut out = Vec::new();
    let all0: Vec<usize> = (0..x.size(0)).collect();
    hom_rec(s, x, &order, &degen_of, &bindex, &all0, 0, &mut img, &mut out)?;
    Ok(HomSet { elements: out })
}

#[allow(clippy::too_many_arguments)]
fn hom_rec(
    s: &SSet,
    x: &SSet,
    order: &[(usize, usize)],
    degen_of: &[Option<usize>],
    bindex: &[HashMap<Vec<usize>, Vec<usize>>],
    all0: &[usize],
    pos: usize,
    img: &mut Vec<Vec<usize>>,
    out: &mut Vec<Vec<Vec<usize>>>,
) -> Result<()> {
    if pos == order.len() {
        out.push(img.clone());
        return check_budget(s.dim(), out.len());
    }
    let (k, a) = order[pos];
    if let Some(i) = degen_of[pos] {
        img[k][a] = x.degen(k - 1, i, img[k - 1][s.face(k, i, a)]);
        let ok = (0..=k).all(|j| x.face(k, j, img[k][a]) == img[k - 1][s.face(k, j, a)]);
        if ok {
            hom_rec(s, x, order, degen_of, bindex, all0, pos + 1, img, out)?;
        }
        return Ok(());
    }
    let cands: Vec<usize> = if k == 0 {
        all0.to_vec()
    } else {
        let b: Vec<usize> = (0..=k).map(|j| img[k - 1][s.face(k, j, a)]).collect();
        bindex[k].get(&b).cloned().unwrap_or_default()
    };
    for c in cands {
        img[k][a] = c;
        hom_rec(s, x, order, degen_of, bindex, all0, pos + 1, img, out)?;
    }
    Ok(())
}

/// Classification of `f` as an n-groupoid (of its source), n-stack or
/// n-hypercover, checked exhaustively on stored levels and extended above
/// them through the coskeletality flags.
pub fn classify(f: &SMap, n: Nat, kind: Kind) -> Result<Verdict> {
    let g;
    let f = if kind == Kind::Groupoid {
        g = SMap::to_terminal(f.source().clone());
        &g
    } else {
        f
    };
    let d = f.dim();
    match kind {
        Kind::Groupoid | Kind::Stack => {
            for k in 1..=d {
                for i in 0..=k {
                    let h = horn(f, k, i)?;
                    if let Some(w) = h.witness(n.below(k)) {
                        return Ok(Verdict::Fail(w));
                    }
                }
            }
            match f.effective_coskeletal_above() {
                Some(c) if c < d => Ok(Verdict::Pass),
                _ => Ok(Verdict::Inconclusive(format!(
                    "levels above {d} are not determined by stored data"
                ))),
            }
        }
        Kind::Hypercover => {
            for k in 0..=d {
                let m = matching(f, k)?;
                if let Some(w) = m.witness(n.at_most(k)) {
                    return Ok(Verdict::Fail(w));
                }
            }
            match f.effective_coskeletal_above() {
                Some(c) if c <= d => Ok(Verdict::Pass),
                _ => Ok(Verdict::Inconclusive(format!(
                    "levels above {d} are not determined by stored data"
                ))),
            }
        }
    }
}

/// Absolute classification of a simplicial set.
pub fn classify_object(x: &Arc<SSet>, n: Nat) -> Result<Verdict> {
    classify(&SMap::to_terminal(x.clone()), n, Kind::Groupoid)
}

/// Checks that `λ^k_i(f)` equals the composite of `μ_k(f)` with the
/// restriction `M_k(f) -> Λ^k_i(f)` on every simplex.
pub fn check_mu_lambda(f: &SMap, k: usize, i: usize) -> Result<bool> {
    let m = matching(f, k)?;
    let h = horn(f, k, i)?;
    for x in 0..f.source().size(k) {
        let t = m.carrier.get(m.comparison[x]);
        let mut key: Vec<usize> = (0..=k).filter(|&j| j != i).map(|j| t[j]).collect();
        key.push(t[k + 1]);
        if h.carrier.lookup(&key) != Some(h.comparison[x]) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Result of re-classifying a composite or pullback.
#[derive(Clone, Debug)]
pub struct StabilityReport {
    pub map: SMap,
    pub inputs: Vec<Verdict>,
    pub output: Verdict,
}

/// Composite `g ∘ f` re-classified; when both inputs pass, the composite
/// must pass too.
pub fn compose_check(f: &SMap, g: &SMap, n: Nat, kind: Kind) -> Result<StabilityReport> {
    let flag = match (f.effective_coskeletal_above(), g.effective_coskeletal_above()) {
        (Some(a), Some(b)) => Some(a.max(b)),
        _ => None,
    };
    let h = f.then(g)?.with_coskeletal_above(flag);
    let inputs = vec![classify(f, n, kind)?, classify(g, n, kind)?];
    let output = classify(&h, n, kind)?;
    if inputs.iter().all(Verdict::is_pass) && !output.is_pass() {
        return Err(Error::Invariant(format!(
            "composite of two {n}-{kind:?} maps classified {}",
            output.label()
        )));
    }
    Ok(StabilityReport {
        map: h,
        inputs,
        output,
    })
}

/// Base change of `f : X -> Z` along `g : Y -> Z`; the projection to `Y`
/// must inherit the classification of `f`.
pub fn pullback_check(f: &SMap, g: &SMap, n: Nat, kind: Kind) -> Result<StabilityReport> {
    let (_, proj, _) = pullback(g, f)?;
    let proj = proj.with_coskeletal_above(f.effective_coskeletal_above());
    let inputs = vec![classify(f, n, kind)?];
    let output = classify(&proj, n, kind)?;
    if inputs[0].is_pass() && !output.is_pass() {
        return Err(Error::Invariant(format!(
            "pullback of a {n}-{kind:?} map classified {}",
            output.label()
        )));
    }
    Ok(StabilityReport {
        map: proj,
        inputs,
        output,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::cech_nerve;
    use crate::group::{nerve, FinGroup, Groupoid};
    use crate::shapes::Complex;
    use crate::sset::coskeleton;

    fn group_nerve(n: usize, d: usize) -> Arc<SSet> {
        Arc::new(nerve(&Groupoid::from_group(&FinGroup::cyclic(n)), d).unwrap())
    }

    #[test]
    fn hom_from_simplex_is_level() {
        let x = group_nerve(2, 3);
        for k in 0..=3 {
            let s = Complex::simplex(k).to_sset(k).unwrap();
            assert_eq!(hom(&s, &x).unwrap().len(), x.size(k));
        }
    }

    #[test]
    fn hom_from_boundary_of_edge_is_pairs_of_vertices() {
        let x = Arc::new(Complex::horn(2, 0).to_sset(2).unwrap());
        let s = Complex::boundary(1).to_sset(1).unwrap();
        assert_eq!(hom(&s, &x).unwrap().len(), x.size(0) * x.size(0));
    }

    #[test]
    fn horns_in_nerve_of_z3() {
        let x = group_nerve(3, 2);
        let s = Complex::horn(2, 1).to_sset(2).unwrap();
        assert_eq!(hom(&s, &x).unwrap().len(), 9);
        assert_eq!(abs_horn(&x, 2, 1).unwrap().len(), 9);
    }

    #[test]
    fn low_horn_of_group_nerve_is_point() {
        let x = group_nerve(2, 2);
        assert_eq!(abs_horn(&x, 1, 0).unwrap().len(), 1);
    }

    #[test]
    fn identity_matching_maps_are_bijective() {
        let x = group_nerve(3, 3);
        let id = SMap::identity(x);
        for k in 0..=3 {
            assert!(matching(&id, k).unwrap().is_bijective());
        }
    }

    #[test]
    fn cech_horn_carrier_counts_pairs_of_edges() {
        let f = cech_nerve(&[0, 0, 0], 1, 2).unwrap();
        assert_eq!(abs_horn(f.source(), 2, 1).unwrap().len(), 27);
    }

    #[test]
    fn group_nerve_is_one_groupoid() {
        let x = group_nerve(2, 3);
        assert!(classify_object(&x, Nat::Fin(1)).unwrap().is_pass());
        assert!(classify_object(&x, Nat::Fin(0)).unwrap().is_fail());
    }

    #[test]
    fn discrete_pair_is_not_a_zero_hypercover() {
        let x = Arc::new(coskeleton(&SSet::constant(2, 0), 0, 2).unwrap());
        let v = classify(&SMap::to_terminal(x), Nat::Fin(0), Kind::Hypercover).unwrap();
        match v {
            Verdict::Fail(w) => {
                assert_eq!(w.k, 0);
                assert_eq!(w.failure, Failure::NotInjective);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn cech_nerve_over_point_is_hypercover() {
        let f = cech_nerve(&[0, 0, 0], 1, 3).unwrap();
        let t = SMap::to_terminal(f.source().clone());
        assert!(classify(&t, Nat::Inf, Kind::Hypercover).unwrap().is_pass());
    }

    #[test]
    fn unknown_levels_are_inconclusive() {
        let x = Complex::horn(2, 1).to_sset(2).unwrap();
        let v = classify_object(&Arc::new(x), Nat::Inf).unwrap();
        assert!(!v.is_pass());
    }

    #[test]
    fn mu_lambda_factorization() {
        let f = cech_nerve(&[0, 0, 1], 2, 3).unwrap();
        for k in 1..=3 {
            for i in 0..=k {
                assert!(check_mu_lambda(&f, k, i).unwrap());
            }
        }
    }
}
