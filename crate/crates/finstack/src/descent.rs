//! Descent of a 3-cocycle span to a finite 2-group `X` over `W̄G`, and the
//! cover, torsor and associator data read off from `X`.

use std::collections::HashMap;
use std::sync::Arc;

use crate::em::{em_space, wbar_em_iso, CocycleSpan, GroupCocycle};
use crate::error::{Error, Result};
use crate::iso::{find_iso_over, IsoSearch};
use crate::kan::{classify, classify_object, matching, Kind, Nat, RelHorn, Verdict};
use crate::simp_group::{w_total, TwistedProduct};
use crate::sset::{SMap, SSet};
use crate::strictify::{strictify, Strictification};

/// Levels used throughout: `τ_2` needs data up to level 4.
const TOP: usize = 4;

/// `W K(A,2) -> K(A,3)` truncated at `d`, presented with fiber `K(A,2)`.
/// The fiber is 3-coskeletal, so the map is declared coskeletal above 3.
pub fn universal_em_bundle(a: &crate::group::FinGroup, d: usize) -> Result<TwistedProduct> {
    let k2 = em_space(a, 2, d)?;
    let w = w_total(&k2.group, d)?;
    let iso = wbar_em_iso(&k2, d)?;
    let mut comps = Vec::with_capacity(d + 1);
    let mut phi = Vec::with_capacity(d + 1);
    for k in 0..=d {
        let rows: Vec<(usize, usize)> = (0..w.sset.size(k))
            .map(|x| {
                let t = w.decode(k, x);
                (iso.map.apply(k, iso.wbar.encode(k, &t[..k])), t[k])
            })
            .collect();
        comps.push(rows.iter().map(|r| r.0).collect());
        phi.push(rows);
    }
    let p = SMap::new(w.sset.clone(), iso.target.sset().clone(), comps)?.with_coskeletal_above(Some(3));
    TwistedProduct::from_identification(p, k2.sset().clone(), phi)
}

/// The stages of the descent of a span with `n = 3`.
#[derive(Clone, Debug)]
pub struct Descent {
    pub span: CocycleSpan,
    pub hypercover: Verdict,
    /// `E = φ^* W K(A,2) -> U`.
    pub bundle: TwistedProduct,
    /// `E -> U` as a 2-stack.
    pub local_stack: Verdict,
    /// `τ_2` of `E -> U -> W̄G`.
    pub strict: Strictification,
    /// `X -> ∗` as a 2-groupoid.
    pub groupoid: Verdict,
}

impl Descent {
    /// The 2-group `X`.
    pub fn x(&self) -> &Arc<SSet> {
        self.strict.strict()
    }

    /// `X -> W̄G`.
    pub fn over_base(&self) -> &SMap {
        &self.strict.assembled
    }
}

fn reject(v: Verdict, reason: &str) -> Result<Verdict> {
    match v {
        Verdict::Fail(w) => Err(Error::Rejected {
            reason: reason.into(),
            witness: Box::new(w),
        }),
        v => Ok(v),
    }
}

/// Pulls the universal `K(A,2)`-bundle back along `φ` and strictifies the
/// resulting local 2-bundle over `W̄G`.
pub fn descend(span: &CocycleSpan) -> Result<Descent> {
    if span.n != 3 {
        return Err(Error::Invalid(format!("descent takes a 3-cocycle, not a {}-cocycle", span.n)));
    }
    if span.dim() < TOP {
        return Err(Error::Truncation(format!("descent needs the span to level {TOP}")));
    }
    let span = span.truncate(TOP)?;
    span.check()?;
    let hypercover = reject(classify(&span.cover, Nat::Fin(3), Kind::Hypercover)?, "cover is not a 3-hypercover")?;
    let universal = universal_em_bundle(&span.a, TOP)?;
    let bundle = universal.pullback(&span.phi)?;
    if let Some(msg) = bundle.check().into_iter().next() {
        return Err(Error::Invariant(format!("pulled back bundle: {msg}")));
    }
    let local_stack = reject(classify(&bundle.projection, Nat::Fin(2), Kind::Stack)?, "E -> U is not a 2-stack")?;
    let fp = bundle.projection.then(&span.cover)?;
    let strict = strictify(&fp, 2)?;
    if strict.strict().size(0) != 1 {
        return Err(Error::Invalid(format!(
            "X_0 has {} points; the cover needs a single vertex",
            strict.strict().size(0)
        )));
    }
    let groupoid = classify_object(strict.strict(), Nat::Fin(2))?;
    if let Verdict::Fail(w) = &groupoid {
        return Err(Error::Invariant(format!("descended object is not a 2-groupoid: {w:?}")));
    }
    Ok(Descent {
        span,
        hypercover,
        bundle,
        local_stack,
        strict,
        groupoid,
    })
}

/// The cover, torsor and associator data of a descended 2-group.
#[derive(Clone, Debug)]
pub struct TwoGroupData {
    /// `f_1 : X_1 -> G`.
    pub cover: Vec<usize>,
    /// `X_2 -> M_2`: boundaries of 2-simplices together with their image in
    /// `W̄_2 G`.
    pub base: RelHorn,
    /// `action[a][x]` for `a ∈ A`, `x ∈ X_2`.
    pub action: Vec<Vec<usize>>,
    /// `section[m]`: the chosen point over the boundary `m`, degenerate
    /// when possible.
    pub section: Vec<usize>,
    /// `coordinate[x]`: the `a` with `x = a·section`.
    pub coordinate: Vec<usize>,
    /// `ζ(u) = Σ (-1)^i [d_i u]` on `X_3`.
    pub zeta: Vec<usize>,
    /// `ζ` as a function of the image in `W̄_3 G`.
    pub associator: GroupCocycle,
}

/// Reads `f_1`, the `A`-torsor over 2-simplex boundaries and `ζ` off a
/// descent, checking the torsor property and the pentagon on `X_4`.
pub fn extract_two_group_data(dsc: &Descent) -> Result<TwoGroupData> {
    let x = dsc.x();
    let over = dsc.over_base();
    let (g, a) = (&dsc.span.g, &dsc.span.a);

    let cover = over.component(1).to_vec();
    let mut hit = vec![false; g.order];
    for &y in &cover {
        hit[y] = true;
    }
    if hit.contains(&false) {
        return Err(Error::Invariant("X_1 -> G is not a cover".into()));
    }

    // The A-action on X_2 comes from the fiber coordinate of E_2, whose
    // K(A,2)-part is A itself.
    let e = dsc.bundle.total();
    let q = dsc.strict.quotient_map();
    let phi2 = &dsc.bundle.phi[2];
    let back: HashMap<(usize, usize), usize> = phi2.iter().enumerate().map(|(s, &p)| (p, s)).collect();
    let mut action = vec![vec![usize::MAX; x.size(2)]; a.order];
    for s in 0..e.size(2) {
        let (u, y) = phi2[s];
        for (b, row) in action.iter_mut().enumerate() {
            let moved = q[back[&(u, a.m(y, b))]];
            let slot = &mut row[q[s]];
            if *slot != usize::MAX && *slot != moved {
                return Err(Error::Invariant(format!("action of {b} depends on the representative of {}", q[s])));
            }
            *slot = moved;
        }
    }

    let base = matching(over, 2)?;
    let mut fibers: Vec<Vec<usize>> = vec![Vec::new(); base.len()];
    for p in 0..x.size(2) {
        fibers[base.comparison[p]].push(p);
    }
    for (m, fib) in fibers.iter().enumerate() {
        if fib.len() != a.order {
            return Err(Error::Invariant(format!("fiber over boundary {m} has {} points, not |A|", fib.len())));
        }
        for &p in fib {
            let orbit: Vec<usize> = (0..a.order).map(|b| action[b][p]).collect();
            let mut sorted = orbit.clone();
            sorted.sort_unstable();
            sorted.dedup();
            if sorted.len() != a.order || orbit.iter().any(|&o| base.comparison[o] != m) {
                return Err(Error::Invariant(format!("A does not act freely and transitively over {m}")));
            }
        }
    }
    let section: Vec<usize> = fibers
        .iter()
        .map(|fib| *fib.iter().find(|&&p| x.is_degenerate(2, p)).unwrap_or(&fib[0]))
        .collect();
    let mut coordinate = vec![usize::MAX; x.size(2)];
    for &s in &section {
        for b in 0..a.order {
            coordinate[action[b][s]] = b;
        }
    }

    let zeta: Vec<usize> = (0..x.size(3))
        .map(|u| {
            (0..=3).fold(a.e, |acc, i| {
                let c = coordinate[x.face(3, i, u)];
                a.m(acc, if i % 2 == 0 { c } else { a.inv[c] })
            })
        })
        .collect();
    for v in 0..x.size(4) {
        let s = (0..=4).fold(a.e, |acc, i| {
            let z = zeta[x.face(4, i, v)];
            a.m(acc, if i % 2 == 0 { z } else { a.inv[z] })
        });
        if s != a.e {
            return Err(Error::Invariant(format!("pentagon fails on the 4-simplex {v}")));
        }
    }

    let mut values = vec![usize::MAX; g.order.pow(3)];
    for u in 0..x.size(3) {
        let w = over.apply(3, u);
        if values[w] != usize::MAX && values[w] != zeta[u] {
            return Err(Error::Invariant(format!("ζ is not constant over the 3-simplex {w} of W̄G")));
        }
        values[w] = zeta[u];
    }
    if values.contains(&usize::MAX) {
        return Err(Error::Invariant("X_3 -> W̄_3 G is not onto".into()));
    }
    let associator = GroupCocycle::new(g.clone(), a.clone(), 3, values)?;
    Ok(TwoGroupData {
        cover,
        base,
        action,
        section,
        coordinate,
        zeta,
        associator,
    })
}

/// The map `X' -> X` induced by a refinement `r : U' -> U` of the spans of
/// two descents.
#[derive(Clone, Debug)]
pub struct DescentComparison {
    pub map: SMap,
    /// Whether the induced map commutes with the maps to `W̄G`.
    pub over_base: bool,
    pub hypercover: Verdict,
}

/// Builds `X' -> X` from `(u', y) ↦ (r(u'), y)` on the bundles, through
/// lifts along `E' -> X'` below the top level and by boundaries on top.
pub fn compare_descents(refined: &Descent, base: &Descent, r: &SMap) -> Result<DescentComparison> {
    let (e1, e0) = (&refined.bundle, &base.bundle);
    let (x1, x0) = (refined.x(), base.x());
    let index: Vec<HashMap<(usize, usize), usize>> = e0
        .phi
        .iter()
        .map(|l| l.iter().enumerate().map(|(s, &p)| (p, s)).collect())
        .collect();
    let h = |k: usize, s: usize| -> Result<usize> {
        let (u, y) = e1.phi[k][s];
        index[k]
            .get(&(r.apply(k, u), y))
            .copied()
            .ok_or_else(|| Error::Invariant(format!("no image for {s} at level {k}")))
    };
    let (c1, c0) = (&refined.strict.comparison, &base.strict.comparison);
    let mut comps: Vec<Vec<usize>> = Vec::with_capacity(TOP + 1);
    for k in 0..TOP {
        let mut table = vec![usize::MAX; x1.size(k)];
        for s in 0..e1.total().size(k) {
            let v = c0.apply(k, h(k, s)?);
            let slot = &mut table[c1.apply(k, s)];
            if *slot != usize::MAX && *slot != v {
                return Err(Error::Invariant(format!("induced map depends on the lift at level {k}")));
            }
            *slot = v;
        }
        if table.contains(&usize::MAX) {
            return Err(Error::Invariant(format!("X' has simplices without lifts at level {k}")));
        }
        comps.push(table);
    }
    let over0 = base.over_base();
    let by_boundary: HashMap<Vec<usize>, usize> = (0..x0.size(TOP))
        .map(|s| {
            let mut b: Vec<usize> = (0..=TOP).map(|i| x0.face(TOP, i, s)).collect();
            b.push(over0.apply(TOP, s));
            (b, s)
        })
        .collect();
    let top: Result<Vec<usize>> = (0..x1.size(TOP))
        .map(|s| {
            let mut b: Vec<usize> = (0..=TOP).map(|i| comps[TOP - 1][x1.face(TOP, i, s)]).collect();
            b.push(refined.over_base().apply(TOP, s));
            by_boundary
                .get(&b)
                .copied()
                .ok_or_else(|| Error::Invariant(format!("top simplex {s} has no image")))
        })
        .collect();
    comps.push(top?);
    let map = SMap::new(x1.clone(), x0.clone(), comps)?;
    map.ensure_simplicial()?;
    let over_base = map.then(over0)?.components() == refined.over_base().components();
    let hypercover = classify(&map, Nat::Inf, Kind::Hypercover)?;
    Ok(DescentComparison {
        map,
        over_base,
        hypercover,
    })
}

/// Exhaustive search for an isomorphism of two descended 2-groups over
/// `W̄G`, through level 3.
pub fn iso_over_base(d1: &Descent, d2: &Descent, node_limit: u64) -> Result<IsoSearch> {
    find_iso_over(&d1.over_base().truncate(3)?, &d2.over_base().truncate(3)?, node_limit)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::em::{coboundary, group_cocycle_as_span, CoboundarySearch};
    use crate::fixtures::level_one_hypercover;
    use crate::group::FinGroup;
    use crate::iso::DEFAULT_NODE_LIMIT;

    fn z2() -> FinGroup {
        FinGroup::cyclic(2)
    }

    fn run(c: &GroupCocycle) -> Descent {
        descend(&group_cocycle_as_span(c, 4).unwrap()).unwrap()
    }

    fn abc() -> GroupCocycle {
        GroupCocycle::from_fn(&z2(), &z2(), 3, |t| t[0] * t[1] * t[2]).unwrap()
    }

    fn cohomologous(c: &GroupCocycle, d: &GroupCocycle) -> bool {
        matches!(c.add(&d.neg()).unwrap().is_coboundary(1 << 22).unwrap(), CoboundarySearch::Found(_))
    }

    #[test]
    fn universal_bundle_presentation() {
        let u = universal_em_bundle(&z2(), 4).unwrap();
        assert!(u.check().is_empty());
        assert_eq!(u.total().sizes(), &[1, 1, 2, 16, 1024]);
        assert!(classify(&u.projection, Nat::Fin(2), Kind::Stack).unwrap().is_pass());
    }

    #[test]
    fn untwisted_descent() {
        let d = run(&GroupCocycle::zero(&z2(), &z2(), 3));
        assert_eq!(d.bundle.total().sizes(), &[1, 2, 8, 64, 1024]);
        assert_eq!(&d.x().sizes()[..4], &[1, 2, 8, 64]);
        assert!(d.groupoid.is_pass());
        let data = extract_two_group_data(&d).unwrap();
        assert!(cohomologous(&data.associator, &GroupCocycle::zero(&z2(), &z2(), 3)));
        // For an identity cover the bundle is already a 2-stack over U.
        let t = strictify(&d.bundle.projection, 2).unwrap();
        assert!(t.comparison.is_levelwise_bijective());
    }

    #[test]
    fn twisted_descent_is_a_different_2_group() {
        let d0 = run(&GroupCocycle::zero(&z2(), &z2(), 3));
        let d1 = run(&abc());
        assert_eq!(d1.x().sizes(), d0.x().sizes());
        assert!(d1.groupoid.is_pass());
        let data = extract_two_group_data(&d1).unwrap();
        assert!(cohomologous(&data.associator, &abc()));
        assert!(!cohomologous(&data.associator, &GroupCocycle::zero(&z2(), &z2(), 3)));
        assert_eq!(iso_over_base(&d1, &d0, DEFAULT_NODE_LIMIT).unwrap(), IsoSearch::NoIso);
    }

    #[test]
    fn z4_cocycle_in_z2() {
        let g = FinGroup::cyclic(4);
        let c = GroupCocycle::from_fn(&g, &z2(), 3, |t| (t[0] % 2) * usize::from(t[1] + t[2] >= 4)).unwrap();
        let d = run(&c);
        let data = extract_two_group_data(&d).unwrap();
        assert!(cohomologous(&data.associator, &c));
        let b: Vec<usize> = (0..16).map(|id| usize::from(id == 5)).collect();
        let shifted = c.add(&GroupCocycle::new(g.clone(), z2(), 3, coboundary(&g, &z2(), 2, &b)).unwrap()).unwrap();
        assert!(cohomologous(&data.associator, &shifted));
    }

    #[test]
    fn refined_descent_maps_to_the_direct_one() {
        let span = group_cocycle_as_span(&abc(), 4).unwrap();
        let r = level_one_hypercover(span.cover.target(), 1, 1, 1).unwrap();
        let d1 = descend(&span.refine(&r).unwrap()).unwrap();
        let d0 = descend(&span).unwrap();
        let cmp = compare_descents(&d1, &d0, &r).unwrap();
        assert!(cmp.over_base);
        assert!(cmp.hypercover.is_pass(), "{:?}", cmp.hypercover);
        let data = extract_two_group_data(&d1).unwrap();
        assert!(cohomologous(&data.associator, &abc()));
    }

    #[test]
    fn descent_needs_a_single_vertex() {
        let span = group_cocycle_as_span(&abc(), 4).unwrap();
        let r = crate::fixtures::relative_cech(span.cover.target(), &[0, 0]).unwrap();
        assert!(descend(&span.refine(&r).unwrap()).is_err());
    }
}
