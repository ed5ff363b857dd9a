//! Exhaustive search for isomorphisms of simplicial sets over a common base.

use std::collections::HashMap;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::sset::{SMap, SSet};

/// Outcome of an isomorphism search.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum IsoSearch {
    /// Components of an isomorphism from the first object to the second.
    Found(Vec<Vec<usize>>),
    /// The search space was exhausted.
    NoIso,
    /// The node limit was reached first.
    Inconclusive,
}

impl IsoSearch {
    pub fn found(&self) -> bool {
        matches!(self, IsoSearch::Found(_))
    }
}

/// Default bound on search nodes.
pub const DEFAULT_NODE_LIMIT: u64 = 20_000_000;

/// Searches for an isomorphism between two simplicial sets.
pub fn find_iso(x: &Arc<SSet>, y: &Arc<SSet>) -> Result<IsoSearch> {
    find_iso_over(&SMap::to_terminal(x.clone()), &SMap::to_terminal(y.clone()), DEFAULT_NODE_LIMIT)
}

/// Searches for an isomorphism `a.source -> b.source` commuting with the
/// maps to the shared target.
pub fn find_iso_over(a: &SMap, b: &SMap, node_limit: u64) -> Result<IsoSearch> {
    let (x, y) = (a.source(), b.source());
    if **a.target() != **b.target() {
        return Err(Error::Shape("isomorphism search needs a common base".into()));
    }
    if x.sizes() != y.sizes() {
        return Ok(IsoSearch::NoIso);
    }
    let d = x.dim();
    let mut s = Search {
        x,
        y,
        a,
        b,
        d,
        img: (0..=d).map(|k| vec![usize::MAX; x.size(k)]).collect(),
        used: (0..=d).map(|k| vec![false; y.size(k)]).collect(),
        xdeg: (0..=d).map(|k| degeneracy_witness(x, k)).collect(),
        ydeg: (0..=d).map(|k| degeneracy_witness(y, k)).collect(),
        nodes: 0,
        limit: node_limit,
        by_sig: Vec::new(),
    };
    s.by_sig = (0..=d)
        .map(|k| {
            let mut m: HashMap<Vec<usize>, Vec<usize>> = HashMap::new();
            for t in 0..y.size(k) {
                if s.ydeg[k][t].is_none() {
                    m.entry(s.ysig(k, t)).or_default().push(t);
                }
            }
            m
        })
        .collect();
    if !s.level_feasible(0) {
        return Ok(IsoSearch::NoIso);
    }
    match s.assign(0, 0) {
        Some(true) => Ok(IsoSearch::Found(s.img)),
        Some(false) => Ok(IsoSearch::NoIso),
        None => Ok(IsoSearch::Inconclusive),
    }
}

fn degeneracy_witness(x: &SSet, k: usize) -> Vec<Option<usize>> {
    (0..x.size(k))
        .map(|s| {
            if k == 0 {
                None
            } else {
                (0..k).find(|&i| x.degen(k - 1, i, x.face(k, i, s)) == s)
            }
        })
        .collect()
}

struct Search<'a> {
    x: &'a SSet,
    y: &'a SSet,
    a: &'a SMap,
    b: &'a SMap,
    d: usize,
    img: Vec<Vec<usize>>,
    used: Vec<Vec<bool>>,
    xdeg: Vec<Vec<Option<usize>>>,
    ydeg: Vec<Vec<Option<usize>>>,
    nodes: u64,
    limit: u64,
    /// Nondegenerate simplices of `y` by signature.
    by_sig: Vec<HashMap<Vec<usize>, Vec<usize>>>,
}

impl Search<'_> {
    fn ysig(&self, k: usize, t: usize) -> Vec<usize> {
        let mut v = vec![self.b.apply(k, t)];
        if k > 0 {
            v.extend((0..=k).map(|i| self.y.face(k, i, t)));
        }
        v
    }

    /// Signature of `s` transported along the current lower levels.
    fn xsig(&self, k: usize, s: usize) -> Vec<usize> {
        let mut v = vec![self.a.apply(k, s)];
        if k > 0 {
            v.extend((0..=k).map(|i| self.img[k - 1][self.x.face(k, i, s)]));
        }
        v
    }

    /// Multiset comparison of nondegenerate signatures at level `k`.
    fn level_feasible(&self, k: usize) -> bool {
        let mut need: HashMap<Vec<usize>, isize> = HashMap::new();
        for s in 0..self.x.size(k) {
            if self.xdeg[k][s].is_none() {
                *need.entry(self.xsig(k, s)).or_default() += 1;
            }
        }
        need.iter().all(|(sig, &c)| {
            self.by_sig[k].get(sig).map_or(0, |v| v.len()) as isize == c
        }) && need.values().sum::<isize>()
            == self.by_sig[k].values().map(|v| v.len() as isize).sum::<isize>()
    }

    /// `Some(true)` when a full isomorphism was completed.
    fn assign(&mut self, k: usize, s: usize) -> Option<bool> {
        if s == self.x.size(k) {
            if k == self.d {
                return Some(true);
            }
            if !self.level_feasible(k + 1) {
                return Some(false);
            }
            if k + 1 == self.d {
                return Some(self.finish_top());
            }
            return self.assign(k + 1, 0);
        }
        self.nodes += 1;
        if self.nodes > self.limit {
            return None;
        }
        if let Some(i) = self.xdeg[k][s] {
            let t = self.y.degen(k - 1, i, self.img[k - 1][self.x.face(k, i, s)]);
            if self.used[k][t] || self.ysig(k, t) != self.xsig(k, s) {
                return Some(false);
            }
            self.img[k][s] = t;
            self.used[k][t] = true;
            let r = self.assign(k, s + 1);
            if r != Some(true) {
                self.used[k][t] = false;
            }
            return r;
        }
        let cands: Vec<usize> = self.by_sig[k].get(&self.xsig(k, s)).cloned().unwrap_or_default();
        for t in cands {
            if self.used[k][t] {
                continue;
            }
            self.img[k][s] = t;
            self.used[k][t] = true;
            match self.assign(k, s + 1) {
                Some(true) => return Some(true),
                None => return None,
                Some(false) => self.used[k][t] = false,
            }
        }
        Some(false)
    }

    /// Top level: degenerate simplices are forced, the rest are matched by
    /// signature, which `level_feasible` has already counted.
    fn finish_top(&mut self) -> bool {
        let k = self.d;
        let mut pools = self.by_sig[k].clone();
        for s in 0..self.x.size(k) {
            let t = match self.xdeg[k][s] {
                Some(i) => {
                    let t = self.y.degen(k - 1, i, self.img[k - 1][self.x.face(k, i, s)]);
                    if self.ysig(k, t) != self.xsig(k, s) {
                        return false;
                    }
                    t
                }
                None => match pools.get_mut(&self.xsig(k, s)).and_then(|v| v.pop()) {
                    Some(t) => t,
                    None => return false,
                },
            };
            self.img[k][s] = t;
        }
        true
    }
}

/// Checks that given components form an isomorphism over the base.
pub fn is_iso_over(a: &SMap, b: &SMap, comps: &[Vec<usize>]) -> Result<bool> {
    let m = SMap::new(a.source().clone(), b.source().clone(), comps.to_vec())?;
    if !m.check().is_empty() || !m.is_levelwise_bijective() {
        return Ok(false);
    }
    Ok((0..=a.dim()).all(|k| (0..a.source().size(k)).all(|s| a.apply(k, s) == b.apply(k, m.apply(k, s)))))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{nerve, FinGroup, Groupoid};

    #[test]
    fn nerves_of_isomorphic_groups_are_isomorphic() {
        let a = Arc::new(nerve(&Groupoid::from_group(&FinGroup::cyclic(4)), 3).unwrap());
        let b = Arc::new(
            nerve(
                &Groupoid::from_group(&FinGroup::direct_product(&FinGroup::cyclic(1), &FinGroup::cyclic(4))),
                3,
            )
            .unwrap(),
        );
        let r = find_iso(&a, &b).unwrap();
        let IsoSearch::Found(c) = r else { panic!("no iso") };
        assert!(is_iso_over(&SMap::to_terminal(a), &SMap::to_terminal(b), &c).unwrap());
    }

    #[test]
    fn nerves_of_c4_and_klein_differ() {
        let a = Arc::new(nerve(&Groupoid::from_group(&FinGroup::cyclic(4)), 2).unwrap());
        let v = FinGroup::direct_product(&FinGroup::cyclic(2), &FinGroup::cyclic(2));
        let b = Arc::new(nerve(&Groupoid::from_group(&v), 2).unwrap());
        assert_eq!(find_iso(&a, &b).unwrap(), IsoSearch::NoIso);
    }
}
