//! Small named inputs shared by the test suites and the command line.

use std::collections::HashMap;
use std::sync::Arc;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::kan::matching;
use crate::sset::{relative_coskeleton, SMap, SSet};

/// The Čech nerve of `p : U -> V` (with `V = 0..nv`) as a map to the
/// constant simplicial set on `V`.
pub fn cech_nerve(p: &[usize], nv: usize, d: usize) -> Result<SMap> {
    if p.iter().any(|&v| v >= nv) {
        return Err(Error::Invalid("cover lands outside the base".into()));
    }
    let mut levels: Vec<Vec<Vec<usize>>> = vec![(0..p.len()).map(|u| vec![u]).collect()];
    for k in 1..=d {
        let mut lv = Vec::new();
        for t in &levels[k - 1] {
            for u in 0..p.len() {
                if p[u] == p[t[0]] {
                    let mut s = t.clone();
                    s.push(u);
                    lv.push(s);
                }
            }
        }
        crate::error::check_budget(k, lv.len())?;
        levels.push(lv);
    }
    let comps: Vec<Vec<usize>> = levels.iter().map(|l| l.iter().map(|t| p[t[0]]).collect()).collect();
    let x = SSet::from_model(
        levels,
        |_, i, t: &Vec<usize>| {
            let mut s = t.clone();
            s.remove(i);
            s
        },
        |_, i, t: &Vec<usize>| {
            let mut s = t.clone();
            s.insert(i, t[i]);
            s
        },
    )?
    .with_coskeletal_above(Some(1));
    let base = Arc::new(SSet::constant(nv, d));
    Ok(SMap::new(Arc::new(x), base, comps)?.with_coskeletal_above(Some(0)))
}

/// A hypercover of `y` that is coskeletal above level 1 relative to `y`:
/// level 0 has `1..=spread` points over each vertex, level 1 lists every
/// boundary lift with up to `extra` additional copies, chosen from `seed`.
pub fn level_one_hypercover(y: &Arc<SSet>, spread: usize, extra: usize, seed: u64) -> Result<SMap> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut over0 = Vec::new();
    for v in 0..y.size(0) {
        let m = rng.gen_range(1..=spread.max(1));
        over0.extend(std::iter::repeat_n(v, m));
    }
    let w0 = Arc::new(SSet::constant(over0.len(), 0));
    let f0 = SMap::new(w0, y.clone(), vec![over0.clone()])?;
    let m1 = matching(&f0_as_level1(&f0, y)?, 1)?;
    let mut edges: Vec<(usize, usize)> = Vec::new();
    for t in 0..m1.len() {
        let copies = 1 + if extra > 0 { rng.gen_range(0..=extra) } else { 0 };
        for c in 0..copies {
            edges.push((t, c));
        }
    }
    let deg: Vec<usize> = (0..over0.len())
        .map(|w| {
            let key = [w, w, y.degen(0, 0, over0[w])];
            let t = m1.carrier.lookup(&key).expect("degenerate boundary");
            edges.iter().position(|&e| e == (t, 0)).expect("first copy")
        })
        .collect();
    let faces = vec![
        Vec::new(),
        (0..2)
            .map(|i| edges.iter().map(|&(t, _)| m1.carrier.get(t)[i]).collect())
            .collect(),
    ];
    let w1 = SSet::from_tables(
        vec![over0.len(), edges.len()],
        faces,
        vec![vec![deg], Vec::new()],
        None,
    )?;
    let f1: Vec<usize> = edges.iter().map(|&(t, _)| m1.carrier.get(t)[2]).collect();
    let f = SMap::new(Arc::new(w1), y.clone(), vec![over0, f1])?;
    relative_coskeleton(&f, 1, y.dim())
}

/// The relative Čech nerve of a surjection onto `Y_0`: level `k` is
/// `W^{k+1} ×_{Y_0^{k+1}} Y_k`.
pub fn relative_cech(y: &Arc<SSet>, over0: &[usize]) -> Result<SMap> {
    let w0 = Arc::new(SSet::constant(over0.len(), 0));
    let f0 = SMap::new(w0, y.clone(), vec![over0.to_vec()])?;
    relative_coskeleton(&f0, 0, y.dim())
}

fn f0_as_level1(f0: &SMap, y: &Arc<SSet>) -> Result<SMap> {
    // The 0-coskeleton supplies level 1 so that `M_1` can be read off.
    let c = relative_coskeleton(f0, 0, 1.min(y.dim()))?;
    let y1 = Arc::new(y.truncate(1)?);
    SMap::new(c.source().clone(), y1, c.components().to_vec())
}

/// Two-vertex discrete simplicial set over the point, with the coskeletal
/// completion of its degenerate edges.
pub fn two_points(d: usize) -> SSet {
    SSet::constant(2, d)
}

/// Named surjections used as Čech covers.
pub fn standard_covers() -> HashMap<&'static str, (Vec<usize>, usize)> {
    let mut m = HashMap::new();
    m.insert("three_to_point", (vec![0, 0, 0], 1));
    m.insert("two_to_point", (vec![0, 0], 1));
    m.insert("four_to_two", (vec![0, 0, 1, 1], 2));
    m.insert("three_to_two", (vec![0, 1, 1], 2));
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kan::{classify, Kind, Nat};

    #[test]
    fn cech_nerve_is_a_one_hypercover() {
        let f = cech_nerve(&[0, 0, 0], 1, 3).unwrap();
        assert_eq!(f.source().sizes(), &[3, 9, 27, 81]);
        assert!(f.source().validate().is_empty());
        assert!(classify(&f, Nat::Fin(1), Kind::Hypercover).unwrap().is_pass());
        assert!(classify(&f, Nat::Fin(0), Kind::Hypercover).unwrap().is_fail());
    }

    #[test]
    fn level_one_hypercovers_are_hypercovers() {
        let base = cech_nerve(&[0, 0, 1], 2, 3).unwrap();
        let y = base.source().clone();
        for seed in 0..4 {
            let f = level_one_hypercover(&y, 2, 1, seed).unwrap();
            assert!(f.source().validate().is_empty());
            assert!(f.check().is_empty());
            assert!(classify(&f, Nat::Inf, Kind::Hypercover).unwrap().is_pass());
        }
    }
}
