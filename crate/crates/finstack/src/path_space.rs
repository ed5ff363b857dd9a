//! Relative higher morphism spaces `P^{≥k}(f)` and their augmentation to
//! the matching object `M_k(f)`.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::join::boundary_star;
use crate::kan::{matching, RelHorn};
use crate::sset::{SMap, SSet};

/// `P^{≥k}(f)` as a sub-simplicial set of the shift `ℓ ↦ X_{k+ℓ}`.
#[derive(Clone, Debug)]
pub struct PathSpace {
    pub k: usize,
    pub carrier: Arc<SSet>,
    /// `embed[ℓ][p]` is the `(k+ℓ)`-simplex of `X` underlying `p`.
    pub embed: Vec<Vec<usize>>,
}

/// `[0, 1, ..., m-1, m, m, ..., m]` of length `len`: the collapse of the last
/// vertices onto vertex `m`.
fn collapse_seq(m: usize, len: usize) -> Vec<usize> {
    (0..len).map(|v| v.min(m)).collect()
}

/// Whether the `(k+ℓ)`-simplex `x` is an `ℓ`-simplex of
/// `P^{≥k}(f)`: `f(x)` and the faces `d_j x`, `j < k`, are degenerate along
/// the collapse of the last `ℓ+1` vertices.
pub fn in_path_space(f: &SMap, k: usize, l: usize, x: usize) -> bool {
    let (xs, ys) = (f.source(), f.target());
    let n = k + l;
    let fx = f.apply(n, x);
    let first: Vec<usize> = (0..=k).collect();
    if ys.apply_seq(k, ys.restrict(n, fx, &first), &collapse_seq(k, n + 1)) != fx {
        return false;
    }
    if k == 0 {
        return true;
    }
    let head: Vec<usize> = (0..k).collect();
    (0..k).all(|j| {
        let dj = xs.face(n, j, x);
        xs.apply_seq(k - 1, xs.restrict(n - 1, dj, &head), &collapse_seq(k - 1, n)) == dj
    })
}

/// Builds `P^{≥k}(f)` truncated at `d` from membership predicates.
pub fn path_space(f: &SMap, k: usize, d: usize) -> Result<PathSpace> {
    let xs = f.source();
    if xs.dim() < k + d {
        return Err(Error::Truncation(format!(
            "P^{{≥{k}}} to level {d} needs source data to level {}",
            k + d
        )));
    }
    let embed: Vec<Vec<usize>> = (0..=d)
        .map(|l| (0..xs.size(k + l)).filter(|&x| in_path_space(f, k, l, x)).collect())
        .collect();
    let pos: Vec<Vec<usize>> = (0..=d)
        .map(|l| {
            let mut p = vec![usize::MAX; xs.size(k + l)];
            for (i, &x) in embed[l].iter().enumerate() {
                p[x] = i;
            }
            p
        })
        .collect();
    let look = |l: usize, x: usize| -> Result<usize> {
        match pos[l][x] {
            usize::MAX => Err(Error::Invariant(format!(
                "structure map leaves P^{{≥{k}}} at level {l}"
            ))),
            p => Ok(p),
        }
    };
    let mut faces = vec![Vec::new()];
    for l in 1..=d {
        let mut fl = Vec::with_capacity(l + 1);
        for i in 0..=l {
            let t: Result<Vec<usize>> = embed[l].iter().map(|&x| look(l - 1, xs.face(k + l, k + i, x))).collect();
            fl.push(t?);
        }
        faces.push(fl);
    }
    let mut degens = Vec::with_capacity(d + 1);
    for l in 0..d {
        let mut sl = Vec::with_capacity(l + 1);
        for i in 0..=l {
            let t: Result<Vec<usize>> = embed[l].iter().map(|&x| look(l + 1, xs.degen(k + l, k + i, x))).collect();
            sl.push(t?);
        }
        degens.push(sl);
    }
    degens.push(Vec::new());
    let flag = f.effective_coskeletal_above().map(|c| c.saturating_sub(k).max(1));
    let carrier = SSet::from_tables(embed.iter().map(|e| e.len()).collect(), faces, degens, None)?
        .with_coskeletal_above(flag);
    Ok(PathSpace {
        k,
        carrier: Arc::new(carrier),
        embed,
    })
}

/// Elementwise check that the structure maps of `P^{≥k}(f)` are those of
/// `X` at index offset `k`.
pub fn check_embedding(f: &SMap, p: &PathSpace) -> bool {
    let (xs, c, k) = (f.source(), &p.carrier, p.k);
    (1..=c.dim()).all(|l| {
        (0..c.size(l)).all(|a| {
            (0..=l).all(|i| p.embed[l - 1][c.face(l, i, a)] == xs.face(k + l, k + i, p.embed[l][a]))
        })
    }) && (0..c.dim()).all(|l| {
        (0..c.size(l)).all(|a| {
            (0..=l).all(|i| p.embed[l + 1][c.degen(l, i, a)] == xs.degen(k + l, k + i, p.embed[l][a]))
        })
    })
}

/// Level `ℓ` of `P^{≥k}(f)` computed from the join-cotensor definition:
/// simplices of `X^{Δ^{k-1}⋆}` whose image in the boundary-star object is
/// the total degeneracy of the image of their first vertex.
pub fn path_space_by_join(f: &SMap, k: usize, d: usize) -> Result<Vec<Vec<usize>>> {
    if k == 0 {
        return Err(Error::Invalid("join model needs k > 0".into()));
    }
    let bs = boundary_star(f, k, d)?;
    let xs = f.source();
    let first: Vec<usize> = (0..=k).collect();
    Ok((0..=d)
        .map(|l| {
            let all_zero = vec![0usize; l + 1];
            (0..xs.size(k + l))
                .filter(|&x| {
                    let v = xs.restrict(k + l, x, &first);
                    let h = bs.map.apply(0, v);
                    bs.lower.apply_seq(0, h, &all_zero) == bs.map.apply(l, x)
                })
                .collect()
        })
        .collect())
}

/// An augmented simplicial set: `X` with `ε : X_0 -> X_{-1}`.
#[derive(Clone, Debug)]
pub struct Augmented {
    pub sset: Arc<SSet>,
    pub base_size: usize,
    pub augmentation: Vec<usize>,
}

impl Augmented {
    /// `ε d_0 = ε d_1` on edges.
    pub fn is_augmentation(&self) -> bool {
        self.sset.dim() == 0
            || (0..self.sset.size(1)).all(|e| {
                self.augmentation[self.sset.face(1, 0, e)] == self.augmentation[self.sset.face(1, 1, e)]
            })
    }

    /// The augmentation as a map to the constant simplicial set on `X_{-1}`.
    pub fn as_map(&self) -> Result<SMap> {
        let x = &self.sset;
        let base = Arc::new(SSet::constant(self.base_size, x.dim()));
        let comps = (0..=x.dim())
            .map(|l| {
                (0..x.size(l))
                    .map(|a| self.augmentation[x.apply_seq(l, a, &[0])])
                    .collect()
            })
            .collect();
        SMap::new(x.clone(), base, comps)
    }
}

/// The augmentation `π : P^{≥k}(f) -> M_k(f)` induced by `μ_k(f)`, with the
/// matching object used, and the map to the constant object carrying the
/// relative coskeletality inherited from `f`.
pub fn augment_to_matching(f: &SMap, p: &PathSpace) -> Result<(Augmented, RelHorn, SMap)> {
    let m = matching(f, p.k)?;
    let aug = Augmented {
        sset: p.carrier.clone(),
        base_size: m.len(),
        augmentation: p.embed[0].iter().map(|&x| m.comparison[x]).collect(),
    };
    if !aug.is_augmentation() {
        return Err(Error::Invariant("μ_k does not coequalize the endpoints of paths".into()));
    }
    let map = aug
        .as_map()?
        .with_coskeletal_above(f.effective_coskeletal_above().map(|c| c.saturating_sub(p.k)));
    Ok((aug, m, map))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::cech_nerve;
    use crate::group::{nerve, FinGroup, Groupoid};
    use crate::kan::{classify, classify_object, Kind, Nat};
    use crate::sset::pi0;

    fn z2(d: usize) -> Arc<SSet> {
        Arc::new(nerve(&Groupoid::from_group(&FinGroup::cyclic(2)), d).unwrap())
    }

    #[test]
    fn loops_of_z2() {
        let f = SMap::to_terminal(z2(3));
        let p = path_space(&f, 1, 2).unwrap();
        assert_eq!(p.carrier.size(0), 2);
        assert_eq!(p.carrier.size(1), 2);
        for e in 0..2 {
            assert_eq!(p.carrier.face(1, 0, e), p.carrier.face(1, 1, e));
        }
        assert!(check_embedding(&f, &p));
        assert!(p.carrier.validate().is_empty());
    }

    #[test]
    fn identity_has_only_degenerate_paths() {
        let x = z2(3);
        let f = SMap::identity(x.clone());
        let p = path_space(&f, 1, 2).unwrap();
        assert_eq!(p.carrier.sizes(), &[2, 2, 2]);
        let (aug, m, _) = augment_to_matching(&f, &p).unwrap();
        assert_eq!(m.len(), 2);
        assert!(aug.is_augmentation());
    }

    #[test]
    fn subset_and_join_models_agree() {
        let f = SMap::to_terminal(z2(4));
        for k in 1..=2 {
            let p = path_space(&f, k, 4 - k).unwrap();
            assert_eq!(path_space_by_join(&f, k, 4 - k).unwrap(), p.embed);
        }
    }

    #[test]
    fn group_nerve_path_space_is_discrete() {
        let f = SMap::to_terminal(z2(4));
        let p = path_space(&f, 1, 2).unwrap();
        assert!(classify_object(&p.carrier, Nat::Fin(0)).unwrap().is_pass());
    }

    #[test]
    fn cech_augmentation_is_iso_on_components() {
        let f = cech_nerve(&[0, 0, 1, 1, 1], 2, 3).unwrap();
        let p = path_space(&f, 1, 2).unwrap();
        let (_, m, pi) = augment_to_matching(&f, &p).unwrap();
        assert!(classify(&pi, Nat::Fin(0), Kind::Hypercover).unwrap().is_pass());
        assert_eq!(pi0(&p.carrier).unwrap().classes, m.len());
    }
}
