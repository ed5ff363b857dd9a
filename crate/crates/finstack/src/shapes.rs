//! Subcomplexes of a standard simplex: Δ^n, ∂Δ^n, horns Λ^n_i and Λ^n_J,
//! joins of such complexes, and maps out of them into a simplicial set.

use std::collections::HashMap;

use crate::error::{check_budget, Error, Result};
use crate::sset::SSet;

/// A downward closed family of nonempty vertex sets of `[nverts - 1]`,
/// encoded as bitmasks. Simplices are ordered by dimension, then by mask.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Complex {
    nverts: usize,
    simplices: Vec<u32>,
    index: HashMap<u32, usize>,
}

pub fn mask_vertices(mask: u32) -> Vec<usize> {
    (0..32).filter(|&v| mask & (1 << v) != 0).collect()
}

fn mask_of(verts: &[usize]) -> u32 {
    verts.iter().fold(0, |m, &v| m | (1 << v))
}

impl Complex {
    /// The complex generated by the given vertex sets.
    pub fn generated(nverts: usize, generators: &[u32]) -> Complex {
        assert!(nverts <= 31, "at most 31 vertices");
        let mut all = std::collections::BTreeSet::new();
        for &g in generators {
            // every nonempty submask
            let mut sub = g;
            while sub != 0 {
                all.insert(sub);
                sub = (sub - 1) & g;
            }
        }
        let mut simplices: Vec<u32> = all.into_iter().collect();
        simplices.sort_by_key(|&m| (m.count_ones(), m));
        let index = simplices.iter().enumerate().map(|(i, &m)| (m, i)).collect();
        Complex {
            nverts,
            simplices,
            index,
        }
    }

    /// Δ^n.
    pub fn simplex(n: usize) -> Complex {
        Complex::generated(n + 1, &[(1u32 << (n + 1)) - 1])
    }

    /// The empty complex on `nverts` vertices.
    pub fn empty(nverts: usize) -> Complex {
        Complex::generated(nverts, &[])
    }

    /// Λ^n_J: the union of the faces `∂_j Δ^n` for `j` in `js`.
    pub fn horn_j(n: usize, js: &[usize]) -> Complex {
        let full = (1u32 << (n + 1)) - 1;
        let gens: Vec<u32> = js.iter().map(|&j| full & !(1 << j)).collect();
        Complex::generated(n + 1, &gens)
    }

    /// ∂Δ^n.
    pub fn boundary(n: usize) -> Complex {
        let all: Vec<usize> = (0..=n).collect();
        Complex::horn_j(n, &all)
    }

    /// Λ^n_i: every face except the `i`-th.
    pub fn horn(n: usize, i: usize) -> Complex {
        let js: Vec<usize> = (0..=n).filter(|&j| j != i).collect();
        Complex::horn_j(n, &js)
    }

    pub fn nverts(&self) -> usize {
        self.nverts
    }

    pub fn simplices(&self) -> &[u32] {
        &self.simplices
    }

    pub fn len(&self) -> usize {
        self.simplices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.simplices.is_empty()
    }

    pub fn contains(&self, mask: u32) -> bool {
        self.index.contains_key(&mask)
    }

    pub fn position(&self, mask: u32) -> Option<usize> {
        self.index.get(&mask).copied()
    }

    /// Largest simplex dimension, or `None` when empty.
    pub fn top_dim(&self) -> Option<usize> {
        self.simplices.last().map(|m| m.count_ones() as usize - 1)
    }

    /// Join: the vertices of `other` are placed after those of `self`.
    pub fn join(&self, other: &Complex) -> Complex {
        let shift = self.nverts;
        let mut gens: Vec<u32> = self.simplices.clone();
        gens.extend(other.simplices.iter().map(|&m| m << shift));
        for &a in &self.simplices {
            for &b in &other.simplices {
                gens.push(a | (b << shift));
            }
        }
        Complex::generated(self.nverts + other.nverts, &gens)
    }

    /// The complex as a simplicial set: `m`-simplices are nondecreasing vertex
    /// sequences of length `m + 1` whose support is a simplex.
    pub fn to_sset(&self, d: usize) -> Result<SSet> {
        let mut levels: Vec<Vec<Vec<u8>>> = Vec::with_capacity(d + 1);
        for m in 0..=d {
            let mut lv = Vec::new();
            let mut seq = vec![0u8; m + 1];
            if self.nverts > 0 {
                loop {
                    let verts: Vec<usize> = seq.iter().map(|&v| v as usize).collect();
                    if self.contains(mask_of(&verts)) {
                        lv.push(seq.clone());
                    }
                    // next nondecreasing sequence
                    let mut p = m as isize;
                    while p >= 0 && seq[p as usize] as usize == self.nverts - 1 {
                        p -= 1;
                    }
                    if p < 0 {
                        break;
                    }
                    let v = seq[p as usize] + 1;
                    for q in p as usize..=m {
                        seq[q] = v;
                    }
                }
            }
            check_budget(m, lv.len())?;
            levels.push(lv);
        }
        let x = SSet::from_model(
            levels,
            |_, i, s: &Vec<u8>| {
                let mut t = s.clone();
                t.remove(i);
                t
            },
            |_, i, s: &Vec<u8>| {
                let mut t = s.clone();
                t.insert(i, s[i]);
                t
            },
        )?;
        let full = self.nverts > 0 && self.simplices.len() == (1usize << self.nverts) - 1;
        Ok(x.with_coskeletal_above(if full { Some(1) } else { None }))
    }

    /// Every simplicial map from the complex into `x`, each given by the images
    /// of the simplices in `simplices()` order.
    pub fn maps_into(&self, x: &SSet) -> Result<Vec<Vec<usize>>> {
        if let Some(t) = self.top_dim() {
            if t > x.dim() {
                return Err(Error::Truncation(format!(
                    "shape of dimension {t} needs target data to that level"
                )));
            }
        }
        let n = self.simplices.len();
        if n == 0 {
            return Ok(vec![Vec::new()]);
        }
        // faces[s] lists the positions of the codimension-one faces of s.
        let faces: Vec<Vec<usize>> = self
            .simplices
            .iter()
            .map(|&m| {
                let vs = mask_vertices(m);
                if vs.len() == 1 {
                    return Vec::new();
                }
                vs.iter().map(|&v| self.index[&(m & !(1 << v))]).collect()
            })
            .collect();
        let top = self.top_dim().unwrap_or(0);
        let mut bindex: Vec<HashMap<Vec<usize>, Vec<usize>>> = vec![HashMap::new(); top + 1];
        for (m, bi) in bindex.iter_mut().enumerate().skip(1) {
            for s in 0..x.size(m) {
                let b: Vec<usize> = (0..=m).map(|i| x.face(m, i, s)).collect();
                bi.entry(b).or_default().push(s);
            }
        }
        let all0: Vec<usize> = (0..x.size(0)).collect();
        let empty: Vec<usize> = Vec::new();
        let mut out = Vec::new();
        let mut img = vec![0usize; n];
        let mut choice = vec![0usize; n];
        let mut cands: Vec<&Vec<usize>> = vec![&empty; n];
        let cand_for = |p: usize, img: &[usize]| -> &Vec<usize> {
            if faces[p].is_empty() {
                &all0
            } else {
                let dim = faces[p].len() - 1;
                let b: Vec<usize> = faces[p].iter().map(|&q| img[q]).collect();
                bindex[dim].get(&b).unwrap_or(&empty)
            }
        };
        let mut pos = 0usize;
        cands[0] = cand_for(0, &img);
        loop {
            if choice[pos] >= cands[pos].len() {
                if pos == 0 {
                    break;
                }
                pos -= 1;
                choice[pos] += 1;
                continue;
            }
            img[pos] = cands[pos][choice[pos]];
            if pos + 1 == n {
                out.push(img.clone());
                check_budget(top, out.len())?;
                choice[pos] += 1;
            } else {
                pos += 1;
                choice[pos] = 0;
                cands[pos] = cand_for(pos, &img);
            }
        }
        Ok(out)
    }

    /// Evaluates a map (images in `simplices()` order) on the nondecreasing
    /// vertex sequence `seq`, whose support must be a simplex.
    pub fn eval(&self, x: &SSet, map: &[usize], seq: &[usize]) -> usize {
        let mut distinct = seq.to_vec();
        distinct.dedup();
        let mut y = map[self.index[&mask_of(&distinct)]];
        let mut cur = distinct.len() - 1;
        for p in 1..seq.len() {
            if seq[p] == seq[p - 1] {
                y = x.degen(cur, p - 1, y);
                cur += 1;
            }
        }
        y
    }

    /// Precomposes `map : self -> x` with the simplicial map `other -> self`
    /// induced by the monotone vertex map `theta`.
    pub fn pull_back_map(
        &self,
        other: &Complex,
        theta: &[usize],
        x: &SSet,
        map: &[usize],
    ) -> Vec<usize> {
        other
            .simplices
            .iter()
            .map(|&m| {
                let seq: Vec<usize> = mask_vertices(m).iter().map(|&v| theta[v]).collect();
                self.eval(x, map, &seq)
            })
            .collect()
    }

    /// Maps a simplex of `other` along `theta` into a simplex of `self`, if the
    /// image is nondegenerate and present.
    pub fn image_of(&self, m: u32, theta: &[usize]) -> Option<u32> {
        let vs = mask_vertices(m);
        let img: Vec<usize> = vs.iter().map(|&v| theta[v]).collect();
        let mut d = img.clone();
        d.dedup();
        if d.len() != img.len() {
            return None;
        }
        let mm = mask_of(&img);
        self.contains(mm).then_some(mm)
    }
}

/// Vertex lists of the simplices of a complex, for display and certificates.
pub fn vertex_lists(c: &Complex) -> Vec<Vec<usize>> {
    c.simplices().iter().map(|&m| mask_vertices(m)).collect()
}

pub fn mask_from_vertices(verts: &[usize]) -> u32 {
    mask_of(verts)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn binom(n: usize, k: usize) -> usize {
        (0..k).fold(1, |a, i| a * (n - i) / (i + 1))
    }

    #[test]
    fn simplex_levels_count_monotone_sequences() {
        let x = Complex::simplex(2).to_sset(3).unwrap();
        for m in 0..=3 {
            assert_eq!(x.size(m), binom(3 + m, m + 1));
        }
        assert!(x.validate().is_empty());
    }

    #[test]
    fn horn_and_boundary_sizes() {
        assert_eq!(Complex::boundary(2).len(), 6);
        assert_eq!(Complex::horn(2, 1).len(), 5);
        assert_eq!(Complex::horn(3, 0).len(), 13);
        assert_eq!(Complex::boundary(3).len(), 14);
        assert!(Complex::horn(3, 2).to_sset(3).unwrap().validate().is_empty());
    }

    #[test]
    fn join_of_simplices_is_simplex() {
        let j = Complex::simplex(1).join(&Complex::simplex(0));
        assert_eq!(j, Complex::simplex(2));
        let e = Complex::empty(0).join(&Complex::simplex(2));
        assert_eq!(e, Complex::simplex(2));
    }

    #[test]
    fn maps_from_simplex_are_simplices() {
        let x = Complex::horn(2, 1).to_sset(2).unwrap();
        let maps = Complex::simplex(2).maps_into(&x).unwrap();
        assert_eq!(maps.len(), x.size(2));
        let maps1 = Complex::boundary(1).maps_into(&x).unwrap();
        assert_eq!(maps1.len(), x.size(0) * x.size(0));
    }
}
