//! JSON documents for simplicial sets, maps, groups, cocycles and 2-group
//! data. Every loader re-validates what it reads.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::descent::TwoGroupData;
use crate::em::GroupCocycle;
use crate::error::{Error, Result};
use crate::group::{FinGroup, Groupoid};
use crate::kan::Verdict;
use crate::simp_group::{GroupAction, Side, SimplicialGroup};
use crate::sset::{SMap, SSet};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SSetDoc {
    pub truncation: usize,
    pub coskeletal_above: Option<usize>,
    pub levels: Vec<usize>,
    /// Keyed `"k,i"`: the table of `d_i` on level `k`.
    pub faces: BTreeMap<String, Vec<usize>>,
    /// Keyed `"k,i"`: the table of `s_i` on level `k`.
    pub degeneracies: BTreeMap<String, Vec<usize>>,
}

fn key(k: usize, i: usize) -> String {
    format!("{k},{i}")
}

fn take(tables: &BTreeMap<String, Vec<usize>>, what: &str, k: usize, i: usize) -> Result<Vec<usize>> {
    tables
        .get(&key(k, i))
        .cloned()
        .ok_or_else(|| Error::Invalid(format!("missing {what} table \"{}\"", key(k, i))))
}

impl SSetDoc {
    pub fn from_sset(x: &SSet) -> SSetDoc {
        let d = x.dim();
        let mut faces = BTreeMap::new();
        let mut degeneracies = BTreeMap::new();
        for k in 0..=d {
            if k > 0 {
                for i in 0..=k {
                    faces.insert(key(k, i), x.face_table(k, i).to_vec());
                }
            }
            if k < d {
                for i in 0..=k {
                    degeneracies.insert(key(k, i), x.degen_table(k, i).to_vec());
                }
            }
        }
        SSetDoc {
            truncation: d,
            coskeletal_above: x.coskeletal_above(),
            levels: x.sizes().to_vec(),
            faces,
            degeneracies,
        }
    }

    pub fn to_sset(&self) -> Result<SSet> {
        let d = self.truncation;
        if self.levels.len() != d + 1 {
            return Err(Error::Invalid(format!(
                "truncation {d} needs {} level counts, found {}",
                d + 1,
                self.levels.len()
            )));
        }
        let expected_faces: usize = (1..=d).map(|k| k + 1).sum();
        let expected_degens: usize = (0..d).map(|k| k + 1).sum();
        if self.faces.len() != expected_faces || self.degeneracies.len() != expected_degens {
            return Err(Error::Invalid("unexpected face or degeneracy keys".into()));
        }
        let mut faces = vec![Vec::new()];
        for k in 1..=d {
            faces.push((0..=k).map(|i| take(&self.faces, "face", k, i)).collect::<Result<_>>()?);
        }
        let mut degens = Vec::new();
        for k in 0..=d {
            if k == d {
                degens.push(Vec::new());
            } else {
                degens.push((0..=k).map(|i| take(&self.degeneracies, "degeneracy", k, i)).collect::<Result<_>>()?);
            }
        }
        let x = SSet::from_tables(self.levels.clone(), faces, degens, self.coskeletal_above)?;
        x.ensure_valid()?;
        Ok(x)
    }
}

/// A simplicial set given inline or as a path to another document.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SSetRef {
    Path(String),
    Inline(SSetDoc),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SMapDoc {
    pub source: SSetRef,
    pub target: SSetRef,
    pub components: Vec<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coskeletal_above: Option<usize>,
}

impl SMapDoc {
    pub fn from_smap(f: &SMap) -> SMapDoc {
        SMapDoc {
            source: SSetRef::Inline(SSetDoc::from_sset(f.source())),
            target: SSetRef::Inline(SSetDoc::from_sset(f.target())),
            components: f.components().to_vec(),
            coskeletal_above: f.own_coskeletal_above(),
        }
    }

    /// Builds the map; relative paths are resolved against `base`.
    pub fn to_smap(&self, base: &Path) -> Result<SMap> {
        let source = Arc::new(resolve(&self.source, base)?);
        let target = Arc::new(resolve(&self.target, base)?);
        let f = SMap::new(source, target, self.components.clone())?.with_coskeletal_above(self.coskeletal_above);
        f.ensure_simplicial()?;
        Ok(f)
    }
}

fn resolve(r: &SSetRef, base: &Path) -> Result<SSet> {
    match r {
        SSetRef::Inline(doc) => doc.to_sset(),
        SSetRef::Path(p) => load_sset(&base.join(p)),
    }
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Invalid(format!("{}: {e}", path.display())))
}

fn parse<T: for<'de> Deserialize<'de>>(text: &str, what: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Invalid(format!("not a {what} document: {e}")))
}

fn parent(path: &Path) -> PathBuf {
    path.parent().map(Path::to_path_buf).unwrap_or_default()
}

pub fn load_sset(path: &Path) -> Result<SSet> {
    parse::<SSetDoc>(&read(path)?, "simplicial set")?.to_sset()
}

pub fn load_smap(path: &Path) -> Result<SMap> {
    parse::<SMapDoc>(&read(path)?, "simplicial map")?.to_smap(&parent(path))
}

/// Reads either a map document or a simplicial set, the latter as its map
/// to the terminal object.
pub fn load_map_or_object(path: &Path) -> Result<SMap> {
    let text = read(path)?;
    let value: serde_json::Value = parse(&text, "JSON")?;
    if value.get("components").is_some() {
        parse::<SMapDoc>(&text, "simplicial map")?.to_smap(&parent(path))
    } else {
        Ok(SMap::to_terminal(Arc::new(parse::<SSetDoc>(&text, "simplicial set")?.to_sset()?)))
    }
}

fn validate_group(g: &FinGroup) -> Result<FinGroup> {
    if FinGroup::from_table(g.mul.clone())? != *g {
        return Err(Error::Invalid("inverse, identity or abelian flag disagrees with the table".into()));
    }
    Ok(g.clone())
}

pub fn group_from_json(text: &str) -> Result<FinGroup> {
    validate_group(&parse(text, "group")?)
}

pub fn load_group(path: &Path) -> Result<FinGroup> {
    group_from_json(&read(path)?)
}

pub fn load_groupoid(path: &Path) -> Result<Groupoid> {
    let g: Groupoid = parse(&read(path)?, "groupoid")?;
    g.check()?;
    Ok(g)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimplicialGroupDoc {
    #[serde(flatten)]
    pub sset: SSetDoc,
    pub groups: Vec<FinGroup>,
}

impl SimplicialGroupDoc {
    pub fn from_group(g: &SimplicialGroup) -> SimplicialGroupDoc {
        SimplicialGroupDoc {
            sset: SSetDoc::from_sset(&g.sset),
            groups: g.groups.clone(),
        }
    }

    pub fn to_group(&self) -> Result<SimplicialGroup> {
        let groups = self
            .groups
            .iter()
            .map(validate_group)
            .collect::<Result<Vec<_>>>()?;
        SimplicialGroup::new(Arc::new(self.sset.to_sset()?), groups)
    }
}

pub fn load_simplicial_group(path: &Path) -> Result<SimplicialGroup> {
    parse::<SimplicialGroupDoc>(&read(path)?, "simplicial group")?.to_group()
}

/// A levelwise action; `act[k][g * |X_k| + x]`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActionDoc {
    pub group: SimplicialGroupDoc,
    pub space: SSetDoc,
    pub act: Vec<Vec<usize>>,
    pub side: Side,
}

impl ActionDoc {
    pub fn from_action(a: &GroupAction) -> ActionDoc {
        ActionDoc {
            group: SimplicialGroupDoc::from_group(&a.group),
            space: SSetDoc::from_sset(&a.space),
            act: a.act.clone(),
            side: a.side,
        }
    }

    pub fn to_action(&self) -> Result<GroupAction> {
        let g = Arc::new(self.group.to_group()?);
        let a = GroupAction::new(g, Arc::new(self.space.to_sset()?), self.act.clone(), self.side)?;
        if let Some(f) = a.law_failures().into_iter().next() {
            return Err(Error::Invalid(format!("not an action: {f}")));
        }
        Ok(a)
    }
}

pub fn load_action(path: &Path) -> Result<GroupAction> {
    parse::<ActionDoc>(&read(path)?, "action")?.to_action()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CocycleDoc {
    pub group: FinGroup,
    pub abelian: FinGroup,
    pub n: usize,
    /// Keyed `"(g1,...,gn)"`; absent tuples take the value `e`.
    pub values: BTreeMap<String, usize>,
}

fn tuple_key(t: &[usize]) -> String {
    let parts: Vec<String> = t.iter().map(usize::to_string).collect();
    format!("({})", parts.join(","))
}

fn parse_tuple(s: &str, n: usize, order: usize) -> Result<Vec<usize>> {
    let inner = s
        .trim()
        .strip_prefix('(')
        .and_then(|r| r.strip_suffix(')'))
        .ok_or_else(|| Error::Invalid(format!("tuple key {s:?} must be parenthesized")))?;
    let t: Vec<usize> = if inner.trim().is_empty() {
        Vec::new()
    } else {
        inner
            .split(',')
            .map(|p| p.trim().parse().map_err(|_| Error::Invalid(format!("bad entry in tuple {s:?}"))))
            .collect::<Result<_>>()?
    };
    if t.len() != n || t.iter().any(|&g| g >= order) {
        return Err(Error::Invalid(format!("tuple {s:?} is not in G^{n}")));
    }
    Ok(t)
}

impl CocycleDoc {
    pub fn from_cocycle(c: &GroupCocycle) -> CocycleDoc {
        let mut values = BTreeMap::new();
        let q = c.g.order;
        for (id, &v) in c.values.iter().enumerate() {
            if v != c.a.e {
                let mut t = vec![0; c.n];
                let mut r = id;
                for slot in t.iter_mut().rev() {
                    *slot = r % q;
                    r /= q;
                }
                values.insert(tuple_key(&t), v);
            }
        }
        CocycleDoc {
            group: c.g.clone(),
            abelian: c.a.clone(),
            n: c.n,
            values,
        }
    }

    pub fn to_cocycle(&self) -> Result<GroupCocycle> {
        let g = validate_group(&self.group)?;
        let a = validate_group(&self.abelian)?;
        let mut values = vec![a.e; g.order.pow(self.n as u32)];
        for (k, &v) in &self.values {
            let t = parse_tuple(k, self.n, g.order)?;
            if v >= a.order {
                return Err(Error::Invalid(format!("value {v} at {k} is not in A")));
            }
            let id = t.iter().fold(0, |acc, &x| acc * g.order + x);
            values[id] = v;
        }
        GroupCocycle::new(g, a, self.n, values)
    }
}

pub fn load_cocycle(path: &Path) -> Result<GroupCocycle> {
    parse::<CocycleDoc>(&read(path)?, "cocycle")?.to_cocycle()
}

/// The `A`-torsor over 2-simplex boundaries and `ζ` on 3-simplices.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TwoGroupDoc {
    pub cover: Vec<usize>,
    /// For each 2-simplex, the id of its boundary.
    pub boundary_of: Vec<usize>,
    /// `action[a][x]`.
    pub action: Vec<Vec<usize>>,
    /// For each boundary, the base point of its fiber.
    pub section: Vec<usize>,
    pub coordinate: Vec<usize>,
    pub zeta: Vec<usize>,
    pub associator: CocycleDoc,
}

impl TwoGroupDoc {
    pub fn from_data(t: &TwoGroupData) -> TwoGroupDoc {
        TwoGroupDoc {
            cover: t.cover.clone(),
            boundary_of: t.base.comparison.clone(),
            action: t.action.clone(),
            section: t.section.clone(),
            coordinate: t.coordinate.clone(),
            zeta: t.zeta.clone(),
            associator: CocycleDoc::from_cocycle(&t.associator),
        }
    }

    /// Checks that the action is free and transitive on each fiber, the
    /// coordinates match the section, and the associator is a cocycle.
    pub fn validate(&self) -> Result<GroupCocycle> {
        let assoc = self.associator.to_cocycle()?;
        let a = &assoc.a;
        let n2 = self.boundary_of.len();
        if self.action.len() != a.order || self.coordinate.len() != n2 {
            return Err(Error::Invalid("torsor tables have the wrong shape".into()));
        }
        for (x, &m) in self.boundary_of.iter().enumerate() {
            let s = *self
                .section
                .get(m)
                .ok_or_else(|| Error::Invalid(format!("boundary {m} has no section point")))?;
            let c = self.coordinate[x];
            if c >= a.order || self.action[c].get(s) != Some(&x) {
                return Err(Error::Invalid(format!("2-simplex {x} is not its coordinate times the section")));
            }
            for (g, row) in self.action.iter().enumerate() {
                let y = *row.get(x).ok_or_else(|| Error::Invalid("action row too short".into()))?;
                if y >= n2 || self.boundary_of[y] != m || (g != a.e && y == x) {
                    return Err(Error::Invalid(format!("action of {g} on {x} leaves the fiber or fixes it")));
                }
            }
        }
        if let Some(t) = assoc.cocycle_failure() {
            return Err(Error::Invalid(format!("associator fails the cocycle condition at {t:?}")));
        }
        Ok(assoc)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct VerdictDoc {
    pub verdict: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<serde_json::Value>,
}

impl VerdictDoc {
    pub fn from_verdict(v: &Verdict) -> VerdictDoc {
        let witness = match v {
            Verdict::Pass => None,
            Verdict::Fail(w) => Some(serde_json::to_value(w).expect("serializable")),
            Verdict::Inconclusive(reason) => Some(serde_json::json!({ "reason": reason })),
        };
        VerdictDoc {
            verdict: v.label(),
            witness,
        }
    }
}

pub fn to_pretty<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("serializable")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::cech_nerve;
    use crate::group::nerve;

    #[test]
    fn sset_round_trip() {
        let x = nerve(&Groupoid::from_group(&FinGroup::symmetric3()), 3).unwrap();
        let text = to_pretty(&SSetDoc::from_sset(&x));
        let back: SSetDoc = serde_json::from_str(&text).unwrap();
        assert_eq!(back.to_sset().unwrap(), x);
    }

    #[test]
    fn broken_identity_rejected() {
        let x = nerve(&Groupoid::from_group(&FinGroup::cyclic(3)), 2).unwrap();
        let mut doc = SSetDoc::from_sset(&x);
        let s0 = doc.degeneracies["1,0"][1];
        doc.faces.get_mut("2,1").unwrap()[s0] = 0;
        assert!(doc.to_sset().is_err());
        let mut doc = SSetDoc::from_sset(&x);
        doc.faces.remove("1,0");
        assert!(doc.to_sset().is_err());
    }

    #[test]
    fn smap_round_trip() {
        let f = cech_nerve(&[0, 0, 1], 2, 3).unwrap();
        let text = to_pretty(&SMapDoc::from_smap(&f));
        let back: SMapDoc = serde_json::from_str(&text).unwrap();
        let g = back.to_smap(Path::new(".")).unwrap();
        assert_eq!(g.components(), f.components());
        assert_eq!(**g.source(), **f.source());
    }

    #[test]
    fn group_validation() {
        let g = FinGroup::dihedral(4);
        assert_eq!(group_from_json(&to_pretty(&g)).unwrap(), g);
        let mut bad = g.clone();
        bad.abelian = true;
        assert!(group_from_json(&to_pretty(&bad)).is_err());
        let mut bad = g;
        bad.mul[1][1] = 0;
        bad.mul[1][2] = 0;
        assert!(group_from_json(&to_pretty(&bad)).is_err());
    }

    #[test]
    fn cocycle_keys_omit_zero() {
        let z2 = FinGroup::cyclic(2);
        let c = GroupCocycle::from_fn(&z2, &z2, 3, |t| t[0] * t[1] * t[2]).unwrap();
        let doc = CocycleDoc::from_cocycle(&c);
        assert_eq!(doc.values.len(), 1);
        assert_eq!(doc.values.get("(1,1,1)"), Some(&1));
        assert_eq!(doc.to_cocycle().unwrap(), c);
        let mut bad = doc.clone();
        bad.values.insert("(1,1)".into(), 1);
        assert!(bad.to_cocycle().is_err());
        let mut bad = doc;
        bad.values.insert("(0,1,1)".into(), 1);
        assert!(bad.to_cocycle().is_err());
    }

    #[test]
    fn verdict_shape() {
        let v = serde_json::to_value(VerdictDoc::from_verdict(&Verdict::Pass)).unwrap();
        assert_eq!(v, serde_json::json!({ "verdict": "pass" }));
    }
}
