//! Property suites over built-in fixtures, shared by the acceptance tests
//! and the `verify` command. Every check is exact.

use std::sync::Arc;

use rand::seq::SliceRandom;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::descent::{descend, extract_two_group_data, iso_over_base};
use crate::em::{em_space, group_cocycle_as_span, wbar_em_iso, GroupCocycle};
use crate::error::{Error, Result};
use crate::fixtures::{cech_nerve, level_one_hypercover, standard_covers};
use crate::group::{extract_groupoid, groups_up_to_12, hom_map, nerve, random_groupoid, FinGroup, Groupoid};
use crate::iso::{IsoSearch, DEFAULT_NODE_LIMIT};
use crate::join::{check_star_l, find_expansion, replay};
use crate::kan::{abs_horn, check_mu_lambda, classify, classify_object, compose_check, pullback_check, Kind, Nat};
use crate::path_space::{augment_to_matching, path_space, path_space_by_join};
use crate::shapes::Complex;
use crate::simp_group::{classify_strict, moore_fill, w_bar, SimplicialGroup};
use crate::sset::{SMap, SSet};
use crate::strictify::{compare_with_input, missing_face, strictify, strictify_hypercover_check};

/// Names accepted by [`run_suite`].
pub const SUITES: &[&str] = &[
    "grothendieck",
    "moore",
    "wbar",
    "stability",
    "pathspace",
    "strictify",
    "descent",
    "join",
];

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub seed: u64,
    pub checks: Vec<Check>,
}

impl SuiteReport {
    fn new(suite: &str, seed: u64) -> Self {
        SuiteReport {
            suite: suite.into(),
            seed,
            checks: Vec::new(),
        }
    }

    fn check(&mut self, name: impl Into<String>, passed: bool, detail: impl Into<String>) {
        self.checks.push(Check {
            name: name.into(),
            passed,
            detail: detail.into(),
        });
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

pub fn run_suite(name: &str, seed: u64) -> Result<SuiteReport> {
    match name {
        "grothendieck" => grothendieck(seed),
        "moore" => moore(seed),
        "wbar" => wbar(seed),
        "stability" => stability(seed),
        "pathspace" => pathspace(seed),
        "strictify" => strictify_suite(seed),
        "descent" => descent(seed),
        "join" => join(seed),
        other => Err(Error::Invalid(format!("unknown suite {other}; expected one of {}", SUITES.join(", ")))),
    }
}

fn group_nerve(g: &FinGroup, d: usize) -> Result<Arc<SSet>> {
    Ok(Arc::new(nerve(&Groupoid::from_group(g), d)?))
}

/// `λ^k_i` bijective for `1 < k ≤ 4` and surjective for `k = 1`, checked
/// horn by horn, and the nerve-groupoid round trip.
pub fn grothendieck(seed: u64) -> Result<SuiteReport> {
    let mut r = SuiteReport::new("grothendieck", seed);
    let mut inputs: Vec<(String, Groupoid)> = groups_up_to_12()
        .into_iter()
        .map(|(n, g)| (n, Groupoid::from_group(&g)))
        .collect();
    inputs.extend((seed..seed + 5).map(|s| (format!("random groupoid {s}"), random_groupoid(s))));
    for (name, g) in inputs {
        let x = Arc::new(nerve(&g, 4)?);
        let mut bad = Vec::new();
        for k in 1..=4 {
            for i in 0..=k {
                let h = abs_horn(&x, k, i)?;
                let ok = if k == 1 { h.surjectivity_failure().is_none() } else { h.is_bijective() };
                if !ok {
                    bad.push(format!("Λ^{k}_{i}"));
                }
            }
        }
        r.check(format!("{name}: horn maps"), bad.is_empty(), bad.join(" "));
        let back = extract_groupoid(&x)?;
        let again = nerve(&back, 4)?;
        r.check(format!("{name}: round trip"), back == g && again == *x, "");
    }
    Ok(r)
}

/// Every horn with `k ≤ 3` of the test groups, filled by Moore's algorithm
/// and compared with all fillers found by scanning `G_k`.
pub fn moore(seed: u64) -> Result<SuiteReport> {
    let mut r = SuiteReport::new("moore", seed);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let small: Vec<(String, FinGroup)> = groups_up_to_12().into_iter().filter(|(_, g)| g.order <= 6).collect();
    let (extra_name, extra) = small.choose(&mut rng).expect("nonempty").clone();
    let groups: Vec<(String, SimplicialGroup, usize)> = vec![
        ("K(Z/2,1)".into(), SimplicialGroup::nerve_of_abelian(&FinGroup::cyclic(2), 3)?, 2),
        ("K(Z/3,1)".into(), SimplicialGroup::nerve_of_abelian(&FinGroup::cyclic(3), 3)?, 2),
        ("constant S3".into(), SimplicialGroup::constant(&FinGroup::symmetric3(), 3), 1),
        (format!("constant {extra_name}"), SimplicialGroup::constant(&extra, 3), 1),
    ];
    for (name, g, strict_n) in groups {
        let x = &g.sset;
        let mut horns = 0usize;
        let mut bad = Vec::new();
        for k in 1..=3 {
            for i in 0..=k {
                let h = abs_horn(x, k, i)?;
                let mut fillers: Vec<Vec<usize>> = vec![Vec::new(); h.len()];
                for s in 0..x.size(k) {
                    fillers[h.comparison[s]].push(s);
                }
                for (hid, all) in fillers.iter().enumerate() {
                    horns += 1;
                    let t = h.carrier.get(hid);
                    let mut faces: Vec<Option<usize>> = vec![None; k + 1];
                    let mut p = 0;
                    for (j, slot) in faces.iter_mut().enumerate() {
                        if j != i {
                            *slot = Some(t[p]);
                            p += 1;
                        }
                    }
                    let v = moore_fill(&g, k, i, &faces, None)?;
                    if !all.contains(&v) || (k >= strict_n && all.len() != 1) {
                        bad.push(format!("Λ^{k}_{i} horn {hid}"));
                    }
                }
            }
        }
        r.check(format!("{name}: {horns} horns filled"), bad.is_empty(), bad.join(" "));
        let v = classify_strict(&g, strict_n)?;
        r.check(format!("{name}: strict {strict_n}-group"), v.is_pass(), v.label());
    }
    Ok(r)
}

/// `W̄` of constant groups against nerves, and `W̄K(A,1) ≅ K(A,2)` with the
/// sizes of both sides computed independently.
pub fn wbar(seed: u64) -> Result<SuiteReport> {
    let mut r = SuiteReport::new("wbar", seed);
    for (name, g) in groups_up_to_12().into_iter().filter(|(_, g)| g.order <= 8) {
        let d = if g.order <= 4 { 4 } else { 3 };
        let wb = w_bar(&SimplicialGroup::constant(&g, d - 1), d)?;
        let nv = nerve(&Groupoid::from_group(&g), d)?.with_coskeletal_above(wb.sset.coskeletal_above());
        r.check(format!("W̄({name}) = N({name})"), *wb.sset == nv, "");
    }
    for (m, d, expect) in [(2usize, 4usize, vec![1usize, 1, 2, 8, 64]), (3, 3, vec![1, 1, 3, 27])] {
        let a = FinGroup::cyclic(m);
        let k1 = em_space(&a, 1, d)?;
        let iso = wbar_em_iso(&k1, d)?;
        let by_product = iso.wbar.sset.sizes().to_vec();
        let by_cocycles = em_space(&a, 2, d)?.sset().sizes().to_vec();
        r.check(
            format!("K(Z/{m},2) sizes"),
            by_product == by_cocycles && by_cocycles == expect,
            format!("{by_product:?} {by_cocycles:?}"),
        );
        r.check(
            format!("W̄K(Z/{m},1) -> K(Z/{m},2) iso"),
            iso.is_bijective() && iso.map.check().is_empty() && iso.homomorphism_failure().is_none(),
            "",
        );
    }
    Ok(r)
}

/// All homomorphisms `g -> h`, by brute force.
fn homomorphisms(g: &FinGroup, h: &FinGroup) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let total = h.order.pow(g.order as u32);
    for code in 0..total {
        let mut phi = vec![0; g.order];
        let mut c = code;
        for slot in phi.iter_mut() {
            *slot = c % h.order;
            c /= h.order;
        }
        if (0..g.order).all(|a| (0..g.order).all(|b| phi[g.m(a, b)] == h.m(phi[a], phi[b]))) {
            out.push(phi);
        }
    }
    out
}

/// Composites and pullbacks of hypercovers and stacks re-classified, and the
/// `μ/λ` factorization checked elementwise.
pub fn stability(seed: u64) -> Result<SuiteReport> {
    let mut r = SuiteReport::new("stability", seed);
    let mut covers: Vec<(&str, (Vec<usize>, usize))> = standard_covers().into_iter().collect();
    covers.sort();
    let others = [(vec![0usize, 0], 1usize), (vec![0, 1, 1], 2)];
    for (j, (name, (p, nv))) in covers.iter().enumerate() {
        let c = cech_nerve(p, *nv, 3)?;
        let h = level_one_hypercover(c.source(), 2, 1, seed + j as u64)?;
        for n in [Nat::Inf, Nat::Fin(2)] {
            let rep = compose_check(&h, &c, n, Kind::Hypercover)?;
            let ok = rep.inputs.iter().all(|v| v.is_pass()) && rep.output.is_pass();
            r.check(format!("{name}: refinement then Čech, {n}-hypercover"), ok, rep.output.label());
        }
        let other = &others[usize::from(*nv == 2)];
        let g = cech_nerve(&other.0, other.1, 3)?;
        let rep = pullback_check(&c, &g, Nat::Fin(1), Kind::Hypercover)?;
        r.check(
            format!("{name}: pullback of Čech nerve, 1-hypercover"),
            rep.inputs[0].is_pass() && rep.output.is_pass(),
            rep.output.label(),
        );
        let rep = pullback_check(&c, &g, Nat::Fin(1), Kind::Stack)?;
        r.check(
            format!("{name}: pullback of Čech nerve, 1-stack"),
            rep.inputs[0].is_pass() && rep.output.is_pass(),
            rep.output.label(),
        );
        let mut factor = true;
        for k in 1..=3 {
            for i in 0..=k {
                factor &= check_mu_lambda(&c, k, i)?;
                factor &= check_mu_lambda(&h, k, i)?;
            }
        }
        r.check(format!("{name}: μ/λ factorization"), factor, "");
    }
    let (s3, z2, z4) = (FinGroup::symmetric3(), FinGroup::cyclic(2), FinGroup::cyclic(4));
    let sign = homomorphisms(&s3, &z2)
        .into_iter()
        .find(|phi| phi.iter().any(|&v| v != 0))
        .ok_or_else(|| Error::Invariant("S3 has no sign map".into()))?;
    let f = hom_map(&s3, &z2, &sign, 3)?;
    let to_pt = SMap::to_terminal(group_nerve(&z2, 3)?);
    let rep = compose_check(&f, &to_pt, Nat::Fin(1), Kind::Stack)?;
    r.check(
        "sign map then point, 1-stack",
        rep.inputs.iter().all(|v| v.is_pass()) && rep.output.is_pass(),
        rep.output.label(),
    );
    let mod2: Vec<usize> = (0..4).map(|x| x % 2).collect();
    let g = hom_map(&z4, &z2, &mod2, 3)?;
    for (what, n) in [("1-stack", Nat::Fin(1)), ("∞-stack", Nat::Inf)] {
        let rep = pullback_check(&f, &g, n, Kind::Stack)?;
        r.check(
            format!("sign map pulled back along Z/4 -> Z/2, {what}"),
            rep.inputs[0].is_pass() && rep.output.is_pass(),
            rep.output.label(),
        );
    }
    Ok(r)
}

/// `P^{≥k}(f)` of fixture n-stacks as `(n-k)`-groupoids, augmentations of
/// hypercovers, and the subset model against the join model.
pub fn pathspace(seed: u64) -> Result<SuiteReport> {
    let mut r = SuiteReport::new("pathspace", seed);
    let (z2, z3, s3) = (FinGroup::cyclic(2), FinGroup::cyclic(3), FinGroup::symmetric3());
    let sign = homomorphisms(&s3, &z2)
        .into_iter()
        .find(|phi| phi.iter().any(|&v| v != 0))
        .ok_or_else(|| Error::Invariant("S3 has no sign map".into()))?;
    let stacks: Vec<(String, SMap, usize)> = vec![
        ("N(Z/2) -> ∗".into(), SMap::to_terminal(group_nerve(&z2, 4)?), 1),
        ("N(Z/3) -> ∗".into(), SMap::to_terminal(group_nerve(&z3, 4)?), 1),
        ("N(S3) -> N(Z/2)".into(), hom_map(&s3, &z2, &sign, 4)?, 1),
        ("Čech [0,0,1]".into(), cech_nerve(&[0, 0, 1], 2, 4)?, 1),
        ("K(Z/2,2) -> ∗".into(), SMap::to_terminal(em_space(&z2, 2, 4)?.sset().clone()), 2),
        ("constant 3 -> ∗".into(), SMap::to_terminal(Arc::new(SSet::constant(3, 4))), 0),
    ];
    for (name, f, n) in &stacks {
        let v = classify(f, Nat::Fin(*n), Kind::Stack)?;
        r.check(format!("{name}: {n}-stack"), v.is_pass(), v.label());
        for k in 0..=*n {
            let p = path_space(f, k, 4 - k)?;
            let v = classify_object(&p.carrier, Nat::Fin(n - k))?;
            r.check(format!("{name}: P^≥{k} is a {}-groupoid", n - k), v.is_pass(), v.label());
        }
        for k in 1..=3 {
            let p = path_space(f, k, 4 - k)?;
            let ok = path_space_by_join(f, k, 4 - k)? == p.embed;
            r.check(format!("{name}: subset and join models agree at k={k}"), ok, "");
        }
    }
    let hypercovers: Vec<(String, SMap, usize)> = vec![
        ("Čech [0,0,0]".into(), cech_nerve(&[0, 0, 0], 1, 4)?, 1),
        ("Čech [0,0,1,1]".into(), cech_nerve(&[0, 0, 1, 1], 2, 4)?, 1),
        ("identity of N(Z/2)".into(), SMap::identity(group_nerve(&z2, 4)?), 0),
    ];
    for (name, f, n) in &hypercovers {
        let v = classify(f, Nat::Fin(*n), Kind::Hypercover)?;
        r.check(format!("{name}: {n}-hypercover"), v.is_pass(), v.label());
        for k in 0..=*n {
            let p = path_space(f, k, 4 - k)?;
            let (_, _, map) = augment_to_matching(f, &p)?;
            let v = classify(&map, Nat::Fin(n - k), Kind::Hypercover)?;
            r.check(format!("{name}: augmentation of P^≥{k} is a {}-hypercover", n - k), v.is_pass(), v.label());
        }
    }
    Ok(r)
}

/// `τ_n(f) ≅ f` exactly for n-stacks, well-defined missing faces, and the
/// hypercover assertions on Čech nerves.
pub fn strictify_suite(seed: u64) -> Result<SuiteReport> {
    let mut r = SuiteReport::new("strictify", seed);
    let z2 = FinGroup::cyclic(2);
    let fixtures: Vec<(String, SMap, usize)> = vec![
        ("N(Z/2) -> ∗".into(), SMap::to_terminal(group_nerve(&z2, 3)?), 1),
        ("N(Z/2) -> ∗".into(), SMap::to_terminal(group_nerve(&z2, 2)?), 0),
        ("N(Z/3) -> ∗".into(), SMap::to_terminal(group_nerve(&FinGroup::cyclic(3), 2)?), 0),
        (
            "N(2 objects, Z/3) -> ∗".into(),
            SMap::to_terminal(Arc::new(nerve(&Groupoid::transitive(2, &FinGroup::cyclic(3)), 3)?)),
            1,
        ),
        ("Čech [0,0,1,1,1]".into(), cech_nerve(&[0, 0, 1, 1, 1], 2, 3)?, 1),
        ("Čech [0,0,1,1,1]".into(), cech_nerve(&[0, 0, 1, 1, 1], 2, 2)?, 0),
        ("K(Z/2,2) -> ∗".into(), SMap::to_terminal(em_space(&z2, 2, 4)?.sset().clone()), 2),
        ("K(Z/2,2) -> ∗".into(), SMap::to_terminal(em_space(&z2, 2, 3)?.sset().clone()), 1),
    ];
    for (name, f, n) in &fixtures {
        let s = strictify(f, *n)?;
        let c = compare_with_input(&s)?;
        let stack = c.is_stack.is_pass();
        r.check(
            format!("{name}, n={n}: τ_n ≅ f iff n-stack ({})", if stack { "stack" } else { "not a stack" }),
            c.consistent() && !matches!(c.iso, IsoSearch::Inconclusive),
            c.is_stack.label(),
        );
        let mut lifts = 0;
        let mut ok = true;
        for i in 0..=n + 1 {
            match missing_face(&s, i) {
                Ok(mf) => lifts += mf.lifts_checked,
                Err(e) => {
                    ok = false;
                    r.check(format!("{name}, n={n}: missing face d_{i}"), false, e.to_string());
                }
            }
        }
        r.check(format!("{name}, n={n}: missing faces well defined"), ok, format!("{lifts} lifts"));
    }
    for (p, nv) in [(vec![0usize, 0, 0], 1usize), (vec![0, 0, 1, 1, 1], 2), (vec![0, 1, 1], 2)] {
        for n in 0..=1 {
            let f = cech_nerve(&p, nv, n + 2)?;
            let (_, rep) = strictify_hypercover_check(&f, n)?;
            r.check(
                format!("Čech {p:?}, n={n}: strictified hypercover"),
                rep.all_pass(),
                format!(
                    "{} {} {:?}",
                    rep.strict_is_hypercover.label(),
                    rep.comparison_is_hypercover.label(),
                    rep.coskeleton_iso.found()
                ),
            );
        }
    }
    Ok(r)
}

/// Descent of `c = 0` and `c = abc` on `Z/2`, with extraction and the
/// isomorphism search over `W̄G`.
pub fn descent(seed: u64) -> Result<SuiteReport> {
    let mut r = SuiteReport::new("descent", seed);
    let z2 = FinGroup::cyclic(2);
    let zero = GroupCocycle::zero(&z2, &z2, 3);
    let abc = GroupCocycle::from_fn(&z2, &z2, 3, |t| t[0] * t[1] * t[2])?;
    let mut outs = Vec::new();
    for (name, c) in [("c = 0", &zero), ("c = abc", &abc)] {
        let d = descend(&group_cocycle_as_span(c, 4)?)?;
        let x = d.x();
        r.check(format!("{name}: X_0 = ∗"), x.size(0) == 1, "");
        r.check(format!("{name}: 2-groupoid"), d.groupoid.is_pass(), d.groupoid.label());
        r.check(
            format!("{name}: sizes"),
            x.sizes()[..4] == [1, 2, 8, 64],
            format!("{:?}", x.sizes()),
        );
        let data = extract_two_group_data(&d);
        let detail = match &data {
            Ok(t) => format!("ζ takes {} nonzero values", t.zeta.iter().filter(|&&v| v != z2.e).count()),
            Err(e) => e.to_string(),
        };
        r.check(format!("{name}: torsor and pentagon"), data.is_ok(), detail);
        if let Ok(t) = data {
            let diff = t.associator.add(&c.neg())?;
            let coh = diff.is_coboundary(1 << 20)?;
            r.check(
                format!("{name}: associator cohomologous to c"),
                matches!(coh, crate::em::CoboundarySearch::Found(_)),
                "",
            );
        }
        outs.push(d);
    }
    let iso = iso_over_base(&outs[1], &outs[0], DEFAULT_NODE_LIMIT)?;
    r.check("c = abc and c = 0 not isomorphic over W̄G", iso == IsoSearch::NoIso, format!("{iso:?}"));
    Ok(r)
}

/// The join-horn isomorphisms for `k + ℓ ≤ 4` and expansion certificates
/// for every generalized horn `Λ^n_J`, `n ≤ 4`.
pub fn join(seed: u64) -> Result<SuiteReport> {
    let mut r = SuiteReport::new("join", seed);
    let fixtures: Vec<(String, SMap)> = vec![
        ("Čech [0,0,1]".into(), cech_nerve(&[0, 0, 1], 2, 4)?),
        ("N(Z/2) -> ∗".into(), SMap::to_terminal(group_nerve(&FinGroup::cyclic(2), 4)?)),
    ];
    for (name, f) in &fixtures {
        for k in 1..=3 {
            for l in 1..=4 - k {
                for i in 0..=l {
                    let rep = check_star_l(f, k, l, i)?;
                    r.check(
                        format!("{name}: Λ^{l}_{i} of the boundary-star object vs Λ^{}_{}", k + l, k + i),
                        rep.ok(),
                        format!("{} / {}", rep.left_size, rep.right_size),
                    );
                }
            }
        }
    }
    for n in 1..=4usize {
        let mut found = 0;
        let mut missing = Vec::new();
        for mask in 1u32..(1 << (n + 1)) - 1 {
            let js: Vec<usize> = (0..=n).filter(|&j| mask & (1 << j) != 0).collect();
            let start = Complex::horn_j(n, &js);
            let target = Complex::simplex(n);
            match find_expansion(&start, &target)? {
                Some(cert) if replay(&start, &cert)? == target.simplices() => found += 1,
                _ => missing.push(format!("{js:?}")),
            }
        }
        r.check(format!("Λ^{n}_J expands to Δ^{n} for all proper J"), missing.is_empty(), format!("{found} certificates {}", missing.join(" ")));
    }
    Ok(r)
}
