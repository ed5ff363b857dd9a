use std::sync::Arc;

use proptest::prelude::*;

use finstack::em::{coboundary, CoboundarySearch, GroupCocycle};
use finstack::fixtures::{cech_nerve, level_one_hypercover};
use finstack::group::{extract_groupoid, nerve, random_groupoid, FinGroup, Groupoid};
use finstack::join::{find_expansion, replay};
use finstack::json::{CocycleDoc, SSetDoc};
use finstack::kan::{abs_horn, check_mu_lambda, classify, classify_object, Kind, Nat};
use finstack::shapes::Complex;
use finstack::simp_group::{moore_fill, SimplicialGroup};
use finstack::sset::{coskeleton, pi0, SMap};
use finstack::strictify::{check_idempotent, strictify};

fn surjection() -> impl Strategy<Value = (Vec<usize>, usize)> {
    (1usize..=3).prop_flat_map(|nv| {
        proptest::collection::vec(0..nv, nv..=4).prop_map(move |mut p| {
            for (v, slot) in p.iter_mut().enumerate().take(nv) {
                *slot = v;
            }
            (p, nv)
        })
    })
}

fn small_group() -> impl Strategy<Value = FinGroup> {
    prop_oneof![
        Just(FinGroup::cyclic(2)),
        Just(FinGroup::cyclic(3)),
        Just(FinGroup::cyclic(4)),
        Just(FinGroup::direct_product(&FinGroup::cyclic(2), &FinGroup::cyclic(2))),
        Just(FinGroup::symmetric3()),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn groupoid_nerves_are_one_groupoids(seed in 0u64..10_000) {
        let g = random_groupoid(seed);
        let x = Arc::new(nerve(&g, 3).unwrap());
        prop_assert!(x.validate().is_empty());
        prop_assert!(classify_object(&x, Nat::Fin(1)).unwrap().is_pass());
        for i in 0..=1 {
            prop_assert!(abs_horn(&x, 1, i).unwrap().surjectivity_failure().is_none());
        }
        prop_assert_eq!(extract_groupoid(&x).unwrap(), g);
    }

    #[test]
    fn cech_nerves_of_surjections((p, nv) in surjection()) {
        let f = cech_nerve(&p, nv, 3).unwrap();
        prop_assert!(f.source().validate().is_empty());
        prop_assert!(f.check().is_empty());
        let hyper = classify(&f, Nat::Fin(1), Kind::Hypercover).unwrap();
        prop_assert!(hyper.is_pass());
        prop_assert!(classify(&f, Nat::Fin(1), Kind::Stack).unwrap().is_pass());
        prop_assert_eq!(pi0(f.source()).unwrap().classes, nv);
        for k in 1..=3 {
            for i in 0..=k {
                prop_assert!(check_mu_lambda(&f, k, i).unwrap());
            }
        }
    }

    #[test]
    fn pi0_of_cech_nerve_is_the_base((p, nv) in surjection()) {
        let f = cech_nerve(&p, nv, 2).unwrap();
        let comps = pi0(f.source()).unwrap();
        for a in 0..p.len() {
            for b in 0..p.len() {
                prop_assert_eq!(comps.map[a] == comps.map[b], p[a] == p[b]);
            }
        }
    }

    #[test]
    fn coskeleton_is_idempotent(seed in 0u64..10_000, n in 1usize..=2) {
        let x = nerve(&random_groupoid(seed), 3).unwrap();
        let once = coskeleton(&x, n, 3).unwrap();
        prop_assert!(once.validate().is_empty());
        prop_assert_eq!(coskeleton(&once, n, 3).unwrap(), once);
    }

    #[test]
    fn refinements_of_cech_nerves_are_hypercovers((p, nv) in surjection(), seed in 0u64..1000) {
        let c = cech_nerve(&p, nv, 3).unwrap();
        let h = level_one_hypercover(c.source(), 2, 1, seed).unwrap();
        prop_assert!(classify(&h, Nat::Inf, Kind::Hypercover).unwrap().is_pass());
        let composite = h.then(&c).unwrap();
        prop_assert!(classify(&composite, Nat::Inf, Kind::Hypercover).unwrap().is_pass());
    }

    #[test]
    fn strictification_is_idempotent((p, nv) in surjection(), n in 0usize..=1) {
        let f = cech_nerve(&p, nv, n + 2).unwrap();
        let s = strictify(&f, n).unwrap();
        prop_assert!(s.assembled.source().validate().is_empty());
        prop_assert!(check_idempotent(&s).unwrap());
    }

    #[test]
    fn moore_fillers_match_faces(g in small_group(), k in 1usize..=3, seed in 0usize..1000) {
        let sg = SimplicialGroup::nerve_of_abelian(&g, 3);
        prop_assume!(sg.is_ok());
        let sg = sg.unwrap();
        let x = sg.sset.clone();
        let s = seed % x.size(k);
        let i = seed % (k + 1);
        let faces: Vec<Option<usize>> = (0..=k).map(|j| (j != i).then(|| x.face(k, j, s))).collect();
        let v = moore_fill(&sg, k, i, &faces, None).unwrap();
        for (j, f) in faces.iter().enumerate() {
            if let Some(f) = f {
                prop_assert_eq!(x.face(k, j, v), *f);
            }
        }
        if k >= 2 {
            prop_assert_eq!(v, s);
        }
    }

    #[test]
    fn constant_group_fillers(g in small_group(), k in 1usize..=3, seed in 0usize..1000) {
        let sg = SimplicialGroup::constant(&g, 3);
        let x = sg.sset.clone();
        let s = seed % x.size(k);
        let i = seed % (k + 1);
        let faces: Vec<Option<usize>> = (0..=k).map(|j| (j != i).then(|| x.face(k, j, s))).collect();
        prop_assert_eq!(moore_fill(&sg, k, i, &faces, None).unwrap(), s);
    }

    #[test]
    fn generalized_horns_expand(n in 1usize..=4, mask in 1u32..31) {
        let full = (1u32 << (n + 1)) - 1;
        let mask = mask & full;
        prop_assume!(mask != 0 && mask != full);
        let js: Vec<usize> = (0..=n).filter(|&j| mask & (1 << j) != 0).collect();
        let start = Complex::horn_j(n, &js);
        let target = Complex::simplex(n);
        let cert = find_expansion(&start, &target).unwrap().expect("horns expand to the simplex");
        prop_assert_eq!(replay(&start, &cert).unwrap(), target.simplices().to_vec());
    }

    #[test]
    fn coboundaries_are_found(m in 2usize..=3, b in proptest::collection::vec(0usize..3, 9)) {
        let g = FinGroup::cyclic(m);
        let a = FinGroup::cyclic(3);
        let mut b2: Vec<usize> = b[..m * m].to_vec();
        for x in 0..m {
            b2[x] = 0;
            b2[x * m] = 0;
        }
        let c = GroupCocycle::new(g.clone(), a.clone(), 3, coboundary(&g, &a, 2, &b2)).unwrap();
        prop_assert!(c.cocycle_failure().is_none());
        prop_assert!(matches!(c.is_coboundary(1 << 20).unwrap(), CoboundarySearch::Found(_)));
        prop_assert!(matches!(c.neg().add(&c).unwrap().is_coboundary(1 << 20).unwrap(), CoboundarySearch::Found(_)));
    }

    #[test]
    fn cocycle_documents_round_trip(vals in proptest::collection::vec(0usize..2, 8), shift in 0usize..2) {
        let z2 = FinGroup::cyclic(2);
        let mut b = vals[..4].to_vec();
        b[0] = 0;
        b[1] = 0;
        b[2] = 0;
        let exact = coboundary(&z2, &z2, 2, &b);
        let values: Vec<usize> = (0..8).map(|id| (exact[id] + shift * usize::from(id == 7)) % 2).collect();
        let c = GroupCocycle::new(z2.clone(), z2, 3, values).unwrap();
        let text = serde_json::to_string(&CocycleDoc::from_cocycle(&c)).unwrap();
        let back: CocycleDoc = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(back.to_cocycle().unwrap(), c);
    }

    #[test]
    fn sset_documents_round_trip(seed in 0u64..10_000) {
        let x = nerve(&random_groupoid(seed), 2).unwrap();
        let text = serde_json::to_string(&SSetDoc::from_sset(&x)).unwrap();
        let again = serde_json::to_string(&SSetDoc::from_sset(&serde_json::from_str::<SSetDoc>(&text).unwrap().to_sset().unwrap())).unwrap();
        prop_assert_eq!(text, again);
    }
}

#[test]
fn group_nerve_horns_for_all_small_groups() {
    for g in [FinGroup::cyclic(5), FinGroup::dihedral(4), FinGroup::alternating4()] {
        let x = Arc::new(nerve(&Groupoid::from_group(&g), 3).unwrap());
        for k in 2..=3 {
            for i in 0..=k {
                assert!(abs_horn(&x, k, i).unwrap().is_bijective());
            }
        }
        let f = SMap::to_terminal(x.clone());
        assert!(classify(&f, Nat::Fin(1), Kind::Stack).unwrap().is_pass());
    }
}
