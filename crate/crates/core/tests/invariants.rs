use proptest::prelude::*;

use xmodhol_core::corpus::{self, Topo};
use xmodhol_core::holonomy::{
    build_wg, enumerate_minimal, generation, germ_inv, germ_mul, holonomy_groupoid, Frame, HolonomyOptions, WStructure,
};
use xmodhol_core::homotopy::{enumerate_derivations, whitehead_mul};
use xmodhol_core::scenario::{corpus_scenario, Scenario};
use xmodhol_core::CrossedModule;

fn xmods() -> Vec<CrossedModule> {
    corpus::with_whole_w().into_iter().map(|i| i.xmod).collect()
}

proptest! {
    #[test]
    fn section_products_stay_valid_and_match_germs(item in 0usize..9, i in 0usize..64, j in 0usize..64) {
        let cm = &xmods()[item];
        let fr = Frame::new(cm).unwrap();
        let all = enumerate_minimal(&fr, None);
        let (s, t) = (&all[i % all.len()], &all[j % all.len()]);
        let st = s.mul(&fr, t);
        prop_assert!(st.is_valid(&fr), "{:?}", st.violations(&fr));
        prop_assert!(s.inverse(&fr).is_valid(&fr));
        for a in st.u1().ones() {
            let b = t.square(&fr, a).unwrap().top;
            let via = germ_mul(&fr, &s.germ_at(&fr, b).unwrap(), &t.germ_at(&fr, a).unwrap());
            prop_assert_eq!(via, Some(st.germ_at(&fr, a).unwrap()));
        }
        for a in t.u1().ones() {
            let germ = t.germ_at(&fr, a).unwrap();
            let b = germ.source(&fr);
            prop_assert_eq!(germ_inv(&fr, &germ), Some(t.inverse(&fr).germ_at(&fr, b).unwrap()));
        }
    }

    #[test]
    fn whitehead_product_is_associative(item in 0usize..9, i in 0usize..8, j in 0usize..8, k in 0usize..8) {
        let cm = &xmods()[item];
        let all = enumerate_derivations(cm);
        let (s, t, u) = (&all[i % all.len()], &all[j % all.len()], &all[k % all.len()]);
        let left = whitehead_mul(cm, &whitehead_mul(cm, s, t).unwrap(), u).unwrap();
        let right = whitehead_mul(cm, s, &whitehead_mul(cm, t, u).unwrap()).unwrap();
        prop_assert_eq!(left, right);
    }

    #[test]
    fn generation_directions(mask in 0u32..256, discrete in any::<bool>(), which in 0usize..2) {
        let topo = if discrete { Topo::Discrete } else { Topo::Indiscrete };
        let cm = if which == 0 { corpus::pairz2(topo) } else { corpus::z4int(topo) };
        let c = cm.c();
        let names: Vec<String> = (0..c.num_arrows()).filter(|k| mask >> k & 1 == 1).map(|k| c.arrow_name(k).to_string()).collect();
        let Ok(w) = WStructure::new(&cm, &names, None) else { return Ok(()) };
        let fr = Frame::new(&cm).unwrap();
        let wg = build_wg(&fr, &w).unwrap();
        let g = generation(&fr, &w, &wg);
        if g.w_generates_c && g.w_equivariant {
            prop_assert!(g.wg_generates_d);
        }
        if g.wg_generates_d {
            prop_assert!(g.orbit_generates_c);
        }
        if g.w_equivariant {
            prop_assert!(g.verdict().passed);
        }
    }
}

#[test]
fn diagnostic_pipeline_invariants_on_every_item() {
    for item in corpus::all_items() {
        let w = WStructure::new(&item.xmod, &item.w, Some(item.w_topology.clone())).unwrap();
        let opts = HolonomyOptions { require_axioms: false, ..HolonomyOptions::default() };
        let hol = holonomy_groupoid(&item.xmod, &w, opts).unwrap();
        let props = hol.properties();
        for id in ["J0 wide and normal", "quotient well defined", "psi identity on G", "psi morphism", "psi i = id"] {
            let v = props.iter().find(|v| v.id == id).unwrap();
            assert!(v.passed, "{}: {v}", item.name);
        }
        assert!(hol.groupoid().check().is_empty(), "{}", item.name);
        assert!(hol.psi().check(hol.groupoid(), hol.frame().dg().vertical()).is_empty(), "{}", item.name);
    }
}

#[test]
fn scenario_files_rebuild_the_corpus() {
    for item in corpus::all_items() {
        let sc = Scenario::from_json(&corpus_scenario(&item).to_json(), 64).unwrap();
        let cm = sc.xmod("X").unwrap();
        assert_eq!(cm.action_entries(), item.xmod.action_entries(), "{}", item.name);
        assert_eq!(cm.delta_table(), item.xmod.delta_table());
        assert_eq!(cm.c().topology(), item.xmod.c().topology());
        assert_eq!(cm.g().topology(), item.xmod.g().topology());
    }
}
