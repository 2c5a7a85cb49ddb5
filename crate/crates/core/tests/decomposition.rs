mod common;

use pinblock::control::controllable_dim;
use pinblock::hatdecomp::hat_transform;
use pinblock::netmodel::{
    build_pair, fixture_fig2, fixture_fig5, format_edge_list, gen_erdos_renyi, parse_edge_list,
    pick_pins, rng_from_seed,
};
use pinblock::report::{DecomposeReport, Verdict};
use pinblock::sbd::{finest_sbd, BlockClass, BlockKind};
use pinblock::Tolerance;
use rand::Rng;

#[test]
fn both_routes_agree_on_random_networks() {
    let tol = Tolerance::default();
    let mut rng = rng_from_seed(2024);
    for trial in 0..30u64 {
        let net = gen_erdos_renyi(16, 0.2, 500 + trial).unwrap();
        let s = rng.random_range(1..=15);
        let net = pick_pins(&net, s, trial).unwrap();
        let pair = build_pair(&net).unwrap();
        let dec = finest_sbd(&pair, trial, &tol).unwrap();
        let rep = hat_transform(&pair, &tol).unwrap();
        assert_eq!(dec.size_multiset(), rep.size_multiset(), "trial {trial}");
        let v = common::transform_violations(&pair, &dec.t, &dec.blocks);
        assert!(v.is_empty(), "sbd trial {trial}: {v:?}");
        let v = common::transform_violations(&pair, &rep.t_refined, &rep.blocks);
        assert!(v.is_empty(), "hat trial {trial}: {v:?}");
        let c = controllable_dim(&pair.l, &pair.r, &tol).unwrap();
        assert_eq!(c, common::kalman_rank_mod_p(&pair.l, &pair.r));
        assert_eq!(rep.sizes.controllable(), c);
    }
}

#[test]
fn decomposition_is_repeatable_and_seed_robust() {
    let tol = Tolerance::default();
    let net = pick_pins(&gen_erdos_renyi(14, 0.25, 77).unwrap(), 4, 3).unwrap();
    let pair = build_pair(&net).unwrap();
    let a = finest_sbd(&pair, 9, &tol).unwrap();
    let b = finest_sbd(&pair, 9, &tol).unwrap();
    assert_eq!(a, b);
    for seed in 0..5 {
        assert_eq!(finest_sbd(&pair, seed, &tol).unwrap().size_multiset(), a.size_multiset());
    }
}

#[test]
fn fig2_end_to_end() {
    let tol = Tolerance::default();
    let net = fixture_fig2();
    let pair = build_pair(&net).unwrap();
    let dec = finest_sbd(&pair, 1, &tol).unwrap();
    let rep = hat_transform(&pair, &tol).unwrap();
    let c = controllable_dim(&pair.l, &pair.r, &tol).unwrap();
    let r = DecomposeReport::new(&net.pinned, c, &dec, &rep);
    assert_eq!(r.verdict, Verdict::Match);
    assert_eq!(r.sbd.size_multiset, vec![1, 1, 1, 2]);
    assert_eq!((rep.sizes.qc, rep.sizes.rc, rep.sizes.qu, rep.sizes.ru), (2, 0, 0, 3));
    let qc: Vec<_> = r.hat.blocks.iter().filter(|b| b.class == BlockClass::Qc).collect();
    assert_eq!(qc.len(), 1);
    assert!((qc[0].l_spectrum[0] + 5.0).abs() < 1e-9);
    assert!(qc[0].l_spectrum[1].abs() < 1e-9);
    let mut ru = r.hat.class_spectra.ru.clone();
    ru.sort_by(f64::total_cmp);
    let s2 = 2f64.sqrt();
    for (got, want) in ru.iter().zip([-(3.0 + s2), -3.0, -(3.0 - s2)]) {
        assert!((got - want).abs() < 1e-9);
    }
}

#[test]
fn fig5_end_to_end() {
    let tol = Tolerance::default();
    let pair = build_pair(&fixture_fig5()).unwrap();
    let rep = hat_transform(&pair, &tol).unwrap();
    assert_eq!((rep.sizes.qc, rep.sizes.rc, rep.sizes.qu, rep.sizes.ru), (7, 1, 1, 1));
    let dec = finest_sbd(&pair, 5, &tol).unwrap();
    assert_eq!(dec.size_multiset(), rep.size_multiset());
    assert_eq!(dec.driven_size(), 8);
    assert!(dec.blocks.iter().filter(|b| b.kind == BlockKind::Undriven).all(|b| b.size() == 1));
}

#[test]
fn edge_list_round_trip_keeps_decomposition() {
    let tol = Tolerance::default();
    let net = fixture_fig5();
    let text = format_edge_list(&net);
    let back = parse_edge_list(&text, None).unwrap().with_pins(&net.pinned).unwrap();
    assert_eq!(back.adjacency, net.adjacency);
    let a = hat_transform(&build_pair(&net).unwrap(), &tol).unwrap();
    let b = hat_transform(&build_pair(&back).unwrap(), &tol).unwrap();
    assert_eq!(a.sizes, b.sizes);
}
