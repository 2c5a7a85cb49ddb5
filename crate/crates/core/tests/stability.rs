use pinblock::netmodel::{build_pair, fixture_fig2};
use pinblock::sbd::{finest_sbd, BlockKind};
use pinblock::stability::{
    block_mle, find_gamma_stars, gamma_sweep, simulate_network, sweep_blocks_sbd, BlockFilter,
    BlockVariational, Direction, MleParams, OscillatorSpec, SimParams, SweepBlock, DEFAULT_X0,
};
use pinblock::Tolerance;

fn fig2_blocks(filter: BlockFilter) -> Vec<SweepBlock> {
    let pair = build_pair(&fixture_fig2()).unwrap();
    let dec = finest_sbd(&pair, 1, &Tolerance::default()).unwrap();
    sweep_blocks_sbd(&dec, filter)
}

fn mle(b: &SweepBlock, gamma: f64, p: &MleParams, seed: u64) -> f64 {
    let osc = OscillatorSpec::rossler_x_coupling();
    let tr = p.target(&osc, &DEFAULT_X0).unwrap();
    let bv = BlockVariational {
        l_block: b.l_block.clone(),
        r_block: b.r_block.clone(),
        gamma,
    };
    block_mle(&bv, &osc, &tr, p, seed).unwrap()
}

#[test]
fn halving_dt_moves_each_exponent_little() {
    let coarse = MleParams::default();
    let fine = MleParams {
        dt: coarse.dt / 2.0,
        ..coarse.clone()
    };
    for b in fig2_blocks(BlockFilter::All) {
        let gammas: &[f64] = if b.kind == BlockKind::Driven { &[0.0, 1.5, 3.0] } else { &[0.0] };
        for &g in gammas {
            let a = mle(&b, g, &coarse, 1);
            let c = mle(&b, g, &fine, 1);
            assert!((a - c).abs() < 0.01, "block {} gamma {g}: {a} vs {c}", b.id);
        }
    }
}

#[test]
fn exponent_does_not_depend_on_initial_perturbation() {
    let p = MleParams::default();
    for b in fig2_blocks(BlockFilter::DrivenOnly) {
        let vals: Vec<f64> = (0..4).map(|s| mle(&b, 1.5, &p, 100 + s)).collect();
        let spread = vals.iter().cloned().fold(f64::MIN, f64::max) - vals.iter().cloned().fold(f64::MAX, f64::min);
        assert!(spread < 0.01, "{vals:?}");
    }
}

#[test]
fn full_variational_system_matches_max_over_blocks() {
    let pair = build_pair(&fixture_fig2()).unwrap();
    let whole = SweepBlock {
        id: 0,
        class: pinblock::sbd::BlockClass::Unclassified,
        kind: BlockKind::Driven,
        l_block: pair.l.clone(),
        r_block: pair.r.clone(),
    };
    let p = MleParams::default();
    let blocks = fig2_blocks(BlockFilter::All);
    for g in [0.0, 1.5, 2.8] {
        let full = mle(&whole, g, &p, 5);
        let best = blocks.iter().map(|b| mle(b, g, &p, 5)).fold(f64::MIN, f64::max);
        assert!((full - best).abs() < 0.02, "gamma {g}: {full} vs {best}");
    }
}

#[test]
fn undriven_curves_are_flat_and_uncontrolled_target_is_unstable() {
    let osc = OscillatorSpec::rossler_x_coupling();
    let p = MleParams::default();
    let tr = p.target(&osc, &DEFAULT_X0).unwrap();
    let curve = gamma_sweep(&fig2_blocks(BlockFilter::All), &osc, &[0.0], &tr, &p).unwrap();
    assert!(curve.max_mle[0] > 0.0);
    let flat = gamma_sweep(&fig2_blocks(BlockFilter::UndrivenOnly), &osc, &[0.0, 1.0, 2.0, 3.0], &tr, &p).unwrap();
    for b in &flat.blocks {
        let hi = b.mle.iter().cloned().fold(f64::MIN, f64::max);
        let lo = b.mle.iter().cloned().fold(f64::MAX, f64::min);
        assert!(hi - lo < 0.02);
        assert!(hi < 0.0);
    }
}

#[test]
fn sweep_is_deterministic() {
    let osc = OscillatorSpec::rossler_x_coupling();
    let p = MleParams {
        t_measure: 200.0,
        ..Default::default()
    };
    let tr = p.target(&osc, &DEFAULT_X0).unwrap();
    let blocks = fig2_blocks(BlockFilter::All);
    let grid = [0.5, 1.0, 1.5];
    let a = gamma_sweep(&blocks, &osc, &grid, &tr, &p).unwrap();
    let b = gamma_sweep(&blocks, &osc, &grid, &tr, &p).unwrap();
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
}

#[test]
fn interior_of_window_synchronizes_in_simulation() {
    let net = fixture_fig2();
    let osc = OscillatorSpec::rossler_x_coupling();
    // Linear stability is local: with unit spread some seeds reach a
    // coexisting non-synchronous state for gamma >= 1.6.
    for seed in 1..=3 {
        let sim = SimParams {
            spread: 0.1,
            seed,
            ..Default::default()
        };
        for g in [1.3, 1.5, 1.8] {
            let out = simulate_network(&net, &osc, g, &DEFAULT_X0, &sim).unwrap();
            assert!(out.synchronized, "gamma {g} seed {seed}: tail {}", out.tail_max_error);
            assert!(out.errors.iter().flatten().all(|&e| e >= 0.0));
        }
    }
    for seed in 1..=3 {
        let sim = SimParams {
            seed,
            ..Default::default()
        };
        assert!(simulate_network(&net, &osc, 1.5, &DEFAULT_X0, &sim).unwrap().synchronized);
        assert!(!simulate_network(&net, &osc, 0.0, &DEFAULT_X0, &sim).unwrap().synchronized);
    }
}

#[test]
fn grid_above_window_has_only_the_upper_crossing() {
    let net = fixture_fig2();
    let osc = OscillatorSpec::rossler_x_coupling();
    let p = MleParams::default();
    let tr = p.target(&osc, &DEFAULT_X0).unwrap();
    let grid: Vec<f64> = (0..9).map(|k| 1.4 + 0.2 * k as f64).collect();
    let curve = gamma_sweep(&fig2_blocks(BlockFilter::All), &osc, &grid, &tr, &p).unwrap();
    assert!(curve.crossings.iter().all(|c| c.direction == Direction::Up));
    assert_eq!(curve.crossings.len(), 1);
    let sim = SimParams {
        t_span: 100.0,
        ..Default::default()
    };
    let stars = find_gamma_stars(&net, &osc, &curve, &DEFAULT_X0, &sim).unwrap();
    assert_eq!(stars.gamma_star_2, None);
    assert!(!stars.diagnostics.is_empty());
}

#[test]
fn invalid_parameters_are_rejected() {
    let osc = OscillatorSpec::rossler_x_coupling();
    let bad = MleParams {
        dt: 0.0,
        ..Default::default()
    };
    assert!(bad.target(&osc, &DEFAULT_X0).is_err());
    let p = MleParams::default();
    let tr = pinblock::stability::target_trajectory(&osc, &DEFAULT_X0, 0.0, 1.0, p.dt).unwrap();
    let b = &fig2_blocks(BlockFilter::DrivenOnly)[0];
    let bv = BlockVariational {
        l_block: b.l_block.clone(),
        r_block: b.r_block.clone(),
        gamma: 1.0,
    };
    // Trajectory shorter than the measurement window.
    assert!(block_mle(&bv, &osc, &tr, &p, 1).is_err());
    assert!(gamma_sweep(&[], &osc, &[], &tr, &p).is_err());
    assert!(gamma_sweep(&[], &osc, &[1.0, 0.5], &tr, &p).is_err());
    let net = fixture_fig2();
    assert!(simulate_network(&net, &osc, -1.0, &DEFAULT_X0, &SimParams::default()).is_err());
}
