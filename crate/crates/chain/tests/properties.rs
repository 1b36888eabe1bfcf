use proptest::prelude::*;
use synapse_chain::{
    read_snapshot, stability_ratio, validate_config, write_snapshot, ChainArray, ChainConfig,
    ChainError, Modulation, ModulationKind,
};

fn cfg(n_levels: usize, g12: f64, dt: f64, gating: bool) -> ChainConfig {
    ChainConfig {
        n_levels,
        g12,
        dt,
        gating,
    }
}

// ---------------------------------------------------------------------------
// Frozen single-step examples, worked by hand.
// ---------------------------------------------------------------------------

#[test]
fn two_level_step_matches_hand_computation() {
    // n=2, g12=0.1, dt=1, state (1, 0):
    //   level 0: 1 + 0.1*(0-1)        = 0.9
    //   level 1: 0 + (0.1/2)*(1-0)
    //              + (0.05/2)*(0-0)   = 0.05
    let mut arr = ChainArray::new(cfg(2, 0.1, 1.0, false), 1).unwrap();
    arr.set_visible(&[1.0]).unwrap();
    arr.consolidate(1, None).unwrap();
    assert_eq!(arr.visible()[0], 0.9);
    assert_eq!(arr.level(1)[0], 0.05);
}

#[test]
fn gated_step_leaves_visible_untouched_but_charges_below() {
    // Same coupling geometry, three levels, gating on, clock at zero: the
    // backward term into level 0 is dropped, the forward term into level 1 is
    // not, and level 2 sees nothing because level 1 is still empty.
    let mut arr = ChainArray::new(cfg(3, 0.1, 1.0, true), 1).unwrap();
    arr.set_visible(&[1.0]).unwrap();
    arr.consolidate(1, None).unwrap();
    assert_eq!(arr.visible()[0], 1.0);
    assert_eq!(arr.level(1)[0], 0.05);
    assert_eq!(arr.level(2)[0], 0.0);
}

#[test]
fn gate_opens_after_threshold_steps() {
    // Gate thresholds for n=3, g12=0.1, dt=1 are ceil(2/0.1)=20 and
    // ceil(4/0.1)=40 steps; the leak is never gated.
    let arr = ChainArray::new(cfg(3, 0.1, 1.0, true), 1).unwrap();
    assert_eq!(arr.geometry().gate_steps, vec![20, 40, 0]);

    let mut arr = ChainArray::new(cfg(3, 0.1, 1.0, true), 1).unwrap();
    arr.set_visible(&[1.0]).unwrap();
    arr.consolidate(20, None).unwrap();
    assert_eq!(arr.visible()[0], 1.0, "visible must not move while gated");
    arr.consolidate(1, None).unwrap();
    assert!(
        arr.visible()[0] < 1.0,
        "backward flow should engage on the step after the threshold"
    );
}

#[test]
fn coupling_strengths_halve_with_depth() {
    let arr = ChainArray::new(cfg(3, 1e-5, 1.0, false), 1).unwrap();
    assert_eq!(arr.geometry().conductances, vec![1e-5, 5e-6, 2.5e-6]);
    assert_eq!(arr.geometry().capacities, vec![1.0, 2.0, 4.0]);
}

#[test]
fn per_level_timescales_quadruple() {
    let arr = ChainArray::new(cfg(6, 0.3, 1.0, false), 1).unwrap();
    let g = arr.geometry();
    for k in 0..5 {
        assert_eq!(g.capacities[k + 1] / g.capacities[k], 2.0);
        assert_eq!(g.conductances[k] / g.conductances[k + 1], 2.0);
        let tau_k = g.capacities[k] / g.conductances[k];
        let tau_next = g.capacities[k + 1] / g.conductances[k + 1];
        assert_eq!(tau_next / tau_k, 4.0);
    }
}

#[test]
fn stability_validator_accepts_and_rejects() {
    // Deep-net production shape: worst ratio is 64 * 0.001625 = 0.104.
    let ok = cfg(30, 0.001625, 64.0, true);
    assert!(validate_config(&ok, 1.0).is_ok());
    assert!((stability_ratio(&ok, 1.0) - 0.104).abs() < 1e-15);

    // Same dt with too-strong coupling blows the bound.
    let bad = cfg(30, 0.02, 64.0, true);
    assert!((stability_ratio(&bad, 1.0) - 1.28).abs() < 1e-12);
    assert!(matches!(
        validate_config(&bad, 1.0),
        Err(ChainError::InvalidConfig(_))
    ));
    let bad = cfg(30, 0.01875, 64.0, true);
    assert!((stability_ratio(&bad, 1.0) - 1.2).abs() < 1e-12);
    assert!(validate_config(&bad, 1.0).is_err());

    // A stable base config can still be rejected for a large modulation ceiling.
    let tab = cfg(3, 0.2, 1.0, false);
    assert!(validate_config(&tab, 1.0).is_ok());
    assert!(validate_config(&tab, 10.0).is_err());
}

#[test]
fn invalid_configs_are_rejected() {
    assert!(validate_config(&cfg(0, 0.1, 1.0, false), 1.0).is_err());
    assert!(validate_config(&cfg(61, 0.1, 1.0, false), 1.0).is_err());
    assert!(validate_config(&cfg(3, -0.1, 1.0, false), 1.0).is_err());
    assert!(validate_config(&cfg(3, f64::NAN, 1.0, false), 1.0).is_err());
    assert!(validate_config(&cfg(3, 0.1, 0.0, false), 1.0).is_err());
    assert!(validate_config(&cfg(3, 0.1, f64::INFINITY, false), 1.0).is_err());
}

#[test]
fn zero_coupling_is_bit_exact_identity() {
    let mut arr = ChainArray::new(cfg(1, 0.0, 1.0, false), 3).unwrap();
    arr.set_visible(&[-0.0, 1.25, -3.5]).unwrap();
    arr.consolidate(10, None).unwrap();
    let bits: Vec<u64> = arr.visible().iter().map(|v| v.to_bits()).collect();
    assert_eq!(
        bits,
        vec![(-0.0f64).to_bits(), 1.25f64.to_bits(), (-3.5f64).to_bits()]
    );
    assert_eq!(arr.steps(), 10);
}

#[test]
fn single_level_chain_decays_geometrically() {
    let mut arr = ChainArray::new(cfg(1, 0.25, 1.0, false), 1).unwrap();
    arr.set_visible(&[8.0]).unwrap();
    arr.consolidate(3, None).unwrap();
    // u <- (1 - 0.25) u each step: 8 * 0.75^3 = 3.375
    assert_eq!(arr.visible()[0], 3.375);
}

#[test]
fn state_drains_to_zero_through_the_leak() {
    let mut arr = ChainArray::new(cfg(2, 0.5, 0.5, false), 4).unwrap();
    arr.set_visible(&[1.0, -2.0, 0.5, 3.0]).unwrap();
    arr.consolidate(2000, None).unwrap();
    for k in 0..2 {
        for &v in arr.level(k) {
            assert!(v.abs() < 1e-9, "level {k} still holds {v}");
        }
    }
}

#[test]
fn non_finite_state_is_detected() {
    let mut arr = ChainArray::new(cfg(2, 0.1, 1.0, false), 2).unwrap();
    arr.apply_external(&[f64::NAN, 0.0]).unwrap();
    match arr.consolidate(1, None) {
        Err(ChainError::NonFinite { step }) => assert_eq!(step, 1),
        other => panic!("expected NonFinite, got {other:?}"),
    }

    let mut arr = ChainArray::new(cfg(2, 0.1, 1.0, false), 2).unwrap();
    arr.apply_external(&[f64::MAX, 0.0]).unwrap();
    arr.apply_external(&[f64::MAX, 0.0]).unwrap(); // overflows to +inf
    assert!(arr.consolidate(1, None).is_err());
}

#[test]
fn snapshot_roundtrip_is_bit_exact() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand::rngs::StdRng::seed_from_u64(7);
    let mut arr = ChainArray::new(cfg(4, 0.05, 2.0, true), 17).unwrap();
    let vis: Vec<f64> = (0..17).map(|_| rng.gen_range(-2.0..2.0)).collect();
    arr.set_visible(&vis).unwrap();
    let std: Vec<f64> = (0..17).map(|i| if i % 3 == 0 { 0.0 } else { 0.4 }).collect();
    arr.init_hidden_from_visible(&std, &mut rng).unwrap();
    arr.consolidate(5, None).unwrap();

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("chain.snap");
    write_snapshot(&arr, &path).unwrap();
    let back = read_snapshot(&path).unwrap();

    assert_eq!(back.config(), arr.config());
    assert_eq!(back.steps(), arr.steps());
    assert_eq!(back.n_chains(), arr.n_chains());
    for k in 0..4 {
        let a: Vec<u64> = arr.level(k).iter().map(|v| v.to_bits()).collect();
        let b: Vec<u64> = back.level(k).iter().map(|v| v.to_bits()).collect();
        assert_eq!(a, b, "level {k} differs after roundtrip");
    }
}

#[test]
fn hidden_init_copies_visible_for_zero_std_chains() {
    use rand::SeedableRng;
    let mut rng = rand::rngs::StdRng::seed_from_u64(1);
    let mut arr = ChainArray::new(cfg(3, 0.1, 1.0, false), 2).unwrap();
    arr.set_visible(&[1.0, 0.5]).unwrap();
    arr.init_hidden_from_visible(&[0.0, 0.3], &mut rng).unwrap();
    // chain 0 starts at equilibrium: every level equals the visible value
    assert_eq!(arr.chain(0), vec![1.0, 1.0, 1.0]);
    // chain 1 gets Gaussian hidden levels, almost surely different from visible
    assert_ne!(arr.chain(1)[1], 0.5);
}

// ---------------------------------------------------------------------------
// Property-based invariants.
// ---------------------------------------------------------------------------

/// Configs kept well inside the stability region.
fn stable_cfg() -> impl Strategy<Value = ChainConfig> {
    (1usize..=8, 0.0f64..=0.4, 0.05f64..=2.0, any::<bool>())
        .prop_map(|(n, g12, dt, gating)| ChainConfig {
            n_levels: n,
            g12,
            dt,
            gating,
        })
        .prop_filter("stable at modulation 1", |c| {
            stability_ratio(c, 1.0) <= 1.0
        })
}

fn build(config: &ChainConfig, m: usize, state: &[f64]) -> ChainArray {
    ChainArray::from_levels(config.clone(), m, state.to_vec(), 0).unwrap()
}

#[test]
fn modulated_step_examples_match_hand_computation() {
    // n=2, g12=0.1, dt=1, state (1, 0.5), factor 2. Coefficients:
    //   b0 = 0.1 (tube), a1 = 0.05 (tube, deep side), b1 = 0.025 (leak).
    let config = cfg(2, 0.1, 1.0, false);

    // Tube kind scales whole terms:
    //   level 0: 1   + 2*(0.1*(0.5-1))               = 0.9
    //   level 1: 0.5 + 2*(0.05*(1-0.5) + 0.025*(0-0.5)) = 0.525
    let mut tube = build(&config, 1, &[1.0, 0.5]);
    tube.consolidate(1, Some(Modulation::tube(&[2.0]))).unwrap();
    assert!((tube.visible()[0] - 0.9).abs() < 1e-15);
    assert!((tube.level(1)[0] - 0.525).abs() < 1e-15);

    // Forward kind scales only the shallow-sourced flux components:
    //   level 0: 1   + 0.1*(0.5 - 2*1)                  = 0.85
    //   level 1: 0.5 + 0.05*(2*1 - 0.5) + 0.025*(0 - 2*0.5) = 0.55
    let mut fwd = build(&config, 1, &[1.0, 0.5]);
    fwd.consolidate(1, Some(Modulation::forward(&[2.0]))).unwrap();
    assert!((fwd.visible()[0] - 0.85).abs() < 1e-15);
    assert!((fwd.level(1)[0] - 0.55).abs() < 1e-15);
}

#[test]
fn zero_factor_forward_flow_still_recalls_from_depth() {
    // State (0, 1): surface empty, depth charged. With factor 0 the tube kind
    // freezes the chain entirely, while the forward kind still lets the deep
    // level feed the surface at the baseline rate (and holds the leak shut).
    let config = cfg(2, 0.1, 1.0, false);

    let mut tube = build(&config, 1, &[0.0, 1.0]);
    tube.consolidate(1, Some(Modulation::tube(&[0.0]))).unwrap();
    assert_eq!(tube.visible()[0], 0.0);
    assert_eq!(tube.level(1)[0], 1.0);

    let mut fwd = build(&config, 1, &[0.0, 1.0]);
    fwd.consolidate(1, Some(Modulation::forward(&[0.0]))).unwrap();
    assert!((fwd.visible()[0] - 0.1).abs() < 1e-15, "recall should flow");
    assert!((fwd.level(1)[0] - 0.95).abs() < 1e-15);
    // Capacity-weighted mass is untouched: the leak is scaled to zero.
    assert!((fwd.chain_mass(0) - 2.0).abs() < 1e-15);
}

proptest! {
    /// One Euler step with open gates moves exactly as much capacity-weighted
    /// mass out of each chain as the leak carries away. This holds for both
    /// modulation kinds: either way the inter-level exchange is pairwise
    /// antisymmetric and only the (scaled) leak removes mass.
    #[test]
    fn step_conserves_capacity_weighted_mass(
        config in stable_cfg().prop_map(|mut c| { c.gating = false; c }),
        m in 1usize..=12,
        seed_state in prop::collection::vec(-10.0f64..10.0, 8 * 12),
        mods in prop::collection::vec(0.0f64..20.0, 12),
        use_mods in any::<bool>(),
        forward in any::<bool>(),
    ) {
        let n = config.n_levels;
        let state: Vec<f64> = seed_state[..n * m].to_vec();
        let mut arr = build(&config, m, &state);
        let kind = if forward { ModulationKind::Forward } else { ModulationKind::Tube };
        let modulation = if use_mods {
            Some(Modulation { kind, factors: &mods[..m] })
        } else {
            None
        };
        let before: Vec<Vec<f64>> = (0..m).map(|i| arr.chain(i)).collect();
        arr.consolidate(1, modulation).unwrap();

        let caps = arr.geometry().capacities.clone();
        let g_leak = *arr.geometry().conductances.last().unwrap();
        let ratio1 = stability_ratio(&config, 1.0);
        let cap = if ratio1 > 0.0 { 1.0 / ratio1 } else { f64::INFINITY };
        for i in 0..m {
            let after = arr.chain(i);
            let f_eff = if use_mods { mods[i].clamp(0.0, cap) } else { 1.0 };
            let moved: f64 = (0..n).map(|k| caps[k] * (after[k] - before[i][k])).sum();
            let leaked = -f_eff * config.dt * g_leak * before[i][n - 1];
            let scale: f64 = (0..n).map(|k| caps[k] * before[i][k].abs()).sum::<f64>().max(1.0);
            prop_assert!(
                (moved - leaked).abs() <= 1e-12 * scale,
                "chain {i}: moved {moved:e}, leak {leaked:e}, scale {scale:e}"
            );
        }
    }

    /// The all-zero state is an exact fixed point, bit for bit.
    #[test]
    fn zero_state_is_fixed(
        config in stable_cfg(),
        m in 1usize..=12,
        mods in prop::collection::vec(0.0f64..20.0, 12),
        use_mods in any::<bool>(),
        forward in any::<bool>(),
    ) {
        let mut arr = ChainArray::new(config, m).unwrap();
        let kind = if forward { ModulationKind::Forward } else { ModulationKind::Tube };
        let modulation = if use_mods {
            Some(Modulation { kind, factors: &mods[..m] })
        } else {
            None
        };
        arr.consolidate(50, modulation).unwrap();
        for k in 0..arr.n_levels() {
            for &v in arr.level(k) {
                prop_assert_eq!(v.to_bits(), 0.0f64.to_bits());
            }
        }
    }

    /// Forward modulation at factor 1 is the ordinary step (same flows, only
    /// regrouped arithmetic), so the trajectories agree to rounding error.
    #[test]
    fn forward_modulation_at_unit_factor_is_the_plain_step(
        config in stable_cfg().prop_map(|mut c| { c.gating = false; c }),
        m in 1usize..=8,
        seed_state in prop::collection::vec(-10.0f64..10.0, 8 * 8),
    ) {
        let n = config.n_levels;
        let state: Vec<f64> = seed_state[..n * m].to_vec();
        let mut plain = build(&config, m, &state);
        let mut modded = build(&config, m, &state);
        let ones = vec![1.0; m];
        for _ in 0..5 {
            plain.consolidate(1, None).unwrap();
            modded.consolidate(1, Some(Modulation::forward(&ones))).unwrap();
        }
        for k in 0..n {
            for (a, b) in plain.level(k).iter().zip(modded.level(k)) {
                prop_assert!(
                    (a - b).abs() <= 1e-14 * a.abs().max(1.0),
                    "level {k}: {a} vs {b}"
                );
            }
        }
    }

    /// With a stable step, nonnegative states stay nonnegative and total mass
    /// never grows (diffusion redistributes, only the leak removes).
    #[test]
    fn nonnegative_states_decay_monotonically(
        config in stable_cfg().prop_map(|mut c| { c.gating = false; c }),
        m in 1usize..=8,
        seed_state in prop::collection::vec(0.0f64..10.0, 8 * 8),
    ) {
        let n = config.n_levels;
        let state: Vec<f64> = seed_state[..n * m].to_vec();
        let mut arr = build(&config, m, &state);
        let mut prev_mass = arr.total_mass();
        for _ in 0..20 {
            arr.consolidate(1, None).unwrap();
            for k in 0..n {
                for &v in arr.level(k) {
                    prop_assert!(v >= 0.0, "negative level {v}");
                }
            }
            let mass = arr.total_mass();
            prop_assert!(mass <= prev_mass * (1.0 + 1e-12) + 1e-12);
            prev_mass = mass;
        }
    }

    /// While every gate is still closed, consolidation cannot move the visible
    /// level at all, but it does charge the level below.
    #[test]
    fn closed_gates_isolate_the_visible_level(
        g12 in 0.001f64..=0.2,
        dt in 0.1f64..=1.0,
        n in 2usize..=6,
        vis in prop::collection::vec(-5.0f64..5.0, 6),
        m in 1usize..=6,
    ) {
        let config = ChainConfig { n_levels: n, g12, dt, gating: true };
        prop_assume!(stability_ratio(&config, 1.0) <= 1.0);
        let mut arr = ChainArray::new(config, m).unwrap();
        arr.set_visible(&vis[..m]).unwrap();
        let first_gate = arr.geometry().gate_steps[0];
        let steps = first_gate.min(50);
        prop_assume!(steps > 0);
        let before: Vec<u64> = arr.visible().iter().map(|v| v.to_bits()).collect();
        arr.consolidate(steps, None).unwrap();
        let after: Vec<u64> = arr.visible().iter().map(|v| v.to_bits()).collect();
        prop_assert_eq!(before, after);
        for (i, &v) in vis[..m].iter().enumerate() {
            if v != 0.0 {
                prop_assert!(arr.level(1)[i] != 0.0, "level 1 of chain {i} never charged");
            }
        }
    }

    /// Same inputs, same bits: the integrator is deterministic.
    #[test]
    fn consolidation_is_deterministic(
        config in stable_cfg(),
        m in 1usize..=10,
        seed_state in prop::collection::vec(-10.0f64..10.0, 8 * 10),
        mods in prop::collection::vec(0.0f64..20.0, 10),
        forward in any::<bool>(),
    ) {
        let n = config.n_levels;
        let state: Vec<f64> = seed_state[..n * m].to_vec();
        let mut a = build(&config, m, &state);
        let mut b = build(&config, m, &state);
        let kind = if forward { ModulationKind::Forward } else { ModulationKind::Tube };
        a.consolidate(7, Some(Modulation { kind, factors: &mods[..m] })).unwrap();
        b.consolidate(7, Some(Modulation { kind, factors: &mods[..m] })).unwrap();
        let bits_a: Vec<u64> = (0..n).flat_map(|k| a.level(k).iter().map(|v| v.to_bits()).collect::<Vec<_>>()).collect();
        let bits_b: Vec<u64> = (0..n).flat_map(|k| b.level(k).iter().map(|v| v.to_bits()).collect::<Vec<_>>()).collect();
        prop_assert_eq!(bits_a, bits_b);
    }

    /// External updates land on the visible level only.
    #[test]
    fn external_updates_touch_only_the_surface(
        config in stable_cfg(),
        m in 1usize..=10,
        delta in prop::collection::vec(-3.0f64..3.0, 10),
    ) {
        let mut arr = ChainArray::new(config, m).unwrap();
        arr.apply_external(&delta[..m]).unwrap();
        for (v, d) in arr.visible().iter().zip(&delta[..m]) {
            prop_assert_eq!(v, d);
        }
        for k in 1..arr.n_levels() {
            for &v in arr.level(k) {
                prop_assert_eq!(v, 0.0);
            }
        }
    }
}
