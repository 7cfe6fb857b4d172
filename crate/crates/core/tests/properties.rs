use proptest::prelude::*;
use ris_core::alphabet::{builtin, BUILTIN_NAMES};
use ris_core::channel::{received_power, ChannelPair};
use ris_core::designer::{design, DesignCriterion, OptimizerOptions};
use ris_core::geometry::{GainPattern, RisGeometry, Role, Terminal, Wave};
use ris_core::pattern::{extract_metrics, far_field_radius, sweep, RadiusMode, SweepSpec};
use ris_core::scenario::{run_scenario, CriterionKind, CriterionSpec, FieldRegime, RunOptions, Scenario};

/// Surface lit at normal incidence from the far-field radius, with the
/// receiver at `target_deg` in the xz plane.
fn physical_pair(freq: f64, divisor: f64, n: usize, target_deg: f64, near: Option<f64>) -> ChannelPair {
    let wave = Wave::new(freq).unwrap();
    let geom = RisGeometry::square(n, wave.wavelength() / divisor).unwrap();
    let r = far_field_radius(&geom, &wave);
    let tx = Terminal::isotropic([0.0, 0.0, r], Role::Tx).unwrap();
    let rx = Terminal::in_xz_plane(near.unwrap_or(r), target_deg, GainPattern::Isotropic, Role::Rx).unwrap();
    ChannelPair::compute(&geom, &wave, &tx, &rx)
}

fn power(pair: &ChannelPair, c: &DesignCriterion) -> f64 {
    let (cfg, _) = design(c, pair, &OptimizerOptions::default()).unwrap();
    received_power(pair, &cfg, 1.0).unwrap()
}

fn pair_strategy() -> impl Strategy<Value = ChannelPair> {
    (
        prop::sample::select(vec![2.3e9, 3.6e9, 5.2e9, 28e9]),
        prop::sample::select(vec![2.0, 4.0, 8.0]),
        4usize..24,
        -80.0f64..80.0,
        prop::option::of(0.5f64..10.0),
    )
        .prop_map(|(f, div, n, t, near)| physical_pair(f, div, n, t, near))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn uacp_dominates_every_criterion(pair in pair_strategy(), seed in any::<u64>()) {
        let bound = power(&pair, &DesignCriterion::Uacp);
        let mut others = vec![
            DesignCriterion::Uadp { levels: 2 },
            DesignCriterion::Uadp { levels: 4 },
            DesignCriterion::Uadp { levels: 16 },
            DesignCriterion::Specular,
            DesignCriterion::Diffuser { seed },
        ];
        for name in BUILTIN_NAMES {
            let a = builtin(name).unwrap();
            others.push(DesignCriterion::Uaep(a.clone()));
            others.push(DesignCriterion::Alphabet(a));
        }
        for c in &others {
            let p = power(&pair, c);
            prop_assert!(p <= bound * (1.0 + 1e-12), "{} beats UACP: {p} > {bound}", c.label());
        }
    }

    /// Nearest-phase quantization leaves each co-phasing error within
    /// `±π/L`, so `P_L ≥ cos²(π/L)·P_UACP`. The bounds themselves form the
    /// chain `L = 2 ≤ 4 ≤ 16`.
    #[test]
    fn uadp_power_respects_cophasing_bound(pair in pair_strategy()) {
        let full = power(&pair, &DesignCriterion::Uacp);
        for levels in [2usize, 4, 16] {
            let p = power(&pair, &DesignCriterion::Uadp { levels });
            let bound = (std::f64::consts::PI / levels as f64).cos().powi(2) * full;
            prop_assert!(p >= bound * (1.0 - 1e-9), "L={levels}: {p} < {bound}");
        }
    }
}

/// Best objective over `P(L)^4` for a 2 × 2 surface, by enumeration.
fn exhaustive_uadp(pair: &ChannelPair, levels: usize) -> f64 {
    let values = ris_core::uadp_set(levels).unwrap().values().to_vec();
    let c = pair.cascaded();
    let mut best = 0.0f64;
    let mut idx = [0usize; 4];
    for code in 0..levels.pow(4) {
        let mut k = code;
        for slot in idx.iter_mut() {
            *slot = k % levels;
            k /= levels;
        }
        best = best.max(ris_core::designer::objective(&c, &values, &idx));
    }
    best
}

/// `P(2) ⊂ P(4) ⊂ P(16)`, so the optimum over each set is ordered.
#[test]
fn exhaustive_optima_follow_subset_chain() {
    for (i, target) in [-60.0, -20.0, 0.0, 15.0, 45.0, 75.0].into_iter().enumerate() {
        let near = if i % 2 == 0 { Some(0.3) } else { None };
        let pair = physical_pair(3.6e9, 2.0, 2, target, near);
        let (b2, b4, b16) = (exhaustive_uadp(&pair, 2), exhaustive_uadp(&pair, 4), exhaustive_uadp(&pair, 16));
        assert!(b16 >= b4 && b4 >= b2, "target {target}: {b2} {b4} {b16}");
    }
}

/// The nearest-phase designs themselves need not be ordered: near
/// broadside the two-level errors can come out nearly equal across the
/// aperture, which costs nothing, while four levels leave a spread.
#[test]
fn nearest_phase_designs_can_invert_the_chain() {
    let pair = physical_pair(3.6e9, 4.0, 5, 9.0, Some(5.0));
    let p2 = power(&pair, &DesignCriterion::Uadp { levels: 2 });
    let p4 = power(&pair, &DesignCriterion::Uadp { levels: 4 });
    assert!(p4 < p2, "{p4} vs {p2}");
}

fn scenario(kind: CriterionKind, alphabet: Option<&str>, target: f64, divisor: f64) -> Scenario {
    let mut s = Scenario::new(
        "prop",
        2.3e9,
        divisor,
        target,
        CriterionSpec { kind, levels: Some(2), alphabet: alphabet.map(String::from) },
    );
    s.sweep.step_deg = 0.5;
    s
}

#[test]
fn diffuser_suppresses_peak_by_20_db() {
    // 100 × 100 elements at λ/4 and 3.6 GHz, both configurations lit and
    // observed identically.
    let wave = Wave::new(3.6e9).unwrap();
    let geom = RisGeometry::square(100, wave.wavelength() / 4.0).unwrap();
    assert!(geom.element_count() >= 10_000);
    let r = far_field_radius(&geom, &wave);
    let tx = Terminal::isotropic([0.0, 0.0, r], Role::Tx).unwrap();
    let spec = SweepSpec { step: 0.5, radius: RadiusMode::FarField, ..Default::default() };
    let rx = Terminal::in_xz_plane(r, 0.0, GainPattern::Isotropic, Role::Rx).unwrap();
    let pair = ChannelPair::compute(&geom, &wave, &tx, &rx);
    let peak = |c: DesignCriterion| {
        let (cfg, _) = design(&c, &pair, &OptimizerOptions::default()).unwrap();
        extract_metrics(&sweep(&geom, &wave, &tx, &cfg, &spec, 1.0).unwrap()).unwrap().peak_power
    };
    let specular = peak(DesignCriterion::Specular);
    for seed in [1, 2, 3] {
        let diffuse = peak(DesignCriterion::Diffuser { seed });
        let gap = 10.0 * (specular / diffuse).log10();
        assert!(gap >= 20.0, "seed {seed}: diffuser only {gap:.2} dB below specular");
    }
}

#[test]
fn identical_scenarios_give_bit_identical_traces() {
    for (kind, alphabet) in [
        (CriterionKind::Alphabet, Some("testbed2p3")),
        (CriterionKind::Diffuser, None),
        (CriterionKind::Uadp, None),
    ] {
        let mut s = scenario(kind, alphabet, 30.0, 4.0);
        s.seed = 11;
        s.interferer_angles_deg = vec![-20.0];
        s.optimizer.init = ris_core::scenario::InitKind::Random;
        let a = run_scenario(&s, &RunOptions::default()).unwrap();
        let b = run_scenario(&s, &RunOptions::default()).unwrap();
        assert_eq!(a.config.gamma(), b.config.gamma());
        assert_eq!(a.trace.power, b.trace.power);
        assert_eq!(a.interference[0].trace.power, b.interference[0].trace.power);
    }
}

#[test]
fn seeds_change_random_designs() {
    let mut s = scenario(CriterionKind::Diffuser, None, 30.0, 4.0);
    s.seed = 1;
    let a = run_scenario(&s, &RunOptions::default()).unwrap();
    s.seed = 2;
    let b = run_scenario(&s, &RunOptions::default()).unwrap();
    assert_ne!(a.config.gamma(), b.config.gamma());
}

/// Halving the step must not move the peak by more than the coarse step.
#[test]
fn peak_stable_under_grid_refinement() {
    for target in [45.0, -30.0, 75.0] {
        let mut coarse = scenario(CriterionKind::Uacp, None, target, 4.0);
        coarse.sweep.step_deg = 0.2;
        let mut fine = coarse.clone();
        fine.sweep.step_deg = 0.05;
        let a = run_scenario(&coarse, &RunOptions::default()).unwrap().metrics.peak_angle;
        let b = run_scenario(&fine, &RunOptions::default()).unwrap().metrics.peak_angle;
        assert!((a - b).abs() <= 0.2 + 1e-9, "target {target}: {a} vs {b}");
    }
}

#[test]
fn near_field_regime_sweeps_at_its_radius() {
    let mut s = scenario(CriterionKind::Uacp, None, 45.0, 4.0);
    s.field = FieldRegime::Near { radius_m: 5.0 };
    let r = run_scenario(&s, &RunOptions::default()).unwrap();
    assert_eq!(r.trace.meta.radius_m, 5.0);
    assert!((r.design_rx.range() - 5.0).abs() < 1e-12);
}
