mod common;

use pvtrack::controllers::{ControllerKind, FixedDuty, Mode};
use pvtrack::metrics::{settling_steps, summarize, tracking_efficiency};
use pvtrack::power_stage::duty_for_target_voltage;
use pvtrack::pv_model::{open_circuit_voltage, panel_current, true_mpp};
use pvtrack::{simulate, simulate_with, EnvSample, PanelParams, Scenario, Trace};

fn run(s: &Scenario, kind: ControllerKind) -> Trace {
    let mut s = s.clone();
    s.controller.name = kind;
    simulate(&s).unwrap()
}

#[test]
fn mpp_current_matches_oracle() {
    let p = PanelParams::reference();
    let env = EnvSample::stc();
    let lib = true_mpp(&env, &p).unwrap();
    let oracle = common::mpp(1000.0, 25.0, &p);
    assert!((lib.v - oracle.v).abs() < 1e-4);
    assert!((panel_current(lib.v, &env, &p).unwrap() - oracle.i).abs() < 1e-4);
}

#[test]
fn unimodal_and_monotone_across_conditions() {
    let p = PanelParams::reference();
    for g in [100.0, 400.0, 1000.0] {
        for t in [-10.0, 25.0, 65.0] {
            let voc = common::voc(g, t, &p);
            let i: Vec<f64> = (0..200)
                .map(|k| panel_current(voc * k as f64 / 199.0, &EnvSample::new(g, t), &p).unwrap())
                .collect();
            assert!(i.windows(2).all(|w| w[1] < w[0]));
            let pw: Vec<f64> = (0..1000)
                .map(|k| {
                    let v = voc * k as f64 / 999.0;
                    v * panel_current(v, &EnvSample::new(g, t), &p).unwrap()
                })
                .collect();
            assert!(common::is_unimodal(&pw, 1e-9));
        }
    }
}

#[test]
fn fractions_hold_over_grid() {
    let p = PanelParams::reference();
    for g in [400.0, 700.0, 1000.0] {
        for t in [15.0, 30.0, 45.0] {
            let env = EnvSample::new(g, t);
            let mpp = true_mpp(&env, &p).unwrap();
            let voc = open_circuit_voltage(&env, &p).unwrap();
            let isc = panel_current(0.0, &env, &p).unwrap();
            assert!((0.7..=0.8).contains(&(mpp.v / voc)));
            assert!((0.8..=0.9).contains(&(mpp.i / isc)));
        }
    }
}

#[test]
fn voc_tracks_kv_line_and_hybrid_correction() {
    let p = PanelParams::reference();
    for t in [0.0, 25.0, 35.0, 60.0] {
        let numeric = common::voc(1000.0, t, &p);
        let linear = p.voc_n + p.kv * (t - 25.0);
        assert!((numeric - linear).abs() / linear < 0.02, "t={t}");
    }
}

#[test]
fn pinned_duty_harvests_everything() {
    let s = Scenario::stc_constant();
    let oracle = common::mpp(1000.0, 25.0, &s.panel);
    let mut c = FixedDuty::new(1.0 - oracle.v / s.bus.v_l, &s.bus).unwrap();
    let tr = simulate_with(&s, &mut c).unwrap();
    assert!(tr.records.iter().all(|r| (r.p_pv - r.p_ideal).abs() < 1e-4));
    assert!((tracking_efficiency(&tr).unwrap() - 1.0).abs() < 1e-6);
}

#[test]
fn po_limit_cycle_at_stc() {
    let s = Scenario::stc_constant();
    let tr = run(&s, ControllerKind::Po);
    let d_mpp = 1.0 - common::mpp(1000.0, 25.0, &s.panel).v / s.bus.v_l;
    let mut tail: Vec<f64> = tr.records[400..].iter().map(|r| r.duty).collect();
    tail.sort_by(f64::total_cmp);
    tail.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    assert_eq!(tail.len(), 3, "{tail:?}");
    assert!(tail.iter().all(|d| (d - d_mpp).abs() <= 2.0 * s.controller.po_step));
    // Centre of the three-level cycle.
    assert!((tail[1] - d_mpp).abs() <= 2.0 * s.controller.po_step);
}

#[test]
fn inccond_steady_state_near_mpp() {
    let s = Scenario::stc_constant();
    let tr = run(&s, ControllerKind::Inccond);
    let d_mpp = 1.0 - common::mpp(1000.0, 25.0, &s.panel).v / s.bus.v_l;
    for r in &tr.records[400..] {
        assert!((r.duty - d_mpp).abs() <= 2.0 * s.controller.inccond_step, "duty {}", r.duty);
    }
}

#[test]
fn hybrid_reseed_after_temperature_step() {
    let s = Scenario::temperature_step();
    let tr = run(&s, ControllerKind::Hybrid);
    assert_eq!(tr.records[0].mode, None);
    assert_eq!(tr.records[1].mode, Some(Mode::Calc));
    let calc: Vec<usize> = tr
        .records
        .iter()
        .enumerate()
        .filter(|(_, r)| r.mode == Some(Mode::Calc))
        .map(|(k, _)| k)
        .collect();
    assert_eq!(calc, vec![1, 251]);
    let r = &tr.records[251];
    let oracle = common::mpp(1000.0, 45.0, &s.panel);
    assert!((r.v_pv - oracle.v).abs() / oracle.v < 0.07);
    assert!(r.p_pv >= 0.95 * r.p_ideal);
}

#[test]
fn hybrid_recovers_within_ten_steps() {
    let s = Scenario::temperature_step();
    let tr = run(&s, ControllerKind::Hybrid);
    let settled = settling_steps(&tr, 2.5, 0.05).unwrap();
    assert!(settled <= 10, "settled after {settled}");
}

#[test]
fn hybrid_beats_po_on_temperature_step() {
    let s = Scenario::temperature_step();
    let h = run(&s, ControllerKind::Hybrid);
    let p = run(&s, ControllerKind::Po);
    assert!(settling_steps(&h, 2.5, 0.02).unwrap() < settling_steps(&p, 2.5, 0.02).unwrap());
    assert!(tracking_efficiency(&h).unwrap() >= tracking_efficiency(&p).unwrap());
}

#[test]
fn fractional_controllers_trail_hybrid_on_temperature_step() {
    let s = Scenario::temperature_step();
    let eh = tracking_efficiency(&run(&s, ControllerKind::Hybrid)).unwrap();
    for kind in [ControllerKind::FracVoc, ControllerKind::FracIsc] {
        let e = tracking_efficiency(&run(&s, kind)).unwrap();
        assert!(e < eh, "{kind}: {e} vs hybrid {eh}");
    }
}

#[test]
fn frac_voc_probe_duty_is_definitional() {
    let s = Scenario::stc_constant();
    let tr = run(&s, ControllerKind::FracVoc);
    assert_eq!(tr.records[0].mode, Some(Mode::Probe));
    assert_eq!(tr.records[0].p_pv, 0.0);
    let voc = open_circuit_voltage(&EnvSample::stc(), &s.panel).unwrap();
    let expected = duty_for_target_voltage(s.controller.k * voc, &s.bus).unwrap();
    assert!((tr.records[1].duty - expected).abs() <= 0.02 * expected);
    // Held between probes.
    assert!(tr.records[1..].iter().all(|r| r.duty == tr.records[1].duty));
}

#[test]
fn probe_schedule_every_five_seconds() {
    let mut s = Scenario::stc_constant();
    s.sim.duration = 12.0;
    let tr = run(&s, ControllerKind::FracIsc);
    let probes: Vec<f64> = tr
        .records
        .iter()
        .filter(|r| r.mode == Some(Mode::Probe))
        .map(|r| r.time)
        .collect();
    assert_eq!(probes.len(), 3);
    for (n, t) in probes.iter().enumerate() {
        assert!((t - 5.0 * n as f64).abs() < 1e-9);
    }
}

#[test]
fn oracle_dominance_on_canonical_scenarios() {
    for (_, s) in Scenario::canonical() {
        for kind in [
            ControllerKind::Hybrid,
            ControllerKind::Po,
            ControllerKind::Inccond,
            ControllerKind::FracVoc,
            ControllerKind::FracIsc,
        ] {
            let tr = run(&s, kind);
            assert!(tr.records.iter().all(|r| r.p_pv <= r.p_ideal + 1e-6 && r.p_pv >= 0.0));
            assert_eq!(tr.panel_energy(), tr.bus_energy(&s.bus));
        }
    }
}

#[test]
fn replay_is_bitwise_identical() {
    let s = Scenario::combined_ramp();
    assert_eq!(run(&s, ControllerKind::Hybrid), run(&s, ControllerKind::Hybrid));
}

#[test]
fn summary_reports_disturbances() {
    let s = Scenario::irradiance_step();
    let tr = run(&s, ControllerKind::Hybrid);
    let m = summarize(&tr, &s.profile.disturbance_times(), 0.02).unwrap();
    assert_eq!(m.settling_steps.len(), 1);
    assert!(m.settling_steps[0].1.is_some());
    assert!(m.tracking_efficiency > 0.97);
    assert!(m.steady_ripple >= 0.0);
}
