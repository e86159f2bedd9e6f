mod oracle;

use proptest::prelude::*;
use timely_aloha::channel::Feedback;
use timely_aloha::rl::{
    estimate_station_count, reward, run_rlra_dc, run_rlra_dc_estimated, Action, AgentTable, RlraAgent,
    ESTIMATOR_BASE_P, ESTIMATOR_BLOCKS, ESTIMATOR_BLOCK_LEN,
};
use timely_aloha::rng::StreamDomain;
use timely_aloha::sim::Engine;
use timely_aloha::{Observation, SchemeKind, StationState};

fn state_strategy(delay: u32) -> impl Strategy<Value = StationState> {
    (0..=delay, 0..4_usize).prop_map(|(lead_time, o)| StationState { lead_time, observation: Observation::ALL[o] })
}

proptest! {
    #[test]
    fn update_matches_straight_line_arithmetic(
        values in prop::collection::vec(-5.0_f64..5.0, 88),
        rho in -1.0_f64..1.0,
        s in state_strategy(10),
        s2 in state_strategy(10),
        transmit in any::<bool>(),
        r in 0_u8..=1,
    ) {
        let mut table = AgentTable::new(10).unwrap();
        let states = table.states();
        for (k, v) in values.iter().enumerate() {
            table.set_q(&states[k / 2], Action::ALL[k % 2], *v);
        }
        table.set_rho(rho);
        let a = if transmit { Action::Transmit } else { Action::Wait };
        let r = f64::from(r);

        let q_sa = table.q(&s, a);
        let q_next = table.q(&s2, Action::Transmit).max(table.q(&s2, Action::Wait));
        let delta = r + q_next - q_sa - rho;
        let q_expected = q_sa + 0.01 * delta;
        let rho_expected = rho + 0.01 * delta;

        table.update(&s, a, r, &s2);
        prop_assert_eq!(table.q(&s, a).to_bits(), q_expected.to_bits());
        prop_assert_eq!(table.rho().to_bits(), rho_expected.to_bits());
    }
}

#[test]
fn tables_keep_their_shape() {
    let out = run_rlra_dc(10, 6, 4, 2_000).unwrap();
    assert_eq!(out.tables.len(), 6);
    assert!(out.tables.iter().all(|t| t.len() == 2 * 4 * 11));
    let out = run_rlra_dc(1, 3, 4, 100).unwrap();
    assert!(out.tables.iter().all(|t| t.len() == 8));
    assert_eq!(out.record.scheme, SchemeKind::RlraDc);
}

#[test]
fn initialisation_rate_is_one_over_two_n() {
    let (d, n) = (10_u32, 10_u32);
    let mut active_slots = 0_u64;
    let mut sent = 0_u64;
    for seed in 0..300 {
        let agents = (0..n).map(|_| RlraAgent::new(d, n).unwrap()).collect();
        let mut engine = Engine::new(d, agents, seed, StreamDomain::Run).unwrap();
        engine
            .run(u64::from(4 * d), 0, &mut |e| {
                for (s, &tx) in e.states.iter().zip(e.decisions) {
                    if s.lead_time >= 1 {
                        active_slots += 1;
                        sent += u64::from(tx);
                    }
                }
            })
            .unwrap();
    }
    let p = 1.0 / (2.0 * f64::from(n));
    let rate = sent as f64 / active_slots as f64;
    let sigma = (p * (1.0 - p) / active_slots as f64).sqrt();
    assert!((rate - p).abs() <= 3.0 * sigma, "rate {rate} over {active_slots} station-slots");
}

#[test]
fn reward_is_shared_and_tracks_ack() {
    let (d, n) = (10_u32, 8_u32);
    let agents = (0..n).map(|_| RlraAgent::new(d, n).unwrap()).collect();
    let mut engine = Engine::new(d, agents, 12, StreamDomain::Run).unwrap();
    let mut last: Option<Feedback> = None;
    let mut acks = 0;
    engine
        .run(20_000, 0, &mut |e| {
            if let Some(feedback) = last {
                let expected = if feedback == Feedback::Ack { 1.0 } else { 0.0 };
                assert!(e.states.iter().all(|s| reward(s) == expected), "slot {}", e.slot);
                acks += u32::from(feedback == Feedback::Ack);
            }
            last = Some(e.outcome.feedback);
        })
        .unwrap();
    assert!(acks > 0);
}

#[test]
fn lone_station_learns_to_transmit() {
    for seed in 0..10 {
        let out = run_rlra_dc(10, 1, seed, 20_000).unwrap();
        assert!(out.record.settled_throughput >= 0.1 - 1e-9, "seed {seed}: {}", out.record.settled_throughput);
        let table = &out.tables[0];
        let frame_start = StationState { lead_time: 10, observation: Observation::Idle };
        assert_eq!(table.greedy(&frame_start), Action::Transmit, "seed {seed}");
    }
}

#[test]
fn runs_are_reproducible() {
    let a = run_rlra_dc(10, 20, 5, 5_000).unwrap();
    let b = run_rlra_dc(10, 20, 5, 5_000).unwrap();
    assert_eq!(a.record, b.record);
    assert_eq!(a.tables, b.tables);
    assert_eq!(a.coerced_transmits, b.coerced_transmits);
    let c = run_rlra_dc(10, 20, 6, 5_000).unwrap();
    assert_ne!(a.tables, c.tables);
}

#[test]
fn estimated_run_records_the_estimate() {
    let out = run_rlra_dc_estimated(10, 10, 3, 1_000).unwrap();
    let est = estimate_station_count(10, 10, 3).unwrap();
    assert_eq!(out.record.param, Some(f64::from(est.stations)));
}

fn estimates(n: u32, seeds: std::ops::Range<u64>) -> Vec<u32> {
    seeds.map(|s| estimate_station_count(10, n, s).unwrap().stations).collect()
}

fn exact(n: u32) -> Vec<f64> {
    oracle::exact_estimate_distribution(10, n, ESTIMATOR_BLOCKS, ESTIMATOR_BLOCK_LEN as u32, ESTIMATOR_BASE_P)
}

fn mass(dist: &[f64], keep: impl Fn(u32) -> bool) -> f64 {
    dist.iter().enumerate().filter(|(k, _)| keep(10 * (*k as u32 + 1))).map(|(_, p)| p).sum()
}

#[test]
fn estimator_mode_for_ten_stations() {
    let dist = exact(10);
    let mode = dist.iter().enumerate().fold(0, |m, (k, &p)| if p > dist[m] { k } else { m });
    assert_eq!(10 * (mode + 1), 10);
    let est = estimates(10, 1..101);
    let tens = est.iter().filter(|&&x| x == 10).count();
    assert!(est.iter().all(|&x| x % 10 == 0 && (10..=1000).contains(&x)));
    assert!(tens > 50, "{tens} of 100 seeds returned 10");
}

#[test]
fn estimator_concentrates_near_truth() {
    for m in [1_u32, 5, 10] {
        let n = 10 * m;
        let near = |x: u32| x.abs_diff(n) <= 20;
        let exact_mass = mass(&exact(n), near);
        assert!(exact_mass >= 0.6, "N={n}: exact mass {exact_mass}");
        let hits = estimates(n, 1..101).into_iter().filter(|&x| near(x)).count();
        assert!(hits >= 60, "N={n}: {hits} of 100 seeds within 20");
    }
}

#[test]
fn estimator_matches_exact_distribution() {
    let seeds = 400;
    for n in [10_u32, 50, 100] {
        let dist = exact(n);
        let total: f64 = dist.iter().sum();
        assert!((total - 1.0).abs() < 1e-9);
        let est = estimates(n, 1000..1000 + seeds);
        let bands: [(u32, u32); 3] = [(n.saturating_sub(20), n + 20), (80, 130), (n.saturating_sub(10), n + 10)];
        for (lo, hi) in bands {
            let p = mass(&dist, |x| (lo..=hi).contains(&x));
            let freq = est.iter().filter(|&&x| (lo..=hi).contains(&x)).count() as f64 / seeds as f64;
            let sigma = (p * (1.0 - p) / seeds as f64).sqrt().max(1e-3);
            assert!((freq - p).abs() <= 4.0 * sigma, "N={n} band {lo}..={hi}: freq {freq}, exact {p}");
        }
    }
    // The band 80..=130 at N = 100 carries about 72% of the mass.
    let band = mass(&exact(100), |x| (80..=130).contains(&x));
    assert!((band - 0.7196).abs() < 1e-3, "{band}");
}
