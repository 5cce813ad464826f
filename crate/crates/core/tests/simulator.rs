use proptest::prelude::*;

use quantized_consensus::alg1::OffsetScheduleA;
use quantized_consensus::alg2::OffsetScheduleB;
use quantized_consensus::graph::{generate_random_digraph, Digraph, NodeId};
use quantized_consensus::harness::sample_states;
use quantized_consensus::protocol::{Ratio, StateVars};
use quantized_consensus::sim::*;

fn full(mut c: SimConfig) -> SimConfig {
    c.trace = TraceLevel::Full;
    c
}

#[test]
fn two_nodes_hand_trace() {
    let g = Digraph::cycle(2).unwrap();
    let c = full(SimConfig::uniform(GraphSpec::Explicit { graph: g }, vec![4, 6], ProtocolKind::Plain, 0));
    let t = run(&c).unwrap();
    // step 1: node 0 adopts (6,1); step 2: node 1 merges to (10,2); step 3: node 0 adopts it
    let states = |k: usize| t.steps[k].nodes.iter().map(|n| n.state).collect::<Vec<_>>();
    let s = |y, z| StateVars { y_s: y, z_s: z };
    assert_eq!(states(1), vec![s(6, 1), s(6, 1)]);
    assert_eq!(states(2), vec![s(6, 1), s(10, 2)]);
    assert_eq!(states(3), vec![s(10, 2), s(10, 2)]);
    assert_eq!(t.summary.steps_to_consensus, Some(3));
    assert!(t.summary.theoretical_bound == 8 && t.summary.within_bound);
    assert_eq!(t.summary.final_q, vec![Ratio::new(5, 1); 2]);
}

#[test]
fn event_offset_numerator_bookkeeping() {
    // 0 -> 1 -> 2 -> 0 and 0 -> 2; node 0 runs event offsets
    let g = Digraph::new(3, [(1, 0), (2, 1), (0, 2), (2, 0)]).unwrap();
    let schedule = OffsetScheduleA::new(2, vec![2, 0, 3]).unwrap();
    let mut c = full(SimConfig::uniform(GraphSpec::Explicit { graph: g }, vec![5, 1, 3], ProtocolKind::Plain, 0));
    c.protocols[0] = ProtocolSpec::Alg1 { schedule: Some(schedule) };
    let t = run(&c).unwrap();
    assert_eq!(t.masked_initial, vec![0, 1, 3]);
    let mut paid = 0;
    let mut held = t.masked_initial.clone();
    for rec in &t.steps {
        paid += rec.injections.iter().map(|(_, u)| u).sum::<i64>();
        let holding: i64 = rec.nodes.iter().map(|n| n.mass.y).sum();
        let moving: i64 = rec.messages.iter().map(|m| m.payload.y).sum();
        assert_eq!(holding + moving, 9 - 5 + paid, "step {}", rec.step);
        held = rec.nodes.iter().map(|n| n.state.y_s).collect();
    }
    assert_eq!(paid, 5);
    assert_eq!(t.offsets[0].injected_at_completion, Some(0));
    assert!(held.len() == 3 && t.summary.final_q.iter().all(|q| *q == Ratio::new(3, 1)));
}

#[test]
fn zero_schedules_match_plain() {
    let g = Digraph::cycle(2).unwrap();
    let plain = full(SimConfig::uniform(GraphSpec::Explicit { graph: g.clone() }, vec![7, 2], ProtocolKind::Plain, 0));
    let mut masked = plain.clone();
    masked.protocols = vec![ProtocolSpec::Alg1 { schedule: Some(OffsetScheduleA::zero(1)) }; 2];
    let (a, b) = (run(&plain).unwrap(), run(&masked).unwrap());
    // the event-offset run also waits for its last zero installments
    assert_eq!(a.summary.steps_to_consensus, b.summary.steps_to_consensus);
    assert!(a.steps.len() <= b.steps.len());
    for (x, y) in a.steps.iter().zip(&b.steps) {
        assert_eq!(x.messages, y.messages);
        assert_eq!(x.fired, y.fired);
    }

    let mut zero_sum = plain.clone();
    zero_sum.protocols = g
        .nodes()
        .map(|j| ProtocolSpec::Alg2 { schedule: Some(OffsetScheduleB::zero(g.out_neighbors(j))) })
        .collect();
    assert_eq!(run(&zero_sum).unwrap().steps, a.steps);
}

#[test]
fn identical_configs_give_identical_bytes() {
    for kind in [ProtocolKind::Plain, ProtocolKind::Alg1, ProtocolKind::Alg2] {
        let c = full(SimConfig::uniform(GraphSpec::Random { n: 8, p: 0.4, seed: 5 }, (1..=8).collect(), kind, 77));
        assert_eq!(run(&c).unwrap().to_json().unwrap(), run(&c).unwrap().to_json().unwrap());
    }
}

#[test]
fn mixed_population() {
    let g = generate_random_digraph(9, 0.4, 21).unwrap();
    let mut c = SimConfig::uniform(GraphSpec::Explicit { graph: g }, vec![3, 8, 1, 9, 4, 4, 7, 2, 6], ProtocolKind::Plain, 2);
    for j in 0..9 {
        c.protocols[j] = match j % 3 {
            0 => ProtocolKind::Alg1,
            1 => ProtocolKind::Alg2,
            _ => ProtocolKind::Plain,
        }
        .into();
    }
    let t = run(&c).unwrap();
    assert!(t.summary.converged && t.summary.within_bound);
    assert!(t.summary.final_q.iter().all(|q| *q == Ratio::new(44, 9)));
}

#[test]
fn states_hold_after_consensus() {
    let g = generate_random_digraph(6, 0.4, 3).unwrap();
    let mut c = full(SimConfig::uniform(GraphSpec::Explicit { graph: g }, vec![9, 1, 5, 5, 2, 8], ProtocolKind::Alg1, 3));
    c.stop_on_certificate = false;
    c.stability_window = Some(u64::MAX);
    let t = run(&c).unwrap();
    let first = t
        .steps
        .iter()
        .position(|r| r.nodes.iter().all(|n| n.state.equals_average(30, 6)))
        .expect("reaches the average");
    for rec in &t.steps[first..] {
        assert!(rec.nodes.iter().all(|n| n.state.equals_average(30, 6)), "left consensus at {}", rec.step);
    }
    assert_eq!(t.summary.steps_executed, 2 * t.summary.theoretical_bound);
}

#[test]
fn conditioned_instance_reaches_its_sum() {
    let g = generate_random_digraph(20, 0.3, 0).unwrap();
    let states = sample_states(20, (3, 19), Some(181), 0).unwrap();
    for kind in [ProtocolKind::Plain, ProtocolKind::Alg1, ProtocolKind::Alg2] {
        let t = run(&SimConfig::uniform(GraphSpec::Explicit { graph: g.clone() }, states.clone(), kind, 0)).unwrap();
        assert!(t.summary.final_q.iter().all(|q| *q == Ratio::new(181, 20)));
        assert!(t.summary.within_bound);
    }
}

#[test]
fn step_table_shape() {
    let c = full(SimConfig::uniform(GraphSpec::Random { n: 4, p: 0.5, seed: 1 }, vec![1, 2, 3, 4], ProtocolKind::Alg2, 1));
    let t = run(&c).unwrap();
    let table = step_table(&t).unwrap();
    assert_eq!(table.lines().count(), 1 + t.steps.len() * 4);
    assert_eq!(table.lines().next(), Some(TABLE_HEADER));
    let summary_only = run(&SimConfig { trace: TraceLevel::Summary, ..c }).unwrap();
    assert!(step_table(&summary_only).is_err());
    assert_eq!(summary_only.mean_q.len() as u64, summary_only.summary.steps_executed + 1);
}

#[test]
fn rejects_bad_configs() {
    let g = Digraph::new(3, [(1, 0), (2, 1)]).unwrap();
    let c = SimConfig::uniform(GraphSpec::Explicit { graph: g }, vec![1, 2, 3], ProtocolKind::Plain, 0);
    assert!(run(&c).is_err());
    let c = SimConfig::uniform(GraphSpec::Random { n: 3, p: 0.9, seed: 0 }, vec![1, 2], ProtocolKind::Plain, 0);
    assert!(run(&c).is_err());
    let mut c = SimConfig::uniform(GraphSpec::Explicit { graph: Digraph::cycle(3).unwrap() }, vec![1, 2, 3], ProtocolKind::Plain, 0);
    c.protocols[0] = ProtocolSpec::Alg2 { schedule: Some(OffsetScheduleB::zero(&[NodeId(2)])) };
    assert!(run(&c).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn exact_average_within_bound(seed in any::<u64>(), n in 2usize..9, kind in 0usize..3, offset in any::<u64>()) {
        let kind = [ProtocolKind::Plain, ProtocolKind::Alg1, ProtocolKind::Alg2][kind];
        let states = sample_states(n, (-5, 30), None, seed).unwrap();
        let sum: i64 = states.iter().sum();
        let c = SimConfig::uniform(GraphSpec::Random { n, p: 0.4, seed }, states, kind, offset);
        let t = run(&c).unwrap();
        prop_assert!(t.summary.converged && t.summary.within_bound);
        for q in &t.summary.final_q {
            prop_assert_eq!(*q, Ratio::new(sum, n as u64));
        }
        for o in &t.offsets {
            prop_assert_eq!(o.injected_at_completion, Some(0));
        }
        prop_assert_eq!(t.masked_initial.iter().sum::<i64>() - t.offsets.iter().map(|o| o.schedule.u_init).sum::<i64>(), sum);
    }
}
