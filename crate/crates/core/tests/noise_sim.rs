//! Frame simulator: syndromes of injected errors, Z-blindness of one-sided
//! checks, determinism, and agreement with exact enumeration on small cases.

mod common;

use cpc_core::checks::{CheckKind, CheckSet};
use cpc_core::compile::{build_readout_repetition, compile, CheckedCircuit, Connectivity, Segment};
use cpc_core::gate::Gate;
use cpc_core::noise::{NoiseModel, PauliChannel};
use cpc_core::pauli::PauliString;
use cpc_core::schedule::{schedule, Durations};
use cpc_core::sim::{propagate_faults, simulate, LogicalCriterion, RepetitionMode, SimOptions};
use cpc_core::tableau::random_clifford;
use cpc_core::{Error, GateKind};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn all_paulis(n: usize) -> Vec<PauliString> {
    (1..4u64.pow(n as u32)).map(|i| PauliString::from_index(n, i)).collect()
}

fn all_z_paulis(n: usize) -> Vec<PauliString> {
    (1..1u64 << n)
        .map(|m| {
            let z: Vec<bool> = (0..n).map(|q| m >> q & 1 == 1).collect();
            PauliString::from_bits(&vec![false; n], &z).unwrap()
        })
        .collect()
}

/// Index of the first gate after every left-check gate.
fn payload_start(c: &CheckedCircuit) -> usize {
    c.segments
        .iter()
        .rposition(|s| matches!(s, Segment::LeftCheck(_) | Segment::FlagLeft(_)))
        .map_or(0, |i| i + 1)
}

fn on_data(c: &CheckedCircuit, e: &PauliString) -> PauliString {
    let mut p = PauliString::identity(c.n_qubits());
    for j in 0..e.n() {
        p.set_bits(c.initial_position(cpc_core::compile::Role::Data(j)), e.x_bit(j), e.z_bit(j));
    }
    p
}

fn circuits(rng: &mut ChaCha8Rng, n: usize) -> Vec<CheckedCircuit> {
    let payload = random_clifford(n, rng).unwrap();
    let two = CheckSet::two_sided(payload.clone(), all_paulis(n)).unwrap();
    let one = CheckSet::one_sided(payload, all_z_paulis(n)).unwrap();
    let mut out = Vec::new();
    for cs in [two.clone(), two.with_flags(true).unwrap(), one] {
        out.push(compile(&cs, Connectivity::AllToAll, None).unwrap());
    }
    out
}

#[test]
fn injected_error_syndrome_is_commutator_with_left_check() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for n in 1..=3 {
        for c in circuits(&mut rng, n) {
            let at = payload_start(&c);
            for e in all_paulis(n) {
                let rec = propagate_faults(&c, &[(at, on_data(&c, &e))]).unwrap();
                for (i, ch) in c.checks.iter().enumerate() {
                    assert_eq!(rec.syndrome_bits[i], !ch.left.commutes(&e).unwrap(), "{:?} n={n} E={e} L={}", c.kind, ch.left);
                }
                assert!(rec.syndrome_bits[c.n_checks()..].iter().all(|&b| !b), "flags stay silent");
                assert_eq!(rec.accepted, rec.syndrome_bits.iter().all(|&b| !b));
                if c.kind == CheckKind::TwoSided {
                    assert!(!rec.accepted, "every error anticommutes with some check");
                }
            }
        }
    }
}

#[test]
fn zero_noise_accepts_every_shot() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let payload = random_clifford(3, &mut rng).unwrap();
    let two = cpc_core::checks::sample_two_sided(&payload, 3, &mut rng).unwrap();
    let one = cpc_core::checks::sample_one_sided(&payload, 3, &mut rng).unwrap();
    for cs in [two.clone(), two.with_flags(true).unwrap(), one] {
        for conn in [Connectivity::AllToAll, Connectivity::Lnn] {
            let c = compile(&cs, conn, None).unwrap();
            let r = simulate(&c, &NoiseModel::noiseless(), &SimOptions::new(1000, 1)).unwrap();
            assert_eq!((r.stats.shots, r.stats.accepted, r.stats.errors), (1000, 1000, 0));
        }
    }
}

#[test]
fn same_seed_same_result_for_any_thread_count() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let payload = random_clifford(4, &mut rng).unwrap();
    let cs = cpc_core::checks::sample_two_sided(&payload, 2, &mut rng).unwrap();
    let c = compile(&cs, Connectivity::Lnn, None).unwrap();
    let nm = NoiseModel::uniform_depolarizing(0.02).unwrap();
    let mut opts = SimOptions::new(5000, 77);
    opts.keep_records = true;
    let run = |threads| {
        rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap().install(|| simulate(&c, &nm, &opts).unwrap())
    };
    let a = run(1);
    let b = run(3);
    assert_eq!(a, b);
    let recs = a.records.unwrap();
    assert_eq!(recs.len(), 5000);
    for r in &recs {
        assert_eq!(r.accepted, r.syndrome_bits.iter().all(|&s| !s));
        assert!(!r.logical_error || r.accepted);
    }
    let errors = recs.iter().filter(|r| r.logical_error).count() as u64;
    assert_eq!(errors, a.stats.errors);
    opts.seed = 78;
    assert_ne!(simulate(&c, &nm, &opts).unwrap().records, Some(recs));
}

#[test]
fn thermal_noise_needs_schedule() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let payload = random_clifford(2, &mut rng).unwrap();
    let cs = cpc_core::checks::sample_two_sided(&payload, 1, &mut rng).unwrap();
    let c = compile(&cs, Connectivity::AllToAll, None).unwrap();
    let mut nm = NoiseModel::noiseless();
    nm.set_thermal_default(50.0, 40.0).unwrap();
    assert!(matches!(simulate(&c, &nm, &SimOptions::new(10, 0)), Err(Error::InvalidArgument(_))));
    let s = schedule(&c, &Durations::default()).unwrap();
    let r = simulate(&s, &nm, &SimOptions::new(2000, 0)).unwrap();
    assert_eq!(r.stats.shots, 2000);
}

/// Thermal idling on a scheduled circuit agrees with exact enumeration of
/// the delay channels.
#[test]
fn thermal_delays_match_enumeration() {
    let gates = vec![Gate::h(0), Gate::cx(0, 1), Gate::h(1), Gate::h(1), Gate::cx(0, 1)];
    let cs = CheckSet { kind: CheckKind::TwoSided, checks: vec![], flags: false, payload: cpc_core::apply_circuit(2, &gates).unwrap() };
    let c = compile(&cs, Connectivity::AllToAll, Some(&gates)).unwrap();
    let mut d = Durations::default();
    d.set(GateKind::H, 20_000.0);
    let s = schedule(&c, &d).unwrap();
    let delays: Vec<usize> = s.gates.iter().enumerate().filter(|(_, g)| g.kind == GateKind::DELAY).map(|(i, _)| i).collect();
    assert_eq!(delays.len(), 1);
    let mut nm = NoiseModel::noiseless();
    nm.set_thermal_default(30.0, 25.0).unwrap();
    let ch = PauliChannel::thermal(s.gates[delays[0]].duration, 30.0, 25.0).unwrap();
    let (acc, err) = common::exact_rates(&s, &[common::NoisyGate { gate: delays[0], channel: ch }], &[]);
    let shots = 400_000;
    let r = simulate(&s, &nm, &SimOptions::new(shots, 9)).unwrap();
    assert!(common::within_sigma(r.stats.accepted, shots, acc, 3.0));
    assert!(common::within_sigma(r.stats.errors, shots, err, 3.0), "{} vs {}", r.stats.errors as f64 / shots as f64, err);
}

#[test]
fn readout_flips_reject_two_sided_shots() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let payload = random_clifford(3, &mut rng).unwrap();
    let cs = cpc_core::checks::sample_two_sided(&payload, 4, &mut rng).unwrap();
    let c = compile(&cs, Connectivity::AllToAll, None).unwrap();
    let mut nm = NoiseModel::noiseless();
    nm.set_readout_default(0.05).unwrap();
    let shots = 200_000;
    let r = simulate(&c, &nm, &SimOptions::new(shots, 1)).unwrap();
    let p = 0.95f64.powi(4);
    assert!(common::within_sigma(r.stats.accepted, shots, p, 3.0));
    assert_eq!(r.stats.errors, 0);
}

#[test]
fn repetition_readout_counts() {
    let c = build_readout_repetition(3);
    let mut nm = NoiseModel::noiseless();
    nm.set_readout_default(0.2).unwrap();
    let shots = 400_000;
    let m: f64 = 0.2;
    let mut opts = SimOptions::new(shots, 2);
    let r = simulate(&c, &nm, &opts).unwrap();
    assert!(common::within_sigma(r.stats.accepted, shots, (1.0 - m).powi(4) + m.powi(4), 3.0));
    assert!(common::within_sigma(r.stats.errors, shots, m.powi(4), 3.0));
    opts.repetition = RepetitionMode::Majority;
    let r = simulate(&c, &nm, &opts).unwrap();
    let tie = 6.0 * m * m * (1.0 - m) * (1.0 - m);
    assert!(common::within_sigma(r.stats.accepted, shots, 1.0 - tie, 3.0));
    assert!(common::within_sigma(r.stats.errors, shots, 4.0 * m.powi(3) * (1.0 - m) + m.powi(4), 3.0));
}

#[test]
fn pair_mismatch_ignores_correlated_flips() {
    let gates = vec![Gate::h(0), Gate::cx(0, 1)];
    let cs = CheckSet { kind: CheckKind::TwoSided, checks: vec![], flags: false, payload: cpc_core::apply_circuit(2, &gates).unwrap() };
    let c = compile(&cs, Connectivity::AllToAll, Some(&gates)).unwrap();
    let mut nm = NoiseModel::noiseless();
    nm.set_gate_channel(GateKind::H, &[0], PauliChannel::new(1, vec![0.5, 0.5, 0.0, 0.0]).unwrap()).unwrap();
    let mut opts = SimOptions::new(10_000, 3);
    let frame = simulate(&c, &nm, &opts).unwrap().stats;
    assert!(frame.errors > 4000);
    opts.criterion = LogicalCriterion::PairMismatch(vec![(0, 1)]);
    assert_eq!(simulate(&c, &nm, &opts).unwrap().stats.errors, 0);
    opts.criterion = LogicalCriterion::PairMismatch(vec![(0, 2)]);
    assert!(simulate(&c, &nm, &opts).is_err());
}

fn random_fault(rng: &mut ChaCha8Rng, c: &CheckedCircuit) -> (usize, PauliString) {
    (rng.random_range(0..=c.gates.len()), PauliString::random(c.n_qubits(), rng).unwrap().unsigned())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn one_sided_is_blind_to_final_z(seed in any::<u64>(), n in 1usize..4, lnn in any::<bool>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let payload = random_clifford(n, &mut rng).unwrap();
        let m = (1 + (seed % 3) as usize).min((1 << n) - 1);
        let cs = cpc_core::checks::sample_one_sided(&payload, m, &mut rng).unwrap();
        let conn = if lnn { Connectivity::Lnn } else { Connectivity::AllToAll };
        let c = compile(&cs, conn, None).unwrap();
        let faults: Vec<_> = (0..3).map(|_| random_fault(&mut rng, &c)).collect();
        let base = propagate_faults(&c, &faults).unwrap();
        let nq = c.n_qubits();
        let z: Vec<bool> = (0..nq).map(|_| rng.random()).collect();
        let mut more = faults.clone();
        more.push((c.gates.len(), PauliString::from_bits(&vec![false; nq], &z).unwrap()));
        let with_z = propagate_faults(&c, &more).unwrap();
        prop_assert_eq!(base.accepted, with_z.accepted);
        prop_assert_eq!(base.logical_error, with_z.logical_error);
    }

    #[test]
    fn fault_propagation_matches_string_oracle(seed in any::<u64>(), n in 1usize..4, lnn in any::<bool>(), one_sided in any::<bool>(), flags in any::<bool>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let payload = random_clifford(n, &mut rng).unwrap();
        let m = (1 + (seed % 3) as usize).min((1 << n) - 1);
        let cs = if one_sided {
            cpc_core::checks::sample_one_sided(&payload, m, &mut rng).unwrap()
        } else {
            cpc_core::checks::sample_two_sided(&payload, m, &mut rng).unwrap().with_flags(flags).unwrap()
        };
        let conn = if lnn { Connectivity::Lnn } else { Connectivity::AllToAll };
        let c = compile(&cs, conn, None).unwrap();
        // The oracle injects after gate g, the simulator before gate g + 1.
        let faults: Vec<_> = (0..2).map(|_| {
            let (g, p) = random_fault(&mut rng, &c);
            (g.min(c.gates.len() - 1), p)
        }).collect();
        let shifted: Vec<_> = faults.iter().map(|(g, p)| (g + 1, p.clone())).collect();
        let sim = propagate_faults(&c, &shifted).unwrap();
        let oracle = common::run_faulty(&c, &faults, &[]);
        prop_assert_eq!(sim.accepted, oracle.accepted);
        prop_assert_eq!(sim.logical_error, oracle.logical_error);
    }
}
