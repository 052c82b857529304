mod common;

use proptest::prelude::*;
use spinamp::automaton::*;
use spinamp::lattice::{PyramidLattice, Site};

use common::NaiveAutomaton;

fn fields_of(set: FieldSet) -> Vec<i32> {
    set.fields().collect()
}

/// Runs both implementations from the same initial state and compares every
/// spin after every phase.
fn compare(lat: &PyramidLattice, init: &[(Site, Spin)], phases: u64, options: &RunOptions) -> Result<(), String> {
    let embedded = options.boundary == BoundaryMode::Embedded;
    let mut naive = NaiveAutomaton::new(lat.layers() as i64, embedded);
    let mut fast = Automaton::new(lat, options.boundary, options.scan);
    for (s, v) in init {
        naive.spins.insert(s.coords(), v.value() as i8);
        fast.set_spin(*s, *v).unwrap();
    }
    let fields = fields_of(options.fields);
    for k in 1..=phases {
        let phase = PulsePhase::new(PulsePhase::species_for(k), options.fields);
        let got = fast.run_phase(&phase).flips;
        let expect = naive.phase(k, &fields);
        if got != expect {
            return Err(format!("phase {k}: {got} flips vs {expect}"));
        }
        for s in lat.sites() {
            let a = fast.spin(s).unwrap().value() as i8;
            let b = naive.spins[&s.coords()];
            if a != b {
                return Err(format!("phase {k}: site {s} is {a}, reference {b}"));
            }
        }
        if fast.up_count() != naive.up_count() {
            return Err(format!("phase {k}: cached up count drifted"));
        }
    }
    Ok(())
}

#[test]
fn ideal_runs_match_reference_for_small_pyramids() {
    for l in 1..=12u64 {
        let lat = PyramidLattice::new(l).unwrap();
        for scan in [ScanMode::Restricted, ScanMode::Full] {
            let options = RunOptions {
                scan,
                ..Default::default()
            };
            compare(&lat, &[(Site::APEX, Spin::Up)], l.saturating_sub(1), &options).unwrap();
        }
    }
}

#[test]
fn wide_rows_cross_word_boundaries() {
    // Rows longer than 64 sites exercise the multi-window path.
    let lat = PyramidLattice::new(70).unwrap();
    let run = run_ideal(&lat, Spin::Up, 68, &RunOptions::default());
    assert_eq!(run.state.count_up(), layers_up_count(69));
    let full = run_ideal(
        &lat,
        Spin::Up,
        68,
        &RunOptions {
            scan: ScanMode::Full,
            ..Default::default()
        },
    );
    assert_eq!(run.state, full.state);
    assert_eq!(run.trace, full.trace);
}

#[test]
fn ideal_flip_counts_follow_layer_sizes() {
    let lat = PyramidLattice::new(30).unwrap();
    let run = run_ideal(&lat, Spin::Up, 28, &RunOptions::default());
    for r in &run.trace.records {
        assert_eq!(r.flips, (r.phase + 1) * (r.phase + 2) / 2);
        assert_eq!(r.up_count, layers_up_count(r.phase + 1));
    }
    assert_eq!(run.trace.final_up_count(), Some(predicted_flip_count(30).unwrap()));
}

fn arb_state(max_layers: u64) -> impl Strategy<Value = (u64, Vec<bool>)> {
    (2..=max_layers).prop_flat_map(|l| {
        let n = (l * (l + 1) * (l + 2) / 6) as usize;
        (Just(l), proptest::collection::vec(proptest::bool::weighted(0.3), n))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn arbitrary_states_match_reference(
        (l, bits) in arb_state(9),
        phases in 1u64..8,
        open in any::<bool>(),
        plus_one in any::<bool>(),
        full in any::<bool>(),
    ) {
        let lat = PyramidLattice::new(l).unwrap();
        let init: Vec<(Site, Spin)> = lat
            .sites()
            .zip(&bits)
            .map(|(s, b)| (s, if *b { Spin::Up } else { Spin::Down }))
            .collect();
        let options = RunOptions {
            fields: if plus_one { FieldSet::with_plus_one() } else { FieldSet::standard() },
            boundary: if open { BoundaryMode::Open } else { BoundaryMode::Embedded },
            scan: if full { ScanMode::Full } else { ScanMode::Restricted },
        };
        prop_assert_eq!(compare(&lat, &init, phases, &options), Ok(()));
    }

    #[test]
    fn single_field_pulses_match_reference((l, bits) in arb_state(8), field in -6i32..=6, b in any::<bool>()) {
        let lat = PyramidLattice::new(l).unwrap();
        let mut naive = NaiveAutomaton::new(l as i64, true);
        let mut fast = Automaton::new(&lat, BoundaryMode::Embedded, ScanMode::Restricted);
        for (s, up) in lat.sites().zip(&bits) {
            let v = if *up { Spin::Up } else { Spin::Down };
            naive.spins.insert(s.coords(), v.value() as i8);
            fast.set_spin(s, v).unwrap();
        }
        for s in lat.sites() {
            prop_assert_eq!(fast.neighbor_field(s).unwrap(), naive.field(s.coords()));
        }
        let species = if b { spinamp::lattice::Species::B } else { spinamp::lattice::Species::A };
        let got = fast.apply_pulse(species, field).unwrap();
        let expect = naive.pulse(if b { 1 } else { 0 }, field);
        prop_assert_eq!(got, expect);
    }

    #[test]
    fn state_bytes_round_trip_through_runs(l in 2u64..20, p in 0u64..18) {
        let lat = PyramidLattice::new(l).unwrap();
        let run = run_ideal(&lat, Spin::Up, p.min(l - 1), &RunOptions::default());
        let back = SpinState::from_bytes(&run.state.to_bytes()).unwrap();
        prop_assert_eq!(back, run.state);
    }
}

#[test]
fn invalid_pulse_fields_are_rejected() {
    let lat = PyramidLattice::new(4).unwrap();
    let mut a = Automaton::new(&lat, BoundaryMode::Embedded, ScanMode::Restricted);
    assert!(a.apply_pulse(spinamp::lattice::Species::B, 7).is_err());
    assert!(a.set_spin(Site::new(4, 0, 0), Spin::Up).is_err());
    assert!(predicted_flip_count(0).is_err());
}
