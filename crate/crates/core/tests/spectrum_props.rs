use std::collections::BTreeMap;

use proptest::prelude::*;
use spinamp::lattice::*;
use spinamp::spectrum::*;

fn bulk_table(preset: GeometryPreset, model: CouplingModel, cutoff: f64) -> CouplingTable {
    let opts = TableOptions {
        model,
        cutoff,
        ..Default::default()
    };
    coupling_table(&LatticeGeometry::preset(preset), CrystalContext::Bulk, Site::new(5, 5, 4), &opts).unwrap()
}

/// Exhaustive reference: enumerate every partner configuration with plain
/// arithmetic and bucket frequencies by rounding to 1 mHz.
fn reference_sticks(table: &CouplingTable, p: f64) -> BTreeMap<i64, f64> {
    let n = table.entries.len();
    let mut out = BTreeMap::new();
    for mask in 0u64..(1 << n) {
        let mut f = 0.0;
        let mut w = 1.0;
        for (j, e) in table.entries.iter().enumerate() {
            let up = mask >> j & 1 == 1;
            f += if up { 2.0 * e.coupling_hz } else { -2.0 * e.coupling_hz };
            w *= if up { p } else { 1.0 - p };
        }
        *out.entry((f * 1000.0).round() as i64).or_insert(0.0) += w;
    }
    out
}

fn bucketed(sticks: &[Stick]) -> BTreeMap<i64, f64> {
    let mut out = BTreeMap::new();
    for s in sticks {
        *out.entry((s.frequency * 1000.0).round() as i64).or_insert(0.0) += s.weight;
    }
    out
}

#[test]
fn exhaustive_sticks_match_reference_enumeration() {
    let cfg = SpectrumConfig::default();
    for (preset, cutoff) in [(GeometryPreset::Rhombo60, 1.0), (GeometryPreset::Rhombo60, 1.5), (GeometryPreset::Cubic, 1.5)] {
        let t = bulk_table(preset, CouplingModel::FullDipolar, cutoff);
        assert!(t.len() <= cfg.exhaustive_threshold, "{}", t.len());
        let s = spectrum_from_table(&t, &cfg, None).unwrap();
        assert_eq!(s.sampling, Sampling::Exhaustive { configurations: 1 << t.len() });
        let got = bucketed(&s.sticks);
        let expect = reference_sticks(&t, 0.5);
        assert_eq!(got.keys().collect::<Vec<_>>(), expect.keys().collect::<Vec<_>>());
        for (k, w) in &expect {
            assert!((got[k] - w).abs() < 1e-12);
        }
        assert!((s.total_weight() - 1.0).abs() < 1e-9);
        assert!((s.curve.area() - 1.0).abs() < 1e-6);
    }
}

#[test]
fn uniform_partners_give_symmetric_spectra() {
    let cfg = SpectrumConfig::default();
    let t = bulk_table(GeometryPreset::Rhombo60, CouplingModel::FullDipolar, 1.5);
    let s = spectrum_from_table(&t, &cfg, None).unwrap();
    let tol = merge_tolerance(&t);
    for st in &s.sticks {
        let mirror = s
            .sticks
            .iter()
            .find(|m| (m.frequency + st.frequency).abs() <= 2.0 * tol)
            .expect("mirror stick");
        assert!((mirror.weight - st.weight).abs() < 1e-12);
    }
}

/// Per-stick 3σ binomial agreement between 10⁶ samples and the exact weights.
#[test]
fn monte_carlo_matches_exhaustive() {
    let lat = PyramidLattice::new(6).unwrap();
    let surface = coupling_table(
        &LatticeGeometry::preset(GeometryPreset::Rhombo60),
        CrystalContext::Pyramid(&lat),
        Site::new(1, 0, 0),
        &TableOptions {
            model: CouplingModel::FullDipolar,
            cutoff: 1.0,
            ..Default::default()
        },
    )
    .unwrap();
    for (label, t) in [
        ("bulk full r<=1", bulk_table(GeometryPreset::Rhombo60, CouplingModel::FullDipolar, 1.0)),
        ("bulk nn", bulk_table(GeometryPreset::Rhombo60, CouplingModel::DipolarNn, 2.5)),
        ("surface full r<=1", surface),
    ] {
        assert!(t.len() <= 12);
        let exact = spectrum_from_table(&t, &SpectrumConfig::default(), None).unwrap();
        let samples = 1_000_000u64;
        let mc_cfg = SpectrumConfig {
            exhaustive_threshold: 0,
            monte_carlo: Some(MonteCarloConfig { samples, seed: 7 }),
            ..Default::default()
        };
        let mc = spectrum_from_table(&t, &mc_cfg, None).unwrap();
        assert_eq!(mc.sampling, Sampling::MonteCarlo { samples });
        assert!((mc.total_weight() - 1.0).abs() < 1e-9);
        let got = bucketed(&mc.sticks);
        for (k, w) in bucketed(&exact.sticks) {
            let sigma = (w * (1.0 - w) / samples as f64).sqrt();
            let g = got.get(&k).copied().unwrap_or(0.0);
            assert!((g - w).abs() <= 3.0 * sigma + 1e-12, "{label} stick {k}: {g} vs {w}");
        }
    }
}

#[test]
fn suppression_equals_zeroed_homonuclear_couplings() {
    let cfg = SpectrumConfig::default();
    let t = bulk_table(GeometryPreset::Rhombo60, CouplingModel::FullDipolar, 1.5);
    let suppressed = spectrum_from_table(&t.without_homonuclear(), &cfg, None).unwrap();
    let mut zeroed = t.clone();
    for e in zeroed.entries.iter_mut().filter(|e| e.homonuclear == 1) {
        e.coupling_hz = 0.0;
    }
    let reference = reference_sticks(&zeroed, 0.5);
    let got = bucketed(&suppressed.sticks);
    assert_eq!(got.len(), reference.len());
    for (k, w) in reference {
        assert!((got[&k] - w).abs() < 1e-12);
    }
    // The surface probe goes through the same path.
    let lat = PyramidLattice::new(8).unwrap();
    let g = LatticeGeometry::preset(GeometryPreset::Rhombo60);
    let on = SpectrumConfig {
        suppress_homonuclear: true,
        cutoff: 1.5,
        ..Default::default()
    };
    let s = stick_spectrum(Site::new(1, 0, 0), &g, CrystalContext::Pyramid(&lat), &on).unwrap();
    let t = coupling_table(
        &g,
        CrystalContext::Pyramid(&lat),
        Site::new(1, 0, 0),
        &TableOptions {
            model: CouplingModel::FullDipolar,
            cutoff: 1.5,
            ..Default::default()
        },
    )
    .unwrap();
    assert_eq!(s.partner_count, t.entries.iter().filter(|e| e.homonuclear == 0).count());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn frequencies_scale_linearly_with_g(c in 0.1f64..10.0) {
        let base = LatticeGeometry::preset(GeometryPreset::Rhombo60);
        let scaled = base.clone().with_couplings(base.couplings().scaled(c));
        let cfg = SpectrumConfig { cutoff: 1.5, ..Default::default() };
        let a = stick_spectrum(Site::new(4, 4, 4), &base, CrystalContext::Bulk, &cfg).unwrap();
        let b = stick_spectrum(Site::new(4, 4, 4), &scaled, CrystalContext::Bulk, &cfg).unwrap();
        prop_assert_eq!(a.sticks.len(), b.sticks.len());
        for (x, y) in a.sticks.iter().zip(&b.sticks) {
            prop_assert!((y.frequency - c * x.frequency).abs() <= 1e-9 * (1.0 + y.frequency.abs()));
            prop_assert!((x.weight - y.weight).abs() < 1e-12);
        }
    }

    #[test]
    fn weights_normalized_for_any_bias(p in 0.0f64..=1.0) {
        let lat = PyramidLattice::new(6).unwrap();
        let cfg = SpectrumConfig { up_probability: p, cutoff: 1.5, ..Default::default() };
        let s = stick_spectrum(
            Site::new(1, 0, 0),
            &LatticeGeometry::preset(GeometryPreset::Rhombo60),
            CrystalContext::Pyramid(&lat),
            &cfg,
        )
        .unwrap();
        prop_assert!((s.total_weight() - 1.0).abs() < 1e-9);
        prop_assert!((s.curve.area() - 1.0).abs() < 1e-6);
    }
}

#[test]
fn adjacent_ideal_peaks_are_resolved_at_100_hz() {
    let lat = PyramidLattice::new(6).unwrap();
    let cfg = SpectrumConfig {
        broadening_hz: 100.0,
        ..SpectrumConfig::ideal()
    };
    let s = stick_spectrum(
        Site::new(1, 0, 0),
        &LatticeGeometry::preset(GeometryPreset::Cubic),
        CrystalContext::Pyramid(&lat),
        &cfg,
    )
    .unwrap();
    let grid = s.curve.grid.clone();
    let peak = |f: i32| broaden(&s.sticks_where(|x| x == f), &grid, 100.0).unwrap();
    for f in [-4, -2, 0, 2] {
        let o = addressability_metric(&peak(f), &peak(f + 2)).unwrap();
        assert!(o < 1e-3, "{f}: {o}");
    }
    let overlaps = field_overlaps(&s, &grid, 100.0).unwrap();
    assert_eq!(overlaps.len(), 5);
    assert!(overlaps.values().all(|o| *o < 1e-3));
}

#[test]
fn rhombo60_bulk_comparison() {
    let cmp = compare_models(
        Site::new(4, 4, 4),
        &LatticeGeometry::preset(GeometryPreset::Rhombo60),
        CrystalContext::Bulk,
        &SpectrumConfig::default(),
    )
    .unwrap();
    let ideal = cmp.model("ideal-nn").unwrap();
    let full = cmp.model("full-dipolar").unwrap();
    let suppressed = cmp.model("suppressed").unwrap();
    assert!(full.score > suppressed.score, "{} vs {}", full.score, suppressed.score);
    assert_eq!(ideal.spectrum.sticks.len(), 7);
    for (f, center) in &suppressed.cluster_centers {
        let ideal_position = ideal.cluster_centers[f];
        assert!((ideal_position - 2000.0 * *f as f64).abs() < 1e-9);
        assert!((center - ideal_position).abs() <= 50.0, "field {f}: {center} vs {ideal_position}");
    }
    // All three curves share one grid.
    assert_eq!(full.spectrum.curve.grid, cmp.grid);
    assert_eq!(suppressed.spectrum.curve.grid, cmp.grid);
}
