mod common;

use std::collections::HashSet;

use proptest::prelude::*;
use spinamp::lattice::*;
use spinamp::Error;

use common::{naive_neighbors, naive_sites};

#[test]
fn counts_match_enumeration_up_to_100_layers() {
    for l in 1..=100u64 {
        let lat = PyramidLattice::new(l).unwrap();
        let sites = naive_sites(l as i64);
        assert_eq!(lat.site_count(), sites.len() as u64, "L={l}");
        for layer in 1..=l {
            let n = sites
                .iter()
                .filter(|c| (c[0] + c[1] + c[2]) as u64 == layer - 1)
                .count() as u64;
            assert_eq!(lat.layer_range(layer).end - lat.layer_range(layer).start, n);
            if layer > 1 {
                assert_eq!(layer_size(layer), layer_size(layer - 1) + layer);
            }
        }
    }
}

#[test]
fn large_counts() {
    assert_eq!(PyramidLattice::new(202).unwrap().site_count(), 1_394_204);
    assert_eq!(PyramidLattice::new(3).unwrap().site_count(), 10);
    assert!(matches!(PyramidLattice::new(0), Err(Error::Sizing(_))));
    assert!(matches!(PyramidLattice::with_budget(2000, 1 << 20), Err(Error::Sizing(_))));
}

#[test]
fn ids_are_a_layer_major_bijection() {
    for l in 1..=25u64 {
        let lat = PyramidLattice::new(l).unwrap();
        let mut last_depth = 0;
        for (i, s) in lat.sites().enumerate() {
            assert_eq!(lat.id(s), Some(i as u64));
            assert_eq!(lat.site(i as u64), Some(s));
            assert!(s.depth() >= last_depth);
            last_depth = s.depth();
        }
        assert_eq!(lat.site(lat.site_count()), None);
    }
}

#[test]
fn neighbors_bipartite_symmetric_and_complete() {
    for l in 1..=30u64 {
        let lat = PyramidLattice::new(l).unwrap();
        let mut links = HashSet::new();
        for s in lat.sites() {
            let ns = lat.neighbors_of(s).unwrap();
            if lat.is_bottom(s) {
                assert!(ns.len() <= 3);
            } else {
                assert!((3..=6).contains(&ns.len()));
            }
            for n in &ns {
                assert_ne!(n.species(), s.species());
                let d: i64 = (0..3).map(|i| (n.coords()[i] - s.coords()[i]).abs()).sum();
                assert_eq!(d, 1);
                links.insert((s, *n));
            }
        }
        for (a, b) in &links {
            assert!(links.contains(&(*b, *a)));
        }
    }
    // Cross-check the neighbor sets against a full scan on a small pyramid.
    let lat = PyramidLattice::new(7).unwrap();
    for s in lat.sites() {
        let mut got: Vec<[i64; 3]> = lat.neighbors_of(s).unwrap().iter().map(Site::coords).collect();
        let mut expect = naive_neighbors(7, s.coords());
        got.sort();
        expect.sort();
        assert_eq!(got, expect);
    }
}

#[test]
fn neighbor_examples() {
    let lat = PyramidLattice::new(6).unwrap();
    let apex: HashSet<Site> = lat.neighbors_of(Site::APEX).unwrap().into_iter().collect();
    assert_eq!(
        apex,
        [Site::new(1, 0, 0), Site::new(0, 1, 0), Site::new(0, 0, 1)].into_iter().collect()
    );
    assert_eq!(lat.neighbors_of(Site::new(1, 0, 0)).unwrap().len(), 4);
    assert_eq!(lat.neighbors_of(Site::new(1, 1, 1)).unwrap().len(), 6);
    assert!(matches!(lat.neighbors_of(Site::new(6, 0, 0)), Err(Error::Domain(_))));
    assert!(PyramidLattice::new(1).unwrap().neighbors_of(Site::APEX).unwrap().is_empty());
}

#[test]
fn magic_angle_null_for_all_six_bonds() {
    let g = LatticeGeometry::preset(GeometryPreset::Cubic);
    for o in [[1, 0, 0], [0, 1, 0], [0, 0, 1], [-1, 0, 0], [0, -1, 0], [0, 0, -1]] {
        let v = g.displacement(o);
        let cos = v.z / v.norm();
        assert!((3.0 * cos * cos - 1.0).abs() < 1e-12);
        assert!((cos.abs() - 1.0 / 3f64.sqrt()).abs() < 1e-12);
    }
}

#[test]
fn rhombo60_nearest_neighbors_at_1000_hz() {
    let g = LatticeGeometry::preset(GeometryPreset::Rhombo60);
    let a = g.primitive_vectors();
    for i in 0..3 {
        for j in 0..i {
            let c = a[i].dot(&a[j]) / (a[i].norm() * a[j].norm());
            assert!((c - 0.5).abs() < 1e-12);
        }
    }
    let lat = PyramidLattice::new(6).unwrap();
    for n in lat.neighbors_of(Site::new(1, 1, 1)).unwrap() {
        let d = dipolar_coupling(&g, Site::new(1, 1, 1), n).unwrap();
        assert!((d.abs() - 1000.0).abs() < 1e-9, "{d}");
    }
}

#[test]
fn coupling_table_examples() {
    let lat = PyramidLattice::new(6).unwrap();
    let g = LatticeGeometry::preset(GeometryPreset::Rhombo60);
    let ideal = TableOptions {
        model: CouplingModel::IdealNn,
        ..Default::default()
    };
    let t = coupling_table(&g, CrystalContext::Pyramid(&lat), Site::new(1, 0, 0), &ideal).unwrap();
    assert_eq!(t.len(), 4);
    assert!(t.entries.iter().all(|e| e.homonuclear == 0 && e.coupling_hz == t.entries[0].coupling_hz));

    let full = TableOptions {
        model: CouplingModel::FullDipolar,
        cutoff: 2.0,
        ..Default::default()
    };
    let t = coupling_table(&g, CrystalContext::Bulk, Site::new(5, 5, 5), &full).unwrap();
    assert!(t.entries.iter().any(|e| e.homonuclear == 1));
    for e in &t.entries {
        let parity = e.offset.iter().sum::<i64>().rem_euclid(2);
        assert_eq!(e.homonuclear == 1, parity == 0);
        assert!(e.distance <= 2.0 + 1e-9);
    }
    for w in t.entries.windows(2) {
        assert!(w[0].coupling_hz.abs() >= w[1].coupling_hz.abs());
    }
}

/// Brute-force shell enumeration over a generous box.
#[test]
fn cutoff_search_is_complete() {
    for preset in [GeometryPreset::Cubic, GeometryPreset::Rhombo60] {
        let g = LatticeGeometry::preset(preset);
        let opts = TableOptions {
            model: CouplingModel::FullDipolar,
            cutoff: 2.5,
            floor_hz: 0.0,
        };
        let t = coupling_table(&g, CrystalContext::Bulk, Site::new(9, 9, 9), &opts).unwrap();
        let mut expect = 0;
        for i in -8i64..=8 {
            for j in -8i64..=8 {
                for k in -8i64..=8 {
                    if (i, j, k) != (0, 0, 0) && g.displacement([i, j, k]).norm() <= 2.5 * (1.0 + 1e-12) {
                        expect += 1;
                    }
                }
            }
        }
        assert_eq!(t.len(), expect, "{preset:?}");
    }
}

fn any_offset() -> impl Strategy<Value = [i64; 3]> {
    [-4i64..=4, -4i64..=4, -4i64..=4].prop_filter("nonzero", |o| *o != [0, 0, 0])
}

proptest! {
    #[test]
    fn coupling_is_symmetric(a in 0u32..6, b in 0u32..6, c in 0u32..6, o in any_offset()) {
        let g = LatticeGeometry::parse("1.1, 1.2, 1.3").unwrap();
        let i = Site::new(a + 4, b + 4, c + 4);
        let j = i.offset(o).unwrap();
        prop_assert_eq!(dipolar_coupling(&g, i, j).unwrap(), dipolar_coupling(&g, j, i).unwrap());
    }

    #[test]
    fn inverse_cube_decay(o in any_offset()) {
        let g = LatticeGeometry::preset(GeometryPreset::Rhombo60);
        let far = [2 * o[0], 2 * o[1], 2 * o[2]];
        let near = g.coupling_for_offset(o, Species::A, Species::B).unwrap();
        let d = g.coupling_for_offset(far, Species::A, Species::B).unwrap();
        prop_assert!((near - 8.0 * d).abs() <= 1e-12 * near.abs().max(1e-300) + 1e-12);
    }

    #[test]
    fn species_alternate_by_depth(x in 0u32..50, y in 0u32..50, z in 0u32..50) {
        let s = Site::new(x, y, z);
        for n in s.coords().iter().enumerate().map(|(i, _)| {
            let mut d = [0i64; 3];
            d[i] = 1;
            s.offset(d).unwrap()
        }) {
            prop_assert_ne!(n.species(), s.species());
        }
    }
}
