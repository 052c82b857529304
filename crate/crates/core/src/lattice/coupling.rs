use serde::{Deserialize, Serialize};

use super::geometry::{LatticeGeometry, NEAREST_NEIGHBOR_COUPLING_HZ};
use super::pyramid::{PyramidLattice, Site, Species};
use crate::{Error, Result};

/// Which couplings a table contains.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CouplingModel {
    /// Manhattan-distance-one bonds only, each with the same coupling
    /// (1000 Hz), independent of geometry.
    IdealNn,
    /// Manhattan-distance-one bonds only, with their dipolar values.
    DipolarNn,
    /// Every partner within the cutoff, with its dipolar value.
    FullDipolar,
}

impl CouplingModel {
    pub fn name(self) -> &'static str {
        match self {
            CouplingModel::IdealNn => "ideal-nn",
            CouplingModel::DipolarNn => "dipolar-nn",
            CouplingModel::FullDipolar => "full-dipolar",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ideal-nn" | "ideal" => Ok(CouplingModel::IdealNn),
            "dipolar-nn" | "full-nn" | "nn" => Ok(CouplingModel::DipolarNn),
            "full-dipolar" | "full" | "dipolar" => Ok(CouplingModel::FullDipolar),
            _ => Err(Error::Domain(format!("unknown coupling model `{s}`"))),
        }
    }
}

/// Where partners of a probed spin are drawn from.
#[derive(Debug, Clone, Copy)]
pub enum CrystalContext<'a> {
    /// Infinite crystal: every integer offset is a site.
    Bulk,
    /// The probe's actual pyramid neighborhood, including its surfaces.
    Pyramid(&'a PyramidLattice),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CouplingEntry {
    /// Partner position relative to the probe, in lattice coordinates.
    pub offset: [i64; 3],
    pub distance: f64,
    /// Secular coupling `d` in Hz.
    pub coupling_hz: f64,
    /// 1 for a same-species partner, 0 otherwise.
    pub homonuclear: u8,
    /// Partner at Manhattan distance one.
    pub nearest: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TableWarning {
    /// The cutoff is shorter than the nearest-neighbor distance, so the table
    /// is empty by construction.
    CutoffBelowNearestNeighbor,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CouplingTable {
    pub probe: Site,
    pub probe_species: Species,
    /// Sorted by |coupling| descending.
    pub entries: Vec<CouplingEntry>,
    pub warning: Option<TableWarning>,
}

impl CouplingTable {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn max_abs_coupling(&self) -> f64 {
        self.entries
            .iter()
            .map(|e| e.coupling_hz.abs())
            .fold(0.0, f64::max)
    }

    /// Same table with every homonuclear coupling removed.
    pub fn without_homonuclear(&self) -> CouplingTable {
        CouplingTable {
            entries: self
                .entries
                .iter()
                .filter(|e| e.homonuclear == 0)
                .cloned()
                .collect(),
            ..self.clone()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TableOptions {
    pub model: CouplingModel,
    /// Real-space cutoff radius, same unit as the cell edge.
    pub cutoff: f64,
    /// Partners with |d| below this many Hz are dropped.
    pub floor_hz: f64,
}

impl Default for TableOptions {
    fn default() -> Self {
        TableOptions {
            model: CouplingModel::FullDipolar,
            cutoff: 2.5,
            floor_hz: 1e-9,
        }
    }
}

/// Couplings of `probe` to every partner within `options.cutoff`.
pub fn coupling_table(
    geometry: &LatticeGeometry,
    context: CrystalContext<'_>,
    probe: Site,
    options: &TableOptions,
) -> Result<CouplingTable> {
    if !(options.cutoff > 0.0) {
        return Err(Error::Domain(format!("cutoff must be positive, got {}", options.cutoff)));
    }
    if let CrystalContext::Pyramid(p) = context {
        if !p.contains(probe) {
            return Err(Error::Domain(format!("probe {probe} outside the pyramid")));
        }
    }
    let probe_species = probe.species();
    let nearest_distance = geometry.edge();
    let bound = match options.model {
        CouplingModel::FullDipolar => geometry.offset_bound(options.cutoff),
        _ => 1,
    };

    let mut entries = Vec::new();
    for i in -bound..=bound {
        for j in -bound..=bound {
            for k in -bound..=bound {
                let offset = [i, j, k];
                let manhattan = i.abs() + j.abs() + k.abs();
                if manhattan == 0 {
                    continue;
                }
                let nearest = manhattan == 1;
                if options.model != CouplingModel::FullDipolar && !nearest {
                    continue;
                }
                if let CrystalContext::Pyramid(p) = context {
                    match probe.offset(offset) {
                        Some(s) if p.contains(s) => {}
                        _ => continue,
                    }
                }
                let distance = geometry.displacement(offset).norm();
                if distance > options.cutoff * (1.0 + 1e-12) {
                    continue;
                }
                let partner_species = if (i + j + k).rem_euclid(2) == 0 {
                    probe_species
                } else {
                    probe_species.other()
                };
                let coupling_hz = match options.model {
                    CouplingModel::IdealNn => NEAREST_NEIGHBOR_COUPLING_HZ,
                    _ => geometry.coupling_for_offset(offset, probe_species, partner_species)?,
                };
                // Nearest neighbors are kept whatever their size: they define
                // the probe's field.
                if coupling_hz.abs() < options.floor_hz && !nearest {
                    continue;
                }
                entries.push(CouplingEntry {
                    offset,
                    distance,
                    coupling_hz,
                    homonuclear: u8::from(partner_species == probe_species),
                    nearest,
                });
            }
        }
    }
    entries.sort_by(|a, b| {
        b.coupling_hz
            .abs()
            .total_cmp(&a.coupling_hz.abs())
            .then(a.offset.cmp(&b.offset))
    });
    let warning = (options.cutoff < nearest_distance * (1.0 - 1e-12))
        .then_some(TableWarning::CutoffBelowNearestNeighbor);
    Ok(CouplingTable {
        probe,
        probe_species,
        entries,
        warning,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::GeometryPreset;

    #[test]
    fn ideal_second_layer_probe() {
        let p = PyramidLattice::new(4).unwrap();
        let g = LatticeGeometry::preset(GeometryPreset::Rhombo60);
        let opts = TableOptions {
            model: CouplingModel::IdealNn,
            ..Default::default()
        };
        let t = coupling_table(&g, CrystalContext::Pyramid(&p), Site::new(1, 0, 0), &opts).unwrap();
        assert_eq!(t.len(), 4);
        assert!(t.entries.iter().all(|e| e.homonuclear == 0 && e.coupling_hz == 1000.0));
    }

    #[test]
    fn rhombo60_bulk_has_homonuclear_partners() {
        let g = LatticeGeometry::preset(GeometryPreset::Rhombo60);
        let opts = TableOptions {
            cutoff: 2.0,
            ..Default::default()
        };
        let t = coupling_table(&g, CrystalContext::Bulk, Site::new(5, 5, 5), &opts).unwrap();
        assert!(t.entries.iter().any(|e| e.homonuclear == 1));
        for e in &t.entries {
            let same = e.offset.iter().sum::<i64>().rem_euclid(2) == 0;
            assert_eq!(e.homonuclear == 1, same);
            assert!(e.distance <= 2.0 + 1e-9);
        }
        for w in t.entries.windows(2) {
            assert!(w[0].coupling_hz.abs() >= w[1].coupling_hz.abs());
        }
    }

    #[test]
    fn short_cutoff_gives_empty_table_with_warning() {
        let g = LatticeGeometry::preset(GeometryPreset::Rhombo60);
        let opts = TableOptions {
            cutoff: 0.5,
            ..Default::default()
        };
        let t = coupling_table(&g, CrystalContext::Bulk, Site::new(3, 3, 3), &opts).unwrap();
        assert!(t.is_empty());
        assert_eq!(t.warning, Some(TableWarning::CutoffBelowNearestNeighbor));
        let bad = TableOptions {
            cutoff: 0.0,
            ..Default::default()
        };
        assert!(coupling_table(&g, CrystalContext::Bulk, Site::APEX, &bad).is_err());
    }

    #[test]
    fn cubic_nn_couplings_vanish_but_stay_listed() {
        let g = LatticeGeometry::preset(GeometryPreset::Cubic);
        let opts = TableOptions {
            model: CouplingModel::DipolarNn,
            ..Default::default()
        };
        let t = coupling_table(&g, CrystalContext::Bulk, Site::new(2, 2, 2), &opts).unwrap();
        assert_eq!(t.len(), 6);
        assert!(t.max_abs_coupling() < 1e-12 * g.couplings().ab);
        // Beyond the nearest shell the floor applies.
        let full = TableOptions {
            model: CouplingModel::FullDipolar,
            floor_hz: 1e6,
            ..Default::default()
        };
        let t = coupling_table(&g, CrystalContext::Bulk, Site::new(2, 2, 2), &full).unwrap();
        assert!(t.entries.iter().all(|e| e.nearest));
    }
}
