use std::f64::consts::FRAC_PI_2;
use std::f64::consts::FRAC_PI_3;

use nalgebra::{Matrix3, Rotation3, Vector3};
use serde::{Deserialize, Serialize};

use super::pyramid::{Site, Species};
use crate::{Error, Result};

/// Target magnitude of the strongest heteronuclear nearest-neighbor coupling.
pub const NEAREST_NEIGHBOR_COUPLING_HZ: f64 = 1000.0;

/// Angular part of the secular dipolar coupling, `(3cos²Θ − 1) / 2`, for a
/// bond vector `v`, with Θ measured from the field (z) axis.
pub fn angular_factor(v: &Vector3<f64>) -> f64 {
    let cos2 = v.z * v.z / v.norm_squared();
    0.5 * (3.0 * cos2 - 1.0)
}

/// Named Bravais presets.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GeometryPreset {
    /// α = β = γ = π/2.
    Cubic,
    /// α = β = γ = π/3.
    Rhombo60,
}

impl GeometryPreset {
    pub fn angles(self) -> [f64; 3] {
        match self {
            GeometryPreset::Cubic => [FRAC_PI_2; 3],
            GeometryPreset::Rhombo60 => [FRAC_PI_3; 3],
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            GeometryPreset::Cubic => "cubic",
            GeometryPreset::Rhombo60 => "rhombo60",
        }
    }
}

/// Coupling prefactors `g` in Hz·(distance unit)³, one per species pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CouplingPrefactors {
    pub aa: f64,
    pub ab: f64,
    pub bb: f64,
}

impl CouplingPrefactors {
    pub fn uniform(g: f64) -> Self {
        CouplingPrefactors { aa: g, ab: g, bb: g }
    }

    pub fn for_pair(&self, a: Species, b: Species) -> f64 {
        match (a, b) {
            (Species::A, Species::A) => self.aa,
            (Species::B, Species::B) => self.bb,
            _ => self.ab,
        }
    }

    pub fn scaled(&self, c: f64) -> Self {
        CouplingPrefactors {
            aa: self.aa * c,
            ab: self.ab * c,
            bb: self.bb * c,
        }
    }
}

/// Equal-edge Bravais cell oriented so the body diagonal `a₁ + a₂ + a₃`
/// points along −z: the apex sits on top and deeper layers lie lower.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeGeometry {
    angles: [f64; 3],
    edge: f64,
    couplings: CouplingPrefactors,
    /// Columns are the rotated primitive vectors.
    basis: Matrix3<f64>,
}

impl LatticeGeometry {
    /// Cell with angles `[α, β, γ]` (α between a₂,a₃; β between a₁,a₃; γ
    /// between a₁,a₂), edge length `edge` and explicit prefactors.
    pub fn new(angles: [f64; 3], edge: f64, couplings: CouplingPrefactors) -> Result<Self> {
        if !(edge.is_finite() && edge > 0.0) {
            return Err(Error::Domain(format!("edge length must be positive, got {edge}")));
        }
        let [alpha, beta, gamma] = angles;
        if angles.iter().any(|a| !(a.is_finite() && *a > 0.0 && *a < std::f64::consts::PI)) {
            return Err(Error::Domain(format!("Bravais angles must lie in (0, π), got {angles:?}")));
        }
        let (ca, cb, cg) = (alpha.cos(), beta.cos(), gamma.cos());
        let gram = 1.0 + 2.0 * ca * cb * cg - ca * ca - cb * cb - cg * cg;
        if gram <= 1e-12 {
            return Err(Error::Domain(format!("Bravais angles {angles:?} do not span a 3D cell")));
        }
        let sg = gamma.sin();
        let a1 = Vector3::new(edge, 0.0, 0.0);
        let a2 = Vector3::new(edge * cg, edge * sg, 0.0);
        let a3 = Vector3::new(
            edge * cb,
            edge * (ca - cb * cg) / sg,
            edge * gram.sqrt() / sg,
        );
        let diagonal = a1 + a2 + a3;
        let down = -Vector3::z();
        let rot = Rotation3::rotation_between(&diagonal, &down)
            .unwrap_or_else(|| Rotation3::from_axis_angle(&Vector3::x_axis(), std::f64::consts::PI));
        let basis = Matrix3::from_columns(&[rot * a1, rot * a2, rot * a3]);
        Ok(LatticeGeometry {
            angles,
            edge,
            couplings,
            basis,
        })
    }

    /// Unit-edge cell whose strongest heteronuclear nearest-neighbor coupling
    /// is 1000 Hz, with equal prefactors for all species pairs.
    ///
    /// When every nearest-neighbor bond sits at the magic angle (the cubic
    /// preset) the normalization falls back to `g / a³ = 1000 Hz`.
    pub fn normalized(angles: [f64; 3]) -> Result<Self> {
        let unit = LatticeGeometry::new(angles, 1.0, CouplingPrefactors::uniform(1.0))?;
        let max_factor = unit
            .basis
            .column_iter()
            .map(|c| angular_factor(&c.into_owned()).abs())
            .fold(0.0, f64::max);
        let scale = if max_factor > 1e-9 { max_factor } else { 1.0 };
        let g = NEAREST_NEIGHBOR_COUPLING_HZ / scale;
        Ok(unit.with_couplings(CouplingPrefactors::uniform(g)))
    }

    pub fn preset(preset: GeometryPreset) -> Self {
        LatticeGeometry::normalized(preset.angles()).expect("presets are valid cells")
    }

    /// Parses `cubic`, `rhombo60`, or three comma-separated angles in radians.
    pub fn parse(name: &str) -> Result<Self> {
        match name.trim().to_ascii_lowercase().as_str() {
            "cubic" => Ok(Self::preset(GeometryPreset::Cubic)),
            "rhombo60" => Ok(Self::preset(GeometryPreset::Rhombo60)),
            other => {
                let parts: Vec<f64> = other
                    .split(',')
                    .map(|p| p.trim().parse::<f64>())
                    .collect::<std::result::Result<_, _>>()
                    .map_err(|_| Error::Domain(format!("unknown geometry `{name}`")))?;
                let angles: [f64; 3] = parts
                    .try_into()
                    .map_err(|_| Error::Domain(format!("unknown geometry `{name}`")))?;
                Self::normalized(angles)
            }
        }
    }

    pub fn with_couplings(mut self, couplings: CouplingPrefactors) -> Self {
        self.couplings = couplings;
        self
    }

    pub fn angles(&self) -> [f64; 3] {
        self.angles
    }

    pub fn edge(&self) -> f64 {
        self.edge
    }

    pub fn couplings(&self) -> CouplingPrefactors {
        self.couplings
    }

    pub fn primitive_vectors(&self) -> [Vector3<f64>; 3] {
        [
            self.basis.column(0).into_owned(),
            self.basis.column(1).into_owned(),
            self.basis.column(2).into_owned(),
        ]
    }

    pub fn basis(&self) -> &Matrix3<f64> {
        &self.basis
    }

    /// Real-space vector of an integer lattice offset.
    pub fn displacement(&self, offset: [i64; 3]) -> Vector3<f64> {
        self.basis * Vector3::new(offset[0] as f64, offset[1] as f64, offset[2] as f64)
    }

    pub fn position(&self, site: Site) -> Vector3<f64> {
        self.displacement(site.coords())
    }

    /// Secular coupling for a lattice offset between sites of the given
    /// species. The offset must be nonzero.
    pub fn coupling_for_offset(&self, offset: [i64; 3], from: Species, to: Species) -> Result<f64> {
        if offset == [0, 0, 0] {
            return Err(Error::Domain("coupling of a site with itself".into()));
        }
        let v = self.displacement(offset);
        let r = v.norm();
        Ok(self.couplings.for_pair(from, to) / (r * r * r) * angular_factor(&v))
    }

    /// Integer bound `n` such that every offset with real-space length ≤
    /// `radius` has all components within `[-n, n]`.
    pub fn offset_bound(&self, radius: f64) -> i64 {
        let inv = self
            .basis
            .try_inverse()
            .expect("basis validated as non-singular");
        (0..3)
            .map(|i| (inv.row(i).norm() * radius).ceil() as i64)
            .max()
            .unwrap_or(0)
    }

    /// Shortest distance between two distinct sites of the same species.
    pub fn homonuclear_distance(&self) -> f64 {
        self.same_species_offsets(1e-9)
            .first()
            .map(|o| self.displacement(*o).norm())
            .unwrap_or(f64::INFINITY)
    }

    /// Same-species offsets (even coordinate sum) at the shortest
    /// same-species distance, within relative tolerance `tol`.
    pub fn same_species_offsets(&self, tol: f64) -> Vec<[i64; 3]> {
        let mut candidates: Vec<([i64; 3], f64)> = Vec::new();
        for i in -2i64..=2 {
            for j in -2i64..=2 {
                for k in -2i64..=2 {
                    if (i, j, k) == (0, 0, 0) || (i + j + k).rem_euclid(2) != 0 {
                        continue;
                    }
                    let o = [i, j, k];
                    candidates.push((o, self.displacement(o).norm()));
                }
            }
        }
        let min = candidates.iter().map(|c| c.1).fold(f64::INFINITY, f64::min);
        candidates
            .into_iter()
            .filter(|c| c.1 <= min * (1.0 + tol))
            .map(|c| c.0)
            .collect()
    }
}

/// Dipolar coupling `d_ij = g_ij / r³ · (3cos²Θ − 1) / 2` in Hz.
pub fn dipolar_coupling(geometry: &LatticeGeometry, site_i: Site, site_j: Site) -> Result<f64> {
    if site_i == site_j {
        return Err(Error::Domain(format!("coincident sites {site_i}")));
    }
    let a = site_i.coords();
    let b = site_j.coords();
    let offset = [b[0] - a[0], b[1] - a[1], b[2] - a[2]];
    geometry.coupling_for_offset(offset, site_i.species(), site_j.species())
}
