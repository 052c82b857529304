//! Pyramid site set, species checkerboard, neighbor topology, Bravais geometry
//! and dipolar couplings.

mod coupling;
mod geometry;
mod pyramid;

pub use coupling::{
    coupling_table, CouplingEntry, CouplingModel, CouplingTable, CrystalContext, TableOptions,
    TableWarning,
};
pub use geometry::{
    angular_factor, dipolar_coupling, CouplingPrefactors, GeometryPreset, LatticeGeometry,
    NEAREST_NEIGHBOR_COUPLING_HZ,
};
pub use pyramid::{
    layer_size, layers_for_size, tetrahedral, PyramidLattice, Site, Species, CHILD_OFFSETS,
    DEFAULT_STATE_BUDGET_BYTES, PARENT_OFFSETS,
};
