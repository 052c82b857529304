use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Default ceiling on bit-packed spin-state memory for one lattice (64 MiB).
pub const DEFAULT_STATE_BUDGET_BYTES: u64 = 64 * 1024 * 1024;

/// A lattice point of the corner-cut crystal. The apex is `(0, 0, 0)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Site {
    pub x: u32,
    pub y: u32,
    pub z: u32,
}

impl Site {
    pub const APEX: Site = Site { x: 0, y: 0, z: 0 };

    pub const fn new(x: u32, y: u32, z: u32) -> Self {
        Site { x, y, z }
    }

    /// Manhattan distance from the apex, `x + y + z`.
    pub fn depth(&self) -> u64 {
        self.x as u64 + self.y as u64 + self.z as u64
    }

    /// One-based layer number; the apex is layer 1.
    pub fn layer(&self) -> u64 {
        self.depth() + 1
    }

    pub fn species(&self) -> Species {
        Species::of_depth(self.depth())
    }

    /// Moves by an integer offset, returning `None` if any coordinate would
    /// become negative.
    pub fn offset(&self, d: [i64; 3]) -> Option<Site> {
        let x = self.x as i64 + d[0];
        let y = self.y as i64 + d[1];
        let z = self.z as i64 + d[2];
        if x < 0 || y < 0 || z < 0 || x > u32::MAX as i64 || y > u32::MAX as i64 || z > u32::MAX as i64 {
            return None;
        }
        Some(Site::new(x as u32, y as u32, z as u32))
    }

    pub fn coords(&self) -> [i64; 3] {
        [self.x as i64, self.y as i64, self.z as i64]
    }
}

impl std::fmt::Display for Site {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({},{},{})", self.x, self.y, self.z)
    }
}

/// Nuclear species. Even-depth sites are `A`, odd-depth sites are `B`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Species {
    A,
    B,
}

impl Species {
    pub fn of_depth(depth: u64) -> Species {
        if depth.is_multiple_of(2) {
            Species::A
        } else {
            Species::B
        }
    }

    pub fn other(self) -> Species {
        match self {
            Species::A => Species::B,
            Species::B => Species::A,
        }
    }

    /// Depth parity shared by every site of this species.
    pub fn parity(self) -> u64 {
        match self {
            Species::A => 0,
            Species::B => 1,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Species::A => "A",
            Species::B => "B",
        }
    }
}

impl std::fmt::Display for Species {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Unit offsets to the three parents and three children of a site.
pub const PARENT_OFFSETS: [[i64; 3]; 3] = [[-1, 0, 0], [0, -1, 0], [0, 0, -1]];
pub const CHILD_OFFSETS: [[i64; 3]; 3] = [[1, 0, 0], [0, 1, 0], [0, 0, 1]];

/// Number of sites in the first `layers` layers, `L(L+1)(L+2)/6`.
pub fn tetrahedral(layers: u64) -> u64 {
    let l = layers as u128;
    (l * (l + 1) * (l + 2) / 6) as u64
}

/// Number of sites in layer `layer` (one-based), `ℓ(ℓ+1)/2`.
pub fn layer_size(layer: u64) -> u64 {
    layer * (layer + 1) / 2
}

/// Smallest layer count whose pyramid holds at least `sites` sites.
pub fn layers_for_size(sites: u64) -> u64 {
    let mut l = (6.0 * sites as f64).cbrt().floor() as u64;
    l = l.saturating_sub(2).max(1);
    while tetrahedral(l) < sites {
        l += 1;
    }
    l
}

/// The half-cube "pyramid" of `L` layers: all sites with `x + y + z ≤ L − 1`.
///
/// Sites carry dense ids in layer-major order. Within a layer of depth `s`,
/// ids run row by row over `x = 0..=s`, and within a row over `y = 0..=s−x`
/// (so `z` decreases along a row). Every row is a contiguous id range, which
/// the automaton kernel relies on for its word-parallel stencil.
///
/// Neighbor lists are implicit: they follow from the coordinates, so memory
/// use is independent of the site count.
#[derive(Debug, Clone)]
pub struct PyramidLattice {
    layers: u64,
    layer_offsets: Vec<u64>,
}

impl PyramidLattice {
    pub fn new(layers: u64) -> Result<Self> {
        Self::with_budget(layers, DEFAULT_STATE_BUDGET_BYTES)
    }

    /// Builds a pyramid whose bit-packed state must fit in `budget_bytes`.
    pub fn with_budget(layers: u64, budget_bytes: u64) -> Result<Self> {
        if layers == 0 {
            return Err(Error::Sizing("layer count must be at least 1".into()));
        }
        if layers > u32::MAX as u64 {
            return Err(Error::Sizing(format!(
                "layer count {layers} exceeds coordinate range"
            )));
        }
        let sites = (layers as u128) * (layers as u128 + 1) * (layers as u128 + 2) / 6;
        let state_bytes = sites.div_ceil(64) * 8;
        if state_bytes > budget_bytes as u128 {
            return Err(Error::Sizing(format!(
                "{layers} layers need {sites} sites ({state_bytes} bytes of state), \
                 exceeding the memory budget of {budget_bytes} bytes"
            )));
        }
        let layer_offsets = (0..=layers).map(tetrahedral).collect();
        Ok(PyramidLattice {
            layers,
            layer_offsets,
        })
    }

    pub fn layers(&self) -> u64 {
        self.layers
    }

    pub fn site_count(&self) -> u64 {
        self.layer_offsets[self.layers as usize]
    }

    /// Id range of one-based layer `layer`.
    pub fn layer_range(&self, layer: u64) -> std::ops::Range<u64> {
        debug_assert!(layer >= 1 && layer <= self.layers);
        self.layer_offsets[layer as usize - 1]..self.layer_offsets[layer as usize]
    }

    /// Id of the first site of the row `x` in the layer of depth `depth`.
    #[inline]
    pub fn row_start(&self, depth: u64, x: u64) -> u64 {
        self.layer_offsets[depth as usize] + x * (depth + 1) - x * x.saturating_sub(1) / 2
    }

    pub fn contains(&self, site: Site) -> bool {
        site.depth() < self.layers
    }

    pub fn id(&self, site: Site) -> Option<u64> {
        if !self.contains(site) {
            return None;
        }
        Some(self.row_start(site.depth(), site.x as u64) + site.y as u64)
    }

    pub fn id_checked(&self, site: Site) -> Result<u64> {
        self.id(site)
            .ok_or_else(|| Error::Domain(format!("site {site} outside a pyramid of {} layers", self.layers)))
    }

    pub fn site(&self, id: u64) -> Option<Site> {
        if id >= self.site_count() {
            return None;
        }
        let depth = self.layer_offsets.partition_point(|&o| o <= id) as u64 - 1;
        let mut rem = id - self.layer_offsets[depth as usize];
        let mut x = 0;
        loop {
            let len = depth - x + 1;
            if rem < len {
                break;
            }
            rem -= len;
            x += 1;
        }
        let y = rem;
        let z = depth - x - y;
        Some(Site::new(x as u32, y as u32, z as u32))
    }

    /// In-pyramid sites at Manhattan distance 1.
    pub fn neighbors_of(&self, site: Site) -> Result<Vec<Site>> {
        if !self.contains(site) {
            return Err(Error::Domain(format!(
                "site {site} outside a pyramid of {} layers",
                self.layers
            )));
        }
        Ok(PARENT_OFFSETS
            .iter()
            .chain(CHILD_OFFSETS.iter())
            .filter_map(|&d| site.offset(d))
            .filter(|s| self.contains(*s))
            .collect())
    }

    pub fn sites(&self) -> impl Iterator<Item = Site> + '_ {
        (0..self.layers).flat_map(|depth| {
            (0..=depth).flat_map(move |x| {
                (0..=depth - x).map(move |y| Site::new(x as u32, y as u32, (depth - x - y) as u32))
            })
        })
    }

    pub fn is_bottom(&self, site: Site) -> bool {
        site.depth() + 1 == self.layers
    }
}
