use serde::{Deserialize, Serialize};

use crate::automaton::{run_ideal, run_phases, Automaton, PerfectGate, RunOptions, RunTrace, Spin, SpinState};
use crate::lattice::{PyramidLattice, Site};
use crate::{Error, Result};

/// Position class of a site by how many bounding planes it touches (the three
/// coordinate faces plus the bottom cut).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SiteClass {
    Corner,
    Edge,
    Face,
    Interior,
}

impl SiteClass {
    fn from_missing_planes(n: u32) -> Self {
        match n {
            0 => SiteClass::Interior,
            1 => SiteClass::Face,
            2 => SiteClass::Edge,
            _ => SiteClass::Corner,
        }
    }
}

pub fn classify_site(lattice: &PyramidLattice, site: Site) -> Result<SiteClass> {
    if !lattice.contains(site) {
        return Err(Error::Domain(format!("site {site} outside the pyramid")));
    }
    let zeros = [site.x, site.y, site.z].iter().filter(|c| **c == 0).count() as u32;
    let bottom = u32::from(lattice.is_bottom(site));
    Ok(SiteClass::from_missing_planes(zeros + bottom))
}

/// Site counts per class.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassCounts {
    pub corner: u64,
    pub edge: u64,
    pub face: u64,
    pub interior: u64,
}

impl ClassCounts {
    fn add(&mut self, class: SiteClass, n: u64) {
        match class {
            SiteClass::Corner => self.corner += n,
            SiteClass::Edge => self.edge += n,
            SiteClass::Face => self.face += n,
            SiteClass::Interior => self.interior += n,
        }
    }

    pub fn total(&self) -> u64 {
        self.corner + self.edge + self.face + self.interior
    }
}

/// Classes of the set bits of `mask` (a state-shaped bitmap), row by row.
pub fn class_histogram(lattice: &PyramidLattice, mask: &SpinState) -> ClassCounts {
    let mut counts = ClassCounts::default();
    for depth in 0..lattice.layers() {
        let bottom = u32::from(depth + 1 == lattice.layers());
        for x in 0..=depth {
            let row = lattice.row_start(depth, x);
            let len = depth - x + 1;
            let x_zero = u32::from(x == 0);
            let total = mask.count_up_range(row..row + len);
            if total == 0 {
                continue;
            }
            // Only the first (y = 0) and last (z = 0) sites of a row touch
            // those faces; a single-site row touches both.
            let first = mask.get(row) == Spin::Up;
            let last = mask.get(row + len - 1) == Spin::Up;
            if len == 1 {
                counts.add(SiteClass::from_missing_planes(x_zero + 2 + bottom), total);
                continue;
            }
            let mut inner = total;
            if first {
                counts.add(SiteClass::from_missing_planes(x_zero + 1 + bottom), 1);
                inner -= 1;
            }
            if last {
                counts.add(SiteClass::from_missing_planes(x_zero + 1 + bottom), 1);
                inner -= 1;
            }
            counts.add(SiteClass::from_missing_planes(x_zero + bottom), inner);
        }
    }
    counts
}

/// Outcome of a noiseless run with one planted down-error.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlantedError {
    pub site: Site,
    pub ideal_up: u64,
    pub perturbed_up: u64,
}

impl PlantedError {
    pub fn deficit(&self) -> i64 {
        self.ideal_up as i64 - self.perturbed_up as i64
    }
}

/// Runs `phases` noiseless phases from a `+1` apex, forcing `site` back down
/// immediately after the phase that raised its layer, and compares the final
/// up count with the unperturbed run.
pub fn planted_error(
    lattice: &PyramidLattice,
    phases: u64,
    site: Site,
    options: &RunOptions,
) -> Result<PlantedError> {
    let layer = site.layer();
    if !lattice.contains(site) {
        return Err(Error::Domain(format!("site {site} outside the pyramid")));
    }
    if layer > phases {
        return Err(Error::Domain(format!(
            "site {site} in layer {layer} is not raised within {phases} phases"
        )));
    }
    let ideal = run_ideal(lattice, Spin::Up, phases, options);

    let mut a = Automaton::new(lattice, options.boundary, options.scan);
    a.seed_apex(Spin::Up);
    let mut trace = RunTrace::new(lattice.site_count(), options.fields.len() as u64);
    run_phases(&mut a, options.fields, 1, layer - 1, &mut trace, |_| PerfectGate);
    a.set_spin(site, Spin::Down)?;
    run_phases(&mut a, options.fields, layer, phases - (layer - 1), &mut trace, |_| PerfectGate);

    Ok(PlantedError {
        site,
        ideal_up: ideal.state.count_up(),
        perturbed_up: a.up_count(),
    })
}
