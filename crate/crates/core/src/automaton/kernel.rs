use super::rules::{BoundaryMode, FieldSet, PulsePhase, ScanMode};
use super::state::{low_mask, Spin, SpinState};
use crate::lattice::{PyramidLattice, Site, Species, CHILD_OFFSETS};
use crate::{Error, Result};

/// Decides which targeted spins a pulse actually flips.
///
/// `select` is called once per 64-site window in scan order (layer-major,
/// row-major) with the targeted mask and the mask of all in-range sites of the
/// window. Implementations may carry random state across windows.
pub trait Gate {
    fn select(&mut self, targeted: u64, eligible: u64) -> u64;

    /// Gates that may flip untargeted sites need every layer visited.
    fn forces_full_scan(&self) -> bool {
        false
    }
}

/// Flips exactly the targeted spins.
#[derive(Debug, Clone, Copy, Default)]
pub struct PerfectGate;

impl Gate for PerfectGate {
    #[inline]
    fn select(&mut self, targeted: u64, _eligible: u64) -> u64 {
        targeted
    }
}

/// Counters for one phase.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct PhaseStats {
    pub targeted: u64,
    pub flips: u64,
    pub layers_scanned: u64,
}

#[derive(Debug, Clone, Copy, Default)]
struct LayerStats {
    targeted: u64,
    flips: u64,
}

/// Bit-sliced sum of six one-bit inputs, as three count planes.
#[inline(always)]
fn count6(b: &[u64; 6]) -> [u64; 3] {
    let (s1, c1) = full_add(b[0], b[1], b[2]);
    let (s2, c2) = full_add(b[3], b[4], b[5]);
    let bit0 = s1 ^ s2;
    let carry = s1 & s2;
    let (bit1, bit2) = full_add(c1, c2, carry);
    [bit0, bit1, bit2]
}

#[inline(always)]
fn full_add(a: u64, b: u64, c: u64) -> (u64, u64) {
    let t = a ^ b;
    (t ^ c, (a & b) | (t & c))
}

/// Lanes where the three count planes spell `k`, for `k` in `0..=6`.
#[inline(always)]
fn equality_masks(p: [u64; 3]) -> [u64; 7] {
    let mut eq = [0u64; 7];
    for (k, slot) in eq.iter_mut().enumerate() {
        let m0 = if k & 1 != 0 { p[0] } else { !p[0] };
        let m1 = if k & 2 != 0 { p[1] } else { !p[1] };
        let m2 = if k & 4 != 0 { p[2] } else { !p[2] };
        *slot = m0 & m1 & m2;
    }
    eq
}

/// The cellular automaton: a spin state on a pyramid plus the flip rule.
///
/// Fields of one species depend only on the other species, and every layer
/// holds a single species, so a phase updates alternate layers in place while
/// reading only their unmodified neighbors. That makes in-place, simultaneous
/// and any-order evaluation of a phase's field pulses identical.
///
/// In [`ScanMode::Restricted`] a layer is skipped when no neighboring layer
/// has flipped since its last evaluation under the same rule and it had no
/// targeted site then: its fields, and therefore its targets, are unchanged.
#[derive(Debug, Clone)]
pub struct Automaton<'a> {
    lattice: &'a PyramidLattice,
    state: SpinState,
    boundary: BoundaryMode,
    scan: ScanMode,
    up: u64,
    dirty: Vec<bool>,
    had_targets: Vec<bool>,
    last_rule: [Option<FieldSet>; 2],
}

impl<'a> Automaton<'a> {
    /// All-down state.
    pub fn new(lattice: &'a PyramidLattice, boundary: BoundaryMode, scan: ScanMode) -> Self {
        let layers = lattice.layers() as usize;
        Automaton {
            lattice,
            state: SpinState::all_down(lattice.site_count()),
            boundary,
            scan,
            up: 0,
            dirty: vec![true; layers],
            had_targets: vec![false; layers],
            last_rule: [None, None],
        }
    }

    pub fn with_state(
        lattice: &'a PyramidLattice,
        state: SpinState,
        boundary: BoundaryMode,
        scan: ScanMode,
    ) -> Result<Self> {
        if state.len() != lattice.site_count() {
            return Err(Error::Domain(format!(
                "state holds {} sites, lattice has {}",
                state.len(),
                lattice.site_count()
            )));
        }
        let mut a = Automaton::new(lattice, boundary, scan);
        a.up = state.count_up();
        a.state = state;
        Ok(a)
    }

    pub fn lattice(&self) -> &'a PyramidLattice {
        self.lattice
    }

    pub fn state(&self) -> &SpinState {
        &self.state
    }

    pub fn into_state(self) -> SpinState {
        self.state
    }

    pub fn boundary(&self) -> BoundaryMode {
        self.boundary
    }

    pub fn up_count(&self) -> u64 {
        self.up
    }

    pub fn magnetization(&self) -> i64 {
        2 * self.up as i64 - self.lattice.site_count() as i64
    }

    /// Mutable access; invalidates the scan bookkeeping.
    pub fn state_mut(&mut self) -> StateGuard<'_, 'a> {
        StateGuard { automaton: self }
    }

    fn invalidate(&mut self) {
        self.dirty.iter_mut().for_each(|d| *d = true);
        self.up = self.state.count_up();
    }

    pub fn spin(&self, site: Site) -> Result<Spin> {
        Ok(self.state.get(self.lattice.id_checked(site)?))
    }

    pub fn set_spin(&mut self, site: Site, spin: Spin) -> Result<()> {
        let id = self.lattice.id_checked(site)?;
        self.state_mut().set(id, spin);
        Ok(())
    }

    /// Sets the apex spin, leaving every other spin untouched.
    pub fn seed_apex(&mut self, value: Spin) {
        self.state_mut().set(0, value);
    }

    /// Up-minus-down count over the in-lattice neighbors of `site`, plus the
    /// virtual down children of bottom-layer sites in embedded mode.
    pub fn neighbor_field(&self, site: Site) -> Result<i32> {
        let mut field = 0;
        for n in self.lattice.neighbors_of(site)? {
            field += self.state.get(self.lattice.id(n).unwrap()).value();
        }
        if self.boundary == BoundaryMode::Embedded && self.lattice.is_bottom(site) {
            field -= CHILD_OFFSETS.len() as i32;
        }
        Ok(field)
    }

    /// NOT on every `species` spin whose neighbor field equals `field`.
    pub fn apply_pulse(&mut self, species: Species, field: i32) -> Result<u64> {
        let phase = PulsePhase::new(species, FieldSet::single(field)?);
        Ok(self.run_phase(&phase).flips)
    }

    pub fn run_phase(&mut self, phase: &PulsePhase) -> PhaseStats {
        self.run_phase_with(phase, &mut PerfectGate)
    }

    pub fn run_phase_with<G: Gate>(&mut self, phase: &PulsePhase, gate: &mut G) -> PhaseStats {
        let parity = phase.species.parity() as usize;
        let rule_changed = self.last_rule[parity] != Some(phase.fields);
        self.last_rule[parity] = Some(phase.fields);
        let scan_all = self.scan == ScanMode::Full || rule_changed || gate.forces_full_scan();
        let pairs = phase.fields.count_pairs();

        let layers = self.lattice.layers();
        let mut stats = PhaseStats::default();
        let mut depth = parity as u64;
        while depth < layers {
            let d = depth as usize;
            if scan_all || self.dirty[d] || self.had_targets[d] {
                let ls = self.eval_layer(depth, &pairs, gate);
                stats.targeted += ls.targeted;
                stats.flips += ls.flips;
                stats.layers_scanned += 1;
                self.dirty[d] = false;
                self.had_targets[d] = ls.targeted > 0;
                if ls.flips > 0 {
                    if d > 0 {
                        self.dirty[d - 1] = true;
                    }
                    if d + 1 < layers as usize {
                        self.dirty[d + 1] = true;
                    }
                }
            }
            depth += 2;
        }
        stats
    }

    fn eval_layer<G: Gate>(&mut self, depth: u64, pairs: &[(u8, u8)], gate: &mut G) -> LayerStats {
        let lat = self.lattice;
        let has_parents = depth > 0;
        let has_children = depth + 1 < lat.layers();
        let virtual_children = !has_children && self.boundary == BoundaryMode::Embedded;
        let mut stats = LayerStats::default();

        for x in 0..=depth {
            let row = lat.row_start(depth, x);
            let row_len = depth - x + 1;
            let child_row = if has_children { lat.row_start(depth + 1, x) } else { 0 };
            let child_row_next = if has_children { lat.row_start(depth + 1, x + 1) } else { 0 };
            // Row x of the parent layer exists only for x < depth.
            let parent_row = (has_parents && x < depth).then(|| lat.row_start(depth - 1, x));
            let parent_prev_row = (has_parents && x >= 1).then(|| lat.row_start(depth - 1, x - 1));

            let mut y0 = 0;
            while y0 < row_len {
                let w = (row_len - y0).min(64);
                let full = low_mask(w);
                let mut up = [0u64; 6];
                let mut present = [0u64; 6];

                if has_children {
                    up[0] = self.state.read_bits(child_row + y0, w); // (x, y, z+1)
                    up[1] = self.state.read_bits(child_row + y0 + 1, w); // (x, y+1, z)
                    up[2] = self.state.read_bits(child_row_next + y0, w); // (x+1, y, z)
                    present[..3].fill(full);
                } else if virtual_children {
                    present[..3].fill(full);
                }
                if let Some(pr) = parent_row {
                    // (x, y, z−1): absent for the last site of the row (z = 0).
                    let valid = w.min(depth - x - y0);
                    up[3] = self.state.read_bits(pr + y0, valid);
                    present[3] = low_mask(valid);
                    // (x, y−1, z): absent for y = 0.
                    if y0 == 0 {
                        up[4] = self.state.read_bits(pr, w - 1) << 1;
                        present[4] = full & !1;
                    } else {
                        up[4] = self.state.read_bits(pr + y0 - 1, w);
                        present[4] = full;
                    }
                }
                if let Some(pp) = parent_prev_row {
                    up[5] = self.state.read_bits(pp + y0, w); // (x−1, y, z)
                    present[5] = full;
                }

                let mut down = [0u64; 6];
                for i in 0..6 {
                    down[i] = present[i] & !up[i];
                }
                let eq_up = equality_masks(count6(&up));
                let eq_down = equality_masks(count6(&down));
                let mut targeted = 0u64;
                for &(u, d) in pairs {
                    targeted |= eq_up[u as usize] & eq_down[d as usize];
                }
                targeted &= full;
                stats.targeted += targeted.count_ones() as u64;

                let flips = gate.select(targeted, full) & full;
                if flips != 0 {
                    let old = self.state.read_bits(row + y0, w);
                    self.state.xor_bits(row + y0, w, flips);
                    let rising = (flips & !old).count_ones() as u64;
                    let falling = (flips & old).count_ones() as u64;
                    self.up = self.up + rising - falling;
                    stats.flips += flips.count_ones() as u64;
                }
                y0 += w;
            }
        }
        stats
    }
}

/// Exclusive handle on the raw state; scan bookkeeping is refreshed on drop.
pub struct StateGuard<'g, 'a> {
    automaton: &'g mut Automaton<'a>,
}

impl std::ops::Deref for StateGuard<'_, '_> {
    type Target = SpinState;
    fn deref(&self) -> &SpinState {
        &self.automaton.state
    }
}

impl std::ops::DerefMut for StateGuard<'_, '_> {
    fn deref_mut(&mut self) -> &mut SpinState {
        &mut self.automaton.state
    }
}

impl Drop for StateGuard<'_, '_> {
    fn drop(&mut self) {
        self.automaton.invalidate();
    }
}
