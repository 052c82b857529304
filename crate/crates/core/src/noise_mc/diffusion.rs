use rand::Rng;

use super::rng::BernoulliSkipper;
use crate::automaton::{Spin, SpinState};
use crate::lattice::{LatticeGeometry, PyramidLattice};
use crate::{Error, Result};

/// Flips each spin independently with probability `eps0`.
pub fn randomize_initial<R: Rng>(state: &mut SpinState, eps0: f64, rng: R) -> Result<u64> {
    check_probability("eps0", eps0)?;
    let mut sampler = BernoulliSkipper::new(eps0, rng);
    let mut flipped = 0;
    let mut start = 0;
    while start < state.len() {
        let w = (state.len() - start).min(64);
        let mask = if w == 64 { u64::MAX } else { (1u64 << w) - 1 };
        let flips = sampler.select(mask);
        state.xor_bits(start, w, flips);
        flipped += flips.count_ones() as u64;
        start += w;
    }
    Ok(flipped)
}

pub(crate) fn check_probability(name: &str, p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::Domain(format!("{name} must lie in [0, 1], got {p}")))
    }
}

/// Classical surrogate of homonuclear spin diffusion: anti-aligned
/// same-species pairs exchange their spins.
#[derive(Debug, Clone)]
pub struct Diffuser {
    /// One offset per unordered pair direction.
    half_shell: Vec<[i64; 3]>,
    exchange_probability: f64,
}

impl Diffuser {
    /// Pairs within the shortest same-species distance of `geometry`.
    pub fn new(geometry: &LatticeGeometry, exchange_probability: f64) -> Result<Self> {
        Self::with_shell(geometry.same_species_offsets(1e-9), exchange_probability)
    }

    pub fn with_shell(shell: Vec<[i64; 3]>, exchange_probability: f64) -> Result<Self> {
        check_probability("exchange_probability", exchange_probability)?;
        if shell.iter().any(|o| o.iter().sum::<i64>().rem_euclid(2) != 0) {
            return Err(Error::Domain("diffusion shell must join same-species sites".into()));
        }
        let mut half_shell: Vec<[i64; 3]> = shell
            .into_iter()
            .filter(|o| {
                let first = o.iter().copied().find(|c| *c != 0).unwrap_or(0);
                first > 0
            })
            .collect();
        half_shell.sort();
        half_shell.dedup();
        Ok(Diffuser {
            half_shell,
            exchange_probability,
        })
    }

    pub fn half_shell(&self) -> &[[i64; 3]] {
        &self.half_shell
    }

    /// One sweep: every in-lattice pair is visited once, in a random order,
    /// and anti-aligned pairs swap with the exchange probability. Returns the
    /// number of swaps. Magnetization is conserved exactly.
    pub fn sweep<R: Rng>(&self, lattice: &PyramidLattice, state: &mut SpinState, rng: &mut R) -> u64 {
        let m = self.half_shell.len() as u64;
        let domain = lattice.site_count() * m;
        if domain == 0 {
            return 0;
        }
        let perm = FeistelPermutation::new(domain, rng.random());
        let mut swaps = 0;
        for i in 0..domain {
            let pair = perm.apply(i);
            let id = pair / m;
            let site = lattice.site(id).expect("id within lattice");
            let Some(partner) = site.offset(self.half_shell[(pair % m) as usize]) else {
                continue;
            };
            let Some(pid) = lattice.id(partner) else {
                continue;
            };
            if state.get(id) != state.get(pid) && rng.random_bool(self.exchange_probability) {
                state.flip(id);
                state.flip(pid);
                swaps += 1;
            }
        }
        swaps
    }
}

/// Runs `steps` sweeps, drawing each sweep's randomness from `rng_for(sweep)`.
pub fn diffuse<R: Rng>(
    diffuser: &Diffuser,
    lattice: &PyramidLattice,
    state: &mut SpinState,
    steps: u64,
    mut rng_for: impl FnMut(u64) -> R,
) -> u64 {
    let mut swaps = 0;
    for sweep in 0..steps {
        let mut rng = rng_for(sweep);
        swaps += diffuser.sweep(lattice, state, &mut rng);
    }
    swaps
}

/// Keyed bijection of `0..n`, built from a balanced Feistel network on the
/// enclosing power-of-four domain with cycle walking.
#[derive(Debug, Clone, Copy)]
struct FeistelPermutation {
    n: u64,
    half_bits: u32,
    key: u64,
}

impl FeistelPermutation {
    const ROUNDS: u64 = 4;

    fn new(n: u64, key: u64) -> Self {
        let bits = 64 - (n.max(2) - 1).leading_zeros();
        FeistelPermutation {
            n,
            half_bits: bits.div_ceil(2).max(1),
            key,
        }
    }

    fn round(&self, r: u64, v: u64) -> u64 {
        let mut z = v ^ self.key.rotate_left(17 * r as u32) ^ r.wrapping_mul(0x9E37_79B9_7F4A_7C15);
        z = (z ^ (z >> 33)).wrapping_mul(0xFF51_AFD7_ED55_8CCD);
        z = (z ^ (z >> 33)).wrapping_mul(0xC4CE_B9FE_1A85_EC53);
        z ^ (z >> 33)
    }

    fn once(&self, v: u64) -> u64 {
        let mask = (1u64 << self.half_bits) - 1;
        let mut left = v >> self.half_bits;
        let mut right = v & mask;
        for r in 0..Self::ROUNDS {
            let next = left ^ (self.round(r, right) & mask);
            left = right;
            right = next;
        }
        (left << self.half_bits) | right
    }

    fn apply(&self, mut v: u64) -> u64 {
        loop {
            v = self.once(v);
            if v < self.n {
                return v;
            }
        }
    }
}

/// Places a single up spin at `id` in an otherwise down state.
pub fn single_excitation(lattice: &PyramidLattice, id: u64) -> SpinState {
    let mut s = SpinState::all_down(lattice.site_count());
    s.set(id, Spin::Up);
    s
}
