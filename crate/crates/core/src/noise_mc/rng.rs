use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::automaton::Gate;

/// Independent random streams of one trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Stream {
    InitialPolarization = 1,
    Diffusion = 2,
    GateOmission = 3,
    SpuriousFlip = 4,
}

#[inline]
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Mixes `(seed, trial, stream, index)` into one 64-bit key.
pub fn stream_key(seed: u64, trial: u64, stream: Stream, index: u64) -> u64 {
    let mut h = splitmix64(seed);
    h = splitmix64(h ^ trial);
    h = splitmix64(h ^ stream as u64);
    splitmix64(h ^ index)
}

/// ChaCha8 generator for one stream; `index` is the phase or sweep number.
pub fn stream_rng(seed: u64, trial: u64, stream: Stream, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(stream_key(seed, trial, stream, index))
}

#[derive(Debug, Clone, Copy)]
enum Mode {
    Never,
    Always,
    Geometric { ln_q: f64 },
}

/// Selects each offered candidate independently with probability `p`.
///
/// Candidates arrive as 64-bit masks in a fixed order; instead of one draw per
/// candidate the sampler draws the geometric gap to the next selected
/// candidate, so work scales with the number of selections.
#[derive(Debug, Clone)]
pub struct BernoulliSkipper<R: Rng> {
    mode: Mode,
    skip: u64,
    rng: R,
}

impl<R: Rng> BernoulliSkipper<R> {
    pub fn new(p: f64, rng: R) -> Self {
        let mode = if !(p > 0.0) {
            Mode::Never
        } else if p >= 1.0 {
            Mode::Always
        } else {
            Mode::Geometric { ln_q: (-p).ln_1p() }
        };
        let mut s = BernoulliSkipper { mode, skip: 0, rng };
        s.skip = s.draw_gap();
        s
    }

    fn draw_gap(&mut self) -> u64 {
        match self.mode {
            Mode::Geometric { ln_q } => {
                // u in (0, 1]
                let u = 1.0 - self.rng.random::<f64>();
                let g = (u.ln() / ln_q).floor();
                if g >= (u64::MAX / 2) as f64 {
                    u64::MAX / 2
                } else {
                    g as u64
                }
            }
            _ => 0,
        }
    }

    /// Subset of `candidates` that is selected, scanning from bit 0 upward.
    #[inline]
    pub fn select(&mut self, candidates: u64) -> u64 {
        match self.mode {
            Mode::Never => 0,
            Mode::Always => candidates,
            Mode::Geometric { .. } => {
                let mut rem = candidates;
                let mut out = 0;
                loop {
                    let n = rem.count_ones() as u64;
                    if self.skip >= n {
                        self.skip -= n;
                        return out;
                    }
                    for _ in 0..self.skip {
                        rem &= rem - 1;
                    }
                    let bit = rem & rem.wrapping_neg();
                    out |= bit;
                    rem ^= bit;
                    self.skip = self.draw_gap();
                }
            }
        }
    }
}

/// Pulse with omission errors (a targeted spin stays put with probability
/// `eps1`) and, optionally, spurious flips of untargeted spins of the pulsed
/// species.
pub struct NoisyGate<R: Rng> {
    omit: BernoulliSkipper<R>,
    spurious: Option<BernoulliSkipper<R>>,
}

impl NoisyGate<ChaCha8Rng> {
    /// Gate for phase `phase` of trial `trial`.
    pub fn for_phase(seed: u64, trial: u64, phase: u64, eps1: f64, spurious: f64) -> Self {
        NoisyGate {
            omit: BernoulliSkipper::new(eps1, stream_rng(seed, trial, Stream::GateOmission, phase)),
            spurious: (spurious > 0.0).then(|| {
                BernoulliSkipper::new(spurious, stream_rng(seed, trial, Stream::SpuriousFlip, phase))
            }),
        }
    }
}

impl<R: Rng> NoisyGate<R> {
    pub fn new(eps1: f64, rng: R) -> Self {
        NoisyGate {
            omit: BernoulliSkipper::new(eps1, rng),
            spurious: None,
        }
    }
}

impl<R: Rng> Gate for NoisyGate<R> {
    #[inline]
    fn select(&mut self, targeted: u64, eligible: u64) -> u64 {
        let mut flips = targeted & !self.omit.select(targeted);
        if let Some(sp) = self.spurious.as_mut() {
            flips |= sp.select(eligible & !targeted);
        }
        flips
    }

    fn forces_full_scan(&self) -> bool {
        self.spurious.is_some()
    }
}
