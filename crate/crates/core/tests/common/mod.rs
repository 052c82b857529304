//! Brute-force references shared by the integration tests.
#![allow(dead_code)]

use std::collections::HashMap;

/// Straightforward automaton over a coordinate map: every pulse recomputes
/// every field of the pulsed species from scratch.
pub struct NaiveAutomaton {
    pub layers: i64,
    pub spins: HashMap<[i64; 3], i8>,
    /// Bottom-layer sites get three virtual down children.
    pub embedded: bool,
}

const OFFSETS: [[i64; 3]; 6] = [
    [1, 0, 0],
    [-1, 0, 0],
    [0, 1, 0],
    [0, -1, 0],
    [0, 0, 1],
    [0, 0, -1],
];

impl NaiveAutomaton {
    pub fn new(layers: i64, embedded: bool) -> Self {
        let mut spins = HashMap::new();
        for c in naive_sites(layers) {
            spins.insert(c, -1);
        }
        NaiveAutomaton {
            layers,
            spins,
            embedded,
        }
    }

    /// `1` for species B (odd depth), `0` for A.
    pub fn species(c: [i64; 3]) -> i64 {
        (c[0] + c[1] + c[2]) % 2
    }

    pub fn field(&self, c: [i64; 3]) -> i32 {
        let mut f = 0;
        for o in OFFSETS {
            let n = [c[0] + o[0], c[1] + o[1], c[2] + o[2]];
            if let Some(v) = self.spins.get(&n) {
                f += *v as i32;
            }
        }
        if self.embedded && c[0] + c[1] + c[2] == self.layers - 1 {
            f -= 3;
        }
        f
    }

    /// One NOT pulse on `species` sites with field `field`; returns flips.
    pub fn pulse(&mut self, species: i64, field: i32) -> u64 {
        let targets: Vec<[i64; 3]> = self
            .spins
            .keys()
            .copied()
            .filter(|c| Self::species(*c) == species && self.field(*c) == field)
            .collect();
        for t in &targets {
            let v = self.spins.get_mut(t).unwrap();
            *v = -*v;
        }
        targets.len() as u64
    }

    /// Phase `k` (one-based): species B on odd `k`, each field pulsed in turn.
    pub fn phase(&mut self, k: u64, fields: &[i32]) -> u64 {
        let species = if k % 2 == 1 { 1 } else { 0 };
        fields.iter().map(|f| self.pulse(species, *f)).sum()
    }

    pub fn up_count(&self) -> u64 {
        self.spins.values().filter(|v| **v == 1).count() as u64
    }
}

/// All `(x, y, z)` with non-negative entries summing to at most `layers − 1`.
pub fn naive_sites(layers: i64) -> Vec<[i64; 3]> {
    let mut out = Vec::new();
    for x in 0..layers {
        for y in 0..layers {
            for z in 0..layers {
                if x + y + z < layers {
                    out.push([x, y, z]);
                }
            }
        }
    }
    out
}

/// In-pyramid neighbors by scanning all sites.
pub fn naive_neighbors(layers: i64, c: [i64; 3]) -> Vec<[i64; 3]> {
    naive_sites(layers)
        .into_iter()
        .filter(|n| (0..3).map(|i| (n[i] - c[i]).abs()).sum::<i64>() == 1)
        .collect()
}
