use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::lattice::Species;
use crate::{Error, Result};

/// State after one phase.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PhaseRecord {
    /// One-based phase number.
    pub phase: u64,
    pub species: Species,
    pub flips: u64,
    pub up_count: u64,
    pub magnetization: i64,
}

impl PhaseRecord {
    /// Number of completed B-then-A steps, counting a trailing B phase as a
    /// started step.
    pub fn step(&self) -> u64 {
        self.phase.div_ceil(2)
    }
}

const CSV_HEADER: [&str; 7] = ["phase", "step", "pulses", "species", "flips", "up_count", "magnetization"];

#[derive(Serialize, Deserialize)]
struct CsvRow {
    phase: u64,
    step: u64,
    pulses: u64,
    species: Species,
    flips: u64,
    up_count: u64,
    magnetization: i64,
}

/// Per-phase history of a run.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RunTrace {
    pub site_count: u64,
    /// Field pulses per phase (3 for the standard rule, 4 with the +1 rule).
    pub pulses_per_phase: u64,
    pub records: Vec<PhaseRecord>,
}

impl RunTrace {
    pub fn new(site_count: u64, pulses_per_phase: u64) -> Self {
        RunTrace {
            site_count,
            pulses_per_phase,
            records: Vec::new(),
        }
    }

    pub fn push(&mut self, phase: u64, species: Species, flips: u64, up_count: u64) {
        self.records.push(PhaseRecord {
            phase,
            species,
            flips,
            up_count,
            magnetization: 2 * up_count as i64 - self.site_count as i64,
        });
    }

    pub fn phases(&self) -> u64 {
        self.records.len() as u64
    }

    pub fn steps(&self) -> u64 {
        self.records.last().map_or(0, PhaseRecord::step)
    }

    pub fn pulses(&self) -> u64 {
        self.phases() * self.pulses_per_phase
    }

    pub fn final_up_count(&self) -> Option<u64> {
        self.records.last().map(|r| r.up_count)
    }

    pub fn total_flips(&self) -> u64 {
        self.records.iter().map(|r| r.flips).sum()
    }

    /// CSV with header `phase,step,pulses,species,flips,up_count,magnetization`;
    /// `pulses` is cumulative.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
        for r in &self.records {
            let row = CsvRow {
                phase: r.phase,
                step: r.step(),
                pulses: r.phase * self.pulses_per_phase,
                species: r.species,
                flips: r.flips,
                up_count: r.up_count,
                magnetization: r.magnetization,
            };
            w.serialize(row).map_err(|e| Error::Serialization(e.to_string()))?;
        }
        if self.records.is_empty() {
            w.write_record(CSV_HEADER).map_err(|e| Error::Serialization(e.to_string()))?;
        }
        w.flush().map_err(|e| Error::Serialization(e.to_string()))?;
        Ok(())
    }

    pub fn read_csv<R: Read>(input: R, site_count: u64, pulses_per_phase: u64) -> Result<Self> {
        let mut rd = csv::Reader::from_reader(input);
        let records = rd
            .deserialize()
            .map(|row: std::result::Result<CsvRow, _>| {
                row.map(|r| PhaseRecord {
                    phase: r.phase,
                    species: r.species,
                    flips: r.flips,
                    up_count: r.up_count,
                    magnetization: r.magnetization,
                })
            })
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| Error::Serialization(e.to_string()))?;
        Ok(RunTrace {
            site_count,
            pulses_per_phase,
            records,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trip() {
        let mut t = RunTrace::new(10, 3);
        t.push(1, Species::B, 3, 4);
        t.push(2, Species::A, 6, 10);
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("phase,step,pulses,species,flips,up_count,magnetization\n1,1,3,B,3,4,-2\n"));
        assert!(!text.contains('\r'));
        let back = RunTrace::read_csv(&buf[..], 10, 3).unwrap();
        assert_eq!(back, t);
        assert_eq!(t.steps(), 1);
        assert_eq!(t.pulses(), 6);
    }

    #[test]
    fn empty_trace_still_has_header() {
        let mut buf = Vec::new();
        RunTrace::new(1, 3).write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "phase,step,pulses,species,flips,up_count,magnetization\n");
    }
}
