use serde::{Deserialize, Serialize};

use crate::lattice::Species;
use crate::{Error, Result};

/// A set of neighbor-field values in `−6..=6`, stored as a 13-bit mask.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct FieldSet(u16);

impl FieldSet {
    pub const MIN_FIELD: i32 = -6;
    pub const MAX_FIELD: i32 = 6;

    pub const EMPTY: FieldSet = FieldSet(0);

    /// `{−2, −1, 0}`: corner, edge and face sites of the advancing front.
    pub fn standard() -> Self {
        FieldSet::from_fields(&[-2, -1, 0]).unwrap()
    }

    /// The standard set extended with `+1`.
    pub fn with_plus_one() -> Self {
        FieldSet::from_fields(&[-2, -1, 0, 1]).unwrap()
    }

    pub fn single(field: i32) -> Result<Self> {
        FieldSet::from_fields(&[field])
    }

    pub fn from_fields(fields: &[i32]) -> Result<Self> {
        let mut bits = 0u16;
        for &f in fields {
            if !(Self::MIN_FIELD..=Self::MAX_FIELD).contains(&f) {
                return Err(Error::Domain(format!("neighbor field {f} outside −6..=6")));
            }
            bits |= 1 << (f - Self::MIN_FIELD);
        }
        Ok(FieldSet(bits))
    }

    pub fn contains(&self, field: i32) -> bool {
        (Self::MIN_FIELD..=Self::MAX_FIELD).contains(&field)
            && self.0 & (1 << (field - Self::MIN_FIELD)) != 0
    }

    pub fn fields(&self) -> impl Iterator<Item = i32> + '_ {
        (Self::MIN_FIELD..=Self::MAX_FIELD).filter(|f| self.contains(*f))
    }

    pub fn len(&self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(&self) -> bool {
        self.0 == 0
    }

    pub fn bits(&self) -> u16 {
        self.0
    }

    /// `(up, down)` neighbor-count pairs whose difference lies in the set.
    pub(crate) fn count_pairs(&self) -> Vec<(u8, u8)> {
        let mut pairs = Vec::new();
        for up in 0..=6i32 {
            for down in 0..=6i32 {
                if up + down <= 6 && self.contains(up - down) {
                    pairs.push((up as u8, down as u8));
                }
            }
        }
        pairs
    }

    /// Label used in CSV output, e.g. `-2|-1|0`.
    pub fn label(&self) -> String {
        self.fields().map(|f| f.to_string()).collect::<Vec<_>>().join("|")
    }
}

impl std::fmt::Debug for FieldSet {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_set().entries(self.fields()).finish()
    }
}

impl Default for FieldSet {
    fn default() -> Self {
        FieldSet::standard()
    }
}

impl Serialize for FieldSet {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_seq(self.fields())
    }
}

impl<'de> Deserialize<'de> for FieldSet {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let fields = Vec::<i32>::deserialize(d)?;
        FieldSet::from_fields(&fields).map_err(serde::de::Error::custom)
    }
}

/// One species' set of field-conditioned NOT pulses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PulsePhase {
    pub species: Species,
    pub fields: FieldSet,
}

impl PulsePhase {
    pub fn new(species: Species, fields: FieldSet) -> Self {
        PulsePhase { species, fields }
    }

    /// Species of the `k`-th phase (one-based): B first, then alternating.
    pub fn species_for(phase_number: u64) -> Species {
        if phase_number % 2 == 1 {
            Species::B
        } else {
            Species::A
        }
    }
}

/// Treatment of the artificial cut below layer `L`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundaryMode {
    /// Bottom-layer sites see three virtual, permanently down children: the
    /// rest of the crystal below the cut.
    #[default]
    Embedded,
    /// The bottom layer is a free surface.
    Open,
}

impl BoundaryMode {
    pub fn parse(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "embedded" => Ok(BoundaryMode::Embedded),
            "open" => Ok(BoundaryMode::Open),
            _ => Err(Error::Domain(format!("unknown boundary mode `{s}`"))),
        }
    }
}

/// Which layers a phase evaluates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScanMode {
    /// Only layers whose fields may have changed, or that still had targeted
    /// sites when last evaluated.
    #[default]
    Restricted,
    /// Every layer of the species, every phase.
    Full,
}
