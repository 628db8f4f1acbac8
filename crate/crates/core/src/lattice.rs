//! Dense precomputed `p(y, n, i)` tables over a rectangular grid, with a
//! self-describing binary format and point queries.
//!
//! Values are always stored as 64-bit floats; the file format pins that
//! width, so the store is not generic over the scalar type.
//!
//! ## Binary format
//!
//! A fixed 32-byte header, the row-major payload, then a checksum:
//!
//! | offset | size | field                          |
//! |--------|------|--------------------------------|
//! | 0      | 4    | magic `QSPL`                   |
//! | 4      | 2    | format version, u16 LE         |
//! | 6      | 2    | y grid count, u16 LE           |
//! | 8      | 4    | max voter count, u32 LE        |
//! | 12     | 4    | bought-vote count, u32 LE      |
//! | 16     | 8    | y grid start, f64 LE           |
//! | 24     | 8    | y grid step, f64 LE            |
//! | 32     | 8N   | values, f64 LE, (y, n, i) rows |
//! | 32+8N  | 8    | FNV-1a 64 checksum of payload  |

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Read, Write};
use std::path::Path;

use rayon::prelude::*;
use thiserror::Error;

use crate::referendum::outcome_probability_bought;

/// Cell-count guard applied by [`build_lattice`]; the full-scale grid
/// must be requested explicitly via [`build_lattice_with_cap`].
pub const DEFAULT_CELL_CAP: u64 = 10_000_000;

/// Current binary format version.
pub const FORMAT_VERSION: u16 = 1;

const MAGIC: [u8; 4] = *b"QSPL";

/// Grid-membership tolerance for `y` queries.
const Y_MATCH_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum LatticeError {
    #[error("invalid lattice spec: {reason}")]
    InvalidSpec { reason: String },
    #[error("{cells} cells exceed the cap of {cap}; raise the cap explicitly to build this")]
    TooLarge { cells: u64, cap: u64 },
    #[error(
        "(y={y}, n={n}, i={i}) is not on the lattice; nearest cell is \
         (y={nearest_y}, n={nearest_n}, i={nearest_i})"
    )]
    OffLattice {
        y: f64,
        n: u32,
        i: u32,
        nearest_y: f64,
        nearest_n: u32,
        nearest_i: u32,
    },
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("not a lattice file (bad magic)")]
    BadMagic,
    #[error("unsupported format version {found}, expected {expected}")]
    UnsupportedVersion { found: u16, expected: u16 },
    #[error("file truncated: expected {expected} payload bytes")]
    Truncated { expected: u64 },
    #[error("checksum mismatch: stored {stored:#018x}, computed {computed:#018x}")]
    ChecksumMismatch { stored: u64, computed: u64 },
    #[error("stored value {value} at cell {index} is not a probability")]
    CorruptValue { index: u64, value: f64 },
    #[error("trailing data after the checksum")]
    TrailingData,
    #[error("y grid count {count} does not fit the file format")]
    GridTooWideForFormat { count: u32 },
}

/// Rectangular grid definition: `y` values, voter counts `1..=n_max` and
/// bought votes `0..=i_cap`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LatticeSpec {
    pub y_start: f64,
    pub y_step: f64,
    pub y_count: u32,
    pub n_max: u32,
    pub i_cap: u32,
}

impl Default for LatticeSpec {
    /// The full-scale grid shape: y in steps of 0.01 over [0, 1], n to 1000,
    /// i to 501.
    fn default() -> Self {
        Self::full_scale()
    }
}

impl LatticeSpec {
    /// 101 x 1000 x 502 cells, the full grid the defaults describe.
    pub fn full_scale() -> Self {
        Self {
            y_start: 0.0,
            y_step: 0.01,
            y_count: 101,
            n_max: 1000,
            i_cap: 501,
        }
    }

    pub fn validate(&self) -> Result<(), LatticeError> {
        let fail = |reason: &str| {
            Err(LatticeError::InvalidSpec {
                reason: reason.to_string(),
            })
        };
        if self.y_count < 1 {
            return fail("y grid needs at least one value");
        }
        if self.n_max < 1 {
            return fail("voter range needs at least n = 1");
        }
        if !(self.y_start >= 0.0 && self.y_start <= 1.0) {
            return fail("y grid start must lie in [0, 1]");
        }
        if self.y_count > 1 && !(self.y_step > 0.0) {
            return fail("y grid step must be positive");
        }
        if self.y_step < 0.0 || !self.y_step.is_finite() {
            return fail("y grid step must be a finite non-negative number");
        }
        let top = self.y_start + self.y_step * f64::from(self.y_count - 1);
        // Allow for accumulated rounding in start + step * count; stored
        // values are clamped back into [0, 1].
        if top > 1.0 + 1e-9 {
            return fail("y grid extends beyond 1");
        }
        if self.i_cap == u32::MAX {
            return fail("bought-vote cap too large");
        }
        Ok(())
    }

    /// Number of bought-vote samples per `(y, n)` row.
    pub fn i_count(&self) -> u32 {
        self.i_cap + 1
    }

    /// Saturates at `u64::MAX` for absurd grids; the cap check still fires.
    pub fn cell_count(&self) -> u64 {
        let cells =
            u128::from(self.y_count) * u128::from(self.n_max) * (u128::from(self.i_cap) + 1);
        u64::try_from(cells).unwrap_or(u64::MAX)
    }

    /// The `index`-th grid probability, clamped into `[0, 1]`.
    pub fn y_value(&self, index: u32) -> f64 {
        (self.y_start + self.y_step * f64::from(index)).clamp(0.0, 1.0)
    }

    fn y_index(&self, y: f64) -> Option<u32> {
        let raw = if self.y_step > 0.0 {
            ((y - self.y_start) / self.y_step).round()
        } else {
            0.0
        };
        if !(0.0..=f64::from(self.y_count - 1)).contains(&raw) {
            return None;
        }
        let index = raw as u32;
        ((self.y_value(index) - y).abs() <= Y_MATCH_TOLERANCE).then_some(index)
    }

    fn nearest_y(&self, y: f64) -> f64 {
        let raw = if self.y_step > 0.0 {
            ((y - self.y_start) / self.y_step).round()
        } else {
            0.0
        };
        let index = raw.clamp(0.0, f64::from(self.y_count - 1)) as u32;
        self.y_value(index)
    }
}

/// Dense table of `p(y, n, i)` over a [`LatticeSpec`] grid.
#[derive(Clone, Debug, PartialEq)]
pub struct LatticeTable {
    spec: LatticeSpec,
    values: Vec<f64>,
}

/// Build the table with the default cell cap.
pub fn build_lattice(spec: &LatticeSpec) -> Result<LatticeTable, LatticeError> {
    build_lattice_with_cap(spec, DEFAULT_CELL_CAP)
}

/// Build the table with an explicit cell cap; cells are independent pure
/// evaluations, so rows are filled in parallel and the result is
/// deterministic.
pub fn build_lattice_with_cap(
    spec: &LatticeSpec,
    cell_cap: u64,
) -> Result<LatticeTable, LatticeError> {
    spec.validate()?;
    let cells = spec.cell_count();
    if cells > cell_cap {
        return Err(LatticeError::TooLarge {
            cells,
            cap: cell_cap,
        });
    }
    let i_count = spec.i_count() as usize;
    let mut values = vec![0.0f64; cells as usize];
    let spec_copy = *spec;
    values
        .par_chunks_mut(i_count)
        .enumerate()
        .for_each(|(row, chunk)| {
            let y = spec_copy.y_value((row / spec_copy.n_max as usize) as u32);
            let n = (row % spec_copy.n_max as usize) as u32 + 1;
            for (i, cell) in chunk.iter_mut().enumerate() {
                *cell = outcome_probability_bought(y, n, i as u32)
                    .expect("grid values validated up front");
            }
        });
    Ok(LatticeTable {
        spec: *spec,
        values,
    })
}

impl LatticeTable {
    pub fn spec(&self) -> &LatticeSpec {
        &self.spec
    }

    /// Row-major values in `(y, n, i)` order.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Stored probability at an exact grid point; off-lattice queries are
    /// rejected, never interpolated.
    pub fn query(&self, y: f64, n: u32, i: u32) -> Result<f64, LatticeError> {
        let spec = &self.spec;
        let y_index = spec.y_index(y);
        if y_index.is_none() || n < 1 || n > spec.n_max || i > spec.i_cap {
            return Err(LatticeError::OffLattice {
                y,
                n,
                i,
                nearest_y: spec.nearest_y(y),
                nearest_n: n.clamp(1, spec.n_max),
                nearest_i: i.min(spec.i_cap),
            });
        }
        let row = y_index.expect("checked above") as usize * spec.n_max as usize
            + (n as usize - 1);
        Ok(self.values[row * spec.i_count() as usize + i as usize])
    }

    /// Serialize to the binary lattice format.
    pub fn write_to<W: Write>(&self, out: &mut W) -> Result<(), LatticeError> {
        let spec = &self.spec;
        if spec.y_count > u32::from(u16::MAX) {
            return Err(LatticeError::GridTooWideForFormat {
                count: spec.y_count,
            });
        }
        out.write_all(&MAGIC)?;
        out.write_all(&FORMAT_VERSION.to_le_bytes())?;
        out.write_all(&(spec.y_count as u16).to_le_bytes())?;
        out.write_all(&spec.n_max.to_le_bytes())?;
        out.write_all(&spec.i_count().to_le_bytes())?;
        out.write_all(&spec.y_start.to_le_bytes())?;
        out.write_all(&spec.y_step.to_le_bytes())?;
        let mut checksum = Fnv1a64::new();
        for value in &self.values {
            let bytes = value.to_le_bytes();
            checksum.update(&bytes);
            out.write_all(&bytes)?;
        }
        out.write_all(&checksum.finish().to_le_bytes())?;
        Ok(())
    }

    /// Deserialize from the binary lattice format, verifying the checksum.
    pub fn read_from<R: Read>(input: &mut R) -> Result<Self, LatticeError> {
        let mut header = [0u8; 32];
        input
            .read_exact(&mut header)
            .map_err(|_| LatticeError::Truncated { expected: 32 })?;
        if header[0..4] != MAGIC {
            return Err(LatticeError::BadMagic);
        }
        let version = u16::from_le_bytes([header[4], header[5]]);
        if version != FORMAT_VERSION {
            return Err(LatticeError::UnsupportedVersion {
                found: version,
                expected: FORMAT_VERSION,
            });
        }
        let y_count = u32::from(u16::from_le_bytes([header[6], header[7]]));
        let n_max = u32::from_le_bytes(header[8..12].try_into().expect("4 bytes"));
        let i_count = u32::from_le_bytes(header[12..16].try_into().expect("4 bytes"));
        let y_start = f64::from_le_bytes(header[16..24].try_into().expect("8 bytes"));
        let y_step = f64::from_le_bytes(header[24..32].try_into().expect("8 bytes"));
        if i_count < 1 {
            return Err(LatticeError::InvalidSpec {
                reason: "stored bought-vote count must be at least 1".to_string(),
            });
        }
        let spec = LatticeSpec {
            y_start,
            y_step,
            y_count,
            n_max,
            i_cap: i_count - 1,
        };
        spec.validate()?;
        let cells = spec.cell_count();
        let payload_bytes = cells * 8;
        let mut values = Vec::with_capacity(cells as usize);
        let mut checksum = Fnv1a64::new();
        let mut buf = [0u8; 8];
        for index in 0..cells {
            input.read_exact(&mut buf).map_err(|_| LatticeError::Truncated {
                expected: payload_bytes,
            })?;
            checksum.update(&buf);
            let value = f64::from_le_bytes(buf);
            if !(0.0..=1.0).contains(&value) {
                return Err(LatticeError::CorruptValue { index, value });
            }
            values.push(value);
        }
        input.read_exact(&mut buf).map_err(|_| LatticeError::Truncated {
            expected: payload_bytes,
        })?;
        let stored = u64::from_le_bytes(buf);
        let computed = checksum.finish();
        if stored != computed {
            return Err(LatticeError::ChecksumMismatch { stored, computed });
        }
        if input.read(&mut buf[..1])? != 0 {
            return Err(LatticeError::TrailingData);
        }
        Ok(Self { spec, values })
    }

    pub fn save<P: AsRef<Path>>(&self, path: P) -> Result<(), LatticeError> {
        let mut out = BufWriter::new(File::create(path)?);
        self.write_to(&mut out)?;
        out.flush()?;
        Ok(())
    }

    pub fn load<P: AsRef<Path>>(path: P) -> Result<Self, LatticeError> {
        let mut input = BufReader::new(File::open(path)?);
        Self::read_from(&mut input)
    }

    /// Export as `y,n,i,p` CSV.
    pub fn write_csv<W: Write>(&self, out: &mut W) -> io::Result<()> {
        writeln!(out, "y,n,i,p")?;
        let spec = &self.spec;
        let mut cell = self.values.iter();
        for iy in 0..spec.y_count {
            let y = spec.y_value(iy);
            for n in 1..=spec.n_max {
                for i in 0..=spec.i_cap {
                    let p = cell.next().expect("value per cell");
                    writeln!(out, "{y},{n},{i},{p}")?;
                }
            }
        }
        Ok(())
    }
}

struct Fnv1a64 {
    state: u64,
}

impl Fnv1a64 {
    fn new() -> Self {
        Self {
            state: 0xcbf2_9ce4_8422_2325,
        }
    }

    fn update(&mut self, bytes: &[u8]) {
        for &b in bytes {
            self.state ^= u64::from(b);
            self.state = self.state.wrapping_mul(0x0000_0100_0000_01b3);
        }
    }

    fn finish(&self) -> u64 {
        self.state
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_spec() -> LatticeSpec {
        LatticeSpec {
            y_start: 0.0,
            y_step: 0.5,
            y_count: 3,
            n_max: 4,
            i_cap: 3,
        }
    }

    #[test]
    fn single_voter_cells_are_the_identity() {
        let spec = LatticeSpec {
            y_start: 0.0,
            y_step: 0.5,
            y_count: 3,
            n_max: 1,
            i_cap: 0,
        };
        let table = build_lattice(&spec).unwrap();
        assert_eq!(table.values(), &[0.0, 0.5, 1.0]);
    }

    #[test]
    fn cells_match_pointwise_recomputation_exactly() {
        let spec = LatticeSpec {
            y_start: 0.0,
            y_step: 0.1,
            y_count: 11,
            n_max: 20,
            i_cap: 11,
        };
        let table = build_lattice(&spec).unwrap();
        for iy in 0..spec.y_count {
            let y = spec.y_value(iy);
            for n in 1..=spec.n_max {
                for i in 0..=spec.i_cap {
                    let direct = outcome_probability_bought(y, n, i).unwrap();
                    assert_eq!(table.query(y, n, i).unwrap(), direct, "y={y} n={n} i={i}");
                }
            }
        }
    }

    #[test]
    fn rows_are_monotone_and_saturate() {
        let spec = small_spec();
        let table = build_lattice(&spec).unwrap();
        for iy in 0..spec.y_count {
            let y = spec.y_value(iy);
            for n in 1..=spec.n_max {
                let mut prev = 0.0;
                for i in 0..=spec.i_cap {
                    let p = table.query(y, n, i).unwrap();
                    assert!(p >= prev);
                    assert!((0.0..=1.0).contains(&p));
                    prev = p;
                    if i > n / 2 + 1 {
                        assert_eq!(p, 1.0);
                    }
                }
            }
        }
    }

    #[test]
    fn full_scale_is_refused_without_a_bigger_cap() {
        let spec = LatticeSpec::full_scale();
        assert_eq!(spec.cell_count(), 101 * 1000 * 502);
        match build_lattice(&spec) {
            Err(LatticeError::TooLarge { cells, cap }) => {
                assert_eq!(cells, 50_702_000);
                assert_eq!(cap, DEFAULT_CELL_CAP);
            }
            other => panic!("expected TooLarge, got {other:?}"),
        }
    }

    #[test]
    fn cell_cap_is_configurable() {
        let spec = small_spec(); // 48 cells
        assert!(matches!(
            build_lattice_with_cap(&spec, 47),
            Err(LatticeError::TooLarge { cells: 48, cap: 47 })
        ));
        assert!(build_lattice_with_cap(&spec, 48).is_ok());
    }

    #[test]
    fn spec_validation_errors() {
        let mut spec = small_spec();
        spec.y_count = 0;
        assert!(matches!(spec.validate(), Err(LatticeError::InvalidSpec { .. })));
        let mut spec = small_spec();
        spec.n_max = 0;
        assert!(spec.validate().is_err());
        let mut spec = small_spec();
        spec.y_step = 0.6;
        assert!(spec.validate().is_err(), "grid would pass 1");
        let mut spec = small_spec();
        spec.y_step = 0.0;
        assert!(spec.validate().is_err(), "flat grid with several values");
    }

    #[test]
    fn grid_reaching_exactly_one_is_accepted() {
        // 0.01 * 100 lands a hair above 1.0 in floating point; the stored
        // value is clamped back to 1.
        let spec = LatticeSpec {
            y_start: 0.0,
            y_step: 0.01,
            y_count: 101,
            n_max: 1,
            i_cap: 0,
        };
        spec.validate().unwrap();
        assert_eq!(spec.y_value(100), 1.0);
    }

    #[test]
    fn query_rejects_off_lattice_points() {
        let table = build_lattice(&small_spec()).unwrap();
        match table.query(0.505, 2, 1) {
            Err(LatticeError::OffLattice { nearest_y, .. }) => assert_eq!(nearest_y, 0.5),
            other => panic!("expected OffLattice, got {other:?}"),
        }
        assert!(matches!(
            table.query(0.5, 5, 1),
            Err(LatticeError::OffLattice { nearest_n: 4, .. })
        ));
        assert!(matches!(
            table.query(0.5, 2, 9),
            Err(LatticeError::OffLattice { nearest_i: 3, .. })
        ));
    }

    #[test]
    fn round_trip_is_byte_identical() {
        let table = build_lattice(&small_spec()).unwrap();
        let mut bytes = Vec::new();
        table.write_to(&mut bytes).unwrap();
        let restored = LatticeTable::read_from(&mut bytes.as_slice()).unwrap();
        assert_eq!(restored, table);
        let mut again = Vec::new();
        restored.write_to(&mut again).unwrap();
        assert_eq!(bytes, again);
    }

    #[test]
    fn corrupted_payload_fails_the_checksum() {
        let table = build_lattice(&small_spec()).unwrap();
        let mut bytes = Vec::new();
        table.write_to(&mut bytes).unwrap();
        let mid = 32 + (bytes.len() - 40) / 2;
        bytes[mid] ^= 0x01;
        // A low-byte flip keeps the value a probability but breaks the
        // checksum; flipping the sign bit instead trips the value check.
        assert!(matches!(
            LatticeTable::read_from(&mut bytes.as_slice()),
            Err(LatticeError::ChecksumMismatch { .. }) | Err(LatticeError::CorruptValue { .. })
        ));
        let mut negated = Vec::new();
        table.write_to(&mut negated).unwrap();
        negated[32 + 7 + 8] ^= 0x80; // sign bit of the second cell
        assert!(matches!(
            LatticeTable::read_from(&mut negated.as_slice()),
            Err(LatticeError::CorruptValue { index: 1, .. })
        ));
    }

    #[test]
    fn future_version_is_rejected() {
        let table = build_lattice(&small_spec()).unwrap();
        let mut bytes = Vec::new();
        table.write_to(&mut bytes).unwrap();
        bytes[4] = 2;
        match LatticeTable::read_from(&mut bytes.as_slice()) {
            Err(LatticeError::UnsupportedVersion { found, expected }) => {
                assert_eq!(found, 2);
                assert_eq!(expected, 1);
            }
            other => panic!("expected UnsupportedVersion, got {other:?}"),
        }
    }

    #[test]
    fn bad_magic_and_truncation_are_reported() {
        let table = build_lattice(&small_spec()).unwrap();
        let mut bytes = Vec::new();
        table.write_to(&mut bytes).unwrap();
        assert!(matches!(
            LatticeTable::read_from(&mut &bytes[..20]),
            Err(LatticeError::Truncated { .. })
        ));
        assert!(matches!(
            LatticeTable::read_from(&mut &bytes[..bytes.len() - 4]),
            Err(LatticeError::Truncated { .. })
        ));
        let mut broken = bytes.clone();
        broken[0] = b'X';
        assert!(matches!(
            LatticeTable::read_from(&mut broken.as_slice()),
            Err(LatticeError::BadMagic)
        ));
        bytes.push(0);
        assert!(matches!(
            LatticeTable::read_from(&mut bytes.as_slice()),
            Err(LatticeError::TrailingData)
        ));
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("table.qspl");
        let table = build_lattice(&small_spec()).unwrap();
        table.save(&path).unwrap();
        let restored = LatticeTable::load(&path).unwrap();
        assert_eq!(restored, table);
    }

    #[test]
    fn csv_export_lists_every_cell() {
        let table = build_lattice(&LatticeSpec {
            y_start: 0.0,
            y_step: 0.5,
            y_count: 2,
            n_max: 2,
            i_cap: 1,
        })
        .unwrap();
        let mut buf = Vec::new();
        table.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "y,n,i,p");
        assert_eq!(lines.len(), 1 + 2 * 2 * 2);
        assert_eq!(lines[1], "0,1,0,0");
    }
}
