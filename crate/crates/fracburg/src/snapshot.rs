//! Binary state snapshots.
//!
//! Layout (all integers and floats little-endian):
//!
//! ```text
//! offset  size  field
//! 0       4     magic "FBRG"
//! 4       4     format version (u32, currently 1)
//! 8       8     grid size n (u64)
//! 16      8     alpha (f64)
//! 24      8     nu (f64)
//! 32      8     simulation time t (f64)
//! 40      8     step count (u64)
//! 48      8     accumulated dissipation integral (f64)
//! 56      ...   n/2 + 1 spectral coefficients as (re, im) f64 pairs
//! ```
//!
//! Floats are stored by bit pattern, so a save/load round trip is exact and
//! a run resumed from a snapshot continues bit-for-bit.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::spectral::{Grid, SpectralField};
use crate::stepper::{ResumePoint, SampleRecord, SolverRun};

const MAGIC: &[u8; 4] = b"FBRG";
const VERSION: u32 = 1;

/// A saved solver state together with the equation parameters it belongs
/// to, so a resume against a mismatched configuration can be refused.
#[derive(Debug, Clone)]
pub struct Snapshot {
    pub alpha: f64,
    pub nu: f64,
    pub point: ResumePoint,
}

impl Snapshot {
    /// Captures a snapshot of one stored sample of a run.
    pub fn from_record(run: &SolverRun, record: &SampleRecord) -> Self {
        Self {
            alpha: run.config.alpha,
            nu: run.config.nu,
            point: ResumePoint {
                field: record.field.clone(),
                t: record.t,
                step_count: record.step_count,
                dissipation_integral: record.dissipation_integral,
            },
        }
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        w.write_all(MAGIC)?;
        w.write_u32::<LittleEndian>(VERSION)?;
        w.write_u64::<LittleEndian>(self.point.field.grid().n() as u64)?;
        w.write_f64::<LittleEndian>(self.alpha)?;
        w.write_f64::<LittleEndian>(self.nu)?;
        w.write_f64::<LittleEndian>(self.point.t)?;
        w.write_u64::<LittleEndian>(self.point.step_count)?;
        w.write_f64::<LittleEndian>(self.point.dissipation_integral)?;
        for c in self.point.field.coeffs() {
            w.write_f64::<LittleEndian>(c.re)?;
            w.write_f64::<LittleEndian>(c.im)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let mut r = BufReader::new(File::open(path)?);
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)
            .map_err(|_| Error::Snapshot("file too short for header".into()))?;
        if &magic != MAGIC {
            return Err(Error::Snapshot(format!(
                "bad magic {:02x?} (expected \"FBRG\")",
                magic
            )));
        }
        let version = r.read_u32::<LittleEndian>().map_err(truncated)?;
        if version != VERSION {
            return Err(Error::Snapshot(format!(
                "unsupported format version {version} (expected {VERSION})"
            )));
        }
        let n = r.read_u64::<LittleEndian>().map_err(truncated)? as usize;
        let grid = Grid::new(n)
            .map_err(|e| Error::Snapshot(format!("invalid grid in header: {e}")))?;
        let alpha = r.read_f64::<LittleEndian>().map_err(truncated)?;
        let nu = r.read_f64::<LittleEndian>().map_err(truncated)?;
        let t = r.read_f64::<LittleEndian>().map_err(truncated)?;
        let step_count = r.read_u64::<LittleEndian>().map_err(truncated)?;
        let dissipation_integral = r.read_f64::<LittleEndian>().map_err(truncated)?;
        let mut field = SpectralField::zeros(grid);
        for k in 0..grid.n_modes() {
            let re = r.read_f64::<LittleEndian>().map_err(truncated)?;
            let im = r.read_f64::<LittleEndian>().map_err(truncated)?;
            field.coeffs_mut()[k] = Complex64::new(re, im);
        }
        let mut trailing = [0u8; 1];
        if r.read(&mut trailing)? != 0 {
            return Err(Error::Snapshot("trailing bytes after coefficient block".into()));
        }
        field.set_time_tag(t);
        field.check_valid()?;
        Ok(Self {
            alpha,
            nu,
            point: ResumePoint { field, t, step_count, dissipation_integral },
        })
    }

    /// Refuses to pair this snapshot with a run at different equation
    /// parameters.
    pub fn check_compatible(&self, alpha: f64, nu: f64) -> Result<()> {
        if self.alpha != alpha || self.nu != nu {
            return Err(Error::Snapshot(format!(
                "snapshot was taken at (alpha, nu) = ({}, {}), run configured for ({}, {})",
                self.alpha, self.nu, alpha, nu
            )));
        }
        Ok(())
    }
}

fn truncated(_: std::io::Error) -> Error {
    Error::Snapshot("truncated file".into())
}
