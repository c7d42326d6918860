//! Binary snapshots: `"NLS1"`, u32 version, u32 kind, u32 d, d × u32 n,
//! f64 L, f64 t, then `n^d` little-endian `(re, im)` f64 pairs, axis 0
//! fastest.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::field::{ComplexField, Grid, C64};

pub const MAGIC: [u8; 4] = *b"NLS1";
pub const VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SnapshotKind {
    Field = 0,
    GroundState = 1,
}

pub fn encode_snapshot(f: &ComplexField, kind: SnapshotKind) -> Vec<u8> {
    let grid = f.grid();
    let d = grid.dim();
    let mut out = Vec::with_capacity(16 + 4 * d + 16 + 16 * grid.len());
    out.extend_from_slice(&MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(kind as u32).to_le_bytes());
    out.extend_from_slice(&(d as u32).to_le_bytes());
    for _ in 0..d {
        out.extend_from_slice(&(grid.n() as u32).to_le_bytes());
    }
    out.extend_from_slice(&grid.half_width().to_le_bytes());
    out.extend_from_slice(&f.time().to_le_bytes());
    for z in f.samples() {
        out.extend_from_slice(&z.re.to_le_bytes());
        out.extend_from_slice(&z.im.to_le_bytes());
    }
    out
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Cursor<'_> {
    fn take<const N: usize>(&mut self, what: &str) -> Result<[u8; N]> {
        let end = self.pos + N;
        let slice = self.bytes.get(self.pos..end).ok_or_else(|| {
            Error::Payload(format!("file ends at byte {} while reading {what}", self.bytes.len()))
        })?;
        self.pos = end;
        Ok(slice.try_into().expect("slice has length N"))
    }

    fn u32(&mut self, what: &str) -> Result<u32> {
        self.take::<4>(what).map(u32::from_le_bytes)
    }

    fn f64(&mut self, what: &str) -> Result<f64> {
        self.take::<8>(what).map(f64::from_le_bytes)
    }
}

pub fn decode_snapshot(bytes: &[u8]) -> Result<(ComplexField, SnapshotKind)> {
    let mut c = Cursor { bytes, pos: 0 };
    let magic = c.take::<4>("magic")?;
    if magic != MAGIC {
        if magic[..3] == MAGIC[..3] && magic[3].is_ascii_digit() {
            return Err(Error::VersionMismatch(format!(
                "magic {:?} names format {}, this reader handles 1",
                String::from_utf8_lossy(&magic),
                magic[3] as char
            )));
        }
        return Err(Error::BadMagic(magic));
    }
    let version = c.u32("version")?;
    if version != VERSION {
        return Err(Error::VersionMismatch(format!("version {version}, expected {VERSION}")));
    }
    let kind = match c.u32("kind")? {
        0 => SnapshotKind::Field,
        1 => SnapshotKind::GroundState,
        k => return Err(Error::Payload(format!("unknown snapshot kind {k}"))),
    };
    let d = c.u32("dimension")? as usize;
    if !(1..=3).contains(&d) {
        return Err(Error::Payload(format!("dimension {d} outside 1..=3")));
    }
    let mut ns = Vec::with_capacity(d);
    for a in 0..d {
        ns.push(c.u32(&format!("n along axis {a}"))? as usize);
    }
    if ns.iter().any(|&n| n != ns[0]) {
        return Err(Error::Payload(format!("unequal axis lengths {ns:?} are not supported")));
    }
    let l = c.f64("half-width")?;
    let t = c.f64("time")?;
    let grid = Grid::new(d, ns[0], l).map_err(|e| Error::Payload(e.to_string()))?;
    let expected = c.pos + 16 * grid.len();
    if bytes.len() != expected {
        return Err(Error::Payload(format!(
            "payload holds {} bytes, {} expected for {} samples",
            bytes.len() - c.pos,
            expected - c.pos,
            grid.len()
        )));
    }
    let mut samples = Vec::with_capacity(grid.len());
    for _ in 0..grid.len() {
        let re = c.f64("sample")?;
        let im = c.f64("sample")?;
        samples.push(C64::new(re, im));
    }
    let f = ComplexField::new(grid, samples, t).map_err(|e| Error::Payload(e.to_string()))?;
    Ok((f, kind))
}

pub fn write_snapshot(f: &ComplexField, path: impl AsRef<Path>) -> Result<()> {
    write_snapshot_kind(f, SnapshotKind::Field, path)
}

pub fn write_snapshot_kind(f: &ComplexField, kind: SnapshotKind, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, encode_snapshot(f, kind))?;
    Ok(())
}

pub fn read_snapshot(path: impl AsRef<Path>) -> Result<ComplexField> {
    read_snapshot_kind(path).map(|(f, _)| f)
}

pub fn read_snapshot_kind(path: impl AsRef<Path>) -> Result<(ComplexField, SnapshotKind)> {
    decode_snapshot(&fs::read(path)?)
}
