//! Binary wave-function snapshots.
//!
//! Layout (all integers little-endian):
//!
//! | bytes | field |
//! |-------|-------|
//! | 4     | magic `RSQS` |
//! | 4     | version (`u32`) |
//! | 4     | eta (`u32`) |
//! | 4     | d_space (`u32`) |
//! | 4     | n (`u32`) |
//! | 1     | representation (0 = position, 1 = frequency) |
//! | 16·N  | amplitudes as interleaved `f64` (re, im), last axis fastest |

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use num_complex::Complex64;

use super::{GridSpec, Representation, WaveFunction};
use crate::error::{Error, Result};

pub const MAGIC: [u8; 4] = *b"RSQS";
pub const VERSION: u32 = 1;
pub const HEADER_LEN: usize = 21;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SnapshotHeader {
    pub version: u32,
    pub eta: u32,
    pub d_space: u32,
    pub n: u32,
    pub representation: Representation,
}

impl SnapshotHeader {
    pub fn for_state(psi: &WaveFunction) -> Self {
        let g = psi.grid();
        Self {
            version: VERSION,
            eta: g.eta() as u32,
            d_space: g.d_space() as u32,
            n: g.n() as u32,
            representation: psi.representation(),
        }
    }

    pub fn to_bytes(&self) -> [u8; HEADER_LEN] {
        let mut out = [0u8; HEADER_LEN];
        out[0..4].copy_from_slice(&MAGIC);
        out[4..8].copy_from_slice(&self.version.to_le_bytes());
        out[8..12].copy_from_slice(&self.eta.to_le_bytes());
        out[12..16].copy_from_slice(&self.d_space.to_le_bytes());
        out[16..20].copy_from_slice(&self.n.to_le_bytes());
        out[20] = self.representation.flag();
        out
    }

    pub fn from_bytes(bytes: &[u8; HEADER_LEN]) -> Result<Self> {
        let magic: [u8; 4] = bytes[0..4].try_into().unwrap();
        if magic != MAGIC {
            return Err(Error::BadMagic(magic));
        }
        let word = |at: usize| u32::from_le_bytes(bytes[at..at + 4].try_into().unwrap());
        let version = word(4);
        if version != VERSION {
            return Err(Error::VersionMismatch { found: version, expected: VERSION });
        }
        let representation = Representation::from_flag(bytes[20]).ok_or_else(|| {
            Error::CorruptHeader(format!("unknown representation flag {}", bytes[20]))
        })?;
        Ok(Self { version, eta: word(8), d_space: word(12), n: word(16), representation })
    }

    pub fn grid(&self) -> Result<GridSpec> {
        GridSpec::new(self.eta as usize, self.d_space as usize, self.n as usize)
    }
}

pub fn write_snapshot<W: Write>(psi: &WaveFunction, mut w: W) -> Result<()> {
    w.write_all(&SnapshotHeader::for_state(psi).to_bytes())?;
    let mut buf = Vec::with_capacity(16 * psi.amplitudes().len());
    for a in psi.amplitudes() {
        buf.extend_from_slice(&a.re.to_le_bytes());
        buf.extend_from_slice(&a.im.to_le_bytes());
    }
    w.write_all(&buf)?;
    w.flush()?;
    Ok(())
}

pub fn read_snapshot<R: Read>(mut r: R) -> Result<WaveFunction> {
    let mut head = [0u8; HEADER_LEN];
    let got = read_up_to(&mut r, &mut head)?;
    if got < 4 {
        return Err(Error::TruncatedFile { expected: HEADER_LEN as u64, found: got as u64 });
    }
    let magic: [u8; 4] = head[0..4].try_into().unwrap();
    if magic != MAGIC {
        return Err(Error::BadMagic(magic));
    }
    if got < HEADER_LEN {
        return Err(Error::TruncatedFile { expected: HEADER_LEN as u64, found: got as u64 });
    }
    let header = SnapshotHeader::from_bytes(&head)?;
    let grid = header.grid()?;
    let payload_len = 16 * grid.point_count();
    let mut payload = vec![0u8; payload_len];
    let got = read_up_to(&mut r, &mut payload)?;
    if got < payload_len {
        return Err(Error::TruncatedFile {
            expected: (HEADER_LEN + payload_len) as u64,
            found: (HEADER_LEN + got) as u64,
        });
    }
    let amplitudes = payload
        .chunks_exact(16)
        .map(|c| {
            Complex64::new(
                f64::from_le_bytes(c[0..8].try_into().unwrap()),
                f64::from_le_bytes(c[8..16].try_into().unwrap()),
            )
        })
        .collect();
    WaveFunction::new(grid, amplitudes, header.representation)
}

pub fn save(psi: &WaveFunction, path: impl AsRef<Path>) -> Result<()> {
    write_snapshot(psi, BufWriter::new(File::create(path)?))
}

pub fn load(path: impl AsRef<Path>) -> Result<WaveFunction> {
    read_snapshot(BufReader::new(File::open(path)?))
}

fn read_up_to<R: Read>(r: &mut R, buf: &mut [u8]) -> Result<usize> {
    let mut filled = 0;
    while filled < buf.len() {
        match r.read(&mut buf[filled..]) {
            Ok(0) => break,
            Ok(k) => filled += k,
            Err(e) if e.kind() == std::io::ErrorKind::Interrupted => {}
            Err(e) => return Err(e.into()),
        }
    }
    Ok(filled)
}
