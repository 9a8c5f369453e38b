//! On-disk cache of static spectra keyed by `(J, omega0, gamma_x)`.
//!
//! Layout (little endian):
//! `magic[8] = "LMGSPEC\0"`, `version: u32`, `two_j: u32`, `omega0: f64`, `gamma_x: f64`,
//! `dim: u64`, `energies: [f64; dim]`, `parities: [i8; dim]`, `states: [f64; dim*dim]`
//! (row-major, columns are eigenvectors), then an FNV-1a 64 checksum of everything before it.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use ndarray::Array2;

use super::spectrum::StaticSpectrum;
use crate::error::{Error, Result};
use crate::params::{Lmg, Spin};

pub const MAGIC: &[u8; 8] = b"LMGSPEC\0";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CacheStatus {
    Hit,
    Computed,
    /// A file existed but could not be used; it was replaced.
    Recomputed,
}

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in bytes {
        h ^= u64::from(*b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

pub fn encode(spec: &StaticSpectrum) -> Vec<u8> {
    let n = spec.dim();
    let mut buf = Vec::with_capacity(48 + n * 9 + n * n * 8);
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    buf.extend_from_slice(&spec.spin.twice().to_le_bytes());
    buf.extend_from_slice(&spec.lmg.omega0.to_le_bytes());
    buf.extend_from_slice(&spec.lmg.gamma_x.to_le_bytes());
    buf.extend_from_slice(&(n as u64).to_le_bytes());
    for e in &spec.energies {
        buf.extend_from_slice(&e.to_le_bytes());
    }
    for p in &spec.parities {
        buf.extend_from_slice(&p.to_le_bytes());
    }
    for x in spec.states.iter() {
        buf.extend_from_slice(&x.to_le_bytes());
    }
    let sum = fnv1a(&buf);
    buf.extend_from_slice(&sum.to_le_bytes());
    buf
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> std::result::Result<&'a [u8], String> {
        let end = self.pos.checked_add(n).ok_or("length overflow")?;
        let out = self.bytes.get(self.pos..end).ok_or("truncated file")?;
        self.pos = end;
        Ok(out)
    }
    fn u32(&mut self) -> std::result::Result<u32, String> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }
    fn u64(&mut self) -> std::result::Result<u64, String> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
    fn f64(&mut self) -> std::result::Result<f64, String> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
}

pub fn decode(bytes: &[u8]) -> std::result::Result<StaticSpectrum, String> {
    if bytes.len() < 8 {
        return Err("truncated file".into());
    }
    let (body, tail) = bytes.split_at(bytes.len() - 8);
    if fnv1a(body) != u64::from_le_bytes(tail.try_into().unwrap()) {
        return Err("checksum mismatch".into());
    }
    let mut r = Reader { bytes: body, pos: 0 };
    if r.take(8)? != MAGIC {
        return Err("bad magic".into());
    }
    let version = r.u32()?;
    if version != FORMAT_VERSION {
        return Err(format!("unsupported format version {version}"));
    }
    let spin = Spin::from_twice(r.u32()?).map_err(|e| e.to_string())?;
    let lmg = Lmg { omega0: r.f64()?, gamma_x: r.f64()? };
    let n = r.u64()? as usize;
    if n != spin.dim() {
        return Err(format!("dimension {n} does not match 2J+1 = {}", spin.dim()));
    }
    let energies = (0..n).map(|_| r.f64()).collect::<std::result::Result<Vec<_>, _>>()?;
    let parities = r.take(n)?.iter().map(|&b| b as i8).collect::<Vec<_>>();
    if parities.iter().any(|&p| p != 1 && p != -1) {
        return Err("parity entries must be +-1".into());
    }
    let states = (0..n * n).map(|_| r.f64()).collect::<std::result::Result<Vec<_>, _>>()?;
    if r.pos != body.len() {
        return Err("trailing bytes".into());
    }
    let states = Array2::from_shape_vec((n, n), states).map_err(|e| e.to_string())?;
    Ok(StaticSpectrum { spin, lmg, energies, states, parities })
}

/// Directory-backed spectrum cache with atomic-rename writes.
#[derive(Debug, Clone)]
pub struct SpectrumCache {
    dir: PathBuf,
}

impl SpectrumCache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Self { dir: dir.into() }
    }

    pub fn path_for(&self, spin: Spin, lmg: &Lmg) -> PathBuf {
        self.dir.join(format!(
            "spectrum_2j{}_w{:016x}_g{:016x}.bin",
            spin.twice(),
            lmg.omega0.to_bits(),
            lmg.gamma_x.to_bits()
        ))
    }

    pub fn load(&self, spin: Spin, lmg: &Lmg) -> Result<StaticSpectrum> {
        let path = self.path_for(spin, lmg);
        let bytes = fs::read(&path)?;
        let spec = decode(&bytes).map_err(|message| Error::Cache { path: path.clone(), message })?;
        if spec.spin != spin || spec.lmg != *lmg {
            return Err(Error::Cache { path, message: "key mismatch".into() });
        }
        Ok(spec)
    }

    pub fn store(&self, spec: &StaticSpectrum) -> Result<PathBuf> {
        let path = self.path_for(spec.spin, &spec.lmg);
        write_atomic(&path, &encode(spec))
            .map_err(|e| Error::Cache { path: path.clone(), message: e.to_string() })?;
        Ok(path)
    }

    /// Load the spectrum if cached, otherwise compute and store it.
    pub fn load_or_compute(&self, spin: Spin, lmg: Lmg) -> Result<(StaticSpectrum, CacheStatus)> {
        let path = self.path_for(spin, &lmg);
        let mut status = CacheStatus::Computed;
        if path.exists() {
            match self.load(spin, &lmg) {
                Ok(spec) => {
                    log::info!("spectrum cache hit: {}", path.display());
                    return Ok((spec, CacheStatus::Hit));
                }
                Err(e) => {
                    log::warn!("ignoring unusable spectrum cache ({e}); recomputing");
                    status = CacheStatus::Recomputed;
                }
            }
        }
        let spec = StaticSpectrum::compute(spin, lmg)?;
        self.store(&spec)?;
        log::info!("spectrum cached: {}", path.display());
        Ok((spec, status))
    }
}

/// Write to a sibling temporary file, then rename over the target.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    let tmp = path.with_extension(format!("tmp{}", std::process::id()));
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)
}
