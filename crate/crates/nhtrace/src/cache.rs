//! On-disk cache of sampled spectral systems.
//!
//! One file per key, little-endian throughout:
//!
//! ```text
//! "NHTS"  u32 version
//! u32 model  u64 n_modes  u64 n_grid
//! f64 nu  f64 Q  f64 h (NaN when absent)
//! f64 labels[n_modes]
//! (f64 re, f64 im) eigenvalues[n_modes]
//! f64 brackets[n_modes]
//! f64 grid[n_grid]  f64 weights[n_grid]
//! (f64 re, f64 im) u[n_modes * n_grid]  v[n_modes * n_grid]
//! ```

use std::fs;
use std::io::{ErrorKind, Write};
use std::path::{Path, PathBuf};

use nhtrace_core::spectral::{build_system, minimum_grid};
use nhtrace_core::{Complex64, ModelId, SpectralSystem, Spectrum};

use crate::error::{Error, Result};

pub const MAGIC: &[u8; 4] = b"NHTS";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CacheKey {
    pub model: ModelId,
    pub h: Option<f64>,
    pub modes: usize,
    pub grid: usize,
}

impl CacheKey {
    pub fn new(model: ModelId, h: Option<f64>, modes: usize, grid: Option<usize>) -> Self {
        Self {
            model,
            h: if model == ModelId::TwistedH { h } else { None },
            modes,
            grid: grid.unwrap_or_else(|| minimum_grid(model, modes)),
        }
    }

    pub fn build(&self) -> Result<SpectralSystem> {
        Ok(build_system(self.model, self.h, self.modes, self.grid)?)
    }

    fn file_name(&self, version: u32) -> String {
        let h = self.h.map_or_else(|| "none".to_string(), |h| format!("{:016x}", h.to_bits()));
        format!(
            "{}_m{}_g{}_h{}_v{}.nhts",
            self.model.as_str(),
            self.modes,
            self.grid,
            h,
            version
        )
    }
}

fn model_code(model: ModelId) -> u32 {
    match model {
        ModelId::DirichletInterval => 0,
        ModelId::PeriodicCircle => 1,
        ModelId::TwistedH => 2,
    }
}

fn model_from_code(code: u32) -> Option<ModelId> {
    ModelId::ALL.into_iter().find(|&m| model_code(m) == code)
}

/// Serializes a system into the cache format.
pub fn encode(system: &SpectralSystem, version: u32) -> Vec<u8> {
    let spectrum = system.spectrum();
    let (n, g) = (spectrum.len(), system.grid_len());
    let mut out = Vec::with_capacity(64 + 8 * (5 * n + 2 * g + 4 * n * g));
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&version.to_le_bytes());
    out.extend_from_slice(&model_code(spectrum.model()).to_le_bytes());
    out.extend_from_slice(&(n as u64).to_le_bytes());
    out.extend_from_slice(&(g as u64).to_le_bytes());
    let mut put = |v: f64| out.extend_from_slice(&v.to_le_bytes());
    put(spectrum.nu());
    put(spectrum.weyl_q());
    put(spectrum.h().unwrap_or(f64::NAN));
    spectrum.labels().iter().for_each(|&l| put(l as f64));
    for z in spectrum.eigenvalues() {
        put(z.re);
        put(z.im);
    }
    spectrum.brackets().iter().for_each(|&b| put(b));
    system.grid().iter().for_each(|&x| put(x));
    system.weights().iter().for_each(|&w| put(w));
    for z in system.u_samples().iter().chain(system.v_samples()) {
        put(z.re);
        put(z.im);
    }
    out
}

/// Why a cache file could not be decoded.
#[derive(Debug, Clone, PartialEq)]
pub enum Decoded {
    System(Box<SpectralSystem>),
    /// Well-formed but written by another format version.
    OtherVersion(u32),
    Corrupt(String),
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], String> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len());
        let end = end.ok_or_else(|| format!("truncated at byte {}", self.pos))?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32, String> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }

    fn u64(&mut self) -> Result<u64, String> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }

    fn f64s(&mut self, n: usize) -> Result<Vec<f64>, String> {
        let len = n.checked_mul(8).ok_or("array length overflows")?;
        Ok(self
            .take(len)?
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
            .collect())
    }

    fn complex(&mut self, n: usize) -> Result<Vec<Complex64>, String> {
        let flat = self.f64s(n.checked_mul(2).ok_or("array length overflows")?)?;
        Ok(flat.chunks_exact(2).map(|c| Complex64::new(c[0], c[1])).collect())
    }
}

/// Parses a cache file, expecting `version`.
pub fn decode(bytes: &[u8], version: u32) -> Decoded {
    match decode_inner(bytes, version) {
        Ok(d) => d,
        Err(reason) => Decoded::Corrupt(reason),
    }
}

fn decode_inner(bytes: &[u8], version: u32) -> Result<Decoded, String> {
    let mut r = Reader { bytes, pos: 0 };
    if r.take(4)? != MAGIC {
        return Err("bad magic".into());
    }
    let found = r.u32()?;
    if found != version {
        return Ok(Decoded::OtherVersion(found));
    }
    let code = r.u32()?;
    let model = model_from_code(code).ok_or_else(|| format!("unknown model code {code}"))?;
    let n = usize::try_from(r.u64()?).map_err(|e| e.to_string())?;
    let g = usize::try_from(r.u64()?).map_err(|e| e.to_string())?;
    let header = r.f64s(3)?;
    let h = (!header[2].is_nan()).then_some(header[2]);
    let labels: Vec<i64> = r.f64s(n)?.into_iter().map(|l| l as i64).collect();
    let eigenvalues = r.complex(n)?;
    let brackets = r.f64s(n)?;
    let grid = r.f64s(g)?;
    let weights = r.f64s(g)?;
    let samples = n.checked_mul(g).ok_or("sample count overflows")?;
    let u = r.complex(samples)?;
    let v = r.complex(samples)?;
    if r.pos != bytes.len() {
        return Err(format!("{} trailing bytes", bytes.len() - r.pos));
    }
    let spectrum =
        Spectrum::from_parts(model, h, labels, eigenvalues, brackets).map_err(|e| e.to_string())?;
    if spectrum.nu() != header[0] || spectrum.weyl_q() != header[1] {
        return Err(format!("header nu = {}, Q = {} do not match the model", header[0], header[1]));
    }
    let system = SpectralSystem::from_parts(spectrum, grid, weights, u, v).map_err(|e| e.to_string())?;
    Ok(Decoded::System(Box::new(system)))
}

/// Directory of cached systems for one format version.
#[derive(Debug, Clone)]
pub struct SystemCache {
    dir: PathBuf,
    version: u32,
}

impl SystemCache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Self::with_version(dir, FORMAT_VERSION)
    }

    pub fn with_version(dir: impl Into<PathBuf>, version: u32) -> Self {
        Self {
            dir: dir.into(),
            version,
        }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn path(&self, key: &CacheKey) -> PathBuf {
        self.dir.join(key.file_name(self.version))
    }

    /// `None` on a miss, a version mismatch, a file written for another key or
    /// a corrupt file (the last with a warning).
    pub fn get(&self, key: &CacheKey) -> Result<Option<SpectralSystem>> {
        let path = self.path(key);
        let bytes = match fs::read(&path) {
            Ok(b) => b,
            Err(e) if e.kind() == ErrorKind::NotFound => return Ok(None),
            Err(e) => return Err(Error::io(path, e)),
        };
        match decode(&bytes, self.version) {
            Decoded::System(system) => {
                let s = system.spectrum();
                let matches = s.model() == key.model
                    && s.h() == key.h
                    && s.modes() == key.modes
                    && system.grid_len() == key.grid;
                if !matches {
                    log::warn!("{}: stored system does not match its key, ignoring", path.display());
                    return Ok(None);
                }
                Ok(Some(*system))
            }
            Decoded::OtherVersion(v) => {
                log::debug!("{}: format version {v}, expected {}", path.display(), self.version);
                Ok(None)
            }
            Decoded::Corrupt(reason) => {
                log::warn!("{}: corrupt cache file ({reason}), rebuilding", path.display());
                Ok(None)
            }
        }
    }

    pub fn put(&self, key: &CacheKey, system: &SpectralSystem) -> Result<PathBuf> {
        fs::create_dir_all(&self.dir).map_err(|e| Error::io(&self.dir, e))?;
        let path = self.path(key);
        let tmp = path.with_extension("nhts.partial");
        let mut file = fs::File::create(&tmp).map_err(|e| Error::io(&tmp, e))?;
        file.write_all(&encode(system, self.version))
            .and_then(|_| file.sync_all())
            .map_err(|e| Error::io(&tmp, e))?;
        fs::rename(&tmp, &path).map_err(|e| Error::io(&path, e))?;
        Ok(path)
    }

    pub fn get_or_build(&self, key: &CacheKey) -> Result<SpectralSystem> {
        if let Some(system) = self.get(key)? {
            return Ok(system);
        }
        let system = key.build()?;
        self.put(key, &system)?;
        Ok(system)
    }
}

/// Builds through `cache` when one is given.
pub fn load_system(cache: Option<&SystemCache>, key: &CacheKey) -> Result<SpectralSystem> {
    match cache {
        Some(c) => c.get_or_build(key),
        None => key.build(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bits(z: &[Complex64]) -> Vec<(u64, u64)> {
        z.iter().map(|z| (z.re.to_bits(), z.im.to_bits())).collect()
    }

    #[test]
    fn encode_decode_preserves_every_array() {
        for key in [
            CacheKey::new(ModelId::DirichletInterval, None, 5, None),
            CacheKey::new(ModelId::PeriodicCircle, None, 4, Some(40)),
            CacheKey::new(ModelId::TwistedH, Some(2.5), 3, None),
        ] {
            let system = key.build().unwrap();
            let bytes = encode(&system, FORMAT_VERSION);
            let Decoded::System(back) = decode(&bytes, FORMAT_VERSION) else {
                panic!("decode failed for {key:?}");
            };
            assert_eq!(*back, system);
            assert_eq!(bits(back.u_samples()), bits(system.u_samples()));
            assert_eq!(bits(back.v_samples()), bits(system.v_samples()));
            assert_eq!(encode(&back, FORMAT_VERSION), bytes);
        }
    }

    #[test]
    fn decode_rejects_damage() {
        let system = CacheKey::new(ModelId::PeriodicCircle, None, 3, None).build().unwrap();
        let bytes = encode(&system, 1);
        assert_eq!(decode(&bytes, 2), Decoded::OtherVersion(1));
        assert!(matches!(decode(&bytes[..bytes.len() - 3], 1), Decoded::Corrupt(_)));
        assert!(matches!(decode(b"NOPE", 1), Decoded::Corrupt(_)));
        let mut extra = bytes.clone();
        extra.push(0);
        assert!(matches!(decode(&extra, 1), Decoded::Corrupt(_)));
        // a flipped bracket no longer matches its eigenvalue
        let mut flipped = bytes;
        let bracket_at = 4 + 4 + 4 + 8 + 8 + 24 + 7 * 8 + 7 * 16;
        flipped[bracket_at + 7] ^= 0x10;
        assert!(matches!(decode(&flipped, 1), Decoded::Corrupt(_)));
    }

    #[test]
    fn file_names_separate_keys() {
        let a = CacheKey::new(ModelId::TwistedH, Some(2.0), 8, None);
        let b = CacheKey::new(ModelId::TwistedH, Some(3.0), 8, None);
        assert_ne!(a.file_name(1), b.file_name(1));
        assert_ne!(a.file_name(1), a.file_name(2));
        let c = CacheKey::new(ModelId::PeriodicCircle, Some(3.0), 8, None);
        assert_eq!(c.h, None);
        assert_eq!(c.grid, minimum_grid(ModelId::PeriodicCircle, 8));
    }
}
