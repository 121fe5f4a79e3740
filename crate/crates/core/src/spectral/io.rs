use std::path::{Path, PathBuf};
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{SpectralField, TorusGrid};
use crate::error::{Error, Result};

pub const NORMALIZATION: &str = "unit-mode";
pub const ORDERING: &str = "row-major, fft order per axis";

/// Sidecar header describing a binary coefficient file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldHeader {
    pub n: usize,
    pub sizes: Vec<usize>,
    pub normalization: String,
    #[serde(default = "default_ordering")]
    pub ordering: String,
}

fn default_ordering() -> String {
    ORDERING.into()
}

impl FieldHeader {
    pub fn for_grid(grid: &TorusGrid) -> Self {
        FieldHeader {
            n: grid.dim(),
            sizes: grid.sizes().to_vec(),
            normalization: NORMALIZATION.into(),
            ordering: ORDERING.into(),
        }
    }
}

/// Little-endian `(re, im)` f64 pairs in lattice order.
pub fn encode_coeffs(field: &SpectralField) -> Vec<u8> {
    let mut out = Vec::with_capacity(field.coeffs().len() * 16);
    for c in field.coeffs() {
        out.extend_from_slice(&c.re.to_le_bytes());
        out.extend_from_slice(&c.im.to_le_bytes());
    }
    out
}

pub fn decode_field(header: &FieldHeader, bytes: &[u8]) -> Result<SpectralField> {
    if header.normalization != NORMALIZATION {
        return Err(Error::Io(format!(
            "unsupported normalization {:?}",
            header.normalization
        )));
    }
    if header.n != header.sizes.len() {
        return Err(Error::Dimension(format!(
            "header declares n = {} but {} sizes",
            header.n,
            header.sizes.len()
        )));
    }
    let grid = TorusGrid::new(&header.sizes)?;
    if bytes.len() != grid.len() * 16 {
        return Err(Error::Dimension(format!(
            "expected {} bytes for grid {:?}, found {}",
            grid.len() * 16,
            header.sizes,
            bytes.len()
        )));
    }
    let coeffs = bytes
        .chunks_exact(16)
        .map(|c| {
            let re = f64::from_le_bytes(c[..8].try_into().unwrap());
            let im = f64::from_le_bytes(c[8..].try_into().unwrap());
            Complex64::new(re, im)
        })
        .collect();
    SpectralField::from_coeffs(&grid, coeffs)
}

/// Header path for a field file: `<path>.json`.
pub fn header_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

/// Writes coefficients to `path` and the header to `<path>.json`.
pub fn write_field(field: &SpectralField, path: &Path) -> Result<()> {
    let header = FieldHeader::for_grid(field.grid());
    let json = serde_json::to_string_pretty(&header).map_err(|e| Error::Io(e.to_string()))?;
    std::fs::write(path, encode_coeffs(field))?;
    std::fs::write(header_path(path), json + "\n")?;
    Ok(())
}

pub fn read_field(path: &Path) -> Result<SpectralField> {
    let header: FieldHeader = serde_json::from_slice(&std::fs::read(header_path(path))?)
        .map_err(|e| Error::Io(format!("bad field header: {e}")))?;
    decode_field(&header, &std::fs::read(path)?)
}

/// Reads a field and checks that it lives on `grid`.
pub fn read_field_on(path: &Path, grid: &Arc<TorusGrid>) -> Result<SpectralField> {
    let f = read_field(path)?;
    if **f.grid() != **grid {
        return Err(Error::Dimension(format!(
            "field file has grid {:?}, expected {:?}",
            f.grid().sizes(),
            grid.sizes()
        )));
    }
    SpectralField::from_coeffs(grid, f.into_coeffs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn bytes_round_trip() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        let g = TorusGrid::new(&[4, 6]).unwrap();
        let u = SpectralField::random(&g, &mut rng, 0.0);
        let bytes = encode_coeffs(&u);
        assert_eq!(bytes.len(), 24 * 16);
        let back = decode_field(&FieldHeader::for_grid(&g), &bytes).unwrap();
        assert_eq!(back, u);
        assert!(decode_field(&FieldHeader::for_grid(&g), &bytes[1..]).is_err());
    }

    #[test]
    fn header_json_shape() {
        let g = TorusGrid::new(&[8, 8]).unwrap();
        let v = serde_json::to_value(FieldHeader::for_grid(&g)).unwrap();
        assert_eq!(v["n"], 2);
        assert_eq!(v["normalization"], "unit-mode");
        assert_eq!(v["sizes"], serde_json::json!([8, 8]));
    }
}
