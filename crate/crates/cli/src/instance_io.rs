//! Instance file format: a versioned binary file carrying the explicit field
//! angles, plus a JSON sidecar for human inspection.
//!
//! Layout:
//!
//! ```text
//! bytes 0..8    magic "RFXYINST"
//! bytes 8..12   format version, u32 little-endian (currently 1)
//! bytes 12..16  header length in bytes, u32 little-endian
//! header        ASCII "d=<d> L=<L> delta=<decimal> seed=<u64>\n"
//! payload       n_sites little-endian f64 field angles
//! ```
//!
//! The disorder strength travels as decimal text (shortest round-trip form)
//! and the angles as raw f64 bits, so regenerating a file from the same
//! arguments is byte-identical and loading reproduces the instance exactly.

use std::fs;
use std::io::Write;
use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use rfxy::lattice::Lattice;
use rfxy::model::Instance;

const MAGIC: &[u8; 8] = b"RFXYINST";
const VERSION: u32 = 1;

/// JSON sidecar mirroring the binary payload.
#[derive(Debug, Serialize, Deserialize)]
pub struct InstanceSidecar {
    pub format: String,
    pub version: u32,
    pub d: usize,
    #[serde(rename = "L")]
    pub l: usize,
    pub delta: f64,
    pub disorder_seed: u64,
    pub n_sites: usize,
    pub field_angles: Vec<f64>,
}

/// Generates a fresh instance and writes it (and its sidecar) to `path`.
pub fn gen_instance(d: usize, l: usize, delta: f64, seed: u64, path: &Path) -> Result<Instance<f64>> {
    let lattice = Lattice::new(d, l)?;
    let inst = Instance::generate(lattice, delta, seed)?;
    write_instance(&inst, path)?;
    Ok(inst)
}

pub fn write_instance(inst: &Instance<f64>, path: &Path) -> Result<()> {
    let mut bytes = Vec::with_capacity(16 + inst.n_sites() * 8 + 64);
    bytes.extend_from_slice(MAGIC);
    bytes.extend_from_slice(&VERSION.to_le_bytes());
    let header = format!(
        "d={} L={} delta={} seed={}\n",
        inst.dim(),
        inst.lattice().linear_size(),
        inst.delta(),
        inst.disorder_seed()
    );
    bytes.extend_from_slice(&(header.len() as u32).to_le_bytes());
    bytes.extend_from_slice(header.as_bytes());
    for &a in inst.field_angles() {
        bytes.extend_from_slice(&a.to_le_bytes());
    }
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir)
                .with_context(|| format!("creating directory {}", dir.display()))?;
        }
    }
    let mut file =
        fs::File::create(path).with_context(|| format!("writing {}", path.display()))?;
    file.write_all(&bytes)?;

    let sidecar = InstanceSidecar {
        format: "rfxy-instance".into(),
        version: VERSION,
        d: inst.dim(),
        l: inst.lattice().linear_size(),
        delta: inst.delta(),
        disorder_seed: inst.disorder_seed(),
        n_sites: inst.n_sites(),
        field_angles: inst.field_angles().to_vec(),
    };
    let sidecar_path = sidecar_path(path);
    fs::write(&sidecar_path, serde_json::to_string_pretty(&sidecar)?)
        .with_context(|| format!("writing {}", sidecar_path.display()))?;
    Ok(())
}

pub fn sidecar_path(path: &Path) -> std::path::PathBuf {
    let mut s = path.as_os_str().to_os_string();
    s.push(".json");
    s.into()
}

pub fn read_instance(path: &Path) -> Result<Instance<f64>> {
    let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    if bytes.len() < 16 || &bytes[0..8] != MAGIC {
        bail!("{} is not an instance file (bad magic)", path.display());
    }
    let version = u32::from_le_bytes(bytes[8..12].try_into().unwrap());
    if version != VERSION {
        bail!("unsupported instance format version {version}");
    }
    let header_len = u32::from_le_bytes(bytes[12..16].try_into().unwrap()) as usize;
    let header_end = 16 + header_len;
    if bytes.len() < header_end {
        bail!("truncated instance header");
    }
    let header = std::str::from_utf8(&bytes[16..header_end]).context("header is not ASCII")?;

    let mut d = None;
    let mut l = None;
    let mut delta = None;
    let mut seed = None;
    for token in header.split_whitespace() {
        let (key, value) = token
            .split_once('=')
            .with_context(|| format!("malformed header token {token}"))?;
        match key {
            "d" => d = Some(value.parse::<usize>()?),
            "L" => l = Some(value.parse::<usize>()?),
            "delta" => delta = Some(value.parse::<f64>()?),
            "seed" => seed = Some(value.parse::<u64>()?),
            _ => bail!("unknown header key {key}"),
        }
    }
    let (d, l, delta, seed) = (
        d.context("header missing d")?,
        l.context("header missing L")?,
        delta.context("header missing delta")?,
        seed.context("header missing seed")?,
    );

    let lattice = Lattice::new(d, l)?;
    let n = lattice.n_sites();
    let payload = &bytes[header_end..];
    if payload.len() != n * 8 {
        bail!(
            "expected {} angle bytes for {n} sites, found {}",
            n * 8,
            payload.len()
        );
    }
    let angles: Vec<f64> = payload
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    Ok(Instance::from_field_angles(lattice, delta, angles, seed)?)
}
