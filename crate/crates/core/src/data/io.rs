//! The `EEGD` binary dataset format (little-endian).
//!
//! Layout:
//!
//! ```text
//! magic    4 bytes  "EEGD"
//! version  u32      1
//! fs_hz    f32
//! n_trials u32
//! n_ch     u16
//! n_t      u32
//! names    n_ch × { len u8, UTF-8 bytes }
//! trials   n_trials × { label u8, mode u8, subject_id u16,
//!                       data n_ch·n_t × f32 row-major }
//! ```

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use ndarray::Array2;

use super::{DataError, Dataset, Mode, Trial};

const MAGIC: [u8; 4] = *b"EEGD";
const VERSION: u32 = 1;

pub fn save_dataset(ds: &Dataset, path: &Path) -> Result<(), DataError> {
    ds.validate()?;
    let n_ch = ds.channel_names.len();
    if n_ch > u16::MAX as usize {
        return Err(DataError::DimensionOverflow(format!("{n_ch} channels exceed u16")));
    }
    let n_t = ds.n_t();
    if n_t > u32::MAX as usize {
        return Err(DataError::DimensionOverflow(format!("{n_t} samples exceed u32")));
    }
    if ds.trials.len() > u32::MAX as usize {
        return Err(DataError::DimensionOverflow(format!(
            "{} trials exceed u32",
            ds.trials.len()
        )));
    }
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(&MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&ds.fs_hz.to_le_bytes())?;
    w.write_all(&(ds.trials.len() as u32).to_le_bytes())?;
    w.write_all(&(n_ch as u16).to_le_bytes())?;
    w.write_all(&(n_t as u32).to_le_bytes())?;
    for name in &ds.channel_names {
        let bytes = name.as_bytes();
        if bytes.len() > u8::MAX as usize {
            return Err(DataError::DimensionOverflow(format!(
                "channel name '{name}' longer than 255 bytes"
            )));
        }
        w.write_all(&[bytes.len() as u8])?;
        w.write_all(bytes)?;
    }
    for t in &ds.trials {
        w.write_all(&[t.label, t.mode.to_u8()])?;
        w.write_all(&t.subject_id.to_le_bytes())?;
        for v in t.data.iter() {
            w.write_all(&v.to_le_bytes())?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn load_dataset(path: &Path) -> Result<Dataset, DataError> {
    let mut r = BufReader::new(File::open(path)?);

    let magic = read_array::<4>(&mut r, "magic")?;
    if magic != MAGIC {
        return Err(DataError::BadMagic(magic));
    }
    let version = u32::from_le_bytes(read_array(&mut r, "version")?);
    if version != VERSION {
        return Err(DataError::UnsupportedVersion(version));
    }
    let fs_hz = f32::from_le_bytes(read_array(&mut r, "fs_hz")?);
    let n_trials = u32::from_le_bytes(read_array(&mut r, "n_trials")?) as usize;
    let n_ch = u16::from_le_bytes(read_array(&mut r, "n_ch")?) as usize;
    let n_t = u32::from_le_bytes(read_array(&mut r, "n_t")?) as usize;
    n_ch.checked_mul(n_t)
        .and_then(|v| v.checked_mul(4))
        .ok_or_else(|| DataError::DimensionOverflow(format!("{n_ch} × {n_t} trial matrix")))?;

    let mut channel_names = Vec::with_capacity(n_ch);
    for i in 0..n_ch {
        let len = read_array::<1>(&mut r, "channel name length")?[0] as usize;
        let mut buf = vec![0u8; len];
        r.read_exact(&mut buf)
            .map_err(|_| DataError::Truncated(format!("channel name {i}")))?;
        let name = String::from_utf8(buf)
            .map_err(|_| DataError::InvalidField(format!("channel name {i} is not UTF-8")))?;
        channel_names.push(name);
    }

    let mut trials = Vec::with_capacity(n_trials);
    let mut sample_buf = vec![0u8; n_ch * n_t * 4];
    for i in 0..n_trials {
        let head = read_array::<4>(&mut r, &format!("trial {i} header"))?;
        let label = head[0];
        if label > 1 {
            return Err(DataError::InvalidField(format!("trial {i} label {label}")));
        }
        let mode = Mode::from_u8(head[1])
            .ok_or_else(|| DataError::InvalidField(format!("trial {i} mode byte {}", head[1])))?;
        let subject_id = u16::from_le_bytes([head[2], head[3]]);
        r.read_exact(&mut sample_buf)
            .map_err(|_| DataError::Truncated(format!("trial {i} samples")))?;
        let values: Vec<f32> = sample_buf
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
            .collect();
        let data = Array2::from_shape_vec((n_ch, n_t), values)
            .expect("shape matches buffer length by construction");
        trials.push(Trial { data, label, subject_id, mode });
    }

    // Anything left over means the header lied about the trial count.
    let mut probe = [0u8; 1];
    if r.read(&mut probe)? != 0 {
        return Err(DataError::InvalidField("trailing bytes after last trial".into()));
    }

    Dataset::new(trials, fs_hz, channel_names)
}

fn read_array<const N: usize>(r: &mut impl Read, what: &str) -> Result<[u8; N], DataError> {
    let mut buf = [0u8; N];
    r.read_exact(&mut buf)
        .map_err(|_| DataError::Truncated(what.to_string()))?;
    Ok(buf)
}
