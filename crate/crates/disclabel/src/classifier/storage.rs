//! Model directory layout: `config.json`, `vocab.txt`, `labels.json`,
//! `weights.bin`, `metadata.json`.
//!
//! The weights blob is `DLBW` + version, then named tensors in the fixed
//! encoder layout, little-endian f64.

use std::fs;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use ndarray::Array2;

use super::encoder::EncoderParams;
use super::wordpiece::WordPiece;
use super::{encoder_spec, ClassifierConfig, TrainingMetadata};
use crate::error::{Error, Result};

const MAGIC: &[u8; 4] = b"DLBW";
const VERSION: u32 = 1;

pub const CONFIG_FILE: &str = "config.json";
pub const VOCAB_FILE: &str = "vocab.txt";
pub const LABELS_FILE: &str = "labels.json";
pub const WEIGHTS_FILE: &str = "weights.bin";
pub const METADATA_FILE: &str = "metadata.json";

pub fn save_model(
    dir: &Path,
    config: &ClassifierConfig,
    tokenizer: &WordPiece,
    params: &EncoderParams,
    metadata: &TrainingMetadata,
) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    write_json(&dir.join(CONFIG_FILE), config)?;
    tokenizer.save(dir.join(VOCAB_FILE))?;
    let labels: Vec<&str> = config.task.labels().to_vec();
    write_json(&dir.join(LABELS_FILE), &labels)?;
    write_json(&dir.join(METADATA_FILE), metadata)?;
    write_weights(&dir.join(WEIGHTS_FILE), params)
}

pub fn load_model(
    dir: &Path,
) -> Result<(ClassifierConfig, WordPiece, EncoderParams, TrainingMetadata)> {
    let config: ClassifierConfig = read_json(&dir.join(CONFIG_FILE))?;
    config.validate()?;
    let tokenizer = WordPiece::load(dir.join(VOCAB_FILE))?;
    let labels: Vec<String> = read_json(&dir.join(LABELS_FILE))?;
    let expected: Vec<&str> = config.task.labels().to_vec();
    if labels != expected {
        return Err(Error::Model(format!(
            "label file lists {labels:?} but the {} task uses {expected:?}",
            config.task.as_str()
        )));
    }
    let metadata: TrainingMetadata = read_json(&dir.join(METADATA_FILE))?;
    let params = read_weights(
        &dir.join(WEIGHTS_FILE),
        &config,
        tokenizer.vocab_size(),
        labels.len(),
    )?;
    Ok((config, tokenizer, params, metadata))
}

fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<()> {
    let json = serde_json::to_string_pretty(value)
        .map_err(|e| Error::Model(format!("cannot serialize {}: {e}", path.display())))?;
    fs::write(path, json + "\n").map_err(|e| Error::io(path, e))
}

fn read_json<T: for<'de> serde::Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::parse(path, e.line(), e.to_string()))
}

fn write_weights(path: &Path, params: &EncoderParams) -> Result<()> {
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    let io_err = |e| Error::io(path, e);

    out.write_all(MAGIC).map_err(io_err)?;
    out.write_all(&VERSION.to_le_bytes()).map_err(io_err)?;
    let names = params.tensor_names();
    out.write_all(&(names.len() as u32).to_le_bytes()).map_err(io_err)?;
    for (name, tensor) in names.iter().zip(&params.tensors) {
        out.write_all(&(name.len() as u32).to_le_bytes()).map_err(io_err)?;
        out.write_all(name.as_bytes()).map_err(io_err)?;
        out.write_all(&(tensor.nrows() as u32).to_le_bytes()).map_err(io_err)?;
        out.write_all(&(tensor.ncols() as u32).to_le_bytes()).map_err(io_err)?;
        for &v in tensor.iter() {
            out.write_all(&v.to_le_bytes()).map_err(io_err)?;
        }
    }
    out.flush().map_err(io_err)
}

fn read_weights(
    path: &Path,
    config: &ClassifierConfig,
    vocab_size: usize,
    n_labels: usize,
) -> Result<EncoderParams> {
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut input = BufReader::new(file);
    let bad = |msg: String| Error::Model(format!("{}: {msg}", path.display()));

    let mut magic = [0u8; 4];
    read_exact(&mut input, &mut magic, path)?;
    if &magic != MAGIC {
        return Err(bad("not a weights file (bad magic)".into()));
    }
    let version = read_u32(&mut input, path)?;
    if version != VERSION {
        return Err(bad(format!("unsupported weights version {version}")));
    }

    let spec = encoder_spec(&config.encoder_name)?;
    let mut params = {
        // Shape template; contents are overwritten below.
        let mut rng = rand::SeedableRng::seed_from_u64(0);
        EncoderParams::init(spec, vocab_size, n_labels, &mut rng)?
    };
    let expected_names = params.tensor_names();

    let count = read_u32(&mut input, path)? as usize;
    if count != expected_names.len() {
        return Err(bad(format!(
            "{count} tensors but the {} architecture has {}",
            config.encoder_name,
            expected_names.len()
        )));
    }
    for (i, expected_name) in expected_names.iter().enumerate() {
        let name_len = read_u32(&mut input, path)? as usize;
        let mut name_bytes = vec![0u8; name_len];
        read_exact(&mut input, &mut name_bytes, path)?;
        let name = String::from_utf8(name_bytes)
            .map_err(|_| bad("tensor name is not UTF-8".into()))?;
        if &name != expected_name {
            return Err(bad(format!(
                "tensor {i} is {name:?}, expected {expected_name:?}"
            )));
        }
        let rows = read_u32(&mut input, path)? as usize;
        let cols = read_u32(&mut input, path)? as usize;
        if (rows, cols) != params.tensors[i].dim() {
            return Err(bad(format!(
                "tensor {name:?} is {rows}x{cols}, expected {:?}",
                params.tensors[i].dim()
            )));
        }
        let mut data = vec![0f64; rows * cols];
        let mut buf = [0u8; 8];
        for v in &mut data {
            read_exact(&mut input, &mut buf, path)?;
            *v = f64::from_le_bytes(buf);
        }
        params.tensors[i] = Array2::from_shape_vec((rows, cols), data)
            .expect("shape matches data length");
    }
    Ok(params)
}

fn read_exact(input: &mut impl Read, buf: &mut [u8], path: &Path) -> Result<()> {
    input.read_exact(buf).map_err(|e| Error::io(path, e))
}

fn read_u32(input: &mut impl Read, path: &Path) -> Result<u32> {
    let mut buf = [0u8; 4];
    read_exact(input, &mut buf, path)?;
    Ok(u32::from_le_bytes(buf))
}
