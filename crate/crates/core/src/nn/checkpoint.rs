//! Self-describing checkpoint files.
//!
//! A checkpoint is a JSON document carrying a format version, the
//! architecture config, and every parameter array (including batch-norm
//! running statistics). Floats are written in shortest round-trip decimal
//! form, so save → load reproduces each 64-bit value exactly.

use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::Path;

use super::{ModelParams, NnError};

pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(serde::Serialize, serde::Deserialize)]
struct CheckpointFile {
    format_version: u32,
    model: ModelParams,
}

pub fn save_checkpoint(params: &ModelParams, path: &Path) -> Result<(), NnError> {
    let file = CheckpointFile { format_version: CHECKPOINT_VERSION, model: params.clone() };
    let writer = BufWriter::new(File::create(path)?);
    serde_json::to_writer(writer, &file)?;
    Ok(())
}

pub fn load_checkpoint(path: &Path) -> Result<ModelParams, NnError> {
    let reader = BufReader::new(File::open(path)?);
    let file: CheckpointFile = serde_json::from_reader(reader)?;
    if file.format_version != CHECKPOINT_VERSION {
        return Err(NnError::CheckpointVersion(file.format_version));
    }
    validate_shapes(&file.model)?;
    Ok(file.model)
}

fn validate_shapes(params: &ModelParams) -> Result<(), NnError> {
    let cfg = &params.config;
    cfg.validate().map_err(|e| NnError::CheckpointShape(e.to_string()))?;
    let check = |ok: bool, what: &str| {
        if ok {
            Ok(())
        } else {
            Err(NnError::CheckpointShape(what.to_string()))
        }
    };
    check(params.mi_block.is_some() == cfg.uses_mi(), "MI block presence")?;
    check(params.ssvep_block.is_some() == cfg.uses_ssvep(), "SSVEP block presence")?;
    for (block, n_ch, name) in [
        (&params.mi_block, cfg.mi_channels, "MI"),
        (&params.ssvep_block, cfg.ssvep_channels, "SSVEP"),
    ] {
        if let Some(b) = block {
            check(
                b.spatial_weights.dim() == (cfg.spatial_kernels, n_ch)
                    && b.spatial_bias.len() == cfg.spatial_kernels
                    && b.temporal_weights.dim()
                        == (cfg.temporal_kernels, cfg.spatial_kernels, super::TEMPORAL_KERNEL_WIDTH)
                    && b.temporal_bias.len() == cfg.temporal_kernels,
                &format!("{name} block dimensions"),
            )?;
        }
    }
    check(params.fc_hidden.is_some() == (cfg.fc_dim > 0), "hidden layer presence")?;
    check(params.bn.is_some() == (cfg.fc_dim > 0), "batch norm presence")?;
    if let Some(fc) = &params.fc_hidden {
        check(
            fc.weights.dim() == (cfg.concat_len(), cfg.fc_dim) && fc.bias.len() == cfg.fc_dim,
            "hidden layer dimensions",
        )?;
    }
    if let Some(bn) = &params.bn {
        check(
            bn.gamma.len() == cfg.fc_dim
                && bn.beta.len() == cfg.fc_dim
                && bn.running_mean.len() == cfg.fc_dim
                && bn.running_var.len() == cfg.fc_dim,
            "batch norm dimensions",
        )?;
    }
    check(params.fc_out_weights.len() == cfg.head_in(), "output layer dimensions")?;
    check(
        params.to_flat().iter().all(|v| v.is_finite()),
        "non-finite parameter values",
    )?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::ModelConfig;
    use rand::{Rng, SeedableRng};

    fn random_params(seed: u64) -> ModelParams {
        let mut config = ModelConfig::two_stream(24);
        config.fc_dim = 5;
        let mut params = ModelParams::zeros(config).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        // adversarial values: denormal-ish, huge, tiny, negative zero
        let flat: Vec<f64> = (0..params.n_learnable())
            .map(|i| match i % 5 {
                0 => rng.gen_range(-1.0..1.0),
                1 => rng.gen::<f64>() * 1e-300,
                2 => -rng.gen::<f64>() * 1e17,
                3 => f64::from_bits(rng.gen::<u64>() % (1u64 << 52)), // subnormals
                _ => rng.gen_range(-1e-9..1e-9),
            })
            .collect();
        params.assign_flat(&flat);
        if let Some(bn) = &mut params.bn {
            bn.running_mean[2] = 0.12345678901234568;
            bn.running_var[1] = 1e-13;
        }
        params
    }

    #[test]
    fn round_trip_is_bit_faithful() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.ckpt");
        let params = random_params(31);
        save_checkpoint(&params, &path).unwrap();
        let loaded = load_checkpoint(&path).unwrap();
        assert_eq!(params, loaded);
        let flat_a = params.to_flat();
        let flat_b = loaded.to_flat();
        for (a, b) in flat_a.iter().zip(flat_b.iter()) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn version_mismatch_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.ckpt");
        let params = random_params(32);
        save_checkpoint(&params, &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let bumped = text.replace("\"format_version\":1", "\"format_version\":99");
        std::fs::write(&path, bumped).unwrap();
        match load_checkpoint(&path) {
            Err(NnError::CheckpointVersion(99)) => {}
            other => panic!("expected CheckpointVersion, got {other:?}"),
        }
    }

    #[test]
    fn inconsistent_shapes_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.ckpt");
        let mut params = random_params(33);
        params.fc_out_weights = ndarray::Array1::zeros(3); // wrong width
        save_checkpoint(&params, &path).unwrap();
        match load_checkpoint(&path) {
            Err(NnError::CheckpointShape(_)) => {}
            other => panic!("expected CheckpointShape, got {other:?}"),
        }
    }
}
