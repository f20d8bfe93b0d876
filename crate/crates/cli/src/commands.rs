//! Subcommand implementations.

use std::path::Path;

use tscnn::data::{load_dataset, save_dataset, split_by_subject, synth_dataset};
use tscnn::dsp::{design_butterworth_bandpass, frequency_response, FilterSpec};
use tscnn::eval::{mean_std, paired_t_test, EvalError, Metrics};
use tscnn::interpret::{
    dump_features, save_feature_dump, weight_ratio, LayerTag, DEFAULT_THRESHOLDS,
};
use tscnn::nn::{load_checkpoint, save_checkpoint, Activation, ModelParams, Streams};
use tscnn::train::{
    build_eval_sets, build_training_set, cross_validate, evaluate, train, EvalSets, Preprocessor,
};

use crate::config::Resolved;
use crate::report;
use crate::CliError;

fn ensure_out_dir(out: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(out)
        .map_err(|e| CliError::Io(format!("creating {}: {e}", out.display())))
}

fn make_preprocessor(cfg: &Resolved, fs_hz: f64) -> Result<Preprocessor, CliError> {
    Ok(Preprocessor::new(
        tscnn::data::ChannelMontage::standard(),
        fs_hz,
        cfg.filter_mi,
        cfg.filter_ssvep,
    )?)
}

pub fn cmd_synth(cfg: &Resolved) -> Result<(), CliError> {
    ensure_out_dir(&cfg.out)?;
    let ds = synth_dataset(&cfg.synth, cfg.synth_subjects)?;
    let path = cfg.out.join("dataset.eegd");
    save_dataset(&ds, &path)?;
    println!(
        "wrote {} ({} trials, {} channels, {} samples/trial, fs {} Hz)",
        path.display(),
        ds.trials.len(),
        ds.channel_names.len(),
        ds.n_t(),
        ds.fs_hz
    );
    Ok(())
}

/// Evaluation rows appropriate for the model's stream arrangement.
fn eval_rows(
    params: &ModelParams,
    sets: &EvalSets,
) -> Result<Vec<(String, Metrics)>, CliError> {
    let mut rows = Vec::new();
    let streams = params.config.streams;
    if matches!(streams, Streams::Both | Streams::MiOnly) && !sets.mi.is_empty() {
        rows.push(("MI".to_string(), evaluate(params, &sets.mi)?));
    }
    if matches!(streams, Streams::Both | Streams::SsvepOnly) && !sets.ssvep.is_empty() {
        rows.push(("SSVEP".to_string(), evaluate(params, &sets.ssvep)?));
    }
    if streams == Streams::Both && !sets.hybrid.is_empty() {
        rows.push(("Hybrid".to_string(), evaluate(params, &sets.hybrid)?));
    }
    if rows.is_empty() {
        return Err(CliError::Data("no evaluation samples for this model's modes".into()));
    }
    Ok(rows)
}

/// Stratified 90/10 split used for early stopping when no CV is requested.
fn single_split(
    samples: &[tscnn::data::StreamPair],
    seed: u64,
) -> Result<(Vec<tscnn::data::StreamPair>, Vec<tscnn::data::StreamPair>), CliError> {
    let labels: Vec<u8> = samples.iter().map(|s| s.label).collect();
    let folds = tscnn::data::kfold_labels(&labels, 10, seed)?;
    let (tr, va) = &folds[0];
    Ok((
        tr.iter().map(|&i| samples[i].clone()).collect(),
        va.iter().map(|&i| samples[i].clone()).collect(),
    ))
}

#[derive(serde::Serialize)]
struct TrainReportRecord {
    strategy: String,
    seed: u64,
    epochs_run: usize,
    chosen_epoch: usize,
    final_train_loss: Option<f64>,
    best_val_loss: Option<f64>,
    cv_accuracy_mean: Option<f64>,
    cv_accuracy_std: Option<f64>,
    test: Vec<(String, Metrics)>,
}

pub fn cmd_train(cfg: &Resolved, data: &Path) -> Result<(), CliError> {
    ensure_out_dir(&cfg.out)?;
    let ds = load_dataset(data)?;
    let (train_ds, test_ds) = split_by_subject(&ds, cfg.train_subjects, cfg.seed)?;
    let pre = make_preprocessor(cfg, f64::from(ds.fs_hz))?;
    let samples = build_training_set(cfg.train.strategy, &train_ds, &pre)?;

    let mut cv_summary = None;
    if cfg.folds >= 2 {
        let cv = cross_validate(&cfg.train, &samples, cfg.folds)?;
        let accs = cv.accuracies();
        let (mean, std) = mean_std(&accs);
        cv_summary = Some((mean, std));
        let table = report::cv_table(&cv.per_fold);
        print!("{table}");
        report::write_text(&cfg.out.join("cv_report.txt"), &table)?;
        report::write_json(&cfg.out.join("cv_report.json"), &cv.per_fold)?;
    }

    let (train_samples, val_samples) = single_split(&samples, cfg.seed)?;
    let (params, history) = train(&cfg.train, &train_samples, &val_samples)?;
    save_checkpoint(&params, &cfg.out.join("checkpoint.json"))?;
    report::write_history(&cfg.out.join("history.jsonl"), &history)?;

    let test_rows = if test_ds.trials.is_empty() {
        Vec::new()
    } else {
        let sets = build_eval_sets(&test_ds, &pre, cfg.eval_zero_streams)?;
        eval_rows(&params, &sets)?
    };

    let mut table = format!(
        "strategy {}  seed {}  epochs {}  chosen {}\n",
        cfg.train.strategy,
        cfg.seed,
        history.train_loss.len(),
        history.chosen_epoch
    );
    if let Some((mean, std)) = cv_summary {
        table.push_str(&format!("cv accuracy {mean:.3} ± {std:.3} over {} folds\n", cfg.folds));
    }
    if test_rows.is_empty() {
        table.push_str("no held-out subjects: test metrics skipped\n");
    } else {
        table.push_str(&report::metrics_table(&test_rows));
    }
    print!("{table}");
    report::write_text(&cfg.out.join("train_report.txt"), &table)?;
    let record = TrainReportRecord {
        strategy: cfg.train.strategy.to_string(),
        seed: cfg.seed,
        epochs_run: history.train_loss.len(),
        chosen_epoch: history.chosen_epoch,
        final_train_loss: history.train_loss.last().copied(),
        best_val_loss: history
            .val_loss
            .get(history.chosen_epoch)
            .copied()
            .or_else(|| history.val_loss.last().copied()),
        cv_accuracy_mean: cv_summary.map(|(m, _)| m),
        cv_accuracy_std: cv_summary.map(|(_, s)| s),
        test: test_rows,
    };
    report::write_json(&cfg.out.join("train_report.json"), &record)?;
    Ok(())
}

pub fn cmd_eval(cfg: &Resolved, checkpoint: &Path, data: &Path) -> Result<(), CliError> {
    ensure_out_dir(&cfg.out)?;
    let params = load_checkpoint(checkpoint)?;
    let mut ds = load_dataset(data)?;
    // with a configured training split, evaluate the held-out complement,
    // mirroring the split the train command used under the same seed
    if let Some(n) = cfg.train_subjects_explicit {
        let (_, test_ds) = split_by_subject(&ds, n, cfg.seed)?;
        ds = test_ds;
    }
    if ds.trials.is_empty() {
        return Err(CliError::Data("evaluation dataset holds no trials".into()));
    }
    if ds.n_t() != params.config.n_t {
        return Err(CliError::Data(format!(
            "dataset has {} samples per trial but the checkpoint expects N_t = {}",
            ds.n_t(),
            params.config.n_t
        )));
    }
    let pre = make_preprocessor(cfg, f64::from(ds.fs_hz))?;
    let sets = build_eval_sets(&ds, &pre, cfg.eval_zero_streams)?;
    let rows = eval_rows(&params, &sets)?;
    let table = report::metrics_table(&rows);
    print!("{table}");
    report::write_text(&cfg.out.join("eval_report.txt"), &table)?;
    report::write_json(&cfg.out.join("eval_report.json"), &rows)?;
    Ok(())
}

#[derive(Debug, Clone)]
pub struct SweepGrid {
    pub dropout: Vec<f64>,
    pub activation: Vec<Activation>,
    pub fc_dim: Vec<usize>,
    pub kernels: Vec<(usize, usize)>,
}

#[derive(serde::Serialize)]
struct SweepCell {
    label: String,
    dropout: f64,
    activation: String,
    fc_dim: usize,
    kernels: (usize, usize),
    cv_accuracy_mean: f64,
    cv_accuracy_std: f64,
    per_fold_accuracy: Vec<f64>,
    test: Vec<(String, Metrics)>,
}

#[derive(serde::Serialize)]
struct SweepPair {
    a: String,
    b: String,
    t_statistic: Option<f64>,
    p_value: Option<f64>,
    note: Option<String>,
}

pub fn cmd_sweep(cfg: &Resolved, data: &Path, grid: &SweepGrid) -> Result<(), CliError> {
    ensure_out_dir(&cfg.out)?;
    let ds = load_dataset(data)?;
    let (train_ds, test_ds) = split_by_subject(&ds, cfg.train_subjects, cfg.seed)?;
    let pre = make_preprocessor(cfg, f64::from(ds.fs_hz))?;
    let folds = if cfg.folds >= 2 { cfg.folds } else { 10 };

    let mut cells = Vec::new();
    for &dropout in &grid.dropout {
        for &activation in &grid.activation {
            for &fc_dim in &grid.fc_dim {
                for &kernels in &grid.kernels {
                    let mut config = cfg.train;
                    config.dropout_rate = dropout;
                    config.activation = activation;
                    config.fc_dim = fc_dim;
                    config.spatial_kernels = kernels.0;
                    config.temporal_kernels = kernels.1;
                    let label = format!(
                        "dropout={dropout} act={activation} d={fc_dim} k=({},{})",
                        kernels.0, kernels.1
                    );
                    let samples = build_training_set(config.strategy, &train_ds, &pre)?;
                    let cv = cross_validate(&config, &samples, folds)?;
                    let accs = cv.accuracies();
                    let (mean, std) = mean_std(&accs);

                    let (tr, va) = single_split(&samples, cfg.seed)?;
                    let (params, _) = train(&config, &tr, &va)?;
                    let test = if test_ds.trials.is_empty() {
                        Vec::new()
                    } else {
                        let sets = build_eval_sets(&test_ds, &pre, cfg.eval_zero_streams)?;
                        eval_rows(&params, &sets)?
                    };
                    cells.push(SweepCell {
                        label,
                        dropout,
                        activation: activation.to_string(),
                        fc_dim,
                        kernels,
                        cv_accuracy_mean: mean,
                        cv_accuracy_std: std,
                        per_fold_accuracy: accs,
                        test,
                    });
                }
            }
        }
    }

    let mut table = String::from("cell                                      cv accuracy     MI    SSVEP  Hybrid\n");
    for c in &cells {
        let mode_acc = |name: &str| {
            c.test
                .iter()
                .find(|(n, _)| n == name)
                .map_or("  n/a".to_string(), |(_, m)| format!("{:.3}", m.accuracy))
        };
        table.push_str(&format!(
            "{:<40}  {:.3} ± {:.3}  {}  {}  {}\n",
            c.label,
            c.cv_accuracy_mean,
            c.cv_accuracy_std,
            mode_acc("MI"),
            mode_acc("SSVEP"),
            mode_acc("Hybrid"),
        ));
    }

    let mut pairs = Vec::new();
    table.push_str("\npaired t-tests on per-fold accuracies\n");
    for i in 0..cells.len() {
        for j in i + 1..cells.len() {
            let line;
            let pair = match paired_t_test(&cells[i].per_fold_accuracy, &cells[j].per_fold_accuracy)
            {
                Ok(r) => {
                    line = format!(
                        "{} vs {}: t={:.4} p={:.4e}\n",
                        cells[i].label, cells[j].label, r.t_statistic, r.p_value
                    );
                    SweepPair {
                        a: cells[i].label.clone(),
                        b: cells[j].label.clone(),
                        t_statistic: Some(r.t_statistic),
                        p_value: Some(r.p_value),
                        note: None,
                    }
                }
                Err(EvalError::DegenerateInput) => {
                    line = format!(
                        "{} vs {}: degenerate (identical per-fold accuracies)\n",
                        cells[i].label, cells[j].label
                    );
                    SweepPair {
                        a: cells[i].label.clone(),
                        b: cells[j].label.clone(),
                        t_statistic: None,
                        p_value: None,
                        note: Some("degenerate: zero-variance differences".into()),
                    }
                }
                Err(e) => return Err(e.into()),
            };
            table.push_str(&line);
            pairs.push(pair);
        }
    }

    print!("{table}");
    report::write_text(&cfg.out.join("sweep_report.txt"), &table)?;
    report::write_json(&cfg.out.join("sweep_report.json"), &serde_json::json!({
        "cells": cells,
        "pairs": pairs,
    }))?;
    Ok(())
}

pub fn cmd_interpret(
    cfg: &Resolved,
    checkpoint: &Path,
    thresholds: Option<Vec<f64>>,
) -> Result<(), CliError> {
    ensure_out_dir(&cfg.out)?;
    let params = load_checkpoint(checkpoint)?;
    let thresholds = thresholds.unwrap_or_else(|| DEFAULT_THRESHOLDS.to_vec());
    let report_data = weight_ratio(&params, &thresholds)?;
    let table = report_data.to_table();
    print!("{table}");
    report::write_text(&cfg.out.join("weight_ratio.txt"), &table)?;
    report::write_json(&cfg.out.join("weight_ratio.json"), &report_data)?;
    Ok(())
}

pub fn cmd_dump_features(
    cfg: &Resolved,
    checkpoint: &Path,
    data: &Path,
    layer: &str,
    mode: &str,
) -> Result<(), CliError> {
    ensure_out_dir(&cfg.out)?;
    let tag = LayerTag::parse(layer)?;
    let params = load_checkpoint(checkpoint)?;
    let ds = load_dataset(data)?;
    let pre = make_preprocessor(cfg, f64::from(ds.fs_hz))?;
    let sets = build_eval_sets(&ds, &pre, cfg.eval_zero_streams)?;
    let samples = match mode {
        "mi" => &sets.mi,
        "ssvep" => &sets.ssvep,
        "hybrid" => &sets.hybrid,
        other => return Err(CliError::Config(format!("unknown mode '{other}' (mi|ssvep|hybrid)"))),
    };
    if samples.is_empty() {
        return Err(CliError::Data(format!("dataset yields no {mode}-mode samples")));
    }
    let dump = dump_features(&params, samples, tag)?;
    let path = cfg.out.join(format!("features_{tag}.feat"));
    save_feature_dump(&dump, &path)?;
    println!("wrote {} ({} trials × {} values)", path.display(), dump.features.len(), dump.dim);
    Ok(())
}

pub fn cmd_filter_check(
    out: &Path,
    order: usize,
    low_hz: f64,
    high_hz: f64,
    fs_hz: f64,
) -> Result<(), CliError> {
    ensure_out_dir(out)?;
    let spec = FilterSpec::new(order, low_hz, high_hz, fs_hz)?;
    let coeffs = design_butterworth_bandpass(&spec)?;
    let mut table = format!(
        "Butterworth bandpass: order {order}, {low_hz}-{high_hz} Hz at fs {fs_hz} Hz\n\
         sections: {}   stable: {}   overall gain: {:.6e}\n\n",
        coeffs.sections.len(),
        coeffs.is_stable(),
        coeffs.overall_gain
    );
    table.push_str("section       b0        b1        b2        a1        a2\n");
    for (i, s) in coeffs.sections.iter().enumerate() {
        table.push_str(&format!(
            "{i:>7}  {:>8.4}  {:>8.4}  {:>8.4}  {:>8.4}  {:>8.4}\n",
            s.b0, s.b1, s.b2, s.a1, s.a2
        ));
    }
    table.push_str("\nfreq_hz   |H| single-pass   dB single-pass   dB zero-phase\n");
    let nyquist = fs_hz / 2.0;
    let grid = [
        0.0, 0.5, 1.0, 2.0, 4.0, 6.0, low_hz, 10.0, 15.0, 19.0, 25.0, high_hz, 40.0, 60.0, 100.0,
        200.0,
    ];
    for &f in grid.iter().filter(|&&f| f <= nyquist) {
        let h = frequency_response(&coeffs, f, fs_hz)?.norm();
        let (db1, db2) = if h > 0.0 {
            (20.0 * h.log10(), 40.0 * h.log10())
        } else {
            (f64::NEG_INFINITY, f64::NEG_INFINITY)
        };
        table.push_str(&format!("{f:>7.2}   {h:>15.6e}   {db1:>14.2}   {db2:>13.2}\n"));
    }
    print!("{table}");
    report::write_text(&out.join("filter_check.txt"), &table)?;
    Ok(())
}
