//! Plain-text tables and machine-readable sidecar records.

use std::path::Path;

use tscnn::eval::Metrics;

use crate::CliError;

pub fn fmt_opt(v: Option<f64>) -> String {
    v.map_or("  n/a".to_string(), |x| format!("{x:.3}"))
}

/// One row per evaluation mode, Table-style: accuracy, sensitivity,
/// specificity, MSE.
pub fn metrics_table(rows: &[(String, Metrics)]) -> String {
    let mut out = String::from("mode      n     accuracy  sensitivity  specificity  mse\n");
    for (name, m) in rows {
        out.push_str(&format!(
            "{:<8} {:>5}    {:.3}        {}        {}  {:.3}\n",
            name,
            m.confusion.total(),
            m.accuracy,
            fmt_opt(m.sensitivity),
            fmt_opt(m.specificity),
            m.mse
        ));
    }
    out
}

/// `mean±std` rows across folds.
pub fn cv_table(per_fold: &[Metrics]) -> String {
    let col = |f: &dyn Fn(&Metrics) -> Option<f64>| -> (f64, f64) {
        let vals: Vec<f64> = per_fold.iter().filter_map(f).collect();
        tscnn::eval::mean_std(&vals)
    };
    let (acc, acc_s) = col(&|m: &Metrics| Some(m.accuracy));
    let (sen, sen_s) = col(&|m: &Metrics| m.sensitivity);
    let (spe, spe_s) = col(&|m: &Metrics| m.specificity);
    let (mse, mse_s) = col(&|m: &Metrics| Some(m.mse));
    let mut out = String::from("metric       mean±std over folds\n");
    out.push_str(&format!("accuracy     {acc:.3} ± {acc_s:.3}\n"));
    out.push_str(&format!("sensitivity  {sen:.3} ± {sen_s:.3}\n"));
    out.push_str(&format!("specificity  {spe:.3} ± {spe_s:.3}\n"));
    out.push_str(&format!("mse          {mse:.3} ± {mse_s:.3}\n"));
    out
}

pub fn write_text(path: &Path, content: &str) -> Result<(), CliError> {
    std::fs::write(path, content)
        .map_err(|e| CliError::Io(format!("writing {}: {e}", path.display())))?;
    Ok(())
}

pub fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::Io(format!("serializing {}: {e}", path.display())))?;
    std::fs::write(path, text)
        .map_err(|e| CliError::Io(format!("writing {}: {e}", path.display())))?;
    Ok(())
}

/// Line-delimited per-epoch records.
pub fn write_history(path: &Path, history: &tscnn::train::TrainHistory) -> Result<(), CliError> {
    let mut out = String::new();
    for (i, train_loss) in history.train_loss.iter().enumerate() {
        let record = serde_json::json!({
            "epoch": i,
            "train_loss": train_loss,
            "val_loss": history.val_loss.get(i),
            "val_acc": history.val_accuracy.get(i),
        });
        out.push_str(&record.to_string());
        out.push('\n');
    }
    write_text(path, &out)
}
