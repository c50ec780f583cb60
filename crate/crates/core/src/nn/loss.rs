use crate::error::{ensure_len, usage, Result};

/// Mean squared error and its gradient `2 (p - t) / n` with respect to `pred`.
pub fn mse_loss_and_grad(pred: &[f64], target: &[f64]) -> Result<(f64, Vec<f64>)> {
    ensure_len("mse target", target.len(), pred.len())?;
    if pred.is_empty() {
        return Err(usage("mse of an empty vector"));
    }
    let n = pred.len() as f64;
    let mut loss = 0.0;
    let grad = pred
        .iter()
        .zip(target)
        .map(|(p, t)| {
            let r = p - t;
            loss += r * r;
            2.0 * r / n
        })
        .collect();
    Ok((loss / n, grad))
}
