use crate::error::{Error, Result};

/// Fraction of positives scored strictly above the `k`-th highest negative.
pub fn hits_at_k(pos_scores: &[f64], neg_scores: &[f64], k: usize) -> Result<f64> {
    if k == 0 {
        return Err(Error::input("hits@k needs k >= 1"));
    }
    if neg_scores.len() < k {
        return Err(Error::input(format!(
            "hits@{k} needs at least {k} negative scores, got {}",
            neg_scores.len()
        )));
    }
    if pos_scores.is_empty() {
        return Err(Error::input("hits@k needs at least one positive score"));
    }
    let mut neg = neg_scores.to_vec();
    // Partial selection: the k-th largest ends up at index k - 1.
    neg.select_nth_unstable_by(k - 1, |a, b| b.total_cmp(a));
    let threshold = neg[k - 1];
    let above = pos_scores.iter().filter(|&&s| s > threshold).count();
    Ok(above as f64 / pos_scores.len() as f64)
}

/// Exact-match fraction.
pub fn accuracy(pred: &[usize], truth: &[usize]) -> Result<f64> {
    if pred.len() != truth.len() {
        return Err(Error::input("prediction and label lengths differ"));
    }
    if pred.is_empty() {
        return Err(Error::input("accuracy of zero predictions"));
    }
    let hits = pred.iter().zip(truth).filter(|(a, b)| a == b).count();
    Ok(hits as f64 / pred.len() as f64)
}
