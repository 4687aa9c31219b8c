//! Krippendorff's α with the interval difference function.

use alloc::format;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct AgreementResult {
    pub alpha: f64,
    pub rater_count: usize,
    /// Items with at least two ratings, the only ones that count.
    pub item_count: usize,
}

/// α = 1 − D_o/D_e over an item × rater matrix; `None` cells are missing.
///
/// Uses the coincidence-matrix form with δ(a, b) = (a − b)². Sums over
/// ordered value pairs are computed as 2(m·Σv² − (Σv)²).
pub fn krippendorff_alpha<R: AsRef<[Option<f64>]>>(ratings: &[R]) -> Result<AgreementResult> {
    let mut n_total = 0.0;
    let mut observed = 0.0;
    let (mut sum, mut sum_sq) = (0.0, 0.0);
    let mut items = 0;
    let mut raters = 0;
    for row in ratings {
        let row = row.as_ref();
        raters = raters.max(row.len());
        let values = row.iter().flatten();
        let (m, s, s2) = values.fold((0usize, 0.0, 0.0), |(m, s, s2), &v| {
            (m + 1, s + v, s2 + v * v)
        });
        if m < 2 {
            continue;
        }
        if let Some(bad) = row.iter().flatten().find(|v| !v.is_finite()) {
            return Err(Error::Invalid(format!("rating {bad} is not finite")));
        }
        let mf = m as f64;
        observed += 2.0 * (mf * s2 - s * s) / (mf - 1.0);
        n_total += mf;
        sum += s;
        sum_sq += s2;
        items += 1;
    }
    if items < 2 {
        return Err(Error::InsufficientData(format!(
            "{items} item(s) with ≥ 2 ratings; need 2"
        )));
    }
    let d_o = observed / n_total;
    let d_e = 2.0 * (n_total * sum_sq - sum * sum) / (n_total * (n_total - 1.0));
    if d_e <= 0.0 {
        return Err(Error::InsufficientData(
            "all ratings share one value".into(),
        ));
    }
    Ok(AgreementResult {
        alpha: 1.0 - d_o / d_e,
        rater_count: raters,
        item_count: items,
    })
}
