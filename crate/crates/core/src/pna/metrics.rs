// SPDX-License-Identifier: Apache-2.0

use super::PnaError;

fn check_lengths(y: &[f64], yhat: &[f64]) -> Result<(), PnaError> {
    if y.len() != yhat.len() || y.is_empty() {
        return Err(PnaError::LengthMismatch {
            expected: y.len(),
            actual: yhat.len(),
        });
    }
    Ok(())
}

/// Mean absolute error.
pub fn mae(y: &[f64], yhat: &[f64]) -> Result<f64, PnaError> {
    check_lengths(y, yhat)?;
    Ok(y.iter().zip(yhat).map(|(a, b)| (a - b).abs()).sum::<f64>() / y.len() as f64)
}

/// Mean absolute percentage error, in percent.
pub fn mape(y: &[f64], yhat: &[f64]) -> Result<f64, PnaError> {
    check_lengths(y, yhat)?;
    if let Some(i) = y.iter().position(|&v| v == 0.0) {
        return Err(PnaError::ZeroTrueValue(i));
    }
    let sum: f64 = y.iter().zip(yhat).map(|(a, b)| ((a - b) / a).abs()).sum();
    Ok(100.0 * sum / y.len() as f64)
}
