//! Central finite-difference gradient verification.
//!
//! Only evaluates the supplied scalar function, so it stays independent of
//! the analytic backward pass it is used to check.

/// Central-difference gradient of `f` at `at`, one coordinate at a time.
pub fn central_difference<F: FnMut(&[f64]) -> f64>(mut f: F, at: &[f64], eps: f64) -> Vec<f64> {
    let mut theta = at.to_vec();
    let mut grad = vec![0.0; at.len()];
    for i in 0..at.len() {
        let orig = theta[i];
        theta[i] = orig + eps;
        let plus = f(&theta);
        theta[i] = orig - eps;
        let minus = f(&theta);
        theta[i] = orig;
        grad[i] = (plus - minus) / (2.0 * eps);
    }
    grad
}

/// Worst per-coordinate relative error between two gradient vectors.
///
/// The denominator is floored at 1e-4 so coordinates whose true gradient is
/// (near) zero compare absolutely instead of dividing by noise.
pub fn max_relative_error(analytic: &[f64], numeric: &[f64]) -> f64 {
    assert_eq!(analytic.len(), numeric.len(), "gradient length mismatch");
    analytic
        .iter()
        .zip(numeric.iter())
        .map(|(a, n)| (a - n).abs() / a.abs().max(n.abs()).max(1e-4))
        .fold(0.0, f64::max)
}
