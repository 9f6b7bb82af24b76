//! Central finite differences, the gradient oracle used throughout the tests.

/// `(f(theta + h e_i) - f(theta - h e_i)) / 2h` for every coordinate.
///
/// Independent of the backpropagation path: only evaluates `f`.
pub fn finite_difference_gradient<F>(mut f: F, theta: &[f64], step: f64) -> Vec<f64>
where
    F: FnMut(&[f64]) -> f64,
{
    assert!(step > 0.0, "step must be positive");
    let mut work = theta.to_vec();
    let mut grad = Vec::with_capacity(theta.len());
    for i in 0..theta.len() {
        let orig = work[i];
        work[i] = orig + step;
        let plus = f(&work);
        work[i] = orig - step;
        let minus = f(&work);
        work[i] = orig;
        grad.push((plus - minus) / (2.0 * step));
    }
    grad
}

/// Elementwise comparison score: `|a - b| / max(|a|, |b|, floor)`.
///
/// The floor keeps near-zero coordinates from turning finite-difference noise
/// into spurious relative blowups while still flagging a real missing
/// gradient (analytic 0 against a genuinely nonzero slope).
pub fn max_relative_error(analytic: &[f64], numeric: &[f64], floor: f64) -> f64 {
    assert_eq!(analytic.len(), numeric.len());
    analytic
        .iter()
        .zip(numeric)
        .map(|(&a, &b)| (a - b).abs() / a.abs().max(b.abs()).max(floor))
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_derivative() {
        let g = finite_difference_gradient(|t| t[0] * t[0], &[3.0], 1e-4);
        assert!((g[0] - 6.0).abs() < 1e-7, "{}", g[0]);
    }

    #[test]
    fn linear_is_exact_to_roundoff() {
        let g = finite_difference_gradient(|t| 2.5 * t[0] - t[1], &[0.3, -0.7], 1e-4);
        assert!((g[0] - 2.5).abs() < 1e-10);
        assert!((g[1] + 1.0).abs() < 1e-10);
    }

    #[test]
    fn relative_error_floor() {
        assert_eq!(max_relative_error(&[0.0], &[0.0], 1e-2), 0.0);
        assert!(max_relative_error(&[1.0], &[1.00001], 1e-2) < 2e-5);
        assert!(max_relative_error(&[0.0], &[0.1], 1e-2) > 0.9);
    }
}
