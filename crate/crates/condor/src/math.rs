//! Scalar helpers shared by the heads and losses.
//!
//! Log-probabilities are always computed from logits (`ln σ(z) = -softplus(-z)`),
//! never by taking the log of a materialized sigmoid, so losses stay finite and
//! accurate under saturation.

/// Probabilities entering a logarithm are clamped to `[CLAMP, 1 - CLAMP]`.
pub const CLAMP: f64 = 1e-12;

#[inline]
pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// `ln(1 + e^x)` without overflow for large `|x|`.
#[inline]
pub fn softplus(x: f64) -> f64 {
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}

/// `ln σ(z)`, exact for all finite `z`.
#[inline]
pub fn log_sigmoid(z: f64) -> f64 {
    -softplus(-z)
}

/// `ln(1 - e^x)` for `x <= 0`, stable near both ends.
///
/// Split at `ln 0.5` following Maechler's log1mexp note.
#[inline]
pub fn log1mexp(x: f64) -> f64 {
    debug_assert!(x <= 0.0);
    const LN_HALF: f64 = -std::f64::consts::LN_2;
    if x < LN_HALF {
        (-x.exp()).ln_1p()
    } else {
        (-x.exp_m1()).ln()
    }
}

/// Natural log of a probability, clamped to `ln CLAMP` from below.
#[inline]
pub fn ln_clamped(p: f64) -> f64 {
    p.clamp(CLAMP, 1.0).ln()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sigmoid_basics() {
        assert_eq!(sigmoid(0.0), 0.5);
        // 1 - sigmoid(20) = e^-20 / (1 + e^-20); agreement up to one ulp near 1.
        assert!((sigmoid(20.0) - (1.0 - 2.0611536224385576e-9)).abs() < 3e-16);
        assert!(sigmoid(-800.0) >= 0.0);
        assert!(sigmoid(800.0) <= 1.0);
    }

    #[test]
    fn log_sigmoid_matches_direct_in_safe_range() {
        for z in [-5.0, -1.0, 0.0, 0.5, 3.0] {
            let direct = sigmoid(z).ln();
            assert!((log_sigmoid(z) - direct).abs() < 1e-14, "z={z}");
        }
        // Saturated regime: direct form underflows, softplus form does not.
        assert!(log_sigmoid(-800.0).is_finite());
        assert!((log_sigmoid(-800.0) + 800.0).abs() < 1e-9);
    }

    #[test]
    fn log1mexp_two_branches_agree() {
        // Away from 0 the naive form is accurate enough to act as the oracle;
        // -0.694 and -0.692 bracket the branch split at ln(0.5).
        for x in [-50.0f64, -2.0, -0.694, -0.692, -0.1] {
            let direct = (1.0 - x.exp()).ln();
            let stable = log1mexp(x);
            assert!(
                (stable - direct).abs() <= 1e-10 * direct.abs().max(1.0),
                "x={x}: {stable} vs {direct}"
            );
        }
        // Near 0 the naive form cancels; ln(1 - e^-eps) ~ ln(eps).
        assert!((log1mexp(-1e-9) - 1e-9f64.ln()).abs() < 1e-6);
    }
}
