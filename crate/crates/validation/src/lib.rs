//! Published reference values the acceptance suite compares against.

/// Relative noise levels of the step-solution tables.
pub const STEP_DELTAS: [f64; 5] = [0.02, 0.01, 0.005, 0.003, 0.001];

/// arctan³ model, C₀ = 7, gaussian noise: relative errors.
pub const ARCTAN_STEP_ERRORS: [f64; 5] = [0.1437, 0.1217, 0.0829, 0.0746, 0.0544];

/// Cubic model, C₀ = 2, shift 6: iteration counts and relative errors.
pub const CUBIC_STEP_ITERATIONS: [usize; 5] = [16, 17, 17, 17, 18];
pub const CUBIC_STEP_ERRORS: [f64; 5] = [0.1387, 0.1281, 0.0966, 0.0784, 0.0626];

/// Relative noise levels of the smooth-solution tables.
pub const SMOOTH_DELTAS: [f64; 6] = [0.05, 0.03, 0.02, 0.01, 0.003, 0.001];

/// `value` lies in `[0.5·reference, 2·reference]`.
pub fn in_band(value: f64, reference: f64) -> bool {
    value >= 0.5 * reference && value <= 2.0 * reference
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn band_edges() {
        assert!(in_band(0.05, 0.1) && in_band(0.2, 0.1));
        assert!(!in_band(0.0499, 0.1) && !in_band(0.2001, 0.1));
    }
}
