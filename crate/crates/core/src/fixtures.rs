//! Bundled model specifications and reference values.

use nalgebra::DMatrix;

use crate::design::ModelSpec;

pub const APPLICATION1_MODEL: &str = include_str!("../fixtures/application1_model.json");
pub const APPLICATION2_MODEL: &str = include_str!("../fixtures/application2_model.json");
pub const DESK_MODEL: &str = include_str!("../fixtures/desk_model.json");
pub const TINY_MODEL: &str = include_str!("../fixtures/tiny_model.json");

/// Two sessions ("out", "in") of a speed/neutral/accuracy emphasis motion task,
/// 7 parameters each (D = 14).
pub fn application1() -> ModelSpec {
    ModelSpec::from_json(APPLICATION1_MODEL).expect("bundled model is valid")
}

/// Match, search and stop tasks, 9 parameters each (D = 27).
pub fn application2() -> ModelSpec {
    ModelSpec::from_json(APPLICATION2_MODEL).expect("bundled model is valid")
}

/// Reduced two-session design used by the desk-scale recovery study:
/// threshold gap, correct drift and tau per session; start range and error
/// drift fixed (D = 6).
pub fn desk_model() -> ModelSpec {
    ModelSpec::from_json(DESK_MODEL).expect("bundled model is valid")
}

/// Single task with four free parameters (D = 4).
pub fn tiny_model() -> ModelSpec {
    ModelSpec::from_json(TINY_MODEL).expect("bundled model is valid")
}

/// Posterior group means on the natural scale for the two-session model, in
/// `vector_order` of [`application1`]: out-of-scanner then in-scanner, each
/// `b_a, b_n, b_s, A, v_e, v_c, tau`.
pub const APPLICATION1_GROUP_MEANS: [f64; 14] = [
    1.33, 1.39, 1.05, 0.73, 1.50, 3.12, 0.19, //
    1.63, 1.80, 1.25, 0.92, 1.69, 3.24, 0.18,
];

/// Posterior SDs matching [`APPLICATION1_GROUP_MEANS`].
pub const APPLICATION1_GROUP_SDS: [f64; 14] = [
    0.11, 0.11, 0.10, 0.06, 0.27, 0.26, 0.02, //
    0.13, 0.14, 0.11, 0.10, 0.19, 0.12, 0.02,
];

/// Strict lower triangle (row-wise) of the posterior-mean correlation
/// matrix for the two-session model, same ordering as above.
const APPLICATION1_CORR_LOWER: [&[f64]; 13] = [
    &[0.97],
    &[0.94, 0.9],
    &[0.75, 0.74, 0.67],
    &[0.74, 0.71, 0.74, 0.32],
    &[0.64, 0.66, 0.59, 0.2, 0.66],
    &[-0.67, -0.65, -0.66, -0.48, -0.51, -0.41],
    &[0.38, 0.33, 0.36, 0.59, 0.2, -0.22, -0.32],
    &[0.29, 0.28, 0.26, 0.59, 0.08, -0.31, -0.23, 0.92],
    &[0.35, 0.29, 0.38, 0.57, 0.17, -0.28, -0.32, 0.92, 0.87],
    &[0.39, 0.35, 0.37, 0.62, 0.17, -0.22, -0.34, 0.9, 0.87, 0.87],
    &[0.56, 0.53, 0.54, 0.47, 0.57, 0.15, -0.41, 0.73, 0.65, 0.66, 0.63],
    &[0.59, 0.57, 0.54, 0.39, 0.55, 0.41, -0.43, 0.46, 0.38, 0.38, 0.4, 0.63],
    &[0.24, 0.29, 0.16, -0.03, 0.21, 0.61, -0.12, -0.49, -0.48, -0.55, -0.39, -0.26, 0.0],
];

pub fn application1_correlations() -> DMatrix<f64> {
    let mut r = DMatrix::identity(14, 14);
    for (i, row) in APPLICATION1_CORR_LOWER.iter().enumerate() {
        for (j, &x) in row.iter().enumerate() {
            r[(i + 1, j)] = x;
            r[(j, i + 1)] = x;
        }
    }
    r
}

/// Natural-scale group means for the three-task model, in `vector_order` of
/// [`application2`].
pub const APPLICATION2_GROUP_MEANS: [f64; 27] = [
    2.15, 2.34, 2.42, 1.34, 0.86, 2.94, 3.19, 2.79, 0.17, //
    1.71, 1.79, 1.95, 0.89, 1.19, 3.82, 3.62, 3.42, 0.22, //
    2.74, 2.87, 3.04, 1.78, 0.77, 4.04, 3.96, 3.80, 0.23,
];

/// Coordinates of [`application1`] retained by [`desk_model`]:
/// `b_n`, `v_c`, `tau` of each session.
pub const DESK_COORDINATES: [usize; 6] = [1, 5, 6, 8, 12, 13];

/// Between-subject SDs on the log scale implied by the reference summaries:
/// the posterior SD of a group mean times `sqrt(19)` (the number of subjects)
/// approximates the population SD, and dividing by the mean puts it on the
/// log scale.
pub fn application1_log_sds() -> [f64; 14] {
    std::array::from_fn(|i| 19f64.sqrt() * APPLICATION1_GROUP_SDS[i] / APPLICATION1_GROUP_MEANS[i])
}
