//! Numerical tolerances shared by all stages. Every field can be overridden
//! from a run configuration.

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Relative singular-value cutoff for numerical kernels.
    pub sigma_tol: f64,
    /// `|P^2 - P|` bound for projector fields.
    pub idempotency: f64,
    /// `|P - P^dagger|` bound for projector fields.
    pub hermiticity: f64,
    /// Stop doubling contour nodes once successive projections differ by less.
    pub quadrature: f64,
    /// Surjectivity margin `sigma_min / sigma_max` of the truncated map.
    pub surjectivity: f64,
    /// Subspace angle under which a doubled window counts as unchanged.
    pub window_angle: f64,
    /// Required ratio between the smallest non-kernel and largest kernel singular value.
    pub kernel_gap_ratio: f64,
    /// Eigenvalues closer than this are one degenerate level.
    pub degeneracy: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            sigma_tol: 1e-7,
            idempotency: 1e-8,
            hermiticity: 1e-10,
            quadrature: 1e-9,
            surjectivity: 1e-6,
            window_angle: 1e-7,
            kernel_gap_ratio: 1e4,
            degeneracy: 1e-9,
        }
    }
}
