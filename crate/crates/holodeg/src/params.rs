//! Tunable tolerances and sample budgets.
//!
//! All tolerances are scale factors applied to a data-dependent magnitude
//! (max sampled modulus, domain diameter), so the pipeline is invariant
//! under rescaling the input data.

/// Knobs shared by the degree, extension and witness pipelines.
#[derive(Clone, Debug)]
pub struct Params {
    /// Boundary values with modulus below `zero_tol_scale * max|f|` count as zeros.
    pub zero_tol_scale: f64,
    /// Negative Fourier coefficients below `fourier_tol_scale * (1 + max|u|)` are noise.
    pub fourier_tol_scale: f64,
    /// Zeros closer than `dedup_radius_scale * diam(D)` are the same zero.
    pub dedup_radius_scale: f64,
    /// Boundary samples for margin and homotopy checks.
    pub boundary_samples: usize,
    /// Random lines drawn by the line-family extendibility test.
    pub line_count: usize,
    /// Steps of the homotopy parameter grid (inclusive of both endpoints).
    pub lambda_steps: usize,
    /// Points per real axis of the interior start grid for zero counting.
    pub grid_density: usize,
}

impl Default for Params {
    fn default() -> Self {
        Self {
            zero_tol_scale: 1e-9,
            fourier_tol_scale: 1e-8,
            dedup_radius_scale: 1e-6,
            boundary_samples: 4096,
            line_count: 200,
            lambda_steps: 33,
            grid_density: 3,
        }
    }
}

/// Documented caps; configurations beyond these are rejected as invalid.
pub mod caps {
    pub const BOUNDARY_SAMPLES: usize = 1 << 20;
    pub const LINE_COUNT: usize = 10_000;
    pub const LAMBDA_STEPS: usize = 10_000;
    pub const GRID_DENSITY: usize = 32;
    /// Winding refinement stops doubling at this many circle samples.
    pub const WINDING_SAMPLES: usize = 1 << 20;
    /// The completion-scale search stops doubling at 2^40.
    pub const SCALE_DOUBLINGS: u32 = 40;
}

impl Params {
    pub fn validate(&self) -> crate::error::Result<()> {
        use crate::error::Error;
        let positive = [
            ("zeroTol", self.zero_tol_scale),
            ("fourierTol", self.fourier_tol_scale),
            ("dedupRadius", self.dedup_radius_scale),
        ];
        for (name, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::InvalidInput(format!("{name} scale must be positive")));
            }
        }
        if self.boundary_samples == 0 || self.boundary_samples > caps::BOUNDARY_SAMPLES {
            return Err(Error::InvalidInput("boundary sample count out of range".into()));
        }
        if self.line_count == 0 || self.line_count > caps::LINE_COUNT {
            return Err(Error::InvalidInput("line count out of range".into()));
        }
        if self.lambda_steps < 2 || self.lambda_steps > caps::LAMBDA_STEPS {
            return Err(Error::InvalidInput("lambda step count out of range".into()));
        }
        if self.grid_density == 0 || self.grid_density > caps::GRID_DENSITY {
            return Err(Error::InvalidInput("grid density out of range".into()));
        }
        Ok(())
    }
}
