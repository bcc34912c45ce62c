use serde::{Deserialize, Serialize};

/// Numerical tolerance policy shared by every stage of the pipeline.
///
/// Relative tolerances are multiplied by a problem scale at the point of use;
/// the individual docs say which scale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Tolerances {
    /// Absolute floor: Hermitian checks, invertibility of `J`, jet units.
    pub abs: f64,
    /// Normality: `‖NN* − N*N‖_F ≤ rel · ‖N‖_F²`.
    pub rel: f64,
    /// Eigenvalue clustering radius for normal matrices, times `1 + max|λ|`.
    pub cluster: f64,
    /// Clustering radius for possibly defective matrices (`N`, `φ(N)`) and for
    /// polynomial zeros, times `1 + max|λ|`.
    pub defective_cluster: f64,
    /// PSD acceptance: smallest eigenvalue `≥ −psd · ‖H‖`.
    pub psd: f64,
    /// Rank cut of Gram factors: keep eigenvalues `> rank · λ_max`.
    pub rank: f64,
    /// Commutant membership and homomorphism residuals.
    pub comm: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            abs: 1e-12,
            rel: 1e-9,
            cluster: 1e-7,
            defective_cluster: 1e-5,
            psd: 1e-8,
            rank: 1e-10,
            comm: 1e-8,
        }
    }
}

impl Tolerances {
    /// Multiply every tolerance by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            abs: self.abs * factor,
            rel: self.rel * factor,
            cluster: self.cluster * factor,
            defective_cluster: self.defective_cluster * factor,
            psd: self.psd * factor,
            rank: self.rank * factor,
            comm: self.comm * factor,
        }
    }

    /// Region boundaries must stay this far (times `1 + max|λ|`) from critical
    /// spectral points.
    pub fn boundary(&self) -> f64 {
        10.0 * self.cluster
    }
}
