//! Spectral measure of a normal Hilbert-space matrix: clustered eigenvalues
//! with orthogonal eigenprojections, spectral integrals `∫h dE`, and the
//! `R₁,R₂`-augmented integral used by the functional calculus.

use crate::linalg::{self, c, cluster, frob};
use crate::{CMat, Error, Result, Tolerances, C64};

/// One atom `(λ, E{λ})` of the spectral measure.
#[derive(Debug, Clone)]
pub struct SpectralPoint {
    pub value: C64,
    pub projection: CMat,
}

/// Eigenvalue clusters of a normal matrix with their orthogonal projections.
#[derive(Debug, Clone)]
pub struct SpectralData {
    dim: usize,
    points: Vec<SpectralPoint>,
    /// Largest residual among the certified invariants.
    residual: f64,
    /// Set when two clusters are closer than three clustering radii.
    ambiguity: Option<f64>,
}

/// Value of the remainder function at one spectral point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PointValue {
    /// `g(λ)` at a noncritical point.
    Scalar(C64),
    /// `(g(w)₁, g(w)₂)` at a critical point.
    Pair(C64, C64),
}

impl SpectralData {
    /// Unitary diagonalization of a normal `m` with eigenvalues clustered at
    /// `tol.cluster · (1 + max|λ|)`.
    pub fn diagonalize(m: &CMat, tol: &Tolerances) -> Result<Self> {
        let r = m.nrows();
        if !m.is_square() {
            return Err(Error::Shape(format!(
                "matrix is {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        if r == 0 {
            return Ok(Self {
                dim: 0,
                points: Vec::new(),
                residual: 0.0,
                ambiguity: None,
            });
        }
        let threshold = tol.comm * frob(m).powi(2) + tol.abs;
        let residual = frob(&(m * m.adjoint() - m.adjoint() * m));
        if residual > threshold {
            return Err(Error::NotNormal {
                residual,
                threshold,
            });
        }
        let (diag, vectors) = linalg::eigen(m);
        let scale = 1.0 + diag.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let radius = tol.cluster * scale;
        // Eigenvectors of distinct eigenvalues of a normal matrix are
        // orthogonal; within a cluster they only span the eigenspace, so each
        // cluster is orthonormalized separately.
        let mut points: Vec<SpectralPoint> = cluster(&diag, radius)
            .into_iter()
            .map(|cl| {
                let mut vs = CMat::zeros(r, cl.members.len());
                for (k, &i) in cl.members.iter().enumerate() {
                    vs.set_column(k, &vectors.column(i));
                }
                let qs = vs.qr().q();
                SpectralPoint {
                    value: cl.center,
                    projection: &qs * qs.adjoint(),
                }
            })
            .collect();
        points.sort_by(|a, b| {
            a.value
                .re
                .total_cmp(&b.value.re)
                .then(a.value.im.total_cmp(&b.value.im))
        });
        let mut ambiguity = None;
        for (i, a) in points.iter().enumerate() {
            for b in &points[i + 1..] {
                let d = (a.value - b.value).norm();
                if d < 3.0 * radius {
                    ambiguity = Some(ambiguity.map_or(d, |x: f64| x.min(d)));
                }
            }
        }
        let mut data = Self {
            dim: r,
            points,
            residual: 0.0,
            ambiguity,
        };
        data.residual = data.invariant_residual(m);
        Ok(data)
    }

    /// Largest of: `‖ΣE − I‖`, `‖EᵢEⱼ − δᵢⱼEᵢ‖`, `‖Eᴴ − E‖`, `‖ME − λE‖`, each
    /// relative to `1 + ‖·‖`.
    pub fn invariant_residual(&self, m: &CMat) -> f64 {
        let mut worst: f64 = 0.0;
        let total = self
            .points
            .iter()
            .fold(CMat::zeros(self.dim, self.dim), |acc, p| {
                acc + &p.projection
            });
        worst = worst.max(linalg::rel_diff(&total, &linalg::eye(self.dim)));
        for (i, a) in self.points.iter().enumerate() {
            worst = worst.max(linalg::rel_diff(&a.projection, &a.projection.adjoint()));
            worst = worst.max(linalg::rel_diff(
                &(m * &a.projection),
                &(&a.projection * a.value),
            ));
            for (j, b) in self.points.iter().enumerate() {
                let prod = &a.projection * &b.projection;
                let expected = if i == j {
                    a.projection.clone()
                } else {
                    CMat::zeros(self.dim, self.dim)
                };
                worst = worst.max(linalg::rel_diff(&prod, &expected));
            }
        }
        worst
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn points(&self) -> &[SpectralPoint] {
        &self.points
    }

    pub fn values(&self) -> Vec<C64> {
        self.points.iter().map(|p| p.value).collect()
    }

    pub fn residual(&self) -> f64 {
        self.residual
    }

    /// Smallest distance between clusters when below three clustering radii.
    pub fn ambiguity(&self) -> Option<f64> {
        self.ambiguity
    }

    /// Index of the point within `radius` of `z`.
    pub fn find(&self, z: C64, radius: f64) -> Option<usize> {
        self.points
            .iter()
            .enumerate()
            .filter(|(_, p)| (p.value - z).norm() <= radius)
            .min_by(|(_, a), (_, b)| (a.value - z).norm().total_cmp(&(b.value - z).norm()))
            .map(|(i, _)| i)
    }

    /// Replace each eigenvalue within `radius` of a target by the target.
    pub fn snap_to(&mut self, targets: &[C64], radius: f64) {
        for p in &mut self.points {
            if let Some(w) = targets
                .iter()
                .filter(|w| (p.value - **w).norm() <= radius)
                .min_by(|a, b| (p.value - **a).norm().total_cmp(&(p.value - **b).norm()))
            {
                p.value = *w;
            }
        }
    }

    /// `Σ h(λ)·E{λ}` with values aligned to [`points`](Self::points).
    pub fn spectral_integral(&self, values: &[C64]) -> Result<CMat> {
        if values.len() != self.points.len() {
            return Err(Error::Domain(format!(
                "{} values supplied for {} spectral points",
                values.len(),
                self.points.len()
            )));
        }
        Ok(self
            .points
            .iter()
            .zip(values)
            .fold(CMat::zeros(self.dim, self.dim), |acc, (p, &v)| {
                acc + &p.projection * v
            }))
    }

    /// `∫h dE` for a function of the eigenvalue.
    pub fn integrate(&self, h: impl Fn(C64) -> C64) -> CMat {
        let values: Vec<C64> = self.points.iter().map(|p| h(p.value)).collect();
        self.spectral_integral(&values)
            .expect("one value per point")
    }

    /// `E(Δ)` for the set of points selected by `pred`.
    pub fn projection_where(&self, pred: impl Fn(C64) -> bool) -> CMat {
        self.integrate(|z| if pred(z) { c(1.0, 0.0) } else { c(0.0, 0.0) })
    }

    /// `Σ_noncritical g(λ)E{λ} + Σ_critical (g(w)₁R₁R₁*E{w} + g(w)₂R₂R₂*E{w})`.
    pub fn augmented_integral(&self, g: &[PointValue], r1r1s: &CMat, r2r2s: &CMat) -> Result<CMat> {
        if g.len() != self.points.len() {
            return Err(Error::Domain(format!(
                "{} remainder values supplied for {} spectral points",
                g.len(),
                self.points.len()
            )));
        }
        let mut out = CMat::zeros(self.dim, self.dim);
        for (p, v) in self.points.iter().zip(g) {
            match *v {
                PointValue::Scalar(x) => out += &p.projection * x,
                PointValue::Pair(g1, g2) => {
                    out += (r1r1s * &p.projection) * g1 + (r2r2s * &p.projection) * g2;
                }
            }
        }
        Ok(out)
    }
}
