//! Hilbert-space embeddings of a definitizable pair.
//!
//! The Gram matrices `J·p(A)`, `J·q(B)` and `J·(p(A) + q(B))` are positive
//! semidefinite; factoring them as `FⱼᴴFⱼ` and `FᴴF` with orthogonal,
//! eigen-scaled rows yields coordinate Hilbert spaces `V₁`, `V₂`, `V` with the
//! standard inner product, together with
//!
//! * `T = J⁻¹Fᴴ : V → 𝒦` and `Tⱼ = J⁻¹Fⱼᴴ : Vⱼ → 𝒦`, whose Krein-to-Hilbert
//!   adjoints are `T* = F`, `Tⱼ* = Fⱼ`;
//! * the contractions `Rⱼ : Vⱼ → V` with `Rⱼ* = FⱼFᴴ(FFᴴ)⁻¹`, so that
//!   `Tⱼ = T·Rⱼ` and `R₁R₁* + R₂R₂* = I`.
//!
//! The commutant homomorphisms solve the defining intertwining relations:
//! `Θ(C)` is the unique `X` with `TX = CT`, `Γⱼ(D)` the unique `Y` with
//! `RⱼY = DRⱼ`, while `Ξ(D) = TDT*` and `Λⱼ(D) = RⱼDRⱼ*`.

use crate::krein::DefinitizablePair;
use crate::linalg::{self, frob, hermitian_eigen, hermitian_part, rel_diff};
use crate::{CMat, Error, Result, Tolerances};

/// Factor `F` (rows `√λₖ·uₖᴴ` over the eigenpairs kept by the rank cut) with
/// `FᴴF = G`; zero rows when `G` vanishes.
///
/// `noise` is the size of the data `G` was computed from; eigenvalues below
/// `tol.abs · noise` are rounding artefacts and are cut even when they are
/// all of `G` (a Gram matrix that vanishes in exact arithmetic).
pub fn gram_factor(g: &CMat, tol: &Tolerances, noise: f64) -> Result<CMat> {
    let n = g.nrows();
    let (ev, u) = hermitian_eigen(g);
    let lambda_max = ev.first().copied().unwrap_or(0.0).max(0.0);
    let min = ev.last().copied().unwrap_or(0.0);
    let floor = tol.psd * lambda_max + tol.abs * noise.max(1.0);
    if min < -floor {
        return Err(Error::NotPsd {
            min_eigenvalue: min,
            threshold: -floor,
        });
    }
    let cut = (tol.rank * lambda_max).max(tol.abs * noise);
    let keep: Vec<usize> = (0..ev.len()).filter(|&k| ev[k] > cut).collect();
    let mut f = CMat::zeros(keep.len(), n);
    for (row, &k) in keep.iter().enumerate() {
        let s = ev[k].sqrt();
        for col in 0..n {
            f[(row, col)] = u[(col, k)].conj() * s;
        }
    }
    Ok(f)
}

/// Residual report of one construction invariant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub residual: f64,
}

/// The spaces `V`, `V₁`, `V₂` in coordinates, with all embedding operators.
#[derive(Debug, Clone)]
pub struct EmbeddingBundle {
    tol: Tolerances,
    j: CMat,
    j_inv: CMat,
    f: [CMat; 3],
    t: [CMat; 3],
    /// `FⱼFⱼᴴ` (diagonal) and its inverse.
    ffh_inv: [CMat; 3],
    /// `Rⱼ` for j = 1, 2 (index 0 unused, identity on V).
    r: [CMat; 3],
    /// `TT*`, i.e. `p(A) + q(B)`, `p(A)`, `q(B)` on `𝒦`.
    tts: [CMat; 3],
    /// `T*T` on V, `Tⱼ*Tⱼ` on Vⱼ.
    tst: [CMat; 3],
    /// A-priori bounds on `‖JTT*‖`, `‖JTⱼTⱼ*‖` (see [`gram_factor`]).
    noise: [f64; 3],
    checks: Vec<Check>,
}

/// Relative residual threshold for the build-time invariants.
const BUILD_THRESHOLD: f64 = 1e-8;

impl EmbeddingBundle {
    /// Builds and certifies the bundle.
    pub fn build(pair: &DefinitizablePair) -> Result<Self> {
        let tol = *pair.tol();
        let j = pair.space().gram().clone();
        let j_inv = pair.space().gram_inv().clone();
        let g1 = hermitian_part(&(&j * pair.pa()));
        let g2 = hermitian_part(&(&j * pair.qb()));
        let g = &g1 + &g2;
        // ‖J‖·Σ|cᵢ|rⁱ with r = max(‖A‖, ‖B‖) bounds ‖J p(A)‖ and, times the
        // unit roundoff, its evaluation error; same for q(B). Both parts use
        // the common scale r because A and B inherit rounding at the scale of N.
        let jn = linalg::spectral_norm(&j);
        let r = linalg::spectral_norm(pair.a()).max(linalg::spectral_norm(pair.b()));
        let noise1 = jn * pair.p().coefficient_bound(r);
        let noise2 = jn * pair.q().coefficient_bound(r);
        let f = [
            gram_factor(&g, &tol, noise1 + noise2)?,
            gram_factor(&g1, &tol, noise1)?,
            gram_factor(&g2, &tol, noise2)?,
        ];
        let t: [CMat; 3] = std::array::from_fn(|k| &j_inv * f[k].adjoint());
        let ffh_inv: [CMat; 3] = std::array::from_fn(|k| {
            let d = &f[k] * f[k].adjoint();
            CMat::from_fn(d.nrows(), d.ncols(), |a, b| {
                if a == b {
                    d[(a, a)].inv()
                } else {
                    linalg::c(0.0, 0.0)
                }
            })
        });
        let r: [CMat; 3] = std::array::from_fn(|k| {
            if k == 0 {
                linalg::eye(f[0].nrows())
            } else {
                (&f[k] * f[0].adjoint() * &ffh_inv[0]).adjoint()
            }
        });
        let tts = [pair.pa() + pair.qb(), pair.pa().clone(), pair.qb().clone()];
        let tst: [CMat; 3] = std::array::from_fn(|k| &f[k] * &t[k]);
        let mut bundle = Self {
            tol,
            j,
            j_inv,
            f,
            t,
            ffh_inv,
            r,
            tts,
            tst,
            noise: [noise1 + noise2, noise1, noise2],
            checks: Vec::new(),
        };
        bundle.certify()?;
        Ok(bundle)
    }

    fn certify(&mut self) -> Result<()> {
        let mut checks = Vec::new();
        for (k, name) in ["T T* = p(A) + q(B)", "T1 T1* = p(A)", "T2 T2* = q(B)"]
            .into_iter()
            .enumerate()
        {
            let tts = &self.t[k] * &self.f[k];
            checks.push(Check {
                name,
                residual: rel_diff(&tts, &self.tts[k]),
            });
        }
        for (k, name) in [(1, "T1 = T R1"), (2, "T2 = T R2")] {
            checks.push(Check {
                name,
                residual: rel_diff(&(&self.t[0] * &self.r[k]), &self.t[k]),
            });
        }
        let sum = self.rrs(1) + self.rrs(2);
        checks.push(Check {
            name: "R1 R1* + R2 R2* = I",
            residual: rel_diff(&sum, &linalg::eye(self.dim_v())),
        });
        for (k, name) in ["F surjective", "F1 surjective", "F2 surjective"]
            .into_iter()
            .enumerate()
        {
            let r = self.f[k].nrows();
            let smin = if r == 0 {
                f64::INFINITY
            } else {
                linalg::min_singular_value(&self.f[k].adjoint())
            };
            checks.push(Check {
                name,
                residual: if smin > 0.0 { 0.0 } else { 1.0 },
            });
        }
        if let Some(bad) = checks.iter().find(|c| !(c.residual <= BUILD_THRESHOLD)) {
            return Err(Error::ConstructionFailed {
                what: bad.name,
                residual: bad.residual,
                threshold: BUILD_THRESHOLD,
            });
        }
        self.checks = checks;
        Ok(())
    }

    /// Build-time invariant residuals.
    pub fn checks(&self) -> &[Check] {
        &self.checks
    }

    pub fn tol(&self) -> &Tolerances {
        &self.tol
    }

    /// Dimension of `𝒦`.
    pub fn dim_k(&self) -> usize {
        self.j.nrows()
    }

    /// Dimension of `V`.
    pub fn dim_v(&self) -> usize {
        self.f[0].nrows()
    }

    /// Dimension of `Vⱼ`.
    pub fn dim_vj(&self, j: usize) -> usize {
        self.f[idx(j)].nrows()
    }

    /// `F = T*`.
    pub fn f(&self) -> &CMat {
        &self.f[0]
    }

    /// `Fⱼ = Tⱼ*`.
    pub fn fj(&self, j: usize) -> &CMat {
        &self.f[idx(j)]
    }

    pub fn t(&self) -> &CMat {
        &self.t[0]
    }

    pub fn tj(&self, j: usize) -> &CMat {
        &self.t[idx(j)]
    }

    /// `Rⱼ : Vⱼ → V`.
    pub fn rj(&self, j: usize) -> &CMat {
        &self.r[idx(j)]
    }

    /// `Rⱼ*` (Hilbert adjoint).
    pub fn rj_adj(&self, j: usize) -> CMat {
        self.r[idx(j)].adjoint()
    }

    /// `RⱼRⱼ*` on V.
    pub fn rrs(&self, j: usize) -> CMat {
        let r = &self.r[idx(j)];
        r * r.adjoint()
    }

    /// `Rⱼ*Rⱼ` on Vⱼ.
    pub fn rsr(&self, j: usize) -> CMat {
        let r = &self.r[idx(j)];
        r.adjoint() * r
    }

    /// `TT* = p(A) + q(B)`.
    pub fn tts(&self) -> &CMat {
        &self.tts[0]
    }

    /// `TⱼTⱼ*` (`p(A)` or `q(B)`).
    pub fn tjtjs(&self, j: usize) -> &CMat {
        &self.tts[idx(j)]
    }

    /// `T*T` on V.
    pub fn tst(&self) -> &CMat {
        &self.tst[0]
    }

    /// `Tⱼ*Tⱼ` on Vⱼ.
    pub fn tjstj(&self, j: usize) -> &CMat {
        &self.tst[idx(j)]
    }

    /// `‖F‖²‖J⁻¹‖` bounds `T*T = FJ⁻¹Fᴴ`, which may vanish on a nonzero `V`
    /// when `p(A) + q(B)` is nilpotent.
    fn tst_scale(&self, k: usize) -> f64 {
        frob(&self.f[k]).powi(2) * linalg::spectral_norm(&self.j_inv)
    }

    /// `s_scale` is the size `S` would have without rounding; it matters
    /// when `S` vanishes in exact arithmetic (e.g. `p(A)` with trivial `V₁`).
    fn commutant_check(&self, what: &'static str, c: &CMat, s: &CMat, s_scale: f64) -> Result<()> {
        if c.shape() != s.shape() {
            return Err(Error::Shape(format!(
                "{what}: operator is {}x{}, expected {}x{}",
                c.nrows(),
                c.ncols(),
                s.nrows(),
                s.ncols()
            )));
        }
        // `1 + ‖C‖` as in `rel_diff`: operators that vanish in exact
        // arithmetic (products of orthogonal projections, differences of equal
        // results) still carry rounding at the unit scale of the problem.
        let residual = frob(&linalg::commutator(c, s));
        let threshold = self.tol.comm * (1.0 + frob(c)) * frob(s).max(s_scale) + self.tol.abs;
        if residual > threshold {
            return Err(Error::NotInCommutant {
                what,
                residual,
                threshold,
            });
        }
        Ok(())
    }

    fn intertwine_check(
        &self,
        what: &'static str,
        lhs: &CMat,
        rhs: &CMat,
        scale: f64,
    ) -> Result<()> {
        let residual = frob(&(lhs - rhs));
        let threshold = self.tol.comm * scale + self.tol.abs;
        if residual > threshold {
            return Err(Error::NotInCommutant {
                what,
                residual,
                threshold,
            });
        }
        Ok(())
    }

    /// `Θ(C) = T⁻¹CT` for `C ∈ (TT*)′`, computed as `(FFᴴ)⁻¹FJCT`.
    pub fn theta(&self, c: &CMat) -> Result<CMat> {
        self.theta_k(0, c)
    }

    /// `Θⱼ(C) = Tⱼ⁻¹CTⱼ` for `C ∈ (TⱼTⱼ*)′`.
    pub fn theta_j(&self, j: usize, c: &CMat) -> Result<CMat> {
        self.theta_k(idx(j), c)
    }

    fn theta_k(&self, k: usize, c: &CMat) -> Result<CMat> {
        self.commutant_check("theta: C in (TT*)'", c, &self.tts[k], self.noise[k])?;
        let t = &self.t[k];
        let x = &self.ffh_inv[k] * &self.f[k] * &self.j * c * t;
        let ct = c * t;
        self.intertwine_check("theta: T X = C T", &(t * &x), &ct, frob(c) * frob(t))?;
        Ok(x)
    }

    /// `Γⱼ(D) = Rⱼ⁻¹DRⱼ` for `D ∈ (RⱼRⱼ*)′`.
    pub fn gamma_j(&self, j: usize, d: &CMat) -> Result<CMat> {
        let k = idx(j);
        self.commutant_check("gamma: D in (Rj Rj*)'", d, &self.rrs(j), 0.0)?;
        let r = &self.r[k];
        let rsr = r.adjoint() * r;
        let y = linalg::solve(&rsr, &(r.adjoint() * d * r)).ok_or(Error::ConstructionFailed {
            what: "Rj is not injective",
            residual: f64::INFINITY,
            threshold: 0.0,
        })?;
        self.intertwine_check("gamma: Rj Y = D Rj", &(r * &y), &(d * r), frob(d) * frob(r))?;
        Ok(y)
    }

    /// `Ξ(D) = TDT*` for `D ∈ (T*T)′`.
    pub fn xi(&self, d: &CMat) -> Result<CMat> {
        self.commutant_check("xi: D in (T*T)'", d, &self.tst[0], self.tst_scale(0))?;
        Ok(&self.t[0] * d * &self.f[0])
    }

    /// `Ξⱼ(D) = TⱼDTⱼ*` for `D ∈ (Tⱼ*Tⱼ)′`.
    pub fn xi_j(&self, j: usize, d: &CMat) -> Result<CMat> {
        let k = idx(j);
        self.commutant_check("xi_j: D in (Tj*Tj)'", d, &self.tst[k], self.tst_scale(k))?;
        Ok(&self.t[k] * d * &self.f[k])
    }

    /// `Λⱼ(D) = RⱼDRⱼ*` for `D ∈ (Rⱼ*Rⱼ)′`.
    pub fn lambda_j(&self, j: usize, d: &CMat) -> Result<CMat> {
        let k = idx(j);
        self.commutant_check("lambda_j: D in (Rj*Rj)'", d, &self.rsr(j), 0.0)?;
        let r = &self.r[k];
        Ok(r * d * r.adjoint())
    }

    /// `J⁻¹` of the underlying space.
    pub fn gram_inv(&self) -> &CMat {
        &self.j_inv
    }
}

fn idx(j: usize) -> usize {
    assert!(j == 1 || j == 2, "component index must be 1 or 2, got {j}");
    j
}
