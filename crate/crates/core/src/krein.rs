//! Finite-dimensional Krein spaces: the indefinite inner product
//! `[x, y] = yᴴJx`, Krein adjoints, normality, and definitizing polynomials.

use crate::bipoly::RealUniPoly;
use crate::linalg::{self, c, cluster, frob, hermitian_eigen, hermitian_part, spectral_norm};
use crate::{CMat, Error, Result, Tolerances, C64};

/// `ℂⁿ` with an invertible Hermitian Gram matrix `J`.
#[derive(Debug, Clone)]
pub struct KreinSpace {
    j: CMat,
    j_inv: CMat,
    tol: Tolerances,
}

impl KreinSpace {
    /// Validates that `J` is Hermitian (to `tol.abs · (1 + ‖J‖)`) and
    /// invertible (smallest singular value above `tol.abs`); the stored Gram
    /// matrix is the exact Hermitian part.
    pub fn new(j: CMat, tol: Tolerances) -> Result<Self> {
        if !j.is_square() {
            return Err(Error::Shape(format!(
                "Gram matrix is {}x{}",
                j.nrows(),
                j.ncols()
            )));
        }
        let asym = frob(&(&j - j.adjoint()));
        if asym > tol.abs * (1.0 + frob(&j)) {
            return Err(Error::NotHermitian(asym));
        }
        let j = hermitian_part(&j);
        let smin = linalg::min_singular_value(&j);
        if j.nrows() > 0 && !(smin > tol.abs) {
            return Err(Error::SingularGram(smin));
        }
        let j_inv = linalg::inverse(&j).ok_or(Error::SingularGram(smin))?;
        Ok(Self { j, j_inv, tol })
    }

    /// Diagonal Gram matrix from signs or weights.
    pub fn diagonal(weights: &[f64], tol: Tolerances) -> Result<Self> {
        let d: Vec<C64> = weights.iter().map(|&w| c(w, 0.0)).collect();
        Self::new(linalg::diag(&d), tol)
    }

    pub fn dim(&self) -> usize {
        self.j.nrows()
    }

    pub fn gram(&self) -> &CMat {
        &self.j
    }

    pub fn gram_inv(&self) -> &CMat {
        &self.j_inv
    }

    pub fn tol(&self) -> &Tolerances {
        &self.tol
    }

    /// `(positive, negative)` inertia of `J`.
    pub fn signature(&self) -> (usize, usize) {
        let (ev, _) = hermitian_eigen(&self.j);
        (
            ev.iter().filter(|&&x| x > 0.0).count(),
            ev.iter().filter(|&&x| x < 0.0).count(),
        )
    }

    /// `[x, y] = yᴴJx`.
    pub fn inner(&self, x: &CMat, y: &CMat) -> C64 {
        (y.adjoint() * &self.j * x)[(0, 0)]
    }

    /// Krein adjoint `C* = J⁻¹CᴴJ`, characterized by `[Cx, y] = [x, C*y]`.
    pub fn adjoint(&self, m: &CMat) -> CMat {
        &self.j_inv * m.adjoint() * &self.j
    }

    /// `‖C − C*‖_F / (1 + ‖C‖_F)`.
    pub fn selfadjoint_residual(&self, m: &CMat) -> f64 {
        frob(&(m - self.adjoint(m))) / (1.0 + frob(m))
    }

    /// `(‖NN* − N*N‖_F, tol.rel · ‖N‖_F² + tol.abs)`.
    pub fn normality(&self, n: &CMat) -> (f64, f64) {
        let adj = self.adjoint(n);
        let residual = frob(&(n * &adj - &adj * n));
        let threshold = self.tol.rel * frob(n).powi(2) + self.tol.abs;
        (residual, threshold)
    }

    pub fn is_normal(&self, n: &CMat) -> bool {
        let (r, t) = self.normality(n);
        r <= t
    }

    /// Real and imaginary parts `A = (N + N*)/2`, `B = (N − N*)/(2i)`.
    pub fn split_normal(&self, n: &CMat) -> Result<(CMat, CMat)> {
        self.check_square(n)?;
        let (residual, threshold) = self.normality(n);
        if residual > threshold {
            return Err(Error::NotNormal {
                residual,
                threshold,
            });
        }
        let adj = self.adjoint(n);
        let a = (n + &adj) * c(0.5, 0.0);
        let b = (n - &adj) * c(0.0, -0.5);
        Ok((a, b))
    }

    /// PSD check of the symmetrized `J·p(A)` against `−(tol.psd·‖J·p(A)‖ + tol.abs)`.
    pub fn verify_definitizing(&self, a: &CMat, p: &RealUniPoly) -> PositivityReport {
        let h = hermitian_part(&(&self.j * p.at_matrix(a)));
        let (ev, _) = hermitian_eigen(&h);
        let min_eigenvalue = ev.last().copied().unwrap_or(0.0);
        let threshold = self.tol.psd * spectral_norm(&h) + self.tol.abs;
        PositivityReport {
            min_eigenvalue,
            threshold,
            accepted: min_eigenvalue >= -threshold,
        }
    }

    /// Lowest-degree definitizing polynomial among `±∏(z − λᵢ)^{eᵢ}·∏|z − μₖ|^{2fₖ}`,
    /// where `λᵢ` runs over `0` and the real eigenvalues of `A` and `μₖ` over
    /// its upper-half-plane eigenvalues, of total degree at most `max_degree`.
    pub fn search_definitizing(&self, a: &CMat, max_degree: usize) -> Result<RealUniPoly> {
        self.check_square(a)?;
        let ev = linalg::eigenvalues(a);
        let scale = 1.0 + ev.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let radius = self.tol.defective_cluster * scale;
        // The origin leads the candidate roots so that `±zᵈ` is tried first
        // in each degree.
        let mut factors: Vec<(RealUniPoly, usize)> = vec![(RealUniPoly::z(), 1)];
        for cl in cluster(&ev, radius) {
            let z = cl.center;
            if z.norm() <= radius {
                continue;
            }
            if z.im.abs() <= radius {
                factors.push((RealUniPoly::from_real_roots(&[z.re]), 1));
            } else if z.im > 0.0 {
                factors.push((RealUniPoly::conjugate_pair_factor(z), 2));
            }
        }
        for degree in 0..=max_degree {
            let mut found = None;
            enumerate_exponents(&factors, degree, &mut Vec::new(), &mut |exps| {
                if found.is_some() {
                    return;
                }
                let base = factors
                    .iter()
                    .zip(exps)
                    .fold(RealUniPoly::constant(1.0), |acc, ((f, _), &e)| {
                        acc.mul(&f.pow(e))
                    });
                for sign in [1.0, -1.0] {
                    let cand = base.scale(sign);
                    if self.verify_definitizing(a, &cand).accepted {
                        found = Some(cand);
                        return;
                    }
                }
            });
            if let Some(p) = found {
                return Ok(p);
            }
        }
        Err(Error::SearchFailed { max_degree })
    }

    fn check_square(&self, m: &CMat) -> Result<()> {
        if m.nrows() != self.dim() || m.ncols() != self.dim() {
            return Err(Error::Shape(format!(
                "operator is {}x{}, space has dimension {}",
                m.nrows(),
                m.ncols(),
                self.dim()
            )));
        }
        Ok(())
    }
}

/// Calls `visit` with every exponent vector whose weighted degree is `remaining`.
fn enumerate_exponents(
    factors: &[(RealUniPoly, usize)],
    remaining: usize,
    prefix: &mut Vec<usize>,
    visit: &mut dyn FnMut(&[usize]),
) {
    let k = prefix.len();
    if k == factors.len() {
        if remaining == 0 {
            visit(prefix);
        }
        return;
    }
    let w = factors[k].1;
    for e in (0..=remaining / w).rev() {
        prefix.push(e);
        enumerate_exponents(factors, remaining - e * w, prefix, visit);
        prefix.pop();
    }
}

/// Outcome of a definitizability check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PositivityReport {
    /// Smallest eigenvalue of the symmetrized `J·p(A)`.
    pub min_eigenvalue: f64,
    pub threshold: f64,
    pub accepted: bool,
}

/// A normal operator `N = A + iB` with definitizing polynomials `p` for `A`
/// and `q` for `B`.
#[derive(Debug, Clone)]
pub struct DefinitizablePair {
    space: KreinSpace,
    n: CMat,
    a: CMat,
    b: CMat,
    p: RealUniPoly,
    q: RealUniPoly,
    pa: CMat,
    qb: CMat,
}

impl DefinitizablePair {
    /// From a normal `N`; fails with a not-normal or not-PSD error.
    pub fn from_normal(
        space: KreinSpace,
        n: &CMat,
        p: RealUniPoly,
        q: RealUniPoly,
    ) -> Result<Self> {
        let (a, b) = space.split_normal(n)?;
        Self::from_parts(space, a, b, p, q)
    }

    /// From Krein-selfadjoint commuting `A`, `B`.
    pub fn from_parts(
        space: KreinSpace,
        a: CMat,
        b: CMat,
        p: RealUniPoly,
        q: RealUniPoly,
    ) -> Result<Self> {
        space.check_square(&a)?;
        space.check_square(&b)?;
        let tol = *space.tol();
        for m in [&a, &b] {
            let r = space.selfadjoint_residual(m);
            if r > tol.comm {
                return Err(Error::NotSelfAdjoint(r));
            }
        }
        let comm = frob(&linalg::commutator(&a, &b));
        if comm > tol.comm * (1.0 + frob(&a) * frob(&b)) {
            return Err(Error::NotCommuting(comm));
        }
        for (m, poly) in [(&a, &p), (&b, &q)] {
            if poly.is_zero() {
                return Err(Error::Degenerate("definitizing polynomial is zero".into()));
            }
            let rep = space.verify_definitizing(m, poly);
            if !rep.accepted {
                return Err(Error::NotPsd {
                    min_eigenvalue: rep.min_eigenvalue,
                    threshold: -rep.threshold,
                });
            }
        }
        let n = &a + &b * c(0.0, 1.0);
        let pa = p.at_matrix(&a);
        let qb = q.at_matrix(&b);
        Ok(Self {
            space,
            n,
            a,
            b,
            p,
            q,
            pa,
            qb,
        })
    }

    /// As [`from_normal`](Self::from_normal), searching for missing polynomials.
    pub fn with_search(
        space: KreinSpace,
        n: &CMat,
        p: Option<RealUniPoly>,
        q: Option<RealUniPoly>,
        max_degree: usize,
    ) -> Result<Self> {
        let (a, b) = space.split_normal(n)?;
        let p = match p {
            Some(p) => p,
            None => space.search_definitizing(&a, max_degree)?,
        };
        let q = match q {
            Some(q) => q,
            None => space.search_definitizing(&b, max_degree)?,
        };
        Self::from_parts(space, a, b, p, q)
    }

    pub fn space(&self) -> &KreinSpace {
        &self.space
    }

    pub fn tol(&self) -> &Tolerances {
        self.space.tol()
    }

    pub fn dim(&self) -> usize {
        self.space.dim()
    }

    pub fn n(&self) -> &CMat {
        &self.n
    }

    pub fn a(&self) -> &CMat {
        &self.a
    }

    pub fn b(&self) -> &CMat {
        &self.b
    }

    pub fn p(&self) -> &RealUniPoly {
        &self.p
    }

    pub fn q(&self) -> &RealUniPoly {
        &self.q
    }

    /// `p(A)`.
    pub fn pa(&self) -> &CMat {
        &self.pa
    }

    /// `q(B)`.
    pub fn qb(&self) -> &CMat {
        &self.qb
    }
}
