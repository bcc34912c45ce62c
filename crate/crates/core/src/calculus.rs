//! The functional calculus `φ ↦ φ(N)`.
//!
//! A [`CalculusFunction`] assigns
//!
//! * a complex value to every noncritical eigenvalue of `Θ(N)`,
//! * an `𝒜_{𝔡p(ℜw),𝔡q(ℑw)}` jet to every critical point `w ∈ Z^ℝ_p + iZ^ℝ_q`,
//! * a `ℬ_{𝔡p(ξ),𝔡q(η)}` jet to every `(ξ, η) ∈ Zⁱ`, the zero pairs of `p`
//!   and `q` that are not both real.
//!
//! To apply `φ`, a polynomial `s` is interpolated so that `φ − s_N` lies in
//! the ideal `ℛ` (all `π`-projections at critical and `Zⁱ` points vanish);
//! dividing the rest by `p_N + q_N` gives `g`, and
//!
//! ```text
//! φ(N) = s(A, B) + Ξ( Σ_noncritical g(λ)E{λ} + Σ_critical (g₁R₁R₁* + g₂R₂R₂*)E{w} ).
//! ```

use serde::{Deserialize, Serialize};

use crate::bipoly::{hermite_interpolate, jet_of_poly, BiPoly, Interpolant, Zero, ZeroGrid};
use crate::embed::EmbeddingBundle;
use crate::jets::{Jet, JetShape};
use crate::krein::DefinitizablePair;
use crate::linalg::{self, c, cluster, rel_diff};
use crate::spectral::{PointValue, SpectralData};
use crate::{CMat, Error, Result, Tolerances, C64};

/// A real-real critical point `w = x + iy` with `p(x) = 0 = q(y)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CritPoint {
    pub value: C64,
    /// `𝔡p(ℜw)`.
    pub dp: usize,
    /// `𝔡q(ℑw)`.
    pub dq: usize,
    /// Index of the matching eigenvalue of `Θ(N)`, if any.
    pub spectral: Option<usize>,
    /// Whether `w ∈ σ(N)`.
    pub in_sigma_n: bool,
    /// Indices into the `p` and `q` zero lists.
    pub grid: (usize, usize),
}

impl CritPoint {
    pub fn shape(&self) -> JetShape {
        JetShape::a(self.dp, self.dq).expect("critical multiplicities are positive")
    }
}

/// A point `(ξ, η) ∈ Zⁱ`.
#[derive(Debug, Clone, PartialEq)]
pub struct ZiPoint {
    pub xi: C64,
    pub eta: C64,
    pub dp: usize,
    pub dq: usize,
    /// Index of `(ξ̄, η̄)` in the `Zⁱ` list.
    pub partner: usize,
    /// Whether both `ξ + iη` and `ξ̄ + iη̄` lie in `σ(N)`.
    pub in_sigma_n: bool,
    pub grid: (usize, usize),
}

impl ZiPoint {
    pub fn shape(&self) -> JetShape {
        JetShape::b(self.dp, self.dq).expect("zero multiplicities are positive")
    }

    /// `ξ + iη`.
    pub fn image(&self) -> C64 {
        self.xi + c(0.0, 1.0) * self.eta
    }

    /// `ξ̄ + iη̄`.
    pub fn partner_image(&self) -> C64 {
        self.xi.conj() + c(0.0, 1.0) * self.eta.conj()
    }
}

/// A point of the domain of a [`CalculusFunction`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DomainPoint {
    /// Index into [`CriticalSet::noncritical`].
    Noncritical(usize),
    /// Index into [`CriticalSet::crit`].
    Crit(usize),
    /// Index into [`CriticalSet::zi`].
    Zi(usize),
}

/// Zero sets of `p`, `q` and the domain of the function class.
#[derive(Debug, Clone)]
pub struct CriticalSet {
    pub grid: ZeroGrid,
    pub crit: Vec<CritPoint>,
    pub zi: Vec<ZiPoint>,
    /// Indices of the spectral points of `Θ(N)` that are not critical.
    pub noncritical: Vec<usize>,
    /// Eigenvalues of `Θ(N)` (after snapping to critical points).
    pub sigma_theta: Vec<C64>,
    /// Clustered eigenvalues of `N` computed directly.
    pub sigma_n_direct: Vec<C64>,
    /// `1 + max|λ|` over the spectra and critical points.
    pub scale: f64,
}

impl CriticalSet {
    fn build(pair: &DefinitizablePair, spectral: &mut SpectralData) -> Result<Self> {
        let tol = pair.tol();
        let grid = ZeroGrid::new(pair.p(), pair.q(), tol)?;
        let sigma_n_direct = linalg::clustered_eigenvalues(pair.n(), tol.defective_cluster);
        let n_scale = 1.0 + sigma_n_direct.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let in_sigma_n = |z: C64| {
            sigma_n_direct
                .iter()
                .any(|&mu| (mu - z).norm() <= tol.defective_cluster * n_scale)
        };

        let mut crit = Vec::new();
        for &ia in &grid.real_a {
            for &ib in &grid.real_b {
                let (x, y) = (grid.a_zeros[ia], grid.b_zeros[ib]);
                let value = c(x.value.re, y.value.re);
                crit.push(CritPoint {
                    value,
                    dp: x.multiplicity,
                    dq: y.multiplicity,
                    spectral: None,
                    in_sigma_n: in_sigma_n(value),
                    grid: (ia, ib),
                });
            }
        }
        let theta_scale = 1.0
            + spectral
                .values()
                .iter()
                .map(|z| z.norm())
                .fold(0.0, f64::max);
        let crit_values: Vec<C64> = crit.iter().map(|w| w.value).collect();
        spectral.snap_to(&crit_values, tol.cluster * theta_scale);
        for w in &mut crit {
            w.spectral = spectral.points().iter().position(|pt| pt.value == w.value);
            if w.spectral.is_some() {
                w.in_sigma_n = true;
            }
        }
        let noncritical = (0..spectral.points().len())
            .filter(|&k| !crit.iter().any(|w| w.spectral == Some(k)))
            .collect();

        let find_zero = |zeros: &[Zero], z: C64| zeros.iter().position(|q| q.value == z);
        let mut zi: Vec<ZiPoint> = grid
            .cross
            .iter()
            .map(|&(ia, ib)| {
                let (x, y) = (grid.a_zeros[ia], grid.b_zeros[ib]);
                ZiPoint {
                    xi: x.value,
                    eta: y.value,
                    dp: x.multiplicity,
                    dq: y.multiplicity,
                    partner: usize::MAX,
                    in_sigma_n: false,
                    grid: (ia, ib),
                }
            })
            .collect();
        for k in 0..zi.len() {
            let pa = find_zero(&grid.a_zeros, zi[k].xi.conj());
            let pb = find_zero(&grid.b_zeros, zi[k].eta.conj());
            let partner = match (pa, pb) {
                (Some(pa), Some(pb)) => zi.iter().position(|o| o.grid == (pa, pb)),
                _ => None,
            };
            zi[k].partner = partner.ok_or_else(|| {
                Error::Degenerate("zero set is not closed under conjugation".into())
            })?;
            zi[k].in_sigma_n = in_sigma_n(zi[k].image()) && in_sigma_n(zi[k].partner_image());
        }

        let sigma_theta = spectral.values();
        let scale = 1.0
            + sigma_theta
                .iter()
                .chain(&sigma_n_direct)
                .chain(&crit_values)
                .map(|z| z.norm())
                .fold(0.0, f64::max);
        Ok(Self {
            grid,
            crit,
            zi,
            noncritical,
            sigma_theta,
            sigma_n_direct,
            scale,
        })
    }

    /// Critical points `Z^ℝ_p + iZ^ℝ_q`.
    pub fn crit_values(&self) -> Vec<C64> {
        self.crit.iter().map(|w| w.value).collect()
    }

    /// All domain points.
    pub fn domain(&self) -> Vec<DomainPoint> {
        (0..self.noncritical.len())
            .map(DomainPoint::Noncritical)
            .chain((0..self.crit.len()).map(DomainPoint::Crit))
            .chain((0..self.zi.len()).map(DomainPoint::Zi))
            .collect()
    }

    /// Whether a domain point belongs to `σ_N`.
    pub fn in_support(&self, point: DomainPoint) -> bool {
        match point {
            DomainPoint::Noncritical(_) => true,
            DomainPoint::Crit(i) => self.crit[i].in_sigma_n,
            DomainPoint::Zi(i) => self.zi[i].in_sigma_n,
        }
    }

    /// `σ_N`: the domain points carrying `φ(N)`.
    pub fn support(&self) -> Vec<DomainPoint> {
        self.domain()
            .into_iter()
            .filter(|&d| self.in_support(d))
            .collect()
    }

    /// Shape of the value at a domain point (`𝒜₀,₀` for noncritical points).
    pub fn shape(&self, point: DomainPoint) -> JetShape {
        match point {
            DomainPoint::Noncritical(_) => JetShape::scalar(),
            DomainPoint::Crit(i) => self.crit[i].shape(),
            DomainPoint::Zi(i) => self.zi[i].shape(),
        }
    }

    /// The complex number represented by a domain point (`ξ + iη` on `Zⁱ`).
    pub fn image(&self, point: DomainPoint) -> C64 {
        match point {
            DomainPoint::Noncritical(k) => self.sigma_theta[self.noncritical[k]],
            DomainPoint::Crit(i) => self.crit[i].value,
            DomainPoint::Zi(i) => self.zi[i].image(),
        }
    }

    /// Noncritical or critical point with value within `radius` of `z`.
    pub fn locate(&self, z: C64, radius: f64) -> Option<DomainPoint> {
        if let Some(i) = self
            .crit
            .iter()
            .position(|w| (w.value - z).norm() <= radius)
        {
            return Some(DomainPoint::Crit(i));
        }
        self.noncritical
            .iter()
            .position(|&k| (self.sigma_theta[k] - z).norm() <= radius)
            .map(DomainPoint::Noncritical)
    }

    /// `Zⁱ` point with coordinates within `radius` of `(ξ, η)`.
    pub fn locate_zi(&self, xi: C64, eta: C64, radius: f64) -> Option<DomainPoint> {
        self.zi
            .iter()
            .position(|z| (z.xi - xi).norm() <= radius && (z.eta - eta).norm() <= radius)
            .map(DomainPoint::Zi)
    }

    /// `σ(Θ(N)) ∪ ((Z^ℝ_p + iZ^ℝ_q) ∩ σ(N)) ∪ {ξ + iη : (ξ, η) ∈ Zⁱ, ξ + iη, ξ̄ + iη̄ ∈ σ(N)}`,
    /// with duplicates merged.
    pub fn spectrum_of_n(&self, tol: &Tolerances) -> Vec<C64> {
        let mut pts: Vec<C64> = self.sigma_theta.clone();
        pts.extend(self.crit.iter().filter(|w| w.in_sigma_n).map(|w| w.value));
        pts.extend(self.zi.iter().filter(|z| z.in_sigma_n).map(|z| z.image()));
        cluster(&pts, tol.defective_cluster * self.scale)
            .into_iter()
            .map(|cl| pts[cl.members[0]])
            .collect()
    }
}

/// A function of the class on a fixed [`CriticalSet`].
#[derive(Debug, Clone, PartialEq)]
pub struct CalculusFunction {
    /// Values at the noncritical eigenvalues, aligned with [`CriticalSet::noncritical`].
    pub scalars: Vec<C64>,
    /// Jets at the critical points, aligned with [`CriticalSet::crit`].
    pub crit: Vec<Jet>,
    /// Jets at `Zⁱ`, aligned with [`CriticalSet::zi`].
    pub zi: Vec<Jet>,
}

impl CalculusFunction {
    /// Constant `α·e` everywhere.
    pub fn constant(cs: &CriticalSet, alpha: C64) -> Self {
        Self {
            scalars: vec![alpha; cs.noncritical.len()],
            crit: cs
                .crit
                .iter()
                .map(|w| Jet::unit(w.shape()).scale(alpha))
                .collect(),
            zi: cs
                .zi
                .iter()
                .map(|z| Jet::unit(z.shape()).scale(alpha))
                .collect(),
        }
    }

    /// `𝟙_N`.
    pub fn one(cs: &CriticalSet) -> Self {
        Self::constant(cs, c(1.0, 0.0))
    }

    pub fn zero(cs: &CriticalSet) -> Self {
        Self::constant(cs, c(0.0, 0.0))
    }

    /// Value at a domain point as a jet (`𝒜₀,₀` for noncritical points).
    pub fn value(&self, point: DomainPoint) -> Jet {
        match point {
            DomainPoint::Noncritical(k) => Jet::scalar(self.scalars[k]),
            DomainPoint::Crit(i) => self.crit[i].clone(),
            DomainPoint::Zi(i) => self.zi[i].clone(),
        }
    }

    /// Replace the value at a domain point.
    pub fn set(&mut self, point: DomainPoint, value: Jet) -> Result<()> {
        let slot = match point {
            DomainPoint::Noncritical(k) => {
                if !value.shape().is_scalar() {
                    return Err(Error::Shape("noncritical points take scalar values".into()));
                }
                self.scalars[k] = value.head();
                return Ok(());
            }
            DomainPoint::Crit(i) => &mut self.crit[i],
            DomainPoint::Zi(i) => &mut self.zi[i],
        };
        if slot.shape() != value.shape() {
            return Err(Error::Shape(format!(
                "expected shape {:?}, got {:?}",
                slot.shape(),
                value.shape()
            )));
        }
        *slot = value;
        Ok(())
    }

    fn check_domain(&self, other: &Self) -> Result<()> {
        if self.scalars.len() != other.scalars.len()
            || self.crit.len() != other.crit.len()
            || self.zi.len() != other.zi.len()
        {
            return Err(Error::Domain(
                "functions live on different critical sets".into(),
            ));
        }
        Ok(())
    }

    fn zip_with(
        &self,
        other: &Self,
        f: impl Fn(C64, C64) -> C64,
        g: impl Fn(&Jet, &Jet) -> Result<Jet>,
    ) -> Result<Self> {
        self.check_domain(other)?;
        Ok(Self {
            scalars: self
                .scalars
                .iter()
                .zip(&other.scalars)
                .map(|(&a, &b)| f(a, b))
                .collect(),
            crit: self
                .crit
                .iter()
                .zip(&other.crit)
                .map(|(a, b)| g(a, b))
                .collect::<Result<_>>()?,
            zi: self
                .zi
                .iter()
                .zip(&other.zi)
                .map(|(a, b)| g(a, b))
                .collect::<Result<_>>()?,
        })
    }

    /// `α·self + β·other`.
    pub fn linear(&self, other: &Self, alpha: C64, beta: C64) -> Result<Self> {
        self.zip_with(
            other,
            |a, b| alpha * a + beta * b,
            |a, b| a.linear(b, alpha, beta),
        )
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.linear(other, c(1.0, 0.0), c(1.0, 0.0))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.linear(other, c(1.0, 0.0), c(-1.0, 0.0))
    }

    pub fn scale(&self, alpha: C64) -> Self {
        Self {
            scalars: self.scalars.iter().map(|&a| alpha * a).collect(),
            crit: self.crit.iter().map(|j| j.scale(alpha)).collect(),
            zi: self.zi.iter().map(|j| j.scale(alpha)).collect(),
        }
    }

    /// Pointwise product.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a * b, |a, b| a.mul(b))
    }

    /// `φ^#`: conjugate values, with `φ^#(ξ, η) = conj φ(ξ̄, η̄)` on `Zⁱ`.
    pub fn sharp(&self, cs: &CriticalSet) -> Self {
        Self {
            scalars: self.scalars.iter().map(|a| a.conj()).collect(),
            crit: self.crit.iter().map(|j| j.conj()).collect(),
            zi: cs.zi.iter().map(|z| self.zi[z.partner].conj()).collect(),
        }
    }

    /// Pointwise inverse; fails at the first non-invertible value.
    pub fn inverse(&self, cs: &CriticalSet, tol: &Tolerances) -> Result<Self> {
        let bad = |p: DomainPoint| Error::NonInvertiblePoint {
            point: format!("{:?} = {}", p, cs.image(p)),
        };
        let scalars = self
            .scalars
            .iter()
            .enumerate()
            .map(|(k, &a)| {
                if a.norm() > tol.abs {
                    Ok(a.inv())
                } else {
                    Err(bad(DomainPoint::Noncritical(k)))
                }
            })
            .collect::<Result<_>>()?;
        let crit = self
            .crit
            .iter()
            .enumerate()
            .map(|(i, j)| j.inverse(tol.abs).map_err(|_| bad(DomainPoint::Crit(i))))
            .collect::<Result<_>>()?;
        let zi = self
            .zi
            .iter()
            .enumerate()
            .map(|(i, j)| j.inverse(tol.abs).map_err(|_| bad(DomainPoint::Zi(i))))
            .collect::<Result<_>>()?;
        Ok(Self { scalars, crit, zi })
    }

    /// Largest modulus over all values and jet entries.
    pub fn max_abs(&self) -> f64 {
        self.scalars
            .iter()
            .map(|a| a.norm())
            .chain(self.crit.iter().chain(&self.zi).map(|j| j.max_abs()))
            .fold(0.0, f64::max)
    }

    /// Largest pointwise distance to `other`.
    pub fn distance(&self, other: &Self) -> Result<f64> {
        Ok(self.sub(other)?.max_abs())
    }
}

/// A closed region of the complex plane.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Region {
    Disk { center: [f64; 2], radius: f64 },
    Rect { x: [f64; 2], y: [f64; 2] },
    Union { regions: Vec<Region> },
}

impl Region {
    pub fn disk(center: C64, radius: f64) -> Self {
        Region::Disk {
            center: [center.re, center.im],
            radius,
        }
    }

    pub fn rect(x: (f64, f64), y: (f64, f64)) -> Self {
        Region::Rect {
            x: [x.0, x.1],
            y: [y.0, y.1],
        }
    }

    pub fn union(regions: Vec<Region>) -> Self {
        Region::Union { regions }
    }

    pub fn contains(&self, z: C64) -> bool {
        match self {
            Region::Disk { center, radius } => (z - c(center[0], center[1])).norm() <= *radius,
            Region::Rect { x, y } => x[0] <= z.re && z.re <= x[1] && y[0] <= z.im && z.im <= y[1],
            Region::Union { regions } => regions.iter().any(|r| r.contains(z)),
        }
    }

    /// Distance from `z` to the boundary (a lower bound for unions).
    pub fn boundary_distance(&self, z: C64) -> f64 {
        match self {
            Region::Disk { center, radius } => {
                ((z - c(center[0], center[1])).norm() - radius).abs()
            }
            Region::Rect { x, y } => {
                if self.contains(z) {
                    (z.re - x[0])
                        .min(x[1] - z.re)
                        .min(z.im - y[0])
                        .min(y[1] - z.im)
                } else {
                    let dx = (x[0] - z.re).max(0.0).max(z.re - x[1]);
                    let dy = (y[0] - z.im).max(0.0).max(z.im - y[1]);
                    dx.hypot(dy)
                }
            }
            Region::Union { regions } => {
                let inside: Vec<f64> = regions
                    .iter()
                    .filter(|r| r.contains(z))
                    .map(|r| r.boundary_distance(z))
                    .collect();
                if inside.is_empty() {
                    regions
                        .iter()
                        .map(|r| r.boundary_distance(z))
                        .fold(f64::INFINITY, f64::min)
                } else {
                    inside.into_iter().fold(0.0, f64::max)
                }
            }
        }
    }
}

/// Outcome of [`FunctionalCalculus::check_invertible`].
#[derive(Debug, Clone, PartialEq)]
pub struct InvertibilityReport {
    pub invertible: bool,
    /// Smallest `|φ(z)₀,₀|` over `σ_N`.
    pub min_modulus: f64,
    /// `‖φ⁻¹(N)·φ(N) − I‖` relative residual when invertible.
    pub residual: Option<f64>,
}

/// Everything needed to evaluate `φ(N)` for one definitizable pair.
#[derive(Debug, Clone)]
pub struct FunctionalCalculus {
    pair: DefinitizablePair,
    bundle: EmbeddingBundle,
    theta_n: CMat,
    spectral: SpectralData,
    cs: CriticalSet,
}

/// `ℛ`-membership tolerance, relative to the size of the values involved.
const IDEAL_TOL: f64 = 1e-9;

impl FunctionalCalculus {
    /// Builds the embedding, diagonalizes `Θ(N)` and assembles the critical set.
    pub fn new(pair: DefinitizablePair) -> Result<Self> {
        let bundle = EmbeddingBundle::build(&pair)?;
        let theta_n = bundle.theta(pair.n())?;
        let mut spectral = SpectralData::diagonalize(&theta_n, pair.tol())?;
        let cs = CriticalSet::build(&pair, &mut spectral)?;
        Ok(Self {
            pair,
            bundle,
            theta_n,
            spectral,
            cs,
        })
    }

    pub fn pair(&self) -> &DefinitizablePair {
        &self.pair
    }

    pub fn bundle(&self) -> &EmbeddingBundle {
        &self.bundle
    }

    /// `Θ(N)` on V.
    pub fn theta_n(&self) -> &CMat {
        &self.theta_n
    }

    pub fn spectral(&self) -> &SpectralData {
        &self.spectral
    }

    pub fn critical_set(&self) -> &CriticalSet {
        &self.cs
    }

    pub fn tol(&self) -> &Tolerances {
        self.pair.tol()
    }

    pub fn one(&self) -> CalculusFunction {
        CalculusFunction::one(&self.cs)
    }

    pub fn zero(&self) -> CalculusFunction {
        CalculusFunction::zero(&self.cs)
    }

    /// `s_N`: values `s(ℜλ, ℑλ)`, real-variable jets at critical points and
    /// holomorphic jets on `Zⁱ`.
    pub fn lift(&self, s: &BiPoly) -> CalculusFunction {
        let cs = &self.cs;
        CalculusFunction {
            scalars: cs
                .noncritical
                .iter()
                .map(|&k| {
                    let z = cs.sigma_theta[k];
                    s.eval(c(z.re, 0.0), c(z.im, 0.0))
                })
                .collect(),
            crit: cs
                .crit
                .iter()
                .map(|w| jet_of_poly(s, (c(w.value.re, 0.0), c(w.value.im, 0.0)), w.shape()))
                .collect(),
            zi: cs
                .zi
                .iter()
                .map(|z| jet_of_poly(s, (z.xi, z.eta), z.shape()))
                .collect(),
        }
    }

    /// `a·δ_ζ`.
    pub fn delta(&self, point: DomainPoint, a: Jet) -> Result<CalculusFunction> {
        let mut f = self.zero();
        self.check_point(point)?;
        f.set(point, a)?;
        Ok(f)
    }

    fn check_point(&self, point: DomainPoint) -> Result<()> {
        let ok = match point {
            DomainPoint::Noncritical(k) => k < self.cs.noncritical.len(),
            DomainPoint::Crit(i) => i < self.cs.crit.len(),
            DomainPoint::Zi(i) => i < self.cs.zi.len(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Domain(format!("{point:?} is not a domain point")))
        }
    }

    /// `(𝟙_{τ(Δ)})_N`.
    ///
    /// Critical points of `σ(N)` must keep a margin of `tol.boundary() · scale`
    /// from `∂Δ`. On `Zⁱ` a conjugate pair gets the unit jet when either image
    /// lies in `Δ`; if exactly one does and the pair belongs to `σ_N`, the
    /// region is rejected since the result would not be Krein-selfadjoint.
    pub fn indicator(&self, region: &Region) -> Result<CalculusFunction> {
        let cs = &self.cs;
        let margin = self.tol().boundary() * cs.scale;
        let one = c(1.0, 0.0);
        let zero = c(0.0, 0.0);
        let mut f = self.zero();
        for (k, &idx) in cs.noncritical.iter().enumerate() {
            f.scalars[k] = if region.contains(cs.sigma_theta[idx]) {
                one
            } else {
                zero
            };
        }
        for (i, w) in cs.crit.iter().enumerate() {
            if w.in_sigma_n {
                let distance = region.boundary_distance(w.value);
                if distance <= margin {
                    return Err(Error::BoundaryTouchesCritical {
                        point: w.value,
                        distance,
                    });
                }
            }
            if region.contains(w.value) {
                f.crit[i] = Jet::unit(w.shape());
            }
        }
        for (i, z) in cs.zi.iter().enumerate() {
            let (a, b) = (
                region.contains(z.image()),
                region.contains(z.partner_image()),
            );
            if a != b && z.in_sigma_n {
                return Err(Error::SplitConjugatePair {
                    first: z.image(),
                    second: z.partner_image(),
                });
            }
            if a || b {
                f.zi[i] = Jet::unit(z.shape());
            }
        }
        Ok(f)
    }

    /// The interpolating polynomial `s` with `φ − s_N ∈ ℛ`.
    pub fn interpolant(&self, phi: &CalculusFunction) -> Result<Interpolant> {
        let cs = &self.cs;
        let grid = &cs.grid;
        let targets: Vec<Jet> = grid
            .pairs()
            .into_iter()
            .map(|ij| {
                if let Some(w) = cs.crit.iter().position(|w| w.grid == ij) {
                    phi.crit[w].pi()
                } else {
                    let k = cs
                        .zi
                        .iter()
                        .position(|z| z.grid == ij)
                        .expect("every grid pair is critical or in Zi");
                    phi.zi[k].clone()
                }
            })
            .collect();
        hermite_interpolate(&targets, grid)
    }

    /// `g` on the spectral points of `Θ(N)` with `φ = s_N + (p_N + q_N)·g`.
    pub fn remainder(&self, phi: &CalculusFunction, s: &BiPoly) -> Result<Vec<PointValue>> {
        let cs = &self.cs;
        let sn = self.lift(s);
        let diff = phi.sub(&sn)?;
        for (k, d) in diff.crit.iter().chain(&diff.zi).enumerate() {
            let (a, b) = if k < diff.crit.len() {
                (&phi.crit[k], &sn.crit[k])
            } else {
                (&phi.zi[k - diff.crit.len()], &sn.zi[k - diff.crit.len()])
            };
            let residual = d.pi().max_abs();
            let threshold = IDEAL_TOL * (1.0 + a.max_abs().max(b.max_abs()));
            if residual > threshold {
                return Err(Error::NotInIdeal {
                    residual,
                    threshold,
                });
            }
        }
        let (p, q) = (self.pair.p(), self.pair.q());
        let mut g = vec![PointValue::Scalar(c(0.0, 0.0)); self.spectral.points().len()];
        for (k, &idx) in cs.noncritical.iter().enumerate() {
            let z = cs.sigma_theta[idx];
            let denom = p.eval(z.re) + q.eval(z.im);
            g[idx] = PointValue::Scalar(diff.scalars[k] / denom);
        }
        for (i, w) in cs.crit.iter().enumerate() {
            if let Some(idx) = w.spectral {
                let jet = &diff.crit[i];
                let pk = p.taylor_coeff(w.dp, c(w.value.re, 0.0));
                let qk = q.taylor_coeff(w.dq, c(w.value.im, 0.0));
                let g1 = jet.get(w.dp, 0).expect("overflow slot") / pk;
                let g2 = jet.get(0, w.dq).expect("overflow slot") / qk;
                g[idx] = PointValue::Pair(g1, g2);
            }
        }
        Ok(g)
    }

    /// `φ(N)`.
    pub fn apply(&self, phi: &CalculusFunction) -> Result<CMat> {
        let s = self.interpolant(phi)?.poly;
        self.apply_with(phi, &s)
    }

    /// `φ(N)` computed from a caller-supplied `s` with `φ − s_N ∈ ℛ`.
    pub fn apply_with(&self, phi: &CalculusFunction, s: &BiPoly) -> Result<CMat> {
        let g = self.remainder(phi, s)?;
        let d = self
            .spectral
            .augmented_integral(&g, &self.bundle.rrs(1), &self.bundle.rrs(2))?;
        let xi = self.bundle.xi(&d)?;
        Ok(s.at_matrices(self.pair.a(), self.pair.b()) + xi)
    }

    /// `φ` with the values outside `σ_N` set to zero.
    pub fn restrict_to_support(&self, phi: &CalculusFunction) -> CalculusFunction {
        let mut out = phi.clone();
        for (i, w) in self.cs.crit.iter().enumerate() {
            if !w.in_sigma_n {
                out.crit[i] = Jet::zero(w.shape());
            }
        }
        for (i, z) in self.cs.zi.iter().enumerate() {
            if !z.in_sigma_n {
                out.zi[i] = Jet::zero(z.shape());
            }
        }
        out
    }

    /// `(eδ_ζ)(N)`.
    pub fn riesz_projection(&self, point: DomainPoint) -> Result<CMat> {
        let e = Jet::unit(self.cs.shape(point));
        self.apply(&self.delta(point, e)?)
    }

    /// `(𝟙_{τ(Δ)})_N(N)`.
    pub fn spectral_projection(&self, region: &Region) -> Result<CMat> {
        self.apply(&self.indicator(region)?)
    }

    /// `σ(N)` assembled from `σ(Θ(N))`, the critical points and `Zⁱ`.
    pub fn spectrum_of_n(&self) -> Vec<C64> {
        self.cs.spectrum_of_n(self.tol())
    }

    /// Invertibility of every value on `σ_N`, certified through
    /// `φ⁻¹(N)·φ(N) = I` when it holds.
    pub fn check_invertible(&self, phi: &CalculusFunction) -> InvertibilityReport {
        let tol = self.tol();
        let support = self.cs.support();
        let min_modulus = support
            .iter()
            .map(|&d| phi.value(d).head().norm())
            .fold(f64::INFINITY, f64::min);
        if !(min_modulus > tol.abs) {
            return InvertibilityReport {
                invertible: false,
                min_modulus,
                residual: None,
            };
        }
        // Outside σ_N the values are immaterial; use the unit there.
        let mut filled = phi.clone();
        for d in self.cs.domain() {
            if !self.cs.in_support(d) {
                filled
                    .set(d, Jet::unit(self.cs.shape(d)))
                    .expect("matching shape");
            }
        }
        let residual = filled
            .inverse(&self.cs, tol)
            .and_then(|inv| Ok(self.apply(&inv)? * self.apply(&filled)?))
            .map(|prod| rel_diff(&prod, &linalg::eye(self.pair.dim())))
            .ok();
        InvertibilityReport {
            invertible: residual.is_some(),
            min_modulus,
            residual,
        }
    }
}
