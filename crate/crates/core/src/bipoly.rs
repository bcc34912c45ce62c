//! Polynomial machinery: real univariate polynomials and their zeros,
//! complex bivariate polynomials, jets of polynomials, the Euclidean
//! reduction modulo `a(z)` and `b(w)`, the evaluation map `ϖ` on a zero grid,
//! and its inverse by bivariate Hermite interpolation.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::jets::{Jet, JetShape};
use crate::linalg::{self, c, cluster};
use crate::{CMat, Error, Result, Tolerances, C64};

/// Binomial coefficient as a float.
pub fn binom(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

fn factorial(n: usize) -> f64 {
    (1..=n).fold(1.0, |acc, i| acc * i as f64)
}

/// Real polynomial with ascending coefficients; trailing zeros are trimmed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(from = "Vec<f64>", into = "Vec<f64>")]
pub struct RealUniPoly {
    coeffs: Vec<f64>,
}

impl From<Vec<f64>> for RealUniPoly {
    fn from(v: Vec<f64>) -> Self {
        Self::new(v)
    }
}

impl From<RealUniPoly> for Vec<f64> {
    fn from(p: RealUniPoly) -> Self {
        p.coeffs
    }
}

impl RealUniPoly {
    pub fn new(mut coeffs: Vec<f64>) -> Self {
        while coeffs.last() == Some(&0.0) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    pub fn constant(c0: f64) -> Self {
        Self::new(vec![c0])
    }

    /// The monomial `z`.
    pub fn z() -> Self {
        Self::new(vec![0.0, 1.0])
    }

    /// `∏ (z − rᵢ)` over real roots.
    pub fn from_real_roots(roots: &[f64]) -> Self {
        roots.iter().fold(Self::constant(1.0), |acc, &r| {
            acc.mul(&Self::new(vec![-r, 1.0]))
        })
    }

    /// `|z − μ|² = z² − 2ℜμ·z + |μ|²`, positive on the real line off `μ`.
    pub fn conjugate_pair_factor(mu: C64) -> Self {
        Self::new(vec![mu.norm_sqr(), -2.0 * mu.re, 1.0])
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree; the zero polynomial reports 0.
    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn leading(&self) -> f64 {
        self.coeffs.last().copied().unwrap_or(0.0)
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &ck| acc * x + ck)
    }

    pub fn eval_c(&self, x: C64) -> C64 {
        self.coeffs
            .iter()
            .rev()
            .fold(c(0.0, 0.0), |acc, &ck| acc * x + ck)
    }

    pub fn derivative(&self) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, &ck)| i as f64 * ck)
                .collect(),
        )
    }

    /// `p^{(k)}(x)`.
    pub fn derivative_at(&self, k: usize, x: C64) -> C64 {
        self.taylor_coeff(k, x) * factorial(k)
    }

    /// `p^{(k)}(x) / k!`.
    pub fn taylor_coeff(&self, k: usize, x: C64) -> C64 {
        let mut acc = c(0.0, 0.0);
        for i in (k..self.coeffs.len()).rev() {
            acc = acc * x + self.coeffs[i] * binom(i, k);
        }
        acc
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        Self::new(
            (0..n)
                .map(|i| {
                    self.coeffs.get(i).copied().unwrap_or(0.0)
                        + other.coeffs.get(i).copied().unwrap_or(0.0)
                })
                .collect(),
        )
    }

    pub fn scale(&self, alpha: f64) -> Self {
        Self::new(self.coeffs.iter().map(|&ck| alpha * ck).collect())
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        let mut out = vec![0.0; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Self::new(out)
    }

    pub fn pow(&self, e: usize) -> Self {
        (0..e).fold(Self::constant(1.0), |acc, _| acc.mul(self))
    }

    /// `p(M)` by Horner's rule.
    pub fn at_matrix(&self, m: &CMat) -> CMat {
        let cs: Vec<C64> = self.coeffs.iter().map(|&x| c(x, 0.0)).collect();
        linalg::poly_at_matrix(&cs, m)
    }

    /// `Σ|cᵢ|·rⁱ`, a bound for `‖p(M)‖` when `‖M‖ ≤ r` (and for the rounding
    /// error of evaluating it, up to a unit roundoff factor).
    pub fn coefficient_bound(&self, r: f64) -> f64 {
        self.coeffs
            .iter()
            .rev()
            .fold(0.0, |acc, ci| acc * r + ci.abs())
    }

    /// Coefficient scale `Σ|cᵢ|·max(1,|x|)^i` used for relative residuals at `x`.
    fn magnitude_at(&self, k: usize, x: C64) -> f64 {
        let r = x.norm().max(1.0);
        self.coeffs
            .iter()
            .enumerate()
            .skip(k)
            .map(|(i, &ci)| ci.abs() * binom(i, k) * r.powi((i - k) as i32))
            .sum()
    }
}

/// A zero `ζ` with multiplicity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Zero {
    pub value: C64,
    pub multiplicity: usize,
}

impl Zero {
    pub fn is_real(&self) -> bool {
        self.value.im == 0.0
    }
}

/// Newton iteration for a root of `f` started at `x0`; returns the iterate
/// with the smallest residual.
fn newton_polish(f: &RealUniPoly, x0: C64) -> C64 {
    let df = f.derivative();
    let mut best = x0;
    let mut best_res = f.eval_c(x0).norm();
    let mut x = x0;
    for _ in 0..30 {
        let d = df.eval_c(x);
        if d.norm() == 0.0 {
            break;
        }
        let step = f.eval_c(x) / d;
        x -= step;
        let res = f.eval_c(x).norm();
        if res < best_res {
            best = x;
            best_res = res;
        }
        if step.norm() <= f64::EPSILON * (1.0 + x.norm()) {
            break;
        }
    }
    best
}

/// Radius, relative to `1 + max|ζ|`, inside which nearby companion
/// eigenvalues are tentatively treated as one multiple zero.
const LOOSE_ROOT_RADIUS: f64 = 1e-3;
/// Acceptance level for the normalized Taylor coefficients of a tentative
/// multiple zero.
const MULTIPLE_ROOT_CHECK: f64 = 1e-12;

/// Zeros of `a` with multiplicities.
///
/// Companion-matrix eigenvalues are grouped generously, each group of size
/// `k` is accepted as a `k`-fold zero when the Taylor coefficients of `a`
/// below order `k` vanish at the Newton-polished center, and otherwise split
/// by single-linkage clustering at `tol.cluster`. Near-real centers are
/// snapped to the real axis and nonreal zeros are made conjugate-symmetric.
pub fn poly_zeros(a: &RealUniPoly, tol: &Tolerances) -> Result<Vec<Zero>> {
    if a.is_zero() {
        return Err(Error::Degenerate("zero polynomial has no zero set".into()));
    }
    let deg = a.degree();
    if deg == 0 {
        return Ok(Vec::new());
    }
    let lead = a.leading();
    let mut comp = CMat::zeros(deg, deg);
    for i in 1..deg {
        comp[(i, i - 1)] = c(1.0, 0.0);
    }
    for i in 0..deg {
        comp[(i, deg - 1)] = c(-a.coeffs[i] / lead, 0.0);
    }
    let roots = linalg::eigenvalues(&comp);
    let scale = 1.0 + roots.iter().map(|z| z.norm()).fold(0.0, f64::max);

    let mut zeros: Vec<Zero> = Vec::new();
    for group in cluster(&roots, LOOSE_ROOT_RADIUS * scale) {
        let k = group.members.len();
        let center = newton_polish(&derivative_n(a, k - 1), group.center);
        if k == 1 || is_multiple_zero(a, center, k, scale) {
            zeros.push(Zero {
                value: center,
                multiplicity: k,
            });
        } else {
            let members: Vec<C64> = group.members.iter().map(|&i| roots[i]).collect();
            for sub in cluster(&members, tol.cluster * scale) {
                let m = sub.members.len();
                zeros.push(Zero {
                    value: newton_polish(&derivative_n(a, m - 1), sub.center),
                    multiplicity: m,
                });
            }
        }
    }

    let snap = tol.cluster * scale;
    for z in &mut zeros {
        if z.value.im.abs() <= snap {
            z.value.im = 0.0;
        }
    }
    Ok(symmetrize(zeros, deg))
}

fn derivative_n(a: &RealUniPoly, k: usize) -> RealUniPoly {
    (0..k).fold(a.clone(), |p, _| p.derivative())
}

fn is_multiple_zero(a: &RealUniPoly, center: C64, k: usize, scale: f64) -> bool {
    let tk = a.taylor_coeff(k, center).norm();
    if tk == 0.0 {
        return false;
    }
    (0..k).all(|j| {
        let tj = a.taylor_coeff(j, center).norm();
        let normalized = tj / (tk * scale.powi((k - j) as i32));
        let rounding =
            a.magnitude_at(j, center) * f64::EPSILON * 64.0 / (tk * scale.powi((k - j) as i32));
        normalized <= MULTIPLE_ROOT_CHECK.max(rounding)
    })
}

/// Replace the lower-half-plane zeros by conjugates of the upper-half-plane
/// ones when the multiplicities allow it; order: real zeros ascending, then
/// upper zeros by real part, each followed by its conjugate.
fn symmetrize(zeros: Vec<Zero>, deg: usize) -> Vec<Zero> {
    let mut real: Vec<Zero> = zeros.iter().copied().filter(|z| z.is_real()).collect();
    let mut upper: Vec<Zero> = zeros.iter().copied().filter(|z| z.value.im > 0.0).collect();
    let lower_mult: usize = zeros
        .iter()
        .filter(|z| z.value.im < 0.0)
        .map(|z| z.multiplicity)
        .sum();
    let upper_mult: usize = upper.iter().map(|z| z.multiplicity).sum();
    let real_mult: usize = real.iter().map(|z| z.multiplicity).sum();
    if lower_mult != upper_mult || real_mult + 2 * upper_mult != deg {
        return zeros;
    }
    real.sort_by(|x, y| x.value.re.total_cmp(&y.value.re));
    upper.sort_by(|x, y| {
        x.value
            .re
            .total_cmp(&y.value.re)
            .then(x.value.im.total_cmp(&y.value.im))
    });
    let mut out = real;
    for z in upper {
        out.push(z);
        out.push(Zero {
            value: z.value.conj(),
            multiplicity: z.multiplicity,
        });
    }
    out
}

/// Complex bivariate polynomial `Σ c_{ij} zⁱ wʲ`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct BiPoly {
    coeffs: BTreeMap<(usize, usize), C64>,
}

impl BiPoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(value: C64) -> Self {
        Self::from_terms([((0, 0), value)])
    }

    pub fn one() -> Self {
        Self::constant(c(1.0, 0.0))
    }

    /// The monomial `zⁱ wʲ`.
    pub fn monomial(i: usize, j: usize) -> Self {
        Self::from_terms([((i, j), c(1.0, 0.0))])
    }

    /// Sum of terms; repeated exponents are added, exact zeros dropped.
    pub fn from_terms(terms: impl IntoIterator<Item = ((usize, usize), C64)>) -> Self {
        let mut coeffs = BTreeMap::new();
        for (e, v) in terms {
            *coeffs.entry(e).or_insert(c(0.0, 0.0)) += v;
        }
        let mut p = Self { coeffs };
        p.trim();
        p
    }

    /// `a(z)` viewed as a bivariate polynomial.
    pub fn from_z(a: &RealUniPoly) -> Self {
        Self::from_terms(
            a.coeffs()
                .iter()
                .enumerate()
                .map(|(i, &x)| ((i, 0), c(x, 0.0))),
        )
    }

    /// `b(w)` viewed as a bivariate polynomial.
    pub fn from_w(b: &RealUniPoly) -> Self {
        Self::from_terms(
            b.coeffs()
                .iter()
                .enumerate()
                .map(|(j, &x)| ((0, j), c(x, 0.0))),
        )
    }

    fn trim(&mut self) {
        self.coeffs.retain(|_, v| *v != c(0.0, 0.0));
    }

    pub fn terms(&self) -> impl Iterator<Item = ((usize, usize), C64)> + '_ {
        self.coeffs.iter().map(|(&e, &v)| (e, v))
    }

    pub fn coeff(&self, i: usize, j: usize) -> C64 {
        self.coeffs.get(&(i, j)).copied().unwrap_or(c(0.0, 0.0))
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn deg_z(&self) -> usize {
        self.coeffs.keys().map(|e| e.0).max().unwrap_or(0)
    }

    pub fn deg_w(&self) -> usize {
        self.coeffs.keys().map(|e| e.1).max().unwrap_or(0)
    }

    /// Largest coefficient modulus.
    pub fn max_abs(&self) -> f64 {
        self.coeffs.values().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn is_real(&self) -> bool {
        self.coeffs.values().all(|v| v.im == 0.0)
    }

    pub fn add(&self, other: &Self) -> Self {
        Self::from_terms(self.terms().chain(other.terms()))
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self::from_terms(self.terms().chain(other.terms().map(|(e, v)| (e, -v))))
    }

    pub fn scale(&self, alpha: C64) -> Self {
        Self::from_terms(self.terms().map(|(e, v)| (e, alpha * v)))
    }

    pub fn mul(&self, other: &Self) -> Self {
        Self::from_terms(self.terms().flat_map(|((i, j), a)| {
            other
                .terms()
                .map(move |((k, l), b)| ((i + k, j + l), a * b))
        }))
    }

    pub fn eval(&self, z: C64, w: C64) -> C64 {
        self.terms()
            .map(|((i, j), v)| v * z.powu(i as u32) * w.powu(j as u32))
            .sum()
    }

    /// `s(A, B) = Σ c_{ij} AⁱBʲ` for commuting square `A`, `B`; powers are
    /// computed once.
    pub fn at_matrices(&self, a: &CMat, b: &CMat) -> CMat {
        let n = a.nrows();
        let mut out = CMat::zeros(n, n);
        if self.is_zero() {
            return out;
        }
        let a_pows = powers(a, self.deg_z());
        let b_pows = powers(b, self.deg_w());
        for ((i, j), v) in self.terms() {
            out += (&a_pows[i] * &b_pows[j]) * v;
        }
        out
    }

    /// Relative coefficient distance `max|Δc| / (1 + max|c|)`.
    pub fn rel_diff(&self, other: &Self) -> f64 {
        let d = self.sub(other).max_abs();
        d / (1.0 + self.max_abs().max(other.max_abs()))
    }
}

fn powers(m: &CMat, k: usize) -> Vec<CMat> {
    let mut out = vec![linalg::eye(m.nrows())];
    for i in 1..=k {
        let next = &out[i - 1] * m;
        out.push(next);
    }
    out
}

/// Jet of `s` at `(z₀, w₀)`: entry `(k, l)` is `∂ᶻᵏ∂ʷˡ s(z₀, w₀) / (k! l!)`,
/// obtained exactly by shifting coefficients.
///
/// For real `z₀`, `w₀` these coincide with the real-variable derivatives of
/// `x + iy ↦ s(x, y)`.
pub fn jet_of_poly(s: &BiPoly, point: (C64, C64), shape: JetShape) -> Jet {
    let (z0, w0) = point;
    let entries = shape.indices().into_iter().map(|(k, l)| {
        let v: C64 = s
            .terms()
            .filter(|&((i, j), _)| i >= k && j >= l)
            .map(|((i, j), v)| {
                v * binom(i, k) * binom(j, l) * z0.powu((i - k) as u32) * w0.powu((j - l) as u32)
            })
            .sum();
        ((k, l), v)
    });
    Jet::from_entries(shape, entries).expect("indices come from the shape")
}

/// Long division of a complex univariate polynomial by a real one.
fn divide_uni(num: &[C64], den: &RealUniPoly) -> (Vec<C64>, Vec<C64>) {
    let m = den.degree();
    let lead = den.leading();
    let mut rem = num.to_vec();
    if rem.len() <= m {
        return (Vec::new(), rem);
    }
    let mut quot = vec![c(0.0, 0.0); rem.len() - m];
    for top in (m..rem.len()).rev() {
        let qk = rem[top] / lead;
        quot[top - m] = qk;
        for (i, &d) in den.coeffs().iter().enumerate() {
            rem[top - m + i] -= qk * d;
        }
        rem[top] = c(0.0, 0.0);
    }
    rem.truncate(m);
    (quot, rem)
}

/// `s = a(z)·u + b(w)·v + r` with `deg_z r < deg a` and `deg_w r < deg b`;
/// `s` is first divided by `a` in `z`, the remainder then by `b` in `w`.
pub fn euclid_reduce(
    s: &BiPoly,
    a: &RealUniPoly,
    b: &RealUniPoly,
) -> Result<(BiPoly, BiPoly, BiPoly)> {
    if a.is_zero() || b.is_zero() {
        return Err(Error::Degenerate("division by the zero polynomial".into()));
    }
    let mut u_terms = Vec::new();
    let mut r1_terms = Vec::new();
    for j in 0..=s.deg_w() {
        let col: Vec<C64> = (0..=s.deg_z()).map(|i| s.coeff(i, j)).collect();
        let (q, r) = divide_uni(&col, a);
        u_terms.extend(q.into_iter().enumerate().map(|(i, v)| ((i, j), v)));
        r1_terms.extend(r.into_iter().enumerate().map(|(i, v)| ((i, j), v)));
    }
    let r1 = BiPoly::from_terms(r1_terms);
    let mut v_terms = Vec::new();
    let mut r_terms = Vec::new();
    for i in 0..=r1.deg_z() {
        let row: Vec<C64> = (0..=r1.deg_w()).map(|j| r1.coeff(i, j)).collect();
        let (q, r) = divide_uni(&row, b);
        v_terms.extend(q.into_iter().enumerate().map(|(j, v)| ((i, j), v)));
        r_terms.extend(r.into_iter().enumerate().map(|(j, v)| ((i, j), v)));
    }
    Ok((
        BiPoly::from_terms(u_terms),
        BiPoly::from_terms(v_terms),
        BiPoly::from_terms(r_terms),
    ))
}

/// Zeros of `a(z)` and `b(w)` with the derived index sets.
#[derive(Debug, Clone, PartialEq)]
pub struct ZeroGrid {
    pub a_zeros: Vec<Zero>,
    pub b_zeros: Vec<Zero>,
    /// Indices into `a_zeros` of the real zeros.
    pub real_a: Vec<usize>,
    /// Indices into `b_zeros` of the real zeros.
    pub real_b: Vec<usize>,
    /// Index pairs `(i, j)` with `a_zeros[i]` or `b_zeros[j]` nonreal.
    pub cross: Vec<(usize, usize)>,
}

impl ZeroGrid {
    pub fn new(a: &RealUniPoly, b: &RealUniPoly, tol: &Tolerances) -> Result<Self> {
        Ok(Self::from_zeros(poly_zeros(a, tol)?, poly_zeros(b, tol)?))
    }

    pub fn from_zeros(a_zeros: Vec<Zero>, b_zeros: Vec<Zero>) -> Self {
        let real_a = (0..a_zeros.len())
            .filter(|&i| a_zeros[i].is_real())
            .collect();
        let real_b = (0..b_zeros.len())
            .filter(|&j| b_zeros[j].is_real())
            .collect();
        let mut cross = Vec::new();
        for (i, za) in a_zeros.iter().enumerate() {
            for (j, zb) in b_zeros.iter().enumerate() {
                if !(za.is_real() && zb.is_real()) {
                    cross.push((i, j));
                }
            }
        }
        Self {
            a_zeros,
            b_zeros,
            real_a,
            real_b,
            cross,
        }
    }

    pub fn deg_a(&self) -> usize {
        self.a_zeros.iter().map(|z| z.multiplicity).sum()
    }

    pub fn deg_b(&self) -> usize {
        self.b_zeros.iter().map(|z| z.multiplicity).sum()
    }

    /// All index pairs, `a`-major.
    pub fn pairs(&self) -> Vec<(usize, usize)> {
        (0..self.a_zeros.len())
            .flat_map(|i| (0..self.b_zeros.len()).map(move |j| (i, j)))
            .collect()
    }

    /// The grid point of an index pair.
    pub fn point(&self, (i, j): (usize, usize)) -> (C64, C64) {
        (self.a_zeros[i].value, self.b_zeros[j].value)
    }

    /// `ℬ` shape at an index pair: the two multiplicities.
    pub fn shape(&self, (i, j): (usize, usize)) -> JetShape {
        JetShape::b(self.a_zeros[i].multiplicity, self.b_zeros[j].multiplicity)
            .expect("multiplicities are positive")
    }
}

/// `ϖ(s)`: holomorphic jets of `s` at every grid pair, in [`ZeroGrid::pairs`] order.
pub fn varpi(s: &BiPoly, grid: &ZeroGrid) -> Vec<Jet> {
    grid.pairs()
        .into_iter()
        .map(|ij| jet_of_poly(s, grid.point(ij), grid.shape(ij)))
        .collect()
}

/// Result of [`hermite_interpolate`].
#[derive(Debug, Clone)]
pub struct Interpolant {
    pub poly: BiPoly,
    /// 2-norm condition number of the interpolation matrix.
    pub condition: f64,
}

/// Condition numbers above this are reported as a conditioning error.
const MAX_CONDITION: f64 = 1e13;

/// The unique `r` with `deg_z r < deg a`, `deg_w r < deg b` and `ϖ(r) = targets`;
/// `targets` are aligned with [`ZeroGrid::pairs`].
pub fn hermite_interpolate(targets: &[Jet], grid: &ZeroGrid) -> Result<Interpolant> {
    let pairs = grid.pairs();
    if targets.len() != pairs.len() {
        return Err(Error::Shape(format!(
            "expected {} target jets, got {}",
            pairs.len(),
            targets.len()
        )));
    }
    let (m, n) = (grid.deg_a(), grid.deg_b());
    let size = m * n;
    if size == 0 {
        return Ok(Interpolant {
            poly: BiPoly::zero(),
            condition: 1.0,
        });
    }
    let mut mat = CMat::zeros(size, size);
    let mut rhs = CMat::zeros(size, 1);
    let mut row = 0;
    for (ij, target) in pairs.iter().zip(targets) {
        let shape = grid.shape(*ij);
        if target.shape() != shape {
            return Err(Error::Shape(format!(
                "target at grid pair {ij:?} has shape {:?}, expected {shape:?}",
                target.shape()
            )));
        }
        let (z0, w0) = grid.point(*ij);
        for ((k, l), value) in target.entries() {
            for i in k..m {
                for j in l..n {
                    mat[(row, i * n + j)] = z0.powu((i - k) as u32)
                        * w0.powu((j - l) as u32)
                        * (binom(i, k) * binom(j, l));
                }
            }
            rhs[(row, 0)] = value;
            row += 1;
        }
    }
    let sv = linalg::singular_values(&mat);
    let smax = sv.first().copied().unwrap_or(0.0);
    let smin = sv.last().copied().unwrap_or(f64::INFINITY);
    let condition = if smin > 0.0 {
        smax / smin
    } else {
        f64::INFINITY
    };
    if !(condition <= MAX_CONDITION) {
        return Err(Error::Conditioning { condition });
    }
    let sol = linalg::solve(&mat, &rhs).ok_or(Error::Conditioning {
        condition: f64::INFINITY,
    })?;
    let poly = BiPoly::from_terms(
        (0..m)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .map(|(i, j)| ((i, j), sol[(i * n + j, 0)])),
    );
    Ok(Interpolant { poly, condition })
}

/// Serialized bivariate polynomial: `[[dz, dw, re, im], ...]`.
pub type BiPolyRecord = Vec<(usize, usize, f64, f64)>;

impl From<&BiPoly> for BiPolyRecord {
    fn from(p: &BiPoly) -> Self {
        p.terms().map(|((i, j), v)| (i, j, v.re, v.im)).collect()
    }
}

impl From<&BiPolyRecord> for BiPoly {
    fn from(r: &BiPolyRecord) -> Self {
        BiPoly::from_terms(r.iter().map(|&(i, j, re, im)| ((i, j), c(re, im))))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn zeros_of(coeffs: Vec<f64>) -> Vec<Zero> {
        poly_zeros(&RealUniPoly::new(coeffs), &tol()).unwrap()
    }

    #[test]
    fn zeros_of_monomials() {
        let z = zeros_of(vec![0.0, 1.0]);
        assert_eq!(z.len(), 1);
        assert_eq!(z[0].multiplicity, 1);
        assert!(z[0].value.norm() < 1e-14);
        let z = zeros_of(vec![0.0, 0.0, 1.0]);
        assert_eq!(z.len(), 1);
        assert_eq!(z[0].multiplicity, 2);
        assert!(z[0].value.norm() < 1e-12);
        assert!(poly_zeros(&RealUniPoly::zero(), &tol()).is_err());
        assert!(zeros_of(vec![3.0]).is_empty());
    }

    #[test]
    fn zeros_with_multiplicity() {
        // (z−1)²(z+2) = z³ − 3z + 2
        let z = zeros_of(vec![2.0, -3.0, 0.0, 1.0]);
        assert_eq!(z.len(), 2);
        let find = |x: f64| {
            z.iter()
                .find(|q| (q.value - c(x, 0.0)).norm() < 1e-9)
                .unwrap()
        };
        assert_eq!(find(1.0).multiplicity, 2);
        assert_eq!(find(-2.0).multiplicity, 1);
        assert!(z.iter().all(|q| q.is_real()));
    }

    #[test]
    fn high_multiplicity_and_pairs() {
        // (z − 0.5)⁴ (z² + 1)² (z + 1)
        let p = RealUniPoly::from_real_roots(&[0.5; 4])
            .mul(&RealUniPoly::conjugate_pair_factor(c(0.0, 1.0)).pow(2))
            .mul(&RealUniPoly::from_real_roots(&[-1.0]));
        let z = poly_zeros(&p, &tol()).unwrap();
        assert_eq!(z.iter().map(|q| q.multiplicity).sum::<usize>(), p.degree());
        let half = z
            .iter()
            .find(|q| (q.value - c(0.5, 0.0)).norm() < 1e-9)
            .unwrap();
        assert_eq!(half.multiplicity, 4);
        assert!(half.is_real());
        let up = z
            .iter()
            .find(|q| (q.value - c(0.0, 1.0)).norm() < 1e-9)
            .unwrap();
        let down = z
            .iter()
            .find(|q| (q.value - c(0.0, -1.0)).norm() < 1e-9)
            .unwrap();
        assert_eq!(up.multiplicity, 2);
        assert_eq!(down.value, up.value.conj());
    }

    #[test]
    fn nearby_distinct_roots_stay_apart() {
        let p = RealUniPoly::from_real_roots(&[1.0, 1.0 + 1e-4]);
        let z = poly_zeros(&p, &tol()).unwrap();
        assert_eq!(z.len(), 2);
    }

    #[test]
    fn jet_of_constant_is_unit() {
        let shape = JetShape::a(2, 3).unwrap();
        let j = jet_of_poly(&BiPoly::one(), (c(0.3, 0.0), c(-1.0, 0.0)), shape);
        assert_eq!(j, Jet::unit(shape));
    }

    #[test]
    fn jet_of_square_at_origin() {
        let s = BiPoly::monomial(2, 0);
        let shape = JetShape::a(2, 2).unwrap();
        let j = jet_of_poly(&s, (c(0.0, 0.0), c(0.7, 0.0)), shape);
        for ((k, l), v) in j.entries() {
            let expected = if (k, l) == (2, 0) { 1.0 } else { 0.0 };
            assert_eq!(v, c(expected, 0.0));
        }
    }

    #[test]
    fn jet_of_linear_form() {
        let (xi, eta, lambda) = (c(0.5, 1.0), c(-1.0, 2.0), c(0.25, -0.5));
        let s = BiPoly::from_terms([
            ((1, 0), c(1.0, 0.0)),
            ((0, 1), c(0.0, 1.0)),
            ((0, 0), -lambda),
        ]);
        let j = jet_of_poly(&s, (xi, eta), JetShape::b(2, 2).unwrap());
        assert!((j.get(0, 0).unwrap() - (xi + c(0.0, 1.0) * eta - lambda)).norm() < 1e-15);
        assert_eq!(j.get(1, 0).unwrap(), c(1.0, 0.0));
        assert_eq!(j.get(0, 1).unwrap(), c(0.0, 1.0));
        assert_eq!(j.get(1, 1).unwrap(), c(0.0, 0.0));
    }

    fn expand(u: &BiPoly, v: &BiPoly, r: &BiPoly, a: &RealUniPoly, b: &RealUniPoly) -> BiPoly {
        BiPoly::from_z(a)
            .mul(u)
            .add(&BiPoly::from_w(b).mul(v))
            .add(r)
    }

    #[test]
    fn euclid_examples() {
        let a = RealUniPoly::new(vec![0.0, 0.0, 1.0]);
        let b = RealUniPoly::new(vec![-1.0, 1.0]);
        let s = BiPoly::monomial(2, 1);
        let (u, v, r) = euclid_reduce(&s, &a, &b).unwrap();
        assert_eq!(u, BiPoly::monomial(0, 1));
        assert!(v.is_zero());
        assert!(r.is_zero());

        let a = RealUniPoly::new(vec![0.0, 0.0, 1.0]);
        let b = RealUniPoly::new(vec![0.0, 1.0]);
        let s = BiPoly::monomial(1, 0).add(&BiPoly::monomial(0, 1));
        let (u, v, r) = euclid_reduce(&s, &a, &b).unwrap();
        assert!(u.is_zero());
        assert_eq!(v, BiPoly::one());
        assert_eq!(r, BiPoly::monomial(1, 0));
        assert_eq!(expand(&u, &v, &r, &a, &b), s);
    }

    #[test]
    fn varpi_example() {
        let a = RealUniPoly::new(vec![0.0, 0.0, 1.0]);
        let b = RealUniPoly::new(vec![-1.0, 1.0]);
        let grid = ZeroGrid::new(&a, &b, &tol()).unwrap();
        let jets = varpi(&BiPoly::monomial(2, 1), &grid);
        assert_eq!(jets.len(), 1);
        assert_eq!(jets[0].shape(), JetShape::b(2, 1).unwrap());
        assert!(jets[0].max_abs() < 1e-12);
        assert!(varpi(&BiPoly::zero(), &grid).iter().all(|j| j.is_zero(0.0)));
    }

    #[test]
    fn interpolation_example() {
        let a = RealUniPoly::new(vec![0.0, 0.0, 1.0]);
        let b = RealUniPoly::new(vec![0.0, 1.0]);
        let grid = ZeroGrid::new(&a, &b, &tol()).unwrap();
        let (c0, c1) = (c(1.5, -0.5), c(2.0, 0.25));
        let target = Jet::from_coeffs(JetShape::b(2, 1).unwrap(), vec![c0, c1]).unwrap();
        let r = hermite_interpolate(std::slice::from_ref(&target), &grid)
            .unwrap()
            .poly;
        let expected = BiPoly::from_terms([((0, 0), c0), ((1, 0), c1)]);
        assert!(r.rel_diff(&expected) < 1e-14);
        assert!(varpi(&r, &grid)[0].sub(&target).unwrap().max_abs() < 1e-14);
        let zero = Jet::zero(JetShape::b(2, 1).unwrap());
        assert!(hermite_interpolate(&[zero], &grid).unwrap().poly.max_abs() < 1e-15);
    }

    #[test]
    fn record_round_trip() {
        let s = BiPoly::from_terms([((0, 0), c(1.0, 0.0)), ((2, 1), c(0.5, -2.0))]);
        let rec = BiPolyRecord::from(&s);
        assert_eq!(BiPoly::from(&rec), s);
    }

    fn cplx() -> impl Strategy<Value = C64> {
        (-1.0f64..1.0, -1.0f64..1.0).prop_map(|(re, im)| c(re, im))
    }

    fn bipoly(max_dz: usize, max_dw: usize) -> impl Strategy<Value = BiPoly> {
        prop::collection::vec(cplx(), (max_dz + 1) * (max_dw + 1)).prop_map(move |v| {
            BiPoly::from_terms(
                v.into_iter()
                    .enumerate()
                    .map(|(k, x)| ((k / (max_dw + 1), k % (max_dw + 1)), x)),
            )
        })
    }

    /// Monic real polynomials of degree 1..=4 with well separated zeros,
    /// built from real roots and conjugate pairs on a coarse lattice.
    fn separated_poly() -> impl Strategy<Value = RealUniPoly> {
        (
            prop::collection::vec(-4i32..=4, 0..=4),
            prop::collection::vec((-3i32..=3, 1i32..=3), 0..=2),
        )
            .prop_filter_map("degree 1..=4", |(reals, pairs)| {
                let mut reals: Vec<i32> = reals;
                reals.sort();
                reals.dedup();
                let mut pairs = pairs;
                pairs.sort();
                pairs.dedup();
                let deg = reals.len() + 2 * pairs.len();
                if deg == 0 || deg > 4 {
                    return None;
                }
                let mut p = RealUniPoly::from_real_roots(
                    &reals.iter().map(|&r| r as f64 * 0.5).collect::<Vec<_>>(),
                );
                for (re, im) in pairs {
                    p = p.mul(&RealUniPoly::conjugate_pair_factor(c(
                        re as f64 * 0.5,
                        im as f64 * 0.5,
                    )));
                }
                Some(p)
            })
    }

    fn multiple_poly() -> impl Strategy<Value = RealUniPoly> {
        (-3i32..=3, 1usize..=3, prop::option::of(-3i32..=3)).prop_filter_map(
            "distinct",
            |(r, k, extra)| {
                let mut p = RealUniPoly::from_real_roots(&[r as f64 * 0.5]).pow(k);
                if let Some(e) = extra {
                    if e == r {
                        return None;
                    }
                    p = p.mul(&RealUniPoly::from_real_roots(&[e as f64 * 0.5]));
                }
                Some(p)
            },
        )
    }

    fn any_poly() -> impl Strategy<Value = RealUniPoly> {
        prop_oneof![separated_poly(), multiple_poly()]
    }

    proptest! {
        #[test]
        fn euclid_round_trip(s in bipoly(5, 5), a in any_poly(), b in any_poly()) {
            let (u, v, r) = euclid_reduce(&s, &a, &b).unwrap();
            prop_assert!(r.deg_z() < a.degree().max(1));
            prop_assert!(r.deg_w() < b.degree().max(1));
            prop_assert!(expand(&u, &v, &r, &a, &b).rel_diff(&s) < 1e-10);
        }

        #[test]
        fn ideal_is_kernel_of_varpi(u in bipoly(2, 2), v in bipoly(2, 2), a in any_poly(), b in any_poly()) {
            let grid = ZeroGrid::new(&a, &b, &tol()).unwrap();
            let s = BiPoly::from_z(&a).mul(&u).add(&BiPoly::from_w(&b).mul(&v));
            let scale = 1.0 + s.max_abs();
            for j in varpi(&s, &grid) {
                prop_assert!(j.max_abs() < 1e-9 * scale);
            }
            let (_, _, r) = euclid_reduce(&s, &a, &b).unwrap();
            prop_assert!(r.max_abs() < 1e-10 * scale);
        }

        #[test]
        fn varpi_interpolation_inverse(s in bipoly(3, 3), a in any_poly(), b in any_poly()) {
            let grid = ZeroGrid::new(&a, &b, &tol()).unwrap();
            let (_, _, r) = euclid_reduce(&s, &a, &b).unwrap();
            let targets = varpi(&s, &grid);
            for (x, y) in targets.iter().zip(varpi(&r, &grid)) {
                prop_assert!(x.sub(&y).unwrap().max_abs() < 1e-9 * (1.0 + s.max_abs()));
            }
            let back = hermite_interpolate(&targets, &grid).unwrap().poly;
            prop_assert!(back.rel_diff(&r) < 1e-8);
        }

        #[test]
        fn zeros_are_conjugate_symmetric(a in any_poly()) {
            let z = poly_zeros(&a, &tol()).unwrap();
            prop_assert_eq!(z.iter().map(|q| q.multiplicity).sum::<usize>(), a.degree());
            for q in &z {
                let partner = z.iter().find(|o| o.value == q.value.conj());
                prop_assert!(partner.is_some());
                prop_assert_eq!(partner.unwrap().multiplicity, q.multiplicity);
            }
        }
    }
}
