//! Truncated bivariate jet algebras.
//!
//! An element of `𝒜ₘ,ₙ` carries the coefficients `a_{k,l}` for
//! `(k, l) ∈ {0..m−1}×{0..n−1}` plus the two overflow slots `(m, 0)` and
//! `(0, n)`; `𝒜₀,₀` is just `ℂ`. `ℬₘ,ₙ` keeps only the rectangle. Products
//! are truncated convolutions
//!
//! ```text
//! (a·b)_{k,l} = Σ_{c≤k, d≤l} a_{c,d} b_{k−c,l−d}
//! ```
//!
//! and every index on the right-hand side lies in the index set whenever
//! `(k, l)` does, so no further truncation is needed.

use serde::{Deserialize, Serialize};

use crate::{Error, Result, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum JetKind {
    A,
    B,
}

/// Index set of a jet algebra.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct JetShape {
    m: usize,
    n: usize,
    kind: JetKind,
}

impl JetShape {
    /// `𝒜ₘ,ₙ`; requires `m, n ≥ 1` or `m = n = 0`.
    pub fn a(m: usize, n: usize) -> Result<Self> {
        if (m == 0) != (n == 0) {
            return Err(Error::Shape(format!(
                "A-type jets need m, n >= 1 or m = n = 0, got ({m}, {n})"
            )));
        }
        Ok(Self {
            m,
            n,
            kind: JetKind::A,
        })
    }

    /// `ℬₘ,ₙ`; requires `m, n ≥ 1`.
    pub fn b(m: usize, n: usize) -> Result<Self> {
        if m == 0 || n == 0 {
            return Err(Error::Shape(format!(
                "B-type jets need m, n >= 1, got ({m}, {n})"
            )));
        }
        Ok(Self {
            m,
            n,
            kind: JetKind::B,
        })
    }

    /// `𝒜₀,₀ = ℂ`.
    pub fn scalar() -> Self {
        Self {
            m: 0,
            n: 0,
            kind: JetKind::A,
        }
    }

    pub fn new(m: usize, n: usize, kind: JetKind) -> Result<Self> {
        match kind {
            JetKind::A => Self::a(m, n),
            JetKind::B => Self::b(m, n),
        }
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn kind(&self) -> JetKind {
        self.kind
    }

    pub fn is_scalar(&self) -> bool {
        self.m == 0 && self.n == 0
    }

    /// Indices in storage order: the rectangle graded by total degree (first
    /// slot descending within a degree), then `(m, 0)` and `(0, n)` for A-type.
    pub fn indices(&self) -> Vec<(usize, usize)> {
        if self.is_scalar() {
            return vec![(0, 0)];
        }
        let mut rect: Vec<(usize, usize)> = (0..self.m)
            .flat_map(|k| (0..self.n).map(move |l| (k, l)))
            .collect();
        rect.sort_by_key(|&(k, l)| (k + l, l));
        if self.kind == JetKind::A {
            rect.push((self.m, 0));
            rect.push((0, self.n));
        }
        rect
    }

    #[allow(clippy::len_without_is_empty)] // a shape always holds (0, 0)
    pub fn len(&self) -> usize {
        if self.is_scalar() {
            1
        } else {
            self.m * self.n + if self.kind == JetKind::A { 2 } else { 0 }
        }
    }

    pub fn contains(&self, k: usize, l: usize) -> bool {
        if self.is_scalar() {
            return k == 0 && l == 0;
        }
        (k < self.m && l < self.n)
            || (self.kind == JetKind::A && ((k == self.m && l == 0) || (k == 0 && l == self.n)))
    }

    /// Storage position of `(k, l)`.
    pub fn position(&self, k: usize, l: usize) -> Option<usize> {
        if !self.contains(k, l) {
            return None;
        }
        if self.is_scalar() {
            return Some(0);
        }
        let rect = self.m * self.n;
        if k < self.m && l < self.n {
            // rank of (k, l) in the (degree, l) order
            let d = k + l;
            let mut pos = 0;
            for e in 0..d {
                pos += diagonal_len(e, self.m, self.n);
            }
            let lo = d.saturating_sub(self.m - 1);
            Some(pos + (l - lo))
        } else if l == 0 {
            Some(rect)
        } else {
            Some(rect + 1)
        }
    }

    /// The B-type shape of the rectangle part (identity on B-type shapes).
    pub fn rectangle(&self) -> Result<Self> {
        Self::b(self.m, self.n)
    }
}

fn diagonal_len(d: usize, m: usize, n: usize) -> usize {
    // number of (k, l) with k + l = d, k < m, l < n
    let lo = d.saturating_sub(m - 1);
    let hi = d.min(n - 1);
    if hi >= lo {
        hi - lo + 1
    } else {
        0
    }
}

/// An element of `𝒜ₘ,ₙ` or `ℬₘ,ₙ`.
#[derive(Debug, Clone, PartialEq)]
pub struct Jet {
    shape: JetShape,
    coeffs: Vec<C64>,
}

impl Jet {
    pub fn zero(shape: JetShape) -> Self {
        Self {
            shape,
            coeffs: vec![C64::new(0.0, 0.0); shape.len()],
        }
    }

    /// Multiplicative unit `e`.
    pub fn unit(shape: JetShape) -> Self {
        let mut j = Self::zero(shape);
        j.coeffs[0] = C64::new(1.0, 0.0);
        j
    }

    pub fn scalar(value: C64) -> Self {
        Self {
            shape: JetShape::scalar(),
            coeffs: vec![value],
        }
    }

    /// Jet from coefficients listed in storage order.
    pub fn from_coeffs(shape: JetShape, coeffs: Vec<C64>) -> Result<Self> {
        if coeffs.len() != shape.len() {
            return Err(Error::Shape(format!(
                "expected {} coefficients, got {}",
                shape.len(),
                coeffs.len()
            )));
        }
        Ok(Self { shape, coeffs })
    }

    /// Jet from `(k, l, value)` triples; unspecified entries are zero.
    pub fn from_entries(
        shape: JetShape,
        entries: impl IntoIterator<Item = ((usize, usize), C64)>,
    ) -> Result<Self> {
        let mut j = Self::zero(shape);
        for ((k, l), v) in entries {
            let pos = shape
                .position(k, l)
                .ok_or_else(|| Error::Shape(format!("index ({k}, {l}) not in the index set")))?;
            j.coeffs[pos] = v;
        }
        Ok(j)
    }

    pub fn shape(&self) -> JetShape {
        self.shape
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    pub fn get(&self, k: usize, l: usize) -> Option<C64> {
        self.shape.position(k, l).map(|p| self.coeffs[p])
    }

    pub fn set(&mut self, k: usize, l: usize, value: C64) -> Result<()> {
        let pos = self
            .shape
            .position(k, l)
            .ok_or_else(|| Error::Shape(format!("index ({k}, {l}) not in the index set")))?;
        self.coeffs[pos] = value;
        Ok(())
    }

    /// The `(0, 0)` entry.
    pub fn head(&self) -> C64 {
        self.coeffs[0]
    }

    /// Entries paired with their indices, in storage order.
    pub fn entries(&self) -> impl Iterator<Item = ((usize, usize), C64)> + '_ {
        self.shape
            .indices()
            .into_iter()
            .zip(self.coeffs.iter().copied())
    }

    /// Max-modulus norm of the coefficients.
    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    fn check_same(&self, other: &Jet) -> Result<()> {
        if self.shape != other.shape {
            return Err(Error::Shape(format!(
                "jet shapes differ: {:?} vs {:?}",
                self.shape, other.shape
            )));
        }
        Ok(())
    }

    /// `α·self + β·other`.
    pub fn linear(&self, other: &Jet, alpha: C64, beta: C64) -> Result<Jet> {
        self.check_same(other)?;
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| alpha * a + beta * b)
            .collect();
        Ok(Jet {
            shape: self.shape,
            coeffs,
        })
    }

    pub fn add(&self, other: &Jet) -> Result<Jet> {
        self.linear(other, C64::new(1.0, 0.0), C64::new(1.0, 0.0))
    }

    pub fn sub(&self, other: &Jet) -> Result<Jet> {
        self.linear(other, C64::new(1.0, 0.0), C64::new(-1.0, 0.0))
    }

    pub fn scale(&self, alpha: C64) -> Jet {
        Jet {
            shape: self.shape,
            coeffs: self.coeffs.iter().map(|a| alpha * a).collect(),
        }
    }

    /// Truncated convolution product.
    pub fn mul(&self, other: &Jet) -> Result<Jet> {
        self.check_same(other)?;
        let shape = self.shape;
        let indices = shape.indices();
        let mut out = Jet::zero(shape);
        for (pos, &(k, l)) in indices.iter().enumerate() {
            let mut acc = C64::new(0.0, 0.0);
            for c in 0..=k {
                for d in 0..=l {
                    if let (Some(i), Some(j)) = (shape.position(c, d), shape.position(k - c, l - d))
                    {
                        acc += self.coeffs[i] * other.coeffs[j];
                    }
                }
            }
            out.coeffs[pos] = acc;
        }
        Ok(out)
    }

    /// Multiplicative inverse; exists iff `a[0,0] ≠ 0` (here: `|a[0,0]| > tol`).
    pub fn inverse(&self, tol: f64) -> Result<Jet> {
        let a00 = self.coeffs[0];
        if !(a00.norm() > tol) {
            return Err(Error::NotInvertible {
                modulus: a00.norm(),
            });
        }
        let shape = self.shape;
        let indices = shape.indices();
        let inv00 = a00.inv();
        let mut x = Jet::zero(shape);
        x.coeffs[0] = inv00;
        // Storage order is a linear extension of the componentwise order, so
        // every x_{k−c,l−d} on the right is already known.
        for (pos, &(k, l)) in indices.iter().enumerate().skip(1) {
            let mut acc = C64::new(0.0, 0.0);
            for c in 0..=k {
                for d in 0..=l {
                    if c == 0 && d == 0 {
                        continue;
                    }
                    if let (Some(i), Some(j)) = (shape.position(c, d), shape.position(k - c, l - d))
                    {
                        acc += self.coeffs[i] * x.coeffs[j];
                    }
                }
            }
            x.coeffs[pos] = -acc * inv00;
        }
        Ok(x)
    }

    /// Entrywise complex conjugate.
    pub fn conj(&self) -> Jet {
        Jet {
            shape: self.shape,
            coeffs: self.coeffs.iter().map(|z| z.conj()).collect(),
        }
    }

    /// Projection `π: 𝒜ₘ,ₙ → ℬₘ,ₙ`, dropping the overflow entries.
    /// Identity on B-type jets; `𝒜₀,₀` maps to itself.
    pub fn pi(&self) -> Jet {
        if self.shape.kind == JetKind::B || self.shape.is_scalar() {
            return self.clone();
        }
        let rect = self.shape.m * self.shape.n;
        Jet {
            shape: JetShape {
                m: self.shape.m,
                n: self.shape.n,
                kind: JetKind::B,
            },
            coeffs: self.coeffs[..rect].to_vec(),
        }
    }

    pub fn is_zero(&self, tol: f64) -> bool {
        self.max_abs() <= tol
    }
}

/// Serialized jet: `{ "m", "n", "kind", "entries": [[k, l, re, im], ...] }`.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct JetRecord {
    pub m: usize,
    pub n: usize,
    pub kind: JetKind,
    pub entries: Vec<(usize, usize, f64, f64)>,
}

impl From<&Jet> for JetRecord {
    fn from(j: &Jet) -> Self {
        JetRecord {
            m: j.shape.m,
            n: j.shape.n,
            kind: j.shape.kind,
            entries: j.entries().map(|((k, l), v)| (k, l, v.re, v.im)).collect(),
        }
    }
}

impl TryFrom<&JetRecord> for Jet {
    type Error = Error;

    fn try_from(r: &JetRecord) -> Result<Jet> {
        let shape = JetShape::new(r.m, r.n, r.kind)?;
        Jet::from_entries(
            shape,
            r.entries
                .iter()
                .map(|&(k, l, re, im)| ((k, l), C64::new(re, im))),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c;
    use proptest::prelude::*;
    use std::collections::HashMap;

    fn a11(v: [f64; 3]) -> Jet {
        Jet::from_coeffs(
            JetShape::a(1, 1).unwrap(),
            v.iter().map(|&x| c(x, 0.0)).collect(),
        )
        .unwrap()
    }

    /// Double-sum product over an explicit index map, independent of the
    /// storage layout.
    fn oracle_mul(a: &Jet, b: &Jet) -> HashMap<(usize, usize), C64> {
        let am: HashMap<_, _> = a.entries().collect();
        let bm: HashMap<_, _> = b.entries().collect();
        let mut out = HashMap::new();
        for &(k, l) in am.keys() {
            let mut s = c(0.0, 0.0);
            for cc in 0..=k {
                for d in 0..=l {
                    if let (Some(x), Some(y)) = (am.get(&(cc, d)), bm.get(&(k - cc, l - d))) {
                        s += x * y;
                    }
                }
            }
            out.insert((k, l), s);
        }
        out
    }

    #[test]
    fn index_sets() {
        let s = JetShape::a(2, 1).unwrap();
        assert_eq!(s.indices(), vec![(0, 0), (1, 0), (2, 0), (0, 1)]);
        let s = JetShape::a(2, 2).unwrap();
        assert_eq!(
            s.indices(),
            vec![(0, 0), (1, 0), (0, 1), (1, 1), (2, 0), (0, 2)]
        );
        for (pos, (k, l)) in s.indices().into_iter().enumerate() {
            assert_eq!(s.position(k, l), Some(pos));
        }
        assert_eq!(JetShape::scalar().indices(), vec![(0, 0)]);
        assert!(JetShape::a(1, 0).is_err());
        assert!(JetShape::b(0, 2).is_err());
        let s = JetShape::b(3, 2).unwrap();
        assert_eq!(s.len(), 6);
        for (pos, (k, l)) in s.indices().into_iter().enumerate() {
            assert_eq!(s.position(k, l), Some(pos));
        }
    }

    #[test]
    fn linear_examples() {
        let a = a11([1.0, 2.0, 3.0]);
        let b = a11([4.0, 5.0, 6.0]);
        assert_eq!(a.linear(&b, c(1.0, 0.0), c(0.0, 0.0)).unwrap(), a);
        assert!(a
            .linear(&a, c(1.0, 0.0), c(-1.0, 0.0))
            .unwrap()
            .is_zero(0.0));
        let r = a.linear(&b, c(2.0, 0.0), c(3.0, 0.0)).unwrap();
        assert_eq!(r, a11([14.0, 19.0, 24.0]));
        let other = Jet::zero(JetShape::b(1, 1).unwrap());
        assert!(matches!(
            a.linear(&other, c(1.0, 0.0), c(1.0, 0.0)),
            Err(Error::Shape(_))
        ));
    }

    #[test]
    fn mul_examples() {
        let a = a11([1.0, 2.0, 3.0]);
        let b = a11([4.0, 5.0, 6.0]);
        let e = Jet::unit(a.shape());
        assert_eq!(e.mul(&a).unwrap(), a);
        let prod = a.mul(&b).unwrap();
        let oracle = oracle_mul(&a, &b);
        for ((k, l), v) in prod.entries() {
            assert_eq!(v, oracle[&(k, l)]);
        }
        assert_eq!(prod, a11([4.0, 13.0, 18.0]));
        // kernel of π squares to zero
        let shape = JetShape::a(2, 3).unwrap();
        let x = Jet::from_entries(shape, [((2, 0), c(1.5, 0.2)), ((0, 3), c(-0.7, 1.0))]).unwrap();
        let y = Jet::from_entries(shape, [((2, 0), c(0.3, 0.0)), ((0, 3), c(2.0, -1.0))]).unwrap();
        assert!(x.mul(&y).unwrap().is_zero(0.0));
    }

    #[test]
    fn inverse_examples() {
        let e = Jet::unit(JetShape::a(2, 2).unwrap());
        assert_eq!(e.inverse(1e-12).unwrap(), e);
        let a = a11([2.0, 1.0, 3.0]);
        let inv = a.inverse(1e-12).unwrap();
        assert_eq!(inv, a11([0.5, -0.25, -0.75]));
        assert_eq!(a.mul(&inv).unwrap(), Jet::unit(a.shape()));
        let z = a11([0.0, 1.0, 3.0]);
        assert!(matches!(z.inverse(1e-12), Err(Error::NotInvertible { .. })));
    }

    #[test]
    fn conj_examples() {
        let real = a11([1.0, -2.0, 3.0]);
        assert_eq!(real.conj(), real);
        let a = Jet::from_coeffs(
            JetShape::a(1, 1).unwrap(),
            vec![c(0.0, 1.0), c(1.0, 1.0), c(2.0, 0.0)],
        )
        .unwrap();
        let expected = Jet::from_coeffs(
            JetShape::a(1, 1).unwrap(),
            vec![c(0.0, -1.0), c(1.0, -1.0), c(2.0, 0.0)],
        )
        .unwrap();
        assert_eq!(a.conj(), expected);
        assert_eq!(a.conj().conj(), a);
    }

    #[test]
    fn pi_examples() {
        let shape = JetShape::a(2, 1).unwrap();
        assert_eq!(Jet::unit(shape).pi(), Jet::unit(JetShape::b(2, 1).unwrap()));
        let (a, b, cc, d) = (c(1.0, 0.0), c(2.0, 1.0), c(3.0, 0.0), c(4.0, -1.0));
        let j = Jet::from_entries(shape, [((0, 0), a), ((1, 0), b), ((2, 0), cc), ((0, 1), d)])
            .unwrap();
        let p = j.pi();
        assert_eq!(p.shape(), JetShape::b(2, 1).unwrap());
        assert_eq!(p.coeffs(), &[a, b]);
        let bj = Jet::unit(JetShape::b(2, 2).unwrap());
        assert_eq!(bj.pi(), bj);
    }

    #[test]
    fn record_round_trip() {
        let j = Jet::from_coeffs(
            JetShape::a(2, 1).unwrap(),
            vec![c(1.0, 0.0), c(1.0, 0.0), c(0.5, 0.0), c(0.0, 0.0)],
        )
        .unwrap();
        let rec = JetRecord::from(&j);
        let json = serde_json::to_string(&rec).unwrap();
        let back: JetRecord = serde_json::from_str(&json).unwrap();
        assert_eq!(Jet::try_from(&back).unwrap(), j);
    }

    fn shape_strategy() -> impl Strategy<Value = JetShape> {
        (1usize..=3, 1usize..=3, prop::bool::ANY).prop_map(|(m, n, a)| {
            if a {
                JetShape::a(m, n).unwrap()
            } else {
                JetShape::b(m, n).unwrap()
            }
        })
    }

    fn jet_for(shape: JetShape) -> impl Strategy<Value = Jet> {
        prop::collection::vec((-2.0f64..2.0, -2.0f64..2.0), shape.len()).prop_map(move |v| {
            Jet::from_coeffs(shape, v.into_iter().map(|(re, im)| c(re, im)).collect()).unwrap()
        })
    }

    fn triple() -> impl Strategy<Value = (Jet, Jet, Jet)> {
        shape_strategy().prop_flat_map(|s| (jet_for(s), jet_for(s), jet_for(s)))
    }

    proptest! {
        #[test]
        fn algebra_laws((a, b, c3) in triple()) {
            let ab = a.mul(&b).unwrap();
            prop_assert!(ab.sub(&b.mul(&a).unwrap()).unwrap().max_abs() < 1e-12);
            let lhs = ab.mul(&c3).unwrap();
            let rhs = a.mul(&b.mul(&c3).unwrap()).unwrap();
            prop_assert!(lhs.sub(&rhs).unwrap().max_abs() < 1e-12);
            prop_assert!(a.mul(&b).unwrap().conj().sub(&a.conj().mul(&b.conj()).unwrap()).unwrap().max_abs() < 1e-12);
            prop_assert!(ab.pi().sub(&a.pi().mul(&b.pi()).unwrap()).unwrap().max_abs() < 1e-12);
            prop_assert_eq!(a.conj().pi(), a.pi().conj());
        }

        #[test]
        fn inverse_iff_head_nonzero((mut a, _b, _c) in triple()) {
            if a.head().norm() >= 1e-6 {
                let inv = a.inverse(1e-12).unwrap();
                prop_assert!(a.mul(&inv).unwrap().sub(&Jet::unit(a.shape())).unwrap().max_abs() < 1e-10 * (1.0 + inv.max_abs()));
            }
            a.set(0, 0, c(0.0, 0.0)).unwrap();
            prop_assert!(a.inverse(1e-12).is_err());
        }
    }
}
