//! Deterministic random instances.
//!
//! An instance is assembled from small blocks whose definitizing conditions
//! can be met by construction:
//!
//! * scalar blocks `J = ±1`, `A = a`, `B = b` with `±p(a) ≥ 0`, `±q(b) ≥ 0`;
//! * Jordan cells `J = ±flip`, `A = aI + αS`, `B = bI + βS` with `S` the
//!   nilpotent shift, `p(a) = 0 = q(b)` and `±αp′(a) ≥ 0`, `±βq′(b) ≥ 0`;
//! * conjugate pairs `J = flip`, `A = diag(μ, μ̄)`, `B = diag(ν, ν̄)` with
//!   `p(μ) = 0 = q(ν)`.
//!
//! The direct sum is conjugated by a random `J`-unitary `exp(J·K)` (`K`
//! skew-Hermitian) and then expressed in a random orthonormal basis, which
//! preserves normality and definitizability while making every matrix dense.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::io::{matrix_to_record, Instance, InstanceRecord};
use crate::bipoly::RealUniPoly;
use crate::linalg::{c, zeros};
use crate::{CMat, Error, C64};

/// Instance families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Profile {
    /// Diagonalizable `A`, `B` with a random signature.
    Diagonal,
    /// At least one nilpotent Jordan cell.
    Jordan,
    /// Signature `(n − 1, 1)`.
    Pontryagin,
}

impl Profile {
    pub const ALL: [Profile; 3] = [Profile::Diagonal, Profile::Jordan, Profile::Pontryagin];

    fn tag(self) -> u64 {
        match self {
            Profile::Diagonal => 1,
            Profile::Jordan => 2,
            Profile::Pontryagin => 3,
        }
    }
}

impl fmt::Display for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Profile::Diagonal => "diagonal",
            Profile::Jordan => "jordan",
            Profile::Pontryagin => "pontryagin",
        })
    }
}

impl FromStr for Profile {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s {
            "diagonal" => Ok(Profile::Diagonal),
            "jordan" => Ok(Profile::Jordan),
            "pontryagin" => Ok(Profile::Pontryagin),
            other => Err(Error::Schema(format!("unknown profile {other:?}"))),
        }
    }
}

/// Largest dimension accepted by [`generate`].
pub const MAX_DIM: usize = 12;

/// Scalar eigenvalue coordinates are drawn from multiples of 1/2 in [−2, 2].
const GRID: [f64; 9] = [-2.0, -1.5, -1.0, -0.5, 0.0, 0.5, 1.0, 1.5, 2.0];
/// Imaginary parts of nonreal zeros sit off the half-integer grid so that
/// images `ξ + iη` of mixed zero pairs never collide with scalar eigenvalues.
const OFF_GRID: [f64; 2] = [0.75, 1.25];
/// Size of the skew-Hermitian generator of the `J`-unitary conjugation.
const MIXING: f64 = 0.3;

#[derive(Debug, Clone)]
enum Block {
    Scalar {
        sign: f64,
        a: f64,
        b: f64,
    },
    Cell {
        sign: f64,
        a: f64,
        b: f64,
        alpha: f64,
        beta: f64,
    },
    Pair {
        mu: C64,
        nu: C64,
    },
}

/// Zero requirements for one definitizing polynomial.
#[derive(Debug, Default)]
struct Zeros {
    real: Vec<(f64, usize)>,
    pairs: Vec<C64>,
}

impl Zeros {
    fn require_real(&mut self, x: f64, multiplicity: usize) {
        match self.real.iter_mut().find(|(r, _)| *r == x) {
            Some((_, m)) => *m = (*m).max(multiplicity),
            None => self.real.push((x, multiplicity)),
        }
    }

    fn require(&mut self, z: C64) {
        if z.im == 0.0 {
            self.require_real(z.re, 1);
        } else if !self.pairs.iter().any(|&w| w == z || w == z.conj()) {
            self.pairs.push(z);
        }
    }

    fn degree(&self) -> usize {
        self.real.iter().map(|(_, m)| m).sum::<usize>() + 2 * self.pairs.len()
    }

    fn poly(&self, sign: f64) -> RealUniPoly {
        let mut p = RealUniPoly::constant(sign);
        for &(r, m) in &self.real {
            p = p.mul(&RealUniPoly::from_real_roots(&[r]).pow(m));
        }
        for &mu in &self.pairs {
            p = p.mul(&RealUniPoly::conjugate_pair_factor(mu));
        }
        p
    }
}

fn pick<T: Copy>(rng: &mut ChaCha8Rng, values: &[T]) -> T {
    *values.choose(rng).expect("nonempty choice")
}

fn sign(rng: &mut ChaCha8Rng) -> f64 {
    if rng.gen_bool(0.5) {
        1.0
    } else {
        -1.0
    }
}

fn nonreal(rng: &mut ChaCha8Rng) -> C64 {
    c(pick(rng, &GRID), pick(rng, &OFF_GRID))
}

fn gaussian_matrix(rng: &mut ChaCha8Rng, n: usize) -> CMat {
    CMat::from_fn(n, n, |_, _| {
        c(
            rng.sample::<f64, _>(StandardNormal),
            rng.sample::<f64, _>(StandardNormal),
        )
    })
}

/// Block layout (scalar values are filled in once `p` and `q` are known).
fn layout(rng: &mut ChaCha8Rng, n: usize, profile: Profile) -> Vec<Block> {
    let scalar = |sign| Block::Scalar {
        sign,
        a: 0.0,
        b: 0.0,
    };
    let cell = |rng: &mut ChaCha8Rng| Block::Cell {
        sign: sign(rng),
        a: pick(rng, &GRID),
        b: pick(rng, &GRID),
        alpha: 0.0,
        beta: 0.0,
    };
    let pair = |rng: &mut ChaCha8Rng| {
        let nu = if rng.gen_bool(0.5) {
            c(pick(rng, &GRID), 0.0)
        } else {
            nonreal(rng)
        };
        Block::Pair {
            mu: nonreal(rng),
            nu,
        }
    };
    let mut blocks = Vec::new();
    let mut used = 0;
    match profile {
        Profile::Diagonal => {}
        Profile::Jordan if n >= 2 => {
            let cells = rng.gen_range(1..=(n / 2).min(2));
            for _ in 0..cells {
                blocks.push(cell(rng));
            }
            used = 2 * cells;
            if n - used >= 2 && rng.gen_bool(0.3) {
                blocks.push(pair(rng));
                used += 2;
            }
        }
        Profile::Jordan => {}
        Profile::Pontryagin => {
            let choice = if n >= 2 { rng.gen_range(0..3) } else { 0 };
            match choice {
                0 => {
                    blocks.push(scalar(-1.0));
                    used = 1;
                }
                1 => {
                    blocks.push(cell(rng));
                    used = 2;
                }
                _ => {
                    blocks.push(pair(rng));
                    used = 2;
                }
            }
        }
    }
    for _ in used..n {
        let s = match profile {
            Profile::Pontryagin => 1.0,
            _ => sign(rng),
        };
        blocks.push(scalar(s));
    }
    blocks
}

/// Definitizing polynomials compatible with the block layout. Each has at
/// least one real zero so every scalar block can fall back to it.
fn polynomials(
    rng: &mut ChaCha8Rng,
    blocks: &mut [Block],
    profile: Profile,
    n: usize,
) -> (RealUniPoly, RealUniPoly) {
    let (mut zp, mut zq) = (Zeros::default(), Zeros::default());
    let w2_like = profile == Profile::Jordan && n == 2;
    for block in blocks.iter() {
        match *block {
            Block::Cell { a, b, .. } => {
                let mp = if w2_like || rng.gen_bool(0.3) { 2 } else { 1 };
                zp.require_real(a, mp);
                let mq = if !w2_like && rng.gen_bool(0.3) { 2 } else { 1 };
                zq.require_real(b, mq);
            }
            Block::Pair { mu, nu } => {
                zp.require(mu);
                zq.require(nu);
            }
            Block::Scalar { .. } => {}
        }
    }
    for z in [&mut zp, &mut zq] {
        if z.real.is_empty() || (z.degree() < 4 && rng.gen_bool(0.4)) {
            z.require_real(pick(rng, &GRID), 1);
        }
        if z.degree() < 3 && rng.gen_bool(0.2) {
            z.require(nonreal(rng));
        }
    }
    let p = zp.poly(sign(rng));
    let q = zq.poly(sign(rng));

    for block in blocks.iter_mut() {
        if let Block::Cell {
            sign: s,
            a,
            b,
            alpha,
            beta,
        } = block
        {
            // Jordan parts: sign·α·p′(a) ≥ 0 and sign·β·q′(b) ≥ 0; W2-like
            // cells keep B scalar.
            let dp = p.derivative().eval(*a);
            let dq = q.derivative().eval(*b);
            let magnitude = |rng: &mut ChaCha8Rng| pick(rng, &[0.5, 1.0, 1.5]);
            *alpha = magnitude(rng)
                * if dp == 0.0 {
                    sign(rng)
                } else {
                    (*s * dp).signum()
                };
            *beta = if w2_like || rng.gen_bool(0.4) {
                0.0
            } else {
                magnitude(rng)
                    * if dq == 0.0 {
                        sign(rng)
                    } else {
                        (*s * dq).signum()
                    }
            };
        }
    }

    let real_roots = |z: &Zeros| z.real.iter().map(|&(r, _)| r).collect::<Vec<_>>();
    let (rp, rq) = (real_roots(&zp), real_roots(&zq));
    let choose = |rng: &mut ChaCha8Rng, poly: &RealUniPoly, roots: &[f64], s: f64| {
        let strict: Vec<f64> = GRID
            .iter()
            .copied()
            .filter(|&x| s * poly.eval(x) > 0.0)
            .collect();
        if strict.is_empty() || rng.gen_bool(0.1) {
            pick(rng, roots)
        } else {
            pick(rng, &strict)
        }
    };
    for block in blocks.iter_mut() {
        if let Block::Scalar { sign, a, b } = block {
            *a = choose(rng, &p, &rp, *sign);
            *b = choose(rng, &q, &rq, *sign);
        }
    }
    (p, q)
}

/// `(J, A, B)` of the direct sum.
fn assemble(blocks: &[Block], n: usize) -> (CMat, CMat, CMat) {
    let (mut j, mut a, mut b) = (zeros(n, n), zeros(n, n), zeros(n, n));
    let mut k = 0;
    for block in blocks {
        match *block {
            Block::Scalar { sign, a: x, b: y } => {
                j[(k, k)] = c(sign, 0.0);
                a[(k, k)] = c(x, 0.0);
                b[(k, k)] = c(y, 0.0);
                k += 1;
            }
            Block::Cell {
                sign,
                a: x,
                b: y,
                alpha,
                beta,
            } => {
                j[(k, k + 1)] = c(sign, 0.0);
                j[(k + 1, k)] = c(sign, 0.0);
                for (m, v, s) in [(&mut a, x, alpha), (&mut b, y, beta)] {
                    m[(k, k)] = c(v, 0.0);
                    m[(k + 1, k + 1)] = c(v, 0.0);
                    m[(k, k + 1)] = c(s, 0.0);
                }
                k += 2;
            }
            Block::Pair { mu, nu } => {
                j[(k, k + 1)] = c(1.0, 0.0);
                j[(k + 1, k)] = c(1.0, 0.0);
                a[(k, k)] = mu;
                a[(k + 1, k + 1)] = mu.conj();
                b[(k, k)] = nu;
                b[(k + 1, k + 1)] = nu.conj();
                k += 2;
            }
        }
    }
    (j, a, b)
}

/// A reproducible random instance of dimension `n ≤ MAX_DIM`.
///
/// # Panics
///
/// If `n` is zero or exceeds [`MAX_DIM`].
pub fn generate(seed: u64, n: usize, profile: Profile) -> Instance {
    assert!(
        (1..=MAX_DIM).contains(&n),
        "dimension must lie in 1..={MAX_DIM}"
    );
    let stream = seed
        .wrapping_mul(0x9E37_79B9_7F4A_7C15)
        .wrapping_add((n as u64) << 8 | profile.tag());
    let mut rng = ChaCha8Rng::seed_from_u64(stream);

    let mut blocks = layout(&mut rng, n, profile);
    let (p, q) = polynomials(&mut rng, &mut blocks, profile, n);
    let (j0, a0, b0) = assemble(&blocks, n);

    // J-unitary mixing: U = exp(J·K) with K skew-Hermitian, U⁻¹ = J U^H J.
    let g = gaussian_matrix(&mut rng, n) * c(MIXING / (n as f64).sqrt(), 0.0);
    let k = (&g - g.adjoint()) * c(0.5, 0.0);
    let u = (&j0 * k).exp();
    let u_inv = &j0 * u.adjoint() * &j0;
    let n0 = &u * (&a0 + &b0 * c(0.0, 1.0)) * &u_inv;

    // Orthonormal change of basis.
    let w = gaussian_matrix(&mut rng, n).qr().q();
    let j = w.adjoint() * &j0 * &w;
    let j = (&j + j.adjoint()) * c(0.5, 0.0);
    let nn = w.adjoint() * n0 * &w;

    let record = InstanceRecord {
        label: format!("{profile}-n{n}-seed{seed}"),
        j: matrix_to_record(&j),
        n: Some(matrix_to_record(&nn)),
        a: None,
        b: None,
        p: Some(p.coeffs().to_vec()),
        q: Some(q.coeffs().to_vec()),
        tol: None,
    };
    Instance::from_record(record).expect("generated instances satisfy the instance invariants")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::FunctionalCalculus;
    use crate::jets::JetShape;

    #[test]
    fn deterministic() {
        for profile in Profile::ALL {
            let a = generate(7, 5, profile);
            let b = generate(7, 5, profile);
            assert_eq!(a.to_json(), b.to_json());
            assert_ne!(a.to_json(), generate(8, 5, profile).to_json());
        }
    }

    #[test]
    fn jordan_two_is_a_shifted_nilpotent_cell() {
        for seed in 0..10 {
            let inst = generate(seed, 2, Profile::Jordan);
            let fc = FunctionalCalculus::new(inst.pair).unwrap();
            assert_eq!(fc.bundle().dim_v(), 0);
            let cs = fc.critical_set();
            let w = cs.crit.iter().find(|w| w.in_sigma_n).unwrap();
            assert_eq!(w.shape(), JetShape::a(2, 1).unwrap());
            assert_eq!(fc.spectrum_of_n().len(), 1);
        }
    }

    #[test]
    fn pontryagin_signature() {
        for seed in 0..10 {
            let inst = generate(seed, 6, Profile::Pontryagin);
            assert_eq!(inst.pair.space().signature(), (5, 1));
        }
    }

    #[test]
    fn profile_names_round_trip() {
        for profile in Profile::ALL {
            assert_eq!(profile.to_string().parse::<Profile>().unwrap(), profile);
        }
        assert!("hilbert".parse::<Profile>().is_err());
    }
}
