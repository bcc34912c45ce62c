//! Property suites over one instance and the machine-readable report.
//!
//! Three groups run against a built [`FunctionalCalculus`]:
//!
//! * `embedding.*` – the maps `Θ`, `Θⱼ`, `Γⱼ`, `Ξ`, `Ξⱼ`, `Λⱼ` and the
//!   contractions `R₁`, `R₂`;
//! * `spectral.*` – the spectral measure of `Θ(N)` and its transfer to `Vⱼ`;
//! * `calculus.*` – `φ ↦ φ(N)` as a `*`-homomorphism, its independence from
//!   the interpolant, support, spectra and projections.
//!
//! Every property reports the largest residual over its samples; it passes
//! iff the residual does not exceed the pinned threshold.

use std::time::Instant;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::io::Instance;
use crate::calculus::{CalculusFunction, FunctionalCalculus, Region};
use crate::jets::{Jet, JetShape};
use crate::linalg::{self, c, cluster, eye, frob, rel_diff, spectral_norm};
use crate::spectral::SpectralData;
use crate::{BiPoly, CMat, Result, C64};

/// Residual bound for the embedding group (relative).
pub const EMBEDDING_TOL: f64 = 1e-9;
/// Residual bound for the norm of `R₁`, `R₂` beyond one.
pub const CONTRACTION_TOL: f64 = 1e-10;
/// Residual bound for the spectral group (relative).
pub const SPECTRAL_TOL: f64 = 1e-8;
/// Residual bound for the calculus group (relative).
pub const CALCULUS_TOL: f64 = 1e-8;
/// Interpolant perturbations `s + p·u + q·v` tried per function.
pub const INTERPOLANT_PERTURBATIONS: usize = 5;
/// Random function pairs per homomorphism property.
const FUNCTION_SAMPLES: usize = 4;

/// One checked property.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropertyResult {
    pub name: String,
    pub anchor: String,
    /// Non-finite residuals (failed computations) serialize as `null`.
    #[serde(with = "residual_json")]
    pub residual: f64,
    pub threshold: f64,
    pub pass: bool,
}

mod residual_json {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
        if x.is_finite() {
            s.serialize_f64(*x)
        } else {
            s.serialize_none()
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::INFINITY))
    }
}

/// Outcome of a suite run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    /// SHA-256 digest of the instance record.
    pub instance: String,
    pub properties: Vec<PropertyResult>,
    pub elapsed_ms: u64,
}

impl Report {
    pub fn all_pass(&self) -> bool {
        self.properties.iter().all(|p| p.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &PropertyResult> {
        self.properties.iter().filter(|p| !p.pass)
    }

    /// Properties whose name starts with `prefix`.
    pub fn group<'a>(&'a self, prefix: &'a str) -> impl Iterator<Item = &'a PropertyResult> + 'a {
        self.properties
            .iter()
            .filter(move |p| p.name.starts_with(prefix))
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("instance {}\n", self.instance);
        for p in &self.properties {
            out.push_str(&format!(
                "{} {:<40} residual {:9.2e}  threshold {:9.2e}  ({})\n",
                if p.pass { "PASS" } else { "FAIL" },
                p.name,
                p.residual,
                p.threshold,
                p.anchor
            ));
        }
        out.push_str(&format!(
            "{} of {} properties pass, {} ms\n",
            self.properties.iter().filter(|p| p.pass).count(),
            self.properties.len(),
            self.elapsed_ms
        ));
        out
    }
}

/// Property groups.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Group {
    Embedding,
    Spectral,
    Calculus,
}

impl Group {
    pub const ALL: [Group; 3] = [Group::Embedding, Group::Spectral, Group::Calculus];
}

/// Collects property results; errors inside a check count as failures.
struct Recorder {
    results: Vec<PropertyResult>,
}

impl Recorder {
    fn check(&mut self, name: &str, anchor: &str, threshold: f64, f: impl FnOnce() -> Result<f64>) {
        let residual = match f() {
            Ok(r) if r.is_nan() => f64::INFINITY,
            Ok(r) => r,
            Err(_) => f64::INFINITY,
        };
        self.results.push(PropertyResult {
            name: name.to_string(),
            anchor: anchor.to_string(),
            residual,
            threshold,
            pass: residual <= threshold,
        });
    }
}

fn max_of(values: impl IntoIterator<Item = f64>) -> f64 {
    values.into_iter().fold(0.0, f64::max)
}

fn suite_rng(instance: &Instance) -> ChaCha8Rng {
    let digest = instance.digest();
    let seed = u64::from_str_radix(&digest[..16], 16).expect("hex digest");
    ChaCha8Rng::seed_from_u64(seed)
}

/// Runs every group.
pub fn run_suite(instance: &Instance) -> Report {
    run_groups(instance, &Group::ALL)
}

/// Runs the selected groups. A failed construction is reported as a single
/// failing `construction` property.
pub fn run_groups(instance: &Instance, groups: &[Group]) -> Report {
    let start = Instant::now();
    let mut rng = suite_rng(instance);
    let properties = match FunctionalCalculus::new(instance.pair.clone()) {
        Ok(fc) => {
            let mut props = Vec::new();
            for g in groups {
                props.extend(match g {
                    Group::Embedding => embedding_suite(&fc, &mut rng),
                    Group::Spectral => spectral_suite(&fc, &mut rng),
                    Group::Calculus => calculus_suite(&fc, &mut rng),
                });
            }
            props
        }
        Err(_) => vec![PropertyResult {
            name: "construction".into(),
            anchor: "embedding, spectral data and critical set can be built".into(),
            residual: f64::INFINITY,
            threshold: 0.0,
            pass: false,
        }],
    };
    Report {
        instance: instance.digest(),
        properties,
        elapsed_ms: start.elapsed().as_millis() as u64,
    }
}

fn gaussian_c(rng: &mut ChaCha8Rng) -> C64 {
    c(
        rng.sample::<f64, _>(StandardNormal),
        rng.sample::<f64, _>(StandardNormal),
    )
}

fn random_bipoly(rng: &mut ChaCha8Rng, deg_z: usize, deg_w: usize) -> BiPoly {
    BiPoly::from_terms(
        (0..=deg_z)
            .flat_map(|i| (0..=deg_w).map(move |j| (i, j)))
            .map(|ij| (ij, gaussian_c(rng) * 0.5))
            .collect::<Vec<_>>(),
    )
}

fn random_jet(rng: &mut ChaCha8Rng, shape: JetShape) -> Jet {
    let coeffs = (0..shape.len()).map(|_| gaussian_c(rng)).collect();
    Jet::from_coeffs(shape, coeffs).expect("length matches shape")
}

/// Operators commuting with `A` and `B`: `N`, `N*`, `A`, `B` and a random
/// polynomial in `A`, `B`.
fn commuting_operators(fc: &FunctionalCalculus, rng: &mut ChaCha8Rng) -> Vec<CMat> {
    let pair = fc.pair();
    vec![
        pair.n().clone(),
        pair.space().adjoint(pair.n()),
        pair.a().clone(),
        pair.b().clone(),
        random_bipoly(rng, 2, 2).at_matrices(pair.a(), pair.b()),
    ]
}

/// The embedding group.
pub fn embedding_suite(fc: &FunctionalCalculus, rng: &mut ChaCha8Rng) -> Vec<PropertyResult> {
    let b = fc.bundle();
    let pair = fc.pair();
    let tol = fc.tol();
    let ops = commuting_operators(fc, rng);
    let mut rec = Recorder {
        results: Vec::new(),
    };
    let iv = eye(b.dim_v());

    rec.check(
        "embedding.partition",
        "R1R1* + R2R2* = I on V",
        EMBEDDING_TOL,
        || Ok(rel_diff(&(b.rrs(1) + b.rrs(2)), &iv)),
    );
    rec.check(
        "embedding.contraction",
        "||Rj|| <= 1",
        CONTRACTION_TOL,
        || {
            Ok(max_of(
                (1..=2).map(|j| (spectral_norm(b.rj(j)) - 1.0).max(0.0)),
            ))
        },
    );
    rec.check(
        "embedding.injective",
        "Rj has trivial kernel (count of vanishing singular values)",
        0.0,
        || {
            let mut deficient = 0usize;
            for j in 1..=2 {
                let r = b.rj(j);
                if r.ncols() == 0 {
                    continue;
                }
                let sv = linalg::singular_values(r);
                let smax = sv.first().copied().unwrap_or(0.0);
                deficient += sv
                    .iter()
                    .filter(|&&s| s <= tol.rank * smax.max(1.0))
                    .count();
            }
            Ok(deficient as f64)
        },
    );
    rec.check(
        "embedding.commutant",
        "[RjRj*, T*T] = 0 and [Rj*Rj, Tj*Tj] = 0",
        EMBEDDING_TOL,
        || {
            Ok(max_of((1..=2).flat_map(|j| {
                let (x, y) = (b.rrs(j), b.tst());
                let (u, v) = (b.rsr(j), b.tjstj(j));
                [
                    rel_diff(&(&x * y), &(y * &x)),
                    rel_diff(&(&u * v), &(v * &u)),
                ]
            })))
        },
    );
    rec.check(
        "embedding.intertwining",
        "Theta(C)RjRj* = Rj Theta_j(C) Rj* = RjRj* Theta(C)",
        EMBEDDING_TOL,
        || {
            let mut worst: f64 = 0.0;
            for op in &ops {
                let th = b.theta(op)?;
                for j in 1..=2 {
                    let thj = b.theta_j(j, op)?;
                    let left = &th * b.rrs(j);
                    let mid = b.rj(j) * thj * b.rj_adj(j);
                    let right = b.rrs(j) * &th;
                    worst = worst.max(rel_diff(&left, &mid)).max(rel_diff(&mid, &right));
                }
            }
            Ok(worst)
        },
    );
    rec.check(
        "embedding.restriction",
        "Gamma_j(Theta(C)) = Theta_j(C)",
        EMBEDDING_TOL,
        || {
            let mut worst: f64 = 0.0;
            for op in &ops {
                let th = b.theta(op)?;
                for j in 1..=2 {
                    worst = worst.max(rel_diff(&b.gamma_j(j, &th)?, &b.theta_j(j, op)?));
                }
            }
            Ok(worst)
        },
    );
    rec.check(
        "embedding.homomorphism",
        "Theta, Theta_j, Gamma_j are unital *-homomorphisms",
        EMBEDDING_TOL,
        || {
            let space = pair.space();
            let mut worst = rel_diff(&b.theta(&eye(pair.dim()))?, &iv);
            for (k, x) in ops.iter().enumerate() {
                let y = &ops[(k + 1) % ops.len()];
                let (tx, ty) = (b.theta(x)?, b.theta(y)?);
                worst = worst.max(rel_diff(&b.theta(&(x * y))?, &(&tx * &ty)));
                worst = worst.max(rel_diff(&b.theta(&space.adjoint(x))?, &tx.adjoint()));
                for j in 1..=2 {
                    let (txj, tyj) = (b.theta_j(j, x)?, b.theta_j(j, y)?);
                    worst = worst.max(rel_diff(&b.theta_j(j, &(x * y))?, &(&txj * &tyj)));
                    worst = worst.max(rel_diff(&b.theta_j(j, &space.adjoint(x))?, &txj.adjoint()));
                    let (gx, gy) = (b.gamma_j(j, &tx)?, b.gamma_j(j, &ty)?);
                    worst = worst.max(rel_diff(&b.gamma_j(j, &(&tx * &ty))?, &(&gx * &gy)));
                    worst = worst.max(rel_diff(&b.gamma_j(j, &tx.adjoint())?, &gx.adjoint()));
                    worst = worst.max(rel_diff(&b.gamma_j(j, &iv)?, &eye(b.dim_vj(j))));
                    worst = worst.max(rel_diff(
                        &b.theta_j(j, &eye(pair.dim()))?,
                        &eye(b.dim_vj(j)),
                    ));
                }
            }
            Ok(worst)
        },
    );
    rec.check(
        "embedding.gram_split",
        "p(Theta(A)) = R1R1*(p(Theta(A)) + q(Theta(B))) and the q/R2 twin",
        EMBEDDING_TOL,
        || {
            let pa = pair.p().at_matrix(&b.theta(pair.a())?);
            let qb = pair.q().at_matrix(&b.theta(pair.b())?);
            let sum = &pa + &qb;
            Ok(rel_diff(&pa, &(b.rrs(1) * &sum)).max(rel_diff(&qb, &(b.rrs(2) * &sum))))
        },
    );
    rec.check(
        "embedding.factor_images",
        "Theta(TjTj*) = RjRj* T*T",
        EMBEDDING_TOL,
        || {
            let mut worst = rel_diff(&b.theta(b.tts())?, b.tst());
            for j in 1..=2 {
                worst = worst.max(rel_diff(&b.theta(b.tjtjs(j))?, &(b.rrs(j) * b.tst())));
            }
            Ok(worst)
        },
    );
    rec.check(
        "embedding.xi_lambda",
        "Xi_j(D) = Xi(Lambda_j(D)) and Xi(I) = TT*",
        EMBEDDING_TOL,
        || {
            let mut worst = rel_diff(&b.xi(&iv)?, b.tts());
            for op in &ops {
                for j in 1..=2 {
                    let d = b.theta_j(j, op)?;
                    worst = worst.max(rel_diff(&b.xi_j(j, &d)?, &b.xi(&b.lambda_j(j, &d)?)?));
                }
            }
            Ok(worst)
        },
    );
    rec.check(
        "embedding.spectral_inclusion",
        "eigenvalues of Theta_j(N) are eigenvalues of Theta(N)",
        EMBEDDING_TOL,
        || {
            let theta = linalg::eigenvalues(fc.theta_n());
            let scale = 1.0 + max_of(theta.iter().map(|z| z.norm()));
            let mut worst: f64 = 0.0;
            for j in 1..=2 {
                for mu in linalg::eigenvalues(&b.theta_j(j, pair.n())?) {
                    let d = theta
                        .iter()
                        .map(|z| (z - mu).norm())
                        .fold(f64::INFINITY, f64::min);
                    worst = worst.max(d / scale);
                }
            }
            Ok(worst)
        },
    );
    rec.results
}

/// The spectral group.
pub fn spectral_suite(fc: &FunctionalCalculus, rng: &mut ChaCha8Rng) -> Vec<PropertyResult> {
    let b = fc.bundle();
    let pair = fc.pair();
    let sp = fc.spectral();
    let cs = fc.critical_set();
    let tol = fc.tol();
    let iv = eye(b.dim_v());
    let mut rec = Recorder {
        results: Vec::new(),
    };
    let h: Vec<C64> = sp.points().iter().map(|_| gaussian_c(rng)).collect();
    let scale = 1.0 + max_of(sp.values().iter().map(|z| z.norm()));

    rec.check(
        "spectral.resolution",
        "E{l} are orthogonal projections summing to I",
        SPECTRAL_TOL,
        || {
            let pts = sp.points();
            let mut sum = linalg::zeros(b.dim_v(), b.dim_v());
            let mut worst: f64 = 0.0;
            for (k, x) in pts.iter().enumerate() {
                sum += &x.projection;
                worst = worst.max(rel_diff(&x.projection, &x.projection.adjoint()));
                for (l, y) in pts.iter().enumerate() {
                    let prod = &x.projection * &y.projection;
                    let expected = if k == l {
                        x.projection.clone()
                    } else {
                        linalg::zeros(b.dim_v(), b.dim_v())
                    };
                    worst = worst.max(rel_diff(&prod, &expected));
                }
            }
            Ok(worst.max(rel_diff(&sum, &iv)))
        },
    );
    rec.check(
        "spectral.eigen",
        "Theta(N) E{l} = l E{l}",
        SPECTRAL_TOL,
        || {
            let m = fc.theta_n();
            Ok(max_of(sp.points().iter().map(|x| {
                frob(&(m * &x.projection - &x.projection * x.value)) / (1.0 + frob(m))
            })))
        },
    );
    rec.check(
        "spectral.commutant",
        "E{l} commutes with R1R1*, R2R2*, T*T",
        SPECTRAL_TOL,
        || {
            let others = [b.rrs(1), b.rrs(2), b.tst().clone()];
            Ok(max_of(sp.points().iter().flat_map(|x| {
                others
                    .iter()
                    .map(|o| rel_diff(&(o * &x.projection), &(&x.projection * o)))
                    .collect::<Vec<_>>()
            })))
        },
    );
    rec.check(
        "spectral.zero_inclusion",
        "|p(Re z)| <= ||R1R1*|| |p(Re z)+q(Im z)| and the q/R2 twin on sigma(Theta(N))",
        SPECTRAL_TOL,
        || {
            let (n1, n2) = (spectral_norm(&b.rrs(1)), spectral_norm(&b.rrs(2)));
            Ok(max_of(sp.values().iter().map(|z| {
                let (pz, qz) = (pair.p().eval(z.re), pair.q().eval(z.im));
                let s = (pz + qz).abs();
                let excess = (pz.abs() - n1 * s).max(qz.abs() - n2 * s).max(0.0);
                excess / (1.0 + pz.abs() + qz.abs())
            })))
        },
    );
    rec.check(
        "spectral.ratio_integrals",
        "RjRj* E(noncritical) = integral of p/(p+q) (resp. q/(p+q)) dE",
        SPECTRAL_TOL,
        || {
            let noncrit: Vec<usize> = cs.noncritical.clone();
            let e_non = noncrit
                .iter()
                .fold(linalg::zeros(b.dim_v(), b.dim_v()), |acc, &k| {
                    acc + &sp.points()[k].projection
                });
            let mut worst: f64 = 0.0;
            for j in 1..=2 {
                let values: Vec<C64> = sp
                    .points()
                    .iter()
                    .enumerate()
                    .map(|(k, x)| {
                        if !noncrit.contains(&k) {
                            return c(0.0, 0.0);
                        }
                        let (pz, qz) = (pair.p().eval(x.value.re), pair.q().eval(x.value.im));
                        c(if j == 1 { pz } else { qz } / (pz + qz), 0.0)
                    })
                    .collect();
                worst = worst.max(rel_diff(
                    &(b.rrs(j) * &e_non),
                    &sp.spectral_integral(&values)?,
                ));
            }
            Ok(worst)
        },
    );
    rec.check(
        "spectral.restricted_measures",
        "Gamma_j(E{l}) = E_j{l} and Gamma_j(int h dE) = int h dE_j",
        SPECTRAL_TOL,
        || {
            let mut worst: f64 = 0.0;
            for j in 1..=2 {
                let spj = SpectralData::diagonalize(&b.theta_j(j, pair.n())?, tol)?;
                let radius = tol.cluster * scale;
                // nearest Θ(N) eigenvalue of each Θⱼ(N) eigenvalue
                let owner: Vec<Option<usize>> = spj
                    .points()
                    .iter()
                    .map(|y| sp.find(y.value, radius))
                    .collect();
                if owner.iter().any(|o| o.is_none()) {
                    return Ok(f64::INFINITY);
                }
                for (k, x) in sp.points().iter().enumerate() {
                    let mut ej = linalg::zeros(b.dim_vj(j), b.dim_vj(j));
                    for (y, o) in spj.points().iter().zip(&owner) {
                        if *o == Some(k) {
                            ej += &y.projection;
                        }
                    }
                    worst = worst.max(rel_diff(&b.gamma_j(j, &x.projection)?, &ej));
                }
                let hj: Vec<C64> = owner.iter().map(|o| h[o.expect("checked")]).collect();
                let lhs = b.gamma_j(j, &sp.spectral_integral(&h)?)?;
                worst = worst.max(rel_diff(&lhs, &spj.spectral_integral(&hj)?));
            }
            Ok(worst)
        },
    );
    rec.check(
        "spectral.transfer",
        "Xi_j(int h dE_j) = Xi(RjRj* int h dE)",
        SPECTRAL_TOL,
        || {
            let integral = sp.spectral_integral(&h)?;
            let mut worst: f64 = 0.0;
            for j in 1..=2 {
                let hj = b.gamma_j(j, &integral)?;
                worst = worst.max(rel_diff(&b.xi_j(j, &hj)?, &b.xi(&(b.rrs(j) * &integral))?));
            }
            Ok(worst)
        },
    );
    rec.results
}

/// Closed regions for projection tests: unions of small disks around groups
/// of spectral points, where each group keeps the two images of a `Zⁱ` pair
/// in `σ_N` together. Returns the groups and the disk radius.
fn spectral_groups(fc: &FunctionalCalculus) -> (Vec<Vec<C64>>, f64) {
    let cs = fc.critical_set();
    let sigma = fc.spectrum_of_n();
    let mut marks: Vec<C64> = sigma.clone();
    marks.extend(cs.crit_values());
    marks.extend(cs.sigma_theta.iter().copied());
    for z in &cs.zi {
        marks.push(z.image());
        marks.push(z.partner_image());
    }
    let tol = fc.tol();
    let merged: Vec<C64> = cluster(&marks, tol.defective_cluster * cs.scale)
        .into_iter()
        .map(|cl| cl.center)
        .collect();
    let mut gap = f64::INFINITY;
    for (k, x) in merged.iter().enumerate() {
        for y in &merged[k + 1..] {
            gap = gap.min((x - y).norm());
        }
    }
    let radius = (gap / 3.0).min(1.0);

    let mut groups: Vec<Vec<C64>> = sigma.iter().map(|&z| vec![z]).collect();
    let nearest = |groups: &Vec<Vec<C64>>, z: C64| {
        groups
            .iter()
            .position(|g| g.iter().any(|w| (w - z).norm() <= radius))
    };
    for z in cs.zi.iter().filter(|z| z.in_sigma_n) {
        if let (Some(a), Some(b)) = (
            nearest(&groups, z.image()),
            nearest(&groups, z.partner_image()),
        ) {
            if a != b {
                let moved = groups.remove(a.max(b));
                groups[a.min(b)].extend(moved);
            }
        }
    }
    (groups, radius)
}

fn region_of(groups: &[&Vec<C64>], radius: f64) -> Region {
    Region::union(
        groups
            .iter()
            .flat_map(|g| g.iter().map(|&z| Region::disk(z, radius)))
            .collect(),
    )
}

/// A random element of the function class: lifts, deltas, indicators and
/// fully random tables.
fn random_function(
    fc: &FunctionalCalculus,
    rng: &mut ChaCha8Rng,
    regions: &[Region],
) -> CalculusFunction {
    let cs = fc.critical_set();
    let domain = cs.domain();
    match rng.gen_range(0..4) {
        0 => fc.lift(&random_bipoly(rng, 2, 2)),
        1 => {
            let mut f = fc.zero();
            for d in &domain {
                f.set(*d, random_jet(rng, cs.shape(*d)))
                    .expect("matching shape");
            }
            f
        }
        2 if !domain.is_empty() => {
            let d = *domain.choose(rng).expect("nonempty");
            let delta = fc
                .delta(d, random_jet(rng, cs.shape(d)))
                .expect("domain point");
            delta
                .add(&fc.lift(&random_bipoly(rng, 1, 0)))
                .expect("same domain")
        }
        _ if !regions.is_empty() => {
            let r = regions.choose(rng).expect("nonempty");
            let ind = fc.indicator(r).expect("admissible region");
            ind.scale(gaussian_c(rng))
                .add(&fc.lift(&random_bipoly(rng, 1, 1)))
                .expect("same domain")
        }
        _ => fc.lift(&random_bipoly(rng, 1, 1)),
    }
}

/// Clustered eigenvalues (cluster means, which stay accurate for defective
/// eigenvalues).
fn eigen_centers(m: &CMat, rel_radius: f64) -> Vec<C64> {
    linalg::clustered_eigenvalues(m, rel_radius)
}

fn hausdorff(x: &[C64], y: &[C64]) -> f64 {
    let one_way = |a: &[C64], b: &[C64]| {
        max_of(a.iter().map(|z| {
            b.iter()
                .map(|w| (z - w).norm())
                .fold(f64::INFINITY, f64::min)
        }))
    };
    if x.is_empty() && y.is_empty() {
        return 0.0;
    }
    one_way(x, y).max(one_way(y, x))
}

/// The functional-calculus group.
pub fn calculus_suite(fc: &FunctionalCalculus, rng: &mut ChaCha8Rng) -> Vec<PropertyResult> {
    let pair = fc.pair();
    let space = pair.space();
    let cs = fc.critical_set();
    let tol = fc.tol();
    let n = pair.n();
    let ik = eye(pair.dim());
    let mut rec = Recorder {
        results: Vec::new(),
    };

    let (groups, radius) = spectral_groups(fc);
    let mut shuffled: Vec<&Vec<C64>> = groups.iter().collect();
    shuffled.shuffle(rng);
    let split = if shuffled.len() > 1 {
        rng.gen_range(1..shuffled.len())
    } else {
        shuffled.len()
    };
    let (first, second) = shuffled.split_at(split);
    let r1 = region_of(first, radius);
    let r2 = region_of(second, radius);
    let total = region_of(&shuffled, radius);
    let regions = vec![r1.clone(), r2.clone()];

    let samples: Vec<(CalculusFunction, CalculusFunction)> = (0..FUNCTION_SAMPLES)
        .map(|_| {
            (
                random_function(fc, rng, &regions),
                random_function(fc, rng, &regions),
            )
        })
        .collect();
    let alphas: Vec<(C64, C64)> = (0..FUNCTION_SAMPLES)
        .map(|_| (gaussian_c(rng), gaussian_c(rng)))
        .collect();

    rec.check("calculus.unit", "1_N(N) = I", CALCULUS_TOL, || {
        Ok(rel_diff(&fc.apply(&fc.one())?, &ik))
    });
    rec.check("calculus.lift", "s_N(N) = s(A, B)", CALCULUS_TOL, || {
        let mut worst: f64 = 0.0;
        for _ in 0..FUNCTION_SAMPLES {
            let s = random_bipoly(rng, 2, 2);
            worst = worst.max(rel_diff(
                &fc.apply(&fc.lift(&s))?,
                &s.at_matrices(pair.a(), pair.b()),
            ));
        }
        Ok(worst)
    });
    rec.check(
        "calculus.linearity",
        "(a phi + b psi)(N) = a phi(N) + b psi(N)",
        CALCULUS_TOL,
        || {
            let mut worst: f64 = 0.0;
            for ((f, g), &(a, b)) in samples.iter().zip(&alphas) {
                let lhs = fc.apply(&f.linear(g, a, b)?)?;
                let rhs = fc.apply(f)? * a + fc.apply(g)? * b;
                worst = worst.max(rel_diff(&lhs, &rhs));
            }
            Ok(worst)
        },
    );
    rec.check(
        "calculus.multiplicativity",
        "(phi psi)(N) = phi(N) psi(N)",
        CALCULUS_TOL,
        || {
            let mut worst: f64 = 0.0;
            for (f, g) in &samples {
                worst = worst.max(rel_diff(
                    &fc.apply(&f.mul(g)?)?,
                    &(fc.apply(f)? * fc.apply(g)?),
                ));
            }
            Ok(worst)
        },
    );
    rec.check(
        "calculus.involution",
        "phi#(N) = phi(N)* (Krein adjoint)",
        CALCULUS_TOL,
        || {
            let mut worst: f64 = 0.0;
            for (f, _) in &samples {
                worst = worst.max(rel_diff(
                    &fc.apply(&f.sharp(cs))?,
                    &space.adjoint(&fc.apply(f)?),
                ));
            }
            Ok(worst)
        },
    );
    rec.check(
        "calculus.bicommutant",
        "phi(N) commutes with N and N*",
        CALCULUS_TOL,
        || {
            let ns = space.adjoint(n);
            let mut worst: f64 = 0.0;
            for (f, _) in &samples {
                let x = fc.apply(f)?;
                worst = worst
                    .max(rel_diff(&(&x * n), &(n * &x)))
                    .max(rel_diff(&(&x * &ns), &(&ns * &x)));
            }
            Ok(worst)
        },
    );
    rec.check(
        "calculus.interpolant_independence",
        "phi(N) is unchanged when s is replaced by s + p(z)u + q(w)v",
        CALCULUS_TOL,
        || {
            let p = BiPoly::from_z(pair.p());
            let q = BiPoly::from_w(pair.q());
            let mut worst: f64 = 0.0;
            for (f, _) in &samples {
                let s = fc.interpolant(f)?.poly;
                let base = fc.apply_with(f, &s)?;
                for _ in 0..INTERPOLANT_PERTURBATIONS {
                    let u = random_bipoly(rng, 2, 2);
                    let v = random_bipoly(rng, 2, 2);
                    let tilde = s.add(&p.mul(&u)).add(&q.mul(&v));
                    worst = worst.max(rel_diff(&fc.apply_with(f, &tilde)?, &base));
                }
            }
            Ok(worst)
        },
    );
    rec.check(
        "calculus.support",
        "phi vanishing on sigma_N gives phi(N) = 0",
        CALCULUS_TOL,
        || {
            let mut worst: f64 = 0.0;
            for _ in 0..FUNCTION_SAMPLES {
                let mut f = fc.zero();
                for d in cs.domain() {
                    if !cs.in_support(d) {
                        f.set(d, random_jet(rng, cs.shape(d)))?;
                    }
                }
                worst = worst.max(frob(&fc.apply(&f)?) / (1.0 + f.max_abs()));
            }
            Ok(worst)
        },
    );
    rec.check(
        "calculus.spectrum_formula",
        "sigma(N) = sigma(Theta(N)) + (critical points in sigma(N)) + admissible Zi images",
        CALCULUS_TOL,
        || {
            let direct = eigen_centers(n, tol.defective_cluster);
            Ok(hausdorff(&fc.spectrum_of_n(), &direct) / cs.scale)
        },
    );
    rec.check(
        "calculus.spectral_inclusion",
        "sigma(phi(N)) lies in the values phi(z)_00 over sigma_N",
        CALCULUS_TOL,
        || {
            let support = cs.support();
            let mut worst: f64 = 0.0;
            for (f, _) in &samples {
                let values: Vec<C64> = support.iter().map(|&d| f.value(d).head()).collect();
                let size = 1.0 + max_of(values.iter().map(|z| z.norm()));
                for z in eigen_centers(&fc.apply(f)?, tol.defective_cluster) {
                    let d = values
                        .iter()
                        .map(|w| (z - w).norm())
                        .fold(f64::INFINITY, f64::min);
                    worst = worst.max(d / size);
                }
            }
            Ok(worst)
        },
    );
    rec.check(
        "calculus.projection",
        "spectral projections are Krein-selfadjoint idempotents commuting with N, additive and orthogonal on disjoint regions",
        CALCULUS_TOL,
        || {
            let p1 = fc.spectral_projection(&r1)?;
            let p2 = fc.spectral_projection(&r2)?;
            let p12 = fc.spectral_projection(&Region::union(vec![r1.clone(), r2.clone()]))?;
            let pt = fc.spectral_projection(&total)?;
            let zero = linalg::zeros(pair.dim(), pair.dim());
            let mut worst = rel_diff(&(&p1 * &p2), &zero)
                .max(rel_diff(&p12, &(&p1 + &p2)))
                .max(rel_diff(&pt, &ik));
            for p in [&p1, &p2] {
                worst = worst
                    .max(rel_diff(&(p * p), p))
                    .max(rel_diff(&space.adjoint(p), p))
                    .max(rel_diff(&(p * n), &(n * p)));
            }
            Ok(worst)
        },
    );
    rec.check(
        "calculus.riesz",
        "(e delta)(N) is an idempotent onto a subspace where N - z is nilpotent",
        CALCULUS_TOL,
        || {
            let mut worst: f64 = 0.0;
            for d in cs.support() {
                let p = fc.riesz_projection(d)?;
                worst = worst
                    .max(rel_diff(&(&p * &p), &p))
                    .max(rel_diff(&(&p * n), &(n * &p)));
                let q = linalg::range_basis(&p, 1e-8);
                let k = q.ncols();
                if k == 0 {
                    continue;
                }
                let mut m = q.adjoint() * n * &q;
                let z = cs.image(d);
                for i in 0..k {
                    m[(i, i)] -= z;
                }
                let nil = (1..k).fold(m.clone(), |acc, _| acc * &m);
                worst = worst.max(frob(&nil) / (1.0 + frob(n)).powi(k as i32));
            }
            Ok(worst)
        },
    );
    rec.check(
        "calculus.invertibility",
        "phi invertible on sigma_N iff phi(N) is, with phi^-1(N) phi(N) = I",
        CALCULUS_TOL,
        || {
            let zw = BiPoly::from_terms([((1, 0), c(1.0, 0.0)), ((0, 1), c(0.0, 1.0))]);
            let sigma = fc.spectrum_of_n();
            let far = c(2.0 * cs.scale, 0.5);
            let report = fc.check_invertible(&fc.lift(&zw.sub(&BiPoly::constant(far))));
            let mut worst = if report.invertible {
                report.residual.unwrap_or(f64::INFINITY)
            } else {
                f64::INFINITY
            };
            if let Some(&z0) = sigma.first() {
                let singular = fc.check_invertible(&fc.lift(&zw.sub(&BiPoly::constant(z0))));
                if singular.invertible {
                    worst = f64::INFINITY;
                }
            }
            Ok(worst)
        },
    );
    rec.results
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::generate::{generate, Profile};

    #[test]
    fn generated_instances_pass() {
        for profile in Profile::ALL {
            for seed in 0..4 {
                let inst = generate(seed, 5, profile);
                let report = run_suite(&inst);
                let failures: Vec<_> = report.failures().collect();
                assert!(failures.is_empty(), "{profile} seed {seed}: {failures:#?}");
            }
        }
    }

    #[test]
    fn failed_residuals_round_trip_as_null() {
        let r = PropertyResult {
            name: "x".into(),
            anchor: "y".into(),
            residual: f64::INFINITY,
            threshold: 1.0,
            pass: false,
        };
        let json = serde_json::to_string(&r).unwrap();
        assert!(json.contains("\"residual\":null"));
        assert_eq!(serde_json::from_str::<PropertyResult>(&json).unwrap(), r);
    }

    #[test]
    fn report_is_stable() {
        let inst = generate(3, 4, Profile::Jordan);
        let mut a = run_suite(&inst);
        let mut b = run_suite(&inst);
        a.elapsed_ms = 0;
        b.elapsed_ms = 0;
        assert_eq!(a, b);
        let json = serde_json::to_string(&a).unwrap();
        let back: Report = serde_json::from_str(&json).unwrap();
        assert_eq!(back, a);
    }
}
