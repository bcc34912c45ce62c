//! Evaluate `φ(N)` for jet-valued functions.
//!
//! On a two-dimensional neutral example `N` is nilpotent and the whole
//! spectrum is critical, so `φ(N)` is determined by a single jet: the Taylor
//! jet of `exp` at 0 yields `exp(N) = I + N`. On a generated instance the
//! polynomial `z ↦ z²` lifts to `N²`.
//!
//! Run with `cargo run --example apply`.

use krein_calculus::harness::{generate, Profile};
use krein_calculus::linalg::{c, rel_diff};
use krein_calculus::{
    BiPoly, CMat, DefinitizablePair, FunctionalCalculus, Jet, JetShape, KreinSpace, RealUniPoly,
    Tolerances,
};

fn main() -> krein_calculus::Result<()> {
    let tol = Tolerances::default();
    let flip = CMat::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)]);
    let n = CMat::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
    let pair = DefinitizablePair::from_normal(
        KreinSpace::new(flip, tol)?,
        &n,
        RealUniPoly::new(vec![0.0, 0.0, 1.0]),
        RealUniPoly::new(vec![0.0, 1.0]),
    )?;
    let fc = FunctionalCalculus::new(pair)?;
    let zero = fc
        .critical_set()
        .locate(c(0.0, 0.0), 1e-9)
        .expect("0 is critical");
    let mut jet = Jet::zero(JetShape::a(2, 1)?);
    for (k, l, v) in [
        (0, 0, c(1.0, 0.0)),
        (1, 0, c(1.0, 0.0)),
        (2, 0, c(0.5, 0.0)),
        (0, 1, c(0.0, 1.0)),
    ] {
        jet.set(k, l, v)?;
    }
    let exp_n = fc.apply(&fc.delta(zero, jet)?)?;
    println!("exp(N) = {}", show(&exp_n));

    let fc = FunctionalCalculus::new(generate(11, 5, Profile::Pontryagin).pair)?;
    // (x + iy)² = x² − y² + 2i·xy.
    let square = BiPoly::from_terms(vec![
        ((2, 0), c(1.0, 0.0)),
        ((0, 2), c(-1.0, 0.0)),
        ((1, 1), c(0.0, 2.0)),
    ]);
    let lifted = fc.apply(&fc.lift(&square))?;
    let n = fc.pair().n();
    println!(
        "|phi(N) - N^2| / |N^2| = {:.2e}",
        rel_diff(&lifted, &(n * n))
    );
    Ok(())
}

fn show(m: &CMat) -> String {
    m.row_iter()
        .map(|row| {
            row.iter()
                .map(|z| format!("{:>9.4}{:+.4}i", z.re + 0.0, z.im + 0.0))
                .collect::<Vec<_>>()
                .join("  ")
        })
        .collect::<Vec<_>>()
        .join("\n     ")
}
