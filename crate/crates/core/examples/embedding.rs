//! Build the Hilbert-space embedding of a small indefinite example and check
//! that the contractions split the identity: `R₁R₁* + R₂R₂* = I`.
//!
//! Run with `cargo run --example embedding`.

use krein_calculus::linalg::{c, diag, eye, rel_diff};
use krein_calculus::{
    CMat, DefinitizablePair, FunctionalCalculus, KreinSpace, RealUniPoly, Tolerances,
};

fn main() -> krein_calculus::Result<()> {
    let tol = Tolerances::default();
    // J = diag(1, −1), N = diag(1 + 2i, −1 + 3i), p(x) = x, q(y) = 3 − y.
    let space = KreinSpace::diagonal(&[1.0, -1.0], tol)?;
    let n = diag(&[c(1.0, 2.0), c(-1.0, 3.0)]);
    let pair = DefinitizablePair::from_normal(
        space,
        &n,
        RealUniPoly::new(vec![0.0, 1.0]),
        RealUniPoly::new(vec![3.0, -1.0]),
    )?;
    let fc = FunctionalCalculus::new(pair)?;
    let bundle = fc.bundle();

    println!(
        "dim V = {}, dim V1 = {}, dim V2 = {}",
        bundle.dim_v(),
        bundle.dim_vj(1),
        bundle.dim_vj(2)
    );
    println!("F  = {}", show(bundle.f()));
    println!("R1 = {}", show(bundle.rj(1)));
    println!("R2 = {}", show(bundle.rj(2)));
    let split = &bundle.rrs(1) + &bundle.rrs(2);
    println!(
        "|R1R1* + R2R2* - I| = {:.2e}",
        rel_diff(&split, &eye(bundle.dim_v()))
    );
    println!("Θ(N) = {}", show(fc.theta_n()));
    for check in bundle.checks() {
        println!("  {:<32} {:.2e}", check.name, check.residual);
    }
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
