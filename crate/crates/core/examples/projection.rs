//! Spectral projections: indicators of regions and Riesz projections at
//! single spectral points. The projections are Krein-selfadjoint idempotents
//! commuting with `N`.
//!
//! Run with `cargo run --example projection`.

use krein_calculus::harness::{generate, Profile};
use krein_calculus::linalg::frob;
use krein_calculus::{FunctionalCalculus, Region};

fn main() -> krein_calculus::Result<()> {
    let instance = generate(3, 6, Profile::Diagonal);
    let fc = FunctionalCalculus::new(instance.pair)?;
    let space = fc.pair().space();
    let n = fc.pair().n();
    let cs = fc.critical_set();

    println!(
        "instance {}, sigma(N) = {}",
        instance.label,
        fc.spectrum_of_n()
            .iter()
            .map(|z| format!("{:.2}{:+.2}i", z.re + 0.0, z.im + 0.0))
            .collect::<Vec<_>>()
            .join(", ")
    );
    let upper = Region::rect((-1e3, 1e3), (0.0, 1e3));
    match fc.spectral_projection(&upper) {
        Ok(e) => report("upper half-plane", &e, n, space),
        Err(err) => println!("upper half-plane: {err}"),
    }
    for point in cs.support() {
        let e = fc.riesz_projection(point)?;
        let z = cs.image(point);
        report(
            &format!("Riesz at {:.2}{:+.2}i", z.re + 0.0, z.im + 0.0),
            &e,
            n,
            space,
        );
    }
    Ok(())
}

fn report(
    name: &str,
    e: &krein_calculus::CMat,
    n: &krein_calculus::CMat,
    space: &krein_calculus::KreinSpace,
) {
    println!(
        "{name}: rank {:.0}, |E^2 - E| = {:.1e}, |E - E*| = {:.1e}, |EN - NE| = {:.1e}",
        e.trace().re,
        frob(&(e * e - e)),
        frob(&(e - space.adjoint(e))),
        frob(&(e * n - n * e)),
    );
}
