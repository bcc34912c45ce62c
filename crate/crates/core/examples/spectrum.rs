//! Spectrum of `Θ(N)`, spectrum of `N` and the critical set of a generated
//! instance with a non-trivial Jordan structure.
//!
//! Run with `cargo run --example spectrum`.

use krein_calculus::harness::{generate, Profile};
use krein_calculus::{FunctionalCalculus, JetShape};

fn main() -> krein_calculus::Result<()> {
    let instance = generate(7, 6, Profile::Jordan);
    let fc = FunctionalCalculus::new(instance.pair)?;
    let cs = fc.critical_set();

    println!("instance {}", instance.label);
    println!(
        "p = {:?}, q = {:?}",
        fc.pair().p().coeffs(),
        fc.pair().q().coeffs()
    );
    println!("sigma(Theta(N)):");
    for point in fc.spectral().points() {
        println!(
            "  {:.4}{:+.4}i  (rank {})",
            point.value.re + 0.0,
            point.value.im + 0.0,
            point.projection.trace().re.round()
        );
    }
    println!(
        "sigma(N): {}",
        fc.spectrum_of_n()
            .iter()
            .map(|z| format!("{:.4}{:+.4}i", z.re + 0.0, z.im + 0.0))
            .collect::<Vec<_>>()
            .join(", ")
    );
    for w in &cs.crit {
        println!(
            "critical {:.4}{:+.4}i: {}, in sigma(N): {}",
            w.value.re + 0.0,
            w.value.im + 0.0,
            shape(w.shape()),
            w.in_sigma_n
        );
    }
    for z in &cs.zi {
        println!(
            "conjugate-pair point {:.4}{:+.4}i: {}, in sigma(N): {}",
            z.image().re + 0.0,
            z.image().im + 0.0,
            shape(z.shape()),
            z.in_sigma_n
        );
    }
    Ok(())
}

fn shape(s: JetShape) -> String {
    format!("{:?} jets of size {}x{}", s.kind(), s.m(), s.n())
}
