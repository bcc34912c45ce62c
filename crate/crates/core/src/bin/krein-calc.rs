use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use krein_calculus::harness::io::{complex_list, matrix_to_record};
use krein_calculus::harness::{
    generate, parse_function, parse_region, run_suite, Instance, Profile,
};
use krein_calculus::{Error, FunctionalCalculus, C64};

#[derive(Parser)]
#[command(
    name = "krein-calc",
    version,
    about = "Functional calculus for normal definitizable operators on Krein spaces"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Instance file (JSON).
    #[arg(long, global = true)]
    input: Option<PathBuf>,
    /// Function specification file (JSON), for `apply`.
    #[arg(long, global = true)]
    function: Option<PathBuf>,
    /// Region file (JSON), for `project`.
    #[arg(long, global = true)]
    region: Option<PathBuf>,
    /// Write the result here instead of stdout.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    /// Seed for `generate`.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Multiply every tolerance of the instance by this factor.
    #[arg(long, global = true, default_value_t = 1.0)]
    tol_scale: f64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Dimension for `generate`.
    #[arg(long, global = true, default_value_t = 4)]
    n: usize,
    /// Instance family for `generate`: diagonal, jordan or pontryagin.
    #[arg(long, global = true, default_value = "diagonal")]
    profile: Profile,
}

#[derive(Subcommand)]
enum Command {
    /// Validate an instance and print a summary.
    Inspect,
    /// Emit the Gram factors F, F1, F2 and the contractions R1, R2.
    Embed,
    /// Print sigma(Theta(N)), sigma(N) and the critical set.
    Spectrum,
    /// Evaluate phi(N) for a function file.
    Apply,
    /// Spectral projection onto a region.
    Project,
    /// Run the property suite; exit status 0 iff every property passes.
    Verify,
    /// Write a random instance.
    Generate,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Text,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok((text, ok)) => {
            let written = match &cli.output {
                Some(path) => std::fs::write(path, text).map_err(Error::from),
                None => {
                    print!("{text}");
                    Ok(())
                }
            };
            match written {
                Ok(()) if ok => ExitCode::SUCCESS,
                Ok(()) => ExitCode::from(1),
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(2)
                }
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

/// Returns the rendered output and whether the command succeeded.
fn run(cli: &Cli) -> Result<(String, bool), Error> {
    if let Command::Generate = cli.command {
        if !(1..=krein_calculus::harness::generate::MAX_DIM).contains(&cli.n) {
            return Err(Error::Validation(format!(
                "--n must lie in 1..={}",
                krein_calculus::harness::generate::MAX_DIM
            )));
        }
        let instance = generate(cli.seed, cli.n, cli.profile);
        return Ok((instance.to_json() + "\n", true));
    }
    let instance = load(cli)?;
    if let Command::Verify = cli.command {
        let report = run_suite(&instance);
        let text = match cli.format {
            Format::Json => serde_json::to_string_pretty(&report)? + "\n",
            Format::Text => report.to_text(),
        };
        return Ok((text, report.all_pass()));
    }
    let fc = FunctionalCalculus::new(instance.pair.clone())?;
    let value = match cli.command {
        Command::Inspect => inspect(&instance, &fc),
        Command::Embed => embed(&fc),
        Command::Spectrum => spectrum(&fc),
        Command::Apply => {
            let path = cli
                .function
                .as_ref()
                .ok_or_else(|| Error::Validation("apply needs --function".into()))?;
            let phi = parse_function(path)?.build(&fc)?;
            json!({ "matrix": matrix_to_record(&fc.apply(&phi)?) })
        }
        Command::Project => {
            let path = cli
                .region
                .as_ref()
                .ok_or_else(|| Error::Validation("project needs --region".into()))?;
            let region = parse_region(path)?;
            json!({ "matrix": matrix_to_record(&fc.spectral_projection(&region)?) })
        }
        Command::Verify | Command::Generate => unreachable!("handled above"),
    };
    let text = match cli.format {
        Format::Json => serde_json::to_string_pretty(&value)? + "\n",
        Format::Text => render_text(&value, 0),
    };
    Ok((text, true))
}

fn load(cli: &Cli) -> Result<Instance, Error> {
    let path = cli
        .input
        .as_ref()
        .ok_or_else(|| Error::Validation("this command needs --input".into()))?;
    let record = serde_json::from_str(&std::fs::read_to_string(path)?)?;
    Instance::from_record_with(record, cli.tol_scale)
}

fn inspect(instance: &Instance, fc: &FunctionalCalculus) -> Value {
    let pair = fc.pair();
    let b = fc.bundle();
    let cs = fc.critical_set();
    let (pos, neg) = pair.space().signature();
    json!({
        "label": instance.label,
        "digest": instance.digest(),
        "dim": pair.dim(),
        "signature": [pos, neg],
        "p": pair.p().coeffs(),
        "q": pair.q().coeffs(),
        "dim_V": b.dim_v(),
        "dim_V1": b.dim_vj(1),
        "dim_V2": b.dim_vj(2),
        "spectrum_size": fc.spectrum_of_n().len(),
        "critical_points": cs.crit.len(),
        "zi_points": cs.zi.len(),
        "construction_checks": b.checks().iter().map(|c| json!({"name": c.name, "residual": c.residual})).collect::<Vec<_>>(),
    })
}

fn embed(fc: &FunctionalCalculus) -> Value {
    let b = fc.bundle();
    json!({
        "F": matrix_to_record(b.f()),
        "F1": matrix_to_record(b.fj(1)),
        "F2": matrix_to_record(b.fj(2)),
        "R1": matrix_to_record(b.rj(1)),
        "R2": matrix_to_record(b.rj(2)),
    })
}

fn spectrum(fc: &FunctionalCalculus) -> Value {
    let cs = fc.critical_set();
    let shape = |s: krein_calculus::JetShape| json!({"kind": format!("{:?}", s.kind()), "m": s.m(), "n": s.n()});
    json!({
        "theta": complex_list(&fc.spectral().values()),
        "N": complex_list(&fc.spectrum_of_n()),
        "critical": cs.crit.iter().map(|w| json!({
            "value": [w.value.re, w.value.im],
            "shape": shape(w.shape()),
            "in_spectrum": w.in_sigma_n,
        })).collect::<Vec<_>>(),
        "zi": cs.zi.iter().map(|z| json!({
            "xi": [z.xi.re, z.xi.im],
            "eta": [z.eta.re, z.eta.im],
            "image": [z.image().re, z.image().im],
            "shape": shape(z.shape()),
            "in_spectrum": z.in_sigma_n,
        })).collect::<Vec<_>>(),
    })
}

/// Indented `key: value` text; `[re, im]` pairs print as complex numbers and
/// matrices row by row.
fn render_text(value: &Value, indent: usize) -> String {
    let pad = " ".repeat(indent);
    match value {
        Value::Object(map) => map
            .iter()
            .map(|(k, v)| match v {
                Value::Object(_) => format!("{pad}{k}:\n{}", render_text(v, indent + 2)),
                Value::Array(items) if is_matrix(v) => {
                    let mut out = format!(
                        "{pad}{k}: {}x{}\n",
                        items.len(),
                        items[0].as_array().map_or(0, Vec::len)
                    );
                    for row in items {
                        out.push_str(&format!("{pad}  {}\n", render_inline(row)));
                    }
                    out
                }
                Value::Array(items) if items.iter().any(Value::is_object) => {
                    let mut out = format!("{pad}{k}:\n");
                    for item in items {
                        out.push_str(&format!("{pad}  -\n{}", render_text(item, indent + 4)));
                    }
                    out
                }
                _ if REAL_LISTS.contains(&k.as_str()) => format!("{pad}{k}: {v}\n"),
                _ => format!("{pad}{k}: {}\n", render_inline(v)),
            })
            .collect(),
        other => format!("{pad}{}\n", render_inline(other)),
    }
}

/// Keys whose two-element arrays are real lists, not complex numbers.
const REAL_LISTS: [&str; 3] = ["p", "q", "signature"];

fn as_complex(v: &Value) -> Option<C64> {
    match v.as_array()?.as_slice() {
        [re, im] => Some(C64::new(re.as_f64()?, im.as_f64()?)),
        _ => None,
    }
}

/// A non-empty array of rows of `[re, im]` pairs.
fn is_matrix(v: &Value) -> bool {
    v.as_array().is_some_and(|rows| {
        !rows.is_empty()
            && rows.iter().all(|r| {
                r.as_array()
                    .is_some_and(|e| !e.is_empty() && e.iter().all(|x| as_complex(x).is_some()))
            })
    })
}

fn render_inline(v: &Value) -> String {
    if let Some(z) = as_complex(v) {
        return format!("{:.6}{:+.6}i", z.re, z.im);
    }
    match v {
        Value::Array(items) => format!(
            "[{}]",
            items
                .iter()
                .map(render_inline)
                .collect::<Vec<_>>()
                .join(", ")
        ),
        Value::Number(n) => match n.as_f64() {
            Some(x) if n.is_f64() => format!("{x:.6e}"),
            _ => n.to_string(),
        },
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}
