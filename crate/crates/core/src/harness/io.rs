//! JSON file formats: matrices, instances, functions and regions.
//!
//! * Matrix: row-major array of rows, each entry `[re, im]`.
//! * Instance: `{"label", "J", "N" | ("A", "B"), "p"?, "q"?, "tol"?}`; a
//!   missing `p` or `q` is searched for up to degree [`SEARCH_MAX_DEGREE`].
//! * Function: tagged by `"kind"`: `bipoly`, `indicator`, `delta` or `table`.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::bipoly::{BiPolyRecord, RealUniPoly};
use crate::calculus::{CalculusFunction, DomainPoint, FunctionalCalculus, Region};
use crate::jets::{Jet, JetRecord};
use crate::krein::{DefinitizablePair, KreinSpace};
use crate::linalg::c;
use crate::{BiPoly, CMat, Error, Result, Tolerances, C64};

/// Degree bound for definitizing polynomials missing from an instance file.
pub const SEARCH_MAX_DEGREE: usize = 6;

/// Row-major complex matrix, each entry `[re, im]`.
pub type MatrixRecord = Vec<Vec<[f64; 2]>>;

pub fn matrix_to_record(m: &CMat) -> MatrixRecord {
    (0..m.nrows())
        .map(|i| {
            (0..m.ncols())
                .map(|j| [m[(i, j)].re, m[(i, j)].im])
                .collect()
        })
        .collect()
}

pub fn matrix_from_record(rec: &MatrixRecord) -> Result<CMat> {
    let rows = rec.len();
    let cols = rec.first().map_or(0, |r| r.len());
    if rec.iter().any(|r| r.len() != cols) {
        return Err(Error::Schema("matrix rows have different lengths".into()));
    }
    Ok(CMat::from_fn(rows, cols, |i, j| {
        c(rec[i][j][0], rec[i][j][1])
    }))
}

/// On-disk form of an instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceRecord {
    #[serde(default)]
    pub label: String,
    #[serde(rename = "J")]
    pub j: MatrixRecord,
    #[serde(rename = "N", default, skip_serializing_if = "Option::is_none")]
    pub n: Option<MatrixRecord>,
    #[serde(rename = "A", default, skip_serializing_if = "Option::is_none")]
    pub a: Option<MatrixRecord>,
    #[serde(rename = "B", default, skip_serializing_if = "Option::is_none")]
    pub b: Option<MatrixRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<Tolerances>,
}

/// A validated instance: the definitizable pair plus its on-disk form.
#[derive(Debug, Clone)]
pub struct Instance {
    pub label: String,
    pub pair: DefinitizablePair,
    pub record: InstanceRecord,
}

impl Instance {
    /// Validates a record: `J` Hermitian invertible, `N` normal (or `A`, `B`
    /// commuting selfadjoint), `p`, `q` definitizing. Missing polynomials are
    /// searched for.
    pub fn from_record(record: InstanceRecord) -> Result<Self> {
        Self::from_record_with(record, 1.0)
    }

    /// As [`from_record`](Self::from_record) with all tolerances scaled.
    pub fn from_record_with(mut record: InstanceRecord, tol_scale: f64) -> Result<Self> {
        let tol = record.tol.unwrap_or_default().scaled(tol_scale);
        let j = matrix_from_record(&record.j)?;
        let space = KreinSpace::new(j, tol)?;
        let p = record.p.clone().map(RealUniPoly::new);
        let q = record.q.clone().map(RealUniPoly::new);
        let pair = match (&record.n, &record.a, &record.b) {
            (Some(n), None, None) => DefinitizablePair::with_search(
                space,
                &matrix_from_record(n)?,
                p,
                q,
                SEARCH_MAX_DEGREE,
            )?,
            (None, Some(a), Some(b)) => {
                let (a, b) = (matrix_from_record(a)?, matrix_from_record(b)?);
                let p = match p {
                    Some(p) => p,
                    None => space.search_definitizing(&a, SEARCH_MAX_DEGREE)?,
                };
                let q = match q {
                    Some(q) => q,
                    None => space.search_definitizing(&b, SEARCH_MAX_DEGREE)?,
                };
                DefinitizablePair::from_parts(space, a, b, p, q)?
            }
            _ => {
                return Err(Error::Schema(
                    "instance needs either \"N\" or both \"A\" and \"B\"".into(),
                ))
            }
        };
        record.p = Some(pair.p().coeffs().to_vec());
        record.q = Some(pair.q().coeffs().to_vec());
        Ok(Self {
            label: record.label.clone(),
            pair,
            record,
        })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Self::from_record(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.record).expect("instance records serialize")
    }

    /// Hex SHA-256 of the canonical JSON of the record.
    pub fn digest(&self) -> String {
        let canonical = serde_json::to_vec(&self.record).expect("instance records serialize");
        hex::encode(Sha256::digest(canonical))
    }
}

/// Reads and validates an instance file.
pub fn parse_instance(path: impl AsRef<Path>) -> Result<Instance> {
    Instance::from_json(&std::fs::read_to_string(path)?)
}

/// Where a delta function sits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PointRecord {
    /// A critical point `x + iy` given as `[x, y]`.
    Crit([f64; 2]),
    /// A `Zⁱ` pair `(ξ, η)` given as `[[re, im], [re, im]]`.
    Zi([[f64; 2]; 2]),
    /// A noncritical eigenvalue of `Θ(N)`.
    Spectral([f64; 2]),
}

/// Function specification file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum FunctionRecord {
    /// The lift `s_N` of a bivariate polynomial, coefficients `[i, j, re, im]` of `zⁱwʲ`.
    Bipoly { coeffs: BiPolyRecord },
    /// Indicator of a closed region.
    Indicator { region: Region },
    /// `a·δ_ζ`.
    Delta { point: PointRecord, jet: JetRecord },
    /// Explicit values on the whole domain.
    Table {
        scalars: Vec<[f64; 2]>,
        crit: Vec<JetRecord>,
        zi: Vec<JetRecord>,
    },
}

/// Matching radius for points named in function files, times the spectral scale.
const LOCATE_RADIUS: f64 = 1e-6;

impl FunctionRecord {
    /// Builds the function on the domain of `fc`.
    pub fn build(&self, fc: &FunctionalCalculus) -> Result<CalculusFunction> {
        let cs = fc.critical_set();
        match self {
            FunctionRecord::Bipoly { coeffs } => Ok(fc.lift(&BiPoly::from(coeffs))),
            FunctionRecord::Indicator { region } => fc.indicator(region),
            FunctionRecord::Delta { point, jet } => {
                let radius = LOCATE_RADIUS * cs.scale;
                let located = match point {
                    PointRecord::Crit([x, y]) => cs
                        .locate(c(*x, *y), radius)
                        .filter(|d| matches!(d, DomainPoint::Crit(_))),
                    PointRecord::Spectral([x, y]) => cs
                        .locate(c(*x, *y), radius)
                        .filter(|d| matches!(d, DomainPoint::Noncritical(_))),
                    PointRecord::Zi([xi, eta]) => {
                        cs.locate_zi(c(xi[0], xi[1]), c(eta[0], eta[1]), radius)
                    }
                };
                let point = located
                    .ok_or_else(|| Error::Domain(format!("{point:?} is not a domain point")))?;
                fc.delta(point, Jet::try_from(jet)?)
            }
            FunctionRecord::Table { scalars, crit, zi } => {
                if scalars.len() != cs.noncritical.len()
                    || crit.len() != cs.crit.len()
                    || zi.len() != cs.zi.len()
                {
                    return Err(Error::Domain(format!(
                        "table has {}/{}/{} entries, domain has {}/{}/{}",
                        scalars.len(),
                        crit.len(),
                        zi.len(),
                        cs.noncritical.len(),
                        cs.crit.len(),
                        cs.zi.len()
                    )));
                }
                let mut f = fc.zero();
                for (k, v) in scalars.iter().enumerate() {
                    f.scalars[k] = c(v[0], v[1]);
                }
                for (i, r) in crit.iter().enumerate() {
                    f.set(DomainPoint::Crit(i), Jet::try_from(r)?)?;
                }
                for (i, r) in zi.iter().enumerate() {
                    f.set(DomainPoint::Zi(i), Jet::try_from(r)?)?;
                }
                Ok(f)
            }
        }
    }

    /// Table form of an already built function.
    pub fn table(f: &CalculusFunction) -> Self {
        FunctionRecord::Table {
            scalars: f.scalars.iter().map(|z| [z.re, z.im]).collect(),
            crit: f.crit.iter().map(JetRecord::from).collect(),
            zi: f.zi.iter().map(JetRecord::from).collect(),
        }
    }
}

pub fn parse_function(path: impl AsRef<Path>) -> Result<FunctionRecord> {
    Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
}

pub fn parse_region(path: impl AsRef<Path>) -> Result<Region> {
    Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
}

/// `[re, im]` pairs for a list of complex numbers.
pub fn complex_list(values: &[C64]) -> Vec<[f64; 2]> {
    values.iter().map(|z| [z.re, z.im]).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::rel_diff;

    const W1: &str = r#"{
        "label": "W1",
        "J": [[[1,0],[0,0]],[[0,0],[-1,0]]],
        "A": [[[1,0],[0,0]],[[0,0],[-1,0]]],
        "B": [[[2,0],[0,0]],[[0,0],[3,0]]],
        "p": [0, 1],
        "q": [3, -1]
    }"#;

    #[test]
    fn w1_fixture_round_trip() {
        let inst = Instance::from_json(W1).unwrap();
        assert_eq!(inst.pair.p().coeffs(), &[0.0, 1.0]);
        assert_eq!(inst.pair.q().coeffs(), &[3.0, -1.0]);
        let again = Instance::from_json(&inst.to_json()).unwrap();
        assert_eq!(again.record, inst.record);
        assert_eq!(again.digest(), inst.digest());
    }

    #[test]
    fn missing_polynomials_are_searched() {
        let text = r#"{"J": [[[0,0],[1,0]],[[1,0],[0,0]]], "N": [[[0,0],[1,0]],[[0,0],[0,0]]]}"#;
        let inst = Instance::from_json(text).unwrap();
        assert_eq!(inst.pair.p().coeffs(), &[0.0, 1.0]);
        assert!(inst.record.q.is_some());
    }

    #[test]
    fn validation_errors() {
        let bad_j = r#"{"J": [[[1,0],[1,0]],[[0,0],[-1,0]]], "N": [[[1,0],[0,0]],[[0,0],[1,0]]]}"#;
        assert!(matches!(
            Instance::from_json(bad_j),
            Err(Error::NotHermitian(_))
        ));
        let non_normal = r#"{"J": [[[1,0],[0,0]],[[0,0],[1,0]]], "N": [[[0,0],[1,0]],[[0,0],[0,0]]], "p":[1], "q":[1]}"#;
        assert!(matches!(
            Instance::from_json(non_normal),
            Err(Error::NotNormal { .. })
        ));
        let corrupted_q = W1.replace("\"q\": [3, -1]", "\"q\": [-3, 1]");
        assert!(matches!(
            Instance::from_json(&corrupted_q),
            Err(Error::NotPsd { .. })
        ));
        assert!(matches!(
            Instance::from_json(r#"{"J": [[[1,0]]]}"#),
            Err(Error::Schema(_))
        ));
    }

    #[test]
    fn function_files() {
        let inst = Instance::from_json(W1).unwrap();
        let fc = FunctionalCalculus::new(inst.pair).unwrap();
        let indicator: FunctionRecord = serde_json::from_str(
            r#"{"kind":"indicator","region":{"type":"disk","center":[1,2],"radius":1}}"#,
        )
        .unwrap();
        let p = fc.apply(&indicator.build(&fc).unwrap()).unwrap();
        let expected = crate::linalg::diag(&[c(1.0, 0.0), c(0.0, 0.0)]);
        assert!(rel_diff(&p, &expected) < 1e-12);

        let poly: FunctionRecord =
            serde_json::from_str(r#"{"kind":"bipoly","coeffs":[[1,0,1,0],[0,1,0,1]]}"#).unwrap();
        let n = fc.apply(&poly.build(&fc).unwrap()).unwrap();
        assert!(rel_diff(&n, fc.pair().n()) < 1e-12);

        let delta: FunctionRecord = serde_json::from_str(
            r#"{"kind":"delta","point":{"crit":[0,3]},"jet":{"m":1,"n":1,"kind":"A","entries":[[0,0,1,0]]}}"#,
        )
        .unwrap();
        let f = delta.build(&fc).unwrap();
        let table = FunctionRecord::table(&f);
        let json = serde_json::to_string(&table).unwrap();
        let back: FunctionRecord = serde_json::from_str(&json).unwrap();
        assert_eq!(back.build(&fc).unwrap(), f);

        let missing: FunctionRecord = serde_json::from_str(
            r#"{"kind":"delta","point":{"crit":[5,5]},"jet":{"m":0,"n":0,"kind":"A","entries":[]}}"#,
        )
        .unwrap();
        assert!(matches!(missing.build(&fc), Err(Error::Domain(_))));
    }

    #[test]
    fn matrix_records() {
        let m = CMat::from_fn(2, 3, |i, j| c(i as f64, j as f64 - 0.5));
        assert_eq!(matrix_from_record(&matrix_to_record(&m)).unwrap(), m);
        assert!(matrix_from_record(&vec![vec![[0.0, 0.0]], vec![]]).is_err());
    }
}
