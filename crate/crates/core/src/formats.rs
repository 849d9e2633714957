//! Text file formats.
//!
//! * HMX-1: `{"kind":"hermitian","n":N,"entries":[[re,im],...]}`, row-major.
//!   Readers also accept `"kind":"matrix"` for general square complex matrices.
//! * SOP-1: `{"kind":"superop","shape":[...],"basis":"gm-v1","matrix":[[...],...]}`.
//! * SEP-1: `{"shape":[...],"weights":[...],"factors":[[[[re,im],...] per slot] per point]}`.
//! * AUT-1: canonical automorphism record (permutation, flags, unitaries), used
//!   as the answer sidecar of generated maps.
//!
//! HMX-1 and SOP-1 writers print every number with 17 significant digits so
//! that reading back reproduces the exact `f64`.

use std::fmt::Write as _;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hermitian::HermitianOperator;
use crate::linalg::CVector;
use crate::states::{ProductPureState, SeparableEnsemble};
use crate::superop::{CanonicalAutomorphism, Superoperator};
use crate::tensor::{CMatrix, TensorShape};

pub const BASIS_NAME: &str = "gm-v1";

/// Shortest decimal with 17 significant digits, valid as a JSON number.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn check_finite<'a>(values: impl IntoIterator<Item = &'a f64>) -> Result<()> {
    if values.into_iter().any(|v| !v.is_finite()) {
        return Err(Error::Format("cannot write non-finite values".into()));
    }
    Ok(())
}

fn write_complex_rows(out: &mut String, m: &CMatrix) {
    let n = m.nrows();
    for i in 0..n {
        let row: Vec<String> = (0..m.ncols())
            .map(|j| format!("[{},{}]", fmt_f64(m[(i, j)].re), fmt_f64(m[(i, j)].im)))
            .collect();
        let sep = if i + 1 < n { "," } else { "" };
        let _ = writeln!(out, "  {}{sep}", row.join(","));
    }
}

fn write_matrix_kind(kind: &str, m: &CMatrix) -> Result<String> {
    check_finite(m.iter().flat_map(|z| [&z.re, &z.im]))?;
    let mut out = format!("{{\"kind\":\"{kind}\",\"n\":{},\"entries\":[\n", m.nrows());
    write_complex_rows(&mut out, m);
    out.push_str("]}\n");
    Ok(out)
}

pub fn write_hermitian(x: &HermitianOperator) -> Result<String> {
    write_matrix_kind("hermitian", x.matrix())
}

/// HMX-1 layout for a general square complex matrix (`"kind":"matrix"`).
pub fn write_matrix(m: &CMatrix) -> Result<String> {
    if m.nrows() != m.ncols() {
        return Err(Error::Format("only square matrices are supported".into()));
    }
    write_matrix_kind("matrix", m)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct MatrixFile {
    kind: String,
    n: usize,
    entries: Vec<[f64; 2]>,
}

fn parse_matrix_file(text: &str) -> Result<(String, CMatrix)> {
    let file: MatrixFile = serde_json::from_str(text)?;
    if file.n == 0 {
        return Err(Error::Format("n must be positive".into()));
    }
    if file.entries.len() != file.n * file.n {
        return Err(Error::Format(format!("expected {} entries, found {}", file.n * file.n, file.entries.len())));
    }
    let m = CMatrix::from_fn(file.n, file.n, |i, j| {
        let [re, im] = file.entries[i * file.n + j];
        Complex64::new(re, im)
    });
    Ok((file.kind, m))
}

pub fn read_hermitian(text: &str) -> Result<HermitianOperator> {
    let (kind, m) = parse_matrix_file(text)?;
    if kind != "hermitian" {
        return Err(Error::Format(format!("expected kind \"hermitian\", found {kind:?}")));
    }
    HermitianOperator::new(m)
}

/// Reads either HMX-1 kind as a general complex matrix.
pub fn read_matrix(text: &str) -> Result<CMatrix> {
    let (kind, m) = parse_matrix_file(text)?;
    match kind.as_str() {
        "hermitian" => Ok(HermitianOperator::new(m)?.into_matrix()),
        "matrix" => Ok(m),
        other => Err(Error::Format(format!("unknown matrix kind {other:?}"))),
    }
}

pub fn write_superop(s: &Superoperator) -> Result<String> {
    let m = s.matrix();
    check_finite(m.iter())?;
    let dims: Vec<String> = s.shape().dims().iter().map(|d| d.to_string()).collect();
    let mut out = format!(
        "{{\"kind\":\"superop\",\"shape\":[{}],\"basis\":\"{BASIS_NAME}\",\"matrix\":[\n",
        dims.join(",")
    );
    let rows = m.nrows();
    for i in 0..rows {
        let row: Vec<String> = m.row(i).iter().map(|&v| fmt_f64(v)).collect();
        let sep = if i + 1 < rows { "," } else { "" };
        let _ = writeln!(out, "  [{}]{sep}", row.join(","));
    }
    out.push_str("]}\n");
    Ok(out)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SuperopFile {
    kind: String,
    shape: TensorShape,
    basis: String,
    matrix: Vec<Vec<f64>>,
}

pub fn read_superop(text: &str) -> Result<Superoperator> {
    let file: SuperopFile = serde_json::from_str(text)?;
    if file.kind != "superop" {
        return Err(Error::Format(format!("expected kind \"superop\", found {:?}", file.kind)));
    }
    if file.basis != BASIS_NAME {
        return Err(Error::Format(format!("unsupported basis {:?}", file.basis)));
    }
    let d = file.shape.total_dim().pow(2);
    if file.matrix.len() != d || file.matrix.iter().any(|row| row.len() != d) {
        return Err(Error::Format(format!("matrix must be {d}x{d} for shape {}", file.shape)));
    }
    let m = DMatrix::from_fn(d, d, |i, j| file.matrix[i][j]);
    Superoperator::new(file.shape, m)
}

fn complex_entries(v: &[Complex64]) -> Vec<[f64; 2]> {
    v.iter().map(|z| [z.re, z.im]).collect()
}

fn from_entries(v: &[[f64; 2]]) -> Vec<Complex64> {
    v.iter().map(|&[re, im]| Complex64::new(re, im)).collect()
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EnsembleFile {
    shape: TensorShape,
    weights: Vec<f64>,
    factors: Vec<Vec<Vec<[f64; 2]>>>,
}

pub fn write_ensemble(e: &SeparableEnsemble) -> Result<String> {
    let file = EnsembleFile {
        shape: e.shape().clone(),
        weights: e.weights().to_vec(),
        factors: e
            .points()
            .iter()
            .map(|p| p.factors().iter().map(|f| complex_entries(f.as_slice())).collect())
            .collect(),
    };
    Ok(serde_json::to_string(&file)? + "\n")
}

pub fn read_ensemble(text: &str) -> Result<SeparableEnsemble> {
    let file: EnsembleFile = serde_json::from_str(text)?;
    let points = file
        .factors
        .iter()
        .map(|slots| {
            let factors = slots.iter().map(|f| CVector::from_vec(from_entries(f))).collect();
            ProductPureState::new(file.shape.clone(), factors)
        })
        .collect::<Result<Vec<_>>>()?;
    SeparableEnsemble::new(file.shape, file.weights, points)
}

/// Serializable view of a [`CanonicalAutomorphism`]. `perm[i]` is the input
/// slot feeding output slot `i` (zero-based); unitaries are row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AutomorphismRecord {
    pub kind: String,
    pub shape: TensorShape,
    pub perm: Vec<usize>,
    pub tflags: Vec<bool>,
    pub unitaries: Vec<Vec<[f64; 2]>>,
}

impl From<&CanonicalAutomorphism> for AutomorphismRecord {
    fn from(a: &CanonicalAutomorphism) -> Self {
        Self {
            kind: "canonical".into(),
            shape: a.shape().clone(),
            perm: a.perm().to_vec(),
            tflags: a.tflags().to_vec(),
            unitaries: a
                .unitaries()
                .iter()
                .map(|u| complex_entries(&u.transpose().iter().copied().collect::<Vec<_>>()))
                .collect(),
        }
    }
}

impl AutomorphismRecord {
    pub fn to_automorphism(&self) -> Result<CanonicalAutomorphism> {
        let unitaries = self
            .unitaries
            .iter()
            .zip(self.shape.dims())
            .map(|(entries, &n)| {
                if entries.len() != n * n {
                    return Err(Error::Format(format!("unitary needs {} entries, found {}", n * n, entries.len())));
                }
                let values = from_entries(entries);
                Ok(CMatrix::from_row_slice(n, n, &values))
            })
            .collect::<Result<Vec<_>>>()?;
        CanonicalAutomorphism::new(self.shape.clone(), self.perm.clone(), unitaries, self.tflags.clone())
    }
}

pub fn write_automorphism(a: &CanonicalAutomorphism) -> Result<String> {
    Ok(serde_json::to_string_pretty(&AutomorphismRecord::from(a))? + "\n")
}

pub fn read_automorphism(text: &str) -> Result<CanonicalAutomorphism> {
    let record: AutomorphismRecord = serde_json::from_str(text)?;
    if record.kind != "canonical" {
        return Err(Error::Format(format!("expected kind \"canonical\", found {:?}", record.kind)));
    }
    record.to_automorphism()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;
    use crate::superop::depolarizing_direction;
    use proptest::prelude::*;

    fn shape(d: &[usize]) -> TensorShape {
        TensorShape::new(d.to_vec()).unwrap()
    }

    #[test]
    fn number_format_has_17_digits() {
        assert_eq!(fmt_f64(1.0), "1.0000000000000000e0");
        assert_eq!(fmt_f64(-0.25), "-2.5000000000000000e-1");
        assert!(serde_json::from_str::<f64>(&fmt_f64(0.1)).unwrap() == 0.1);
    }

    #[test]
    fn hermitian_file_layout() {
        let text = write_hermitian(&HermitianOperator::basis_projector(2, 0)).unwrap();
        assert!(text.starts_with("{\"kind\":\"hermitian\",\"n\":2,\"entries\":["));
        assert_eq!(read_hermitian(&text).unwrap(), HermitianOperator::basis_projector(2, 0));
    }

    #[test]
    fn malformed_files_are_rejected() {
        let text = write_hermitian(&HermitianOperator::identity(2)).unwrap();
        assert!(matches!(read_hermitian(&text[..text.len() / 2]), Err(Error::Format(_))));
        assert!(read_hermitian(r#"{"kind":"hermitian","n":2,"entries":[[1,0]]}"#).is_err());
        assert!(read_hermitian(r#"{"kind":"superop","n":1,"entries":[[1,0]]}"#).is_err());
        assert!(read_hermitian(r#"{"kind":"hermitian","n":1,"entries":[[1,0]],"extra":1}"#).is_err());
        assert!(read_superop(r#"{"kind":"superop","shape":[2],"basis":"pauli","matrix":[]}"#).is_err());
        assert!(read_superop(r#"{"kind":"superop","shape":[1],"basis":"gm-v1","matrix":[[1]]}"#).is_err());
    }

    #[test]
    fn superop_round_trip_is_exact() {
        let s = shape(&[2, 2]);
        let l1 = depolarizing_direction(&s, 3);
        let back = read_superop(&write_superop(&l1).unwrap()).unwrap();
        assert_eq!(back, l1);
    }

    #[test]
    fn ensemble_round_trip() {
        let s = shape(&[2, 3]);
        let e = SeparableEnsemble::random(&s, 3, &mut rng::seeded(5));
        let back = read_ensemble(&write_ensemble(&e).unwrap()).unwrap();
        assert_eq!(back.weights(), e.weights());
        assert_eq!(back.points(), e.points());
    }

    #[test]
    fn automorphism_round_trip() {
        let s = shape(&[2, 3, 2]);
        let a = CanonicalAutomorphism::random(&s, &mut rng::seeded(6));
        assert_eq!(read_automorphism(&write_automorphism(&a).unwrap()).unwrap(), a);
    }

    proptest! {
        #[test]
        fn hermitian_round_trip_is_bit_exact(seed in any::<u64>(), n in 1usize..6) {
            let mut r = rng::seeded(seed);
            let m = CMatrix::from_fn(n, n, |_, _| crate::linalg::complex_gaussian(&mut r));
            let x = HermitianOperator::new((&m + m.adjoint()).scale(0.5)).unwrap();
            let back = read_hermitian(&write_hermitian(&x).unwrap()).unwrap();
            prop_assert_eq!(back, x);
        }

        #[test]
        fn f64_text_round_trip(x in any::<f64>().prop_filter("finite", |v| v.is_finite())) {
            let back: f64 = serde_json::from_str(&fmt_f64(x)).unwrap();
            prop_assert_eq!(back.to_bits(), x.to_bits());
        }
    }
}
