//! CSV sidecar format for the three detailed matrices.

use serde::de::DeserializeOwned;
use serde::Serialize;
use thiserror::Error;

use super::rows::{AutonomyRow, BenefitRow, MatrixKind, RiskRow};

pub const BENEFITS_HEADER: [&str; 5] = ["beneficiary", "kind", "likelihood", "impact", "confidence"];
pub const RISKS_HEADER: [&str; 5] = ["risk_bearer", "kind", "likelihood", "severity", "confidence"];
pub const AUTONOMY_HEADER: [&str; 6] = [
    "group",
    "coerces",
    "deceives",
    "not_reasons_responsive",
    "no_consent",
    "no_physical_control",
];

#[derive(Debug, Error)]
pub enum CsvError {
    #[error("{matrix} CSV header must be `{expected}`, found `{found}`")]
    Header {
        matrix: MatrixKind,
        expected: String,
        found: String,
    },
    #[error("{matrix} CSV line {line}: {message}")]
    Row {
        matrix: MatrixKind,
        line: u64,
        message: String,
    },
    #[error(transparent)]
    Csv(#[from] ::csv::Error),
}

pub fn header(kind: MatrixKind) -> &'static [&'static str] {
    match kind {
        MatrixKind::Benefits => &BENEFITS_HEADER,
        MatrixKind::Risks => &RISKS_HEADER,
        MatrixKind::Autonomy => &AUTONOMY_HEADER,
    }
}

fn read<T: DeserializeOwned>(kind: MatrixKind, text: &str) -> Result<Vec<T>, CsvError> {
    let mut reader = ::csv::ReaderBuilder::new()
        .trim(::csv::Trim::All)
        .from_reader(text.as_bytes());
    let found: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
    if found != header(kind) {
        return Err(CsvError::Header {
            matrix: kind,
            expected: header(kind).join(","),
            found: found.join(","),
        });
    }
    let mut out = Vec::new();
    for record in reader.deserialize() {
        match record {
            Ok(row) => out.push(row),
            Err(e) => {
                let line = e.position().map(|p| p.line()).unwrap_or(0);
                let message = match e.kind() {
                    ::csv::ErrorKind::Deserialize { err, .. } => err.to_string(),
                    other => format!("{other:?}"),
                };
                return Err(CsvError::Row {
                    matrix: kind,
                    line,
                    message,
                });
            }
        }
    }
    Ok(out)
}

fn write<T: Serialize>(kind: MatrixKind, rows: &[T]) -> String {
    let mut writer = ::csv::WriterBuilder::new()
        .has_headers(false)
        .terminator(::csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    writer
        .write_record(header(kind))
        .expect("writing to memory cannot fail");
    for row in rows {
        writer.serialize(row).expect("rows serialize to flat records");
    }
    String::from_utf8(writer.into_inner().expect("flush to memory")).expect("csv output is utf-8")
}

pub fn read_benefits(text: &str) -> Result<Vec<BenefitRow>, CsvError> {
    read(MatrixKind::Benefits, text)
}

pub fn read_risks(text: &str) -> Result<Vec<RiskRow>, CsvError> {
    read(MatrixKind::Risks, text)
}

pub fn read_autonomy(text: &str) -> Result<Vec<AutonomyRow>, CsvError> {
    read(MatrixKind::Autonomy, text)
}

pub fn write_benefits(rows: &[BenefitRow]) -> String {
    write(MatrixKind::Benefits, rows)
}

pub fn write_risks(rows: &[RiskRow]) -> String {
    write(MatrixKind::Risks, rows)
}

pub fn write_autonomy(rows: &[AutonomyRow]) -> String {
    write(MatrixKind::Autonomy, rows)
}
