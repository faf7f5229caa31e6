use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::classify::Method;
use super::sample::{SampleClass, TubeSample, TubeSampleSet};
use super::spec::TubeKind;
use crate::error::{Error, Result};
use crate::point::Point;

fn malformed(e: impl std::fmt::Display) -> Error {
    Error::MalformedSamples(e.to_string())
}

fn class_name(c: SampleClass) -> &'static str {
    match c {
        SampleClass::Regular => "regular",
        SampleClass::Critical => "critical",
    }
}

/// Writes one row per sample: `x0,…,x{n-1},residual,grad_norm,class`.
pub fn write_samples_csv<W: Write>(set: &TubeSampleSet, out: W) -> Result<()> {
    let n = set.samples.first().map_or(0, |s| s.point.dim());
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<String> = (0..n).map(|i| format!("x{i}")).collect();
    header.extend(["residual", "grad_norm", "class"].map(String::from));
    w.write_record(&header).map_err(malformed)?;
    for s in &set.samples {
        let mut row: Vec<String> = s.point.coords().iter().map(|c| format!("{c:.16e}")).collect();
        row.push(format!("{:.16e}", s.residual));
        row.push(format!("{:.16e}", s.grad_norm));
        row.push(class_name(s.class).into());
        w.write_record(&row).map_err(malformed)?;
    }
    w.flush().map_err(malformed)
}

pub fn read_samples_csv<R: Read>(input: R) -> Result<Vec<TubeSample>> {
    let mut r = csv::Reader::from_reader(input);
    let width = r.headers().map_err(malformed)?.len();
    if width < 4 {
        return Err(malformed(format!("expected at least 4 columns, got {width}")));
    }
    let n = width - 3;
    let mut samples = Vec::new();
    for (line, record) in r.records().enumerate() {
        let record = record.map_err(malformed)?;
        let num = |i: usize| -> Result<f64> {
            record[i]
                .trim()
                .parse()
                .map_err(|e| malformed(format!("row {}, column {i}: {e}", line + 1)))
        };
        let coords = (0..n).map(num).collect::<Result<Vec<_>>>()?;
        let class = match record[n + 2].trim() {
            "regular" => SampleClass::Regular,
            "critical" => SampleClass::Critical,
            other => return Err(malformed(format!("row {}: unknown class {other:?}", line + 1))),
        };
        samples.push(TubeSample {
            point: Point::new(coords)?,
            residual: num(n)?,
            grad_norm: num(n + 1)?,
            class,
        });
    }
    Ok(samples)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleCounts {
    pub seeds: usize,
    pub samples: usize,
    pub regular: usize,
    pub critical: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub membership: f64,
    pub gradient: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TubeSummary {
    pub kind: TubeKind,
    pub dimension: usize,
    pub method: Method,
    pub counts: SampleCounts,
    pub tolerances: Tolerances,
}

impl From<&TubeSampleSet> for TubeSummary {
    fn from(set: &TubeSampleSet) -> Self {
        Self {
            kind: set.kind,
            dimension: set.local_dimension,
            method: set.method,
            counts: SampleCounts {
                seeds: set.seeds,
                samples: set.samples.len(),
                regular: set.count(SampleClass::Regular),
                critical: set.count(SampleClass::Critical),
            },
            tolerances: Tolerances {
                membership: set.tol,
                gradient: set.grad_tol,
            },
        }
    }
}

/// Writes the coordinate pairs `(x_i, x_j)` of every sample, one row per
/// sample and pair.
pub fn write_projections_csv<W: Write>(set: &TubeSampleSet, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["i", "j", "u", "v"]).map_err(malformed)?;
    for s in &set.samples {
        let c = s.point.coords();
        for i in 0..c.len() {
            for j in i + 1..c.len() {
                w.write_record([
                    i.to_string(),
                    j.to_string(),
                    format!("{:.16e}", c[i]),
                    format!("{:.16e}", c[j]),
                ])
                .map_err(malformed)?;
            }
        }
    }
    w.flush().map_err(malformed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pt;

    fn set() -> TubeSampleSet {
        TubeSampleSet {
            kind: TubeKind::TubeThroughOrigin,
            samples: vec![
                TubeSample {
                    point: pt![0.1, -2.5, 1.0 / 3.0],
                    residual: 1e-17,
                    grad_norm: 0.0,
                    class: SampleClass::Critical,
                },
                TubeSample {
                    point: pt![1, 2, 3],
                    residual: 0.0,
                    grad_norm: 2.0,
                    class: SampleClass::Regular,
                },
            ],
            local_dimension: 1,
            method: Method::HessianNullity,
            seeds: 10,
            tol: 1e-10,
            grad_tol: 1e-6,
        }
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let s = set();
        let mut buf = Vec::new();
        write_samples_csv(&s, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("x0,x1,x2,residual,grad_norm,class\n"));
        assert_eq!(read_samples_csv(buf.as_slice()).unwrap(), s.samples);
    }

    #[test]
    fn rejects_bad_rows() {
        let bad = "x0,residual,grad_norm,class\n1.0,0,0,weird\n";
        assert!(matches!(
            read_samples_csv(bad.as_bytes()),
            Err(Error::MalformedSamples(_))
        ));
        let bad = "x0,residual,grad_norm,class\nabc,0,0,regular\n";
        assert!(read_samples_csv(bad.as_bytes()).is_err());
    }

    #[test]
    fn summary_counts() {
        let s = TubeSummary::from(&set());
        assert_eq!(s.counts.regular, 1);
        assert_eq!(s.counts.critical, 1);
        let json = serde_json::to_value(&s).unwrap();
        assert_eq!(json["kind"], "tube-through-origin");
        assert_eq!(json["tolerances"]["membership"], 1e-10);
    }

    #[test]
    fn projections_cover_pairs() {
        let mut buf = Vec::new();
        write_projections_csv(&set(), &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 1 + 2 * 3);
    }
}
