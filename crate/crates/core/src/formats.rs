//! CSV schemas for datasets and chains.
//!
//! Numbers are written in Rust's shortest round-tripping decimal form, which
//! is locale independent, so write -> read -> write reproduces the bytes.

use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::simulators::ParamVector;

/// Chain id used for rejection-ABC samples.
pub const ABC_CHAIN_ID: &str = "abc";

fn csv_error(e: csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line());
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        kind => Error::Parse {
            line,
            message: format!("{kind:?}"),
        },
    }
}

fn parse_f64(field: &str, line: u64, column: &str) -> Result<f64> {
    field.trim().parse::<f64>().map_err(|_| Error::Parse {
        line,
        message: format!("column `{column}`: `{field}` is not a number"),
    })
}

fn theta_header(dim: usize) -> impl Iterator<Item = String> {
    (0..dim).map(|i| format!("theta_{i}"))
}

fn expect_theta_columns(names: &[&str]) -> Result<usize> {
    for (i, name) in names.iter().enumerate() {
        if *name != format!("theta_{i}") {
            return Err(Error::Parse {
                line: 1,
                message: format!("expected column `theta_{i}`, found `{name}`"),
            });
        }
    }
    if names.is_empty() {
        return Err(Error::Parse {
            line: 1,
            message: "no theta columns".into(),
        });
    }
    Ok(names.len())
}

/// Header `theta_0,...,theta_{d-1},eps`; raw values, one record per line.
pub fn write_dataset_csv<'a>(out: impl Write, records: impl IntoIterator<Item = (&'a [f64], f64)>) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut records = records.into_iter().peekable();
    let dim = records.peek().map_or(0, |(t, _)| t.len());
    w.write_record(theta_header(dim).chain(["eps".to_string()])).map_err(csv_error)?;
    for (theta, eps) in records {
        if theta.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: theta.len(),
            });
        }
        w.write_record(theta.iter().chain([&eps]).map(f64::to_string)).map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_dataset_csv(input: impl Read) -> Result<Vec<(ParamVector, f64)>> {
    let mut r = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
    let headers = r.headers().map_err(csv_error)?.clone();
    let names: Vec<&str> = headers.iter().collect();
    match names.split_last() {
        Some((&"eps", thetas)) => expect_theta_columns(thetas)?,
        _ => {
            return Err(Error::Parse {
                line: 1,
                message: "dataset header must end with `eps`".into(),
            })
        }
    };
    let mut out = Vec::new();
    for record in r.records() {
        let record = record.map_err(csv_error)?;
        let line = record.position().map_or(0, |p| p.line());
        let mut values = record
            .iter()
            .zip(&names)
            .map(|(f, c)| parse_f64(f, line, c))
            .collect::<Result<Vec<_>>>()?;
        let eps = values.pop().expect("header has an eps column");
        if eps.is_nan() || eps < 0.0 {
            return Err(Error::Parse {
                line,
                message: format!("negative error {eps}"),
            });
        }
        let theta = ParamVector::new(values).map_err(|e| Error::Parse {
            line,
            message: e.to_string(),
        })?;
        out.push((theta, eps));
    }
    Ok(out)
}

/// One row of a chain file.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainRow {
    pub chain_id: String,
    pub step: u64,
    pub theta: Vec<f64>,
}

/// Header `chain_id,step,theta_0,...,theta_{d-1}`.
pub fn write_chain_csv<'a>(out: impl Write, dim: usize, rows: impl IntoIterator<Item = (&'a str, u64, &'a [f64])>) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["chain_id".to_string(), "step".to_string()].into_iter().chain(theta_header(dim)))
        .map_err(csv_error)?;
    for (id, step, theta) in rows {
        if theta.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: theta.len(),
            });
        }
        w.write_record([id.to_string(), step.to_string()].into_iter().chain(theta.iter().map(f64::to_string)))
            .map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a chain file; returns the parameter dimension and all rows.
pub fn read_chain_csv(input: impl Read) -> Result<(usize, Vec<ChainRow>)> {
    let mut r = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
    let headers = r.headers().map_err(csv_error)?.clone();
    let names: Vec<&str> = headers.iter().collect();
    let dim = match names.as_slice() {
        ["chain_id", "step", thetas @ ..] => expect_theta_columns(thetas)?,
        _ => {
            return Err(Error::Parse {
                line: 1,
                message: "chain header must start with `chain_id,step`".into(),
            })
        }
    };
    let mut rows = Vec::new();
    for record in r.records() {
        let record = record.map_err(csv_error)?;
        let line = record.position().map_or(0, |p| p.line());
        let step = record[1].trim().parse::<u64>().map_err(|_| Error::Parse {
            line,
            message: format!("column `step`: `{}` is not a non-negative integer", &record[1]),
        })?;
        let theta = record
            .iter()
            .zip(&names)
            .skip(2)
            .map(|(f, c)| parse_f64(f, line, c))
            .collect::<Result<Vec<_>>>()?;
        rows.push(ChainRow {
            chain_id: record[0].to_string(),
            step,
            theta,
        });
    }
    Ok((dim, rows))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn dataset_round_trip_bytes() {
        let records = [(vec![0.1, -0.25, 1.0 / 3.0], 12.0), (vec![1e-9, 0.0, 0.9999], 0.0)];
        let mut first = Vec::new();
        write_dataset_csv(&mut first, records.iter().map(|(t, e)| (t.as_slice(), *e))).unwrap();
        let text = String::from_utf8(first.clone()).unwrap();
        assert!(text.starts_with("theta_0,theta_1,theta_2,eps\n"));
        let back = read_dataset_csv(first.as_slice()).unwrap();
        assert_eq!(back.len(), 2);
        assert_eq!(&back[0].0[..], &records[0].0[..]);
        let mut second = Vec::new();
        write_dataset_csv(&mut second, back.iter().map(|(t, e)| (&t[..], *e))).unwrap();
        assert_eq!(first, second);
    }

    #[test]
    fn malformed_dataset_reports_line() {
        let text = "theta_0,eps\n0.5,1\n0.25,oops\n";
        match read_dataset_csv(text.as_bytes()) {
            Err(Error::Parse { line, message }) => {
                assert_eq!(line, 3);
                assert!(message.contains("eps"));
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(read_dataset_csv("x,eps\n1,2\n".as_bytes()).is_err());
        assert!(read_dataset_csv("theta_0,eps\n1,2,3\n".as_bytes()).is_err());
        assert!(read_dataset_csv("theta_0,eps\n1,-2\n".as_bytes()).is_err());
    }

    #[test]
    fn chain_schema() {
        let a = [0.5, 0.25];
        let b = [0.75, -1.0];
        let mut bytes = Vec::new();
        write_chain_csv(&mut bytes, 2, [("0", 0, &a[..]), ("abc", 1, &b[..])]).unwrap();
        assert_eq!(
            String::from_utf8(bytes.clone()).unwrap(),
            "chain_id,step,theta_0,theta_1\n0,0,0.5,0.25\nabc,1,0.75,-1\n"
        );
        let (dim, rows) = read_chain_csv(bytes.as_slice()).unwrap();
        assert_eq!(dim, 2);
        assert_eq!(rows[1].chain_id, "abc");
        assert_eq!(rows[1].theta, b);
        assert!(matches!(
            read_chain_csv("chain_id,step,theta_0\n0,x,1\n".as_bytes()),
            Err(Error::Parse { line: 2, .. })
        ));
    }

    proptest! {
        #[test]
        fn chain_file_round_trips(values in prop::collection::vec(-1e6f64..1e6, 3..60)) {
            let dim = 3;
            let rows: Vec<&[f64]> = values.chunks_exact(dim).collect();
            let mut first = Vec::new();
            write_chain_csv(&mut first, dim, rows.iter().enumerate().map(|(i, t)| ("0", i as u64, *t))).unwrap();
            let (_, parsed) = read_chain_csv(first.as_slice()).unwrap();
            for (p, t) in parsed.iter().zip(&rows) {
                prop_assert_eq!(&p.theta[..], *t);
            }
            let mut second = Vec::new();
            write_chain_csv(&mut second, dim, parsed.iter().map(|r| (r.chain_id.as_str(), r.step, &r.theta[..]))).unwrap();
            prop_assert_eq!(first, second);
        }
    }
}
