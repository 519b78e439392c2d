//! Sample files: a header `x1,...,xd,y`, then one point per line with
//! unit-cube coordinates to 4 decimals and values to 12 significant digits.

use std::io::{Read, Write};
use std::path::Path;

use pwtame_core::functions::{SampleSet, ScaleTransform};

use crate::error::{read_file, write_file, Error, Result};

/// `v` rounded to 12 significant digits, printed in its shortest form.
pub fn format_value(v: f64) -> String {
    let rounded: f64 = format!("{v:.11e}").parse().expect("formatted float parses");
    format!("{rounded}")
}

pub fn write_samples<W: Write>(out: W, samples: &SampleSet) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<String> = (1..=samples.dim()).map(|j| format!("x{j}")).collect();
    header.push("y".into());
    w.write_record(&header)?;
    for i in 0..samples.len() {
        let mut record: Vec<String> = samples.point(i).iter().map(|u| format!("{u:.4}")).collect();
        record.push(format_value(samples.value(i)));
        w.write_record(&record)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a sample file. Files carry no provenance, so the result has seed 0
/// and the identity transform on the unit cube.
pub fn read_samples<R: Read>(input: R) -> Result<SampleSet> {
    let mut r = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    let header = r.headers()?.clone();
    let dim = header.len().saturating_sub(1);
    let expected = (1..=dim).map(|j| format!("x{j}")).chain(["y".to_string()]);
    if dim == 0 || !header.iter().eq(expected) {
        return Err(Error::parse(1, format!("expected header x1,...,xd,y, got `{}`", header.iter().collect::<Vec<_>>().join(","))));
    }
    let mut points = Vec::new();
    let mut values = Vec::new();
    for (k, record) in r.records().enumerate() {
        let record = record?;
        let line = k + 2;
        if record.len() != dim + 1 {
            return Err(Error::parse(line, format!("expected {} fields, got {}", dim + 1, record.len())));
        }
        for (j, field) in record.iter().enumerate() {
            let v: f64 = field.parse().map_err(|_| Error::parse(line, format!("`{field}` is not a number")))?;
            if j < dim {
                points.push(v);
            } else {
                values.push(v);
            }
        }
    }
    if values.is_empty() {
        return Err(Error::Core(pwtame_core::Error::EmptySample));
    }
    Ok(SampleSet::new(dim, points, values, 0, ScaleTransform::unit(dim))?)
}

pub fn save_samples(path: &Path, samples: &SampleSet) -> Result<()> {
    let mut buf = Vec::new();
    write_samples(&mut buf, samples)?;
    write_file(path, &String::from_utf8(buf).expect("csv output is utf-8"))
}

pub fn load_samples(path: &Path) -> Result<SampleSet> {
    read_samples(read_file(path)?.as_bytes())
}
