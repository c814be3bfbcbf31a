//! Dataset CSV: header `user_id,bit_0,...,bit_{d-1}`, one row per user,
//! bits as literal `0`/`1`.

use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::sketch::{Dataset, UserRecord};

fn csv_err(e: csv::Error) -> Error {
    match e.kind() {
        csv::ErrorKind::Io(_) => Error::Io(e.to_string()),
        _ => Error::Format(e.to_string()),
    }
}

pub fn write_dataset<W: Write>(dataset: &Dataset, out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new().from_writer(out);
    let mut header = vec!["user_id".to_string()];
    header.extend((0..dataset.dim()).map(|i| format!("bit_{i}")));
    w.write_record(&header).map_err(csv_err)?;
    for r in dataset.records() {
        let mut row = Vec::with_capacity(r.dim() + 1);
        row.push(r.user_id());
        row.extend(r.bits().iter().map(|&b| if b == 1 { "1" } else { "0" }));
        w.write_record(&row).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

pub fn dataset_to_bytes(dataset: &Dataset) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    write_dataset(dataset, &mut buf)?;
    Ok(buf)
}

pub fn read_dataset<R: Read>(input: R) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(false).from_reader(input);
    let mut rows = rdr.records();
    let header = rows
        .next()
        .ok_or_else(|| Error::Format("dataset file is empty".into()))?
        .map_err(csv_err)?;
    if header.get(0) != Some("user_id") {
        return Err(Error::Format("dataset header must start with `user_id`".into()));
    }
    let d = header.len() - 1;
    for (i, name) in header.iter().skip(1).enumerate() {
        if name != format!("bit_{i}") {
            return Err(Error::Format(format!("unexpected header column `{name}`")));
        }
    }
    if d == 0 {
        return Err(Error::Format("dataset has no attribute columns".into()));
    }
    let mut records = Vec::new();
    for (line, row) in rows.enumerate() {
        let row = row.map_err(csv_err)?;
        if row.len() != d + 1 {
            return Err(Error::Format(format!(
                "row {} has {} fields, expected {}",
                line + 2,
                row.len(),
                d + 1
            )));
        }
        let bits = row
            .iter()
            .skip(1)
            .map(|f| match f {
                "0" => Ok(0u8),
                "1" => Ok(1u8),
                other => Err(Error::Format(format!(
                    "row {}: attribute value `{other}` is not 0 or 1",
                    line + 2
                ))),
            })
            .collect::<Result<Vec<u8>>>()?;
        records.push(UserRecord::new(&row[0], bits)?);
    }
    Dataset::new(d, records).map_err(|e| Error::Format(e.to_string()))
}

/// Ground-truth labels: header `user_id,label`.
pub fn write_labels<W: Write>(user_ids: &[&str], labels: &[usize], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["user_id", "label"]).map_err(csv_err)?;
    for (id, label) in user_ids.iter().zip(labels) {
        w.write_record([*id, &label.to_string()]).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_labels<R: Read>(input: R) -> Result<Vec<(String, usize)>> {
    let mut rdr = csv::Reader::from_reader(input);
    let header = rdr.headers().map_err(csv_err)?;
    if header.iter().collect::<Vec<_>>() != ["user_id", "label"] {
        return Err(Error::Format("labels header must be `user_id,label`".into()));
    }
    rdr.records()
        .map(|row| {
            let row = row.map_err(csv_err)?;
            let label = row[1]
                .parse()
                .map_err(|_| Error::Format(format!("bad label `{}`", &row[1])))?;
            Ok((row[0].to_string(), label))
        })
        .collect()
}
