//! Long-format panel CSV (`unit,time,value`) and fixed-precision number
//! formatting for emitted artifacts.

use std::collections::HashMap;
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::panel::PanelDataset;

/// Required header of a panel CSV file.
pub const PANEL_HEADER: [&str; 3] = ["unit", "time", "value"];

/// Significant digits of every emitted floating-point number.
pub const SIGNIFICANT_DIGITS: usize = 9;

/// Round `x` to [`SIGNIFICANT_DIGITS`] significant digits.
pub fn round_sig(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x)
        .parse()
        .expect("formatted floats parse")
}

/// Shortest decimal text of `x` rounded to [`SIGNIFICANT_DIGITS`]
/// significant digits.
pub fn format_sig(x: f64) -> String {
    format!("{:?}", round_sig(x))
}

fn parse_error(line: u64, message: impl Into<String>) -> Error {
    Error::Parse {
        line: line as usize,
        message: message.into(),
    }
}

fn csv_error(e: csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line());
    match e.kind() {
        csv::ErrorKind::Io(io) => Error::Io(io.to_string()),
        _ => parse_error(line, e.to_string()),
    }
}

/// Parse a panel from long-format CSV text.
///
/// Units keep their order of first appearance; rows may come in any order.
/// Every unit must cover the same contiguous times `0..=T`.
pub fn parse_panel<R: Read>(reader: R) -> Result<PanelDataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut records = rdr.records();
    let header = match records.next() {
        Some(r) => r.map_err(csv_error)?,
        None => return Err(parse_error(1, "empty file; expected header 'unit,time,value'")),
    };
    if header.iter().ne(PANEL_HEADER.iter().copied()) {
        return Err(parse_error(1, "header must be exactly 'unit,time,value'"));
    }

    let mut order: Vec<String> = Vec::new();
    let mut cells: HashMap<String, HashMap<u64, f64>> = HashMap::new();
    let mut max_time = 0u64;
    for record in records {
        let record = record.map_err(csv_error)?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() != 3 {
            return Err(parse_error(line, format!("expected 3 fields, found {}", record.len())));
        }
        let unit = record[0].to_string();
        if unit.is_empty() {
            return Err(parse_error(line, "empty unit id"));
        }
        let time: u64 = record[1]
            .parse()
            .map_err(|_| parse_error(line, format!("time '{}' is not a non-negative integer", &record[1])))?;
        let value: f64 = record[2]
            .parse()
            .map_err(|_| parse_error(line, format!("value '{}' is not a number", &record[2])))?;
        if !value.is_finite() {
            return Err(parse_error(line, format!("value '{}' is not finite", &record[2])));
        }
        let series = cells.entry(unit.clone()).or_insert_with(|| {
            order.push(unit.clone());
            HashMap::new()
        });
        if series.insert(time, value).is_some() {
            return Err(Error::DuplicateCell { unit, time, line: line as usize });
        }
        max_time = max_time.max(time);
    }
    if order.is_empty() {
        return Err(parse_error(2, "no data rows"));
    }
    let values = order
        .iter()
        .map(|unit| {
            let series = &cells[unit];
            (0..=max_time)
                .map(|t| {
                    series.get(&t).copied().ok_or_else(|| Error::RaggedPanel {
                        unit: unit.clone(),
                        time: t,
                    })
                })
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    PanelDataset::new(order, values)
}

/// Read a panel CSV file.
pub fn read_panel(path: impl AsRef<Path>) -> Result<PanelDataset> {
    parse_panel(File::open(path)?)
}

/// Write `panel` as long-format CSV, units in panel order and times
/// ascending, values with [`SIGNIFICANT_DIGITS`] significant digits.
pub fn write_panel_to<W: Write>(panel: &PanelDataset, writer: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(PANEL_HEADER).map_err(csv_error)?;
    for (unit, series) in panel.units().iter().zip(panel.all_series()) {
        for (t, v) in series.iter().enumerate() {
            wtr.write_record([unit.as_str(), &t.to_string(), &format_sig(*v)])
                .map_err(csv_error)?;
        }
    }
    wtr.flush()?;
    Ok(())
}

/// Write a panel CSV file.
pub fn write_panel(panel: &PanelDataset, path: impl AsRef<Path>) -> Result<()> {
    write_panel_to(panel, File::create(path)?)
}
