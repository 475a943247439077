use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use csv::{ReaderBuilder, StringRecord, Trim, WriterBuilder};

use super::{PipelineError, Result};
use crate::trace::SignalTrace;

/// Column layouts accepted by [`ingest`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Schema {
    /// `frequency_mhz,delta_pl[,uncertainty]`
    Spectrum,
    /// `tau_us,delta_pl[,uncertainty]`
    Timetrace,
    /// `temperature_k,d_mhz[,uncertainty]` or `temperature_k,rate_per_ms[,uncertainty]`
    Calibration,
    /// `temperature_k,quantity,value,uncertainty`
    TemperatureSeries,
}

impl Schema {
    fn x_column(self) -> &'static str {
        match self {
            Schema::Spectrum => "frequency_mhz",
            Schema::Timetrace => "tau_us",
            Schema::Calibration | Schema::TemperatureSeries => "temperature_k",
        }
    }

    fn y_columns(self) -> &'static [&'static str] {
        match self {
            Schema::Spectrum | Schema::Timetrace => &["delta_pl"],
            Schema::Calibration => &["d_mhz", "rate_per_ms"],
            Schema::TemperatureSeries => &["quantity"],
        }
    }

    fn detect(header: &StringRecord) -> Option<Self> {
        let second = header.get(1).unwrap_or("");
        [Schema::Spectrum, Schema::Timetrace, Schema::Calibration, Schema::TemperatureSeries]
            .into_iter()
            .find(|s| header.get(0) == Some(s.x_column()) && s.y_columns().contains(&second))
    }
}

/// Quantities carried by a temperature series.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Quantity {
    /// Zero-field splitting, MHz.
    D,
    /// Ramsey dephasing time, µs.
    T2Star,
    /// Echo coherence time, µs.
    T2,
    /// Depolarisation time, µs.
    T1,
}

impl Quantity {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "D" => Some(Quantity::D),
            "T2star" | "T2*" => Some(Quantity::T2Star),
            "T2" => Some(Quantity::T2),
            "T1" => Some(Quantity::T1),
            _ => None,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Quantity::D => "D",
            Quantity::T2Star => "T2star",
            Quantity::T2 => "T2",
            Quantity::T1 => "T1",
        }
    }

    pub fn unit(self) -> &'static str {
        match self {
            Quantity::D => "d_mhz",
            Quantity::T2Star => "t2_star_us",
            Quantity::T2 => "t2_us",
            Quantity::T1 => "t1_us",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesRow {
    pub temperature: f64,
    pub quantity: Quantity,
    pub value: f64,
    /// Zero when unknown.
    pub uncertainty: f64,
}

/// Per-temperature measurements, sorted by temperature.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TemperatureSeries {
    rows: Vec<SeriesRow>,
}

impl TemperatureSeries {
    pub const TEMPERATURE_LIMITS_K: (f64, f64) = (1.0, 400.0);

    /// Validates and sorts `rows`.
    pub fn new(mut rows: Vec<SeriesRow>) -> std::result::Result<Self, String> {
        for r in &rows {
            let (lo, hi) = Self::TEMPERATURE_LIMITS_K;
            if !(r.temperature >= lo && r.temperature <= hi) {
                return Err(format!("temperature {} K outside [{lo}, {hi}] K", r.temperature));
            }
            if !(r.value > 0.0) || !r.value.is_finite() {
                return Err(format!("{} at {} K must be positive, got {}", r.quantity.label(), r.temperature, r.value));
            }
            if !(r.uncertainty >= 0.0) || !r.uncertainty.is_finite() {
                return Err(format!("uncertainty at {} K must be non-negative, got {}", r.temperature, r.uncertainty));
            }
        }
        rows.sort_by(|a, b| a.temperature.total_cmp(&b.temperature).then(a.quantity.cmp(&b.quantity)));
        if let Some(w) = rows.windows(2).find(|w| w[0].temperature == w[1].temperature && w[0].quantity == w[1].quantity) {
            return Err(format!("duplicate {} entry at {} K", w[0].quantity.label(), w[0].temperature));
        }
        Ok(Self { rows })
    }

    pub fn rows(&self) -> &[SeriesRow] {
        &self.rows
    }

    pub fn count(&self, quantity: Quantity) -> usize {
        self.rows.iter().filter(|r| r.quantity == quantity).count()
    }

    /// `(T, value)` trace for one quantity; uncertainties are attached when every row has one.
    pub fn trace(&self, quantity: Quantity) -> Option<SignalTrace> {
        let rows: Vec<&SeriesRow> = self.rows.iter().filter(|r| r.quantity == quantity).collect();
        if rows.is_empty() {
            return None;
        }
        let sigma = rows.iter().all(|r| r.uncertainty > 0.0).then(|| rows.iter().map(|r| r.uncertainty).collect());
        SignalTrace::new(
            rows.iter().map(|r| r.temperature).collect(),
            rows.iter().map(|r| r.value).collect(),
            sigma,
            "temperature_k",
            quantity.unit(),
        )
        .ok()
    }

    /// `1/T1` in 1/ms from the T1 rows (µs), with first-order error propagation.
    pub fn relaxation_rate_trace(&self) -> Option<SignalTrace> {
        let t1 = self.trace(Quantity::T1)?;
        let (x, y, s) = t1.into_parts();
        let rate: Vec<f64> = y.iter().map(|t| 1000.0 / t).collect();
        let sigma = s.map(|s| s.iter().zip(&y).map(|(e, t)| 1000.0 * e / (t * t)).collect());
        SignalTrace::new(x, rate, sigma, "temperature_k", "rate_per_ms").ok()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Ingested {
    Trace(SignalTrace),
    Series(TemperatureSeries),
}

/// `{:.16e}`: 17 significant digits, enough to round-trip any finite `f64`.
pub fn format_number(v: f64) -> String {
    format!("{v:.16e}")
}

fn read_file(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| PipelineError::io(path, e))
}

fn parse_error(path: &Path, line: u64, message: impl Into<String>) -> PipelineError {
    PipelineError::Parse { path: path.to_path_buf(), line, message: message.into() }
}

struct Table {
    header: StringRecord,
    header_line: u64,
    rows: Vec<(u64, StringRecord)>,
}

fn read_table(path: &Path, text: &str) -> Result<Table> {
    let mut reader = ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(Trim::All)
        .flexible(true)
        .from_reader(text.as_bytes());
    let header = reader
        .headers()
        .map_err(|e| parse_error(path, e.position().map_or(1, |p| p.line()), e.to_string()))?
        .clone();
    if header.is_empty() || header.iter().all(str::is_empty) {
        return Err(parse_error(path, 1, "missing header row"));
    }
    let header_line = text
        .lines()
        .position(|l| !l.trim().is_empty() && !l.starts_with('#'))
        .map_or(1, |i| i as u64 + 1);
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| parse_error(path, e.position().map_or(0, |p| p.line()), e.to_string()))?;
        let line = record.position().map_or(0, |p| p.line());
        if record.iter().all(str::is_empty) {
            continue;
        }
        if record.len() != header.len() {
            return Err(parse_error(path, line, format!("expected {} fields, found {}", header.len(), record.len())));
        }
        rows.push((line, record));
    }
    if rows.is_empty() {
        return Err(parse_error(path, header_line, "no data rows"));
    }
    Ok(Table { header, header_line, rows })
}

fn number(path: &Path, line: u64, column: &str, field: &str) -> Result<f64> {
    let v: f64 = field
        .parse()
        .map_err(|_| parse_error(path, line, format!("column `{column}`: `{field}` is not a number")))?;
    if !v.is_finite() {
        return Err(parse_error(path, line, format!("column `{column}`: value must be finite")));
    }
    Ok(v)
}

fn check_columns(path: &Path, table: &Table, schema: Schema) -> Result<()> {
    let h = &table.header;
    let line = table.header_line;
    if schema == Schema::TemperatureSeries {
        let expected = ["temperature_k", "quantity", "value", "uncertainty"];
        if h.iter().ne(expected) {
            return Err(parse_error(
                path,
                line,
                format!("expected header `{}`, found `{}`", expected.join(","), h.iter().collect::<Vec<_>>().join(",")),
            ));
        }
        return Ok(());
    }
    if h.get(0) != Some(schema.x_column()) {
        return Err(parse_error(
            path,
            line,
            format!("unit mismatch: expected abscissa column `{}`, found `{}`", schema.x_column(), h.get(0).unwrap_or("")),
        ));
    }
    let y = h.get(1).unwrap_or("");
    if !schema.y_columns().contains(&y) {
        return Err(parse_error(
            path,
            line,
            format!("unit mismatch: expected ordinate column `{}`, found `{y}`", schema.y_columns().join("` or `")),
        ));
    }
    match (h.len(), h.get(2)) {
        (2, _) | (3, Some("uncertainty")) => Ok(()),
        _ => Err(parse_error(path, line, "expected two columns plus an optional `uncertainty` column")),
    }
}

fn build_trace(path: &Path, table: &Table) -> Result<SignalTrace> {
    let h = &table.header;
    let with_sigma = h.len() == 3;
    let mut points = Vec::with_capacity(table.rows.len());
    for (line, rec) in &table.rows {
        let x = number(path, *line, &h[0], &rec[0])?;
        let y = number(path, *line, &h[1], &rec[1])?;
        let s = if with_sigma {
            let s = number(path, *line, "uncertainty", &rec[2])?;
            if s <= 0.0 {
                return Err(parse_error(path, *line, "uncertainty must be positive"));
            }
            Some(s)
        } else {
            None
        };
        points.push((x, y, s, *line));
    }
    points.sort_by(|a, b| a.0.total_cmp(&b.0));

    let mut duplicates = Vec::new();
    let mut i = 0;
    while i < points.len() {
        let mut j = i + 1;
        while j < points.len() && points[j].0 == points[i].0 {
            j += 1;
        }
        if j - i > 1 {
            let mut lines: Vec<u64> = points[i..j].iter().map(|p| p.3).collect();
            lines.sort_unstable();
            let lines: Vec<String> = lines.iter().map(u64::to_string).collect();
            duplicates.push((points[i].3, format!("{} (lines {})", points[i].0, lines.join(", "))));
        }
        i = j;
    }
    if !duplicates.is_empty() {
        let first = duplicates.iter().map(|d| d.0).min().unwrap_or(0);
        let list: Vec<String> = duplicates.into_iter().map(|d| d.1).collect();
        return Err(parse_error(path, first, format!("duplicate {} values: {}", &h[0], list.join("; "))));
    }

    let x = points.iter().map(|p| p.0).collect();
    let y = points.iter().map(|p| p.1).collect();
    let sigma = with_sigma.then(|| points.iter().map(|p| p.2.unwrap_or(1.0)).collect());
    Ok(SignalTrace::new(x, y, sigma, &h[0], &h[1])?)
}

fn build_series(path: &Path, table: &Table) -> Result<TemperatureSeries> {
    let mut rows = Vec::with_capacity(table.rows.len());
    for (line, rec) in &table.rows {
        let temperature = number(path, *line, "temperature_k", &rec[0])?;
        let quantity = Quantity::parse(&rec[1]).ok_or_else(|| {
            parse_error(path, *line, format!("unknown quantity `{}` (expected D, T2star, T2 or T1)", &rec[1]))
        })?;
        let value = number(path, *line, "value", &rec[2])?;
        let uncertainty = if rec[3].is_empty() { 0.0 } else { number(path, *line, "uncertainty", &rec[3])? };
        let row = SeriesRow { temperature, quantity, value, uncertainty };
        TemperatureSeries::new(vec![row]).map_err(|m| parse_error(path, *line, m))?;
        rows.push((*line, row));
    }
    TemperatureSeries::new(rows.iter().map(|r| r.1).collect()).map_err(|m| {
        // Only duplicates can fail here; point at the later of the two rows.
        let line = rows
            .iter()
            .filter(|(_, r)| rows.iter().filter(|(_, o)| o.temperature == r.temperature && o.quantity == r.quantity).count() > 1)
            .map(|r| r.0)
            .max()
            .unwrap_or(table.header_line);
        parse_error(path, line, m)
    })
}

/// Reads `path` under `schema`.
pub fn ingest(path: impl AsRef<Path>, schema: Schema) -> Result<Ingested> {
    let path = path.as_ref();
    let text = read_file(path)?;
    let table = read_table(path, &text)?;
    check_columns(path, &table, schema)?;
    Ok(match schema {
        Schema::TemperatureSeries => Ingested::Series(build_series(path, &table)?),
        _ => Ingested::Trace(build_trace(path, &table)?),
    })
}

pub fn ingest_trace(path: impl AsRef<Path>, schema: Schema) -> Result<SignalTrace> {
    match ingest(path, schema)? {
        Ingested::Trace(t) => Ok(t),
        Ingested::Series(_) => Err(PipelineError::Validation("expected a two-column trace".into())),
    }
}

pub fn ingest_series(path: impl AsRef<Path>) -> Result<TemperatureSeries> {
    match ingest(path, Schema::TemperatureSeries)? {
        Ingested::Series(s) => Ok(s),
        Ingested::Trace(_) => unreachable!("series schema yields a series"),
    }
}

/// Reads a file whose schema is inferred from its header row.
pub fn read_trace_auto(path: impl AsRef<Path>) -> Result<Ingested> {
    let path = path.as_ref();
    let text = read_file(path)?;
    let table = read_table(path, &text)?;
    let schema = Schema::detect(&table.header).ok_or_else(|| {
        parse_error(
            path,
            table.header_line,
            format!("unrecognised header `{}`", table.header.iter().collect::<Vec<_>>().join(",")),
        )
    })?;
    check_columns(path, &table, schema)?;
    Ok(match schema {
        Schema::TemperatureSeries => Ingested::Series(build_series(path, &table)?),
        _ => Ingested::Trace(build_trace(path, &table)?),
    })
}

fn comment_block(provenance: &[(String, String)]) -> String {
    let mut out = String::new();
    for (k, v) in provenance {
        let _ = writeln!(out, "# {k} = {v}");
    }
    out
}

fn render_csv(provenance: &[(String, String)], records: Vec<Vec<String>>) -> String {
    let mut out = comment_block(provenance);
    let mut w = WriterBuilder::new().from_writer(Vec::new());
    for rec in records {
        w.write_record(&rec).expect("writing to memory cannot fail");
    }
    let body = w.into_inner().expect("writing to memory cannot fail");
    out.push_str(&String::from_utf8(body).expect("csv output is utf-8"));
    out
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| PipelineError::io(path, e))
}

/// CSV text for `trace`, with `# key = value` provenance lines above the header.
pub fn render_trace(trace: &SignalTrace, provenance: &[(String, String)]) -> String {
    let mut records = Vec::with_capacity(trace.len() + 1);
    let mut header = vec![trace.x_unit.clone(), trace.y_unit.clone()];
    if trace.sigma_y().is_some() {
        header.push("uncertainty".into());
    }
    records.push(header);
    for i in 0..trace.len() {
        let mut rec = vec![format_number(trace.x()[i]), format_number(trace.y()[i])];
        if let Some(s) = trace.sigma_y() {
            rec.push(format_number(s[i]));
        }
        records.push(rec);
    }
    render_csv(provenance, records)
}

pub fn write_trace(path: impl AsRef<Path>, trace: &SignalTrace, provenance: &[(String, String)]) -> Result<()> {
    write_text(path.as_ref(), &render_trace(trace, provenance))
}

pub fn render_series(series: &TemperatureSeries, provenance: &[(String, String)]) -> String {
    let mut records = vec![vec!["temperature_k".into(), "quantity".into(), "value".into(), "uncertainty".into()]];
    for r in series.rows() {
        records.push(vec![
            format_number(r.temperature),
            r.quantity.label().into(),
            format_number(r.value),
            format_number(r.uncertainty),
        ]);
    }
    render_csv(provenance, records)
}

pub fn write_series(path: impl AsRef<Path>, series: &TemperatureSeries, provenance: &[(String, String)]) -> Result<()> {
    write_text(path.as_ref(), &render_series(series, provenance))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write(dir: &tempfile::TempDir, name: &str, body: &str) -> std::path::PathBuf {
        let p = dir.path().join(name);
        fs::write(&p, body).unwrap();
        p
    }

    #[test]
    fn spectrum_file() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(&dir, "s.csv", "# synthetic\nfrequency_mhz,delta_pl\n1000,-0.1\n1001,-0.2\n");
        let t = ingest_trace(&p, Schema::Spectrum).unwrap();
        assert_eq!(t.x(), &[1000.0, 1001.0]);
        assert_eq!(t.x_unit, "frequency_mhz");
    }

    #[test]
    fn shuffled_rows_sorted() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(&dir, "t.csv", "tau_us,delta_pl,uncertainty\n2,0.2,0.01\n0,0.0,0.02\n1,0.1,0.03\n");
        let t = ingest_trace(&p, Schema::Timetrace).unwrap();
        assert_eq!(t.x(), &[0.0, 1.0, 2.0]);
        assert_eq!(t.y(), &[0.0, 0.1, 0.2]);
        assert_eq!(t.sigma_y().unwrap(), &[0.02, 0.03, 0.01]);
    }

    #[test]
    fn duplicates_listed() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(&dir, "d.csv", "tau_us,delta_pl\n1,0\n2,0\n1,0.5\n3,0\n3,1\n");
        let err = ingest_trace(&p, Schema::Timetrace).unwrap_err().to_string();
        assert!(err.contains("lines 2, 4"), "{err}");
        assert!(err.contains("lines 5, 6"), "{err}");
    }

    #[test]
    fn malformed_row_reports_line() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(&dir, "m.csv", "# c\ntau_us,delta_pl\n1,0\n2,abc\n");
        match ingest_trace(&p, Schema::Timetrace) {
            Err(PipelineError::Parse { line, .. }) => assert_eq!(line, 4),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unit_mismatch() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(&dir, "u.csv", "tau_us,delta_pl\n1,0\n");
        let err = ingest_trace(&p, Schema::Spectrum).unwrap_err().to_string();
        assert!(err.contains("unit mismatch"), "{err}");
    }

    #[test]
    fn series_parsing_and_validation() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(
            &dir,
            "series.csv",
            "temperature_k,quantity,value,uncertainty\n300,D,1351.6,0.1\n5,T2*,1.2,0.1\n5,D,1364.7,\n",
        );
        let s = ingest_series(&p).unwrap();
        assert_eq!(s.rows()[0].quantity, Quantity::D);
        assert_eq!(s.rows()[0].temperature, 5.0);
        assert_eq!(s.count(Quantity::D), 2);
        assert!(s.trace(Quantity::D).unwrap().sigma_y().is_none());

        let bad = write(&dir, "bad.csv", "temperature_k,quantity,value,uncertainty\n500,D,1351.6,0.1\n");
        assert!(ingest_series(&bad).is_err());
        let dup = write(&dir, "dup.csv", "temperature_k,quantity,value,uncertainty\n5,D,1,0\n6,D,1,0\n5,D,2,0\n");
        match ingest_series(&dup) {
            Err(PipelineError::Parse { line, .. }) => assert_eq!(line, 4),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn round_trip_exact() {
        let dir = tempfile::tempdir().unwrap();
        let x = vec![1e-300, 0.1, 1.0 / 3.0, 2.0f64.sqrt(), 12345.678901234567];
        let y = vec![-0.0, f64::MIN_POSITIVE, -1.0 / 7.0, f64::MAX, 5e-324];
        let t = SignalTrace::new(x, y, None, "tau_us", "delta_pl").unwrap();
        let p = dir.path().join("rt.csv");
        write_trace(&p, &t, &[("seed".into(), "1".into())]).unwrap();
        assert_eq!(ingest_trace(&p, Schema::Timetrace).unwrap(), t);
        assert!(matches!(read_trace_auto(&p).unwrap(), Ingested::Trace(_)));
    }

    #[test]
    fn missing_file_is_io() {
        let err = ingest_trace("/nonexistent/x.csv", Schema::Timetrace).unwrap_err();
        assert_eq!(err.exit_code(), super::super::exit_code::IO);
    }
}
