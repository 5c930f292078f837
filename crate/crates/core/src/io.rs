//! Waveform CSV files and analysis output records.
//!
//! Waveforms use a `t,v1,..,vn` header and one sample per row. Numbers are
//! written with 17 significant digits so that a write/read cycle is exact.

use std::fs::File;
use std::io::{BufReader, Read, Write};
use std::path::Path;

use serde::Serialize;

use crate::curves::SampledSignal;
use crate::darboux::{AveragedBivector, GeomFreqSample};
use crate::error::{Error, Result};
use crate::ga::{BivecN, VecN};

/// `x` with 17 significant digits.
pub fn format_f64(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn parse_waveform_csv(path: &Path) -> Result<SampledSignal> {
    let file = File::open(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    read_waveform(BufReader::new(file))
}

fn check_header(fields: &[&str]) -> Result<()> {
    let bad = |msg: String| Err(Error::Format { line: 1, msg });
    if fields.len() < 3 {
        return bad(format!(
            "expected `t,v1,..,vn` with at least two phases, got {} columns",
            fields.len()
        ));
    }
    if fields[0] != "t" {
        return bad(format!("first column must be `t`, got `{}`", fields[0]));
    }
    for (i, name) in fields.iter().enumerate().skip(1) {
        if *name != format!("v{i}") {
            return bad(format!("column {} must be `v{i}`, got `{name}`", i + 1));
        }
    }
    Ok(())
}

pub fn read_waveform<R: Read>(reader: R) -> Result<SampledSignal> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut records = rdr.records();
    let header = match records.next() {
        None => {
            return Err(Error::Format {
                line: 1,
                msg: "empty file".into(),
            })
        }
        Some(r) => r.map_err(|e| Error::Format {
            line: 1,
            msg: e.to_string(),
        })?,
    };
    check_header(&header.iter().collect::<Vec<_>>())?;
    let width = header.len();

    let mut times = Vec::new();
    let mut values = Vec::new();
    for record in records {
        let record = record.map_err(|e| Error::Data {
            line: e.position().map_or(0, |p| p.line() as usize),
            msg: e.to_string(),
        })?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        if record.len() == 1 && record[0].is_empty() {
            continue;
        }
        if record.len() != width {
            return Err(Error::Data {
                line,
                msg: format!("expected {width} fields, got {}", record.len()),
            });
        }
        let mut row = Vec::with_capacity(width);
        for field in record.iter() {
            let x: f64 = field.parse().map_err(|_| Error::Data {
                line,
                msg: format!("not a number: `{field}`"),
            })?;
            if !x.is_finite() {
                return Err(Error::Data {
                    line,
                    msg: format!("non-finite value `{field}`"),
                });
            }
            row.push(x);
        }
        if let Some(&prev) = times.last() {
            if row[0] <= prev {
                return Err(Error::Data {
                    line,
                    msg: format!("time {} does not increase (previous {prev})", row[0]),
                });
            }
        }
        times.push(row[0]);
        values.push(VecN::new(row.split_off(1))?);
    }
    if times.is_empty() {
        return Err(Error::Data {
            line: 2,
            msg: "no samples".into(),
        });
    }
    SampledSignal::new(times, values)
}

pub fn write_waveform<W: Write>(writer: W, signal: &SampledSignal) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(writer);
    let mut header = vec!["t".to_string()];
    header.extend((1..=signal.dim()).map(|i| format!("v{i}")));
    w.write_record(&header).map_err(csv_error)?;
    for (t, v) in signal.times().iter().zip(signal.values()) {
        let row = std::iter::once(*t)
            .chain(v.comps().iter().copied())
            .map(format_f64);
        w.write_record(row).map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

fn csv_error(e: csv::Error) -> Error {
    Error::Io(e.to_string())
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct Component {
    pub label: String,
    pub value: f64,
}

fn components(b: &BivecN) -> Vec<Component> {
    b.labeled()
        .map(|(label, value)| Component { label, value })
        .collect()
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct SampleRecord {
    pub t: f64,
    pub s_prime: Option<f64>,
    pub k: Vec<f64>,
    pub omega1_norm: Option<f64>,
    pub omega_components: Vec<Component>,
    pub flags: Vec<String>,
}

impl SampleRecord {
    pub fn from_sample(sample: &GeomFreqSample) -> Self {
        let flags = sample.flags().into_iter().map(String::from).collect();
        match &sample.outcome {
            Ok(s) => Self {
                t: sample.t,
                s_prime: Some(s.frame.speed),
                k: s.frame.k.clone(),
                omega1_norm: Some(s.darboux.omega1_norm),
                omega_components: components(&s.darboux.omega),
                flags,
            },
            Err(_) => Self {
                t: sample.t,
                s_prime: None,
                k: Vec::new(),
                omega1_norm: None,
                omega_components: Vec::new(),
                flags,
            },
        }
    }
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct AverageRecord {
    pub window: [f64; 2],
    pub steps: usize,
    pub mean_norm: f64,
    pub mean_components: Vec<Component>,
}

impl From<&AveragedBivector> for AverageRecord {
    fn from(a: &AveragedBivector) -> Self {
        Self {
            window: [a.window.0, a.window.1],
            steps: a.steps,
            mean_norm: a.mean_norm,
            mean_components: components(&a.mean),
        }
    }
}

/// Echo of the analysis settings plus summary figures.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct Metadata {
    pub version: String,
    pub input: String,
    pub phases: usize,
    pub orthogonalizer: String,
    pub max_order: usize,
    pub smoothing: f64,
    /// Samples dropped at each end of the input before analysis.
    pub trimmed_per_side: usize,
    pub analyzed_span: [f64; 2],
    pub samples: usize,
    pub flagged: usize,
    /// Mean of `‖Ω_1‖` over regular samples, rad/s.
    pub mean_omega1_norm: Option<f64>,
    /// `mean_omega1_norm / 2π`.
    pub geometric_frequency_hz: Option<f64>,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
#[serde(tag = "record", rename_all = "snake_case")]
pub enum OutputRecord {
    Sample(SampleRecord),
    Average(AverageRecord),
    Metadata(Metadata),
}

/// Full analysis output: samples, an optional average, then the metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalysisOutput {
    pub samples: Vec<SampleRecord>,
    pub average: Option<AverageRecord>,
    pub metadata: Metadata,
}

impl AnalysisOutput {
    pub fn write_json<W: Write>(&self, mut writer: W) -> Result<()> {
        let mut records: Vec<OutputRecord> = self
            .samples
            .iter()
            .cloned()
            .map(OutputRecord::Sample)
            .collect();
        records.extend(self.average.clone().map(OutputRecord::Average));
        records.push(OutputRecord::Metadata(self.metadata.clone()));
        serde_json::to_writer_pretty(&mut writer, &records)
            .map_err(|e| Error::Io(e.to_string()))?;
        writer.write_all(b"\n")?;
        Ok(())
    }

    /// One row per sample with columns `t, s_prime, k1.., omega1_norm,
    /// omega_12.., flags`; the average and metadata follow as `# ` lines.
    pub fn write_csv<W: Write>(&self, mut writer: W) -> Result<()> {
        let dim = self.metadata.phases;
        let k_cols = self.metadata.max_order.saturating_sub(1);
        let labels: Vec<String> = BivecN::zeros(dim)
            .labeled()
            .map(|(l, _)| format!("omega_{}", &l[1..]))
            .collect();
        {
            let mut w = csv::WriterBuilder::new()
                .terminator(csv::Terminator::Any(b'\n'))
                .from_writer(&mut writer);
            let mut header = vec!["t".to_string(), "s_prime".to_string()];
            header.extend((1..=k_cols).map(|i| format!("k{i}")));
            header.push("omega1_norm".into());
            header.extend(labels.iter().cloned());
            header.push("flags".into());
            w.write_record(&header).map_err(csv_error)?;
            let opt = |x: Option<f64>| x.map(format_f64).unwrap_or_default();
            for s in &self.samples {
                let mut row = vec![format_f64(s.t), opt(s.s_prime)];
                row.extend((0..k_cols).map(|i| opt(s.k.get(i).copied())));
                row.push(opt(s.omega1_norm));
                row.extend(
                    (0..labels.len()).map(|i| opt(s.omega_components.get(i).map(|c| c.value))),
                );
                row.push(s.flags.join(";"));
                w.write_record(&row).map_err(csv_error)?;
            }
            w.flush()?;
        }
        if let Some(a) = &self.average {
            writeln!(
                writer,
                "# average window=[{}, {}] steps={} mean_norm={}",
                format_f64(a.window[0]),
                format_f64(a.window[1]),
                a.steps,
                format_f64(a.mean_norm)
            )?;
            let comps: Vec<String> = a
                .mean_components
                .iter()
                .map(|c| format!("{}={}", c.label, format_f64(c.value)))
                .collect();
            writeln!(writer, "# average components {}", comps.join(" "))?;
        }
        let meta = serde_json::to_string(&self.metadata).map_err(|e| Error::Io(e.to_string()))?;
        writeln!(writer, "# metadata {meta}")?;
        Ok(())
    }
}
