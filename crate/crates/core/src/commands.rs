//! Command drivers behind the `geofreq` binary.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use crate::curves::{
    balanced_sinusoid, fit_sampled, harmonic_multiphase, unbalanced_sinusoid, CurveModel,
    HarmonicSpec, SampledSignal, EDGE_TRIM,
};
use crate::darboux::{average_bivector, geometric_frequency_series, MIN_QUADRATURE_STEPS};
use crate::error::{Error, Result};
use crate::frames::{FrameOptions, Orthogonalizer};
use crate::io::{AnalysisOutput, AverageRecord, Metadata, SampleRecord};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    Balanced,
    Unbalanced,
    /// Three phases with harmonics 1, 2 and 7 (amplitudes 200, 20, -30 V rms).
    Harmonic437,
}

impl FromStr for ModelKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "balanced" => Ok(Self::Balanced),
            "unbalanced" => Ok(Self::Unbalanced),
            "harmonic437" => Ok(Self::Harmonic437),
            other => Err(Error::InvalidInput(format!(
                "unknown model '{other}' (balanced, unbalanced, harmonic437)"
            ))),
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Balanced => "balanced",
            Self::Unbalanced => "unbalanced",
            Self::Harmonic437 => "harmonic437",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GenerateConfig {
    pub model: ModelKind,
    /// Phase count for `balanced`; ignored otherwise.
    pub phases: Option<usize>,
    /// Peak amplitude for `balanced`.
    pub amplitude: f64,
    /// Per-phase peak amplitudes for `unbalanced`.
    pub amplitudes: Option<Vec<f64>>,
    /// Per-phase angles in degrees for `unbalanced`: `v_m = V_m cos(ωt - φ_m)`.
    pub phases_deg: Option<Vec<f64>>,
    pub freq_hz: f64,
    pub rate: f64,
    pub cycles: f64,
}

impl Default for GenerateConfig {
    fn default() -> Self {
        Self {
            model: ModelKind::Balanced,
            phases: None,
            amplitude: 1.0,
            amplitudes: None,
            phases_deg: None,
            freq_hz: 50.0,
            rate: 12800.0,
            cycles: 3.0,
        }
    }
}

fn positive(name: &str, x: f64) -> Result<()> {
    if !(x.is_finite() && x > 0.0) {
        return Err(Error::InvalidInput(format!(
            "--{name} must be positive, got {x}"
        )));
    }
    Ok(())
}

pub fn build_model(cfg: &GenerateConfig) -> Result<Box<dyn CurveModel>> {
    positive("freq", cfg.freq_hz)?;
    let omega = 2.0 * PI * cfg.freq_hz;
    let unbalanced_only = cfg.amplitudes.is_some() || cfg.phases_deg.is_some();
    match cfg.model {
        ModelKind::Balanced => {
            if unbalanced_only {
                return Err(Error::InvalidInput(
                    "--amps/--phis apply to the unbalanced model only".into(),
                ));
            }
            Ok(Box::new(balanced_sinusoid(
                cfg.phases.unwrap_or(3),
                cfg.amplitude,
                omega,
            )?))
        }
        ModelKind::Unbalanced => {
            let (Some(amps), Some(phis)) = (&cfg.amplitudes, &cfg.phases_deg) else {
                return Err(Error::InvalidInput(
                    "the unbalanced model needs both --amps and --phis".into(),
                ));
            };
            if cfg.phases.is_some_and(|p| p != amps.len()) {
                return Err(Error::InvalidInput(
                    "--phases disagrees with the length of --amps".into(),
                ));
            }
            let radians: Vec<f64> = phis.iter().map(|d| d.to_radians()).collect();
            Ok(Box::new(unbalanced_sinusoid(amps, &radians, omega)?))
        }
        ModelKind::Harmonic437 => {
            if unbalanced_only || cfg.phases.is_some_and(|p| p != 3) {
                return Err(Error::InvalidInput(
                    "harmonic437 is a fixed three-phase preset".into(),
                ));
            }
            Ok(Box::new(harmonic_multiphase(
                &HarmonicSpec::three_phase_distorted(omega),
                3,
                2.0 * PI / 3.0,
            )?))
        }
    }
}

/// Samples `round(rate · cycles / freq)` rows starting at `t = 0`.
pub fn generate(cfg: &GenerateConfig) -> Result<SampledSignal> {
    positive("rate", cfg.rate)?;
    positive("cycles", cfg.cycles)?;
    let model = build_model(cfg)?;
    let count = (cfg.rate * cfg.cycles / cfg.freq_hz).round() as usize;
    if count < 2 {
        return Err(Error::InvalidInput(format!(
            "{count} samples requested; raise --rate or --cycles"
        )));
    }
    SampledSignal::from_model(&model, 0.0, cfg.rate, count)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Window {
    /// One fundamental period from the start of the analyzed span; needs the
    /// fundamental frequency.
    OneCycle,
    Span(f64, f64),
}

impl FromStr for Window {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        if s == "one-cycle" {
            return Ok(Self::OneCycle);
        }
        let bad =
            || Error::InvalidInput(format!("window must be `one-cycle` or `t0,t1`, got '{s}'"));
        let (a, b) = s.split_once(',').ok_or_else(bad)?;
        let t0: f64 = a.trim().parse().map_err(|_| bad())?;
        let t1: f64 = b.trim().parse().map_err(|_| bad())?;
        Ok(Self::Span(t0, t1))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OutputFormat {
    #[default]
    Json,
    Csv,
}

impl FromStr for OutputFormat {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(Self::Json),
            "csv" => Ok(Self::Csv),
            other => Err(Error::InvalidInput(format!(
                "unknown format '{other}' (json, csv)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnalysisConfig {
    /// Input name echoed in the metadata.
    pub input: String,
    pub orthogonalizer: Orthogonalizer,
    /// Frame order, 2..=4; defaults to `min(phases, 4)`.
    pub max_order: Option<usize>,
    pub smoothing: f64,
    pub format: OutputFormat,
    pub window: Option<Window>,
    /// Quadrature steps over the averaging window.
    pub steps: usize,
    /// Fundamental frequency, used by [`Window::OneCycle`].
    pub freq_hz: Option<f64>,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        Self {
            input: String::new(),
            orthogonalizer: Orthogonalizer::default(),
            max_order: None,
            smoothing: 0.0,
            format: OutputFormat::default(),
            window: None,
            steps: 1024,
            freq_hz: None,
        }
    }
}

impl AnalysisConfig {
    fn validate(&self) -> Result<()> {
        if let Some(m) = self.max_order {
            if !(2..=4).contains(&m) {
                return Err(Error::InvalidInput(format!(
                    "--max-order must be between 2 and 4, got {m}"
                )));
            }
        }
        if !(self.smoothing.is_finite() && self.smoothing >= 0.0) {
            return Err(Error::InvalidInput(format!(
                "--smoothing must be non-negative, got {}",
                self.smoothing
            )));
        }
        if self.window.is_some() && self.steps < MIN_QUADRATURE_STEPS {
            return Err(Error::InvalidInput(format!(
                "--steps must be at least {MIN_QUADRATURE_STEPS}"
            )));
        }
        if let Some(f) = self.freq_hz {
            positive("freq", f)?;
        }
        Ok(())
    }
}

/// Fits the signal, analyzes every interior sample and optionally averages
/// `Ω_1` over a window.
pub fn analyze(signal: &SampledSignal, cfg: &AnalysisConfig) -> Result<AnalysisOutput> {
    cfg.validate()?;
    let spline = fit_sampled(signal, cfg.smoothing)?;
    let (start, end) = spline.domain();
    let times = &signal.times()[EDGE_TRIM..signal.len() - EDGE_TRIM];
    let order = cfg.max_order.unwrap_or(signal.dim().min(4));
    let opts = FrameOptions::new(order, cfg.orthogonalizer);
    let series = geometric_frequency_series(&spline, times, opts)?;
    let samples: Vec<SampleRecord> = series.iter().map(SampleRecord::from_sample).collect();

    let average = match cfg.window {
        None => None,
        Some(window) => {
            let (t0, t1) = match window {
                Window::Span(t0, t1) => (t0, t1),
                Window::OneCycle => {
                    let f = cfg.freq_hz.ok_or_else(|| {
                        Error::InvalidInput("--window one-cycle needs --freq".into())
                    })?;
                    (start, start + 1.0 / f)
                }
            };
            let slack = 1e-9 * (end - start);
            if t0 < start - slack || t1 > end + slack {
                return Err(Error::OutOfDomain {
                    t: if t0 < start { t0 } else { t1 },
                    start,
                    end,
                });
            }
            Some(AverageRecord::from(&average_bivector(
                &spline,
                t0.max(start),
                t1.min(end),
                cfg.steps,
            )?))
        }
    };

    let norms: Vec<f64> = samples.iter().filter_map(|s| s.omega1_norm).collect();
    let mean = (!norms.is_empty()).then(|| norms.iter().sum::<f64>() / norms.len() as f64);
    let metadata = Metadata {
        version: env!("CARGO_PKG_VERSION").to_string(),
        input: cfg.input.clone(),
        phases: signal.dim(),
        orthogonalizer: cfg.orthogonalizer.to_string(),
        max_order: order,
        smoothing: cfg.smoothing,
        trimmed_per_side: EDGE_TRIM,
        analyzed_span: [start, end],
        samples: samples.len(),
        flagged: samples.iter().filter(|s| !s.flags.is_empty()).count(),
        mean_omega1_norm: mean,
        geometric_frequency_hz: mean.map(|w| w / (2.0 * PI)),
    };
    Ok(AnalysisOutput {
        samples,
        average,
        metadata,
    })
}
