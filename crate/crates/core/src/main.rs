use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use geofreq::commands::{
    analyze, generate, AnalysisConfig, GenerateConfig, ModelKind, OutputFormat, Window,
};
use geofreq::frames::Orthogonalizer;
use geofreq::io::{parse_waveform_csv, write_waveform};
use geofreq::validation::{self, Group};
use geofreq::Error;

/// Geometric frequency of multi-phase signals.
#[derive(Parser)]
#[command(name = "geofreq", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a synthetic `t,v1,..,vn` waveform.
    Generate {
        /// balanced, unbalanced or harmonic437
        #[arg(long, default_value = "balanced")]
        model: ModelKind,
        /// Number of phases (balanced model).
        #[arg(long)]
        phases: Option<usize>,
        /// Peak amplitude in volts (balanced model).
        #[arg(long, default_value_t = 1.0)]
        amp: f64,
        /// Comma-separated peak amplitudes (unbalanced model).
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        amps: Option<Vec<f64>>,
        /// Comma-separated phase angles in degrees (unbalanced model).
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        phis: Option<Vec<f64>>,
        /// Fundamental frequency in Hz.
        #[arg(long, default_value_t = 50.0)]
        freq: f64,
        /// Sample rate in Hz.
        #[arg(long, default_value_t = 12800.0)]
        rate: f64,
        /// Duration in fundamental cycles.
        #[arg(long, default_value_t = 3.0)]
        cycles: f64,
        /// Output file; standard output when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compute geometric frequency and Darboux data from a waveform file.
    Analyze {
        input: PathBuf,
        /// cgs, mgs or gags
        #[arg(long, default_value = "mgs")]
        orthogonalizer: Orthogonalizer,
        /// Frame order, 2 to 4; defaults to min(phases, 4).
        #[arg(long)]
        max_order: Option<usize>,
        /// Smoothing weight of the spline fit; 0 interpolates.
        #[arg(long, default_value_t = 0.0)]
        smoothing: f64,
        /// json or csv
        #[arg(long, default_value = "json")]
        format: OutputFormat,
        /// Averaging window: `one-cycle` or `t0,t1` in seconds.
        #[arg(long, allow_hyphen_values = true)]
        window: Option<Window>,
        /// Quadrature steps over the averaging window.
        #[arg(long, default_value_t = 1024)]
        steps: usize,
        /// Fundamental frequency in Hz, needed by `--window one-cycle`.
        #[arg(long)]
        freq: Option<f64>,
        /// Output file; standard output when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the built-in accuracy checks on analytic models.
    Validate {
        /// Comma-separated groups to run.
        #[arg(long, value_delimiter = ',')]
        only: Vec<Group>,
    },
}

fn output(path: Option<&PathBuf>) -> Result<Box<dyn Write>, Error> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).map_err(|e| Error::Io(format!("{}: {e}", p.display())))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Io(_) | Error::Format { .. } | Error::Data { .. } => 2,
        _ => 1,
    }
}

fn run(cli: Cli) -> Result<u8, Error> {
    match cli.command {
        Command::Generate {
            model,
            phases,
            amp,
            amps,
            phis,
            freq,
            rate,
            cycles,
            out,
        } => {
            let cfg = GenerateConfig {
                model,
                phases,
                amplitude: amp,
                amplitudes: amps,
                phases_deg: phis,
                freq_hz: freq,
                rate,
                cycles,
            };
            let signal = generate(&cfg)?;
            write_waveform(output(out.as_ref())?, &signal)?;
        }
        Command::Analyze {
            input,
            orthogonalizer,
            max_order,
            smoothing,
            format,
            window,
            steps,
            freq,
            out,
        } => {
            let signal = parse_waveform_csv(&input)?;
            let cfg = AnalysisConfig {
                input: input.display().to_string(),
                orthogonalizer,
                max_order,
                smoothing,
                format,
                window,
                steps,
                freq_hz: freq,
            };
            let result = analyze(&signal, &cfg)?;
            let mut w = output(out.as_ref())?;
            match format {
                OutputFormat::Json => result.write_json(&mut w)?,
                OutputFormat::Csv => result.write_csv(&mut w)?,
            }
            w.flush()?;
        }
        Command::Validate { only } => {
            let outcomes = validation::run(&only);
            for o in &outcomes {
                println!("{o}");
            }
            let failed = outcomes.iter().filter(|o| !o.passed).count();
            println!("{} checks, {failed} failed", outcomes.len());
            if failed > 0 {
                return Ok(1);
            }
        }
    }
    Ok(0)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("geofreq: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;
    use std::fs;
    use std::path::Path;

    fn exec(args: &[&str]) -> Result<u8, Error> {
        let cli = Cli::try_parse_from(std::iter::once("geofreq").chain(args.iter().copied()))
            .expect("arguments parse");
        run(cli)
    }

    fn status(args: &[&str]) -> u8 {
        exec(args).unwrap_or_else(|e| exit_code(&e))
    }

    fn path(p: &Path) -> &str {
        p.to_str().unwrap()
    }

    fn rows(csv: &str) -> Vec<Vec<f64>> {
        csv.lines()
            .skip(1)
            .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
            .collect()
    }

    #[test]
    fn generate_balanced_row_count() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("sig.csv");
        let args = [
            "generate", "--model", "balanced", "--phases", "3", "--amp", "1", "--freq", "50",
            "--rate", "12800",
        ];
        assert_eq!(
            status(&[&args[..], &["--cycles", "3", "--out", path(&out)]].concat()),
            0
        );
        let text = fs::read_to_string(&out).unwrap();
        assert!(text.starts_with("t,v1,v2,v3\n"));
        assert_eq!(rows(&text).len(), 768);
    }

    #[test]
    fn generate_is_deterministic() {
        let dir = tempfile::tempdir().unwrap();
        let (a, b) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
        for p in [&a, &b] {
            assert_eq!(
                status(&[
                    "generate",
                    "--model",
                    "harmonic437",
                    "--cycles",
                    "1",
                    "--out",
                    path(p)
                ]),
                0
            );
        }
        let text = fs::read_to_string(&a).unwrap();
        assert_eq!(text, fs::read_to_string(&b).unwrap());
        for row in rows(&text) {
            assert!(row[1..].iter().sum::<f64>().abs() < 1e-9);
        }
    }

    #[test]
    fn generate_unbalanced_with_negative_angles() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("u.csv");
        let args = [
            "generate",
            "--model",
            "unbalanced",
            "--amps",
            "2,1,1",
            "--phis",
            "0,-120,120",
            "--out",
            path(&out),
        ];
        assert_eq!(status(&args), 0);
        let first = &rows(&fs::read_to_string(&out).unwrap())[0];
        assert_eq!(first[1], 2.0);
        assert!((first[2] + 0.5).abs() < 1e-15);
    }

    #[test]
    fn generate_rejects_bad_flags() {
        for args in [
            &["generate", "--model", "unbalanced"][..],
            &[
                "generate",
                "--model",
                "unbalanced",
                "--amps",
                "1,1",
                "--phis",
                "0",
            ],
            &["generate", "--model", "balanced", "--amps", "1,1"],
            &["generate", "--freq", "0"],
            &["generate", "--phases", "1"],
        ] {
            assert_ne!(status(args), 0, "{args:?}");
        }
        assert!(Cli::try_parse_from(["geofreq", "generate", "--model", "sawtooth"]).is_err());
        assert!(
            Cli::try_parse_from(["geofreq", "analyze", "x.csv", "--orthogonalizer", "qr"]).is_err()
        );
    }

    #[test]
    fn analyze_json_output() {
        let dir = tempfile::tempdir().unwrap();
        let wave = dir.path().join("wave.csv");
        let out = dir.path().join("out.json");
        assert_eq!(
            status(&[
                "generate",
                "--phases",
                "4",
                "--amp",
                "230",
                "--out",
                path(&wave)
            ]),
            0
        );
        assert_eq!(
            status(&[
                "analyze",
                path(&wave),
                "--window",
                "one-cycle",
                "--freq",
                "50",
                "--out",
                path(&out)
            ]),
            0
        );
        let records: serde_json::Value =
            serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
        let records = records.as_array().unwrap();
        let samples: Vec<&serde_json::Value> =
            records.iter().filter(|r| r["record"] == "sample").collect();
        assert_eq!(samples.len(), 768 - 4);
        let w = 2.0 * PI * 50.0;
        for s in &samples {
            assert!((s["omega1_norm"].as_f64().unwrap() - w).abs() < 1e-3 * w);
            assert_eq!(s["omega_components"].as_array().unwrap().len(), 6);
            assert_eq!(s["omega_components"][0]["label"], "e12");
        }
        let avg = records.iter().find(|r| r["record"] == "average").unwrap();
        assert!((avg["mean_norm"].as_f64().unwrap() - w).abs() < 1e-3 * w);
        let meta = records.last().unwrap();
        assert_eq!(meta["record"], "metadata");
        assert_eq!(meta["trimmed_per_side"], 2);
        assert_eq!(meta["orthogonalizer"], "mgs");
    }

    #[test]
    fn analyze_output_is_byte_identical() {
        let dir = tempfile::tempdir().unwrap();
        let wave = dir.path().join("wave.csv");
        assert_eq!(
            status(&[
                "generate",
                "--model",
                "harmonic437",
                "--cycles",
                "1",
                "--out",
                path(&wave)
            ]),
            0
        );
        for format in ["json", "csv"] {
            let outs: Vec<String> = (0..2)
                .map(|i| {
                    let out = dir.path().join(format!("out{i}.{format}"));
                    let args = [
                        "analyze",
                        path(&wave),
                        "--format",
                        format,
                        "--orthogonalizer",
                        "gags",
                        "--out",
                        path(&out),
                    ];
                    assert_eq!(status(&args), 0);
                    fs::read_to_string(&out).unwrap()
                })
                .collect();
            assert_eq!(outs[0], outs[1]);
        }
    }

    #[test]
    fn analyze_csv_columns() {
        let dir = tempfile::tempdir().unwrap();
        let wave = dir.path().join("wave.csv");
        let out = dir.path().join("out.csv");
        assert_eq!(
            status(&["generate", "--cycles", "1", "--out", path(&wave)]),
            0
        );
        assert_eq!(
            status(&[
                "analyze",
                path(&wave),
                "--format",
                "csv",
                "--max-order",
                "2",
                "--out",
                path(&out)
            ]),
            0
        );
        let text = fs::read_to_string(&out).unwrap();
        assert!(text.starts_with("t,s_prime,k1,omega1_norm,omega_12,omega_13,omega_23,flags\n"));
        assert!(text.lines().last().unwrap().starts_with("# metadata {"));
    }

    #[test]
    fn analyze_exit_codes() {
        let dir = tempfile::tempdir().unwrap();
        assert_eq!(
            status(&["analyze", path(&dir.path().join("missing.csv"))]),
            2
        );

        let bad_header = dir.path().join("bad.csv");
        fs::write(&bad_header, "t,v1\n0,1\n").unwrap();
        let err = exec(&["analyze", path(&bad_header)]).unwrap_err();
        assert_eq!(exit_code(&err), 2);
        assert!(err.to_string().contains("line 1"), "{err}");

        let short = dir.path().join("short.csv");
        fs::write(&short, "t,v1,v2\n0,1,0\n0.001,0.9,0.1\n").unwrap();
        assert!(matches!(
            exec(&["analyze", path(&short)]),
            Err(Error::TooFewSamples { .. })
        ));

        let wave = dir.path().join("wave.csv");
        assert_eq!(
            status(&["generate", "--cycles", "1", "--out", path(&wave)]),
            0
        );
        assert_eq!(
            status(&["analyze", path(&wave), "--window", "one-cycle"]),
            1
        );
        assert_eq!(status(&["analyze", path(&wave), "--max-order", "6"]), 1);
    }

    #[test]
    fn validate_subset() {
        assert_eq!(status(&["validate", "--only", "balanced,identities"]), 0);
        assert!(Cli::try_parse_from(["geofreq", "validate", "--only", "nothing"]).is_err());
    }

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
