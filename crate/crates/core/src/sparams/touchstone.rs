//! Touchstone v1 two-port files and CSV export.
//!
//! Files are written as `# GHZ S RI R <z>` with every value printed in its
//! shortest round-trip decimal form, so a write/read cycle restores the
//! S-parameters bit-for-bit. Readers accept any unit (HZ/KHZ/MHZ/GHZ) and
//! format (RI/MA/DB).

use std::io::{BufRead, Write};

use num_complex::Complex64;

use super::{db_mag, SParamError, SParamPoint, SParamSweep};

#[derive(Debug, Clone, Copy, PartialEq)]
enum Format {
    RealImag,
    MagAngle,
    DbAngle,
}

#[derive(Debug, Clone, Copy)]
struct OptionLine {
    unit: f64,
    format: Format,
    z_ref: f64,
}

impl Default for OptionLine {
    fn default() -> Self {
        // Touchstone v1 defaults.
        Self {
            unit: 1e9,
            format: Format::MagAngle,
            z_ref: 50.0,
        }
    }
}

fn parse_option_line(text: &str, line: usize) -> Result<OptionLine, SParamError> {
    let err = |msg: String| SParamError::Parse { line, msg };
    let mut opt = OptionLine::default();
    let mut tokens = text.split_whitespace().skip(1).map(|t| t.to_ascii_uppercase());
    while let Some(tok) = tokens.next() {
        match tok.as_str() {
            "HZ" => opt.unit = 1.0,
            "KHZ" => opt.unit = 1e3,
            "MHZ" => opt.unit = 1e6,
            "GHZ" => opt.unit = 1e9,
            "S" => {}
            "Y" | "Z" | "H" | "G" => return Err(err(format!("unsupported parameter type {tok}"))),
            "RI" => opt.format = Format::RealImag,
            "MA" => opt.format = Format::MagAngle,
            "DB" => opt.format = Format::DbAngle,
            "R" => {
                let v = tokens
                    .next()
                    .ok_or_else(|| err("missing reference impedance after R".into()))?;
                opt.z_ref = v
                    .parse::<f64>()
                    .ok()
                    .filter(|z| *z > 0.0 && z.is_finite())
                    .ok_or_else(|| err(format!("bad reference impedance {v}")))?;
            }
            other => return Err(err(format!("unknown option token {other}"))),
        }
    }
    Ok(opt)
}

fn pair(a: f64, b: f64, format: Format) -> Complex64 {
    match format {
        Format::RealImag => Complex64::new(a, b),
        Format::MagAngle => Complex64::from_polar(a, b.to_radians()),
        Format::DbAngle => Complex64::from_polar(10f64.powf(a / 20.0), b.to_radians()),
    }
}

/// Parses two-port Touchstone v1 content.
pub fn read_touchstone<R: BufRead>(source: R) -> Result<SParamSweep, SParamError> {
    let mut option: Option<OptionLine> = None;
    let mut points: Vec<SParamPoint> = Vec::new();
    for (idx, line) in source.lines().enumerate() {
        let lineno = idx + 1;
        let line = line?;
        let content = line.split('!').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if content.starts_with('#') {
            if option.is_some() {
                return Err(SParamError::Parse {
                    line: lineno,
                    msg: "duplicate option line".into(),
                });
            }
            option = Some(parse_option_line(content, lineno)?);
            continue;
        }
        let opt = option.ok_or_else(|| SParamError::Parse {
            line: lineno,
            msg: "data before option line".into(),
        })?;
        let values: Vec<f64> = content
            .split_whitespace()
            .map(|t| {
                t.parse::<f64>().map_err(|_| SParamError::Parse {
                    line: lineno,
                    msg: format!("not a number: {t}"),
                })
            })
            .collect::<Result<_, _>>()?;
        if values.len() != 9 {
            return Err(SParamError::Parse {
                line: lineno,
                msg: format!("expected 9 columns, found {}", values.len()),
            });
        }
        let frequency = values[0] * opt.unit;
        if let Some(prev) = points.last() {
            if !(frequency > prev.frequency) {
                return Err(SParamError::Parse {
                    line: lineno,
                    msg: "frequency not strictly increasing".into(),
                });
            }
        }
        // Touchstone v1 two-port column order: S11 S21 S12 S22.
        points.push(SParamPoint {
            frequency,
            s11: pair(values[1], values[2], opt.format),
            s21: pair(values[3], values[4], opt.format),
            s12: pair(values[5], values[6], opt.format),
            s22: pair(values[7], values[8], opt.format),
        });
    }
    let opt = option.ok_or_else(|| SParamError::Parse {
        line: 0,
        msg: "missing option line".into(),
    })?;
    SParamSweep::new(points, opt.z_ref).map_err(|e| SParamError::Parse {
        line: 0,
        msg: e.to_string(),
    })
}

/// Writes the canonical `# GHZ S RI R <z>` form.
pub fn write_touchstone<W: Write>(sweep: &SParamSweep, mut dest: W) -> Result<(), SParamError> {
    writeln!(dest, "! two-port S-parameters")?;
    writeln!(dest, "# GHZ S RI R {}", sweep.z_ref())?;
    for p in sweep.points() {
        writeln!(
            dest,
            "{:e} {:e} {:e} {:e} {:e} {:e} {:e} {:e} {:e}",
            p.frequency / 1e9,
            p.s11.re,
            p.s11.im,
            p.s21.re,
            p.s21.im,
            p.s12.re,
            p.s12.im,
            p.s22.re,
            p.s22.im
        )?;
    }
    Ok(())
}

/// CSV with columns `frequency_hz, s11_db, s21_db, s11_re, s11_im, s21_re, s21_im`.
pub fn write_csv<W: Write>(sweep: &SParamSweep, mut dest: W) -> Result<(), SParamError> {
    writeln!(dest, "frequency_hz,s11_db,s21_db,s11_re,s11_im,s21_re,s21_im")?;
    for p in sweep.points() {
        writeln!(
            dest,
            "{},{},{},{},{},{},{}",
            p.frequency,
            db_mag(p.s11),
            db_mag(p.s21),
            p.s11.re,
            p.s11.im,
            p.s21.re,
            p.s21.im
        )?;
    }
    Ok(())
}
