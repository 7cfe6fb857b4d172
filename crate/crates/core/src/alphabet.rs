//! Reflection-coefficient alphabets.
//!
//! Built-in alphabets are measured two- and four-state elements plus a
//! varactor-tuned element sampled at fourteen bias voltages. Amplitudes given
//! in dB are field ratios, converted with `10^(dB/20)`. Phases are wrapped to
//! `(−180°, 180°]`; row order is always preserved.

use std::f64::consts::TAU;
use std::io::BufRead;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::geometry::{canonical_phase, db_to_linear, Coefficient};

pub const BUILTIN_NAMES: [&str; 5] = ["mmwave33", "mmwave27", "omni3p6", "testbed2p3", "varactor5g"];

#[derive(Debug, Clone, PartialEq)]
pub struct Alphabet {
    entries: Vec<Coefficient>,
    values: Vec<Complex64>,
    label: String,
    nominal_frequency: Option<f64>,
    /// Unit-cell size as fractions of the wavelength.
    nominal_cell: Option<(f64, f64)>,
    control_values: Option<Vec<f64>>,
}

impl Alphabet {
    pub fn new(entries: Vec<Coefficient>, label: impl Into<String>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::contract("alphabet must contain at least one entry"));
        }
        let values = entries.iter().map(Coefficient::to_complex).collect();
        Ok(Self {
            entries,
            values,
            label: label.into(),
            nominal_frequency: None,
            nominal_cell: None,
            control_values: None,
        })
    }

    pub fn with_frequency(mut self, hz: f64) -> Self {
        self.nominal_frequency = Some(hz);
        self
    }

    pub fn with_cell_size(mut self, fx: f64, fy: f64) -> Self {
        self.nominal_cell = Some((fx, fy));
        self
    }

    pub fn with_control_values(mut self, controls: Vec<f64>) -> Result<Self> {
        if controls.len() != self.entries.len() {
            return Err(Error::contract(format!(
                "{} control values for {} entries",
                controls.len(),
                self.entries.len()
            )));
        }
        self.control_values = Some(controls);
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[Coefficient] {
        &self.entries
    }

    /// Entries in Cartesian form, index-aligned with [`Alphabet::entries`].
    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn nominal_frequency(&self) -> Option<f64> {
        self.nominal_frequency
    }

    pub fn nominal_cell(&self) -> Option<(f64, f64)> {
        self.nominal_cell
    }

    pub fn control_values(&self) -> Option<&[f64]> {
        self.control_values.as_deref()
    }

    pub fn phases(&self) -> Vec<f64> {
        self.entries.iter().map(Coefficient::phase).collect()
    }
}

fn table(rows: &[(f64, f64)], db: bool, label: &str) -> Alphabet {
    let entries = rows
        .iter()
        .map(|&(a, p)| if db { Coefficient::from_db(a, p) } else { Coefficient::from_degrees(a, p) })
        .collect::<Result<Vec<_>>>()
        .expect("built-in table is valid");
    Alphabet::new(entries, label).expect("built-in table is non-empty")
}

const VARACTOR_ROWS: [(f64, f64, f64); 14] = [
    (0.0, -1.517, 32.798),
    (0.25, -1.807, 40.854),
    (0.5, -3.156, 46.807),
    (0.75, -5.59, 53.543),
    (1.0, -9.576, 70.32),
    (1.25, -20.563, -167.158),
    (1.5, -6.615, -73.171),
    (1.75, -3.029, -49.627),
    (2.0, -1.959, -35.908),
    (2.5, -0.874, -23.263),
    (3.0, -0.749, -16.087),
    (3.5, -0.469, -12.663),
    (4.0, -0.528, -9.925),
    (5.0, -0.439, -6.906),
];

/// Looks up a built-in alphabet by name (see [`BUILTIN_NAMES`]).
pub fn builtin(name: &str) -> Result<Alphabet> {
    let a = match name {
        "mmwave33" => table(&[(0.8, 150.0), (0.8, 0.0)], false, "mmwave33")
            .with_frequency(33e9)
            .with_cell_size(0.418, 0.418),
        "mmwave27" => table(&[(0.9, 165.0), (0.7, 0.0)], false, "mmwave27")
            .with_frequency(27e9)
            .with_cell_size(0.126, 0.252),
        "omni3p6" => table(&[(0.46, 20.0), (0.55, 215.0)], false, "omni3p6")
            .with_frequency(3.6e9)
            .with_cell_size(0.345, 0.170),
        "testbed2p3" => table(
            &[(-1.2, -205.5), (-1.2, -383.2), (-0.8, -290.2), (-0.7, -110.3)],
            true,
            "testbed2p3",
        )
        .with_frequency(2.3e9)
        .with_cell_size(0.286, 0.286),
        "varactor5g" => {
            let rows: Vec<_> = VARACTOR_ROWS.iter().map(|&(_, a, p)| (a, p)).collect();
            table(&rows, true, "varactor5g")
                .with_frequency(5.2e9)
                .with_cell_size(0.25, 0.25)
                .with_control_values(VARACTOR_ROWS.iter().map(|r| r.0).collect())?
        }
        _ => {
            return Err(Error::UnknownAlphabet {
                name: name.to_string(),
                valid: BUILTIN_NAMES.join(", "),
            })
        }
    };
    Ok(a)
}

/// `L` unit-amplitude entries at phases `2πn/L`, `n = 0..L−1`.
pub fn uadp_set(levels: usize) -> Result<Alphabet> {
    if levels < 2 {
        return Err(Error::contract(format!("evenly spaced set needs L ≥ 2, got {levels}")));
    }
    let entries = (0..levels)
        .map(|n| Coefficient::unit(canonical_phase(TAU * n as f64 / levels as f64)))
        .collect();
    Alphabet::new(entries, format!("uadp:{levels}"))
}

/// Resolves `uadp:<L>` or a built-in name.
pub fn by_name(name: &str) -> Result<Alphabet> {
    match name.strip_prefix("uadp:") {
        Some(l) => {
            let levels = l.trim().parse::<usize>().map_err(|_| Error::UnknownAlphabet {
                name: name.to_string(),
                valid: format!("{}, uadp:<L>", BUILTIN_NAMES.join(", ")),
            })?;
            uadp_set(levels)
        }
        None => builtin(name),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstellationStats {
    pub centroid: Complex64,
    /// Length of the smallest circular arc containing every entry phase.
    pub min_phase_coverage: f64,
}

pub fn constellation_stats(alphabet: &Alphabet) -> ConstellationStats {
    let values = alphabet.values();
    let centroid = values.iter().sum::<Complex64>() / values.len() as f64;

    let mut phases = alphabet.phases();
    phases.sort_by(f64::total_cmp);
    let wrap_gap = phases[0] + TAU - phases[phases.len() - 1];
    let max_gap = phases.windows(2).map(|w| w[1] - w[0]).fold(wrap_gap, f64::max);
    ConstellationStats { centroid, min_phase_coverage: (TAU - max_gap).max(0.0) }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AmplitudeUnit {
    #[default]
    Linear,
    Db,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PhaseUnit {
    #[default]
    Degrees,
    Radians,
}

/// Default units applied when neither a directive line nor a per-value
/// suffix says otherwise.
#[derive(Debug, Clone, Default)]
pub struct LoadOptions {
    pub amplitude_unit: AmplitudeUnit,
    pub phase_unit: PhaseUnit,
    pub label: Option<String>,
}

#[derive(Debug, Clone)]
pub struct LoadedAlphabet {
    pub alphabet: Alphabet,
    /// 1-based data rows dropped as exact duplicates of an earlier row.
    pub dropped_duplicates: Vec<usize>,
}

fn parse_amplitude(cell: &str, unit: AmplitudeUnit, line: usize) -> Result<f64> {
    let lower = cell.trim().to_ascii_lowercase();
    let (num, unit) = match lower.strip_suffix("db") {
        Some(n) => (n, AmplitudeUnit::Db),
        None => (lower.as_str(), unit),
    };
    let v: f64 = num
        .trim()
        .parse()
        .map_err(|_| Error::Parse { line, msg: format!("bad amplitude `{cell}`") })?;
    Ok(match unit {
        AmplitudeUnit::Linear => v,
        AmplitudeUnit::Db => db_to_linear(v),
    })
}

/// Returns the phase in degrees or radians as tagged.
fn parse_phase(cell: &str, unit: PhaseUnit, line: usize) -> Result<(f64, PhaseUnit)> {
    let lower = cell.trim().to_ascii_lowercase();
    let (num, unit) = if let Some(n) = lower.strip_suffix("deg") {
        (n, PhaseUnit::Degrees)
    } else if let Some(n) = lower.strip_suffix("rad") {
        (n, PhaseUnit::Radians)
    } else {
        (lower.as_str(), unit)
    };
    let v: f64 = num
        .trim()
        .parse()
        .map_err(|_| Error::Parse { line, msg: format!("bad phase `{cell}`") })?;
    Ok((v, unit))
}

/// Reads an alphabet table.
///
/// Format: `#` comment lines, optional directives `# amplitude_unit:
/// linear|db` and `# phase_unit: deg|rad`, an optional header row
/// `amplitude,phase[,control]`, then one comma-separated row per entry.
/// Individual values may carry `dB`, `deg` or `rad` suffixes.
pub fn load_alphabet<R: BufRead>(reader: R, options: &LoadOptions) -> Result<LoadedAlphabet> {
    let mut amp_unit = options.amplitude_unit;
    let mut phase_unit = options.phase_unit;
    let mut label = options.label.clone();
    let mut entries: Vec<Coefficient> = Vec::new();
    let mut controls: Vec<Option<f64>> = Vec::new();
    let mut dropped = Vec::new();
    let mut row = 0usize;
    let mut ncols: Option<usize> = None;

    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let line = line?;
        let text = line.trim();
        if text.is_empty() {
            continue;
        }
        if let Some(comment) = text.strip_prefix('#') {
            if let Some((key, value)) = comment.split_once(':') {
                let value = value.trim();
                match key.trim() {
                    "amplitude_unit" => {
                        amp_unit = match value.to_ascii_lowercase().as_str() {
                            "linear" => AmplitudeUnit::Linear,
                            "db" => AmplitudeUnit::Db,
                            _ => {
                                return Err(Error::Parse {
                                    line: line_no,
                                    msg: format!("unknown amplitude unit `{value}`"),
                                })
                            }
                        }
                    }
                    "phase_unit" => {
                        phase_unit = match value.to_ascii_lowercase().as_str() {
                            "deg" | "degrees" => PhaseUnit::Degrees,
                            "rad" | "radians" => PhaseUnit::Radians,
                            _ => {
                                return Err(Error::Parse {
                                    line: line_no,
                                    msg: format!("unknown phase unit `{value}`"),
                                })
                            }
                        }
                    }
                    "label" if label.is_none() => label = Some(value.to_string()),
                    _ => {}
                }
            }
            continue;
        }

        let cells: Vec<&str> = text.split(',').map(str::trim).collect();
        if ncols.is_none() && cells.first().is_some_and(|c| c.eq_ignore_ascii_case("amplitude")) {
            if cells.len() < 2 || !cells[1].eq_ignore_ascii_case("phase") {
                return Err(Error::Parse {
                    line: line_no,
                    msg: "header must be `amplitude,phase[,control]`".into(),
                });
            }
            ncols = Some(cells.len());
            continue;
        }
        if cells.len() < 2 || cells.iter().take(2).any(|c| c.is_empty()) {
            return Err(Error::Parse {
                line: line_no,
                msg: "expected at least amplitude and phase columns".into(),
            });
        }
        if let Some(n) = ncols {
            if cells.len() != n {
                return Err(Error::Parse {
                    line: line_no,
                    msg: format!("expected {n} columns, found {}", cells.len()),
                });
            }
        }

        row += 1;
        let amplitude = parse_amplitude(cells[0], amp_unit, line_no)?;
        if !(0.0..=1.0).contains(&amplitude) {
            return Err(Error::Validation {
                row,
                msg: format!("amplitude {amplitude} outside [0, 1]"),
            });
        }
        let (phase, unit) = parse_phase(cells[1], phase_unit, line_no)?;
        let coefficient = match unit {
            PhaseUnit::Degrees => Coefficient::from_degrees(amplitude, phase),
            PhaseUnit::Radians => Coefficient::new(amplitude, phase),
        }
        .map_err(|e| Error::Validation { row, msg: e.to_string() })?;
        let control = match cells.get(2) {
            Some(c) if !c.is_empty() => Some(c.parse::<f64>().map_err(|_| Error::Parse {
                line: line_no,
                msg: format!("bad control value `{c}`"),
            })?),
            _ => None,
        };

        if entries.contains(&coefficient) {
            log::warn!("alphabet row {row} duplicates an earlier entry and was dropped");
            dropped.push(row);
            continue;
        }
        entries.push(coefficient);
        controls.push(control);
    }

    if entries.is_empty() {
        return Err(Error::Validation { row: 0, msg: "alphabet table has no entries".into() });
    }
    let mut alphabet = Alphabet::new(entries, label.unwrap_or_else(|| "file".to_string()))?;
    if controls.iter().all(Option::is_some) && controls.iter().any(Option::is_some) {
        alphabet = alphabet.with_control_values(controls.into_iter().flatten().collect())?;
    }
    Ok(LoadedAlphabet { alphabet, dropped_duplicates: dropped })
}

/// Nine significant digits, scientific notation.
pub fn sig9(v: f64) -> String {
    format!("{v:.8e}")
}

/// Canonical text encoding: linear amplitudes and degrees, nine significant
/// digits, in entry order.
pub fn export_alphabet(alphabet: &Alphabet) -> String {
    let mut out = String::new();
    out.push_str(&format!("# label: {}\n", alphabet.label()));
    out.push_str("# amplitude_unit: linear\n# phase_unit: deg\n");
    let controls = alphabet.control_values();
    out.push_str(if controls.is_some() { "amplitude,phase,control\n" } else { "amplitude,phase\n" });
    for (i, e) in alphabet.entries().iter().enumerate() {
        out.push_str(&sig9(e.amplitude()));
        out.push(',');
        out.push_str(&sig9(e.phase_degrees()));
        if let Some(c) = controls {
            out.push(',');
            out.push_str(&sig9(c[i]));
        }
        out.push('\n');
    }
    out
}
