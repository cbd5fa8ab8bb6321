//! Dataset ingestion: Physics-Toolbox-style accelerometer CSV parsing,
//! directory loading, a synthetic multi-user corpus generator, and a
//! versioned text container for persisting datasets.

use std::fs;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use crate::data::{Dataset, GestureSample, AXES};
use crate::error::{Error, Result};
use crate::rng::{derive_seed, RandomStream};

pub const DATASET_MAGIC: &str = "TAGDSET v1";

/// Column layout of an accelerometer CSV export.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvLayout {
    pub time_column: String,
    pub axis_columns: [String; AXES],
    pub delimiter: u8,
}

impl Default for CsvLayout {
    fn default() -> Self {
        // Physics Toolbox column names.
        CsvLayout {
            time_column: "time".into(),
            axis_columns: ["gFx".into(), "gFy".into(), "gFz".into()],
            delimiter: b',',
        }
    }
}

/// Parse one gesture CSV into a sample. Extra columns are ignored; the
/// time column is validated for monotonic nondecrease but otherwise
/// unused (resampling is index-based).
pub fn parse_csv<R: Read>(reader: R, layout: &CsvLayout, user_id: usize) -> Result<GestureSample> {
    let mut rdr = csv::ReaderBuilder::new()
        .delimiter(layout.delimiter)
        .flexible(false)
        .from_reader(reader);

    let headers = rdr
        .headers()
        .map_err(|e| Error::Data(format!("cannot read CSV header: {e}")))?
        .clone();
    let col = |name: &str| -> Result<usize> {
        headers
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| Error::Data(format!("missing column `{name}` in CSV header")))
    };
    let time_idx = col(&layout.time_column)?;
    let axis_idx = [
        col(&layout.axis_columns[0])?,
        col(&layout.axis_columns[1])?,
        col(&layout.axis_columns[2])?,
    ];

    let mut seq = Vec::new();
    let mut prev_time = f64::NEG_INFINITY;
    for (row_no, record) in rdr.records().enumerate() {
        let record =
            record.map_err(|e| Error::Data(format!("CSV row {}: {e}", row_no + 2)))?;
        let cell = |idx: usize| -> Result<f64> {
            record
                .get(idx)
                .ok_or_else(|| Error::Data(format!("CSV row {}: missing cell", row_no + 2)))?
                .trim()
                .parse::<f64>()
                .map_err(|_| {
                    Error::Data(format!(
                        "CSV row {}: non-numeric cell `{}`",
                        row_no + 2,
                        record.get(idx).unwrap_or("")
                    ))
                })
        };
        let t = cell(time_idx)?;
        if t < prev_time {
            return Err(Error::Data(format!(
                "CSV row {}: time column decreases ({t} after {prev_time})",
                row_no + 2
            )));
        }
        prev_time = t;
        seq.push([cell(axis_idx[0])?, cell(axis_idx[1])?, cell(axis_idx[2])?]);
    }
    if seq.len() < 2 {
        return Err(Error::Data(format!(
            "CSV has {} data rows; at least 2 are required",
            seq.len()
        )));
    }
    GestureSample::new(user_id, seq, 100.0)
}

/// Load `root/<user_name>/*.csv` into a dataset. Labels are assigned by
/// sorted directory name, files within a user sorted by name.
pub fn load_dir(root: &Path, layout: &CsvLayout) -> Result<Dataset> {
    let mut user_dirs: Vec<_> = fs::read_dir(root)
        .map_err(|e| Error::Data(format!("cannot read {}: {e}", root.display())))?
        .filter_map(|e| e.ok())
        .filter(|e| e.path().is_dir())
        .map(|e| e.path())
        .collect();
    user_dirs.sort();
    if user_dirs.is_empty() {
        return Err(Error::Data(format!(
            "no user directories under {}",
            root.display()
        )));
    }

    let mut samples = Vec::new();
    for (user_id, dir) in user_dirs.iter().enumerate() {
        let mut files: Vec<_> = fs::read_dir(dir)
            .map_err(|e| Error::Data(format!("cannot read {}: {e}", dir.display())))?
            .filter_map(|e| e.ok())
            .map(|e| e.path())
            .filter(|p| p.extension().map_or(false, |x| x == "csv"))
            .collect();
        files.sort();
        if files.is_empty() {
            return Err(Error::Data(format!(
                "user directory {} contains no CSV files",
                dir.display()
            )));
        }
        for file in files {
            let f = fs::File::open(&file)
                .map_err(|e| Error::Data(format!("cannot open {}: {e}", file.display())))?;
            let sample = parse_csv(BufReader::new(f), layout, user_id)
                .map_err(|e| Error::Data(format!("{}: {e}", file.display())))?;
            samples.push(sample);
        }
    }
    Dataset::new(samples, user_dirs.len())
}

/// Parameters for the synthetic multi-user corpus. Each user gets a fixed
/// set of harmonic parameters drawn deterministically from (seed, user_id);
/// samples are that harmonic signal evaluated over a random length plus
/// i.i.d. Gaussian noise.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthProfile {
    pub num_users: usize,
    pub samples_per_user: usize,
    pub length_range: (usize, usize),
    pub harmonics_per_axis: usize,
    pub noise_sigma: f64,
    pub seed: u64,
}

impl Default for SynthProfile {
    fn default() -> Self {
        SynthProfile {
            num_users: 10,
            samples_per_user: 50,
            length_range: (300, 700),
            harmonics_per_axis: 3,
            noise_sigma: 0.05,
            seed: 7,
        }
    }
}

struct Harmonic {
    amplitude: f64,
    cycles: f64,
    phase: f64,
}

pub fn synth_dataset(profile: &SynthProfile) -> Result<Dataset> {
    let (lo, hi) = profile.length_range;
    if profile.num_users == 0 || profile.samples_per_user == 0 {
        return Err(Error::Usage("users and samples per user must be positive".into()));
    }
    if lo < 2 || lo > hi {
        return Err(Error::Usage(format!(
            "length range must satisfy 2 <= min <= max, got ({lo},{hi})"
        )));
    }
    if profile.harmonics_per_axis == 0 {
        return Err(Error::Usage("harmonics_per_axis must be positive".into()));
    }
    if profile.noise_sigma < 0.0 {
        return Err(Error::Usage("noise_sigma must be nonnegative".into()));
    }

    let mut samples = Vec::with_capacity(profile.num_users * profile.samples_per_user);
    for user in 0..profile.num_users {
        // Per-user generative parameters: pure function of (seed, user).
        let mut param_stream = RandomStream::new(derive_seed(profile.seed, user as u64));
        let harmonics: Vec<Vec<Harmonic>> = (0..AXES)
            .map(|_| {
                (0..profile.harmonics_per_axis)
                    .map(|_| Harmonic {
                        amplitude: param_stream.uniform_in(0.2, 1.0),
                        cycles: param_stream.uniform_in(1.0, 6.0),
                        phase: param_stream.uniform_in(0.0, 2.0 * std::f64::consts::PI),
                    })
                    .collect()
            })
            .collect();

        for k in 0..profile.samples_per_user {
            let mut sample_stream = RandomStream::new(derive_seed(
                derive_seed(profile.seed, user as u64),
                (k as u64) | (1 << 32),
            ));
            let len = lo + sample_stream.index(hi - lo + 1);
            let mut seq = Vec::with_capacity(len);
            for i in 0..len {
                let t = i as f64 / (len - 1) as f64;
                let mut row = [0.0; AXES];
                for (a, axis_harmonics) in harmonics.iter().enumerate() {
                    let mut v = 0.0;
                    for h in axis_harmonics {
                        v += h.amplitude
                            * (2.0 * std::f64::consts::PI * h.cycles * t + h.phase).sin();
                    }
                    if profile.noise_sigma > 0.0 {
                        v += profile.noise_sigma * sample_stream.normal();
                    }
                    row[a] = v;
                }
                seq.push(row);
            }
            samples.push(GestureSample::new(user, seq, 100.0)?);
        }
    }
    Dataset::new(samples, profile.num_users)
}

/// Persist a dataset as a versioned text container. Values are printed
/// with Rust's shortest-roundtrip float formatting, so a reload is
/// bit-exact.
pub fn save_dataset<W: Write>(ds: &Dataset, mut w: W) -> Result<()> {
    writeln!(w, "{DATASET_MAGIC}")?;
    writeln!(w, "users {}", ds.num_users)?;
    writeln!(w, "samples {}", ds.len())?;
    for s in &ds.samples {
        writeln!(w, "sample {} {} {}", s.user_id, s.len(), s.sample_rate_hz)?;
        for row in &s.seq {
            writeln!(w, "{} {} {}", row[0], row[1], row[2])?;
        }
    }
    Ok(())
}

pub fn save_dataset_file(ds: &Dataset, path: &Path) -> Result<()> {
    let f = fs::File::create(path)?;
    save_dataset(ds, std::io::BufWriter::new(f))
}

pub fn load_dataset<R: Read>(r: R) -> Result<Dataset> {
    let mut lines = BufReader::new(r).lines();
    let mut next_line = |what: &str| -> Result<String> {
        lines
            .next()
            .ok_or_else(|| Error::Data(format!("truncated dataset file: expected {what}")))?
            .map_err(Error::Io)
    };

    let magic = next_line("magic header")?;
    if magic.trim() != DATASET_MAGIC {
        return Err(Error::Data(format!(
            "bad magic `{magic}`; expected `{DATASET_MAGIC}`"
        )));
    }
    let parse_kv = |line: &str, key: &str| -> Result<usize> {
        let rest = line
            .strip_prefix(key)
            .ok_or_else(|| Error::Data(format!("expected `{key} <n>`, got `{line}`")))?;
        rest.trim()
            .parse()
            .map_err(|_| Error::Data(format!("bad count in `{line}`")))
    };
    let num_users = parse_kv(&next_line("users line")?, "users")?;
    let n_samples = parse_kv(&next_line("samples line")?, "samples")?;

    let mut samples = Vec::with_capacity(n_samples);
    for _ in 0..n_samples {
        let header = next_line("sample header")?;
        let parts: Vec<&str> = header.split_whitespace().collect();
        if parts.len() != 4 || parts[0] != "sample" {
            return Err(Error::Data(format!("bad sample header `{header}`")));
        }
        let user_id: usize = parts[1]
            .parse()
            .map_err(|_| Error::Data(format!("bad user id in `{header}`")))?;
        let len: usize = parts[2]
            .parse()
            .map_err(|_| Error::Data(format!("bad length in `{header}`")))?;
        let rate: f64 = parts[3]
            .parse()
            .map_err(|_| Error::Data(format!("bad sample rate in `{header}`")))?;
        let mut seq = Vec::with_capacity(len);
        for _ in 0..len {
            let row_line = next_line("sample row")?;
            let vals: Vec<f64> = row_line
                .split_whitespace()
                .map(|v| v.parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| Error::Data(format!("bad data row `{row_line}`")))?;
            if vals.len() != AXES {
                return Err(Error::Data(format!(
                    "bad data row `{row_line}`: expected {AXES} values, got {}",
                    vals.len()
                )));
            }
            seq.push([vals[0], vals[1], vals[2]]);
        }
        samples.push(GestureSample::new(user_id, seq, rate)?);
    }
    Dataset::new(samples, num_users)
}

pub fn load_dataset_file(path: &Path) -> Result<Dataset> {
    let f = fs::File::open(path)
        .map_err(|e| Error::Data(format!("cannot open {}: {e}", path.display())))?;
    load_dataset(f)
}
