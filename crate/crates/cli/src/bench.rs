//! Table-style sweeps over images, wavelets and seeds.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::Args;
use ndarray::Array2;

use wavecs::codec::{decode_with, encode_with};
use wavecs::image_io::read_pgm;
use wavecs::metrics::{format_epsilon, format_psnr, QualityReport};
use wavecs::stats::median;
use wavecs::{EncodeParams, Execution, ThresholdSchedule, WaveletName};

use crate::error::CliError;
use crate::SolverArgs;

pub const CSV_HEADER: [&str; 8] = [
    "image", "wavelet", "seed", "i_cs", "irl", "psnr_db", "epsilon", "status",
];

#[derive(Args)]
pub struct BenchArgs {
    /// PGM images to sweep.
    #[arg(required = true)]
    images: Vec<PathBuf>,
    /// Wavelets to compare, comma separated or repeated (default: all seven).
    #[arg(long = "wavelet", value_delimiter = ',')]
    wavelets: Vec<WaveletName>,
    #[arg(long, default_value_t = 0.75)]
    rr_coarse: f64,
    #[arg(long, default_value_t = 0.75)]
    rr_next: f64,
    /// Seeds as a list of values and inclusive ranges, e.g. `0..9` or `1,4,7..8`.
    #[arg(long, default_value = "0..9")]
    seeds: SeedList,
    #[command(flatten)]
    solver: SolverArgs,
    /// Score the reconstruction after rounding it to 8 bits, as a written PGM would be.
    #[arg(long)]
    quantize: bool,
    /// Output file; standard output when absent.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SeedList(pub Vec<u64>);

impl FromStr for SeedList {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let mut seeds = Vec::new();
        for part in s.split(',').map(str::trim) {
            let parse = |v: &str| {
                v.trim()
                    .parse::<u64>()
                    .map_err(|_| format!("bad seed `{v}`"))
            };
            match part.split_once("..") {
                Some((lo, hi)) => {
                    let (lo, hi) = (parse(lo)?, parse(hi.trim_start_matches('='))?);
                    if lo > hi {
                        return Err(format!("empty seed range `{part}`"));
                    }
                    seeds.extend(lo..=hi);
                }
                None => seeds.push(parse(part)?),
            }
        }
        if seeds.is_empty() {
            return Err("no seeds given".into());
        }
        Ok(SeedList(seeds))
    }
}

struct Cell<'a> {
    image: usize,
    wavelet: WaveletName,
    seed: u64,
    pixels: &'a Result<Array2<f64>, String>,
}

pub fn run(args: &BenchArgs, exec: Execution) -> Result<(), CliError> {
    let schedule = args.solver.schedule()?;
    let wavelets = if args.wavelets.is_empty() {
        WaveletName::ALL.to_vec()
    } else {
        args.wavelets.clone()
    };
    for rr in [args.rr_coarse, args.rr_next] {
        wavecs::codec::measurement_count(rr, 1)?;
    }

    let images: Vec<Result<Array2<f64>, String>> = args
        .images
        .iter()
        .map(|p| {
            read_pgm(p)
                .map(|img| img.into_pixels())
                .map_err(|e| e.to_string())
        })
        .collect();
    let mut cells = Vec::new();
    for (i, pixels) in images.iter().enumerate() {
        for &wavelet in &wavelets {
            for &seed in &args.seeds.0 {
                cells.push(Cell {
                    image: i,
                    wavelet,
                    seed,
                    pixels,
                });
            }
        }
    }
    let results = exec.map(&cells, |c| run_cell(c, args, &schedule, exec));

    let sink: Box<dyn Write> = match &args.csv {
        Some(path) => Box::new(std::fs::File::create(path).map_err(|e| CliError::io(path, e))?),
        None => Box::new(std::io::stdout().lock()),
    };
    let mut w = csv::Writer::from_writer(sink);
    w.write_record(CSV_HEADER)?;
    let per_group = args.seeds.0.len();
    for (group, chunk) in cells.chunks(per_group).zip(results.chunks(per_group)) {
        let label = image_label(&args.images[group[0].image]);
        let wavelet = group[0].wavelet.to_string();
        for (cell, result) in group.iter().zip(chunk) {
            let seed = cell.seed.to_string();
            match result {
                Ok(r) => w.write_record([
                    label.as_str(),
                    &wavelet,
                    &seed,
                    &r.i_cs.to_string(),
                    &format!("{:.1}", r.irl_cs),
                    &format_psnr(r.psnr_db, 2),
                    &format_epsilon(r.epsilon),
                    "ok",
                ])?,
                Err(msg) => w.write_record([
                    label.as_str(),
                    &wavelet,
                    &seed,
                    "",
                    "",
                    "",
                    "",
                    &format!("error: {msg}"),
                ])?,
            }
        }
        w.write_record(aggregate_row(&label, &wavelet, chunk))?;
    }
    w.flush()?;
    Ok(())
}

fn run_cell(
    cell: &Cell,
    args: &BenchArgs,
    schedule: &ThresholdSchedule,
    exec: Execution,
) -> Result<QualityReport, String> {
    let pixels = cell.pixels.as_ref().map_err(Clone::clone)?;
    let params = EncodeParams {
        wavelet: cell.wavelet,
        rr_coarse: args.rr_coarse,
        rr_next: args.rr_next,
        seed: cell.seed,
    };
    let inner = || -> wavecs::Result<QualityReport> {
        let payload = encode_with(pixels.view(), &params, exec)?;
        let decoded = decode_with(&payload, schedule, exec)?;
        if args.quantize {
            QualityReport::evaluate_quantized(pixels.view(), decoded.image.view(), payload.i_cs())
        } else {
            QualityReport::evaluate(pixels.view(), decoded.image.view(), payload.i_cs())
        }
    };
    inner().map_err(|e| e.to_string())
}

fn image_label(path: &Path) -> String {
    path.file_stem()
        .unwrap_or(path.as_os_str())
        .to_string_lossy()
        .into_owned()
}

/// Median PSNR and ε over the successful runs of one (image, wavelet) group.
fn aggregate_row(
    label: &str,
    wavelet: &str,
    results: &[Result<QualityReport, String>],
) -> Vec<String> {
    let ok: Vec<&QualityReport> = results.iter().filter_map(|r| r.as_ref().ok()).collect();
    let status = format!("median {}/{}", ok.len(), results.len());
    let mut row = vec![label.to_string(), wavelet.to_string(), "median".to_string()];
    match ok.first() {
        Some(first) => {
            let psnrs: Vec<f64> = ok.iter().map(|r| r.psnr_db).collect();
            let eps: Vec<f64> = ok.iter().map(|r| r.epsilon).collect();
            row.extend([
                first.i_cs.to_string(),
                format!("{:.1}", first.irl_cs),
                format_psnr(median(&psnrs).expect("nonempty"), 2),
                format_epsilon(median(&eps).expect("nonempty")),
            ]);
        }
        None => row.extend(["", "", "", ""].map(String::from)),
    }
    row.push(status);
    row
}
