use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use wavecs::format::{read_payload, write_payload};
use wavecs::image_io::{read_pgm, write_pgm, GrayImage};
use wavecs::metrics::{
    detect_objects, format_epsilon, format_psnr, irl_cs, mse_and_epsilon, psnr_from_mse,
    DEFAULT_DETECTION_K,
};
use wavecs::{EncodeParams, Execution, ThresholdSchedule, WaveletName};

mod bench;
mod error;

use error::CliError;

#[derive(Parser)]
#[command(
    name = "wavecs",
    version,
    about = "Compressed sensing of grayscale images in wavelet domains"
)]
struct Cli {
    /// Run every stage on the calling thread.
    #[arg(long, global = true)]
    sequential: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Encode a square power-of-two PGM into a .wcs payload.
    Compress {
        input: PathBuf,
        output: PathBuf,
        #[command(flatten)]
        codec: CodecArgs,
    },
    /// Reconstruct a PGM from a .wcs payload.
    Decompress {
        input: PathBuf,
        output: PathBuf,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Print PSNR and recover error of a reconstruction.
    Eval {
        reference: PathBuf,
        reconstruction: PathBuf,
    },
    /// Encode, decode and evaluate every (image, wavelet, seed) combination.
    Bench(bench::BenchArgs),
    /// Write a 0/255 mask of pixels above median + k * sigma.
    Detect {
        input: PathBuf,
        output: PathBuf,
        /// Threshold multiplier on the MAD-based noise estimate.
        #[arg(long, default_value_t = DEFAULT_DETECTION_K)]
        k: f64,
    },
}

#[derive(Args, Clone, Copy)]
pub struct CodecArgs {
    #[arg(long, default_value = "symmlet-8")]
    wavelet: WaveletName,
    #[arg(long, default_value_t = 0.75)]
    rr_coarse: f64,
    #[arg(long, default_value_t = 0.75)]
    rr_next: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args, Clone, Copy)]
pub struct SolverArgs {
    #[arg(long, default_value_t = ThresholdSchedule::DEFAULT_ITERATIONS)]
    iterations: usize,
    #[arg(long, default_value_t = ThresholdSchedule::DEFAULT_ALPHA_MAX)]
    alpha_max: f64,
    #[arg(long, default_value_t = ThresholdSchedule::DEFAULT_ALPHA_MIN)]
    alpha_min: f64,
}

impl SolverArgs {
    pub fn schedule(&self) -> Result<ThresholdSchedule, CliError> {
        Ok(ThresholdSchedule::linear(
            self.alpha_max,
            self.alpha_min,
            self.iterations,
        )?)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let exec = if cli.sequential {
        Execution::Sequential
    } else {
        Execution::Parallel
    };
    match run(cli.command, exec) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn run(command: Command, exec: Execution) -> Result<(), CliError> {
    match command {
        Command::Compress {
            input,
            output,
            codec,
        } => compress(&input, &output, codec, exec),
        Command::Decompress {
            input,
            output,
            solver,
        } => decompress(&input, &output, solver, exec),
        Command::Eval {
            reference,
            reconstruction,
        } => eval(&reference, &reconstruction),
        Command::Bench(args) => bench::run(&args, exec),
        Command::Detect { input, output, k } => detect(&input, &output, k),
    }
}

fn compress(
    input: &Path,
    output: &Path,
    codec: CodecArgs,
    exec: Execution,
) -> Result<(), CliError> {
    let image = read_pgm(input).map_err(|e| CliError::from(e).at(input))?;
    let params = EncodeParams {
        wavelet: codec.wavelet,
        rr_coarse: codec.rr_coarse,
        rr_next: codec.rr_next,
        seed: codec.seed,
    };
    let payload = wavecs::codec::encode_with(image.pixels().view(), &params, exec)?;
    let mut w = BufWriter::new(File::create(output).map_err(|e| CliError::io(output, e))?);
    write_payload(&mut w, &payload)?;
    w.flush().map_err(|e| CliError::io(output, e))?;
    let pixels = image.width() as u64 * image.height() as u64;
    let irl = irl_cs(pixels, payload.i_cs() as u64)?;
    println!("i_cs={} irl={irl:.1}", payload.i_cs());
    Ok(())
}

fn decompress(
    input: &Path,
    output: &Path,
    solver: SolverArgs,
    exec: Execution,
) -> Result<(), CliError> {
    let schedule = solver.schedule()?;
    let file = File::open(input).map_err(|e| CliError::io(input, e))?;
    let payload = read_payload(BufReader::new(file)).map_err(|e| CliError::from(e).at(input))?;
    let decoded = wavecs::codec::decode_with(&payload, &schedule, exec)?;
    write_pgm(&GrayImage::new(decoded.image)?, output).map_err(|e| CliError::from(e).at(output))?;
    println!(
        "residual_coarse={:.6e} residual_next={:.6e}",
        decoded.coarse.final_residual(),
        decoded.next.final_residual()
    );
    Ok(())
}

fn eval(reference: &Path, reconstruction: &Path) -> Result<(), CliError> {
    let a = read_pgm(reference).map_err(|e| CliError::from(e).at(reference))?;
    let b = read_pgm(reconstruction).map_err(|e| CliError::from(e).at(reconstruction))?;
    if a.pixels().dim() != b.pixels().dim() {
        return Err(CliError::Invalid(format!(
            "size mismatch: {}x{} vs {}x{}",
            a.width(),
            a.height(),
            b.width(),
            b.height()
        )));
    }
    let (mse, epsilon) = mse_and_epsilon(a.pixels().view(), b.pixels().view())?;
    println!(
        "psnr={} epsilon={}",
        format_psnr(psnr_from_mse(mse), 3),
        format_epsilon(epsilon)
    );
    Ok(())
}

fn detect(input: &Path, output: &Path, k: f64) -> Result<(), CliError> {
    let image = read_pgm(input).map_err(|e| CliError::from(e).at(input))?;
    let mask = detect_objects(image.pixels().view(), k)?;
    let count = mask.iter().filter(|&&m| m).count();
    let mask = GrayImage::new(mask.mapv(|m| if m { 255.0 } else { 0.0 }))?;
    write_pgm(&mask, output).map_err(|e| CliError::from(e).at(output))?;
    println!("flagged={count}");
    Ok(())
}
