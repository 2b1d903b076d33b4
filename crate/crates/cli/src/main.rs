//! Command-line frontend: kernel inspection, cost maps, coded embedding
//! and extraction, the statistical simulator, diff maps, and change
//! statistics.
//!
//! Exit status is 0 on success; errors map to documented codes: 2 usage
//! (from the parser), 3 I/O, 4 malformed image or raster file, 5 contract
//! violation (dimensions, parameters), 6 infeasible payload or solver
//! failure.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use d2steg_core as core;
use d2steg_core::{
    Border, CostMap, DerivKind, Error, GradientName, Image, Kernel, KernelFamily, Message,
    StegoKey, DEFAULT_CONSTRAINT_HEIGHT, DEFAULT_P, DEFAULT_WET_COST,
};

#[derive(Parser)]
#[command(
    name = "d2steg",
    version,
    about = "Adaptive grayscale steganography driven by second-order image structure",
    after_help = "Exit codes: 0 ok, 2 usage, 3 i/o, 4 bad image file, 5 contract violation, 6 infeasible payload."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyArg {
    Ky,
    Ko,
}

impl From<FamilyArg> for KernelFamily {
    fn from(f: FamilyArg) -> Self {
        match f {
            FamilyArg::Ky => KernelFamily::Ky,
            FamilyArg::Ko => KernelFamily::Ko,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum SourceArg {
    Classic,
    Ky,
    Ko,
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    X2,
    Y2,
    Xy,
}

impl From<KindArg> for DerivKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::X2 => DerivKind::X2,
            KindArg::Y2 => DerivKind::Y2,
            KindArg::Xy => DerivKind::Xy,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum NameArg {
    Sobel,
    Prewitt,
    CentralDifference,
    IntermediateDifference,
}

impl From<NameArg> for GradientName {
    fn from(n: NameArg) -> Self {
        match n {
            NameArg::Sobel => GradientName::Sobel,
            NameArg::Prewitt => GradientName::Prewitt,
            NameArg::CentralDifference => GradientName::CentralDifference,
            NameArg::IntermediateDifference => GradientName::IntermediateDifference,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum BorderArg {
    Mirror,
    Replicate,
}

impl From<BorderArg> for Border {
    fn from(b: BorderArg) -> Self {
        match b {
            BorderArg::Mirror => Border::Mirror,
            BorderArg::Replicate => Border::Replicate,
        }
    }
}

/// Flags shared by every command that derives a cost map.
#[derive(Args)]
struct CostArgs {
    /// Kernel family
    #[arg(long, value_enum, default_value = "ky")]
    family: FamilyArg,
    /// Largest kernel scale; defaults to 4 for ky and 12 for ko
    #[arg(long = "N")]
    n: Option<u32>,
    /// Hölder exponent (negative)
    #[arg(long, default_value_t = DEFAULT_P, allow_negative_numbers = true)]
    p: f64,
    /// Border extension policy
    #[arg(long, value_enum, default_value = "mirror")]
    border: BorderArg,
}

impl CostArgs {
    fn build(&self, img: &Image, wet_cost: f64) -> core::Result<CostMap> {
        let family: KernelFamily = self.family.into();
        let n = self.n.unwrap_or_else(|| family.default_n());
        let field = core::build_field(img, family, n, self.border.into())?;
        core::cost_map(&field, self.p, wet_cost)
    }

    fn resolved_n(&self) -> u32 {
        let family: KernelFamily = self.family.into();
        self.n.unwrap_or_else(|| family.default_n())
    }

    fn family_str(&self) -> &'static str {
        KernelFamily::from(self.family).as_str()
    }
}

#[derive(Subcommand)]
enum Command {
    /// Print a derivative kernel as exact rationals
    Kernels {
        /// Kernel source: the classical 3x3 operators or a generated family
        #[arg(long, value_enum)]
        family: SourceArg,
        /// Which second derivative
        #[arg(long, value_enum)]
        kind: KindArg,
        /// Kernel scale (window is 2n+1); ignored for classic
        #[arg(long, default_value_t = 1)]
        n: u32,
        /// Classical operator name (classic family only)
        #[arg(long, value_enum)]
        name: Option<NameArg>,
    },
    /// Compute the per-pixel cost map of a cover image
    Costmap {
        #[arg(long = "in")]
        input: PathBuf,
        #[command(flatten)]
        cost: CostArgs,
        /// Sentinel cost for untouchable pixels
        #[arg(long, default_value_t = DEFAULT_WET_COST)]
        wet_cost: f64,
        /// Output .f32 raster (8-byte header, little-endian f32 samples)
        #[arg(long)]
        out: PathBuf,
        /// Optional 8-bit rendering of -log(cost)
        #[arg(long)]
        viz: Option<PathBuf>,
    },
    /// Embed a message file into a cover image (coded, extractable)
    Embed {
        #[arg(long = "in")]
        input: PathBuf,
        /// Raw message bytes, MSB-first
        #[arg(long)]
        msg: PathBuf,
        /// Payload in bits per pixel (0, 0.5]
        #[arg(long)]
        alpha: f64,
        /// 64-bit key seed
        #[arg(long)]
        key: u64,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        cost: CostArgs,
        /// Trellis constraint height (6..=12)
        #[arg(long, default_value_t = DEFAULT_CONSTRAINT_HEIGHT)]
        height: u32,
    },
    /// Recover a message from a stego image and key
    Extract {
        #[arg(long = "in")]
        input: PathBuf,
        /// Key seed; defaults to the stego's sidecar record
        #[arg(long)]
        key: Option<u64>,
        /// Message length in bits; defaults to the sidecar's alpha
        #[arg(long)]
        len_bits: Option<usize>,
        /// Trellis constraint height; defaults to the sidecar, then 7
        #[arg(long)]
        height: Option<u32>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Statistical payload-limited sender (no extraction)
    Simulate {
        #[arg(long = "in")]
        input: PathBuf,
        /// Payload in bits per pixel (0, 1]
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        key: u64,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        cost: CostArgs,
    },
    /// Render the change locations between a cover and a stego image
    Diffmap {
        #[arg(long)]
        cover: PathBuf,
        #[arg(long)]
        stego: PathBuf,
        /// Output PGM: 128 + 127 * delta
        #[arg(long)]
        out: PathBuf,
    },
    /// Print change statistics as a JSON object
    Stats {
        #[arg(long)]
        cover: PathBuf,
        #[arg(long)]
        stego: PathBuf,
        #[command(flatten)]
        cost: CostArgs,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("d2steg: {err}");
            ExitCode::from(exit_code(&err))
        }
    }
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Io { .. } => 3,
        Error::UnsupportedFormat { .. }
        | Error::MalformedHeader { .. }
        | Error::UnsupportedMaxval { .. }
        | Error::BadDimensions { .. }
        | Error::TruncatedPayload { .. }
        | Error::SampleOutOfRange { .. } => 4,
        Error::DimensionMismatch { .. }
        | Error::NonUnitChange { .. }
        | Error::KernelTooLarge { .. }
        | Error::InvalidParameter(_) => 5,
        Error::InfeasiblePayload(_) | Error::NoConvergence { .. } => 6,
    }
}

/// Write through a temp file in the destination directory, then rename.
fn write_atomic(path: &Path, bytes: &[u8]) -> core::Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty());
    let mut tmp = tempfile::NamedTempFile::new_in(dir.unwrap_or(Path::new(".")))
        .map_err(|e| Error::io(path, e))?;
    tmp.write_all(bytes).map_err(|e| Error::io(path, e))?;
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

fn save_image_atomic(img: &Image, path: &Path) -> core::Result<()> {
    write_atomic(path, &core::image::encode_p5(img))
}

fn sidecar_path(stego: &Path) -> PathBuf {
    let mut name = stego.file_name().unwrap_or_default().to_os_string();
    name.push(".meta");
    stego.with_file_name(name)
}

fn write_sidecar(
    stego: &Path,
    key: u64,
    alpha: f64,
    cost: &CostArgs,
    constraint_height: u32,
) -> core::Result<()> {
    let text = format!(
        "key = {key}\nalpha = {alpha}\nfamily = {}\nn = {}\np = {}\nconstraint_height = {constraint_height}\n",
        cost.family_str(),
        cost.resolved_n(),
        cost.p,
    );
    write_atomic(&sidecar_path(stego), text.as_bytes())
}

#[derive(Default)]
struct Sidecar {
    key: Option<u64>,
    alpha: Option<f64>,
    constraint_height: Option<u32>,
}

fn read_sidecar(stego: &Path) -> Sidecar {
    let mut rec = Sidecar::default();
    let Ok(text) = fs::read_to_string(sidecar_path(stego)) else {
        return rec;
    };
    for line in text.lines() {
        let Some((k, v)) = line.split_once('=') else {
            continue;
        };
        let (k, v) = (k.trim(), v.trim());
        match k {
            "key" => rec.key = v.parse().ok(),
            "alpha" => rec.alpha = v.parse().ok(),
            "constraint_height" => rec.constraint_height = v.parse().ok(),
            _ => {}
        }
    }
    rec
}

fn run(command: Command) -> core::Result<()> {
    match command {
        Command::Kernels {
            family,
            kind,
            n,
            name,
        } => {
            let kernel = kernel_for(family, kind.into(), n, name)?;
            print!("{}", kernel.dump());
            Ok(())
        }

        Command::Costmap {
            input,
            cost,
            wet_cost,
            out,
            viz,
        } => {
            let img = core::load_image(&input)?;
            let map = cost.build(&img, wet_cost)?;
            write_atomic(
                &out,
                &core::raster::encode_f32_raster(map.width(), map.height(), map.costs()),
            )?;
            if let Some(viz_path) = viz {
                save_image_atomic(&map.visualization(), &viz_path)?;
            }
            Ok(())
        }

        Command::Embed {
            input,
            msg,
            alpha,
            key,
            out,
            cost,
            height,
        } => {
            let img = core::load_image(&input)?;
            let mut params = core::EmbedParams::new(alpha);
            params.family = cost.family.into();
            params.n_max = cost.resolved_n();
            params.p = cost.p;
            params.constraint_height = height;
            params.validate(img.pixel_count())?;

            let bits = core::message_bits_for(alpha, img.pixel_count());
            let payload = fs::read(&msg).map_err(|e| Error::io(&msg, e))?;
            let message = Message::from_bytes(&payload, bits)?;
            let map = cost.build(&img, DEFAULT_WET_COST)?;
            let stego = core::embed(&img, &map, &message, StegoKey::new(key), height)?;
            save_image_atomic(&stego, &out)?;
            write_sidecar(&out, key, alpha, &cost, height)?;
            Ok(())
        }

        Command::Extract {
            input,
            key,
            len_bits,
            height,
            out,
        } => {
            let img = core::load_image(&input)?;
            let sidecar = read_sidecar(&input);
            let key = key.or(sidecar.key).ok_or_else(|| {
                Error::InvalidParameter(
                    "no --key given and no sidecar record next to the stego".into(),
                )
            })?;
            let len_bits = len_bits
                .or_else(|| {
                    sidecar
                        .alpha
                        .map(|a| core::message_bits_for(a, img.pixel_count()))
                })
                .ok_or_else(|| {
                    Error::InvalidParameter(
                        "no --len-bits given and no sidecar record next to the stego".into(),
                    )
                })?;
            let height = height
                .or(sidecar.constraint_height)
                .unwrap_or(DEFAULT_CONSTRAINT_HEIGHT);

            let message = core::extract(&img, StegoKey::new(key), len_bits, height)?;
            write_atomic(&out, &message.to_bytes())?;
            Ok(())
        }

        Command::Simulate {
            input,
            alpha,
            key,
            out,
            cost,
        } => {
            let img = core::load_image(&input)?;
            let map = cost.build(&img, DEFAULT_WET_COST)?;
            let stego = core::simulate(&img, &map, alpha, StegoKey::new(key))?;
            save_image_atomic(&stego, &out)?;
            write_sidecar(&out, key, alpha, &cost, DEFAULT_CONSTRAINT_HEIGHT)?;
            Ok(())
        }

        Command::Diffmap { cover, stego, out } => {
            let cover = core::load_image(&cover)?;
            let stego = core::load_image(&stego)?;
            let map = core::diff(&cover, &stego)?;
            save_image_atomic(&map.render(), &out)
        }

        Command::Stats {
            cover,
            stego,
            cost,
        } => {
            let cover = core::load_image(&cover)?;
            let stego = core::load_image(&stego)?;
            let map = cost.build(&cover, DEFAULT_WET_COST)?;
            let stats = core::change_stats(&cover, &stego, &map)?;
            println!("{}", stats.to_json());
            Ok(())
        }
    }
}

fn kernel_for(
    family: SourceArg,
    kind: DerivKind,
    n: u32,
    name: Option<NameArg>,
) -> core::Result<Kernel> {
    match family {
        SourceArg::Classic => {
            let name = name.ok_or_else(|| {
                Error::InvalidParameter("--name is required with --family classic".into())
            })?;
            Ok(core::classic_second_order(name.into(), kind))
        }
        SourceArg::Ky => match kind {
            DerivKind::X2 => core::ky_x2(n),
            DerivKind::Y2 => Ok(core::rotate_90(&core::ky_x2(n)?)),
            DerivKind::Xy => core::ky_xy(n),
        },
        SourceArg::Ko => match kind {
            DerivKind::X2 => core::ko_x2(n),
            DerivKind::Y2 => Ok(core::rotate_90(&core::ko_x2(n)?)),
            DerivKind::Xy => core::ko_xy(n),
        },
    }
}
