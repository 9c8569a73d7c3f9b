use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use mzipuf_core::combinatorics::{distinguishable_crp_count, preset_table_csv};
use mzipuf_core::experiments::{emit_artifacts, run_pair, ExperimentConfig};
use mzipuf_core::fabrication::{
    carve_device, fabricate_chip, measure, CarvingPreset, ChipFingerprint, ChipLayout, DeviceInstance, DeviceSpec,
    FabricationParams, NoiseConfig, NoiseSource,
};
use mzipuf_core::metrics::{quantize, Looseness, DEFAULT_BIN_FRACTION};
use mzipuf_core::photonic::build_mesh;
use mzipuf_core::protocol::{audit_collisions, enroll, verify, CrpDatabase, EnrollParams, VerifyPolicy};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Parser)]
#[command(
    name = "mzipuf",
    version,
    about = "Simulator for photonic MZI-mesh physically unclonable functions"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample a chip's fabrication parameters and write its fingerprint.
    Fabricate(FabricateArgs),
    /// Describe a device carved out of a chip.
    Carve(CarveArgs),
    /// Count distinguishable challenge-response pairs.
    CountCrps(CountArgs),
    /// Enroll a device into a CRP database.
    Enroll(EnrollArgs),
    /// Challenge a device and check its response against the database.
    Verify(VerifyArgs),
    /// Report enrolled challenges whose references are identical.
    AuditCollisions(AuditArgs),
    /// Run a small-pair or large-pair campaign and write its artifacts.
    Experiment(ExperimentArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Preset {
    SmallPair,
    LargePair,
}

impl From<Preset> for CarvingPreset {
    fn from(p: Preset) -> Self {
        match p {
            Preset::SmallPair => CarvingPreset::SmallPair,
            Preset::LargePair => CarvingPreset::LargePair,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Which {
    A,
    B,
}

#[derive(Args)]
struct FabricateArgs {
    #[arg(long)]
    seed: u64,
    /// Chip layout covering both devices of a preset.
    #[arg(long, conflicts_with = "columns", required_unless_present = "columns")]
    preset: Option<Preset>,
    /// Chip holding a single pyramid with this many columns.
    #[arg(long)]
    columns: Option<usize>,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    heater_sigma: Option<f64>,
    #[arg(long)]
    coupler_sigma: Option<f64>,
    #[arg(long)]
    ground_loop_db: Option<f64>,
}

#[derive(Args)]
struct CarveArgs {
    #[arg(long)]
    chip: PathBuf,
    #[arg(long, conflicts_with_all = ["columns", "slots"])]
    preset: Option<Preset>,
    /// Device of the preset pair.
    #[arg(long, value_enum, default_value = "a")]
    device: Which,
    /// Pyramid size; without --slots the chip's first MZIs are used in order.
    #[arg(long)]
    columns: Option<usize>,
    /// Comma-separated chip MZI ids, one per slot in column-major order.
    #[arg(long, value_delimiter = ',')]
    slots: Option<Vec<u32>>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct CountArgs {
    /// All eight preset pyramids as CSV.
    #[arg(long, conflicts_with_all = ["columns", "mzis"])]
    table: bool,
    #[arg(long, required_unless_present = "table")]
    columns: Option<u32>,
    #[arg(long, required_unless_present = "table")]
    mzis: Option<u32>,
    #[arg(long, default_value_t = 10)]
    bits: u32,
    /// Print only the exact integer.
    #[arg(long, conflicts_with = "sci")]
    exact: bool,
    /// Print only the 3-significant-figure form.
    #[arg(long)]
    sci: bool,
}

#[derive(Args)]
struct DeviceArgs {
    #[arg(long)]
    chip: PathBuf,
    /// Device descriptor written by `carve`.
    #[arg(long)]
    device: PathBuf,
}

#[derive(Args)]
struct EnrollArgs {
    #[command(flatten)]
    device: DeviceArgs,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 100)]
    challenges: usize,
    #[arg(long, default_value_t = 5)]
    repeats: u32,
    /// Seed for drawing challenges.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 0)]
    noise_seed: u64,
    #[arg(long)]
    no_noise: bool,
    #[arg(long, default_value_t = DEFAULT_BIN_FRACTION)]
    bin_fraction: f64,
    #[arg(long, default_value_t = 2)]
    looseness: u32,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    device: DeviceArgs,
    #[arg(long)]
    db: PathBuf,
    #[arg(long, conflicts_with = "issue", required_unless_present = "issue")]
    challenge_id: Option<u64>,
    /// Draw an unused challenge, mark it consumed and save the database.
    #[arg(long)]
    issue: bool,
    #[arg(long, default_value_t = 0)]
    rng_seed: u64,
    /// Readout noise seed; defaults to one past the enrollment seed.
    #[arg(long)]
    noise_seed: Option<u64>,
    #[arg(long, default_value_t = 0)]
    index: u64,
    #[arg(long)]
    no_noise: bool,
    #[arg(long)]
    looseness: Option<u32>,
    #[arg(long)]
    lhd_threshold: Option<u32>,
    #[arg(long)]
    l2_threshold: Option<f64>,
}

#[derive(Args)]
struct AuditArgs {
    #[arg(long)]
    db: PathBuf,
}

#[derive(Args)]
struct ExperimentArgs {
    #[arg(value_enum)]
    preset: Preset,
    /// Base configuration; flags below override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    challenges: Option<usize>,
    #[arg(long)]
    repeats: Option<usize>,
    /// Chip seed both devices are carved from.
    #[arg(long)]
    seed: Option<u64>,
    /// Carve device B from a chip fabricated with this seed instead.
    #[arg(long)]
    adversary_seed: Option<u64>,
}

fn load_chip(path: &Path) -> Result<Arc<ChipFingerprint>> {
    Ok(Arc::new(
        ChipFingerprint::load(path).with_context(|| format!("loading chip {}", path.display()))?,
    ))
}

fn load_device(args: &DeviceArgs) -> Result<DeviceInstance> {
    let chip = load_chip(&args.chip)?;
    let spec = DeviceSpec::load(&args.device).with_context(|| format!("loading device {}", args.device.display()))?;
    Ok(spec.carve(&chip)?)
}

fn fabricate(args: FabricateArgs) -> Result<()> {
    let mut params = FabricationParams::default();
    if let Some(v) = args.heater_sigma {
        params.heater_sigma = v;
    }
    if let Some(v) = args.coupler_sigma {
        params.coupler_sigma = v;
    }
    if let Some(v) = args.ground_loop_db {
        params.ground_loop_db = v;
    }
    params.validate()?;
    let layout = match (args.preset, args.columns) {
        (Some(p), _) => CarvingPreset::from(p).carving().chip_layout,
        (None, Some(c)) => {
            let mesh = build_mesh(c)?;
            let pairs = mesh.grid_neighbours().into_iter().map(|(a, b)| (a as u32, b as u32));
            ChipLayout::new(mesh.mzi_count() as u32, pairs)?
        }
        (None, None) => bail!("either --preset or --columns is required"),
    };
    let chip = fabricate_chip(args.seed, &layout, &params);
    chip.save(&args.out)?;
    println!(
        "chip seed {} with {} MZIs and {} ground loops written to {}",
        chip.seed,
        chip.mzi_count(),
        chip.ground_loops.len(),
        args.out.display()
    );
    Ok(())
}

fn carve(args: CarveArgs) -> Result<()> {
    let chip = load_chip(&args.chip)?;
    let device = match (args.preset, args.slots) {
        (Some(p), _) => {
            let [a, b] = CarvingPreset::from(p).carve(&chip)?;
            match args.device {
                Which::A => a,
                Which::B => b,
            }
        }
        (None, Some(slots)) => {
            let columns = args.columns.context("--columns is required with --slots")?;
            carve_device(&chip, slots, columns)?
        }
        (None, None) => {
            let columns = args
                .columns
                .context("either --preset or --columns with --slots is required")?;
            carve_device(&chip, (0..build_mesh(columns)?.mzi_count() as u32).collect(), columns)?
        }
    };
    let spec = DeviceSpec::of(&device);
    spec.save(&args.out)?;
    let info = serde_json::json!({
        "columns": spec.columns,
        "mzis": device.mzi_count(),
        "output_modes": device.output_modes(),
        "ground_loops": device.ground_loops().len(),
        "digest": device.descriptor_digest(),
    });
    println!("{}", serde_json::to_string_pretty(&info)?);
    Ok(())
}

fn count_crps(args: CountArgs) -> Result<()> {
    if args.table {
        print!("{}", preset_table_csv(args.bits));
        return Ok(());
    }
    let (columns, mzis) = (args.columns.context("--columns")?, args.mzis.context("--mzis")?);
    let count = distinguishable_crp_count(columns, mzis, args.bits);
    if args.exact {
        println!("{count}");
    } else if args.sci {
        println!("{}", count.to_sci(3));
    } else {
        println!("{count} {}", count.to_sci(3));
    }
    Ok(())
}

fn noise_source(disabled: bool, seed: u64, modes: usize) -> Result<NoiseSource> {
    let config = if disabled {
        NoiseConfig::disabled()
    } else {
        NoiseConfig::default()
    };
    Ok(NoiseSource::new(config, seed, modes)?)
}

fn enroll_cmd(args: EnrollArgs) -> Result<()> {
    let device = load_device(&args.device)?;
    let noise = noise_source(args.no_noise, args.noise_seed, device.output_modes())?;
    let params = EnrollParams {
        challenge_count: args.challenges,
        repeats_per_challenge: args.repeats,
        rng_seed: args.seed,
        bin_fraction: args.bin_fraction,
        looseness: Looseness::new(args.looseness)?,
    };
    let db = enroll(&device, &params, &noise)?;
    db.save(&args.out)?;
    println!(
        "enrolled {} challenges ({} complete collisions) into {}",
        db.len(),
        db.header.collision_count,
        args.out.display()
    );
    Ok(())
}

/// Returns whether the device was accepted.
fn verify_cmd(args: VerifyArgs) -> Result<bool> {
    let device = load_device(&args.device)?;
    let mut db = CrpDatabase::load(&args.db)?;
    let record = match args.challenge_id {
        Some(id) => db.get(id)?.clone(),
        None => {
            let mut rng = ChaCha8Rng::seed_from_u64(args.rng_seed);
            let r = db.issue_challenge(&mut rng)?;
            db.save(&args.db)?;
            r
        }
    };
    let base = db.header.policy.clone().unwrap_or_default();
    let policy = VerifyPolicy::new(
        match args.looseness {
            Some(l) => Looseness::new(l)?,
            None => base.looseness,
        },
        args.lhd_threshold.unwrap_or(base.lhd_threshold),
        args.l2_threshold.unwrap_or(base.l2_threshold),
    )?;
    let seed = args
        .noise_seed
        .unwrap_or(db.header.enrollment.noise_seed.wrapping_add(1));
    let noise = noise_source(args.no_noise, seed, device.output_modes())?;
    let raw = measure(&device, &record.challenge, &noise, args.index)?;
    let response = quantize(&raw, db.header.enrollment.bin_fraction)?;
    let decision = verify(&db, record.challenge_id, &response, &policy)?;
    println!("{}", serde_json::to_string_pretty(&decision)?);
    Ok(decision.accepted)
}

fn audit(args: AuditArgs) -> Result<()> {
    let db = CrpDatabase::load(&args.db)?;
    let report = audit_collisions(db.records());
    println!("{}", serde_json::to_string_pretty(&report)?);
    Ok(())
}

fn experiment(args: ExperimentArgs) -> Result<()> {
    let preset = CarvingPreset::from(args.preset);
    let mut config = match &args.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::for_preset(preset),
    };
    config.preset = preset;
    if let Some(n) = args.challenges {
        config.challenge_count = n;
    }
    if let Some(r) = args.repeats {
        config.repeat_count = r;
    }
    if let Some(s) = args.seed {
        config.chip_seeds = vec![s];
    }
    if args.adversary_seed.is_some() {
        config.adversary_seed = args.adversary_seed;
    }
    let report = run_pair(&config)?;
    let manifest = emit_artifacts(&report, &config, &args.out)?;
    let s = &report.summary;
    println!(
        "preset {} overlap {} challenges {}",
        s.preset, s.overlap, s.challenge_count
    );
    if let Some(u) = s.uniqueness.iter().find(|u| u.looseness == s.looseness) {
        println!("uniqueness at L={}: {:.2}%", u.looseness, u.percent);
    }
    println!("complete collisions: {}", s.collisions.total);
    if let Some(sep) = s.l2_separation {
        println!("l2 separation: {sep:.2} pooled std");
    }
    if let Some(d) = s.l2_histograms_disjoint {
        println!("l2 histograms disjoint: {d}");
    }
    if let Some(l) = s.optimal_looseness {
        println!("optimal looseness: {l}");
    }
    println!("{} files written to {}", manifest.files.len() + 1, args.out.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Fabricate(a) => fabricate(a).map(|_| true),
        Command::Carve(a) => carve(a).map(|_| true),
        Command::CountCrps(a) => count_crps(a).map(|_| true),
        Command::Enroll(a) => enroll_cmd(a).map(|_| true),
        Command::Verify(a) => verify_cmd(a),
        Command::AuditCollisions(a) => audit(a).map(|_| true),
        Command::Experiment(a) => experiment(a).map(|_| true),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        // a rejected device is not an error, but scripts need to see it
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
