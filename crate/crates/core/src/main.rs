use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};

use embedmap::codec;
use embedmap::composite::composite_over;
use embedmap::envmap::{convert, load_envmap, save_envmap, MapShape, Parameterization};
use embedmap::matte::{DEFAULT_KEY_T0, DEFAULT_KEY_T1};
use embedmap::par::{available_workers, with_workers, Exec};
use embedmap::pipeline::{parse_size, run_pipeline, PipelineConfig, RunOptions};
use embedmap::render::{load_scene, render_reflection};
use embedmap::rig::{frame_path, load_frames, load_rig, matte_capture, Matter, Matting};
use embedmap::synthetic::{AnalyticEnv, Billboard, FrameFormat, SyntheticRig, SyntheticRigSpec};
use embedmap::warp::{build_envmap_with, WarpTarget};

#[derive(Parser)]
#[command(name = "embedmap", version, about = "Build, composite and reflect spherical environment maps")]
struct Cli {
    /// Worker threads (default: machine parallelism)
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[arg(long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic capture rig with ground truth
    GenRig(GenRigArgs),
    /// Warp and merge one rig frame into an environment map
    BuildEnvmap(BuildArgs),
    /// Composite a foreground map over a background map
    Composite {
        #[arg(long)]
        fg: PathBuf,
        #[arg(long)]
        bg: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Render the scene reflecting an environment map
    Render {
        #[arg(long)]
        scene: PathBuf,
        #[arg(long)]
        env: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Resample a map into another parameterization
    Convert {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        param: Parameterization,
        #[arg(long)]
        size: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the frame pipeline described by a config file
    Pipeline {
        #[arg(long)]
        config: PathBuf,
    },
    /// Time the pipeline without writing images
    Bench {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value_t = 3)]
        repeat: u32,
    },
}

#[derive(Args)]
struct GenRigArgs {
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 6)]
    cameras: usize,
    #[arg(long, default_value_t = 90.0)]
    fov: f64,
    #[arg(long, default_value = "256x256")]
    size: String,
    /// gradient, color-wheel, disc-light or an R,G,B constant
    #[arg(long, default_value = "gradient")]
    env: String,
    #[arg(long, default_value_t = 1)]
    frames: u32,
    #[arg(long, default_value = "256x128")]
    gt_size: String,
    #[arg(long, default_value = "png")]
    format: String,
    /// Billboard start as AZ,EL degrees; enables the moving user
    #[arg(long)]
    user_from: Option<String>,
    #[arg(long)]
    user_to: Option<String>,
    #[arg(long, default_value_t = 20.0)]
    user_radius: f64,
    #[arg(long, default_value = "1,0,0")]
    user_color: String,
}

#[derive(Args)]
struct BuildArgs {
    #[arg(long)]
    rig: PathBuf,
    #[arg(long)]
    frame: u32,
    #[arg(long, default_value = "latlong")]
    param: Parameterization,
    #[arg(long, default_value = "512x256")]
    size: String,
    /// Output path pattern, e.g. user_%05d.pfm
    #[arg(long)]
    out: String,
    /// Clean plate image; `{cam}` expands to the camera index
    #[arg(long)]
    clean_plate: Option<String>,
    #[arg(long, default_value_t = DEFAULT_KEY_T0)]
    key_t0: f32,
    #[arg(long, default_value_t = DEFAULT_KEY_T1)]
    key_t1: f32,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let level = if cli.quiet { "error" } else { "info" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<u8> {
    let threads = cli.threads.unwrap_or_else(available_workers);
    match cli.command {
        Command::Pipeline { config } => run_configured(&config, cli.threads, RunOptions::default(), cli.quiet),
        Command::Bench { config, repeat } => {
            run_configured(&config, cli.threads, RunOptions { write_outputs: false, repeat }, cli.quiet)
        }
        cmd => with_workers(threads, || run_stage(cmd)).map(|()| 0),
    }
}

fn run_configured(config: &Path, threads: Option<usize>, opts: RunOptions, quiet: bool) -> anyhow::Result<u8> {
    let (mut cfg, base) = PipelineConfig::load(config).with_context(|| format!("loading {}", config.display()))?;
    if let Some(t) = threads {
        cfg.workers = t.max(1);
    }
    let run = run_pipeline(&cfg, &base, opts)?;
    match run.report() {
        Ok(report) if !quiet => println!("{report}"),
        Ok(_) => {}
        Err(_) => eprintln!("no frames completed"),
    }
    for e in &run.errors {
        eprintln!("frame {}: {}", e.frame, e.message);
    }
    Ok(run.exit_code() as u8)
}

fn run_stage(cmd: Command) -> anyhow::Result<()> {
    match cmd {
        Command::GenRig(args) => gen_rig(args),
        Command::BuildEnvmap(args) => build_envmap(args),
        Command::Composite { fg, bg, out } => {
            let fg = load_envmap(&fg).with_context(|| format!("loading {}", fg.display()))?;
            let bg = load_envmap(&bg).with_context(|| format!("loading {}", bg.display()))?;
            save_envmap(&out, &composite_over(&fg, &bg)?)?;
            Ok(())
        }
        Command::Render { scene, env, out } => {
            let scene = load_scene(&scene).with_context(|| format!("loading {}", scene.display()))?;
            let env = load_envmap(&env).with_context(|| format!("loading {}", env.display()))?;
            codec::write_rgb(&out, &render_reflection(&scene, &env)?.image)?;
            Ok(())
        }
        Command::Convert { input, param, size, out } => {
            let (w, h) = parse_size(&size)?;
            let map = load_envmap(&input).with_context(|| format!("loading {}", input.display()))?;
            save_envmap(&out, &convert(&map, param, w, h)?)?;
            Ok(())
        }
        Command::Pipeline { .. } | Command::Bench { .. } => unreachable!("handled by run"),
    }
}

fn build_envmap(args: BuildArgs) -> anyhow::Result<()> {
    let (w, h) = parse_size(&args.size)?;
    let target = WarpTarget::new(MapShape::new(w, h, args.param)?);
    let rig = load_rig(&args.rig).with_context(|| format!("loading {}", args.rig.display()))?;
    let matting = match args.clean_plate {
        Some(plate) => Matting::CleanPlate { plate, t0: args.key_t0, t1: args.key_t1 },
        None => Matting::Alpha,
    };
    let matter = Matter::new(&matting, &rig)?;
    let frames = load_frames(&rig, args.frame)?;
    let capture = matte_capture(Exec::default(), &rig, &matter, args.frame, &frames)?;
    let map = build_envmap_with(Exec::default(), &capture, &target)?;
    save_envmap(&frame_path(&args.out, args.frame), &map)?;
    Ok(())
}

fn parse_pair(s: &str) -> anyhow::Result<[f64; 2]> {
    let v: Vec<f64> = s.split(',').map(|p| p.trim().parse()).collect::<Result<_, _>>()?;
    match v.as_slice() {
        [a, b] => Ok([*a, *b]),
        _ => bail!("expected AZ,EL, got {s:?}"),
    }
}

fn gen_rig(args: GenRigArgs) -> anyhow::Result<()> {
    let (width, height) = parse_size(&args.size)?;
    let (gw, gh) = parse_size(&args.gt_size)?;
    let format = match args.format.as_str() {
        "png" => FrameFormat::Png,
        "pfm" => FrameFormat::Pfm,
        other => bail!("unknown frame format {other:?}"),
    };
    let user = match args.user_from {
        Some(from) => {
            let from = parse_pair(&from)?;
            let to = args.user_to.as_deref().map(parse_pair).transpose()?.unwrap_or(from);
            let color: Vec<f32> = args.user_color.split(',').map(|c| c.trim().parse()).collect::<Result<_, _>>()?;
            let color = <[f32; 3]>::try_from(color).map_err(|_| anyhow::anyhow!("--user-color needs R,G,B"))?;
            Some(Billboard { from, to, radius_deg: args.user_radius, color })
        }
        None => None,
    };
    let spec = SyntheticRigSpec {
        cameras: args.cameras,
        fov_deg: args.fov,
        width,
        height,
        env: AnalyticEnv::parse(&args.env)?,
        frames: args.frames,
        user,
        format,
        ground_truth: [gw, gh],
    };
    SyntheticRig::new(spec)?.write(&args.out)?;
    Ok(())
}
