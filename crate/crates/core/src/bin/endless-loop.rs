use std::fs;
use std::net::SocketAddr;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use endless_loop::autodirect::{suggest_directions, DEFAULT_MAX_DIRECTIONS};
use endless_loop::descriptor::{compute_descriptors, DescriptorBackend};
use endless_loop::pipeline::{run_pipeline, service, write_outputs, DirectionSpec, ProjectConfig, SolverMode, StrokeFile};
use endless_loop::raster::io::read_image;
use endless_loop::{Error, Stage};

#[derive(Parser)]
#[command(name = "endless-loop", version, about = "Turn a still image of a repeating pattern into a seamless loop")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Crf,
    Unary,
}

#[derive(Subcommand)]
enum Command {
    /// Build a loop from an image and a mask.
    Run {
        #[arg(long)]
        image: PathBuf,
        #[arg(long)]
        mask: PathBuf,
        /// Global motion direction in degrees (x right, y down).
        #[arg(long, conflicts_with_all = ["strokes", "auto_direction"])]
        direction: Option<f64>,
        /// JSON file with direction strokes.
        #[arg(long, conflicts_with = "auto_direction")]
        strokes: Option<PathBuf>,
        #[arg(long)]
        auto_direction: bool,
        #[arg(long)]
        soft_boundary: bool,
        #[arg(long, default_value_t = 80)]
        frames: usize,
        #[arg(long, default_value_t = 30.0)]
        fps: f64,
        #[arg(long, value_enum, default_value_t = Mode::Crf)]
        mode: Mode,
        /// Directory for PNG frames and loop.json.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        gif: Option<PathBuf>,
        #[arg(long)]
        debug_dir: Option<PathBuf>,
        /// JSON config; command-line flags override its fields.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Print suggested motion directions for an image.
    Suggest {
        #[arg(long)]
        image: PathBuf,
        #[arg(long, default_value_t = 200)]
        corners: usize,
    },
    /// Run the HTTP job service.
    Serve {
        #[arg(long, default_value = "127.0.0.1:8080")]
        bind: SocketAddr,
        #[arg(long, default_value_t = 2)]
        workers: usize,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match dispatch(Cli::parse().command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            match e.stage_tag() {
                Some(s) => eprintln!("error [{}] ({s}): {e}", e.code()),
                None => eprintln!("error [{}]: {e}", e.code()),
            }
            ExitCode::from(1)
        }
    }
}

fn dispatch(cmd: Command) -> Result<(), Error> {
    match cmd {
        Command::Run {
            image,
            mask,
            direction,
            strokes,
            auto_direction,
            soft_boundary,
            frames,
            fps,
            mode,
            out,
            gif,
            debug_dir,
            config,
            threads,
        } => {
            let mut cfg = match config {
                Some(p) => serde_json::from_slice(&fs::read(&p)?)?,
                None => ProjectConfig::default(),
            };
            cfg.image = Some(image.clone());
            cfg.mask = Some(mask.clone());
            if let Some(d) = direction {
                cfg.direction = DirectionSpec::Angle { degrees: d };
            } else if let Some(s) = strokes {
                let text = fs::read_to_string(&s)?;
                cfg.direction = DirectionSpec::Strokes { strokes: StrokeFile::parse(&text)? };
            } else if auto_direction {
                cfg.direction = DirectionSpec::Auto;
            }
            cfg.soft_boundary |= soft_boundary;
            cfg.frames = frames;
            cfg.fps = fps;
            cfg.mode = match mode {
                Mode::Crf => SolverMode::Crf,
                Mode::Unary => SolverMode::UnaryOnly,
            };
            if threads.is_some() {
                cfg.threads = threads;
            }
            if out.is_none() && gif.is_none() {
                log::warn!("neither --out nor --gif given; nothing will be written");
            }
            let result = run_pipeline(&cfg, debug_dir.as_deref())?;
            for w in &result.diagnostics.warnings {
                log::warn!("{w}");
            }
            let hash = cfg.content_hash(&fs::read(&image)?, &fs::read(&mask)?);
            let written = write_outputs(&result, cfg.fps, &hash, out.as_deref(), gif.as_deref())
                .map_err(|e| e.at(Stage::Encode))?;
            for t in &result.diagnostics.timings {
                log::info!("{:>12} {:8.3}s", t.stage, t.seconds);
            }
            log::info!("total {:.3}s, {} files written", result.diagnostics.total_seconds, written.len());
            Ok(())
        }
        Command::Suggest { image, corners } => {
            let img = read_image(&image).map_err(|e| e.at(Stage::Load))?;
            let desc = compute_descriptors(&img, &DescriptorBackend::default())?;
            let vote = suggest_directions(&img, &desc, corners, DEFAULT_MAX_DIRECTIONS)?;
            let dirs: Vec<_> = vote
                .winners
                .iter()
                .map(|w| service::SuggestedJson { x: w.direction.x, y: w.direction.y, votes: w.votes, angle_deg: w.angle_deg })
                .collect();
            println!("{}", serde_json::to_string_pretty(&service::SuggestResponse { directions: dirs })?);
            Ok(())
        }
        Command::Serve { bind, workers } => {
            let rt = tokio::runtime::Runtime::new()?;
            rt.block_on(service::serve(bind, workers))?;
            Ok(())
        }
    }
}
