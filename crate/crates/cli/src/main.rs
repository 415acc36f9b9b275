use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, CommandFactory, Parser, Subcommand};

use wlab::flow::{wigner_flow, FlowField, SeriesPolicy};
use wlab::io::{self, Field, StoredFlow};
use wlab::propagation::{imaginary_time_ground_state, DEFAULT_GROUND_DT, DEFAULT_GROUND_TOL};
use wlab::render::{self, RenderSpec, Style};
use wlab::scenarios::{self, ScenarioKind, ScenarioSpec};
use wlab::tomography::{self, square_grid, uniform_angles};
use wlab::wigner::{self, wigner_transform_guarded, WignerGrid};
use wlab::{Constants, Error, Grid1D, Result};

#[derive(Parser)]
#[command(name = "wlab", version, about = "Phase-space quantum mechanics on a grid")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a canned experiment and write its artifacts and manifest.
    Scenario {
        /// free_packet, ho_eigenstate, anharmonic_ground or barrier
        name: String,
        /// Parameter override, repeatable.
        #[arg(long = "param", value_name = "KEY=VALUE")]
        params: Vec<String>,
        /// key=value file applied before any --param.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Wigner transform of a stored wave function.
    Wigner {
        state: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Boundary amplitude tolerated, relative to the peak.
        #[arg(long, default_value_t = wlab::state::SUPPORT_GUARD)]
        guard: f64,
    },
    /// Wigner flow of a stored Wigner function.
    Flow {
        wigner: PathBuf,
        /// e.g. "harmonic omega=1" or "barrier v0=64 delta=0.125"
        #[arg(long)]
        potential: String,
        /// Highest series order, or `exact`.
        #[arg(long, default_value = "3")]
        lmax: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Ground state by imaginary-time propagation; prints its energy.
    Groundstate {
        #[arg(long)]
        potential: String,
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long, default_value_t = DEFAULT_GROUND_DT)]
        dt: f64,
        #[arg(long, default_value_t = DEFAULT_GROUND_TOL)]
        tol: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Render a stored field to PPM (or PNG by extension).
    Render(RenderArgs),
    /// Phase-space tomography.
    Tomo {
        #[command(subcommand)]
        command: TomoCommand,
    },
}

#[derive(Args)]
struct GridArgs {
    /// key=value file with n, x_min, x_max, hbar, mass; flags win.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    x_min: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    x_max: Option<f64>,
    #[arg(long)]
    hbar: Option<f64>,
    #[arg(long)]
    mass: Option<f64>,
}

#[derive(Args)]
struct RenderArgs {
    input: PathBuf,
    /// reim, phasor, phase_color, wigner_map or wigner_flow
    #[arg(long)]
    style: String,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 512)]
    width: usize,
    #[arg(long, default_value_t = 512)]
    height: usize,
    #[arg(long, default_value_t = 16)]
    stride: usize,
    #[arg(long)]
    marginals: bool,
    #[arg(long)]
    contours: bool,
    #[arg(long)]
    colorbar: bool,
    /// Stored flow field for wigner_flow.
    #[arg(long)]
    flow: Option<PathBuf>,
    /// Potential to compute the flow from, for wigner_flow.
    #[arg(long)]
    potential: Option<String>,
    /// Shown position range, `lo,hi`.
    #[arg(long, allow_hyphen_values = true)]
    x_range: Option<String>,
    /// Shown momentum range, `lo,hi`.
    #[arg(long, allow_hyphen_values = true)]
    p_range: Option<String>,
    /// Momentum refinement factor for Wigner maps (power of two).
    #[arg(long, default_value_t = 1)]
    p_refine: usize,
}

#[derive(Subcommand)]
enum TomoCommand {
    /// Radon projections of a stored Wigner function at evenly spaced angles.
    Project {
        wigner: PathBuf,
        #[arg(long, default_value_t = 180)]
        angles: usize,
        #[arg(long, default_value_t = 512)]
        offsets: usize,
        /// Offsets cover [-half, half).
        #[arg(long, default_value_t = 16.0)]
        half: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Position marginals after free evolution for evenly spaced shear angles.
    Measure {
        wigner: PathBuf,
        #[arg(long, default_value_t = 64)]
        count: usize,
        /// Largest shear angle, in degrees.
        #[arg(long, default_value_t = 85.0)]
        max_angle: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Filtered back-projection onto a square grid.
    Reconstruct {
        sinogram: PathBuf,
        #[arg(long, default_value_t = 128)]
        n: usize,
        #[arg(long, default_value_t = 8.0)]
        half: f64,
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            if !e.use_stderr() {
                return ExitCode::SUCCESS;
            }
            eprintln!("\n{}", Cli::command().render_help());
            return ExitCode::from(1);
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("wlab: {e}");
            let mut source = std::error::Error::source(&e);
            while let Some(s) = source {
                eprintln!("  caused by: {s}");
                source = s.source();
            }
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e.root() {
        Error::Usage(_) | Error::Config(_) => 1,
        _ => 2,
    }
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Scenario { name, params, config, out } => scenario(&name, &params, config.as_deref(), &out),
        Command::Wigner { state, out, guard } => {
            let psi = io::load_wavefunction(&state)?;
            let w = wigner_transform_guarded(&psi, guard)?;
            io::save_wigner(&out, &w)?;
            println!("wrote {} ({}x{}, t = {})", out.display(), w.pgrid().p.n(), w.pgrid().x.n(), w.t());
            Ok(())
        }
        Command::Flow { wigner, potential, lmax, out } => {
            let w = io::load_wigner(&wigner)?;
            let v = io::parse_potential(&potential)?;
            let policy = parse_policy(&lmax)?;
            let j = wigner_flow(&w, &v, policy)?;
            let l = j.truncation_l_max();
            io::save_flow(&out, &StoredFlow { flow: j, consts: *w.consts(), potential: v, policy: lmax })?;
            println!("wrote {} (truncation l_max = {l})", out.display());
            Ok(())
        }
        Command::Groundstate { potential, grid, dt, tol, out } => {
            let v = io::parse_potential(&potential)?;
            let (g, consts) = grid.build()?;
            let gs = imaginary_time_ground_state(g, &v, consts, dt, tol)?;
            println!("{:.12}", gs.energy);
            eprintln!("converged after {} iterations", gs.iterations);
            if let Some(out) = out {
                io::save_wavefunction(&out, &gs.psi)?;
            }
            Ok(())
        }
        Command::Render(args) => render_cmd(args),
        Command::Tomo { command } => tomo(command),
    }
}

fn parse_policy(lmax: &str) -> Result<SeriesPolicy> {
    if lmax == "exact" {
        return Ok(SeriesPolicy::Exact);
    }
    lmax.parse::<usize>()
        .map(SeriesPolicy::truncated)
        .map_err(|_| Error::Usage(format!("--lmax expects a non-negative integer or `exact`, got `{lmax}`")))
}

fn split_pair(s: &str) -> Result<(&str, &str)> {
    s.split_once('=').ok_or_else(|| Error::Usage(format!("expected KEY=VALUE, got `{s}`")))
}

fn scenario(name: &str, params: &[String], config: Option<&Path>, out: &Path) -> Result<()> {
    let kind: ScenarioKind = name.parse()?;
    let mut spec = ScenarioSpec::defaults(kind);
    if let Some(path) = config {
        let pairs = io::read_config(path)?;
        spec.apply(pairs.iter().map(|(k, v)| (k.as_str(), v.as_str())))?;
    }
    let pairs = params.iter().map(|p| split_pair(p)).collect::<Result<Vec<_>>>()?;
    spec.apply(pairs)?;
    let manifest = scenarios::run_scenario(&spec, out)?;
    println!("{}: {} artifacts in {}", kind, manifest.artifacts.len(), out.display());
    for a in manifest.artifacts_of("wigner") {
        println!("  wigner {} t = {}", a.path, a.t.unwrap_or(0.0));
    }
    println!("{}", serde_json::to_string_pretty(&manifest.diagnostics).expect("diagnostics serialize"));
    Ok(())
}

impl GridArgs {
    fn build(&self) -> Result<(Grid1D, Constants)> {
        let (mut n, mut x_min, mut x_max, mut hbar, mut mass) = (512usize, -8.0, 8.0, 1.0, 1.0);
        if let Some(path) = &self.config {
            for (k, v) in io::read_config(path)? {
                let num = || v.parse::<f64>().map_err(|_| Error::Config(format!("{k}: `{v}` is not a number")));
                match k.as_str() {
                    "n" => n = v.parse().map_err(|_| Error::Config(format!("n: `{v}` is not an integer")))?,
                    "x_min" => x_min = num()?,
                    "x_max" => x_max = num()?,
                    "hbar" => hbar = num()?,
                    "mass" => mass = num()?,
                    other => return Err(Error::Config(format!("unknown key `{other}` in {}", path.display()))),
                }
            }
        }
        n = self.n.unwrap_or(n);
        x_min = self.x_min.unwrap_or(x_min);
        x_max = self.x_max.unwrap_or(x_max);
        let consts = Constants::new(self.hbar.unwrap_or(hbar), self.mass.unwrap_or(mass))?;
        Ok((Grid1D::new(n, x_min, x_max)?, consts))
    }
}

fn parse_range(s: &str) -> Result<(f64, f64)> {
    let bad = || Error::Usage(format!("expected a range `lo,hi`, got `{s}`"));
    let (a, b) = s.split_once(',').ok_or_else(bad)?;
    let lo = a.trim().parse().map_err(|_| bad())?;
    let hi = b.trim().parse().map_err(|_| bad())?;
    Ok((lo, hi))
}

fn render_cmd(args: RenderArgs) -> Result<()> {
    let style: Style = args.style.parse()?;
    let mut spec = RenderSpec::new(args.width, args.height, style)?.with_stride(args.stride)?;
    spec.marginals = args.marginals;
    spec.colorbar = args.colorbar;
    spec.contours = args.contours || style == Style::WignerFlow;
    let x_range = args.x_range.as_deref().map(parse_range).transpose()?;
    let p_range = args.p_range.as_deref().map(parse_range).transpose()?;
    let rendered = match io::load_field(&args.input)? {
        Field::WaveFunction(psi) => {
            spec.x_range = x_range;
            render::render_wavefunction(&psi, &spec)?
        }
        Field::Wigner(w) => {
            if style.is_wavefunction_style() {
                return Err(Error::Usage(format!("style {style} does not apply to Wigner functions")));
            }
            let g = w.pgrid();
            let window = (
                x_range.unwrap_or((g.x.x_min(), g.x.x_max())),
                p_range.unwrap_or((g.p.x_min(), g.p.x_max())),
            );
            let windowed = x_range.is_some() || p_range.is_some() || args.p_refine != 1;
            let shown = if windowed { wigner::view(&w, window.0, window.1, args.p_refine)? } else { w.clone() };
            let flow = match (&args.flow, &args.potential) {
                (Some(path), _) => {
                    let j = io::load_flow(path)?.flow;
                    if windowed && j.pgrid().same_as(w.pgrid()) {
                        Some(flow_view(&j, &w, window, args.p_refine)?)
                    } else {
                        Some(j)
                    }
                }
                (None, Some(v)) if style == Style::WignerFlow => {
                    Some(wigner_flow(&shown, &io::parse_potential(v)?, SeriesPolicy::Exact)?)
                }
                _ => None,
            };
            render::render_wigner(&shown, &spec, flow.as_ref())?
        }
        _ => return Err(Error::Usage(format!("{} holds a field that cannot be rendered", args.input.display()))),
    };
    render::write_image(&rendered, &args.out)?;
    println!("wrote {} ({}x{})", args.out.display(), args.width, args.height);
    Ok(())
}

/// The same band-limited window `wigner::view` takes of `w`, applied to both
/// components of a flow computed on the grid of `w`.
fn flow_view(j: &FlowField, w: &WignerGrid, window: ((f64, f64), (f64, f64)), p_refine: usize) -> Result<FlowField> {
    let component = |values| {
        let lifted = WignerGrid::new(*w.pgrid(), values, w.t(), *w.consts())?;
        wigner::view(&lifted, window.0, window.1, p_refine)
    };
    let (jx, jp) = (component(j.jx().clone())?, component(j.jp().clone())?);
    FlowField::new(*jx.pgrid(), jx.values().clone(), jp.values().clone(), j.t(), j.truncation_l_max())
}

fn tomo(command: TomoCommand) -> Result<()> {
    match command {
        TomoCommand::Project { wigner, angles, offsets, half, out } => {
            let w = io::load_wigner(&wigner)?;
            let grid = Grid1D::new(offsets, -half, half)?;
            let sino = tomography::radon(&w, &uniform_angles(angles), &grid.points())?;
            io::save_sinogram(&out, &sino, w.consts())?;
            println!("wrote {} ({angles} angles x {offsets} offsets)", out.display());
        }
        TomoCommand::Measure { wigner, count, max_angle, out } => {
            let w = io::load_wigner(&wigner)?;
            let times = tomography::measurement_times(count, max_angle.to_radians(), w.consts().mass)?;
            let sino = tomography::simulate_measurement_set(&w, &times, *w.consts())?;
            io::save_sinogram(&out, &sino, w.consts())?;
            println!("wrote {} ({count} measurement times)", out.display());
        }
        TomoCommand::Reconstruct { sinogram, n, half, out } => {
            let (sino, consts) = io::load_sinogram(&sinogram)?;
            let w = tomography::reconstruct_with(&sino, square_grid(n, half)?, consts)?;
            io::save_wigner(&out, &w)?;
            println!("wrote {} ({n}x{n} on [-{half}, {half})^2)", out.display());
        }
    }
    Ok(())
}
