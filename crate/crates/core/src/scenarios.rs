//! Canned end-to-end experiments: a free Gaussian packet, an oscillator
//! eigenstate with its flow, anharmonic ground states and scattering off a
//! tanh barrier.
//!
//! [`run`] does the numerical work in memory and returns a [`ScenarioRun`];
//! [`write_run`] turns a run into files plus a `manifest.json` with SHA-256
//! checksums. State files and Wigner grids are stored at full resolution.
//! Flow fields and images use a display window of the Wigner function (see
//! [`crate::wigner::view`]).

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::flow::{stationarity_residual, tangency_divergence, wigner_flow, FlowField, SeriesPolicy};
use crate::io::{self, Profile, StoredFlow};
use crate::numerics::grid::{Constants, Grid1D};
use crate::potential::Potential;
use crate::propagation::{energy, evolve, imaginary_time_ground_state, PropagationConfig};
use crate::render::{self, RenderSpec, Style};
use crate::state::{gaussian_packet, ho_eigenstate, GaussianParams, WaveFunction};
use crate::wigner::{
    analytic_gaussian_wigner, analytic_ho_wigner, marginal_p, marginal_x, negativity_volume, purity, view,
    wigner_transform, wigner_transform_guarded, WignerGrid,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioKind {
    FreePacket,
    HoEigenstate,
    AnharmonicGround,
    Barrier,
}

impl ScenarioKind {
    pub const ALL: [ScenarioKind; 4] =
        [ScenarioKind::FreePacket, ScenarioKind::HoEigenstate, ScenarioKind::AnharmonicGround, ScenarioKind::Barrier];

    pub fn name(self) -> &'static str {
        match self {
            ScenarioKind::FreePacket => "free_packet",
            ScenarioKind::HoEigenstate => "ho_eigenstate",
            ScenarioKind::AnharmonicGround => "anharmonic_ground",
            ScenarioKind::Barrier => "barrier",
        }
    }
}

impl fmt::Display for ScenarioKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ScenarioKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ScenarioKind::ALL.into_iter().find(|k| k.name() == s).ok_or_else(|| {
            Error::Usage(format!("unknown scenario `{s}`; expected free_packet, ho_eigenstate, anharmonic_ground or barrier"))
        })
    }
}

/// Grid on `[x_min, x_max)` with `n` points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridParams {
    pub n: usize,
    pub x_min: f64,
    pub x_max: f64,
}

impl GridParams {
    fn build(&self) -> Result<Grid1D> {
        Grid1D::new(self.n, self.x_min, self.x_max)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FreePacketParams {
    pub x_bar: f64,
    pub p_bar: f64,
    pub sigma: f64,
    pub t_final: f64,
    pub dt: f64,
    pub grid: GridParams,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HoParams {
    pub level: usize,
    pub omega: f64,
    pub grid: GridParams,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnharmonicParams {
    pub omega: f64,
    pub alphas: Vec<f64>,
    pub dt: f64,
    pub tol: f64,
    pub grid: GridParams,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BarrierParams {
    pub v0: f64,
    pub delta: f64,
    pub x_bar: f64,
    pub p_bar: f64,
    pub sigma: f64,
    pub t_final: f64,
    pub dt: f64,
    /// Number of equal intervals between snapshots; 2 gives `t = 0, 1/2, 1`.
    pub intervals: usize,
    /// Boundary amplitude tolerated in propagated states, relative to the peak.
    pub support_guard: f64,
    pub grid: GridParams,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "scenario", rename_all = "snake_case")]
pub enum ScenarioParams {
    FreePacket(FreePacketParams),
    HoEigenstate(HoParams),
    AnharmonicGround(AnharmonicParams),
    Barrier(BarrierParams),
}

/// A scenario with all of its parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pub params: ScenarioParams,
    pub consts: Constants,
    /// Edge length of the square images, in pixels.
    pub image_size: usize,
    pub images: bool,
}

impl ScenarioSpec {
    pub fn defaults(kind: ScenarioKind) -> Self {
        let params = match kind {
            ScenarioKind::FreePacket => ScenarioParams::FreePacket(FreePacketParams {
                x_bar: 1.0,
                p_bar: 3.0,
                sigma: 0.5,
                t_final: 1.0,
                dt: 1.0 / 256.0,
                grid: GridParams { n: 512, x_min: -16.0, x_max: 16.0 },
            }),
            ScenarioKind::HoEigenstate => ScenarioParams::HoEigenstate(HoParams {
                level: 3,
                omega: 1.0,
                grid: GridParams { n: 512, x_min: -8.0, x_max: 8.0 },
            }),
            ScenarioKind::AnharmonicGround => ScenarioParams::AnharmonicGround(AnharmonicParams {
                omega: 0.5,
                alphas: vec![0.0, 0.25, 0.75],
                dt: 1e-3,
                tol: 1e-12,
                grid: GridParams { n: 512, x_min: -12.0, x_max: 12.0 },
            }),
            ScenarioKind::Barrier => ScenarioParams::Barrier(BarrierParams {
                v0: 64.0,
                delta: 0.125,
                x_bar: -4.0,
                p_bar: 8.0,
                sigma: 0.5,
                t_final: 1.0,
                dt: 1.0 / 4096.0,
                intervals: 2,
                support_guard: 1e-6,
                grid: GridParams { n: 2048, x_min: -16.0, x_max: 16.0 },
            }),
        };
        ScenarioSpec { params, consts: Constants::default(), image_size: 512, images: true }
    }

    pub fn kind(&self) -> ScenarioKind {
        match self.params {
            ScenarioParams::FreePacket(_) => ScenarioKind::FreePacket,
            ScenarioParams::HoEigenstate(_) => ScenarioKind::HoEigenstate,
            ScenarioParams::AnharmonicGround(_) => ScenarioKind::AnharmonicGround,
            ScenarioParams::Barrier(_) => ScenarioKind::Barrier,
        }
    }

    /// Overrides one parameter from its textual form. Unknown keys and
    /// unparsable values are usage errors.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let kind = self.kind();
        let unknown = || Error::Usage(format!("scenario {kind} has no parameter `{key}`"));
        match key {
            "hbar" => return set_f64(&mut self.consts.hbar, key, value),
            "mass" => return set_f64(&mut self.consts.mass, key, value),
            "image_size" => return set_usize(&mut self.image_size, key, value),
            "images" => {
                self.images = value.parse().map_err(|_| Error::Usage(format!("images: `{value}` is not true/false")))?;
                return Ok(());
            }
            _ => {}
        }
        let grid = match &mut self.params {
            ScenarioParams::FreePacket(p) => match key {
                "x_bar" => return set_f64(&mut p.x_bar, key, value),
                "p_bar" => return set_f64(&mut p.p_bar, key, value),
                "sigma" => return set_f64(&mut p.sigma, key, value),
                "t_final" => return set_f64(&mut p.t_final, key, value),
                "dt" => return set_f64(&mut p.dt, key, value),
                _ => &mut p.grid,
            },
            ScenarioParams::HoEigenstate(p) => match key {
                "level" => return set_usize(&mut p.level, key, value),
                "omega" => return set_f64(&mut p.omega, key, value),
                _ => &mut p.grid,
            },
            ScenarioParams::AnharmonicGround(p) => match key {
                "omega" => return set_f64(&mut p.omega, key, value),
                "dt" => return set_f64(&mut p.dt, key, value),
                "tol" => return set_f64(&mut p.tol, key, value),
                "alpha" | "alphas" => {
                    p.alphas = value.split(',').map(|v| parse_f64(key, v.trim())).collect::<Result<_>>()?;
                    return Ok(());
                }
                _ => &mut p.grid,
            },
            ScenarioParams::Barrier(p) => match key {
                "v0" => return set_f64(&mut p.v0, key, value),
                "delta" => return set_f64(&mut p.delta, key, value),
                "x_bar" => return set_f64(&mut p.x_bar, key, value),
                "p_bar" => return set_f64(&mut p.p_bar, key, value),
                "sigma" => return set_f64(&mut p.sigma, key, value),
                "t_final" => return set_f64(&mut p.t_final, key, value),
                "dt" => return set_f64(&mut p.dt, key, value),
                "intervals" => return set_usize(&mut p.intervals, key, value),
                "support_guard" => return set_f64(&mut p.support_guard, key, value),
                _ => &mut p.grid,
            },
        };
        match key {
            "n" => set_usize(&mut grid.n, key, value),
            "x_min" => set_f64(&mut grid.x_min, key, value),
            "x_max" => set_f64(&mut grid.x_max, key, value),
            _ => Err(unknown()),
        }
    }

    /// Applies `key=value` overrides in order.
    pub fn apply<'a>(&mut self, pairs: impl IntoIterator<Item = (&'a str, &'a str)>) -> Result<()> {
        pairs.into_iter().try_for_each(|(k, v)| self.set(k, v))
    }
}

fn parse_f64(key: &str, value: &str) -> Result<f64> {
    value.parse().map_err(|_| Error::Usage(format!("{key}: `{value}` is not a number")))
}

fn set_f64(slot: &mut f64, key: &str, value: &str) -> Result<()> {
    *slot = parse_f64(key, value)?;
    Ok(())
}

fn set_usize(slot: &mut usize, key: &str, value: &str) -> Result<()> {
    *slot = value.parse().map_err(|_| Error::Usage(format!("{key}: `{value}` is not a non-negative integer")))?;
    Ok(())
}

/// Display window of a Wigner function: position range, momentum range and
/// the momentum refinement factor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Window {
    pub x: (f64, f64),
    pub p: (f64, f64),
    pub p_refine: usize,
}

/// One state of a run with everything derived from it.
#[derive(Debug, Clone)]
pub struct Frame {
    pub label: String,
    pub psi: WaveFunction,
    pub wigner: WignerGrid,
    pub potential: Potential,
    pub policy: SeriesPolicy,
    /// Display window of `wigner` and the flow computed on it.
    pub view: WignerGrid,
    pub flow: FlowField,
}

/// The in-memory result of a scenario.
#[derive(Debug, Clone)]
pub struct ScenarioRun {
    pub spec: ScenarioSpec,
    pub frames: Vec<Frame>,
    /// Scalar summaries, keyed by frame label or by name.
    pub diagnostics: Map<String, Value>,
}

impl ScenarioRun {
    pub fn frame(&self, label: &str) -> Option<&Frame> {
        self.frames.iter().find(|f| f.label == label)
    }
}

fn policy_name(policy: SeriesPolicy) -> String {
    match policy {
        SeriesPolicy::Exact => "exact".into(),
        SeriesPolicy::Truncated { l_max, term_tol } => format!("truncated(l_max={l_max}, term_tol={term_tol:e})"),
    }
}

fn frame(label: String, psi: WaveFunction, wigner: WignerGrid, potential: Potential, window: Window) -> Result<Frame> {
    let policy = SeriesPolicy::Exact;
    let view = view(&wigner, window.x, window.p, window.p_refine)?;
    let flow = wigner_flow(&view, &potential, policy)?;
    Ok(Frame { label, psi, wigner, potential, policy, view, flow })
}

fn time_label(t: f64) -> String {
    format!("t{}", fmt_number(t))
}

fn fmt_number(v: f64) -> String {
    let s = format!("{v:.4}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s.is_empty() || s == "-0" {
        "0".into()
    } else {
        s.to_string()
    }
}

fn linf(a: &WignerGrid, b: &WignerGrid) -> f64 {
    a.values().iter().zip(b.values()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn peak(w: &WignerGrid) -> Value {
    let ((ip, ix), v) = w
        .values()
        .indexed_iter()
        .fold(((0, 0), f64::NEG_INFINITY), |best, (idx, &v)| if v > best.1 { (idx, v) } else { best });
    json!({ "x": w.pgrid().x.point(ix), "p": w.pgrid().p.point(ip), "value": v })
}

fn wigner_summary(w: &WignerGrid) -> Map<String, Value> {
    let mut m = Map::new();
    m.insert("t".into(), w.t().into());
    m.insert("integral".into(), w.integral().into());
    m.insert("purity".into(), purity(w).into());
    m.insert("negativity".into(), negativity_volume(w).into());
    m.insert("min".into(), w.min().into());
    m.insert("max".into(), w.max().into());
    m.insert("peak".into(), peak(w));
    m
}

/// Runs a scenario in memory.
pub fn run(spec: &ScenarioSpec) -> Result<ScenarioRun> {
    let kind = spec.kind();
    let result = match &spec.params {
        ScenarioParams::FreePacket(p) => free_packet(spec, p),
        ScenarioParams::HoEigenstate(p) => ho_eigenstate_run(spec, p),
        ScenarioParams::AnharmonicGround(p) => anharmonic(spec, p),
        ScenarioParams::Barrier(p) => barrier(spec, p),
    };
    result.map_err(|e| e.context(format!("scenario {kind}")))
}

fn free_packet(spec: &ScenarioSpec, p: &FreePacketParams) -> Result<ScenarioRun> {
    let grid = p.grid.build()?;
    let params = GaussianParams::new(p.x_bar, p.p_bar, p.sigma)?;
    let psi0 = gaussian_packet(grid, params, 0.0, spec.consts)?;
    let steps = steps_for(p.t_final, p.dt)?;
    let cfg = PropagationConfig::new(p.t_final / steps as f64, steps, steps.max(1))?;
    let states = evolve(&psi0, &Potential::Free, &cfg)?;
    let spread = p.sigma + spec.consts.hbar * p.t_final / (2.0 * spec.consts.mass * p.sigma);
    let x_end = p.x_bar + p.p_bar * p.t_final / spec.consts.mass;
    let window = Window {
        x: (p.x_bar.min(x_end) - 4.0 * spread, p.x_bar.max(x_end) + 4.0 * spread),
        p: (p.p_bar - 4.0 * spec.consts.hbar / (2.0 * p.sigma), p.p_bar + 4.0 * spec.consts.hbar / (2.0 * p.sigma)),
        p_refine: 4,
    };
    let mut frames = Vec::new();
    let mut diagnostics = Map::new();
    for psi in states {
        let w = wigner_transform(&psi)?;
        let analytic = analytic_gaussian_wigner(*w.pgrid(), params, psi.t(), spec.consts);
        let mut d = wigner_summary(&w);
        d.insert("analytic_linf".into(), linf(&w, &analytic).into());
        d.insert("mean_x".into(), psi.expect_position(|x| x).into());
        d.insert("mean_p".into(), psi.to_momentum().expect(|q| q).into());
        let label = time_label(psi.t());
        diagnostics.insert(label.clone(), Value::Object(d));
        frames.push(frame(label, psi, w, Potential::Free, window)?);
    }
    Ok(ScenarioRun { spec: spec.clone(), frames, diagnostics })
}

fn steps_for(t_final: f64, dt: f64) -> Result<usize> {
    if !(t_final >= 0.0 && dt > 0.0) {
        return Err(Error::Config(format!("need t_final >= 0 and dt > 0, got {t_final} and {dt}")));
    }
    Ok((t_final / dt).round().max(1.0) as usize)
}

fn ho_eigenstate_run(spec: &ScenarioSpec, p: &HoParams) -> Result<ScenarioRun> {
    let grid = p.grid.build()?;
    let v = Potential::harmonic(p.omega)?;
    let psi = ho_eigenstate(grid, p.level, p.omega, spec.consts)?;
    let w = wigner_transform(&psi)?;
    let analytic = analytic_ho_wigner(*w.pgrid(), p.level, p.omega, spec.consts)?;
    let full_flow = wigner_flow(&w, &v, SeriesPolicy::Exact)?;
    let tangency = tangency_divergence(&w, &full_flow)?;
    let residual = stationarity_residual(&w, &v, SeriesPolicy::Exact)?;

    let mut d = wigner_summary(&w);
    d.insert("energy".into(), energy(&psi, &v).into());
    d.insert("analytic_linf".into(), linf(&w, &analytic).into());
    d.insert("tangency".into(), tangency.summary.into());
    d.insert("stationarity_linf".into(), residual.iter().fold(0.0f64, |m, r| m.max(r.abs())).into());
    let mut diagnostics = Map::new();
    diagnostics.insert("t0".into(), Value::Object(d));

    let kappa = (spec.consts.mass * p.omega / spec.consts.hbar).sqrt();
    let reach = ((2 * p.level + 1) as f64).sqrt() + 3.0;
    let window = Window {
        x: (-reach / kappa, reach / kappa),
        p: (-reach * spec.consts.hbar * kappa, reach * spec.consts.hbar * kappa),
        p_refine: 8,
    };
    let frames = vec![frame("t0".into(), psi, w, v, window)?];
    Ok(ScenarioRun { spec: spec.clone(), frames, diagnostics })
}

fn anharmonic(spec: &ScenarioSpec, p: &AnharmonicParams) -> Result<ScenarioRun> {
    let grid = p.grid.build()?;
    let mut frames = Vec::new();
    let mut diagnostics = Map::new();
    let mut tangencies = Vec::new();
    for &alpha in &p.alphas {
        let v = Potential::anharmonic(p.omega, alpha)?;
        let gs = imaginary_time_ground_state(grid, &v, spec.consts, p.dt, p.tol)
            .map_err(|e| e.context(format!("ground state for alpha = {alpha}")))?;
        let w = wigner_transform(&gs.psi)?;
        let j = wigner_flow(&w, &v, SeriesPolicy::Exact)?;
        let tangency = tangency_divergence(&w, &j)?;
        let residual = stationarity_residual(&w, &v, SeriesPolicy::Exact)?;
        let mut d = wigner_summary(&w);
        d.insert("alpha".into(), alpha.into());
        d.insert("energy".into(), gs.energy.into());
        d.insert("iterations".into(), gs.iterations.into());
        d.insert("tangency".into(), tangency.summary.into());
        d.insert("stationarity_linf".into(), residual.iter().fold(0.0f64, |m, r| m.max(r.abs())).into());
        tangencies.push(tangency.summary);
        let label = format!("alpha{}", fmt_number(alpha));
        diagnostics.insert(label.clone(), Value::Object(d));
        let window = Window { x: (-5.0, 5.0), p: (-3.0, 3.0), p_refine: 8 };
        frames.push(frame(label, gs.psi, w, v, window)?);
    }
    let increasing = tangencies.windows(2).all(|t| t[0] < t[1]);
    diagnostics.insert("tangency_increasing".into(), increasing.into());
    Ok(ScenarioRun { spec: spec.clone(), frames, diagnostics })
}

fn barrier(spec: &ScenarioSpec, p: &BarrierParams) -> Result<ScenarioRun> {
    let grid = p.grid.build()?;
    let v = Potential::barrier(p.v0, p.delta)?;
    let psi0 = gaussian_packet(grid, GaussianParams::new(p.x_bar, p.p_bar, p.sigma)?, 0.0, spec.consts)?;
    let steps = steps_for(p.t_final, p.dt)?;
    if p.intervals == 0 || steps % p.intervals != 0 {
        return Err(Error::Config(format!("{steps} steps cannot be split into {} equal intervals", p.intervals)));
    }
    let cfg = PropagationConfig::new(p.t_final / steps as f64, steps, steps / p.intervals)?
        .with_support_guard(p.support_guard)?;
    let states = evolve(&psi0, &v, &cfg)?;

    let mut diagnostics = Map::new();
    diagnostics.insert("kinetic_energy_t0".into(), psi0.kinetic_energy().into());
    let window = Window { x: (-8.0, 8.0), p: (-16.0, 16.0), p_refine: 1 };
    let mut frames = Vec::new();
    let mut negativities = Vec::new();
    for psi in states {
        let w = wigner_transform_guarded(&psi, p.support_guard)?;
        let (reflected, transmitted) = split_at_zero(&psi);
        let mut d = wigner_summary(&w);
        d.insert("energy".into(), energy(&psi, &v).into());
        d.insert("reflection".into(), reflected.into());
        d.insert("transmission".into(), transmitted.into());
        negativities.push(negativity_volume(&w));
        let label = time_label(psi.t());
        diagnostics.insert(label.clone(), Value::Object(d));
        frames.push(frame(label, psi, w, v, window)?);
    }
    if negativities.len() > 1 {
        diagnostics.insert("negativity_ratio".into(), (negativities[1] / negativities[0]).into());
    }
    Ok(ScenarioRun { spec: spec.clone(), frames, diagnostics })
}

/// Probabilities on `x < 0` and `x >= 0`.
pub fn split_at_zero(psi: &WaveFunction) -> (f64, f64) {
    let g = psi.grid();
    let dx = g.dx();
    let (mut left, mut right) = (0.0, 0.0);
    for (i, d) in psi.density().into_iter().enumerate() {
        if g.point(i) < 0.0 {
            left += d * dx;
        } else {
            right += d * dx;
        }
    }
    (left, right)
}

/// One file produced by a scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Artifact {
    pub path: String,
    pub kind: String,
    pub t: Option<f64>,
    pub bytes: u64,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub scenario: ScenarioKind,
    pub spec: ScenarioSpec,
    pub artifacts: Vec<Artifact>,
    pub diagnostics: Map<String, Value>,
    /// Seconds since the Unix epoch when the manifest was written.
    pub generated_unix: u64,
}

impl Manifest {
    pub fn artifacts_of(&self, kind: &str) -> impl Iterator<Item = &Artifact> {
        let kind = kind.to_string();
        self.artifacts.iter().filter(move |a| a.kind == kind)
    }
}

struct Collector<'a> {
    dir: &'a Path,
    artifacts: Vec<Artifact>,
}

impl Collector<'_> {
    fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    fn record(&mut self, name: &str, kind: &str, t: Option<f64>) -> Result<()> {
        let path = self.path(name);
        let bytes = fs::read(&path).map_err(|e| Error::io(&path, e))?;
        self.artifacts.push(Artifact {
            path: name.to_string(),
            kind: kind.to_string(),
            t,
            bytes: bytes.len() as u64,
            sha256: io::sha256_hex(&bytes),
        });
        Ok(())
    }

    /// Records a grid file and its sidecar.
    fn record_grid(&mut self, name: &str, kind: &str, t: f64) -> Result<()> {
        self.record(name, kind, Some(t))?;
        self.record(&format!("{name}.json"), "sidecar", Some(t))
    }
}

/// Writes every artifact of `run` into `dir` and returns the manifest, which
/// is also written to `dir/manifest.json`.
pub fn write_run(run: &ScenarioRun, dir: &Path) -> Result<Manifest> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut out = Collector { dir, artifacts: Vec::new() };
    for f in &run.frames {
        let t = f.psi.t();
        let consts = *f.psi.consts();
        let name = format!("psi_{}.wlab", f.label);
        io::save_wavefunction(&out.path(&name), &f.psi)?;
        out.record_grid(&name, "wavefunction", t)?;

        let name = format!("wigner_{}.wlab", f.label);
        io::save_wigner(&out.path(&name), &f.wigner)?;
        out.record_grid(&name, "wigner", t)?;

        let pg = f.wigner.pgrid();
        for (axis, grid, values) in [("x", pg.x, marginal_x(&f.wigner)), ("p", pg.p, marginal_p(&f.wigner))] {
            let name = format!("marginal_{axis}_{}.wlab", f.label);
            io::save_profile(&out.path(&name), &Profile { axis: axis.into(), grid, values, t, consts })?;
            out.record_grid(&name, "marginal", t)?;
        }

        let name = format!("flow_{}.wlab", f.label);
        let stored =
            StoredFlow { flow: f.flow.clone(), consts, potential: f.potential, policy: policy_name(f.policy) };
        io::save_flow(&out.path(&name), &stored)?;
        out.record_grid(&name, "flow", t)?;

        if run.spec.images {
            write_images(&mut out, f, run.spec.image_size)?;
        }
    }
    out.artifacts.sort_by(|a, b| a.path.cmp(&b.path));
    let manifest = Manifest {
        scenario: run.spec.kind(),
        spec: run.spec.clone(),
        artifacts: out.artifacts,
        diagnostics: run.diagnostics.clone(),
        generated_unix: SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0),
    };
    let path = dir.join("manifest.json");
    let text = serde_json::to_string_pretty(&manifest).expect("manifests serialize");
    fs::write(&path, text + "\n").map_err(|e| Error::io(&path, e))?;
    Ok(manifest)
}

fn write_images(out: &mut Collector<'_>, f: &Frame, size: usize) -> Result<()> {
    let t = Some(f.psi.t());
    let shown = f.view.pgrid().x;
    for style in [Style::Reim, Style::Phasor, Style::PhaseColor] {
        let stride = (shown.n() / 32).max(1);
        let mut spec = RenderSpec::new(size, size / 2, style)?.with_stride(stride)?;
        spec.x_range = Some((shown.x_min(), shown.x_max()));
        let name = format!("psi_{}_{}.ppm", f.label, style);
        render::write_image(&render::render_wavefunction(&f.psi, &spec)?, &out.path(&name))?;
        out.record(&name, "image", t)?;
        out.record(&format!("{name}.json"), "sidecar", t)?;
    }

    let mut spec = RenderSpec::new(size, size, Style::WignerMap)?;
    spec.marginals = true;
    spec.colorbar = true;
    let name = format!("wigner_{}.ppm", f.label);
    render::write_image(&render::render_wigner(&f.view, &spec, None)?, &out.path(&name))?;
    out.record(&name, "image", t)?;
    out.record(&format!("{name}.json"), "sidecar", t)?;

    let stride = (f.view.pgrid().x.n().max(f.view.pgrid().p.n()) / 24).max(1);
    let spec = RenderSpec::new(size, size, Style::WignerFlow)?.with_stride(stride)?;
    let name = format!("flow_{}.ppm", f.label);
    render::write_image(&render::render_wigner(&f.view, &spec, Some(&f.flow))?, &out.path(&name))?;
    out.record(&name, "image", t)?;
    out.record(&format!("{name}.json"), "sidecar", t)
}

/// Runs `spec` and writes its artifacts into `dir`.
pub fn run_scenario(spec: &ScenarioSpec, dir: &Path) -> Result<Manifest> {
    let run = run(spec)?;
    write_run(&run, dir).map_err(|e| e.context(format!("writing scenario {}", spec.kind())))
}
