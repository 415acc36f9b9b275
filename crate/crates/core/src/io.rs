//! The binary grid file format and its JSON sidecar.
//!
//! A grid file starts with the five magic bytes `WLAB1`, followed by the
//! little-endian `u32` rank, one `u32` length per axis, three `f64` per axis
//! (`min`, `spacing`, `count`) and finally the row-major `f64` payload. The
//! sidecar lives next to it as `<file>.json` and carries everything the
//! numbers alone cannot: field kind, time, constants and per-kind extras.

use std::fs;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use ndarray::{s, Array2, Array3};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::{Error, Result};
use crate::flow::FlowField;
use crate::numerics::grid::{Constants, Grid1D, PhaseGrid};
use crate::potential::Potential;
use crate::state::WaveFunction;
use crate::tomography::Sinogram;
use crate::wigner::WignerGrid;

pub const MAGIC: &[u8; 5] = b"WLAB1";

/// One axis descriptor of a grid file.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AxisInfo {
    pub min: f64,
    pub spacing: f64,
    pub count: usize,
}

impl AxisInfo {
    pub fn index(count: usize) -> Self {
        AxisInfo { min: 0.0, spacing: 1.0, count }
    }

    fn from_grid(g: &Grid1D) -> Self {
        AxisInfo { min: g.x_min(), spacing: g.dx(), count: g.n() }
    }

    fn to_grid(self) -> Result<Grid1D> {
        Grid1D::new(self.count, self.min, self.min + self.spacing * self.count as f64)
    }
}

/// The raw contents of a grid file.
#[derive(Debug, Clone, PartialEq)]
pub struct RawGrid {
    pub axes: Vec<AxisInfo>,
    pub data: Vec<f64>,
}

impl RawGrid {
    pub fn dims(&self) -> Vec<usize> {
        self.axes.iter().map(|a| a.count).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldKind {
    Wavefunction,
    Wigner,
    Flow,
    Sinogram,
    Marginal,
}

/// Semantic metadata stored beside every grid file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sidecar {
    pub kind: FieldKind,
    pub t: f64,
    pub hbar: f64,
    pub mass: f64,
    /// Axis names, outermost first.
    pub axes: Vec<String>,
    #[serde(flatten)]
    pub extra: Map<String, Value>,
}

impl Sidecar {
    fn new(kind: FieldKind, t: f64, consts: &Constants, axes: &[&str]) -> Self {
        Sidecar {
            kind,
            t,
            hbar: consts.hbar,
            mass: consts.mass,
            axes: axes.iter().map(|s| s.to_string()).collect(),
            extra: Map::new(),
        }
    }

    pub fn consts(&self) -> Result<Constants> {
        Constants::new(self.hbar, self.mass)
    }
}

pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut name = path.as_os_str().to_owned();
    name.push(".json");
    PathBuf::from(name)
}

pub fn write_raw(path: &Path, grid: &RawGrid) -> Result<()> {
    let expected: usize = grid.axes.iter().map(|a| a.count).product();
    if expected != grid.data.len() {
        return Err(Error::Size(format!("payload of {} values for dims {:?}", grid.data.len(), grid.dims())));
    }
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    let mut put = |bytes: &[u8]| out.write_all(bytes).map_err(|e| Error::io(path, e));
    put(MAGIC)?;
    put(&(grid.axes.len() as u32).to_le_bytes())?;
    for a in &grid.axes {
        let count = u32::try_from(a.count).map_err(|_| Error::Size(format!("axis of length {} is too long", a.count)))?;
        put(&count.to_le_bytes())?;
    }
    for a in &grid.axes {
        put(&a.min.to_le_bytes())?;
        put(&a.spacing.to_le_bytes())?;
        put(&(a.count as f64).to_le_bytes())?;
    }
    for v in &grid.data {
        put(&v.to_le_bytes())?;
    }
    out.flush().map_err(|e| Error::io(path, e))
}

pub fn read_raw(path: &Path) -> Result<RawGrid> {
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut input = BufReader::new(file);
    let bad = |reason: &str| Error::Format { path: path.to_path_buf(), reason: reason.to_string() };

    let mut magic = [0u8; 5];
    input.read_exact(&mut magic).map_err(|_| bad("file too short for the header"))?;
    if &magic != MAGIC {
        return Err(bad("missing WLAB1 magic"));
    }
    let mut word = [0u8; 4];
    let mut read_u32 = |input: &mut BufReader<fs::File>| -> Result<u32> {
        input.read_exact(&mut word).map_err(|_| bad("truncated header"))?;
        Ok(u32::from_le_bytes(word))
    };
    let rank = read_u32(&mut input)? as usize;
    if rank == 0 || rank > 8 {
        return Err(bad(&format!("unsupported rank {rank}")));
    }
    let dims = (0..rank).map(|_| read_u32(&mut input).map(|d| d as usize)).collect::<Result<Vec<_>>>()?;

    let mut dword = [0u8; 8];
    let mut read_f64 = |input: &mut BufReader<fs::File>| -> Result<f64> {
        input.read_exact(&mut dword).map_err(|_| bad("truncated axis descriptors"))?;
        Ok(f64::from_le_bytes(dword))
    };
    let mut axes = Vec::with_capacity(rank);
    for &d in &dims {
        let min = read_f64(&mut input)?;
        let spacing = read_f64(&mut input)?;
        let count = read_f64(&mut input)?;
        if count != d as f64 {
            return Err(bad(&format!("axis descriptor count {count} disagrees with dimension {d}")));
        }
        axes.push(AxisInfo { min, spacing, count: d });
    }

    let total: usize = dims.iter().product();
    let mut bytes = Vec::new();
    input.read_to_end(&mut bytes).map_err(|e| Error::io(path, e))?;
    if bytes.len() != total * 8 {
        return Err(bad(&format!("payload has {} bytes, expected {}", bytes.len(), total * 8)));
    }
    let data = bytes.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect();
    Ok(RawGrid { axes, data })
}

pub fn write_sidecar(path: &Path, sidecar: &Sidecar) -> Result<()> {
    let side = sidecar_path(path);
    let text = serde_json::to_string_pretty(sidecar).map_err(|e| Error::Format { path: side.clone(), reason: e.to_string() })?;
    fs::write(&side, text + "\n").map_err(|e| Error::io(&side, e))
}

pub fn read_sidecar(path: &Path) -> Result<Sidecar> {
    let side = sidecar_path(path);
    let text = fs::read_to_string(&side).map_err(|e| Error::io(&side, e))?;
    serde_json::from_str(&text).map_err(|e| Error::Format { path: side, reason: e.to_string() })
}

fn extra<T: for<'de> Deserialize<'de>>(sidecar: &Sidecar, key: &str, path: &Path) -> Result<T> {
    let value = sidecar.extra.get(key).cloned().ok_or_else(|| Error::Format {
        path: sidecar_path(path),
        reason: format!("missing field `{key}`"),
    })?;
    serde_json::from_value(value).map_err(|e| Error::Format { path: sidecar_path(path), reason: format!("{key}: {e}") })
}

fn expect_kind(sidecar: &Sidecar, kind: FieldKind, raw: &RawGrid, rank: usize, path: &Path) -> Result<()> {
    if sidecar.kind != kind {
        return Err(Error::Format {
            path: path.to_path_buf(),
            reason: format!("expected a {kind:?} file, found {:?}", sidecar.kind),
        });
    }
    if raw.axes.len() != rank {
        return Err(Error::Format {
            path: path.to_path_buf(),
            reason: format!("{kind:?} files have rank {rank}, found {}", raw.axes.len()),
        });
    }
    Ok(())
}

/// Stores a wave function as a `[2, n]` array: real parts, then imaginary parts.
pub fn save_wavefunction(path: &Path, psi: &WaveFunction) -> Result<()> {
    let re = psi.values().iter().map(|z| z.re);
    let im = psi.values().iter().map(|z| z.im);
    let raw = RawGrid {
        axes: vec![AxisInfo::index(2), AxisInfo::from_grid(psi.grid())],
        data: re.chain(im).collect(),
    };
    write_raw(path, &raw)?;
    let mut side = Sidecar::new(FieldKind::Wavefunction, psi.t(), psi.consts(), &["component", "x"]);
    side.extra.insert("x_max".into(), psi.grid().x_max().into());
    write_sidecar(path, &side)
}

pub fn load_wavefunction(path: &Path) -> Result<WaveFunction> {
    let raw = read_raw(path)?;
    let side = read_sidecar(path)?;
    expect_kind(&side, FieldKind::Wavefunction, &raw, 2, path)?;
    if raw.axes[0].count != 2 {
        return Err(Error::Format { path: path.to_path_buf(), reason: "a wave function needs two components".into() });
    }
    let grid = raw.axes[1].to_grid()?;
    let n = grid.n();
    let values = (0..n).map(|i| Complex64::new(raw.data[i], raw.data[n + i])).collect();
    WaveFunction::new(grid, values, side.t, side.consts()?)
}

fn phase_axes(pgrid: &PhaseGrid) -> [AxisInfo; 2] {
    [AxisInfo::from_grid(&pgrid.p), AxisInfo::from_grid(&pgrid.x)]
}

fn phase_grid_from(p: AxisInfo, x: AxisInfo) -> Result<PhaseGrid> {
    Ok(PhaseGrid::new(x.to_grid()?, p.to_grid()?))
}

/// Stores a Wigner function as a `[n_p, n_x]` array with momentum rows.
pub fn save_wigner(path: &Path, w: &WignerGrid) -> Result<()> {
    let raw = RawGrid { axes: phase_axes(w.pgrid()).to_vec(), data: w.values().iter().copied().collect() };
    write_raw(path, &raw)?;
    write_sidecar(path, &Sidecar::new(FieldKind::Wigner, w.t(), w.consts(), &["p", "x"]))
}

pub fn load_wigner(path: &Path) -> Result<WignerGrid> {
    let raw = read_raw(path)?;
    let side = read_sidecar(path)?;
    expect_kind(&side, FieldKind::Wigner, &raw, 2, path)?;
    let pgrid = phase_grid_from(raw.axes[0], raw.axes[1])?;
    let values = Array2::from_shape_vec(pgrid.shape(), raw.data).map_err(|e| Error::Size(e.to_string()))?;
    WignerGrid::new(pgrid, values, side.t, side.consts()?)
}

/// A flow field together with the context it was computed in.
#[derive(Debug, Clone, PartialEq)]
pub struct StoredFlow {
    pub flow: FlowField,
    pub consts: Constants,
    pub potential: Potential,
    pub policy: String,
}

/// Stores a flow field as a `[2, n_p, n_x]` array: `jx` stacked above `jp`.
pub fn save_flow(path: &Path, stored: &StoredFlow) -> Result<()> {
    let j = &stored.flow;
    let [ap, ax] = phase_axes(j.pgrid());
    let raw = RawGrid {
        axes: vec![AxisInfo::index(2), ap, ax],
        data: j.jx().iter().chain(j.jp().iter()).copied().collect(),
    };
    write_raw(path, &raw)?;
    let mut side = Sidecar::new(FieldKind::Flow, j.t(), &stored.consts, &["component", "p", "x"]);
    side.extra.insert("truncation_l_max".into(), j.truncation_l_max().into());
    side.extra.insert("policy".into(), stored.policy.clone().into());
    side.extra.insert("potential".into(), serde_json::to_value(stored.potential).expect("potentials serialize"));
    write_sidecar(path, &side)
}

pub fn load_flow(path: &Path) -> Result<StoredFlow> {
    let raw = read_raw(path)?;
    let side = read_sidecar(path)?;
    expect_kind(&side, FieldKind::Flow, &raw, 3, path)?;
    let pgrid = phase_grid_from(raw.axes[1], raw.axes[2])?;
    let (np, nx) = pgrid.shape();
    let both = Array3::from_shape_vec((2, np, nx), raw.data).map_err(|e| Error::Size(e.to_string()))?;
    let jx = both.slice(s![0, .., ..]).to_owned();
    let jp = both.slice(s![1, .., ..]).to_owned();
    let flow = FlowField::new(pgrid, jx, jp, side.t, extra(&side, "truncation_l_max", path)?)?;
    Ok(StoredFlow {
        flow,
        consts: side.consts()?,
        potential: extra(&side, "potential", path)?,
        policy: extra(&side, "policy", path)?,
    })
}

/// Stores a sinogram as a `[n_angles, n_offsets]` array; the angles and
/// optional times go in the sidecar.
pub fn save_sinogram(path: &Path, sino: &Sinogram, consts: &Constants) -> Result<()> {
    let offsets = sino.offsets();
    let raw = RawGrid {
        axes: vec![
            AxisInfo::index(sino.angles().len()),
            AxisInfo { min: offsets[0], spacing: sino.offset_spacing(), count: offsets.len() },
        ],
        data: sino.values().iter().copied().collect(),
    };
    write_raw(path, &raw)?;
    let mut side = Sidecar::new(FieldKind::Sinogram, 0.0, consts, &["angle", "offset"]);
    side.extra.insert("angles".into(), serde_json::to_value(sino.angles()).expect("angles serialize"));
    if let Some(times) = sino.times() {
        side.extra.insert("times".into(), serde_json::to_value(times).expect("times serialize"));
    }
    write_sidecar(path, &side)
}

pub fn load_sinogram(path: &Path) -> Result<(Sinogram, Constants)> {
    let raw = read_raw(path)?;
    let side = read_sidecar(path)?;
    expect_kind(&side, FieldKind::Sinogram, &raw, 2, path)?;
    let angles: Vec<f64> = extra(&side, "angles", path)?;
    let times: Option<Vec<f64>> = match side.extra.get("times") {
        Some(_) => Some(extra(&side, "times", path)?),
        None => None,
    };
    let ax = raw.axes[1];
    let offsets = (0..ax.count).map(|i| ax.min + i as f64 * ax.spacing).collect();
    let values = Array2::from_shape_vec((raw.axes[0].count, ax.count), raw.data).map_err(|e| Error::Size(e.to_string()))?;
    Ok((Sinogram::new(angles, offsets, values, times)?, side.consts()?))
}

/// A one-dimensional density such as a marginal distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct Profile {
    pub axis: String,
    pub grid: Grid1D,
    pub values: Vec<f64>,
    pub t: f64,
    pub consts: Constants,
}

pub fn save_profile(path: &Path, profile: &Profile) -> Result<()> {
    if profile.values.len() != profile.grid.n() {
        return Err(Error::Size(format!("{} values for a grid of {}", profile.values.len(), profile.grid.n())));
    }
    let raw = RawGrid { axes: vec![AxisInfo::from_grid(&profile.grid)], data: profile.values.clone() };
    write_raw(path, &raw)?;
    write_sidecar(path, &Sidecar::new(FieldKind::Marginal, profile.t, &profile.consts, &[&profile.axis]))
}

pub fn load_profile(path: &Path) -> Result<Profile> {
    let raw = read_raw(path)?;
    let side = read_sidecar(path)?;
    expect_kind(&side, FieldKind::Marginal, &raw, 1, path)?;
    Ok(Profile {
        axis: side.axes.first().cloned().unwrap_or_default(),
        grid: raw.axes[0].to_grid()?,
        values: raw.data,
        t: side.t,
        consts: side.consts()?,
    })
}

/// Any field the toolkit can store, as discovered from its sidecar.
#[derive(Debug, Clone)]
pub enum Field {
    WaveFunction(WaveFunction),
    Wigner(WignerGrid),
    Flow(StoredFlow),
    Sinogram(Sinogram, Constants),
    Profile(Profile),
}

pub fn load_field(path: &Path) -> Result<Field> {
    match read_sidecar(path)?.kind {
        FieldKind::Wavefunction => load_wavefunction(path).map(Field::WaveFunction),
        FieldKind::Wigner => load_wigner(path).map(Field::Wigner),
        FieldKind::Flow => load_flow(path).map(Field::Flow),
        FieldKind::Sinogram => load_sinogram(path).map(|(s, c)| Field::Sinogram(s, c)),
        FieldKind::Marginal => load_profile(path).map(Field::Profile),
    }
}

/// Lowercase hex SHA-256 of `bytes`.
pub fn sha256_hex(bytes: &[u8]) -> String {
    use sha2::{Digest, Sha256};
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Reads `key = value` lines, ignoring blank lines and `#` comments.
pub fn parse_config(text: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("line {}: expected key=value, got `{line}`", lineno + 1)))?;
        let k = k.trim();
        if k.is_empty() {
            return Err(Error::Config(format!("line {}: empty key", lineno + 1)));
        }
        out.push((k.to_string(), v.trim().to_string()));
    }
    Ok(out)
}

pub fn read_config(path: &Path) -> Result<Vec<(String, String)>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_config(&text).map_err(|e| e.context(format!("reading {}", path.display())))
}

/// Parses a potential description such as `harmonic omega=1` or
/// `barrier v0=64 delta=0.125`.
pub fn parse_potential(spec: &str) -> Result<Potential> {
    let mut words = spec.split_whitespace();
    let kind = words.next().ok_or_else(|| Error::Usage("empty potential specification".into()))?;
    let mut params = Vec::new();
    for w in words {
        let (k, v) = w
            .split_once('=')
            .ok_or_else(|| Error::Usage(format!("potential parameter `{w}` is not key=value")))?;
        let v: f64 = v.parse().map_err(|_| Error::Usage(format!("potential parameter {k}: `{v}` is not a number")))?;
        params.push((k, v));
    }
    let allowed: &[&str] = match kind {
        "free" => &[],
        "harmonic" => &["omega"],
        "quartic" | "anharmonic" => &["omega", "alpha"],
        "barrier" => &["v0", "delta"],
        other => return Err(Error::Usage(format!("unknown potential `{other}`"))),
    };
    if let Some((k, _)) = params.iter().find(|(k, _)| !allowed.contains(k)) {
        return Err(Error::Usage(format!("potential `{kind}` takes no parameter `{k}`")));
    }
    let get = |name: &str| -> Result<f64> {
        params
            .iter()
            .rev()
            .find(|(k, _)| *k == name)
            .map(|(_, v)| *v)
            .ok_or_else(|| Error::Usage(format!("potential `{kind}` needs `{name}=`")))
    };
    match kind {
        "free" => Ok(Potential::Free),
        "harmonic" => Potential::harmonic(get("omega")?),
        "barrier" => Potential::barrier(get("v0")?, get("delta")?),
        _ => Potential::anharmonic(get("omega")?, get("alpha")?),
    }
}
