//! `TOMO1` container: a text header terminated by a blank line, then a raw
//! little-endian payload in row-major order (last listed axis fastest).

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use ndarray::{Array2, Array4, ArrayD, IxDyn};
use num_complex::Complex64;
use tomo_core::{
    AxisGrid, AxisKind, DensityMatrix, Error, InvariantReport, OpticalTomogram1, OpticalTomogram2,
    PhaseSpaceDensity, Result, Tolerances,
};
use tomo_evolution::{StepLog, Trajectory};

pub const MAGIC: &str = "TOMO1";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Optical1,
    Optical2,
    PhaseSpace1,
    PhaseSpace2,
    DensityMatrix,
    Wavefunction,
    Trajectory,
}

impl Kind {
    pub const ALL: [Kind; 7] = [
        Kind::Optical1,
        Kind::Optical2,
        Kind::PhaseSpace1,
        Kind::PhaseSpace2,
        Kind::DensityMatrix,
        Kind::Wavefunction,
        Kind::Trajectory,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Kind::Optical1 => "optical1",
            Kind::Optical2 => "optical2",
            Kind::PhaseSpace1 => "phase-space-1",
            Kind::PhaseSpace2 => "phase-space-2",
            Kind::DensityMatrix => "density-matrix",
            Kind::Wavefunction => "wavefunction",
            Kind::Trajectory => "trajectory",
        }
    }
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Kind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Kind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::Format(format!("unknown container kind '{s}'")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dtype {
    Real64,
    Complex128,
}

impl Dtype {
    pub fn as_str(self) -> &'static str {
        match self {
            Dtype::Real64 => "real64",
            Dtype::Complex128 => "complex128",
        }
    }

    /// Bytes per element.
    pub fn size(self) -> usize {
        match self {
            Dtype::Real64 => 8,
            Dtype::Complex128 => 16,
        }
    }
}

impl FromStr for Dtype {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "real64" => Ok(Dtype::Real64),
            "complex128" => Ok(Dtype::Complex128),
            other => Err(Error::Format(format!("unknown dtype '{other}'"))),
        }
    }
}

/// Header description of one payload axis.
#[derive(Debug, Clone, PartialEq)]
pub struct AxisSpec {
    pub name: String,
    pub kind: AxisKind,
    pub start: f64,
    pub step: f64,
    pub count: usize,
}

impl AxisSpec {
    pub fn new(name: &str, grid: &AxisGrid) -> Self {
        AxisSpec { name: name.to_string(), kind: grid.kind(), start: grid.start(), step: grid.step(), count: grid.len() }
    }

    /// The axis as a grid; an invalid layout in a file is a format error.
    pub fn grid(&self) -> Result<AxisGrid> {
        AxisGrid::new(self.kind, self.start, self.step, self.count)
            .map_err(|e| Error::Format(format!("axis '{}': {e}", self.name)))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Header {
    pub kind: Kind,
    pub dtype: Dtype,
    pub axes: Vec<AxisSpec>,
    pub metadata: BTreeMap<String, String>,
}

impl Header {
    pub fn element_count(&self) -> usize {
        self.axes.iter().map(|a| a.count).product()
    }

    pub fn payload_len(&self) -> usize {
        self.element_count() * self.dtype.size()
    }

    fn to_text(&self) -> Result<String> {
        let mut s = format!("{MAGIC}\nkind: {}\ndtype: {}\n", self.kind, self.dtype.as_str());
        for a in &self.axes {
            if a.name.is_empty() || a.name.contains(char::is_whitespace) {
                return Err(Error::Format(format!("axis name '{}' must be a single word", a.name)));
            }
            s += &format!("axis: {} {} {:?} {:?} {}\n", a.name, a.kind, a.start, a.step, a.count);
        }
        for (k, v) in &self.metadata {
            if k.is_empty() || k.contains(|c: char| c.is_whitespace() || c == ':') {
                return Err(Error::Format(format!("metadata key '{k}' must be a single word without ':'")));
            }
            s += &format!("meta.{k}: {}\n", escape(v));
        }
        s.push('\n');
        Ok(s)
    }

    fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        match lines.next() {
            Some(MAGIC) => {}
            Some(l) if l.starts_with("TOMO") => {
                return Err(Error::Format(format!("unsupported container version '{l}'")))
            }
            _ => return Err(Error::Format(format!("bad magic, expected '{MAGIC}'"))),
        }
        let (mut kind, mut dtype) = (None, None);
        let mut axes = Vec::new();
        let mut metadata = BTreeMap::new();
        for line in lines {
            let (key, value) =
                line.split_once(": ").ok_or_else(|| Error::Format(format!("malformed header line '{line}'")))?;
            match key {
                "kind" => kind = Some(value.parse()?),
                "dtype" => dtype = Some(value.parse()?),
                "axis" => axes.push(parse_axis(value)?),
                _ => match key.strip_prefix("meta.") {
                    Some(k) => {
                        metadata.insert(k.to_string(), unescape(value)?);
                    }
                    None => return Err(Error::Format(format!("unknown header key '{key}'"))),
                },
            }
        }
        Ok(Header {
            kind: kind.ok_or_else(|| Error::Format("header lacks 'kind'".into()))?,
            dtype: dtype.ok_or_else(|| Error::Format("header lacks 'dtype'".into()))?,
            axes,
            metadata,
        })
    }
}

fn parse_axis(s: &str) -> Result<AxisSpec> {
    let bad = || Error::Format(format!("malformed axis '{s}', expected 'name kind start step count'"));
    let parts: Vec<&str> = s.split(' ').collect();
    let [name, kind, start, step, count] = parts[..] else { return Err(bad()) };
    Ok(AxisSpec {
        name: name.to_string(),
        kind: kind.parse().map_err(|_| Error::Format(format!("unknown axis kind '{kind}'")))?,
        start: start.parse().map_err(|_| bad())?,
        step: step.parse().map_err(|_| bad())?,
        count: count.parse().map_err(|_| bad())?,
    })
}

fn escape(v: &str) -> String {
    v.replace('\\', "\\\\").replace('\n', "\\n")
}

fn unescape(v: &str) -> Result<String> {
    let mut out = String::with_capacity(v.len());
    let mut chars = v.chars();
    while let Some(c) = chars.next() {
        if c != '\\' {
            out.push(c);
            continue;
        }
        match chars.next() {
            Some('\\') => out.push('\\'),
            Some('n') => out.push('\n'),
            _ => return Err(Error::Format(format!("bad escape in metadata value '{v}'"))),
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub enum Payload {
    Real(Vec<f64>),
    Complex(Vec<Complex64>),
}

impl Payload {
    pub fn dtype(&self) -> Dtype {
        match self {
            Payload::Real(_) => Dtype::Real64,
            Payload::Complex(_) => Dtype::Complex128,
        }
    }

    pub fn len(&self) -> usize {
        match self {
            Payload::Real(v) => v.len(),
            Payload::Complex(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn to_bytes(&self) -> Vec<u8> {
        match self {
            Payload::Real(v) => v.iter().flat_map(|x| x.to_le_bytes()).collect(),
            Payload::Complex(v) => v.iter().flat_map(|z| [z.re.to_le_bytes(), z.im.to_le_bytes()]).flatten().collect(),
        }
    }

    fn from_bytes(dtype: Dtype, bytes: &[u8]) -> Self {
        let reals = bytes.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")));
        match dtype {
            Dtype::Real64 => Payload::Real(reals.collect()),
            Dtype::Complex128 => {
                let r: Vec<f64> = reals.collect();
                Payload::Complex(r.chunks_exact(2).map(|p| Complex64::new(p[0], p[1])).collect())
            }
        }
    }

    fn real(&self) -> Result<&[f64]> {
        match self {
            Payload::Real(v) => Ok(v),
            Payload::Complex(_) => Err(Error::Format("expected a real64 payload".into())),
        }
    }

    fn complex(&self) -> Result<&[Complex64]> {
        match self {
            Payload::Complex(v) => Ok(v),
            Payload::Real(_) => Err(Error::Format("expected a complex128 payload".into())),
        }
    }
}

/// Header plus payload, independent of the object type they encode.
#[derive(Debug, Clone, PartialEq)]
pub struct Container {
    pub header: Header,
    pub payload: Payload,
}

impl Container {
    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        if self.payload.dtype() != self.header.dtype {
            return Err(Error::Format("payload dtype differs from header".into()));
        }
        let expected = self.header.payload_len();
        let bytes = self.payload.to_bytes();
        if bytes.len() != expected {
            return Err(Error::PayloadLength { expected, actual: bytes.len() });
        }
        let mut out = self.header.to_text()?.into_bytes();
        out.extend(bytes);
        Ok(out)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let end = bytes
            .windows(2)
            .position(|w| w == b"\n\n")
            .ok_or_else(|| Error::Format("header is not terminated by a blank line".into()))?;
        let text = std::str::from_utf8(&bytes[..end])
            .map_err(|_| Error::Format("header is not valid UTF-8".into()))?;
        let header = Header::parse(text)?;
        let data = &bytes[end + 2..];
        let expected = header.payload_len();
        if data.len() != expected {
            return Err(Error::PayloadLength { expected, actual: data.len() });
        }
        let payload = Payload::from_bytes(header.dtype, data);
        Ok(Container { header, payload })
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_bytes()?)?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self> {
        Container::from_bytes(&fs::read(path)?)
    }
}

/// Every object type the container can hold.
#[derive(Debug, Clone, PartialEq)]
pub enum Object {
    Optical1(OpticalTomogram1),
    Optical2(OpticalTomogram2),
    PhaseSpace(PhaseSpaceDensity),
    DensityMatrix(DensityMatrix),
    Wavefunction { axis: AxisGrid, psi: Vec<Complex64> },
    Trajectory1(Trajectory<OpticalTomogram1>),
    Trajectory2(Trajectory<OpticalTomogram2>),
}

impl Object {
    pub fn kind(&self) -> Kind {
        match self {
            Object::Optical1(_) => Kind::Optical1,
            Object::Optical2(_) => Kind::Optical2,
            Object::PhaseSpace(f) if f.particles() == 2 => Kind::PhaseSpace2,
            Object::PhaseSpace(_) => Kind::PhaseSpace1,
            Object::DensityMatrix(_) => Kind::DensityMatrix,
            Object::Wavefunction { .. } => Kind::Wavefunction,
            Object::Trajectory1(_) | Object::Trajectory2(_) => Kind::Trajectory,
        }
    }

    /// Invariant checks of the object's type; snapshots use the evolution tolerances.
    pub fn check(&self, tol: &Tolerances) -> InvariantReport {
        let evolution = evolution_tolerances(tol);
        match self {
            Object::Optical1(w) => w.check(tol),
            Object::Optical2(w) => w.check(tol),
            Object::PhaseSpace(f) => f.check(tol),
            Object::DensityMatrix(r) => r.check(tol),
            Object::Wavefunction { axis, psi } => {
                DensityMatrix::pure(axis.clone(), psi).map(|r| r.check(tol)).unwrap_or_default()
            }
            Object::Trajectory1(t) => merge(t.snapshots.iter().map(|w| w.check(&evolution))),
            Object::Trajectory2(t) => merge(t.snapshots.iter().map(|w| w.check(&evolution))),
        }
    }

    /// Encodes the object; `metadata` is stored verbatim alongside entries the encoding needs.
    pub fn to_container(&self, mut metadata: BTreeMap<String, String>) -> Result<Container> {
        let (axes, payload) = match self {
            Object::Optical1(w) => (optical1_axes(w), Payload::Real(w.values().iter().copied().collect())),
            Object::Optical2(w) => (optical2_axes(w), Payload::Real(w.values().iter().copied().collect())),
            Object::PhaseSpace(f) => {
                let axes = if f.particles() == 1 {
                    vec![AxisSpec::new("q", &f.q_axes()[0]), AxisSpec::new("p", &f.p_axes()[0])]
                } else {
                    vec![
                        AxisSpec::new("q1", &f.q_axes()[0]),
                        AxisSpec::new("p1", &f.p_axes()[0]),
                        AxisSpec::new("q2", &f.q_axes()[1]),
                        AxisSpec::new("p2", &f.p_axes()[1]),
                    ]
                };
                (axes, Payload::Real(f.values().iter().copied().collect()))
            }
            Object::DensityMatrix(r) => {
                let xs = r.x_axes();
                let names: &[&str] = if xs.len() == 1 { &["x"] } else { &["x1", "x2"] };
                let mut axes: Vec<AxisSpec> = names.iter().zip(xs).map(|(n, a)| AxisSpec::new(n, a)).collect();
                axes.extend(names.iter().zip(xs).map(|(n, a)| AxisSpec::new(&format!("{n}'"), a)));
                (axes, Payload::Complex(r.values().iter().copied().collect()))
            }
            Object::Wavefunction { axis, psi } => (vec![AxisSpec::new("x", axis)], Payload::Complex(psi.clone())),
            Object::Trajectory1(t) => {
                let first = t.snapshots.first().ok_or_else(|| Error::Shape("empty trajectory".into()))?;
                metadata.insert("trajectory.inner".into(), Kind::Optical1.to_string());
                let mut axes = vec![snapshot_axis(t.len())];
                axes.extend(optical1_axes(first));
                let values = t.snapshots.iter().flat_map(|w| w.values().iter().copied()).collect();
                encode_log(&mut metadata, &t.times, &t.log);
                (axes, Payload::Real(values))
            }
            Object::Trajectory2(t) => {
                let first = t.snapshots.first().ok_or_else(|| Error::Shape("empty trajectory".into()))?;
                metadata.insert("trajectory.inner".into(), Kind::Optical2.to_string());
                let mut axes = vec![snapshot_axis(t.len())];
                axes.extend(optical2_axes(first));
                let values = t.snapshots.iter().flat_map(|w| w.values().iter().copied()).collect();
                encode_log(&mut metadata, &t.times, &t.log);
                (axes, Payload::Real(values))
            }
        };
        let header = Header { kind: self.kind(), dtype: payload.dtype(), axes, metadata };
        let expected = header.element_count();
        if payload.len() != expected {
            return Err(Error::PayloadLength { expected: expected * header.dtype.size(), actual: payload.len() * header.dtype.size() });
        }
        Ok(Container { header, payload })
    }

    pub fn from_container(c: &Container) -> Result<Object> {
        let h = &c.header;
        let want_axes = |n: usize| -> Result<Vec<AxisGrid>> {
            if h.axes.len() != n {
                return Err(Error::Format(format!("{} expects {n} axes, header lists {}", h.kind, h.axes.len())));
            }
            h.axes.iter().map(|a| a.grid()).collect()
        };
        let shape = |e: ndarray::ShapeError| Error::Shape(e.to_string());
        Ok(match h.kind {
            Kind::Optical1 => {
                let a = want_axes(2)?;
                let v = Array2::from_shape_vec((a[0].len(), a[1].len()), c.payload.real()?.to_vec()).map_err(shape)?;
                Object::Optical1(OpticalTomogram1::new(a[0].clone(), a[1].clone(), v)?)
            }
            Kind::Optical2 => {
                let a = want_axes(4)?;
                let v = Array4::from_shape_vec((a[0].len(), a[1].len(), a[2].len(), a[3].len()), c.payload.real()?.to_vec())
                    .map_err(shape)?;
                let [x1, x2, t1, t2] = <[AxisGrid; 4]>::try_from(a).expect("four axes");
                Object::Optical2(OpticalTomogram2::new(x1, x2, t1, t2, v)?)
            }
            Kind::PhaseSpace1 | Kind::PhaseSpace2 => {
                let n = if h.kind == Kind::PhaseSpace1 { 2 } else { 4 };
                let a = want_axes(n)?;
                let dims: Vec<usize> = a.iter().map(|g| g.len()).collect();
                let v = ArrayD::from_shape_vec(IxDyn(&dims), c.payload.real()?.to_vec()).map_err(shape)?;
                let q = a.iter().step_by(2).cloned().collect();
                let p = a.iter().skip(1).step_by(2).cloned().collect();
                Object::PhaseSpace(PhaseSpaceDensity::new(q, p, v)?)
            }
            Kind::DensityMatrix => {
                if h.axes.len() != 2 && h.axes.len() != 4 {
                    return Err(Error::Format("density-matrix expects 2 or 4 axes".into()));
                }
                let a: Vec<AxisGrid> = h.axes.iter().map(|a| a.grid()).collect::<Result<_>>()?;
                let modes = a.len() / 2;
                if a[..modes] != a[modes..] {
                    return Err(Error::Format("row and column axes of a density matrix must agree".into()));
                }
                let n: usize = a[..modes].iter().map(|g| g.len()).product();
                let v = Array2::from_shape_vec((n, n), c.payload.complex()?.to_vec()).map_err(shape)?;
                Object::DensityMatrix(DensityMatrix::new(a[..modes].to_vec(), v)?)
            }
            Kind::Wavefunction => {
                let a = want_axes(1)?;
                a[0].require_kind(AxisKind::MatrixX)?;
                Object::Wavefunction { axis: a[0].clone(), psi: c.payload.complex()?.to_vec() }
            }
            Kind::Trajectory => decode_trajectory(c)?,
        })
    }
}

/// `tol` loosened to at least the slack allowed for time-stepped snapshots.
pub fn evolution_tolerances(tol: &Tolerances) -> Tolerances {
    let e = Tolerances::EVOLUTION;
    Tolerances {
        norm: tol.norm.max(e.norm),
        grid_rel: tol.grid_rel.max(e.grid_rel),
        marginal: tol.marginal.max(e.marginal),
        ..*tol
    }
}

fn merge(reports: impl Iterator<Item = InvariantReport>) -> InvariantReport {
    InvariantReport { checks: reports.flat_map(|r| r.checks).collect() }
}

fn optical1_axes(w: &OpticalTomogram1) -> Vec<AxisSpec> {
    vec![AxisSpec::new("X", w.x_axis()), AxisSpec::new("theta", w.theta_axis())]
}

fn optical2_axes(w: &OpticalTomogram2) -> Vec<AxisSpec> {
    vec![
        AxisSpec::new("X1", w.x1_axis()),
        AxisSpec::new("X2", w.x2_axis()),
        AxisSpec::new("theta1", w.theta1_axis()),
        AxisSpec::new("theta2", w.theta2_axis()),
    ]
}

/// Snapshot index axis; the physical times are stored in `trajectory.times`.
fn snapshot_axis(n: usize) -> AxisSpec {
    AxisSpec { name: "snapshot".into(), kind: AxisKind::Time, start: 0.0, step: 1.0, count: n }
}

fn join(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(",")
}

fn encode_log(meta: &mut BTreeMap<String, String>, times: &[f64], log: &StepLog) {
    meta.insert("trajectory.times".into(), join(times));
    meta.insert("log.steps".into(), log.steps.to_string());
    meta.insert("log.substeps".into(), log.substeps.to_string());
    meta.insert("log.h".into(), format!("{:?}", log.h));
    meta.insert("log.dt_max".into(), format!("{:?}", log.dt_max));
    meta.insert("log.spectral_radius".into(), format!("{:?}", log.spectral_radius));
    meta.insert("log.max_drift".into(), format!("{:?}", log.max_drift));
    meta.insert("log.drifts".into(), join(&log.drifts));
    meta.insert("log.rank".into(), log.rank.to_string());
}

fn meta_value<T: FromStr>(meta: &BTreeMap<String, String>, key: &str) -> Result<T> {
    meta.get(key)
        .ok_or_else(|| Error::Format(format!("trajectory metadata lacks '{key}'")))?
        .parse()
        .map_err(|_| Error::Format(format!("malformed metadata '{key}'")))
}

fn meta_list(meta: &BTreeMap<String, String>, key: &str) -> Result<Vec<f64>> {
    let s = meta.get(key).ok_or_else(|| Error::Format(format!("trajectory metadata lacks '{key}'")))?;
    if s.is_empty() {
        return Ok(Vec::new());
    }
    s.split(',').map(|x| x.parse().map_err(|_| Error::Format(format!("malformed metadata '{key}'")))).collect()
}

fn decode_trajectory(c: &Container) -> Result<Object> {
    let h = &c.header;
    let m = &h.metadata;
    let times = meta_list(m, "trajectory.times")?;
    let n = h.axes.first().map_or(0, |a| a.count);
    if times.len() != n {
        return Err(Error::Format(format!("{} times for {n} snapshots", times.len())));
    }
    let log = StepLog {
        steps: meta_value(m, "log.steps")?,
        substeps: meta_value(m, "log.substeps")?,
        h: meta_value(m, "log.h")?,
        dt_max: meta_value(m, "log.dt_max")?,
        spectral_radius: meta_value(m, "log.spectral_radius")?,
        max_drift: meta_value(m, "log.max_drift")?,
        drifts: meta_list(m, "log.drifts")?,
        rank: meta_value(m, "log.rank")?,
    };
    let inner: Kind = meta_value::<String>(m, "trajectory.inner")?.parse()?;
    let values = c.payload.real()?;
    let per = values.len() / n.max(1);
    let snapshot = |k: usize, kind: Kind| {
        let header = Header { kind, dtype: Dtype::Real64, axes: h.axes[1..].to_vec(), metadata: BTreeMap::new() };
        let payload = Payload::Real(values[k * per..(k + 1) * per].to_vec());
        Object::from_container(&Container { header, payload })
    };
    match inner {
        Kind::Optical1 => {
            let snapshots = (0..n)
                .map(|k| match snapshot(k, inner)? {
                    Object::Optical1(w) => Ok(w),
                    _ => unreachable!("optical1 decodes to Optical1"),
                })
                .collect::<Result<_>>()?;
            Ok(Object::Trajectory1(Trajectory { times, snapshots, log }))
        }
        Kind::Optical2 => {
            let snapshots = (0..n)
                .map(|k| match snapshot(k, inner)? {
                    Object::Optical2(w) => Ok(w),
                    _ => unreachable!("optical2 decodes to Optical2"),
                })
                .collect::<Result<_>>()?;
            Ok(Object::Trajectory2(Trajectory { times, snapshots, log }))
        }
        other => Err(Error::Format(format!("trajectories hold optical1 or optical2 snapshots, not {other}"))),
    }
}

/// A decoded container; objects failing their invariants are kept, flagged as quarantined.
#[derive(Debug, Clone, PartialEq)]
pub struct Loaded {
    pub object: Object,
    pub metadata: BTreeMap<String, String>,
    pub report: InvariantReport,
}

impl Loaded {
    pub fn is_quarantined(&self) -> bool {
        !self.report.is_ok()
    }

    /// The object, or an invariant error carrying the diagnostics.
    pub fn require_valid(self) -> Result<Object> {
        if self.is_quarantined() {
            return Err(Error::Invariant(self.report.summary()));
        }
        Ok(self.object)
    }
}

/// Writes `object` after checking its invariants.
pub fn write_container(
    object: &Object,
    metadata: BTreeMap<String, String>,
    path: &Path,
    tol: &Tolerances,
) -> Result<()> {
    let report = object.check(tol);
    if !report.is_ok() {
        return Err(Error::Invariant(report.summary()));
    }
    object.to_container(metadata)?.write(path)
}

/// Writes `object` even if it fails its invariants, recording the failures under
/// `quarantine.reason` so readers see why the file is quarantined.
pub fn write_quarantined(
    object: &Object,
    mut metadata: BTreeMap<String, String>,
    path: &Path,
    tol: &Tolerances,
) -> Result<InvariantReport> {
    let report = object.check(tol);
    if !report.is_ok() {
        metadata.insert("quarantine.reason".into(), report.summary());
    }
    object.to_container(metadata)?.write(path)?;
    Ok(report)
}

pub fn read_container(path: &Path, tol: &Tolerances) -> Result<Loaded> {
    decode(&Container::read(path)?, tol)
}

pub fn decode(c: &Container, tol: &Tolerances) -> Result<Loaded> {
    let object = Object::from_container(c)?;
    let report = object.check(tol);
    if !report.is_ok() {
        log::warn!("container quarantined: {}", report.summary());
    }
    Ok(Loaded { object, metadata: c.header.metadata.clone(), report })
}

const TOLERANCE_KEYS: [&str; 5] = ["tol.norm", "tol.grid_rel", "tol.classical_rel", "tol.quantum_rel", "tol.marginal"];

/// Metadata entries recording the tolerances an object was checked against.
pub fn tolerance_metadata(tol: &Tolerances) -> BTreeMap<String, String> {
    let values = [tol.norm, tol.grid_rel, tol.classical_rel, tol.quantum_rel, tol.marginal];
    TOLERANCE_KEYS.iter().zip(values).map(|(k, v)| (k.to_string(), format!("{v:?}"))).collect()
}

/// Tolerances recorded in metadata, overlaid on `base` key by key.
pub fn recorded_tolerances(meta: &BTreeMap<String, String>, base: &Tolerances) -> Result<Tolerances> {
    let mut tol = *base;
    let slots = [&mut tol.norm, &mut tol.grid_rel, &mut tol.classical_rel, &mut tol.quantum_rel, &mut tol.marginal];
    for (key, slot) in TOLERANCE_KEYS.iter().zip(slots) {
        if meta.contains_key(*key) {
            *slot = meta_value(meta, key)?;
        }
    }
    Ok(tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn header() -> Header {
        let mut metadata = BTreeMap::new();
        metadata.insert("note".to_string(), "two\nlines \\ backslash".to_string());
        Header {
            kind: Kind::Optical1,
            dtype: Dtype::Real64,
            axes: vec![
                AxisSpec { name: "X".into(), kind: AxisKind::Position, start: -0.1, step: 0.1, count: 3 },
                AxisSpec { name: "theta".into(), kind: AxisKind::Angle, start: 0.0, step: 1.0, count: 1 },
            ],
            metadata,
        }
    }

    #[test]
    fn header_text_round_trips_with_escapes() {
        let h = header();
        let text = h.to_text().unwrap();
        assert!(text.starts_with("TOMO1\nkind: optical1\ndtype: real64\naxis: X position-X -0.1 0.1 3\n"));
        assert!(text.contains("meta.note: two\\nlines \\\\ backslash\n"));
        assert!(text.ends_with("\n\n"));
        assert_eq!(Header::parse(text.trim_end_matches('\n')).unwrap(), h);
    }

    #[test]
    fn kinds_and_dtypes_parse_back() {
        for k in Kind::ALL {
            assert_eq!(k.as_str().parse::<Kind>().unwrap(), k);
        }
        assert_eq!("complex128".parse::<Dtype>().unwrap(), Dtype::Complex128);
        assert!("float32".parse::<Dtype>().is_err());
    }

    #[test]
    fn header_errors_are_format_errors() {
        for text in ["TOMO2\nkind: optical1", "BOGUS", "TOMO1\nkind: optical1", "TOMO1\nkind: x\ndtype: real64",
            "TOMO1\nkind: optical1\ndtype: real64\ncolour: red", "TOMO1\nkind: optical1\ndtype: real64\naxis: X position-X 0 1",
            "TOMO1\nkind: optical1\ndtype: real64\nmeta.a: bad\\q"]
        {
            let err = Header::parse(text).unwrap_err();
            assert!(matches!(err, Error::Format(_)), "{text}: {err}");
        }
    }

    #[test]
    fn complex_payload_is_interleaved_little_endian() {
        let p = Payload::Complex(vec![Complex64::new(1.0, -2.0)]);
        let bytes = p.to_bytes();
        assert_eq!(&bytes[..8], &1.0f64.to_le_bytes());
        assert_eq!(&bytes[8..], &(-2.0f64).to_le_bytes());
        assert_eq!(Payload::from_bytes(Dtype::Complex128, &bytes), p);
    }

    #[test]
    fn payload_is_row_major_with_last_axis_fastest() {
        let x = AxisGrid::new(AxisKind::Position, -1.0, 1.0, 3).unwrap();
        let t = AxisGrid::angles(2).unwrap();
        let w = OpticalTomogram1::new(x, t, array![[1.0, 2.0], [3.0, 4.0], [5.0, 6.0]]).unwrap();
        let c = Object::Optical1(w).to_container(BTreeMap::new()).unwrap();
        assert_eq!(c.payload, Payload::Real(vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]));
    }

    #[test]
    fn tolerances_round_trip_through_metadata() {
        let tol = Tolerances { norm: 3e-5, ..Tolerances::EVOLUTION };
        assert_eq!(recorded_tolerances(&tolerance_metadata(&tol), &Tolerances::DEFAULT).unwrap(), tol);
        assert_eq!(recorded_tolerances(&BTreeMap::new(), &Tolerances::DEFAULT).unwrap(), Tolerances::DEFAULT);
    }
}
