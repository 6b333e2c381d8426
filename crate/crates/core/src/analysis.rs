//! The full analysis pipeline behind the `analyze` and `foliate` commands.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::expr::PlanarMap;
use crate::foliation::{
    default_parameters, diagonalize_involution, trace_leaves, FoliationError, FoliationKind, Leaf,
    LeafSeeds, TraceOptions,
};
use crate::gallery;
use crate::involution::{
    find_fixed_points, orientation, verify_involution, FixedPoint, FixedPointOptions,
    InvolutionVerdict, Orientation, OrientationClass, Region,
};
use crate::linalg2::{Mat2, Point};
use crate::linearize::{
    injectivity_scan, spectrum_shift_check, InjectivityCertificate, InjectivityStatus, ScanOptions,
    StandardMap,
};
use crate::spectral::{
    base_point, sample_spectrum, verdict_from_samples, BasePoint, ConditionVerdict, Hypothesis,
    SpectralOptions,
};

/// Fields whose content may legitimately differ between identical runs.
pub const NONDETERMINISTIC_FIELDS: [&str; 3] = [
    "timings_ms",
    "injectivity.witness",
    "injectivity.cells_checked",
];

/// Where the map comes from: an expression pair or `gallery:NAME[:n]`.
#[derive(Debug, Clone, PartialEq)]
pub enum MapSpec {
    Expression(String),
    Gallery { name: String, n: Option<u32> },
}

impl FromStr for MapSpec {
    type Err = gallery::GalleryError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().strip_prefix("gallery:") {
            Some(rest) => {
                let (name, n) = gallery::parse_spec(rest)?;
                Ok(MapSpec::Gallery { name, n })
            }
            None => Ok(MapSpec::Expression(s.to_string())),
        }
    }
}

impl fmt::Display for MapSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MapSpec::Expression(src) => f.write_str(src),
            MapSpec::Gallery { name, n: Some(n) } => write!(f, "gallery:{name}:{n}"),
            MapSpec::Gallery { name, n: None } => write!(f, "gallery:{name}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Phase {
    Parse,
    Verify,
    Orientation,
    FixedPoints,
    Spectrum,
    Linearize,
    Injectivity,
    SpectrumShift,
    Foliation,
}

impl Phase {
    pub fn tag(self) -> &'static str {
        match self {
            Phase::Parse => "parse",
            Phase::Verify => "verify",
            Phase::Orientation => "orientation",
            Phase::FixedPoints => "fixed-points",
            Phase::Spectrum => "spectrum",
            Phase::Linearize => "linearize",
            Phase::Injectivity => "injectivity",
            Phase::SpectrumShift => "spectrum-shift",
            Phase::Foliation => "foliation",
        }
    }
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

/// An error tagged with the phase that produced it.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("[{phase}] {message}")]
pub struct AnalysisError {
    pub phase: Phase,
    pub message: String,
}

impl AnalysisError {
    pub fn new(phase: Phase, err: impl fmt::Display) -> Self {
        AnalysisError {
            phase,
            message: err.to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnalysisOptions {
    /// `None` picks the gallery entry's window, else `[-5, 5]²`.
    pub window: Option<[f64; 4]>,
    pub grid: usize,
    pub epsilon: f64,
    pub tol: f64,
    pub scan: usize,
    pub collision_tol: f64,
    pub separation_min: Option<f64>,
    pub class_tol: f64,
    pub recenter: Option<Point>,
    pub leaves: Option<usize>,
    pub step: Option<f64>,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        AnalysisOptions {
            window: None,
            grid: 41,
            epsilon: 0.1,
            tol: 1e-9,
            scan: 201,
            collision_tol: 1e-6,
            separation_min: None,
            class_tol: 1e-6,
            recenter: None,
            leaves: None,
            step: None,
        }
    }
}

/// A map resolved from its spec, with the window it will be analysed on.
#[derive(Debug, Clone, PartialEq)]
pub struct ResolvedMap {
    pub spec: MapSpec,
    pub map: PlanarMap,
    pub recentered_at: Option<Point>,
    pub window: Region,
}

pub fn resolve(spec: &MapSpec, opts: &AnalysisOptions) -> Result<ResolvedMap, AnalysisError> {
    let parse_err = |e: &dyn fmt::Display| AnalysisError::new(Phase::Parse, e);
    let (mut map, mut recentered_at, default_window) = match spec {
        MapSpec::Expression(src) => (
            PlanarMap::parse(src).map_err(|e| parse_err(&e))?,
            None,
            None,
        ),
        MapSpec::Gallery { name, n } => {
            let entry = gallery::get(name, *n).map_err(|e| parse_err(&e))?;
            (entry.map, entry.recentered_at, Some(entry.default_window))
        }
    };
    if let Some(c) = opts.recenter {
        map = map
            .recentered(c)
            .ok_or_else(|| AnalysisError::new(Phase::Parse, "native maps cannot be recentered"))?;
        recentered_at = Some(recentered_at.unwrap_or_default() + c);
    }
    let window = match (opts.window, default_window) {
        (Some([a, b, c, d]), _) => Region::new(a, b, c, d, opts.grid),
        (None, Some(w)) => w.with_grid(opts.grid),
        (None, None) => Region::new(-5.0, 5.0, -5.0, 5.0, opts.grid),
    }
    .map_err(|e| parse_err(&e))?;
    Ok(ResolvedMap {
        spec: spec.clone(),
        map,
        recentered_at,
        window,
    })
}

/// The command line that reproduces a report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Header {
    pub tool: String,
    pub version: String,
    pub args: Vec<String>,
    pub command: String,
}

fn header(spec: &MapSpec, window: &Region, opts: &AnalysisOptions) -> Header {
    let mut args = vec!["analyze".to_string()];
    match spec {
        MapSpec::Expression(src) => args.extend(["--map".to_string(), src.clone()]),
        MapSpec::Gallery { .. } => {
            let s = spec.to_string();
            args.extend(["--gallery".to_string(), s["gallery:".len()..].to_string()]);
        }
    }
    let w = format!(
        "{},{},{},{}",
        window.x_min, window.x_max, window.y_min, window.y_max
    );
    args.extend([
        "--window".into(),
        w,
        "--grid".into(),
        opts.grid.to_string(),
        "--eps".into(),
        opts.epsilon.to_string(),
        "--tol".into(),
        format!("{:e}", opts.tol),
        "--scan".into(),
        opts.scan.to_string(),
    ]);
    if let Some(c) = opts.recenter {
        args.extend(["--recenter".into(), format!("{},{}", c.x, c.y)]);
    }
    if let Some(k) = opts.leaves {
        args.extend(["--leaves".into(), k.to_string()]);
    }
    if let Some(s) = opts.step {
        args.extend(["--step".into(), s.to_string()]);
    }
    let command = std::iter::once("involution".to_string())
        .chain(args.iter().map(|a| shell_quote(a)))
        .collect::<Vec<_>>()
        .join(" ");
    Header {
        tool: "involution".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        args,
        command,
    }
}

fn shell_quote(s: &str) -> String {
    let plain = s
        .chars()
        .all(|c| c.is_ascii_alphanumeric() || "-_.,:/=+".contains(c));
    if plain && !s.is_empty() {
        s.to_string()
    } else {
        format!("'{}'", s.replace('\'', r"'\''"))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub header: Header,
    pub map_source: String,
    /// The analysed map after any recentering.
    pub map: String,
    pub recentered_at: Option<Point>,
    pub window: Region,
    pub involution: InvolutionVerdict,
    pub orientation: OrientationClass,
    pub fixed_points: Vec<FixedPoint>,
    pub fixed_set_is_curve: bool,
    pub base_point: BasePoint,
    pub conditions: Vec<ConditionVerdict>,
    pub epsilon: f64,
    pub hypothesis: Option<Hypothesis>,
    pub theorem_verdict: String,
    pub injectivity: InjectivityCertificate,
    pub spectrum_shift_deviation: Option<f64>,
    pub foliation_kind: Option<FoliationKind>,
    pub leaf_count: usize,
    pub leaves_truncated: usize,
    /// Hypothesis verified and no collision found, both on the window.
    pub foliation_certified: bool,
    pub timings_ms: BTreeMap<String, f64>,
    pub nondeterministic_fields: Vec<String>,
}

/// Everything computed by one pipeline run.
#[derive(Debug, Clone)]
pub struct Analysis {
    pub report: AnalysisReport,
    pub resolved: ResolvedMap,
    pub standard_map: StandardMap,
    pub leaves: Vec<Leaf>,
}

#[cfg(not(target_arch = "wasm32"))]
mod clock {
    use std::time::Instant;

    pub struct Stopwatch(Instant);

    impl Stopwatch {
        pub fn start() -> Self {
            Stopwatch(Instant::now())
        }

        pub fn ms(&self) -> f64 {
            self.0.elapsed().as_secs_f64() * 1e3
        }
    }
}

#[cfg(target_arch = "wasm32")]
mod clock {
    pub struct Stopwatch;

    impl Stopwatch {
        pub fn start() -> Self {
            Stopwatch
        }

        pub fn ms(&self) -> f64 {
            0.0
        }
    }
}

struct Timings(BTreeMap<String, f64>);

impl Timings {
    fn run<T, E: fmt::Display>(
        &mut self,
        phase: Phase,
        f: impl FnOnce() -> Result<T, E>,
    ) -> Result<T, AnalysisError> {
        let sw = clock::Stopwatch::start();
        let out = f().map_err(|e| AnalysisError::new(phase, e));
        self.0.insert(phase.tag().to_string(), sw.ms());
        out
    }
}

/// verify → orientation → fixed points → spectrum → verdict → standard map
/// → injectivity → spectrum shift → default leaves.
pub fn analyze(spec: &MapSpec, opts: &AnalysisOptions) -> Result<Analysis, AnalysisError> {
    let resolved = resolve(spec, opts)?;
    let map = &resolved.map;
    let region = resolved.window;
    let mut t = Timings(BTreeMap::new());

    let involution = t.run(Phase::Verify, || verify_involution(map, &region, opts.tol))?;
    let orient = t.run(Phase::Orientation, || orientation(map, &region))?;
    let fp_opts = FixedPointOptions {
        class_tol: opts.class_tol,
        ..FixedPointOptions::default()
    };
    let fixed = t.run(Phase::FixedPoints, || {
        find_fixed_points(map, &region, &fp_opts)
    })?;
    let spectral = SpectralOptions {
        epsilon: opts.epsilon,
        im_tol: opts.tol,
    };
    let (base, verdict) = t.run(Phase::Spectrum, || {
        let base = base_point(map, Some(&fixed)).map_err(|e| e.to_string())?;
        let samples = sample_spectrum(map, &region, &base.jacobian).map_err(|e| e.to_string())?;
        Ok::<_, String>((
            base,
            verdict_from_samples(orient.kind, &samples, &region, &spectral),
        ))
    })?;
    let h = t.run(Phase::Linearize, || StandardMap::new(map.clone()))?;
    let scan = ScanOptions {
        scan_n: opts.scan,
        collision_tol: opts.collision_tol,
        separation_min: opts.separation_min,
    };
    let injectivity = t.run(Phase::Injectivity, || injectivity_scan(&h, &region, &scan))?;
    let linear = h.linear_part();
    let shift =
        if orient.kind == Orientation::Preserving && (linear + Mat2::IDENTITY).max_abs() <= 1e-9 {
            Some(t.run(Phase::SpectrumShift, || spectrum_shift_check(map, &region))?)
        } else {
            None
        };

    let (kind, leaves) = t.run(Phase::Foliation, || match diagonalize_involution(&linear) {
        Ok(fol) => {
            let trace = trace_options(opts);
            let seeds = LeafSeeds::new(&h, &fol, &region)?;
            let params = default_parameters(&fol, &seeds, opts.leaves);
            Ok((
                Some(fol.kind),
                trace_leaves(&h, &fol, &params, &region, &trace)?,
            ))
        }
        Err(FoliationError::IdentityInvolution) => Ok((None, Vec::new())),
        Err(e) => Err(e),
    })?;

    let certified = verdict.hypothesis.is_some()
        && involution.pass
        && injectivity.status == InjectivityStatus::NoCollisionFound
        && kind.is_some();
    let report = AnalysisReport {
        header: header(spec, &region, opts),
        map_source: spec.to_string(),
        map: map.to_string(),
        recentered_at: resolved.recentered_at,
        window: region,
        involution,
        orientation: orient,
        fixed_points: fixed.points.clone(),
        fixed_set_is_curve: fixed.curve,
        base_point: base,
        conditions: verdict.conditions,
        epsilon: verdict.epsilon,
        hypothesis: verdict.hypothesis,
        theorem_verdict: verdict.text,
        injectivity,
        spectrum_shift_deviation: shift,
        foliation_kind: kind,
        leaf_count: leaves.len(),
        leaves_truncated: leaves.iter().filter(|l| l.truncated).count(),
        foliation_certified: certified,
        timings_ms: t.0,
        nondeterministic_fields: NONDETERMINISTIC_FIELDS
            .iter()
            .map(|s| s.to_string())
            .collect(),
    };
    Ok(Analysis {
        report,
        resolved,
        standard_map: h,
        leaves,
    })
}

fn trace_options(opts: &AnalysisOptions) -> TraceOptions {
    let mut trace = TraceOptions::default();
    if let Some(s) = opts.step {
        trace.step = s;
    }
    trace
}

/// Run the pipeline and return the leaves, refusing uncertified maps unless
/// `force` is set.
pub fn foliate(
    spec: &MapSpec,
    opts: &AnalysisOptions,
    force: bool,
) -> Result<Analysis, AnalysisError> {
    let analysis = analyze(spec, opts)?;
    let r = &analysis.report;
    if r.foliation_kind.is_none() {
        return Err(AnalysisError::new(
            Phase::Foliation,
            "Dφ(0) = I: the map is the identity near the origin and has no foliation to trace",
        ));
    }
    if !r.foliation_certified && !force {
        return Err(AnalysisError::new(
            Phase::Foliation,
            format!(
                "foliation is uncertified ({}); pass --force to trace anyway",
                r.theorem_verdict
            ),
        ));
    }
    Ok(analysis)
}

impl AnalysisReport {
    /// Pretty JSON with the nondeterministic fields removed.
    pub fn deterministic_json(&self) -> serde_json::Value {
        let mut v = serde_json::to_value(self).expect("report serializes");
        if let Some(obj) = v.as_object_mut() {
            obj.remove("timings_ms");
            if let Some(inj) = obj.get_mut("injectivity").and_then(|i| i.as_object_mut()) {
                inj.remove("witness");
                inj.remove("cells_checked");
            }
        }
        v
    }

    pub fn is_orientation_preserving(&self) -> bool {
        self.orientation.kind == Orientation::Preserving
    }
}
