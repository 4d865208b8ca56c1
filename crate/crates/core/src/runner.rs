//! Scenario configs, batch runs over (scenario, length, trial), CSV records and log-log plots.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coxeter::{find_good_slope, RootSystem, RootSystemSpec, Slope};
use crate::error::{Error, Result};
use crate::fan::{fill_tube_loop, wobble_loop};
use crate::filling::{cone_fill, cylinder_descend, dehn_exponent, fill_flat_loop, plane_section, CylinderOptions, LogLogFit};
use crate::linalg::{orthonormal_basis, Vector};
use crate::partition::{validate_partition, FillingPartition, Loop};
use crate::trace::{horoball_polytope, min_set, random_unit, BusemannTrace, TraceFile};
use crate::tube::ConvexPolytope;

pub const CSV_HEADER: &str = "scenario,length,mesh,trial,area,flat_bricks,wild_bricks,seed,ms";

/// Environment variable that replaces the default output directory.
pub const OUT_DIR_ENV: &str = "HOROFILL_OUT_DIR";

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct Config {
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub out_dir: Option<PathBuf>,
    #[serde(default)]
    pub scenarios: Vec<Scenario>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Scenario {
    pub name: String,
    pub host: HostSpec,
    #[serde(rename = "loop")]
    pub loops: LoopSpec,
    #[serde(default = "one")]
    pub mesh: f64,
    #[serde(default = "one_trial")]
    pub trials: usize,
}

fn one() -> f64 {
    1.0
}

fn one_trial() -> usize {
    1
}

fn default_delta1() -> f64 {
    0.05
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum HostSpec {
    /// Loops in `E^dim`, filled by a cone.
    Flat { dim: usize },
    /// Loops on `∂N_R(P)`.
    Tube {
        polytope: PolytopeSpec,
        #[serde(default = "one")]
        radius: f64,
    },
    /// Every orbit gradient with offset zero.
    SymmetricTrace { root_system: RootSystemSpec, theta: Vec<f64> },
    Trace { trace: TraceFile },
    /// Flat loops pushed down a good slope and capped by a cone.
    Cylinder {
        root_system: RootSystemSpec,
        theta: Vec<f64>,
        #[serde(default = "default_delta1")]
        delta1: f64,
    },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum PolytopeSpec {
    Point { dim: usize },
    UnitSegment { dim: usize },
    UnitSquare { dim: usize },
    Vertices { vertices: Vec<Vec<f64>> },
}

impl PolytopeSpec {
    pub fn build(&self) -> Result<ConvexPolytope> {
        match self {
            PolytopeSpec::Point { dim } => Ok(ConvexPolytope::point(Vector::zeros(*dim))),
            PolytopeSpec::UnitSegment { dim } => Ok(ConvexPolytope::unit_segment(*dim)),
            PolytopeSpec::UnitSquare { dim } => Ok(ConvexPolytope::unit_square(*dim)),
            PolytopeSpec::Vertices { vertices } => {
                ConvexPolytope::from_vertices(vertices.iter().map(|v| Vector::from_column_slice(v)).collect())
            }
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LoopSpec {
    #[serde(flatten)]
    pub family: LoopFamily,
    pub lengths: Vec<f64>,
    /// Mixed into the job seeds; defaults to zero.
    #[serde(default)]
    pub seed: u64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum LoopFamily {
    /// Latitude circle with a sinusoidal wobble around a random axis (tube hosts).
    Wobble {
        #[serde(default = "default_wobble_spacing")]
        spacing: f64,
    },
    /// Star-shaped polygon in a random 2-plane (flat and cylinder hosts).
    Polygon {
        #[serde(default = "default_sides")]
        sides: usize,
        #[serde(default)]
        jitter: f64,
    },
    /// Section of a sublevel set by a random plane through the min set (trace hosts).
    LevelSection,
}

fn default_wobble_spacing() -> f64 {
    0.25
}

fn default_sides() -> usize {
    64
}

/// One CSV row.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub scenario: String,
    pub length: f64,
    pub mesh: f64,
    pub trial: usize,
    pub area: usize,
    pub flat_bricks: usize,
    pub wild_bricks: usize,
    pub seed: u64,
    pub ms: u64,
}

#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    pub seed: Option<u64>,
    pub jobs: Option<usize>,
    pub keep_partitions: bool,
    pub out_dir: Option<PathBuf>,
}

#[derive(Clone, Debug)]
pub struct ScenarioFit {
    pub scenario: String,
    pub fit: Option<LogLogFit>,
    /// Why no fit was made.
    pub note: Option<String>,
}

#[derive(Clone, Debug)]
pub struct RunSummary {
    pub records: Vec<RunRecord>,
    pub fits: Vec<ScenarioFit>,
    pub csv: PathBuf,
    pub plots: Vec<PathBuf>,
}

enum Prepared {
    Flat { dim: usize },
    Tube { polytope: Arc<ConvexPolytope>, radius: f64 },
    Trace { trace: BusemannTrace, center: Vector },
    Cylinder { rs: Arc<RootSystem>, theta: Slope, beta: Slope, delta1: f64 },
}

impl Prepared {
    fn dim(&self) -> usize {
        match self {
            Prepared::Flat { dim } => *dim,
            Prepared::Tube { polytope, .. } => polytope.ambient_dim(),
            Prepared::Trace { trace, .. } => trace.dim(),
            Prepared::Cylinder { rs, .. } => rs.rank(),
        }
    }
}

pub fn load_config(path: &Path) -> Result<Config> {
    let text = fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_config(&text)
}

/// Parse and validate; serde errors carry line and column.
pub fn parse_config(text: &str) -> Result<Config> {
    let cfg: Config = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
    for (i, s) in cfg.scenarios.iter().enumerate() {
        prepare(s).map_err(|e| scenario_error(i, s, e))?;
    }
    Ok(cfg)
}

fn scenario_error(i: usize, s: &Scenario, e: Error) -> Error {
    let msg = match e {
        Error::Config(m) => m,
        other => other.to_string(),
    };
    Error::Config(format!("scenarios[{i}] ({}): {msg}", s.name))
}

fn prepare(s: &Scenario) -> Result<Prepared> {
    if s.name.is_empty() || s.name.contains(|c: char| c == ',' || c == '/' || c.is_control()) {
        return Err(Error::Config(format!("name {:?} must be non-empty without commas or slashes", s.name)));
    }
    if !(s.mesh > 0.0 && s.mesh.is_finite()) {
        return Err(Error::Config(format!("field mesh: {} is not a positive number", s.mesh)));
    }
    let ls = &s.loops.lengths;
    if ls.iter().any(|l| !(*l > 0.0 && l.is_finite())) {
        return Err(Error::Config("field loop.lengths: lengths must be positive".into()));
    }
    if ls.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Config("field loop.lengths: lengths must be strictly increasing".into()));
    }
    let prepared = match &s.host {
        HostSpec::Flat { dim } => {
            if *dim < 2 {
                return Err(Error::Config("field host.dim: need at least 2".into()));
            }
            Prepared::Flat { dim: *dim }
        }
        HostSpec::Tube { polytope, radius } => {
            if !(*radius > 0.0) {
                return Err(Error::Config(format!("field host.radius: {radius} is not positive")));
            }
            Prepared::Tube { polytope: Arc::new(polytope.build()?), radius: *radius }
        }
        HostSpec::SymmetricTrace { root_system, theta } => {
            let rs = Arc::new(RootSystem::new(root_system.clone())?);
            let th = Slope::from_direction(&rs, &Vector::from_column_slice(theta))?;
            trace_host(BusemannTrace::symmetric(rs, th, 0.0)?)?
        }
        HostSpec::Trace { trace } => trace_host(BusemannTrace::from_file(trace)?)?,
        HostSpec::Cylinder { root_system, theta, delta1 } => {
            let rs = Arc::new(RootSystem::new(root_system.clone())?);
            let th = Slope::from_direction(&rs, &Vector::from_column_slice(theta))?;
            let good = find_good_slope(&rs, &th, *delta1)?;
            Prepared::Cylinder { rs, theta: th, beta: good.slope, delta1: *delta1 }
        }
    };
    let ok = matches!(
        (&prepared, &s.loops.family),
        (Prepared::Tube { .. }, LoopFamily::Wobble { .. })
            | (Prepared::Flat { .. } | Prepared::Cylinder { .. }, LoopFamily::Polygon { .. })
            | (Prepared::Trace { .. }, LoopFamily::LevelSection)
    );
    if !ok {
        return Err(Error::Config("field loop.family: not available on this host".into()));
    }
    if prepared.dim() < 2 {
        return Err(Error::Config("host dimension must be at least 2".into()));
    }
    Ok(prepared)
}

fn trace_host(trace: BusemannTrace) -> Result<Prepared> {
    let ms = min_set(&trace)?;
    if !ms.polytope.is_bounded() {
        return Err(Error::Hypothesis("the min set is unbounded".into()));
    }
    let vs = ms.polytope.vertices();
    let mut center = Vector::zeros(trace.dim());
    for v in vs {
        center += v;
    }
    center /= vs.len() as f64;
    Ok(Prepared::Trace { trace, center })
}

/// Seed of one job; a fixed mixing of the run seed, the scenario and the job coordinates.
pub fn job_seed(run_seed: u64, scenario: &str, loop_seed: u64, length_index: usize, trial: usize) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in scenario.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    let mut x = run_seed ^ h.rotate_left(17) ^ loop_seed.rotate_left(31) ^ ((length_index as u64) << 40) ^ (trial as u64);
    // splitmix64 finaliser
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

fn random_plane<R: Rng>(n: usize, rng: &mut R) -> (Vector, Vector) {
    loop {
        let a = random_unit(n, rng);
        let b = random_unit(n, rng);
        let basis = orthonormal_basis(&[a, b], 1e-6);
        if basis.len() == 2 {
            return (basis[0].clone(), basis[1].clone());
        }
    }
}

/// Star-shaped polygon of the given perimeter in the plane `span(e1, e2)`.
pub fn star_polygon<R: Rng>(e1: &Vector, e2: &Vector, length: f64, sides: usize, jitter: f64, rng: &mut R) -> Result<Vec<Vector>> {
    if sides < 3 {
        return Err(Error::Config("field loop.sides: need at least 3".into()));
    }
    if !(0.0..1.0).contains(&jitter) {
        return Err(Error::Config("field loop.jitter: must lie in [0, 1)".into()));
    }
    let pts: Vec<Vector> = (0..sides)
        .map(|k| {
            let phi = std::f64::consts::TAU * k as f64 / sides as f64;
            let r = 1.0 + jitter * (2.0 * rng.random::<f64>() - 1.0);
            (e1 * phi.cos() + e2 * phi.sin()) * r
        })
        .collect();
    let per = Loop::flat(pts.clone())?.length();
    Ok(pts.into_iter().map(|p| p * (length / per)).collect())
}

/// Level `t` whose section by the plane `center + span(e1, e2)` has the given perimeter.
pub fn level_for_perimeter(trace: &BusemannTrace, center: &Vector, e1: &Vector, e2: &Vector, length: f64) -> Result<(f64, Vec<Vector>)> {
    let base = trace.value(center);
    let section = |t: f64| -> Result<(f64, Vec<Vector>)> {
        let hb = horoball_polytope(trace, t)?;
        let pts = plane_section(&hb, center, e1, e2)?;
        Ok((Loop::flat(pts.clone())?.length(), pts))
    };
    let mut hi = 1.0f64;
    while section(base + hi)?.0 < length {
        hi *= 2.0;
        if hi > 1e12 {
            return Err(Error::Hypothesis("level sections do not reach the requested length".into()));
        }
    }
    let mut lo = 0.0f64;
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if section(base + mid)?.0 < length {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let t = base + hi;
    let (_, pts) = section(t)?;
    Ok((t, pts))
}

struct JobOutput {
    loop_points: Vec<Vector>,
    partition: FillingPartition,
}

fn run_job(p: &Prepared, family: &LoopFamily, length: f64, mesh: f64, seed: u64) -> Result<JobOutput> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match (p, family) {
        (Prepared::Tube { polytope, radius }, LoopFamily::Wobble { spacing }) => {
            let axis = random_unit(polytope.ambient_dim(), &mut rng);
            let lp = wobble_loop(polytope, *radius, &axis, length, *spacing)?;
            let tf = fill_tube_loop(polytope, *radius, &lp, mesh)?;
            Ok(JobOutput { loop_points: lp.vertices().to_vec(), partition: tf.partition })
        }
        (Prepared::Flat { dim }, LoopFamily::Polygon { sides, jitter }) => {
            let (e1, e2) = random_plane(*dim, &mut rng);
            let lp = Loop::flat(star_polygon(&e1, &e2, length, *sides, *jitter, &mut rng)?)?;
            let fp = cone_fill(&lp, mesh)?;
            Ok(JobOutput { loop_points: lp.vertices().to_vec(), partition: fp })
        }
        (Prepared::Cylinder { rs, theta, beta, delta1 }, LoopFamily::Polygon { sides, jitter }) => {
            let (e1, e2) = random_plane(rs.rank(), &mut rng);
            let lp = Loop::flat(star_polygon(&e1, &e2, length, *sides, *jitter, &mut rng)?)?;
            let opts = CylinderOptions { mesh, ..CylinderOptions::default() };
            let cd = cylinder_descend(&lp, beta, rs, theta, *delta1, &opts)?;
            let fp = cd.cap_with_cone(&lp)?;
            Ok(JobOutput { loop_points: lp.vertices().to_vec(), partition: fp })
        }
        (Prepared::Trace { trace, center }, LoopFamily::LevelSection) => {
            let (e1, e2) = random_plane(trace.dim(), &mut rng);
            let (t, pts) = level_for_perimeter(trace, center, &e1, &e2, length)?;
            let lp = Loop::flat(pts)?;
            let ff = fill_flat_loop(&trace.shifted(t), &lp, mesh)?;
            Ok(JobOutput { loop_points: lp.vertices().to_vec(), partition: ff.partition })
        }
        _ => Err(Error::Config("loop family not available on this host".into())),
    }
}

/// Output directory: the explicit option, then the environment variable, then the config,
/// then `out`.
pub fn resolve_out_dir(opts: &RunOptions, cfg: &Config) -> PathBuf {
    if let Some(d) = &opts.out_dir {
        return d.clone();
    }
    if let Ok(d) = std::env::var(OUT_DIR_ENV) {
        if !d.is_empty() {
            return PathBuf::from(d);
        }
    }
    cfg.out_dir.clone().unwrap_or_else(|| PathBuf::from("out"))
}

pub fn partition_stem(scenario: &str, length_index: usize, trial: usize) -> String {
    format!("{scenario}-{length_index}-{trial}")
}

/// Run every (scenario, length, trial) job and write `results.csv` plus one SVG per scenario.
///
/// Rows are written in (scenario, length, trial) order. If a job fails, the rows of the
/// jobs that succeeded are still written before the first error is returned.
pub fn run_config(cfg: &Config, opts: &RunOptions) -> Result<RunSummary> {
    let run_seed = opts.seed.unwrap_or(cfg.seed);
    let prepared: Vec<Prepared> = cfg
        .scenarios
        .iter()
        .enumerate()
        .map(|(i, s)| prepare(s).map_err(|e| scenario_error(i, s, e)))
        .collect::<Result<_>>()?;
    let out_dir = resolve_out_dir(opts, cfg);
    fs::create_dir_all(&out_dir)?;
    if opts.keep_partitions {
        fs::create_dir_all(out_dir.join("partitions"))?;
    }
    let mut jobs = Vec::new();
    for (si, s) in cfg.scenarios.iter().enumerate() {
        for (li, _) in s.loops.lengths.iter().enumerate() {
            for trial in 0..s.trials {
                jobs.push((si, li, trial));
            }
        }
    }
    let work = |&(si, li, trial): &(usize, usize, usize)| -> Result<RunRecord> {
        let s = &cfg.scenarios[si];
        let length = s.loops.lengths[li];
        let seed = job_seed(run_seed, &s.name, s.loops.seed, li, trial);
        let t0 = Instant::now();
        let out = run_job(&prepared[si], &s.loops.family, length, s.mesh, seed)
            .map_err(|e| Error::Hypothesis(format!("{} length {length} trial {trial}: {e}", s.name)))?;
        let ms = t0.elapsed().as_millis() as u64;
        if opts.keep_partitions {
            let stem = out_dir.join("partitions").join(partition_stem(&s.name, li, trial));
            fs::write(stem.with_extension("txt"), out.partition.to_text())?;
            let pts: Vec<Vec<f64>> = out.loop_points.iter().map(|v| v.iter().copied().collect()).collect();
            fs::write(stem.with_extension("loop.json"), serde_json::to_string(&pts)?)?;
        }
        Ok(RunRecord {
            scenario: s.name.clone(),
            length,
            mesh: s.mesh,
            trial,
            area: out.partition.area,
            flat_bricks: out.partition.census.flat_bricks,
            wild_bricks: out.partition.census.wild_bricks,
            seed,
            ms,
        })
    };
    let threads = opts.jobs.unwrap_or(0);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Config(format!("worker pool: {e}")))?;
    let results: Vec<Result<RunRecord>> = pool.install(|| jobs.par_iter().map(work).collect());

    let mut records = Vec::new();
    let mut first_err = None;
    for r in results {
        match r {
            Ok(rec) => records.push(rec),
            Err(e) => {
                if first_err.is_none() {
                    first_err = Some(e);
                }
            }
        }
    }
    let csv = out_dir.join("results.csv");
    write_csv(&csv, &records)?;
    if let Some(e) = first_err {
        return Err(e);
    }
    let fits = fit_records(&records);
    let mut plots = Vec::new();
    for f in &fits {
        let pts: Vec<(f64, f64)> = records.iter().filter(|r| r.scenario == f.scenario).map(|r| (r.length, r.area as f64)).collect();
        let path = out_dir.join(format!("{}.svg", f.scenario));
        fs::write(&path, loglog_svg(&f.scenario, &pts, f.fit.as_ref()))?;
        plots.push(path);
    }
    Ok(RunSummary { records, fits, csv, plots })
}

pub fn write_csv(path: &Path, records: &[RunRecord]) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_path(path).map_err(|e| Error::Io(e.to_string()))?;
    w.write_record(CSV_HEADER.split(',')).map_err(|e| Error::Io(e.to_string()))?;
    for r in records {
        w.serialize(r).map_err(|e| Error::Io(e.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv(path: &Path) -> Result<Vec<RunRecord>> {
    let mut rd = csv::Reader::from_path(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let headers = rd.headers().map_err(|e| Error::Io(e.to_string()))?.clone();
    if headers.iter().collect::<Vec<_>>().join(",") != CSV_HEADER {
        return Err(Error::Config(format!("unexpected CSV header, want {CSV_HEADER}")));
    }
    rd.deserialize()
        .enumerate()
        .map(|(i, r)| r.map_err(|e| Error::Config(format!("CSV row {}: {e}", i + 2))))
        .collect()
}

/// Per-scenario exponent fits, in first-appearance order.
pub fn fit_records(records: &[RunRecord]) -> Vec<ScenarioFit> {
    let mut names: Vec<&str> = Vec::new();
    for r in records {
        if !names.contains(&r.scenario.as_str()) {
            names.push(&r.scenario);
        }
    }
    names
        .into_iter()
        .map(|name| {
            let obs: Vec<(f64, usize)> = records.iter().filter(|r| r.scenario == name).map(|r| (r.length, r.area)).collect();
            match dehn_exponent(&obs) {
                Ok(f) => ScenarioFit { scenario: name.to_string(), fit: Some(f), note: None },
                Err(e) => ScenarioFit { scenario: name.to_string(), fit: None, note: Some(e.to_string()) },
            }
        })
        .collect()
}

/// Reload a kept partition with its loop and re-run validation; returns `(mesh, area)`.
pub fn revalidate_kept(out_dir: &Path, scenario: &str, length_index: usize, trial: usize) -> Result<(f64, usize)> {
    let stem = out_dir.join("partitions").join(partition_stem(scenario, length_index, trial));
    let fp = FillingPartition::from_text(&fs::read_to_string(stem.with_extension("txt"))?)?;
    let pts: Vec<Vec<f64>> = serde_json::from_str(&fs::read_to_string(stem.with_extension("loop.json"))?)?;
    let lp = Loop::flat(pts.iter().map(|v| Vector::from_column_slice(v)).collect())?;
    validate_partition(&lp, &fp)
}

/// Self-contained log-log scatter with power-of-two ticks and the fitted line.
pub fn loglog_svg(title: &str, points: &[(f64, f64)], fit: Option<&LogLogFit>) -> String {
    let (w, h) = (640.0, 480.0);
    let (ml, mr, mt, mb) = (70.0, 20.0, 40.0, 50.0);
    let pos: Vec<(f64, f64)> = points.iter().copied().filter(|(x, y)| *x > 0.0 && *y > 0.0).collect();
    let range = |f: fn(&(f64, f64)) -> f64| -> (i32, i32) {
        if pos.is_empty() {
            return (0, 1);
        }
        let lo = pos.iter().map(f).fold(f64::INFINITY, f64::min).log2().floor() as i32;
        let hi = pos.iter().map(f).fold(f64::NEG_INFINITY, f64::max).log2().ceil() as i32;
        (lo, hi.max(lo + 1))
    };
    let (x0, x1) = range(|p| p.0);
    let (y0, y1) = range(|p| p.1);
    let sx = |x: f64| ml + (x.log2() - x0 as f64) / (x1 - x0) as f64 * (w - ml - mr);
    let sy = |y: f64| h - mb - (y.log2() - y0 as f64) / (y1 - y0) as f64 * (h - mt - mb);
    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="12">"#);
    let _ = writeln!(s, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="22" text-anchor="middle" font-size="15">{}</text>"#, w / 2.0, escape(title));
    let _ = writeln!(
        s,
        r#"<rect x="{ml}" y="{mt}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        w - ml - mr,
        h - mt - mb
    );
    let xstep = ((x1 - x0) as f64 / 10.0).ceil().max(1.0) as i32;
    let ystep = ((y1 - y0) as f64 / 10.0).ceil().max(1.0) as i32;
    for e in (x0..=x1).step_by(xstep as usize) {
        let x = sx(2f64.powi(e));
        let _ = writeln!(s, r##"<line x1="{x:.1}" y1="{mt}" x2="{x:.1}" y2="{}" stroke="#ddd"/>"##, h - mb);
        let _ = writeln!(s, r#"<text x="{x:.1}" y="{}" text-anchor="middle">2<tspan dy="-5" font-size="9">{e}</tspan></text>"#, h - mb + 18.0);
    }
    for e in (y0..=y1).step_by(ystep as usize) {
        let y = sy(2f64.powi(e));
        let _ = writeln!(s, r##"<line x1="{ml}" y1="{y:.1}" x2="{}" y2="{y:.1}" stroke="#ddd"/>"##, w - mr);
        let _ = writeln!(s, r#"<text x="{}" y="{:.1}" text-anchor="end">2<tspan dy="-5" font-size="9">{e}</tspan></text>"#, ml - 6.0, y + 4.0);
    }
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">loop length</text>"#, w / 2.0, h - 12.0);
    let _ = writeln!(s, r#"<text x="16" y="{}" text-anchor="middle" transform="rotate(-90 16 {})">area (bricks)</text>"#, h / 2.0, h / 2.0);
    for (x, y) in &pos {
        let _ = writeln!(s, r##"<circle cx="{:.1}" cy="{:.1}" r="3.5" fill="#1f77b4"/>"##, sx(*x), sy(*y));
    }
    match fit {
        Some(f) => {
            let (lo, hi) = (2f64.powi(x0), 2f64.powi(x1));
            let yl = (f.intercept + f.slope * lo.ln()).exp();
            let yh = (f.intercept + f.slope * hi.ln()).exp();
            let _ = writeln!(
                s,
                r##"<line x1="{:.1}" y1="{:.1}" x2="{:.1}" y2="{:.1}" stroke="#d62728" stroke-dasharray="6 4"/>"##,
                sx(lo),
                sy(yl),
                sx(hi),
                sy(yh)
            );
            let _ = writeln!(
                s,
                r#"<text x="{}" y="{}">slope {:.3} ± {:.3}</text>"#,
                ml + 10.0,
                mt + 18.0,
                f.slope,
                2.0 * f.stderr
            );
        }
        None => {
            let _ = writeln!(s, r#"<text x="{}" y="{}">no fit</text>"#, ml + 10.0, mt + 18.0);
        }
    }
    s.push_str("</svg>\n");
    s
}

fn escape(t: &str) -> String {
    t.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
