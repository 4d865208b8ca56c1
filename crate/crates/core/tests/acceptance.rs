//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use horofill::bootstrap::{bootstrap, exponent_step, term_balance_spread};
use horofill::coxeter::*;
use horofill::fan::{fill_tube_loop, wobble_loop};
use horofill::filling::{cone_fill, dehn_exponent};
use horofill::linalg::{dist, fmt12, fmt_vec, vector, zeros, Vector};
use horofill::oracle::{brute_force_area, frozen_instances, OracleHost};
use horofill::partition::{validate_partition, Host, Loop};
use horofill::polytope::{HPolytope, Halfspace};
use horofill::runner::{parse_config, run_config, RunOptions};
use horofill::trace::*;
use horofill::tube::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{a, a2a1, at_angle, bands, generic_regular, hand_a2, hand_in_chamber, rows, Bands};

/// Wall-clock budget of the tube-filling criterion.
const TUBE_BUDGET: Duration = Duration::from_secs(300);
const LENGTHS: [f64; 5] = [8.0, 16.0, 32.0, 64.0, 128.0];
/// Tolerance added to the level-projection bound.
const PROJECTION_TOL: f64 = 1e-6;
/// Relative tolerance on the nondistortion bound.
const PATH_TOL: f64 = 1e-9;
const SAMPLES: usize = 1000;
/// Random section planes per length for the level-set fills.
const TRIALS: usize = 3;
const PATHS: usize = 100;
const PAIRS_PER_TRACE: usize = 8;

type Outcome = Result<String, String>;

fn ensure(ok: bool, msg: String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg)
    }
}

fn in_band(x: f64, band: (f64, f64)) -> bool {
    x >= band.0 && x <= band.1
}

fn tube_filling(b: &Bands) -> Outcome {
    let t0 = Instant::now();
    let shapes = [
        ("point", ConvexPolytope::point(zeros(3))),
        ("segment", ConvexPolytope::unit_segment(3)),
        ("square", ConvexPolytope::unit_square(3)),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut notes = Vec::new();
    let mut failures = Vec::new();
    for (name, p) in &shapes {
        let axis = random_unit(3, &mut rng);
        let mut records = Vec::new();
        for &l in &LENGTHS {
            let lp = wobble_loop(p, 1.0, &axis, l, 0.25).map_err(|e| format!("{name} l={l}: {e}"))?;
            let f = fill_tube_loop(p, 1.0, &lp, 1.0).map_err(|e| format!("{name} l={l}: {e}"))?;
            let (mesh, area) = validate_partition(&lp, &f.partition).map_err(|e| format!("{name} l={l}: {e}"))?;
            if mesh > 1.0 + 1e-9 {
                failures.push(format!("{name} l={l}: mesh {mesh:.4}"));
            }
            records.push((lp.length(), area));
        }
        let fit = dehn_exponent(&records).map_err(|e| format!("{name}: {e}"))?;
        let doubling: Vec<f64> = records.windows(2).map(|w| w[1].1 as f64 / w[0].1 as f64).collect();
        notes.push(format!(
            "{name} slope {:.3} areas {:?} doubling {:?}",
            fit.slope,
            records.iter().map(|r| r.1).collect::<Vec<_>>(),
            doubling.iter().map(|d| format!("{d:.2}")).collect::<Vec<_>>()
        ));
        if !in_band(fit.slope, b.exponent_band) {
            failures.push(format!("{name} slope {:.3} outside [{}, {}]", fit.slope, b.exponent_band.0, b.exponent_band.1));
        }
        if let Some(d) = doubling.iter().find(|d| !in_band(**d, b.doubling_band)) {
            failures.push(format!("{name} doubling ratio {d:.2} outside [{}, {}]", b.doubling_band.0, b.doubling_band.1));
        }
    }
    let took = t0.elapsed();
    if took > TUBE_BUDGET {
        failures.push(format!("runtime {:.0}s over {}s", took.as_secs_f64(), TUBE_BUDGET.as_secs()));
    }
    let summary = format!("{}; {:.1}s", notes.join("; "), took.as_secs_f64());
    if failures.is_empty() {
        Ok(summary)
    } else {
        Err(format!("{}; {summary}", failures.join("; ")))
    }
}

fn level_filling(b: &Bands) -> Outcome {
    let t0 = Instant::now();
    let theta = |rs: &RootSystem| -> String {
        let d = generic_regular(rs).direction().clone();
        format!("[{}]", d.iter().map(|x| format!("{x:.17}")).collect::<Vec<_>>().join(", "))
    };
    let lengths = format!("[{}]", LENGTHS.iter().map(|l| l.to_string()).collect::<Vec<_>>().join(", "));
    let text = format!(
        r#"{{"seed": 2, "scenarios": [
          {{"name": "a2xa1", "host": {{"kind": "symmetric_trace", "root_system": {{"family": "product", "factors": [{{"family": "a", "rank": 2}}, {{"family": "a", "rank": 1}}]}}, "theta": {}}},
           "trials": {TRIALS}, "loop": {{"family": "level_section", "lengths": {lengths}}}}},
          {{"name": "a3", "host": {{"kind": "symmetric_trace", "root_system": {{"family": "a", "rank": 3}}, "theta": {}}},
           "trials": {TRIALS}, "loop": {{"family": "level_section", "lengths": {lengths}}}}}
        ]}}"#,
        theta(&a2a1()),
        theta(&a(3)),
    );
    let cfg = parse_config(&text).map_err(|e| e.to_string())?;
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let s = run_config(&cfg, &RunOptions { out_dir: Some(dir.path().to_path_buf()), ..RunOptions::default() })
        .map_err(|e| e.to_string())?;
    let mut notes = Vec::new();
    let mut failures = Vec::new();
    for f in &s.fits {
        let fit = f.fit.as_ref().ok_or_else(|| format!("{}: no fit", f.scenario))?;
        let worst = s
            .records
            .iter()
            .filter(|r| r.scenario == f.scenario)
            .map(|r| r.area as f64 / (r.length * r.length))
            .fold(0.0, f64::max);
        notes.push(format!("{} slope {:.3} max area/l^2 {worst:.2}", f.scenario, fit.slope));
        if !in_band(fit.slope, b.exponent_band) {
            failures.push(format!("{} slope {:.3}", f.scenario, fit.slope));
        }
        if worst > b.level_fill_constant {
            failures.push(format!("{} area/l^2 {worst:.2} over L' = {}", f.scenario, b.level_fill_constant));
        }
    }
    let summary = format!("{}; L' = {}; {:.1}s", notes.join("; "), b.level_fill_constant, t0.elapsed().as_secs_f64());
    if failures.is_empty() {
        Ok(summary)
    } else {
        Err(format!("{}; {summary}", failures.join("; ")))
    }
}

fn bootstrap_reproduction(b: &Bands) -> Outcome {
    let step = exponent_step(1.0).map_err(|e| e.to_string())?;
    ensure(step == 0.5, format!("exponent_step(1) = {step}"))?;
    let bs = bootstrap(1.0, 1e-6).map_err(|e| e.to_string())?;
    ensure(bs.sequence.windows(2).all(|w| w[1] < w[0]), "sequence is not strictly decreasing".into())?;
    let last = *bs.sequence.last().unwrap();
    ensure(last < 1e-6, format!("final excess {last:e}"))?;
    let ms: Vec<f64> = (0..=50).map(|k| 10f64.powf(1.0 + 5.0 * k as f64 / 50.0)).collect();
    let mut spreads = Vec::new();
    for eps in [0.25, 0.5, 1.0] {
        let s = term_balance_spread(1.0, 1.0, eps, &ms).map_err(|e| e.to_string())?;
        ensure(s <= b.term_balance_factor, format!("term balance spread {s:.3} at eps {eps}"))?;
        spreads.push(format!("{s:.2}"));
    }
    Ok(format!("step(1) = 0.5; {} steps to {last:.3e}; term spreads {:?}", bs.steps, spreads))
}

/// A random trace on `rs`: a random regular slope, a random subset of the gradient orbit
/// and random offsets.
fn random_trace(rs: &std::sync::Arc<RootSystem>, rng: &mut ChaCha8Rng) -> Option<BusemannTrace> {
    let n = rs.rank();
    let th = project_to_chamber(rs, &random_unit(n, rng)).ok()?;
    if !th.is_regular() {
        return None;
    }
    let m = rs.orbit(&(-th.direction())).len();
    let k = rng.random_range(1..=m);
    let idx = rand::seq::index::sample(rng, m, k).into_vec();
    let pieces: Vec<(usize, f64)> = idx.into_iter().map(|i| (i, rng.random::<f64>() * 2.0 - 1.0)).collect();
    BusemannTrace::from_indices(rs.clone(), th, &pieces).ok().filter(walls_are_singular)
}

/// Pieces whose regions share a facet must differ by a reflection, so every wall
/// between regions is a singular hyperplane. Random orbit subsets with random
/// offsets usually break this and are not traces of building Busemann functions.
fn walls_are_singular(tr: &BusemannTrace) -> bool {
    let n = tr.dim();
    let ps = tr.pieces();
    let roots: Vec<Vector> = tr.root_system().roots().iter().map(|r| r / r.norm()).collect();
    for i in 0..ps.len() {
        for j in i + 1..ps.len() {
            let diff = &ps[i].gradient - &ps[j].gradient;
            let mut hs = vec![
                Halfspace::new(diff.clone(), ps[j].offset - ps[i].offset),
                Halfspace::new(-&diff, ps[i].offset - ps[j].offset),
            ];
            for (k, pk) in ps.iter().enumerate() {
                if k != i && k != j {
                    hs.push(Halfspace::new(&pk.gradient - &ps[i].gradient, ps[i].offset - pk.offset));
                }
            }
            let Ok(wall) = HPolytope::new(n, hs) else { return false };
            if wall.is_empty() || wall.affine_dim() + 1 < n {
                continue;
            }
            let d = &diff / diff.norm();
            if !roots.iter().any(|r| (r.dot(&d).abs() - 1.0).abs() < 1e-9) {
                return false;
            }
        }
    }
    true
}

fn level_projection_bound(_: &Bands) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let systems = [a(2), a(3)];
    let (mut done, mut violations, mut worst) = (0usize, 0usize, 0.0f64);
    while done < SAMPLES {
        let rs = &systems[done % 2];
        let Some(tr) = random_trace(rs, &mut rng) else { continue };
        let Ok(dz) = delta_zero(rs, tr.theta()) else { continue };
        let x = random_unit(rs.rank(), &mut rng) * (5.0 * rng.random::<f64>());
        let s = tr.value(&x);
        let floor = match min_set(&tr) {
            Ok(ms) => ms.value,
            Err(_) => s - 5.0,
        };
        let t = s - rng.random::<f64>() * (s - floor);
        let p = level_project(&tr, &x, t).map_err(|e| format!("sample {done}: {e}"))?;
        let bound = (s - t) / dz.delta0.sin() + PROJECTION_TOL;
        let d = dist(&x, &p);
        worst = worst.max(d - bound + PROJECTION_TOL);
        if d > bound {
            violations += 1;
        }
        done += 1;
    }
    ensure(violations == 0, format!("{violations} of {SAMPLES} violations"))?;
    Ok(format!("{SAMPLES} samples, 0 violations, max d - (s-t)/sin delta0 = {worst:.2e}"))
}

fn nondistortion(_: &Bands) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let systems = [a(2), a(3)];
    let (mut done, mut violations, mut worst) = (0usize, 0usize, 0.0f64);
    let mut tries = 0usize;
    while done < SAMPLES {
        tries += 1;
        if tries > 50 * SAMPLES {
            return Err(format!("only {done} usable pairs"));
        }
        let rs = &systems[tries % 2];
        let Some(tr) = random_trace(rs, &mut rng).filter(|tr| tr.pieces().len() > 1) else { continue };
        let n = rs.rank();
        for _ in 0..PAIRS_PER_TRACE {
            let c = random_unit(n, &mut rng) * (2.0 * rng.random::<f64>());
            let t = tr.value(&c) + 0.1 + 3.0 * rng.random::<f64>();
            let Ok(hb) = horoball_polytope(&tr, t) else { continue };
            let (Some(x), Some(y)) = (ray_exit(&hb, &c, &random_unit(n, &mut rng)), ray_exit(&hb, &c, &random_unit(n, &mut rng))) else {
                continue;
            };
            // same-facet pairs are joined by the segment itself
            let path = match face_pair_path(&tr, t, &x, &y) {
                Ok(p) if p.corner.is_some() => p,
                Ok(_) | Err(horofill::Error::ParallelFacets) => continue,
                Err(e) => return Err(format!("pair {done}: {e}")),
            };
            let d = dist(&x, &y);
            let ratio = if d > 0.0 { path.length / (path.constant * d) } else { 0.0 };
            worst = worst.max(ratio);
            if path.length > path.constant * d * (1.0 + PATH_TOL) + PATH_TOL {
                violations += 1;
            }
            done += 1;
            if done == SAMPLES {
                break;
            }
        }
    }
    ensure(violations == 0, format!("{violations} of {SAMPLES} violations"))?;
    Ok(format!("{SAMPLES} pairs on distinct facets, 0 violations, max length / (d / sin(varsigma/2)) = {worst:.6}"))
}

fn radial_projection(b: &Bands) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let shapes = [
        ConvexPolytope::point(zeros(3)),
        ConvexPolytope::unit_segment(3),
        ConvexPolytope::unit_square(3),
        ConvexPolytope::from_vertices(vec![vector(&[0.0, 0.0, 0.0]), vector(&[2.0, 0.0, 0.0]), vector(&[0.5, 1.5, 0.0])]).unwrap(),
    ];
    let (mut done, mut violations, mut lo, mut hi) = (0usize, 0usize, f64::INFINITY, 0.0f64);
    while done < PATHS {
        let p = &shapes[done % shapes.len()];
        let r = 0.5 + 1.5 * rng.random::<f64>();
        let mut pick = || loop {
            let q = p.centroid() + random_unit(3, &mut rng) * (0.1 + 3.0 * rng.random::<f64>());
            if let Some(x) = p.fiber_point(&q, r) {
                break TubePoint::new(p, r, x).unwrap();
            }
        };
        let (x, y) = (pick(), pick());
        let Ok(tp) = tube_path_sampled(p, r, &x, &y, 0.02) else { continue };
        for a in [1.5, 2.0, 3.0] {
            let rp = radial_project_path(p, r, r / a, &tp.points).map_err(|e| e.to_string())?;
            lo = lo.min(rp.ratio);
            hi = hi.max(rp.ratio / a);
            if !(rp.ratio >= 1.0 - 1e-12 && rp.ratio <= a * b.radial_c_prime) {
                violations += 1;
            }
        }
        done += 1;
    }
    ensure(violations == 0, format!("{violations} violations"))?;
    Ok(format!("{PATHS} paths x 3 values of a, 0 violations, min ratio {lo:.4}, max ratio/a {hi:.4}, c' = {}", b.radial_c_prime))
}

fn oracle_sandwich(b: &Bands) -> Outcome {
    let mut notes = Vec::new();
    for inst in frozen_instances() {
        let oracle = brute_force_area(&inst.complex, &inst.edge_loop).map_err(|e| format!("{}: {e}", inst.name))?;
        let mesh = inst.complex.mesh();
        let (lp, fp) = match &inst.host {
            OracleHost::Flat => {
                let lp = Loop::flat(inst.loop_points()).map_err(|e| e.to_string())?;
                let fp = cone_fill(&lp, mesh).map_err(|e| format!("{}: {e}", inst.name))?;
                (lp, fp)
            }
            OracleHost::Tube { polytope, radius } => {
                let host = Host::Tube { polytope: std::sync::Arc::new(polytope.clone()), radius: *radius };
                let lp = Loop::new(inst.loop_points(), host).map_err(|e| e.to_string())?;
                let f = fill_tube_loop(polytope, *radius, &lp, mesh).map_err(|e| format!("{}: {e}", inst.name))?;
                (lp, f.partition)
            }
        };
        let (_, area) = validate_partition(&lp, &fp).map_err(|e| format!("{}: {e}", inst.name))?;
        ensure(
            area >= oracle && area as f64 <= b.oracle_factor * oracle as f64,
            format!("{}: area {area} vs oracle {oracle}", inst.name),
        )?;
        notes.push(format!("{} {area}/{oracle}", inst.name));
    }
    Ok(notes.join(", "))
}

fn coxeter_correctness(_: &Bands) -> Outcome {
    for n in 2..=4 {
        let rs = build_root_system(RootSystemSpec::a(n)).map_err(|e| e.to_string())?;
        let want: usize = (1..=n + 1).product();
        ensure(rs.order() == want, format!("|W(A{n})| = {} not {want}", rs.order()))?;
    }
    let rs = a(2);
    let key = |m: &nalgebra::DMatrix<f64>| m.iter().map(|x| fmt12(*x)).collect::<Vec<_>>().join(" ");
    let mut ours: Vec<String> = rs.elements().iter().map(key).collect();
    let mut hand: Vec<String> = hand_a2().iter().map(key).collect();
    ours.sort();
    hand.sort();
    ensure(ours == hand, "A2 group differs from the hand enumeration".into())?;
    let hm = hand_a2();
    for deg in [0.0, 17.0, 45.0, 90.0, 200.0, 330.0] {
        let v = at_angle(deg);
        let orbit = horofill::linalg::dedup_vectors(hm.iter().map(|m| m * &v).collect(), 1e-9);
        let got = weyl_orbit(&rs, &v).map_err(|e| e.to_string())?;
        ensure(rows(&got) == rows(&orbit), format!("orbit at {deg} degrees"))?;
        let rep: &Vector = orbit.iter().find(|u| hand_in_chamber(u)).unwrap();
        let img = project_to_chamber(&rs, &v).map_err(|e| e.to_string())?;
        ensure(fmt_vec(img.direction()) == fmt_vec(rep), format!("chamber image at {deg} degrees"))?;
    }
    let a3 = a(3);
    let th = generic_regular(&a3);
    let gs = find_good_slope(&a3, &th, 0.05).map_err(|e| e.to_string())?;
    ensure(gs.ort_distance > 0.05, format!("ort distance {}", gs.ort_distance))?;
    Ok(format!("orders 6, 24, 120; A2 byte match; A3 good slope margin {:.4}", gs.margin))
}

fn determinism(_: &Bands) -> Outcome {
    let text = r#"{"seed": 9, "scenarios": [
      {"name": "sphere", "host": {"kind": "tube", "polytope": {"shape": "point", "dim": 3}}, "loop": {"family": "wobble", "lengths": [4, 8, 16]}, "trials": 2},
      {"name": "plane", "host": {"kind": "flat", "dim": 3}, "loop": {"family": "polygon", "lengths": [4, 8, 16], "jitter": 0.2}},
      {"name": "a3", "host": {"kind": "symmetric_trace", "root_system": {"family": "a", "rank": 3}, "theta": [0.3, 0.5, 0.8]}, "loop": {"family": "level_section", "lengths": [4, 8]}}
    ]}"#;
    let cfg = parse_config(text).map_err(|e| e.to_string())?;
    let mut csvs = Vec::new();
    for jobs in [1, 4] {
        let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
        let opts = RunOptions { jobs: Some(jobs), out_dir: Some(dir.path().to_path_buf()), ..RunOptions::default() };
        let s = run_config(&cfg, &opts).map_err(|e| e.to_string())?;
        let text = std::fs::read_to_string(&s.csv).map_err(|e| e.to_string())?;
        let rows: Vec<String> = text.lines().map(|l| l.rsplit_once(',').map_or(l, |p| p.0).to_string()).collect();
        csvs.push(rows);
    }
    ensure(csvs[0] == csvs[1], "CSV differs between reruns".into())?;
    Ok(format!("{} rows identical across reruns (timing column excluded)", csvs[0].len() - 1))
}

fn main() -> ExitCode {
    let b = bands();
    let criteria: [(&str, fn(&Bands) -> Outcome); 9] = [
        ("quadratic tube filling", tube_filling),
        ("one-apartment level filling", level_filling),
        ("bootstrap", bootstrap_reproduction),
        ("level projection bound", level_projection_bound),
        ("nondistortion", nondistortion),
        ("radial projection", radial_projection),
        ("oracle sandwich", oracle_sandwich),
        ("coxeter correctness", coxeter_correctness),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(|| f(&b))).unwrap_or_else(|p| {
            let msg = p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panicked: {}", msg.unwrap_or_default()))
        });
        match outcome {
            Ok(detail) => println!("criterion {} PASS {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {} FAIL {name}: {detail}", i + 1);
            }
        }
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
