//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use systole_core::cli::main_with;
use systole_core::filling::exhaustive::exhaustive_minimal_filling;
use systole_core::filling::{max_minimal_filling, min_filling, FillingResult, SearchOptions};
use systole_core::homology::{build_combinatorial_map, homology_span_rank};
use systole_core::hyperbolic::index::length_jacobian;
use systole_core::hyperbolic::*;
use systole_core::symmetry::{subset_orbit_representatives, SymmetryGroup};
use systole_core::{build_surface, Bits, SurfaceModel, SurfaceParams};

type Outcome = (bool, String);

fn model(m: usize) -> SurfaceModel {
    build_surface(SurfaceParams::new(m).unwrap()).unwrap()
}

fn combinatorics() -> Outcome {
    let want = [(5, 20, 5), (6, 48, 17), (7, 112, 49), (8, 256, 129)];
    let got: Vec<_> = want.iter().map(|&(m, _, _)| {
        let s = model(m);
        (m, s.n(), s.genus)
    }).collect();
    (got == want, format!("(m, systoles, genus) = {:?}", got))
}

fn intersections() -> Outcome {
    let mut ok = true;
    let mut detail = Vec::new();
    for m in 5..=8 {
        let s = model(m);
        let n = s.n();
        let regular = (0..n).all(|i| (0..n).filter(|&j| s.intersects(i, j)).count() == 4);
        let pairs = s.intersections_within(&Bits::full(n));
        let mut agree = true;
        if m <= 6 {
            for i in 0..n {
                for j in 0..n {
                    agree &= s.intersects(i, j) == s.shares_square(i, j);
                }
            }
        }
        ok &= regular && pairs == 2 * n && agree;
        detail.push(format!("m={}: 4-regular {}, pairs {} (2n = {}), predicates agree {}", m, regular, pairs, 2 * n, agree));
    }
    (ok, detail.join("; "))
}

fn homology() -> Outcome {
    let got: Vec<usize> = (5..=8).map(|m| {
        let s = model(m);
        homology_span_rank(&s, &Bits::full(s.n())).unwrap()
    }).collect();
    (got == [10, 31, 84, 210], format!("ranks m=5..8: {:?}", got))
}

fn filling_small() -> Outcome {
    let s = model(5);
    let group = SymmetryGroup::new(&s).unwrap();
    let oracle = exhaustive_minimal_filling(&s, &group).unwrap();
    let opts = SearchOptions::default();
    let min = min_filling(&s, &opts).unwrap();
    let max = max_minimal_filling(&s, &opts).unwrap();
    let ok = oracle.min_size == 8
        && oracle.min_classes.len() == 1
        && oracle.max_size == 10
        && min.set.len() == 8
        && min.proved_optimal
        && min.classes == oracle.min_classes
        && max.set.len() == 10
        && max.proved_optimal
        && max.classes == oracle.max_classes;
    (
        ok,
        format!(
            "exhaustive: min {} ({} class), max {} ({} classes); search: min {} ({} class), max {} ({} classes)",
            oracle.min_size,
            oracle.min_classes.len(),
            oracle.max_size,
            oracle.max_classes.len(),
            min.set.len(),
            min.classes.len(),
            max.set.len(),
            max.classes.len()
        ),
    )
}

fn describe(r: &FillingResult) -> String {
    format!("{} (proved {}, {} classes)", r.set.len(), r.proved_optimal, r.classes.len())
}

fn filling_medium() -> Outcome {
    let s = model(6);
    let opts = SearchOptions::default();
    let t = Instant::now();
    let min = min_filling(&s, &opts).unwrap();
    let t_min = t.elapsed();
    let t = Instant::now();
    let max = max_minimal_filling(&s, &opts).unwrap();
    let t_max = t.elapsed();
    let formula = |m: usize| (m - 3) << (m - 3);
    let min_ok = min.set.len() == 24 && min.proved_optimal && min.classes.len() == 6;
    let max_ok = max.set.len() == 31 && max.proved_optimal;
    let formula_ok = formula(5) == 8 && formula(6) == min.set.len();
    (
        min_ok && max_ok && formula_ok,
        format!(
            "min {} in {:.0?} [{}]; max {} in {:.0?} [{}, expected 31]; formula (m-3)2^(m-3) {}",
            describe(&min),
            t_min,
            if min_ok { "ok" } else { "mismatch" },
            describe(&max),
            t_max,
            if max_ok { "ok" } else { "mismatch" },
            if formula_ok { "matches" } else { "differs" }
        ),
    )
}

fn symmetry_breaking() -> Outcome {
    let s = model(7);
    let group = SymmetryGroup::new(&s).unwrap();
    let count = subset_orbit_representatives(&s, &group, 7).len();
    (count == 923, format!("m=7 orbit representatives up to size 7: {} (optional m=7 minimum certification not run)", count))
}

struct Point {
    model: SurfaceModel,
    point: CriticalPoint,
}

fn critical(m: usize) -> Point {
    let s = model(m);
    let map = build_combinatorial_map(&s).unwrap();
    let min = min_filling(&s, &SearchOptions::default()).unwrap();
    let set = one_region_set(&s, &min.classes).unwrap();
    let point = critical_point(&s, &map, &set, &IndexOptions::default()).unwrap();
    Point { model: s, point }
}

fn closure(p: &Point) -> Outcome {
    let s = side_length(5).side();
    let want = 4.0 * s;
    let worst = p.point.lengths.iter().fold(0.0f64, |a, l| a.max((l - want).abs()));
    let ok = p.point.defect < 1e-9 && p.point.lengths.len() == 20 && worst < 1e-8;
    (ok, format!("holonomy defect {:.2e}, 20 lengths within {:.2e} of 4s = {:.12}", p.point.defect, worst, want))
}

fn chart_dimensions(p: &Point) -> Outcome {
    let poly = &p.point.chart.polygon;
    let got = (poly.edges.len(), poly.class_count(), poly.point_count(), poly.parameter_count());
    let ok = got == (36, 18, 9, 24) && 6 * p.model.genus - 6 == 24;
    (ok, format!("edges {}, pairs {}, M {}, 3M-3 {}, 6g-6 {}", got.0, got.1, got.2, got.3, 6 * p.model.genus - 6))
}

fn index_criterion(p5: &Point) -> Outcome {
    let r = &p5.point.report;
    let half = length_jacobian(&p5.point.chart, p5.point.jacobian.step / 2.0).unwrap();
    let halved = index(&half, DEFAULT_RANK_TOL).map(|r| r.index).ok();
    let sweep: Vec<Option<usize>> =
        [1e-8, 1e-7, 1e-6, 1e-5, 1e-4].iter().map(|&t| index(&p5.point.jacobian, t).map(|r| r.index).ok()).collect();
    let p6 = critical(6);
    let i6 = p6.point.report.index;
    let ok5 = r.index == 12 && r.gap > 1e3 && halved == Some(12) && sweep.iter().all(|&i| i == Some(12)) && p5.point.eutactic;
    let ok6 = i6 == 39 && p6.point.eutactic;
    let formula = predicted_index(5) == r.index && predicted_index(6) == i6;
    (
        ok5 && ok6 && formula,
        format!(
            "m=5 index {} gap {:.2e}, halved step {:?}, tolerance sweep {:?}, eutactic {}; m=6 index {} gap {:.2e} eutactic {}; formula {}",
            r.index,
            r.gap,
            halved,
            sweep,
            p5.point.eutactic,
            i6,
            p6.point.report.gap,
            p6.point.eutactic,
            if formula { "matches" } else { "differs" }
        ),
    )
}

fn pipeline(threads: usize, cache: &std::path::Path) -> Vec<(String, Vec<u8>)> {
    let runs: &[&[&str]] = &[
        &["surface"],
        &["surface", "--output", "dot"],
        &["surface", "--output", "csv"],
        &["filling", "min"],
        &["filling", "max"],
        &["filling", "max", "--output", "csv"],
        &["rank", "--output", "json"],
        &["index"],
        &["index", "--output", "csv"],
        &["orbits", "--max-size", "4", "--output", "json"],
        &["table", "--output", "json"],
        &["table"],
    ];
    let threads = threads.to_string();
    runs.iter()
        .map(|args| {
            let mut argv = vec!["systole", "--m", "5", "--threads", &threads, "--cache-dir", cache.to_str().unwrap()];
            argv.extend_from_slice(args);
            let (mut out, mut err) = (Vec::new(), Vec::new());
            let code = main_with(&argv, &mut out, &mut err);
            assert_eq!(code, 0, "{:?}: {}", args, String::from_utf8_lossy(&err));
            (args.join(" "), out)
        })
        .collect()
}

fn determinism() -> Outcome {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let one = pipeline(1, a.path());
    let three = pipeline(3, b.path());
    let differing: Vec<_> = one.iter().zip(&three).filter(|(x, y)| x.1 != y.1).map(|(x, _)| x.0.clone()).collect();
    let cached_a: Vec<_> = walk(a.path());
    let cached_b: Vec<_> = walk(b.path());
    let ok = differing.is_empty() && cached_a == cached_b;
    (
        ok,
        format!(
            "{} artifacts compared across 1 and 3 workers, differing: {:?}; cache files identical: {}",
            one.len(),
            differing,
            cached_a == cached_b
        ),
    )
}

fn walk(root: &std::path::Path) -> Vec<(String, Vec<u8>)> {
    let mut files = Vec::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for e in std::fs::read_dir(&dir).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                files.push((p.strip_prefix(root).unwrap().display().to_string(), std::fs::read(&p).unwrap()));
            }
        }
    }
    files.sort();
    files
}

fn main() {
    let mut failures = 0;
    let mut report = |id: usize, name: &str, f: &mut dyn FnMut() -> Outcome| {
        let t = Instant::now();
        let (ok, detail) = match catch_unwind(AssertUnwindSafe(f)) {
            Ok(r) => r,
            Err(e) => {
                let msg = e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()));
                (false, format!("panicked: {}", msg.unwrap_or_default()))
            }
        };
        failures += !ok as usize;
        println!("criterion {:>2} {:<24} {} ({:.1?}): {}", id, name, if ok { "PASS" } else { "FAIL" }, t.elapsed(), detail);
    };
    report(1, "combinatorics", &mut combinatorics);
    report(2, "intersections", &mut intersections);
    report(3, "homology rank", &mut homology);
    report(4, "minimal filling m=5", &mut filling_small);
    report(5, "minimal filling m=6", &mut filling_medium);
    report(6, "symmetry breaking", &mut symmetry_breaking);
    let p5 = critical(5);
    report(7, "hyperbolic closure", &mut || closure(&p5));
    report(8, "chart dimensions", &mut || chart_dimensions(&p5));
    report(9, "index", &mut || index_criterion(&p5));
    report(10, "determinism", &mut determinism);
    println!("acceptance: {} of 10 criteria passed", 10 - failures);
    if failures > 0 {
        std::process::exit(1);
    }
}
