use std::sync::OnceLock;

use nalgebra::DMatrix;
use proptest::prelude::*;
use systole_core::filling::minimum::min_filling;
use systole_core::filling::SearchOptions;
use systole_core::homology::{build_combinatorial_map, CombinatorialMap};
use systole_core::hyperbolic::chart::Chart;
use systole_core::hyperbolic::geometry::dd;
use systole_core::hyperbolic::index::LengthJacobian;
use systole_core::hyperbolic::*;
use systole_core::{build_surface, Bits, Error, SurfaceModel, SurfaceParams};

struct Setup {
    model: SurfaceModel,
    map: CombinatorialMap,
    set: Bits,
    point: CriticalPoint,
}

fn setup(m: usize) -> Setup {
    let model = build_surface(SurfaceParams::new(m).unwrap()).unwrap();
    let map = build_combinatorial_map(&model).unwrap();
    let min = min_filling(&model, &SearchOptions::default()).unwrap();
    let set = one_region_set(&model, &min.classes).unwrap();
    let point = critical_point(&model, &map, &set, &IndexOptions::default()).unwrap();
    Setup { model, map, set, point }
}

fn m5() -> &'static Setup {
    static CELL: OnceLock<Setup> = OnceLock::new();
    CELL.get_or_init(|| setup(5))
}

fn chart() -> &'static Chart {
    &m5().point.chart
}

#[test]
fn polygon_dimensions_m5() {
    let s = m5();
    let p = &s.point.chart.polygon;
    assert_eq!(s.set.len(), 8);
    assert_eq!(p.edges.len(), 36);
    assert_eq!(p.class_count(), 18);
    assert_eq!(p.point_count(), 9);
    assert_eq!(p.parameter_count(), 24);
    assert_eq!(p.parameter_count(), 6 * s.model.genus - 6);
    for e in &p.edges {
        let q = &p.edges[e.partner];
        assert_eq!(q.partner, e.index);
        assert_eq!(q.length_class, e.length_class);
        assert_eq!(q.base_multiple, e.base_multiple);
        assert_eq!(q.curve_id, e.curve_id);
        assert!(s.set.contains(e.curve_id));
    }
}

#[test]
fn arcs_of_each_curve_sum_to_four_sides() {
    let s = m5();
    let p = &s.point.chart.polygon;
    for c in s.set.iter() {
        let total: usize = p.class_representatives().iter().filter(|&&e| p.edges[e].curve_id == c).map(|&e| p.edges[e].base_multiple).sum();
        assert_eq!(total, 4, "curve {}", c);
    }
}

#[test]
fn every_point_has_four_corners_with_balanced_signs() {
    let p = &chart().polygon;
    let mut count = vec![0; p.point_count()];
    let mut signs = vec![0i32; p.point_count()];
    for v in &p.vertices {
        count[v.intersection_id] += 1;
        signs[v.intersection_id] += v.sign as i32;
    }
    assert!(count.iter().all(|&c| c == 4));
    assert!(signs.iter().all(|&s| s == 0));
}

#[test]
fn polygon_rejects_several_regions() {
    let s = m5();
    let all = Bits::full(s.model.n());
    assert!(matches!(cut_to_polygon(&s.model, &s.map, &all), Err(Error::Invariant(_))));
}

#[test]
fn polygon_json_shape() {
    let s = m5();
    let j = s.point.chart.polygon.to_json(&s.model);
    assert_eq!(j.systoles.len(), 8);
    let text = serde_json::to_string(&j).unwrap();
    assert!(text.contains("\"base_multiple\"") && text.contains("\"intersection_id\""));
}

#[test]
fn closure_at_the_critical_point() {
    let c = chart();
    let origin = ChartPoint::critical(&c.polygon);
    assert!(c.defect(&origin) < 1e-15);
    // moving one free length alone breaks closure
    let mut p = origin.clone();
    p.y[c.free[0]] = dd(1e-3);
    assert!(c.defect(&p) > 1e-6);
}

#[test]
fn dependent_lengths_vanish_at_the_origin() {
    let c = chart();
    let (p, iterations) = c.solve_dependent_lengths(&vec![dd(0.0); c.dimension()]).unwrap();
    assert!(iterations <= 1);
    for &q in &c.dependent {
        assert!(p.y[q].abs().hi() < 1e-15);
    }
}

#[test]
fn wrong_coordinate_count_is_rejected() {
    assert!(chart().solve_dependent_lengths(&[dd(0.0)]).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]
    #[test]
    fn newton_closes_small_perturbations(coords in prop::collection::vec(-1e-3f64..1e-3, 24)) {
        let c = chart();
        let coords: Vec<_> = coords.into_iter().map(dd).collect();
        let (p, iterations) = c.solve_dependent_lengths(&coords).unwrap();
        prop_assert!(iterations <= 10);
        prop_assert!(c.defect(&p) < 1e-12);
    }
}

#[test]
fn every_systole_has_length_four_sides() {
    let s = m5();
    let want = 4.0 * side_length(5).side();
    assert!((want - 4.2451002476).abs() < 1e-9);
    assert_eq!(s.point.lengths.len(), 20);
    assert!(s.point.max_length_error() < 1e-12);
    assert!(s.point.chart.words.iter().all(|w| !w.is_empty()));
}

#[test]
fn trace_is_independent_of_the_starting_edge() {
    let c = chart();
    let gens = c.generators(&ChartPoint::critical(&c.polygon));
    for w in &c.words {
        let tr = c.holonomy(w, &gens).trace().abs().hi();
        for k in 1..w.len() {
            let mut r = w.clone();
            r.rotate_left(k);
            assert!((c.holonomy(&r, &gens).trace().abs().hi() - tr).abs() < 1e-12);
        }
    }
}

#[test]
fn arc_oracle_agrees_with_traces() {
    let c = chart();
    let mut p = ChartPoint::critical(&c.polygon);
    for (k, t) in p.theta.iter_mut().enumerate() {
        *t = dd(2.5e-4 * (k as f64 - 4.0));
    }
    let coords: Vec<_> = c.free.iter().map(|&q| p.y[q]).chain(p.theta.iter().copied()).collect();
    let (p, _) = c.solve_dependent_lengths(&coords).unwrap();
    let traces = c.lengths(&p).unwrap();
    for (sys, l) in traces.iter().enumerate() {
        let arc = c.arc_length(&p, sys).unwrap();
        assert!((arc - l.hi()).abs() < 1e-7, "systole {}: arc {} trace {}", sys, arc, l.hi());
    }
}

#[test]
fn jacobian_shape_and_step_halving() {
    let s = m5();
    let j = &s.point.jacobian;
    assert_eq!((j.rows.nrows(), j.rows.ncols()), (20, 24));
    assert!(j.rows.iter().all(|x| x.is_finite()));
    let half = index::length_jacobian(&s.point.chart, j.step / 2.0).unwrap();
    let scale = j.rows.iter().fold(0.0f64, |a, x| a.max(x.abs()));
    let diff = (&half.rows - &j.rows).iter().fold(0.0f64, |a, x| a.max(x.abs()));
    assert!(diff < 1e-6 * scale, "step halving moved entries by {}", diff);
    assert_eq!(j.to_csv().lines().count(), 20);
}

#[test]
fn index_m5_is_stable() {
    let s = m5();
    assert_eq!(s.point.report.index, 12);
    assert!(s.point.report.gap > 1e3);
    assert_eq!(predicted_index(5), 12);
    let half = index::length_jacobian(&s.point.chart, DEFAULT_FD_STEP / 2.0).unwrap();
    assert_eq!(index(&half, DEFAULT_RANK_TOL).unwrap().index, 12);
    for tol in [1e-8, 1e-7, 1e-6, 1e-5, 1e-4] {
        assert_eq!(index(&s.point.jacobian, tol).unwrap().index, 12, "tolerance {}", tol);
    }
}

/// Stiemke's dual: the rows are eutactic iff some strictly positive combination vanishes.
fn positive_relation_exists(rows: &DMatrix<f64>) -> bool {
    use minilp::{ComparisonOp, OptimizationDirection, Problem};
    let mut lp = Problem::new(OptimizationDirection::Minimize);
    let vars: Vec<_> = (0..rows.nrows()).map(|_| lp.add_var(1.0, (1.0, 1e6))).collect();
    for j in 0..rows.ncols() {
        let terms: Vec<_> = vars.iter().enumerate().map(|(r, &v)| (v, rows[(r, j)])).collect();
        lp.add_constraint(terms.as_slice(), ComparisonOp::Eq, 0.0);
    }
    lp.solve().is_ok()
}

#[test]
fn eutacticity_m5() {
    let rows = &m5().point.jacobian.rows;
    assert!(m5().point.eutactic);
    assert!(positive_relation_exists(rows));
    let single = DMatrix::from_row_slice(1, rows.ncols(), rows.row(0).transpose().as_slice());
    assert!(!check_eutactic(&single).unwrap());
    // negating one row: the primal test must agree with the dual one
    for r in 0..rows.nrows() {
        let mut flipped = rows.clone();
        flipped.row_mut(r).neg_mut();
        assert_eq!(check_eutactic(&flipped).unwrap(), positive_relation_exists(&flipped), "row {}", r);
    }
    // orient every row towards one direction: that direction increases all lengths
    let v = rows.clone().svd(false, true).v_t.unwrap().row(0).transpose();
    let mut oriented = rows.clone();
    for r in 0..rows.nrows() {
        if oriented.row(r).dot(&v.transpose()) < 0.0 {
            oriented.row_mut(r).neg_mut();
        }
    }
    assert!(!check_eutactic(&oriented).unwrap());
    assert!(!positive_relation_exists(&oriented));
}

#[test]
fn index_formula_values() {
    assert_eq!([5, 6, 7, 8].map(predicted_index), [12, 39, 102, 245]);
}

#[test]
fn degenerate_spectrum_is_reported() {
    let j = LengthJacobian { rows: DMatrix::from_row_slice(3, 3, &[1.0, 0.0, 0.0, 0.0, 1e-7, 0.0, 0.0, 0.0, 1e-9]), step: 1e-5 };
    match index(&j, 1e-8) {
        Err(Error::IndeterminateRank(msg)) => assert!(msg.contains("spectrum")),
        other => panic!("expected an indeterminate rank, got {:?}", other),
    }
}

#[test]
fn index_m6_is_39() {
    let s = setup(6);
    let p = &s.point.chart.polygon;
    assert_eq!((p.edges.len(), p.point_count(), p.parameter_count()), (132, 33, 96));
    assert!(s.point.defect < 1e-9);
    assert!(s.point.max_length_error() < 1e-8);
    assert_eq!(s.point.report.index, 39);
    assert_eq!(predicted_index(6), 39);
    assert!(s.point.report.gap > 1e3);
    assert!(s.point.eutactic);
}
