use std::sync::OnceLock;

use proptest::prelude::*;
use systole_core::filling::exhaustive::{exhaustive_minimal_filling, ExhaustiveReport};
use systole_core::filling::maximum::{greedy_max, OrderlySearch};
use systole_core::filling::simplified::DualHomology;
use systole_core::filling::*;
use systole_core::homology::{build_combinatorial_map, CombinatorialMap};
use systole_core::symmetry::SymmetryGroup;
use systole_core::{build_surface, Bits, SurfaceModel, SurfaceParams};

struct M5 {
    model: SurfaceModel,
    map: CombinatorialMap,
    group: SymmetryGroup,
    oracle: FillingOracle,
    report: ExhaustiveReport,
}

fn m5() -> &'static M5 {
    static CELL: OnceLock<M5> = OnceLock::new();
    CELL.get_or_init(|| {
        let model = build_surface(SurfaceParams::new(5).unwrap()).unwrap();
        let map = build_combinatorial_map(&model).unwrap();
        let group = SymmetryGroup::new(&model).unwrap();
        let oracle = FillingOracle::new(&model);
        let report = exhaustive_minimal_filling(&model, &group).unwrap();
        M5 { model, map, group, oracle, report }
    })
}

fn random_set(n: usize, mask: u64) -> Bits {
    (0..n).filter(|&c| mask >> c & 1 == 1).collect()
}

#[test]
fn exhaustive_oracle_m5() {
    let r = &m5().report;
    assert_eq!((r.min_size, r.max_size), (8, 10));
    assert_eq!(r.min_classes.len(), 1);
    assert_eq!(r.max_classes.len(), 63);
    assert_eq!(&r.minimal_by_size[8..=10], &[80, 2160, 17520]);
    assert!(r.minimal_by_size[..8].iter().all(|&k| k == 0));
    assert!(r.minimal_by_size[11..].iter().all(|&k| k == 0));
}

#[test]
fn ilp_minimum_matches_exhaustive_m5() {
    let s = m5();
    let res = min_filling(&s.model, &SearchOptions::default()).unwrap();
    assert_eq!(res.set.len(), 8);
    assert!(res.proved_optimal);
    assert_eq!(res.bound, Some(8));
    assert_eq!(res.classes, s.report.min_classes);
    assert!(is_minimal_filling(&s.model, &s.map, &res.set));
}

#[test]
fn ilp_minimum_without_symmetry_breaking_m5() {
    let s = m5();
    let opts = SearchOptions { symmetry_breaking: false, ..SearchOptions::default() };
    let res = min_filling(&s.model, &opts).unwrap();
    assert_eq!(res.classes, s.report.min_classes);
}

#[test]
fn orderly_maximum_matches_exhaustive_m5() {
    let s = m5();
    let res = max_minimal_filling(&s.model, &SearchOptions::default()).unwrap();
    assert_eq!(res.set.len(), 10);
    assert!(res.proved_optimal);
    assert_eq!(res.bound, Some(10));
    assert_eq!(res.classes, s.report.max_classes);
    for c in &res.classes {
        assert!(is_minimal_filling(&s.model, &s.map, c));
    }
}

#[test]
fn orderly_search_is_thread_independent() {
    let s = m5();
    let search = OrderlySearch::new(&s.model, &s.group).unwrap();
    let one = search.run(12, 1, None);
    let three = search.run(12, 3, None);
    assert!(one.completed && three.completed);
    assert_eq!(one.best, 10);
    assert_eq!(one.optima, three.optima);
    assert_eq!(one.optima.len(), 63);
}

#[test]
fn orderly_search_respects_a_tight_bound() {
    let s = m5();
    let search = OrderlySearch::new(&s.model, &s.group).unwrap();
    // no maximal complement is smaller than 10, so a bound of 9 finds nothing
    let st = search.run(9, 1, None);
    assert!(st.completed);
    assert!(st.optima.is_empty());
}

#[test]
fn greedy_is_minimal_and_deterministic() {
    let s = m5();
    let a = greedy_max(&s.model, 50, None);
    assert!(s.oracle.is_minimal_filling(&a));
    assert_eq!(a, greedy_max(&s.model, 50, None));
}

#[test]
fn minimum_formula_m5() {
    let m = 5;
    assert_eq!((m - 3) << (m - 3), m5().report.min_size);
}

#[test]
fn two_g_bound_m5() {
    let s = m5();
    let two_g = 2 * s.model.genus;
    let all: Vec<&Bits> = s.report.min_classes.iter().chain(&s.report.max_classes).collect();
    let mut tight = 0;
    for set in all {
        if s.oracle.region_count(set) == 1 {
            assert!(bound_check_2g(&s.model, &s.map, set).unwrap());
            // one disk: V - E + F = 2 - 2g with F = 1 and 2E edges
            assert_eq!(s.oracle.intersections(set), two_g - 1);
            tight += (set.len() == two_g) as usize;
        } else {
            assert!(bound_check_2g(&s.model, &s.map, set).is_err());
            assert!(s.oracle.intersections(set) > two_g - 1);
        }
    }
    assert_eq!(tight, 17);
}

#[test]
fn fast_oracle_agrees_with_region_complex() {
    let s = m5();
    for set in s.report.max_classes.iter().chain(&s.report.min_classes) {
        let cx = complementary_regions(&s.model, &s.map, set);
        assert_eq!(cx.regions.len(), s.oracle.region_count(set));
        assert!(cx.is_filling());
    }
}

#[test]
fn filling_sets_satisfy_the_base_program() {
    let s = m5();
    let base = IlpModel::base(&s.model, Objective::Minimize);
    for set in s.report.max_classes.iter().chain(&s.report.min_classes) {
        assert!(base.is_feasible(set));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    /// Every filling set meets every lazy cut derived from a non-filling set.
    #[test]
    fn lazy_cuts_are_sound(a in any::<u64>(), b in any::<u64>()) {
        let s = m5();
        let dual = DualHomology::new(&s.model);
        let x = random_set(20, a);
        prop_assume!(!s.oracle.fills(&x));
        let cuts = filling_cuts(&s.model, &s.map, &dual, &x);
        prop_assert!(!cuts.is_empty());
        let dense = random_set(20, b | b.rotate_left(7));
        let dense = if s.oracle.fills(&dense) { dense } else { Bits::full(20) };
        let filling = s.oracle.shrink_to_minimal(&dense);
        for cut in &cuts {
            prop_assert!(!cut.set.intersects(&x), "cut does not separate the solution");
            prop_assert!(cut.set.intersects(&filling));
            for g in 0..s.group.order() {
                let image = s.group.image(g, &filling);
                prop_assert!(cut.set.intersects(&image));
            }
        }
    }

    /// `x_j <= t_j <= 4 x_j`: a chosen systole with no chosen neighbour is infeasible.
    #[test]
    fn intersection_count_links_to_selection(a in any::<u64>()) {
        let s = m5();
        let base = IlpModel::base(&s.model, Objective::Minimize);
        let x = random_set(20, a);
        let (_, t) = base.completion(&x);
        for j in 0..20 {
            let xj = x.contains(j) as i64;
            if t[j] > 4 * xj {
                prop_assert!(false, "t exceeds 4x");
            }
        }
        let isolated = x.iter().any(|j| t[j] == 0);
        if isolated {
            prop_assert!(!base.is_feasible(&x));
        }
    }

    /// The linearised program counts intersections exactly as the quadratic form does.
    #[test]
    fn linearisation_matches_quadratic_count(a in any::<u64>()) {
        let s = m5();
        let base = IlpModel::base(&s.model, Objective::Minimize);
        let x = random_set(20, a);
        let (y, t) = base.completion(&x);
        let quadratic: usize = x.iter().map(|i| x.iter().filter(|&j| j > i && s.model.intersects(i, j)).count()).sum();
        prop_assert_eq!(y.iter().sum::<i64>() as usize, quadratic);
        prop_assert_eq!(t.iter().sum::<i64>() as usize, 2 * quadratic);
        prop_assert_eq!(s.model.intersections_within(&x), quadratic);
    }

    #[test]
    fn shrinking_gives_minimal_filling_sets(a in any::<u64>()) {
        let s = m5();
        let x = random_set(20, a | 0xff0f0);
        prop_assume!(s.oracle.fills(&x));
        let m = s.oracle.shrink_to_minimal(&x);
        prop_assert!(is_minimal_filling(&s.model, &s.map, &m));
        prop_assert!((8..=10).contains(&m.len()));
    }
}
