//! Brute-force oracle over every subset of the systoles (feasible for n = 20).

use std::collections::BTreeSet;

use crate::bits::Bits;
use crate::error::{Error, Result};
use crate::surface::SurfaceModel;
use crate::symmetry::SymmetryGroup;

use super::regions::FillingOracle;

#[derive(Clone, Debug)]
pub struct ExhaustiveReport {
    pub min_size: usize,
    pub max_size: usize,
    /// Canonical forms of the minimal filling sets of each extreme size.
    pub min_classes: Vec<Bits>,
    pub max_classes: Vec<Bits>,
    /// Number of minimal filling sets by cardinality.
    pub minimal_by_size: Vec<usize>,
}

fn bits_of(mask: u32, n: usize) -> Bits {
    (0..n).filter(|&c| mask >> c & 1 == 1).collect()
}

/// Classifies all `2^n` subsets. Filling is tabulated once; a set is minimal
/// iff it fills and none of its single-removal subsets does.
pub fn exhaustive_minimal_filling(model: &SurfaceModel, group: &SymmetryGroup) -> Result<ExhaustiveReport> {
    let n = model.n();
    if n > 24 {
        return Err(Error::TooLarge(model.m, 5));
    }
    let oracle = FillingOracle::new(model);
    let total = 1u32 << n;
    let fills: Vec<bool> = (0..total).map(|mask| oracle.fills(&bits_of(mask, n))).collect();
    let mut by_size = vec![0usize; n + 1];
    let mut extremes: Vec<BTreeSet<Bits>> = vec![BTreeSet::new(); n + 1];
    for mask in 0..total {
        if !fills[mask as usize] {
            continue;
        }
        let mut bits = mask;
        let mut minimal = true;
        while bits != 0 {
            let low = bits & bits.wrapping_neg();
            if fills[(mask ^ low) as usize] {
                minimal = false;
                break;
            }
            bits ^= low;
        }
        if minimal {
            let size = mask.count_ones() as usize;
            by_size[size] += 1;
            extremes[size].insert(group.canonical_form(&bits_of(mask, n)));
        }
    }
    let min_size = (0..=n).find(|&s| by_size[s] > 0).ok_or_else(|| Error::Invariant("no minimal filling set".into()))?;
    let max_size = (0..=n).rev().find(|&s| by_size[s] > 0).unwrap();
    let sorted = |s: &BTreeSet<Bits>| {
        let mut v: Vec<Bits> = s.iter().copied().collect();
        v.sort_by(|a, b| a.lex_cmp(b));
        v
    };
    Ok(ExhaustiveReport {
        min_size,
        max_size,
        min_classes: sorted(&extremes[min_size]),
        max_classes: sorted(&extremes[max_size]),
        minimal_by_size: by_size,
    })
}
