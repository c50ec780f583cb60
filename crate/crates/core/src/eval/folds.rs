use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::data::contiguous_runs;
use crate::error::{config, Result};

pub const DEFAULT_FOLDS: usize = 5;
/// One day of readings at 40 per hour.
pub const DEFAULT_GAP: usize = 960;
pub const DEFAULT_VAL_FRACTION: f64 = 0.1;

/// Index sets of one fold. All four sets are pairwise disjoint.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fold {
    pub index: usize,
    pub test: Range<usize>,
    /// Discarded indices just before the test block; empty at the series start.
    pub gap_before: Range<usize>,
    /// Discarded indices just after the test block; empty at the series end.
    pub gap_after: Range<usize>,
    /// Sorted; wraps to the series end when the test block starts at 0.
    pub validation: Vec<usize>,
    /// Sorted; may lie before and after the test block.
    pub train: Vec<usize>,
}

impl Fold {
    pub fn train_runs(&self) -> Vec<Range<usize>> {
        contiguous_runs(&self.train)
    }

    pub fn validation_runs(&self) -> Vec<Range<usize>> {
        contiguous_runs(&self.validation)
    }

    pub fn test_runs(&self) -> Vec<Range<usize>> {
        vec![self.test.clone()]
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FoldPlan {
    pub n: usize,
    pub k: usize,
    pub gap_size: usize,
    pub val_fraction: f64,
    pub folds: Vec<Fold>,
}

/// Gap k-fold split with a validation block preceding each test block.
///
/// The series is cut into `k` near-equal contiguous test blocks (the first
/// `n % k` one element longer). Around each block `gap_size` indices are
/// discarded on every side that does not touch the series edge. The
/// `ceil(val_fraction * n)` indices immediately before the leading gap,
/// counted cyclically, form the validation set; everything else trains.
pub fn gap_kfold_split(n: usize, k: usize, gap_size: usize, val_fraction: f64) -> Result<FoldPlan> {
    if k < 2 {
        return Err(config(format!("need at least 2 folds, got {k}")));
    }
    if n < k {
        return Err(config(format!("{n} samples cannot form {k} folds")));
    }
    if !(val_fraction > 0.0 && val_fraction < 0.5) {
        return Err(config(format!("val_fraction {val_fraction} outside (0, 0.5)")));
    }
    let val_len = (val_fraction * n as f64).ceil() as usize;
    let (base, extra) = (n / k, n % k);
    let mut folds = Vec::with_capacity(k);
    let mut start = 0;
    for index in 0..k {
        let len = base + usize::from(index < extra);
        let end = start + len;
        let lead = gap_size.min(start);
        let trail = gap_size.min(n - end);
        let excluded = len + lead + trail + val_len;
        if excluded >= n {
            return Err(config(format!(
                "fold {index}: test {len} + gaps {} + validation {val_len} leave no training data out of {n}",
                lead + trail
            )));
        }
        let gap_start = start - lead;
        let mut validation: Vec<usize> = (1..=val_len).map(|j| (gap_start + n - j) % n).collect();
        validation.sort_unstable();

        let mut role = vec![true; n];
        for i in gap_start..end + trail {
            role[i] = false;
        }
        for &i in &validation {
            role[i] = false;
        }
        let train = (0..n).filter(|&i| role[i]).collect();
        folds.push(Fold {
            index,
            test: start..end,
            gap_before: gap_start..start,
            gap_after: end..end + trail,
            validation,
            train,
        });
        start = end;
    }
    Ok(FoldPlan { n, k, gap_size, val_fraction, folds })
}
