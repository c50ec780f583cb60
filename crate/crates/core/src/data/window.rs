use std::ops::Range;

use crate::error::{usage, Result};

pub const DEFAULT_WINDOW: usize = 20;

/// Sliding windows of length `window`, each paired with the value that
/// immediately follows it.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct WindowSet {
    pub window: usize,
    pub inputs: Vec<Vec<f64>>,
    pub targets: Vec<f64>,
    /// Series index of each window's first element.
    pub starts: Vec<usize>,
}

impl WindowSet {
    pub fn empty(window: usize) -> Self {
        Self { window, ..Default::default() }
    }

    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }

    /// Every series index read by window `j`, target included.
    pub fn span(&self, j: usize) -> Range<usize> {
        self.starts[j]..self.starts[j] + self.window + 1
    }

    pub fn extend(&mut self, other: WindowSet) {
        debug_assert_eq!(self.window, other.window);
        self.inputs.extend(other.inputs);
        self.targets.extend(other.targets);
        self.starts.extend(other.starts);
    }
}

/// All windows over `segment`, whose first element sits at series index
/// `offset`. A segment of length `L` yields `L - window` windows.
pub fn make_windows(segment: &[f64], offset: usize, window: usize) -> Result<WindowSet> {
    if window == 0 {
        return Err(usage("window length must be positive"));
    }
    if segment.len() <= window {
        return Err(usage(format!(
            "segment of length {} too short for window {window}",
            segment.len()
        )));
    }
    let n = segment.len() - window;
    let mut set = WindowSet {
        window,
        inputs: Vec::with_capacity(n),
        targets: Vec::with_capacity(n),
        starts: Vec::with_capacity(n),
    };
    for s in 0..n {
        set.inputs.push(segment[s..s + window].to_vec());
        set.targets.push(segment[s + window]);
        set.starts.push(offset + s);
    }
    Ok(set)
}

/// Windows over each contiguous run of `values`; runs too short for a
/// single window contribute nothing, and no window spans two runs.
pub fn windows_over_runs(values: &[f64], runs: &[Range<usize>], window: usize) -> WindowSet {
    let mut set = WindowSet::empty(window);
    for run in runs {
        if run.len() > window {
            let part = make_windows(&values[run.clone()], run.start, window).expect("run longer than window");
            set.extend(part);
        }
    }
    set
}

/// Splits a sorted index list into maximal runs of consecutive indices.
pub fn contiguous_runs(indices: &[usize]) -> Vec<Range<usize>> {
    let mut runs = Vec::new();
    let mut iter = indices.iter().copied();
    let Some(first) = iter.next() else {
        return runs;
    };
    let (mut start, mut end) = (first, first + 1);
    for i in iter {
        if i == end {
            end += 1;
        } else {
            runs.push(start..end);
            start = i;
            end = i + 1;
        }
    }
    runs.push(start..end);
    runs
}
