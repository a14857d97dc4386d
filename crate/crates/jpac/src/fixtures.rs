//! Hand-built miniature systems used across the test suites.

use crate::channel::NormalizedProblem;
use ndarray::{arr1, arr2, Array1};

/// Two links, two samples each, unit budgets.
///
/// Block 1 is `[[1, -0.2], [1, -0.5]]`, block 2 is `[[-0.3, 1], [-0.5, 1]]`,
/// and both noise floors are `floor` in every sample. With `floor = 0.5` the
/// pair is exactly supportable at full power; with `floor = 0.8` it is not,
/// while each link alone still is.
pub fn two_link(floor: f64) -> NormalizedProblem {
    NormalizedProblem {
        blocks: vec![
            arr2(&[[1.0, -0.2], [1.0, -0.5]]),
            arr2(&[[-0.3, 1.0], [-0.5, 1.0]]),
        ],
        floors: vec![arr1(&[floor, floor]), arr1(&[floor, floor])],
        budget: Array1::ones(2),
    }
}

/// Single link with one sample and the given floor.
pub fn single_link(floor: f64) -> NormalizedProblem {
    NormalizedProblem {
        blocks: vec![arr2(&[[1.0]])],
        floors: vec![arr1(&[floor])],
        budget: Array1::ones(1),
    }
}
