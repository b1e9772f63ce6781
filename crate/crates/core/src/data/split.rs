use crate::seed::{shuffle, SplitMix64};

use super::{CarFollowingEvent, DataError};

/// Disjoint train/test partition of an event set.
#[derive(Debug, Clone)]
pub struct DatasetSplit {
    pub train: Vec<CarFollowingEvent>,
    pub test: Vec<CarFollowingEvent>,
    pub seed: u64,
}

/// Seeded Fisher–Yates shuffle, then the first `floor(ratio · n)` events train.
pub fn split_dataset(
    events: &[CarFollowingEvent],
    ratio: f64,
    seed: u64,
) -> Result<DatasetSplit, DataError> {
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(DataError::Argument(format!(
            "split ratio {ratio} must lie in (0, 1)"
        )));
    }
    if events.is_empty() {
        return Err(DataError::Argument(
            "cannot split an empty event set".into(),
        ));
    }
    let mut order: Vec<usize> = (0..events.len()).collect();
    shuffle(&mut order, &mut SplitMix64::new(seed));
    let n_train = (ratio * events.len() as f64).floor() as usize;
    let (head, tail) = order.split_at(n_train);
    Ok(DatasetSplit {
        train: head.iter().map(|&i| events[i].clone()).collect(),
        test: tail.iter().map(|&i| events[i].clone()).collect(),
        seed,
    })
}
