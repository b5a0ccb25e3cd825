//! Exhaustive search over tiny allocation instances.

use super::{check_budget, sorted_levels, tolerance, validate_levels, validate_segments, Allocation, VendorLevel};
use crate::error::{Error, Result};

pub const MAX_EXACT_SEGMENTS: usize = 4;
pub const MAX_EXACT_LEVELS: usize = 3;

/// Best utility over every assignment of a nonempty level subset to each
/// segment within `budget`, and the first assignment reaching it.
pub fn brute_force_allocate(segments: &[String], levels: &[VendorLevel], budget: f64) -> Result<(f64, Allocation)> {
    validate_segments(segments)?;
    validate_levels(levels)?;
    if segments.len() > MAX_EXACT_SEGMENTS || levels.len() > MAX_EXACT_LEVELS {
        return Err(Error::InstanceTooLarge {
            segments: segments.len(),
            levels: levels.len(),
        });
    }
    check_budget(budget, segments.len(), levels)?;
    let levels = sorted_levels(levels);
    let subsets = (1usize << levels.len()) - 1;
    let subset_sum = |mask: usize, f: fn(&VendorLevel) -> f64| -> f64 {
        levels
            .iter()
            .enumerate()
            .filter(|(l, _)| mask >> l & 1 == 1)
            .map(|(_, lv)| f(lv))
            .sum()
    };

    // masks[s] in 1..=subsets, counted like an odometer
    let mut masks = vec![1usize; segments.len()];
    let mut best: Option<(f64, Vec<usize>)> = None;
    loop {
        let cost: f64 = masks.iter().map(|&m| subset_sum(m, |l| l.cost)).sum();
        if cost <= budget + tolerance(budget) {
            let utility: f64 = masks.iter().map(|&m| subset_sum(m, |l| l.utility)).sum();
            if best.as_ref().is_none_or(|(u, _)| utility > *u) {
                best = Some((utility, masks.clone()));
            }
        }
        let Some(i) = masks.iter().position(|&m| m < subsets) else {
            break;
        };
        masks[i] += 1;
        masks[..i].iter_mut().for_each(|m| *m = 1);
    }

    let (utility, masks) = best.expect("the all-cheapest assignment fits the checked budget");
    let members = (0..levels.len())
        .map(|l| masks.iter().map(|m| m >> l & 1 == 1).collect())
        .collect();
    Ok((utility, Allocation::from_members(segments, levels, members)))
}
