use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use super::TaskGenError;

/// Rank-weight law `w_i ∝ i^(-1/shape)` for ranks `i = 1..=n`.
/// Large shapes approach the uniform distribution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerLawSpec {
    shape: f64,
}

impl PowerLawSpec {
    pub fn new(shape: f64) -> Result<Self, TaskGenError> {
        if shape.is_finite() && shape > 0.0 {
            Ok(Self { shape })
        } else {
            Err(TaskGenError::InvalidShape(shape))
        }
    }

    pub fn shape(&self) -> f64 {
        self.shape
    }
}

pub fn power_law_weights(n: usize, spec: PowerLawSpec) -> Vec<f64> {
    let exponent = -1.0 / spec.shape;
    (1..=n).map(|rank| (rank as f64).powf(exponent)).collect()
}

/// Splits `total` examples across `instructions` ranked instructions.
///
/// Without a law the split is as even as possible, earlier instructions
/// taking the remainder. With a law, counts follow largest-remainder
/// apportionment of the weights, except that every instruction whose
/// quota is below one example is pinned to exactly one and the rest
/// is reapportioned among the others.
pub fn allocate_counts(
    total: usize,
    instructions: usize,
    spec: Option<PowerLawSpec>,
) -> Result<Vec<usize>, TaskGenError> {
    if instructions == 0 || total < instructions {
        return Err(TaskGenError::TooFewExamples {
            total,
            instructions,
        });
    }
    let Some(spec) = spec else {
        let base = total / instructions;
        let extra = total % instructions;
        return Ok((0..instructions)
            .map(|i| base + usize::from(i < extra))
            .collect());
    };

    let weights = power_law_weights(instructions, spec);
    let mut head = instructions;
    let quotas = loop {
        let remaining = (total - (instructions - head)) as f64;
        let weight_sum: f64 = weights[..head].iter().sum();
        let quotas: Vec<f64> = weights[..head]
            .iter()
            .map(|w| remaining * w / weight_sum)
            .collect();
        // weights are non-increasing, so sub-unit quotas form a suffix
        let keep = quotas.iter().take_while(|&&q| q >= 1.0).count();
        if keep == head {
            break quotas;
        }
        head = keep;
    };

    let mut counts: Vec<usize> = quotas.iter().map(|q| q.floor() as usize).collect();
    let assigned: usize = counts.iter().sum::<usize>() + (instructions - head);
    let mut order: Vec<usize> = (0..head).collect();
    order.sort_by(|&a, &b| {
        let fa = quotas[a] - quotas[a].floor();
        let fb = quotas[b] - quotas[b].floor();
        fb.partial_cmp(&fa).unwrap_or(Ordering::Equal).then(a.cmp(&b))
    });
    for &i in order.iter().take(total - assigned) {
        counts[i] += 1;
    }
    counts.resize(instructions, 1);
    Ok(counts)
}

/// No-op examples among `count`: `round(count * fraction)` with halves rounded up.
pub fn noop_count(count: usize, fraction: f64) -> usize {
    let exact = count as f64 * fraction;
    let floor = exact.floor();
    let n = floor as usize + usize::from(exact - floor >= 0.5);
    n.min(count)
}

/// Whether slot `j` of `count` is one of the `noops` no-op slots.
/// No-op slots are spread evenly across the range.
pub fn is_noop_slot(j: usize, count: usize, noops: usize) -> bool {
    (j + 1) * noops / count > j * noops / count
}
