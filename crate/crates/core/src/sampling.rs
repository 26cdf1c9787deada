//! Reproducible base-point and fibre-point sampling.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::immersion::{Domain, ImmersionError};

/// Radical inverse of `index` in `base`.
pub fn halton(mut index: u64, base: u64) -> f64 {
    let mut f = 1.0;
    let mut r = 0.0;
    let b = base as f64;
    while index > 0 {
        f /= b;
        r += f * (index % base) as f64;
        index /= base;
    }
    r
}

/// Rejection attempts allowed per requested point before giving up.
const ATTEMPTS_PER_POINT: usize = 64;

/// `count` low-discrepancy points of the parameter box outside the excluded
/// region. A seeded random shift (Cranley–Patterson rotation) decorrelates
/// runs with different seeds while keeping each run reproducible.
pub fn base_points(
    domain: &Domain,
    p: usize,
    count: usize,
    seed: u64,
) -> Result<Vec<Vec<f64>>, ImmersionError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let shift: [f64; 2] = [rng.random(), rng.random()];
    let boxes = [domain.u, domain.v];
    let mut out = Vec::with_capacity(count);
    let mut index = 1u64;
    let limit = ATTEMPTS_PER_POINT * count.max(1) + 1024;
    while out.len() < count && (index as usize) <= limit {
        let point: Vec<f64> = (0..p)
            .map(|a| {
                let h = (halton(index, [2, 3][a]) + shift[a]).fract();
                boxes[a].0 + h * (boxes[a].1 - boxes[a].0)
            })
            .collect();
        index += 1;
        if !domain.is_excluded(&point) {
            out.push(point);
        }
    }
    if out.is_empty() && count > 0 {
        return Err(ImmersionError::EmptyDomain);
    }
    Ok(out)
}

/// Evenly spaced values over `[lo, hi]`; a single point sits at the midpoint.
pub fn linspace(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![0.5 * (lo + hi)],
        _ => (0..count)
            .map(|i| lo + (hi - lo) * i as f64 / (count - 1) as f64)
            .collect(),
    }
}

/// Tensor grid over the parameter box, excluded points removed.
pub fn base_grid(
    domain: &Domain,
    p: usize,
    per_axis: usize,
) -> Result<Vec<Vec<f64>>, ImmersionError> {
    let us = linspace(domain.u.0, domain.u.1, per_axis);
    let out: Vec<Vec<f64>> = if p == 1 {
        us.into_iter().map(|u| vec![u]).collect()
    } else {
        let vs = linspace(domain.v.0, domain.v.1, per_axis);
        us.iter()
            .flat_map(|&u| vs.iter().map(move |&v| vec![u, v]))
            .collect()
    };
    let out: Vec<Vec<f64>> = out
        .into_iter()
        .filter(|pt| !domain.is_excluded(pt))
        .collect();
    if out.is_empty() {
        return Err(ImmersionError::EmptyDomain);
    }
    Ok(out)
}

/// Cube `[lo, hi]^rank` sampled with `per_axis` points along each axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FibreGrid {
    pub lo: f64,
    pub hi: f64,
    pub per_axis: usize,
}

impl Default for FibreGrid {
    /// Five points on `[-10, 10]`: zero plus two sign-symmetric pairs.
    fn default() -> Self {
        FibreGrid {
            lo: -10.0,
            hi: 10.0,
            per_axis: 5,
        }
    }
}

impl FibreGrid {
    pub fn points(&self, rank: usize) -> Vec<Vec<f64>> {
        let axis = linspace(self.lo, self.hi, self.per_axis);
        let mut out: Vec<Vec<f64>> = vec![Vec::new()];
        for _ in 0..rank {
            out = out
                .into_iter()
                .flat_map(|prefix| {
                    axis.iter().map(move |&t| {
                        let mut p = prefix.clone();
                        p.push(t);
                        p
                    })
                })
                .collect();
        }
        out
    }
}
