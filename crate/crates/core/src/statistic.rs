//! Two-sample energy statistics on rank vectors and the search for the
//! best-separating split of a segment.

use crate::error::{Error, Result};
use crate::rankmap::{rank_map, PooledSample};
use serde::{Deserialize, Serialize};

/// Settings for the split statistic.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StatConfig {
    /// Exponent applied to pairwise Euclidean distances; must lie in (0, 2).
    /// 2 would compare means only and 0 is constant, so both are excluded.
    pub alpha: f64,
    /// Minimum number of observations on each side of a split.
    pub min_size: usize,
    /// Split search strategy.
    pub mode: ScanMode,
}

impl Default for StatConfig {
    fn default() -> Self {
        Self {
            alpha: 1.0,
            min_size: 30,
            mode: ScanMode::Fast,
        }
    }
}

impl StatConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 2.0) {
            return Err(Error::AlphaOutOfRange { alpha: self.alpha });
        }
        if self.min_size < 2 {
            return Err(Error::MinSizeTooSmall {
                min_size: self.min_size,
            });
        }
        Ok(())
    }
}

/// How `split_scan` searches candidate splits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScanMode {
    /// Maximize over the split location and the right boundary, re-ranking
    /// every prefix. Cost grows with the fourth power of the segment
    /// length; meant for short segments and validation.
    Exact,
    /// Pin the right boundary at the segment end so a single rank map
    /// serves the whole scan. The same map is reused verbatim by the
    /// permutation test, which is what makes that test cheap.
    Fast,
}

/// A candidate split: the left block is `segment[..split_at]`, the right
/// block `segment[split_at..right_end]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitStatistic {
    pub split_at: usize,
    pub right_end: usize,
    pub q_value: f64,
}

fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

#[inline]
fn alpha_distance(a: &[f64], b: &[f64], alpha: f64) -> f64 {
    let d = euclidean(a, b);
    if alpha == 1.0 {
        d
    } else {
        d.powf(alpha)
    }
}

fn pair_count(n: f64) -> f64 {
    n * (n - 1.0) / 2.0
}

fn check_blocks(ranks_x: &[Vec<f64>], ranks_y: &[Vec<f64>], alpha: f64) -> Result<()> {
    let n = ranks_x.len();
    let m = ranks_y.len();
    if n < 2 || m < 2 {
        return Err(Error::BlockTooSmall { n, m });
    }
    if !(alpha > 0.0 && alpha < 2.0) {
        return Err(Error::AlphaOutOfRange { alpha });
    }
    let dim = ranks_x[0].len();
    for (index, point) in ranks_x.iter().chain(ranks_y.iter()).enumerate() {
        if point.len() != dim {
            return Err(Error::DimensionMismatch {
                index,
                got: point.len(),
                expected: dim,
            });
        }
    }
    Ok(())
}

/// Two-sample energy statistic between two blocks of rank vectors: twice
/// the mean cross-block distance minus each block's mean within-block
/// distance, every distance raised to `alpha`. Symmetric in its blocks and
/// possibly negative.
pub fn rank_energy(ranks_x: &[Vec<f64>], ranks_y: &[Vec<f64>], alpha: f64) -> Result<f64> {
    check_blocks(ranks_x, ranks_y, alpha)?;
    let n = ranks_x.len() as f64;
    let m = ranks_y.len() as f64;

    let mut between = 0.0;
    for x in ranks_x {
        for y in ranks_y {
            between += alpha_distance(x, y, alpha);
        }
    }
    let mut within_x = 0.0;
    for (i, x) in ranks_x.iter().enumerate() {
        for other in &ranks_x[i + 1..] {
            within_x += alpha_distance(x, other, alpha);
        }
    }
    let mut within_y = 0.0;
    for (j, y) in ranks_y.iter().enumerate() {
        for other in &ranks_y[j + 1..] {
            within_y += alpha_distance(y, other, alpha);
        }
    }

    Ok(2.0 / (n * m) * between - within_x / pair_count(n) - within_y / pair_count(m))
}

/// The split statistic: the rank energy value scaled by `nm/(n+m)`.
pub fn scaled_divergence(ranks_x: &[Vec<f64>], ranks_y: &[Vec<f64>], alpha: f64) -> Result<f64> {
    let energy = rank_energy(ranks_x, ranks_y, alpha)?;
    let n = ranks_x.len() as f64;
    let m = ranks_y.len() as f64;
    Ok(n * m / (n + m) * energy)
}

/// Pairwise alpha-powered distances between a fixed point set, row-major.
pub(crate) struct PairwiseAlpha {
    n: usize,
    values: Vec<f64>,
}

impl PairwiseAlpha {
    pub(crate) fn new(points: &[Vec<f64>], alpha: f64) -> Self {
        let n = points.len();
        let mut values = vec![0.0; n * n];
        for i in 0..n {
            for j in i + 1..n {
                let d = alpha_distance(&points[i], &points[j], alpha);
                values[i * n + j] = d;
                values[j * n + i] = d;
            }
        }
        Self { n, values }
    }

    #[inline]
    fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n + j]
    }
}

/// One pass over every admissible split of the sequence `order`, keeping
/// the three pair sums updated as the split advances one point at a time.
/// `order[t]` names the point sitting at position `t`, so permutation
/// replicates can reuse one distance matrix.
pub(crate) fn scan_splits(
    dist: &PairwiseAlpha,
    order: &[usize],
    min_size: usize,
) -> Vec<(usize, f64)> {
    let t = order.len();
    debug_assert!(min_size >= 2 && t >= 2 * min_size);

    let mut between = 0.0;
    let mut within_left = 0.0;
    let mut within_right = 0.0;
    for a in 0..min_size {
        for b in a + 1..min_size {
            within_left += dist.get(order[a], order[b]);
        }
        for b in min_size..t {
            between += dist.get(order[a], order[b]);
        }
    }
    for a in min_size..t {
        for b in a + 1..t {
            within_right += dist.get(order[a], order[b]);
        }
    }

    let mut profile = Vec::with_capacity(t - 2 * min_size + 1);
    let mut split = min_size;
    loop {
        let n = split as f64;
        let m = (t - split) as f64;
        let energy =
            2.0 / (n * m) * between - within_left / pair_count(n) - within_right / pair_count(m);
        profile.push((split, n * m / (n + m) * energy));
        if split == t - min_size {
            break;
        }
        let mover = order[split];
        let mut to_left = 0.0;
        for a in 0..split {
            to_left += dist.get(order[a], mover);
        }
        let mut to_right = 0.0;
        for b in split + 1..t {
            to_right += dist.get(mover, order[b]);
        }
        within_left += to_left;
        within_right -= to_right;
        between += to_right - to_left;
        split += 1;
    }
    profile
}

fn peak(profile: &[(usize, f64)]) -> (usize, f64) {
    let mut best = profile[0];
    for &(split, q) in &profile[1..] {
        if q > best.1 {
            best = (split, q);
        }
    }
    best
}

fn ranks_in_order(segment: &[Vec<f64>], min_size: usize) -> Result<Vec<Vec<f64>>> {
    let pooled = PooledSample::split(segment.to_vec(), min_size)?;
    Ok(rank_map(&pooled)?.ranks)
}

/// The scaled divergence of every admissible split of `segment`, with the
/// right boundary pinned at the segment end (one joint rank map over the
/// whole segment). Useful for plotting the divergence landscape.
pub fn divergence_profile(segment: &[Vec<f64>], config: &StatConfig) -> Result<Vec<(usize, f64)>> {
    config.validate()?;
    let t = segment.len();
    if t < 2 * config.min_size {
        return Err(Error::SegmentTooShort {
            len: t,
            min_size: config.min_size,
        });
    }
    let ranks = ranks_in_order(segment, config.min_size)?;
    let dist = PairwiseAlpha::new(&ranks, config.alpha);
    let order: Vec<usize> = (0..t).collect();
    Ok(scan_splits(&dist, &order, config.min_size))
}

/// The admissible split maximizing the scaled divergence.
///
/// Fast mode scans split locations under one rank map for the whole
/// segment. Exact mode additionally maximizes over the right boundary,
/// re-ranking each prefix. Ties resolve to the smallest right boundary,
/// then the smallest split, so degenerate segments scan reproducibly.
pub fn split_scan(segment: &[Vec<f64>], config: &StatConfig) -> Result<SplitStatistic> {
    config.validate()?;
    let t = segment.len();
    if t < 2 * config.min_size {
        return Err(Error::SegmentTooShort {
            len: t,
            min_size: config.min_size,
        });
    }
    match config.mode {
        ScanMode::Fast => {
            let profile = divergence_profile(segment, config)?;
            let (split_at, q_value) = peak(&profile);
            Ok(SplitStatistic {
                split_at,
                right_end: t,
                q_value,
            })
        }
        ScanMode::Exact => {
            let mut best: Option<SplitStatistic> = None;
            for right_end in 2 * config.min_size..=t {
                let ranks = ranks_in_order(&segment[..right_end], config.min_size)?;
                let dist = PairwiseAlpha::new(&ranks, config.alpha);
                let order: Vec<usize> = (0..right_end).collect();
                for (split_at, q_value) in scan_splits(&dist, &order, config.min_size) {
                    if best.as_ref().map_or(true, |b| q_value > b.q_value) {
                        best = Some(SplitStatistic {
                            split_at,
                            right_end,
                            q_value,
                        });
                    }
                }
            }
            Ok(best.expect("segment admits at least one split"))
        }
    }
}
