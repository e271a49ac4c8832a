//! Hierarchical bisection with permutation significance testing.
//!
//! Each round scores every current segment with `split_scan`, takes the
//! segment whose best split has the largest divergence, and keeps that
//! split only if a permutation test finds it significant. The recursion
//! stops at the first insignificant split, at the change point cap, or
//! when no segment is long enough to split.

use crate::error::{Error, Result};
use crate::rankmap::{rank_map, PooledSample};
use crate::series::Series;
use crate::statistic::{scan_splits, split_scan, PairwiseAlpha, ScanMode, SplitStatistic, StatConfig};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Settings for detection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectConfig {
    pub stat: StatConfig,
    /// Permutation replicates per significance test. At least 19, so the
    /// smallest attainable p-value 1/(R+1) does not exceed 0.05.
    pub permutations: usize,
    /// A split is kept while its permutation p-value stays at or below this.
    pub sig_level: f64,
    /// Optional cap on the number of reported change points.
    pub max_changepoints: Option<usize>,
    /// Master seed. Every (segment test, replicate) pair draws from its own
    /// derived substream, so results do not depend on evaluation order.
    pub seed: u64,
}

impl Default for DetectConfig {
    fn default() -> Self {
        Self {
            stat: StatConfig::default(),
            permutations: 199,
            sig_level: 0.05,
            max_changepoints: None,
            seed: 0,
        }
    }
}

impl DetectConfig {
    pub fn validate(&self) -> Result<()> {
        self.stat.validate()?;
        if self.permutations < 19 {
            return Err(Error::TooFewPermutations {
                permutations: self.permutations,
            });
        }
        if !(self.sig_level > 0.0 && self.sig_level < 1.0) {
            return Err(Error::SigLevelOutOfRange {
                sig_level: self.sig_level,
            });
        }
        if self.max_changepoints == Some(0) {
            return Err(Error::ZeroMaxChangePoints);
        }
        Ok(())
    }
}

/// A significant distributional change, splitting the series after
/// `index` observations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChangePoint {
    /// Number of observations before the change; the new regime starts at
    /// position `index` (0-based).
    pub index: usize,
    pub p_value: f64,
    pub q_value: f64,
    /// 1-based discovery order.
    pub order_found: usize,
}

/// One permutation test performed during segmentation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub iteration: usize,
    pub segment_start: usize,
    pub segment_end: usize,
    /// Global position of the candidate split.
    pub split_index: usize,
    pub q_value: f64,
    pub p_value: f64,
    pub significant: bool,
}

/// The full outcome of a detection run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionReport {
    pub config: DetectConfig,
    /// Significant change points in series order.
    pub change_points: Vec<ChangePoint>,
    /// Final segmentation as half-open `(start, end)` bounds.
    pub segments: Vec<(usize, usize)>,
    /// One entry per permutation test, in the order the tests ran.
    pub trace: Vec<TraceEntry>,
}

fn replicate_rng(seed: u64, test_index: u64, replicate: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((test_index << 32) | replicate);
    rng
}

/// Permutation p-value of an observed split statistic, with the add-one
/// estimator `(1 + #{Q_r >= Q_obs}) / (R + 1)`.
///
/// `observed` must come from `split_scan` on this segment under the same
/// settings. Fast mode reuses the segment's rank map and only relabels the
/// scan order per replicate; exact mode re-runs the full search on each
/// permuted segment and is meant for short segments.
pub fn permutation_pvalue(
    segment: &[Vec<f64>],
    observed: &SplitStatistic,
    config: &DetectConfig,
) -> Result<f64> {
    permutation_pvalue_at(segment, observed, config, 0)
}

pub(crate) fn permutation_pvalue_at(
    segment: &[Vec<f64>],
    observed: &SplitStatistic,
    config: &DetectConfig,
    test_index: u64,
) -> Result<f64> {
    config.validate()?;
    let t = segment.len();
    let min_size = config.stat.min_size;
    let consistent = observed.split_at >= min_size
        && observed.split_at + min_size <= observed.right_end
        && observed.right_end <= t
        && (config.stat.mode == ScanMode::Exact || observed.right_end == t);
    if !consistent {
        return Err(Error::SplitMismatch {
            split_at: observed.split_at,
            right_end: observed.right_end,
            len: t,
            min_size,
        });
    }

    let replicates = config.permutations;
    let mut exceed = 0usize;
    match config.stat.mode {
        ScanMode::Fast => {
            let pooled = PooledSample::split(segment.to_vec(), min_size)?;
            let ranks = rank_map(&pooled)?.ranks;
            let dist = PairwiseAlpha::new(&ranks, config.stat.alpha);
            let mut order: Vec<usize> = (0..t).collect();
            for replicate in 1..=replicates {
                let mut rng = replicate_rng(config.seed, test_index, replicate as u64);
                for (slot, value) in order.iter_mut().zip(0..t) {
                    *slot = value;
                }
                order.shuffle(&mut rng);
                let profile = scan_splits(&dist, &order, min_size);
                let best = profile
                    .iter()
                    .fold(f64::NEG_INFINITY, |acc, &(_, q)| acc.max(q));
                if best >= observed.q_value {
                    exceed += 1;
                }
            }
        }
        ScanMode::Exact => {
            for replicate in 1..=replicates {
                let mut rng = replicate_rng(config.seed, test_index, replicate as u64);
                let mut indices: Vec<usize> = (0..t).collect();
                indices.shuffle(&mut rng);
                let permuted: Vec<Vec<f64>> =
                    indices.iter().map(|&i| segment[i].clone()).collect();
                let stat = split_scan(&permuted, &config.stat)?;
                if stat.q_value >= observed.q_value {
                    exceed += 1;
                }
            }
        }
    }
    Ok((1.0 + exceed as f64) / (replicates as f64 + 1.0))
}

struct OpenSegment {
    start: usize,
    end: usize,
    best: Option<SplitStatistic>,
}

/// Divisive multiple change point estimation over a whole series.
pub fn e_divisive(series: &Series, config: &DetectConfig) -> Result<DetectionReport> {
    config.validate()?;
    let observations = series.observations();
    let total = observations.len();
    let min_size = config.stat.min_size;
    if total < 2 * min_size {
        return Err(Error::SegmentTooShort {
            len: total,
            min_size,
        });
    }

    let scan = |start: usize, end: usize| -> Result<Option<SplitStatistic>> {
        if end - start < 2 * min_size {
            return Ok(None);
        }
        split_scan(&observations[start..end], &config.stat).map(Some)
    };

    let mut segments = vec![OpenSegment {
        start: 0,
        end: total,
        best: scan(0, total)?,
    }];
    let mut change_points: Vec<ChangePoint> = Vec::new();
    let mut trace: Vec<TraceEntry> = Vec::new();

    loop {
        if let Some(cap) = config.max_changepoints {
            if change_points.len() >= cap {
                break;
            }
        }
        // Globally strongest candidate; ties go to the leftmost segment.
        let mut chosen: Option<usize> = None;
        for idx in 0..segments.len() {
            let Some(candidate) = &segments[idx].best else {
                continue;
            };
            let better = match chosen {
                None => true,
                Some(current) => {
                    candidate.q_value > segments[current].best.as_ref().unwrap().q_value
                }
            };
            if better {
                chosen = Some(idx);
            }
        }
        let Some(idx) = chosen else { break };

        let start = segments[idx].start;
        let end = segments[idx].end;
        let best = segments[idx].best.as_ref().unwrap().clone();
        let p_value = permutation_pvalue_at(
            &observations[start..end],
            &best,
            config,
            trace.len() as u64,
        )?;
        let significant = p_value <= config.sig_level;
        let split_index = start + best.split_at;
        trace.push(TraceEntry {
            iteration: trace.len() + 1,
            segment_start: start,
            segment_end: end,
            split_index,
            q_value: best.q_value,
            p_value,
            significant,
        });
        if !significant {
            break;
        }
        change_points.push(ChangePoint {
            index: split_index,
            p_value,
            q_value: best.q_value,
            order_found: change_points.len() + 1,
        });
        let left = OpenSegment {
            start,
            end: split_index,
            best: scan(start, split_index)?,
        };
        let right = OpenSegment {
            start: split_index,
            end,
            best: scan(split_index, end)?,
        };
        segments.splice(idx..=idx, [left, right]);
    }

    change_points.sort_by_key(|cp| cp.index);
    let segment_bounds = segments.iter().map(|s| (s.start, s.end)).collect();
    Ok(DetectionReport {
        config: config.clone(),
        change_points,
        segments: segment_bounds,
        trace,
    })
}
