use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Everything that can go wrong across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("radical inverse requires index >= 1 and base >= 2, got index {index}, base {base}")]
    DegenerateRadicalInverse { index: u64, base: u64 },

    #[error("reference set requires count >= 1 and dim >= 1, got count {count}, dim {dim}")]
    EmptyReferenceSet { count: usize, dim: usize },

    #[error("cost matrix must be square: row {row} has {len} entries, expected {expected}")]
    NonSquareCostMatrix {
        row: usize,
        len: usize,
        expected: usize,
    },

    #[error("cost matrix entry ({row}, {col}) is not finite")]
    NonFiniteCost { row: usize, col: usize },

    #[error("pooled sample requires at least 2 points, got {len}")]
    PooledTooSmall { len: usize },

    #[error("block sizes ({n}, {m}) do not partition {len} points into two nonempty blocks")]
    BadBlockSizes { n: usize, m: usize, len: usize },

    #[error("point {index} has dimension {got}, expected {expected}")]
    DimensionMismatch {
        index: usize,
        got: usize,
        expected: usize,
    },

    #[error("observation {index} contains a non-finite coordinate")]
    NonFiniteObservation { index: usize },

    #[error("rank energy requires at least 2 points per block, got {n} and {m}")]
    BlockTooSmall { n: usize, m: usize },

    #[error("alpha must lie in the open interval (0, 2), got {alpha}")]
    AlphaOutOfRange { alpha: f64 },

    #[error("min_size must be at least 2, got {min_size}")]
    MinSizeTooSmall { min_size: usize },

    #[error("segment of length {len} admits no split with min_size {min_size}")]
    SegmentTooShort { len: usize, min_size: usize },

    #[error("permutation count must be at least 19, got {permutations}")]
    TooFewPermutations { permutations: usize },

    #[error("significance level must lie in (0, 1), got {sig_level}")]
    SigLevelOutOfRange { sig_level: f64 },

    #[error("max_changepoints must be at least 1 when set")]
    ZeroMaxChangePoints,

    #[error("split statistic (split {split_at}, boundary {right_end}) does not fit a segment of length {len} with min_size {min_size}")]
    SplitMismatch {
        split_at: usize,
        right_end: usize,
        len: usize,
        min_size: usize,
    },

    #[error("regime spec requires dim >= 1 and at least one segment")]
    EmptyRegime,

    #[error("regime segment {segment} has length 0")]
    EmptySegment { segment: usize },

    #[error("regime segment {segment} has a non-positive or non-finite scale entry")]
    BadScale { segment: usize },

    #[error("regime segment {segment} has a non-finite mean entry")]
    BadMean { segment: usize },

    #[error("regime segment {segment} requires dof > 0, got {dof}")]
    BadDof { segment: usize, dof: f64 },

    #[error("regime segment {segment} requires lo < hi, got [{lo}, {hi}]")]
    BadUniformBounds { segment: usize, lo: f64, hi: f64 },

    #[error("regime segment {segment} has parameter vectors of the wrong length, expected {expected}")]
    ParamDimMismatch { segment: usize, expected: usize },

    #[error("series must contain at least one observation with at least one coordinate")]
    EmptySeries,

    #[error("{labels} labels do not match {rows} observations")]
    LabelCountMismatch { labels: usize, rows: usize },

    #[error("duplicate label {label:?}")]
    DuplicateLabel { label: String },

    #[error("failed to open {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("failed to read {path}: {source}")]
    Csv {
        path: String,
        #[source]
        source: csv::Error,
    },

    #[error("invalid numeric value {value:?} at row {row}, column {column:?}")]
    ParseCell {
        row: usize,
        column: String,
        value: String,
    },

    #[error("non-finite numeric value at row {row}, column {column:?}")]
    NonFiniteCell { row: usize, column: String },

    #[error("row {row} has {got} fields, expected {expected}")]
    RaggedRow {
        row: usize,
        got: usize,
        expected: usize,
    },

    #[error("{path} contains no data rows")]
    EmptyCsv { path: String },

    #[error("{path} contains no numeric columns")]
    NoNumericColumns { path: String },

    #[error("label column {column:?} not found")]
    LabelColumnNotFound { column: String },

    #[error("log returns require a univariate series, got dimension {dim}")]
    NotUnivariate { dim: usize },

    #[error("log returns require at least 2 prices, got {len}")]
    TooShortForReturns { len: usize },

    #[error("price {value} at position {index} is not positive")]
    NonPositivePrice { index: usize, value: f64 },
}
