//! Dataset ingestion, labeling, node partitioning, and synthetic problem
//! generation.

mod idx;
pub mod surrogate;

pub use idx::{load_idx, RawDigits};

use crate::error::{Error, Result};
use crate::rng::{SeededRng, Stream};
use crate::vector::{weighted_average, ParamVector};

/// One labeled example. For digit data `x` holds the scaled pixels plus a
/// trailing constant-1 bias slot; synthetic problems use `x` freely.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub x: ParamVector,
    pub y: f64,
}

/// Label convention for the binary even/odd task.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LabelScheme {
    /// Even digits map to +1, odd to -1 (SVM and linear regression).
    SvmLinear,
    /// Even digits map to 1, odd to 0 (logistic regression).
    Logistic,
}

/// Maps a digit 0-9 to its binary label under the given scheme.
pub fn binarize(digit: u8, scheme: LabelScheme) -> f64 {
    debug_assert!(digit <= 9);
    let even = digit.is_multiple_of(2);
    match scheme {
        LabelScheme::SvmLinear => {
            if even {
                1.0
            } else {
                -1.0
            }
        }
        LabelScheme::Logistic => {
            if even {
                1.0
            } else {
                0.0
            }
        }
    }
}

/// Converts raw digit data into samples: pixels stay in [0, 1], a constant-1
/// bias entry is appended, and labels follow the scheme.
pub fn to_samples(raw: &RawDigits, scheme: LabelScheme) -> Result<Vec<Sample>> {
    let mut samples = Vec::with_capacity(raw.labels.len());
    for (pixels, &digit) in raw.pixels.iter().zip(&raw.labels) {
        let mut values = Vec::with_capacity(pixels.len() + 1);
        values.extend_from_slice(pixels);
        values.push(1.0);
        samples.push(Sample {
            x: ParamVector::from_vec(values)?,
            y: binarize(digit, scheme),
        });
    }
    Ok(samples)
}

/// Keeps the first `count` samples of a seeded shuffle. This is the fixed
/// subset rule for large digit datasets: deterministic and order-independent
/// of the source file.
pub fn subset_samples(
    mut samples: Vec<Sample>,
    count: usize,
    seed: u64,
    stream: Stream,
) -> Result<Vec<Sample>> {
    if count == 0 || count > samples.len() {
        return Err(Error::invalid(
            "count",
            format!("subset size {count} not in 1..={}", samples.len()),
        ));
    }
    let mut rng = SeededRng::new(seed, stream);
    rng.shuffle(&mut samples);
    samples.truncate(count);
    Ok(samples)
}

/// Node-local datasets plus the implied global dataset.
///
/// Nodes are indexed; every cross-node reduction in the crate walks them in
/// ascending index order.
#[derive(Debug, Clone)]
pub struct Partition {
    nodes: Vec<Vec<Sample>>,
}

impl Partition {
    pub fn new(nodes: Vec<Vec<Sample>>) -> Result<Self> {
        if nodes.is_empty() {
            return Err(Error::invalid("nodes", "at least one node required"));
        }
        if nodes.iter().any(|n| n.is_empty()) {
            return Err(Error::EmptyDataset);
        }
        let dim = nodes[0][0].x.dim();
        for node in &nodes {
            for sample in node {
                if sample.x.dim() != dim {
                    return Err(Error::DimensionMismatch {
                        expected: dim,
                        actual: sample.x.dim(),
                    });
                }
            }
        }
        Ok(Partition { nodes })
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn node(&self, i: usize) -> &[Sample] {
        &self.nodes[i]
    }

    pub fn nodes(&self) -> &[Vec<Sample>] {
        &self.nodes
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.nodes.iter().map(|n| n.len()).collect()
    }

    pub fn total_len(&self) -> usize {
        self.nodes.iter().map(|n| n.len()).sum()
    }

    pub fn dim(&self) -> usize {
        self.nodes[0][0].x.dim()
    }

    pub fn iter_all(&self) -> impl Iterator<Item = &Sample> {
        self.nodes.iter().flat_map(|n| n.iter())
    }

    /// Global dataset as one owned vector, nodes concatenated in index order.
    pub fn flatten(&self) -> Vec<Sample> {
        self.iter_all().cloned().collect()
    }
}

/// Seeded shuffle followed by a contiguous split into `n` disjoint blocks
/// whose sizes differ by at most one (the first `len % n` nodes get the
/// extra sample).
pub fn partition_uniform(mut samples: Vec<Sample>, n: usize, seed: u64) -> Result<Partition> {
    if n < 1 {
        return Err(Error::invalid("n", "at least one node required"));
    }
    if samples.len() < n {
        return Err(Error::invalid(
            "n",
            format!("{n} nodes cannot share {} samples", samples.len()),
        ));
    }
    let mut rng = SeededRng::new(seed, Stream::Partition);
    rng.shuffle(&mut samples);
    let base = samples.len() / n;
    let extra = samples.len() % n;
    let mut nodes = Vec::with_capacity(n);
    let mut rest = samples;
    for i in 0..n {
        let take = base + usize::from(i < extra);
        let tail = rest.split_off(take);
        nodes.push(rest);
        rest = tail;
    }
    debug_assert!(rest.is_empty());
    Partition::new(nodes)
}

/// A partitioned least-squares problem with analytically known constants.
///
/// Node `i` holds `dim` samples `(sqrt(dim) * e_j, sqrt(dim) * c_i[j])`, so
/// its loss is exactly `0.5 * ||w - c_i||^2`: unit smoothness, gradient
/// `w - c_i`, and per-node gradient divergence `||mean(c) - c_i||` that is
/// constant in `w`.
#[derive(Debug, Clone)]
pub struct SyntheticProblem {
    pub partition: Partition,
    pub centers: Vec<ParamVector>,
    /// Smoothness constant of every node loss (exactly 1).
    pub beta: f64,
    /// Exact per-node gradient divergence.
    pub delta_i: Vec<f64>,
    /// Size-weighted average of `delta_i`.
    pub delta: f64,
    /// Global minimizer: the size-weighted mean of the centers.
    pub w_star: ParamVector,
}

/// Builds a [`SyntheticProblem`] with node centers drawn uniformly from the
/// ball of radius `spread` around the origin.
pub fn make_synthetic(dim: usize, n: usize, seed: u64, spread: f64) -> Result<SyntheticProblem> {
    if dim < 1 {
        return Err(Error::invalid("dim", "dimension must be at least 1"));
    }
    if n < 1 {
        return Err(Error::invalid("n", "at least one node required"));
    }
    if spread < 0.0 {
        return Err(Error::invalid("spread", "spread must be nonnegative"));
    }
    let mut rng = SeededRng::new(seed, Stream::Centers);
    let centers: Vec<ParamVector> = (0..n)
        .map(|_| {
            let c = rng.in_ball(dim, spread);
            ParamVector::from_vec(c).expect("ball points are finite")
        })
        .collect();

    let scale = (dim as f64).sqrt();
    let nodes: Vec<Vec<Sample>> = centers
        .iter()
        .map(|center| {
            (0..dim)
                .map(|j| {
                    let mut x = vec![0.0; dim];
                    x[j] = scale;
                    Sample {
                        x: ParamVector::from_vec(x).expect("finite"),
                        y: scale * center.as_slice()[j],
                    }
                })
                .collect()
        })
        .collect();
    let partition = Partition::new(nodes)?;

    let sizes = partition.sizes();
    let entries: Vec<(f64, &ParamVector)> = sizes
        .iter()
        .zip(&centers)
        .map(|(s, c)| (*s as f64, c))
        .collect();
    let w_star = weighted_average(&entries)?;
    let delta_i: Vec<f64> = centers.iter().map(|c| w_star.distance(c)).collect();
    let total: f64 = sizes.iter().map(|s| *s as f64).sum();
    let delta = sizes
        .iter()
        .zip(&delta_i)
        .map(|(s, d)| *s as f64 * d)
        .sum::<f64>()
        / total;

    Ok(SyntheticProblem {
        partition,
        centers,
        beta: 1.0,
        delta_i,
        delta,
        w_star,
    })
}
