//! Convex loss functions, full-batch (sub)gradients, and accuracy.
//!
//! Three models share one interface: a soft-margin linear SVM (hinge loss
//! plus an L2 term), least-squares linear regression, and logistic
//! regression with cross-entropy. Gradients are exact full-batch quantities;
//! nothing here is stochastic.

use crate::data::{LabelScheme, Partition, Sample};
use crate::error::{Error, Result};
use crate::vector::{weighted_average, ParamVector};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    Svm,
    Linreg,
    Logreg,
}

/// Model choice plus the SVM regularization weight (ignored by the other
/// kinds).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelSpec {
    pub kind: ModelKind,
    pub lambda: f64,
}

impl ModelSpec {
    pub fn svm(lambda: f64) -> Result<Self> {
        let lambda_ok = lambda.is_finite() && lambda > 0.0;
        if !lambda_ok {
            return Err(Error::invalid("lambda", "svm requires lambda > 0"));
        }
        Ok(ModelSpec {
            kind: ModelKind::Svm,
            lambda,
        })
    }

    pub fn linreg() -> Self {
        ModelSpec {
            kind: ModelKind::Linreg,
            lambda: 0.0,
        }
    }

    pub fn logreg() -> Self {
        ModelSpec {
            kind: ModelKind::Logreg,
            lambda: 0.0,
        }
    }

    pub fn label_scheme(&self) -> LabelScheme {
        match self.kind {
            ModelKind::Svm | ModelKind::Linreg => LabelScheme::SvmLinear,
            ModelKind::Logreg => LabelScheme::Logistic,
        }
    }

    /// Whether accuracy curves are reported for this model.
    pub fn reports_accuracy(&self) -> bool {
        self.kind == ModelKind::Svm
    }
}

/// Numerically stable logistic function.
fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Guards the cross-entropy logs against confident mistakes.
const LOG_CLAMP: f64 = 1e-12;

/// Full-batch loss of `spec` at `w` on `data`.
pub fn loss(spec: &ModelSpec, w: &ParamVector, data: &[Sample]) -> Result<f64> {
    if data.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let n = data.len() as f64;
    let value = match spec.kind {
        ModelKind::Svm => {
            let mut hinge = 0.0;
            for s in data {
                hinge += (1.0 - s.y * w.dot(&s.x)).max(0.0);
            }
            0.5 * spec.lambda * w.dot(w) + hinge / (2.0 * n)
        }
        ModelKind::Linreg => {
            let mut sq = 0.0;
            for s in data {
                let r = s.y - w.dot(&s.x);
                sq += r * r;
            }
            sq / (2.0 * n)
        }
        ModelKind::Logreg => {
            let mut nll = 0.0;
            for s in data {
                let p = sigmoid(w.dot(&s.x));
                nll -= s.y * p.max(LOG_CLAMP).ln()
                    + (1.0 - s.y) * (1.0 - p).max(LOG_CLAMP).ln();
            }
            nll / n
        }
    };
    Ok(value)
}

/// Full-batch (sub)gradient of `spec` at `w` on `data`. The hinge uses
/// subgradient zero exactly at its kink.
pub fn gradient(spec: &ModelSpec, w: &ParamVector, data: &[Sample]) -> Result<ParamVector> {
    if data.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let n = data.len() as f64;
    let dim = w.dim();
    let mut acc = vec![0.0f64; dim];
    match spec.kind {
        ModelKind::Svm => {
            for s in data {
                if 1.0 - s.y * w.dot(&s.x) > 0.0 {
                    add_scaled(&mut acc, -s.y, &s.x);
                }
            }
            let inv = 1.0 / (2.0 * n);
            for (a, wj) in acc.iter_mut().zip(w.iter()) {
                *a = *a * inv + spec.lambda * wj;
            }
        }
        ModelKind::Linreg => {
            for s in data {
                let r = s.y - w.dot(&s.x);
                add_scaled(&mut acc, -r, &s.x);
            }
            for a in &mut acc {
                *a /= n;
            }
        }
        ModelKind::Logreg => {
            for s in data {
                let p = sigmoid(w.dot(&s.x));
                add_scaled(&mut acc, p - s.y, &s.x);
            }
            for a in &mut acc {
                *a /= n;
            }
        }
    }
    ParamVector::from_vec(acc)
}

fn add_scaled(acc: &mut [f64], c: f64, x: &ParamVector) {
    for (a, v) in acc.iter_mut().zip(x.iter()) {
        *a += c * v;
    }
}

/// Fraction of correct predictions. Sign models predict `sign(w.x)` with
/// ties counted as +1; logistic predicts 1 when the logit is nonnegative.
pub fn accuracy(spec: &ModelSpec, w: &ParamVector, data: &[Sample]) -> f64 {
    if data.is_empty() {
        return 0.0;
    }
    let correct = data
        .iter()
        .filter(|s| {
            let z = w.dot(&s.x);
            match spec.kind {
                ModelKind::Svm | ModelKind::Linreg => {
                    let predicted = if z >= 0.0 { 1.0 } else { -1.0 };
                    predicted == s.y
                }
                ModelKind::Logreg => {
                    let predicted = if z >= 0.0 { 1.0 } else { 0.0 };
                    predicted == s.y
                }
            }
        })
        .count();
    correct as f64 / data.len() as f64
}

/// Global loss: the size-weighted average of the node losses, accumulated in
/// node index order and divided once.
pub fn global_loss(spec: &ModelSpec, partition: &Partition, w: &ParamVector) -> Result<f64> {
    let mut weighted = 0.0;
    let mut total = 0.0;
    for node in partition.nodes() {
        weighted += node.len() as f64 * loss(spec, w, node)?;
        total += node.len() as f64;
    }
    Ok(weighted / total)
}

/// Global gradient: the size-weighted average of the node gradients.
pub fn global_gradient(
    spec: &ModelSpec,
    partition: &Partition,
    w: &ParamVector,
) -> Result<ParamVector> {
    let grads: Vec<ParamVector> = partition
        .nodes()
        .iter()
        .map(|node| gradient(spec, w, node))
        .collect::<Result<_>>()?;
    let entries: Vec<(f64, &ParamVector)> = partition
        .nodes()
        .iter()
        .zip(&grads)
        .map(|(node, g)| (node.len() as f64, g))
        .collect();
    weighted_average(&entries)
}
