//! Per-iteration run records backing CSV output.

/// One observed point of a run: iteration index, global loss on the training
/// data, and (when a test set is supplied) test accuracy.
#[derive(Debug, Clone, PartialEq)]
pub struct TracePoint {
    pub iteration: usize,
    pub loss: f64,
    pub accuracy: Option<f64>,
}

/// Chronological record of a run, starting with the iteration-0 baseline.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunTrace {
    pub points: Vec<TracePoint>,
}

impl RunTrace {
    pub fn push(&mut self, iteration: usize, loss: f64, accuracy: Option<f64>) {
        self.points.push(TracePoint {
            iteration,
            loss,
            accuracy,
        });
    }

    pub fn final_loss(&self) -> Option<f64> {
        self.points.last().map(|p| p.loss)
    }

    pub fn final_accuracy(&self) -> Option<f64> {
        self.points.last().and_then(|p| p.accuracy)
    }

    /// Number of records after the iteration-0 baseline.
    pub fn post_init_len(&self) -> usize {
        self.points.iter().filter(|p| p.iteration > 0).count()
    }

    pub fn losses(&self) -> impl Iterator<Item = f64> + '_ {
        self.points.iter().map(|p| p.loss)
    }
}
