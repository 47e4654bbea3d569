use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::gd::{check_divergence, LossTrace, TrainOutcome, Trainable};
use super::{Batch, TrainConfig};
use crate::error::{Error, Result};
use crate::model::Dataset;

/// Minibatch SGD from inherited weights, returning the best checkpoint.
///
/// The trace records the full-data loss before the first step and after
/// every step. The returned model is the checkpoint with the lowest full-data
/// loss, so its loss never exceeds the starting loss.
pub fn sgd_finetune<M: Trainable>(model: &M, data: &Dataset, config: &TrainConfig) -> Result<TrainOutcome<M>> {
    config.validate()?;
    let (batch_size, seed) = match config.batch {
        Batch::Full => (data.len(), 0),
        Batch::Minibatch { size, seed } => (size, seed),
    };
    if batch_size > data.len() {
        return Err(Error::InvalidInput(format!(
            "minibatch size {batch_size} exceeds dataset size {}",
            data.len()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut current = model.clone();
    let initial = current.batch_loss(data, None)?;
    let mut best = (initial, current.clone());
    let mut trace = vec![initial];
    for t in 0..config.steps {
        let rows = if batch_size == data.len() {
            None
        } else {
            let mut idx = sample(&mut rng, data.len(), batch_size).into_vec();
            idx.sort_unstable();
            Some(idx)
        };
        current.descend(data, rows.as_deref(), config.rate_at(t))?;
        let loss = current.batch_loss(data, None)?;
        check_divergence(t + 1, loss, initial)?;
        trace.push(loss);
        if loss < best.0 {
            best = (loss, current.clone());
        }
    }
    Ok(TrainOutcome {
        model: best.1,
        trace: LossTrace(trace),
        converged: true,
    })
}
