use std::path::Path;

use ndarray::{Array1, Array2, ArrayView2, Axis};
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::write_atomic;
use crate::model::{loss_mean, Dataset, DeepMLP};
use crate::selection::argmin;

/// Settings shared by every layer.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LayerPruneConfig {
    /// Allowed full-data loss gap to the original model.
    pub eps: f64,
    /// Minibatch size for candidate scoring; the full set when equal to `m`.
    pub batch_size: usize,
    pub batch_seed: u64,
    /// Cap on the multiset size per layer; defaults to the layer width.
    pub max_neurons: Option<usize>,
}

impl LayerPruneConfig {
    pub fn validate(&self, dataset: &Dataset) -> Result<()> {
        if self.eps.is_nan() || self.eps < 0.0 {
            return Err(Error::InvalidInput(format!(
                "eps must be non-negative, got {}",
                self.eps
            )));
        }
        if self.batch_size == 0 || self.batch_size > dataset.len() {
            return Err(Error::InvalidInput(format!(
                "batch size {} must lie in 1..={}",
                self.batch_size,
                dataset.len()
            )));
        }
        if self.max_neurons == Some(0) {
            return Err(Error::InvalidInput("max_neurons must be at least 1".into()));
        }
        Ok(())
    }
}

/// Deterministic minibatch sequence for one layer: a pure function of the
/// seed and the layer index.
#[derive(Clone, Debug)]
pub struct BatchSchedule {
    rng: ChaCha8Rng,
    size: usize,
    len: usize,
}

impl BatchSchedule {
    pub fn new(seed: u64, layer: usize, size: usize, len: usize) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(layer as u64);
        Self { rng, size, len }
    }

    /// Sorted row indices of the next batch.
    pub fn next_batch(&mut self) -> Vec<usize> {
        if self.size >= self.len {
            return (0..self.len).collect();
        }
        let mut rows = sample(&mut self.rng, self.len, self.size).into_vec();
        rows.sort_unstable();
        rows
    }
}

/// What the last selected layer feeds forward, split per neuron.
struct LayerSignal {
    /// `B x N_h` activations of layer `h`.
    acts: Array2<f64>,
    /// `out x N_h` outgoing weights.
    outgoing: Array2<f64>,
}

impl LayerSignal {
    fn new(model: &DeepMLP, h: usize, inputs: ArrayView2<'_, f64>) -> Self {
        let z = model.layer_input(h, inputs);
        let layer = &model.hidden_layers()[h];
        let act = layer.activation;
        let acts = z.dot(&layer.weights.t()).mapv_into(|v| act.eval(v));
        Self {
            acts,
            outgoing: model.outgoing(h),
        }
    }

    /// `Σ_j counts_j · acts_j ⊗ out_j`, shape `B x out`.
    fn weighted(&self, counts: &[usize]) -> Array2<f64> {
        let c: Array1<f64> = counts.iter().map(|&c| c as f64).collect();
        (&self.acts * &c).dot(&self.outgoing.t())
    }

    fn single(&self, k: usize) -> Array2<f64> {
        let a = self.acts.column(k).insert_axis(Axis(1));
        let o = self.outgoing.column(k).insert_axis(Axis(0));
        a.dot(&o)
    }
}

fn check_layer(model: &DeepMLP, h: usize) -> Result<()> {
    if h >= model.hidden_layers().len() {
        return Err(Error::InvalidInput(format!(
            "layer {h} out of range (model has {} hidden layers)",
            model.hidden_layers().len()
        )));
    }
    Ok(())
}

/// Batch loss of the model with hidden layer `h` replaced by the average over
/// `S ∪ {k}`, for every candidate `k`.
pub fn score_candidates(model: &DeepMLP, h: usize, counts: &[usize], batch: &Dataset) -> Result<Vec<f64>> {
    check_layer(model, h)?;
    crate::error::ensure_dim("selection counts", model.widths()[h], counts.len())?;
    crate::error::ensure_dim("batch input", model.input_dim(), batch.dim())?;
    let signal = LayerSignal::new(model, h, batch.inputs().view());
    score_with(model, h, &signal, counts, batch.labels().view())
}

fn score_with(
    model: &DeepMLP,
    h: usize,
    signal: &LayerSignal,
    counts: &[usize],
    labels: ndarray::ArrayView1<'_, f64>,
) -> Result<Vec<f64>> {
    let base = signal.weighted(counts);
    let size = (counts.iter().sum::<usize>() + 1) as f64;
    (0..counts.len())
        .map(|k| {
            let avg = (&base + &signal.single(k)) / size;
            let preds = model.finish_from(h, avg);
            loss_mean(preds.view(), labels)
        })
        .collect()
}

fn loss_of_selection(
    model: &DeepMLP,
    h: usize,
    signal: &LayerSignal,
    counts: &[usize],
    labels: ndarray::ArrayView1<'_, f64>,
) -> Result<f64> {
    let size = counts.iter().sum::<usize>() as f64;
    let preds = model.finish_from(h, signal.weighted(counts) / size);
    loss_mean(preds.view(), labels)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LayerTraceEntry {
    pub iter: usize,
    pub chosen: usize,
    /// Score of the chosen neuron on this iteration's minibatch.
    pub loss_batch: f64,
    /// Full-data loss after adding it.
    pub loss_full: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LayerPruneReport {
    pub layer: usize,
    pub original_width: usize,
    /// Final multiset over the original neurons of the layer.
    pub counts: Vec<usize>,
    pub trace: Vec<LayerTraceEntry>,
    /// False when the neuron cap was hit before the gap closed.
    pub converged: bool,
}

impl LayerPruneReport {
    pub fn kept(&self) -> usize {
        self.counts.iter().filter(|&&c| c > 0).count()
    }

    pub fn choices(&self) -> Vec<usize> {
        self.trace.iter().map(|e| e.chosen).collect()
    }
}

/// Greedily selects a multiset for hidden layer `h` and replaces the layer
/// with it. `reference_loss` is the full-data loss of the original model.
pub fn prune_layer(
    model: &mut DeepMLP,
    dataset: &Dataset,
    h: usize,
    reference_loss: f64,
    config: &LayerPruneConfig,
) -> Result<LayerPruneReport> {
    check_layer(model, h)?;
    config.validate(dataset)?;
    crate::error::ensure_dim("dataset input", model.input_dim(), dataset.dim())?;
    let width = model.widths()[h];
    let cap = config.max_neurons.unwrap_or(width);
    let full = LayerSignal::new(model, h, dataset.inputs().view());
    let mut schedule = BatchSchedule::new(config.batch_seed, h, config.batch_size, dataset.len());
    let mut counts = vec![0usize; width];
    let mut trace = Vec::new();
    let mut converged = false;
    for iter in 1..=cap {
        let rows = schedule.next_batch();
        let scores = if rows.len() == dataset.len() {
            score_with(model, h, &full, &counts, dataset.labels().view())?
        } else {
            let signal = LayerSignal {
                acts: full.acts.select(Axis(0), &rows),
                outgoing: full.outgoing.clone(),
            };
            let labels = dataset.labels().select(Axis(0), &rows);
            score_with(model, h, &signal, &counts, labels.view())?
        };
        let chosen = argmin(scores.iter().copied()).expect("layer has neurons");
        counts[chosen] += 1;
        let loss_full = loss_of_selection(model, h, &full, &counts, dataset.labels().view())?;
        if !loss_full.is_finite() {
            return Err(Error::NonFinite("pruned layer loss"));
        }
        trace.push(LayerTraceEntry {
            iter,
            chosen,
            loss_batch: scores[chosen],
            loss_full,
        });
        if loss_full - reference_loss <= config.eps {
            converged = true;
            break;
        }
    }
    model.replace_layer(h, &counts)?;
    Ok(LayerPruneReport {
        layer: h,
        original_width: width,
        counts,
        trace,
        converged,
    })
}

#[derive(Clone, Debug)]
pub struct DeepPruneOutcome {
    pub model: DeepMLP,
    pub reports: Vec<LayerPruneReport>,
    /// Full-data loss of the unpruned model.
    pub reference_loss: f64,
}

impl DeepPruneOutcome {
    pub fn converged(&self) -> bool {
        self.reports.iter().all(|r| r.converged)
    }

    /// Per-layer trace as CSV with header `layer,iter,chosen,loss_batch,loss_full`.
    pub fn trace_csv(&self) -> String {
        let mut out = String::from("layer,iter,chosen,loss_batch,loss_full\n");
        for r in &self.reports {
            for e in &r.trace {
                out.push_str(&format!(
                    "{},{},{},{},{}\n",
                    r.layer, e.iter, e.chosen, e.loss_batch, e.loss_full
                ));
            }
        }
        out
    }

    pub fn save_trace(&self, path: impl AsRef<Path>) -> Result<()> {
        write_atomic(path.as_ref(), self.trace_csv().as_bytes())
    }
}

/// Prunes every hidden layer in input-to-output order, each against the
/// partially pruned model.
pub fn prune_all_layers(model: &DeepMLP, dataset: &Dataset, config: &LayerPruneConfig) -> Result<DeepPruneOutcome> {
    config.validate(dataset)?;
    let reference_loss = model.loss(dataset)?;
    let mut pruned = model.clone();
    let mut reports = Vec::with_capacity(model.hidden_layers().len());
    for h in 0..model.hidden_layers().len() {
        reports.push(prune_layer(&mut pruned, dataset, h, reference_loss, config)?);
    }
    Ok(DeepPruneOutcome {
        model: pruned,
        reports,
        reference_loss,
    })
}
