use std::path::{Path, PathBuf};

use anyhow::{bail, Result};
use greedy_subnet::deepprune::{prune_all_layers, LayerPruneConfig};
use greedy_subnet::geometry::{
    check_harmonic_bound, check_prop1_bound, check_step_recursion, check_w_bound, diameter, gamma_exact_2d,
    lstar_solve, polytope_stats, BoundCheck, CheckStatus,
};
use greedy_subnet::harness::{emit_plot, fit_loglog_slope, median, sweep_rate as run_sweep, Series, SweepConfig};
use greedy_subnet::io::write_atomic;
use greedy_subnet::model::{
    build_feature_instance, gen_toy_data, init_random_mlp, init_random_net_with, load_model, save_model, Activation,
    Dataset, DeepMLP, FeatureInstance, Model, TwoLayerNet,
};
use greedy_subnet::selection::{
    counterexample_instance, run_backward, run_forward, run_frank_wolfe, run_random_subset, PruneReport, StopRule,
};
use greedy_subnet::training::{
    gd_train, sgd_finetune, Batch, Convergence, Schedule, TrainConfig, TrainOutcome, Trainable,
};
use serde_json::json;

use crate::{
    fail, CounterexampleArgs, DeepPruneArgs, FinetuneArgs, FitArgs, GeometryArgs, MethodArg, PretrainArgs, PruneArgs,
    ScheduleArg, Status, SweepArgs,
};

/// Thresholds of the claims checked on the built-in instance.
const FORWARD_TARGET: f64 = 0.01;
const BACKWARD_FLOOR: f64 = 0.03;
const LSTAR_ZERO_TOL: f64 = 1e-8;
const MEMBERSHIP_TOL: f64 = 1e-8;
const LSTAR_TOL: f64 = 1e-12;

/// Resolves output paths against the output directory.
pub struct Out {
    dir: PathBuf,
}

impl Out {
    pub fn new(dir: PathBuf) -> Self {
        Self { dir }
    }

    /// `path` under the output directory (absolute paths pass through),
    /// creating missing parent directories.
    fn path(&self, path: &Path) -> Result<PathBuf> {
        let full = self.dir.join(path);
        if let Some(parent) = full.parent() {
            std::fs::create_dir_all(parent).map_err(|e| greedy_subnet::Error::Io {
                path: parent.to_path_buf(),
                source: e,
            })?;
        }
        Ok(full)
    }

    fn write(&self, path: &Path, text: &str) -> Result<PathBuf> {
        let full = self.path(path)?;
        write_atomic(&full, text.as_bytes())?;
        Ok(full)
    }
}

fn load_data(path: &Path) -> Result<Dataset> {
    Ok(Dataset::load_csv(path)?)
}

/// Feature instance from a feature-instance file, or from a two-layer network
/// and its dataset. Returns the network too when there is one.
fn load_instance(model: &Path, data: Option<&Path>) -> Result<(FeatureInstance, Option<(TwoLayerNet, Dataset)>)> {
    match load_model(model)? {
        Model::Features(inst) => Ok((inst, None)),
        Model::TwoLayer(net) => {
            let path = data.ok_or_else(|| fail(Status::Invalid, "a network model needs --data"))?;
            let data = load_data(path)?;
            Ok((build_feature_instance(&net, &data)?, Some((net, data))))
        }
        other => bail!(fail(
            Status::Invalid,
            format!(
                "expected a two-layer network or feature instance, found {}",
                other.kind()
            )
        )),
    }
}

fn train_config(step_size: f64, steps: usize, early_stop: bool) -> TrainConfig {
    TrainConfig {
        step_size,
        steps,
        batch: Batch::Full,
        schedule: Schedule::Constant,
        convergence: early_stop.then(Convergence::default),
    }
}

pub fn gen_data(out: &Out, seed: u64, data: &Path, teacher: &Path) -> Result<()> {
    let (dataset, net) = gen_toy_data(seed)?;
    let data_path = out.write(data, &dataset.to_csv_string())?;
    let teacher_path = out.path(teacher)?;
    save_model(&teacher_path, &Model::TwoLayer(net))?;
    println!("wrote {} and {}", data_path.display(), teacher_path.display());
    Ok(())
}

fn save_trace<M>(out: &Out, trace: Option<&Path>, outcome: &TrainOutcome<M>) -> Result<()> {
    if let Some(t) = trace {
        out.write(t, &outcome.trace.to_csv_string())?;
    }
    Ok(())
}

pub fn pretrain(out: &Out, args: PretrainArgs) -> Result<()> {
    let data = load_data(&args.data)?;
    let activation: Activation = args.activation.parse()?;
    let config = train_config(args.train.step_size, args.train.steps, !args.train.no_early_stop);
    let (model, initial, last, converged) = match &args.hidden {
        Some(widths) => {
            let init = init_random_mlp(data.dim(), widths, activation, args.seed)?;
            let outcome = gd_train(&init, &data, &config)?;
            save_trace(out, args.trace.as_deref(), &outcome)?;
            let initial = outcome.trace.initial().unwrap_or(f64::NAN);
            (
                Model::Deep(outcome.model.clone()),
                initial,
                outcome.final_loss(),
                outcome.converged,
            )
        }
        None => {
            let init = init_random_net_with(args.width, data.dim(), args.seed, activation)?;
            let outcome = gd_train(&init, &data, &config)?;
            save_trace(out, args.trace.as_deref(), &outcome)?;
            let initial = outcome.trace.initial().unwrap_or(f64::NAN);
            (
                Model::TwoLayer(outcome.model.clone()),
                initial,
                outcome.final_loss(),
                outcome.converged,
            )
        }
    };
    let path = out.path(&args.out)?;
    save_model(&path, &model)?;
    println!(
        "{}: loss {initial:.6e} -> {last:.6e} (converged: {converged})",
        path.display()
    );
    if args.require_convergence && !converged {
        bail!(fail(
            Status::NotConverged,
            format!("loss did not settle within {} steps", args.train.steps)
        ));
    }
    Ok(())
}

pub fn prune(out: &Out, args: PruneArgs) -> Result<()> {
    let (inst, network) = load_instance(&args.model, args.data.as_deref())?;
    let need_size = || {
        args.size
            .ok_or_else(|| fail(Status::Invalid, "this method needs --size"))
    };
    let report: PruneReport = match args.method {
        MethodArg::Forward => {
            let stop = match args.eps {
                Some(eps) => {
                    let reference = match &network {
                        Some((net, data)) => net.loss(data)?,
                        None => 0.0,
                    };
                    StopRule::eps_gap(eps, reference)
                }
                None => StopRule::MaxSize(need_size()?),
            };
            run_forward(&inst, stop)
        }
        MethodArg::Backward => run_backward(&inst),
        MethodArg::FrankWolfe => run_frank_wolfe(&inst, need_size()?),
        MethodArg::Random => run_random_subset(&inst, need_size()?, args.seed),
    };
    if args.eps.is_some() && args.method != MethodArg::Forward {
        log::warn!("--eps only applies to forward selection");
    }
    let trace = out.path(&args.trace)?;
    let meta = out.path(&args.meta)?;
    report.save(&trace, Some(&meta))?;
    println!(
        "{} on {}: size {} loss {:.6e} -> {:.6e}",
        report.method,
        report.fingerprint,
        report.counts.iter().sum::<usize>(),
        report.initial_loss(),
        report.final_loss()
    );
    if let Some(path) = &args.subnet {
        let (net, _) = network
            .as_ref()
            .ok_or_else(|| fail(Status::Invalid, "--subnet needs a network model"))?;
        save_model(out.path(path)?, &Model::TwoLayer(net.subnetwork(&report.counts)?))?;
    }
    if !report.meta.converged {
        bail!(fail(
            Status::NotConverged,
            "forward selection hit its step cap before reaching eps"
        ));
    }
    Ok(())
}

pub fn sweep_rate(out: &Out, args: SweepArgs) -> Result<()> {
    let mut config = match &args.config {
        Some(p) => SweepConfig::load(p)?,
        None => SweepConfig::default(),
    };
    if let Some(sizes) = args.sizes {
        config.sizes = sizes;
    }
    if let Some(seeds) = args.seeds {
        config.seeds = seeds;
    }
    config.validate()?;
    if args.expect_pruned.as_ref().is_some_and(|b| b.len() != 2) {
        bail!(fail(Status::Invalid, "--expect-pruned takes two values, `lo,hi`"));
    }
    out.write(Path::new("sweep_config.toml"), &config.to_toml())?;

    let mut fits = String::from("seed,pruned_slope,scratch_slope,source_loss,source_converged\n");
    let mut pruned_slopes = Vec::new();
    let mut scratch_slopes = Vec::new();
    let mut results = Vec::new();
    for &seed in &config.seeds {
        let result = run_sweep(seed, &config.sizes, &config)?;
        out.write(Path::new(&format!("rate_seed{seed}.csv")), &result.to_csv_string())?;
        let pruned = fit_loglog_slope(&result.pruned_points())?.slope;
        let scratch = fit_loglog_slope(&result.scratch_points())?.slope;
        println!(
            "seed {seed}: pruned slope {pruned:.3}, scratch slope {scratch:.3} ({:.1} s)",
            result.wall_time_secs
        );
        fits.push_str(&format!(
            "{seed},{pruned},{scratch},{},{}\n",
            result.source_loss, result.source_converged
        ));
        pruned_slopes.push(pruned);
        scratch_slopes.push(scratch);
        results.push(result);
    }
    out.write(Path::new("rate_fits.csv"), &fits)?;

    let median_curve = |pick: fn(&greedy_subnet::harness::SweepRow) -> f64| -> Vec<(f64, f64)> {
        (0..config.sizes.len())
            .map(|i| {
                let values: Vec<f64> = results.iter().map(|r| pick(&r.rows[i])).collect();
                (config.sizes[i] as f64, median(&values).expect("at least one seed"))
            })
            .collect()
    };
    let plot = out.path(&args.plot)?;
    emit_plot(
        &[
            Series::new("greedy forward (pruned)", median_curve(|r| r.pruned_loss)),
            Series::new("trained from scratch", median_curve(|r| r.scratch_loss)),
        ],
        &plot,
    )?;
    let pruned = median(&pruned_slopes).expect("at least one seed");
    let scratch = median(&scratch_slopes).expect("at least one seed");
    println!(
        "median slopes: pruned {pruned:.3}, scratch {scratch:.3}; plot {}",
        plot.display()
    );
    if let Some(band) = args.expect_pruned {
        let (lo, hi) = (band[0].min(band[1]), band[0].max(band[1]));
        if !(lo..=hi).contains(&pruned) {
            bail!(fail(
                Status::CheckFailed,
                format!("median pruned slope {pruned:.3} outside [{lo}, {hi}]")
            ));
        }
    }
    Ok(())
}

pub fn fit_slope(args: FitArgs) -> Result<()> {
    let mut reader =
        csv::Reader::from_path(&args.csv).map_err(|e| fail(Status::Io, format!("{}: {e}", args.csv.display())))?;
    let headers = reader
        .headers()
        .map_err(|e| fail(Status::Invalid, e.to_string()))?
        .clone();
    let n_col = headers.iter().position(|h| h == "n").unwrap_or(0);
    let loss_col = match &args.column {
        Some(name) => headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| fail(Status::Invalid, format!("no column `{name}` in {}", args.csv.display())))?,
        None => (0..headers.len())
            .find(|&i| i != n_col)
            .ok_or_else(|| fail(Status::Invalid, "CSV needs two columns"))?,
    };
    let mut points = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record.map_err(|e| fail(Status::Invalid, e.to_string()))?;
        let parse = |i: usize| -> Result<f64> {
            record
                .get(i)
                .and_then(|v| v.trim().parse().ok())
                .ok_or_else(|| fail(Status::Invalid, format!("row {}: bad number in column {i}", line + 1)))
        };
        points.push((parse(n_col)?, parse(loss_col)?));
    }
    let fit = fit_loglog_slope(&points)?;
    println!(
        "slope {:.6} intercept {:.6} r2 {:.6} points {}",
        fit.slope,
        fit.intercept,
        fit.r_squared,
        fit.points.len()
    );
    Ok(())
}

fn check_json(check: &BoundCheck) -> serde_json::Value {
    json!({
        "status": check.status,
        "worst_margin": check.worst_margin(),
        "first_failure": check.first_failure,
    })
}

pub fn check_geometry(out: &Out, args: GeometryArgs) -> Result<()> {
    let inst = match &args.model {
        Some(path) => load_instance(path, args.data.as_deref())?.0,
        None => counterexample_instance(),
    };
    let stats = polytope_stats(&inst, MEMBERSHIP_TOL, args.seed)?;
    let lstar = lstar_solve(&inst, LSTAR_TOL)?;
    let report = run_forward(&inst, StopRule::MaxSize(args.steps));
    let d = diameter(&inst);
    let mut checks = vec![
        ("closed-form", check_prop1_bound(&report, lstar.loss)?),
        ("step-recursion", check_step_recursion(&report, lstar.loss, d)?),
        ("harmonic", check_harmonic_bound(&report, lstar.loss, d)?),
    ];
    if inst.dim() == 2 {
        checks.push(("w-bound", check_w_bound(&report, gamma_exact_2d(&inst)?, d)?));
    }
    for (name, c) in &checks {
        let margin = c.worst_margin().map_or("-".to_string(), |m| format!("{m:.3e}"));
        println!("{name:>15}: {:?} (worst margin {margin})", c.status);
    }
    println!(
        "diameter {:.6} gamma {:.6} ({:?}) lstar {:.3e} (gap {:.1e}) member {}",
        stats.diameter, stats.gamma.value, stats.gamma.kind, lstar.loss, lstar.fw_gap, stats.member
    );
    let body = json!({
        "fingerprint": inst.fingerprint(),
        "stats": stats,
        "lstar": { "loss": lstar.loss, "fw_gap": lstar.fw_gap, "converged": lstar.converged },
        "steps": args.steps,
        "checks": checks.iter().map(|(n, c)| (n.to_string(), check_json(c))).collect::<serde_json::Map<_, _>>(),
    });
    out.write(&args.report, &format!("{}\n", serde_json::to_string_pretty(&body)?))?;
    let failed: Vec<&str> = checks
        .iter()
        .filter(|(_, c)| c.status == CheckStatus::Fail)
        .map(|(n, _)| *n)
        .collect();
    if !failed.is_empty() {
        bail!(fail(
            Status::CheckFailed,
            format!("bounds violated: {}", failed.join(", "))
        ));
    }
    Ok(())
}

pub fn counterexample(out: &Out, args: CounterexampleArgs) -> Result<()> {
    let inst = counterexample_instance();
    let forward = run_forward(&inst, StopRule::MaxSize(args.steps));
    let backward = run_backward(&inst);
    let lstar = lstar_solve(&inst, LSTAR_TOL)?.loss;
    if let Some(dir) = &args.trace_dir {
        forward.save(&out.path(&dir.join("forward.csv"))?, None)?;
        backward.save(&out.path(&dir.join("backward.csv"))?, None)?;
    }
    let reached = forward
        .trace
        .iter()
        .find(|e| e.vec_loss < FORWARD_TARGET)
        .map(|e| e.size);
    let (best_size, best) = backward
        .trace
        .iter()
        .map(|e| (e.size, e.vec_loss))
        .fold((0, f64::INFINITY), |a, b| if b.1 < a.1 { b } else { a });
    let claims = [
        (
            reached.is_some(),
            format!(
                "forward reaches loss < {FORWARD_TARGET} within {} steps (k = {})",
                args.steps,
                reached.map_or("none".into(), |k| k.to_string())
            ),
        ),
        (
            best > BACKWARD_FLOOR,
            format!("every backward stage keeps loss > {BACKWARD_FLOOR} (min {best:.6} at size {best_size})"),
        ),
        (
            lstar <= LSTAR_ZERO_TOL,
            format!("target lies in the hull (lstar {lstar:.2e})"),
        ),
    ];
    for (ok, text) in &claims {
        println!("[{}] {text}", if *ok { "PASS" } else { "FAIL" });
    }
    let failed = claims.iter().filter(|(ok, _)| !ok).count();
    if failed > 0 {
        bail!(fail(
            Status::CheckFailed,
            format!("{failed} of {} claims failed", claims.len())
        ));
    }
    Ok(())
}

fn load_deep(path: &Path) -> Result<DeepMLP> {
    match load_model(path)? {
        Model::Deep(m) => Ok(m),
        Model::TwoLayer(net) => Ok(DeepMLP::from_two_layer(&net)),
        other => bail!(fail(
            Status::Invalid,
            format!("expected a network, found {}", other.kind())
        )),
    }
}

pub fn deep_prune(out: &Out, args: DeepPruneArgs) -> Result<()> {
    let model = load_deep(&args.model)?;
    let data = load_data(&args.data)?;
    let reference = model.loss(&data)?;
    let config = LayerPruneConfig {
        eps: args.eps.unwrap_or(args.eps_factor * reference),
        batch_size: args.batch_size.unwrap_or(data.len()),
        batch_seed: args.seed,
        max_neurons: None,
    };
    let outcome = prune_all_layers(&model, &data, &config)?;
    outcome.save_trace(out.path(&args.trace)?)?;
    let path = out.path(&args.out)?;
    save_model(&path, &Model::Deep(outcome.model.clone()))?;
    let before = model.total_neurons();
    let after = outcome.model.total_neurons();
    println!(
        "{}: widths {:?} -> {:?}, {} of {before} neurons removed, loss {reference:.6e} -> {:.6e}",
        path.display(),
        model.widths(),
        outcome.model.widths(),
        before - after,
        outcome.model.loss(&data)?
    );
    if !outcome.converged() {
        bail!(fail(
            Status::NotConverged,
            "a layer reached its neuron cap before the loss gap closed"
        ));
    }
    Ok(())
}

fn finetune_model<M: Trainable>(model: &M, data: &Dataset, config: &TrainConfig) -> Result<TrainOutcome<M>> {
    Ok(sgd_finetune(model, data, config)?)
}

pub fn finetune(out: &Out, args: FinetuneArgs) -> Result<()> {
    let data = load_data(&args.data)?;
    let config = TrainConfig {
        step_size: args.step_size,
        steps: args.steps,
        batch: match args.batch_size {
            Some(size) => Batch::Minibatch { size, seed: args.seed },
            None => Batch::Full,
        },
        schedule: match args.schedule {
            ScheduleArg::Constant => Schedule::Constant,
            ScheduleArg::Cosine => Schedule::Cosine,
        },
        convergence: None,
    };
    let (model, initial, last) = match load_model(&args.model)? {
        Model::TwoLayer(net) => {
            let o = finetune_model(&net, &data, &config)?;
            save_trace(out, args.trace.as_deref(), &o)?;
            let best = o.model.loss(&data)?;
            (Model::TwoLayer(o.model), o.trace.initial().unwrap_or(f64::NAN), best)
        }
        Model::Deep(mlp) => {
            let o = finetune_model(&mlp, &data, &config)?;
            save_trace(out, args.trace.as_deref(), &o)?;
            let best = o.model.loss(&data)?;
            (Model::Deep(o.model), o.trace.initial().unwrap_or(f64::NAN), best)
        }
        other => bail!(fail(Status::Invalid, format!("cannot finetune a {}", other.kind()))),
    };
    let path = out.path(&args.out)?;
    save_model(&path, &model)?;
    println!("{}: loss {initial:.6e} -> {last:.6e}", path.display());
    Ok(())
}
