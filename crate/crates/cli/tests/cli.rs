use std::path::Path;
use std::process::{Command, Output};

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_greedy-subnet"))
        .args(args)
        .env("GREEDY_SUBNET_OUT", dir)
        .env_remove("RUST_LOG")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn read(path: impl AsRef<Path>) -> String {
    std::fs::read_to_string(path).unwrap()
}

#[test]
fn gen_data_is_reproducible() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for d in [&a, &b] {
        assert!(run(d.path(), &["gen-data", "--seed", "7"]).status.success());
    }
    assert_eq!(read(a.path().join("data.csv")), read(b.path().join("data.csv")));
    assert_eq!(read(a.path().join("teacher.json")), read(b.path().join("teacher.json")));
    run(b.path(), &["gen-data", "--seed", "8"]);
    assert_ne!(read(a.path().join("data.csv")), read(b.path().join("data.csv")));
}

#[test]
fn counterexample_reports_each_claim() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["counterexample", "--trace-dir", "traces"]);
    let text = stdout(&o);
    assert!(text.contains("[PASS] forward reaches loss < 0.01"), "{text}");
    assert!(text.contains("[PASS] target lies in the hull"), "{text}");
    // The backward stage at size 4 reaches 0.028864, below the claimed floor.
    assert!(
        text.contains("[FAIL] every backward stage keeps loss > 0.03 (min 0.028864 at size 4)"),
        "{text}"
    );
    assert_eq!(o.status.code(), Some(1));
    assert!(read(dir.path().join("traces/forward.csv")).starts_with("size,chosen_index,vec_loss\n"));
}

#[test]
fn fit_slope_on_exact_inverse_square() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("points.csv");
    let body: String = [1.0f64, 2.0, 4.0, 8.0, 16.0]
        .iter()
        .map(|n| format!("{n},{}\n", 3.0 / (n * n)))
        .collect();
    std::fs::write(&csv, format!("n,loss\n{body}")).unwrap();
    let o = run(dir.path(), &["fit-slope", csv.to_str().unwrap()]);
    assert!(o.status.success());
    let text = stdout(&o);
    let slope: f64 = text.split_whitespace().nth(1).unwrap().parse().unwrap();
    assert!((slope + 2.0).abs() < 1e-9, "{text}");
    assert!(text.contains("r2 1.000000"), "{text}");

    std::fs::write(&csv, "n,loss\n1,1\n2,0\n").unwrap();
    assert_eq!(
        run(dir.path(), &["fit-slope", csv.to_str().unwrap()]).status.code(),
        Some(4)
    );
    assert_eq!(run(dir.path(), &["fit-slope", "missing.csv"]).status.code(), Some(3));
}

#[test]
fn pretrain_prune_and_finetune_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    assert!(run(p, &["gen-data", "--seed", "1"]).status.success());
    let data = p.join("data.csv");
    let data = data.to_str().unwrap();
    let o = run(
        p,
        &[
            "pretrain",
            "--data",
            data,
            "--width",
            "40",
            "--step-size",
            "0.5",
            "--steps",
            "50",
            "--no-early-stop",
            "--trace",
            "loss.csv",
        ],
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(read(p.join("loss.csv")).lines().count(), 52);

    let model = p.join("model.json");
    let model = model.to_str().unwrap();
    let o = run(
        p,
        &[
            "prune", "--model", model, "--data", data, "--size", "10", "--subnet", "sub.json",
        ],
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let first = read(p.join("prune_trace.csv"));
    assert_eq!(first.lines().count(), 12);
    assert!(read(p.join("prune_meta.json")).contains("\"method\": \"forward\""));
    run(p, &["prune", "--model", model, "--data", data, "--size", "10"]);
    assert_eq!(read(p.join("prune_trace.csv")), first);

    let o = run(
        p,
        &[
            "prune", "--model", model, "--data", data, "--method", "backward", "--trace", "back.csv",
        ],
    );
    assert!(o.status.success());
    assert_eq!(read(p.join("back.csv")).lines().count(), 41);
    assert_eq!(
        run(p, &["prune", "--model", model, "--data", data, "--method", "random"])
            .status
            .code(),
        Some(4)
    );
    assert_eq!(
        run(p, &["prune", "--model", model, "--size", "3"]).status.code(),
        Some(4)
    );

    let sub = p.join("sub.json");
    let o = run(
        p,
        &[
            "finetune",
            "--model",
            sub.to_str().unwrap(),
            "--data",
            data,
            "--steps",
            "50",
            "--batch-size",
            "20",
            "--trace",
            "ft.csv",
        ],
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(p.join("finetuned.json").exists());
}

#[test]
fn unreachable_eps_exits_not_converged() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    run(p, &["gen-data"]);
    let data = p.join("data.csv");
    run(
        p,
        &[
            "pretrain",
            "--data",
            data.to_str().unwrap(),
            "--width",
            "5",
            "--steps",
            "0",
        ],
    );
    let o = run(
        p,
        &[
            "prune",
            "--model",
            p.join("model.json").to_str().unwrap(),
            "--data",
            data.to_str().unwrap(),
            "--eps=-1e9",
        ],
    );
    assert_eq!(o.status.code(), Some(5), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn require_convergence_fails_on_short_budget() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    run(p, &["gen-data"]);
    let data = p.join("data.csv");
    let o = run(
        p,
        &[
            "pretrain",
            "--data",
            data.to_str().unwrap(),
            "--width",
            "5",
            "--steps",
            "3",
            "--require-convergence",
        ],
    );
    assert_eq!(o.status.code(), Some(5));
}

#[test]
fn diverging_training_exits_six() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    run(p, &["gen-data"]);
    let data = p.join("data.csv");
    let o = run(
        p,
        &[
            "pretrain",
            "--data",
            data.to_str().unwrap(),
            "--width",
            "20",
            "--activation",
            "relu",
            "--step-size",
            "1e4",
            "--steps",
            "200",
        ],
    );
    assert_eq!(o.status.code(), Some(6), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn deep_prune_on_a_pretrained_mlp() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    run(p, &["gen-data", "--seed", "3"]);
    let data = p.join("data.csv");
    let data = data.to_str().unwrap();
    let o = run(
        p,
        &[
            "pretrain",
            "--data",
            data,
            "--hidden",
            "10,10",
            "--step-size",
            "0.2",
            "--steps",
            "200",
            "--out",
            "mlp.json",
        ],
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let o = run(
        p,
        &[
            "deep-prune",
            "--model",
            p.join("mlp.json").to_str().unwrap(),
            "--data",
            data,
            "--eps-factor",
            "0.2",
            "--batch-size",
            "50",
            "--seed",
            "2",
        ],
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let trace = read(p.join("deep_prune_trace.csv"));
    assert!(trace.starts_with("layer,iter,chosen,loss_batch,loss_full\n"));
    assert!(read(p.join("pruned.json")).contains("deep-mlp"));
}

#[test]
fn check_geometry_flags_the_closed_form_failure() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["check-geometry", "--steps", "30"]);
    let text = stdout(&o);
    assert!(text.contains("step-recursion: Pass"), "{text}");
    assert!(text.contains("harmonic: Pass"), "{text}");
    assert!(text.contains("w-bound:"), "{text}");
    let report = read(dir.path().join("geometry.json"));
    assert!(report.contains("\"closed-form\""));
    let closed_failed = text.contains("closed-form: Fail");
    assert_eq!(o.status.code(), Some(if closed_failed { 1 } else { 0 }));
}

#[test]
fn small_sweep_writes_csv_fits_and_plot() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    let cfg = p.join("sweep.toml");
    std::fs::write(
        &cfg,
        "sizes = [2, 4, 8]\nseeds = [0]\nsource_width = 30\n[source_train]\nstep_size = 0.5\nsteps = 40\n[scratch_train]\nstep_size = 0.5\nsteps = 40\n",
    )
    .unwrap();
    let o = run(p, &["sweep-rate", "--config", cfg.to_str().unwrap(), "--seeds", "0,1"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = read(p.join("rate_seed1.csv"));
    assert_eq!(csv.lines().count(), 4);
    assert!(read(p.join("rate_fits.csv")).lines().count() == 3);
    assert!(read(p.join("rate_plot.svg")).starts_with("<svg"));
    run(p, &["sweep-rate", "--config", cfg.to_str().unwrap(), "--seeds", "0,1"]);
    assert_eq!(read(p.join("rate_seed1.csv")), csv);
    let o = run(
        p,
        &[
            "sweep-rate",
            "--config",
            cfg.to_str().unwrap(),
            "--expect-pruned",
            "5,6",
        ],
    );
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(run(p, &["sweep-rate", "--sizes", "2000"]).status.code(), Some(4));
}

#[test]
fn bad_flags_use_clap_status() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run(dir.path(), &["prune", "--bogus"]).status.code(), Some(2));
    assert!(stdout(&run(dir.path(), &["--help"])).contains("sweep-rate"));
}
