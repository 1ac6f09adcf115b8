use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use uca::dataset::Dataset;
use uca::domain::{value_of, PartialAssignment, ValueTable};
use uca::exact::{solve_exact, DEFAULT_NODE_BUDGET};
use uca::neural::MlpModel;

fn uca(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_uca"))
        .args(args)
        .current_dir(dir)
        .env("UCA_THREADS", "0")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[track_caller]
fn ok(o: Output) -> Output {
    assert_eq!(o.status.code(), Some(0), "stderr: {}", stderr(&o));
    o
}

const SMALL_PIPELINE: &str = "\
dist = trap
n = 7
m = 3
kappa = 3
pairs_per_level = 40
seed = 5
epochs = 4
lr_grid = 1e-3, 3e-3
batch_grid = 16
instances = 2
evals = 60
checkpoints = 10, 60
";

#[test]
fn stage_commands_chain() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(uca(d, &["generate", "--dist", "npd", "--n", "7", "--m", "3", "--seed", "4", "--out", "t.ucav"]));
    let table = ValueTable::load(d.join("t.ucav")).unwrap();
    assert_eq!((table.n(), table.m()), (7, 3));

    let out = stdout(&ok(uca(d, &["solve", "--table", "t.ucav"])));
    let fields: Vec<&str> = out.trim().split(',').collect();
    assert_eq!(fields.len(), 8);
    let (best, value) = solve_exact(&table, DEFAULT_NODE_BUDGET).unwrap();
    assert_eq!(fields[0].parse::<f64>().unwrap(), value);
    let labels: Vec<u8> = fields[1..].iter().map(|f| f.parse().unwrap()).collect();
    let printed = PartialAssignment::from_raw_labels(3, &labels).unwrap();
    assert_eq!(printed, best);
    assert_eq!(value_of(&printed, &table).unwrap(), value);

    ok(uca(d, &["label", "--table", "t.ucav", "--kappa", "3", "--pairs", "30", "--seed", "1", "--out", "d.ucad"]));
    let data = Dataset::load(d.join("d.ucad")).unwrap();
    assert_eq!(data.pairs.len(), 90);

    ok(uca(
        d,
        &["train", "--data", "d.ucad", "--out", "m.ucam", "--lr-grid", "1e-3,3e-3", "--batch-grid", "16", "--epochs", "3"],
    ));
    let model = MlpModel::load(d.join("m.ucam")).unwrap();
    assert_eq!((model.n(), model.m()), (7, 3));
    let trace = fs::read_to_string(d.join("training_trace.csv")).unwrap();
    assert!(trace.starts_with("epoch,train_loss,test_loss\n"));
    assert_eq!(trace.lines().count(), 1 + 4);

    for est in ["current", "random", "neural"] {
        let mut args = vec!["rollout", "--table", "t.ucav", "--estimator", est, "--evals", "50", "--checkpoints", "1,10,50", "--seed", "2"];
        if est == "neural" {
            args.extend(["--model", "m.ucam"]);
        }
        let out = stdout(&ok(uca(d, &args)));
        let lines: Vec<&str> = out.lines().collect();
        assert_eq!(lines[0], "checkpoint,best_value");
        assert_eq!(lines.len(), 4);
        let bests: Vec<f64> = lines[1..].iter().map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
        assert!(bests.windows(2).all(|w| w[0] <= w[1]));
        assert!(bests[2] <= value);
    }
}

#[test]
fn rollout_output_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(uca(d, &["generate", "--dist", "trap", "--n", "6", "--m", "3", "--seed", "4", "--out", "t.ucav"]));
    let args = ["rollout", "--table", "t.ucav", "--estimator", "random", "--evals", "100", "--seed", "9"];
    let a = stdout(&ok(uca(d, &args)));
    let b = stdout(&ok(uca(d, &args)));
    assert_eq!(a, b);
    assert!(a.lines().last().unwrap().starts_with("100,"));
}

#[test]
fn usage_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let cases: &[&[&str]] = &[
        &["solve", "--table", "x", "--unknown-flag"],
        &["generate", "--dist", "npd", "--n", "4", "--m", "2", "--seed", "1"],
        &["generate", "--dist", "npd", "--n", "4", "--m", "2", "--seed", "1", "--tau", "2", "--out", "t"],
        &["generate", "--dist", "trap", "--n", "4", "--m", "2", "--seed", "1", "--mu", "2", "--out", "t"],
        &["generate", "--dist", "npd", "--n", "31", "--m", "2", "--seed", "1", "--out", "t"],
        &["frobnicate"],
    ];
    for args in cases {
        assert_eq!(uca(d, args).status.code(), Some(2), "{args:?}");
    }
    ok(uca(d, &["generate", "--dist", "npd", "--n", "4", "--m", "2", "--seed", "1", "--out", "t.ucav"]));
    let o = uca(d, &["rollout", "--table", "t.ucav", "--estimator", "neural", "--evals", "5", "--seed", "1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("--model"));
}

#[test]
fn runtime_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let o = uca(d, &["solve", "--table", "missing.ucav"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("missing.ucav"));

    fs::write(d.join("junk.ucav"), b"not a table").unwrap();
    assert_eq!(uca(d, &["solve", "--table", "junk.ucav"]).status.code(), Some(1));

    ok(uca(d, &["generate", "--dist", "npd", "--n", "8", "--m", "3", "--seed", "1", "--out", "t.ucav"]));
    let o = uca(d, &["solve", "--table", "t.ucav", "--budget", "10"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("budget"));
}

#[test]
fn every_subcommand_has_help() {
    let dir = tempfile::tempdir().unwrap();
    for (cmd, flag) in [
        ("generate", "--dist"),
        ("solve", "--budget"),
        ("label", "--kappa"),
        ("train", "--lr-grid"),
        ("rollout", "--checkpoints"),
        ("bench", "--experiment"),
        ("pipeline", "--config"),
    ] {
        let o = ok(uca(dir.path(), &[cmd, "--help"]));
        assert!(stdout(&o).contains(flag), "{cmd}");
    }
}

#[test]
fn pipeline_writes_everything_and_reruns_identically() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::write(d.join("p.cfg"), SMALL_PIPELINE).unwrap();
    ok(uca(d, &["pipeline", "--config", "p.cfg", "--out-dir", "a"]));
    ok(uca(d, &["pipeline", "--config", "p.cfg", "--out-dir", "b"]));

    for i in 0..2 {
        for f in ["table.ucav", "dataset.ucad", "model.ucam", "training_trace.csv", "grid_search.csv"] {
            let rel = format!("instance_{i}/{f}");
            let a = fs::read(d.join("a").join(&rel)).unwrap();
            assert_eq!(a, fs::read(d.join("b").join(&rel)).unwrap(), "{rel}");
        }
    }
    let curves = fs::read_to_string(d.join("a/curves.csv")).unwrap();
    assert_eq!(curves, fs::read_to_string(d.join("b/curves.csv")).unwrap());
    assert!(curves.contains("estimator,checkpoint,mean,ci_low,ci_high"));
    assert_eq!(curves.lines().filter(|l| !l.starts_with('#')).count(), 1 + 3 * 2);
    assert!(d.join("a/curves.svg").exists());

    let hashes = |p: &str| -> Vec<String> {
        fs::read_to_string(d.join(p))
            .unwrap()
            .lines()
            .filter(|l| l.starts_with("sha256 "))
            .map(String::from)
            .collect()
    };
    let a = hashes("a/manifest.txt");
    assert_eq!(a.len(), 2 * 5 + 2);
    assert_eq!(a, hashes("b/manifest.txt"));
    let manifest = fs::read_to_string(d.join("a/manifest.txt")).unwrap();
    for key in ["master_seed = 5", "label_seed", "train_seed", "curves_seed", "selected_learning_rate", "[timings_ms]"] {
        assert!(manifest.contains(key), "{key}");
    }
}

#[test]
fn pipeline_config_errors_name_the_key() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    for key in ["dist", "n", "m", "kappa", "pairs_per_level", "seed"] {
        let cfg: String = SMALL_PIPELINE
            .lines()
            .filter(|l| l.split('=').next().unwrap().trim() != key)
            .map(|l| format!("{l}\n"))
            .collect();
        fs::write(d.join("p.cfg"), cfg).unwrap();
        let o = uca(d, &["pipeline", "--config", "p.cfg", "--out-dir", "x"]);
        assert_eq!(o.status.code(), Some(2), "{key}");
        assert!(stderr(&o).contains(&format!("`{key}`")), "{key}: {}", stderr(&o));
    }
    fs::write(d.join("p.cfg"), format!("{SMALL_PIPELINE}typo_key = 1\n")).unwrap();
    let o = uca(d, &["pipeline", "--config", "p.cfg", "--out-dir", "x"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("typo_key"));

    let o = uca(d, &["pipeline", "--config", "absent.cfg"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn pipeline_stage_failure_names_the_stage() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::write(d.join("p.cfg"), format!("{SMALL_PIPELINE}label_budget = 5\n")).unwrap();
    let o = uca(d, &["pipeline", "--config", "p.cfg", "--out-dir", "x"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("stage instance_0/label"), "{}", stderr(&o));
    // the generate stage's output is kept
    assert!(d.join("x/instance_0/table.ucav").exists());
}

#[test]
fn bench_experiments_write_reports() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::write(
        d.join("b.cfg"),
        "dist = trap\nn = 8\nm = 3\nseed = 3\nsamples = 20000\nbins = 25\n\
         kappa = 2\npairs_per_level = 30\nepochs = 3\nlr_grid = 1e-3\nbatch_grid = 16\n\
         levels = 1,2,3\nsamples_per_level = 10\ninstances = 2\nevals = 30\n",
    )
    .unwrap();
    let expected: &[(&str, &[&str])] = &[
        ("probability", &["probability.csv"]),
        ("histogram", &["histogram.csv", "histogram.svg"]),
        (
            "prediction",
            &["prediction_error.csv", "prediction_scatter.csv", "prediction_error.svg", "prediction_scatter.svg"],
        ),
        ("curves", &["curves.csv", "curves.svg"]),
    ];
    for (exp, files) in expected {
        ok(uca(d, &["bench", "--experiment", exp, "--config", "b.cfg", "--out-dir", exp]));
        for f in *files {
            let text = fs::read_to_string(d.join(exp).join(f)).unwrap();
            if f.ends_with(".svg") {
                assert!(text.starts_with("<svg"), "{f}");
            }
        }
    }
    let hist = fs::read_to_string(d.join("histogram/histogram.csv")).unwrap();
    assert!(hist.starts_with("bin_low,bin_high,count\n"));
    let total: u64 = hist.lines().skip(1).map(|l| l.rsplit(',').next().unwrap().parse::<u64>().unwrap()).sum();
    assert_eq!(total, 20000);
    let pred = fs::read_to_string(d.join("prediction/prediction_error.csv")).unwrap();
    assert!(pred.starts_with("k,mean_error,std_error,n_samples\n"));
    assert_eq!(pred.lines().count(), 4);
    let scatter = fs::read_to_string(d.join("prediction/prediction_scatter.csv")).unwrap();
    assert!(scatter.starts_with("true_value,predicted_value\n"));

    fs::write(d.join("bad.cfg"), "dist = trap\nn = 8\nm = 3\nseed = 1\nwhat = 2\n").unwrap();
    let o = uca(d, &["bench", "--experiment", "probability", "--config", "bad.cfg"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("`what`"));
}
