use std::fmt::Write as _;
use std::path::Path;
use std::process::{Command, Output};

fn embkit(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_embkit"))
        .args(args)
        .current_dir(dir)
        .env("RUST_LOG", "warn")
        .output()
        .unwrap()
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = embkit(dir, args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn json(dir: &Path, args: &[&str]) -> serde_json::Value {
    serde_json::from_str(&ok(dir, args)).unwrap()
}

fn write_corpus(dir: &Path) {
    let mut text = String::new();
    for i in 0..400 {
        let a = i % 7;
        writeln!(text, "alpha{a} beta{a} gamma{} delta the and of", (i * 3) % 5).unwrap();
    }
    std::fs::write(dir.join("corpus.txt"), text).unwrap();
}

fn train_small(dir: &Path) {
    write_corpus(dir);
    ok(
        dir,
        &[
            "-q", "train", "-input", "corpus.txt", "-output", "m", "-dim", "8", "-epoch", "2",
            "-minCount", "1", "-bucket", "5000", "-thread", "1",
        ],
    );
}

#[test]
fn version_and_help() {
    let dir = tempfile::tempdir().unwrap();
    assert!(embkit(dir.path(), &["--version"]).status.success());
    assert!(embkit(dir.path(), &["train", "--help"]).status.success());
}

#[test]
fn usage_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    write_corpus(dir.path());
    let out = embkit(
        dir.path(),
        &["train", "-input", "corpus.txt", "-output", "m", "-mode", "word2vec", "-minn", "2"],
    );
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("error: config:"));
    assert_eq!(embkit(dir.path(), &["train", "-bogus"]).status.code(), Some(2));
    assert_eq!(embkit(dir.path(), &["nosuchcommand"]).status.code(), Some(2));
}

#[test]
fn missing_input_is_a_runtime_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = embkit(dir.path(), &["train", "-input", "absent.txt", "-output", "m"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("error: io:"));

    // fails after the manifest is opened: nothing survives minCount
    write_corpus(dir.path());
    let out = embkit(dir.path(), &["train", "-input", "corpus.txt", "-output", "m", "-minCount", "100000"]);
    assert_eq!(out.status.code(), Some(1));
    let manifest: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("m.manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["status"], "failed");
}

#[test]
fn train_writes_vectors_checkpoint_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    train_small(d);
    let vec = std::fs::read_to_string(d.join("m.vec")).unwrap();
    let header: Vec<usize> = vec.lines().next().unwrap().split(' ').map(|x| x.parse().unwrap()).collect();
    assert_eq!(header[1], 8);
    assert_eq!(vec.lines().count(), header[0] + 1);
    assert!(d.join("m.bin").exists());

    let manifest: serde_json::Value =
        serde_json::from_slice(&std::fs::read(d.join("m.manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["status"], "ok");
    assert_eq!(manifest["subcommand"], "train");
    assert_eq!(manifest["outputs"].as_array().unwrap().len(), 2);
    assert_eq!(manifest["inputs"][0]["sha256"].as_str().unwrap().len(), 64);
}

#[test]
fn evaluators_run_on_trained_model() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    train_small(d);
    std::fs::write(
        d.join("q.txt"),
        ": capital-world\nalpha1 beta1 alpha2 beta2\nalpha3 beta3 unknownx beta4\n: gram8-plural\nalpha1 gamma1 alpha2 gamma2\n",
    )
    .unwrap();
    let r = json(d, &["--json", "eval-analogy", "--embeddings", "m.vec", "--questions", "q.txt"]);
    assert_eq!(r["total"]["attempted"], 2);
    assert_eq!(r["total"]["skipped_oov"], 1);
    assert_eq!(r["sections"].as_array().unwrap().len(), 2);

    // composing OOV words needs the checkpoint
    let r = json(
        d,
        &["--json", "eval-analogy", "--embeddings", "m.bin", "--questions", "q.txt", "--compose-oov"],
    );
    assert_eq!(r["total"]["attempted"], 3);
    let out = embkit(d, &["eval-analogy", "--embeddings", "m.vec", "--questions", "q.txt", "--compose-oov"]);
    assert_eq!(out.status.code(), Some(2));

    std::fs::write(d.join("p.tsv"), "w1\tw2\tscore\nalpha1\tbeta1\t9\nalpha1\tgamma2\t2\nbeta3\tdelta\t5\nthe\tzzz\t1\n").unwrap();
    let r = json(d, &["--json", "eval-wordsim", "--embeddings", "m.vec", "--pairs", "p.tsv"]);
    assert_eq!(r["used"], 3);
    assert_eq!(r["total"], 4);
    assert!(r["pearson"].as_f64().unwrap().abs() <= 1.0);

    let out = ok(d, &["nn", "--embeddings", "m.bin", "--word", "alpha1", "--k", "3"]);
    assert_eq!(out.lines().count(), 3);
    assert!(!out.contains("alpha1\t"));
}

#[test]
fn validate_set_reports_discrepancies() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(d.join("q.txt"), ": capital-world\na b c d\n").unwrap();
    let out = embkit(d, &["validate-set", "q.txt", "--reference", "swedish"]);
    assert_eq!(out.status.code(), Some(1));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("capital-world"), "{text}");
    assert!(text.contains("discrepancy"), "{text}");
}

#[test]
fn bootstrap_from_value_files() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(d.join("a.txt"), "# run scores\n0.81\n0.83\n0.80\n0.84\n0.82\n").unwrap();
    std::fs::write(d.join("b.txt"), "0.71\n0.70\n0.73\n0.69\n0.72\n").unwrap();
    let args = ["--json", "stats", "bootstrap", "--a", "a.txt", "--b", "b.txt", "--seed", "3"];
    let r = json(d, &args);
    assert_eq!(r["contains_zero"], false);
    assert!(r["interpretation"].as_str().unwrap().contains("unlikely due to chance"));
    assert_eq!(r["resamples"], 10000);
    assert_eq!(r, json(d, &args));

    std::fs::write(d.join("one.txt"), "0.5\n").unwrap();
    let out = embkit(d, &["stats", "bootstrap", "--a", "one.txt", "--b", "b.txt"]);
    assert_eq!(out.status.code(), Some(1));
    let out = embkit(d, &["stats", "bootstrap", "--a", "a.txt", "--b", "b.txt", "--alpha", "2"]);
    assert_eq!(out.status.code(), Some(2));
}

fn write_conll(path: &Path) {
    let lex = [("anna", "B-per"), ("berg", "I-per"), ("umeå", "B-geo"), ("och", "O"), ("bor", "O"), ("i", "O")];
    let mut text = String::from("-DOCSTART- O\n\n");
    for s in 0..40 {
        for t in 0..(3 + s % 5) {
            let (w, l) = lex[(s * 7 + t * 3) % lex.len()];
            writeln!(text, "{w} {l}").unwrap();
        }
        text.push('\n');
    }
    std::fs::write(path, text).unwrap();
}

#[test]
fn ner_train_eval_and_bootstrap_on_runs() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    write_conll(&d.join("ner.conll"));
    let common = [
        "--data", "ner.conll", "--layers", "1", "--heads", "2", "--model-dim", "8", "--ff-dim", "16",
        "--epochs", "2", "--batch-size", "8", "--seed", "4",
    ];
    let mut args = vec!["-q", "ner", "train", "--runs", "2", "--out", "out"];
    args.extend(common);
    ok(d, &args);
    for f in ["runs.json", "model.bin", "run-0.bin", "run-1.bin", "manifest.json"] {
        assert!(d.join("out").join(f).exists(), "{f}");
    }
    let runs: serde_json::Value =
        serde_json::from_slice(&std::fs::read(d.join("out/runs.json")).unwrap()).unwrap();
    assert_eq!(runs["runs"].as_array().unwrap().len(), 2);

    let m = json(d, &["--json", "-q", "ner", "eval", "--model", "out", "--data", "ner.conll"]);
    let f1 = m["f1"].as_f64().unwrap();
    assert!((0.0..=1.0).contains(&f1));

    let mut again = vec!["-q", "ner", "train", "--runs", "2", "--out", "out2"];
    again.extend(common);
    ok(d, &again);
    assert_eq!(
        std::fs::read(d.join("out/runs.json")).unwrap(),
        std::fs::read(d.join("out2/runs.json")).unwrap()
    );
    let r = json(
        d,
        &["--json", "stats", "bootstrap", "--a", "out/runs.json", "--b", "out2/runs.json", "--resamples", "500"],
    );
    assert_eq!(r["point_estimate"], 0.0);
}

#[test]
fn ner_search_logs_every_trial() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    write_conll(&d.join("ner.conll"));
    ok(
        d,
        &[
            "-q", "ner", "search", "--data", "ner.conll", "--model-dim", "8", "--ff-dim", "16",
            "--batch-size", "8", "--budget", "3", "--proxy-epochs", "1", "--out", "s",
        ],
    );
    let log = std::fs::read_to_string(d.join("s/trials.tsv")).unwrap();
    assert_eq!(log.lines().count(), 4);
    assert!(log.starts_with("trial\toptimizer\tlayers\theads"));
}
