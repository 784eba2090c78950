use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_rnng"));
    c.arg("--quiet");
    c
}

fn corpus() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/data/toy500.trees")
}

fn run(args: &[&str], dir: &Path) -> Output {
    let out = bin().args(args).current_dir(dir).output().unwrap();
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

/// Writes train/dev/test splits and a tiny model config into `dir`.
fn setup(dir: &Path) {
    let text = std::fs::read_to_string(corpus()).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    let write = |name: &str, range: std::ops::Range<usize>| {
        let body: String = lines[range].iter().map(|l| format!("{l}\n")).collect();
        std::fs::write(dir.join(name), body).unwrap();
    };
    write("train.trees", 0..60);
    write("dev.trees", 60..70);
    write("test.trees", 70..76);
    std::fs::write(dir.join("tiny.cfg"), "dim = 8\nlayers = 1\ndropout = 0\ncap = 20\n").unwrap();
}

fn train_all(dir: &Path) {
    for (cmd, out) in [("train-gen", "g.ckpt"), ("train-disc", "d.ckpt"), ("train-lm", "l.ckpt")] {
        run(
            &[cmd, "--train", "train.trees", "--dev", "dev.trees", "--out", out, "--config", "tiny.cfg", "--epochs", "1", "--log", &format!("{out}.log")],
            dir,
        );
    }
}

#[test]
fn oracle_round_trip_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    setup(dir.path());
    for mode in ["parse", "generate"] {
        run(&["oracle", "--mode", mode, "--in", "test.trees", "--out", "o.txt"], dir.path());
        let out = run(&["oracle", "--replay", "o.txt"], dir.path());
        assert_eq!(out.stdout, std::fs::read(dir.path().join("test.trees")).unwrap(), "{mode}");
    }
}

#[test]
fn usage_and_io_errors() {
    let out = bin().arg("no-such-command").output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let out = bin().args(["parse", "--bogus-flag"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let out = bin().args(["score", "--gold", "/nonexistent/gold", "--pred", "x"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("/nonexistent/gold"));
}

#[test]
fn help_lists_flags_with_defaults() {
    let subcommands = [
        ("preprocess", vec!["--in", "--out"]),
        ("oracle", vec!["--mode", "--in", "--replay", "--policy", "[default: berkeley]"]),
        ("train-gen", vec!["--train", "--dev", "--epochs", "[default: 10]", "--lr", "[default: 0.1]", "--precision", "[default: f32]"]),
        ("train-disc", vec!["--config", "--dropout", "--eval-every", "--patience"]),
        ("train-lm", vec!["--clusters", "--log"]),
        ("parse", vec!["--model", "--gen-model", "--samples", "[default: 100]", "--alpha", "[default: 0.8]"]),
        ("sample", vec!["--count", "--max-steps", "[default: 1000]"]),
        ("lm-eval", vec!["--proposal", "--samples", "--alpha", "[default: 1]"]),
        ("score", vec!["--gold", "--pred", "--tsv"]),
        ("stats", vec!["--train", "--dev", "--test"]),
    ];
    for (cmd, flags) in subcommands {
        let out = bin().args([cmd, "--help"]).output().unwrap();
        assert!(out.status.success());
        let help = String::from_utf8_lossy(&out.stdout);
        for f in flags.iter().chain(&["--seed", "--threads"]) {
            assert!(help.contains(f), "{cmd} --help lacks {f}:\n{help}");
        }
    }
}

#[test]
fn pipeline_runs_and_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    setup(d);
    train_all(d);
    let log = std::fs::read_to_string(d.join("g.ckpt.log")).unwrap();
    let fields: Vec<&str> = log.lines().next().unwrap().split(' ').collect();
    assert_eq!(fields.len(), 4, "{log}");
    assert_eq!(fields[..2], ["1", "60"]);

    let cases: Vec<Vec<&str>> = vec![
        vec!["parse", "--model", "d.ckpt", "--in", "test.trees"],
        vec!["parse", "--model", "d.ckpt", "--gen-model", "g.ckpt", "--samples", "10", "--in", "test.trees"],
        vec!["lm-eval", "--model", "g.ckpt", "--proposal", "d.ckpt", "--samples", "10", "--in", "test.trees"],
        vec!["lm-eval", "--model", "l.ckpt", "--in", "test.trees"],
        vec!["sample", "--model", "g.ckpt", "--count", "5", "--max-steps", "200"],
        vec!["sample", "--model", "d.ckpt", "--in", "test.trees", "--samples", "2"],
    ];
    for args in cases {
        let a = run(&[&["--seed", "7"], &args[..]].concat(), d).stdout;
        let b = run(&[&["--seed", "7"], &args[..]].concat(), d).stdout;
        assert_eq!(a, b, "{args:?} differs between runs");
        let c = run(&[&["--seed", "7", "--threads", "2"], &args[..]].concat(), d).stdout;
        assert_eq!(a, c, "{args:?} depends on the thread count");
        assert!(!a.is_empty());
    }

    let out = run(&["lm-eval", "--model", "g.ckpt", "--proposal", "d.ckpt", "--samples", "5", "--in", "test.trees"], d);
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 7);
    assert_eq!(lines[0].split(' ').count(), 4);
    assert!(lines[6].starts_with("# perplexity "));

    let out = run(&["parse", "--model", "d.ckpt", "--in", "test.trees", "--out", "pred.trees"], d);
    assert!(out.stdout.is_empty());
    let out = run(&["score", "--gold", "test.trees", "--pred", "pred.trees", "--tsv", "s.tsv"], d);
    let report = String::from_utf8(out.stdout).unwrap();
    assert!(report.starts_with("corpus"), "{report}");
    assert_eq!(std::fs::read_to_string(d.join("s.tsv")).unwrap().lines().count(), 7);
}

#[test]
fn preprocess_and_stats() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(
        d.join("raw.mrg"),
        "( (S (NP (DT The) (JJ hungry) (NN cat)) (VP (VBZ meows)) (. .)) )\n( (S (NP (DT The) (NN dog)) (VP (VBZ meows)) (. .)) )\n",
    )
    .unwrap();
    run(&["preprocess", "--in", "raw.mrg", "--out", "clean.trees"], d);
    assert_eq!(
        std::fs::read_to_string(d.join("clean.trees")).unwrap(),
        "(S (NP The hungry cat) (VP meows) .)\n(S (NP The dog) (VP meows) .)\n"
    );
    let out = run(&["stats", "--train", "clean.trees"], d);
    let table = String::from_utf8(out.stdout).unwrap();
    assert!(table.contains("Sequences") && table.contains("UNK-Types"), "{table}");
}

#[test]
fn bad_config_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    setup(d);
    std::fs::write(d.join("bad.cfg"), "dim = 8\nwidth = 3\n").unwrap();
    let out = bin()
        .args(["train-gen", "--train", "train.trees", "--dev", "dev.trees", "--out", "g.ckpt", "--config", "bad.cfg"])
        .current_dir(d)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));
}
