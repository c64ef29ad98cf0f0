use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use increparse::conllu::{parse_conllu, write_conllu};
use increparse::synth::synthetic_treebank;
use increparse::{DepTree, Token};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_increparse"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = run(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn write_trees(dir: &Path, name: &str, trees: &[DepTree]) -> PathBuf {
    let path = dir.join(name);
    let mut buf = Vec::new();
    write_conllu(trees, &mut buf).unwrap();
    fs::write(&path, buf).unwrap();
    path
}

fn read_trees(path: &Path) -> Vec<DepTree> {
    parse_conllu(fs::read(path).unwrap().as_slice()).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn encode_decode_round_trip() {
    let dir = TempDir::new().unwrap();
    let trees = synthetic_treebank(8, 60);
    let gold = write_trees(dir.path(), "gold.conllu", &trees);
    for scheme in ["abs", "rel", "pos"] {
        let labels = dir.path().join(format!("{scheme}.tsv"));
        let back = dir.path().join(format!("{scheme}.conllu"));
        let out = run(&["encode", s(&gold), "--scheme", scheme, "--out", s(&labels)]);
        assert!(out.status.success());
        assert!(String::from_utf8_lossy(&out.stderr).contains("100.00% of arcs encoded"));
        ok(&["decode", s(&labels), "--scheme", scheme, "--out", s(&back)]);
        let decoded = read_trees(&back);
        assert_eq!(decoded.len(), trees.len());
        for (a, b) in trees.iter().zip(&decoded) {
            assert_eq!(a.tokens, b.tokens, "{scheme}");
        }
    }
}

#[test]
fn label_file_columns() {
    let dir = TempDir::new().unwrap();
    let tree = DepTree::new(vec![
        Token::new(1, "dogs", "NOUN", 2, "nsubj"),
        Token::new(2, "bark", "VERB", 0, "root"),
    ]);
    let gold = write_trees(dir.path(), "g.conllu", &[tree]);
    let text = ok(&["encode", s(&gold), "--scheme", "rel"]);
    assert_eq!(
        text,
        "sentence_id\ttoken_id\tform\tupos\tlabel\tdeprel\n\
         #1\t1\tdogs\tNOUN\t+1\tnsubj\n#1\t2\tbark\tVERB\t-2\troot\n"
    );
}

#[test]
fn exit_codes() {
    let dir = TempDir::new().unwrap();
    let gold = write_trees(dir.path(), "g.conllu", &synthetic_treebank(1, 5));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(
        run(&["encode", s(&gold), "--scheme", "xyz"]).status.code(),
        Some(1)
    );
    assert_eq!(run(&["encode", s(&gold)]).status.code(), Some(1));
    assert_eq!(
        run(&["encode", "/no/such/file", "--scheme", "abs"])
            .status
            .code(),
        Some(2)
    );
    let bad = dir.path().join("bad.conllu");
    fs::write(&bad, "1\ta\t_\tX\t_\t_\t1\tdep\t_\t_\n\n").unwrap();
    assert_eq!(run(&["stats", s(&bad)]).status.code(), Some(2));
    let labels = dir.path().join("bad.tsv");
    fs::write(&labels, "s1\t1\tdogs\tNOUN\n").unwrap();
    assert_eq!(
        run(&["decode", s(&labels), "--scheme", "abs"])
            .status
            .code(),
        Some(2)
    );
    fs::write(&labels, "s1\t1\tdogs\tNOUN\t+x\n").unwrap();
    assert_eq!(
        run(&["decode", s(&labels), "--scheme", "rel"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn skip_invalid_keeps_the_rest() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("mixed.conllu");
    fs::write(
        &path,
        "1\ta\t_\tX\t_\t_\t1\tdep\t_\t_\n\n1\tb\t_\tX\t_\t_\t0\troot\t_\t_\n\n",
    )
    .unwrap();
    let text = ok(&["stats", s(&path), "--skip-invalid"]);
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["n_sentences"], 1);
    assert_eq!(v["pct_right_arcs"], 100.0);
}

#[test]
fn train_parse_eval_verify() {
    let dir = TempDir::new().unwrap();
    let train = write_trees(dir.path(), "train.conllu", &synthetic_treebank(21, 200));
    let test = write_trees(dir.path(), "test.conllu", &synthetic_treebank(22, 40));
    for (scheme, k) in [("arc-eager", "1"), ("2p", "0"), ("pos", "2")] {
        let model = dir.path().join(format!("{scheme}.model"));
        let again = dir.path().join(format!("{scheme}.again"));
        let pred = dir.path().join(format!("{scheme}.conllu"));
        let traces = dir.path().join(format!("{scheme}.jsonl"));
        let curve = dir.path().join(format!("{scheme}.csv"));
        let common = [
            "--scheme", scheme, "--delay", k, "--epochs", "3", "--seed", "7",
        ];
        let mut args = vec!["train", s(&train)];
        args.extend(common);
        ok(&[args.as_slice(), &["--out", s(&model)]].concat());
        ok(&[args.as_slice(), &["--out", s(&again)]].concat());
        assert_eq!(
            fs::read(&model).unwrap(),
            fs::read(&again).unwrap(),
            "{scheme}"
        );

        ok(&[
            "parse",
            s(&test),
            "--model",
            s(&model),
            "--out",
            s(&pred),
            "--trace-out",
            s(&traces),
        ]);
        let parsed = read_trees(&pred);
        assert_eq!(parsed.len(), 40);
        let lines: Vec<serde_json::Value> = fs::read_to_string(&traces)
            .unwrap()
            .lines()
            .map(|l| serde_json::from_str(l).unwrap())
            .collect();
        assert_eq!(lines.len(), 40);
        assert_eq!(lines[0]["delay"].as_u64(), Some(k.parse().unwrap()));

        let metrics = ok(&["eval", s(&test), s(&pred), "--curve", s(&curve)]);
        let row: Vec<f64> = metrics
            .lines()
            .nth(1)
            .unwrap()
            .split('\t')
            .map(|x| x.parse().unwrap())
            .collect();
        assert!(row[1] <= row[0] && row[0] > 30.0, "{scheme}: {metrics}");
        let json: serde_json::Value =
            serde_json::from_str(&ok(&["eval", s(&test), s(&pred), "--json"])).unwrap();
        assert!((json["uas"].as_f64().unwrap() - row[0]).abs() < 0.01);
        assert_eq!(json["n_tokens"].as_f64(), Some(row[2]));
        assert!(fs::read_to_string(&curve)
            .unwrap()
            .starts_with("displacement,"));

        if scheme == "arc-eager" {
            let report = ok(&["verify", s(&test), "--model", s(&model)]);
            assert_eq!(
                report.lines().filter(|l| l.ends_with("true\ttrue")).count(),
                40
            );
            // a delay-1 parser checked against delay 0 breaches it
            let strict = run(&["verify", s(&test), "--model", s(&model), "--delay", "0"]);
            assert_eq!(strict.status.code(), Some(3));
        }
    }
}

#[test]
fn verify_gold_labels_and_oracle() {
    let dir = TempDir::new().unwrap();
    let test = write_trees(dir.path(), "t.conllu", &synthetic_treebank(5, 50));
    for scheme in ["abs", "rel", "pos", "1p", "2p", "arc-eager"] {
        for k in ["0", "1", "2"] {
            let out = run(&["verify", s(&test), "--scheme", scheme, "--delay", k]);
            assert_eq!(out.status.code(), Some(0), "{scheme} k={k}");
        }
    }
}

#[test]
fn parse_always_emits_valid_trees() {
    let dir = TempDir::new().unwrap();
    let train = write_trees(dir.path(), "train.conllu", &synthetic_treebank(31, 100));
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let junk: Vec<DepTree> = (0..80)
        .map(|_| {
            let n = rng.gen_range(1..25);
            let tokens = (1..=n)
                .map(|i| {
                    let len = rng.gen_range(1..8);
                    let form: String = (0..len).map(|_| rng.gen_range('!'..='~')).collect();
                    Token::new(i, form, "X", i - 1, "dep")
                })
                .collect();
            DepTree::new(tokens)
        })
        .collect();
    // only the forms matter, the parser ignores input heads
    let input = write_trees(dir.path(), "junk.conllu", &junk);
    for scheme in ["abs", "rel", "pos", "1p", "2p", "arc-eager"] {
        let model = dir.path().join(scheme);
        ok(&[
            "train",
            s(&train),
            "--scheme",
            scheme,
            "--delay",
            "1",
            "--epochs",
            "2",
            "--out",
            s(&model),
        ]);
        let out = dir.path().join(format!("{scheme}.out"));
        let status = run(&["parse", s(&input), "--model", s(&model), "--out", s(&out)]);
        assert!(status.status.success(), "{scheme}");
        let parsed = read_trees(&out);
        assert_eq!(parsed.len(), junk.len());
        for t in &parsed {
            assert!(t.validate().is_ok(), "{scheme}");
        }
    }
}
