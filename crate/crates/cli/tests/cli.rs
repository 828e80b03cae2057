//! End-to-end tests of the `morphtok` binary: every subcommand, the exit
//! code contract, config merging, and the tokenize/detokenize identity on
//! whole files.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::{Command, Stdio};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_morphtok"))
}

struct Run {
    code: i32,
    stdout: String,
    stderr: String,
}

fn run_in(dir: &Path, args: &[&str]) -> Run {
    run_with_stdin(dir, args, "")
}

fn run_with_stdin(dir: &Path, args: &[&str], stdin_text: &str) -> Run {
    let mut child = bin()
        .current_dir(dir)
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .expect("spawn morphtok");
    child
        .stdin
        .as_mut()
        .unwrap()
        .write_all(stdin_text.as_bytes())
        .unwrap();
    let out = child.wait_with_output().expect("wait for morphtok");
    Run {
        code: out.status.code().expect("exit code"),
        stdout: String::from_utf8(out.stdout).expect("utf-8 stdout"),
        stderr: String::from_utf8(out.stderr).expect("utf-8 stderr"),
    }
}

fn expect_ok(run: &Run) {
    assert_eq!(run.code, 0, "stdout:\n{}\nstderr:\n{}", run.stdout, run.stderr);
}

const CORPUS: &str = "\
venlig hilsen til landshold og skoletaske
dagligdag med venlig energi og venlighed
skoletaske til skolegang, venlig dag
landshold og landskamp en dagligdag
venlighed smitter, skoletaske holder
lånte bøger til skolegang og dagligdag
venlig hilsen, lånte tasker, landskamp
";

const ANNOTATIONS: &str = "\
venlig\tSuffix\tven[Root] lig[Suff]
venlighed\tSuffix\tven[Root] lig[Suff] hed[Suff]
skoletaske\tCompound\tskole[Root] taske[Root]
landshold\tLinking\tland[Root] s[Link] hold[Root]
dagligdag\tCompound\tdag[Root] lig[Suff] dag[Root]
lånte\tInflection\tlån[Root] te[Infl]
";

/// Writes the shared fixture and trains model + bundle once per temp dir.
fn fixture(variant: &str) -> (tempfile::TempDir, PathBuf) {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path().to_path_buf();
    std::fs::write(root.join("corpus.txt"), CORPUS).unwrap();
    std::fs::write(root.join("gold.tsv"), ANNOTATIONS).unwrap();
    expect_ok(&run_in(
        &root,
        &[
            "train-morfessor",
            "--corpus",
            "corpus.txt",
            "--annotations",
            "gold.tsv",
            "--out",
            "seg.model",
            "--seed",
            "9",
        ],
    ));
    expect_ok(&run_in(
        &root,
        &[
            "build-tokenizer",
            "--corpus",
            "corpus.txt",
            "--model",
            "seg.model",
            "--variant",
            variant,
            "--vocab-size",
            "500",
            "--morph-ratio",
            "0.7",
            "--out",
            "bundle",
        ],
    ));
    (dir, root)
}

#[test]
fn tokenize_then_detokenize_is_identity_on_files() {
    let (_guard, root) = fixture("mixed");
    // Mixed content: fixture words, an empty line, punctuation, emoji,
    // literal marker, CRLF, and unseen script.
    let text = "venlig hilsen!\n\n  skoletaske 🙂 ▁mark\nπ≈3,14 og λ\ntail uden linjeskift";
    for (name, payload) in [
        ("plain.txt", String::from(text)),
        ("trailing.txt", format!("{text}\n")),
        ("crlf.txt", "linje et\r\nlinje to\r\n".to_string()),
    ] {
        std::fs::write(root.join(name), &payload).unwrap();
        expect_ok(&run_in(
            &root,
            &["tokenize", "--bundle", "bundle", "--input", name, "--output", "ids.txt"],
        ));
        expect_ok(&run_in(
            &root,
            &["detokenize", "--bundle", "bundle", "--input", "ids.txt", "--output", "back.txt"],
        ));
        let back = std::fs::read_to_string(root.join("back.txt")).unwrap();
        assert_eq!(back, payload, "file {name} failed to round trip");
    }
}

#[test]
fn sentinel_wrapping_keeps_the_round_trip() {
    let (_guard, root) = fixture("morph");
    std::fs::write(root.join("in.txt"), "venlig dag\nskoletaske\n").unwrap();
    expect_ok(&run_in(
        &root,
        &[
            "tokenize",
            "--bundle",
            "bundle",
            "--input",
            "in.txt",
            "--output",
            "ids.txt",
            "--add-sentinels",
        ],
    ));
    let ids = std::fs::read_to_string(root.join("ids.txt")).unwrap();
    for line in ids.lines() {
        assert!(line.starts_with("1 "), "line {line:?} lacks begin sentinel");
        assert!(line.ends_with(" 2"), "line {line:?} lacks end sentinel");
    }
    expect_ok(&run_in(
        &root,
        &["detokenize", "--bundle", "bundle", "--input", "ids.txt", "--output", "back.txt"],
    ));
    assert_eq!(
        std::fs::read_to_string(root.join("back.txt")).unwrap(),
        "venlig dag\nskoletaske\n"
    );
}

#[test]
fn empty_stdin_yields_empty_stdout() {
    let (_guard, root) = fixture("morph");
    for cmd in ["tokenize", "detokenize"] {
        let run = run_with_stdin(&root, &[cmd, "--bundle", "bundle"], "");
        expect_ok(&run);
        assert_eq!(run.stdout, "");
    }
}

#[test]
fn detokenize_rejects_bad_ids_with_line_numbers() {
    let (_guard, root) = fixture("morph");
    let run = run_with_stdin(&root, &["detokenize", "--bundle", "bundle"], "4 5\n4 oops\n");
    assert_eq!(run.code, 1);
    assert!(run.stderr.contains("line 2"), "stderr: {}", run.stderr);
    assert!(run.stderr.contains("oops"), "stderr: {}", run.stderr);

    let run = run_with_stdin(&root, &["detokenize", "--bundle", "bundle"], "999999\n");
    assert_eq!(run.code, 1);
    assert!(run.stderr.contains("line 1"), "stderr: {}", run.stderr);
    assert!(run.stderr.contains("999999"), "stderr: {}", run.stderr);
}

#[test]
fn missing_paths_and_bad_values_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();
    let missing_corpus = run_in(
        root,
        &["train-morfessor", "--corpus", "nope.txt", "--out", "m", "--seed", "1"],
    );
    assert_eq!(missing_corpus.code, 1);
    assert!(missing_corpus.stderr.contains("nope.txt"));

    std::fs::write(root.join("corpus.txt"), CORPUS).unwrap();
    let missing_seed = run_in(
        root,
        &["train-morfessor", "--corpus", "corpus.txt", "--out", "m"],
    );
    assert_eq!(missing_seed.code, 1);
    assert!(missing_seed.stderr.contains("--seed"), "stderr: {}", missing_seed.stderr);

    std::fs::write(root.join("bad.conf"), "vocab-size = twelve\n").unwrap();
    let bad_value = run_in(
        root,
        &[
            "train-bpe",
            "--config",
            "bad.conf",
            "--corpus",
            "corpus.txt",
            "--out",
            "merges",
        ],
    );
    assert_eq!(bad_value.code, 1);
    assert!(bad_value.stderr.contains("vocab-size"));

    std::fs::write(root.join("unknown.conf"), "vocabsize = 300\n").unwrap();
    let unknown_key = run_in(
        root,
        &["train-bpe", "--config", "unknown.conf", "--corpus", "corpus.txt", "--out", "merges"],
    );
    assert_eq!(unknown_key.code, 1);
    assert!(unknown_key.stderr.contains("unknown key"));

    // A bundle directory missing a required file is invalid configuration.
    std::fs::create_dir(root.join("halfbundle")).unwrap();
    std::fs::write(root.join("halfbundle/vocab.tsv"), "").unwrap();
    let broken_bundle = run_with_stdin(root, &["tokenize", "--bundle", "halfbundle"], "hej\n");
    assert_eq!(broken_bundle.code, 1);
    assert!(broken_bundle.stderr.contains("missing"), "stderr: {}", broken_bundle.stderr);
}

#[test]
fn unwritable_output_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();
    std::fs::write(root.join("corpus.txt"), CORPUS).unwrap();
    let run = run_in(
        root,
        &[
            "train-bpe",
            "--corpus",
            "corpus.txt",
            "--vocab-size",
            "300",
            "--out",
            "no/such/dir/merges",
        ],
    );
    assert_eq!(run.code, 2, "stderr: {}", run.stderr);
    assert!(run.stderr.contains("write"), "stderr: {}", run.stderr);
}

#[test]
fn help_succeeds_and_bad_usage_fails() {
    let dir = tempfile::tempdir().unwrap();
    let help = run_in(dir.path(), &["--help"]);
    assert_eq!(help.code, 0);
    assert!(help.stdout.contains("tokenize"));

    let bare = run_in(dir.path(), &[]);
    assert_eq!(bare.code, 1);

    let unknown = run_in(dir.path(), &["frobnicate"]);
    assert_eq!(unknown.code, 1);

    let unknown_flag = run_in(dir.path(), &["tokenize", "--frobnicate"]);
    assert_eq!(unknown_flag.code, 1);
}

#[test]
fn pinned_annotations_reach_perfect_f1() {
    let (_guard, root) = fixture("morph");
    let kv = run_in(
        &root,
        &["eval-seg", "--bundle", "bundle", "--annotations", "gold.tsv", "--format", "kv"],
    );
    expect_ok(&kv);
    assert!(kv.stdout.contains("f1=1.0000"), "stdout: {}", kv.stdout);
    assert!(kv.stdout.contains("exact-match=1.0000"), "stdout: {}", kv.stdout);
    assert!(kv.stdout.contains("category.Linking.f1=1.0000"));

    let table = run_in(
        &root,
        &["eval-seg", "--bundle", "bundle", "--annotations", "gold.tsv", "--out", "report.txt"],
    );
    expect_ok(&table);
    let report = std::fs::read_to_string(root.join("report.txt")).unwrap();
    assert!(report.contains("segmentation quality over 6 words"));
    assert!(report.contains("match: case-insensitive"));
    assert!(report.contains("f1           1.0000"));
}

#[test]
fn efficiency_report_is_consistent() {
    let (_guard, root) = fixture("mixed");
    let kv = run_in(
        &root,
        &[
            "eval-eff",
            "--bundle",
            "bundle",
            "--input",
            "corpus.txt",
            "--order",
            "1",
            "--smoothing-k",
            "0.5",
            "--format",
            "kv",
        ],
    );
    expect_ok(&kv);
    let get = |key: &str| -> f64 {
        kv.stdout
            .lines()
            .find_map(|l| l.strip_prefix(&format!("{key}=")))
            .unwrap_or_else(|| panic!("missing {key} in {}", kv.stdout))
            .parse()
            .unwrap()
    };
    assert_eq!(get("order"), 1.0);
    assert_eq!(get("train-lines"), 4.0);
    assert_eq!(get("eval-lines"), 3.0);
    let (tokens, characters) = (get("tokens"), get("characters"));
    let (bits, bpt, bpc) = (get("total-bits"), get("bpt"), get("bpc"));
    assert!(tokens > 0.0 && characters > 0.0 && bits > 0.0);
    // Rounded to 4 decimals, so compare loosely.
    assert!((bpt - bits / tokens).abs() < 1e-3);
    assert!((bpc - bits / characters).abs() < 1e-3);

    let table = run_in(
        &root,
        &["eval-eff", "--bundle", "bundle", "--input", "corpus.txt"],
    );
    expect_ok(&table);
    assert!(table.stdout.contains("encoding efficiency"));
    assert!(table.stdout.contains("language model order 2"));
}

#[test]
fn sweep_commands_emit_sorted_tab_rows() {
    let (_guard, root) = fixture("morph");
    std::fs::write(
        root.join("holdout.tsv"),
        "landskamp\tLinking\tland[Root] s[Link] kamp[Root]\nskolegang\tCompound\tskole[Root] gang[Root]\n",
    )
    .unwrap();
    let run = run_in(
        &root,
        &[
            "sweep",
            "--corpus",
            "corpus.txt",
            "--annotations",
            "gold.tsv",
            "--holdout",
            "holdout.tsv",
            "--ratios",
            "6, 0,3",
            "--seed",
            "5",
            "--out",
            "sweep.tsv",
        ],
    );
    expect_ok(&run);
    let table = std::fs::read_to_string(root.join("sweep.tsv")).unwrap();
    let rows: Vec<&str> = table.lines().collect();
    assert_eq!(rows.len(), 3);
    let budgets: Vec<&str> = rows
        .iter()
        .map(|r| r.split('\t').next().unwrap())
        .collect();
    assert_eq!(budgets, ["0", "3", "6"]);
    for row in rows {
        assert_eq!(row.split('\t').count(), 5, "row {row:?}");
    }
}

#[test]
fn config_file_drives_whole_pipeline_with_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();
    std::fs::write(root.join("corpus.txt"), CORPUS).unwrap();
    std::fs::write(root.join("gold.tsv"), ANNOTATIONS).unwrap();
    std::fs::write(
        root.join("pipeline.conf"),
        "# shared pipeline settings\n\
         corpus = corpus.txt\n\
         annotations = gold.tsv\n\
         model = seg.model\n\
         variant = mixed\n\
         vocab-size = 500\n\
         morph-ratio = 0.7\n\
         seed = 9\n",
    )
    .unwrap();
    expect_ok(&run_in(
        root,
        &["train-morfessor", "--config", "pipeline.conf", "--out", "seg.model"],
    ));
    let mixed = run_in(
        root,
        &["build-tokenizer", "--config", "pipeline.conf", "--out", "mixed-bundle"],
    );
    expect_ok(&mixed);
    assert!(mixed.stdout.contains("partition specials=4 morph="));
    assert!(root.join("mixed-bundle/bpe.merges").exists());

    // The flag wins over the config value: same settings, morph variant.
    let morph = run_in(
        root,
        &[
            "build-tokenizer",
            "--config",
            "pipeline.conf",
            "--variant",
            "morph",
            "--out",
            "morph-bundle",
        ],
    );
    expect_ok(&morph);
    assert!(morph.stdout.contains("bpe=0"));
    assert!(!root.join("morph-bundle/bpe.merges").exists());
}

#[test]
fn train_bpe_accepts_frequency_tables() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();
    std::fs::write(root.join("counts.tsv"), "12\tvenlig\n7\t dag\n3\t hilsen!\n").unwrap();
    let run = run_in(
        root,
        &[
            "train-bpe",
            "--corpus",
            "counts.tsv",
            "--corpus-format",
            "freq",
            "--vocab-size",
            "280",
            "--out",
            "bpe.merges",
        ],
    );
    expect_ok(&run);
    assert!(run.stdout.contains("vocab 280"));
    let merges = std::fs::read_to_string(root.join("bpe.merges")).unwrap();
    assert!(!merges.is_empty());
    for line in merges.lines() {
        assert_eq!(line.split(' ').count(), 2, "merge line {line:?}");
    }
}
