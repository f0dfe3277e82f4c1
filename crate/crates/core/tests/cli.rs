mod common;

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use common::data;
use ontalign::embed::{hash_embed, normalize_label, tokenize, EmbeddingStore, Fallback};
use ontalign::model::{Checkpoint, ModelParams};
use ontalign::onto_io::parse_reference_alignment;

fn ontalign(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ontalign"))
        .current_dir(dir)
        .args(args)
        .output()
        .unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

/// Toy run configuration at a small size, with extra `key = value` lines.
fn write_config(dir: &Path, extra: &str) -> String {
    let text = format!(
        "source = {}\ntarget = {}\nreference = {}\ndim = 32\nout_dim = 16\nepochs = 4\nk = 5\ngranularity = concept_pair\n{extra}",
        data("toy.owl").display(),
        data("toy_copy.owl").display(),
        data("toy-copy.rdf").display(),
    );
    let path = dir.join("run.conf");
    fs::write(&path, text).unwrap();
    path.display().to_string()
}

#[test]
fn train_is_deterministic_and_self_alignment_finds_every_concept() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let conf = write_config(d, "fallback_hash_embed = true\n");
    for name in ["a.txt", "b.txt"] {
        let out = ontalign(d, &["train", "--config", &conf, "--seed", "0", "--checkpoint", name]);
        assert_eq!(code(&out), 0, "{}", stderr(&out));
        assert!(stderr(&out).contains("learning_rate = 0.001"));
    }
    assert_eq!(fs::read(d.join("a.txt")).unwrap(), fs::read(d.join("b.txt")).unwrap());
    let log = fs::read_to_string(d.join("loss.csv")).unwrap();
    assert_eq!(log.lines().count(), 5);

    let toy = data("toy.owl").display().to_string();
    let out = ontalign(
        d,
        &["align", "--config", &conf, "--source", &toy, "--target", &toy, "--checkpoint", "a.txt", "--output", "self.rdf"],
    );
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let cells = parse_reference_alignment(&fs::read(d.join("self.rdf")).unwrap()).unwrap().cells;
    let concepts = common::read_ontology("toy.owl").concepts().clone();
    assert_eq!(concepts.len(), 20);
    for c in &concepts {
        assert!(cells.iter().any(|x| x.entity1 == c.0 && x.entity2 == c.0), "{c}");
    }

    let out = ontalign(
        d,
        &[
            "align", "--config", &conf, "--source", &toy, "--target", &toy, "--checkpoint", "a.txt", "--output",
            "none.rdf", "--threshold", "1.0",
        ],
    );
    assert_eq!(code(&out), 0);
    assert!(parse_reference_alignment(&fs::read(d.join("none.rdf")).unwrap()).unwrap().cells.is_empty());
}

#[test]
fn zero_epochs_checkpoint_is_the_initialization() {
    let dir = tempfile::tempdir().unwrap();
    let conf = write_config(dir.path(), "fallback_hash_embed = true\nepochs = 0\nseed = 4\n");
    let out = ontalign(dir.path(), &["train", "--config", &conf]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let ckpt = Checkpoint::from_text(&fs::read_to_string(dir.path().join("checkpoint.txt")).unwrap()).unwrap();
    assert_eq!(ckpt.params, ModelParams::init(ckpt.params.config, 4));
}

#[test]
fn evaluate_writes_fold_and_ablation_reports() {
    let dir = tempfile::tempdir().unwrap();
    let conf = write_config(dir.path(), "");
    let out = ontalign(dir.path(), &["evaluate", "--config", &conf, "--fallback-hash-embed"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let report = fs::read_to_string(dir.path().join("report.csv")).unwrap();
    let lines: Vec<&str> = report.lines().collect();
    assert_eq!(lines[0], "fold,theta_concept,theta_property,tp,fp,fn,precision,recall,f1");
    assert_eq!(lines.len(), 1 + 5 + 2);
    assert!(lines[6].starts_with("micro,"));
    assert!(lines[7].starts_with("macro,"));

    let out = ontalign(
        dir.path(),
        &["evaluate", "--config", &conf, "--fallback-hash-embed", "--ablation", "--report", "ablation.csv"],
    );
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let rows = fs::read_to_string(dir.path().join("ablation.csv")).unwrap();
    let modes: Vec<&str> = rows.lines().skip(1).map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(
        modes,
        ["no_context", "single_attention", "full", "ancestors", "children", "object", "data"]
    );
}

#[test]
fn runtime_failures_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let conf = write_config(dir.path(), "");
    let out = ontalign(dir.path(), &["train", "--config", &conf]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("no embedding for label `Abstract`"), "{}", stderr(&out));

    let out = ontalign(
        dir.path(),
        &["evaluate", "--config", &conf, "--fallback-hash-embed", "--set", "k=1000"],
    );
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("exceeds"));
}

#[test]
fn usage_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let bad = write_config(d, "epochz = 3\n");
    assert_eq!(code(&ontalign(d, &["train", "--config", &bad])), 2);

    let conf = write_config(d, "fallback_hash_embed = true\n");
    let toy = data("toy.owl").display().to_string();
    assert_eq!(code(&ontalign(d, &["train", "--config", "missing.conf"])), 2);
    assert_eq!(code(&ontalign(d, &["train", "--bogus-flag"])), 2);
    assert_eq!(code(&ontalign(d, &["evaluate", "--set", "epochs"])), 2);

    let out = ontalign(d, &["train", "--config", &conf, "--set", "source=nowhere.owl"]);
    assert_eq!(code(&out), 2, "{}", stderr(&out));

    let out = ontalign(
        d,
        &["align", "--config", &conf, "--source", &toy, "--target", &toy, "--checkpoint", "absent.txt"],
    );
    assert_eq!(code(&out), 2);
    fs::write(d.join("garbage.txt"), "not a checkpoint\n").unwrap();
    let out = ontalign(
        d,
        &["align", "--config", &conf, "--source", &toy, "--target", &toy, "--checkpoint", "garbage.txt"],
    );
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("unreadable checkpoint"));
}

#[test]
fn embedding_file_is_used_and_checked() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let toy = common::read_ontology("toy.owl");
    let mut store = EmbeddingStore::new(32, Fallback::Fail);
    for c in toy.concepts() {
        let label = toy.concept_label(c).unwrap();
        store.insert(label, hash_embed(&tokenize(label), 32, 7)).unwrap();
    }
    for p in toy.properties() {
        let label = &p.label;
        store.insert(label, hash_embed(&tokenize(label), 32, 7)).unwrap();
    }
    assert!(store.lookup(&normalize_label("Poster")).is_ok());
    let mut file = Vec::new();
    store.save(&mut file).unwrap();
    fs::write(d.join("emb.txt"), &file).unwrap();

    let conf = write_config(d, "embeddings = emb.txt\nepochs = 1\n");
    let out = ontalign(d, &["train", "--config", &conf]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));

    let conf = write_config(d, "embeddings = emb.txt\ndim = 16\n");
    let out = ontalign(d, &["train", "--config", &conf]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("dimension 32"));
}

#[test]
fn inspect_context_prints_facets() {
    let dir = tempfile::tempdir().unwrap();
    let toy = data("toy.owl").display().to_string();
    let out = ontalign(dir.path(), &["inspect-context", "--ontology", &toy, "--concept", "Person"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("concept: Person (http://example.org/toy#Person)"));
    assert!(text.contains("children: 4"));
    assert!(text.contains("data neighbors: 1"));
    let out = ontalign(dir.path(), &["inspect-context", "--ontology", &toy, "--concept", "Nothing"]);
    assert_eq!(code(&out), 2);
}
