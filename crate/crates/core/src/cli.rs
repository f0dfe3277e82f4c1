//! Command-line front end: `train`, `evaluate`, `align` and
//! `inspect-context`.
//!
//! Configuration comes from a flat `key = value` file (`--config`), then
//! `--set key=value` overrides and dedicated flags, later sources winning.
//! Exit codes: 0 on success, 1 on runtime failure, 2 on usage or
//! configuration errors (including missing input files and unreadable
//! checkpoints).

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context as _};
use clap::{Args, Parser, Subcommand};

use crate::context::{build_context, ContextConfig};
use crate::embed::{EmbeddingStore, Fallback};
use crate::eval::{
    ablation_sweep, ablation_table, align_ontologies, fit_bundle, report_table, run_experiment, write_ablation_csv,
    write_report_csv, Bundle, BundlePair, ExperimentConfig, Granularity, NamedOntology,
};
use crate::model::{Ablation, Checkpoint, FacetMask, ModelConfig, Pooling};
use crate::onto_io::{
    entity_label, iri_fragment, parse_ontology, parse_reference_alignment, write_alignment, ConceptId, Ontology,
};
use crate::train::TrainConfig;

/// A failure tagged with the exit code it maps to.
#[derive(Debug)]
pub enum Failure {
    Usage(anyhow::Error),
    Runtime(anyhow::Error),
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Runtime(_) => 1,
        }
    }

    fn error(&self) -> &anyhow::Error {
        match self {
            Failure::Usage(e) | Failure::Runtime(e) => e,
        }
    }
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Runtime(e)
    }
}

impl From<crate::Error> for Failure {
    fn from(e: crate::Error) -> Self {
        Failure::Runtime(e.into())
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

trait UsageExt<T> {
    fn usage(self) -> CliResult<T>;
}

impl<T, E: Into<anyhow::Error>> UsageExt<T> for std::result::Result<T, E> {
    fn usage(self) -> CliResult<T> {
        self.map_err(|e| Failure::Usage(e.into()))
    }
}

/// Resolved run configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub source: Option<PathBuf>,
    pub target: Option<PathBuf>,
    pub reference: Option<PathBuf>,
    /// Extra `(source, target, reference)` triples.
    pub pairs: Vec<[PathBuf; 3]>,
    /// Directory of `*.owl` files with `a-b.rdf` references.
    pub dataset_dir: Option<PathBuf>,
    pub embeddings: Option<PathBuf>,
    pub fallback_hash_embed: bool,
    pub hash_seed: u64,
    pub checkpoint: PathBuf,
    pub report: PathBuf,
    pub loss_log: PathBuf,
    pub output: PathBuf,
    pub model: ModelConfig,
    pub max_paths: usize,
    pub train: TrainConfig,
    pub k: usize,
    pub granularity: Granularity,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            source: None,
            target: None,
            reference: None,
            pairs: Vec::new(),
            dataset_dir: None,
            embeddings: None,
            fallback_hash_embed: false,
            hash_seed: 0,
            checkpoint: PathBuf::from("checkpoint.txt"),
            report: PathBuf::from("report.csv"),
            loss_log: PathBuf::from("loss.csv"),
            output: PathBuf::from("alignment.rdf"),
            model: ModelConfig::default(),
            max_paths: ContextConfig::default().max_paths,
            train: TrainConfig::default(),
            k: ExperimentConfig::default().k,
            granularity: Granularity::default(),
        }
    }
}

pub const CONFIG_KEYS: &[&str] = &[
    "source",
    "target",
    "reference",
    "pair",
    "dataset_dir",
    "embeddings",
    "fallback_hash_embed",
    "hash_seed",
    "checkpoint",
    "report",
    "loss_log",
    "output",
    "dim",
    "out_dim",
    "max_depth",
    "max_paths",
    "pooling",
    "ablation",
    "facets",
    "learning_rate",
    "epochs",
    "batch_size",
    "seed",
    "oversample",
    "adam_beta1",
    "adam_beta2",
    "adam_eps",
    "k",
    "granularity",
];

fn parse_value<T: std::str::FromStr>(key: &str, value: &str) -> anyhow::Result<T>
where
    T::Err: std::fmt::Display,
{
    value
        .parse()
        .map_err(|e| anyhow!("invalid value `{value}` for `{key}`: {e}"))
}

fn optional_path(value: &str, base: &Path) -> Option<PathBuf> {
    (!value.is_empty()).then(|| base.join(value))
}

impl RunConfig {
    /// Applies one `key = value` setting. Relative paths are joined onto
    /// `base`.
    pub fn set(&mut self, key: &str, value: &str, base: &Path) -> anyhow::Result<()> {
        let path = || base.join(value);
        match key {
            "source" => self.source = optional_path(value, base),
            "target" => self.target = optional_path(value, base),
            "reference" => self.reference = optional_path(value, base),
            "pair" => {
                let parts: Vec<&str> = value.split_whitespace().collect();
                let [s, t, r] = parts[..] else {
                    return Err(anyhow!("`pair` takes `source target reference`, got `{value}`"));
                };
                self.pairs.push([base.join(s), base.join(t), base.join(r)]);
            }
            "dataset_dir" => self.dataset_dir = optional_path(value, base),
            "embeddings" => self.embeddings = optional_path(value, base),
            "fallback_hash_embed" => self.fallback_hash_embed = parse_value(key, value)?,
            "hash_seed" => self.hash_seed = parse_value(key, value)?,
            "checkpoint" => self.checkpoint = path(),
            "report" => self.report = path(),
            "loss_log" => self.loss_log = path(),
            "output" => self.output = path(),
            "dim" => self.model.dim = parse_value(key, value)?,
            "out_dim" => self.model.out_dim = parse_value(key, value)?,
            "max_depth" => self.model.max_depth = parse_value(key, value)?,
            "max_paths" => self.max_paths = parse_value(key, value)?,
            "pooling" => self.model.pooling = parse_value::<Pooling>(key, value)?,
            "ablation" => self.model.ablation = parse_value::<Ablation>(key, value)?,
            "facets" => self.model.facets = parse_value::<FacetMask>(key, value)?,
            "learning_rate" => self.train.learning_rate = parse_value(key, value)?,
            "epochs" => self.train.epochs = parse_value(key, value)?,
            "batch_size" => self.train.batch_size = parse_value(key, value)?,
            "seed" => self.train.seed = parse_value(key, value)?,
            "oversample" => self.train.oversample = parse_value(key, value)?,
            "adam_beta1" => self.train.adam_beta1 = parse_value(key, value)?,
            "adam_beta2" => self.train.adam_beta2 = parse_value(key, value)?,
            "adam_eps" => self.train.adam_eps = parse_value(key, value)?,
            "k" => self.k = parse_value(key, value)?,
            "granularity" => self.granularity = parse_value::<Granularity>(key, value)?,
            _ => return Err(anyhow!("unknown configuration key `{key}`")),
        }
        Ok(())
    }

    /// Applies every line of a config file. Blank lines and `#` comments
    /// are ignored.
    pub fn apply_text(&mut self, text: &str, base: &Path) -> anyhow::Result<()> {
        for (n, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| anyhow!("line {}: expected `key = value`", n + 1))?;
            self.set(key.trim(), value.trim(), base)
                .with_context(|| format!("line {}", n + 1))?;
        }
        self.validate()
    }

    pub fn parse(text: &str, base: &Path) -> anyhow::Result<Self> {
        let mut c = RunConfig::default();
        c.apply_text(text, base)?;
        Ok(c)
    }

    pub fn validate(&self) -> anyhow::Result<()> {
        let m = &self.model;
        if m.dim == 0 || m.out_dim == 0 || m.max_depth == 0 || self.max_paths == 0 {
            return Err(anyhow!("dim, out_dim, max_depth and max_paths must be positive"));
        }
        self.train.validate()?;
        Ok(())
    }

    /// Every key with its resolved value, one `key = value` line each.
    pub fn render(&self) -> String {
        let opt = |p: &Option<PathBuf>| p.as_ref().map(|p| p.display().to_string()).unwrap_or_default();
        let mut s = String::new();
        let mut line = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        line("source", opt(&self.source));
        line("target", opt(&self.target));
        line("reference", opt(&self.reference));
        for [a, b, c] in &self.pairs {
            line("pair", format!("{} {} {}", a.display(), b.display(), c.display()));
        }
        line("dataset_dir", opt(&self.dataset_dir));
        line("embeddings", opt(&self.embeddings));
        line("fallback_hash_embed", self.fallback_hash_embed.to_string());
        line("hash_seed", self.hash_seed.to_string());
        line("checkpoint", self.checkpoint.display().to_string());
        line("report", self.report.display().to_string());
        line("loss_log", self.loss_log.display().to_string());
        line("output", self.output.display().to_string());
        line("dim", self.model.dim.to_string());
        line("out_dim", self.model.out_dim.to_string());
        line("max_depth", self.model.max_depth.to_string());
        line("max_paths", self.max_paths.to_string());
        line("pooling", self.model.pooling.to_string());
        line("ablation", self.model.ablation.to_string());
        line("facets", self.model.facets.to_string());
        line("learning_rate", self.train.learning_rate.to_string());
        line("epochs", self.train.epochs.to_string());
        line("batch_size", self.train.batch_size.to_string());
        line("seed", self.train.seed.to_string());
        line("oversample", self.train.oversample.to_string());
        line("adam_beta1", self.train.adam_beta1.to_string());
        line("adam_beta2", self.train.adam_beta2.to_string());
        line("adam_eps", self.train.adam_eps.to_string());
        line("k", self.k.to_string());
        line("granularity", self.granularity.to_string());
        s
    }

    pub fn experiment(&self) -> ExperimentConfig {
        ExperimentConfig {
            model: self.model,
            context: self.context(),
            train: self.train,
            k: self.k,
            granularity: self.granularity,
        }
    }

    pub fn context(&self) -> ContextConfig {
        ContextConfig {
            max_depth: self.model.max_depth,
            max_paths: self.max_paths,
        }
    }

    fn fallback(&self) -> Fallback {
        if self.fallback_hash_embed {
            Fallback::HashEmbed { seed: self.hash_seed }
        } else {
            Fallback::Fail
        }
    }

    /// Loads the embedding file if one is configured; otherwise an empty
    /// store of dimension `dim`.
    pub fn store(&self, dim: usize) -> CliResult<EmbeddingStore> {
        match &self.embeddings {
            Some(path) => {
                let file = fs::File::open(path)
                    .with_context(|| format!("cannot open embeddings {}", path.display()))
                    .usage()?;
                let store = EmbeddingStore::load(std::io::BufReader::new(file), self.fallback())
                    .with_context(|| format!("loading {}", path.display()))?;
                if store.dim() != dim {
                    return Err(Failure::Usage(anyhow!(
                        "embedding file {} has dimension {}, configuration expects {dim}",
                        path.display(),
                        store.dim()
                    )));
                }
                Ok(store)
            }
            None => Ok(EmbeddingStore::new(dim, self.fallback())),
        }
    }

    /// The ontology pairs named by `source`/`target`/`reference`, `pair`
    /// lines and `dataset_dir`, in that order.
    pub fn pair_paths(&self) -> CliResult<Vec<[PathBuf; 3]>> {
        let mut out = Vec::new();
        match (&self.source, &self.target, &self.reference) {
            (Some(s), Some(t), Some(r)) => out.push([s.clone(), t.clone(), r.clone()]),
            (None, None, None) => {}
            _ => {
                return Err(Failure::Usage(anyhow!(
                    "`source`, `target` and `reference` must be given together"
                )))
            }
        }
        out.extend(self.pairs.iter().cloned());
        if let Some(dir) = &self.dataset_dir {
            out.extend(discover_pairs(dir)?);
        }
        if out.is_empty() {
            return Err(Failure::Usage(anyhow!(
                "no ontology pairs configured; set `source`/`target`/`reference`, `pair` or `dataset_dir`"
            )));
        }
        Ok(out)
    }

    pub fn bundle(&self) -> CliResult<Bundle> {
        let mut bundle = Bundle::default();
        let mut index: BTreeMap<PathBuf, usize> = BTreeMap::new();
        let mut ontology = |path: &PathBuf, bundle: &mut Bundle| -> CliResult<usize> {
            if let Some(&i) = index.get(path) {
                return Ok(i);
            }
            let o = load_ontology(path)?;
            bundle.ontologies.push(NamedOntology {
                name: file_stem(path),
                ontology: o,
            });
            index.insert(path.clone(), bundle.ontologies.len() - 1);
            Ok(bundle.ontologies.len() - 1)
        };
        for [s, t, r] in self.pair_paths()? {
            let source = ontology(&s, &mut bundle)?;
            let target = ontology(&t, &mut bundle)?;
            let bytes = read_input(&r)?;
            let reference = parse_reference_alignment(&bytes).with_context(|| format!("parsing {}", r.display()))?;
            bundle.pairs.push(BundlePair {
                source,
                target,
                reference,
            });
        }
        Ok(bundle)
    }
}

fn file_stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default()
}

/// `*.owl` files of `dir` paired through `<a>-<b>.rdf` reference files,
/// sorted by reference file name.
pub fn discover_pairs(dir: &Path) -> CliResult<Vec<[PathBuf; 3]>> {
    let entries = fs::read_dir(dir)
        .with_context(|| format!("cannot read dataset directory {}", dir.display()))
        .usage()?;
    let mut owl = BTreeMap::new();
    let mut refs = Vec::new();
    for e in entries {
        let path = e.with_context(|| format!("listing {}", dir.display())).usage()?.path();
        match path.extension().and_then(|x| x.to_str()) {
            Some("owl") => {
                owl.insert(file_stem(&path), path);
            }
            Some("rdf") => refs.push(path),
            _ => {}
        }
    }
    refs.sort();
    let mut out = Vec::new();
    for r in refs {
        let stem = file_stem(&r);
        let found = stem.match_indices('-').find_map(|(i, _)| {
            let (a, b) = (&stem[..i], &stem[i + 1..]);
            Some([owl.get(a)?.clone(), owl.get(b)?.clone(), r.clone()])
        });
        match found {
            Some(triple) => out.push(triple),
            None => log::warn!("{}: no matching ontologies, ignored", r.display()),
        }
    }
    Ok(out)
}

fn read_input(path: &Path) -> CliResult<Vec<u8>> {
    fs::read(path)
        .with_context(|| format!("cannot read {}", path.display()))
        .usage()
}

fn load_ontology(path: &Path) -> CliResult<Ontology> {
    let bytes = read_input(path)?;
    Ok(parse_ontology(&bytes).with_context(|| format!("parsing {}", path.display()))?)
}

fn load_checkpoint(path: &Path) -> CliResult<Checkpoint> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("cannot read checkpoint {}", path.display()))
        .usage()?;
    Checkpoint::from_text(&text)
        .with_context(|| format!("unreadable checkpoint {}", path.display()))
        .usage()
}

/// Writes through a sibling temporary file and renames it into place.
fn write_atomic(path: &Path, contents: &[u8]) -> CliResult<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    fs::write(&tmp, contents).with_context(|| format!("writing {}", tmp.display()))?;
    fs::rename(&tmp, path).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

#[derive(Debug, Parser)]
#[command(name = "ontalign", version, about = "Ontology alignment with a dual-attention Siamese model")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train on every configured pair and write a checkpoint and loss log.
    Train {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long)]
        checkpoint: Option<PathBuf>,
    },
    /// Run k-fold cross-validation and write the report.
    Evaluate {
        #[command(flatten)]
        common: CommonArgs,
        /// Run the seven ablation configurations instead of one experiment.
        #[arg(long)]
        ablation: bool,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Align two ontologies with a trained checkpoint.
    Align {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long)]
        source: Option<PathBuf>,
        #[arg(long)]
        target: Option<PathBuf>,
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        #[arg(long)]
        output: Option<PathBuf>,
        /// Replaces both stored thresholds.
        #[arg(long)]
        threshold: Option<f64>,
    },
    /// Print the context of one concept.
    InspectContext {
        #[command(flatten)]
        common: CommonArgs,
        /// Ontology file; defaults to the configured `source`.
        #[arg(long)]
        ontology: Option<PathBuf>,
        /// Concept IRI or IRI fragment.
        #[arg(long)]
        concept: String,
    },
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Override any configuration key, `key=value`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub embeddings: Option<PathBuf>,
    /// Embed labels missing from the embedding file with the hash embedder.
    #[arg(long)]
    pub fallback_hash_embed: bool,
}

impl CommonArgs {
    pub fn resolve(&self) -> CliResult<RunConfig> {
        let mut cfg = RunConfig::default();
        if let Some(path) = &self.config {
            let text = fs::read_to_string(path)
                .with_context(|| format!("cannot read config {}", path.display()))
                .usage()?;
            let base = path.parent().unwrap_or(Path::new(""));
            cfg.apply_text(&text, base)
                .with_context(|| format!("in {}", path.display()))
                .usage()?;
        }
        for kv in &self.set {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| anyhow!("--set expects key=value, got `{kv}`"))
                .usage()?;
            cfg.set(k.trim(), v.trim(), Path::new("")).usage()?;
        }
        if let Some(seed) = self.seed {
            cfg.train.seed = seed;
        }
        if let Some(path) = &self.embeddings {
            cfg.embeddings = Some(path.clone());
        }
        if self.fallback_hash_embed {
            cfg.fallback_hash_embed = true;
        }
        cfg.validate().usage()?;
        Ok(cfg)
    }
}

fn announce(cfg: &RunConfig) {
    eprintln!("# resolved configuration\n{}", cfg.render());
}

pub fn cmd_train(cfg: &RunConfig) -> CliResult<Checkpoint> {
    let bundle = cfg.bundle()?;
    let store = cfg.store(cfg.model.dim)?;
    let fit = fit_bundle(&bundle, &store, &cfg.experiment())?;
    write_atomic(&cfg.checkpoint, fit.checkpoint.to_text().as_bytes())?;
    let mut log = String::from("epoch,loss\n");
    for (i, l) in fit.loss_history.iter().enumerate() {
        let _ = writeln!(log, "{i},{l}");
    }
    write_atomic(&cfg.loss_log, log.as_bytes())?;
    println!(
        "trained {} epochs; theta_concept {:.2}, theta_property {:.2}; checkpoint {}",
        fit.loss_history.len(),
        fit.checkpoint.threshold_concept,
        fit.checkpoint.threshold_property,
        cfg.checkpoint.display()
    );
    Ok(fit.checkpoint)
}

pub fn cmd_evaluate(cfg: &RunConfig, ablation: bool) -> CliResult<()> {
    let bundle = cfg.bundle()?;
    let store = cfg.store(cfg.model.dim)?;
    let exp = cfg.experiment();
    let mut buf = Vec::new();
    if ablation {
        let runs = ablation_sweep(&bundle, &store, &exp)?;
        write_ablation_csv(&runs, &mut buf)?;
        print!("{}", ablation_table(&runs));
    } else {
        let report = run_experiment(&bundle, &store, &exp)?;
        for f in &report.folds {
            for w in &f.warnings {
                log::warn!("fold {}: {w:?}", f.fold);
            }
        }
        write_report_csv(&report, &mut buf)?;
        print!("{}", report_table(&report));
    }
    write_atomic(&cfg.report, &buf)
}

pub fn cmd_align(
    cfg: &RunConfig,
    source: &Path,
    target: &Path,
    checkpoint: &Path,
    output: &Path,
    threshold: Option<f64>,
) -> CliResult<usize> {
    let mut ckpt = load_checkpoint(checkpoint)?;
    let s = load_ontology(source)?;
    let t = load_ontology(target)?;
    if let Some(theta) = threshold {
        ckpt.threshold_concept = theta;
        ckpt.threshold_property = theta;
    }
    let store = cfg.store(ckpt.params.config.dim)?;
    let cells = align_ontologies(&ckpt, &s, &t, &store)?;
    write_atomic(output, write_alignment(s.iri(), t.iri(), &cells).as_bytes())?;
    println!("{} cells written to {}", cells.len(), output.display());
    Ok(cells.len())
}

fn resolve_concept(o: &Ontology, name: &str) -> CliResult<ConceptId> {
    let exact = ConceptId::new(name);
    if o.contains_concept(&exact) {
        return Ok(exact);
    }
    let matches: Vec<&ConceptId> = o.concepts().iter().filter(|c| iri_fragment(c.as_str()) == name).collect();
    match matches[..] {
        [c] => Ok(c.clone()),
        [] => Err(Failure::Usage(anyhow!("no concept `{name}`"))),
        _ => Err(Failure::Usage(anyhow!("`{name}` is ambiguous; give the full IRI"))),
    }
}

/// Human-readable dump of a concept's context.
pub fn render_context(o: &Ontology, c: &ConceptId, cfg: &ContextConfig) -> crate::Result<String> {
    let b = build_context(o, c, cfg);
    let name = |iri: &str| -> crate::Result<String> { Ok(format!("{} ({iri})", entity_label(o, iri)?)) };
    let mut s = String::new();
    let _ = writeln!(s, "concept: {}", name(c.as_str())?);
    let _ = writeln!(s, "lineage paths: {}", b.lineage_paths.len());
    for (i, p) in b.lineage_paths.iter().enumerate() {
        let labels = p
            .iter()
            .map(|a| o.concept_label(a).map(str::to_string))
            .collect::<crate::Result<Vec<_>>>()?;
        let _ = writeln!(s, "  [{i}] {}", labels.join(" > "));
    }
    let mut section = |title: &str, items: Vec<&str>| -> crate::Result<()> {
        let _ = writeln!(s, "{title}: {}", items.len());
        for i in items {
            let _ = writeln!(s, "  {}", name(i)?);
        }
        Ok(())
    };
    section("children", b.children.iter().map(ConceptId::as_str).collect())?;
    section("object neighbors", b.obj_neighbors.iter().map(ConceptId::as_str).collect())?;
    section("data neighbors", b.data_neighbors.iter().map(|p| p.as_str()).collect())?;
    Ok(s)
}

fn dispatch(command: Command) -> CliResult<()> {
    match command {
        Command::Train { common, checkpoint } => {
            let mut cfg = common.resolve()?;
            if let Some(p) = checkpoint {
                cfg.checkpoint = p;
            }
            announce(&cfg);
            cmd_train(&cfg).map(|_| ())
        }
        Command::Evaluate {
            common,
            ablation,
            report,
        } => {
            let mut cfg = common.resolve()?;
            if let Some(p) = report {
                cfg.report = p;
            }
            announce(&cfg);
            cmd_evaluate(&cfg, ablation)
        }
        Command::Align {
            common,
            source,
            target,
            checkpoint,
            output,
            threshold,
        } => {
            let cfg = common.resolve()?;
            announce(&cfg);
            let source = source.or_else(|| cfg.source.clone());
            let target = target.or_else(|| cfg.target.clone());
            let (Some(source), Some(target)) = (source, target) else {
                return Err(Failure::Usage(anyhow!("align needs --source and --target")));
            };
            let checkpoint = checkpoint.unwrap_or_else(|| cfg.checkpoint.clone());
            let output = output.unwrap_or_else(|| cfg.output.clone());
            cmd_align(&cfg, &source, &target, &checkpoint, &output, threshold).map(|_| ())
        }
        Command::InspectContext {
            common,
            ontology,
            concept,
        } => {
            let cfg = common.resolve()?;
            announce(&cfg);
            let path = ontology
                .or_else(|| cfg.source.clone())
                .ok_or_else(|| anyhow!("inspect-context needs --ontology"))
                .usage()?;
            let o = load_ontology(&path)?;
            let c = resolve_concept(&o, &concept)?;
            print!("{}", render_context(&o, &c, &cfg.context())?);
            Ok(())
        }
    }
}

/// Runs a parsed command line and reports any failure on stderr.
pub fn run(cli: Cli) -> ExitCode {
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {:#}", f.error());
            ExitCode::from(f.exit_code())
        }
    }
}

pub fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    run(Cli::parse())
}
