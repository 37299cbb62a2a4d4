//! One function per subcommand. Each writes its outputs under `--out` and
//! returns the one-line summary printed on success.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::path::Path;

use anyhow::{Context as _, Result};
use featnorm_core::analysis::{
    cosine_similarity_matrix, hierarchical_cluster_with, shared_concepts, within_minus_between, Linkage,
};
use featnorm_core::elicitation::{
    elicit_norm_to_dir, read_corpus, BackendError, CompletionBackend, CompletionParams, LiveBackend, LiveConfig,
    PrimingExample, PromptTemplate, RateLimitedBackend, ReplayBackend, RetryPolicy, RetryingBackend, RunOptions,
    StubBackend,
};
use featnorm_core::evaluation::{
    commonality_analysis, matrix_correlation, pair_correlation, BenchmarkKind, PairBenchmark,
};
use featnorm_core::ingestion::{parse_benchmark, BenchmarkMapping, Column};
use featnorm_core::lexicon::{parse_closed_class, parse_synset_lexicon, ClosedClassLexicon, SynsetLexicon};
use featnorm_core::model::io::{read_similarity, read_to_string, similarity_to_tsv, write_norm};
use featnorm_core::normalize::{normalize_corpus, CollapseScope, NormalizeOptions};
use featnorm_core::norms::{
    build_matrix, descriptive_stats, elbow_point, filter_infrequent, label_distribution, read_label_sample,
    sample_for_labeling, unique_feature_curve, write_label_sample, FilterConfig, LabelSample,
};
use featnorm_core::{CategoryScheme, Concept, FeatureNorm, SimilarityMatrix};

use crate::config::Config;
use crate::context::{load_concepts, usage, Ctx, NormSpec};
use crate::{
    CategoryArgs, Cli, ClusterArgs, Command, ElicitArgs, EvaluateArgs, FilterArgs, LabelDistArgs, NormArgs,
    NormalizeArgs, PartitionArgs, SampleArgs, SimilarityArgs,
};

const DEFAULT_RUNS: u32 = 30;
const DEFAULT_EXAMPLES_PER_PROMPT: usize = 3;
const DEFAULT_K_MAX: u32 = 10;
const DEFAULT_BOOTSTRAP: usize = 1000;
const DEFAULT_SAMPLE: usize = 500;
/// Answer used by the stub backend for concepts without a scripted answer.
const STUB_FALLBACK: &str = "It is an object.";

pub fn run(cli: Cli) -> Result<String> {
    let config = match &cli.config {
        Some(path) if !path.exists() => return Err(usage(format!("{} does not exist", path.display()))),
        Some(path) => Config::load(path).map_err(|e| usage(format!("{e:#}")))?,
        None => Config::default(),
    };
    let name = command_name(&cli.command);
    let ctx = Ctx::new(name, config, cli.seed, cli.out)?;
    match cli.command {
        Command::Elicit(a) => elicit(&ctx, a),
        Command::Normalize(a) => normalize(&ctx, a),
        Command::Filter(a) => filter(&ctx, a),
        Command::Stats(a) => stats(&ctx, a),
        Command::Similarity(a) => similarity(&ctx, a),
        Command::Cluster(a) => cluster(&ctx, a),
        Command::CategoryScore(a) => category_score(&ctx, a),
        Command::Evaluate(a) => evaluate(&ctx, a),
        Command::Partition(a) => partition(&ctx, a),
        Command::SampleLabels(a) => sample_labels(&ctx, a),
        Command::LabelDist(a) => label_dist(&ctx, a),
    }
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Elicit(_) => "elicit",
        Command::Normalize(_) => "normalize",
        Command::Filter(_) => "filter",
        Command::Stats(_) => "stats",
        Command::Similarity(_) => "similarity",
        Command::Cluster(_) => "cluster",
        Command::CategoryScore(_) => "category-score",
        Command::Evaluate(_) => "evaluate",
        Command::Partition(_) => "partition",
        Command::SampleLabels(_) => "sample-labels",
        Command::LabelDist(_) => "label-dist",
    }
}

fn norm_spec(ctx: &Ctx, args: NormArgs) -> Result<NormSpec> {
    NormSpec::parse(&ctx.required(args.norm, "norm")?)
}

fn with_specs(ctx: &Ctx, with: Vec<String>) -> Result<Vec<NormSpec>> {
    ctx.list(with, "with").iter().map(|s| NormSpec::parse(s)).collect()
}

fn at_least_one<T: PartialOrd + Default + std::fmt::Display>(v: T, key: &str) -> Result<T> {
    if v > T::default() {
        Ok(v)
    } else {
        Err(usage(format!("--{key} must be at least 1, got {v}")))
    }
}

fn elicit(ctx: &Ctx, a: ElicitArgs) -> Result<String> {
    let concepts = load_concepts(&ctx.input(a.concepts, "concepts")?)?;
    let examples = NormSpec::parse(&ctx.required(a.examples, "examples")?)?;
    let runs = at_least_one(ctx.value(a.runs, "runs")?.unwrap_or(DEFAULT_RUNS), "runs")?;
    let backend_name: String = ctx.required(a.backend, "backend")?;
    let params = CompletionParams::new(
        ctx.required::<String>(a.model, "model")?,
        ctx.required(a.temperature, "temperature")?,
        ctx.required(a.max_tokens, "max-tokens")?,
    );
    let per_prompt = ctx
        .value(a.examples_per_prompt, "examples-per-prompt")?
        .unwrap_or(DEFAULT_EXAMPLES_PER_PROMPT);
    let template = PromptTemplate::new(PromptTemplate::default().question_format(), per_prompt)?;
    let max_features = ctx.value(a.example_features, "example-features")?.unwrap_or(usize::MAX);
    let pool = PrimingExample::from_norm(
        &examples.load()?,
        &concepts,
        max_features,
        ClosedClassLexicon::bundled(),
    )?;
    let opts = RunOptions {
        parallelism: at_least_one(ctx.value(a.parallelism, "parallelism")?.unwrap_or(1), "parallelism")?,
    };

    let backend: Box<dyn CompletionBackend> = match backend_name.as_str() {
        "stub" => {
            let answers = match ctx.optional_input(a.stub_answers, "stub-answers")? {
                Some(path) => parse_stub_answers(&path)?,
                None => HashMap::new(),
            };
            Box::new(StubBackend::keyed(template.clone(), answers, STUB_FALLBACK))
        }
        "replay" => {
            let corpus = read_corpus(&ctx.input(a.replay, "replay")?)?;
            Box::new(ReplayBackend::from_responses(&corpus)?)
        }
        "live" => {
            let endpoint: String = ctx.required(a.endpoint, "endpoint")?;
            let live = LiveBackend::from_env(LiveConfig::new(endpoint)).map_err(|e| match e {
                BackendError::MissingApiKey(_) => usage(e.to_string()),
                other => other.into(),
            })?;
            let retrying = RetryingBackend::new(live, RetryPolicy::default(), ctx.seed);
            match ctx.value(a.rate_limit, "rate-limit")? {
                Some(rpm) => Box::new(RateLimitedBackend::new(retrying, rpm)?),
                None => Box::new(retrying),
            }
        }
        other => return Err(usage(format!("unknown backend {other:?}"))),
    };

    let corpus = elicit_norm_to_dir(
        &concepts,
        runs,
        &pool,
        &template,
        backend.as_ref(),
        &params,
        ctx.seed,
        &opts,
        &ctx.out,
    )?;
    Ok(format!(
        "elicited {} responses ({} concepts x {runs} runs) into {}",
        corpus.len(),
        concepts.len(),
        ctx.out.display()
    ))
}

/// `name<TAB>answer` lines; blank lines and `#` comments are skipped.
fn parse_stub_answers(path: &Path) -> Result<HashMap<String, String>> {
    let text = read_to_string(path)?;
    let mut answers = HashMap::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let (name, answer) = line
            .split_once('\t')
            .with_context(|| format!("{}:{}: expected `name<TAB>answer`", path.display(), i + 1))?;
        answers.insert(name.trim().to_string(), answer.to_string());
    }
    Ok(answers)
}

fn normalize(ctx: &Ctx, a: NormalizeArgs) -> Result<String> {
    let corpus = read_corpus(&ctx.input(a.corpus, "corpus")?)?;
    let closed = match ctx.optional_input(a.closed_class, "closed-class")? {
        Some(p) => parse_closed_class(&read_to_string(&p)?, &p.display().to_string())?,
        None => ClosedClassLexicon::bundled().clone(),
    };
    let synsets = match ctx.optional_input(a.synsets, "synsets")? {
        Some(p) => parse_synset_lexicon(&read_to_string(&p)?, &p.display().to_string())?,
        None => SynsetLexicon::bundled().clone(),
    }
    .with_plural_fold(ctx.value(a.plural_fold, "plural-fold")?.unwrap_or(false));
    let scope = match ctx.value::<String>(a.collapse_scope, "collapse-scope")? {
        None => CollapseScope::default(),
        Some(s) => CollapseScope::parse(&s).ok_or_else(|| usage(format!("unknown collapse scope {s:?}")))?,
    };
    let (mut norm, report) = normalize_corpus(&corpus, &closed, &synsets, &NormalizeOptions { collapse_scope: scope })?;
    if let Some(path) = ctx.optional_input(a.concepts, "concepts")? {
        let mut ids: BTreeSet<String> = load_concepts(&path)?.into_iter().map(|c| c.id).collect();
        ids.extend(norm.concepts().iter().cloned());
        norm = FeatureNorm::with_concepts(norm.entries().to_vec(), norm.source_count(), norm.provenance(), ids);
    }
    write_norm(&ctx.output("norm.tsv"), &norm)?;
    ctx.write("report.json", &report.to_json())?;
    Ok(format!(
        "normalized {} responses into {} entries over {} concepts",
        corpus.len(),
        norm.entries().len(),
        norm.concepts().len()
    ))
}

fn filter(ctx: &Ctx, a: FilterArgs) -> Result<String> {
    let norm = norm_spec(ctx, a.norm)?.load()?;
    let k_max = ctx.value(a.k_max, "k-max")?.unwrap_or(DEFAULT_K_MAX);
    let curve = unique_feature_curve(&norm, k_max)?;
    let mut tsv = String::from("k\tunique_features\n");
    for (k, n) in &curve {
        tsv.push_str(&format!("{k}\t{n}\n"));
    }
    ctx.write("curve.tsv", &tsv)?;

    let k_arg = ctx.value::<String>(a.k, "k")?.unwrap_or_else(|| "auto".to_string());
    let (k, how) = if k_arg == "auto" {
        (elbow_point(&curve)?, "elbow")
    } else {
        let k = k_arg
            .parse()
            .map_err(|_| usage(format!("--k must be a positive integer or `auto`, got {k_arg:?}")))?;
        (k, "fixed")
    };
    let outcome = filter_infrequent(&norm, FilterConfig::new(k).map_err(|e| usage(e.to_string()))?);
    if !outcome.emptied_concepts.is_empty() {
        log::warn!(
            "{} concepts lost every feature: {:?}",
            outcome.emptied_concepts.len(),
            outcome.emptied_concepts
        );
    }
    write_norm(&ctx.output("filtered.tsv"), &outcome.norm)?;
    Ok(format!(
        "k={k} ({how}); kept {} of {} entries",
        outcome.norm.entries().len(),
        norm.entries().len()
    ))
}

fn stats(ctx: &Ctx, a: NormArgs) -> Result<String> {
    let spec = norm_spec(ctx, a)?;
    let s = descriptive_stats(&spec.load()?)?;
    let tsv = format!(
        "n_concepts\ttotal_features\tn_unique_features\tfeatures_per_concept\tunique_share_percent\n{}\t{}\t{}\t{}\t{}\n",
        s.n_concepts,
        s.total_features,
        s.n_unique_features,
        s.features_per_concept,
        s.unique_share_percent()
    );
    ctx.write("stats.tsv", &tsv)?;
    Ok(format!(
        "{}: concepts={} features={} unique={} per_concept={:.2} unique_share={:.2}%",
        spec.name,
        s.n_concepts,
        s.total_features,
        s.n_unique_features,
        s.features_per_concept,
        s.unique_share_percent()
    ))
}

/// Concepts of `norm` that have at least one entry, in id order.
fn populated(norm: &FeatureNorm) -> Vec<String> {
    let empty: BTreeSet<String> = norm.empty_concepts().into_iter().collect();
    norm.concepts()
        .iter()
        .filter(|c| !empty.contains(*c))
        .cloned()
        .collect()
}

fn norm_similarity(norm: &FeatureNorm, concepts: &[String]) -> Result<SimilarityMatrix> {
    Ok(cosine_similarity_matrix(&build_matrix(norm, concepts)?)?)
}

fn similarity_from_args(ctx: &Ctx, a: SimilarityArgs) -> Result<SimilarityMatrix> {
    let norm = norm_spec(ctx, a.norm)?.load()?;
    let concepts = match ctx.optional_input(a.concepts, "concepts")? {
        Some(path) => load_concepts(&path)?.into_iter().map(|c| c.id).collect(),
        None => populated(&norm),
    };
    norm_similarity(&norm, &concepts)
}

/// A precomputed `--similarity` file, else the cosine matrix of `--norm`.
fn similarity_input(ctx: &Ctx, input: SimilarityArgs, file: Option<std::path::PathBuf>) -> Result<SimilarityMatrix> {
    match ctx.optional_input(file, "similarity")? {
        Some(path) => Ok(read_similarity(&path)?),
        None => similarity_from_args(ctx, input),
    }
}

fn similarity(ctx: &Ctx, a: SimilarityArgs) -> Result<String> {
    let s = similarity_from_args(ctx, a)?;
    ctx.write("similarity.tsv", &similarity_to_tsv(&s))?;
    Ok(format!("similarity matrix over {} concepts", s.len()))
}

fn cluster(ctx: &Ctx, a: ClusterArgs) -> Result<String> {
    let linkage = match ctx.value::<String>(a.linkage, "linkage")? {
        None => Linkage::Average,
        Some(l) => Linkage::parse(&l).ok_or_else(|| usage(format!("unknown linkage {l:?}")))?,
    };
    let s = similarity_input(ctx, a.input, a.similarity)?;
    let d = hierarchical_cluster_with(&s, linkage)?;
    ctx.write("dendrogram.json", &d.to_json())?;
    Ok(format!(
        "clustered {} concepts in {} merges",
        d.leaves.len(),
        d.merges.len()
    ))
}

/// `concept_id<TAB>category` lines; an optional header starting with
/// `concept` is skipped.
fn parse_categories(path: &Path) -> Result<CategoryScheme> {
    let text = read_to_string(path)?;
    let mut map: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() || line.starts_with('#') || (i == 0 && line.starts_with("concept")) {
            continue;
        }
        let (id, cat) = line
            .split_once('\t')
            .with_context(|| format!("{}:{}: expected `concept_id<TAB>category`", path.display(), i + 1))?;
        map.entry(cat.trim().to_lowercase())
            .or_default()
            .insert(id.trim().to_string());
    }
    Ok(CategoryScheme::new(map)?)
}

fn category_score(ctx: &Ctx, a: CategoryArgs) -> Result<String> {
    let b = at_least_one(
        ctx.value(a.bootstrap, "bootstrap")?.unwrap_or(DEFAULT_BOOTSTRAP),
        "bootstrap",
    )?;
    let cats = match ctx.optional_input(a.categories, "categories")? {
        Some(path) => parse_categories(&path)?,
        None => match ctx.optional_input(a.input.concepts.clone(), "concepts")? {
            Some(path) => CategoryScheme::from_concepts(&load_concepts(&path)?)?,
            None => {
                return Err(usage(
                    "category-score needs --categories or --concepts with a categories column",
                ))
            }
        },
    };
    let s = similarity_input(ctx, a.input, a.similarity)?;
    let scores = within_minus_between(&s, &cats, b, ctx.seed)?;
    ctx.write("category_scores.tsv", &scores.categories_tsv())?;
    ctx.write("concept_scores.tsv", &scores.concepts_tsv())?;
    Ok(format!(
        "scored {} concepts in {} categories",
        scores.concepts.len(),
        scores.categories.len()
    ))
}

/// Loads `--norm` plus every `--with` norm and the concepts they all share.
/// Named norms plus the concepts they all cover.
type LoadedNorms = (Vec<(String, FeatureNorm)>, Vec<String>);

fn load_norms(ctx: &Ctx, norm: NormArgs, with: Vec<String>) -> Result<LoadedNorms> {
    let mut specs = vec![norm_spec(ctx, norm)?];
    specs.extend(with_specs(ctx, with)?);
    let mut names = BTreeSet::new();
    for s in &specs {
        if !names.insert(s.name.clone()) {
            return Err(usage(format!(
                "two norms are named {:?}; use name=path to tell them apart",
                s.name
            )));
        }
    }
    let norms = specs
        .iter()
        .map(|s| Ok((s.name.clone(), s.load()?)))
        .collect::<Result<Vec<_>>>()?;
    let refs: Vec<&FeatureNorm> = norms.iter().map(|(_, n)| n).collect();
    let shared = if refs.len() == 1 {
        populated(refs[0])
    } else {
        shared_concepts(&refs)?
    };
    Ok((norms, shared))
}

fn parse_benchmark_spec(spec: &str) -> Result<(String, PairBenchmark)> {
    let (preset, path) = match spec.split_once(':') {
        Some((p, path)) if BenchmarkMapping::preset(p).is_some() => (Some(p), path),
        _ => (None, spec),
    };
    let path = Path::new(path);
    if !path.exists() {
        return Err(usage(format!("{} does not exist", path.display())));
    }
    let (mapping, kind) = match preset {
        Some(p) => BenchmarkMapping::preset(p).expect("checked above"),
        None => (
            BenchmarkMapping::new(Column::Index(0), Column::Index(1), Column::Index(2)),
            BenchmarkKind::Similarity,
        ),
    };
    let name = preset.map(str::to_string).unwrap_or_else(|| {
        path.file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default()
    });
    let bench = parse_benchmark(&read_to_string(path)?, &path.display().to_string(), kind, &mapping)?;
    Ok((name, bench))
}

fn evaluate(ctx: &Ctx, a: EvaluateArgs) -> Result<String> {
    let benchmarks = ctx
        .list(a.benchmark, "benchmark")
        .iter()
        .map(|s| parse_benchmark_spec(s))
        .collect::<Result<Vec<_>>>()?;
    let reference = ctx.optional_input(a.reference, "reference")?;
    if benchmarks.is_empty() && reference.is_none() {
        return Err(usage("evaluate needs --benchmark or --reference"));
    }
    let concepts: Vec<Concept> = match ctx.optional_input(a.concepts, "concepts")? {
        Some(path) => load_concepts(&path)?,
        None => Vec::new(),
    };
    let (norms, shared) = load_norms(ctx, a.norm, a.with)?;
    let reference = reference.map(|p| read_similarity(&p)).transpose()?;

    let mut tsv = String::from("norm\ttarget\tr\tn\tunit\n");
    let mut first = None;
    for (name, norm) in &norms {
        let s = norm_similarity(norm, &shared)?;
        for (bench_name, bench) in &benchmarks {
            let pc = pair_correlation(&s, bench, &concepts)?;
            if !pc.unresolved.is_empty() {
                log::info!(
                    "{name}/{bench_name}: {} benchmark words unresolved",
                    pc.unresolved.len()
                );
            }
            tsv.push_str(&format!("{name}\t{bench_name}\t{}\t{}\tpairs\n", pc.r, pc.n));
            first.get_or_insert((pc.r, pc.n));
        }
        if let Some(r) = &reference {
            let ids: Vec<String> = shared.iter().filter(|c| r.index_of(c).is_some()).cloned().collect();
            let (corr, _) = matrix_correlation(&s.subset(&ids)?, &r.subset(&ids)?)?;
            tsv.push_str(&format!("{name}\treference\t{corr}\t{}\tconcepts\n", ids.len()));
            first.get_or_insert((corr, ids.len()));
        }
    }
    ctx.write("evaluation.tsv", &tsv)?;
    let (r, n) = first.expect("at least one target");
    Ok(format!("r={r:.4}, n={n}"))
}

fn partition(ctx: &Ctx, a: PartitionArgs) -> Result<String> {
    let reference = read_similarity(&ctx.input(a.reference, "reference")?)?;
    let (norms, shared) = load_norms(ctx, a.norm, a.with)?;
    if !(2..=3).contains(&norms.len()) {
        return Err(usage(format!(
            "partition needs 2 or 3 predictor norms, got {}",
            norms.len()
        )));
    }
    let ids: Vec<String> = shared.into_iter().filter(|c| reference.index_of(c).is_some()).collect();
    let target = reference.subset(&ids)?.lower_triangle();
    let predictors = norms
        .iter()
        .map(|(name, norm)| Ok((name.clone(), norm_similarity(norm, &ids)?.lower_triangle())))
        .collect::<Result<Vec<_>>>()?;

    let mut sets: Vec<Vec<usize>> = vec![(0..predictors.len()).collect()];
    if predictors.len() == 3 {
        sets.extend([vec![0, 1], vec![0, 2], vec![1, 2]]);
    }
    let mut summary = String::new();
    for set in sets {
        let chosen: Vec<(String, Vec<f64>)> = set.iter().map(|&i| predictors[i].clone()).collect();
        let d = commonality_analysis(&target, &chosen)?;
        let names: Vec<&str> = chosen.iter().map(|(n, _)| n.as_str()).collect();
        ctx.write(&format!("partition_{}.json", names.join("_")), &d.to_json())?;
        if summary.is_empty() {
            summary = format!(
                "R2={:.4} over {} concept pairs ({})",
                d.r2_full,
                target.len(),
                names.join(", ")
            );
        }
    }
    Ok(summary)
}

fn sample_labels(ctx: &Ctx, a: SampleArgs) -> Result<String> {
    let n = at_least_one(ctx.value(a.n, "n")?.unwrap_or(DEFAULT_SAMPLE), "n")?;
    if ctx.list(a.with.clone(), "with").is_empty() {
        return Err(usage("sample-labels needs --with to define the shared concepts"));
    }
    let (norms, shared) = load_norms(ctx, a.norm, a.with)?;
    let (source, norm) = &norms[0];
    let inside: BTreeSet<String> = shared.into_iter().collect();
    let outside: BTreeSet<String> = populated(norm).into_iter().filter(|c| !inside.contains(c)).collect();
    let sample = sample_for_labeling(norm, source, &inside, &outside, n, ctx.seed)?;
    write_label_sample(&ctx.output("labels.tsv"), &sample)?;
    Ok(format!(
        "sampled {} features from {source} ({} inside, {} outside concepts)",
        sample.records.len(),
        inside.len(),
        outside.len()
    ))
}

fn label_dist(ctx: &Ctx, a: LabelDistArgs) -> Result<String> {
    let sample = read_label_sample(&ctx.input(a.labels, "labels")?)?;
    let b = at_least_one(
        ctx.value(a.bootstrap, "bootstrap")?.unwrap_or(DEFAULT_BOOTSTRAP),
        "bootstrap",
    )?;
    let all = label_distribution(&sample, b, ctx.seed)?;
    ctx.write("label_distribution.tsv", &all.to_tsv())?;
    let mut by_source: BTreeMap<&str, LabelSample> = BTreeMap::new();
    for r in &sample.records {
        by_source.entry(r.source.as_str()).or_default().records.push(r.clone());
    }
    if by_source.len() > 1 {
        for (source, sub) in &by_source {
            let d = label_distribution(sub, b, ctx.seed)?;
            ctx.write(&format!("label_distribution_{source}.tsv"), &d.to_tsv())?;
        }
    }
    let top = all
        .shares
        .iter()
        .max_by(|x, y| x.proportion.total_cmp(&y.proportion))
        .expect("label scheme is nonempty");
    Ok(format!(
        "{} labeled features from {} sources; most common: {} ({:.1}%)",
        all.n,
        by_source.len(),
        top.label,
        100.0 * top.proportion
    ))
}
