use std::collections::BTreeSet;
use std::path::Path;
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::OnceLock;

use rand::Rng;

use super::backend::{BackendError, CompletionBackend};
use super::corpus::{write_partial_run, write_run, CompletionParams, RawResponse};
use super::prompt::{prompt_hash, PrimingExample, PromptTemplate};
use crate::error::{Error, Result};
use crate::model::Concept;
use crate::rng;

/// One elicitation run: which pool examples prime the model.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunSpec {
    pub run_id: u32,
    pub seed: u64,
    /// Concept ids of the priming examples, in prompt order.
    pub example_ids: Vec<String>,
}

impl RunSpec {
    pub fn new(run_id: u32, seed: u64, example_ids: Vec<String>) -> Result<Self> {
        let distinct: BTreeSet<&String> = example_ids.iter().collect();
        if distinct.len() != example_ids.len() {
            return Err(Error::argument(format!("run {run_id} repeats a priming example")));
        }
        Ok(RunSpec {
            run_id,
            seed,
            example_ids,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunOptions {
    /// Maximum number of requests in flight.
    pub parallelism: usize,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions { parallelism: 1 }
    }
}

fn binomial_saturating(n: usize, k: usize) -> u128 {
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.saturating_mul((n - i) as u128) / (i as u128 + 1);
        if acc > u64::MAX as u128 {
            return u128::MAX;
        }
    }
    acc
}

/// Draws the priming examples of every run without replacement from the
/// pool. Runs get distinct example sets as long as the pool has enough
/// combinations.
pub fn plan_runs(n_runs: u32, pool: &[PrimingExample], per_prompt: usize, seed: u64) -> Result<Vec<RunSpec>> {
    if n_runs == 0 {
        return Err(Error::argument("n_runs must be at least 1"));
    }
    if pool.len() < per_prompt {
        return Err(Error::argument(format!(
            "example pool has {} examples, {per_prompt} needed per prompt",
            pool.len()
        )));
    }
    let distinct_ids: BTreeSet<&str> = pool.iter().map(|e| e.concept.id.as_str()).collect();
    if distinct_ids.len() != pool.len() {
        return Err(Error::argument("example pool repeats a concept id"));
    }
    let combinations = binomial_saturating(pool.len(), per_prompt);
    let mut sampler = rng::substream(seed, "elicitation/examples");
    let mut used: BTreeSet<Vec<usize>> = BTreeSet::new();
    let mut runs = Vec::with_capacity(n_runs as usize);
    for run_id in 0..n_runs {
        let picks = loop {
            let picks = rand::seq::index::sample(&mut sampler, pool.len(), per_prompt).into_vec();
            let mut key = picks.clone();
            key.sort_unstable();
            if used.insert(key) || (used.len() as u128) >= combinations {
                break picks;
            }
        };
        let run_seed = rng::replicate(seed, "elicitation/run", run_id as u64).random();
        let ids = picks.iter().map(|&i| pool[i].concept.id.clone()).collect();
        runs.push(RunSpec::new(run_id, run_seed, ids)?);
    }
    Ok(runs)
}

/// Asks every concept once with the run's fixed priming prefix.
///
/// Requests may run concurrently (`opts.parallelism`), but responses come
/// back in concept order. On a backend failure the run stops and the error
/// carries the failing concept and every response collected so far.
pub fn elicit_run(
    concepts: &[Concept],
    run: &RunSpec,
    examples: &[PrimingExample],
    template: &PromptTemplate,
    backend: &dyn CompletionBackend,
    params: &CompletionParams,
    opts: &RunOptions,
) -> Result<Vec<RawResponse>> {
    let ids: Vec<&str> = examples.iter().map(|e| e.concept.id.as_str()).collect();
    if ids != run.example_ids.iter().map(String::as_str).collect::<Vec<_>>() {
        return Err(Error::argument(format!(
            "examples {ids:?} do not match run {} examples {:?}",
            run.run_id, run.example_ids
        )));
    }
    let prefix = template.priming_prefix(examples)?;
    let slots: Vec<OnceLock<Result<(String, String), BackendError>>> =
        concepts.iter().map(|_| OnceLock::new()).collect();
    let next = AtomicUsize::new(0);
    let failed = AtomicBool::new(false);

    let worker = || loop {
        if failed.load(Ordering::SeqCst) {
            return;
        }
        let i = next.fetch_add(1, Ordering::SeqCst);
        if i >= concepts.len() {
            return;
        }
        let prompt = format!("{prefix}{}", template.open_question(&concepts[i]));
        let result = backend
            .complete(&prompt, params)
            .map(|text| (prompt_hash(&prompt), text));
        if result.is_err() {
            failed.store(true, Ordering::SeqCst);
        }
        let _ = slots[i].set(result);
    };
    let workers = opts.parallelism.clamp(1, concepts.len().max(1));
    if workers == 1 {
        worker();
    } else {
        std::thread::scope(|s| {
            for _ in 0..workers {
                s.spawn(worker);
            }
        });
    }

    let mut responses = Vec::with_capacity(concepts.len());
    let mut failure = None;
    for (concept, slot) in concepts.iter().zip(slots) {
        match slot.into_inner() {
            Some(Ok((hash, completion))) => responses.push(RawResponse {
                concept_id: concept.id.clone(),
                run_id: run.run_id,
                prompt_hash: hash,
                completion,
                model: params.model.clone(),
                params: params.sampling(),
            }),
            Some(Err(e)) if failure.is_none() => failure = Some((concept.id.clone(), e)),
            _ => {}
        }
    }
    match failure {
        None => Ok(responses),
        Some((concept_id, source)) => Err(Error::RunAborted {
            run_id: run.run_id,
            concept_id,
            partial: responses,
            source,
        }),
    }
}

#[allow(clippy::too_many_arguments)]
fn elicit_with<F>(
    concepts: &[Concept],
    n_runs: u32,
    pool: &[PrimingExample],
    template: &PromptTemplate,
    backend: &dyn CompletionBackend,
    params: &CompletionParams,
    seed: u64,
    opts: &RunOptions,
    mut on_run: F,
) -> Result<Vec<RawResponse>>
where
    F: FnMut(&RunSpec, std::result::Result<&[RawResponse], &[RawResponse]>) -> Result<()>,
{
    let runs = plan_runs(n_runs, pool, template.examples_per_prompt, seed)?;
    let mut corpus = Vec::with_capacity(concepts.len() * runs.len());
    for run in &runs {
        let examples: Vec<PrimingExample> = run
            .example_ids
            .iter()
            .map(|id| {
                pool.iter()
                    .find(|e| &e.concept.id == id)
                    .cloned()
                    .expect("planned from pool")
            })
            .collect();
        match elicit_run(concepts, run, &examples, template, backend, params, opts) {
            Ok(responses) => {
                on_run(run, Ok(&responses))?;
                corpus.extend(responses);
            }
            Err(Error::RunAborted {
                run_id,
                concept_id,
                partial,
                source,
            }) => {
                on_run(run, Err(&partial))?;
                return Err(Error::RunAborted {
                    run_id,
                    concept_id,
                    partial,
                    source,
                });
            }
            Err(e) => return Err(e),
        }
    }
    Ok(corpus)
}

/// Runs `n_runs` elicitation runs and returns the whole corpus, run by run.
#[allow(clippy::too_many_arguments)]
pub fn elicit_norm(
    concepts: &[Concept],
    n_runs: u32,
    pool: &[PrimingExample],
    template: &PromptTemplate,
    backend: &dyn CompletionBackend,
    params: &CompletionParams,
    seed: u64,
    opts: &RunOptions,
) -> Result<Vec<RawResponse>> {
    elicit_with(concepts, n_runs, pool, template, backend, params, seed, opts, |_, _| {
        Ok(())
    })
}

/// Like [`elicit_norm`], writing `run_{id}.jsonl` into `dir` as each run
/// finishes. An aborted run leaves `run_{id}.partial.jsonl` behind.
#[allow(clippy::too_many_arguments)]
pub fn elicit_norm_to_dir(
    concepts: &[Concept],
    n_runs: u32,
    pool: &[PrimingExample],
    template: &PromptTemplate,
    backend: &dyn CompletionBackend,
    params: &CompletionParams,
    seed: u64,
    opts: &RunOptions,
    dir: &Path,
) -> Result<Vec<RawResponse>> {
    elicit_with(
        concepts,
        n_runs,
        pool,
        template,
        backend,
        params,
        seed,
        opts,
        |run, outcome| {
            match outcome {
                Ok(responses) => write_run(dir, run.run_id, responses)?,
                Err(partial) => write_partial_run(dir, run.run_id, partial)?,
            };
            Ok(())
        },
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::elicitation::{read_corpus, to_jsonl, ReplayBackend, StubBackend};

    fn concepts(n: usize) -> Vec<Concept> {
        (0..n)
            .map(|i| Concept::new(format!("c{i:04}"), format!("thing{i}")).unwrap())
            .collect()
    }

    fn pool(n: usize) -> Vec<PrimingExample> {
        (0..n)
            .map(|i| {
                PrimingExample::new(
                    Concept::new(format!("e{i}"), format!("example{i}")).unwrap(),
                    vec![format!("it is example {i}"), "it is useful".into()],
                )
                .unwrap()
            })
            .collect()
    }

    fn params() -> CompletionParams {
        CompletionParams::new("stub", 0.0, 64)
    }

    #[test]
    fn stub_responses_share_text_not_hash() {
        let cs = concepts(5);
        let p = pool(3);
        let run = RunSpec::new(0, 1, vec!["e0".into(), "e1".into(), "e2".into()]).unwrap();
        let out = elicit_run(
            &cs,
            &run,
            &p,
            &PromptTemplate::default(),
            &StubBackend::fixed("It is red."),
            &params(),
            &RunOptions::default(),
        )
        .unwrap();
        assert_eq!(out.len(), 5);
        assert!(out.iter().all(|r| r.completion == "It is red."));
        let hashes: BTreeSet<&str> = out.iter().map(|r| r.prompt_hash.as_str()).collect();
        assert_eq!(hashes.len(), 5);
    }

    #[test]
    fn empty_concept_list() {
        let p = pool(3);
        let run = RunSpec::new(0, 1, vec!["e0".into(), "e1".into(), "e2".into()]).unwrap();
        let out = elicit_run(
            &[],
            &run,
            &p,
            &PromptTemplate::default(),
            &StubBackend::fixed("x"),
            &params(),
            &RunOptions::default(),
        )
        .unwrap();
        assert!(out.is_empty());
    }

    #[test]
    fn parallel_run_keeps_concept_order() {
        let cs = concepts(40);
        let p = pool(3);
        let run = plan_runs(1, &p, 3, 5).unwrap().remove(0);
        let examples: Vec<_> = run
            .example_ids
            .iter()
            .map(|id| p.iter().find(|e| &e.concept.id == id).unwrap().clone())
            .collect();
        let backend = StubBackend::from_fn(|prompt| format!("{}", prompt.len()));
        let t = PromptTemplate::default();
        let serial = elicit_run(&cs, &run, &examples, &t, &backend, &params(), &RunOptions::default()).unwrap();
        let parallel = elicit_run(
            &cs,
            &run,
            &examples,
            &t,
            &backend,
            &params(),
            &RunOptions { parallelism: 8 },
        )
        .unwrap();
        assert_eq!(serial, parallel);
        let ids: Vec<_> = parallel.iter().map(|r| r.concept_id.clone()).collect();
        assert_eq!(ids, cs.iter().map(|c| c.id.clone()).collect::<Vec<_>>());
    }

    #[test]
    fn runs_use_distinct_example_sets() {
        let runs = plan_runs(30, &pool(8), 3, 42).unwrap();
        assert_eq!(runs.len(), 30);
        let sets: BTreeSet<Vec<String>> = runs
            .iter()
            .map(|r| {
                let mut ids = r.example_ids.clone();
                ids.sort();
                ids
            })
            .collect();
        assert_eq!(sets.len(), 30);
        assert_eq!(runs, plan_runs(30, &pool(8), 3, 42).unwrap());
        // only one combination exists: every run reuses it
        let runs = plan_runs(4, &pool(3), 3, 1).unwrap();
        assert_eq!(runs.len(), 4);
    }

    #[test]
    fn pool_too_small() {
        assert!(plan_runs(1, &pool(2), 3, 0).is_err());
        assert!(plan_runs(0, &pool(5), 3, 0).is_err());
        let err = elicit_norm(
            &concepts(2),
            3,
            &pool(2),
            &PromptTemplate::default(),
            &StubBackend::fixed("x"),
            &params(),
            0,
            &RunOptions::default(),
        )
        .unwrap_err();
        assert!(matches!(err, Error::Argument(_)));
    }

    #[test]
    fn corpus_size_is_runs_times_concepts() {
        let corpus = elicit_norm(
            &concepts(7),
            4,
            &pool(5),
            &PromptTemplate::default(),
            &StubBackend::fixed("It is x."),
            &params(),
            3,
            &RunOptions::default(),
        )
        .unwrap();
        assert_eq!(corpus.len(), 28);
    }

    #[test]
    fn single_run_matches_elicit_run() {
        let cs = concepts(4);
        let p = pool(5);
        let t = PromptTemplate::default();
        let backend = StubBackend::from_fn(prompt_hash);
        let corpus = elicit_norm(&cs, 1, &p, &t, &backend, &params(), 11, &RunOptions::default()).unwrap();
        let run = plan_runs(1, &p, 3, 11).unwrap().remove(0);
        let examples: Vec<_> = run
            .example_ids
            .iter()
            .map(|id| p.iter().find(|e| &e.concept.id == id).unwrap().clone())
            .collect();
        let direct = elicit_run(&cs, &run, &examples, &t, &backend, &params(), &RunOptions::default()).unwrap();
        assert_eq!(corpus, direct);
    }

    #[test]
    fn replay_is_deterministic_and_aborts_cleanly() {
        let cs = concepts(6);
        let p = pool(6);
        let t = PromptTemplate::default();
        let recorder = StubBackend::from_fn(|prompt| format!("It is {}.", &prompt_hash(prompt)[..6]));
        let recorded = elicit_norm(&cs, 3, &p, &t, &recorder, &params(), 9, &RunOptions::default()).unwrap();
        let replay = ReplayBackend::from_responses(&recorded).unwrap();

        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        elicit_norm_to_dir(
            &cs,
            3,
            &p,
            &t,
            &replay,
            &params(),
            9,
            &RunOptions { parallelism: 3 },
            a.path(),
        )
        .unwrap();
        elicit_norm_to_dir(&cs, 3, &p, &t, &replay, &params(), 9, &RunOptions::default(), b.path()).unwrap();
        for run in 0..3 {
            let name = format!("run_{run}.jsonl");
            let x = std::fs::read(a.path().join(&name)).unwrap();
            let y = std::fs::read(b.path().join(&name)).unwrap();
            assert_eq!(x, y);
        }
        assert_eq!(read_corpus(a.path()).unwrap(), recorded);

        // a different seed produces prompts the store has never seen
        let c = tempfile::tempdir().unwrap();
        let mut more = cs.clone();
        more.push(Concept::new("zz", "unrecorded").unwrap());
        let err = elicit_norm_to_dir(
            &more,
            3,
            &p,
            &t,
            &replay,
            &params(),
            9,
            &RunOptions::default(),
            c.path(),
        )
        .unwrap_err();
        match err {
            Error::RunAborted {
                run_id,
                concept_id,
                partial,
                ..
            } => {
                assert_eq!(run_id, 0);
                assert_eq!(concept_id, "zz");
                assert_eq!(partial.len(), 6);
                let written = std::fs::read_to_string(c.path().join("run_0.partial.jsonl")).unwrap();
                assert_eq!(written, to_jsonl(&partial));
            }
            other => panic!("unexpected {other}"),
        }
    }
}
