use std::collections::HashSet;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Duration;

use relmine_core::augment::{
    execute_plan, plan_qc_augmentation, plan_qi_augmentation, ExecuteOptions, HttpTranslator,
    PrefixTranslator, TranslationPlan, Translator, QC_DEFAULT_QUOTA, QI_DEFAULT_QUOTA,
};
use relmine_core::cleanse::{cleanse, language_stats, Allowlist, CleanseOptions, NumericMode};
use relmine_core::corpus::{
    parse_record_file, write_record_file, LanguageTag, ParseOptions, Parsed, PathSeparator,
    QCRecord, QIRecord, Task, TsvRecord,
};
use relmine_core::embed::{batch_mine, load_embeddings, HardPick, MiningConfig, MiningMode};
use relmine_core::metrics::{evaluate, load_predictions, CrossTaskSummary, MetricsReport};
use relmine_core::report::{distribution_report, metrics_svg, to_stable_json};
use relmine_core::seed::DEFAULT_SEED;
use relmine_core::split::{partition_records, split_records, SplitMode, SplitName, DEFAULT_RATIOS};
use relmine_core::taxonomy::{
    build_taxonomy, generate_negatives, positive_keys, NegativeGenConfig, ProcessGenerator,
    QueryGenerator, Strategy, StubGenerator,
};
use serde::Serialize;

use crate::config::PipelineConfig;
use crate::{invalid, runtime, Command, Failure};

type Outcome = Result<(), Failure>;

fn summary(line: String) {
    eprintln!("{line}");
}

fn parse_task(text: &str) -> Result<Task, Failure> {
    text.parse()
        .map_err(|_| invalid(format!("unknown task {text:?} (expected qc or qi)")))
}

fn task(flag: &Option<String>, config: &PipelineConfig) -> Result<Task, Failure> {
    match flag.as_ref().or(config.task.as_ref()) {
        Some(t) => parse_task(t),
        None => Err(invalid("--task is required")),
    }
}

/// For commands that only make sense for one task.
fn expect_task(
    flag: &Option<String>,
    config: &PipelineConfig,
    expected: Task,
    command: &str,
) -> Outcome {
    match flag.as_ref().or(config.task.as_ref()) {
        Some(t) if parse_task(t)? != expected => Err(invalid(format!(
            "{command} only supports --task {expected}"
        ))),
        _ => Ok(()),
    }
}

fn parse_options(flag: &Option<String>, config: &PipelineConfig) -> Result<ParseOptions, Failure> {
    let path_separator = match flag.as_deref().or(config.path_separator.as_deref()) {
        None | Some("angle") => PathSeparator::Angle,
        Some("comma") => PathSeparator::Comma,
        Some(other) => {
            return Err(invalid(format!(
                "unknown path separator {other:?} (expected angle or comma)"
            )))
        }
    };
    Ok(ParseOptions { path_separator })
}

fn input(flag: Option<PathBuf>, config: &Option<PathBuf>, name: &str) -> Result<PathBuf, Failure> {
    let path = flag
        .or_else(|| config.clone())
        .ok_or_else(|| invalid(format!("--{name} is required")))?;
    if !path.exists() {
        return Err(invalid(format!(
            "--{name} {} does not exist",
            path.display()
        )));
    }
    Ok(path)
}

fn optional_input(
    flag: Option<PathBuf>,
    config: &Option<PathBuf>,
    name: &str,
) -> Result<Option<PathBuf>, Failure> {
    match flag.or_else(|| config.clone()) {
        Some(p) if !p.exists() => Err(invalid(format!("--{name} {} does not exist", p.display()))),
        other => Ok(other),
    }
}

fn output(flag: Option<PathBuf>, config: &Option<PathBuf>, name: &str) -> Result<PathBuf, Failure> {
    flag.or_else(|| config.clone())
        .ok_or_else(|| invalid(format!("--{name} is required")))
}

fn seed(flag: Option<u64>, stage: Option<u64>, config: &PipelineConfig) -> u64 {
    flag.or(stage).or(config.seed).unwrap_or(DEFAULT_SEED)
}

fn read_corpus<R: TsvRecord>(path: &Path, options: ParseOptions) -> Result<Parsed<R>, Failure> {
    parse_record_file(path, options).map_err(|e| runtime(format!("{}: {e}", path.display())))
}

fn write_corpus<R: TsvRecord>(path: &Path, records: &[R]) -> Outcome {
    write_record_file(path, records).map_err(|e| runtime(format!("{}: {e}", path.display())))
}

fn write_text(path: &Path, text: &str) -> Outcome {
    fs::write(path, text).map_err(|e| runtime(format!("cannot write {}: {e}", path.display())))
}

fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Outcome {
    write_text(path, &(to_stable_json(value) + "\n"))
}

fn skipped(parsed_diagnostics: usize) -> String {
    if parsed_diagnostics == 0 {
        String::new()
    } else {
        format!(", {parsed_diagnostics} input lines skipped")
    }
}

macro_rules! by_task {
    ($task:expr, $f:ident ( $($arg:expr),* )) => {
        match $task {
            Task::Qc => $f::<QCRecord>($($arg),*),
            Task::Qi => $f::<QIRecord>($($arg),*),
        }
    };
}

pub(crate) fn dispatch(command: Command, config: &PipelineConfig) -> Outcome {
    match command {
        Command::Ingest {
            common,
            out,
            diagnostics,
        } => {
            let t = task(&common.task, config)?;
            let opts = parse_options(&common.path_separator, config)?;
            let c = &config.ingest;
            let inp = input(common.input, &c.input, "in")?;
            let out = output(out, &c.output, "out")?;
            let diagnostics = diagnostics.or_else(|| c.diagnostics.clone());
            by_task!(t, ingest(&inp, opts, &out, diagnostics.as_deref()))
        }
        Command::Clean {
            common,
            out,
            allowlist,
            report,
            no_conflicts,
            no_dedup,
            no_numeric,
            numeric_mode,
        } => {
            let t = task(&common.task, config)?;
            let opts = parse_options(&common.path_separator, config)?;
            let c = &config.clean;
            let inp = input(common.input, &c.input, "in")?;
            let out = output(out, &c.output, "out")?;
            let allowlist = match optional_input(allowlist, &c.allowlist, "allowlist")? {
                Some(p) => Allowlist::load(&p).map_err(runtime)?,
                None => Allowlist::default(),
            };
            let numeric_mode = match numeric_mode.as_deref().or(c.numeric_mode.as_deref()) {
                None | Some("ignore-punctuation") => NumericMode::IgnorePunctuation,
                Some("digits-only") => NumericMode::DigitsOnly,
                Some(other) => {
                    return Err(invalid(format!(
                    "unknown numeric mode {other:?} (expected ignore-punctuation or digits-only)"
                )))
                }
            };
            let options = CleanseOptions {
                remove_conflicts: !no_conflicts && c.remove_conflicts.unwrap_or(true),
                dedup: !no_dedup && c.dedup.unwrap_or(true),
                filter_numeric: !no_numeric && c.filter_numeric.unwrap_or(true),
                numeric_mode,
            };
            let report = report.or_else(|| c.report.clone());
            by_task!(
                t,
                clean(&inp, opts, &out, &options, &allowlist, report.as_deref())
            )
        }
        Command::Stats { common, out, csv } => {
            let t = task(&common.task, config)?;
            let opts = parse_options(&common.path_separator, config)?;
            let c = &config.stats;
            let inp = input(common.input, &c.input, "in")?;
            let out = out.or_else(|| c.output.clone());
            let csv = csv.or_else(|| c.csv.clone());
            by_task!(t, stats(&inp, opts, out.as_deref(), csv.as_deref()))
        }
        Command::Taxonomy { common, out } => {
            expect_task(&common.task, config, Task::Qc, "taxonomy")?;
            let opts = parse_options(&common.path_separator, config)?;
            let c = &config.taxonomy;
            let inp = input(common.input, &c.input, "in")?;
            let out = output(out, &c.output, "out")?;
            taxonomy(&inp, opts, &out)
        }
        Command::GenNegatives {
            common,
            out,
            strategy,
            seed: seed_flag,
            max_resamples,
            generator,
            generator_args,
            diagnostics,
        } => {
            expect_task(&common.task, config, Task::Qc, "gen-negatives")?;
            let opts = parse_options(&common.path_separator, config)?;
            let c = &config.negatives;
            let inp = input(common.input, &c.input, "in")?;
            let out = output(out, &c.output, "out")?;
            let strategy: Strategy = strategy
                .as_deref()
                .or(c.strategy.as_deref())
                .ok_or_else(|| invalid("--strategy is required"))?
                .parse()
                .map_err(invalid)?;
            let mut gen_config = NegativeGenConfig::new(strategy, seed(seed_flag, c.seed, config));
            if let Some(m) = max_resamples.or(c.max_resamples) {
                if m == 0 {
                    return Err(invalid("--max-resamples must be positive"));
                }
                gen_config.max_resamples = m;
            }
            let generator_cmd: Option<Vec<String>> = match generator {
                Some(program) => Some(std::iter::once(program).chain(generator_args).collect()),
                None => c.generator.clone(),
            };
            if strategy == Strategy::SyntheticQuery && generator_cmd.is_none() {
                return Err(invalid(
                    "synthetic-query needs --generator (a program, or `stub`)",
                ));
            }
            let diagnostics = diagnostics.or_else(|| c.diagnostics.clone());
            gen_negatives(
                &inp,
                opts,
                &out,
                &gen_config,
                generator_cmd,
                diagnostics.as_deref(),
            )
        }
        Command::Mine {
            common,
            out,
            embeddings,
            mode,
            tau,
            hard_pick,
            seed: seed_flag,
            diagnostics,
        } => {
            expect_task(&common.task, config, Task::Qi, "mine")?;
            let opts = parse_options(&common.path_separator, config)?;
            let c = &config.mining;
            let inp = input(common.input, &c.input, "in")?;
            let embeddings = input(embeddings, &c.embeddings, "embeddings")?;
            let out = output(out, &c.output, "out")?;
            let mode: MiningMode = mode
                .as_deref()
                .or(c.mode.as_deref())
                .unwrap_or("hard")
                .parse()
                .map_err(invalid)?;
            let mut mining = MiningConfig::new(mode);
            if let Some(t) = tau.or(c.tau) {
                mining.hard_threshold = t;
            }
            if let Some(p) = hard_pick.as_deref().or(c.hard_pick.as_deref()) {
                mining.hard_pick = p.parse::<HardPick>().map_err(invalid)?;
            }
            mining.seed = seed(seed_flag, c.seed, config);
            mining.validate().map_err(invalid)?;
            let diagnostics = diagnostics.or_else(|| c.diagnostics.clone());
            mine(
                &inp,
                opts,
                &embeddings,
                &out,
                &mining,
                diagnostics.as_deref(),
            )
        }
        Command::AugmentPlan {
            common,
            dev,
            out,
            targets,
            quota,
            seed: seed_flag,
        } => {
            let t = task(&common.task, config)?;
            let opts = parse_options(&common.path_separator, config)?;
            let c = &config.augment;
            let inp = input(common.input, &c.input, "in")?;
            let out = output(out, &c.plan, "out")?;
            let targets = match (targets, &c.targets) {
                (Some(list), _) => LanguageTag::parse_list(&list).map_err(invalid)?,
                (None, Some(list)) => LanguageTag::parse_list(&list.join(",")).map_err(invalid)?,
                (None, None) => match t {
                    Task::Qc => LanguageTag::QC_AUGMENT_TARGETS.to_vec(),
                    Task::Qi => LanguageTag::QI_AUGMENT_TARGETS.to_vec(),
                },
            };
            let quota = quota.or(c.quota).unwrap_or(match t {
                Task::Qc => QC_DEFAULT_QUOTA,
                Task::Qi => QI_DEFAULT_QUOTA,
            });
            let seed = seed(seed_flag, c.seed, config);
            let plan = match t {
                Task::Qc => {
                    let dev = input(dev, &c.dev, "dev")?;
                    let train = read_corpus::<QCRecord>(&inp, opts)?;
                    let dev = read_corpus::<QCRecord>(&dev, opts)?;
                    let dev_paths: HashSet<_> = dev.records.into_iter().map(|r| r.path).collect();
                    plan_qc_augmentation(&train.records, &dev_paths, &targets, quota, seed)
                }
                Task::Qi => {
                    let train = read_corpus::<QIRecord>(&inp, opts)?;
                    plan_qi_augmentation(&train.records, &targets, quota, seed)
                }
            }
            .map_err(runtime)?;
            write_text(&out, &(plan.to_json() + "\n"))?;
            let per_language: Vec<String> = plan
                .languages
                .iter()
                .map(|l| format!("{}={}", l.target, l.sources.len()))
                .collect();
            summary(format!(
                "augment-plan: {} translations planned ({})",
                plan.total(),
                per_language.join(" ")
            ));
            Ok(())
        }
        Command::AugmentRun {
            common,
            plan,
            out,
            translator,
            batch_size,
            retries,
            concurrency,
            timeout,
            diagnostics,
        } => {
            let opts = parse_options(&common.path_separator, config)?;
            let c = &config.augment;
            let inp = input(common.input, &c.input, "in")?;
            let plan_path = input(plan, &c.plan, "plan")?;
            let out = output(out, &c.output, "out")?;
            let plan = TranslationPlan::load(&plan_path).map_err(invalid)?;
            if common.task.is_some() || config.task.is_some() {
                let t = task(&common.task, config)?;
                if t != plan.task {
                    return Err(invalid(format!(
                        "plan is for {} but --task is {t}",
                        plan.task
                    )));
                }
            }
            let defaults = ExecuteOptions::default();
            let options = ExecuteOptions {
                batch_size: batch_size.or(c.batch_size).unwrap_or(defaults.batch_size),
                retries: retries.or(c.retries).unwrap_or(defaults.retries),
                concurrency: concurrency
                    .or(c.concurrency)
                    .unwrap_or(defaults.concurrency),
            };
            if options.batch_size == 0 || options.concurrency == 0 {
                return Err(invalid("--batch-size and --concurrency must be positive"));
            }
            let timeout = Duration::from_secs(timeout.or(c.timeout_secs).unwrap_or(60));
            let translator: Box<dyn Translator> =
                match translator.as_deref().or(c.translator.as_deref()) {
                    None | Some("stub") => Box::new(PrefixTranslator),
                    Some(url) if url.starts_with("http://") || url.starts_with("https://") => {
                        Box::new(HttpTranslator::new(url, timeout))
                    }
                    Some(other) => {
                        return Err(invalid(format!(
                            "--translator must be `stub` or an http(s) URL, got {other:?}"
                        )))
                    }
                };
            let diagnostics = diagnostics.or_else(|| c.diagnostics.clone());
            by_task!(
                plan.task,
                augment_run(
                    &inp,
                    opts,
                    &plan,
                    translator.as_ref(),
                    &options,
                    &out,
                    diagnostics.as_deref()
                )
            )
        }
        Command::Split {
            common,
            out_dir,
            mode,
            ratios,
            seed: seed_flag,
        } => {
            let t = task(&common.task, config)?;
            let opts = parse_options(&common.path_separator, config)?;
            let c = &config.split;
            let inp = input(common.input, &c.input, "in")?;
            let out_dir = output(out_dir, &c.output_dir, "out-dir")?;
            let mode: SplitMode = mode
                .as_deref()
                .or(c.mode.as_deref())
                .unwrap_or("query-disjoint")
                .parse()
                .map_err(invalid)?;
            let ratios = match ratios {
                Some(text) => parse_ratios(&text)?,
                None => c.ratios.unwrap_or(DEFAULT_RATIOS),
            };
            relmine_core::split::validate_ratios(&ratios).map_err(invalid)?;
            let seed = seed(seed_flag, c.seed, config);
            by_task!(t, split(&inp, opts, &out_dir, mode, ratios, seed))
        }
        Command::Evaluate {
            task: task_flag,
            gold,
            predictions,
            path_separator,
            out,
            svg,
            with,
            average_out,
        } => {
            let t = task(&task_flag, config)?;
            let opts = parse_options(&path_separator, config)?;
            let c = &config.evaluate;
            let gold = input(gold, &c.gold, "gold")?;
            let predictions = input(predictions, &c.predictions, "pred")?;
            let others = if with.is_empty() {
                c.with.clone()
            } else {
                with
            };
            if let Some(missing) = others.iter().find(|p| !p.exists()) {
                return Err(invalid(format!(
                    "--with {} does not exist",
                    missing.display()
                )));
            }
            let targets = EvaluateTargets {
                out: out.or_else(|| c.output.clone()),
                svg: svg.or_else(|| c.svg.clone()),
                others,
                average_out: average_out.or_else(|| c.average_output.clone()),
            };
            by_task!(t, evaluate_cmd(&gold, opts, &predictions, &targets))
        }
        Command::Report {
            common,
            out,
            svg,
            csv,
            title,
        } => {
            let t = task(&common.task, config)?;
            let opts = parse_options(&common.path_separator, config)?;
            let c = &config.report;
            let inp = input(common.input, &c.input, "in")?;
            let title = title.or_else(|| c.title.clone()).unwrap_or_else(|| {
                format!(
                    "{} label distribution by language",
                    t.to_string().to_uppercase()
                )
            });
            let out = out.or_else(|| c.output.clone());
            let svg = svg.or_else(|| c.svg.clone());
            let csv = csv.or_else(|| c.csv.clone());
            by_task!(
                t,
                report(
                    &inp,
                    opts,
                    &title,
                    out.as_deref(),
                    svg.as_deref(),
                    csv.as_deref()
                )
            )
        }
    }
}

fn parse_ratios(text: &str) -> Result<[f64; 3], Failure> {
    let parts: Vec<f64> = text
        .split(',')
        .map(|p| p.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| invalid(format!("--ratios {text:?} is not a list of numbers")))?;
    <[f64; 3]>::try_from(parts).map_err(|_| invalid("--ratios needs exactly three values"))
}

fn ingest<R: TsvRecord>(
    inp: &Path,
    opts: ParseOptions,
    out: &Path,
    diagnostics: Option<&Path>,
) -> Outcome {
    let parsed = read_corpus::<R>(inp, opts)?;
    write_corpus(out, &parsed.records)?;
    if let Some(d) = diagnostics {
        write_json(d, &parsed.diagnostics)?;
    }
    summary(format!(
        "ingest: {} records, {} diagnostics",
        parsed.records.len(),
        parsed.diagnostics.len()
    ));
    Ok(())
}

fn clean<R: TsvRecord>(
    inp: &Path,
    opts: ParseOptions,
    out: &Path,
    options: &CleanseOptions,
    allowlist: &Allowlist,
    report: Option<&Path>,
) -> Outcome {
    let parsed = read_corpus::<R>(inp, opts)?;
    let result = cleanse(parsed.records, options, allowlist);
    write_corpus(out, &result.records)?;
    let json = to_stable_json(&result.report);
    if let Some(p) = report {
        write_text(p, &(json.clone() + "\n"))?;
    }
    println!("{json}");
    let r = &result.report;
    summary(format!(
        "clean: {} -> {} records ({} conflicting, {} duplicate, {} numeric removed, {} allowlisted kept{})",
        r.input,
        r.kept,
        r.conflicts_removed,
        r.duplicates_removed,
        r.numeric_removed,
        r.allowlisted_kept,
        skipped(parsed.diagnostics.len())
    ));
    Ok(())
}

fn stats<R: TsvRecord>(
    inp: &Path,
    opts: ParseOptions,
    out: Option<&Path>,
    csv: Option<&Path>,
) -> Outcome {
    let parsed = read_corpus::<R>(inp, opts)?;
    let stats = language_stats(&parsed.records);
    let json = to_stable_json(&stats);
    if let Some(p) = out {
        write_text(p, &(json.clone() + "\n"))?;
    }
    if let Some(p) = csv {
        write_text(p, &stats.to_csv())?;
    }
    println!("{json}");
    summary(format!(
        "stats: {} records in {} languages ({} positive, {} negative{})",
        stats.totals.total,
        stats.languages.len(),
        stats.totals.positives,
        stats.totals.negatives,
        skipped(parsed.diagnostics.len())
    ));
    Ok(())
}

fn taxonomy(inp: &Path, opts: ParseOptions, out: &Path) -> Outcome {
    let parsed = read_corpus::<QCRecord>(inp, opts)?;
    let tree = build_taxonomy(parsed.records.iter().map(|r| &r.path));
    write_json(out, &tree.to_json())?;
    summary(format!(
        "taxonomy: {} nodes, {} roots, {} observed paths{}",
        tree.len(),
        tree.root_count(),
        tree.observed_leaves().len(),
        skipped(parsed.diagnostics.len())
    ));
    Ok(())
}

fn gen_negatives(
    inp: &Path,
    opts: ParseOptions,
    out: &Path,
    config: &NegativeGenConfig,
    generator_cmd: Option<Vec<String>>,
    diagnostics: Option<&Path>,
) -> Outcome {
    let parsed = read_corpus::<QCRecord>(inp, opts)?;
    let tree = build_taxonomy(parsed.records.iter().map(|r| &r.path));
    let positives = positive_keys(&parsed.records);
    let generator: Option<Box<dyn QueryGenerator>> = match (config.strategy, generator_cmd) {
        (Strategy::SyntheticQuery, Some(cmd)) if cmd.len() == 1 && cmd[0] == "stub" => {
            Some(Box::new(StubGenerator))
        }
        (Strategy::SyntheticQuery, Some(cmd)) => Some(Box::new(
            ProcessGenerator::spawn(&cmd[0], &cmd[1..]).map_err(runtime)?,
        )),
        _ => None,
    };
    let result = generate_negatives(
        &parsed.records,
        &tree,
        &positives,
        config,
        generator.as_deref(),
    );
    write_corpus(out, &result.negatives)?;
    if let Some(d) = diagnostics {
        write_json(d, &result.diagnostics)?;
    }
    summary(format!(
        "gen-negatives: {} negatives ({}, seed {}), {} diagnostics{}",
        result.negatives.len(),
        config.strategy,
        config.seed,
        result.diagnostics.len(),
        skipped(parsed.diagnostics.len())
    ));
    Ok(())
}

fn mine(
    inp: &Path,
    opts: ParseOptions,
    embeddings: &Path,
    out: &Path,
    config: &MiningConfig,
    diagnostics: Option<&Path>,
) -> Outcome {
    let parsed = read_corpus::<QIRecord>(inp, opts)?;
    let (store, load_diagnostics) = load_embeddings::<f32>(embeddings)
        .map_err(|e| runtime(format!("{}: {e}", embeddings.display())))?;
    let result = batch_mine(&parsed.records, &store, config).map_err(runtime)?;
    let negatives: Vec<QIRecord> = result.negatives.iter().map(|(r, _)| r.clone()).collect();
    write_corpus(out, &negatives)?;
    if let Some(d) = diagnostics {
        #[derive(Serialize)]
        struct Diagnostics<'a> {
            embeddings: &'a [relmine_core::embed::LoadDiagnostic],
            mining: &'a [relmine_core::embed::MiningDiagnostic],
        }
        write_json(
            d,
            &Diagnostics {
                embeddings: &load_diagnostics,
                mining: &result.diagnostics,
            },
        )?;
    }
    summary(format!(
        "mine: {} {} negatives, {} diagnostics, {} vectors skipped{}",
        negatives.len(),
        config.mode,
        result.diagnostics.len(),
        load_diagnostics.len(),
        skipped(parsed.diagnostics.len())
    ));
    Ok(())
}

fn augment_run<R: TsvRecord>(
    inp: &Path,
    opts: ParseOptions,
    plan: &TranslationPlan,
    translator: &dyn Translator,
    options: &ExecuteOptions,
    out: &Path,
    diagnostics: Option<&Path>,
) -> Outcome {
    let parsed = read_corpus::<R>(inp, opts)?;
    let result = execute_plan(plan, &parsed.records, translator, options).map_err(runtime)?;
    write_corpus(out, &result.records)?;
    if let Some(d) = diagnostics {
        write_json(d, &result.diagnostics)?;
    }
    summary(format!(
        "augment-run: {} of {} planned records translated, {} diagnostics",
        result.records.len(),
        plan.total(),
        result.diagnostics.len()
    ));
    Ok(())
}

fn split<R: TsvRecord>(
    inp: &Path,
    opts: ParseOptions,
    out_dir: &Path,
    mode: SplitMode,
    ratios: [f64; 3],
    seed: u64,
) -> Outcome {
    let parsed = read_corpus::<R>(inp, opts)?;
    let manifest = split_records(&parsed.records, mode, ratios, seed).map_err(invalid)?;
    let parts = partition_records(&parsed.records, &manifest).map_err(runtime)?;
    fs::create_dir_all(out_dir)
        .map_err(|e| runtime(format!("cannot create {}: {e}", out_dir.display())))?;
    for (name, records) in SplitName::ALL.iter().zip(&parts) {
        write_corpus(&out_dir.join(format!("{name}.tsv")), records)?;
    }
    write_text(&out_dir.join("manifest.json"), &(manifest.to_json() + "\n"))?;
    summary(format!(
        "split: {mode} seed {seed}: train {}, validation {}, test {}{}",
        parts[0].len(),
        parts[1].len(),
        parts[2].len(),
        skipped(parsed.diagnostics.len())
    ));
    Ok(())
}

struct EvaluateTargets {
    out: Option<PathBuf>,
    svg: Option<PathBuf>,
    others: Vec<PathBuf>,
    average_out: Option<PathBuf>,
}

fn evaluate_cmd<R: TsvRecord>(
    gold: &Path,
    opts: ParseOptions,
    predictions: &Path,
    targets: &EvaluateTargets,
) -> Outcome {
    let parsed = read_corpus::<R>(gold, opts)?;
    if let Some(d) = parsed.diagnostics.first() {
        return Err(runtime(format!(
            "{}: line {}: {} (gold files must parse cleanly so indices align)",
            gold.display(),
            d.line,
            d.reason
        )));
    }
    let labels = load_predictions(predictions, parsed.records.len()).map_err(runtime)?;
    let report = evaluate(&parsed.records, &labels).map_err(runtime)?;
    let mut table = report.to_table();
    if let Some(p) = &targets.out {
        write_text(p, &(report.to_json() + "\n"))?;
    }
    if let Some(p) = &targets.svg {
        write_text(
            p,
            &metrics_svg(
                &report,
                &format!("{} F1 by language", R::TASK.to_string().to_uppercase()),
            ),
        )?;
    }
    if !targets.others.is_empty() {
        let mut reports = vec![report.clone()];
        for path in &targets.others {
            let text = fs::read_to_string(path)
                .map_err(|e| runtime(format!("{}: {e}", path.display())))?;
            let other: MetricsReport = serde_json::from_str(&text)
                .map_err(|e| runtime(format!("{}: {e}", path.display())))?;
            reports.push(other);
        }
        let cross = CrossTaskSummary::from_reports(&reports);
        let names: Vec<String> = cross.tasks.keys().map(Task::to_string).collect();
        table.push_str(&format!(
            "average f1 ({}): {:.5}\n",
            names.join(", "),
            cross.average_f1
        ));
        if let Some(p) = &targets.average_out {
            write_json(p, &cross)?;
        }
    }
    print!("{table}");
    summary(format!(
        "evaluate: {} pairs, micro f1 {:.4}, macro f1 {:.4}",
        report.pairs, report.micro.f1, report.macro_f1
    ));
    Ok(())
}

fn report<R: TsvRecord>(
    inp: &Path,
    opts: ParseOptions,
    title: &str,
    out: Option<&Path>,
    svg: Option<&Path>,
    csv: Option<&Path>,
) -> Outcome {
    let parsed = read_corpus::<R>(inp, opts)?;
    let dist = distribution_report(&parsed.records, title);
    let json = to_stable_json(&dist.stats);
    if let Some(p) = out {
        write_text(p, &(json.clone() + "\n"))?;
    }
    if let Some(p) = svg {
        write_text(p, &dist.svg)?;
    }
    if let Some(p) = csv {
        write_text(p, &dist.stats.to_csv())?;
    }
    println!("{json}");
    summary(format!(
        "report: {} languages, {} positive, {} negative{}",
        dist.stats.languages.len(),
        dist.stats.totals.positives,
        dist.stats.totals.negatives,
        skipped(parsed.diagnostics.len())
    ));
    Ok(())
}
