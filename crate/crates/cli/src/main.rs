//! `wsd` — build co-occurrence bags, disambiguate target occurrences,
//! evaluate against gold labels, and probe lemma distances.
//!
//! Data goes to stdout or the named output file; diagnostics go to
//! stderr. All commands are deterministic for fixed inputs.

mod config;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use config::Settings;
use wsd_core::bags::{build_bags, find_examples, harvest_synonyms, BagSet};
use wsd_core::concept::{word_distance_witness, ConceptHierarchy, Lexicon};
use wsd_core::corpus::{load_corpus, load_gold, Sentence};
use wsd_core::disambig::{
    disambiguate_batch, load_decisions, save_decisions, ScoreOptions, Strategy, WorkItem,
};
use wsd_core::eval::{baseline_line, evaluate, random_baseline, staged_evaluate, Report};
use wsd_core::SynonymSet;

#[derive(Parser)]
#[command(name = "wsd", version, about = "Co-occurrence based word-sense disambiguation")]
struct Cli {
    #[command(flatten)]
    common: CommonArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonArgs {
    /// Flat key=value settings file; command-line flags override it
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Concept hierarchy TSV
    #[arg(long, global = true)]
    hierarchy: Option<PathBuf>,
    /// Sense lexicon TSV
    #[arg(long, global = true)]
    lexicon: Option<PathBuf>,
    /// Dependency-parsed corpus
    #[arg(long, global = true)]
    corpus: Option<PathBuf>,
    /// Co-occurrence bags file (output of `build`, input elsewhere)
    #[arg(long, global = true)]
    bags: Option<PathBuf>,
    /// Gold annotations TSV
    #[arg(long, global = true)]
    gold: Option<PathBuf>,
    /// Decisions file (output of `disambiguate`, input of `evaluate`)
    #[arg(long, global = true)]
    decisions: Option<PathBuf>,
    /// File of lemmas to exclude from synonym harvesting, one per line
    #[arg(long, global = true)]
    exclusions: Option<PathBuf>,
    /// Target lemma; repeatable
    #[arg(long, global = true)]
    target: Vec<String>,
    /// Synonym harvest radius in hierarchy edges
    #[arg(long, global = true)]
    radius: Option<u32>,
    /// Synonym cap per sense
    #[arg(long, global = true)]
    cap: Option<usize>,
    /// Match keys and bag words only at the same structural position
    #[arg(long, global = true)]
    positional: bool,
    /// Disambiguation strategy: basic or sequential
    #[arg(long, global = true, value_parser = clap_strategy_parser)]
    strategy: Option<Strategy>,
    /// Do not double-weight governor/dependent words when building bags
    #[arg(long = "no-collection-weight", global = true)]
    no_collection_weight: bool,
    /// Do not double-weight governor/dependent key words when scoring
    #[arg(long = "no-query-weight", global = true)]
    no_query_weight: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Harvest synonyms per sense and accumulate co-occurrence bags
    Build,
    /// Decide the sense of every gold/target occurrence
    Disambiguate,
    /// Score a decisions file against gold annotations
    Evaluate {
        /// Also report the early-answer and fallback partitions
        #[arg(long)]
        staged: bool,
        /// Aligned plain-text rendering instead of TSV
        #[arg(long)]
        pretty: bool,
    },
    /// Print the semantic distance between two lemmas
    Distance { word1: String, word2: String },
}

fn clap_strategy_parser(s: &str) -> Result<Strategy, String> {
    s.parse().map_err(|()| format!("`{s}` is not `basic` or `sequential`"))
}

impl CommonArgs {
    fn into_settings(self) -> Result<Settings> {
        let mut settings = Settings::default();
        if let Some(path) = &self.config {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading config file {}", path.display()))?;
            settings.apply_config(&text)?;
        }
        macro_rules! override_path {
            ($field:ident) => {
                if let Some(v) = self.$field {
                    settings.$field = Some(v);
                }
            };
        }
        override_path!(hierarchy);
        override_path!(lexicon);
        override_path!(corpus);
        override_path!(bags);
        override_path!(gold);
        override_path!(decisions);
        override_path!(exclusions);
        if !self.target.is_empty() {
            settings.targets = self.target;
        }
        if let Some(radius) = self.radius {
            settings.radius = radius;
        }
        if let Some(cap) = self.cap {
            settings.cap = cap;
        }
        if self.positional {
            settings.positional = true;
        }
        if let Some(strategy) = self.strategy {
            settings.strategy = strategy;
        }
        if self.no_collection_weight {
            settings.weight_collection = false;
        }
        if self.no_query_weight {
            settings.weight_query = false;
        }
        settings.validate()?;
        Ok(settings)
    }
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    let settings = cli.common.into_settings()?;
    match cli.command {
        Command::Build => cmd_build(&settings),
        Command::Disambiguate => cmd_disambiguate(&settings),
        Command::Evaluate { staged, pretty } => cmd_evaluate(&settings, staged, pretty),
        Command::Distance { word1, word2 } => cmd_distance(&settings, &word1, &word2),
    }
}

fn require<'a>(path: &'a Option<PathBuf>, what: &str) -> Result<&'a Path> {
    path.as_deref()
        .ok_or_else(|| anyhow!("missing {what} path: pass --{what} or set `{what}` in the config file"))
}

fn open(path: &Path, what: &str) -> Result<BufReader<File>> {
    Ok(BufReader::new(File::open(path).with_context(|| {
        format!("opening {what} file {}", path.display())
    })?))
}

fn load_hierarchy(settings: &Settings) -> Result<ConceptHierarchy> {
    let path = require(&settings.hierarchy, "hierarchy")?;
    ConceptHierarchy::load(open(path, "hierarchy")?)
        .with_context(|| format!("loading hierarchy {}", path.display()))
}

fn load_lexicon(settings: &Settings, hierarchy: &ConceptHierarchy) -> Result<Lexicon> {
    let path = require(&settings.lexicon, "lexicon")?;
    Lexicon::load(open(path, "lexicon")?, hierarchy)
        .with_context(|| format!("loading lexicon {}", path.display()))
}

fn load_corpus_file(settings: &Settings) -> Result<Vec<Sentence>> {
    let path = require(&settings.corpus, "corpus")?;
    load_corpus(open(path, "corpus")?).with_context(|| format!("loading corpus {}", path.display()))
}

fn load_exclusions(settings: &Settings) -> Result<BTreeSet<String>> {
    let Some(path) = &settings.exclusions else {
        return Ok(BTreeSet::new());
    };
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading exclusions file {}", path.display()))?;
    Ok(text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(str::to_string)
        .collect())
}

fn score_options(settings: &Settings) -> ScoreOptions {
    ScoreOptions {
        positional: settings.positional,
        query_weight: settings.weight_query,
    }
}

fn cmd_build(settings: &Settings) -> Result<()> {
    if settings.targets.is_empty() {
        bail!("build needs at least one --target lemma");
    }
    let hierarchy = load_hierarchy(settings)?;
    let lexicon = load_lexicon(settings, &hierarchy)?;
    let corpus = load_corpus_file(settings)?;
    let exclusions = load_exclusions(settings)?;
    let out_path = require(&settings.bags, "bags")?;

    let mut targets: Vec<&String> = settings.targets.iter().collect();
    targets.sort();
    targets.dedup();

    let mut bag_set = BagSet::new();
    // (target, sense) -> (synonym count, occurrence count, bag total)
    let mut summary: BTreeMap<(String, String), (usize, usize, u64)> = BTreeMap::new();
    for target in targets {
        let senses = lexicon.distinct_senses_of(target);
        if senses.is_empty() {
            bail!("target lemma `{target}` has no senses in the lexicon");
        }
        let mut sets: Vec<SynonymSet> = Vec::new();
        for sense in senses {
            let set = harvest_synonyms(
                &hierarchy,
                &lexicon,
                target,
                sense.as_str(),
                settings.radius,
                settings.cap,
                &exclusions,
            )?;
            if set.synonyms.is_empty() {
                eprintln!("warning: sense `{sense}` of `{target}` yields no synonyms; skipped");
                continue;
            }
            sets.push(set);
        }
        let occurrences: Vec<usize> = sets.iter().map(|s| find_examples(&corpus, s).len()).collect();
        let bags = build_bags(&corpus, &sets, settings.weight_collection);
        for (set, occ) in sets.iter().zip(occurrences) {
            let total = bags.get(set.sense.as_str()).map_or(0, |b| b.total());
            summary.insert(
                (target.clone(), set.sense.as_str().to_string()),
                (set.synonyms.len(), occ, total),
            );
        }
        bag_set.insert(target, bags);
    }

    let mut out = BufWriter::new(
        File::create(out_path).with_context(|| format!("creating bags file {}", out_path.display()))?,
    );
    bag_set.save(&mut out)?;
    out.flush()?;

    println!("# target\tsense\tsynonyms\toccurrences\tbag_total");
    for ((target, sense), (syn, occ, total)) in summary {
        println!("{target}\t{sense}\t{syn}\t{occ}\t{total}");
    }
    Ok(())
}

fn cmd_disambiguate(settings: &Settings) -> Result<()> {
    let hierarchy = load_hierarchy(settings)?;
    let lexicon = load_lexicon(settings, &hierarchy)?;
    let corpus = load_corpus_file(settings)?;
    let bags_path = require(&settings.bags, "bags")?;
    let bags = BagSet::load(open(bags_path, "bags")?)
        .with_context(|| format!("loading bags {}", bags_path.display()))?;
    let out_path = require(&settings.decisions, "decisions")?;

    let by_id: HashMap<&str, usize> = corpus
        .iter()
        .enumerate()
        .map(|(i, s)| (s.id.as_str(), i))
        .collect();

    let mut items: Vec<WorkItem> = Vec::new();
    if let Some(gold_path) = &settings.gold {
        let gold = load_gold(open(gold_path, "gold")?)
            .with_context(|| format!("loading gold {}", gold_path.display()))?;
        for item in &gold {
            if !settings.targets.is_empty() && !settings.targets.contains(&item.target_lemma) {
                continue;
            }
            let &sentence = by_id
                .get(item.sentence_id.as_str())
                .ok_or_else(|| anyhow!("gold refers to unknown sentence `{}`", item.sentence_id))?;
            let token = corpus[sentence].token(item.token_index).ok_or_else(|| {
                anyhow!(
                    "gold refers to missing token {} in sentence `{}`",
                    item.token_index,
                    item.sentence_id
                )
            })?;
            if token.lemma != item.target_lemma {
                bail!(
                    "gold target `{}` does not match token lemma `{}` at ({}, {})",
                    item.target_lemma,
                    token.lemma,
                    item.sentence_id,
                    item.token_index
                );
            }
            items.push(WorkItem {
                sentence,
                token: item.token_index,
            });
        }
    } else {
        if settings.targets.is_empty() {
            bail!("disambiguate needs --gold or at least one --target lemma");
        }
        for (i, sentence) in corpus.iter().enumerate() {
            for token in sentence.tokens() {
                if settings.targets.contains(&token.lemma) {
                    items.push(WorkItem {
                        sentence: i,
                        token: token.index,
                    });
                }
            }
        }
    }

    let records = disambiguate_batch(
        &corpus,
        &items,
        &bags,
        &hierarchy,
        &lexicon,
        score_options(settings),
        settings.strategy,
    )?;

    let mut out = BufWriter::new(
        File::create(out_path)
            .with_context(|| format!("creating decisions file {}", out_path.display()))?,
    );
    save_decisions(&records, &mut out)?;
    out.flush()?;
    eprintln!("{} decisions written to {}", records.len(), out_path.display());
    Ok(())
}

fn print_report(report: &Report, pretty: bool) {
    if pretty {
        print!("{}", report.to_aligned());
    } else {
        print!("{}", report.to_tsv());
    }
}

fn report_exceptions(report: &Report) {
    for (sid, tok) in &report.decisions_without_gold {
        eprintln!("exception: decision without gold at ({sid}, {tok}); excluded");
    }
    for (sid, tok) in &report.gold_without_decision {
        eprintln!("exception: gold without decision at ({sid}, {tok}); excluded");
    }
}

fn cmd_evaluate(settings: &Settings, staged: bool, pretty: bool) -> Result<()> {
    let hierarchy = load_hierarchy(settings)?;
    let lexicon = load_lexicon(settings, &hierarchy)?;
    let gold_path = require(&settings.gold, "gold")?;
    let gold = load_gold(open(gold_path, "gold")?)
        .with_context(|| format!("loading gold {}", gold_path.display()))?;
    let decisions_path = require(&settings.decisions, "decisions")?;
    let decisions = load_decisions(open(decisions_path, "decisions")?)
        .with_context(|| format!("loading decisions {}", decisions_path.display()))?;

    let report = evaluate(&decisions, &gold, &lexicon)?;
    print_report(&report, pretty);
    report_exceptions(&report);
    if staged {
        let (early, fallback) = staged_evaluate(&decisions, &gold, &lexicon)?;
        println!("# staged: answered-early");
        print_report(&early, pretty);
        println!("# staged: fallback");
        print_report(&fallback, pretty);
    }
    println!("{}", baseline_line(random_baseline(&gold, &lexicon)?));
    Ok(())
}

fn cmd_distance(settings: &Settings, word1: &str, word2: &str) -> Result<()> {
    let hierarchy = load_hierarchy(settings)?;
    let lexicon = load_lexicon(settings, &hierarchy)?;
    match word_distance_witness(&hierarchy, &lexicon, word1, word2) {
        Some((d, a, b)) => println!("{word1}\t{word2}\t{d}\t{a}\t{b}"),
        None => println!("{word1}\t{word2}\tunreachable\t-\t-"),
    }
    Ok(())
}
