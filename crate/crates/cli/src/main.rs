//! Command-line front end: `tag` writes sense records for a text, `eval`
//! scores predictions against gold annotations (optionally comparing
//! part-of-speech modes over several seeds), and `lexstat` summarizes a
//! lexicon. Option precedence everywhere: flags, then the `--config`
//! key=value file, then built-in defaults; the `SENSETAG_LEXICON`
//! environment variable supplies only a default lexicon path.

use std::collections::HashMap;
use std::io::Read;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use sensetag::annealer::{LevelIterations, Schedule};
use sensetag::domaincodes::DomainTree;
use sensetag::eval::{compare_modes, load_records, score_records, score_tokens, ModeRun};
use sensetag::tagger::{tag_prepared, PosSource};
use sensetag::textprep::{stem, tokenize, PreppedToken, StopList};
use sensetag::{tag_text, Lexicon, OverlapMode, PosMapping, Score, TagOptions};

const LEXICON_ENV: &str = "SENSETAG_LEXICON";

#[derive(Parser)]
#[command(
    name = "sensetag",
    version,
    about = "Word sense tagging over a machine-readable lexicon",
    propagate_version = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Tag text: one record per content word with its chosen sense.
    Tag(TagArgs),
    /// Score predictions against a gold record file.
    Eval(EvalArgs),
    /// Print summary statistics for a lexicon.
    Lexstat(LexstatArgs),
}

/// Options shared by every run that loads a lexicon and tags text.
#[derive(Args, Debug)]
struct RunOpts {
    /// Lexicon file (falls back to the config file, then $SENSETAG_LEXICON).
    #[arg(long, value_name = "FILE")]
    lexicon: Option<PathBuf>,

    /// key=value config file supplying defaults for the other options.
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Stop-word list, one word per line (default: built-in list).
    #[arg(long, value_name = "FILE")]
    stop_words: Option<PathBuf>,

    /// Penn-to-coarse tag mapping file (default: built-in mapping).
    #[arg(long, value_name = "FILE")]
    pos_mapping: Option<PathBuf>,

    /// Domain-code tree file; enables the domain term when weight > 0.
    #[arg(long, value_name = "FILE")]
    domain_tree: Option<PathBuf>,

    /// Weight of the domain term, an integer or fraction like 1/2.
    #[arg(long, value_name = "RATIONAL")]
    domain_weight: Option<String>,

    /// Overlap mode: raw or normalized.
    #[arg(long, value_name = "MODE")]
    mode: Option<String>,

    /// Part-of-speech source: naive, provided, or off.
    #[arg(long, value_name = "SOURCE")]
    pos: Option<String>,

    /// Seed for the optimizer's random draws.
    #[arg(long, value_name = "N")]
    seed: Option<u64>,

    /// Worker threads: 1 = in-thread, 0 = one per core.
    #[arg(long, value_name = "N")]
    jobs: Option<usize>,

    /// Replace annealing with exhaustive search (small sentences only).
    #[arg(long)]
    exact: bool,

    /// Configuration cap for exhaustive search.
    #[arg(long, value_name = "N")]
    exact_cap: Option<u128>,

    /// Starting temperature of the annealing schedule.
    #[arg(long, value_name = "T")]
    t0: Option<f64>,

    /// Geometric cooling factor, in (0, 1).
    #[arg(long, value_name = "F")]
    cooling: Option<f64>,

    /// Proposals per level, as a multiple of the ambiguous-slot count.
    #[arg(long, value_name = "K", conflicts_with = "iters_fixed")]
    iters_per_ambiguous: Option<u32>,

    /// Proposals per level, as a flat count.
    #[arg(long, value_name = "K")]
    iters_fixed: Option<u32>,

    /// Maximum number of temperature levels.
    #[arg(long, value_name = "N")]
    max_levels: Option<u32>,

    /// Stop after this many consecutive levels with no accepted move.
    #[arg(long, value_name = "N")]
    frozen_levels: Option<u32>,
}

#[derive(Args, Debug)]
struct TagArgs {
    #[command(flatten)]
    run: RunOpts,

    /// Input file; '-' or absent reads standard input. Plain text, or
    /// token<TAB>PENN_TAG lines (blank line = sentence break) with
    /// --pos provided.
    #[arg(value_name = "INPUT")]
    input: Option<PathBuf>,

    /// Output file; '-' or absent writes standard output.
    #[arg(long, short = 'o', value_name = "FILE")]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct EvalArgs {
    #[command(flatten)]
    run: RunOpts,

    /// Gold record file to score against.
    #[arg(long, value_name = "FILE")]
    gold: PathBuf,

    /// Prediction record file (mutually exclusive with --input).
    #[arg(long, value_name = "FILE", conflicts_with = "input")]
    predictions: Option<PathBuf>,

    /// Plain text to tag and score in-process.
    #[arg(long, value_name = "FILE")]
    input: Option<PathBuf>,

    /// Comma-separated part-of-speech modes to compare, e.g. sa,pos+sa.
    #[arg(long, value_name = "LIST")]
    modes: Option<String>,

    /// Seeds for mode comparison: a range like 1..10 or a comma list.
    #[arg(long, value_name = "SEEDS")]
    seeds: Option<String>,
}

#[derive(Args, Debug)]
struct LexstatArgs {
    /// Lexicon file (falls back to the config file, then $SENSETAG_LEXICON).
    #[arg(long, value_name = "FILE")]
    lexicon: Option<PathBuf>,

    /// key=value config file supplying defaults.
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Stop-word list used while parsing the lexicon.
    #[arg(long, value_name = "FILE")]
    stop_words: Option<PathBuf>,
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Tag(args) => cmd_tag(args),
        Command::Eval(args) => cmd_eval(args),
        Command::Lexstat(args) => cmd_lexstat(args),
    }
}

/// The `--config` file: one `key = value` per line, `#` comments.
fn load_config(path: Option<&Path>) -> Result<HashMap<String, String>> {
    let mut map = HashMap::new();
    let Some(path) = path else {
        return Ok(map);
    };
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading config file {}", path.display()))?;
    for (idx, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            bail!(
                "{}:{}: expected key=value, got '{line}'",
                path.display(),
                idx + 1
            );
        };
        map.insert(key.trim().to_string(), value.trim().to_string());
    }
    Ok(map)
}

fn cfg_get<T: FromStr>(cfg: &HashMap<String, String>, key: &str) -> Result<Option<T>>
where
    T::Err: std::fmt::Display,
{
    match cfg.get(key) {
        None => Ok(None),
        Some(raw) => raw
            .parse::<T>()
            .map(Some)
            .map_err(|e| anyhow::anyhow!("config key '{key}': {e}")),
    }
}

fn parse_rational(text: &str) -> Result<Score> {
    let value = match text.split_once('/') {
        Some((n, d)) => {
            let n: i128 = n.trim().parse().context("rational numerator")?;
            let d: i128 = d.trim().parse().context("rational denominator")?;
            if d <= 0 {
                bail!("rational denominator must be positive, got {d}");
            }
            Score::new(n, d)
        }
        None => Score::from_integer(text.trim().parse().context("rational value")?),
    };
    if value < Score::from_integer(0) {
        bail!("domain weight must be nonnegative, got {text}");
    }
    Ok(value)
}

fn parse_pos(text: &str) -> Result<PosSource> {
    match text {
        "naive" => Ok(PosSource::Naive),
        "provided" => Ok(PosSource::Provided),
        "off" => Ok(PosSource::Off),
        other => bail!("unknown part-of-speech source '{other}' (naive, provided, off)"),
    }
}

/// Everything a tagging run needs, with precedence already applied.
struct Resolved {
    lexicon: Lexicon,
    stops: &'static StopList,
    owned_stops: Option<StopList>,
    mapping: Option<PosMapping>,
    tree: Option<DomainTree>,
    pos: PosSource,
    mode: OverlapMode,
    domain_weight: Score,
    schedule: Schedule,
    seed: u64,
    jobs: usize,
    exact: bool,
    exact_cap: Option<u128>,
}

impl Resolved {
    fn stops(&self) -> &StopList {
        self.owned_stops.as_ref().unwrap_or(self.stops)
    }

    fn options(&self) -> TagOptions<'_> {
        TagOptions {
            pos: self.pos,
            mode: self.mode,
            domain_weight: self.domain_weight,
            domain_tree: self.tree.as_ref(),
            pos_mapping: self.mapping.as_ref(),
            schedule: self.schedule,
            seed: self.seed,
            exact: self.exact,
            exact_cap: self.exact_cap,
            jobs: self.jobs,
        }
    }
}

fn resolve_lexicon_path(
    flag: Option<PathBuf>,
    cfg: &HashMap<String, String>,
) -> Result<PathBuf> {
    if let Some(path) = flag {
        return Ok(path);
    }
    if let Some(path) = cfg.get("lexicon") {
        return Ok(PathBuf::from(path));
    }
    if let Ok(path) = std::env::var(LEXICON_ENV) {
        if !path.is_empty() {
            return Ok(PathBuf::from(path));
        }
    }
    bail!("no lexicon given: pass --lexicon, set it in --config, or export {LEXICON_ENV}");
}

fn resolve(opts: RunOpts) -> Result<Resolved> {
    let cfg = load_config(opts.config.as_deref())?;

    let lexicon_path = resolve_lexicon_path(opts.lexicon, &cfg)?;

    let stop_path = opts
        .stop_words
        .or_else(|| cfg.get("stop_words").map(PathBuf::from));
    let owned_stops = match &stop_path {
        Some(path) => Some(
            StopList::load(path)
                .with_context(|| format!("loading stop words from {}", path.display()))?,
        ),
        None => None,
    };
    let stops = StopList::default_list();

    let lexicon = {
        let effective: &StopList = owned_stops.as_ref().unwrap_or(stops);
        Lexicon::load_with_stops(&lexicon_path, effective)
            .with_context(|| format!("loading lexicon from {}", lexicon_path.display()))?
    };

    let mapping_path = opts
        .pos_mapping
        .or_else(|| cfg.get("pos_mapping").map(PathBuf::from));
    let mapping = match &mapping_path {
        Some(path) => Some(
            PosMapping::load(path)
                .with_context(|| format!("loading tag mapping from {}", path.display()))?,
        ),
        None => None,
    };

    let tree_path = opts
        .domain_tree
        .or_else(|| cfg.get("domain_tree").map(PathBuf::from));
    let tree = match &tree_path {
        Some(path) => Some(
            DomainTree::load(path)
                .with_context(|| format!("loading domain tree from {}", path.display()))?,
        ),
        None => None,
    };

    let domain_weight = match opts.domain_weight.or_else(|| cfg.get("domain_weight").cloned()) {
        Some(text) => parse_rational(&text)?,
        None => Score::from_integer(0),
    };

    let mode = match opts.mode.or_else(|| cfg.get("mode").cloned()) {
        Some(text) => text.parse::<OverlapMode>()?,
        None => OverlapMode::Normalized,
    };

    let pos = match opts.pos.or_else(|| cfg.get("pos").cloned()) {
        Some(text) => parse_pos(&text)?,
        None => PosSource::Naive,
    };

    // The two level-sizing knobs are one schedule field; a flag wins over
    // the config file, and naming both in one layer is contradictory.
    let level_iterations = match (opts.iters_per_ambiguous, opts.iters_fixed) {
        (Some(k), None) => LevelIterations::PerAmbiguous(k),
        (None, Some(k)) => LevelIterations::Fixed(k),
        (Some(_), Some(_)) => unreachable!("clap rejects the flag pair"),
        (None, None) => {
            match (
                cfg_get::<u32>(&cfg, "iters_per_ambiguous")?,
                cfg_get::<u32>(&cfg, "iters_fixed")?,
            ) {
                (Some(_), Some(_)) => {
                    bail!("config file sets both iters_per_ambiguous and iters_fixed")
                }
                (Some(k), None) => LevelIterations::PerAmbiguous(k),
                (None, Some(k)) => LevelIterations::Fixed(k),
                (None, None) => Schedule::default().level_iterations,
            }
        }
    };

    let schedule = Schedule {
        initial_temperature: opts
            .t0
            .or(cfg_get(&cfg, "t0")?)
            .unwrap_or(Schedule::default().initial_temperature),
        cooling_factor: opts
            .cooling
            .or(cfg_get(&cfg, "cooling")?)
            .unwrap_or(Schedule::default().cooling_factor),
        level_iterations,
        max_levels: opts
            .max_levels
            .or(cfg_get(&cfg, "max_levels")?)
            .unwrap_or(Schedule::default().max_levels),
        frozen_levels_to_stop: opts
            .frozen_levels
            .or(cfg_get(&cfg, "frozen_levels")?)
            .unwrap_or(Schedule::default().frozen_levels_to_stop),
    };
    schedule.validate()?;

    Ok(Resolved {
        lexicon,
        stops,
        owned_stops,
        mapping,
        tree,
        pos,
        mode,
        domain_weight,
        schedule,
        seed: opts.seed.or(cfg_get(&cfg, "seed")?).unwrap_or(0),
        jobs: opts.jobs.or(cfg_get(&cfg, "jobs")?).unwrap_or(1),
        exact: opts.exact || cfg_get::<bool>(&cfg, "exact")?.unwrap_or(false),
        exact_cap: opts.exact_cap.or(cfg_get(&cfg, "exact_cap")?),
    })
}

fn read_input(path: Option<&Path>) -> Result<String> {
    match path {
        Some(p) if p.as_os_str() != "-" => {
            std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))
        }
        _ => {
            let mut text = String::new();
            std::io::stdin()
                .read_to_string(&mut text)
                .context("reading standard input")?;
            Ok(text)
        }
    }
}

/// Write to stdout, treating a closed pipe (e.g. `| head`) as success.
fn emit(content: &str) -> Result<()> {
    use std::io::Write;
    let mut out = std::io::stdout().lock();
    let outcome = out.write_all(content.as_bytes()).and_then(|()| out.flush());
    match outcome {
        Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => std::process::exit(0),
        other => other.context("writing standard output"),
    }
}

fn write_output(path: Option<&Path>, content: &str) -> Result<()> {
    match path {
        Some(p) if p.as_os_str() != "-" => std::fs::write(p, content)
            .with_context(|| format!("writing {}", p.display())),
        _ => emit(content),
    }
}

/// Parse pre-tagged two-column input: `token<TAB>PENN_TAG` lines, blank
/// line between sentences. Tokens are normalized exactly like plain text:
/// lowercased, punctuation-only lines dropped, stop words filtered (while
/// still consuming their raw position).
fn prepare_pretagged(text: &str, stops: &StopList) -> Result<Vec<PreppedToken>> {
    let mut out = Vec::new();
    let mut sentence_index = 0usize;
    let mut token_index = 0usize;
    let mut sentence_open = false;

    for (idx, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            if sentence_open {
                sentence_index += 1;
                token_index = 0;
                sentence_open = false;
            }
            continue;
        }
        let Some((token, tag)) = line.split_once('\t') else {
            bail!(
                "line {}: pre-tagged input needs token<TAB>PENN_TAG lines — \
                 is this plain text? run without --pos provided",
                idx + 1
            );
        };
        let pieces = tokenize(token);
        if pieces.is_empty() {
            // Punctuation; plain-text tokenization never sees these either.
            continue;
        }
        if pieces.len() > 1 {
            bail!(
                "line {}: token field '{}' is {} words; one token per line",
                idx + 1,
                token,
                pieces.len()
            );
        }
        let surface = pieces[0].surface.clone();
        sentence_open = true;
        let position = token_index;
        token_index += 1;
        let stemmed = stem(&surface);
        if stops.blocks(&surface, &stemmed) {
            continue;
        }
        out.push(PreppedToken {
            surface,
            stem: stemmed,
            pos_tag: Some(tag.trim().to_string()),
            sentence_index,
            token_index: position,
        });
    }
    Ok(out)
}

fn cmd_tag(args: TagArgs) -> Result<()> {
    let run = resolve(args.run)?;
    let text = read_input(args.input.as_deref())?;
    let options = run.options();

    let tagged = if run.pos == PosSource::Provided {
        let tokens = prepare_pretagged(&text, run.stops())?;
        tag_prepared(&tokens, &run.lexicon, &options)?
    } else {
        tag_text(&text, &run.lexicon, run.stops(), None, &options)?
    };

    let mut body = String::new();
    for token in &tagged {
        body.push_str(&token.to_record());
        body.push('\n');
    }
    write_output(args.output.as_deref(), &body)
}

fn parse_seeds(text: &str) -> Result<Vec<u64>> {
    let text = text.trim();
    if let Some((lo, hi)) = text.split_once("..") {
        let lo: u64 = lo.trim().parse().context("seed range start")?;
        let hi: u64 = hi.trim().parse().context("seed range end")?;
        if hi < lo {
            bail!("empty seed range {text}");
        }
        return Ok((lo..=hi).collect());
    }
    text.split(',')
        .map(|s| {
            s.trim()
                .parse::<u64>()
                .with_context(|| format!("seed '{}'", s.trim()))
        })
        .collect()
}

fn parse_modes(text: &str) -> Result<Vec<PosSource>> {
    text.split(',')
        .map(|m| match m.trim() {
            "sa" => Ok(PosSource::Off),
            "pos+sa" => Ok(PosSource::Naive),
            other => bail!("unknown mode '{other}' (expected sa or pos+sa)"),
        })
        .collect()
}

fn mode_name(pos: PosSource) -> &'static str {
    match pos {
        PosSource::Off => "sa",
        PosSource::Naive => "pos+sa",
        PosSource::Provided => "pos(provided)+sa",
    }
}

fn fmt_acc(v: Option<f64>) -> String {
    v.map_or("na".to_string(), |x| format!("{x:.4}"))
}

fn comparison_table(runs: &[ModeRun]) -> String {
    use std::fmt::Write;
    let mut out = String::new();
    out.push_str("mode\tseed\thomograph_accuracy\tsense_accuracy\n");
    for run in runs {
        for (seed, report) in &run.per_seed {
            writeln!(
                out,
                "{}\t{}\t{}\t{}",
                mode_name(run.pos),
                seed,
                fmt_acc(report.homograph_accuracy()),
                fmt_acc(report.sense_accuracy()),
            )
            .unwrap();
        }
    }
    out.push('\n');
    out.push_str("mode\tmean_homograph_accuracy\tmean_sense_accuracy\n");
    for run in runs {
        writeln!(
            out,
            "{}\t{}\t{}",
            mode_name(run.pos),
            fmt_acc(run.mean_homograph_accuracy()),
            fmt_acc(run.mean_sense_accuracy()),
        )
        .unwrap();
    }
    if let Some((first, rest)) = runs.split_first() {
        if !rest.is_empty() {
            out.push('\n');
            writeln!(out, "delta vs {}\thomograph\tsense", mode_name(first.pos)).unwrap();
            for run in rest {
                let delta = |a: Option<f64>, b: Option<f64>| match (a, b) {
                    (Some(a), Some(b)) => format!("{:+.4}", a - b),
                    _ => "na".to_string(),
                };
                writeln!(
                    out,
                    "{}\t{}\t{}",
                    mode_name(run.pos),
                    delta(
                        run.mean_homograph_accuracy(),
                        first.mean_homograph_accuracy()
                    ),
                    delta(run.mean_sense_accuracy(), first.mean_sense_accuracy()),
                )
                .unwrap();
            }
        }
    }
    out
}

fn cmd_eval(args: EvalArgs) -> Result<()> {
    let run = resolve(args.run)?;
    let gold = load_records(&args.gold)
        .with_context(|| format!("loading gold records from {}", args.gold.display()))?;

    if let Some(pred_path) = &args.predictions {
        if args.modes.is_some() || args.seeds.is_some() {
            bail!("--modes/--seeds rerun the tagger and need --input, not --predictions");
        }
        let predictions = load_records(pred_path)
            .with_context(|| format!("loading predictions from {}", pred_path.display()))?;
        let report = score_records(&predictions, &gold, &run.lexicon)?;
        return emit(&format!(
            "{}\n{}\n",
            report.human_table(),
            report.machine_line()
        ));
    }

    let Some(input) = &args.input else {
        bail!("eval needs --predictions or --input");
    };
    if run.pos == PosSource::Provided {
        bail!("eval --input takes plain text; --pos provided is not available here");
    }
    let text = read_input(Some(input))?;

    if let Some(modes) = &args.modes {
        let modes = parse_modes(modes)?;
        let seeds = match &args.seeds {
            Some(spec) => parse_seeds(spec)?,
            None => (1..=10).collect(),
        };
        let runs = compare_modes(
            &text,
            None,
            &gold,
            &run.lexicon,
            run.stops(),
            &run.options(),
            &modes,
            &seeds,
        )?;
        return emit(&comparison_table(&runs));
    }

    let tagged = tag_text(&text, &run.lexicon, run.stops(), None, &run.options())?;
    let report = score_tokens(&tagged, &gold, &run.lexicon)?;
    emit(&format!(
        "{}\n{}\n",
        report.human_table(),
        report.machine_line()
    ))
}

fn cmd_lexstat(args: LexstatArgs) -> Result<()> {
    let cfg = load_config(args.config.as_deref())?;
    let lexicon_path = resolve_lexicon_path(args.lexicon, &cfg)?;

    let stop_path = args
        .stop_words
        .or_else(|| cfg.get("stop_words").map(PathBuf::from));
    let owned_stops = match &stop_path {
        Some(path) => Some(
            StopList::load(path)
                .with_context(|| format!("loading stop words from {}", path.display()))?,
        ),
        None => None,
    };
    let stops = owned_stops
        .as_ref()
        .unwrap_or_else(|| StopList::default_list());

    let lexicon = Lexicon::load_with_stops(&lexicon_path, stops)
        .with_context(|| format!("loading lexicon from {}", lexicon_path.display()))?;
    let stats = lexicon.stats();

    let mean_senses = if stats.entries == 0 {
        0.0
    } else {
        stats.senses as f64 / stats.entries as f64
    };
    let mut out = String::new();
    use std::fmt::Write;
    writeln!(out, "lexicon                  {}", lexicon_path.display()).unwrap();
    writeln!(
        out,
        "version                  {}",
        lexicon.version.as_deref().unwrap_or("(none)")
    )
    .unwrap();
    writeln!(out, "entries                  {}", stats.entries).unwrap();
    writeln!(out, "senses                   {}", stats.senses).unwrap();
    writeln!(out, "mean senses per entry    {mean_senses:.2}").unwrap();
    writeln!(out, "homographs               {}", stats.homographs).unwrap();
    writeln!(out, "ambiguous entries        {}", stats.ambiguous_entries).unwrap();
    writeln!(out, "multi-homograph entries  {}", stats.multi_homograph_entries).unwrap();
    writeln!(out, "largest entry (senses)   {}", stats.max_senses_in_entry).unwrap();
    writeln!(out, "domain-coded senses      {}", stats.domain_coded_senses).unwrap();
    emit(&out)
}
