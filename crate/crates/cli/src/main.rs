mod config;

use std::io::{self, BufRead, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use necklace_core::calculus::{
    apply_rewrite, decompose, find_rule, format_catalog, harsh_sum, mild_sum, reachable, Direction, ReachOptions,
    RewriteRule, RuleTag, SumKind, DEFAULT_DEPTH_BUDGET, DEFAULT_NODE_BUDGET,
};
use necklace_core::enumerate::{EnumQuery, Enumerator, Filter, Output, DEFAULT_MAX_LENGTH};
use necklace_core::record::{reproduce, DiagramRecord};
use necklace_core::refine::{calibrate, count_refined_classes, refinements, REFERENCE_REFINED_COUNTS};
use necklace_core::screen::{screen, validate_dessin, DessinMap};
use necklace_core::{Error, Mode, NecklaceDiagram, ProjMat, Stone, StoneAlgebra};
use serde::Serialize;

use crate::config::Config;

const EXIT_MISMATCH: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_RESOURCE: u8 = 3;

#[derive(Parser)]
#[command(name = "necklace", version, about = "Enumerate, transform and screen necklace diagrams")]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Settings file with classifier, harsh table, catalog and refinement convention.
    #[arg(long, global = true, env = "NECKLACE_CONFIG")]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Words,
    Json,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Oriented,
    Symmetry,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Mode {
        match m {
            ModeArg::Oriented => Mode::Oriented,
            ModeArg::Symmetry => Mode::Symmetry,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum DirectionArg {
    Both,
    Forward,
}

#[derive(Subcommand)]
enum Command {
    /// List the classes of valid diagrams of a given length.
    Enumerate {
        length: usize,
        #[arg(long, value_enum, default_value = "symmetry")]
        mode: ModeArg,
        /// `none`, `maximal`, or a profile `C,S` (circles, squares).
        #[arg(long, default_value = "none")]
        filter: String,
        #[arg(long, value_enum, default_value = "words")]
        format: Format,
        /// Print only the number of classes.
        #[arg(long)]
        count: bool,
        #[arg(long, default_value_t = DEFAULT_MAX_LENGTH)]
        max_length: usize,
    },
    /// Class counts by (circles, squares).
    CountByProfile {
        length: usize,
        #[arg(long, value_enum, default_value = "symmetry")]
        mode: ModeArg,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
    },
    /// Recompute every pinned count and compare with the expected values.
    Reproduce {
        #[arg(long, value_enum, default_value = "words")]
        format: Format,
        /// Replace one stone matrix to check that mismatches are caught.
        #[arg(long, hide = true)]
        debug_corrupt_stone: Option<char>,
    },
    /// Records for the given words (`-` reads words from stdin).
    Record {
        words: Vec<String>,
        #[arg(long, value_enum, default_value = "symmetry")]
        mode: ModeArg,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// Apply a rewrite rule at a stone position.
    Apply {
        word: String,
        /// A tag (`flipflop`, `m1`, `m2`, `m1_inv`, `m2_inv`) or an explicit rule such as `RC->LR`.
        #[arg(long)]
        rule: String,
        #[arg(long)]
        at: usize,
        #[arg(long)]
        catalog: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
        #[arg(long, value_enum, default_value = "symmetry")]
        mode: ModeArg,
    },
    /// Mild or harsh sum of two diagrams.
    Sum {
        first: String,
        second: String,
        #[arg(long, default_value = "mild")]
        kind: String,
        #[arg(long, default_value_t = 0)]
        at1: usize,
        #[arg(long, default_value_t = 0)]
        at2: usize,
        #[arg(long)]
        harsh_table: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
        #[arg(long, value_enum, default_value = "symmetry")]
        mode: ModeArg,
    },
    /// Stream every refinement of a diagram.
    Refine { word: String },
    /// Refined class count for a profile.
    RefinedCount {
        /// `C,S` (circles, squares).
        profile: String,
        #[arg(long, default_value_t = 6)]
        length: usize,
        /// `oriented`, `symmetry`, or `symmetry:2143` to act on marks.
        #[arg(long)]
        convention: Option<String>,
    },
    /// Compare every refinement convention against the reference counts.
    Calibrate {
        #[arg(long, value_enum, default_value = "words")]
        format: Format,
    },
    /// Run the algebraicity screen.
    Screen {
        words: Vec<String>,
        #[arg(long)]
        classifier: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// Decompositions of a 12-stone diagram into two 6-stone diagrams.
    Decompose {
        word: String,
        #[arg(long)]
        harsh_table: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// Classes reachable from the given diagrams.
    Reach {
        words: Vec<String>,
        #[arg(long, value_enum, default_value = "both")]
        direction: DirectionArg,
        #[arg(long)]
        sums: bool,
        #[arg(long, default_value_t = 12)]
        max_length: usize,
        #[arg(long)]
        catalog: Option<PathBuf>,
        #[arg(long)]
        catalog_length: Option<usize>,
        #[arg(long, default_value_t = DEFAULT_NODE_BUDGET)]
        budget: usize,
        #[arg(long, default_value_t = DEFAULT_DEPTH_BUDGET)]
        depth: usize,
    },
    /// Print the rewrite catalog.
    Catalog {
        #[arg(long)]
        max_len: Option<usize>,
    },
    /// Print the harsh-sum table.
    HarshTable,
    /// Print the segment classifier table.
    Classifier,
    /// Check a dessin map file (`-` for stdin).
    Dessin {
        file: String,
        #[arg(long, value_enum, default_value = "words")]
        format: Format,
    },
    /// Count non-empty lines on stdin.
    Count,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            let resource = e
                .chain()
                .any(|c| matches!(c.downcast_ref::<Error>(), Some(Error::ResourceLimit(_))));
            ExitCode::from(if resource { EXIT_RESOURCE } else { EXIT_USAGE })
        }
    }
}

fn run(cli: Cli) -> Result<u8> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("configuring the thread pool")?;
    }
    let cfg = Config::load(cli.config.as_deref())?;
    let stdout = io::stdout();
    let mut out = BufWriter::new(stdout.lock());
    let code = dispatch(cli.command, &cfg, &mut out)?;
    out.flush()?;
    Ok(code)
}

fn parse_word(s: &str) -> Result<NecklaceDiagram> {
    s.trim().parse().with_context(|| format!("invalid word {s:?}"))
}

/// Words from the arguments, reading stdin for `-` or when none are given.
fn read_words(args: &[String]) -> Result<Vec<NecklaceDiagram>> {
    let mut words = Vec::new();
    let from_stdin = args.is_empty() || args.iter().any(|a| a == "-");
    for a in args.iter().filter(|a| *a != "-") {
        words.push(parse_word(a)?);
    }
    if from_stdin {
        for line in io::stdin().lock().lines() {
            let line = line?;
            if !line.trim().is_empty() {
                words.push(parse_word(&line)?);
            }
        }
    }
    Ok(words)
}

fn parse_profile(s: &str) -> Result<(usize, usize)> {
    let (c, sq) = s
        .split_once(',')
        .ok_or_else(|| anyhow!("expected a profile C,S, got {s:?}"))?;
    Ok((c.trim().parse()?, sq.trim().parse()?))
}

fn parse_filter(s: &str) -> Result<Filter> {
    Ok(match s {
        "none" => Filter::None,
        "maximal" => Filter::Maximal,
        other => {
            let (circles, squares) = parse_profile(other)?;
            Filter::Counts { circles, squares }
        }
    })
}

fn write_records(out: &mut impl Write, records: &[DiagramRecord], format: Format) -> Result<()> {
    match format {
        Format::Words => {
            for r in records {
                writeln!(out, "{}", r.word)?;
            }
        }
        Format::Json => {
            for r in records {
                writeln!(out, "{}", serde_json::to_string(r)?)?;
            }
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(out);
            w.write_record(DiagramRecord::CSV_HEADER)?;
            for r in records {
                w.write_record(r.csv_row())?;
            }
            w.flush()?;
        }
    }
    Ok(())
}

fn write_json_lines<T: Serialize>(out: &mut impl Write, rows: &[T]) -> Result<()> {
    for r in rows {
        writeln!(out, "{}", serde_json::to_string(r)?)?;
    }
    Ok(())
}

fn dispatch(command: Command, cfg: &Config, out: &mut impl Write) -> Result<u8> {
    match command {
        Command::Enumerate {
            length,
            mode,
            filter,
            format,
            count,
            max_length,
        } => {
            let e = Enumerator {
                max_length,
                ..Enumerator::default()
            };
            let q = EnumQuery::new(length, mode.into())
                .filter(parse_filter(&filter)?)
                .output(if count { Output::Count } else { Output::List });
            let result = e.enumerate_valid(&q)?;
            if count {
                writeln!(out, "{}", result.count)?;
                return Ok(0);
            }
            let cls = cfg.classifier(None)?;
            let records: Vec<DiagramRecord> = result
                .words
                .iter()
                .map(|w| Ok(DiagramRecord::new(&parse_word(w)?, mode.into(), &cls)))
                .collect::<Result<_>>()?;
            write_records(out, &records, format)?;
        }
        Command::CountByProfile { length, mode, format } => {
            let table = Enumerator::default().count_by_profile(length, mode.into())?;
            #[derive(Serialize)]
            struct Row {
                circles: usize,
                squares: usize,
                classes: usize,
            }
            let rows: Vec<Row> = table
                .into_iter()
                .map(|((circles, squares), classes)| Row {
                    circles,
                    squares,
                    classes,
                })
                .collect();
            match format {
                Format::Json => write_json_lines(out, &rows)?,
                Format::Csv => {
                    let mut w = csv::Writer::from_writer(out);
                    for r in &rows {
                        w.serialize(r)?;
                    }
                    w.flush()?;
                }
                Format::Words => {
                    for r in &rows {
                        writeln!(out, "({},{}) {}", r.circles, r.squares, r.classes)?;
                    }
                }
            }
        }
        Command::Reproduce {
            format,
            debug_corrupt_stone,
        } => {
            let mut alg = StoneAlgebra::standard();
            if let Some(ch) = debug_corrupt_stone {
                let stone = Stone::from_letter(ch).ok_or_else(|| anyhow!("unknown stone {ch:?}"))?;
                alg = alg.with_override(stone, ProjMat::new(1, 2, 0, 1)?);
            }
            let claims = reproduce(&alg)?;
            match format {
                Format::Json => write_json_lines(out, &claims)?,
                Format::Csv => {
                    let mut w = csv::Writer::from_writer(&mut *out);
                    for c in &claims {
                        w.serialize(c)?;
                    }
                    w.flush()?;
                }
                Format::Words => {
                    writeln!(out, "{:<52} {:>9} {:>9}  status", "claim", "computed", "expected")?;
                    for c in &claims {
                        let status = match (c.pinned, c.matched) {
                            (_, true) => "match",
                            (true, false) => "MISMATCH",
                            (false, false) => "differs (not pinned)",
                        };
                        writeln!(out, "{:<52} {:>9} {:>9}  {status}", c.name, c.computed, c.expected)?;
                    }
                }
            }
            let failed: Vec<&str> = claims.iter().filter(|c| c.failed()).map(|c| c.name.as_str()).collect();
            if !failed.is_empty() {
                out.flush()?;
                eprintln!("mismatch: {}", failed.join("; "));
                return Ok(EXIT_MISMATCH);
            }
        }
        Command::Record { words, mode, format } => {
            let cls = cfg.classifier(None)?;
            let records: Vec<DiagramRecord> = read_words(&words)?
                .iter()
                .map(|d| DiagramRecord::new(d, mode.into(), &cls))
                .collect();
            write_records(out, &records, format)?;
        }
        Command::Apply {
            word,
            rule,
            at,
            catalog,
            format,
            mode,
        } => {
            let d = parse_word(&word)?;
            let r = match rule.parse::<RuleTag>() {
                Ok(tag) => {
                    let cat = cfg.catalog(catalog.as_deref(), None)?;
                    find_rule(&cat, tag, &d, at)
                        .cloned()
                        .ok_or_else(|| anyhow!("no {tag} rule matches {d} at {at}"))?
                }
                Err(_) => {
                    let (lhs, rhs) = rule
                        .split_once("->")
                        .ok_or_else(|| anyhow!("expected a tag or LHS->RHS, got {rule:?}"))?;
                    RewriteRule::new(parse_word(lhs)?.stones().to_vec(), parse_word(rhs)?.stones().to_vec(), None)?
                }
            };
            let result = apply_rewrite(&d, &r, at)?;
            write_records(out, &[DiagramRecord::new(&result, mode.into(), &cfg.classifier(None)?)], format)?;
        }
        Command::Sum {
            first,
            second,
            kind,
            at1,
            at2,
            harsh_table,
            format,
            mode,
        } => {
            let (a, b) = (parse_word(&first)?, parse_word(&second)?);
            let result = match kind.parse::<SumKind>()? {
                SumKind::Mild => mild_sum(&a, at1, &b, at2)?,
                SumKind::Harsh => harsh_sum(&a, at1, &b, at2, &cfg.harsh_table(harsh_table.as_deref())?)?,
            };
            write_records(out, &[DiagramRecord::new(&result, mode.into(), &cfg.classifier(None)?)], format)?;
        }
        Command::Refine { word } => {
            let d = parse_word(&word)?;
            if !d.is_valid() {
                return Err(Error::InvalidDiagram(d.encode()).into());
            }
            for rd in refinements(&d) {
                writeln!(out, "{rd}")?;
            }
        }
        Command::RefinedCount {
            profile,
            length,
            convention,
        } => {
            let conv = cfg.convention(convention.as_deref())?;
            let n = count_refined_classes(parse_profile(&profile)?, length, &conv)?;
            writeln!(out, "{n}")?;
        }
        Command::Calibrate { format } => {
            let report = calibrate(&REFERENCE_REFINED_COUNTS, 6)?;
            match format {
                Format::Json => write_json_lines(out, &report.rows)?,
                _ => {
                    write!(out, "{report}")?;
                    if report.matched_all() {
                        writeln!(out, "best: {} reproduces every count", report.best().convention)?;
                    } else {
                        writeln!(
                            out,
                            "best: {} ({} of {} exact); no convention reproduces every count",
                            report.best().convention,
                            report.best().exact,
                            report.targets.len()
                        )?;
                    }
                }
            }
        }
        Command::Screen {
            words,
            classifier,
            format,
        } => {
            let cls = cfg.classifier(classifier.as_deref())?;
            #[derive(Serialize)]
            struct Row {
                word: String,
                #[serde(flatten)]
                report: necklace_core::screen::ScreenReport,
            }
            let mut rows = Vec::new();
            for d in read_words(&words)? {
                if d.len() % 6 != 0 {
                    bail!("{d} has {} stones, not a multiple of six", d.len());
                }
                rows.push(Row {
                    word: d.encode(),
                    report: screen(&d, d.len() / 6, &cls)?,
                });
            }
            match format {
                Format::Words => {
                    for r in &rows {
                        writeln!(out, "{} {}", r.word, r.report.verdict)?;
                    }
                }
                Format::Json => write_json_lines(out, &rows)?,
                Format::Csv => {
                    let mut w = csv::Writer::from_writer(&mut *out);
                    w.write_record(["word", "essential", "arrows", "verdict"])?;
                    for r in &rows {
                        w.write_record([
                            r.word.clone(),
                            r.report.essential.to_string(),
                            r.report.arrows.to_string(),
                            r.report.verdict.to_string(),
                        ])?;
                    }
                    w.flush()?;
                }
            }
        }
        Command::Decompose {
            word,
            harsh_table,
            format,
        } => {
            let parts = decompose(&parse_word(&word)?, &cfg.harsh_table(harsh_table.as_deref())?)?;
            match format {
                Format::Json => write_json_lines(out, &parts)?,
                _ => {
                    for p in &parts {
                        writeln!(out, "{} {} {} {:?}", p.kind, p.left, p.right, p.positions)?;
                    }
                }
            }
        }
        Command::Reach {
            words,
            direction,
            sums,
            max_length,
            catalog,
            catalog_length,
            budget,
            depth,
        } => {
            let starts = read_words(&words)?;
            let cat = cfg.catalog(catalog.as_deref(), catalog_length)?;
            let opts = ReachOptions {
                direction: match direction {
                    DirectionArg::Both => Direction::Both,
                    DirectionArg::Forward => Direction::Forward,
                },
                sums,
                max_length,
                node_budget: budget,
                depth_budget: depth,
                harsh_table: cfg.harsh_table(None)?,
            };
            let reach = reachable(&starts, &cat, &opts)?;
            for w in &reach.classes {
                writeln!(out, "{w}")?;
            }
            if reach.budget_exceeded {
                eprintln!("budget exceeded: closure is partial");
            }
        }
        Command::Catalog { max_len } => {
            write!(out, "{}", format_catalog(&cfg.catalog(None, max_len)?))?;
        }
        Command::HarshTable => write!(out, "{}", cfg.harsh_table(None)?.format())?,
        Command::Classifier => write!(out, "{}", cfg.classifier(None)?.format())?,
        Command::Dessin { file, format } => {
            let text = if file == "-" {
                io::read_to_string(io::stdin())?
            } else {
                std::fs::read_to_string(&file).with_context(|| format!("reading {file}"))?
            };
            let report = validate_dessin(&DessinMap::parse(&text)?);
            match format {
                Format::Json => writeln!(out, "{}", serde_json::to_string(&report)?)?,
                _ => writeln!(out, "{report}")?,
            }
        }
        Command::Count => {
            let n = io::stdin()
                .lock()
                .lines()
                .map_while(|l| l.ok())
                .filter(|l| !l.trim().is_empty())
                .count();
            writeln!(out, "{n}")?;
        }
    }
    Ok(0)
}
