//! `finstack`: load JSON fixtures, run constructions and classifiers, and
//! report verdicts.
//!
//! Exit codes: 0 pass, 1 property failure, 2 input or usage error,
//! 3 budget exceeded or inconclusive.

mod report;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand, ValueEnum};
use finstack::descent::{descend, extract_two_group_data, Descent};
use finstack::em::{em_space, group_cocycle_as_span, CoboundarySearch, GroupCocycle};
use finstack::error::{set_level_budget, Error, Result};
use finstack::group::{nerve, Groupoid};
use finstack::iso::DEFAULT_NODE_LIMIT;
use finstack::join::{dec, join};
use finstack::json::{
    load_action, load_cocycle, load_group, load_groupoid, load_map_or_object, load_sset, to_pretty,
    CocycleDoc, SMapDoc, SSetDoc, SimplicialGroupDoc, TwoGroupDoc,
};
use finstack::kan::{classify, classify_object, hom, horn, matching, Kind, Nat, RelHorn};
use finstack::path_space::path_space;
use finstack::simp_group::{classify_strict, homotopy_quotient, moore_fill, w_bar, w_total, SimplicialGroup};
use finstack::sset::{coskeleton, SSet};
use finstack::strictify::{compare_with_input, strictify};
use finstack::suites::{run_suite, SUITES};
use serde::Serialize;

use report::{error_exit, Report, Status};

#[derive(Parser)]
#[command(name = "finstack", version, about = "Finite simplicial sets, stacks, strictification and 2-group descent")]
struct Cli {
    /// Largest number of simplices allowed in any one level.
    #[arg(long, global = true, default_value_t = finstack::error::DEFAULT_LEVEL_BUDGET)]
    budget: usize,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    Groupoid,
    Stack,
    Hypercover,
}

#[derive(Subcommand)]
enum Command {
    /// Classify an object as an n-groupoid or a map as an n-stack or n-hypercover.
    Check {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum)]
        kind: KindArg,
        /// A degree or `inf`.
        #[arg(long)]
        n: Nat,
    },
    /// Count the simplicial maps from a shape into an object.
    Hom {
        #[arg(long)]
        shape: PathBuf,
        #[arg(long)]
        target: PathBuf,
    },
    /// Compute the relative horn Λ^k_i(f) and its comparison map.
    Horn {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        i: usize,
    },
    /// Compute the matching object M_k(f) and its comparison map.
    Match {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        k: usize,
    },
    /// Nerve of a groupoid, or of a group viewed as a one-object groupoid.
    Nerve {
        #[arg(long, conflicts_with = "group", required_unless_present = "group")]
        groupoid: Option<PathBuf>,
        #[arg(long)]
        group: Option<PathBuf>,
        #[arg(long)]
        levels: usize,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// The n-coskeleton of an object, up to the given level.
    Coskeleton {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        levels: usize,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// The join of two objects.
    Join {
        #[arg(long)]
        left: PathBuf,
        #[arg(long)]
        right: PathBuf,
        #[arg(long)]
        levels: usize,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// The décalage Dec_n of an object.
    Dec {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        levels: usize,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// The path space P^{≥k}(f) of a map.
    Pathspace {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        levels: usize,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// The n-strictification τ_n(f), compared with f.
    Strictify {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        n: usize,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Validate a group table.
    GroupCheck {
        #[arg(long)]
        group: PathBuf,
    },
    /// Fill a horn in a simplicial group by Moore's algorithm.
    MooreFill {
        /// A simplicial group, or a finite group taken as constant.
        #[arg(long)]
        group: PathBuf,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        i: usize,
        /// Comma-separated face ids with `_` at position i.
        #[arg(long)]
        faces: String,
        /// Check the strict n-group condition as well.
        #[arg(long)]
        strict: Option<usize>,
    },
    /// The classifying object W̄G of a simplicial group.
    Wbar {
        #[arg(long)]
        group: PathBuf,
        #[arg(long)]
        levels: usize,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// The total object WG of a simplicial group.
    W {
        #[arg(long)]
        group: PathBuf,
        #[arg(long)]
        levels: usize,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// The homotopy quotient of a group action, as a map to W̄G.
    Quotient {
        #[arg(long)]
        action: PathBuf,
        #[arg(long)]
        levels: usize,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// The Eilenberg-MacLane object K(A,n).
    Kspace {
        #[arg(long)]
        abelian: PathBuf,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        levels: usize,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Validate a group cocycle and decide whether it is a coboundary.
    CocycleCheck {
        #[arg(long)]
        cocycle: PathBuf,
        #[arg(long, default_value_t = 1 << 22)]
        node_limit: u64,
    },
    /// Build the 2-groupoid X with X_0 = ∗ from a 3-cocycle.
    Descend {
        #[arg(long)]
        group: Option<PathBuf>,
        #[arg(long)]
        abelian: Option<PathBuf>,
        #[arg(long)]
        cocycle: PathBuf,
        #[arg(long, default_value_t = 4)]
        levels: usize,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Descend, then read off the torsor and associator data.
    Extract {
        #[arg(long)]
        group: Option<PathBuf>,
        #[arg(long)]
        abelian: Option<PathBuf>,
        #[arg(long)]
        cocycle: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Run a built-in property suite.
    Verify {
        #[arg(long, value_parser = clap::builder::PossibleValuesParser::new(SUITES))]
        suite: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn write_out<T: Serialize>(output: &Option<PathBuf>, doc: &T, r: &mut Report) -> Result<()> {
    if let Some(path) = output {
        std::fs::write(path, to_pretty(doc) + "\n")
            .map_err(|e| Error::Invalid(format!("{}: {e}", path.display())))?;
        r.set("output", path.display().to_string());
    }
    Ok(())
}

fn load_object(path: &Path) -> Result<Arc<SSet>> {
    Ok(load_map_or_object(path)?.source().clone())
}

/// A simplicial group document, or a group table taken as a constant group.
fn load_simplicial_group(path: &Path, levels: usize) -> Result<SimplicialGroup> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Invalid(format!("{}: {e}", path.display())))?;
    let value: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| Error::Invalid(format!("{}: {e}", path.display())))?;
    if value.get("groups").is_some() {
        let doc: SimplicialGroupDoc =
            serde_json::from_value(value).map_err(|e| Error::Invalid(format!("not a simplicial group: {e}")))?;
        doc.to_group()
    } else {
        Ok(SimplicialGroup::constant(&load_group(path)?, levels))
    }
}

fn load_cocycle_checked(group: &Option<PathBuf>, abelian: &Option<PathBuf>, path: &Path) -> Result<GroupCocycle> {
    let c = load_cocycle(path)?;
    if let Some(g) = group {
        if load_group(g)? != c.g {
            return Err(Error::Shape("the cocycle is over a different group".into()));
        }
    }
    if let Some(a) = abelian {
        if load_group(a)? != c.a {
            return Err(Error::Shape("the cocycle has different coefficients".into()));
        }
    }
    if c.n != 3 {
        return Err(Error::Invalid(format!("descent needs a 3-cocycle, got degree {}", c.n)));
    }
    Ok(c)
}

fn run_descent(c: &GroupCocycle) -> Result<Descent> {
    descend(&group_cocycle_as_span(c, 4)?)
}

fn rel_horn_report(r: &mut Report, h: &RelHorn, surjective_only: bool) {
    r.set("carrier_size", h.len());
    r.set("surjective", h.surjectivity_failure().is_none());
    r.set("bijective", h.is_bijective());
    if let Some(w) = h.witness(!surjective_only) {
        r.set("witness", w);
    }
}

fn parse_faces(s: &str, k: usize, i: usize) -> Result<Vec<Option<usize>>> {
    let faces: Vec<Option<usize>> = s
        .split(',')
        .map(|p| match p.trim() {
            "_" => Ok(None),
            t => t
                .parse()
                .map(Some)
                .map_err(|_| Error::Invalid(format!("face entry {t:?} is not an id or _"))),
        })
        .collect::<Result<_>>()?;
    if faces.len() != k + 1 || faces.iter().enumerate().any(|(j, f)| f.is_none() != (j == i)) {
        return Err(Error::Invalid(format!("expected {} faces with `_` exactly at position {i}", k + 1)));
    }
    Ok(faces)
}

fn run(cmd: &Command) -> Result<Report> {
    match cmd {
        Command::Check { input, kind, n } => {
            let mut r = Report::new("check");
            let f = load_map_or_object(input)?;
            let v = match kind {
                KindArg::Groupoid => classify_object(f.source(), *n)?,
                KindArg::Stack => classify(&f, *n, Kind::Stack)?,
                KindArg::Hypercover => classify(&f, *n, Kind::Hypercover)?,
            };
            r.set("n", n.to_string()).set("levels", f.source().sizes());
            r.verdict("classification", &v);
            Ok(r)
        }
        Command::Hom { shape, target } => {
            let mut r = Report::new("hom");
            let h = hom(&*load_object(shape)?, &*load_object(target)?)?;
            r.set("maps", h.len());
            Ok(r)
        }
        Command::Horn { input, k, i } => {
            let mut r = Report::new("horn");
            let f = load_map_or_object(input)?;
            let h = horn(&f, *k, *i)?;
            r.set("k", k).set("i", i);
            rel_horn_report(&mut r, &h, *k <= 1);
            Ok(r)
        }
        Command::Match { input, k } => {
            let mut r = Report::new("match");
            let f = load_map_or_object(input)?;
            let h = matching(&f, *k)?;
            r.set("k", k);
            rel_horn_report(&mut r, &h, false);
            Ok(r)
        }
        Command::Nerve { groupoid, group, levels, output } => {
            let mut r = Report::new("nerve");
            let g = match (groupoid, group) {
                (Some(p), _) => load_groupoid(p)?,
                (None, Some(p)) => Groupoid::from_group(&load_group(p)?),
                (None, None) => return Err(Error::Invalid("give --groupoid or --group".into())),
            };
            let x = nerve(&g, *levels)?;
            r.set("levels", x.sizes());
            write_out(output, &SSetDoc::from_sset(&x), &mut r)?;
            Ok(r)
        }
        Command::Coskeleton { input, n, levels, output } => {
            let mut r = Report::new("coskeleton");
            let x = coskeleton(&*load_object(input)?, *n, *levels)?;
            r.set("levels", x.sizes());
            write_out(output, &SSetDoc::from_sset(&x), &mut r)?;
            Ok(r)
        }
        Command::Join { left, right, levels, output } => {
            let mut r = Report::new("join");
            let x = join(&load_sset(left)?, &load_sset(right)?, *levels)?;
            r.set("levels", x.sizes());
            write_out(output, &SSetDoc::from_sset(&x), &mut r)?;
            Ok(r)
        }
        Command::Dec { input, n, levels, output } => {
            let mut r = Report::new("dec");
            let x = dec(&*load_object(input)?, *n, *levels)?;
            r.set("levels", x.sizes());
            write_out(output, &SSetDoc::from_sset(&x), &mut r)?;
            Ok(r)
        }
        Command::Pathspace { input, k, levels, output } => {
            let mut r = Report::new("pathspace");
            let p = path_space(&load_map_or_object(input)?, *k, *levels)?;
            r.set("k", k).set("levels", p.carrier.sizes());
            write_out(output, &SSetDoc::from_sset(&p.carrier), &mut r)?;
            Ok(r)
        }
        Command::Strictify { input, n, output } => {
            let mut r = Report::new("strictify");
            let s = strictify(&load_map_or_object(input)?, *n)?;
            let c = compare_with_input(&s)?;
            r.set("levels", s.assembled.source().sizes());
            r.set("input_is_stack", c.is_stack.label());
            r.set("canonical_map_bijective", c.canonical_bijective);
            r.set("isomorphic_to_input", format!("{:?}", c.iso));
            r.require("consistent", c.consistent());
            write_out(output, &SMapDoc::from_smap(&s.assembled), &mut r)?;
            Ok(r)
        }
        Command::GroupCheck { group } => {
            let mut r = Report::new("group-check");
            let g = load_group(group)?;
            r.set("order", g.order).set("abelian", g.abelian).set("element_orders", g.order_profile());
            Ok(r)
        }
        Command::MooreFill { group, k, i, faces, strict } => {
            let mut r = Report::new("moore-fill");
            let g = load_simplicial_group(group, k + 1)?;
            let faces = parse_faces(faces, *k, *i)?;
            let v = moore_fill(&g, *k, *i, &faces, None)?;
            let ok = faces
                .iter()
                .enumerate()
                .all(|(j, f)| f.map_or(true, |f| g.sset.face(*k, j, v) == f));
            r.set("filler", v);
            r.require("faces_match", ok);
            if let Some(n) = strict {
                r.verdict("strict", &classify_strict(&g, *n)?);
            }
            Ok(r)
        }
        Command::Wbar { group, levels, output } => {
            let mut r = Report::new("wbar");
            let g = load_simplicial_group(group, levels.saturating_sub(1))?;
            let wb = w_bar(&g, *levels)?;
            r.set("levels", wb.sset.sizes());
            write_out(output, &SSetDoc::from_sset(&wb.sset), &mut r)?;
            Ok(r)
        }
        Command::W { group, levels, output } => {
            let mut r = Report::new("w");
            let g = load_simplicial_group(group, *levels)?;
            let w = w_total(&g, *levels)?;
            r.set("levels", w.sset.sizes());
            write_out(output, &SSetDoc::from_sset(&w.sset), &mut r)?;
            Ok(r)
        }
        Command::Quotient { action, levels, output } => {
            let mut r = Report::new("quotient");
            let a = load_action(action)?;
            let q = homotopy_quotient(&a, *levels)?;
            let p = q.projection()?;
            r.set("levels", q.sset.sizes()).set("base_levels", q.wbar.sset.sizes());
            write_out(output, &SMapDoc::from_smap(&p), &mut r)?;
            Ok(r)
        }
        Command::Kspace { abelian, n, levels, output } => {
            let mut r = Report::new("kspace");
            let k = em_space(&load_group(abelian)?, *n, *levels)?;
            r.set("levels", k.sset().sizes());
            write_out(output, &SimplicialGroupDoc::from_group(&k.group), &mut r)?;
            Ok(r)
        }
        Command::CocycleCheck { cocycle, node_limit } => {
            let mut r = Report::new("cocycle-check");
            let c = load_cocycle(cocycle)?;
            r.set("n", c.n);
            let verdict = match c.is_coboundary(*node_limit)? {
                CoboundarySearch::Found(b) => {
                    r.set("coboundary_of", b);
                    "trivial"
                }
                CoboundarySearch::NotCoboundary => "nontrivial",
                CoboundarySearch::Inconclusive => {
                    r.status = Status::Inconclusive;
                    "unknown"
                }
            };
            r.set("class", verdict);
            Ok(r)
        }
        Command::Descend { group, abelian, cocycle, levels, output } => {
            let mut r = Report::new("descend");
            if *levels > 4 || *levels < 2 {
                return Err(Error::Invalid("descend stores levels 2 to 4".into()));
            }
            let c = load_cocycle_checked(group, abelian, cocycle)?;
            let d = run_descent(&c)?;
            let x = d.x().truncate(*levels)?;
            r.set("levels", x.sizes()).set("cover_levels", d.span.cover.source().sizes());
            r.require("basepoint", x.size(0) == 1);
            r.verdict("hypercover", &d.hypercover);
            r.verdict("local_stack", &d.local_stack);
            r.verdict("groupoid", &d.groupoid);
            write_out(output, &SSetDoc::from_sset(&x), &mut r)?;
            Ok(r)
        }
        Command::Extract { group, abelian, cocycle, output } => {
            let mut r = Report::new("extract");
            let c = load_cocycle_checked(group, abelian, cocycle)?;
            let d = run_descent(&c)?;
            let t = extract_two_group_data(&d)?;
            let diff = t.associator.add(&c.neg())?;
            let same_class = match diff.is_coboundary(DEFAULT_NODE_LIMIT)? {
                CoboundarySearch::Found(_) => Status::Pass,
                CoboundarySearch::NotCoboundary => Status::Fail,
                CoboundarySearch::Inconclusive => Status::Inconclusive,
            };
            r.status = r.status.and(same_class);
            r.set("associator_matches_input", same_class.label());
            r.set("associator", CocycleDoc::from_cocycle(&t.associator).values);
            r.require("pentagon", true);
            write_out(output, &TwoGroupDoc::from_data(&t), &mut r)?;
            Ok(r)
        }
        Command::Verify { suite, seed } => {
            let mut r = Report::new("verify");
            let s = run_suite(suite, *seed)?;
            r.set("suite", suite).set("seed", seed).set("checks", s.checks.len());
            let failures: Vec<_> = s.failures().cloned().collect();
            if !failures.is_empty() {
                r.set("failures", failures);
            }
            r.require("all_passed", s.passed());
            Ok(r)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    set_level_budget(cli.budget);
    match run(&cli.command) {
        Ok(r) => {
            match cli.format {
                Format::Text => print!("{}", r.to_text()),
                Format::Json => println!("{}", to_pretty(&r.to_json())),
            }
            ExitCode::from(r.status.exit_code())
        }
        Err(e) => {
            let (code, msg) = error_exit(&e);
            match cli.format {
                Format::Text => eprintln!("error: {msg}"),
                Format::Json => {
                    let mut doc = serde_json::json!({ "error": msg, "exit": code });
                    if let Error::Rejected { witness, .. } = &e {
                        doc["witness"] = serde_json::to_value(witness).expect("serializable");
                    }
                    println!("{}", to_pretty(&doc));
                }
            }
            ExitCode::from(code)
        }
    }
}
