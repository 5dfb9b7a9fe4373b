//! Command-line front end.
//!
//! Exit codes: 0 success (or a unique interpretation), 1 round-trip
//! failure or output write failure, 2 unreadable or malformed input,
//! 3 placement or export failure, 4 reconstruction failure, 5 ambiguous
//! markup, 6 oracle search budget exceeded.

use clap::{Args, Parser, Subcommand};
use polyrecon::generate;
use polyrecon::io::{self, SceneFile};
use polyrecon::markup::MarkupDescription;
use polyrecon::oracle::{self, CandidateSpace, ModelClass};
use polyrecon::pipeline::{self, DataArg, Engine, MetaFlags, PlaceOptions, RoundTrip, Strategy};
use polyrecon::recon::elaboration::apply_elaborations;
use polyrecon::Error;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

const EXIT_FAIL: u8 = 1;
const EXIT_INPUT: u8 = 2;
const EXIT_PLACE: u8 = 3;
const EXIT_RECON: u8 = 4;
const EXIT_AMBIGUOUS: u8 = 5;
const EXIT_BUDGET: u8 = 6;

#[derive(Parser)]
#[command(name = "polyrecon", version, about = "Reconstruct polyhedral scenes from marker markup")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct PlaceArgs {
    /// per-face, dense, vertex, sides (2D footprints) or vertex-2d.
    #[arg(long, default_value = "per-face", value_parser = parse_strategy)]
    strategy: Strategy,
    /// point, point-plane or point-normal.
    #[arg(long, default_value = "point-plane", value_parser = parse_data)]
    data: DataArg,
    /// Metadata groups, comma separated: ids, elab, order.
    #[arg(long, value_delimiter = ',', value_parser = ["ids", "elab", "order"])]
    meta: Vec<String>,
    /// Random interior positions from this seed instead of centroids.
    #[arg(long)]
    seed: Option<u64>,
    /// Markers per face (edge, for `sides`).
    #[arg(long, default_value_t = 1)]
    per_face: usize,
    /// Grid spacing for the dense strategy.
    #[arg(long)]
    spacing: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Place markers on a scene.
    Place {
        scene: PathBuf,
        #[command(flatten)]
        opts: PlaceArgs,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Rebuild a scene from a markup.
    Reconstruct {
        markup: PathBuf,
        /// Engine name, or `auto` to choose from the metadata present.
        #[arg(long, default_value = "auto", value_parser = parse_engine)]
        engine: EngineArg,
        /// Report unused marker planes as warnings instead of failing.
        #[arg(long)]
        lenient: bool,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Place markers, reconstruct, and compare with the input.
    Roundtrip {
        #[arg(required_unless_present = "batch")]
        scene: Option<PathBuf>,
        /// Run every `*.json` scene in a directory.
        #[arg(long, conflicts_with = "scene")]
        batch: Option<PathBuf>,
        #[command(flatten)]
        opts: PlaceArgs,
        #[arg(long, default_value = "auto", value_parser = parse_engine)]
        engine: EngineArg,
        #[arg(long)]
        lenient: bool,
    },
    /// Count the interpretations of a markup within a model class.
    Ambiguity {
        markup: PathBuf,
        /// convex-3d, convex-set-3d, rect-set-2d, convex-polygon-set-2d or orthogonal-polyhedron.
        #[arg(long = "class", value_parser = parse_class)]
        class: ModelClass,
        #[arg(long, default_value_t = oracle::DEFAULT_BUDGET)]
        budget: u64,
        /// Directory for one scene file per interpretation.
        #[arg(long)]
        witnesses: Option<PathBuf>,
    },
    /// Write a triangulated OBJ mesh.
    Export {
        scene: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// List the ambiguous catalog markups, or write one.
    Catalog {
        name: Option<String>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Write a sample scene: cube, l-prism, tunnel, elaborated, boxes, rects.
    Example {
        name: String,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

#[derive(Clone, Copy)]
enum EngineArg {
    Auto,
    Fixed(Engine),
}

fn parse_engine(s: &str) -> Result<EngineArg, String> {
    if s == "auto" {
        return Ok(EngineArg::Auto);
    }
    Engine::parse(s).map(EngineArg::Fixed).ok_or_else(|| {
        let names: Vec<&str> = Engine::ALL.iter().map(|e| e.name()).collect();
        format!("unknown engine {s:?} (expected auto, {})", names.join(", "))
    })
}

fn parse_strategy(s: &str) -> Result<Strategy, String> {
    Strategy::parse(s).ok_or_else(|| format!("unknown strategy {s:?}"))
}

fn parse_data(s: &str) -> Result<DataArg, String> {
    match s {
        "point" => Ok(DataArg::Point),
        "point-plane" => Ok(DataArg::PointPlane),
        "point-normal" => Ok(DataArg::PointNormal),
        _ => Err(format!("unknown data kind {s:?}")),
    }
}

fn parse_class(s: &str) -> Result<ModelClass, String> {
    ModelClass::parse(s).ok_or_else(|| {
        let names: Vec<&str> = ModelClass::ALL.iter().map(|c| c.name()).collect();
        format!("unknown class {s:?} (expected one of {})", names.join(", "))
    })
}

impl PlaceArgs {
    fn options(&self) -> PlaceOptions {
        let has = |k: &str| self.meta.iter().any(|m| m == k);
        PlaceOptions {
            strategy: self.strategy,
            data: self.data,
            meta: MetaFlags { ids: has("ids"), elab: has("elab"), order: has("order") },
            seed: self.seed,
            per_face: self.per_face,
            spacing: self.spacing,
        }
    }
}

/// Early exit carrying its code; the message is already printed.
struct Exit(u8);

fn error(code: u8, msg: impl std::fmt::Display) -> Exit {
    eprintln!("ERROR: {msg}");
    Exit(code)
}

fn typed(code: u8, e: &Error) -> Exit {
    error(code, format!("{}: {e}", e.kind()))
}

fn emit(output: &Option<PathBuf>, text: &str) -> Result<(), Exit> {
    match output {
        Some(p) => io::write_atomic(p, text).map_err(|e| error(EXIT_FAIL, format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn input_error(p: &Path, e: io::FileError) -> Exit {
    match e {
        io::FileError::Io { .. } => error(EXIT_INPUT, e),
        _ => error(EXIT_INPUT, format!("{}: {e}", p.display())),
    }
}

fn read_scene(p: &Path) -> Result<SceneFile, Exit> {
    io::read_scene(p).map_err(|e| input_error(p, e))
}

fn read_markup(p: &Path) -> Result<MarkupDescription, Exit> {
    io::read_markup(p).map_err(|e| input_error(p, e))
}

fn engine_for(arg: EngineArg, d: &MarkupDescription) -> Engine {
    match arg {
        EngineArg::Fixed(e) => e,
        EngineArg::Auto => {
            let e = Engine::auto(d);
            eprintln!("INFO: engine auto selected {}", e.name());
            e
        }
    }
}

fn roundtrip_one(file: &SceneFile, opts: &PlaceOptions, engine: EngineArg, lenient: bool) -> (RoundTrip, Option<Engine>) {
    let engine = match engine {
        EngineArg::Fixed(e) => e,
        EngineArg::Auto => match pipeline::place(file, opts) {
            Ok(d) => Engine::auto(&d),
            Err(e) => return (RoundTrip::PlacementFailed(e), None),
        },
    };
    (pipeline::roundtrip(file, opts, engine, !lenient), Some(engine))
}

fn verdict_lines(r: &RoundTrip) -> Vec<String> {
    match r {
        RoundTrip::Pass => vec!["PASS".into()],
        RoundTrip::Mismatch { diff } => std::iter::once("FAIL: reconstruction differs from the input".to_string()).chain(diff.iter().cloned()).collect(),
        RoundTrip::EngineFailed(e) => vec![format!("FAIL: engine refused the markup: {}: {e}", e.kind())],
        RoundTrip::PlacementFailed(e) => vec![format!("FAIL: placement failed: {}: {e}", e.kind())],
    }
}

fn run(cli: Cli) -> Result<(), Exit> {
    match cli.command {
        Command::Place { scene, opts, output } => {
            let file = read_scene(&scene)?;
            let d = pipeline::place(&file, &opts.options()).map_err(|e| typed(EXIT_PLACE, &e))?;
            emit(&output, &io::serialize_markup(&d))
        }
        Command::Reconstruct { markup, engine, lenient, output } => {
            let d = read_markup(&markup)?;
            let engine = engine_for(engine, &d);
            let r = pipeline::reconstruct(engine, &d, !lenient).map_err(|e| typed(EXIT_RECON, &e))?;
            for w in &r.warnings {
                eprintln!("WARN: {w}");
            }
            emit(&output, &io::serialize_scene(&r.scene))
        }
        Command::Roundtrip { scene: Some(scene), opts, engine, lenient, .. } => {
            let file = read_scene(&scene)?;
            let (r, used) = roundtrip_one(&file, &opts.options(), engine, lenient);
            if let (EngineArg::Auto, Some(e)) = (engine, used) {
                eprintln!("INFO: engine auto selected {}", e.name());
            }
            for l in verdict_lines(&r) {
                println!("{l}");
            }
            match r {
                RoundTrip::Pass => Ok(()),
                RoundTrip::PlacementFailed(_) => Err(Exit(EXIT_PLACE)),
                _ => Err(Exit(EXIT_FAIL)),
            }
        }
        Command::Roundtrip { batch, opts, engine, lenient, .. } => {
            let dir = batch.expect("clap requires a scene or a batch directory");
            batch_roundtrip(&dir, &opts.options(), engine, lenient)
        }
        Command::Ambiguity { markup, class, budget, witnesses } => {
            let d = read_markup(&markup)?;
            let space = CandidateSpace::new(&d, class).with_budget(budget);
            let found = oracle::enumerate_consistent(&d, &space).map_err(|e| match e {
                Error::SearchBudgetExceeded(_) => typed(EXIT_BUDGET, &e),
                _ => typed(EXIT_RECON, &e),
            })?;
            let n = found.len();
            println!("{n} interpretation{}", if n == 1 { "" } else { "s" });
            for (k, w) in found.iter().enumerate() {
                println!("  #{}: {} part{}", k + 1, w.part_count(), if w.part_count() == 1 { "" } else { "s" });
            }
            if let Some(dir) = witnesses {
                std::fs::create_dir_all(&dir).map_err(|e| error(EXIT_FAIL, format!("{}: {e}", dir.display())))?;
                for (k, w) in found.iter().enumerate() {
                    let p = dir.join(format!("witness-{}.json", k + 1));
                    io::write_atomic(&p, &io::serialize_scene(&w.to_scene())).map_err(|e| error(EXIT_FAIL, format!("{}: {e}", p.display())))?;
                }
            }
            match n {
                0 => Err(error(EXIT_FAIL, "no consistent interpretation in this class")),
                1 => Ok(()),
                _ => Err(Exit(EXIT_AMBIGUOUS)),
            }
        }
        Command::Export { scene, output } => {
            let file = read_scene(&scene)?;
            let obj = io::export_obj(&file.scene).map_err(|e| typed(EXIT_PLACE, &e))?;
            emit(&output, &obj)
        }
        Command::Catalog { name: None, .. } => {
            for c in oracle::catalog() {
                println!("{}\t{}\t{} markers\t{} interpretations", c.name, c.class.name(), c.markup.len(), c.witnesses.len());
            }
            Ok(())
        }
        Command::Catalog { name: Some(name), output } => {
            let c = oracle::catalog_instance(&name).ok_or_else(|| error(EXIT_INPUT, format!("no catalog instance named {name:?}")))?;
            emit(&output, &io::serialize_markup(&c.markup))
        }
        Command::Example { name, seed, output } => {
            let file = example(&name, seed).ok_or_else(|| error(EXIT_INPUT, format!("no example named {name:?}")))?;
            emit(&output, &io::serialize_scene_file(&file))
        }
    }
}

fn example(name: &str, seed: u64) -> Option<SceneFile> {
    let plain = |scene| SceneFile { scene, base_refs: Default::default() };
    let tree = |t: polyrecon::recon::elaboration::ElaborationTree| {
        let scene = apply_elaborations(&t).expect("generated trees build");
        SceneFile { scene, base_refs: t.base_refs() }
    };
    let mut rng = generate::rng(seed);
    Some(match name {
        "cube" => plain(generate::unit_cube()),
        "l-prism" => plain(generate::l_prism()),
        "tunnel" => tree(generate::tunnelled_box(1)),
        "elaborated" => tree(generate::random_elaboration_tree(&mut rng, generate::ProfileShape::Convex)),
        "boxes" => tree(generate::random_box_intrusions(&mut rng, 6)),
        "rects" => plain(pipeline::planar_scene(&generate::random_rect_set(&mut rng, 6, 12))),
        _ => return None,
    })
}

fn batch_roundtrip(dir: &Path, opts: &PlaceOptions, engine: EngineArg, lenient: bool) -> Result<(), Exit> {
    let entries = std::fs::read_dir(dir).map_err(|e| error(EXIT_INPUT, format!("{}: {e}", dir.display())))?;
    let mut paths: Vec<PathBuf> = entries.filter_map(|e| e.ok().map(|e| e.path())).filter(|p| p.extension().is_some_and(|x| x == "json")).collect();
    paths.sort();
    let workers = std::thread::available_parallelism().map_or(1, |n| n.get()).min(paths.len().max(1));
    let mut lines: Vec<(usize, bool, Vec<String>)> = Vec::with_capacity(paths.len());
    std::thread::scope(|s| {
        let handles: Vec<_> = (0..workers)
            .map(|w| {
                let paths = &paths;
                s.spawn(move || {
                    let mut out = Vec::new();
                    for i in (w..paths.len()).step_by(workers) {
                        let name = paths[i].file_name().map_or_else(String::new, |n| n.to_string_lossy().into_owned());
                        let (ok, text) = match io::read_scene(&paths[i]) {
                            Err(e) => (false, vec![format!("FAIL {name}: unreadable: {e}")]),
                            Ok(file) => {
                                let (r, _) = roundtrip_one(&file, opts, engine, lenient);
                                let mut v = verdict_lines(&r);
                                v[0] = format!("{} {name}{}", if r.passed() { "PASS" } else { "FAIL" }, v[0].strip_prefix("PASS").or(v[0].strip_prefix("FAIL")).unwrap_or(""));
                                (r.passed(), v)
                            }
                        };
                        out.push((i, ok, text));
                    }
                    out
                })
            })
            .collect();
        for h in handles {
            lines.extend(h.join().expect("round-trip worker panicked"));
        }
    });
    lines.sort_by_key(|l| l.0);
    let passed = lines.iter().filter(|l| l.1).count();
    for (_, _, text) in &lines {
        for l in text {
            println!("{l}");
        }
    }
    println!("{passed}/{} passed", lines.len());
    if passed == lines.len() {
        Ok(())
    } else {
        Err(Exit(EXIT_FAIL))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Exit(code)) => ExitCode::from(code),
    }
}
