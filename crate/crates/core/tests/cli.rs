//! The command-line tool driven through files.

use polyrecon::io;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn polyrecon(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_polyrecon")).args(args).output().expect("binary runs")
}

fn arg(p: &Path) -> &str {
    p.to_str().expect("utf-8 temp path")
}

fn example(dir: &Path, name: &str) -> PathBuf {
    let out = dir.join(format!("{name}.json"));
    let r = polyrecon(&["example", name, "-o", arg(&out)]);
    assert_eq!(r.status.code(), Some(0), "{}", String::from_utf8_lossy(&r.stderr));
    out
}

#[test]
fn place_then_reconstruct_recovers_the_cube() {
    let dir = tempfile::tempdir().unwrap();
    let cube = example(dir.path(), "cube");
    let markup = dir.path().join("cube-markup.json");
    let rebuilt = dir.path().join("cube-rebuilt.json");
    assert_eq!(polyrecon(&["place", arg(&cube), "-o", arg(&markup)]).status.code(), Some(0));
    assert_eq!(io::read_markup(&markup).unwrap().len(), 6);
    assert_eq!(polyrecon(&["reconstruct", arg(&markup), "-o", arg(&rebuilt)]).status.code(), Some(0));
    let got = io::read_scene(&rebuilt).unwrap().scene;
    let want = io::read_scene(&cube).unwrap().scene;
    assert!(polyrecon::geometry::scenes_equal(&want, &got, 1e-9));
}

#[test]
fn batch_roundtrip_reports_every_scene() {
    let dir = tempfile::tempdir().unwrap();
    let batch = dir.path().join("batch");
    std::fs::create_dir(&batch).unwrap();
    for name in ["cube", "l-prism"] {
        std::fs::rename(example(dir.path(), name), batch.join(format!("{name}.json"))).unwrap();
    }
    // The L prism is not convex, so forcing the convex engine fails it.
    let r = polyrecon(&["roundtrip", "--batch", arg(&batch), "--engine", "convex"]);
    let text = String::from_utf8_lossy(&r.stdout);
    assert_eq!(r.status.code(), Some(1), "{text}");
    assert!(text.contains("1/2 passed"), "{text}");
    let r = polyrecon(&["roundtrip", "--batch", arg(&batch), "--strategy", "vertex", "--data", "point"]);
    assert_eq!(r.status.code(), Some(0), "{}", String::from_utf8_lossy(&r.stdout));
}

#[test]
fn elaborated_examples_need_their_metadata() {
    let dir = tempfile::tempdir().unwrap();
    let tree = example(dir.path(), "elaborated");
    assert_eq!(polyrecon(&["roundtrip", arg(&tree), "--meta", "ids,elab"]).status.code(), Some(0));
    assert_ne!(polyrecon(&["roundtrip", arg(&tree)]).status.code(), Some(0));
}

#[test]
fn export_writes_a_closed_mesh() {
    let dir = tempfile::tempdir().unwrap();
    let tunnel = example(dir.path(), "tunnel");
    let obj = dir.path().join("tunnel.obj");
    assert_eq!(polyrecon(&["export", arg(&tunnel), "-o", arg(&obj)]).status.code(), Some(0));
    let text = std::fs::read_to_string(&obj).unwrap();
    let vertices = text.lines().filter(|l| l.starts_with("v ")).count();
    let faces: Vec<Vec<usize>> = text.lines().filter(|l| l.starts_with("f ")).map(|l| l[2..].split(' ').map(|x| x.parse().unwrap()).collect()).collect();
    assert!(faces.iter().flatten().all(|&i| (1..=vertices).contains(&i)));
    let mut edges = std::collections::HashMap::new();
    for f in &faces {
        for k in 0..3 {
            *edges.entry((f[k], f[(k + 1) % 3])).or_insert(0) += 1;
        }
    }
    assert!(edges.keys().all(|&(a, b)| edges.get(&(b, a)) == Some(&1) && edges[&(a, b)] == 1));
    // One tunnel: V - E + F = 0.
    assert_eq!(vertices as i64 - edges.len() as i64 / 2 + faces.len() as i64, 0);
}

#[test]
fn catalog_listing_names_every_instance() {
    let r = polyrecon(&["catalog"]);
    assert_eq!(r.status.code(), Some(0));
    let text = String::from_utf8_lossy(&r.stdout);
    for name in ["simpleAmbi-3d", "topo-equivalent-pair", "intersecting-convex-pair", "convex-polygon-slide"] {
        assert!(text.contains(name), "{text}");
    }
}

#[test]
fn usage_errors_exit_with_input_code() {
    assert_eq!(polyrecon(&["reconstruct"]).status.code(), Some(2));
    assert_eq!(polyrecon(&["ambiguity", "x.json", "--class", "no-such-class"]).status.code(), Some(2));
    assert_eq!(polyrecon(&["frobnicate"]).status.code(), Some(2));
}
