use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use circcons::io::InstanceFile;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_circcons")).args(args).output().expect("binary runs")
}

fn run_with_threads(args: &[&str], threads: &str) -> Output {
    Command::new(env!("CARGO_BIN_EXE_circcons"))
        .args(args)
        .env("RAYON_NUM_THREADS", threads)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn solve_mscs_prints_exact_optimum() {
    let f = fixture("three_strings.json");
    let o = run(&["solve-mscs", path_str(&f), "--all-optima"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.starts_with("optimal 4/3 (1.333333), delta (0,1,1)\n"), "{out}");
    assert!(out.contains("  (0,2,1)\n"), "{out}");
}

#[test]
fn solve_mscs_decision_no_exits_one() {
    let o = run(&["solve-mscs", path_str(&fixture("three_strings_target.json"))]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("decision no (target 1)"));
}

#[test]
fn cost_fn_flag_replaces_table() {
    let o = run(&["solve-mscs", path_str(&fixture("three_strings.json")), "--cost-fn", "ccs"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("optimal 2 (2.000000)"), "{}", stdout(&o));
    let o = run(&["solve-mscs", path_str(&fixture("three_strings.json")), "--cost-fn", "nope"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("unknown cost function"));
}

#[test]
fn dtw_mean_with_length_cap() {
    let o = run(&["dtw-mean", path_str(&fixture("three_series.json")), "--max-len", "5"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).starts_with("optimal 161/12 (13.416667), mean (1/4, 1, 10, 0, 4/3)"), "{}", stdout(&o));
}

#[test]
fn dtw_dist_lists_pairs() {
    let o = run(&["dtw-dist", path_str(&fixture("three_series.json"))]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert_eq!(out.lines().count(), 3);
    assert!(out.contains("dtw(2,3) = 4 (4.000000)"), "{out}");
}

#[test]
fn solve_ccs_reports_consensus() {
    let o = run(&["solve-ccs", path_str(&fixture("ccs_small.json"))]);
    let out = stdout(&o);
    assert!(out.starts_with("optimal "), "{out}");
    assert!(out.contains("consensus "));
}

#[test]
fn verify_bundle_fixture_passes_and_is_stable() {
    let f = fixture("reduction_bundle.json");
    let a = run_with_threads(&["verify", path_str(&f), "--json"], "1");
    let b = run_with_threads(&["verify", path_str(&f), "--json"], "4");
    assert_eq!(a.status.code(), Some(0), "{}", stdout(&a));
    assert_eq!(a.stdout, b.stdout);
    let text = run(&["verify", path_str(&f)]);
    assert!(stdout(&text).ends_with("all checks passed\n"));
}

#[test]
fn pipeline_generate_reduce_verify() {
    let dir = tempfile::tempdir().unwrap();
    let g = dir.path().join("g.json");
    let b = dir.path().join("b.json");
    let o = run(&["gen-rmcc", "--k", "4", "--n", "2", "--d", "3", "--seed", "9", "-o", path_str(&g)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(run(&["solve-rmcc", path_str(&g)]).status.code(), Some(0));
    let o = run(&["reduce", "rmcc-to-mscs", path_str(&g), "-o", path_str(&b)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stderr(&o).contains("target "));
    let o = run(&["verify", path_str(&b)]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("PASS witness_cost"));
}

#[test]
fn lambda_override_warns_and_stride_search_runs() {
    let dir = tempfile::tempdir().unwrap();
    let g = dir.path().join("cycle.txt");
    let b = dir.path().join("b.json");
    std::fs::copy(fixture("cycle_graph.txt"), &g).unwrap();
    assert_eq!(run(&["solve-rmcc", path_str(&g)]).status.code(), Some(1));
    let o = run(&["reduce", "rmcc-to-mscs", path_str(&g), "--override-lambda", "41", "-o", path_str(&b)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stderr(&o).contains("outside the proof regime"));
    let bundle = InstanceFile::load(&b).unwrap();
    let params = &bundle.provenance.as_ref().unwrap().params;
    let stride = params["m_prime"].as_u64().unwrap() + 1;
    let o = run(&["solve-mscs", path_str(&b), "--stride", &stride.to_string()]);
    // The colored cycle has no clique, so the aligned minimum misses the target.
    assert_eq!(o.status.code(), Some(1), "{}", stdout(&o));
    assert!(stdout(&o).contains("searched 68921 shift vectors"));
    let o = run(&["verify", path_str(&b)]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("outside proof regime"));
}

#[test]
fn padding_and_dtw_reductions() {
    let dir = tempfile::tempdir().unwrap();
    let c = dir.path().join("c.json");
    let o = run(&["reduce", "mscs-to-ccs", path_str(&fixture("padding_source.json")), "-o", path_str(&c)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(run(&["verify", path_str(&c)]).status.code(), Some(0));

    let d = dir.path().join("d.json");
    let src = fixture("phi_micro.json");
    let o = run(&["reduce", "mscs-to-dtw", path_str(&src), "-o", path_str(&d)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("outside proof regime"), "{}", stderr(&o));
    let o = run(&[
        "reduce", "mscs-to-dtw", path_str(&src), "--override-m", "4", "--override-r", "3", "--allow-small-k", "-o",
        path_str(&d),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stderr(&o).contains("warning"));
    let o = run(&["verify", path_str(&d)]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("PASS fcost_bound"));
}

#[test]
fn exit_codes_for_errors() {
    let o = run(&["solve-mscs", path_str(&fixture("reduction_bundle.json")), "--guard-states", "10"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("guard exceeded"));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{\"kind\": \"mscs\",\n \"strings\": [],\n \"cost_fn\": \"sigma\"}").unwrap();
    let o = run(&["solve-mscs", path_str(&bad)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("strings"), "{}", stderr(&o));
    std::fs::write(&bad, "{\"kind\": \"dtw\",\n \"series\": [[1, 2.5]]}").unwrap();
    let o = run(&["dtw-mean", path_str(&bad)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line 2"), "{}", stderr(&o));
    let o = run(&["solve-ccs", path_str(&fixture("three_series.json"))]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn fixtures_round_trip() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures");
    for entry in std::fs::read_dir(dir).unwrap() {
        let p = entry.unwrap().path();
        if p.extension().is_some_and(|e| e == "json") {
            let f = InstanceFile::load(&p).unwrap();
            let again = InstanceFile::from_json(&f.to_json()).unwrap();
            assert_eq!(again, f, "{}", p.display());
            assert_eq!(again.to_json(), f.to_json(), "{}", p.display());
        }
    }
    let (g, _) = circcons::io::load_graph(&fixture("cycle_graph.txt")).unwrap();
    let text = std::fs::read_to_string(fixture("cycle_graph.txt")).unwrap();
    assert_eq!(g.to_text(), text);
}
