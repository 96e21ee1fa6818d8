use std::path::Path;
use std::process::{Command, Output};

use hamsim::formats::{self, Status};
use hamsim::opcore::{HamiltonianExpr, Interaction, Site, SiteSystem};
use tempfile::TempDir;

fn hamsim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hamsim"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn report(out: &Output) -> toml::Table {
    std::str::from_utf8(&out.stdout).unwrap().parse().unwrap()
}

fn get<'a>(t: &'a toml::Table, path: &str) -> &'a toml::Value {
    let mut keys = path.split('.');
    let mut v = &t[keys.next().unwrap()];
    for k in keys {
        v = &v[k];
    }
    v
}

fn chain(n: usize) -> HamiltonianExpr {
    let sites = (0..n)
        .map(|i| Site::at(format!("q{i}"), 2, vec![i as f64, 0.0]))
        .collect();
    let mut h = HamiltonianExpr::new(SiteSystem::new(sites).unwrap());
    for i in 1..n {
        h.add_named(
            Interaction::Heisenberg,
            &[&format!("q{}", i - 1), &format!("q{i}")],
            1.0,
        )
        .unwrap();
    }
    h
}

fn save(dir: &TempDir, name: &str, text: &str) -> String {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn self_simulation_is_exact() {
    let dir = TempDir::new().unwrap();
    let h = save(&dir, "h.toml", &formats::hamiltonian_to_toml(&chain(3)));
    let out = hamsim(&[
        "verify", "--sim", &h, "--target", &h, "--delta", "100", "--eta", "0", "--eps", "0",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r["version"].as_str(), Some(hamsim::VERSION));
    assert_eq!(get(&r, "result.eta_achieved").as_float(), Some(0.0));
    assert_eq!(get(&r, "result.eps_achieved").as_float(), Some(0.0));
}

#[test]
fn cut_below_the_ground_state_is_a_rank_failure() {
    let dir = TempDir::new().unwrap();
    let h = save(&dir, "h.toml", &formats::hamiltonian_to_toml(&chain(2)));
    let out = hamsim(&[
        "verify", "--sim", &h, "--target", &h, "--delta", "-3.5", "--eps", "0.1",
    ]);
    assert_eq!(out.status.code(), Some(1));
    let r = report(&out);
    assert_eq!(r["status"].as_str(), Some("fail"));
    assert!(r["reason"].as_str().unwrap().contains("rank"));
}

#[test]
fn subdivision_scan_reports_its_slope() {
    let out = hamsim(&["scan", "--kind", "subdiv", "--deltas", "1e2,1e3,1e4,1e5"]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    let slope = get(&r, "result.table.slope").as_float().unwrap();
    assert!((-0.75..=-0.35).contains(&slope), "{slope}");
    assert_eq!(get(&r, "result.table.rows").as_array().unwrap().len(), 4);
    assert!(get(&r, "result.text")
        .as_str()
        .unwrap()
        .starts_with("# delta eps\n1e2 "));
}

#[test]
fn malformed_input_exits_two_with_a_location() {
    let dir = TempDir::new().unwrap();
    let bad = save(&dir, "bad.toml", "[[sites]]\nid = \"a\"\ndim = [\n");
    let out = hamsim(&["diag", &bad]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr.clone()).unwrap();
    assert!(err.contains("bad.toml") && err.contains("line 3"), "{err}");
    assert_eq!(report(&out)["status"].as_str(), Some("error"));

    let missing = dir.path().join("missing.toml");
    assert_eq!(
        hamsim(&["validate", missing.to_str().unwrap()])
            .status
            .code(),
        Some(2)
    );
    // Flag errors from the parser share the exit code.
    assert_eq!(
        hamsim(&["tile", "--width", "x", "--height", "2"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn gadget_outputs_feed_verify() {
    let dir = TempDir::new().unwrap();
    let p = |n: &str| dir.path().join(n).to_str().unwrap().to_string();
    let (sim, target, iso) = (p("sim.toml"), p("target.toml"), p("iso.toml"));
    let args = [
        "gadget",
        "--kind",
        "fork",
        "--family",
        "xy",
        "--delta",
        "1e5",
        "--eps",
        "0.05",
        "--emit-sim",
        &sim,
    ];
    let out = hamsim(
        &[
            &args[..],
            &["--emit-target", &target, "--emit-isometry", &iso],
        ]
        .concat(),
    );
    assert_eq!(out.status.code(), Some(0));
    let g = report(&out);
    let shift = get(&g, "result.energy_shift")
        .as_float()
        .unwrap()
        .to_string();
    for (file, kind) in [
        (&sim, "hamiltonian"),
        (&target, "hamiltonian"),
        (&iso, "isometry"),
    ] {
        let v = hamsim(&["validate", "--kind", kind, file]);
        assert_eq!(v.status.code(), Some(0), "{file}");
    }
    let out = hamsim(&[
        "verify",
        "--sim",
        &sim,
        "--target",
        &target,
        "--isometry",
        &iso,
        "--delta",
        "5e4",
        "--eps",
        "0.05",
        "--shift",
        &shift,
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v = report(&out);
    assert_eq!(
        get(&v, "result.eps_achieved"),
        get(&g, "result.certification.eps_achieved")
    );
}

#[test]
fn plans_apply_and_certify() {
    let dir = TempDir::new().unwrap();
    let h = save(&dir, "h.toml", &formats::hamiltonian_to_toml(&chain(2)));
    let plan = "delta_base = 10000.0\n\n[[rounds]]\ndelta = 10000.0\n\n[[rounds.applications]]\nkind = \"subdiv_pos\"\nsites = [\"q0\", \"q1\"]\nmediators = [\"m0\", \"m1\"]\nfamily = \"heisenberg\"\n";
    let plan = save(&dir, "plan.toml", plan);
    let out = hamsim(&["gadget", "--plan", &plan, "--target", &h]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(get(&r, "result.depth").as_integer(), Some(1));
    let eps = get(&r, "result.certification.eps_achieved")
        .as_float()
        .unwrap();
    assert!(eps <= 0.1);
}

#[test]
fn compile_emits_documents_that_validate() {
    let dir = TempDir::new().unwrap();
    let t = save(&dir, "t.toml", &formats::hamiltonian_to_toml(&chain(2)));
    let p = |n: &str| dir.path().join(n).to_str().unwrap().to_string();
    let (sim, plan, graph) = (p("sim.toml"), p("plan.toml"), p("graph.toml"));
    let out = hamsim(&[
        "compile",
        "--target",
        &t,
        "--emit-sim",
        &sim,
        "--emit-plan",
        &plan,
        "--emit-graph",
        &graph,
    ]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(get(&r, "result.depth").as_integer(), Some(1));
    assert!(get(&r, "result.certification.pass").as_bool().unwrap());
    for (file, kind) in [(&sim, "hamiltonian"), (&plan, "plan"), (&graph, "graph")] {
        assert_eq!(
            hamsim(&["validate", "--kind", kind, file]).status.code(),
            Some(0),
            "{kind}"
        );
    }
    let text = std::fs::read_to_string(Path::new(&sim)).unwrap();
    assert_eq!(
        formats::hamiltonian_from_toml(&text)
            .unwrap()
            .system()
            .len(),
        4
    );
}

#[test]
fn reports_are_byte_identical_across_runs() {
    let dir = TempDir::new().unwrap();
    let t = save(&dir, "t.toml", &formats::hamiltonian_to_toml(&chain(3)));
    let jobs: Vec<Vec<&str>> = vec![
        vec!["compile", "--target", &t, "--lattice", "hexagonal"],
        vec!["scan", "--kind", "fork"],
        vec!["clock", "history", "--steps", "5", "--seed", "9"],
        vec!["tile", "--layers", "--width", "6", "--height", "4"],
        vec!["clock", "synth", "--theta", "0.3", "--delta", "0.02"],
    ];
    for job in &jobs {
        let a = hamsim(job);
        let b = hamsim(job);
        assert_eq!(a.stdout, b.stdout, "{job:?}");
        assert_eq!(a.status.code(), b.status.code());
    }
    let out = dir.path().join("r.toml");
    let out = out.to_str().unwrap();
    hamsim(&[
        "clock", "history", "--steps", "5", "--seed", "9", "--out", out,
    ]);
    assert_eq!(std::fs::read(out).unwrap(), hamsim(&jobs[2]).stdout);
    let other = hamsim(&["clock", "history", "--steps", "5", "--seed", "10"]);
    assert_ne!(other.stdout, hamsim(&jobs[2]).stdout);
}

#[test]
fn tile_and_clock_statuses() {
    let out = hamsim(&[
        "tile",
        "--width",
        "3",
        "--height",
        "3",
        "--solver",
        "exhaustive",
        "--require-unique",
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(
        get(&report(&out), "result.row_values")
            .as_array()
            .unwrap()
            .len(),
        3
    );
    let out = hamsim(&[
        "clock",
        "synth",
        "--theta",
        "0.3",
        "--delta",
        "1e-9",
        "--max-len",
        "3",
    ]);
    assert_eq!(out.status.code(), Some(1));
    let out = hamsim(&["clock", "gap", "--steps", "4,16"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(Status::Fail.exit_code(), 1);
}
