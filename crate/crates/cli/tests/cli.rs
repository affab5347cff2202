use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use dotd_core::tle::parse_tle;

fn dotd(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dotd")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

/// Writes a 96-satellite constellation and a config pointing at it.
fn setup(dir: &Path) -> PathBuf {
    let tle = dir.join("walker.tle");
    let out = dotd(&["walker", "--planes", "8", "--sats", "12", "--jitter", "3", "--seed", "4", "--output", tle.to_str().unwrap()]);
    assert!(out.status.success(), "{}", stderr(&out));
    let cfg = dir.join("run.toml");
    std::fs::write(
        &cfg,
        r#"
tle = "walker.tle"
algorithms = ["dotd", "greedy", "plusgrid"]

[grid]
start = "2024-01-01T00:00:00Z"
tau = 10.0
horizon = 60.0
"#,
    )
    .unwrap();
    cfg
}

#[test]
fn no_arguments_prints_usage_and_fails() {
    let out = dotd(&[]);
    assert!(!out.status.success());
    assert!(stderr(&out).contains("Usage"), "{}", stderr(&out));
}

#[test]
fn unknown_flag_fails() {
    let out = dotd(&["route", "--frobnicate"]);
    assert!(!out.status.success());
    assert!(stderr(&out).contains("--frobnicate"));
}

#[test]
fn walker_writes_parseable_records() {
    let out = dotd(&["walker", "--planes", "8", "--sats", "12", "--jitter", "0"]);
    assert!(out.status.success());
    let recs = parse_tle(&stdout(&out)).unwrap();
    assert_eq!(recs.len(), 96);
    assert_eq!(recs[12].raan, 45.0);
}

#[test]
fn route_covers_every_algorithm_and_scenario() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = setup(dir.path());
    let out = dotd(&["route", "--config", cfg.to_str().unwrap(), "--algorithm", "dotd,greedy,plusgrid"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "scenario,algorithm,slot,sat_count,isl_hops,latency_ms_with_gs,latency_ms_isl_only,mean_capacity_bps,persistent_links"
    );
    // 3 algorithms x 5 scenarios x 7 snapshots.
    assert_eq!(lines.count(), 3 * 5 * 7);
    for alg in ["dotd", "greedy", "plusgrid"] {
        for sc in ["S1", "S2", "S3", "S4", "S5"] {
            assert!(text.contains(&format!("{sc},{alg},")));
        }
    }
}

#[test]
fn repeated_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = setup(dir.path());
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for out in [&a, &b] {
        let o = dotd(&["route", "--config", cfg.to_str().unwrap(), "--output", out.to_str().unwrap()]);
        assert!(o.status.success(), "{}", stderr(&o));
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn churn_and_topology_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = setup(dir.path());
    let c = cfg.to_str().unwrap();

    let churn = dotd(&["churn", "--config", c, "--algorithm", "dotd", "--format", "json"]);
    assert!(churn.status.success(), "{}", stderr(&churn));
    let text = stdout(&churn);
    assert!(text.trim_start().starts_with('['));
    // One row per slot after the first.
    assert_eq!(text.matches("\"persistent_links\"").count(), 6);

    let topo = dotd(&["topology", "--config", c, "--algorithm", "greedy", "--compat-alg1-order"]);
    assert!(topo.status.success(), "{}", stderr(&topo));
    let edges = stdout(&topo);
    assert!(edges.starts_with("algorithm,slot,a,b,cost\n"));
    assert!(edges.lines().skip(1).all(|l| l.starts_with("greedy,")));
}

#[test]
fn flags_override_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = setup(dir.path());
    let out = dotd(&["churn", "--config", cfg.to_str().unwrap(), "--algorithm", "plusgrid", "--tau", "30", "--horizon", "90"]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert_eq!(stdout(&out).lines().count(), 1 + 3);
}

#[test]
fn errors_are_distinct() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dotd(&["route", "--config", dir.path().join("nope.toml").to_str().unwrap()]);
    assert!(!missing.status.success());
    assert!(stderr(&missing).contains("cannot read config"));

    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "[topology]\nw1 = 0.9\nw2 = 0.5\n").unwrap();
    let invalid = dotd(&["route", "--config", bad.to_str().unwrap()]);
    assert!(!invalid.status.success());
    assert!(stderr(&invalid).contains("invalid config"), "{}", stderr(&invalid));

    let no_source = dotd(&["route"]);
    assert!(!no_source.status.success());
    assert!(stderr(&no_source).contains("no satellite source"));

    let cfg = setup(dir.path());
    let grid = dotd(&["route", "--config", cfg.to_str().unwrap(), "--tau", "7"]);
    assert!(!grid.status.success());
    assert!(stderr(&grid).contains("time grid"), "{}", stderr(&grid));

    let theta = dotd(&["route", "--config", cfg.to_str().unwrap(), "--theta-min", "95"]);
    assert!(!theta.status.success());
    assert!(stderr(&theta).contains("visibility"), "{}", stderr(&theta));
}

#[test]
fn synthetic_source_from_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("synthetic.toml");
    std::fs::write(
        &cfg,
        "[walker]\nplanes = 4\nsats_per_plane = 6\nraan_jitter = 2.0\n\n[grid]\ntau = 30.0\nhorizon = 60.0\n",
    )
    .unwrap();
    let run = |seed: &str| {
        let o = dotd(&["topology", "--config", cfg.to_str().unwrap(), "--seed", seed, "--algorithm", "dotd"]);
        assert!(o.status.success(), "{}", stderr(&o));
        stdout(&o)
    };
    assert_eq!(run("1"), run("1"));
    assert_ne!(run("1"), run("2"));
}

#[test]
fn fetch_saves_document_byte_for_byte() {
    use std::io::{Read, Write};
    const BODY: &str = "ISS (ZARYA)\n\
1 25544U 98067A   21316.58314353 -.00007551  00000-0 -13101-3 0  9994\n\
2 25544  51.6442 328.9484 0004731 186.1225 318.0089 15.48559922311590\n";
    let listener = std::net::TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = listener.local_addr().unwrap();
    let server = std::thread::spawn(move || {
        let (mut s, _) = listener.accept().unwrap();
        let mut buf = [0u8; 2048];
        let _ = s.read(&mut buf);
        let head = format!("HTTP/1.1 200 OK\r\nContent-Length: {}\r\nConnection: close\r\n\r\n", BODY.len());
        s.write_all(head.as_bytes()).unwrap();
        s.write_all(BODY.as_bytes()).unwrap();
    });
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("iss.tle");
    let o = dotd(&["fetch", "--fetch-url", &format!("http://{addr}/iss"), "--timeout", "5", "--output", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    server.join().unwrap();
    assert_eq!(std::fs::read_to_string(&out).unwrap(), BODY);

    let refused = dotd(&["fetch", "--fetch-url", &format!("http://{addr}/iss"), "--timeout", "1"]);
    assert!(!refused.status.success());
    assert!(stderr(&refused).contains("network failure"), "{}", stderr(&refused));
}
