use std::path::Path;
use std::process::Command;

fn run(dir: &Path, config: &str, out: &str) -> (i32, String, String) {
    let cfg = dir.join("run.cfg");
    std::fs::write(&cfg, config).unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_bjorling"))
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(dir.join(out))
        .output()
        .unwrap();
    (
        o.status.code().unwrap(),
        String::from_utf8(o.stdout).unwrap(),
        String::from_utf8(o.stderr).unwrap(),
    )
}

fn read(dir: &Path, out: &str, file: &str) -> String {
    std::fs::read_to_string(dir.join(out).join(file)).unwrap()
}

#[test]
fn identity_writes_mesh_and_reports() {
    let dir = tempfile::tempdir().unwrap();
    let (code, stdout, _) = run(dir.path(), "scenario = identity\nepsilon = 0.1\nhalf_width = 4\n", "o");
    assert_eq!(code, 0, "{stdout}");
    let obj = read(dir.path(), "o", "surface_eps0.1.obj");
    assert_eq!(obj.lines().filter(|l| l.starts_with("v ")).count(), 81);
    assert_eq!(obj.lines().filter(|l| l.starts_with("f ")).count(), 64);
    let audit = read(dir.path(), "o", "audit.csv");
    assert!(audit.starts_with("# bjorling-audit v1\n"));
    let row: Vec<&str> = audit.lines().nth(2).unwrap().split(',').collect();
    assert_eq!(row[2], "81");
    assert!(row[5].parse::<f64>().unwrap() <= 1e-10);
    assert!(read(dir.path(), "o", "errors.csv").starts_with("# bjorling-errors v1\n"));
}

#[test]
fn catenoid_refinement_reports_second_order() {
    let dir = tempfile::tempdir().unwrap();
    let (code, _, err) = run(
        dir.path(),
        "scenario = catenoid_ex1\nepsilons = 0.1, 0.05, 0.025\nhalf_width = 2\nconstruction = A\n",
        "o",
    );
    assert_eq!(code, 0, "{err}");
    let orders = read(dir.path(), "o", "orders.csv");
    let g = orders.lines().find(|l| l.starts_with("g_sup,")).unwrap();
    let slope: f64 = g.split(',').nth(1).unwrap().parse().unwrap();
    assert!(slope >= 1.8, "{orders}");
    let meta = read(dir.path(), "o", "metadata.csv");
    assert!(meta.contains("reflected,true"), "{meta}");
}

#[test]
fn oversized_window_masks_the_divergent_corner() {
    let dir = tempfile::tempdir().unwrap();
    let (code, _, err) = run(dir.path(), "scenario = curved_ex2\nepsilon = 0.1\nhalf_width = 22\n", "o");
    assert_eq!(code, 0, "{err}");
    let audit = read(dir.path(), "o", "audit.csv");
    let divergent: usize = audit.lines().nth(2).unwrap().split(',').nth(3).unwrap().parse().unwrap();
    assert!(divergent > 0);
}

#[test]
fn identical_configs_give_identical_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let config = "scenario = curved_ex2\nepsilons = 0.1, 0.05\nhalf_width = 4\n";
    assert_eq!(run(dir.path(), config, "a").0, 0);
    assert_eq!(run(dir.path(), config, "b").0, 0);
    for file in ["surface_eps0.1.obj", "surface_eps0.05.obj", "audit.csv", "errors.csv", "orders.csv", "metadata.csv"] {
        assert_eq!(read(dir.path(), "a", file), read(dir.path(), "b", file), "{file}");
    }
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let (code, _, err) = run(dir.path(), "scenario = identity\nepsilon = -1\nhalf_width = 4\n", "o");
    assert_eq!(code, 3);
    assert!(err.contains("epsilon"), "{err}");
    let (code, _, err) = run(dir.path(), "epsilon = 0.1\nhalf_width = 4\n", "o");
    assert_eq!(code, 3);
    assert!(err.contains("'scenario'"), "{err}");
    let (code, _, _) = run(dir.path(), "scenario = helicoid\nepsilon = 0.1\nhalf_width = 4\n", "o");
    assert_eq!(code, 3);
    // |g(0)| exceeds the cap, so the anchor cell is masked.
    let (code, _, err) = run(dir.path(), "scenario = moebius\nepsilon = 0.1\nhalf_width = 4\ncap = 0.1\n", "o");
    assert_eq!(code, 2, "{err}");
}

#[test]
fn quiet_prints_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("q.cfg");
    std::fs::write(&cfg, "scenario = identity\nepsilon = 0.1\nhalf_width = 3\nwrite_obj = false\n").unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_bjorling"))
        .args(["--quiet", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(dir.path().join("o"))
        .output()
        .unwrap();
    assert!(o.status.success());
    assert!(o.stdout.is_empty());
    assert!(!dir.path().join("o/surface_eps0.1.obj").exists());
}
