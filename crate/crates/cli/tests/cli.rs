use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const EXE: &str = env!("CARGO_BIN_EXE_madc");

fn madc(args: &[&str]) -> Output {
    Command::new(EXE)
        .args(args)
        .env_remove("MADC_OUT_DIR")
        .output()
        .expect("spawn madc")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

const CYCLIC_6_2: &str =
    "* 6 12 10 5 *\n* * 1 7 11 6\n1 * * 2 8 12\n7 2 * * 3 9\n10 8 3 * * 4\n5 11 9 4 * *\n";

#[test]
fn construct_writes_canonical_text() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("c.pda");
    let o = madc(&[
        "construct",
        "--model",
        "cyclic",
        "--q",
        "6",
        "--alpha",
        "2",
        "-o",
        path.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(stdout(&o).starts_with("(6,6,2,12), g=2, l=1"));
    assert_eq!(fs::read_to_string(&path).unwrap(), CYCLIC_6_2);

    // Without a destination the array goes to stdout, parameters to stderr.
    let o = madc(&["construct", "--model", "cyclic", "--q", "6", "--alpha", "2"]);
    assert_eq!(stdout(&o), CYCLIC_6_2);
    assert_eq!(stderr(&o).trim(), "(6,6,2,12), g=2, l=1");
}

#[test]
fn construct_rejects_bad_parameters() {
    let o = madc(&["construct", "--model", "cyclic", "--q", "4", "--alpha", "2"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("alpha < Q/2 violated"));

    let o = madc(&["construct", "--model", "cyclic", "--q", "7", "--alpha", "2"]);
    assert_eq!(code(&o), 2);

    let o = madc(&[
        "construct",
        "--model",
        "connect",
        "--f",
        "3",
        "--alpha",
        "2",
        "--k",
        "1",
    ]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("K > 1 violated"));

    let o = madc(&[
        "construct",
        "--model",
        "connect",
        "--q",
        "3",
        "--alpha",
        "2",
    ]);
    assert_eq!(code(&o), 2);
}

#[test]
fn verify_reports_params_or_witness() {
    let dir = tempfile::tempdir().unwrap();
    let good = dir.path().join("good.pda");
    fs::write(&good, CYCLIC_6_2).unwrap();
    let o = madc(&["verify", good.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o), "(6,6,2,12), g=2, l=1\n");

    // Relabel the 1 at (3,1) as 7: label 7 then sits at (3,1) and (2,4)
    // while (2,1) and (3,4) are stars, so A3 fails.
    let bad = dir.path().join("bad.pda");
    fs::write(&bad, CYCLIC_6_2.replacen("1 * * 2", "7 * * 2", 1)).unwrap();
    let o = madc(&["verify", bad.to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    assert!(stdout(&o).contains("A3"), "{}", stdout(&o));

    let garbled = dir.path().join("garbled.pda");
    fs::write(&garbled, "* x\n1 *\n").unwrap();
    let o = madc(&["verify", garbled.to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    assert!(stdout(&o).starts_with("parse error"));

    let o = madc(&["verify", dir.path().join("missing.pda").to_str().unwrap()]);
    assert_eq!(code(&o), 2);
}

#[test]
fn simulate_reports_exact_loads() {
    let o = madc(&[
        "simulate", "--model", "connect", "--k", "3", "--f", "3", "--alpha", "2", "--format",
        "json",
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let rows: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let row = &rows[0];
    assert_eq!(row["l_measured"], "1/18");
    assert_eq!(row["l_formula"], "1/18");
    assert_eq!(row["r"], "1");
    assert_eq!(row["status"], "ok");
    assert_eq!(row["s"], 1);

    let o = madc(&[
        "simulate", "--model", "cyclic", "--k", "6", "--q", "6", "--alpha", "2", "--trials", "3",
    ]);
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("model,k,inner,alpha"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 3);
    assert!(rows
        .iter()
        .all(|r| r.contains(",1/15,") && r.ends_with(",ok")));
}

#[test]
fn simulate_rejects_indivisible_beta() {
    let o = madc(&[
        "simulate", "--model", "connect", "--k", "3", "--f", "3", "--alpha", "2", "--beta", "3",
    ]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("not divisible"));
}

#[test]
fn audit_modes() {
    let o = madc(&["audit", "--q", "3"]);
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    assert_eq!(text.lines().count(), 1 + 3 + 1);
    assert!(text
        .lines()
        .skip(1)
        .all(|l| l.contains(",0,0,") && l.ends_with("true")));

    let o = madc(&["audit", "--q", "1"]);
    assert_eq!(code(&o), 0);

    let o = madc(&["audit", "--q", "7", "--trials", "20000", "--seed", "3"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o)
        .lines()
        .skip(1)
        .all(|l| l.contains("chi-square") && l.ends_with("true")));
}

#[test]
fn sweep_is_deterministic_and_sorted() {
    let args = [
        "sweep", "--model", "cyclic", "--k", "3,2", "--q", "8,5", "--trials", "3", "--seed", "11",
    ];
    let a = madc(&args);
    let b = madc(&args);
    assert_eq!(code(&a), 0, "{}", stderr(&a));
    assert_eq!(a.stdout, b.stdout);
    let keys: Vec<(usize, usize, usize)> = stdout(&a)
        .lines()
        .skip(1)
        .map(|l| {
            let f: Vec<usize> = l
                .split(',')
                .skip(1)
                .take(3)
                .map(|x| x.parse().unwrap())
                .collect();
            (f[0], f[1], f[2])
        })
        .collect();
    assert_eq!(keys, vec![(2, 5, 1), (2, 8, 2), (3, 5, 1), (3, 8, 2)]);

    let other = madc(&[
        "sweep", "--model", "cyclic", "--k", "2,3", "--q", "5,8", "--trials", "3", "--seed", "12",
    ]);
    assert_ne!(a.stdout, other.stdout);
}

#[test]
fn sweep_without_valid_points_is_a_usage_error() {
    let o = madc(&["sweep", "--model", "cyclic", "--k", "2", "--q", "4"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn construct_sweep_verifies_every_point() {
    let o = madc(&[
        "sweep",
        "--task",
        "construct",
        "--model",
        "connect",
        "--f",
        "2-6",
        "--k",
        "2-3",
    ]);
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    assert_eq!(text.lines().count(), 1 + 2 * 15);
    assert!(text.lines().skip(1).all(|l| l.ends_with(",ok")));
}

#[test]
fn config_file_and_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("exp.toml");
    fs::write(
        &cfg,
        "mode = \"simulate\"\nmodel = \"connect\"\nk = 3\nf = 3\nalpha = 2\nseed = 5\nformat = \"json\"\n",
    )
    .unwrap();
    let o = madc(&["run", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(stdout(&o).contains("\"l_measured\": \"1/18\""));

    // --f overrides the file and --format csv replaces json.
    let o = madc(&[
        "run",
        "--config",
        cfg.to_str().unwrap(),
        "--f",
        "4",
        "--alpha",
        "1",
        "--format",
        "csv",
    ]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o)
        .lines()
        .nth(1)
        .unwrap()
        .starts_with("connect,3,4,1,4,"));

    fs::write(&cfg, "model = \"connect\"\n").unwrap();
    let o = madc(&["run", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
}

#[test]
fn out_dir_environment_variable() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(EXE)
        .args([
            "simulate", "--model", "cyclic", "--k", "2", "--q", "3", "--alpha", "1",
        ])
        .env("MADC_OUT_DIR", dir.path())
        .output()
        .unwrap();
    assert_eq!(code(&o), 0);
    assert!(o.stdout.is_empty());
    let report = fs::read_to_string(dir.path().join("simulate.csv")).unwrap();
    assert!(report.lines().nth(1).unwrap().ends_with(",ok"));

    let o = Command::new(EXE)
        .args([
            "construct",
            "--model",
            "connect",
            "--f",
            "3",
            "--alpha",
            "2",
            "--k",
            "3",
        ])
        .env("MADC_OUT_DIR", dir.path())
        .output()
        .unwrap();
    assert_eq!(code(&o), 0);
    assert!(Path::new(&dir.path().join("connect_f3_a2_k3.pda")).exists());
}
