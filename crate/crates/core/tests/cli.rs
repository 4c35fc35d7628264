use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use hpinterp::mesh::mixed_strip;

struct Scratch(PathBuf);

impl Scratch {
    fn new(tag: &str) -> Self {
        let d = std::env::temp_dir().join(format!("hpinterp-cli-{tag}-{}", std::process::id()));
        std::fs::create_dir_all(&d).unwrap();
        Scratch(d)
    }

    fn write(&self, name: &str, text: &str) -> PathBuf {
        let p = self.0.join(name);
        std::fs::write(&p, text).unwrap();
        p
    }
}

impl Drop for Scratch {
    fn drop(&mut self) {
        std::fs::remove_dir_all(&self.0).ok();
    }
}

fn hpinterp(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hpinterp")).args(args).current_dir(dir).output().unwrap()
}

const ONE_QUAD: &str = r#"
degrees = [1, 2, 3, 4, 5, 6]
thetas = [0.5]
oracle_levels = 1
[checks]
c_low_min = 0.999999
[[mesh]]
generator = "reference_rectangle"
"#;

#[test]
fn one_quad_sweep_writes_six_rows() {
    let s = Scratch::new("sweep");
    s.write("eq.toml", ONE_QUAD);
    let out = hpinterp(&s.0, &["sweep-equivalence", "--config", "eq.toml"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "mesh,level,theta,h_max,p,N,C_low,C_high,oracle_levels,runtime_ms");
    assert_eq!(lines.len(), 7);
    for l in &lines[1..] {
        let f: Vec<&str> = l.split(',').collect();
        assert!(f[6].parse::<f64>().unwrap() >= 1.0 - 1e-6);
        assert_eq!(f[9], "");
    }
    assert!(String::from_utf8_lossy(&out.stderr).contains("PASS min C_low"));
}

#[test]
fn out_flag_and_config_out_agree() {
    let s = Scratch::new("out");
    s.write("eq.toml", &format!("out = \"from_config.csv\"\n{ONE_QUAD}"));
    assert!(hpinterp(&s.0, &["sweep-equivalence", "--config", "eq.toml"]).status.success());
    assert!(hpinterp(&s.0, &["sweep-equivalence", "--config", "eq.toml", "--out", "flag.csv"]).status.success());
    let a = std::fs::read(s.0.join("from_config.csv")).unwrap();
    let b = std::fs::read(s.0.join("flag.csv")).unwrap();
    assert_eq!(a, b);
}

#[test]
fn failing_check_exits_one() {
    let s = Scratch::new("fail");
    s.write("eq.toml", &ONE_QUAD.replace("c_low_min = 0.999999", "c_low_min = 2.0"));
    let out = hpinterp(&s.0, &["sweep-equivalence", "--config", "eq.toml"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("FAIL min C_low"));
    assert!(!out.stdout.is_empty());
}

#[test]
fn invalid_input_exits_two() {
    let s = Scratch::new("invalid");
    s.write("bad.toml", &ONE_QUAD.replace("thetas = [0.5]", "thetas = [0.95]"));
    assert_eq!(hpinterp(&s.0, &["sweep-equivalence", "--config", "bad.toml"]).status.code(), Some(2));
    s.write("typo.toml", "degress = [1]\n");
    let out = hpinterp(&s.0, &["sweep-inverse", "--config", "typo.toml"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("degress"));
    assert_eq!(hpinterp(&s.0, &["norm", "--config", "missing.toml"]).status.code(), Some(2));
}

#[test]
fn seed_flag_changes_random_functions() {
    let s = Scratch::new("seed");
    s.write("n.toml", "degrees = [2]\noracle_levels = 1\n[[mesh]]\ngenerator = \"criss_cross\"\nn = 1\n");
    let a = hpinterp(&s.0, &["norm", "--config", "n.toml", "--seed", "1"]).stdout;
    let b = hpinterp(&s.0, &["norm", "--config", "n.toml", "--seed", "1"]).stdout;
    let c = hpinterp(&s.0, &["norm", "--config", "n.toml", "--seed", "2"]).stdout;
    assert_eq!(a, b);
    assert_ne!(a, c);
}

#[test]
fn check_mesh_and_assemble_on_files() {
    let s = Scratch::new("mesh");
    s.write("good.json", &mixed_strip(1, 2, 4).to_json());
    s.write("bad.json", &mixed_strip(1, 2, 3).to_json());
    let good = hpinterp(&s.0, &["check-mesh", "--mesh", "good.json"]);
    assert_eq!(good.status.code(), Some(0));
    let csv = String::from_utf8(good.stdout).unwrap();
    assert!(csv.starts_with("mesh,level,p,elements,vertices,edges"));
    assert!(csv.lines().nth(1).unwrap().starts_with("good,0,4,3,6,"));
    assert_eq!(hpinterp(&s.0, &["check-mesh", "--mesh", "bad.json"]).status.code(), Some(1));

    let coo = hpinterp(&s.0, &["assemble", "--mesh", "good.json", "--form", "stiffness"]);
    assert!(coo.status.success());
    let text = String::from_utf8(coo.stdout).unwrap();
    let mut entries = std::collections::BTreeMap::new();
    for l in text.lines() {
        let f: Vec<&str> = l.split_whitespace().collect();
        assert_eq!(f.len(), 3);
        let (i, j): (usize, usize) = (f[0].parse().unwrap(), f[1].parse().unwrap());
        entries.insert((i, j), f[2].parse::<f64>().unwrap());
    }
    for (&(i, j), v) in &entries {
        assert!((entries[&(j, i)] - v).abs() <= 1e-14 * v.abs().max(1.0));
    }
    let w = hpinterp(&s.0, &["assemble", "--mesh", "good.json", "--form", "weighted", "--theta", "1.0"]);
    assert_eq!(w.stdout, text.into_bytes());
}

#[test]
fn lift_verify_reports_admissible_degrees() {
    let s = Scratch::new("lift");
    s.write(
        "l.toml",
        "[lift]\ndegrees = [1, 2, 3]\nsamples = 2\nsup_points = 100\nmax_ratio = 1e6\n[[lift.properties]]\nkind = \"lift_l2\"\ngamma = 0.0\n[[lift.properties]]\nkind = \"bc_l2\"\ngamma = 0.5\nedges = [0, 2]\n",
    );
    let out = hpinterp(&s.0, &["lift-verify", "--config", "l.toml"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = String::from_utf8(out.stdout).unwrap();
    // two constrained edges need p >= 2, so bc_l2 skips p = 1
    assert_eq!(csv.lines().count(), 6);
    assert!(csv.contains("\"bc_l2(gamma=0.5,E={0,2})\",3,2,"));
}
