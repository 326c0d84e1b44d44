use std::path::{Path, PathBuf};
use std::process::Command;

fn fraclp() -> Command {
    Command::new(env!("CARGO_BIN_EXE_fraclp"))
}

fn shipped(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs").join(name)
}

fn small_config(dir: &Path, extra: &str) -> PathBuf {
    let path = dir.join("small.toml");
    let text = format!(
        "[grid]\nn = 32\n[data]\nseed = 5\nnoise = 0.05\n[solver]\nalpha = 1e-2\nbeta_reg = 0.05\n\
         eps_min = 1e-12\neps_decay = 0.2\ntol_step = 1e-6\n[output]\ndir = \"{}\"\n{extra}",
        dir.join("out").display()
    );
    std::fs::write(&path, text).unwrap();
    path
}

fn listing(dir: &Path) -> Vec<String> {
    let mut names: Vec<String> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    names.sort();
    names
}

#[test]
fn shipped_denoise_run_emits_four_files() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("run");
    let status = fraclp()
        .args(["run", "--config"])
        .arg(shipped("denoise_1d.toml"))
        .arg("--output")
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    assert_eq!(
        listing(&out),
        ["iterations.csv", "manifest.json", "report.json", "solution.csv"]
    );
}

#[test]
fn rerun_is_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = small_config(tmp.path(), "");
    for d in ["a", "b"] {
        let st = fraclp()
            .args(["run", "--config"])
            .arg(&cfg)
            .arg("--output")
            .arg(tmp.path().join(d))
            .status()
            .unwrap();
        assert!(st.success());
    }
    for f in listing(&tmp.path().join("a")) {
        let a = std::fs::read(tmp.path().join("a").join(&f)).unwrap();
        let b = std::fs::read(tmp.path().join("b").join(&f)).unwrap();
        assert!(a == b, "{f} differs between identical runs");
    }
}

#[test]
fn invalid_config_exits_with_one_and_names_the_rule() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = small_config(tmp.path(), "");
    let text = std::fs::read_to_string(&cfg).unwrap().replace("alpha = 1e-2", "alpha = 1e-2\np = 1.5");
    std::fs::write(&cfg, text).unwrap();
    let out = fraclp().args(["run", "--config"]).arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("p must lie in (0,1)"));

    let missing = fraclp()
        .args(["run", "--config", "/nonexistent/fraclp.toml"])
        .output()
        .unwrap();
    assert_eq!(missing.status.code(), Some(1));
}

#[test]
fn unknown_key_is_a_config_error() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = small_config(tmp.path(), "[operator]\nflavour = \"spicy\"\n");
    let out = fraclp().args(["run", "--config"]).arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn runtime_failure_exits_with_two() {
    let tmp = tempfile::tempdir().unwrap();
    // a backtracking cap of one trial cannot satisfy the descent test here
    let cfg = small_config(tmp.path(), "");
    let text = std::fs::read_to_string(&cfg)
        .unwrap()
        .replace("alpha = 1e-2", "alpha = 1e-2\nmax_bt_trials = 1\nl_tilde = 1e-9")
        .replace("[objective]", "");
    let text = format!("{text}[objective]\nblur_width = 0.02\n");
    std::fs::write(&cfg, text).unwrap();
    let out = fraclp().args(["run", "--config"]).arg(&cfg).output().unwrap();
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert_eq!(out.status.code(), Some(2), "{stderr}");
    assert!(stderr.contains("failed"), "{stderr}");
}

#[test]
fn sweep_writes_subdirectories_and_summary() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = small_config(
        tmp.path(),
        "[sweep]\nparameter = \"beta_reg\"\nvalues = [0.01, 0.1, 1.0]\n",
    );
    let out = fraclp()
        .args(["sweep", "--config"])
        .arg(&cfg)
        .env("FRACLP_THREADS", "2")
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let root = tmp.path().join("out");
    assert_eq!(
        listing(&root),
        ["beta_reg_0.01", "beta_reg_0.1", "beta_reg_1", "summary.csv"]
    );
    let summary = std::fs::read_to_string(root.join("summary.csv")).unwrap();
    let lines: Vec<&str> = summary.lines().collect();
    assert_eq!(lines.len(), 4);
    assert!(lines[0].starts_with("label,value,phi_final,support_fraction,pairing_gap"));
    assert!(lines[1..].iter().all(|l| l.ends_with(",ok")));

    // run refuses sweep configs
    let single = fraclp().args(["run", "--config"]).arg(&cfg).output().unwrap();
    assert_eq!(single.status.code(), Some(1));
}

#[test]
fn plotdata_from_run_and_empty_dir() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = small_config(tmp.path(), "");
    let run_dir = tmp.path().join("run");
    assert!(fraclp()
        .args(["run", "--config"])
        .arg(&cfg)
        .arg("--output")
        .arg(&run_dir)
        .status()
        .unwrap()
        .success());
    assert!(fraclp().arg("plotdata").arg(&run_dir).status().unwrap().success());

    let u = std::fs::read_to_string(run_dir.join("plot_u.csv")).unwrap();
    assert_eq!(u.lines().count(), 1 + 32);
    let phi: Vec<f64> = std::fs::read_to_string(run_dir.join("plot_phi.csv"))
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    assert!(phi.len() >= 2);
    assert!(phi.windows(2).all(|w| w[1] <= w[0]));
    for f in ["plot_step.csv", "plot_support.csv"] {
        assert!(run_dir.join(f).is_file());
    }

    let empty = tmp.path().join("empty");
    std::fs::create_dir(&empty).unwrap();
    let out = fraclp().arg("plotdata").arg(&empty).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn help_lists_defaults() {
    let out = fraclp().args(["run", "--help"]).output().unwrap();
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("beta_reg = 0.01"), "{text}");
    assert!(text.contains("[operator]"));
}
