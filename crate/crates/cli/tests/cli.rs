use std::path::Path;
use std::process::{Command, Output};

fn vicon(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_vicon"))
        .args(args)
        .env_remove("VICON_THREADS")
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

const SMALL: &str = "\
topology.grid = 12
topology.retina = 12
topology.retinae = 2
topology.receptive_field = 3
topology.inhibition = 5
topology.leakage = 3
topology.leakage_sigma = 1
schedule.phase1 = 200, 0.01, 1
data.source = synthetic
run.seed = 3
run.log_interval = 100
output.dir = out
";

fn write_config(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn usage_errors_exit_1() {
    assert_eq!(vicon(&[]).status.code(), Some(1));
    assert_eq!(vicon(&["bogus"]).status.code(), Some(1));
    assert_eq!(vicon(&["train"]).status.code(), Some(1));
    assert_eq!(vicon(&["gen-texture", "not-a-number", "x.pgm"]).status.code(), Some(1));
}

#[test]
fn help_exits_0() {
    let out = vicon(&["--help"]);
    assert_eq!(out.status.code(), Some(0));
    for sub in ["train", "analyze", "verify", "gen-texture"] {
        assert!(stdout(&out).contains(sub), "{sub} missing from help");
    }
}

#[test]
fn bad_thread_count_is_a_usage_error() {
    let out = Command::new(env!("CARGO_BIN_EXE_vicon"))
        .args(["gen-texture", "1", "/dev/null", "--size", "8"])
        .env("VICON_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("VICON_THREADS"));
}

#[test]
fn data_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("missing.cfg");
    assert_eq!(vicon(&["train", missing.to_str().unwrap()]).status.code(), Some(2));

    let bad = write_config(dir.path(), "bad.cfg", &SMALL.replace("topology.inhibition = 5", "topology.inhibition = 4"));
    let out = vicon(&["train", &bad]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).starts_with("error:"));

    let unknown = write_config(dir.path(), "unknown.cfg", &format!("{SMALL}topology.colour = red\n"));
    let out = vicon(&["train", &unknown]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("line 13"), "{}", stderr(&out));

    let cfg = write_config(dir.path(), "ok.cfg", SMALL);
    let absent = dir.path().join("none.vicn");
    assert_eq!(vicon(&["analyze", absent.to_str().unwrap(), &cfg]).status.code(), Some(2));
}

#[test]
fn saturated_network_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "huge.cfg",
        &format!("{SMALL}init.weight_scale = 1e300\ninit.bias = -1e300\n"),
    );
    let out = vicon(&["train", &cfg]);
    assert_eq!(out.status.code(), Some(3), "{}", stderr(&out));
    assert!(stderr(&out).contains("degenerate"));
}

#[test]
fn train_then_analyze() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "run.cfg", SMALL);
    let out = vicon(&["train", &cfg]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("phase 1 update 100 objective"));
    assert!(text.contains("phase 1 update 200 objective"));

    let run = dir.path().join("out");
    for f in ["network.vicn", "trace.csv", "config.cfg", "summary.txt", "ocularity.csv", "reconstruction.pgm"] {
        assert!(run.join(f).is_file(), "{f} not written");
    }
    let trace = std::fs::read_to_string(run.join("trace.csv")).unwrap();
    assert_eq!(trace.lines().count(), 3);
    assert!(std::fs::read_to_string(run.join("ocularity.csv")).unwrap().starts_with("index,left,right\n0,"));
    let summary = std::fs::read_to_string(run.join("summary.txt")).unwrap();
    assert!(summary.contains("stripe_period") && summary.contains("reconstruction_mse"));

    let again = dir.path().join("again");
    let ckpt = run.join("network.vicn");
    let out = vicon(&["analyze", ckpt.to_str().unwrap(), &cfg, "--out", again.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    for f in ["ocularity.csv", "summary.txt", "reconstruction.pgm"] {
        assert_eq!(std::fs::read(run.join(f)).unwrap(), std::fs::read(again.join(f)).unwrap(), "{f}");
    }

    let other = write_config(dir.path(), "other.cfg", &SMALL.replace("receptive_field = 3", "receptive_field = 5"));
    let out = vicon(&["analyze", ckpt.to_str().unwrap(), &other]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("rf 3") && stderr(&out).contains("rf 5"), "{}", stderr(&out));
}

#[test]
fn thread_count_does_not_change_results() {
    let dir = tempfile::tempdir().unwrap();
    let mut outputs = Vec::new();
    for threads in ["1", "3"] {
        let sub = dir.path().join(threads);
        std::fs::create_dir(&sub).unwrap();
        let cfg = write_config(&sub, "run.cfg", SMALL);
        let out = Command::new(env!("CARGO_BIN_EXE_vicon"))
            .args(["train", &cfg])
            .env("VICON_THREADS", threads)
            .output()
            .unwrap();
        assert_eq!(out.status.code(), Some(0));
        outputs.push(std::fs::read(sub.join("out/network.vicn")).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);
}

#[test]
fn gen_texture_writes_binary_graymap() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.pgm");
    let b = dir.path().join("b.pgm");
    for p in [&a, &b] {
        let out = vicon(&["gen-texture", "5", p.to_str().unwrap(), "--size", "32"]);
        assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    }
    let bytes = std::fs::read(&a).unwrap();
    assert!(bytes.starts_with(b"P5\n32 32 255\n"));
    assert_eq!(bytes.len(), "P5\n32 32 255\n".len() + 32 * 32);
    assert_eq!(bytes, std::fs::read(&b).unwrap());
    let out = vicon(&["gen-texture", "5", a.to_str().unwrap(), "--size", "0"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn verify_passes() {
    let out = vicon(&["verify"]);
    assert_eq!(out.status.code(), Some(0), "{}{}", stdout(&out), stderr(&out));
    let text = stdout(&out);
    assert!(!text.contains("FAIL"));
    assert!(text.contains("gradient vs finite diff"));
}

#[test]
fn perturbed_gradient_is_caught_and_located() {
    let out = vicon(&["verify", "--perturb", "bias:2:1e-3"]);
    assert_eq!(out.status.code(), Some(3));
    let text = stdout(&out);
    assert!(text.contains("FAIL") && text.contains("d_biases[neuron 2]"), "{text}");
}
