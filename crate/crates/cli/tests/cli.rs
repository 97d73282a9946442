use std::f64::consts::{PI, TAU};
use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use glspiral::geometry::BoundaryCondition;
use glspiral::io;
use glspiral_cli::config::Format;
use glspiral_cli::{CliError, RunConfig};
use tempfile::TempDir;

const SMALL_DISK: &str = r#"
[surface]
kind = "disk"

[physics]
m = 1
lambda = 50.0

[numerics]
nodes = 64
t_end = 0.2
output_every = 50
"#;

struct Run {
    code: i32,
    stdout: String,
    stderr: String,
}

fn glspiral(dir: &Path, config: &str, args: &[&str]) -> Run {
    let path = dir.join("run.toml");
    fs::write(&path, config).unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_glspiral"))
        .arg("--config")
        .arg(&path)
        .args(args)
        .current_dir(dir)
        .output()
        .unwrap();
    Run {
        code: out.status.code().unwrap_or(-1),
        stdout: String::from_utf8_lossy(&out.stdout).into_owned(),
        stderr: String::from_utf8_lossy(&out.stderr).into_owned(),
    }
}

fn value(stdout: &str, key: &str) -> f64 {
    let prefix = format!("{key} = ");
    let line = stdout.lines().find(|l| l.starts_with(&prefix)).unwrap_or_else(|| panic!("no `{key}` in\n{stdout}"));
    line[prefix.len()..].parse().unwrap()
}

#[test]
fn minimal_config_gets_defaults() {
    let c = RunConfig::from_str("[surface]\nkind = \"disk\"\n[physics]\nlambda = 40.0\n", Path::new(".")).unwrap();
    assert_eq!(c.physics.m, 1);
    assert_eq!(c.physics.j, 0);
    assert_eq!((c.physics.eta, c.physics.beta), (0.0, 0.0));
    assert_eq!(BoundaryCondition::new(c.bc.alpha1, c.bc.alpha2).unwrap(), BoundaryCondition::neumann());
    assert_eq!(c.numerics.nodes, 128);
    assert_eq!(c.numerics.n_max, 16);
    assert_eq!(c.numerics.dt, 1e-3);
    assert!(c.control.is_none() && c.sweep.is_none());
    assert_eq!(c.output.directory, PathBuf::from("out"));
    assert!(c.wants(Format::Csv) && c.wants(Format::Svg));
}

#[test]
fn mixed_sign_robin_coefficients_are_rejected() {
    let text = "[surface]\nkind = \"disk\"\n[bc]\nalpha1 = 1.0\nalpha2 = -1.0\n[physics]\nlambda = 40.0\n";
    match RunConfig::from_str(text, Path::new(".")) {
        Err(CliError::Validation { field, line, .. }) => {
            assert_eq!(field, "bc.alpha1");
            assert_eq!(line, Some(4));
        }
        other => panic!("expected a validation error, got {other:?}"),
    }
    let dir = TempDir::new().unwrap();
    let run = glspiral(dir.path(), text, &["profile"]);
    assert_eq!(run.code, 1, "{}", run.stderr);
    assert!(run.stderr.contains("bc.alpha1"), "{}", run.stderr);
}

#[test]
fn unknown_key_is_named_with_its_line() {
    let text = "[surface]\nkind = \"disk\"\n[physics]\nlambda = 40.0\n[control]\nzeta_deg = 45\n";
    match RunConfig::from_str(text, Path::new(".")) {
        Err(CliError::Parse { line, message }) => {
            assert!(message.contains("zeta_deg"), "{message}");
            assert_eq!(line, 6);
        }
        other => panic!("expected a parse error, got {other:?}"),
    }
}

#[test]
fn simulate_is_reproducible_for_a_seed() {
    let dir = TempDir::new().unwrap();
    let runs: Vec<Run> = ["a", "b", "c"]
        .iter()
        .zip(["7", "7", "8"])
        .map(|(out, seed)| glspiral(dir.path(), SMALL_DISK, &["--out", out, "--seed", seed, "simulate"]))
        .collect();
    for r in &runs {
        assert_eq!(r.code, 0, "{}", r.stderr);
    }
    let read = |out: &str, f: &str| fs::read(dir.path().join(out).join(f)).unwrap();
    for f in ["timeseries.csv", "snapshot.csv", "manifest.txt"] {
        assert_eq!(read("a", f), read("b", f), "{f} differs between identical runs");
    }
    assert_ne!(read("a", "snapshot.csv"), read("c", "snapshot.csv"));
    let results = |r: &Run| r.stdout.lines().filter(|l| !l.starts_with("wrote ")).collect::<Vec<_>>().join("\n");
    assert_eq!(results(&runs[0]), results(&runs[1]));
}

#[test]
fn thresholds_reports_gain_and_delay_bounds() {
    let dir = TempDir::new().unwrap();
    let run = glspiral(dir.path(), SMALL_DISK, &["thresholds"]);
    assert_eq!(run.code, 0, "{}", run.stderr);
    let b_tilde = value(&run.stdout, "b_tilde");
    let lower = value(&run.stdout, "tau_lower_bound");
    let tilde = value(&run.stdout, "tau_tilde");
    assert!(b_tilde < 0.0);
    assert!(lower > 0.0 && lower.is_finite());
    assert!(run.stdout.contains("tau_lower_bound_applies = true"));
    assert!(tilde >= lower, "tau_tilde {tilde} below the lower bound {lower}");
    assert!((value(&run.stdout, "zeta") - PI).abs() < 1e-6);
}

/// Polylines of one arm in screen coordinates.
type Arm = Vec<Vec<(f64, f64)>>;

/// `(cx, cy, scale)` and the arm polylines of the surface view.
fn pattern_arms(svg: &str) -> ((f64, f64, f64), Vec<Arm>) {
    let start = svg.find(r#"<g id="pattern""#).expect("no pattern view");
    let body = &svg[start..];
    let attr = |name: &str| -> f64 {
        let key = format!(r#"{name}=""#);
        let i = body.find(&key).unwrap() + key.len();
        body[i..i + body[i..].find('"').unwrap()].parse().unwrap()
    };
    let frame = (attr("data-cx"), attr("data-cy"), attr("data-scale"));
    let mut arms = Vec::new();
    for group in body.split(r#"<g class="arm""#).skip(1) {
        let group = &group[..group.find("</g>").unwrap()];
        let lines = group
            .split(r#"points=""#)
            .skip(1)
            .map(|p| {
                p[..p.find('"').unwrap()]
                    .split(' ')
                    .map(|xy| {
                        let (x, y) = xy.split_once(',').unwrap();
                        (x.parse().unwrap(), y.parse().unwrap())
                    })
                    .collect()
            })
            .collect();
        arms.push(lines);
    }
    (frame, arms)
}

#[test]
fn render_draws_four_arms_for_a_two_armed_disk_spiral() {
    let dir = TempDir::new().unwrap();
    let config = "[surface]\nkind = \"disk\"\n[physics]\nm = 2\nlambda = 50.0\neta = 0.05\nbeta = -0.05\n[numerics]\nnodes = 64\n";
    let run = glspiral(dir.path(), config, &["render"]);
    assert_eq!(run.code, 0, "{}", run.stderr);
    let svg = fs::read_to_string(dir.path().join("out/pattern.svg")).unwrap();
    let ((cx, cy, scale), arms) = pattern_arms(&svg);
    assert_eq!(arms.len(), 4);
    // Each arm crosses the circle of half the disk radius exactly once.
    let radius = 0.5;
    let mut angles = Vec::new();
    for arm in &arms {
        let mut crossings = 0;
        for line in arm {
            let polar: Vec<(f64, f64)> = line.iter().map(|&(x, y)| ((x - cx) / scale, (cy - y) / scale)).collect();
            for w in polar.windows(2) {
                let (r0, r1) = (w[0].0.hypot(w[0].1), w[1].0.hypot(w[1].1));
                if (r0 - radius) * (r1 - radius) <= 0.0 && r0 != r1 {
                    crossings += 1;
                    let f = (radius - r0) / (r1 - r0);
                    let (x, y) = (w[0].0 + f * (w[1].0 - w[0].0), w[0].1 + f * (w[1].1 - w[0].1));
                    angles.push(y.atan2(x).rem_euclid(TAU));
                }
            }
        }
        assert_eq!(crossings, 1);
    }
    angles.sort_by(f64::total_cmp);
    for k in 0..4 {
        let gap = (angles[(k + 1) % 4] - angles[k]).rem_euclid(TAU);
        assert!((gap - PI / 2.0).abs() < 2e-2, "arms at {angles:?}");
    }
    // A rotating wave bends its arms: the angle varies along each arm.
    let (_, arms) = pattern_arms(&svg);
    let line = &arms[0][0];
    let turn = |p: &(f64, f64)| (cy - p.1).atan2(p.0 - cx);
    let spread = line.iter().map(turn).fold(f64::NEG_INFINITY, f64::max) - line.iter().map(turn).fold(f64::INFINITY, f64::min);
    assert!(spread > 1e-2, "arm is straight");
}

#[test]
fn written_files_read_back() {
    let dir = TempDir::new().unwrap();
    let config = format!("{SMALL_DISK}\n[sweep]\nb = [-0.3, -0.6]\ntau = [0.0, 0.4]\nzeta = [3.14159]\n");
    for cmd in ["profile", "spectrum", "sweep", "simulate"] {
        let run = glspiral(dir.path(), &config, &["--out", cmd, cmd]);
        assert_eq!(run.code, 0, "{cmd}: {}", run.stderr);
    }
    let out = |cmd: &str, f: &str| dir.path().join(cmd).join(f);

    let profile = io::read_profile(&out("profile", "profile.csv")).unwrap();
    assert_eq!(profile.u.len(), 64);
    assert_eq!(profile.lambda, 50.0);
    assert!(profile.residual().unwrap() < 1e-9);
    assert_eq!(io::profile_to_csv(&profile).unwrap(), fs::read_to_string(out("profile", "profile.csv")).unwrap());

    let spectrum = io::spectrum_from_csv(&fs::read_to_string(out("spectrum", "spectrum.csv")).unwrap()).unwrap();
    assert!(spectrum.iter().any(|r| r.n == 1 && r.mu > 0.0));

    let map = io::map_from_csv(&fs::read_to_string(out("sweep", "map.csv")).unwrap()).unwrap();
    assert_eq!(map.len(), 4);
    assert_eq!((map[0].b, map[0].tau), (-0.3, 0.0));

    let series = io::timeseries_from_csv(&fs::read_to_string(out("simulate", "timeseries.csv")).unwrap()).unwrap();
    assert_eq!(series.first().unwrap().t, 0.0);
    assert!((series.last().unwrap().t - 0.2).abs() < 1e-12);
    let snapshot = io::snapshot_from_csv(&fs::read_to_string(out("simulate", "snapshot.csv")).unwrap(), profile.domain().grid(), 0.2).unwrap();
    assert_eq!(snapshot.n_max(), 16);
    let norm = snapshot.norm(profile.domain().grid().weights());
    assert!((norm - series.last().unwrap().field_norm).abs() < 1e-9 * norm);

    let manifest = fs::read_to_string(out("simulate", "manifest.txt")).unwrap();
    assert!(manifest.starts_with("command = simulate\n"));
    assert!(manifest.contains("[config]") && manifest.contains("lambda = 50.0"));
}

#[test]
fn exit_codes_follow_error_families() {
    let dir = TempDir::new().unwrap();
    // Configuration.
    let run = glspiral(dir.path(), "[surface]\nkind = \"torus\"\n", &["profile"]);
    assert_eq!(run.code, 1, "{}", run.stderr);
    let run = glspiral(dir.path(), SMALL_DISK, &["bogus"]);
    assert_eq!(run.code, 1);
    // Solver: no mode resolved by 32 nodes clears the cutoff for so large a gain.
    let run = glspiral(dir.path(), &SMALL_DISK.replace("nodes = 64", "nodes = 32\nb_min = -1e4"), &["spectrum"]);
    assert_eq!(run.code, 2, "{}", run.stderr);
    // Numerical guard: an explicit cubic term with far too large a step.
    let run = glspiral(dir.path(), &SMALL_DISK.replace("t_end = 0.2", "t_end = 50.0\ndt = 0.5"), &["simulate", "--free"]);
    assert_eq!(run.code, 3, "{}", run.stderr);
    // I/O: missing configuration and missing stored profile.
    let missing = Command::new(env!("CARGO_BIN_EXE_glspiral")).args(["--config", "/nonexistent/run.toml", "profile"]).output().unwrap();
    assert_eq!(missing.status.code(), Some(4));
    let run = glspiral(dir.path(), SMALL_DISK, &["render", "--profile", "absent.csv"]);
    assert_eq!(run.code, 4, "{}", run.stderr);
}

#[test]
fn one_thread_matches_the_parallel_run() {
    let dir = TempDir::new().unwrap();
    for (out, extra) in [("seq", vec!["--threads", "1"]), ("par", vec!["--threads", "3"])] {
        let mut args = vec!["--out", out];
        args.extend(extra);
        args.push("simulate");
        let run = glspiral(dir.path(), SMALL_DISK, &args);
        assert_eq!(run.code, 0, "{}", run.stderr);
    }
    for f in ["timeseries.csv", "snapshot.csv"] {
        assert_eq!(fs::read(dir.path().join("seq").join(f)).unwrap(), fs::read(dir.path().join("par").join(f)).unwrap());
    }
}

#[test]
fn closed_surfaces_render_orthographically() {
    let dir = TempDir::new().unwrap();
    let config = "[surface]\nkind = \"sphere\"\n[physics]\nm = 1\nj = 1\nlambda_factor = 1.5\n[numerics]\nnodes = 64\n";
    let run = glspiral(dir.path(), config, &["render"]);
    assert_eq!(run.code, 0, "{}", run.stderr);
    let svg = fs::read_to_string(dir.path().join("out/pattern.svg")).unwrap();
    assert!(svg.contains(r#"data-view="orthographic""#));
    assert!(svg.contains(r#"<g id="chart">"#));
    let (_, arms) = pattern_arms(&svg);
    assert_eq!(arms.len(), 2);
    assert!(arms.iter().all(|a| !a.is_empty()), "an arm lies entirely on the far side");
}
