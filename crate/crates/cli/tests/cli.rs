//! End-to-end checks of the binary: exit codes, report shape, determinism.

use std::path::PathBuf;
use std::process::{Command, Output};

fn fixture(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/scenarios")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_skylink"))
        .args(args)
        .output()
        .expect("binary should launch")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).expect("stdout is utf-8")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("no exit code")
}

/// Everything above the trailing wall-time line, which is the one part of a
/// report allowed to differ between reruns.
fn stable_part(report: &str) -> String {
    report
        .lines()
        .filter(|l| !l.starts_with("wall-time-ms:"))
        .collect::<Vec<_>>()
        .join("\n")
}

#[test]
fn the_torus_window_counts_sixteen_by_every_engine() {
    let out = run(&["alk", "--scenario", &fixture("torus16.toml")]);
    let text = stdout(&out);
    assert_eq!(code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));
    assert!(text.contains("alk[counting]: 16"), "{text}");
    assert!(text.contains("alk[intersection]: 16"), "{text}");
    assert!(text.contains("alk[homotopy]: 16"), "{text}");
    assert!(text.contains("cross-method: agree"), "{text}");
    assert!(text.contains("link-verdict: related"), "{text}");
    assert!(text.contains("oracle-confirmed: true"), "{text}");
    assert_eq!(text.matches("sign=+1").count(), 48, "three full ledgers");
}

#[test]
fn a_null_pair_uses_the_dedicated_exit_code() {
    let out = run(&["alk", "--scenario", &fixture("plane_null.toml")]);
    assert_eq!(code(&out), 2);
    let text = stdout(&out);
    assert!(text.contains("null related through 1 connection"), "{text}");
    let err = String::from_utf8_lossy(&out.stderr).into_owned();
    assert!(err.contains("no linking value"), "{err}");

    let causal = run(&["causal", "--scenario", &fixture("plane_null.toml")]);
    assert_eq!(code(&causal), 2);
    assert!(stdout(&causal).contains("verdict: null related"));
}

#[test]
fn reruns_are_byte_identical_up_to_wall_time() {
    let first = run(&["alk", "--scenario", &fixture("torus16.toml")]);
    let second = run(&["alk", "--scenario", &fixture("torus16.toml")]);
    assert_eq!(code(&first), 0);
    assert_eq!(stable_part(&stdout(&first)), stable_part(&stdout(&second)));
    let last = stdout(&first);
    let last = last.lines().last().unwrap();
    assert!(last.starts_with("wall-time-ms: "), "timing must come last: {last}");
}

#[test]
fn front_export_writes_the_documented_csv() {
    let dir = std::env::temp_dir().join(format!("skylink-cli-front-{}", std::process::id()));
    let out = run(&[
        "front",
        "--scenario",
        &fixture("plane_paths.toml"),
        "--times",
        "0.5,1.25",
        "--out",
        dir.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));
    for name in ["front_x_t0.500000.csv", "front_x_t1.250000.csv"] {
        let body = std::fs::read_to_string(dir.join(name)).expect(name);
        let mut lines = body.lines();
        assert_eq!(lines.next(), Some("s,px,py,nx,ny,t"), "{name}");
        let rows: Vec<&str> = lines.collect();
        assert_eq!(rows.len(), 64, "one row per ray in {name}");
        for row in rows {
            assert_eq!(row.split(',').count(), 6, "bad row in {name}: {row}");
        }
        assert!(body.ends_with('\n'), "{name} must end with a newline");
    }
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn the_sphere_cylinder_pair_is_inconclusive() {
    let out = run(&["alk", "--scenario", &fixture("sphere_cylinder.toml")]);
    assert_eq!(code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    assert!(text.contains("oracle: chronologically related"), "{text}");
    assert!(text.contains("alk[counting]: 0"), "{text}");
    assert!(text.contains("link-verdict: inconclusive"), "{text}");
    assert!(text.contains("note[intersection]: skipped"), "{text}");
    assert!(text.contains("note[homotopy]: skipped"), "{text}");
}

#[test]
fn the_homotopy_sphere_descriptor_prints_the_published_group() {
    let out = run(&["group", "--scenario", &fixture("s3_group.toml")]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).lines().any(|l| l == "A(M) = trivial; good"));
}

#[test]
fn configuration_mistakes_exit_sixty_four() {
    let unknown_event = run(&["alk", "--scenario", &fixture("torus16.toml"), "nope"]);
    assert_eq!(code(&unknown_event), 64);
    assert!(String::from_utf8_lossy(&unknown_event.stderr).contains("nope"));

    let bad_schema = run(&["causal", "--scenario", &fixture("bad_schema.toml")]);
    assert_eq!(code(&bad_schema), 64);

    let missing = run(&["alk", "--scenario", "/nonexistent/nowhere.toml"]);
    assert_eq!(code(&missing), 64);

    let no_flag = run(&["alk"]);
    assert_eq!(code(&no_flag), 64);
}

#[test]
fn null_moments_and_sightings_read_from_curves() {
    let moment = run(&["nullmoment", "--scenario", &fixture("plane_paths.toml")]);
    assert_eq!(code(&moment), 0);
    assert!(stdout(&moment).contains("null-moment: 0.6"), "{}", stdout(&moment));

    let all = run(&[
        "nullmoment",
        "--scenario",
        &fixture("plane_paths.toml"),
        "--exhaustive",
    ]);
    assert!(stdout(&all).contains("null-moments: 1"), "{}", stdout(&all));

    let sight = run(&["sight", "--scenario", &fixture("plane_paths.toml")]);
    assert_eq!(code(&sight), 0);
    assert!(stdout(&sight).contains("sightings: 1"), "{}", stdout(&sight));
}

#[test]
fn the_quick_verification_suite_passes_and_the_hook_fails() {
    let out = run(&["verify", "--level", "quick"]);
    let text = stdout(&out);
    assert_eq!(code(&out), 0, "{text}");
    assert_eq!(text.lines().filter(|l| l.starts_with("criterion ")).count(), 8);
    assert!(text.contains("verdict: all criteria passed"), "{text}");

    let hook = run(&["verify", "--level", "quick", "--reversed"]);
    assert_eq!(code(&hook), 1);
    assert!(stdout(&hook).contains("FAIL"));
}
