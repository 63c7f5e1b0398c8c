use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn mbcr(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mbcr"))
        .args(args)
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn share(dir: &Path, id: usize) -> String {
    dir.join(format!("share_{id}.mbcr"))
        .to_string_lossy()
        .into_owned()
}

const SAMPLE: [&str; 8] = ["-n", "5", "-k", "2", "-d", "3", "-r", "2"];

fn encode_sample(dir: &Path, data: &[u8]) -> String {
    let input = dir.join("input.bin");
    fs::write(&input, data).unwrap();
    let out = dir.join("shares");
    let mut args = vec!["encode"];
    args.extend(SAMPLE);
    let (input, out_s) = (
        input.to_string_lossy().into_owned(),
        out.to_string_lossy().into_owned(),
    );
    args.extend([input.as_str(), "--out", out_s.as_str()]);
    let o = mbcr(&args);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    out_s
}

#[test]
fn encode_reconstruct_every_pair() {
    let dir = tempfile::tempdir().unwrap();
    let data: Vec<u8> = (0..24u8).map(|b| b ^ 0xA5).collect();
    let shares = encode_sample(dir.path(), &data);
    let shares = Path::new(&shares);
    for id in 1..=5 {
        assert_eq!(fs::metadata(share(shares, id)).unwrap().len(), 30 + 14);
    }
    for a in 1..=5 {
        for b in a + 1..=5 {
            let out = dir.path().join(format!("out_{a}_{b}"));
            let o = mbcr(&[
                "reconstruct",
                &share(shares, a),
                &share(shares, b),
                "--out",
                out.to_str().unwrap(),
            ]);
            assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
            assert_eq!(fs::read(&out).unwrap(), data);
        }
    }
}

#[test]
fn reconstruct_errors() {
    let dir = tempfile::tempdir().unwrap();
    let shares = encode_sample(dir.path(), b"hello");
    let shares = Path::new(&shares);
    let out = dir.path().join("out");
    let o = mbcr(&[
        "reconstruct",
        &share(shares, 1),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("insufficient shares"));

    // a share from a different code
    let other = dir.path().join("other");
    fs::create_dir(&other).unwrap();
    let input = dir.path().join("input.bin");
    let o = mbcr(&[
        "encode",
        "-n",
        "6",
        "-k",
        "2",
        "-d",
        "3",
        "-r",
        "2",
        input.to_str().unwrap(),
        "--out",
        other.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let o = mbcr(&[
        "reconstruct",
        &share(shares, 1),
        &share(&other, 2),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("does not match"));
}

#[test]
fn repair_restores_identical_files() {
    let dir = tempfile::tempdir().unwrap();
    let data: Vec<u8> = (0..=255u8).collect();
    let shares = encode_sample(dir.path(), &data);
    let shares = Path::new(&shares);
    let out = dir.path().join("regen");
    let o = mbcr(&[
        "repair",
        &share(shares, 3),
        &share(shares, 4),
        &share(shares, 5),
        "--failed",
        "1,2",
        "--seed",
        "11",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert!(
        text.contains("phase1 6 phase2 1 total 7 symbols/stripe"),
        "{text}"
    );
    assert!(text.contains("system: 14 symbols/stripe"), "{text}");
    for id in [1, 2] {
        assert_eq!(
            fs::read(share(&out, id)).unwrap(),
            fs::read(share(shares, id)).unwrap()
        );
    }

    let o = mbcr(&[
        "repair",
        &share(shares, 3),
        &share(shares, 4),
        "--failed",
        "1,2,5",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
    let o = mbcr(&[
        "repair",
        &share(shares, 1),
        &share(shares, 3),
        &share(shares, 4),
        &share(shares, 5),
        "--failed",
        "2,3",
        "--helpers",
        "2:1+4+5;3:1+4+5",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
    let o = mbcr(&[
        "repair",
        &share(shares, 1),
        &share(shares, 4),
        &share(shares, 5),
        "--failed",
        "2,3",
        "--helpers",
        "2:1+4+5;3:1+4+5",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(
        fs::read(share(&out, 3)).unwrap(),
        fs::read(share(shares, 3)).unwrap()
    );
}

#[test]
fn exit_codes() {
    assert_eq!(
        mbcr(&["params", "-n", "5", "-k", "2", "-d", "3", "-r", "2"])
            .status
            .code(),
        Some(0)
    );
    assert_eq!(
        mbcr(&["params", "-n", "4", "-k", "3", "-d", "2", "-r", "2"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(mbcr(&["params", "-n", "5"]).status.code(), Some(2));
    assert_eq!(mbcr(&["frobnicate"]).status.code(), Some(2));
    let mut verify = vec!["verify"];
    verify.extend(SAMPLE);
    verify.extend(["-q", "7"]);
    assert_eq!(mbcr(&verify).status.code(), Some(0));
    verify.push("--inject-fault");
    let o = mbcr(&verify);
    assert_eq!(o.status.code(), Some(3));
    assert!(stdout(&o)
        .lines()
        .any(|l| l.starts_with("CHECK ") && l.ends_with(" FAIL")));
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("x");
    fs::write(&input, b"x").unwrap();
    let o = mbcr(&[
        "encode",
        "-n",
        "3",
        "-k",
        "1",
        "-d",
        "1",
        "-r",
        "1",
        "-q",
        "7",
        input.to_str().unwrap(),
        "--out",
        "unused",
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!Path::new("unused").exists());
}

#[test]
fn seeds_give_identical_output() {
    let mut args = vec!["simulate"];
    args.extend(SAMPLE);
    args.extend(["--stages", "6", "--seed", "42", "--stripes", "3"]);
    let a = mbcr(&args);
    let b = mbcr(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    args.push("--sequential");
    assert_eq!(mbcr(&args).stdout, a.stdout);
    assert!(stdout(&a).contains("cumulative 84 symbols/stripe, expected 84"));
}
