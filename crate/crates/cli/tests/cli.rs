use std::process::{Command, Output};

fn kit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hurewicz-kit"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).expect("utf-8 output")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited")
}

#[test]
fn alphabets_listing_and_exit_codes() {
    let o = kit(&["alphabets", "--depth", "2"]);
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    assert!(text.contains("A_0 (2 members)") && text.contains("A_1 (3 members)"));
    for v in ["4 = 2^2", "36 = 2^2·3^2", "288 = 2^5·3^2"] {
        assert!(text.contains(v), "{text}");
    }
    let empty = kit(&["alphabets", "--depth", "0"]);
    assert_eq!(code(&empty), 0);
    assert!(stdout(&empty).is_empty());
    let too_deep = kit(&["alphabets", "--depth", "99"]);
    assert_eq!(code(&too_deep), 2);
    assert!(String::from_utf8_lossy(&too_deep.stderr).contains("capacity"));
}

#[test]
fn relations_exports() {
    let dot = stdout(&kit(&["relations", "--length", "3", "--format", "dot"]));
    assert!(dot.starts_with("graph T3 {") && dot.trim_end().ends_with('}'));
    assert_eq!(dot.matches("[label=\"<").count(), 42);
    assert_eq!(dot.matches("psi=").count(), 6);
    let json: serde_json::Value = serde_json::from_str(&stdout(&kit(&[
        "relations",
        "--length",
        "1",
        "--format",
        "json",
    ])))
    .unwrap();
    assert_eq!(json["edges"], serde_json::json!([]));
    assert_eq!(json["schema"], "hurewicz-kit/1");
    assert_eq!(
        code(&kit(&["relations", "--length", "1", "--format", "xml"])),
        2
    );
    assert_eq!(
        code(&kit(&["psi", "1,1,1", "1,1,900", "--format", "dot"])),
        2
    );
}

#[test]
fn psi_and_chain() {
    let o = kit(&["psi", "1,1,1", "1,1,900"]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o), "0 witness (<>, <0>)\n");
    assert_eq!(stdout(&kit(&["psi", "1,1,1", "1,1,1"])), "none\n");
    assert_eq!(code(&kit(&["psi", "1", "1,1"])), 2);
    assert_eq!(code(&kit(&["psi", "1,x", "1,1"])), 2);
    assert_eq!(
        stdout(&kit(&["chain", "1,1,1", "1,1,900"])),
        "<1,1,1> -- <1,1,900>\n"
    );
    assert_eq!(stdout(&kit(&["chain", "1,1,1", "4,1,1"])), "none\n");
    assert_eq!(stdout(&kit(&["chain", "1,36", "1,36"])), "<1,36>\n");
    assert_eq!(code(&kit(&["chain", "1,4", "1,4"])), 2);
}

#[test]
fn branch_verbs() {
    assert_eq!(
        stdout(&kit(&["branch", "constraints", "-", "1"])),
        "branch (<>, <1>)\nones: 4\nnon_ones: 2\n"
    );
    assert_eq!(
        stdout(&kit(&["branch", "constraints", "0", "0,0"])),
        "branch (<0>, <0,0>)\nones: 2, 30\nnon_ones: \n"
    );
    assert_eq!(
        stdout(&kit(&["branch", "apply", "-", "0", "--point", "1"])),
        "<1>⌢1^ω -> <1,1,900>⌢1^ω\n"
    );
    assert_eq!(
        code(&kit(&["branch", "apply", "-", "1", "--point", "1"])),
        2
    );
    assert_eq!(
        stdout(&kit(&["branch", "find", "-", "--point", "1"])),
        "t = <0>\n"
    );
    assert_eq!(
        stdout(&kit(&["branch", "find", "-", "--point", "1,1,4,1,1"])),
        "t = <1>\n"
    );
    assert_eq!(
        stdout(&kit(&["branch", "find", "0", "--point", "1,1", "--bare"])),
        "unknown\n"
    );
    assert_eq!(code(&kit(&["branch", "constraints", "0", "0"])), 2);
}

#[test]
fn nodes_listing() {
    let json: serde_json::Value = serde_json::from_str(&stdout(&kit(&[
        "nodes", "--length", "3", "--format", "json",
    ])))
    .unwrap();
    assert_eq!(json["count"], 42);
    assert_eq!(stdout(&kit(&["nodes", "--length", "0"])), "<>\n");
}

#[test]
fn sigma_and_witness() {
    assert_eq!(stdout(&kit(&["sigma", "1", "3"])), "5\n");
    assert_eq!(stdout(&kit(&["sigma", "1", "5"])), "9\n");
    assert_eq!(
        stdout(&kit(&["sigma", "-", "123456789012345678901234567890"])),
        "123456789012345678901234567890\n"
    );
    assert_eq!(code(&kit(&["sigma", "1,0", "3"])), 2);
    let json: serde_json::Value = serde_json::from_str(&stdout(&kit(&[
        "witness", "1", "1,1", "--u", "101", "--format", "json",
    ])))
    .unwrap();
    assert_eq!(json["case"], "strict prefix");
    let prefix = json["prefix"].as_str().unwrap();
    assert!(prefix.starts_with("101"));
    let src_s: usize = json["source_s"].as_str().unwrap().parse().unwrap();
    let src_t: usize = json["source_t"].as_str().unwrap().parse().unwrap();
    assert_ne!(prefix.as_bytes()[src_s], prefix.as_bytes()[src_t]);
    assert_eq!(code(&kit(&["witness", "1", "1"])), 2);
    assert_eq!(code(&kit(&["witness", "1", "2", "--u", "012"])), 2);
}

#[test]
fn verify_suites_exit_codes() {
    assert_eq!(
        code(&kit(&[
            "verify",
            "departure",
            "--depth",
            "3",
            "--horizon",
            "10000",
            "--samples",
            "200"
        ])),
        0
    );
    assert_eq!(
        code(&kit(&[
            "verify",
            "good-suite",
            "--max-s-len",
            "2",
            "--horizon",
            "5000",
            "--max-u-len",
            "6"
        ])),
        0
    );
    assert_eq!(
        code(&kit(&[
            "verify", "cascade", "--trials", "100", "--seed", "0"
        ])),
        0
    );
    assert_eq!(code(&kit(&["verify", "arrival-scan"])), 0);
    assert_eq!(code(&kit(&["verify", "bogus"])), 2);
    assert_eq!(
        code(&kit(&["verify", "departure", "--horizon", "100000000"])),
        2
    );
}

#[test]
fn faults_fail_with_counterexamples() {
    for (suite, fault) in [
        ("departure", "off-by-one-rewrite"),
        ("departure", "dropped-non-ones"),
        ("cascade", "non-strict-epsilon"),
    ] {
        let mut args = vec!["verify", suite, "--fault", fault, "--format", "json"];
        if suite == "departure" {
            args.extend(["--depth", "3", "--samples", "200"]);
        } else {
            args.extend(["--trials", "50"]);
        }
        let o = kit(&args);
        assert_eq!(code(&o), 1, "{suite} with {fault}");
        let json: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
        assert!(!json["counterexamples"].as_array().unwrap().is_empty());
        assert_eq!(json["params"]["fault"], fault);
    }
}

#[test]
fn identical_invocations_give_identical_bytes() {
    let dir = std::env::temp_dir().join(format!("hurewicz-kit-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    for (i, args) in [
        vec![
            "verify", "cascade", "--trials", "60", "--seed", "9", "--format", "json",
        ],
        vec![
            "verify",
            "departure",
            "--depth",
            "2",
            "--samples",
            "100",
            "--seed",
            "4",
            "--format",
            "json",
        ],
        vec!["relations", "--length", "3", "--format", "json"],
    ]
    .into_iter()
    .enumerate()
    {
        let a = dir.join(format!("{i}-a.json"));
        let b = dir.join(format!("{i}-b.json"));
        for path in [&a, &b] {
            let mut full = args.clone();
            full.extend(["--out", path.to_str().unwrap()]);
            kit(&full);
        }
        let (ra, rb) = (std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
        assert!(!ra.is_empty());
        assert_eq!(ra, rb, "{args:?}");
    }
    std::fs::remove_dir_all(&dir).ok();
}
