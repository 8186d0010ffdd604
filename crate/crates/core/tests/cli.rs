//! The command-line program, run as a child process.

mod common;

use common::*;
use vhdlkern::corpus;
use vhdlkern::desugar::ComplexDesign;
use vhdlkern::vcd::replay_final;

fn text(b: &[u8]) -> String {
    String::from_utf8_lossy(b).into_owned()
}

#[test]
fn runs_a_design_from_flags() {
    let o = bin()
        .arg(corpus_file("factorial", "factorial.vhd"))
        .args([
            "--cycles",
            "40",
            "--clock",
            "clk",
            "--set",
            "1:start=1",
            "--set",
            "1:n=6",
        ])
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", text(&o.stderr));
    assert!(
        text(&o.stdout).lines().any(|l| l == "result = 720"),
        "{}",
        text(&o.stdout)
    );
}

#[test]
fn flags_override_the_run_spec() {
    let c = corpus::corpus_root().join("factorial").join("runspec.toml");
    let o = bin()
        .arg("--runspec")
        .arg(&c)
        .args(["--set", "1:n=4"])
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert!(
        text(&o.stdout).lines().any(|l| l == "result = 24"),
        "{}",
        text(&o.stdout)
    );
}

#[test]
fn divergence_exits_with_two() {
    let o = bin()
        .arg("--runspec")
        .arg(corpus::corpus_root().join("osc/runspec.toml"))
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
    assert!(text(&o.stderr).contains("delta cycle limit exceeded in cycle 1 after 1000 iterations"));
    let o = bin()
        .arg(corpus_file("osc", "osc.vhd"))
        .args(["--delta-limit", "10"])
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
    assert!(text(&o.stderr).contains("after 10 iterations"), "{}", text(&o.stderr));
    let o = bin()
        .arg(corpus_file("while_forever", "while_forever.vhd"))
        .args(["--loop-budget", "50"])
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
    assert!(text(&o.stderr).contains("loop budget exceeded"), "{}", text(&o.stderr));
}

#[test]
fn source_errors_exit_with_one_and_a_location() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("bad.vhd");
    std::fs::write(
        &p,
        "entity bad is\nend bad;\narchitecture a of bad is\nbegin\n  x <= ;\nend a;\n",
    )
    .unwrap();
    let o = bin().arg(&p).output().unwrap();
    assert_eq!(o.status.code(), Some(1));
    let err = text(&o.stderr);
    assert!(err.contains("bad.vhd:5:"), "{err}");
    assert!(err.contains("error:"), "{err}");
    assert!(!err.contains('\x1b'), "color with VHDLKERN_COLOR=never: {err}");
}

#[test]
fn bad_stimuli_exit_with_one() {
    let f = corpus_file("factorial", "factorial.vhd");
    for bad in ["0:start=1", "1:nosuch=1", "1:n=x", "start=1"] {
        let o = bin().arg(&f).args(["--set", bad]).output().unwrap();
        assert_eq!(o.status.code(), Some(1), "{bad}: {}", text(&o.stderr));
    }
    let o = bin().arg(&f).args(["--clock", "nosuch"]).output().unwrap();
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn ambiguous_top_needs_a_flag() {
    let files = [
        corpus_file("power_comp", "mult_unit.vhd"),
        corpus_file("power_comp", "power_comp.vhd"),
    ];
    let o = bin().args(&files).arg("--top").arg("nosuch").output().unwrap();
    assert_eq!(o.status.code(), Some(1));
    let o = bin().args(&files).output().unwrap();
    assert_eq!(o.status.code(), Some(0), "single root is picked: {}", text(&o.stderr));
}

#[test]
fn empty_sensitivity_warns() {
    let o = bin().arg(corpus_file("gen_adder", "core_twin.vhd")).output().unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert!(
        text(&o.stderr).contains("warning: process `c0` has an empty sensitivity list"),
        "{}",
        text(&o.stderr)
    );
}

#[test]
fn dump_ast_reads_back() {
    let f = corpus_file("fsm", "fsm.vhd");
    let o = bin().arg(&f).arg("--dump-ast").output().unwrap();
    assert_eq!(o.status.code(), Some(0));
    let parsed: Vec<ComplexDesign> = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(parsed, load(&[f]).complex);
}

#[test]
fn whole_corpus_round_trips() {
    let p = roundtrip_problems();
    assert!(p.is_empty(), "{}", p.join("\n"));
}

#[test]
fn runs_are_byte_identical() {
    let p = determinism_problems();
    assert!(p.is_empty(), "{}", p.join("\n"));
}

/// The dump rendering of a value in the VCD's alphabet.
fn as_vcd(v: &str) -> String {
    let inner = v.trim_matches(|c| c == '\'' || c == '"');
    if inner.len() != v.len() {
        inner
            .chars()
            .map(|c| match c {
                '0' | 'L' => '0',
                '1' | 'H' => '1',
                'Z' => 'z',
                _ => 'x',
            })
            .collect()
    } else {
        match v {
            "true" => "1".into(),
            "false" => "0".into(),
            _ => v.into(),
        }
    }
}

#[test]
fn vcd_replay_gives_the_final_state() {
    let dir = tempfile::tempdir().unwrap();
    for c in corpus::cases().unwrap().into_iter().filter(|c| c.exit == 0) {
        let vcd = dir.path().join(format!("{}.vcd", c.name));
        let o = bin()
            .arg("--runspec")
            .arg(c.dir.join("runspec.toml"))
            .arg("--vcd")
            .arg(&vcd)
            .output()
            .unwrap();
        assert_eq!(o.status.code(), Some(0), "{}", c.name);
        let fin = replay_final(&std::fs::read_to_string(&vcd).unwrap()).unwrap();
        let dump = vhdlkern::dump::parse_dump(&text(&o.stdout));
        let top: Vec<_> = dump.iter().filter(|(n, _)| !n.starts_with("u_")).collect();
        assert_eq!(fin.len(), top.len(), "{}: VCD variables vs dumped signals", c.name);
        for (n, v) in top {
            assert_eq!(fin.get(n.as_str()), Some(&as_vcd(v)), "{}: `{n}`", c.name);
        }
    }
}
