//! Corpus runs against oracle-derived golden dumps.
//!
//! With `VHDLKERN_BLESS=1` the body of every `expected.dump` is rewritten
//! from its oracle header (run with `--test-threads 1`). The simulator
//! never writes golden values.

use vhdlkern::corpus::{self, oracle_lines};

fn bless(c: &corpus::GoldenCase) {
    let path = c.dir.join("expected.dump");
    let text = std::fs::read_to_string(&path).unwrap();
    let mut out: Vec<String> = text.lines().filter(|l| l.starts_with('#')).map(String::from).collect();
    for (n, v) in oracle_lines(&c.oracle).unwrap() {
        out.push(format!("{n} = {v}"));
    }
    std::fs::write(&path, out.join("\n") + "\n").unwrap();
}

#[test]
fn golden_files_match_their_oracles() {
    let cases = corpus::cases().unwrap();
    assert!(cases.len() >= 12, "only {} corpus cases", cases.len());
    for c in &cases {
        if std::env::var("VHDLKERN_BLESS").as_deref() == Ok("1") {
            bless(c);
        }
        let c = corpus::load_case(&c.dir).unwrap();
        let want = oracle_lines(&c.oracle).unwrap();
        assert_eq!(c.expected, want, "{}: golden body differs from its oracle", c.name);
    }
}

#[test]
fn corpus_runs_match_golden_dumps() {
    let mut failures = Vec::new();
    for c in corpus::cases().unwrap() {
        assert!(
            !c.expected.is_empty() || c.oracle == "none",
            "{}: golden file has no expected lines",
            c.name
        );
        if let Err(e) = corpus::check_case(&c) {
            failures.push(e);
        }
    }
    assert!(failures.is_empty(), "{}", failures.join("\n"));
}

#[test]
fn failing_cases_name_the_cause() {
    for c in corpus::cases().unwrap().into_iter().filter(|c| c.exit != 0) {
        assert!(c.message.is_some(), "{}: failing case without a message header", c.name);
    }
}
