use std::process::Command;
use std::time::{Duration, Instant};

use readorder::comparator::external::ExternalComparator;
use readorder::preorder::{order_with_strategy, Strategy, StrategyConfig};
use readorder::synth::{synth, SynthSpec};
use readorder::{BoundingBox, Document, Error};

fn shell(script: &str, timeout: Duration) -> readorder::Result<ExternalComparator> {
    let mut cmd = Command::new("sh");
    cmd.arg("-c").arg(script);
    ExternalComparator::spawn_command(cmd, script, "box", timeout)
}

fn pair() -> (Document, BoundingBox, BoundingBox) {
    let doc = Document::new("d", 100., 100., vec![]);
    (doc, BoundingBox::new("a", [0., 0., 10., 10.], "x"), BoundingBox::new("b", [20., 0., 30., 10.], "y"))
}

const ACK: &str = r#"read h; echo '{"ok":true}';"#;

#[test]
fn well_behaved_shell_comparator() {
    let mut ext = shell(&format!(r#"{ACK} while read l; do echo '{{"p":0.25}}'; done"#), Duration::from_secs(5)).unwrap();
    let (doc, a, b) = pair();
    for _ in 0..5 {
        assert_eq!(ext.score(&a, &b, (doc.page_width, doc.page_height), None).unwrap().p(), 0.25);
    }
    assert_eq!(ext.calls(), 5);
}

#[test]
fn handshake_must_be_acknowledged() {
    let err = shell(r#"read h; echo '{"ok":false}'"#, Duration::from_secs(5)).err().unwrap();
    assert!(matches!(err, Error::Protocol(_)), "{err}");
    let err = shell(r#"read h; echo hello"#, Duration::from_secs(5)).err().unwrap();
    assert!(matches!(err, Error::Protocol(_)), "{err}");
}

#[test]
fn missing_program_is_a_spawn_error() {
    let err = ExternalComparator::spawn("/nonexistent/comparator --flag", "box", Duration::from_secs(1)).err().unwrap();
    assert!(matches!(err, Error::Spawn { .. }), "{err}");
}

#[test]
fn silence_times_out_and_poisons() {
    let mut ext = shell(&format!("{ACK} sleep 30"), Duration::from_millis(200)).unwrap();
    let (doc, a, b) = pair();
    let start = Instant::now();
    let err = ext.score(&a, &b, (doc.page_width, doc.page_height), None).unwrap_err();
    assert!(matches!(err, Error::Timeout(_)), "{err}");
    assert!(start.elapsed() < Duration::from_secs(5));
    assert!(ext.score(&a, &b, (100., 100.), None).is_err());
}

#[test]
fn bad_replies_are_protocol_errors() {
    let (doc, a, b) = pair();
    for reply in [r#"{"p":1.5}"#, r#"{"p":0.5,"extra":1}"#, r#"{"q":0.5}"#, "0.5"] {
        let script = format!("{ACK} read l; echo '{reply}'; sleep 5");
        let mut ext = shell(&script, Duration::from_secs(5)).unwrap();
        let err = ext.score(&a, &b, (doc.page_width, doc.page_height), None).unwrap_err();
        assert!(matches!(err, Error::Protocol(_)), "{reply}: {err}");
    }
    let mut ext = shell(ACK, Duration::from_secs(5)).unwrap();
    assert!(matches!(ext.score(&a, &b, (100., 100.), None), Err(Error::Protocol(_))));
}

#[test]
fn preorder_reports_the_failing_pass() {
    let s = synth(&SynthSpec::default()).unwrap();
    let script = format!(r#"{ACK} read l; echo '{{"p":0.9}}'; read l; echo '{{"p":7}}'"#);
    // command lines are split on whitespace, so run the script from a file
    let dir = tempfile::TempDir::new().unwrap();
    let path = dir.path().join("cmp.sh");
    std::fs::write(&path, script).unwrap();
    let mut cfg = StrategyConfig {
        external_command: Some(format!("sh {}", path.display())),
        ..StrategyConfig::default()
    };
    let err = order_with_strategy(&s.doc, Strategy::ExternalModel, &mut cfg).unwrap_err();
    match err {
        Error::Preorder { trace, source } => {
            assert_eq!(trace.comparator_calls, 2);
            assert_eq!(trace.passes, 0);
            assert!(matches!(*source, Error::Protocol(_)), "{source}");
        }
        other => panic!("unexpected {other}"),
    }
}
