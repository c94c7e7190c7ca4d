use std::io::{Read, Write};
use std::net::{TcpListener, TcpStream};
use std::process::{Command, Output, Stdio};
use std::thread::sleep;
use std::time::{Duration, Instant};

use pedscript_store::Store;

const FORMULARY: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/../../data/formulary.json");
const FIXTURES: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/../../data/fixtures.json");

fn pedscript(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pedscript"))
        .args(args)
        .env_remove("PEDSCRIPT_DB")
        .env_remove("PEDSCRIPT_FORMULARY")
        .env_remove("PEDSCRIPT_PORT")
        .output()
        .unwrap()
}

fn text(b: &[u8]) -> String {
    String::from_utf8_lossy(b).into_owned()
}

#[test]
fn dose_for_thirty_pounds() {
    let out = pedscript(&["dose", "--weight-kg", "13.6078", "--adult-dose", "150"]);
    assert!(out.status.success());
    let stdout = text(&out.stdout);
    assert!(stdout.contains("child dose: 30.00 mg"), "{stdout}");
}

#[test]
fn dose_flags_cap() {
    let out = pedscript(&["dose", "--weight-kg", "60", "--adult-dose", "1000", "--cap", "500"]);
    assert!(out.status.success());
    assert!(text(&out.stdout).contains("ExceedsCap"));
}

#[test]
fn bad_flags_exit_nonzero() {
    assert!(!pedscript(&["dose", "--weight-kg", "abc", "--adult-dose", "1"]).status.success());
    let out = pedscript(&["dose", "--weight-kg", "0", "--adult-dose", "1"]);
    assert!(!out.status.success());
    assert!(text(&out.stderr).contains("weight"));
    assert!(!pedscript(&["frobnicate"]).status.success());
}

#[test]
fn seed_loads_fixtures() {
    let dir = tempfile::tempdir().unwrap();
    let db = dir.path().join("rx.db");
    let db_arg = db.to_str().unwrap();
    let out = pedscript(&["seed", "--fixtures", FIXTURES, "--db", db_arg, "--formulary", FORMULARY]);
    assert!(out.status.success(), "{}", text(&out.stderr));
    assert!(text(&out.stdout).contains("8 monographs"));
    let store = Store::open(&db).unwrap();
    assert_eq!(store.list_patients(None).unwrap().len(), 3);
    assert!(store.authenticate("dr.bello", "change-me-doctor", chrono::Utc::now()).is_ok());
}

#[test]
fn seed_with_malformed_formulary_reports_position() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "[\n  {\"drug_id\": \"x\",\n   \"name\": }\n]").unwrap();
    let db = dir.path().join("rx.db");
    let out = pedscript(&[
        "seed",
        "--fixtures",
        FIXTURES,
        "--db",
        db.to_str().unwrap(),
        "--formulary",
        bad.to_str().unwrap(),
    ]);
    assert!(!out.status.success());
    let stderr = text(&out.stderr);
    assert!(stderr.contains("line 3"), "{stderr}");
}

#[test]
fn serve_on_occupied_port_fails() {
    let dir = tempfile::tempdir().unwrap();
    let held = TcpListener::bind("127.0.0.1:0").unwrap();
    let port = held.local_addr().unwrap().port().to_string();
    let db = dir.path().join("rx.db");
    let out = pedscript(&["serve", "--port", &port, "--db", db.to_str().unwrap(), "--formulary", FORMULARY]);
    assert!(!out.status.success());
    assert!(text(&out.stderr).contains("binding"));
}

#[test]
fn serve_answers_http() {
    let dir = tempfile::tempdir().unwrap();
    let port = TcpListener::bind("127.0.0.1:0").unwrap().local_addr().unwrap().port();
    let db = dir.path().join("rx.db");
    let mut child = Command::new(env!("CARGO_BIN_EXE_pedscript"))
        .args(["serve", "--db", db.to_str().unwrap()])
        .env("PEDSCRIPT_PORT", port.to_string())
        .env("PEDSCRIPT_FORMULARY", FORMULARY)
        .stdout(Stdio::null())
        .stderr(Stdio::null())
        .spawn()
        .unwrap();

    let deadline = Instant::now() + Duration::from_secs(10);
    let mut stream = loop {
        match TcpStream::connect(("127.0.0.1", port)) {
            Ok(s) => break s,
            Err(_) if Instant::now() < deadline => sleep(Duration::from_millis(50)),
            Err(e) => {
                child.kill().ok();
                panic!("service never came up: {e}");
            }
        }
    };
    let body = r#"{"username":"nobody","password":"x"}"#;
    write!(
        stream,
        "POST /login HTTP/1.1\r\nHost: localhost\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{body}",
        body.len()
    )
    .unwrap();
    let mut response = String::new();
    stream.read_to_string(&mut response).unwrap();
    child.kill().ok();
    child.wait().ok();
    assert!(response.starts_with("HTTP/1.1 401"), "{response}");
    assert!(response.contains("invalid_credentials"));
}
