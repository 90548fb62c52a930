//! Helpers shared by the CLI tests and the acceptance suite.
#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use factcheck_service::{RunningService, Service, ServiceConfig};
use serde_json::{json, Value};

pub fn fixtures_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").canonicalize().unwrap()
}

pub fn fixture_path(name: &str) -> String {
    fixtures_dir().join(name).to_string_lossy().into_owned()
}

pub fn config_path() -> String {
    fixture_path("service_config.json")
}

pub struct Output {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

/// Runs the CLI in-process against the local state directory `dir`.
pub fn cli(dir: &Path, args: &[&str]) -> Output {
    let mut argv = vec!["factcheck".to_string(), "--config".into(), config_path()];
    argv.extend(["--state-dir".to_string(), dir.to_string_lossy().into_owned()]);
    argv.extend(args.iter().map(|a| a.to_string()));
    cli_raw(argv)
}

pub fn cli_raw(argv: Vec<String>) -> Output {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = factcheck_cli::run(argv, &mut out, &mut err);
    Output { code, stdout: String::from_utf8(out).unwrap(), stderr: String::from_utf8(err).unwrap() }
}

/// Replaces RFC 3339 timestamps with a fixed marker.
pub fn mask_timestamps(text: &str) -> String {
    let bytes = text.as_bytes();
    let shape = |i: usize| {
        let d = |k: usize| bytes.get(i + k).is_some_and(u8::is_ascii_digit);
        (0..4).all(d) && bytes.get(i + 4) == Some(&b'-') && d(5) && d(6) && bytes.get(i + 7) == Some(&b'-')
            && d(8) && d(9) && bytes.get(i + 10) == Some(&b'T') && d(11) && d(12) && bytes.get(i + 13) == Some(&b':')
    };
    let mut out = String::with_capacity(text.len());
    let mut i = 0;
    while i < bytes.len() {
        if shape(i) {
            let mut j = i + 14;
            while j < bytes.len() && (bytes[j].is_ascii_digit() || b":.+-Z".contains(&bytes[j])) {
                j += 1;
            }
            out.push_str("<TIMESTAMP>");
            i = j;
        } else {
            let c = text[i..].chars().next().unwrap();
            out.push(c);
            i += c.len_utf8();
        }
    }
    out
}

/// Persisted state files with timestamps masked, keyed by file name.
pub fn masked_state(dir: &Path) -> BTreeMap<String, String> {
    let mut files = BTreeMap::new();
    for entry in std::fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        let name = path.file_name().unwrap().to_string_lossy().into_owned();
        if path.is_file() && !name.starts_with('.') {
            files.insert(name, mask_timestamps(&std::fs::read_to_string(&path).unwrap()));
        }
    }
    files
}

/// Result of a scripted session: exported turtle and annotations.
pub struct Exported {
    pub turtle: String,
    pub annotations: String,
}

/// Import, submit, review, check and export through the CLI.
pub fn cli_session(dir: &Path, export_dir: &Path) -> (Vec<(String, Output)>, Exported) {
    let trusted = fixture_path("trusted_report.txt");
    let article = fixture_path("article.html");
    let ttl = export_dir.join("export.ttl").to_string_lossy().into_owned();
    let sidecar = export_dir.join("export.annotations.jsonl").to_string_lossy().into_owned();
    let mut steps: Vec<(String, Output)> = Vec::new();
    let mut step = |args: Vec<String>| {
        let refs: Vec<&str> = args.iter().map(String::as_str).collect();
        let out = cli(dir, &refs);
        assert_eq!(out.code, 0, "{args:?}: {}", out.stderr);
        steps.push((args.join(" "), out));
        steps.last().unwrap().1.stdout.clone()
    };
    let s = |v: &[&str]| v.iter().map(|a| a.to_string()).collect::<Vec<_>>();

    step(s(&["kg-import", &fixture_path("ground_truth.ttl")]));
    let submitted = step(s(&["--json", "ingest", &trusted, "--trust", "trusted", "--mode", "rule"]));
    let submitted: Value = serde_json::from_str(submitted.trim()).unwrap();
    let ids: Vec<String> =
        submitted["record_ids"].as_array().unwrap().iter().map(|v| v.as_str().unwrap().to_string()).collect();
    step(s(&["review", &ids[0], "approve", "--by", "ana"]));
    step(s(&["review", &ids[1], "reject", "--by", "ana", "--note", "needs a second source"]));
    step(s(&["ingest", &article, "--trust", "untrusted", "--mode", "rule"]));
    step(s(&["check", ":human_activity", ":increases", ":co2_concentration"]));
    step(s(&["check", ":co2_concentration", ":causes", ":sea_level_rise"]));
    step(s(&["records"]));
    step(s(&["kg-export", &ttl, "--sidecar", &sidecar]));
    let exported = Exported {
        turtle: std::fs::read_to_string(&ttl).unwrap(),
        annotations: std::fs::read_to_string(&sidecar).unwrap(),
    };
    (steps, exported)
}

/// The same session as [`cli_session`] as plain HTTP requests.
pub fn api_session(dir: &Path) -> Exported {
    let runtime = tokio::runtime::Builder::new_multi_thread().enable_all().build().unwrap();
    runtime.block_on(async {
        let mut config = ServiceConfig::load(config_path()).unwrap();
        config.state_dir = dir.to_path_buf();
        let running = RunningService::bind(Service::new(config).unwrap(), "127.0.0.1:0".parse().unwrap()).await.unwrap();
        let base = running.base_url();
        let http = reqwest::Client::new();
        let post = |path: &str, body: Value| {
            let req = http.post(format!("{base}{path}")).json(&body);
            async move {
                let r = req.send().await.unwrap();
                assert_eq!(r.status(), 200);
                r.json::<Value>().await.unwrap()
            }
        };
        let read = |name: &str| std::fs::read_to_string(fixture_path(name)).unwrap();

        post("/kg/import", json!({ "turtle": read("ground_truth.ttl"), "source": "ground_truth.ttl" })).await;
        let submitted = post(
            "/documents",
            json!({ "text": read("trusted_report.txt"), "filename": fixture_path("trusted_report.txt"),
                    "trust_channel": "trusted", "mode": "rule" }),
        )
        .await;
        let ids = submitted["record_ids"].as_array().unwrap();
        let (r0, r1) = (ids[0].as_str().unwrap(), ids[1].as_str().unwrap());
        post(&format!("/records/{r0}/review"), json!({ "action": "approve", "reviewer": "ana" })).await;
        post(
            &format!("/records/{r1}/review"),
            json!({ "action": "reject", "reviewer": "ana", "note": "needs a second source" }),
        )
        .await;
        post(
            "/documents",
            json!({ "text": read("article.html"), "filename": fixture_path("article.html"),
                    "trust_channel": "untrusted", "mode": "rule" }),
        )
        .await;
        let checked = post(
            "/check",
            json!({ "subject": ":human_activity", "predicate": ":increases", "object": ":co2_concentration" }),
        )
        .await;
        assert_eq!(checked["verdict"], "confirmed");
        let get = |path: &str| {
            let req = http.get(format!("{base}{path}"));
            async move { req.send().await.unwrap().text().await.unwrap() }
        };
        let exported = Exported { turtle: get("/kg/export").await, annotations: get("/kg/annotations").await };
        running.shutdown().await.unwrap();
        exported
    })
}
