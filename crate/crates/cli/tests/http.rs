use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpStream;
use std::process::{Command, Stdio};
use std::sync::Arc;

use axum::body::Body;
use axum::http::{Method, Request, StatusCode};
use explaineo_cli::http::router;
use explaineo_cli::workspace::Workspace;
use serde_json::{json, Value};
use tower::ServiceExt;

const FIXTURE: &str = include_str!("../../../fixtures/tax_interest.dm");
const CRIPPLED: &str = include_str!("../../../fixtures/tax_interest_crippled.dm");
const LATE: &str = include_str!("../../../fixtures/late.json");

struct Api {
    dir: tempfile::TempDir,
    ws: Arc<Workspace>,
}

impl Api {
    fn new() -> Api {
        let dir = tempfile::tempdir().unwrap();
        let ws = Arc::new(Workspace::open(dir.path()).unwrap());
        Api { dir, ws }
    }

    async fn call(&self, method: Method, uri: &str, body: &str) -> (StatusCode, Value) {
        let req = Request::builder()
            .method(method)
            .uri(uri)
            .body(Body::from(body.to_string()))
            .unwrap();
        let res = router(self.ws.clone()).oneshot(req).await.unwrap();
        let status = res.status();
        let bytes = axum::body::to_bytes(res.into_body(), usize::MAX)
            .await
            .unwrap();
        (status, serde_json::from_slice(&bytes).unwrap())
    }

    async fn seeded() -> Api {
        let api = Api::new();
        let (s, _) = api
            .call(Method::PUT, "/v1/models/tax_interest", FIXTURE)
            .await;
        assert_eq!(s, StatusCode::CREATED);
        let (s, _) = api
            .call(
                Method::POST,
                "/v1/models/tax_interest/instances?id=late",
                LATE,
            )
            .await;
        assert_eq!(s, StatusCode::CREATED);
        api
    }
}

#[tokio::test]
async fn models_are_stored_with_revisions() {
    let api = Api::new();
    let (s, body) = api
        .call(Method::PUT, "/v1/models/tax_interest", FIXTURE)
        .await;
    assert_eq!((s, &body["revision"]), (StatusCode::CREATED, &json!(1)));
    let (s, body) = api
        .call(Method::PUT, "/v1/models/tax_interest", FIXTURE)
        .await;
    assert_eq!((s, &body["revision"]), (StatusCode::OK, &json!(2)));
    assert_eq!(body["version"], "2023.1");

    let (_, list) = api.call(Method::GET, "/v1/models", "").await;
    assert_eq!(
        list,
        json!([{"name": "tax_interest", "version": "2023.1", "revision": 2}])
    );
    let (_, model) = api.call(Method::GET, "/v1/models/tax_interest", "").await;
    assert_eq!(model["source"], FIXTURE);

    let (s, _) = api.call(Method::GET, "/v1/models/missing", "").await;
    assert_eq!(s, StatusCode::NOT_FOUND);
}

#[tokio::test]
async fn invalid_source_gives_diagnostics() {
    let api = Api::new();
    let (s, body) = api
        .call(
            Method::PUT,
            "/v1/models/bad",
            "model bad\nobject A {\n  x: colour\n}\n",
        )
        .await;
    assert_eq!(s, StatusCode::BAD_REQUEST);
    assert_eq!(body["error"]["code"], "invalid_model");
    let d = &body["error"]["diagnostics"][0];
    assert_eq!(
        (d["line"].as_u64(), d["column"].as_u64().is_some()),
        (Some(3), true)
    );
    let (s, body) = api.call(Method::PUT, "/v1/models/other", FIXTURE).await;
    assert_eq!(
        (s, &body["error"]["code"]),
        (StatusCode::BAD_REQUEST, &json!("bad_name"))
    );
}

#[tokio::test]
async fn instances_evaluate_and_reload() {
    let api = Api::seeded().await;
    let (s, inst) = api.call(Method::GET, "/v1/instances/late", "").await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(inst["derived"]["tax_interest_amount"], "15.34");
    assert_eq!(inst["status"], "complete");

    let (s, auto) = api
        .call(Method::POST, "/v1/models/tax_interest/instances", LATE)
        .await;
    assert_eq!(
        (s, &auto["id"]),
        (StatusCode::CREATED, &json!("tax_interest-1"))
    );

    let (s, body) = api
        .call(
            Method::POST,
            "/v1/models/tax_interest/instances",
            r#"{"payment_date": "yesterday"}"#,
        )
        .await;
    assert_eq!(
        (s, &body["error"]["code"]),
        (StatusCode::BAD_REQUEST, &json!("invalid_inputs"))
    );
    let (s, _) = api
        .call(Method::POST, "/v1/models/tax_interest/instances", "[1]")
        .await;
    assert_eq!(s, StatusCode::BAD_REQUEST);
    let (s, _) = api.call(Method::GET, "/v1/instances/nope", "").await;
    assert_eq!(s, StatusCode::NOT_FOUND);
}

#[tokio::test]
async fn conflicting_rules_give_409() {
    let api = Api::new();
    let src = "model clash\nobject A {\n  a: boolean\n  b: boolean\n}\n\
               rule r1 if a then b = true\nrule r2 if a then b = false\n\
               service S { in I(a) out O(b) }\n";
    let (s, _) = api.call(Method::PUT, "/v1/models/clash", src).await;
    assert_eq!(s, StatusCode::CREATED);
    let (s, body) = api
        .call(Method::POST, "/v1/models/clash/instances", r#"{"a": true}"#)
        .await;
    assert_eq!(
        (s, &body["error"]["code"]),
        (StatusCode::CONFLICT, &json!("rule_conflict"))
    );
}

#[tokio::test]
async fn checks_and_graphs() {
    let api = Api::seeded().await;
    let (s, report) = api
        .call(
            Method::POST,
            "/v1/models/tax_interest/checks/io_paths?service=TaxInterest",
            "",
        )
        .await;
    assert_eq!((s, &report["verdict"]), (StatusCode::OK, &json!("pass")));
    let (s, _) = api
        .call(Method::POST, "/v1/models/tax_interest/checks/nonsense", "")
        .await;
    assert_eq!(s, StatusCode::NOT_FOUND);
    let (s, _) = api
        .call(
            Method::POST,
            "/v1/models/tax_interest/checks/io_paths?service=Nope",
            "",
        )
        .await;
    assert_eq!(s, StatusCode::NOT_FOUND);

    api.call(
        Method::PUT,
        "/v1/models/tax_interest_crippled",
        &CRIPPLED.replacen("model tax_interest ", "model tax_interest_crippled ", 1),
    )
    .await;
    let (_, report) = api
        .call(
            Method::POST,
            "/v1/models/tax_interest_crippled/checks/io_paths",
            "",
        )
        .await;
    assert_eq!(report["verdict"], "fail");

    let (s, g) = api
        .call(Method::GET, "/v1/models/tax_interest/graph?view=object", "")
        .await;
    assert_eq!(s, StatusCode::OK);
    assert!(g["nodes"]
        .as_array()
        .unwrap()
        .iter()
        .all(|n| { n["label"] == "ObjectType" || n["label"] == "Variable" }));
    let (_, g) = api
        .call(
            Method::GET,
            "/v1/models/tax_interest/graph?instance=late&centre=owes_tax_interest&radius=1",
            "",
        )
        .await;
    let ids: Vec<&str> = g["nodes"]
        .as_array()
        .unwrap()
        .iter()
        .map(|n| n["id"].as_str().unwrap())
        .collect();
    assert!(ids.contains(&"var:owes_tax_interest") && ids.contains(&"rule:paid_too_late"));
    assert!(!ids.contains(&"var:payment_date"));
    let (_, asg) = api
        .call(Method::GET, "/v1/models/tax_interest/graph?view=asg", "")
        .await;
    assert!(asg["nodes"]
        .as_array()
        .unwrap()
        .iter()
        .any(|n| n["label"] == "Atom"));
    let (s, _) = api
        .call(
            Method::GET,
            "/v1/models/tax_interest/graph?view=sideways",
            "",
        )
        .await;
    assert_eq!(s, StatusCode::BAD_REQUEST);
}

#[tokio::test]
async fn catalogue_profiles_and_ask() {
    let api = Api::seeded().await;
    let (_, qs) = api.call(Method::GET, "/v1/questions", "").await;
    let names: Vec<&str> = qs
        .as_array()
        .unwrap()
        .iter()
        .map(|q| q["qtype"].as_str().unwrap())
        .collect();
    assert_eq!(
        names,
        [
            "what",
            "what_if",
            "why",
            "why_not",
            "how_to",
            "input",
            "output",
            "how",
            "visualisation",
            "whether"
        ]
    );
    let (_, ps) = api.call(Method::GET, "/v1/profiles", "").await;
    assert_eq!(ps.as_array().unwrap().len(), 3);

    let ask = json!({
        "model": "tax_interest",
        "instance": "late",
        "question": {"qtype": "why", "target": "owes_tax_interest"},
    });
    let (s, a) = api.call(Method::POST, "/v1/ask", &ask.to_string()).await;
    assert_eq!(s, StatusCode::OK);
    assert!(a["text"]
        .as_str()
        .unwrap()
        .starts_with("owes_tax_interest = true by rule paid_too_late"));
    assert_eq!(a["citations"][0]["label"], "Art. 30h AWR");

    let denied = json!({
        "profile": "model_expert",
        "model": "tax_interest",
        "instance": "late",
        "question": {"qtype": "why", "target": "owes_tax_interest"},
    });
    let (s, body) = api.call(Method::POST, "/v1/ask", &denied.to_string()).await;
    assert_eq!(
        (s, &body["error"]["code"]),
        (StatusCode::BAD_REQUEST, &json!("not_allowed"))
    );
    let (s, _) = api
        .call(
            Method::POST,
            "/v1/ask",
            r#"{"model": "tax_interest", "question": {"qtype": "why"}}"#,
        )
        .await;
    assert_eq!(s, StatusCode::BAD_REQUEST);
    let (s, _) = api
        .call(
            Method::POST,
            "/v1/ask",
            r#"{"model": "nope", "question": {"qtype": "input"}}"#,
        )
        .await;
    assert_eq!(s, StatusCode::NOT_FOUND);
    let (s, _) = api.call(Method::POST, "/v1/ask", "not json").await;
    assert_eq!(s, StatusCode::BAD_REQUEST);
}

#[tokio::test]
async fn concurrent_writes_to_one_model_serialise() {
    let api = Arc::new(Api::new());
    let handles: Vec<_> = (0..16)
        .map(|_| {
            let api = api.clone();
            tokio::spawn(async move {
                api.call(Method::PUT, "/v1/models/tax_interest", FIXTURE)
                    .await
            })
        })
        .collect();
    let mut revisions = Vec::new();
    for h in handles {
        let (s, body) = h.await.unwrap();
        assert!(s.is_success());
        revisions.push(body["revision"].as_u64().unwrap());
    }
    revisions.sort();
    assert_eq!(revisions, (1..=16).collect::<Vec<_>>());
}

/// The real binary serves the same API and keeps artifacts across restarts.
#[test]
fn serve_binary_persists_across_restarts() {
    let dir = tempfile::tempdir().unwrap();
    let start = || {
        let mut child = Command::new(env!("CARGO_BIN_EXE_explaineo"))
            .args(["serve", "--addr", "127.0.0.1:0", "--workspace"])
            .arg(dir.path())
            .stdout(Stdio::piped())
            .spawn()
            .unwrap();
        let mut line = String::new();
        BufReader::new(child.stdout.take().unwrap())
            .read_line(&mut line)
            .unwrap();
        let addr = line
            .trim()
            .strip_prefix("listening on http://")
            .unwrap()
            .to_string();
        (child, addr)
    };
    let request = |addr: &str, method: &str, path: &str, body: &str| -> String {
        let mut s = TcpStream::connect(addr).unwrap();
        write!(
            s,
            "{method} {path} HTTP/1.1\r\nHost: {addr}\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{body}",
            body.len()
        )
        .unwrap();
        let mut out = String::new();
        s.read_to_string(&mut out).unwrap();
        out
    };

    let (mut child, addr) = start();
    let res = request(&addr, "PUT", "/v1/models/tax_interest", FIXTURE);
    assert!(res.starts_with("HTTP/1.1 201"), "{res}");
    child.kill().unwrap();
    child.wait().unwrap();

    let (mut child, addr) = start();
    let res = request(&addr, "GET", "/v1/models", "");
    child.kill().unwrap();
    child.wait().unwrap();
    assert!(res.starts_with("HTTP/1.1 200"), "{res}");
    assert!(res.contains(r#""name":"tax_interest""#), "{res}");
}

#[tokio::test]
async fn binary_and_api_give_the_same_answer() {
    let api = Api::seeded().await;
    let cases = [
        (
            json!({"qtype": "why", "target": "tax_interest_amount", "parameters": {"trace": true}}),
            vec![
                "why",
                "--target",
                "tax_interest_amount",
                "--param",
                "trace=true",
            ],
        ),
        (
            json!({"qtype": "how_to", "target": "owes_tax_interest", "parameters": {"value": false, "free": ["payment_date"]}}),
            vec![
                "how_to",
                "--target",
                "owes_tax_interest",
                "--param",
                "value=false",
                "--param",
                r#"free=["payment_date"]"#,
            ],
        ),
    ];
    for (question, args) in cases {
        let body = json!({"model": "tax_interest", "instance": "late", "question": question});
        let (s, from_api) = api.call(Method::POST, "/v1/ask", &body.to_string()).await;
        assert_eq!(s, StatusCode::OK);
        let out = Command::new(env!("CARGO_BIN_EXE_explaineo"))
            .arg("ask")
            .args(&args)
            .args([
                "--model",
                "tax_interest",
                "--instance",
                "late",
                "--format",
                "json",
                "--workspace",
            ])
            .arg(api.dir.path())
            .output()
            .unwrap();
        assert!(
            out.status.success(),
            "{}",
            String::from_utf8_lossy(&out.stderr)
        );
        let from_cli: Value = serde_json::from_slice(&out.stdout).unwrap();
        assert_eq!(from_cli, from_api);
    }
}
