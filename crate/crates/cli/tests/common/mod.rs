#![allow(dead_code)]

use std::collections::BTreeMap;
use std::net::SocketAddr;
use std::path::Path;
use std::sync::Arc;

use ornament_cli::server::{self, AppState};
use ornament_cli::session::SessionConfig;
use serde_json::{json, Value};
use tokio::sync::oneshot;

pub struct Running {
    pub base: String,
    pub stop: Option<oneshot::Sender<()>>,
    pub handle: tokio::task::JoinHandle<()>,
}

impl Running {
    pub async fn shutdown(mut self) {
        if let Some(s) = self.stop.take() {
            let _ = s.send(());
        }
        let _ = self.handle.await;
    }
}

pub fn config(tasks: Vec<ornament_core::survey::TaskSpec>) -> SessionConfig {
    SessionConfig {
        session_id: "test".into(),
        tasks,
        ornament_assets: BTreeMap::new(),
        warmup_reveal: 3,
        time_limit_seconds: None,
        experiment: None,
    }
}

pub async fn start(config: &SessionConfig, data_dir: &Path) -> Running {
    let state = Arc::new(AppState::open(config, data_dir).expect("session opens"));
    let listener = server::bind(SocketAddr::from(([127, 0, 0, 1], 0))).await.expect("bind");
    let base = format!("http://{}", listener.local_addr().unwrap());
    let (tx, rx) = oneshot::channel();
    let handle = tokio::spawn(async move {
        server::run(listener, state, async {
            let _ = rx.await;
        })
        .await
        .expect("server runs");
    });
    Running { base, stop: Some(tx), handle }
}

pub struct Reply {
    pub status: u16,
    pub text: String,
}

impl Reply {
    pub fn json(&self) -> Value {
        serde_json::from_str(&self.text).unwrap_or_else(|e| panic!("not JSON ({e}): {}", self.text))
    }
}

pub async fn get(client: &reqwest::Client, url: &str) -> Reply {
    let r = client.get(url).send().await.expect("request");
    Reply { status: r.status().as_u16(), text: r.text().await.unwrap_or_default() }
}

pub async fn post(client: &reqwest::Client, url: &str, body: &str) -> Reply {
    let r = client
        .post(url)
        .header("content-type", "application/json")
        .body(body.to_string())
        .send()
        .await
        .expect("request");
    Reply { status: r.status().as_u16(), text: r.text().await.unwrap_or_default() }
}

pub async fn enroll(client: &reqwest::Client, base: &str) -> String {
    let r = post(client, &format!("{base}/api/participants"), "{}").await;
    assert_eq!(r.status, 201, "{}", r.text);
    r.json()["participantId"].as_str().unwrap().to_string()
}

/// Answers every task offered to a new participant with `choose(task)`,
/// returning the number of answers given.
pub async fn run_participant<F>(client: &reqwest::Client, base: &str, mut choose: F) -> usize
where
    F: FnMut(&Value) -> (String, Option<String>, u64),
{
    let id = enroll(client, base).await;
    let mut n = 0;
    loop {
        let task = get(client, &format!("{base}/api/participants/{id}/next-task")).await;
        assert_eq!(task.status, 200, "{}", task.text);
        let task = task.json();
        if task.get("done").is_some() {
            return n;
        }
        let (most, least, elapsed) = choose(&task);
        let mut body = json!({
            "participantId": id,
            "taskId": task["taskId"],
            "mostSimilar": most,
            "elapsedMs": elapsed,
        });
        if let Some(l) = least {
            body["leastSimilar"] = json!(l);
        }
        let r = post(client, &format!("{base}/api/responses"), &body.to_string()).await;
        assert_eq!(r.status, 200, "{}", r.text);
        assert_eq!(r.json()["accepted"], true);
        n += 1;
    }
}
