//! Starts the HTTP API on a local port, ingests a databook through it and
//! queries the result.
//!
//!     cargo run --example http_service

use std::net::SocketAddr;

use graphled::service::{app, ServiceConfig};
use graphled::synth::complete_star;
use tokio::io::{AsyncReadExt, AsyncWriteExt};
use tokio::net::{TcpListener, TcpStream};

async fn request(addr: SocketAddr, method: &str, path: &str, body: &str) -> anyhow::Result<String> {
    let mut stream = TcpStream::connect(addr).await?;
    let head = format!(
        "{method} {path} HTTP/1.1\r\nhost: {addr}\r\ncontent-type: application/json\r\ncontent-length: {}\r\nconnection: close\r\n\r\n",
        body.len()
    );
    stream.write_all(head.as_bytes()).await?;
    stream.write_all(body.as_bytes()).await?;
    let mut resp = String::new();
    stream.read_to_string(&mut resp).await?;
    let status = resp.lines().next().unwrap_or_default().to_string();
    let payload = resp.split_once("\r\n\r\n").map_or("", |(_, b)| b);
    Ok(format!("{status}\n{payload}"))
}

#[tokio::main]
async fn main() -> anyhow::Result<()> {
    let config = ServiceConfig {
        slot_dir: std::env::temp_dir().join("graphled-example-slots"),
        ..ServiceConfig::default()
    };
    let listener = TcpListener::bind("127.0.0.1:0").await?;
    let addr = listener.local_addr()?;
    let router = app(&config);
    tokio::spawn(async move { axum::serve(listener, router).await });
    println!("listening on http://{addr}\n");

    let calls = [
        ("POST", "/v1/ingest", complete_star().to_loader_json()),
        ("GET", "/v1/graph/summary", String::new()),
        ("POST", "/v1/query/traverse", r#"{"dst_label": "topic", "limit": 2}"#.to_string()),
        ("GET", "/v1/centrality?metric=relevance&top=2", String::new()),
        ("GET", "/v1/inspect/completeness/DB-STAR", String::new()),
    ];
    for (method, path, body) in calls {
        println!("{method} {path}\n{}\n", request(addr, method, path, &body).await?);
    }
    Ok(())
}
