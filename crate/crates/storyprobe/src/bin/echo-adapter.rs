//! Reference adapter speaking the storyprobe line protocol. Scores a story
//! by its character count, or looks scores up in a table. Flags inject
//! the misbehaviour the driver must survive.

use std::collections::{BTreeMap, BTreeSet};
use std::io::{BufRead, Write};
use std::path::PathBuf;
use std::sync::mpsc;
use std::time::Duration;

use clap::Parser;
use serde_json::{json, Value};

#[derive(Parser)]
#[command(about = "Reference metric adapter for storyprobe")]
struct Args {
    #[arg(long, default_value = "echo")]
    metric_id: String,
    /// `id<TAB>score` rows; ids missing from the table get an error reply.
    #[arg(long)]
    table: Option<PathBuf>,
    /// Never answer these request ids.
    #[arg(long = "drop", value_name = "ID")]
    dropped: Vec<String>,
    /// Delay the answer to these ids by `--delay-ms`.
    #[arg(long = "slow", value_name = "ID")]
    slow: Vec<String>,
    #[arg(long, default_value_t = 0)]
    delay_ms: u64,
    /// Reply with an error for these ids.
    #[arg(long = "fail", value_name = "ID")]
    failing: Vec<String>,
    /// Exit without answering once this many requests have been read.
    #[arg(long)]
    crash_after: Option<usize>,
    /// Collect up to N requests and answer them in reverse order.
    #[arg(long, default_value_t = 1)]
    reverse_window: usize,
    /// Refuse the handshake with this message.
    #[arg(long)]
    refuse: Option<String>,
}

fn load_table(path: &PathBuf) -> BTreeMap<String, f64> {
    let text = std::fs::read_to_string(path).unwrap_or_else(|e| {
        eprintln!("echo-adapter: cannot read {}: {e}", path.display());
        std::process::exit(2)
    });
    text.lines()
        .filter_map(|l| l.split_once('\t'))
        .filter_map(|(id, v)| v.trim().parse().ok().map(|v| (id.to_string(), v)))
        .collect()
}

fn main() {
    let args = Args::parse();
    let table = args.table.as_ref().map(load_table);
    let dropped: BTreeSet<&str> = args.dropped.iter().map(String::as_str).collect();
    let slow: BTreeSet<&str> = args.slow.iter().map(String::as_str).collect();
    let failing: BTreeSet<&str> = args.failing.iter().map(String::as_str).collect();

    let (tx, rx) = mpsc::channel::<String>();
    std::thread::spawn(move || {
        for line in std::io::stdin().lock().lines().map_while(Result::ok) {
            if tx.send(line).is_err() {
                break;
            }
        }
    });
    let stdout = std::io::stdout();
    let mut out = stdout.lock();

    let Ok(hello) = rx.recv() else { return };
    let hello: Value = serde_json::from_str(&hello).unwrap_or(Value::Null);
    if hello["hello"] != "storyprobe" {
        eprintln!("echo-adapter: unexpected greeting");
        std::process::exit(2);
    }
    let reply = match &args.refuse {
        Some(msg) => json!({"ok": false, "error": msg}),
        None if hello["version"] != 1 => {
            json!({"ok": false, "error": "unsupported protocol version"})
        }
        None => json!({"ok": true, "metric_id": args.metric_id}),
    };
    writeln!(out, "{reply}").unwrap();
    out.flush().unwrap();
    if reply["ok"] != true {
        return;
    }

    let mut read = 0usize;
    let mut held: Vec<Value> = Vec::new();
    loop {
        let line = match rx.recv_timeout(Duration::from_millis(20)) {
            Ok(l) => Some(l),
            Err(mpsc::RecvTimeoutError::Timeout) => None,
            Err(mpsc::RecvTimeoutError::Disconnected) => {
                flush(
                    &mut out, &mut held, &args, &table, &dropped, &slow, &failing,
                );
                return;
            }
        };
        match line {
            Some(l) if l.trim().is_empty() => continue,
            Some(l) => {
                read += 1;
                if args.crash_after.is_some_and(|n| read >= n) {
                    std::process::exit(3);
                }
                held.push(serde_json::from_str(&l).unwrap_or(Value::Null));
                if held.len() >= args.reverse_window {
                    flush(
                        &mut out, &mut held, &args, &table, &dropped, &slow, &failing,
                    );
                }
            }
            None => flush(
                &mut out, &mut held, &args, &table, &dropped, &slow, &failing,
            ),
        }
    }
}

fn flush(
    out: &mut impl Write,
    held: &mut Vec<Value>,
    args: &Args,
    table: &Option<BTreeMap<String, f64>>,
    dropped: &BTreeSet<&str>,
    slow: &BTreeSet<&str>,
    failing: &BTreeSet<&str>,
) {
    while let Some(req) = held.pop() {
        let id = req["request_id"].as_str().unwrap_or_default().to_string();
        if dropped.contains(id.as_str()) {
            continue;
        }
        if slow.contains(id.as_str()) {
            std::thread::sleep(Duration::from_millis(args.delay_ms));
        }
        let reply = if failing.contains(id.as_str()) {
            json!({"request_id": id, "error": "refused by request"})
        } else if let Some(t) = table {
            match t.get(&id) {
                Some(v) => json!({"request_id": id, "score": v}),
                None => json!({"request_id": id, "error": "id not in table"}),
            }
        } else {
            let chars = req["story"]
                .as_str()
                .map(|s| s.chars().count())
                .unwrap_or(0);
            json!({"request_id": id, "score": chars as f64})
        };
        writeln!(out, "{reply}").unwrap();
    }
    out.flush().unwrap();
}
