use std::path::PathBuf;
use std::process::{Command, Output};

pub fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_cmc-moduli"))
}

pub fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

pub fn config(name: &str) -> String {
    let mut p = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    p.push("configs");
    p.push(name);
    p.to_string_lossy().into_owned()
}

pub fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

pub fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf-8 output")
}

pub struct Profile {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    pub footer: serde_json::Value,
}

impl Profile {
    pub fn parse(text: &str) -> Self {
        let mut lines = text.lines();
        let header = lines.next().unwrap().split(',').map(String::from).collect();
        let mut rows = Vec::new();
        let mut footer = serde_json::Value::Null;
        for line in lines {
            if let Some(json) = line.strip_prefix("# ") {
                footer = serde_json::from_str(json).unwrap();
            } else {
                rows.push(line.split(',').map(|x| x.parse().unwrap()).collect());
            }
        }
        Self {
            header,
            rows,
            footer,
        }
    }

    pub fn column(&self, name: &str) -> Vec<f64> {
        let k = self.header.iter().position(|h| h == name).unwrap();
        self.rows.iter().map(|r| r[k]).collect()
    }
}
