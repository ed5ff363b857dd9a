use std::fmt::Write as _;

use finstack::error::Error;
use finstack::json::VerdictDoc;
use finstack::kan::Verdict;
use serde::Serialize;
use serde_json::{Map, Value};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
    Inconclusive,
}

impl Status {
    pub fn of(v: &Verdict) -> Status {
        match v {
            Verdict::Pass => Status::Pass,
            Verdict::Fail(_) => Status::Fail,
            Verdict::Inconclusive(_) => Status::Inconclusive,
        }
    }

    pub fn from_bool(ok: bool) -> Status {
        if ok {
            Status::Pass
        } else {
            Status::Fail
        }
    }

    pub fn and(self, other: Status) -> Status {
        match (self, other) {
            (Status::Fail, _) | (_, Status::Fail) => Status::Fail,
            (Status::Inconclusive, _) | (_, Status::Inconclusive) => Status::Inconclusive,
            _ => Status::Pass,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::Inconclusive => "inconclusive",
        }
    }

    pub fn exit_code(self) -> u8 {
        match self {
            Status::Pass => 0,
            Status::Fail => 1,
            Status::Inconclusive => 3,
        }
    }
}

/// A flat, key-sorted report. Keys print in sorted order in both formats.
pub struct Report {
    pub command: &'static str,
    pub status: Status,
    fields: Map<String, Value>,
}

impl Report {
    pub fn new(command: &'static str) -> Report {
        Report {
            command,
            status: Status::Pass,
            fields: Map::new(),
        }
    }

    pub fn set(&mut self, key: &str, value: impl Serialize) -> &mut Report {
        self.fields
            .insert(key.to_string(), serde_json::to_value(value).expect("serializable"));
        self
    }

    pub fn verdict(&mut self, key: &str, v: &Verdict) -> &mut Report {
        self.status = self.status.and(Status::of(v));
        self.set(key, VerdictDoc::from_verdict(v))
    }

    pub fn require(&mut self, key: &str, ok: bool) -> &mut Report {
        self.status = self.status.and(Status::from_bool(ok));
        self.set(key, ok)
    }

    pub fn to_json(&self) -> Value {
        let mut m = self.fields.clone();
        m.insert("command".into(), Value::from(self.command));
        m.insert("verdict".into(), Value::from(self.status.label()));
        Value::Object(m)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{}: {}", self.command, self.status.label());
        for (k, v) in &self.fields {
            let shown = match v {
                Value::String(s) => s.clone(),
                other => other.to_string(),
            };
            let _ = writeln!(out, "  {k}: {shown}");
        }
        out
    }
}

/// Exit code and message for a library error.
pub fn error_exit(e: &Error) -> (u8, String) {
    let code = match e {
        Error::Budget { .. } => 3,
        Error::Rejected { .. } | Error::Invariant(_) => 1,
        Error::Truncation(_) | Error::Shape(_) | Error::Invalid(_) => 2,
    };
    (code, e.to_string())
}
