use serde::Serialize;
use serde_json::Value;

/// The document printed for every command. Field order is fixed by the
/// struct; nested objects come out with sorted keys.
#[derive(Debug, Serialize)]
pub struct Report {
    pub command: Vec<String>,
    pub status: String,
    pub primal: Value,
    pub dual: Value,
    pub gap: Value,
    pub certificate: Value,
    pub residuals: Value,
    /// Seconds spent in the command, excluding parsing of the arguments.
    pub wall_clock: f64,
    pub stats: Value,
    pub version: &'static str,
    pub instance: Value,
}

impl Report {
    pub fn new(command: Vec<String>, status: impl Into<String>) -> Self {
        Self {
            command,
            status: status.into(),
            primal: Value::Null,
            dual: Value::Null,
            gap: Value::Null,
            certificate: Value::Null,
            residuals: Value::Null,
            wall_clock: 0.0,
            stats: Value::Null,
            version: env!("CARGO_PKG_VERSION"),
            instance: Value::Null,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }

    /// One `key  value` line per field, keys padded to a common width.
    /// Nested values are printed as compact JSON.
    pub fn to_text(&self) -> String {
        let Value::Object(fields) = serde_json::to_value(self).expect("reports serialize") else {
            unreachable!("a report is an object")
        };
        // serde_json's map sorts keys; keep the struct's order instead
        let order = [
            "command",
            "status",
            "primal",
            "dual",
            "gap",
            "certificate",
            "residuals",
            "wall_clock",
            "stats",
            "version",
            "instance",
        ];
        let width = order.iter().map(|k| k.len()).max().unwrap_or(0);
        let mut out = String::new();
        for key in order {
            let value = match &fields[key] {
                Value::String(s) => s.clone(),
                Value::Array(items) if key == "command" => items
                    .iter()
                    .map(|v| v.as_str().unwrap_or_default())
                    .collect::<Vec<_>>()
                    .join(" "),
                v => v.to_string(),
            };
            out.push_str(&format!("{key:<width$}  {value}\n"));
        }
        out
    }
}

pub fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("results serialize")
}
