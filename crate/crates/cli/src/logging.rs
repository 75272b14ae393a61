//! JSON-lines logger on standard error.

use std::io::Write;

use log::{LevelFilter, Log, Metadata, Record};
use serde_json::{json, Value};

struct JsonLogger {
    level: LevelFilter,
}

impl Log for JsonLogger {
    fn enabled(&self, metadata: &Metadata<'_>) -> bool {
        metadata.level() <= self.level
    }

    fn log(&self, record: &Record<'_>) {
        if !self.enabled(record.metadata()) {
            return;
        }
        let message = record.args().to_string();
        let mut line = json!({
            "level": record.level().as_str().to_lowercase(),
            "target": record.target(),
        });
        // structured events (already JSON objects) are nested, not quoted
        match serde_json::from_str::<Value>(&message) {
            Ok(v @ Value::Object(_)) => line["event"] = v,
            _ => line["message"] = message.into(),
        }
        let mut err = std::io::stderr().lock();
        let _ = writeln!(err, "{line}");
    }

    fn flush(&self) {
        let _ = std::io::stderr().flush();
    }
}

pub fn init(level: &str) -> Result<(), String> {
    let level: LevelFilter = level
        .parse()
        .map_err(|_| format!("unknown log level {level:?} (off|error|warn|info|debug|trace)"))?;
    log::set_boxed_logger(Box::new(JsonLogger { level })).map_err(|e| e.to_string())?;
    log::set_max_level(level);
    Ok(())
}

/// Log a serialisable event as one JSON line at info level.
pub fn event(v: Value) {
    log::info!("{v}");
}

