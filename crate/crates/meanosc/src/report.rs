use meanosc_core::EnumerationMode;
use serde::Serialize;

pub const TOOL_VERSION: &str = concat!("meanosc ", env!("CARGO_PKG_VERSION"));

/// Envelope shared by every analysis subcommand.
#[derive(Debug, Serialize)]
pub struct Report<'a, P> {
    pub tool_version: &'static str,
    pub command: &'static str,
    /// SHA-256 of the input file's bytes.
    pub input_digest: &'a str,
    pub mode: EnumerationMode,
    pub payload: P,
}

impl<'a, P: Serialize> Report<'a, P> {
    pub fn new(
        command: &'static str,
        input_digest: &'a str,
        mode: EnumerationMode,
        payload: P,
    ) -> Self {
        Self {
            tool_version: TOOL_VERSION,
            command,
            input_digest,
            mode,
            payload,
        }
    }

    /// Pretty JSON, one field per line, with a trailing newline.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report values are finite");
        s.push('\n');
        s
    }
}
