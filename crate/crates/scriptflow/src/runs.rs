//! Run directories written by `generate`.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use scriptflow_core::serialize;

use crate::agents::PipelineTranscript;

pub const TRANSCRIPT_FILE: &str = "transcript.json";
pub const SCRIPT_FILE: &str = "script.pscript.json";
pub const DIAGNOSTICS_FILE: &str = "diagnostics.jsonl";
pub const TIMING_FILE: &str = "timing.json";

/// Lowercase ASCII words joined by `-`, at most 48 characters; `run` when nothing is left.
pub fn slug(prompt: &str) -> String {
    let words: Vec<String> = prompt
        .split(|c: char| !c.is_ascii_alphanumeric())
        .filter(|w| !w.is_empty())
        .map(str::to_ascii_lowercase)
        .collect();
    let mut s = String::new();
    for w in words {
        if !s.is_empty() && s.len() + 1 + w.len() > 48 {
            break;
        }
        if !s.is_empty() {
            s.push('-');
        }
        s.push_str(&w[..w.len().min(48)]);
    }
    if s.is_empty() {
        "run".into()
    } else {
        s
    }
}

pub fn default_dir(prompt: &str) -> PathBuf {
    Path::new("runs").join(slug(prompt))
}

/// Writes the transcript, the script (when there is one), the diagnostics as JSON lines and
/// the stage timings. Returns the files written.
pub fn write_run(dir: &Path, t: &PipelineTranscript) -> io::Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    let mut put = |name: &str, text: String| -> io::Result<()> {
        let p = dir.join(name);
        fs::write(&p, text)?;
        written.push(p);
        Ok(())
    };
    put(TRANSCRIPT_FILE, serde_json::to_string_pretty(&t.to_json()).expect("transcript serialises") + "\n")?;
    match &t.document {
        Some(doc) => put(SCRIPT_FILE, serialize(doc))?,
        None => match fs::remove_file(dir.join(SCRIPT_FILE)) {
            Err(e) if e.kind() != io::ErrorKind::NotFound => return Err(e),
            _ => {}
        },
    }
    let lines: String = t.diagnostics.iter().map(|d| d.to_json_line() + "\n").collect();
    put(DIAGNOSTICS_FILE, lines)?;
    put(TIMING_FILE, serde_json::to_string_pretty(&t.timing_json()).expect("timing serialises") + "\n")?;
    Ok(written)
}
