//! Stage-1 output: what the user wants, which inputs parameterise it, and the steps to build it.

use std::fmt::Write;

use serde_json::{json, Value};

/// A parameter the designer may want to explore, later a Number Slider.
#[derive(Debug, Clone, PartialEq)]
pub struct InputSpec {
    pub name: String,
    pub min: f64,
    pub max: f64,
    pub default: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DesignBrief {
    pub intent: String,
    pub inputs: Vec<InputSpec>,
    pub logic: Vec<String>,
}

/// Labelled sections of a reply, in order of appearance. Text before the first header is
/// ignored.
pub(crate) fn sections<'a>(raw: &'a str, names: &[&str]) -> Vec<(String, Vec<&'a str>)> {
    let mut out: Vec<(String, Vec<&str>)> = Vec::new();
    for line in raw.lines() {
        if let Some((name, rest)) = header(line, names) {
            out.push((name, Vec::new()));
            if !rest.is_empty() {
                out.last_mut().unwrap().1.push(rest);
            }
        } else if let Some(last) = out.last_mut() {
            last.1.push(line);
        }
    }
    out
}

/// Recognises `NAME:` headers, allowing markdown decoration such as `## NAME:` or `**NAME:**`.
fn header<'a>(line: &'a str, names: &[&str]) -> Option<(String, &'a str)> {
    let t = line.trim().trim_start_matches('#').trim_start().trim_start_matches("**");
    let colon = t.find(':')?;
    let word = t[..colon].trim().trim_end_matches("**").trim();
    let name = names.iter().find(|n| n.eq_ignore_ascii_case(word))?;
    let rest = t[colon + 1..].trim().trim_start_matches("**").trim();
    Some((name.to_string(), rest))
}

pub(crate) fn section<'a, 'b>(secs: &'b [(String, Vec<&'a str>)], name: &str) -> Option<&'b [&'a str]> {
    secs.iter().find(|(n, _)| n == name).map(|(_, lines)| lines.as_slice())
}

/// Strips a leading list marker: `-`, `*`, `1.` or `1)`.
pub(crate) fn strip_marker(line: &str) -> &str {
    let t = line.trim();
    if let Some(rest) = t.strip_prefix("- ").or_else(|| t.strip_prefix("* ")) {
        return rest.trim();
    }
    let digits = t.bytes().take_while(u8::is_ascii_digit).count();
    if digits > 0 {
        let rest = &t[digits..];
        if let Some(r) = rest.strip_prefix('.').or_else(|| rest.strip_prefix(')')) {
            return r.trim();
        }
    }
    t
}

fn is_item(line: &str) -> bool {
    strip_marker(line).len() != line.trim().len()
}

fn parse_number(s: &str) -> Option<f64> {
    s.trim().parse::<f64>().ok().filter(|x| x.is_finite())
}

fn parse_input(line: &str) -> Result<InputSpec, String> {
    let body = strip_marker(line);
    let expected = || format!("expected `- name: min..max = default`, got `{}`", line.trim());
    let (name, rest) = body.rsplit_once(':').ok_or_else(expected)?;
    let (range, default) = rest.split_once('=').ok_or_else(expected)?;
    let (min, max) = range.split_once("..").ok_or_else(expected)?;
    let name = name.trim();
    let (min, max, default) = match (parse_number(min), parse_number(max), parse_number(default)) {
        (Some(a), Some(b), Some(c)) => (a, b, c),
        _ => return Err(expected()),
    };
    if name.is_empty() {
        return Err(expected());
    }
    if min > max || default < min || default > max {
        return Err(format!("input `{name}` needs min <= default <= max, got {min}..{max} = {default}"));
    }
    Ok(InputSpec { name: name.to_string(), min, max, default })
}

/// Parses the INTENT / INPUTS / LOGIC / NOTES template. Returns the brief and the notes.
pub fn parse_brief(raw: &str) -> Result<(DesignBrief, String), String> {
    let secs = sections(raw, &["INTENT", "INPUTS", "LOGIC", "NOTES"]);
    let intent = section(&secs, "INTENT").ok_or("missing INTENT section")?;
    let intent = intent.iter().map(|l| l.trim()).filter(|l| !l.is_empty()).collect::<Vec<_>>().join(" ");
    if intent.is_empty() {
        return Err("INTENT section is empty".into());
    }
    let inputs = section(&secs, "INPUTS").ok_or("missing INPUTS section")?;
    let inputs = inputs
        .iter()
        .filter(|l| !l.trim().is_empty() && !l.trim().eq_ignore_ascii_case("none"))
        .map(|l| parse_input(l))
        .collect::<Result<Vec<_>, _>>()?;
    let logic_lines = section(&secs, "LOGIC").ok_or("missing LOGIC section")?;
    let mut logic: Vec<String> = Vec::new();
    for l in logic_lines.iter().filter(|l| !l.trim().is_empty() && !l.trim().eq_ignore_ascii_case("none")) {
        match logic.last_mut() {
            Some(prev) if !is_item(l) => {
                prev.push(' ');
                prev.push_str(l.trim());
            }
            _ => logic.push(strip_marker(l).to_string()),
        }
    }
    let notes = section(&secs, "NOTES").map(|l| l.join("\n").trim().to_string()).unwrap_or_default();
    Ok((DesignBrief { intent, inputs, logic }, notes))
}

impl DesignBrief {
    /// Canonical text form; the only part of stage 1 that stage 2 sees.
    pub fn render(&self) -> String {
        let mut s = String::new();
        writeln!(s, "INTENT:\n{}", self.intent).unwrap();
        s.push_str("INPUTS:\n");
        for i in &self.inputs {
            writeln!(s, "- {}: {}..{} = {}", i.name, i.min, i.max, i.default).unwrap();
        }
        s.push_str("LOGIC:\n");
        for (k, step) in self.logic.iter().enumerate() {
            writeln!(s, "{}. {}", k + 1, step).unwrap();
        }
        s
    }

    pub fn to_json(&self) -> Value {
        json!({
            "intent": self.intent,
            "inputs": self.inputs.iter().map(|i| json!({"name": i.name, "min": i.min, "max": i.max, "default": i.default})).collect::<Vec<_>>(),
            "logic": self.logic,
        })
    }
}
