//! System prompts for the three stages. Instructions are listed in the order the model is
//! expected to work through them.

use std::fmt::Write;

use scriptflow_core::registry::{Cardinality, Catalog};

pub const STAGE1: &str = "\
You help a designer turn a short request into a parametric visual script.
Work step by step and keep mental notes as you go.

1. Read the request and deduce the design intent: what object is wanted and its main parts.
2. Assume practical inputs a designer would want to edit (dimensions, counts). Give each a
   range and a default inside that range.
3. Describe the construction logic as ordered steps, starting from the first geometry that
   has to exist (usually an origin point) and ending with the finished object.
4. Write any remaining thoughts under NOTES.

Reply using exactly this template and nothing else:

INTENT:
<one or two sentences>
INPUTS:
- <name>: <min>..<max> = <default>
LOGIC:
1. <first step>
2. <next step>
NOTES:
<free text>

Write `none` under INPUTS or LOGIC when there is nothing to list.
";

const STAGE2_HEAD: &str = "\
You map a design brief onto a flow-based chain of script components.
Work step by step and keep mental notes as you go.

1. Create one Number Slider per input, with min, max and value arguments.
2. Walk through the logic steps in order. For each, pick components from the allowed list
   below and bind their input ports to earlier steps or to literal values.
3. Data flows forward only. Break every loop or repetition into list operations (Series,
   Range, Divide Curve) or separate steps; never write loop keywords.
4. Write any remaining thoughts under NOTES.

Use only these components (name, then input ports and output ports):
";

const STAGE2_TAIL: &str = "
Reply using exactly this template and nothing else:

CHAIN:
1. <label> = <Component>(<Port>=<source>, ...)
NOTES:
<free text>

A source is the label of an earlier step, `label.Port` for a specific output, a number, or
a quoted text. Repeat a port to connect several sources to a list input.
Example: `2. c = Circle(Center=pt, Radius=r)`
";

pub const STAGE3: &str = r#"You convert a component chain into the script JSON format.
The output must follow the structure below precisely.

1. Give every chain step a node with a unique positive integer id, in chain order.
2. Copy each component name exactly as written in the chain.
3. Put literal arguments under "pins". Number Slider arguments become one pin on port "N"
   holding {"slider": {"min": ..., "max": ..., "value": ...}}.
4. Add one edge per reference from the source node's output port to the target input port.
5. Lay nodes out left to right in "position".

Format:
{
  "schema_version": 1,
  "prompt": <text or null>,
  "nodes": [{"id": <int>, "component": <name>, "position": {"x": <num>, "y": <num>},
             "pins": {<port>: <number | text | {"slider": {...}}>}}],
  "edges": [{"from": {"id": <int>, "port": <name>}, "to": {"id": <int>, "port": <name>}}]
}

Worked example. Chain:
1. r = Number Slider(min=1, max=5, value=2)
2. c = Circle(Radius=r)
JSON:
{"schema_version": 1, "prompt": null,
 "nodes": [
  {"id": 1, "component": "Number Slider", "position": {"x": 0, "y": 0},
   "pins": {"N": {"slider": {"min": 1, "max": 5, "value": 2}}}},
  {"id": 2, "component": "Circle", "position": {"x": 200, "y": 0}, "pins": {}}],
 "edges": [{"from": {"id": 1, "port": "N"}, "to": {"id": 2, "port": "Radius"}}]}

Reply with the JSON object only.
"#;

/// Stage-2 system prompt with the catalog written out as the allow-list.
pub fn stage2(catalog: &Catalog) -> String {
    let mut s = String::from(STAGE2_HEAD);
    for c in catalog.components() {
        let ports = |ps: &[scriptflow_core::registry::PortSpec]| {
            ps.iter()
                .map(|p| {
                    let list = if p.cardinality == Cardinality::List { " list" } else { "" };
                    format!("{} ({}{})", p.name, p.kind.name(), list)
                })
                .collect::<Vec<_>>()
                .join(", ")
        };
        writeln!(s, "- {}: in [{}] out [{}]", c.canonical_name, ports(&c.inputs), ports(&c.outputs)).unwrap();
    }
    s.push_str(STAGE2_TAIL);
    s
}

pub fn correction(problem: &str) -> String {
    format!("That reply could not be used: {problem}. Answer again, following the template exactly.")
}
