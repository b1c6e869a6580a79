//! Component catalog and name resolution.
//!
//! The catalog is the closed allow-list of operations a script may use. Names coming from
//! generated scripts are resolved against it with normalisation (case, spaces, hyphens,
//! underscores) followed by a bounded edit-distance match.

mod names;

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use serde_json::{json, Map, Value};

use crate::geometry::GeomValue;

pub use names::{levenshtein, normalize, MatchVia, Resolution, FUZZY_THRESHOLD};
use names::{resolve_among, NameEntry};

/// Source text of the compiled-in catalog.
pub const BUILTIN_CATALOG_JSON: &str = include_str!("../../catalog/builtin.json");

/// Value kind carried by a port.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PortKind {
    Number,
    Integer,
    Point,
    Vector,
    Curve,
    Surface,
    GeometryAny,
    Text,
}

impl PortKind {
    pub const ALL: [PortKind; 8] = [
        PortKind::Number,
        PortKind::Integer,
        PortKind::Point,
        PortKind::Vector,
        PortKind::Curve,
        PortKind::Surface,
        PortKind::GeometryAny,
        PortKind::Text,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PortKind::Number => "number",
            PortKind::Integer => "integer",
            PortKind::Point => "point",
            PortKind::Vector => "vector",
            PortKind::Curve => "curve",
            PortKind::Surface => "surface",
            PortKind::GeometryAny => "geometry-any",
            PortKind::Text => "text",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        PortKind::ALL.into_iter().find(|k| k.name() == s)
    }

    /// Kinds a drawable sink may produce.
    pub fn is_geometry(self) -> bool {
        matches!(self, PortKind::Point | PortKind::Curve | PortKind::Surface | PortKind::GeometryAny)
    }

    /// Whether a runtime value conforms to this kind (list items checked individually).
    pub fn accepts_value(self, v: &GeomValue) -> bool {
        match v {
            GeomValue::List(items) => items.iter().all(|i| self.accepts_value(i)),
            GeomValue::Error { .. } => true,
            GeomValue::Number(_) => matches!(self, PortKind::Number | PortKind::Integer),
            GeomValue::Text(_) => self == PortKind::Text,
            GeomValue::Point(_) => matches!(self, PortKind::Point | PortKind::GeometryAny),
            GeomValue::Vector(_) => self == PortKind::Vector,
            GeomValue::Curve(_) => matches!(self, PortKind::Curve | PortKind::GeometryAny),
            GeomValue::Surface(_) => matches!(self, PortKind::Surface | PortKind::GeometryAny),
        }
    }

    /// Article-prefixed noun used in diagnostics ("a number", "an axis").
    pub fn with_article(self) -> String {
        with_article(self.name())
    }
}

impl fmt::Display for PortKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

pub(crate) fn with_article(noun: &str) -> String {
    let vowel = noun.chars().next().is_some_and(|c| "aeiouAEIOU".contains(c));
    format!("{} {}", if vowel { "an" } else { "a" }, noun)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Cardinality {
    Scalar,
    List,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Side {
    In,
    Out,
}

impl Side {
    pub fn name(self) -> &'static str {
        match self {
            Side::In => "in",
            Side::Out => "out",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Category {
    Params,
    Maths,
    Vector,
    Curve,
    Surface,
    Transform,
    Sets,
}

impl Category {
    const ALL: [Category; 7] = [
        Category::Params,
        Category::Maths,
        Category::Vector,
        Category::Curve,
        Category::Surface,
        Category::Transform,
        Category::Sets,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Category::Params => "params",
            Category::Maths => "maths",
            Category::Vector => "vector",
            Category::Curve => "curve",
            Category::Surface => "surface",
            Category::Transform => "transform",
            Category::Sets => "sets",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        Category::ALL.into_iter().find(|c| c.name() == s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PortSpec {
    pub name: String,
    pub aliases: Vec<String>,
    pub kind: PortKind,
    pub cardinality: Cardinality,
    pub required: bool,
    /// Used when the port is neither wired nor pinned. Absent on required ports.
    pub default: Option<GeomValue>,
    /// Value a repair may pin onto a required port left unfed. Never read by evaluation.
    pub suggested: Option<GeomValue>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComponentSpec {
    pub canonical_name: String,
    pub display_name: String,
    pub aliases: Vec<String>,
    pub category: Category,
    pub inputs: Vec<PortSpec>,
    pub outputs: Vec<PortSpec>,
}

impl ComponentSpec {
    pub fn ports(&self, side: Side) -> &[PortSpec] {
        match side {
            Side::In => &self.inputs,
            Side::Out => &self.outputs,
        }
    }

    pub fn input(&self, name: &str) -> Option<&PortSpec> {
        self.inputs.iter().find(|p| p.name == name)
    }

    pub fn output(&self, name: &str) -> Option<&PortSpec> {
        self.outputs.iter().find(|p| p.name == name)
    }

    pub fn is_params(&self) -> bool {
        self.category == Category::Params
    }

    pub fn is_slider(&self) -> bool {
        self.canonical_name == "Number Slider"
    }

    /// Resolves a raw port name on one side using the same policy as component names.
    pub fn port_of(&self, side: Side, raw: &str) -> Resolution<&PortSpec> {
        let ports = self.ports(side);
        let entries: Vec<NameEntry<'_>> = ports
            .iter()
            .map(|p| NameEntry { canonical: &p.name, aliases: &p.aliases })
            .collect();
        resolve_among(&entries, raw).map(|i| &ports[i])
    }
}

/// Failure to load a catalog; `entry` names the offending component or port.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CatalogError {
    pub entry: String,
    pub message: String,
}

impl fmt::Display for CatalogError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "catalog entry {}: {}", self.entry, self.message)
    }
}

impl core::error::Error for CatalogError {}

fn cat_err(entry: impl Into<String>, message: impl Into<String>) -> CatalogError {
    CatalogError { entry: entry.into(), message: message.into() }
}

/// Immutable, validated set of components.
#[derive(Debug, Clone, PartialEq)]
pub struct Catalog {
    version: String,
    components: Vec<ComponentSpec>,
}

impl Catalog {
    /// The compiled-in catalog.
    pub fn builtin() -> Catalog {
        Catalog::from_json_str(BUILTIN_CATALOG_JSON).expect("built-in catalog is valid")
    }

    pub fn from_json_str(text: &str) -> Result<Catalog, CatalogError> {
        let value: Value = serde_json::from_str(text).map_err(|e| cat_err("<root>", format!("invalid JSON: {e}")))?;
        Catalog::from_json(&value)
    }

    pub fn from_json(value: &Value) -> Result<Catalog, CatalogError> {
        let root = value.as_object().ok_or_else(|| cat_err("<root>", "expected an object"))?;
        let version = root
            .get("version")
            .and_then(Value::as_str)
            .ok_or_else(|| cat_err("<root>", "missing string field `version`"))?
            .to_string();
        let list = root
            .get("components")
            .and_then(Value::as_array)
            .ok_or_else(|| cat_err("<root>", "missing array field `components`"))?;
        let components = list
            .iter()
            .enumerate()
            .map(|(i, c)| parse_component(i, c))
            .collect::<Result<Vec<_>, _>>()?;
        Catalog::new(version, components)
    }

    /// Validates catalog-wide invariants.
    pub fn new(version: String, components: Vec<ComponentSpec>) -> Result<Catalog, CatalogError> {
        let mut seen_names = BTreeSet::new();
        for c in &components {
            let entry = format!("`{}`", c.canonical_name);
            if c.canonical_name.trim().is_empty() {
                return Err(cat_err(entry, "empty name"));
            }
            for n in core::iter::once(&c.canonical_name).chain(c.aliases.iter()) {
                let key = normalize(n);
                if key.is_empty() {
                    return Err(cat_err(entry, "empty alias"));
                }
                if !seen_names.insert(key) {
                    return Err(cat_err(entry, format!("duplicate name or alias `{n}`")));
                }
            }
            if c.outputs.is_empty() {
                return Err(cat_err(entry, "component has no output port"));
            }
            for side in [Side::In, Side::Out] {
                let mut ports = BTreeSet::new();
                for p in c.ports(side) {
                    let pentry = format!("`{}` {} port `{}`", c.canonical_name, side.name(), p.name);
                    for n in core::iter::once(&p.name).chain(p.aliases.iter()) {
                        if !ports.insert(normalize(n)) {
                            return Err(cat_err(pentry, format!("duplicate port name or alias `{n}`")));
                        }
                    }
                    if p.required && p.default.is_some() {
                        return Err(cat_err(pentry, "required port must not carry a default"));
                    }
                    if let Some(d) = &p.default {
                        if !p.kind.accepts_value(d) {
                            return Err(cat_err(pentry, format!("default does not match kind {}", p.kind)));
                        }
                    }
                }
            }
        }
        Ok(Catalog { version, components })
    }

    pub fn version(&self) -> &str {
        &self.version
    }

    pub fn components(&self) -> &[ComponentSpec] {
        &self.components
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    /// Lookup by exact canonical name.
    pub fn get(&self, canonical: &str) -> Option<&ComponentSpec> {
        self.components.iter().find(|c| c.canonical_name == canonical)
    }

    pub fn index_of(&self, canonical: &str) -> Option<usize> {
        self.components.iter().position(|c| c.canonical_name == canonical)
    }

    /// Resolves a possibly misspelled component name.
    pub fn resolve_name(&self, raw: &str) -> Resolution<&ComponentSpec> {
        self.resolve_index(raw).map(|i| &self.components[i])
    }

    pub fn resolve_index(&self, raw: &str) -> Resolution<usize> {
        let entries: Vec<NameEntry<'_>> = self
            .components
            .iter()
            .map(|c| NameEntry { canonical: &c.canonical_name, aliases: &c.aliases })
            .collect();
        resolve_among(&entries, raw)
    }

    /// Serialises back to the catalog file format.
    pub fn to_json(&self) -> Value {
        json!({
            "version": self.version,
            "components": self.components.iter().map(component_json).collect::<Vec<_>>(),
        })
    }
}

fn component_json(c: &ComponentSpec) -> Value {
    let mut m = Map::new();
    m.insert("name".into(), json!(c.canonical_name));
    if c.display_name != c.canonical_name {
        m.insert("display_name".into(), json!(c.display_name));
    }
    m.insert("category".into(), json!(c.category.name()));
    m.insert("aliases".into(), json!(c.aliases));
    m.insert("inputs".into(), Value::Array(c.inputs.iter().map(port_json).collect()));
    m.insert("outputs".into(), Value::Array(c.outputs.iter().map(port_json).collect()));
    Value::Object(m)
}

fn port_json(p: &PortSpec) -> Value {
    let mut m = Map::new();
    m.insert("name".into(), json!(p.name));
    m.insert("kind".into(), json!(p.kind.name()));
    m.insert(
        "cardinality".into(),
        json!(match p.cardinality {
            Cardinality::Scalar => "scalar",
            Cardinality::List => "list",
        }),
    );
    m.insert("required".into(), json!(p.required));
    if let Some(d) = p.default.as_ref().and_then(GeomValue::to_default_json) {
        m.insert("default".into(), d);
    }
    if let Some(s) = p.suggested.as_ref().and_then(GeomValue::to_default_json) {
        m.insert("suggested".into(), s);
    }
    m.insert("aliases".into(), json!(p.aliases));
    Value::Object(m)
}

fn string_list(v: Option<&Value>, entry: &str, field: &str) -> Result<Vec<String>, CatalogError> {
    match v {
        None => Ok(Vec::new()),
        Some(Value::Array(items)) => items
            .iter()
            .map(|i| {
                i.as_str()
                    .map(ToString::to_string)
                    .ok_or_else(|| cat_err(entry, format!("`{field}` must contain strings")))
            })
            .collect(),
        Some(_) => Err(cat_err(entry, format!("`{field}` must be an array"))),
    }
}

fn parse_component(index: usize, v: &Value) -> Result<ComponentSpec, CatalogError> {
    let anon = format!("components[{index}]");
    let m = v.as_object().ok_or_else(|| cat_err(&anon, "expected an object"))?;
    let name = m
        .get("name")
        .and_then(Value::as_str)
        .ok_or_else(|| cat_err(&anon, "missing string field `name`"))?
        .to_string();
    let entry = format!("{anon} (`{name}`)");
    let category = m
        .get("category")
        .and_then(Value::as_str)
        .and_then(Category::parse)
        .ok_or_else(|| cat_err(&entry, "missing or unknown `category`"))?;
    let aliases = string_list(m.get("aliases"), &entry, "aliases")?;
    let display_name = m.get("display_name").and_then(Value::as_str).unwrap_or(&name).to_string();
    let ports = |field: &str| -> Result<Vec<PortSpec>, CatalogError> {
        match m.get(field) {
            None => Ok(Vec::new()),
            Some(Value::Array(items)) => items
                .iter()
                .enumerate()
                .map(|(i, p)| parse_port(&format!("{entry}.{field}[{i}]"), p))
                .collect(),
            Some(_) => Err(cat_err(&entry, format!("`{field}` must be an array"))),
        }
    };
    Ok(ComponentSpec {
        inputs: ports("inputs")?,
        outputs: ports("outputs")?,
        canonical_name: name,
        display_name,
        aliases,
        category,
    })
}

fn parse_port(entry: &str, v: &Value) -> Result<PortSpec, CatalogError> {
    let m = v.as_object().ok_or_else(|| cat_err(entry, "expected an object"))?;
    let name = m
        .get("name")
        .and_then(Value::as_str)
        .filter(|s| !s.trim().is_empty())
        .ok_or_else(|| cat_err(entry, "missing string field `name`"))?
        .to_string();
    let kind_str = m.get("kind").and_then(Value::as_str).unwrap_or("");
    let kind = PortKind::parse(kind_str).ok_or_else(|| cat_err(entry, format!("unknown kind `{kind_str}`")))?;
    let cardinality = match m.get("cardinality").and_then(Value::as_str) {
        None | Some("scalar") => Cardinality::Scalar,
        Some("list") => Cardinality::List,
        Some(other) => return Err(cat_err(entry, format!("unknown cardinality `{other}`"))),
    };
    let required = match m.get("required") {
        None => false,
        Some(Value::Bool(b)) => *b,
        Some(_) => return Err(cat_err(entry, "`required` must be a boolean")),
    };
    let value_of = |field: &str| -> Result<Option<GeomValue>, CatalogError> {
        m.get(field)
            .map(|d| GeomValue::from_default_json(d).ok_or_else(|| cat_err(entry, format!("unsupported `{field}` value"))))
            .transpose()
    };
    Ok(PortSpec {
        aliases: string_list(m.get("aliases"), entry, "aliases")?,
        default: value_of("default")?,
        suggested: value_of("suggested")?,
        name,
        kind,
        cardinality,
        required,
    })
}
