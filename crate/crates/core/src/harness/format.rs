//! Instance files.
//!
//! Two formats, told apart by the first meaningful line:
//!
//! * an edge list for graphs with modular weights:
//!
//!   ```text
//!   # comment
//!   graph 4
//!   1 2 1.0
//!   2 3 3.0
//!   ```
//!
//! * JSON lines: a header object, then one object per element.
//!
//!   ```text
//!   {"kind":"hypergraph","n":6,"p":3,"oracle":{"family":"coverage"}}
//!   {"vertices":[1,2,3],"cover":[0,4]}
//!   {"vertices":[3,5],"cover":[4]}
//!   ```
//!
//!   Matroid instances declare `"matroids":[{"parts":[[0,1],[2]],"capacities":[1,1]}]`
//!   with parts listing element ids, which are 0-based stream positions.
//!   `n` may be omitted for them and defaults to the smallest rank bound.
//!
//! Element ids are stream positions in both formats. Blank lines and lines
//! starting with `#` are ignored.

use std::collections::BTreeSet;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matroid::PartitionMatroid;
use crate::model::{Constraint, Element, ElementId, Instance, InstanceHeader, Kind, StreamSource};
use crate::oracle::{OracleFamily, ValueOracle};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyKind {
    Modular,
    Coverage,
    SaturatedAdditive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleSpec {
    pub family: FamilyKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cap: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatroidSpec {
    pub parts: Vec<Vec<u32>>,
    pub capacities: Vec<u32>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum KindName {
    Graph,
    Hypergraph,
    MatroidIntersection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct HeaderLine {
    kind: KindName,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    p: Option<usize>,
    oracle: OracleSpec,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    matroids: Vec<MatroidSpec>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ElementLine {
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    vertices: Vec<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    weight: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    cover: Option<Vec<u32>>,
}

/// Parsed header: what a stream needs before its first element.
struct Prelude {
    header: InstanceHeader,
    oracle: OracleSpec,
}

fn parse_err(path: &Path, line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        msg: msg.into(),
    }
}

fn io_err(path: &Path, source: std::io::Error) -> Error {
    Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn build_prelude(path: &Path, line: usize, h: HeaderLine) -> Result<Prelude> {
    let err = |msg: String| parse_err(path, line, msg);
    let kind = match (h.kind, h.p) {
        (KindName::Graph, None | Some(2)) => Kind::Graph,
        (KindName::Graph, Some(p)) => return Err(err(format!("graphs have p = 2, not {p}"))),
        (KindName::Hypergraph, Some(p)) if p >= 1 => Kind::Hypergraph { p },
        (KindName::MatroidIntersection, Some(p)) if p >= 1 => Kind::MatroidIntersection { p },
        (_, _) => return Err(err("hypergraph and matroid instances need p >= 1".into())),
    };
    if h.oracle.family == FamilyKind::SaturatedAdditive && h.oracle.cap.is_none() {
        return Err(err("saturated_additive needs a cap".into()));
    }
    if h.oracle.family != FamilyKind::SaturatedAdditive && h.oracle.cap.is_some() {
        return Err(err("only saturated_additive takes a cap".into()));
    }
    let mut matroids = Vec::with_capacity(h.matroids.len());
    for (i, m) in h.matroids.into_iter().enumerate() {
        let parts = m
            .parts
            .into_iter()
            .map(|p| p.into_iter().map(ElementId).collect())
            .collect();
        let pm = PartitionMatroid::from_parts(parts, m.capacities).map_err(|e| err(format!("matroid {i}: {e}")))?;
        matroids.push(pm);
    }
    let constraint = match kind {
        Kind::MatroidIntersection { p } => {
            if matroids.len() != p {
                return Err(err(format!("expected {p} matroids, got {}", matroids.len())));
            }
            Constraint::Matroids(matroids.into())
        }
        _ => {
            if !matroids.is_empty() {
                return Err(err("matching instances take no matroids".into()));
            }
            Constraint::Matching
        }
    };
    let n = match (h.n, &constraint) {
        (Some(n), _) => n,
        (None, Constraint::Matroids(ms)) => ms.iter().map(|m| m.rank_bound()).min().unwrap_or(0),
        (None, Constraint::Matching) => return Err(err("missing vertex count n".into())),
    };
    Ok(Prelude {
        header: InstanceHeader { kind, n, m: 0, constraint },
        oracle: h.oracle,
    })
}

fn parse_text_header(path: &Path, line: usize, text: &str) -> Result<Prelude> {
    let mut it = text.split_whitespace();
    let (Some("graph"), Some(n), None) = (it.next(), it.next(), it.next()) else {
        return Err(parse_err(path, line, "expected `graph <n>` or a JSON header"));
    };
    let n: usize = n
        .parse()
        .map_err(|_| parse_err(path, line, format!("bad vertex count {n:?}")))?;
    Ok(Prelude {
        header: InstanceHeader {
            kind: Kind::Graph,
            n,
            m: 0,
            constraint: Constraint::Matching,
        },
        oracle: OracleSpec {
            family: FamilyKind::Modular,
            cap: None,
        },
    })
}

fn parse_text_edge(path: &Path, line: usize, text: &str) -> Result<ElementLine> {
    let fields: Vec<&str> = text.split_whitespace().collect();
    let [u, v, w] = fields[..] else {
        return Err(parse_err(path, line, "expected `u v w`"));
    };
    let vertex = |s: &str| {
        s.parse::<u32>()
            .map_err(|_| parse_err(path, line, format!("bad vertex {s:?}")))
    };
    let (u, v) = (vertex(u)?, vertex(v)?);
    let w: f64 = w
        .parse()
        .map_err(|_| parse_err(path, line, format!("bad weight {w:?}")))?;
    Ok(ElementLine {
        vertices: vec![u.min(v), u.max(v)],
        weight: Some(w),
        cover: None,
    })
}

/// Reads `reader` line by line, calling `on_element` with each element
/// line's number and content after the header has been parsed.
fn scan(
    path: &Path,
    reader: impl BufRead,
    on_element: &mut dyn FnMut(usize, ElementLine, &Prelude) -> Result<()>,
) -> Result<Prelude> {
    let mut prelude: Option<(Prelude, bool)> = None;
    for (k, line) in reader.lines().enumerate() {
        let lineno = k + 1;
        let line = line.map_err(|e| io_err(path, e))?;
        let text = line.trim();
        if text.is_empty() || text.starts_with('#') {
            continue;
        }
        match &prelude {
            None => {
                let json = text.starts_with('{');
                let p = if json {
                    let h: HeaderLine = serde_json::from_str(text)
                        .map_err(|e| parse_err(path, lineno, format!("bad header: {e}")))?;
                    build_prelude(path, lineno, h)?
                } else {
                    parse_text_header(path, lineno, text)?
                };
                prelude = Some((p, json));
            }
            Some((p, json)) => {
                let el = if *json {
                    serde_json::from_str(text).map_err(|e| parse_err(path, lineno, format!("bad element: {e}")))?
                } else {
                    parse_text_edge(path, lineno, text)?
                };
                on_element(lineno, el, p)?;
            }
        }
    }
    prelude
        .map(|(p, _)| p)
        .ok_or_else(|| parse_err(path, 0, "empty instance file"))
}

fn to_element(id: u32, el: &ElementLine, oracle: &OracleSpec) -> Element {
    let mut e = Element::new(id, el.vertices.iter().copied());
    if oracle.family == FamilyKind::Modular {
        e.given_weight = el.weight;
    }
    e
}

/// Parses an instance file into the instance and its value oracle.
pub fn parse_instance(path: &Path) -> Result<(Instance, ValueOracle)> {
    let file = File::open(path).map_err(|e| io_err(path, e))?;
    parse_reader(path, BufReader::new(file))
}

/// [`parse_instance`] on in-memory text; `path` only labels errors.
pub fn parse_str(path: &Path, text: &str) -> Result<(Instance, ValueOracle)> {
    parse_reader(path, text.as_bytes())
}

fn parse_reader(path: &Path, reader: impl BufRead) -> Result<(Instance, ValueOracle)> {
    let mut elements: Vec<Element> = Vec::new();
    let mut data: Vec<ElementLine> = Vec::new();
    let mut seen: BTreeSet<Vec<u32>> = BTreeSet::new();
    let prelude = scan(path, reader, &mut |lineno, el, p| {
        let id = elements.len() as u32;
        if p.header.kind == Kind::Graph && el.vertices.len() == 2 && el.vertices[0] == el.vertices[1] {
            return Err(parse_err(path, lineno, format!("self-loop at vertex {}", el.vertices[0])));
        }
        let e = to_element(id, &el, &p.oracle);
        if p.header.kind == Kind::Graph && e.vertices.len() != el.vertices.len() {
            return Err(parse_err(path, lineno, "repeated vertex in an edge"));
        }
        p.header
            .validate_element(&e)
            .map_err(|err| parse_err(path, lineno, err.to_string()))?;
        if p.header.kind.is_matching() && !seen.insert(e.vertices.clone()) {
            return Err(parse_err(path, lineno, format!("duplicate edge {:?}", e.vertices)));
        }
        match (p.oracle.family, &el) {
            (FamilyKind::Coverage, ElementLine { cover: None, .. }) => {
                return Err(parse_err(path, lineno, "coverage elements need a cover list"));
            }
            (FamilyKind::Modular | FamilyKind::SaturatedAdditive, ElementLine { weight: None, .. }) => {
                return Err(parse_err(path, lineno, "element needs a weight"));
            }
            (_, ElementLine { weight: Some(w), .. }) if !(w.is_finite() && *w >= 0.0) => {
                return Err(parse_err(path, lineno, format!("weight {w} must be finite and nonnegative")));
            }
            _ => {}
        }
        elements.push(e);
        data.push(el);
        Ok(())
    })?;
    let Prelude { header, oracle } = prelude;
    let matroids = header.matroids().to_vec();
    let family = family_from(&oracle, &data)?;
    let instance = Instance::new(header.kind, header.n, elements, matroids)
        .map_err(|e| parse_err(path, 0, e.to_string()))?;
    let oracle = ValueOracle::new(family, instance.ids());
    Ok((instance, oracle))
}

fn family_from(spec: &OracleSpec, data: &[ElementLine]) -> Result<OracleFamily> {
    let ids = (0..data.len() as u32).map(ElementId);
    let weights = || ids.clone().zip(data.iter().map(|d| d.weight.unwrap_or(0.0)));
    match spec.family {
        FamilyKind::Modular => OracleFamily::modular(weights()),
        FamilyKind::Coverage => Ok(OracleFamily::coverage(
            ids.clone().zip(data.iter().map(|d| d.cover.clone().unwrap_or_default())),
        )),
        FamilyKind::SaturatedAdditive => OracleFamily::saturated_additive(weights(), spec.cap.unwrap_or(0.0)),
    }
}

/// A stream read from disk anew on every pass. Only the header is kept in memory.
#[derive(Debug, Clone)]
pub struct FileSource {
    path: PathBuf,
    header: InstanceHeader,
}

impl FileSource {
    /// Validates the whole file once and builds its oracle.
    pub fn open(path: &Path) -> Result<(FileSource, ValueOracle)> {
        let (instance, oracle) = parse_instance(path)?;
        let source = FileSource {
            path: path.to_path_buf(),
            header: instance.header().clone(),
        };
        Ok((source, oracle))
    }

    pub fn path(&self) -> &Path {
        &self.path
    }
}

impl StreamSource for FileSource {
    fn header(&self) -> &InstanceHeader {
        &self.header
    }

    fn replay(&self, visit: &mut dyn FnMut(Element) -> Result<()>) -> Result<()> {
        let file = File::open(&self.path).map_err(|e| io_err(&self.path, e))?;
        let mut next_id = 0u32;
        scan(&self.path, BufReader::new(file), &mut |_, el, p| {
            let e = to_element(next_id, &el, &p.oracle);
            next_id += 1;
            visit(e)
        })?;
        if next_id as usize != self.header.m {
            return Err(Error::input(format!(
                "{} changed between passes: {} elements, expected {}",
                self.path.display(),
                next_id,
                self.header.m
            )));
        }
        Ok(())
    }
}

fn to_json<T: Serialize>(v: &T) -> Result<String> {
    serde_json::to_string(v).map_err(|e| Error::invariant(format!("serialization failed: {e}")))
}

/// Serializes an instance. Graphs with a modular oracle use the edge list,
/// everything else the JSON-lines format.
pub fn write_instance(instance: &Instance, family: &OracleFamily) -> Result<String> {
    if instance.elements().iter().enumerate().any(|(pos, e)| e.id.index() != pos) {
        return Err(Error::input("element ids must equal stream positions to be written"));
    }
    let mut out = String::new();
    if instance.kind() == Kind::Graph {
        if let OracleFamily::Modular { .. } = family {
            out.push_str(&format!("graph {}\n", instance.n()));
            for e in instance.elements() {
                let w = family.modular_weight(e.id).unwrap_or(0.0);
                out.push_str(&format!("{} {} {}\n", e.vertices[0], e.vertices[1], w));
            }
            return Ok(out);
        }
    }
    let (kind, p) = match instance.kind() {
        Kind::Graph => (KindName::Graph, None),
        Kind::Hypergraph { p } => (KindName::Hypergraph, Some(p)),
        Kind::MatroidIntersection { p } => (KindName::MatroidIntersection, Some(p)),
    };
    let (oracle, weights, covers) = match family {
        OracleFamily::Modular { weights } => (
            OracleSpec { family: FamilyKind::Modular, cap: None },
            Some(weights),
            None,
        ),
        OracleFamily::SaturatedAdditive { weights, cap } => (
            OracleSpec { family: FamilyKind::SaturatedAdditive, cap: Some(*cap) },
            Some(weights),
            None,
        ),
        OracleFamily::Coverage { sets, .. } => (
            OracleSpec { family: FamilyKind::Coverage, cap: None },
            None,
            Some(sets),
        ),
    };
    let header = HeaderLine {
        kind,
        n: Some(instance.n()),
        p,
        oracle,
        matroids: instance
            .header()
            .matroids()
            .iter()
            .map(|m| MatroidSpec {
                parts: m.parts().iter().map(|p| p.iter().map(|e| e.0).collect()).collect(),
                capacities: m.capacities().to_vec(),
            })
            .collect(),
    };
    out.push_str(&to_json(&header)?);
    out.push('\n');
    for (pos, e) in instance.elements().iter().enumerate() {
        let line = ElementLine {
            vertices: e.vertices.clone(),
            weight: weights.map(|w| w.get(pos).copied().unwrap_or(0.0)),
            cover: covers.map(|c| c.get(pos).cloned().unwrap_or_default()),
        };
        out.push_str(&to_json(&line)?);
        out.push('\n');
    }
    Ok(out)
}
