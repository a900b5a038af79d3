//! Line-oriented text formats for networks and cascade sets.
//!
//! Network files start with `netinf-network v1 <kind> <N>` followed by one
//! `j i alpha` line per nonzero entry. Cascade files start with
//! `netinf-cascades v1 <N> <T>` followed by one cascade per line written as
//! comma-separated `node:time` pairs, e.g. `12:0,5:0.8137,99:2.44`.
//!
//! Blank lines and lines starting with `#` are ignored. Numbers are written
//! in the shortest form that parses back to the same `f64`, so a write/read
//! round trip is exact.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use crate::cascade::{Cascade, CascadeSet, Event};
use crate::error::{Error, Result};
use crate::network::{ModelKind, Network};

pub const NETWORK_MAGIC: &str = "netinf-network";
pub const CASCADE_MAGIC: &str = "netinf-cascades";
pub const FORMAT_VERSION: &str = "v1";

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        line,
        msg: msg.into(),
    }
}

/// Non-comment lines with their 1-based line numbers.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(k, l)| (k + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

fn field<T: FromStr>(line: usize, what: &str, s: &str) -> Result<T> {
    s.parse()
        .map_err(|_| parse_err(line, format!("invalid {what} `{s}`")))
}

fn header<'a>(
    lines: &mut impl Iterator<Item = (usize, &'a str)>,
    magic: &str,
    arity: usize,
) -> Result<(usize, Vec<&'a str>)> {
    let (no, line) = lines
        .next()
        .ok_or_else(|| parse_err(1, format!("missing `{magic}` header")))?;
    let parts: Vec<&str> = line.split_whitespace().collect();
    if parts.first() != Some(&magic) {
        return Err(parse_err(no, format!("expected `{magic}` header")));
    }
    if parts.get(1) != Some(&FORMAT_VERSION) {
        return Err(parse_err(
            no,
            format!("unsupported version, expected {FORMAT_VERSION}"),
        ));
    }
    if parts.len() != arity + 2 {
        return Err(parse_err(
            no,
            format!("header needs {arity} fields after the version"),
        ));
    }
    Ok((no, parts[2..].to_vec()))
}

fn write_comments(out: &mut String, comments: &[String]) {
    for c in comments {
        for l in c.lines() {
            let _ = writeln!(out, "# {l}");
        }
    }
}

/// Serialises `net`; each entry of `comments` becomes a `#` line after the
/// header.
pub fn format_network(net: &Network, comments: &[String]) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{NETWORK_MAGIC} {FORMAT_VERSION} {} {}",
        net.kind(),
        net.num_nodes()
    );
    write_comments(&mut out, comments);
    for (j, i, a) in net.edges() {
        let _ = writeln!(out, "{j} {i} {a}");
    }
    out
}

pub fn parse_network(text: &str) -> Result<Network> {
    let mut lines = content_lines(text);
    let (no, fields) = header(&mut lines, NETWORK_MAGIC, 2)?;
    let kind: ModelKind = fields[0]
        .parse()
        .map_err(|_| parse_err(no, format!("unknown model kind `{}`", fields[0])))?;
    let n: usize = field(no, "node count", fields[1])?;
    let mut seen = std::collections::HashSet::new();
    let mut edges = Vec::new();
    for (no, line) in lines {
        let parts: Vec<&str> = line.split_whitespace().collect();
        let [j, i, a] = parts[..] else {
            return Err(parse_err(no, "expected `j i alpha`"));
        };
        let j: usize = field(no, "source id", j)?;
        let i: usize = field(no, "target id", i)?;
        let a: f64 = field(no, "parameter", a)?;
        if j >= n || i >= n {
            return Err(parse_err(
                no,
                format!("edge ({j}, {i}) outside a {n}-node network"),
            ));
        }
        if !seen.insert((j, i)) {
            return Err(parse_err(no, format!("edge ({j}, {i}) listed twice")));
        }
        edges.push((j, i, a));
    }
    Network::from_edges(kind, n, edges)
}

/// Serialises `cs`; each entry of `comments` becomes a `#` line after the
/// header.
pub fn format_cascades(cs: &CascadeSet, comments: &[String]) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{CASCADE_MAGIC} {FORMAT_VERSION} {} {}",
        cs.num_nodes(),
        cs.window()
    );
    write_comments(&mut out, comments);
    for c in cs {
        for (k, e) in c.events().iter().enumerate() {
            if k > 0 {
                out.push(',');
            }
            let _ = write!(out, "{}:{}", e.node, e.time);
        }
        out.push('\n');
    }
    out
}

/// Parses a cascade file. Times within a line are shifted so the earliest
/// infection is at 0, so externally prepared data with absolute timestamps
/// is accepted.
pub fn parse_cascades(text: &str) -> Result<CascadeSet> {
    let mut lines = content_lines(text);
    let (no, fields) = header(&mut lines, CASCADE_MAGIC, 2)?;
    let n: usize = field(no, "node count", fields[0])?;
    let window: f64 = field(no, "window", fields[1])?;
    if !(window > 0.0) {
        return Err(parse_err(no, format!("window must be positive, got {window}")));
    }
    let mut cascades = Vec::new();
    for (no, line) in lines {
        let mut events = Vec::new();
        for pair in line.split(',') {
            let (node, time) = pair
                .trim()
                .split_once(':')
                .ok_or_else(|| parse_err(no, format!("expected `node:time`, got `{pair}`")))?;
            let node: usize = field(no, "node id", node.trim())?;
            let time: f64 = field(no, "time", time.trim())?;
            if node >= n {
                return Err(parse_err(no, format!("node {node} outside a {n}-node universe")));
            }
            events.push(Event::new(node, time));
        }
        let cascade = Cascade::normalized(events).map_err(|e| parse_err(no, e.to_string()))?;
        if cascade.duration() > window {
            return Err(parse_err(
                no,
                format!("cascade lasts {} beyond the window {window}", cascade.duration()),
            ));
        }
        cascades.push(cascade);
    }
    CascadeSet::new(n, window, cascades)
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn read_network(path: impl AsRef<Path>) -> Result<Network> {
    parse_network(&read(path.as_ref())?)
}

pub fn write_network(path: impl AsRef<Path>, net: &Network, comments: &[String]) -> Result<()> {
    write(path.as_ref(), &format_network(net, comments))
}

pub fn read_cascades(path: impl AsRef<Path>) -> Result<CascadeSet> {
    parse_cascades(&read(path.as_ref())?)
}

pub fn write_cascades(path: impl AsRef<Path>, cs: &CascadeSet, comments: &[String]) -> Result<()> {
    write(path.as_ref(), &format_cascades(cs, comments))
}
