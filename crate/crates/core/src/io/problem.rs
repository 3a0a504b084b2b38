//! Line-oriented problem files.
//!
//! ```text
//! gswseg-problem 1
//! sites <n> bins <D>
//! histograms
//! <n rows of D counts>
//! edges <m>
//! <m rows: i j beta>
//! labels                  (optional ground truth, one per line)
//! footprint <W> <H>       (optional, H rows of W site ids)
//! ```
//!
//! Blank lines and lines starting with `#` are ignored.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::graph::SiteGraph;
use crate::likelihood::Observations;

pub const FORMAT_TAG: &str = "gswseg-problem";
pub const FORMAT_VERSION: u32 = 1;

/// Pixel raster mapping every pixel to the site that covers it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Footprint {
    pub width: usize,
    pub height: usize,
    pub sites: Vec<u32>,
}

impl Footprint {
    pub fn site_at(&self, x: usize, y: usize) -> usize {
        self.sites[y * self.width + x] as usize
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProblemFile {
    pub graph: SiteGraph,
    pub observations: Observations,
    pub ground_truth: Option<Vec<usize>>,
    pub footprint: Option<Footprint>,
}

impl ProblemFile {
    pub fn n_sites(&self) -> usize {
        self.graph.n_sites()
    }

    pub fn to_text(&self) -> String {
        let obs = &self.observations;
        let mut out = String::new();
        let _ = writeln!(out, "{FORMAT_TAG} {FORMAT_VERSION}");
        let _ = writeln!(out, "sites {} bins {}", obs.n_sites(), obs.dims());
        out.push_str("histograms\n");
        for site in 0..obs.n_sites() {
            push_row(&mut out, obs.row(site).iter());
        }
        let _ = writeln!(out, "edges {}", self.graph.edges().len());
        for e in self.graph.edges() {
            let _ = writeln!(out, "{} {} {}", e.i, e.j, e.beta);
        }
        if let Some(labels) = &self.ground_truth {
            out.push_str("labels\n");
            for l in labels {
                let _ = writeln!(out, "{l}");
            }
        }
        if let Some(fp) = &self.footprint {
            let _ = writeln!(out, "footprint {} {}", fp.width, fp.height);
            for row in fp.sites.chunks(fp.width) {
                push_row(&mut out, row.iter());
            }
        }
        out
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }
}

fn push_row<T: std::fmt::Display>(out: &mut String, row: impl Iterator<Item = T>) {
    let mut first = true;
    for v in row {
        if !first {
            out.push(' ');
        }
        first = false;
        let _ = write!(out, "{v}");
    }
    out.push('\n');
}

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
    last: usize,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str) -> Self {
        Lines {
            inner: text.lines().enumerate(),
            last: 0,
        }
    }

    /// Next meaningful line as (1-based number, trimmed content).
    fn next(&mut self) -> Option<(usize, &'a str)> {
        for (idx, raw) in self.inner.by_ref() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            self.last = idx + 1;
            return Some((idx + 1, line));
        }
        None
    }

    fn expect(&mut self, what: &str) -> Result<(usize, &'a str)> {
        let after = self.last;
        self.next().ok_or_else(|| {
            Error::parse(
                after + 1,
                format!("unexpected end of file, expected {what}"),
            )
        })
    }
}

fn field<T: std::str::FromStr>(line: usize, token: Option<&str>, what: &str) -> Result<T> {
    let token = token.ok_or_else(|| Error::parse(line, format!("missing {what}")))?;
    token
        .parse()
        .map_err(|_| Error::parse(line, format!("invalid {what} '{token}'")))
}

fn keyword(line: usize, token: Option<&str>, expected: &str) -> Result<()> {
    match token {
        Some(t) if t == expected => Ok(()),
        other => Err(Error::parse(
            line,
            format!("expected '{expected}', found '{}'", other.unwrap_or("")),
        )),
    }
}

fn no_trailing<'a>(line: usize, mut tokens: impl Iterator<Item = &'a str>) -> Result<()> {
    match tokens.next() {
        Some(t) => Err(Error::parse(
            line,
            format!("unexpected trailing token '{t}'"),
        )),
        None => Ok(()),
    }
}

pub fn parse_problem(text: &str) -> Result<ProblemFile> {
    let mut lines = Lines::new(text);

    let (ln, header) = lines.expect("header")?;
    let mut tok = header.split_whitespace();
    keyword(ln, tok.next(), FORMAT_TAG)?;
    let version: u32 = field(ln, tok.next(), "format version")?;
    if version != FORMAT_VERSION {
        return Err(Error::parse(
            ln,
            format!("unsupported format version {version}"),
        ));
    }
    no_trailing(ln, tok)?;

    let (ln, dims) = lines.expect("'sites <n> bins <D>'")?;
    let mut tok = dims.split_whitespace();
    keyword(ln, tok.next(), "sites")?;
    let n: usize = field(ln, tok.next(), "site count")?;
    keyword(ln, tok.next(), "bins")?;
    let d: usize = field(ln, tok.next(), "bin count")?;
    no_trailing(ln, tok)?;
    if d == 0 {
        return Err(Error::parse(ln, "bin count must be positive"));
    }

    let (ln, section) = lines.expect("'histograms'")?;
    keyword(ln, Some(section), "histograms")?;
    let mut rows = Vec::with_capacity(n);
    for site in 0..n {
        let (ln, row) = lines.expect("histogram row")?;
        let values = row
            .split_whitespace()
            .map(|t| field::<u32>(ln, Some(t), "count"))
            .collect::<Result<Vec<_>>>()?;
        if values.len() != d {
            return Err(Error::parse(
                ln,
                format!("site {site} has {} bins, expected {d}", values.len()),
            ));
        }
        if values.iter().all(|&c| c == 0) {
            return Err(Error::parse(
                ln,
                format!("site {site} has an empty histogram"),
            ));
        }
        rows.push(values);
    }
    let observations = Observations::new(d, rows)?;

    let (ln, edges_line) = lines.expect("'edges <m>'")?;
    let mut tok = edges_line.split_whitespace();
    keyword(ln, tok.next(), "edges")?;
    let m: usize = field(ln, tok.next(), "edge count")?;
    no_trailing(ln, tok)?;
    let mut edges = Vec::with_capacity(m);
    let mut seen = std::collections::HashSet::with_capacity(m);
    for _ in 0..m {
        let (ln, row) = lines.expect("edge row")?;
        let mut tok = row.split_whitespace();
        let i: usize = field(ln, tok.next(), "edge endpoint")?;
        let j: usize = field(ln, tok.next(), "edge endpoint")?;
        let beta: f64 = field(ln, tok.next(), "coupling")?;
        no_trailing(ln, tok)?;
        if i >= n || j >= n {
            return Err(Error::parse(
                ln,
                format!("edge ({i}, {j}) out of range for {n} sites"),
            ));
        }
        if i == j {
            return Err(Error::parse(ln, format!("self-loop on site {i}")));
        }
        if !(beta.is_finite() && beta > 0.0) {
            return Err(Error::parse(
                ln,
                format!("coupling {beta} must be finite and > 0"),
            ));
        }
        if !seen.insert((i.min(j), i.max(j))) {
            return Err(Error::parse(ln, format!("duplicate edge ({i}, {j})")));
        }
        edges.push((i, j, beta));
    }
    let graph = SiteGraph::new(n, edges)?;

    let mut ground_truth = None;
    let mut footprint = None;
    while let Some((ln, line)) = lines.next() {
        let mut tok = line.split_whitespace();
        match tok.next() {
            Some("labels") if ground_truth.is_none() => {
                no_trailing(ln, tok)?;
                let mut labels = Vec::with_capacity(n);
                for _ in 0..n {
                    let (ln, row) = lines.expect("label")?;
                    let mut tok = row.split_whitespace();
                    labels.push(field::<usize>(ln, tok.next(), "label")?);
                    no_trailing(ln, tok)?;
                }
                ground_truth = Some(labels);
            }
            Some("footprint") if footprint.is_none() => {
                let width: usize = field(ln, tok.next(), "footprint width")?;
                let height: usize = field(ln, tok.next(), "footprint height")?;
                no_trailing(ln, tok)?;
                if width == 0 || height == 0 {
                    return Err(Error::parse(ln, "footprint dimensions must be positive"));
                }
                let mut sites = Vec::with_capacity(width * height);
                for _ in 0..height {
                    let (ln, row) = lines.expect("footprint row")?;
                    let before = sites.len();
                    for t in row.split_whitespace() {
                        let s: u32 = field(ln, Some(t), "site id")?;
                        if s as usize >= n {
                            return Err(Error::parse(ln, format!("site id {s} out of range")));
                        }
                        sites.push(s);
                    }
                    if sites.len() - before != width {
                        return Err(Error::parse(
                            ln,
                            format!(
                                "footprint row has {} entries, expected {width}",
                                sites.len() - before
                            ),
                        ));
                    }
                }
                footprint = Some(Footprint {
                    width,
                    height,
                    sites,
                });
            }
            Some(other) => {
                return Err(Error::parse(ln, format!("unexpected section '{other}'")));
            }
            None => unreachable!("blank lines are skipped"),
        }
    }

    Ok(ProblemFile {
        graph,
        observations,
        ground_truth,
        footprint,
    })
}

/// Reads and validates a problem file.
pub fn load_problem(path: impl AsRef<Path>) -> Result<ProblemFile> {
    let text = std::fs::read_to_string(path)?;
    parse_problem(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str =
        "gswseg-problem 1\nsites 2 bins 2\nhistograms\n1 0\n0 3\nedges 1\n0 1 0.02\n";

    #[test]
    fn loads_minimal() {
        let p = parse_problem(MINIMAL).unwrap();
        assert_eq!(p.graph.edges().len(), 1);
        assert_eq!(p.observations.row(1), &[0, 3]);
        assert!(p.ground_truth.is_none());
        assert_eq!(parse_problem(&p.to_text()).unwrap(), p);
    }

    fn error_line(text: &str) -> usize {
        match parse_problem(text) {
            Err(Error::Parse { line, .. }) => line,
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn reports_offending_line() {
        let dup = MINIMAL.replace("edges 1\n0 1 0.02\n", "edges 2\n0 1 0.02\n1 0 0.5\n");
        assert_eq!(error_line(&dup), 8);
        let range = MINIMAL.replace("0 1 0.02", "0 2 0.02");
        assert_eq!(error_line(&range), 7);
        let short = MINIMAL.replace("0 3", "0");
        assert_eq!(error_line(&short), 5);
        let empty = MINIMAL.replace("0 3", "0 0");
        assert_eq!(error_line(&empty), 5);
        assert_eq!(error_line("gswseg-problem 2\n"), 1);
        assert_eq!(
            error_line(&MINIMAL.replace("edges 1\n0 1 0.02\n", "edges 1\n")),
            7
        );
        let bad_beta = MINIMAL.replace("0.02", "-1");
        assert_eq!(error_line(&bad_beta), 7);
        let extra = format!("{MINIMAL}junk\n");
        assert_eq!(error_line(&extra), 8);
    }

    #[test]
    fn optional_sections() {
        let text = format!("{MINIMAL}labels\n4\n4\nfootprint 3 1\n0 0 1\n");
        let p = parse_problem(&text).unwrap();
        assert_eq!(p.ground_truth.as_deref(), Some(&[4usize, 4][..]));
        assert_eq!(p.footprint.as_ref().unwrap().site_at(2, 0), 1);
        assert_eq!(parse_problem(&p.to_text()).unwrap(), p);
        let bad = format!("{MINIMAL}footprint 2 1\n0 5\n");
        assert_eq!(error_line(&bad), 9);
    }
}
