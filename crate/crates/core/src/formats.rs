//! Line-oriented text formats for every object the tools exchange.
//!
//! Every file is self-describing: a header `confstar <kind> v1`, a body of
//! `key value...` lines, and a closing `end`. Blank lines and lines starting
//! with `#` are ignored. Floats are written with seventeen significant
//! digits, so every normal `f64` round-trips bit for bit. Configurations are
//! rendered as ascending comma-separated site lists, with `-` for the empty
//! one; multisets repeat sites. Writers emit entries in (cardinality, mask)
//! order; readers accept any order but reject duplicates.
//!
//! Site labels are single whitespace-free tokens.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::Path;

use num::complex::Complex64;

use crate::algebra::{OneParticleFunction, RankedFunction};
use crate::error::Error;
use crate::ground::{enumerate_in_mask, Configuration, GroundSpace, MultiConfiguration, Site};
use crate::measures::{FiniteConfigMeasure, ProcessLaw};
use crate::sampler::{GibbsModel, PairPotential};
use crate::transforms::ObservableFunction;
use crate::Result;

fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn render_config(cfg: Configuration) -> String {
    if cfg.is_empty() {
        return "-".to_string();
    }
    cfg.iter_sites()
        .map(|s| s.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

fn render_multiset(m: &MultiConfiguration) -> String {
    if m.is_empty() {
        return "-".to_string();
    }
    m.points()
        .iter()
        .map(|s| s.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

fn err(path: &str, line: usize, message: impl Into<String>) -> Error {
    Error::format(path, line, message)
}

fn parse_usize(path: &str, no: usize, token: &str, what: &str) -> Result<usize> {
    token
        .parse()
        .map_err(|_| err(path, no, format!("bad {what} {token:?}")))
}

fn parse_f64(path: &str, no: usize, token: &str, what: &str) -> Result<f64> {
    token
        .parse()
        .map_err(|_| err(path, no, format!("bad {what} {token:?}")))
}

fn parse_complex(path: &str, no: usize, re: &str, im: &str) -> Result<Complex64> {
    Ok(Complex64::new(
        parse_f64(path, no, re, "value")?,
        parse_f64(path, no, im, "value")?,
    ))
}

fn parse_config(path: &str, no: usize, token: &str, sites: usize) -> Result<Configuration> {
    if token == "-" {
        return Ok(Configuration::EMPTY);
    }
    let mut mask = 0u64;
    let mut last: Option<usize> = None;
    for part in token.split(',') {
        let site = parse_usize(path, no, part, "site")?;
        if site >= sites {
            return Err(err(path, no, format!("site {site} outside a {sites}-site space")));
        }
        if last.is_some_and(|l| site <= l) {
            return Err(err(path, no, "sites must be strictly ascending"));
        }
        last = Some(site);
        mask |= 1 << site;
    }
    Ok(Configuration(mask))
}

fn parse_multiset(
    path: &str,
    no: usize,
    token: &str,
    sites: usize,
) -> Result<MultiConfiguration> {
    if token == "-" {
        return Ok(MultiConfiguration::new());
    }
    let mut points = Vec::new();
    let mut last: Option<usize> = None;
    for part in token.split(',') {
        let site = parse_usize(path, no, part, "site")?;
        if site >= sites {
            return Err(err(path, no, format!("site {site} outside a {sites}-site space")));
        }
        if last.is_some_and(|l| site < l) {
            return Err(err(path, no, "sites must be ascending"));
        }
        last = Some(site);
        points.push(site);
    }
    Ok(MultiConfiguration::from_points(&points))
}

/// Cursor over the meaningful lines of a file.
struct Reader<'a> {
    path: &'a str,
    lines: Vec<(usize, &'a str)>,
    next: usize,
}

impl<'a> Reader<'a> {
    fn new(path: &'a str, text: &'a str) -> Self {
        let lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
            .collect();
        Reader {
            path,
            lines,
            next: 0,
        }
    }

    fn take(&mut self) -> Result<(usize, &'a str)> {
        let item = self.lines.get(self.next).copied().ok_or_else(|| {
            err(
                self.path,
                self.lines.last().map_or(0, |(n, _)| *n),
                "unexpected end of file",
            )
        })?;
        self.next += 1;
        Ok(item)
    }

    fn expect_header(&mut self, kind: &str) -> Result<()> {
        let (no, line) = self.take()?;
        let expected = format!("confstar {kind} v1");
        if line != expected {
            return Err(err(
                self.path,
                no,
                format!("expected header {expected:?}, found {line:?}"),
            ));
        }
        Ok(())
    }

    /// Consumes the body up to `end`, handing each line's fields to `on_line`.
    fn body(&mut self, mut on_line: impl FnMut(usize, &[&'a str]) -> Result<()>) -> Result<()> {
        loop {
            let (no, line) = self.take()?;
            if line == "end" {
                if self.next != self.lines.len() {
                    let (extra, _) = self.lines[self.next];
                    return Err(err(self.path, extra, "content after end"));
                }
                return Ok(());
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            on_line(no, &fields)?;
        }
    }
}

// --- ground spaces ---

pub fn render_ground(space: &GroundSpace) -> String {
    let mut out = String::from("confstar ground v1\n");
    let _ = writeln!(out, "sites {}", space.len());
    for (i, site) in space.sites().iter().enumerate() {
        let mut line = format!("site {i} {} {}", site.label, fmt_f64(site.weight));
        for c in &site.coords {
            let _ = write!(line, " {}", fmt_f64(*c));
        }
        out.push_str(&line);
        out.push('\n');
    }
    for (name, mask) in space.regions() {
        let _ = writeln!(out, "region {name} {}", render_config(Configuration(*mask)));
    }
    out.push_str("end\n");
    out
}

pub fn parse_ground(path: &str, text: &str) -> Result<GroundSpace> {
    let mut r = Reader::new(path, text);
    r.expect_header("ground")?;
    let mut count: Option<usize> = None;
    let mut sites: Vec<Option<Site>> = Vec::new();
    let mut regions: Vec<(String, Configuration)> = Vec::new();
    r.body(|no, fields| match fields {
        ["sites", n] => {
            let n = parse_usize(path, no, n, "site count")?;
            count = Some(n);
            sites = vec![None; n];
            Ok(())
        }
        ["site", index, label, weight, coords @ ..] => {
            let n = count.ok_or_else(|| err(path, no, "site before sites line"))?;
            let index = parse_usize(path, no, index, "site index")?;
            if index >= n {
                return Err(err(path, no, format!("site index {index} outside 0..{n}")));
            }
            if sites[index].is_some() {
                return Err(err(path, no, format!("duplicate site {index}")));
            }
            let mut site = Site::new(*label, parse_f64(path, no, weight, "weight")?);
            for c in coords {
                site.coords.push(parse_f64(path, no, c, "coordinate")?);
            }
            sites[index] = Some(site);
            Ok(())
        }
        ["region", name, token] => {
            let n = count.ok_or_else(|| err(path, no, "region before sites line"))?;
            regions.push((name.to_string(), parse_config(path, no, token, n)?));
            Ok(())
        }
        _ => Err(err(path, no, format!("unrecognized line {:?}", fields.join(" ")))),
    })?;
    let count = count.ok_or_else(|| err(path, 0, "missing sites line"))?;
    let mut resolved = Vec::with_capacity(count);
    for (i, site) in sites.into_iter().enumerate() {
        resolved.push(site.ok_or_else(|| err(path, 0, format!("missing site {i}")))?);
    }
    let mut space = GroundSpace::new(resolved)?;
    for (name, cfg) in regions {
        space.add_region(name, cfg.mask())?;
    }
    Ok(space)
}

// --- ranked functions ---

pub fn render_ranked(g: &RankedFunction<Complex64>) -> String {
    let mut out = String::from("confstar ranked v1\n");
    let _ = writeln!(out, "sites {}", g.sites());
    let _ = writeln!(out, "maxrank {}", g.max_rank());
    if g.has_multiset_tables() {
        out.push_str("multiset\n");
    }
    for (cfg, v) in g.simple_entries() {
        let _ = writeln!(
            out,
            "entry {} {} {}",
            render_config(cfg),
            fmt_f64(v.re),
            fmt_f64(v.im)
        );
    }
    for (m, v) in g.multi_entries() {
        let _ = writeln!(
            out,
            "mentry {} {} {}",
            render_multiset(m),
            fmt_f64(v.re),
            fmt_f64(v.im)
        );
    }
    out.push_str("end\n");
    out
}

pub fn parse_ranked(path: &str, text: &str) -> Result<RankedFunction<Complex64>> {
    let mut r = Reader::new(path, text);
    r.expect_header("ranked")?;
    let mut sites: Option<usize> = None;
    let mut max_rank: Option<usize> = None;
    let mut multiset = false;
    let mut simple: Vec<(Configuration, Complex64)> = Vec::new();
    let mut multi: Vec<(MultiConfiguration, Complex64)> = Vec::new();
    let mut seen_simple: BTreeSet<u64> = BTreeSet::new();
    let mut seen_multi: BTreeSet<MultiConfiguration> = BTreeSet::new();
    r.body(|no, fields| match fields {
        ["sites", n] => {
            sites = Some(parse_usize(path, no, n, "site count")?);
            Ok(())
        }
        ["maxrank", k] => {
            max_rank = Some(parse_usize(path, no, k, "max rank")?);
            Ok(())
        }
        ["multiset"] => {
            multiset = true;
            Ok(())
        }
        ["entry", token, re, im] => {
            let n = sites.ok_or_else(|| err(path, no, "entry before sites line"))?;
            let cfg = parse_config(path, no, token, n)?;
            if !seen_simple.insert(cfg.mask()) {
                return Err(err(path, no, format!("duplicate entry {}", render_config(cfg))));
            }
            simple.push((cfg, parse_complex(path, no, re, im)?));
            Ok(())
        }
        ["mentry", token, re, im] => {
            let n = sites.ok_or_else(|| err(path, no, "mentry before sites line"))?;
            let m = parse_multiset(path, no, token, n)?;
            if m.is_simple() {
                return Err(err(path, no, "simple configuration written as mentry"));
            }
            if !seen_multi.insert(m.clone()) {
                return Err(err(
                    path,
                    no,
                    format!("duplicate mentry {}", render_multiset(&m)),
                ));
            }
            multi.push((m, parse_complex(path, no, re, im)?));
            Ok(())
        }
        _ => Err(err(path, no, format!("unrecognized line {:?}", fields.join(" ")))),
    })?;
    let sites = sites.ok_or_else(|| err(path, 0, "missing sites line"))?;
    let top_rank = simple
        .iter()
        .map(|(c, _)| c.len())
        .chain(multi.iter().map(|(m, _)| m.total_points()))
        .max()
        .unwrap_or(0);
    let max_rank = max_rank.unwrap_or(top_rank);
    if top_rank > max_rank {
        return Err(err(path, 0, "entry rank above declared maxrank"));
    }
    let mut g = RankedFunction::zero(sites, max_rank);
    if multiset || !multi.is_empty() {
        g = g.into_multiset_mode();
    }
    for (cfg, v) in simple {
        g.set(cfg, v);
    }
    for (m, v) in multi {
        g.set_multi(m, v);
    }
    Ok(g)
}

// --- one-particle functions ---

pub fn render_sitefn(f: &OneParticleFunction<Complex64>) -> String {
    let mut out = String::from("confstar sitefn v1\n");
    let _ = writeln!(out, "sites {}", f.sites());
    for (i, v) in f.values().iter().enumerate() {
        let _ = writeln!(out, "value {i} {} {}", fmt_f64(v.re), fmt_f64(v.im));
    }
    out.push_str("end\n");
    out
}

pub fn parse_sitefn(path: &str, text: &str) -> Result<OneParticleFunction<Complex64>> {
    let mut r = Reader::new(path, text);
    r.expect_header("sitefn")?;
    let mut sites: Option<usize> = None;
    let mut values: Vec<Option<Complex64>> = Vec::new();
    r.body(|no, fields| match fields {
        ["sites", n] => {
            let n = parse_usize(path, no, n, "site count")?;
            sites = Some(n);
            values = vec![None; n];
            Ok(())
        }
        ["value", index, re, im] => {
            let n = sites.ok_or_else(|| err(path, no, "value before sites line"))?;
            let index = parse_usize(path, no, index, "site index")?;
            if index >= n {
                return Err(err(path, no, format!("site index {index} outside 0..{n}")));
            }
            if values[index].is_some() {
                return Err(err(path, no, format!("duplicate value for site {index}")));
            }
            values[index] = Some(parse_complex(path, no, re, im)?);
            Ok(())
        }
        _ => Err(err(path, no, format!("unrecognized line {:?}", fields.join(" ")))),
    })?;
    sites.ok_or_else(|| err(path, 0, "missing sites line"))?;
    let mut resolved = Vec::with_capacity(values.len());
    for (i, v) in values.into_iter().enumerate() {
        resolved.push(v.ok_or_else(|| err(path, 0, format!("missing value for site {i}")))?);
    }
    Ok(OneParticleFunction::new(resolved))
}

// --- observables ---

pub fn render_observable(f: &ObservableFunction<Complex64>) -> String {
    let mut out = String::from("confstar observable v1\n");
    let _ = writeln!(out, "sites {}", f.sites());
    for cfg in enumerate_in_mask(full_mask(f.sites()), f.sites()) {
        let v = f.value(cfg);
        let _ = writeln!(
            out,
            "value {} {} {}",
            render_config(cfg),
            fmt_f64(v.re),
            fmt_f64(v.im)
        );
    }
    out.push_str("end\n");
    out
}

pub fn parse_observable(path: &str, text: &str) -> Result<ObservableFunction<Complex64>> {
    let mut r = Reader::new(path, text);
    r.expect_header("observable")?;
    let mut sites: Option<usize> = None;
    let mut values: Vec<Option<Complex64>> = Vec::new();
    r.body(|no, fields| match fields {
        ["sites", n] => {
            let n = parse_usize(path, no, n, "site count")?;
            if n > crate::DENSE_SITE_LIMIT {
                return Err(err(path, no, format!("{n} sites exceed the dense table limit")));
            }
            sites = Some(n);
            values = vec![None; 1 << n];
            Ok(())
        }
        ["value", token, re, im] => {
            let n = sites.ok_or_else(|| err(path, no, "value before sites line"))?;
            let cfg = parse_config(path, no, token, n)?;
            let slot = &mut values[cfg.mask() as usize];
            if slot.is_some() {
                return Err(err(path, no, format!("duplicate value {}", render_config(cfg))));
            }
            *slot = Some(parse_complex(path, no, re, im)?);
            Ok(())
        }
        _ => Err(err(path, no, format!("unrecognized line {:?}", fields.join(" ")))),
    })?;
    let sites = sites.ok_or_else(|| err(path, 0, "missing sites line"))?;
    let resolved = resolve_dense(path, values)?;
    ObservableFunction::new(sites, resolved)
}

// --- measures and laws ---

fn render_dense_real(kind: &str, sites: usize, value_of: impl Fn(Configuration) -> f64) -> String {
    let mut out = format!("confstar {kind} v1\n");
    let _ = writeln!(out, "sites {sites}");
    for cfg in enumerate_in_mask(full_mask(sites), sites) {
        let _ = writeln!(out, "mass {} {}", render_config(cfg), fmt_f64(value_of(cfg)));
    }
    out.push_str("end\n");
    out
}

pub fn render_measure(mu: &FiniteConfigMeasure<f64>) -> String {
    render_dense_real("measure", mu.sites(), |cfg| mu.value(cfg))
}

pub fn parse_measure(path: &str, text: &str) -> Result<FiniteConfigMeasure<f64>> {
    let (sites, values) = parse_dense_real(path, text, "measure")?;
    FiniteConfigMeasure::from_entries(sites, values)
}

pub fn render_law(law: &ProcessLaw<f64>) -> String {
    render_dense_real("law", law.sites(), |cfg| law.value(cfg))
}

/// Reads a law table and validates it; an ill-formed file is a format
/// error, a well-formed table that is not a probability law is an
/// `InvalidLaw` verdict.
pub fn parse_law(path: &str, text: &str) -> Result<ProcessLaw<f64>> {
    let (sites, values) = parse_dense_real(path, text, "law")?;
    ProcessLaw::new(FiniteConfigMeasure::from_entries(sites, values)?)
}

fn parse_dense_real(path: &str, text: &str, kind: &str) -> Result<(usize, Vec<f64>)> {
    let mut r = Reader::new(path, text);
    r.expect_header(kind)?;
    let mut sites: Option<usize> = None;
    let mut values: Vec<Option<f64>> = Vec::new();
    r.body(|no, fields| match fields {
        ["sites", n] => {
            let n = parse_usize(path, no, n, "site count")?;
            if n > crate::DENSE_SITE_LIMIT {
                return Err(err(path, no, format!("{n} sites exceed the dense table limit")));
            }
            sites = Some(n);
            values = vec![None; 1 << n];
            Ok(())
        }
        ["mass", token, v] => {
            let n = sites.ok_or_else(|| err(path, no, "mass before sites line"))?;
            let cfg = parse_config(path, no, token, n)?;
            let slot = &mut values[cfg.mask() as usize];
            if slot.is_some() {
                return Err(err(path, no, format!("duplicate mass {}", render_config(cfg))));
            }
            *slot = Some(parse_f64(path, no, v, "mass")?);
            Ok(())
        }
        _ => Err(err(path, no, format!("unrecognized line {:?}", fields.join(" ")))),
    })?;
    let sites = sites.ok_or_else(|| err(path, 0, "missing sites line"))?;
    Ok((sites, resolve_dense(path, values)?))
}

fn resolve_dense<T>(path: &str, values: Vec<Option<T>>) -> Result<Vec<T>> {
    let mut resolved = Vec::with_capacity(values.len());
    for (mask, v) in values.into_iter().enumerate() {
        resolved.push(v.ok_or_else(|| {
            err(
                path,
                0,
                format!("missing entry {}", render_config(Configuration(mask as u64))),
            )
        })?);
    }
    Ok(resolved)
}

// --- pair-interaction models ---

pub fn render_potential(model: &GibbsModel) -> String {
    let mut out = String::from("confstar potential v1\n");
    let _ = writeln!(out, "sites {}", model.sites());
    let _ = writeln!(out, "activity {}", fmt_f64(model.activity));
    let _ = writeln!(out, "beta {}", fmt_f64(model.beta));
    for x in 0..model.sites() {
        for y in (x + 1)..model.sites() {
            let v = model.potential.value(x, y);
            if v != 0.0 {
                let _ = writeln!(out, "pair {x} {y} {}", fmt_f64(v));
            }
        }
    }
    out.push_str("end\n");
    out
}

pub fn parse_potential(path: &str, text: &str) -> Result<GibbsModel> {
    let mut r = Reader::new(path, text);
    r.expect_header("potential")?;
    let mut sites: Option<usize> = None;
    let mut activity: Option<f64> = None;
    let mut beta: Option<f64> = None;
    let mut pairs: Vec<(usize, usize, f64)> = Vec::new();
    r.body(|no, fields| match fields {
        ["sites", n] => {
            sites = Some(parse_usize(path, no, n, "site count")?);
            Ok(())
        }
        ["activity", z] => {
            activity = Some(parse_f64(path, no, z, "activity")?);
            Ok(())
        }
        ["beta", b] => {
            beta = Some(parse_f64(path, no, b, "beta")?);
            Ok(())
        }
        ["pair", x, y, v] => {
            let n = sites.ok_or_else(|| err(path, no, "pair before sites line"))?;
            let x = parse_usize(path, no, x, "site")?;
            let y = parse_usize(path, no, y, "site")?;
            if x >= n || y >= n {
                return Err(err(path, no, format!("pair outside a {n}-site space")));
            }
            if x == y {
                return Err(err(path, no, "self-pairs carry no energy"));
            }
            pairs.push((x, y, parse_f64(path, no, v, "coupling")?));
            Ok(())
        }
        _ => Err(err(path, no, format!("unrecognized line {:?}", fields.join(" ")))),
    })?;
    let sites = sites.ok_or_else(|| err(path, 0, "missing sites line"))?;
    let activity = activity.ok_or_else(|| err(path, 0, "missing activity line"))?;
    let beta = beta.ok_or_else(|| err(path, 0, "missing beta line"))?;
    let mut potential = PairPotential::zero(sites);
    for (x, y, v) in pairs {
        potential.set_pair(x, y, v);
    }
    GibbsModel::new(potential, activity, beta)
}

fn full_mask(sites: usize) -> u64 {
    if sites >= 64 {
        u64::MAX
    } else {
        (1u64 << sites) - 1
    }
}

// --- file wrappers ---

macro_rules! file_io {
    ($read:ident, $write:ident, $parse:ident, $render:ident, $ty:ty) => {
        pub fn $read(path: &Path) -> Result<$ty> {
            let text = std::fs::read_to_string(path)?;
            $parse(&path.display().to_string(), &text)
        }

        pub fn $write(path: &Path, value: &$ty) -> Result<()> {
            std::fs::write(path, $render(value))?;
            Ok(())
        }
    };
}

file_io!(read_ground, write_ground, parse_ground, render_ground, GroundSpace);
file_io!(read_ranked, write_ranked, parse_ranked, render_ranked, RankedFunction<Complex64>);
file_io!(read_sitefn, write_sitefn, parse_sitefn, render_sitefn, OneParticleFunction<Complex64>);
file_io!(
    read_observable,
    write_observable,
    parse_observable,
    render_observable,
    ObservableFunction<Complex64>
);
file_io!(read_measure, write_measure, parse_measure, render_measure, FiniteConfigMeasure<f64>);
file_io!(read_law, write_law, parse_law, render_law, ProcessLaw<f64>);
file_io!(
    read_potential,
    write_potential,
    parse_potential,
    render_potential,
    GibbsModel
);
