//! Building, verifying and querying structures.

use std::io::{BufRead, Write};
use std::time::Instant;

use lso_core::doubling::{build_ultrametric_cover, cover_preorder_to_triangle_lso};
use lso_core::euclid::{build_classic_grid_lso, build_triangle_lso_resampled, max_stretch_setting, TriangleLsoParams};
use lso_core::hop::{FtTwoHopPathSpanner, TwoHopPathSpanner};
use lso_core::io;
use lso_core::lso::{
    build_rooted_lso_tree, build_rooted_lso_treewidth, verify_classic, verify_rooted, verify_triangle, LsoKind,
    OrderingFamily,
};
use lso_core::metric::{distance_extent, stretch_ratio, Metric, REL_TOL};
use lso_core::nns::{rooted_labels, triangle_labels, RootedLabel, RootedNns, TriangleLabel, TriangleNns};
use lso_core::rng::rng_for;
use lso_core::spanners::{
    check_path_reporting, ft_spanner_from_family, heavy_path_spd, path_weight, pr_spanner_from_classic,
    pr_spanner_from_rooted, pr_spanner_from_triangle, spanner_oracle_classic, spanner_oracle_triangle,
    sparse_cover_spanner, spd_spanner, treewidth_spd, tz_spanner, FtSpanner, PathReporting, SpannerOracle,
};
use rand::seq::index::sample;
use rand::Rng as _;
use serde_json::json;

use crate::config::{load_input, load_td, read, ExperimentConfig, Input, Structure};
use crate::report::{Report, Timings};
use crate::CliError;

/// Doublings allowed when a builder resamples until its family verifies.
const MAX_DOUBLINGS: usize = 5;

pub enum Built {
    Family(OrderingFamily),
    TwoHop(TwoHopPathSpanner),
    FtTwoHop(FtTwoHopPathSpanner),
    Spanner(Box<dyn PathReporting>),
    Ft(FtSpanner),
    Oracle(SpannerOracle),
}

impl Built {
    /// Structure file contents.
    pub fn to_json(&self) -> Result<String, CliError> {
        Ok(match self {
            Built::Family(f) => f.to_json(),
            Built::TwoHop(h) => json!({ "n": h.len(), "edges": h.edges() }).to_string(),
            Built::FtTwoHop(h) => {
                let edges: Vec<(usize, usize)> = h.edges().collect();
                json!({ "n": h.len(), "f": h.fault_budget(), "edges": edges }).to_string()
            }
            Built::Spanner(s) => s.to_json(),
            Built::Ft(s) => {
                let edges: Vec<(usize, usize, f64)> = s.edges().iter().collect();
                json!({ "f": s.fault_budget(), "stretch": s.stretch(), "edges": edges }).to_string()
            }
            Built::Oracle(_) => return Err(CliError::Usage("oracles have no structure file; use verify".into())),
        })
    }
}

/// A configuration with its input loaded.
pub struct Experiment {
    pub config: ExperimentConfig,
    pub input: Option<Input>,
}

impl Experiment {
    pub fn load(config: ExperimentConfig) -> Result<Self, CliError> {
        let input = match &config.source {
            Some(s) => Some(load_input(s, config.params.norm())?),
            None => None,
        };
        Ok(Experiment { config, input })
    }

    fn input(&self) -> Result<&Input, CliError> {
        self.input
            .as_ref()
            .ok_or_else(|| CliError::Usage(format!("{} needs --input", self.config.structure.name())))
    }

    fn metric(&self) -> Result<&dyn Metric, CliError> {
        Ok(self.input()?.metric())
    }

    fn family(&self) -> Result<OrderingFamily, CliError> {
        let path = self
            .config
            .family
            .as_ref()
            .ok_or_else(|| CliError::Usage(format!("{} needs --family", self.config.structure.name())))?;
        let fam = OrderingFamily::from_json(&read(path)?)?;
        if let Some(input) = &self.input {
            if fam.universe() > input.metric().len() {
                return Err(CliError::Usage(format!(
                    "family mentions point {} but the input has {}",
                    fam.universe() - 1,
                    input.metric().len()
                )));
            }
        }
        Ok(fam)
    }

    /// Family over the whole input: a family file may leave trailing ids out.
    fn family_for_input(&self) -> Result<OrderingFamily, CliError> {
        let fam = self.family()?;
        let n = self.metric()?.len();
        if fam.universe() == n {
            return Ok(fam);
        }
        let perms = fam.orderings().iter().map(|o| (o.root(), o.perm().to_vec())).collect();
        Ok(OrderingFamily::new(fam.kind(), n, fam.rho(), perms)?.with_tau(fam.tau()))
    }

    fn line_length(&self) -> Result<usize, CliError> {
        self.config
            .params
            .n
            .ok_or_else(|| CliError::Usage(format!("{} needs --n", self.config.structure.name())))
    }

    pub fn build(&self) -> Result<Built, CliError> {
        let p = &self.config.params;
        let seed = self.config.seed;
        Ok(match self.config.structure {
            Structure::TriangleEuclid => {
                let ps = self.input()?.points()?;
                let t = p.t.unwrap_or_else(|| max_stretch_setting(ps.dim()));
                let params = TriangleLsoParams::new(p.norm(), t, p.delta.unwrap_or(0.5));
                Built::Family(build_triangle_lso_resampled(ps, &params, seed, MAX_DOUBLINGS)?.0)
            }
            Structure::GridClassic => {
                let ps = self.input()?.points()?;
                let (g, _) = build_classic_grid_lso(ps, p.eps.unwrap_or(0.25), seed, MAX_DOUBLINGS)?;
                Built::Family(g.into_family())
            }
            Structure::DoublingCover => {
                let cover = build_ultrametric_cover(self.metric()?, p.t.unwrap_or(4.0), p.eps.unwrap_or(0.25), seed)?;
                Built::Family(cover_preorder_to_triangle_lso(&cover)?)
            }
            Structure::RootedTree => Built::Family(build_rooted_lso_tree(self.input()?.graph()?)?),
            Structure::RootedTreewidth => {
                let g = self.input()?.graph()?;
                let td = load_td(self.td_path()?)?;
                Built::Family(build_rooted_lso_treewidth(g, &td)?.family)
            }
            Structure::Family => Built::Family(self.family()?),
            Structure::TwoHop => Built::TwoHop(TwoHopPathSpanner::new(self.line_length()?)?),
            Structure::FtTwoHop => Built::FtTwoHop(FtTwoHopPathSpanner::new(self.line_length()?, p.f.unwrap_or(1))?),
            Structure::SpannerTz => Built::Spanner(Box::new(tz_spanner(self.metric()?, p.k.unwrap_or(2), seed)?)),
            Structure::SpannerCover => {
                let m = self.metric()?;
                let k = p.k.unwrap_or(2);
                let tz = tz_spanner(m, k, seed)?;
                let s = sparse_cover_spanner(m, k, p.eps.unwrap_or(0.25), move |u, v| tz.estimate(u, v))?;
                Built::Spanner(Box::new(s))
            }
            Structure::SpannerLso => {
                let fam = self.family_for_input()?;
                let m = self.metric()?;
                Built::Spanner(match fam.kind() {
                    LsoKind::Classic => Box::new(pr_spanner_from_classic(&fam, m)?),
                    LsoKind::Triangle => Box::new(pr_spanner_from_triangle(&fam, m)?),
                    LsoKind::Rooted => Box::new(pr_spanner_from_rooted(&fam, m)?),
                })
            }
            Structure::SpannerSpd => {
                let g = self.input()?.graph()?;
                let spd = match &self.config.td {
                    Some(path) => treewidth_spd(g, &load_td(path)?)?,
                    None => heavy_path_spd(g)?,
                };
                Built::Spanner(Box::new(spd_spanner(g, &spd, p.eps.unwrap_or(0.25))?))
            }
            Structure::SpannerFt => Built::Ft(ft_spanner_from_family(
                &self.family_for_input()?,
                self.metric()?,
                p.f.unwrap_or(1),
            )?),
            Structure::OracleClassic => {
                Built::Oracle(spanner_oracle_classic(&self.family_for_input()?, self.metric()?)?)
            }
            Structure::OracleTriangle => Built::Oracle(spanner_oracle_triangle(
                &self.family_for_input()?,
                self.metric()?,
                p.k.unwrap_or(2),
            )?),
        })
    }

    fn td_path(&self) -> Result<&std::path::Path, CliError> {
        self.config
            .td
            .as_deref()
            .ok_or_else(|| CliError::Usage("rooted-treewidth needs --td".into()))
    }

    /// Builds, checks and times the structure.
    pub fn verify(&self, with_timings: bool) -> Result<Report, CliError> {
        let c = &self.config;
        let mut report = Report::new(c.structure.name(), c.params.clone(), c.seed);
        let start = Instant::now();
        let mut built = self.build()?;
        let build_ms = start.elapsed().as_secs_f64() * 1e3;
        let start = Instant::now();
        if c.verify.all_pairs || matches!(built, Built::Oracle(_)) {
            self.check(&mut built, &mut report)?;
        } else {
            self.summarize(&built, &mut report);
        }
        let verify_ms = start.elapsed().as_secs_f64() * 1e3;
        report.finish();
        if with_timings {
            report.timings = Some(Timings { build_ms, verify_ms });
        }
        Ok(report)
    }

    fn summarize(&self, built: &Built, r: &mut Report) {
        match built {
            Built::Family(f) => {
                r.num_orderings = Some(f.len());
                r.stretch_bound = Some(f.rho());
            }
            Built::TwoHop(h) => r.edges = Some(h.edge_count()),
            Built::FtTwoHop(h) => r.edges = Some(h.edge_count()),
            Built::Spanner(s) => {
                r.edges = Some(s.edges().len());
                r.weight = Some(s.edges().total_weight());
                r.stretch_bound = Some(s.stretch());
            }
            Built::Ft(s) => {
                r.edges = Some(s.edges().len());
                r.weight = Some(s.edges().total_weight());
                r.stretch_bound = Some(s.stretch());
            }
            Built::Oracle(o) => {
                r.num_orderings = Some(o.family().len());
                r.stretch_bound = o.stretch_bound();
            }
        }
    }

    fn check(&self, built: &mut Built, r: &mut Report) -> Result<(), CliError> {
        self.summarize(built, r);
        let trials = self.config.verify.trials;
        let mut rng = rng_for(self.config.seed, "cli-verify", 0);
        match built {
            Built::Family(f) => {
                let m = self.metric()?;
                if f.universe() != m.len() {
                    *f = self.family_for_input()?;
                }
                let v = match f.kind() {
                    LsoKind::Classic => verify_classic(f, m)?,
                    LsoKind::Triangle => verify_triangle(f, m)?,
                    LsoKind::Rooted => verify_rooted(f, m)?,
                };
                r.verified_pairs = v.pairs_checked;
                r.max_observed_stretch = v.max_stretch;
                for x in &v.violations {
                    r.flag(Some([x.x, x.y]), x.best, "no ordering serves the pair");
                }
                // the core report lists only the first violations
                r.violation_count += v.violation_count - v.violations.len();
                if !v.membership_ok {
                    r.flag(
                        None,
                        f.measured_tau() as f64,
                        format!("a point lies in more than τ = {} orderings", f.tau()),
                    );
                }
            }
            Built::TwoHop(h) => {
                let n = h.len();
                for i in 1..=n {
                    for j in i + 1..=n {
                        r.verified_pairs += 1;
                        let path = h.path(i, j)?;
                        let ok = path.len() <= 3
                            && path
                                .windows(2)
                                .all(|e| e[0] < e[1] && (h.is_responsible(e[0], e[1]) || h.is_responsible(e[1], e[0])));
                        if !ok {
                            r.flag(
                                Some([i, j]),
                                (path.len() - 1) as f64,
                                "path is not a monotone 2-hop path",
                            );
                        }
                    }
                }
                r.max_observed_stretch = 1.0;
            }
            Built::FtTwoHop(h) => {
                let n = h.len();
                let f = h.fault_budget().min(n);
                for _ in 0..trials {
                    let faults: Vec<usize> = sample(&mut rng, n, f).into_iter().map(|x| x + 1).collect();
                    for i in (1..=n).filter(|x| !faults.contains(x)) {
                        for j in (i + 1..=n).filter(|x| !faults.contains(x)) {
                            r.verified_pairs += 1;
                            let ok = h.path(i, j, &faults).is_ok_and(|p| {
                                p.len() <= 3
                                    && p.iter().all(|x| !faults.contains(x))
                                    && p.windows(2).all(|e| e[0] < e[1] && h.has_edge(e[0], e[1]))
                            });
                            if !ok {
                                r.flag(
                                    Some([i, j]),
                                    f64::INFINITY,
                                    format!("no surviving 2-hop path under faults {faults:?}"),
                                );
                            }
                        }
                    }
                }
                r.max_observed_stretch = 1.0;
            }
            Built::Spanner(s) => {
                let c = check_path_reporting(s.as_ref(), self.metric()?);
                r.verified_pairs = c.pairs_checked;
                r.max_observed_stretch = c.max_stretch;
                for &(u, v, x) in &c.violations {
                    r.flag(Some([u, v]), x, "reported path is invalid or too long");
                }
                r.violation_count += c.violation_count - c.violations.len();
            }
            Built::Ft(s) => {
                let m = self.metric()?;
                let n = m.len();
                let f = s.fault_budget().min(n);
                for _ in 0..trials {
                    let faults: Vec<usize> = sample(&mut rng, n, f).into_vec();
                    for u in (0..n).filter(|x| !faults.contains(x)) {
                        for v in (u + 1..n).filter(|x| !faults.contains(x)) {
                            r.verified_pairs += 1;
                            let measured = s.path(u, v, &faults).ok().and_then(|p| {
                                let clean = p.len() <= 3 && p.iter().all(|x| !faults.contains(x));
                                clean.then(|| path_weight(s.edges(), &p).ok()).flatten()
                            });
                            match measured {
                                Some(w) => {
                                    let ratio = stretch_ratio(w, m.dist(u, v));
                                    r.max_observed_stretch = r.max_observed_stretch.max(ratio);
                                    if ratio > s.stretch() * (1.0 + REL_TOL) {
                                        r.flag(
                                            Some([u, v]),
                                            ratio,
                                            format!("stretch too large under faults {faults:?}"),
                                        );
                                    }
                                }
                                None => r.flag(
                                    Some([u, v]),
                                    f64::INFINITY,
                                    format!("no valid path under faults {faults:?}"),
                                ),
                            }
                        }
                    }
                }
            }
            Built::Oracle(o) => {
                let m = self.metric()?;
                let n = m.len();
                let Some((lo, hi)) = distance_extent(m) else {
                    return Ok(());
                };
                let mut ws = 0.0f64;
                for _ in 0..trials {
                    let size = rng.random_range(2.min(n)..=n);
                    let terminals = sample(&mut rng, n, size).into_vec();
                    let l = lo / 2.0 * (4.0 * hi / lo).powf(rng.random::<f64>());
                    let out = o.invoke(&terminals, l)?;
                    ws = ws.max(out.weak_sparsity);
                    let c = o.check_stretch(&out, &terminals, l);
                    r.verified_pairs += c.pairs_checked;
                    r.max_observed_stretch = r.max_observed_stretch.max(c.max_stretch);
                    if c.violation_count > 0 {
                        r.flag(
                            None,
                            c.max_stretch,
                            format!("{} pairs over the bound at L = {l}", c.violation_count),
                        );
                    }
                }
                r.weak_sparsity = Some(ws);
            }
        }
        Ok(())
    }
}

pub fn write_out(path: Option<&std::path::Path>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| CliError::Usage(format!("{}: {e}", p.display()))),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())
                .and_then(|_| {
                    if text.ends_with('\n') {
                        Ok(())
                    } else {
                        out.write_all(b"\n")
                    }
                })
                .map_err(|e| CliError::Usage(e.to_string()))
        }
    }
}

fn parse_ids(tokens: &[&str], line: usize) -> Result<Vec<usize>, CliError> {
    tokens
        .iter()
        .map(|t| {
            t.parse()
                .map_err(|_| CliError::Usage(format!("stdin line {line}: bad id `{t}`")))
        })
        .collect()
}

/// Answers `p <u> <v> [faults…]` lines with `<path> <weight>`.
pub fn run_paths(exp: &Experiment, input: impl BufRead, mut out: impl Write) -> Result<(), CliError> {
    let built = exp.build()?;
    for (no, line) in input.lines().enumerate() {
        let line = line.map_err(|e| CliError::Usage(e.to_string()))?;
        let tokens: Vec<&str> = line.split_whitespace().collect();
        match tokens.first() {
            None => continue,
            Some(&"p") if tokens.len() >= 3 => {}
            _ => {
                return Err(CliError::Usage(format!(
                    "stdin line {}: expected `p <u> <v> [faults…]`",
                    no + 1
                )))
            }
        }
        let ids = parse_ids(&tokens[1..], no + 1)?;
        let (u, v, faults) = (ids[0], ids[1], &ids[2..]);
        let no_faults = || {
            if faults.is_empty() {
                Ok(())
            } else {
                Err(CliError::Usage("this structure does not take faults".into()))
            }
        };
        let answer = match &built {
            Built::TwoHop(h) => {
                no_faults()?;
                h.path(u, v).map(|p| {
                    let w = p.windows(2).map(|e| e[0].abs_diff(e[1])).sum::<usize>() as f64;
                    (p, w)
                })
            }
            Built::FtTwoHop(h) => h.path(u, v, faults).map(|p| {
                let w = p.windows(2).map(|e| e[0].abs_diff(e[1])).sum::<usize>() as f64;
                (p, w)
            }),
            Built::Spanner(s) => {
                no_faults()?;
                s.path(u, v).and_then(|p| Ok((p.clone(), path_weight(s.edges(), &p)?)))
            }
            Built::Ft(s) => s
                .path(u, v, faults)
                .and_then(|p| Ok((p.clone(), path_weight(s.edges(), &p)?))),
            _ => return Err(CliError::Usage("path queries need a spanner structure".into())),
        };
        let text = match answer {
            Ok((p, w)) => {
                let ids: Vec<String> = p.iter().map(ToString::to_string).collect();
                format!("{} {w}", ids.join(" "))
            }
            Err(e) => format!("error {e}"),
        };
        writeln!(out, "{text}").map_err(|e| CliError::Usage(e.to_string()))?;
    }
    Ok(())
}

enum Nns {
    Rooted(RootedNns, Vec<RootedLabel>),
    Triangle(TriangleNns, Vec<TriangleLabel>),
}

impl Nns {
    fn insert(&mut self, id: usize) -> lso_core::Result<bool> {
        match self {
            Nns::Rooted(s, l) => s.insert(id, l.get(id).ok_or(out_of_range(id, l.len()))?),
            Nns::Triangle(s, l) => s.insert(id, l.get(id).ok_or(out_of_range(id, l.len()))?),
        }
    }

    fn remove(&mut self, id: usize) -> lso_core::Result<bool> {
        match self {
            Nns::Rooted(s, _) => s.remove(id),
            Nns::Triangle(s, _) => s.remove(id),
        }
    }

    fn query(&self, id: usize) -> lso_core::Result<(usize, f64)> {
        match self {
            Nns::Rooted(s, l) => s.query(l.get(id).ok_or(out_of_range(id, l.len()))?),
            Nns::Triangle(s, l) => s.query(l.get(id).ok_or(out_of_range(id, l.len()))?),
        }
    }
}

fn out_of_range(index: usize, size: usize) -> lso_core::Error {
    lso_core::Error::OutOfRange { index, size }
}

pub struct NnsOptions<'a> {
    pub preload: bool,
    pub labels_out: Option<&'a std::path::Path>,
}

/// Runs `+ <id>`, `- <id>` and `q <id>` lines against a labeled NNS built
/// from the family. Queries print `<id> <nearest> <estimate>`.
pub fn run_nns(exp: &Experiment, opts: NnsOptions, input: impl BufRead, mut out: impl Write) -> Result<(), CliError> {
    let Built::Family(fam) = exp.build()? else {
        return Err(CliError::Usage("nns needs a family structure".into()));
    };
    let m = exp.metric()?;
    let fam = if fam.universe() == m.len() {
        fam
    } else {
        exp.family_for_input()?
    };
    let mut nns = match fam.kind() {
        LsoKind::Rooted => {
            let labels = rooted_labels(&fam, m)?;
            if let Some(p) = opts.labels_out {
                write_out(Some(p), &io::write_labels("rooted", &labels)?)?;
            }
            Nns::Rooted(RootedNns::new(), labels)
        }
        LsoKind::Triangle => {
            let labels = triangle_labels(&fam, m)?;
            if let Some(p) = opts.labels_out {
                write_out(Some(p), &io::write_labels("triangle", &labels)?)?;
            }
            Nns::Triangle(TriangleNns::new(), labels)
        }
        LsoKind::Classic => return Err(CliError::Usage("nns needs a rooted or triangle family".into())),
    };
    if opts.preload {
        for id in 0..m.len() {
            nns.insert(id)?;
        }
    }
    for (no, line) in input.lines().enumerate() {
        let line = line.map_err(|e| CliError::Usage(e.to_string()))?;
        let tokens: Vec<&str> = line.split_whitespace().collect();
        if tokens.is_empty() {
            continue;
        }
        let bad = || CliError::Usage(format!("stdin line {}: expected `q|+|- <id>`", no + 1));
        if tokens.len() != 2 {
            return Err(bad());
        }
        let id = parse_ids(&tokens[1..], no + 1)?[0];
        let text = match tokens[0] {
            "+" => format!("+ {id} {}", nns.insert(id)?),
            "-" => format!("- {id} {}", nns.remove(id)?),
            "q" => match nns.query(id) {
                Ok((y, est)) => format!("{id} {y} {est}"),
                Err(e) => format!("{id} error {e}"),
            },
            _ => return Err(bad()),
        };
        writeln!(out, "{text}").map_err(|e| CliError::Usage(e.to_string()))?;
    }
    Ok(())
}

/// Times random queries and returns a JSON summary with latency percentiles.
pub fn bench(exp: &Experiment, queries: usize) -> Result<String, CliError> {
    let start = Instant::now();
    let built = exp.build()?;
    let build_ms = start.elapsed().as_secs_f64() * 1e3;
    let mut rng = rng_for(exp.config.seed, "cli-bench", 0);
    let (n, base) = match &built {
        Built::TwoHop(h) => (h.len(), 1),
        Built::FtTwoHop(h) => (h.len(), 1),
        Built::Spanner(s) => (s.edges().points(), 0),
        Built::Ft(s) => (s.edges().points(), 0),
        _ => return Err(CliError::Usage("bench needs a path-reporting structure".into())),
    };
    if n == 0 {
        return Err(CliError::Usage("nothing to query".into()));
    }
    let mut lat = Vec::with_capacity(queries);
    let mut checksum = 0usize;
    for _ in 0..queries {
        let u = base + rng.random_range(0..n);
        let v = base + rng.random_range(0..n);
        let t = Instant::now();
        let path = match &built {
            Built::TwoHop(h) => h.path(u, v),
            Built::FtTwoHop(h) => h.path(u, v, &[]),
            Built::Spanner(s) => s.path(u, v),
            Built::Ft(s) => s.path(u, v, &[]),
            _ => unreachable!("filtered above"),
        };
        lat.push(t.elapsed().as_nanos() as u64);
        checksum = checksum.wrapping_add(path?.len());
    }
    lat.sort_unstable();
    let pct = |q: f64| {
        lat.get(((lat.len() as f64 - 1.0) * q).round() as usize)
            .copied()
            .unwrap_or(0)
    };
    Ok(serde_json::to_string_pretty(&json!({
        "structure": exp.config.structure.name(),
        "n": n,
        "queries": queries,
        "build_ms": build_ms,
        "p50_ns": pct(0.5),
        "p99_ns": pct(0.99),
        "max_ns": lat.last().copied().unwrap_or(0),
        "path_vertices": checksum,
    }))
    .expect("json"))
}
