//! Experiment configuration and input loading.

use std::path::{Path, PathBuf};

use clap::ValueEnum;
use lso_core::datasets;
use lso_core::io;
use lso_core::lso::TreeDecomposition;
use lso_core::metric::{graph_metric, DistanceMatrix, LpSpace, Metric, Norm, PointSet, WeightedGraph};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Structure {
    /// Triangle LSO from Euclidean ball carving (points input).
    TriangleEuclid,
    /// Classic LSO from shifted grids (points input).
    GridClassic,
    /// Triangle LSO from an ultrametric cover (any metric).
    DoublingCover,
    /// Rooted LSO of a weighted tree (graph input).
    RootedTree,
    /// Rooted LSO from a tree decomposition (graph input plus `--td`).
    RootedTreewidth,
    /// An existing family file (`--family`).
    Family,
    /// 2-hop path spanner on the line `1..=n`.
    TwoHop,
    /// Fault-tolerant 2-hop path spanner on the line.
    FtTwoHop,
    /// Thorup–Zwick path-reporting spanner.
    SpannerTz,
    /// Sparse-cover path-reporting spanner with a Thorup–Zwick estimator.
    SpannerCover,
    /// Path-reporting spanner from a family file.
    SpannerLso,
    /// Shortest-path-decomposition spanner (graph input).
    SpannerSpd,
    /// Fault-tolerant spanner from a family file.
    SpannerFt,
    /// Spanner oracle over a classic family file.
    OracleClassic,
    /// Spanner oracle over a triangle family file.
    OracleTriangle,
}

impl Structure {
    pub fn name(self) -> String {
        self.to_possible_value()
            .expect("no skipped variants")
            .get_name()
            .to_string()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum InputFormat {
    Points,
    Graph,
    Matrix,
}

impl InputFormat {
    /// Guess from the file extension.
    pub fn from_path(path: &Path) -> Option<Self> {
        match path.extension()?.to_str()? {
            "pts" | "points" => Some(InputFormat::Points),
            "graph" | "gr" => Some(InputFormat::Graph),
            "mat" | "matrix" | "dist" => Some(InputFormat::Matrix),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum GenKind {
    UniformCube,
    GaussianClusters,
    Grid,
    RandomMetric,
    RandomTree,
    RandomGraph,
}

impl GenKind {
    pub fn format(self) -> InputFormat {
        match self {
            GenKind::UniformCube | GenKind::GaussianClusters | GenKind::Grid => InputFormat::Points,
            GenKind::RandomMetric => InputFormat::Matrix,
            GenKind::RandomTree | GenKind::RandomGraph => InputFormat::Graph,
        }
    }
}

/// Where the metric comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub enum Source {
    File {
        path: PathBuf,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        format: Option<InputFormat>,
    },
    Generate {
        kind: GenKind,
        n: usize,
        #[serde(default = "one")]
        d: usize,
        seed: u64,
    },
}

fn one() -> usize {
    1
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Params {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    /// Line length for the hop structures.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
}

impl Params {
    /// Fills unset fields from `other`.
    pub fn or(self, other: &Params) -> Params {
        Params {
            t: self.t.or(other.t),
            eps: self.eps.or(other.eps),
            k: self.k.or(other.k),
            f: self.f.or(other.f),
            p: self.p.or(other.p),
            delta: self.delta.or(other.delta),
            n: self.n.or(other.n),
        }
    }

    pub fn norm(&self) -> Norm {
        match self.p {
            Some(p) if p.is_infinite() => Norm::Inf,
            Some(p) => Norm::L(p),
            None => Norm::euclidean(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyToggles {
    /// Check every pair (families and path-reporting spanners).
    #[serde(default = "yes")]
    pub all_pairs: bool,
    /// Random fault sets or oracle invocations to try.
    #[serde(default = "hundred")]
    pub trials: usize,
}

fn yes() -> bool {
    true
}

fn hundred() -> usize {
    100
}

impl Default for VerifyToggles {
    fn default() -> Self {
        VerifyToggles {
            all_pairs: true,
            trials: 100,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Outputs {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub structure: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub structure: Structure,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<Source>,
    /// Family file for structures that consume one.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family: Option<PathBuf>,
    /// Tree decomposition file for treewidth structures.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub td: Option<PathBuf>,
    #[serde(default)]
    pub params: Params,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub verify: VerifyToggles,
    #[serde(default)]
    pub outputs: Outputs,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Usage(format!("config: {e}")))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        Self::from_json(&read(path)?)
    }
}

pub fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

/// A loaded metric together with whatever richer form it came in.
pub enum Input {
    Points(LpSpace),
    Graph(WeightedGraph, DistanceMatrix),
    Matrix(DistanceMatrix),
}

impl Input {
    pub fn metric(&self) -> &dyn Metric {
        match self {
            Input::Points(s) => s,
            Input::Graph(_, m) | Input::Matrix(m) => m,
        }
    }

    pub fn points(&self) -> Result<&PointSet, CliError> {
        match self {
            Input::Points(s) => Ok(&s.points),
            _ => Err(CliError::Usage("this structure needs a points input".into())),
        }
    }

    pub fn graph(&self) -> Result<&WeightedGraph, CliError> {
        match self {
            Input::Graph(g, _) => Ok(g),
            _ => Err(CliError::Usage("this structure needs a graph input".into())),
        }
    }
}

/// Text of a generated dataset.
pub fn generate(kind: GenKind, n: usize, d: usize, seed: u64) -> Result<String, CliError> {
    Ok(match kind {
        GenKind::UniformCube => io::write_points(&datasets::uniform_cube(n, d, seed)?),
        GenKind::GaussianClusters => io::write_points(&datasets::gaussian_clusters(n, d, seed)?),
        GenKind::Grid => io::write_points(&datasets::grid_points(n, d)?),
        GenKind::RandomMetric => io::write_matrix(&datasets::random_metric(n, seed)?),
        GenKind::RandomTree => io::write_graph(&datasets::random_tree(n, seed)?),
        GenKind::RandomGraph => io::write_graph(&datasets::random_graph(n, n, seed)?),
    })
}

pub fn load_input(source: &Source, norm: Norm) -> Result<Input, CliError> {
    let (text, format) = match source {
        Source::File { path, format } => {
            let format = format.or_else(|| InputFormat::from_path(path)).ok_or_else(|| {
                CliError::Usage(format!(
                    "cannot tell the format of {}; pass --format or use .pts/.graph/.mat",
                    path.display()
                ))
            })?;
            (read(path)?, format)
        }
        Source::Generate { kind, n, d, seed } => (generate(*kind, *n, *d, *seed)?, kind.format()),
    };
    Ok(match format {
        InputFormat::Points => Input::Points(LpSpace::new(io::parse_points(&text)?, norm)?),
        InputFormat::Graph => {
            let g = io::parse_graph(&text)?;
            let m = graph_metric(&g)?;
            Input::Graph(g, m)
        }
        InputFormat::Matrix => Input::Matrix(io::parse_matrix(&text)?),
    })
}

pub fn load_td(path: &Path) -> Result<TreeDecomposition, CliError> {
    Ok(io::parse_td(&read(path)?)?)
}
