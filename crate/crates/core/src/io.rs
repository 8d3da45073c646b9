//! File formats: dataset CSVs (events, covariates, adjacency), sampler
//! artifacts (draws, pointwise log-likelihood, diagnostics, summaries) and
//! ground-truth sidecars. All writes are atomic (temp file + rename) and all
//! floats use shortest-round-trip formatting, so identical inputs produce
//! byte-identical files.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::data::{Individual, RecurrentDataset, SpatialGraph};
use crate::error::{Error, Result};
use crate::sampler::diagnostics::ParamSummary;
use crate::sampler::PosteriorSample;
use crate::selection::PointwiseLogLik;
use crate::simulate::GroundTruth;

/// Writes bytes to `path` atomically via a sibling temp file.
pub fn atomic_write(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = path.with_extension(format!(
        "{}tmp",
        path.extension().map(|e| format!("{}.", e.to_string_lossy())).unwrap_or_default()
    ));
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

fn fmt(v: f64) -> String {
    format!("{v}")
}

/// A dataset loaded from disk together with its spatial context.
#[derive(Debug, Clone)]
pub struct LoadedDataset {
    pub data: RecurrentDataset,
    pub graph: Option<SpatialGraph>,
    /// External area labels in index order (1..L after sorting).
    pub area_labels: Vec<String>,
}

/// Sorts labels numerically when every label parses as an integer,
/// lexicographically otherwise.
fn sort_labels(mut labels: Vec<String>) -> Vec<String> {
    let all_int = labels.iter().all(|l| l.parse::<i64>().is_ok());
    if all_int {
        labels.sort_by_key(|l| l.parse::<i64>().unwrap());
    } else {
        labels.sort();
    }
    labels.dedup();
    labels
}

/// Reads an undirected edge list (`area_a,area_b`); labels are mapped to
/// 1..L in sorted order.
pub fn read_adjacency(path: &Path) -> Result<(SpatialGraph, Vec<String>)> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_path(path)?;
    let mut raw_edges: Vec<(String, String)> = Vec::new();
    let mut labels: Vec<String> = Vec::new();
    for record in reader.records() {
        let record = record?;
        if record.len() < 2 {
            return Err(Error::Parse(format!(
                "{}: adjacency rows need two columns",
                path.display()
            )));
        }
        let a = record[0].to_string();
        let b = record[1].to_string();
        labels.push(a.clone());
        labels.push(b.clone());
        raw_edges.push((a, b));
    }
    let labels = sort_labels(labels);
    let index: BTreeMap<&str, usize> = labels
        .iter()
        .enumerate()
        .map(|(i, l)| (l.as_str(), i))
        .collect();
    let edges: Vec<(usize, usize)> = raw_edges
        .iter()
        .map(|(a, b)| (index[a.as_str()], index[b.as_str()]))
        .collect();
    Ok((SpatialGraph::new(labels.len(), edges)?, labels))
}

/// Reads the events file (`id,stratum,follow_up_end,event_time`; one row per
/// event, one empty-event row per zero-event individual) plus the covariates
/// file (`id,<x cols>,<z cols>`). Individuals keep first-appearance order.
pub fn read_dataset(
    events_path: &Path,
    covariates_path: Option<&Path>,
    adjacency_path: Option<&Path>,
    x_cols: &[String],
    z_cols: &[String],
) -> Result<LoadedDataset> {
    let (graph, mut area_labels) = match adjacency_path {
        Some(p) => {
            let (g, l) = read_adjacency(p)?;
            (Some(g), l)
        }
        None => (None, Vec::new()),
    };

    struct Raw {
        stratum_label: String,
        follow_up_end: f64,
        events: Vec<f64>,
    }
    let mut order: Vec<String> = Vec::new();
    let mut raw: BTreeMap<String, Raw> = BTreeMap::new();

    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(events_path)?;
    let headers = reader.headers()?.clone();
    let col = |name: &str| -> Result<usize> {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Parse(format!("events file lacks a `{name}` column")))
    };
    let (id_c, stratum_c, follow_c, event_c) = (
        col("id")?,
        col("stratum")?,
        col("follow_up_end")?,
        col("event_time")?,
    );
    for record in reader.records() {
        let record = record?;
        let id = record[id_c].to_string();
        let stratum_label = record[stratum_c].to_string();
        let follow: f64 = record[follow_c]
            .parse()
            .map_err(|_| Error::Parse(format!("bad follow_up_end for id {id}")))?;
        let entry = raw.entry(id.clone()).or_insert_with(|| {
            order.push(id.clone());
            Raw {
                stratum_label: stratum_label.clone(),
                follow_up_end: follow,
                events: Vec::new(),
            }
        });
        if entry.stratum_label != stratum_label {
            return Err(Error::Parse(format!(
                "id {id}: inconsistent stratum ({} vs {stratum_label})",
                entry.stratum_label
            )));
        }
        if entry.follow_up_end != follow {
            return Err(Error::Parse(format!(
                "id {id}: inconsistent follow_up_end ({} vs {follow})",
                entry.follow_up_end
            )));
        }
        let cell = record[event_c].trim();
        if !cell.is_empty() {
            let t: f64 = cell
                .parse()
                .map_err(|_| Error::Parse(format!("bad event_time `{cell}` for id {id}")))?;
            entry.events.push(t);
        }
    }
    if raw.is_empty() {
        return Err(Error::InvalidData(vec!["events file is empty".to_string()]));
    }

    if area_labels.is_empty() {
        area_labels = sort_labels(raw.values().map(|r| r.stratum_label.clone()).collect());
    }
    let area_index: BTreeMap<&str, usize> = area_labels
        .iter()
        .enumerate()
        .map(|(i, l)| (l.as_str(), i))
        .collect();

    // covariates keyed by id
    let mut xz: BTreeMap<String, (Vec<f64>, Vec<f64>)> = BTreeMap::new();
    if let Some(cov_path) = covariates_path {
        let mut reader = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_path(cov_path)?;
        let headers = reader.headers()?.clone();
        let find = |name: &String| -> Result<usize> {
            headers
                .iter()
                .position(|h| h == name)
                .ok_or_else(|| Error::Parse(format!("covariates file lacks column `{name}`")))
        };
        let id_c = headers
            .iter()
            .position(|h| h == "id")
            .ok_or_else(|| Error::Parse("covariates file lacks an `id` column".into()))?;
        let x_idx: Vec<usize> = x_cols.iter().map(&find).collect::<Result<_>>()?;
        let z_idx: Vec<usize> = z_cols.iter().map(&find).collect::<Result<_>>()?;
        for record in reader.records() {
            let record = record?;
            let id = record[id_c].to_string();
            let parse = |i: usize| -> Result<f64> {
                record[i]
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad covariate value for id {id}")))
            };
            let x: Vec<f64> = x_idx.iter().map(|&i| parse(i)).collect::<Result<_>>()?;
            let z: Vec<f64> = z_idx.iter().map(|&i| parse(i)).collect::<Result<_>>()?;
            xz.insert(id, (x, z));
        }
    } else if !x_cols.is_empty() || !z_cols.is_empty() {
        return Err(Error::Parse(
            "covariate columns declared but no covariates file given".into(),
        ));
    }

    let mut individuals = Vec::with_capacity(order.len());
    for id in order {
        let r = &raw[&id];
        let stratum = *area_index.get(r.stratum_label.as_str()).ok_or_else(|| {
            Error::InvalidData(vec![format!(
                "id {id}: stratum `{}` not present in the adjacency labels",
                r.stratum_label
            )])
        })?;
        let (x, z) = match xz.get(&id) {
            Some((x, z)) => (x.clone(), z.clone()),
            None if x_cols.is_empty() && z_cols.is_empty() => (Vec::new(), Vec::new()),
            None => {
                return Err(Error::InvalidData(vec![format!(
                    "id {id}: missing covariate row"
                )]))
            }
        };
        individuals.push(Individual {
            id,
            follow_up_end: r.follow_up_end,
            event_times: r.events.clone(),
            intensity_covariates: x,
            zero_covariates: z,
            stratum,
        });
    }
    let data = RecurrentDataset::new(individuals, x_cols.len(), z_cols.len(), area_labels.len())?;
    Ok(LoadedDataset {
        data,
        graph,
        area_labels,
    })
}

/// Writes events.csv, covariates.csv and (when a graph is given)
/// adjacency.csv into `dir` using 1..L area labels.
pub fn write_dataset(
    dir: &Path,
    data: &RecurrentDataset,
    graph: Option<&SpatialGraph>,
    x_cols: &[String],
    z_cols: &[String],
) -> Result<()> {
    fs::create_dir_all(dir)?;
    let mut events = String::from("id,stratum,follow_up_end,event_time\n");
    for ind in data.individuals() {
        let stratum = ind.stratum + 1;
        if ind.event_times.is_empty() {
            events.push_str(&format!(
                "{},{},{},\n",
                ind.id,
                stratum,
                fmt(ind.follow_up_end)
            ));
        } else {
            for &t in &ind.event_times {
                events.push_str(&format!(
                    "{},{},{},{}\n",
                    ind.id,
                    stratum,
                    fmt(ind.follow_up_end),
                    fmt(t)
                ));
            }
        }
    }
    atomic_write(&dir.join("events.csv"), events.as_bytes())?;

    let mut cov = String::from("id");
    for c in x_cols.iter().chain(z_cols) {
        cov.push(',');
        cov.push_str(c);
    }
    cov.push('\n');
    for ind in data.individuals() {
        cov.push_str(&ind.id);
        for v in ind.intensity_covariates.iter().chain(&ind.zero_covariates) {
            cov.push(',');
            cov.push_str(&fmt(*v));
        }
        cov.push('\n');
    }
    atomic_write(&dir.join("covariates.csv"), cov.as_bytes())?;

    if let Some(g) = graph {
        let mut adj = String::from("area_a,area_b\n");
        for &(a, b) in g.edges() {
            adj.push_str(&format!("{},{}\n", a + 1, b + 1));
        }
        atomic_write(&dir.join("adjacency.csv"), adj.as_bytes())?;
    }
    Ok(())
}

/// Columnar draws: `chain,iter` then one column per named parameter.
pub fn write_draws_csv(path: &Path, sample: &PosteriorSample) -> Result<()> {
    let mut out = String::from("chain,iter");
    for n in &sample.names {
        out.push(',');
        out.push_str(n);
    }
    out.push('\n');
    for (ci, chain) in sample.draws.iter().enumerate() {
        for (di, draw) in chain.iter().enumerate() {
            out.push_str(&format!("{},{}", ci + 1, di + 1));
            for v in draw {
                out.push(',');
                out.push_str(&fmt(*v));
            }
            out.push('\n');
        }
    }
    atomic_write(path, out.as_bytes())
}

/// Pointwise log-likelihood matrix: `chain,iter` then one column per
/// individual id.
pub fn write_pointwise_csv(path: &Path, sample: &PosteriorSample, ids: &[String]) -> Result<()> {
    let mut out = String::from("chain,iter");
    for id in ids {
        out.push_str(",ll_");
        out.push_str(id);
    }
    out.push('\n');
    for (ci, chain) in sample.pointwise_loglik.iter().enumerate() {
        for (di, row) in chain.iter().enumerate() {
            out.push_str(&format!("{},{}", ci + 1, di + 1));
            for v in row {
                out.push(',');
                out.push_str(&fmt(*v));
            }
            out.push('\n');
        }
    }
    atomic_write(path, out.as_bytes())
}

/// Reads a pointwise matrix written by [`write_pointwise_csv`].
pub fn read_pointwise_csv(path: &Path) -> Result<PointwiseLogLik> {
    let mut reader = csv::ReaderBuilder::new().from_path(path)?;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for record in reader.records() {
        let record = record?;
        let row: Vec<f64> = record
            .iter()
            .skip(2)
            .map(|c| {
                c.parse::<f64>()
                    .map_err(|_| Error::Parse(format!("bad log-likelihood value `{c}`")))
            })
            .collect::<Result<_>>()?;
        rows.push(row);
    }
    PointwiseLogLik::from_rows(&rows)
}

/// JSON sidecar with convergence diagnostics.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DiagnosticsReport {
    pub parameters: Vec<String>,
    pub rhat: Vec<f64>,
    pub ess: Vec<f64>,
    pub max_rhat: f64,
    pub divergences: usize,
    pub accept_rate: f64,
    pub step_sizes: Vec<f64>,
    pub runtime_secs: f64,
    pub warnings: Vec<String>,
}

impl DiagnosticsReport {
    pub fn from_sample(sample: &PosteriorSample, warnings: &[String]) -> Self {
        Self {
            parameters: sample.names.clone(),
            rhat: sample.rhat.clone(),
            ess: sample.ess.clone(),
            max_rhat: sample.max_rhat(),
            divergences: sample.divergences,
            accept_rate: sample.accept_rate,
            step_sizes: sample.step_sizes.clone(),
            runtime_secs: sample.runtime_secs,
            warnings: warnings.to_vec(),
        }
    }
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let body = serde_json::to_string_pretty(value)
        .map_err(|e| Error::Parse(format!("json encode: {e}")))?;
    atomic_write(path, body.as_bytes())
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let body = fs::read_to_string(path)?;
    serde_json::from_str(&body).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

/// Summary table CSV.
pub fn write_summary_csv(path: &Path, rows: &[ParamSummary]) -> Result<()> {
    let mut out = String::from("parameter,mean,sd,q2.5,median,q97.5,rhat,ess\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            r.name,
            fmt(r.mean),
            fmt(r.sd),
            fmt(r.q2_5),
            fmt(r.median),
            fmt(r.q97_5),
            fmt(r.rhat),
            fmt(r.ess)
        ));
    }
    atomic_write(path, out.as_bytes())
}

pub fn write_truth_json(path: &Path, truth: &GroundTruth) -> Result<()> {
    write_json(path, truth)
}
