//! Observed-data model: individuals with recurrent events, the spatial
//! adjacency graph, and validation.
//!
//! All types are immutable after construction and safe to share across
//! threads; construction canonicalizes (events sorted, time horizon
//! recomputed) and reports the full list of violations on failure.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One subject under observation: follow-up window, event times, covariates
/// and the spatial stratum it belongs to.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Individual {
    pub id: String,
    /// End of the observation window (same time unit as the event times).
    pub follow_up_end: f64,
    /// Event times, strictly increasing, each in (0, follow_up_end].
    pub event_times: Vec<f64>,
    /// Covariates entering the intensity linear predictor (length p).
    pub intensity_covariates: Vec<f64>,
    /// Covariates entering the zero-inflation logit (length q).
    pub zero_covariates: Vec<f64>,
    /// Zero-based spatial stratum index; strata are 1..L in the file formats.
    pub stratum: usize,
}

impl Individual {
    pub fn event_count(&self) -> usize {
        self.event_times.len()
    }
}

/// A validated recurrent-event dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecurrentDataset {
    individuals: Vec<Individual>,
    intensity_dim: usize,
    zero_dim: usize,
    num_strata: usize,
    time_horizon: f64,
}

impl RecurrentDataset {
    /// Canonicalizes and validates the raw individuals. Event times are
    /// sorted, the time horizon is recomputed from the data, and every
    /// violation found is reported (not just the first).
    pub fn new(
        mut individuals: Vec<Individual>,
        intensity_dim: usize,
        zero_dim: usize,
        num_strata: usize,
    ) -> Result<Self> {
        let mut violations = Vec::new();
        if individuals.is_empty() {
            violations.push("dataset must contain at least one individual".to_string());
        }
        for ind in &mut individuals {
            ind.event_times
                .sort_by(|a, b| a.partial_cmp(b).expect("event times must not be NaN"));
            if !(ind.follow_up_end > 0.0) {
                violations.push(format!(
                    "individual {}: non-positive follow-up end {}",
                    ind.id, ind.follow_up_end
                ));
            }
            for w in ind.event_times.windows(2) {
                if w[0] == w[1] {
                    violations.push(format!(
                        "individual {}: duplicate event time {}",
                        ind.id, w[0]
                    ));
                }
            }
            for &t in &ind.event_times {
                if !(t > 0.0) {
                    violations.push(format!(
                        "individual {}: event at or before time zero ({t})",
                        ind.id
                    ));
                } else if t > ind.follow_up_end {
                    violations.push(format!(
                        "individual {}: event beyond follow-up ({t} > {})",
                        ind.id, ind.follow_up_end
                    ));
                }
            }
            if ind.intensity_covariates.len() != intensity_dim {
                violations.push(format!(
                    "individual {}: expected {} intensity covariate(s), found {}",
                    ind.id,
                    intensity_dim,
                    ind.intensity_covariates.len()
                ));
            }
            if ind.zero_covariates.len() != zero_dim {
                violations.push(format!(
                    "individual {}: expected {} zero-inflation covariate(s), found {}",
                    ind.id,
                    zero_dim,
                    ind.zero_covariates.len()
                ));
            }
            if ind.stratum >= num_strata {
                violations.push(format!(
                    "individual {}: stratum {} out of range (strata: {})",
                    ind.id,
                    ind.stratum + 1,
                    num_strata
                ));
            }
        }
        if !violations.is_empty() {
            return Err(Error::InvalidData(violations));
        }
        let time_horizon = individuals
            .iter()
            .map(|i| i.follow_up_end)
            .fold(f64::NEG_INFINITY, f64::max);
        Ok(Self {
            individuals,
            intensity_dim,
            zero_dim,
            num_strata,
            time_horizon,
        })
    }

    pub fn individuals(&self) -> &[Individual] {
        &self.individuals
    }

    pub fn len(&self) -> usize {
        self.individuals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.individuals.is_empty()
    }

    /// Intensity covariate dimension p.
    pub fn intensity_dim(&self) -> usize {
        self.intensity_dim
    }

    /// Zero-inflation covariate dimension q.
    pub fn zero_dim(&self) -> usize {
        self.zero_dim
    }

    /// Number of spatial strata L.
    pub fn num_strata(&self) -> usize {
        self.num_strata
    }

    /// ζ: maximum follow-up end across individuals, recomputed at
    /// construction. Also the support bound for polynomial baselines.
    pub fn time_horizon(&self) -> f64 {
        self.time_horizon
    }

    pub fn total_events(&self) -> usize {
        self.individuals.iter().map(|i| i.event_count()).sum()
    }
}

/// Areal adjacency structure: nodes 0..L with undirected edges.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpatialGraph {
    num_areas: usize,
    edges: Vec<(usize, usize)>,
    neighbor_count: Vec<usize>,
}

impl SpatialGraph {
    /// Builds the graph from undirected edges. Self-loops and duplicate
    /// edges are rejected; edges are stored as (min, max) pairs in sorted
    /// order so the representation is canonical.
    pub fn new(num_areas: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut normalized: Vec<(usize, usize)> = Vec::new();
        for (a, b) in edges {
            if a == b {
                return Err(Error::InvalidData(vec![format!(
                    "self-loop on area {}",
                    a + 1
                )]));
            }
            if a >= num_areas || b >= num_areas {
                return Err(Error::InvalidData(vec![format!(
                    "edge ({}, {}) references an area outside 1..{}",
                    a + 1,
                    b + 1,
                    num_areas
                )]));
            }
            normalized.push((a.min(b), a.max(b)));
        }
        normalized.sort_unstable();
        if normalized.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidData(vec!["duplicate edge".to_string()]));
        }
        let mut neighbor_count = vec![0usize; num_areas];
        for &(a, b) in &normalized {
            neighbor_count[a] += 1;
            neighbor_count[b] += 1;
        }
        Ok(Self {
            num_areas,
            edges: normalized,
            neighbor_count,
        })
    }

    /// Rectangular lattice with rook adjacency, the synthetic stand-in for
    /// areal maps in simulations.
    pub fn lattice(rows: usize, cols: usize) -> Self {
        let mut edges = Vec::new();
        let idx = |r: usize, c: usize| r * cols + c;
        for r in 0..rows {
            for c in 0..cols {
                if c + 1 < cols {
                    edges.push((idx(r, c), idx(r, c + 1)));
                }
                if r + 1 < rows {
                    edges.push((idx(r, c), idx(r + 1, c)));
                }
            }
        }
        Self::new(rows * cols, edges).expect("lattice edges are valid")
    }

    pub fn num_areas(&self) -> usize {
        self.num_areas
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    /// Degree a_{l+} of each area.
    pub fn neighbor_count(&self) -> &[usize] {
        &self.neighbor_count
    }

    /// Component label for every node (labels are 0..num_components).
    pub fn connected_components(&self) -> Vec<usize> {
        let mut adj = vec![Vec::new(); self.num_areas];
        for &(a, b) in &self.edges {
            adj[a].push(b);
            adj[b].push(a);
        }
        let mut label = vec![usize::MAX; self.num_areas];
        let mut next = 0;
        let mut stack = Vec::new();
        for start in 0..self.num_areas {
            if label[start] != usize::MAX {
                continue;
            }
            stack.push(start);
            label[start] = next;
            while let Some(v) = stack.pop() {
                for &u in &adj[v] {
                    if label[u] == usize::MAX {
                        label[u] = next;
                        stack.push(u);
                    }
                }
            }
            next += 1;
        }
        label
    }

    pub fn num_components(&self) -> usize {
        self.connected_components()
            .iter()
            .max()
            .map_or(0, |&m| m + 1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ind(id: &str, y: f64, events: &[f64]) -> Individual {
        Individual {
            id: id.to_string(),
            follow_up_end: y,
            event_times: events.to_vec(),
            intensity_covariates: vec![1.0, -0.5],
            zero_covariates: vec![0.3],
            stratum: 0,
        }
    }

    #[test]
    fn canonicalizes_event_order() {
        let ds = RecurrentDataset::new(vec![ind("a", 1.0, &[0.5, 0.2])], 2, 1, 1).unwrap();
        assert_eq!(ds.individuals()[0].event_times, vec![0.2, 0.5]);
    }

    #[test]
    fn rejects_event_beyond_follow_up() {
        let err = RecurrentDataset::new(vec![ind("a", 7.0, &[7.1])], 2, 1, 1).unwrap_err();
        match err {
            Error::InvalidData(v) => assert!(v[0].contains("event beyond follow-up")),
            other => panic!("unexpected error {other}"),
        }
    }

    #[test]
    fn rejects_event_at_time_zero() {
        let err = RecurrentDataset::new(vec![ind("a", 1.0, &[0.0])], 2, 1, 1).unwrap_err();
        match err {
            Error::InvalidData(v) => assert!(v[0].contains("at or before time zero")),
            other => panic!("unexpected error {other}"),
        }
    }

    #[test]
    fn collects_all_violations() {
        let mut bad = ind("a", -1.0, &[0.5]);
        bad.stratum = 5;
        bad.intensity_covariates = vec![0.0];
        let err = RecurrentDataset::new(vec![bad], 2, 1, 1).unwrap_err();
        match err {
            Error::InvalidData(v) => assert!(v.len() >= 3, "got {v:?}"),
            other => panic!("unexpected error {other}"),
        }
    }

    #[test]
    fn validation_is_idempotent_and_recomputes_horizon() {
        let inds = vec![ind("a", 1.0, &[0.4]), ind("b", 3.5, &[]), ind("c", 2.0, &[1.0, 1.5])];
        let ds = RecurrentDataset::new(inds, 2, 1, 1).unwrap();
        assert_eq!(ds.time_horizon(), 3.5);
        let again =
            RecurrentDataset::new(ds.individuals().to_vec(), 2, 1, 1).unwrap();
        assert_eq!(ds, again);
    }

    #[test]
    fn graph_rejects_self_loops_and_duplicates() {
        assert!(SpatialGraph::new(3, vec![(0, 0)]).is_err());
        assert!(SpatialGraph::new(3, vec![(0, 1), (1, 0)]).is_err());
        assert!(SpatialGraph::new(2, vec![(0, 5)]).is_err());
    }

    #[test]
    fn graph_degrees_and_components() {
        let g = SpatialGraph::new(4, vec![(0, 1), (1, 2)]).unwrap();
        assert_eq!(g.neighbor_count(), &[1, 2, 1, 0]);
        let comp = g.connected_components();
        assert_eq!(comp[0], comp[1]);
        assert_eq!(comp[1], comp[2]);
        assert_ne!(comp[0], comp[3]);
        assert_eq!(g.num_components(), 2);
    }

    #[test]
    fn lattice_shape() {
        let g = SpatialGraph::lattice(3, 4);
        assert_eq!(g.num_areas(), 12);
        // 3*(4-1) horizontal + 4*(3-1) vertical
        assert_eq!(g.edges().len(), 9 + 8);
        assert_eq!(g.num_components(), 1);
    }
}
