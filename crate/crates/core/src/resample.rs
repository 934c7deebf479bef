//! Data-level rebalancing in a fixed-dimension vector space.
//!
//! All samplers are deterministic given [`ResampleConfig::seed`]. Each one
//! draws from a single sequential ChaCha8 stream in a documented order so
//! results can be replayed independently:
//!
//! - random oversampling: per class in index order, one `gen_range(0..n_c)`
//!   per replica;
//! - random undersampling: per class in index order, a partial Fisher-Yates
//!   shuffle (`gen_range(i..n_c)` for `i in 0..target`);
//! - SMOTE: per class in index order, per synthetic sample the base
//!   (`gen_range(0..n_c)`), the neighbor (`gen_range(0..k_i)`) and the gap
//!   (`gen::<f64>()`);
//! - ADASYN: per class, per member in order, per synthetic sample the
//!   neighbor and the gap.
//!
//! Class members are always enumerated in dataset order.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::seeded;

/// Where a row of a [`VectorDataset`] came from. `source` values refer to
/// the caller's original row ids (for example document indices).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Provenance {
    Original { source: usize },
    /// Exact copy made by random oversampling.
    Replica { source: usize },
    /// `base + gap * (neighbor - base)`.
    Interpolated { base: usize, neighbor: usize, gap: f64 },
}

impl Provenance {
    pub fn is_synthetic(&self) -> bool {
        !matches!(self, Provenance::Original { .. })
    }

    /// Every original row id this row was derived from.
    pub fn sources(&self) -> Vec<usize> {
        match *self {
            Provenance::Original { source } | Provenance::Replica { source } => vec![source],
            Provenance::Interpolated { base, neighbor, .. } => vec![base, neighbor],
        }
    }
}

/// Labeled points, row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VectorDataset {
    dim: usize,
    points: Vec<f64>,
    labels: Vec<usize>,
    provenance: Vec<Provenance>,
    class_names: Vec<String>,
}

impl VectorDataset {
    /// Original rows; row `i` gets `source = i`.
    pub fn new(rows: Vec<Vec<f64>>, labels: Vec<usize>, class_names: Vec<String>) -> Result<Self> {
        let sources = (0..rows.len()).collect();
        Self::with_sources(rows, labels, sources, class_names)
    }

    pub fn with_sources(
        rows: Vec<Vec<f64>>,
        labels: Vec<usize>,
        sources: Vec<usize>,
        class_names: Vec<String>,
    ) -> Result<Self> {
        if rows.len() != labels.len() || rows.len() != sources.len() {
            return Err(Error::DimensionMismatch {
                expected: rows.len(),
                found: labels.len().min(sources.len()),
            });
        }
        let dim = rows.first().map_or(0, Vec::len);
        let mut points = Vec::with_capacity(rows.len() * dim);
        for r in &rows {
            if r.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: r.len(),
                });
            }
            points.extend_from_slice(r);
        }
        if let Some(&bad) = labels.iter().find(|&&l| l >= class_names.len()) {
            return Err(Error::invalid(format!(
                "label {bad} out of range for {} classes",
                class_names.len()
            )));
        }
        Ok(Self {
            dim,
            points,
            labels,
            provenance: sources
                .into_iter()
                .map(|source| Provenance::Original { source })
                .collect(),
            class_names,
        })
    }

    /// Class names `"0"`, `"1"`, ... for quick construction.
    pub fn numbered(rows: Vec<Vec<f64>>, labels: Vec<usize>) -> Result<Self> {
        let k = labels.iter().max().map_or(0, |m| m + 1);
        Self::new(rows, labels, (0..k).map(|c| c.to_string()).collect())
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn num_classes(&self) -> usize {
        self.class_names.len()
    }

    pub fn class_names(&self) -> &[String] {
        &self.class_names
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i * self.dim..(i + 1) * self.dim]
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn provenance(&self) -> &[Provenance] {
        &self.provenance
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut c = vec![0; self.num_classes()];
        for &l in &self.labels {
            c[l] += 1;
        }
        c
    }

    /// Row indices of each class, in dataset order.
    pub fn class_members(&self) -> Vec<Vec<usize>> {
        let mut m = vec![Vec::new(); self.num_classes()];
        for (i, &l) in self.labels.iter().enumerate() {
            m[l].push(i);
        }
        m
    }

    fn push(&mut self, point: &[f64], label: usize, provenance: Provenance) {
        self.points.extend_from_slice(point);
        self.labels.push(label);
        self.provenance.push(provenance);
    }

    fn keep_rows(&self, keep: &[bool]) -> VectorDataset {
        let mut out = VectorDataset {
            dim: self.dim,
            points: Vec::new(),
            labels: Vec::new(),
            provenance: Vec::new(),
            class_names: self.class_names.clone(),
        };
        for i in (0..self.len()).filter(|&i| keep[i]) {
            out.push(self.point(i), self.labels[i], self.provenance[i]);
        }
        out
    }

    fn original_source(&self, row: usize) -> Result<usize> {
        match self.provenance[row] {
            Provenance::Original { source } => Ok(source),
            _ => Err(Error::invalid(format!(
                "row {row} is synthetic; oversamplers only interpolate original rows"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TargetStrategy {
    /// Oversampling grows every class to the largest class count;
    /// undersampling shrinks every class to the smallest.
    ToMax,
    /// Desired minority / majority ratio after resampling: oversampling
    /// targets `round(r * max)`, undersampling targets `round(min / r)`.
    Ratio(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ResampleConfig {
    pub k_neighbors: usize,
    pub target: TargetStrategy,
    pub adasyn_beta: f64,
    pub seed: u64,
}

impl Default for ResampleConfig {
    fn default() -> Self {
        Self {
            k_neighbors: 5,
            target: TargetStrategy::ToMax,
            adasyn_beta: 1.0,
            seed: 0,
        }
    }
}

impl ResampleConfig {
    pub fn validate(&self) -> Result<()> {
        if self.k_neighbors < 1 {
            return Err(Error::invalid("k_neighbors must be at least 1"));
        }
        if let TargetStrategy::Ratio(r) = self.target {
            if !(r > 0.0 && r.is_finite()) {
                return Err(Error::invalid("target ratio must be positive"));
            }
        }
        if !(self.adasyn_beta > 0.0 && self.adasyn_beta <= 1.0) {
            return Err(Error::invalid("adasyn_beta must lie in (0, 1]"));
        }
        Ok(())
    }

    fn oversample_target(&self, counts: &[usize]) -> usize {
        let max = counts.iter().copied().max().unwrap_or(0);
        match self.target {
            TargetStrategy::ToMax => max,
            TargetStrategy::Ratio(r) => (r * max as f64).round() as usize,
        }
    }

    fn undersample_target(&self, counts: &[usize]) -> usize {
        let min = counts.iter().copied().filter(|&c| c > 0).min().unwrap_or(0);
        match self.target {
            TargetStrategy::ToMax => min,
            TargetStrategy::Ratio(r) => (min as f64 / r).round() as usize,
        }
    }
}

/// One interpolated point and how it was made.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSample {
    pub point: Vec<f64>,
    pub label: usize,
    /// Row index in the input dataset.
    pub base_index: usize,
    /// Row index in the input dataset.
    pub neighbor_index: usize,
    pub gap: f64,
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// k nearest neighbors of each row of `points` (row-major, `dim` columns)
/// under Euclidean distance, self excluded, ties broken by lower index.
///
/// With `restrict_to`, both queries and candidates are limited to those
/// rows and the result is aligned with `restrict_to`; indices in the result
/// are always row indices. Fewer than `k` candidates yields all of them.
pub fn knn_indices(
    points: &[f64],
    dim: usize,
    k: usize,
    restrict_to: Option<&[usize]>,
) -> Result<Vec<Vec<usize>>> {
    if k < 1 {
        return Err(Error::invalid("k must be at least 1"));
    }
    let n = points.len().checked_div(dim).unwrap_or(0);
    let all: Vec<usize>;
    let rows = match restrict_to {
        Some(r) => r,
        None => {
            all = (0..n).collect();
            &all
        }
    };
    if rows.is_empty() || n == 0 {
        return Err(Error::Empty("nearest-neighbor search over zero points".into()));
    }
    let row = |i: usize| &points[i * dim..(i + 1) * dim];
    let mut cand: Vec<(f64, usize)> = Vec::with_capacity(rows.len());
    Ok(rows
        .iter()
        .map(|&q| {
            cand.clear();
            let qp = row(q);
            cand.extend(
                rows.iter()
                    .filter(|&&j| j != q)
                    .map(|&j| (sq_dist(qp, row(j)), j)),
            );
            let cmp = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
            let take = k.min(cand.len());
            if take < cand.len() {
                cand.select_nth_unstable_by(take, cmp);
            }
            let mut top = cand[..take].to_vec();
            top.sort_by(cmp);
            top.into_iter().map(|(_, j)| j).collect()
        })
        .collect())
}

/// Grows each class below the target by uniform draws with replacement.
/// Replicas are appended after the originals, class by class.
pub fn random_oversample(ds: &VectorDataset, cfg: &ResampleConfig) -> Result<VectorDataset> {
    cfg.validate()?;
    let counts = ds.class_counts();
    let target = cfg.oversample_target(&counts);
    let members = ds.class_members();
    let mut rng = seeded(cfg.seed);
    let mut out = ds.clone();
    for (c, m) in members.iter().enumerate() {
        if m.is_empty() || m.len() >= target {
            continue;
        }
        for _ in m.len()..target {
            let row = m[rng.gen_range(0..m.len())];
            let source = ds.original_source(row)?;
            out.push(ds.point(row), c, Provenance::Replica { source });
        }
    }
    Ok(out)
}

/// Shrinks each class above the target by uniform sampling without
/// replacement. Survivors keep their relative order.
pub fn random_undersample(ds: &VectorDataset, cfg: &ResampleConfig) -> Result<VectorDataset> {
    cfg.validate()?;
    let counts = ds.class_counts();
    let target = cfg.undersample_target(&counts);
    let mut rng = seeded(cfg.seed);
    let mut keep = vec![true; ds.len()];
    for m in ds.class_members() {
        if m.len() <= target {
            continue;
        }
        let mut pool = m.clone();
        for i in 0..target {
            let j = rng.gen_range(i..pool.len());
            pool.swap(i, j);
        }
        for &dropped in &pool[target..] {
            keep[dropped] = false;
        }
    }
    Ok(ds.keep_rows(&keep))
}

fn interpolate(base: &[f64], neighbor: &[f64], gap: f64) -> Vec<f64> {
    base.iter()
        .zip(neighbor)
        .map(|(b, n)| b + gap * (n - b))
        .collect()
}

fn too_few(ds: &VectorDataset, class: usize, count: usize) -> Error {
    Error::TooFewSamples {
        class: ds.class_names[class].clone(),
        count,
        required: 2,
    }
}

/// SMOTE: every class below the target (absent classes excepted) is grown
/// with points interpolated towards one of a random member's `k` nearest
/// same-class neighbors.
pub fn smote(ds: &VectorDataset, cfg: &ResampleConfig) -> Result<(VectorDataset, Vec<SyntheticSample>)> {
    cfg.validate()?;
    let counts = ds.class_counts();
    let target = cfg.oversample_target(&counts);
    let members = ds.class_members();
    let mut rng = seeded(cfg.seed);
    let mut out = ds.clone();
    let mut synthetic = Vec::new();
    for (c, m) in members.iter().enumerate() {
        if m.is_empty() || m.len() >= target {
            continue;
        }
        if m.len() < 2 {
            return Err(too_few(ds, c, m.len()));
        }
        let neighbors = knn_indices(ds.points(), ds.dim(), cfg.k_neighbors, Some(m))?;
        for _ in m.len()..target {
            let b = rng.gen_range(0..m.len());
            let nbrs = &neighbors[b];
            let nb = nbrs[rng.gen_range(0..nbrs.len())];
            let gap: f64 = rng.gen();
            let base = m[b];
            let s = SyntheticSample {
                point: interpolate(ds.point(base), ds.point(nb), gap),
                label: c,
                base_index: base,
                neighbor_index: nb,
                gap,
            };
            out.push(
                &s.point,
                c,
                Provenance::Interpolated {
                    base: ds.original_source(base)?,
                    neighbor: ds.original_source(nb)?,
                    gap,
                },
            );
            synthetic.push(s);
        }
    }
    Ok((out, synthetic))
}

/// Per-class ADASYN allocation, exposed for inspection.
#[derive(Debug, Clone, PartialEq)]
pub struct AdasynPlan {
    pub class: usize,
    /// Class members (row indices) in dataset order.
    pub members: Vec<usize>,
    /// Fraction of other-class rows among each member's neighbors.
    pub ratios: Vec<f64>,
    /// Total synthetic samples for the class.
    pub total: usize,
    /// Synthetic samples per member; sums to `total`.
    pub per_member: Vec<usize>,
}

/// Computes ADASYN allocations for every minority class.
pub fn adasyn_plan(ds: &VectorDataset, cfg: &ResampleConfig) -> Result<Vec<AdasynPlan>> {
    cfg.validate()?;
    let counts = ds.class_counts();
    let max = counts.iter().copied().max().unwrap_or(0);
    let mut plans = Vec::new();
    let mut all_nbrs: Option<Vec<Vec<usize>>> = None;
    for (c, m) in ds.class_members().into_iter().enumerate() {
        if m.is_empty() || m.len() >= max {
            continue;
        }
        let total = (cfg.adasyn_beta * (max - m.len()) as f64).round() as usize;
        if total == 0 {
            continue;
        }
        if m.len() < 2 {
            return Err(too_few(ds, c, m.len()));
        }
        if all_nbrs.is_none() {
            all_nbrs = Some(knn_indices(ds.points(), ds.dim(), cfg.k_neighbors, None)?);
        }
        let all_nbrs = all_nbrs.as_ref().expect("computed above");
        let ratios: Vec<f64> = m
            .iter()
            .map(|&i| {
                let nb = &all_nbrs[i];
                let other = nb.iter().filter(|&&j| ds.labels[j] != c).count();
                other as f64 / nb.len() as f64
            })
            .collect();
        let sum: f64 = ratios.iter().sum();
        let weights: Vec<f64> = if sum > 0.0 {
            ratios.iter().map(|r| r / sum).collect()
        } else {
            vec![1.0 / m.len() as f64; m.len()]
        };
        let per_member = crate::corpus::largest_remainder(&weights, total);
        plans.push(AdasynPlan {
            class: c,
            members: m,
            ratios,
            total,
            per_member,
        });
    }
    Ok(plans)
}

/// ADASYN: like SMOTE, but each minority member receives synthetic samples
/// in proportion to how many of its `k` nearest neighbors (over all
/// classes) belong to other classes.
pub fn adasyn(ds: &VectorDataset, cfg: &ResampleConfig) -> Result<(VectorDataset, Vec<SyntheticSample>)> {
    let plans = adasyn_plan(ds, cfg)?;
    let mut rng = seeded(cfg.seed);
    let mut out = ds.clone();
    let mut synthetic = Vec::new();
    for plan in &plans {
        let same = knn_indices(ds.points(), ds.dim(), cfg.k_neighbors, Some(&plan.members))?;
        for (pos, &base) in plan.members.iter().enumerate() {
            for _ in 0..plan.per_member[pos] {
                let nbrs = &same[pos];
                let nb = nbrs[rng.gen_range(0..nbrs.len())];
                let gap: f64 = rng.gen();
                let s = SyntheticSample {
                    point: interpolate(ds.point(base), ds.point(nb), gap),
                    label: plan.class,
                    base_index: base,
                    neighbor_index: nb,
                    gap,
                };
                out.push(
                    &s.point,
                    plan.class,
                    Provenance::Interpolated {
                        base: ds.original_source(base)?,
                        neighbor: ds.original_source(nb)?,
                        gap,
                    },
                );
                synthetic.push(s);
            }
        }
    }
    Ok((out, synthetic))
}

/// A mutual-nearest-neighbor pair with different labels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TomekLink {
    /// Lower row index of the pair.
    pub a: usize,
    pub b: usize,
    /// The row deleted for this link, if any.
    pub removed: Option<usize>,
}

/// Finds Tomek links and deletes, for each link, the member whose class
/// has the strictly larger count. Counts are taken once, before any
/// deletion; equal counts delete nothing.
pub fn tomek_links(ds: &VectorDataset) -> Result<(VectorDataset, Vec<TomekLink>)> {
    if ds.len() < 2 {
        return Err(Error::Empty("Tomek links need at least two samples".into()));
    }
    let nn = knn_indices(ds.points(), ds.dim(), 1, None)?;
    let counts = ds.class_counts();
    let mut keep = vec![true; ds.len()];
    let mut links = Vec::new();
    for a in 0..ds.len() {
        let b = nn[a][0];
        if b <= a || nn[b][0] != a || ds.labels[a] == ds.labels[b] {
            continue;
        }
        let (ca, cb) = (counts[ds.labels[a]], counts[ds.labels[b]]);
        let removed = match ca.cmp(&cb) {
            std::cmp::Ordering::Greater => Some(a),
            std::cmp::Ordering::Less => Some(b),
            std::cmp::Ordering::Equal => None,
        };
        if let Some(r) = removed {
            keep[r] = false;
        }
        links.push(TomekLink { a, b, removed });
    }
    Ok((ds.keep_rows(&keep), links))
}

/// SMOTE followed by Tomek-link cleaning.
pub fn smote_tomek(ds: &VectorDataset, cfg: &ResampleConfig) -> Result<VectorDataset> {
    let (over, _) = smote(ds, cfg)?;
    let (cleaned, _) = tomek_links(&over)?;
    Ok(cleaned)
}
