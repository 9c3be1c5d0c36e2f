//! Selection and scheduling algorithms: greedy in-cluster selection,
//! the 49-class well-separated grid decomposition, affectance filtering
//! with a robustness partition, and the log-scale length wrapper that
//! stitches equilength classes together.
//!
//! Everything here is a pure function of a gain table (plus geometry for
//! the grid decomposition) and returns sets that pass `is_feasible` under
//! the very table they were computed from; tests recheck that promise.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{GainTable, Instance, LinkId};

// ---- result types ---------------------------------------------------------

/// Disjoint feasible bins covering an input set.
#[derive(Clone, Debug, Serialize)]
pub struct Partition {
    /// Feasible bins, in creation order.
    pub bins: Vec<Vec<LinkId>>,
    /// Links that fit no bin. First-fit always opens a fresh bin and a
    /// singleton is always feasible, so this stays empty; it is kept so a
    /// future placement rule with a hard bin cap has somewhere to report.
    pub leftover: Vec<LinkId>,
    /// Expected bin count `⌈2β/β′⌉` for the supplied thresholds.
    pub budget: usize,
    /// Number of links that landed in bins past the budget.
    pub overflow: usize,
}

/// One sender-grid cell and the links whose senders fall in it.
#[derive(Clone, Debug, Serialize)]
pub struct Cluster {
    pub cell: (i64, i64),
    pub links: Vec<LinkId>,
}

/// All clusters sharing one `(cell.x mod 7, cell.y mod 7)` residue.
#[derive(Clone, Debug, Serialize)]
pub struct ClassGroup {
    pub class: (u8, u8),
    pub clusters: Vec<Cluster>,
}

/// Grid decomposition of an equilength link set: cells of side `ℓ/2`
/// anchored at the senders' bounding-box corner, grouped into ≤ 49
/// residue classes. Within a class, links of different clusters are
/// separated by more than `ℓ` in the min of the two cross distances.
#[derive(Clone, Debug, Serialize)]
pub struct ClusterDecomposition {
    pub cell_side: f64,
    pub min_length: f64,
    pub classes: Vec<ClassGroup>,
}

/// Diagnostics accumulated by the selection pipeline.
#[derive(Clone, Debug, Default, Serialize)]
pub struct StageCounters {
    /// Greedy candidate-set size per cluster, in cluster order.
    pub s_sizes: Vec<usize>,
    /// Threshold constant used: `S̄` for a bare cluster selection, the
    /// measured interference constant `c` for the pipelines.
    pub threshold: f64,
    /// Links dropped between the candidate union and the partition input.
    pub filtered: usize,
    /// Bins produced by the robustness partition (0 when it was skipped).
    pub bins: usize,
    /// Winning residue class, when a grid decomposition was involved.
    pub class: Option<(u8, u8)>,
}

/// A selected feasible set together with the candidate set it was carved
/// from and the pipeline diagnostics.
#[derive(Clone, Debug, Serialize)]
pub struct SelectionResult {
    pub selected: Vec<LinkId>,
    pub candidates: Vec<LinkId>,
    pub counters: StageCounters,
}

impl SelectionResult {
    fn empty() -> Self {
        SelectionResult {
            selected: Vec::new(),
            candidates: Vec::new(),
            counters: StageCounters::default(),
        }
    }
}

// ---- robustness partition -------------------------------------------------

/// Splits a set with bounded affectance (`a_S(j) ≤ 1/β′` for all members)
/// into feasible-at-`β` bins by first-fit over links in nonincreasing
/// signal order (ties by id). The expected bin count is `⌈2β/β′⌉`; links
/// forced past that budget still get a bin and are tallied in `overflow`.
pub fn robust_partition(
    gains: &GainTable,
    set: &[LinkId],
    beta: f64,
    beta_prime: f64,
) -> Result<Partition> {
    // Precondition, with a hair of relative slack so callers may measure
    // β′ from the very sums we recompute here.
    let cap = (1.0 + 1e-9) / beta_prime;
    for &j in set {
        let a = gains.set_affectance(set, j);
        if a > cap {
            return Err(Error::Contract(format!(
                "robust_partition: link {j} has set affectance {a} > 1/beta' = {}",
                1.0 / beta_prime
            )));
        }
    }

    let mut order: Vec<LinkId> = set.to_vec();
    order.sort_by(|&a, &b| {
        gains
            .signal(b)
            .partial_cmp(&gains.signal(a))
            .expect("signals are finite")
            .then(a.cmp(&b))
    });

    let inv_beta = 1.0 / beta;
    let budget = (2.0 * beta / beta_prime).ceil() as usize;

    // Per bin: members plus each member's in-bin affectance, updated
    // incrementally on insertion.
    let mut members: Vec<Vec<LinkId>> = Vec::new();
    let mut aff: Vec<Vec<f64>> = Vec::new();
    let mut overflow = 0usize;
    for &x in &order {
        let mut placed = None;
        for (b, bin) in members.iter().enumerate() {
            let on_x: f64 = bin.iter().map(|&j| gains.affectance(j, x)).sum();
            let fits = on_x < inv_beta
                && bin
                    .iter()
                    .zip(aff[b].iter())
                    .all(|(&j, &a)| a + gains.affectance(x, j) < inv_beta);
            if fits {
                placed = Some((b, on_x));
                break;
            }
        }
        let (b, on_x) = placed.unwrap_or_else(|| {
            members.push(Vec::new());
            aff.push(Vec::new());
            (members.len() - 1, 0.0)
        });
        for (idx, &j) in members[b].iter().enumerate() {
            aff[b][idx] += gains.affectance(x, j);
        }
        members[b].push(x);
        aff[b].push(on_x);
        if b >= budget {
            overflow += 1;
        }
    }

    Ok(Partition {
        bins: members,
        leftover: Vec::new(),
        budget,
        overflow,
    })
}

// ---- in-cluster greedy selection -------------------------------------------

/// Greedy selection inside one cluster: walk links by nonincreasing
/// realized signal (ties by id) and admit link `i` to the candidate set
/// `S` when `signal(i) > 2β·|S|·s_bar`, with `|S|` counted before the
/// insertion. `s_bar` is the cluster's strongest medium-strength signal,
/// `P/ℓ^α` for the shortest length `ℓ` in the cluster. The returned
/// `selected` keeps the candidates whose in-set affectance is below `1/β`.
pub fn cluster_select(
    gains: &GainTable,
    cluster: &[LinkId],
    beta: f64,
    s_bar: f64,
) -> SelectionResult {
    if cluster.is_empty() {
        return SelectionResult::empty();
    }
    let mut order: Vec<LinkId> = cluster.to_vec();
    order.sort_by(|&a, &b| {
        gains
            .signal(b)
            .partial_cmp(&gains.signal(a))
            .expect("signals are finite")
            .then(a.cmp(&b))
    });

    let mut s: Vec<LinkId> = Vec::new();
    for &i in &order {
        if gains.signal(i) > 2.0 * beta * s.len() as f64 * s_bar {
            s.push(i);
        }
    }
    let selected: Vec<LinkId> = s
        .iter()
        .copied()
        .filter(|&i| gains.set_affectance(&s, i) < 1.0 / beta)
        .collect();

    let filtered = s.len() - selected.len();
    SelectionResult {
        selected,
        counters: StageCounters {
            s_sizes: vec![s.len()],
            threshold: s_bar,
            filtered,
            bins: 0,
            class: None,
        },
        candidates: s,
    }
}

// ---- well-separated grid decomposition --------------------------------------

/// Partitions an equilength link set (length spread strictly below 2) by
/// sender position: grid cells of side `ℓ/2` anchored at the senders'
/// bounding-box minimum corner, one cluster per nonempty cell, classes by
/// the cell coordinates mod 7. Links of different clusters within a class
/// then sit at least three minimum lengths apart sender-to-sender, which
/// keeps both cross distances above `ℓ`.
pub fn well_separated_partition(inst: &Instance, ids: &[LinkId]) -> Result<ClusterDecomposition> {
    if ids.is_empty() {
        return Ok(ClusterDecomposition {
            cell_side: 0.0,
            min_length: 0.0,
            classes: Vec::new(),
        });
    }
    let mut ids: Vec<LinkId> = ids.to_vec();
    ids.sort_unstable();
    for w in ids.windows(2) {
        if w[0] == w[1] {
            return Err(Error::Contract(format!("duplicate link id {}", w[0])));
        }
    }
    if let Some(&bad) = ids.iter().find(|&&i| i >= inst.len()) {
        return Err(Error::Contract(format!(
            "link id {bad} out of range for instance of {} links",
            inst.len()
        )));
    }

    let min_len = ids
        .iter()
        .map(|&i| inst.links()[i].length())
        .fold(f64::INFINITY, f64::min);
    let max_len = ids
        .iter()
        .map(|&i| inst.links()[i].length())
        .fold(0.0, f64::max);
    if max_len / min_len >= 2.0 {
        return Err(Error::Contract(format!(
            "equilength precondition: length spread {} is not below 2",
            max_len / min_len
        )));
    }

    let side = min_len / 2.0;
    let ax = ids
        .iter()
        .map(|&i| inst.links()[i].sender.x)
        .fold(f64::INFINITY, f64::min);
    let ay = ids
        .iter()
        .map(|&i| inst.links()[i].sender.y)
        .fold(f64::INFINITY, f64::min);

    // class -> cell -> links; BTreeMaps give a canonical traversal order.
    type CellMap = std::collections::BTreeMap<(i64, i64), Vec<LinkId>>;
    let mut classes: std::collections::BTreeMap<(u8, u8), CellMap> =
        std::collections::BTreeMap::new();
    for &i in &ids {
        let s = inst.links()[i].sender;
        let cell = (
            ((s.x - ax) / side).floor() as i64,
            ((s.y - ay) / side).floor() as i64,
        );
        let class = (cell.0.rem_euclid(7) as u8, cell.1.rem_euclid(7) as u8);
        classes.entry(class).or_default().entry(cell).or_default().push(i);
    }

    Ok(ClusterDecomposition {
        cell_side: side,
        min_length: min_len,
        classes: classes
            .into_iter()
            .map(|(class, cells)| ClassGroup {
                class,
                clusters: cells
                    .into_iter()
                    .map(|(cell, links)| Cluster { cell, links })
                    .collect(),
            })
            .collect(),
    })
}

// ---- equilength pipeline ----------------------------------------------------

/// Full pipeline for an equilength subset: decompose into well-separated
/// classes, run the greedy selection per cluster, union the candidates,
/// filter by realized affectance against twice the measured interference
/// constant `c`, partition the survivors robustly at `β′ = 1/(2c)`, and
/// keep the heaviest bin. The best class (by total link weight, ties to
/// the earlier class) wins.
///
/// `c` is measured from the class's own candidate union as the largest
/// per-link sum of medium-strength (unshadowed) interference over the
/// realized signal — the quantity the filter is designed around.
pub fn equilength_capacity(
    inst: &Instance,
    ids: &[LinkId],
    gains: &GainTable,
    beta: f64,
) -> Result<SelectionResult> {
    let decomp = well_separated_partition(inst, ids)?;
    if decomp.classes.is_empty() {
        return Ok(SelectionResult::empty());
    }
    let gpl = inst.gpl_gains()?;

    let mut best: Option<(f64, SelectionResult)> = None;
    for group in &decomp.classes {
        // Greedy candidates, cluster by cluster.
        let mut s_sizes = Vec::with_capacity(group.clusters.len());
        let mut union: Vec<LinkId> = Vec::new();
        for cluster in &group.clusters {
            let s_bar = cluster
                .links
                .iter()
                .map(|&i| gpl.signal(i))
                .fold(0.0, f64::max);
            let picked = cluster_select(gains, &cluster.links, beta, s_bar);
            s_sizes.push(picked.candidates.len());
            union.extend(picked.candidates);
        }
        union.sort_unstable();

        let result = if union.len() <= 1 {
            // No cross interference to measure; the candidate is feasible
            // on its own, so skip the filter and the partition outright.
            SelectionResult {
                selected: union.clone(),
                candidates: union,
                counters: StageCounters {
                    s_sizes,
                    threshold: 0.0,
                    filtered: 0,
                    bins: 0,
                    class: Some(group.class),
                },
            }
        } else {
            let c = union
                .iter()
                .map(|&j| {
                    union
                        .iter()
                        .filter(|&&i| i != j)
                        .map(|&i| gpl.interference(i, j) / gains.signal(j))
                        .sum::<f64>()
                })
                .fold(0.0, f64::max);
            let kept: Vec<LinkId> = union
                .iter()
                .copied()
                .filter(|&j| gains.set_affectance(&union, j) < 2.0 * c)
                .collect();
            let part = robust_partition(gains, &kept, beta, 1.0 / (2.0 * c))?;
            let selected = part
                .bins
                .iter()
                .max_by_key(|bin| bin.len())
                .cloned()
                .unwrap_or_default();
            SelectionResult {
                selected,
                counters: StageCounters {
                    s_sizes,
                    threshold: c,
                    filtered: union.len() - kept.len(),
                    bins: part.bins.len(),
                    class: Some(group.class),
                },
                candidates: union,
            }
        };

        let weight: f64 = result
            .selected
            .iter()
            .map(|&i| inst.links()[i].weight)
            .sum();
        if best.as_ref().is_none_or(|(w, _)| weight > *w) {
            best = Some((weight, result));
        }
    }
    Ok(best.expect("at least one class").1)
}

/// Capacity selection for arbitrary length spreads: split the instance
/// into length-doubling classes, run the equilength pipeline on each, and
/// return the heaviest result (ties to the shorter-length class).
pub fn general_capacity(inst: &Instance, gains: &GainTable, beta: f64) -> Result<SelectionResult> {
    let mut best: Option<(f64, SelectionResult)> = None;
    for ids in inst.length_partition() {
        let result = equilength_capacity(inst, &ids, gains, beta)?;
        let weight: f64 = result
            .selected
            .iter()
            .map(|&i| inst.links()[i].weight)
            .sum();
        if best.as_ref().is_none_or(|(w, _)| weight > *w) {
            best = Some((weight, result));
        }
    }
    Ok(best.map_or_else(SelectionResult::empty, |(_, r)| r))
}
