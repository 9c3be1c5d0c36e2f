//! Physical link model: geometry, received powers, affectance, feasibility.
//!
//! A link is a sender/receiver pair in the plane. Under geometric pathloss
//! every sender transmits at the common power `P` and the power received at
//! distance `d` is `P / d^alpha`. A set of links transmitting together is
//! feasible when every member's signal-to-interference ratio clears the
//! threshold `beta`; the equivalent additive form used everywhere in this
//! crate is the *affectance* `a_i(j) = I_ij / S_j`, the interference link
//! `i` inflicts on link `j` normalized by `j`'s own signal. A set `S` is
//! feasible iff `sum_{i in S\{j}} a_i(j) < 1/beta` for every `j in S`.
//!
//! Instances are serialized as JSON objects with a `params` block and a
//! flat `links` array (see [`Instance::from_json`]); readers reject
//! non-finite and negative values.

use serde::{Deserialize, Serialize};
use std::path::Path;

use crate::error::{Error, Result};

/// Links are addressed by their position in the instance.
pub type LinkId = usize;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn dist(self, other: Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

#[derive(Clone, Debug)]
pub struct Link {
    pub id: LinkId,
    pub sender: Point,
    pub receiver: Point,
    /// Optional demand weight; 1.0 when the instance is unweighted.
    pub weight: f64,
}

impl Link {
    pub fn new(id: LinkId, sender: Point, receiver: Point) -> Self {
        Link {
            id,
            sender,
            receiver,
            weight: 1.0,
        }
    }

    pub fn with_weight(mut self, weight: f64) -> Self {
        self.weight = weight;
        self
    }

    pub fn length(&self) -> f64 {
        self.sender.dist(self.receiver)
    }
}

/// Global model parameters: uniform transmit power, pathloss exponent,
/// SIR threshold.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Params {
    pub power: f64,
    pub alpha: f64,
    pub beta: f64,
}

impl Params {
    /// Requires `power > 0`, `alpha > 2`, `beta >= 1`, all finite.
    pub fn new(power: f64, alpha: f64, beta: f64) -> Result<Self> {
        if !(power.is_finite() && power > 0.0) {
            return Err(Error::Invalid(format!("power must be positive, got {power}")));
        }
        if !(alpha.is_finite() && alpha > 2.0) {
            return Err(Error::Invalid(format!("alpha must exceed 2, got {alpha}")));
        }
        if !(beta.is_finite() && beta >= 1.0) {
            return Err(Error::Invalid(format!("beta must be at least 1, got {beta}")));
        }
        Ok(Params { power, alpha, beta })
    }
}

/// A validated set of links plus the model parameters.
///
/// The link list may be empty; ids must equal list positions so that link
/// ids double as row indices into a [`GainTable`].
#[derive(Clone, Debug)]
pub struct Instance {
    params: Params,
    links: Vec<Link>,
}

impl Instance {
    pub fn new(params: Params, links: Vec<Link>) -> Result<Self> {
        for (pos, link) in links.iter().enumerate() {
            if link.id != pos {
                return Err(Error::Invalid(format!(
                    "link ids must be 0..n in order; position {pos} has id {}",
                    link.id
                )));
            }
            for v in [link.sender.x, link.sender.y, link.receiver.x, link.receiver.y] {
                if !v.is_finite() {
                    return Err(Error::Invalid(format!("link {pos}: non-finite coordinate")));
                }
            }
            if !(link.weight.is_finite() && link.weight >= 0.0) {
                return Err(Error::Invalid(format!(
                    "link {pos}: weight must be finite and non-negative, got {}",
                    link.weight
                )));
            }
            if link.length() <= 0.0 {
                return Err(Error::Invalid(format!("link {pos}: zero length")));
            }
        }
        Ok(Instance { params, links })
    }

    pub fn params(&self) -> Params {
        self.params
    }

    pub fn links(&self) -> &[Link] {
        &self.links
    }

    pub fn link(&self, i: LinkId) -> &Link {
        &self.links[i]
    }

    pub fn len(&self) -> usize {
        self.links.len()
    }

    pub fn is_empty(&self) -> bool {
        self.links.is_empty()
    }

    pub fn weights(&self) -> Vec<f64> {
        self.links.iter().map(|l| l.weight).collect()
    }

    pub fn min_length(&self) -> Option<f64> {
        self.links
            .iter()
            .map(Link::length)
            .min_by(f64::total_cmp)
    }

    /// Max/min length ratio; 1 for empty or single-link instances.
    pub fn length_ratio(&self) -> f64 {
        match (
            self.min_length(),
            self.links.iter().map(Link::length).max_by(f64::total_cmp),
        ) {
            (Some(min), Some(max)) => max / min,
            _ => 1.0,
        }
    }

    /// Expected (pathloss-only) gains: `signal[i] = P / len_i^alpha`,
    /// `interference[i][j] = P / d(sender_i, receiver_j)^alpha`.
    ///
    /// Fails if any sender coincides with a foreign receiver.
    pub fn gpl_gains(&self) -> Result<GainTable> {
        let n = self.links.len();
        let p = self.params.power;
        let alpha = self.params.alpha;
        let mut signal = Vec::with_capacity(n);
        let mut inter = vec![0.0; n * n];
        for (i, li) in self.links.iter().enumerate() {
            signal.push(p / li.length().powf(alpha));
            for (j, lj) in self.links.iter().enumerate() {
                let d = li.sender.dist(lj.receiver);
                if d <= 0.0 {
                    return Err(Error::DegenerateGeometry {
                        sender: i,
                        receiver: j,
                    });
                }
                inter[i * n + j] = p / d.powf(alpha);
            }
        }
        GainTable::from_parts(signal, inter)
    }

    /// Partition the link ids into classes of length ratio < 2, bucketing
    /// by `floor(log2(len / min_len))`. Classes come out ordered by bucket.
    pub fn length_partition(&self) -> Vec<Vec<LinkId>> {
        let min = match self.min_length() {
            Some(m) => m,
            None => return Vec::new(),
        };
        let mut buckets: Vec<(u32, Vec<LinkId>)> = Vec::new();
        for (i, link) in self.links.iter().enumerate() {
            let k = (link.length() / min).log2().floor() as u32;
            match buckets.binary_search_by_key(&k, |b| b.0) {
                Ok(pos) => buckets[pos].1.push(i),
                Err(pos) => buckets.insert(pos, (k, vec![i])),
            }
        }
        buckets.into_iter().map(|(_, ids)| ids).collect()
    }

    // ---- JSON instance files -----------------------------------------

    pub fn from_json(text: &str) -> Result<Self> {
        let wire: InstanceWire = serde_json::from_str(text)?;
        wire.try_into()
    }

    pub fn to_json(&self) -> String {
        let wire = InstanceWire::from(self);
        serde_json::to_string_pretty(&wire).expect("instance serialization cannot fail")
    }

    pub fn read_file(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn write_file(&self, path: &Path) -> Result<()> {
        Ok(std::fs::write(path, self.to_json() + "\n")?)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LinkWire {
    id: usize,
    sx: f64,
    sy: f64,
    rx: f64,
    ry: f64,
    #[serde(default = "one")]
    weight: f64,
}

fn one() -> f64 {
    1.0
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceWire {
    params: ParamsWire,
    links: Vec<LinkWire>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ParamsWire {
    power: f64,
    alpha: f64,
    beta: f64,
}

impl TryFrom<InstanceWire> for Instance {
    type Error = Error;

    fn try_from(wire: InstanceWire) -> Result<Self> {
        let params = Params::new(wire.params.power, wire.params.alpha, wire.params.beta)?;
        let links = wire
            .links
            .into_iter()
            .map(|l| {
                Link::new(l.id, Point::new(l.sx, l.sy), Point::new(l.rx, l.ry))
                    .with_weight(l.weight)
            })
            .collect();
        Instance::new(params, links)
    }
}

impl From<&Instance> for InstanceWire {
    fn from(inst: &Instance) -> Self {
        InstanceWire {
            params: ParamsWire {
                power: inst.params.power,
                alpha: inst.params.alpha,
                beta: inst.params.beta,
            },
            links: inst
                .links
                .iter()
                .map(|l| LinkWire {
                    id: l.id,
                    sx: l.sender.x,
                    sy: l.sender.y,
                    rx: l.receiver.x,
                    ry: l.receiver.y,
                    weight: l.weight,
                })
                .collect(),
        }
    }
}

/// Received powers for one realization: per-link signals plus the full
/// sender-at-foreign-receiver interference matrix (row = sender link,
/// column = receiving link). The diagonal is stored but never read by the
/// affectance operations.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GainTable {
    n: usize,
    signal: Vec<f64>,
    inter: Vec<f64>,
}

impl GainTable {
    /// `inter` is row-major `n x n`. All entries must be positive and finite.
    pub fn from_parts(signal: Vec<f64>, inter: Vec<f64>) -> Result<Self> {
        let n = signal.len();
        if inter.len() != n * n {
            return Err(Error::Invalid(format!(
                "interference matrix must be {n}x{n}, got {} entries",
                inter.len()
            )));
        }
        if let Some(v) = signal.iter().chain(inter.iter()).find(|v| !(v.is_finite() && **v > 0.0)) {
            return Err(Error::Invalid(format!("gain entries must be positive and finite, got {v}")));
        }
        Ok(GainTable { n, signal, inter })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn signal(&self, i: LinkId) -> f64 {
        self.signal[i]
    }

    /// Power from the sender of `i` at the receiver of `j`.
    pub fn interference(&self, i: LinkId, j: LinkId) -> f64 {
        self.inter[i * self.n + j]
    }

    /// `a_i(j) = I_ij / S_j` for `i != j`. Invariant under rescaling the
    /// transmit power, since both gains carry the same factor.
    pub fn affectance(&self, i: LinkId, j: LinkId) -> f64 {
        debug_assert_ne!(i, j, "self-affectance is undefined");
        self.inter[i * self.n + j] / self.signal[j]
    }

    /// `a_S(j) = sum_{i in set, i != j} a_i(j)`.
    pub fn set_affectance(&self, set: &[LinkId], j: LinkId) -> f64 {
        set.iter()
            .filter(|&&i| i != j)
            .map(|&i| self.affectance(i, j))
            .sum()
    }

    /// Signal-to-interference ratio of `i` against the other members of
    /// `set`; infinite when `i` is alone.
    pub fn sir(&self, set: &[LinkId], i: LinkId) -> f64 {
        let total: f64 = set
            .iter()
            .filter(|&&j| j != i)
            .map(|&j| self.inter[j * self.n + i])
            .sum();
        self.signal[i] / total
    }

    /// Every member must satisfy `a_set(j) < 1/beta` (strictly, matching
    /// the strict SIR threshold). Subsets of feasible sets stay feasible
    /// because the sums only shrink.
    pub fn is_feasible(&self, set: &[LinkId], beta: f64) -> bool {
        set.iter().all(|&j| self.set_affectance(set, j) < 1.0 / beta)
    }
}
