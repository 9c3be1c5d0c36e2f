//! Scenario descriptions and their seeded instance generators.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Instance, Link, Params, Point};
use crate::shadowing::ShadowingSpec;

/// Geometry recipe for one experiment family. On the wire this is spelled
/// with a `kind` tag and the tag's own fields inline (see [`Scenario`]).
#[derive(Clone, Debug, PartialEq)]
pub enum ScenarioKind {
    /// All senders at one point, all receivers `length` away at another.
    Colocated { n: usize, length: f64 },
    /// `clusters` groups of `per_cluster` unit-length links. Cluster
    /// centers sit on a square grid `spacing` apart; senders land
    /// uniformly in a half-unit square at their center, receivers one
    /// unit away in a uniform direction.
    ClusterGrid {
        clusters: usize,
        per_cluster: usize,
        spacing: f64,
    },
    /// Senders uniform in `[0, area]²`, lengths uniform in
    /// `[length, 2·length)` (spread strictly below 2), uniform directions.
    RandomEquilength { n: usize, area: f64, length: f64 },
    /// Senders uniform in `[0, area]²`, lengths uniform over the closed
    /// range, uniform directions.
    RandomGeneral {
        n: usize,
        area: f64,
        length_range: (f64, f64),
    },
}

impl ScenarioKind {
    pub fn n(&self) -> usize {
        match *self {
            ScenarioKind::Colocated { n, .. } => n,
            ScenarioKind::ClusterGrid {
                clusters,
                per_cluster,
                ..
            } => clusters * per_cluster,
            ScenarioKind::RandomEquilength { n, .. } => n,
            ScenarioKind::RandomGeneral { n, .. } => n,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ScenarioKind::Colocated { .. } => "colocated",
            ScenarioKind::ClusterGrid { .. } => "cluster_grid",
            ScenarioKind::RandomEquilength { .. } => "random_equilength",
            ScenarioKind::RandomGeneral { .. } => "random_general",
        }
    }

    fn validate(&self) -> Result<()> {
        let positive = |what: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::Invalid(format!("{what} must be positive, got {v}")))
            }
        };
        if self.n() == 0 {
            return Err(Error::Invalid("scenario must generate at least one link".into()));
        }
        match *self {
            ScenarioKind::Colocated { length, .. } => positive("length", length),
            ScenarioKind::ClusterGrid { spacing, .. } => positive("spacing", spacing),
            ScenarioKind::RandomEquilength { area, length, .. } => {
                positive("area", area)?;
                positive("length", length)
            }
            ScenarioKind::RandomGeneral {
                area,
                length_range: (lo, hi),
                ..
            } => {
                positive("area", area)?;
                positive("length range low end", lo)?;
                positive("length range high end", hi)?;
                if lo > hi {
                    return Err(Error::Invalid(format!(
                        "length range must be ordered, got ({lo}, {hi})"
                    )));
                }
                Ok(())
            }
        }
    }
}

/// Full experiment description: geometry, channel model, SIR parameters,
/// trial count, master seed. This is the unit a config file describes.
#[derive(Clone, Debug, PartialEq)]
pub struct Scenario {
    pub kind: ScenarioKind,
    pub shadowing: ShadowingSpec,
    pub params: Params,
    pub trials: u64,
    pub seed: u64,
}

impl Scenario {
    /// Re-runs every constructor check on deserialized data.
    pub fn validate(&self) -> Result<()> {
        self.kind.validate()?;
        Params::new(self.params.power, self.params.alpha, self.params.beta)?;
        if self.trials == 0 {
            return Err(Error::Invalid("trials must be at least 1".into()));
        }
        Ok(())
    }
}

// ---- wire format ----------------------------------------------------------
//
// The geometry tag's fields sit inline next to the common fields, so a
// config reads flat: {"kind": "colocated", "n": 8, "length": 1.0, ...}.
// A hand-rolled wire struct keeps unknown-field rejection (serde cannot
// combine `deny_unknown_fields` with `flatten`) and lets deserialization
// insist that exactly the tag's own fields are present.

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioWire {
    kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    length: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    clusters: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    per_cluster: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    spacing: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    area: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    length_range: Option<(f64, f64)>,
    shadowing: ShadowingSpec,
    params: Params,
    trials: u64,
    seed: u64,
}

impl Serialize for Scenario {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        let mut w = ScenarioWire {
            kind: self.kind.name().to_owned(),
            n: None,
            length: None,
            clusters: None,
            per_cluster: None,
            spacing: None,
            area: None,
            length_range: None,
            shadowing: self.shadowing,
            params: self.params,
            trials: self.trials,
            seed: self.seed,
        };
        match self.kind {
            ScenarioKind::Colocated { n, length } => {
                w.n = Some(n);
                w.length = Some(length);
            }
            ScenarioKind::ClusterGrid {
                clusters,
                per_cluster,
                spacing,
            } => {
                w.clusters = Some(clusters);
                w.per_cluster = Some(per_cluster);
                w.spacing = Some(spacing);
            }
            ScenarioKind::RandomEquilength { n, area, length } => {
                w.n = Some(n);
                w.area = Some(area);
                w.length = Some(length);
            }
            ScenarioKind::RandomGeneral {
                n,
                area,
                length_range,
            } => {
                w.n = Some(n);
                w.area = Some(area);
                w.length_range = Some(length_range);
            }
        }
        w.serialize(ser)
    }
}

impl<'de> Deserialize<'de> for Scenario {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let w = ScenarioWire::deserialize(de)?;
        let need = |name: &str, ok: bool| {
            if ok {
                Ok(())
            } else {
                Err(D::Error::custom(format!(
                    "scenario kind '{}' requires field '{name}'",
                    w.kind
                )))
            }
        };
        let kind = match w.kind.as_str() {
            "colocated" => {
                need("n", w.n.is_some())?;
                need("length", w.length.is_some())?;
                ScenarioKind::Colocated {
                    n: w.n.unwrap(),
                    length: w.length.unwrap(),
                }
            }
            "cluster_grid" => {
                need("clusters", w.clusters.is_some())?;
                need("per_cluster", w.per_cluster.is_some())?;
                need("spacing", w.spacing.is_some())?;
                ScenarioKind::ClusterGrid {
                    clusters: w.clusters.unwrap(),
                    per_cluster: w.per_cluster.unwrap(),
                    spacing: w.spacing.unwrap(),
                }
            }
            "random_equilength" => {
                need("n", w.n.is_some())?;
                need("area", w.area.is_some())?;
                need("length", w.length.is_some())?;
                ScenarioKind::RandomEquilength {
                    n: w.n.unwrap(),
                    area: w.area.unwrap(),
                    length: w.length.unwrap(),
                }
            }
            "random_general" => {
                need("n", w.n.is_some())?;
                need("area", w.area.is_some())?;
                need("length_range", w.length_range.is_some())?;
                ScenarioKind::RandomGeneral {
                    n: w.n.unwrap(),
                    area: w.area.unwrap(),
                    length_range: w.length_range.unwrap(),
                }
            }
            other => {
                return Err(D::Error::custom(format!(
                    "unknown scenario kind '{other}' (expected colocated, cluster_grid, \
                     random_equilength, or random_general)"
                )))
            }
        };
        // Stray fields from a different kind are as suspect as unknown keys.
        let leftovers = [
            ("n", w.n.is_some()),
            ("length", w.length.is_some()),
            ("clusters", w.clusters.is_some()),
            ("per_cluster", w.per_cluster.is_some()),
            ("spacing", w.spacing.is_some()),
            ("area", w.area.is_some()),
            ("length_range", w.length_range.is_some()),
        ];
        let used: &[&str] = match kind {
            ScenarioKind::Colocated { .. } => &["n", "length"],
            ScenarioKind::ClusterGrid { .. } => &["clusters", "per_cluster", "spacing"],
            ScenarioKind::RandomEquilength { .. } => &["n", "area", "length"],
            ScenarioKind::RandomGeneral { .. } => &["n", "area", "length_range"],
        };
        for (name, present) in leftovers {
            if present && !used.contains(&name) {
                return Err(D::Error::custom(format!(
                    "field '{name}' does not belong to scenario kind '{}'",
                    w.kind
                )));
            }
        }
        Ok(Scenario {
            kind,
            shadowing: w.shadowing,
            params: w.params,
            trials: w.trials,
            seed: w.seed,
        })
    }
}

/// Draws one instance from the recipe. The per-link draw order is fixed
/// (sender x, sender y, length where random, direction) so a given stream
/// reproduces the same geometry regardless of caller.
pub fn generate(kind: &ScenarioKind, params: Params, rng: &mut impl Rng) -> Result<Instance> {
    kind.validate()?;
    let links = match *kind {
        ScenarioKind::Colocated { n, length } => (0..n)
            .map(|i| Link::new(i, Point::new(0.0, 0.0), Point::new(length, 0.0)))
            .collect(),
        ScenarioKind::ClusterGrid {
            clusters,
            per_cluster,
            spacing,
        } => {
            let cols = (clusters as f64).sqrt().ceil() as usize;
            let mut links = Vec::with_capacity(clusters * per_cluster);
            for c in 0..clusters {
                let cx = (c % cols) as f64 * spacing;
                let cy = (c / cols) as f64 * spacing;
                for k in 0..per_cluster {
                    let sx = cx + rng.random_range(-0.25..0.25);
                    let sy = cy + rng.random_range(-0.25..0.25);
                    let ang = rng.random_range(0.0..std::f64::consts::TAU);
                    links.push(Link::new(
                        c * per_cluster + k,
                        Point::new(sx, sy),
                        Point::new(sx + ang.cos(), sy + ang.sin()),
                    ));
                }
            }
            links
        }
        ScenarioKind::RandomEquilength { n, area, length } => (0..n)
            .map(|i| {
                let s = Point::new(rng.random_range(0.0..area), rng.random_range(0.0..area));
                let len = length * (1.0 + rng.random::<f64>());
                let ang = rng.random_range(0.0..std::f64::consts::TAU);
                Link::new(i, s, Point::new(s.x + len * ang.cos(), s.y + len * ang.sin()))
            })
            .collect(),
        ScenarioKind::RandomGeneral {
            n,
            area,
            length_range: (lo, hi),
        } => (0..n)
            .map(|i| {
                let s = Point::new(rng.random_range(0.0..area), rng.random_range(0.0..area));
                let len = if hi > lo { rng.random_range(lo..hi) } else { lo };
                let ang = rng.random_range(0.0..std::f64::consts::TAU);
                Link::new(i, s, Point::new(s.x + len * ang.cos(), s.y + len * ang.sin()))
            })
            .collect(),
    };
    Instance::new(params, links)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{domain, substream};
    use crate::sched::well_separated_partition;

    fn params() -> Params {
        Params::new(1.0, 3.0, 1.0).unwrap()
    }

    #[test]
    fn colocated_geometry_is_exact() {
        let kind = ScenarioKind::Colocated { n: 5, length: 1.0 };
        let mut rng = substream(0, domain::SCENARIO, 0);
        let inst = generate(&kind, params(), &mut rng).unwrap();
        assert_eq!(inst.len(), 5);
        for l in inst.links() {
            assert_eq!(l.sender.dist(inst.links()[0].sender), 0.0);
            assert_eq!(l.length(), 1.0);
        }
    }

    #[test]
    fn cluster_grid_produces_separable_clusters() {
        let kind = ScenarioKind::ClusterGrid {
            clusters: 4,
            per_cluster: 8,
            spacing: 7.0,
        };
        let mut rng = substream(1, domain::SCENARIO, 0);
        let inst = generate(&kind, params(), &mut rng).unwrap();
        assert_eq!(inst.len(), 32);
        let ids: Vec<usize> = (0..32).collect();
        let d = well_separated_partition(&inst, &ids).unwrap();
        let clusters: usize = d.classes.iter().map(|g| g.clusters.len()).sum();
        assert!(clusters >= 4, "found only {clusters} clusters");
    }

    #[test]
    fn random_lengths_respect_their_bounds() {
        let kind = ScenarioKind::RandomEquilength {
            n: 50,
            area: 10.0,
            length: 2.0,
        };
        let mut rng = substream(2, domain::SCENARIO, 0);
        let inst = generate(&kind, params(), &mut rng).unwrap();
        assert!(inst.length_ratio() < 2.0);
        for l in inst.links() {
            assert!((2.0..4.0).contains(&l.length()));
        }

        let kind = ScenarioKind::RandomGeneral {
            n: 50,
            area: 10.0,
            length_range: (1.0, 10.0),
        };
        let inst = generate(&kind, params(), &mut rng).unwrap();
        assert!(inst.length_ratio() <= 10.0);
    }

    #[test]
    fn generation_is_reproducible() {
        let kind = ScenarioKind::RandomGeneral {
            n: 20,
            area: 5.0,
            length_range: (1.0, 3.0),
        };
        let gen = || {
            let mut rng = substream(9, domain::SCENARIO, 3);
            generate(&kind, params(), &mut rng).unwrap().to_json()
        };
        assert_eq!(gen(), gen());
    }

    #[test]
    fn scenario_wire_format_roundtrips_and_validates() {
        let text = r#"{
            "kind": "random_equilength", "n": 12, "area": 8.0, "length": 1.0,
            "shadowing": {"family": "lognormal", "sigma": 1.0},
            "params": {"power": 1.0, "alpha": 3.0, "beta": 1.0},
            "trials": 100, "seed": 7
        }"#;
        let sc: Scenario = serde_json::from_str(text).unwrap();
        sc.validate().unwrap();
        assert_eq!(sc.kind.n(), 12);
        let back: Scenario = serde_json::from_str(&serde_json::to_string(&sc).unwrap()).unwrap();
        assert_eq!(back, sc);

        // Validation failures: alpha at its boundary, zero trials.
        let bad = text.replace("\"alpha\": 3.0", "\"alpha\": 2.0");
        assert!(serde_json::from_str::<Scenario>(&bad).unwrap().validate().is_err());
        let bad = text.replace("\"trials\": 100", "\"trials\": 0");
        assert!(serde_json::from_str::<Scenario>(&bad).unwrap().validate().is_err());
        // Unknown fields refuse to parse, as do fields of a different
        // kind and unknown kinds.
        let bad = text.replace("\"seed\": 7", "\"seed\": 7, \"extra\": 1");
        assert!(serde_json::from_str::<Scenario>(&bad).is_err());
        let bad = text.replace("\"area\": 8.0", "\"area\": 8.0, \"spacing\": 3.0");
        assert!(serde_json::from_str::<Scenario>(&bad).is_err());
        let bad = text.replace("random_equilength", "hexagonal");
        assert!(serde_json::from_str::<Scenario>(&bad).is_err());
        let bad = text.replace("\"length\": 1.0,", "");
        assert!(serde_json::from_str::<Scenario>(&bad).is_err());
    }
}
