//! Study run configuration: which study, over which scenario, with which
//! optional sweeps — plus the dispatcher that runs it and writes the
//! CSV/JSON pair per output.

use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::experiments::report::{config_digest, summarize, write_csv, write_summary};
use crate::experiments::scenario::{Scenario, ScenarioKind};
use crate::experiments::study::{
    study_colocated_growth, study_fading_equivalence, study_ss_vs_gpl, StudyReport,
};
use crate::shadowing::{Family, ShadowingSpec};

/// Default instance sizes for the growth study when the config names none.
pub const DEFAULT_GROWTH_SIZES: [usize; 4] = [16, 64, 256, 1024];

/// Which study a config runs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StudyKind {
    ColocatedGrowth,
    SsVsGpl,
    FadingEquivalence,
}

impl StudyKind {
    pub fn name(self) -> &'static str {
        match self {
            StudyKind::ColocatedGrowth => "colocated_growth",
            StudyKind::SsVsGpl => "ss_vs_gpl",
            StudyKind::FadingEquivalence => "fading_equivalence",
        }
    }
}

/// A complete study run: scenario, study selector, and optional sweeps.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub study: StudyKind,
    pub scenario: Scenario,
    /// Instance sizes for the growth study (ascending, each ≥ 2).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_list: Option<Vec<usize>>,
    /// Repeat the study once per sigma, rebuilding the log-normal family.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma_sweep: Option<Vec<f64>>,
    /// Output directory; the CLI may override it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out_dir: Option<PathBuf>,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: RunConfig = serde_json::from_str(text).map_err(Error::Json)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn read_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(Error::Io)?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        self.scenario.validate()?;
        if let Some(sweep) = &self.sigma_sweep {
            if sweep.is_empty() {
                return Err(Error::Invalid("sigma_sweep must not be empty".into()));
            }
            if sweep.iter().any(|s| !(s.is_finite() && *s > 0.0)) {
                return Err(Error::Invalid(
                    "sigma_sweep entries must be positive and finite".into(),
                ));
            }
            if !matches!(self.scenario.shadowing.family(), Family::LogNormal { .. }) {
                return Err(Error::Invalid(
                    "sigma_sweep requires a log-normal shadowing family".into(),
                ));
            }
        }
        if let Some(n_list) = &self.n_list {
            if self.study != StudyKind::ColocatedGrowth {
                return Err(Error::Invalid(
                    "n_list applies only to the colocated growth study".into(),
                ));
            }
            if n_list.is_empty() {
                return Err(Error::Invalid("n_list must not be empty".into()));
            }
        }
        if self.study == StudyKind::ColocatedGrowth
            && !matches!(self.scenario.kind, ScenarioKind::Colocated { .. })
        {
            return Err(Error::Invalid(
                "the colocated growth study requires a colocated scenario".into(),
            ));
        }
        Ok(())
    }

    /// The shadowing spec with its log-normal sigma replaced.
    fn with_sigma(&self, sigma: f64) -> Result<ShadowingSpec> {
        let base = self.scenario.shadowing;
        ShadowingSpec::new(
            Family::LogNormal { sigma },
            base.sample_signals(),
            base.sample_interference(),
        )
    }

    fn run_study(&self, shadowing: &ShadowingSpec) -> Result<StudyReport> {
        let mut sc = self.scenario.clone();
        sc.shadowing = *shadowing;
        match self.study {
            StudyKind::ColocatedGrowth => {
                let length = match sc.kind {
                    ScenarioKind::Colocated { length, .. } => length,
                    _ => unreachable!("validate() restricts the scenario kind"),
                };
                let default = DEFAULT_GROWTH_SIZES.to_vec();
                let n_list = self.n_list.as_deref().unwrap_or(&default);
                study_colocated_growth(shadowing, sc.params, length, n_list, sc.trials, sc.seed)
            }
            StudyKind::SsVsGpl => study_ss_vs_gpl(&sc),
            StudyKind::FadingEquivalence => study_fading_equivalence(&sc),
        }
    }
}

/// A trailing-zero-free decimal sigma tag for filenames (0.5 → "0.5",
/// 2.0 → "2").
fn sigma_tag(sigma: f64) -> String {
    format!("{sigma}").trim_end_matches(".0").to_string()
}

/// Run the config and write `<study>.csv` / `<study>.json` into `out_dir`
/// (or `<study>_sigma<σ>.{csv,json}` per sweep point). Returns the paths
/// written, CSVs before their JSON companions.
pub fn run(config: &RunConfig, out_dir: &Path) -> Result<Vec<PathBuf>> {
    config.validate()?;
    std::fs::create_dir_all(out_dir).map_err(Error::Io)?;
    let digest = config_digest(&serde_json::to_string(config).map_err(Error::Json)?);

    let variants: Vec<(String, ShadowingSpec)> = match &config.sigma_sweep {
        Some(sweep) => sweep
            .iter()
            .map(|&sigma| {
                Ok((
                    format!("{}_sigma{}", config.study.name(), sigma_tag(sigma)),
                    config.with_sigma(sigma)?,
                ))
            })
            .collect::<Result<_>>()?,
        None => vec![(config.study.name().to_string(), config.scenario.shadowing)],
    };

    let mut written = Vec::with_capacity(2 * variants.len());
    for (stem, shadowing) in &variants {
        let started = Instant::now();
        let report = config.run_study(shadowing)?;
        let wall_ms = started.elapsed().as_millis() as u64;

        let csv_path = out_dir.join(format!("{stem}.csv"));
        write_csv(&csv_path, &report.rows)?;
        let summary = summarize(&report, digest.clone(), wall_ms);
        let json_path = out_dir.join(format!("{stem}.json"));
        write_summary(&json_path, &summary)?;
        written.push(csv_path);
        written.push(json_path);
    }
    Ok(written)
}
