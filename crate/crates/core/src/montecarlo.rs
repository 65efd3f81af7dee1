//! Replicate harness: replicate `k` samples the Palm PPP with seed
//! `base_seed + k`, builds its RST and records every per-tree measurement.
//! Replicates run on the rayon pool; records come back in index order so the
//! aggregate does not depend on scheduling.

use std::f64::consts::{FRAC_2_PI, TAU};
use std::sync::atomic::{AtomicUsize, Ordering};

use log::{info, warn};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::interfaces::{color_subtrees, sectors_at, surviving_colors, LabelScheme};
use crate::paths::{AgreementProbe, SurvivorConfig, Survivors};
use crate::ppp::sample_palm_ppp;
use crate::stats::{
    beta_moment_fit, empirical_distribution, ks_statistic, mean_and_se, uniform_circle_cdf, BetaFit,
};
use crate::tree::{build_rst_with_grid, check_noncrossing, first_rst_violation, grid_for};
use crate::{Error, Result};

/// Largest possible number of children of the origin.
pub const MAX_DEGREE: usize = 5;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MonteCarloConfig {
    pub replicates: usize,
    pub intensity: f64,
    pub window_radius: f64,
    pub cut_fraction: f64,
    pub analysis_fraction: f64,
    /// Number of radii in the grid `analysis_radius * k / grid_points`, `k = 1..=grid_points`.
    pub grid_points: usize,
    pub base_seed: u64,
    pub labeling: LabelScheme,
    /// Abscissas of the balls used for the DSF agreement test.
    pub agreement_centers: Vec<f64>,
    pub agreement_ball_radius: f64,
    /// Analysis radii at which the paths towards direction 0 are counted.
    pub direction_radii: Vec<f64>,
    pub direction_half_width: f64,
    /// Re-check the RST property and non-crossing on every replicate.
    pub verify: bool,
}

impl Default for MonteCarloConfig {
    fn default() -> Self {
        Self::for_window(100, 1.0, 60.0)
    }
}

impl MonteCarloConfig {
    /// Defaults whose probe positions scale with the window: agreement
    /// balls at `W/6, W/3, 2W/3` and direction counts at `W/4, W/2`.
    pub fn for_window(replicates: usize, intensity: f64, window_radius: f64) -> Self {
        let w = window_radius;
        MonteCarloConfig {
            replicates,
            intensity,
            window_radius,
            cut_fraction: crate::paths::DEFAULT_CUT_FRACTION,
            analysis_fraction: crate::paths::DEFAULT_ANALYSIS_FRACTION,
            grid_points: 10,
            base_seed: 0,
            labeling: LabelScheme::Random,
            agreement_centers: vec![w / 6.0, w / 3.0, 2.0 * w / 3.0],
            agreement_ball_radius: 2.0,
            direction_radii: vec![w / 4.0, w / 2.0],
            direction_half_width: 0.05,
            verify: false,
        }
    }

    pub fn survivor_config(&self) -> Result<SurvivorConfig> {
        SurvivorConfig::from_fractions(
            self.window_radius,
            self.cut_fraction,
            self.analysis_fraction,
        )
    }

    pub fn r_grid(&self) -> Vec<f64> {
        let a = self.analysis_fraction * self.window_radius;
        let n = self.grid_points;
        (1..=n).map(|k| a * k as f64 / n as f64).collect()
    }

    pub fn validate(&self) -> Result<()> {
        if self.replicates == 0 {
            return Err(Error::param("replicates must be at least 1"));
        }
        if !(self.intensity > 0.0 && self.intensity.is_finite()) {
            return Err(Error::param(format!(
                "intensity {} must be positive",
                self.intensity
            )));
        }
        if !(self.window_radius > 0.0 && self.window_radius.is_finite()) {
            return Err(Error::param(format!(
                "window radius {} must be positive",
                self.window_radius
            )));
        }
        if !(self.analysis_fraction > 0.0
            && self.analysis_fraction <= self.cut_fraction
            && self.cut_fraction <= 1.0)
        {
            return Err(Error::param(format!(
                "need 0 < analysis_fraction ({}) <= cut_fraction ({}) <= 1",
                self.analysis_fraction, self.cut_fraction
            )));
        }
        if self.grid_points == 0 {
            return Err(Error::param("grid_points must be at least 1"));
        }
        let b = self.agreement_ball_radius;
        if !(b > 0.0) {
            return Err(Error::param(format!(
                "agreement ball radius {b} must be positive"
            )));
        }
        if let Some(c) = self
            .agreement_centers
            .iter()
            .find(|c| c.abs() + 2.0 * b > self.window_radius)
        {
            return Err(Error::param(format!(
                "agreement ball at abscissa {c} with radius {b} does not fit in window {}",
                self.window_radius
            )));
        }
        let cut = self.cut_fraction * self.window_radius;
        if let Some(r) = self
            .direction_radii
            .iter()
            .find(|&&r| !(r > 0.0 && r <= cut))
        {
            return Err(Error::param(format!(
                "direction radius {r} outside (0, {cut}]"
            )));
        }
        if !(self.direction_half_width > 0.0 && self.direction_half_width < std::f64::consts::PI) {
            return Err(Error::param(format!(
                "direction half width {} outside (0, π)",
                self.direction_half_width
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChiSample {
    pub r: f64,
    pub chi: usize,
    /// Absent when `r <= 2/π`, where the unit arc would wrap the circle.
    pub chi_tilde: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReplicateRecord {
    pub index: usize,
    pub seed: u64,
    pub point_count: usize,
    pub children_of_o: usize,
    pub m_unbounded: usize,
    /// Sector widths at the analysis radius, ordered by colour label. Empty
    /// when `m_unbounded < 2` or when the trace was degenerate.
    pub sectors: Vec<f64>,
    /// Interface between the surviving colour of smallest label and the
    /// next surviving colour counterclockwise, at the analysis radius.
    pub lead_interface: Option<f64>,
    pub degenerate_trace: bool,
    pub chi_grid: Vec<ChiSample>,
    pub agreement_flags: Vec<(f64, bool)>,
    pub spine_counts: Vec<(f64, usize)>,
    /// `(analysis radius, number of maximal surviving paths towards direction 0)`.
    pub direction_multiplicity: Vec<(f64, usize)>,
}

impl ReplicateRecord {
    pub fn check(&self) -> Result<()> {
        if self.m_unbounded > self.children_of_o || self.children_of_o > MAX_DEGREE {
            return Err(Error::InvariantViolation(format!(
                "replicate {}: m = {}, children of O = {}",
                self.index, self.m_unbounded, self.children_of_o
            )));
        }
        if !self.sectors.is_empty() {
            let total: f64 = self.sectors.iter().sum();
            if (total - TAU).abs() > 1e-9 {
                return Err(Error::InvariantViolation(format!(
                    "replicate {}: sectors sum to {total}",
                    self.index
                )));
            }
        }
        Ok(())
    }
}

/// Colouring seed derived from the point seed so the two streams differ.
pub fn coloring_seed(seed: u64) -> u64 {
    seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ 0xC010_0E5E_ED00_0001
}

pub fn run_replicate(cfg: &MonteCarloConfig, index: usize) -> Result<ReplicateRecord> {
    let seed = cfg.base_seed.wrapping_add(index as u64);
    let ps = sample_palm_ppp(cfg.intensity, cfg.window_radius, seed)?;
    let grid = grid_for(&ps);
    let tree = build_rst_with_grid(&ps, &grid);
    if cfg.verify {
        if let Some(x) = first_rst_violation(&tree) {
            return Err(Error::InvariantViolation(format!(
                "RST property fails at point {x}"
            )));
        }
        let crossings = check_noncrossing(&tree);
        if let Some(&(a, b)) = crossings.first() {
            return Err(Error::InvariantViolation(format!(
                "{} crossing edge pair(s), first ({a}, {b})",
                crossings.len()
            )));
        }
    }
    let scfg = cfg.survivor_config()?;
    let surv = Survivors::new(&tree, scfg)?;
    let children_of_o = tree.children_of_origin().len();
    let r_grid = cfg.r_grid();

    let mut m_unbounded = 0;
    let mut sectors = Vec::new();
    let mut lead_interface = None;
    let mut degenerate_trace = false;
    if children_of_o > 0 {
        let col = color_subtrees(&tree, cfg.labeling, coloring_seed(seed))?;
        m_unbounded = surviving_colors(&surv, &col).len();
        if m_unbounded >= 2 {
            match sectors_at(&surv, &col, scfg.analysis_radius) {
                Ok(mut s) => {
                    s.sort_by_key(|s| s.color);
                    lead_interface = Some(s[0].end);
                    sectors = s.into_iter().map(|s| s.phi).collect();
                }
                Err(Error::DegenerateTrace(r)) => {
                    warn!("replicate {index}: surviving colours not contiguous at radius {r}");
                    degenerate_trace = true;
                }
                Err(e) => return Err(e),
            }
        }
    }

    let mut chi_grid = Vec::with_capacity(r_grid.len());
    for &r in &r_grid {
        let chi_tilde = if r > FRAC_2_PI {
            Some(surv.chi_tilde(r)?)
        } else {
            None
        };
        chi_grid.push(ChiSample {
            r,
            chi: surv.chi(r)?,
            chi_tilde,
        });
    }
    let spine_counts = r_grid
        .iter()
        .map(|&r| Ok((r, surv.spine_bifurcations(r)?)))
        .collect::<Result<Vec<_>>>()?;

    let probe = AgreementProbe::new(&ps, &grid);
    let agreement_flags = cfg
        .agreement_centers
        .iter()
        .map(|&c| Ok((c, probe.agrees(&tree, c, cfg.agreement_ball_radius)?)))
        .collect::<Result<Vec<_>>>()?;

    let mut direction_multiplicity = Vec::with_capacity(cfg.direction_radii.len());
    for &a in &cfg.direction_radii {
        let s = Survivors::new(&tree, scfg.with_analysis_radius(a)?)?;
        direction_multiplicity.push((a, s.directional_paths(0.0, cfg.direction_half_width)?.len()));
    }

    let record = ReplicateRecord {
        index,
        seed,
        point_count: ps.len(),
        children_of_o,
        m_unbounded,
        sectors,
        lead_interface,
        degenerate_trace,
        chi_grid,
        agreement_flags,
        spine_counts,
        direction_multiplicity,
    };
    record.check()?;
    Ok(record)
}

/// Runs all replicates on the current rayon pool.
pub fn run_monte_carlo(cfg: &MonteCarloConfig) -> Result<Vec<ReplicateRecord>> {
    cfg.validate()?;
    let done = AtomicUsize::new(0);
    let step = (cfg.replicates / 10).max(1);
    (0..cfg.replicates)
        .into_par_iter()
        .map(|k| {
            let rec = run_replicate(cfg, k).map_err(|e| Error::Replicate {
                index: k,
                source: Box::new(e),
            });
            let n = done.fetch_add(1, Ordering::Relaxed) + 1;
            if n.is_multiple_of(step) || n == cfg.replicates {
                info!("{n}/{} replicates", cfg.replicates);
            }
            rec
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bin {
    pub value: usize,
    pub count: usize,
    pub proportion: f64,
}

fn bins(values: &[usize]) -> Result<Vec<Bin>> {
    let props = empirical_distribution(values, 0..=MAX_DEGREE)?;
    Ok(props
        .into_iter()
        .enumerate()
        .map(|(value, proportion)| Bin {
            value,
            count: values.iter().filter(|&&v| v == value).count(),
            proportion,
        })
        .collect())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LabelMean {
    pub label_rank: usize,
    pub mean: f64,
    pub standard_error: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SectorFit {
    pub m: usize,
    /// Replicates with `m` surviving colours and a usable trace.
    pub n: usize,
    /// Moment fit of the sector of smallest label, one value per replicate.
    pub alpha_hat: Option<f64>,
    pub beta_hat: Option<f64>,
    pub fit_error: Option<String>,
    /// KS distance between that sample and the fitted Beta law.
    pub ks_d: Option<f64>,
    pub label_means: Vec<LabelMean>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChiPoint {
    pub r: f64,
    pub mean_chi: f64,
    pub se_chi: f64,
    pub mean_chi_over_r: f64,
    pub se_chi_over_r: f64,
    pub mean_chi_tilde: Option<f64>,
    pub se_chi_tilde: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AgreementPoint {
    pub center_abscissa: f64,
    pub probability: f64,
    pub standard_error: f64,
    pub n: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpinePoint {
    pub r: f64,
    pub mean: f64,
    pub mean_over_r: f64,
    pub se_over_r: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DirectionPoint {
    pub analysis_radius: f64,
    pub fraction_multiple: f64,
    pub standard_error: f64,
    pub mean_paths: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Uniformity {
    pub n: usize,
    pub ks_d: Option<f64>,
    /// `1.36 / sqrt(n)`.
    pub critical_5pct: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AggregateReport {
    pub config: MonteCarloConfig,
    pub replicates: usize,
    pub mean_point_count: f64,
    pub children_distribution: Vec<Bin>,
    pub m_distribution: Vec<Bin>,
    pub degenerate_traces: usize,
    pub sector_fits: Vec<SectorFit>,
    pub direction_uniformity: Uniformity,
    pub chi_curve: Vec<ChiPoint>,
    pub agreement_curve: Vec<AgreementPoint>,
    pub spine_curve: Vec<SpinePoint>,
    pub direction_curve: Vec<DirectionPoint>,
}

fn proportion_with_se(hits: usize, n: usize) -> (f64, f64) {
    let p = hits as f64 / n as f64;
    (p, (p * (1.0 - p) / n as f64).sqrt())
}

fn sector_fit(records: &[ReplicateRecord], m: usize) -> SectorFit {
    let group: Vec<&ReplicateRecord> = records
        .iter()
        .filter(|r| r.m_unbounded == m && r.sectors.len() == m)
        .collect();
    let label_means = (0..m)
        .map(|k| {
            let xs: Vec<f64> = group.iter().map(|r| r.sectors[k]).collect();
            let (mean, standard_error) = mean_and_se(&xs);
            LabelMean {
                label_rank: k + 1,
                mean,
                standard_error,
            }
        })
        .collect();
    let first: Vec<f64> = group.iter().map(|r| r.sectors[0]).collect();
    let (fit, fit_error): (Option<BetaFit>, Option<String>) = match beta_moment_fit(&first) {
        Ok(f) => (Some(f), None),
        Err(e) => (None, Some(e.to_string())),
    };
    let ks_d = fit.and_then(|f| ks_statistic(&first, |x| f.cdf().cdf(x)).ok());
    SectorFit {
        m,
        n: group.len(),
        alpha_hat: fit.map(|f| f.alpha_hat),
        beta_hat: fit.map(|f| f.beta_hat),
        fit_error,
        ks_d,
        label_means,
    }
}

impl AggregateReport {
    /// Deterministic fold over index-ordered records.
    pub fn from_records(cfg: &MonteCarloConfig, records: &[ReplicateRecord]) -> Result<Self> {
        if records.is_empty() {
            return Err(Error::param("no replicate records to aggregate"));
        }
        let n = records.len();
        let children: Vec<usize> = records.iter().map(|r| r.children_of_o).collect();
        let ms: Vec<usize> = records.iter().map(|r| r.m_unbounded).collect();

        let sector_fits = (2..=MAX_DEGREE).map(|m| sector_fit(records, m)).collect();

        let leads: Vec<f64> = records.iter().filter_map(|r| r.lead_interface).collect();
        let direction_uniformity = Uniformity {
            n: leads.len(),
            ks_d: ks_statistic(&leads, uniform_circle_cdf).ok(),
            critical_5pct: (!leads.is_empty()).then(|| 1.36 / (leads.len() as f64).sqrt()),
        };

        let grid_len = records[0].chi_grid.len();
        let chi_curve = (0..grid_len)
            .map(|k| {
                let r = records[0].chi_grid[k].r;
                let chi: Vec<f64> = records
                    .iter()
                    .map(|rec| rec.chi_grid[k].chi as f64)
                    .collect();
                let over_r: Vec<f64> = chi.iter().map(|c| c / r).collect();
                let tilde: Option<Vec<f64>> = records
                    .iter()
                    .map(|rec| rec.chi_grid[k].chi_tilde.map(|c| c as f64))
                    .collect();
                let (mean_chi, se_chi) = mean_and_se(&chi);
                let (mean_chi_over_r, se_chi_over_r) = mean_and_se(&over_r);
                let tilde_stats = tilde.map(|t| mean_and_se(&t));
                ChiPoint {
                    r,
                    mean_chi,
                    se_chi,
                    mean_chi_over_r,
                    se_chi_over_r,
                    mean_chi_tilde: tilde_stats.map(|s| s.0),
                    se_chi_tilde: tilde_stats.map(|s| s.1),
                }
            })
            .collect();

        let agreement_curve = (0..records[0].agreement_flags.len())
            .map(|k| {
                let hits = records
                    .iter()
                    .filter(|rec| rec.agreement_flags[k].1)
                    .count();
                let (probability, standard_error) = proportion_with_se(hits, n);
                AgreementPoint {
                    center_abscissa: records[0].agreement_flags[k].0,
                    probability,
                    standard_error,
                    n,
                }
            })
            .collect();

        let spine_curve = (0..records[0].spine_counts.len())
            .map(|k| {
                let r = records[0].spine_counts[k].0;
                let v: Vec<f64> = records
                    .iter()
                    .map(|rec| rec.spine_counts[k].1 as f64)
                    .collect();
                let over_r: Vec<f64> = v.iter().map(|x| x / r).collect();
                let (mean, _) = mean_and_se(&v);
                let (mean_over_r, se_over_r) = mean_and_se(&over_r);
                SpinePoint {
                    r,
                    mean,
                    mean_over_r,
                    se_over_r,
                }
            })
            .collect();

        let direction_curve = (0..records[0].direction_multiplicity.len())
            .map(|k| {
                let counts: Vec<usize> = records
                    .iter()
                    .map(|rec| rec.direction_multiplicity[k].1)
                    .collect();
                let hits = counts.iter().filter(|&&c| c >= 2).count();
                let (fraction_multiple, standard_error) = proportion_with_se(hits, n);
                DirectionPoint {
                    analysis_radius: records[0].direction_multiplicity[k].0,
                    fraction_multiple,
                    standard_error,
                    mean_paths: counts.iter().sum::<usize>() as f64 / n as f64,
                }
            })
            .collect();

        Ok(AggregateReport {
            config: cfg.clone(),
            replicates: n,
            mean_point_count: records.iter().map(|r| r.point_count as f64).sum::<f64>() / n as f64,
            children_distribution: bins(&children)?,
            m_distribution: bins(&ms)?,
            degenerate_traces: records.iter().filter(|r| r.degenerate_trace).count(),
            sector_fits,
            direction_uniformity,
            chi_curve,
            agreement_curve,
            spine_curve,
            direction_curve,
        })
    }
}
