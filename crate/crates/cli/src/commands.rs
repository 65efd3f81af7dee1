use std::collections::BTreeMap;
use std::f64::consts::FRAC_2_PI;
use std::path::{Path, PathBuf};

use log::{info, warn};
use radial_tree::interfaces::{sectors_at, surviving_colors};
use radial_tree::io::{
    fmt_real, read_points, read_sectors, write_chi, write_forest, write_interface, write_points,
    write_records, write_rows, write_tree,
};
use radial_tree::montecarlo::coloring_seed;
use radial_tree::stats::{mean_and_se, ScaledBeta};
use radial_tree::tree::first_rst_violation;
use radial_tree::*;
use serde::Serialize;

use crate::config::{FileConfig, RunConfig, SimArgs};
use crate::{Cli, Command, Failure, Scenario};

pub fn run(cli: Cli) -> Result<(), Failure> {
    let file = match &cli.config {
        Some(p) => FileConfig::load(p)?,
        None => FileConfig::default(),
    };
    let out = cli.out.clone();
    let resolve = |sim: &SimArgs, replicates, threads| {
        RunConfig::resolve(&file, sim, replicates, threads, out.clone())
    };
    match cli.command {
        Command::Sample { sim } => sample(&resolve(&sim, None, None)?),
        Command::Build {
            points,
            radius,
            dsf,
            check_oracle,
        } => build(
            &resolve(&SimArgs::default(), None, None)?,
            &points,
            radius,
            dsf,
            check_oracle,
        ),
        Command::Mc {
            sim,
            replicates,
            threads,
            verify,
        } => mc(&resolve(&sim, replicates, threads)?, verify),
        Command::Interfaces { sim, points } => {
            interfaces(&resolve(&sim, None, None)?, &sim, points.as_deref())
        }
        Command::Chi { sim, points } => {
            chi_grid(&resolve(&sim, None, None)?, &sim, points.as_deref())
        }
        Command::Fit { sectors } => fit(&resolve(&SimArgs::default(), None, None)?, &sectors),
        Command::Scenario { which } => scenario(&resolve(&SimArgs::default(), None, None)?, which),
    }
}

fn out_dir(cfg: &RunConfig) -> Result<PathBuf, Failure> {
    std::fs::create_dir_all(&cfg.out_dir)
        .map_err(|e| Failure::io(format!("{}: {e}", cfg.out_dir.display())))?;
    Ok(cfg.out_dir.clone())
}

fn sample(cfg: &RunConfig) -> Result<(), Failure> {
    let ps = sample_palm_ppp(cfg.intensity, cfg.window_radius, cfg.seed)?;
    let path = out_dir(cfg)?.join("points.csv");
    write_points(&path, &ps)?;
    println!(
        "{} points (origin included) -> {}",
        ps.len(),
        path.display()
    );
    Ok(())
}

/// Fails with exit code 3 when the RST property or planarity is violated.
fn check_tree(t: &Tree<'_>) -> Result<(), Failure> {
    if let Some(x) = first_rst_violation(t) {
        return Err(Failure::violation(format!(
            "RST property fails at point {x}"
        )));
    }
    let crossings = check_noncrossing(t);
    if let Some(&(a, b)) = crossings.first() {
        return Err(Failure::violation(format!(
            "{} crossing edge pair(s), first ({a}, {b})",
            crossings.len()
        )));
    }
    Ok(())
}

fn build(
    cfg: &RunConfig,
    points: &Path,
    radius: Option<f64>,
    dsf: bool,
    check_oracle: bool,
) -> Result<(), Failure> {
    let ps = read_points(points, radius)?;
    let t = build_rst_indexed(&ps);
    check_tree(&t)?;
    if check_oracle {
        if ps.len() > 2000 {
            warn!(
                "oracle check on {} points is quadratic and may be slow",
                ps.len()
            );
        }
        let naive = build_rst_naive(&ps);
        if let Some(x) = (0..ps.len()).find(|&x| naive.ancestor(x) != t.ancestor(x)) {
            return Err(Failure::violation(format!(
                "indexed and naive builders disagree at point {x}: {} vs {}",
                t.ancestor(x),
                naive.ancestor(x)
            )));
        }
        info!("naive and indexed builders agree on {} points", ps.len());
    }
    let dir = out_dir(cfg)?;
    write_tree(&dir.join("tree.csv"), &t)?;
    if dsf {
        write_forest(&dir.join("dsf.csv"), &build_dsf(&ps))?;
    }
    println!(
        "{} points, children of O: {}, invariants hold -> {}",
        ps.len(),
        t.children_of_origin().len(),
        dir.join("tree.csv").display()
    );
    Ok(())
}

fn mc(cfg: &RunConfig, verify: bool) -> Result<(), Failure> {
    let mcfg = MonteCarloConfig {
        verify,
        ..cfg.monte_carlo()
    };
    mcfg.validate()?;
    let dir = out_dir(cfg)?;
    let records = match cfg.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Failure::usage(e.to_string()))?
            .install(|| run_monte_carlo(&mcfg))?,
        None => run_monte_carlo(&mcfg)?,
    };
    let report = AggregateReport::from_records(&mcfg, &records)?;
    let json = serde_json::to_string_pretty(&report).expect("report serializes");
    let path = dir.join("report.json");
    std::fs::write(&path, json + "\n")
        .map_err(|e| Failure::io(format!("{}: {e}", path.display())))?;
    write_records(&dir, &records)?;

    println!(
        "{} replicates, window {}, mean {:.1} points",
        report.replicates, cfg.window_radius, report.mean_point_count
    );
    println!(
        "{:>5} {:>14} {:>14}",
        "value", "children of O", "unbounded (m)"
    );
    for (c, m) in report
        .children_distribution
        .iter()
        .zip(&report.m_distribution)
    {
        println!(
            "{:>5} {:>13.2}% {:>13.2}%",
            c.value,
            100.0 * c.proportion,
            100.0 * m.proportion
        );
    }
    for f in report.sector_fits.iter().filter(|f| f.n > 0) {
        match (f.alpha_hat, f.beta_hat) {
            (Some(a), Some(b)) => println!("m={} n={}: alpha={a:.3} beta={b:.3}", f.m, f.n),
            _ => println!(
                "m={} n={}: {}",
                f.m,
                f.n,
                f.fit_error.as_deref().unwrap_or("no fit")
            ),
        }
    }
    println!("-> {}", path.display());
    Ok(())
}

fn load_or_sample(
    cfg: &RunConfig,
    sim: &SimArgs,
    points: Option<&Path>,
) -> Result<PointSet, Failure> {
    Ok(match points {
        Some(p) => read_points(p, sim.radius)?,
        None => sample_palm_ppp(cfg.intensity, cfg.window_radius, cfg.seed)?,
    })
}

fn interfaces(cfg: &RunConfig, sim: &SimArgs, points: Option<&Path>) -> Result<(), Failure> {
    let ps = load_or_sample(cfg, sim, points)?;
    let t = build_rst_indexed(&ps);
    let col = color_subtrees(&t, cfg.labeling, coloring_seed(cfg.seed))?;
    let scfg = SurvivorConfig::from_fractions(
        ps.window_radius(),
        cfg.cut_fraction,
        cfg.analysis_fraction,
    )?;
    let surv = Survivors::new(&t, scfg)?;
    let grid = cfg.r_grid(scfg.analysis_radius);
    let dir = out_dir(cfg)?;

    let mut written = 0;
    for i in col.colors() {
        for j in col.colors().filter(|&j| j != i) {
            let tr = trace_interface(&t, &col, i, j, &grid)?;
            if tr.birth.is_some() {
                write_interface(&dir.join(format!("interface_{i}_{j}.csv")), &tr)?;
                written += 1;
            }
        }
    }
    let alive = surviving_colors(&surv, &col);
    println!(
        "children of O: {}, surviving colours: {}, interface traces: {written} -> {}",
        col.num_colors(),
        alive.len(),
        dir.display()
    );
    if alive.len() < 2 {
        warn!("{} surviving colour(s): no sectors written", alive.len());
        return Ok(());
    }
    let mut sectors = sectors_at(&surv, &col, scfg.analysis_radius)?;
    sectors.sort_by_key(|s| s.color);
    write_rows(
        &dir.join("sector_summary.csv"),
        "color,phi,start,end",
        sectors.iter().map(|s| {
            format!(
                "{},{},{},{}",
                s.color,
                fmt_real(s.phi),
                fmt_real(s.start),
                fmt_real(s.end)
            )
        }),
    )?;
    for s in &sectors {
        println!("colour {}: phi = {:.6}", s.color, s.phi);
    }
    Ok(())
}

fn chi_grid(cfg: &RunConfig, sim: &SimArgs, points: Option<&Path>) -> Result<(), Failure> {
    let ps = load_or_sample(cfg, sim, points)?;
    let t = build_rst_indexed(&ps);
    let scfg = SurvivorConfig::from_fractions(
        ps.window_radius(),
        cfg.cut_fraction,
        cfg.analysis_fraction,
    )?;
    let surv = Survivors::new(&t, scfg)?;
    let rows = cfg
        .r_grid(scfg.analysis_radius)
        .into_iter()
        .map(|r| {
            let tilde = if r > FRAC_2_PI {
                Some(surv.chi_tilde(r)?)
            } else {
                None
            };
            Ok((r, surv.chi(r)?, tilde))
        })
        .collect::<Result<Vec<_>>>()?;
    let path = out_dir(cfg)?.join("chi.csv");
    write_chi(&path, &rows)?;
    println!("{} radii -> {}", rows.len(), path.display());
    Ok(())
}

#[derive(Serialize)]
struct FitSummary {
    m: usize,
    /// Replicates contributing a first-label sector.
    n: usize,
    alpha_hat: Option<f64>,
    beta_hat: Option<f64>,
    ks_d: Option<f64>,
    fit_error: Option<String>,
    /// `(colour, mean, standard error)` over all rows of that colour.
    label_means: Vec<(usize, f64, f64)>,
}

fn fit(cfg: &RunConfig, sectors: &Path) -> Result<(), Failure> {
    let rows = read_sectors(sectors)?;
    if rows.is_empty() {
        return Err(Failure::io(format!(
            "{}: no sector rows",
            sectors.display()
        )));
    }
    let mut by_m: BTreeMap<usize, BTreeMap<usize, Vec<f64>>> = BTreeMap::new();
    for r in &rows {
        by_m.entry(r.m)
            .or_default()
            .entry(r.color)
            .or_default()
            .push(r.phi);
    }
    let summaries: Vec<FitSummary> = by_m
        .into_iter()
        .map(|(m, colors)| {
            let first = colors.get(&1).cloned().unwrap_or_default();
            let (fit, fit_error) = match beta_moment_fit(&first) {
                Ok(f) => (Some(f), None),
                Err(e) => (None, Some(e.to_string())),
            };
            let ks_d = fit.and_then(|f| {
                let law = ScaledBeta::new(f.alpha_hat, f.beta_hat);
                ks_statistic(&first, |x| law.cdf(x)).ok()
            });
            let label_means = colors
                .iter()
                .map(|(&c, xs)| {
                    let (mean, se) = mean_and_se(xs);
                    (c, mean, se)
                })
                .collect();
            FitSummary {
                m,
                n: first.len(),
                alpha_hat: fit.map(|f| f.alpha_hat),
                beta_hat: fit.map(|f| f.beta_hat),
                ks_d,
                fit_error,
                label_means,
            }
        })
        .collect();
    for s in &summaries {
        match (s.alpha_hat, s.beta_hat, s.ks_d) {
            (Some(a), Some(b), Some(d)) => {
                println!("m={} n={}: alpha={a:.4} beta={b:.4} D={d:.4}", s.m, s.n)
            }
            _ => println!(
                "m={} n={}: {}",
                s.m,
                s.n,
                s.fit_error.as_deref().unwrap_or("no fit")
            ),
        }
    }
    let path = out_dir(cfg)?.join("fit.json");
    let json = serde_json::to_string_pretty(&summaries).expect("fit summary serializes");
    std::fs::write(&path, json + "\n")
        .map_err(|e| Failure::io(format!("{}: {e}", path.display())))?;
    Ok(())
}

fn scenario(cfg: &RunConfig, which: Scenario) -> Result<(), Failure> {
    let ps = match which {
        Scenario::M1 { eps } => make_m1_config(eps)?,
        Scenario::M2 {
            r1,
            r2,
            eps,
            angle_step,
        } => make_m2_config(r1, r2, eps.unwrap_or(0.02 * r1.min(r2)), angle_step)?,
    };
    let t = build_rst_indexed(&ps);
    check_tree(&t)?;
    let dir = out_dir(cfg)?;
    write_points(&dir.join("points.csv"), &ps)?;
    write_tree(&dir.join("tree.csv"), &t)?;
    let col = color_subtrees(&t, LabelScheme::Trigonometric, 0)?;
    let m = unbounded_count(&t, &col, SurvivorConfig::default_for(ps.window_radius()))?;
    println!(
        "{} points, window {:.4}, children of O: {}, unbounded colours: {m} -> {}",
        ps.len(),
        ps.window_radius(),
        t.children_of_origin().len(),
        dir.display()
    );
    Ok(())
}
