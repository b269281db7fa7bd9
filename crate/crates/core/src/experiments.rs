//! Named experiments behind a common trait, selected at runtime.
//!
//! Every experiment takes a full [`RunConfig`], assembles its inputs, runs
//! the corresponding statistic and returns an [`ExperimentReport`] with a
//! pass verdict, a JSON summary and plot-ready curves.

use crate::config::RunConfig;
use crate::construction::{rule_by_name, Realization};
use crate::error::Error;
use crate::geometry::{default_c_geom, net_transfer_audit, strip_count_audit, Net, NetParams};
use crate::measure::NaturalMeasure;
use crate::report::{Curve, ExperimentReport};
use crate::stats::{
    box_dimension_estimate, conditional_mgf_check, good_event_frequency, martingale_check,
    tail_trend, tube_sup_scan_multi, ConcentrationParams, FREQ_SIGMA,
};
use crate::Result;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;
use std::sync::Arc;
use std::time::Instant;

pub trait Experiment: Send + Sync {
    fn name(&self) -> &'static str;
    fn run(&self, cfg: &RunConfig) -> Result<ExperimentReport>;
}

/// All registered experiments.
pub fn registry() -> Vec<Arc<dyn Experiment>> {
    vec![
        Arc::new(MartingaleExperiment),
        Arc::new(MgfExperiment),
        Arc::new(TailExperiment),
        Arc::new(GoodEventsExperiment),
        Arc::new(TubeScanExperiment),
        Arc::new(BoxDimExperiment),
        Arc::new(AhlforsExperiment),
        Arc::new(NetAuditExperiment),
    ]
}

pub fn experiment_names() -> Vec<&'static str> {
    registry().iter().map(|e| e.name()).collect()
}

pub fn experiment_by_name(name: &str) -> Result<Arc<dyn Experiment>> {
    registry()
        .into_iter()
        .find(|e| e.name() == name)
        .ok_or_else(|| Error::UnknownExperiment(name.to_string()))
}

fn finish(
    name: &str,
    cfg: &RunConfig,
    started: Instant,
    passed: bool,
    summary: serde_json::Value,
    curves: Vec<Curve>,
) -> Result<ExperimentReport> {
    Ok(ExperimentReport::new(
        name,
        serde_json::to_value(cfg)?,
        passed,
        started.elapsed().as_secs_f64(),
        summary,
        curves,
    ))
}

/// Derive concentration parameters for level `n`, honoring config overrides.
fn concentration_for(cfg: &RunConfig, n: usize) -> Result<ConcentrationParams> {
    let cc = cfg.require_concentration()?;
    let mut cp = ConcentrationParams::derive(&cfg.params, cc.t, cc.k, cc.eps, n)?;
    if let Some(l) = cc.lambda {
        cp.lambda = l;
    }
    if let Some(l0) = cc.lambda0 {
        cp.lambda0 = l0;
    }
    if cc.lambda.is_some() || cc.lambda0.is_some() {
        cp.check_mgf_hypothesis(&cfg.params, n)?;
    }
    Ok(cp)
}

struct MartingaleExperiment;

impl Experiment for MartingaleExperiment {
    fn name(&self) -> &'static str {
        "martingale"
    }

    fn run(&self, cfg: &RunConfig) -> Result<ExperimentReport> {
        let started = Instant::now();
        let rule = rule_by_name(&cfg.rule)?;
        let n = cfg.require_level()?;
        let w = cfg.require_flat()?;
        let rep = martingale_check(&cfg.params, rule.as_ref(), &w, n, cfg.trials, cfg.seed)?;
        let mut curve = Curve::new("mean", &["level", "y_prev", "mean", "std_err"]);
        curve.push(vec![n as f64, rep.y_prev, rep.mean, rep.std_err]);
        finish(
            self.name(),
            cfg,
            started,
            rep.pass,
            serde_json::to_value(&rep)?,
            vec![curve],
        )
    }
}

struct MgfExperiment;

impl Experiment for MgfExperiment {
    fn name(&self) -> &'static str {
        "mgf"
    }

    fn run(&self, cfg: &RunConfig) -> Result<ExperimentReport> {
        let started = Instant::now();
        let rule = rule_by_name(&cfg.rule)?;
        let n = cfg.require_level()?;
        let w = cfg.require_flat()?;
        let cp = concentration_for(cfg, n)?;
        let rep =
            conditional_mgf_check(&cfg.params, rule.as_ref(), &w, n, &cp, cfg.trials, cfg.seed)?;
        let mut curve = Curve::new("mgf", &["level", "empirical", "bound", "std_err"]);
        curve.push(vec![n as f64, rep.empirical_mgf, rep.bound, rep.std_err]);
        finish(
            self.name(),
            cfg,
            started,
            rep.pass,
            json!({ "report": rep, "concentration": cp }),
            vec![curve],
        )
    }
}

struct TailExperiment;

impl Experiment for TailExperiment {
    fn name(&self) -> &'static str {
        "tail"
    }

    fn run(&self, cfg: &RunConfig) -> Result<ExperimentReport> {
        let started = Instant::now();
        let rule = rule_by_name(&cfg.rule)?;
        let n = cfg.require_level()?;
        let w = cfg.require_flat()?;
        let cp_top = concentration_for(cfg, n)?;
        let first = (cp_top.n0 + 1).min(n);
        let (reports, nonincreasing) = tail_trend(
            &cfg.params,
            rule.as_ref(),
            &w,
            first..=n,
            |m| concentration_for(cfg, m),
            cfg.trials,
            cfg.seed,
        )?;
        let mut curve = Curve::new(
            "tail",
            &["level", "frequency", "std_err", "bound", "threshold"],
        );
        for r in &reports {
            curve.push(vec![
                r.level as f64,
                r.frequency,
                r.std_err,
                r.bound,
                r.threshold,
            ]);
        }
        let passed = nonincreasing && reports.iter().all(|r| r.pass);
        finish(
            self.name(),
            cfg,
            started,
            passed,
            json!({ "reports": reports, "nonincreasing": nonincreasing }),
            vec![curve],
        )
    }
}

struct GoodEventsExperiment;

impl Experiment for GoodEventsExperiment {
    fn name(&self) -> &'static str {
        "good-events"
    }

    fn run(&self, cfg: &RunConfig) -> Result<ExperimentReport> {
        let started = Instant::now();
        let rule = rule_by_name(&cfg.rule)?;
        let n = cfg.require_level()?;
        let cp = concentration_for(cfg, n)?;
        let d = cfg.params.dim;
        let m = d - cp.k;
        let net = Net::build(
            NetParams::for_level(&cfg.params, n, default_c_geom(d, m)),
            d,
            m,
        )?;
        let rep = good_event_frequency(
            &cfg.params,
            rule.as_ref(),
            &net,
            n,
            &cp,
            cfg.trials,
            cfg.net_member_budget,
            cfg.seed,
        )?;
        // Failure budget: the per-level tail bounds summed over the active
        // levels, plus the frequency noise.
        let fail_budget: f64 = ((cp.n0 + 1)..=n)
            .map(|i| cp.tail_bound(&cfg.params, i))
            .sum();
        let passed = rep.frequency + FREQ_SIGMA * rep.std_err >= 1.0 - fail_budget - 1e-12;
        let mut curve = Curve::new("good_events", &["level", "frequency", "std_err", "bound"]);
        curve.push(vec![n as f64, rep.frequency, rep.std_err, rep.bound]);
        finish(
            self.name(),
            cfg,
            started,
            passed,
            json!({ "report": rep, "concentration": cp, "fail_budget": fail_budget }),
            vec![curve],
        )
    }
}

struct TubeScanExperiment;

impl Experiment for TubeScanExperiment {
    fn name(&self) -> &'static str {
        "tube-scan"
    }

    fn run(&self, cfg: &RunConfig) -> Result<ExperimentReport> {
        let started = Instant::now();
        let tc = cfg
            .tube_scan
            .as_ref()
            .ok_or_else(|| Error::Config("missing 'tube_scan'".into()))?;
        let r = Realization::build_named(&cfg.params, &cfg.rule, cfg.seed)?;
        let scans = tube_sup_scan_multi(
            &r,
            &tc.t_values,
            &tc.widths,
            tc.tubes_per_width,
            tc.strategy,
            cfg.seed,
        )?;
        let mut passed = true;
        let mut growth = Vec::new();
        let mut curves = Vec::new();
        for scan in &scans {
            let mut curve = Curve::new(
                format!("ratio_t{}", scan.t),
                &["width", "max_mass", "max_ratio", "resolution_limited"],
            );
            for row in &scan.rows {
                curve.push(vec![
                    row.width,
                    row.max_mass,
                    row.max_ratio,
                    row.resolution_limited as u8 as f64,
                ]);
            }
            curves.push(curve);
            let safe: Vec<_> = scan.rows.iter().filter(|r| !r.resolution_limited).collect();
            let widest = safe
                .iter()
                .max_by(|a, b| a.width.total_cmp(&b.width))
                .map(|r| r.max_ratio);
            let narrowest = safe
                .iter()
                .min_by(|a, b| a.width.total_cmp(&b.width))
                .map(|r| r.max_ratio);
            let g = match (widest, narrowest) {
                (Some(w0), Some(w1)) if w0 > 0.0 => w1 / w0,
                _ => 1.0,
            };
            growth.push(json!({ "t": scan.t, "growth": g }));
            passed &= g <= tc.growth_bound;
        }
        finish(
            self.name(),
            cfg,
            started,
            passed,
            json!({ "scans": scans, "growth": growth, "growth_bound": tc.growth_bound }),
            curves,
        )
    }
}

struct BoxDimExperiment;

impl Experiment for BoxDimExperiment {
    fn name(&self) -> &'static str {
        "box-dim"
    }

    fn run(&self, cfg: &RunConfig) -> Result<ExperimentReport> {
        let started = Instant::now();
        let bc = cfg
            .box_dim
            .as_ref()
            .ok_or_else(|| Error::Config("missing 'box_dim'".into()))?;
        let r = Realization::build_named(&cfg.params, &cfg.rule, cfg.seed)?;
        let d = cfg.params.dim;
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0xD1FF);
        let mut curve = Curve::new("slopes", &["index", "slope", "residual"]);
        let mut reports = Vec::new();
        let mut passed = true;
        for i in 0..bc.directions {
            let dir: Vec<f64> = loop {
                let v: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0f64)).collect();
                let n: f64 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
                if n > 1e-3 && n <= 1.0 {
                    break v.iter().map(|x| x / n).collect();
                }
            };
            let rep = box_dimension_estimate(&r, &dir, bc.depth_min..=bc.depth_max)?;
            passed &= rep.slope >= bc.slope_min && rep.slope <= bc.slope_max;
            curve.push(vec![i as f64, rep.slope, rep.residual]);
            reports.push(rep);
        }
        let slopes: Vec<f64> = reports.iter().map(|r| r.slope).collect();
        let min = slopes.iter().cloned().fold(f64::INFINITY, f64::min);
        let max = slopes.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        finish(
            self.name(),
            cfg,
            started,
            passed,
            json!({
                "directions": bc.directions,
                "min_slope": min,
                "max_slope": max,
                "window": [bc.slope_min, bc.slope_max],
            }),
            vec![curve],
        )
    }
}

struct AhlforsExperiment;

impl Experiment for AhlforsExperiment {
    fn name(&self) -> &'static str {
        "ahlfors"
    }

    fn run(&self, cfg: &RunConfig) -> Result<ExperimentReport> {
        let started = Instant::now();
        let ac = cfg
            .ahlfors
            .as_ref()
            .ok_or_else(|| Error::Config("missing 'ahlfors'".into()))?;
        let r = Realization::build_named(&cfg.params, &cfg.rule, cfg.seed)?;
        let exponent = ac
            .exponent
            .unwrap_or_else(|| cfg.params.dimension_value(cfg.params.depth()));
        let scan = NaturalMeasure::at_deepest(&r)
            .ahlfors_scan(ac.samples, &ac.radii, exponent, cfg.seed)?;
        let ratio = scan.max_ratio / scan.min_ratio;
        let passed = scan.min_ratio > 0.0 && ratio <= ac.ratio_bound;
        let mut curve = Curve::new("ratios", &["radius", "ratio", "lower", "upper"]);
        for row in &scan.rows {
            curve.push(vec![row.radius, row.ratio, row.mass.lower, row.mass.upper]);
        }
        finish(
            self.name(),
            cfg,
            started,
            passed,
            json!({
                "exponent": exponent,
                "min_ratio": scan.min_ratio,
                "max_ratio": scan.max_ratio,
                "spread": ratio,
                "ratio_bound": ac.ratio_bound,
                "max_bracket_width": scan.max_bracket_width,
            }),
            vec![curve],
        )
    }
}

struct NetAuditExperiment;

impl Experiment for NetAuditExperiment {
    fn name(&self) -> &'static str {
        "net-audit"
    }

    fn run(&self, cfg: &RunConfig) -> Result<ExperimentReport> {
        let started = Instant::now();
        let n = cfg.require_level()?;
        let c_geom = default_c_geom(cfg.params.dim, cfg.params.dim - 1);
        let net_rep = net_transfer_audit(&cfg.params, n, cfg.trials, c_geom, cfg.seed)?;
        let r = Realization::build_named(&cfg.params, &cfg.rule, cfg.seed)?;
        let strip_rep = strip_count_audit(&r, n, cfg.trials, 200, c_geom, cfg.seed)?;
        let passed = net_rep.pass && strip_rep.pass;
        let mut curve = Curve::new(
            "constants",
            &[
                "level",
                "max_rho_over_eps",
                "max_transfer",
                "max_boundary",
                "max_strip",
            ],
        );
        curve.push(vec![
            n as f64,
            net_rep.max_rho / net_rep.eps,
            net_rep.max_transfer_const,
            net_rep.max_boundary_const,
            strip_rep.max_strip_const,
        ]);
        finish(
            self.name(),
            cfg,
            started,
            passed,
            json!({ "net": net_rep, "strips": strip_rep }),
            vec![curve],
        )
    }
}
