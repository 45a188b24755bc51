//! Subcommand implementations. Each returns its JSON result and the files
//! it would write under `--out`.

use std::path::Path;

use nctest::empirical_null::{falsify_subgroups, null_table, Method, NullTableConfig, Source};
use nctest::fdr::{pi_hat, stepup_threshold};
use nctest::local_fdr::{
    cdf_threshold, localfdr_curve, neighborhood_threshold, pdf_localfdr_baseline, Bandwidth,
};
use nctest::par::Execution;
use nctest::procedures::{permutation_global, run_procedure, GlobalStatistic, Procedure};
use nctest::simulation::{
    fisher_miscalibration_demo, power_vs_m, prds_counterexample, prds_counterexample_mc,
    run_table1, simes_permutation_diagnostic, SimConfig, BH_ORACLE, BH_RANC, BH_RAW,
};
use nctest::{
    load_csv, modified_ranc_pvalues, ranc_pvalues, tie_report, CsvSchema, Orientation, StatisticSet,
};
use serde_json::{json, Value};

use crate::output::{
    csv_string, num, opt_num, write_all, Artifact, InputDigest, OutTarget, RunManifest,
};
use crate::svg::{histogram, Plot, BLUE, GREEN, GREY, RED};
use crate::{
    CliError, Command, Direction, MethodArg, OutputArgs, PValueArg, Plots, Preset, ProcedureArg,
    SourceArg, StatisticArg,
};

struct Run {
    result: Value,
    artifacts: Vec<Artifact>,
}

fn orientation(d: Direction) -> Orientation {
    match d {
        Direction::Small => Orientation::SmallIsSignificant,
        Direction::Large => Orientation::LargeIsSignificant,
    }
}

fn load(
    path: &Path,
    direction: Direction,
    manifest: &mut RunManifest,
) -> Result<StatisticSet, CliError> {
    let bytes = std::fs::read(path).map_err(|e| CliError::io(path, e))?;
    manifest.input = Some(InputDigest {
        path: path.display().to_string(),
        bytes: bytes.len(),
        sha256: crate::output::sha256_hex(&bytes),
    });
    Ok(load_csv(
        bytes.as_slice(),
        &CsvSchema::with_orientation(orientation(direction)),
    )?)
}

/// User-scale statistics of the investigation set.
fn user_test_values(set: &StatisticSet) -> Vec<f64> {
    set.test_values()
        .into_iter()
        .map(|v| set.to_user_scale(v))
        .collect()
}

fn user_nc_values(set: &StatisticSet) -> Vec<f64> {
    set.nc_values()
        .into_iter()
        .map(|v| set.to_user_scale(v))
        .collect()
}

fn stats_histogram(set: &StatisticSet, title: &str) -> Plot {
    Plot::new(title, "statistic", "density")
        .bars(histogram(&user_test_values(set), 40), BLUE, "investigation")
        .bars(
            histogram(&user_nc_values(set), 40),
            GREY,
            "negative controls",
        )
}

pub fn run(
    command: Command,
    args: Vec<String>,
    threads: Option<usize>,
) -> Result<String, CliError> {
    let name = match &command {
        Command::Analyze { .. } => "analyze",
        Command::Stepup { .. } => "stepup",
        Command::Localfdr { .. } => "localfdr",
        Command::NullFit { .. } => "null-fit",
        Command::Falsify { .. } => "falsify",
        Command::Simulate { .. } => "simulate",
        Command::Permtest { .. } => "permtest",
    };
    let mut manifest = RunManifest::start(name, args, threads);
    let (output, run) = match command {
        Command::Analyze {
            input,
            output,
            procedure,
            q,
            alpha,
            gamma,
            pvalues,
        } => {
            let set = load(&input.input, input.direction, &mut manifest)?;
            (output, analyze(&set, procedure, q, alpha, gamma, pvalues)?)
        }
        Command::Stepup {
            input,
            output,
            q,
            lambda,
        } => {
            let set = load(&input.input, input.direction, &mut manifest)?;
            (output, stepup(&set, q, lambda)?)
        }
        Command::Localfdr {
            input,
            output,
            q,
            pi,
            lambda,
            radius,
        } => {
            let set = load(&input.input, input.direction, &mut manifest)?;
            (output, localfdr(&set, q, pi, lambda, radius)?)
        }
        Command::NullFit {
            input,
            output,
            q,
            sources,
            methods,
            bins,
            degree,
        } => {
            let set = load(&input.input, input.direction, &mut manifest)?;
            (output, null_fit(&set, q, &sources, &methods, bins, degree))
        }
        Command::Falsify { input, output } => {
            let set = load(&input.input, input.direction, &mut manifest)?;
            (output, falsify(&set)?)
        }
        Command::Simulate {
            output,
            preset,
            reps,
            seed,
            q,
        } => {
            manifest.seed = Some(seed);
            (output, simulate(preset, reps, seed, q)?)
        }
        Command::Permtest {
            input,
            output,
            statistic,
            b,
            seed,
            alpha,
        } => {
            manifest.seed = Some(seed);
            let set = load(&input.input, input.direction, &mut manifest)?;
            (output, permtest(&set, statistic, b, seed, alpha)?)
        }
    };
    finish(name, output, run, manifest)
}

fn finish(
    name: &str,
    output: OutputArgs,
    run: Run,
    mut manifest: RunManifest,
) -> Result<String, CliError> {
    let mut artifacts = run.artifacts;
    if output.plots == Plots::None {
        artifacts.retain(|a| matches!(a.kind, crate::output::ArtifactKind::Csv));
    }
    match &output.out {
        Some(out) => write_all(
            &OutTarget::parse(out),
            name,
            artifacts,
            &mut manifest,
            &run.result,
        )?,
        None if output.plots == Plots::Svg => {
            return Err(CliError::Usage("--plots svg requires --out".into()));
        }
        None => manifest.finished_at = crate::output::now_rfc3339(),
    }
    let mut doc = run.result;
    doc["manifest"] = serde_json::to_value(&manifest).expect("manifest serialises");
    Ok(serde_json::to_string_pretty(&doc).expect("json"))
}

fn analyze(
    set: &StatisticSet,
    procedure: ProcedureArg,
    q: Option<f64>,
    alpha: Option<f64>,
    gamma: f64,
    kind: PValueArg,
) -> Result<Run, CliError> {
    let procedure = match procedure {
        ProcedureArg::Bonferroni => Procedure::Bonferroni,
        ProcedureArg::Holm => Procedure::Holm,
        ProcedureArg::Hochberg => Procedure::Hochberg,
        ProcedureArg::Lr => Procedure::LehmannRomano,
        ProcedureArg::Bh => Procedure::BenjaminiHochberg,
    };
    let level = match (procedure, q, alpha) {
        (_, Some(_), Some(_)) => {
            return Err(CliError::Usage(
                "give either --q or --alpha, not both".into(),
            ))
        }
        (Procedure::BenjaminiHochberg, q, None) => q.unwrap_or(0.2),
        (Procedure::BenjaminiHochberg, None, Some(_)) => {
            return Err(CliError::Usage(
                "bh controls the FDR; set its level with --q".into(),
            ))
        }
        (_, Some(_), None) => {
            return Err(CliError::Usage(format!(
                "{procedure} controls the FWER; set its level with --alpha"
            )))
        }
        (_, None, a) => a.unwrap_or(0.05),
    };
    let p = match kind {
        PValueArg::Ranc => ranc_pvalues(set),
        PValueArg::Modified => modified_ranc_pvalues(set),
    };
    let r = run_procedure(procedure, &p, level, gamma)?;
    let test = user_test_values(set);
    let ids = set.test_ids();
    let mut rejected = vec![false; set.n()];
    r.rejected.iter().for_each(|&i| rejected[i] = true);
    // The least significant rejected statistic, on the user scale.
    let threshold_statistic = r
        .rejected
        .iter()
        .map(|&i| set.test_values()[i])
        .max_by(f64::total_cmp)
        .map(|t| set.to_user_scale(t));
    let ties = tie_report(set);

    let result = json!({
        "n": set.n(),
        "m": set.m(),
        "direction": set.orientation(),
        "pvalue_kind": p.kind,
        "procedure": procedure.to_string(),
        "level": level,
        "gamma": (procedure == Procedure::LehmannRomano).then_some(gamma),
        "rejections": r.count(),
        "rejected_ids": r.rejected_ids,
        "threshold_p": r.threshold,
        "threshold_statistic": threshold_statistic,
        "ties": { "groups": ties.groups.len(), "cross_role": ties.count_cross },
        "warnings": p.warnings,
        "pvalues": (0..set.n()).map(|i| json!({"id": ids[i], "statistic": test[i], "p": p.values[i], "rejected": rejected[i]})).collect::<Vec<_>>(),
    });
    let pcsv = csv_string(
        ["id", "statistic", "p", "rejected"],
        (0..set.n()).map(|i| {
            [
                ids[i].clone(),
                num(test[i]),
                num(p.values[i]),
                rejected[i].to_string(),
            ]
        }),
    );
    let audit = csv_string(
        ["rank", "id", "p", "boundary", "below_boundary"],
        r.audit.iter().map(|a| {
            [
                a.rank.to_string(),
                a.id.clone().unwrap_or_default(),
                num(a.p),
                num(a.boundary),
                a.below_boundary.to_string(),
            ]
        }),
    );
    let mut plot = stats_histogram(set, &format!("{procedure} on RANC p-values, level {level}"));
    if let Some(t) = threshold_statistic {
        plot = plot.vline(t, RED, "rejection threshold");
    }
    Ok(Run {
        result,
        artifacts: vec![
            Artifact::csv("pvalues.csv", pcsv),
            Artifact::csv("audit.csv", audit),
            Artifact::svg("histogram.svg", plot),
        ],
    })
}

fn stepup(set: &StatisticSet, q: f64, lambda: f64) -> Result<Run, CliError> {
    let r = stepup_threshold(set, lambda, q)?;
    let tau = r.tau.map(|t| set.to_user_scale(t));
    let result = json!({
        "n": set.n(),
        "m": set.m(),
        "direction": set.orientation(),
        "q": q,
        "lambda": lambda,
        "pi_hat": r.pi_hat,
        "tau": tau,
        "fdr_at_tau": r.fdr_at_tau,
        "rejections": r.rejected.len(),
        "rejected_ids": r.rejected_ids,
        "diagnostics": r.diagnostics,
    });
    let mut artifacts = Vec::new();
    let mut rejected = vec![false; set.n()];
    r.rejected.iter().for_each(|&i| rejected[i] = true);
    let ids = set.test_ids();
    let test = user_test_values(set);
    artifacts.push(Artifact::csv(
        "statistics.csv",
        csv_string(
            ["id", "statistic", "rejected"],
            (0..set.n()).map(|i| [ids[i].clone(), num(test[i]), rejected[i].to_string()]),
        ),
    ));
    if let Some(curve) = &r.fdr_curve {
        let rows: Vec<(f64, f64)> = curve
            .breakpoints
            .iter()
            .zip(&curve.values[1..])
            .map(|(&t, &v)| (set.to_user_scale(t), v))
            .collect();
        artifacts.push(Artifact::csv(
            "fdr_curve.csv",
            csv_string(
                ["t", "fdr_hat"],
                rows.iter().map(|&(t, v)| [num(t), num(v)]),
            ),
        ));
        let mut pts = rows.clone();
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        let span = pts
            .first()
            .zip(pts.last())
            .map(|(a, b)| vec![(a.0, q), (b.0, q)])
            .unwrap_or_default();
        let mut plot = Plot::new("Estimated FDR", "threshold", "estimated FDR")
            .step(pts, BLUE, "estimated FDR")
            .line(span, GREY, "target q");
        if let Some(t) = tau {
            plot = plot.vline(t, RED, "tau");
        }
        artifacts.push(Artifact::svg("fdr_curve.svg", plot));
    }
    let mut hist = stats_histogram(set, &format!("FDR step-up, q = {q}"));
    if let Some(t) = tau {
        hist = hist.vline(t, RED, "tau");
    }
    artifacts.push(Artifact::svg("histogram.svg", hist));
    Ok(Run { result, artifacts })
}

fn localfdr(
    set: &StatisticSet,
    q: f64,
    pi: Option<f64>,
    lambda: f64,
    radius: Option<f64>,
) -> Result<Run, CliError> {
    if !(q > 0.0 && q < 1.0) {
        return Err(
            nctest::Error::InvalidParameter(format!("q must lie in (0, 1), got {q}")).into(),
        );
    }
    let (pi, pi_source) = match pi {
        Some(p) => (p, "user"),
        None => {
            let est = pi_hat(set, lambda)?;
            if est.infinite || !(est.value > 0.0) {
                return Err(nctest::Error::InvalidParameter(
                    "null-proportion estimate unusable; pass --pi".into(),
                )
                .into());
            }
            (est.value.min(1.0), "estimated")
        }
    };
    let curve = localfdr_curve(set, pi)?;
    let lam = q / pi;
    let res = cdf_threshold(set, lam)?.with_level(q, pi);
    let tau = res.tau_hat.map(|t| set.to_user_scale(t));
    let baseline = pdf_localfdr_baseline(set, pi, Bandwidth::Silverman).ok();
    let baseline_tau = baseline
        .as_ref()
        .and_then(|b| b.threshold(q))
        .map(|t| set.to_user_scale(t));
    let neighbourhoods = match radius {
        Some(h) => Some(
            neighborhood_threshold(set, lam, h)?
                .iter()
                .map(|r| r.tau_hat.map(|t| set.to_user_scale(t)))
                .collect::<Vec<_>>(),
        ),
        None => None,
    };
    let ids = set.test_ids();
    let test = set.test_values();
    let lfdr: Vec<f64> = test.iter().map(|&t| curve.curve.eval(t)).collect();
    let mut rejected = vec![false; set.n()];
    res.rejected.iter().for_each(|&i| rejected[i] = true);
    let result = json!({
        "n": set.n(),
        "m": set.m(),
        "direction": set.orientation(),
        "q": q,
        "pi": pi,
        "pi_source": pi_source,
        "lambda": lam,
        "tau_hat": tau,
        "rejections": res.rejected.len(),
        "rejected_ids": res.rejected_ids,
        "baseline_tau": baseline_tau,
        "neighbourhood_taus": neighbourhoods,
        "curve": {
            "breakpoints": curve.curve.breakpoints.iter().map(|&t| set.to_user_scale(t)).collect::<Vec<_>>(),
            "values": curve.curve.values,
            "continuity": curve.curve.continuity,
        },
    });
    let user_test = user_test_values(set);
    let mut artifacts = vec![
        Artifact::csv(
            "lfdr.csv",
            csv_string(
                ["id", "statistic", "lfdr", "rejected"],
                (0..set.n()).map(|i| {
                    [
                        ids[i].clone(),
                        num(user_test[i]),
                        num(lfdr[i]),
                        rejected[i].to_string(),
                    ]
                }),
            ),
        ),
        Artifact::csv(
            "objective.csv",
            csv_string(
                ["t", "objective"],
                res.objective
                    .iter()
                    .map(|o| [num(set.to_user_scale(o.t)), num(o.value)]),
            ),
        ),
    ];
    let mut hist = stats_histogram(set, &format!("Local FDR, q = {q}, pi = {pi:.3}"));
    if let Some(t) = tau {
        hist = hist.vline(t, RED, "tau");
    }
    if let Some(t) = baseline_tau {
        hist = hist.vline(t, GREEN, "KDE baseline");
    }
    artifacts.push(Artifact::svg("histogram.svg", hist));
    let mut obj: Vec<(f64, f64)> = res
        .objective
        .iter()
        .filter(|o| o.t.is_finite())
        .map(|o| (set.to_user_scale(o.t), o.value))
        .collect();
    obj.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut oplot =
        Plot::new("Threshold objective", "t", "F0(t) - lambda F(t)").step(obj, BLUE, "objective");
    if let Some(t) = tau {
        oplot = oplot.vline(t, RED, "tau");
    }
    artifacts.push(Artifact::svg("objective.svg", oplot));
    let mut cpts: Vec<(f64, f64)> = user_test
        .iter()
        .copied()
        .zip(lfdr.iter().copied())
        .collect();
    cpts.sort_by(|a, b| a.0.total_cmp(&b.0));
    artifacts.push(Artifact::svg(
        "lfdr_curve.svg",
        Plot::new("Estimated local FDR", "statistic", "local FDR").step(cpts, BLUE, "estimate"),
    ));
    Ok(Run { result, artifacts })
}

fn null_fit(
    set: &StatisticSet,
    q: f64,
    sources: &[SourceArg],
    methods: &[MethodArg],
    bins: usize,
    degree: usize,
) -> Run {
    let sources: Vec<Source> = sources
        .iter()
        .map(|s| match s {
            SourceArg::Test => Source::Investigation,
            SourceArg::All => Source::All,
            SourceArg::Nc => Source::NegativeControls,
        })
        .collect();
    let methods: Vec<Method> = methods
        .iter()
        .map(|m| match m {
            MethodArg::Mad1 => Method::Mad1,
            MethodArg::Mad2 => Method::Mad2,
            MethodArg::Efron => Method::Efron,
            MethodArg::Ecdf => Method::Ecdf,
        })
        .collect();
    let config = NullTableConfig {
        q,
        bins,
        degree,
        ..NullTableConfig::default()
    };
    let rows = null_table(set, &sources, &methods, &config);
    // Location back on the user scale; the scale is orientation-free.
    let rows_json: Vec<Value> = rows
        .iter()
        .map(|r| {
            json!({
                "source": r.source.to_string(),
                "method": r.method.to_string(),
                "mu": r.mu.map(|m| set.to_user_scale(m)),
                "sigma": r.sigma,
                "ks_pvalue": r.ks_pvalue,
                "ad_pvalue": r.ad_pvalue,
                "n_in_window": r.n_in_window,
                "bh_rejections": r.bh_rejections,
                "error": r.error,
            })
        })
        .collect();
    let result = json!({
        "n": set.n(),
        "m": set.m(),
        "direction": set.orientation(),
        "q": q,
        "window": config.window,
        "bins": bins,
        "degree": degree,
        "rows": rows_json,
    });
    let table = csv_string(
        [
            "source",
            "method",
            "mu",
            "sigma",
            "ks_pvalue",
            "ad_pvalue",
            "n_in_window",
            "bh_rejections",
            "error",
        ],
        rows.iter().map(|r| {
            [
                r.source.to_string(),
                r.method.to_string(),
                opt_num(r.mu.map(|m| set.to_user_scale(m))),
                opt_num(r.sigma),
                opt_num(r.ks_pvalue),
                opt_num(r.ad_pvalue),
                r.n_in_window.map(|k| k.to_string()).unwrap_or_default(),
                r.bh_rejections.map(|k| k.to_string()).unwrap_or_default(),
                r.error.clone().unwrap_or_default(),
            ]
        }),
    );
    let all: Vec<f64> = user_test_values(set)
        .into_iter()
        .chain(user_nc_values(set))
        .collect();
    let lo = all.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = all.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut plot = Plot::new("Empirical null fits", "statistic", "density").bars(
        histogram(&all, 50),
        GREY,
        "all statistics",
    );
    let colors = [
        BLUE, RED, GREEN, "#9467bd", "#8c564b", "#e377c2", "#17becf", "#bcbd22", "#ff7f0e",
    ];
    for (k, r) in rows.iter().filter(|r| r.mu.is_some()).enumerate() {
        let (mu, sigma) = (
            set.to_user_scale(r.mu.unwrap_or_default()),
            r.sigma.unwrap_or(1.0),
        );
        let pts = (0..=200)
            .map(|j| {
                let x = lo + (hi - lo) * j as f64 / 200.0;
                let z = (x - mu) / sigma;
                (
                    x,
                    (-0.5 * z * z).exp() / (sigma * (2.0 * std::f64::consts::PI).sqrt()),
                )
            })
            .collect();
        plot = plot.line(
            pts,
            colors[k % colors.len()],
            &format!("{}/{}", r.source, r.method),
        );
    }
    Run {
        result,
        artifacts: vec![
            Artifact::csv("null_table.csv", table),
            Artifact::svg("null_fits.svg", plot),
        ],
    }
}

fn falsify(set: &StatisticSet) -> Result<Run, CliError> {
    let f = falsify_subgroups(set)?;
    // Quantiles back on the user scale: a sign flip maps the p-quantile to
    // the (1 - p)-quantile.
    let flip = set.orientation() == Orientation::LargeIsSignificant;
    let qq: Vec<(String, String, f64, f64, f64)> =
        f.qq.iter()
            .map(|p| {
                let prob = if flip { 1.0 - p.prob } else { p.prob };
                (
                    p.a.clone(),
                    p.b.clone(),
                    prob,
                    set.to_user_scale(p.qa),
                    set.to_user_scale(p.qb),
                )
            })
            .collect();
    let result = json!({
        "labels": f.labels,
        "matrix": f.matrix,
        "pairs": f.pairs,
    });
    let pairs = csv_string(
        ["a", "b", "ks_statistic", "p_value"],
        f.pairs
            .iter()
            .map(|p| [p.a.clone(), p.b.clone(), num(p.statistic), num(p.p_value)]),
    );
    let qq_csv = csv_string(
        ["a", "b", "prob", "quantile_a", "quantile_b"],
        qq.iter()
            .map(|(a, b, p, x, y)| [a.clone(), b.clone(), num(*p), num(*x), num(*y)]),
    );
    let colors = [BLUE, RED, GREEN, "#9467bd", "#8c564b", "#e377c2"];
    let mut plot = Plot::new(
        "Negative-control subgroup QQ plots",
        "quantile of first subgroup",
        "quantile of second subgroup",
    );
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for (k, pair) in f.pairs.iter().enumerate() {
        let pts: Vec<(f64, f64)> = qq
            .iter()
            .filter(|r| r.0 == pair.a && r.1 == pair.b)
            .map(|r| (r.3, r.4))
            .collect();
        for &(x, y) in &pts {
            lo = lo.min(x.min(y));
            hi = hi.max(x.max(y));
        }
        plot = plot.points(
            pts,
            colors[k % colors.len()],
            &format!("{} vs {}", pair.a, pair.b),
        );
    }
    if lo.is_finite() {
        plot = plot.line(vec![(lo, lo), (hi, hi)], GREY, "");
    }
    Ok(Run {
        result,
        artifacts: vec![
            Artifact::csv("pairs.csv", pairs),
            Artifact::csv("qq.csv", qq_csv),
            Artifact::svg("qq.svg", plot),
        ],
    })
}

/// `(n, n1, q)` panels of the power-versus-m study.
const POWER_PANELS: [(usize, usize, f64); 6] = [
    (100, 10, 0.2),
    (100, 10, 0.1),
    (200, 20, 0.2),
    (200, 20, 0.1),
    (200, 10, 0.2),
    (200, 10, 0.1),
];

fn simulate(
    preset: Preset,
    reps: Option<usize>,
    seed: u64,
    q: Option<f64>,
) -> Result<Run, CliError> {
    let exec = Execution::default();
    match preset {
        Preset::Table1 => {
            let base = SimConfig {
                reps: reps.unwrap_or(10_000),
                seed,
                q: q.unwrap_or(0.2),
                ..SimConfig::default()
            };
            let reports = run_table1(&base, exec)?;
            let mut rows = Vec::new();
            for r in &reports {
                for method in [BH_RAW, BH_RANC, BH_ORACLE] {
                    let s = r.method(method).expect("method present");
                    rows.push([
                        r.label.clone(),
                        method.to_string(),
                        num(s.fdp_mean),
                        num(s.fdp_sd),
                        num(s.tpr_mean),
                        num(s.tpr_sd),
                        r.reps.to_string(),
                    ]);
                }
            }
            Ok(Run {
                result: json!({"preset": "table1", "seed": seed, "reports": reports}),
                artifacts: vec![Artifact::csv(
                    "table1.csv",
                    csv_string(
                        [
                            "cell", "method", "fdp_mean", "fdp_sd", "tpr_mean", "tpr_sd", "reps",
                        ],
                        rows,
                    ),
                )],
            })
        }
        Preset::PowerVsM | Preset::PowerVsMWeak => {
            let weak = preset == Preset::PowerVsMWeak;
            let (mu_alt, m_max) = if weak { (-2.0, 1000) } else { (-3.0, 500) };
            let grid: Vec<usize> = (1..=m_max / 50).map(|k| 50 * k).collect();
            let reps = reps.unwrap_or(1000);
            let mut rows = Vec::new();
            let mut panels = Vec::new();
            let mut plot = Plot::new(
                if weak {
                    "Power versus m (weaker signal)"
                } else {
                    "Power versus m"
                },
                "number of negative controls",
                "BH RANC power / BH oracle power",
            );
            let colors = [BLUE, RED, GREEN, "#9467bd", "#8c564b", "#e377c2"];
            for (k, &(n, n1, panel_q)) in POWER_PANELS.iter().enumerate() {
                let cfg = SimConfig {
                    n0: n - n1,
                    n1,
                    q: q.unwrap_or(panel_q),
                    mu_alt,
                    reps,
                    seed: seed.wrapping_add(k as u64),
                    ..SimConfig::default()
                };
                let pts = power_vs_m(&cfg, &grid, exec)?;
                let mut line = Vec::new();
                for p in &pts {
                    rows.push([
                        n.to_string(),
                        n1.to_string(),
                        num(cfg.q),
                        p.m.to_string(),
                        num(p.ranc.tpr_mean),
                        num(p.oracle.tpr_mean),
                        num(p.ranc.fdp_mean),
                        num(p.oracle.fdp_mean),
                    ]);
                    line.push((p.m as f64, p.ranc.tpr_mean / p.oracle.tpr_mean));
                }
                plot = plot.line(line, colors[k], &format!("n={n}, n1={n1}, q={}", cfg.q));
                panels.push(json!({"n": n, "n1": n1, "q": cfg.q, "points": pts}));
            }
            Ok(Run {
                result: json!({"preset": if weak { "power-vs-m-weak" } else { "power-vs-m" }, "seed": seed, "mu_alt": mu_alt, "reps": reps, "panels": panels}),
                artifacts: vec![
                    Artifact::csv(
                        "power.csv",
                        csv_string(
                            [
                                "n",
                                "n1",
                                "q",
                                "m",
                                "ranc_tpr",
                                "oracle_tpr",
                                "ranc_fdp",
                                "oracle_fdp",
                            ],
                            rows,
                        ),
                    ),
                    Artifact::svg("power.svg", plot),
                ],
            })
        }
        Preset::B1 => {
            let draws = reps.unwrap_or(1_000_000);
            let exact = prds_counterexample();
            let mc = prds_counterexample_mc(draws, seed);
            let rows = vec![
                [
                    "p2=1 | p1=1/3".to_string(),
                    num(4.0 / 9.0),
                    num(exact.p_given_one_third),
                    num(mc.p_given_one_third),
                ],
                [
                    "p2=1 | p1=2/3".to_string(),
                    num(5.0 / 12.0),
                    num(exact.p_given_two_thirds),
                    num(mc.p_given_two_thirds),
                ],
            ];
            Ok(Run {
                result: json!({"preset": "b1", "seed": seed, "draws": draws, "closed_form": [4.0 / 9.0, 5.0 / 12.0], "quadrature": exact, "monte_carlo": mc}),
                artifacts: vec![Artifact::csv(
                    "b1.csv",
                    csv_string(["event", "closed_form", "quadrature", "monte_carlo"], rows),
                )],
            })
        }
        Preset::B2 => {
            let reps = reps.unwrap_or(1000);
            let d = fisher_miscalibration_demo(400, 400, reps, 1000, seed, exec)?;
            Ok(Run {
                result: json!({"preset": "b2", "seed": seed, "result": d}),
                artifacts: vec![Artifact::csv(
                    "b2.csv",
                    csv_string(
                        [
                            "n",
                            "m",
                            "reps",
                            "permutations",
                            "chi2_reject_rate",
                            "perm_reject_rate",
                        ],
                        [[
                            d.n.to_string(),
                            d.m.to_string(),
                            d.reps.to_string(),
                            d.permutations.to_string(),
                            num(d.chi2_reject_rate),
                            num(d.perm_reject_rate),
                        ]],
                    ),
                )],
            })
        }
        Preset::SimesPerm => {
            let perms = reps.unwrap_or(1000);
            let mut rows = Vec::new();
            let mut cdf_rows = Vec::new();
            let mut diags = Vec::new();
            let mut plot = Plot::new(
                "Permutation CDF of the Simes statistic (n = 25)",
                "statistic",
                "CDF",
            )
            .line(vec![(0.0, 0.0), (1.0, 1.0)], GREY, "uniform");
            for (k, m) in [25usize, 500].into_iter().enumerate() {
                let d =
                    simes_permutation_diagnostic(25, m, perms, seed.wrapping_add(k as u64), exec)?;
                rows.push([
                    m.to_string(),
                    num(d.quantile_05),
                    num(d.cdf_at_05),
                    num(d.observed),
                    num(d.p_value),
                ]);
                let len = d.samples.len() as f64;
                let pts: Vec<(f64, f64)> = d
                    .samples
                    .iter()
                    .enumerate()
                    .map(|(j, &v)| (v, (j + 1) as f64 / len))
                    .collect();
                for &(v, c) in &pts {
                    cdf_rows.push([m.to_string(), num(v), num(c)]);
                }
                plot = plot.step(pts, if k == 0 { BLUE } else { RED }, &format!("m = {m}"));
                diags.push(d);
            }
            Ok(Run {
                result: json!({"preset": "simes-perm", "seed": seed, "permutations": perms, "diagnostics": diags}),
                artifacts: vec![
                    Artifact::csv(
                        "simes_perm.csv",
                        csv_string(
                            ["m", "quantile_05", "cdf_at_05", "observed", "p_value"],
                            rows,
                        ),
                    ),
                    Artifact::csv(
                        "simes_perm_cdf.csv",
                        csv_string(["m", "statistic", "ecdf"], cdf_rows),
                    ),
                    Artifact::svg("simes_perm.svg", plot),
                ],
            })
        }
    }
}

fn permtest(
    set: &StatisticSet,
    statistic: StatisticArg,
    b: usize,
    seed: u64,
    alpha: f64,
) -> Result<Run, CliError> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(nctest::Error::InvalidParameter(format!(
            "alpha must lie in (0, 1), got {alpha}"
        ))
        .into());
    }
    let stat = match statistic {
        StatisticArg::Simes => GlobalStatistic::SimesMinRatio,
        StatisticArg::Fisher => GlobalStatistic::Fisher,
    };
    let r = permutation_global(set, &stat, b, seed, Execution::default())?;
    let result = json!({
        "n": set.n(),
        "m": set.m(),
        "statistic": r.statistic,
        "observed": r.observed,
        "p_value": r.p_value,
        "enumerated": r.enumerated,
        "null_size": r.null_samples.len(),
        "alpha": alpha,
        "reject": r.p_value <= alpha,
    });
    let samples = csv_string(
        ["index", "value"],
        r.null_samples
            .iter()
            .enumerate()
            .map(|(i, &v)| [i.to_string(), num(v)]),
    );
    let plot = Plot::new(
        &format!("Permutation null of {}", r.statistic),
        "statistic",
        "density",
    )
    .bars(histogram(&r.null_samples, 40), GREY, "permutation null")
    .vline(r.observed, RED, "observed");
    Ok(Run {
        result,
        artifacts: vec![
            Artifact::csv("null_samples.csv", samples),
            Artifact::svg("null.svg", plot),
        ],
    })
}
