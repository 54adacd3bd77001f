use std::collections::BTreeMap;

use missing_mass_bounds::bounds::{
    c_eps, compensation_gap_bound, crossover, gamma_eps, missing_mass_bound, min_sample_size, BoundSide,
    ComparatorSpec,
};
use missing_mass_bounds::distributions::{absorb, split, split_then_absorb, thresholds, PartitionSpec};
use missing_mass_bounds::lambert::lambert_w_minus1;
use missing_mass_bounds::missing_mass::{
    exact_deviation_prob_with, exact_distribution, expected_missing_mass, mc_deviation_probs, missing_mass_stats,
    DeviationQuery, Method, Side, MAX_EXACT_SUPPORT,
};
use missing_mass_bounds::na_checks::{na_monotone_test, MonotoneFn, Verdict};
use missing_mass_bounds::tilt_entropy::check_partition_monotonicity;
use missing_mass_bounds::{Comparator, Deviation, Distribution, Error, Pmf};
use serde_json::{json, Value};

use crate::args::{Cli, Command, MethodArg, NPoint, SidesArg, TransformOp};
use crate::output::{Cell, Report, Table};
use crate::{read_json, CliError};

pub fn run(cli: &Cli) -> Result<Report, CliError> {
    let seed = cli.global.seed;
    match &cli.command {
        Command::Bound { epsilon, n, side } => bound(*epsilon, *n, (*side).into()),
        Command::Gamma { epsilon } => gamma(*epsilon),
        Command::Crossover { coefficient, side, label } => {
            let side: BoundSide = (*side).into();
            let label = label.clone().unwrap_or_else(|| Comparator::default_for(side).source_label);
            crossover_report(&ComparatorSpec::new(*coefficient, side, label)?)
        }
        Command::Stats { dist, n } => stats(&dist.build()?, *n),
        Command::Exact { dist, n, epsilon, side, model } => {
            let est = exact_deviation_prob_with(&dist.build()?, *n, *epsilon, (*side).into(), model.model())?;
            Ok(deviation_report(&est, json!({ "model": model.model() })))
        }
        Command::Simulate { dist, n, epsilon, side, trials, model } => {
            let query = DeviationQuery { epsilon: *epsilon, side: (*side).into() };
            let est = mc_deviation_probs(&dist.build()?, *n, &[query], *trials, seed, model.model())?.remove(0);
            Ok(deviation_report(&est, json!({ "model": model.model(), "seed": seed })))
        }
        Command::Verify { dist, epsilon_grid, n_grid, side, method, trials } => {
            verify(&dist.build()?, epsilon_grid, n_grid, *side, *method, *trials, seed)
        }
        Command::Transform { dist, theta, n, op } => transform(&dist.build()?, *theta, *n, *op),
        Command::EntropyCheck { pmf, partition, x } => {
            let pmf: Pmf = read_json(pmf)?;
            let spec: PartitionSpec = read_json(partition)?;
            entropy_check(&pmf, &spec, x)
        }
        Command::NaCheck { dist, n, trials, set_a, set_b, f, g } => {
            let d = dist.build()?;
            let battery = match (set_a, set_b) {
                (Some(a), Some(b)) => vec![(a.clone(), b.clone(), *f, *g)],
                _ => default_battery(&d, *n)?,
            };
            na_check(&d, *n, &battery, *trials, seed)
        }
    }
}

fn to_json<S: serde::Serialize>(value: &S) -> Value {
    serde_json::to_value(value).expect("report types serialize to JSON")
}

fn side_name(side: Side) -> &'static str {
    match side {
        Side::Upper => "upper",
        Side::Lower => "lower",
    }
}

fn bound(epsilon: f64, n: u64, side: BoundSide) -> Result<Report, CliError> {
    let r = missing_mass_bound(epsilon, n, side)?;
    let mut table = Table::new(vec!["epsilon", "n", "gamma", "c", "exponent", "bound", "n_min", "side", "domain_ok"]);
    table.row(vec![
        r.epsilon.into(),
        r.n.into(),
        r.gamma.into(),
        r.c.into(),
        r.exponent.into(),
        r.bound.into(),
        r.n_min.into(),
        r.side.as_str().into(),
        r.domain_ok.into(),
    ]);
    Ok(Report { json: to_json(&r), tables: vec![table] })
}

fn gamma(epsilon: f64) -> Result<Report, CliError> {
    let g = gamma_eps(epsilon)?;
    let c = c_eps(epsilon)?;
    let n_min = min_sample_size(epsilon)?;
    let gap = compensation_gap_bound(epsilon)?;
    let w = lambert_w_minus1(-epsilon / (2.0 * 0.5f64.exp()))?;
    let mut table = Table::new(vec!["epsilon", "gamma", "c", "n_min", "gap_bound", "lambert_w"]);
    table.row(vec![epsilon.into(), g.into(), c.into(), n_min.into(), gap.into(), w.value.into()]);
    let json = json!({
        "epsilon": epsilon,
        "gamma": g,
        "c": c,
        "n_min": n_min,
        "gap_bound": gap,
        "lambert_w": w,
    });
    Ok(Report { json, tables: vec![table] })
}

fn crossover_report(spec: &Comparator) -> Result<Report, CliError> {
    let eps = crossover(spec)?;
    let ratio = c_eps(eps)? / eps;
    let mut table = Table::new(vec!["coefficient", "side", "crossover", "c_over_eps", "source_label"]);
    table.row(vec![
        spec.coefficient.into(),
        spec.side.as_str().into(),
        eps.into(),
        ratio.into(),
        spec.source_label.clone().into(),
    ]);
    let json = json!({ "comparator": spec, "crossover": eps, "c_over_eps": ratio });
    Ok(Report { json, tables: vec![table] })
}

fn stats(dist: &Distribution, n: u64) -> Result<Report, CliError> {
    let s = missing_mass_stats(dist, n);
    let mut table = Table::new(vec!["n", "support", "mean", "variance_proxy", "weighted_variance"]);
    table.row(vec![n.into(), dist.len().into(), s.mean.into(), s.variance_proxy.into(), s.weighted_variance.into()]);
    let mut json = to_json(&s);
    json["support"] = json!(dist.len());
    json["total_mass"] = json!(dist.total_mass());
    Ok(Report { json, tables: vec![table] })
}

fn deviation_report(est: &Deviation, extra: Value) -> Report {
    let method = match est.method {
        Method::Exact => "exact",
        Method::MonteCarlo => "monte_carlo",
    };
    let mut table = Table::new(vec!["epsilon", "n", "side", "method", "mean", "estimate", "ci_low", "ci_high", "trials"]);
    table.row(vec![
        est.epsilon.into(),
        est.n.into(),
        side_name(est.side).into(),
        method.into(),
        est.mean.into(),
        est.estimate.into(),
        est.ci_low.into(),
        est.ci_high.into(),
        est.trials.into(),
    ]);
    let mut json = to_json(est);
    if let (Value::Object(target), Value::Object(more)) = (&mut json, extra) {
        target.extend(more);
    }
    Report { json, tables: vec![table] }
}

/// One grid point of `verify`.
struct Point {
    epsilon: f64,
    n: u64,
    side: Side,
    n_min: u64,
    result: Option<(Deviation, f64)>,
}

#[allow(clippy::too_many_arguments)]
fn verify(
    dist: &Distribution,
    epsilons: &[f64],
    n_grid: &[NPoint],
    sides: SidesArg,
    method: MethodArg,
    trials: u64,
    seed: u64,
) -> Result<Report, CliError> {
    let exact = match method {
        MethodArg::Exact => true,
        MethodArg::Mc => false,
        MethodArg::Auto => dist.len() <= MAX_EXACT_SUPPORT,
    };
    // Grid points grouped by n, so each sample size is simulated once.
    let mut by_n: BTreeMap<u64, Vec<(f64, u64)>> = BTreeMap::new();
    for &eps in epsilons {
        let n_min = min_sample_size(eps)?;
        for point in n_grid {
            let n = match *point {
                NPoint::Fixed(n) => n,
                NPoint::MinMultiple(k) => k * n_min,
            };
            let list = by_n.entry(n).or_default();
            if !list.iter().any(|&(e, _)| e == eps) {
                list.push((eps, n_min));
            }
        }
    }

    let mut points = Vec::new();
    for (&n, list) in &by_n {
        let queries: Vec<DeviationQuery<f64>> = list
            .iter()
            .filter(|&&(_, n_min)| n >= n_min)
            .flat_map(|&(epsilon, _)| sides.sides().iter().map(move |&side| DeviationQuery { epsilon, side }))
            .collect();
        let estimates = if queries.is_empty() {
            Vec::new()
        } else if exact {
            let law = exact_distribution(dist, n)?;
            let mean = expected_missing_mass(dist, n);
            queries
                .iter()
                .map(|q| {
                    let p = law.deviation(mean, q.epsilon, q.side).min(1.0);
                    Deviation {
                        estimate: p,
                        ci_low: p,
                        ci_high: p,
                        trials: 0,
                        method: Method::Exact,
                        side: q.side,
                        epsilon: q.epsilon,
                        n,
                        mean,
                    }
                })
                .collect()
        } else {
            mc_deviation_probs(dist, n, &queries, trials, seed, Default::default())?
        };
        for &(epsilon, n_min) in list {
            for &side in sides.sides() {
                let result = match estimates.iter().find(|e| e.epsilon == epsilon && e.side == side) {
                    Some(est) => Some((*est, missing_mass_bound(epsilon, n, side_bound(side))?.bound)),
                    None => None,
                };
                points.push(Point { epsilon, n, side, n_min, result });
            }
        }
    }
    points.sort_by(|a, b| {
        a.epsilon.total_cmp(&b.epsilon).then(a.n.cmp(&b.n)).then((a.side == Side::Lower).cmp(&(b.side == Side::Lower)))
    });

    let mut table = Table::new(vec![
        "epsilon", "n", "side", "n_min", "status", "method", "probability", "ci_low", "ci_high", "bound", "holds",
    ]);
    let mut rows = Vec::new();
    let (mut checked, mut skipped, mut all_hold) = (0, 0, true);
    for p in &points {
        let mut cells: Vec<Cell> = vec![p.epsilon.into(), p.n.into(), side_name(p.side).into(), p.n_min.into()];
        match &p.result {
            Some((est, bound)) => {
                // A failure needs the whole interval above the bound.
                let holds = est.ci_low <= *bound;
                checked += 1;
                all_hold &= holds;
                let method = if exact { "exact" } else { "monte_carlo" };
                cells.extend([
                    "checked".into(),
                    method.into(),
                    est.estimate.into(),
                    est.ci_low.into(),
                    est.ci_high.into(),
                    (*bound).into(),
                    holds.into(),
                ]);
                rows.push(json!({
                    "epsilon": p.epsilon, "n": p.n, "side": p.side, "n_min": p.n_min, "status": "checked",
                    "method": method, "probability": est.estimate, "ci_low": est.ci_low, "ci_high": est.ci_high,
                    "bound": bound, "holds": holds,
                }));
            }
            None => {
                skipped += 1;
                cells.extend(["skipped".into(), Cell::Empty, Cell::Empty, Cell::Empty, Cell::Empty, Cell::Empty, Cell::Empty]);
                rows.push(json!({
                    "epsilon": p.epsilon, "n": p.n, "side": p.side, "n_min": p.n_min, "status": "skipped",
                    "reason": "n below n_min",
                }));
            }
        }
        table.row(cells);
    }
    let json = json!({
        "support": dist.len(),
        "method": if exact { "exact" } else { "monte_carlo" },
        "trials": if exact { 0 } else { trials },
        "seed": seed,
        "checked": checked,
        "skipped": skipped,
        "all_hold": all_hold,
        "points": rows,
    });
    Ok(Report { json, tables: vec![table] })
}

fn side_bound(side: Side) -> BoundSide {
    match side {
        Side::Upper => BoundSide::Upper,
        Side::Lower => BoundSide::Lower,
    }
}

fn transform(dist: &Distribution, theta: f64, n: u64, op: TransformOp) -> Result<Report, CliError> {
    let (tau, tau_prime) = thresholds(theta, n)?;
    let out = match op {
        TransformOp::Split => split(dist, theta, n)?,
        TransformOp::Absorb => absorb(dist, theta, n)?,
        TransformOp::Both => split_then_absorb(dist, theta, n)?,
    };
    let (before, after) = (missing_mass_stats(dist, n), missing_mass_stats(&out, n));
    let gap = expected_missing_mass(&out, n) - expected_missing_mass(dist, n);
    let gap_limit = (-theta).exp();
    let split_gap = match op {
        TransformOp::Both => Some(expected_missing_mass(&split(dist, theta, n)?, n) - expected_missing_mass(dist, n)),
        _ => None,
    };
    let variance_limit = theta / n as f64 * gap_limit;
    let in_band = out.weights().iter().all(|&w| w >= tau && w < tau_prime);
    let op_name = match op {
        TransformOp::Split => "split",
        TransformOp::Absorb => "absorb",
        TransformOp::Both => "split_then_absorb",
    };

    let diagnostics: Vec<(&'static str, Cell)> = vec![
        ("op", op_name.into()),
        ("theta", theta.into()),
        ("n", n.into()),
        ("tau", tau.into()),
        ("tau_prime", tau_prime.into()),
        ("bins_before", dist.len().into()),
        ("bins_after", out.len().into()),
        ("mass_before", dist.total_mass().into()),
        ("mass_after", out.total_mass().into()),
        ("mean_before", before.mean.into()),
        ("mean_after", after.mean.into()),
        ("gap", gap.into()),
        ("split_gap", split_gap.into()),
        ("gap_limit", gap_limit.into()),
        ("variance_proxy_after", after.variance_proxy.into()),
        ("variance_limit", variance_limit.into()),
        ("all_in_band", in_band.into()),
    ];
    let mut summary = Table::new(vec!["quantity", "value"]).titled("diagnostics");
    for (name, value) in &diagnostics {
        summary.row(vec![(*name).into(), value.clone()]);
    }
    let mut bins = Table::new(vec!["index", "label", "weight"]).titled("bins");
    let labels = out.labels();
    for (i, &w) in out.weights().iter().enumerate() {
        bins.row(vec![i.into(), labels.map(|l| l[i].clone()).into(), w.into()]);
    }
    let json = json!({
        "op": op_name,
        "theta": theta,
        "n": n,
        "tau": tau,
        "tau_prime": tau_prime,
        "diagnostics": {
            "bins_before": dist.len(),
            "bins_after": out.len(),
            "mass_before": dist.total_mass(),
            "mass_after": out.total_mass(),
            "mean_before": before.mean,
            "mean_after": after.mean,
            "gap": gap,
            "split_gap": split_gap,
            "gap_limit": gap_limit,
            "variance_proxy_after": after.variance_proxy,
            "variance_limit": variance_limit,
            "all_in_band": in_band,
        },
        "distribution": out,
    });
    Ok(Report { json, tables: vec![summary, bins] })
}

fn entropy_check(pmf: &Pmf, spec: &PartitionSpec, xs: &[f64]) -> Result<Report, CliError> {
    let mut table = Table::new(vec![
        "x",
        "entropy",
        "lambda",
        "coarse_entropy",
        "coarse_chernoff_entropy",
        "divergence",
        "coarse_divergence",
        "tail",
        "holds",
    ]);
    let mut reports = Vec::new();
    for &x in xs {
        let r = check_partition_monotonicity(pmf, spec, x)?;
        table.row(vec![
            r.x.into(),
            r.entropy.into(),
            r.lambda.into(),
            r.coarse_entropy.into(),
            r.coarse_chernoff_entropy.into(),
            r.divergence.into(),
            r.coarse_divergence.into(),
            r.tail.into(),
            r.holds().into(),
        ]);
        reports.push(r);
    }
    let all_hold = reports.iter().all(|r| r.holds());
    Ok(Report { json: json!({ "all_hold": all_hold, "reports": reports }), tables: vec![table] })
}

type NaTest = (Vec<usize>, Vec<usize>, MonotoneFn, MonotoneFn);

/// Pairs of singletons, halves, interleaved sets and a singleton against
/// the upper half. Indicator thresholds sit at each set's expected count.
fn default_battery(dist: &Distribution, n: u64) -> Result<Vec<NaTest>, CliError> {
    let len = dist.len();
    if len < 2 {
        return Err(Error::BadParam("negative-association checks need at least 2 bins".into()).into());
    }
    let half: Vec<usize> = (0..len / 2).collect();
    let rest: Vec<usize> = (len / 2..len).collect();
    let evens: Vec<usize> = (0..len).step_by(2).collect();
    let odds: Vec<usize> = (1..len).step_by(2).collect();
    let above = |set: &[usize]| {
        let mass: f64 = set.iter().map(|&i| dist.weights()[i]).sum();
        MonotoneFn::IndicatorAbove(((n as f64 * mass).round() as u64).max(1))
    };
    Ok(vec![
        (vec![0], vec![1], MonotoneFn::Sum, MonotoneFn::Sum),
        (half, rest.clone(), MonotoneFn::Max, MonotoneFn::Sum),
        (evens.clone(), odds.clone(), above(&evens), above(&odds)),
        (vec![0], rest, above(&[0]), MonotoneFn::Max),
    ])
}

fn fn_name(f: MonotoneFn) -> String {
    match f {
        MonotoneFn::Sum => "sum".into(),
        MonotoneFn::Max => "max".into(),
        MonotoneFn::IndicatorAbove(t) => format!("above:{t}"),
        MonotoneFn::Constant => "constant".into(),
    }
}

fn index_list(set: &[usize]) -> String {
    set.iter().map(ToString::to_string).collect::<Vec<_>>().join(" ")
}

fn na_check(dist: &Distribution, n: u64, battery: &[NaTest], trials: u64, seed: u64) -> Result<Report, CliError> {
    let mut table = Table::new(vec![
        "set_a", "set_b", "f", "g", "exact_cov", "empirical_cov", "ci_low", "ci_high", "trials", "verdict",
    ]);
    let mut reports = Vec::new();
    for (k, (a, b, f, g)) in battery.iter().enumerate() {
        let r = na_monotone_test(dist, n, a, b, *f, *g, trials, seed.wrapping_add(k as u64))?;
        let verdict = match r.verdict {
            Verdict::Consistent => "consistent",
            Verdict::Violation => "violation",
        };
        table.row(vec![
            index_list(a).into(),
            index_list(b).into(),
            fn_name(*f).into(),
            fn_name(*g).into(),
            r.exact_cov.into(),
            r.empirical_cov.into(),
            r.ci_low.into(),
            r.ci_high.into(),
            r.trials.into(),
            verdict.into(),
        ]);
        reports.push(r);
    }
    let violations = reports.iter().filter(|r| r.verdict == Verdict::Violation).count();
    let json = json!({ "n": n, "seed": seed, "violations": violations, "reports": reports });
    Ok(Report { json, tables: vec![table] })
}
