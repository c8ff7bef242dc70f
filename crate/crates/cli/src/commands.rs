use anyhow::Result;
use serde_json::{json, Value};

use dcoset::concentration::{exact_tails, graph_ingredients, standardization, verify_tails};
use dcoset::montecarlo::{default_threads, run_blocks, sample_histogram, Histogram};
use dcoset::rational::to_f64;
use dcoset::size_bias::coupling_distribution_check;
use dcoset::stein::{exact_tv_to_poisson, kolmogorov_bound, kolmogorov_from_counts, tv_bound_fixed_points};
use dcoset::table::coset_size;
use dcoset::verify::sweep;
use dcoset::{ContingencyTable, CosetOracle, CosetSampler, Error, Moments, Permutation, RationalValue, StatisticKind};

use crate::input::{parse_list, parse_partition, resolve_table};
use crate::{Command, Common, InvalidConfig, Output, VerifyTarget};

fn threads(c: &Common) -> usize {
    c.threads.unwrap_or_else(default_threads)
}

fn table(c: &Common) -> Result<ContingencyTable> {
    resolve_table(c.lambda.as_deref(), c.mu.as_deref(), c.table.as_deref())
}

fn statistic(c: &Common, n: usize) -> Result<StatisticKind> {
    let kind: StatisticKind = c.stat.parse().map_err(|e: Error| InvalidConfig::new("stat", e.to_string()))?;
    kind.validate(n)?;
    Ok(kind)
}

fn exact(r: &dcoset::Rational) -> Value {
    serde_json::to_value(RationalValue::from(r)).expect("rational serializes")
}

fn histogram_csv(h: &Histogram) -> Result<String> {
    let mut buf = Vec::new();
    h.write_csv(&mut buf)?;
    Ok(String::from_utf8(buf)?)
}

/// Runs one subcommand. The flag is false when a verification found failures.
pub fn dispatch(cmd: &Command, c: &Common) -> Result<(Output, bool)> {
    match cmd {
        Command::Sample { perms } => sample(c, *perms).map(|o| (o, true)),
        Command::Enumerate { tables } => enumerate(c, *tables).map(|o| (o, true)),
        Command::Stats { perm } => stats(c, perm.as_deref()).map(|o| (o, true)),
        Command::Moments => {
            let t = table(c)?;
            let kind = statistic(c, t.n())?;
            Ok((Output::Json(moments(&t, kind)?), true))
        }
        Command::Bounds => {
            let t = table(c)?;
            let kind = statistic(c, t.n())?;
            Ok((Output::Json(bounds(&t, kind, c)?), true))
        }
        Command::Distance => {
            let t = table(c)?;
            let kind = statistic(c, t.n())?;
            Ok((Output::Json(distance(&t, kind, c)?), true))
        }
        Command::Verify { target, all, nmax } => verify(c, *target, *all, *nmax),
        Command::Concentration { grid, pilot } => concentration(c, grid, *pilot).map(|o| (o, true)),
        Command::Report => report(c).map(|o| (o, true)),
    }
}

fn sample(c: &Common, perms: bool) -> Result<Output> {
    let t = table(c)?;
    if perms {
        let blocks = run_blocks(c.samples, c.seed, threads(c), |_, count, rng| {
            let mut sampler = CosetSampler::new(&t);
            (0..count).map(|_| sampler.sample(rng).into_inner()).collect::<Vec<_>>()
        });
        let all: Vec<Vec<u32>> = blocks.concat();
        let csv = all.iter().map(|p| p.iter().map(u32::to_string).collect::<Vec<_>>().join(",") + "\n").collect();
        return Ok(Output::Both { json: json!({ "table": t, "permutations": all }), csv });
    }
    let kind = statistic(c, t.n())?;
    let h = sample_histogram(&t, kind, c.samples, c.seed, threads(c))?;
    let json = json!({
        "table": t,
        "statistic": kind,
        "samples": c.samples,
        "mean": h.mean(),
        "variance": h.variance(),
        "histogram": h.counts,
    });
    Ok(Output::Both { json, csv: histogram_csv(&h)? })
}

fn enumerate(c: &Common, tables: bool) -> Result<Output> {
    if tables {
        let (Some(l), Some(m)) = (c.lambda.as_deref(), c.mu.as_deref()) else {
            return Err(InvalidConfig::new("lambda", "--tables needs --lambda and --mu").into());
        };
        let (l, m) = (parse_partition("lambda", l)?, parse_partition("mu", m)?);
        let list = ContingencyTable::enumerate(&l, &m)?;
        let mut csv = String::from("entries,cosetSize\n");
        let rows: Vec<Value> = list
            .iter()
            .map(|t| {
                let size = coset_size(t).to_string();
                csv += &format!("\"{}\",{size}\n", serde_json::to_string(&t.rows()).expect("rows serialize"));
                json!({ "entries": t.rows(), "cosetSize": size })
            })
            .collect();
        return Ok(Output::Both { json: json!({ "lambda": l, "mu": m, "count": list.len(), "tables": rows }), csv });
    }
    let t = table(c)?;
    let oracle = CosetOracle::new(&t, c.cap)?;
    let all: Vec<&[u32]> = oracle.iter().collect();
    let csv = all.iter().map(|p| p.iter().map(u32::to_string).collect::<Vec<_>>().join(",") + "\n").collect();
    Ok(Output::Both { json: json!({ "table": t, "size": all.len(), "permutations": all }), csv })
}

fn stats(c: &Common, perm: Option<&str>) -> Result<Output> {
    if let Some(p) = perm {
        let sigma = Permutation::new(parse_list::<u32>("perm", p)?)?;
        let n = sigma.n();
        let kind = statistic(c, n)?;
        let s = sigma.one_line();
        let json = json!({
            "perm": sigma,
            "fp": StatisticKind::FixedPoints.evaluate(s),
            "des": StatisticKind::Descents.evaluate(s),
            "inv": StatisticKind::Inversions.evaluate(s),
            "statistic": kind,
            "value": kind.evaluate(s),
        });
        return Ok(Output::Json(json));
    }
    let t = table(c)?;
    let kind = statistic(c, t.n())?;
    let law = CosetOracle::new(&t, c.cap)?.law(kind);
    let pmf: Vec<Value> =
        law.counts.keys().map(|&v| json!({ "value": v, "probability": exact(&law.prob(v)) })).collect();
    let json = json!({
        "table": t,
        "statistic": kind,
        "cosetSize": law.total,
        "mean": exact(&law.mean()),
        "variance": exact(&law.variance()),
        "pmf": pmf,
    });
    let h = Histogram { counts: law.counts.clone() };
    Ok(Output::Both { json, csv: histogram_csv(&h)? })
}

fn moments(t: &ContingencyTable, kind: StatisticKind) -> Result<Value> {
    let report = Moments::new(t).report(kind)?;
    Ok(json!({ "table": t, "moments": report }))
}

fn bounds(t: &ContingencyTable, kind: StatisticKind, c: &Common) -> Result<Value> {
    if kind == StatisticKind::FixedPoints {
        let b = tv_bound_fixed_points(t)?;
        return Ok(
            json!({ "table": t, "statistic": kind, "metric": "total_variation_to_poisson", "bound": b.bound, "report": b }),
        );
    }
    let st = standardization(t, kind, c.cap, c.samples, c.seed, threads(c))?;
    let (d, count) = graph_ingredients(t, kind);
    let b = kolmogorov_bound(1.0, d as f64, count as f64, st.variance)?;
    Ok(json!({
        "table": t,
        "statistic": kind,
        "metric": "kolmogorov_to_normal",
        "bound": b.bound,
        "report": b,
        "varianceSource": st.source,
    }))
}

fn distance(t: &ContingencyTable, kind: StatisticKind, c: &Common) -> Result<Value> {
    let enumerable = t.n() <= c.cap;
    if kind == StatisticKind::FixedPoints {
        let nu = to_f64(&Moments::new(t).fp_mean());
        let tv = if enumerable {
            exact_tv_to_poisson(&CosetOracle::new(t, c.cap)?.law(kind).distribution(), nu)
        } else {
            exact_tv_to_poisson(&sample_histogram(t, kind, c.samples, c.seed, threads(c))?.distribution(), nu)
        };
        let bound = match tv_bound_fixed_points(t) {
            Ok(b) => Some(b.bound),
            Err(Error::HypothesisViolated { .. }) => None,
            Err(e) => return Err(e.into()),
        };
        return Ok(json!({
            "table": t,
            "statistic": kind,
            "metric": "total_variation_to_poisson",
            "method": if enumerable { "exact" } else { "monte_carlo" },
            "distance": tv,
            "bound": bound,
        }));
    }
    let (dk, method) = if enumerable {
        let law = CosetOracle::new(t, c.cap)?.law(kind);
        let (mean, var) = (to_f64(&law.mean()), to_f64(&law.variance()));
        if var <= 0.0 {
            return Err(Error::ZeroVariance.into());
        }
        (kolmogorov_from_counts(&law.counts, mean, var.sqrt())?, "exact")
    } else {
        let st = standardization(t, kind, c.cap, c.samples, c.seed, threads(c))?;
        let h = sample_histogram(t, kind, c.samples, c.seed, threads(c))?;
        (kolmogorov_from_counts(&h.counts, st.mean, st.variance.sqrt())?, "monte_carlo")
    };
    Ok(json!({ "table": t, "statistic": kind, "metric": "kolmogorov_to_normal", "method": method, "distance": dk }))
}

fn verify(c: &Common, target: Option<VerifyTarget>, all: bool, nmax: usize) -> Result<(Output, bool)> {
    match target {
        Some(VerifyTarget::SizeBias) if !all => {
            let t = table(c)?;
            let r = coupling_distribution_check(&t, c.samples, c.seed, threads(c), c.cap)?;
            let ok = r.invariant_violations == 0;
            Ok((Output::Json(serde_json::to_value(r)?), ok))
        }
        Some(_) => Err(InvalidConfig::new("all", "--all cannot be combined with a verify target").into()),
        None => {
            let r = sweep(nmax, c.cap, c.seed)?;
            let ok = r.failures.is_empty();
            Ok((Output::Json(serde_json::to_value(r)?), ok))
        }
    }
}

fn concentration(c: &Common, grid: &str, pilot: u64) -> Result<Output> {
    let t = table(c)?;
    let kind = statistic(c, t.n())?;
    let grid: Vec<f64> = parse_list("grid", grid)?;
    if grid.iter().any(|&x| !(x > 0.0 && x.is_finite())) {
        return Err(InvalidConfig::new("grid", "thresholds must be positive and finite").into());
    }
    let mc = verify_tails(&t, kind, &grid, c.samples, c.seed, threads(c), c.cap, pilot)?;
    let ex = if t.n() <= c.cap { Some(exact_tails(&t, kind, &grid, c.cap)?) } else { None };
    let csv = mc.to_csv();
    Ok(Output::Both { json: json!({ "monteCarlo": mc, "exact": ex }), csv })
}

fn report(c: &Common) -> Result<Output> {
    let t = table(c)?;
    let or_error = |r: Result<Value>| r.unwrap_or_else(|e| json!({ "error": format!("{e:#}") }));
    let sections: Vec<Value> = [StatisticKind::FixedPoints, StatisticKind::Descents, StatisticKind::Inversions]
        .into_iter()
        .filter(|k| k.validate(t.n()).is_ok())
        .map(|k| {
            json!({
                "statistic": k,
                "moments": or_error(moments(&t, k).map(|v| v["moments"].clone())),
                "bounds": or_error(bounds(&t, k, c)),
                "distance": or_error(distance(&t, k, c)),
            })
        })
        .collect();
    Ok(Output::Json(json!({ "table": t, "cosetSize": coset_size(&t).to_string(), "statistics": sections })))
}
