use std::fmt::Write as _;
use std::path::Path;
use std::time::Instant;

use amco::data::{
    blobs, gap_gaussian, latent, load_dense, load_sparse, mmi_planted, nested_blobs, sparse_blobs,
    write_dense, write_sparse, BlobSpec, NestedSpec,
};
use amco::hierarchical::{cluster_with, HierOptions};
use amco::mmi::select_feature;
use amco::neighbors::{knn_graph, lloyd, medoid_with, MedoidMetric, MedoidOptions, Points};
use amco::oracle::{
    assign_accuracy, brute_assign, brute_hier, brute_knn, brute_lloyd, brute_medoid, brute_mmi,
    knn_accuracy, mmi_accuracy, tree_accuracy, AccuracyReport, DEFAULT_RANDOM_TREES,
};
use amco::{DenseMatrix, EvalLedger, SparseVector};
use anyhow::{Context, Result};
use serde_json::json;

use crate::args::*;
use crate::report::RunReport;
use crate::UsageError;

enum Loaded {
    Dense(DenseMatrix),
    Sparse(Vec<SparseVector>),
}

impl Loaded {
    fn points(&self) -> Points<'_> {
        match self {
            Loaded::Dense(m) => Points::Dense(m),
            Loaded::Sparse(v) => Points::Sparse(v),
        }
    }
}

fn load(data: &DataArgs, sparse: Option<&Path>) -> Result<Loaded> {
    if let Some(p) = sparse {
        return Ok(Loaded::Sparse(load_sparse(p)?));
    }
    if let Some(p) = &data.input {
        return Ok(Loaded::Dense(load_dense(p)?));
    }
    let seed = data.fixture_seed;
    Ok(match data.fixture {
        Fixture::Blobs => {
            let spec = BlobSpec {
                n: data.n,
                d: data.d,
                centers: data.centers,
                center_scale: 1.0,
                spread: data.spread,
            };
            Loaded::Dense(blobs(&spec, seed)?.data)
        }
        Fixture::Latent => Loaded::Dense(latent(data.n, data.d, data.rank, data.noise, seed)?),
        Fixture::Nested => {
            let spec = NestedSpec {
                n: data.n,
                d: data.d,
                ..NestedSpec::default()
            };
            Loaded::Dense(nested_blobs(&spec, seed)?.data)
        }
        Fixture::SparseBlobs => Loaded::Sparse(
            sparse_blobs(
                data.n,
                data.d,
                data.centers,
                data.density,
                data.spread,
                seed,
            )?
            .0,
        ),
    })
}

fn load_dense_only(data: &DataArgs) -> Result<DenseMatrix> {
    match load(data, None)? {
        Loaded::Dense(m) => Ok(m),
        Loaded::Sparse(_) => Err(UsageError("sparse data is only supported by knn".into()).into()),
    }
}

fn finish(mut report: RunReport, start: Instant, path: Option<&Path>) -> Result<RunReport> {
    report.wall_time_secs = start.elapsed().as_secs_f64();
    report.write(path)?;
    Ok(report)
}

fn write_lines(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

pub fn knn(args: &KnnArgs) -> Result<RunReport> {
    let start = Instant::now();
    let loaded = load(&args.data, args.sparse.as_deref())?;
    let points = loaded.points();
    let (n, d) = (points.len(), points.dim());
    let cfg = args.run.config(n, d)?;
    let result = knn_graph(points, args.k, &cfg)?;
    if let Some(p) = &args.neighbors_out {
        let mut text = String::new();
        for row in &result.neighbors {
            let cells: Vec<String> = row.iter().map(usize::to_string).collect();
            writeln!(text, "{}", cells.join(","))?;
        }
        write_lines(p, &text)?;
    }
    let mut params = json!({ "k": args.k, "data": args.data, "sparse": args.sparse });
    params["n"] = json!(n);
    params["d"] = json!(d);
    let mut report = RunReport::new("knn", &cfg, params).with_ledger(result.ledger.clone());
    report.result = json!({
        "points": n,
        "edges": result.neighbors.iter().map(Vec::len).sum::<usize>(),
    });
    if args.run.oracle {
        let exact = brute_knn(points, args.k)?;
        let acc = knn_accuracy(&exact, &result.neighbors)?;
        report.accuracy = Some(AccuracyReport::from_trials("knn", vec![acc]));
    }
    finish(report, start, args.run.report.as_deref())
}

pub fn kmeans(args: &KmeansArgs) -> Result<RunReport> {
    let start = Instant::now();
    let data = load_dense_only(&args.data)?;
    let cfg = args.run.config(data.n(), data.d())?;
    let r = lloyd(&data, args.k, args.max_iters, &cfg)?;
    if let Some(p) = &args.labels_out {
        let text: String = r
            .assignment
            .labels
            .iter()
            .map(|l| format!("{l}\n"))
            .collect();
        write_lines(p, &text)?;
    }
    let params = json!({ "k": args.k, "max_iters": args.max_iters, "data": args.data,
        "n": data.n(), "d": data.d() });
    let mut report =
        RunReport::new("kmeans", &cfg, params).with_ledger(r.assignment.ledger.clone());
    report.result = json!({
        "iterations": r.iterations,
        "converged": r.converged,
        "inertia": r.assignment.inertia,
        "inertia_history": r.inertia_history,
    });
    if args.run.oracle {
        // Scored on the last assignment step; the whole trajectory can leave
        // exact Lloyd after one near tie, so that agreement is reported apart.
        let step = brute_assign(&data, &r.assignment.centroids)?;
        let acc = assign_accuracy(&step, &r.assignment.labels)?;
        report.accuracy = Some(AccuracyReport::from_trials("kmeans", vec![acc]));
        let exact = brute_lloyd(&data, args.k, args.max_iters, cfg.seed)?;
        report.result["exact_lloyd_agreement"] = json!(assign_accuracy(
            &exact.assignment.labels,
            &r.assignment.labels
        )?);
    }
    finish(report, start, args.run.report.as_deref())
}

pub fn medoid(args: &MedoidArgs) -> Result<RunReport> {
    let start = Instant::now();
    let data = load_dense_only(&args.data)?;
    let cfg = args.run.config(data.n(), data.d())?;
    let metric = match args.metric {
        MetricArg::L1 => MedoidMetric::L1,
        MetricArg::L2sq => MedoidMetric::L2Sq,
        MetricArg::L2 => MedoidMetric::L2,
    };
    let opts = MedoidOptions {
        metric,
        doubly_sampled: args.doubly,
    };
    let r = medoid_with(&data, opts, &cfg)?;
    let params = json!({ "metric": args.metric, "doubly": args.doubly, "data": args.data,
        "n": data.n(), "d": data.d() });
    let mut report = RunReport::new("medoid", &cfg, params).with_ledger(r.ledger.clone());
    report.result = json!({
        "medoid": r.medoid,
        "value": r.estimates[r.medoid],
        "exact": r.exact[r.medoid],
    });
    if args.run.oracle {
        let exact = brute_medoid(&data, metric)?;
        report.accuracy = Some(AccuracyReport::from_trials(
            "medoid",
            vec![mmi_accuracy(exact, r.medoid)],
        ));
    }
    finish(report, start, args.run.report.as_deref())
}

pub fn hier(args: &HierArgs) -> Result<RunReport> {
    let start = Instant::now();
    let data = load_dense_only(&args.data)?;
    let cfg = args.run.config(data.n(), data.d())?;
    let opts = HierOptions {
        pooled_init: args.pooled_init,
    };
    let r = cluster_with(&data, opts, &cfg, None)?;
    if let Some(p) = &args.linkage_out {
        let file = std::fs::File::create(p).with_context(|| format!("writing {}", p.display()))?;
        r.dendrogram.write_linkage_csv(file)?;
    }
    let params = json!({ "pooled_init": args.pooled_init, "data": args.data,
        "n": data.n(), "d": data.d() });
    let mut report = RunReport::new("hier", &cfg, params).with_ledger(r.ledger.clone());
    let merges = &r.dendrogram.merges;
    report.result = json!({
        "merges": merges.len(),
        "arms_created": r.arms_created,
        "exact_merges": merges.iter().filter(|m| m.exact).count(),
        "final_value": merges.last().map(|m| m.value),
    });
    if args.run.oracle {
        let exact = brute_hier(&data)?;
        let acc = tree_accuracy(&exact, &r.dendrogram, DEFAULT_RANDOM_TREES, cfg.seed)?;
        report.accuracy = Some(AccuracyReport::from_trials("hier", vec![acc]));
    }
    finish(report, start, args.run.report.as_deref())
}

fn mmi_data(a: &MmiDataArgs) -> Result<(DenseMatrix, Vec<f64>)> {
    match &a.input {
        Some(p) => {
            let all = load_dense(p)?;
            if all.d() < 2 {
                return Err(
                    UsageError("mmi input needs a target and at least one feature".into()).into(),
                );
            }
            let t = a.target_column.unwrap_or(all.d() - 1);
            if t >= all.d() {
                return Err(
                    UsageError(format!("target column {t} out of {} columns", all.d())).into(),
                );
            }
            Ok((all.without_column(t)?, all.column(t)))
        }
        None => {
            let f = mmi_planted(a.n, a.d, a.planted, a.noise, a.distractors, a.fixture_seed)?;
            Ok((f.features, f.target))
        }
    }
}

pub fn mmi(args: &MmiArgs) -> Result<RunReport> {
    let start = Instant::now();
    let (features, target) = mmi_data(&args.data)?;
    let cfg = args.run.config(features.n(), features.d())?;
    let r = select_feature(&features, &target, &cfg)?;
    let params = json!({ "data": args.data, "n": features.n(), "d": features.d() });
    let mut report = RunReport::new("mmi", &cfg, params).with_ledger(r.ledger.clone());
    report.result = json!({
        "feature": r.feature,
        "estimate": r.estimates[r.feature],
        "rows_sampled": r.samples.iter().sum::<u64>(),
    });
    if args.run.oracle {
        let exact = brute_mmi(&features, &target)?;
        report.accuracy = Some(AccuracyReport::from_trials(
            "mmi",
            vec![mmi_accuracy(exact, r.feature)],
        ));
    }
    finish(report, start, args.run.report.as_deref())
}

pub fn gaincurve(args: &GainArgs) -> Result<RunReport> {
    let start = Instant::now();
    let xs = match args.app {
        GainApp::Knn => &args.dims,
        GainApp::Mmi => &args.sizes,
    };
    if xs.is_empty() {
        return Err(UsageError("empty sweep".into()).into());
    }
    let mut rows = Vec::new();
    let mut total = EvalLedger::default();
    let mut first_cfg = None;
    for &x in xs {
        let ledger = match args.app {
            GainApp::Knn => {
                let m = latent(args.n, x, args.rank, args.noise, args.fixture_seed)?;
                let cfg = args.run.config(args.n, x)?;
                first_cfg.get_or_insert(cfg.clone());
                knn_graph(Points::Dense(&m), args.k, &cfg)?.ledger
            }
            GainApp::Mmi => {
                let f = mmi_planted(
                    x,
                    args.d,
                    args.d / 2,
                    args.target_noise,
                    0,
                    args.fixture_seed,
                )?;
                let cfg = args.run.config(x, args.d)?;
                first_cfg.get_or_insert(cfg.clone());
                select_feature(&f.features, &f.target, &cfg)?.ledger
            }
        };
        total.merge(&ledger);
        rows.push(json!({
            "x": x,
            "gain": ledger.gain(),
            "effective": ledger.effective_total,
            "brute": ledger.brute_total,
        }));
    }
    let gains: Vec<f64> = rows
        .iter()
        .map(|r| r["gain"].as_f64().unwrap_or(0.0))
        .collect();
    if let Some(p) = &args.csv {
        let mut text = String::from("x,gain,effective,brute\n");
        for r in &rows {
            writeln!(
                text,
                "{},{},{},{}",
                r["x"], r["gain"], r["effective"], r["brute"]
            )?;
        }
        write_lines(p, &text)?;
    }
    let cfg = first_cfg.expect("sweep is not empty");
    let params = serde_json::to_value(args)?;
    let mut report = RunReport::new("gaincurve", &cfg, params).with_ledger(total);
    report.result = json!({
        "points": rows,
        "increasing": gains.windows(2).all(|w| w[1] > w[0]),
    });
    finish(report, start, args.run.report.as_deref())
}

pub fn gen(args: &GenArgs) -> Result<()> {
    let labels: Vec<String> = match args.kind {
        GenKind::Blobs => {
            let spec = BlobSpec {
                n: args.n,
                d: args.d,
                centers: args.centers,
                center_scale: 1.0,
                spread: args.spread,
            };
            let l = blobs(&spec, args.seed)?;
            write_dense(&args.out, &l.data)?;
            l.labels.iter().map(usize::to_string).collect()
        }
        GenKind::Latent => {
            write_dense(
                &args.out,
                &latent(args.n, args.d, args.rank, args.noise, args.seed)?,
            )?;
            Vec::new()
        }
        GenKind::Nested => {
            let spec = NestedSpec {
                n: args.n,
                d: args.d,
                ..NestedSpec::default()
            };
            let l = nested_blobs(&spec, args.seed)?;
            write_dense(&args.out, &l.data)?;
            l.labels.iter().map(usize::to_string).collect()
        }
        GenKind::GapGaussian => {
            let f = gap_gaussian(&args.offsets, args.d, args.base, args.sigma, 1, args.seed)?;
            write_dense(&args.out, &f.data)?;
            f.gaps.iter().map(f64::to_string).collect()
        }
        GenKind::MmiPlanted => {
            let f = mmi_planted(
                args.n,
                args.d,
                args.planted,
                args.noise,
                args.distractors,
                args.seed,
            )?;
            let rows: Vec<Vec<f64>> = (0..f.features.n())
                .map(|i| {
                    let mut r = f.features.row(i).to_vec();
                    r.push(f.target[i]);
                    r
                })
                .collect();
            write_dense(&args.out, &DenseMatrix::from_rows(&rows)?)?;
            Vec::new()
        }
        GenKind::SparseBlobs => {
            let (v, l) = sparse_blobs(
                args.n,
                args.d,
                args.centers,
                args.density,
                args.spread,
                args.seed,
            )?;
            write_sparse(&args.out, &v)?;
            l.iter().map(usize::to_string).collect()
        }
    };
    if let Some(p) = &args.labels_out {
        let text: String = labels.iter().map(|l| format!("{l}\n")).collect();
        write_lines(p, &text)?;
    }
    Ok(())
}
