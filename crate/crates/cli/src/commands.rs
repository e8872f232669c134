//! Command implementations. Every command computes its full report
//! before touching the filesystem, so a failing run leaves no partial
//! output files.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};

use gnnaccel::dse::{explore, DseOptions, DseResult};
use gnnaccel::graph::{generate_synthetic, load_graph, write_edge_list, write_features, Graph};
use gnnaccel::model::{
    forward, loss_and_backward, save_model, weight_update, ModelSpec, Operator, TrainState,
};
use gnnaccel::perf::{
    estimate_throughput, fit_sparsity, min_sampling_threads, Calibration, PerfEstimate,
    PlatformSpec, SparsityModel, Workload,
};
use gnnaccel::plan::ExecutionPlan;
use gnnaccel::sampler::{
    batch_shape, rename_and_sort, sample_neighbor, sample_subgraph_node, BatchShape, MiniBatch,
    SamplerSpec, ShapeQuery,
};
use gnnaccel::sim::{simulate_training_iteration, AcceleratorConfig};

use crate::{
    DseArgs, EstimateArgs, GenGraphArgs, GraphArgs, HardwareArgs, ModelArgs, ModelChoice,
    PipelineArgs, SampleArgs, SamplerArgs, SamplerChoice, SimulateArgs, TrainArgs,
};

pub fn gen_graph(args: &GenGraphArgs) -> Result<()> {
    if args.avg_degree < 0.0 {
        bail!("avg-degree must be nonnegative");
    }
    let graph = generate_synthetic(args.vertices, args.avg_degree, args.dim, args.seed);
    fs::create_dir_all(&args.out)?;
    write_edge_list(args.out.join("graph.edges"), &graph)?;
    write_features(args.out.join("graph.feats"), &graph.features)?;
    println!(
        "gen-graph vertices={} edges={} dim={} seed={}",
        graph.num_vertices,
        graph.num_edges(),
        args.dim,
        args.seed
    );
    Ok(())
}

fn load(args: &GraphArgs) -> Result<Graph> {
    load_graph(&args.graph, &args.features, args.symmetrize)
        .with_context(|| format!("loading graph {:?}", args.graph))
}

fn sampler_spec(args: &SamplerArgs) -> Result<SamplerSpec> {
    let spec = match args.sampler {
        SamplerChoice::Neighbor => {
            if args.ns.is_empty() {
                bail!("neighbor sampling requires --ns");
            }
            SamplerSpec::neighbor(args.layers, args.targets, args.ns.clone(), args.seed)?
        }
        SamplerChoice::Subgraph => SamplerSpec::subgraph(args.layers, args.budget, args.seed)?,
    };
    Ok(spec)
}

fn sample_batch(graph: &Graph, args: &SamplerArgs) -> Result<MiniBatch> {
    let spec = sampler_spec(args)?;
    let batch = match args.sampler {
        SamplerChoice::Neighbor => sample_neighbor(graph, &spec, args.batch_index)?,
        SamplerChoice::Subgraph => sample_subgraph_node(graph, &spec, args.batch_index)?,
    };
    Ok(rename_and_sort(batch)?)
}

fn operator(choice: ModelChoice) -> Operator {
    match choice {
        ModelChoice::Gcn => Operator::Gcn,
        ModelChoice::Sage => Operator::Sage,
    }
}

fn model_dims(feat_dim: usize, args: &ModelArgs, layers: usize) -> Result<Vec<usize>> {
    let mut dims = Vec::with_capacity(layers + 1);
    dims.push(feat_dim);
    dims.extend_from_slice(&args.hidden);
    dims.push(args.classes);
    if dims.len() != layers + 1 {
        bail!(
            "model needs {} hidden dims for {} layers, got {}",
            layers.saturating_sub(1),
            layers,
            args.hidden.len()
        );
    }
    Ok(dims)
}

struct Hardware {
    platform: PlatformSpec,
    calibration: Calibration,
    cfg: AcceleratorConfig,
}

fn hardware(args: &HardwareArgs) -> Result<Hardware> {
    let mut platform = match &args.platform {
        Some(path) => PlatformSpec::from_file(path)?,
        None => PlatformSpec::u250_like(),
    };
    let calibration = match &args.calibration {
        Some(path) => Calibration::from_file(path)?,
        None => Calibration::default(),
    };
    calibration.apply_to_platform(&mut platform);
    if let Some(dies) = args.dies {
        platform.dies = dies;
    }
    platform.validate()?;
    let mut cfg = AcceleratorConfig::for_platform(args.n, args.m, &platform)?;
    if let Some(lanes) = calibration.lanes_per_pe {
        cfg.lanes_per_pe = lanes;
    }
    cfg.validate()?;
    Ok(Hardware {
        platform,
        calibration,
        cfg,
    })
}

fn write_report(dir: &Path, name: &str, content: &str) -> Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join(name), content).with_context(|| format!("writing {name}"))?;
    Ok(())
}

fn shape_summary(batch: &MiniBatch) -> String {
    let mut line = String::from("batch");
    for (l, verts) in batch.layer_vertices.iter().enumerate() {
        let _ = write!(line, " b{}={}", l, verts.len());
    }
    for l in 1..=batch.num_layers() {
        let _ = write!(line, " e{}={}", l, batch.adjacency(l).len());
    }
    let _ = write!(line, " total={}", batch.total_vertices());
    line
}

pub fn sample(args: &SampleArgs) -> Result<()> {
    let graph = load(&args.graph)?;
    let batch = sample_batch(&graph, &args.sampler)?;
    let summary = shape_summary(&batch);
    write_report(&args.out, "batch.txt", &batch.dump_text())?;
    println!("{summary}");
    Ok(())
}

fn training_labels(batch: &MiniBatch, classes: usize) -> Vec<u32> {
    let targets = batch.vertices(batch.num_layers());
    targets.iter().map(|&v| v % classes as u32).collect()
}

pub fn train(args: &TrainArgs) -> Result<()> {
    let graph = load(&args.graph)?;
    let op = operator(args.model.model);
    let dims = model_dims(graph.features.dim(), &args.model, args.sampler.layers)?;
    let model = ModelSpec::seeded(dims.clone(), op, args.sampler.seed)?;
    let mut state = TrainState::new(model, args.lr);

    let mut report = String::new();
    let _ = writeln!(
        report,
        "model={} layers={} dims={}",
        match args.model.model {
            ModelChoice::Gcn => "gcn",
            ModelChoice::Sage => "sage",
        },
        args.sampler.layers,
        dims.iter()
            .map(ToString::to_string)
            .collect::<Vec<_>>()
            .join(",")
    );

    for iter in 0..args.iters {
        let mut sampler = args.sampler.clone();
        sampler.batch_index = args.sampler.batch_index + iter as u64;
        let batch = sample_batch(&graph, &sampler)?;
        let plan = ExecutionPlan::new(&graph, &batch, op.kind())?;
        let x = plan.input_features(&graph.features)?;
        let labels = training_labels(&batch, args.model.classes);
        let out = forward(&plan, &x, &mut state)?;
        if iter == 0 {
            let sum: f64 = out.data().iter().map(|&v| f64::from(v)).sum();
            let _ = writeln!(report, "initial_output_sum={sum:.6e}");
        }
        let (loss, grads) = loss_and_backward(&mut state, &plan, &labels, None)?;
        weight_update(&mut state, &grads)?;
        let _ = writeln!(report, "iter={iter} loss={loss:.6e}");
    }

    if let Some(path) = &args.save_model {
        save_model(path, &state.model)?;
    }
    write_report(&args.out, "train.txt", &report)?;
    println!("train done iters={}", args.iters);
    Ok(())
}

fn simulate_report(
    graph: &Graph,
    sampler: &SamplerArgs,
    model_args: &ModelArgs,
    hw: &Hardware,
) -> Result<String> {
    let op = operator(model_args.model);
    let batch = sample_batch(graph, sampler)?;
    let plan = ExecutionPlan::new(graph, &batch, op.kind())?;
    let x = plan.input_features(&graph.features)?;
    let dims = model_dims(graph.features.dim(), model_args, sampler.layers)?;
    let model = ModelSpec::seeded(dims, op, sampler.seed)?;
    let (out, trace) = simulate_training_iteration(&plan, &x, &model, &hw.cfg)?;
    let sum: f64 = out.data().iter().map(|&v| f64::from(v)).sum();

    let mut report = String::new();
    let _ = writeln!(
        report,
        "config n={} m={} dies={} lanes={} depth={}",
        hw.cfg.scatter_gather_pes,
        hw.cfg.macs,
        hw.cfg.dies,
        hw.cfg.lanes_per_pe,
        hw.cfg.pipeline_depth
    );
    report.push_str(&trace.dump_text());
    let _ = writeln!(report, "output_sum={sum:.6e}");
    Ok(report)
}

pub fn simulate(args: &SimulateArgs) -> Result<()> {
    let graph = load(&args.graph)?;
    let hw = hardware(&args.hardware)?;
    let report = simulate_report(&graph, &args.sampler, &args.model, &hw)?;
    write_report(&args.out, "trace.txt", &report)?;
    println!("simulate done");
    Ok(())
}

// Batch shapes for the analytical model: closed form for neighbor
// sampling, sparsity-fit for subgraph sampling.
fn analytic_shape(
    sampler: &SamplerArgs,
    graph: Option<&Graph>,
) -> Result<(BatchShape, Option<SparsityModel>)> {
    match sampler.sampler {
        SamplerChoice::Neighbor => {
            if sampler.ns.is_empty() {
                bail!("neighbor sampling requires --ns");
            }
            let q = ShapeQuery::Neighbor {
                target_count: sampler.targets,
                neighbor_sizes: sampler.ns.clone(),
            };
            Ok((batch_shape(&q, None)?, None))
        }
        SamplerChoice::Subgraph => {
            let graph =
                graph.context("subgraph shape estimation needs --graph/--features to fit kappa")?;
            let spec = SamplerSpec::subgraph(sampler.layers, sampler.budget, sampler.seed)?;
            let hi = (2 * sampler.budget).min(graph.num_vertices);
            let sizes = vec![(sampler.budget / 2).max(1), sampler.budget, hi];
            let model = fit_sparsity(graph, &spec, &sizes, 5)?;
            let q = ShapeQuery::SubgraphNode {
                budget: sampler.budget,
                num_layers: sampler.layers,
            };
            Ok((batch_shape(&q, Some(&model))?, Some(model)))
        }
    }
}

fn estimate_header(
    sampler: &SamplerArgs,
    model: &ModelChoice,
    dims: &[usize],
    hw: &Hardware,
    shape: &BatchShape,
) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "sampler={} layers={}",
        match sampler.sampler {
            SamplerChoice::Neighbor => "neighbor",
            SamplerChoice::Subgraph => "subgraph",
        },
        sampler.layers
    );
    let _ = writeln!(
        out,
        "model={} dims={}",
        match model {
            ModelChoice::Gcn => "gcn",
            ModelChoice::Sage => "sage",
        },
        dims.iter()
            .map(ToString::to_string)
            .collect::<Vec<_>>()
            .join(",")
    );
    let _ = writeln!(
        out,
        "shape vertices={} edges={}",
        shape
            .vertices
            .iter()
            .map(ToString::to_string)
            .collect::<Vec<_>>()
            .join(","),
        shape
            .edges
            .iter()
            .map(ToString::to_string)
            .collect::<Vec<_>>()
            .join(",")
    );
    let _ = writeln!(
        out,
        "config n={} m={} dies={} lanes={}",
        hw.cfg.scatter_gather_pes, hw.cfg.macs, hw.platform.dies, hw.cfg.lanes_per_pe
    );
    out
}

fn perf_inputs(args: &EstimateArgs) -> Result<(Hardware, BatchShape, Vec<usize>, Workload)> {
    let hw = hardware(&args.hardware)?;
    let graph = match (&args.graph, &args.features) {
        (Some(g), Some(f)) => Some(
            load_graph(g, f, args.symmetrize).with_context(|| format!("loading graph {g:?}"))?,
        ),
        (None, None) => None,
        _ => bail!("--graph and --features must be given together"),
    };
    let feat_dim = match (args.feat_dim, &graph) {
        (Some(d), _) => d,
        (None, Some(g)) => g.features.dim(),
        (None, None) => bail!("--feat-dim is required when no graph is given"),
    };
    let (shape, _) = analytic_shape(&args.sampler, graph.as_ref())?;
    let dims = model_dims(feat_dim, &args.model, args.sampler.layers)?;
    let workload = Workload::from_shape(&shape, &dims, args.model.model == ModelChoice::Sage)?;
    Ok((hw, shape, dims, workload))
}

fn estimate_for(args: &EstimateArgs) -> Result<(String, PerfEstimate)> {
    let (hw, shape, dims, workload) = perf_inputs(args)?;
    let est = estimate_throughput(
        &workload,
        &hw.cfg,
        &hw.platform,
        hw.calibration.t_sampling(),
        hw.calibration.t_lc(),
        hw.calibration.t_wu(),
    );
    let mut report = estimate_header(&args.sampler, &args.model.model, &dims, &hw, &shape);
    report.push_str(&est.report_text());
    // Host sampling threads needed to hide sampling behind execution.
    let (threads, saturated) = min_sampling_threads(est.t_sampling, est.t_gnn, 64);
    let _ = writeln!(report, "sampling_threads={threads} saturated={saturated}");
    Ok((report, est))
}

pub fn estimate(args: &EstimateArgs) -> Result<()> {
    let (report, est) = estimate_for(args)?;
    write_report(&args.out, "estimate.txt", &report)?;
    println!("estimate throughput_nvtps={:.6e}", est.throughput);
    Ok(())
}

fn dse_for(args: &EstimateArgs) -> Result<(String, DseResult)> {
    let (hw, shape, dims, workload) = perf_inputs(args)?;
    let result = explore(
        &workload,
        &hw.cfg,
        &hw.platform,
        hw.calibration.t_sampling(),
        hw.calibration.t_lc(),
        hw.calibration.t_wu(),
        &DseOptions::default(),
    )?;
    let mut report = estimate_header(&args.sampler, &args.model.model, &dims, &hw, &shape);
    report.push_str(&result.report_text());
    Ok((report, result))
}

pub fn dse(args: &DseArgs) -> Result<()> {
    let (report, result) = dse_for(&args.estimate)?;
    write_report(&args.estimate.out, "dse.txt", &report)?;
    println!(
        "dse n={} m={} throughput_nvtps={:.6e}",
        result.per_die[0].n, result.per_die[0].m, result.throughput
    );
    Ok(())
}

pub fn pipeline(args: &PipelineArgs) -> Result<()> {
    let graph = load(&args.graph)?;
    let hw = hardware(&args.hardware)?;

    // Stage 1: sample.
    let batch = sample_batch(&graph, &args.sampler)?;
    let batch_report = batch.dump_text();
    let summary = shape_summary(&batch);

    // Stage 2: simulate.
    let trace_report = simulate_report(&graph, &args.sampler, &args.model, &hw)?;

    // Stages 3 and 4: estimate and explore.
    let estimate_args = EstimateArgs {
        sampler: args.sampler.clone(),
        model: args.model.clone(),
        hardware: args.hardware.clone(),
        feat_dim: Some(graph.features.dim()),
        graph: Some(args.graph.graph.clone()),
        features: Some(args.graph.features.clone()),
        symmetrize: args.graph.symmetrize,
        out: args.out.clone(),
    };
    let (estimate_report, _) = estimate_for(&estimate_args)?;
    let (dse_report, result) = dse_for(&estimate_args)?;

    // All stages succeeded: persist every artifact.
    write_report(&args.out, "batch.txt", &batch_report)?;
    write_report(&args.out, "trace.txt", &trace_report)?;
    write_report(&args.out, "estimate.txt", &estimate_report)?;
    write_report(&args.out, "dse.txt", &dse_report)?;
    println!("{summary}");
    println!(
        "pipeline done n={} m={} throughput_nvtps={:.6e}",
        result.per_die[0].n, result.per_die[0].m, result.throughput
    );
    Ok(())
}
