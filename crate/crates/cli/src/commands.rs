use std::fs;
use std::io::{self, Cursor, Write};
use std::path::Path;

use anyhow::{bail, Context, Result};
use egs_core::analysis::{classify_network, infer_parameter, SearchConfig};
use egs_core::baselines::{lanczos_spectrum, smooth};
use egs_core::generators::{generate, Model, ModelSpec};
use egs_core::graph::{parse_edge_list, read_binary, write_edge_list};
use egs_core::maxent::{maxent_fit, EntropicSpectrum, SolverConfig};
use egs_core::moments::{ste_moments, ProbeConfig};
use egs_core::{
    estimate_clusters, DiracSpectrum, Error, Kernel, SimilarityMatrix, SparseGraph,
    SpectralOperator,
};
use rayon::prelude::*;
use serde_json::json;

use crate::args::{
    ClassifyArgs, ClustersArgs, CompareArgs, FitArgs, Format, GenerateArgs, InferArgs, ModelArg,
    OutArgs, SearchArgs, SimilarityArgs, SpectrumArgs,
};
use crate::manifest::{with_ext, RunManifest};

/// Largest graph whose exact spectrum `compare-baseline` computes.
pub const EXACT_SPECTRUM_MAX_NODES: usize = 3000;

/// Reads an edge list, or a binary cache written by `write_binary`.
pub fn load_graph(path: &Path) -> Result<SparseGraph> {
    let bytes = fs::read(path).with_context(|| format!("cannot read {}", path.display()))?;
    let graph = match read_binary(Cursor::new(&bytes)) {
        Ok(g) => g,
        Err(Error::Cache(_)) | Err(Error::Io(_)) => parse_edge_list(Cursor::new(&bytes))?,
        Err(e) => return Err(e.into()),
    };
    Ok(graph)
}

fn probe_config(fit: &FitArgs) -> ProbeConfig {
    ProbeConfig::new(fit.probes, fit.seed)
}

fn solver_config(fit: &FitArgs) -> SolverConfig {
    SolverConfig {
        tol: fit.tol,
        noise_scale: fit.noise_scale,
        ..SolverConfig::default()
    }
}

fn fit_spectrum(
    g: &SparseGraph,
    fit: &FitArgs,
    manifest: &mut RunManifest,
) -> Result<EntropicSpectrum> {
    let op = SpectralOperator::rescaled(g);
    let mv = manifest.time("moments", || {
        ste_moments(&op, &probe_config(fit), fit.moments, fit.basis.into())
    })?;
    Ok(manifest.time("fit", || maxent_fit(&mv, &solver_config(fit)))?)
}

/// Collects named artifacts, then writes them under the output prefix or
/// prints the one matching the requested format.
struct Emitter<'a> {
    out: &'a OutArgs,
    artifacts: Vec<(&'static str, Vec<u8>)>,
}

impl<'a> Emitter<'a> {
    fn new(out: &'a OutArgs) -> Self {
        Self {
            out,
            artifacts: Vec::new(),
        }
    }

    fn add(&mut self, ext: &'static str, bytes: Vec<u8>) {
        self.artifacts.push((ext, bytes));
    }

    fn finish(self, default: Format, mut manifest: RunManifest) -> Result<()> {
        let format = self.out.format.unwrap_or(default);
        let wanted = match format {
            Format::Csv => "csv",
            Format::Json => "json",
        };
        match &self.out.out {
            Some(prefix) => {
                for (ext, bytes) in &self.artifacts {
                    let path = with_ext(prefix, ext);
                    fs::write(&path, bytes)
                        .with_context(|| format!("cannot write {}", path.display()))?;
                    manifest.outputs.push(path);
                }
                write_manifest(prefix, &manifest)
            }
            None => {
                let (_, bytes) = self
                    .artifacts
                    .iter()
                    .find(|(ext, _)| *ext == wanted)
                    .with_context(|| format!("this command has no {wanted} output"))?;
                io::stdout().lock().write_all(bytes)?;
                Ok(())
            }
        }
    }
}

fn write_manifest(prefix: &Path, manifest: &RunManifest) -> Result<()> {
    let path = with_ext(prefix, "manifest.json");
    let text = serde_json::to_string_pretty(manifest)?;
    fs::write(&path, text + "\n").with_context(|| format!("cannot write {}", path.display()))
}

fn json_bytes(text: String) -> Vec<u8> {
    let mut bytes = text.into_bytes();
    bytes.push(b'\n');
    bytes
}

fn fit_config(fit: &FitArgs) -> serde_json::Value {
    json!({
        "m": fit.moments,
        "d": fit.probes,
        "seed": fit.seed,
        "basis": fit.basis,
        "tol": fit.tol,
        "noise_scale": fit.noise_scale,
        "quadrature_order": SolverConfig::default().quadrature_order,
        "probe_distribution": probe_config(fit).distribution,
        "probe_normalization": probe_config(fit).normalization,
    })
}

pub fn spectrum(args: &SpectrumArgs, mut manifest: RunManifest) -> Result<()> {
    if args.grid < 2 {
        bail!(Error::InvalidArgument(
            "the density grid needs at least two points".into()
        ));
    }
    manifest.inputs.push(args.graph.clone());
    manifest.config = json!({ "fit": fit_config(&args.fit), "grid": args.grid });
    let g = manifest.time("load", || load_graph(&args.graph))?;
    let es = fit_spectrum(&g, &args.fit, &mut manifest)?;
    let mut csv = Vec::new();
    manifest.time("export", || es.write_density_csv(args.grid, &mut csv))?;
    let mut em = Emitter::new(&args.out);
    em.add("json", json_bytes(es.to_json()?));
    em.add("csv", csv);
    em.finish(Format::Json, manifest)
}

pub fn clusters(args: &ClustersArgs, mut manifest: RunManifest) -> Result<()> {
    manifest.inputs.push(args.graph.clone());
    manifest.config = json!({ "fit": fit_config(&args.fit), "eta": args.eta });
    let g = manifest.time("load", || load_graph(&args.graph))?;
    let es = fit_spectrum(&g, &args.fit, &mut manifest)?;
    let ce = manifest.time("clusters", || estimate_clusters(&es, g.n(), args.eta))?;
    let csv = format!(
        "lambda_star,eta,mass,n_clusters,n_clusters_rounded\n{:.7e},{:.7e},{:.7e},{:.7e},{}\n",
        ce.lambda_star, ce.eta, ce.mass, ce.n_clusters, ce.n_clusters_rounded
    );
    let mut em = Emitter::new(&args.out);
    em.add("json", json_bytes(ce.to_json()?));
    em.add("csv", csv.into_bytes());
    em.add("spectrum.json", json_bytes(es.to_json()?));
    em.finish(Format::Json, manifest)
}

pub fn similarity(args: &SimilarityArgs, mut manifest: RunManifest) -> Result<()> {
    if args.graphs.len() < 2 {
        bail!(Error::InvalidArgument(
            "similarity needs at least two graphs".into()
        ));
    }
    manifest.inputs = args.graphs.clone();
    manifest.config = json!({ "fit": fit_config(&args.fit) });
    let graphs = manifest.time("load", || {
        args.graphs
            .par_iter()
            .map(|p| load_graph(p))
            .collect::<Result<Vec<_>>>()
    })?;
    let (cfg, solver) = (probe_config(&args.fit), solver_config(&args.fit));
    let basis = args.fit.basis.into();
    let spectra: Vec<std::result::Result<EntropicSpectrum, String>> = manifest.time("fit", || {
        graphs
            .par_iter()
            .map(|g| {
                let op = SpectralOperator::rescaled(g);
                ste_moments(&op, &cfg, args.fit.moments, basis)
                    .and_then(|mv| maxent_fit(&mv, &solver))
                    .map_err(|e| e.to_string())
            })
            .collect()
    });
    let labels = args.graphs.iter().map(|p| label(p)).collect();
    let sm = manifest.time("divergences", || {
        SimilarityMatrix::from_spectra(labels, &spectra, args.fit.moments)
    })?;
    for (path, failure) in args.graphs.iter().zip(&sm.failures) {
        if let Some(msg) = failure {
            eprintln!("warning: fit failed for {}: {msg}", path.display());
        }
    }
    let mut csv = Vec::new();
    sm.write_csv(&mut csv)?;
    let mut em = Emitter::new(&args.out);
    em.add("csv", csv);
    em.add("json", json_bytes(sm.to_json()?));
    em.finish(Format::Csv, manifest)
}

/// File name without its extension, used as a matrix label.
fn label(path: &Path) -> String {
    path.file_stem()
        .or_else(|| path.file_name())
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

pub fn compare_baseline(args: &CompareArgs, mut manifest: RunManifest) -> Result<()> {
    if args.grid < 2 || args.bins == 0 {
        bail!(Error::InvalidArgument(
            "grid needs two points and at least one bin".into()
        ));
    }
    let steps = args.lanczos_steps.unwrap_or(args.fit.moments);
    manifest.inputs.push(args.graph.clone());
    manifest.config = json!({
        "fit": fit_config(&args.fit),
        "sigma": args.sigma,
        "lanczos_steps": steps,
        "bins": args.bins,
        "grid": args.grid,
    });
    let g = manifest.time("load", || load_graph(&args.graph))?;
    let es = fit_spectrum(&g, &args.fit, &mut manifest)?;
    let op = SpectralOperator::rescaled(&g);
    let lanczos = manifest.time("lanczos", || {
        lanczos_spectrum(&op, steps, &probe_config(&args.fit))
    })?;
    let smoothed = smooth(&lanczos, Kernel::Gaussian, args.sigma)?;
    let (grid, egs) = es.grid(args.grid);
    let (_, lanczos_density) = smoothed.normalized_grid(args.grid);
    let exact = if g.n() <= EXACT_SPECTRUM_MAX_NODES {
        let d = manifest.time("exact", || DiracSpectrum::exact(&op))?;
        let hist = d.histogram(args.bins);
        let width = 1.0 / args.bins as f64;
        Some(
            grid.iter()
                .map(|&x| hist[((x * args.bins as f64) as usize).min(args.bins - 1)] / width)
                .collect::<Vec<f64>>(),
        )
    } else {
        None
    };

    let mut csv = String::from("lambda,egs,lanczos_smoothed,exact_histogram\n");
    for i in 0..grid.len() {
        let ex = exact
            .as_ref()
            .map_or_else(|| "NA".to_string(), |e| format!("{:.7e}", e[i]));
        csv.push_str(&format!(
            "{:.7e},{:.7e},{:.7e},{ex}\n",
            grid[i], egs[i], lanczos_density[i]
        ));
    }
    let record = json!({
        "lambda": grid,
        "egs": egs,
        "lanczos_smoothed": lanczos_density,
        "exact_histogram": exact,
    });
    let mut em = Emitter::new(&args.out);
    em.add("csv", csv.into_bytes());
    em.add("json", json_bytes(serde_json::to_string_pretty(&record)?));
    em.finish(Format::Csv, manifest)
}

fn require<T>(value: Option<T>, flag: &str, model: &str) -> Result<T> {
    value.ok_or_else(|| {
        Error::InvalidArgument(format!("--{flag} is required for the {model} model")).into()
    })
}

pub fn generate_graph(args: &GenerateArgs, mut manifest: RunManifest) -> Result<()> {
    let (spec, n) = match args.model {
        ModelArg::Er => (
            ModelSpec::new(
                Model::Er {
                    p: require(args.p, "p", "er")?,
                },
                args.seed,
            ),
            require(args.nodes, "nodes", "er")?,
        ),
        ModelArg::Ws => (
            ModelSpec::new(
                Model::Ws {
                    k: args.k,
                    p_rewire: require(args.p_rewire, "p-rewire", "ws")?,
                },
                args.seed,
            ),
            require(args.nodes, "nodes", "ws")?,
        ),
        ModelArg::Ba => (
            ModelSpec::new(
                Model::Ba {
                    r: require(args.r, "r", "ba")?,
                },
                args.seed,
            ),
            require(args.nodes, "nodes", "ba")?,
        ),
        ModelArg::Planted => {
            let count = require(args.clusters, "clusters", "planted")?;
            let size = require(args.cluster_size, "cluster-size", "planted")?;
            let spec = ModelSpec::planted_er(
                count,
                size,
                require(args.p, "p", "planted")?,
                args.inter_edges,
                args.seed,
            );
            (spec, args.nodes.unwrap_or(count * size))
        }
    };
    manifest.config = json!({ "model": spec, "n": n });
    let g = manifest.time("generate", || generate(&spec, n))?;
    let mut text = Vec::new();
    write_edge_list(&g, &mut text)?;
    match &args.out {
        Some(prefix) => {
            let path = with_ext(prefix, "txt");
            fs::write(&path, &text).with_context(|| format!("cannot write {}", path.display()))?;
            manifest.outputs.push(path);
            write_manifest(prefix, &manifest)
        }
        None => Ok(io::stdout().lock().write_all(&text)?),
    }
}

fn search_config(search: &SearchArgs) -> SearchConfig {
    SearchConfig {
        evaluations: search.evaluations,
        r_range: search.r_max.map(|hi| (1, hi)),
        seed: search.search_seed,
        ..SearchConfig::default()
    }
}

fn search_json(search: &SearchArgs, n0: usize) -> serde_json::Value {
    json!({ "n0": n0, "search": search_config(search), "args": search })
}

pub fn infer(args: &InferArgs, mut manifest: RunManifest) -> Result<()> {
    manifest.inputs.push(args.graph.clone());
    let g = manifest.time("load", || load_graph(&args.graph))?;
    let n0 = args.search.n0.unwrap_or(g.n());
    manifest.config = json!({ "fit": fit_config(&args.fit), "family": args.family, "search": search_json(&args.search, n0) });
    let target = fit_spectrum(&g, &args.fit, &mut manifest)?;
    let (cfg, solver, search) = (
        probe_config(&args.fit),
        solver_config(&args.fit),
        search_config(&args.search),
    );
    let inf = manifest.time("search", || {
        infer_parameter(&target, args.family.into(), n0, &search, &cfg, &solver)
    })?;
    let mut csv = String::from("parameter,divergence\n");
    for e in &inf.evaluations {
        let d = e
            .divergence
            .map_or_else(|| "NA".to_string(), |d| format!("{d:.7e}"));
        csv.push_str(&format!("{:.7e},{d}\n", e.parameter));
    }
    let mut em = Emitter::new(&args.out);
    em.add("json", json_bytes(serde_json::to_string_pretty(&inf)?));
    em.add("csv", csv.into_bytes());
    em.finish(Format::Json, manifest)
}

pub fn classify(args: &ClassifyArgs, mut manifest: RunManifest) -> Result<()> {
    manifest.inputs.push(args.graph.clone());
    let g = manifest.time("load", || load_graph(&args.graph))?;
    let n0 = args.search.n0.unwrap_or(g.n());
    manifest.config =
        json!({ "fit": fit_config(&args.fit), "search": search_json(&args.search, n0) });
    let target = fit_spectrum(&g, &args.fit, &mut manifest)?;
    let (cfg, solver, search) = (
        probe_config(&args.fit),
        solver_config(&args.fit),
        search_config(&args.search),
    );
    let cls = manifest.time("search", || {
        classify_network(&target, n0, &search, &cfg, &solver)
    })?;
    for (family, msg) in &cls.failures {
        eprintln!("warning: {family} search failed: {msg}");
    }
    let mut csv = String::from("rank,family,parameter,divergence\n");
    for (i, inf) in cls.ranked.iter().enumerate() {
        csv.push_str(&format!(
            "{},{},{:.7e},{:.7e}\n",
            i + 1,
            inf.family,
            inf.parameter,
            inf.divergence
        ));
    }
    let mut em = Emitter::new(&args.out);
    em.add("json", json_bytes(serde_json::to_string_pretty(&cls)?));
    em.add("csv", csv.into_bytes());
    em.finish(Format::Json, manifest)
}

/// Replaces the value of `--out` in `argv`, or appends it.
pub fn override_out(mut argv: Vec<String>, out: &Path) -> Vec<String> {
    let value = out.display().to_string();
    if let Some(i) = argv.iter().position(|a| a == "--out") {
        if i + 1 < argv.len() {
            argv[i + 1] = value;
            return argv;
        }
    }
    if let Some(i) = argv.iter().position(|a| a.starts_with("--out=")) {
        argv[i] = format!("--out={value}");
        return argv;
    }
    argv.push("--out".into());
    argv.push(value);
    argv
}

/// Arguments recorded in the manifest at `path`.
pub fn replay_argv(path: &Path, out: Option<&Path>) -> Result<Vec<String>> {
    let manifest = RunManifest::load(path)?;
    if manifest.argv.first().is_some_and(|a| a == "replay") {
        bail!(Error::InvalidArgument(
            "a manifest cannot record a replay".into()
        ));
    }
    Ok(match out {
        Some(out) => override_out(manifest.argv, out),
        None => manifest.argv,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn strings(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn out_is_replaced_or_appended() {
        let out = Path::new("new");
        assert_eq!(
            override_out(strings(&["spectrum", "g", "--out", "old"]), out),
            strings(&["spectrum", "g", "--out", "new"])
        );
        assert_eq!(
            override_out(strings(&["spectrum", "--out=old", "g"]), out),
            strings(&["spectrum", "--out=new", "g"])
        );
        assert_eq!(
            override_out(strings(&["spectrum", "g"]), out),
            strings(&["spectrum", "g", "--out", "new"])
        );
    }

    #[test]
    fn labels_drop_the_extension() {
        assert_eq!(label(Path::new("/data/karate.txt")), "karate");
        assert_eq!(label(Path::new("net")), "net");
    }
}
