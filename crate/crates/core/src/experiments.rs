//! End-to-end experiment runs with persisted inputs and outputs.
//!
//! Every command has a pure core returning typed rows (used directly by tests
//! and examples) and a `cmd_*` wrapper that writes them to disk. Each output
//! embeds an [`ExperimentManifest`]: JSON files as a `manifest` field, CSV
//! files as a leading `# manifest: {...}` comment line. Read the CSVs with `#`
//! as the comment character.
//!
//! Output files and columns:
//! * `gen`: `instance_0000.json`, ... in the instance format plus `manifest`.
//! * `tree-train`: `tree_params.json` and `traces/trace_p{p}.csv`.
//! * `evaluate`: `evaluate.csv` with
//!   `instance_id,n,p,sigma,energy,e0,emax,residual_energy,ground_overlap,baseline_residual`.
//! * `vanilla-train`: `vanilla.csv` with
//!   `instance_id,n,p,energy,residual_energy,ground_overlap,baseline_residual,evaluations,converged,beta_1..,gamma_1..`
//!   and `vanilla_params.json`.
//! * `anneal`: `anneal.csv` with `instance_id,T,ground_population,schedule_kind`.
//! * `concentration`: `concentration.csv` (per-instance canonical angles) and
//!   `concentration_summary.csv` with `n,instances,mean_gamma_1,var_gamma_1,mean_residual`.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::anneal::{fit_schedule, Annealer, Schedule};
use crate::error::{input_err, Error, Result};
use crate::instance::{gen_grid_spinglass, gen_regular_maxcut, gen_regular_pm_glass, EnergySpectrum, Family, SpinGlass};
use crate::optimizer::{
    annealing_start, multi_start, tree_train_with, write_trace_csv, Convergence, InstanceObjective, SearchBox,
    TrainOptions, TreeStage,
};
use crate::rcc::TreeSpec;
use crate::rng::{derive_seed, stream_rng};
use crate::statevector::{ground_state_overlap, DisorderMode, DisorderRealization, QaoaParams, QaoaSimulator, StateVector};
use crate::tensornet::PlanStats;

pub const TOOL_NAME: &str = "tree-qaoa";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Provenance record embedded verbatim in every output file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    #[serde(default)]
    pub family: Option<String>,
    #[serde(default)]
    pub sizes: Vec<usize>,
    /// Instance count `M`.
    #[serde(default)]
    pub instances: Option<usize>,
    #[serde(default)]
    pub p_range: Vec<usize>,
    /// Optimizer choice and hyperparameters, if the command trains.
    #[serde(default)]
    pub optimizer: Option<serde_json::Value>,
    #[serde(default)]
    pub sigmas: Vec<f64>,
    #[serde(default)]
    pub t_grid: Vec<f64>,
    pub seed: u64,
    pub out_dir: String,
}

impl ExperimentManifest {
    pub fn new(command: &str, seed: u64, out_dir: &Path) -> Self {
        ExperimentManifest {
            tool: TOOL_NAME.to_string(),
            version: TOOL_VERSION.to_string(),
            command: command.to_string(),
            family: None,
            sizes: Vec::new(),
            instances: None,
            p_range: Vec::new(),
            optimizer: None,
            sigmas: Vec::new(),
            t_grid: Vec::new(),
            seed,
            out_dir: out_dir.display().to_string(),
        }
    }

    pub fn with_optimizer(mut self, opts: &TrainOptions) -> Self {
        self.optimizer = serde_json::to_value(opts).ok();
        self
    }
}

/// `runs/<command>-<unix seconds>-s<seed>`, used when no output directory is given.
pub fn default_out_dir(command: &str, seed: u64) -> PathBuf {
    let secs = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs());
    PathBuf::from("runs").join(format!("{command}-{secs}-s{seed}"))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    fs::write(path, text + "\n")?;
    Ok(())
}

/// Write `header` and `rows` as CSV behind a `# manifest:` comment line.
pub fn write_csv(path: &Path, manifest: &ExperimentManifest, header: &[String], rows: &[Vec<String>]) -> Result<()> {
    let mut out = BufWriter::new(fs::File::create(path)?);
    writeln!(out, "# manifest: {}", serde_json::to_string(manifest)?)?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header)?;
    for row in rows {
        w.write_record(row)?;
    }
    w.flush()?;
    Ok(())
}

/// Parse the manifest line of a CSV written by [`write_csv`].
pub fn read_csv_manifest(path: &Path) -> Result<ExperimentManifest> {
    let text = fs::read_to_string(path)?;
    let line = text.lines().next().unwrap_or_default();
    match line.strip_prefix("# manifest: ") {
        Some(json) => Ok(serde_json::from_str(json)?),
        None => input_err(format!("{} has no manifest line", path.display())),
    }
}

/// CSV reader that skips the manifest comment.
pub fn csv_reader(path: &Path) -> Result<csv::Reader<fs::File>> {
    Ok(csv::ReaderBuilder::new().comment(Some(b'#')).from_path(path)?)
}

fn header(fixed: &[&str], p: usize) -> Vec<String> {
    let mut h: Vec<String> = fixed.iter().map(|s| s.to_string()).collect();
    h.extend((1..=p).map(|k| format!("beta_{k}")));
    h.extend((1..=p).map(|k| format!("gamma_{k}")));
    h
}

fn num(x: f64) -> String {
    x.to_string()
}

// ---------------------------------------------------------------- generation

/// Which random family to draw and at what size.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeneratorSpec {
    pub family: Family,
    /// Spin count for the regular families.
    pub n: Option<usize>,
    pub rows: Option<usize>,
    pub cols: Option<usize>,
    /// Graph degree for the regular families (defaults: 3 for Max-Cut, 4 for glasses).
    pub degree: Option<usize>,
}

impl GeneratorSpec {
    pub fn regular(family: Family, n: usize) -> Self {
        GeneratorSpec { family, n: Some(n), rows: None, cols: None, degree: None }
    }

    pub fn grid(rows: usize, cols: usize) -> Self {
        GeneratorSpec { family: Family::Grid2d, n: None, rows: Some(rows), cols: Some(cols), degree: None }
    }

    /// Number of spins per instance.
    pub fn size(&self) -> Result<usize> {
        match self.family {
            Family::Grid2d => match (self.rows, self.cols) {
                (Some(r), Some(c)) => Ok(r * c),
                _ => input_err("grid2d needs --rows and --cols"),
            },
            Family::MaxCutRegular | Family::RegularGlass => {
                self.n.ok_or_else(|| Error::Input(format!("{} needs --n", self.family)))
            }
            other => input_err(format!("family {other} cannot be generated")),
        }
    }

    pub fn generate(&self, seed: u64) -> Result<SpinGlass> {
        let n = self.size()?;
        match self.family {
            Family::MaxCutRegular => gen_regular_maxcut(n, self.degree.unwrap_or(3), seed),
            Family::RegularGlass => gen_regular_pm_glass(n, self.degree.unwrap_or(4), seed),
            Family::Grid2d => gen_grid_spinglass(self.rows.unwrap_or(0), self.cols.unwrap_or(0), seed),
            other => input_err(format!("family {other} cannot be generated")),
        }
    }
}

/// An instance together with its stable identifier.
#[derive(Debug, Clone, PartialEq)]
pub struct NamedInstance {
    pub id: String,
    pub instance: SpinGlass,
}

fn instance_id(k: usize) -> String {
    format!("instance_{k:04}")
}

/// `m` instances; instance `k` uses the sub-seed `derive_seed(seed, k)`.
pub fn generate_instances(spec: &GeneratorSpec, m: usize, seed: u64) -> Result<Vec<NamedInstance>> {
    if m == 0 {
        return input_err("instance count M must be at least 1");
    }
    (0..m)
        .into_par_iter()
        .map(|k| Ok(NamedInstance { id: instance_id(k), instance: spec.generate(derive_seed(seed, k as u64))? }))
        .collect()
}

#[derive(Serialize)]
struct InstanceFileRef<'a> {
    manifest: &'a ExperimentManifest,
    #[serde(flatten)]
    instance: &'a SpinGlass,
}

/// Write `m` instance files into `out` and return their paths.
pub fn cmd_gen(spec: &GeneratorSpec, m: usize, seed: u64, out: &Path) -> Result<Vec<PathBuf>> {
    let instances = generate_instances(spec, m, seed)?;
    fs::create_dir_all(out)?;
    let mut manifest = ExperimentManifest::new("gen", seed, out);
    manifest.family = Some(spec.family.to_string());
    manifest.sizes = vec![spec.size()?];
    manifest.instances = Some(m);
    let mut paths = Vec::with_capacity(m);
    for inst in &instances {
        let path = out.join(format!("{}.json", inst.id));
        write_json(&path, &InstanceFileRef { manifest: &manifest, instance: &inst.instance })?;
        paths.push(path);
    }
    Ok(paths)
}

/// Load every `instance_*.json` in `dir`, sorted by file name.
pub fn load_instances(dir: &Path) -> Result<Vec<NamedInstance>> {
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.extension().is_some_and(|x| x == "json")
                && p.file_name().and_then(|s| s.to_str()).is_some_and(|s| s.starts_with("instance_"))
        })
        .collect();
    paths.sort();
    if paths.is_empty() {
        return input_err(format!("no instance_*.json files in {}", dir.display()));
    }
    paths
        .iter()
        .map(|p| {
            let id = p.file_stem().and_then(|s| s.to_str()).unwrap_or_default().to_string();
            Ok(NamedInstance { id, instance: SpinGlass::load_json(p)? })
        })
        .collect()
}

// ------------------------------------------------------------- tree training

/// Tree spec used for a family: Max-Cut couplings on degree-3 trees or when
/// asked for explicitly, `+1` glass couplings otherwise.
pub fn tree_spec_for(degree: usize, family: Option<Family>) -> Result<TreeSpec> {
    match family {
        Some(Family::MaxCutRegular) => TreeSpec::maxcut(degree, 1),
        Some(_) => TreeSpec::pm_glass(degree, 1),
        None if degree == 3 => TreeSpec::maxcut(degree, 1),
        None => TreeSpec::pm_glass(degree, 1),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeParamsStage {
    pub p: usize,
    pub qubits: usize,
    pub e_g: f64,
    pub params: QaoaParams,
    pub evaluations: usize,
    pub iterations: usize,
    pub converged: Convergence,
    pub plan: PlanStats,
}

/// Contents of `tree_params.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeParamsFile {
    pub manifest: ExperimentManifest,
    pub degree: usize,
    pub coupling: f64,
    pub stages: Vec<TreeParamsStage>,
}

impl TreeParamsFile {
    pub fn from_stages(manifest: ExperimentManifest, spec: &TreeSpec, stages: &[TreeStage]) -> Self {
        TreeParamsFile {
            manifest,
            degree: spec.degree,
            coupling: spec.coupling,
            stages: stages
                .iter()
                .map(|s| TreeParamsStage {
                    p: s.depth,
                    qubits: s.qubits,
                    e_g: s.e_g(),
                    params: s.result.best_params.clone(),
                    evaluations: s.result.evaluations,
                    iterations: s.result.iterations,
                    converged: s.result.converged,
                    plan: s.plan.clone(),
                })
                .collect(),
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        write_json(path, self)
    }

    pub fn depths(&self) -> Vec<usize> {
        self.stages.iter().map(|s| s.p).collect()
    }

    pub fn params(&self, p: usize) -> Result<&QaoaParams> {
        self.stages
            .iter()
            .find(|s| s.p == p)
            .map(|s| &s.params)
            .ok_or_else(|| Error::Input(format!("parameter file has no depth {p} (has {:?})", self.depths())))
    }
}

/// Train the tree ladder and write `tree_params.json` plus one trace per depth.
pub fn cmd_tree_train(
    spec: &TreeSpec,
    p_max: usize,
    opts: &TrainOptions,
    seed: u64,
    out: &Path,
) -> Result<TreeParamsFile> {
    let stages = tree_train_with(spec, p_max, seed, opts)?;
    fs::create_dir_all(out.join("traces"))?;
    let mut manifest = ExperimentManifest::new("tree-train", seed, out).with_optimizer(opts);
    manifest.family = Some(format!("tree(degree={}, coupling={})", spec.degree, spec.coupling));
    manifest.sizes = vec![spec.degree];
    manifest.p_range = (1..=p_max).collect();
    for s in &stages {
        let path = out.join("traces").join(format!("trace_p{}.csv", s.depth));
        let mut f = BufWriter::new(fs::File::create(path)?);
        writeln!(f, "# manifest: {}", serde_json::to_string(&manifest)?)?;
        write_trace_csv(f, &s.result.trace)?;
    }
    let file = TreeParamsFile::from_stages(manifest, spec, &stages);
    file.save(&out.join("tree_params.json"))?;
    Ok(file)
}

// ---------------------------------------------------------------- evaluation

/// Exact reference values of one instance.
struct Reference {
    spectrum: EnergySpectrum,
    baseline_residual: f64,
}

fn reference(sim: &QaoaSimulator) -> Result<Reference> {
    let spectrum = sim.instance().spectrum()?;
    let plus = StateVector::plus(sim.instance().n())?;
    let baseline_residual = spectrum.residual_energy(sim.energy_of(&plus))?;
    Ok(Reference { spectrum, baseline_residual })
}

/// `|+>`-state residual energy ("random guessing").
pub fn baseline_residual(sg: &SpinGlass) -> Result<f64> {
    Ok(reference(&QaoaSimulator::new(sg.clone())?)?.baseline_residual)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalRow {
    pub instance_id: String,
    pub n: usize,
    pub p: usize,
    pub sigma: f64,
    pub energy: f64,
    pub e0: f64,
    pub emax: f64,
    pub residual_energy: f64,
    pub ground_overlap: f64,
    pub baseline_residual: f64,
}

/// Seed of the disorder realization for instance `k` at depth `p`. It does
/// not depend on sigma, so every sigma scales the same standard normals.
fn disorder_seed(seed: u64, k: usize, p: usize) -> u64 {
    derive_seed(derive_seed(seed, k as u64), p as u64)
}

/// Evaluate every parameter set on every instance at every sigma. The state
/// is evolved under the disturbed Hamiltonians and measured against the
/// undisturbed one; `sigma == 0` means no disorder at all. An empty sigma
/// list is the same as `[0]`.
pub fn evaluate_rows(
    instances: &[NamedInstance],
    params: &[QaoaParams],
    sigmas: &[f64],
    mode: DisorderMode,
    seed: u64,
) -> Result<Vec<EvalRow>> {
    let sigmas = effective_sigmas(sigmas)?;
    let per_instance: Vec<Vec<EvalRow>> = instances
        .par_iter()
        .enumerate()
        .map(|(k, inst)| {
            let clean = QaoaSimulator::new(inst.instance.clone())?;
            let refs = reference(&clean)?;
            let mut rows = Vec::new();
            for x in params {
                let p = x.depth();
                for &sigma in &sigmas {
                    let psi = if sigma == 0.0 {
                        clean.state(x)?
                    } else {
                        let d = DisorderRealization::sample(&inst.instance, sigma, disorder_seed(seed, k, p), p, mode)?;
                        QaoaSimulator::with_disorder(inst.instance.clone(), d)?.state(x)?
                    };
                    let energy = clean.energy_of(&psi);
                    rows.push(EvalRow {
                        instance_id: inst.id.clone(),
                        n: inst.instance.n(),
                        p,
                        sigma,
                        energy,
                        e0: refs.spectrum.e0,
                        emax: refs.spectrum.emax,
                        residual_energy: refs.spectrum.residual_energy(energy)?,
                        ground_overlap: ground_state_overlap(&refs.spectrum, &psi)?,
                        baseline_residual: refs.baseline_residual,
                    });
                }
            }
            Ok(rows)
        })
        .collect::<Result<_>>()?;
    Ok(per_instance.into_iter().flatten().collect())
}

fn effective_sigmas(sigmas: &[f64]) -> Result<Vec<f64>> {
    if let Some(bad) = sigmas.iter().find(|s| !(**s >= 0.0 && s.is_finite())) {
        return input_err(format!("sigma must be finite and >= 0, got {bad}"));
    }
    Ok(if sigmas.is_empty() { vec![0.0] } else { sigmas.to_vec() })
}

/// Evaluate the parameter file's depths (all, or just `depths`) and write
/// `evaluate.csv`.
pub fn cmd_evaluate(
    instances: &[NamedInstance],
    params: &TreeParamsFile,
    depths: &[usize],
    sigmas: &[f64],
    mode: DisorderMode,
    seed: u64,
    out: &Path,
) -> Result<Vec<EvalRow>> {
    let depths = if depths.is_empty() { params.depths() } else { depths.to_vec() };
    let sets: Vec<QaoaParams> = depths.iter().map(|&p| params.params(p).cloned()).collect::<Result<_>>()?;
    let rows = evaluate_rows(instances, &sets, sigmas, mode, seed)?;
    fs::create_dir_all(out)?;
    let mut manifest = ExperimentManifest::new("evaluate", seed, out);
    manifest.family = instances.first().and_then(|i| i.instance.meta()).map(|m| m.family.to_string());
    manifest.sizes = distinct_sizes(instances);
    manifest.instances = Some(instances.len());
    manifest.p_range = depths;
    manifest.sigmas = effective_sigmas(sigmas)?;
    let header: Vec<String> = [
        "instance_id",
        "n",
        "p",
        "sigma",
        "energy",
        "e0",
        "emax",
        "residual_energy",
        "ground_overlap",
        "baseline_residual",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    let table: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                r.instance_id.clone(),
                r.n.to_string(),
                r.p.to_string(),
                num(r.sigma),
                num(r.energy),
                num(r.e0),
                num(r.emax),
                num(r.residual_energy),
                num(r.ground_overlap),
                num(r.baseline_residual),
            ]
        })
        .collect();
    write_csv(&out.join("evaluate.csv"), &manifest, &header, &table)?;
    Ok(rows)
}

fn distinct_sizes(instances: &[NamedInstance]) -> Vec<usize> {
    let mut sizes: Vec<usize> = instances.iter().map(|i| i.instance.n()).collect();
    sizes.sort_unstable();
    sizes.dedup();
    sizes
}

// ----------------------------------------------------------- vanilla training

/// Per-instance training settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VanillaOptions {
    pub train: TrainOptions,
    /// Uniform random starts in the instance's search box.
    pub random_starts: usize,
    /// Also start from the small-angle annealing-like point (listed first).
    pub annealing_start: bool,
}

impl Default for VanillaOptions {
    fn default() -> Self {
        VanillaOptions { train: TrainOptions::default(), random_starts: 1, annealing_start: false }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VanillaRow {
    pub instance_id: String,
    pub n: usize,
    pub p: usize,
    pub energy: f64,
    pub residual_energy: f64,
    pub ground_overlap: f64,
    pub baseline_residual: f64,
    pub evaluations: usize,
    pub converged: bool,
    /// Optimal angles, folded into the symmetry-reduced box with `gamma_1 >= 0`.
    pub params: QaoaParams,
}

/// Train QAOA at depth `p` on every instance separately. Instance `k` draws
/// its random starts from the stream `derive_seed(seed, k)`.
pub fn vanilla_rows(instances: &[NamedInstance], p: usize, opts: &VanillaOptions, seed: u64) -> Result<Vec<VanillaRow>> {
    if p == 0 {
        return input_err("depth p must be at least 1");
    }
    if opts.random_starts == 0 && !opts.annealing_start {
        return input_err("no starting points: enable the annealing start or ask for random starts");
    }
    instances
        .par_iter()
        .enumerate()
        .map(|(k, inst)| {
            let sg = &inst.instance;
            let obj = InstanceObjective::new(sg.clone(), p)?;
            let refs = reference(obj.simulator())?;
            let bounds = SearchBox::for_instance(sg);
            let mut rng = stream_rng(seed, k as u64);
            let mut inits = Vec::new();
            if opts.annealing_start {
                inits.push(annealing_start(p, &bounds));
            }
            inits.extend((0..opts.random_starts).map(|_| bounds.sample(p, &mut rng)));
            let result = multi_start(&obj, &inits, &opts.train)?;
            let psi = obj.simulator().state(&result.best_params)?;
            Ok(VanillaRow {
                instance_id: inst.id.clone(),
                n: sg.n(),
                p,
                energy: result.best_value,
                residual_energy: refs.spectrum.residual_energy(result.best_value)?,
                ground_overlap: ground_state_overlap(&refs.spectrum, &psi)?,
                baseline_residual: refs.baseline_residual,
                evaluations: result.evaluations,
                converged: result.converged.converged,
                params: SearchBox::symmetry_reduced(sg).canonicalize(&result.best_params),
            })
        })
        .collect()
}

#[derive(Serialize, Deserialize)]
pub struct VanillaParamsFile {
    pub manifest: ExperimentManifest,
    pub p: usize,
    pub instances: Vec<VanillaRow>,
}

fn vanilla_table(rows: &[VanillaRow]) -> Vec<Vec<String>> {
    rows.iter()
        .map(|r| {
            let mut row = vec![
                r.instance_id.clone(),
                r.n.to_string(),
                r.p.to_string(),
                num(r.energy),
                num(r.residual_energy),
                num(r.ground_overlap),
                num(r.baseline_residual),
                r.evaluations.to_string(),
                r.converged.to_string(),
            ];
            row.extend(r.params.to_flat().into_iter().map(num));
            row
        })
        .collect()
}

const VANILLA_COLUMNS: [&str; 9] = [
    "instance_id",
    "n",
    "p",
    "energy",
    "residual_energy",
    "ground_overlap",
    "baseline_residual",
    "evaluations",
    "converged",
];

/// Train every instance and write `vanilla.csv` and `vanilla_params.json`.
pub fn cmd_vanilla_train(
    instances: &[NamedInstance],
    p: usize,
    opts: &VanillaOptions,
    seed: u64,
    out: &Path,
) -> Result<Vec<VanillaRow>> {
    let rows = vanilla_rows(instances, p, opts, seed)?;
    fs::create_dir_all(out)?;
    let mut manifest = ExperimentManifest::new("vanilla-train", seed, out);
    manifest.optimizer = serde_json::to_value(opts).ok();
    manifest.family = instances.first().and_then(|i| i.instance.meta()).map(|m| m.family.to_string());
    manifest.sizes = distinct_sizes(instances);
    manifest.instances = Some(instances.len());
    manifest.p_range = vec![p];
    write_csv(&out.join("vanilla.csv"), &manifest, &header(&VANILLA_COLUMNS, p), &vanilla_table(&rows))?;
    write_json(&out.join("vanilla_params.json"), &VanillaParamsFile { manifest, p, instances: rows.clone() })?;
    Ok(rows)
}

// ----------------------------------------------------------------- annealing

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnnealRow {
    pub instance_id: String,
    pub total_time: f64,
    pub ground_population: f64,
    pub schedule_kind: String,
}

/// Ground-state population for every instance, schedule and annealing time.
/// `steps` overrides the default step rule.
pub fn anneal_rows(
    instances: &[NamedInstance],
    schedules: &[Schedule],
    t_grid: &[f64],
    steps: Option<usize>,
) -> Result<Vec<AnnealRow>> {
    if t_grid.is_empty() {
        return input_err("empty annealing time grid");
    }
    if schedules.is_empty() {
        return input_err("no annealing schedule given");
    }
    let annealers: Vec<Annealer> = instances.par_iter().map(|i| Annealer::new(&i.instance)).collect::<Result<_>>()?;
    let jobs: Vec<(usize, usize, f64)> = (0..instances.len())
        .flat_map(|i| (0..schedules.len()).flat_map(move |s| t_grid.iter().map(move |&t| (i, s, t))))
        .collect();
    jobs.par_iter()
        .map(|&(i, s, t)| {
            let steps = steps.unwrap_or_else(|| annealers[i].steps_for(t));
            let r = annealers[i].run(&schedules[s], t, steps, false)?;
            Ok(AnnealRow {
                instance_id: instances[i].id.clone(),
                total_time: t,
                ground_population: r.ground_population,
                schedule_kind: schedules[s].kind.to_string(),
            })
        })
        .collect()
}

/// Schedule fitted to the deepest stage of a tree parameter file.
pub fn fitted_from_tree(params: &TreeParamsFile) -> Result<Schedule> {
    let deepest = params.stages.iter().max_by_key(|s| s.p).ok_or_else(|| Error::Input("empty parameter file".into()))?;
    fit_schedule(&deepest.params)
}

/// Run the sweep and write `anneal.csv` (plus every schedule used, as JSON).
pub fn cmd_anneal(
    instances: &[NamedInstance],
    schedules: &[Schedule],
    t_grid: &[f64],
    steps: Option<usize>,
    seed: u64,
    out: &Path,
) -> Result<Vec<AnnealRow>> {
    let rows = anneal_rows(instances, schedules, t_grid, steps)?;
    fs::create_dir_all(out)?;
    let mut manifest = ExperimentManifest::new("anneal", seed, out);
    manifest.family = instances.first().and_then(|i| i.instance.meta()).map(|m| m.family.to_string());
    manifest.sizes = distinct_sizes(instances);
    manifest.instances = Some(instances.len());
    manifest.t_grid = t_grid.to_vec();
    for (k, s) in schedules.iter().enumerate() {
        write_json(&out.join(format!("schedule_{k}_{}.json", s.kind)), s)?;
    }
    let header: Vec<String> = ["instance_id", "T", "ground_population", "schedule_kind"].iter().map(|s| s.to_string()).collect();
    let table: Vec<Vec<String>> = rows
        .iter()
        .map(|r| vec![r.instance_id.clone(), num(r.total_time), num(r.ground_population), r.schedule_kind.clone()])
        .collect();
    write_csv(&out.join("anneal.csv"), &manifest, &header, &table)?;
    Ok(rows)
}

// ------------------------------------------------------------- concentration

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConcentrationSummary {
    pub n: usize,
    pub instances: usize,
    pub mean_gamma_1: f64,
    /// Unbiased sample variance of the canonical `gamma_1`.
    pub var_gamma_1: f64,
    pub mean_residual: f64,
}

/// Mean and unbiased sample variance.
pub fn mean_variance(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = if xs.len() < 2 { 0.0 } else { xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0) };
    (mean, var)
}

/// Train `m` fresh instances per size and summarize how the optimal first
/// problem angle spreads. Instances for size `n` use the seed
/// `derive_seed(seed, n)`.
pub fn concentration_rows(
    family: Family,
    sizes: &[usize],
    m: usize,
    p: usize,
    opts: &VanillaOptions,
    seed: u64,
) -> Result<(Vec<VanillaRow>, Vec<ConcentrationSummary>)> {
    if sizes.is_empty() {
        return input_err("no sizes given");
    }
    let mut all = Vec::new();
    let mut summaries = Vec::new();
    for &n in sizes {
        let s = derive_seed(seed, n as u64);
        let instances = generate_instances(&GeneratorSpec::regular(family, n), m, s)?;
        let rows = vanilla_rows(&instances, p, opts, s)?;
        let gammas: Vec<f64> = rows.iter().map(|r| r.params.gammas[0]).collect();
        let (mean_gamma_1, var_gamma_1) = mean_variance(&gammas);
        let mean_residual = rows.iter().map(|r| r.residual_energy).sum::<f64>() / rows.len() as f64;
        log::info!("n={n}: gamma_1 mean {mean_gamma_1:.4} variance {var_gamma_1:.3e}");
        summaries.push(ConcentrationSummary { n, instances: rows.len(), mean_gamma_1, var_gamma_1, mean_residual });
        all.extend(rows);
    }
    Ok((all, summaries))
}

/// Run the concentration study and write `concentration.csv` and
/// `concentration_summary.csv`.
#[allow(clippy::too_many_arguments)]
pub fn cmd_concentration(
    family: Family,
    sizes: &[usize],
    m: usize,
    p: usize,
    opts: &VanillaOptions,
    seed: u64,
    out: &Path,
) -> Result<Vec<ConcentrationSummary>> {
    let (rows, summaries) = concentration_rows(family, sizes, m, p, opts, seed)?;
    fs::create_dir_all(out)?;
    let mut manifest = ExperimentManifest::new("concentration", seed, out);
    manifest.optimizer = serde_json::to_value(opts).ok();
    manifest.family = Some(family.to_string());
    manifest.sizes = sizes.to_vec();
    manifest.instances = Some(m);
    manifest.p_range = vec![p];
    write_csv(&out.join("concentration.csv"), &manifest, &header(&VANILLA_COLUMNS, p), &vanilla_table(&rows))?;
    let header: Vec<String> =
        ["n", "instances", "mean_gamma_1", "var_gamma_1", "mean_residual"].iter().map(|s| s.to_string()).collect();
    let table: Vec<Vec<String>> = summaries
        .iter()
        .map(|s| vec![s.n.to_string(), s.instances.to_string(), num(s.mean_gamma_1), num(s.var_gamma_1), num(s.mean_residual)])
        .collect();
    write_csv(&out.join("concentration_summary.csv"), &manifest, &header, &table)?;
    Ok(summaries)
}
