//! Subcommand implementations: load, run, report.

use crate::args::{
    parse_state_prep, CommonArgs, CompareArgs, ComponentsArgs, CorpusArgs, EngineArg,
    EstimateArgs, PartitionArgs, QuantumArgs, SpectrumArgs,
};
use crate::report::{emit, table_lines, CliError, GraphInfo, Report};
use qlap_core::corpus;
use qlap_core::graph::{Graph, NormalizationMode};
use qlap_core::qpe::{
    count_zero_degeneracy, eigenvalue_histogram, quantum_fiedler_partition, DegeneracyReport,
    EigHistogram, FiedlerDiagnostics, QpeConfig,
};
use qlap_core::resources::{self, ResourceEstimate};
use qlap_core::spectral::{eig_sym, recursive_bisect, sign_bisect};
use qlap_core::RngStream;
use serde::Serialize;
use std::fs::File;
use std::io::BufReader;
use std::path::Path;
use std::time::Instant;

fn load_graph(path: &Path) -> Result<Graph, CliError> {
    let file = File::open(path).map_err(|source| CliError::Read {
        path: path.display().to_string(),
        source,
    })?;
    Ok(Graph::parse_edge_list(BufReader::new(file))?)
}

fn graph_info(path: &Path, g: &Graph) -> GraphInfo {
    GraphInfo {
        path: path.display().to_string(),
        num_vertices: g.num_vertices(),
        num_edges: g.num_edges(),
    }
}

fn norm_name(mode: NormalizationMode) -> &'static str {
    match mode {
        NormalizationMode::GershgorinPow2 => "gershgorin_pow2",
        NormalizationMode::Exact => "exact",
    }
}

/// Builds the pipeline configuration shared by the quantum subcommands.
fn quantum_config(
    delta: f64,
    quantum: &QuantumArgs,
    common: &CommonArgs,
) -> Result<QpeConfig, CliError> {
    let mut cfg = QpeConfig::new(delta).map_err(CliError::from)?;
    cfg.backend = quantum.backend();
    cfg.shots = quantum.shots;
    cfg.n_samples = quantum.n_samples;
    cfg.seed = common.seed;
    cfg.normalization = quantum.normalization();
    cfg.readout = quantum.readout();
    cfg.validate().map_err(CliError::from)?;
    Ok(cfg)
}

fn finish<T: Serialize>(
    mut report: Report<T>,
    common: &CommonArgs,
    started: Instant,
    table: &str,
) -> Result<(), CliError> {
    if !common.no_timestamp {
        report = report.with_timing(started.elapsed().as_secs_f64() * 1e3);
    }
    emit(&report, common.out.as_deref(), table)
}

#[derive(Debug, Serialize)]
struct ClassicalSpectrumResult {
    engine: &'static str,
    eigenvalues: Vec<f64>,
    num_zero: usize,
}

#[derive(Debug, Serialize)]
struct QuantumSpectrumResult {
    engine: &'static str,
    delta: f64,
    ancilla_bits: usize,
    backend: String,
    normalization: &'static str,
    state_prep: String,
    seed: u64,
    histogram: EigHistogram,
    modal_bin: Option<usize>,
    modal_eigenvalue: Option<f64>,
}

pub fn cmd_spectrum(args: &SpectrumArgs) -> Result<(), CliError> {
    let started = Instant::now();
    let g = load_graph(&args.graph)?;
    let info = graph_info(&args.graph, &g);
    match args.engine {
        EngineArg::Classical => {
            let eig = eig_sym(&g.laplacian())?;
            let rows = vec![
                (String::from("engine"), String::from("classical")),
                (
                    String::from("eigenvalues"),
                    format!(
                        "[{}]",
                        eig.eigenvalues
                            .iter()
                            .map(|x| format!("{x:.6}"))
                            .collect::<Vec<_>>()
                            .join(", ")
                    ),
                ),
                (String::from("zero modes"), eig.num_zero.to_string()),
            ];
            let result = ClassicalSpectrumResult {
                engine: "classical",
                eigenvalues: eig.eigenvalues,
                num_zero: eig.num_zero,
            };
            finish(
                Report::new("spectrum", Some(info), result),
                &args.common,
                started,
                &table_lines("laplacian spectrum (classical oracle)", &rows),
            )
        }
        EngineArg::Quantum => {
            let cfg = quantum_config(args.delta, &args.quantum, &args.common)?;
            let padded = g.pad_to_power_of_two();
            let l = padded.laplacian().normalize(cfg.normalization)?;
            let mut cfg = cfg;
            cfg.state_prep = parse_state_prep(&args.state_prep, l.dim())
                .map_err(CliError::InvalidArgument)?;
            let histogram = eigenvalue_histogram(&l, &cfg, &RngStream::new(cfg.seed, 0))?;
            let modal_bin = histogram.modal_bin();
            let modal_eigenvalue = modal_bin.map(|b| histogram.eigenvalue_of_bin(b));
            let mut rows = vec![
                (String::from("engine"), String::from("quantum")),
                (String::from("ancilla bits"), cfg.ancilla_bits().to_string()),
                (String::from("shots"), cfg.shots.to_string()),
            ];
            for (&bin, &count) in histogram.counts() {
                rows.push((
                    format!("bin {bin}"),
                    format!(
                        "count {count}  λ̂ = {:.6}",
                        histogram.eigenvalue_of_bin(bin)
                    ),
                ));
            }
            let result = QuantumSpectrumResult {
                engine: "quantum",
                delta: args.delta,
                ancilla_bits: cfg.ancilla_bits(),
                backend: cfg.backend.to_string(),
                normalization: norm_name(cfg.normalization),
                state_prep: args.state_prep.clone(),
                seed: cfg.seed,
                histogram,
                modal_bin,
                modal_eigenvalue,
            };
            finish(
                Report::new("spectrum", Some(info), result),
                &args.common,
                started,
                &table_lines("eigenvalue histogram (quantum engine)", &rows),
            )
        }
    }
}

#[derive(Debug, Serialize)]
struct PartitionResult {
    engine: String,
    k: usize,
    assignment: Vec<usize>,
    num_blocks: usize,
    cut_edges: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    diagnostics: Option<FiedlerDiagnostics>,
}

pub fn cmd_partition(args: &PartitionArgs) -> Result<(), CliError> {
    let started = Instant::now();
    let g = load_graph(&args.graph)?;
    let info = graph_info(&args.graph, &g);
    let result = match args.engine {
        EngineArg::Classical => {
            let partition = recursive_bisect(&g, args.k)?;
            PartitionResult {
                engine: String::from("classical"),
                k: args.k,
                assignment: partition.assignment().to_vec(),
                num_blocks: partition.num_blocks(),
                cut_edges: partition.cut_edges(),
                diagnostics: None,
            }
        }
        EngineArg::Quantum => {
            if args.k != 2 {
                return Err(CliError::UnsupportedK { k: args.k });
            }
            let cfg = quantum_config(args.delta, &args.quantum, &args.common)?;
            let (partition, diagnostics) =
                quantum_fiedler_partition(&g, &cfg, &RngStream::new(cfg.seed, 0))?;
            PartitionResult {
                engine: String::from("quantum"),
                k: 2,
                assignment: partition.assignment().to_vec(),
                num_blocks: partition.num_blocks(),
                cut_edges: partition.cut_edges(),
                diagnostics: Some(diagnostics),
            }
        }
    };
    let mut rows = vec![
        (String::from("engine"), result.engine.clone()),
        (String::from("blocks"), result.num_blocks.to_string()),
        (String::from("cut edges"), result.cut_edges.to_string()),
        (String::from("assignment"), format!("{:?}", result.assignment)),
    ];
    if let Some(d) = &result.diagnostics {
        rows.push((String::from("fiedler λ̂"), format!("{:.6}", d.fiedler_estimate)));
        if let Some(oracle) = &d.oracle {
            rows.push((
                String::from("oracle agreement"),
                oracle.agreement.to_string(),
            ));
        }
    }
    finish(
        Report::new("partition", Some(info), result),
        &args.common,
        started,
        &table_lines("spectral bisection", &rows),
    )
}

#[derive(Debug, Serialize)]
struct ComponentsResult {
    union_find: usize,
    spectral_num_zero: usize,
    quantum: DegeneracyReport,
    spectral_agrees: bool,
    quantum_agrees: bool,
    all_agree: bool,
}

pub fn cmd_components(args: &ComponentsArgs) -> Result<(), CliError> {
    let started = Instant::now();
    let g = load_graph(&args.graph)?;
    let info = graph_info(&args.graph, &g);
    let union_find = g.connected_components().count;
    let spectral_num_zero = eig_sym(&g.laplacian())?.num_zero;
    let cfg = quantum_config(args.delta, &args.quantum, &args.common)?;
    let padded = g.pad_to_power_of_two();
    let l = padded.laplacian().normalize(cfg.normalization)?;
    let quantum = count_zero_degeneracy(&l, padded.ghost_count(), &cfg, &RngStream::new(cfg.seed, 0))?;
    let spectral_agrees = spectral_num_zero == union_find;
    let quantum_agrees = quantum.count == union_find;
    let result = ComponentsResult {
        union_find,
        spectral_num_zero,
        spectral_agrees,
        quantum_agrees,
        all_agree: spectral_agrees && quantum_agrees,
        quantum,
    };
    let rows = vec![
        (String::from("union-find"), result.union_find.to_string()),
        (
            String::from("classical zero modes"),
            result.spectral_num_zero.to_string(),
        ),
        (
            String::from("quantum degeneracy"),
            result.quantum.count.to_string(),
        ),
        (String::from("all agree"), result.all_agree.to_string()),
    ];
    finish(
        Report::new("components", Some(info), result),
        &args.common,
        started,
        &table_lines("connected components, three ways", &rows),
    )
}

pub fn cmd_estimate(args: &EstimateArgs) -> Result<(), CliError> {
    let started = Instant::now();
    let file = File::open(&args.graph).map_err(|source| CliError::Read {
        path: args.graph.display().to_string(),
        source,
    })?;
    let summary = resources::scan_edge_list(BufReader::new(file))?;
    let estimate: ResourceEstimate = resources::estimate(
        summary,
        args.delta,
        args.epsilon,
        qlap_core::qpe::DEFAULT_GUARD_BITS,
    )?;
    let info = GraphInfo {
        path: args.graph.display().to_string(),
        num_vertices: summary.num_vertices,
        num_edges: summary.num_edges,
    };
    let rows = vec![
        (
            String::from("system qubits"),
            estimate.n_system.to_string(),
        ),
        (
            String::from("ancilla qubits"),
            estimate.m_ancilla.to_string(),
        ),
        (
            String::from("total qubits"),
            estimate.total_qubits.to_string(),
        ),
        (
            String::from("controlled-U applications"),
            estimate.controlled_u_applications.to_string(),
        ),
        (
            String::from("oracle calls per U"),
            format!("{:.3}", estimate.oracle_calls_per_u),
        ),
        (String::from("runtime"), estimate.runtime_class.clone()),
        (
            String::from("classical exact"),
            estimate.classical_exact_class.clone(),
        ),
    ];
    finish(
        Report::new("estimate", Some(info), estimate),
        &args.common,
        started,
        &table_lines("resource forecast", &rows),
    )
}

#[derive(Debug, Serialize)]
struct SignificantBin {
    bin: usize,
    count: u64,
    eigenvalue_estimate: f64,
    nearest_eigenvalue: f64,
    abs_deviation: f64,
}

#[derive(Debug, Serialize)]
struct EigenvalueComparison {
    max_abs_deviation: f64,
    /// One bin width in unnormalized units: `divisor · 2^−m`.
    bound: f64,
    within_bound: bool,
    noise_floor: u64,
    significant_bins: Vec<SignificantBin>,
    histogram: EigHistogram,
}

#[derive(Debug, Serialize)]
struct PartitionComparison {
    quantum_cut: usize,
    classical_cut: usize,
    cut_delta: i64,
    degenerate_fiedler: bool,
    agreement: bool,
    quantum_assignment: Vec<usize>,
    classical_assignment: Vec<usize>,
}

#[derive(Debug, Serialize)]
struct CompareResult {
    backend: String,
    delta: f64,
    ancilla_bits: usize,
    seed: u64,
    eigenvalues: EigenvalueComparison,
    partition: PartitionComparison,
    #[serde(skip_serializing_if = "Option::is_none")]
    classical_wall_ms: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    quantum_wall_ms: Option<f64>,
}

pub fn cmd_compare(args: &CompareArgs) -> Result<(), CliError> {
    let started = Instant::now();
    let g = load_graph(&args.graph)?;
    let info = graph_info(&args.graph, &g);

    let classical_started = Instant::now();
    let eig = eig_sym(&g.laplacian())?;
    if eig.num_zero != 1 {
        return Err(CliError::ComponentSplitAdvised {
            components: g.connected_components().count,
        });
    }
    let classical_partition = sign_bisect(&g, &eig.eigenvectors[1])?;
    let classical_wall = classical_started.elapsed().as_secs_f64() * 1e3;

    let quantum_started = Instant::now();
    let cfg = quantum_config(args.delta, &args.quantum, &args.common)?;
    let (quantum_partition, diagnostics) =
        quantum_fiedler_partition(&g, &cfg, &RngStream::new(cfg.seed, 0))?;
    let quantum_wall = quantum_started.elapsed().as_secs_f64() * 1e3;

    // true spectrum of the padded graph: the original eigenvalues plus one
    // zero per ghost vertex
    let padded = g.pad_to_power_of_two();
    let mut true_spectrum = eig.eigenvalues.clone();
    true_spectrum.extend(std::iter::repeat(0.0).take(padded.ghost_count()));
    true_spectrum.sort_by(|a, b| a.partial_cmp(b).expect("eigenvalues are finite"));

    let histogram = diagnostics.histogram.clone();
    let floor = diagnostics.noise_floor;
    let mut significant_bins = Vec::new();
    let mut max_abs_deviation = 0.0f64;
    for (&bin, &count) in histogram.counts() {
        if count < floor {
            continue;
        }
        let estimate = histogram.eigenvalue_of_bin(bin);
        let nearest = true_spectrum
            .iter()
            .copied()
            .min_by(|a, b| {
                (a - estimate)
                    .abs()
                    .partial_cmp(&(b - estimate).abs())
                    .expect("finite")
            })
            .expect("spectrum is nonempty");
        let abs_deviation = (estimate - nearest).abs();
        max_abs_deviation = max_abs_deviation.max(abs_deviation);
        significant_bins.push(SignificantBin {
            bin,
            count,
            eigenvalue_estimate: estimate,
            nearest_eigenvalue: nearest,
            abs_deviation,
        });
    }
    let bound = histogram.divisor() / (histogram.ancilla_bits() as f64).exp2();

    let oracle = diagnostics
        .oracle
        .clone()
        .ok_or_else(|| CliError::Algorithm(String::from("classical oracle unavailable")))?;
    let result = CompareResult {
        backend: cfg.backend.to_string(),
        delta: args.delta,
        ancilla_bits: cfg.ancilla_bits(),
        seed: cfg.seed,
        eigenvalues: EigenvalueComparison {
            max_abs_deviation,
            bound,
            within_bound: max_abs_deviation <= bound,
            noise_floor: floor,
            significant_bins,
            histogram,
        },
        partition: PartitionComparison {
            quantum_cut: oracle.quantum_cut,
            classical_cut: oracle.classical_cut,
            cut_delta: oracle.quantum_cut as i64 - oracle.classical_cut as i64,
            degenerate_fiedler: oracle.degenerate_fiedler,
            agreement: oracle.agreement,
            quantum_assignment: quantum_partition.assignment().to_vec(),
            classical_assignment: classical_partition.assignment().to_vec(),
        },
        classical_wall_ms: (!args.common.no_timestamp).then_some(classical_wall),
        quantum_wall_ms: (!args.common.no_timestamp).then_some(quantum_wall),
    };
    let rows = vec![
        (
            String::from("max |λ̂ − λ|"),
            format!("{:.6}", result.eigenvalues.max_abs_deviation),
        ),
        (
            String::from("bin-width bound"),
            format!("{:.6}", result.eigenvalues.bound),
        ),
        (
            String::from("within bound"),
            result.eigenvalues.within_bound.to_string(),
        ),
        (
            String::from("cut (quantum / classical)"),
            format!(
                "{} / {}",
                result.partition.quantum_cut, result.partition.classical_cut
            ),
        ),
        (
            String::from("partition agreement"),
            result.partition.agreement.to_string(),
        ),
    ];
    finish(
        Report::new("compare", Some(info), result),
        &args.common,
        started,
        &table_lines("quantum vs classical", &rows),
    )
}

#[derive(Debug, Serialize)]
struct CorpusFile {
    name: String,
    path: String,
    num_vertices: usize,
    num_edges: usize,
}

#[derive(Debug, Serialize)]
struct CorpusResult {
    directory: String,
    files: Vec<CorpusFile>,
}

pub fn cmd_corpus(args: &CorpusArgs) -> Result<(), CliError> {
    let started = Instant::now();
    std::fs::create_dir_all(&args.out_dir).map_err(|source| CliError::Write {
        path: args.out_dir.display().to_string(),
        source,
    })?;
    let mut files = Vec::new();
    for (name, g) in corpus::full_corpus() {
        let path = args.out_dir.join(format!("{name}.edges"));
        std::fs::write(&path, g.to_edge_list_string()).map_err(|source| CliError::Write {
            path: path.display().to_string(),
            source,
        })?;
        files.push(CorpusFile {
            name,
            path: path.display().to_string(),
            num_vertices: g.num_vertices(),
            num_edges: g.num_edges(),
        });
    }
    let rows: Vec<(String, String)> = files
        .iter()
        .map(|f| {
            (
                f.name.clone(),
                format!("{} vertices, {} edges", f.num_vertices, f.num_edges),
            )
        })
        .collect();
    let result = CorpusResult {
        directory: args.out_dir.display().to_string(),
        files,
    };
    finish(
        Report::new("corpus", None, result),
        &args.common,
        started,
        &table_lines("benchmark corpus written", &rows),
    )
}
