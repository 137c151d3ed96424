mod args;

use std::fs;
use std::io::{self, Write};
use std::path::Path;
use std::process::ExitCode;

use clap::Parser;
use serde::Serialize;

use args::{
    BoundsArgs, Cli, Command, CoverArgs, CoverMode, EstimateArgs, Family, Format, GenArgs,
    HostArgs, ParamArgs, RunArgs, TypicalArgs, What,
};
use rgis::analytics::{EnvelopePoint, RegimeCheck};
use rgis::cover::{
    build_pdim_adaptive, build_pdim_cover, build_theta1_adaptive, build_theta1_cover,
    empirical_c_eps, parse_cover_json, verify_cover, AnyCover, BoundComparison, Cover,
    CoverReport,
};
use rgis::montecarlo::{bipartite_comparison, estimate_conditional_chain, estimate_membership};
use rgis::typicality::{is_typical, TypicalityOptions};
use rgis::{BoundFormulas, Graph, ParamSet, SCHEMA_VERSION};

enum Failure {
    /// Bad or missing flags (exit 2).
    Usage(String),
    /// Everything else (exit 1).
    Domain(String),
}

impl From<rgis::Error> for Failure {
    fn from(e: rgis::Error) -> Self {
        Failure::Domain(e.to_string())
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Domain(format!("i/o error: {e}"))
    }
}

type Outcome = Result<ExitCode, Failure>;

#[derive(Serialize)]
struct Envelope<'a, T> {
    schema_version: u32,
    version: &'static str,
    config: &'a Cli,
    report: T,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(threads) = cli.threads {
        if threads == 0 {
            eprintln!("error: --threads must be at least 1");
            return ExitCode::from(2);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
        {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    if cli.format == Format::Csv && !matches!(cli.command, Command::Gen(_)) {
        eprintln!("note: csv output is a flat table; json is the canonical format");
    }
    let result = match &cli.command {
        Command::Gen(a) => gen(&cli, a),
        Command::Run(a) => run(&cli, a),
        Command::Typical(a) => typical(&cli, a),
        Command::Cover(a) => cover(&cli, a),
        Command::Estimate(a) => estimate(&cli, a),
        Command::Bounds(a) => bounds(&cli, a),
    };
    match result {
        Ok(code) => code,
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Domain(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
    }
}

fn write_bytes(cli: &Cli, bytes: &[u8]) -> Result<(), Failure> {
    match &cli.out {
        Some(path) => fs::write(path, bytes)?,
        None => {
            let mut out = io::stdout().lock();
            out.write_all(bytes)?;
            out.flush()?;
        }
    }
    Ok(())
}

fn emit_json<T: Serialize>(cli: &Cli, report: T) -> Result<(), Failure> {
    let env = Envelope {
        schema_version: SCHEMA_VERSION,
        version: env!("CARGO_PKG_VERSION"),
        config: cli,
        report,
    };
    let mut text = serde_json::to_string_pretty(&env)
        .map_err(|e| Failure::Domain(format!("serialization failed: {e}")))?;
    text.push('\n');
    write_bytes(cli, text.as_bytes())
}

/// Writes a CSV table produced by `fill`.
fn emit_csv<F>(cli: &Cli, fill: F) -> Result<(), Failure>
where
    F: FnOnce(&mut Vec<u8>) -> Result<(), Failure>,
{
    let mut buf = Vec::new();
    fill(&mut buf)?;
    write_bytes(cli, &buf)
}

fn csv_rows<T: Serialize>(buf: &mut Vec<u8>, rows: impl IntoIterator<Item = T>) -> Result<(), Failure> {
    let mut w = csv::Writer::from_writer(buf);
    for row in rows {
        w.serialize(row)
            .map_err(|e| Failure::Domain(format!("csv export failed: {e}")))?;
    }
    w.flush()?;
    Ok(())
}

fn read_host(path: &Path) -> Result<Graph, Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::Domain(format!("cannot read {}: {e}", path.display())))?;
    Graph::from_edge_list(&text)
        .map_err(|e| Failure::Domain(format!("{}: {e}", path.display())))
}

fn density(g: &Graph) -> f64 {
    let n = g.n() as f64;
    g.edge_count() as f64 / (n * (n - 1.0) / 2.0)
}

/// Loads or samples the host; returns it with the edge probability to use.
fn load_host(
    seed: u64,
    input: Option<&Path>,
    n: Option<usize>,
    p: Option<f64>,
    graph_seed: Option<u64>,
) -> Result<(Graph, f64), Failure> {
    match (input, n, p) {
        (Some(path), _, p) => {
            let g = read_host(path)?;
            let p = p.unwrap_or_else(|| density(&g));
            Ok((g, p))
        }
        (None, Some(n), Some(p)) => {
            let g = Graph::gnp_sample(n, p, graph_seed.unwrap_or(seed))?;
            Ok((g, p))
        }
        _ => Err(Failure::Usage("give --input, or both --n and --p".into())),
    }
}

fn host_of(cli: &Cli, h: &HostArgs) -> Result<(Graph, f64), Failure> {
    load_host(cli.seed, h.input.as_deref(), h.n, h.p, h.graph_seed)
}

fn params(n: usize, p: f64, a: &ParamArgs) -> Result<ParamSet, Failure> {
    let ps = match a.epsilon {
        Some(eps) => ParamSet::asymptotic(n, p, eps)?,
        None => ParamSet::derive(n, p, a.k_coef)?,
    };
    Ok(match a.k {
        Some(k) => ps.with_process_length(k)?,
        None => ps,
    })
}

fn gen(cli: &Cli, a: &GenArgs) -> Outcome {
    let need_n = || a.n.ok_or_else(|| Failure::Usage("--n is required".into()));
    let g = match a.family {
        Family::Gnp => {
            let p = a.p.ok_or_else(|| Failure::Usage("--p is required for gnp".into()))?;
            Graph::gnp_sample(need_n()?, p, cli.seed)?
        }
        Family::Empty => Graph::empty(need_n()?),
        Family::Complete => Graph::complete(need_n()?),
        Family::Star => Graph::star(need_n()?),
        Family::Path => Graph::path(need_n()?),
        Family::Cycle => Graph::cycle(need_n()?),
        Family::Bipartite => match (a.a, a.b) {
            (Some(x), Some(y)) => Graph::complete_bipartite(x, y),
            _ => return Err(Failure::Usage("bipartite needs --a and --b".into())),
        },
    };
    write_bytes(cli, g.to_edge_list().as_bytes())?;
    Ok(ExitCode::SUCCESS)
}

fn run(cli: &Cli, a: &RunArgs) -> Outcome {
    let (g, p) = host_of(cli, &a.host)?;
    let ps = params(g.n(), p, &a.params)?;
    let r = rgis::run(&g, &ps, cli.seed)?;
    match cli.format {
        Format::Json => emit_json(cli, &r)?,
        Format::Csv => emit_csv(cli, |buf| Ok(r.write_csv(buf)?))?,
    }
    Ok(ExitCode::SUCCESS)
}

#[derive(Serialize)]
struct TypicalRow {
    typical: bool,
    p1_subsets: usize,
    p1_violations: usize,
    p2_violations: usize,
    p3_violations: u64,
    max_codegree: usize,
    delta2: f64,
}

fn typical(cli: &Cli, a: &TypicalArgs) -> Outcome {
    let (g, p) = host_of(cli, &a.host)?;
    let ps = params(g.n(), p, &a.params)?;
    let opts = TypicalityOptions {
        budget: a.budget,
        max_size: a.max_size,
        strict_factor: a.strict_factor,
    };
    let r = is_typical(&g, &ps, &opts, cli.seed)?;
    eprintln!(
        "typical: {} (P1 {} of {} sets violate, P2 {} vertices, P3 {} pairs, max codegree {} vs {:.1})",
        r.typical,
        r.p1.violation_count,
        r.p1.subsets_tested,
        r.p2.violation_count,
        r.p3.violation_count,
        r.p3.max_codegree,
        r.p3.delta2
    );
    match cli.format {
        Format::Json => emit_json(cli, &r)?,
        Format::Csv => emit_csv(cli, |buf| {
            csv_rows(
                buf,
                [TypicalRow {
                    typical: r.typical,
                    p1_subsets: r.p1.subsets_tested,
                    p1_violations: r.p1.violation_count,
                    p2_violations: r.p2.violation_count,
                    p3_violations: r.p3.violation_count,
                    max_codegree: r.p3.max_codegree,
                    delta2: r.p3.delta2,
                }],
            )
        })?,
    }
    Ok(ExitCode::SUCCESS)
}

#[derive(Serialize)]
struct CoverOutput {
    report: CoverReport,
    /// Present for adaptive builds.
    count: Option<usize>,
    complete: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    cover: Option<AnyCover>,
}

fn cover(cli: &Cli, a: &CoverArgs) -> Outcome {
    let (g, p) = host_of(cli, &a.host)?;
    let (cover, count, bounds) = if let Some(path) = &a.verify {
        let text = fs::read_to_string(path)
            .map_err(|e| Failure::Domain(format!("cannot read {}: {e}", path.display())))?;
        let doc = read_cover(&text)
            .map_err(|e| Failure::Domain(format!("{}: {e}", path.display())))?;
        (doc, None, None)
    } else if g.non_edge_count() == 0 {
        let empty = AnyCover::Flat(Cover {
            host_n: g.n(),
            sets: Vec::new(),
        });
        (empty, (a.mode == CoverMode::Adaptive).then_some(0), None)
    } else {
        let ps = params(g.n(), p, &a.params)?;
        let bf = ps.bound_formulas(a.c_eps)?;
        let s = a.s.unwrap_or(bf.s_pdim);
        match a.mode {
            CoverMode::Theta1 => {
                let t = a.t.unwrap_or(bf.t_theta1);
                let c = build_theta1_cover(&g, &ps, t, cli.seed)?;
                (AnyCover::Flat(c), None, Some(comparison(&ps, &bf, bf.t_theta1, None, false)))
            }
            CoverMode::Pdim => {
                let t = a.t.unwrap_or(bf.t_pdim);
                let c = build_pdim_cover(&g, &ps, s, t, cli.seed)?;
                (AnyCover::Partition(c), None, Some(comparison(&ps, &bf, bf.t_pdim, None, true)))
            }
            CoverMode::Adaptive if a.partitions => {
                let r = build_pdim_adaptive(&g, &ps, s, cli.seed, a.max_t)?;
                let cmp = comparison(&ps, &bf, bf.t_pdim, Some(r.count), true);
                (AnyCover::Partition(r.cover), Some(r.count), Some(cmp))
            }
            CoverMode::Adaptive => {
                let r = build_theta1_adaptive(&g, &ps, cli.seed, a.max_t)?;
                let cmp = comparison(&ps, &bf, bf.t_theta1, Some(r.count), false);
                (AnyCover::Flat(r.cover), Some(r.count), Some(cmp))
            }
        }
    };
    let mut report = verify_cover(&g, &cover)?;
    report.bound_comparison = bounds;
    let uncovered = report.uncovered_count;
    match cli.format {
        Format::Json => emit_json(
            cli,
            CoverOutput {
                complete: uncovered == 0,
                report,
                count,
                cover: (!a.summary_only).then_some(cover),
            },
        )?,
        Format::Csv => emit_csv(cli, |buf| Ok(report.write_uncovered_csv(buf)?))?,
    }
    if a.strict && uncovered > 0 {
        eprintln!("error: {uncovered} non-edges uncovered");
        return Ok(ExitCode::from(1));
    }
    Ok(ExitCode::SUCCESS)
}

/// Accepts a bare cover or a report written by `cover`.
fn read_cover(text: &str) -> rgis::Result<AnyCover> {
    parse_cover_json(text).or_else(|first| {
        let embedded = serde_json::from_str::<serde_json::Value>(text)
            .ok()
            .and_then(|v| v.pointer("/report/cover").map(|c| c.to_string()));
        match embedded {
            Some(c) => parse_cover_json(&c),
            None => Err(first),
        }
    })
}

fn comparison(
    ps: &ParamSet,
    bf: &BoundFormulas,
    t_formula: usize,
    adaptive: Option<usize>,
    partitions: bool,
) -> BoundComparison {
    BoundComparison {
        t_formula,
        mrss_lower: bf.mrss_lower,
        adaptive_count: adaptive,
        empirical_c_eps: adaptive.filter(|_| partitions).map(|c| empirical_c_eps(ps, c)),
    }
}

fn estimate(cli: &Cli, a: &EstimateArgs) -> Outcome {
    if a.what == What::Bipartite {
        let (x, y) = match (a.a, a.b) {
            (Some(x), Some(y)) => (x, y),
            _ => return Err(Failure::Usage("bipartite needs --a and --b".into())),
        };
        let k = a
            .params
            .k
            .ok_or_else(|| Failure::Usage("bipartite needs --k".into()))?;
        let r = bipartite_comparison(x, y, k, a.trials, cli.seed)?;
        match cli.format {
            Format::Json => emit_json(cli, &r)?,
            Format::Csv => emit_csv(cli, |buf| csv_rows(buf, [&r]))?,
        }
        return Ok(ExitCode::SUCCESS);
    }
    let (g, p) = load_host(cli.seed, a.input.as_deref(), a.n, a.p, a.graph_seed)?;
    let ps = params(g.n(), p, &a.params)?;
    match a.what {
        What::Membership | What::Pair => {
            let r = estimate_membership(&g, &ps, a.trials, cli.seed, a.pairs)?;
            match (cli.format, a.what) {
                (Format::Json, _) => emit_json(cli, &r)?,
                (Format::Csv, What::Membership) => {
                    emit_csv(cli, |buf| Ok(r.write_vertex_csv(buf)?))?
                }
                (Format::Csv, _) => emit_csv(cli, |buf| Ok(r.write_pair_csv(buf)?))?,
            }
        }
        What::Chain => {
            let need = |x: Option<usize>, flag: &str| {
                x.ok_or_else(|| Failure::Usage(format!("chain needs --{flag}")))
            };
            let r = estimate_conditional_chain(
                &g,
                &ps,
                need(a.i, "i")?,
                need(a.j, "j")?,
                need(a.u, "u")?,
                need(a.v, "v")?,
                a.trials,
                cli.seed,
            )?;
            match cli.format {
                Format::Json => emit_json(cli, &r)?,
                Format::Csv => emit_csv(cli, |buf| csv_rows(buf, &r.cells))?,
            }
        }
        What::Bipartite => unreachable!("handled above"),
    }
    Ok(ExitCode::SUCCESS)
}

#[derive(Serialize)]
struct BoundsOutput {
    params: ParamSet,
    bound_formulas: BoundFormulas,
    regime: RegimeCheck,
    variation_cap: f64,
    increment_cap: f64,
    failure_prob_bound: f64,
    envelope: Vec<EnvelopePoint>,
}

fn bounds(cli: &Cli, a: &BoundsArgs) -> Outcome {
    let ps = params(a.n, a.p, &a.params)?;
    let envelope = (0..=ps.k)
        .map(|i| ps.envelope(i))
        .collect::<Result<Vec<_>, _>>()?;
    let out = BoundsOutput {
        params: ps,
        bound_formulas: ps.bound_formulas(a.c_eps)?,
        regime: ps.regime_check(),
        variation_cap: ps.variation_cap(),
        increment_cap: ps.increment_cap(),
        failure_prob_bound: ps.failure_prob_bound(),
        envelope,
    };
    match cli.format {
        Format::Json => emit_json(cli, &out)?,
        Format::Csv => emit_csv(cli, |buf| csv_rows(buf, &out.envelope))?,
    }
    Ok(ExitCode::SUCCESS)
}
