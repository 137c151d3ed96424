//! End-to-end acceptance checks. Prints one line per criterion and exits
//! non-zero if any fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::Command;
use std::time::{Duration, Instant};

use rgis::cover::{
    build_pdim_adaptive, build_pdim_cover, build_theta1_adaptive, build_theta1_cover,
    empirical_c_eps, verify_cover,
};
use rgis::montecarlo::{bipartite_comparison, estimate_membership, EstimateReport};
use rgis::process::{ensemble_run, increment_diagnostics, mean_degree_deviation, sample_independent_set};
use rgis::rng::{mix64, stream};
use rgis::typicality::{check_p3, is_typical, TypicalityOptions};
use rgis::{chernoff_bound, freedman_bound, Graph, ParamSet, ProcessState, VertexSet};

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        pass,
        detail: detail.into(),
    }
}

/// Uniform draws in `[0, 1)` from a counter.
struct Counter(u64, u64);

impl Counter {
    fn next(&mut self) -> f64 {
        self.1 += 1;
        (mix64(self.0 ^ mix64(self.1)) >> 11) as f64 / (1u64 << 53) as f64
    }

    fn range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next()
    }

    fn below(&mut self, n: usize) -> usize {
        ((self.next() * n as f64) as usize).min(n - 1)
    }
}

fn random_vertices(n: usize, count: usize, seed: u64) -> VertexSet {
    let mut c = Counter(seed, 0);
    let mut set = VertexSet::empty(n);
    while set.len() < count {
        set.insert(c.below(n));
    }
    set
}

// 1
fn process_state_oracle() -> Verdict {
    let combos = [50, 200, 500]
        .iter()
        .flat_map(|&n| [0.05, 0.1, 0.2].map(move |p| (n, p)))
        .collect::<Vec<_>>();
    let mut steps_checked = 0usize;
    for seed in 0..100u64 {
        let (n, p) = combos[seed as usize % combos.len()];
        let g = Graph::gnp_sample(n, p, seed).unwrap();
        let mut state = ProcessState::new(&g);
        let mut rng = stream(seed, 0);
        loop {
            let chosen = VertexSet::from_vertices(n, state.chosen().iter().copied()).unwrap();
            let active = g.common_non_neighbourhood(&chosen).unwrap();
            if state.active().to_vec() != active.to_vec() || state.active_len() != active.len() {
                return verdict(false, format!("active set mismatch: seed {seed}, step {}", state.step_index()));
            }
            let members = active.to_vec();
            for &v in &members {
                let brute = members.iter().filter(|&&u| g.has_edge(u, v)).count();
                if state.degree(v) != Some(brute) {
                    return verdict(
                        false,
                        format!("degree mismatch: seed {seed}, step {}, vertex {v}", state.step_index()),
                    );
                }
            }
            steps_checked += 1;
            if state.step(&mut rng).is_none() {
                break;
            }
        }
    }
    verdict(true, format!("100 hosts, {steps_checked} states equal to brute force"))
}

// 2
fn independence_invariant() -> Verdict {
    let mut sets = 0usize;
    let mut cells = 0usize;
    for seed in 0..60u64 {
        let (n, p) = [(60, 0.3), (150, 0.1), (300, 0.05)][seed as usize % 3];
        let g = Graph::gnp_sample(n, p, seed).unwrap();
        let ps = ParamSet::derive(n, p, 0.5).unwrap();
        for r in 0..10 {
            let run = rgis::run(&g, &ps, seed * 100 + r).unwrap();
            let lean = sample_independent_set(&g, ps.k, &mut stream(seed, r));
            if !g.is_independent_slice(&run.chosen) || !g.is_independent_slice(&lean) {
                return verdict(false, format!("dependent I_k on host {seed}"));
            }
            sets += 2;
        }
        let flat = build_theta1_cover(&g, &ps, 40, seed).unwrap();
        for set in &flat.sets {
            if !g.is_independent_slice(set) {
                return verdict(false, format!("dependent cover set on host {seed}"));
            }
        }
        sets += flat.sets.len();
        let part = build_pdim_cover(&g, &ps, n.div_ceil(ps.k), 8, seed).unwrap();
        for partition in &part.partitions {
            let mut seen = vec![false; n];
            for cell in partition {
                if !g.is_independent_slice(cell) {
                    return verdict(false, format!("dependent partition cell on host {seed}"));
                }
                for &v in cell {
                    if std::mem::replace(&mut seen[v], true) {
                        return verdict(false, format!("overlapping cells on host {seed}"));
                    }
                }
                cells += 1;
            }
        }
        if verify_cover(&g, &flat).is_err() || verify_cover(&g, &part).is_err() {
            return verdict(false, format!("verify_cover rejected a construction on host {seed}"));
        }
    }
    verdict(true, format!("{sets} sets and {cells} partition cells independent, partitions disjoint"))
}

// 3
fn increment_bound() -> Verdict {
    let (n, p) = (2000, 0.05);
    let ps = ParamSet::derive(n, p, 0.5).unwrap();
    let mut worst = 0.0f64;
    let mut first_bad: Option<(u64, usize, usize, f64)> = None;
    let mut frozen_ok = true;
    let mut increments = 0usize;
    for host_seed in 0..3u64 {
        let g = Graph::gnp_sample(n, p, host_seed).unwrap();
        let p3 = check_p3(&g, &ps, host_seed);
        if p3.violation_count != 0 {
            return verdict(false, format!("host {host_seed} is not P3-typical"));
        }
        let tracked = VertexSet::full(n);
        for r in 0..3u64 {
            let stats = increment_diagnostics(&g, &ps, &tracked, host_seed * 10 + r, false).unwrap();
            for tr in &stats.traces {
                for (idx, (&a, &b)) in tr.dx_minus.iter().zip(&tr.dx_plus).enumerate() {
                    let i = idx + 1;
                    increments += 2;
                    if i > tr.rho && (a != 0.0 || b != 0.0) {
                        frozen_ok = false;
                    }
                    let m = a.abs().max(b.abs());
                    worst = worst.max(m);
                    if m > stats.bound_abs && first_bad.map_or(true, |(_, s, _, _)| i < s) {
                        first_bad = Some((host_seed, i, tr.vertex, m));
                    }
                }
            }
        }
    }
    let bound = ps.increment_cap();
    let drift_term = |i: usize| 16.0 * p * ps.error_factor(i - 1) * ps.trajectory_degree(i - 1);
    let detail = format!(
        "max |dX| = {worst:.1} vs cap {bound:.1} over {increments} increments; frozen increments zero: {frozen_ok}; \
         envelope drift term 16 p f d~ is {:.1} at step 1 and {:.1} at step 2",
        drift_term(1),
        drift_term(2)
    );
    match first_bad {
        None => verdict(frozen_ok, detail),
        Some((h, i, v, m)) => verdict(
            false,
            format!("{detail}; first excess at host {h}, step {i}, vertex {v}: {m:.1}"),
        ),
    }
}

// 4
fn drift_sign() -> Verdict {
    let (n, p) = (1000, 0.05);
    let g = Graph::gnp_sample(n, p, 4).unwrap();
    let ps = ParamSet::derive(n, p, 0.5).unwrap();
    let tracked = random_vertices(n, 20, 4);
    let summary = ensemble_run(&g, &ps, 2000, 40, &tracked).unwrap();
    let mut checked = 0;
    for st in summary.steps.iter().filter(|s| s.dx_samples > 0) {
        checked += 1;
        if st.dx_minus_mean > 3.0 * st.dx_minus_se {
            return verdict(false, format!("step {}: mean dX- = {} > 3 se = {}", st.i, st.dx_minus_mean, 3.0 * st.dx_minus_se));
        }
        if st.dx_plus_mean < -3.0 * st.dx_plus_se {
            return verdict(false, format!("step {}: mean dX+ = {} < -3 se", st.i, st.dx_plus_mean));
        }
    }
    verdict(checked > 0, format!("2000 runs, 20 tracked vertices, {checked} steps with correct drift sign"))
}

// 5
fn envelope_adherence() -> Verdict {
    let (n, p) = (2000, 0.05);
    let ps = ParamSet::derive(n, p, 0.5).unwrap();
    let mut worst = (0.0f64, 0usize);
    let mut violations = 0;
    let mut short_runs = 0;
    let mut off_runs = 0;
    for host_seed in 0..5u64 {
        let g = Graph::gnp_sample(n, p, 100 + host_seed).unwrap();
        for r in 0..10u64 {
            let run = rgis::run(&g, &ps, host_seed * 10 + r).unwrap();
            violations += (run.first_violation.is_some() || run.tau != run.completed_steps) as usize;
            short_runs += (run.completed_steps != ps.k) as usize;
            let mut off = false;
            for rec in &run.records {
                let dev = mean_degree_deviation(p, rec);
                if dev > worst.0 {
                    worst = (dev, rec.i);
                }
                off |= dev > 0.10;
            }
            off_runs += off as usize;
        }
    }
    verdict(
        violations == 0 && short_runs == 0 && off_runs == 0,
        format!(
            "50 runs, k = {}: {violations} with envelope violations, {short_runs} exhausted early, \
             {off_runs} with mean degree off by more than 10%; worst {:.2}% at step {}",
            ps.k,
            100.0 * worst.0,
            worst.1
        ),
    )
}

fn membership_report() -> (EstimateReport, Duration) {
    let start = Instant::now();
    let g = Graph::gnp_sample(500, 0.05, 13).unwrap();
    let ps = ParamSet::derive(500, 0.05, 0.5).unwrap();
    let report = estimate_membership(&g, &ps, 200_000, 6, 200).unwrap();
    (report, start.elapsed())
}

// 6
fn membership_uniformity(r: &EstimateReport) -> Verdict {
    let identity = r.vertex_counts.iter().sum::<u64>() == r.total_set_size;
    let within = r.vertex_fraction_within(0.05);
    let (lo, hi) = r
        .per_vertex_freq
        .iter()
        .fold((f64::MAX, f64::MIN), |(a, b), &f| (a.min(f), b.max(f)));
    let detail = format!(
        "k/n = {:.4}; {:.1}% of vertices within 5% (need 99%); range [{:.4}, {:.4}]; count identity {identity}",
        r.predicted_vertex,
        100.0 * within,
        lo,
        hi
    );
    verdict(identity && within >= 0.99, detail)
}

// 7
fn pair_coverage(r: &EstimateReport) -> Verdict {
    let within = r.pair_fraction_within(0.15);
    let radii_ok = r.pairs.len() == 200 && r.pairs.iter().all(|p| p.ci_radius.is_finite());
    let mut rel: Vec<f64> = r.pairs.iter().map(|p| p.ci_radius / r.predicted_pair).collect();
    rel.sort_by(f64::total_cmp);
    let detail = format!(
        "(k/n)^2 = {:.3e}; {:.1}% of 200 pairs within 15% (need 95%); median 3-sigma radius {:.1}% relative",
        r.predicted_pair,
        100.0 * within,
        100.0 * rel[rel.len() / 2]
    );
    verdict(radii_ok && within >= 0.95, detail)
}

/// Pair probabilities on `K_{a,b}` by enumeration: uniform independent
/// `k`-sets, and every ordered greedy sequence with its probability.
fn bipartite_oracle(a: usize, b: usize, k: usize) -> (f64, f64) {
    let g = Graph::complete_bipartite(a, b);
    let n = a + b;
    let (mut total, mut with_pair) = (0u64, 0u64);
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        if g.is_independent_slice(&idx) {
            total += 1;
            with_pair += (idx.contains(&0) && idx.contains(&1)) as u64;
        }
        let mut pos = k;
        while pos > 0 && idx[pos - 1] == n - k + pos - 1 {
            pos -= 1;
        }
        if pos == 0 {
            break;
        }
        idx[pos - 1] += 1;
        for q in pos..k {
            idx[q] = idx[q - 1] + 1;
        }
    }
    fn greedy(g: &Graph, chosen: &mut Vec<usize>, k: usize, prob: f64) -> f64 {
        if chosen.len() == k {
            return if chosen.contains(&0) && chosen.contains(&1) { prob } else { 0.0 };
        }
        let active: Vec<usize> = (0..g.n())
            .filter(|&v| chosen.iter().all(|&c| c != v && !g.has_edge(c, v)))
            .collect();
        if active.is_empty() {
            return 0.0;
        }
        let share = prob / active.len() as f64;
        let mut acc = 0.0;
        for v in active {
            chosen.push(v);
            acc += greedy(g, chosen, k, share);
            chosen.pop();
        }
        acc
    }
    (with_pair as f64 / total as f64, greedy(&g, &mut Vec::new(), k, 1.0))
}

// 8
fn bipartite_divergence() -> Verdict {
    let (uni, gre) = bipartite_oracle(10, 20, 3);
    let oracle_ok = (uni - 8.0 / 1260.0).abs() < 1e-15 && (gre - 1.0 / 45.0).abs() < 1e-14;
    let trials = 1_000_000u64;
    let c = bipartite_comparison(10, 20, 3, trials, 8).unwrap();
    let exact_ok = (c.uniform_exact - uni).abs() < 1e-15 && (c.greedy_exact - gre).abs() < 1e-14;
    let sigma = (gre * (1.0 - gre) / trials as f64).sqrt();
    let mc_ok = (c.greedy_mc - 1.0 / 45.0).abs() <= 3.0 * sigma;
    let ratio_ok = (c.ratio_mc - 3.5).abs() <= 3.0 * sigma / uni && (c.ratio_exact - 3.5).abs() < 1e-12;

    let (uni_eq, gre_eq) = bipartite_oracle(12, 12, 4);
    let eq = bipartite_comparison(12, 12, 4, trials, 9).unwrap();
    let sigma_eq = (gre_eq * (1.0 - gre_eq) / trials as f64).sqrt() / uni_eq;
    let eq_ok = (eq.ratio_mc - 1.0).abs() <= 3.0 * sigma_eq && (eq.ratio_exact - 1.0).abs() < 1e-12;
    verdict(
        oracle_ok && exact_ok && mc_ok && ratio_ok && eq_ok,
        format!(
            "uniform {:.6} greedy {:.6} (enumeration agrees: {}); MC greedy {:.6} +- {:.6}; ratio {:.3} +- {:.3}; a = b ratio {:.3} +- {:.3}",
            c.uniform_exact,
            c.greedy_exact,
            oracle_ok && exact_ok,
            c.greedy_mc,
            3.0 * sigma,
            c.ratio_mc,
            3.0 * sigma / uni,
            eq.ratio_mc,
            3.0 * sigma_eq
        ),
    )
}

// 9
fn cover_completeness() -> Verdict {
    let ps = ParamSet::derive(300, 0.1, 0.5).unwrap();
    let bf = ps.bound_formulas(1.0).unwrap();
    let g = Graph::gnp_sample(300, 0.1, 2).unwrap();
    let flat = build_theta1_adaptive(&g, &ps, 3, 10 * bf.t_theta1).unwrap();
    let flat_report = verify_cover(&g, &flat.cover).unwrap();
    let flat_ok = flat.complete && flat.count <= bf.t_theta1 && flat_report.uncovered_count == 0;

    let g4 = Graph::gnp_sample(300, 0.1, 4).unwrap();
    let adaptive = build_pdim_adaptive(&g4, &ps, bf.s_pdim, 5, 100 * bf.t_pdim).unwrap();
    let c_eps = empirical_c_eps(&ps, adaptive.count);
    let t = ps.bound_formulas(c_eps).unwrap().t_pdim;
    let fixed = build_pdim_cover(&g4, &ps, bf.s_pdim, t, 5).unwrap();
    let part_report = verify_cover(&g4, &fixed).unwrap();
    let part_ok = adaptive.complete && part_report.uncovered_count == 0;
    verdict(
        flat_ok && part_ok,
        format!(
            "theta1: {} sets (budget {}) cover {} of {} non-edges; pdim: c_eps = {:.2}, {} partitions of {} cover {} of {}",
            flat.count,
            bf.t_theta1,
            flat_report.non_edges - flat_report.uncovered_count,
            flat_report.non_edges,
            c_eps,
            fixed.partitions.len(),
            bf.s_pdim,
            part_report.non_edges - part_report.uncovered_count,
            part_report.non_edges
        ),
    )
}

fn ls_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let m = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / m;
    let my = ys.iter().sum::<f64>() / m;
    let num: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let den: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    num / den
}

// 10
fn scaling_shape() -> Verdict {
    let p = 0.1;
    let mut xs = Vec::new();
    let mut observed = Vec::new();
    let mut predicted = Vec::new();
    let mut counts = Vec::new();
    for n in [200usize, 300, 400] {
        let ps = ParamSet::derive(n, p, 0.5).unwrap();
        let mut log_sum = 0.0;
        let mut these = Vec::new();
        for h in 0..4u64 {
            let g = Graph::gnp_sample(n, p, 1000 + h).unwrap();
            let a = build_theta1_adaptive(&g, &ps, h, 1_000_000).unwrap();
            if !a.complete {
                return verdict(false, format!("adaptive cover incomplete at n = {n}"));
            }
            log_sum += (a.count as f64).ln();
            these.push(a.count);
        }
        let nf = n as f64;
        let kf = ps.k as f64;
        xs.push(nf.ln());
        observed.push(log_sum / 4.0);
        predicted.push((nf * nf * nf.ln() / (kf * kf)).ln());
        counts.push(these);
    }
    let s_obs = ls_slope(&xs, &observed);
    let s_pred = ls_slope(&xs, &predicted);
    verdict(
        (s_obs - s_pred).abs() <= 0.25 * s_pred,
        format!("slope {s_obs:.3} vs predicted {s_pred:.3} (tolerance 25%); counts {counts:?}"),
    )
}

fn num(v: &serde_json::Value) -> f64 {
    v.as_str().expect("string number").parse().expect("float")
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * b.abs()
}

// 11
fn formula_evaluators() -> Verdict {
    let table: serde_json::Value =
        serde_json::from_str(include_str!("data/formula_oracle.json")).unwrap();
    let mut bad = Vec::new();
    for (row_idx, row) in table.as_array().unwrap().iter().enumerate() {
        let n = row["n"].as_u64().unwrap() as usize;
        let ps = ParamSet::derive(n, num(&row["p"]), num(&row["k_coef"])).unwrap();
        let i = row["i"].as_u64().unwrap() as usize;
        let bf = ps.bound_formulas(num(&row["c_eps"])).unwrap();
        let fr = &row["freedman"];
        let ch = &row["chernoff"];
        let checks = [
            ("f0", ps.f0, num(&row["f0"])),
            ("delta2", ps.delta2, num(&row["delta2"])),
            ("expected_degree", ps.expected_degree(i).unwrap(), num(&row["expected_degree"])),
            ("error_f", ps.error_f(i).unwrap(), num(&row["error_f"])),
            ("failure_prob", ps.failure_prob_bound(), num(&row["failure_prob"])),
            ("variation_cap", ps.variation_cap(), num(&row["variation_cap"])),
            ("increment_cap", ps.increment_cap(), num(&row["increment_cap"])),
            ("mrss_lower", bf.mrss_lower, num(&row["mrss_lower"])),
            (
                "freedman",
                freedman_bound(num(&fr["t"]), num(&fr["s"]), num(&fr["r"])).unwrap(),
                num(&fr["value"]),
            ),
            ("chernoff", chernoff_bound(num(&ch["mean"]), num(&ch["t"])).unwrap(), num(&ch["value"])),
        ];
        for (name, got, want) in checks {
            if !close(got, want) {
                bad.push(format!("row {row_idx} {name}: {got:e} vs {want:e}"));
            }
        }
        let ints = [
            ("k", ps.k, row["k"].as_u64().unwrap() as usize),
            ("s_pdim", bf.s_pdim, row["s_pdim"].as_u64().unwrap() as usize),
            ("t_pdim", bf.t_pdim, row["t_pdim"].as_u64().unwrap() as usize),
            ("t_theta1", bf.t_theta1, row["t_theta1"].as_u64().unwrap() as usize),
        ];
        for (name, got, want) in ints {
            if got != want {
                bad.push(format!("row {row_idx} {name}: {got} vs {want}"));
            }
        }
    }

    let mut c = Counter(11, 0);
    let mut mono_fail = Vec::new();
    for triple in 0..1000 {
        let mut xs = [c.next(), c.next(), c.next()];
        xs.sort_by(f64::total_cmp);
        let ys: [f64; 3];
        let increasing;
        match triple % 8 {
            0 => {
                let (s, r) = (c.range(1.0, 1e3), c.range(0.0, 10.0));
                ys = xs.map(|x| freedman_bound(1.0 + 200.0 * x, s, r).unwrap());
                increasing = false;
            }
            1 => {
                let (t, r) = (c.range(1.0, 100.0), c.range(0.0, 10.0));
                ys = xs.map(|x| freedman_bound(t, 1.0 + 1e3 * x, r).unwrap());
                increasing = true;
            }
            2 => {
                let (t, s) = (c.range(1.0, 100.0), c.range(1.0, 1e3));
                ys = xs.map(|x| freedman_bound(t, s, 10.0 * x).unwrap());
                increasing = true;
            }
            3 => {
                let mean = c.range(0.0, 200.0);
                ys = xs.map(|x| chernoff_bound(mean, 100.0 * x).unwrap());
                increasing = false;
            }
            4 => {
                let t = c.range(0.1, 60.0);
                ys = xs.map(|x| chernoff_bound(300.0 * x, t).unwrap());
                increasing = true;
            }
            5 | 6 => {
                let n = 100 + c.below(100_000);
                let p = c.range(5.0 / n as f64, 0.5);
                let ps = ParamSet::derive(n, p, c.range(0.1, 1.0)).unwrap();
                let steps = xs.map(|x| (x * ps.k as f64) as usize);
                if triple % 8 == 5 {
                    ys = steps.map(|i| ps.expected_degree(i).unwrap());
                    increasing = false;
                } else {
                    ys = steps.map(|i| ps.error_f(i).unwrap());
                    increasing = true;
                }
            }
            _ => {
                let p = c.range(0.01, 0.5);
                let ns = xs.map(|x| (100.0 + 1e5 * x) as usize);
                ys = ns.map(|n| ParamSet::derive(n, p, 0.5).unwrap().failure_prob_bound());
                increasing = false;
            }
        }
        let ordered = if increasing {
            ys[0] <= ys[1] && ys[1] <= ys[2]
        } else {
            ys[0] >= ys[1] && ys[1] >= ys[2]
        };
        if !ordered {
            mono_fail.push(format!("triple {triple}: {ys:?}"));
        }
    }
    verdict(
        bad.is_empty() && mono_fail.is_empty(),
        format!(
            "20 reference points, {} mismatches {:?}; 1000 monotonicity triples, {} failures {:?}",
            bad.len(),
            bad.iter().take(3).collect::<Vec<_>>(),
            mono_fail.len(),
            mono_fail.iter().take(3).collect::<Vec<_>>()
        ),
    )
}

// 12
fn typicality_rate() -> Verdict {
    let ps = ParamSet::derive(2000, 0.05, 0.5).unwrap();
    let opts = TypicalityOptions::default();
    let mut typical = 0;
    let mut failing = Vec::new();
    for seed in 0..100u64 {
        let g = Graph::gnp_sample(2000, 0.05, seed).unwrap();
        let r = is_typical(&g, &ps, &opts, seed).unwrap();
        if r.typical {
            typical += 1;
        } else {
            failing.push(seed);
        }
    }
    verdict(typical >= 99, format!("{typical} of 100 hosts typical; atypical seeds {failing:?}"))
}

// 13
fn cli_determinism() -> Verdict {
    let dir = std::path::Path::new(env!("CARGO_TARGET_TMPDIR")).join("acceptance");
    std::fs::create_dir_all(&dir).unwrap();
    let host = dir.join("host.el");
    std::fs::write(&host, Graph::gnp_sample(150, 0.1, 21).unwrap().to_edge_list()).unwrap();
    let host = host.to_str().unwrap().to_string();
    let (u, v) = Graph::gnp_sample(150, 0.1, 21).unwrap().non_edges().nth(7).unwrap();
    let (u, v) = (u.to_string(), v.to_string());
    let cases: Vec<Vec<&str>> = vec![
        vec!["gen", "--n", "120", "--p", "0.2", "--seed", "3"],
        vec!["bounds", "--n", "1000", "--p", "0.05"],
        vec!["run", "--input", &host, "--seed", "5"],
        vec!["run", "--n", "300", "--p", "0.1", "--seed", "5", "--format", "csv"],
        vec!["typical", "--input", &host, "--budget", "30"],
        vec!["cover", "--input", &host, "--mode", "theta1", "--t", "200"],
        vec!["cover", "--input", &host, "--mode", "pdim", "--t", "30"],
        vec!["cover", "--input", &host, "--mode", "adaptive"],
        vec!["cover", "--input", &host, "--mode", "adaptive", "--partitions"],
        vec!["estimate", "--what", "membership", "--input", &host, "--trials", "20000"],
        vec!["estimate", "--what", "pair", "--input", &host, "--trials", "20000"],
        vec![
            "estimate", "--what", "chain", "--input", &host, "--trials", "20000", "--i", "1",
            "--j", "4", "--u", &u, "--v", &v,
        ],
        vec![
            "estimate", "--what", "bipartite", "--a", "10", "--b", "20", "--k", "3",
            "--trials", "50000",
        ],
    ];
    for case in &cases {
        let mut outputs = Vec::new();
        for threads in ["1", "4", "2", "1"] {
            let out = Command::new(env!("CARGO_BIN_EXE_rgis"))
                .args(case)
                .args(["--threads", threads])
                .output()
                .unwrap();
            if !out.status.success() {
                return verdict(false, format!("{case:?} failed: {}", String::from_utf8_lossy(&out.stderr)));
            }
            outputs.push(out.stdout);
        }
        if outputs.windows(2).any(|w| w[0] != w[1]) {
            return verdict(false, format!("{case:?} output differs between invocations"));
        }
    }
    verdict(true, format!("{} invocations byte-identical at 1, 2 and 4 threads", cases.len()))
}

fn main() {
    let mut results: Vec<(usize, &str, Verdict, Duration)> = Vec::new();
    let mut record = |id: usize, name: &'static str, limit: Option<Duration>, f: &mut dyn FnMut() -> Verdict| {
        let start = Instant::now();
        let mut v = catch_unwind(AssertUnwindSafe(f))
            .unwrap_or_else(|_| verdict(false, "panicked"));
        let elapsed = start.elapsed();
        if let Some(limit) = limit {
            if elapsed > limit {
                v.pass = false;
                v.detail.push_str(&format!("; runtime {elapsed:.1?} over limit {limit:?}"));
            }
        }
        println!(
            "criterion {id:>2} {} {name}: {} ({:.1?})",
            if v.pass { "PASS" } else { "FAIL" },
            v.detail,
            elapsed
        );
        results.push((id, name, v, elapsed));
    };
    let min = |m: u64| Some(Duration::from_secs(60 * m));

    record(1, "process state oracle", min(1), &mut process_state_oracle);
    record(2, "independence invariant", None, &mut independence_invariant);
    record(3, "increment bound", None, &mut increment_bound);
    record(4, "drift sign", min(5), &mut drift_sign);
    record(5, "envelope adherence", min(2), &mut envelope_adherence);
    let (report, took) = membership_report();
    record(6, "membership uniformity", None, &mut || {
        let mut v = membership_uniformity(&report);
        if took > Duration::from_secs(600) {
            v.pass = false;
            v.detail.push_str("; estimation over 10 minutes");
        }
        v
    });
    record(7, "pair coverage", None, &mut || pair_coverage(&report));
    record(8, "bipartite divergence", None, &mut bipartite_divergence);
    record(9, "cover completeness", min(5), &mut cover_completeness);
    record(10, "scaling shape", None, &mut scaling_shape);
    record(11, "formula evaluators", None, &mut formula_evaluators);
    record(12, "typicality rate", min(10), &mut typicality_rate);
    record(13, "cli determinism", None, &mut cli_determinism);

    let failed: Vec<usize> = results.iter().filter(|r| !r.2.pass).map(|r| r.0).collect();
    println!(
        "acceptance: {} of {} criteria passed{}",
        results.len() - failed.len(),
        results.len(),
        if failed.is_empty() { String::new() } else { format!("; failed {failed:?}") }
    );
    if !failed.is_empty() {
        std::process::exit(1);
    }
}
