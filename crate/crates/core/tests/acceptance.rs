//! End-to-end acceptance run. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any criterion that can be judged on this machine fails.

mod common;

use std::collections::BTreeSet;
use std::time::Instant;

use common::*;
use lts_core::criticality::{extract_critical_points, extrema, morse_count_check};
use lts_core::engine::{remove_extrema, simplify_field, ConstraintSet, Simplified, SimplifyOptions, SimplifyReport};
use lts_core::io::SplitMix64;
use lts_core::mesh::shapes;
use lts_core::oracle::oracle_pairs_sweep;
use lts_core::order::compute_order_field;
use lts_core::persistence::{compute_extremum_saddle_pairs, persistence_simplify, Polarity};
use lts_core::{ScalarField, Triangulation};

struct Outcome {
    pass: bool,
    detail: String,
    /// Judged only on suitable hardware.
    advisory: bool,
}

impl Outcome {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Self { pass, detail: detail.into(), advisory: false }
    }
}

fn corpus() -> Vec<(Triangulation, ScalarField, u64)> {
    let mut out = Vec::new();
    for seed in 0..100 {
        let (m, f) = random_field(&[32, 32], seed);
        out.push((m, f, seed));
    }
    for seed in 0..20 {
        let (m, f) = random_field(&[8, 8, 8], 5000 + seed);
        out.push((m, f, 5000 + seed));
    }
    out
}

fn random_constraints(mesh: &Triangulation, f: &ScalarField, seed: u64) -> ConstraintSet {
    let order = compute_order_field(f);
    let (minima, maxima) = extrema(mesh, &order);
    let mut p = Picker::new(seed);
    let keep_min: Vec<usize> = minima.into_iter().filter(|_| p.coin()).collect();
    let keep_max: Vec<usize> = maxima.into_iter().filter(|_| p.coin()).collect();
    let mut c = ConstraintSet::new(keep_min, keep_max);
    c.preserve_minima.insert(order.vertex_at(0));
    c.preserve_maxima.insert(order.vertex_at(f.len() as u64 - 1));
    c
}

fn outside_untouched(f: &ScalarField, out: &Simplified) -> bool {
    let touched: BTreeSet<usize> = out.regions.iter().flat_map(|r| r.vertices.iter().copied()).collect();
    (0..f.len()).filter(|v| !touched.contains(v)).all(|v| f.get(v).to_bits() == out.field.get(v).to_bits())
}

#[derive(Default)]
struct Tally {
    runs: usize,
    failures: Vec<String>,
}

impl Tally {
    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.runs += 1;
        if !ok && self.failures.len() < 5 {
            self.failures.push(what());
        }
    }

    fn outcome(&self, extra: &str) -> Outcome {
        let pass = self.failures.is_empty();
        let mut detail = format!("{} checks{extra}", self.runs);
        if !pass {
            detail += &format!("; first failures: {}", self.failures.join(", "));
        }
        Outcome::new(pass, detail)
    }
}

#[derive(Default)]
struct Corpora {
    exact: Tally,
    persistence: Tally,
    bound: Tally,
    locality: Tally,
    idempotence: Tally,
    passes: Vec<usize>,
    exact_secs: f64,
    worst_height_ratio: f64,
}

fn run_corpora() -> Corpora {
    let mut c = Corpora::default();
    let opts = SimplifyOptions::default();
    let data = corpus();

    let t = Instant::now();
    let mut outputs = Vec::new();
    for (mesh, f, seed) in &data {
        let cons = random_constraints(mesh, f, *seed);
        let out = simplify_field(mesh, f, &cons, &opts).unwrap();
        let set = extract_critical_points(mesh, &out.order);
        let ok = set.minima.iter().copied().collect::<BTreeSet<_>>() == cons.preserve_minima
            && set.maxima.iter().copied().collect::<BTreeSet<_>>() == cons.preserve_maxima;
        c.exact.check(ok, || format!("seed {seed}"));
        outputs.push((cons, out));
    }
    c.exact_secs = t.elapsed().as_secs_f64();

    for ((mesh, f, seed), (cons, out)) in data.iter().zip(&outputs) {
        // the bound: hill height plus the offsets that keep g injective
        let step = opts.zeta.step(f.range());
        let slack = step * (out.report.largest_region_size as f64 + 1.0);
        let dev = f.max_abs_diff(&out.field);
        c.bound.check(dev <= out.report.max_region_height + slack, || format!("seed {seed}: {dev}"));
        if out.report.max_region_height > 0.0 {
            c.worst_height_ratio = c.worst_height_ratio.max(dev / out.report.max_region_height);
        }
        c.locality.check(outside_untouched(f, out), || format!("seed {seed}"));
        c.passes.extend(&out.report.iterations);
        let again = simplify_field(mesh, &out.field, cons, &opts).unwrap();
        c.idempotence.check(again.report.region_count == 0 && again.field == out.field, || format!("seed {seed}"));
    }

    for (mesh, f, seed) in &data {
        let order = compute_order_field(f);
        for pct in [0.01, 0.05, 0.2] {
            let eps = pct * f.range();
            let mut ok = true;
            for polarity in [Polarity::MaxSaddle, Polarity::MinSaddle] {
                let fast = compute_extremum_saddle_pairs(mesh, f, &order, polarity, eps).unwrap();
                let mut got: Vec<_> =
                    fast.pairs.iter().map(|p| (p.extremum_vertex, p.saddle_vertex, p.persistence.to_bits())).collect();
                let mut want: Vec<_> = oracle_pairs_sweep(mesh, f, &order, polarity)
                    .into_iter()
                    .filter(|p| p.saddle_vertex.is_some() && p.persistence < eps)
                    .map(|p| (p.extremum_vertex, p.saddle_vertex, p.persistence.to_bits()))
                    .collect();
                got.sort_unstable();
                want.sort_unstable();
                ok &= got == want;
            }
            let out = persistence_simplify(mesh, f, eps, &SimplifyOptions::default()).unwrap();
            let g = &out.simplified.field;
            let g_order = compute_order_field(g);
            for polarity in [Polarity::MaxSaddle, Polarity::MinSaddle] {
                ok &= oracle_pairs_sweep(mesh, g, &g_order, polarity).iter().all(|p| p.persistence >= eps);
            }
            c.persistence.check(ok, || format!("seed {seed} at {}%", pct * 100.0));
            let dev = f.max_abs_diff(g);
            c.bound.check(dev <= eps, || format!("seed {seed} at {}%: {dev} > {eps}", pct * 100.0));
            c.locality.check(outside_untouched(f, &out.simplified), || format!("seed {seed} at {}%", pct * 100.0));
            c.passes.extend(&out.simplified.report.iterations);
        }
    }
    c
}

fn determinism() -> Outcome {
    let mut tally = Tally::default();
    for seed in 0..10 {
        let (mesh, f) = random_field(&[64, 64], 900 + seed);
        let cons = random_constraints(&mesh, &f, seed);
        let run = |t: usize| {
            let opts = SimplifyOptions { thread_count: Some(t), ..Default::default() };
            let a = simplify_field(&mesh, &f, &cons, &opts).unwrap().order.to_le_bytes();
            let b = persistence_simplify(&mesh, &f, 0.05 * f.range(), &opts).unwrap().simplified.order.to_le_bytes();
            (a, b)
        };
        let base = run(1);
        for t in [2, 4, 8] {
            tally.check(run(t) == base, || format!("seed {seed} threads {t}"));
        }
    }
    tally.outcome(" (threads 1/2/4/8, byte-equal ranks)")
}

fn patch_regression() -> Outcome {
    let (mesh, f) = patch();
    let opts = SimplifyOptions { restore_interior_extrema: false, ..Default::default() };
    let (g, report) = remove_extrema(&mesh, &f, &[PATCH_MAX], &[], &opts).unwrap();
    let exact = g.ranks() == PATCH_OUTPUT.as_slice();
    Outcome::new(exact && report.iterations == vec![3], format!("24 ranks match: {exact}; passes {:?}", report.iterations))
}

fn engine_time(report: &SimplifyReport) -> f64 {
    report.timings.engine()
}

fn output_sensitivity() -> Outcome {
    let (mesh, f) = random_field(&[512, 512], 42);
    let order = compute_order_field(&f);
    let (minima, maxima) = extrema(&mesh, &order);
    let n = f.len() as u64;
    let (gmin, gmax) = (order.vertex_at(0), order.vertex_at(n - 1));
    let mut rng = SplitMix64::new(42);
    let mut tagged: Vec<(u64, usize, bool)> = minima
        .iter()
        .filter(|&&v| v != gmin)
        .map(|&v| (v, true))
        .chain(maxima.iter().filter(|&&v| v != gmax).map(|&v| (v, false)))
        .map(|(v, is_min)| (rng.next_u64(), v, is_min))
        .collect();
    tagged.sort_unstable();
    let opts = SimplifyOptions { thread_count: Some(1), ..Default::default() };
    let mut curve = Vec::new();
    for pct in [10usize, 25, 50, 75, 90, 99] {
        let take = tagged.len() * pct / 100;
        let (mut dmin, mut dmax) = (Vec::new(), Vec::new());
        for &(_, v, is_min) in &tagged[..take] {
            if is_min {
                dmin.push(v);
            } else {
                dmax.push(v);
            }
        }
        // best of three to damp scheduler noise
        let secs = (0..3)
            .map(|_| engine_time(&remove_extrema(&mesh, &order, &dmax, &dmin, &opts).unwrap().1))
            .fold(f64::INFINITY, f64::min);
        curve.push((pct, secs));
    }
    let t10 = curve[0].1;
    let t99 = curve.last().unwrap().1;
    let shown: Vec<String> = curve.iter().map(|(p, s)| format!("{p}%={:.1}ms", s * 1e3)).collect();
    Outcome::new(t10 <= 0.5 * t99, format!("ratio {:.3}; {}", t10 / t99, shown.join(" ")))
}

fn parallel_trend() -> Outcome {
    let start = Instant::now();
    let (mesh, f) = random_field(&[1024, 1024], 7);
    let eps = 0.01 * f.range();
    let time = |t: usize| {
        let opts = SimplifyOptions { thread_count: Some(t), ..Default::default() };
        let r = persistence_simplify(&mesh, &f, eps, &opts).unwrap().simplified.report;
        r.timings.total - r.timings.realize
    };
    let one = time(1);
    let eight = time(8);
    let speedup = one / eight;
    let cores = std::thread::available_parallelism().map_or(1, |n| n.get());
    let total = start.elapsed().as_secs_f64();
    let pass = speedup >= 2.0 && total < 300.0;
    Outcome {
        pass,
        detail: format!("1 thread {one:.2}s, 8 threads {eight:.2}s, speedup {speedup:.2}, {cores} cores available, total {total:.0}s"),
        advisory: cores < 8,
    }
}

fn convergence(passes: &[usize]) -> Outcome {
    let max = passes.iter().copied().max().unwrap_or(0);
    let mean = passes.iter().sum::<usize>() as f64 / passes.len().max(1) as f64;
    let mut hist = vec![0usize; max + 1];
    for &p in passes {
        hist[p] += 1;
    }
    let shown: Vec<String> = hist.iter().enumerate().skip(1).filter(|(_, &c)| c > 0).map(|(p, c)| format!("{p}:{c}")).collect();
    Outcome::new(max <= 8 && mean <= 1.5, format!("{} regions, max {max}, mean {mean:.4}; {}", passes.len(), shown.join(" ")))
}

fn morse() -> Outcome {
    let mut counts = Vec::new();
    let mut ok = true;
    for (name, mesh, chi) in
        [("octahedron", shapes::octahedron(), 2), ("icosahedron", shapes::icosahedron(), 2), ("torus", shapes::torus(8, 6), 0)]
    {
        let mut seen = BTreeSet::new();
        for seed in 0..100 {
            let mut rng = SplitMix64::new(seed);
            let f = ScalarField::new((0..mesh.vertex_count()).map(|_| rng.next_f64()).collect()).unwrap();
            seen.insert(morse_count_check(&mesh, &compute_order_field(&f)).unwrap());
        }
        ok &= seen == BTreeSet::from([chi]);
        counts.push(format!("{name} {seen:?}"));
    }
    Outcome::new(ok, counts.join(", "))
}

fn main() {
    let c = run_corpora();
    let results = vec![
        (1, "constraint exactness", c.exact.outcome(&format!(", {:.1}s", c.exact_secs))),
        (2, "persistence correctness", c.persistence.outcome("")),
        (3, "distance bound", c.bound.outcome(&format!(", worst deviation/height {:.12}", c.worst_height_ratio))),
        (4, "locality", c.locality.outcome("")),
        (5, "determinism", determinism()),
        (6, "patch regression", patch_regression()),
        (7, "idempotence", c.idempotence.outcome("")),
        (8, "output sensitivity", output_sensitivity()),
        (9, "parallel trend", parallel_trend()),
        (10, "convergence", convergence(&c.passes)),
        (11, "morse diagnostic", morse()),
    ];
    let exact_fast = c.exact_secs < 30.0;
    let mut failed = false;
    for (i, name, o) in results {
        let pass = o.pass && (i != 1 || exact_fast);
        let tag = if pass { "PASS" } else { "FAIL" };
        let note = if !pass && o.advisory { " [needs 8 cores; not counted]" } else { "" };
        println!("criterion {i:>2} {tag} {name}: {}{note}", o.detail);
        failed |= !pass && !o.advisory;
    }
    if failed {
        std::process::exit(1);
    }
}
