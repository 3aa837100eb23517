//! Acceptance suite: one test per criterion, each printing a PASS/FAIL line
//! per check and an overall line. Run with
//! `cargo test --release --test acceptance -- --nocapture --test-threads 1`.

use std::f64::consts::{PI, SQRT_2};
use std::time::Instant;
use tripop::leakage::{
    delta_p2_at_t0, early_estimate_for_condition, measure_deficit, measure_early_difference,
    two_level_deficit, two_level_deficit_estimate, two_level_populations, TwoLevelParams,
};
use tripop::propagator::compare_trace;
use tripop::report::kick_report;
use tripop::{
    build_dressed_basis, classify_cases, condition_from_odd_pair, enumerate_conditions, integrate,
    populations_closed_form, populations_general, CouplingRatios, IntegratorConfig, LevelEnergies,
    OddPair, Pulse, TransferCondition,
};

struct Criterion {
    id: &'static str,
    title: &'static str,
    results: Vec<bool>,
}

impl Criterion {
    fn new(id: &'static str, title: &'static str) -> Self {
        println!("{id}: {title}");
        Self {
            id,
            title,
            results: Vec::new(),
        }
    }

    fn check(&mut self, ok: bool, label: impl AsRef<str>) {
        println!("  {} {}", if ok { "PASS" } else { "FAIL" }, label.as_ref());
        self.results.push(ok);
    }

    fn finish(self) {
        let ok = self.results.iter().all(|&r| r);
        println!(
            "{} {}: {}",
            if ok { "PASS" } else { "FAIL" },
            self.id,
            self.title
        );
        assert!(ok, "{} failed", self.id);
    }
}

fn sci(values: &[f64]) -> String {
    let parts: Vec<String> = values.iter().map(|v| format!("{v:.3e}")).collect();
    format!("[{}]", parts.join(", "))
}

fn round3(x: f64) -> f64 {
    (x * 1000.0).round() / 1000.0
}

fn distinct_families(max_product: i64) -> Vec<TransferCondition> {
    enumerate_conditions(max_product)
        .into_iter()
        .filter(|c| c.sign == 1)
        .collect()
}

/// (n1, n2, n_e, n_o, n_o', |A(t0)|, |α|), upper signs of the published table.
const KNOWN_CONDITIONS: [(i64, i64, i64, i64, i64, f64, f64); 17] = [
    (1, 5, 2, -1, 3, 1.656, 2.530),
    (5, 1, 2, 3, -1, 1.656, 2.530),
    (3, 3, 2, 1, 1, 2.221, 0.000),
    (1, 11, 4, -3, 7, 2.456, 4.264),
    (11, 1, 4, 7, -3, 2.456, 4.264),
    (1, 17, 6, -5, 11, 3.053, 5.488),
    (17, 1, 6, 11, -5, 3.053, 5.488),
    (1, 23, 8, -7, 15, 3.551, 6.487),
    (23, 1, 8, 15, -7, 3.551, 6.487),
    (3, 9, 4, -1, 5, 3.848, 1.633),
    (9, 3, 4, 5, -1, 3.848, 1.633),
    (1, 29, 10, -9, 19, 3.988, 7.353),
    (29, 1, 10, 19, -9, 3.988, 7.353),
    (1, 35, 12, -11, 23, 4.381, 8.128),
    (5, 7, 4, 1, 3, 4.381, 0.478),
    (7, 5, 4, 3, 1, 4.381, 0.478),
    (35, 1, 12, 23, -11, 4.381, 8.128),
];

#[test]
fn ac01_table_reproduction() {
    let mut c = Criterion::new("AC1", "transfer condition table");
    let start = Instant::now();
    let all = enumerate_conditions(35);
    let classes: Vec<_> = all.iter().map(classify_cases).collect();
    let elapsed = start.elapsed().as_secs_f64();

    let rows = distinct_families(35);
    c.check(
        rows.len() == 17,
        format!("{} distinct (n1, n2) rows (table has 17)", rows.len()),
    );
    c.check(
        all.len() == 34,
        format!("{} sign-resolved conditions", all.len()),
    );
    for (row, want) in rows.iter().zip(KNOWN_CONDITIONS.iter()) {
        let (n1, n2, ne, no, nop, a, alpha) = *want;
        let ok = (row.n1, row.n2) == (n1, n2)
            && (row.pair.n_e(), row.pair.n_o(), row.pair.n_op()) == (ne, no, nop)
            && round3(row.action_t0.abs()) == a
            && round3(row.alpha.abs()) == alpha;
        c.check(
            ok,
            format!(
                "({n1},{n2}) A = {:.3} alpha = {:.3} (table {a:.3}, {alpha:.3})",
                row.action_t0, row.alpha
            ),
        );
    }
    let identities = all
        .iter()
        .zip(&classes)
        .all(|(cond, k)| cond.integer_identities_hold() && k.identities_hold(cond.n1 * cond.n2));
    c.check(
        identities,
        "k/k' identities and parities hold exactly for all 34 conditions",
    );
    let recover = all
        .iter()
        .zip(&classes)
        .all(|(cond, k)| k.recovered_n().iter().all(|&n| n == (cond.n1, cond.n2)));
    c.check(recover, "every case recovers (n1, n2)");
    c.check(elapsed < 1.0, format!("runtime {elapsed:.2e} s < 1 s"));
    c.finish();
}

#[test]
fn ac02_complete_transfer_analytic() {
    let mut c = Criterion::new("AC2", "complete transfer from the closed form");
    let mut worst_t0: f64 = 0.0;
    let mut worst_match: f64 = 0.0;
    for cond in enumerate_conditions(35) {
        let p = populations_closed_form(&cond, cond.action_t0);
        worst_t0 = worst_t0
            .max((p.p2 - 1.0).abs())
            .max(p.p1.abs())
            .max(p.p3.abs());
        let basis = build_dressed_basis(&cond.ratios()).unwrap();
        for i in 0..1000 {
            let a = -2.0 * cond.action_t0 + 4.0 * cond.action_t0 * i as f64 / 999.0;
            let d = populations_closed_form(&cond, a).max_abs_diff(&populations_general(&basis, a));
            worst_match = worst_match.max(d);
        }
    }
    c.check(
        worst_t0 <= 1e-12,
        format!("max |P - (0,1,0)| at A(t0) = {worst_t0:.2e} <= 1e-12"),
    );
    c.check(
        worst_match <= 1e-10,
        format!("closed form vs general, 1000 samples each: {worst_match:.2e} <= 1e-10"),
    );
    c.finish();
}

#[test]
fn ac03_analytic_vs_ode() {
    let mut c = Criterion::new("AC3", "RK4 oracle for three family drives");
    let r15 = (0.4f64).sqrt();
    let r35 = (2.0f64 / 35.0).sqrt();
    let sets = [
        ("(3,3)", 0.0, PI / SQRT_2),
        ("(1,5)", -4.0 * r15, PI / (3.0 * r15)),
        ("(1,35)", 34.0 * r35, PI / (3.0 * r35)),
    ];
    let start = Instant::now();
    for (name, alpha, area) in sets {
        let pulse = Pulse::harmonic(area, 1.0).unwrap();
        let cmp = compare_trace(
            &CouplingRatios::new(alpha, 1.0),
            &pulse,
            2.0 * PI,
            &IntegratorConfig::default(),
        )
        .unwrap();
        c.check(
            cmp.max_deviation < 1e-6,
            format!(
                "{name} (alpha = {alpha:.3}, A = {area:.3}): max deviation {:.2e} < 1e-6",
                cmp.max_deviation
            ),
        );
        c.check(
            cmp.trace.norm_drift < 1e-8,
            format!("{name}: norm drift {:.2e} < 1e-8", cmp.trace.norm_drift),
        );
        let quarter = cmp.trace.samples[cmp.trace.len() / 4];
        let three = cmp.trace.samples[3 * (cmp.trace.len() / 4)];
        c.check(
            (quarter.p2 - 1.0).abs() < 1e-6 && (three.p2 - 1.0).abs() < 1e-6,
            format!(
                "{name}: P2(T/4) = {:.9}, P2(3T/4) = {:.9}",
                quarter.p2, three.p2
            ),
        );
    }
    let elapsed = start.elapsed().as_secs_f64();
    c.check(elapsed < 10.0, format!("runtime {elapsed:.2} s < 10 s"));
    c.finish();
}

#[test]
fn ac04_untuned_negative_control() {
    let mut c = Criterion::new("AC4", "alpha = 0, beta = 1 does not transfer");
    let pulse = Pulse::harmonic(1.5, 1.0).unwrap();
    let trace = integrate(
        &CouplingRatios::new(2.0, 1.0),
        &LevelEnergies::degenerate(),
        &pulse,
        2.0 * PI,
        &IntegratorConfig::default(),
    )
    .unwrap();
    let max_p2 = trace.max_population(2);
    c.check(
        max_p2 < 0.999,
        format!("max P2 over one period = {max_p2:.6} < 0.999"),
    );

    // excursions of P1 below 1e-3, and the local minima of P1
    let p1: Vec<f64> = trace.samples.iter().map(|s| s.p1).collect();
    let mut excursions = 0;
    let mut below = false;
    for &p in &p1 {
        if p < 1e-3 && !below {
            excursions += 1;
        }
        below = p < 1e-3;
    }
    let minima: Vec<f64> = p1
        .windows(3)
        .filter(|w| w[1] < w[0] && w[1] <= w[2])
        .map(|w| w[1])
        .collect();
    let deepest = minima.iter().cloned().fold(f64::INFINITY, f64::min);
    c.check(
        excursions >= 2,
        format!(
            "P1 drops below 1e-3 {excursions} times per period (needs 2); {} local minima, deepest {deepest:.4}",
            minima.len()
        ),
    );
    c.finish();
}

#[test]
fn ac05_p3_ceiling() {
    let mut c = Criterion::new("AC5", "P3 ceiling 2 n1 n2 / (n1 + n2)^2");
    let mut worst: f64 = 0.0;
    let mut equal_ok = true;
    for cond in distinct_families(35) {
        let basis = build_dressed_basis(&cond.ratios()).unwrap();
        let n = 100_000;
        let max_p3 = (0..=n)
            .map(|i| populations_general(&basis, cond.action_t0 * i as f64 / n as f64).p3)
            .fold(f64::NEG_INFINITY, f64::max);
        let want = tripop::p3_max(&cond);
        worst = worst.max((max_p3 - want).abs());
        if cond.n1 == cond.n2 {
            equal_ok &= want == 0.5 && (max_p3 - 0.5).abs() < 1e-6;
            c.check(
                equal_ok,
                format!(
                    "({},{}) ceiling {want} and scan max {max_p3:.9}",
                    cond.n1, cond.n2
                ),
            );
        }
    }
    c.check(
        worst <= 1e-6,
        format!("max |scan - ceiling| over 17 families = {worst:.2e} <= 1e-6"),
    );
    c.finish();
}

fn slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let (sx, sy) = points
        .iter()
        .fold((0.0, 0.0), |(a, b), (x, y)| (a + x, b + y));
    let (mx, my) = (sx / n, sy / n);
    let num: f64 = points.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let den: f64 = points.iter().map(|(x, _)| (x - mx) * (x - mx)).sum();
    num / den
}

#[test]
fn ac06_quartic_flatness() {
    let mut c = Criterion::new("AC6", "1 - P2 ~ |t - t0|^4 near t0 for (3,3)");
    let cond = condition_from_odd_pair(OddPair::new(1, 1).unwrap(), 1, 1).unwrap();
    let pulse = tripop::harmonic_for_condition(&cond, 1.0).unwrap();
    let t0 = PI / 2.0;

    let mut analytic = Vec::new();
    for i in 0..=40 {
        let tau = 0.01 * 10f64.powf(i as f64 / 40.0);
        for t in [t0 - tau, t0 + tau] {
            let p = populations_closed_form(&cond, pulse.area(t).unwrap().a);
            analytic.push((tau.ln(), (1.0 - p.p2).ln()));
        }
    }
    let s = slope(&analytic);
    c.check(
        (s - 4.0).abs() <= 0.1,
        format!("closed-form slope {s:.4} = 4.0 +- 0.1"),
    );

    let cfg = IntegratorConfig {
        record_every: 1,
        ..Default::default()
    };
    let trace = integrate(
        &cond.ratios(),
        &LevelEnergies::degenerate(),
        &pulse,
        t0 + 0.1,
        &cfg,
    )
    .unwrap();
    let numeric: Vec<(f64, f64)> = trace
        .times
        .iter()
        .zip(&trace.samples)
        .filter_map(|(&t, p)| {
            let tau = (t - t0).abs();
            (0.01..=0.1)
                .contains(&tau)
                .then(|| (tau.ln(), (1.0 - p.p2).ln()))
        })
        .collect();
    let s = slope(&numeric);
    c.check(
        (s - 4.0).abs() <= 0.1,
        format!("RK4 slope {s:.4} = 4.0 +- 0.1 ({} samples)", numeric.len()),
    );
    c.finish();
}

#[test]
fn ac07_kick_limit() {
    let mut c = Criterion::new("AC7", "Gaussian kicks converge to the ideal kick");
    let widths = [0.1, 0.05, 0.025];
    let report = kick_report(
        0.0,
        1.0,
        PI / SQRT_2,
        &widths,
        (1.0, 0.5),
        &IntegratorConfig::default(),
    )
    .unwrap();
    let p2: Vec<f64> = report
        .rows
        .iter()
        .map(|r| match r[2] {
            tripop::report::Cell::Float(v) => v,
            _ => unreachable!(),
        })
        .collect();
    c.check(
        (p2[0] - 1.0).abs() < 1e-12,
        format!("ideal kick P2 = {}", p2[0]),
    );
    for (w, p) in widths.iter().zip(&p2[1..]) {
        println!("    width {w}: P2 = {p:.8}, deficit {:.3e}", 1.0 - p);
    }
    c.check(
        p2[1] < p2[2] && p2[2] < p2[3] && p2[3] <= 1.0,
        "P2 increases monotonically toward 1",
    );
    c.check(
        p2[3] > 0.999,
        format!("width 0.025: P2 = {:.6} > 0.999", p2[3]),
    );
    c.finish();
}

/// splitmix64 mapped to [0, 1).
struct Draws(u64);
impl Draws {
    fn next(&mut self) -> f64 {
        self.0 = self.0.wrapping_add(0x9E3779B97F4A7C15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
        z ^= z >> 31;
        (z >> 11) as f64 / (1u64 << 53) as f64
    }
}

#[test]
fn ac08_two_level_suite() {
    let mut c = Criterion::new("AC8", "two-level reference");
    let mut worst: f64 = 0.0;
    for i in 0..2000 {
        let a = -10.0 + 20.0 * i as f64 / 1999.0;
        let eps = 0.37 * (i % 7) as f64 - 1.0;
        let (p1, p2) = two_level_populations(&TwoLevelParams {
            eps1: eps,
            eps2: eps,
            action: a,
        });
        worst = worst
            .max((p2 - a.sin().powi(2)).abs())
            .max((p1 + p2 - 1.0).abs());
    }
    c.check(
        worst <= 1e-12,
        format!("eps1 = eps2: max |P2 - sin^2 A| = {worst:.2e} <= 1e-12"),
    );

    let mut rng = Draws(2024);
    let mut violations = 0;
    for _ in 0..200 {
        let p = TwoLevelParams {
            eps1: 10.0 * rng.next() - 5.0,
            eps2: 10.0 * rng.next() - 5.0,
            action: 40.0 * rng.next() - 20.0,
        };
        let (_, p2) = two_level_populations(&p);
        if p2 > p.p2_bound() + 1e-12 {
            violations += 1;
        }
    }
    c.check(
        violations == 0,
        format!("bound holds for 200 random draws ({violations} violations)"),
    );

    let p = TwoLevelParams {
        eps1: 0.0,
        eps2: 2.0,
        action: 0.0,
    };
    let n = 1_000_000;
    let max_p2 = (0..=n)
        .map(|i| {
            two_level_populations(&TwoLevelParams {
                action: 3.0 * i as f64 / n as f64,
                ..p
            })
            .1
        })
        .fold(0.0, f64::max);
    c.check(
        (max_p2 - 0.5).abs() <= 1e-9,
        format!("eps2 - eps1 = 2: dense-sweep max P2 = {max_p2:.12} (bound 0.5)"),
    );
    c.finish();
}

#[test]
fn ac09_leakage_trends() {
    let mut c = Criterion::new("AC9", "leakage trends and perturbative estimates");
    let cfg = IntegratorConfig::default();
    let c15 = condition_from_odd_pair(OddPair::new(-1, 3).unwrap(), 1, 1).unwrap();
    let c33 = condition_from_odd_pair(OddPair::new(1, 1).unwrap(), 1, 1).unwrap();

    let ray = [0.0025, 0.005, 0.01, 0.02, 0.04, 0.08];
    let deficits: Vec<f64> = ray
        .iter()
        .map(|&r| measure_deficit(&c15, 1.0, r, 0.5 * r, &cfg).unwrap())
        .collect();
    let monotone = deficits.windows(2).all(|w| w[1] > w[0]) && deficits[0] > 0.0;
    c.check(
        monotone,
        format!(
            "(1,5) deficit along omega13 = omega12/2 ray: {}",
            sci(&deficits)
        ),
    );

    for (name, cond) in [("(1,5)", &c15), ("(3,3)", &c33)] {
        let base = measure_deficit(cond, 1.0, 0.05, 0.02, &cfg).unwrap();
        let doubled = measure_deficit(cond, 2.0, 0.05, 0.02, &cfg).unwrap();
        c.check(
            doubled < base,
            format!("{name} omega doubled at fixed splittings: {base:.3e} -> {doubled:.3e}"),
        );
    }

    // early-time flatness of the measured difference divided by t^4
    let omega12 = 0.1;
    let ratios: Vec<f64> = [0.05, 0.1, 0.15, 0.2]
        .iter()
        .map(|&t| measure_early_difference(&c15, 1.0, omega12, 0.0, t, &cfg).unwrap() / t.powi(4))
        .collect();
    let (lo, hi) = ratios
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &r| {
            (a.min(r), b.max(r))
        });
    let spread = (hi - lo) / lo.abs().min(hi.abs());
    c.check(
        spread <= 0.10,
        format!(
            "(1,5) measured dP2/t^4 over omega t in [0.05, 0.2]: {}, spread {:.1}% <= 10%",
            sci(&ratios),
            100.0 * spread
        ),
    );

    // estimate bands
    let t = 0.5;
    let est = early_estimate_for_condition(&c33, 1.0, 0.01, 0.02, t).delta_p2;
    let meas = measure_early_difference(&c33, 1.0, 0.01, 0.02, t, &cfg).unwrap();
    c.check(
        (est - meas).abs() <= 0.25 * meas.abs(),
        format!("(3,3) early estimate at t = 0.5: {est:.3e} vs measured {meas:.3e} (25% band)"),
    );
    let est = early_estimate_for_condition(&c15, 1.0, 0.1, 0.0, 0.05).delta_p2;
    let meas = measure_early_difference(&c15, 1.0, 0.1, 0.0, 0.05, &cfg).unwrap();
    c.check(
        (est - meas).abs() <= 0.25 * meas.abs(),
        format!("(1,5) early estimate at t = 0.05: {est:.3e} vs measured {meas:.3e} (25% band)"),
    );

    let est = delta_p2_at_t0(&c15, 0.01, 0.0).delta_p2;
    let meas = measure_deficit(&c15, 1.0, 0.01, 0.0, &cfg).unwrap();
    let factor = (est / meas).abs().max((meas / est).abs());
    c.check(
        factor <= 3.0 && est.signum() == meas.signum(),
        format!("(1,5) estimate at t0, omega12/omega = 0.01: {est:.3e} vs measured {meas:.3e} (factor {factor:.3e}, band 3)"),
    );

    let r = 0.01;
    let est = two_level_deficit_estimate(r);
    let meas = two_level_deficit(r, &cfg).unwrap();
    let factor = (est / meas).max(meas / est);
    c.check(
        factor <= 2.0,
        format!("two-level deficit at t0, omega12/omega = 0.01: estimate {est:.3e} vs measured {meas:.3e} (factor {factor:.2}, band 2)"),
    );
    c.finish();
}

#[test]
fn ac10_convergence_order() {
    let mut c = Criterion::new("AC10", "RK4 convergence order on the (3,3) drive");
    let pulse = Pulse::harmonic(PI / SQRT_2, 1.0).unwrap();
    let ratios = CouplingRatios::new(0.0, 1.0);
    let dev = |steps| {
        compare_trace(
            &ratios,
            &pulse,
            2.0 * PI,
            &IntegratorConfig::with_steps_per_period(steps),
        )
        .unwrap()
        .max_deviation
    };
    let (coarse, fine) = (dev(400), dev(800));
    let ratio = coarse / fine;
    c.check(
        (12.0..=20.0).contains(&ratio),
        format!(
            "deviation {coarse:.3e} (400 steps) / {fine:.3e} (800 steps) = {ratio:.2} in [12, 20]"
        ),
    );
    c.finish();
}
