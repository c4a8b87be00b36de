//! Acceptance checks. Prints one PASS/FAIL line per criterion.
//!
//! The process exits 0 even when a criterion fails so the rest of the test
//! suite stays usable on machines that cannot meet the timing criterion; set
//! `GRIDOPT_ACCEPTANCE_STRICT=1` to turn any FAIL into a non-zero exit.

use std::collections::HashMap;
use std::time::Instant;

use rand::Rng;

use gridopt::algorithm::{Algorithm, Params};
use gridopt::bench::{median, run_seeds, SeedOutcome};
use gridopt::classic::AlgoParams;
use gridopt::dsm::{
    baseline_schedule, brute_force_schedule, check_feasibility, evaluate_cost, evaluate_par,
    generate_dsm_instance, Objective, TariffShape, Weights,
};
use gridopt::heuristic::{deb_order, Candidate, RngStream, RunResult, Termination};
use gridopt::idfpa::{
    annealing_temperature, construct_tour_observed, dfpa_run, evaporate, idfpa_run, CostMatrixState,
    IdfpaParams, TspSearch, C_MIN,
};
use gridopt::parallel::{
    measure_speedup, run_combined, run_independent, run_parallel_ants, run_parallel_eval, ParallelPlan,
    Strategy,
};
use gridopt::tsp::{brute_force_tsp, Tour, TspInstance};

type Criterion = (&'static str, fn() -> Verdict);

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

const SCHEDULE_SOLVERS: [Algorithm; 9] = [
    Algorithm::Ga,
    Algorithm::Ba,
    Algorithm::Fpa,
    Algorithm::Tlbo,
    Algorithm::Fbat,
    Algorithm::Fga,
    Algorithm::Ftlbo,
    Algorithm::Gtlbo,
    Algorithm::Idfpa,
];

/// Parameters spending exactly `evaluations` objective evaluations.
fn budget_params(algo: Algorithm, evaluations: u64) -> Params {
    if algo.is_matrix_based() {
        let p = IdfpaParams::default();
        Params::Idfpa(IdfpaParams {
            iterations: (evaluations / p.m as u64) as usize,
            ..p
        })
    } else {
        Params::Classic(AlgoParams {
            population: 20,
            termination: Termination::iterations(10_000).with_evaluations(evaluations),
            ..AlgoParams::default()
        })
    }
}

fn scheduling_oracle() -> Verdict {
    let instances: Vec<_> = (0..20u64)
        .map(|s| {
            let inst = generate_dsm_instance(4, 6, TariffShape::TwoTier, 1000 + s).unwrap();
            let obj = Objective::new(&inst, Weights::default(), 10.0).unwrap();
            let best = obj.evaluate(&brute_force_schedule(&inst, &obj).unwrap(), &inst).unwrap();
            (inst, best)
        })
        .collect();
    let mut pass = true;
    let mut parts = Vec::new();
    for algo in SCHEDULE_SOLVERS {
        let params = budget_params(algo, 2000);
        let hits = instances
            .iter()
            .enumerate()
            .filter(|(s, (inst, best))| {
                let r = algo.run_schedule(inst, &params, *s as u64).unwrap();
                r.best_value <= best * 1.05
            })
            .count();
        pass &= hits >= 18;
        parts.push(format!("{algo} {hits}/20"));
    }
    verdict(pass, parts.join(", "))
}

fn tsp_oracle() -> Verdict {
    let params = IdfpaParams {
        m: 10,
        iterations: 500,
        ..IdfpaParams::default()
    };
    let (mut hi, mut hd) = (0, 0);
    for i in 0..20u64 {
        let inst = TspInstance::random_euclidean(6 + (i as usize % 4), 100 + i).unwrap();
        let opt = brute_force_tsp(&inst).unwrap().length;
        if (idfpa_run(&inst, &params, i).unwrap().best_value - opt).abs() < 1e-9 {
            hi += 1;
        }
        if (dfpa_run(&inst, &params, i).unwrap().best_value - opt).abs() < 1e-9 {
            hd += 1;
        }
    }
    verdict(hi >= 19 && hd >= 18, format!("idfpa {hi}/20 optimal, dfpa {hd}/20"))
}

/// One-sided binomial tail `P(X >= k)` for `X ~ Bin(n, 1/2)`.
fn sign_test(n: u64, k: u64) -> f64 {
    (k..=n)
        .map(|i| {
            let mut c = 1.0f64;
            for j in 0..i {
                c = c * (n - j) as f64 / (j + 1) as f64;
            }
            c * 0.5f64.powi(n as i32)
        })
        .sum()
}

fn cost_reduction() -> Verdict {
    let inst = generate_dsm_instance(10, 24, TariffShape::TwoTier, 1).unwrap();
    let baseline = evaluate_cost(&baseline_schedule(&inst), &inst).unwrap();
    let seeds: Vec<u64> = (0..30).collect();
    let mut runs: HashMap<Algorithm, Vec<SeedOutcome>> = HashMap::new();
    let mut pass = true;
    let mut parts = Vec::new();
    for algo in Algorithm::ALL {
        let out = run_seeds(algo, &inst, &algo.default_params(), &seeds).unwrap();
        let red = 100.0 * (baseline - median(&out.iter().map(|o| o.cost).collect::<Vec<_>>())) / baseline;
        pass &= red >= 10.0;
        parts.push(format!("{algo} -{red:.1}%"));
        runs.insert(algo, out);
    }
    let hybrids = [
        (Algorithm::Fbat, [Algorithm::Fpa, Algorithm::Ba]),
        (Algorithm::Hfba, [Algorithm::Fpa, Algorithm::Ba]),
        (Algorithm::Fga, [Algorithm::Fpa, Algorithm::Ga]),
        (Algorithm::Ftlbo, [Algorithm::Fpa, Algorithm::Tlbo]),
        (Algorithm::Gtlbo, [Algorithm::Ga, Algorithm::Tlbo]),
    ];
    for (hybrid, parents) in hybrids {
        let h = &runs[&hybrid];
        let hm = median(&h.iter().map(|o| o.value).collect::<Vec<_>>());
        for parent in parents {
            let p = &runs[&parent];
            let pm = median(&p.iter().map(|o| o.value).collect::<Vec<_>>());
            let parent_wins = h.iter().zip(p).filter(|(a, b)| b.value < a.value).count() as u64;
            let hybrid_wins = h.iter().zip(p).filter(|(a, b)| a.value < b.value).count() as u64;
            let pvalue = sign_test(parent_wins + hybrid_wins, parent_wins);
            let ok = hm <= pm && pvalue >= 0.05;
            pass &= ok;
            parts.push(format!(
                "{hybrid} vs {parent} medians {hm:.4}/{pm:.4} wins {hybrid_wins}:{parent_wins} p={pvalue:.3} {}",
                if ok { "ok" } else { "worse" }
            ));
        }
    }
    verdict(pass, parts.join(", "))
}

fn convergence() -> Verdict {
    let inst = TspInstance::random_euclidean(50, 50).unwrap();
    let params = IdfpaParams::default();
    let a: Vec<f64> = (0..20).map(|s| idfpa_run(&inst, &params, s).unwrap().best_value).collect();
    let b: Vec<f64> = (0..20).map(|s| dfpa_run(&inst, &params, s).unwrap().best_value).collect();
    let (ma, mb) = (median(&a), median(&b));
    verdict(ma <= mb, format!("idfpa median {ma:.1} vs dfpa {mb:.1} at {} evaluations", params.m * params.iterations))
}

fn bitwise_equal(a: &RunResult<Tour>, b: &RunResult<Tour>) -> bool {
    a.best_value.to_bits() == b.best_value.to_bits()
        && a.trajectory.len() == b.trajectory.len()
        && a.trajectory.iter().zip(&b.trajectory).all(|(x, y)| x.to_bits() == y.to_bits())
}

fn parallel_correctness() -> Verdict {
    let inst = TspInstance::random_euclidean(40, 5).unwrap();
    let params = IdfpaParams {
        iterations: 60,
        ..IdfpaParams::default()
    };
    let workers = 4;
    let mut failures = Vec::new();

    let seeds: Vec<u64> = (11..11 + workers as u64).collect();
    let plan = ParallelPlan::new(Strategy::Independent, workers);
    let par = run_independent(|p, s| idfpa_run(&inst, p, s), &plan, &vec![params.clone(); workers], &seeds).unwrap();
    let mut serial: Option<RunResult<Tour>> = None;
    for &s in &seeds {
        let r = idfpa_run(&inst, &params, s).unwrap();
        if serial.as_ref().is_none_or(|b| r.best_value < b.best_value) {
            serial = Some(r);
        }
    }
    if !bitwise_equal(&par, &serial.unwrap()) {
        failures.push("independent");
    }

    let reference = idfpa_run(&inst, &params, 3).unwrap();
    let plan = ParallelPlan::new(Strategy::ParallelAnts, workers);
    if !bitwise_equal(&run_parallel_ants(Algorithm::Idfpa, &inst, &plan, &params, 3).unwrap(), &reference) {
        failures.push("parallel_ants");
    }
    let plan = ParallelPlan::new(Strategy::Combined, workers);
    if !bitwise_equal(&run_combined(Algorithm::Idfpa, &inst, &plan, &params, 3).unwrap(), &reference) {
        failures.push("combined");
    }

    let household = generate_dsm_instance(10, 24, TariffShape::TwoTier, 1).unwrap();
    let obj = Objective::new(&household, Weights::default(), 10.0).unwrap();
    let batch: Vec<_> = (0..40u64)
        .map(|s| {
            Algorithm::Fpa
                .run_schedule(&household, &budget_params(Algorithm::Fpa, 200), s)
                .unwrap()
                .best_solution
        })
        .collect();
    let plan = ParallelPlan::new(Strategy::ParallelEval, workers);
    let par = run_parallel_eval(&household, &plan, &obj, &batch).unwrap();
    let same = batch
        .iter()
        .zip(&par)
        .all(|(s, e)| obj.evaluate(s, &household).unwrap().to_bits() == e.value.to_bits());
    if !same {
        failures.push("parallel_eval");
    }

    if failures.is_empty() {
        verdict(true, "independent, parallel_ants, parallel_eval, combined match their serial references")
    } else {
        verdict(false, format!("mismatch: {}", failures.join(", ")))
    }
}

fn speedup() -> Verdict {
    let inst = TspInstance::random_euclidean(300, 300).unwrap();
    let params = IdfpaParams::default();
    let workers = 4;
    let plan = ParallelPlan::new(Strategy::ParallelAnts, workers);
    let report = measure_speedup(
        workers,
        || Ok(idfpa_run(&inst, &params, 1)?.best_value),
        || Ok(run_parallel_ants(Algorithm::Idfpa, &inst, &plan, &params, 1)?.best_value),
    )
    .unwrap();
    let identities = report.speedup == report.serial_seconds / report.parallel_seconds
        && report.efficiency == report.speedup / workers as f64;
    let cpus = std::thread::available_parallelism().map_or(1, |n| n.get());
    verdict(
        report.speedup > 1.5 && report.quality_ratio <= 1.02 && identities,
        format!(
            "speedup {:.2} (serial {:.2}s, parallel {:.2}s), efficiency {:.2}, quality {:.4}, identities {}, {cpus} cpu(s) available",
            report.speedup,
            report.serial_seconds,
            report.parallel_seconds,
            report.efficiency,
            report.quality_ratio,
            if identities { "hold" } else { "broken" }
        ),
    )
}

fn invariants() -> Verdict {
    let mut failures: Vec<String> = Vec::new();
    let mut check = |ok: bool, what: &str| {
        if !ok {
            failures.push(what.to_string());
        }
    };

    // construction probabilities and permutations
    for seed in 0..30u64 {
        let n = 5 + (seed as usize % 20);
        let inst = TspInstance::random_euclidean(n, seed).unwrap();
        let params = IdfpaParams {
            m: 5,
            iterations: 5,
            ..IdfpaParams::default()
        };
        let mut search = TspSearch::new(&inst, &params, seed).unwrap();
        while !search.finished() {
            let tours = search.construct().unwrap();
            check(tours.iter().all(|t| t.is_permutation_of(n)), "tour permutation");
            search.absorb(tours).unwrap();
        }
        let mut worst: f64 = 0.0;
        let mut rng = RngStream::new(seed, 500);
        let tour = construct_tour_observed(search.matrix(), &inst, &params, &mut rng, &mut |p| {
            worst = worst.max((p.iter().sum::<f64>() - 1.0).abs());
        })
        .unwrap();
        check(worst <= 1e-9, "probability normalization");
        check(tour.is_permutation_of(n), "tour permutation");
        let r = search.finish();
        check(r.trajectory.windows(2).all(|w| w[1] <= w[0]), "idfpa trajectory monotone");
    }

    // schedules from every solver: category feasible, monotone trajectory
    for seed in 0..5u64 {
        let inst = generate_dsm_instance(8, 24, TariffShape::TwoTier, seed).unwrap();
        for algo in Algorithm::ALL {
            let r = algo.run_schedule(&inst, &budget_params(algo, 400), seed).unwrap();
            let category_ok = check_feasibility(&r.best_solution, &inst)
                .unwrap()
                .iter()
                .all(|v| v.is_capacity());
            check(category_ok, &format!("{algo} category feasibility"));
            check(r.trajectory.windows(2).all(|w| w[1] <= w[0]), &format!("{algo} trajectory monotone"));
        }
    }

    // evaporation
    let inst = TspInstance::random_euclidean(8, 1).unwrap();
    let start = CostMatrixState::new(&inst);
    let mut state = start.clone();
    for k in 1..=200 {
        evaporate(&mut state, 0.1).unwrap();
        let ok = (0..8).all(|i| {
            (0..8).filter(|&j| j != i).all(|j| {
                let want = (start.get(i, j) * 0.9f64.powi(k)).max(C_MIN);
                (state.get(i, j) - want).abs() <= 1e-12 * want.max(1.0)
            })
        });
        check(ok, "evaporation geometric decay with floor");
    }

    // annealing
    for n in [1usize, 10, 500] {
        let t: Vec<f64> = (1..=n).map(|c| annealing_temperature(c, n, 1.0, 1.0)).collect();
        check(t.windows(2).all(|w| w[1] < w[0]), "annealing strictly decreasing");
    }

    // Deb order on 50 candidates
    let mut rng = RngStream::new(77, 0);
    let cands: Vec<Candidate> = (0..50)
        .map(|_| {
            let violations = if rng.random_bool(0.4) { rng.random_range(1..4) } else { 0 };
            Candidate::new(rng.random_range(0..8) as f64 * 0.5, violations)
        })
        .collect();
    let le = |a: &Candidate, b: &Candidate| deb_order(a, b).is_le();
    let transitive = cands.iter().all(|a| {
        cands
            .iter()
            .all(|b| cands.iter().all(|c| !(le(a, b) && le(b, c)) || le(a, c)))
    });
    check(transitive, "deb transitivity");

    // PAR scale invariance and tariff-scaling argmin invariance
    for seed in 0..10u64 {
        let inst = generate_dsm_instance(4, 6, TariffShape::Random, seed).unwrap();
        let base = baseline_schedule(&inst);
        let mut heavier = inst.clone();
        heavier.appliances.iter_mut().for_each(|a| a.power *= 3.7);
        let (p1, p2) = (evaluate_par(&base, &inst).unwrap(), evaluate_par(&base, &heavier).unwrap());
        check((p1 - p2).abs() <= 1e-12 * p1, "PAR scale invariance");

        let mut pricier = inst.clone();
        pricier.tariff.prices.iter_mut().for_each(|p| *p *= 5.3);
        let argmin = |i: &gridopt::dsm::DsmInstance| {
            let obj = Objective::new(i, Weights::cost_only(), 10.0).unwrap();
            brute_force_schedule(i, &obj).unwrap()
        };
        let (a, b) = (argmin(&inst), argmin(&pricier));
        let (ca, cb) = (evaluate_cost(&a, &inst).unwrap(), evaluate_cost(&b, &inst).unwrap());
        check((ca - cb).abs() <= 1e-9 * ca, "tariff scaling argmin invariance");
    }

    failures.dedup();
    if failures.is_empty() {
        verdict(true, "normalization, permutations, category feasibility, evaporation, annealing, deb order, monotonicity, PAR scaling, tariff scaling")
    } else {
        verdict(false, failures.join(", "))
    }
}

fn main() {
    let criteria: [Criterion; 7] = [
        ("oracle equivalence, scheduling", scheduling_oracle),
        ("oracle equivalence, tsp", tsp_oracle),
        ("directional cost reduction", cost_reduction),
        ("idfpa vs dfpa convergence", convergence),
        ("parallel correctness", parallel_correctness),
        ("parallel speedup", speedup),
        ("invariant suites", invariants),
    ];
    let mut failed = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let v = run();
        failed += usize::from(!v.pass);
        println!(
            "criterion {} {}: {} ({:.1}s) {}",
            k + 1,
            name,
            if v.pass { "PASS" } else { "FAIL" },
            t.elapsed().as_secs_f64(),
            v.detail
        );
    }
    println!("acceptance: {}/{} criteria pass", criteria.len() - failed, criteria.len());
    if failed > 0 && std::env::var("GRIDOPT_ACCEPTANCE_STRICT").is_ok_and(|v| v == "1") {
        std::process::exit(1);
    }
}
