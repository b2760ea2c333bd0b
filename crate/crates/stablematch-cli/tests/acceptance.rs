//! Release acceptance gate.
//!
//! One test per numbered release criterion. Every test prints exactly one
//! line of the form `criterion N: PASS — …` or `criterion N: FAIL — …`
//! carrying the measured values, then asserts. Run with
//! `cargo test --test acceptance -- --nocapture` to see all ten lines;
//! failing criteria surface their line in the default report too.
//!
//! Criteria 3, 7, and 8 fail as of this writing. They encode external
//! reference targets that the engine, run faithfully, does not reproduce:
//! the failure lines carry the measured values so the gap is visible, and
//! the project notes discuss each one. Do not silence them — they are red
//! on purpose.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use stablematch::engines::{doctor_da, two_step};
use stablematch::experiments::{
    aggregate, compare_policies, sweep_k, Arm, Parallelism, SweepConfig,
};
use stablematch::fixtures;
use stablematch::market::{Arrangement, Market, Matching};
use stablematch::prefgen::GenParams;
use stablematch::stability::{
    audit_capacity_raise, blocking_pairs, is_adequate, stable_matchings_bruteforce,
};
use stablematch::theory::{
    common_market, global_adequacy_enumerate, monotone_degradation_check, oracle_grid,
};
use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

fn report(n: usize, pass: bool, detail: &str) {
    let verdict = if pass { "PASS" } else { "FAIL" };
    println!("criterion {n}: {verdict} — {detail}");
    assert!(pass, "criterion {n}: {verdict} — {detail}");
}

/// Raise every doctor's interview capacity by an independent 0..=max_bump.
fn raise_kappa<R: Rng>(rng: &mut R, base: &Arrangement, max_bump: usize) -> Arrangement {
    let mut raised = base.clone();
    for kappa in raised.kappa.iter_mut() {
        *kappa += rng.gen_range(0..=max_bump);
    }
    raised
}

fn scratch_dir(name: &str) -> PathBuf {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join(name);
    fs::create_dir_all(&dir).expect("scratch dir");
    dir
}

#[test]
fn criterion_01_worked_example_reproduced_exactly() {
    let started = Instant::now();
    let market = fixtures::demo_market();
    let (base_arr, raised_arr) = fixtures::demo_arrangements();

    let base = two_step(&market, &base_arr);
    let raised = two_step(&market, &raised_arr);
    let raised_report = blocking_pairs(&market, &raised.matching);
    let elapsed = started.elapsed();

    let base_interviews: Vec<Vec<usize>> =
        (0..4).map(|d| base.interviews.of_doctor(d).to_vec()).collect();
    let raised_interviews: Vec<Vec<usize>> =
        (0..4).map(|d| raised.interviews.of_doctor(d).to_vec()).collect();

    let interviews_ok = base_interviews == vec![vec![0], vec![1, 2], vec![2], vec![3]]
        && raised_interviews == vec![vec![0, 1], vec![2, 3], vec![2], vec![3]];
    let matchings_ok = base.matching.doctor_assignments()
        == [Some(0), Some(1), Some(2), Some(3)]
        && raised.matching.doctor_assignments() == [Some(0), Some(2), None, Some(3)];
    let stability_ok = blocking_pairs(&market, &base.matching).is_stable()
        && raised_report.pairs == vec![(1, 1), (2, 1), (3, 1)];
    let fast_enough = elapsed < Duration::from_millis(10);

    report(
        1,
        interviews_ok && matchings_ok && stability_ok && fast_enough,
        &format!(
            "four-by-four example reproduces both interview rounds and both final matchings \
             exactly; the raised-capacity outcome is reported unstable with blocking pairs \
             (1,1),(2,1),(3,1); {elapsed:?} elapsed (limit 10ms)"
        ),
    );
}

#[test]
fn criterion_02_wider_doctor_caps_never_help_doctors() {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0xACC2);
    let markets = 1000usize;
    let mut adequate_starts = 0usize;
    let mut raises = 0usize;
    let mut doctors_better_off = 0usize;

    for _ in 0..markets {
        let market = fixtures::random_market(&mut rng, 8);
        for l in 1..=8 {
            for k in 1..=8 {
                let base = Arrangement::homogeneous(l, k, &market);
                if !is_adequate(&market, &base) {
                    continue;
                }
                adequate_starts += 1;
                for _ in 0..3 {
                    let raised = raise_kappa(&mut rng, &base, 2);
                    raises += 1;
                    let audit = audit_capacity_raise(&market, &base, &raised);
                    doctors_better_off += audit.doctors_better_off;
                }
            }
        }
    }
    let elapsed = started.elapsed();

    report(
        2,
        doctors_better_off == 0 && elapsed < Duration::from_secs(60),
        &format!(
            "{markets} random markets up to 8x8, {adequate_starts} adequate uniform starting \
             capacities, {raises} sampled doctor-capacity raises: {doctors_better_off} doctors \
             strictly preferred the raised outcome (must be 0); {:.1}s elapsed (limit 60s)",
            elapsed.as_secs_f64()
        ),
    );
}

#[test]
fn criterion_03_paired_run_interview_audit() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xACC3);
    let mut total_runs = 0usize;
    let mut rejected_prior = 0usize;
    let mut adequate_runs = 0usize;
    let mut order_violations = 0usize;
    let mut preferred_new_interviews = 0usize;
    let mut preferred_new_matched_only = 0usize;
    let mut runs_with_preferred_new = 0usize;

    while (total_runs < 1000 || adequate_runs < 1000) && total_runs < 100_000 {
        let market = fixtures::random_market(&mut rng, 6);
        let base = fixtures::random_arrangement(&mut rng, &market, 4);
        let raised = raise_kappa(&mut rng, &base, 2);
        let audit = audit_capacity_raise(&market, &base, &raised);
        total_runs += 1;
        rejected_prior += audit.rejected_prior_interviews.len();
        if is_adequate(&market, &base) {
            adequate_runs += 1;
            order_violations += audit.dropped_better_partner.len();
            preferred_new_interviews += audit.upgraded_new_interviews.len();
            preferred_new_matched_only += audit.upgraded_new_interviews_matched_only.len();
            if !audit.upgraded_new_interviews.is_empty() {
                runs_with_preferred_new += 1;
            }
        }
    }
    assert!(
        total_runs >= 1000 && adequate_runs >= 1000,
        "sampling fell short: {total_runs} total, {adequate_runs} adequate"
    );

    report(
        3,
        rejected_prior == 0 && order_violations == 0 && preferred_new_interviews == 0,
        &format!(
            "over {total_runs} paired capacity-raise runs no doctor rejected a hospital she had \
             already interviewed with ({rejected_prior} violations), and over {adequate_runs} \
             adequate starts hospitals never dropped a better-liked prior interviewee while \
             keeping a worse new one ({order_violations} violations); but doctors left unmatched \
             by the base final matching gained {preferred_new_interviews} strictly-preferred new \
             interviews across {runs_with_preferred_new} adequate-start runs \
             (matched doctors gained {preferred_new_matched_only}) — the blanket claim that no \
             doctor gains an interview she prefers to her base assignment does not survive \
             unmatched doctors, whose outside option ranks below every acceptable hospital"
        ),
    );
}

#[test]
fn criterion_04_tiny_market_globally_adequate_caps() {
    let started = Instant::now();
    let survivors = global_adequacy_enumerate(2, 2, 2).expect("within budget");
    let elapsed = started.elapsed();

    let market = common_market(2, 2).expect("valid sizes");
    let expected = vec![
        Arrangement::homogeneous(1, 1, &market),
        Arrangement::homogeneous(2, 2, &market),
    ];

    report(
        4,
        survivors == expected && elapsed < Duration::from_secs(60),
        &format!(
            "2x2 markets, all 1296 preference profiles x 16 capacity vectors with entries in \
             {{1,2}}: the capacity vectors adequate on every profile are exactly all-caps-1 and \
             all-caps-2 (found {}); {:.1}s elapsed (limit 60s)",
            survivors.len(),
            elapsed.as_secs_f64()
        ),
    );
}

#[test]
fn criterion_05_shared_ranking_adequacy_boundary() {
    let mut cells = 0usize;
    let mut mismatches = 0usize;
    for n_doctors in 2..=12 {
        for n_hospitals in 2..=12 {
            let market = common_market(n_doctors, n_hospitals).expect("valid sizes");
            let n_min = n_doctors.min(n_hospitals);
            for l in 1..=12 {
                for k in 1..=12 {
                    let arrangement = Arrangement::homogeneous(l, k, &market);
                    let adequate = is_adequate(&market, &arrangement);
                    let predicted = l == k || (l >= n_min && k >= n_min);
                    cells += 1;
                    if adequate != predicted {
                        mismatches += 1;
                    }
                }
            }
        }
    }

    report(
        5,
        mismatches == 0,
        &format!(
            "shared-ranking markets, sizes 2..=12 both sides, capacities 1..=12 both sides: \
             stability of the two-step outcome holds exactly when l=k or both capacities reach \
             min(doctors, hospitals) — {mismatches} mismatches over {cells} cells"
        ),
    );
}

#[test]
fn criterion_06_closed_form_oracle_grid() {
    let rows = oracle_grid(12, 12);

    let matched_mismatches =
        rows.iter().filter(|r| r.predicted_matched != r.observed_matched).count();
    let blocking_high = rows
        .iter()
        .filter(|r| r.k > r.l && r.predicted_blocking != r.observed_blocking)
        .count();
    let blocking_low = rows
        .iter()
        .filter(|r| r.k < r.l && r.predicted_blocking != r.observed_blocking)
        .count();
    let naive_high = rows
        .iter()
        .filter(|r| r.k > r.l && r.naive_blocking != r.observed_blocking as i64)
        .count();
    let naive_low = rows
        .iter()
        .filter(|r| r.k < r.l && r.naive_blocking != r.observed_blocking as i64)
        .count();

    let mut monotone_failures = 0usize;
    let ks: Vec<usize> = (1..=12).collect();
    for n_doctors in 2..=12 {
        for n_hospitals in 2..=12 {
            for l in 1..=12 {
                let (_, monotone) = monotone_degradation_check(l, &ks, n_doctors, n_hospitals);
                if !monotone {
                    monotone_failures += 1;
                }
            }
        }
    }

    let dir = scratch_dir("oracle");
    let path = dir.join("oracle.csv");
    let mut buf = Vec::new();
    stablematch::csv::write_oracle(&mut buf, &rows).expect("serialize oracle rows");
    fs::write(&path, &buf).expect("write oracle.csv");

    report(
        6,
        matched_mismatches == 0 && blocking_high == 0 && monotone_failures == 0,
        &format!(
            "shared-ranking grid (sizes 2..=12, capacities 1..=12, {} cells): matched counts \
             match the closed form on every cell ({matched_mismatches} mismatches), blocking \
             counts match exactly for k>l ({blocking_high} mismatches; k<l: {blocking_low}), \
             and degradation is monotone as |k-l| grows at fixed l ({monotone_failures} \
             failures over 1452 slices); the first-cut summation disagrees with the pipeline \
             on {naive_high} k>l and {naive_low} k<l cells — full table written to {}",
            rows.len(),
            path.display()
        ),
    );
}

#[test]
fn criterion_07_survey_scale_capacity_sweep() {
    let started = Instant::now();
    let config = SweepConfig {
        gen: GenParams {
            beta: 40.0,
            gamma: 20.0,
            n_doctors: 470,
            n_hospitals: 400,
            seed: 42,
        },
        l: 25,
        k_min: 1,
        k_max: 100,
        replications: 100,
        parallelism: Parallelism::Auto,
    };
    let rows = sweep_k(&config);
    let agg = aggregate(&rows);
    let elapsed = started.elapsed();

    let best = agg
        .iter()
        .max_by(|a, b| {
            a.mean_match_rate
                .partial_cmp(&b.mean_match_rate)
                .unwrap()
                .then(b.k.cmp(&a.k))
        })
        .expect("non-empty sweep");
    let calmest = agg
        .iter()
        .min_by(|a, b| {
            a.mean_blocking_pairs
                .partial_cmp(&b.mean_blocking_pairs)
                .unwrap()
                .then(a.k.cmp(&b.k))
        })
        .expect("non-empty sweep");

    let rate_k_ok = (4..=7).contains(&best.k);
    let rate_ok = (best.mean_match_rate - 0.911).abs() <= 0.02;
    let blocking_k_ok = (5..=8).contains(&calmest.k);
    let blocking_ok = (calmest.mean_blocking_pairs - 19_183.0).abs() <= 0.15 * 19_183.0;

    report(
        7,
        rate_k_ok && rate_ok && blocking_k_ok && blocking_ok,
        &format!(
            "470 doctors x 400 hospitals, hospital capacity 25, 100 replications, doctor \
             capacity swept 1..=100: best mean match rate {:.4} at k={} and lowest mean \
             blocking count {:.0} at k={}; the targets called for a peak in k=[4,7] at \
             0.911±0.02 and a minimum in k=[5,8] at 19183±15%, but match quality climbs \
             steadily until doctor capacity meets hospital capacity at k=25 and instability \
             bottoms out there too, so no low-k optimum exists under this market model; \
             {:.0}s elapsed",
            best.mean_match_rate,
            best.k,
            calmest.mean_blocking_pairs,
            calmest.k,
            elapsed.as_secs_f64()
        ),
    );
}

#[test]
fn criterion_08_capped_policy_directional_effects() {
    let replications = 50usize;
    let gen = GenParams {
        beta: 40.0,
        gamma: 20.0,
        n_doctors: 470,
        n_hospitals: 400,
        seed: 42,
    };
    let (rows, hist) = compare_policies(&gen, 25, 5, replications, Parallelism::Auto);

    let n = rows.len() as f64;
    let mean = |f: &dyn Fn(&stablematch::experiments::CompareRow) -> f64| -> f64 {
        rows.iter().map(|r| f(r)).sum::<f64>() / n
    };
    let doc_capped = mean(&|r| r.doctors_prefer_capped as f64);
    let doc_uncapped = mean(&|r| r.doctors_prefer_uncapped as f64);
    let hosp_capped = mean(&|r| r.hospitals_prefer_capped as f64);
    let hosp_uncapped = mean(&|r| r.hospitals_prefer_uncapped as f64);
    let excess_blocking = mean(&|r| r.excess_blocking_pairs as f64);

    let zero_mean = |arm: Arm| -> f64 {
        hist.iter()
            .filter(|r| r.arm == arm && r.interviews == 0)
            .map(|r| r.doctor_count)
            .sum::<usize>() as f64
            / n
    };
    let zero_capped = zero_mean(Arm::Capped);
    let zero_uncapped = zero_mean(Arm::Uncapped);

    let doctors_direction = doc_capped > doc_uncapped;
    let hospitals_direction = hosp_capped > hosp_uncapped;
    let blocking_direction = excess_blocking > 0.0;
    let zero_direction = zero_uncapped > zero_capped;
    let held = |b: bool| if b { "holds" } else { "reversed" };

    report(
        8,
        doctors_direction && hospitals_direction && blocking_direction && zero_direction,
        &format!(
            "k_cap=5 vs unconstrained at 470x400 over {replications} replications: doctors \
             preferring capped {doc_capped:.1} vs uncapped {doc_uncapped:.1} [{}]; zero-interview \
             doctors uncapped {zero_uncapped:.1} vs capped {zero_capped:.1} [{}]; hospitals \
             preferring capped {hosp_capped:.1} vs uncapped {hosp_uncapped:.1} [{}]; mean excess \
             blocking pairs, uncapped minus capped, {excess_blocking:.0} [{}] — capping doctors \
             helps doctors and spreads interviews, but hospitals do better uncapped and the \
             capped outcome is usually the less stable one",
            held(doctors_direction),
            held(zero_direction),
            held(hospitals_direction),
            held(blocking_direction),
        ),
    );
}

#[test]
fn criterion_09_engine_agrees_with_enumerated_optimum() {
    fn doctor_rank(market: &Market, d: usize, assignment: Option<usize>) -> u32 {
        match assignment {
            Some(h) => market.doctor_key(d, h),
            None => market.doctor_outside_key(d),
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(0xACC9);
    let markets = 200usize;
    let mut set_sizes = 0usize;
    for _ in 0..markets {
        let market = fixtures::random_market(&mut rng, 4);
        let stable_set = stable_matchings_bruteforce(&market);
        assert!(!stable_set.is_empty(), "a stable matching always exists");
        set_sizes += stable_set.len();

        let engine: Matching = doctor_da(&market);
        assert!(
            stable_set.contains(&engine),
            "engine output must be one of the enumerated stable matchings"
        );
        for candidate in &stable_set {
            for d in 0..market.n_doctors() {
                assert!(
                    doctor_rank(&market, d, engine.of_doctor(d))
                        <= doctor_rank(&market, d, candidate.of_doctor(d)),
                    "every doctor must weakly prefer the engine's assignment"
                );
            }
        }
    }

    report(
        9,
        true,
        &format!(
            "{markets} random markets up to 4x4: the proposing-side engine output is always a \
             member of the enumerated stable set and every doctor weakly prefers it to every \
             other member ({set_sizes} stable matchings enumerated in total)"
        ),
    );
}

#[test]
fn criterion_10_byte_identical_outputs_across_reruns_and_threads() {
    let bin = env!("CARGO_BIN_EXE_stablematch");
    let base = scratch_dir("determinism");

    let run = |sub: &str, extra: &[&str], out: &Path, threads: &str| {
        let status = Command::new(bin)
            .args([
                sub, "--doctors", "30", "--hospitals", "25", "--reps", "5", "--seed", "9",
                "--threads", threads, "--out",
            ])
            .arg(out)
            .args(extra)
            .status()
            .expect("binary spawns");
        assert!(status.success(), "{sub} run failed");
    };

    let mut checked: Vec<&'static str> = Vec::new();
    let mut compare_runs = |sub: &str, extra: &[&str], files: &[&'static str]| {
        let variants = [("a", "1"), ("b", "3"), ("c", "auto"), ("d", "1")];
        let dirs: Vec<PathBuf> = variants
            .iter()
            .map(|(tag, threads)| {
                let dir = base.join(format!("{sub}-{tag}"));
                fs::create_dir_all(&dir).expect("variant dir");
                run(sub, extra, &dir, threads);
                dir
            })
            .collect();
        for file in files {
            let reference = fs::read(dirs[0].join(file)).expect("reference output");
            assert!(!reference.is_empty(), "{file} should have content");
            for dir in &dirs[1..] {
                let other = fs::read(dir.join(file)).expect("variant output");
                assert_eq!(
                    reference, other,
                    "{file} must be byte-identical across reruns and thread counts"
                );
            }
            checked.push(*file);
        }
    };

    compare_runs("sweep", &["--l", "4", "--k-min", "1", "--k-max", "6"], &[
        "sweep.csv",
        "sweep_agg.csv",
    ]);
    compare_runs("compare", &["--l", "4", "--k-cap", "2"], &["compare.csv", "hist.csv"]);
    compare_runs("ideal", &["--l", "4", "--k-cap", "2"], &["ideal.csv"]);
    compare_runs(
        "heatmap",
        &["--l-min", "1", "--l-max", "3", "--k-min", "1", "--k-max", "3"],
        &["heatmap.csv"],
    );

    report(
        10,
        true,
        &format!(
            "{} output files ({}) byte-identical across a rerun and thread counts 1, 3, auto",
            checked.len(),
            checked.join(", ")
        ),
    );
}
