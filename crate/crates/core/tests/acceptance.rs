//! Acceptance gate. Prints one PASS/FAIL line per criterion and exits non-zero
//! if any criterion fails.
//!
//! Criteria 1 to 3 read the Adult and KDD Census files from `CFSMOTE_DATA_DIR`
//! (default `<workspace>/data`); `scripts/fetch_data.sh` downloads them.
//! Positional arguments select criteria by number or by a substring of their
//! name.

use std::path::PathBuf;
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use cfsmote::adwin::Adwin;
use cfsmote::datasets::{generate_biased_drift_stream, DriftStreamParams};
use cfsmote::experiment::{run_seed, LearnerConfig, LearnerKind, PipelineKind, DEFAULT_SEEDS};
use cfsmote::rebalance::{minority_fraction_for_ratio, required_synthetics, situation_test, Grouping, SubgroupWindow};
use cfsmote::stream::{Evaluators, MetricSet};
use cfsmote::{
    load_dataset, AttributeKind, Bit, Classifier, DatasetManifest, ExperimentConfig, GroupConfusionLedger, Instance,
    LoadedDataset, Metric, Mode, Rebalancer, RebalancerConfig, StreamSchema,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

// Criterion 1: label-level fairness of the raw datasets.
const ADULT_SP: f64 = 19.45;
const ADULT_DI: f64 = 64.03;
const ADULT_POSITIVE: f64 = 23.93;
const KDD_SP: f64 = 7.63;
const KDD_DI: f64 = 74.96;
const KDD_POSITIVE: f64 = 6.20;
const SP_TOL: f64 = 0.1;
const DI_TOL: f64 = 0.3;
const POSITIVE_TOL: f64 = 0.05;
const LOAD_BUDGET: Duration = Duration::from_secs(60);

// Criterion 2: directional gaps, C-SMOTE minus CFSMOTE.
const MIN_SP_GAP: f64 = 5.0;
const MIN_EO_GAP: f64 = 4.0;
const EXPERIMENT_BUDGET: Duration = Duration::from_secs(30 * 60);

// Criterion 3: balanced accuracy ranges and the individual fairness ceiling.
const CFSMOTE_BACC: (f64, f64) = (70.0, 82.0);
const CSMOTE_BACC: (f64, f64) = (72.0, 84.0);
const MAX_CFSMOTE_IF: f64 = 2.0;

// Criterion 4.
const ADWIN_RUNS: u64 = 100;
const ADWIN_DELTA: f64 = 0.002;
const STATIONARY_LEN: usize = 10_000;
const MAX_FALSE_DETECTION_RATE: f64 = 0.05;
const SHIFT_AT: usize = 1_000;
const DETECTION_HORIZON: usize = 300;
const MIN_DETECTION_RATE: f64 = 0.95;
const ADWIN_BUDGET: Duration = Duration::from_secs(60);

// Criterion 5.
const REBALANCER_SEEDS: u64 = 50;
const MAX_STREAM: usize = 10_000;
const REBALANCER_BUDGET: Duration = Duration::from_secs(5 * 60);

// Criterion 6.
const ORACLE_STREAMS: u64 = 1_000;
const MAX_ORACLE_STREAM: usize = 1_000;
const METRIC_TOL: f64 = 1e-9;
const ENUMERATION_MAX: u64 = 200;

struct Verdict {
    pass: bool,
    detail: String,
}

impl Verdict {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Verdict {
            pass,
            detail: detail.into(),
        }
    }

    fn fail(detail: impl Into<String>) -> Self {
        Verdict::new(false, detail)
    }
}

fn workspace_root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn data_dir() -> PathBuf {
    std::env::var_os("CFSMOTE_DATA_DIR").map_or_else(|| workspace_root().join("data"), PathBuf::from)
}

fn load(name: &str) -> Result<(LoadedDataset, Duration), String> {
    let manifest_path = workspace_root().join("manifests").join(format!("{name}.toml"));
    let manifest = DatasetManifest::from_file(&manifest_path)
        .map_err(|e| format!("{}: {e}", manifest_path.display()))?
        .rebase(data_dir());
    let start = Instant::now();
    let data = load_dataset(&manifest).map_err(|e| {
        format!(
            "{name}: {e} (set CFSMOTE_DATA_DIR or run scripts/fetch_data.sh; looked in {})",
            data_dir().display()
        )
    })?;
    Ok((data, start.elapsed()))
}

fn label_ledger(data: &LoadedDataset) -> GroupConfusionLedger {
    let mut g = GroupConfusionLedger::default();
    for x in &data.instances {
        g.record(x.sensitive, x.label, x.label);
    }
    g
}

fn within(v: Option<f64>, target: f64, tol: f64) -> bool {
    v.is_some_and(|v| (v - target).abs() <= tol)
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "undefined".into(), |v| format!("{v:.3}"))
}

fn dataset_oracle(name: &str, sp: f64, di: f64, positive: f64, instances: usize, attributes: usize) -> (bool, String) {
    let (data, elapsed) = match load(name) {
        Ok(d) => d,
        Err(e) => return (false, e),
    };
    let g = label_ledger(&data);
    let got_sp = g.statistical_parity().value();
    let got_di = g.disparate_impact().value();
    let got_pos = 100.0 * data.report.positive_fraction();
    let pass = within(got_sp, sp, SP_TOL)
        && within(got_di, di, DI_TOL)
        && within(Some(got_pos), positive, POSITIVE_TOL)
        && data.instances.len() == instances
        && data.schema.len() == attributes
        && elapsed < LOAD_BUDGET;
    let detail = format!(
        "{name}: SP {} (target {sp} ± {SP_TOL}), DI {} (target {di} ± {DI_TOL}), positives {got_pos:.3}% \
         (target {positive} ± {POSITIVE_TOL}), {} x {} (expected {instances} x {attributes}), {:.1}s",
        fmt_opt(got_sp),
        fmt_opt(got_di),
        data.instances.len(),
        data.schema.len(),
        elapsed.as_secs_f64()
    );
    (pass, detail)
}

fn criterion_dataset_oracle() -> Verdict {
    let (a_pass, a) = dataset_oracle("adult", ADULT_SP, ADULT_DI, ADULT_POSITIVE, 48_842, 14);
    let (k_pass, k) = dataset_oracle("kdd", KDD_SP, KDD_DI, KDD_POSITIVE, 299_285, 40);
    Verdict::new(a_pass && k_pass, format!("{a}; {k}"))
}

struct AdultRuns {
    cfsmote: Vec<MetricSet>,
    csmote: Vec<MetricSet>,
    elapsed: Duration,
}

fn adult_runs() -> &'static Result<AdultRuns, String> {
    static RUNS: OnceLock<Result<AdultRuns, String>> = OnceLock::new();
    RUNS.get_or_init(|| {
        let (data, _) = load("adult")?;
        let start = Instant::now();
        let run = |kind: PipelineKind| -> Result<Vec<MetricSet>, String> {
            let mut config = ExperimentConfig::new("adult.toml", "unused", kind, LearnerKind::HoeffdingAdaptive);
            config.snapshot_every = 0;
            DEFAULT_SEEDS
                .map(|seed| {
                    run_seed(&config, &data, seed)
                        .map(|r| r.metrics)
                        .map_err(|e| e.to_string())
                })
                .collect()
        };
        Ok(AdultRuns {
            cfsmote: run(PipelineKind::Cfsmote)?,
            csmote: run(PipelineKind::Csmote)?,
            elapsed: start.elapsed(),
        })
    })
}

fn mean_of(runs: &[MetricSet], name: &str) -> Option<f64> {
    let values: Vec<f64> = runs
        .iter()
        .filter_map(|m| m.get(name).and_then(Metric::value))
        .collect();
    (values.len() == runs.len()).then(|| values.iter().sum::<f64>() / values.len() as f64)
}

fn criterion_directional() -> Verdict {
    let runs = match adult_runs() {
        Ok(r) => r,
        Err(e) => return Verdict::fail(e.clone()),
    };
    let m = |runs: &[MetricSet], name: &str| mean_of(runs, name).unwrap_or(f64::NAN);
    let (cf_sp, cs_sp) = (
        m(&runs.cfsmote, "statistical_parity"),
        m(&runs.csmote, "statistical_parity"),
    );
    let (cf_eo, cs_eo) = (
        m(&runs.cfsmote, "equal_opportunity"),
        m(&runs.csmote, "equal_opportunity"),
    );
    let (cf_fpr, cs_fpr) = (m(&runs.cfsmote, "equal_fpr"), m(&runs.csmote, "equal_fpr"));
    let sp_ok = cs_sp - cf_sp >= MIN_SP_GAP;
    let eo_ok = cs_eo - cf_eo >= MIN_EO_GAP;
    let fpr_ok = cf_fpr < cs_fpr;
    let time_ok = runs.elapsed < EXPERIMENT_BUDGET;
    let mark = |ok: bool| if ok { "ok" } else { "MISSED" };
    Verdict::new(
        sp_ok && eo_ok && fpr_ok && time_ok,
        format!(
            "SP {cf_sp:.2} vs {cs_sp:.2} (gap {:.2}, need {MIN_SP_GAP}) {}; EO {cf_eo:.2} vs {cs_eo:.2} \
             (gap {:.2}, need {MIN_EO_GAP}) {}; EFPR {cf_fpr:.2} vs {cs_fpr:.2} {}; {:.0}s for 2 x {} seeds",
            cs_sp - cf_sp,
            mark(sp_ok),
            cs_eo - cf_eo,
            mark(eo_ok),
            mark(fpr_ok),
            runs.elapsed.as_secs_f64(),
            DEFAULT_SEEDS.count()
        ),
    )
}

fn criterion_ballpark() -> Verdict {
    let runs = match adult_runs() {
        Ok(r) => r,
        Err(e) => return Verdict::fail(e.clone()),
    };
    let m = |runs: &[MetricSet], name: &str| mean_of(runs, name).unwrap_or(f64::NAN);
    let cf_bacc = m(&runs.cfsmote, "balanced_accuracy");
    let cs_bacc = m(&runs.csmote, "balanced_accuracy");
    let cf_if = m(&runs.cfsmote, "individual_fairness");
    let in_range = |v: f64, (lo, hi): (f64, f64)| (lo..=hi).contains(&v);
    let bacc_ok = in_range(cf_bacc, CFSMOTE_BACC) && in_range(cs_bacc, CSMOTE_BACC);
    let if_ok = cf_if <= MAX_CFSMOTE_IF;
    Verdict::new(
        bacc_ok && if_ok,
        format!(
            "balanced accuracy CFSMOTE {cf_bacc:.2} in {CFSMOTE_BACC:?}, C-SMOTE {cs_bacc:.2} in {CSMOTE_BACC:?} {}; \
             CFSMOTE individual fairness {cf_if:.2} (max {MAX_CFSMOTE_IF}) {}",
            if bacc_ok { "ok" } else { "MISSED" },
            if if_ok { "ok" } else { "MISSED" }
        ),
    )
}

fn bernoulli_detections(seed: u64, segments: &[(f64, usize)]) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut adwin = Adwin::new(ADWIN_DELTA).expect("valid delta");
    let mut out = Vec::new();
    let mut t = 0;
    for &(p, len) in segments {
        for _ in 0..len {
            if adwin
                .add_element(f64::from(u8::from(rng.random_bool(p))))
                .expect("binary input")
            {
                out.push(t);
            }
            t += 1;
        }
    }
    out
}

fn criterion_adwin() -> Verdict {
    let start = Instant::now();
    let mut pass = true;
    let mut parts = Vec::new();
    for (i, p) in [0.1, 0.5, 0.9].into_iter().enumerate() {
        let false_runs = (0..ADWIN_RUNS)
            .filter(|&seed| !bernoulli_detections(seed + 1_000 * i as u64, &[(p, STATIONARY_LEN)]).is_empty())
            .count();
        let rate = false_runs as f64 / ADWIN_RUNS as f64;
        pass &= rate < MAX_FALSE_DETECTION_RATE;
        parts.push(format!("false detections at p={p}: {false_runs}/{ADWIN_RUNS}"));
    }
    let detected = (0..ADWIN_RUNS)
        .filter(|&seed| {
            bernoulli_detections(seed + 10_000, &[(0.2, SHIFT_AT), (0.8, DETECTION_HORIZON)])
                .iter()
                .any(|&t| t >= SHIFT_AT)
        })
        .count();
    pass &= detected as f64 / ADWIN_RUNS as f64 >= MIN_DETECTION_RATE;
    parts.push(format!(
        "0.2->0.8 detected within {DETECTION_HORIZON}: {detected}/{ADWIN_RUNS}"
    ));
    let elapsed = start.elapsed();
    pass &= elapsed < ADWIN_BUDGET;
    parts.push(format!("{:.1}s", elapsed.as_secs_f64()));
    Verdict::new(pass, parts.join("; "))
}

/// Base learner that checks, before every update, that the sample passes
/// situation testing against its own current state. Only audits when the
/// pipeline filters.
struct Audited {
    inner: Box<dyn Classifier + Send>,
    schema: StreamSchema,
    filtered: bool,
    trained: u64,
    unsound: u64,
}

impl Classifier for Audited {
    fn learn_weighted(&mut self, x: &Instance, weight: u32) {
        if self.filtered && !situation_test(x, self.inner.as_ref(), &self.schema) {
            self.unsound += 1;
        }
        self.trained += 1;
        self.inner.learn_weighted(x, weight);
    }

    fn predict_proba(&self, x: &Instance) -> f64 {
        self.inner.predict_proba(x)
    }

    fn has_learned(&self) -> bool {
        self.inner.has_learned()
    }

    fn resets(&self) -> u64 {
        self.inner.resets()
    }
}

fn random_drift_params(seed: u64) -> DriftStreamParams {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(2_000..=MAX_STREAM);
    let segments = rng.random_range(1..=3usize);
    let mut drift_points: Vec<usize> = (1..segments).map(|_| rng.random_range(n / 10..n * 9 / 10)).collect();
    drift_points.sort_unstable();
    drift_points.dedup();
    // Alternate low and high base rates so the label monitor has shifts to find.
    let positive_rates = (0..=drift_points.len())
        .map(|k| {
            if k % 2 == 0 {
                rng.random_range(0.15..0.25)
            } else {
                rng.random_range(0.35..0.45)
            }
        })
        .collect();
    DriftStreamParams {
        n,
        n_features: rng.random_range(2..=4),
        positive_rates,
        privileged_rate: rng.random_range(0.3..0.8),
        group_positive_gap: rng.random_range(0.0..0.2),
        drift_points,
        seed,
    }
}

#[derive(Default)]
struct PropertyTally {
    steps: u64,
    ratio_checks: u64,
    ratio_violations: u64,
    stored_synthetic: u64,
    shrinks: u64,
    purge_violations: u64,
    synthetics: u64,
    wrong_bits: u64,
    outside_hull: u64,
    trained: u64,
    discarded: u64,
    unsound: u64,
    nondeterministic: u64,
}

fn new_rebalancer(mode: Mode, schema: &StreamSchema, seed: u64) -> Rebalancer<Audited> {
    let inner = LearnerConfig::of_kind(LearnerKind::HoeffdingAdaptive)
        .build(schema, seed)
        .expect("default learner");
    let config = RebalancerConfig::for_mode(mode);
    let audited = Audited {
        inner,
        schema: schema.clone(),
        filtered: config.situation_testing,
        trained: 0,
        unsound: 0,
    };
    let mut r = Rebalancer::new(config, schema, audited, seed).expect("default config");
    r.record_synthetics();
    r
}

/// Whether `x` lies in the per-feature hull of the group it was drawn for:
/// numerics inside `[min, max]`, categoricals equal to some stored value.
fn in_group_hull(x: &Instance, window: &SubgroupWindow, group: usize, kinds: &[AttributeKind]) -> bool {
    kinds.iter().enumerate().all(|(j, kind)| {
        let values = || window.group_samples(group).map(|s| s.features[j]);
        match kind {
            AttributeKind::Numeric => {
                let lo = values().fold(f64::INFINITY, f64::min);
                let hi = values().fold(f64::NEG_INFINITY, f64::max);
                x.features[j] >= lo - 1e-12 && x.features[j] <= hi + 1e-12
            }
            AttributeKind::Categorical { .. } => values().any(|v| v == x.features[j]),
        }
    })
}

fn check_rebalancer(mode: Mode, seed: u64, tally: &mut PropertyTally) {
    let params = random_drift_params(seed);
    let stream = generate_biased_drift_stream(&params).expect("feasible parameters");
    let schema = params.schema();
    let kinds: Vec<AttributeKind> = schema.attributes().iter().map(|a| a.kind).collect();
    let mut r = new_rebalancer(mode, &schema, seed);
    let threshold = r.config().group_fraction_threshold();
    let min_size = r.config().min_group_size();
    let grouping = mode.grouping();

    for x in &stream {
        let logged = r.synthetic_log().len();
        let cap_hits = r.cap_hits();
        let step = r.process(x).expect("natural sample");
        tally.steps += 1;
        tally.discarded += step.discarded as u64;
        let w = r.window();

        if w.all_groups_at_least(min_size) && r.cap_hits() == cap_hits {
            tally.ratio_checks += 1;
            if (0..w.n_groups()).any(|g| w.imbalance_ratio(g).is_none_or(|ratio| ratio < threshold)) {
                tally.ratio_violations += 1;
            }
        }
        tally.stored_synthetic += w.stored().filter(|(_, s)| s.is_synthetic).count() as u64;
        if step.shrunk {
            tally.shrinks += 1;
            if let Some(cut) = w.last_cut() {
                if w.stored().any(|(arrival, _)| arrival <= cut) {
                    tally.purge_violations += 1;
                }
            }
        }
        for s in &r.synthetic_log()[logged..] {
            tally.synthetics += 1;
            let g = grouping.group_of(s);
            let (label, sensitive) = grouping.bits(g);
            let bits_ok = s.is_synthetic
                && s.label == label
                && sensitive.is_none_or(|b| s.sensitive == b)
                && s.features[schema.sensitive_position()] == f64::from(s.sensitive);
            if !bits_ok || grouping.group_of(s) != g {
                tally.wrong_bits += 1;
            }
            if !in_group_hull(s, w, g, &kinds) {
                tally.outside_hull += 1;
            }
        }
    }
    tally.trained += r.learner().trained;
    tally.unsound += r.learner().unsound;

    let mut replay = new_rebalancer(mode, &schema, seed);
    for x in &stream {
        replay.process(x).expect("natural sample");
    }
    if replay.synthetic_log() != r.synthetic_log() {
        tally.nondeterministic += 1;
    }
}

fn criterion_rebalancer() -> Verdict {
    let start = Instant::now();
    let mut pass = true;
    let mut parts = Vec::new();
    for mode in [Mode::Cfsmote, Mode::Csmote] {
        let mut t = PropertyTally::default();
        for seed in 0..REBALANCER_SEEDS {
            check_rebalancer(mode, seed, &mut t);
        }
        let ok = t.ratio_violations == 0
            && t.ratio_checks > 0
            && t.stored_synthetic == 0
            && t.shrinks > 0
            && t.purge_violations == 0
            && t.synthetics > 0
            && t.wrong_bits == 0
            && t.outside_hull == 0
            && t.unsound == 0
            && t.nondeterministic == 0;
        pass &= ok;
        parts.push(format!(
            "{mode:?}: {} steps, ratio violations {}/{}, stored synthetics {}, purge violations {}/{} shrinks, \
             synthetics {} (wrong bits {}, outside hull {}), unsound updates {}/{} ({} discarded), \
             nondeterministic seeds {}",
            t.steps,
            t.ratio_violations,
            t.ratio_checks,
            t.stored_synthetic,
            t.purge_violations,
            t.shrinks,
            t.synthetics,
            t.wrong_bits,
            t.outside_hull,
            t.unsound,
            t.trained,
            t.discarded,
            t.nondeterministic
        ));
    }
    let elapsed = start.elapsed();
    pass &= elapsed < REBALANCER_BUDGET;
    parts.push(format!("{:.1}s", elapsed.as_secs_f64()));
    Verdict::new(pass, parts.join("; "))
}

#[derive(Clone, Copy)]
struct Logged {
    s: Bit,
    y: Bit,
    yhat: Bit,
    flipped: bool,
}

/// Probability drawn so that empty groups and cells occur regularly.
fn skewed_probability<R: Rng>(rng: &mut R) -> f64 {
    match rng.random_range(0..6) {
        0 => 0.0,
        1 => 1.0,
        2 => 0.02,
        _ => rng.random(),
    }
}

fn random_log(seed: u64) -> Vec<Logged> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(0..=MAX_ORACLE_STREAM);
    let p_s = skewed_probability(&mut rng);
    let p_y = [skewed_probability(&mut rng), skewed_probability(&mut rng)];
    let p_hat = [
        [skewed_probability(&mut rng), skewed_probability(&mut rng)],
        [skewed_probability(&mut rng), skewed_probability(&mut rng)],
    ];
    let p_flip: f64 = rng.random_range(0.0..0.1);
    (0..n)
        .map(|_| {
            let s = Bit::from(rng.random_bool(p_s));
            let y = Bit::from(rng.random_bool(p_y[usize::from(s)]));
            let yhat = Bit::from(rng.random_bool(p_hat[usize::from(s)][usize::from(y)]));
            Logged {
                s,
                y,
                yhat,
                flipped: rng.random_bool(p_flip),
            }
        })
        .collect()
}

/// Batch recomputation of the metric set from a prediction log, in
/// `MetricSet::NAMES` order.
fn batch_metrics(log: &[Logged]) -> [Metric; 10] {
    let count = |f: &dyn Fn(&Logged) -> bool| log.iter().filter(|r| f(r)).count() as f64;
    let n = log.len() as f64;
    let pos = count(&|r| r.y == 1);
    let neg = count(&|r| r.y == 0);
    let tp = count(&|r| r.y == 1 && r.yhat == 1);
    let tn = count(&|r| r.y == 0 && r.yhat == 0);
    let (tpr, tpr_missing) = if pos > 0.0 { (tp / pos, false) } else { (0.0, true) };
    let (tnr, tnr_missing) = if neg > 0.0 { (tn / neg, false) } else { (0.0, true) };
    let perf = |v: f64, partial: bool| {
        if log.is_empty() {
            Metric::Undefined
        } else if partial {
            Metric::Partial(v)
        } else {
            Metric::Defined(v)
        }
    };
    let either = tpr_missing || tnr_missing;

    let rate = |cond: &dyn Fn(&Logged) -> bool| {
        let den = count(cond);
        (den > 0.0).then(|| count(&|r| cond(r) && r.yhat == 1) / den)
    };
    let r1 = rate(&|r| r.s == 1);
    let r0 = rate(&|r| r.s == 0);
    let gap = |a: Option<f64>, b: Option<f64>| match (a, b) {
        (Some(a), Some(b)) => Metric::Defined(100.0 * (a - b).abs()),
        _ => Metric::Undefined,
    };
    let di = match (r1, r0) {
        (Some(r1), Some(r0)) if r1 > 0.0 => Metric::Defined(100.0 * (1.0 - r0 / r1)),
        _ => Metric::Undefined,
    };
    let di_sym = match (r1, r0) {
        (Some(0.0), Some(0.0)) => Metric::Defined(0.0),
        (Some(r1), Some(r0)) if r1 > 0.0 && r0 > 0.0 => Metric::Defined(100.0 * (1.0 - (r0 / r1).min(r1 / r0))),
        _ => Metric::Undefined,
    };
    let flips = count(&|r| r.flipped);
    [
        perf(100.0 * (tp + tn) / n, false),
        perf(50.0 * (tpr + tnr), either),
        perf(100.0 * tpr, tpr_missing),
        perf(100.0 * (tpr * tnr).sqrt(), either),
        gap(r1, r0),
        di,
        di_sym,
        gap(rate(&|r| r.s == 1 && r.y == 1), rate(&|r| r.s == 0 && r.y == 1)),
        gap(rate(&|r| r.s == 1 && r.y == 0), rate(&|r| r.s == 0 && r.y == 0)),
        if log.is_empty() {
            Metric::Undefined
        } else {
            Metric::Defined(100.0 * flips / n)
        },
    ]
}

fn same_metric(a: Metric, b: Metric) -> bool {
    match (a, b) {
        (Metric::Defined(x), Metric::Defined(y)) | (Metric::Partial(x), Metric::Partial(y)) => {
            (x - y).abs() <= METRIC_TOL
        }
        (Metric::Undefined, Metric::Undefined) => true,
        _ => false,
    }
}

fn criterion_oracle_equivalence() -> Verdict {
    let mut mismatched_streams = 0;
    let mut first_mismatch = None;
    let mut defined_checks = 0u64;
    for seed in 0..ORACLE_STREAMS {
        let log = random_log(seed);
        let window = 1 + (seed as usize * 37) % 200;
        let mut ev = Evaluators::with_window(window);
        for r in &log {
            ev.update(r.s, r.y, r.yhat, r.flipped);
        }
        let cumulative = ev.metrics().values();
        let windowed = ev.windowed_metrics().expect("window configured").values();
        let tail = &log[log.len().saturating_sub(window)..];
        let expected = batch_metrics(&log);
        let expected_tail = batch_metrics(tail);
        let mut ok = true;
        for i in 0..10 {
            ok &= same_metric(cumulative[i], expected[i]) && same_metric(windowed[i], expected_tail[i]);
            defined_checks += u64::from(expected[i].value().is_some());
        }
        if !ok {
            mismatched_streams += 1;
            first_mismatch.get_or_insert(seed);
        }
    }

    // minority / majority >= 1/2  <=>  minority share >= 1/3, exactly and as
    // decided by the window.
    let schema = StreamSchema::numeric_with_sensitive(1);
    let threshold = minority_fraction_for_ratio(0.5);
    let mut window = SubgroupWindow::new(&schema, Grouping::LabelOnly, Adwin::default(), false);
    let mut identity_failures = 0;
    let mut pairs = 0;
    for a in 0..=ENUMERATION_MAX {
        for b in 0..=ENUMERATION_MAX {
            if a + b == 0 {
                continue;
            }
            pairs += 1;
            let (minority, majority) = (a.min(b), a.max(b));
            let by_ratio = 2 * minority >= majority;
            let by_fraction = 3 * minority >= minority + majority;
            window.set_synthetic_count(0, a);
            window.set_synthetic_count(1, b);
            let balanced = window.most_deficient(threshold).is_none();
            let needed = required_synthetics(minority, a + b, threshold) == 0;
            if by_ratio != by_fraction || balanced != by_ratio || needed != by_ratio {
                identity_failures += 1;
            }
        }
    }

    Verdict::new(
        mismatched_streams == 0 && identity_failures == 0,
        format!(
            "{mismatched_streams}/{ORACLE_STREAMS} streams differ from batch recomputation{} \
             ({defined_checks} defined cumulative values); threshold identity failures {identity_failures}/{pairs} pairs",
            first_mismatch.map_or_else(String::new, |s| format!(" (first seed {s})"))
        ),
    )
}

type Criterion = (u8, &'static str, fn() -> Verdict);

const CRITERIA: [Criterion; 6] = [
    (1, "dataset label oracle", criterion_dataset_oracle),
    (2, "directional fairness on adult", criterion_directional),
    (3, "ballpark performance on adult", criterion_ballpark),
    (4, "adwin properties", criterion_adwin),
    (5, "rebalancer properties", criterion_rebalancer),
    (6, "oracle equivalence", criterion_oracle_equivalence),
];

fn selected(filters: &[String], id: u8, name: &str) -> bool {
    filters.is_empty()
        || filters
            .iter()
            .any(|f| f.parse::<u8>().map_or_else(|_| name.contains(f.as_str()), |n| n == id))
}

fn main() {
    let filters: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (id, name, check) in CRITERIA {
        if !selected(&filters, id, name) {
            continue;
        }
        let v = check();
        failed += usize::from(!v.pass);
        println!(
            "criterion {id} ({name}): {} | {}",
            if v.pass { "PASS" } else { "FAIL" },
            v.detail
        );
    }
    if filters.is_empty() {
        println!(
            "criterion 7 (not reproduced at desk scale): NOT GATING | competitor rows and full KDD runs are out of scope"
        );
    }
    if failed > 0 {
        println!("acceptance: {failed} criterion(s) failed");
        std::process::exit(1);
    }
}
