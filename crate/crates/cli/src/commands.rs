use std::io::Write;

use netbenefit::cnb::cnb_value;
use netbenefit::cohort::{run_demo, DemoConfig, DemoReport, DemoTable};
use netbenefit::netbenefit::combine_decisions;
use netbenefit::oracle::{
    aunb_disagreement_witness, generate_population, two_group_scenario, verify_expected_nb,
    GeneratorConfig, GroupSummary, TwoGroupConfig, VerificationReport, VerifyMode, Witness,
    WitnessSearch,
};
use netbenefit::resample::statistic;
use netbenefit::{
    bootstrap_ci, cnb_difference, continuous_net_benefit, cumulative, decision_curve,
    treat_all_cnb, BootstrapConfig, CnbEstimate, ConfidenceInterval, EvaluationDataset,
    WeightSpec,
};
use serde::{Deserialize, Serialize};

use crate::args::{
    BootstrapArgs, CnbArgs, CompareArgs, CurveArgs, DemoArgs, Format, OracleArgs, OracleMode,
    ValidateArgs,
};
use crate::input::{grid, load_dataset, model_pair, quad_config, read_json, weight_spec};
use crate::output::{ci_text, internal, json, open, per100};
use crate::CliError;

fn bootstrap_config(b: &BootstrapArgs) -> Result<Option<BootstrapConfig>, CliError> {
    if b.bootstrap == 0 {
        return Ok(None);
    }
    let cfg = BootstrapConfig::new(b.bootstrap, b.level, b.seed);
    cfg.validate()?;
    Ok(Some(cfg))
}

#[derive(Serialize)]
struct ModelRange {
    model: String,
    min: f64,
    max: f64,
    /// Scores exactly 0 or 1; log-likelihood based operations reject them.
    boundary_scores: usize,
}

#[derive(Serialize)]
struct Validation {
    n: usize,
    total_weight: f64,
    prevalence: f64,
    models: Vec<ModelRange>,
}

pub fn validate(a: &ValidateArgs) -> Result<(), CliError> {
    let ds = load_dataset(&a.input)?;
    let s = ds.summarize();
    let models = ds
        .models()
        .iter()
        .map(|m| {
            let f = ds.scores(m).expect("model from the dataset");
            ModelRange {
                model: m.clone(),
                min: f.iter().copied().fold(f64::INFINITY, f64::min),
                max: f.iter().copied().fold(f64::NEG_INFINITY, f64::max),
                boundary_scores: f.iter().filter(|&&v| v == 0.0 || v == 1.0).count(),
            }
        })
        .collect();
    let v = Validation {
        n: s.n,
        total_weight: s.total_weight,
        prevalence: s.prevalence,
        models,
    };
    let mut w = open(&a.out)?;
    match a.out.format {
        Format::Json => json(&mut *w, "validate", a, &v)?,
        Format::Csv => {
            writeln!(w, "model,min,max,boundary_scores").map_err(internal)?;
            for m in &v.models {
                writeln!(w, "{},{},{},{}", m.model, m.min, m.max, m.boundary_scores).map_err(internal)?;
            }
        }
        Format::Text => {
            writeln!(
                w,
                "{} subjects, total weight {}, prevalence {:.4}",
                v.n, v.total_weight, v.prevalence
            )
            .map_err(internal)?;
            for m in &v.models {
                write!(w, "  {}: scores in [{}, {}]", m.model, m.min, m.max).map_err(internal)?;
                if m.boundary_scores > 0 {
                    write!(w, ", {} at exactly 0 or 1", m.boundary_scores).map_err(internal)?;
                }
                writeln!(w).map_err(internal)?;
            }
        }
    }
    w.flush().map_err(internal)
}

pub fn curve(a: &CurveArgs) -> Result<(), CliError> {
    let ds = load_dataset(&a.input)?;
    let grid = grid(a.grid.as_deref())?;
    let models: Vec<&str> = ds.models().iter().map(String::as_str).collect();
    let table = decision_curve(&ds, &models, &grid, a.rescaled)?;
    let mut w = open(&a.out)?;
    match a.out.format {
        Format::Json => json(&mut *w, "curve", a, &table)?,
        Format::Csv => table.write_csv(&mut w, 1.0)?,
        Format::Text => {
            writeln!(w, "net benefit per 100 people (prevalence {:.4})", table.prevalence)
                .map_err(internal)?;
            let mut header = format!("{:>9}", "threshold");
            for c in &table.columns {
                header.push_str(&format!(" {:>12}", c.policy));
            }
            writeln!(w, "{header}").map_err(internal)?;
            for (i, t) in table.grid.iter().enumerate() {
                let mut row = format!("{t:>9}");
                for c in &table.columns {
                    row.push_str(&format!(" {:>12}", per100(c.net_benefit[i])));
                }
                writeln!(w, "{row}").map_err(internal)?;
            }
        }
    }
    w.flush().map_err(internal)
}

#[derive(Serialize)]
struct CnbResult {
    estimates: Vec<CnbEstimate>,
    /// CNB of flagging everyone, when W1(1) and W0(1) are finite.
    treat_all: Option<f64>,
}

pub fn cnb(a: &CnbArgs) -> Result<(), CliError> {
    let ds = load_dataset(&a.input)?;
    let cfg = quad_config(&a.weights)?;
    let spec = weight_spec(&a.weights, &cfg)?;
    let boot = bootstrap_config(&a.bootstrap)?;
    let mut estimates = Vec::new();
    for m in ds.models() {
        let est = continuous_net_benefit(&ds, m, &spec, &cfg)?;
        let est = match &boot {
            Some(b) => {
                let cw = cumulative(&spec, &cfg)?;
                let stat = statistic(m.as_str(), |d: &EvaluationDataset| cnb_value(d, m, &cw));
                est.with_ci(bootstrap_ci(&stat, &ds, b)?.ci)
            }
            None => est,
        };
        estimates.push(est);
    }
    let result = CnbResult {
        estimates,
        treat_all: treat_all_cnb(ds.prevalence(), &spec, &cfg).ok(),
    };
    let mut w = open(&a.out)?;
    match a.out.format {
        Format::Json => json(&mut *w, "cnb", a, &result)?,
        Format::Csv => {
            writeln!(w, "model,value,unit,lower,upper").map_err(internal)?;
            for e in &result.estimates {
                let (lo, hi) = e.ci.as_ref().map_or((String::new(), String::new()), |c| {
                    (c.lower.to_string(), c.upper.to_string())
                });
                writeln!(w, "{},{},{},{lo},{hi}", e.model, e.value, e.unit.label()).map_err(internal)?;
            }
        }
        Format::Text => {
            for e in &result.estimates {
                writeln!(
                    w,
                    "{}: {} per 100 people, {}{}",
                    e.model,
                    per100(e.value),
                    e.unit.label(),
                    ci_text(e.ci.as_ref())
                )
                .map_err(internal)?;
            }
            if let Some(v) = result.treat_all {
                writeln!(w, "treat all: {} per 100 people", per100(v)).map_err(internal)?;
            }
        }
    }
    w.flush().map_err(internal)
}

#[derive(Serialize)]
struct Comparison {
    model1: String,
    model2: String,
    difference: f64,
    ci: Option<ConfidenceInterval>,
    note: Option<&'static str>,
}

const LIKELIHOOD_NOTE: &str = "equals per-capita log-likelihood difference";

pub fn compare(a: &CompareArgs) -> Result<(), CliError> {
    let ds = load_dataset(&a.input)?;
    let (m1, m2) = model_pair(&ds, a.models.as_deref())?;
    let cfg = quad_config(&a.weights)?;
    let spec = weight_spec(&a.weights, &cfg)?;
    let difference = cnb_difference(&ds, &m1, &m2, &spec, &cfg)?;
    let ci = match bootstrap_config(&a.bootstrap)? {
        Some(b) => {
            let stat = statistic("difference", |d: &EvaluationDataset| {
                cnb_difference(d, &m1, &m2, &spec, &cfg)
            });
            Some(bootstrap_ci(&stat, &ds, &b)?.ci)
        }
        None => None,
    };
    let note = match (&spec, cfg.epsilon) {
        (WeightSpec::Uniform { level }, None) if *level == 1.0 => Some(LIKELIHOOD_NOTE),
        _ => None,
    };
    let c = Comparison {
        model1: m1,
        model2: m2,
        difference,
        ci,
        note,
    };
    let mut w = open(&a.out)?;
    match a.out.format {
        Format::Json => json(&mut *w, "compare", a, &c)?,
        Format::Csv => {
            let (lo, hi) = c.ci.as_ref().map_or((String::new(), String::new()), |ci| {
                (ci.lower.to_string(), ci.upper.to_string())
            });
            writeln!(w, "model1,model2,difference,lower,upper").map_err(internal)?;
            writeln!(w, "{},{},{},{lo},{hi}", c.model1, c.model2, c.difference).map_err(internal)?;
        }
        Format::Text => {
            writeln!(
                w,
                "{} - {}: {} per 100 people{}",
                c.model1,
                c.model2,
                per100(c.difference),
                ci_text(c.ci.as_ref())
            )
            .map_err(internal)?;
            if let Some(n) = c.note {
                writeln!(w, "note: {n}").map_err(internal)?;
            }
        }
    }
    w.flush().map_err(internal)
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OracleConfig {
    pub generator: GeneratorConfig,
    pub witness: WitnessSearch,
    pub two_group: TwoGroupConfig,
}

#[derive(Serialize)]
struct TwoGroupView {
    groups: [GroupSummary; 2],
    weight_ratio: f64,
    /// Harmonic weights times group shares, computed from the utilities.
    expected_ratio: f64,
    delta_utility: f64,
    g2_share: f64,
    expected_nb: Option<[f64; 2]>,
}

#[derive(Serialize)]
struct OracleReport {
    config: OracleConfig,
    verification: VerificationReport,
    witness_searched: bool,
    witness: Option<Witness>,
    two_group: Option<TwoGroupView>,
    pass: bool,
}

pub fn oracle(a: &OracleArgs) -> Result<(), CliError> {
    let mut config: OracleConfig = match &a.config {
        Some(p) => read_json(p)?,
        None => OracleConfig::default(),
    };
    if let Some(n) = a.n {
        config.generator.n = n;
    }
    if let Some(s) = a.seed {
        config.generator.seed = s;
        config.witness.seed = s;
        config.two_group.seed = s;
    }
    if let Some(s) = a.g1_scale {
        config.two_group.g1_scale = s;
    }
    if let Some(s) = a.g2_scale {
        config.two_group.g2_scale = s;
    }
    let (mode, tolerance) = match a.mode {
        OracleMode::Exhaustive => (VerifyMode::Exhaustive, a.tolerance.unwrap_or(1e-9)),
        OracleMode::MonteCarlo => (
            VerifyMode::MonteCarlo {
                draws: a.draws,
                seed: config.generator.seed,
                z: a.z,
            },
            a.tolerance.unwrap_or(0.0),
        ),
    };
    if mode == VerifyMode::Exhaustive && config.generator.n > netbenefit::oracle::MAX_EXHAUSTIVE {
        return Err(CliError::Usage(format!(
            "exhaustive mode supports at most {} individuals, got {}; use --mode monte-carlo",
            netbenefit::oracle::MAX_EXHAUSTIVE,
            config.generator.n
        )));
    }
    let pop = generate_population(&config.generator)?;
    let models = pop.models();
    if models.len() < 2 {
        return Err(CliError::Usage("the generator needs two score models".into()));
    }
    let verification = verify_expected_nb(&pop, &models[0], &models[1], mode, tolerance)?;
    let witness = if a.witness {
        aunb_disagreement_witness(&config.witness)?
    } else {
        None
    };
    let two_group = if a.two_group {
        let r = two_group_scenario(&config.two_group)?;
        let [g1, g2] = &r.groups;
        Some(TwoGroupView {
            expected_ratio: (g2.density * g2.harmonic_weight) / (g1.density * g1.harmonic_weight),
            weight_ratio: r.weight_ratio,
            delta_utility: r.delta_utility,
            g2_share: r.g2_share,
            expected_nb: r.expected_nb,
            groups: r.groups,
        })
    } else {
        None
    };
    let pass = verification.pass;
    let report = OracleReport {
        config,
        verification,
        witness_searched: a.witness,
        witness,
        two_group,
        pass,
    };

    let mut w = open(&a.out)?;
    match a.out.format {
        Format::Json | Format::Csv => json(&mut *w, "oracle", a, &report)?,
        Format::Text => oracle_text(&mut *w, &report).map_err(internal)?,
    }
    w.flush().map_err(internal)?;
    if pass {
        Ok(())
    } else {
        Err(CliError::Check(format!(
            "expected net benefit disagrees with the brute-force average by {:e}",
            report.verification.abs_diff
        )))
    }
}

fn oracle_text(w: &mut dyn Write, r: &OracleReport) -> std::io::Result<()> {
    let v = &r.verification;
    writeln!(
        w,
        "{}: {} vs {}, n = {}, {} permutations",
        if v.pass { "PASS" } else { "FAIL" },
        v.model1,
        v.model2,
        v.n,
        v.permutations
    )?;
    writeln!(w, "  mean brute-force utility difference {:.12}", v.mean_delta_utility)?;
    writeln!(w, "  expected net benefit difference     {:.12}", v.delta_expected_nb)?;
    write!(w, "  |gap| = {:.3e}", v.abs_diff)?;
    match v.standard_error {
        Some(se) => writeln!(w, " ({:.2} standard errors, SE {:.3e})", v.abs_diff / se, se)?,
        None => writeln!(w, " (tolerance {:e})", v.tolerance)?,
    }
    if r.witness_searched {
        match &r.witness {
            Some(wt) => {
                writeln!(w, "witness ({} search, {} candidates):", wt.stage, wt.candidates_examined)?;
                writeln!(w, "  outcomes {:?}", wt.outcomes)?;
                for (m, s) in wt.models.iter().zip(&wt.scores) {
                    writeln!(w, "  {m} scores {s:?}")?;
                }
                writeln!(w, "  density {}", serde_json::to_string(&wt.density).unwrap_or_default())?;
                writeln!(
                    w,
                    "  AUNB     {:.6} vs {:.6}, margin {:+.6}",
                    wt.aunb[0], wt.aunb[1], wt.margins.aunb
                )?;
                writeln!(
                    w,
                    "  AUNB_alt {:.6} vs {:.6}, margin {:+.6}",
                    wt.aunb_alt[0], wt.aunb_alt[1], wt.margins.aunb_alt
                )?;
            }
            None => writeln!(w, "witness: none found within the search budget")?,
        }
    }
    if let Some(t) = &r.two_group {
        writeln!(w, "two groups:")?;
        writeln!(
            w,
            "  {:<5} {:>9} {:>12} {:>12} {:>8} {:>10} {:>12} {:>14}",
            "group", "threshold", "a - c", "d - b", "share", "harmonic", "weight", "delta utility"
        )?;
        for g in &t.groups {
            writeln!(
                w,
                "  {:<5} {:>9.4} {:>12.6} {:>12.6} {:>8} {:>10} {:>12} {:>14.6e}",
                g.name, g.threshold, g.tp_benefit, g.fp_harm, g.density, g.harmonic_weight, g.weight, g.delta_utility
            )?;
        }
        writeln!(w, "  weight ratio G2/G1 {:.6} (from utilities {:.6})", t.weight_ratio, t.expected_ratio)?;
        writeln!(w, "  G2 share of the brute-force utility difference {:.6}", t.g2_share)?;
    }
    Ok(())
}

#[derive(Serialize)]
struct Combined {
    policy: String,
    effect_ratio: f64,
    value: f64,
}

#[derive(Serialize)]
struct DemoOutput {
    report: DemoReport,
    combined: Option<Vec<Combined>>,
}

pub fn demo(a: &DemoArgs) -> Result<(), CliError> {
    let mut cfg: DemoConfig = match &a.config {
        Some(p) => read_json(p)?,
        None => DemoConfig::default(),
    };
    if let Some(s) = a.seed {
        cfg.cohort.seed = s;
    }
    if let Some(n) = a.n {
        cfg.cohort.n = n;
    }
    if let Some(n) = a.validation_n {
        cfg.validation_n = n;
    }
    let replicates = |b: usize, base: Option<BootstrapConfig>, seed: u64| {
        (b > 0).then(|| BootstrapConfig {
            replicates: b,
            ..base.unwrap_or(BootstrapConfig::new(b, 0.95, seed))
        })
    };
    if let Some(b) = a.bootstrap {
        cfg.bootstrap = replicates(b, cfg.bootstrap, 20_240_101);
    }
    if let Some(b) = a.optimism {
        cfg.optimism = replicates(b, cfg.optimism, 20_240_102);
    }
    let report = run_demo(&cfg)?;
    let combined = match a.effect_ratio {
        Some(ratio) => Some(
            report
                .statins
                .rows
                .iter()
                .zip(&report.lifestyle.rows)
                .map(|(s, l)| {
                    Ok(Combined {
                        policy: s.policy.clone(),
                        effect_ratio: ratio,
                        value: combine_decisions(s.value, l.value, ratio)?,
                    })
                })
                .collect::<Result<Vec<_>, netbenefit::Error>>()?,
        ),
        None => None,
    };
    let out = DemoOutput { report, combined };
    let mut w = open(&a.out)?;
    match a.out.format {
        Format::Json | Format::Csv => json(&mut *w, "demo", a, &out)?,
        Format::Text => demo_text(&mut *w, &out).map_err(internal)?,
    }
    w.flush().map_err(internal)
}

fn table_text(w: &mut dyn Write, t: &DemoTable) -> std::io::Result<()> {
    writeln!(w, "{} ({} per 100 people)", t.name, t.unit)?;
    for r in &t.rows {
        writeln!(w, "  {:<10} {:>9}{}", r.policy, per100(r.value), ci_text(r.ci.as_ref()))?;
    }
    Ok(())
}

fn demo_text(w: &mut dyn Write, o: &DemoOutput) -> std::io::Result<()> {
    let r = &o.report;
    writeln!(
        w,
        "development n = {}, prevalence {:.4}; validation n = {}, prevalence {:.4}",
        r.config.cohort.n, r.development_prevalence, r.config.validation_n, r.validation_prevalence
    )?;
    table_text(w, &r.statins)?;
    table_text(w, &r.lifestyle)?;
    table_text(w, &r.expected_nb)?;
    if !r.optimism.is_empty() {
        writeln!(w, "lifestyle optimism on the development cohort (per 100 people)")?;
        for (name, opt) in &r.optimism {
            writeln!(
                w,
                "  {:<10} apparent {:>9}  optimism {:>9}  corrected {:>9}",
                name,
                per100(opt.apparent),
                per100(opt.mean_optimism),
                per100(opt.corrected)
            )?;
        }
    }
    if let Some(c) = &o.combined {
        writeln!(w, "statins + ratio x lifestyle (per 100 people)")?;
        for row in c {
            writeln!(w, "  {:<10} {:>9}", row.policy, per100(row.value))?;
        }
    }
    Ok(())
}
