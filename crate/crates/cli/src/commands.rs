use krylov_core::catalog::parameter_samples;
use krylov_core::dynamics::{heisenberg_deviation, krylov_profile, ProfileMeta};
use krylov_core::lanczos_chain::{catalog_moments, hankel_check, moments_to_lanczos, ChainReport, Classification};
use krylov_core::moments::{default_tail_tol, moments_theorem2, MomentTable};
use krylov_core::operator_space::{build_energy_rep, Frame, InnerProductKind};
use krylov_core::verification::{
    dynamics_bound, krylov_setup, render_table, truncated_heisenberg_deviation, verify_system, CheckResult,
    VerifyOptions,
};
use krylov_core::{Execution, Scalar, SystemKind};
use serde::Serialize;

use crate::config::{Format, Resolved, RunConfig};

/// Report text plus whether every check it contains passed.
pub struct Outcome {
    pub report: String,
    pub passed: bool,
    /// Printed to stdout even when the report goes to a file.
    pub console: Option<String>,
}

impl Outcome {
    fn ok(report: String) -> Outcome {
        Outcome {
            report,
            passed: true,
            console: None,
        }
    }
}

const DIGITS_OUT: usize = 30;

fn with_config(config: &RunConfig, key: &str, body: serde_json::Value) -> String {
    let mut j = serde_json::json!({ "config": config.to_json() });
    j[key] = body;
    let mut s = serde_json::to_string_pretty(&j).expect("json");
    s.push('\n');
    s
}

fn csv_text(rows: Vec<Vec<String>>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.write_record(&r).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("flush")).expect("utf8")
}

pub fn list_systems(format: Format) -> Outcome {
    #[derive(Serialize)]
    struct Row {
        name: &'static str,
        class: &'static str,
        discrete: bool,
        params: Vec<&'static str>,
        default_sample: String,
    }
    let mut kinds = SystemKind::ALL.to_vec();
    kinds.sort_by_key(|k| k.name());
    let rows: Vec<Row> = kinds
        .into_iter()
        .map(|k| {
            let n = k.is_finite().then_some(crate::config::DEFAULT_SIZE);
            let sample = parameter_samples(k, n).remove(0);
            let mut d: Vec<String> = sample.iter().map(|(a, b)| format!("{a}={b}")).collect();
            if let Some(n) = n {
                d.insert(0, format!("N={n}"));
            }
            Row {
                name: k.name(),
                class: if k.is_finite() { "finite" } else { "infinite" },
                discrete: k.is_discrete(),
                params: k.param_names().to_vec(),
                default_sample: d.join(" "),
            }
        })
        .collect();
    let report = match format {
        Format::Json => serde_json::to_string_pretty(&rows).expect("json") + "\n",
        Format::Csv => {
            let mut out = vec![vec![
                "name".into(),
                "class".into(),
                "discrete".into(),
                "params".into(),
                "default_sample".into(),
            ]];
            for r in &rows {
                out.push(vec![
                    r.name.into(),
                    r.class.into(),
                    r.discrete.to_string(),
                    r.params.join(" "),
                    r.default_sample.clone(),
                ]);
            }
            csv_text(out)
        }
    };
    Outcome::ok(report)
}

fn moment_table(res: &Resolved) -> Result<MomentTable, String> {
    let spec = &res.spec;
    let k = res.config.k;
    match &res.beta {
        None => catalog_moments(spec, &InnerProductKind::Trace, k).map_err(|e| e.to_string()),
        Some(beta) => {
            let tol = match &res.tail_tol {
                Some(t) => t.to_mode(spec.mode()).map_err(|e| e.to_string())?,
                None => default_tail_tol(spec.mode()),
            };
            moments_theorem2(spec, k, beta, &tol).map_err(|e| e.to_string())
        }
    }
}

pub fn moments(res: &Resolved) -> Result<Outcome, String> {
    let t = moment_table(res)?;
    Ok(Outcome::ok(match res.config.format {
        Format::Csv => res.config.csv_header() + &t.to_csv(),
        Format::Json => with_config(&res.config, "moments", t.to_json()),
    }))
}

pub fn lanczos(res: &Resolved) -> Result<Outcome, String> {
    let t = moment_table(res)?;
    let b = moments_to_lanczos(&t).map_err(|e| e.to_string())?;
    let class = Classification::from_stop(b.stop_index, res.config.k);
    let hankel = (b.len() >= 2 || b.stop_index.is_some())
        .then(|| hankel_check(&t, &b, 2).ok())
        .flatten();
    let report = ChainReport::new(&b, class, hankel.as_ref());
    Ok(Outcome::ok(match res.config.format {
        Format::Json => with_config(&res.config, "lanczos", serde_json::to_value(&report).expect("json")),
        Format::Csv => {
            let mut s = res.config.csv_header();
            s.push_str(&format!("# classification={}\n", report.classification));
            if let Some(h) = &report.hankel {
                s.push_str(&format!("# hankel_n={} lhs={} rhs={}\n", h.n, h.lhs, h.rhs));
            }
            let mut rows = vec![vec!["k".to_string(), "b_k_squared".to_string()]];
            rows.extend(
                report
                    .b_squared
                    .iter()
                    .enumerate()
                    .map(|(i, v)| vec![(i + 1).to_string(), v.clone()]),
            );
            s + &csv_text(rows)
        }
    }))
}

pub fn complexity(res: &Resolved, exec: Execution) -> Result<Outcome, String> {
    let (rep, ip, chain) = krylov_setup(&res.spec, res.beta.as_ref(), res.config.n_max)?;
    let profile = krylov_profile(&chain, &rep.h, &ip, &res.times, exec).map_err(|e| e.to_string())?;
    let meta = ProfileMeta {
        system: res.spec.label(),
        inner_product: ip.kind().label(),
        precision: Some(res.config.precision),
    };
    Ok(Outcome::ok(match res.config.format {
        Format::Csv => res.config.csv_header() + &profile.to_csv(&meta, DIGITS_OUT),
        Format::Json => with_config(&res.config, "profile", profile.to_json(&meta, DIGITS_OUT)),
    }))
}

pub fn heisenberg_check(res: &Resolved) -> Result<Outcome, String> {
    let spec = &res.spec;
    let devs: Vec<Scalar> = if spec.is_finite() {
        heisenberg_deviation(spec, &res.times).map_err(|e| e.to_string())?
    } else {
        let n = match res.config.n_max {
            Some(n) => n,
            None => {
                let beta = res.beta.as_ref().expect("validated");
                let t = moments_theorem2(spec, 1, beta, &default_tail_tol(spec.mode())).map_err(|e| e.to_string())?;
                t.truncation.map_or(20, |t| t.n_max + 1).max(2)
            }
        };
        let rep = build_energy_rep(spec, n, Frame::Symmetric).map_err(|e| e.to_string())?;
        truncated_heisenberg_deviation(spec, &rep, &res.times)?
    };
    let bound = dynamics_bound(spec.mode());
    let passed = devs.iter().all(|d| *d < bound);
    let fmt = |x: &Scalar| x.to_string_sig(6);
    let report = match res.config.format {
        Format::Json => with_config(
            &res.config,
            "heisenberg",
            serde_json::json!({
                "bound": fmt(&bound),
                "passed": passed,
                "times": res.times.iter().map(|t| t.to_string_sig(DIGITS_OUT)).collect::<Vec<_>>(),
                "max_deviation": devs.iter().map(fmt).collect::<Vec<_>>(),
            }),
        ),
        Format::Csv => {
            let mut s = res.config.csv_header();
            s.push_str(&format!("# bound={}\n", fmt(&bound)));
            let mut rows = vec![vec!["t".to_string(), "max_deviation".to_string(), "status".to_string()]];
            for (t, d) in res.times.iter().zip(&devs) {
                rows.push(vec![
                    t.to_string_sig(DIGITS_OUT),
                    fmt(d),
                    if *d < bound { "PASS".into() } else { "FAIL".into() },
                ]);
            }
            s + &csv_text(rows)
        }
    };
    Ok(Outcome {
        report,
        passed,
        console: None,
    })
}

/// One system's suite result, ready for rendering.
pub struct SystemChecks {
    pub label: String,
    pub config: RunConfig,
    pub checks: Vec<CheckResult>,
}

pub fn run_checks(res: &Resolved) -> SystemChecks {
    let mut opts = VerifyOptions::new(res.beta.clone(), res.config.k, res.config.precision);
    opts.execution = Execution::Sequential;
    SystemChecks {
        label: res.spec.label(),
        config: res.config.clone(),
        checks: verify_system(&res.spec, &opts),
    }
}

pub fn verify_report(results: &[SystemChecks], format: Format) -> Outcome {
    let passed = results.iter().all(|r| r.checks.iter().all(|c| c.passed));
    let console: String = results
        .iter()
        .map(|r| render_table(&r.label, &r.checks))
        .collect::<Vec<_>>()
        .join("\n");
    let report = match format {
        Format::Json => {
            let items: Vec<serde_json::Value> = results
                .iter()
                .map(|r| {
                    serde_json::json!({
                        "config": r.config.to_json(),
                        "system": r.label,
                        "checks": r.checks,
                    })
                })
                .collect();
            serde_json::to_string_pretty(&serde_json::json!({ "passed": passed, "systems": items })).expect("json")
                + "\n"
        }
        Format::Csv => {
            let mut s = String::new();
            for r in results {
                s.push_str(&r.config.csv_header());
            }
            let mut rows = vec![vec![
                "system".to_string(),
                "check".into(),
                "expected".into(),
                "got".into(),
                "status".into(),
            ]];
            for r in results {
                for c in &r.checks {
                    rows.push(vec![
                        r.label.clone(),
                        c.name.clone(),
                        c.expected.clone(),
                        c.got.clone(),
                        c.status().into(),
                    ]);
                }
            }
            s + &csv_text(rows)
        }
    };
    Outcome {
        report,
        passed,
        console: Some(console),
    }
}
