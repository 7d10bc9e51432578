use std::collections::BTreeMap;
use std::fs;

use freeconv::brown::{fk_det, fk_det_lu, hl_from_moments, hl_radial, STransformEvaluator};
use freeconv::catalog::{linear_grid, DistributionSpec};
use freeconv::convolve::{
    compress, compress_rescaled, free_add, free_mul, product_support_spec, semigroup_mu_t, ConvolutionResult,
};
use freeconv::linalg::{ComplexMatrix, MatrixJson};
use freeconv::ncpart::{
    enumerate_nc, enumerate_nc_pairings, geodesic_test, kreweras, mobius_nc, pairing_genus, pairing_times_gamma,
    refines, Permutation, SetPartition,
};
use freeconv::repro::{run_suite, ReproOptions, SuiteReport, SUITES};
use freeconv::rmtlab::{
    ecdf_sup_distance, exact_prediction, genus_census, gue_spectra, mc_trace, DeterministicMatrix, EnsembleConfig,
    Histogram, TraceWord,
};
use freeconv::series::{self, CumulantSequence, MomentSequence, TruncatedSeries, DEFAULT_ORDER};
use num_complex::Complex64;
use serde_json::{json, Value};

use crate::args::{BrownCommand, Command, ConvolveCommand, Ensemble, McCommand, NcCommand, SeriesKind};
use crate::CliError;

/// Seed used by Monte Carlo commands when neither `--seed` nor FREECONV_SEED is set.
pub const DEFAULT_SEED: u64 = 42;

/// What a command produced, before it is wrapped and written.
pub enum Output {
    Json {
        payload: Value,
        /// Itemized failed checks; a nonempty list makes the process exit 1.
        failures: Vec<String>,
    },
    Csv {
        meta: Value,
        columns: &'static str,
        rows: Vec<String>,
    },
}

impl Output {
    fn json(payload: Value) -> Self {
        Output::Json {
            payload,
            failures: Vec::new(),
        }
    }
}

type Res<T> = std::result::Result<T, CliError>;

pub fn execute(cmd: &Command, seed: Option<u64>) -> Res<Output> {
    match cmd {
        Command::Nc(c) => nc(c),
        Command::Transform(a) => transform(&a.input, a.from, a.to, a.order),
        Command::Cumulants(a) => cumulants(&a.input, a.order),
        Command::Catalog(a) => catalog(&a.name, &a.params, a.grid.as_deref(), a.eps, a.order),
        Command::Convolve(c) => convolve(c),
        Command::Mc(c) => mc(c, seed.unwrap_or(DEFAULT_SEED)),
        Command::Brown(c) => brown(c),
        Command::Repro(a) => repro(
            &a.suite,
            &ReproOptions {
                seed,
                reps: a.reps,
                n: a.n,
                dim: a.dim,
            },
        ),
    }
}

/// The argument itself, or the contents of the file it names after `@`.
fn read_arg(s: &str) -> Res<String> {
    match s.strip_prefix('@') {
        Some(path) => fs::read_to_string(path).map_err(|e| CliError::Input(format!("cannot read {path}: {e}"))),
        None => Ok(s.to_string()),
    }
}

fn parse_json<T: serde::de::DeserializeOwned>(text: &str, what: &str) -> Res<T> {
    serde_json::from_str(text).map_err(|e| CliError::Input(format!("bad {what}: {e}")))
}

fn spec(s: &str) -> Res<DistributionSpec> {
    Ok(s.parse()?)
}

/// A catalog law or a JSON list `[m1, ..., mM]`, labelled for the report.
fn moments_input(input: &str, order: Option<usize>) -> Res<(String, MomentSequence)> {
    let text = read_arg(input)?;
    let t = text.trim();
    if t.starts_with('[') {
        let m: Vec<f64> = parse_json(t, "moment list")?;
        let m = truncate_list(m, order)?;
        return Ok(("moment list".into(), MomentSequence::new(m)));
    }
    let law = spec(t)?;
    let m = law.moment_table(series::validate_order(order.unwrap_or(DEFAULT_ORDER))?)?;
    Ok((law.to_string(), m))
}

fn truncate_list(mut v: Vec<f64>, order: Option<usize>) -> Res<Vec<f64>> {
    if let Some(k) = order {
        if k > v.len() {
            return Err(CliError::Input(format!("--order {k} exceeds the {} values given", v.len())));
        }
        v.truncate(k);
    }
    if v.is_empty() {
        return Err(CliError::Input("empty input".into()));
    }
    Ok(v)
}

fn partition(s: &str) -> Res<SetPartition> {
    Ok(s.parse()?)
}

fn nc(cmd: &NcCommand) -> Res<Output> {
    let payload = match cmd {
        NcCommand::Enumerate { n, pairings } => {
            let list = if *pairings {
                enumerate_nc_pairings(*n)
            } else {
                enumerate_nc(*n)?
            };
            json!({
                "n": n,
                "pairings": pairings,
                "count": list.len(),
                "partitions": list.iter().map(ToString::to_string).collect::<Vec<_>>(),
            })
        }
        NcCommand::Kreweras { partition: p } => {
            let p = partition(p)?;
            let k = kreweras(&p)?;
            json!({
                "partition": p.to_string(),
                "noncrossing": p.is_noncrossing(),
                "kreweras": k.to_string(),
                "kreweras_squared": kreweras(&k)?.to_string(),
                "blocks": p.block_count(),
                "kreweras_blocks": k.block_count(),
            })
        }
        NcCommand::Mobius { a, b } => {
            let (a, b) = (partition(a)?, partition(b)?);
            json!({
                "a": a.to_string(),
                "b": b.to_string(),
                "refines": refines(&a, &b)?,
                "mobius": mobius_nc(&a, &b)?,
            })
        }
        NcCommand::Genus { pairing } => {
            let p = partition(pairing)?;
            let pg = pairing_times_gamma(&p)?;
            json!({
                "pairing": p.to_string(),
                "pi_gamma": pg.to_string(),
                "cycles": pg.cycle_count(),
                "genus": pairing_genus(&p)?,
            })
        }
        NcCommand::Perm { permutation } => {
            let s: Permutation = permutation.parse()?;
            json!({
                "permutation": s.to_string(),
                "n": s.n(),
                "cycles": s.cycles(),
                "cycle_type": s.cycle_type().to_string(),
                "length": s.length(),
                "geodesic": geodesic_test(&s),
            })
        }
        NcCommand::Census { n } => {
            let census: BTreeMap<String, u64> =
                genus_census(*n)?.into_iter().map(|(g, c)| (g.to_string(), c)).collect();
            json!({ "n": n, "by_genus": census })
        }
    };
    Ok(Output::json(payload))
}

enum Transformable {
    Moments(MomentSequence),
    Cumulants(CumulantSequence),
    R(TruncatedSeries),
    S(TruncatedSeries),
}

impl Transformable {
    fn to_json(&self) -> Value {
        match self {
            Transformable::Moments(m) => json!(tidy(m.as_slice())),
            Transformable::Cumulants(k) => json!(tidy(k.as_slice())),
            Transformable::R(s) | Transformable::S(s) => json!(s),
        }
    }
}

fn series_input(text: &str, order: Option<usize>) -> Res<TruncatedSeries> {
    let s: TruncatedSeries = if text.starts_with('{') {
        parse_json(text, "series")?
    } else {
        TruncatedSeries::new(parse_json(text, "coefficient list")?)?
    };
    match order {
        Some(k) if k > s.order() => Err(CliError::Input(format!(
            "--order {k} exceeds the series order {}",
            s.order()
        ))),
        Some(k) => Ok(s.truncate(k)),
        None => Ok(s),
    }
}

fn transform(input: &str, from: SeriesKind, to: SeriesKind, order: Option<usize>) -> Res<Output> {
    let text = read_arg(input)?;
    let t = text.trim();
    let is_json = t.starts_with('[') || t.starts_with('{');
    let (label, value) = match from {
        SeriesKind::Moments => {
            let (label, m) = moments_input(t, order)?;
            (label, Transformable::Moments(m))
        }
        _ if !is_json => {
            return Err(CliError::Input(
                "a catalog law supplies moments; use --from moments".into(),
            ))
        }
        SeriesKind::Cumulants => {
            let k = truncate_list(parse_json(t, "cumulant list")?, order)?;
            ("cumulant list".into(), Transformable::Cumulants(CumulantSequence::new(k)))
        }
        SeriesKind::R => ("R series".into(), Transformable::R(series_input(t, order)?)),
        SeriesKind::S => ("S series".into(), Transformable::S(series_input(t, order)?)),
    };
    let r_of = |v: &Transformable| -> Res<TruncatedSeries> {
        Ok(match v {
            Transformable::Moments(m) => series::moments_to_r(m)?,
            Transformable::Cumulants(k) => k.to_r_series(),
            Transformable::R(r) => r.clone(),
            Transformable::S(s) => series::r_from_s(s)?,
        })
    };
    let out = match (to, &value) {
        (SeriesKind::Moments, Transformable::Moments(m)) => Transformable::Moments(m.clone()),
        (SeriesKind::Moments, Transformable::S(s)) => Transformable::Moments(series::s_to_moments(s)?),
        (SeriesKind::Moments, v) => Transformable::Moments(series::r_to_moments(&r_of(v)?)?),
        (SeriesKind::Cumulants, v) => Transformable::Cumulants(CumulantSequence::from_r_series(&r_of(v)?)),
        (SeriesKind::R, v) => Transformable::R(r_of(v)?),
        (SeriesKind::S, Transformable::Moments(m)) => Transformable::S(series::moments_to_s(m)?),
        (SeriesKind::S, Transformable::S(s)) => Transformable::S(s.clone()),
        (SeriesKind::S, v) => Transformable::S(series::s_from_r(&r_of(v)?)?),
    };
    Ok(Output::json(json!({
        "input": label,
        "from": from,
        "to": to,
        "source": value.to_json(),
        "result": out.to_json(),
    })))
}

fn cumulants(input: &str, order: Option<usize>) -> Res<Output> {
    let (label, m) = moments_input(input, order)?;
    let (k, err) = freeconv::repro::cumulant_report(&m)?;
    Ok(Output::json(json!({
        "input": label,
        "moments": tidy(m.as_slice()),
        "cumulants": tidy(k.as_slice()),
        "route_agreement_error": err,
    })))
}

/// `lo:hi:n` with `lo < hi` and `n ≥ 2`.
pub fn parse_grid(s: &str) -> Res<(f64, f64, usize)> {
    let bad = || CliError::Input(format!("grid must be lo:hi:n, got {s:?}"));
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 3 {
        return Err(bad());
    }
    let lo: f64 = parts[0].trim().parse().map_err(|_| bad())?;
    let hi: f64 = parts[1].trim().parse().map_err(|_| bad())?;
    let n: usize = parts[2].trim().parse().map_err(|_| bad())?;
    if !(lo.is_finite() && hi.is_finite() && lo < hi) || n < 2 {
        return Err(CliError::Input(format!("grid needs finite lo < hi and n ≥ 2, got {s:?}")));
    }
    Ok((lo, hi, n))
}

fn catalog(name: &str, params: &[String], grid: Option<&str>, eps: f64, order: usize) -> Res<Output> {
    let mut full = name.trim().to_string();
    if !params.is_empty() {
        full.push(if full.contains(':') { ',' } else { ':' });
        full.push_str(&params.join(","));
    }
    let law = spec(&full)?;
    let (lo, hi, n) = match grid {
        Some(g) => parse_grid(g)?,
        None => {
            let (a, b) = law.support();
            if a.is_finite() && b.is_finite() {
                let pad = if b > a { 0.1 * (b - a) } else { 1.0 };
                (a - pad, b + pad, 201)
            } else {
                (-10.0, 10.0, 201)
            }
        }
    };
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(CliError::Input(format!("--eps must be positive, got {eps}")));
    }
    let moments = if law.is_heavy_tailed() {
        None
    } else {
        Some(law.moment_table(order)?)
    };
    let rows = linear_grid(lo, hi, n)
        .into_iter()
        .map(|x| {
            let g = law.cauchy_transform(Complex64::new(x, eps));
            format!("{x},{},{},{}", law.density(x), g.re, g.im)
        })
        .collect();
    Ok(Output::Csv {
        meta: json!({
            "law": law.to_string(),
            "atoms": law.atoms(),
            "moments": moments,
            "eps": eps,
            "grid": [lo, hi, n],
        }),
        columns: "x,density,G_re,G_im",
        rows,
    })
}

// -0.0 prints as "-0.0"; adding +0.0 maps it to 0.0 and leaves everything else alone
fn tidy(v: &[f64]) -> Vec<f64> {
    v.iter().map(|x| x + 0.0).collect()
}

fn convolution_payload(inputs: Value, order: usize, r: &ConvolutionResult) -> Res<Value> {
    Ok(json!({
        "inputs": inputs,
        "order": order,
        "moments": tidy(r.moments.as_slice()),
        "cumulants": tidy(r.cumulants.as_slice()),
        "diagnostics": {
            "provenance": r.provenance,
            "residual": r.residual()?,
        },
    }))
}

fn convolve(cmd: &ConvolveCommand) -> Res<Output> {
    let payload = match cmd {
        ConvolveCommand::Add(p) | ConvolveCommand::Mul(p) => {
            let order = series::validate_order(p.order)?;
            let (la, a) = moments_input(&p.a, Some(order))?;
            let (lb, b) = moments_input(&p.b, Some(order))?;
            let r = match cmd {
                ConvolveCommand::Add(_) => free_add(&a, &b, order)?,
                _ => free_mul(&a, &b, order)?,
            };
            convolution_payload(json!([la, lb]), order, &r)?
        }
        ConvolveCommand::Compress {
            spec: s,
            t,
            rescale,
            order,
        } => {
            let order = series::validate_order(*order)?;
            let (label, m) = moments_input(s, Some(order))?;
            let r = if *rescale {
                compress_rescaled(&m, *t, order)?
            } else {
                compress(&m, *t, order)?
            };
            let mut p = convolution_payload(json!([label]), order, &r)?;
            p["t"] = json!(t);
            p["rescaled"] = json!(rescale);
            p
        }
        ConvolveCommand::Semigroup { spec: s, t, order } => {
            let order = series::validate_order(*order)?;
            let (label, m) = moments_input(s, Some(order))?;
            let mut p = convolution_payload(json!([label]), order, &semigroup_mu_t(&m, *t, order)?)?;
            p["t"] = json!(t);
            p
        }
        ConvolveCommand::ProductSupport { spec: s, n } => {
            let law = spec(s)?;
            json!({ "input": law.to_string(), "support": product_support_spec(&law, *n)? })
        }
    };
    Ok(Output::json(payload))
}

/// `spec:<law>` (or a bare law name) quantiles, `diag:x1,...`, `identity`, `signs`.
fn deterministic(s: &str, n: usize) -> Res<DeterministicMatrix> {
    let s = s.trim();
    match s {
        "identity" => return Ok(DeterministicMatrix::identity(n)),
        "signs" => return Ok(DeterministicMatrix::balanced_signs(n)),
        _ => {}
    }
    if let Some(list) = s.strip_prefix("diag:") {
        let d = list
            .split(',')
            .map(|t| t.trim().parse::<f64>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|_| CliError::Input(format!("bad diagonal {s:?}")))?;
        if d.len() != n {
            return Err(CliError::Input(format!("diagonal has {} entries, N = {n}", d.len())));
        }
        return Ok(DeterministicMatrix::Diagonal(d));
    }
    Ok(DeterministicMatrix::from_quantiles(&spec(s)?, n)?)
}

fn mc(cmd: &McCommand, seed: u64) -> Res<Output> {
    match cmd {
        McCommand::Trace {
            word,
            n,
            reps,
            d1,
            d2,
            d3,
            d4,
        } => {
            let w: TraceWord = word.parse()?;
            let given = [d1, d2, d3, d4];
            let count = given.iter().rposition(|d| d.is_some()).map_or(0, |i| i + 1);
            let ds = given[..count]
                .iter()
                .enumerate()
                .map(|(i, d)| match d {
                    Some(d) => deterministic(d, *n),
                    None => Err(CliError::Input(format!("--d{} is missing", i + 1))),
                })
                .collect::<Res<Vec<_>>>()?;
            let cfg = EnsembleConfig::new(*n, *reps, seed)?.with_deterministic(ds)?;
            let prediction = exact_prediction(&w, &cfg)?;
            let est = mc_trace(&w, &cfg)?;
            let z = match &prediction {
                Some(p) if est.stderr > 0.0 => Some((est.mean - p.value) / est.stderr),
                _ => None,
            };
            Ok(Output::json(json!({
                "word": w.to_string(),
                "N": n,
                "reps": est.reps,
                "seed": est.seed,
                "mean": est.mean,
                "stderr": est.stderr,
                "exact_prediction": prediction.as_ref().map(|p| p.value),
                "prediction_kind": prediction.as_ref().map(|p| p.kind),
                "z": z,
            })))
        }
        McCommand::Spectrum { ensemble, n, bins, reps } => {
            if *reps == 0 {
                return Err(CliError::Input("--reps must be positive".into()));
            }
            let mut eig = gue_spectra(*n, *reps, seed)?;
            let target: DistributionSpec = match ensemble {
                Ensemble::Gue => spec("semicircle")?,
                Ensemble::Wishart => {
                    eig.iter_mut().for_each(|x| *x *= *x);
                    spec("marchenko-pastur:lambda=1")?
                }
            };
            let lo = eig.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = eig.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let hist = Histogram::from_values(&eig, *bins, lo, hi)?;
            let rows = hist
                .bin_centers()
                .iter()
                .zip(&hist.counts)
                .zip(&hist.density)
                .map(|((x, c), d)| format!("{x},{c},{d}"))
                .collect();
            Ok(Output::Csv {
                meta: json!({
                    "ensemble": ensemble,
                    "N": n,
                    "reps": reps,
                    "seed": seed,
                    "eigenvalues": eig.len(),
                    "target": target.to_string(),
                    "sup_cdf_distance": ecdf_sup_distance(&eig, &|x| target.cdf(x)),
                }),
                columns: "x,count,density",
                rows,
            })
        }
    }
}

fn brown(cmd: &BrownCommand) -> Res<Output> {
    match cmd {
        BrownCommand::Radial { sigma, w, grid, moments } => {
            let law = spec(sigma)?;
            let w = match w {
                Some(w) => *w,
                None => law.atoms().iter().filter(|a| a.0 == 0.0).map(|a| a.1).sum(),
            };
            let radial = match moments {
                Some(m) => hl_from_moments(&law.moment_table(*m)?, w, *m)?,
                None => hl_radial(&STransformEvaluator::from_spec(&law)?, w, *grid)?,
            };
            let rows = radial
                .r
                .iter()
                .zip(&radial.f)
                .enumerate()
                .map(|(i, (r, f))| match &radial.density {
                    Some(d) => format!("{r},{f},{}", d[i]),
                    None => format!("{r},{f},"),
                })
                .collect();
            Ok(Output::Csv {
                meta: json!({
                    "sigma": law.to_string(),
                    "w": w,
                    "grid": radial.r.len(),
                    "from_moments": moments,
                    "r_max": radial.r_max,
                    "truncated": radial.truncated,
                }),
                columns: "r,F,rho",
                rows,
            })
        }
        BrownCommand::Fkdet { matrix } => {
            let text = read_arg(&format!("@{matrix}"))?;
            let m = ComplexMatrix::try_from(parse_json::<MatrixJson>(&text, "matrix")?)?;
            let det = fk_det(&m)?;
            let det_lu = fk_det_lu(&m);
            Ok(Output::json(json!({
                "n": m.n(),
                "fk_det": det,
                "fk_det_lu": det_lu,
                "log_fk_det": det.ln(),
                "route_difference": (det - det_lu).abs(),
            })))
        }
    }
}

fn failure_lines(r: &SuiteReport) -> Vec<String> {
    r.failures()
        .map(|c| {
            format!(
                "{}: {}: observed {:e}, expected {}, tolerance {:e}",
                r.suite,
                c.name,
                c.observed,
                c.expected.map_or("-".to_string(), |e| format!("{e:e}")),
                c.tolerance
            )
        })
        .collect()
}

fn repro(suite: &str, opts: &ReproOptions) -> Res<Output> {
    if suite == "all" {
        let reports = SUITES
            .iter()
            .map(|s| run_suite(s.0, opts))
            .collect::<freeconv::Result<Vec<_>>>()?;
        let failures = reports.iter().flat_map(failure_lines).collect();
        return Ok(Output::Json {
            payload: json!({
                "passed": reports.iter().all(|r| r.passed),
                "suites": reports,
            }),
            failures,
        });
    }
    let report = run_suite(suite, opts)?;
    Ok(Output::Json {
        failures: failure_lines(&report),
        payload: serde_json::to_value(&report).expect("report serializes"),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_parsing() {
        assert_eq!(parse_grid("-2.5:2.5:101").unwrap(), (-2.5, 2.5, 101));
        for bad in ["1:0:5", "0:1:1", "0:1", "a:b:c", "0:inf:3"] {
            assert!(parse_grid(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn deterministic_slots() {
        assert_eq!(deterministic("diag:1,2,3", 3).unwrap(), DeterministicMatrix::Diagonal(vec![1.0, 2.0, 3.0]));
        assert!(deterministic("diag:1,2", 3).is_err());
        assert_eq!(deterministic("signs", 2).unwrap(), DeterministicMatrix::Diagonal(vec![1.0, -1.0]));
        let DeterministicMatrix::Diagonal(d) = deterministic("spec:semicircle", 4).unwrap() else {
            panic!()
        };
        assert!((d[0] + d[3]).abs() < 1e-12);
    }

    #[test]
    fn transform_round_trip() {
        let Output::Json { payload, .. } = transform("semicircle", SeriesKind::Moments, SeriesKind::R, Some(6)).unwrap()
        else {
            panic!()
        };
        let r = payload["result"].to_string();
        let Output::Json { payload, .. } = transform(&r, SeriesKind::R, SeriesKind::Moments, None).unwrap() else {
            panic!()
        };
        let m: Vec<f64> = serde_json::from_value(payload["result"].clone()).unwrap();
        assert_eq!(m.len(), 6);
        for (a, b) in m.iter().zip([0.0, 1.0, 0.0, 2.0, 0.0, 5.0]) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn catalog_input_needs_moments() {
        assert!(transform("semicircle", SeriesKind::R, SeriesKind::S, None).is_err());
    }
}
