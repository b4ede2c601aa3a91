use std::fmt::Write as _;

use helmwave::bkm_eigen::{eigen_algebraic_with, eigen_scan_with, AlgebraicOptions, ScanOptions, Spectrum};
use helmwave::expr::Expr;
use helmwave::geometry::{domain_quadrature, Domain, QuadratureRule};
use helmwave::io::read_samples;
use helmwave::transform::{forward_transform, helmholtz_property_check, log_grid, round_trip, uniform_grid, Region};
use helmwave::transient::{evaluate_solution, field_csv, solve_transient, FitMethod, InitialData};
use helmwave::validation::{run_suite, Suite};
use helmwave::wavelet_series::{
    build_basis, expand_collocation, expand_direct, gram_schmidt_within_scale, lattice_centers,
    FitMethod as SeriesMethod,
};
use helmwave::{Error, Field, Point, Result};
use serde_json::json;

use crate::config::{GridConfig, RunConfig};

/// What a command produced: the data artefact and a short human report.
pub struct Outcome {
    pub data: String,
    pub report: String,
    pub default_path: Option<String>,
    /// Exit status when the command ran but its result is unusable.
    pub status: u8,
}

fn quadrature_budget(n: usize) -> usize {
    match n {
        1 => 400,
        2 => 3000,
        _ => 8000,
    }
}

pub fn spectrum(cfg: &RunConfig, domain: &Domain) -> Result<Spectrum> {
    let e = cfg.eigensolver()?;
    match e.scheme.as_deref().unwrap_or("det_scan") {
        "det_scan" => {
            let [lo, hi] = e.lambda_range.unwrap_or([0.5, 10.0]);
            let d = ScanOptions::default();
            let opts = ScanOptions {
                samples: e.samples.unwrap_or(d.samples),
                refine_tol: e.refine_tol.unwrap_or(d.refine_tol),
                accept_tol: e.accept_tol.unwrap_or(d.accept_tol),
                bc_tol: e.bc_tol.unwrap_or(d.bc_tol),
                objective: e.objective.unwrap_or(d.objective),
                quadrature_budget: e.quadrature_budget,
                ..d
            };
            if opts.samples < 2 {
                return Err(Error::param("eigensolver.samples", "need at least 2"));
            }
            eigen_scan_with(domain, (lo, hi), &opts).map_err(|err| match err {
                Error::Domain(reason) => Error::param("eigensolver.lambda_range", reason),
                other => other,
            })
        }
        "algebraic" => {
            let d = AlgebraicOptions::default();
            let opts = AlgebraicOptions {
                bc_tol: e.bc_tol.unwrap_or(d.bc_tol),
                lambda_max: e.lambda_range.map(|r| r[1]),
                quadrature_budget: e.quadrature_budget,
                ..d
            };
            let delta = e.delta.unwrap_or(1.0);
            let n_interior = e.n_interior.unwrap_or(domain.interior().len());
            eigen_algebraic_with(domain, delta, n_interior, &opts).map_err(|err| match err {
                Error::Domain(reason) => Error::param("eigensolver.delta", reason),
                other => other,
            })
        }
        other => Err(Error::param(
            "eigensolver.scheme",
            format!("unknown scheme `{other}` (det_scan|algebraic)"),
        )),
    }
}

pub fn eigs(cfg: &RunConfig) -> Result<Outcome> {
    let domain = cfg.domain()?;
    let spec = spectrum(cfg, &domain)?;
    let mut report = String::from("  k      wavenumber   bc_residual\n");
    for (k, p) in spec.pairs.iter().enumerate() {
        let _ = writeln!(report, "{:>3}  {:>14.5}  {:>12.3e}", k + 1, p.wavenumber, p.bc_residual);
    }
    let status = if spec.is_empty() {
        report.push_str("no eigenvalues found in the requested range\n");
        3
    } else {
        0
    };
    Ok(Outcome {
        data: spec.records_json(),
        report,
        default_path: None,
        status,
    })
}

fn grid_points(g: &GridConfig, n: usize) -> Result<Vec<Point>> {
    if g.lower.len() != n || g.upper.len() != n || g.counts.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: [g.lower.len(), g.upper.len(), g.counts.len()]
                .into_iter()
                .find(|l| *l != n)
                .unwrap_or(n),
        });
    }
    if g.counts.contains(&0) {
        return Err(Error::param("output.grid.counts", "must be positive"));
    }
    let axes: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            uniform_grid(g.lower[i], g.upper[i], g.counts[i])
                .into_iter()
                .map(|p| p[0])
                .collect()
        })
        .collect();
    let mut points = vec![Vec::new()];
    for axis in &axes {
        points = points
            .into_iter()
            .flat_map(|p: Point| {
                axis.iter().map(move |v| {
                    let mut q = p.clone();
                    q.push(*v);
                    q
                })
            })
            .collect();
    }
    Ok(points)
}

fn check_points(points: Vec<Vec<f64>>, n: usize) -> Result<Vec<Point>> {
    match points.iter().find(|p| p.len() != n) {
        Some(p) => Err(Error::DimensionMismatch {
            expected: n,
            found: p.len(),
        }),
        None => Ok(points),
    }
}

fn initial_data(
    cfg: &RunConfig,
    expr: &Option<String>,
    samples: &Option<String>,
    name: &str,
    n: usize,
) -> Result<Option<InitialData>> {
    match (expr, samples) {
        (Some(_), Some(_)) => Err(Error::param(
            format!("initial.{name}"),
            format!("give either `{name}` or `{name}_samples`, not both"),
        )),
        (Some(text), None) => Ok(Some(InitialData::Function(
            Expr::parse(text, n, &format!("initial.{name}"))?.into(),
        ))),
        (None, Some(path)) => {
            let field = format!("initial.{name}_samples");
            let text = cfg.read_file(path, &field)?;
            Ok(Some(InitialData::Samples(read_samples(&text, n, &field)?)))
        }
        (None, None) => Ok(None),
    }
}

pub fn solve(cfg: &RunConfig) -> Result<Outcome> {
    let domain = cfg.domain()?;
    let n = domain.dimension();
    let eq = cfg.equation(n)?;
    let init = cfg.initial()?;
    let out = cfg.output()?;
    let phi = initial_data(cfg, &init.phi, &init.phi_samples, "phi", n)?
        .ok_or_else(|| Error::parse("initial.phi", "initial displacement `phi` or `phi_samples` is required"))?;
    let psi = initial_data(cfg, &init.psi, &init.psi_samples, "psi", n)?;
    if out.times.is_empty() {
        return Err(Error::param("output.times", "list at least one time"));
    }
    if let Some(t) = out.times.iter().find(|t| !(**t >= 0.0) || !t.is_finite()) {
        return Err(Error::param(
            "output.times",
            format!("times must be finite and >= 0, got {t}"),
        ));
    }
    let points = match (out.points, &out.grid) {
        (Some(_), Some(_)) => {
            return Err(Error::param(
                "output.points",
                "give either `points` or `grid`, not both",
            ))
        }
        (Some(p), None) => check_points(p, n)?,
        (None, Some(g)) => grid_points(g, n)?,
        (None, None) => domain.interior().to_vec(),
    };
    let spec = spectrum(cfg, &domain)?;
    if spec.is_empty() {
        return Err(Error::EmptySpectrum);
    }
    let quad = domain_quadrature(&domain, init.quadrature_budget.unwrap_or(quadrature_budget(n)))?;
    let method = init.method.unwrap_or(FitMethod::Collocation);
    let sol = solve_transient(&eq, &domain, &spec, &phi, psi.as_ref(), &quad, method)?;
    let values = evaluate_solution(&sol, &points, &out.times)?;
    let d = &sol.amplitudes.diagnostics;
    let report = serde_json::to_string_pretty(&json!({
        "modes_used": d.modes_used,
        "wavenumbers": spec.wavenumbers(),
        "fit_residual": d.fit_residual,
        "energy_captured": d.energy_captured,
        "velocity_residual": d.velocity_residual,
        "warnings": d.warnings,
    }))
    .expect("report serializes");
    Ok(Outcome {
        data: field_csv(&points, &out.times, &values)?,
        report: report + "\n",
        default_path: out.path,
        status: 0,
    })
}

pub fn expand(cfg: &RunConfig) -> Result<Outcome> {
    let domain = cfg.domain()?;
    let n = domain.dimension();
    let e = cfg.expansion()?;
    let out = cfg.output()?;
    if e.scales == 0 {
        return Err(Error::param("expansion.scales", "need at least one scale"));
    }
    let centers = match (e.centers, e.lattice) {
        (Some(_), Some(_)) => {
            return Err(Error::param(
                "expansion.centers",
                "give either `centers` or `lattice`, not both",
            ))
        }
        (Some(c), None) => check_points(c, n)?,
        (None, l) => lattice_centers(&domain, l.unwrap_or(16)),
    };
    let mut basis = build_basis(&domain, e.scales, centers)?;
    let method = e.method.unwrap_or(SeriesMethod::Direct);
    let needs_quad = method == SeriesMethod::Direct || e.orthonormalize.unwrap_or(false);
    let quad: Option<QuadratureRule> = if needs_quad {
        Some(domain_quadrature(
            &domain,
            e.quadrature_budget.unwrap_or(quadrature_budget(n)),
        )?)
    } else {
        None
    };
    if e.orthonormalize.unwrap_or(false) {
        basis = gram_schmidt_within_scale(&basis, quad.as_ref().expect("built above"), 1e-10)?;
    }
    let function: Option<Field> = e
        .function
        .as_deref()
        .map(|t| Expr::parse(t, n, "expansion.function").map(Field::from))
        .transpose()?;
    let samples = e
        .samples
        .as_deref()
        .map(|p| {
            cfg.read_file(p, "expansion.samples")
                .and_then(|t| read_samples(&t, n, "expansion.samples"))
        })
        .transpose()?;
    let expansion = match (method, function, samples) {
        (_, Some(_), Some(_)) => {
            return Err(Error::param(
                "expansion.function",
                "give either `function` or `samples`, not both",
            ))
        }
        (_, None, None) => {
            return Err(Error::parse(
                "expansion.function",
                "`function` or `samples` is required",
            ))
        }
        (SeriesMethod::Direct, Some(f), None) => expand_direct(
            &move |x: &[f64]| f.eval(x),
            &basis,
            &domain,
            quad.as_ref().expect("built above"),
        )?,
        (SeriesMethod::Direct, None, Some(_)) => {
            return Err(Error::param(
                "expansion.method",
                "sampled data needs method `collocation`",
            ))
        }
        (SeriesMethod::Collocation, Some(f), None) => {
            let budget = e
                .sample_budget
                .unwrap_or(4 * basis.atom_count())
                .max(basis.atom_count());
            let q = domain_quadrature(&domain, budget.max(quadrature_budget(n)))?;
            let s: Vec<(Point, f64)> = q.nodes.iter().map(|x| (x.clone(), f.eval(x))).collect();
            expand_collocation(&s, &basis)?
        }
        (SeriesMethod::Collocation, None, Some(s)) => expand_collocation(&s, &basis)?,
    };
    let report = serde_json::to_string_pretty(&json!({
        "method": match expansion.method { SeriesMethod::Direct => "direct", SeriesMethod::Collocation => "collocation" },
        "atoms": expansion.basis.atom_count(),
        "rank": expansion.rank,
        "fit_residual": expansion.fit_residual,
        "warnings": expansion.warnings,
    }))
    .expect("report serializes");
    Ok(Outcome {
        data: expansion.to_json(),
        report: report + "\n",
        default_path: out.path,
        status: 0,
    })
}

pub fn transform(cfg: &RunConfig) -> Result<Outcome> {
    let t = cfg.transform()?;
    let out = cfg.output()?;
    let domain = if cfg.has_geometry() { Some(cfg.domain()?) } else { None };
    let n = match (&domain, t.dimension) {
        (Some(d), Some(k)) if d.dimension() != k => {
            return Err(Error::DimensionMismatch {
                expected: d.dimension(),
                found: k,
            })
        }
        (Some(d), _) => d.dimension(),
        (None, Some(k)) => k,
        (None, None) => 1,
    };
    let f: Field = Expr::parse(&t.function, n, "transform.function")?.into();
    let [lo, hi] = t.lambda_range.unwrap_or([0.1, 40.0]);
    let lambdas = log_grid(lo, hi, t.lambda_count.unwrap_or(128)).map_err(|e| match e {
        Error::Parameter { reason, .. } | Error::Domain(reason) => Error::param("transform.lambda_range", reason),
        other => other,
    })?;
    let region = match (t.support, &domain) {
        (Some([a, b]), _) => {
            if n != 1 {
                return Err(Error::param(
                    "transform.support",
                    "an interval support needs dimension 1",
                ));
            }
            if !(b > a) {
                return Err(Error::param("transform.support", "need lower < upper"));
            }
            Region::Interval(a, b)
        }
        (None, Some(d)) => Region::Rule(domain_quadrature(
            d,
            t.quadrature_budget.unwrap_or(quadrature_budget(n)),
        )?),
        (None, None) => {
            return Err(Error::parse(
                "transform.support",
                "give `support` or a `geometry` section",
            ))
        }
    };
    let centers = match (t.centers, &t.center_grid) {
        (Some(_), Some(_)) => {
            return Err(Error::param(
                "transform.centers",
                "give either `centers` or `center_grid`, not both",
            ))
        }
        (Some(c), None) => check_points(c, n)?,
        (None, Some(g)) => {
            if n != 1 {
                return Err(Error::param(
                    "transform.center_grid",
                    "a center grid needs dimension 1; list `centers`",
                ));
            }
            if g.count == 0 || !(g.upper > g.lower) {
                return Err(Error::param(
                    "transform.center_grid",
                    "need count > 0 and lower < upper",
                ));
            }
            uniform_grid(g.lower, g.upper, g.count)
        }
        (None, None) => match &region {
            Region::Interval(a, b) => uniform_grid(*a, *b, 256),
            Region::Rule(_) => {
                return Err(Error::parse(
                    "transform.centers",
                    "list `centers` for a geometry region",
                ))
            }
        },
    };
    let field = forward_transform(&f, &lambdas, &centers, &region)?;
    let mut report = json!({
        "cg": field.cg,
        "max_abs": field.max_abs(),
        "helmholtz_residual": helmholtz_property_check(&field).ok(),
    });
    if let Some(points) = t.check_points {
        let points = check_points(points, n)?;
        let rt = round_trip(&f, &lambdas, &centers, &region, &points)?;
        report["round_trip_error"] = json!(rt.sup_error);
        report["renormalization"] = json!(rt.renormalization);
        report["truncation"] = json!(rt.truncation);
    }
    Ok(Outcome {
        data: field.to_csv()?,
        report: serde_json::to_string_pretty(&report).expect("report serializes") + "\n",
        default_path: out.path,
        status: 0,
    })
}

pub fn validate(suite: Suite, seed: u64) -> Result<Outcome> {
    let report = run_suite(suite, seed);
    let mut text = String::new();
    for c in &report.criteria {
        let _ = writeln!(text, "{c}");
    }
    let passed = report.criteria.iter().filter(|c| c.passed).count();
    let _ = writeln!(text, "{passed}/{} criteria passed", report.criteria.len());
    Ok(Outcome {
        data: text,
        report: String::new(),
        default_path: None,
        status: if report.passed() { 0 } else { 1 },
    })
}
