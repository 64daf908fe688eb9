use std::collections::BTreeMap;
use std::io::Write as _;
use std::path::Path;

use rayon::prelude::*;

use qcurve_core::as3::{
    as3_verdict, predicted_pattern, shifted_paneitz_eigenvalue_with, EigenSubstitution,
    EinsteinProductSpec, Fiber,
};
use qcurve_core::exact::to_f64;
use qcurve_core::inequality::{
    greens_kernel, log_ratio_derivative_check, quartic_constant_c, sample_point_pairs,
    strict_binding, BecknerContext, InequalityVerdict, PointPair, GREEN_TAIL_REL,
};
use qcurve_core::qfunctional::{
    gradient, hessian_at_one, GeometryConstants, QuadratureConfig, KERNEL_TOL,
};
use qcurve_core::quartic::{
    default_xi_grid, fit_exponent, frank3_expansion_check, phi_moments, plateau, predicted_plateau,
    sample_sequence, DistanceMetric, SequenceKind,
};
use qcurve_core::spectral::{
    eigenvalue_gap_report, solve_tau0, tau0_bounds_check, ModeIndex, EIGEN_MATCH_TOL,
};
use qcurve_core::{Dims, Error, Result};

use crate::report::{Cell, Section};

pub const EXPONENT_TOL: f64 = 0.05;
pub const PLATEAU_REL_TOL: f64 = 0.1;
pub const MOMENT_TOL: f64 = 1e-12;
pub const SYMMETRY_TOL: f64 = 1e-12;
/// `DQ(1)` is resolved to this fraction of `max(1, Q(1))`; binary64 rounding
/// leaves about `ε·Q(1)`.
pub const CRITICALITY_REL_TOL: f64 = 1e-8;
pub const AS3_CHECK_M: u32 = 1000;

pub type Params = BTreeMap<String, Cell>;

pub fn dims_params(dims: &[Dims]) -> Params {
    let mut p = Params::new();
    if let [one] = dims {
        p.insert("n".into(), one.n().into());
        p.insert("k".into(), one.k().into());
    } else {
        p.insert("points".into(), dims.len().into());
        p.insert(
            "nMax".into(),
            dims.iter().map(|d| d.n()).max().unwrap_or(0).into(),
        );
    }
    p
}

pub fn tau0(dims: &[Dims], tol: f64) -> Result<Section> {
    let mut s = Section::new(
        "tau0",
        Some(tol),
        &["n", "k", "y", "tau0", "residual", "lower", "upper", "pass"],
    );
    let rows: Vec<Vec<Cell>> = dims
        .par_iter()
        .map(|&d| {
            let t = solve_tau0(d, tol)?;
            let b = tau0_bounds_check(d)?;
            Ok(vec![
                d.n().into(),
                d.k().into(),
                t.y.into(),
                t.tau0.into(),
                t.residual.into(),
                b.lower.into(),
                b.upper.into(),
                b.holds.into(),
            ])
        })
        .collect::<Result<_>>()?;
    rows.into_iter().for_each(|r| s.push(r));
    Ok(s)
}

pub fn spectrum(dims: Dims, m_max: u32, j_max: u32) -> Result<Vec<Section>> {
    let gap = eigenvalue_gap_report(dims, m_max, j_max)?;
    let mut table = Section::new(
        "eigenvalues",
        Some(EIGEN_MATCH_TOL),
        &["m", "j", "alpha", "multiplicity", "kernel"],
    );
    for e in &gap.entries {
        let kernel = (e.alpha / gap.kernel_value - 1.0).abs() <= EIGEN_MATCH_TOL;
        table.push(vec![
            e.mode.m.into(),
            e.mode.j.into(),
            e.alpha.into(),
            e.mode.multiplicity(dims).to_string().into(),
            kernel.into(),
        ]);
    }
    let mut checks = Section::new("structure", Some(EIGEN_MATCH_TOL), &["check", "pass"]);
    checks.push(vec!["increasing in m".into(), gap.increasing_in_m.into()]);
    checks.push(vec!["increasing in j".into(), gap.increasing_in_j.into()]);
    checks.push(vec!["kernel value unique".into(), gap.kernel_unique.into()]);
    checks.push(vec![
        "alpha(0,1) > alpha(1,0)".into(),
        gap.alpha01_exceeds_alpha10.into(),
    ]);
    Ok(vec![table, checks])
}

pub fn hessian(dims: Dims, m_max: u32, j_max: u32) -> Result<Vec<Section>> {
    let r = hessian_at_one(dims, m_max, j_max)?;
    let mut table = Section::new(
        "hessian",
        Some(KERNEL_TOL),
        &["m", "j", "parity", "multiplicity", "value", "kernel"],
    );
    for h in &r.hessian_diagonal {
        let in_kernel = r
            .kernel_modes
            .iter()
            .any(|k| k.mode == h.mode && k.parity == h.parity);
        table.push(vec![
            h.mode.m.into(),
            h.mode.j.into(),
            format!("{:?}", h.parity).to_lowercase().into(),
            h.multiplicity.into(),
            h.value.into(),
            in_kernel.into(),
        ]);
    }
    let mut summary = Section::new(
        "kernel",
        Some(KERNEL_TOL),
        &["n", "k", "dimension", "positive_off_kernel", "pass"],
    );
    summary.push(vec![
        dims.n().into(),
        dims.k().into(),
        r.kernel_dimension.into(),
        r.positive_off_kernel.into(),
        (r.kernel_dimension == 3 && r.positive_off_kernel).into(),
    ]);
    Ok(vec![table, summary])
}

pub fn as3(fiber: Fiber, m_min: u32, m_max: u32, sub: EigenSubstitution) -> Result<Vec<Section>> {
    let v = as3_verdict(fiber, m_min, m_max, sub)?;
    let mut rows = Section::new(
        "roots",
        None,
        &[
            "m",
            "a",
            "b",
            "c",
            "discriminant",
            "lambda_minus",
            "lambda_plus",
            "pattern",
        ],
    );
    for r in &v.rows {
        let q = shifted_paneitz_eigenvalue_with(&EinsteinProductSpec::new(r.m, fiber)?, sub)?;
        rows.push(vec![
            r.m.into(),
            to_f64(&q.a).into(),
            to_f64(&q.b).into(),
            to_f64(&q.c).into(),
            to_f64(&q.discriminant).into(),
            r.lambda_minus.into(),
            r.lambda_plus.into(),
            pattern_name(r.pattern).into(),
        ]);
    }
    let mut verdict = Section::new(
        "prediction",
        None,
        &["fiber", "ell", "predicted", "holds_from", "pass"],
    );
    verdict.push(vec![
        fiber.name().into(),
        fiber.ell().into(),
        pattern_name(v.predicted).into(),
        v.holds_from.map_or(Cell::Null, Cell::from),
        v.holds_from.is_some().into(),
    ]);
    Ok(vec![rows, verdict])
}

fn pattern_name(p: qcurve_core::as3::RootPattern) -> String {
    format!("{p:?}")
}

fn verdict_row(v: &InequalityVerdict, strict: bool) -> Vec<Cell> {
    let p = |key: &str| v.parameters.get(key).map_or(Cell::Null, |x| Cell::from(*x));
    vec![
        v.name.as_str().into(),
        p("n"),
        p("k"),
        p("ell"),
        v.lhs.into(),
        v.rhs.into(),
        v.margin.into(),
        v.equality_case.into(),
        (if strict { v.strict() } else { v.holds }).into(),
    ]
}

const VERDICT_COLUMNS: [&str; 9] = [
    "name", "n", "k", "ell", "lhs", "rhs", "margin", "equality", "pass",
];

/// Strict binding, Gamma-ratio comparison, log-derivative bound and quartic constant.
pub fn inequalities(dims: &[Dims], ell_max: u32) -> Result<Vec<Section>> {
    let per_dims: Vec<[Vec<Vec<Cell>>; 3]> = dims
        .par_iter()
        .map(|&d| {
            let s = strict_binding(d)?;
            let binding = vec![
                verdict_row(&s.quotient, true),
                verdict_row(&s.reduced, true),
            ];
            let ctx = BecknerContext::new(d)?;
            let mut gamma = Vec::new();
            for ell in 0..=ell_max {
                let v = ctx.verdict(ell);
                let mut row = verdict_row(&v, false);
                let ok = if ell <= 1 {
                    v.equality_case
                } else {
                    v.strict()
                };
                *row.last_mut().unwrap() = ok.into();
                gamma.push(row);
            }
            for ell in 2..=ell_max.min(20) {
                gamma.push(verdict_row(&log_ratio_derivative_check(d, ell), true));
            }
            let q = quartic_constant_c(d)?;
            // claim 0 < c
            let c_row = vec![
                "quartic-constant".into(),
                d.n().into(),
                d.k().into(),
                Cell::Null,
                0.0.into(),
                q.c.into(),
                q.c.into(),
                false.into(),
                q.positive.into(),
            ];
            let quartic = vec![
                c_row,
                verdict_row(&q.alpha_ineq, true),
                verdict_row(&q.convexity, false),
                verdict_row(&q.even_form_convexity, false),
            ];
            Ok([binding, gamma, quartic])
        })
        .collect::<Result<_>>()?;
    let tol = Some(qcurve_core::inequality::EQUALITY_TOL);
    let mut sections = [
        Section::new("strict-binding", tol, &VERDICT_COLUMNS),
        Section::new("gamma-ratio", tol, &VERDICT_COLUMNS),
        Section::new("quartic-constant", tol, &VERDICT_COLUMNS),
    ];
    for group in per_dims {
        for (s, rows) in sections.iter_mut().zip(group) {
            rows.into_iter().for_each(|r| s.push(r));
        }
    }
    Ok(sections.into())
}

fn expected_exponent(kind: SequenceKind) -> f64 {
    match kind {
        SequenceKind::SecondMode => 2.0,
        _ => 4.0,
    }
}

pub fn quartic(
    dims: Dims,
    kind: SequenceKind,
    metric: DistanceMetric,
    plot: Option<&Path>,
) -> Result<Vec<Section>> {
    let set = sample_sequence(dims, kind, &default_xi_grid())?;
    let fit = fit_exponent(&set, metric)?;
    let mut samples = Section::new(
        "samples",
        None,
        &[
            "xi",
            "b",
            "deficit",
            "dist",
            "energy_dist",
            "norm_sq",
            "fitted",
        ],
    );
    for s in &set.samples {
        let used = fit.samples.iter().any(|u| u.xi == s.xi);
        samples.push(vec![
            s.xi.into(),
            s.b.into(),
            s.deficit.into(),
            s.dist.into(),
            s.energy_dist.into(),
            s.norm_sq.into(),
            used.into(),
        ]);
    }
    let expected = expected_exponent(kind);
    let mut fit_section = Section::new(
        "fit",
        Some(EXPONENT_TOL),
        &[
            "kind", "metric", "exponent", "expected", "r2", "xi_min", "xi_max", "pass",
        ],
    );
    fit_section.push(vec![
        kind.name().into(),
        format!("{metric:?}").into(),
        fit.exponent.into(),
        expected.into(),
        fit.r2.into(),
        fit.window.0.into(),
        fit.window.1.into(),
        ((fit.exponent - expected).abs() <= EXPONENT_TOL).into(),
    ]);
    let mut out = vec![samples, fit_section];
    if kind == SequenceKind::Degenerate {
        let p = plateau(&set, 3)?;
        let predicted = predicted_plateau(dims)?;
        let mut s = Section::new(
            "plateau",
            Some(PLATEAU_REL_TOL),
            &["mean", "spread", "predicted", "pass"],
        );
        s.push(vec![
            p.mean.into(),
            p.spread.into(),
            predicted.into(),
            ((p.mean / predicted - 1.0).abs() <= PLATEAU_REL_TOL).into(),
        ]);
        out.push(s);
    }
    if let Some(path) = plot {
        write_plot(path, &set.samples, metric)?;
    }
    Ok(out)
}

fn write_plot(
    path: &Path,
    samples: &[qcurve_core::quartic::DeficitSample],
    metric: DistanceMetric,
) -> Result<()> {
    let io = |e: std::io::Error| Error::internal(format!("writing {}: {e}", path.display()));
    let mut f = std::io::BufWriter::new(std::fs::File::create(path).map_err(io)?);
    writeln!(
        f,
        "# ln({}) ln(deficit)",
        if metric == DistanceMetric::Dist {
            "dist"
        } else {
            "energy_dist"
        }
    )
    .map_err(io)?;
    for s in samples.iter().filter(|s| s.deficit > 0.0) {
        let x = if metric == DistanceMetric::Dist {
            s.dist
        } else {
            s.energy_dist
        };
        writeln!(f, "{:e} {:e}", x.ln(), s.deficit.ln()).map_err(io)?;
    }
    f.flush().map_err(io)
}

pub fn greens(
    dims: Dims,
    tau: Option<f64>,
    pairs: usize,
    truncation: u32,
    seed: u64,
) -> Result<Vec<Section>> {
    let tau = match tau {
        Some(t) => t,
        None => solve_tau0(dims, qcurve_core::spectral::DEFAULT_TAU0_TOL)?.tau0,
    };
    let pts = sample_point_pairs(dims, tau, pairs, seed);
    let swapped: Vec<PointPair> = pts.iter().map(PointPair::swapped).collect();
    let g = greens_kernel(dims, tau, &pts, truncation)?;
    let h = greens_kernel(dims, tau, &swapped, truncation)?;
    let mut s = Section::new(
        "kernel",
        Some(GREEN_TAIL_REL),
        &[
            "index",
            "t",
            "s",
            "inner",
            "value",
            "swapped",
            "tail_bound",
            "terms",
            "pass",
        ],
    );
    for (i, ((p, a), b)) in pts.iter().zip(&g).zip(&h).enumerate() {
        let inner: f64 = p.x.omega.iter().zip(&p.y.omega).map(|(x, y)| x * y).sum();
        let ok = a.value > 0.0
            && (a.value - b.value).abs() <= SYMMETRY_TOL * a.value
            && a.tail_bound <= GREEN_TAIL_REL * a.value;
        s.push(vec![
            i.into(),
            p.x.t.into(),
            p.y.t.into(),
            inner.into(),
            a.value.into(),
            b.value.into(),
            a.tail_bound.into(),
            a.terms.into(),
            ok.into(),
        ]);
    }
    Ok(vec![s])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, clap::ValueEnum)]
pub enum VerifySection {
    Tau0,
    Spectrum,
    Criticality,
    Inequalities,
    Quartic,
    Expansion,
    Greens,
    As3,
}

impl VerifySection {
    pub fn all() -> Vec<VerifySection> {
        use clap::ValueEnum;
        Self::value_variants().to_vec()
    }
}

const CHECK_COLUMNS: [&str; 6] = ["check", "n", "k", "value", "tolerance", "pass"];

fn check_row(check: &str, d: Option<Dims>, value: f64, tol: f64, pass: bool) -> Vec<Cell> {
    vec![
        check.into(),
        d.map_or(Cell::Null, |d| d.n().into()),
        d.map_or(Cell::Null, |d| d.k().into()),
        value.into(),
        tol.into(),
        pass.into(),
    ]
}

fn collect_rows(name: &str, rows: Vec<Vec<Vec<Cell>>>) -> Section {
    let mut s = Section::new(name, None, &CHECK_COLUMNS);
    rows.into_iter().flatten().for_each(|r| s.push(r));
    s
}

pub fn verify(sections: &[VerifySection], n_max: u32, tol: f64, seed: u64) -> Result<Vec<Section>> {
    let grid = Dims::all_up_to(n_max);
    let quartic_cases: Vec<Dims> = [(5, 1), (6, 2), (7, 2), (7, 3)]
        .into_iter()
        .filter(|&(n, _)| n <= n_max)
        .map(|(n, k)| Dims::new(n, k))
        .collect::<Result<_>>()?;
    let mut out = Vec::new();
    for &section in sections {
        let s = match section {
            VerifySection::Tau0 => {
                let rows = grid
                    .par_iter()
                    .map(|&d| {
                        let t = solve_tau0(d, tol)?;
                        let b = tau0_bounds_check(d)?;
                        let mut r = vec![check_row("tau0 bounds", Some(d), t.tau0, 1e-12, b.holds)];
                        if d.k() == 1 {
                            let err = (t.tau0 - 1.0 / f64::from(d.n() - 2).sqrt()).abs();
                            r.push(check_row(
                                "tau0 closed form",
                                Some(d),
                                err,
                                1e-12,
                                err <= 1e-12,
                            ));
                        }
                        Ok(r)
                    })
                    .collect::<Result<_>>()?;
                collect_rows("tau0", rows)
            }
            VerifySection::Spectrum => {
                let rows = grid
                    .par_iter()
                    .map(|&d| {
                        let gap = eigenvalue_gap_report(d, 10, 10)?;
                        let a10 = qcurve_core::spectral::alpha(d, ModeIndex::new(1, 0), gap.tau0)?;
                        let rel = (a10 / gap.kernel_value - 1.0).abs();
                        let h = hessian_at_one(d, 10, 10)?;
                        Ok(vec![
                            check_row("alpha(1,0) kernel value", Some(d), rel, 1e-12, rel <= 1e-12),
                            check_row(
                                "alpha(0,1) > alpha(1,0)",
                                Some(d),
                                0.0,
                                0.0,
                                gap.alpha01_exceeds_alpha10,
                            ),
                            check_row(
                                "kernel eigenvalue unique",
                                Some(d),
                                0.0,
                                EIGEN_MATCH_TOL,
                                gap.kernel_unique,
                            ),
                            check_row(
                                "hessian kernel dimension 3",
                                Some(d),
                                h.kernel_dimension as f64,
                                KERNEL_TOL,
                                h.kernel_dimension == 3 && h.positive_off_kernel,
                            ),
                        ])
                    })
                    .collect::<Result<_>>()?;
                collect_rows("spectrum", rows)
            }
            VerifySection::Criticality => {
                let rows = grid
                    .par_iter()
                    .map(|&d| {
                        let g = GeometryConstants::new(d)?;
                        let one = g.function(1.0, vec![0.0; 4], vec![0.0; 4])?;
                        let m = gradient(&one, &QuadratureConfig::default())?
                            .iter()
                            .map(|e| e.value.abs())
                            .fold(0.0, f64::max);
                        let tol = CRITICALITY_REL_TOL * g.yamabe.max(1.0);
                        Ok(vec![check_row(
                            "gradient at u = 1",
                            Some(d),
                            m,
                            tol,
                            m <= tol,
                        )])
                    })
                    .collect::<Result<_>>()?;
                collect_rows("criticality", rows)
            }
            VerifySection::Inequalities => {
                let rows = grid
                    .par_iter()
                    .map(|&d| {
                        let s = strict_binding(d)?;
                        let ctx = BecknerContext::new(d)?;
                        let eq = (0..=1).all(|l| ctx.verdict(l).equality_case);
                        let strict = (2..=50).all(|l| ctx.verdict(l).strict());
                        let q = quartic_constant_c(d)?;
                        Ok(vec![
                            check_row(
                                "strict binding",
                                Some(d),
                                s.quotient.margin,
                                1e-10,
                                s.holds(),
                            ),
                            check_row("gamma ratio equality at 0, 1", Some(d), 0.0, 1e-10, eq),
                            check_row("gamma ratio strict for 2..50", Some(d), 0.0, 1e-10, strict),
                            check_row("quartic constant positive", Some(d), q.c, 0.0, q.positive),
                            check_row(
                                "second-mode threshold",
                                Some(d),
                                q.alpha_ineq.margin,
                                1e-10,
                                q.alpha_ineq.strict(),
                            ),
                        ])
                    })
                    .collect::<Result<_>>()?;
                collect_rows("inequalities", rows)
            }
            VerifySection::Quartic => {
                let rows = quartic_cases
                    .par_iter()
                    .map(|&d| {
                        let grid = default_xi_grid();
                        let deg = sample_sequence(d, SequenceKind::Degenerate, &grid)?;
                        let fit = fit_exponent(&deg, DistanceMetric::EnergyDist)?;
                        let ctl = fit_exponent(
                            &sample_sequence(d, SequenceKind::SecondMode, &grid)?,
                            DistanceMetric::EnergyDist,
                        )?;
                        let p = plateau(&deg, 3)?.mean / predicted_plateau(d)? - 1.0;
                        Ok(vec![
                            check_row(
                                "degenerate exponent",
                                Some(d),
                                fit.exponent,
                                EXPONENT_TOL,
                                (fit.exponent - 4.0).abs() <= EXPONENT_TOL && fit.r2 > 0.9999,
                            ),
                            check_row(
                                "control exponent",
                                Some(d),
                                ctl.exponent,
                                EXPONENT_TOL,
                                (ctl.exponent - 2.0).abs() <= EXPONENT_TOL,
                            ),
                            check_row(
                                "plateau vs constant",
                                Some(d),
                                p,
                                PLATEAU_REL_TOL,
                                p.abs() <= PLATEAU_REL_TOL,
                            ),
                        ])
                    })
                    .collect::<Result<_>>()?;
                collect_rows("quartic", rows)
            }
            VerifySection::Expansion => {
                let rows = quartic_cases
                    .par_iter()
                    .map(|&d| {
                        let r = frank3_expansion_check(d, 0.02, 0.25)?.discrepancy
                            / frank3_expansion_check(d, 0.01, 0.25)?.discrepancy;
                        let m = phi_moments(d)?;
                        Ok(vec![
                            check_row(
                                "fifth-order remainder ratio",
                                Some(d),
                                r,
                                0.0,
                                (12.8..=38.4).contains(&r),
                            ),
                            check_row(
                                "fourth moment of phi",
                                Some(d),
                                m.fourth_error(),
                                MOMENT_TOL,
                                m.fourth_error() <= MOMENT_TOL,
                            ),
                            check_row(
                                "squared second moment",
                                Some(d),
                                m.square_squared_error(),
                                MOMENT_TOL,
                                m.square_squared_error() <= MOMENT_TOL,
                            ),
                        ])
                    })
                    .collect::<Result<_>>()?;
                collect_rows("expansion", rows)
            }
            VerifySection::Greens => {
                let rows = grid
                    .par_iter()
                    .enumerate()
                    .map(|(i, &d)| {
                        let s = &greens(d, None, 200, 1, seed.wrapping_add(i as u64))?[0];
                        let pass = s.rows.iter().all(|r| r.last() == Some(&Cell::Bool(true)));
                        Ok(vec![check_row(
                            "green kernel positive and symmetric",
                            Some(d),
                            s.rows.len() as f64,
                            SYMMETRY_TOL,
                            pass,
                        )])
                    })
                    .collect::<Result<_>>()?;
                collect_rows("greens", rows)
            }
            VerifySection::As3 => {
                let fibers: Vec<Fiber> = (2..=10)
                    .flat_map(|l| [Fiber::Sphere(l), Fiber::ComplexProjective(l)])
                    .collect();
                let rows = fibers
                    .par_iter()
                    .map(|&f| {
                        let q = shifted_paneitz_eigenvalue_with(
                            &EinsteinProductSpec::new(AS3_CHECK_M, f)?,
                            EigenSubstitution::Consistent,
                        )?;
                        let label = format!(
                            "{}({}) root pattern {:?} at m = {AS3_CHECK_M}",
                            f.name(),
                            f.ell(),
                            predicted_pattern(f)
                        );
                        let disc = to_f64(&q.discriminant);
                        Ok(vec![
                            check_row(
                                &format!("{}({}) discriminant positive", f.name(), f.ell()),
                                None,
                                disc,
                                0.0,
                                disc > 0.0,
                            ),
                            check_row(
                                &label,
                                None,
                                q.roots.map_or(f64::NAN, |r| r.1),
                                0.0,
                                q.pattern() == predicted_pattern(f),
                            ),
                        ])
                    })
                    .collect::<Result<_>>()?;
                collect_rows("as3", rows)
            }
        };
        out.push(s);
    }
    Ok(out)
}
