//! The four subcommands. Each returns its report; files go to the output
//! directory.

use std::path::{Path, PathBuf};

use isoflat::io;
use isoflat::{
    build_phi_lambda, build_revolution_form, cross_ratio_mismatch, cross_ratio_nodes, light_cone_lift, calapso_residual_max, conformal_factor_k, conformality_defect,
    dual_forms, envelope_defect, euclidean_dual, extract_triple, flatness_report, gauss_codazzi_residual, integrate_frame,
    integrate_u, isothermic_forms, isothermic_from_calapso_with, make_cylinder_patch, make_plane_patch,
    path_independence_defect, projected_distance, revolution_patch, revolution_u0, rms_distance,
    second_form_diagonality, solve_meridian, sym_surfaces, CalapsoConfig, CalapsoField, EuclideanSurface,
    GroupElement, IsothermicPatch, MeridianCurve, MinkowskiVector, Point3, ReportDocument, ScalarField,
    SurfaceTriple, SURFACE_LAMBDA,
};

use crate::config::{RunConfig, Source};
use crate::CliError;

/// Margin used for finite-difference comparisons against closed forms.
const FORM_MARGIN: usize = 2;

pub struct Outcome {
    pub report: ReportDocument,
    pub files: Vec<PathBuf>,
}

struct Context<'a> {
    cfg: &'a RunConfig,
    out: &'a Path,
    report: ReportDocument,
    files: Vec<PathBuf>,
}

impl<'a> Context<'a> {
    fn new(command: &str, cfg: &'a RunConfig, out: &'a Path) -> Self {
        let mut report = ReportDocument::new(command);
        report.info("source", cfg.source.name());
        Self { cfg, out, report, files: Vec::new() }
    }

    /// Records `value <= tolerance(name)`; `tag` distinguishes repeated runs
    /// of the same check.
    fn check(&mut self, name: &str, tag: Option<&str>, value: f64) -> Result<(), CliError> {
        let full = match tag {
            Some(t) => format!("{name}[{t}]"),
            None => name.to_string(),
        };
        let grid = self.report.grid.ok_or_else(|| CliError::Config("grid: unknown".into()))?;
        self.report.check(&full, value, self.cfg.tolerance(name, &grid))?;
        Ok(())
    }

    fn path(&mut self, name: &str) -> PathBuf {
        let p = self.out.join(name);
        self.files.push(p.clone());
        p
    }

    fn finish(self) -> Outcome {
        Outcome { report: self.report, files: self.files }
    }
}

fn lambda_tag(lambda: f64) -> String {
    format!("lambda={lambda}")
}

fn load_meridian(theta: isoflat::TurningAngle, r_init: f64, cfg: &RunConfig) -> Result<(MeridianCurve, isoflat::Grid), CliError> {
    let g = cfg.require_grid()?;
    Ok((solve_meridian(theta, r_init, g.x0, g.hx, g.nx)?, g))
}

fn load_patch(cfg: &RunConfig) -> Result<(IsothermicPatch, Option<MeridianCurve>), CliError> {
    let patch = match &cfg.source {
        Source::Cylinder { radius } => make_cylinder_patch(*radius, cfg.require_grid()?)?,
        Source::Plane => make_plane_patch(cfg.require_grid()?)?,
        Source::Meridian { theta, r_init } => {
            let (m, g) = load_meridian(*theta, *r_init, cfg)?;
            let p = revolution_patch(&m, g)?;
            return Ok((p, Some(m)));
        }
        Source::PatchFile { path } => {
            let p = io::read_patch(path).map_err(|e| CliError::Input { path: path.clone(), source: e })?;
            check_grid_agrees(cfg, p.grid())?;
            p
        }
        other => return Err(CliError::Config(format!("source: `{}` is not an isothermic patch", other.name()))),
    };
    Ok((patch, None))
}

fn load_k(cfg: &RunConfig) -> Result<CalapsoField, CliError> {
    let k = match &cfg.source {
        Source::KFile { path } => {
            let k = io::read_scalar_field(path).map_err(|e| CliError::Input { path: path.clone(), source: e })?;
            check_grid_agrees(cfg, k.grid())?;
            k
        }
        Source::KBilinear { a, b, c, d } => {
            ScalarField::sample(cfg.require_grid()?, |x, y| a + b * x + c * y + d * x * y)
        }
        Source::KMeridian { theta, r_init } => {
            let (m, g) = load_meridian(*theta, *r_init, cfg)?;
            conformal_factor_k(&m).to_field(g)?
        }
        other => return Err(CliError::Config(format!("source: `{}` is not a Calapso potential", other.name()))),
    };
    Ok(CalapsoField::new(k)?)
}

fn check_grid_agrees(cfg: &RunConfig, file_grid: &isoflat::Grid) -> Result<(), CliError> {
    match cfg.grid {
        Some(g) if g != *file_grid => {
            Err(CliError::Config(format!("grid: {g:?} disagrees with the grid stored in the input file {file_grid:?}")))
        }
        _ => Ok(()),
    }
}

fn is_x_only(k: &ScalarField) -> bool {
    k.iter_nodes().all(|((i, _), v)| v == k.at(i, 0))
}

fn triple_defect(triple: &SurfaceTriple) -> f64 {
    triple.worst_pairing().4
}

fn translation_rms(a: &[Point3], b: &[Point3]) -> f64 {
    let n = a.len() as f64;
    let shift = (b.iter().sum::<Point3>() - a.iter().sum::<Point3>()) / n;
    let moved: Vec<Point3> = a.iter().map(|p| p + shift).collect();
    rms_distance(&moved, b)
}

pub fn cmd_check(cfg: &RunConfig, out: &Path) -> Result<Outcome, CliError> {
    let mut cx = Context::new("check", cfg, out);
    if cfg.source.is_patch() {
        let (patch, _) = load_patch(cfg)?;
        cx.report.grid = Some(*patch.grid());
        cx.check("gauss_codazzi", None, gauss_codazzi_residual(&patch).max_abs())?;
        for &lambda in &cfg.lambdas() {
            let tag = lambda_tag(lambda);
            let form = build_phi_lambda(&patch, lambda);
            let fr = flatness_report(&form);
            cx.check("algebra_defect", Some(&tag), form.algebra_defect())?;
            cx.check("zero_curvature", Some(&tag), fr.residual)?;
            cx.check("curved_flat", Some(&tag), fr.curved_flat)?;
        }
    } else {
        let field = load_k(cfg)?;
        cx.report.grid = Some(*field.grid());
        let u0 = cfg.u0.unwrap_or_else(|| revolution_u0(&field, cfg.calapso_lambda()));
        cx.report.info("u0", u0);
        cx.check("calapso_residual", None, calapso_residual_max(&field))?;
        cx.check("compatibility", None, integrate_u(&field, u0).compatibility_defect)?;
    }
    Ok(cx.finish())
}

pub fn cmd_build(cfg: &RunConfig, out: &Path) -> Result<Outcome, CliError> {
    let mut cx = Context::new("build", cfg, out);
    let (patch, meridian) = load_patch(cfg)?;
    let g = *patch.grid();
    cx.report.grid = Some(g);
    cx.report.info("lambda", cfg.lambdas());
    let base = GroupElement::identity();
    for (idx, &lambda) in cfg.lambdas().iter().enumerate() {
        let tag = lambda_tag(lambda);
        let form = build_phi_lambda(&patch, lambda);
        let frames = integrate_frame(&form, &base)?;
        let triple = SurfaceTriple::from_frames(&frames);
        cx.check("path_independence", Some(&tag), path_independence_defect(&form, &frames)?)?;
        cx.check("orthogonality", Some(&tag), frames.max_relative_defect())?;
        cx.check("triple_pairing", Some(&tag), triple_defect(&triple))?;
        if let Some(m) = &meridian {
            let direct = integrate_frame(&build_revolution_form(m, lambda, g)?, &base)?;
            let other = extract_triple(&direct)?;
            let d = projected_distance(&triple.f, &other.f, &MinkowskiVector::basis(5))?;
            cx.check("cross_route", Some(&tag), d)?;
        }
        let p = cx.path(&format!("frames_{idx}.json"));
        io::write_json(&p, &frames.to_json())?;
        let p = cx.path(&format!("triple_{idx}.csv"));
        io::write_triple_csv(&p, &triple)?;
    }
    Ok(cx.finish())
}

pub fn cmd_surfaces(cfg: &RunConfig, out: &Path) -> Result<Outcome, CliError> {
    let mut cx = Context::new("surfaces", cfg, out);
    let (patch, _) = load_patch(cfg)?;
    let g = *patch.grid();
    cx.report.grid = Some(g);
    let base = GroupElement::identity();

    let frames0 = integrate_frame(&build_phi_lambda(&patch, 0.0), &base)?;
    let sym = sym_surfaces(&patch, &frames0)?;
    cx.check("sym_closedness", None, sym.closedness)?;
    let (first, second) = isothermic_forms(&patch);
    cx.check("first_form", None, sym.f.first.max_difference(&first, FORM_MARGIN))?;
    cx.check("second_form", None, sym.f.second.max_difference(&second, FORM_MARGIN))?;

    let dual = euclidean_dual(&sym.f, &patch.u)?;
    cx.check("dual_closedness", None, dual.closedness)?;
    let (dfirst, dsecond) = dual_forms(&patch);
    cx.check("dual_first_form", None, dual.surface.first.max_difference(&dfirst, FORM_MARGIN))?;
    cx.check("dual_second_form", None, dual.surface.second.max_difference(&dsecond, FORM_MARGIN))?;
    let back = euclidean_dual(&dual.surface, &patch.u.map(|u| -u))?;
    cx.check("dual_involution", None, translation_rms(&back.surface.point_list(), &sym.f.point_list()))?;
    cx.check("dual_vs_sym", None, translation_rms(&dual.surface.point_list(), &sym.fhat.point_list()))?;

    for &lambda in &cfg.lambdas() {
        let tag = lambda_tag(lambda);
        let triple = extract_triple(&integrate_frame(&build_phi_lambda(&patch, lambda), &base)?)?;
        cx.check("envelope", Some(&tag), envelope_defect(&triple).max())?;
        cx.check("diagonality", Some(&tag), second_form_diagonality(&triple).max_off_diagonal())?;
    }

    write_surface(&mut cx, "f", &sym.f)?;
    write_surface(&mut cx, "fhat", &sym.fhat)?;
    Ok(cx.finish())
}

fn write_surface(cx: &mut Context, stem: &str, s: &EuclideanSurface) -> Result<(), CliError> {
    let p = cx.path(&format!("{stem}.obj"));
    io::write_obj(&p, s)?;
    let p = cx.path(&format!("{stem}.csv"));
    io::write_surface_csv(&p, s)?;
    Ok(())
}

pub fn cmd_calapso(cfg: &RunConfig, out: &Path) -> Result<Outcome, CliError> {
    let mut cx = Context::new("calapso", cfg, out);
    let field = load_k(cfg)?;
    let g = *field.grid();
    cx.report.grid = Some(g);
    let lambda = cfg.calapso_lambda();
    let u0 = cfg.u0.unwrap_or_else(|| revolution_u0(&field, lambda));
    cx.report.info("u0", u0);
    cx.report.info("lambda", lambda);

    let config = CalapsoConfig { residual_threshold: cfg.tolerance("calapso_residual", &g), ..CalapsoConfig::default() };
    let s = isothermic_from_calapso_with(&field, u0, &GroupElement::identity(), &config)?;
    cx.check("calapso_residual", None, s.residual)?;
    cx.check("compatibility", None, s.u.compatibility_defect)?;
    if cfg.u0.is_none() && is_x_only(field.k()) {
        let expected = field.k().map(|k| lambda * lambda - k * k);
        let err = s.u.u.zip_map(&expected, |a, b| a - b).max_abs();
        cx.check("u_closed_form", None, err)?;
    }
    cx.check("orthogonality", None, s.frames.max_relative_defect())?;
    cx.check("triple_pairing", None, triple_defect(&s.triple))?;
    if let (Source::KMeridian { theta, r_init }, true, None) = (&cfg.source, lambda == SURFACE_LAMBDA, cfg.u0) {
        let (m, _) = load_meridian(*theta, *r_init, cfg)?;
        let lifted = m.embedding(g)?.map(light_cone_lift);
        let d = cross_ratio_mismatch(&s.triple.f, &lifted, &cross_ratio_nodes(&g))?;
        cx.check("revolution_match", None, d)?;
    }
    let c = conformality_defect(&s.chart_points, FORM_MARGIN);
    cx.check("chart_conformality", None, c.off_diagonal.max(c.anisotropy))?;

    let p = cx.path("u.csv");
    io::write_scalar_field(&p, &s.u.u)?;
    let p = cx.path("triple.csv");
    io::write_triple_csv(&p, &s.triple)?;
    let mesh = EuclideanSurface::from_points(s.chart_points.clone())?;
    let p = cx.path("surface.obj");
    io::write_obj(&p, &mesh)?;
    Ok(cx.finish())
}
