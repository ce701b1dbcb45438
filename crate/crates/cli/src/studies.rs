use crate::config::{Experiment, ExperimentConfig, Geometry};
use crate::output::{Cell, Table};
use composite_bem::fields::{
    e_plane_directions, energy_norm, far_field, sample_trace, stratton_chu, trace_magnitudes, transfer_rwg, write_vtk_points,
    write_vtk_surface, FieldError, MieSeries,
};
use composite_bem::formulations::{
    extinction_residual, imaginary_wavenumber_inverse, BlockCalderon, ClassicSystem, DensePreconditioned, Discretisation,
    FormulationError, QlChain, QlSystem,
};
use composite_bem::geometry::{load_mesh, make_sphere, make_split_sphere, make_two_cubes, GeometryError, SkeletonMesh};
use composite_bem::krylov::{condition_number, gmres, KrylovError, SolveReport};
use composite_bem::linalg::CVec3;
use composite_bem::operators::{interpolate_cauchy, planewave_rhs, OperatorError, PlaneWave};
use composite_bem::quadrature::QuadratureOrders;
use composite_bem::{Point, C64};
use std::sync::Arc;
use std::time::Instant;

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Formulation(#[from] FormulationError),
    #[error(transparent)]
    Krylov(#[from] KrylovError),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Operator(#[from] OperatorError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("{0}")]
    Setup(String),
}

pub type Run<T> = Result<T, RunError>;

/// Tables and VTK files of one experiment. Wall times go to their own
/// table so that the others are reproducible bit for bit.
pub struct StudyOutput {
    pub tables: Vec<Table>,
    pub vtk: Vec<(String, Vec<u8>)>,
    pub timing: Table,
}

impl StudyOutput {
    fn new(name: &str) -> Self {
        StudyOutput { tables: Vec::new(), vtk: Vec::new(), timing: Table::new(&format!("{name}_timing"), &["step", "wall_time"]) }
    }

    fn time(&mut self, step: String, since: Instant) {
        self.timing.push(vec![step.into(), since.elapsed().as_secs_f64().into()]);
    }

    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.name == name)
    }
}

fn orders() -> QuadratureOrders {
    QuadratureOrders::default()
}

fn status(r: &SolveReport) -> String {
    if r.converged {
        "ok".into()
    } else {
        format!("not converged after {} iterations (residual {:.3e})", r.iterations, r.final_residual)
    }
}

fn failed(e: &RunError) -> String {
    format!("failed: {e}")
}

pub fn mesh_for(cfg: &ExperimentConfig, h: f64) -> Run<SkeletonMesh> {
    let mesh = match &cfg.geometry {
        Geometry::TwoCubes => make_two_cubes(h)?,
        Geometry::Sphere => make_sphere(h)?,
        Geometry::SplitSphere(kind) => make_split_sphere(h, *kind)?,
        Geometry::File(p) => load_mesh(p)?,
    };
    if mesh.domain_count != cfg.materials.len() {
        return Err(RunError::Setup(format!("mesh has {} domains, config describes {}", mesh.domain_count, cfg.materials.len())));
    }
    Ok(mesh)
}

/// Discretisation, block operator and incident data at one (h, κ₀).
pub struct Problem {
    pub disc: Discretisation,
    pub calderon: BlockCalderon,
    pub wave: PlaneWave,
    pub e_f: Vec<C64>,
}

impl Problem {
    pub fn new(cfg: &ExperimentConfig, disc: Discretisation, kappa0: f64) -> Run<Self> {
        let calderon = BlockCalderon::assemble(&disc.rwg, &cfg.materials, C64::new(kappa0, 0.0), orders())?;
        let wave = PlaneWave::standard(kappa0, cfg.materials[0]);
        let e_f = planewave_rhs(&disc.rwg, &wave)?;
        Ok(Problem { disc, calderon, wave, e_f })
    }

    pub fn build(cfg: &ExperimentConfig, h: f64) -> Run<Self> {
        Self::new(cfg, Discretisation::new(mesh_for(cfg, h)?)?, cfg.kappa0)
    }

    /// Single-trace solution w of the quasi-local system.
    pub fn solve_ql(&self, cfg: &ExperimentConfig, chain: Arc<QlChain>) -> Run<(Vec<C64>, SolveReport)> {
        let sys = QlSystem::with_chain(&self.calderon, &self.disc, chain, &self.e_f)?;
        Ok(gmres(&sys, &sys.rhs, cfg.gmres())?)
    }

    pub fn solve_classic(&self, cfg: &ExperimentConfig) -> Run<(Vec<C64>, SolveReport)> {
        let sys = ClassicSystem::new(&self.calderon, &self.disc.r, &self.e_f)?;
        Ok(gmres(&sys, &sys.rhs, cfg.gmres())?)
    }
}

/// Least-squares slope of log e against log h.
pub fn fit_slope(h: &[f64], e: &[f64]) -> f64 {
    let n = h.len() as f64;
    let x: Vec<f64> = h.iter().map(|v| v.ln()).collect();
    let y: Vec<f64> = e.iter().map(|v| v.ln()).collect();
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let sxy: f64 = x.iter().zip(&y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

/// Full multi-trace vector of `from` rewritten on the RWG spaces of `to`.
fn transfer(from: &Discretisation, u: &[C64], to: &Discretisation) -> Run<Vec<C64>> {
    let mut out = vec![C64::new(0.0, 0.0); to.rwg.dim()];
    for i in 0..from.rwg.domain_count() {
        let (m, j) = transfer_rwg(&from.rwg.spaces[i], &u[from.rwg.electric(i)], &u[from.rwg.magnetic(i)], &to.rwg.spaces[i])?;
        out[to.rwg.electric(i)].copy_from_slice(&m);
        out[to.rwg.magnetic(i)].copy_from_slice(&j);
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, Default)]
pub struct SweepParts {
    pub energy: bool,
    pub extinction: bool,
    pub classic: bool,
}

#[derive(Debug, Clone, Default)]
pub struct SweepRow {
    pub h: f64,
    pub dofs: usize,
    pub it_ql: Option<usize>,
    pub it_classic: Option<usize>,
    pub nnz_per_column: Option<f64>,
    pub energy_error: Option<f64>,
    pub energy_error_rel: Option<f64>,
    pub extinction_error: Option<f64>,
    pub status: String,
}

/// The h-sweep behind the convergence, extinction and iteration studies.
/// The reference solution (at h_ref) is computed first and only when the
/// energy error is wanted.
pub fn sweep(cfg: &ExperimentConfig, parts: SweepParts, out: &mut StudyOutput) -> Run<Vec<SweepRow>> {
    let reference = match (parts.energy, cfg.h_ref) {
        (false, _) => None,
        (true, None) => return Err(RunError::Setup("the energy error needs `h_ref`".into())),
        (true, Some(h_ref)) => {
            let t = Instant::now();
            let p = Problem::build(cfg, h_ref)?;
            let chain = Arc::new(QlChain::new(&p.disc, cfg.ql_options(h_ref))?);
            let (w, r) = p.solve_ql(cfg, chain)?;
            if !r.converged {
                return Err(RunError::Setup(format!("reference solve: {}", status(&r))));
            }
            let u = p.disc.expand(&w);
            let norm = energy_norm(&u, &p.disc.rwg, cfg.kappa0, orders())?;
            out.time(format!("reference h={h_ref}"), t);
            Some((p.disc, u, norm))
        }
    };

    let mut rows = Vec::new();
    for &h in &cfg.h {
        let t = Instant::now();
        let mut row = SweepRow { h, ..Default::default() };
        let result = (|| -> Run<()> {
            let p = Problem::build(cfg, h)?;
            row.dofs = p.disc.unknowns();
            let chain = Arc::new(QlChain::new(&p.disc, cfg.ql_options(h))?);
            row.nnz_per_column = Some(chain.nnz_per_column());
            let (w, r) = p.solve_ql(cfg, chain)?;
            row.it_ql = Some(r.iterations);
            row.status = status(&r);
            if let Some((disc_ref, u_ref, norm_ref)) = &reference {
                let mut d = transfer(&p.disc, &p.disc.expand(&w), disc_ref)?;
                d.iter_mut().zip(u_ref).for_each(|(a, b)| *a -= b);
                let e = energy_norm(&d, &disc_ref.rwg, cfg.kappa0, orders())?;
                row.energy_error = Some(e);
                row.energy_error_rel = Some(e / norm_ref);
            }
            if parts.extinction {
                let (_, v_g) = extinction_residual(&p.calderon, &p.disc, &w, &p.e_f)?;
                row.extinction_error = Some(energy_norm(&v_g, &p.disc.bc, cfg.kappa0, orders())?);
            }
            if parts.classic {
                let (_, r) = p.solve_classic(cfg)?;
                row.it_classic = Some(r.iterations);
                if !r.converged {
                    row.status = format!("classic {}", status(&r));
                }
            }
            Ok(())
        })();
        if let Err(e) = result {
            row.status = failed(&e);
        }
        out.time(format!("h={h}"), t);
        rows.push(row);
    }
    Ok(rows)
}

fn sweep_table(name: &str, rows: &[SweepRow], parts: SweepParts) -> Table {
    let mut cols = vec!["h", "dofs", "it_ql", "nnz_per_column"];
    if parts.energy {
        cols.extend(["energy_error", "energy_error_rel"]);
    }
    if parts.extinction {
        cols.push("extinction_error");
    }
    if parts.classic {
        cols.push("it_classic");
    }
    cols.push("status");
    let mut t = Table::new(name, &cols);
    for r in rows {
        let mut row: Vec<Cell> = vec![r.h.into(), r.dofs.into(), r.it_ql.into(), r.nnz_per_column.into()];
        if parts.energy {
            row.extend([r.energy_error.into(), r.energy_error_rel.into()]);
        }
        if parts.extinction {
            row.push(r.extinction_error.into());
        }
        if parts.classic {
            row.push(r.it_classic.into());
        }
        row.push(r.status.clone().into());
        t.push(row);
    }
    t
}

fn run_sweep(cfg: &ExperimentConfig, parts: SweepParts) -> Run<StudyOutput> {
    let name = cfg.experiment.name();
    let mut out = StudyOutput::new(name);
    let rows = sweep(cfg, parts, &mut out)?;
    out.tables.push(sweep_table(name, &rows, parts));
    Ok(out)
}

fn mie(cfg: &ExperimentConfig) -> Run<StudyOutput> {
    let sphere = cfg.materials[1];
    if cfg.materials[1..].iter().any(|m| *m != sphere) {
        return Err(RunError::Setup("the Mie comparison needs one material in all interior domains".into()));
    }
    let mut out = StudyOutput::new("mie");
    let dirs = e_plane_directions(cfg.angles);
    let series = MieSeries::new(1.0, sphere, cfg.materials[0], cfg.kappa0, None)?;
    let kappa = cfg.materials[0].kappa(cfg.kappa0).re;
    let exact: Vec<f64> = dirs.iter().map(|&(t, _)| series.rcs_e_plane(t, kappa)).collect();

    let mut rcs = Table::new("mie", &["h", "angle_deg", "rcs_solver", "rcs_mie", "rcs_solver_db", "rcs_mie_db"]);
    let mut runs = Table::new("mie_runs", &["h", "dofs", "iterations", "nnz_per_column", "rcs_rel_l2_error", "status"]);
    for &h in &cfg.h {
        let t = Instant::now();
        let mut record = (0usize, None, None, None);
        let result = (|| -> Run<String> {
            let p = Problem::build(cfg, h)?;
            record.0 = p.disc.unknowns();
            let chain = Arc::new(QlChain::new(&p.disc, cfg.ql_options(h))?);
            record.2 = Some(chain.nnz_per_column());
            let (w, r) = p.solve_ql(cfg, chain)?;
            record.1 = Some(r.iterations);
            let u = p.disc.expand(&w);
            let (m0, j0) = (&u[p.disc.rwg.electric(0)], &u[p.disc.rwg.magnetic(0)]);
            let solver = far_field(&p.disc.rwg.spaces[0], m0, j0, cfg.kappa0, cfg.materials[0], &dirs)?.rcs();
            let num: f64 = solver.iter().zip(&exact).map(|(a, b)| (a - b).powi(2)).sum();
            let den: f64 = exact.iter().map(|b| b * b).sum();
            record.3 = Some((num / den).sqrt());
            for ((&(theta, _), s), e) in dirs.iter().zip(&solver).zip(&exact) {
                rcs.push(vec![h.into(), theta.to_degrees().into(), (*s).into(), (*e).into(), (10.0 * s.log10()).into(), (10.0 * e.log10()).into()]);
            }
            out.vtk.push((format!("mie_traces_h{h}"), surface_vtk(&p.disc, &u, 0)?));
            out.vtk.push((format!("mie_nearfield_h{h}"), near_field_vtk(cfg, &p, &u)?));
            Ok(status(&r))
        })();
        let s = result.unwrap_or_else(|e| failed(&e));
        runs.push(vec![h.into(), record.0.into(), record.1.into(), record.2.into(), record.3.into(), s.into()]);
        out.time(format!("h={h}"), t);
    }
    out.tables.extend([rcs, runs]);
    Ok(out)
}

fn surface_vtk(disc: &Discretisation, u: &[C64], domain: usize) -> Run<Vec<u8>> {
    let space = &disc.rwg.spaces[domain];
    let (tris, m) = trace_magnitudes(space, &u[disc.rwg.electric(domain)]);
    let (_, j) = trace_magnitudes(space, &u[disc.rwg.magnetic(domain)]);
    let mut buf = Vec::new();
    write_vtk_surface(&mut buf, &format!("trace magnitudes, domain {domain}"), &space.level, &tris, &[("m_abs", &m), ("j_abs", &j)])?;
    Ok(buf)
}

/// Total field on a grid in the plane y = 0, each point evaluated from the
/// traces of the domain containing it.
fn near_field_vtk(cfg: &ExperimentConfig, p: &Problem, u: &[C64]) -> Run<Vec<u8>> {
    let n = 31;
    let points: Vec<Point> = (0..n * n)
        .map(|k| {
            let (a, b) = ((k % n) as f64 / (n - 1) as f64, (k / n) as f64 / (n - 1) as f64);
            // offset so no grid point sits on a mesh face
            Point::new(-1.5 + 3.0 * a + 1e-3, 1e-3, -1.5 + 3.0 * b + 1e-3)
        })
        .collect();
    let mut e = vec![CVec3::ZERO; points.len()];
    let mut h = vec![CVec3::ZERO; points.len()];
    let rwg = &p.disc.rwg;
    for d in 0..rwg.domain_count() {
        let inc = (d == 0).then_some(&p.wave);
        let s = stratton_chu(&rwg.spaces[d], d, &u[rwg.electric(d)], &u[rwg.magnetic(d)], cfg.materials[d], cfg.kappa0, inc, &points)?;
        for k in (0..points.len()).filter(|&k| s.inside[k]) {
            e[k] = s.e[k];
            h[k] = s.h[k];
        }
    }
    let mut buf = Vec::new();
    write_vtk_points(&mut buf, "total field, plane y = 0", &points, &[("e", &e), ("h", &h)])?;
    Ok(buf)
}

fn resonance(cfg: &ExperimentConfig) -> Run<StudyOutput> {
    let mut out = StudyOutput::new("resonance");
    let h = cfg.h[0];
    let disc = Discretisation::new(mesh_for(cfg, h)?)?;
    let chain = Arc::new(QlChain::new(&disc, cfg.ql_options(h))?);
    let dofs = disc.unknowns();
    let mut table = Table::new("resonance", &["kappa0", "h", "dofs", "cond_ql", "cond_classic_preconditioned", "status"]);
    for k in cfg.kappa0_values() {
        let t = Instant::now();
        let mut conds = (None, None);
        let result = (|| -> Run<()> {
            let calderon = BlockCalderon::assemble(&disc.rwg, &cfg.materials, C64::new(k, 0.0), orders())?;
            let e_f = planewave_rhs(&disc.rwg, &PlaneWave::standard(k, cfg.materials[0]))?;
            let ql = QlSystem::with_chain(&calderon, &disc, chain.clone(), &e_f)?;
            conds.0 = Some(condition_number(&ql)?);
            let classic = ClassicSystem::new(&calderon, &disc.r, &e_f)?;
            let pre = imaginary_wavenumber_inverse(&disc, &cfg.materials, k, orders())?;
            conds.1 = Some(condition_number(&DensePreconditioned { p: pre, op: &classic })?);
            Ok(())
        })();
        let s = match result {
            Ok(()) => "ok".to_string(),
            Err(e) => failed(&e),
        };
        table.push(vec![k.into(), h.into(), dofs.into(), conds.0.into(), conds.1.into(), s.into()]);
        out.time(format!("kappa0={k}"), t);
    }
    out.tables.push(table);
    Ok(out)
}

fn identity(cfg: &ExperimentConfig) -> Run<StudyOutput> {
    let bg = cfg.materials[0];
    if cfg.materials.iter().any(|m| *m != bg) {
        return Err(RunError::Setup("the identity study needs every domain filled with the background material".into()));
    }
    let mut out = StudyOutput::new("identity");
    let mut table = Table::new("identity", &["h", "identity_term", "dofs", "iterations", "energy_error", "energy_error_rel", "status"]);
    let mut line = Table::new("identity_line", &["h", "x", "m_exact", "m_identity", "m_no_identity", "j_exact", "j_identity", "j_no_identity"]);
    for &h in &cfg.h {
        let t = Instant::now();
        let result = (|| -> Run<()> {
            let p = Problem::build(cfg, h)?;
            let disc = &p.disc;
            // exact total-field traces on every domain boundary
            let mut u_ex = vec![C64::new(0.0, 0.0); disc.rwg.dim()];
            for i in 0..disc.rwg.domain_count() {
                let (m, j) = interpolate_cauchy(&disc.rwg.spaces[i], &|x| p.wave.e(x), &|x| p.wave.h(x), 6)?;
                u_ex[disc.rwg.electric(i)].copy_from_slice(&m);
                u_ex[disc.rwg.magnetic(i)].copy_from_slice(&j);
            }
            let norm_ex = energy_norm(&u_ex, &disc.rwg, cfg.kappa0, orders())?;
            // along y = 0.5 on the top face z = 1 of the larger cube
            let xs: Vec<f64> = (0..cfg.line_samples).map(|k| 0.01 + 0.98 * k as f64 / (cfg.line_samples - 1).max(1) as f64).collect();
            let pts: Vec<Point> = xs.iter().map(|&x| Point::new(x, 0.5, 1.0)).collect();
            let mut samples = Vec::new();
            for on in [true, false] {
                let mut opts = cfg.ql_options(h);
                opts.identity_term = on;
                let chain = Arc::new(QlChain::new(disc, opts)?);
                let row = (|| -> Run<(usize, f64, String)> {
                    let (w, r) = p.solve_ql(cfg, chain)?;
                    let u = disc.expand(&w);
                    let d: Vec<C64> = u.iter().zip(&u_ex).map(|(a, b)| a - b).collect();
                    let e = energy_norm(&d, &disc.rwg, cfg.kappa0, orders())?;
                    if matches!(cfg.geometry, Geometry::TwoCubes) {
                        let s = &disc.rwg.spaces[1];
                        samples.push((sample_trace(s, &u[disc.rwg.electric(1)], &pts)?, sample_trace(s, &u[disc.rwg.magnetic(1)], &pts)?));
                    }
                    out.vtk.push((format!("identity_traces_h{h}_{}", if on { "on" } else { "off" }), surface_vtk(disc, &u, 1)?));
                    Ok((r.iterations, e, status(&r)))
                })();
                table.push(match row {
                    Ok((it, e, s)) => vec![h.into(), on.to_string().into(), disc.unknowns().into(), it.into(), e.into(), (e / norm_ex).into(), s.into()],
                    Err(e) => vec![h.into(), on.to_string().into(), disc.unknowns().into(), None::<usize>.into(), None::<f64>.into(), None::<f64>.into(), failed(&e).into()],
                });
            }
            if let [(m_on, j_on), (m_off, j_off)] = samples.as_slice() {
                let n = Point::Z;
                for (k, (&x, &pt)) in xs.iter().zip(&pts).enumerate() {
                    let m_ex = p.wave.e(pt).cross_real(n).norm();
                    let j_ex = CVec3::real_cross(n, &p.wave.h(pt)).norm();
                    line.push(vec![
                        h.into(),
                        x.into(),
                        m_ex.into(),
                        m_on[k].norm().into(),
                        m_off[k].norm().into(),
                        j_ex.into(),
                        j_on[k].norm().into(),
                        j_off[k].norm().into(),
                    ]);
                }
            }
            Ok(())
        })();
        if let Err(e) = result {
            for on in [true, false] {
                table.push(vec![h.into(), on.to_string().into(), 0usize.into(), None::<usize>.into(), None::<f64>.into(), None::<f64>.into(), failed(&e).into()]);
            }
        }
        out.time(format!("h={h}"), t);
    }
    out.tables.extend([table, line]);
    Ok(out)
}

fn delta(cfg: &ExperimentConfig) -> Run<StudyOutput> {
    let mut out = StudyOutput::new("delta");
    let h = cfg.h[0];
    let deltas = cfg.delta.clone().unwrap_or_else(|| vec![2.0 * h, h, h / 2.0, h / 4.0]);
    let p = Problem::build(cfg, h)?;
    let mut table = Table::new("delta", &["delta", "delta_over_h", "h", "dofs", "iterations", "nnz_per_column", "status"]);
    for d in deltas {
        let t = Instant::now();
        let mut rec = (None, None);
        let result = (|| -> Run<String> {
            let mut opts = cfg.ql_options(h);
            opts.delta = d;
            let chain = Arc::new(QlChain::new(&p.disc, opts)?);
            rec.1 = Some(chain.nnz_per_column());
            let (_, r) = p.solve_ql(cfg, chain)?;
            rec.0 = Some(r.iterations);
            Ok(status(&r))
        })();
        let s = result.unwrap_or_else(|e| failed(&e));
        table.push(vec![d.into(), (d / h).into(), h.into(), p.disc.unknowns().into(), rec.0.into(), rec.1.into(), s.into()]);
        out.time(format!("delta={d}"), t);
    }
    out.tables.push(table);
    Ok(out)
}

pub fn run_study(cfg: &ExperimentConfig) -> Run<StudyOutput> {
    match cfg.experiment {
        Experiment::Mie => mie(cfg),
        Experiment::Convergence => run_sweep(cfg, SweepParts { energy: true, ..Default::default() }),
        Experiment::Extinction => run_sweep(cfg, SweepParts { extinction: true, ..Default::default() }),
        Experiment::Iterations => run_sweep(cfg, SweepParts { classic: true, ..Default::default() }),
        Experiment::Resonance => resonance(cfg),
        Experiment::Identity => identity(cfg),
        Experiment::Delta => delta(cfg),
    }
}
