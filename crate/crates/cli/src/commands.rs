//! The eleven subcommands. Each turns a resolved config into a report.

use crate::config::RunConfig;
use crate::report::{cx, matrix, tensor, Bound, Report};
use crate::CliError;
use hbar_quantum::{PbwContext, PbwElement, PbwTensor, TensorSeries};
use lie_core::mat::{self, CMat, C64};
use lie_core::{standard_r, CartanElement, Chamber};
use poisson_geom::{DualObservable, Side, StokesFamily};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use std::f64::consts::PI;
use stokes_classical::{ConnectionData, StokesData};

pub fn dispatch(cfg: &RunConfig) -> Result<Report, CliError> {
    let mut rep = Report::new(cfg);
    match cfg.command() {
        "stokes" => stokes(cfg, &mut rep)?,
        "factors" => factors(cfg, &mut rep)?,
        "monodromy" => monodromy(cfg, &mut rep)?,
        "stokes-map" => stokes_map(cfg, &mut rep)?,
        "poisson-verify" => poisson_verify(cfg, &mut rep)?,
        "twist-order1" => twist_order1(cfg, &mut rep)?,
        "quantum-stokes-order1" => quantum_stokes(cfg, &mut rep)?,
        "scl-check" => scl_check(cfg, &mut rep)?,
        "iso-flow" => iso_flow(cfg, &mut rep)?,
        "pde-check" => pde_check(cfg, &mut rep)?,
        "duality" => duality(cfg, &mut rep)?,
        other => return Err(CliError::Validation { code: "InvalidConfig".into(), message: format!("unknown command '{other}'") }),
    }
    Ok(rep)
}

fn rng(cfg: &RunConfig) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(cfg.seed)
}

/// Increasing real entries with gaps in [0.5, 1.5): a point of −C.
fn random_a(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let mut a = Vec::with_capacity(n);
    let mut x = rng.random_range(-3.0..-1.0);
    for _ in 0..n {
        a.push(x);
        x += rng.random_range(0.5..1.5);
    }
    a
}

fn random_matrix(rng: &mut ChaCha8Rng, n: usize, max_norm: f64) -> CMat {
    let m = CMat::from_fn(n, n, |_, _| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
    let target = rng.random_range(0.1..max_norm);
    &m * C64::new(target / mat::frob(&m), 0.0)
}

/// First pair of eigenvalues of B differing by a nonzero integer.
fn resonance(b: &CMat) -> Option<(C64, C64, i64)> {
    let ev = mat::eigenvalues(b);
    for x in &ev {
        for y in &ev {
            if let Some(k) = mat::near_nonzero_integer(x - y, 1e-8) {
                return Some((*x, *y, k));
            }
        }
    }
    None
}

fn random_nonresonant(rng: &mut ChaCha8Rng, n: usize, max_norm: f64, traceless: bool) -> CMat {
    loop {
        let mut b = random_matrix(rng, n, max_norm);
        if traceless {
            let t = b.trace() / n as f64;
            b -= mat::eye(n) * t;
        }
        let ev = mat::eigenvalues(&b);
        if !ev.iter().any(|x| ev.iter().any(|y| mat::near_nonzero_integer(x - y, 1e-3).is_some())) {
            return b;
        }
    }
}

fn traceless(cfg: &RunConfig) -> bool {
    cfg.kind == crate::config::Kind::Sl
}

/// (A, B) pairs: the explicit pair, or `sample.count` draws.
fn instances(cfg: &RunConfig) -> Vec<(CartanElement, CMat)> {
    let n = cfg.n();
    if let (Some(a), Some(b)) = (cfg.a_element(), cfg.b_matrix()) {
        return vec![(a, b)];
    }
    let s = cfg.sample.clone().expect("resolved config has a sample spec");
    let mut r = rng(cfg);
    (0..s.count)
        .map(|_| {
            let a = cfg.a_element().unwrap_or_else(|| {
                let a = CartanElement::real(&random_a(&mut r, n));
                if traceless(cfg) {
                    a.project_sl()
                } else {
                    a
                }
            });
            let b = random_nonresonant(&mut r, n, s.norm, traceless(cfg));
            (a, b)
        })
        .collect()
}

fn connection(cfg: &RunConfig, a: &CartanElement, b: &CMat) -> Result<ConnectionData, CliError> {
    Ok(ConnectionData::with_geometry(cfg.ctx(), a.clone(), b.clone(), cfg.ray.unwrap_or(-PI / 2.0), cfg.cut.unwrap_or(PI))?)
}

fn require_nonresonant(b: &CMat) -> Result<(), CliError> {
    if let Some((x, y, k)) = resonance(b) {
        return Err(CliError::Validation {
            code: "ResonantB".into(),
            message: format!(
                "B is resonant: eigenvalues {:.6}{:+.6}i and {:.6}{:+.6}i differ by the nonzero integer {}; the connection matrix at infinity is not defined",
                x.re, x.im, y.re, y.im, k.abs()
            ),
        });
    }
    Ok(())
}

fn cartan_json(a: &CartanElement) -> Value {
    json!(a.entries.iter().map(|z| cx(*z)).collect::<Vec<_>>())
}

fn is_diagonal(b: &CMat) -> bool {
    (0..b.nrows()).all(|i| (0..b.ncols()).all(|j| i == j || b[(i, j)] == C64::new(0.0, 0.0)))
}

fn stokes(cfg: &RunConfig, rep: &mut Report) -> Result<(), CliError> {
    let scfg = cfg.stokes_config();
    let mut out = Vec::new();
    for (k, (a, b)) in instances(cfg).iter().enumerate() {
        let conn = connection(cfg, a, b)?;
        let d: StokesData = stokes_matrices_checked(&conn, &scfg)?;
        let f = conn.tolerance_factor();
        rep.check("unipotence", d.residuals["unipotence_plus"].max(d.residuals["unipotence_minus"]), cfg.tol("unipotence") * f);
        rep.check("pattern", d.residuals["pattern_plus"].max(d.residuals["pattern_minus"]), cfg.tol("pattern") * f);
        if let Some(m) = d.residuals.get("monodromy") {
            rep.check("monodromy", *m, cfg.tol("monodromy") * f);
        } else {
            rep.warnings.push(format!("instance {k}: B is resonant, no connection matrix"));
        }
        let mut entry = json!({
            "a": cartan_json(a),
            "b": matrix(b),
            "s_plus": matrix(&d.s_plus),
            "s_minus": matrix(&d.s_minus),
            "cartan_b": cartan_json(&d.cartan_b),
            "c": d.c.as_ref().map(matrix),
            "residuals": d.residuals,
            "warnings": d.warnings,
        });
        if is_diagonal(b) {
            let id = mat::eye(cfg.n());
            let dp = mat::frob(&(&d.s_plus - &id));
            let dm = mat::frob(&(&d.s_minus - &id));
            let ts = cfg.tol("identity_stokes");
            rep.check("identity_stokes", dp.max(dm), ts);
            entry["s_plus_identity"] = json!(dp < ts);
            entry["s_minus_identity"] = json!(dm < ts);
            if let Some(c) = &d.c {
                let dc = mat::frob(&(c - &id));
                rep.check("identity_connection", dc, cfg.tol("identity_connection"));
                entry["c_identity"] = json!(dc < cfg.tol("identity_connection"));
            }
        }
        for w in &d.warnings {
            rep.warnings.push(format!("instance {k}: {w}"));
        }
        out.push(entry);
    }
    rep.put("instances", json!(out));
    Ok(())
}

fn stokes_matrices_checked(conn: &ConnectionData, scfg: &stokes_classical::StokesConfig) -> Result<StokesData, CliError> {
    Ok(stokes_classical::stokes_matrices(conn, scfg)?)
}

fn factors(cfg: &RunConfig, rep: &mut Report) -> Result<(), CliError> {
    let scfg = cfg.stokes_config();
    let ray = cfg.ray.unwrap_or(-PI / 2.0);
    let sectors = match cfg.sector {
        Some(s) => vec![(s[0], s[1])],
        None => vec![(ray, ray + PI), (ray + PI, ray + 2.0 * PI)],
    };
    let mut out = Vec::new();
    for (a, b) in instances(cfg) {
        let conn = connection(cfg, &a, &b)?;
        let mut secs = Vec::new();
        for &(from, to) in &sectors {
            let fs = stokes_classical::stokes_factors(&conn, from, to, &scfg)?;
            let prod = stokes_classical::factor_product(&conn, &fs, from, to);
            let direct = stokes_classical::transition(&conn, from, to, &scfg)?;
            let res = mat::max_abs(&(&prod - &direct));
            rep.check("factor_product", res, cfg.tol("factor_product") * conn.tolerance_factor());
            let mut fj = Vec::new();
            for f in &fs {
                let allowed = conn.roots_in_sector(f.ray - 1e-6, f.ray + 1e-6);
                rep.check("factor_pattern", stokes_classical::pattern_violation(&f.factor, &allowed), cfg.tol("factor_pattern") * conn.tolerance_factor());
                fj.push(json!({"ray": f.ray, "roots": allowed, "factor": matrix(&f.factor)}));
            }
            let span = (to - from).rem_euclid(2.0 * PI);
            let crosses_cut = (conn.cut - from).rem_euclid(2.0 * PI) < span;
            secs.push(json!({
                "from": from,
                "to": to,
                "crosses_cut": crosses_cut,
                "factors": fj,
                "product": matrix(&prod),
                "transition": matrix(&direct),
                "residual": res,
            }));
        }
        out.push(json!({"a": cartan_json(&a), "b": matrix(&b), "stokes_rays": conn.stokes_rays(), "sectors": secs}));
    }
    rep.put("instances", json!(out));
    Ok(())
}

fn monodromy(cfg: &RunConfig, rep: &mut Report) -> Result<(), CliError> {
    let scfg = cfg.stokes_config();
    let inst = instances(cfg);
    for (_, b) in &inst {
        require_nonresonant(b)?;
    }
    let mut out = Vec::new();
    for (k, (a, b)) in inst.iter().enumerate() {
        let conn = connection(cfg, a, b)?;
        let r = stokes_classical::monodromy_residual(&conn, &scfg)?;
        rep.check("monodromy", r, cfg.tol("monodromy") * conn.tolerance_factor());
        rep.push_point("monodromy_residual_vs_instance", k as f64, r);
        out.push(json!({"a": cartan_json(a), "b": matrix(b), "residual": r}));
    }
    rep.put("instances", json!(out));
    Ok(())
}

fn stokes_map(cfg: &RunConfig, rep: &mut Report) -> Result<(), CliError> {
    let scfg = cfg.stokes_config();
    let inst = instances(cfg);
    for (_, b) in &inst {
        require_nonresonant(b)?;
    }
    let mut out = Vec::new();
    for (a, b) in &inst {
        let conn = connection(cfg, a, b)?;
        let d = stokes_matrices_checked(&conn, &scfg)?;
        let pt = stokes_classical::stokes_map_from(&conn, &d.s_plus, &d.s_minus)?;
        let beta = pt.beta()?;
        let c = d.c.as_ref().expect("non-resonant");
        let rhs = c * mat::expm(&(b * (-mat::TWO_PI_I))) * mat::inv(c).ok_or(stokes_classical::StokesError::Singular)?;
        let big = mat::frob(&(&beta - rhs));
        rep.check("fibre", pt.fibre_residual(), cfg.tol("fibre"));
        rep.check("big_cell", big, cfg.tol("big_cell") * conn.tolerance_factor());
        out.push(json!({
            "a": cartan_json(a),
            "b": matrix(b),
            "b_plus": matrix(&pt.b_plus),
            "b_minus": matrix(&pt.b_minus),
            "beta": matrix(&beta),
            "fibre_residual": pt.fibre_residual(),
            "big_cell_residual": big,
        }));
    }
    rep.put("instances", json!(out));
    Ok(())
}

/// Ten observable pairs on G*: coordinates of b₊ and b₋ and products of
/// them, covering every ordering of the two factors.
pub fn observable_pairs(n: usize) -> Vec<(DualObservable, DualObservable)> {
    let p = |i, j| DualObservable::coordinate(n, Side::Plus, i, j);
    let m = |i, j| DualObservable::coordinate(n, Side::Minus, i, j);
    let prod = |x: DualObservable, y: DualObservable| x.mul(&y).expect("degree 2");
    let k = n - 1;
    vec![
        (p(1, 0), m(0, 1)),
        (m(0, 1), p(1, 0)),
        (p(0, 0), p(1, 0)),
        (m(0, 0), m(0, 1)),
        (p(1, 0), m(k, k)),
        (m(0, 1), p(0, 0)),
        (prod(p(k, 0), m(0, k)), p(1, 1)),
        (p(1, 0), prod(p(1, 0), m(0, 0))),
        (prod(m(0, 1), m(0, 1)), p(k, k)),
        (prod(p(1, 0), p(1, 1)), m(0, k)),
    ]
}

fn family(cfg: &RunConfig, a: CartanElement) -> Result<StokesFamily, CliError> {
    let mut fam = StokesFamily::new(cfg.ctx(), a)?;
    fam.ray = cfg.ray.unwrap_or(fam.ray);
    fam.cut = cfg.cut.unwrap_or(fam.cut);
    fam.cfg = cfg.stokes_config();
    Ok(fam)
}

fn poisson_verify(cfg: &RunConfig, rep: &mut Report) -> Result<(), CliError> {
    let n = cfg.n();
    if n < 2 {
        return Err(CliError::Validation { code: "InvalidConfig".into(), message: "poisson-verify needs n ≥ 2".into() });
    }
    let fd = cfg.fd_step.unwrap_or(1e-3);
    let s = cfg.sample.clone().expect("resolved");
    let fam = family(cfg, cfg.a_element().expect("resolved"))?;
    let mut r = rng(cfg);
    let points: Vec<CMat> = (0..s.count).map(|_| random_matrix(&mut r, n, s.norm)).collect();
    let pairs = observable_pairs(n);
    let rmat = fam.r();
    let sb = poisson_geom::sample_brackets(&fam, &points, &pairs, &rmat, fd)?;
    let cal = match poisson_geom::fit_kappa(&sb) {
        Ok(c) => c,
        Err(poisson_geom::PoissonError::NoConsistentScale { spread }) => {
            rep.check("kappa_spread", spread, cfg.tol("kappa_spread"));
            return Ok(());
        }
        Err(e) => return Err(e.into()),
    };
    rep.conventions.insert("kappa".into(), json!(cx(cal.kappa)));
    rep.check("kappa_spread", cal.spread, cfg.tol("kappa_spread"));
    let mut csv = String::from("point,pair,lhs_re,lhs_im,rhs_re,rhs_im,residual\n");
    for (pi, smp) in sb.iter().enumerate() {
        let scale = smp.pushforward.iter().zip(&smp.model).fold(0.0f64, |m, (p, d)| m.max(p.norm()).max((cal.kappa * d).norm()));
        let mut worst = 0.0f64;
        for (qi, (p, d)) in smp.pushforward.iter().zip(&smp.model).enumerate() {
            let rhs = cal.kappa * d;
            let e = (p - rhs).norm();
            let res = if scale > 0.0 { e / scale } else { e };
            worst = worst.max(res);
            csv.push_str(&format!("{pi},{qi},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}\n", p.re, p.im, rhs.re, rhs.im, res));
        }
        rep.check("bracket", worst, cfg.tol("bracket"));
        rep.push_point("residual_vs_lambda_norm", mat::frob(&smp.l), worst);
    }
    rep.attachments.insert("poisson_residuals.csv".into(), csv.into_bytes());
    let fam2 = family(cfg, CartanElement::real(cfg.a_second.as_deref().expect("resolved")))?;
    let points2: Vec<CMat> = (0..s.count.min(3)).map(|_| random_matrix(&mut r, n, s.norm)).collect();
    let res2 = poisson_geom::poisson_map_residual(&fam2, &points2, &pairs, &fam2.r(), cal.kappa, fd)?;
    rep.check("bracket_second_a", res2, cfg.tol("bracket_second_a"));
    let lin = poisson_geom::linearization_check(&fam, &points, fd)?;
    rep.check("linearization", lin, cfg.tol("linearization"));
    rep.put(
        "calibration",
        json!({
            "kappa": cx(cal.kappa),
            "spread": cal.spread,
            "per_sample": cal.per_sample.iter().map(|k| k.map(cx)).collect::<Vec<_>>(),
            "fit_residual": cal.fit_residual,
            "r_matrix": tensor(&rmat),
        }),
    );
    Ok(())
}

fn twist_order1(cfg: &RunConfig, rep: &mut Report) -> Result<(), CliError> {
    let ctx = cfg.ctx();
    let mu = cfg.mu_element();
    let q = cfg.quadrature.clone().unwrap_or_default();
    let (jp, jm) = hbar_quantum::twist_closed_form(&ctx, &mu)?;
    let jet = hbar_quantum::dkz_twist_order1(&ctx, &mu, &q.to_config())?;
    let rel = |a: &lie_core::TensorElement, b: &lie_core::TensorElement| a.sub(b).max_abs() / b.max_abs().max(f64::MIN_POSITIVE);
    let err = rel(&jet.j_plus, &jp).max(rel(&jet.j_minus, &jm));
    rep.check("quadrature_rel", err, cfg.tol("quadrature_rel"));
    rep.check("cocycle", hbar_quantum::twist_cocycle_residual_g(&ctx, &jp), cfg.tol("cocycle"));
    // convergence in the panel count, without the refinement guard
    for panels in [2usize, 4, 8, 12, 16, q.panels] {
        let mut c = q.to_config();
        c.panels = panels;
        c.tol = f64::INFINITY;
        let j = hbar_quantum::dkz_twist_order1(&ctx, &mu, &c)?;
        rep.push_point("quadrature_rel_error_vs_panels", panels as f64, rel(&j.j_plus, &jp));
    }
    rep.put(
        "twist",
        json!({
            "mu": cfg.mu,
            "j_plus_closed_form": tensor(&jp),
            "j_minus_closed_form": tensor(&jm),
            "j_plus_quadrature": tensor(&jet.j_plus),
            "j_minus_quadrature": tensor(&jet.j_minus),
            "refinement_gap": jet.quad_error,
            "euler_gamma": hbar_quantum::EULER_GAMMA,
        }),
    );
    Ok(())
}

fn quantum_stokes(cfg: &RunConfig, rep: &mut Report) -> Result<(), CliError> {
    let ctx = cfg.ctx();
    let mu = cfg.mu_element();
    let mut qc = cfg.quadrature.clone().unwrap_or_default().to_config();
    // the gap is reported as a residual rather than raised
    qc.route_tol = f64::INFINITY;
    let q = hbar_quantum::quantum_stokes_order1(&ctx, &mu, &qc)?;
    rep.check("route_gap", q.route_gap, cfg.tol("route_gap"));
    rep.check("swap_symmetry", q.s_minus.sub(&q.s_plus.swap()).max_abs(), cfg.tol("swap_symmetry"));
    rep.check("monodromy_identity", hbar_quantum::monodromy_identity_order1(&ctx, &q.s_plus, &q.s_minus), cfg.tol("monodromy_identity"));
    let (jp, _) = hbar_quantum::twist_closed_form(&ctx, &mu)?;
    let r1 = hbar_quantum::r_plus_order1(&ctx, &jp);
    let r = standard_r(&ctx, &Chamber::of(&mu));
    rep.check("r_coefficient", r1.sub(&r).max_abs(), cfg.tol("r_coefficient"));
    rep.put(
        "quantum_stokes",
        json!({
            "mu": cfg.mu,
            "s_plus": tensor(&q.s_plus),
            "s_minus": tensor(&q.s_minus),
            "direct_plus": tensor(&q.direct_plus),
            "direct_minus": tensor(&q.direct_minus),
            "r_plus_order1": tensor(&r1),
            "units": "coefficients of hbar = 2*pi*i*sfh",
        }),
    );
    Ok(())
}

fn scl_directions(cfg: &RunConfig) -> Vec<CMat> {
    let n = cfg.n();
    let s = cfg.sample.clone().expect("resolved");
    let mut v = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if i != j && v.len() < s.count {
                v.push(mat::unit(n, i, j));
            }
        }
    }
    let mut r = rng(cfg);
    while v.len() < s.count {
        v.push(random_matrix(&mut r, n, s.norm));
    }
    v
}

fn scl_check(cfg: &RunConfig, rep: &mut Report) -> Result<(), CliError> {
    let ctx = cfg.ctx();
    let mu = cfg.mu_element();
    let qc = cfg.quadrature.clone().unwrap_or_default().to_config();
    let scfg = cfg.stokes_config();
    let fd = cfg.fd_step.unwrap_or(1e-3);
    let dirs = scl_directions(cfg);
    let sc = hbar_quantum::scl_cross_check(&ctx, &mu, &dirs, fd, &qc, &scfg)?;
    rep.check("scl", sc.max, cfg.tol("scl"));
    let per: Vec<f64> = (0..dirs.len()).map(|k| sc.stokes_plus[k].max(sc.stokes_minus[k]).max(sc.twist[k])).collect();
    for (l, e) in dirs.iter().zip(&per) {
        rep.push_point("residual_vs_lambda_norm", mat::frob(l), *e);
    }
    // step study on the last direction: the central difference is O(h²)
    let last = dirs.last().cloned().into_iter().collect::<Vec<_>>();
    for k in [16.0, 8.0, 4.0, 2.0, 1.0] {
        let h = fd * k;
        let s = hbar_quantum::scl_cross_check(&ctx, &mu, &last, h, &qc, &scfg)?;
        rep.push_point("residual_vs_fd_step", h, s.max);
    }
    rep.put(
        "scl",
        json!({
            "mu": cfg.mu,
            "directions": dirs.iter().map(matrix).collect::<Vec<_>>(),
            "stokes_plus": sc.stokes_plus,
            "stokes_minus": sc.stokes_minus,
            "twist": sc.twist,
        }),
    );
    Ok(())
}

fn flow_b0(cfg: &RunConfig) -> CMat {
    cfg.b_matrix().unwrap_or_else(|| {
        let s = cfg.sample.clone().expect("resolved");
        random_nonresonant(&mut rng(cfg), cfg.n(), s.norm, traceless(cfg))
    })
}

fn mu_path(cfg: &RunConfig) -> isomonodromy::MuPath {
    let v = cfg.velocity.clone().unwrap_or_default();
    isomonodromy::MuPath::new(cfg.mu_element(), v.iter().map(|&x| C64::new(x, 0.0)).collect())
}

fn iso_flow(cfg: &RunConfig, rep: &mut Report) -> Result<(), CliError> {
    let scfg = cfg.stokes_config();
    let path = mu_path(cfg);
    let b0 = flow_b0(cfg);
    let (t_end, steps) = (cfg.t_end.unwrap_or(0.5), cfg.steps.unwrap_or(500));
    let traj = isomonodromy::iso_flow(&path, &b0, t_end, steps)?;
    let cons = isomonodromy::stokes_constancy(&traj, cfg.checkpoints.unwrap_or(6), &scfg)?;
    rep.check("stokes_drift", cons.max_drift, cfg.tol("stokes_drift"));
    rep.check("spectral_drift", isomonodromy::spectral_drift(&traj), cfg.tol("spectral_drift"));
    for &(t, d) in &cons.drifts {
        rep.push_point("stokes_drift_vs_t", t, d);
    }
    if cfg.negative_control.unwrap_or(true) {
        let wrong = isomonodromy::iso_flow_signed(&path, &b0, t_end, steps, -isomonodromy::SIGMA)?;
        let bad = isomonodromy::stokes_constancy(&wrong, 3, &scfg)?;
        rep.check_bound("control_drift_min", bad.max_drift, cfg.tol("control_drift_min"), Bound::Lower);
        for &(t, d) in &bad.drifts {
            rep.push_point("control_drift_vs_t", t, d);
        }
    }
    let mut csv = Vec::new();
    isomonodromy::write_trajectory_csv(&mut csv, &traj, Some(&cons))?;
    rep.attachments.insert("trajectory.csv".into(), csv);
    let last = traj.last().expect("nonempty");
    rep.put(
        "flow",
        json!({
            "b0": matrix(&b0),
            "b_final": matrix(&last.b),
            "mu_final": cartan_json(&last.mu),
            "eigenvalues_b0": mat::eigenvalues(&b0).into_iter().map(cx).collect::<Vec<_>>(),
            "steps": steps,
        }),
    );
    Ok(())
}

fn pde_check(cfg: &RunConfig, rep: &mut Report) -> Result<(), CliError> {
    let n = cfg.n();
    let scfg = cfg.stokes_config();
    let path = mu_path(cfg);
    let t_end = cfg.t_end.unwrap_or(0.5);
    let mus: Vec<CartanElement> = [0.0, 0.5 * t_end, t_end].iter().map(|&t| path.at(t)).collect();
    let s = cfg.sample.clone().expect("resolved");
    let mut r = rng(cfg);
    let lambdas: Vec<CMat> = (0..s.count).map(|_| isomonodromy::b_to_l(&random_nonresonant(&mut r, n, s.norm, traceless(cfg)))).collect();
    let mut dirs = vec![path.velocity.clone()];
    for k in 0..n {
        let mut e = vec![C64::new(0.0, 0.0); n];
        e[k] = C64::new(1.0, 0.0);
        dirs.push(e);
    }
    let fd = cfg.fd_step.unwrap_or(1e-3);
    let classical = isomonodromy::classical_pde_residual(&mus, &lambdas, &dirs, fd, &scfg)?;
    rep.check("classical_pde", classical, cfg.tol("classical_pde"));
    let ctx = cfg.ctx();
    let closed = hbar_quantum::casimir_pde_residual_order1(&ctx, &mus, fd, &hbar_quantum::TwistSource::ClosedForm)?;
    rep.check("quantum_pde_closed_form", closed, cfg.tol("quantum_pde_closed_form"));
    let qc = cfg.quadrature.clone().unwrap_or_default().to_config();
    let quad = hbar_quantum::casimir_pde_residual_order1(&ctx, &mus, fd, &hbar_quantum::TwistSource::Quadrature(qc))?;
    rep.check("quantum_pde_quadrature", quad, cfg.tol("quantum_pde_quadrature"));
    rep.put(
        "grid",
        json!({
            "mus": mus.iter().map(cartan_json).collect::<Vec<_>>(),
            "lambdas": lambdas.iter().map(matrix).collect::<Vec<_>>(),
            "directions": dirs.iter().map(|d| d.iter().map(|z| cx(*z)).collect::<Vec<_>>()).collect::<Vec<_>>(),
        }),
    );
    Ok(())
}

fn random_element(r: &mut ChaCha8Rng, ctx: &PbwContext, deg: usize) -> Result<PbwElement, CliError> {
    let coef = |r: &mut ChaCha8Rng| C64::new(r.random_range(-3..=3) as f64, r.random_range(-3..=3) as f64);
    let mut x = PbwElement::zero();
    for _ in 0..3 {
        let len = r.random_range(0..=deg);
        let word: Vec<usize> = (0..len).map(|_| r.random_range(0..ctx.num_generators())).collect();
        let c = coef(r);
        x = x.add(&ctx.normal_form(&word, c)?);
    }
    if deg > 0 && x.degree() < deg {
        let word: Vec<usize> = (0..deg).map(|_| r.random_range(0..ctx.num_generators())).collect();
        x = x.add(&ctx.normal_form(&word, C64::new(1.0, 0.0))?);
    }
    Ok(x)
}

fn pbw_tensor_json(t: &PbwTensor) -> Value {
    json!(t.terms.iter().map(|(k, c)| json!({"words": k, "coef": cx(*c)})).collect::<Vec<_>>())
}

fn duality(cfg: &RunConfig, rep: &mut Report) -> Result<(), CliError> {
    let n = cfg.n();
    let order = cfg.order.unwrap_or(2);
    let ctx = PbwContext::new(n).with_cap(order.max(2));
    let s = cfg.sample.clone().expect("resolved");
    let mut r = rng(cfg);
    let (mut members, mut disagree) = (0usize, 0usize);
    for k in 0..s.count {
        // alternate between draws biased into U′ and unconstrained ones
        let coeffs = (0..=order)
            .map(|m| {
                let top = if k % 2 == 0 { m.min(ctx.cap) } else { ctx.cap };
                let d = r.random_range(0..=top);
                random_element(&mut r, &ctx, d).map(|x| PbwTensor::from_element(&x))
            })
            .collect::<Result<Vec<_>, _>>()?;
        let x = TensorSeries::from_hbar(&ctx, coeffs)?;
        let u = hbar_quantum::uprime_membership(&x, order)?;
        members += u.member() as usize;
        disagree += (!u.agree()) as usize;
    }
    rep.check("criteria_disagreements", disagree as f64, cfg.tol("criteria_disagreements"));
    // i_Δ on ħE_ij and ħ²E_ijE_kl against the exact expected components
    let z = PbwElement::zero();
    let series = |parts: Vec<PbwElement>| TensorSeries::from_hbar(&ctx, parts.iter().map(PbwTensor::from_element).collect());
    let mut fixtures = Vec::new();
    let mut worst = 0.0f64;
    let g = ctx.num_generators();
    for a in 0..g {
        let (i, j) = ctx.indices(a);
        let mut parts = vec![z.clone(); order + 1];
        parts[1] = ctx.generator(i, j);
        let c = hbar_quantum::i_delta(&series(parts)?, 1)?;
        let expected = PbwTensor::monomial(vec![vec![a]], C64::new(1.0, 0.0));
        worst = worst.max(c[0].max_abs()).max(c[1].sub(&expected).max_abs());
        fixtures.push(json!({"input": format!("hbar E_{i}{j}"), "components": c.iter().map(pbw_tensor_json).collect::<Vec<_>>()}));
    }
    if order >= 2 {
        for a in 0..g {
            for b in 0..g {
                let (i, j) = ctx.indices(a);
                let (k, l) = ctx.indices(b);
                let mut parts = vec![z.clone(); order + 1];
                parts[2] = ctx.mul(&ctx.generator(i, j), &ctx.generator(k, l))?;
                let c = hbar_quantum::i_delta(&series(parts)?, 2)?;
                let one = C64::new(1.0, 0.0);
                let expected = PbwTensor::monomial(vec![vec![a], vec![b]], one).add(&PbwTensor::monomial(vec![vec![b], vec![a]], one));
                worst = worst.max(c[0].max_abs()).max(c[1].max_abs()).max(c[2].sub(&expected).max_abs());
                fixtures.push(json!({"input": format!("hbar^2 E_{i}{j} E_{k}{l}"), "components": c.iter().map(pbw_tensor_json).collect::<Vec<_>>()}));
            }
        }
    }
    rep.check("i_delta_fixtures", worst, cfg.tol("i_delta_fixtures"));
    rep.put(
        "duality",
        json!({
            "generator_index": "E_ij has index i*n + j",
            "samples": s.count,
            "members": members,
            "disagreements": disagree,
            "i_delta": fixtures,
        }),
    );
    Ok(())
}
