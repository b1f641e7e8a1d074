//! End-to-end acceptance battery. Prints one PASS/FAIL line per criterion
//! and exits non-zero if any fails.

use std::path::PathBuf;
use std::process::Command;
use std::time::Instant;

use fcl_core::classify::{douglas_2d_criterion, fit_gib, predicates, surface_frame};
use fcl_core::curvature::{douglas, flag_curvature, gdw_tensor, h_and_ebar, kkc_residual, landsberg, scalar_flag_fit};
use fcl_core::fd::fd_oracle;
use fcl_core::fields::cartan;
use fcl_core::geodesic::{along_geodesic_diagnostics, integrate_geodesic, st5_defect};
use fcl_core::identities::{point_identities, verify_identities};
use fcl_core::{
    load_metric, sample_points, BasePoint, Geometry, Identity, MetricField, MultiIndex, Predicate, Suite, Tolerances,
    Verdict,
};

type Outcome = Result<String, String>;

const FUNK2: &str = "funk(2)";
const FUNK3: &str = "funk(3)";
const RANDERS2: &str = "randers(2) { 1 + 0.2*x[2]^2, 0.1*x[1]; 0.1*x[1], 1; 0.1*x[2], -0.1*x[1] + 0.05*x[1]*x[2] }";
const RANDERS3: &str = "randers(3) { 1, 0, 0; 0, 1, 0; 0, 0, 1; 0.1*x[2], -0.1*x[1], 0.1*x[1]*x[2] }";
const RIEMANN3: &str = "riemannian(3) { 2 + x[1]^2, 0.3*x[2], 0; 0.3*x[2], 1 + x[3]^2, 0.1*x[1]; 0, 0.1*x[1], 1.5 }";
const EUCLID2: &str = "euclidean(2)";
/// The round sphere in stereographic coordinates.
const SPHERE: &str = "riemannian(2) { 4/(1 + x[1]^2 + x[2]^2)^2, 0; 0, 4/(1 + x[1]^2 + x[2]^2)^2 }";

fn metric(src: &str) -> MetricField {
    load_metric(src).unwrap_or_else(|e| panic!("{src}: {e}"))
}

fn samples(m: &MetricField, count: usize, seed: u64) -> Vec<BasePoint> {
    sample_points(m, m.default_domain(), count, seed).expect("sampling")
}

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn e<T: std::fmt::Display>(err: T) -> String {
    err.to_string()
}

/// xorshift64*, enough for reproducible test coefficients and flags.
struct Rng(u64);

impl Rng {
    fn next(&mut self) -> f64 {
        self.0 ^= self.0 >> 12;
        self.0 ^= self.0 << 25;
        self.0 ^= self.0 >> 27;
        (self.0.wrapping_mul(0x2545_f491_4f6c_dd1d) >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0
    }
}

fn random_riemannian(rng: &mut Rng) -> String {
    let n = 3;
    let mut rows = Vec::new();
    let mut entry = vec![vec![String::new(); n]; n];
    for i in 0..n {
        for j in i..n {
            let mut s = if i == j { format!("{:.3}", 2.0 + rng.next().abs()) } else { "0".into() };
            for k in 0..n {
                s.push_str(&format!(" + {:.3}*x[{}]", 0.2 * rng.next(), k + 1));
            }
            s.push_str(&format!(" + {:.3}*x[{}]*x[{}]", 0.2 * rng.next(), i + 1, j + 1));
            entry[i][j] = s.clone();
            entry[j][i] = s;
        }
    }
    for row in entry {
        rows.push(row.join(", "));
    }
    format!("riemannian(3) {{ {} }}", rows.join("; "))
}

fn ad_soundness() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for src in [FUNK2, RANDERS2, RIEMANN3] {
        let m = metric(src);
        let field = |q: &BasePoint| m.f2_value(q);
        for p in samples(&m, 20, 1) {
            let jet = m.f2_jet(&p, 3).map_err(e)?;
            for idx in MultiIndex::all(m.dim(), 3) {
                let ad = jet.partial(&idx).map_err(e)?;
                let fd = fd_oracle(&field, &p, &idx, 2e-3).map_err(e)?;
                worst = worst.max((ad - fd).abs() / ad.abs().max(1.0));
                count += 1;
            }
        }
    }
    check(worst <= 1e-5, format!("max relative error {worst:.2e} over {count} partials"))
}

fn riemannian_collapse() -> Outcome {
    let src = random_riemannian(&mut Rng(0x9e37_79b9_7f4a_7c15));
    let m = metric(&src);
    let pts = samples(&m, 20, 3);
    let mut worst: f64 = 0.0;
    for p in &pts {
        let geo = Geometry::new(&m, p, 7).map_err(e)?;
        for t in [
            geo.cartan().map_err(e)?.value(),
            geo.berwald().map_err(e)?.value(),
            geo.landsberg().map_err(e)?.value(),
            geo.stretch().map_err(e)?.value(),
            geo.douglas().map_err(e)?.value(),
            geo.gdw().map_err(e)?.value(),
        ] {
            worst = worst.max(t.max_abs());
        }
    }
    let record = predicates(&m, &pts, &Tolerances::uniform(1e-8));
    let rq = record.verdict(Predicate::RQuadratic);
    check(worst <= 1e-8 && rq, format!("max |C|,|B|,|L|,|Σ|,|D|,|GDW| = {worst:.2e}; r_quadratic {rq}"))
}

fn funk_example() -> Outcome {
    let (mut dmu, mut dlam, mut res): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for src in [FUNK2, FUNK3] {
        let m = metric(src);
        for p in samples(&m, 50, 11) {
            let fit = fit_gib(&m, &p).map_err(e)?;
            let f = m.f2_value(&p).map_err(e)?.sqrt();
            dmu = dmu.max((fit.mu - 1.0).abs());
            dlam = dlam.max((2.0 * f * fit.lambda - 1.0).abs());
            res = res.max(fit.residual);
        }
    }
    check(
        dmu <= 1e-7 && dlam <= 1e-7 && res <= 1e-7,
        format!("|μ−1| {dmu:.2e}, |2Fλ−1| {dlam:.2e}, B-fit residual {res:.2e}"),
    )
}

fn funk_gdw() -> Outcome {
    let (mut gdw, mut tp): (f64, f64) = (0.0, 0.0);
    for src in [FUNK2, FUNK3] {
        let m = metric(src);
        for p in samples(&m, 50, 13) {
            gdw = gdw.max(gdw_tensor(&m, &p).map_err(e)?.max_abs());
            let geo = Geometry::new(&m, &p, 7).map_err(e)?;
            let r = point_identities(&geo, &[Identity::GibDouglasForm], 1e-7).map_err(e)?;
            tp = tp.max(r[0].ok_or("Douglas form not evaluated")?);
        }
    }
    check(gdw <= 1e-7 && tp <= 1e-7, format!("|GDW| {gdw:.2e}, Douglas-form residual {tp:.2e}"))
}

fn funk_douglas() -> Outcome {
    let (mut d, mut rel): (f64, f64) = (0.0, 0.0);
    for src in [FUNK2, FUNK3] {
        let m = metric(src);
        for p in samples(&m, 50, 17) {
            d = d.max(douglas(&m, &p).map_err(e)?.max_abs());
            let lambda = fit_gib(&m, &p).map_err(e)?.lambda;
            let f2 = m.f2_value(&p).map_err(e)?;
            let (l, _) = landsberg(&m, &p).map_err(e)?;
            let (c, _) = cartan(&m, &p).map_err(e)?;
            let sum: f64 = l
                .entries
                .iter()
                .zip(&c.entries)
                .map(|(l, c)| (l + f2 * lambda * c).abs())
                .fold(0.0, f64::max);
            rel = rel.max(sum);
        }
    }
    check(d <= 1e-7 && rel <= 1e-7, format!("|D| {d:.2e}, |L + F²λC| {rel:.2e}"))
}

fn universal_suite() -> Outcome {
    let mut lines = Vec::new();
    let mut ok = true;
    for src in [FUNK2, FUNK3, RANDERS3, RIEMANN3, EUCLID2] {
        let m = metric(src);
        let pts = samples(&m, 50, 19);
        let reports = verify_identities(&m, &pts, Suite::Universal, 1e-6);
        let worst = reports.iter().filter_map(|r| r.max_residual).fold(0.0, f64::max);
        let all = reports.iter().all(|r| r.verdict == Verdict::Pass && r.samples == 50);
        ok &= all;
        lines.push(format!("{} {worst:.1e}", m.kind().name()));
    }
    check(ok, format!("worst scaled residual per metric: {}", lines.join(", ")))
}

fn flag_curvature_check() -> Outcome {
    let m = metric(FUNK3);
    let mut rng = Rng(77);
    let (mut spread, mut dk, mut cross, mut kkc, mut fitres): (f64, f64, f64, f64, f64) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for p in samples(&m, 20, 23) {
        let fit = scalar_flag_fit(&m, &p).map_err(e)?;
        fitres = fitres.max(fit.residual);
        dk = dk.max((fit.k + 0.25).abs());
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for _ in 0..20 {
            let u: Vec<f64> = (0..3).map(|_| rng.next()).collect();
            let k = flag_curvature(&m, &p, &u).map_err(e)?;
            lo = lo.min(k);
            hi = hi.max(k);
            cross = cross.max((k - fit.k).abs());
        }
        spread = spread.max(hi - lo);
        let gib = fit_gib(&m, &p).map_err(e)?;
        let r = kkc_residual(&m, &p, gib.mu, gib.mu_prime).map_err(e)?;
        kkc = kkc.max(r.iter().map(|v| v.abs()).fold(0.0, f64::max));
    }
    check(
        spread <= 1e-6 && dk <= 1e-5 && cross <= 1e-5 && fitres <= 1e-6 && kkc <= 1e-5,
        format!(
            "flag spread {spread:.2e}, |K+1/4| {dk:.2e}, direct vs fit {cross:.2e}, fit residual {fitres:.2e}, K-equation {kkc:.2e}"
        ),
    )
}

fn surface_frame_check() -> Outcome {
    let m = metric(FUNK2);
    let (mut dmu, mut dlam, mut crit): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for p in samples(&m, 20, 29) {
        let frame = surface_frame(&m, &p).map_err(e)?;
        let fit = fit_gib(&m, &p).map_err(e)?;
        dmu = dmu.max((fit.mu + 2.0 * frame.i_1 / frame.i).abs());
        dlam = dlam.max((fit.lambda - frame.i_2 / 3.0).abs());
        crit = crit.max(douglas_2d_criterion(&m, &p).map_err(e)?.abs());
    }
    check(
        dmu <= 1e-6 && dlam <= 1e-6 && crit <= 1e-6,
        format!("|μ + 2I₁/I| {dmu:.2e}, |λ − I₂/3| {dlam:.2e}, |3I₁ + F I I₂| {crit:.2e}"),
    )
}

/// Great circle through the inverse stereographic image of `(x, y)`,
/// projected back to the chart.
fn sphere_oracle(x: &[f64], y: &[f64], t: f64) -> Vec<f64> {
    let r2 = x[0] * x[0] + x[1] * x[1];
    let d = 1.0 + r2;
    let p = [2.0 * x[0] / d, 2.0 * x[1] / d, (r2 - 1.0) / d];
    // differential of the inverse projection applied to y
    let dot = x[0] * y[0] + x[1] * y[1];
    let v = [
        2.0 * y[0] / d - 4.0 * x[0] * dot / (d * d),
        2.0 * y[1] / d - 4.0 * x[1] * dot / (d * d),
        4.0 * dot / (d * d),
    ];
    let speed = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    let (c, s) = ((speed * t).cos(), (speed * t).sin());
    let q: Vec<f64> = (0..3).map(|i| p[i] * c + v[i] / speed * s).collect();
    vec![q[0] / (1.0 - q[2]), q[1] / (1.0 - q[2])]
}

fn geodesics() -> Outcome {
    let sphere = metric(SPHERE);
    let (x0, y0, t) = ([0.2, -0.1], [0.5, 0.4], 1.0);
    let exact = sphere_oracle(&x0, &y0, t);
    let err = |steps: usize| -> Result<f64, String> {
        let path = integrate_geodesic(&sphere, &x0, &y0, t, steps).map_err(e)?;
        let end = &path.end().x;
        Ok((end[0] - exact[0]).hypot(end[1] - exact[1]))
    };
    let (coarse, fine) = (err(16)?, err(32)?);
    let ratio = coarse / fine;

    let funk = metric(FUNK2);
    let (fx, fy) = ([0.1, -0.2], [0.8, 0.6]);
    let path = integrate_geodesic(&funk, &fx, &fy, 0.6, 128).map_err(e)?;
    let norm = fy[0].hypot(fy[1]);
    let collinear = path
        .samples
        .iter()
        .map(|s| ((s.x[0] - fx[0]) * fy[1] - (s.x[1] - fx[1]) * fy[0]).abs() / norm)
        .fold(0.0, f64::max);
    let diag = along_geodesic_diagnostics(&funk, &path).map_err(e)?;

    let (mu0, h, n) = (0.7, 1.0 / 512.0, 513);
    let mu: Vec<f64> = (0..n).map(|i| 2.0 * mu0 / (2.0 - i as f64 * h * mu0)).collect();
    let synthetic = st5_defect(&mu, &vec![1.0; n], h).iter().map(|d| d.abs()).fold(0.0, f64::max);

    check(
        (12.0..=20.0).contains(&ratio) && collinear <= 1e-6 && diag.f_defect <= 1e-6 && synthetic <= 1e-8,
        format!(
            "RK4 error ratio {ratio:.2} ({coarse:.2e}/{fine:.2e}), collinearity {collinear:.2e}, F drift {:.2e}, synthetic μ′ defect {synthetic:.2e}",
            diag.f_defect
        ),
    )
}

fn implications() -> Outcome {
    let tol = 1e-6;
    let mut problems = Vec::new();
    let mut checked = 0;
    for src in [FUNK2, FUNK3, RANDERS3, RIEMANN3, EUCLID2, SPHERE, RANDERS2] {
        let m = metric(src);
        let pts = samples(&m, 20, 31);
        let r = predicates(&m, &pts, &Tolerances::uniform(tol));
        let v = |p| r.verdict(p);
        let h = pts
            .iter()
            .map(|p| h_and_ebar(&m, p).map(|(h, _)| h.max_abs()))
            .collect::<Result<Vec<_>, _>>()
            .map_err(e)?
            .into_iter()
            .fold(0.0, f64::max);
        let rules = [
            ("r_quadratic ⇒ stretch", !v(Predicate::RQuadratic) || v(Predicate::Stretch)),
            ("r_quadratic ⇒ H = 0", !v(Predicate::RQuadratic) || h <= tol),
            ("douglas ⇒ gdw", !v(Predicate::Douglas) || v(Predicate::Gdw)),
            ("berwald ⇒ landsberg", !v(Predicate::Berwald) || v(Predicate::Landsberg)),
            ("landsberg ⇒ stretch", !v(Predicate::Landsberg) || v(Predicate::Stretch)),
        ];
        for (name, holds) in rules {
            checked += 1;
            if !holds {
                problems.push(format!("{src}: {name}"));
            }
        }
        problems.extend(r.violations.iter().map(|s| format!("{src}: {s}")));
        if !r.failures.is_empty() {
            problems.push(format!("{src}: {} sample failures", r.failures.len()));
        }
    }
    check(
        problems.is_empty(),
        if problems.is_empty() {
            format!("{checked} implications hold over 7 metrics")
        } else {
            problems.join("; ")
        },
    )
}

fn determinism() -> Outcome {
    let dir = std::env::temp_dir().join(format!("fcl-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).map_err(e)?;
    let file: PathBuf = dir.join("funk.fm");
    std::fs::write(&file, "funk(3)\n").map_err(e)?;
    let run = || -> Result<(i32, String), String> {
        let out = Command::new(env!("CARGO_BIN_EXE_fcl"))
            .args(["verify", "--metric"])
            .arg(&file)
            .args(["--suite", "all", "--samples", "50", "--seed", "7", "--out", "json"])
            .env_remove("FCL_JET_ORDER")
            .output()
            .map_err(e)?;
        let text = String::from_utf8(out.stdout).map_err(e)?;
        let cut = text.find(",\n  \"timing\"").ok_or("no timing field")?;
        Ok((out.status.code().unwrap_or(-1), text[..cut].to_string()))
    };
    let (a, b) = (run()?, run()?);
    let _ = std::fs::remove_dir_all(&dir);
    check(
        a.0 == 0 && b.0 == 0 && a.1 == b.1,
        format!("exit codes {} and {}, {} identical bytes before timing", a.0, b.0, a.1.len()),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 11] = [
        ("jet partials agree with finite differences", ad_soundness),
        ("Riemannian metrics collapse", riemannian_collapse),
        ("Funk metric has μ = 1, λ = 1/(2F)", funk_example),
        ("Funk metric is GDW with the Douglas form", funk_gdw),
        ("Funk metric is Douglas and relatively isotropic Landsberg", funk_douglas),
        ("universal identities hold on the catalog", universal_suite),
        ("Funk flag curvature is scalar, K = -1/4", flag_curvature_check),
        ("surface frame matches the fitted scalars", surface_frame_check),
        ("geodesic integration and diagnostics", geodesics),
        ("implication battery", implications),
        ("verify output is deterministic", determinism),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(f).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into()))
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {:>2} {name}: {detail} [{secs:.1}s]", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {detail} [{secs:.1}s]", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
