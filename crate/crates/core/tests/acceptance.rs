//! End-to-end acceptance criteria. Runs without the libtest harness so each
//! criterion always prints one PASS/FAIL line; exits non-zero on any failure.

mod common;

use std::process::ExitCode;
use std::time::Instant;

use common::*;
use elastodg::forms::{assemble_load, form_value, residual_functional, FormContext, StabilizationParams};
use elastodg::spaces::{l2_distance_disp, l2_distance_stress, project_pair, DiscreteField};
use elastodg::study::{run_h_sweep, run_p_sweep, ErrorReport, Levels, MeshSpec, RunConfig};
use elastodg::tensor::{Matrix, Vector, ZERO_MAT};
use elastodg::verify::{case_2d_poly, observed_orders, weighted_trace_distance};

const NAMED_FLUXES: [&str; 5] = ["c11=hinv,c22=0", "c11=hinv,c22=1", "c11=hinv,c22=h", "c11=1,c22=1", "c11=1,c22=h"];

type Criterion = (&'static str, fn() -> Outcome);

struct Outcome {
    pass: bool,
    detail: String,
}

struct Checks {
    pass: bool,
    parts: Vec<String>,
}

impl Checks {
    fn new() -> Self {
        Self { pass: true, parts: Vec::new() }
    }

    fn within(&mut self, what: &str, value: Option<f64>, lo: f64, hi: f64) {
        let ok = value.is_some_and(|v| (lo..=hi).contains(&v));
        self.pass &= ok;
        self.parts.push(match value {
            Some(v) => format!("{what} {v:.3} in [{lo}, {hi}]"),
            None => format!("{what} missing"),
        });
    }

    fn at_most(&mut self, what: &str, value: f64, limit: f64, unit: &str) {
        self.pass &= value <= limit;
        self.parts.push(format!("{what} {value:.3}{unit} <= {limit}{unit}"));
    }

    fn holds(&mut self, what: String, ok: bool) {
        self.pass &= ok;
        self.parts.push(what);
    }

    fn done(self) -> Outcome {
        Outcome { pass: self.pass, detail: self.parts.join("; ") }
    }
}

fn h_sweep(mesh: MeshSpec, problem: &str, k: usize, l: usize, flux: &str, levels: usize) -> (ErrorReport, f64) {
    let config = RunConfig {
        problem: problem.into(),
        mesh,
        levels: Levels::Count(levels),
        k,
        l,
        stab: StabilizationParams::from_alias(flux).unwrap(),
        ..Default::default()
    };
    let start = Instant::now();
    let report = run_h_sweep(&config).unwrap();
    (report, start.elapsed().as_secs_f64())
}

fn tri_sweep(k: usize, l: usize, flux: &str, levels: usize) -> (ErrorReport, f64) {
    h_sweep(MeshSpec::TriUniform, "elas2d_poly", k, l, flux, levels)
}

fn peak_rss_gb() -> Option<f64> {
    let status = std::fs::read_to_string("/proc/self/status").ok()?;
    let line = status.lines().find(|l| l.starts_with("VmHWM:"))?;
    let kb: f64 = line.split_whitespace().nth(1)?.parse().ok()?;
    Some(kb / 1024.0 / 1024.0)
}

fn criterion_1() -> Outcome {
    let (rep, secs) = tri_sweep(1, 1, "c11=hinv,c22=h", 6);
    let mut c = Checks::new();
    c.within("L2 order", rep.last_order_l2(), 1.85, 2.15);
    c.within("energy order", rep.last_order_energy(), 0.90, 1.10);
    c.at_most("runtime", secs, 60.0, " s");
    c.done()
}

fn criterion_2() -> Outcome {
    let (rep, _) = tri_sweep(1, 1, "c11=hinv,c22=1", 6);
    let mut c = Checks::new();
    c.within("energy order", rep.last_order_energy(), 1.40, 1.65);
    c.within("L2 order", rep.last_order_l2(), 1.85, 2.15);
    c.done()
}

fn criterion_3() -> Outcome {
    let (rep, _) = tri_sweep(1, 0, "c11=hinv,c22=h", 6);
    let mut c = Checks::new();
    c.within("C22=h: L2 order", rep.last_order_l2(), 1.85, 2.15);
    c.within("energy order", rep.last_order_energy(), 0.90, 1.10);
    let (rep, _) = tri_sweep(1, 0, "c11=hinv,c22=1", 6);
    c.within("C22=1: L2 order", rep.last_order_l2(), 0.85, 1.10);
    c.done()
}

fn criterion_4() -> Outcome {
    let (rep, _) = tri_sweep(0, 0, "c11=hinv,c22=0", 6);
    let mut c = Checks::new();
    c.within("L2 order", rep.last_order_l2(), -0.1, 0.1);
    c.done()
}

fn criterion_5() -> Outcome {
    let (rep, secs) = tri_sweep(2, 2, "c11=1,c22=1", 5);
    let mut c = Checks::new();
    c.within("energy order", rep.last_order_energy(), 2.35, 2.65);
    c.within("L2 order", rep.last_order_l2(), 2.85, 3.10);
    c.at_most("runtime", secs, 180.0, " s");
    c.done()
}

fn criterion_6() -> Outcome {
    let (rep, secs) = h_sweep(MeshSpec::TetUniform, "elas3d_sine", 1, 1, "c11=hinv,c22=h", 3);
    let mut c = Checks::new();
    c.within("L2 order", rep.last_order_l2(), 1.85, f64::INFINITY);
    c.at_most("runtime", secs, 300.0, " s");
    match peak_rss_gb() {
        Some(gb) => c.at_most("peak memory", gb, 8.0, " GB"),
        None => c.holds("peak memory unavailable on this platform".into(), true),
    }
    c.done()
}

fn criterion_7() -> Outcome {
    let case = case_2d_poly();
    let mut worst: f64 = 0.0;
    for k in [1, 2] {
        // n = 8 cells per axis on (-1, 1)² is the h = 1/4 level.
        let s = tri(8, k, k);
        let bound = 1e-8 * (1.0 + max_abs(&assemble_load(&s.mesh, &s.dofmap, case.load).unwrap()));
        for flux in NAMED_FLUXES {
            let stab = StabilizationParams::from_alias(flux).unwrap();
            let ctx = FormContext::new(&s.mesh, &s.topo, &s.dofmap, case.mat, &stab, s.dofmap.data_exactness()).unwrap();
            worst = worst.max(max_abs(&residual_functional(&ctx, &case, &case.load)) / bound);
        }
    }
    let mut c = Checks::new();
    c.holds(format!("k=l in {{1,2}}, 5 fluxes: worst |r|/(1e-8 (1+|F|)) = {worst:.2e} <= 1"), worst <= 1.0);
    c.done()
}

fn criterion_8() -> Outcome {
    let mut rng = rng(8);
    let mut worst: f64 = 0.0;
    let setups = [tri(4, 1, 1), tri(3, 2, 1)];
    for flux in NAMED_FLUXES {
        let stab = StabilizationParams::from_alias(flux).unwrap();
        for s in &setups {
            let sys = s.assemble(&stab, |_| [0.0; 3]);
            let ctx = FormContext::new(&s.mesh, &s.topo, &s.dofmap, material(2), &stab, s.dofmap.discrete_exactness()).unwrap();
            for _ in 0..50 {
                let coeffs = random_coeffs(&mut rng, &s.dofmap);
                let field = DiscreteField::new(&s.mesh, &s.dofmap, &coeffs);
                let blocks = sys.aa.quadratic_form(coeffs.stress_part(&s.dofmap))
                    + sys.cc.quadratic_form(coeffs.disp_part(&s.dofmap));
                let direct = form_value(&ctx, &field, &field);
                worst = worst.max((direct - blocks).abs() / blocks.abs());
            }
        }
    }
    let mut c = Checks::new();
    c.holds(format!("500 forms, worst relative gap {worst:.2e} <= 1e-11"), worst <= 1e-11);
    c.done()
}

struct Smooth;

impl elastodg::spaces::FieldSource for Smooth {
    fn displacement(&self, _: usize, x: &Vector) -> Vector {
        [(2.0 * x[0] + 0.3).sin() * (1.5 * x[1]).cos(), (x[0] * x[1] + 0.7).cos(), 0.0]
    }
    fn strain(&self, _: usize, _: &Vector) -> Matrix {
        ZERO_MAT
    }
    fn stress(&self, _: usize, x: &Vector) -> Matrix {
        let a = (x[0] - 2.0 * x[1]).sin();
        let b = (1.3 * x[0] + x[1] + 0.2).cos();
        let c = (x[0] + 0.5).exp() * (x[1]).sin();
        [[a, c, 0.0], [c, b, 0.0], [0.0; 3]]
    }
}

fn criterion_9() -> Outcome {
    let mut c = Checks::new();
    for degree in 0..=3 {
        let mut rows = Vec::new();
        for n in [2, 4, 8, 16] {
            let s = tri(n, degree, degree);
            let proj = project_pair(&s.mesh, &s.dofmap, &Smooth).unwrap();
            let ph = DiscreteField::new(&s.mesh, &s.dofmap, &proj);
            let ex = s.dofmap.data_exactness();
            let (tu, ts) = weighted_trace_distance(&s.mesh, &s.topo, ex, &Smooth, &ph).unwrap();
            rows.push((
                s.mesh.max_diameter(),
                [
                    l2_distance_disp(&s.mesh, ex, &Smooth, &ph).unwrap(),
                    l2_distance_stress(&s.mesh, ex, &Smooth, &ph).unwrap(),
                    tu,
                    ts,
                ],
            ));
        }
        let target = degree as f64 + 1.0;
        for (i, name) in ["Q vol", "P vol", "Q trace", "P trace"].iter().enumerate() {
            let pairs: Vec<(f64, f64)> = rows.iter().map(|(h, e)| (*h, e[i])).collect();
            let order = observed_orders(&pairs).unwrap().last().copied();
            c.within(&format!("deg {degree} {name}"), order, target - 0.1, target + 0.1);
        }
    }
    c.done()
}

fn criterion_10() -> Outcome {
    let config = RunConfig {
        levels: Levels::List(vec![16]),
        stab: StabilizationParams::from_alias("c11=p,c22=1/p").unwrap(),
        ..Default::default()
    };
    let rep = run_p_sweep(&config, &[1, 2, 3, 4]).unwrap();
    let scaled: Vec<f64> = rep.rows.iter().map(|r| r.err_l2).collect();
    let decreasing = scaled.windows(2).all(|w| w[1] < w[0]);
    let mut c = Checks::new();
    let list: Vec<String> = scaled.iter().map(|v| format!("{v:.4}")).collect();
    c.holds(format!("scaled L2 errors k=1..4: {} strictly decreasing", list.join(", ")), decreasing);
    c.done()
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("2D tri k=l=1 C11=1/h C22=h", criterion_1),
        ("2D tri k=l=1 C11=1/h C22=1", criterion_2),
        ("2D tri k=1 l=0", criterion_3),
        ("2D tri k=l=0 LDG stagnation", criterion_4),
        ("2D tri k=l=2 C11=C22=1", criterion_5),
        ("3D tet k=l=1", criterion_6),
        ("consistency of the exact solution", criterion_7),
        ("quadratic-form identity", criterion_8),
        ("projection rates", criterion_9),
        ("p-sweep monotone decrease", criterion_10),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let id = format!("criterion {}", i + 1);
        if !filter.is_empty() && !filter.iter().any(|f| id.ends_with(f.as_str()) || name.contains(f.as_str())) {
            continue;
        }
        let start = Instant::now();
        let outcome = run();
        let verdict = if outcome.pass { "PASS" } else { "FAIL" };
        println!("{verdict} {id:>12} | {name} | {} ({:.1} s)", outcome.detail, start.elapsed().as_secs_f64());
        failed += usize::from(!outcome.pass);
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
