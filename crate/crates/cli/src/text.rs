//! Plain-text rendering of reports.

use std::fmt::Write;

use crate::config::CommandKind;
use crate::num::Num;
use crate::report::{Report, TensorBlock};

fn num(v: &Num) -> String {
    match v {
        Num::Value(x) => format!("{x:.6e}"),
        Num::Null(reason) => format!("null ({reason})"),
    }
}

fn vector(v: &[Num]) -> String {
    let parts: Vec<String> = v.iter().map(num).collect();
    format!("[{}]", parts.join(", "))
}

fn tensor(out: &mut String, t: &TensorBlock, rank4: bool) {
    let _ = write!(out, "  {} = {} ({})", t.name, t.symbol, t.variance);
    if t.rank() == 0 {
        let _ = writeln!(out, ": {}", num(&t.data[0]));
        return;
    }
    if t.rank() > 3 && !rank4 {
        let _ = writeln!(out, ": rank {}, shown with --rank4", t.rank());
        return;
    }
    let _ = writeln!(out);
    let n = t.shape[0];
    for (row, chunk) in t.data.chunks(n).enumerate() {
        let mut idx = Vec::with_capacity(t.rank() - 1);
        let mut r = row;
        for _ in 1..t.rank() {
            idx.push(r % n);
            r /= n;
        }
        idx.reverse();
        let lead: Vec<String> = idx.iter().map(|i| (i + 1).to_string()).chain(["*".into()]).collect();
        let _ = writeln!(out, "    [{}] {}", lead.join(","), vector(chunk));
    }
}

pub fn render(r: &Report) -> String {
    let mut out = String::new();
    let c = &r.config;
    let _ = write!(out, "fcl {}  metric {}", c.command.name(), c.metric);
    if let Some(m) = &r.metric {
        let _ = write!(out, " ({}, n = {})", m.kind, m.dim);
        if c.command != CommandKind::Geodesic {
            let _ = write!(out, "  samples {}  seed {}  domain {}  order {}", c.samples, c.seed, m.domain, c.order);
        }
    }
    let _ = writeln!(out);
    for note in &r.notes {
        let _ = writeln!(out, "note: {note}");
    }
    if let Some(samples) = &r.samples {
        for s in samples {
            let _ = writeln!(out, "\nsample {}  x = {}  y = {}", s.index, vector(&s.x), vector(&s.y));
            if let Some(f) = &s.fits {
                let _ = writeln!(
                    out,
                    "  F = {}  mu = {}  lambda = {}  mu' = {}  (gib residual {})",
                    num(&f.f),
                    num(&f.mu),
                    num(&f.lambda),
                    num(&f.mu_prime),
                    num(&f.gib_residual)
                );
                let _ = writeln!(out, "  eta = {}  (residual {})", num(&f.eta), num(&f.eta_residual));
                let _ = writeln!(out, "  K = {}  (residual {})", num(&f.k), num(&f.k_residual));
            }
            for t in &s.tensors {
                tensor(&mut out, t, c.rank4);
            }
        }
    }
    if let Some(cl) = &r.classification {
        let _ = writeln!(out);
        for p in &cl.predicates {
            let _ = writeln!(
                out,
                "{:<24} {:<5}  residual {}  tol {:e}",
                p.name,
                p.verdict,
                num(&p.residual),
                p.tolerance
            );
        }
    }
    if let Some(ids) = &r.identities {
        let _ = writeln!(out);
        for e in ids {
            let verdict = format!("{:?}", e.verdict).to_uppercase();
            let _ = writeln!(
                out,
                "{verdict:<8} {:<28} max {}  tol {:e}  ({} samples, {} skipped, {} errors)",
                e.name,
                num(&e.max_residual),
                e.tolerance,
                e.samples,
                e.skipped,
                e.errors
            );
        }
    }
    if let Some(g) = &r.geodesic {
        let end = g.path.last().expect("paths hold the initial sample");
        let _ = writeln!(out, "\nRK{} step {}  {} samples", g.method_order, num(&g.step), g.path.len());
        let _ = writeln!(out, "end t = {}  x = {}  v = {}", num(&end.t), vector(&end.x), vector(&end.v));
        if let Some(d) = &g.diagnostics {
            let _ = writeln!(out, "F defect {}", num(&d.f_defect));
            let (lo, hi) = d
                .mu
                .iter()
                .filter_map(Num::value)
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), m| (a.min(m), b.max(m)));
            if lo <= hi {
                let _ = writeln!(out, "mu in [{lo:.6e}, {hi:.6e}]");
            }
            let _ = writeln!(
                out,
                "stretch norm {}  2mu' - mu^2 F max {}  ({})",
                num(&d.stretch_norm),
                num(&d.st5_max),
                if d.st5_asserted { "asserted" } else { "not asserted" }
            );
            if let Some(note) = &d.note {
                let _ = writeln!(out, "note: {note}");
            }
        }
    }
    if !r.errors.is_empty() {
        let _ = writeln!(out);
    }
    for e in &r.errors {
        let at = e.sample.map(|s| format!(" (sample {s})")).unwrap_or_default();
        let _ = writeln!(out, "error[{}]{at}: {}", e.kind, e.message);
    }
    let _ = writeln!(out, "\nexit {}", r.exit_code);
    out
}
