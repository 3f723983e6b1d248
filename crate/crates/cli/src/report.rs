//! Plain-text tables shared by the reports.

use std::fmt::Write as _;

use taskalloc::io::fmt_num;
use taskalloc::lambda_solver::BoundKind;
use taskalloc::{Allocation, AllocationProblem, BreakpointTable, KeyScale, KktCertificate};

pub(crate) fn key_label(scale: KeyScale) -> &'static str {
    match scale {
        KeyScale::Log => "ln lambda_new",
        KeyScale::Linear => "lambda_new",
    }
}

fn bound_name(kind: BoundKind) -> &'static str {
    match kind {
        BoundKind::Lower => "min",
        BoundKind::Upper => "max",
    }
}

/// Per-agent keys followed by the sorted breakpoints with m_j and slopes.
pub(crate) fn breakpoint_table(t: &BreakpointTable) -> String {
    let key = match t.scale {
        KeyScale::Log => "ln lambda",
        KeyScale::Linear => "lambda",
    };
    let mut out = String::new();
    let _ = writeln!(out, "agent keys ({key} at lower / upper bound)");
    for (i, (lo, hi)) in t.agent_keys.iter().enumerate() {
        let _ = writeln!(
            out,
            "  {:>3}  {:>20}  {:>20}",
            i + 1,
            fmt_num(*lo),
            fmt_num(*hi)
        );
    }
    out.push('\n');
    let _ = writeln!(out, "breakpoints");
    let _ = writeln!(
        out,
        "  {:>3}  {:>8}  {:>20}  {:>20}  {:>20}",
        "j", "source", "L_j", "m_j", "slope j->j+1"
    );
    for (j, bp) in t.sorted.iter().enumerate() {
        let slope = match t.slopes.get(j) {
            Some(Some(s)) => fmt_num(*s),
            Some(None) => "(zero width)".to_string(),
            None => String::new(),
        };
        let source = format!("{}{}", bound_name(bp.kind), bp.agent + 1);
        let _ = writeln!(
            out,
            "  {:>3}  {:>8}  {:>20}  {:>20}  {:>20}",
            j + 1,
            source,
            fmt_num(bp.key),
            fmt_num(t.aggregates[j]),
            slope
        );
    }
    out
}

pub(crate) fn allocation_table(p: &AllocationProblem, w: &Allocation) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "  {:>3}  {:>20}  {:>12}  {:>12}  {:>20}  {:>8}",
        "i", "w_i", "lower", "upper", "marginal", "status"
    );
    for (i, (c, &x)) in p.agents().iter().zip(w.loads()).enumerate() {
        let band = taskalloc::verify::ACTIVITY_REL_TOL * c.width();
        let status = if (x - c.lower()).abs() <= band {
            "lower"
        } else if (x - c.upper()).abs() <= band {
            "upper"
        } else if c.in_box(x) {
            "interior"
        } else {
            "outside"
        };
        let _ = writeln!(
            out,
            "  {:>3}  {:>20}  {:>12}  {:>12}  {:>20}  {:>8}",
            i + 1,
            fmt_num(x),
            fmt_num(c.lower()),
            fmt_num(c.upper()),
            fmt_num(c.marginal(x)),
            status
        );
    }
    out
}

pub(crate) fn certificate_lines(cert: &KktCertificate, tol: f64) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "kkt certificate: {} (tol {})",
        if cert.passed { "PASS" } else { "FAIL" },
        fmt_num(tol)
    );
    let _ = writeln!(out, "  lambda (gamma): {}", fmt_num(cert.lambda));
    for (i, a) in &cert.alphas {
        let _ = writeln!(out, "  alpha_{}: {}", i + 1, fmt_num(*a));
    }
    for (j, b) in &cert.betas {
        let _ = writeln!(out, "  beta_{}: {}", j + 1, fmt_num(*b));
    }
    let _ = writeln!(
        out,
        "  stationarity residual: {}",
        fmt_num(cert.stationarity_residual)
    );
    let _ = writeln!(out, "  interior spread: {}", fmt_num(cert.interior_spread));
    let _ = writeln!(
        out,
        "  feasibility residual: {}",
        fmt_num(cert.feasibility_residual)
    );
    out
}
