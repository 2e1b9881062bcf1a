//! Model parameter tuple and its admissibility report.

use serde::Serialize;

/// Parameters of the doubly nonlinear problem.
///
/// `p` and `s` fix the mixed operator `-Δ_p + (-Δ)^s_p`, `m` the double
/// nonlinearity, `(delta, gamma)` the singular lower-order term
/// `m d(x)^{-gamma} u^{delta}`, and `vartheta` the exponent of the singular
/// auxiliary problem behind the super-solution barrier. `d_bold` is the
/// integrability exponent the analysis calls 𝐝.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ModelParams {
    pub p: f64,
    pub s: f64,
    pub m: f64,
    pub delta: f64,
    pub gamma: f64,
    pub vartheta: f64,
    pub d_bold: f64,
}

impl ModelParams {
    /// Barrier exponent `α' = p / (p - 1 + ϑ)`.
    pub fn alpha_prime(&self) -> f64 {
        self.p / (self.p - 1.0 + self.vartheta)
    }

    pub fn sp(&self) -> f64 {
        self.s * self.p
    }

    /// Lower end of the admissible window for `vartheta`.
    pub fn vartheta_lower(&self) -> f64 {
        1.0 + self.p * (1.0 - self.s) / self.s
    }

    /// Upper end of the admissible window for `vartheta`.
    pub fn vartheta_upper(&self) -> f64 {
        2.0 + 1.0 / (self.p - 1.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Status {
    Pass,
    Warn,
    Fail,
}

#[derive(Debug, Clone, Serialize)]
pub struct Finding {
    pub name: String,
    pub status: Status,
    pub message: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct ValidationReport {
    pub findings: Vec<Finding>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        !self.findings.iter().any(|f| f.status == Status::Fail)
    }

    pub fn failures(&self) -> Vec<&Finding> {
        self.findings
            .iter()
            .filter(|f| f.status == Status::Fail)
            .collect()
    }

    pub fn warnings(&self) -> Vec<&Finding> {
        self.findings
            .iter()
            .filter(|f| f.status == Status::Warn)
            .collect()
    }
}

fn finding(name: &str, ok: bool, fail_status: Status, message: String) -> Finding {
    Finding {
        name: name.to_string(),
        status: if ok { Status::Pass } else { fail_status },
        message,
    }
}

/// Reports every parameter constraint individually.
///
/// Hard arithmetic violations (`p <= 1`, `s` outside `(0,1)`, `m < 0`,
/// `m >= p-1`) fail; hypotheses the discrete scheme does not need
/// (dimension bounds, singular-weight integrability, the barrier window)
/// only warn so the solver can be exercised outside the theorems' regime.
pub fn validate(params: &ModelParams, grid_dim: usize) -> ValidationReport {
    let mut findings = Vec::new();
    let &ModelParams {
        p,
        s,
        m,
        delta,
        gamma,
        vartheta,
        d_bold,
    } = params;
    let n = grid_dim as f64;

    findings.push(finding(
        "p > 1",
        p.is_finite() && p > 1.0,
        Status::Fail,
        format!("p = {p}"),
    ));
    findings.push(finding(
        "s in (0,1)",
        s.is_finite() && s > 0.0 && s < 1.0,
        Status::Fail,
        format!("s = {s}"),
    ));
    findings.push(finding(
        "m >= 0",
        m.is_finite() && m >= 0.0,
        Status::Fail,
        format!("m = {m}"),
    ));
    findings.push(finding(
        "m < p - 1",
        m < p - 1.0,
        Status::Fail,
        format!("m = {m}, p - 1 = {}", p - 1.0),
    ));

    findings.push(finding(
        "N > p",
        n > p,
        Status::Warn,
        format!("N = {grid_dim}, p = {p}; the continuum theory assumes N > p"),
    ));
    findings.push(finding(
        "d_bold > N",
        d_bold > n,
        Status::Warn,
        format!("d_bold = {d_bold}, N = {grid_dim}"),
    ));

    if m > 0.0 {
        findings.push(finding(
            "delta in (0, m)",
            delta > 0.0 && delta < m,
            Status::Warn,
            format!("delta = {delta}, m = {m}"),
        ));
        findings.push(finding(
            "2*delta - d_bold*gamma > 2m - 1",
            2.0 * delta - d_bold * gamma > 2.0 * m - 1.0,
            Status::Warn,
            format!(
                "2*delta - d_bold*gamma = {}, 2m - 1 = {}",
                2.0 * delta - d_bold * gamma,
                2.0 * m - 1.0
            ),
        ));
        findings.push(finding(
            "gamma < 1/d_bold",
            gamma < 1.0 / d_bold,
            Status::Warn,
            format!("gamma = {gamma}, 1/d_bold = {}", 1.0 / d_bold),
        ));
    }

    findings.push(finding(
        "p(1-s) < 1",
        p * (1.0 - s) < 1.0,
        Status::Warn,
        format!("p(1-s) = {}; required by the barrier construction", p * (1.0 - s)),
    ));
    let (lo, hi) = (params.vartheta_lower(), params.vartheta_upper());
    findings.push(finding(
        "vartheta in (1 + p(1-s)/s, 2 + 1/(p-1))",
        vartheta > lo && vartheta < hi,
        Status::Warn,
        format!("vartheta = {vartheta}, window = ({lo}, {hi})"),
    ));
    let ap = params.alpha_prime();
    findings.push(finding(
        "alpha_prime in (0, s)",
        ap > 0.0 && ap < s,
        Status::Warn,
        format!("alpha_prime = p/(p-1+vartheta) = {ap}, s = {s}; barrier exponent outside the stated range"),
    ));

    ValidationReport { findings }
}
