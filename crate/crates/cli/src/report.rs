//! Serializable command outputs and their human renderings.

use std::fmt::Write;

use phiarith::real_cubic::{PhiDecomposition, Verdict};
use serde::Serialize;

#[derive(Serialize)]
pub struct PhiLine {
    pub seed: u64,
    pub degree: u64,
    pub value: i64,
    pub p_exponent: i64,
}

#[derive(Serialize)]
pub struct MinusCharacter {
    pub order: u64,
    pub conductor: u64,
    pub alpha: u32,
    pub w: u64,
    pub class_number: String,
    pub per_phi: Vec<PhiLine>,
}

#[derive(Serialize)]
pub struct MinusOutput {
    pub f: u64,
    pub p: Option<u64>,
    pub characters: Vec<MinusCharacter>,
    pub h_minus: String,
}

impl MinusOutput {
    pub fn human(&self) -> String {
        let mut s = String::new();
        writeln!(s, "f={}  odd characters of conductor {}: {}", self.f, self.f, self.characters.len()).unwrap();
        for c in &self.characters {
            writeln!(s, "chi order {:<4} 2^{}*w={}  h-_chi = {}", c.order, c.alpha, c.w, c.class_number).unwrap();
            for phi in &c.per_phi {
                writeln!(s, "    phi seed {:<4} degree {:<3} m_an = {} (p-exponent {})", phi.seed, phi.degree, phi.value, phi.p_exponent).unwrap();
            }
        }
        writeln!(s, "h- of Q(mu_{}) = {}", self.f, self.h_minus).unwrap();
        s
    }
}

#[derive(Serialize)]
pub struct SubfieldLambda {
    pub order: u64,
    pub odd: bool,
    pub lambda: u64,
}

#[derive(Serialize)]
pub struct AnnihilatorLine {
    pub order: u64,
    pub seed: u64,
    pub bernoulli_valuation: i64,
    pub lambda: u64,
    pub smoothing: String,
    pub smoothing_valuation: u64,
}

#[derive(Serialize)]
pub struct StickelbergerOutput {
    pub f: u64,
    pub c: u64,
    pub stickelberger: Vec<(u64, String)>,
    pub twist: Vec<(u64, String)>,
    pub twist_is_zero: bool,
    pub antisymmetric: bool,
    pub lambda: u64,
    pub ideal_generators: Option<Vec<String>>,
    pub subfields: Vec<SubfieldLambda>,
    pub p: Option<u64>,
    pub annihilators: Vec<AnnihilatorLine>,
}

fn terms(v: &[(u64, String)]) -> String {
    let parts: Vec<String> = v
        .iter()
        .filter(|(_, x)| x != "0")
        .map(|(a, x)| format!("{x}*s{a}^-1"))
        .collect();
    if parts.is_empty() {
        "0".into()
    } else {
        parts.join(" + ")
    }
}

impl StickelbergerOutput {
    pub fn human(&self) -> String {
        let mut s = String::new();
        writeln!(s, "f={}  B = {}", self.f, terms(&self.stickelberger)).unwrap();
        if self.twist_is_zero {
            writeln!(s, "c={}  twist is the zero element", self.c).unwrap();
        } else {
            writeln!(s, "c={}  (1 - c*s_c^-1)B = {}", self.c, terms(&self.twist)).unwrap();
        }
        writeln!(s, "antisymmetry check: {}", if self.antisymmetric { "ok" } else { "FAILED" }).unwrap();
        writeln!(s, "Lambda = {}", self.lambda).unwrap();
        if let Some(g) = &self.ideal_generators {
            writeln!(s, "ideal generators: {}", g.join(", ")).unwrap();
        }
        for sub in &self.subfields {
            writeln!(s, "chi order {:<4} {}  Lambda_chi = {}", sub.order, if sub.odd { "odd " } else { "even" }, sub.lambda).unwrap();
        }
        for a in &self.annihilators {
            writeln!(
                s,
                "    order {:<4} phi seed {:<4} v(B1/2) = {:<3} lambda = {:<4} smoothing {} (v = {})",
                a.order, a.seed, a.bernoulli_valuation, a.lambda, a.smoothing, a.smoothing_valuation
            )
            .unwrap();
        }
        s
    }
}

#[derive(Serialize)]
pub struct TorsionCharacter {
    pub order: u64,
    pub n: u32,
    pub c: u64,
    pub seeds: Vec<u64>,
    pub values: Vec<u64>,
    pub total: u64,
}

#[derive(Serialize)]
pub struct TorsionOutput {
    pub f: u64,
    pub p: u64,
    pub characters: Vec<TorsionCharacter>,
}

impl TorsionOutput {
    pub fn human(&self) -> String {
        let mut s = String::new();
        for c in &self.characters {
            writeln!(
                s,
                "f={}  chi order {}  p={}  n={}  c={}  valuations {:?} at seeds {:?}  total {}",
                self.f, c.order, self.p, c.n, c.c, c.values, c.seeds, c.total
            )
            .unwrap();
        }
        if self.characters.is_empty() {
            writeln!(s, "f={}  no even nontrivial characters of conductor {}", self.f, self.f).unwrap();
        }
        s
    }
}

#[derive(Serialize)]
pub struct EnumeratedField {
    pub f: u64,
    pub a: i64,
    pub b: i64,
    pub polynomial: String,
}

pub fn enumerate_human(fields: &[EnumeratedField]) -> String {
    let mut s = String::new();
    for r in fields {
        writeln!(s, "P={}  f={}  (a,b)=({},{})", r.polynomial, r.f, r.a, r.b).unwrap();
    }
    s
}

#[derive(Serialize)]
pub struct TorsionSummary {
    pub n: u32,
    pub c: u64,
    pub values: Vec<u64>,
    pub total: u64,
}

#[derive(Serialize)]
pub struct ClassSide {
    pub cyc: Vec<u64>,
    pub auxiliary_primes: Vec<u64>,
    pub h: Vec<Vec<i64>>,
    pub sh: Vec<Vec<i64>>,
    pub u: Option<u64>,
    pub valuations: PhiDecomposition,
}

#[derive(Serialize)]
pub struct CubicReport {
    pub f: u64,
    pub a: i64,
    pub b: i64,
    pub polynomial: String,
    pub sigma: u64,
    pub inert_prime: u64,
    pub p: Option<u64>,
    pub digits: u32,
    pub rejected_digits: Vec<u32>,
    pub alpha_beta_raw: [i64; 2],
    pub alpha_beta: [i64; 2],
    pub index: String,
    pub index_p_part: Option<u64>,
    pub unit_valuations: Option<PhiDecomposition>,
    pub class: Option<ClassSide>,
    pub verdict: Option<Verdict>,
    pub torsion: Option<TorsionSummary>,
    pub torsion_error: Option<String>,
}

fn pair(d: &PhiDecomposition) -> String {
    let (a, b) = d.totals();
    format!("{a}  {b}")
}

impl CubicReport {
    pub fn human(&self) -> String {
        let mut s = String::new();
        writeln!(s, "P={}  f={}  (a,b)=({},{})", self.polynomial, self.f, self.a, self.b).unwrap();
        match &self.class {
            Some(c) => writeln!(s, "Class group={:?}  sigma={}", c.cyc, self.sigma).unwrap(),
            None => writeln!(s, "sigma={}", self.sigma).unwrap(),
        }
        writeln!(
            s,
            "(alpha,beta)=({},{}), Index [E_K:C_K]={}   [{} digits; canonical ({},{})]",
            self.alpha_beta_raw[0], self.alpha_beta_raw[1], self.index, self.digits, self.alpha_beta[0], self.alpha_beta[1]
        )
        .unwrap();
        if !self.rejected_digits.is_empty() {
            writeln!(s, "precision escalated past {:?} digits", self.rejected_digits).unwrap();
        }
        if let Some(c) = &self.class {
            writeln!(s, "auxiliary primes qi: {:?}", c.auxiliary_primes).unwrap();
            for (h, sh) in c.h.iter().zip(&c.sh) {
                writeln!(s, "h={h:?},  sigma(h)={sh:?}").unwrap();
            }
            if let Some(u) = c.u {
                writeln!(s, "u = {u}").unwrap();
            }
        }
        if let Some(v) = &self.unit_valuations {
            writeln!(s, "{}    P1 and P2-valuations for alpha+j*beta", pair(v)).unwrap();
        }
        if let Some(c) = &self.class {
            writeln!(s, "{}    P1 and P2-valuations for  H   (P1 {:?}, P2 {:?})", pair(&c.valuations), c.valuations.p1, c.valuations.p2).unwrap();
        }
        if let (Some(t), Some(p)) = (&self.torsion, self.p) {
            writeln!(s, "{p}-valuations of the torsion group: {:?}, total {}", t.values, t.total).unwrap();
        }
        if let Some(e) = &self.torsion_error {
            writeln!(s, "torsion unavailable: {e}").unwrap();
        }
        if let Some(v) = self.verdict {
            writeln!(s, "{v}").unwrap();
        }
        s
    }
}
