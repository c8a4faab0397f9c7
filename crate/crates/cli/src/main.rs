use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use phiarith::arith::gcd;
use phiarith::characters::rational_orbits;
use phiarith::cyclo_ring::EisensteinInt;
use phiarith::minus_part::{minus_class_number, minus_class_number_of_cyclotomic, odd_characters_of_conductor};
use phiarith::real_cubic::{
    analyze_units, cubic_fields_of_conductor, unit_index_and_valuations, verify_main_conjecture, CubicField, CubicFixture,
    Verdict, DEFAULT_DIGITS,
};
use phiarith::stickelberger::{
    annihilator_minus, ideal_a_generators, lambda_k, stickelberger_full, torsion_valuations_with, twist_full,
    CyclicFieldSelector,
};
use phiarith::Error;
use num_traits::Zero;
use rayon::prelude::*;
use serde::Serialize;

mod family;
mod report;

use report::*;

#[derive(Parser)]
#[command(name = "phiarith", version, about = "phi-component arithmetic of abelian fields")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[arg(long, value_enum, default_value_t = Format::Human, global = true)]
    format: Format,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Human,
    Json,
}

#[derive(Args, Clone, Default)]
struct Precision {
    /// p-adic level n
    #[arg(long = "prec-padic")]
    padic: Option<u32>,
    /// working precision in decimal digits
    #[arg(long = "prec-real")]
    real: Option<u32>,
}

#[derive(Subcommand)]
enum Command {
    /// Relative class numbers per odd character of conductor f
    Minus {
        f: u64,
        #[arg(long)]
        p: Option<u64>,
    },
    /// Stickelberger element of Q(mu_f), its c-twist and Lambda
    Stickelberger {
        f: u64,
        #[arg(long)]
        c: Option<u64>,
        #[arg(long)]
        p: Option<u64>,
    },
    /// p-adic torsion valuations per even character of conductor f
    Torsion {
        f: u64,
        #[arg(long)]
        p: u64,
        #[arg(long)]
        c: Option<u64>,
        #[command(flatten)]
        prec: Precision,
    },
    /// Cyclic cubic fields with conductor in a range
    CubicEnumerate {
        #[arg(long, value_parser = parse_range)]
        range: (u64, u64),
    },
    /// Unit side against class side for one cubic fixture
    CubicVerify {
        fixture: PathBuf,
        #[arg(long)]
        p: Option<u64>,
        #[arg(long)]
        c: Option<u64>,
        #[command(flatten)]
        prec: Precision,
    },
    /// Product formula over a subfield-lattice family
    ProductCheck { family: PathBuf },
    /// Rerun shipped fixtures and diff against golden outputs
    Selftest {
        #[arg(long, default_value = "fixtures")]
        fixtures: PathBuf,
        #[arg(long, value_parser = parse_range)]
        range: Option<(u64, u64)>,
    },
}

fn parse_range(s: &str) -> Result<(u64, u64), String> {
    let (a, b) = s.split_once("..").ok_or("expected a..b")?;
    let a: u64 = a.trim().parse().map_err(|e| format!("{e}"))?;
    let b: u64 = b.trim().parse().map_err(|e| format!("{e}"))?;
    if a > b {
        return Err(format!("empty range {a}..{b}"));
    }
    Ok((a, b))
}

enum Failure {
    Usage(String),
    Core(Error),
    Check(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Core(Error::Domain(_) | Error::IncompleteLattice { .. }) => 1,
            Failure::Core(Error::FixtureIntegrity(_) | Error::FixtureParse(_)) => 2,
            Failure::Core(_) | Failure::Check(_) => 3,
        }
    }
}

type Outcome = Result<String, Failure>;

fn emit<T: Serialize>(format: Format, value: &T, human: impl FnOnce(&T) -> String) -> String {
    match format {
        Format::Human => human(value),
        Format::Json => serde_json::to_string_pretty(value).expect("serializable") + "\n",
    }
}

fn cmd_minus(f: u64, p: Option<u64>, format: Format) -> Outcome {
    if f <= 2 {
        return Err(Failure::Usage(format!("no odd characters of conductor {f}")));
    }
    let mut characters = Vec::new();
    for chi in odd_characters_of_conductor(f) {
        let r = minus_class_number(&chi, p)?;
        characters.push(MinusCharacter {
            order: chi.order,
            conductor: chi.conductor,
            alpha: r.alpha,
            w: r.w,
            class_number: r.class_number.to_string(),
            per_phi: r
                .per_phi
                .iter()
                .map(|m| PhiLine { seed: m.seed, degree: m.degree, value: m.value, p_exponent: m.p_exponent })
                .collect(),
        });
    }
    if characters.is_empty() {
        return Err(Failure::Usage(format!("no odd characters of conductor {f}")));
    }
    let out = MinusOutput { f, p, characters, h_minus: minus_class_number_of_cyclotomic(f)?.to_string() };
    Ok(emit(format, &out, MinusOutput::human))
}

fn cmd_stickelberger(f: u64, c: Option<u64>, p: Option<u64>, format: Format) -> Outcome {
    if f <= 2 || f % 4 == 2 {
        return Err(Failure::Usage(format!("f = {f} is not the conductor of a cyclotomic field")));
    }
    let c = c.unwrap_or_else(|| (3..).step_by(2).find(|&c| gcd(c, f) == 1).unwrap());
    let (twist, _) = twist_full(f, c)?;
    let stickelberger = stickelberger_full(f).into_iter().map(|(a, x)| (a, x.to_string())).collect();
    let antisymmetric = twist.iter().all(|(&a, x)| (x + &twist[&(f - a)]).is_zero());
    let twist_is_zero = twist.values().all(Zero::is_zero);
    let twist: Vec<(u64, String)> = twist.into_iter().map(|(a, x)| (a, x.to_string())).collect();
    // α_1 = 1 in the full cyclotomic field
    let (lambda, ideal_generators) = match CyclicFieldSelector::cyclotomic(f) {
        Ok(sel) => (lambda_k(&sel), Some(ideal_a_generators(&sel)?.iter().map(|g| g.to_string()).collect())),
        Err(_) => (f, None),
    };
    let mut subfields = Vec::new();
    let mut annihilators = Vec::new();
    for chi in rational_orbits(f).into_iter().filter(|x| x.conductor == f && x.order > 1) {
        let sel = CyclicFieldSelector::from_rational(&chi)?;
        subfields.push(SubfieldLambda { order: chi.order, odd: chi.odd, lambda: lambda_k(&sel) });
        if let (Some(p), true) = (p, chi.odd) {
            for r in annihilator_minus(&chi, p)? {
                annihilators.push(AnnihilatorLine {
                    order: chi.order,
                    seed: r.seed,
                    bernoulli_valuation: r.bernoulli_valuation,
                    lambda: r.lambda,
                    smoothing: r.smoothing.to_string(),
                    smoothing_valuation: r.smoothing_valuation,
                });
            }
        }
    }
    let out = StickelbergerOutput {
        f,
        c,
        stickelberger,
        twist,
        twist_is_zero,
        antisymmetric,
        lambda,
        ideal_generators,
        subfields,
        p,
        annihilators,
    };
    Ok(emit(format, &out, StickelbergerOutput::human))
}

fn cmd_torsion(f: u64, p: u64, c: Option<u64>, prec: &Precision, format: Format) -> Outcome {
    let mut characters = Vec::new();
    for chi in rational_orbits(f).into_iter().filter(|x| x.conductor == f && x.order > 1 && !x.odd) {
        let r = torsion_valuations_with(&chi, &chi.representative, p, prec.padic, c)?;
        characters.push(TorsionCharacter {
            order: chi.order,
            n: r.n,
            c: r.c,
            seeds: r.per_phi.iter().map(|x| x.seed).collect(),
            values: r.values(),
            total: r.total(),
        });
    }
    Ok(emit(format, &TorsionOutput { f, p, characters }, TorsionOutput::human))
}

fn cmd_enumerate(lo: u64, hi: u64, format: Format) -> Outcome {
    let fields: Vec<EnumeratedField> = (lo..=hi)
        .into_par_iter()
        .flat_map_iter(cubic_fields_of_conductor)
        .map(|r| EnumeratedField { f: r.f, a: r.a, b: r.b, polynomial: r.to_string() })
        .collect();
    Ok(emit(format, &fields, |v| enumerate_human(v)))
}

fn cubic_report(fx: &CubicFixture, p: Option<u64>, c: Option<u64>, prec: &Precision) -> Result<CubicReport, Failure> {
    let digits = prec.real.unwrap_or(DEFAULT_DIGITS);
    let p = p.or(fx.classgroup.as_ref().map(|cg| cg.p));
    let rec = &fx.record;
    let (units, class, verdict) = match (&fx.classgroup, p) {
        (Some(_), Some(p)) => {
            let r = verify_main_conjecture(fx, p, digits)?;
            (r.units, Some(r.class), Some(r.verdict))
        }
        _ => (analyze_units(rec, fx.sigma, &fx.units, digits)?, None, None),
    };
    let ab = units.alpha_beta.value;
    let canonical: EisensteinInt = ab.canonical();
    let (index_p_part, unit_valuations) = match p {
        Some(p) => {
            let (_, pp, pattern) = unit_index_and_valuations(ab, p)?;
            (Some(pp), Some(pattern))
        }
        None => (None, None),
    };
    let class = match (class, &fx.classgroup) {
        (Some(s), Some(cg)) => Some(ClassSide {
            cyc: cg.cyc.clone(),
            auxiliary_primes: cg.records.iter().filter_map(|r| r.q).collect(),
            h: cg.records.iter().map(|r| r.h.clone()).collect(),
            sh: cg.records.iter().map(|r| r.sh.clone()).collect(),
            u: s.u,
            valuations: s.decomposition,
        }),
        _ => None,
    };
    let (torsion, torsion_error) = match p {
        Some(p) => torsion_for(&units.field, p, c, prec.padic),
        None => (None, None),
    };
    Ok(CubicReport {
        f: rec.f,
        a: rec.a,
        b: rec.b,
        polynomial: rec.to_string(),
        sigma: units.field.sigma,
        inert_prime: units.field.inert_prime,
        p,
        digits: units.alpha_beta.digits,
        rejected_digits: units.rejected.iter().map(|r| r.0).collect(),
        alpha_beta_raw: [ab.a, ab.b],
        alpha_beta: [canonical.a, canonical.b],
        index: units.alpha_beta.index.to_string(),
        index_p_part,
        unit_valuations,
        class,
        verdict,
        torsion,
        torsion_error,
    })
}

fn torsion_for(field: &CubicField, p: u64, c: Option<u64>, n: Option<u32>) -> (Option<TorsionSummary>, Option<String>) {
    match torsion_valuations_with(&field.rational_character(), &field.psi, p, n, c) {
        Ok(r) => (Some(TorsionSummary { n: r.n, c: r.c, values: r.values(), total: r.total() }), None),
        Err(e @ (Error::PrecisionCap { .. } | Error::SearchBound { .. })) => (None, Some(e.to_string())),
        Err(e) => (None, Some(format!("error: {e}"))),
    }
}

fn cmd_cubic_verify(path: &Path, p: Option<u64>, c: Option<u64>, prec: &Precision, format: Format) -> Outcome {
    let fx = CubicFixture::load(path)?;
    let r = cubic_report(&fx, p, c, prec)?;
    let text = emit(format, &r, CubicReport::human);
    if r.verdict == Some(Verdict::Mismatch) {
        return Err(Failure::Check(format!("{text}unit and class valuations disagree")));
    }
    if let Some(e) = r.torsion_error.as_deref().filter(|e| e.starts_with("error")) {
        return Err(Failure::Check(format!("{text}torsion {e}")));
    }
    Ok(text)
}

fn cmd_product_check(path: &Path, format: Format) -> Outcome {
    let r = family::product_check(path)?;
    let text = emit(format, &r, family::ProductCheck::human);
    if r.pass {
        Ok(text)
    } else {
        Err(Failure::Check(format!("{text}product formula fails")))
    }
}

fn sorted_files(dir: &Path, ext: &str) -> Vec<PathBuf> {
    let mut out: Vec<PathBuf> = std::fs::read_dir(dir)
        .map(|d| d.filter_map(|e| e.ok().map(|e| e.path())).filter(|p| p.extension().is_some_and(|x| x == ext)).collect())
        .unwrap_or_default();
    out.sort();
    out
}

fn cmd_selftest(dir: &Path, range: Option<(u64, u64)>) -> Outcome {
    let mut lines = Vec::new();
    let mut failed = 0;
    let mut check = |name: String, ok: bool, detail: String| {
        if !ok {
            failed += 1;
        }
        lines.push(format!("{} {name}{detail}", if ok { "PASS" } else { "FAIL" }));
    };
    let minus = cmd_minus(47, None, Format::Json).ok().unwrap_or_default();
    check("minus f=47 has a 139 component".into(), minus.contains("\"class_number\": \"139\""), String::new());
    let mut fixtures: Vec<(u64, PathBuf)> = Vec::new();
    for path in sorted_files(&dir.join("cubic"), "toml") {
        match CubicFixture::load(&path) {
            Ok(fx) => fixtures.push((fx.record.f, path)),
            Err(e) => check(path.display().to_string(), false, format!(": {e}")),
        }
    }
    fixtures.sort();
    for (f, path) in fixtures {
        if range.is_some_and(|(lo, hi)| f < lo || f > hi) {
            continue;
        }
        let golden = dir.join("goldens").join(format!("f{f}.json"));
        let got = cmd_cubic_verify(&path, None, None, &Precision::default(), Format::Json);
        match (got, std::fs::read_to_string(&golden)) {
            (Ok(out), Ok(want)) => check(format!("cubic f={f}"), out == want, if out == want { String::new() } else { ": differs from golden".into() }),
            (Ok(_), Err(_)) => check(format!("cubic f={f}"), false, format!(": missing {}", golden.display())),
            (Err(e), _) => check(format!("cubic f={f}"), false, format!(": {}", failure_text(&e))),
        }
    }
    for path in sorted_files(&dir.join("families"), "toml") {
        let r = family::product_check(&path);
        let ok = r.as_ref().is_ok_and(|r| r.pass);
        check(format!("family {}", path.display()), ok, String::new());
    }
    let text = lines.join("\n") + "\n";
    if failed == 0 {
        Ok(text)
    } else {
        Err(Failure::Check(format!("{text}{failed} selftest checks failed")))
    }
}

fn failure_text(f: &Failure) -> String {
    match f {
        Failure::Usage(s) | Failure::Check(s) => s.clone(),
        Failure::Core(e) => e.to_string(),
    }
}

fn run(cli: Cli) -> Outcome {
    let format = cli.format;
    match cli.command {
        Command::Minus { f, p } => cmd_minus(f, p, format),
        Command::Stickelberger { f, c, p } => cmd_stickelberger(f, c, p, format),
        Command::Torsion { f, p, c, prec } => cmd_torsion(f, p, c, &prec, format),
        Command::CubicEnumerate { range: (lo, hi) } => cmd_enumerate(lo, hi, format),
        Command::CubicVerify { fixture, p, c, prec } => cmd_cubic_verify(&fixture, p, c, &prec, format),
        Command::ProductCheck { family } => cmd_product_check(&family, format),
        Command::Selftest { fixtures, range } => cmd_selftest(&fixtures, range),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(text) => {
            print!("{text}");
            ExitCode::SUCCESS
        }
        Err(f) => {
            if let Failure::Check(text) = &f {
                print!("{}", text.rsplit_once('\n').map_or("", |x| x.0));
                println!();
            }
            eprintln!("phiarith: {}", failure_text(&f).lines().last().unwrap_or(""));
            ExitCode::from(f.code())
        }
    }
}
