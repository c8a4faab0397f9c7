//! Subfield-lattice families for the product formula `#M_K = ∏ #M^ar_χ`.

use std::collections::BTreeMap;
use std::fmt::Write;
use std::path::Path;

use num_rational::BigRational;
use phiarith::arith::divisors;
use phiarith::characters::chi_deconvolution;
use phiarith::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Deserialize)]
struct FamilyFile {
    name: String,
    degree: u64,
    /// `#M_k` keyed by the degree of `k`.
    subfields: BTreeMap<String, u64>,
    /// Claimed `#M^ar_χ` keyed by the order of `χ`.
    per_chi: Option<BTreeMap<String, u64>>,
    /// `#M^alg_χ`, reported but not required to multiply out.
    algebraic: Option<BTreeMap<String, u64>>,
}

#[derive(Serialize)]
pub struct ProductCheck {
    pub name: String,
    pub degree: u64,
    pub subfields: BTreeMap<u64, u64>,
    pub per_chi: BTreeMap<u64, u64>,
    pub product: u64,
    pub claims_match: Option<bool>,
    pub algebraic_product: Option<u64>,
    pub pass: bool,
}

fn keyed(m: BTreeMap<String, u64>) -> Result<BTreeMap<u64, u64>> {
    m.into_iter()
        .map(|(k, v)| {
            let d = k.parse::<u64>().map_err(|_| Error::FixtureParse(format!("lattice key {k:?} is not a degree")))?;
            if v == 0 {
                return Err(Error::FixtureParse(format!("order at {d} is zero")));
            }
            Ok((d, v))
        })
        .collect()
}

pub fn product_check(path: &Path) -> Result<ProductCheck> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::FixtureParse(format!("{}: {e}", path.display())))?;
    let file: FamilyFile = toml::from_str(&text).map_err(|e| Error::FixtureParse(e.to_string()))?;
    let g = file.degree;
    let subfields = keyed(file.subfields)?;
    if let Some(d) = subfields.keys().find(|&&d| d == 0 || g % d != 0) {
        return Err(Error::FixtureIntegrity(format!("{d} does not divide the degree {g}")));
    }
    let values: BTreeMap<u64, BigRational> = subfields.iter().map(|(&d, &v)| (d, BigRational::from_integer(v.into()))).collect();
    let recovered = chi_deconvolution(g, &values)?;
    let mut per_chi = BTreeMap::new();
    for (d, x) in recovered {
        let v = x
            .is_integer()
            .then(|| x.to_integer().try_into().ok())
            .flatten()
            .ok_or_else(|| Error::Verification(format!("#M_chi for order {d} is {x}, not an integer")))?;
        per_chi.insert(d, v);
    }
    let product: u64 = divisors(g).iter().map(|d| per_chi[d]).product();
    let claims_match = file.per_chi.map(keyed).transpose()?.map(|c| c == per_chi);
    let algebraic_product = file
        .algebraic
        .map(keyed)
        .transpose()?
        .map(|a| a.values().product::<u64>());
    let pass = product == subfields[&g] && claims_match != Some(false);
    Ok(ProductCheck { name: file.name, degree: g, subfields, per_chi, product, claims_match, algebraic_product, pass })
}

impl ProductCheck {
    pub fn human(&self) -> String {
        let mut s = String::new();
        writeln!(s, "{} (degree {})", self.name, self.degree).unwrap();
        writeln!(s, "{:>6}  {:>8}  {:>10}", "d", "#M_k", "#M^ar_chi").unwrap();
        for (d, v) in &self.subfields {
            writeln!(s, "{:>6}  {:>8}  {:>10}", d, v, self.per_chi[d]).unwrap();
        }
        let factors: Vec<String> = self.per_chi.values().map(|v| v.to_string()).collect();
        writeln!(s, "#M_K = {} = {}", self.subfields[&self.degree], factors.join(" x ")).unwrap();
        if let Some(m) = self.claims_match {
            writeln!(s, "stated per-chi orders: {}", if m { "recovered" } else { "DIFFER" }).unwrap();
        }
        if let Some(a) = self.algebraic_product {
            writeln!(s, "algebraic product = {a}").unwrap();
        }
        writeln!(s, "{}", if self.pass { "PASS" } else { "FAIL" }).unwrap();
        s
    }
}
