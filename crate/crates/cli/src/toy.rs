//! `toy-curve`: the perfect matching on `2m` vertices, two classes of size `m`.

use std::fmt::Write;

use homophily_core::oracle::{ln_matching_pmf, ln_sum_exp, matching_pmf};
use homophily_core::{covariance_structure, index_a, z_scores, GraphSummary, MomentSummary, ObservedOutcome, Profile};
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

use crate::CliError;

/// Above this many edges the tail comes from log-factorials instead of exact rationals.
pub const EXACT_BUDGET: u64 = 4000;

pub const HEADER: &str = "k,F,ratio,modularity,index_a";

/// `P(M_1 < k)` for `k = 0..=m/2`.
pub fn cdf_below(m: u64) -> Result<Vec<f64>, CliError> {
    if m <= EXACT_BUDGET {
        let pmf = matching_pmf(m);
        let mut acc = BigRational::zero();
        let mut out = Vec::with_capacity(pmf.len());
        for p in &pmf {
            out.push(acc.to_f64().unwrap_or(f64::NAN));
            acc += p;
        }
        Ok(out)
    } else {
        // Normalise by the computed total so that F(0) = 0 exactly and the
        // curve ends just below 1.
        let ln_pmf = ln_matching_pmf(m);
        let ln_total = ln_sum_exp(&ln_pmf);
        Ok((0..ln_pmf.len())
            .map(|k| if k == 0 { 0.0 } else { (ln_sum_exp(&ln_pmf[..k]) - ln_total).exp() })
            .collect())
    }
}

/// CSV with one row per `k`: the lower tail `F(k)`, descriptive ratio,
/// modularity and index `a` when each class holds `k` homophilic edges.
pub fn toy_curve(m: u64) -> Result<String, CliError> {
    if m < 2 {
        return Err(CliError::Input("need at least 2 edges".into()));
    }
    let f = cdf_below(m)?;
    let summary = GraphSummary::from_degrees(m, &vec![1; 2 * m as usize]);
    let profile = Profile::new(vec![m, m]).expect("two nonempty classes");
    let ms = MomentSummary::compute(&summary, &profile);
    let cs = covariance_structure(&summary, &profile, &ms);

    let mut out = String::with_capacity(64 * f.len());
    out.push_str(HEADER);
    out.push('\n');
    let mf = m as f64;
    for (k, fk) in f.iter().enumerate() {
        let kf = k as f64;
        let z = z_scores(&ObservedOutcome(vec![k as u64, k as u64]), &ms);
        let a = index_a(&z, &cs).map(|a| a.to_string()).unwrap_or_else(|_| "undefined".into());
        writeln!(out, "{k},{fk},{},{},{a}", 2.0 * kf / mf, 2.0 * (kf / mf - 0.25)).expect("string write");
    }
    Ok(out)
}
