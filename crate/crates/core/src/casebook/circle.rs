use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{CaseContext, CaseReport, Check};
use crate::error::{Error, Result};
use crate::groups::{Group, TorusGroup};
use crate::poly::{Field, Monomial, Polynomial, DEFAULT_DEGREE_CAP};
use crate::setspec::{sup_on_set, SetSpec};
use crate::symmetrize::{m_symmetrization, symmetrize};

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Params {
    #[serde(default = "default_m_max")]
    pub m_max: u32,
    #[serde(default = "default_w", with = "super::scalar")]
    pub w: Complex64,
}

fn default_m_max() -> u32 {
    16
}

fn default_w() -> Complex64 {
    Complex64::new(2.0, 0.0)
}

impl Default for Params {
    fn default() -> Self {
        Params { m_max: default_m_max(), w: default_w() }
    }
}

/// Circle group on `C^1`: every averaged monomial `z^d`, `d >= 1`, vanishes, so
/// only constants are invariant and nothing separates `w` from the disk.
pub fn run(p: &Params, ctx: &CaseContext) -> Result<CaseReport> {
    if p.m_max == 0 || p.m_max > DEFAULT_DEGREE_CAP {
        return Err(Error::InvalidArgument(format!("m_max must lie in 1..={DEFAULT_DEGREE_CAP}")));
    }
    let mut rep = CaseReport::new("circle", p);
    let group: Group = TorusGroup::circle(1).into();
    let one = symmetrize(&Polynomial::constant(1, Complex64::new(1.0, 0.0)), &group)?;
    rep.check(Check::close("S_G(1) = 1", one.coefficient(&Monomial::new(vec![0])).norm(), 1.0, 1e-12));
    let z = Polynomial::var(1, 0, Field::Complex);
    let disk = SetSpec::lp_ball(1, 2.0, 1.0, Field::Complex);
    let mut worst: f64 = 0.0;
    for d in 1..=p.m_max {
        let s = m_symmetrization(&z, &group, d, DEFAULT_DEGREE_CAP)?;
        let coeff = s.coefficient(&Monomial::new(vec![d])).norm();
        worst = worst.max(coeff);
        rep.check(Check::lt(format!("|S_G(z^{d})| < 1e-12"), coeff, 1e-12));
        let value = s.eval(&[p.w])?.norm();
        let sup = sup_on_set(&s, &disk, ctx.budget, ctx.seed)?.value;
        rep.check(Check::le(
            format!("P_{d} does not separate w: |P_{d}(w)| - sup <= margin_tol"),
            value - sup,
            ctx.margin_tol,
        ));
    }
    rep.constant("max_averaged_coefficient", worst);
    rep.constant("quadrature_order", TorusGroup::circle(1).quadrature_order(p.m_max));
    rep.note("only constants are invariant under the circle action; no invariant polynomial separates w from the disk");
    rep.verdict(false);
    Ok(rep.finish())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::setspec::SupBudget;

    #[test]
    fn circle_case() {
        let ctx = CaseContext { budget: SupBudget::samples(200), ..CaseContext::default() };
        let r = run(&Params::default(), &ctx).unwrap();
        assert!(r.pass);
        assert_eq!(r.checks.len(), 1 + 2 * 16);
        assert_eq!(r.verdict.as_deref(), Some("not_separated"));
        assert!(run(&Params { m_max: 0, ..Params::default() }, &ctx).is_err());
    }
}
