//! Dev probe: compare the exact 6-j against the semiclassical formula.
use spinnet::forms::{ponzano_regge, sixj, SixJInput};

fn main() {
    for n in 1..=25u32 {
        let g = 2 * n;
        let s = sixj(SixJInput::new(g, g, g, g, g, g)).unwrap();
        let exact = s.to_f64();
        let pr = ponzano_regge(n);
        let resid = (exact - pr).abs() * (n as f64).powf(2.5);
        println!(
            "n={n:2} exact={exact:+.8e} pr={pr:+.8e} resid*n^2.5={resid:.4}"
        );
    }
}
