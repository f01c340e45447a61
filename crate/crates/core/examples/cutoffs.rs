//! Cutoff families χ and the delta family (d/dt)χ(t/ε).

use residue_lab::cutoff::{delta_family_pairing, CutoffSpec};

fn main() -> residue_lab::Result<()> {
    let families = [CutoffSpec::canonical(1), CutoffSpec::canonical(2), CutoffSpec::complement(1), CutoffSpec::tprime(1), CutoffSpec::indicator()];
    println!("{:<28} {:>10} {:>10} {:>10} {:>6}", "family", "χ(0.5)", "χ(2)", "χ(∞)", "order");
    for c in families {
        println!(
            "{:<28} {:>10.6} {:>10.6} {:>10.1} {:>6}",
            format!("{:?}({})", c.family, c.order),
            c.eval(0.5)?,
            c.eval(2.0)?,
            c.value_at_infinity(),
            if c.is_smooth() { c.vanishing_order().to_string() } else { "∞".into() }
        );
    }
    // ∫(d/dt)χ(t/ε)φ(t)dt → φ(0) for χ(0) = 0, χ(∞) = 1
    let phi = |t: f64| (-t).exp();
    for eps in [1e-1, 1e-2, 1e-3] {
        let (v, err) = delta_family_pairing(&CutoffSpec::canonical(2), phi, 50.0, eps)?;
        println!("ε = {eps:.0e}: pairing with e^(−t) = {v:.8} ± {err:.1e}");
    }
    Ok(())
}
