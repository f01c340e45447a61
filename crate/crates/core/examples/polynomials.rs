//! Mixed polynomials in z and z̄: the text format, evaluation and Wirtinger derivatives.

use num_complex::Complex64 as C64;
use residue_lab::algebra::{DiffKind, MixedPoly};

fn main() -> residue_lab::Result<()> {
    // one term per line: re im I₁ I₂ J₁ J₂ for c·z^I z̄^J
    let p = MixedPoly::parse(2, "1 0 2 0 0 1\n1 0 0 2 0 1\n1 0 3 0 0 1")?;
    println!("p = z̄₂(z₁² + z₂² + z₁³):\n{}", p.to_text());
    let z = [C64::new(0.3, 0.1), C64::new(-0.2, 0.4)];
    println!("p(z) = {}", p.eval(&z));
    println!("∂p/∂z₁ =\n{}", p.diff(0, DiffKind::Holo).to_text());
    println!("∂p/∂z̄₂ =\n{}", p.diff(1, DiffKind::Antiholo).to_text());
    println!("holomorphic: {}, conj holomorphic: {}", p.is_holomorphic(), p.conj().is_holomorphic());
    match MixedPoly::parse(2, "1 0 2 0 0 1\n1 0 x 0 0 0") {
        Err(e) => println!("parse errors carry the line: {e}"),
        Ok(_) => unreachable!(),
    }
    Ok(())
}
