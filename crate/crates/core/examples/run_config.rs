//! Runs a TOML experiment config the way `residue-lab run` does, into a scratch directory.
//! Pass a config path, or get the bundled two-branch pair one.

use std::path::PathBuf;

use residue_lab::cli::{describe, run_plans, Config};
use residue_lab::lab::ResultCache;

fn main() -> residue_lab::Result<()> {
    let path = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(|| PathBuf::from(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/pt.toml")));
    let config = Config::load(&path)?;
    let plans = config.plans()?;
    print!("{}", describe(&plans));
    let out = std::env::temp_dir().join("residue-lab-example");
    let cache = ResultCache::new(out.join("cache"))?;
    let m = run_plans(&plans, &config.hash()?, &out, &cache)?;
    println!("{} rows in {}, {} quadratures, {} cache hits", m.rows, out.display(), m.quadratures, m.cache_hits);
    for e in &m.experiments {
        for p in &e.paths {
            println!("{} {}: {:?} ± {:?}", e.id, p.path, p.limit_re.zip(p.limit_im), p.limit_error);
        }
    }
    Ok(())
}
