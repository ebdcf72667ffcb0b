//! Exact log Z by enumeration against the annealed importance sampling estimate.
//!
//! ```text
//! cargo run --release --example partition_function -- [n_betas] [n_chains]
//! ```

use ocdgr::eval::{ais_log_z, exact_log_z, AisSchedule};
use ocdgr::rbm::init_params;
use ocdgr::rng::seeded_rng;

fn main() -> ocdgr::Result<()> {
    let mut args = std::env::args().skip(1);
    let n_betas: usize = args.next().map_or(1_000, |s| s.parse().expect("n_betas must be an integer"));
    let n_chains: usize = args.next().map_or(100, |s| s.parse().expect("n_chains must be an integer"));
    let schedule = AisSchedule::uniform(n_betas, n_chains)?;

    println!("n_v  n_h  sigma   exact log Z   AIS estimate    AIS std   |error|");
    for (seed, (n_v, n_h, sigma)) in [(20, 12, 0.1), (20, 12, 1.0), (50, 16, 0.3), (16, 50, 0.3)]
        .into_iter()
        .enumerate()
    {
        let params = init_params(n_v, n_h, sigma, &mut seeded_rng(seed as u64))?;
        let exact = exact_log_z(&params)?;
        let ais = ais_log_z(&params, &schedule, &mut seeded_rng(100 + seed as u64))?;
        println!(
            "{n_v:>3}  {n_h:>3}  {sigma:>5}  {exact:>12.5}  {:>13.5}  {:>9.5}  {:>8.5}",
            ais.estimate,
            ais.std,
            (ais.estimate - exact).abs()
        );
    }
    Ok(())
}
