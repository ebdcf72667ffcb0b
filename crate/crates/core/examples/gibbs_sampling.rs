//! Conditionals, free energy and short Gibbs chains on a small hand-built RBM.
//!
//! ```text
//! cargo run --example gibbs_sampling
//! ```

use ndarray::{array, Array1};
use ocdgr::rbm::{free_energy, gibbs_from_hidden, hidden_probs, visible_probs, RbmParameters};
use ocdgr::rng::seeded_rng;
use rand::Rng;

fn main() -> ocdgr::Result<()> {
    // Two hidden units, each tied to one half of a 6-unit visible layer.
    let weights = array![[3.0, 3.0, 3.0, -3.0, -3.0, -3.0], [-3.0, -3.0, -3.0, 3.0, 3.0, 3.0]];
    let params = RbmParameters::new(weights, Array1::from_elem(6, -1.0), Array1::zeros(2))?;

    let left = array![1.0, 1.0, 1.0, 0.0, 0.0, 0.0];
    let mixed = array![1.0, 0.0, 1.0, 0.0, 1.0, 0.0];
    println!("P(h | left half on)  = {:.4}", hidden_probs(&params, &left)?);
    println!("P(v | h = [1, 0])    = {:.4}", visible_probs(&params, &array![1.0, 0.0])?);
    println!("F(left half on)      = {:.4}", free_energy(&params, &left)?);
    println!("F(alternating)       = {:.4}", free_energy(&params, &mixed)?);

    // The replay generator starts each chain from uniform real hidden states.
    let mut rng = seeded_rng(7);
    println!("\nsamples after one step from h ~ U(0,1):");
    for _ in 0..6 {
        let h0: Array1<f64> = (0..2).map(|_| rng.random::<f64>()).collect();
        let (v, _) = gibbs_from_hidden(&params, &h0, 1, &mut rng)?;
        let bits: String = v.iter().map(|&x| if x > 0.5 { '1' } else { '0' }).collect();
        println!("  h0 = [{:.2}, {:.2}]  ->  v = {bits}", h0[0], h0[1]);
    }
    Ok(())
}
