//! Seeded fixtures shared by the benchmarks.

use ontic_core::channels::{dilation_channel, UnitaryOperator};
use ontic_core::qcore::random;
use ontic_core::trajectories::MarkovKernelChain;
use ontic_core::{ConditionalProbabilityTable, DensityMatrix, HilbertSpace, QuantumChannel};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// A bipartite parent `q1 ⊗ q2` evolved by a channel dilated through a
/// qubit environment.
pub struct BipartiteFixture {
    pub channel: QuantumChannel,
    pub rho: DensityMatrix,
}

impl BipartiteFixture {
    pub fn splits(&self) -> Vec<Vec<&'static str>> {
        vec![vec!["q1"], vec!["q2"]]
    }
}

pub fn bipartite(seed: u64, d1: usize, d2: usize) -> BipartiteFixture {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let w = HilbertSpace::new([("q1", d1), ("q2", d2)]).expect("distinct labels");
    let env = HilbertSpace::qubit("env");
    let total = w.tensor(&env).expect("distinct labels");
    let u = UnitaryOperator::new(total.clone(), random::unitary(&mut rng, total.total_dim())).expect("unitary");
    let rho_e = random::density_matrix(&mut rng, &env);
    let channel = dilation_channel(&u, &rho_e, &["q1", "q2"], &["env"]).expect("valid dilation");
    BipartiteFixture {
        channel,
        rho: random::density_matrix(&mut rng, &w),
    }
}

/// Random row-stochastic kernels on `n` states over `steps` unit steps.
pub fn random_chain(seed: u64, n: usize, steps: usize) -> MarkovKernelChain {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let kernels = (0..steps)
        .map(|_| {
            let rows = (0..n)
                .map(|_| {
                    let raw: Vec<f64> = (0..n).map(|_| rng.random::<f64>() + 1e-3).collect();
                    let total: f64 = raw.iter().sum();
                    raw.into_iter().map(|x| x / total).collect()
                })
                .collect();
            ConditionalProbabilityTable::kernel("x", rows).expect("stochastic rows")
        })
        .collect();
    MarkovKernelChain::new((0..=steps).map(|k| k as f64).collect(), kernels).expect("consistent chain")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixtures_are_well_formed() {
        let f = bipartite(1, 2, 3);
        assert_eq!(f.rho.dim(), 6);
        assert!(f.channel.completeness_defect() < 1e-10);
        assert_eq!(random_chain(2, 3, 4).steps(), 4);
    }
}
