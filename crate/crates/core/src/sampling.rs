//! Seeded low-discrepancy sampling of domain boxes.
//!
//! Diagnostics evaluate residuals at a few hundred points per manifold;
//! uniform coverage beats pseudo-random clustering there, so points come
//! from an additive Kronecker sequence based on the generalized golden
//! ratio (the positive root of `x^(d+1) = x + 1`).  The seed only shifts
//! the sequence's starting phase, keeping every run deterministic and
//! platform-independent.

/// Number of sampled points and sequence phase used by a diagnostic run.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SamplePlan {
    pub count: usize,
    pub seed: u64,
}

impl SamplePlan {
    pub fn new(count: usize, seed: u64) -> SamplePlan {
        SamplePlan { count, seed }
    }
}

/// Points of the shifted Kronecker sequence, mapped into the closed box.
pub fn sample_box(domain: &[(f64, f64)], plan: SamplePlan) -> Vec<Vec<f64>> {
    let dim = domain.len();
    let alphas = kronecker_alphas(dim);
    let mut offsets = Vec::with_capacity(dim);
    let mut state = plan.seed.wrapping_add(0x9e37_79b9_7f4a_7c15);
    for _ in 0..dim {
        offsets.push(unit_from_bits(splitmix64(&mut state)));
    }
    (0..plan.count)
        .map(|k| {
            (0..dim)
                .map(|j| {
                    let u = (offsets[j] + (k as f64 + 1.0) * alphas[j]).fract();
                    let (a, b) = domain[j];
                    a + u * (b - a)
                })
                .collect()
        })
        .collect()
}

/// `alpha_j = phi_d^-(j+1)` where `phi_d` solves `x^(d+1) = x + 1`.
fn kronecker_alphas(dim: usize) -> Vec<f64> {
    let mut phi = 1.3f64;
    // Newton iteration; converges in a handful of steps for every d >= 1.
    for _ in 0..64 {
        let p = dim as f64 + 1.0;
        let f = phi.powf(p) - phi - 1.0;
        let df = p * phi.powf(p - 1.0) - 1.0;
        let next = phi - f / df;
        if (next - phi).abs() < 1e-15 {
            phi = next;
            break;
        }
        phi = next;
    }
    (1..=dim).map(|j| phi.powi(-(j as i32)).fract()).collect()
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn unit_from_bits(bits: u64) -> f64 {
    // Top 53 bits -> [0, 1).
    (bits >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}
