//! Exact samplers for the catalogue families and a systematic-scan Gibbs
//! sampler over conditional specifications.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Beta, Binomial, Distribution, Gamma, Poisson};

use crate::compat::{CarSpec, RandomCoeffSpec};
use crate::dists::{p_from_theta, CountDistribution};
use crate::error::{Error, Result};
use crate::families::FamilyDescriptor;
use crate::joint::JointPmf;

/// Any coordinate above this aborts a Gibbs run.
pub const DIVERGENCE_CAP: u64 = 1_000_000;
/// Minimum visits for a configuration to enter the diagnostic.
pub const MIN_VISITS: usize = 1000;

/// Row-major draws, one per row.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SampleMatrix {
    dim: usize,
    data: Vec<u64>,
}

impl SampleMatrix {
    pub fn new(dim: usize, data: Vec<u64>) -> Result<Self> {
        if dim == 0 || data.len() % dim != 0 {
            return Err(Error::DimensionMismatch(format!("{} values do not fill rows of width {dim}", data.len())));
        }
        Ok(Self { dim, data })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn row(&self, t: usize) -> &[u64] {
        &self.data[t * self.dim..(t + 1) * self.dim]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[u64]> {
        self.data.chunks_exact(self.dim)
    }

    pub fn data(&self) -> &[u64] {
        &self.data
    }

    pub fn mean(&self, i: usize) -> f64 {
        self.rows().map(|r| r[i] as f64).sum::<f64>() / self.len() as f64
    }

    /// Unbiased sample covariance of coordinates `i` and `j`.
    pub fn covariance(&self, i: usize, j: usize) -> f64 {
        let (mi, mj) = (self.mean(i), self.mean(j));
        let s: f64 = self.rows().map(|r| (r[i] as f64 - mi) * (r[j] as f64 - mj)).sum();
        s / (self.len() as f64 - 1.0)
    }

    /// Relative frequencies on `{0..bound}^n`; mass outside is dropped.
    pub fn empirical_pmf(&self, bound: usize) -> Result<JointPmf<f64>> {
        let side = bound + 1;
        let mut counts = vec![0.0; side.pow(self.dim as u32)];
        let total = self.len() as f64;
        'rows: for r in self.rows() {
            let mut idx = 0;
            for &v in r {
                if v as usize > bound {
                    continue 'rows;
                }
                idx = idx * side + v as usize;
            }
            counts[idx] += 1.0;
        }
        for c in &mut counts {
            *c /= total;
        }
        JointPmf::new(self.dim, bound, counts)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(self.data.len() * 3);
        for r in self.rows() {
            let line: Vec<String> = r.iter().map(u64::to_string).collect();
            out.push_str(&line.join(","));
            out.push('\n');
        }
        out
    }
}

fn poisson<R: Rng + ?Sized>(lambda: f64, rng: &mut R) -> u64 {
    if lambda <= 0.0 {
        return 0;
    }
    Poisson::new(lambda).expect("positive finite rate").sample(rng) as u64
}

fn gamma<R: Rng + ?Sized>(shape: f64, scale: f64, rng: &mut R) -> f64 {
    Gamma::new(shape, scale).expect("positive gamma parameters").sample(rng)
}

/// `NB(r, p)` as a gamma-mixed Poisson.
fn neg_binomial<R: Rng + ?Sized>(r: f64, p: f64, rng: &mut R) -> u64 {
    if r <= 0.0 || p >= 1.0 {
        return 0;
    }
    poisson(gamma(r, (1.0 - p) / p, rng), rng)
}

fn binomial<R: Rng + ?Sized>(n: u64, p: f64, rng: &mut R) -> u64 {
    Binomial::new(n, p.clamp(0.0, 1.0)).expect("probability in [0, 1]").sample(rng)
}

fn beta<R: Rng + ?Sized>(a: f64, b: f64, rng: &mut R) -> f64 {
    Beta::new(a, b).expect("positive beta parameters").sample(rng)
}

/// One draw from `d`.
pub fn sample_distribution<R: Rng + ?Sized>(d: &CountDistribution, rng: &mut R) -> Result<u64> {
    d.validate()?;
    Ok(draw(d, rng))
}

fn draw<R: Rng + ?Sized>(d: &CountDistribution, rng: &mut R) -> u64 {
    use CountDistribution::*;
    match *d {
        Poisson { lambda } => poisson(lambda, rng),
        NegBinomial { r, p } => neg_binomial(r, p, rng),
        Geometric { p } => neg_binomial(1.0, p, rng),
        Bernoulli { p } => rng.random_bool(p) as u64,
        ThetaRatio {
            theta_num,
            theta_den,
        } => {
            let geo = neg_binomial(1.0, p_from_theta(theta_den), rng);
            if theta_num >= 0.0 {
                if rng.random_bool(theta_num / theta_den) {
                    0
                } else {
                    geo
                }
            } else {
                rng.random_bool(-theta_num) as u64 + geo
            }
        }
        BetaNB { r, alpha1, alpha2 } => {
            let p = beta(alpha1, alpha2, rng);
            neg_binomial(r, p, rng)
        }
        Degenerate { k } => k,
    }
}

/// Sum of `count` independent draws from `d`.
pub fn sample_sum<R: Rng + ?Sized>(d: &CountDistribution, count: u64, rng: &mut R) -> Result<u64> {
    d.validate()?;
    Ok(draw_sum(d, count, rng))
}

fn draw_sum<R: Rng + ?Sized>(d: &CountDistribution, count: u64, rng: &mut R) -> u64 {
    use CountDistribution::*;
    if count == 0 {
        return 0;
    }
    let n = count as f64;
    match *d {
        Poisson { lambda } => poisson(n * lambda, rng),
        NegBinomial { r, p } => neg_binomial(n * r, p, rng),
        Geometric { p } => neg_binomial(n, p, rng),
        Bernoulli { p } => binomial(count, p, rng),
        ThetaRatio {
            theta_num,
            theta_den,
        } => {
            let p = p_from_theta(theta_den);
            if theta_num >= 0.0 {
                let active = binomial(count, 1.0 - theta_num / theta_den, rng);
                neg_binomial(active as f64, p, rng)
            } else {
                binomial(count, -theta_num, rng) + neg_binomial(n, p, rng)
            }
        }
        BetaNB { .. } => (0..count).map(|_| draw(d, rng)).sum(),
        Degenerate { k } => k * count,
    }
}

fn family_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `count` i.i.d. draws through the family's stochastic representation.
pub fn sample_family(descriptor: &FamilyDescriptor, count: usize, seed: u64) -> Result<SampleMatrix> {
    descriptor.validate()?;
    let dim = descriptor.dim();
    let mut rng = family_rng(seed);
    let mut data = Vec::with_capacity(count * dim);
    for _ in 0..count {
        draw_family(descriptor, &mut rng, &mut data);
    }
    SampleMatrix::new(dim, data)
}

fn draw_family<R: Rng + ?Sized>(descriptor: &FamilyDescriptor, rng: &mut R, out: &mut Vec<u64>) {
    use FamilyDescriptor::*;
    match descriptor {
        IndependentPoisson { lambda_x, lambda_y } => {
            out.push(poisson(*lambda_x, rng));
            out.push(poisson(*lambda_y, rng));
        }
        TrivariatePoisson {
            lambda0,
            lambda1,
            lambda2,
        } => {
            let z = poisson(*lambda0, rng);
            out.push(z + poisson(*lambda1, rng));
            out.push(z + poisson(*lambda2, rng));
        }
        PoissonGamma { alpha, beta, lambdas } => {
            let g = gamma(*alpha, 1.0 / beta, rng);
            out.extend(lambdas.iter().map(|l| poisson(l * g, rng)));
        }
        Theta(p) => {
            let x = neg_binomial(p.delta, p_from_theta(p.coef_u()), rng);
            let w = CountDistribution::ThetaRatio {
                theta_num: p.theta4,
                theta_den: p.theta3,
            };
            let y = draw_sum(&w, x, rng) + neg_binomial(p.delta, p_from_theta(p.theta3), rng);
            out.push(x);
            out.push(y);
        }
        TrivariateNb {
            alpha,
            beta1,
            beta2,
            theta,
        } => {
            let z = neg_binomial(*alpha, *theta, rng);
            out.push(z + neg_binomial(*beta1, *theta, rng));
            out.push(z + neg_binomial(*beta2, *theta, rng));
        }
        BetaNb { r1, r2, alpha1, alpha2 } => {
            let p = beta(*alpha1, *alpha2, rng);
            out.push(neg_binomial(*r1, p, rng));
            out.push(neg_binomial(*r2, p, rng));
        }
        MultinomialMix { size, p } => {
            let [z1, _, z3] = multinomial3(*size as u64, p, rng);
            out.push(z1);
            out.push(z1 + z3);
        }
        JointMix { size, p } => out.extend(multinomial3(*size as u64, p, rng)),
        MarkovChain(m) => {
            let n = neg_binomial(m.delta, m.p0, rng);
            let r = m.delta + n as f64;
            out.push(neg_binomial(r, m.p1, rng));
            out.push(n);
            out.push(neg_binomial(r, m.p2, rng));
        }
    }
}

fn multinomial3<R: Rng + ?Sized>(n: u64, p: &[f64; 3], rng: &mut R) -> [u64; 3] {
    let z1 = binomial(n, p[0], rng);
    let z2 = binomial(n - z1, p[1] / (p[1] + p[2]), rng);
    [z1, z2, n - z1 - z2]
}

/// Conditional specification driven by a Gibbs sampler.
#[derive(Debug, Clone, PartialEq)]
pub enum ConditionalSpec {
    /// `X | Y ~ Pois(cY + d)`, `Y | X ~ Pois(aX + b)`.
    LinearPoisson { a: f64, b: f64, c: f64, d: f64 },
    Car(CarSpec),
    RandomCoeff(RandomCoeffSpec),
}

impl ConditionalSpec {
    pub fn dim(&self) -> usize {
        match self {
            ConditionalSpec::LinearPoisson { .. } => 2,
            ConditionalSpec::Car(s) => s.dim(),
            ConditionalSpec::RandomCoeff(s) => s.dim(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            ConditionalSpec::LinearPoisson { a, b, c, d } => {
                for (name, v) in [("a", a), ("b", b), ("c", c), ("d", d)] {
                    if !(*v >= 0.0 && v.is_finite()) {
                        return Err(Error::domain(name, *v, ">= 0"));
                    }
                }
                Ok(())
            }
            ConditionalSpec::Car(s) => s.validate(),
            ConditionalSpec::RandomCoeff(_) => Ok(()),
        }
    }

    fn linear_rate(&self, i: usize, given: &[usize]) -> Option<f64> {
        match *self {
            ConditionalSpec::LinearPoisson { a, b, c, d } => Some(if i == 0 {
                c * given[0] as f64 + d
            } else {
                a * given[0] as f64 + b
            }),
            _ => None,
        }
    }

    /// Postulated `E[X_i | rest]`, the others in increasing index order.
    pub fn conditional_mean(&self, i: usize, given: &[usize]) -> Result<f64> {
        match self {
            ConditionalSpec::LinearPoisson { .. } => Ok(self.linear_rate(i, given).expect("linear spec")),
            ConditionalSpec::Car(s) => s.conditional_mean(i, given),
            ConditionalSpec::RandomCoeff(s) => s.conditional_mean(i, given),
        }
    }

    /// Postulated conditional pmf of `X_i` on `{0..order}`.
    pub fn conditional_pmf(&self, i: usize, given: &[usize], order: usize) -> Result<Vec<f64>> {
        match self {
            ConditionalSpec::LinearPoisson { .. } => {
                let lambda = self.linear_rate(i, given).expect("linear spec");
                if lambda == 0.0 {
                    let mut v = vec![0.0; order + 1];
                    v[0] = 1.0;
                    return Ok(v);
                }
                let d = CountDistribution::Poisson { lambda };
                (0..=order as u64).map(|k| d.pmf(k)).collect()
            }
            ConditionalSpec::Car(s) => s.conditional_pmf(i, given, order),
            ConditionalSpec::RandomCoeff(s) => s.conditional_pmf(i, given, order),
        }
    }

    fn draw_coordinate<R: Rng + ?Sized>(&self, i: usize, state: &[u64], rng: &mut R) -> u64 {
        let others = (0..state.len()).filter(move |&j| j != i);
        match self {
            ConditionalSpec::LinearPoisson { a, b, c, d } => {
                let o = state[1 - i] as f64;
                let lambda = if i == 0 { c * o + d } else { a * o + b };
                poisson(lambda, rng)
            }
            ConditionalSpec::Car(s) => {
                others.map(|j| draw_sum(&s.thinning(i, j), state[j], rng)).sum::<u64>() + draw(&s.innovation(i), rng)
            }
            ConditionalSpec::RandomCoeff(s) => {
                others
                    .map(|j| {
                        let (a, b) = s.beta(i, j);
                        let p = beta(a, b, rng);
                        binomial(state[j], p, rng)
                    })
                    .sum::<u64>()
                    + draw(&s.innovation(i), rng)
            }
        }
    }
}

/// Systematic-scan Gibbs chain started at the origin; records the state after
/// each post-burnin sweep. Coordinate `i` draws from its own generator stream.
pub fn gibbs_run(spec: &ConditionalSpec, sweeps: usize, burnin: usize, seed: u64) -> Result<SampleMatrix> {
    gibbs_chain(spec, sweeps, burnin, seed, 0)
}

/// Independent chains run in parallel; chain `c` uses streams `c·n + i`.
/// Results are returned in chain order.
pub fn gibbs_chains(spec: &ConditionalSpec, chains: usize, sweeps: usize, burnin: usize, seed: u64) -> Result<Vec<SampleMatrix>> {
    std::thread::scope(|scope| {
        let handles: Vec<_> = (0..chains)
            .map(|c| scope.spawn(move || gibbs_chain(spec, sweeps, burnin, seed, c)))
            .collect();
        handles.into_iter().map(|h| h.join().expect("chain thread panicked")).collect()
    })
}

fn gibbs_chain(spec: &ConditionalSpec, sweeps: usize, burnin: usize, seed: u64, chain: usize) -> Result<SampleMatrix> {
    spec.validate()?;
    let n = spec.dim();
    let mut rngs: Vec<ChaCha8Rng> = (0..n)
        .map(|i| {
            let mut r = ChaCha8Rng::seed_from_u64(seed);
            r.set_stream((chain * n + i) as u64);
            r
        })
        .collect();
    let mut state = vec![0u64; n];
    let mut data = Vec::with_capacity(sweeps.saturating_sub(burnin) * n);
    for sweep in 0..sweeps {
        for i in 0..n {
            let v = spec.draw_coordinate(i, &state, &mut rngs[i]);
            if v > DIVERGENCE_CAP {
                return Err(Error::DivergenceDetected {
                    sweep,
                    coordinate: i,
                    value: v,
                });
            }
            state[i] = v;
        }
        if sweep >= burnin {
            data.extend_from_slice(&state);
        }
    }
    SampleMatrix::new(n, data)
}

/// Chain estimate of `E[X_0 | rest = config]` against the postulated mean.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagnosticRow {
    pub config: Vec<usize>,
    pub visits: usize,
    pub estimate: f64,
    pub postulated: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GibbsDiagnostic {
    pub sweeps: usize,
    pub burnin: usize,
    pub rows: Vec<DiagnosticRow>,
    /// `max |estimate - postulated|` over the rows.
    pub discrepancy: f64,
}

impl GibbsDiagnostic {
    pub fn worst(&self) -> Option<&DiagnosticRow> {
        self.rows
            .iter()
            .max_by(|a, b| (a.estimate - a.postulated).abs().total_cmp(&(b.estimate - b.postulated).abs()))
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("config,visits,estimate,postulated\n");
        for r in &self.rows {
            let cfg: Vec<String> = r.config.iter().map(usize::to_string).collect();
            out.push_str(&format!("{},{},{},{}\n", cfg.join(" "), r.visits, r.estimate, r.postulated));
        }
        out
    }
}

/// Default burn-in for a diagnostic run of `sweeps` sweeps.
pub fn default_burnin(sweeps: usize) -> usize {
    (sweeps / 100).max(100).min(sweeps / 2)
}

/// Compares chain estimates of `E[X_0 | X_1..X_{n-1}]` with the spec's
/// postulated conditional mean on every configuration visited at least
/// [`MIN_VISITS`] times.
///
/// The estimate conditions the last-updated coordinate through its postulated
/// conditional pmf: with `h(x0, mid)` the chain histogram of the other
/// coordinates,
/// `E[X_0 | mid, last] ≈ Σ x0 h(x0, mid) ℓ(last | x0, mid) / Σ h(x0, mid) ℓ(last | x0, mid)`.
pub fn gibbs_compat_diagnostic(spec: &ConditionalSpec, sweeps: usize, seed: u64) -> Result<GibbsDiagnostic> {
    let burnin = default_burnin(sweeps);
    let chain = gibbs_run(spec, sweeps, burnin, seed)?;
    let n = chain.dim();
    let last = n - 1;

    let mut visits: HashMap<&[u64], usize> = HashMap::new();
    let mut hist: HashMap<(u64, &[u64]), usize> = HashMap::new();
    let mut max_last = 0u64;
    for r in chain.rows() {
        *visits.entry(&r[1..]).or_default() += 1;
        *hist.entry((r[0], &r[1..last])).or_default() += 1;
        max_last = max_last.max(r[last]);
    }
    let mut configs: Vec<&[u64]> = visits.iter().filter(|(_, &v)| v >= MIN_VISITS).map(|(k, _)| *k).collect();
    if configs.is_empty() {
        return Err(Error::InconclusiveDiagnostic { min_visits: MIN_VISITS });
    }
    configs.sort();

    let mut by_mid: HashMap<&[u64], Vec<(u64, usize)>> = HashMap::new();
    for (&(x0, mid), &count) in &hist {
        by_mid.entry(mid).or_default().push((x0, count));
    }
    let order = max_last as usize;
    let mut cache: HashMap<Vec<usize>, Vec<f64>> = HashMap::new();
    let mut rows = Vec::with_capacity(configs.len());
    for cfg in configs {
        let (mid, z_last) = (&cfg[..cfg.len() - 1], cfg[cfg.len() - 1] as usize);
        let (mut num, mut den) = (0.0, 0.0);
        for &(x0, count) in by_mid.get(mid).map(Vec::as_slice).unwrap_or_default() {
            let mut given = Vec::with_capacity(last);
            given.push(x0 as usize);
            given.extend(mid.iter().map(|&v| v as usize));
            let pmf = match cache.get(&given) {
                Some(p) => p,
                None => {
                    let p = spec.conditional_pmf(last, &given, order)?;
                    cache.entry(given).or_insert(p)
                }
            };
            let w = count as f64 * pmf[z_last];
            num += w * x0 as f64;
            den += w;
        }
        let config: Vec<usize> = cfg.iter().map(|&v| v as usize).collect();
        let postulated = spec.conditional_mean(0, &config)?;
        rows.push(DiagnosticRow {
            visits: visits[cfg],
            estimate: if den > 0.0 { num / den } else { f64::NAN },
            postulated,
            config,
        });
    }
    let discrepancy = rows
        .iter()
        .map(|r| (r.estimate - r.postulated).abs())
        .fold(0.0, f64::max);
    Ok(GibbsDiagnostic {
        sweeps,
        burnin,
        rows,
        discrepancy,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::ThetaFamilyParams;

    fn empirical_mean<R: Rng>(d: CountDistribution, n: usize, rng: &mut R) -> f64 {
        (0..n).map(|_| sample_distribution(&d, rng).unwrap() as f64).sum::<f64>() / n as f64
    }

    #[test]
    fn distribution_means() {
        let mut rng = family_rng(7);
        let laws = [
            CountDistribution::Poisson { lambda: 2.5 },
            CountDistribution::NegBinomial { r: 1.7, p: 0.4 },
            CountDistribution::Geometric { p: 0.3 },
            CountDistribution::Bernoulli { p: 0.2 },
            CountDistribution::ThetaRatio {
                theta_num: 0.5,
                theta_den: 2.0,
            },
            CountDistribution::ThetaRatio {
                theta_num: -0.4,
                theta_den: 1.0,
            },
            CountDistribution::BetaNB {
                r: 2.0,
                alpha1: 5.0,
                alpha2: 2.0,
            },
        ];
        for d in laws {
            let m = empirical_mean(d, 200_000, &mut rng);
            let sd = d.std_dev().unwrap();
            assert!((m - d.mean().unwrap()).abs() < 5.0 * sd / (200_000f64).sqrt(), "{d}: {m}");
        }
    }

    #[test]
    fn sums_match_repeated_draws() {
        let mut rng = family_rng(3);
        let d = CountDistribution::ThetaRatio {
            theta_num: 0.3,
            theta_den: 1.5,
        };
        let n = 100_000;
        let m = (0..n).map(|_| sample_sum(&d, 4, &mut rng).unwrap() as f64).sum::<f64>() / n as f64;
        assert!((m - 4.0 * 1.2).abs() < 0.05, "{m}");
        assert_eq!(sample_sum(&CountDistribution::Degenerate { k: 3 }, 5, &mut rng).unwrap(), 15);
    }

    #[test]
    fn deterministic_given_seed() {
        let d = FamilyDescriptor::TrivariatePoisson {
            lambda0: 1.0,
            lambda1: 2.0,
            lambda2: 3.0,
        };
        assert_eq!(sample_family(&d, 500, 11).unwrap(), sample_family(&d, 500, 11).unwrap());
        assert_ne!(sample_family(&d, 500, 11).unwrap(), sample_family(&d, 500, 12).unwrap());
    }

    #[test]
    fn multinomial_mix_is_ordered() {
        let d = FamilyDescriptor::MultinomialMix {
            size: 10,
            p: [0.2, 0.3, 0.5],
        };
        let s = sample_family(&d, 10_000, 1).unwrap();
        assert!(s.rows().all(|r| r[0] <= r[1] && r[1] <= 10));
    }

    #[test]
    fn theta_sampler_matches_pmf() {
        let p = ThetaFamilyParams::new(2.0, 0.5, 0.0, 0.5, 0.0).unwrap();
        let d = FamilyDescriptor::Theta(p);
        let pmf = d.build_pmf(40).unwrap();
        let emp = sample_family(&d, 200_000, 5).unwrap().empirical_pmf(40).unwrap();
        assert!(pmf.total_variation(&emp).unwrap() < 0.01);
    }

    #[test]
    fn empirical_pmf_and_csv() {
        let s = SampleMatrix::new(2, vec![0, 1, 1, 1, 5, 0]).unwrap();
        let e = s.empirical_pmf(2).unwrap();
        assert!((e.get2(1, 1) - 1.0 / 3.0).abs() < 1e-15);
        assert!((e.captured_mass() - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(s.to_csv(), "0,1\n1,1\n5,0\n");
        assert!(SampleMatrix::new(2, vec![1, 2, 3]).is_err());
    }

    #[test]
    fn independent_linear_poisson_is_exact() {
        let spec = ConditionalSpec::LinearPoisson {
            a: 0.0,
            b: 2.0,
            c: 0.0,
            d: 1.0,
        };
        let s = gibbs_run(&spec, 100_000, 0, 9).unwrap();
        assert!((s.mean(0) - 1.0).abs() < 0.02 && (s.mean(1) - 2.0).abs() < 0.03);
        assert!(s.covariance(0, 1).abs() < 0.02);
    }

    #[test]
    fn supercritical_chain_diverges() {
        let spec = ConditionalSpec::LinearPoisson {
            a: 1.2,
            b: 1.0,
            c: 1.2,
            d: 1.0,
        };
        assert!(matches!(gibbs_run(&spec, 100_000, 0, 1), Err(Error::DivergenceDetected { .. })));
    }

    #[test]
    fn chains_are_reproducible_and_distinct() {
        let spec = ConditionalSpec::LinearPoisson {
            a: 0.3,
            b: 1.0,
            c: 0.3,
            d: 1.0,
        };
        let a = gibbs_chains(&spec, 3, 1000, 10, 4).unwrap();
        let b = gibbs_chains(&spec, 3, 1000, 10, 4).unwrap();
        assert_eq!(a, b);
        assert_eq!(a[0], gibbs_run(&spec, 1000, 10, 4).unwrap());
        assert_ne!(a[0], a[1]);
    }

    #[test]
    fn diagnostic_needs_visits() {
        let spec = ConditionalSpec::LinearPoisson {
            a: 0.0,
            b: 1.0,
            c: 0.0,
            d: 1.0,
        };
        assert!(matches!(
            gibbs_compat_diagnostic(&spec, 500, 2),
            Err(Error::InconclusiveDiagnostic { .. })
        ));
        let r = gibbs_compat_diagnostic(&spec, 50_000, 2).unwrap();
        assert!(r.discrepancy < 0.05, "{}", r.discrepancy);
    }
}
