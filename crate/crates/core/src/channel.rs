//! Rayleigh fading between the IRS and the receiver, propagation through
//! the surface, and the per-antenna signal decomposition.

use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::config::ValidConfig;
use crate::error::{Error, Result};
use crate::tx::reflector_phases;

/// Private random stream of one trial. ChaCha's 2^64 streams are indexed by
/// the trial number, so trials are independent of scheduling.
pub fn trial_rng(seed: u64, trial_index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial_index);
    rng
}

/// Circularly-symmetric complex Gaussian sample with unit variance.
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * FRAC_1_SQRT_2
}

/// N_r x N channel `h[m][n] = beta[m][n] * exp(j psi[m][n])`, row-major.
/// Row and column indices here are 0-based.
#[derive(Clone, Debug, PartialEq)]
pub struct ChannelMatrix {
    n_rx: usize,
    n_refl: usize,
    entries: Vec<Complex64>,
}

impl ChannelMatrix {
    pub fn from_entries(n_rx: usize, n_refl: usize, entries: Vec<Complex64>) -> Result<Self> {
        if entries.len() != n_rx * n_refl {
            return Err(Error::Dimension {
                what: "channel entries",
                expected: n_rx * n_refl,
                got: entries.len(),
            });
        }
        Ok(ChannelMatrix {
            n_rx,
            n_refl,
            entries,
        })
    }

    pub fn from_fn(n_rx: usize, n_refl: usize, f: impl Fn(usize, usize) -> Complex64) -> Self {
        let entries = (0..n_rx)
            .flat_map(|m| (0..n_refl).map(move |n| (m, n)))
            .map(|(m, n)| f(m, n))
            .collect();
        ChannelMatrix {
            n_rx,
            n_refl,
            entries,
        }
    }

    pub fn n_rx(&self) -> usize {
        self.n_rx
    }

    pub fn n_refl(&self) -> usize {
        self.n_refl
    }

    pub fn get(&self, m: usize, n: usize) -> Complex64 {
        self.entries[m * self.n_refl + n]
    }

    pub fn row(&self, m: usize) -> &[Complex64] {
        &self.entries[m * self.n_refl..(m + 1) * self.n_refl]
    }

    /// Row of a 1-based antenna index.
    pub fn antenna_row(&self, antenna: usize) -> &[Complex64] {
        self.row(antenna - 1)
    }

    pub fn beta(&self, m: usize, n: usize) -> f64 {
        self.get(m, n).norm()
    }

    pub fn psi(&self, m: usize, n: usize) -> f64 {
        self.get(m, n).arg()
    }

    /// Effective gain of antenna row `m` through the surface, `h_m . theta`.
    pub fn gain(&self, m: usize, theta: &[Complex64]) -> Complex64 {
        self.row(m).iter().zip(theta).map(|(h, t)| h * t).sum()
    }

    /// `H theta` for every receive antenna.
    pub fn gains(&self, theta: &[Complex64]) -> Vec<Complex64> {
        (0..self.n_rx).map(|m| self.gain(m, theta)).collect()
    }
}

pub fn sample_channel<R: Rng + ?Sized>(n_rx: usize, n_refl: usize, rng: &mut R) -> ChannelMatrix {
    let entries = (0..n_rx * n_refl).map(|_| complex_gaussian(rng)).collect();
    ChannelMatrix {
        n_rx,
        n_refl,
        entries,
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReceivedVector {
    pub samples: Vec<Complex64>,
    pub noise_sigma: f64,
}

impl ReceivedVector {
    /// `|y_m|^2` for every antenna.
    pub fn powers(&self) -> Vec<f64> {
        self.samples.iter().map(|y| y.norm_sqr()).collect()
    }
}

/// `y = H theta x + n` with `n` complex Gaussian of variance `noise_sigma^2`.
/// No random numbers are consumed when `noise_sigma` is zero.
pub fn propagate<R: Rng + ?Sized>(
    channel: &ChannelMatrix,
    theta: &[Complex64],
    x: Complex64,
    noise_sigma: f64,
    rng: &mut R,
) -> Result<ReceivedVector> {
    if theta.len() != channel.n_refl {
        return Err(Error::Dimension {
            what: "reflector phase vector",
            expected: channel.n_refl,
            got: theta.len(),
        });
    }
    let mut samples: Vec<Complex64> = channel.gains(theta).into_iter().map(|g| g * x).collect();
    if noise_sigma > 0.0 {
        for y in &mut samples {
            *y += complex_gaussian(rng) * noise_sigma;
        }
    }
    Ok(ReceivedVector {
        samples,
        noise_sigma,
    })
}

/// Noiseless sample at one selected antenna split by reflector block.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Decomposition {
    /// Reflectors dedicated to this antenna.
    pub constructive: Complex64,
    /// Reflectors dedicated to the other selected antennas.
    pub nonconstructive: Complex64,
    /// Reflectors past `N_p * delta`, when `N_p` does not divide `N`.
    pub leftover: Complex64,
}

impl Decomposition {
    pub fn total(&self) -> Complex64 {
        self.constructive + self.nonconstructive + self.leftover
    }
}

/// Splits `(h_{l_p[slot]} . theta) x` into dedicated-block, other-block and
/// leftover contributions. `slot` is 1-based.
pub fn decompose_received(
    channel: &ChannelMatrix,
    theta: &[Complex64],
    x: Complex64,
    sel: &[usize],
    slot: usize,
    delta: usize,
) -> Result<Decomposition> {
    if slot == 0 || slot > sel.len() {
        return Err(Error::OutOfRange {
            what: "slot",
            value: slot as u64,
            limit: sel.len() as u64,
        });
    }
    if theta.len() != channel.n_refl {
        return Err(Error::Dimension {
            what: "reflector phase vector",
            expected: channel.n_refl,
            got: theta.len(),
        });
    }
    let row = channel.antenna_row(sel[slot - 1]);
    let block_sum = |range: std::ops::Range<usize>| -> Complex64 {
        row[range.clone()]
            .iter()
            .zip(&theta[range])
            .map(|(h, t)| h * t)
            .sum()
    };
    let own = (slot - 1) * delta..slot * delta;
    let constructive = block_sum(own.clone());
    let nonconstructive: Complex64 = (0..sel.len())
        .filter(|&q| q != slot - 1)
        .map(|q| block_sum(q * delta..(q + 1) * delta))
        .sum();
    let leftover = block_sum(sel.len() * delta..channel.n_refl);
    Ok(Decomposition {
        constructive: constructive * x,
        nonconstructive: nonconstructive * x,
        leftover: leftover * x,
    })
}

/// Instantaneous SNR of the phase-aligned configuration: per selected
/// antenna, the dedicated-block power plus the power of everything else the
/// surface adds there (other blocks and leftover reflectors), scaled by
/// `E_s / sigma^2`.
pub fn snr_aligned(channel: &ChannelMatrix, sel: &[usize], cfg: &ValidConfig) -> Result<f64> {
    if cfg.noise_sigma == 0.0 {
        return Err(Error::Noiseless);
    }
    let theta = selected_phases(channel, sel, cfg.delta());
    let mut acc = 0.0;
    for slot in 1..=sel.len() {
        let parts = decompose_received(channel, &theta, Complex64::new(1.0, 0.0), sel, slot, cfg.delta())?;
        acc += parts.constructive.norm_sqr() + (parts.nonconstructive + parts.leftover).norm_sqr();
    }
    Ok(cfg.sym_energy * acc / (cfg.noise_sigma * cfg.noise_sigma))
}

/// Reference SNR without phase alignment:
/// `E_s N_p |sum_q sum_{n in block q} beta e^{-j psi}|^2 / sigma^2`.
pub fn snr_unaligned(channel: &ChannelMatrix, sel: &[usize], cfg: &ValidConfig) -> Result<f64> {
    if cfg.noise_sigma == 0.0 {
        return Err(Error::Noiseless);
    }
    let delta = cfg.delta();
    let mut sum = Complex64::new(0.0, 0.0);
    for (q, &antenna) in sel.iter().enumerate() {
        let m = antenna - 1;
        for n in q * delta..(q + 1) * delta {
            sum += Complex64::from_polar(channel.beta(m, n), -channel.psi(m, n));
        }
    }
    Ok(cfg.sym_energy * sel.len() as f64 * sum.norm_sqr() / (cfg.noise_sigma * cfg.noise_sigma))
}

fn selected_phases(channel: &ChannelMatrix, sel: &[usize], delta: usize) -> Vec<Complex64> {
    let rows: Vec<&[Complex64]> = sel.iter().map(|&a| channel.antenna_row(a)).collect();
    reflector_phases(&rows, delta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::SystemConfig;
    use std::f64::consts::PI;

    #[test]
    fn channel_moments() {
        let mut rng = trial_rng(7, 0);
        let h = sample_channel(10, 10_000, &mut rng);
        let n = h.entries.len() as f64;
        let mean: Complex64 = h.entries.iter().sum::<Complex64>() / n;
        let var = h.entries.iter().map(|e| e.norm_sqr()).sum::<f64>() / n;
        let mean_beta = h.entries.iter().map(|e| e.norm()).sum::<f64>() / n;
        assert!(mean.norm() < 0.02, "mean {mean}");
        assert!((var - 1.0).abs() < 0.02, "variance {var}");
        assert!((mean_beta - PI.sqrt() / 2.0).abs() < 0.01, "E[beta] {mean_beta}");
        let re_var = h.entries.iter().map(|e| e.re * e.re).sum::<f64>() / n;
        assert!((re_var - 0.5).abs() < 0.01);
    }

    #[test]
    fn polar_views_reconstruct() {
        let h = sample_channel(4, 8, &mut trial_rng(1, 2));
        for m in 0..4 {
            for n in 0..8 {
                let r = Complex64::from_polar(h.beta(m, n), h.psi(m, n));
                assert!((r - h.get(m, n)).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn propagate_single_tap() {
        let h = ChannelMatrix::from_entries(1, 1, vec![Complex64::from_polar(2.0, PI / 3.0)]).unwrap();
        let theta = [Complex64::from_polar(1.0, -PI / 3.0)];
        let y = propagate(&h, &theta, Complex64::new(1.0, 0.0), 0.0, &mut trial_rng(0, 0)).unwrap();
        assert!((y.samples[0] - Complex64::new(2.0, 0.0)).norm() < 1e-12);

        let zero = propagate(&h, &theta, Complex64::new(0.0, 0.0), 0.0, &mut trial_rng(0, 0)).unwrap();
        assert_eq!(zero.samples, vec![Complex64::new(0.0, 0.0)]);
        assert!(propagate(&h, &[], Complex64::new(1.0, 0.0), 0.0, &mut trial_rng(0, 0)).is_err());
    }

    #[test]
    fn noise_variance() {
        let sigma = 0.3;
        let h = ChannelMatrix::from_fn(1000, 2, |m, n| Complex64::new(m as f64, n as f64));
        let theta = vec![Complex64::new(1.0, 0.0); 2];
        let x = Complex64::new(0.5, -0.5);
        let mut acc = 0.0;
        let mut count = 0;
        let mut rng = trial_rng(3, 9);
        for _ in 0..100 {
            let y = propagate(&h, &theta, x, sigma, &mut rng).unwrap();
            for (m, s) in y.samples.iter().enumerate() {
                acc += (s - h.gain(m, &theta) * x).norm_sqr();
                count += 1;
            }
        }
        let var = acc / count as f64;
        assert!((var / (sigma * sigma) - 1.0).abs() < 0.02, "variance {var}");
    }

    #[test]
    fn single_selection_has_no_interference() {
        let h = sample_channel(3, 16, &mut trial_rng(5, 5));
        let sel = [2];
        let theta = selected_phases(&h, &sel, 16);
        let x = Complex64::new(0.3, 0.7);
        let d = decompose_received(&h, &theta, x, &sel, 1, 16).unwrap();
        assert_eq!(d.nonconstructive, Complex64::new(0.0, 0.0));
        let beta_sum: f64 = (0..16).map(|n| h.beta(1, n)).sum();
        assert!((d.constructive - x * beta_sum).norm() < 1e-9);
        assert!(decompose_received(&h, &theta, x, &sel, 2, 16).is_err());
        assert!(decompose_received(&h, &theta, x, &sel, 0, 16).is_err());
    }

    #[test]
    fn zeroed_other_blocks_give_zero_interference() {
        // Antenna 1 sees nothing from the block dedicated to antenna 2.
        let base = sample_channel(3, 8, &mut trial_rng(2, 2));
        let h = ChannelMatrix::from_fn(3, 8, |m, n| if m == 0 && n >= 4 { Complex64::new(0.0, 0.0) } else { base.get(m, n) });
        let sel = [1, 3];
        let theta = selected_phases(&h, &sel, 4);
        let d = decompose_received(&h, &theta, Complex64::new(1.0, 0.0), &sel, 1, 4).unwrap();
        assert_eq!(d.nonconstructive, Complex64::new(0.0, 0.0));
    }

    #[test]
    fn decomposition_reconstructs_received_sample() {
        for (n_refl, n_sel) in [(64, 2), (67, 2), (10, 3)] {
            for trial in 0..200 {
                let mut rng = trial_rng(11, trial);
                let h = sample_channel(6, n_refl, &mut rng);
                let sel: Vec<usize> = (1..=n_sel).map(|i| 2 * i).collect();
                let delta = n_refl / n_sel;
                let theta = selected_phases(&h, &sel, delta);
                let x = complex_gaussian(&mut rng);
                for slot in 1..=n_sel {
                    let d = decompose_received(&h, &theta, x, &sel, slot, delta).unwrap();
                    let direct = h.antenna_row(sel[slot - 1])
                        .iter()
                        .zip(&theta)
                        .map(|(a, t)| a * t)
                        .sum::<Complex64>()
                        * x;
                    assert!((d.total() - direct).norm() < 1e-9);
                    let beta_sum: f64 = ((slot - 1) * delta..slot * delta)
                        .map(|n| h.beta(sel[slot - 1] - 1, n))
                        .sum();
                    assert!((d.constructive - x * beta_sum).norm() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn aligned_snr_coherent_gain() {
        let cfg = SystemConfig {
            n_rx: 2,
            n_sel: 1,
            n_refl: 16,
            alpha: vec![1.0],
            n_cand: 1,
            noise_sigma: 0.5,
            ..Default::default()
        }
        .validate()
        .unwrap();
        let h = ChannelMatrix::from_fn(2, 16, |_, n| Complex64::from_polar(1.0, n as f64));
        let snr = snr_aligned(&h, &[1], &cfg).unwrap();
        assert!((snr - 256.0 / 0.25).abs() < 1e-6);
        let g = snr_unaligned(&ChannelMatrix::from_fn(2, 1, |_, _| Complex64::new(0.0, 2.0)), &[1], &SystemConfig { n_refl: 1, ..cfg.config().clone() }.validate().unwrap()).unwrap();
        assert!((g - 4.0 / 0.25).abs() < 1e-9);
    }

    #[test]
    fn snr_undefined_without_noise() {
        let cfg = SystemConfig::default().validate().unwrap();
        let h = sample_channel(12, 64, &mut trial_rng(0, 0));
        assert!(matches!(snr_aligned(&h, &[1, 2], &cfg), Err(Error::Noiseless)));
        assert!(matches!(snr_unaligned(&h, &[1, 2], &cfg), Err(Error::Noiseless)));
    }

    #[test]
    fn aligned_snr_dominates() {
        let cfg = SystemConfig {
            noise_sigma: 1.0,
            ..Default::default()
        }
        .validate()
        .unwrap();
        let mut rng = trial_rng(4, 4);
        for _ in 0..100 {
            let h = sample_channel(12, 64, &mut rng);
            let sel = [3, 7];
            let theta = selected_phases(&h, &sel, 32);
            let snr = snr_aligned(&h, &sel, &cfg).unwrap();
            let constructive: f64 = (1..=2)
                .map(|s| decompose_received(&h, &theta, Complex64::new(1.0, 0.0), &sel, s, 32).unwrap().constructive.norm_sqr())
                .sum();
            assert!(snr >= constructive);
            // Any other phase choice on a block cannot beat the aligned one.
            for slot in 0..2 {
                let row = h.antenna_row(sel[slot]);
                let aligned: f64 = row[slot * 32..(slot + 1) * 32].iter().map(|e| e.norm()).sum();
                let random: Complex64 = row[slot * 32..(slot + 1) * 32]
                    .iter()
                    .map(|e| e * Complex64::from_polar(1.0, rng.random::<f64>() * 2.0 * PI))
                    .sum();
                assert!(random.norm_sqr() <= aligned * aligned + 1e-9);
            }
            assert!(snr_unaligned(&h, &sel, &cfg).unwrap() >= 0.0);
        }
    }

    #[test]
    fn unaligned_snr_grows_with_reflectors() {
        let mean = |n_refl: usize| {
            let cfg = SystemConfig {
                n_refl,
                noise_sigma: 1.0,
                ..Default::default()
            }
            .validate()
            .unwrap();
            let mut rng = trial_rng(8, n_refl as u64);
            (0..2000)
                .map(|_| snr_unaligned(&sample_channel(12, n_refl, &mut rng), &[1, 2], &cfg).unwrap())
                .sum::<f64>()
                / 2000.0
        };
        let (small, large) = (mean(16), mean(128));
        assert!(small.is_finite() && large.is_finite());
        assert!(large > small);
    }
}
