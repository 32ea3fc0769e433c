//! Transmitter: bit splitting, channel-weight ordering, superposition coding
//! and the reflector phase configuration.

use num_complex::Complex64;

use crate::bits::bits_to_int;
use crate::channel::ChannelMatrix;
use crate::config::ValidConfig;
use crate::constellation::Constellation;
use crate::error::{Error, Result};
use crate::rac::{rac_row, RacTable};

#[derive(Clone, Debug, PartialEq)]
pub struct TxOutput {
    /// Superposed transmit scalar.
    pub x: Complex64,
    /// Unit-modulus reflector phase vector, length N.
    pub theta: Vec<Complex64>,
    /// Row index of the selected antenna combination.
    pub rac_index: usize,
    /// Selected antennas (1-based), in table order.
    pub sel: Vec<usize>,
    /// Constellation label sent on each selected antenna, in `sel` order.
    pub labels: Vec<usize>,
    /// Slots (0-based positions in `sel`) from strongest to weakest channel.
    pub order_desc: Vec<usize>,
    /// Euclidean norm of each selected antenna's channel row.
    pub weights: Vec<f64>,
    /// Reflectors dedicated to each selected antenna.
    pub delta: usize,
}

/// Slots ordered by descending weight; equal weights keep the smaller slot
/// first. Slots are 0-based.
pub fn sort_weights_desc(weights: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..weights.len()).collect();
    order.sort_by(|&a, &b| weights[b].total_cmp(&weights[a]));
    order
}

/// Ascending order used by the successive detector: the exact reverse of
/// [`sort_weights_desc`], so both ends agree even when weights tie.
pub fn sort_weights_asc(weights: &[f64]) -> Vec<usize> {
    let mut order = sort_weights_desc(weights);
    order.reverse();
    order
}

/// `x = sum_i sqrt(alpha_i) E_s s_{k_i}`: the strongest slot `k_1` gets the
/// smallest ratio.
pub fn superpose(symbols: &[Complex64], order_desc: &[usize], alpha: &[f64], sym_energy: f64) -> Complex64 {
    order_desc
        .iter()
        .zip(alpha)
        .map(|(&k, a)| symbols[k] * (a.sqrt() * sym_energy))
        .sum()
}

/// Phase vector that co-phases reflector block `i` (`i*delta..(i+1)*delta`)
/// with selected channel row `i`. Reflectors beyond `rows.len() * delta`
/// are co-phased with row 0.
pub fn reflector_phases(sel_rows: &[&[Complex64]], delta: usize) -> Vec<Complex64> {
    let n_refl = sel_rows[0].len();
    let mut theta = Vec::with_capacity(n_refl);
    for (i, row) in sel_rows.iter().enumerate() {
        theta.extend(row[i * delta..(i + 1) * delta].iter().map(|h| Complex64::from_polar(1.0, -h.arg())));
    }
    let tail = sel_rows.len() * delta;
    theta.extend(sel_rows[0][tail..].iter().map(|h| Complex64::from_polar(1.0, -h.arg())));
    theta
}

/// Euclidean norm of each row.
pub fn row_weights(rows: &[&[Complex64]]) -> Vec<f64> {
    rows.iter()
        .map(|r| r.iter().map(|h| h.norm_sqr()).sum::<f64>().sqrt())
        .collect()
}

/// Maps one block of information bits to the transmit scalar and the
/// surface configuration.
pub fn encode(
    bits: &[u8],
    channel: &ChannelMatrix,
    cfg: &ValidConfig,
    table: &RacTable,
    constellation: &Constellation,
) -> Result<TxOutput> {
    let expected = cfg.bits_per_transmission();
    if bits.len() != expected {
        return Err(Error::Dimension {
            what: "bit block",
            expected,
            got: bits.len(),
        });
    }
    if channel.n_rx() != cfg.n_rx || channel.n_refl() != cfg.n_refl {
        return Err(Error::Dimension {
            what: "channel matrix",
            expected: cfg.n_rx * cfg.n_refl,
            got: channel.n_rx() * channel.n_refl(),
        });
    }
    let l1 = cfg.l1() as usize;
    let mu = constellation.bits_per_symbol() as usize;

    let rac_index = bits_to_int(&bits[..l1]) as usize;
    let sel = rac_row(table, rac_index)?.to_vec();
    let rows: Vec<&[Complex64]> = sel.iter().map(|&a| channel.antenna_row(a)).collect();
    let weights = row_weights(&rows);
    let order_desc = sort_weights_desc(&weights);

    // Slot k's symbol comes from the k-th mu-bit block; its power ratio is
    // set by where k falls in the weight order.
    let labels: Vec<usize> = (0..sel.len())
        .map(|k| bits_to_int(&bits[l1 + k * mu..l1 + (k + 1) * mu]) as usize)
        .collect();
    let symbols: Vec<Complex64> = labels.iter().map(|&l| constellation.point(l)).collect();
    let x = superpose(&symbols, &order_desc, &cfg.alpha, cfg.sym_energy);
    let theta = reflector_phases(&rows, cfg.delta());

    Ok(TxOutput {
        x,
        theta,
        rac_index,
        sel,
        labels,
        order_desc,
        weights,
        delta: cfg.delta(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{sample_channel, trial_rng};
    use crate::config::SystemConfig;
    use crate::constellation::make_constellation;
    use crate::rac::build_rac_table;
    use std::f64::consts::FRAC_PI_4;

    #[test]
    fn weight_order() {
        assert_eq!(sort_weights_desc(&[1.2, 3.4]), vec![1, 0]);
        assert_eq!(sort_weights_desc(&[5.0, 5.0]), vec![0, 1]);
        assert_eq!(sort_weights_desc(&[0.3, 0.1, 0.2]), vec![0, 2, 1]);
        assert_eq!(sort_weights_asc(&[5.0, 5.0]), vec![1, 0]);
        assert_eq!(sort_weights_asc(&[0.3, 0.1, 0.2]), vec![1, 2, 0]);
    }

    #[test]
    fn superposition_values() {
        let alpha = [0.2, 0.8];
        let one = Complex64::new(1.0, 0.0);
        // k_1 = slot 0 carries +1, k_2 = slot 1 carries -1.
        let x = superpose(&[one, -one], &[0, 1], &alpha, 1.0);
        assert!((x.re - (0.2f64.sqrt() - 0.8f64.sqrt())).abs() < 1e-15);
        assert!((x.re + 0.447214).abs() < 1e-6);
        let x = superpose(&[one, one], &[0, 1], &alpha, 1.0);
        assert!((x.re - 1.341641).abs() < 1e-6);
        let s = Complex64::new(0.3, -0.2);
        assert_eq!(superpose(&[s], &[0], &[1.0], 2.0), s * 2.0);
    }

    #[test]
    fn single_row_phase_cancellation() {
        let row = vec![Complex64::from_polar(2.0, FRAC_PI_4); 8];
        let theta = reflector_phases(&[&row], 8);
        for t in &theta {
            assert!((t - Complex64::from_polar(1.0, -FRAC_PI_4)).norm() < 1e-12);
        }
        let g: Complex64 = row.iter().zip(&theta).map(|(h, t)| h * t).sum();
        assert!((g - Complex64::new(16.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn block_structure() {
        let h = sample_channel(2, 4, &mut trial_rng(0, 1));
        let theta = reflector_phases(&[h.row(0), h.row(1)], 2);
        for n in 0..2 {
            assert!((h.get(0, n) * theta[n]).im.abs() < 1e-12);
            assert!((h.get(1, n + 2) * theta[n + 2]).im.abs() < 1e-12);
            assert!((h.get(0, n) * theta[n]).re > 0.0);
        }
    }

    #[test]
    fn leftover_follows_first_row() {
        let h = sample_channel(2, 5, &mut trial_rng(0, 2));
        let theta = reflector_phases(&[h.row(0), h.row(1)], 2);
        assert_eq!(theta.len(), 5);
        assert!((h.get(0, 4) * theta[4]).im.abs() < 1e-12);
        for t in theta {
            assert!((t.norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn all_zero_bits() {
        let cfg = SystemConfig::default().validate().unwrap();
        let table = build_rac_table(12, 2).unwrap();
        let c = make_constellation(2).unwrap();
        let h = sample_channel(12, 64, &mut trial_rng(0, 3));
        let tx = encode(&[0; 8], &h, &cfg, &table, &c).unwrap();
        assert_eq!(tx.rac_index, 0);
        assert_eq!(tx.sel, vec![1, 2]);
        assert_eq!(tx.labels, vec![0, 0]);
        assert!((tx.x.re - (0.2f64.sqrt() + 0.8f64.sqrt())).abs() < 1e-12);
        assert!(encode(&[0; 7], &h, &cfg, &table, &c).is_err());
    }

    #[test]
    fn symbol_bits_follow_slot_and_ratio_follows_rank() {
        let cfg = SystemConfig::default().validate().unwrap();
        let table = build_rac_table(12, 2).unwrap();
        let c = make_constellation(2).unwrap();
        let mut rng = trial_rng(0, 4);
        for _ in 0..50 {
            let h = sample_channel(12, 64, &mut rng);
            // p = 5, slot 0 sends bit 1 (-1), slot 1 sends bit 0 (+1).
            let bits = [0, 0, 0, 1, 0, 1, 1, 0];
            let tx = encode(&bits, &h, &cfg, &table, &c).unwrap();
            assert_eq!(tx.rac_index, 5);
            assert_eq!(tx.labels, vec![1, 0]);
            let strong = tx.order_desc[0];
            let sym = |slot: usize| if slot == 0 { -1.0 } else { 1.0 };
            let expect = 0.2f64.sqrt() * sym(strong) + 0.8f64.sqrt() * sym(1 - strong);
            assert!((tx.x.re - expect).abs() < 1e-12);
            assert!(tx.weights[tx.order_desc[0]] >= tx.weights[tx.order_desc[1]]);
            let bound: f64 = cfg.alpha.iter().map(|a| a.sqrt()).sum();
            assert!(tx.x.norm() <= bound + 1e-12);
        }
    }
}
