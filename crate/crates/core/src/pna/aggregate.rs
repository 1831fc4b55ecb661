// SPDX-License-Identifier: Apache-2.0

//! PNA aggregators and logarithmic degree scalers.

use ndarray::{Array2, ArrayView2};

use crate::graph::PathSubgraph;

use super::PnaError;

/// Numerical floor inside the standard-deviation aggregator.
pub const STD_EPSILON: f64 = 1e-5;

/// Aggregates `deg x c` messages into `out = [mean | std | max | min]` (`4c`)
/// and records, per channel, which row supplied the max and the min. With no
/// messages everything is zero.
pub(crate) fn aggregate_rows(
    messages: ArrayView2<f64>,
    epsilon: f64,
    out: &mut [f64],
    argmax: &mut [u32],
    argmin: &mut [u32],
) {
    let (deg, c) = messages.dim();
    debug_assert_eq!(out.len(), 4 * c);
    if deg == 0 {
        out.fill(0.0);
        argmax.fill(u32::MAX);
        argmin.fill(u32::MAX);
        return;
    }
    let inv = 1.0 / deg as f64;
    for j in 0..c {
        let col = messages.column(j);
        let (mut sum, mut sq) = (0.0, 0.0);
        let (mut hi, mut lo) = (col[0], col[0]);
        let (mut ihi, mut ilo) = (0u32, 0u32);
        for (r, &m) in col.iter().enumerate() {
            sum += m;
            sq += m * m;
            if m > hi {
                hi = m;
                ihi = r as u32;
            }
            if m < lo {
                lo = m;
                ilo = r as u32;
            }
        }
        let mean = sum * inv;
        let var = (sq * inv - mean * mean).max(0.0);
        out[j] = mean;
        out[c + j] = (var + epsilon).sqrt();
        out[2 * c + j] = hi;
        out[3 * c + j] = lo;
        argmax[j] = ihi;
        argmin[j] = ilo;
    }
}

/// `[mean; std; max; min]` of a list of equal-length message vectors.
///
/// `std = sqrt(relu(mean(m^2) - mean(m)^2) + epsilon)`. An empty list yields
/// the zero vector of length `4 * width`.
pub fn aggregate_stats(messages: &[Vec<f64>], width: usize, epsilon: f64) -> Vec<f64> {
    let mut m = Array2::zeros((messages.len(), width));
    for (mut row, msg) in m.rows_mut().into_iter().zip(messages) {
        assert_eq!(msg.len(), width, "message width mismatch");
        row.assign(&ndarray::ArrayView1::from(msg.as_slice()));
    }
    let mut out = vec![0.0; 4 * width];
    let mut a = vec![0; width];
    let mut b = vec![0; width];
    aggregate_rows(m.view(), epsilon, &mut out, &mut a, &mut b);
    out
}

/// `S(d, alpha) = (log(d + 1) / delta)^alpha`.
pub fn scaler(d: usize, alpha: f64, delta: f64) -> f64 {
    if d == 0 {
        return 1.0;
    }
    (((d + 1) as f64).ln() / delta).powf(alpha)
}

/// `[identity, amplification, attenuation] = [1, S(d, 1), S(d, -1)]`; all
/// ones for an isolated node.
pub fn degree_scalers(d: usize, delta: f64) -> [f64; 3] {
    if d == 0 {
        return [1.0, 1.0, 1.0];
    }
    let s = ((d + 1) as f64).ln() / delta;
    [1.0, s, 1.0 / s]
}

/// Mean of `log(d + 1)` over every node of every graph, `d` the in-degree.
pub fn compute_delta<'a, I>(graphs: I) -> Result<f64, PnaError>
where
    I: IntoIterator<Item = &'a PathSubgraph>,
{
    let (mut sum, mut count, mut positive) = (0.0, 0usize, false);
    for g in graphs {
        for d in g.in_degrees() {
            positive |= d > 0;
            sum += ((d + 1) as f64).ln();
            count += 1;
        }
    }
    if !positive {
        return Err(PnaError::NoPositiveDegree);
    }
    Ok(sum / count as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_messages() {
        let out = aggregate_stats(&[vec![1.0], vec![3.0]], 1, STD_EPSILON);
        assert_eq!(out[0], 2.0);
        assert!((out[1] - (1.0 + STD_EPSILON).sqrt()).abs() < 1e-15);
        assert!((out[1] - 1.0000049999875).abs() < 1e-12);
        assert_eq!((out[2], out[3]), (3.0, 1.0));
    }

    #[test]
    fn single_and_empty() {
        let out = aggregate_stats(&[vec![5.0, -2.0]], 2, STD_EPSILON);
        assert_eq!(out[0..2], [5.0, -2.0]);
        assert_eq!(out[2..4], [STD_EPSILON.sqrt(), STD_EPSILON.sqrt()]);
        assert_eq!(out[4..8], [5.0, -2.0, 5.0, -2.0]);
        assert_eq!(aggregate_stats(&[], 3, STD_EPSILON), vec![0.0; 12]);
    }

    #[test]
    fn scaler_examples() {
        let l2 = 2f64.ln();
        assert_eq!(degree_scalers(1, l2), [1.0, 1.0, 1.0]);
        let s = degree_scalers(3, l2);
        assert!((s[1] - 2.0).abs() < 1e-15 && (s[2] - 0.5).abs() < 1e-15);
        assert_eq!(degree_scalers(0, 0.7), [1.0, 1.0, 1.0]);
        for d in [1, 4, 77] {
            assert_eq!(scaler(d, 0.0, 1.3), 1.0);
            assert!((scaler(d, 1.0, 1.3) - degree_scalers(d, 1.3)[1]).abs() < 1e-15);
        }
    }

    #[test]
    fn delta_examples() {
        let g = PathSubgraph {
            nodes: vec![0, 1, 2],
            edges: vec![(0, 1), (1, 2), (2, 0)],
            target: vec![true; 3],
            features: vec![0; 3],
            feature_width: 1,
        };
        assert!((compute_delta([&g]).unwrap() - 2f64.ln()).abs() < 1e-15);
        // in-degrees {0, 1, 3}; the self-loop gives node 2 its third input
        let g = PathSubgraph {
            edges: vec![(0, 1), (0, 2), (1, 2), (2, 2)],
            ..g
        };
        assert_eq!(g.in_degrees(), [0, 1, 3]);
        assert!((compute_delta([&g]).unwrap() - 2f64.ln()).abs() < 1e-15);
        let flat = PathSubgraph { edges: vec![], ..g };
        assert_eq!(compute_delta([&flat]), Err(PnaError::NoPositiveDegree));
    }
}
