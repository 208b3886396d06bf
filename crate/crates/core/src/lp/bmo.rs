use rayon::prelude::*;

use crate::spectral::PhysicalField;

/// Mean oscillation maximised over periodic dyadic squares of side
/// `n/2^m` grid cells at every grid translate. Squares are a lattice
/// surrogate for balls, so this is a lower bound for the seminorm over
/// all balls and equivalent to it up to a constant.
pub fn bmo_seminorm(f: &PhysicalField) -> f64 {
    let n = f.grid().n();
    let v = f.values();
    // prefix sums over the 2n × 2n periodic extension
    let m = 2 * n + 1;
    let mut pre = vec![0.0f64; m * m];
    for i in 0..2 * n {
        let mut row = 0.0;
        for j in 0..2 * n {
            row += v[(i % n) * n + (j % n)];
            pre[(i + 1) * m + j + 1] = pre[i * m + j + 1] + row;
        }
    }
    let rect = |i0: usize, j0: usize, l: usize| {
        pre[(i0 + l) * m + j0 + l] - pre[i0 * m + j0 + l] - pre[(i0 + l) * m + j0]
            + pre[i0 * m + j0]
    };
    let mut best = 0.0f64;
    let mut side = n;
    while side >= 2 {
        let translates = if side == n { 1 } else { n };
        let area = (side * side) as f64;
        let local = (0..translates * translates)
            .into_par_iter()
            .map(|t| {
                let (i0, j0) = (t / translates, t % translates);
                let mean = rect(i0, j0, side) / area;
                let mut osc = 0.0;
                for di in 0..side {
                    let row = ((i0 + di) % n) * n;
                    for dj in 0..side {
                        osc += (v[row + (j0 + dj) % n] - mean).abs();
                    }
                }
                osc / area
            })
            .reduce(|| 0.0, f64::max);
        best = best.max(local);
        if side % 2 != 0 {
            break;
        }
        side /= 2;
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::random::{scalar_field, SpectrumSpec};
    use crate::spectral::TorusGrid;

    /// Direct evaluation without prefix sums.
    fn brute(f: &PhysicalField) -> f64 {
        let n = f.grid().n();
        let v = f.values();
        let mut best = 0.0f64;
        let mut side = n;
        while side >= 2 {
            for i0 in 0..n {
                for j0 in 0..n {
                    let cells: Vec<f64> = (0..side * side)
                        .map(|t| v[((i0 + t / side) % n) * n + (j0 + t % side) % n])
                        .collect();
                    let mean = cells.iter().sum::<f64>() / cells.len() as f64;
                    let osc =
                        cells.iter().map(|c| (c - mean).abs()).sum::<f64>() / cells.len() as f64;
                    best = best.max(osc);
                }
            }
            side /= 2;
        }
        best
    }

    #[test]
    fn constant_has_no_oscillation() {
        let g = TorusGrid::new(16).unwrap();
        assert!(bmo_seminorm(&PhysicalField::from_fn(&g, |_, _| 3.0)) < 1e-14);
    }

    #[test]
    fn sine_bounds_and_brute_force() {
        let g = TorusGrid::new(16).unwrap();
        let f = PhysicalField::from_fn(&g, |x, _| x.sin());
        let b = bmo_seminorm(&f);
        let full: f64 = f.values().iter().map(|v| v.abs()).sum::<f64>() / g.len() as f64;
        assert!(b <= 2.0 && b >= full - 1e-14);
        assert!((b - brute(&f)).abs() < 1e-12);
    }

    #[test]
    fn bounded_by_twice_sup() {
        let g = TorusGrid::new(32).unwrap();
        let f = scalar_field(&g, SpectrumSpec::gaussian(1.0), 4, 0).to_physical();
        let sup = f.values().iter().fold(0.0f64, |m, v| m.max(v.abs()));
        assert!(bmo_seminorm(&f) <= 2.0 * sup);
    }
}
