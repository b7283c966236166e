//! Dense and 3×3 valid-convolution kernels with their reverse passes.
//!
//! Weights are row-major: a dense layer is `[out][in]`, a convolution is
//! `[out_c][in_c][3][3]`. Activations of a convolution are `[c][row][col]`.

/// `out = W x + b`.
pub fn dense(w: &[f64], b: &[f64], x: &[f64], out: &mut [f64]) {
    let cols = x.len();
    for (i, o) in out.iter_mut().enumerate() {
        let row = &w[i * cols..(i + 1) * cols];
        *o = b[i] + row.iter().zip(x).map(|(a, v)| a * v).sum::<f64>();
    }
}

/// Accumulates `dW += dy xᵀ`, `db += dy` and, when given, `dx = Wᵀ dy`.
pub fn dense_back(w: &[f64], x: &[f64], dy: &[f64], dw: &mut [f64], db: &mut [f64], dx: Option<&mut [f64]>) {
    let cols = x.len();
    for (i, &g) in dy.iter().enumerate() {
        if g == 0.0 {
            continue;
        }
        db[i] += g;
        for (d, v) in dw[i * cols..(i + 1) * cols].iter_mut().zip(x) {
            *d += g * v;
        }
    }
    if let Some(dx) = dx {
        dx.iter_mut().for_each(|v| *v = 0.0);
        for (i, &g) in dy.iter().enumerate() {
            if g == 0.0 {
                continue;
            }
            for (d, a) in dx.iter_mut().zip(&w[i * cols..(i + 1) * cols]) {
                *d += g * a;
            }
        }
    }
}

/// Valid 3×3 convolution of an `in_c × n × n` input; output is `(n-2)²` per channel.
pub fn conv3(w: &[f64], b: &[f64], x: &[f64], in_c: usize, n: usize, out: &mut [f64]) {
    let m = n - 2;
    let out_c = b.len();
    for oc in 0..out_c {
        let plane = &mut out[oc * m * m..(oc + 1) * m * m];
        plane.iter_mut().for_each(|v| *v = b[oc]);
        for ic in 0..in_c {
            let src = &x[ic * n * n..(ic + 1) * n * n];
            let k = &w[(oc * in_c + ic) * 9..(oc * in_c + ic + 1) * 9];
            for r in 0..m {
                let row = &mut plane[r * m..(r + 1) * m];
                for (ky, kr) in k.chunks_exact(3).enumerate() {
                    let s = &src[(r + ky) * n..(r + ky) * n + n];
                    for (c, o) in row.iter_mut().enumerate() {
                        *o += kr[0] * s[c] + kr[1] * s[c + 1] + kr[2] * s[c + 2];
                    }
                }
            }
        }
    }
}

/// Reverse of [`conv3`]: accumulates kernel and bias gradients and, when
/// given, overwrites `dx` with the input gradient.
pub fn conv3_back(
    w: &[f64],
    x: &[f64],
    in_c: usize,
    n: usize,
    dy: &[f64],
    dw: &mut [f64],
    db: &mut [f64],
    mut dx: Option<&mut [f64]>,
) {
    let m = n - 2;
    if let Some(dx) = dx.as_deref_mut() {
        dx.iter_mut().for_each(|v| *v = 0.0);
    }
    for oc in 0..db.len() {
        let g = &dy[oc * m * m..(oc + 1) * m * m];
        db[oc] += g.iter().sum::<f64>();
        for ic in 0..in_c {
            let src = &x[ic * n * n..(ic + 1) * n * n];
            let base = (oc * in_c + ic) * 9;
            for ky in 0..3 {
                for kx in 0..3 {
                    let mut acc = 0.0;
                    for r in 0..m {
                        let s = &src[(r + ky) * n + kx..(r + ky) * n + kx + m];
                        acc += g[r * m..(r + 1) * m].iter().zip(s).map(|(a, b)| a * b).sum::<f64>();
                    }
                    dw[base + ky * 3 + kx] += acc;
                }
            }
            if let Some(dx) = dx.as_deref_mut() {
                let dst = &mut dx[ic * n * n..(ic + 1) * n * n];
                let k = &w[base..base + 9];
                for r in 0..m {
                    let gr = &g[r * m..(r + 1) * m];
                    for ky in 0..3 {
                        let d = &mut dst[(r + ky) * n..(r + ky) * n + n];
                        for (c, &gv) in gr.iter().enumerate() {
                            d[c] += gv * k[ky * 3];
                            d[c + 1] += gv * k[ky * 3 + 1];
                            d[c + 2] += gv * k[ky * 3 + 2];
                        }
                    }
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn conv_of_a_delta_is_the_flipped_kernel() {
        // single channel 5×5 with a one at the centre
        let mut x = vec![0.0; 25];
        x[12] = 1.0;
        let w: Vec<f64> = (1..=9).map(|v| v as f64).collect();
        let mut out = vec![0.0; 9];
        conv3(&w, &[0.5], &x, 1, 5, &mut out);
        let expect: Vec<f64> = (1..=9).rev().map(|v| v as f64 + 0.5).collect();
        assert_eq!(out, expect);
    }

    #[test]
    fn dense_matches_hand_product() {
        let w = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0];
        let mut out = [0.0; 2];
        dense(&w, &[1.0, -1.0], &[1.0, 0.0, -1.0], &mut out);
        assert_eq!(out, [-1.0, -3.0]);
    }
}
