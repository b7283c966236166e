//! Independent forward pass of the policy-value network, staged so that a
//! single perturbed parameter only recomputes what depends on it.
//!
//! Everything here is written with plain nested loops against the block
//! names and shapes; it shares no numeric code with the library.

use std::collections::BTreeMap;

use mwdesign_core::nn::PolicyValueNet;

pub struct Oracle {
    pub grid: usize,
    pub actions: usize,
    pub w: BTreeMap<String, Vec<f64>>,
    pub x: Vec<f64>,
    pub s: Vec<f64>,
    pub action: usize,
    pub advantage: f64,
    pub beta: f64,
    pub ret: f64,
}

#[derive(Clone)]
pub struct Acts {
    pub h1pre: Vec<f64>,
    pub h2pre: Vec<f64>,
    pub e: Vec<f64>,
    pub c1pre: Vec<f64>,
    pub c2pre: Vec<f64>,
    pub apre: Vec<f64>,
    pub cpre: Vec<f64>,
}

fn relu(v: f64) -> f64 {
    if v > 0.0 {
        v
    } else {
        0.0
    }
}

fn conv(x: &[f64], in_c: usize, n: usize, w: &[f64], b: &[f64]) -> Vec<f64> {
    let m = n - 2;
    let out_c = b.len();
    let mut out = vec![0.0; out_c * m * m];
    for oc in 0..out_c {
        for r in 0..m {
            for c in 0..m {
                let mut acc = b[oc];
                for ic in 0..in_c {
                    for ky in 0..3 {
                        for kx in 0..3 {
                            acc += w[((oc * in_c + ic) * 3 + ky) * 3 + kx] * x[(ic * n + r + ky) * n + c + kx];
                        }
                    }
                }
                out[(oc * m + r) * m + c] = acc;
            }
        }
    }
    out
}

fn fc(x: &[f64], w: &[f64], b: &[f64]) -> Vec<f64> {
    (0..b.len())
        .map(|i| {
            let mut acc = b[i];
            for j in 0..x.len() {
                acc += w[i * x.len() + j] * x[j];
            }
            acc
        })
        .collect()
}

fn tanh_all(v: &[f64]) -> Vec<f64> {
    v.iter().map(|x| x.tanh()).collect()
}

impl Oracle {
    pub fn from_net(net: &PolicyValueNet, x: Vec<f64>, s: Vec<f64>) -> Self {
        let w = net
            .blocks()
            .iter()
            .map(|b| (b.name.clone(), net.block(&b.name).unwrap().to_vec()))
            .collect();
        Self {
            grid: net.config().grid,
            actions: net.config().actions,
            w,
            x,
            s,
            action: 0,
            advantage: 0.0,
            beta: 0.0,
            ret: 0.0,
        }
    }

    fn p(&self, name: &str) -> &[f64] {
        &self.w[name]
    }

    fn grid_path(&self) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        let g = self.grid;
        let h1pre = conv(&self.x, 1, g, self.p("conv1.w"), self.p("conv1.b"));
        let h1: Vec<f64> = h1pre.iter().map(|v| relu(*v)).collect();
        let h2pre = conv(&h1, 8, g - 2, self.p("conv2.w"), self.p("conv2.b"));
        let h2: Vec<f64> = h2pre.iter().map(|v| relu(*v)).collect();
        let e = fc(&h2, self.p("grid_fc.w"), self.p("grid_fc.b"));
        (h1pre, h2pre, e)
    }

    pub fn trunk(&self, a: &Acts) -> Vec<f64> {
        let mut t = a.e.clone();
        t.extend(tanh_all(&a.c2pre));
        t
    }

    pub fn full(&self) -> Acts {
        let (h1pre, h2pre, e) = self.grid_path();
        let c1pre = fc(&self.s, self.p("curve_fc1.w"), self.p("curve_fc1.b"));
        let c2pre = fc(&tanh_all(&c1pre), self.p("curve_fc2.w"), self.p("curve_fc2.b"));
        let mut a = Acts {
            h1pre,
            h2pre,
            e,
            c1pre,
            c2pre,
            apre: vec![],
            cpre: vec![],
        };
        let t = self.trunk(&a);
        a.apre = fc(&t, self.p("actor_fc1.w"), self.p("actor_fc1.b"));
        a.cpre = fc(&t, self.p("critic_fc1.w"), self.p("critic_fc1.b"));
        a
    }

    pub fn outputs(&self, a: &Acts) -> (Vec<f64>, f64) {
        let logits = fc(&tanh_all(&a.apre), self.p("actor_fc2.w"), self.p("actor_fc2.b"));
        let v = fc(&tanh_all(&a.cpre), self.p("critic_fc2.w"), self.p("critic_fc2.b"))[0];
        (logits, v)
    }

    /// `-A log π(a) - β H + ½ (R - V)²` written out directly.
    pub fn loss(&self, a: &Acts) -> f64 {
        let (z, v) = self.outputs(a);
        let m = z.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let sum: f64 = z.iter().map(|t| (t - m).exp()).sum();
        let logp: Vec<f64> = z.iter().map(|t| t - m - sum.ln()).collect();
        let h: f64 = -logp.iter().map(|l| l.exp() * l).sum::<f64>();
        -self.advantage * logp[self.action] - self.beta * h + 0.5 * (self.ret - v) * (self.ret - v)
    }

    /// Shifts the trunk by `delta[(index, change)]` and propagates into the
    /// head pre-activations.
    fn shift_trunk(&self, a: &mut Acts, delta: &[(usize, f64)]) {
        let n = 64 + a.c2pre.len();
        let (aw, cw) = (self.p("actor_fc1.w"), self.p("critic_fc1.w"));
        for r in 0..a.apre.len() {
            for &(k, d) in delta {
                a.apre[r] += aw[r * n + k] * d;
                a.cpre[r] += cw[r * n + k] * d;
            }
        }
    }

    /// Loss with flat parameter `(block, local index)` shifted by `h`;
    /// `None` when the shift flips a ReLU.
    pub fn perturbed_loss(&mut self, base: &Acts, block: &str, idx: usize, h: f64) -> Option<f64> {
        let mut a = base.clone();
        let trunk = self.trunk(base);
        let cols = |name: &str, rows: usize| self.w[name].len() / rows;
        match block {
            "conv1.w" | "conv1.b" | "conv2.w" | "conv2.b" => {
                self.w.get_mut(block).unwrap()[idx] += h;
                let (h1pre, h2pre, e) = self.grid_path();
                self.w.get_mut(block).unwrap()[idx] -= h;
                let flips = |old: &[f64], new: &[f64]| old.iter().zip(new).any(|(o, n)| (*o > 0.0) != (*n > 0.0));
                if flips(&base.h1pre, &h1pre) || flips(&base.h2pre, &h2pre) {
                    return None;
                }
                let delta: Vec<(usize, f64)> = e.iter().zip(&base.e).enumerate().map(|(k, (n, o))| (k, n - o)).collect();
                self.shift_trunk(&mut a, &delta);
            }
            "grid_fc.w" | "grid_fc.b" => {
                let (i, d) = if block.ends_with(".w") {
                    let c = cols("grid_fc.w", 64);
                    (idx / c, h * relu(base.h2pre[idx % c]))
                } else {
                    (idx, h)
                };
                self.shift_trunk(&mut a, &[(i, d)]);
            }
            "curve_fc1.w" | "curve_fc1.b" => {
                let rows = a.c1pre.len();
                let (i, d) = if block.ends_with(".w") {
                    let c = cols("curve_fc1.w", rows);
                    (idx / c, h * self.s[idx % c])
                } else {
                    (idx, h)
                };
                let dc1 = (base.c1pre[i] + d).tanh() - base.c1pre[i].tanh();
                let w2 = self.p("curve_fc2.w");
                let n2 = a.c2pre.len();
                for r in 0..n2 {
                    a.c2pre[r] += w2[r * rows + i] * dc1;
                }
                let delta: Vec<(usize, f64)> =
                    (0..n2).map(|r| (64 + r, a.c2pre[r].tanh() - base.c2pre[r].tanh())).collect();
                self.shift_trunk(&mut a, &delta);
            }
            "curve_fc2.w" | "curve_fc2.b" => {
                let rows = a.c2pre.len();
                let (i, d) = if block.ends_with(".w") {
                    let c = cols("curve_fc2.w", rows);
                    (idx / c, h * base.c1pre[idx % c].tanh())
                } else {
                    (idx, h)
                };
                let dc2 = (base.c2pre[i] + d).tanh() - base.c2pre[i].tanh();
                self.shift_trunk(&mut a, &[(64 + i, dc2)]);
            }
            "actor_fc1.w" | "actor_fc1.b" | "critic_fc1.w" | "critic_fc1.b" => {
                let n = trunk.len();
                let (i, d) = if block.ends_with(".w") { (idx / n, h * trunk[idx % n]) } else { (idx, h) };
                if block.starts_with("actor") {
                    a.apre[i] += d;
                } else {
                    a.cpre[i] += d;
                }
            }
            _ => {
                self.w.get_mut(block).unwrap()[idx] += h;
                let l = self.loss(&a);
                self.w.get_mut(block).unwrap()[idx] -= h;
                return Some(l);
            }
        }
        Some(self.loss(&a))
    }
}

/// Outcome of a full finite-difference sweep over every parameter.
#[derive(Debug)]
pub struct GradCheck {
    pub params: usize,
    pub checked: usize,
    pub skipped_kinks: usize,
    pub worst_rel: f64,
    pub worst_block: String,
}

/// Reduced network (8×8 grid, 16-point two-channel sweep, 4 actions) with
/// orthogonal weights, unit-gain heads and random non-zero biases.
pub fn reduced_net(seed: u64) -> (PolicyValueNet, Vec<f64>, Vec<f64>) {
    use mwdesign_core::nn::NetConfig;
    use rand::Rng;
    let cfg = NetConfig {
        grid: 8,
        svec_len: 32,
        actions: 4,
    };
    let mut net = PolicyValueNet::new(cfg, seed).unwrap();
    let mut r = super::rng(seed ^ 0x5eed);
    let blocks = net.blocks().to_vec();
    for b in &blocks {
        let p = &mut net.params_mut()[b.offset..b.offset + b.len];
        if b.name.ends_with(".b") {
            p.iter_mut().for_each(|v| *v = super::uniform(&mut r, -0.5, 0.5));
        } else if b.name.ends_with("fc2.w") && !b.name.starts_with("curve") {
            p.iter_mut().for_each(|v| *v *= 100.0);
        }
    }
    let x = (0..64).map(|_| (r.gen::<f64>() < 0.4) as u8 as f64).collect();
    let s = (0..32).map(|_| super::uniform(&mut r, 0.2, 1.0)).collect();
    (net, x, s)
}

/// Central differences with step `h` against the analytic gradient of the
/// full actor-critic loss.
pub fn gradient_check(seed: u64, h: f64) -> GradCheck {
    use mwdesign_core::nn::{a3c_seeds, NetInput};
    let (net, x, s) = reduced_net(seed);
    let input = NetInput {
        grid: x.clone(),
        svec: s.clone(),
    };
    let fwd = net.forward(&input).unwrap();
    let (action, advantage, beta, ret) = (2, 0.7, 0.05, fwd.value + 1.3);
    let (dl, dv) = a3c_seeds(&fwd.logits, action, advantage, beta, fwd.value, ret);
    let mut grads = vec![0.0; net.params().len()];
    net.backward(&fwd, &dl, dv, &mut grads);

    let mut o = Oracle::from_net(&net, x, s);
    o.action = action;
    o.advantage = advantage;
    o.beta = beta;
    o.ret = ret;
    let base = o.full();
    let mut out = GradCheck {
        params: grads.len(),
        checked: 0,
        skipped_kinks: 0,
        worst_rel: 0.0,
        worst_block: String::new(),
    };
    for b in net.blocks() {
        for k in 0..b.len {
            let (Some(lp), Some(lm)) = (
                o.perturbed_loss(&base, &b.name, k, h),
                o.perturbed_loss(&base, &b.name, k, -h),
            ) else {
                out.skipped_kinks += 1;
                continue;
            };
            let fd = (lp - lm) / (2.0 * h);
            let an = grads[b.offset + k];
            if an.abs().max(fd.abs()) <= 1e-8 {
                continue;
            }
            out.checked += 1;
            let e = super::rel_err(an, fd);
            if e > out.worst_rel {
                out.worst_rel = e;
                out.worst_block = format!("{}[{k}]", b.name);
            }
        }
    }
    out
}
