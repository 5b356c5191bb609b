//! Discriminator and generator objectives without the logarithm.
//!
//! The discriminator sees `(x, u)` rows. Real rows carry the labeled values,
//! fake rows carry the generator's output at the same labeled points.

use crate::error::{arg, Result};
use crate::losses::JetModel;
use crate::network::JetPlan;
use crate::pde::LabeledSet;

fn check(disc: &dyn JetModel, gen: &dyn JetModel, labeled: &LabeledSet) -> Result<()> {
    if labeled.is_empty() {
        return arg("adversarial losses need at least one labeled sample");
    }
    if gen.output_dim() != labeled.output_dim || disc.output_dim() != 1 {
        return arg("discriminator must have one output and the generator must match the labels");
    }
    Ok(())
}

fn rows(labeled: &LabeledSet, values: impl Fn(usize, usize) -> f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(labeled.len() * (labeled.input_dim + labeled.output_dim));
    for j in 0..labeled.len() {
        out.extend_from_slice(labeled.point(j));
        out.extend((0..labeled.output_dim).map(|k| values(j, k)));
    }
    out
}

/// `(1/J) Σ [(1 − D(x, u)) + D(x, G(x))]`, adding `scale · ∂/∂W_D` when asked.
pub fn d_loss(
    disc: &mut dyn JetModel,
    gen: &mut dyn JetModel,
    labeled: &LabeledSet,
    grad: Option<(&mut [f64], f64)>,
) -> Result<f64> {
    check(disc, gen, labeled)?;
    let j = labeled.len();
    let plan = JetPlan::value_only();
    let fake = gen.eval(&labeled.x, &plan);
    let mut batch = rows(labeled, |r, k| labeled.value(r)[k]);
    batch.extend(rows(labeled, |r, k| fake.get(k, 0, r)));
    let out = disc.eval(&batch, &plan);
    let inv = 1.0 / j as f64;
    let mut loss = 0.0;
    for r in 0..j {
        loss += inv * ((1.0 - out.get(0, 0, r)) + out.get(0, 0, j + r));
    }
    if let Some((g, scale)) = grad {
        let mut seed = vec![inv * scale; 2 * j];
        seed[..j].iter_mut().for_each(|s| *s = -*s);
        disc.backprop(&seed, g);
    }
    Ok(loss)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GenLoss {
    /// `L_T + (1/J) Σ (1 − D(x, G(x)))`.
    pub l_g: f64,
    /// Labeled-data loss `L_T`.
    pub l_t: f64,
}

/// Generator objective, adding `scale · ∂L_G/∂W_G` when asked. The
/// adversarial part reaches the generator through the discriminator's input
/// gradient.
pub fn g_loss(
    disc: &mut dyn JetModel,
    gen: &mut dyn JetModel,
    labeled: &LabeledSet,
    grad: Option<(&mut [f64], f64)>,
) -> Result<GenLoss> {
    check(disc, gen, labeled)?;
    let j = labeled.len();
    let (din, dout) = (labeled.input_dim, labeled.output_dim);
    let plan = JetPlan::value_only();
    let fake = gen.eval(&labeled.x, &plan);
    let out = disc.eval(&rows(labeled, |r, k| fake.get(k, 0, r)), &plan);
    let inv = 1.0 / j as f64;
    let (mut l_t, mut adv) = (0.0, 0.0);
    for r in 0..j {
        for (k, &u) in labeled.value(r).iter().enumerate() {
            let e = fake.get(k, 0, r) - u;
            l_t += inv * e * e;
        }
        adv += inv * (1.0 - out.get(0, 0, r));
    }
    if let Some((g, scale)) = grad {
        let mut scratch = vec![0.0; disc.num_params()];
        let through = disc.backprop_with_input(&vec![-inv * scale; j], &mut scratch);
        let mut seed = vec![0.0; fake.data.len()];
        for r in 0..j {
            for k in 0..dout {
                let e = fake.get(k, 0, r) - labeled.value(r)[k];
                seed[fake.index(k, 0, r)] = 2.0 * inv * scale * e + through[r * (din + dout) + din + k];
            }
        }
        gen.backprop(&seed, g);
    }
    Ok(GenLoss { l_g: l_t + adv, l_t })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::autodiff::Scalar;
    use crate::losses::{FnModel, NetModel};
    use crate::network::{init_params, Activation, BatchEngine, InitScheme, MlpSpec};

    fn labeled() -> LabeledSet {
        let mut s = LabeledSet::new(1, 1);
        s.push(&[0.2], &[1.0]);
        s.push(&[0.6], &[-1.0]);
        s
    }

    fn exact_gen() -> FnModel {
        FnModel::new(1, 1, |x| vec![x[0] * -5.0 + 2.0])
    }

    #[test]
    fn d_loss_examples() {
        let set = labeled();
        // the generator is off by 10 so the disc can tell rows apart by u
        let mut gen = FnModel::new(1, 1, |x| vec![x[0].lift(10.0)]);
        let mut perfect = FnModel::new(2, 1, |x| vec![x[0].lift(if x[1].value() < 5.0 { 1.0 } else { 0.0 })]);
        assert_eq!(d_loss(&mut perfect, &mut gen, &set, None).unwrap(), 0.0);
        for (c, want) in [(0.5, 1.0), (0.0, 1.0), (1.0, 1.0)] {
            let mut flat = FnModel::new(2, 1, move |x| vec![x[0].lift(c)]);
            assert_eq!(d_loss(&mut flat, &mut gen, &set, None).unwrap(), want);
        }
        let empty = LabeledSet::new(1, 1);
        let mut flat = FnModel::new(2, 1, |x| vec![x[0].lift(0.5)]);
        assert!(d_loss(&mut flat, &mut gen, &empty, None).is_err());
    }

    #[test]
    fn g_loss_examples() {
        let set = labeled();
        let mut gen = exact_gen();
        // u = 2 - 5x hits 1 at 0.2 and -1 at 0.6
        let mut fooled = FnModel::new(2, 1, |x| vec![x[0].lift(1.0)]);
        let l = g_loss(&mut fooled, &mut gen, &set, None).unwrap();
        assert!(l.l_g.abs() < 1e-15 && l.l_t.abs() < 1e-15);
        let mut wise = FnModel::new(2, 1, |x| vec![x[0].lift(0.0)]);
        assert!((g_loss(&mut wise, &mut gen, &set, None).unwrap().l_g - 1.0).abs() < 1e-15);
        // errors of norm 1 and 2 give L_T = 2.5
        let mut off = FnModel::new(1, 1, |x| vec![x[0].lift(0.0)]);
        let mut half = FnModel::new(2, 1, |x| vec![x[0].lift(0.5)]);
        let mut two = LabeledSet::new(1, 1);
        two.push(&[0.2], &[1.0]);
        two.push(&[0.6], &[-2.0]);
        let l = g_loss(&mut half, &mut off, &two, None).unwrap();
        assert!((l.l_t - 2.5).abs() < 1e-15 && (l.l_g - 3.0).abs() < 1e-15);
    }

    fn nets() -> (MlpSpec, Vec<f64>, MlpSpec, Vec<f64>) {
        let gs = MlpSpec::new(2, 2, 5, 1, Activation::Linear).unwrap();
        let ds = MlpSpec::new(3, 1, 6, 1, Activation::Sigmoid).unwrap();
        let gp = init_params(&gs, InitScheme::GlorotUniform, 7, 1).values;
        let dp = init_params(&ds, InitScheme::GlorotUniform, 7, 2).values;
        (gs, gp, ds, dp)
    }

    fn set2() -> LabeledSet {
        let mut s = LabeledSet::new(2, 1);
        s.push(&[0.1, 0.3], &[0.5]);
        s.push(&[0.9, -0.4], &[-0.25]);
        s.push(&[0.4, 0.4], &[1.0]);
        s
    }

    #[test]
    fn gradients_match_finite_differences() {
        let (gs, gp, ds, dp) = nets();
        let (mut ge, mut de) = (BatchEngine::new(&gs), BatchEngine::new(&ds));
        let set = set2();
        let mut gd = vec![0.0; dp.len()];
        d_loss(
            &mut NetModel { engine: &mut de, params: &dp, output_dim: 1 },
            &mut NetModel { engine: &mut ge, params: &gp, output_dim: 1 },
            &set,
            Some((&mut gd, 1.0)),
        )
        .unwrap();
        let mut gg = vec![0.0; gp.len()];
        g_loss(
            &mut NetModel { engine: &mut de, params: &dp, output_dim: 1 },
            &mut NetModel { engine: &mut ge, params: &gp, output_dim: 1 },
            &set,
            Some((&mut gg, 1.0)),
        )
        .unwrap();
        let h = 1e-6;
        for i in 0..dp.len() {
            let mut at = |d: f64| {
                let mut q = dp.clone();
                q[i] += d;
                d_loss(
                    &mut NetModel { engine: &mut de, params: &q, output_dim: 1 },
                    &mut NetModel { engine: &mut ge, params: &gp, output_dim: 1 },
                    &set,
                    None,
                )
                .unwrap()
            };
            let fd = (at(h) - at(-h)) / (2.0 * h);
            assert!((fd - gd[i]).abs() < 1e-8, "D {i}: {fd} vs {}", gd[i]);
        }
        for i in 0..gp.len() {
            let mut at = |d: f64| {
                let mut q = gp.clone();
                q[i] += d;
                g_loss(
                    &mut NetModel { engine: &mut de, params: &dp, output_dim: 1 },
                    &mut NetModel { engine: &mut ge, params: &q, output_dim: 1 },
                    &set,
                    None,
                )
                .unwrap()
                .l_g
            };
            let fd = (at(h) - at(-h)) / (2.0 * h);
            assert!((fd - gg[i]).abs() < 1e-8, "G {i}: {fd} vs {}", gg[i]);
        }
    }
}
