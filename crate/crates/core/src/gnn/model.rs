use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::batch::Batch;
use super::config::{Arch, ModelConfig};
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::nn::{glorot_uniform, AttentionSpec, ParamSet, Tape, Var};

pub const ATTENTION_SLOPE: f64 = 0.2;

/// Whether a traced layer holds one row per node or one row per graph.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Level {
    Node,
    Graph,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TraceLayer {
    pub name: String,
    pub level: Level,
    pub value: Matrix,
}

/// Every named activation of one forward pass, pre-pooling layers first and
/// the logits last.
#[derive(Clone, Debug, PartialEq)]
pub struct ActivationTrace {
    pub layers: Vec<TraceLayer>,
}

impl ActivationTrace {
    pub fn get(&self, name: &str) -> Option<&Matrix> {
        self.layers.iter().find(|l| l.name == name).map(|l| &l.value)
    }

    pub fn logits(&self) -> &Matrix {
        &self.layers.last().expect("trace has layers").value
    }
}

pub struct ForwardPass {
    pub tape: Tape,
    pub params: Vec<Var>,
    pub layers: Vec<(String, Level, Var)>,
    pub logits: Var,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Model {
    pub config: ModelConfig,
    pub feature_dim: usize,
    pub params: ParamSet,
}

fn bias(width: usize) -> Matrix {
    Matrix::zeros(1, width)
}

impl Model {
    /// Fresh Glorot-initialised weights and zero biases.
    pub fn new<R: Rng + ?Sized>(config: ModelConfig, feature_dim: usize, rng: &mut R) -> Result<Self> {
        config.validate()?;
        if feature_dim == 0 {
            return Err(Error::contract("feature width must be positive"));
        }
        let mut p = ParamSet::new();
        let mut width = feature_dim;
        for l in 1..=config.gnn_layers {
            match config.arch {
                Arch::Gcn => {
                    p.add(format!("gnn{l}.weight"), glorot_uniform(width, config.hidden_dim, rng));
                    p.add(format!("gnn{l}.bias"), bias(config.hidden_dim));
                }
                Arch::Gin => {
                    let h = config.hidden_dim;
                    if config.learnable_eps {
                        p.add(format!("gnn{l}.eps"), Matrix::zeros(1, 1));
                    }
                    p.add(format!("gnn{l}.mlp1.weight"), glorot_uniform(width, h, rng));
                    p.add(format!("gnn{l}.mlp1.bias"), bias(h));
                    p.add(format!("gnn{l}.mlp2.weight"), glorot_uniform(h, h, rng));
                    p.add(format!("gnn{l}.mlp2.bias"), bias(h));
                }
                Arch::Gat => {
                    let (heads, d) = (config.heads, config.hidden_dim);
                    p.add(format!("gnn{l}.weight"), glorot_uniform(width, heads * d, rng));
                    let att = |rng: &mut R| {
                        let m = glorot_uniform(heads, d, rng);
                        Matrix::from_vec(1, heads * d, m.into_vec())
                    };
                    p.add(format!("gnn{l}.att_src"), att(rng));
                    p.add(format!("gnn{l}.att_dst"), att(rng));
                    p.add(format!("gnn{l}.bias"), bias(heads * d));
                }
            }
            width = config.gnn_width();
        }
        for j in 1..=config.mlp_layers {
            let out = if j == config.mlp_layers { config.classes } else { config.mlp_hidden };
            p.add(format!("mlp{j}.weight"), glorot_uniform(width, out, rng));
            p.add(format!("mlp{j}.bias"), bias(out));
            width = out;
        }
        Ok(Self {
            config,
            feature_dim,
            params: p,
        })
    }

    fn var(&self, vars: &[Var], name: &str) -> Var {
        vars[self.params.index(name).unwrap_or_else(|| panic!("missing parameter {name}"))]
    }

    /// Records the forward pass on `tape` using `vars` (bound in parameter
    /// order). Returns the traced layers and the logits.
    pub fn build<R: Rng + ?Sized>(
        &self,
        tape: &mut Tape,
        vars: &[Var],
        batch: &Batch,
        train: bool,
        rng: &mut R,
    ) -> Result<(Vec<(String, Level, Var)>, Var)> {
        let c = &self.config;
        if batch.features.cols() != self.feature_dim {
            return Err(Error::contract(format!(
                "feature width {} does not match the model's input width {}",
                batch.features.cols(),
                self.feature_dim
            )));
        }
        let names = c.layer_names();
        let mut layers = Vec::with_capacity(names.len());
        let mut h = tape.constant(batch.features.clone());
        for l in 1..=c.gnn_layers {
            let out = match c.arch {
                Arch::Gcn => {
                    let w = self.var(vars, &format!("gnn{l}.weight"));
                    let b = self.var(vars, &format!("gnn{l}.bias"));
                    // Â(HW) = (ÂH)W; propagate whichever side is narrower
                    let z = if tape.value(h).cols() < tape.value(w).cols() {
                        let p = tape.propagate(batch.norm_adj.clone(), h)?;
                        tape.matmul(p, w)?
                    } else {
                        let hw = tape.matmul(h, w)?;
                        tape.propagate(batch.norm_adj.clone(), hw)?
                    };
                    let z = tape.add_bias(z, b)?;
                    tape.relu(z)
                }
                Arch::Gin => {
                    let nb = tape.propagate(batch.adj.clone(), h)?;
                    let mut agg = tape.add(nb, h)?;
                    if c.learnable_eps {
                        let eps = self.var(vars, &format!("gnn{l}.eps"));
                        let scaled = tape.scalar_mul(eps, h)?;
                        agg = tape.add(agg, scaled)?;
                    }
                    let mut z = agg;
                    for k in 1..=2 {
                        let w = self.var(vars, &format!("gnn{l}.mlp{k}.weight"));
                        let b = self.var(vars, &format!("gnn{l}.mlp{k}.bias"));
                        let y = tape.matmul(z, w)?;
                        let y = tape.add_bias(y, b)?;
                        z = tape.relu(y);
                    }
                    z
                }
                Arch::Gat => {
                    let w = self.var(vars, &format!("gnn{l}.weight"));
                    let a_src = self.var(vars, &format!("gnn{l}.att_src"));
                    let a_dst = self.var(vars, &format!("gnn{l}.att_dst"));
                    let b = self.var(vars, &format!("gnn{l}.bias"));
                    let p = tape.matmul(h, w)?;
                    let spec = AttentionSpec {
                        neighbors: batch.attention.clone(),
                        heads: c.heads,
                        slope: ATTENTION_SLOPE,
                    };
                    let z = tape.graph_attention(p, a_src, a_dst, spec)?;
                    let z = tape.add_bias(z, b)?;
                    tape.relu(z)
                }
            };
            layers.push((names[l - 1].clone(), Level::Node, out));
            h = tape.dropout(out, c.dropout, train, rng)?;
        }
        h = tape.segment_pool(h, batch.segments.clone(), c.pooling)?;
        layers.push(("x_global".into(), Level::Graph, h));
        for j in 1..=c.mlp_layers {
            let w = self.var(vars, &format!("mlp{j}.weight"));
            let b = self.var(vars, &format!("mlp{j}.bias"));
            let z = tape.matmul(h, w)?;
            let z = tape.add_bias(z, b)?;
            let name = names[c.gnn_layers + j].clone();
            if j == c.mlp_layers {
                layers.push((name, Level::Graph, z));
                return Ok((layers, z));
            }
            let a = tape.relu(z);
            layers.push((name, Level::Graph, a));
            h = tape.dropout(a, c.dropout, train, rng)?;
        }
        unreachable!("mlp_layers >= 1 is validated")
    }

    pub fn forward<R: Rng + ?Sized>(&self, batch: &Batch, train: bool, rng: &mut R) -> Result<ForwardPass> {
        let mut tape = Tape::new();
        let params = self.params.bind(&mut tape);
        let (layers, logits) = self.build(&mut tape, &params, batch, train, rng)?;
        Ok(ForwardPass {
            tape,
            params,
            layers,
            logits,
        })
    }

    /// Evaluation-mode forward (dropout off) with every layer captured.
    pub fn trace(&self, batch: &Batch) -> Result<ActivationTrace> {
        // eval mode draws nothing; any generator will do
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let pass = self.forward(batch, false, &mut rng)?;
        Ok(ActivationTrace {
            layers: pass
                .layers
                .iter()
                .map(|(name, level, v)| TraceLayer {
                    name: name.clone(),
                    level: *level,
                    value: pass.tape.value(*v).clone(),
                })
                .collect(),
        })
    }

    /// Class predictions (argmax of the logits, ties to the lower class).
    pub fn predict(&self, batch: &Batch) -> Result<Vec<usize>> {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let pass = self.forward(batch, false, &mut rng)?;
        Ok(argmax_rows(pass.tape.value(pass.logits)))
    }
}

pub fn argmax_rows(m: &Matrix) -> Vec<usize> {
    (0..m.rows())
        .map(|r| {
            let row = m.row(r);
            let mut best = 0;
            for (c, v) in row.iter().enumerate() {
                if *v > row[best] {
                    best = c;
                }
            }
            best
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gnn::config::Arch;
    use crate::graph::{make_grid3x3, make_house, FeatureSpec, Graph};
    use crate::nn::{check_gradients, glorot_uniform, DEFAULT_STEP};

    fn model(arch: Arch, seed: u64) -> Model {
        Model::new(ModelConfig::defaults(arch), 10, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap()
    }

    #[test]
    fn trace_has_the_documented_layers() {
        let spec = FeatureSpec::default();
        let batch = Batch::single(&make_house(), &spec).unwrap();
        for arch in Arch::ALL {
            let m = model(arch, 1);
            let t = m.trace(&batch).unwrap();
            let names: Vec<_> = t.layers.iter().map(|l| l.name.clone()).collect();
            assert_eq!(names, m.config.layer_names());
            assert_eq!(t.get("x_global").unwrap().cols(), m.config.gnn_width());
            assert_eq!(t.logits().shape(), (1, 2));
            let last_node = &t.layers[m.config.gnn_layers - 1].value;
            assert_eq!(last_node.rows(), 5);
        }
    }

    #[test]
    fn pooled_outputs_are_permutation_invariant() {
        let spec = FeatureSpec::default();
        let g = make_grid3x3();
        let perm = [4, 0, 8, 2, 6, 1, 3, 7, 5];
        let gp = g.permuted(&perm).unwrap();
        for arch in Arch::ALL {
            let m = model(arch, 2);
            let a = m.trace(&Batch::single(&g, &spec).unwrap()).unwrap();
            let b = m.trace(&Batch::single(&gp, &spec).unwrap()).unwrap();
            for layer in a.layers.iter().filter(|l| l.level == Level::Graph) {
                let other = b.get(&layer.name).unwrap();
                for (x, y) in layer.value.data().iter().zip(other.data()) {
                    assert!((x - y).abs() < 1e-12, "{arch} {}", layer.name);
                }
            }
        }
    }

    #[test]
    fn width_mismatch_is_a_contract_error() {
        let m = model(Arch::Gcn, 0);
        let spec = FeatureSpec {
            dim: 7,
            ..FeatureSpec::default()
        };
        let batch = Batch::single(&make_house(), &spec).unwrap();
        assert!(matches!(m.trace(&batch), Err(Error::Contract(_))));
    }

    #[test]
    fn x_global_is_the_pool_of_the_last_node_layer() {
        let spec = FeatureSpec::default();
        let batch = Batch::single(&make_house(), &spec).unwrap();
        let m = model(Arch::Gcn, 3);
        let t = m.trace(&batch).unwrap();
        let x4 = t.get("x4").unwrap();
        let pooled: Vec<f64> = (0..x4.cols())
            .map(|c| (0..x4.rows()).map(|r| x4.get(r, c)).fold(f64::NEG_INFINITY, f64::max))
            .collect();
        assert_eq!(t.get("x_global").unwrap().data(), pooled.as_slice());
    }

    #[test]
    fn gin_isolated_node_reduces_to_its_mlp() {
        // ε = 0 and no neighbours: layer 1 is MLP₂(h_v)
        let m = model(Arch::Gin, 4);
        let g = Graph::empty("k1", 1);
        let batch = Batch::single(&g, &FeatureSpec::default()).unwrap();
        let t = m.trace(&batch).unwrap();
        let p = &m.params;
        let h = batch.features.matmul(p.by_name("gnn1.mlp1.weight").unwrap()).unwrap();
        let relu_bias = |x: Matrix, b: &Matrix| {
            Matrix::from_vec(
                1,
                x.cols(),
                x.data().iter().zip(b.data()).map(|(a, b)| (a + b).max(0.0)).collect(),
            )
        };
        let h = relu_bias(h, p.by_name("gnn1.mlp1.bias").unwrap());
        let h = h.matmul(p.by_name("gnn1.mlp2.weight").unwrap()).unwrap();
        let h = relu_bias(h, p.by_name("gnn1.mlp2.bias").unwrap());
        for (a, b) in h.data().iter().zip(t.get("x1").unwrap().data()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    /// Zero biases put ReLUs exactly on their kink when an upstream row is
    /// all zeros; move to a generic point before differencing.
    fn randomize_biases(m: &mut Model, seed: u64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let names = m.params.names().to_vec();
        for (n, v) in names.iter().zip(m.params.values_mut()) {
            if n.ends_with("bias") {
                *v = glorot_uniform(1, v.cols(), &mut rng);
            }
        }
    }

    fn full_model_gradcheck(config: ModelConfig, max_entries: Option<usize>) -> f64 {
        let spec = FeatureSpec::default();
        let house = make_house().with_label(Some(1));
        let path = Graph::path(4).with_label(Some(0));
        let fh = spec.build(&house).unwrap();
        let fp = spec.build(&path).unwrap();
        let batch = Batch::new(&[&house, &path], &[&fh, &fp]).unwrap();
        let mut m = Model::new(config, 10, &mut ChaCha8Rng::seed_from_u64(11)).unwrap();
        randomize_biases(&mut m, 99);
        let r = check_gradients(
            m.params.values(),
            |tape, vars| {
                let mut rng = ChaCha8Rng::seed_from_u64(5);
                let (_, logits) = m.build(tape, vars, &batch, true, &mut rng)?;
                tape.softmax_cross_entropy(logits, &batch.labels)
            },
            DEFAULT_STEP,
            max_entries,
        )
        .unwrap();
        r.max_rel_error
    }

    #[test]
    fn small_models_pass_full_gradient_checks() {
        for arch in Arch::ALL {
            let mut c = ModelConfig::defaults(arch);
            c.hidden_dim = 4;
            c.mlp_hidden = 5;
            c.dropout = 0.2;
            if arch == Arch::Gat {
                c.heads = 2;
            }
            if arch == Arch::Gin {
                c.learnable_eps = true;
            }
            let err = full_model_gradcheck(c, None);
            assert!(err < 1e-4, "{arch}: {err}");
        }
    }
}
