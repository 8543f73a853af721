//! Decoding a genome into a primitive layer graph and counting its
//! parameters and FLOPs.
//!
//! Network layout: a 3x3 stem convolution, `cells` stacked cells, global
//! average pooling and one linear head. Reduction cells sit at indices
//! `cells / 3` and `2 * cells / 3` (none when `cells < 3`); the channel width
//! doubles entering each of them and their spatial output is `ceil(h / 2)`.
//!
//! Counting conventions: convolutions are bias-free and each is followed by a
//! batch norm with `2C` affine parameters; the head is a linear layer with
//! bias. FLOPs are `2 * MACs`; pooling, identity, additions, concatenations
//! and batch norms contribute nothing.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::search_space::{validate, CellKind, Gene, Genome, OperatorKind};

/// Training/evaluation budget and network scale used to rank architectures.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FidelityConfig {
    pub input_hw: (usize, usize),
    pub input_channels: usize,
    pub cells: usize,
    pub blocks: usize,
    pub init_channels: usize,
    pub epochs: usize,
    pub head_output_dim: usize,
    /// Expansion factor of the inverted-residual operators.
    pub inv_expansion: usize,
}

impl Default for FidelityConfig {
    fn default() -> Self {
        Self {
            input_hw: (84, 84),
            input_channels: 3,
            cells: 4,
            blocks: 4,
            init_channels: 16,
            epochs: 20,
            head_output_dim: 64,
            inv_expansion: 3,
        }
    }
}

impl FidelityConfig {
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        let checks = [
            ("fidelity.input_hw.0", self.input_hw.0),
            ("fidelity.input_hw.1", self.input_hw.1),
            ("fidelity.input_channels", self.input_channels),
            ("fidelity.cells", self.cells),
            ("fidelity.blocks", self.blocks),
            ("fidelity.init_channels", self.init_channels),
            ("fidelity.epochs", self.epochs),
            ("fidelity.head_output_dim", self.head_output_dim),
            ("fidelity.inv_expansion", self.inv_expansion),
        ];
        for (name, v) in checks {
            if v < 1 {
                out.push(format!("{name} ≥ 1"));
            }
        }
        out
    }

    /// Cell indices that are reduction cells.
    pub fn reduction_indices(&self) -> Vec<usize> {
        if self.cells < 3 {
            return Vec::new();
        }
        let mut idx = vec![self.cells / 3, 2 * self.cells / 3];
        idx.dedup();
        idx
    }

    pub fn cell_kind(&self, index: usize) -> CellKind {
        if self.reduction_indices().contains(&index) {
            CellKind::Reduction
        } else {
            CellKind::Normal
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LayerKind {
    Conv,
    DepthwiseConv,
    Batchnorm,
    Pool,
    Identity,
    Add,
    Concat,
    GlobalAvgPool,
    Linear,
}

/// A primitive layer. Spatial sizes are `(height, width)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Layer {
    pub kind: LayerKind,
    pub in_channels: usize,
    pub out_channels: usize,
    pub kernel: usize,
    pub stride: usize,
    pub dilation: usize,
    pub in_hw: (usize, usize),
    pub out_hw: (usize, usize),
    /// Human-readable origin, e.g. `cell1/block0/a/sep_conv_3x3`.
    pub scope: String,
}

impl Layer {
    pub fn params(&self) -> u64 {
        let k2 = (self.kernel * self.kernel) as u64;
        let (cin, cout) = (self.in_channels as u64, self.out_channels as u64);
        match self.kind {
            LayerKind::Conv => k2 * cin * cout,
            LayerKind::DepthwiseConv => k2 * cin,
            LayerKind::Batchnorm => 2 * cout,
            LayerKind::Linear => cin * cout + cout,
            _ => 0,
        }
    }

    pub fn macs(&self) -> u64 {
        let k2 = (self.kernel * self.kernel) as u64;
        let (cin, cout) = (self.in_channels as u64, self.out_channels as u64);
        let area = (self.out_hw.0 * self.out_hw.1) as u64;
        match self.kind {
            LayerKind::Conv => k2 * cin * cout * area,
            LayerKind::DepthwiseConv => k2 * cin * area,
            LayerKind::Linear => cin * cout,
            _ => 0,
        }
    }
}

/// Summary of one cell in a built graph.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CellShape {
    pub kind: CellKind,
    pub width: usize,
    pub out_hw: (usize, usize),
    pub out_channels: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LayerGraph {
    pub layers: Vec<Layer>,
    pub cells: Vec<CellShape>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArchStats {
    pub params: u64,
    pub flops: u64,
}

impl ArchStats {
    pub fn params_m(&self) -> f64 {
        self.params as f64 / 1e6
    }

    pub fn flops_g(&self) -> f64 {
        self.flops as f64 / 1e9
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MetricsError {
    #[error("invalid genome: {0}")]
    InvalidGenome(String),
    #[error("invalid fidelity: {0}")]
    InvalidFidelity(String),
    #[error("spatial size collapsed to zero at cell {cell}")]
    SpatialCollapse { cell: usize },
    #[error("inconsistent graph at `{scope}`: {reason}")]
    Inconsistent { scope: String, reason: String },
}

fn halve(hw: (usize, usize)) -> (usize, usize) {
    (hw.0.div_ceil(2), hw.1.div_ceil(2))
}

fn strided(hw: (usize, usize), stride: usize) -> (usize, usize) {
    (hw.0.div_ceil(stride), hw.1.div_ceil(stride))
}

struct Builder {
    layers: Vec<Layer>,
}

impl Builder {
    #[allow(clippy::too_many_arguments)]
    fn push(
        &mut self,
        kind: LayerKind,
        cin: usize,
        cout: usize,
        kernel: usize,
        stride: usize,
        dilation: usize,
        in_hw: (usize, usize),
        scope: &str,
    ) -> (usize, usize) {
        let out_hw = strided(in_hw, stride);
        self.layers.push(Layer {
            kind,
            in_channels: cin,
            out_channels: cout,
            kernel,
            stride,
            dilation,
            in_hw,
            out_hw,
            scope: scope.to_string(),
        });
        out_hw
    }

    fn conv_bn(
        &mut self,
        cin: usize,
        cout: usize,
        kernel: usize,
        stride: usize,
        in_hw: (usize, usize),
        scope: &str,
    ) -> (usize, usize) {
        let hw = self.push(LayerKind::Conv, cin, cout, kernel, stride, 1, in_hw, scope);
        self.push(LayerKind::Batchnorm, cout, cout, 1, 1, 1, hw, scope)
    }

    /// Depthwise k x k followed by pointwise 1x1 and batch norm.
    fn dw_unit(
        &mut self,
        c: usize,
        kernel: usize,
        stride: usize,
        dilation: usize,
        in_hw: (usize, usize),
        scope: &str,
    ) -> (usize, usize) {
        let hw = self.push(LayerKind::DepthwiseConv, c, c, kernel, stride, dilation, in_hw, scope);
        let hw = self.push(LayerKind::Conv, c, c, 1, 1, 1, hw, scope);
        self.push(LayerKind::Batchnorm, c, c, 1, 1, 1, hw, scope)
    }

    fn op(
        &mut self,
        op: OperatorKind,
        c: usize,
        stride: usize,
        expansion: usize,
        in_hw: (usize, usize),
        scope: &str,
    ) -> (usize, usize) {
        match op {
            OperatorKind::SkipConnect if stride == 1 => {
                self.push(LayerKind::Identity, c, c, 1, 1, 1, in_hw, scope)
            }
            OperatorKind::SkipConnect => self.conv_bn(c, c, 1, stride, in_hw, scope),
            OperatorKind::MaxPool3x3 | OperatorKind::AvgPool3x3 => {
                self.push(LayerKind::Pool, c, c, 3, stride, 1, in_hw, scope)
            }
            OperatorKind::SepConv3x3 | OperatorKind::SepConv5x5 => {
                let k = if op == OperatorKind::SepConv3x3 { 3 } else { 5 };
                let hw = self.dw_unit(c, k, stride, 1, in_hw, scope);
                self.dw_unit(c, k, 1, 1, hw, scope)
            }
            OperatorKind::DilConv3x3 | OperatorKind::DilConv5x5 => {
                let k = if op == OperatorKind::DilConv3x3 { 3 } else { 5 };
                self.dw_unit(c, k, stride, 2, in_hw, scope)
            }
            OperatorKind::InvConv3x3 | OperatorKind::InvConv5x5 => {
                let k = if op == OperatorKind::InvConv3x3 { 3 } else { 5 };
                let wide = expansion * c;
                let hw = self.conv_bn(c, wide, 1, 1, in_hw, scope);
                let hw = self.push(LayerKind::DepthwiseConv, wide, wide, k, stride, 1, hw, scope);
                let hw = self.push(LayerKind::Batchnorm, wide, wide, 1, 1, 1, hw, scope);
                self.conv_bn(wide, c, 1, 1, hw, scope)
            }
            OperatorKind::Conv7x7 => self.conv_bn(c, c, 7, stride, in_hw, scope),
        }
    }
}

/// Decodes `genome` into primitive layers at fidelity `f`.
pub fn build_graph(genome: &Genome, f: &FidelityConfig) -> Result<LayerGraph, MetricsError> {
    let problems = f.violations();
    if !problems.is_empty() {
        return Err(MetricsError::InvalidFidelity(problems.join("; ")));
    }
    if let Err(v) = validate(genome, f.blocks) {
        let msg = v.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; ");
        return Err(MetricsError::InvalidGenome(msg));
    }

    let mut b = Builder { layers: Vec::new() };
    let stem_hw = b.conv_bn(f.input_channels, f.init_channels, 3, 1, f.input_hw, "stem");

    // (channels, spatial) of the two most recent cell outputs.
    let mut prev_prev = (f.init_channels, stem_hw);
    let mut prev = (f.init_channels, stem_hw);
    let mut width = f.init_channels;
    let mut cells = Vec::with_capacity(f.cells);

    for index in 0..f.cells {
        let kind = f.cell_kind(index);
        if kind == CellKind::Reduction {
            width *= 2;
        }
        let scope = format!("cell{index}");
        let cell_in_hw = prev.1;
        if cell_in_hw.0 == 0 || cell_in_hw.1 == 0 {
            return Err(MetricsError::SpatialCollapse { cell: index });
        }

        // Preprocess both inputs to `width` channels at the spatial size of `prev`.
        let mut inputs: Vec<(usize, (usize, usize))> = Vec::with_capacity(2 + f.blocks);
        for (slot, (ch, hw)) in [prev_prev, prev].into_iter().enumerate() {
            let stride = if hw.0 > cell_in_hw.0 || hw.1 > cell_in_hw.1 { 2 } else { 1 };
            let out = b.conv_bn(ch, width, 1, stride, hw, &format!("{scope}/pre{slot}"));
            if out != cell_in_hw {
                return Err(MetricsError::Inconsistent {
                    scope: format!("{scope}/pre{slot}"),
                    reason: format!("spatial {out:?} does not match {cell_in_hw:?}"),
                });
            }
            inputs.push((width, out));
        }

        let out_hw = match kind {
            CellKind::Normal => cell_in_hw,
            CellKind::Reduction => halve(cell_in_hw),
        };
        let cell_genome = genome.cell(kind);
        for (k, block) in cell_genome.blocks.iter().enumerate() {
            let block_scope = format!("{scope}/block{k}");
            for (slot, gene) in ["a", "b"].iter().zip(block.iter()) {
                let Gene { op, input } = *gene;
                let (_, in_hw) = inputs[input];
                let stride = if kind == CellKind::Reduction && input < 2 { 2 } else { 1 };
                let hw = b.op(op, width, stride, f.inv_expansion, in_hw, &format!("{block_scope}/{slot}/{}", op.name()));
                if hw != out_hw {
                    return Err(MetricsError::Inconsistent {
                        scope: block_scope,
                        reason: format!("operand spatial {hw:?} does not match {out_hw:?}"),
                    });
                }
            }
            b.push(LayerKind::Add, width, width, 1, 1, 1, out_hw, &block_scope);
            inputs.push((width, out_hw));
        }
        let out_channels = width * f.blocks;
        b.push(LayerKind::Concat, out_channels, out_channels, 1, 1, 1, out_hw, &scope);
        if out_hw.0 == 0 || out_hw.1 == 0 {
            return Err(MetricsError::SpatialCollapse { cell: index });
        }
        cells.push(CellShape { kind, width, out_hw, out_channels });
        prev_prev = prev;
        prev = (out_channels, out_hw);
    }

    let (ch, hw) = prev;
    b.layers.push(Layer {
        kind: LayerKind::GlobalAvgPool,
        in_channels: ch,
        out_channels: ch,
        kernel: 1,
        stride: 1,
        dilation: 1,
        in_hw: hw,
        out_hw: (1, 1),
        scope: "head/pool".into(),
    });
    b.push(LayerKind::Linear, ch, f.head_output_dim, 1, 1, 1, (1, 1), "head/linear");

    Ok(LayerGraph { layers: b.layers, cells })
}

pub fn count_params(graph: &LayerGraph) -> u64 {
    graph.layers.iter().map(Layer::params).sum()
}

pub fn count_flops(graph: &LayerGraph) -> u64 {
    2 * graph.layers.iter().map(Layer::macs).sum::<u64>()
}

pub fn arch_stats(genome: &Genome, f: &FidelityConfig) -> Result<ArchStats, MetricsError> {
    let graph = build_graph(genome, f)?;
    Ok(ArchStats { params: count_params(&graph), flops: count_flops(&graph) })
}
