//! Operator vocabulary and the cell-pair chromosome encoding.
//!
//! A chromosome holds two cell genomes, one for normal cells and one for
//! reduction cells. Each cell is an ordered list of blocks; each block combines
//! two `(operator, input)` genes whose outputs are summed. Gene inputs are
//! positional: for block `k`, input `0` and `1` are the outputs of the two
//! preceding cells and `2 + j` is the output of block `j < k` of the same cell.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// Candidate operations applied to a block input.
///
/// Codes are part of the wire format and must never be renumbered.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum OperatorKind {
    SkipConnect,
    MaxPool3x3,
    AvgPool3x3,
    SepConv3x3,
    SepConv5x5,
    DilConv3x3,
    DilConv5x5,
    InvConv3x3,
    InvConv5x5,
    Conv7x7,
}

impl OperatorKind {
    pub const ALL: [OperatorKind; 10] = [
        OperatorKind::SkipConnect,
        OperatorKind::MaxPool3x3,
        OperatorKind::AvgPool3x3,
        OperatorKind::SepConv3x3,
        OperatorKind::SepConv5x5,
        OperatorKind::DilConv3x3,
        OperatorKind::DilConv5x5,
        OperatorKind::InvConv3x3,
        OperatorKind::InvConv5x5,
        OperatorKind::Conv7x7,
    ];

    pub fn code(self) -> u8 {
        self as u8
    }

    pub fn from_code(code: u8) -> Option<Self> {
        Self::ALL.get(code as usize).copied()
    }

    /// Long name, e.g. `sep_conv_3x3`.
    pub fn name(self) -> &'static str {
        match self {
            OperatorKind::SkipConnect => "skip_connect",
            OperatorKind::MaxPool3x3 => "max_pool_3x3",
            OperatorKind::AvgPool3x3 => "avg_pool_3x3",
            OperatorKind::SepConv3x3 => "sep_conv_3x3",
            OperatorKind::SepConv5x5 => "sep_conv_5x5",
            OperatorKind::DilConv3x3 => "dil_conv_3x3",
            OperatorKind::DilConv5x5 => "dil_conv_5x5",
            OperatorKind::InvConv3x3 => "inv_conv_3x3",
            OperatorKind::InvConv5x5 => "inv_conv_5x5",
            OperatorKind::Conv7x7 => "conv_7x7",
        }
    }

    /// Short mnemonic used by the canonical text form, e.g. `sep3`.
    pub fn mnemonic(self) -> &'static str {
        match self {
            OperatorKind::SkipConnect => "skip",
            OperatorKind::MaxPool3x3 => "max3",
            OperatorKind::AvgPool3x3 => "avg3",
            OperatorKind::SepConv3x3 => "sep3",
            OperatorKind::SepConv5x5 => "sep5",
            OperatorKind::DilConv3x3 => "dil3",
            OperatorKind::DilConv5x5 => "dil5",
            OperatorKind::InvConv3x3 => "inv3",
            OperatorKind::InvConv5x5 => "inv5",
            OperatorKind::Conv7x7 => "conv7",
        }
    }

    pub fn from_mnemonic(s: &str) -> Option<Self> {
        Self::ALL.iter().copied().find(|op| op.mnemonic() == s)
    }

    /// Accepts either the short mnemonic or the long name.
    pub fn from_name(s: &str) -> Option<Self> {
        Self::ALL
            .iter()
            .copied()
            .find(|op| op.mnemonic() == s || op.name() == s)
    }

    /// True for operators that carry learnable convolution weights.
    pub fn is_conv(self) -> bool {
        !matches!(
            self,
            OperatorKind::SkipConnect | OperatorKind::MaxPool3x3 | OperatorKind::AvgPool3x3
        )
    }
}

impl fmt::Display for OperatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl Serialize for OperatorKind {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(self.name())
    }
}

impl<'de> Deserialize<'de> for OperatorKind {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        OperatorKind::from_name(&s).ok_or_else(|| D::Error::custom(format!("unknown operator `{s}`")))
    }
}

/// One `(operator, input)` pair. Serialized as `[op_code, input]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Gene {
    pub op: OperatorKind,
    pub input: usize,
}

impl Gene {
    pub fn new(op: OperatorKind, input: usize) -> Self {
        Self { op, input }
    }
}

impl Serialize for Gene {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        (self.op.code(), self.input).serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Gene {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let (code, input) = <(u8, usize)>::deserialize(deserializer)?;
        let op = OperatorKind::from_code(code)
            .ok_or_else(|| D::Error::custom(format!("unknown operator code {code}")))?;
        Ok(Gene { op, input })
    }
}

/// Number of valid input indices for a gene in block `block` (0-based).
pub fn input_range(block: usize) -> usize {
    block + 2
}

/// Two genes whose outputs are summed.
pub type Block = [Gene; 2];

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CellGenome {
    pub blocks: Vec<Block>,
}

impl CellGenome {
    pub fn new(blocks: Vec<Block>) -> Self {
        Self { blocks }
    }

    pub fn genes(&self) -> impl Iterator<Item = &Gene> {
        self.blocks.iter().flat_map(|b| b.iter())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CellKind {
    Normal,
    Reduction,
}

impl fmt::Display for CellKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CellKind::Normal => "normal",
            CellKind::Reduction => "reduction",
        })
    }
}

/// The topology part of an individual; this is what travels over the wire.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Genome {
    pub normal: CellGenome,
    pub reduction: CellGenome,
}

impl Genome {
    pub fn cell(&self, kind: CellKind) -> &CellGenome {
        match kind {
            CellKind::Normal => &self.normal,
            CellKind::Reduction => &self.reduction,
        }
    }

    pub fn cell_mut(&mut self, kind: CellKind) -> &mut CellGenome {
        match kind {
            CellKind::Normal => &mut self.normal,
            CellKind::Reduction => &mut self.reduction,
        }
    }

    pub fn genes(&self) -> impl Iterator<Item = &Gene> {
        self.normal.genes().chain(self.reduction.genes())
    }

    /// Number of distinct operators used anywhere in the genome.
    pub fn distinct_ops(&self) -> usize {
        let mut seen = [false; 10];
        for g in self.genes() {
            seen[g.op.code() as usize] = true;
        }
        seen.iter().filter(|&&s| s).count()
    }

    /// Canonical text, e.g. `normal|sep3@0+skip@1;... reduction|...`.
    pub fn encode_text(&self) -> String {
        format!(
            "normal|{} reduction|{}",
            encode_cell(&self.normal),
            encode_cell(&self.reduction)
        )
    }

    pub fn decode_text(s: &str, blocks: usize) -> Result<Self, DecodeError> {
        decode_text(s, blocks)
    }
}

impl fmt::Display for Genome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.encode_text())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Genesis {
    Init,
    Crossover,
    Mutation,
    Survivor,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Lineage {
    pub parents: Vec<String>,
    pub genesis: Genesis,
}

/// An individual: a genome plus identity and provenance.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Chromosome {
    pub id: String,
    pub genome: Genome,
    #[serde(default)]
    pub lineage: Option<Lineage>,
}

impl Chromosome {
    pub fn new(id: impl Into<String>, genome: Genome) -> Self {
        Self { id: id.into(), genome, lineage: None }
    }

    pub fn with_lineage(mut self, genesis: Genesis, parents: Vec<String>) -> Self {
        self.lineage = Some(Lineage { parents, genesis });
        self
    }

    pub fn validate(&self, blocks: usize) -> Result<(), Vec<Violation>> {
        validate(&self.genome, blocks)
    }
}

/// The set of operators genes are drawn from, plus the block count.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchSpace {
    pub blocks: usize,
    pub operators: Vec<OperatorKind>,
}

impl SearchSpace {
    pub fn new(blocks: usize) -> Self {
        Self { blocks, operators: OperatorKind::ALL.to_vec() }
    }

    pub fn with_operators(blocks: usize, operators: Vec<OperatorKind>) -> Self {
        Self { blocks, operators }
    }

    /// Draws a genome uniformly from the space.
    ///
    /// Draw order is fixed: normal cell first, then reduction; within a cell,
    /// block-major, and within a gene the operator before the input. Each gene
    /// consumes exactly two draws.
    pub fn random_genome<R: Rng + ?Sized>(&self, rng: &mut R) -> Genome {
        assert!(self.blocks >= 1, "blocks must be >= 1");
        assert!(!self.operators.is_empty(), "operator set must be non-empty");
        let normal = self.random_cell(rng);
        let reduction = self.random_cell(rng);
        Genome { normal, reduction }
    }

    fn random_cell<R: Rng + ?Sized>(&self, rng: &mut R) -> CellGenome {
        let blocks = (0..self.blocks)
            .map(|k| [self.random_gene(k, rng), self.random_gene(k, rng)])
            .collect();
        CellGenome { blocks }
    }

    fn random_gene<R: Rng + ?Sized>(&self, block: usize, rng: &mut R) -> Gene {
        let op = self.operators[rng.random_range(0..self.operators.len())];
        let input = rng.random_range(0..input_range(block));
        Gene { op, input }
    }

    /// Exact number of distinct genomes in this space.
    pub fn size(&self) -> u128 {
        let n = self.operators.len() as u128;
        let per_cell: u128 = (0..self.blocks)
            .map(|k| {
                let choices = n * input_range(k) as u128;
                choices * choices
            })
            .product();
        per_cell * per_cell
    }
}

/// Samples a chromosome over the full 10-operator vocabulary.
pub fn random_chromosome<R: Rng + ?Sized>(blocks: usize, rng: &mut R) -> Chromosome {
    Chromosome::new(String::new(), SearchSpace::new(blocks).random_genome(rng))
        .with_lineage(Genesis::Init, Vec::new())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GeneSlot {
    A,
    B,
}

impl fmt::Display for GeneSlot {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GeneSlot::A => "a",
            GeneSlot::B => "b",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ViolationReason {
    InputOutOfRange { input: usize, max: usize },
    BlockCountMismatch { expected: usize, found: usize },
}

impl fmt::Display for ViolationReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ViolationReason::InputOutOfRange { input, max } => {
                write!(f, "input out of range ({input} > {max})")
            }
            ViolationReason::BlockCountMismatch { expected, found } => {
                write!(f, "block count mismatch (expected {expected}, found {found})")
            }
        }
    }
}

/// One validity problem. Block-count violations carry no block/slot.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub cell: CellKind,
    pub block: Option<usize>,
    pub slot: Option<GeneSlot>,
    pub reason: ViolationReason,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.cell)?;
        if let Some(b) = self.block {
            write!(f, " block {b}")?;
        }
        if let Some(s) = self.slot {
            write!(f, " gene {s}")?;
        }
        write!(f, ": {}", self.reason)
    }
}

/// Checks positional input ranges and block counts, reporting every violation.
pub fn validate(genome: &Genome, blocks: usize) -> Result<(), Vec<Violation>> {
    let mut out = Vec::new();
    for kind in [CellKind::Normal, CellKind::Reduction] {
        let cell = genome.cell(kind);
        if cell.blocks.len() != blocks {
            out.push(Violation {
                cell: kind,
                block: None,
                slot: None,
                reason: ViolationReason::BlockCountMismatch {
                    expected: blocks,
                    found: cell.blocks.len(),
                },
            });
        }
        for (k, block) in cell.blocks.iter().enumerate() {
            for (slot, gene) in [GeneSlot::A, GeneSlot::B].into_iter().zip(block.iter()) {
                if gene.input >= input_range(k) {
                    out.push(Violation {
                        cell: kind,
                        block: Some(k),
                        slot: Some(slot),
                        reason: ViolationReason::InputOutOfRange {
                            input: gene.input,
                            max: input_range(k) - 1,
                        },
                    });
                }
            }
        }
    }
    if out.is_empty() {
        Ok(())
    } else {
        Err(out)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("at byte {position}: {message}")]
pub struct DecodeError {
    pub position: usize,
    pub message: String,
}

impl DecodeError {
    fn new(position: usize, message: impl Into<String>) -> Self {
        Self { position, message: message.into() }
    }
}

fn encode_cell(cell: &CellGenome) -> String {
    cell.blocks
        .iter()
        .map(|[a, b]| {
            format!("{}@{}+{}@{}", a.op.mnemonic(), a.input, b.op.mnemonic(), b.input)
        })
        .collect::<Vec<_>>()
        .join(";")
}

/// Parses the canonical text form produced by [`Genome::encode_text`].
pub fn decode_text(s: &str, blocks: usize) -> Result<Genome, DecodeError> {
    let (normal_part, reduction_part, reduction_offset) = match s.split_once(' ') {
        Some((n, r)) => (n, r, n.len() + 1),
        None => return Err(DecodeError::new(s.len(), "expected `normal|... reduction|...`")),
    };
    let normal = decode_cell(normal_part, "normal|", 0, blocks)?;
    let reduction = decode_cell(reduction_part, "reduction|", reduction_offset, blocks)?;
    Ok(Genome { normal, reduction })
}

fn decode_cell(
    s: &str,
    prefix: &str,
    offset: usize,
    blocks: usize,
) -> Result<CellGenome, DecodeError> {
    let body = s
        .strip_prefix(prefix)
        .ok_or_else(|| DecodeError::new(offset, format!("expected `{prefix}`")))?;
    let mut pos = offset + prefix.len();
    let mut out = Vec::new();
    for (k, block_text) in body.split(';').enumerate() {
        let (a_text, b_text) = block_text
            .split_once('+')
            .ok_or_else(|| DecodeError::new(pos, "expected `op@in+op@in`"))?;
        let a = decode_gene(a_text, pos, k)?;
        let b = decode_gene(b_text, pos + a_text.len() + 1, k)?;
        out.push([a, b]);
        pos += block_text.len() + 1;
    }
    if out.len() != blocks {
        return Err(DecodeError::new(
            offset,
            format!("block count mismatch (expected {blocks}, found {})", out.len()),
        ));
    }
    Ok(CellGenome { blocks: out })
}

fn decode_gene(s: &str, pos: usize, block: usize) -> Result<Gene, DecodeError> {
    let (op_text, in_text) = s
        .split_once('@')
        .ok_or_else(|| DecodeError::new(pos, format!("expected `op@in`, found `{s}`")))?;
    let op = OperatorKind::from_mnemonic(op_text)
        .ok_or_else(|| DecodeError::new(pos, format!("unknown mnemonic `{op_text}`")))?;
    let in_pos = pos + op_text.len() + 1;
    if in_text.is_empty() || !in_text.bytes().all(|c| c.is_ascii_digit()) {
        return Err(DecodeError::new(in_pos, format!("malformed input index `{in_text}`")));
    }
    let input: usize = in_text
        .parse()
        .map_err(|_| DecodeError::new(in_pos, format!("malformed input index `{in_text}`")))?;
    if input >= input_range(block) {
        return Err(DecodeError::new(
            in_pos,
            format!("input out of range ({input} > {})", input_range(block) - 1),
        ));
    }
    Ok(Gene { op, input })
}

impl FromStr for OperatorKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        OperatorKind::from_name(s).ok_or_else(|| format!("unknown operator `{s}`"))
    }
}
