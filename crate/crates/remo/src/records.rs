//! Report output: blank-line-separated blocks of `key: value` lines.
//!
//! The `records` format is the machine-readable contract: identical runs
//! produce byte-identical output. The `text` format renders the same
//! blocks with a little decoration for reading.

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Text,
    Records,
}

impl OutputFormat {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "text" => Some(OutputFormat::Text),
            "records" => Some(OutputFormat::Records),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct Block {
    pairs: Vec<(String, String)>,
}

impl Block {
    pub fn new() -> Self {
        Block::default()
    }

    pub fn push(mut self, key: &str, value: impl Into<String>) -> Self {
        self.pairs.push((key.to_string(), value.into()));
        self
    }
}

#[derive(Debug, Clone, Default)]
pub struct Report {
    blocks: Vec<Block>,
}

impl Report {
    pub fn new() -> Self {
        Report::default()
    }

    pub fn add(&mut self, block: Block) {
        self.blocks.push(block);
    }

    pub fn render(&self, format: OutputFormat) -> String {
        let mut out = String::new();
        for (i, block) in self.blocks.iter().enumerate() {
            if i > 0 {
                out.push('\n');
                if format == OutputFormat::Text {
                    out.push_str("--\n");
                }
            }
            for (k, v) in &block.pairs {
                out.push_str(k);
                out.push_str(": ");
                out.push_str(v);
                out.push('\n');
            }
        }
        out
    }
}
