//! Append-only cost accounting for backend calls.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::Usage;

/// Per-1K-token USD prices for one model.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct ModelPrice {
    pub input_per_1k: f64,
    pub output_per_1k: f64,
}

/// Prices by model id. Unlisted models cost nothing, which is exactly what
/// replay fixtures should report.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PriceTable(pub BTreeMap<String, ModelPrice>);

impl PriceTable {
    pub fn price(&self, model_id: &str) -> ModelPrice {
        self.0.get(model_id).copied().unwrap_or_default()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LedgerEntry {
    pub request_key: String,
    pub model_id: String,
    pub input_tokens: u64,
    pub output_tokens: u64,
    pub cost_usd: f64,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct CostLedger {
    prices: PriceTable,
    entries: Vec<LedgerEntry>,
}

impl CostLedger {
    pub fn new(prices: PriceTable) -> Self {
        Self {
            prices,
            entries: Vec::new(),
        }
    }

    pub fn record(&mut self, request_key: &str, model_id: &str, usage: Usage) -> &LedgerEntry {
        let price = self.prices.price(model_id);
        let cost_usd = (usage.input_tokens as f64 * price.input_per_1k
            + usage.output_tokens as f64 * price.output_per_1k)
            / 1000.0;
        self.entries.push(LedgerEntry {
            request_key: request_key.to_string(),
            model_id: model_id.to_string(),
            input_tokens: usage.input_tokens,
            output_tokens: usage.output_tokens,
            cost_usd,
        });
        self.entries.last().expect("entry just pushed")
    }

    pub fn entries(&self) -> &[LedgerEntry] {
        &self.entries
    }

    pub fn total_cost_usd(&self) -> f64 {
        self.entries.iter().map(|e| e.cost_usd).sum()
    }
}
