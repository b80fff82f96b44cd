//! Machine-readable run report (`--json`).

use std::path::Path;

use serde_json::json;

#[derive(Default)]
pub struct Timings {
    pub parse_ms: f64,
    pub eval_ms: f64,
    pub analyze_ms: f64,
    pub solve_ms: f64,
}

#[derive(Default)]
pub struct ReportCounters {
    pub rule_firings: u64,
    pub app_firings: u64,
    pub cache_hits: u64,
    pub stubs_emitted: u64,
    pub analysis_nodes: u64,
}

pub struct RunReport {
    pub path: String,
    pub mode: &'static str,
    pub result: Option<String>,
    pub residual: Option<String>,
    pub fragments: Option<usize>,
    pub verdicts: Vec<(String, String)>,
    pub timings: Timings,
    pub counters: ReportCounters,
}

impl RunReport {
    pub fn new(path: &Path, mode: &'static str) -> Self {
        RunReport {
            path: path.display().to_string(),
            mode,
            result: None,
            residual: None,
            fragments: None,
            verdicts: Vec::new(),
            timings: Timings::default(),
            counters: ReportCounters::default(),
        }
    }

    pub fn to_json(&self) -> String {
        let verdicts: Vec<_> = self
            .verdicts
            .iter()
            .map(|(what, verdict)| json!({ "check": what, "verdict": verdict }))
            .collect();
        json!({
            "path": self.path,
            "mode": self.mode,
            "result": self.result,
            "residual": self.residual,
            "fragments": self.fragments,
            "verdicts": verdicts,
            "timings_ms": {
                "parse": self.timings.parse_ms,
                "eval": self.timings.eval_ms,
                "analyze": self.timings.analyze_ms,
                "solve": self.timings.solve_ms,
            },
            "counters": {
                "rule_firings": self.counters.rule_firings,
                "app_firings": self.counters.app_firings,
                "cache_hits": self.counters.cache_hits,
                "stubs_emitted": self.counters.stubs_emitted,
                "analysis_nodes": self.counters.analysis_nodes,
            },
        })
        .to_string()
    }
}
