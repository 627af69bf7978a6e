//! Readiness questions, severities, and the [`Finding`] record every check
//! emits.

use serde::{Deserialize, Serialize};
use std::fmt;

/// Readiness band. `A` is the most ready.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Band {
    None,
    C,
    B,
    A,
}

impl fmt::Display for Band {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Band::None => write!(f, "none"),
            Band::C => write!(f, "C"),
            Band::B => write!(f, "B"),
            Band::A => write!(f, "A"),
        }
    }
}

/// The sixteen readiness questions tracked in a report.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Question {
    C1,
    C2,
    C3,
    C4,
    B3,
    B4,
    B5,
    B6,
    B7,
    A1,
    A2,
    A3,
    A4,
    A5,
    A6,
    A7,
}

impl Question {
    pub const ALL: [Question; 16] = [
        Question::C1,
        Question::C2,
        Question::C3,
        Question::C4,
        Question::B3,
        Question::B4,
        Question::B5,
        Question::B6,
        Question::B7,
        Question::A1,
        Question::A2,
        Question::A3,
        Question::A4,
        Question::A5,
        Question::A6,
        Question::A7,
    ];

    pub fn id(&self) -> &'static str {
        match self {
            Question::C1 => "C1",
            Question::C2 => "C2",
            Question::C3 => "C3",
            Question::C4 => "C4",
            Question::B3 => "B3",
            Question::B4 => "B4",
            Question::B5 => "B5",
            Question::B6 => "B6",
            Question::B7 => "B7",
            Question::A1 => "A1",
            Question::A2 => "A2",
            Question::A3 => "A3",
            Question::A4 => "A4",
            Question::A5 => "A5",
            Question::A6 => "A6",
            Question::A7 => "A7",
        }
    }

    pub fn parse(s: &str) -> Option<Question> {
        Question::ALL.iter().copied().find(|q| q.id() == s)
    }

    pub fn band(&self) -> Band {
        match self {
            Question::C1 | Question::C2 | Question::C3 | Question::C4 => Band::C,
            Question::B3 | Question::B4 | Question::B5 | Question::B6 | Question::B7 => Band::B,
            _ => Band::A,
        }
    }

    /// Questions answered by automated checks. The rest are organizational
    /// and can only be attested.
    pub fn is_computed(&self) -> bool {
        matches!(
            self,
            Question::B4
                | Question::B5
                | Question::B7
                | Question::A1
                | Question::A2
                | Question::A3
                | Question::A4
                | Question::A5
                | Question::A6
        )
    }
}

impl fmt::Display for Question {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.id())
    }
}

/// Severity of a finding. Orderable so roll-ups can take the maximum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Info,
    Warn,
    Fail,
}

/// One detected issue: which question it bears on, how severe it is, and
/// the evidence backing it (row indices, bucket indices, statistics).
#[derive(Debug, Clone, Serialize)]
pub struct Finding {
    pub question: Question,
    pub severity: Severity,
    pub code: String,
    pub message: String,
    pub evidence: serde_json::Value,
    #[serde(rename = "chart")]
    pub chart_ref: Option<String>,
}

impl Finding {
    /// Build a finding. Fail severity requires non-empty evidence.
    pub fn new(
        question: Question,
        severity: Severity,
        code: &str,
        message: impl Into<String>,
        evidence: serde_json::Value,
    ) -> Finding {
        if severity == Severity::Fail {
            let empty = match &evidence {
                serde_json::Value::Object(m) => m.is_empty(),
                serde_json::Value::Null => true,
                _ => false,
            };
            assert!(!empty, "fail finding {code} requires evidence");
        }
        Finding {
            question,
            severity,
            code: code.to_string(),
            message: message.into(),
            evidence,
            chart_ref: None,
        }
    }

    pub fn with_chart(mut self, chart_id: &str) -> Finding {
        self.chart_ref = Some(chart_id.to_string());
        self
    }

    /// The column or series this finding is about, when recorded.
    pub fn subject(&self) -> &str {
        self.evidence
            .get("column")
            .and_then(|v| v.as_str())
            .unwrap_or("")
    }
}

/// Deterministic merge order for findings from independent checks.
pub fn sort_findings(findings: &mut [Finding]) {
    findings.sort_by(|a, b| {
        let ka = (a.question, a.subject().to_string(), a.code.clone());
        let kb = (b.question, b.subject().to_string(), b.code.clone());
        ka.cmp(&kb).then_with(|| a.message.cmp(&b.message))
    });
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn question_band_and_roundtrip() {
        assert_eq!(Question::B7.band(), Band::B);
        assert_eq!(Question::parse("A6"), Some(Question::A6));
        assert_eq!(Question::parse("B1"), None);
        assert!(Question::A7.band() == Band::A && !Question::A7.is_computed());
        assert_eq!(Question::ALL.len(), 16);
    }

    #[test]
    fn severity_ordering() {
        assert!(Severity::Fail > Severity::Warn);
        assert!(Severity::Warn > Severity::Info);
    }

    #[test]
    #[should_panic(expected = "requires evidence")]
    fn fail_without_evidence_panics() {
        let _ = Finding::new(
            Question::B5,
            Severity::Fail,
            "x",
            "no evidence",
            serde_json::json!({}),
        );
    }
}
