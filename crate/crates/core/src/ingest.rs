//! Parsing, validation and phase filtering of stride-level gait records.
//!
//! Input is a comma-separated table with a header row. Columns are bound by
//! header name, so their order in the file is irrelevant:
//!
//! `obs_id, session, condition, phase, v, c, D, A, A_P, A_L, L, CoP, CAPA`
//!
//! Extra columns are ignored. Decimal separator is `.`.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Number of state-vector components.
pub const FEATURE_COUNT: usize = 9;

/// State-vector column names in their fixed order.
pub const FEATURE_NAMES: [&str; FEATURE_COUNT] = ["v", "c", "D", "A", "A_P", "A_L", "L", "CoP", "CAPA"];

/// Full CSV header in canonical (serialization) order.
pub const CSV_HEADER: [&str; 13] = [
    "obs_id",
    "session",
    "condition",
    "phase",
    "v",
    "c",
    "D",
    "A",
    "A_P",
    "A_L",
    "L",
    "CoP",
    "CAPA",
];

/// Occlusal condition of a recording. Closed set of six.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ConditionLabel {
    #[serde(rename = "ONL")]
    Onl,
    #[serde(rename = "OSL")]
    Osl,
    #[serde(rename = "OBL")]
    Obl,
    #[serde(rename = "OC2.5")]
    Oc2_5,
    #[serde(rename = "OC3")]
    Oc3,
    #[serde(rename = "OC3P")]
    Oc3p,
}

impl ConditionLabel {
    /// All conditions, in table order.
    pub const ALL: [ConditionLabel; 6] = [
        ConditionLabel::Onl,
        ConditionLabel::Osl,
        ConditionLabel::Obl,
        ConditionLabel::Oc2_5,
        ConditionLabel::Oc3,
        ConditionLabel::Oc3p,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ConditionLabel::Onl => "ONL",
            ConditionLabel::Osl => "OSL",
            ConditionLabel::Obl => "OBL",
            ConditionLabel::Oc2_5 => "OC2.5",
            ConditionLabel::Oc3 => "OC3",
            ConditionLabel::Oc3p => "OC3P",
        }
    }

    fn allowed() -> String {
        Self::ALL.map(Self::as_str).join(", ")
    }
}

impl fmt::Display for ConditionLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ConditionLabel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(Self::allowed)
    }
}

/// Recording session.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SessionLabel {
    M1,
    M2,
}

impl SessionLabel {
    pub const ALL: [SessionLabel; 2] = [SessionLabel::M1, SessionLabel::M2];

    pub fn as_str(self) -> &'static str {
        match self {
            SessionLabel::M1 => "M1",
            SessionLabel::M2 => "M2",
        }
    }
}

impl fmt::Display for SessionLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SessionLabel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "M1" => Ok(SessionLabel::M1),
            "M2" => Ok(SessionLabel::M2),
            _ => Err("M1, M2".to_string()),
        }
    }
}

/// Walking phase of a stride.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Phase {
    Linear,
    Turn,
}

impl Phase {
    pub fn as_str(self) -> &'static str {
        match self {
            Phase::Linear => "linear",
            Phase::Turn => "turn",
        }
    }
}

impl FromStr for Phase {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "linear" => Ok(Phase::Linear),
            "turn" => Ok(Phase::Turn),
            _ => Err("linear, turn".to_string()),
        }
    }
}

/// The nine-component state vector `(v, c, D, A, A_P, A_L, L, CoP, CAPA)`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct StateVector(pub [f64; FEATURE_COUNT]);

impl StateVector {
    pub fn v(&self) -> f64 {
        self.0[0]
    }
    pub fn c(&self) -> f64 {
        self.0[1]
    }
    pub fn step_time(&self) -> f64 {
        self.0[2]
    }
    pub fn asymmetry(&self) -> f64 {
        self.0[3]
    }
    pub fn support_asymmetry(&self) -> f64 {
        self.0[4]
    }
    pub fn length_asymmetry(&self) -> f64 {
        self.0[5]
    }
    pub fn step_length(&self) -> f64 {
        self.0[6]
    }
    pub fn cop(&self) -> f64 {
        self.0[7]
    }
    pub fn capa(&self) -> f64 {
        self.0[8]
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|x| x.is_finite())
    }
}

/// One stride-level record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaitObservation {
    pub obs_id: u64,
    pub session: SessionLabel,
    pub condition: ConditionLabel,
    pub phase: Phase,
    pub state: StateVector,
}

/// An ordered collection of observations plus a note on where it came from.
#[derive(Debug, Clone, PartialEq)]
pub struct GaitDataset {
    pub observations: Vec<GaitObservation>,
    pub provenance: String,
}

impl GaitDataset {
    pub fn len(&self) -> usize {
        self.observations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.observations.is_empty()
    }

    /// Rows belonging to one session, order preserved.
    pub fn session(&self, session: SessionLabel) -> GaitDataset {
        GaitDataset {
            observations: self
                .observations
                .iter()
                .filter(|o| o.session == session)
                .cloned()
                .collect(),
            provenance: format!("{} [session {}]", self.provenance, session),
        }
    }

    /// Writes the dataset in the canonical column order.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(CSV_HEADER)?;
        for o in &self.observations {
            let mut record = vec![
                o.obs_id.to_string(),
                o.session.to_string(),
                o.condition.to_string(),
                o.phase.as_str().to_string(),
            ];
            record.extend(o.state.0.iter().map(|x| x.to_string()));
            w.write_record(&record)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Parses a gait CSV. `provenance` is stored verbatim on the dataset.
///
/// Row numbers in errors are 1-based data rows (the header is row 0).
pub fn parse_dataset<R: Read>(source: R, provenance: &str) -> Result<GaitDataset> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(source);

    let headers = reader.headers()?.clone();
    if headers.is_empty() || headers.iter().all(str::is_empty) {
        return Err(Error::EmptyFile);
    }
    let positions: HashMap<&str, usize> = headers.iter().enumerate().map(|(i, h)| (h, i)).collect();
    let mut index = [0usize; 13];
    for (slot, name) in index.iter_mut().zip(CSV_HEADER) {
        *slot = *positions
            .get(name)
            .ok_or_else(|| Error::MissingColumn(name.to_string()))?;
    }

    let mut observations = Vec::new();
    let mut seen = HashSet::new();
    for (i, record) in reader.records().enumerate() {
        let record = record?;
        let row = i + 1;
        let field = |col: usize| record.get(index[col]).unwrap_or("");

        let id_text = field(0);
        let obs_id: u64 = id_text.parse().map_err(|_| Error::NonNumeric {
            row,
            column: "obs_id".into(),
            value: id_text.into(),
        })?;
        if !seen.insert(obs_id) {
            return Err(Error::DuplicateId { row, obs_id });
        }
        let session = parse_label(field(1), row, "session")?;
        let condition = parse_label(field(2), row, "condition")?;
        let phase = parse_label(field(3), row, "phase")?;

        let mut state = [0.0; FEATURE_COUNT];
        for (k, value) in state.iter_mut().enumerate() {
            let text = field(4 + k);
            *value = text
                .parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| Error::NonNumeric {
                    row,
                    column: FEATURE_NAMES[k].into(),
                    value: text.into(),
                })?;
        }

        observations.push(GaitObservation {
            obs_id,
            session,
            condition,
            phase,
            state: StateVector(state),
        });
    }

    if observations.is_empty() {
        return Err(Error::EmptyFile);
    }
    Ok(GaitDataset {
        observations,
        provenance: provenance.to_string(),
    })
}

fn parse_label<T: FromStr<Err = String>>(value: &str, row: usize, field: &'static str) -> Result<T> {
    value.parse().map_err(|allowed| Error::BadLabel {
        row,
        field,
        value: value.to_string(),
        allowed,
    })
}

/// Keeps only linear walking phases, preserving order.
pub fn filter_linear_phases(ds: GaitDataset) -> Result<GaitDataset> {
    let observations: Vec<_> = ds
        .observations
        .into_iter()
        .filter(|o| o.phase == Phase::Linear)
        .collect();
    if observations.is_empty() {
        return Err(Error::EmptyAfterFilter);
    }
    Ok(GaitDataset {
        observations,
        provenance: ds.provenance,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const HEADER: &str = "obs_id,session,condition,phase,v,c,D,A,A_P,A_L,L,CoP,CAPA\n";

    fn row(id: u64, cond: &str, phase: &str) -> String {
        format!("{id},M1,{cond},{phase},1.1,105,0.55,0.04,0.03,0.05,0.62,0.3,2.5\n")
    }

    fn parse(text: &str) -> Result<GaitDataset> {
        parse_dataset(text.as_bytes(), "test")
    }

    #[test]
    fn parses_two_rows_and_keeps_ids() {
        let text = format!("{HEADER}{}{}", row(7, "ONL", "linear"), row(3, "OC2.5", "turn"));
        let ds = parse(&text).unwrap();
        assert_eq!(ds.len(), 2);
        assert_eq!(ds.observations[0].obs_id, 7);
        assert_eq!(ds.observations[1].obs_id, 3);
        assert_eq!(ds.observations[1].condition, ConditionLabel::Oc2_5);
        assert_eq!(ds.observations[0].state.c(), 105.0);
        assert_eq!(ds.observations[0].state.capa(), 2.5);
    }

    #[test]
    fn column_order_is_irrelevant() {
        let text = "CAPA,CoP,L,A_L,A_P,A,D,c,v,phase,condition,session,obs_id\n\
                    9,8,7,6,5,4,3,2,1,linear,OSL,M2,11\n";
        let ds = parse(text).unwrap();
        let o = &ds.observations[0];
        assert_eq!(o.obs_id, 11);
        assert_eq!(o.session, SessionLabel::M2);
        assert_eq!(o.state.0, [1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0]);
    }

    #[test]
    fn missing_capa_column() {
        let text = "obs_id,session,condition,phase,v,c,D,A,A_P,A_L,L,CoP\n1,M1,ONL,linear,1,1,1,1,1,1,1,1\n";
        match parse(text) {
            Err(Error::MissingColumn(name)) => assert_eq!(name, "CAPA"),
            other => panic!("expected MissingColumn, got {other:?}"),
        }
    }

    #[test]
    fn unknown_condition_lists_allowed_labels() {
        let text = format!("{HEADER}{}", row(1, "OC4", "linear"));
        match parse(&text) {
            Err(Error::BadLabel {
                row, value, allowed, ..
            }) => {
                assert_eq!(row, 1);
                assert_eq!(value, "OC4");
                for label in ["ONL", "OSL", "OBL", "OC2.5", "OC3", "OC3P"] {
                    assert!(allowed.contains(label), "{allowed}");
                }
            }
            other => panic!("expected BadLabel, got {other:?}"),
        }
    }

    #[test]
    fn non_numeric_and_non_finite_fields() {
        let text = format!("{HEADER}1,M1,ONL,linear,fast,105,0.55,0.04,0.03,0.05,0.62,0.3,2.5\n");
        assert!(matches!(parse(&text), Err(Error::NonNumeric { row: 1, ref column, .. }) if column == "v"));
        let text = format!("{HEADER}1,M1,ONL,linear,1,105,NaN,0.04,0.03,0.05,0.62,0.3,2.5\n");
        assert!(matches!(parse(&text), Err(Error::NonNumeric { ref column, .. }) if column == "D"));
    }

    #[test]
    fn empty_inputs() {
        assert!(matches!(parse(""), Err(Error::EmptyFile)));
        assert!(matches!(parse(HEADER), Err(Error::EmptyFile)));
    }

    #[test]
    fn duplicate_ids_rejected() {
        let text = format!("{HEADER}{}{}", row(1, "ONL", "linear"), row(1, "OSL", "linear"));
        assert!(matches!(parse(&text), Err(Error::DuplicateId { row: 2, obs_id: 1 })));
    }

    #[test]
    fn filter_keeps_linear_rows_in_order() {
        let text = format!(
            "{HEADER}{}{}{}{}{}",
            row(1, "ONL", "linear"),
            row(2, "ONL", "turn"),
            row(3, "OSL", "linear"),
            row(4, "OSL", "turn"),
            row(5, "OBL", "linear"),
        );
        let ds = filter_linear_phases(parse(&text).unwrap()).unwrap();
        let ids: Vec<_> = ds.observations.iter().map(|o| o.obs_id).collect();
        assert_eq!(ids, [1, 3, 5]);
    }

    #[test]
    fn filter_all_linear_is_identity_and_all_turn_fails() {
        let text = format!("{HEADER}{}{}", row(1, "ONL", "linear"), row(2, "ONL", "linear"));
        let ds = parse(&text).unwrap();
        assert_eq!(filter_linear_phases(ds.clone()).unwrap(), ds);

        let text = format!("{HEADER}{}{}", row(1, "ONL", "turn"), row(2, "ONL", "turn"));
        assert!(matches!(
            filter_linear_phases(parse(&text).unwrap()),
            Err(Error::EmptyAfterFilter)
        ));
    }
}
