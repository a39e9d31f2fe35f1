//! Trial-log CSV: one row per click attempt, UTF-8, LF line endings.

use std::collections::HashMap;
use std::io::{Read, Write};

use super::trial::{Block, Point, SessionLog, TrialRecord};
use crate::error::ProtocolError;
use crate::TaskCondition;

pub const TRIAL_CSV_HEADER: [&str; 14] = [
    "participant",
    "block",
    "A",
    "W",
    "B",
    "session",
    "trial",
    "attempt",
    "t_ms",
    "x",
    "y",
    "cx",
    "cy",
    "hit",
];

/// Writes every attempt of every session. `t_ms` is rounded to whole
/// milliseconds; practice sessions are skipped.
pub fn write_trials_csv<W: Write>(out: W, logs: &[SessionLog]) -> Result<(), ProtocolError> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    w.write_record(TRIAL_CSV_HEADER).map_err(csv_err)?;
    for log in logs.iter().filter(|l| !l.practice) {
        for t in &log.trials {
            w.write_record([
                log.participant.clone(),
                log.block.code().to_string(),
                t.condition.distance.to_string(),
                t.condition.width.to_string(),
                t.condition.blur.to_string(),
                log.session.to_string(),
                t.trial_index.to_string(),
                t.attempt.to_string(),
                format!("{}", t.click_time.round() as i64),
                t.click_point.x.to_string(),
                t.click_point.y.to_string(),
                t.target_center.x.to_string(),
                t.target_center.y.to_string(),
                u8::from(t.hit).to_string(),
            ])
            .map_err(csv_err)?;
        }
    }
    w.flush()?;
    Ok(())
}

fn csv_err(e: csv::Error) -> ProtocolError {
    let line = e.position().map_or(0, |p| p.line());
    match e.into_kind() {
        csv::ErrorKind::Io(io) => ProtocolError::Io(io),
        other => ProtocolError::Schema {
            line,
            message: format!("{other:?}"),
        },
    }
}

/// Parses a trial log into sessions keyed by `(participant, block, session)`
/// in first-appearance order. Any schema violation fails the whole file.
pub fn read_trials_csv<R: Read>(input: R) -> Result<Vec<SessionLog>, ProtocolError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(input);
    let header = rdr.headers().map_err(csv_err)?.clone();
    if header.iter().ne(TRIAL_CSV_HEADER.iter().copied()) {
        return Err(ProtocolError::Schema {
            line: 1,
            message: format!("header must be `{}`", TRIAL_CSV_HEADER.join(",")),
        });
    }

    let mut sessions: Vec<SessionLog> = Vec::new();
    let mut index: HashMap<(String, Block, u32), usize> = HashMap::new();
    for record in rdr.records() {
        let record = record.map_err(csv_err)?;
        let line = record.position().map_or(0, |p| p.line());
        let schema = |message: String| ProtocolError::Schema { line, message };
        let field = |i: usize| record.get(i).unwrap_or_default();
        let num = |i: usize| -> Result<f64, ProtocolError> {
            field(i)
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| {
                    schema(format!(
                        "column `{}`: expected a number, got `{}`",
                        TRIAL_CSV_HEADER[i],
                        field(i)
                    ))
                })
        };
        let int = |i: usize| -> Result<u64, ProtocolError> {
            field(i).parse::<u64>().map_err(|_| {
                schema(format!(
                    "column `{}`: expected a non-negative integer, got `{}`",
                    TRIAL_CSV_HEADER[i],
                    field(i)
                ))
            })
        };

        let participant = field(0).to_string();
        if participant.is_empty() {
            return Err(schema("column `participant` is empty".into()));
        }
        let block: Block = field(1)
            .parse()
            .map_err(|e: ProtocolError| schema(e.to_string()))?;
        let condition =
            TaskCondition::new(num(2)?, num(3)?, num(4)?).map_err(|e| schema(e.to_string()))?;
        let session =
            u32::try_from(int(5)?).map_err(|_| schema("column `session` out of range".into()))?;
        let trial_index = int(6)? as usize;
        let attempt =
            u32::try_from(int(7)?).map_err(|_| schema("column `attempt` out of range".into()))?;
        if attempt == 0 {
            return Err(schema("column `attempt` is 1-based".into()));
        }
        let t_ms = field(8).parse::<i64>().map_err(|_| {
            schema(format!(
                "column `t_ms`: expected integer milliseconds, got `{}`",
                field(8)
            ))
        })?;
        let hit = match field(13) {
            "0" => false,
            "1" => true,
            other => {
                return Err(schema(format!(
                    "column `hit`: expected 0 or 1, got `{other}`"
                )))
            }
        };
        let trial = TrialRecord {
            condition,
            trial_index,
            click_time: t_ms as f64,
            click_point: Point::new(num(9)?, num(10)?),
            target_center: Point::new(num(11)?, num(12)?),
            hit,
            attempt,
        };

        match index.get(&(participant.clone(), block, session)) {
            Some(&i) if sessions[i].condition != condition => {
                return Err(schema(format!("session {session} mixes conditions")));
            }
            Some(&i) => sessions[i].trials.push(trial),
            None => {
                index.insert((participant.clone(), block, session), sessions.len());
                sessions.push(SessionLog {
                    participant,
                    block,
                    session,
                    condition,
                    trials: vec![trial],
                    practice: false,
                });
            }
        }
    }
    Ok(sessions)
}
