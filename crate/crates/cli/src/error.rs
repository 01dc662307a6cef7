use std::process::ExitCode;

use foodscape::bn::BnError;
use foodscape::data::{DataError, TimeSlot};
use foodscape::geo::GeoError;
use foodscape::kde::KdeError;
use foodscape::synth::SynthError;

/// Failures sorted by who has to act: bad input (exit 2) or data that does
/// not support the requested analysis (exit 1).
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Infeasible(String),
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        match self {
            CliError::Input(_) => ExitCode::from(2),
            CliError::Infeasible(_) => ExitCode::from(1),
        }
    }

    pub fn io(path: &std::path::Path, err: std::io::Error) -> CliError {
        CliError::Input(format!("{}: {err}", path.display()))
    }

    /// Attaches the slot (and category, if any) a KDE step was running for.
    pub fn kde(err: KdeError, context: &str) -> CliError {
        let msg = format!("{context}: {err}");
        match err {
            KdeError::EmptySample
            | KdeError::TooFewPoints { .. }
            | KdeError::DegenerateSample
            | KdeError::GridTooLarge { .. } => CliError::Infeasible(msg),
            KdeError::InvalidBandwidth(_)
            | KdeError::InvalidCandidates(_)
            | KdeError::CellTooCoarse { .. }
            | KdeError::InvalidQuantile(_) => CliError::Input(msg),
        }
    }

    pub fn bn(err: BnError, slot: TimeSlot) -> CliError {
        let msg = format!("{slot}: {err}");
        match err {
            BnError::EmptyWindow { .. } | BnError::InsufficientRows { .. } => {
                CliError::Infeasible(msg)
            }
            _ => CliError::Input(msg),
        }
    }
}

impl From<DataError> for CliError {
    fn from(err: DataError) -> Self {
        CliError::Input(err.to_string())
    }
}

impl From<GeoError> for CliError {
    fn from(err: GeoError) -> Self {
        CliError::Input(err.to_string())
    }
}

impl From<SynthError> for CliError {
    fn from(err: SynthError) -> Self {
        CliError::Input(err.to_string())
    }
}
