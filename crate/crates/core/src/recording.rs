use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::Matrix;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RecordingError {
    #[error("sample rate must be positive and finite, got {0}")]
    InvalidSampleRate(f64),
    #[error("{names} channel names for {channels} channels")]
    ChannelNameCount { names: usize, channels: usize },
    #[error("window {start}..{end} outside 0..{samples}")]
    WindowOutOfRange {
        start: usize,
        end: usize,
        samples: usize,
    },
}

/// Multichannel time series: one row of `data` per channel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Recording {
    data: Matrix,
    sample_rate: f64,
    channel_names: Option<Vec<String>>,
}

impl Recording {
    pub fn new(data: Matrix, sample_rate: f64) -> Result<Self, RecordingError> {
        if !(sample_rate.is_finite() && sample_rate > 0.0) {
            return Err(RecordingError::InvalidSampleRate(sample_rate));
        }
        Ok(Self {
            data,
            sample_rate,
            channel_names: None,
        })
    }

    pub fn with_channel_names(mut self, names: Vec<String>) -> Result<Self, RecordingError> {
        if names.len() != self.channels() {
            return Err(RecordingError::ChannelNameCount {
                names: names.len(),
                channels: self.channels(),
            });
        }
        self.channel_names = Some(names);
        Ok(self)
    }

    #[inline]
    pub fn channels(&self) -> usize {
        self.data.rows()
    }

    #[inline]
    pub fn samples(&self) -> usize {
        self.data.cols()
    }

    #[inline]
    pub fn sample_rate(&self) -> f64 {
        self.sample_rate
    }

    #[inline]
    pub fn data(&self) -> &Matrix {
        &self.data
    }

    pub fn into_data(self) -> Matrix {
        self.data
    }

    #[inline]
    pub fn channel(&self, i: usize) -> &[f64] {
        self.data.row(i)
    }

    pub fn channel_names(&self) -> Option<&[String]> {
        self.channel_names.as_deref()
    }

    pub fn duration_s(&self) -> f64 {
        self.samples() as f64 / self.sample_rate
    }

    /// Same recording with its samples replaced; names and rate carry over.
    pub fn with_data(&self, data: Matrix) -> Recording {
        let channel_names = self
            .channel_names
            .clone()
            .filter(|n| n.len() == data.rows());
        Recording {
            data,
            sample_rate: self.sample_rate,
            channel_names,
        }
    }

    /// Samples `start..end` of every channel.
    pub fn window(&self, start: usize, end: usize) -> Result<Recording, RecordingError> {
        if start >= end || end > self.samples() {
            return Err(RecordingError::WindowOutOfRange {
                start,
                end,
                samples: self.samples(),
            });
        }
        let mut out = Matrix::zeros(self.channels(), end - start);
        for i in 0..self.channels() {
            out.row_mut(i).copy_from_slice(&self.channel(i)[start..end]);
        }
        Ok(self.with_data(out))
    }
}
