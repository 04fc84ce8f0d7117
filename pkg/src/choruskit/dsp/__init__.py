from .waveform import Waveform, load_wav, resample, save_wav, slice_line_audio
from .mfcc import (
    MfccConfig,
    cepstra_from_log_mel,
    compute_mfcc,
    fit_frames,
    load_matrix,
    mel_filterbank,
    save_matrix,
)
from .chords import ChordSymbol, chord_templates, estimate_chords

__all__ = [
    "ChordSymbol",
    "MfccConfig",
    "Waveform",
    "cepstra_from_log_mel",
    "chord_templates",
    "compute_mfcc",
    "estimate_chords",
    "fit_frames",
    "load_matrix",
    "load_wav",
    "mel_filterbank",
    "resample",
    "save_matrix",
    "save_wav",
    "slice_line_audio",
]
