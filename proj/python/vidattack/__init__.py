"""Stream-degradation attacks on surveillance video and PSNR detector evaluation."""

from ._core import (
    DisplayTrace,
    Error,
    apply_trace,
    build_combined_trace,
    build_extended_freeze_trace,
    build_lowres_trace,
    build_replicate_trace,
    build_sff_trace,
    false_alarms,
    load_sequence,
    percentile,
    psnr,
    roc_auc,
    run_cli,
    save_sequence,
    score_video,
    simulate,
    synth,
)

__all__ = [
    "DisplayTrace",
    "Error",
    "apply_trace",
    "build_combined_trace",
    "build_extended_freeze_trace",
    "build_lowres_trace",
    "build_replicate_trace",
    "build_sff_trace",
    "false_alarms",
    "load_sequence",
    "percentile",
    "psnr",
    "roc_auc",
    "run_cli",
    "save_sequence",
    "score_video",
    "simulate",
    "synth",
]
