# Copyright 2026 The whisperconv Authors
# License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)
"""Normal-to-whispered speech conversion.

Audio crosses the boundary as 1-D float arrays plus a sample rate; feature
matrices are (frames, order) arrays of mel-cepstra.
"""

from __future__ import annotations

import os
from typing import Sequence

import numpy as np

from ._core import (  # noqa: F401
    AnalysisConfig,
    ConfigError,
    DecodeError,
    DimensionError,
    DivergenceError,
    EmptyInputError,
    IoError,
    ManifestError,
    ModelError,
    SelectionError,
    TrainingError,
    UnsupportedFormatError,
    WhisperconvError,
    __version__,
    analyze,
    copy_synthesis,
    convert,
    dsp_convert,
    dtw,
    load_model_info,
    mcd,
    mcd_path,
    read_wav as _read_wav,
    resample,
    run_cli,
    synthesize,
    version_text,
    voicing_score,
    write_wav,
)


def read_wav(path: str | os.PathLike) -> tuple[np.ndarray, int]:
    """Reads a wav file as (float64 samples, sample_rate)."""
    samples, rate = _read_wav(os.fspath(path))
    return np.asarray(samples, dtype=np.float64), rate


def train(
    manifest: str | os.PathLike,
    output: str | os.PathLike,
    model: str = "dnn",
    mode: str = "all",
    target: str | None = None,
    dataset: str | None = None,
    seed: int = 0,
    extra: Sequence[str] = (),
) -> None:
    """Trains a GMM or DNN model file for one data regime."""
    args = ["--seed", str(seed), "train", "--model", model, "--mode", mode,
            "--manifest", os.fspath(manifest), "-o", os.fspath(output)]
    if target:
        args += ["--target", target]
    if dataset:
        args += ["--dataset", dataset]
    args += list(extra)
    code = run_cli(args)
    if code != 0:
        raise WhisperconvError(f"training failed with exit code {code}")
