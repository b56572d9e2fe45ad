"""Write and read path ensembles.

Binary layout, all little-endian::

    magic            10 bytes  b"FELLERSIM1"
    header           struct HEADER (version, counts, seed, dt, horizon,
                     truncation rate, record stride, block size, codes)
    times            n_times float64
    values           n_paths * n_times * n_banks float64, C order
    hit_times        n_paths * n_banks float64, NaN if no hit
    system_hits      n_paths float64, NaN if no hit
"""
import struct
from pathlib import Path
from typing import BinaryIO, TextIO, Union

import numpy as np

from .const import (
    BINARY_MAGIC,
    BINARY_VERSION,
    KINDS,
    PATH_COLUMNS,
    RECORDS,
    SCHEMES,
    TRUNCATION_WARN_RATE,
)
from .errors import ValidationError
from .sde import PathEnsemble, SimConfig

HEADER = struct.Struct("<HIIIQdddIIBBB")
FLOAT = np.dtype("<f8")


def write_ensemble_csv(ensemble: PathEnsemble, stream: TextIO) -> None:
    """Write the ensemble as rows of path, t, bank, value."""
    stream.write(",".join(PATH_COLUMNS) + "\n")
    n_times, n_banks = ensemble.values.shape[1:]
    times = np.repeat(ensemble.times, n_banks)
    banks = np.tile(np.arange(n_banks), n_times)
    for path in range(ensemble.n_paths):
        rows = np.column_stack(
            (
                np.full(times.size, path),
                times,
                banks,
                ensemble.values[path].reshape(-1),
            )
        )
        np.savetxt(stream, rows, fmt=("%d", "%.17g", "%d", "%.17g"), delimiter=",")


def write_ensemble_binary(ensemble: PathEnsemble, stream: BinaryIO) -> None:
    """Write the ensemble in the binary cache layout."""
    config = ensemble.config
    n_paths, n_times, n_banks = ensemble.values.shape
    stream.write(BINARY_MAGIC)
    stream.write(
        HEADER.pack(
            BINARY_VERSION,
            n_paths,
            n_times,
            n_banks,
            config.seed,
            config.dt,
            ensemble.horizon,
            ensemble.truncation_rate,
            config.record_stride,
            config.block_size,
            SCHEMES.index(config.scheme),
            RECORDS.index(config.record),
            KINDS.index(ensemble.kind),
        )
    )
    for arr in (
        ensemble.times,
        ensemble.values,
        ensemble.hit_times,
        ensemble.system_hit_times,
    ):
        stream.write(np.ascontiguousarray(arr, dtype=FLOAT).tobytes())


def _read_floats(stream: BinaryIO, count: int) -> np.ndarray:
    raw = stream.read(count * FLOAT.itemsize)
    if len(raw) != count * FLOAT.itemsize:
        raise ValidationError("truncated ensemble cache")
    return np.frombuffer(raw, dtype=FLOAT).astype(float)


def read_ensemble_binary(stream: BinaryIO) -> PathEnsemble:
    """Return the ensemble stored in a binary cache."""
    if stream.read(len(BINARY_MAGIC)) != BINARY_MAGIC:
        raise ValidationError("not an ensemble cache: bad magic")
    raw = stream.read(HEADER.size)
    if len(raw) != HEADER.size:
        raise ValidationError("truncated ensemble cache header")
    (
        version,
        n_paths,
        n_times,
        n_banks,
        seed,
        dt,
        horizon,
        truncation_rate,
        stride,
        block_size,
        scheme,
        record,
        kind,
    ) = HEADER.unpack(raw)
    if version != BINARY_VERSION:
        raise ValidationError("unsupported ensemble cache version {}".format(version))
    try:
        config = SimConfig(
            dt=dt,
            n_paths=n_paths,
            seed=seed,
            scheme=SCHEMES[scheme],
            record=RECORDS[record],
            record_stride=stride,
            block_size=block_size,
            horizon=horizon,
        )
        kind_name = KINDS[kind]
    except IndexError as err:
        raise ValidationError("corrupt ensemble cache codes") from err
    times = _read_floats(stream, n_times)
    values = _read_floats(stream, n_paths * n_times * n_banks)
    hits = _read_floats(stream, n_paths * n_banks)
    system_hits = _read_floats(stream, n_paths)
    return PathEnsemble(
        times=times,
        values=values.reshape(n_paths, n_times, n_banks),
        hit_times=hits.reshape(n_paths, n_banks),
        system_hit_times=system_hits,
        truncation_rate=truncation_rate,
        kind=kind_name,
        config=config,
        horizon=horizon,
        truncation_flag=truncation_rate > TRUNCATION_WARN_RATE,
    )


def save_ensemble(ensemble: PathEnsemble, path: Union[str, Path]) -> None:
    """Write the ensemble to path, as CSV for a .csv suffix and binary otherwise."""
    path = Path(path)
    if path.suffix == ".csv":
        with open(path, "w", encoding="utf-8", newline="\n") as stream:
            write_ensemble_csv(ensemble, stream)
        return
    with open(path, "wb") as bstream:
        write_ensemble_binary(ensemble, bstream)


def load_ensemble(path: Union[str, Path]) -> PathEnsemble:
    """Read a binary ensemble cache."""
    with open(path, "rb") as stream:
        return read_ensemble_binary(stream)
