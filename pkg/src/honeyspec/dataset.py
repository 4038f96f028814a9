"""Spectral data model, delimited-text I/O and the synthetic generator.

A dataset is stored column-wise (one array per metadata field plus an
``n x band_count`` band matrix) so that 8-9k row files load and slice fast;
:class:`SpectrumRecord` views are produced on demand.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import IO, Iterable, Iterator, Sequence

import numpy as np

from .errors import (
    BandCountMismatch,
    EmptyDataset,
    GroupLabelConflict,
    InvalidSpec,
    NonNumericBand,
    UnknownLevel,
)

DEFAULT_LEVELS = (0, 5, 10, 25, 50)
META_COLUMNS = ("record_id", "group_id", "acquisition_id", "origin", "level")
SCALE_FLOOR = 1e-12


@dataclass(frozen=True)
class WavelengthGrid:
    start_nm: float = 400.0
    step_nm: float = 5.0
    band_count: int = 128

    def __post_init__(self):
        if self.band_count < 1:
            raise InvalidSpec("band_count must be >= 1")
        if not self.step_nm > 0:
            raise InvalidSpec("step_nm must be > 0")

    def wavelengths(self) -> np.ndarray:
        return self.start_nm + self.step_nm * np.arange(self.band_count)

    def band_names(self) -> list[str]:
        width = max(3, len(str(self.band_count - 1)))
        return [f"b{i:0{width}d}" for i in range(self.band_count)]


@dataclass(frozen=True)
class SpectrumRecord:
    record_id: str
    group_id: str
    acquisition_id: int | None
    origin: str
    level: int
    bands: np.ndarray


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, copy=True)
    a.flags.writeable = False
    return a


@dataclass(frozen=True, eq=False)
class SpectralDataset:
    """Immutable collection of labelled spectra.

    ``acquisition_ids`` uses ``-1`` for a missing value. The constructor only
    checks array shapes; label and finiteness invariants are the job of
    :func:`validate` (and are enforced by :func:`load_dataset`).
    """

    grid: WavelengthGrid
    record_ids: np.ndarray
    group_ids: np.ndarray
    acquisition_ids: np.ndarray
    origins: np.ndarray
    levels: np.ndarray
    bands: np.ndarray
    origin_vocabulary: tuple[str, ...] = ()
    level_set: tuple[int, ...] = ()

    def __post_init__(self):
        n = len(self.record_ids)
        bands = np.asarray(self.bands, dtype=np.float64)
        if bands.ndim != 2 or bands.shape[0] != n:
            raise BandCountMismatch(f"band matrix shape {bands.shape} does not match {n} records")
        for name in ("group_ids", "acquisition_ids", "origins", "levels"):
            if len(getattr(self, name)) != n:
                raise ValueError(f"{name} has length {len(getattr(self, name))}, expected {n}")
        object.__setattr__(self, "bands", _frozen(bands))
        object.__setattr__(self, "record_ids", _frozen(np.asarray(self.record_ids, dtype=object)))
        object.__setattr__(self, "group_ids", _frozen(np.asarray(self.group_ids, dtype=object)))
        object.__setattr__(self, "origins", _frozen(np.asarray(self.origins, dtype=object)))
        object.__setattr__(self, "levels", _frozen(np.asarray(self.levels, dtype=np.int64)))
        object.__setattr__(
            self, "acquisition_ids", _frozen(np.asarray(self.acquisition_ids, dtype=np.int64))
        )
        if not self.origin_vocabulary:
            object.__setattr__(self, "origin_vocabulary", tuple(_first_seen(self.origins)))
        else:
            object.__setattr__(self, "origin_vocabulary", tuple(self.origin_vocabulary))
        if not self.level_set:
            object.__setattr__(self, "level_set", tuple(sorted({int(v) for v in self.levels})))
        else:
            object.__setattr__(self, "level_set", tuple(int(v) for v in self.level_set))

    def __len__(self) -> int:
        return len(self.record_ids)

    @property
    def records(self) -> Iterator[SpectrumRecord]:
        for i in range(len(self)):
            yield self.record(i)

    def record(self, i: int) -> SpectrumRecord:
        acq = int(self.acquisition_ids[i])
        return SpectrumRecord(
            record_id=self.record_ids[i],
            group_id=self.group_ids[i],
            acquisition_id=None if acq < 0 else acq,
            origin=self.origins[i],
            level=int(self.levels[i]),
            bands=self.bands[i],
        )

    def labels(self, target: str) -> np.ndarray:
        if target == "origin":
            return self.origins
        if target == "level":
            return self.levels
        raise ValueError(f"unknown target {target!r}")

    def subset(self, index) -> "SpectralDataset":
        """Rows selected by a boolean mask or integer index, vocabularies narrowed to what remains."""
        idx = np.asarray(index)
        if idx.dtype == bool:
            idx = np.flatnonzero(idx)
        origins = self.origins[idx]
        levels = self.levels[idx]
        present_o = set(origins)
        present_l = {int(v) for v in levels}
        return SpectralDataset(
            grid=self.grid,
            record_ids=self.record_ids[idx],
            group_ids=self.group_ids[idx],
            acquisition_ids=self.acquisition_ids[idx],
            origins=origins,
            levels=levels,
            bands=self.bands[idx],
            origin_vocabulary=tuple(o for o in self.origin_vocabulary if o in present_o),
            level_set=tuple(l for l in self.level_set if l in present_l),
        )

    def unique_groups(self) -> list[str]:
        return _first_seen(self.group_ids)


def _first_seen(values: Iterable) -> list:
    seen = {}
    for v in values:
        if v not in seen:
            seen[v] = None
    return list(seen)


@dataclass(frozen=True)
class Violation:
    kind: str
    message: str
    record_id: str | None = None
    group_id: str | None = None


def validate(dataset: SpectralDataset, level_set: Sequence[int] | None = None) -> list[Violation]:
    """Return every invariant violation found in ``dataset``; an empty list means valid."""
    out: list[Violation] = []
    n = len(dataset)
    if n == 0:
        return [Violation("EmptyDataset", "dataset has no records")]
    if dataset.bands.shape[1] != dataset.grid.band_count:
        out.append(
            Violation(
                "BandCountMismatch",
                f"records carry {dataset.bands.shape[1]} bands, grid declares {dataset.grid.band_count}",
            )
        )
    bad_rows = np.flatnonzero(~np.isfinite(dataset.bands).all(axis=1))
    for i in bad_rows:
        out.append(Violation("FiniteBands", "non-finite band value", record_id=dataset.record_ids[i]))

    allowed = set(dataset.level_set if level_set is None else level_set)
    for i in np.flatnonzero(~np.isin(dataset.levels, list(allowed))):
        out.append(
            Violation(
                "UnknownLevel",
                f"level {int(dataset.levels[i])} not in level set",
                record_id=dataset.record_ids[i],
            )
        )

    labels: dict[str, tuple[set, set]] = {}
    for g, o, lv in zip(dataset.group_ids, dataset.origins, dataset.levels):
        os_, ls_ = labels.setdefault(g, (set(), set()))
        os_.add(o)
        ls_.add(int(lv))
    for g, (os_, ls_) in labels.items():
        if len(os_) > 1 or len(ls_) > 1:
            out.append(
                Violation(
                    "GroupLabelConflict",
                    f"group mixes origins {sorted(os_)} and levels {sorted(ls_)}",
                    group_id=g,
                )
            )

    seen_ids: set = set()
    for rid in dataset.record_ids:
        if rid in seen_ids:
            out.append(Violation("DuplicateRecordId", "record_id repeated", record_id=rid))
        seen_ids.add(rid)

    present_o = set(dataset.origins)
    if set(dataset.origin_vocabulary) != present_o or len(dataset.origin_vocabulary) != len(present_o):
        out.append(Violation("VocabularyMismatch", "origin_vocabulary does not match origins present"))
    present_l = {int(v) for v in dataset.levels}
    if level_set is None and set(dataset.level_set) != present_l:
        out.append(Violation("VocabularyMismatch", "level_set does not match levels present"))
    return out


def load_dataset(
    source: IO[bytes] | IO[str] | bytes | str,
    grid: WavelengthGrid | None = None,
    level_set: Sequence[int] = DEFAULT_LEVELS,
) -> SpectralDataset:
    """Parse a comma-delimited dataset file into a validated :class:`SpectralDataset`.

    ``source`` may be a binary or text stream, raw bytes, or a filesystem path.
    The returned ``level_set`` is the subset of ``level_set`` present in the data.
    """
    grid = grid or WavelengthGrid()
    rows = _read_rows(source)
    header = next(rows, None)
    if header is None:
        raise EmptyDataset("no header row")
    width = len(META_COLUMNS) + grid.band_count
    if len(header) != width:
        raise BandCountMismatch(f"header has {len(header)} columns, expected {width}")

    allowed = {int(v) for v in level_set}
    record_ids, group_ids, acq_ids, origins, levels, bands = [], [], [], [], [], []
    for lineno, row in enumerate(rows, start=2):
        if not row or (len(row) == 1 and not row[0].strip()):
            continue
        if len(row) != width:
            raise BandCountMismatch(f"line {lineno}: {len(row)} columns, expected {width}")
        rid, gid, acq, origin, level = (c.strip() for c in row[:5])
        try:
            lv = int(level)
        except ValueError:
            raise UnknownLevel(f"line {lineno}: level {level!r} is not an integer") from None
        if lv not in allowed:
            raise UnknownLevel(f"line {lineno}: level {lv} not in {sorted(allowed)}")
        try:
            vals = [float(c) for c in row[5:]]
        except ValueError as exc:
            raise NonNumericBand(f"line {lineno}: {exc}") from None
        if not all(math.isfinite(v) for v in vals):
            raise NonNumericBand(f"line {lineno}: non-finite band value")
        record_ids.append(rid)
        group_ids.append(gid)
        acq_ids.append(int(acq) if acq else -1)
        origins.append(origin)
        levels.append(lv)
        bands.append(vals)
    if not record_ids:
        raise EmptyDataset("no data rows")

    ds = SpectralDataset(
        grid=grid,
        record_ids=np.array(record_ids, dtype=object),
        group_ids=np.array(group_ids, dtype=object),
        acquisition_ids=np.array(acq_ids),
        origins=np.array(origins, dtype=object),
        levels=np.array(levels),
        bands=np.array(bands, dtype=np.float64),
        level_set=tuple(l for l in sorted(allowed) if l in set(levels)),
    )
    conflicts = [v for v in validate(ds) if v.kind == "GroupLabelConflict"]
    if conflicts:
        raise GroupLabelConflict("; ".join(f"{v.group_id}: {v.message}" for v in conflicts))
    return ds


def read_spectra(source, grid: WavelengthGrid | None = None) -> tuple[list[str], np.ndarray]:
    """Read record ids and band matrix from a dataset-schema file, ignoring label columns."""
    grid = grid or WavelengthGrid()
    rows = _read_rows(source)
    header = next(rows, None)
    if header is None:
        raise EmptyDataset("no header row")
    width = len(META_COLUMNS) + grid.band_count
    ids, bands = [], []
    for lineno, row in enumerate(rows, start=2):
        if not row or (len(row) == 1 and not row[0].strip()):
            continue
        if len(row) != width:
            raise BandCountMismatch(f"line {lineno}: {len(row)} columns, expected {width}")
        try:
            bands.append([float(c) for c in row[5:]])
        except ValueError as exc:
            raise NonNumericBand(f"line {lineno}: {exc}") from None
        ids.append(row[0].strip())
    if not ids:
        raise EmptyDataset("no data rows")
    return ids, np.array(bands, dtype=np.float64)


def _read_rows(source) -> Iterator[list[str]]:
    if isinstance(source, (bytes, bytearray)):
        text: IO[str] = io.StringIO(bytes(source).decode("utf-8"))
    elif isinstance(source, str):
        with open(source, encoding="utf-8", newline="") as fh:
            text = io.StringIO(fh.read())
    elif isinstance(source, io.TextIOBase):
        text = source
    else:
        text = io.TextIOWrapper(source, encoding="utf-8", newline="")
    return csv.reader(text)


def write_dataset(dataset: SpectralDataset, sink: IO[str]) -> None:
    """Serialize in the external schema; floats use ``repr`` so reloading is exact."""
    sink.write(",".join(list(META_COLUMNS) + dataset.grid.band_names()) + "\n")
    for i in range(len(dataset)):
        acq = int(dataset.acquisition_ids[i])
        meta = [
            str(dataset.record_ids[i]),
            str(dataset.group_ids[i]),
            "" if acq < 0 else str(acq),
            str(dataset.origins[i]),
            str(int(dataset.levels[i])),
        ]
        sink.write(",".join(meta + [repr(float(v)) for v in dataset.bands[i]]) + "\n")


def dataset_to_text(dataset: SpectralDataset) -> str:
    buf = io.StringIO()
    write_dataset(dataset, buf)
    return buf.getvalue()


@dataclass(frozen=True)
class GeneratorSpec:
    origins: int = 3
    levels: tuple[int, ...] = DEFAULT_LEVELS
    groups_per_class: int = 4
    records_per_group: int = 5
    class_mean_separation: float = 10.0
    noise_sd: float = 1.0
    band_count: int = 128


def synth_generate(spec: GeneratorSpec, seed: int = 0) -> SpectralDataset:
    """Draw one Gaussian cluster per (origin, level) pair.

    The class mean is a smooth baseline spectrum plus ``separation`` along the
    origin's own band axis plus ``separation`` along the level's own band axis
    (band indices ``origin`` and ``n_origins + level_index``). Distinct classes
    are therefore at least ``separation`` apart, and the level offset is shared
    by all origins.
    """
    levels = tuple(int(v) for v in spec.levels)
    if min(spec.origins, len(levels), spec.groups_per_class, spec.records_per_group, spec.band_count) < 1:
        raise InvalidSpec("all counts must be >= 1")
    if not spec.noise_sd >= 0:
        raise InvalidSpec("noise_sd must be >= 0")
    if len(set(levels)) != len(levels) or min(levels) < 0:
        raise InvalidSpec("levels must be distinct non-negative integers")
    if spec.band_count < spec.origins + len(levels):
        raise InvalidSpec("band_count must be at least origins + len(levels)")

    rng = np.random.default_rng(seed)
    p = spec.band_count
    t = np.linspace(0.0, 1.0, p)
    baseline = 0.4 + 0.3 * np.sin(np.pi * t) + 0.1 * t
    origin_names = [f"origin{o:02d}" for o in range(spec.origins)]

    record_ids, group_ids, acq_ids, origins, lvls, bands = [], [], [], [], [], []
    g = 0
    for o in range(spec.origins):
        for li, level in enumerate(levels):
            mean = baseline.copy()
            mean[o] += spec.class_mean_separation
            mean[spec.origins + li] += spec.class_mean_separation
            for gi in range(spec.groups_per_class):
                noise = rng.standard_normal((spec.records_per_group, p)) * spec.noise_sd
                for r in range(spec.records_per_group):
                    record_ids.append(f"r{len(record_ids):06d}")
                    group_ids.append(f"g{g:05d}")
                    acq_ids.append(gi + 1)
                    origins.append(origin_names[o])
                    lvls.append(level)
                    bands.append(mean + noise[r] if spec.noise_sd > 0 else mean.copy())
                g += 1

    return SpectralDataset(
        grid=WavelengthGrid(band_count=p),
        record_ids=np.array(record_ids, dtype=object),
        group_ids=np.array(group_ids, dtype=object),
        acquisition_ids=np.array(acq_ids),
        origins=np.array(origins, dtype=object),
        levels=np.array(lvls),
        bands=np.array(bands),
        origin_vocabulary=tuple(origin_names),
        level_set=tuple(sorted(levels)),
    )


def split_by_origin(dataset: SpectralDataset) -> dict[str, SpectralDataset]:
    return {o: dataset.subset(dataset.origins == o) for o in dataset.origin_vocabulary}


@dataclass(frozen=True, eq=False)
class Standardizer:
    mean: np.ndarray
    scale: np.ndarray


def standardize_fit(X) -> Standardizer:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] < 1:
        raise ValueError("standardize_fit needs a non-empty 2-D matrix")
    mean = X.mean(axis=0)
    # constant columns: make the centering exact so they map to zero
    constant = np.ptp(X, axis=0) == 0
    mean[constant] = X[0, constant]
    sd = X.std(axis=0, ddof=1) if X.shape[0] > 1 else np.zeros(X.shape[1])
    sd[constant] = 0.0
    return Standardizer(mean=_frozen(mean), scale=_frozen(np.maximum(sd, SCALE_FLOOR)))


def standardize_apply(s: Standardizer, X) -> np.ndarray:
    return (np.asarray(X, dtype=np.float64) - s.mean) / s.scale
