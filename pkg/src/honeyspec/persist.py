"""Binary model file for :class:`~honeyspec.pipeline.HierarchicalModel`.

Layout (all text is ASCII, lines end with LF)::

    HSPEC\\n
    <format_version>\\n
    S <section-name> <payload-length>\\n <payload bytes>     (repeated)
    E\\n

Sections appear in this order: ``grid``, ``standardizer`` (only when the
model has one), ``origin_stage``, then ``bank:<origin>`` for every origin in
vocabulary order. A payload is a sequence of fields:

* ``T <key> <value>\\n`` -- a scalar as decimal text (floats use ``repr``);
* ``A <key> <f8|i8> <ndim> <dim>...\\n`` followed by the array as
  little-endian 64-bit values in C order.

Stage payload field order: ``projection`` (``none``/``pca``/``lda``; for the
latter two ``proj_mean``, ``proj_basis``, ``proj_scores`` follow),
``classifier`` (``knn``/``svm``/``constant``), ``label_type`` (``str``/``int``),
``classes`` (space separated), then per kind:

* knn: ``k``, ``train_X``, ``train_y``
* svm: ``kernel``, ``gamma``, ``C``, ``tol``, ``problems`` followed by
  ``sv.<c>``, ``coef.<c>``, ``bias.<c>``, ``kkt.<c>``, ``iters.<c>`` per class
* constant: ``d``
"""

from __future__ import annotations

import io
from typing import IO

import numpy as np

from .classify import ConstantModel, KernelSpec, KnnModel, SvmModel
from .classify.svm import BinaryProblem
from .dataset import Standardizer, WavelengthGrid
from .dimred import ProjectionModel
from .errors import BadModelFile, TruncatedFile, UnsupportedVersion
from .pipeline import FORMAT_VERSION, HierarchicalModel
from .stage import StageModel

MAGIC = b"HSPEC"
_DTYPES = {"f8": np.dtype("<f8"), "i8": np.dtype("<i8")}


class _Writer:
    def __init__(self):
        self.buf = io.BytesIO()

    def text(self, key: str, value) -> None:
        if isinstance(value, float):
            value = repr(value)
        self.buf.write(f"T {key} {value}\n".encode("ascii"))

    def array(self, key: str, a: np.ndarray, code: str = "f8") -> None:
        a = np.ascontiguousarray(a, dtype=_DTYPES[code])
        dims = " ".join(str(s) for s in a.shape)
        self.buf.write(f"A {key} {code} {a.ndim} {dims}\n".encode("ascii"))
        self.buf.write(a.tobytes(order="C"))

    def getvalue(self) -> bytes:
        return self.buf.getvalue()


class _Reader:
    def __init__(self, data: bytes, where: str):
        self.data = data
        self.pos = 0
        self.where = where

    def _line(self) -> list[str]:
        end = self.data.find(b"\n", self.pos)
        if end < 0:
            raise TruncatedFile(f"{self.where}: unterminated field header")
        try:
            line = self.data[self.pos : end].decode("ascii")
        except UnicodeDecodeError:
            raise BadModelFile(f"{self.where}: non-ASCII field header") from None
        self.pos = end + 1
        return line.split(" ")

    def _expect(self, kind: str, key: str) -> list[str]:
        parts = self._line()
        if len(parts) < 2 or parts[0] != kind or parts[1] != key:
            raise BadModelFile(f"{self.where}: expected {kind} {key}, found {' '.join(parts[:2])!r}")
        return parts[2:]

    def text(self, key: str) -> str:
        return " ".join(self._expect("T", key))

    def float(self, key: str) -> float:
        try:
            return float(self.text(key))
        except ValueError:
            raise BadModelFile(f"{self.where}: {key} is not a number") from None

    def int(self, key: str) -> int:
        try:
            return int(self.text(key))
        except ValueError:
            raise BadModelFile(f"{self.where}: {key} is not an integer") from None

    def array(self, key: str) -> np.ndarray:
        parts = self._expect("A", key)
        try:
            dtype = _DTYPES[parts[0]]
            ndim = int(parts[1])
            shape = tuple(int(s) for s in parts[2 : 2 + ndim])
        except (KeyError, ValueError, IndexError):
            raise BadModelFile(f"{self.where}: malformed array header for {key}") from None
        if len(shape) != ndim or any(s < 0 for s in shape):
            raise BadModelFile(f"{self.where}: malformed array shape for {key}")
        nbytes = int(np.prod(shape, dtype=np.int64)) * dtype.itemsize
        if self.pos + nbytes > len(self.data):
            raise TruncatedFile(f"{self.where}: array {key} is truncated")
        a = np.frombuffer(self.data, dtype=dtype, count=nbytes // dtype.itemsize, offset=self.pos)
        self.pos += nbytes
        return a.reshape(shape).astype(dtype.newbyteorder("="))

    def done(self) -> None:
        if self.pos != len(self.data):
            raise BadModelFile(f"{self.where}: {len(self.data) - self.pos} trailing bytes")


def _check_token(tok: str) -> str:
    if not tok or any(c.isspace() for c in tok):
        raise BadModelFile(f"label {tok!r} cannot be stored (empty or contains whitespace)")
    return tok


def _write_stage(w: _Writer, stage: StageModel) -> None:
    proj = stage.projection
    w.text("projection", "none" if proj is None else proj.kind)
    if proj is not None:
        w.array("proj_mean", proj.mean)
        w.array("proj_basis", proj.basis)
        w.array("proj_scores", proj.component_scores)
    clf = stage.classifier
    w.text("classifier", clf.kind)
    is_str = any(isinstance(c, str) for c in clf.classes)
    w.text("label_type", "str" if is_str else "int")
    w.text("classes", " ".join(_check_token(str(c)) for c in clf.classes))
    if isinstance(clf, KnnModel):
        w.text("k", clf.k)
        w.array("train_X", clf.train_X)
        w.array("train_y", clf.train_y, "i8")
    elif isinstance(clf, SvmModel):
        w.text("kernel", clf.kernel.kind)
        w.text("gamma", "none" if clf.kernel.gamma is None else float(clf.kernel.gamma))
        w.text("C", float(clf.C))
        w.text("tol", float(clf.tol))
        w.text("problems", len(clf.problems))
        for c, prob in enumerate(clf.problems):
            w.array(f"sv.{c}", prob.support_vectors)
            w.array(f"coef.{c}", prob.dual_coef)
            w.text(f"bias.{c}", float(prob.bias))
            w.text(f"kkt.{c}", float(prob.kkt_violation))
            w.text(f"iters.{c}", int(prob.iterations))
    elif isinstance(clf, ConstantModel):
        w.text("d", clf.d)
    else:
        raise TypeError(f"cannot serialize classifier {type(clf).__name__}")


def _read_stage(r: _Reader) -> StageModel:
    kind = r.text("projection")
    proj = None
    if kind in ("pca", "lda"):
        proj = ProjectionModel(kind, r.array("proj_mean"), r.array("proj_basis"), r.array("proj_scores"))
    elif kind != "none":
        raise BadModelFile(f"{r.where}: unknown projection {kind!r}")
    clf_kind = r.text("classifier")
    label_type = r.text("label_type")
    raw = r.text("classes").split(" ")
    if label_type == "int":
        try:
            classes = tuple(int(c) for c in raw)
        except ValueError:
            raise BadModelFile(f"{r.where}: integer class labels expected") from None
    elif label_type == "str":
        classes = tuple(raw)
    else:
        raise BadModelFile(f"{r.where}: unknown label type {label_type!r}")

    if clf_kind == "knn":
        k = r.int("k")
        clf = KnnModel(r.array("train_X"), r.array("train_y"), k, classes)
    elif clf_kind == "svm":
        kernel = r.text("kernel")
        gamma = r.text("gamma")
        C = r.float("C")
        tol = r.float("tol")
        problems = []
        for c in range(r.int("problems")):
            problems.append(
                BinaryProblem(
                    support_vectors=r.array(f"sv.{c}"),
                    dual_coef=r.array(f"coef.{c}"),
                    bias=r.float(f"bias.{c}"),
                    kkt_violation=r.float(f"kkt.{c}"),
                    iterations=r.int(f"iters.{c}"),
                )
            )
        try:
            spec = KernelSpec(kernel, None if gamma == "none" else float(gamma))
        except ValueError as exc:
            raise BadModelFile(f"{r.where}: {exc}") from None
        clf = SvmModel(spec, C, classes, tuple(problems), tol)
    elif clf_kind == "constant":
        clf = ConstantModel(classes, r.int("d"))
    else:
        raise BadModelFile(f"{r.where}: unknown classifier {clf_kind!r}")
    return StageModel(proj, clf)


def stage_to_bytes(stage: StageModel) -> bytes:
    w = _Writer()
    if stage.standardizer is not None:
        w.array("std_mean", stage.standardizer.mean)
        w.array("std_scale", stage.standardizer.scale)
    _write_stage(w, stage)
    return w.getvalue()


def model_to_bytes(model: HierarchicalModel) -> bytes:
    sections: list[tuple[str, bytes]] = []
    w = _Writer()
    w.text("start_nm", float(model.grid.start_nm))
    w.text("step_nm", float(model.grid.step_nm))
    w.text("band_count", int(model.grid.band_count))
    sections.append(("grid", w.getvalue()))
    if model.standardizer is not None:
        w = _Writer()
        w.array("mean", model.standardizer.mean)
        w.array("scale", model.standardizer.scale)
        sections.append(("standardizer", w.getvalue()))
    w = _Writer()
    _write_stage(w, model.origin_stage)
    sections.append(("origin_stage", w.getvalue()))
    for origin, stage in model.adulteration_bank.items():
        w = _Writer()
        _write_stage(w, stage)
        sections.append((f"bank:{_check_token(origin)}", w.getvalue()))

    out = io.BytesIO()
    out.write(MAGIC + b"\n")
    out.write(f"{model.format_version}\n".encode("ascii"))
    for name, payload in sections:
        out.write(f"S {name} {len(payload)}\n".encode("ascii"))
        out.write(payload)
    out.write(b"E\n")
    return out.getvalue()


def model_from_bytes(data: bytes) -> HierarchicalModel:
    if not data.startswith(MAGIC + b"\n"):
        raise BadModelFile("not a honeyspec model file (bad magic)")
    pos = len(MAGIC) + 1
    end = data.find(b"\n", pos)
    if end < 0:
        raise TruncatedFile("missing format version")
    try:
        version = int(data[pos:end].decode("ascii"))
    except (UnicodeDecodeError, ValueError):
        raise BadModelFile("format version is not an integer") from None
    if version > FORMAT_VERSION or version < 1:
        raise UnsupportedVersion(f"format version {version}; this build reads up to {FORMAT_VERSION}")
    pos = end + 1

    sections: list[tuple[str, bytes]] = []
    while True:
        end = data.find(b"\n", pos)
        if end < 0:
            raise TruncatedFile("missing end marker")
        header = data[pos:end].decode("ascii", errors="replace").split(" ")
        pos = end + 1
        if header == ["E"]:
            break
        if len(header) != 3 or header[0] != "S":
            raise BadModelFile(f"malformed section header {' '.join(header)!r}")
        try:
            length = int(header[2])
        except ValueError:
            raise BadModelFile(f"bad section length {header[2]!r}") from None
        if pos + length > len(data):
            raise TruncatedFile(f"section {header[1]} is truncated")
        sections.append((header[1], data[pos : pos + length]))
        pos += length
    if pos != len(data):
        raise BadModelFile("trailing bytes after end marker")

    names = [n for n, _ in sections]
    if len(names) < 2 or names[0] != "grid":
        raise BadModelFile("grid section missing")
    r = _Reader(sections[0][1], "grid")
    grid = WavelengthGrid(r.float("start_nm"), r.float("step_nm"), r.int("band_count"))
    r.done()
    idx = 1
    standardizer = None
    if names[idx] == "standardizer":
        r = _Reader(sections[idx][1], "standardizer")
        standardizer = Standardizer(r.array("mean"), r.array("scale"))
        r.done()
        idx += 1
    if idx >= len(names) or names[idx] != "origin_stage":
        raise BadModelFile("origin_stage section missing")
    r = _Reader(sections[idx][1], "origin_stage")
    origin_stage = _read_stage(r)
    r.done()
    bank = {}
    for name, payload in sections[idx + 1 :]:
        if not name.startswith("bank:"):
            raise BadModelFile(f"unexpected section {name!r}")
        r = _Reader(payload, name)
        bank[name[5:]] = _read_stage(r)
        r.done()
    if set(bank) != set(origin_stage.classes):
        raise BadModelFile("adulteration bank does not match origin-stage classes")
    return HierarchicalModel(grid, origin_stage, bank, standardizer, version)


def save_model(model: HierarchicalModel, sink: IO[bytes] | str) -> None:
    data = model_to_bytes(model)
    if isinstance(sink, str):
        with open(sink, "wb") as fh:
            fh.write(data)
    else:
        sink.write(data)


def load_model(source: IO[bytes] | str | bytes) -> HierarchicalModel:
    if isinstance(source, (bytes, bytearray)):
        return model_from_bytes(bytes(source))
    if isinstance(source, str):
        with open(source, "rb") as fh:
            return model_from_bytes(fh.read())
    return model_from_bytes(source.read())
