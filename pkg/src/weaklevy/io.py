"""JSON model documents and CSV / binary path files."""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .core import (
    BrownianSpec,
    GammaRay,
    JumpAtom,
    SpecError,
    SubordinatorSpec,
    ThorinAtomicMeasure,
    WVaGParams,
    validate_wvag,
    wvag_subordinator,
)

SCHEMA_VERSION = "weaklevy/1"
CSV_MAGIC = "#weaklevy-csv/1"
KINDS = ("wvag", "vggc", "custom")
_KEYS = {
    "wvag": {"a", "b", "alpha", "mu", "sigma"},
    "vggc": {"drift", "mu", "sigma", "thorinAtoms"},
    "custom": {"drift", "rays", "atoms", "mu", "sigma"},
}
_OPTIONAL = {"wvag": set(), "vggc": {"drift"}, "custom": {"drift", "rays", "atoms"}}


def _expect_keys(obj, required, optional, where):
    if not isinstance(obj, dict):
        raise SpecError(f"{where} must be a JSON object")
    unknown = set(obj) - required - optional
    missing = required - set(obj)
    if unknown:
        raise SpecError(f"{where}: unknown keys {sorted(unknown)}")
    if missing:
        raise SpecError(f"{where}: missing keys {sorted(missing)}")


def _num(x, where) -> float:
    if isinstance(x, bool) or not isinstance(x, (int, float)):
        raise SpecError(f"{where} must be a number")
    return float(x)


def _numarray(x, ndim, where) -> np.ndarray:
    try:
        arr = np.array(x, dtype=float)
    except (TypeError, ValueError):
        raise SpecError(f"{where} must be a numeric array") from None
    if arr.ndim != ndim:
        raise SpecError(f"{where} must be {ndim}-dimensional")
    return arr


@dataclass(frozen=True)
class ModelSpecDocument:
    """A parsed and validated model file.

    ``parameters`` keeps the raw JSON values; :meth:`pair` builds the
    subordinator and Brownian motion.
    """

    kind: str
    parameters: dict
    version: str = SCHEMA_VERSION

    @classmethod
    def from_dict(cls, doc) -> "ModelSpecDocument":
        _expect_keys(doc, {"version", "kind", "parameters"}, set(), "model")
        if doc["version"] != SCHEMA_VERSION:
            raise SpecError(f"unsupported version {doc['version']!r}, expected {SCHEMA_VERSION!r}")
        kind = doc["kind"]
        if kind not in KINDS:
            raise SpecError(f"unknown kind {kind!r}")
        params = doc["parameters"]
        _expect_keys(params, _KEYS[kind] - _OPTIONAL[kind], _OPTIONAL[kind], "parameters")
        out = cls(kind, params)
        out.pair()  # run every validator before returning
        return out

    @classmethod
    def load(cls, path) -> "ModelSpecDocument":
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise SpecError(f"cannot read model file: {exc}") from None
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise SpecError(f"model file is not valid JSON: {exc}") from None
        return cls.from_dict(doc)

    def to_dict(self) -> dict:
        return {"version": self.version, "kind": self.kind, "parameters": self.parameters}

    def sha256(self) -> str:
        canon = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canon.encode()).hexdigest()

    def brownian(self) -> BrownianSpec:
        p = self.parameters
        return BrownianSpec(_numarray(p["mu"], 1, "mu"), _numarray(p["sigma"], 2, "sigma"))

    def wvag(self) -> WVaGParams:
        if self.kind != "wvag":
            raise SpecError("not a wvag model")
        p = self.parameters
        return validate_wvag(
            _num(p["a"], "a"), _num(p["b"], "b"),
            _numarray(p["alpha"], 1, "alpha"), _numarray(p["mu"], 1, "mu"), _numarray(p["sigma"], 2, "sigma"),
        )

    def thorin(self) -> tuple[np.ndarray, ThorinAtomicMeasure]:
        if self.kind != "vggc":
            raise SpecError("not a vggc model")
        p = self.parameters
        n = self.brownian().dim
        atoms = p["thorinAtoms"]
        if not isinstance(atoms, list):
            raise SpecError("thorinAtoms must be a list")
        locs, weights = [], []
        for i, a in enumerate(atoms):
            _expect_keys(a, {"location", "weight"}, set(), f"thorinAtoms[{i}]")
            locs.append(_numarray(a["location"], 1, f"thorinAtoms[{i}].location"))
            weights.append(_num(a["weight"], f"thorinAtoms[{i}].weight"))
        drift = _numarray(p.get("drift", [0.0] * n), 1, "drift")
        U = ThorinAtomicMeasure(np.array(locs).reshape(len(locs), n), np.array(weights))
        return drift, U

    def pair(self) -> tuple[SubordinatorSpec, BrownianSpec]:
        if self.kind == "wvag":
            w = self.wvag()
            return wvag_subordinator(w), w.brownian
        B = self.brownian()
        if self.kind == "vggc":
            from .measure import thorin_to_rays

            drift, U = self.thorin()
            T = thorin_to_rays(drift, U)
        else:
            p = self.parameters
            rays, atoms = [], []
            for i, r in enumerate(p.get("rays", [])):
                _expect_keys(r, {"direction", "shape", "rate"}, set(), f"rays[{i}]")
                rays.append(GammaRay(_numarray(r["direction"], 1, f"rays[{i}].direction"),
                                     _num(r["shape"], f"rays[{i}].shape"), _num(r["rate"], f"rays[{i}].rate")))
            for i, a in enumerate(p.get("atoms", [])):
                _expect_keys(a, {"point", "intensity"}, set(), f"atoms[{i}]")
                atoms.append(JumpAtom(_numarray(a["point"], 1, f"atoms[{i}].point"),
                                      _num(a["intensity"], f"atoms[{i}].intensity")))
            drift = _numarray(p.get("drift", [0.0] * B.dim), 1, "drift")
            T = SubordinatorSpec(drift, tuple(rays), tuple(atoms))
        if T.dim != B.dim:
            raise SpecError("subordinator and Brownian motion dimensions differ")
        return T, B


def fmt(x: float) -> str:
    # shortest repr that round-trips exactly
    return repr(float(x))


def write_csv(path, header, rows) -> None:
    """Versioned CSV: magic line, header line, then rows of exactly round-tripping floats."""
    lines = [CSV_MAGIC, ",".join(header)]
    lines.extend(",".join(c if isinstance(c, str) else fmt(c) for c in row) for row in rows)
    text = "\n".join(lines) + "\n"
    if path is None or str(path) == "-":
        import sys

        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def read_csv(path) -> tuple[list, np.ndarray]:
    lines = Path(path).read_text().splitlines()
    if not lines or lines[0] != CSV_MAGIC:
        raise SpecError(f"{path} is not a {CSV_MAGIC} file")
    header = lines[1].split(",")
    data = np.array([[float(v) for v in ln.split(",")] for ln in lines[2:] if ln], dtype=float)
    return header, data.reshape(-1, len(header))


def path_csv_rows(sample):
    P, S, n = sample.t_paths.shape
    for p in range(P):
        for j in range(S):
            yield [str(p), sample.time_grid[j + 1], *sample.t_paths[p, j], *sample.y_paths[p, j]]


def path_csv_header(n: int) -> list:
    return ["path", "time"] + [f"T{k + 1}" for k in range(n)] + [f"Y{k + 1}" for k in range(n)]


def sidecar_path(path) -> Path:
    return Path(str(path) + ".json")


def write_binary(path, sample, params_sha256: str) -> None:
    """``<f8`` array of shape ``(paths, steps, 2n)`` plus a JSON sidecar."""
    data = np.concatenate((sample.t_paths, sample.y_paths), axis=2).astype("<f8")
    Path(path).write_bytes(data.tobytes(order="C"))
    meta = {
        "format": "weaklevy-bin/1",
        "dtype": "<f8",
        "shape": list(data.shape),
        "seed": sample.seed,
        "scheme": sample.scheme,
        "epsilon": list(sample.epsilon),
        "time_grid": [float(t) for t in sample.time_grid],
        "params_sha256": params_sha256,
        "bias_report": [float(b) for b in sample.bias_report],
    }
    sidecar_path(path).write_text(json.dumps(meta, indent=1, sort_keys=True) + "\n")


def read_binary(path) -> tuple[np.ndarray, dict]:
    try:
        meta = json.loads(sidecar_path(path).read_text())
        raw = Path(path).read_bytes()
    except (OSError, json.JSONDecodeError) as exc:
        raise SpecError(f"cannot read path file: {exc}") from None
    shape = tuple(meta["shape"])
    data = np.frombuffer(raw, dtype="<f8")
    if data.size != int(np.prod(shape)):
        raise SpecError("binary path file does not match its sidecar shape")
    return data.reshape(shape), meta
