"""File formats: trajectory datasets, skeleton CSVs, models, codes and reports.

All JSON is written canonically (sorted keys, shortest round-trip floats,
no NaN) through a temp file that is renamed into place, so files are
byte-deterministic and never half-written.
"""

from __future__ import annotations

import csv
import json
import os
import tempfile
from pathlib import Path

import numpy as np

from .coding import Codebook
from .elastic import MeanResult, Trajectory
from .errors import EmptyInput, ParseError, ValidationError, VersionError
from .experiments import LabeledDataset
from .features import SkeletonSequence, default_bones, larp_from_skeleton
from .geometry import Manifold, manifold_from_dict

FORMAT_VERSION = 1
LOAD_TOL = 1e-6


# --------------------------------------------------------------------------
# canonical JSON
# --------------------------------------------------------------------------

def plain(obj):
    """Convert numpy scalars/arrays (recursively) into JSON-native values."""
    if isinstance(obj, dict):
        return {str(k): plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return plain(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    return obj


def dumps(obj) -> str:
    try:
        return json.dumps(plain(obj), sort_keys=True, separators=(",", ":"), allow_nan=False) + "\n"
    except ValueError as exc:
        raise ValidationError(f"cannot serialise non-finite values: {exc}") from exc


def _umask() -> int:
    mask = os.umask(0)
    os.umask(mask)
    return mask


def atomic_write(path, text: str):
    """Write to a temp file in the target directory, then rename over ``path``."""
    path = Path(path)
    directory = path.parent if str(path.parent) else Path(".")
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.chmod(tmp, 0o666 & ~_umask())
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_json(obj, path):
    atomic_write(path, dumps(obj))


def read_json(path) -> dict:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except FileNotFoundError as exc:
        raise ParseError(f"no such file: {path}") from exc
    except UnicodeDecodeError as exc:
        raise ParseError(f"{path} is not UTF-8 text", offset=exc.start) from exc
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"malformed JSON in {path}: {exc.msg}", line=exc.lineno, offset=exc.colno) from exc
    if not isinstance(obj, dict):
        raise ParseError(f"{path} does not hold a JSON object", line=1, offset=1)
    return obj


def _header(obj: dict, kind: str, path) -> dict:
    if obj.get("format") != kind:
        raise ParseError(f"{path} is not a {kind} file (format={obj.get('format')!r})")
    version = obj.get("format_version")
    if version != FORMAT_VERSION:
        raise VersionError(f"{path} has format_version {version!r}; this build reads {FORMAT_VERSION}")
    return obj


def _field(obj: dict, key: str, path):
    if key not in obj:
        raise ParseError(f"{path} is missing field {key!r}")
    return obj[key]


def _array(values, shape, what, path) -> np.ndarray:
    try:
        a = np.asarray(values, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ParseError(f"{what} in {path} is not numeric") from exc
    if a.size != int(np.prod(shape)):
        raise ValidationError(f"{what} in {path} has {a.size} values, expected {int(np.prod(shape))}")
    return a.reshape(shape)


def manifold_to_dict(M: Manifold) -> dict:
    return {"kind": M.kind, "params": dict(M.params)}


def _manifold(obj, path) -> Manifold:
    try:
        return manifold_from_dict(obj)
    except (KeyError, TypeError, AttributeError) as exc:
        raise ParseError(f"bad manifold header in {path}") from exc


def check_points(M: Manifold, samples, tol: float = LOAD_TOL, where: str = "trajectory", key=None):
    """Raise ValidationError listing every sample that violates the manifold,
    as ``(key, sample)`` pairs when ``key`` is given."""
    if max(M.validate(samples).values()) <= tol:
        return
    bad = [i for i in range(len(samples)) if max(M.validate(samples[i]).values()) > tol]
    indices = bad if key is None else [(key, i) for i in bad]
    raise ValidationError(f"{where}: {len(bad)} samples are not valid {M} points", indices=indices)


# --------------------------------------------------------------------------
# trajectory datasets
# --------------------------------------------------------------------------

def dataset_to_dict(ds: LabeledDataset) -> dict:
    M = ds.manifold
    out = {
        "format": "rtraj-trajectories",
        "format_version": FORMAT_VERSION,
        "manifold": manifold_to_dict(M),
        "T": ds.T,
        "N": len(ds),
        "trajectories": [tr.samples.reshape(-1) for tr in ds.trajectories],
        "labels": list(ds.labels),
        "metadata": ds.metadata,
    }
    if ds.targets is not None:
        out["targets"] = list(ds.targets)
    return out


def write_dataset(ds: LabeledDataset, path):
    if len(ds) == 0:
        raise EmptyInput("cannot write an empty dataset")
    if any(tr.manifold != ds.manifold or tr.T != ds.T for tr in ds.trajectories):
        raise ValidationError("all trajectories in a file must share manifold and length")
    write_json(dataset_to_dict(ds), path)


def dataset_from_dict(obj: dict, path="<memory>", strict: bool = True, tol: float = LOAD_TOL) -> LabeledDataset:
    _header(obj, "rtraj-trajectories", path)
    M = _manifold(_field(obj, "manifold", path), path)
    T, N = _field(obj, "T", path), _field(obj, "N", path)
    body = _field(obj, "trajectories", path)
    if not isinstance(body, list):
        raise ParseError(f"trajectories in {path} must be a list")
    if len(body) == 0 or N == 0:
        raise EmptyInput(f"{path} holds no trajectories")
    if len(body) != N:
        raise ValidationError(f"{path} declares N={N} but holds {len(body)} trajectories")
    if not isinstance(T, int) or T < 2:
        raise ValidationError(f"{path} declares an invalid length T={T!r}")
    labels = obj.get("labels")
    labels = list(range(N)) if labels is None else list(labels)
    if len(labels) != N:
        raise ValidationError(f"{path} has {len(labels)} labels for {N} trajectories")
    trajs = []
    for i, flat in enumerate(body):
        samples = _array(flat, (T,) + M.point_shape, f"trajectory {i}", path)
        if strict:
            check_points(M, samples, tol, where=f"trajectory {i}", key=i)
        trajs.append(Trajectory(M, samples))
    targets = obj.get("targets")
    return LabeledDataset(trajs, labels, dict(obj.get("metadata") or {}),
                          None if targets is None else [float(t) for t in targets])


def read_dataset(path, format: str | None = None, strict: bool = True, tol: float = LOAD_TOL,
                 bones_path=None) -> LabeledDataset:
    """Load a JSON trajectory file, or a skeleton CSV as LARP features."""
    fmt = format or ("csv" if str(path).lower().endswith(".csv") else "json")
    if fmt == "csv":
        seq, meta = read_skeleton_csv(path, bones_path)
        traj = larp_from_skeleton(seq)
        meta = dict(meta)
        label = meta.pop("label", 0)
        meta["source"] = Path(path).name
        return LabeledDataset([traj], [label], meta)
    if fmt != "json":
        raise ValidationError(f"unknown dataset format {fmt!r}")
    return dataset_from_dict(read_json(path), path, strict, tol)


# --------------------------------------------------------------------------
# skeleton CSV + bones sidecar
# --------------------------------------------------------------------------

def bones_sidecar(path) -> Path:
    p = Path(path)
    return p.with_name(p.stem + ".bones.json")


def read_skeleton_csv(path, bones_path=None):
    """Rows ``frame_index, x0, y0, z0, x1, ...``; returns (SkeletonSequence, sidecar extras).

    The bone list comes from the sidecar JSON (``<stem>.bones.json`` by
    default); without one, the standard 15/20-joint trees are assumed.
    """
    try:
        fh = open(path, newline="", encoding="utf-8")
    except FileNotFoundError as exc:
        raise ParseError(f"no such file: {path}") from exc
    frames, rows = [], []
    with fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row or all(not c.strip() for c in row):
                continue
            if lineno == 1 and not _is_number(row[0]):
                continue  # header
            vals = []
            for col, cell in enumerate(row):
                try:
                    vals.append(float(cell))
                except ValueError as exc:
                    raise ParseError(f"non-numeric value {cell!r} in {path}", line=lineno,
                                     offset=col + 1) from exc
            if rows and len(vals) != len(rows[0]) + 1:
                raise ParseError(f"row has {len(vals)} columns, expected {len(rows[0]) + 1}",
                                 line=lineno, offset=len(vals))
            if (len(vals) - 1) % 3 != 0 or len(vals) < 7:
                raise ParseError("a row needs a frame index and at least two x,y,z joints",
                                 line=lineno, offset=len(vals))
            frames.append(vals[0])
            rows.append(vals[1:])
    if not rows:
        raise EmptyInput(f"{path} holds no frames")
    if np.any(np.diff(frames) <= 0):
        raise ValidationError(f"frame indices in {path} must be strictly increasing")
    joints = np.array(rows).reshape(len(rows), -1, 3)
    side = Path(bones_path) if bones_path is not None else bones_sidecar(path)
    extras = {}
    if side.exists():
        meta = read_json(side)
        bones = _field(meta, "bones", side)
        extras = {k: v for k, v in meta.items() if k != "bones"}
    else:
        bones = default_bones(joints.shape[1])
    return SkeletonSequence(joints, bones), extras


def _is_number(text):
    try:
        float(text)
        return True
    except ValueError:
        return False


def write_skeleton_csv(seq: SkeletonSequence, path, label=None):
    """Write the joints CSV and its bones sidecar."""
    lines = ["frame_index," + ",".join(f"{a}{j}" for j in range(seq.n_joints) for a in "xyz")]
    for t in range(seq.T):
        lines.append(",".join([str(t)] + [repr(float(v)) for v in seq.joints[t].reshape(-1)]))
    atomic_write(path, "\n".join(lines) + "\n")
    side = {"bones": [list(b) for b in seq.bones]}
    if label is not None:
        side["label"] = label
    write_json(side, bones_sidecar(path))


# --------------------------------------------------------------------------
# models and codes
# --------------------------------------------------------------------------

def _opt_array(a):
    return None if a is None else {"shape": list(np.shape(a)), "data": np.asarray(a).reshape(-1)}


def _read_opt_array(obj, what, path):
    if obj is None:
        return None
    shape = tuple(_field(obj, "shape", path))
    return _array(_field(obj, "data", path), shape, what, path)


def model_to_dict(cb: Codebook, codes=None) -> dict:
    M = cb.manifold
    return {
        "format": "rtraj-model",
        "format_version": FORMAT_VERSION,
        "manifold": manifold_to_dict(M),
        "method": cb.method,
        "T": cb.T,
        "basis": _opt_array(cb.basis),
        "mean": cb.mean.samples.reshape(-1),
        "reference": cb.reference.reshape(-1),
        "center": _opt_array(cb.center),
        "sparsity": cb.sparsity,
        "label_map": cb.label_map,
        "explained_variance": _opt_array(cb.explained_variance),
        "provenance": cb.provenance,
        "codes": _opt_array(codes),
    }


def save_model(cb: Codebook, codes, path):
    write_json(model_to_dict(cb, codes), path)


def model_from_dict(obj: dict, path="<memory>"):
    _header(obj, "rtraj-model", path)
    M = _manifold(_field(obj, "manifold", path), path)
    T = _field(obj, "T", path)
    mean = Trajectory(M, _array(_field(obj, "mean", path), (T,) + M.point_shape, "mean", path))
    ref = _array(_field(obj, "reference", path), M.point_shape, "reference", path)
    basis = _read_opt_array(_field(obj, "basis", path), "basis", path)
    if basis is None or basis.ndim != 2 or basis.shape[0] != T * M.coord_dim:
        raise ValidationError(f"basis in {path} does not match T * coord_dim = {T * M.coord_dim}")
    cb = Codebook(
        method=_field(obj, "method", path),
        basis=basis,
        mean=mean,
        reference=ref,
        center=_read_opt_array(obj.get("center"), "center", path),
        sparsity=obj.get("sparsity"),
        label_map=obj.get("label_map"),
        explained_variance=_read_opt_array(obj.get("explained_variance"), "explained_variance", path),
        provenance=dict(obj.get("provenance") or {}),
    )
    codes = _read_opt_array(obj.get("codes"), "codes", path)
    return cb, codes


def load_model(path):
    """Returns ``(codebook, codes)``; ``codes`` is (d, N) or None."""
    return model_from_dict(read_json(path), path)


def write_codes(codes, path, labels=None, method=None):
    """Codes as one row per trajectory."""
    codes = np.asarray(codes, float)
    write_json({"format": "rtraj-codes", "format_version": FORMAT_VERSION, "method": method,
                "d": codes.shape[0], "N": codes.shape[1], "codes": codes.T,
                "labels": None if labels is None else list(labels)}, path)


def read_codes(path):
    """Returns ``(codes (d, N), labels or None)``."""
    obj = _header(read_json(path), "rtraj-codes", path)
    d, N = _field(obj, "d", path), _field(obj, "N", path)
    if N == 0:
        raise EmptyInput(f"{path} holds no codes")
    rows = _array(_field(obj, "codes", path), (N, d), "codes", path)
    labels = obj.get("labels")
    if labels is not None and len(labels) != N:
        raise ValidationError(f"{path} has {len(labels)} labels for {N} codes")
    return rows.T.copy(), labels


# --------------------------------------------------------------------------
# points and mean results
# --------------------------------------------------------------------------

def write_point(M: Manifold, p, path):
    write_json({"format": "rtraj-point", "format_version": FORMAT_VERSION,
                "manifold": manifold_to_dict(M), "point": np.asarray(p).reshape(-1)}, path)


def read_point(path, strict: bool = True):
    obj = _header(read_json(path), "rtraj-point", path)
    M = _manifold(_field(obj, "manifold", path), path)
    p = _array(_field(obj, "point", path), M.point_shape, "point", path)
    if strict:
        check_points(M, p[None], where="reference point")
    return M, p


def mean_result_to_dict(res: MeanResult) -> dict:
    M = res.mean.manifold
    return {
        "format": "rtraj-mean",
        "format_version": FORMAT_VERSION,
        "manifold": manifold_to_dict(M),
        "T": res.mean.T,
        "N": len(res.aligned),
        "mean": res.mean.samples.reshape(-1),
        "aligned": [a.samples.reshape(-1) for a in res.aligned],
        "warps": np.asarray(res.warps),
        "error_trace": list(res.error_trace),
        "converged": res.converged,
        "iterations": res.iterations,
        "reference": np.asarray(res.reference).reshape(-1),
    }


def write_mean_result(res: MeanResult, path):
    write_json(mean_result_to_dict(res), path)


def read_mean_result(path) -> MeanResult:
    obj = _header(read_json(path), "rtraj-mean", path)
    M = _manifold(_field(obj, "manifold", path), path)
    T, N = _field(obj, "T", path), _field(obj, "N", path)
    shape = (T,) + M.point_shape
    mean = Trajectory(M, _array(_field(obj, "mean", path), shape, "mean", path))
    aligned = [Trajectory(M, _array(a, shape, f"aligned {i}", path))
               for i, a in enumerate(_field(obj, "aligned", path))]
    if len(aligned) != N:
        raise ValidationError(f"{path} declares N={N} but holds {len(aligned)} trajectories")
    return MeanResult(mean=mean, aligned=aligned, warps=np.asarray(_field(obj, "warps", path), float),
                      error_trace=list(_field(obj, "error_trace", path)),
                      converged=bool(_field(obj, "converged", path)),
                      reference=_array(_field(obj, "reference", path), M.point_shape, "reference", path),
                      iterations=int(obj.get("iterations", 0)))


# --------------------------------------------------------------------------
# flat tables
# --------------------------------------------------------------------------

def _cell(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (np.integer,)):
        return str(int(v))
    return str(v)


def write_csv(rows, path, header=None):
    lines = []
    if header is not None:
        lines.append(",".join(header))
    lines.extend(",".join(_cell(v) for v in row) for row in rows)
    atomic_write(path, "\n".join(lines) + "\n")


def read_matrix_csv(path) -> np.ndarray:
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            rows = [r for r in csv.reader(fh) if r]
    except FileNotFoundError as exc:
        raise ParseError(f"no such file: {path}") from exc
    out = []
    for lineno, row in enumerate(rows, start=1):
        try:
            out.append([float(c) for c in row])
        except ValueError as exc:
            raise ParseError(f"non-numeric cell in {path}", line=lineno) from exc
    return np.array(out)
