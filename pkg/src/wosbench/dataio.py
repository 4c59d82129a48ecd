"""Bit-exact dataset packaging.

Bundles are ZIP archives of uncompressed NPY members (magic \\x93NUMPY,
format 1.0, little-endian float32, C order), readable by any scientific
array tooling; member timestamps are pinned so re-generation with the
same seed is byte-identical.  Case records are one JSON object per line
(UTF-8, LF), with the analytic solution carried as a parseable prefix
expression.
"""

from __future__ import annotations

import ast
import json
import os
import struct
import zipfile
from typing import Iterator

import numpy as np

from .expr import solution_from_string, solution_to_string
from .field import Field
from .geometry import Domain
from .manufactured import PdeInstance

_ZIP_DATE = (1980, 1, 1, 0, 0, 0)
BUNDLE_ENTRIES = ("noisy", "clean", "mask")


class IoError(OSError):
    pass


class ParseError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        super().__init__(f"line {line}: {message}" if line is not None else message)
        self.line = line


# -- NPY serialization -------------------------------------------------------


def npy_bytes(arr: np.ndarray) -> bytes:
    """Serialize a float32 C-order array as NPY format 1.0."""
    arr = np.ascontiguousarray(arr, dtype=np.float32)
    shape = ",".join(str(s) for s in arr.shape)
    if arr.ndim == 1:
        shape += ","
    header = "{'descr': '<f4', 'fortran_order': False, 'shape': (%s), }" % shape
    pad = 64 - ((10 + len(header) + 1) % 64)
    header = header + " " * pad + "\n"
    return b"\x93NUMPY" + bytes([1, 0]) + struct.pack("<H", len(header)) + header.encode(
        "latin1"
    ) + arr.tobytes()


def parse_npy_bytes(data: bytes) -> np.ndarray:
    if data[:6] != b"\x93NUMPY":
        raise ParseError("bad NPY magic")
    (hlen,) = struct.unpack("<H", data[8:10])
    header = ast.literal_eval(data[10 : 10 + hlen].decode("latin1"))
    if header["descr"] != "<f4" or header["fortran_order"]:
        raise ParseError(f"unsupported NPY layout: {header}")
    arr = np.frombuffer(data[10 + hlen :], dtype="<f4")
    return arr.reshape(header["shape"]).copy()


def write_arrays(path: str, **arrays: np.ndarray):
    """Write named float32 arrays as an uncompressed, timestamp-pinned zip."""
    try:
        tmp = path + ".tmp"
        with zipfile.ZipFile(tmp, "w", zipfile.ZIP_STORED) as zf:
            for name, arr in arrays.items():
                info = zipfile.ZipInfo(name + ".npy", date_time=_ZIP_DATE)
                zf.writestr(info, npy_bytes(arr))
        os.replace(tmp, path)
    except OSError as e:
        raise IoError(str(e)) from e


def read_arrays(path: str) -> dict[str, np.ndarray]:
    try:
        out = {}
        with zipfile.ZipFile(path, "r") as zf:
            for name in zf.namelist():
                key = name[:-4] if name.endswith(".npy") else name
                out[key] = parse_npy_bytes(zf.read(name))
        return out
    except (OSError, zipfile.BadZipFile) as e:
        raise IoError(str(e)) from e


def write_bundle(path: str, noisy: Field, clean: Field, mask: Field):
    """The three-array case bundle: estimate, ground truth, domain mask."""
    write_arrays(path, noisy=noisy.values, clean=clean.values, mask=mask.values)


def read_bundle(path: str) -> dict[str, Field]:
    arrays = read_arrays(path)
    missing = [k for k in BUNDLE_ENTRIES if k not in arrays]
    if missing:
        raise ParseError(f"bundle missing entries {missing}")
    mask = arrays["mask"]
    return {k: Field(arrays[k], mask.copy()) for k in BUNDLE_ENTRIES}


# -- JSONL case records -------------------------------------------------------


def instance_to_record(instance: PdeInstance) -> dict:
    return {
        "case_id": instance.case_id,
        "kind": instance.family,
        "lambda": instance.lam,
        "k": instance.k,
        "solution_expr": solution_to_string(instance.solution),
        "domain": instance.domain.to_json_dict(),
        "n_terms": instance.solution.n_terms,
        "std_u": instance.std_u,
        "std_f": instance.std_f,
    }


def record_to_instance(rec: dict) -> PdeInstance:
    return PdeInstance(
        case_id=rec["case_id"],
        family=rec["kind"],
        lam=float(rec["lambda"]),
        k=float(rec["k"]),
        domain=Domain.from_json_dict(rec["domain"]),
        solution=solution_from_string(rec["solution_expr"]),
        std_u=float(rec.get("std_u", float("nan"))),
        std_f=float(rec.get("std_f", float("nan"))),
    )


def record_line(instance: PdeInstance) -> str:
    return json.dumps(instance_to_record(instance), separators=(",", ":")) + "\n"


def write_case_records(path: str, instances) -> None:
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fp:
            for inst in instances:
                fp.write(record_line(inst))
    except OSError as e:
        raise IoError(str(e)) from e


def read_case_records(path: str) -> Iterator[PdeInstance]:
    with open(path, "r", encoding="utf-8") as fp:
        for lineno, line in enumerate(fp, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                yield record_to_instance(json.loads(line))
            except Exception as e:
                raise ParseError(str(e), line=lineno) from e


# -- dataset directory layout ---------------------------------------------------

CASES_FILE = "cases.jsonl"
GT_DIR = "gt"
TRAJ_DIR = "traj"


def gt_path(root: str, case_id: str) -> str:
    return os.path.join(root, GT_DIR, f"{case_id}.npz")


def traj_dir(root: str, case_id: str) -> str:
    return os.path.join(root, TRAJ_DIR, case_id)


def budget_path(root: str, case_id: str, budget: int) -> str:
    return os.path.join(traj_dir(root, case_id), f"B{budget}.npz")


def traj_meta_path(root: str, case_id: str) -> str:
    return os.path.join(traj_dir(root, case_id), f"{case_id}.json")


def write_trajectory(root: str, case_id: str, budgets, fields, clean: Field,
                     mask: Field, meta: dict):
    d = traj_dir(root, case_id)
    os.makedirs(d, exist_ok=True)
    for b, f in zip(budgets, fields):
        write_bundle(budget_path(root, case_id, b), f, clean, mask)
    with open(traj_meta_path(root, case_id), "w", encoding="utf-8", newline="\n") as fp:
        json.dump(meta, fp, separators=(",", ":"), sort_keys=True)
        fp.write("\n")
