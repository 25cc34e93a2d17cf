"""Named parameter collections, Adam, cosine LR schedule, and checkpoints."""

from __future__ import annotations

import json
import math
import struct
from pathlib import Path

import numpy as np

from .tensor import GradError, Tensor


class ParameterSet:
    """Named tensors plus per-parameter Adam state and a step counter.

    Non-trainable entries (e.g. batch-norm running statistics) ride along in
    checkpoints but are never touched by the optimizer.
    """

    def __init__(self):
        self.params: dict[str, Tensor] = {}
        self.trainable: dict[str, bool] = {}
        self.moment1: dict[str, np.ndarray] = {}
        self.moment2: dict[str, np.ndarray] = {}
        self.step_count = 0

    def add(self, name: str, data: np.ndarray, trainable: bool = True) -> Tensor:
        if name in self.params:
            raise KeyError(f"duplicate parameter name: {name}")
        t = Tensor(np.ascontiguousarray(data), requires_grad=trainable)
        self.params[name] = t
        self.trainable[name] = trainable
        if trainable:
            self.moment1[name] = np.zeros_like(t.data)
            self.moment2[name] = np.zeros_like(t.data)
        return t

    def __getitem__(self, name: str) -> Tensor:
        return self.params[name]

    def zero_grad(self) -> None:
        for t in self.params.values():
            t.grad = None

    def trainable_items(self):
        return [(n, t) for n, t in self.params.items() if self.trainable[n]]

    def grad_norms(self) -> dict[str, float]:
        return {
            n: float(np.sqrt((t.grad ** 2).sum())) if t.grad is not None else float("nan")
            for n, t in self.trainable_items()
        }

    def n_values(self) -> int:
        return sum(t.data.size for t in self.params.values())


def adam_step(
    params: ParameterSet,
    lr: float,
    beta1: float = 0.9,
    beta2: float = 0.999,
    eps: float = 1e-8,
    weight_decay: float = 1e-6,
) -> None:
    """One Adam update; weight decay enters as an L2 term on the gradient."""
    params.step_count += 1
    t = params.step_count
    bc1 = 1.0 - beta1 ** t
    bc2 = 1.0 - beta2 ** t
    for name, p in params.trainable_items():
        if p.grad is None:
            raise GradError(f"adam_step: parameter '{name}' has no gradient")
        g = p.grad + weight_decay * p.data if weight_decay else p.grad
        m = params.moment1[name]
        v = params.moment2[name]
        m += (1.0 - beta1) * (g - m)
        v += (1.0 - beta2) * (g * g - v)
        p.data -= lr * (m / bc1) / (np.sqrt(v / bc2) + eps)


def cosine_lr(step: int, total_steps: int, base_lr: float) -> float:
    """Cosine decay from base_lr at step 0 to zero at total_steps."""
    if step < 0:
        raise ValueError(f"cosine_lr: negative step {step}")
    if step >= total_steps:
        return 0.0
    return base_lr * (1.0 + math.cos(math.pi * step / total_steps)) / 2.0


# -- checkpoint format ------------------------------------------------------
#
# Binary layout (little-endian):
#   magic "BDLCKPT1" | uint32 n_entries | entries...
# Each entry:
#   uint16 name_len | name utf-8 | uint8 trainable | uint8 dtype_code
#   | uint8 ndim | uint32 dims[ndim] | raw values
# A JSON sidecar "<path>.json" carries model hyperparameters.

_MAGIC = b"BDLCKPT1"
_DTYPES = {0: np.dtype("<f4"), 1: np.dtype("<f8")}
_DTYPE_CODES = {np.dtype("float32"): 0, np.dtype("float64"): 1}


def save_checkpoint(params: ParameterSet, path: str | Path, meta: dict | None = None) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "wb") as f:
        f.write(_MAGIC)
        f.write(struct.pack("<I", len(params.params)))
        for name in params.params:
            t = params.params[name]
            raw = name.encode("utf-8")
            code = _DTYPE_CODES[np.dtype(t.data.dtype)]
            f.write(struct.pack("<H", len(raw)))
            f.write(raw)
            f.write(struct.pack("<BBB", int(params.trainable[name]), code, t.data.ndim))
            f.write(struct.pack(f"<{t.data.ndim}I", *t.data.shape))
            f.write(np.ascontiguousarray(t.data, dtype=_DTYPES[code]).tobytes())
    meta_path = path.with_suffix(path.suffix + ".json")
    with open(meta_path, "w") as f:
        json.dump(meta or {}, f, indent=2, sort_keys=True)


def load_checkpoint(path: str | Path) -> tuple[ParameterSet, dict]:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"checkpoint not found: {path}")
    params = ParameterSet()
    with open(path, "rb") as f:
        if f.read(len(_MAGIC)) != _MAGIC:
            raise ValueError(f"not a checkpoint file: {path}")
        (n_entries,) = struct.unpack("<I", f.read(4))
        for _ in range(n_entries):
            (name_len,) = struct.unpack("<H", f.read(2))
            name = f.read(name_len).decode("utf-8")
            trainable, code, ndim = struct.unpack("<BBB", f.read(3))
            shape = struct.unpack(f"<{ndim}I", f.read(4 * ndim))
            dtype = _DTYPES[code]
            raw = f.read(int(np.prod(shape)) * dtype.itemsize)
            data = np.frombuffer(raw, dtype=dtype).reshape(shape).copy()
            params.add(name, data, trainable=bool(trainable))
    meta_path = path.with_suffix(path.suffix + ".json")
    meta = json.loads(meta_path.read_text()) if meta_path.exists() else {}
    return params, meta


def load_into(params: ParameterSet, path: str | Path) -> dict:
    """Copy checkpoint values into an existing ParameterSet in place."""
    loaded, meta = load_checkpoint(path)
    if set(loaded.params) != set(params.params):
        missing = set(params.params) ^ set(loaded.params)
        raise ValueError(f"checkpoint/model parameter mismatch: {sorted(missing)}")
    for name, t in params.params.items():
        src = loaded.params[name].data
        if src.shape != t.data.shape:
            raise ValueError(f"shape mismatch for '{name}': {src.shape} vs {t.data.shape}")
        t.data[...] = src.astype(t.data.dtype)
    return meta
