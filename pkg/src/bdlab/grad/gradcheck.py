"""Finite-difference gradient checking for autograd ops and composites."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .tensor import Tensor, tsum, mul


@dataclass
class GradCheckReport:
    name: str
    max_rel_error: float
    tolerance: float
    per_input: dict[str, float] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.max_rel_error < self.tolerance


def finite_diff_gradcheck(
    fn,
    inputs: dict[str, np.ndarray],
    eps: float = 1e-5,
    tolerance: float = 1e-4,
    name: str = "op",
    seed: int = 0,
) -> GradCheckReport:
    """Compare analytic gradients of ``fn`` against central differences.

    ``fn`` maps a dict of Tensors to a single output Tensor.  The output is
    contracted to a scalar with fixed random weights so the check covers the
    full Jacobian.  Inputs should be float64 for the stated tolerances to be
    meaningful.

    Relative error per input is ``max|a - n| / max(max|a|, max|n|, 1e-8)``,
    which stays stable when individual gradient entries are near zero.
    """
    rng = np.random.default_rng(seed)
    tensors = {k: Tensor(np.asarray(v, dtype=np.float64), requires_grad=True) for k, v in inputs.items()}

    out = fn(tensors)
    weights = rng.standard_normal(out.data.shape)
    loss = tsum(mul(out, Tensor(weights)))
    loss.backward()
    analytic = {k: (t.grad.copy() if t.grad is not None else np.zeros_like(t.data)) for k, t in tensors.items()}

    per_input: dict[str, float] = {}
    for key, t in tensors.items():
        numeric = np.zeros_like(t.data)
        flat = t.data.reshape(-1)
        nflat = numeric.reshape(-1)
        for i in range(flat.size):
            orig = flat[i]
            flat[i] = orig + eps
            hi = float((fn(tensors).data * weights).sum())
            flat[i] = orig - eps
            lo = float((fn(tensors).data * weights).sum())
            flat[i] = orig
            nflat[i] = (hi - lo) / (2.0 * eps)
        a = analytic[key]
        scale = max(np.abs(a).max(initial=0.0), np.abs(numeric).max(initial=0.0), 1e-8)
        per_input[key] = float(np.abs(a - numeric).max(initial=0.0) / scale)

    max_err = max(per_input.values()) if per_input else 0.0
    return GradCheckReport(name=name, max_rel_error=max_err, tolerance=tolerance, per_input=per_input)
