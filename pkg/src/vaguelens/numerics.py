"""Dense numeric primitives and a finite-difference gradient checker.

All functions operate on numpy arrays.  Verification runs in 64-bit
precision; training code may use 32-bit for speed, but the gradient
checker requires float64 inputs.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

GRAD_SAMPLE_THRESHOLD = 10_000  # above this many coordinates, sample instead
GRAD_SAMPLE_SIZE = 256

Params = dict[str, np.ndarray]
LossAndGradFn = Callable[[Params], tuple[float, Params]]


class DimensionError(ValueError):
    """Operand shapes are incompatible."""


class GradCheckError(RuntimeError):
    """The gradient check could not be completed."""


def affine(w: np.ndarray, x: np.ndarray, b: np.ndarray) -> np.ndarray:
    """``w @ x + b`` with explicit shape validation."""
    w = np.asarray(w)
    x = np.asarray(x)
    b = np.asarray(b)
    if w.ndim != 2 or x.ndim != 1 or w.shape[1] != x.shape[0]:
        raise DimensionError(f"affine: matrix {w.shape} incompatible with vector {x.shape}")
    if b.shape != (w.shape[0],):
        raise DimensionError(f"affine: bias {b.shape} incompatible with matrix {w.shape}")
    return w @ x + b


def sigmoid(v: np.ndarray) -> np.ndarray:
    """Element-wise logistic function, stable for large |v|."""
    v = np.asarray(v)
    out = np.empty_like(v, dtype=v.dtype)
    pos = v >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-v[pos]))
    ev = np.exp(v[~pos])
    out[~pos] = ev / (1.0 + ev)
    return out


def tanh_act(v: np.ndarray) -> np.ndarray:
    """Element-wise hyperbolic tangent."""
    return np.tanh(np.asarray(v))


def elem_mul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Element-wise product of two same-shape arrays."""
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape:
        raise DimensionError(f"elem_mul: shapes {a.shape} and {b.shape} differ")
    return a * b


def softmax(logits: np.ndarray, axis: int = -1) -> np.ndarray:
    """Max-subtracted normalized exponentials along ``axis``."""
    logits = np.asarray(logits)
    shifted = logits - np.max(logits, axis=axis, keepdims=True)
    exp = np.exp(shifted)
    return exp / np.sum(exp, axis=axis, keepdims=True)


def log_softmax(logits: np.ndarray, axis: int = -1) -> np.ndarray:
    """Log of softmax via the log-sum-exp formulation (underflow safe)."""
    logits = np.asarray(logits)
    shifted = logits - np.max(logits, axis=axis, keepdims=True)
    return shifted - np.log(np.sum(np.exp(shifted), axis=axis, keepdims=True))


def relative_error(analytic: float, numeric: float, floor: float = 1e-8) -> float:
    """|a - n| / max(|a|, |n|, floor)."""
    return abs(analytic - numeric) / max(abs(analytic), abs(numeric), floor)


@dataclass(frozen=True)
class ParamCheck:
    """Gradient-check outcome for one named parameter tensor."""

    name: str
    max_rel_error: float
    argmax_index: tuple[int, ...]
    analytic_at_argmax: float
    numeric_at_argmax: float
    n_checked: int


@dataclass(frozen=True)
class GradCheckReport:
    checks: tuple[ParamCheck, ...]
    epsilon: float

    @property
    def max_rel_error(self) -> float:
        return max((c.max_rel_error for c in self.checks), default=0.0)

    @property
    def worst(self) -> ParamCheck | None:
        return max(self.checks, key=lambda c: c.max_rel_error, default=None)

    def summary(self) -> str:
        lines = [f"gradient check (epsilon={self.epsilon:g})"]
        for c in sorted(self.checks, key=lambda c: -c.max_rel_error):
            lines.append(
                f"  {c.name:<24} max rel err {c.max_rel_error:.3e} at {c.argmax_index} "
                f"(analytic {c.analytic_at_argmax:.6e}, numeric {c.numeric_at_argmax:.6e}, "
                f"{c.n_checked} coords)"
            )
        return "\n".join(lines)


def grad_check(
    loss_fn: LossAndGradFn,
    params: Params,
    epsilon: float = 1e-5,
    seed: int = 0,
) -> GradCheckReport:
    """Compare analytic gradients against central finite differences.

    ``loss_fn(params)`` must return ``(loss, grads)`` with one gradient
    array per parameter.  Every coordinate is checked unless the total
    parameter count exceeds ``GRAD_SAMPLE_THRESHOLD``, in which case a
    seeded random sample of coordinates is checked instead.  Requires
    float64 parameters; epsilon must lie in [1e-6, 1e-3].
    """
    if not 1e-6 <= epsilon <= 1e-3:
        raise ValueError(f"epsilon {epsilon:g} outside [1e-6, 1e-3]")
    for name, value in params.items():
        if value.dtype != np.float64:
            raise ValueError(f"grad_check requires float64 parameters ({name} is {value.dtype})")

    work = {name: value.copy() for name, value in params.items()}
    loss, grads = loss_fn(work)
    if not np.isfinite(loss):
        raise GradCheckError(f"loss is non-finite ({loss}); check aborted")
    missing = set(params) - set(grads)
    if missing:
        raise GradCheckError(f"loss_fn returned no gradient for: {sorted(missing)}")

    total = sum(v.size for v in params.values())
    rng = np.random.default_rng(seed)
    checks: list[ParamCheck] = []
    for name in params:
        value = work[name]
        grad = grads[name]
        if grad.shape != value.shape:
            raise GradCheckError(f"gradient shape {grad.shape} != parameter shape {value.shape}")
        flat = value.reshape(-1)
        if total > GRAD_SAMPLE_THRESHOLD and flat.size > 0:
            n_sample = min(flat.size, max(GRAD_SAMPLE_SIZE, 1))
            coords = rng.choice(flat.size, size=n_sample, replace=False)
        else:
            coords = np.arange(flat.size)
        worst_err = 0.0
        worst_idx: tuple[int, ...] = ()
        worst_a = worst_n = 0.0
        grad_flat = grad.reshape(-1)
        for j in coords:
            orig = flat[j]
            flat[j] = orig + epsilon
            loss_plus, _ = loss_fn(work)
            flat[j] = orig - epsilon
            loss_minus, _ = loss_fn(work)
            flat[j] = orig
            if not (np.isfinite(loss_plus) and np.isfinite(loss_minus)):
                raise GradCheckError(f"non-finite loss while perturbing {name}[{j}]")
            numeric = (loss_plus - loss_minus) / (2.0 * epsilon)
            err = relative_error(float(grad_flat[j]), float(numeric))
            if err >= worst_err:
                worst_err = err
                worst_idx = np.unravel_index(int(j), value.shape)
                worst_a, worst_n = float(grad_flat[j]), float(numeric)
        checks.append(
            ParamCheck(
                name=name,
                max_rel_error=worst_err,
                argmax_index=worst_idx,
                analytic_at_argmax=worst_a,
                numeric_at_argmax=worst_n,
                n_checked=len(coords),
            )
        )
    return GradCheckReport(checks=tuple(checks), epsilon=epsilon)
