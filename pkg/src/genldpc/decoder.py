"""Flooding sum-product BP decoder with syndrome-based early stopping."""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numba
import numpy as np

from .channels import LlrFrame
from .codes import ParityCheckMatrix, TannerArrays


@dataclass(frozen=True)
class DecoderConfig:
    """BP settings.

    ``llr_clamp`` caps every message magnitude; ``tanh_guard`` keeps
    ``|tanh| <= 1 - tanh_guard`` before the inverse. ``early_stop=False``
    always runs ``max_iterations`` (used to check that stopping does not
    change decisions).
    """

    max_iterations: int = 20
    llr_clamp: float = 30.0
    tanh_guard: float = 1e-12
    early_stop: bool = True

    def __post_init__(self):
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if not self.llr_clamp > 0:
            raise ValueError("llr_clamp must be positive")
        if not 0.0 < self.tanh_guard < 1e-6:
            raise ValueError("tanh_guard must lie in (0, 1e-6)")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "DecoderConfig":
        unknown = set(d) - {"max_iterations", "llr_clamp", "tanh_guard", "early_stop"}
        if unknown:
            raise ValueError(f"unknown decoder fields {sorted(unknown)}")
        return cls(**d)


@dataclass(frozen=True)
class DecodeOutcome:
    hard_bits: np.ndarray
    iterations_used: int
    syndrome_ok: bool
    converged_at: int | None


@numba.njit(cache=True)
def _syndrome_zero(hard, edge_var, chk_ptr):
    m = chk_ptr.size - 1
    for j in range(m):
        p = 0
        for e in range(chk_ptr[j], chk_ptr[j + 1]):
            p ^= hard[edge_var[e]]
        if p:
            return False
    return True


@numba.njit(cache=True)
def _decode_kernel(llrs, edge_var, chk_ptr, var_ptr, var_edges, max_iter, clamp, guard, early_stop,
                   out_bits, out_iters, out_conv):
    """Decode each row of ``llrs``; results go to the ``out_*`` arrays.

    ``out_conv[f]`` is the first iteration with a zero syndrome (0 = the
    channel decisions were already a codeword) or -1 if never reached.
    """
    frames, n = llrs.shape
    m = chk_ptr.size - 1
    n_edges = edge_var.size
    v2c = np.empty(n_edges)
    c2v = np.empty(n_edges)
    tv = np.empty(n_edges)
    fwd = np.empty(n_edges)
    hard = np.empty(n, dtype=np.uint8)
    tmax = 1.0 - guard
    for f in range(frames):
        for i in range(n):
            hard[i] = 1 if llrs[f, i] < 0.0 else 0
        for e in range(n_edges):
            x = llrs[f, edge_var[e]]
            v2c[e] = min(max(x, -clamp), clamp)
        conv = -1
        iters = 0
        if _syndrome_zero(hard, edge_var, chk_ptr):
            conv = 0
        if not (conv == 0 and early_stop):
            for it in range(1, max_iter + 1):
                iters = it
                # check nodes: extrinsic tanh products via prefix/suffix scans
                for j in range(m):
                    a = chk_ptr[j]
                    b = chk_ptr[j + 1]
                    acc = 1.0
                    for e in range(a, b):
                        t = np.tanh(0.5 * v2c[e])
                        if t > tmax:
                            t = tmax
                        elif t < -tmax:
                            t = -tmax
                        tv[e] = t
                        fwd[e] = acc
                        acc *= t
                    acc = 1.0
                    for e in range(b - 1, a - 1, -1):
                        p = fwd[e] * acc
                        acc *= tv[e]
                        if p > tmax:
                            p = tmax
                        elif p < -tmax:
                            p = -tmax
                        x = np.log((1.0 + p) / (1.0 - p))
                        c2v[e] = min(max(x, -clamp), clamp)
                # variable nodes
                for i in range(n):
                    a = var_ptr[i]
                    b = var_ptr[i + 1]
                    total = llrs[f, i]
                    for k in range(a, b):
                        total += c2v[var_edges[k]]
                    for k in range(a, b):
                        e = var_edges[k]
                        x = total - c2v[e]
                        v2c[e] = min(max(x, -clamp), clamp)
                    hard[i] = 1 if total < 0.0 else 0
                if _syndrome_zero(hard, edge_var, chk_ptr):
                    if conv < 0:
                        conv = it
                    if early_stop:
                        break
        for i in range(n):
            out_bits[f, i] = hard[i]
        out_iters[f] = iters
        out_conv[f] = conv


def decode_batch(H: ParityCheckMatrix | TannerArrays, llrs, cfg: DecoderConfig):
    """Decode a (frames, n) LLR array.

    Returns ``(hard_bits, iterations_used, converged_at)``; ``converged_at``
    is -1 for frames that never reached a zero syndrome.
    """
    t = H.tanner if isinstance(H, ParityCheckMatrix) else H
    llrs = np.ascontiguousarray(llrs, dtype=np.float64)
    if llrs.ndim == 1:
        llrs = llrs[None, :]
    if llrs.ndim != 2 or llrs.shape[1] != t.n:
        raise ValueError(f"expected LLR frames of length {t.n}, got shape {llrs.shape}")
    if not np.all(np.isfinite(llrs)):
        raise ValueError("channel LLRs must be finite")
    frames = llrs.shape[0]
    bits = np.empty((frames, t.n), dtype=np.uint8)
    iters = np.empty(frames, dtype=np.int64)
    conv = np.empty(frames, dtype=np.int64)
    _decode_kernel(llrs, t.edge_var, t.chk_ptr, t.var_ptr, t.var_edges, int(cfg.max_iterations),
                   float(cfg.llr_clamp), float(cfg.tanh_guard), bool(cfg.early_stop), bits, iters, conv)
    return bits, iters, conv


def decode(H: ParityCheckMatrix, frame, cfg: DecoderConfig = DecoderConfig()) -> DecodeOutcome:
    """Decode one frame (an :class:`LlrFrame` or a plain LLR vector)."""
    llrs = frame.llrs if isinstance(frame, LlrFrame) else np.asarray(frame, dtype=np.float64)
    if llrs.ndim != 1:
        raise ValueError("decode expects a single frame; use decode_batch for several")
    bits, iters, conv = decode_batch(H, llrs, cfg)
    ok = bool(not syndrome(H, bits[0]).any())
    c = int(conv[0])
    return DecodeOutcome(hard_bits=bits[0], iterations_used=int(iters[0]), syndrome_ok=ok,
                         converged_at=c if c >= 0 else None)


def syndrome(H: ParityCheckMatrix, bits) -> np.ndarray:
    """H x over GF(2) as a length-m uint8 vector."""
    x = np.asarray(bits, dtype=np.uint8).ravel()
    if x.size != H.n:
        raise ValueError(f"expected {H.n} bits, got {x.size}")
    s = np.zeros(H.m, dtype=np.uint8)
    np.bitwise_xor.at(s, H.rows, x[H.cols] & 1)
    return s
