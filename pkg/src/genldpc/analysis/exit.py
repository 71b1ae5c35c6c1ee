"""EXIT curves of the variable- and check-node decoders (Gaussian approximation)."""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources

import numpy as np

from ..codes import ParityCheckMatrix


@lru_cache(maxsize=None)
def _constants(path: str | None = None) -> dict:
    if path is None:
        text = resources.files("genldpc").joinpath("data/jfunction.json").read_text()
    else:
        with open(path) as fh:
            text = fh.read()
    return json.loads(text)


def J(sigma, constants: dict | None = None) -> np.ndarray:
    """Mutual information of a consistent Gaussian LLR with std ``sigma``."""
    c = (constants or _constants())["J"]
    s = np.abs(np.asarray(sigma, dtype=float))
    lo, hi = c["low"], c["high"]
    with np.errstate(over="ignore", invalid="ignore"):
        low = lo["a"] * s**3 + lo["b"] * s**2 + lo["c"] * s
        high = 1.0 - np.exp(hi["a"] * s**3 + hi["b"] * s**2 + hi["c"] * s + hi["d"])
    out = np.where(s <= c["sigma_split"], low, np.where(s < c["sigma_max"], high, 1.0))
    return np.clip(out, 0.0, 1.0)


def J_inv(info, constants: dict | None = None) -> np.ndarray:
    c = (constants or _constants())["J_inverse"]
    i = np.clip(np.asarray(info, dtype=float), 0.0, 1.0)
    lo, hi = c["low"], c["high"]
    low = lo["a"] * i**2 + lo["b"] * i + lo["c"] * np.sqrt(i)
    with np.errstate(divide="ignore", invalid="ignore"):
        high = -hi["a"] * np.log(hi["b"] * (1.0 - i)) - hi["c"] * i
    return np.where(i <= c["I_split"], low, np.where(i < 1.0, high, np.inf))


@dataclass(frozen=True)
class ExitCurve:
    side: str  # "VND" or "CND"
    i_a: np.ndarray
    i_e: np.ndarray
    degrees: dict[int, float]
    sigma_ch: float | None = None

    def to_csv(self) -> str:
        lines = ["side,I_A,I_E"]
        lines += [f"{self.side},{a!r},{e!r}" for a, e in zip(self.i_a.tolist(), self.i_e.tolist())]
        return "\n".join(lines) + "\n"


def _normalized(hist: dict) -> dict[int, float]:
    if not hist:
        raise ValueError("empty degree distribution")
    total = sum(hist.values())
    if abs(total - 1.0) > 1e-9 or any(v < 0 for v in hist.values()):
        raise ValueError(f"edge-perspective distribution must be non-negative and sum to 1 (got {total})")
    if any(int(d) < 1 for d in hist):
        raise ValueError("degrees must be >= 1")
    return {int(d): float(v) for d, v in hist.items()}


def edge_distributions(H: ParityCheckMatrix) -> tuple[dict[int, float], dict[int, float]]:
    """(lambda, rho): fraction of edges attached to VNs / CNs of each degree."""
    E = H.num_edges
    vn, cn = {}, {}
    for d in np.unique(H.col_weights):
        if d > 0:
            vn[int(d)] = float(d * np.count_nonzero(H.col_weights == d) / E)
    for d in np.unique(H.row_weights):
        if d > 0:
            cn[int(d)] = float(d * np.count_nonzero(H.row_weights == d) / E)
    return vn, cn


def sigma_channel(ebno_db: float, rate: float) -> float:
    """Std of the channel LLR for BPSK on bi-AWGN: sqrt(8 R Eb/N0)."""
    return float(np.sqrt(8.0 * rate * 10.0 ** (ebno_db / 10.0)))


def exit_vnd(lam: dict, sigma_ch: float, i_a) -> ExitCurve:
    lam = _normalized(lam)
    ia = np.asarray(i_a, dtype=float)
    s = J_inv(ia)
    ie = np.zeros_like(ia)
    for d, frac in lam.items():
        with np.errstate(invalid="ignore"):
            arg = np.sqrt((d - 1) * np.where(np.isinf(s), np.inf, s**2) + sigma_ch**2) if d > 1 \
                else np.full_like(ia, sigma_ch)
        ie += frac * J(arg)
    return ExitCurve("VND", ia, ie, lam, sigma_ch)


def exit_cnd(rho: dict, i_a) -> ExitCurve:
    rho = _normalized(rho)
    ia = np.asarray(i_a, dtype=float)
    s = J_inv(1.0 - ia)
    ie = np.zeros_like(ia)
    for d, frac in rho.items():
        ie += frac * (1.0 - J(np.sqrt(d - 1) * s))
    return ExitCurve("CND", ia, ie, rho)


def tunnel_open(lam: dict, rho: dict, sigma_ch: float, points: int = 2001, top: float = 0.999) -> bool:
    """True if CND(VND(I)) > I everywhere on [0, top]."""
    grid = np.linspace(0.0, top, points)
    vnd = exit_vnd(lam, sigma_ch, grid).i_e
    return bool(np.all(exit_cnd(rho, vnd).i_e > grid))


def exit_threshold(lam: dict, rho: dict, rate: float, lo: float = -2.0, hi: float = 6.0,
                   tol: float = 1e-4) -> float:
    """Smallest Eb/N0 (dB) with an open tunnel, by bisection."""
    if tunnel_open(lam, rho, sigma_channel(lo, rate)):
        return lo
    if not tunnel_open(lam, rho, sigma_channel(hi, rate)):
        raise ValueError(f"tunnel closed even at {hi} dB")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if tunnel_open(lam, rho, sigma_channel(mid, rate)):
            hi = mid
        else:
            lo = mid
    return hi
