"""BPSK over bi-AWGN and fully interleaved Rayleigh fading with perfect CSI."""

from __future__ import annotations

from dataclasses import asdict, dataclass, replace
from functools import lru_cache

import numpy as np

CHANNEL_KINDS = ("awgn", "rayleigh")


@dataclass(frozen=True)
class ChannelSpec:
    """Channel and operating point.

    ``rate`` converts Eb/N0 to the noise variance. Leave it as ``None`` to
    let the evaluator fill in the actual rate k/n of the code under test.
    """

    kind: str = "awgn"
    ebno_db: float = 5.0
    rate: float | None = None

    def __post_init__(self):
        if self.kind not in CHANNEL_KINDS:
            raise ValueError(f"unknown channel kind {self.kind!r}; expected one of {CHANNEL_KINDS}")
        if self.rate is not None and not 0.0 < self.rate <= 1.0:
            raise ValueError(f"rate must lie in (0, 1], got {self.rate}")

    def with_rate(self, rate: float) -> "ChannelSpec":
        return replace(self, rate=float(rate))

    @property
    def noise_var(self) -> float:
        """sigma^2 = 1 / (2 R Eb/N0) for unit-energy BPSK symbols."""
        if self.rate is None:
            raise ValueError("channel rate is unset")
        if np.isinf(self.ebno_db) and self.ebno_db > 0:
            return 0.0
        return 1.0 / (2.0 * self.rate * 10.0 ** (self.ebno_db / 10.0))

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "ChannelSpec":
        unknown = set(d) - {"kind", "ebno_db", "rate"}
        if unknown:
            raise ValueError(f"unknown channel fields {sorted(unknown)}")
        return cls(**d)


@dataclass(frozen=True)
class LlrFrame:
    llrs: np.ndarray
    fading: np.ndarray
    truth: np.ndarray

    def __post_init__(self):
        if not (self.llrs.shape == self.fading.shape == self.truth.shape):
            raise ValueError("llrs, fading and truth must have equal length")


def stream(seed: int, *keys: int) -> np.random.Generator:
    """Independent generator for the sub-stream ``(seed, *keys)``."""
    return np.random.default_rng(np.random.SeedSequence([int(seed), *map(int, keys)]))


def _checked_noise_var(spec: ChannelSpec) -> float:
    var = spec.noise_var
    if not var > 0.0:
        raise ValueError(f"noise variance must be positive, got {var}")
    return var


def _draw(rng: np.random.Generator, kind: str, shape) -> tuple[np.ndarray, np.ndarray]:
    # fading first, then noise: fixes the stream layout for both channels
    if kind == "rayleigh":
        fading = rng.rayleigh(scale=np.sqrt(0.5), size=shape)
    else:
        fading = np.ones(shape)
    return fading, rng.standard_normal(shape)


def llrs_from_draws(symbols: np.ndarray, fading: np.ndarray, noise: np.ndarray,
                    noise_var: float) -> np.ndarray:
    """L = 2 h y / sigma^2 with y = h x + sigma z."""
    y = fading * symbols + np.sqrt(noise_var) * noise
    return 2.0 * fading * y / noise_var


def transmit(codeword, spec: ChannelSpec, rng: np.random.Generator) -> LlrFrame:
    """Send one codeword (0/1 bits) through the channel."""
    bits = np.asarray(codeword, dtype=np.uint8)
    var = _checked_noise_var(spec)
    fading, noise = _draw(rng, spec.kind, bits.shape)
    llrs = llrs_from_draws(1.0 - 2.0 * bits, fading, noise, var)
    return LlrFrame(llrs=llrs, fading=fading, truth=bits.copy())


def transmit_batch(codewords, spec: ChannelSpec, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """Vectorised :func:`transmit` for a (frames, n) array; returns (llrs, fading)."""
    bits = np.asarray(codewords, dtype=np.uint8)
    var = _checked_noise_var(spec)
    fading, noise = _draw(rng, spec.kind, bits.shape)
    return llrs_from_draws(1.0 - 2.0 * bits, fading, noise, var), fading


@lru_cache(maxsize=48)
def _zero_draws(seed: int, batch: int, frames: int, n: int, kind: str) -> tuple[np.ndarray, np.ndarray]:
    fading, noise = _draw(stream(seed, batch), kind, (frames, n))
    fading.setflags(write=False)
    noise.setflags(write=False)
    return fading, noise


def zero_codeword_llrs(seed: int, batch: int, frames: int, n: int, spec: ChannelSpec) -> np.ndarray:
    """Channel LLRs for ``frames`` all-zero codewords from sub-stream ``(seed, batch)``.

    The raw draws are cached, so candidates evaluated with the same seed see
    identical noise (common random numbers) while their rates may differ.
    """
    var = _checked_noise_var(spec)
    fading, noise = _zero_draws(int(seed), int(batch), int(frames), int(n), spec.kind)
    return llrs_from_draws(1.0, fading, noise, var)


def uncoded_ber(spec: ChannelSpec, num_bits: int, seed: int = 0) -> float:
    """Hard-decision BER of uncoded BPSK (rate defaults to 1)."""
    if num_bits < 10_000:
        raise ValueError("num_bits must be at least 1e4")
    if spec.rate is None:
        spec = spec.with_rate(1.0)
    rng = stream(seed, 0)
    bits = rng.integers(0, 2, size=num_bits, dtype=np.uint8)
    if spec.noise_var == 0.0:
        return 0.0
    frame = transmit(bits, spec, rng)
    decided = (frame.llrs < 0).astype(np.uint8)
    return float(np.count_nonzero(decided != bits)) / num_bits
