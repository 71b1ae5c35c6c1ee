"""Monte-Carlo BLER/BER, average iteration count and decoding complexity."""

from __future__ import annotations

import csv
import io
import time
from dataclasses import asdict, dataclass

import numpy as np

from .channels import ChannelSpec, zero_codeword_llrs
from .codes import ParityCheckMatrix
from .decoder import DecoderConfig, decode_batch

# Frame batches grow geometrically; sub-stream b always has this many frames,
# so frame f sees the same noise for every code evaluated with one seed.
FIRST_BATCH = 256
LARGEST_BATCH = 8192

CSV_COLUMNS = ("ebno_db", "frames", "block_errors", "bler", "ber", "n_it_avg", "eta", "seed")


@dataclass(frozen=True)
class StoppingRule:
    """Stop at ``min_block_errors`` errors or ``max_frames`` frames, whichever first."""

    min_block_errors: int = 100
    max_frames: int = 100_000

    def __post_init__(self):
        if self.min_block_errors < 1:
            raise ValueError("min_block_errors must be >= 1")
        if self.max_frames < 1:
            raise ValueError("max_frames must be >= 1")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "StoppingRule":
        unknown = set(d) - {"min_block_errors", "max_frames"}
        if unknown:
            raise ValueError(f"unknown stopping-rule fields {sorted(unknown)}")
        return cls(**d)


@dataclass(frozen=True)
class EvalReport:
    ebno_db: float
    frames_sent: int
    block_errors: int
    bit_errors: int
    bler: float
    ber: float
    iterations_total: int
    iterations_sq_total: int
    n_it_avg: float
    eta: float
    num_edges: int
    k: int
    seed: int
    wall_clock: float = 0.0

    @property
    def bler_stderr(self) -> float:
        p = self.bler
        return float(np.sqrt(p * (1.0 - p) / self.frames_sent))

    @property
    def n_it_stderr(self) -> float:
        mean = self.iterations_total / self.frames_sent
        var = max(self.iterations_sq_total / self.frames_sent - mean * mean, 0.0)
        return float(np.sqrt(var / self.frames_sent))

    def csv_row(self) -> dict:
        return {"ebno_db": self.ebno_db, "frames": self.frames_sent, "block_errors": self.block_errors,
                "bler": self.bler, "ber": self.ber, "n_it_avg": self.n_it_avg, "eta": self.eta,
                "seed": self.seed}


def batch_sizes():
    b, size = 0, FIRST_BATCH
    while True:
        yield b, size
        b += 1
        size = min(2 * size, LARGEST_BATCH)


def _resolved(H: ParityCheckMatrix, spec: ChannelSpec) -> tuple[ChannelSpec, int]:
    k = H.n - H.rank
    if k < 1:
        raise ValueError("code has no information bits (rank(H) = n)")
    if spec.rate is None:
        spec = spec.with_rate(k / H.n)
    if not np.isfinite(spec.ebno_db):
        raise ValueError("ebno_db must be finite")
    return spec, k


def evaluate(H: ParityCheckMatrix, spec: ChannelSpec, cfg: DecoderConfig, rule: StoppingRule,
             seed: int) -> EvalReport:
    """Simulate all-zero codewords until ``rule`` fires.

    A block error is any frame whose decisions differ from the transmitted
    word, including undetected errors. ``n_it_avg`` averages over all frames.
    """
    start = time.perf_counter()
    spec, k = _resolved(H, spec)
    tanner = H.tanner
    frames = block_errors = bit_errors = iters_total = iters_sq = 0
    for b, full in batch_sizes():
        size = min(full, rule.max_frames - frames)
        llrs = zero_codeword_llrs(seed, b, full, H.n, spec)[:size]
        bits, iters, _ = decode_batch(tanner, llrs, cfg)
        bit_err = bits.sum(axis=1, dtype=np.int64)
        blk = bit_err > 0
        need = rule.min_block_errors - block_errors
        cum = np.cumsum(blk)
        if cum.size and cum[-1] >= need:
            size = int(np.searchsorted(cum, need)) + 1
        frames += size
        block_errors += int(blk[:size].sum())
        bit_errors += int(bit_err[:size].sum())
        iters_total += int(iters[:size].sum())
        iters_sq += int((iters[:size] ** 2).sum())
        if block_errors >= rule.min_block_errors or frames >= rule.max_frames:
            break
    if frames == 0:
        raise ValueError("no frames were simulated")
    n_it_avg = iters_total / frames
    return EvalReport(
        ebno_db=float(spec.ebno_db), frames_sent=frames, block_errors=block_errors, bit_errors=bit_errors,
        bler=block_errors / frames, ber=bit_errors / (frames * H.n), iterations_total=iters_total,
        iterations_sq_total=iters_sq, n_it_avg=n_it_avg, eta=complexity(n_it_avg, H.num_edges, k),
        num_edges=H.num_edges, k=k, seed=int(seed), wall_clock=time.perf_counter() - start)


def complexity(n_it_avg: float, num_edges: int, k: int) -> float:
    """Average decoding complexity per information bit, N_it,avg * E / k."""
    return n_it_avg * num_edges / k


def point_seed(seed: int, index: int) -> int:
    return int(np.random.SeedSequence([int(seed), int(index)]).generate_state(1)[0])


def sweep(H: ParityCheckMatrix, specs, cfg: DecoderConfig, rule: StoppingRule, seed: int) -> list[EvalReport]:
    """One :func:`evaluate` per operating point, each with its own derived seed."""
    return [evaluate(H, spec, cfg, rule, point_seed(seed, i)) for i, spec in enumerate(specs)]


def reports_to_csv(reports, path=None) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
    writer.writeheader()
    for r in reports:
        writer.writerow(r.csv_row())
    text = buf.getvalue()
    if path is not None:
        with open(path, "w", newline="") as fh:
            fh.write(text)
    return text


def fitness_key(report: EvalReport) -> tuple[float, int, float]:
    """Sort key: lower BLER, then fewer edges, then fewer iterations."""
    return (report.bler, report.num_edges, report.n_it_avg)


def fitness(H: ParityCheckMatrix, design_spec: ChannelSpec, cfg: DecoderConfig, budget: StoppingRule,
            seed: int) -> float:
    """BLER at the design point; lower is better."""
    return evaluate(H, design_spec, cfg, budget, seed).bler
