"""Genetic optimisation of parity-check matrices with the decoder in the loop.

Each epoch keeps the ``T`` best matrices (with their cached fitness), adds
mutated copies of every elite and the two crossover offspring of every elite
pair, and evaluates the newcomers by Monte-Carlo simulation at the design
point. All newcomers of an epoch share one noise seed, so their BLERs are
compared on identical channel realisations.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import math
from concurrent.futures import Executor, ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields, replace
from itertools import combinations
from pathlib import Path

import numpy as np

from .channels import ChannelSpec, stream
from .codes import (
    ParityCheckMatrix,
    StructureTemplate,
    apply_template,
    format_alist,
    parse_alist,
    random_left_block,
    random_regular,
    write_alist,
)
from .decoder import DecoderConfig
from .evaluation import EvalReport, StoppingRule, evaluate, fitness_key

log = logging.getLogger(__name__)

MUTATION_KINDS = ("add", "remove", "both")
AXES = ("vertical", "horizontal")
LOG_COLUMNS = ("epoch", "best_bler", "median_bler", "E_best", "frames_spent")

# sub-stream tags under the master seed
_INIT, _OPS, _EVAL = 1, 2, 3


@dataclass(frozen=True)
class GaConfig:
    n: int = 128
    m: int = 64
    T: int = 20
    mutations_per_elite: int = 3
    channel: ChannelSpec = ChannelSpec("awgn", 5.0)
    decoder: DecoderConfig = DecoderConfig(max_iterations=200)
    budget: StoppingRule = StoppingRule(100, 100_000)
    max_epochs: int = 100
    target_bler: float = 0.0
    template: str = "none"
    vn_degree: int = 3
    cn_degree: int = 6
    seed: int = 0
    init_size: int | None = None
    crossover_axis: str = "alternate"
    workers: int = 1

    def __post_init__(self):
        if self.T < 2:
            raise ValueError("T must be >= 2")
        if self.mutations_per_elite < 0:
            raise ValueError("mutations_per_elite must be >= 0")
        if not 1 <= self.m < self.n:
            raise ValueError(f"need 1 <= m < n, got m={self.m}, n={self.n}")
        if self.max_epochs < 1:
            raise ValueError("max_epochs must be >= 1")
        if self.crossover_axis not in ("alternate",) + AXES:
            raise ValueError(f"unknown crossover_axis {self.crossover_axis!r}")
        if self.channel.rate is not None:
            raise ValueError("the design channel rate is taken from each candidate; leave it unset")
        if self.init_size is not None and self.init_size < self.T:
            raise ValueError("init_size must be >= T")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")
        StructureTemplate(self.template)

    @property
    def structure(self) -> StructureTemplate:
        return StructureTemplate(self.template)

    @property
    def population_size(self) -> int:
        return self.T + self.T * self.mutations_per_elite + 2 * math.comb(self.T, 2)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["channel"] = self.channel.to_dict()
        d["decoder"] = self.decoder.to_dict()
        d["budget"] = self.budget.to_dict()
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "GaConfig":
        names = {f.name for f in fields(cls)}
        unknown = set(d) - names
        if unknown:
            raise ValueError(f"unknown design fields {sorted(unknown)}")
        d = dict(d)
        if "channel" in d:
            d["channel"] = ChannelSpec.from_dict(d["channel"])
        if "decoder" in d:
            d["decoder"] = DecoderConfig.from_dict(d["decoder"])
        if "budget" in d:
            d["budget"] = StoppingRule.from_dict(d["budget"])
        return cls(**d)


@dataclass
class Candidate:
    id: str
    matrix: ParityCheckMatrix
    report: EvalReport | None = None
    fitness_seed: int | None = None
    parents: tuple[str, ...] = ()
    operator: str = "init"

    @property
    def evaluated(self) -> bool:
        return self.report is not None

    @property
    def fitness(self) -> float:
        if self.report is None:
            raise ValueError(f"candidate {self.id} has not been evaluated")
        return self.report.bler

    def sort_key(self):
        return fitness_key(self.report)


Population = list  # list[Candidate], best first


# -- operators ----------------------------------------------------------------

def _permitted(H: ParityCheckMatrix) -> np.ndarray:
    mask = H.structure_mask
    return np.ones(H.shape, dtype=bool) if mask is None else ~mask


def repair(H: ParityCheckMatrix, rng: np.random.Generator) -> ParityCheckMatrix:
    """Give every empty column, then every still-empty row, one random edge."""
    if H.is_connected():
        return H
    d = H.dense.copy()
    allowed = _permitted(H)
    for i in np.flatnonzero(d.sum(axis=0) == 0):
        rows = np.flatnonzero(allowed[:, i])
        if rows.size:
            d[rng.choice(rows), i] = 1
    for j in np.flatnonzero(d.sum(axis=1) == 0):
        cols = np.flatnonzero(allowed[j])
        if cols.size:
            d[j, rng.choice(cols)] = 1
    return H.with_dense(d)


def _mutate_matrix(H: ParityCheckMatrix, kind: str, rng: np.random.Generator) -> ParityCheckMatrix:
    if kind not in MUTATION_KINDS:
        raise ValueError(f"unknown mutation kind {kind!r}")
    d = H.dense.copy()
    allowed = _permitted(H)
    ones = np.flatnonzero((d == 1) & allowed)
    zeros = np.flatnonzero((d == 0) & allowed)
    if kind in ("remove", "both") and ones.size == 0:
        raise ValueError("no removable edge outside the template block")
    if kind in ("add", "both") and zeros.size == 0:
        raise ValueError("no free position outside the template block")
    flat = d.reshape(-1)
    if kind in ("remove", "both"):
        flat[rng.choice(ones)] = 0
    if kind in ("add", "both"):
        flat[rng.choice(zeros)] = 1
    return repair(H.with_dense(d), rng)


def mutate(parent: Candidate, kind: str, rng: np.random.Generator, child_id: str = "") -> Candidate:
    """Add an edge, remove an edge, or both, outside the template block."""
    return Candidate(id=child_id, matrix=_mutate_matrix(parent.matrix, kind, rng),
                     parents=(parent.id,), operator=f"mutate-{kind}")


def _crossover_dense(a: np.ndarray, b: np.ndarray, axis: str, free_cols: int) -> tuple[np.ndarray, np.ndarray]:
    x, y = a.copy(), b.copy()
    if axis == "vertical":
        s = free_cols // 2
        x[:, s:free_cols] = b[:, s:free_cols]
        y[:, s:free_cols] = a[:, s:free_cols]
    else:
        r = a.shape[0] // 2
        x[r:, :free_cols] = b[r:, :free_cols]
        y[r:, :free_cols] = a[r:, :free_cols]
    return x, y


def crossover(p1: Candidate, p2: Candidate, axis: str, rng: np.random.Generator,
              ids: tuple[str, str] = ("", "")) -> tuple[Candidate, Candidate]:
    """Swap the right (vertical) or lower (horizontal) halves of two parents.

    Only ``H_L`` takes part in structured modes; ``H_R`` stays as is.
    """
    if axis not in AXES:
        raise ValueError(f"unknown crossover axis {axis!r}")
    h1, h2 = p1.matrix, p2.matrix
    if h1.shape != h2.shape:
        raise ValueError(f"parent shapes differ: {h1.shape} vs {h2.shape}")
    if h1.template != h2.template:
        raise ValueError("parents use different templates")
    free = h1.n - h1.m if h1.template is not None else h1.n
    x, y = _crossover_dense(h1.dense, h2.dense, axis, free)
    tag = f"crossover-{axis}"
    parents = (p1.id, p2.id)
    return (Candidate(ids[0], repair(h1.with_dense(x), rng), parents=parents, operator=tag),
            Candidate(ids[1], repair(h1.with_dense(y), rng), parents=parents, operator=tag))


# -- evaluation -----------------------------------------------------------------

def epoch_seed(cfg: GaConfig, epoch: int) -> int:
    return int(np.random.SeedSequence([cfg.seed, _EVAL, epoch]).generate_state(1)[0])


def _evaluate_job(args):
    m, n, rows, cols, spec, dec, budget, seed = args
    return evaluate(ParityCheckMatrix(m, n, rows, cols), spec, dec, budget, seed)


def evaluate_candidates(cands: list[Candidate], cfg: GaConfig, seed: int,
                        executor: Executor | None = None, known: dict | None = None) -> int:
    """Evaluate unevaluated candidates in place; returns frames simulated.

    Matrices already in ``known`` (key -> Candidate) or repeated within
    ``cands`` are simulated once and share the result.
    """
    known = dict(known or {})
    todo: dict[bytes, list[Candidate]] = {}
    for c in cands:
        if c.evaluated:
            continue
        src = known.get(c.matrix.key)
        if src is not None:
            c.report, c.fitness_seed = src.report, src.fitness_seed
            continue
        todo.setdefault(c.matrix.key, []).append(c)
    jobs = [(g[0].matrix.m, g[0].matrix.n, g[0].matrix.rows, g[0].matrix.cols, cfg.channel, cfg.decoder,
             cfg.budget, seed) for g in todo.values()]
    if executor is not None and len(jobs) > 1:
        reports = list(executor.map(_evaluate_job, jobs, chunksize=max(1, len(jobs) // 64)))
    else:
        reports = [_evaluate_job(j) for j in jobs]
    frames = 0
    for group, rep in zip(todo.values(), reports):
        frames += rep.frames_sent
        for c in group:
            c.report, c.fitness_seed = rep, seed
    return frames


def _sorted(pop: list[Candidate]) -> list[Candidate]:
    return sorted(pop, key=lambda c: c.sort_key())


# -- population ----------------------------------------------------------------------

def _random_matrix(cfg: GaConfig, rng: np.random.Generator) -> ParityCheckMatrix:
    t = cfg.structure
    if t.structured:
        return apply_template(random_left_block(cfg.m, cfg.n - cfg.m, cfg.vn_degree, rng), t)
    if cfg.n * cfg.vn_degree == cfg.m * cfg.cn_degree:
        return random_regular(cfg.n, cfg.vn_degree, cfg.cn_degree, rng)
    return ParityCheckMatrix.from_dense(random_left_block(cfg.m, cfg.n, cfg.vn_degree, rng))


def init_population(cfg: GaConfig, executor: Executor | None = None) -> tuple[list[Candidate], int]:
    """Random regular codes (or random ``H_L`` under a template), evaluated and sorted.

    Returns the population and the number of frames simulated.
    """
    size = cfg.init_size or cfg.population_size
    rng = stream(cfg.seed, _INIT)
    pop = []
    for i in range(size):
        H = repair(_random_matrix(cfg, rng), rng)
        pop.append(Candidate(id=f"1.{i}", matrix=H))
    frames = evaluate_candidates(pop, cfg, epoch_seed(cfg, 1), executor)
    return _sorted(pop), frames


def select_elites(pop: list[Candidate], T: int) -> list[Candidate]:
    """Best ``T`` distinct matrices; duplicates only fill a shortfall."""
    seen, elites, spare = set(), [], []
    for c in pop:
        if c.matrix.key in seen:
            spare.append(c)
        else:
            seen.add(c.matrix.key)
            elites.append(c)
    return (elites + spare)[:T]


def step_epoch(pop: list[Candidate], epoch_index: int, cfg: GaConfig,
               executor: Executor | None = None) -> tuple[list[Candidate], int]:
    """Build and evaluate population ``epoch_index`` from the previous one."""
    elites = select_elites(pop, cfg.T)
    rng = stream(cfg.seed, _OPS, epoch_index)
    offspring: list[Candidate] = []

    def next_id() -> str:
        return f"{epoch_index}.{len(offspring)}"

    for parent in elites:
        for j in range(cfg.mutations_per_elite):
            offspring.append(mutate(parent, MUTATION_KINDS[j % len(MUTATION_KINDS)], rng, next_id()))
    for p, (a, b) in enumerate(combinations(range(len(elites)), 2)):
        axis = cfg.crossover_axis if cfg.crossover_axis in AXES else AXES[p % 2]
        first = next_id()
        c1, c2 = crossover(elites[a], elites[b], axis, rng, (first, f"{epoch_index}.{len(offspring) + 1}"))
        offspring.extend((c1, c2))
    known = {e.matrix.key: e for e in elites}
    frames = evaluate_candidates(offspring, cfg, epoch_seed(cfg, epoch_index), executor, known)
    return _sorted(elites + offspring), frames


# -- run loop --------------------------------------------------------------------------

@dataclass
class EpochLog:
    epoch: int
    best_bler: float
    median_bler: float
    E_best: int
    frames_spent: int

    def row(self) -> dict:
        return asdict(self)


@dataclass
class RunResult:
    best: Candidate
    log: list[EpochLog] = field(default_factory=list)
    population: list[Candidate] = field(default_factory=list)


def log_to_csv(entries: list[EpochLog]) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=LOG_COLUMNS, lineterminator="\n")
    w.writeheader()
    for e in entries:
        w.writerow(e.row())
    return buf.getvalue()


def _epoch_log(epoch: int, pop: list[Candidate], frames: int) -> EpochLog:
    return EpochLog(epoch=epoch, best_bler=pop[0].fitness,
                    median_bler=float(np.median([c.fitness for c in pop])),
                    E_best=pop[0].matrix.num_edges, frames_spent=frames)


def _candidate_state(c: Candidate) -> dict:
    return {"id": c.id, "alist": format_alist(c.matrix), "report": asdict(c.report),
            "fitness_seed": c.fitness_seed, "parents": list(c.parents), "operator": c.operator}


def _candidate_from_state(d: dict, template: StructureTemplate) -> Candidate:
    H = parse_alist(d["alist"])
    H = ParityCheckMatrix(H.m, H.n, H.rows, H.cols, template)
    return Candidate(id=d["id"], matrix=H, report=EvalReport(**d["report"]), fitness_seed=d["fitness_seed"],
                     parents=tuple(d["parents"]), operator=d["operator"])


def save_state(path: Path, cfg: GaConfig, epoch: int, pop: list[Candidate], entries: list[EpochLog]) -> None:
    # operator and evaluation streams are keyed by (master seed, epoch),
    # so the epoch index is the whole generator state
    state = {"config": cfg.to_dict(), "rng": {"master_seed": cfg.seed, "next_epoch": epoch + 1},
             "epoch": epoch, "log": [e.row() for e in entries],
             "population": [_candidate_state(c) for c in pop]}
    tmp = path.with_suffix(".tmp")
    tmp.write_text(json.dumps(state))
    tmp.replace(path)


def load_state(path: Path, cfg: GaConfig) -> tuple[int, list[Candidate], list[EpochLog]]:
    state = json.loads(Path(path).read_text())
    saved = GaConfig.from_dict(state["config"])
    if replace(saved, max_epochs=cfg.max_epochs, workers=cfg.workers) != cfg:
        raise ValueError("checkpoint was written by a different configuration")
    pop = [_candidate_from_state(d, cfg.structure) for d in state["population"]]
    return state["epoch"], pop, [EpochLog(**e) for e in state["log"]]


def run(cfg: GaConfig, out_dir=None, resume: bool = False) -> RunResult:
    """Evolve until the best BLER reaches ``target_bler`` or ``max_epochs`` epochs.

    With ``out_dir`` every epoch writes ``epoch_<i>_best.alist``, ``log.csv``
    and ``state.json`` (used by ``resume``); ``best.alist`` is written at the end.
    """
    out = Path(out_dir) if out_dir is not None else None
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
    executor = ProcessPoolExecutor(max_workers=cfg.workers) if cfg.workers > 1 else None
    try:
        state_path = out / "state.json" if out is not None else None
        if resume and state_path is not None and state_path.exists():
            epoch, pop, entries = load_state(state_path, cfg)
            log.info("resumed at epoch %d", epoch)
        else:
            pop, frames = init_population(cfg, executor)
            epoch = 1
            entries = [_epoch_log(1, pop, frames)]
            _checkpoint(out, cfg, epoch, pop, entries)
        while pop[0].fitness > cfg.target_bler and epoch < cfg.max_epochs:
            epoch += 1
            pop, frames = step_epoch(pop, epoch, cfg, executor)
            entries.append(_epoch_log(epoch, pop, frames))
            _checkpoint(out, cfg, epoch, pop, entries)
    finally:
        if executor is not None:
            executor.shutdown()
    if out is not None:
        write_alist(pop[0].matrix, out / "best.alist")
    return RunResult(best=pop[0], log=entries, population=pop)


def _checkpoint(out: Path | None, cfg: GaConfig, epoch: int, pop: list[Candidate], entries: list[EpochLog]) -> None:
    e = entries[-1]
    log.info("epoch %d: best BLER %.3g (E=%d), median %.3g, %d frames",
             epoch, e.best_bler, e.E_best, e.median_bler, e.frames_spent)
    if out is None:
        return
    write_alist(pop[0].matrix, out / f"epoch_{epoch}_best.alist")
    (out / "log.csv").write_text(log_to_csv(entries))
    save_state(out / "state.json", cfg, epoch, pop, entries)
