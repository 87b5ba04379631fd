"""First-wins racing harness.

Each round launches ``replicas`` copies of a task, adopts the first one to
finish and tears the rest down. Two task kinds are supported:

* synthetic: a worker thread that waits for a duration drawn from a
  :class:`~cpcsim.distributions.Distribution` (scaled by ``unit_ms``), so the
  measured speedup can be compared against the analytic prediction;
* command: an external program per replica, with ``{i}`` in its arguments
  replaced by the replica index. Exit status 0 counts as completion.

Single-core reference times are measured by running replica 0 of every round
alone, on the same sampled duration.
"""

from __future__ import annotations

import logging
import os
import queue
import shlex
import statistics
import subprocess
import threading
import time
from dataclasses import dataclass, field

import numpy as np

from .distributions import Distribution
from .order_stats import MinQuery, speedup
from .rng import Rng

__all__ = [
    "CalibrationError",
    "CancelTimeout",
    "CommandFailure",
    "CommandTask",
    "RaceConfig",
    "RaceError",
    "RaceResult",
    "RoundResult",
    "SyntheticTask",
    "calibrate",
    "duration_matrix",
    "race",
]

log = logging.getLogger(__name__)

#: synthetic workers sleep until this close to their deadline, then spin
SPIN_WINDOW = 0.002
#: sampled durations must be at least this multiple of the measured overhead
MIN_DURATION_FACTOR = 10.0


class RaceError(RuntimeError):
    """The racing environment could not produce a valid measurement."""


class CalibrationError(RaceError):
    pass


class CancelTimeout(RaceError):
    pass


class CommandFailure(RaceError):
    pass


@dataclass(frozen=True)
class SyntheticTask:
    dist: Distribution
    unit_ms: float = 20.0

    def __post_init__(self):
        if not self.unit_ms > 0:
            raise ValueError(f"unit_ms must be > 0, got {self.unit_ms}")

    def describe(self) -> str:
        return f"{self.dist.spec()}@{self.unit_ms!r}ms"


@dataclass(frozen=True)
class CommandTask:
    argv: tuple[str, ...]

    @classmethod
    def from_template(cls, template: str) -> "CommandTask":
        argv = tuple(shlex.split(template))
        if not argv:
            raise ValueError("empty command template")
        return cls(argv)

    def for_replica(self, i: int) -> list[str]:
        return [arg.replace("{i}", str(i)) for arg in self.argv]

    def describe(self) -> str:
        return shlex.join(self.argv)


@dataclass(frozen=True)
class RaceConfig:
    task: SyntheticTask | CommandTask
    replicas: int = 1
    rounds: int = 1
    seed: int = 0
    cancel_grace: float = 1.0
    pin: bool = False
    #: skip calibration and use this per-round overhead (seconds)
    overhead: float | None = None

    def __post_init__(self):
        if self.replicas < 1:
            raise ValueError(f"replicas must be >= 1, got {self.replicas}")
        if self.rounds < 1:
            raise ValueError(f"rounds must be >= 1, got {self.rounds}")
        if not self.cancel_grace > 0:
            raise ValueError(f"cancel_grace must be > 0, got {self.cancel_grace}")


@dataclass(frozen=True)
class RoundResult:
    winner: int
    winner_time: float
    single_time: float
    #: completion times of replicas that also finished before teardown
    loser_times: tuple[float, ...] = ()


@dataclass(frozen=True)
class RaceResult:
    task: str
    replicas: int
    rounds: int
    seed: int
    mean_winner_time: float
    mean_single_time: float
    empirical_speedup: float
    model_speedup: float | None
    overhead_estimate: float
    discarded_rounds: int = 0
    round_results: tuple[RoundResult, ...] = field(default=(), repr=False)

    @property
    def winners(self) -> list[int]:
        return [r.winner for r in self.round_results]


def duration_matrix(cfg: RaceConfig) -> np.ndarray:
    """Intended per-replica durations in seconds, shape ``(rounds, replicas)``.

    Depends only on the task distribution, ``unit_ms`` and ``seed``.
    """
    if not isinstance(cfg.task, SyntheticTask):
        raise TypeError("duration_matrix needs a synthetic task")
    draws = cfg.task.dist.sample(Rng(cfg.seed), (cfg.rounds, cfg.replicas))
    return np.asarray(draws) * (cfg.task.unit_ms / 1000.0)


def _pin_current_thread(index: int) -> None:
    try:
        cpus = sorted(os.sched_getaffinity(0))
        os.sched_setaffinity(0, {cpus[index % len(cpus)]})
    except (AttributeError, OSError) as exc:  # best effort
        log.debug("core pinning unavailable: %s", exc)


def _wait_until(deadline: float, cancel: threading.Event) -> bool:
    """Block until ``deadline``; False if cancelled first."""
    while True:
        remaining = deadline - time.perf_counter()
        if remaining <= 0:
            return True
        if remaining > SPIN_WINDOW:
            if cancel.wait(remaining - SPIN_WINDOW):
                return False
        else:
            if cancel.is_set():
                return False
            time.sleep(0)  # yield the GIL to other spinning replicas


def _race_threads(durations, cancel_grace: float, pin: bool = False):
    """One synthetic round. Returns ``(winner, winner_time, loser_times)``."""
    n = len(durations)
    cancel = threading.Event()
    done = threading.Event()
    lock = threading.Lock()
    finish: list[float | None] = [None] * n
    winner: list[int] = []
    t0 = [0.0]

    def mark_start():
        t0[0] = time.perf_counter()

    barrier = threading.Barrier(n, action=mark_start)

    def worker(i):
        if pin:
            _pin_current_thread(i)
        barrier.wait()
        if _wait_until(t0[0] + durations[i], cancel):
            with lock:
                finish[i] = time.perf_counter()
                if not winner:
                    winner.append(i)
                    done.set()

    threads = [threading.Thread(target=worker, args=(i,), daemon=True) for i in range(n)]
    for t in threads:
        t.start()
    done.wait()
    cancel.set()
    deadline = time.perf_counter() + cancel_grace
    for t in threads:
        t.join(max(0.0, deadline - time.perf_counter()))
    alive = sum(t.is_alive() for t in threads)
    if alive:
        raise CancelTimeout(f"{alive} replica(s) still running {cancel_grace}s after cancellation")
    w = winner[0]
    with lock:
        losers = tuple(f - t0[0] for i, f in enumerate(finish) if f is not None and i != w)
    return w, finish[w] - t0[0], losers


def _terminate(procs, cancel_grace: float) -> None:
    live = [p for p in procs if p.poll() is None]
    for p in live:
        p.terminate()
    deadline = time.perf_counter() + cancel_grace / 2
    for p in live:
        try:
            p.wait(max(0.0, deadline - time.perf_counter()))
        except subprocess.TimeoutExpired:
            pass
    stubborn = [p for p in live if p.poll() is None]
    for p in stubborn:
        p.kill()
    deadline = time.perf_counter() + cancel_grace / 2
    for p in stubborn:
        try:
            p.wait(max(0.0, deadline - time.perf_counter()))
        except subprocess.TimeoutExpired:
            pass
    alive = sum(p.poll() is None for p in procs)
    if alive:
        raise CancelTimeout(f"{alive} process(es) survived termination after {cancel_grace}s")


def _race_commands(task: CommandTask, replicas: int, cancel_grace: float):
    """One command round. Returns ``(winner, winner_time, loser_times)`` or
    ``None`` when no replica exits with status 0."""
    events: queue.Queue = queue.Queue()
    stamp = threading.Lock()
    t0 = time.perf_counter()
    procs = []
    try:
        for i in range(replicas):
            procs.append(subprocess.Popen(
                task.for_replica(i), stdin=subprocess.DEVNULL,
                stdout=subprocess.DEVNULL, stderr=subprocess.DEVNULL,
            ))
    except OSError as exc:
        _terminate(procs, cancel_grace)
        raise CommandFailure(f"cannot start {task.describe()!r}: {exc}") from exc

    def watch(i, p):
        rc = p.wait()
        with stamp:  # keeps queue order consistent with timestamps
            events.put((i, rc, time.perf_counter()))

    watchers = [threading.Thread(target=watch, args=(i, p), daemon=True) for i, p in enumerate(procs)]
    for w in watchers:
        w.start()
    result = None
    for _ in range(replicas):
        i, rc, t = events.get()
        if rc == 0:
            result = (i, t - t0)
            break
    _terminate(procs, cancel_grace)
    for w in watchers:
        w.join()
    losers = []
    while not events.empty():
        i, rc, t = events.get_nowait()
        if rc == 0:
            losers.append(t - t0)
    if result is None:
        return None
    return result[0], result[1], tuple(losers)


def calibrate(replicas: int = 4, rounds: int = 20) -> float:
    """Median wall time, in seconds, of a full round of zero-duration
    replicas (spawn, start, first completion, cancel, reap)."""
    samples = []
    for _ in range(rounds):
        start = time.perf_counter()
        _race_threads([0.0] * replicas, cancel_grace=5.0)
        samples.append(time.perf_counter() - start)
    return statistics.median(samples)


def race(cfg: RaceConfig) -> RaceResult:
    """Run ``cfg.rounds`` first-wins rounds and compare against one replica.

    Raises
    ------
    CalibrationError
        Synthetic durations are too short relative to the harness overhead.
    CancelTimeout
        A losing replica outlived ``cancel_grace``.
    CommandFailure
        Commands cannot be started, or no round produced a successful exit.
    """
    overhead = cfg.overhead if cfg.overhead is not None else calibrate(max(cfg.replicas, 1))
    results: list[RoundResult] = []
    discarded = 0

    if isinstance(cfg.task, SyntheticTask):
        mean_duration = cfg.task.dist.mean() * cfg.task.unit_ms / 1000.0
        if mean_duration < MIN_DURATION_FACTOR * overhead:
            raise CalibrationError(
                f"mean task duration {mean_duration * 1e3:.3f} ms is below "
                f"{MIN_DURATION_FACTOR:g}x the measured overhead {overhead * 1e3:.3f} ms; increase unit_ms"
            )
        matrix = duration_matrix(cfg)
        for row in matrix:
            w, wt, losers = _race_threads(row.tolist(), cfg.cancel_grace, cfg.pin)
            _, st, _ = _race_threads([float(row[0])], cfg.cancel_grace, cfg.pin)
            results.append(RoundResult(w, wt, st, losers))
        model = speedup(MinQuery(cfg.task.dist, cfg.replicas))
    else:
        for _ in range(cfg.rounds):
            outcome = _race_commands(cfg.task, cfg.replicas, cfg.cancel_grace)
            single = _race_commands(cfg.task, 1, cfg.cancel_grace)
            if outcome is None or single is None:
                discarded += 1
                continue
            w, wt, losers = outcome
            results.append(RoundResult(w, wt, single[1], losers))
        if not results:
            raise CommandFailure(f"all {cfg.rounds} round(s) failed: no replica of {cfg.task.describe()!r} exited 0")
        model = None

    mean_winner = statistics.fmean(r.winner_time for r in results)
    mean_single = statistics.fmean(r.single_time for r in results)
    return RaceResult(
        task=cfg.task.describe(),
        replicas=cfg.replicas,
        rounds=cfg.rounds,
        seed=cfg.seed,
        mean_winner_time=mean_winner,
        mean_single_time=mean_single,
        empirical_speedup=mean_single / mean_winner,
        model_speedup=model,
        overhead_estimate=overhead,
        discarded_rounds=discarded,
        round_results=tuple(results),
    )
