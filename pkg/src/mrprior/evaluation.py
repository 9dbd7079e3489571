"""Kill-matrix evaluation: detection curves, APFD, baselines, significance.

A kill matrix records which MRs expose which mutants, plus per-MR execution
times.  Orderings are judged by their fault-detection curve (percentage of
killable mutants exposed by the first m MRs), APFD, effective MR-set size
and average time to first detection.  Baselines: averaged random orderings
and a coverage-greedy ordering.  A paired sign-flip permutation test
compares treatments.
"""

from __future__ import annotations

import csv
import itertools
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import ApplicabilityError, InputError, InvariantError

DEFAULT_THRESHOLDS = (5.0, 2.5)


# ---------------------------------------------------------------------------
# matrices
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class KillMatrix:
    mr_ids: tuple[str, ...]
    mutant_ids: tuple[str, ...]
    kills: np.ndarray       # bool, MRs x mutants
    exec_time: np.ndarray   # seconds per MR

    def __post_init__(self) -> None:
        if len(set(self.mr_ids)) != len(self.mr_ids):
            raise InputError("duplicate MR ids in kill matrix")
        if len(set(self.mutant_ids)) != len(self.mutant_ids):
            raise InputError("duplicate mutant ids in kill matrix")
        if not self.mr_ids or not self.mutant_ids:
            raise InputError("kill matrix needs at least one MR and one mutant")
        if self.kills.shape != (len(self.mr_ids), len(self.mutant_ids)):
            raise InputError("kill matrix shape does not match its id lists")
        if self.exec_time.shape != (len(self.mr_ids),):
            raise InputError("execution time vector does not match the MR list")
        if np.any(self.exec_time < 0) or not np.all(np.isfinite(self.exec_time)):
            raise InputError("execution times must be finite and non-negative")

    @property
    def killable_mask(self) -> np.ndarray:
        return self.kills.any(axis=0)

    @property
    def unkillable_ids(self) -> tuple[str, ...]:
        mask = self.killable_mask
        return tuple(m for m, alive in zip(self.mutant_ids, ~mask) if alive)


@dataclass(frozen=True)
class CoverageMatrix:
    mr_ids: tuple[str, ...]
    element_ids: tuple[str, ...]
    covers: np.ndarray      # bool, MRs x elements

    def __post_init__(self) -> None:
        if len(set(self.mr_ids)) != len(self.mr_ids):
            raise InputError("duplicate MR ids in coverage matrix")
        if len(set(self.element_ids)) != len(self.element_ids):
            raise InputError("duplicate element ids in coverage matrix")
        if not self.mr_ids or not self.element_ids:
            raise InputError("coverage matrix needs at least one MR and one element")
        if self.covers.shape != (len(self.mr_ids), len(self.element_ids)):
            raise InputError("coverage matrix shape does not match its id lists")


def _read_csv_records(path: str) -> list[tuple[int, list[str]]]:
    """CSV records with line numbers; blank and ``#`` comment lines skipped."""
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    return [
        (lineno, r)
        for lineno, r in enumerate(rows, start=1)
        if r and not r[0].lstrip().startswith("#")
    ]


def _read_binary_matrix(path: str, what: str) -> tuple[tuple[str, ...], tuple[str, ...], np.ndarray]:
    records = _read_csv_records(path)
    if not records:
        raise InputError(f"{path}: empty file")
    header = [c.strip() for c in records[0][1]]
    if not header or header[0] != "mr_id":
        raise InputError(f"{path}: first header cell must be 'mr_id'")
    column_ids = tuple(header[1:])
    if not column_ids:
        raise InputError(f"{path}: no {what} columns")
    row_ids: list[str] = []
    cells: list[list[bool]] = []
    for lineno, record in records[1:]:
        if len(record) != len(header):
            raise InputError(
                f"{path}: line {lineno}: expected {len(header)} fields, got {len(record)}"
            )
        row_ids.append(record[0].strip())
        row = []
        for value in record[1:]:
            token = value.strip()
            if token not in ("0", "1"):
                raise InputError(f"{path}: line {lineno}: cells must be 0 or 1, got {token!r}")
            row.append(token == "1")
        cells.append(row)
    if not row_ids:
        raise InputError(f"{path}: no MR rows")
    return tuple(row_ids), column_ids, np.array(cells, dtype=bool)


def load_times(path: str) -> dict[str, float]:
    records = _read_csv_records(path)
    if not records or [c.strip() for c in records[0][1]] != ["mr_id", "exec_seconds"]:
        raise InputError(f"{path}: header must be 'mr_id,exec_seconds'")
    times: dict[str, float] = {}
    for lineno, record in records[1:]:
        if len(record) != 2:
            raise InputError(f"{path}: line {lineno}: expected 2 fields")
        mr_id = record[0].strip()
        if mr_id in times:
            raise InputError(f"{path}: line {lineno}: duplicate MR id {mr_id!r}")
        try:
            seconds = float(record[1])
        except ValueError:
            raise InputError(
                f"{path}: line {lineno}: exec_seconds must be a number, got {record[1]!r}"
            ) from None
        if not math.isfinite(seconds) or seconds < 0:
            raise InputError(f"{path}: line {lineno}: exec_seconds must be >= 0")
        times[mr_id] = seconds
    return times


def load_kill_matrix(kills_path: str, times_path: str) -> KillMatrix:
    mr_ids, mutant_ids, kills = _read_binary_matrix(kills_path, "mutant")
    times = load_times(times_path)
    unknown = sorted(set(times) - set(mr_ids))
    if unknown:
        raise InputError(f"{times_path}: unknown MR ids {unknown}")
    missing = [m for m in mr_ids if m not in times]
    if missing:
        raise InputError(f"{times_path}: missing execution times for {missing}")
    exec_time = np.array([times[m] for m in mr_ids], dtype=float)
    return KillMatrix(mr_ids, mutant_ids, kills, exec_time)


def load_coverage_matrix(path: str) -> CoverageMatrix:
    mr_ids, element_ids, covers = _read_binary_matrix(path, "element")
    return CoverageMatrix(mr_ids, element_ids, covers)


def save_kill_matrix(
    km: KillMatrix, kills_path: str, times_path: str, comment: str | None = None
) -> None:
    with open(kills_path, "w", newline="", encoding="utf-8") as fh:
        if comment:
            fh.write(comment + "\n")
        writer = csv.writer(fh)
        writer.writerow(["mr_id", *km.mutant_ids])
        for i, mr_id in enumerate(km.mr_ids):
            writer.writerow([mr_id, *("1" if v else "0" for v in km.kills[i])])
    with open(times_path, "w", newline="", encoding="utf-8") as fh:
        if comment:
            fh.write(comment + "\n")
        writer = csv.writer(fh)
        writer.writerow(["mr_id", "exec_seconds"])
        for mr_id, seconds in zip(km.mr_ids, km.exec_time):
            writer.writerow([mr_id, repr(float(seconds))])


# ---------------------------------------------------------------------------
# single-ordering evaluation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FaultDetectionCurve:
    points: tuple[float, ...]   # percentage of killable mutants after m MRs

    def __post_init__(self) -> None:
        if not self.points:
            raise InputError("a detection curve needs at least one point")
        for a, b in zip(self.points, self.points[1:]):
            if b < a:
                raise InvariantError("detection curve must be non-decreasing")


def _check_order(order: Sequence[str], km: KillMatrix) -> list[int]:
    if len(order) != len(km.mr_ids) or set(order) != set(km.mr_ids):
        raise InputError("ordering is not a permutation of the kill matrix's MR ids")
    index = {m: i for i, m in enumerate(km.mr_ids)}
    return [index[m] for m in order]


def first_kill_positions(order: Sequence[str], km: KillMatrix) -> dict[str, int | None]:
    """1-based position of the first killer per mutant, None when never killed."""
    rows = _check_order(order, km)
    positions: dict[str, int | None] = {}
    for j, mutant in enumerate(km.mutant_ids):
        positions[mutant] = None
        for position, row in enumerate(rows, start=1):
            if km.kills[row, j]:
                positions[mutant] = position
                break
    return positions


def _detection_matrix(order: Sequence[str], km: KillMatrix) -> np.ndarray:
    """Row m-1, column j: 1.0 when mutant j is killed by the first m MRs."""
    rows = _check_order(order, km)
    cumulative = np.cumsum(km.kills[rows].astype(int), axis=0) > 0
    return cumulative.astype(float)


def detection_curve(order: Sequence[str], km: KillMatrix) -> FaultDetectionCurve:
    """Percentage of killable mutants exposed by each ordering prefix.

    With no killable mutants the curve is flat 100: every prefix kills all of
    an empty set.
    """
    detection = _detection_matrix(order, km)
    killable = km.killable_mask
    n_killable = int(killable.sum())
    if n_killable == 0:
        return FaultDetectionCurve(tuple(100.0 for _ in km.mr_ids))
    killed = detection[:, killable].sum(axis=1)
    return FaultDetectionCurve(tuple(float(100.0 * k / n_killable) for k in killed))


def apfd(order: Sequence[str], km: KillMatrix) -> float:
    """Average percentage of faults detected, over killable mutants only."""
    positions = first_kill_positions(order, km)
    found = [p for p in positions.values() if p is not None]
    if not found:
        raise ApplicabilityError("APFD is undefined: no killable mutants")
    n = len(km.mr_ids)
    m = len(found)
    return 1.0 - sum(found) / (n * m) + 1.0 / (2 * n)


def avg_time_to_fault(order: Sequence[str], km: KillMatrix) -> float:
    """Mean, over killable mutants, of the execution time spent up to and
    including the first MR that kills each one."""
    rows = _check_order(order, km)
    cumulative = np.cumsum(km.exec_time[rows])
    positions = first_kill_positions(order, km)
    spent = [cumulative[p - 1] for p in positions.values() if p is not None]
    if not spent:
        raise ApplicabilityError("time to fault is undefined: no killable mutants")
    return float(np.mean(spent))


def effective_set_size(curve: FaultDetectionCurve, threshold: float) -> int:
    """Smallest m whose next step adds less than *threshold* percentage points.

    Falls back to the full set size when every step is at least the threshold.
    """
    if threshold <= 0:
        raise InputError(f"threshold must be positive, got {threshold}")
    points = curve.points
    for m in range(1, len(points)):
        if points[m] - points[m - 1] < threshold:
            return m
    return len(points)


@dataclass(frozen=True)
class EvalReport:
    kind: str                               # "single" or "averaged"
    ordering: tuple[str, ...] | None
    curve: FaultDetectionCurve
    apfd: float
    effective_sizes: tuple[tuple[float, int], ...]
    avg_time_to_fault: float
    mutant_ids: tuple[str, ...]
    unkillable: tuple[str, ...]
    detection: np.ndarray                   # sizes x mutants, fraction killed
    first_positions: dict[str, int | None] | None = None
    runs: int | None = None
    seed: int | None = None

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "ordering": list(self.ordering) if self.ordering is not None else None,
            "curve": list(self.curve.points),
            "apfd": self.apfd,
            "effective_sizes": [
                {"threshold": t, "size": s} for t, s in self.effective_sizes
            ],
            "avg_time_to_fault": self.avg_time_to_fault,
            "mutant_ids": list(self.mutant_ids),
            "unkillable": list(self.unkillable),
            "detection": [[float(v) for v in row] for row in self.detection],
            "first_positions": self.first_positions,
            "runs": self.runs,
            "seed": self.seed,
        }


def report_from_dict(data: dict) -> EvalReport:
    try:
        return EvalReport(
            kind=data["kind"],
            ordering=tuple(data["ordering"]) if data["ordering"] is not None else None,
            curve=FaultDetectionCurve(tuple(float(p) for p in data["curve"])),
            apfd=float(data["apfd"]),
            effective_sizes=tuple(
                (float(e["threshold"]), int(e["size"])) for e in data["effective_sizes"]
            ),
            avg_time_to_fault=float(data["avg_time_to_fault"]),
            mutant_ids=tuple(data["mutant_ids"]),
            unkillable=tuple(data["unkillable"]),
            detection=np.array(data["detection"], dtype=float),
            first_positions=data.get("first_positions"),
            runs=data.get("runs"),
            seed=data.get("seed"),
        )
    except (KeyError, TypeError, ValueError, InvariantError) as exc:
        raise InputError(f"malformed evaluation report: {exc}") from exc


def evaluate_ordering(
    order: Sequence[str],
    km: KillMatrix,
    thresholds: Sequence[float] = DEFAULT_THRESHOLDS,
) -> EvalReport:
    curve = detection_curve(order, km)
    return EvalReport(
        kind="single",
        ordering=tuple(order),
        curve=curve,
        apfd=apfd(order, km),
        effective_sizes=tuple(
            (float(t), effective_set_size(curve, t)) for t in thresholds
        ),
        avg_time_to_fault=avg_time_to_fault(order, km),
        mutant_ids=km.mutant_ids,
        unkillable=km.unkillable_ids,
        detection=_detection_matrix(order, km),
        first_positions=first_kill_positions(order, km),
    )


# ---------------------------------------------------------------------------
# baselines
# ---------------------------------------------------------------------------

def random_baseline(
    km: KillMatrix,
    runs: int = 100,
    seed: int = 0,
    thresholds: Sequence[float] = DEFAULT_THRESHOLDS,
    exhaustive: bool = False,
) -> EvalReport:
    """Average evaluation over uniformly random MR orderings.

    Run r draws its permutation from a generator seeded with seed + r, so
    any prefix of the runs is reproducible in isolation.  With
    ``exhaustive=True`` every permutation is enumerated once instead (the
    exact expectation; feasible only for small catalogs).
    """
    if int(km.killable_mask.sum()) == 0:
        raise ApplicabilityError("baseline is undefined: no killable mutants")
    ids = list(km.mr_ids)
    if exhaustive:
        if len(ids) > 8:
            raise InputError("exhaustive enumeration is limited to 8 MRs")
        orders = [list(p) for p in itertools.permutations(ids)]
    else:
        if runs < 1:
            raise InputError(f"runs must be >= 1, got {runs}")
        orders = []
        for r in range(runs):
            rng = np.random.default_rng(seed + r)
            orders.append([ids[i] for i in rng.permutation(len(ids))])

    curve_sum = np.zeros(len(ids))
    detection_sum = np.zeros((len(ids), len(km.mutant_ids)))
    apfd_values = []
    time_values = []
    for order in orders:
        curve_sum += np.array(detection_curve(order, km).points)
        detection_sum += _detection_matrix(order, km)
        apfd_values.append(apfd(order, km))
        time_values.append(avg_time_to_fault(order, km))

    count = len(orders)
    mean_curve = FaultDetectionCurve(tuple(float(p) for p in curve_sum / count))
    return EvalReport(
        kind="averaged",
        ordering=None,
        curve=mean_curve,
        apfd=float(np.mean(apfd_values)),
        effective_sizes=tuple(
            (float(t), effective_set_size(mean_curve, t)) for t in thresholds
        ),
        avg_time_to_fault=float(np.mean(time_values)),
        mutant_ids=km.mutant_ids,
        unkillable=km.unkillable_ids,
        detection=detection_sum / count,
        runs=count,
        seed=None if exhaustive else seed,
    )


def coverage_greedy(cov: CoverageMatrix) -> tuple[str, ...]:
    """Order MRs by maximal residual element coverage.

    Ties prefer the earlier catalog position.  Once no MR adds coverage, the
    leftovers are appended by descending total coverage, catalog order again
    breaking ties.
    """
    n = len(cov.mr_ids)
    uncovered = np.ones(len(cov.element_ids), dtype=bool)
    chosen: list[int] = []
    available = list(range(n))
    while available:
        gains = [int((cov.covers[i] & uncovered).sum()) for i in available]
        best_gain = max(gains)
        if best_gain == 0:
            break
        pick = available[gains.index(best_gain)]
        chosen.append(pick)
        available.remove(pick)
        uncovered &= ~cov.covers[pick]
    totals = cov.covers.sum(axis=1)
    available.sort(key=lambda i: (-int(totals[i]), i))
    return tuple(cov.mr_ids[i] for i in chosen + available)


# ---------------------------------------------------------------------------
# paired sign-flip permutation test
# ---------------------------------------------------------------------------

ALTERNATIVES = ("greater", "two-sided")
EXACT_LIMIT = 20


def permutation_test(
    a: Sequence[float],
    b: Sequence[float],
    alternative: str = "greater",
    iterations: int = 10000,
    seed: int = 0,
) -> float:
    """P-value for the mean paired difference of *a* over *b*.

    All 2^n sign assignments are enumerated when n <= 20; otherwise the null
    distribution is sampled ``iterations`` times with the given seed (with
    the +1 correction so the estimate can never be zero).
    """
    if alternative not in ALTERNATIVES:
        raise InputError(f"alternative must be one of {ALTERNATIVES}, got {alternative!r}")
    left = np.asarray(a, dtype=float)
    right = np.asarray(b, dtype=float)
    if left.ndim != 1 or right.ndim != 1 or left.size == 0 or left.size != right.size:
        raise InputError("paired samples must be equal-length non-empty vectors")
    diffs = left - right
    n = diffs.size
    observed = float(np.ones(n) @ diffs / n)

    def count_extreme(stats: np.ndarray) -> int:
        if alternative == "greater":
            return int((stats >= observed).sum())
        return int((np.abs(stats) >= abs(observed)).sum())

    if n <= EXACT_LIMIT:
        total = 1 << n
        extreme = 0
        bit_positions = np.arange(n, dtype=np.uint64)
        chunk = 1 << 16
        for start in range(0, total, chunk):
            ids = np.arange(start, min(start + chunk, total), dtype=np.uint64)
            signs = 1.0 - 2.0 * ((ids[:, None] >> bit_positions) & 1)
            stats = signs @ diffs / n
            if start == 0:
                # sign id 0 is the identity assignment; reading the observed
                # statistic off the same matrix product guarantees it ties
                # itself bit-for-bit, so the exact p-value is at least 1/2^n
                observed = float(stats[0])
            extreme += count_extreme(stats)
        return extreme / total

    if iterations < 1:
        raise InputError(f"iterations must be >= 1, got {iterations}")
    rng = np.random.default_rng(seed)
    signs = rng.integers(0, 2, size=(iterations, n)) * 2.0 - 1.0
    extreme = count_extreme(signs @ diffs / n)
    return (extreme + 1) / (iterations + 1)


def relative_improvement(
    treatment: FaultDetectionCurve, baseline: FaultDetectionCurve
) -> list[float | None]:
    """Per-prefix percentage improvement of treatment over baseline.

    None marks prefixes where the baseline sits at zero and the ratio is
    undefined.
    """
    if len(treatment.points) != len(baseline.points):
        raise InputError("curves must have the same number of points")
    out: list[float | None] = []
    for t, b in zip(treatment.points, baseline.points):
        out.append(None if b == 0 else 100.0 * (t - b) / b)
    return out


# ---------------------------------------------------------------------------
# synthetic fixtures
# ---------------------------------------------------------------------------

def synth_kill_matrix(
    n_mrs: int,
    n_mutants: int,
    kill_prob: float | Sequence[float] = 0.3,
    times: float | Sequence[float] | tuple[float, float] = 1.0,
    seed: int = 0,
) -> KillMatrix:
    """Random kill matrix; kill probabilities and times may vary per MR.

    ``times`` accepts a constant, a per-MR sequence, or a (low, high) pair
    sampled uniformly per MR.
    """
    if n_mrs < 1 or n_mutants < 1:
        raise InputError("need at least one MR and one mutant")
    probs = np.full(n_mrs, kill_prob, dtype=float) if np.isscalar(kill_prob) else np.asarray(
        kill_prob, dtype=float
    )
    if probs.shape != (n_mrs,):
        raise InputError(f"kill_prob must be scalar or length {n_mrs}")
    if np.any(probs < 0) or np.any(probs > 1):
        raise InputError("kill probabilities must lie in [0, 1]")

    rng = np.random.default_rng(seed)
    if np.isscalar(times):
        exec_time = np.full(n_mrs, float(times))
    elif isinstance(times, tuple) and len(times) == 2:
        low, high = float(times[0]), float(times[1])
        if low > high:
            raise InputError("time range must satisfy low <= high")
        exec_time = rng.uniform(low, high, size=n_mrs)
    else:
        exec_time = np.asarray(times, dtype=float)
        if exec_time.shape != (n_mrs,):
            raise InputError(f"times must be scalar, a (low, high) pair or length {n_mrs}")
    if np.any(exec_time < 0):
        raise InputError("execution times must be non-negative")

    kills = rng.random((n_mrs, n_mutants)) < probs[:, None]
    width = len(str(n_mrs))
    mr_ids = tuple(f"MR{i + 1:0{width}d}" for i in range(n_mrs))
    mutant_ids = tuple(f"m{j + 1}" for j in range(n_mutants))
    return KillMatrix(mr_ids, mutant_ids, kills, exec_time)
