"""Detection metrics and a per-query latency benchmark.

Convention throughout: in-distribution samples score HIGHER. The
false-positive rate is evaluated at the largest threshold that still
admits the target fraction of in-distribution scores (inclusive >= on
both sides, lower interpolation at the percentile), so reported numbers
are reproducible bit-for-bit. AUROC is the tie-corrected rank statistic
P(ind > ood) + 0.5 * P(ind = ood) computed by sort-and-rank, not by curve
integration, which makes tie handling exact.

The benchmark times scorer callables one query row at a time on the
calling thread, after warmup passes; wall-clock only, nothing asserted.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .errors import EmptyScoresError, NonFiniteError


def _check_scores(x, name: str) -> np.ndarray:
    v = np.asarray(x, dtype=np.float64).ravel()
    if v.size == 0:
        raise EmptyScoresError(f"{name} score set is empty")
    if not np.all(np.isfinite(v)):
        raise NonFiniteError(f"{name} scores contain NaN or Inf")
    return v


def fpr_at_tpr(ind_scores, ood_scores, tpr_target: float = 0.95):
    """False-positive rate at the threshold admitting tpr_target of InD.

    Returns (fpr, threshold). The threshold is the largest score s such
    that at least tpr_target of the InD scores are >= s; the FPR is the
    fraction of OoD scores >= s.
    """
    ind = _check_scores(ind_scores, "ind")
    ood = _check_scores(ood_scores, "ood")
    if not 0.0 < tpr_target <= 1.0:
        raise ValueError(f"tpr_target must be in (0, 1], got {tpr_target}")
    n = ind.size
    # smallest admit count whose fraction reaches the target; the epsilon
    # guards against 0.95*n landing just above an exact integer
    r = int(np.ceil(tpr_target * n - 1e-9))
    r = min(max(r, 1), n)
    threshold = float(np.sort(ind)[n - r])
    fpr = float(np.mean(ood >= threshold))
    return fpr, threshold


def _average_ranks(x: np.ndarray) -> np.ndarray:
    """1-based ranks with ties assigned the group average."""
    order = np.argsort(x, kind="stable")
    sx = x[order]
    starts = np.flatnonzero(np.r_[True, sx[1:] != sx[:-1]])
    counts = np.diff(np.r_[starts, sx.size])
    avg = starts + (counts + 1) / 2.0
    ranks = np.empty(x.size)
    ranks[order] = np.repeat(avg, counts)
    return ranks


def auroc(ind_scores, ood_scores) -> float:
    """P(ind > ood) + 0.5 * P(ind = ood), exact under ties."""
    ind = _check_scores(ind_scores, "ind")
    ood = _check_scores(ood_scores, "ood")
    ranks = _average_ranks(np.concatenate([ind, ood]))
    u = ranks[: ind.size].sum() - ind.size * (ind.size + 1) / 2.0
    return float(u / (ind.size * ood.size))


@dataclass(eq=False)
class EvalReport:
    """Detection metrics for one InD/OoD score pair."""

    fpr95: float
    auroc: float
    n_ind: int
    n_ood: int
    threshold_at_95tpr: float
    tpr_target: float = 0.95

    def to_records(self) -> list[dict]:
        return [
            {"metric": "fpr95", "value": self.fpr95, "tpr_target": self.tpr_target},
            {"metric": "auroc", "value": self.auroc},
            {"metric": "threshold", "value": self.threshold_at_95tpr},
            {"metric": "n_ind", "value": self.n_ind},
            {"metric": "n_ood", "value": self.n_ood},
        ]

    def to_text(self) -> str:
        rows = [
            ("fpr95", f"{self.fpr95:.6f}"),
            ("auroc", f"{self.auroc:.6f}"),
            ("threshold", f"{self.threshold_at_95tpr:.17g}"),
            ("n_ind", str(self.n_ind)),
            ("n_ood", str(self.n_ood)),
        ]
        width = max(len(k) for k, _ in rows)
        return "\n".join(f"{k:<{width}}  {v}" for k, v in rows)


def evaluate(ind_scores, ood_scores, tpr_target: float = 0.95) -> EvalReport:
    ind = _check_scores(ind_scores, "ind")
    ood = _check_scores(ood_scores, "ood")
    fpr, thr = fpr_at_tpr(ind, ood, tpr_target)
    return EvalReport(
        fpr95=fpr,
        auroc=auroc(ind, ood),
        n_ind=int(ind.size),
        n_ood=int(ood.size),
        threshold_at_95tpr=thr,
        tpr_target=tpr_target,
    )


@dataclass(eq=False)
class LatencyStats:
    mean_us: float
    p99_us: float


@dataclass(eq=False)
class BenchReport:
    """Per-scorer per-query wall-clock latency plus context."""

    per_query_micros: dict[str, LatencyStats] = field(default_factory=dict)
    train_size: int | None = None
    rff_dim: int | None = None
    store_bytes: dict[str, int] = field(default_factory=dict)

    def to_text(self) -> str:
        if not self.per_query_micros:
            return "(no queries benchmarked)"
        lines = [
            f"{'scorer':<12}{'mean_us':>12}{'p99_us':>12}{'store_bytes':>14}"
        ]
        for name, stats in self.per_query_micros.items():
            size = self.store_bytes.get(name)
            lines.append(
                f"{name:<12}{stats.mean_us:>12.2f}{stats.p99_us:>12.2f}"
                f"{size if size is not None else '-':>14}"
            )
        ctx = []
        if self.train_size is not None:
            ctx.append(f"train_size={self.train_size}")
        if self.rff_dim is not None:
            ctx.append(f"rff_dim={self.rff_dim}")
        if ctx:
            lines.append("  ".join(ctx))
        return "\n".join(lines)


def bench_scorers(
    scorers: dict,
    queries,
    warmup: int = 5,
    reps: int = 3,
    train_size: int | None = None,
    rff_dim: int | None = None,
) -> BenchReport:
    """Time each scorer callable per query row, single-threaded.

    ``scorers`` maps a name to a callable taking one 1-D query vector.
    Warmup passes are untimed; every (rep, query) call afterwards
    contributes one latency sample.
    """
    if reps < 1:
        raise ValueError(f"reps must be >= 1, got {reps}")
    q = np.asarray(queries, dtype=np.float64)
    if q.ndim != 2:
        raise ValueError(f"queries must be 2-D, got shape {q.shape}")
    report = BenchReport(train_size=train_size, rff_dim=rff_dim)
    if q.shape[0] == 0:
        return report
    for name, fn in scorers.items():
        for _ in range(warmup):
            for row in q:
                fn(row)
        samples = np.empty(reps * q.shape[0])
        i = 0
        for _ in range(reps):
            for row in q:
                t0 = time.perf_counter()
                fn(row)
                samples[i] = time.perf_counter() - t0
                i += 1
        micros = samples * 1e6
        report.per_query_micros[name] = LatencyStats(
            mean_us=float(micros.mean()), p99_us=float(np.percentile(micros, 99))
        )
    return report
