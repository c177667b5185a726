"""Differential power analysis on an 8-bit key byte.

Leakage is predicted as the Hamming weight of the S-box output for every key
hypothesis; traces are then compared to that prediction sample by sample.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .traces import TraceSet
from .victim import HW, SBOX

DISTINGUISHERS = ("difference_of_means", "pearson_correlation")
HIGH_MIN_HW = 5
LOW_MAX_HW = 3


class DegeneratePartitionError(ValueError):
    pass


@dataclass(frozen=True)
class LeakageModel:
    kind: str = "hw_sbox_out"
    description: str = "Hamming weight of SBox(x ^ k)"

    def predict(self, plaintexts, k_star) -> np.ndarray:
        """Predicted leakage; broadcasts over arrays of plaintexts and keys."""
        if self.kind != "hw_sbox_out":
            raise ValueError(f"unsupported leakage model {self.kind!r}")
        x = np.asarray(plaintexts, dtype=np.int64)
        k = np.asarray(k_star, dtype=np.int64)
        return HW[SBOX[np.bitwise_xor(x, k)]]


HW_SBOX_OUT = LeakageModel()


@dataclass(frozen=True)
class DistinguisherTrace:
    values: np.ndarray
    hypothesis: int
    kind: str


@dataclass(frozen=True)
class KeyRanking:
    """Peak |distinguisher| per hypothesis, indexed by key byte."""

    scores: np.ndarray
    kind: str = "difference_of_means"

    @property
    def order(self) -> np.ndarray:
        # Descending score, ties broken by smaller key value.
        return np.lexsort((np.arange(256), -self.scores))

    @property
    def best(self) -> int:
        return int(self.order[0])

    @property
    def margin(self) -> float:
        """Best peak over second-best peak (1.0 if both are zero)."""
        first, second = self.scores[self.order[:2]]
        if second == 0:
            return 1.0 if first == 0 else float("inf")
        return float(first / second)

    def sorted(self) -> list[tuple[int, float]]:
        return [(int(k), float(self.scores[k])) for k in self.order]


def predict_leakage(plaintexts, k_star: int, m: LeakageModel = HW_SBOX_OUT) -> np.ndarray:
    return m.predict(plaintexts, k_star)


def _all_predictions(ts: TraceSet, m: LeakageModel) -> np.ndarray:
    return m.predict(ts.plaintexts[None, :], np.arange(256)[:, None])


def _dom_matrix(traces: np.ndarray, preds: np.ndarray):
    high = (preds >= HIGH_MIN_HW).astype(np.float64)
    low = (preds <= LOW_MAX_HW).astype(np.float64)
    n_high = high.sum(axis=1)
    n_low = low.sum(axis=1)
    ok = (n_high > 0) & (n_low > 0)
    with np.errstate(invalid="ignore", divide="ignore"):
        dom = (high @ traces) / n_high[:, None] - (low @ traces) / n_low[:, None]
    dom[~ok] = 0.0
    return dom, ok


def _corr_matrix(traces: np.ndarray, preds: np.ndarray):
    h = preds - preds.mean(axis=1, keepdims=True)
    t = traces - traces.mean(axis=0, keepdims=True)
    h_norm = np.sqrt(np.einsum("ij,ij->i", h, h))
    t_norm = np.sqrt(np.einsum("ij,ij->j", t, t))
    ok = h_norm > 0
    num = h @ t
    denom = h_norm[:, None] * t_norm[None, :]
    with np.errstate(invalid="ignore", divide="ignore"):
        corr = np.where(denom > 0, num / np.where(denom > 0, denom, 1.0), 0.0)
    corr[~ok] = 0.0
    return np.clip(corr, -1.0, 1.0), ok


def difference_of_means(ts: TraceSet, k_star: int, m: LeakageModel = HW_SBOX_OUT) -> DistinguisherTrace:
    """mean(traces with HW >= 5) - mean(traces with HW <= 3); HW = 4 is dropped."""
    preds = m.predict(ts.plaintexts, k_star)[None, :]
    dom, ok = _dom_matrix(ts.samples.astype(np.float64), preds)
    if not ok[0]:
        raise DegeneratePartitionError(
            f"hypothesis 0x{k_star:02x}: HIGH or LOW partition is empty")
    return DistinguisherTrace(dom[0], int(k_star), "difference_of_means")


def pearson_correlation(ts: TraceSet, k_star: int, m: LeakageModel = HW_SBOX_OUT) -> DistinguisherTrace:
    """Per-sample correlation with the predicted HW.

    Sample columns with zero variance give 0 by convention.
    """
    if len(ts) < 2:
        raise ValueError("correlation needs at least 2 traces")
    preds = m.predict(ts.plaintexts, k_star)[None, :].astype(np.float64)
    corr, ok = _corr_matrix(ts.samples.astype(np.float64), preds)
    if not ok[0]:
        raise DegeneratePartitionError(
            f"hypothesis 0x{k_star:02x}: predicted leakage is constant")
    return DistinguisherTrace(corr[0], int(k_star), "pearson_correlation")


def distinguisher_matrix(ts: TraceSet, kind: str = "difference_of_means",
                         m: LeakageModel = HW_SBOX_OUT):
    """All 256 distinguisher traces at once, shape ``(256, n_samples)``.

    Also returns a mask of hypotheses whose partition was usable.
    """
    if kind not in DISTINGUISHERS:
        raise ValueError(f"unknown distinguisher {kind!r}, expected one of {DISTINGUISHERS}")
    preds = _all_predictions(ts, m)
    traces = ts.samples.astype(np.float64)
    if kind == "difference_of_means":
        return _dom_matrix(traces, preds)
    if len(ts) < 2:
        raise ValueError("correlation needs at least 2 traces")
    return _corr_matrix(traces, preds.astype(np.float64))


def attack(ts: TraceSet, kind: str = "difference_of_means",
           m: LeakageModel = HW_SBOX_OUT) -> KeyRanking:
    values, ok = distinguisher_matrix(ts, kind, m)
    if not ok.all():
        bad = ", ".join(f"0x{k:02x}" for k in np.flatnonzero(~ok))
        warnings.warn(f"degenerate partition, score set to 0 for: {bad}", stacklevel=2)
    return KeyRanking(np.abs(values).max(axis=1), kind)


def key_rank(r: KeyRanking, true_key: int) -> int:
    return int(np.flatnonzero(r.order == true_key)[0]) + 1
