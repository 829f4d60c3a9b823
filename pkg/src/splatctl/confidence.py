"""Frame confidence scores from QP and bit statistics, with EMA baseline.

The linear variant normalizes each frame's QP and bit count against the
sequence extrema; the sigmoid variant squashes the same unit-normalized
values through a temperature-controlled logistic. Scores are combined
additively and smoothed with an exponential moving average that serves as
the reference level for density-control modulation.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .codec_log import FrameLogSeries
from .errors import EmptySeries, LengthMismatch, NonPositiveTau


class ScoringVariant(Enum):
    LINEAR = "linear"
    SIGMOID = "sigmoid"


class EmaInit(Enum):
    FIRST_VALUE = "first_value"
    ZERO = "zero"


@dataclass(frozen=True)
class ScoringConfig:
    lambda_q: float = 1.0
    lambda_b: float = 0.5
    epsilon: float = 1e-6
    beta: float = 0.95
    variant: ScoringVariant = ScoringVariant.LINEAR
    tau: float | None = None      # required for the sigmoid variant
    rho: float | None = None      # bit-term damping, sigmoid variant only
    ema_init: EmaInit = EmaInit.FIRST_VALUE

    def __post_init__(self):
        if self.lambda_q < 0 or self.lambda_b < 0:
            raise ValueError("lambda_q and lambda_b must be non-negative")
        if self.epsilon <= 0:
            raise ValueError("epsilon must be positive")
        if not 0.0 < self.beta < 1.0:
            raise ValueError("beta must lie strictly between 0 and 1")
        if self.variant is ScoringVariant.SIGMOID:
            if self.tau is None or self.tau <= 0:
                raise NonPositiveTau("sigmoid variant requires tau > 0")
            if self.rho is None or self.rho < 0:
                raise ValueError("sigmoid variant requires rho >= 0")


@dataclass(frozen=True)
class ConfidenceSeries:
    """Per-frame scores: QP term, bit term, combined, and EMA baseline."""

    q_qp: np.ndarray
    q_bit: np.ndarray
    q: np.ndarray
    q_bar: np.ndarray

    def __len__(self) -> int:
        return len(self.q)

    def to_csv_text(self) -> str:
        lines = ["t,q_qp,q_bit,q,q_bar"]
        for t in range(len(self)):
            cells = (float(self.q_qp[t]), float(self.q_bit[t]), float(self.q[t]), float(self.q_bar[t]))
            lines.append(f"{t}," + ",".join(repr(c) for c in cells))
        return "\n".join(lines) + "\n"


def qp_confidence(series: FrameLogSeries, cfg: ScoringConfig) -> np.ndarray:
    """Linear QP score: lambda_q * (max - qp) / (max - min + eps), per frame."""
    if len(series) == 0:
        raise EmptySeries("cannot score an empty series")
    qp = np.asarray(series.qps(), dtype=np.float64)
    return cfg.lambda_q * (qp.max() - qp) / (qp.max() - qp.min() + cfg.epsilon)


def bit_confidence(series: FrameLogSeries, cfg: ScoringConfig) -> np.ndarray:
    """Linear bit score: lambda_b * (bits - min) / (max - min + eps), per frame."""
    if len(series) == 0:
        raise EmptySeries("cannot score an empty series")
    bits = np.asarray(series.bits(), dtype=np.float64)
    return cfg.lambda_b * (bits - bits.min()) / (bits.max() - bits.min() + cfg.epsilon)


def combine(q_qp: np.ndarray, q_bit: np.ndarray) -> np.ndarray:
    q_qp = np.asarray(q_qp, dtype=np.float64)
    q_bit = np.asarray(q_bit, dtype=np.float64)
    if q_qp.shape != q_bit.shape:
        raise LengthMismatch(f"QP scores ({q_qp.shape}) and bit scores ({q_bit.shape}) differ")
    return q_qp + q_bit


def ema_smooth(q, beta: float, init: EmaInit = EmaInit.FIRST_VALUE) -> np.ndarray:
    """Recurrence out[t] = beta * out[t-1] + (1 - beta) * q[t], in display order.

    FIRST_VALUE starts the baseline at q[0]; ZERO starts from an implicit
    zero state before the first frame.
    """
    q = np.asarray(q, dtype=np.float64)
    if q.size == 0:
        raise EmptySeries("cannot smooth an empty series")
    if not 0.0 < beta < 1.0:
        raise ValueError("beta must lie strictly between 0 and 1")
    out = np.empty_like(q)
    if init is EmaInit.FIRST_VALUE:
        out[0] = q[0]
    else:
        out[0] = (1.0 - beta) * q[0]
    for t in range(1, q.size):
        out[t] = beta * out[t - 1] + (1.0 - beta) * q[t]
    return out


def _unit_normalize(values: np.ndarray, invert: bool) -> np.ndarray:
    # Epsilon-free min-max map; degenerate extrema pin the midpoint.
    lo, hi = values.min(), values.max()
    if hi == lo:
        return np.full_like(values, 0.5)
    unit = (values - lo) / (hi - lo)
    return 1.0 - unit if invert else unit


def sigmoid_score(series: FrameLogSeries, cfg: ScoringConfig) -> tuple[np.ndarray, np.ndarray]:
    """Sigmoid-variant per-frame terms (QP term, bit term).

    Each unit-normalized input x is scored sigmoid((x - 0.5) / tau); the bit
    term is additionally damped by rho. Returns the two terms so callers can
    report them alongside their sum.
    """
    if len(series) == 0:
        raise EmptySeries("cannot score an empty series")
    if cfg.tau is None or cfg.tau <= 0:
        raise NonPositiveTau("sigmoid scoring requires tau > 0")
    rho = 1.0 if cfg.rho is None else cfg.rho
    qp_unit = _unit_normalize(np.asarray(series.qps(), dtype=np.float64), invert=True)
    bit_unit = _unit_normalize(np.asarray(series.bits(), dtype=np.float64), invert=False)

    def sigma(x):
        return 1.0 / (1.0 + np.exp(-x))

    q_term = cfg.lambda_q * sigma((qp_unit - 0.5) / cfg.tau)
    b_term = cfg.lambda_b * rho * sigma((bit_unit - 0.5) / cfg.tau)
    return q_term, b_term


def score_sequence(series: FrameLogSeries, cfg: ScoringConfig) -> ConfidenceSeries:
    """Full scoring pipeline: per-frame terms, combined score, EMA baseline."""
    if cfg.variant is ScoringVariant.SIGMOID:
        q_qp, q_bit = sigmoid_score(series, cfg)
    else:
        q_qp = qp_confidence(series, cfg)
        q_bit = bit_confidence(series, cfg)
    q = combine(q_qp, q_bit)
    return ConfidenceSeries(q_qp=q_qp, q_bit=q_bit, q=q, q_bar=ema_smooth(q, cfg.beta, cfg.ema_init))


def score_sequence_streaming(series: FrameLogSeries, cfg: ScoringConfig) -> ConfidenceSeries:
    """Prefix-extrema variant for feeds where the full sequence is unknown.

    Normalizes frame t against the extrema of frames 0..t only. This does
    not satisfy the sequence-wide normalization contract of
    :func:`score_sequence` and the two disagree until the running extrema
    have converged; offered for experimentation only. Linear variant only.
    """
    if cfg.variant is not ScoringVariant.LINEAR:
        raise ValueError("streaming scoring supports the linear variant only")
    if len(series) == 0:
        raise EmptySeries("cannot score an empty series")
    qp = np.asarray(series.qps(), dtype=np.float64)
    bits = np.asarray(series.bits(), dtype=np.float64)
    qp_hi = np.maximum.accumulate(qp)
    qp_lo = np.minimum.accumulate(qp)
    bit_hi = np.maximum.accumulate(bits)
    bit_lo = np.minimum.accumulate(bits)
    q_qp = cfg.lambda_q * (qp_hi - qp) / (qp_hi - qp_lo + cfg.epsilon)
    q_bit = cfg.lambda_b * (bits - bit_lo) / (bit_hi - bit_lo + cfg.epsilon)
    q = q_qp + q_bit
    return ConfidenceSeries(q_qp=q_qp, q_bit=q_bit, q=q, q_bar=ema_smooth(q, cfg.beta, cfg.ema_init))
