import logging
from typing import Sequence

import numpy as np
from scipy.special import logsumexp

from .. import schemas
from ..config import STOCHASTIC_TOLERANCE
from ..errors import ImpossibleObservationError, InvalidModelError, InvalidTableError
from ..tables import Alphabet, LabelSeq, ObsSeq, as_table
from .base import BaseChainModel, PosteriorMarginals

logger = logging.getLogger(__name__)


def _stochastic_rows(table: np.ndarray, name: str) -> np.ndarray:
    """
    检查每行 (对数域) 概率和为 1 (容差 STOCHASTIC_TOLERANCE), 然后精确重新归一化。
    """
    totals = logsumexp(table, axis=-1, keepdims=True)
    bad = np.abs(np.exp(totals) - 1.0) > STOCHASTIC_TOLERANCE
    if bad.any():
        row = int(np.flatnonzero(bad.ravel())[0])
        raise InvalidModelError(f"{name}: row {row} sums to {float(np.exp(totals.ravel()[row])):.12g}, expected 1")
    rows = table - totals
    rows.flags.writeable = False
    return rows


def _probability_table(values, name: str) -> np.ndarray:
    """读入概率域表格 (只读); 形状由 as_table 在对数域检查。"""
    try:
        probs = np.array(values, dtype=np.float64)
    except (TypeError, ValueError) as e:
        raise InvalidTableError(f"{name}: entries are not numeric ({e})") from None
    if np.isnan(probs).any():
        raise InvalidTableError(f"{name}: NaN entries are not allowed")
    if (probs < 0).any():
        raise InvalidModelError(f"{name}: probabilities must be non-negative")
    probs.flags.writeable = False
    return probs


def _log(probs: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore"):
        return np.log(probs)


class HmcModel(BaseChainModel):
    """
    隐马尔可夫链:
        q(x, y) = q₁(x₁) q₁(y₁ | x₁) Πₙ qₙ(xₙ | xₙ₋₁) qₙ(yₙ | xₙ)。

    转移与发射均按时间下标存储 (由 CRF 构造得到的 HMC 一般是非时齐的)。
    表格以对数概率保存; 由概率域文件读入时另存原始概率, 写回文件时原样输出。
    """

    kind = "hmc"

    def __init__(self, hidden: Alphabet, obs: Alphabet, n: int, init, trans, emit):
        """
        :param init: 初始分布 log q₁(x₁), 形状 (K,)。
        :param trans: N-1 个转移表 log qₙ(xₙ₊₁ | xₙ), 形状 (K, K), 行为当前状态。
        :param emit: N 个发射表 log qₙ(yₙ | xₙ), 形状 (K, M)。
        """
        super().__init__(hidden, obs, n)
        trans, emit = list(trans), list(emit)
        if len(trans) != self.n - 1:
            raise InvalidModelError(f"trans must hold {self.n - 1} tables, got {len(trans)}")
        if len(emit) != self.n:
            raise InvalidModelError(f"emit must hold {self.n} tables, got {len(emit)}")

        k, m = hidden.size, obs.size
        self.init = _stochastic_rows(as_table(init, (k,), name="init"), "init")
        self.trans = tuple(
            _stochastic_rows(as_table(t, (k, k), name=f"trans[{i}]"), f"trans[{i}]") for i, t in enumerate(trans)
        )
        self.emit = tuple(
            _stochastic_rows(as_table(e, (k, m), name=f"emit[{i}]"), f"emit[{i}]") for i, e in enumerate(emit)
        )
        self._probabilities = None

    @classmethod
    def from_probabilities(cls, hidden: Alphabet, obs: Alphabet, n: int, init, trans, emit) -> "HmcModel":
        """由概率域表格构造; 每行在容差内重新归一化用于计算, 原始概率保留给 to_document。"""
        init = _probability_table(init, "init")
        trans = [_probability_table(t, f"trans[{i}]") for i, t in enumerate(trans)]
        emit = [_probability_table(e, f"emit[{i}]") for i, e in enumerate(emit)]
        model = cls(hidden, obs, n, _log(init), [_log(t) for t in trans], [_log(e) for e in emit])
        model._probabilities = (init, tuple(trans), tuple(emit))
        return model

    @classmethod
    def tiled(cls, hidden: Alphabet, obs: Alphabet, n: int, init, trans, emit) -> "HmcModel":
        """时齐 HMC: 同一转移表与发射表用于所有位置 (对数域)。"""
        return cls(hidden, obs, n, init, [trans] * (int(n) - 1), [emit] * int(n))

    @property
    def mode(self) -> str:
        zero = np.isneginf(self.init).any()
        zero = zero or any(np.isneginf(t).any() for t in self.trans)
        zero = zero or any(np.isneginf(e).any() for e in self.emit)
        return "generalized" if zero else "strict"

    def is_homogeneous(self) -> bool:
        same_t = all(np.array_equal(t, self.trans[0]) for t in self.trans)
        same_e = all(np.array_equal(e, self.emit[0]) for e in self.emit)
        return same_t and same_e

    def tile(self, length: int) -> "HmcModel":
        if length == self.n:
            return self
        if not self.is_homogeneous():
            raise InvalidModelError("tiling requires identical transition and emission tables at every position")
        if length > 1 and not self.trans:
            raise InvalidModelError("tiling to length > 1 requires at least one transition table")
        trans = self.trans[0] if self.trans else None
        return HmcModel.tiled(self.hidden, self.obs, length, self.init, trans, self.emit[0])

    def log_weight(self, x: Sequence[int], y: Sequence[int]) -> float:
        return self.log_joint(x, y)

    def log_joint(self, x: Sequence[int], y: Sequence[int]) -> float:
        """log q(x, y); 任一因子为零时返回 -inf。"""
        x = self.check_labels(x)
        y = self.check_observations(y)
        total = float(self.init[x[0]])
        total += sum(float(self.trans[n][x[n], x[n + 1]]) for n in range(self.n - 1))
        total += sum(float(self.emit[n][x[n], y[n]]) for n in range(self.n))
        return total

    def log_evidence(self, y: Sequence[int]) -> float:
        """log q(y), 允许为 -inf。"""
        return self.log_partition(y)

    def conditioned_chain(self, y: ObsSeq) -> tuple[np.ndarray, list[np.ndarray]]:
        unary = np.stack([self.emit[n][:, y[n]] for n in range(self.n)])
        unary[0] = unary[0] + self.init
        return unary, list(self.trans)

    def conditioned_batch(self, ys: np.ndarray) -> tuple[np.ndarray, list[np.ndarray]]:
        unary = np.stack([self.emit[n][:, ys[:, n]].T for n in range(self.n)], axis=1)
        unary[:, 0] += self.init
        return unary, list(self.trans)

    def _raise_zero_mass(self, y: ObsSeq):
        raise ImpossibleObservationError(f"observations {list(y)} have zero probability under the model")

    @classmethod
    def from_document(cls, doc: "schemas.HmcModelFile") -> "HmcModel":
        hidden = Alphabet(tuple(doc.hidden_symbols))
        obs = Alphabet(tuple(doc.obs_symbols))
        return cls.from_probabilities(hidden, obs, doc.n, doc.init, doc.trans, doc.emit)

    def probability_tables(self) -> tuple[np.ndarray, tuple[np.ndarray, ...], tuple[np.ndarray, ...]]:
        """概率域 (init, trans, emit); 读入的文件表格原样返回。"""
        if self._probabilities is not None:
            return self._probabilities
        return np.exp(self.init), tuple(np.exp(t) for t in self.trans), tuple(np.exp(e) for e in self.emit)

    def to_document(self) -> "schemas.HmcModelFile":
        init, trans, emit = self.probability_tables()
        return schemas.HmcModelFile(
            kind="hmc",
            hidden_symbols=list(self.hidden.symbols),
            obs_symbols=list(self.obs.symbols),
            n=self.n,
            mode=self.mode,
            init=init.tolist(),
            trans=[t.tolist() for t in trans],
            emit=[e.tolist() for e in emit],
        )


def hmc_log_joint(model: HmcModel, x: Sequence[int], y: Sequence[int]) -> float:
    return model.log_joint(x, y)


def hmc_posterior_marginals(model: HmcModel, y: Sequence[int]) -> PosteriorMarginals:
    return model.posterior_marginals(y)


def hmc_mpm_decode(model: HmcModel, y: Sequence[int]) -> LabelSeq:
    return model.mpm_decode(y)


def hmc_log_evidence(model: HmcModel, y: Sequence[int]) -> float:
    return model.log_evidence(y)
