import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..errors import InvalidModelError, LengthMismatchError, UnknownSymbolError
from ..tables import (
    LOG_ZERO,
    Alphabet,
    LabelSeq,
    ObsSeq,
    argmax_lowest,
    expected_hamming_loss,
)
from .forward_backward import forward_backward, forward_backward_batch

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class PosteriorMarginals:
    """
    逐位置后验 p(xₙ | y₁:N), 形状 (N, |Ω|), 对数域, 每行已归一化。
    """
    rows: np.ndarray

    def __len__(self) -> int:
        return self.rows.shape[0]

    def row(self, n: int) -> np.ndarray:
        return self.rows[n]

    def probabilities(self) -> np.ndarray:
        return np.exp(self.rows)

    def decode(self) -> LabelSeq:
        """MPM: 每个位置取边缘概率最大的标签, 并列取最小下标。"""
        return tuple(int(v) for v in argmax_lowest(self.rows))


class BaseChainModel(ABC):
    """
    链式模型抽象基类。
    CRF 与 HMC 在给定观测 y 后都化为同一种成对因子链,
    因此后验边缘、MPM 解码与期望损失在此统一实现。
    """

    kind: str = ""

    def __init__(self, hidden: Alphabet, obs: Alphabet, n: int):
        """
        :param hidden: 隐藏标签字母表 Ω。
        :param obs: 观测字母表 Λ。
        :param n: 序列长度 N (≥ 1)。
        """
        if int(n) < 1:
            raise InvalidModelError(f"sequence length must be at least 1, got {n}")
        self.hidden = hidden
        self.obs = obs
        self.n = int(n)

    def __repr__(self) -> str:
        return f"{type(self).__name__}(n={self.n}, hidden={self.hidden.size}, obs={self.obs.size})"

    def check_observations(self, y: Sequence[int]) -> ObsSeq:
        y = self.obs.check_seq(y)
        if len(y) != self.n:
            raise LengthMismatchError(f"observation sequence has length {len(y)}, model expects {self.n}")
        return y

    def check_labels(self, x: Sequence[int]) -> LabelSeq:
        x = self.hidden.check_seq(x)
        if len(x) != self.n:
            raise LengthMismatchError(f"label sequence has length {len(x)}, model expects {self.n}")
        return x

    @abstractmethod
    def log_weight(self, x: Sequence[int], y: Sequence[int]) -> float:
        """
        (x, y) 的对数权重: CRF 为未归一化得分, HMC 为联合概率。
        """
        pass

    @abstractmethod
    def conditioned_chain(self, y: ObsSeq) -> tuple[np.ndarray, list[np.ndarray]]:
        """
        返回给定 y 后的一元势 (N, K) 与 N-1 个成对势 (K, K)。
        """
        pass

    @abstractmethod
    def conditioned_batch(self, ys: np.ndarray) -> tuple[np.ndarray, list[np.ndarray]]:
        """
        conditioned_chain 的批量版本: ys 形状 (B, N), 返回一元势 (B, N, K) 与共用的成对势。
        """
        pass

    @abstractmethod
    def _raise_zero_mass(self, y: ObsSeq):
        """y 下总权重为零时抛出对应异常。"""
        pass

    @abstractmethod
    def is_homogeneous(self) -> bool:
        pass

    @abstractmethod
    def tile(self, length: int) -> "BaseChainModel":
        """用第一组表格构造给定长度的时齐模型。"""
        pass

    @abstractmethod
    def to_document(self):
        pass

    def _run(self, y: Sequence[int]) -> tuple[float, np.ndarray | None]:
        y = self.check_observations(y)
        unary, pairwise = self.conditioned_chain(y)
        return forward_backward(unary, pairwise)

    def log_partition(self, y: Sequence[int]) -> float:
        """log Σₓ exp(log_weight(x, y)), 允许为 -inf。"""
        log_z, _ = self._run(y)
        return log_z

    def posterior_marginals(self, y: Sequence[int]) -> PosteriorMarginals:
        y = self.check_observations(y)
        log_z, marginals = self._run(y)
        if log_z == LOG_ZERO:
            self._raise_zero_mass(y)
        logger.debug(f"{self!r}: log partition {log_z:.6g} for y={y}")
        return PosteriorMarginals(marginals)

    def batch_posterior_marginals(self, ys) -> tuple[np.ndarray, np.ndarray]:
        """
        对多个观测序列一次性做前向-后向。
        :return: (log Z 形状 (B,), 边缘分布 (B, N, K) 对数域); 零质量的 y 对应 log Z = -inf。
        """
        ys = np.asarray(ys, dtype=np.intp)
        if ys.ndim != 2 or ys.shape[1] != self.n:
            raise LengthMismatchError(f"observation batch has shape {ys.shape}, model expects (B, {self.n})")
        if ys.size and (ys.min() < 0 or ys.max() >= self.obs.size):
            raise UnknownSymbolError(f"observation indices must lie in [0, {self.obs.size})")
        unary, pairwise = self.conditioned_batch(ys)
        return forward_backward_batch(unary, pairwise)

    def mpm_decode(self, y: Sequence[int]) -> LabelSeq:
        return self.posterior_marginals(y).decode()

    def log_posterior(self, x: Sequence[int], y: Sequence[int]) -> float:
        """log p(x | y)。"""
        y = self.check_observations(y)
        log_z = self.log_partition(y)
        if log_z == LOG_ZERO:
            self._raise_zero_mass(y)
        return self.log_weight(x, y) - log_z

    def expected_loss(self, x: Sequence[int], y: Sequence[int]) -> float:
        """x 在 p(· | y) 下的期望汉明损失。"""
        x = self.check_labels(x)
        return expected_hamming_loss(self.posterior_marginals(y).rows, x)
