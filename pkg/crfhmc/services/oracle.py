"""
穷举 Ω^N 的暴力后验, 用于在小规模实例上核对其他模块。
"""
import itertools
import logging
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..chains.base import BaseChainModel
from ..chains.crf import CrfModel
from ..chains.hmc import HmcModel
from ..config import DEFAULT_BUDGET
from ..errors import (
    BudgetExceededError,
    DegenerateModelError,
    ImpossibleObservationError,
    ShapeMismatchError,
)
from ..tables import LOG_ZERO, LabelSeq

logger = logging.getLogger(__name__)


def enumeration_size(n_states: int, length: int) -> int:
    return n_states ** length


def check_budget(n_states: int, length: int, budget: int | None = None):
    budget = DEFAULT_BUDGET if budget is None else budget
    size = enumeration_size(n_states, length)
    if size > budget:
        raise BudgetExceededError(f"enumerating {n_states}^{length} = {size} sequences exceeds the budget of {budget}")
    return size


def all_sequences(n_states: int, length: int) -> np.ndarray:
    """按字典序列出 Ω^N 的全部序列, 形状 (K^N, N)。"""
    return np.array(list(itertools.product(range(n_states), repeat=length)), dtype=np.intp).reshape(-1, length)


@dataclass(frozen=True)
class EnumeratedPosterior:
    """
    固定 y 下的完整后验 (概率域)。
    labels[i] 为第 i 条序列, probs[i] 为其后验概率; 广义模式下省略零质量序列。
    """
    hidden_size: int
    n: int
    labels: np.ndarray
    probs: np.ndarray
    total: float

    @property
    def entries(self) -> dict[LabelSeq, float]:
        return {tuple(int(v) for v in row): float(p) for row, p in zip(self.labels, self.probs)}

    def codes(self) -> np.ndarray:
        """序列在字典序中的编号。"""
        weights = self.hidden_size ** np.arange(self.n - 1, -1, -1)
        return self.labels @ weights

    def dense(self) -> np.ndarray:
        table = np.zeros(enumeration_size(self.hidden_size, self.n))
        table[self.codes()] = self.probs
        return table

    def marginals(self) -> np.ndarray:
        """由完整后验求和得到逐位置边缘分布 (N, K), 概率域。"""
        return np.stack([
            np.bincount(self.labels[:, n], weights=self.probs, minlength=self.hidden_size) for n in range(self.n)
        ])


def path_scores(model: BaseChainModel, labels: np.ndarray) -> np.ndarray:
    """
    与 y 无关的路径项, 每条标签序列一个值:
    CRF 为 Σ Vₙ(xₙ, xₙ₊₁), HMC 为 log q₁(x₁) + Σ log qₙ(xₙ₊₁ | xₙ)。
    同一模型在多个 y 上穷举时只需计算一次。
    """
    if isinstance(model, CrfModel):
        scores, pairwise = np.zeros(labels.shape[0]), model.V
    else:
        scores, pairwise = model.init[labels[:, 0]].copy(), model.trans
    for n, table in enumerate(pairwise):
        scores += table[labels[:, n], labels[:, n + 1]]
    return scores


def log_weight_table(model: BaseChainModel, labels: np.ndarray, ys: np.ndarray,
                     paths: np.ndarray | None = None) -> np.ndarray:
    """
    对数权重表 (S, B): 第 s 行第 b 列为 log_weight(labels[s], ys[b])。
    :param paths: path_scores 的结果, 省略时现算。
    """
    paths = path_scores(model, labels) if paths is None else paths
    unary = model.U if isinstance(model, CrfModel) else model.emit
    table = np.repeat(paths[:, None], ys.shape[0], axis=1)
    for n in range(model.n):
        table += unary[n][labels[:, n]][:, ys[:, n]]
    return table


def posterior_table(log_weights: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """
    按列归一化对数权重表: 每列减去最大值后在概率域做补偿求和 (math.fsum)。
    :return: (后验概率 (S, B), 各列总质量是否为正 (B,)); 零质量列的概率全为 0。
    """
    peak = log_weights.max(axis=0)
    alive = peak > LOG_ZERO
    weights = np.exp(log_weights - np.where(alive, peak, 0.0))
    totals = np.array([math.fsum(column) for column in weights.T.tolist()])
    return weights / np.where(alive, totals, 1.0), alive


def _enumerate(model: BaseChainModel, y: Sequence[int], budget: int | None, labels: np.ndarray | None,
               paths: np.ndarray | None) -> EnumeratedPosterior | None:
    y = model.check_observations(y)
    check_budget(model.hidden.size, model.n, budget)
    labels = all_sequences(model.hidden.size, model.n) if labels is None else labels
    log_weights = log_weight_table(model, labels, np.array([y], dtype=np.intp), paths)
    probs, alive = posterior_table(log_weights)
    if not alive[0]:
        return None
    probs = probs[:, 0]
    if model.mode != "strict":
        nonzero = log_weights[:, 0] > LOG_ZERO
        labels, probs = labels[nonzero], probs[nonzero]
    return EnumeratedPosterior(model.hidden.size, model.n, labels, probs, math.fsum(probs))


def enumerate_crf_posterior(model: CrfModel, y: Sequence[int], budget: int | None = None,
                            labels: np.ndarray | None = None,
                            paths: np.ndarray | None = None) -> EnumeratedPosterior:
    """按定义 exp(得分)/κ(y) 穷举 CRF 后验; 广义模式下省略零质量序列。"""
    posterior = _enumerate(model, y, budget, labels, paths)
    if posterior is None:
        raise DegenerateModelError(f"every label sequence has zero weight for observations {list(y)}")
    return posterior


def enumerate_hmc_posterior(model: HmcModel, y: Sequence[int], budget: int | None = None,
                            labels: np.ndarray | None = None,
                            paths: np.ndarray | None = None) -> EnumeratedPosterior:
    """按定义 q(x, y)/q(y) 穷举 HMC 后验; 广义模式下省略零质量序列。"""
    posterior = _enumerate(model, y, budget, labels, paths)
    if posterior is None:
        raise ImpossibleObservationError(f"observations {list(y)} have zero probability under the model")
    return posterior


def enumerate_posterior(model: BaseChainModel, y: Sequence[int], budget: int | None = None,
                        labels: np.ndarray | None = None) -> EnumeratedPosterior:
    if isinstance(model, CrfModel):
        return enumerate_crf_posterior(model, y, budget, labels)
    return enumerate_hmc_posterior(model, y, budget, labels)


@dataclass(frozen=True)
class PosteriorComparison:
    max_abs_diff: float
    worst_sequence: LabelSeq
    marginal_diffs: np.ndarray

    @property
    def max_marginal_diff(self) -> float:
        return float(self.marginal_diffs.max())


def compare_posteriors(a: EnumeratedPosterior, b: EnumeratedPosterior) -> PosteriorComparison:
    """
    逐序列比较两个穷举后验。
    :return: 最大绝对差、取得最大差的序列 (并列取字典序最小) 以及逐位置边缘最大差。
    """
    if a.hidden_size != b.hidden_size or a.n != b.n:
        raise ShapeMismatchError(
            f"cannot compare posteriors over {a.hidden_size}^{a.n} and {b.hidden_size}^{b.n} sequences"
        )
    diff = np.abs(a.dense() - b.dense())
    worst = int(np.argmax(diff))
    worst_sequence = tuple(int(v) for v in np.unravel_index(worst, (a.hidden_size,) * a.n))
    marginal_diffs = np.abs(a.marginals() - b.marginals()).max(axis=1)
    return PosteriorComparison(float(diff[worst]), worst_sequence, marginal_diffs)
