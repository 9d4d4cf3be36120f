import logging
from typing import Sequence

import numpy as np

from .. import schemas
from ..errors import DegenerateModelError, InvalidModelError
from ..tables import LOG_ZERO, Alphabet, LabelSeq, ObsSeq, as_table
from .base import BaseChainModel, PosteriorMarginals

logger = logging.getLogger(__name__)

MODES = ("strict", "generalized")


class CrfModel(BaseChainModel):
    """
    线性链 CRF:
        p(x | y) ∝ exp[ Σₙ Vₙ(xₙ, xₙ₊₁) + Σₙ Uₙ(xₙ, yₙ) ]。

    严格模式下所有势均为有限实数; 广义模式下表格为非负权重的对数, 允许 -inf (权重为零)。
    """

    kind = "crf"

    def __init__(self, hidden: Alphabet, obs: Alphabet, n: int, V, U, mode: str = "strict"):
        super().__init__(hidden, obs, n)
        if mode not in MODES:
            raise InvalidModelError(f"unknown mode '{mode}', expected one of {list(MODES)}")
        self.mode = mode
        V, U = list(V), list(U)
        if len(V) != self.n - 1:
            raise InvalidModelError(f"V must hold {self.n - 1} tables, got {len(V)}")
        if len(U) != self.n:
            raise InvalidModelError(f"U must hold {self.n} tables, got {len(U)}")

        generalized = mode == "generalized"
        k, m = hidden.size, obs.size
        self.V = tuple(as_table(v, (k, k), allow_neg_inf=generalized, name=f"V[{i}]") for i, v in enumerate(V))
        self.U = tuple(as_table(u, (k, m), allow_neg_inf=generalized, name=f"U[{i}]") for i, u in enumerate(U))

    @classmethod
    def tiled(cls, hidden: Alphabet, obs: Alphabet, n: int, V, U, mode: str = "strict") -> "CrfModel":
        """将同一对 (V, U) 平铺到所有位置。"""
        return cls(hidden, obs, n, [V] * (int(n) - 1), [U] * int(n), mode=mode)

    def is_homogeneous(self) -> bool:
        same_v = all(np.array_equal(v, self.V[0]) for v in self.V)
        same_u = all(np.array_equal(u, self.U[0]) for u in self.U)
        return same_v and same_u

    def is_emission_homogeneous(self) -> bool:
        return all(np.array_equal(u, self.U[0]) for u in self.U)

    def tile(self, length: int) -> "CrfModel":
        if length == self.n:
            return self
        if not self.is_homogeneous():
            raise InvalidModelError("tiling requires identical V and U tables at every position")
        if length > 1 and not self.V:
            raise InvalidModelError("tiling to length > 1 requires at least one V table")
        V = self.V[0] if self.V else None
        return CrfModel.tiled(self.hidden, self.obs, length, V, self.U[0], mode=self.mode)

    def log_weight(self, x: Sequence[int], y: Sequence[int]) -> float:
        return self.log_score(x, y)

    def log_score(self, x: Sequence[int], y: Sequence[int]) -> float:
        """未归一化得分 Σ Vₙ(xₙ, xₙ₊₁) + Σ Uₙ(xₙ, yₙ)。"""
        x = self.check_labels(x)
        y = self.check_observations(y)
        score = sum(float(self.U[n][x[n], y[n]]) for n in range(self.n))
        score += sum(float(self.V[n][x[n], x[n + 1]]) for n in range(self.n - 1))
        return score

    def conditioned_chain(self, y: ObsSeq) -> tuple[np.ndarray, list[np.ndarray]]:
        unary = np.stack([self.U[n][:, y[n]] for n in range(self.n)])
        return unary, list(self.V)

    def conditioned_batch(self, ys: np.ndarray) -> tuple[np.ndarray, list[np.ndarray]]:
        unary = np.stack([self.U[n][:, ys[:, n]].T for n in range(self.n)], axis=1)
        return unary, list(self.V)

    def _raise_zero_mass(self, y: ObsSeq):
        raise DegenerateModelError(f"every label sequence has zero weight for observations {list(y)}")

    def log_normalizer(self, y: Sequence[int]) -> float:
        """log κ(y)。"""
        log_z = self.log_partition(y)
        if log_z == LOG_ZERO:
            self._raise_zero_mass(tuple(y))
        return log_z

    @classmethod
    def from_document(cls, doc: "schemas.CrfModelFile") -> "CrfModel":
        hidden = Alphabet(tuple(doc.hidden_symbols))
        obs = Alphabet(tuple(doc.obs_symbols))
        V = [schemas.decode_log_table(t) for t in doc.V]
        U = [schemas.decode_log_table(t) for t in doc.U]
        return cls(hidden, obs, doc.n, V, U, mode=doc.mode)

    def to_document(self) -> "schemas.CrfModelFile":
        return schemas.CrfModelFile(
            kind="crf",
            hidden_symbols=list(self.hidden.symbols),
            obs_symbols=list(self.obs.symbols),
            n=self.n,
            mode=self.mode,
            V=[schemas.encode_log_table(v) for v in self.V],
            U=[schemas.encode_log_table(u) for u in self.U],
        )


def crf_log_score(model: CrfModel, x: Sequence[int], y: Sequence[int]) -> float:
    return model.log_score(x, y)


def crf_log_normalizer(model: CrfModel, y: Sequence[int]) -> float:
    return model.log_normalizer(y)


def crf_posterior_marginals(model: CrfModel, y: Sequence[int]) -> PosteriorMarginals:
    return model.posterior_marginals(y)


def crf_mpm_decode(model: CrfModel, y: Sequence[int]) -> LabelSeq:
    return model.mpm_decode(y)
