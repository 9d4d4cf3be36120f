"""
由线性链 CRF 构造后验分布相同的 HMC。

给定势函数 Vₙ, Uₙ, 定义 (全部在对数域计算):
    ψₙ(x)          = log Σ_y exp Uₙ(x, y)
    φ₁(x, x')      = V₁(x, x') + ψ₁(x) + ψ₂(x')
    φₙ(x, x')      = Vₙ(x, x') + ψₙ₊₁(x')                 (n ≥ 2)
    β_N(x)         = 0
    βₙ(x)          = log Σ_x' exp(φₙ(x, x') + βₙ₊₁(x'))
则 HMC
    q(x₁)          ∝ exp β₁(x₁)
    q(xₙ₊₁ | xₙ)   = exp(φₙ(xₙ, xₙ₊₁) + βₙ₊₁(xₙ₊₁) − βₙ(xₙ))
    q(yₙ | xₙ)     = exp(Uₙ(xₙ, yₙ) − ψₙ(xₙ))
对每个正证据的 y 都有 q(x | y) = p(x | y)。
"""
import logging
from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from ..chains.crf import CrfModel
from ..chains.hmc import HmcModel
from ..errors import DegenerateModelError, InvalidModelError
from ..schemas import TraceFile, encode_log_table
from ..tables import LOG_ZERO, normalize_log

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ConstructionTrace:
    """构造过程的中间量 (对数域), 便于审计。"""
    psi: tuple[np.ndarray, ...]
    phi: tuple[np.ndarray, ...]
    beta: tuple[np.ndarray, ...]
    # 广义模式下的占位行: βₙ(x) = -inf 的转移行, ψₙ(x) = -inf 的发射行
    unreachable_transitions: tuple[np.ndarray, ...]
    unreachable_emissions: tuple[np.ndarray, ...]

    def recompute_beta(self) -> tuple[np.ndarray, ...]:
        return build_beta(self.phi, self.beta[-1].shape[0], check=False)

    def check_recomputable(self, tolerance: float = 1e-12) -> bool:
        for stored, fresh in zip(self.beta, self.recompute_beta()):
            finite = np.isfinite(stored)
            if not np.array_equal(finite, np.isfinite(fresh)):
                return False
            if np.any(np.abs(stored[finite] - fresh[finite]) > tolerance):
                return False
        return True

    def to_document(self) -> TraceFile:
        return TraceFile(
            psi=[encode_log_table(p) for p in self.psi],
            phi=[encode_log_table(p) for p in self.phi],
            beta=[encode_log_table(b) for b in self.beta],
            unreachable_transitions=[u.tolist() for u in self.unreachable_transitions],
            unreachable_emissions=[u.tolist() for u in self.unreachable_emissions],
        )


def _readonly(table: np.ndarray) -> np.ndarray:
    table.flags.writeable = False
    return table


def build_psi(model: CrfModel) -> tuple[np.ndarray, ...]:
    """
    ψₙ(x) = log Σ_y exp Uₙ(x, y)。
    所有 Uₙ 相同时只计算一次并共享。
    """
    if model.is_emission_homogeneous():
        psi = _readonly(logsumexp(model.U[0], axis=1))
        rows = (psi,) * model.n
    else:
        rows = tuple(_readonly(logsumexp(u, axis=1)) for u in model.U)
    for n, row in enumerate(rows):
        if np.all(row == LOG_ZERO):
            raise DegenerateModelError(f"every label has zero emission weight at position {n}")
    return rows


def build_phi(model: CrfModel, psi) -> tuple[np.ndarray, ...]:
    """将 ψ 吸收进成对因子: φ₁ 含 ψ₁ 与 ψ₂, 其后 φₙ 只含 ψₙ₊₁。"""
    phi = []
    for n, v in enumerate(model.V):
        table = v + psi[n + 1][None, :]
        if n == 0:
            table = table + psi[0][:, None]
        phi.append(_readonly(table))
    return tuple(phi)


def build_beta(phi, size: int, *, check: bool = True) -> tuple[np.ndarray, ...]:
    """
    后向递推, 从 β_N ≡ 0 (即 1) 一直算到 β₁。
    N = 1 时没有 φ, 只返回 β₁ ≡ 0。
    """
    beta = [_readonly(np.zeros(size))]
    for table in reversed(phi):
        beta.append(_readonly(logsumexp(table + beta[-1][None, :], axis=1)))
    beta.reverse()
    if check and np.all(beta[0] == LOG_ZERO):
        raise DegenerateModelError("every label sequence has zero weight (beta_1 is zero everywhere)")
    return tuple(beta)


def _placebo_rows(table: np.ndarray, unreachable: np.ndarray) -> np.ndarray:
    """不可达状态的行替换为均匀分布, 其余行精确归一化。"""
    rows = np.array(table, dtype=np.float64)
    uniform = -np.log(rows.shape[1])
    for x in range(rows.shape[0]):
        rows[x] = uniform if unreachable[x] else normalize_log(rows[x])
    return _readonly(rows)


def chain_from_factors(phi, size: int):
    """
    成对因子 φ₁..φ_{N-1} 定义的马尔可夫链:
        p(w₁) ∝ exp β₁(w₁),  p(wₙ₊₁ | wₙ) = exp(φₙ + βₙ₊₁ − βₙ)。

    :return: (log 初始分布, log 转移表列表, β, 不可达转移行标记)
    """
    beta = build_beta(phi, size)
    init = normalize_log(beta[0])
    trans, unreachable = [], []
    for n, table in enumerate(phi):
        dead = np.isneginf(beta[n])
        with np.errstate(invalid="ignore"):
            raw = table + beta[n + 1][None, :] - beta[n][:, None]
        trans.append(_placebo_rows(np.where(dead[:, None], 0.0, raw), dead))
        unreachable.append(_readonly(dead))
    return init, trans, beta, unreachable


def _construct(model: CrfModel) -> tuple[HmcModel, ConstructionTrace]:
    psi = build_psi(model)
    phi = build_phi(model, psi)
    _, trans, beta, unreachable_trans = chain_from_factors(phi, model.hidden.size)

    if model.n == 1:
        # 没有 φ, ψ₁ 直接进入初始分布: q(x₁ | y₁) ∝ exp U₁(x₁, y₁)
        init = normalize_log(psi[0] + beta[0])
    else:
        init = normalize_log(beta[0])

    emit, unreachable_emit = [], []
    for u, p in zip(model.U, psi):
        dead = np.isneginf(p)
        with np.errstate(invalid="ignore"):
            raw = u - p[:, None]
        emit.append(_placebo_rows(np.where(dead[:, None], 0.0, raw), dead))
        unreachable_emit.append(_readonly(dead))

    hmc = HmcModel(model.hidden, model.obs, model.n, init, trans, emit)
    trace = ConstructionTrace(
        psi=psi,
        phi=phi,
        beta=beta,
        unreachable_transitions=tuple(unreachable_trans),
        unreachable_emissions=tuple(unreachable_emit),
    )
    placebo = sum(int(u.sum()) for u in unreachable_trans) + sum(int(u.sum()) for u in unreachable_emit)
    logger.info(f"Constructed HMC from {model!r} (mode={model.mode}, placebo rows={placebo})")
    return hmc, trace


def crf_to_hmc(model: CrfModel) -> tuple[HmcModel, ConstructionTrace]:
    """严格模式 CRF -> 后验等价的 HMC。"""
    if model.mode != "strict":
        raise InvalidModelError("crf_to_hmc expects a strict-mode CRF; use crf_to_hmc_generalized")
    return _construct(model)


def crf_to_hmc_generalized(model: CrfModel) -> tuple[HmcModel, ConstructionTrace]:
    """
    非负权重 CRF (对数域, 允许 -inf) -> HMC。公式不变, 零权重以 -inf 传播;
    总质量为零的行以均匀占位行代替并在 trace 中标记, 它们不影响任何后验。
    """
    return _construct(model)


def convert(model: CrfModel) -> tuple[HmcModel, ConstructionTrace]:
    """按模型模式选择构造方式。"""
    if model.mode == "strict":
        return crf_to_hmc(model)
    return crf_to_hmc_generalized(model)


def hmc_to_crf(model: HmcModel) -> CrfModel:
    """
    HMC 参数的对数直接作为 CRF 势:
        Vₙ = log qₙ₊₁(· | ·),  U₁ = log q₁ + log q₁(y | x),  Uₙ = log qₙ(y | x)。
    有零概率时得到广义模式 CRF。
    """
    U = [model.emit[0] + model.init[:, None]] + list(model.emit[1:])
    V = list(model.trans)
    mode = "generalized" if model.mode == "generalized" else "strict"
    logger.info(f"Read {model!r} as a {mode} CRF")
    return CrfModel(model.hidden, model.obs, model.n, V, U, mode=mode)
