import logging
from typing import Sequence

import numpy as np
from scipy.special import logsumexp

from ..tables import LOG_ZERO

logger = logging.getLogger(__name__)


def forward_backward_batch(unary: np.ndarray, pairwise: Sequence[np.ndarray]) -> tuple[np.ndarray, np.ndarray]:
    """
    同一条成对因子链在 B 组一元势下的前向-后向递推 (对数域)。

    第 b 条链的未归一化权重为
        Σₙ unary[b, n, xₙ] + Σₙ pairwise[n][xₙ, xₙ₊₁]。
    每一步对消息做归一化, 丢弃的常数在对数域中累加, 得到 log Z。

    :param unary: 形状 (B, N, K) 的一元对数势。
    :param pairwise: N-1 个形状 (K, K) 的成对对数势, 所有链共用。
    :return: (log Z 形状 (B,), 边缘分布 (B, N, K) 对数域); log Z = -inf 的链其边缘分布无意义。
    """
    n_batch, n_steps, n_states = unary.shape
    alpha = np.empty((n_batch, n_steps, n_states))
    log_z = np.zeros(n_batch)

    with np.errstate(divide="ignore", invalid="ignore"):
        message = unary[:, 0]
        for n in range(n_steps):
            if n > 0:
                message = logsumexp(alpha[:, n - 1, :, None] + pairwise[n - 1][None], axis=1) + unary[:, n]
            scale = logsumexp(message, axis=-1)
            alpha[:, n] = message - np.where(np.isneginf(scale), 0.0, scale)[:, None]
            log_z += scale

        beta = np.zeros((n_batch, n_steps, n_states))
        for n in range(n_steps - 2, -1, -1):
            message = logsumexp(pairwise[n][None] + (unary[:, n + 1] + beta[:, n + 1])[:, None, :], axis=2)
            peak = message.max(axis=-1, keepdims=True)
            beta[:, n] = message - np.where(np.isneginf(peak), 0.0, peak)

        joint = alpha + beta
        marginals = joint - logsumexp(joint, axis=-1, keepdims=True)

    dead = np.isneginf(log_z)
    if dead.any():
        logger.debug(f"Forward pass found zero total mass for {int(dead.sum())} of {n_batch} chains")
    marginals.flags.writeable = False
    return log_z, marginals


def forward_backward(unary: np.ndarray, pairwise: Sequence[np.ndarray]) -> tuple[float, np.ndarray | None]:
    """
    单条链的前向-后向递推。

    :param unary: 形状 (N, K) 的一元对数势。
    :param pairwise: N-1 个形状 (K, K) 的成对对数势。
    :return: (log Z, 边缘分布 (N, K) 对数域); 若 Z = 0, 边缘分布为 None。
    """
    log_z, marginals = forward_backward_batch(np.asarray(unary)[None], pairwise)
    if log_z[0] == LOG_ZERO:
        return LOG_ZERO, None
    return float(log_z[0]), marginals[0]
