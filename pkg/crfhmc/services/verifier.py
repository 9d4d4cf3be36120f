import itertools
import logging

import numpy as np

from ..chains.crf import CrfModel
from ..chains.hmc import HmcModel
from ..config import DEFAULT_BUDGET, DEFAULT_TOLERANCE
from ..errors import BudgetExceededError, ShapeMismatchError
from ..schemas import VerificationReport
from ..tables import argmax_lowest
from . import equivalence, oracle

logger = logging.getLogger(__name__)

# 每批 (标签序列数 × 观测序列数) 的上限, 控制穷举表的内存
BATCH_CELLS = 1 << 22
MAX_BATCH = 4096


def _observation_batches(crf: CrfModel, budget: int, samples: int | None, seed: int, batch: int):
    """预算内按字典序穷举 Λ^N, 否则按 samples 随机抽样; 每次产出形状 (B, N) 的一批。"""
    count = oracle.enumeration_size(crf.obs.size, crf.n)
    if count <= budget:
        product = itertools.product(range(crf.obs.size), repeat=crf.n)

        def exhaustive():
            while chunk := list(itertools.islice(product, batch)):
                yield np.array(chunk, dtype=np.intp).reshape(-1, crf.n)
        return exhaustive(), False
    if samples is None:
        raise BudgetExceededError(
            f"{crf.obs.size}^{crf.n} = {count} observation sequences exceed the budget of {budget}; "
            f"pass a sample count to verify on random sequences"
        )
    rng = np.random.default_rng(seed)
    drawn = rng.integers(0, crf.obs.size, size=(samples, crf.n)).astype(np.intp)
    logger.info(f"Observation space out of budget, sampling {samples} sequences with seed {seed}")
    return (drawn[i:i + batch] for i in range(0, samples, batch)), True


def verify_equivalence(crf: CrfModel, against: HmcModel | None = None, budget: int | None = None,
                       tolerance: float | None = None, samples: int | None = None,
                       seed: int = 0) -> VerificationReport:
    """
    比较 CRF 后验与 HMC 后验 (默认为由 CRF 构造的 HMC)。

    对每个观测序列 y:
      - 逐位置边缘分布 (前向-后向) 的最大绝对差;
      - 若 |Ω|^N 在预算内, 还比较穷举得到的完整后验。
    一边零证据而另一边不是时记差异为 1; 两边都为零证据时跳过该 y。
    观测序列按批处理, 路径项与标签序列表对每个模型只计算一次。
    """
    budget = DEFAULT_BUDGET if budget is None else budget
    tolerance = DEFAULT_TOLERANCE if tolerance is None else tolerance

    if against is None:
        hmc, _ = equivalence.convert(crf)
    else:
        hmc = against
        if (hmc.hidden.size, hmc.obs.size, hmc.n) != (crf.hidden.size, crf.obs.size, crf.n):
            raise ShapeMismatchError(
                f"HMC shape (n={hmc.n}, hidden={hmc.hidden.size}, obs={hmc.obs.size}) does not match "
                f"CRF shape (n={crf.n}, hidden={crf.hidden.size}, obs={crf.obs.size})"
            )

    oracle_used = oracle.enumeration_size(crf.hidden.size, crf.n) <= budget
    if oracle_used:
        labels = oracle.all_sequences(crf.hidden.size, crf.n)
        crf_paths = oracle.path_scores(crf, labels)
        hmc_paths = oracle.path_scores(hmc, labels)
        batch = max(1, min(MAX_BATCH, BATCH_CELLS // labels.shape[0]))
    else:
        batch = MAX_BATCH
    batches, sampled = _observation_batches(crf, budget, samples, seed, batch)

    checked = skipped = disagreements = 0
    worst, worst_y, worst_position = -1.0, None, None
    max_marginal, max_joint = 0.0, 0.0 if oracle_used else None

    for ys in batches:
        p_log_z, p_rows = crf.batch_posterior_marginals(ys)
        q_log_z, q_rows = hmc.batch_posterior_marginals(ys)
        p_alive, q_alive = np.isfinite(p_log_z), np.isfinite(q_log_z)
        both = p_alive & q_alive
        one_sided = p_alive ^ q_alive
        skipped += int((~p_alive & ~q_alive).sum())
        checked += int((p_alive | q_alive).sum())

        discrepancy = np.where(one_sided, 1.0, -1.0)
        position = np.full(len(ys), -1)
        if one_sided.any():
            max_marginal = 1.0
        if both.any():
            per_position = np.abs(np.exp(p_rows[both]) - np.exp(q_rows[both])).max(axis=-1)
            position[both] = np.argmax(per_position, axis=1)
            discrepancy[both] = per_position.max(axis=1)
            max_marginal = max(max_marginal, float(discrepancy[both].max()))
            decoded_p, decoded_q = argmax_lowest(p_rows[both]), argmax_lowest(q_rows[both])
            disagreements += int((decoded_p != decoded_q).any(axis=1).sum())
            if oracle_used:
                p_post, _ = oracle.posterior_table(oracle.log_weight_table(crf, labels, ys[both], crf_paths))
                q_post, _ = oracle.posterior_table(oracle.log_weight_table(hmc, labels, ys[both], hmc_paths))
                joint = np.abs(p_post - q_post).max(axis=0)
                max_joint = max(max_joint, float(joint.max()))
                discrepancy[both] = np.maximum(discrepancy[both], joint)

        best = int(np.argmax(discrepancy))
        if discrepancy[best] > worst:
            worst = float(discrepancy[best])
            worst_y = tuple(int(v) for v in ys[best])
            worst_position = int(position[best]) if position[best] >= 0 else None

    report = VerificationReport(
        n=crf.n,
        hidden_size=crf.hidden.size,
        obs_size=crf.obs.size,
        mode=crf.mode,
        against="constructed" if against is None else "file",
        sequences_checked=checked,
        sequences_skipped=skipped,
        sampled=sampled,
        oracle_used=oracle_used,
        max_discrepancy=max(worst, 0.0),
        max_marginal_discrepancy=max_marginal,
        max_joint_discrepancy=max_joint,
        worst_observation=list(crf.obs.decode(worst_y)) if worst_y is not None else None,
        worst_position=worst_position,
        mpm_disagreements=disagreements,
        tolerance=tolerance,
        passed=max(worst, 0.0) <= tolerance,
    )
    logger.info(
        f"Verified {crf!r}: {checked} sequences, max discrepancy {report.max_discrepancy:.3e}, "
        f"{'passed' if report.passed else 'FAILED'}"
    )
    return report
