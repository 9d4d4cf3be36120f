import logging

import numpy as np

from ..chains.crf import CrfModel
from ..errors import InvalidModelError
from ..tables import Alphabet

logger = logging.getLogger(__name__)

POTENTIAL_LOW = -5.0
POTENTIAL_HIGH = 5.0
ZERO_PROBABILITY = 0.1


def random_crf(n: int, hidden: int, obs: int, seed: int, mode: str = "strict",
               low: float = POTENTIAL_LOW, high: float = POTENTIAL_HIGH,
               zero_probability: float = ZERO_PROBABILITY) -> CrfModel:
    """
    随机 CRF: 势独立同分布于 [low, high]; 广义模式下每个格子以 zero_probability 的概率置为 -inf。
    同一 seed 总是得到同一模型。
    """
    if min(n, hidden, obs) < 1:
        raise InvalidModelError(f"sizes must be at least 1, got n={n} hidden={hidden} obs={obs}")
    rng = np.random.default_rng(seed)
    V = rng.uniform(low, high, size=(n - 1, hidden, hidden))
    U = rng.uniform(low, high, size=(n, hidden, obs))
    if mode == "generalized":
        V[rng.random(V.shape) < zero_probability] = -np.inf
        U[rng.random(U.shape) < zero_probability] = -np.inf
    logger.debug(f"Generated random {mode} CRF n={n} hidden={hidden} obs={obs} seed={seed}")
    return CrfModel(Alphabet.of_size(hidden, "x"), Alphabet.of_size(obs, "y"), n, list(V), list(U), mode=mode)
