import os
import tempfile

# 测试使用独立的数据目录与数据库, 必须在导入 crfhmc 之前设置
_TEST_DATA_DIR = tempfile.mkdtemp(prefix="crfhmc-test-")
os.environ["CRFHMC_DATA_DIR"] = _TEST_DATA_DIR
os.environ["CRFHMC_DATABASE_URL"] = f"sqlite+aiosqlite:///{_TEST_DATA_DIR}/verification.db"

import itertools  # noqa: E402

import numpy as np  # noqa: E402
import pytest  # noqa: E402

from crfhmc.chains.crf import CrfModel  # noqa: E402
from crfhmc.chains.hmc import HmcModel  # noqa: E402
from crfhmc.model_io import dump_model  # noqa: E402
from crfhmc.services.generator import random_crf  # noqa: E402
from crfhmc.tables import Alphabet  # noqa: E402


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: 大规模随机校验, 可用 -m \"not slow\" 跳过")


def all_observations(model):
    return list(itertools.product(range(model.obs.size), repeat=model.n))


def zero_crf(n: int, hidden: int = 2, obs: int = 1) -> CrfModel:
    return CrfModel.tiled(
        Alphabet.of_size(hidden, "x"),
        Alphabet.of_size(obs, "y"),
        n,
        np.zeros((hidden, hidden)),
        np.zeros((hidden, obs)),
    )


def random_hmc(n: int, hidden: int, obs: int, seed: int) -> HmcModel:
    rng = np.random.default_rng(seed)
    init = rng.dirichlet(np.ones(hidden))
    trans = [rng.dirichlet(np.ones(hidden), size=hidden) for _ in range(n - 1)]
    emit = [rng.dirichlet(np.ones(obs), size=hidden) for _ in range(n)]
    return HmcModel.from_probabilities(
        Alphabet.of_size(hidden, "x"), Alphabet.of_size(obs, "y"), n, init, trans, emit
    )


@pytest.fixture
def seeded_crf():
    return random_crf(5, 3, 2, seed=7)


@pytest.fixture
def write_model(tmp_path):
    """把模型写入临时目录并返回路径"""
    def _write(model, name: str = "model.json"):
        path = tmp_path / name
        path.write_text(dump_model(model), encoding="utf-8")
        return path
    return _write
