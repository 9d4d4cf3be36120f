import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
import numpy.typing as npt

from .errors import (
    AllZeroRowError,
    InvalidTableError,
    LengthMismatchError,
    UnknownSymbolError,
)

LOG_ZERO = float("-inf")
LOG_ONE = 0.0

# 概率差在此范围内视为并列, 取最小下标
TIE_TOLERANCE = 1e-12

# 一维/二维表: 对数域 float64 数组, 构造后只读
Table1 = npt.NDArray[np.float64]
Table2 = npt.NDArray[np.float64]

# 标签序列与观测序列: 字母表下标组成的元组
LabelSeq = tuple[int, ...]
ObsSeq = tuple[int, ...]


@dataclass(frozen=True)
class Alphabet:
    """
    有限字母表 (隐藏标签集 Ω 或观测集 Λ)。
    符号有序且唯一, 下标与符号一一对应。
    """
    symbols: tuple[str, ...]
    _index: dict[str, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        symbols = tuple(str(s) for s in self.symbols)
        if not symbols:
            raise InvalidTableError("alphabet must contain at least one symbol")
        if len(set(symbols)) != len(symbols):
            raise InvalidTableError(f"alphabet symbols are not unique: {list(symbols)}")
        object.__setattr__(self, "symbols", symbols)
        object.__setattr__(self, "_index", {s: i for i, s in enumerate(symbols)})

    @classmethod
    def of_size(cls, size: int, prefix: str = "s") -> "Alphabet":
        return cls(tuple(f"{prefix}{i}" for i in range(size)))

    @property
    def size(self) -> int:
        return len(self.symbols)

    def index(self, symbol: str) -> int:
        try:
            return self._index[symbol]
        except KeyError:
            raise UnknownSymbolError(f"unknown symbol '{symbol}'; expected one of {list(self.symbols)}") from None

    def symbol(self, index: int) -> str:
        if not 0 <= index < self.size:
            raise UnknownSymbolError(f"index {index} out of range for alphabet of size {self.size}")
        return self.symbols[index]

    def encode(self, tokens: Iterable[str]) -> tuple[int, ...]:
        return tuple(self.index(t) for t in tokens)

    def decode(self, indices: Iterable[int]) -> tuple[str, ...]:
        return tuple(self.symbol(i) for i in indices)

    def check_seq(self, seq: Sequence[int]) -> tuple[int, ...]:
        """校验下标序列并返回元组形式。"""
        seq = tuple(int(i) for i in seq)
        if not seq:
            raise LengthMismatchError("sequences must have length at least 1")
        for i in seq:
            if not 0 <= i < self.size:
                raise UnknownSymbolError(f"index {i} out of range for alphabet of size {self.size}")
        return seq


def as_table(values, shape: tuple[int, ...], *, allow_neg_inf: bool = True, name: str = "table") -> np.ndarray:
    """
    构造只读的对数域表格。
    NaN 与 +inf 总是被拒绝; 严格模式 (allow_neg_inf=False) 下 -inf 也被拒绝。
    """
    try:
        table = np.array(values, dtype=np.float64)
    except (TypeError, ValueError) as e:
        raise InvalidTableError(f"{name}: entries are not numeric ({e})") from None
    if table.shape != tuple(shape):
        raise InvalidTableError(f"{name}: expected shape {tuple(shape)}, got {table.shape}")
    if np.isnan(table).any():
        raise InvalidTableError(f"{name}: NaN entries are not allowed")
    if np.isposinf(table).any():
        raise InvalidTableError(f"{name}: +inf entries are not allowed")
    if not allow_neg_inf and np.isneginf(table).any():
        raise InvalidTableError(f"{name}: -inf entries require generalized mode")
    table.flags.writeable = False
    return table


def log_sum_exp(values: Iterable[float]) -> float:
    """
    稳定地计算 log Σ exp(vᵢ)。空列表返回 -inf。
    先减去最大值, 再用 fsum/expm1/log1p 求和, 相对误差约 1e-15。
    """
    xs = [float(v) for v in values]
    if not xs:
        return LOG_ZERO
    maximum = max(xs)
    if math.isinf(maximum):
        return maximum
    total = math.fsum(math.expm1(x - maximum) for x in xs)
    return maximum + math.log1p(total + float(len(xs) - 1))


def normalize_log(row) -> Table1:
    """对数域行归一化, 使 exp 后和为 1。"""
    row = np.asarray(row, dtype=np.float64)
    total = log_sum_exp(row)
    if total == LOG_ZERO:
        raise AllZeroRowError("cannot normalize a row whose entries are all -inf")
    normalized = row - total
    normalized.flags.writeable = False
    return normalized


def argmax_lowest(log_rows):
    """
    沿最后一维取概率最大的下标, 取最小下标打破并列。

    与最大概率相差不超过 TIE_TOLERANCE 的项都算作并列, 不要求严格相等:
    例如 [0.5 - 4e-13, 0.5 + 4e-13] 返回 0, 而不是严格的 argmax 1。
    一维输入返回 int, 多维输入返回下标数组。
    """
    probs = np.exp(np.asarray(log_rows, dtype=np.float64))
    best = probs.max(axis=-1, keepdims=True)
    picked = np.argmax(probs >= best - TIE_TOLERANCE, axis=-1)
    return int(picked) if probs.ndim == 1 else picked


def hamming_loss(a: Sequence[int], b: Sequence[int]) -> int:
    """加性 0/1 损失: 两个标签序列不同位置的个数。"""
    if len(a) != len(b):
        raise LengthMismatchError(f"cannot compare sequences of lengths {len(a)} and {len(b)}")
    return sum(1 for u, v in zip(a, b) if u != v)


def expected_hamming_loss(log_rows, x: Sequence[int]) -> float:
    """
    在后验边缘分布下标签序列 x 的期望汉明损失 Σₙ (1 − p(xₙ | y))。
    MPM 解码使该值最小。
    """
    log_rows = np.asarray(log_rows, dtype=np.float64)
    if log_rows.shape[0] != len(x):
        raise LengthMismatchError(f"labelling of length {len(x)} against {log_rows.shape[0]} marginal rows")
    hits = np.exp(log_rows[np.arange(len(x)), list(x)])
    return float(math.fsum(1.0 - hits))
