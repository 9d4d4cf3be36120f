import datetime
from typing import Annotated, List, Literal, Optional, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, StrictFloat, StrictInt

# ====================
# 基础类型
# ====================

# 对数域数值: JSON 没有无穷大, 用字符串 "-inf" 表示 -∞
NEG_INF_TOKEN = "-inf"
LogEntry = Union[StrictInt, StrictFloat, Literal["-inf"]]
ProbEntry = Union[StrictInt, StrictFloat]

LogTable = List[List[LogEntry]]
LogRow = List[LogEntry]
ProbTable = List[List[ProbEntry]]


def decode_log_entry(value) -> float:
    return float("-inf") if value == NEG_INF_TOKEN else float(value)


def encode_log_entry(value: float):
    return NEG_INF_TOKEN if value == float("-inf") else float(value)


def decode_log_table(table) -> list:
    """嵌套列表 (含 "-inf") -> 浮点嵌套列表; 形状检查留给 as_table。"""
    if isinstance(table, list):
        return [decode_log_table(v) for v in table]
    return decode_log_entry(table)


def encode_log_table(table) -> list:
    return _encode_nested(np.asarray(table, dtype=np.float64).tolist())


def _encode_nested(values):
    if isinstance(values, list):
        return [_encode_nested(v) for v in values]
    return encode_log_entry(values)


# ====================
# 模型文件
# ====================

class ModelFileBase(BaseModel):
    model_config = ConfigDict(extra="forbid")

    hidden_symbols: List[str] = Field(min_length=1)
    obs_symbols: List[str] = Field(min_length=1)
    n: int = Field(ge=1)
    mode: Literal["strict", "generalized"] = "strict"


class CrfModelFile(ModelFileBase):
    kind: Literal["crf"]
    V: List[LogTable]
    U: List[LogTable]


class HmcModelFile(ModelFileBase):
    kind: Literal["hmc"]
    init: List[ProbEntry]
    trans: List[ProbTable]
    emit: List[ProbTable]


ModelFile = Annotated[Union[CrfModelFile, HmcModelFile], Field(discriminator="kind")]


class TraceFile(BaseModel):
    """构造中间量 ψ、φ、β (对数域) 以及占位行标记。"""
    psi: List[LogRow]
    phi: List[LogTable]
    beta: List[LogRow]
    unreachable_transitions: List[List[bool]]
    unreachable_emissions: List[List[bool]]


# ====================
# 校验报告
# ====================

class VerificationReport(BaseModel):
    n: int
    hidden_size: int
    obs_size: int
    mode: str
    against: Literal["constructed", "file"]
    sequences_checked: int
    sequences_skipped: int
    sampled: bool
    oracle_used: bool
    max_discrepancy: float
    max_marginal_discrepancy: float
    max_joint_discrepancy: Optional[float] = None
    worst_observation: Optional[List[str]] = None
    worst_position: Optional[int] = None
    mpm_disagreements: int
    tolerance: float
    passed: bool

    def summary(self) -> str:
        lines = [
            f"model: n={self.n} |hidden|={self.hidden_size} |obs|={self.obs_size} mode={self.mode}",
            f"compared against: {self.against} HMC",
            f"observation sequences checked: {self.sequences_checked}"
            + (" (sampled)" if self.sampled else " (exhaustive)")
            + (f", skipped with zero evidence: {self.sequences_skipped}" if self.sequences_skipped else ""),
            f"max posterior discrepancy: {self.max_discrepancy:.3e}",
            f"  marginal: {self.max_marginal_discrepancy:.3e}",
        ]
        if self.max_joint_discrepancy is not None:
            lines.append(f"  joint (enumerated): {self.max_joint_discrepancy:.3e}")
        if self.worst_observation is not None:
            lines.append(f"worst observation: {' '.join(self.worst_observation)}")
        if self.worst_position is not None:
            lines.append(f"worst position: {self.worst_position}")
        lines.append(f"MPM disagreements: {self.mpm_disagreements}")
        verdict = "PASS" if self.passed else "FAIL"
        lines.append(f"{verdict} (tolerance {self.tolerance:.1e})")
        return "\n".join(lines)


# ====================
# API 请求/响应模型
# ====================

class ConvertRequest(BaseModel):
    model: ModelFile
    trace: bool = False


class ConvertResponse(BaseModel):
    model: ModelFile
    trace: Optional[TraceFile] = None


class DecodeRequest(BaseModel):
    model: ModelFile
    sequences: List[List[str]]
    marginals: bool = False
    tile: bool = False


class DecodedSequence(BaseModel):
    index: int
    labels: Optional[List[str]] = None
    marginals: Optional[List[List[float]]] = None
    error: Optional[str] = None


class VerifyRequest(BaseModel):
    model: CrfModelFile
    against: Optional[HmcModelFile] = None
    budget: Optional[int] = Field(default=None, ge=1)
    tolerance: Optional[float] = Field(default=None, ge=0.0)
    samples: Optional[int] = Field(default=None, ge=1)
    seed: int = 0


class VerificationRun(BaseModel):
    model_config = ConfigDict(from_attributes=True, protected_namespaces=())

    id: int
    model_digest: str
    n: int
    hidden_size: int
    obs_size: int
    max_discrepancy: float
    tolerance: float
    passed: bool
    sequences_checked: int
    sampled: bool
    timestamp: datetime.datetime


class VerificationRunDetail(VerificationRun):
    report: VerificationReport


