class ChainError(Exception):
    """本包所有异常的基类。"""
    pass


class InvalidTableError(ChainError):
    """表格含有 NaN、+inf、形状错误, 或在严格模式下含有 -inf。"""
    pass


class InvalidModelError(ChainError):
    """模型结构不合法: 列表长度不符或 HMC 行和不为 1。"""
    pass


class AllZeroRowError(ChainError):
    """归一化的行全部为 -inf (总权重为零)。"""
    pass


class LengthMismatchError(ChainError):
    """序列长度与模型长度或另一序列不一致。"""
    pass


class ShapeMismatchError(ChainError):
    """两个后验的字母表或长度不一致, 无法比较。"""
    pass


class DegenerateModelError(ChainError):
    """CRF 对给定观测的所有标签序列权重均为零, 后验无定义。"""
    pass


class ImpossibleObservationError(ChainError):
    """观测序列在 HMC 下的概率为零, 无法对其条件化。"""
    pass


class BudgetExceededError(ChainError):
    """穷举规模超过预算。"""
    pass


class UnknownSymbolError(ChainError):
    """符号不在字母表中。"""
    pass


class UnsupportedKindError(ChainError):
    """模型文件的 kind 不被支持。"""
    pass


class ModelFileError(ChainError):
    """模型文件或序列文件解析失败, 带有字段路径或行号。"""

    def __init__(self, message: str, location: str | None = None):
        self.location = location
        super().__init__(f"{location}: {message}" if location else message)
