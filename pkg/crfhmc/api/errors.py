from fastapi import HTTPException

from ..errors import (
    BudgetExceededError,
    ChainError,
    DegenerateModelError,
    ImpossibleObservationError,
)


def to_http_exception(error: ChainError) -> HTTPException:
    """把库异常映射为 HTTP 错误: 退化/不可能观测 422, 超预算 413, 其余 400。"""
    if isinstance(error, (DegenerateModelError, ImpossibleObservationError)):
        return HTTPException(status_code=422, detail=str(error))
    if isinstance(error, BudgetExceededError):
        return HTTPException(status_code=413, detail=str(error))
    return HTTPException(status_code=400, detail=str(error))
