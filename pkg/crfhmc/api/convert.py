from fastapi import APIRouter
from fastapi.concurrency import run_in_threadpool

from .. import schemas
from ..chains.crf import CrfModel
from ..chains.factory import build_model
from ..errors import ChainError
from ..services import equivalence
from .errors import to_http_exception

router = APIRouter(redirect_slashes=False)


def _convert(request: schemas.ConvertRequest) -> dict:
    model = build_model(request.model)
    if isinstance(model, CrfModel):
        hmc, construction = equivalence.convert(model)
        return {
            "model": hmc.to_document(),
            "trace": construction.to_document() if request.trace else None,
        }
    return {"model": equivalence.hmc_to_crf(model).to_document()}


@router.post("", response_model=schemas.ConvertResponse)
async def convert_model(request: schemas.ConvertRequest):
    """
    CRF -> 后验等价的 HMC (可附带构造中间量); HMC -> 其对数参数形式的 CRF。
    """
    try:
        return await run_in_threadpool(_convert, request)
    except ChainError as e:
        raise to_http_exception(e)
