import logging
from typing import List

from fastapi import APIRouter
from fastapi.concurrency import run_in_threadpool

from .. import schemas
from ..chains.base import BaseChainModel
from ..chains.factory import build_model
from ..errors import ChainError, LengthMismatchError
from .errors import to_http_exception

logger = logging.getLogger(__name__)

router = APIRouter(redirect_slashes=False)


def _decode_all(model: BaseChainModel, request: schemas.DecodeRequest) -> list[dict]:
    tiled = {model.n: model}
    results = []
    for index, tokens in enumerate(request.sequences):
        try:
            y = model.obs.encode(tokens)
            if len(y) not in tiled:
                if not request.tile:
                    raise LengthMismatchError(f"sequence has length {len(y)}, model expects {model.n}")
                tiled[len(y)] = model.tile(len(y))
            marginals = tiled[len(y)].posterior_marginals(y)
        except ChainError as e:
            logger.warning(f"Decoding failed for sequence {index}: {e}")
            results.append({"index": index, "error": str(e)})
            continue
        results.append({
            "index": index,
            "labels": list(model.hidden.decode(marginals.decode())),
            "marginals": marginals.probabilities().tolist() if request.marginals else None,
        })
    return results


@router.post("", response_model=List[schemas.DecodedSequence])
async def decode_sequences(request: schemas.DecodeRequest):
    """
    对每条观测序列做 MPM 解码。单条序列出错时在该条目中返回错误信息, 其余照常处理。
    """
    try:
        model = build_model(request.model)
    except ChainError as e:
        raise to_http_exception(e)
    # 前向-后向是 CPU 密集型任务, 放到线程池中执行
    return await run_in_threadpool(_decode_all, model, request)
