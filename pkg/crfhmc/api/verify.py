from fastapi import APIRouter, Depends
from fastapi.concurrency import run_in_threadpool
from sqlalchemy.ext.asyncio import AsyncSession

from .. import crud, schemas
from ..chains.crf import CrfModel
from ..chains.hmc import HmcModel
from ..database import get_db
from ..errors import ChainError
from ..model_io import model_digest
from ..services import verifier
from .errors import to_http_exception

router = APIRouter(redirect_slashes=False)


@router.post("", response_model=schemas.VerificationRunDetail)
async def verify_model(request: schemas.VerifyRequest, db: AsyncSession = Depends(get_db)):
    """
    校验 CRF 与 HMC (默认由 CRF 构造) 的后验等价性, 并保存校验记录。
    """
    try:
        crf = CrfModel.from_document(request.model)
        against = HmcModel.from_document(request.against) if request.against else None
        # 穷举是 CPU 密集型任务, 放到线程池中执行
        report = await run_in_threadpool(
            verifier.verify_equivalence,
            crf,
            against=against,
            budget=request.budget,
            tolerance=request.tolerance,
            samples=request.samples,
            seed=request.seed,
        )
    except ChainError as e:
        raise to_http_exception(e)

    return await crud.create_verification_run(db, model_digest(crf.to_document()), report)
