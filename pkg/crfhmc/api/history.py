from typing import List, Optional

from fastapi import APIRouter, Depends, HTTPException, Query
from sqlalchemy.ext.asyncio import AsyncSession

from .. import crud, schemas
from ..database import get_db

router = APIRouter(redirect_slashes=False)


@router.get("/runs", response_model=List[schemas.VerificationRun])
async def read_verification_runs(
    skip: int = 0,
    limit: int = Query(100, description="最多返回多少条记录"),
    model_digest: Optional[str] = Query(None, description="只返回该模型 (SHA-256) 的记录"),
    db: AsyncSession = Depends(get_db),
):
    """
    获取校验记录列表, 最新的在前。
    """
    return await crud.get_verification_runs(db, skip=skip, limit=limit, model_digest=model_digest)


@router.get("/runs/{run_id}", response_model=schemas.VerificationRunDetail)
async def read_verification_run(run_id: int, db: AsyncSession = Depends(get_db)):
    """获取单条校验记录及完整报告"""
    db_run = await crud.get_verification_run(db, run_id=run_id)
    if db_run is None:
        raise HTTPException(status_code=404, detail="Verification run not found")
    return db_run
